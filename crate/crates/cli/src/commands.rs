use std::path::{Path, PathBuf};

use admesh::geometry::{BBox, Domain, SmoothDomain, StarDomain};
use admesh::io::{self, DomainFile};
use admesh::meshgen_c11::{c11_mesh, C11Params};
use admesh::meshgen_star::{star_mesh, star_mesh_refined, STAR_CONSTANT};
use admesh::polyspace::{afp_extract, dls_fit, Mesh, PolySpace, Provenance};
use admesh::verify::{
    baseline_markov_cardinality, baseline_markov_mesh, cardinality_slope, csv_table, dls_convergence_study,
    svg_curve, svg_mesh, verify_mesh, DlsRow, SlopeFit, Target, VerifyOptions,
};
use admesh::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::{BuildArgs, Construction, Outcome};

pub fn report_error(kind: &str, message: &str) {
    let body = json!({ "schema": io::SCHEMA, "error": kind, "message": message.trim_end() });
    eprintln!("{body}");
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::InvalidDomain(_) => "invalid_domain",
        _ => "computation",
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_string(p, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                // a closed reader (`| head`) is not an error of ours
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

fn is_csv(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn load_domain(path: Option<&Path>) -> Result<DomainFile> {
    match path {
        Some(p) => io::domain_from_json(&io::read_to_string(p)?),
        None => Ok(DomainFile::disk([0.0, 0.0], 1.0)),
    }
}

enum AnyDomain {
    Smooth(SmoothDomain),
    Star(StarDomain),
}

impl AnyDomain {
    fn as_dyn(&self) -> &dyn Domain {
        match self {
            Self::Smooth(d) => d,
            Self::Star(d) => d,
        }
    }

    /// The star reading for star meshes, otherwise the smooth one when its
    /// reach validates.
    fn for_construction(df: &DomainFile, star: bool) -> Result<Self> {
        if star {
            return df.star().map(Self::Star);
        }
        match df.smooth() {
            Ok(d) => Ok(Self::Smooth(d)),
            Err(e) => df.star().map(Self::Star).map_err(|_| e),
        }
    }
}

/// A validated construction on a validated domain.
struct Builder {
    construction: Construction,
    domain: AnyDomain,
    c11: Option<C11Params>,
    markov: (f64, f64),
}

impl Builder {
    fn new(b: &BuildArgs, df: &DomainFile) -> Result<Self> {
        // parameter ranges first, so bad flags fail before geometry work
        if b.construction == Construction::C11 {
            C11Params::new(b.delta.unwrap_or(1.0), b.lambda, b.mu)?;
        }
        if b.construction == Construction::Baseline {
            admesh::verify::baseline_markov_step(2, 1, b.markov_m, b.markov_exp)?;
        }
        let star = matches!(b.construction, Construction::Star | Construction::StarRefined);
        let domain = AnyDomain::for_construction(df, star)?;
        let c11 = match (&domain, b.construction) {
            (AnyDomain::Smooth(d), Construction::C11) => {
                let p = C11Params::new(b.delta.unwrap_or(0.9 * d.reach()), b.lambda, b.mu)?;
                p.check(d)?;
                Some(p)
            }
            (AnyDomain::Star(_), Construction::C11) => {
                return Err(Error::InvalidDomain("the C^{1,1} construction needs a domain with valid reach".into()))
            }
            _ => None,
        };
        Ok(Self { construction: b.construction, domain, c11, markov: (b.markov_m, b.markov_exp) })
    }

    fn mesh(&self, n: usize) -> Result<Mesh> {
        match (&self.domain, self.construction) {
            (AnyDomain::Star(d), Construction::Star) => star_mesh(d, n),
            (AnyDomain::Star(d), Construction::StarRefined) => star_mesh_refined(d, n),
            (AnyDomain::Smooth(d), Construction::C11) => c11_mesh(d, n, self.c11.as_ref().expect("checked in new")),
            (d, Construction::Baseline) => baseline_markov_mesh(d.as_dyn(), n, self.markov.0, self.markov.1),
            _ => unreachable!("domain kind fixed by the construction"),
        }
    }

    /// Claimed constant of the construction, for meshes read from CSV.
    fn constant(&self) -> f64 {
        match self.construction {
            Construction::Star | Construction::StarRefined => STAR_CONSTANT,
            Construction::C11 => self.c11.as_ref().map_or(0.0, |p| p.constant()),
            Construction::Baseline => 2.0,
        }
    }
}

pub fn generate(b: &BuildArgs, degree: usize, out: Option<&Path>, svg: Option<&Path>) -> Result<Outcome> {
    let df = load_domain(b.domain.as_deref())?;
    let builder = Builder::new(b, &df)?;
    let mesh = builder.mesh(degree)?;
    let text = match out {
        Some(p) if is_csv(p) => io::points_to_csv(&mesh.points),
        _ => io::mesh_to_json(&mesh)?,
    };
    emit(out, text.trim_end())?;
    if let Some(p) = svg {
        io::write_string(p, &svg_mesh(&mesh, Some(builder.domain.as_dyn().shape())))?;
    }
    Ok(Outcome::Ok)
}

pub struct VerifyConfig {
    pub mesh: PathBuf,
    pub build: BuildArgs,
    pub degree: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub grid: usize,
    pub lp: bool,
    pub out: Option<PathBuf>,
}

fn read_mesh(path: &Path, degree: Option<usize>, constant: impl FnOnce() -> Result<f64>) -> Result<Mesh> {
    let text = io::read_to_string(path)?;
    if is_csv(path) {
        let degree = degree.ok_or_else(|| Error::InvalidParameter("a CSV mesh needs --degree".into()))?;
        return Ok(Mesh {
            degree,
            constant: constant()?,
            provenance: Provenance::External,
            points: io::points_from_csv(&text)?,
            layers: None,
        });
    }
    let mut mesh = io::mesh_from_json(&text)?;
    if let Some(n) = degree {
        mesh.degree = n;
    }
    Ok(mesh)
}

pub fn verify(c: &VerifyConfig) -> Result<Outcome> {
    let df = load_domain(c.build.domain.as_deref())?;
    let mesh = read_mesh(&c.mesh, c.degree, || Builder::new(&c.build, &df).map(|b| b.constant()))?;
    let star = matches!(mesh.provenance, Provenance::Star { .. } | Provenance::StarRefined { .. });
    let domain = AnyDomain::for_construction(&df, star)?;
    if mesh.dim() != domain.as_dyn().dim() {
        return Err(Error::InvalidParameter("mesh and domain dimensions differ".into()));
    }
    let opts = VerifyOptions { trials: c.trials, seed: c.seed, grid: c.grid, lp: c.lp, ..Default::default() };
    let report = verify_mesh(&mesh, domain.as_dyn(), &opts)?;
    emit(c.out.as_deref(), &io::to_versioned_json(&report)?)?;
    Ok(if report.passed() { Outcome::Ok } else { Outcome::Violated })
}

pub struct ApproximateConfig {
    pub build: BuildArgs,
    pub target: String,
    pub target_poly: Option<PathBuf>,
    pub degrees: Vec<usize>,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Serialize)]
struct Study<'a> {
    target: &'a str,
    construction: &'a str,
    seed: u64,
    rows: &'a [DlsRow],
}

/// Slack below which a fit counts as exact, whatever the bound says.
const EXACT_TOL: f64 = 1e-9;

pub fn approximate(c: &ApproximateConfig) -> Result<Outcome> {
    if c.degrees.is_empty() {
        return Err(Error::InvalidParameter("no degrees given".into()));
    }
    let target = match &c.target_poly {
        Some(p) => Target::Poly(io::poly_from_json(&io::read_to_string(p)?)?),
        None => Target::parse(&c.target)?,
    };
    let df = load_domain(c.build.domain.as_deref())?;
    let builder = Builder::new(&c.build, &df)?;
    let domain = builder.domain.as_dyn();
    if let Target::Poly(p) = &target {
        if p.space().dim() != domain.dim() {
            return Err(Error::InvalidParameter("target and domain dimensions differ".into()));
        }
    }
    let rows = dls_convergence_study(domain, |n| builder.mesh(n), &target, &c.degrees, c.trials, c.seed)?;
    let study = Study { target: target.name(), construction: c.build.construction.tag(), seed: c.seed, rows: &rows };
    emit(None, &io::to_versioned_json(&study)?)?;
    if let Some(p) = &c.out {
        let n = *c.degrees.iter().max().expect("nonempty");
        let mesh = builder.mesh(n)?;
        let space = std::sync::Arc::new(PolySpace::new(n, domain.bbox())?);
        let samples: Vec<f64> = mesh.points.iter().map(|x| target.eval(x)).collect();
        io::write_string(p, &io::poly_to_json(&dls_fit(&space, &mesh, &samples)?)?)?;
    }
    if let Some(p) = &c.csv {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.degree.to_string(),
                    r.cardinality.to_string(),
                    r.error.to_string(),
                    r.norming.to_string(),
                    r.best_error.to_string(),
                    r.bound.to_string(),
                ]
            })
            .collect();
        io::write_string(p, &csv_table(&["degree", "cardinality", "error", "norming", "best_error", "bound"], &table))?;
    }
    if let Some(p) = &c.svg {
        let curve = |f: fn(&DlsRow) -> f64| rows.iter().map(|r| (r.degree as f64, f(r))).collect::<Vec<_>>();
        let series = vec![("error".to_string(), curve(|r| r.error)), ("bound".to_string(), curve(|r| r.bound))];
        io::write_string(p, &svg_curve(&series))?;
    }
    let violated = rows.iter().any(|r| r.error > r.bound.max(EXACT_TOL));
    Ok(if violated { Outcome::Violated } else { Outcome::Ok })
}

pub struct CompareConfig {
    pub domain: Option<PathBuf>,
    pub degrees: Vec<usize>,
    pub delta: Option<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub markov_m: f64,
    pub markov_exp: f64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct CompareRow {
    degree: usize,
    star: Option<usize>,
    star_refined: Option<usize>,
    c11: Option<usize>,
    baseline: usize,
    /// Star cardinality over the baseline cardinality.
    star_over_baseline: Option<f64>,
    c11_over_baseline: Option<f64>,
}

#[derive(Serialize)]
struct CompareReport {
    rows: Vec<CompareRow>,
    /// Present with at least three distinct degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    slopes: Option<Slopes>,
    /// Constructions the domain does not admit, with the reason.
    skipped: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Slopes {
    star: Option<SlopeFit>,
    star_refined: Option<SlopeFit>,
    c11: Option<SlopeFit>,
    baseline: SlopeFit,
}

pub fn compare(c: &CompareConfig) -> Result<Outcome> {
    if c.degrees.is_empty() || c.degrees.contains(&0) {
        return Err(Error::InvalidParameter("degrees must be positive".into()));
    }
    let df = load_domain(c.domain.as_deref())?;
    let build = |construction| BuildArgs {
        domain: None,
        construction,
        delta: c.delta,
        lambda: c.lambda,
        mu: c.mu,
        markov_m: c.markov_m,
        markov_exp: c.markov_exp,
    };
    let baseline = Builder::new(&build(Construction::Baseline), &df)?;
    let mut skipped = Vec::new();
    let mut make = |k: Construction, name: &str| match Builder::new(&build(k), &df) {
        Ok(b) => Some(b),
        Err(e) => {
            skipped.push((name.to_string(), e.to_string()));
            None
        }
    };
    let star = make(Construction::Star, "star");
    let refined = make(Construction::StarRefined, "star_refined");
    let c11 = make(Construction::C11, "c11");
    let count = |b: &Option<Builder>, n: usize| -> Result<Option<usize>> {
        match b {
            Some(b) => match b.mesh(n) {
                Ok(m) => Ok(Some(m.cardinality())),
                Err(Error::InvalidParameter(_)) => Ok(None),
                Err(e) => Err(e),
            },
            None => Ok(None),
        }
    };
    let mut rows = Vec::new();
    for &n in &c.degrees {
        let base = baseline_markov_cardinality(baseline.domain.as_dyn(), n, c.markov_m, c.markov_exp)?;
        let s = count(&star, n)?;
        let k = count(&c11, n)?;
        rows.push(CompareRow {
            degree: n,
            star: s,
            star_refined: count(&refined, n)?,
            c11: k,
            baseline: base,
            star_over_baseline: s.map(|v| v as f64 / base as f64),
            c11_over_baseline: k.map(|v| v as f64 / base as f64),
        });
    }
    let fit = |f: &dyn Fn(&CompareRow) -> Option<usize>| -> Option<SlopeFit> {
        let t: Option<Vec<(usize, usize)>> = rows.iter().map(|r| f(r).map(|v| (r.degree, v))).collect();
        t.and_then(|t| cardinality_slope(&t).ok())
    };
    let baseline_fit = fit(&|r| Some(r.baseline));
    let slopes = baseline_fit.map(|baseline| Slopes {
        star: fit(&|r| r.star),
        star_refined: fit(&|r| r.star_refined),
        c11: fit(&|r| r.c11),
        baseline,
    });
    if let Some(p) = &c.csv {
        let cell = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![r.degree.to_string(), cell(r.star), cell(r.star_refined), cell(r.c11), r.baseline.to_string()]
            })
            .collect();
        io::write_string(p, &csv_table(&["degree", "star", "star_refined", "c11", "baseline"], &table))?;
    }
    let report = CompareReport { rows, slopes, skipped };
    emit(c.out.as_deref(), &io::to_versioned_json(&report)?)?;
    Ok(Outcome::Ok)
}

pub fn fekete(mesh_path: &Path, domain: Option<&Path>, degree: Option<usize>, out: Option<&Path>, svg: Option<&Path>) -> Result<Outcome> {
    let mesh = read_mesh(mesh_path, degree, || Ok(0.0))?;
    let n = degree.unwrap_or(mesh.degree);
    let shape_domain = match domain {
        Some(p) => Some(AnyDomain::for_construction(&io::domain_from_json(&io::read_to_string(p)?)?, false)?),
        None => None,
    };
    let bbox = match &shape_domain {
        Some(d) => d.as_dyn().bbox(),
        None => points_bbox(&mesh.points)?,
    };
    let space = PolySpace::new(n, bbox)?;
    let keep = afp_extract(&space, &mesh.points)?;
    let points: Vec<Vec<f64>> = keep.iter().map(|&i| mesh.points[i].clone()).collect();
    let fek = Mesh {
        degree: n,
        constant: 0.0,
        provenance: Provenance::Fekete { source: mesh.provenance.tag().to_string() },
        points,
        layers: None,
    };
    let text = match out {
        Some(p) if is_csv(p) => io::points_to_csv(&fek.points),
        _ => io::mesh_to_json(&fek)?,
    };
    emit(out, text.trim_end())?;
    if let Some(p) = svg {
        io::write_string(p, &svg_mesh(&fek, shape_domain.as_ref().map(|d| d.as_dyn().shape())))?;
    }
    Ok(Outcome::Ok)
}

fn points_bbox(points: &[Vec<f64>]) -> Result<BBox> {
    let first = points.first().ok_or(Error::EmptySet)?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        for k in 0..lo.len() {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Ok(BBox::new(lo, hi))
}
