//! File formats: domain descriptions, meshes, polynomials and CSV point lists.
//!
//! Every JSON document carries `"schema": 1` and unknown fields are rejected.

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{BBox, Shape, SmoothDomain, StarDomain};
use crate::polyspace::{Mesh, Poly, PolySpace};

pub const SCHEMA: u64 = 1;

/// Serializes `value` as a JSON object with the schema version added.
pub fn to_versioned_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("schema".into(), SCHEMA.into());
        }
        None => return Err(Error::InvalidParameter("only JSON objects carry a schema".into())),
    }
    Ok(serde_json::to_string(&v)?)
}

/// Parses a JSON object written by [`to_versioned_json`], checking the
/// schema version before handing the rest to `T`.
pub fn from_versioned_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Error::InvalidParameter("expected a JSON object".into()))?;
    match obj.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA) => {}
        Some(other) => return Err(Error::InvalidParameter(format!("unsupported schema {other}"))),
        None => return Err(Error::InvalidParameter("missing field `schema`".into())),
    }
    Ok(serde_json::from_value(v)?)
}

pub fn mesh_to_json(mesh: &Mesh) -> Result<String> {
    to_versioned_json(mesh)
}

pub fn mesh_from_json(text: &str) -> Result<Mesh> {
    let mesh: Mesh = from_versioned_json(text)?;
    let dim = mesh.dim();
    if mesh.points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidParameter("mesh points must be finite and share a dimension".into()));
    }
    if mesh.layers.as_ref().is_some_and(|l| l.len() != mesh.points.len()) {
        return Err(Error::InvalidParameter("one layer tag per point expected".into()));
    }
    Ok(mesh)
}

/// One point per row, coordinates separated by commas. Floats are written in
/// their shortest round-trip form.
pub fn points_to_csv(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Inverse of [`points_to_csv`]; blank lines and `#` comments are skipped.
pub fn points_from_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", k + 1)))?;
        if let Some(first) = points.first() {
            let first: &Vec<f64> = first;
            if first.len() != p.len() {
                return Err(Error::InvalidParameter(format!("line {}: dimension mismatch", k + 1)));
            }
        }
        points.push(p);
    }
    Ok(points)
}

/// Polynomial file: Chebyshev-basis coefficients over a bounding box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub degree: usize,
    pub dim: usize,
    pub bbox: BBox,
    pub coeffs: Vec<f64>,
}

impl PolyFile {
    pub fn from_poly(p: &Poly) -> Self {
        let s = p.space();
        Self { degree: s.degree(), dim: s.dim(), bbox: s.bbox().clone(), coeffs: p.coeffs().to_vec() }
    }

    pub fn to_poly(&self) -> Result<Poly> {
        if self.bbox.lo.len() != self.dim || self.bbox.hi.len() != self.dim {
            return Err(Error::InvalidParameter("bbox dimension differs from dim".into()));
        }
        Poly::new(Arc::new(PolySpace::new(self.degree, self.bbox.clone())?), self.coeffs.clone())
    }
}

pub fn poly_to_json(p: &Poly) -> Result<String> {
    to_versioned_json(&PolyFile::from_poly(p))
}

pub fn poly_from_json(text: &str) -> Result<Poly> {
    from_versioned_json::<PolyFile>(text)?.to_poly()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Disk,
    Ball,
    Ellipse,
    Stadium,
    RoundedPolygon,
    StarRadial,
}

/// Domain description. Which shape fields are required depends on `kind`:
///
/// | kind | fields |
/// |---|---|
/// | `disk`, `ball` | `center`, `radius` |
/// | `ellipse` | `center`, `a`, `b` |
/// | `stadium` | `center`, `half_length`, `radius` |
/// | `rounded_polygon` | `vertices`, `radius` |
/// | `star_radial` | `center`, `base`, `cos`, `sin` |
///
/// `reach` defaults to the smallest radius of curvature and is validated
/// either way. The star construction uses `star_center` (default: the shape
/// center), `r_ball` (default: the reach) and `lipschitz` (default 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub kind: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cos: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sin: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reach: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_ball: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_center: Option<Vec<f64>>,
}

fn need<T: Clone>(v: &Option<T>, kind: &str, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::InvalidDomain(format!("{kind} needs `{name}`")))
}

fn fixed<const D: usize>(v: Vec<f64>, name: &str) -> Result<[f64; D]> {
    v.try_into().map_err(|_| Error::InvalidDomain(format!("`{name}` must have {D} coordinates")))
}

impl DomainFile {
    fn empty(kind: ShapeKind) -> Self {
        Self {
            kind,
            center: None,
            radius: None,
            a: None,
            b: None,
            half_length: None,
            vertices: None,
            base: None,
            cos: None,
            sin: None,
            reach: None,
            lipschitz: None,
            r_ball: None,
            star_center: None,
        }
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Self { center: Some(center.to_vec()), radius: Some(radius), ..Self::empty(ShapeKind::Disk) }
    }

    pub fn ellipse(center: [f64; 2], a: f64, b: f64) -> Self {
        Self { center: Some(center.to_vec()), a: Some(a), b: Some(b), ..Self::empty(ShapeKind::Ellipse) }
    }

    pub fn rounded_polygon(vertices: Vec<[f64; 2]>, radius: f64) -> Self {
        Self { vertices: Some(vertices), radius: Some(radius), ..Self::empty(ShapeKind::RoundedPolygon) }
    }

    pub fn shape(&self) -> Result<Shape> {
        let center = || -> Result<Vec<f64>> { need(&self.center, self.kind_name(), "center") };
        match self.kind {
            ShapeKind::Disk => Shape::disk(fixed(center()?, "center")?, need(&self.radius, "disk", "radius")?),
            ShapeKind::Ball => Shape::ball(fixed(center()?, "center")?, need(&self.radius, "ball", "radius")?),
            ShapeKind::Ellipse => {
                Shape::ellipse(fixed(center()?, "center")?, need(&self.a, "ellipse", "a")?, need(&self.b, "ellipse", "b")?)
            }
            ShapeKind::Stadium => Shape::stadium(
                fixed(center()?, "center")?,
                need(&self.half_length, "stadium", "half_length")?,
                need(&self.radius, "stadium", "radius")?,
            ),
            ShapeKind::RoundedPolygon => Shape::rounded_polygon(
                need(&self.vertices, "rounded_polygon", "vertices")?,
                need(&self.radius, "rounded_polygon", "radius")?,
            ),
            ShapeKind::StarRadial => Shape::star_radial(
                fixed(center()?, "center")?,
                need(&self.base, "star_radial", "base")?,
                self.cos.clone().unwrap_or_default(),
                self.sin.clone().unwrap_or_default(),
            ),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            ShapeKind::Disk => "disk",
            ShapeKind::Ball => "ball",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::Stadium => "stadium",
            ShapeKind::RoundedPolygon => "rounded_polygon",
            ShapeKind::StarRadial => "star_radial",
        }
    }

    fn reach_of(&self, shape: &Shape) -> f64 {
        self.reach.unwrap_or_else(|| 1.0 / shape.max_curvature())
    }

    pub fn smooth(&self) -> Result<SmoothDomain> {
        let shape = self.shape()?;
        let reach = self.reach_of(&shape);
        SmoothDomain::new(shape, reach)
    }

    pub fn star(&self) -> Result<StarDomain> {
        let shape = self.shape()?;
        let r_ball = self.r_ball.unwrap_or_else(|| self.reach_of(&shape));
        StarDomain::new(shape, self.star_center.clone(), self.lipschitz.unwrap_or(0.0), r_ball)
    }
}

pub fn domain_to_json(d: &DomainFile) -> Result<String> {
    to_versioned_json(d)
}

pub fn domain_from_json(text: &str) -> Result<DomainFile> {
    from_versioned_json(text)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::Provenance;

    #[test]
    fn mesh_round_trip_is_exact() {
        let mesh = Mesh {
            degree: 3,
            constant: 2.0 * (2f64.sqrt() + 1.0),
            provenance: Provenance::Star { r_ball: 1.0, h: 1.0 / 6.0 },
            points: vec![vec![0.1 + 0.2, -1.0 / 3.0], vec![f64::MIN_POSITIVE, 1e300]],
            layers: Some(vec![0, 1]),
        };
        let text = mesh_to_json(&mesh).unwrap();
        assert!(text.contains("\"schema\":1"));
        let back = mesh_from_json(&text).unwrap();
        for (p, q) in mesh.points.iter().zip(&back.points) {
            for (a, b) in p.iter().zip(q) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(back, mesh);
    }

    #[test]
    fn schema_and_unknown_fields() {
        let ok = r#"{"schema":1,"kind":"disk","center":[0,0],"radius":1}"#;
        assert!(domain_from_json(ok).unwrap().smooth().is_ok());
        let extra = r#"{"schema":1,"kind":"disk","center":[0,0],"radius":1,"colour":"red"}"#;
        assert!(domain_from_json(extra).is_err());
        let no_schema = r#"{"kind":"disk","center":[0,0],"radius":1}"#;
        assert!(domain_from_json(no_schema).is_err());
        let v2 = r#"{"schema":2,"kind":"disk","center":[0,0],"radius":1}"#;
        assert!(domain_from_json(v2).is_err());
    }

    #[test]
    fn missing_shape_field() {
        let d = domain_from_json(r#"{"schema":1,"kind":"ellipse","center":[0,0],"a":2}"#).unwrap();
        assert!(matches!(d.shape(), Err(Error::InvalidDomain(m)) if m.contains("`b`")));
    }

    #[test]
    fn csv_round_trip() {
        let pts = vec![vec![0.1, 0.7], vec![-2.5e-17, 3.0]];
        let back = points_from_csv(&format!("# comment\n{}\n", points_to_csv(&pts))).unwrap();
        assert_eq!(back, pts);
        assert!(points_from_csv("1,2\n3\n").is_err());
    }
}
