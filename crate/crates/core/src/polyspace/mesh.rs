use serde::{Deserialize, Serialize};

/// How a mesh was produced, with the parameters of its construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case", deny_unknown_fields)]
pub enum Provenance {
    Star {
        r_ball: f64,
        h: f64,
    },
    StarRefined {
        r_ball: f64,
        /// Boundary fill target of each layer `i = 1..=2n`.
        layer_h: Vec<f64>,
    },
    C11 {
        delta: f64,
        lambda: f64,
        mu: f64,
        m_n: usize,
        levels: Vec<f64>,
        /// Interior grid fill target `delta / (lambda n + 1/2)`.
        h: f64,
        /// `max{2mu/(mu-2), 1/(lambda-1)}`, the constant as printed.
        printed_constant: f64,
    },
    Baseline {
        markov_m: f64,
        markov_exp: f64,
        step: f64,
    },
    /// Scaled Chebyshev points of an interval `[0, r]`.
    Interval {
        r: f64,
    },
    /// Approximate Fekete subset of another mesh.
    Fekete {
        source: String,
    },
    /// Points supplied from outside; no norming claim is derived.
    External,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Star { .. } => "star",
            Self::StarRefined { .. } => "star_refined",
            Self::C11 { .. } => "c11",
            Self::Baseline { .. } => "baseline",
            Self::Interval { .. } => "interval",
            Self::Fekete { .. } => "fekete",
            Self::External => "external",
        }
    }
}

/// A finite point set of a compact, tagged with the degree it norms and the
/// claimed constant `C` in `||p||_K <= C ||p||_mesh` (0 when no claim is made).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    pub degree: usize,
    pub constant: f64,
    pub provenance: Provenance,
    pub points: Vec<Vec<f64>>,
    /// Per-point layer (or level) index, where the construction has layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
}

impl Mesh {
    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }
}
