//! Spec files and JSON reports.
//!
//! A spec file holds a quiver, a label and optionally a splitting, holomorphic
//! sections and a point representation:
//!
//! ```json
//! {"schema": 1,
//!  "vertices": ["1", "2"],
//!  "edges": [{"id": "a", "tail": "1", "head": "2"}],
//!  "label": {"rank": [1, 2], "degree": [0, 0]},
//!  "splitting": [[0], [0, 0]],
//!  "sections": {"x": [[[["1"]], [["2"]]]], "y": [[[["3"], ["-1"]]]]}}
//! ```
//!
//! Section entries are coefficient lists, lowest degree first. A coefficient
//! is an integer, a string such as `"-3/4"` or `"0.25"`, or a `[re, im]` pair.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{fmt_q, parse_q, Cq, Poly, PolyMatrix, Q};
use crate::p1::{QBarBundleP1, SplitBundle, StabilityReport, SubbundleCandidate, VertexSub};
use crate::point_rep::{CMat, PointRep};
use crate::quiver::{self, EdgeSpec, Label, Quiver, ValidationIssue};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn to_q(&self) -> Result<Q> {
        match self {
            Scalar::Int(n) => Ok(Q::from_integer((*n).into())),
            Scalar::Float(x) => parse_q(&x.to_string())
                .ok_or_else(|| Error::Parse(format!("`{x}` is not a finite number"))),
            Scalar::Text(s) => {
                parse_q(s).ok_or_else(|| Error::Parse(format!("`{s}` is not a rational number")))
            }
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Scalar::Int(n) => Ok(*n as f64),
            Scalar::Float(x) => Ok(*x),
            Scalar::Text(_) => Ok(crate::exact::q_to_f64(&self.to_q()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Real(Scalar),
    Complex([Scalar; 2]),
}

impl Coeff {
    pub fn to_cq(&self) -> Result<Cq> {
        match self {
            Coeff::Real(s) => Ok(Cq::new(s.to_q()?, Q::from_integer(0.into()))),
            Coeff::Complex([re, im]) => Ok(Cq::new(re.to_q()?, im.to_q()?)),
        }
    }
}

/// Rows of entries, each entry a coefficient list.
pub type PolyMatrixSpec = Vec<Vec<Vec<Coeff>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionsSpec {
    pub x: Vec<PolyMatrixSpec>,
    pub y: Vec<PolyMatrixSpec>,
    /// Holomorphic parts of the Higgs fields, zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<PolyMatrixSpec>>,
}

/// Complex matrix as rows of `[re, im]` pairs.
pub type CMatJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x: Vec<CMatJson>,
    pub y: Vec<CMatJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub schema: u32,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitting: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<SectionsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Scalar>>,
}

const TOP_KEYS: &[&str] = &[
    "schema",
    "vertices",
    "edges",
    "label",
    "splitting",
    "sections",
    "point",
    "tau",
    "sigma",
];

fn extra_keys(v: &Value, allowed: &[&str], path: &str, out: &mut Vec<String>) {
    if let Value::Object(m) = v {
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                out.push(if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                });
            }
        }
    }
}

/// Every key the schema does not know, with its path.
pub fn unknown_keys(v: &Value) -> Vec<String> {
    let mut out = Vec::new();
    extra_keys(v, TOP_KEYS, "", &mut out);
    if let Some(Value::Array(edges)) = v.get("edges") {
        for (i, e) in edges.iter().enumerate() {
            extra_keys(e, &["id", "tail", "head"], &format!("edges[{i}]"), &mut out);
        }
    }
    if let Some(l) = v.get("label") {
        extra_keys(l, &["rank", "degree"], "label", &mut out);
    }
    if let Some(s) = v.get("sections") {
        extra_keys(s, &["x", "y", "p"], "sections", &mut out);
    }
    if let Some(p) = v.get("point") {
        extra_keys(p, &["x", "y"], "point", &mut out);
    }
    out
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if !v.is_object() {
        return Err(Error::Parse("spec must be a JSON object".into()));
    }
    let extra = unknown_keys(&v);
    if !extra.is_empty() {
        return Err(Error::Parse(format!("unknown keys: {}", extra.join(", "))));
    }
    match v.get("schema").and_then(Value::as_u64) {
        Some(n) if n == SCHEMA_VERSION as u64 => {}
        Some(n) => return Err(Error::Parse(format!("unsupported schema {n}"))),
        None => return Err(Error::Parse("missing integer `schema`".into())),
    }
    serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn cmat(rows: usize, cols: usize, m: &CMatJson, what: &str) -> Result<CMat> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!("{what} must be {rows}x{cols}")));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| {
        num_complex::Complex64::new(m[i][j][0], m[i][j][1])
    }))
}

pub fn cmat_json(m: &CMat) -> CMatJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn point_json(p: &PointRep) -> PointSpec {
    PointSpec {
        x: p.x.iter().map(cmat_json).collect(),
        y: p.y.iter().map(cmat_json).collect(),
    }
}

fn poly_matrix(m: &PolyMatrixSpec, rows: usize, cols: usize, what: &str) -> Result<PolyMatrix> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!("{what} must be {rows}x{cols}")));
    }
    let mut out = PolyMatrix::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let c = e.iter().map(Coeff::to_cq).collect::<Result<Vec<_>>>()?;
            out.set(i, j, Poly::new(c));
        }
    }
    Ok(out)
}

impl SpecFile {
    /// Structural problems with the quiver and label; empty iff valid.
    pub fn issues(&self) -> Vec<ValidationIssue> {
        quiver::validate(&self.vertices, &self.edges, Some(&self.label))
    }

    pub fn quiver(&self) -> Result<Quiver> {
        let issues = self.issues();
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        Quiver::new(self.vertices.clone(), self.edges.clone())
    }

    pub fn point_rep(&self, q: &Quiver) -> Result<Option<PointRep>> {
        let Some(p) = &self.point else {
            return Ok(None);
        };
        let r = &self.label.rank;
        if p.x.len() != q.num_edges() || p.y.len() != q.num_edges() {
            return Err(Error::Dimension(
                "point needs one x and one y per edge".into(),
            ));
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (k, e) in q.edges().iter().enumerate() {
            x.push(cmat(
                r[e.head],
                r[e.tail],
                &p.x[k],
                &format!("x[{}]", e.id),
            )?);
            y.push(cmat(
                r[e.tail],
                r[e.head],
                &p.y[k],
                &format!("y[{}]", e.id),
            )?);
        }
        PointRep::new(q, &self.label, x, y).map(Some)
    }

    pub fn split_bundle(&self, q: &Quiver) -> Result<Option<SplitBundle>> {
        let Some(s) = &self.splitting else {
            return Ok(None);
        };
        SplitBundle::new(q, &self.label, s.clone()).map(Some)
    }

    /// The bundle object, or `None` without a splitting. Missing sections mean zero data.
    pub fn bundle(&self, q: &Quiver) -> Result<Option<QBarBundleP1>> {
        let Some(b) = self.split_bundle(q)? else {
            return Ok(None);
        };
        let Some(s) = &self.sections else {
            return QBarBundleP1::zero(q, b).map(Some);
        };
        let n = q.num_edges();
        if s.x.len() != n || s.y.len() != n {
            return Err(Error::Dimension(
                "sections need one x and one y per edge".into(),
            ));
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (k, e) in q.edges().iter().enumerate() {
            let (rh, rt) = (b.rank(e.head), b.rank(e.tail));
            x.push(poly_matrix(&s.x[k], rh, rt, &format!("x[{}]", e.id))?);
            y.push(poly_matrix(&s.y[k], rt, rh, &format!("y[{}]", e.id))?);
        }
        let p = match &s.p {
            Some(p) => {
                if p.len() != q.num_vertices() {
                    return Err(Error::Dimension(
                        "sections.p needs one matrix per vertex".into(),
                    ));
                }
                p.iter()
                    .enumerate()
                    .map(|(v, m)| {
                        let r = b.rank(v);
                        poly_matrix(m, r, r, &format!("p[{}]", q.vertices()[v]))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            None => (0..q.num_vertices())
                .map(|v| PolyMatrix::zeros(b.rank(v), b.rank(v)))
                .collect(),
        };
        QBarBundleP1::from_matrices(q, b, p, x, y).map(Some)
    }

    pub fn tau_f64(&self) -> Result<Option<Vec<f64>>> {
        self.tau
            .as_ref()
            .map(|t| t.iter().map(Scalar::to_f64).collect())
            .transpose()
    }

    pub fn sigma_q(&self) -> Result<Option<Vec<Q>>> {
        self.sigma
            .as_ref()
            .map(|t| t.iter().map(Scalar::to_q).collect())
            .transpose()
    }

    pub fn tau_q(&self) -> Result<Option<Vec<Q>>> {
        self.tau
            .as_ref()
            .map(|t| t.iter().map(Scalar::to_q).collect())
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSubJson {
    pub vertex: String,
    pub rank: usize,
    pub degree: i64,
    /// Summand indices, for a span of summands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summands: Option<Vec<usize>>,
    /// Spanning vector with polynomial entries, for a line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<String>>,
}

pub fn witness_json(q: &Quiver, b: &SplitBundle, c: &SubbundleCandidate) -> Vec<VertexSubJson> {
    c.parts
        .iter()
        .enumerate()
        .map(|(v, s)| {
            let (summands, vector) = match s {
                VertexSub::Subset(idx) => (Some(idx.clone()), None),
                VertexSub::Line { vector, .. } => {
                    (None, Some(vector.iter().map(|p| p.to_string()).collect()))
                }
            };
            VertexSubJson {
                vertex: q.vertices()[v].clone(),
                rank: s.rank(),
                degree: s.degree(b.vertex(v)),
                summands,
                vector,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityJson {
    pub verdict: String,
    pub slope: String,
    pub witness: Option<Vec<VertexSubJson>>,
    pub witness_slope: Option<String>,
    pub candidates_checked: usize,
    pub endomorphisms: usize,
    /// Present only for stable input.
    pub dimension: Option<usize>,
    pub convention: String,
}

impl StabilityJson {
    pub fn from_report(
        q: &Quiver,
        b: &SplitBundle,
        r: &StabilityReport,
        endomorphisms: usize,
        dimension: Option<usize>,
        convention: &str,
    ) -> Self {
        Self {
            verdict: r.verdict.name().to_string(),
            slope: r.slope_string(),
            witness: r.witness.as_ref().map(|w| witness_json(q, b, w)),
            witness_slope: r.witness_slope.as_ref().map(fmt_q),
            candidates_checked: r.candidates_checked,
            endomorphisms,
            dimension,
            convention: convention.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveJson {
    pub converged: bool,
    pub residual_real: f64,
    pub residual_complex: f64,
    pub iterations: usize,
    /// Tangent dimension at the limit, when it converged.
    pub dimension: Option<usize>,
    pub warnings: Vec<String>,
    pub tau: Vec<f64>,
    pub convention: String,
    pub point: PointSpec,
}
