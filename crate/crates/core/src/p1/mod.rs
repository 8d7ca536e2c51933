//! Bundle-valued representations over the projective line.
//!
//! Every vector bundle on P^1 splits as a sum of line bundles, so all data is
//! stored as matrices of polynomials in the affine coordinate `z`. An entry
//! mapping `O(a)` to `O(b)` is a polynomial of degree at most `b - a`.

mod dimension;
mod scan;
mod stability;

pub use dimension::{endomorphism_dimension, expected_dimension, genus_expected_dim};
pub use scan::{random_bundle, scan_existence, splittings, ScanConfig, ScanRow};
pub use stability::{
    invariant_subbundles, is_stable, slope, subbundle_candidates, SlopeParams, StabilityReport,
    SubbundleCandidate, Verdict, VertexSub,
};

use crate::error::{Error, Result};
use crate::exact::{Cq, Poly, PolyMatrix};
use crate::quiver::{Label, Quiver};

/// `dim H^0(Hom(O(a), O(b)))`.
pub fn hom_dim(a: i64, b: i64) -> usize {
    (b - a + 1).max(0) as usize
}

/// `dim H^1(O(k))`.
pub fn h1_dim(k: i64) -> usize {
    (-k - 1).max(0) as usize
}

/// Splitting type of every vertex bundle, degrees non-increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitBundle {
    degrees: Vec<Vec<i64>>,
}

impl SplitBundle {
    pub fn new(q: &Quiver, l: &Label, degrees: Vec<Vec<i64>>) -> Result<Self> {
        q.check_label(l)?;
        if degrees.len() != q.num_vertices() {
            return Err(Error::Dimension(format!(
                "splitting lists {} vertices, quiver has {}",
                degrees.len(),
                q.num_vertices()
            )));
        }
        for (v, d) in degrees.iter().enumerate() {
            let name = &q.vertices()[v];
            if d.len() != l.rank[v] {
                return Err(Error::Dimension(format!(
                    "vertex {name}: {} summands for rank {}",
                    d.len(),
                    l.rank[v]
                )));
            }
            if d.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::Domain(format!(
                    "vertex {name}: summand degrees must be non-increasing"
                )));
            }
            if d.iter().sum::<i64>() != l.degree[v] {
                return Err(Error::Domain(format!(
                    "vertex {name}: summands sum to {}, label degree is {}",
                    d.iter().sum::<i64>(),
                    l.degree[v]
                )));
            }
        }
        Ok(Self { degrees })
    }

    /// Builds the label from the splitting; summands are sorted first.
    pub fn from_splitting(q: &Quiver, mut degrees: Vec<Vec<i64>>) -> Result<Self> {
        for d in degrees.iter_mut() {
            d.sort_unstable_by(|a, b| b.cmp(a));
        }
        let l = Label::new(
            degrees.iter().map(Vec::len).collect(),
            degrees.iter().map(|d| d.iter().sum()).collect(),
        );
        Self::new(q, &l, degrees)
    }

    pub fn label(&self) -> Label {
        Label::new(
            self.degrees.iter().map(Vec::len).collect(),
            self.degrees.iter().map(|d| d.iter().sum()).collect(),
        )
    }

    pub fn degrees(&self) -> &[Vec<i64>] {
        &self.degrees
    }

    pub fn vertex(&self, v: usize) -> &[i64] {
        &self.degrees[v]
    }

    pub fn rank(&self, v: usize) -> usize {
        self.degrees[v].len()
    }

    pub fn degree(&self, v: usize) -> i64 {
        self.degrees[v].iter().sum()
    }

    pub fn max_spread(&self) -> i64 {
        let all = self.degrees.iter().flatten();
        match (all.clone().max(), all.min()) {
            (Some(a), Some(b)) => a - b,
            _ => 0,
        }
    }
}

/// Number of coefficients allowed in each entry of a section of
/// `Hom(source, target)`.
pub fn section_counts(target: &[i64], source: &[i64]) -> Vec<Vec<usize>> {
    target
        .iter()
        .map(|&b| source.iter().map(|&a| hom_dim(a, b)).collect())
        .collect()
}

/// Coefficient counts for `H^1(Hom(source, target) (x) K)` read through Serre
/// duality: entry `(i, j)` holds `h1_dim(target_i - source_j - 2)` numbers.
pub fn dual_counts(target: &[i64], source: &[i64]) -> Vec<Vec<usize>> {
    target
        .iter()
        .map(|&b| source.iter().map(|&a| h1_dim(b - a - 2)).collect())
        .collect()
}

fn check_counts(m: &PolyMatrix, counts: &[Vec<usize>], what: &str) -> Result<()> {
    let rows = counts.len();
    let cols = counts.first().map_or(m.cols(), Vec::len);
    if m.shape() != (rows, cols) {
        return Err(Error::Dimension(format!(
            "{what} has shape {:?}, expected ({rows}, {cols})",
            m.shape()
        )));
    }
    for (i, j, p) in m.entries() {
        let len = p.coeffs().len();
        if len > counts[i][j] {
            return Err(Error::Domain(format!(
                "{what} entry ({i}, {j}) has {len} coefficients, at most {} allowed",
                counts[i][j]
            )));
        }
    }
    Ok(())
}

/// Holomorphic section of `Hom(E_t, E_h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySection(PolyMatrix);

impl PolySection {
    pub fn new(m: PolyMatrix, target: &[i64], source: &[i64]) -> Result<Self> {
        check_counts(&m, &section_counts(target, source), "section")?;
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.0
    }
}

/// Class in `H^1(Hom(E_h, E_t) (x) K)` stored as Serre-dual polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSection(PolyMatrix);

impl DualSection {
    /// `target` is the tail bundle and `source` the head bundle of the edge.
    pub fn new(m: PolyMatrix, target: &[i64], source: &[i64]) -> Result<Self> {
        check_counts(&m, &dual_counts(target, source), "dual section")?;
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.0
    }
}

/// `phi = (c zbar + p(z)) dz` with `c` constant and `p` a section of
/// `End(E) (x) K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiggsField {
    c: PolyMatrix,
    p: PolyMatrix,
}

impl HiggsField {
    pub fn new(c: PolyMatrix, p: PolyMatrix, degrees: &[i64]) -> Result<Self> {
        let r = degrees.len();
        if c.shape() != (r, r) {
            return Err(Error::Dimension(format!(
                "zbar coefficient has shape {:?}, expected ({r}, {r})",
                c.shape()
            )));
        }
        if c.max_degree().is_some_and(|d| d > 0) {
            return Err(Error::Domain("zbar coefficient must be constant".into()));
        }
        let k: Vec<i64> = degrees.iter().map(|d| d - 2).collect();
        check_counts(&p, &section_counts(&k, degrees), "Higgs field")?;
        Ok(Self { c, p })
    }

    pub fn holomorphic(p: PolyMatrix, degrees: &[i64]) -> Result<Self> {
        let r = degrees.len();
        Self::new(PolyMatrix::zeros(r, r), p, degrees)
    }

    pub fn zero(degrees: &[i64]) -> Self {
        let r = degrees.len();
        Self {
            c: PolyMatrix::zeros(r, r),
            p: PolyMatrix::zeros(r, r),
        }
    }

    pub fn zbar_coeff(&self) -> &PolyMatrix {
        &self.c
    }

    pub fn holomorphic_part(&self) -> &PolyMatrix {
        &self.p
    }
}

/// The edge source `sum_{h(a)=i} x_a y_a - sum_{t(a)=i} y_a x_a` at every vertex.
pub fn edge_source(
    q: &Quiver,
    b: &SplitBundle,
    x: &[PolySection],
    y: &[DualSection],
) -> Result<Vec<PolyMatrix>> {
    check_edges(q, b, x, y)?;
    let mut src: Vec<PolyMatrix> = (0..q.num_vertices())
        .map(|v| PolyMatrix::zeros(b.rank(v), b.rank(v)))
        .collect();
    for (k, e) in q.edges().iter().enumerate() {
        let (xm, ym) = (x[k].matrix(), y[k].matrix());
        src[e.head] = src[e.head].add(&xm.mul(ym));
        src[e.tail] = src[e.tail].sub(&ym.mul(xm));
    }
    Ok(src)
}

fn check_edges(q: &Quiver, b: &SplitBundle, x: &[PolySection], y: &[DualSection]) -> Result<()> {
    if b.degrees.len() != q.num_vertices() {
        return Err(Error::Dimension(
            "splitting does not match the quiver".into(),
        ));
    }
    if x.len() != q.num_edges() || y.len() != q.num_edges() {
        return Err(Error::Dimension(format!(
            "expected {} edge sections, got x: {}, y: {}",
            q.num_edges(),
            x.len(),
            y.len()
        )));
    }
    for (k, e) in q.edges().iter().enumerate() {
        let (dh, dt) = (b.vertex(e.head), b.vertex(e.tail));
        check_counts(
            x[k].matrix(),
            &section_counts(dh, dt),
            &format!("x_{}", e.id),
        )?;
        check_counts(y[k].matrix(), &dual_counts(dt, dh), &format!("y_{}", e.id))?;
    }
    Ok(())
}

/// The constant `zbar` coefficient each Higgs field must carry.
///
/// The source must be constant at every vertex; otherwise no field of the form
/// `c zbar + p(z)` balances it.
pub fn dbar_constraint(
    q: &Quiver,
    b: &SplitBundle,
    x: &[PolySection],
    y: &[DualSection],
) -> Result<Vec<PolyMatrix>> {
    let src = edge_source(q, b, x, y)?;
    src.into_iter()
        .enumerate()
        .map(|(v, s)| {
            if let Some((i, j, p)) = s.entries().find(|(_, _, p)| !p.is_constant()) {
                return Err(Error::Inconsistent {
                    vertex: q.vertices()[v].clone(),
                    detail: format!("source entry ({i}, {j}) is {p}, not constant"),
                });
            }
            Ok(s)
        })
        .collect()
}

/// A full bundle-valued representation `(E, phi, x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QBarBundleP1 {
    quiver: Quiver,
    bundle: SplitBundle,
    phi: Vec<HiggsField>,
    x: Vec<PolySection>,
    y: Vec<DualSection>,
}

impl QBarBundleP1 {
    pub fn new(
        q: &Quiver,
        bundle: SplitBundle,
        phi: Vec<HiggsField>,
        x: Vec<PolySection>,
        y: Vec<DualSection>,
    ) -> Result<Self> {
        let c = dbar_constraint(q, &bundle, &x, &y)?;
        if phi.len() != q.num_vertices() {
            return Err(Error::Dimension(format!(
                "expected {} Higgs fields, got {}",
                q.num_vertices(),
                phi.len()
            )));
        }
        for (v, (f, cv)) in phi.iter().zip(&c).enumerate() {
            let d = bundle.vertex(v);
            HiggsField::new(f.c.clone(), f.p.clone(), d)?;
            if f.c != *cv {
                return Err(Error::Inconsistent {
                    vertex: q.vertices()[v].clone(),
                    detail: "zbar coefficient differs from the edge source".into(),
                });
            }
        }
        Ok(Self {
            quiver: q.clone(),
            bundle,
            phi,
            x,
            y,
        })
    }

    /// Fills in the `zbar` parts from [`dbar_constraint`].
    pub fn with_holomorphic_phi(
        q: &Quiver,
        bundle: SplitBundle,
        p: Vec<PolyMatrix>,
        x: Vec<PolySection>,
        y: Vec<DualSection>,
    ) -> Result<Self> {
        let c = dbar_constraint(q, &bundle, &x, &y)?;
        if p.len() != q.num_vertices() {
            return Err(Error::Dimension(format!(
                "expected {} Higgs fields, got {}",
                q.num_vertices(),
                p.len()
            )));
        }
        let phi = c
            .into_iter()
            .zip(p)
            .enumerate()
            .map(|(v, (c, p))| HiggsField::new(c, p, bundle.vertex(v)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(q, bundle, phi, x, y)
    }

    /// Builds sections from raw matrices with bound checks.
    pub fn from_matrices(
        q: &Quiver,
        bundle: SplitBundle,
        p: Vec<PolyMatrix>,
        x: Vec<PolyMatrix>,
        y: Vec<PolyMatrix>,
    ) -> Result<Self> {
        if x.len() != q.num_edges() || y.len() != q.num_edges() {
            return Err(Error::Dimension(format!(
                "expected {} edge sections, got x: {}, y: {}",
                q.num_edges(),
                x.len(),
                y.len()
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for ((e, xm), ym) in q.edges().iter().zip(x).zip(y) {
            let (dh, dt) = (bundle.vertex(e.head), bundle.vertex(e.tail));
            xs.push(PolySection::new(xm, dh, dt)?);
            ys.push(DualSection::new(ym, dt, dh)?);
        }
        Self::with_holomorphic_phi(q, bundle, p, xs, ys)
    }

    /// All sections zero.
    pub fn zero(q: &Quiver, bundle: SplitBundle) -> Result<Self> {
        let p = (0..q.num_vertices())
            .map(|v| PolyMatrix::zeros(bundle.rank(v), bundle.rank(v)))
            .collect();
        let x = q
            .edges()
            .iter()
            .map(|e| PolyMatrix::zeros(bundle.rank(e.head), bundle.rank(e.tail)))
            .collect();
        let y = q
            .edges()
            .iter()
            .map(|e| PolyMatrix::zeros(bundle.rank(e.tail), bundle.rank(e.head)))
            .collect();
        Self::from_matrices(q, bundle, p, x, y)
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn bundle(&self) -> &SplitBundle {
        &self.bundle
    }

    pub fn phi(&self) -> &[HiggsField] {
        &self.phi
    }

    pub fn x(&self) -> &[PolySection] {
        &self.x
    }

    pub fn y(&self) -> &[DualSection] {
        &self.y
    }

    /// Change of basis by invertible blocks `g_v` with inverses `g_inv`.
    /// Fails when the transformed data leaves the degree bounds.
    pub fn transform(&self, g: &[PolyMatrix], g_inv: &[PolyMatrix]) -> Result<Self> {
        let q = &self.quiver;
        let n = q.num_vertices();
        if g.len() != n || g_inv.len() != n {
            return Err(Error::Dimension("one block per vertex required".into()));
        }
        for v in 0..n {
            if !g[v]
                .mul(&g_inv[v])
                .sub(&PolyMatrix::identity(self.bundle.rank(v)))
                .is_zero()
            {
                return Err(Error::Domain(format!("block {v} and its inverse disagree")));
            }
        }
        let p = (0..n)
            .map(|v| g[v].mul(&self.phi[v].p).mul(&g_inv[v]))
            .collect();
        let x = q
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| g[e.head].mul(self.x[k].matrix()).mul(&g_inv[e.tail]))
            .collect();
        let y = q
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| g[e.tail].mul(self.y[k].matrix()).mul(&g_inv[e.head]))
            .collect();
        Self::from_matrices(q, self.bundle.clone(), p, x, y)
    }
}

/// A section entry with free constants, for building inputs by hand.
pub fn constant_matrix(rows: usize, cols: usize, vals: &[Cq]) -> PolyMatrix {
    PolyMatrix::from_constants(rows, cols, vals)
}

pub fn poly_matrix(rows: usize, cols: usize, entries: Vec<Poly>) -> PolyMatrix {
    assert_eq!(entries.len(), rows * cols);
    let mut it = entries.into_iter();
    PolyMatrix::from_fn(rows, cols, |_, _| it.next().unwrap())
}
