use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{QBarBundleP1, SplitBundle};
use crate::error::{Error, Result};
use crate::exact::{
    fmt_q, nullspace, primitive, primitive_from_ratfn, q, q_from_f64, Cq, Poly, PolyMatrix, Q,
};
use crate::point_rep::StabilityParams;

/// Exact `(sigma, tau)` for slope comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeParams {
    pub sigma: Vec<Q>,
    pub tau: Vec<Q>,
}

impl SlopeParams {
    pub fn new(sigma: Vec<Q>, tau: Vec<Q>) -> Result<Self> {
        if sigma.len() != tau.len() {
            return Err(Error::Dimension(format!(
                "sigma has {} entries, tau has {}",
                sigma.len(),
                tau.len()
            )));
        }
        if sigma.iter().any(|s| !s.is_positive()) {
            return Err(Error::Domain("sigma must be positive".into()));
        }
        Ok(Self { sigma, tau })
    }

    /// Uses the exact binary value of each float.
    pub fn from_stability(sp: &StabilityParams) -> Result<Self> {
        let conv = |v: &[f64]| {
            v.iter()
                .map(|&x| q_from_f64(x).ok_or_else(|| Error::Domain(format!("{x} is not finite"))))
                .collect::<Result<Vec<_>>>()
        };
        Self::new(conv(&sp.sigma)?, conv(&sp.tau)?)
    }

    /// Uniform `tau` making the slope of `b` zero.
    pub fn normalized(b: &SplitBundle, sigma: Vec<Q>) -> Result<Self> {
        let n = b.degrees().len();
        if sigma.len() != n {
            return Err(Error::Dimension(format!(
                "sigma has {} entries for {n} vertices",
                sigma.len()
            )));
        }
        let rk: usize = (0..n).map(|v| b.rank(v)).sum();
        if rk == 0 {
            return Err(Error::UndefinedSlope);
        }
        let weighted = (0..n).fold(Q::zero(), |acc, v| acc + &sigma[v] * q(b.degree(v)));
        let t = -weighted / q(rk as i64);
        Self::new(sigma, vec![t; n])
    }

    pub fn unit(b: &SplitBundle) -> Result<Self> {
        Self::normalized(b, vec![Q::one(); b.degrees().len()])
    }
}

/// `(sum_v sigma_v deg_v + sum_v tau_v rk_v) / sum_v rk_v`.
pub fn slope(ranks: &[usize], degrees: &[i64], sp: &SlopeParams) -> Result<Q> {
    if ranks.len() != sp.sigma.len() || degrees.len() != sp.sigma.len() {
        return Err(Error::Dimension(
            "slope parameters do not match the vertices".into(),
        ));
    }
    let rk: usize = ranks.iter().sum();
    if rk == 0 {
        return Err(Error::UndefinedSlope);
    }
    let mut num = Q::zero();
    for v in 0..ranks.len() {
        num += &sp.sigma[v] * q(degrees[v]) + &sp.tau[v] * q(ranks[v] as i64);
    }
    Ok(num / q(rk as i64))
}

impl SplitBundle {
    pub fn slope(&self, sp: &SlopeParams) -> Result<Q> {
        let n = self.degrees().len();
        let ranks: Vec<usize> = (0..n).map(|v| self.rank(v)).collect();
        let degs: Vec<i64> = (0..n).map(|v| self.degree(v)).collect();
        slope(&ranks, &degs, sp)
    }
}

/// Sub-object at one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexSub {
    /// Span of the listed summands.
    Subset(Vec<usize>),
    /// Saturated line `O(degree)` spanned by a primitive polynomial vector.
    Line { vector: Vec<Poly>, degree: i64 },
}

impl VertexSub {
    pub fn rank(&self) -> usize {
        match self {
            VertexSub::Subset(s) => s.len(),
            VertexSub::Line { .. } => 1,
        }
    }

    pub fn degree(&self, summands: &[i64]) -> i64 {
        match self {
            VertexSub::Subset(s) => s.iter().map(|&i| summands[i]).sum(),
            VertexSub::Line { degree, .. } => *degree,
        }
    }

    fn columns(&self, r: usize) -> Vec<Vec<Poly>> {
        match self {
            VertexSub::Subset(s) => s
                .iter()
                .map(|&i| {
                    (0..r)
                        .map(|k| if k == i { Poly::one() } else { Poly::zero() })
                        .collect()
                })
                .collect(),
            VertexSub::Line { vector, .. } => vec![vector.clone()],
        }
    }

    fn contains(&self, w: &[Poly]) -> bool {
        match self {
            VertexSub::Subset(s) => w
                .iter()
                .enumerate()
                .all(|(i, p)| p.is_zero() || s.contains(&i)),
            VertexSub::Line { vector, .. } => (0..w.len())
                .all(|i| (i + 1..w.len()).all(|j| (&vector[i] * &w[j]) == (&vector[j] * &w[i]))),
        }
    }
}

impl fmt::Display for VertexSub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexSub::Subset(s) => write!(f, "summands {s:?}"),
            VertexSub::Line { vector, degree } => {
                let v: Vec<String> = vector.iter().map(|p| p.to_string()).collect();
                write!(f, "O({degree}) along [{}]", v.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbundleCandidate {
    pub parts: Vec<VertexSub>,
}

impl SubbundleCandidate {
    pub fn ranks(&self) -> Vec<usize> {
        self.parts.iter().map(VertexSub::rank).collect()
    }

    pub fn degrees(&self, b: &SplitBundle) -> Vec<i64> {
        self.parts
            .iter()
            .enumerate()
            .map(|(v, s)| s.degree(b.vertex(v)))
            .collect()
    }

    pub fn slope(&self, b: &SplitBundle, sp: &SlopeParams) -> Result<Q> {
        slope(&self.ranks(), &self.degrees(b), sp)
    }
}

struct Map {
    from: usize,
    to: usize,
    m: PolyMatrix,
}

fn maps(bb: &QBarBundleP1) -> Vec<Map> {
    let mut out = Vec::new();
    for (v, f) in bb.phi().iter().enumerate() {
        for m in [f.zbar_coeff(), f.holomorphic_part()] {
            if !m.is_zero() {
                out.push(Map {
                    from: v,
                    to: v,
                    m: m.clone(),
                });
            }
        }
    }
    for (k, e) in bb.quiver().edges().iter().enumerate() {
        let (x, y) = (bb.x()[k].matrix(), bb.y()[k].matrix());
        if !x.is_zero() {
            out.push(Map {
                from: e.tail,
                to: e.head,
                m: x.clone(),
            });
        }
        if !y.is_zero() {
            out.push(Map {
                from: e.head,
                to: e.tail,
                m: y.clone(),
            });
        }
    }
    out
}

fn apply(m: &PolyMatrix, u: &[Poly]) -> Vec<Poly> {
    (0..m.rows())
        .map(|i| (0..m.cols()).fold(Poly::zero(), |acc, j| &acc + &(m.get(i, j) * &u[j])))
        .collect()
}

fn is_invariant(parts: &[VertexSub], ranks: &[usize], maps: &[Map]) -> bool {
    maps.iter().all(|mp| {
        parts[mp.from]
            .columns(ranks[mp.from])
            .iter()
            .all(|u| parts[mp.to].contains(&apply(&mp.m, u)))
    })
}

fn kernel_line(m: &PolyMatrix) -> Option<Vec<Poly>> {
    let ns = nullspace(&m.to_ratfn(), m.cols());
    if ns.len() == 1 {
        primitive_from_ratfn(&ns[0])
    } else {
        None
    }
}

fn image_line(m: &PolyMatrix) -> Option<Vec<Poly>> {
    if m.rank() != 1 {
        return None;
    }
    let col = (0..m.cols())
        .map(|j| m.column(j))
        .find(|c| c.iter().any(|p| !p.is_zero()))?;
    primitive(&col)
}

fn eigen_lines(a: &PolyMatrix) -> Vec<Vec<Poly>> {
    if a.shape() != (2, 2) {
        return Vec::new();
    }
    let tr = a.trace();
    let disc = &(&tr * &tr) - &a.det2().scale(&Cq::new(q(4), Q::zero()));
    let Some(s) = disc.sqrt() else {
        return Vec::new();
    };
    let half = Cq::new(Q::new(1.into(), 2.into()), Q::zero());
    let mut out = Vec::new();
    for sign in [1, -1] {
        let lambda = (&tr + &s.scale(&Cq::new(q(sign), Q::zero()))).scale(&half);
        let shifted = a.sub(&PolyMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                lambda.clone()
            } else {
                Poly::zero()
            }
        }));
        if let Some(l) = kernel_line(&shifted) {
            out.push(l);
        }
    }
    out
}

fn line_sub(v: Vec<Poly>, summands: &[i64], bound: i64) -> Option<VertexSub> {
    let mut degree = i64::MAX;
    for (p, &d) in v.iter().zip(summands) {
        if let Some(k) = p.degree() {
            if k as i64 > bound {
                return None;
            }
            degree = degree.min(d - k as i64);
        }
    }
    (degree != i64::MAX).then_some(VertexSub::Line { vector: v, degree })
}

fn vertex_options(bb: &QBarBundleP1, all: &[Map], v: usize, bound: i64) -> Vec<VertexSub> {
    let r = bb.bundle().rank(v);
    let mut opts: Vec<VertexSub> = (0u64..1 << r)
        .map(|mask| VertexSub::Subset((0..r).filter(|i| mask >> i & 1 == 1).collect()))
        .collect();
    if r < 2 {
        return opts;
    }
    let mut lines: Vec<Vec<Poly>> = Vec::new();
    let mut selfs: Vec<PolyMatrix> = Vec::new();
    for m in all {
        if m.from == v {
            lines.extend(kernel_line(&m.m));
        }
        if m.to == v {
            lines.extend(image_line(&m.m));
        }
        if m.from == v && m.to == v {
            selfs.push(m.m.clone());
        }
    }
    for a in all.iter().filter(|m| m.from == v && m.to != v) {
        for b in all.iter().filter(|m| m.from == a.to && m.to == v) {
            selfs.push(b.m.mul(&a.m));
        }
    }
    for (i, a) in selfs.iter().enumerate() {
        lines.extend(kernel_line(a));
        lines.extend(image_line(a));
        lines.extend(eigen_lines(a));
        for b in &selfs[i + 1..] {
            lines.extend(kernel_line(&a.mul(b).sub(&b.mul(a))));
        }
    }
    let summands = bb.bundle().vertex(v);
    for l in lines {
        if let Some(sub) = line_sub(l, summands, bound) {
            if !opts.contains(&sub) {
                opts.push(sub);
            }
        }
    }
    opts
}

/// Default search bound for line inclusions.
pub fn default_bound(b: &SplitBundle) -> i64 {
    b.max_spread() + 2
}

/// Every proper nonzero candidate of the enumerated family, invariant or not.
pub fn subbundle_candidates(bb: &QBarBundleP1, bound: i64) -> Vec<SubbundleCandidate> {
    let all = maps(bb);
    let n = bb.quiver().num_vertices();
    let options: Vec<Vec<VertexSub>> = (0..n).map(|v| vertex_options(bb, &all, v, bound)).collect();
    let ranks: Vec<usize> = (0..n).map(|v| bb.bundle().rank(v)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    if options.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let parts: Vec<VertexSub> = (0..n).map(|v| options[v][idx[v]].clone()).collect();
        let total: usize = parts.iter().map(VertexSub::rank).sum();
        let full = parts.iter().zip(&ranks).all(|(p, &r)| p.rank() == r);
        if total > 0 && !full {
            out.push(SubbundleCandidate { parts });
        }
        let mut v = 0;
        loop {
            if v == n {
                return out;
            }
            idx[v] += 1;
            if idx[v] < options[v].len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

/// Proper nonzero candidates closed under every `phi_v`, `x_a`, `y_a`.
pub fn invariant_subbundles(bb: &QBarBundleP1, bound: i64) -> Vec<SubbundleCandidate> {
    let all = maps(bb);
    let n = bb.quiver().num_vertices();
    let ranks: Vec<usize> = (0..n).map(|v| bb.bundle().rank(v)).collect();
    subbundle_candidates(bb, bound)
        .into_iter()
        .filter(|c| is_invariant(&c.parts, &ranks, &all))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Semistable,
    Unstable,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Semistable => "semistable",
            Verdict::Unstable => "unstable",
        }
    }
}

/// Verdict relative to the enumerated family of sub-objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub slope: Q,
    pub witness: Option<SubbundleCandidate>,
    pub witness_slope: Option<Q>,
    pub candidates_checked: usize,
}

impl StabilityReport {
    pub fn slope_string(&self) -> String {
        fmt_q(&self.slope)
    }
}

pub fn is_stable(
    bb: &QBarBundleP1,
    sp: &SlopeParams,
    bound: Option<i64>,
) -> Result<StabilityReport> {
    let b = bb.bundle();
    let mu = b.slope(sp)?;
    let bound = bound.unwrap_or_else(|| default_bound(b));
    let subs = invariant_subbundles(bb, bound);
    let mut best: Option<(Q, SubbundleCandidate)> = None;
    for c in &subs {
        let s = c.slope(b, sp)?;
        if best.as_ref().is_none_or(|(m, _)| s > *m) {
            best = Some((s, c.clone()));
        }
    }
    let (verdict, witness, witness_slope) = match best {
        Some((s, c)) if s > mu => (Verdict::Unstable, Some(c), Some(s)),
        Some((s, c)) if s == mu => (Verdict::Semistable, Some(c), Some(s)),
        _ => (Verdict::Stable, None, None),
    };
    Ok(StabilityReport {
        verdict,
        slope: mu,
        witness,
        witness_slope,
        candidates_checked: subs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cq, qf};
    use crate::p1::{constant_matrix, poly_matrix};
    use crate::quiver::Quiver;

    fn unit_sigma(n: usize) -> Vec<Q> {
        vec![Q::one(); n]
    }

    #[test]
    fn slope_examples() {
        let q1 = SlopeParams::new(unit_sigma(1), vec![Q::zero()]).unwrap();
        assert_eq!(slope(&[1], &[5], &q1).unwrap(), q(5));
        let q2 = SlopeParams::new(unit_sigma(2), vec![Q::zero(); 2]).unwrap();
        assert_eq!(slope(&[1, 2], &[0, 2], &q2).unwrap(), qf(2, 3));
        assert_eq!(slope(&[0, 0], &[0, 0], &q2), Err(Error::UndefinedSlope));
    }

    #[test]
    fn normalized_tau_zeroes_bundle_slope() {
        let qv = Quiver::a2();
        let b = SplitBundle::from_splitting(&qv, vec![vec![1], vec![3, 0]]).unwrap();
        let sp = SlopeParams::normalized(&b, vec![q(2), qf(1, 3)]).unwrap();
        assert_eq!(b.slope(&sp).unwrap(), Q::zero());
    }

    #[test]
    fn zero_sections_make_all_subsets_invariant() {
        let q = Quiver::a2();
        let b = SplitBundle::from_splitting(&q, vec![vec![0], vec![1, 0]]).unwrap();
        let bb = QBarBundleP1::zero(&q, b).unwrap();
        let subs = invariant_subbundles(&bb, 3);
        // 2 * 4 subsets minus the zero and full objects
        let subsets = subs
            .iter()
            .filter(|c| c.parts.iter().all(|p| matches!(p, VertexSub::Subset(_))))
            .count();
        assert_eq!(subsets, 6);
    }

    #[test]
    fn equal_degrees_with_zero_data_are_semistable() {
        let q = Quiver::point();
        let b = SplitBundle::from_splitting(&q, vec![vec![2, 2]]).unwrap();
        let bb = QBarBundleP1::zero(&q, b.clone()).unwrap();
        let r = is_stable(&bb, &SlopeParams::unit(&b).unwrap(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Semistable);
    }

    #[test]
    fn lower_triangular_higgs_field_keeps_top_summand() {
        let q = Quiver::point();
        let b = SplitBundle::from_splitting(&q, vec![vec![4, 0]]).unwrap();
        // p_{01} maps O(0) into O(4) (x) K, degree <= 2
        let p = poly_matrix(
            2,
            2,
            vec![
                Poly::zero(),
                Poly::from_ints(&[1, 0, 3]),
                Poly::zero(),
                Poly::zero(),
            ],
        );
        let bb = QBarBundleP1::from_matrices(&q, b.clone(), vec![p], vec![], vec![]).unwrap();
        let subs = invariant_subbundles(&bb, 6);
        assert!(subs.contains(&SubbundleCandidate {
            parts: vec![VertexSub::Subset(vec![0])]
        }));
        let r = is_stable(&bb, &SlopeParams::unit(&b).unwrap(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        assert_eq!(r.witness.unwrap().degrees(&b), vec![4]);
    }

    #[test]
    fn kernel_lines_are_found() {
        // y: E_2 -> E_1 kills the line (1, -1) in E_2 = O(0)^2
        let q = Quiver::a2();
        let b = SplitBundle::from_splitting(&q, vec![vec![-1], vec![0, 0]]).unwrap();
        let x = PolyMatrix::zeros(2, 1);
        let y = constant_matrix(1, 2, &[cq(1, 0), cq(1, 0)]);
        let p = vec![PolyMatrix::zeros(1, 1), PolyMatrix::zeros(2, 2)];
        let bb = QBarBundleP1::from_matrices(&q, b, p, vec![x], vec![y]).unwrap();
        let line = VertexSub::Line {
            vector: vec![Poly::one(), Poly::from_ints(&[-1])],
            degree: 0,
        };
        let subs = invariant_subbundles(&bb, 2);
        assert!(subs
            .iter()
            .any(|c| c.parts == vec![VertexSub::Subset(vec![]), line.clone()]));
    }

    #[test]
    fn eigenlines_of_constant_loop() {
        // x = [[1, 1], [0, 2]] on a loop: eigenlines (1, 0) and (1, 1)
        let q = Quiver::jordan();
        let b = SplitBundle::from_splitting(&q, vec![vec![0, 0]]).unwrap();
        let x = constant_matrix(2, 2, &[cq(1, 0), cq(1, 0), cq(0, 0), cq(2, 0)]);
        let y = PolyMatrix::zeros(2, 2);
        let bb =
            QBarBundleP1::from_matrices(&q, b, vec![PolyMatrix::zeros(2, 2)], vec![x], vec![y])
                .unwrap();
        let subs = invariant_subbundles(&bb, 2);
        let want = VertexSub::Line {
            vector: vec![Poly::one(), Poly::one()],
            degree: 0,
        };
        assert!(subs.iter().any(|c| c.parts == vec![want.clone()]));
        assert!(subs
            .iter()
            .any(|c| c.parts == vec![VertexSub::Subset(vec![0])]));
        assert!(!subs
            .iter()
            .any(|c| c.parts == vec![VertexSub::Subset(vec![1])]));
    }
}
