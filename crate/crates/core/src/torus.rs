//! Weight decompositions and fixed points of the scaling action.
//!
//! A diagonal homomorphism `g(lambda)` is given by integer weights on the
//! summands of every vertex bundle. Data is fixed when each nonzero block of a
//! section maps between summands whose weights differ by the prescribed shift.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Cq, PolyMatrix};
use crate::p1::QBarBundleP1;
use crate::point_rep::PointRep;
use crate::quiver::Quiver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusMode {
    /// One weight per summand; `x` preserves weight, `phi` and `y` lower it by one.
    #[default]
    Circle,
    /// One weight per vertex coordinate; `phi_v` lowers coordinate `v`,
    /// `x_a` lowers `t(a)`, `y_a` lowers `h(a)`.
    Torus,
}

impl TorusMode {
    pub fn name(self) -> &'static str {
        match self {
            TorusMode::Circle => "circle",
            TorusMode::Torus => "torus",
        }
    }

    pub fn width(self, q: &Quiver) -> usize {
        match self {
            TorusMode::Circle => 1,
            TorusMode::Torus => q.num_vertices(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightAssignment {
    weights: Vec<Vec<Vec<i64>>>,
}

impl WeightAssignment {
    pub fn new(ranks: &[usize], width: usize, weights: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        if weights.len() != ranks.len() {
            return Err(Error::Dimension(format!(
                "weights for {} vertices, expected {}",
                weights.len(),
                ranks.len()
            )));
        }
        for (v, (w, &r)) in weights.iter().zip(ranks).enumerate() {
            if w.len() != r {
                return Err(Error::Dimension(format!(
                    "vertex {v}: {} weight tuples for rank {r}",
                    w.len()
                )));
            }
            if w.iter().any(|t| t.len() != width) {
                return Err(Error::Dimension(format!(
                    "vertex {v}: weight tuples must have length {width}"
                )));
            }
        }
        Ok(Self { weights })
    }

    /// Scalar weights for the circle action.
    pub fn circle(ranks: &[usize], weights: Vec<Vec<i64>>) -> Result<Self> {
        let w = weights
            .into_iter()
            .map(|v| v.into_iter().map(|x| vec![x]).collect())
            .collect();
        Self::new(ranks, 1, w)
    }

    pub fn weights(&self) -> &[Vec<Vec<i64>>] {
        &self.weights
    }

    pub fn shifted(&self, by: &[i64]) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|t| t.iter().zip(by).map(|(a, b)| a + b).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

/// Polynomial in `z` and `zbar`: exponent pair to coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiPoly(BTreeMap<(u32, u32), Cq>);

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(z: u32, zbar: u32, c: Cq) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert((z, zbar), c);
        }
        Self(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_assign(&mut self, o: &Self) {
        for (k, c) in &o.0 {
            let e = self.0.entry(*k).or_insert_with(Cq::zero);
            *e = &*e + c;
            if e.is_zero() {
                self.0.remove(k);
            }
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.0 {
            for ((a2, b2), c2) in &o.0 {
                out.add_assign(&Self::term(a + a2, b + b2, c * c2));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPolyMatrix {
    n: usize,
    data: Vec<BiPoly>,
}

impl BiPolyMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![BiPoly::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, BiPoly::term(0, 0, crate::exact::cq(1, 0)));
        }
        m
    }

    /// `c zbar + p(z)`.
    pub fn from_parts(c: &PolyMatrix, p: &PolyMatrix) -> Self {
        let n = c.rows();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut e = BiPoly::term(0, 1, c.get(i, j).coeff(0));
                for (k, a) in p.get(i, j).coeffs().iter().enumerate() {
                    e.add_assign(&BiPoly::term(k as u32, 0, a.clone()));
                }
                m.set(i, j, e);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BiPoly {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BiPoly) {
        self.data[i * self.n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BiPoly::is_zero)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BiPoly::zero();
                for k in 0..n {
                    acc.add_assign(&self.get(i, k).mul(o.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn support(&self) -> Support {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| !self.get(i, j).is_zero()).collect())
            .collect()
    }
}

/// `true` where an entry is nonzero (or allowed, for masks).
pub type Support = Vec<Vec<bool>>;

/// Section data stripped to what the fixed-point test needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusData {
    ranks: Vec<usize>,
    phi: Vec<BiPolyMatrix>,
    x: Vec<Support>,
    y: Vec<Support>,
}

fn support_of(m: &PolyMatrix) -> Support {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| !m.get(i, j).is_zero()).collect())
        .collect()
}

impl TorusData {
    pub fn new(
        q: &Quiver,
        ranks: &[usize],
        phi: Vec<BiPolyMatrix>,
        x: Vec<Support>,
        y: Vec<Support>,
    ) -> Result<Self> {
        if ranks.len() != q.num_vertices() || phi.len() != ranks.len() {
            return Err(Error::Dimension(
                "one Higgs field per vertex required".into(),
            ));
        }
        if x.len() != q.num_edges() || y.len() != q.num_edges() {
            return Err(Error::Dimension("one x and one y per edge required".into()));
        }
        for (v, f) in phi.iter().enumerate() {
            if f.size() != ranks[v] {
                return Err(Error::Dimension(format!(
                    "phi at vertex {v} has the wrong size"
                )));
            }
        }
        let shape = |s: &Support| (s.len(), s.first().map_or(0, Vec::len));
        for (k, e) in q.edges().iter().enumerate() {
            let (rh, rt) = (ranks[e.head], ranks[e.tail]);
            let ok_x = shape(&x[k]) == (rh, rt) || (rh == 0 || rt == 0);
            let ok_y = shape(&y[k]) == (rt, rh) || (rh == 0 || rt == 0);
            if !ok_x || !ok_y {
                return Err(Error::Dimension(format!(
                    "sections on edge {} have wrong shape",
                    e.id
                )));
            }
        }
        Ok(Self {
            ranks: ranks.to_vec(),
            phi,
            x,
            y,
        })
    }

    /// Point-level data has no Higgs field; entries count as nonzero unless
    /// exactly zero.
    pub fn from_point_rep(q: &Quiver, p: &PointRep) -> Result<Self> {
        let sup = |m: &crate::point_rep::CMat| -> Support {
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| m[(i, j)] != num_complex::Complex64::new(0.0, 0.0))
                        .collect()
                })
                .collect()
        };
        let ranks = p.ranks().to_vec();
        let phi = ranks.iter().map(|&r| BiPolyMatrix::zeros(r)).collect();
        Self::new(
            q,
            &ranks,
            phi,
            p.x.iter().map(sup).collect(),
            p.y.iter().map(sup).collect(),
        )
    }

    pub fn from_bundle(bb: &QBarBundleP1) -> Result<Self> {
        let q = bb.quiver();
        let ranks: Vec<usize> = (0..q.num_vertices()).map(|v| bb.bundle().rank(v)).collect();
        let phi = bb
            .phi()
            .iter()
            .map(|f| BiPolyMatrix::from_parts(f.zbar_coeff(), f.holomorphic_part()))
            .collect();
        Self::new(
            q,
            &ranks,
            phi,
            bb.x().iter().map(|s| support_of(s.matrix())).collect(),
            bb.y().iter().map(|s| support_of(s.matrix())).collect(),
        )
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn phi(&self) -> &[BiPolyMatrix] {
        &self.phi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMasks {
    pub phi: Vec<Support>,
    pub x: Vec<Support>,
    pub y: Vec<Support>,
}

fn lowered(w: &[i64], coord: usize) -> Vec<i64> {
    let mut v = w.to_vec();
    v[coord] -= 1;
    v
}

/// Blocks `(target, source)` that may be nonzero at a fixed point.
pub fn allowed_blocks(q: &Quiver, wa: &WeightAssignment, mode: TorusMode) -> Result<BlockMasks> {
    let w = wa.weights();
    if w.len() != q.num_vertices() {
        return Err(Error::Dimension("weights do not match the quiver".into()));
    }
    let width = mode.width(q);
    if w.iter().flatten().any(|t| t.len() != width) {
        return Err(Error::Dimension(format!(
            "{} mode needs weight tuples of length {width}",
            mode.name()
        )));
    }
    let mask = |tgt: &[Vec<i64>], src: &[Vec<i64>], shift: Option<usize>| -> Support {
        tgt.iter()
            .map(|wt| {
                src.iter()
                    .map(|ws| match shift {
                        Some(c) => *wt == lowered(ws, c),
                        None => wt == ws,
                    })
                    .collect()
            })
            .collect()
    };
    let phi = (0..q.num_vertices())
        .map(|v| {
            let c = match mode {
                TorusMode::Circle => 0,
                TorusMode::Torus => v,
            };
            mask(&w[v], &w[v], Some(c))
        })
        .collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for e in q.edges() {
        let (wh, wt) = (&w[e.head], &w[e.tail]);
        match mode {
            TorusMode::Circle => {
                x.push(mask(wh, wt, None));
                y.push(mask(wt, wh, Some(0)));
            }
            TorusMode::Torus => {
                x.push(mask(wh, wt, Some(e.tail)));
                y.push(mask(wt, wh, Some(e.head)));
            }
        }
    }
    Ok(BlockMasks { phi, x, y })
}

fn inside(s: &Support, m: &Support) -> bool {
    s.iter()
        .zip(m)
        .all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| !x || y))
}

pub fn is_fixed(q: &Quiver, d: &TorusData, wa: &WeightAssignment, mode: TorusMode) -> Result<bool> {
    let m = allowed_blocks(q, wa, mode)?;
    for (v, r) in d.ranks.iter().enumerate() {
        if wa.weights()[v].len() != *r {
            return Err(Error::Dimension(format!(
                "vertex {v}: weight count differs from rank"
            )));
        }
    }
    Ok(d.phi
        .iter()
        .zip(&m.phi)
        .all(|(f, mk)| inside(&f.support(), mk))
        && d.x.iter().zip(&m.x).all(|(s, mk)| inside(s, mk))
        && d.y.iter().zip(&m.y).all(|(s, mk)| inside(s, mk)))
}

fn all_tuples(width: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..width {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-bound..=bound).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// All fixed weight assignments with entries in `[-bound, bound]`, taken up to
/// a global shift: the first summand of the first nonempty vertex has weight 0.
pub fn find_weights(
    q: &Quiver,
    d: &TorusData,
    bound: i64,
    mode: TorusMode,
) -> Result<Vec<WeightAssignment>> {
    if bound < 0 {
        return Err(Error::Domain("weight bound must be non-negative".into()));
    }
    let width = mode.width(q);
    let slots: Vec<(usize, usize)> = d
        .ranks
        .iter()
        .enumerate()
        .flat_map(|(v, &r)| (0..r).map(move |i| (v, i)))
        .collect();
    if slots.is_empty() {
        return Ok(vec![WeightAssignment {
            weights: d.ranks.iter().map(|_| vec![]).collect(),
        }]);
    }
    let tuples = all_tuples(width, bound);
    let origin = vec![0; width];
    let first_choices: Vec<Vec<i64>> = if slots.len() > 1 {
        tuples.clone()
    } else {
        vec![]
    };

    let search = |prefix: Vec<Vec<i64>>| -> Vec<WeightAssignment> {
        let mut out = Vec::new();
        let mut cur = prefix;
        dfs(q, d, mode, &slots, &tuples, &mut cur, &mut out);
        out
    };
    if first_choices.is_empty() {
        return Ok(search(vec![origin]));
    }
    let mut res: Vec<WeightAssignment> = first_choices
        .into_par_iter()
        .flat_map_iter(|t| search(vec![origin.clone(), t]))
        .collect();
    res.sort_by(|a, b| a.weights.cmp(&b.weights));
    Ok(res)
}

fn partial(
    d: &TorusData,
    slots: &[(usize, usize)],
    cur: &[Vec<i64>],
) -> Vec<Vec<Option<Vec<i64>>>> {
    let mut w: Vec<Vec<Option<Vec<i64>>>> = d.ranks.iter().map(|&r| vec![None; r]).collect();
    for (k, t) in cur.iter().enumerate() {
        let (v, i) = slots[k];
        w[v][i] = Some(t.clone());
    }
    w
}

fn consistent(q: &Quiver, d: &TorusData, mode: TorusMode, w: &[Vec<Option<Vec<i64>>>]) -> bool {
    let ok = |tgt: &Option<Vec<i64>>, src: &Option<Vec<i64>>, shift: Option<usize>| match (tgt, src)
    {
        (Some(a), Some(b)) => match shift {
            Some(c) => *a == lowered(b, c),
            None => a == b,
        },
        _ => true,
    };
    for (v, f) in d.phi.iter().enumerate() {
        let c = match mode {
            TorusMode::Circle => 0,
            TorusMode::Torus => v,
        };
        let s = f.support();
        for i in 0..s.len() {
            for j in 0..s.len() {
                if s[i][j] && !ok(&w[v][i], &w[v][j], Some(c)) {
                    return false;
                }
            }
        }
    }
    for (k, e) in q.edges().iter().enumerate() {
        let (sx, sy) = match mode {
            TorusMode::Circle => (None, Some(0)),
            TorusMode::Torus => (Some(e.tail), Some(e.head)),
        };
        for (i, row) in d.x[k].iter().enumerate() {
            for (j, &nz) in row.iter().enumerate() {
                if nz && !ok(&w[e.head][i], &w[e.tail][j], sx) {
                    return false;
                }
            }
        }
        for (i, row) in d.y[k].iter().enumerate() {
            for (j, &nz) in row.iter().enumerate() {
                if nz && !ok(&w[e.tail][i], &w[e.head][j], sy) {
                    return false;
                }
            }
        }
    }
    true
}

fn dfs(
    q: &Quiver,
    d: &TorusData,
    mode: TorusMode,
    slots: &[(usize, usize)],
    tuples: &[Vec<i64>],
    cur: &mut Vec<Vec<i64>>,
    out: &mut Vec<WeightAssignment>,
) {
    let w = partial(d, slots, cur);
    if !consistent(q, d, mode, &w) {
        return;
    }
    if cur.len() == slots.len() {
        out.push(WeightAssignment {
            weights: w
                .into_iter()
                .map(|v| v.into_iter().map(Option::unwrap).collect())
                .collect(),
        });
        return;
    }
    for t in tuples {
        cur.push(t.clone());
        dfs(q, d, mode, slots, tuples, cur, out);
        cur.pop();
    }
}

/// `phi_v^{r_v} = 0` for every vertex, as an identity in `z` and `zbar`.
pub fn check_nilpotent(phi: &[BiPolyMatrix]) -> Vec<bool> {
    phi.iter()
        .map(|f| {
            let n = f.size();
            let mut acc = BiPolyMatrix::identity(n);
            for _ in 0..n {
                acc = acc.mul(f);
            }
            acc.is_zero()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::cq;

    fn strict_upper(n: usize, steps: &[(usize, usize)]) -> BiPolyMatrix {
        let mut m = BiPolyMatrix::zeros(n);
        for &(i, j) in steps {
            m.set(i, j, BiPoly::term(1, 0, cq(1, 0)));
        }
        m
    }

    fn single(phi: BiPolyMatrix) -> (Quiver, TorusData) {
        let q = Quiver::point();
        let r = phi.size();
        let d = TorusData::new(&q, &[r], vec![phi], vec![], vec![]).unwrap();
        (q, d)
    }

    #[test]
    fn circle_mask_examples() {
        let q = Quiver::point();
        let wa = WeightAssignment::circle(&[2], vec![vec![0, 1]]).unwrap();
        let m = allowed_blocks(&q, &wa, TorusMode::Circle).unwrap();
        assert_eq!(m.phi[0], vec![vec![false, true], vec![false, false]]);

        let q = Quiver::jordan();
        let wa = WeightAssignment::circle(&[2], vec![vec![0, 0]]).unwrap();
        let m = allowed_blocks(&q, &wa, TorusMode::Circle).unwrap();
        assert!(m.phi[0].iter().flatten().all(|b| !b));
        assert!(m.x[0].iter().flatten().all(|&b| b));
    }

    #[test]
    fn torus_masks_with_zero_weights_are_empty() {
        let q = Quiver::a2();
        let wa =
            WeightAssignment::new(&[1, 1], 2, vec![vec![vec![0, 0]], vec![vec![0, 0]]]).unwrap();
        let m = allowed_blocks(&q, &wa, TorusMode::Torus).unwrap();
        assert_eq!(m.x[0], vec![vec![false]]);
        assert_eq!(m.y[0], vec![vec![false]]);
    }

    #[test]
    fn triangular_field_is_fixed_and_diagonal_is_not() {
        let (q, d) = single(strict_upper(2, &[(0, 1)]));
        let wa = WeightAssignment::circle(&[2], vec![vec![0, 1]]).unwrap();
        assert!(is_fixed(&q, &d, &wa, TorusMode::Circle).unwrap());

        let mut phi = strict_upper(2, &[(0, 1)]);
        phi.set(0, 0, BiPoly::term(0, 0, cq(1, 0)));
        let (q, d) = single(phi);
        assert!(find_weights(&q, &d, 3, TorusMode::Circle)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn chain_finds_expected_weights() {
        let (q, d) = single(strict_upper(3, &[(0, 1), (1, 2)]));
        let found = find_weights(&q, &d, 3, TorusMode::Circle).unwrap();
        let want = WeightAssignment::circle(&[3], vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(found, vec![want]);
    }

    #[test]
    fn zero_data_admits_every_assignment() {
        let (q, d) = single(BiPolyMatrix::zeros(2));
        assert_eq!(find_weights(&q, &d, 2, TorusMode::Circle).unwrap().len(), 5);
    }

    #[test]
    fn nilpotency_examples() {
        assert_eq!(check_nilpotent(&[BiPolyMatrix::zeros(2)]), vec![true]);
        assert_eq!(check_nilpotent(&[strict_upper(2, &[(0, 1)])]), vec![true]);
        let mut m = BiPolyMatrix::zeros(2);
        m.set(0, 0, BiPoly::term(0, 1, cq(1, 0)));
        assert_eq!(check_nilpotent(&[m]), vec![false]);
    }
}
