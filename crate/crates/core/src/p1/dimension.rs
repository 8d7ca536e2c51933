use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::stability::{is_stable, SlopeParams, Verdict};
use super::{dual_counts, hom_dim, section_counts, QBarBundleP1};
use crate::error::{Error, Result};
use crate::exact::{rank, Cq, Poly, PolyMatrix};

type Key = (u8, usize, usize, usize, usize);
type Column = BTreeMap<Key, Cq>;

fn push_matrix(col: &mut Column, tag: u8, idx: usize, m: &PolyMatrix) {
    for (i, j, p) in m.entries() {
        for (k, a) in p.coeffs().iter().enumerate() {
            if !a.is_zero() {
                let e = col.entry((tag, idx, i, j, k)).or_insert_with(Cq::zero);
                *e = &*e + a;
            }
        }
    }
}

fn column_rank(cols: &[Column]) -> usize {
    let mut keys: Vec<Key> = cols.iter().flat_map(|c| c.keys().copied()).collect();
    keys.sort_unstable();
    keys.dedup();
    let rows: Vec<Vec<Cq>> = cols
        .iter()
        .map(|c| {
            keys.iter()
                .map(|k| c.get(k).cloned().unwrap_or_else(Cq::zero))
                .collect()
        })
        .collect();
    // rank of the transpose equals the rank
    rank(&rows, keys.len())
}

fn unit(rows: usize, cols: usize, i: usize, j: usize, k: usize) -> PolyMatrix {
    let mut m = PolyMatrix::zeros(rows, cols);
    m.set(i, j, Poly::monomial(k, Cq::one()));
    m
}

fn commutator(f: &PolyMatrix, m: &PolyMatrix) -> PolyMatrix {
    f.mul(m).sub(&m.mul(f))
}

/// Dimension of the algebra of degree-respecting endomorphisms commuting with
/// all of `phi`, `x`, `y`.
pub fn endomorphism_dimension(bb: &QBarBundleP1) -> usize {
    let q = bb.quiver();
    let b = bb.bundle();
    let n = q.num_vertices();
    let mut cols = Vec::new();
    for v in 0..n {
        let d = b.vertex(v);
        let r = d.len();
        for i in 0..r {
            for j in 0..r {
                for k in 0..hom_dim(d[j], d[i]) {
                    let f: Vec<PolyMatrix> = (0..n)
                        .map(|w| {
                            if w == v {
                                unit(r, r, i, j, k)
                            } else {
                                PolyMatrix::zeros(b.rank(w), b.rank(w))
                            }
                        })
                        .collect();
                    cols.push(endo_residual(bb, &f));
                }
            }
        }
    }
    cols.len() - column_rank(&cols)
}

fn endo_residual(bb: &QBarBundleP1, f: &[PolyMatrix]) -> Column {
    let mut col = Column::new();
    for (k, e) in bb.quiver().edges().iter().enumerate() {
        let (x, y) = (bb.x()[k].matrix(), bb.y()[k].matrix());
        push_matrix(&mut col, 0, k, &f[e.head].mul(x).sub(&x.mul(&f[e.tail])));
        push_matrix(&mut col, 1, k, &f[e.tail].mul(y).sub(&y.mul(&f[e.head])));
    }
    for (v, phi) in bb.phi().iter().enumerate() {
        push_matrix(&mut col, 2, v, &commutator(&f[v], phi.zbar_coeff()));
        push_matrix(&mut col, 3, v, &commutator(&f[v], phi.holomorphic_part()));
    }
    col
}

const TAG_X: u8 = 0;
const TAG_Y: u8 = 1;
const TAG_P: u8 = 2;
const TAG_C: u8 = 3;

/// Complex dimension of the solution space of the linearized equations at a
/// stable point, modulo the linearized action of constant block-diagonal
/// automorphisms.
///
/// Parameters are the polynomial coefficients of `x`, `y`, `p` and the entries
/// of `c`. The equations say that the edge source stays constant and equal to
/// `c` at every vertex.
pub fn expected_dimension(bb: &QBarBundleP1, sp: &SlopeParams) -> Result<usize> {
    let report = is_stable(bb, sp, None)?;
    if report.verdict != Verdict::Stable {
        return Err(Error::Precondition(format!(
            "expected dimension needs a stable input, verdict is {}",
            report.verdict.name()
        )));
    }
    let q = bb.quiver();
    let b = bb.bundle();
    let n = q.num_vertices();

    let mut lin = Vec::new();
    for (a, e) in q.edges().iter().enumerate() {
        let (dh, dt) = (b.vertex(e.head), b.vertex(e.tail));
        let (x, y) = (bb.x()[a].matrix(), bb.y()[a].matrix());
        for (i, row) in section_counts(dh, dt).iter().enumerate() {
            for (j, &cnt) in row.iter().enumerate() {
                for k in 0..cnt {
                    let dx = unit(dh.len(), dt.len(), i, j, k);
                    let mut col = Column::new();
                    push_matrix(&mut col, 0, e.head, &dx.mul(y));
                    push_matrix(&mut col, 0, e.tail, &y.mul(&dx).scale(&-Cq::one()));
                    lin.push(col);
                }
            }
        }
        for (i, row) in dual_counts(dt, dh).iter().enumerate() {
            for (j, &cnt) in row.iter().enumerate() {
                for k in 0..cnt {
                    let dy = unit(dt.len(), dh.len(), i, j, k);
                    let mut col = Column::new();
                    push_matrix(&mut col, 0, e.head, &x.mul(&dy));
                    push_matrix(&mut col, 0, e.tail, &dy.mul(x).scale(&-Cq::one()));
                    lin.push(col);
                }
            }
        }
    }
    for v in 0..n {
        let d = b.vertex(v);
        let k2: Vec<i64> = d.iter().map(|x| x - 2).collect();
        let p_params: usize = section_counts(&k2, d).iter().flatten().sum();
        lin.extend((0..p_params).map(|_| Column::new()));
        for i in 0..d.len() {
            for j in 0..d.len() {
                let mut col = Column::new();
                col.insert((0, v, i, j, 0), -Cq::one());
                lin.push(col);
            }
        }
    }
    let nullity = lin.len() - column_rank(&lin);

    let mut orbit = Vec::new();
    for v in 0..n {
        let d = b.vertex(v);
        for i in 0..d.len() {
            for j in 0..d.len() {
                if d[i] != d[j] {
                    continue;
                }
                let f: Vec<PolyMatrix> = (0..n)
                    .map(|w| {
                        if w == v {
                            unit(d.len(), d.len(), i, j, 0)
                        } else {
                            PolyMatrix::zeros(b.rank(w), b.rank(w))
                        }
                    })
                    .collect();
                let mut col = Column::new();
                for (a, e) in q.edges().iter().enumerate() {
                    let (x, y) = (bb.x()[a].matrix(), bb.y()[a].matrix());
                    push_matrix(
                        &mut col,
                        TAG_X,
                        a,
                        &f[e.head].mul(x).sub(&x.mul(&f[e.tail])),
                    );
                    push_matrix(
                        &mut col,
                        TAG_Y,
                        a,
                        &f[e.tail].mul(y).sub(&y.mul(&f[e.head])),
                    );
                }
                for (w, phi) in bb.phi().iter().enumerate() {
                    push_matrix(
                        &mut col,
                        TAG_P,
                        w,
                        &commutator(&f[w], phi.holomorphic_part()),
                    );
                    push_matrix(&mut col, TAG_C, w, &commutator(&f[w], phi.zbar_coeff()));
                }
                orbit.push(col);
            }
        }
    }
    let orbit_rank = column_rank(&orbit);
    nullity.checked_sub(orbit_rank).ok_or_else(|| {
        Error::Domain(format!(
            "orbit rank {orbit_rank} exceeds solution dimension {nullity}"
        ))
    })
}

/// `6(g - 1)`: rank two, one loop, genus `g`.
pub fn genus_expected_dim(g: i64) -> Result<i64> {
    if g < 2 {
        return Err(Error::Domain(format!("genus must be at least 2, got {g}")));
    }
    Ok(6 * (g - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::p1::SplitBundle;
    use crate::quiver::Quiver;

    #[test]
    fn genus_formula() {
        assert_eq!(genus_expected_dim(2).unwrap(), 6);
        assert_eq!(genus_expected_dim(3).unwrap(), 12);
        assert_eq!(genus_expected_dim(10).unwrap(), 54);
        assert!(genus_expected_dim(1).is_err());
    }

    #[test]
    fn zero_data_has_full_endomorphisms() {
        let q = Quiver::point();
        let b = SplitBundle::from_splitting(&q, vec![vec![1, 1]]).unwrap();
        let bb = QBarBundleP1::zero(&q, b).unwrap();
        assert_eq!(endomorphism_dimension(&bb), 4);
        let b = SplitBundle::from_splitting(&q, vec![vec![2, 0]]).unwrap();
        let bb = QBarBundleP1::zero(&q, b).unwrap();
        // scalars on each summand plus Hom(O(0), O(2))
        assert_eq!(endomorphism_dimension(&bb), 5);
    }

    #[test]
    fn unstable_input_is_refused() {
        let q = Quiver::point();
        let b = SplitBundle::from_splitting(&q, vec![vec![1, 0]]).unwrap();
        let bb = QBarBundleP1::zero(&q, b.clone()).unwrap();
        let sp = SlopeParams::unit(&b).unwrap();
        assert!(matches!(
            expected_dimension(&bb, &sp),
            Err(Error::Precondition(_))
        ));
    }
}
