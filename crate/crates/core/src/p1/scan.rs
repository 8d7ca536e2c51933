use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::stability::{is_stable, SlopeParams, Verdict};
use super::{dual_counts, section_counts, QBarBundleP1, SplitBundle};
use crate::error::{Error, Result};
use crate::exact::{cq, Poly, PolyMatrix, Q};
use crate::quiver::Quiver;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub samples: usize,
    pub seed: u64,
    /// Per-vertex weights; `tau` is always chosen to make the bundle slope zero.
    pub sigma: Option<Vec<Q>>,
    pub bound: Option<i64>,
    /// Redraws allowed per sample until the data admits a compatible `phi`.
    pub attempts: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            samples: 50,
            seed: 0,
            sigma: None,
            bound: None,
            attempts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanRow {
    pub label_degrees: Vec<i64>,
    pub splitting: Vec<Vec<i64>>,
    /// Samples that satisfied the moment equation.
    pub valid: usize,
    pub stable: usize,
    pub semistable: usize,
}

impl ScanRow {
    pub fn any_stable(&self) -> bool {
        self.stable > 0
    }
}

fn non_increasing(len: usize, sum: i64, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    if len == 0 {
        return if sum == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (lo..=hi).rev() {
        for mut rest in non_increasing(len - 1, sum - first, lo, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All splittings with the given ranks and label degrees whose summand
/// degrees lie in `[lo, hi]`.
pub fn splittings(ranks: &[usize], label_degrees: &[i64], lo: i64, hi: i64) -> Vec<Vec<Vec<i64>>> {
    let mut out: Vec<Vec<Vec<i64>>> = vec![vec![]];
    for (&r, &d) in ranks.iter().zip(label_degrees) {
        let opts = non_increasing(r, d, lo, hi);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn random_entry<R: Rng>(count: usize, rng: &mut R) -> Poly {
    if count == 0 {
        return Poly::zero();
    }
    let n = if rng.gen_bool(0.5) { 1 } else { count };
    Poly::new((0..n).map(|_| cq(rng.gen_range(-3..=3), 0)).collect())
}

fn random_matrix<R: Rng>(counts: &[Vec<usize>], cols: usize, rng: &mut R) -> PolyMatrix {
    PolyMatrix::from_fn(counts.len(), cols, |i, j| random_entry(counts[i][j], rng))
}

/// Random integer data on `b`, redrawn until the moment equation can be met.
pub fn random_bundle<R: Rng>(
    q: &Quiver,
    b: &SplitBundle,
    attempts: usize,
    rng: &mut R,
) -> Result<Option<QBarBundleP1>> {
    for _ in 0..attempts.max(1) {
        let x = q
            .edges()
            .iter()
            .map(|e| {
                let (dh, dt) = (b.vertex(e.head), b.vertex(e.tail));
                random_matrix(&section_counts(dh, dt), dt.len(), rng)
            })
            .collect();
        let y = q
            .edges()
            .iter()
            .map(|e| {
                let (dh, dt) = (b.vertex(e.head), b.vertex(e.tail));
                random_matrix(&dual_counts(dt, dh), dh.len(), rng)
            })
            .collect();
        let p = (0..q.num_vertices())
            .map(|v| {
                let d = b.vertex(v);
                let k: Vec<i64> = d.iter().map(|x| x - 2).collect();
                random_matrix(&section_counts(&k, d), d.len(), rng)
            })
            .collect();
        match QBarBundleP1::from_matrices(q, b.clone(), p, x, y) {
            Ok(bb) => return Ok(Some(bb)),
            Err(Error::Inconsistent { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// For every label and splitting, samples data and counts stable outcomes.
/// Rows are independent and processed in parallel; each row has its own
/// random stream so the table does not depend on scheduling.
pub fn scan_existence(
    q: &Quiver,
    ranks: &[usize],
    label_degrees: &[Vec<i64>],
    summand_range: (i64, i64),
    cfg: &ScanConfig,
) -> Result<Vec<ScanRow>> {
    let (lo, hi) = summand_range;
    if lo > hi {
        return Err(Error::Domain(format!("empty degree range [{lo}, {hi}]")));
    }
    if ranks.len() != q.num_vertices() {
        return Err(Error::Dimension("one rank per vertex required".into()));
    }
    let jobs: Vec<(Vec<i64>, Vec<Vec<i64>>)> = label_degrees
        .iter()
        .flat_map(|d| {
            splittings(ranks, d, lo, hi)
                .into_iter()
                .map(move |s| (d.clone(), s))
        })
        .collect();
    jobs.par_iter()
        .enumerate()
        .map(|(row, (d, s))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(row as u64);
            let b = SplitBundle::from_splitting(q, s.clone())?;
            let sigma = cfg
                .sigma
                .clone()
                .unwrap_or_else(|| vec![num_traits::One::one(); q.num_vertices()]);
            let sp = SlopeParams::normalized(&b, sigma)?;
            let mut out = ScanRow {
                label_degrees: d.clone(),
                splitting: s.clone(),
                valid: 0,
                stable: 0,
                semistable: 0,
            };
            for _ in 0..cfg.samples {
                let Some(bb) = random_bundle(q, &b, cfg.attempts, &mut rng)? else {
                    continue;
                };
                out.valid += 1;
                match is_stable(&bb, &sp, cfg.bound)?.verdict {
                    Verdict::Stable => out.stable += 1,
                    Verdict::Semistable => out.semistable += 1,
                    Verdict::Unstable => {}
                }
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitting_enumeration() {
        let s = splittings(&[2], &[2], -1, 3);
        assert_eq!(
            s,
            vec![vec![vec![3, -1]], vec![vec![2, 0]], vec![vec![1, 1]]]
        );
        assert_eq!(splittings(&[1, 2], &[0, 0], 0, 0).len(), 1);
    }

    #[test]
    fn scan_is_deterministic() {
        let q = Quiver::jordan();
        let cfg = ScanConfig {
            samples: 5,
            seed: 11,
            ..ScanConfig::default()
        };
        let a = scan_existence(&q, &[2], &[vec![0], vec![1]], (-1, 2), &cfg).unwrap();
        let b = scan_existence(&q, &[2], &[vec![0], vec![1]], (-1, 2), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_phi_matches_constraint() {
        let q = Quiver::a2();
        let b = SplitBundle::from_splitting(&q, vec![vec![0], vec![1, 0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let bb = random_bundle(&q, &b, 20, &mut rng).unwrap().unwrap();
            let c = crate::p1::dbar_constraint(&q, &b, bb.x(), bb.y()).unwrap();
            for (f, cv) in bb.phi().iter().zip(&c) {
                assert_eq!(f.zbar_coeff(), cv);
            }
        }
    }
}
