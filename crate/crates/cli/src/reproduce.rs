use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qbar_core::exact::{cq, PolyMatrix};
use qbar_core::p1::{
    constant_matrix, endomorphism_dimension, expected_dimension, is_stable, random_bundle,
    scan_existence, QBarBundleP1, ScanConfig, SlopeParams, SplitBundle, Verdict,
};
use qbar_core::point_rep::{hamiltonian_residual, LieElement, MomentPart, PointRep};
use qbar_core::quiver::{Label, Quiver};
use qbar_core::Result;

use crate::{emit, Failure, Opts, Outcome};

#[derive(Serialize)]
struct Scenario {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn bare_vertex(seed: u64) -> Result<Scenario> {
    let q = Quiver::point();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for d1 in -5..=5i64 {
        for d2 in -5..=5i64 {
            let b = SplitBundle::from_splitting(&q, vec![vec![d1, d2]])?;
            let sp = SlopeParams::unit(&b)?;
            let mut samples = vec![QBarBundleP1::zero(&q, b.clone())?];
            for _ in 0..5 {
                samples.extend(random_bundle(&q, &b, 20, &mut rng)?);
            }
            for bb in &samples {
                let r = is_stable(bb, &sp, None)?;
                let ok = r.verdict != Verdict::Stable
                    && r.witness
                        .as_ref()
                        .is_some_and(|w| w.ranks() == vec![1] && w.degrees(&b) == vec![d1.max(d2)]);
                if !ok {
                    bad.push((d1, d2));
                    break;
                }
            }
        }
    }
    Ok(Scenario {
        name: "rank 2 on a bare vertex has no stable objects",
        pass: bad.is_empty(),
        detail: format!("splittings with a stable sample or a different witness: {bad:?}"),
    })
}

fn loop_unequal(seed: u64) -> Result<Scenario> {
    let q = Quiver::jordan();
    let cfg = ScanConfig {
        samples: 50,
        seed,
        ..ScanConfig::default()
    };
    let labels: Vec<Vec<i64>> = (-6..=6).map(|d| vec![d]).collect();
    let rows = scan_existence(&q, &[2], &labels, (-3, 3), &cfg)?;
    let hits: Vec<Vec<i64>> = rows
        .iter()
        .filter(|r| r.splitting[0][0] != r.splitting[0][1] && r.any_stable())
        .map(|r| r.splitting[0].clone())
        .collect();
    Ok(Scenario {
        name: "looped vertex with unequal summands has no stable samples",
        pass: hits.is_empty(),
        detail: format!("expected no stable splittings, found {hits:?}"),
    })
}

fn loop_family() -> Result<Scenario> {
    let q = Quiver::jordan();
    let b = SplitBundle::from_splitting(&q, vec![vec![0, 0]])?;
    let x = constant_matrix(2, 2, &[cq(1, 0), cq(0, 0), cq(0, 0), cq(-1, 0)]);
    let y = constant_matrix(2, 2, &[cq(2, 0), cq(1, 0), cq(3, 0), cq(-1, 0)]);
    let bb = QBarBundleP1::from_matrices(&q, b, vec![PolyMatrix::zeros(2, 2)], vec![x], vec![y])?;
    let sp = SlopeParams::unit(bb.bundle())?;
    let v = is_stable(&bb, &sp, None)?.verdict;
    let endo = endomorphism_dimension(&bb);
    let dim = expected_dimension(&bb, &sp).ok();
    Ok(Scenario {
        name: "looped vertex with equal summands has a stable family of dimension 7",
        pass: v == Verdict::Stable && endo == 1 && dim == Some(7),
        detail: format!(
            "expected stable, 1, Some(7); got {}, {endo}, {dim:?}",
            v.name()
        ),
    })
}

fn a2_threshold(seed: u64) -> Result<Scenario> {
    let q = Quiver::a2();
    let cfg = ScanConfig {
        samples: 50,
        seed,
        ..ScanConfig::default()
    };
    let mut diff = Vec::new();
    for d in 0..=2i64 {
        for dp in 2 * d - 2..=2 * d + 2 {
            let rows = scan_existence(&q, &[1, 2], &[vec![d, dp]], (-4, 8), &cfg)?;
            let found = rows.iter().any(|r| r.any_stable());
            if found != (dp >= 2 * d) {
                diff.push(format!("(d={d}, d'={dp}): stable found {found}"));
            }
        }
        let b = SplitBundle::from_splitting(&q, vec![vec![d], vec![d, d]])?;
        let x = constant_matrix(2, 1, &[cq(1, 0), cq(2, 0)]);
        let y = constant_matrix(1, 2, &[cq(3, 0), cq(-1, 0)]);
        let p = vec![PolyMatrix::zeros(1, 1), PolyMatrix::zeros(2, 2)];
        let bb = QBarBundleP1::from_matrices(&q, b, p, vec![x], vec![y])?;
        let sp = SlopeParams::unit(bb.bundle())?;
        let dim = expected_dimension(&bb, &sp).ok();
        if dim != Some(4) {
            diff.push(format!(
                "(d={d}, d'={}): dimension {dim:?}, expected 4",
                2 * d
            ));
        }
    }
    Ok(Scenario {
        name: "A2 has stable objects iff d' >= 2d, of dimension 4 at d' = 2d",
        pass: diff.is_empty(),
        detail: if diff.is_empty() {
            "all rows match".to_string()
        } else {
            diff.join("; ")
        },
    })
}

fn hamiltonian(o: &Opts) -> Result<Scenario> {
    let q = Quiver::jordan();
    let l = Label::ranks(&[2]);
    let conv = o.convention.core();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = PointRep::random(&q, &l, &mut rng)?;
        let v = PointRep::random(&q, &l, &mut rng)?;
        let th = LieElement::random(&l.rank, &mut rng);
        for part in [MomentPart::Real, MomentPart::Complex] {
            worst = worst.max(hamiltonian_residual(&q, &p, &th, &v, 1e-5, part, conv)?);
        }
    }
    Ok(Scenario {
        name: "moment maps generate the gauge action on the looped vertex",
        pass: worst < 1e-6,
        detail: format!(
            "convention {}, max residual {worst:.3e}, tolerance 1e-6",
            conv.name()
        ),
    })
}

pub(crate) fn run(o: &Opts) -> Outcome {
    let all = [
        hamiltonian(o),
        bare_vertex(o.seed),
        loop_unequal(o.seed),
        loop_family(),
        a2_threshold(o.seed),
    ];
    let mut out = Vec::new();
    for s in all {
        out.push(s.map_err(Failure::from)?);
    }
    emit(o, &out, || {
        let mut t = format!("convention: {}\n", o.convention.core().name());
        for s in &out {
            let tag = if s.pass { "PASS" } else { "FAIL" };
            t += &format!("{tag}: {}\n", s.name);
            if !s.pass {
                t += &format!("  {}\n", s.detail);
            }
        }
        t
    });
    Ok(if out.iter().all(|s| s.pass) { 0 } else { 1 })
}
