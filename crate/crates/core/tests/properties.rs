use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbar_core::exact::{cq, Poly, PolyMatrix};
use qbar_core::p1::{
    constant_matrix, dbar_constraint, is_stable, random_bundle, section_counts, DualSection,
    PolySection, SlopeParams, SplitBundle,
};
use qbar_core::point_rep::{
    act, hamiltonian_residual, moment_complex, moment_real, CMat, Convention, GaugeElement,
    LieElement, MomentPart, PointRep, StabilityParams,
};
use qbar_core::quiver::{Label, Quiver};
use qbar_core::solver::{kempf_ness_flow, project_complex, SolverConfig};
use qbar_core::torus::{
    allowed_blocks, check_nilpotent, find_weights, is_fixed, BiPoly, BiPolyMatrix, TorusData,
    TorusMode, WeightAssignment,
};

fn quiver(k: usize) -> (Quiver, Label) {
    match k {
        0 => (Quiver::jordan(), Label::ranks(&[2])),
        1 => (Quiver::a2(), Label::ranks(&[1, 2])),
        _ => (Quiver::star(3), Label::ranks(&[2, 1, 2, 1])),
    }
}

fn close(a: &[CMat], b: &[CMat], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moment_maps_are_equivariant(k in 0usize..3, seed in any::<u64>()) {
        let (q, l) = quiver(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let g = GaugeElement::random(&l.rank, &mut rng);
        let gp = act(&q, &g, &p).unwrap();
        let conj = |m: &[CMat]| -> Vec<CMat> {
            m.iter().zip(g.blocks()).map(|(a, gv)| gv * a * gv.adjoint()).collect()
        };
        prop_assert!(close(
            &moment_real(&q, &gp, Convention::Commutator),
            &conj(&moment_real(&q, &p, Convention::Commutator)),
            1e-10
        ));
        prop_assert!(close(&moment_complex(&q, &gp), &conj(&moment_complex(&q, &p)), 1e-10));
    }

    #[test]
    fn moment_maps_generate_the_action(k in 0usize..3, seed in any::<u64>()) {
        let (q, l) = quiver(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let v = PointRep::random(&q, &l, &mut rng).unwrap();
        let th = LieElement::random(&l.rank, &mut rng);
        for part in [MomentPart::Real, MomentPart::Complex] {
            let r = hamiltonian_residual(&q, &p, &th, &v, 1e-5, part, Convention::Commutator)
                .unwrap();
            prop_assert!(r < 1e-6, "residual {r}");
        }
    }

    #[test]
    fn dbar_vanishes_without_y(d in proptest::collection::vec(-2i64..3, 3), seed in any::<u64>()) {
        let q = Quiver::a2();
        let b = SplitBundle::from_splitting(&q, vec![vec![d[0]], vec![d[1], d[2]]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dh, dt) = (b.vertex(1), b.vertex(0));
        let counts = section_counts(dh, dt);
        let m = PolyMatrix::from_fn(2, 1, |i, j| {
            Poly::new((0..counts[i][j]).map(|_| cq(rng.gen_range(-5..=5), rng.gen_range(-5..=5))).collect())
        });
        let x = PolySection::new(m, dh, dt).unwrap();
        let y = DualSection::new(PolyMatrix::zeros(1, 2), dt, dh).unwrap();
        let c = dbar_constraint(&q, &b, &[x], &[y]).unwrap();
        prop_assert!(c.iter().all(PolyMatrix::is_zero));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_energy_never_increases(seed in any::<u64>()) {
        let q = Quiver::a2();
        let l = Label::ranks(&[1, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = SolverConfig::default();
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let p = project_complex(&q, &p, &cfg).unwrap().point;
        let sp = StabilityParams::with_tau(vec![-1.0, 1.0]).unwrap();
        let s = kempf_ness_flow(&q, &p, &sp, &cfg).unwrap();
        for w in s.energy.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-300, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn flow_commutes_with_unitary_gauge(seed in any::<u64>()) {
        let q = Quiver::a2();
        let l = Label::ranks(&[1, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let g = GaugeElement::random(&l.rank, &mut rng);
        let sp = StabilityParams::with_tau(vec![-1.0, 1.0]).unwrap();
        let cfg = SolverConfig::default();
        let a = kempf_ness_flow(&q, &p, &sp, &cfg).unwrap();
        let b = kempf_ness_flow(&q, &act(&q, &g, &p).unwrap(), &sp, &cfg).unwrap();
        prop_assert_eq!(a.converged, b.converged);
        // Limits agree up to the compact group, so compare invariants.
        let inv = |p: &PointRep| [p.x[0].norm(), p.y[0].norm(), (&p.x[0] * &p.y[0]).norm()];
        let (ia, ib) = (inv(&a.point), inv(&b.point));
        for (u, v) in ia.iter().zip(&ib) {
            prop_assert!((u - v).abs() < 1e-6, "invariants {ia:?} and {ib:?}");
        }
    }

    #[test]
    fn verdict_ignores_change_of_frame(
        a in -3i64..4,
        c in -3i64..4,
        d in -1i64..2,
        seed in any::<u64>(),
    ) {
        // Unimodular constant frames on equal-degree summands.
        let g = constant_matrix(2, 2, &[cq(1 + a * c, 0), cq(a, 0), cq(c, 0), cq(1, 0)]);
        let gi = constant_matrix(2, 2, &[cq(1, 0), cq(-a, 0), cq(-c, 0), cq(1 + a * c, 0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cases = [
            (Quiver::jordan(), vec![vec![d, d]], vec![g.clone()], vec![gi.clone()]),
            (
                Quiver::a2(),
                vec![vec![d], vec![d, d]],
                vec![PolyMatrix::identity(1), g],
                vec![PolyMatrix::identity(1), gi],
            ),
        ];
        for (q, s, g, gi) in cases {
            let b = SplitBundle::from_splitting(&q, s).unwrap();
            let sp = SlopeParams::unit(&b).unwrap();
            let Some(bb) = random_bundle(&q, &b, 20, &mut rng).unwrap() else { continue };
            let moved = bb.transform(&g, &gi).unwrap();
            let (r0, r1) = (is_stable(&bb, &sp, None).unwrap(), is_stable(&moved, &sp, None).unwrap());
            prop_assert_eq!(r0.verdict, r1.verdict);
            prop_assert_eq!(r0.witness_slope, r1.witness_slope);
        }
    }
}

fn random_weights(rng: &mut ChaCha8Rng, ranks: &[usize], width: usize) -> WeightAssignment {
    let w = ranks
        .iter()
        .map(|&r| {
            (0..r)
                .map(|_| (0..width).map(|_| rng.gen_range(-1..=1)).collect())
                .collect()
        })
        .collect();
    WeightAssignment::new(ranks, width, w).unwrap()
}

fn masked(
    q: &Quiver,
    ranks: &[usize],
    wa: &WeightAssignment,
    mode: TorusMode,
    rng: &mut ChaCha8Rng,
) -> TorusData {
    let m = allowed_blocks(q, wa, mode).unwrap();
    let phi = m
        .phi
        .iter()
        .map(|mask| {
            let mut f = BiPolyMatrix::zeros(mask.len());
            for (i, row) in mask.iter().enumerate() {
                for (j, &ok) in row.iter().enumerate() {
                    if ok && rng.gen_bool(0.8) {
                        f.set(
                            i,
                            j,
                            BiPoly::term(
                                rng.gen_range(0..3),
                                rng.gen_range(0..2),
                                cq(rng.gen_range(1..=4), 0),
                            ),
                        );
                    }
                }
            }
            f
        })
        .collect();
    let pick = |s: &Vec<Vec<bool>>, rng: &mut ChaCha8Rng| -> Vec<Vec<bool>> {
        s.iter()
            .map(|r| r.iter().map(|&a| a && rng.gen_bool(0.8)).collect())
            .collect()
    };
    let x = m.x.iter().map(|s| pick(s, rng)).collect();
    let y = m.y.iter().map(|s| pick(s, rng)).collect();
    TorusData::new(q, ranks, phi, x, y).unwrap()
}

fn mode(t: bool) -> TorusMode {
    if t {
        TorusMode::Torus
    } else {
        TorusMode::Circle
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_points_have_nilpotent_fields(k in 0usize..3, t in any::<bool>(), seed in any::<u64>()) {
        let (q, l) = quiver(k);
        let m = mode(t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wa = random_weights(&mut rng, &l.rank, m.width(&q));
        let d = masked(&q, &l.rank, &wa, m, &mut rng);
        prop_assert!(is_fixed(&q, &d, &wa, m).unwrap());
        prop_assert!(check_nilpotent(d.phi()).into_iter().all(|n| n));
    }

    #[test]
    fn found_weights_are_fixed_and_shift_closed(
        k in 0usize..2,
        t in any::<bool>(),
        seed in any::<u64>(),
        shift in -3i64..4,
    ) {
        let (q, l) = quiver(k);
        let m = mode(t);
        let width = m.width(&q);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wa = random_weights(&mut rng, &l.rank, width);
        let d = masked(&q, &l.rank, &wa, m, &mut rng);
        let origin: Vec<i64> = wa.weights()[0][0].iter().map(|v| -v).collect();
        let normal = wa.shifted(&origin);
        let found = find_weights(&q, &d, 2, m).unwrap();
        prop_assert!(found.contains(&normal));
        let by = vec![shift; width];
        for w in &found {
            prop_assert!(is_fixed(&q, &d, w, m).unwrap());
            prop_assert!(is_fixed(&q, &d, &w.shifted(&by), m).unwrap());
        }
    }
}
