//! Numerical solutions of `mu_R = tau`, `mu_C = 0` and the dimension of the
//! quotient near a solution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point_rep::{
    act_general, hermitian_exp, infinitesimal_action, moment_complex, moment_derivative,
    moment_real, CMat, Convention, LieElement, PointRep, StabilityParams,
};
use crate::quiver::{Label, Quiver};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub step_size: f64,
    pub tolerance_mu: f64,
    pub rank_tolerance: f64,
    pub rng_seed: u64,
    pub convention: Convention,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            step_size: 1e-2,
            tolerance_mu: 1e-8,
            rank_tolerance: 1e-8,
            rng_seed: 0,
            convention: Convention::Commutator,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be positive".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::Domain("step_size must be positive".into()));
        }
        if !(self.tolerance_mu > 0.0) {
            return Err(Error::Domain("tolerance_mu must be positive".into()));
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return Err(Error::Domain("rank_tolerance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: PointRep,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub point: PointRep,
    pub tau: Vec<f64>,
    pub convention: Convention,
    pub residual_real: f64,
    pub residual_complex: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stabilizer_dimension: usize,
    /// `||mu_R - tau||^2` after every accepted step, starting value first.
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentDimension {
    pub dimension: usize,
    pub nullity: usize,
    pub orbit_rank: usize,
    pub warnings: Vec<String>,
}

fn frob(ms: &[CMat]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn real_residual(q: &Quiver, p: &PointRep, tau: &[f64], conv: Convention) -> f64 {
    let mut mu = moment_real(q, p, conv);
    for (m, &t) in mu.iter_mut().zip(tau) {
        for i in 0..m.nrows() {
            m[(i, i)] -= Complex64::new(t, 0.0);
        }
    }
    frob(&mu)
}

/// Complex coordinates of `p`: all entries of every `x` then `y`, edge by edge.
fn complex_coords(p: &PointRep) -> Vec<(bool, usize, usize, usize)> {
    let mut out = Vec::new();
    for k in 0..p.x.len() {
        for (is_y, m) in [(false, &p.x[k]), (true, &p.y[k])] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push((is_y, k, i, j));
                }
            }
        }
    }
    out
}

fn unit(p: &PointRep, c: (bool, usize, usize, usize), z: Complex64) -> PointRep {
    let mut e = p.axpy(Complex64::new(-1.0, 0.0), p).unwrap();
    let (is_y, k, i, j) = c;
    if is_y {
        e.y[k][(i, j)] = z;
    } else {
        e.x[k][(i, j)] = z;
    }
    e
}

fn flatten(ms: &[CMat]) -> Vec<Complex64> {
    ms.iter()
        .flat_map(|m| (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)])))
        .collect()
}

/// Minimal-norm Gauss–Newton iteration towards `mu_C = 0`.
pub fn project_complex(q: &Quiver, p: &PointRep, cfg: &SolverConfig) -> Result<Projection> {
    cfg.validate()?;
    let coords = complex_coords(p);
    let mut cur = p.clone();
    let mut res = frob(&moment_complex(q, &cur));
    let mut best = (cur.clone(), res);
    let mut it = 0;
    while res > cfg.tolerance_mu && it < cfg.max_iterations {
        it += 1;
        let mu = DVector::from_vec(flatten(&moment_complex(q, &cur)));
        let one = Complex64::new(1.0, 0.0);
        let cols: Vec<Vec<Complex64>> = coords
            .iter()
            .map(|&c| {
                let d = moment_derivative(q, &cur, &unit(&cur, c, one), Convention::Commutator)
                    .unwrap();
                flatten(&d.complex)
            })
            .collect();
        if cols.is_empty() || mu.is_empty() {
            break;
        }
        let jac = DMatrix::from_fn(mu.len(), cols.len(), |i, j| cols[j][i]);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            break;
        }
        let step = svd
            .solve(&mu, cfg.rank_tolerance * smax)
            .map_err(|e| Error::Domain(e.to_string()))?;
        let mut next = cur.clone();
        for (n, &c) in coords.iter().enumerate() {
            let (is_y, k, i, j) = c;
            let m = if is_y { &mut next.y[k] } else { &mut next.x[k] };
            m[(i, j)] -= step[n];
        }
        cur = next;
        res = frob(&moment_complex(q, &cur));
        if !res.is_finite() {
            break;
        }
        if res < best.1 {
            best = (cur.clone(), res);
        }
    }
    let converged = best.1 <= cfg.tolerance_mu;
    Ok(Projection {
        point: best.0,
        residual: best.1,
        iterations: it,
        converged,
    })
}

const PLATEAU_REL: f64 = 1e-12;
const PLATEAU_STEPS: usize = 100;
const MAX_STEP: f64 = 10.0;

/// Descent on `||mu_R - tau||^2` along Hermitian complexified-gauge directions.
///
/// Each step is `x_a -> e^{s xi_h} x_a e^{-s xi_t}`, `y_a -> e^{s xi_t} y_a e^{-s xi_h}`
/// with `xi = -(mu_R - tau)`. Since `mu_C` is equivariant for the complex group
/// these steps keep `mu_C = 0`.
pub fn kempf_ness_flow(
    q: &Quiver,
    p: &PointRep,
    sp: &StabilityParams,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    if sp.len() != q.num_vertices() {
        return Err(Error::Dimension(format!(
            "tau has {} entries for {} vertices",
            sp.len(),
            q.num_vertices()
        )));
    }
    let conv = cfg.convention;
    let tau = &sp.tau;
    let mut cur = p.clone();
    let mut r = real_residual(q, &cur, tau, conv);
    let mut energy = vec![r * r];
    let mut step = cfg.step_size;
    let mut stalled = 0;
    let mut it = 0;
    let tol = cfg.tolerance_mu;

    let mut rc = frob(&moment_complex(q, &cur));
    while (r > tol || rc > tol) && it < cfg.max_iterations {
        it += 1;
        if rc > 10.0 * tol {
            let proj = project_complex(q, &cur, cfg)?;
            cur = proj.point;
            r = real_residual(q, &cur, tau, conv);
            rc = proj.residual;
            energy.push(r * r);
            if !proj.converged {
                break;
            }
            continue;
        }
        let mut xi = moment_real(q, &cur, conv);
        for (m, &t) in xi.iter_mut().zip(tau) {
            for i in 0..m.nrows() {
                m[(i, i)] -= Complex64::new(t, 0.0);
            }
            *m *= Complex64::new(-1.0, 0.0);
        }
        let e0 = r * r;
        let mut accepted = None;
        while step > 1e-300 {
            let s = Complex64::new(step, 0.0);
            let g: Vec<CMat> = xi.iter().map(|h| hermitian_exp(h, s)).collect();
            let gi: Vec<CMat> = xi.iter().map(|h| hermitian_exp(h, -s)).collect();
            let trial = act_general(q, &g, &gi, &cur)?;
            let rt = real_residual(q, &trial, tau, conv);
            if rt.is_finite() && rt * rt < e0 {
                accepted = Some((trial, rt));
                break;
            }
            step *= 0.5;
        }
        let Some((next, rn)) = accepted else { break };
        cur = next;
        r = rn;
        rc = frob(&moment_complex(q, &cur));
        energy.push(r * r);
        if e0 - r * r < PLATEAU_REL * e0 {
            stalled += 1;
            if stalled >= PLATEAU_STEPS {
                break;
            }
        } else {
            stalled = 0;
        }
        step = (step * 1.5).min(MAX_STEP);
    }

    let converged = r <= tol && rc <= tol;
    let orbit = orbit_rank(q, &cur, cfg.rank_tolerance)?.0;
    let algebra_dim: usize = cur.ranks().iter().map(|r| r * r).sum();
    Ok(SolveResult {
        point: cur,
        tau: tau.clone(),
        convention: conv,
        residual_real: r,
        residual_complex: rc,
        iterations: it,
        converged,
        stabilizer_dimension: algebra_dim - orbit,
        energy,
    })
}

/// Real basis of `prod_v u(r_v)`.
pub fn unitary_basis(ranks: &[usize]) -> Vec<LieElement> {
    let mut out = Vec::new();
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    for (v, &r) in ranks.iter().enumerate() {
        let mut push = |entries: &[(usize, usize, Complex64)]| {
            let mut blocks: Vec<CMat> = ranks.iter().map(|&s| CMat::zeros(s, s)).collect();
            for &(a, b, z) in entries {
                blocks[v][(a, b)] = z;
            }
            out.push(LieElement::from_matrices(blocks).unwrap());
        };
        for a in 0..r {
            push(&[(a, a, i)]);
            for b in a + 1..r {
                push(&[(a, b, one), (b, a, -one)]);
                push(&[(a, b, i), (b, a, i)]);
            }
        }
    }
    out
}

struct RankInfo {
    rank: usize,
    near_cutoff: bool,
}

fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo {
            rank: 0,
            near_cutoff: false,
        };
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return RankInfo {
            rank: 0,
            near_cutoff: false,
        };
    }
    let cut = tol * smax;
    RankInfo {
        rank: sv.iter().filter(|&&s| s >= cut).count(),
        near_cutoff: sv.iter().any(|&s| s > cut / 10.0 && s < cut * 10.0),
    }
}

fn orbit_rank(q: &Quiver, p: &PointRep, tol: f64) -> Result<(usize, bool)> {
    let cols = unitary_basis(p.ranks())
        .iter()
        .map(|th| infinitesimal_action(q, th, p).map(|v| v.to_real_vec()))
        .collect::<Result<Vec<_>>>()?;
    let n = p.real_dim();
    let m = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let info = numerical_rank(&m, tol);
    Ok((info.rank, info.near_cutoff))
}

fn split_real(ms: &[CMat]) -> Vec<f64> {
    flatten(ms).iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Real Jacobian of `p -> (mu_R(p) - tau, mu_C(p))`; one column per real coordinate.
pub fn real_jacobian(q: &Quiver, p: &PointRep, conv: Convention) -> Result<DMatrix<f64>> {
    let n = p.real_dim();
    let zero = p.with_real_vec(&vec![0.0; n]);
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![0.0; n];
    for k in 0..n {
        e[k] = 1.0;
        let d = moment_derivative(q, p, &zero.with_real_vec(&e), conv)?;
        e[k] = 0.0;
        let mut col = split_real(&d.real);
        col.extend(split_real(&d.complex));
        cols.push(col);
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(rows, n, |i, j| cols[j][i]))
}

/// Real dimension of the quotient near a converged solution.
pub fn tangent_dimension(
    s: &SolveResult,
    q: &Quiver,
    l: &Label,
    cfg: &SolverConfig,
) -> Result<TangentDimension> {
    cfg.validate()?;
    if !s.converged {
        return Err(Error::Precondition("solution did not converge".into()));
    }
    q.check_label(l)?;
    if s.point.ranks() != l.rank.as_slice() {
        return Err(Error::Dimension(
            "label ranks differ from the solution".into(),
        ));
    }
    let jac = real_jacobian(q, &s.point, s.convention)?;
    let j = numerical_rank(&jac, cfg.rank_tolerance);
    let nullity = s.point.real_dim() - j.rank;
    let (orbit, orbit_near) = orbit_rank(q, &s.point, cfg.rank_tolerance)?;
    let mut warnings = Vec::new();
    if j.near_cutoff {
        warnings.push("Jacobian singular values lie within a factor 10 of the cutoff".into());
    }
    if orbit_near {
        warnings.push("orbit singular values lie within a factor 10 of the cutoff".into());
    }
    if orbit > nullity {
        return Err(Error::Domain(format!(
            "orbit rank {orbit} exceeds kernel dimension {nullity}"
        )));
    }
    Ok(TangentDimension {
        dimension: nullity - orbit,
        nullity,
        orbit_rank: orbit,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(re: f64) -> CMat {
        CMat::from_element(1, 1, Complex64::new(re, 0.0))
    }

    fn a2(x: f64, y: f64) -> (Quiver, Label, PointRep) {
        let q = Quiver::a2();
        let l = Label::ranks(&[1, 1]);
        let p = PointRep::new(&q, &l, vec![scalar(x)], vec![scalar(y)]).unwrap();
        (q, l, p)
    }

    #[test]
    fn projection_keeps_solutions() {
        let (q, _, p) = a2(2.0, 0.0);
        let out = project_complex(&q, &p, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.point, p);
    }

    #[test]
    fn projection_reaches_xy_zero() {
        let (q, _, p) = a2(1.0, 1.0);
        let out = project_complex(&q, &p, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        let xy = (out.point.x[0][(0, 0)] * out.point.y[0][(0, 0)]).norm();
        assert!(xy < 1e-8, "{xy}");
    }

    #[test]
    fn jordan_projection_is_identity() {
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let p = PointRep::new(&q, &l, vec![scalar(1.0)], vec![scalar(1.0)]).unwrap();
        let out = project_complex(&q, &p, &SolverConfig::default()).unwrap();
        assert_eq!(out.point, p);
    }

    #[test]
    fn solved_point_needs_no_iterations() {
        // tail level 1, head level -1: x = 0, |y| = 1
        let (q, _, p) = a2(0.0, 1.0);
        let sp = StabilityParams::with_tau(vec![1.0, -1.0]).unwrap();
        let s = kempf_ness_flow(&q, &p, &sp, &SolverConfig::default()).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn head_positive_level_rescales_x() {
        let (q, l, p) = a2(2.0, 0.0);
        let sp = StabilityParams::with_tau(vec![-1.0, 1.0]).unwrap();
        let cfg = SolverConfig::default();
        let s = kempf_ness_flow(&q, &p, &sp, &cfg).unwrap();
        assert!(s.converged, "{s:?}");
        assert!((s.point.x[0][(0, 0)].norm_sqr() - 1.0).abs() < 1e-8);
        assert_eq!(tangent_dimension(&s, &q, &l, &cfg).unwrap().dimension, 0);
    }

    #[test]
    fn trace_obstruction_blocks_convergence() {
        let (q, _, p) = a2(2.0, 0.0);
        let sp = StabilityParams::with_tau(vec![1.0, 1.0]).unwrap();
        let s = kempf_ness_flow(&q, &p, &sp, &SolverConfig::default()).unwrap();
        assert!(!s.converged);
        assert!(s.energy.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn point_quiver_has_dimension_zero() {
        let q = Quiver::point();
        let l = Label::ranks(&[1]);
        let p = PointRep::zeros(&q, &l).unwrap();
        let cfg = SolverConfig::default();
        let s =
            kempf_ness_flow(&q, &p, &StabilityParams::with_tau(vec![0.0]).unwrap(), &cfg).unwrap();
        assert!(s.converged);
        assert_eq!(tangent_dimension(&s, &q, &l, &cfg).unwrap().dimension, 0);
    }

    #[test]
    fn jordan_rank_one_regression() {
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let p = PointRep::new(&q, &l, vec![scalar(0.5)], vec![scalar(-0.25)]).unwrap();
        let cfg = SolverConfig::default();
        let s =
            kempf_ness_flow(&q, &p, &StabilityParams::with_tau(vec![0.0]).unwrap(), &cfg).unwrap();
        let t = tangent_dimension(&s, &q, &l, &cfg).unwrap();
        // both moment maps vanish identically here
        assert_eq!((t.nullity, t.orbit_rank, t.dimension), (4, 0, 4));
    }

    #[test]
    fn unconverged_result_is_rejected() {
        let (q, l, p) = a2(2.0, 0.0);
        let cfg = SolverConfig::default();
        let s = kempf_ness_flow(
            &q,
            &p,
            &StabilityParams::with_tau(vec![1.0, 1.0]).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!(matches!(
            tangent_dimension(&s, &q, &l, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unitary_basis_has_r_squared_elements() {
        assert_eq!(unitary_basis(&[1, 2, 3]).len(), 14);
    }
}
