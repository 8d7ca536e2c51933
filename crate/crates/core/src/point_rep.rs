//! Representations of a double quiver over a point.
//!
//! A representation assigns to every base edge `a: t -> h` a pair of complex
//! matrices `x_a: C^{r_t} -> C^{r_h}` and `y_a: C^{r_h} -> C^{r_t}`. The unitary
//! gauge group `prod_v U(r_v)` acts by
//! `(x_a, y_a) -> (g_h x_a g_t^-1, g_t y_a g_h^-1)` and the action is Hamiltonian
//! for both symplectic forms below.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quiver::{Label, Quiver};

pub type CMat = DMatrix<Complex64>;

/// Sign convention for the real moment map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `sum_{h(a)=i} (x x* - y* y) - sum_{t(a)=i} (x* x - y y*)`.
    #[default]
    Commutator,
    /// Head and tail terms added with the same sign. Not a moment map on
    /// quivers with loops; kept for comparison.
    Literal,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Commutator => "commutator",
            Convention::Literal => "literal",
        }
    }
}

/// Point-level representation; also used for tangent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRep {
    ranks: Vec<usize>,
    pub x: Vec<CMat>,
    pub y: Vec<CMat>,
}

impl PointRep {
    pub fn new(q: &Quiver, l: &Label, x: Vec<CMat>, y: Vec<CMat>) -> Result<Self> {
        q.check_label(l)?;
        if x.len() != q.num_edges() || y.len() != q.num_edges() {
            return Err(Error::Dimension(format!(
                "expected {} edge matrices, got x: {}, y: {}",
                q.num_edges(),
                x.len(),
                y.len()
            )));
        }
        for (k, e) in q.edges().iter().enumerate() {
            let (rh, rt) = (l.rank[e.head], l.rank[e.tail]);
            if x[k].shape() != (rh, rt) {
                return Err(Error::Dimension(format!(
                    "x_{} has shape {:?}, expected ({rh}, {rt})",
                    e.id,
                    x[k].shape()
                )));
            }
            if y[k].shape() != (rt, rh) {
                return Err(Error::Dimension(format!(
                    "y_{} has shape {:?}, expected ({rt}, {rh})",
                    e.id,
                    y[k].shape()
                )));
            }
            if x[k].iter().chain(y[k].iter()).any(|z| !z.is_finite()) {
                return Err(Error::Domain(format!("non-finite entry on edge {}", e.id)));
            }
        }
        Ok(Self {
            ranks: l.rank.clone(),
            x,
            y,
        })
    }

    pub fn zeros(q: &Quiver, l: &Label) -> Result<Self> {
        q.check_label(l)?;
        let x = q
            .edges()
            .iter()
            .map(|e| CMat::zeros(l.rank[e.head], l.rank[e.tail]))
            .collect();
        let y = q
            .edges()
            .iter()
            .map(|e| CMat::zeros(l.rank[e.tail], l.rank[e.head]))
            .collect();
        Self::new(q, l, x, y)
    }

    /// Entries with real and imaginary parts uniform in `[-1, 1]`.
    pub fn random<R: Rng>(q: &Quiver, l: &Label, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(q, l)?;
        for m in p.x.iter_mut().chain(p.y.iter_mut()) {
            *m = random_matrix(m.nrows(), m.ncols(), rng);
        }
        Ok(p)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        let ok = self.ranks == other.ranks
            && self.x.len() == other.x.len()
            && self
                .x
                .iter()
                .zip(&other.x)
                .chain(self.y.iter().zip(&other.y))
                .all(|(a, b)| a.shape() == b.shape());
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("representation shapes differ".into()))
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.x.iter_mut().zip(&other.x) {
            *a += b * s;
        }
        for (a, b) in out.y.iter_mut().zip(&other.y) {
            *a += b * s;
        }
        Ok(out)
    }

    pub fn norm(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .map(|m| m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Real coordinates: for every edge, `x` then `y`, row-major, re/im interleaved.
    pub fn to_real_vec(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (x, y) in self.x.iter().zip(&self.y) {
            for m in [x, y] {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        out.push(m[(i, j)].re);
                        out.push(m[(i, j)].im);
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`PointRep::to_real_vec`] using `self` as the shape template.
    pub fn with_real_vec(&self, v: &[f64]) -> Self {
        let mut out = self.clone();
        let mut k = 0;
        for e in 0..out.x.len() {
            for m in [&mut out.x[e], &mut out.y[e]] {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        m[(i, j)] = Complex64::new(v[k], v[k + 1]);
                        k += 2;
                    }
                }
            }
        }
        out
    }

    pub fn real_dim(&self) -> usize {
        self.x.iter().chain(&self.y).map(|m| 2 * m.len()).sum()
    }
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// An element of `prod_v U(r_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElement(Vec<CMat>);

const UNITARY_TOL: f64 = 1e-12;

impl GaugeElement {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        for (v, g) in blocks.iter().enumerate() {
            if !g.is_square() {
                return Err(Error::Dimension(format!("gauge block {v} is not square")));
            }
            let err = (g.adjoint() * g - CMat::identity(g.nrows(), g.nrows())).norm();
            if err > UNITARY_TOL {
                return Err(Error::Domain(format!(
                    "gauge block {v} is not unitary (defect {err:e})"
                )));
            }
        }
        Ok(Self(blocks))
    }

    pub fn identity(ranks: &[usize]) -> Self {
        Self(ranks.iter().map(|&r| CMat::identity(r, r)).collect())
    }

    /// Haar-ish random unitary blocks via QR with phase correction.
    pub fn random<R: Rng>(ranks: &[usize], rng: &mut R) -> Self {
        let blocks = ranks
            .iter()
            .map(|&r| {
                let qr = random_matrix(r, r, rng).qr();
                let (q, rr) = (qr.q(), qr.r());
                let phases =
                    CMat::from_diagonal(&rr.diagonal().map(|d| d / Complex64::from(d.norm())));
                q * phases
            })
            .collect();
        Self(blocks)
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.0
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.0.len() != other.0.len() {
            return Err(Error::Dimension(
                "gauge elements on different quivers".into(),
            ));
        }
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect(),
        ))
    }
}

/// An element of the Lie algebra `prod_v u(r_v)`: skew-Hermitian blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement(Vec<CMat>);

impl LieElement {
    /// Keeps the skew-Hermitian part `(m - m*) / 2` of each block.
    pub fn from_matrices(blocks: Vec<CMat>) -> Result<Self> {
        if blocks.iter().any(|m| !m.is_square()) {
            return Err(Error::Dimension("Lie algebra blocks must be square".into()));
        }
        Ok(Self(
            blocks
                .into_iter()
                .map(|m| (&m - m.adjoint()) * Complex64::new(0.5, 0.0))
                .collect(),
        ))
    }

    pub fn zero(ranks: &[usize]) -> Self {
        Self(ranks.iter().map(|&r| CMat::zeros(r, r)).collect())
    }

    pub fn random<R: Rng>(ranks: &[usize], rng: &mut R) -> Self {
        Self::from_matrices(ranks.iter().map(|&r| random_matrix(r, r, rng)).collect()).unwrap()
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.0
    }

    /// `exp(t * theta)`, computed through the Hermitian matrix `-i theta`.
    pub fn exp(&self, t: f64) -> GaugeElement {
        let i = Complex64::i();
        GaugeElement(
            self.0
                .iter()
                .map(|th| hermitian_exp(&(th * (-i)), Complex64::new(0.0, t)))
                .collect(),
        )
    }
}

/// `exp(s * h)` for Hermitian `h` and complex scalar `s`.
pub fn hermitian_exp(h: &CMat, s: Complex64) -> CMat {
    let n = h.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let u = eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| (s * l).exp()));
    &u * d * u.adjoint()
}

fn check_blocks(q: &Quiver, p: &PointRep, blocks: &[CMat]) -> Result<()> {
    if blocks.len() != q.num_vertices() || p.ranks.len() != q.num_vertices() {
        return Err(Error::Dimension("vertex count mismatch".into()));
    }
    for (v, (b, &r)) in blocks.iter().zip(&p.ranks).enumerate() {
        if b.shape() != (r, r) {
            return Err(Error::Dimension(format!(
                "block at vertex {v} has shape {:?}, expected ({r}, {r})",
                b.shape()
            )));
        }
    }
    Ok(())
}

/// Action of arbitrary invertible blocks `g` with inverses `g_inv`.
pub fn act_general(q: &Quiver, g: &[CMat], g_inv: &[CMat], p: &PointRep) -> Result<PointRep> {
    check_blocks(q, p, g)?;
    check_blocks(q, p, g_inv)?;
    let mut out = p.clone();
    for (k, e) in q.edges().iter().enumerate() {
        out.x[k] = &g[e.head] * &p.x[k] * &g_inv[e.tail];
        out.y[k] = &g[e.tail] * &p.y[k] * &g_inv[e.head];
    }
    Ok(out)
}

pub fn act(q: &Quiver, g: &GaugeElement, p: &PointRep) -> Result<PointRep> {
    let inv: Vec<CMat> = g.0.iter().map(|m| m.adjoint()).collect();
    act_general(q, &g.0, &inv, p)
}

/// The fundamental vector field `theta^#` at `p`.
pub fn infinitesimal_action(q: &Quiver, theta: &LieElement, p: &PointRep) -> Result<PointRep> {
    infinitesimal_action_general(q, &theta.0, p)
}

/// Same as [`infinitesimal_action`] for arbitrary (not necessarily skew) blocks.
pub fn infinitesimal_action_general(q: &Quiver, xi: &[CMat], p: &PointRep) -> Result<PointRep> {
    check_blocks(q, p, xi)?;
    let mut out = p.clone();
    for (k, e) in q.edges().iter().enumerate() {
        out.x[k] = &xi[e.head] * &p.x[k] - &p.x[k] * &xi[e.tail];
        out.y[k] = &xi[e.tail] * &p.y[k] - &p.y[k] * &xi[e.head];
    }
    Ok(out)
}

/// Real symplectic form `2 Im sum_a tr(u_x v_x^* + u_y v_y^*)`.
///
/// The factor 2 is chosen so that `i * omega_real(theta^#, v) = d f(v)` holds
/// exactly with `f = sum_i tr(theta_i mu_R,i)`.
pub fn omega_real(p: &PointRep, u: &PointRep, v: &PointRep) -> Result<f64> {
    p.same_shape(u)?;
    p.same_shape(v)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..p.x.len() {
        acc += (&u.x[k] * v.x[k].adjoint()).trace();
        acc += (&u.y[k] * v.y[k].adjoint()).trace();
    }
    Ok(2.0 * acc.im)
}

/// Complex symplectic form `sum_a tr(u_x v_y - v_x u_y)`.
pub fn omega_complex(p: &PointRep, u: &PointRep, v: &PointRep) -> Result<Complex64> {
    p.same_shape(u)?;
    p.same_shape(v)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..p.x.len() {
        acc += (&u.x[k] * &v.y[k]).trace() - (&v.x[k] * &u.y[k]).trace();
    }
    Ok(acc)
}

/// Per-vertex weights `sigma_v > 0` and real moment levels `tau_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
}

impl StabilityParams {
    pub fn new(sigma: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        if sigma.len() != tau.len() {
            return Err(Error::Dimension(format!(
                "sigma has {} entries, tau has {}",
                sigma.len(),
                tau.len()
            )));
        }
        if let Some(s) = sigma.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {s}")));
        }
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("tau must be finite".into()));
        }
        Ok(Self { sigma, tau })
    }

    pub fn with_tau(tau: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0; tau.len()], tau)
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub real: Vec<CMat>,
    pub complex: Vec<CMat>,
}

pub fn moment_real(q: &Quiver, p: &PointRep, conv: Convention) -> Vec<CMat> {
    let mut mu: Vec<CMat> = p.ranks.iter().map(|&r| CMat::zeros(r, r)).collect();
    let tail_sign = match conv {
        Convention::Commutator => -1.0,
        Convention::Literal => 1.0,
    };
    for (k, e) in q.edges().iter().enumerate() {
        let (x, y) = (&p.x[k], &p.y[k]);
        mu[e.head] += x * x.adjoint() - y.adjoint() * y;
        mu[e.tail] += (x.adjoint() * x - y * y.adjoint()) * Complex64::new(tail_sign, 0.0);
    }
    mu
}

pub fn moment_complex(q: &Quiver, p: &PointRep) -> Vec<CMat> {
    let mut mu: Vec<CMat> = p.ranks.iter().map(|&r| CMat::zeros(r, r)).collect();
    for (k, e) in q.edges().iter().enumerate() {
        mu[e.head] += &p.x[k] * &p.y[k];
        mu[e.tail] -= &p.y[k] * &p.x[k];
    }
    mu
}

pub fn moment(q: &Quiver, p: &PointRep, conv: Convention) -> MomentValue {
    MomentValue {
        real: moment_real(q, p, conv),
        complex: moment_complex(q, p),
    }
}

/// Directional derivative of both moment maps at `p` along `v`.
pub fn moment_derivative(
    q: &Quiver,
    p: &PointRep,
    v: &PointRep,
    conv: Convention,
) -> Result<MomentValue> {
    p.same_shape(v)?;
    let mut re: Vec<CMat> = p.ranks.iter().map(|&r| CMat::zeros(r, r)).collect();
    let mut co = re.clone();
    let tail_sign = match conv {
        Convention::Commutator => -1.0,
        Convention::Literal => 1.0,
    };
    for (k, e) in q.edges().iter().enumerate() {
        let (x, y, dx, dy) = (&p.x[k], &p.y[k], &v.x[k], &v.y[k]);
        re[e.head] += dx * x.adjoint() + x * dx.adjoint() - dy.adjoint() * y - y.adjoint() * dy;
        re[e.tail] += (dx.adjoint() * x + x.adjoint() * dx - dy * y.adjoint() - y * dy.adjoint())
            * Complex64::new(tail_sign, 0.0);
        co[e.head] += dx * y + x * dy;
        co[e.tail] -= dy * x + y * dx;
    }
    Ok(MomentValue {
        real: re,
        complex: co,
    })
}

/// Which half of the hyperkähler-style pair to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentPart {
    Real,
    Complex,
}

fn pairing(theta: &LieElement, mu: &[CMat]) -> Complex64 {
    theta.0.iter().zip(mu).map(|(t, m)| (t * m).trace()).sum()
}

/// `|omega(theta^#(p), v) - (f(p + h v) - f(p - h v)) / 2h|` with
/// `f = sum_i tr(theta_i mu_i)`.
///
/// For the real part `f` is purely imaginary, so the form is compared as
/// `i * omega_real`.
pub fn hamiltonian_residual(
    q: &Quiver,
    p: &PointRep,
    theta: &LieElement,
    v: &PointRep,
    h: f64,
    part: MomentPart,
    conv: Convention,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(
            "finite-difference step must be positive".into(),
        ));
    }
    let field = infinitesimal_action(q, theta, p)?;
    let plus = p.axpy(Complex64::new(h, 0.0), v)?;
    let minus = p.axpy(Complex64::new(-h, 0.0), v)?;
    let (form, df) = match part {
        MomentPart::Real => {
            let w = Complex64::new(0.0, omega_real(p, &field, v)?);
            let fp = pairing(theta, &moment_real(q, &plus, conv));
            let fm = pairing(theta, &moment_real(q, &minus, conv));
            (w, (fp - fm) / (2.0 * h))
        }
        MomentPart::Complex => {
            let w = omega_complex(p, &field, v)?;
            let fp = pairing(theta, &moment_complex(q, &plus));
            let fm = pairing(theta, &moment_complex(q, &minus));
            (w, (fp - fm) / (2.0 * h))
        }
    };
    Ok((form - df).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(z: Complex64) -> CMat {
        CMat::from_element(1, 1, z)
    }

    #[test]
    fn shape_errors() {
        let q = Quiver::a2();
        let l = Label::ranks(&[1, 2]);
        let bad = PointRep::new(&q, &l, vec![CMat::zeros(1, 2)], vec![CMat::zeros(1, 2)]);
        assert!(matches!(bad, Err(Error::Dimension(_))));
        let nan = PointRep::new(
            &q,
            &l,
            vec![CMat::from_element(2, 1, c(f64::NAN))],
            vec![CMat::zeros(1, 2)],
        );
        assert!(nan.is_err());
    }

    #[test]
    fn identity_and_scalar_gauge_fix_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        assert_eq!(act(&q, &GaugeElement::identity(&[1]), &p).unwrap(), p);
        let g = GaugeElement::new(vec![scalar(Complex64::from_polar(1.0, 0.7))]).unwrap();
        let gp = act(&q, &g, &p).unwrap();
        assert!(gp.axpy(c(-1.0), &p).unwrap().norm() < 1e-14);
    }

    #[test]
    fn action_is_a_left_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = Quiver::a2();
        let l = Label::ranks(&[1, 2]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let g = GaugeElement::random(&l.rank, &mut rng);
        let h = GaugeElement::random(&l.rank, &mut rng);
        let lhs = act(&q, &g, &act(&q, &h, &p).unwrap()).unwrap();
        let rhs = act(&q, &g.compose(&h).unwrap(), &p).unwrap();
        assert!(lhs.axpy(c(-1.0), &rhs).unwrap().norm() < 1e-12);
    }

    #[test]
    fn non_unitary_gauge_rejected() {
        assert!(GaugeElement::new(vec![scalar(c(2.0))]).is_err());
    }

    #[test]
    fn jordan_omega_complex_closed_form() {
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let mk = |x: Complex64, y: Complex64| {
            PointRep::new(&q, &l, vec![scalar(x)], vec![scalar(y)]).unwrap()
        };
        let (a, b) = (Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        let (a2, b2) = (Complex64::new(-0.7, 0.2), Complex64::new(0.1, 1.5));
        let p = mk(c(0.0), c(0.0));
        let w = omega_complex(&p, &mk(a, b), &mk(a2, b2)).unwrap();
        assert!((w - (a * b2 - a2 * b)).norm() < 1e-15);
    }

    #[test]
    fn forms_are_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = Quiver::star(3);
        let l = Label::ranks(&[2, 1, 2, 3]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let u = PointRep::random(&q, &l, &mut rng).unwrap();
        let v = PointRep::random(&q, &l, &mut rng).unwrap();
        assert!(omega_real(&p, &u, &u).unwrap().abs() < 1e-12);
        assert!(omega_complex(&p, &u, &u).unwrap().norm() < 1e-12);
        let r = omega_real(&p, &u, &v).unwrap() + omega_real(&p, &v, &u).unwrap();
        assert!(r.abs() < 1e-12);
        let z = omega_complex(&p, &u, &v).unwrap() + omega_complex(&p, &v, &u).unwrap();
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn moment_examples() {
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let p0 = PointRep::zeros(&q, &l).unwrap();
        assert!(moment_real(&q, &p0, Convention::Commutator)[0].norm() == 0.0);
        assert!(moment_complex(&q, &p0)[0].norm() == 0.0);

        let p = PointRep::new(
            &q,
            &l,
            vec![scalar(Complex64::new(1.2, 0.4))],
            vec![scalar(Complex64::new(-0.3, 2.0))],
        )
        .unwrap();
        assert!(moment_real(&q, &p, Convention::Commutator)[0].norm() < 1e-15);
        assert!(moment_complex(&q, &p)[0].norm() < 1e-15);

        let q = Quiver::a2();
        let l = Label::ranks(&[1, 1]);
        let p = PointRep::new(&q, &l, vec![scalar(c(1.0))], vec![scalar(c(0.0))]).unwrap();
        let mu = moment_real(&q, &p, Convention::Commutator);
        // vertex "1" is the tail, "2" the head
        assert_eq!(mu[1][(0, 0)], c(1.0));
        assert_eq!(mu[0][(0, 0)], c(-1.0));
    }

    #[test]
    fn complex_moment_is_traceless_overall() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for q in [Quiver::jordan(), Quiver::a2(), Quiver::star(3)] {
            let l = Label::ranks(&vec![2; q.num_vertices()]);
            let p = PointRep::random(&q, &l, &mut rng).unwrap();
            let t: Complex64 = moment_complex(&q, &p).iter().map(|m| m.trace()).sum();
            assert!(t.norm() < 1e-12);
        }
    }

    #[test]
    fn infinitesimal_action_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let z = infinitesimal_action(&q, &LieElement::zero(&[1]), &p).unwrap();
        assert_eq!(z.norm(), 0.0);
        let th = LieElement::from_matrices(vec![scalar(Complex64::new(0.0, 0.8))]).unwrap();
        assert!(infinitesimal_action(&q, &th, &p).unwrap().norm() < 1e-15);
    }

    #[test]
    fn infinitesimal_action_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = Quiver::a2();
        let l = Label::ranks(&[1, 2]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let th = LieElement::random(&l.rank, &mut rng);
        let t = 1e-5;
        let moved = act(&q, &th.exp(t), &p).unwrap();
        let fd = moved.axpy(c(-1.0), &p).unwrap();
        let field = infinitesimal_action(&q, &th, &p).unwrap();
        let resid = fd.axpy(c(-t), &field).unwrap().norm() / t;
        assert!(resid < 1e-4, "residual {resid}");
    }

    #[test]
    fn zero_theta_has_zero_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = Quiver::jordan();
        let l = Label::ranks(&[2]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let v = PointRep::random(&q, &l, &mut rng).unwrap();
        let r = hamiltonian_residual(
            &q,
            &p,
            &LieElement::zero(&[2]),
            &v,
            1e-5,
            MomentPart::Real,
            Convention::Commutator,
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn literal_convention_breaks_on_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = Quiver::jordan();
        let l = Label::ranks(&[1]);
        let p = PointRep::random(&q, &l, &mut rng).unwrap();
        let v = PointRep::random(&q, &l, &mut rng).unwrap();
        let th = LieElement::from_matrices(vec![scalar(Complex64::new(0.0, 1.0))]).unwrap();
        let good = hamiltonian_residual(
            &q,
            &p,
            &th,
            &v,
            1e-5,
            MomentPart::Real,
            Convention::Commutator,
        )
        .unwrap();
        let bad =
            hamiltonian_residual(&q, &p, &th, &v, 1e-5, MomentPart::Real, Convention::Literal)
                .unwrap();
        assert!(good < 1e-6);
        assert!(bad > 1e-3);
    }

    #[test]
    fn hermitian_exp_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_matrix(3, 3, &mut rng);
        let h = &m + m.adjoint();
        let e = hermitian_exp(&h, c(1.0));
        let ei = hermitian_exp(&h, c(-1.0));
        assert!((e * ei - CMat::identity(3, 3)).norm() < 1e-10);
    }
}
