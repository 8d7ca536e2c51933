//! Exact arithmetic: Gaussian rationals, polynomials in one variable over them,
//! rational functions, and Gaussian elimination over any of these fields.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type Cq = Complex<BigRational>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn cq(re: i64, im: i64) -> Cq {
    Cq::new(q(re), q(im))
}

pub fn cq_real(r: Q) -> Cq {
    Cq::new(r, Q::zero())
}

/// Exact rational value of a finite float.
pub fn q_from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_cq(z: &Cq) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => fmt_q(&z.re),
        (true, false) => format!("{}i", fmt_q(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { "-" } else { "+" };
            format!("{}{}{}i", fmt_q(&z.re), sign, fmt_q(&z.im.abs()))
        }
    }
}

/// Parses `p`, `p/q`, or a decimal literal into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Q::from_integer(n));
    }
    let x: f64 = s.parse().ok()?;
    if !x.is_finite() {
        return None;
    }
    // decimal literals are read as written, not as their binary float
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().all(|c| c.is_ascii_digit()) && !int.contains(['e', 'E']) {
        let digits = format!("{int}{frac}");
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Q::new(n, d));
    }
    q_from_f64(x)
}

fn sqrt_int(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Non-negative rational square root, when it exists.
pub fn sqrt_q(x: &Q) -> Option<Q> {
    Some(Q::new(sqrt_int(x.numer())?, sqrt_int(x.denom())?))
}

/// A Gaussian-rational square root, when one exists.
pub fn sqrt_cq(z: &Cq) -> Option<Cq> {
    if z.im.is_zero() {
        return if z.re.is_negative() {
            Some(Cq::new(Q::zero(), sqrt_q(&-z.re.clone())?))
        } else {
            Some(Cq::new(sqrt_q(&z.re)?, Q::zero()))
        };
    }
    let n = sqrt_q(&(&z.re * &z.re + &z.im * &z.im))?;
    let two = q(2);
    let u = sqrt_q(&((&z.re + &n) / &two))?;
    if u.is_zero() {
        return None;
    }
    let v = &z.im / (&two * &u);
    let r = Cq::new(u, v);
    (&r * &r == *z).then_some(r)
}

/// Operations needed by [`rref`] and friends.
pub trait Field:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Field for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<F: Field>(m: &mut [Vec<F>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = F::one() / m[row][col].clone();
        for c in col..ncols {
            m[row][c] = m[row][c].clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..ncols {
                    let t = m[row][c].clone() * f.clone();
                    m[r][c] = m[r][c].clone() - t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank<F: Field>(rows: &[Vec<F>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{v : M v = 0}`.
pub fn nullspace<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); ncols];
            v[f] = F::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Polynomial in `z` with Gaussian-rational coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Cq>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(k, a)| {
                let a = fmt_cq(a);
                match k {
                    0 => a,
                    1 => format!("({a})z"),
                    _ => format!("({a})z^{k}"),
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn new(mut c: Vec<Cq>) -> Self {
        while c.last().is_some_and(|a| a.is_zero()) {
            c.pop();
        }
        Self { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&a| cq(a, 0)).collect())
    }

    pub fn zero() -> Self {
        Self { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(cq(1, 0))
    }

    pub fn constant(a: Cq) -> Self {
        Self::new(vec![a])
    }

    pub fn monomial(k: usize, a: Cq) -> Self {
        let mut c = vec![Cq::zero(); k + 1];
        c[k] = a;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Cq] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Cq {
        self.c.get(k).cloned().unwrap_or_else(Cq::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn leading(&self) -> Cq {
        self.c.last().cloned().unwrap_or_else(Cq::zero)
    }

    pub fn scale(&self, a: &Cq) -> Self {
        Self::new(self.c.iter().map(|x| x * a).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = Cq::one() / self.leading();
        self.scale(&inv)
    }

    pub fn eval(&self, z: &Cq) -> Cq {
        self.c
            .iter()
            .rev()
            .fold(Cq::zero(), |acc, a| acc * z.clone() + a.clone())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        let lead_inv = Cq::one() / d.leading();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quo = vec![Cq::zero(); r.len() - dd];
        for k in (0..quo.len()).rev() {
            let f = &r[k + dd] * &lead_inv;
            if !f.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[k + j] = &r[k + j] - &(&f * b);
                }
            }
            quo[k] = f;
        }
        r.truncate(dd);
        (Self::new(quo), Self::new(r))
    }

    /// Monic greatest common divisor (zero only if both are zero).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Exact square root when `self` is a perfect square.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let n = self.c.len() - 1;
        if n % 2 == 1 {
            return None;
        }
        let m = n / 2;
        let mut s = vec![Cq::zero(); m + 1];
        s[m] = sqrt_cq(&self.leading())?;
        let two_lead = &s[m] * cq(2, 0);
        for k in (0..m).rev() {
            let mut acc = self.c[m + k].clone();
            for i in k + 1..=m {
                let j = m + k - i;
                if j > k && j <= m {
                    acc -= &s[i] * &s[j];
                }
            }
            s[k] = acc / two_lead.clone();
        }
        let r = Self::new(s);
        (&r * &r == *self).then_some(r)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Cq::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.c.iter().map(|a| -a.clone()).collect())
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

owned_ops!(Poly);

/// Element of `Q(i)(z)`, kept reduced with a monic denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::from_poly(Poly::zero());
        }
        let g = Poly::gcd(&num, &den);
        let (n, _) = num.divrem(&g);
        let (d, _) = den.divrem(&g);
        let l = Cq::one() / d.leading();
        Self {
            num: n.scale(&l),
            den: d.scale(&l),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }
}

impl Add for RatFn {
    type Output = RatFn;
    fn add(self, o: RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(&self.num + &o.num, self.den);
        }
        RatFn::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Sub for RatFn {
    type Output = RatFn;
    fn sub(self, o: RatFn) -> RatFn {
        self + (-o)
    }
}

impl Mul for RatFn {
    type Output = RatFn;
    fn mul(self, o: RatFn) -> RatFn {
        RatFn::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Div for RatFn {
    type Output = RatFn;
    fn div(self, o: RatFn) -> RatFn {
        RatFn::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den,
        }
    }
}

impl Zero for RatFn {
    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFn {
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
}

/// Dense matrix of polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Poly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Poly::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_constants(rows: usize, cols: usize, vals: &[Cq]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| {
            Poly::constant(vals[i * cols + j].clone())
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.data[i * self.cols + j] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Poly)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, p)| (k / self.cols, k % self.cols, p))
    }

    pub fn column(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Poly>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn scale(&self, a: &Cq) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|p| p.scale(a)).collect(),
        }
    }

    /// Matrix of the `k`-th coefficients.
    pub fn coeff_matrix(&self, k: usize) -> Vec<Vec<Cq>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).coeff(k)).collect())
            .collect()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.data.iter().filter_map(Poly::degree).max()
    }

    pub fn to_ratfn(&self) -> Vec<Vec<RatFn>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| RatFn::from_poly(self.get(i, j).clone()))
                    .collect()
            })
            .collect()
    }

    /// Rank over the field of rational functions.
    pub fn rank(&self) -> usize {
        rank(&self.to_ratfn(), self.cols)
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        Self::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(Poly::zero(), |acc, k| {
                &acc + &(self.get(i, k) * o.get(k, j))
            })
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape());
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape());
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn trace(&self) -> Poly {
        (0..self.rows.min(self.cols)).fold(Poly::zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn det2(&self) -> Poly {
        assert_eq!(self.shape(), (2, 2));
        &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0))
    }
}

/// Divides out the content and scales so the first nonzero entry is monic.
pub fn primitive(v: &[Poly]) -> Option<Vec<Poly>> {
    let g = v.iter().fold(Poly::zero(), |g, p| Poly::gcd(&g, p));
    if g.is_zero() {
        return None;
    }
    let w: Vec<Poly> = v.iter().map(|p| p.divrem(&g).0).collect();
    let lead = w.iter().find(|p| !p.is_zero())?.leading();
    let inv = Cq::one() / lead;
    Some(w.iter().map(|p| p.scale(&inv)).collect())
}

/// Clears denominators of a rational-function vector and makes it primitive.
pub fn primitive_from_ratfn(v: &[RatFn]) -> Option<Vec<Poly>> {
    let mut l = Poly::one();
    for r in v {
        let g = Poly::gcd(&l, r.den());
        l = (&l * r.den()).divrem(&g).0;
    }
    let polys: Vec<Poly> = v.iter().map(|r| (&r.num * &l).divrem(r.den()).0).collect();
    primitive(&polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_q("3/6"), Some(qf(1, 2)));
        assert_eq!(parse_q("-0.25"), Some(qf(-1, 4)));
        assert_eq!(parse_q("7"), Some(q(7)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(fmt_q(&qf(-4, 6)), "-2/3");
        assert_eq!(fmt_cq(&cq(1, -2)), "1-2i");
    }

    #[test]
    fn gaussian_square_roots() {
        assert_eq!(sqrt_cq(&cq(-4, 0)), Some(cq(0, 2)));
        let r = sqrt_cq(&cq(3, 4)).unwrap();
        assert_eq!(&r * &r, cq(3, 4));
        assert_eq!(sqrt_cq(&cq(2, 0)), None);
    }

    #[test]
    fn poly_division_and_gcd() {
        let a = Poly::from_ints(&[-1, 0, 1]);
        let b = Poly::from_ints(&[1, 1]);
        let (quo, r) = a.divrem(&b);
        assert_eq!(quo, Poly::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        let g = Poly::gcd(&a, &Poly::from_ints(&[-1, 1]));
        assert_eq!(g, Poly::from_ints(&[-1, 1]));
    }

    #[test]
    fn poly_sqrt_roundtrip() {
        let s = Poly::new(vec![cq(1, 1), cq(-2, 0), cq(0, 3)]);
        assert_eq!((&s * &s).sqrt().map(|r| &r * &r), Some(&s * &s));
        assert_eq!(Poly::from_ints(&[1, 0, 0, 1]).sqrt(), None);
    }

    #[test]
    fn nullspace_over_rational_functions() {
        let z = Poly::from_ints(&[0, 1]);
        let m = PolyMatrix::from_fn(1, 2, |_, j| if j == 0 { z.clone() } else { Poly::one() });
        let ns = nullspace(&m.to_ratfn(), 2);
        assert_eq!(ns.len(), 1);
        let v = primitive_from_ratfn(&ns[0]).unwrap();
        assert_eq!(v, vec![Poly::one(), -&z]);
    }

    #[test]
    fn rank_of_constant_matrix() {
        let rows = vec![vec![cq(1, 0), cq(2, 0)], vec![cq(2, 0), cq(4, 0)]];
        assert_eq!(rank(&rows, 2), 1);
        assert_eq!(nullspace(&rows, 2).len(), 1);
    }
}
