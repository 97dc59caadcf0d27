//! Hydrogen radial integrals `∫ R_a(r) r^k F_b(r) r^2 dr` with
//! `F_b = R_b` or `dR_b/dr`.
//!
//! The fast path substitutes x = r (1/n_a + 1/n_b), which turns the
//! integrand into a polynomial times e^{-x}; a Gauss-Laguerre rule of
//! sufficient order is then exact up to rounding. Every factor is carried
//! as a logarithm with a separate sign. The exact path expands both radial
//! functions in rational arithmetic.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::basis::ln_factorial;
use crate::laguerre::{laguerre_pair, GaussLaguerre};
use crate::sum::NeumaierSum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RadialKind {
    /// `R_b` on the right.
    Plain,
    /// `dR_b/dr` on the right.
    Derivative,
}

impl RadialKind {
    pub fn code(self) -> i32 {
        match self {
            RadialKind::Plain => 0,
            RadialKind::Derivative => 1,
        }
    }

    pub fn from_code(c: i32) -> Option<Self> {
        match c {
            0 => Some(RadialKind::Plain),
            1 => Some(RadialKind::Derivative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RadialIntegralKey {
    pub n: u32,
    pub l: u32,
    pub n_prime: u32,
    pub l_prime: u32,
    pub power: i32,
    pub kind: RadialKind,
}

impl RadialIntegralKey {
    pub fn plain(n: u32, l: u32, n_prime: u32, l_prime: u32, power: i32) -> Self {
        Self { n, l, n_prime, l_prime, power, kind: RadialKind::Plain }
    }

    pub fn derivative(n: u32, l: u32, n_prime: u32, l_prime: u32, power: i32) -> Self {
        Self { n, l, n_prime, l_prime, power, kind: RadialKind::Derivative }
    }

    /// Plain integrals are symmetric; order the pair so both orders share
    /// one cache entry.
    pub fn canonical(self) -> Self {
        if self.kind == RadialKind::Plain && (self.n_prime, self.l_prime) < (self.n, self.l) {
            Self { n: self.n_prime, l: self.l_prime, n_prime: self.n, l_prime: self.l, ..self }
        } else {
            self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n_prime == 0 || self.l >= self.n || self.l_prime >= self.n_prime {
            return Err(Error::Domain(format!("invalid radial labels {self:?}")));
        }
        if !(-2..=2).contains(&self.power) {
            return Err(Error::Domain(format!("radial power {} outside [-2, 2]", self.power)));
        }
        let right = match self.kind {
            RadialKind::Plain => self.l_prime as i32,
            RadialKind::Derivative => (self.l_prime as i32 - 1).max(0),
        };
        if self.power + 2 + self.l as i32 + right < 0 {
            return Err(Error::Domain(format!("radial integral {self:?} diverges at the origin")));
        }
        Ok(())
    }
}

fn ln_norm(n: u32, l: u32) -> f64 {
    let nf = n as f64;
    1.5 * (2.0 / nf).ln()
        + 0.5 * (ln_factorial((n - l - 1) as usize) - (2.0 * nf).ln() - ln_factorial((n + l) as usize))
}

/// `(ln|R e^{r/n}|, sign)` at radius r.
fn ln_radial(n: u32, l: u32, r: f64) -> (f64, f64) {
    let rho = 2.0 * r / n as f64;
    let (lk, _, s) = laguerre_pair((n - l - 1) as usize, (2 * l + 1) as f64, rho);
    (ln_norm(n, l) + l as f64 * rho.ln() + lk.abs().ln() + s, lk.signum())
}

/// `(ln|R' e^{r/n}|, sign)` at radius r.
fn ln_radial_derivative(n: u32, l: u32, r: f64) -> (f64, f64) {
    let nf = n as f64;
    let rho = 2.0 * r / nf;
    let k = (n - l - 1) as usize;
    let alpha = (2 * l + 1) as f64;
    let (lk, lkm1, s) = laguerre_pair(k, alpha, rho);
    let bracket = (l as f64 + k as f64 - 0.5 * rho) * lk - (k as f64 + alpha) * lkm1;
    (
        ln_norm(n, l) + (2.0 / nf).ln() + (l as f64 - 1.0) * rho.ln() + bracket.abs().ln() + s,
        bracket.signum(),
    )
}

/// Gauss-Laguerre order that integrates the key's polynomial exactly,
/// plus a safety margin.
pub fn node_count(key: &RadialIntegralKey) -> usize {
    let degree = (key.n + key.n_prime) as i32 + key.power.max(0);
    bucket(((degree + 2) / 2) as usize + 16)
}

/// Rounds an order up to a coarse grid (steps of about 1/8) so that few
/// distinct rules are ever built; extra nodes keep the rule exact.
fn bucket(order: usize) -> usize {
    let step = (order / 8).max(8).next_multiple_of(8);
    order.next_multiple_of(step)
}

/// Value together with the sum of absolute quadrature terms, which sets
/// the scale of the rounding error.
pub fn radial_integral_quadrature(key: &RadialIntegralKey) -> Result<(f64, f64)> {
    key.validate()?;
    let rule = GaussLaguerre::cached(node_count(key));
    let s = 1.0 / key.n as f64 + 1.0 / key.n_prime as f64;
    let k = key.power as f64;
    let mut acc = NeumaierSum::new();
    let mut abs_acc = NeumaierSum::new();
    for (x, lw) in rule.nodes.iter().zip(&rule.log_weights) {
        let r = x / s;
        let (la, sa) = ln_radial(key.n, key.l, r);
        let (lb, sb) = match key.kind {
            RadialKind::Plain => ln_radial(key.n_prime, key.l_prime, r),
            RadialKind::Derivative => ln_radial_derivative(key.n_prime, key.l_prime, r),
        };
        let ln_term = lw + la + lb + (k + 2.0) * r.ln() - s.ln();
        let term = ln_term.exp();
        if term.is_nan() || term.is_infinite() {
            return Err(Error::Numeric(format!(
                "radial term overflow for {key:?} at x={x}: ln|term|={ln_term}"
            )));
        }
        acc.add(sa * sb * term);
        abs_acc.add(term);
    }
    Ok((acc.value(), abs_acc.value()))
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binomial(n: u32, k: u32) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn rational_pow(base: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * base)
}

/// `R e^{r/n} / N` as rational coefficients of r^p, p = 0..n-1.
fn rational_radial_poly(n: u32, l: u32) -> Vec<BigRational> {
    let k = n - l - 1;
    let alpha = 2 * l + 1;
    let two_over_n = BigRational::new(BigInt::from(2), BigInt::from(n));
    let mut poly = vec![BigRational::zero(); n as usize];
    for i in 0..=k {
        let c = BigRational::new(binomial(k + alpha, k - i), factorial(i));
        let c = if i % 2 == 1 { -c } else { c };
        poly[(l + i) as usize] = c * rational_pow(&two_over_n, l + i);
    }
    poly
}

/// `d/dr (P(r) e^{-r/n}) e^{r/n} = P' - P/n`.
fn rational_derivative(poly: &[BigRational], n: u32) -> Vec<BigRational> {
    let inv_n = BigRational::new(BigInt::one(), BigInt::from(n));
    let mut out: Vec<BigRational> = poly.iter().map(|c| -(c * &inv_n)).collect();
    for p in 1..poly.len() {
        out[p - 1] += &poly[p] * BigRational::from_integer(BigInt::from(p));
    }
    out
}

fn ln_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().expect("bounded bigint").ln();
    }
    let shift = bits - 900;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().expect("bounded bigint").ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_abs_rational(x: &BigRational) -> f64 {
    ln_abs_bigint(x.numer()) - ln_abs_bigint(x.denom())
}

/// Exact evaluation in rational arithmetic. Slow; intended for
/// cross-checks at moderate n.
pub fn radial_integral_exact(key: &RadialIntegralKey) -> Result<f64> {
    key.validate()?;
    let a = rational_radial_poly(key.n, key.l);
    let b0 = rational_radial_poly(key.n_prime, key.l_prime);
    let b = match key.kind {
        RadialKind::Plain => b0,
        RadialKind::Derivative => rational_derivative(&b0, key.n_prime),
    };
    let s = BigRational::new(BigInt::from(key.n + key.n_prime), BigInt::from(key.n * key.n_prime));
    let inv_s = s.recip();
    let mut total = BigRational::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let p = i as i32 + j as i32 + key.power + 2;
            if p < 0 {
                return Err(Error::Domain(format!("divergent term in {key:?}")));
            }
            let p = p as u32;
            total += ai * bj * BigRational::from_integer(factorial(p)) * rational_pow(&inv_s, p + 1);
        }
    }
    if total.is_zero() {
        return Ok(0.0);
    }
    let sign = if total.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    let ln_val = ln_norm(key.n, key.l) + ln_norm(key.n_prime, key.l_prime) + ln_abs_rational(&total);
    Ok(sign * ln_val.exp())
}

/// Both paths; errors when they disagree beyond `tol` relative to the
/// quadrature's absolute-term scale.
pub fn radial_integral_checked(key: &RadialIntegralKey, tol: f64) -> Result<f64> {
    let (fast, scale) = radial_integral_quadrature(key)?;
    let exact = radial_integral_exact(key)?;
    if (fast - exact).abs() > tol * scale.max(exact.abs()) {
        return Err(Error::Numeric(format!(
            "radial paths disagree for {key:?}: quadrature {fast:e}, exact {exact:e}"
        )));
    }
    Ok(fast)
}

/// Cached radial integral; the authoritative fast path.
pub fn radial_integral(key: RadialIntegralKey) -> Result<f64> {
    crate::cache::global().get_or_compute(key.canonical(), |k| {
        radial_integral_quadrature(k).map(|(v, _)| v)
    })
}
