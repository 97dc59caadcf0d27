//! Hydrogen matrix elements of rank-1 operators, L, and the vacuum
//! operator Δ(r̂)·p = r^{-1}(1 + r̂ r̂)·p.
//!
//! Every vector operator is reduced to spherical components
//! (q = 0 for z, q = ±1 for x ± iy). For the operators used here the
//! angular factor of ⟨l±1, m+q| O_q |l, m⟩ is the one of r̂_q; only the
//! radial factor differs.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{SphericalLabel, StateVector};
use crate::radial::{radial_integral, RadialIntegralKey};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Vector3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vector3) -> Vector3 {
        Vector3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn scale(&self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        self.scale(-1.0)
    }
}

/// Complex vector for off-diagonal matrix elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CVector3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl CVector3 {
    pub const ZERO: CVector3 = CVector3 {
        x: Complex64::new(0.0, 0.0),
        y: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
    };

    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { x, y, z }
    }

    pub fn re(&self) -> Vector3 {
        Vector3::new(self.x.re, self.y.re, self.z.re)
    }

    pub fn im(&self) -> Vector3 {
        Vector3::new(self.x.im, self.y.im, self.z.im)
    }

    pub fn conj(&self) -> CVector3 {
        CVector3::new(self.x.conj(), self.y.conj(), self.z.conj())
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    pub fn max_abs_diff(&self, o: &CVector3) -> f64 {
        (self.x - o.x).norm().max((self.y - o.y).norm()).max((self.z - o.z).norm())
    }
}

impl Add for CVector3 {
    type Output = CVector3;
    fn add(self, o: CVector3) -> CVector3 {
        CVector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for CVector3 {
    fn add_assign(&mut self, o: CVector3) {
        *self = *self + o;
    }
}

impl Sub for CVector3 {
    type Output = CVector3;
    fn sub(self, o: CVector3) -> CVector3 {
        CVector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<Complex64> for CVector3 {
    type Output = CVector3;
    fn mul(self, s: Complex64) -> CVector3 {
        CVector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<f64> for CVector3 {
    type Output = CVector3;
    fn mul(self, s: f64) -> CVector3 {
        CVector3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Vector operators with rank-1 angular structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VectorOp {
    /// r
    Position,
    /// r̂ = r / r
    UnitVector,
    /// p = -i∇ through the commutator route i(E_a - E_b)⟨a|r|b⟩
    Momentum,
    /// p = -i∇ from gradient radial integrals
    MomentumGradient,
    /// r^{-1} p
    InverseRadiusMomentum,
    /// Δ(r̂)·p = -i [r^{-1}∇ + r̂ r^{-1} ∂_r]
    DeltaDotP,
}

/// Angular factor of r̂_q Y_{l m} onto Y_{l±1, m+q}; q = ±1 means x ± iy.
pub fn angular_factor(q: i32, l: u32, m: i32, up: bool) -> f64 {
    let l = l as f64;
    let mf = m as f64;
    if up {
        let d = (2.0 * l + 1.0) * (2.0 * l + 3.0);
        match q {
            0 => (((l + 1.0) * (l + 1.0) - mf * mf) / d).sqrt(),
            1 => -((l + mf + 1.0) * (l + mf + 2.0) / d).sqrt(),
            -1 => ((l - mf + 1.0) * (l - mf + 2.0) / d).sqrt(),
            _ => 0.0,
        }
    } else {
        if l < 1.0 {
            return 0.0;
        }
        let d = (2.0 * l - 1.0) * (2.0 * l + 1.0);
        match q {
            0 => ((l * l - mf * mf) / d).max(0.0).sqrt(),
            1 => ((l - mf) * (l - mf - 1.0) / d).max(0.0).sqrt(),
            -1 => -((l + mf) * (l + mf - 1.0) / d).max(0.0).sqrt(),
            _ => 0.0,
        }
    }
}

fn plain(a: &SphericalLabel, b: &SphericalLabel, power: i32) -> Result<f64> {
    radial_integral(RadialIntegralKey::plain(a.n, a.l, b.n, b.l, power))
}

fn deriv(a: &SphericalLabel, b: &SphericalLabel, power: i32) -> Result<f64> {
    radial_integral(RadialIntegralKey::derivative(a.n, a.l, b.n, b.l, power))
}

/// Radial factor of ⟨a| O |b⟩ for an operator whose angular part is that of
/// r̂; `up` means l_a = l_b + 1.
fn radial_factor(op: VectorOp, a: &SphericalLabel, b: &SphericalLabel, up: bool) -> Result<f64> {
    let lb = b.l as f64;
    let centrifugal = if up { -lb } else { lb + 1.0 };
    Ok(match op {
        VectorOp::Position | VectorOp::Momentum => plain(a, b, 1)?,
        VectorOp::UnitVector => plain(a, b, 0)?,
        VectorOp::MomentumGradient => deriv(a, b, 0)? + centrifugal * plain(a, b, -1)?,
        VectorOp::InverseRadiusMomentum => deriv(a, b, -1)? + centrifugal * plain(a, b, -2)?,
        VectorOp::DeltaDotP => 2.0 * deriv(a, b, -1)? + centrifugal * plain(a, b, -2)?,
    })
}

/// Real spherical element ⟨a| O_q |b⟩ of the operator without its -i factor.
fn spherical_element(op: VectorOp, q: i32, a: &SphericalLabel, b: &SphericalLabel) -> Result<f64> {
    if a.m != b.m + q {
        return Ok(0.0);
    }
    let up = if a.l == b.l + 1 {
        true
    } else if a.l + 1 == b.l {
        false
    } else {
        return Ok(0.0);
    };
    let ang = angular_factor(q, b.l, b.m, up);
    if ang == 0.0 {
        return Ok(0.0);
    }
    Ok(ang * radial_factor(op, a, b, up)?)
}

fn cartesian(op: VectorOp, a: &SphericalLabel, b: &SphericalLabel) -> Result<CVector3> {
    let plus = spherical_element(op, 1, a, b)?;
    let minus = spherical_element(op, -1, a, b)?;
    let z = spherical_element(op, 0, a, b)?;
    Ok(CVector3::new(
        Complex64::new(0.5 * (plus + minus), 0.0),
        Complex64::new(0.0, -0.5 * (plus - minus)),
        Complex64::new(z, 0.0),
    ))
}

/// ⟨a| op |b⟩ between field-free eigenstates.
pub fn matrix_element(op: VectorOp, a: &SphericalLabel, b: &SphericalLabel) -> Result<CVector3> {
    match op {
        VectorOp::Position | VectorOp::UnitVector => cartesian(op, a, b),
        VectorOp::Momentum => {
            if a.n == b.n {
                return Ok(CVector3::ZERO);
            }
            Ok(cartesian(VectorOp::Position, a, b)? * (I * (a.energy() - b.energy())))
        }
        VectorOp::MomentumGradient | VectorOp::InverseRadiusMomentum | VectorOp::DeltaDotP => {
            Ok(cartesian(op, a, b)? * (-I))
        }
    }
}

pub fn dipole_z(a: &SphericalLabel, b: &SphericalLabel) -> Result<f64> {
    spherical_element(VectorOp::Position, 0, a, b)
}

pub fn position_vector(a: &SphericalLabel, b: &SphericalLabel) -> Result<CVector3> {
    matrix_element(VectorOp::Position, a, b)
}

pub fn unit_rvec(a: &SphericalLabel, b: &SphericalLabel) -> Result<CVector3> {
    matrix_element(VectorOp::UnitVector, a, b)
}

pub fn delta_dot_p(a: &SphericalLabel, b: &SphericalLabel) -> Result<CVector3> {
    matrix_element(VectorOp::DeltaDotP, a, b)
}

fn ladder(l: u32, m: i32, raise: bool) -> f64 {
    let (l, m) = (l as f64, m as f64);
    let v = if raise { l * (l + 1.0) - m * (m + 1.0) } else { l * (l + 1.0) - m * (m - 1.0) };
    v.max(0.0).sqrt()
}

/// ⟨a|L|b⟩ in units of ħ.
pub fn angular_momentum(a: &SphericalLabel, b: &SphericalLabel) -> CVector3 {
    if a.n != b.n || a.l != b.l {
        return CVector3::ZERO;
    }
    let plus = if a.m == b.m + 1 { ladder(b.l, b.m, true) } else { 0.0 };
    let minus = if a.m + 1 == b.m { ladder(b.l, b.m, false) } else { 0.0 };
    let z = if a.m == b.m { a.m as f64 } else { 0.0 };
    CVector3::new(
        Complex64::new(0.5 * (plus + minus), 0.0),
        Complex64::new(0.0, -0.5 * (plus - minus)),
        Complex64::new(z, 0.0),
    )
}

pub fn angular_momentum_x(a: &SphericalLabel, b: &SphericalLabel) -> f64 {
    angular_momentum(a, b).x.re
}

/// ⟨a|p|b⟩ for state vectors through the commutator route
/// i(E_a - E_b)⟨a|r|b⟩, which needs both energies.
pub fn momentum_p(a: &StateVector, b: &StateVector) -> Result<CVector3> {
    let (ea, eb) = match (a.energy, b.energy) {
        (Some(ea), Some(eb)) => (ea, eb),
        _ => return Err(Error::Contract("momentum_p needs energy metadata on both states".into())),
    };
    if ea == eb {
        return Ok(CVector3::ZERO);
    }
    Ok(state_element(VectorOp::Position, a, b)? * (I * (ea - eb)))
}

/// ⟨A| op |B⟩ by expansion over the spherical components.
pub fn state_element(op: VectorOp, a: &StateVector, b: &StateVector) -> Result<CVector3> {
    let mut acc = CVector3::ZERO;
    for (la, ca) in &a.terms {
        for (lb, cb) in &b.terms {
            if la.l.abs_diff(lb.l) != 1 || la.m.abs_diff(lb.m) > 1 {
                continue;
            }
            acc += matrix_element(op, la, lb)? * (ca.conj() * cb);
        }
    }
    Ok(acc)
}

/// ⟨A|L|B⟩ by expansion.
pub fn state_angular_momentum(a: &StateVector, b: &StateVector) -> CVector3 {
    let mut acc = CVector3::ZERO;
    for (la, ca) in &a.terms {
        for (lb, cb) in &b.terms {
            acc += angular_momentum(la, lb) * (ca.conj() * cb);
        }
    }
    acc
}

/// ⟨a| |p|^2 p |b⟩ with the resolution-of-identity diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P2PElement {
    /// Exact value 2 E_a ⟨a|p|b⟩ + 2 ⟨a|r^{-1} p|b⟩ from p^2 = 2(H + 1/r).
    pub value: CVector3,
    /// Σ_j ⟨a|p^2|j⟩⟨j|p|b⟩ over bound j with n_j ≤ cutoff.
    pub truncated_sum: CVector3,
    pub cutoff: u32,
    /// Relative gap between the truncated sum and the exact value.
    pub truncation_gap: f64,
}

pub fn p2_p(a: &SphericalLabel, b: &SphericalLabel, cutoff: u32) -> Result<P2PElement> {
    if a.m.abs_diff(b.m) > 1 || a.l.abs_diff(b.l) != 1 {
        return Ok(P2PElement { value: CVector3::ZERO, truncated_sum: CVector3::ZERO, cutoff, truncation_gap: 0.0 });
    }
    let p = matrix_element(VectorOp::MomentumGradient, a, b)?;
    let rp = matrix_element(VectorOp::InverseRadiusMomentum, a, b)?;
    let value = p * (2.0 * a.energy()) + rp * 2.0;
    // p^2 is diagonal in (l, m): ⟨a|p^2|j⟩ = 2 E_a δ_aj + 2 ⟨a|1/r|j⟩.
    let mut truncated = CVector3::ZERO;
    for nj in (a.l + 1)..=cutoff.max(a.l + 1) {
        let j = SphericalLabel { n: nj, l: a.l, m: a.m };
        let mut p2 = 2.0 * plain(a, &j, -1)?;
        if nj == a.n {
            p2 += 2.0 * a.energy();
        }
        truncated += matrix_element(VectorOp::MomentumGradient, &j, b)? * p2;
    }
    let gap = if value.norm() > 0.0 { (truncated - value).norm() / value.norm() } else { truncated.norm() };
    Ok(P2PElement { value, truncated_sum: truncated, cutoff, truncation_gap: gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(n: u32, l: u32, m: i32) -> SphericalLabel {
        SphericalLabel::new(n, l, m).unwrap()
    }

    #[test]
    fn ground_to_2p_dipole() {
        let z = dipole_z(&lab(1, 0, 0), &lab(2, 1, 0)).unwrap();
        // 2^7 sqrt(2) / 3^5
        let exact = 128.0 * 2f64.sqrt() / 243.0;
        assert!((z - exact).abs() < 1e-13, "{z} vs {exact}");
    }

    #[test]
    fn parity_and_azimuthal_zeros() {
        assert_eq!(dipole_z(&lab(2, 1, 1), &lab(2, 1, 1)).unwrap(), 0.0);
        assert_eq!(dipole_z(&lab(3, 1, 1), &lab(3, 2, 0)).unwrap(), 0.0);
        let r = position_vector(&lab(3, 1, 0), &lab(3, 2, 0)).unwrap();
        assert_eq!(r.x, Complex64::default());
        assert_eq!(r.y, Complex64::default());
    }

    #[test]
    fn ladder_value() {
        let v = angular_momentum_x(&lab(50, 49, 48), &lab(50, 49, 49));
        assert!((v - 0.5 * (49.0f64 * 50.0 - 49.0 * 48.0).sqrt()).abs() < 1e-13);
        assert_eq!(angular_momentum_x(&lab(1, 0, 0), &lab(1, 0, 0)), 0.0);
    }

    #[test]
    fn commutator_equals_gradient() {
        let a = lab(1, 0, 0);
        let b = lab(2, 1, 0);
        let c = matrix_element(VectorOp::Momentum, &a, &b).unwrap();
        let g = matrix_element(VectorOp::MomentumGradient, &a, &b).unwrap();
        assert!(c.max_abs_diff(&g) < 1e-12 * g.norm());
    }

    #[test]
    fn delta_p_2p_1s() {
        // -i (2/(3 sqrt 2)) (2 / 1.5^3) from the closed-form radial integrals
        let v = delta_dot_p(&lab(2, 1, 0), &lab(1, 0, 0)).unwrap();
        let exact = 2.0 / (3.0 * 2f64.sqrt()) * 2.0 / 1.5f64.powi(3);
        assert!((v.z.im.abs() - exact).abs() < 1e-12, "{v:?} vs {exact}");
    }
}
