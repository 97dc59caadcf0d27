//! Aharonov-Casher type momentum of a Stark-split superposition, the
//! mass-renormalization integrals behind it and the transverse estimate.
//!
//! Masses in the k-integrals are measured in units of m c (ħ = c = 1), so
//! q = ħk/(m c). Time-dependent quantities are evaluated in atomic units and
//! converted at the boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{parabolic_coefficients, ParabolicLabel, StateVector};
use crate::matelem::{momentum_p, p2_p, state_angular_momentum, state_element, CVector3, Vector3, VectorOp};
use crate::quad::{integrate, integrate_to_infinity};
use crate::sum::NeumaierSum;
use crate::units::{AtomSpec, PhysicalConstants};
use crate::{Error, Result};

const QUAD_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub abs_error: f64,
    pub cutoff_used: Option<f64>,
    pub converged: bool,
}

fn check_masses(m1: f64, m2: f64) -> Result<()> {
    if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
        return Err(Error::Domain(format!("masses must be positive and finite: {m1}, {m2}")));
    }
    if m1 < m2 {
        return Err(Error::Domain(format!("core mass {m1} below electron mass {m2}")));
    }
    Ok(())
}

/// -(8α/3π) log(m1/m2).
pub fn renorm_closed_form(m1: f64, m2: f64, alpha: f64) -> f64 {
    -8.0 * alpha / (3.0 * PI) * (m1 / m2).ln()
}

/// δm₁/m₁ - δm₂/m₂ = (4α/3π) ∫ dq [1/(m1 + q/2) - 1/(m2 + q/2)] by quadrature.
pub fn renorm_combination(m1: f64, m2: f64, constants: &PhysicalConstants) -> Result<IntegralResult> {
    check_masses(m1, m2)?;
    // Rescale so the lighter mass is 1.
    let a = m1 / m2;
    let f = |q: f64| (1.0 - a) / ((a + 0.5 * q) * (1.0 + 0.5 * q));
    let r = split_quadrature(f, a);
    let pre = 4.0 * constants.alpha / (3.0 * PI);
    Ok(IntegralResult { value: pre * r.0, abs_error: pre * r.1, cutoff_used: None, converged: r.2 })
}

/// ∫_0^∞ f with a break at the larger scale `b` (≥ 1).
fn split_quadrature<F: Fn(f64) -> f64>(f: F, b: f64) -> (f64, f64, bool) {
    let mut total = NeumaierSum::new();
    let mut err = 0.0;
    let mut ok = true;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi < b {
        let r = integrate(&f, lo, hi, QUAD_REL, 0.0);
        total.add(r.value);
        err += r.abs_error;
        ok &= r.converged;
        lo = hi;
        hi *= 4.0;
    }
    let r = integrate(&f, lo, b.max(lo), QUAD_REL, 0.0);
    total.add(r.value);
    err += r.abs_error;
    ok &= r.converged;
    let r = integrate_to_infinity(&f, b.max(lo), QUAD_REL, 0.0);
    total.add(r.value);
    err += r.abs_error;
    ok &= r.converged;
    (total.value(), err, ok)
}

/// δm = (4αħ²/3π) ∫_0^Λ dk k/(ħ c k + ħ²k²/2m) in kg, `k_cutoff` in 1/m.
pub fn delta_m(mass: f64, k_cutoff: f64, constants: &PhysicalConstants) -> Result<IntegralResult> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive: {mass}")));
    }
    if !k_cutoff.is_finite() {
        return Err(Error::Contract("delta_m diverges logarithmically; a finite cutoff is required".into()));
    }
    if k_cutoff <= 0.0 {
        return Err(Error::Domain(format!("cutoff must be positive: {k_cutoff}")));
    }
    let q_max = constants.hbar * k_cutoff / (mass * constants.c0);
    // In q the integral is (4αm/3π) ∫_0^Q dq/(1 + q/2); integrate in ln(1+q).
    let u_max = q_max.ln_1p();
    let r = integrate(|u: f64| u.exp() / (1.0 + 0.5 * u.exp_m1()), 0.0, u_max, QUAD_REL, 0.0);
    let pre = 4.0 * constants.alpha * mass / (3.0 * PI);
    Ok(IntegralResult { value: pre * r.value, abs_error: pre * r.abs_error, cutoff_used: Some(k_cutoff), converged: r.converged })
}

/// (8αm/3π) ln(1 + ħΛ/2mc).
pub fn delta_m_closed_form(mass: f64, k_cutoff: f64, constants: &PhysicalConstants) -> f64 {
    8.0 * constants.alpha * mass / (3.0 * PI) * (0.5 * constants.hbar * k_cutoff / (mass * constants.c0)).ln_1p()
}

/// δm₁/m₁ - δm₂/m₂ at cutoffs Λ₀ 2^k, Richardson-extrapolated in 1/Λ.
pub fn renorm_difference_extrapolated(atom: &AtomSpec, constants: &PhysicalConstants) -> Result<IntegralResult> {
    let scale = atom.m1 * constants.c0 / constants.hbar;
    let diff = |lambda: f64| -> Result<f64> {
        Ok(delta_m(atom.m1, lambda, constants)?.value / atom.m1 - delta_m(atom.m2, lambda, constants)?.value / atom.m2)
    };
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut lambda = 1e3 * scale;
    let mut last = f64::INFINITY;
    let mut best = 0.0;
    for k in 0..12 {
        let mut row = vec![diff(lambda)?];
        for j in 1..=k {
            let f = 2f64.powi(j as i32);
            let v = (f * row[j - 1] - table[k - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        best = *row.last().unwrap();
        let change = (best - last).abs();
        table.push(row);
        if change < 1e-13 * best.abs() {
            last = best;
            break;
        }
        last = best;
        lambda *= 2.0;
    }
    Ok(IntegralResult { value: best, abs_error: (best - last).abs(), cutoff_used: Some(lambda), converged: true })
}

/// Integrand of the relativistic k-integral minus 1/(2q), written without
/// cancellation for q ≳ m.
fn relativistic_tail(q: f64, m: f64) -> f64 {
    let s = q.hypot(m);
    m * (q - m) / ((q + m + s) * s * (q + q * q / (s + m)))
}

fn relativistic_integrand(q: f64, m: f64) -> f64 {
    let s = q.hypot(m);
    q / (s * (q + q * q / (s + m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativisticRatio {
    pub ratio: f64,
    pub relativistic: IntegralResult,
    pub nonrelativistic: f64,
    pub degenerate_input: bool,
}

/// Relativistic k-integral over its non-relativistic closed form
/// -2 log(m1/m2).
pub fn relativistic_ratio(m1: f64, m2: f64) -> Result<RelativisticRatio> {
    check_masses(m1, m2)?;
    if m1 == m2 {
        let zero = IntegralResult { value: 0.0, abs_error: 0.0, cutoff_used: None, converged: true };
        return Ok(RelativisticRatio { ratio: 0.25, relativistic: zero, nonrelativistic: 0.0, degenerate_input: true });
    }
    let a = m1 / m2;
    let f = |q: f64| {
        if q < a {
            relativistic_integrand(q, a) - relativistic_integrand(q, 1.0)
        } else {
            relativistic_tail(q, a) - relativistic_tail(q, 1.0)
        }
    };
    let (value, abs_error, converged) = split_quadrature(f, a);
    let nonrel = -2.0 * a.ln();
    Ok(RelativisticRatio {
        ratio: value / nonrel,
        relativistic: IntegralResult { value, abs_error, cutoff_used: None, converged },
        nonrelativistic: nonrel,
        degenerate_input: false,
    })
}

/// ω_n = (3/2) n e a0 E0/ħ in rad/s.
pub fn stark_frequency(n: u32, e0_si: f64, constants: &PhysicalConstants) -> f64 {
    1.5 * n as f64 * constants.e_charge * constants.a0 * e0_si / constants.hbar
}

/// First-order Stark energy (a.u.).
fn stark_energy(p: ParabolicLabel, e0_au: f64) -> f64 {
    let n = p.n() as f64;
    -0.5 / (n * n) + 1.5 * n * p.stark_index() as f64 * e0_au
}

/// Σ β_ℓ |ℓ⟩ over parabolic states of one manifold, with phases evolved
/// by first-order Stark energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpositionState {
    pub n: u32,
    pub components: Vec<(ParabolicLabel, Complex64)>,
    /// Time in atomic units.
    pub time: f64,
    pub e0_au: f64,
}

impl SuperpositionState {
    /// Amplitudes are given at t = 0 and evolved to `time` (a.u.).
    pub fn new(components: Vec<(ParabolicLabel, Complex64)>, e0_au: f64, time: f64) -> Result<Self> {
        let n = components.first().map(|(p, _)| p.n()).ok_or_else(|| Error::Domain("empty superposition".into()))?;
        if components.iter().any(|(p, _)| p.n() != n) {
            return Err(Error::Domain("superposition components must share n".into()));
        }
        let norm: f64 = components.iter().map(|(_, b)| b.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("superposition norm {norm} != 1")));
        }
        let mut s = Self { n, components, time: 0.0, e0_au };
        s.evolve(time);
        Ok(s)
    }

    /// Advances the phases to `time` (a.u.).
    pub fn evolve(&mut self, time: f64) {
        let dt = time - self.time;
        // components share n, so only the Stark part of the energy matters
        let n = self.n as f64;
        for (p, b) in self.components.iter_mut() {
            let de = 1.5 * n * p.stark_index() as f64 * self.e0_au;
            *b *= Complex64::from_polar(1.0, -de * dt);
        }
        self.time = time;
    }

    pub fn at(&self, time: f64) -> Self {
        let mut s = self.clone();
        s.evolve(time);
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|(_, b)| b.norm_sqr()).sum()
    }

    fn component_vectors(&self) -> Vec<(StateVector, Complex64)> {
        self.components
            .iter()
            .map(|(p, b)| {
                let terms = parabolic_coefficients(*p).into_iter().map(|(l, c)| (l, Complex64::new(c, 0.0))).collect();
                let v = StateVector { terms, energy: Some(stark_energy(*p, self.e0_au)), norm_tag: crate::basis::NormTag::Normalized };
                (v, *b)
            })
            .collect()
    }

    /// Spherical expansion of the whole superposition.
    pub fn to_state_vector(&self) -> StateVector {
        let mut terms: Vec<(crate::basis::SphericalLabel, Complex64)> = Vec::new();
        for (v, b) in self.component_vectors() {
            for (l, c) in v.terms {
                match terms.iter_mut().find(|(x, _)| *x == l) {
                    Some((_, acc)) => *acc += c * b,
                    None => terms.push((l, c * b)),
                }
            }
        }
        StateVector { terms, energy: None, norm_tag: crate::basis::NormTag::Normalized }
    }

    fn bilinear<F>(&self, mut element: F) -> Result<CVector3>
    where
        F: FnMut(&StateVector, &StateVector) -> Result<CVector3>,
    {
        let comps = self.component_vectors();
        let mut acc = CVector3::ZERO;
        for (va, ba) in &comps {
            for (vb, bb) in &comps {
                acc += element(va, vb)? * (ba.conj() * bb);
            }
        }
        Ok(acc)
    }

    /// ⟨L⟩ in units of ħ.
    pub fn angular_momentum(&self) -> Vector3 {
        let v = self.to_state_vector();
        state_angular_momentum(&v, &v).re()
    }

    /// ⟨r⟩ of the electron relative to the core (a0).
    pub fn position(&self) -> Result<Vector3> {
        Ok(self.bilinear(|a, b| state_element(VectorOp::Position, a, b))?.re())
    }

    /// ⟨p⟩ through the commutator route (a.u.).
    pub fn momentum(&self) -> Result<Vector3> {
        Ok(self.bilinear(momentum_p)?.re())
    }

    /// ⟨|p|²p⟩ between zeroth-order states (a.u.).
    pub fn p2_p(&self, cutoff: u32) -> Result<Vector3> {
        let acc = self.bilinear(|a, b| {
            let mut s = CVector3::ZERO;
            for (la, ca) in &a.terms {
                for (lb, cb) in &b.terms {
                    s += p2_p(la, lb, cutoff)?.value * (ca.conj() * cb);
                }
            }
            Ok(s)
        })?;
        Ok(acc.re())
    }
}

/// (1/√2)[|0,0,n-1⟩ + e^{-iω_n t}|1,0,n-2⟩] at time `t_au` (a.u.).
pub fn nr_state(n: u32, e0_au: f64, t_au: f64) -> Result<SuperpositionState> {
    if n < 3 {
        return Err(Error::Domain(format!("the nR state needs n >= 3, got {n}")));
    }
    let m = n as i32 - 1;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    SuperpositionState::new(vec![(ParabolicLabel::new(0, 0, m), h), (ParabolicLabel::new(1, 0, m - 1), h)], e0_au, t_au)
}

/// ω_n in atomic units.
pub fn stark_frequency_au(n: u32, e0_au: f64) -> f64 {
    1.5 * n as f64 * e0_au
}

/// ⟨L(t)⟩ closed form (√(n-1)/2 cos ω t, -√(n-1)/2 sin ω t, n - 3/2).
pub fn angular_momentum_closed(n: u32, phase: f64) -> Vector3 {
    let c = 0.5 * ((n - 1) as f64).sqrt();
    Vector3::new(c * phase.cos(), -c * phase.sin(), n as f64 - 1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMomentumT {
    pub closed_form: Vector3,
    pub direct: Vector3,
}

/// Both routes for ⟨L(t)⟩ (units of ħ); they must agree to 1e-10.
pub fn angular_momentum_t(n: u32, e0_au: f64, t_au: f64) -> Result<AngularMomentumT> {
    let direct = nr_state(n, e0_au, t_au)?.angular_momentum();
    let closed_form = angular_momentum_closed(n, stark_frequency_au(n, e0_au) * t_au);
    let diff = (direct - closed_form).norm();
    if diff > 1e-10 * closed_form.norm() {
        return Err(Error::Numeric(format!("<L(t)> routes disagree by {diff:e} at n={n}")));
    }
    Ok(AngularMomentumT { closed_form, direct })
}

/// ‖d⟨L⟩/dt - ⟨d⟩×E0‖ / ‖⟨d⟩×E0‖ with Richardson-extrapolated central
/// differences of the direct route.
pub fn torque_residual(n: u32, e0_au: f64, t_au: f64) -> Result<f64> {
    let state = nr_state(n, e0_au, t_au)?;
    let omega = stark_frequency_au(n, e0_au);
    let h = 0.05 / omega;
    let l = |t: f64| state.at(t).angular_momentum();
    let central = |h: f64| (l(t_au + h) - l(t_au - h)).scale(0.5 / h);
    let d1 = central(h);
    let d2 = central(0.5 * h);
    let deriv = (d2.scale(4.0) - d1).scale(1.0 / 3.0);
    // d = -r for the electron; E0 along +z.
    let dipole = state.position()?.scale(-1.0);
    let torque = dipole.cross(&Vector3::new(0.0, 0.0, e0_au));
    Ok((deriv - torque).norm() / torque.norm())
}

/// -(8α/3π) log(m1/m2) ⟨p⟩ (a.u.), with the relativistic 1/4 if requested.
pub fn ac_momentum_au(state: &SuperpositionState, atom: &AtomSpec, apply_quarter: bool, constants: &PhysicalConstants) -> Result<Vector3> {
    let pre = renorm_closed_form(atom.m1, atom.m2, constants.alpha) * if apply_quarter { 0.25 } else { 1.0 };
    Ok(state.momentum()?.scale(pre))
}

/// ⟨P_long(t)⟩ in kg·m/s for the nR state at time `t_si` (s).
pub fn ac_momentum(
    n: u32,
    e0_si: f64,
    t_si: f64,
    atom: &AtomSpec,
    apply_quarter: bool,
    constants: &PhysicalConstants,
) -> Result<Vector3> {
    if !(e0_si > 0.0) {
        return Err(Error::Domain("the AC momentum needs E0 > 0".into()));
    }
    let state = nr_state(n, constants.efield_to_au(e0_si), t_si / constants.time_unit())?;
    Ok(ac_momentum_au(&state, atom, apply_quarter, constants)?.scale(constants.momentum_unit()))
}

/// Peak |v(t)| of v(t) = Re(e^{-iωt} V) given samples at ωt = 0 and π/2.
fn rotating_amplitude(v0: Vector3, v90: Vector3) -> f64 {
    // V = v0 + i v90 up to sign; |Re(e^{-iθ}V)|² = a cos² + b sin² + 2c sin cos.
    let a = v0.dot(&v0);
    let b = v90.dot(&v90);
    let c = v0.dot(&v90);
    let mean = 0.5 * (a + b);
    let dev = (0.25 * (a - b) * (a - b) + c * c).sqrt();
    (mean + dev).sqrt()
}

/// Peak |⟨P_long⟩| of the numeric route (kg·m/s).
pub fn ac_numeric_amplitude(n: u32, e0_si: f64, atom: &AtomSpec, apply_quarter: bool, constants: &PhysicalConstants) -> Result<f64> {
    let e = constants.efield_to_au(e0_si);
    let quarter_period = 0.5 * PI / stark_frequency_au(n, e);
    let p0 = ac_momentum_au(&nr_state(n, e, 0.0)?, atom, apply_quarter, constants)?;
    let p90 = ac_momentum_au(&nr_state(n, e, quarter_period)?, atom, apply_quarter, constants)?;
    Ok(rotating_amplitude(p0, p90) * constants.momentum_unit())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ACResult {
    pub n: u32,
    pub e0_si: f64,
    /// (3/4π) n² √(n-1) e a0 E0/c0 (×4 without the quarter).
    pub p_long_amplitude: f64,
    /// The same with the log(m1/m2) factor of the numeric route restored.
    pub p_long_amplitude_restored: f64,
    pub stark_omega: f64,
    /// (n/8) √(n-1) 10⁻¹⁵ (m_p/M) m (×4 without the quarter).
    pub displacement: f64,
    /// p_long_amplitude / (M ω_n).
    pub displacement_momentum_route: f64,
    pub force: f64,
    pub relativistic_quarter_applied: bool,
}

pub fn ac_amplitude(
    n: u32,
    e0_si: f64,
    mass: f64,
    atom: &AtomSpec,
    apply_quarter: bool,
    constants: &PhysicalConstants,
) -> Result<ACResult> {
    if n < 3 {
        return Err(Error::Domain(format!("the nR state needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let q = if apply_quarter { 1.0 } else { 4.0 };
    let amp = q * 3.0 / (4.0 * PI) * nf * nf * (nf - 1.0).sqrt() * constants.e_charge * constants.a0 * e0_si / constants.c0;
    let omega = stark_frequency(n, e0_si, constants);
    let displacement = q * nf / 8.0 * (nf - 1.0).sqrt() * 1e-15 * constants.m_p / mass;
    Ok(ACResult {
        n,
        e0_si,
        p_long_amplitude: amp,
        p_long_amplitude_restored: amp * (atom.m1 / atom.m2).ln(),
        stark_omega: omega,
        displacement,
        displacement_momentum_route: if omega > 0.0 { amp / (mass * omega) } else { 0.0 },
        force: omega * amp,
        relativistic_quarter_applied: apply_quarter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum P3Variant {
    /// |p|² p
    NormSquared,
    /// p_i p_j p_h contracted with the transverse projector and averaged
    /// over photon directions: (2/15) |p|² p.
    Contracted,
}

impl P3Variant {
    pub fn factor(&self) -> f64 {
        match self {
            P3Variant::NormSquared => 1.0,
            P3Variant::Contracted => 2.0 / 15.0,
        }
    }
}

/// α³ ⟨p³⟩ (a.u.; a0 = ħ = 1) for the state.
pub fn transverse_estimate_au(state: &SuperpositionState, variant: P3Variant, alpha: f64) -> Result<Vector3> {
    let cutoff = state.n + 10;
    Ok(state.p2_p(cutoff)?.scale(alpha.powi(3) * variant.factor()))
}

/// ⟨P_trans(t)⟩ in kg·m/s for the nR state.
pub fn transverse_estimate(n: u32, e0_si: f64, t_si: f64, variant: P3Variant, constants: &PhysicalConstants) -> Result<Vector3> {
    let state = nr_state(n, constants.efield_to_au(e0_si), t_si / constants.time_unit())?;
    Ok(transverse_estimate_au(&state, variant, constants.alpha)?.scale(constants.momentum_unit()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseRatio {
    pub e0_au: f64,
    pub transverse_amplitude: f64,
    pub longitudinal_amplitude: f64,
    pub ratio: f64,
    pub in_band: bool,
}

/// Peak |P_trans| over peak |P_long| (quarter applied) for the nR state.
pub fn transverse_ratio(
    n: u32,
    e0_au: f64,
    variant: P3Variant,
    atom: &AtomSpec,
    constants: &PhysicalConstants,
) -> Result<TransverseRatio> {
    let quarter_period = 0.5 * PI / stark_frequency_au(n, e0_au);
    let s0 = nr_state(n, e0_au, 0.0)?;
    let s90 = nr_state(n, e0_au, quarter_period)?;
    let t = rotating_amplitude(
        transverse_estimate_au(&s0, variant, constants.alpha)?,
        transverse_estimate_au(&s90, variant, constants.alpha)?,
    );
    let l = rotating_amplitude(
        ac_momentum_au(&s0, atom, true, constants)?,
        ac_momentum_au(&s90, atom, true, constants)?,
    );
    let ratio = t / l;
    let a2 = constants.alpha * constants.alpha;
    Ok(TransverseRatio {
        e0_au,
        transverse_amplitude: t,
        longitudinal_amplitude: l,
        ratio,
        in_band: ratio >= a2 / 30.0 && ratio <= 30.0 * a2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::CODATA;

    #[test]
    fn renorm_matches_closed_form() {
        let atom = AtomSpec::hydrogen();
        let r = renorm_combination(atom.m1, atom.m2, &CODATA).unwrap();
        let c = renorm_closed_form(atom.m1, atom.m2, CODATA.alpha);
        assert!((r.value / c - 1.0).abs() < 1e-9, "{} vs {c}", r.value);
        assert!((c + 0.04655).abs() < 1e-4);
    }

    #[test]
    fn quarter_ratio() {
        for a in [2.0, 10.0, 1836.15267] {
            let r = relativistic_ratio(a, 1.0).unwrap();
            assert!((r.ratio - 0.25).abs() < 1e-8, "{a}: {}", r.ratio);
        }
    }

    #[test]
    fn delta_m_closed_form_agrees() {
        let v = delta_m(CODATA.m_e, 1e15, &CODATA).unwrap();
        let c = delta_m_closed_form(CODATA.m_e, 1e15, &CODATA);
        assert!((v.value / c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn angular_momentum_at_t0() {
        let l = angular_momentum_t(50, 1e-10, 0.0).unwrap();
        assert!((l.direct - Vector3::new(3.5, 0.0, 48.5)).norm() < 1e-10);
    }
}
