//! Classical Abraham momentum of a circular state and its α² vacuum
//! corrections κ₂, κ₁ᵦ and κ₁ₐ.
//!
//! All three channels are normalised as κ = ŷ·⟨P_long⟩ / (α² |P_A|) with
//! P_A = α_zz E0 B0 / c ŷ. They are extracted as exact Taylor coefficients
//! of the perturbation series, so no finite field enters the value.

use serde::Serialize;

use crate::basis::{circular_state, ParabolicLabel};
use crate::matelem::Vector3;
use crate::perturb::{
    converge, stark_series, Block, Convergence, FieldConfiguration, RealComponent, SparseOp, StarkSeries,
};
use crate::sum::NeumaierSum;
use crate::units::PhysicalConstants;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Channel {
    K1a,
    K1b,
    K2,
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::K1a => "kappa1a",
            Channel::K1b => "kappa1b",
            Channel::K2 => "kappa2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignVsPA {
    Parallel,
    Antiparallel,
}

/// The four pieces of the in-manifold expansion; their sum is κ₁ₐ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa1aTerms {
    /// Numerator at second order in the field over the first-order splitting.
    pub first: f64,
    /// Second-order energy difference term.
    pub e2: f64,
    /// Third-order energy difference term.
    pub e3: f64,
    /// Squared second-order energy difference term.
    pub e2_squared: f64,
    /// Coefficient of E0^0, zero by the z-reflection symmetry.
    pub even_residual: f64,
    /// Coefficient c with κ_{1/E}(E0) = c / E0² (E0 in a.u.).
    pub inverse_e_coefficient: f64,
}

impl Kappa1aTerms {
    pub fn total(&self) -> f64 {
        self.first + self.e2 + self.e3 + self.e2_squared
    }

    /// κ-equivalent of the 1/E0 term at the field `e_au`.
    pub fn inverse_e_term(&self, e_au: f64) -> f64 {
        self.inverse_e_coefficient / (e_au * e_au)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaResult {
    pub n: u32,
    pub channel: Channel,
    pub value: f64,
    pub sign_vs_pa: SignVsPA,
    pub convergence: Convergence,
    pub terms: Option<Kappa1aTerms>,
    /// κ-equivalent of the 1/E0 term when requested.
    pub inverse_e_term: Option<f64>,
    /// Relative change of the finite-field estimate under E0 -> E0/2.
    pub linear_response_deviation: Option<f64>,
    pub flags: Vec<String>,
}

impl KappaResult {
    fn new(n: u32, channel: Channel, value: f64, convergence: Convergence) -> Self {
        let mut flags = Vec::new();
        if !convergence.converged {
            flags.push(format!(
                "basis cutoff not converged: {:.2e} > {:.0e}",
                convergence.achieved_rel, convergence.target_rel
            ));
        }
        Self {
            n,
            channel,
            value,
            sign_vs_pa: if value >= 0.0 { SignVsPA::Parallel } else { SignVsPA::Antiparallel },
            convergence,
            terms: None,
            inverse_e_term: None,
            linear_response_deviation: None,
            flags,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbrahamMomentum {
    pub vector_si: Vector3,
    pub vector_au: Vector3,
    pub polarizability_used: f64,
}

/// Static polarizability α_zz of the state (n, m) in a0³, closed form.
pub fn polarizability_closed(n: u32, m: i32) -> f64 {
    let n = n as f64;
    let m = m as f64;
    n.powi(4) * (17.0 * n * n - 9.0 * m * m + 19.0) / 8.0
}

/// Discrete sum 2 Σ_j |⟨nC|z|j⟩|²/(E_j - E_nC) with n_j ≤ n_max.
pub fn polarizability_sum_at_cutoff(n: u32, n_max: u32) -> Result<f64> {
    let c = circular_state(n)?;
    let mut s = NeumaierSum::new();
    for nj in (n + 1)..=n_max {
        let j = crate::basis::SphericalLabel { n: nj, l: n, m: c.m };
        let z = crate::matelem::dipole_z(&c, &j)?;
        s.add(2.0 * z * z / (j.energy() - c.energy()));
    }
    Ok(s.value())
}

/// Discrete-spectrum polarizability with cutoff doubling (target 1e-6).
pub fn polarizability_sum(n: u32, basis_cutoff: u32) -> Result<(f64, Convergence)> {
    if basis_cutoff < n + 10 {
        return Err(Error::Contract(format!("basis cutoff {basis_cutoff} below n+10")));
    }
    converge(n, basis_cutoff - n, 64 * (basis_cutoff - n), 1e-6, |c| polarizability_sum_at_cutoff(n, c))
}

/// P_A = α_zz E0 × B0 / c for E0 ∥ ẑ and B0 ∥ x̂ (signed magnitudes).
pub fn abraham_momentum_signed(n: u32, e0_si: f64, b0_si: f64, constants: &PhysicalConstants) -> AbrahamMomentum {
    let alpha_zz = polarizability_closed(n, n as i32 - 1);
    let e = constants.efield_to_au(e0_si);
    let b = constants.bfield_to_au(b0_si);
    // ẑ × x̂ = ŷ
    let p = alpha_zz * e * b * constants.alpha;
    let au = Vector3::new(0.0, p, 0.0);
    AbrahamMomentum { vector_si: au.scale(constants.momentum_unit()), vector_au: au, polarizability_used: alpha_zz }
}

pub fn abraham_momentum(n: u32, fields: &FieldConfiguration, constants: &PhysicalConstants) -> AbrahamMomentum {
    abraham_momentum_signed(n, fields.e0_si, fields.b0_si, constants)
}

/// Amplitude of d|P_A|/dt (N) when one of the fields oscillates at the
/// angular frequency `omega` (rad/s).
pub fn abraham_force_amplitude(n: u32, fields: &FieldConfiguration, omega: f64, constants: &PhysicalConstants) -> f64 {
    abraham_momentum(n, fields, constants).vector_si.norm() * omega
}

/// Blocks and operators shared by the three channels at one cutoff.
/// `orientation` = +1 puts the circular state at m = n-1, -1 at m = 1-n.
pub struct KappaWorkspace {
    pub n: u32,
    pub n_max: u32,
    pub orientation: i32,
    circ: Block,
    side: Block,
    top: Block,
    z_side: SparseOp,
    z_top: SparseOp,
    rz_circ: SparseOp,
    dpy_side: SparseOp,
    dpy_top: SparseOp,
    lx_side: SparseOp,
    lx_top: SparseOp,
    circ_series: StarkSeries,
}

impl KappaWorkspace {
    pub fn new(n: u32, n_max: u32, orientation: i32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("kappa channels need n >= 2".into()));
        }
        if n_max < n + 1 {
            return Err(Error::Contract("basis cutoff must exceed n".into()));
        }
        let s = orientation.signum();
        let m = s * (n as i32 - 1);
        let circ = Block::new(m, n_max);
        let side = Block::new(m - s, n_max);
        let top = Block::new(m + s, n_max);
        let z_circ = SparseOp::build(RealComponent::Z, &circ, &circ)?;
        let z_side = SparseOp::build(RealComponent::Z, &side, &side)?;
        let z_top = SparseOp::build(RealComponent::Z, &top, &top)?;
        let rz_circ = SparseOp::build(RealComponent::UnitZ, &circ, &circ)?;
        let dpy_side = SparseOp::build(RealComponent::DeltaPY, &circ, &side)?;
        let dpy_top = SparseOp::build(RealComponent::DeltaPY, &circ, &top)?;
        let lx_side = SparseOp::build(RealComponent::LX, &side, &circ)?;
        let lx_top = SparseOp::build(RealComponent::LX, &top, &circ)?;
        let circ_series = stark_series(&circ, &z_circ, ParabolicLabel::new(0, 0, m), 2)?;
        Ok(Self {
            n,
            n_max,
            orientation: s,
            circ,
            side,
            top,
            z_side,
            z_top,
            rz_circ,
            dpy_side,
            dpy_top,
            lx_side,
            lx_top,
            circ_series,
        })
    }

    fn alpha_zz(&self) -> f64 {
        polarizability_closed(self.n, self.n as i32 - 1)
    }

    /// κ₂ = -ρ₁ / (2 α_zz), ρ₁ the field coefficient of ⟨r̂_z⟩.
    pub fn kappa2(&self) -> f64 {
        let s = &self.circ_series;
        let rho1 = 2.0 * self.rz_circ.bilinear(&s.vectors[0], &s.vectors[1]);
        -rho1 / (2.0 * self.alpha_zz())
    }

    /// Finite-field ⟨r̂_z⟩/E from the first-order state, normalised.
    pub fn kappa2_finite_field(&self, e_au: f64) -> f64 {
        let v = self.circ_series.vector_at(e_au, 1);
        let norm = crate::perturb::dot(&v, &v);
        let rho = self.rz_circ.bilinear(&v, &v) / norm;
        -rho / e_au / (2.0 * self.alpha_zz())
    }

    /// κ₁ᵦ from states outside the manifold, basis-independent per manifold.
    pub fn kappa1b(&self) -> f64 {
        let n = self.n;
        let e_n = -0.5 / (n as f64 * n as f64);
        let psi0 = &self.circ_series.vectors[0];
        let psi1 = &self.circ_series.vectors[1];
        let c_idx = self.circ.index_of(&circular_label(n, self.orientation)).expect("circular state in block");
        let mut acc = NeumaierSum::new();
        for (block, z, dpy, lx) in [
            (&self.side, &self.z_side, &self.dpy_side, &self.lx_side),
            (&self.top, &self.z_top, &self.dpy_top, &self.lx_top),
        ] {
            let lx_c = lx.apply(psi0);
            let zl = z.apply(&lx_c);
            let lx_1 = lx.apply(psi1);
            for (j, a_j) in dpy.rows[c_idx].iter() {
                let lab = block.labels[*j];
                if lab.n == n {
                    continue;
                }
                let ej = block.energies[*j];
                let b1 = zl[*j] / (ej - e_n) + lx_1[*j];
                acc.add(a_j * b1 / (e_n - ej));
            }
        }
        acc.value() / (2.0 * self.alpha_zz())
    }

    /// κ₁ₐ from the two in-manifold Zeeman partners, term by term.
    pub fn kappa1a_terms(&self) -> Result<Kappa1aTerms> {
        let n = self.n;
        let m_side = self.side.m;
        let partners = [ParabolicLabel::new(1, 0, m_side), ParabolicLabel::new(0, 1, m_side)];
        let c = &self.circ_series;
        let mut t = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
        let mut even = NeumaierSum::new();
        let mut inv = NeumaierSum::new();
        for p in partners {
            let j = stark_series(&self.side, &self.z_side, p, 2)?;
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for k in 0..3 {
                for i in 0..=k {
                    a[k] += self.dpy_side.bilinear(&c.vectors[i], &j.vectors[k - i]);
                    b[k] += self.lx_side.bilinear(&j.vectors[i], &c.vectors[k - i]);
                }
            }
            let num: Vec<f64> = (0..3).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect();
            let d: Vec<f64> = (0..4).map(|k| c.energies[k] - j.energies[k]).collect();
            let (d1, d2, d3) = (d[1], d[2], d[3]);
            if d1.abs() < crate::perturb::DEGENERACY_TOL {
                return Err(Error::Physics(format!("vanishing in-manifold denominator for {p:?} at n={n}")));
            }
            t[0].add(num[2] / d1);
            t[1].add(-num[1] * d2 / (d1 * d1));
            t[2].add(-num[0] * d3 / (d1 * d1));
            t[3].add(num[0] * d2 * d2 / (d1 * d1 * d1));
            even.add((num[1] - num[0] * d2 / d1) / d1);
            inv.add(num[0] / d1);
        }
        let norm = 2.0 * self.alpha_zz();
        Ok(Kappa1aTerms {
            first: t[0].value() / norm,
            e2: t[1].value() / norm,
            e3: t[2].value() / norm,
            e2_squared: t[3].value() / norm,
            even_residual: even.value() / norm,
            inverse_e_coefficient: inv.value() / norm,
        })
    }

    pub fn circular_block(&self) -> &Block {
        &self.circ
    }
}

fn circular_label(n: u32, orientation: i32) -> crate::basis::SphericalLabel {
    crate::basis::SphericalLabel { n, l: n - 1, m: orientation.signum() * (n as i32 - 1) }
}

/// Cutoff policy for the κ channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaCutoff {
    pub delta0: u32,
    pub delta_max: u32,
    pub target: f64,
}

impl Default for KappaCutoff {
    fn default() -> Self {
        Self { delta0: 12, delta_max: 96, target: 1e-3 }
    }
}

impl KappaCutoff {
    pub fn fixed(delta: u32) -> Self {
        Self { delta0: delta, delta_max: delta, target: 1e-3 }
    }
}

fn run_channel<F>(n: u32, cutoff: &KappaCutoff, orientation: i32, f: F) -> Result<(f64, Convergence, Option<KappaWorkspace>)>
where
    F: Fn(&KappaWorkspace) -> Result<f64>,
{
    let mut last = None;
    let (v, conv) = converge(n, cutoff.delta0, cutoff.delta_max, cutoff.target, |c| {
        let ws = KappaWorkspace::new(n, c, orientation)?;
        let v = f(&ws)?;
        last = Some(ws);
        Ok(v)
    })?;
    Ok((v, conv, last))
}

pub fn kappa2(n: u32, fields: &FieldConfiguration, cutoff: &KappaCutoff) -> Result<KappaResult> {
    let (v, conv, ws) = run_channel(n, cutoff, 1, |ws| Ok(ws.kappa2()))?;
    let mut r = KappaResult::new(n, Channel::K2, v, conv);
    if let Some(ws) = ws {
        if fields.e0_au > 0.0 {
            let full = ws.kappa2_finite_field(fields.e0_au);
            let half = ws.kappa2_finite_field(0.5 * fields.e0_au);
            let dev = (full - half).abs() / half.abs();
            r.linear_response_deviation = Some(dev);
            if dev > 0.01 {
                r.flags.push(format!("nonlinear in E0: {dev:.2e} change under halving"));
            }
        }
    }
    Ok(r)
}

pub fn kappa1b(n: u32, fields: &FieldConfiguration, cutoff: &KappaCutoff, constants: &PhysicalConstants) -> Result<KappaResult> {
    let (v, conv, _) = run_channel(n, cutoff, 1, |ws| Ok(ws.kappa1b()))?;
    let mut r = KappaResult::new(n, Channel::K1b, v, conv);
    zeeman_flag(&mut r, n, fields, constants);
    Ok(r)
}

fn zeeman_flag(r: &mut KappaResult, n: u32, fields: &FieldConfiguration, constants: &PhysicalConstants) {
    if fields.b0_au > 0.0 && !fields.zeeman_weak(n, constants, 10.0) {
        r.flags.push(format!(
            "Zeeman/Stark margin {:.2} below 10 (B0 << E0 n/alpha)",
            fields.zeeman_margin(n, constants)
        ));
    }
}

/// κ₁ₐ for the circular state with angular momentum along +ẑ
/// (`orientation` = 1) or -ẑ (-1).
pub fn kappa1a_oriented(
    n: u32,
    fields: &FieldConfiguration,
    cutoff: &KappaCutoff,
    include_inverse_e_term: bool,
    orientation: i32,
    constants: &PhysicalConstants,
) -> Result<KappaResult> {
    let (v, conv, ws) = run_channel(n, cutoff, orientation, |ws| Ok(ws.kappa1a_terms()?.total()))?;
    let mut r = KappaResult::new(n, Channel::K1a, v, conv);
    if let Some(ws) = ws {
        let terms = ws.kappa1a_terms()?;
        if include_inverse_e_term {
            if fields.e0_au <= 0.0 {
                return Err(Error::Contract("the 1/E0 term needs E0 > 0".into()));
            }
            let inv = terms.inverse_e_term(fields.e0_au);
            r.inverse_e_term = Some(inv);
            r.value += inv;
            r.sign_vs_pa = if r.value >= 0.0 { SignVsPA::Parallel } else { SignVsPA::Antiparallel };
        }
        r.terms = Some(terms);
    }
    zeeman_flag(&mut r, n, fields, constants);
    Ok(r)
}

pub fn kappa1a(
    n: u32,
    fields: &FieldConfiguration,
    cutoff: &KappaCutoff,
    include_inverse_e_term: bool,
    constants: &PhysicalConstants,
) -> Result<KappaResult> {
    kappa1a_oriented(n, fields, cutoff, include_inverse_e_term, 1, constants)
}

/// All three channels sharing one workspace per cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaSet {
    pub n: u32,
    pub kappa1a: f64,
    pub kappa1b: f64,
    pub kappa2: f64,
    pub terms: Kappa1aTerms,
    pub convergence: Convergence,
}

impl KappaSet {
    pub fn total(&self) -> f64 {
        self.kappa1a + self.kappa1b + self.kappa2
    }
}

/// Cutoff doubling until every channel changes by less than the target;
/// `convergence.values` tracks κ₁ₐ.
pub fn kappa_all(n: u32, cutoff: &KappaCutoff) -> Result<KappaSet> {
    let mut delta = cutoff.delta0.max(1);
    let mut cutoffs = Vec::new();
    let mut history: Vec<[f64; 3]> = Vec::new();
    let mut achieved = f64::INFINITY;
    let terms = loop {
        let c = crate::perturb::cutoff_for(n, delta);
        let ws = KappaWorkspace::new(n, c, 1)?;
        let terms = ws.kappa1a_terms()?;
        let k = [terms.total(), ws.kappa1b(), ws.kappa2()];
        if let Some(prev) = history.last() {
            achieved = (0..3).map(|i| (k[i] - prev[i]).abs() / k[i].abs()).fold(0.0, f64::max);
        }
        cutoffs.push(c);
        history.push(k);
        if achieved < cutoff.target || delta * 2 > cutoff.delta_max {
            break terms;
        }
        delta *= 2;
    };
    let k = *history.last().expect("at least one evaluation");
    let convergence = Convergence {
        cutoffs,
        values: history.iter().map(|h| h[0]).collect(),
        achieved_rel: achieved,
        target_rel: cutoff.target,
        converged: achieved < cutoff.target,
    };
    Ok(KappaSet { n, kappa1a: k[0], kappa1b: k[1], kappa2: k[2], terms, convergence })
}

/// Least-squares slope of ln|y| against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Reference fit for κ₁ₐ: f(n) = 2.78 + 5.788e-2 (50/n)² - 1.05e-1 (50/n).
pub fn kappa1a_reference_fit(n: u32) -> f64 {
    let x = 50.0 / n as f64;
    2.78 + 5.788e-2 * x * x - 1.05e-1 * x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(polarizability_closed(1, 0), 4.5);
        assert_eq!(polarizability_closed(50, 49), 1.633_593_75e10);
        assert_eq!(polarizability_closed(2, 1), 156.0);
    }

    #[test]
    fn fit_value_at_50() {
        assert!((kappa1a_reference_fit(50) - 2.73288).abs() < 1e-5);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 20.0, 30.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.0)).collect();
        assert!((loglog_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }
}
