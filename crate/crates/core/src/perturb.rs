//! Rayleigh-Schrödinger perturbation theory for the Stark and Zeeman
//! couplings in a truncated bound-state basis.
//!
//! The Stark coupling conserves m, so everything is organised in m-blocks.
//! Inside a degenerate manifold the parabolic states diagonalise z and, for
//! fixed m, have distinct first-order shifts; the recursion below therefore
//! only needs non-degenerate denominators within a block.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{
    parabolic_coefficients, NormTag, ParabolicLabel, SphericalLabel, StateVector,
};
use crate::matelem::{angular_momentum, matrix_element, VectorOp};
use crate::sum::NeumaierSum;
use crate::units::PhysicalConstants;
use crate::{Error, Result};

/// Any in-manifold pair whose first-order shifts differ by less than this
/// (a.u. per unit field) is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Geometry {
    EAlongZBAlongX,
}

/// Static fields in SI with atomic-unit mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldConfiguration {
    pub e0_si: f64,
    pub b0_si: f64,
    pub e0_au: f64,
    pub b0_au: f64,
    pub geometry: Geometry,
}

impl FieldConfiguration {
    pub fn new(e0_si: f64, b0_si: f64, constants: &PhysicalConstants) -> Result<Self> {
        if !(e0_si >= 0.0 && b0_si >= 0.0) || !e0_si.is_finite() || !b0_si.is_finite() {
            return Err(Error::Domain(format!("fields must be finite and non-negative: E0={e0_si}, B0={b0_si}")));
        }
        Ok(Self {
            e0_si,
            b0_si,
            e0_au: constants.efield_to_au(e0_si),
            b0_au: constants.bfield_to_au(b0_si),
            geometry: Geometry::EAlongZBAlongX,
        })
    }

    /// (E0 n / alpha) / B0 in atomic units; the Zeeman coupling is weak
    /// compared to the Stark splitting when this is large.
    pub fn zeeman_margin(&self, n: u32, constants: &PhysicalConstants) -> f64 {
        self.e0_au * n as f64 / constants.alpha / self.b0_au
    }

    pub fn zeeman_weak(&self, n: u32, constants: &PhysicalConstants, margin: f64) -> bool {
        self.zeeman_margin(n, constants) >= margin
    }
}

/// Stark energy coefficients of E0^1, E0^2, E0^3 (a.u.).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarkEnergy {
    pub label: ParabolicLabel,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

/// Convergence record of a cutoff-doubling loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub cutoffs: Vec<u32>,
    pub values: Vec<f64>,
    pub achieved_rel: f64,
    pub target_rel: f64,
    pub converged: bool,
}

impl Convergence {
    pub fn cutoff(&self) -> u32 {
        *self.cutoffs.last().unwrap_or(&0)
    }
}

/// First-order shift (3/2) n (n1 - n2) E0 in a.u.
pub fn stark_shift_order1(p: ParabolicLabel, e0_au: f64) -> f64 {
    1.5 * p.n() as f64 * p.stark_index() as f64 * e0_au
}

/// All bound states with magnetic number m and n' ≤ n_max.
#[derive(Debug, Clone)]
pub struct Block {
    pub m: i32,
    pub n_max: u32,
    pub labels: Vec<SphericalLabel>,
    pub energies: Vec<f64>,
    index: HashMap<SphericalLabel, usize>,
}

impl Block {
    pub fn new(m: i32, n_max: u32) -> Self {
        let mut labels = Vec::new();
        for n in (m.unsigned_abs() + 1)..=n_max {
            for l in m.unsigned_abs()..n {
                labels.push(SphericalLabel { n, l, m });
            }
        }
        let energies = labels.iter().map(|l| l.energy()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        Self { m, n_max, labels, energies, index }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &SphericalLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Dense vector of a parabolic state of this block.
    pub fn parabolic_vector(&self, p: ParabolicLabel) -> Result<Vec<f64>> {
        if p.m != self.m || p.n() > self.n_max {
            return Err(Error::Contract(format!("parabolic state {p:?} not in block m={} n<={}", self.m, self.n_max)));
        }
        let mut v = vec![0.0; self.len()];
        for (label, c) in parabolic_coefficients(p) {
            v[self.index[&label]] = c;
        }
        Ok(v)
    }

    pub fn to_state_vector(&self, v: &[f64], energy: Option<f64>, norm_tag: NormTag) -> StateVector {
        StateVector {
            terms: self
                .labels
                .iter()
                .zip(v)
                .filter(|(_, c)| **c != 0.0)
                .map(|(l, c)| (*l, Complex64::new(*c, 0.0)))
                .collect(),
            energy,
            norm_tag,
        }
    }

    /// H0 + E z as a dense matrix (finite-field oracle).
    pub fn dense_hamiltonian(&self, z: &SparseOp, e_au: f64) -> DMatrix<f64> {
        let mut h = DMatrix::<f64>::zeros(self.len(), self.len());
        for (i, row) in z.rows.iter().enumerate() {
            for (j, v) in row {
                h[(i, *j)] += e_au * v;
            }
            h[(i, i)] += self.energies[i];
        }
        h
    }
}

/// Real Cartesian operator components used by the Stark/Zeeman algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RealComponent {
    /// z
    Z,
    /// r̂_z
    UnitZ,
    /// y component of Δ(r̂)·p (real in the spherical basis)
    DeltaPY,
    /// L_x
    LX,
}

fn real_element(c: RealComponent, a: &SphericalLabel, b: &SphericalLabel) -> Result<f64> {
    Ok(match c {
        RealComponent::Z => matrix_element(VectorOp::Position, a, b)?.z.re,
        RealComponent::UnitZ => matrix_element(VectorOp::UnitVector, a, b)?.z.re,
        RealComponent::DeltaPY => matrix_element(VectorOp::DeltaDotP, a, b)?.y.re,
        RealComponent::LX => angular_momentum(a, b).x.re,
    })
}

/// Sparse operator between two blocks, rows indexed by the bra block.
#[derive(Debug, Clone)]
pub struct SparseOp {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseOp {
    pub fn build(c: RealComponent, bra: &Block, ket: &Block) -> Result<Self> {
        let mut by_l: HashMap<u32, Vec<usize>> = HashMap::new();
        for (j, lab) in ket.labels.iter().enumerate() {
            by_l.entry(lab.l).or_default().push(j);
        }
        let rows: Result<Vec<Vec<(usize, f64)>>> = bra
            .labels
            .par_iter()
            .map(|a| {
                let mut row = Vec::new();
                let candidates: Vec<u32> = match c {
                    RealComponent::LX => vec![a.l],
                    _ => {
                        let mut v = vec![a.l + 1];
                        if a.l > 0 {
                            v.push(a.l - 1);
                        }
                        v
                    }
                };
                for l in candidates {
                    if let Some(js) = by_l.get(&l) {
                        for &j in js {
                            let b = &ket.labels[j];
                            if c == RealComponent::LX && b.n != a.n {
                                continue;
                            }
                            let v = real_element(c, a, b)?;
                            if v != 0.0 {
                                row.push((j, v));
                            }
                        }
                    }
                }
                Ok(row)
            })
            .collect();
        Ok(Self { rows: rows? })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                let mut s = NeumaierSum::new();
                for (j, v) in row {
                    s.add(v * x[*j]);
                }
                s.value()
            })
            .collect()
    }

    /// ⟨u| O |v⟩ for real vectors.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = NeumaierSum::new();
        for (i, row) in self.rows.iter().enumerate() {
            if u[i] == 0.0 {
                continue;
            }
            for (j, val) in row {
                s.add(u[i] * val * v[*j]);
            }
        }
        s.value()
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    let mut s = NeumaierSum::new();
    for (a, b) in u.iter().zip(v) {
        s.add(a * b);
    }
    s.value()
}

/// Rayleigh-Schrödinger series of one parabolic state per unit field:
/// |ψ(E)⟩ = Σ E^k ψ_k, E(E) = Σ E^k λ_k.
#[derive(Debug, Clone)]
pub struct StarkSeries {
    pub base: ParabolicLabel,
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Labels of the manifold that mixed in through the in-manifold terms.
    pub partners: Vec<ParabolicLabel>,
}

impl StarkSeries {
    /// Σ_k E^k ψ_k truncated at `order`.
    pub fn vector_at(&self, e_au: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.vectors[0].len()];
        for (k, v) in self.vectors.iter().enumerate().take(order + 1) {
            let f = e_au.powi(k as i32);
            for (o, x) in out.iter_mut().zip(v) {
                *o += f * x;
            }
        }
        out
    }

    pub fn energy_at(&self, e_au: f64, order: usize) -> f64 {
        self.energies.iter().enumerate().take(order + 1).map(|(k, l)| l * e_au.powi(k as i32)).sum()
    }
}

/// Series of `p` through vector order `order` (energies through order+1),
/// using the Stark operator `z` of `block`.
pub fn stark_series(block: &Block, z: &SparseOp, p: ParabolicLabel, order: usize) -> Result<StarkSeries> {
    let n = p.n();
    let e_n = -0.5 / (n as f64 * n as f64);
    let va = 1.5 * n as f64 * p.stark_index() as f64;
    let k_total = n - 1 - p.m.unsigned_abs();
    let partners: Vec<ParabolicLabel> = (0..=k_total)
        .map(|n1| ParabolicLabel::new(n1, k_total - n1, p.m))
        .filter(|q| *q != p)
        .collect();
    let a_vec = block.parabolic_vector(p)?;
    let mut partner_vecs = Vec::with_capacity(partners.len());
    for q in &partners {
        let vb = 1.5 * n as f64 * q.stark_index() as f64;
        if (vb - va).abs() < DEGENERACY_TOL {
            return Err(Error::Physics(format!("degenerate first-order shifts for {p:?} and {q:?} in one block")));
        }
        partner_vecs.push((block.parabolic_vector(*q)?, vb));
    }
    let in_manifold: Vec<bool> = block.labels.iter().map(|l| l.n == n).collect();

    let mut energies = vec![e_n, va];
    let mut vectors = vec![a_vec.clone()];
    for k in 1..=order {
        let mut rhs: Vec<f64> = z.apply(&vectors[k - 1]).into_iter().map(|x| -x).collect();
        for i in 1..=k {
            let lam = energies[i];
            for (r, x) in rhs.iter_mut().zip(&vectors[k - i]) {
                *r += lam * x;
            }
        }
        let mut psi: Vec<f64> = rhs
            .iter()
            .enumerate()
            .map(|(i, r)| if in_manifold[i] { 0.0 } else { r / (block.energies[i] - e_n) })
            .collect();
        let vq = z.apply(&psi);
        for (bvec, vb) in &partner_vecs {
            let mut num = -dot(bvec, &vq);
            for i in 2..=k {
                num += energies[i] * dot(bvec, &vectors[k + 1 - i]);
            }
            let c = num / (vb - va);
            for (x, b) in psi.iter_mut().zip(bvec) {
                *x += c * b;
            }
        }
        let mut own = 0.0;
        for i in 1..k {
            own -= 0.5 * dot(&vectors[i], &vectors[k - i]);
        }
        for (x, a) in psi.iter_mut().zip(&a_vec) {
            *x += own * a;
        }
        let mut lam = z.bilinear(&a_vec, &psi) - energies[1] * dot(&a_vec, &psi);
        for i in 2..=k {
            lam -= energies[i] * dot(&a_vec, &vectors[k + 1 - i]);
        }
        vectors.push(psi);
        energies.push(lam);
    }
    Ok(StarkSeries { base: p, energies, vectors, partners })
}

/// Basis cutoff n_max for a manifold n and half-width Δ.
pub fn cutoff_for(n: u32, delta: u32) -> u32 {
    n + delta
}

/// Runs `eval(n_max)` for n_max = n+Δ0, n+2Δ0, ... until the relative
/// change drops below `target` or Δ exceeds `delta_max`.
pub fn converge<F>(n: u32, delta0: u32, delta_max: u32, target: f64, mut eval: F) -> Result<(f64, Convergence)>
where
    F: FnMut(u32) -> Result<f64>,
{
    let mut delta = delta0.max(1);
    let mut cutoffs = Vec::new();
    let mut values = Vec::new();
    let mut achieved = f64::INFINITY;
    loop {
        let c = cutoff_for(n, delta);
        let v = eval(c)?;
        if let Some(prev) = values.last() {
            let prev: f64 = *prev;
            achieved = (v - prev).abs() / v.abs().max(f64::MIN_POSITIVE);
        }
        cutoffs.push(c);
        values.push(v);
        if achieved < target || delta * 2 > delta_max {
            break;
        }
        delta *= 2;
    }
    let value = *values.last().unwrap();
    Ok((value, Convergence { cutoffs, values, achieved_rel: achieved, target_rel: target, converged: achieved < target }))
}

/// E^(2), E^(3) of `p` with the block truncated at `n_max`.
pub fn stark_energy_at_cutoff(p: ParabolicLabel, n_max: u32) -> Result<StarkEnergy> {
    if n_max < p.n() {
        return Err(Error::Contract("basis cutoff below the state's manifold".into()));
    }
    let block = Block::new(p.m, n_max);
    let z = SparseOp::build(RealComponent::Z, &block, &block)?;
    let s = stark_series(&block, &z, p, 2)?;
    Ok(StarkEnergy { label: p, e1: s.energies[1], e2: s.energies[2], e3: s.energies[3] })
}

/// Stark coefficients with cutoff doubling on e2 (target 1e-6 relative);
/// `basis_cutoff` is the starting n_max.
pub fn stark_shift_high_orders(p: ParabolicLabel, basis_cutoff: u32) -> Result<(StarkEnergy, Convergence)> {
    let n = p.n();
    if basis_cutoff < n + 10 {
        return Err(Error::Contract(format!("basis cutoff {basis_cutoff} below n+10")));
    }
    let mut last = None;
    let (_, conv) = converge(n, basis_cutoff - n, 8 * (basis_cutoff - n), 1e-6, |c| {
        let e = stark_energy_at_cutoff(p, c)?;
        last = Some(e);
        Ok(e.e2)
    })?;
    let mut e = last.expect("at least one evaluation");
    e.e1 = 1.5 * n as f64 * p.stark_index() as f64;
    Ok((e, conv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaseLabel {
    Parabolic(ParabolicLabel),
    Spherical(SphericalLabel),
}

/// A field-perturbed state with its bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedState {
    pub base: BaseLabel,
    pub order: usize,
    pub vector: StateVector,
    pub field: FieldConfiguration,
    /// In-manifold labels left out because their first-order shift equals
    /// the base state's.
    pub skipped: Vec<ParabolicLabel>,
    pub basis_cutoff: u32,
}

/// |ℓ, E0⟩ through `order` ∈ {1, 2} in the field `field`.
pub fn stark_state(p: ParabolicLabel, field: &FieldConfiguration, order: usize, basis_cutoff: u32) -> Result<PerturbedState> {
    if !(1..=2).contains(&order) {
        return Err(Error::Contract(format!("stark_state order must be 1 or 2, got {order}")));
    }
    let n = p.n();
    if basis_cutoff < n {
        return Err(Error::Contract("basis cutoff below the state's manifold".into()));
    }
    let block = Block::new(p.m, basis_cutoff);
    let z = SparseOp::build(RealComponent::Z, &block, &block)?;
    let series = stark_series(&block, &z, p, order)?;
    let e = field.e0_au;
    let v = series.vector_at(e, order);
    let energy = series.energy_at(e, order + 1);
    // States of the manifold with other m and the same shift never mix
    // with p through z; they are recorded as skipped.
    let skipped = crate::basis::subspace(n)
        .into_iter()
        .filter(|q| q.m != p.m && q.stark_index() == p.stark_index())
        .collect();
    Ok(PerturbedState {
        base: BaseLabel::Parabolic(p),
        order,
        vector: block.to_state_vector(&v, Some(energy), NormTag::FirstOrderTruncated),
        field: *field,
        skipped,
        basis_cutoff,
    })
}

/// Adds the first-order Zeeman admixture (B/2c) Σ_j |j⟩⟨j|L_x|s⟩/(E_s - E_j).
/// In-manifold partners are parabolic states with Stark-shifted energies;
/// other manifolds use field-free spherical states.
pub fn zeeman_state(s: &PerturbedState, b0_au: f64, constants: &PhysicalConstants) -> Result<PerturbedState> {
    if b0_au == 0.0 {
        return Ok(s.clone());
    }
    let p = match s.base {
        BaseLabel::Parabolic(p) => p,
        BaseLabel::Spherical(_) => {
            return Err(Error::Contract("zeeman_state needs a Stark (parabolic) base state".into()))
        }
    };
    let n = p.n();
    let e = s.field.e0_au;
    if !s.field.zeeman_weak(n, constants, 1.0) {
        return Err(Error::Contract("Zeeman coupling not weak compared to the Stark splitting".into()));
    }
    let coupling = b0_au / (2.0 * constants.c_au());
    let e_s = s.vector.energy.ok_or_else(|| Error::Contract("state lacks energy".into()))?;
    let mut lx: HashMap<SphericalLabel, f64> = HashMap::new();
    for (lab, c) in &s.vector.terms {
        for dm in [-1i32, 1] {
            let m2 = lab.m + dm;
            if m2.unsigned_abs() > lab.l {
                continue;
            }
            let j = SphericalLabel { m: m2, ..*lab };
            *lx.entry(j).or_default() += angular_momentum(&j, lab).x.re * c.re;
        }
    }
    let mut terms: HashMap<SphericalLabel, f64> = s.vector.terms.iter().map(|(l, c)| (*l, c.re)).collect();
    let mut skipped = s.skipped.clone();
    for q in crate::basis::subspace(n).into_iter().filter(|q| q.m.abs_diff(p.m) == 1) {
        let coeffs = parabolic_coefficients(q);
        let amp: f64 = coeffs.iter().map(|(l, c)| c * lx.get(l).copied().unwrap_or(0.0)).sum::<f64>() * coupling;
        let dv = 1.5 * n as f64 * (p.stark_index() - q.stark_index()) as f64 * e;
        if dv.abs() < DEGENERACY_TOL * e.max(1e-300) || dv == 0.0 {
            if amp.abs() > 1e-14 * coupling {
                return Err(Error::Physics(format!("vanishing Zeeman denominator between {p:?} and {q:?}")));
            }
            skipped.push(q);
            continue;
        }
        for (l, c) in coeffs {
            *terms.entry(l).or_default() += c * amp / dv;
        }
    }
    for (j, v) in &lx {
        if j.n == n {
            continue;
        }
        *terms.entry(*j).or_default() += coupling * v / (e_s - j.energy());
    }
    let mut list: Vec<(SphericalLabel, Complex64)> =
        terms.into_iter().filter(|(_, c)| *c != 0.0).map(|(l, c)| (l, Complex64::new(c, 0.0))).collect();
    list.sort_by_key(|t| t.0);
    Ok(PerturbedState {
        base: s.base,
        order: s.order,
        vector: StateVector { terms: list, energy: Some(e_s), norm_tag: NormTag::FirstOrderTruncated },
        field: FieldConfiguration { b0_au, ..s.field },
        skipped,
        basis_cutoff: s.basis_cutoff,
    })
}
