//! Hydrogen bound-state labels, energies, Clebsch-Gordan coefficients and
//! the parabolic <-> spherical transformation.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sum::NeumaierSum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SphericalLabel {
    pub n: u32,
    pub l: u32,
    pub m: i32,
}

impl SphericalLabel {
    pub fn new(n: u32, l: u32, m: i32) -> Result<Self> {
        if n == 0 || l >= n || m.unsigned_abs() > l {
            return Err(Error::Domain(format!("invalid spherical label ({n}, {l}, {m})")));
        }
        Ok(Self { n, l, m })
    }

    pub fn energy(&self) -> f64 {
        -0.5 / (self.n as f64 * self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParabolicLabel {
    pub n1: u32,
    pub n2: u32,
    pub m: i32,
}

impl ParabolicLabel {
    pub fn new(n1: u32, n2: u32, m: i32) -> Self {
        Self { n1, n2, m }
    }

    pub fn n(&self) -> u32 {
        self.n1 + self.n2 + self.m.unsigned_abs() + 1
    }

    /// n1 - n2, the label of the first-order Stark shift.
    pub fn stark_index(&self) -> i32 {
        self.n1 as i32 - self.n2 as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormTag {
    Normalized,
    FirstOrderTruncated,
}

/// Coefficient expansion over spherical labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub terms: Vec<(SphericalLabel, Complex64)>,
    /// Energy in Hartree, when the state is an (approximate) eigenstate.
    pub energy: Option<f64>,
    pub norm_tag: NormTag,
}

impl StateVector {
    pub fn single(label: SphericalLabel) -> Self {
        Self {
            terms: vec![(label, Complex64::new(1.0, 0.0))],
            energy: Some(label.energy()),
            norm_tag: NormTag::Normalized,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut s = NeumaierSum::new();
        for (_, c) in &self.terms {
            s.add(c.norm_sqr());
        }
        s.value()
    }

    pub fn coefficient(&self, label: &SphericalLabel) -> Complex64 {
        self.terms
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }
}

/// Field-free energy -1/(2 n^2) in Hartree.
pub fn energy(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("principal quantum number must be positive".into()));
    }
    Ok(-0.5 / (n as f64 * n as f64))
}

pub fn circular_state(n: u32) -> Result<SphericalLabel> {
    if n == 0 {
        return Err(Error::Domain("principal quantum number must be positive".into()));
    }
    Ok(SphericalLabel { n, l: n - 1, m: n as i32 - 1 })
}

/// All parabolic labels of the manifold n, ordered by m then n1.
pub fn subspace(n: u32) -> Vec<ParabolicLabel> {
    let mut out = Vec::with_capacity((n * n) as usize);
    let top = n as i32 - 1;
    for m in -top..=top {
        let k = n - 1 - m.unsigned_abs();
        for n1 in 0..=k {
            out.push(ParabolicLabel::new(n1, k - n1, m));
        }
    }
    out
}

const LN_FACT_MAX: usize = 8192;

pub fn ln_factorial(k: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_MAX + 1);
        let mut acc = NeumaierSum::new();
        t.push(0.0);
        for i in 1..=LN_FACT_MAX {
            acc.add((i as f64).ln());
            t.push(acc.value());
        }
        t
    });
    assert!(k <= LN_FACT_MAX, "ln_factorial argument {k} out of table range");
    table[k]
}

/// Clebsch-Gordan coefficient with all arguments doubled
/// (`dj1 = 2 j1`, ...). Returns 0 when selection rules fail.
pub fn clebsch_gordan_doubled(dj1: i32, dm1: i32, dj2: i32, dm2: i32, dj: i32, dm: i32) -> f64 {
    if dm != dm1 + dm2 || dj1 < 0 || dj2 < 0 || dj < 0 {
        return 0.0;
    }
    if dm1.abs() > dj1 || dm2.abs() > dj2 || dm.abs() > dj {
        return 0.0;
    }
    if (dj1 + dm1) % 2 != 0 || (dj2 + dm2) % 2 != 0 || (dj + dm) % 2 != 0 {
        return 0.0;
    }
    if dj < (dj1 - dj2).abs() || dj > dj1 + dj2 || (dj1 + dj2 + dj) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i32| -> usize { (x / 2) as usize };
    let ln_pref = 0.5
        * (((dj + 1) as f64).ln()
            + ln_factorial(h(dj1 + dj2 - dj))
            + ln_factorial(h(dj1 - dj2 + dj))
            + ln_factorial(h(-dj1 + dj2 + dj))
            - ln_factorial(h(dj1 + dj2 + dj) + 1)
            + ln_factorial(h(dj1 + dm1))
            + ln_factorial(h(dj1 - dm1))
            + ln_factorial(h(dj2 + dm2))
            + ln_factorial(h(dj2 - dm2))
            + ln_factorial(h(dj + dm))
            + ln_factorial(h(dj - dm)));
    let a = (dj1 + dj2 - dj) / 2;
    let b = (dj1 - dm1) / 2;
    let c = (dj2 + dm2) / 2;
    let d = (dj - dj2 + dm1) / 2;
    let e = (dj - dj1 - dm2) / 2;
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let mut s = NeumaierSum::new();
    for k in k_min..=k_max {
        let ln_den = ln_factorial(k as usize)
            + ln_factorial((a - k) as usize)
            + ln_factorial((b - k) as usize)
            + ln_factorial((c - k) as usize)
            + ln_factorial((d + k) as usize)
            + ln_factorial((e + k) as usize);
        let term = (ln_pref - ln_den).exp();
        s.add(if k % 2 == 0 { term } else { -term });
    }
    s.value()
}

fn doubled(x: f64) -> Result<i32> {
    let d = 2.0 * x;
    if (d - d.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!("{x} is not a multiple of 1/2")));
    }
    Ok(d.round() as i32)
}

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    let (dj1, dm1, dj2, dm2, dj, dm) =
        (doubled(j1)?, doubled(m1)?, doubled(j2)?, doubled(m2)?, doubled(j)?, doubled(m)?);
    if (dj1 + dm1) % 2 != 0 || (dj2 + dm2) % 2 != 0 || (dj + dm) % 2 != 0 {
        return Err(Error::Domain("j and m must both be integer or both half-integer".into()));
    }
    Ok(clebsch_gordan_doubled(dj1, dm1, dj2, dm2, dj, dm))
}

/// Real coefficients of |n1 n2 m> over |n l m>, l = |m|..n-1.
pub fn parabolic_coefficients(p: ParabolicLabel) -> Vec<(SphericalLabel, f64)> {
    let n = p.n();
    let dj = n as i32 - 1;
    let dm1 = p.m - p.stark_index();
    let dm2 = p.m + p.stark_index();
    (p.m.unsigned_abs()..n)
        .map(|l| {
            let c = clebsch_gordan_doubled(dj, dm1, dj, dm2, 2 * l as i32, 2 * p.m);
            (SphericalLabel { n, l, m: p.m }, c)
        })
        .collect()
}

pub fn parabolic_to_spherical(p: ParabolicLabel) -> StateVector {
    let n = p.n();
    StateVector {
        terms: parabolic_coefficients(p)
            .into_iter()
            .map(|(l, c)| (l, Complex64::new(c, 0.0)))
            .collect(),
        energy: Some(-0.5 / (n as f64 * n as f64)),
        norm_tag: NormTag::Normalized,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energies() {
        assert_eq!(energy(1).unwrap(), -0.5);
        assert_eq!(energy(2).unwrap(), -0.125);
        assert!((energy(50).unwrap() + 2.0e-4).abs() < 1e-18);
        assert!(energy(0).is_err());
    }

    #[test]
    fn cg_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1.0, 0.0).unwrap() - s).abs() < 1e-14);
        assert!((clebsch_gordan(1.0, 1.0, 1.0, 0.0, 2.0, 1.0).unwrap() - s).abs() < 1e-14);
        assert_eq!(clebsch_gordan(1.0, 1.0, 1.0, 0.0, 2.0, 0.0).unwrap(), 0.0);
        assert!(clebsch_gordan(0.5, 1.0, 0.5, 0.5, 1.0, 1.0).is_err());
        assert!(clebsch_gordan(0.3, 0.3, 0.5, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn subspace_counts() {
        assert_eq!(subspace(1), vec![ParabolicLabel::new(0, 0, 0)]);
        assert_eq!(subspace(2).len(), 4);
        assert_eq!(subspace(50).len(), 2500);
    }

    #[test]
    fn circular_labels() {
        assert_eq!(circular_state(1).unwrap(), SphericalLabel { n: 1, l: 0, m: 0 });
        assert_eq!(circular_state(50).unwrap(), SphericalLabel { n: 50, l: 49, m: 49 });
    }

    #[test]
    fn two_term_expansion() {
        let v = parabolic_to_spherical(ParabolicLabel::new(1, 0, 0));
        assert_eq!(v.terms.len(), 2);
        assert!((v.norm_sqr() - 1.0).abs() < 1e-14);
    }
}
