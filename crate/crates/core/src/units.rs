//! Physical constants (CODATA 2018) and SI <-> atomic-unit conversions.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub alpha: f64,
    pub a0: f64,
    pub c0: f64,
    pub hbar: f64,
    pub e_charge: f64,
    pub m_e: f64,
    pub m_p: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    alpha: 7.297_352_569_3e-3,
    a0: 5.291_772_109_03e-11,
    c0: 299_792_458.0,
    hbar: 1.054_571_817e-34,
    e_charge: 1.602_176_634e-19,
    m_e: 9.109_383_701_5e-31,
    m_p: 1.672_621_923_69e-27,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA
    }
}

impl PhysicalConstants {
    /// Speed of light in atomic units, 1/alpha.
    pub fn c_au(&self) -> f64 {
        1.0 / self.alpha
    }

    /// Hartree energy in J.
    pub fn hartree(&self) -> f64 {
        self.hbar * self.hbar / (self.m_e * self.a0 * self.a0)
    }

    /// Atomic unit of electric field in V/m.
    pub fn field_unit(&self) -> f64 {
        self.hartree() / (self.e_charge * self.a0)
    }

    /// Atomic unit of time in s.
    pub fn time_unit(&self) -> f64 {
        self.hbar / self.hartree()
    }

    /// Atomic unit of momentum in kg m/s.
    pub fn momentum_unit(&self) -> f64 {
        self.hbar / self.a0
    }

    /// Gaussian atomic unit of magnetic field expressed in tesla.
    /// In these units B and E share the unit e/a0^2, so 1 a.u. of B
    /// corresponds to field_unit / c0 tesla.
    pub fn magnetic_unit(&self) -> f64 {
        self.field_unit() / self.c0
    }

    pub fn efield_to_au(&self, volts_per_m: f64) -> f64 {
        volts_per_m / self.field_unit()
    }

    pub fn bfield_to_au(&self, tesla: f64) -> f64 {
        tesla / self.magnetic_unit()
    }

    /// Relative mismatch of the stored set against a0 = hbar/(alpha m_e c0).
    pub fn consistency(&self) -> f64 {
        let a0 = self.hbar / (self.alpha * self.m_e * self.c0);
        (a0 - self.a0).abs() / self.a0
    }
}

/// Two-body masses of the atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomSpec {
    pub m1: f64,
    pub m2: f64,
}

impl AtomSpec {
    pub fn new(m1: f64, m2: f64) -> crate::Result<Self> {
        if !(m1 > m2 && m2 > 0.0) {
            return Err(crate::Error::Domain(format!(
                "masses must satisfy m1 > m2 > 0, got m1={m1}, m2={m2}"
            )));
        }
        Ok(Self { m1, m2 })
    }

    pub fn hydrogen() -> Self {
        Self { m1: CODATA.m_p, m2: CODATA.m_e }
    }

    pub fn total(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn reduced(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    pub fn delta_m(&self) -> f64 {
        self.m1 - self.m2
    }

    pub fn mass_ratio(&self) -> f64 {
        self.m1 / self.m2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_set_is_consistent() {
        assert!(CODATA.consistency() < 1e-9);
    }

    #[test]
    fn field_unit_matches_codata() {
        let f = CODATA.field_unit();
        assert!((f / 5.142_206_747_63e11 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn reduced_mass() {
        let a = AtomSpec::hydrogen();
        let mu = a.m1 * a.m2 / a.total();
        assert!((a.reduced() - mu).abs() / mu < 1e-12);
        assert!(AtomSpec::new(1.0, 2.0).is_err());
    }
}
