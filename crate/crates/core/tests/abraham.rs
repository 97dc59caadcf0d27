//! Abraham momentum and the three κ channels against closed forms,
//! finite-field diagonalisation and symmetry checks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rydqed::abraham::{
    abraham_momentum, abraham_momentum_signed, kappa1a, kappa1a_oriented, kappa1b, kappa2, kappa_all, polarizability_closed,
    polarizability_sum, polarizability_sum_at_cutoff, KappaCutoff, KappaWorkspace, SignVsPA,
};
use rydqed::basis::{ParabolicLabel, SphericalLabel};
use rydqed::matelem::{angular_momentum, delta_dot_p, unit_rvec};
use rydqed::perturb::{Block, FieldConfiguration, RealComponent, SparseOp};
use rydqed::units::CODATA;

fn follow(h: &DMatrix<f64>, v0: &[f64]) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let target = DVector::from_column_slice(v0);
    let (k, ov) = (0..eig.eigenvalues.len())
        .map(|k| (k, eig.eigenvectors.column(k).dot(&target)))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().map(|x| x * ov.signum()).collect())
}

fn fields(e0: f64, b0: f64) -> FieldConfiguration {
    FieldConfiguration::new(e0, b0, &CODATA).unwrap()
}

proptest! {
    #[test]
    fn polarizability_closed_is_even_in_m(n in 1u32..80, k in 0u32..80) {
        let m = (k % n) as i32;
        let a = polarizability_closed(n, m);
        prop_assert_eq!(a, polarizability_closed(n, -m));
        prop_assert!(a > 0.0);
    }

    #[test]
    fn abraham_momentum_is_bilinear(n in 2u32..60, e in 0.0f64..1e4, b in 1e-6f64..1e-2) {
        let p = abraham_momentum_signed(n, e, b, &CODATA);
        let flipped = abraham_momentum_signed(n, e, -b, &CODATA);
        prop_assert_eq!(p.vector_si.y, -flipped.vector_si.y);
        prop_assert_eq!(p.vector_si.x, 0.0);
        prop_assert_eq!(p.vector_si.z, 0.0);
        let doubled = abraham_momentum_signed(n, 2.0 * e, b, &CODATA);
        prop_assert!((doubled.vector_si.y - 2.0 * p.vector_si.y).abs() <= 1e-12 * p.vector_si.y.abs());
    }
}

#[test]
fn polarizability_sum_falls_short_at_n1() {
    let v = polarizability_sum_at_cutoff(1, 200).unwrap();
    assert!(v < 4.5 && v > 3.6, "{v}");
    // the bound-state tail decays as C^-2, so the doubling loop flags it
    let (w, conv) = polarizability_sum(1, 11).unwrap();
    assert!(w < 4.5);
    assert!(!conv.converged, "{conv:?}");
    assert!(conv.achieved_rel < 1e-4);
}

#[test]
fn polarizability_sum_near_closed_form_for_rydberg_states() {
    for n in [10u32, 15, 20] {
        let (v, conv) = polarizability_sum(n, n + 10).unwrap();
        let closed = polarizability_closed(n, n as i32 - 1);
        assert!((v / closed - 1.0).abs() < 0.02, "n={n}: {v} vs {closed}");
        if n == 15 {
            assert!(conv.converged, "{conv:?}");
            let c = *conv.cutoffs.last().unwrap();
            let doubled = polarizability_sum_at_cutoff(n, n + 2 * (c - n)).unwrap();
            assert!((doubled / v - 1.0).abs() < 1e-6);
        }
    }
    assert!(polarizability_sum(15, 20).is_err());
}

#[test]
fn abraham_momentum_geometry() {
    let zero = abraham_momentum(50, &fields(0.0, 1e-3), &CODATA);
    assert_eq!(zero.vector_si.norm(), 0.0);
    let p = abraham_momentum(50, &fields(100.0, 1e-3), &CODATA);
    assert_eq!(p.polarizability_used, 1.633_593_75e10);
    assert!(p.vector_si.y > 0.0);
    // α_zz E0 B0 in SI: 4πε0 a0³ α_zz E0 B0
    let eps0 = 8.854_187_812_8e-12;
    let a0: f64 = 5.291_772_109_03e-11;
    let si = 4.0 * std::f64::consts::PI * eps0 * a0.powi(3) * 1.633_593_75e10 * 100.0 * 1e-3;
    assert!((p.vector_si.y / si - 1.0).abs() < 1e-6, "{} vs {si}", p.vector_si.y);
}

#[test]
fn kappa2_linear_response_and_sign() {
    let cut = KappaCutoff::fixed(20);
    let r = kappa2(10, &fields(100.0, 1e-4), &cut).unwrap();
    assert!(r.value > 0.0);
    assert_eq!(r.sign_vs_pa, SignVsPA::Parallel);
    assert!(r.linear_response_deviation.unwrap() < 0.01);
    assert!(r.flags.iter().all(|f| !f.contains("nonlinear")));
    let half = kappa2(10, &fields(50.0, 1e-4), &cut).unwrap();
    assert!((half.value / r.value - 1.0).abs() < 0.01);
}

#[test]
fn kappa1b_is_independent_of_b0_and_antiparallel() {
    let cut = KappaCutoff::fixed(20);
    let a = kappa1b(10, &fields(100.0, 1e-4), &cut, &CODATA).unwrap();
    let b = kappa1b(10, &fields(100.0, 5e-5), &cut, &CODATA).unwrap();
    assert!(a.value < 0.0);
    assert_eq!(a.sign_vs_pa, SignVsPA::Antiparallel);
    assert!((a.value / b.value - 1.0).abs() < 0.01);
}

#[test]
fn kappa1a_terms_and_time_reversal() {
    let cut = KappaCutoff::fixed(20);
    let f = fields(100.0, 1e-4);
    let up = kappa1a(10, &f, &cut, false, &CODATA).unwrap();
    let down = kappa1a_oriented(10, &f, &cut, false, -1, &CODATA).unwrap();
    assert!(up.value > 0.0);
    assert_eq!(up.sign_vs_pa, SignVsPA::Parallel);
    assert!((up.value - down.value).abs() < 1e-10 * up.value.abs());
    let t = up.terms.unwrap();
    assert!((t.total() - up.value).abs() < 1e-15);
    assert!(t.even_residual.abs() < 1e-10 * t.total().abs());
    assert!(t.first > 0.0 && t.first.abs() > t.e2.abs());
}

#[test]
fn inverse_e_term_scales_as_inverse_square_field() {
    let cut = KappaCutoff::fixed(12);
    let a = kappa1a(10, &fields(100.0, 1e-4), &cut, true, &CODATA).unwrap();
    let b = kappa1a(10, &fields(200.0, 1e-4), &cut, true, &CODATA).unwrap();
    let (ia, ib) = (a.inverse_e_term.unwrap(), b.inverse_e_term.unwrap());
    assert!((ia / ib - 4.0).abs() < 1e-9);
    assert!(kappa1a(10, &fields(0.0, 1e-4), &cut, true, &CODATA).is_err());
}

/// κ₁ₐ as the field-linear coefficient of the exact-eigenstate sum
/// Σ_j ⟨C|Δp_y|j⟩⟨j|L_x|C⟩/(E_C - E_j) over the two in-manifold partners.
#[test]
fn kappa1a_matches_finite_field_diagonalisation() {
    for n in [4u32, 5] {
        let n_max = n + 10;
        let m = n as i32 - 1;
        let circ = Block::new(m, n_max);
        let side = Block::new(m - 1, n_max);
        let zc = SparseOp::build(RealComponent::Z, &circ, &circ).unwrap();
        let zs = SparseOp::build(RealComponent::Z, &side, &side).unwrap();
        let dpy = SparseOp::build(RealComponent::DeltaPY, &circ, &side).unwrap();
        let lx = SparseOp::build(RealComponent::LX, &side, &circ).unwrap();
        let c0 = circ.parabolic_vector(ParabolicLabel::new(0, 0, m)).unwrap();
        let norm = 2.0 * polarizability_closed(n, m);
        let sum = |e: f64| {
            let (ec, vc) = follow(&circ.dense_hamiltonian(&zc, e), &c0);
            let mut acc = 0.0;
            for p in [ParabolicLabel::new(1, 0, m - 1), ParabolicLabel::new(0, 1, m - 1)] {
                let (ej, vj) = follow(&side.dense_hamiltonian(&zs, e), &side.parabolic_vector(p).unwrap());
                acc += dpy.bilinear(&vc, &vj) * lx.bilinear(&vj, &vc) / (ec - ej);
            }
            acc / norm
        };
        // E·S(E) is even in E: fit c0 + c1 E² + c2 E⁴ in the scaled field ε = E n⁵
        let scale = (n as f64).powi(5);
        let eps: [f64; 4] = [0.01, 0.02, 0.03, 0.04];
        let design = DMatrix::from_fn(eps.len(), 3, |i, j| eps[i].powi(2 * j as i32));
        let rhs = DVector::from_iterator(eps.len(), eps.iter().map(|&x| x / scale * sum(x / scale)));
        for &x in &eps {
            let e = x / scale;
            assert!((e * sum(e) - (-e) * sum(-e)).abs() < 1e-12 * (e * sum(e)).abs());
        }
        let coef = design.svd(true, true).solve(&rhs, 1e-14).unwrap();
        let fit = [coef[0], coef[1] * scale * scale];
        let t = KappaWorkspace::new(n, n_max, 1).unwrap().kappa1a_terms().unwrap();
        assert!((fit[1] / t.total() - 1.0).abs() < 1e-4, "n={n}: {} vs {}", fit[1], t.total());
        assert!((fit[0] / t.inverse_e_coefficient - 1.0).abs() < 1e-6, "n={n}: {} vs {}", fit[0], t.inverse_e_coefficient);
    }
}

/// The x̂ and ẑ components of every channel vanish: Δ(r̂)·p between the
/// circular block and its m ± 1 neighbours has no real x part and no z part,
/// L_x is real, and r̂_y has no elements inside one m block.
#[test]
fn channels_point_along_y() {
    let n = 6u32;
    let m = n as i32 - 1;
    let circ = Block::new(m, n + 6);
    for dm in [-1, 1] {
        let other = Block::new(m + dm, n + 6);
        for a in &circ.labels {
            for b in &other.labels {
                let d = delta_dot_p(a, b).unwrap();
                let scale = d.y.re.abs().max(1e-12);
                assert!(d.x.re.abs() < 1e-10 * scale && d.z.norm() < 1e-10 * scale, "{a:?} {b:?} {d:?}");
                assert!(angular_momentum(b, a).x.im.abs() < 1e-14);
            }
        }
    }
    for a in &circ.labels {
        for b in &circ.labels {
            assert!(unit_rvec(a, b).unwrap().y.norm() < 1e-14);
        }
    }
    let c = SphericalLabel { n, l: n - 1, m };
    assert!(circ.index_of(&c).is_some());
}

#[test]
fn sign_pattern_and_convergence() {
    for n in [10u32, 20] {
        let k = kappa_all(n, &KappaCutoff::default()).unwrap();
        assert!(k.kappa1a > 0.0 && k.kappa2 > 0.0 && k.kappa1b < 0.0, "{k:?}");
        assert!(k.convergence.converged, "{:?}", k.convergence);
        assert!((k.total() - (k.kappa1a + k.kappa1b + k.kappa2)).abs() < 1e-18);
    }
}
