//! Properties of the parabolic basis, Clebsch-Gordan coefficients and the
//! vector-operator matrix elements.

use num_complex::Complex64;
use proptest::prelude::*;
use rydqed::basis::{
    clebsch_gordan, clebsch_gordan_doubled, parabolic_coefficients, parabolic_to_spherical, subspace, ParabolicLabel,
    SphericalLabel,
};
use rydqed::matelem::{
    angular_momentum, dipole_z, matrix_element, p2_p, state_angular_momentum, state_element, VectorOp,
};
use rydqed::radial::{radial_integral_exact, radial_integral_quadrature, RadialIntegralKey};

fn label() -> impl Strategy<Value = SphericalLabel> {
    (1u32..=14).prop_flat_map(|n| (Just(n), 0..n)).prop_flat_map(|(n, l)| {
        (Just(n), Just(l), -(l as i32)..=(l as i32)).prop_map(|(n, l, m)| SphericalLabel { n, l, m })
    })
}

/// A dipole partner of `a`: l ± 1, m + q.
fn partner(a: SphericalLabel, n: u32, up: bool, q: i32) -> Option<SphericalLabel> {
    let l = if up { a.l + 1 } else { a.l.checked_sub(1)? };
    let m = a.m + q;
    (l < n && m.unsigned_abs() <= l).then_some(SphericalLabel { n, l, m })
}

fn pair() -> impl Strategy<Value = (SphericalLabel, SphericalLabel)> {
    (label(), 1u32..=14, any::<bool>(), -1i32..=1)
        .prop_filter_map("no partner", |(a, n, up, q)| partner(a, n, up, q).map(|b| (a, b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cg_orthogonality(n in 2u32..=30, m_off in 0u32..30) {
        // Rows of the parabolic transformation at fixed (n, m) are orthonormal.
        let m = (m_off % n) as i32;
        let labels: Vec<ParabolicLabel> = subspace(n).into_iter().filter(|p| p.m == m).collect();
        for a in &labels {
            for b in &labels {
                let ca = parabolic_coefficients(*a);
                let cb = parabolic_coefficients(*b);
                let s: f64 = ca.iter().map(|(l, x)| x * cb.iter().find(|(k, _)| k == l).map_or(0.0, |(_, y)| *y)).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((s - want).abs() < 1e-12, "{a:?} {b:?} overlap {s}");
            }
        }
    }

    #[test]
    fn cg_column_completeness(dj1 in 0i32..=20, dj2 in 0i32..=20, pick in 0usize..1000) {
        // Σ_{j,m} |C|² over the coupled states with fixed (m1, m2) is 1.
        let dm1 = -dj1 + 2 * (pick as i32 % (dj1 + 1));
        let dm2 = -dj2 + 2 * ((pick / 7) as i32 % (dj2 + 1));
        let mut s = 0.0;
        let mut dj = (dj1 - dj2).abs();
        while dj <= dj1 + dj2 {
            let c = clebsch_gordan_doubled(dj1, dm1, dj2, dm2, dj, dm1 + dm2);
            s += c * c;
            dj += 2;
        }
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn position_hermitian((a, b) in pair()) {
        for op in [VectorOp::Position, VectorOp::UnitVector, VectorOp::Momentum, VectorOp::MomentumGradient] {
            let ab = matrix_element(op, &a, &b).unwrap();
            let ba = matrix_element(op, &b, &a).unwrap();
            // Degenerate pairs have p elements that vanish up to rounding.
            prop_assert!(ab.max_abs_diff(&ba.conj()) <= 1e-10 * ab.norm() + 1e-13, "{op:?} {a:?} {b:?}");
        }
    }

    #[test]
    fn commutator_route_equals_gradient((a, b) in pair()) {
        let c = matrix_element(VectorOp::Momentum, &a, &b).unwrap();
        let g = matrix_element(VectorOp::MomentumGradient, &a, &b).unwrap();
        prop_assert!(c.max_abs_diff(&g) <= 1e-10 * g.norm() + 1e-13);
    }

    #[test]
    fn angular_momentum_hermitian(a in label(), dm in -1i32..=1) {
        let b = SphericalLabel { m: (a.m + dm).clamp(-(a.l as i32), a.l as i32), ..a };
        let ab = angular_momentum(&a, &b);
        let ba = angular_momentum(&b, &a);
        prop_assert!(ab.max_abs_diff(&ba.conj()) < 1e-12);
    }

    #[test]
    fn selection_rules(a in label(), b in label()) {
        let r = matrix_element(VectorOp::Position, &a, &b).unwrap();
        let allowed = a.l.abs_diff(b.l) == 1 && a.m.abs_diff(b.m) <= 1;
        if !allowed {
            prop_assert_eq!(r.norm(), 0.0);
        }
        if a.m != b.m {
            prop_assert_eq!(r.z, Complex64::default());
        }
        if a.m == b.m {
            prop_assert_eq!(r.x, Complex64::default());
            prop_assert_eq!(r.y, Complex64::default());
        }
    }

    #[test]
    fn radial_exact_agrees(n in 1u32..=12, np in 1u32..=12, l_pick in 0u32..12, power in -1i32..=2) {
        let l = l_pick % n;
        let lp = (l + 1).min(np - 1);
        let key = RadialIntegralKey::plain(n, l, np, lp, power);
        if key.validate().is_ok() {
            let (q, scale) = radial_integral_quadrature(&key).unwrap();
            let e = radial_integral_exact(&key).unwrap();
            prop_assert!((q - e).abs() <= 1e-11 * scale.max(1.0), "{key:?}: {q} vs {e}");
        }
    }
}

#[test]
fn clebsch_gordan_domain_errors() {
    assert!(clebsch_gordan(0.5, 0.0, 0.5, 0.5, 1.0, 0.5).is_err());
    assert!(clebsch_gordan(0.3, 0.3, 0.5, 0.5, 1.0, 1.0).is_err());
    // Coupling rules violated but quantization intact: the value is 0.
    assert_eq!(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 2.0, 0.0).unwrap(), 0.0);
    assert_eq!(clebsch_gordan(1.0, 1.0, 1.0, 0.0, 2.0, 0.0).unwrap(), 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1.0, 0.0).unwrap() - h).abs() < 1e-14);
    assert!((clebsch_gordan(1.0, 1.0, 1.0, 0.0, 2.0, 1.0).unwrap() - h).abs() < 1e-14);
}

#[test]
fn parabolic_stark_shift_from_expansion() {
    // ⟨n1 n2 m|z|n1 n2 m⟩ = (3/2) n (n1 - n2) for every state up to n = 8.
    for n in 1..=8 {
        for p in subspace(n) {
            let v = parabolic_to_spherical(p);
            let z = state_element(VectorOp::Position, &v, &v).unwrap().z.re;
            let want = 1.5 * n as f64 * p.stark_index() as f64;
            assert!((z - want).abs() < 1e-10, "{p:?}: {z} vs {want}");
        }
    }
}

#[test]
fn parabolic_z_diagonal_in_manifold_at_n50() {
    // The parabolic states diagonalise z inside the n = 50 manifold.
    let n = 50;
    let m = 47;
    let states: Vec<_> = subspace(n).into_iter().filter(|p| p.m == m).collect();
    for a in &states {
        for b in &states {
            let va = parabolic_to_spherical(*a);
            let vb = parabolic_to_spherical(*b);
            let z = state_element(VectorOp::Position, &va, &vb).unwrap().z.re;
            let want = if a == b { 1.5 * n as f64 * a.stark_index() as f64 } else { 0.0 };
            assert!((z - want).abs() < 1e-8, "{a:?} {b:?}: {z}");
        }
    }
}

#[test]
fn circular_state_l_expectation() {
    let v = parabolic_to_spherical(ParabolicLabel::new(0, 0, 9));
    let l = state_angular_momentum(&v, &v);
    assert!((l.z.re - 9.0).abs() < 1e-12);
    assert!(l.x.norm() < 1e-12 && l.y.norm() < 1e-12);
}

#[test]
fn dipole_closed_forms() {
    // ⟨2p0|z|2s⟩ = -3 in the Condon-Shortley phase used here (|3| a0).
    let z = dipole_z(&SphericalLabel { n: 2, l: 1, m: 0 }, &SphericalLabel { n: 2, l: 0, m: 0 }).unwrap();
    assert!((z.abs() - 3.0).abs() < 1e-13);
}

#[test]
fn trk_sum_rule_bound_part() {
    // Σ_j f_{1s->j}, f = (2/3)(E_j - E_1s)|⟨1s|r|j⟩|²; bound states carry
    // about 0.565 of the total oscillator strength 1.
    let a = SphericalLabel { n: 1, l: 0, m: 0 };
    let mut f = 0.0;
    for nj in 2..=400 {
        let j = SphericalLabel { n: nj, l: 1, m: 0 };
        let z = dipole_z(&a, &j).unwrap();
        f += 2.0 * (j.energy() - a.energy()) * z * z;
    }
    assert!(f < 1.0);
    assert!((f - 0.5650).abs() < 2e-3, "bound oscillator strength {f}");
}

#[test]
fn p2p_resolution_of_identity_approaches_closed_form() {
    let a = SphericalLabel { n: 3, l: 1, m: 0 };
    let b = SphericalLabel { n: 3, l: 2, m: 0 };
    let small = p2_p(&a, &b, 20).unwrap();
    let large = p2_p(&a, &b, 80).unwrap();
    assert!(large.truncation_gap < small.truncation_gap);
    assert!(large.value.max_abs_diff(&small.value) < 1e-14);
}
