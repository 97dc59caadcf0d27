//! Stark and Zeeman perturbation theory against exact diagonalisation in
//! the same truncated basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rydqed::basis::{subspace, ParabolicLabel, SphericalLabel};
use rydqed::matelem::angular_momentum_x;
use rydqed::perturb::{
    stark_energy_at_cutoff, stark_series, stark_shift_high_orders, stark_state, zeeman_state, Block, FieldConfiguration, RealComponent,
    SparseOp,
};
use rydqed::units::CODATA;

/// Eigenpair with the largest overlap with `v0`, sign-aligned to it.
fn follow(h: &DMatrix<f64>, v0: &[f64]) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let target = DVector::from_column_slice(v0);
    let (k, ov) = (0..eig.eigenvalues.len())
        .map(|k| (k, eig.eigenvectors.column(k).dot(&target)))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    let v: Vec<f64> = eig.eigenvectors.column(k).iter().map(|x| x * ov.signum()).collect();
    (eig.eigenvalues[k], v)
}

#[test]
fn stark_energies_match_diagonalisation_up_to_n6() {
    for n in 2..=6u32 {
        let n_max = n + 8;
        for p in subspace(n).into_iter().filter(|p| p.m >= 0) {
            let block = Block::new(p.m, n_max);
            let z = SparseOp::build(RealComponent::Z, &block, &block).unwrap();
            let s = stark_series(&block, &z, p, 2).unwrap();
            let e = 1e-3 / (n as f64).powi(5);
            let (exact, _) = follow(&block.dense_hamiltonian(&z, e), &s.vectors[0]);
            let series = s.energy_at(e, 3);
            let second = (s.energies[2] * e * e).abs();
            assert!((exact - series).abs() < 1e-4 * second + 1e-15, "{p:?}: {exact} vs {series}");
        }
    }
}

#[test]
fn hellmann_feynman_dipole_up_to_n6() {
    // ⟨z⟩ of the exact eigenvector equals dE/dE0 of the series.
    for n in [3u32, 6] {
        let p = ParabolicLabel::new(1, 0, n as i32 - 2);
        let block = Block::new(p.m, n + 8);
        let z = SparseOp::build(RealComponent::Z, &block, &block).unwrap();
        let s = stark_series(&block, &z, p, 2).unwrap();
        let e = 1e-3 / (n as f64).powi(5);
        let (_, v) = follow(&block.dense_hamiltonian(&z, e), &s.vectors[0]);
        let dip = z.bilinear(&v, &v);
        let slope = s.energies[1] + 2.0 * s.energies[2] * e + 3.0 * s.energies[3] * e * e;
        assert!((dip - slope).abs() < 1e-8 * slope.abs(), "n={n}: {dip} vs {slope}");
    }
}

#[test]
fn stark_vectors_match_diagonalisation() {
    let n = 5;
    let p = ParabolicLabel::new(0, 1, 2);
    let block = Block::new(p.m, n + 10);
    let z = SparseOp::build(RealComponent::Z, &block, &block).unwrap();
    let s = stark_series(&block, &z, p, 2).unwrap();
    for eps in [1e-3, 5e-4] {
        let e = eps / (n as f64).powi(5);
        let (_, exact) = follow(&block.dense_hamiltonian(&z, e), &s.vectors[0]);
        let mut v = s.vector_at(e, 2);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let diff = exact.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // Third-order remainder.
        assert!(diff < 50.0 * eps.powi(3), "eps={eps}: {diff}");
    }
}

#[test]
fn manifold_diagonalisation_at_n50() {
    // Eigenvalues of z inside n = 50, m = 45 are (3/2) n k with k = n1 - n2.
    let n = 50u32;
    let m = 45i32;
    let labels: Vec<SphericalLabel> = (m as u32..n).map(|l| SphericalLabel { n, l, m }).collect();
    let block = Block::new(m, n);
    let z = SparseOp::build(RealComponent::Z, &block, &block).unwrap();
    let idx: Vec<usize> = labels.iter().map(|l| block.index_of(l).unwrap()).collect();
    let mut h = DMatrix::<f64>::zeros(idx.len(), idx.len());
    for (a, &i) in idx.iter().enumerate() {
        for (j, v) in &z.rows[i] {
            if let Some(b) = idx.iter().position(|x| x == j) {
                h[(a, b)] = *v;
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    let mut want: Vec<f64> = subspace(n).into_iter().filter(|p| p.m == m).map(|p| 1.5 * 50.0 * p.stark_index() as f64).collect();
    want.sort_by(|a, b| a.total_cmp(b));
    for (a, b) in ev.iter().zip(&want) {
        assert!((a - b).abs() < 1e-8 * 75.0 * 4.0, "{a} vs {b}");
    }
}

/// Standard hydrogen Stark coefficients (bound plus continuum):
/// e2 = -(n⁴/16)(17n² - 3k² - 9m² + 19),
/// e3 = (3/32) n⁷ k (23n² - k² + 11m² + 39), k = n1 - n2.
fn closed_e2_e3(p: ParabolicLabel) -> (f64, f64) {
    let n = p.n() as f64;
    let k = p.stark_index() as f64;
    let m = p.m as f64;
    (
        -(n.powi(4) / 16.0) * (17.0 * n * n - 3.0 * k * k - 9.0 * m * m + 19.0),
        3.0 / 32.0 * n.powi(7) * k * (23.0 * n * n - k * k + 11.0 * m * m + 39.0),
    )
}

#[test]
fn high_orders_report_achieved_tolerance() {
    let p = ParabolicLabel::new(0, 0, 9);
    let (e, conv) = stark_shift_high_orders(p, 20).unwrap();
    // Bound-state sums approach the full value as C^-2; the doubling
    // loop either meets 1e-6 or reports what it reached.
    assert!(conv.achieved_rel < 1e-5, "{conv:?}");
    assert_eq!(conv.converged, conv.achieved_rel < 1e-6);
    let (e2, _) = closed_e2_e3(p);
    assert!((e.e2 / e2 - 1.0).abs() < 1e-4, "{} vs {e2}", e.e2);
    assert_eq!(e.e1, 0.0);
}

#[test]
fn third_order_against_closed_form() {
    // bound-state sums approach the closed forms from one side as the cutoff grows
    // and the continuum share shrinks quickly with m
    let cases = [
        (ParabolicLabel::new(1, 0, 13), 2e-5, 1e-4),
        (ParabolicLabel::new(1, 0, 8), 1e-4, 1e-3),
        (ParabolicLabel::new(2, 1, 6), 5e-4, 4e-3),
    ];
    for (p, tol2, tol3) in cases {
        let coarse = stark_energy_at_cutoff(p, p.n() + 20).unwrap();
        let fine = stark_energy_at_cutoff(p, p.n() + 40).unwrap();
        let (e2, e3) = closed_e2_e3(p);
        assert!((fine.e2 / e2 - 1.0).abs() < tol2, "{p:?} e2 {} vs {e2}", fine.e2);
        assert!((fine.e3 / e3 - 1.0).abs() < tol3, "{p:?} e3 {} vs {e3}", fine.e3);
        assert!((fine.e2 - e2).abs() < (coarse.e2 - e2).abs(), "{p:?} e2 not approaching");
        assert!((fine.e3 - e3).abs() < (coarse.e3 - e3).abs(), "{p:?} e3 not approaching");
    }
}

#[test]
fn third_order_vanishes_for_symmetric_states() {
    for m in 0..5 {
        let e = stark_energy_at_cutoff(ParabolicLabel::new(0, 0, m), m as u32 + 20).unwrap();
        assert!(e.e3.abs() < 1e-9 * e.e2.abs().powf(1.5), "m={m}: {}", e.e3);
    }
}

#[test]
fn ground_state_second_order_is_half_the_discrete_polarizability() {
    let e = stark_energy_at_cutoff(ParabolicLabel::new(0, 0, 0), 40).unwrap();
    let alpha = rydqed::abraham::polarizability_sum_at_cutoff(1, 40).unwrap();
    assert!((e.e2 + alpha / 2.0).abs() < 1e-12 * alpha);
    assert!(alpha < 4.5);
}

#[test]
fn zeeman_state_matches_joint_diagonalisation() {
    let p = ParabolicLabel::new(0, 0, 2);
    let n_max = 9;
    let e_au = 1e-6;
    let b_coupling = 1e-9;
    let b_au = b_coupling * 2.0 * CODATA.c_au();
    let blocks: Vec<Block> = (1..=3).map(|m| Block::new(m, n_max)).collect();
    let offsets: Vec<usize> = blocks.iter().scan(0, |acc, b| {
        let o = *acc;
        *acc += b.len();
        Some(o)
    }).collect();
    let dim: usize = blocks.iter().map(|b| b.len()).sum();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (bi, b) in blocks.iter().enumerate() {
        let z = SparseOp::build(RealComponent::Z, b, b).unwrap();
        let hb = b.dense_hamiltonian(&z, e_au);
        h.view_mut((offsets[bi], offsets[bi]), (b.len(), b.len())).copy_from(&hb);
    }
    for (bi, b) in blocks.iter().enumerate() {
        for (bj, c) in blocks.iter().enumerate() {
            if bi.abs_diff(bj) != 1 {
                continue;
            }
            for (i, la) in b.labels.iter().enumerate() {
                for (j, lb) in c.labels.iter().enumerate() {
                    if la.n == lb.n && la.l == lb.l {
                        h[(offsets[bi] + i, offsets[bj] + j)] = b_coupling * angular_momentum_x(la, lb);
                    }
                }
            }
        }
    }
    let mut v0 = vec![0.0; dim];
    let home = &blocks[1];
    for (i, x) in home.parabolic_vector(p).unwrap().into_iter().enumerate() {
        v0[offsets[1] + i] = x;
    }
    let (_, exact) = follow(&h, &v0);

    let field = FieldConfiguration { e0_au: e_au, b0_au: 0.0, ..FieldConfiguration::new(0.0, 0.0, &CODATA).unwrap() };
    let s = stark_state(p, &field, 1, n_max).unwrap();
    let zs = zeeman_state(&s, b_au, &CODATA).unwrap();
    let norm = zs.vector.norm_sqr().sqrt();
    let mut worst = 0.0f64;
    for (bi, b) in blocks.iter().enumerate() {
        for (i, lab) in b.labels.iter().enumerate() {
            let c = zs.vector.coefficient(lab).re / norm;
            worst = worst.max((c - exact[offsets[bi] + i]).abs());
        }
    }
    // Partner amplitudes are ~1e-4; the neglected orders are ~1e-7.
    assert!(worst < 1e-6, "max coefficient deviation {worst}");
    let partner = ParabolicLabel::new(1, 0, 1);
    let amp: f64 = rydqed::basis::parabolic_coefficients(partner).iter().map(|(l, c)| c * zs.vector.coefficient(l).re).sum();
    assert!(amp.abs() > 1e-5);
}

#[test]
fn zeeman_state_without_field_is_identity() {
    let field = FieldConfiguration::new(100.0, 0.0, &CODATA).unwrap();
    let s = stark_state(ParabolicLabel::new(0, 0, 4), &field, 1, 12).unwrap();
    let z = zeeman_state(&s, 0.0, &CODATA).unwrap();
    assert_eq!(z.vector, s.vector);
}

#[test]
fn field_configuration_rejects_bad_input() {
    assert!(FieldConfiguration::new(-1.0, 0.0, &CODATA).is_err());
    assert!(FieldConfiguration::new(f64::NAN, 0.0, &CODATA).is_err());
    assert!(stark_state(ParabolicLabel::new(0, 0, 4), &FieldConfiguration::new(1.0, 0.0, &CODATA).unwrap(), 3, 12).is_err());
}
