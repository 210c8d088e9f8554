//! Invariant soaks for the linear-algebra and model layers: eigensystem
//! quality on random Hermitian matrices up to dimension 80, PSD structure of
//! the Gram matrix, and the bookkeeping identities around partitions.

use mwf_core::{
    neg_part, ComplexMatrix, DualDiagonal, EffectiveBasis, HermitianMatrix, PowerPartition,
    SystemModel,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianMatrix {
    let m = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(
            scale * (rng.gen::<f64>() - 0.5),
            scale * (rng.gen::<f64>() - 0.5),
        )
    });
    let sym = m.add(&m.adjoint()).scale_re(0.5);
    HermitianMatrix::new(sym).unwrap()
}

fn random_channel(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, n, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

#[test]
fn evd_soak_1000_matrices_up_to_dim_80() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE16E);
    for case in 0..1000 {
        let dim = match case % 50 {
            49 => 80,
            48 => 64,
            47 => 40,
            k => 1 + k % 24,
        };
        let a = random_hermitian(&mut rng, dim, 4.0);
        let e = a.evd();
        for w in e.values.windows(2) {
            assert!(w[0] >= w[1], "eigenvalues sorted decreasing");
        }
        assert!(
            e.unitarity_residual() < 1e-10,
            "unitarity at dim {dim}: {}",
            e.unitarity_residual()
        );
        assert!(
            e.reconstruction_residual(&a) < 1e-10,
            "reconstruction at dim {dim}: {}",
            e.reconstruction_residual(&a)
        );
        let tr: f64 = a.trace_re();
        let sum: f64 = e.values.iter().sum();
        assert!(
            (tr - sum).abs() <= 1e-10 * tr.abs().max(1.0),
            "trace identity at dim {dim}"
        );
    }
}

#[test]
fn psd_project_agrees_with_negative_part_completion() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9D);
    for case in 0..200 {
        let dim = 1 + case % 12;
        let a = random_hermitian(&mut rng, dim, 3.0);
        let e = a.evd();
        let completion = HermitianMatrix::from_scaled_basis(&e.vectors, &neg_part(&e.values));
        let via_completion = a.add(&completion);
        let projected = a.psd_project();
        let diff = projected.sub(&via_completion).fro_norm();
        assert!(diff < 1e-10 * a.fro_norm().max(1.0), "case {case}: {diff}");
    }
}

#[test]
fn sqrt_squares_back_on_random_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x54);
    for case in 0..200 {
        let dim = 1 + case % 10;
        let b = random_channel(&mut rng, dim, dim + case % 3);
        let a = HermitianMatrix::symmetrized(b.mul(&b.adjoint())).unwrap();
        let s = a.sqrt().unwrap();
        let err = s.as_matrix().mul(s.as_matrix()).sub(a.as_matrix()).fro_norm()
            / a.fro_norm().max(1.0);
        assert!(err < 1e-9, "case {case}: {err}");
    }
}

#[test]
fn gram_matrix_is_psd_on_1000_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6A);
    for case in 0..1000 {
        let m = 1 + case % 6;
        let n = 1 + (case / 7) % 8;
        let h = random_channel(&mut rng, m, n);
        if h.max_abs() == 0.0 {
            continue;
        }
        let sigma2 = 0.1 + rng.gen::<f64>();
        let model = SystemModel::with_white_noise(h, sigma2).unwrap();
        let s = model.gram_matrix().unwrap();
        let e = s.evd();
        let lambda_max = e.values[0].max(0.0);
        assert!(
            e.values.last().unwrap() >= &(-1e-10 * lambda_max),
            "case {case}: min eigenvalue {}",
            e.values.last().unwrap()
        );
    }
}

#[test]
fn effective_basis_reconstructs_and_ranks_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBA5E);
    for case in 0..200 {
        let m = 1 + case % 5;
        let n = 1 + (case / 5) % 7;
        let h = random_channel(&mut rng, m, n);
        let model = SystemModel::with_white_noise(h.clone(), 1.0).unwrap();
        let s = model.gram_matrix().unwrap();
        let basis = EffectiveBasis::from_gram(&s, mwf_core::tol::RANK_TOL).unwrap();
        // reconstruction on the range
        let rebuilt = basis.effective_gram();
        let err = rebuilt.sub(&s).fro_norm() / s.fro_norm().max(1.0);
        assert!(err < 1e-9, "case {case}: {err}");
        // the rank agrees with the receive-side Gram spectrum
        let w = HermitianMatrix::symmetrized(h.mul(&h.adjoint())).unwrap();
        let we = w.evd();
        let cut = mwf_core::tol::RANK_TOL * we.values[0].max(0.0);
        let k_rx = we.values.iter().filter(|&&v| v > cut).count();
        assert_eq!(basis.rank(), k_rx, "case {case}");
    }
}

proptest! {
    #[test]
    fn group_powers_sum_to_trace(
        diag in prop::collection::vec(0.0f64..10.0, 1..9),
        split in 0usize..8,
    ) {
        let n = diag.len();
        let q = HermitianMatrix::from_real_diag(&diag);
        // split antennas into two groups (or one when the split is trivial)
        let cut = (split % n).max(0);
        let partition = if cut == 0 || cut == n {
            PowerPartition::single_group(n, 1.0).unwrap()
        } else {
            PowerPartition::new(
                n,
                vec![(0..cut).collect(), (cut..n).collect()],
                vec![1.0, 1.0],
            )
            .unwrap()
        };
        let total: f64 = partition.group_powers(&q).iter().sum();
        let tr = q.trace_re();
        prop_assert!((total - tr).abs() <= 1e-12 * tr.abs().max(1.0));
    }

    #[test]
    fn dual_diag_round_trips(
        values in prop::collection::vec(1e-3f64..1e3, 1..6),
    ) {
        let n = values.len();
        let partition = PowerPartition::per_antenna(vec![1.0; n]).unwrap();
        let d = DualDiagonal::from_per_group(&partition, &values).unwrap();
        prop_assert_eq!(d.per_group(&partition), values);
    }

    #[test]
    fn neg_part_is_nonnegative_and_complements(
        values in prop::collection::vec(-10.0f64..10.0, 1..12),
    ) {
        let neg = neg_part(&values);
        for (&v, &z) in values.iter().zip(&neg) {
            prop_assert!(z >= 0.0);
            // v + z is the positive part
            prop_assert!(v + z >= 0.0);
            prop_assert!((v + z) * z == 0.0);
        }
    }
}
