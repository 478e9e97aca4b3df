mod common;

use common::*;
use proptest::prelude::*;
use tsqr::alt::*;
use tsqr::gen::{gen_cond_matrix, random_matrix, CondSpec};
use tsqr::householder::qr_unblocked;
use tsqr::{Error, Matrix};

fn loss(x: &Result<ExplicitQr, Error>) -> Option<f64> {
    x.as_ref().ok().map(|x| x.q.orthogonality_loss())
}

#[test]
fn orthonormal_input_gives_identity_r() {
    let q0 = qr_unblocked(&random_matrix(60, 8, 1))
        .unwrap()
        .factor
        .explicit_q(true);
    let tol = 10.0 * 8.0 * EPS;
    for f in [cholesky_qr, cgs, mgs_row] {
        let x = f(&q0).unwrap();
        assert!(x.r.sub(&Matrix::identity(8)).unwrap().max_abs() <= tol);
        assert!(x.q.sub(&q0).unwrap().max_abs() <= tol);
    }
}

#[test]
fn identity_columns_pass_through() {
    let a = Matrix::eye(7, 4);
    for f in [cgs, mgs_row] {
        let x = f(&a).unwrap();
        assert_eq!(x.q, a);
        assert_eq!(x.r, Matrix::identity(4));
    }
}

#[test]
fn well_conditioned_cases() {
    let a = gen_cond_matrix(&CondSpec::new(100, 10, 10.0, 2)).unwrap();
    assert!(cholesky_qr(&a).unwrap().q.orthogonality_loss() <= 1e-12);
    let a = gen_cond_matrix(&CondSpec::new(100, 10, 1.0, 3)).unwrap();
    assert!(cgs(&a).unwrap().q.orthogonality_loss() <= 1e-13);
    assert!(mgs_row(&a).unwrap().q.orthogonality_loss() <= 1e-13);
}

#[test]
fn r_agrees_with_oracle_when_well_conditioned() {
    let a = gen_cond_matrix(&CondSpec::new(200, 12, 100.0, 4)).unwrap();
    let want = oracle_r(&a);
    for f in [cholesky_qr, cgs, mgs_row] {
        let x = f(&a).unwrap();
        assert!(x.r.is_upper_triangular());
        assert!((0..12).all(|j| x.r[(j, j)] > 0.0));
        assert!(r_distance(&x.r, &want) <= 1e-10 * two_norm(&a));
    }
}

#[test]
fn cholesky_qr_loses_orthogonality_quadratically() {
    for seed in 0..5 {
        let a = gen_cond_matrix(&CondSpec::new(300, 20, 1e9, 10 + seed)).unwrap();
        match cholesky_qr(&a) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            Ok(x) => assert!(x.q.orthogonality_loss() >= 1e-2, "seed {seed}"),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn mgs_beats_cgs_at_kappa_1e8() {
    let mut wins = 0;
    for seed in 0..5 {
        let a = gen_cond_matrix(&CondSpec::new(300, 20, 1e8, 20 + seed)).unwrap();
        match (loss(&mgs_row(&a)), loss(&cgs(&a))) {
            (Some(m), Some(c)) if m < c => wins += 1,
            (Some(_), None) => wins += 1,
            _ => {}
        }
    }
    assert!(wins >= 4, "{wins}");
}

#[test]
fn flop_counts_follow_the_models() {
    let (n, m) = (32usize, 200 * 32usize);
    let a = random_matrix(m, n, 5);
    let (mf, nf) = (m as f64, n as f64);
    let chol = cholesky_qr(&a).unwrap();
    assert!((chol.flops.flops as f64 / (mf * nf * nf + nf.powi(3) / 3.0) - 1.0).abs() < 0.05);
    for x in [cgs(&a).unwrap(), mgs_row(&a).unwrap()] {
        assert!((x.flops.flops as f64 / (2.0 * mf * nf * nf) - 1.0).abs() < 0.05);
    }
}

#[test]
fn wide_input_is_rejected() {
    let a = Matrix::zeros(3, 5);
    assert!(matches!(cholesky_qr(&a), Err(Error::Dimension(_))));
    assert!(matches!(cgs(&a), Err(Error::Dimension(_))));
    assert!(matches!(mgs_row(&a), Err(Error::Dimension(_))));
}

#[test]
fn sweep_covers_every_pair_once() {
    let kappas = [1.0, 1e6, 1e12];
    let rep = stability_sweep(&kappas, 200, 10, &[1, 2]).unwrap();
    assert_eq!(rep.rows.len(), kappas.len() * SweepAlgorithm::ALL.len());
    assert_eq!(rep.cells.len(), rep.rows.len() * 2);
    for k in kappas {
        for alg in SweepAlgorithm::ALL {
            assert_eq!(
                rep.rows
                    .iter()
                    .filter(|r| r.algorithm == alg && r.kappa == k)
                    .count(),
                1
            );
        }
    }
    for alg in SweepAlgorithm::ALL {
        assert!(
            rep.row(alg, 1.0).unwrap().orthogonality.unwrap() <= 1e-12,
            "{alg}"
        );
    }
    let bound = 100.0 * 10.0 * EPS * (1.0 + (rep.p as f64).log2());
    for alg in SweepAlgorithm::ALL
        .into_iter()
        .filter(|a| a.is_unconditional())
    {
        for k in kappas {
            assert!(
                rep.row(alg, k).unwrap().orthogonality.unwrap() <= bound,
                "{alg} {k}"
            );
        }
    }
    let chol = rep.row(SweepAlgorithm::CholeskyQr, 1e12).unwrap();
    assert!(chol.outcome == Outcome::Failed || chol.orthogonality.unwrap() > 1e-1);
}

#[test]
fn sweep_records_failures_instead_of_aborting() {
    let rep = stability_sweep(&[1e12], 120, 8, &[3]).unwrap();
    let cell = rep
        .cells_of(SweepAlgorithm::CholeskyQr, 1e12)
        .next()
        .unwrap();
    if cell.outcome == Outcome::Failed {
        assert!(cell.error.as_ref().unwrap().contains("positive definite"));
        assert!(cell.orthogonality.is_none());
    }
    assert_eq!(rep.cells.len(), 6);
}

#[test]
fn empty_kappa_list_gives_empty_report() {
    let rep = stability_sweep(&[], 100, 10, &[1]).unwrap();
    assert!(rep.rows.is_empty());
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
}

#[test]
fn cholesky_loss_grows_with_kappa() {
    let rep = stability_sweep(&[1.0, 1e3, 1e6], 200, 10, &[7]).unwrap();
    let l: Vec<f64> = [1.0, 1e3, 1e6]
        .iter()
        .map(|&k| {
            rep.row(SweepAlgorithm::CholeskyQr, k)
                .unwrap()
                .orthogonality
                .unwrap()
        })
        .collect();
    assert!(l[0] < l[1] && l[1] < l[2], "{l:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gram_schmidt_reconstructs(m in 4usize..60, n in 1usize..8, seed in any::<u64>()) {
        prop_assume!(m >= n);
        let a = random_matrix(m, n, seed);
        for x in [cgs(&a).unwrap(), mgs_row(&a).unwrap(), cholesky_qr(&a).unwrap()] {
            prop_assert!(x.r.is_upper_triangular());
            let res = x.q.matmul(&x.r).unwrap().sub(&a).unwrap().frobenius_norm();
            prop_assert!(res <= 100.0 * EPS * ((m * n) as f64).sqrt() * a.frobenius_norm() * cond(&a));
        }
    }
}
