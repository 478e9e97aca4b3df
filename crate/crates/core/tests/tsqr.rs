mod common;

use common::*;
use proptest::prelude::*;
use tsqr::executor::ExecMode;
use tsqr::gen::{gen_cond_matrix, random_matrix, CondSpec};
use tsqr::householder::{qr_unblocked, QrStrategy};
use tsqr::layout::BlockRowLayout;
use tsqr::tree::{ReductionTree, TreeMode};
use tsqr::tsqr::*;
use tsqr::{Error, Matrix};

fn par(a: &Matrix, tree: &str) -> ParallelTsqr {
    let tree: ReductionTree = tree.parse().unwrap();
    tsqr_parallel_matrix(a, &tree, ParallelOptions::default()).unwrap()
}

fn check_factor(a: &Matrix, f: &TsqrFactor, p: usize) {
    let (m, n) = a.shape();
    let q = f.explicit_q();
    let lg = (p as f64).log2().ceil();
    assert!(q.orthogonality_loss() <= 100.0 * n as f64 * EPS * (1.0 + lg));
    assert!(residual(a, &q, f.r()) <= 100.0 * EPS * ((m * n) as f64).sqrt() * a.frobenius_norm());
    assert!(f.r().is_upper_triangular());
}

#[test]
fn sequential_single_block_is_dense_qr() {
    let a = random_matrix(40, 6, 1);
    let s = tsqr_sequential_in_memory(&a, 1, QrStrategy::Unblocked).unwrap();
    assert_eq!(s.factor.r(), &qr_unblocked(&a).unwrap().r);
}

#[test]
fn sequential_64x8_four_blocks() {
    let a = random_matrix(64, 8, 2);
    let s = tsqr_sequential_in_memory(&a, 4, QrStrategy::Unblocked).unwrap();
    assert!(r_distance(s.factor.r(), &oracle_r(&a)) <= 1e-13 * two_norm(&a));
    assert_eq!(s.counters.a_reads, 4);
    assert_eq!(s.counters.y_writes, 4);
    check_factor(&a, &s.factor, 4);
}

#[test]
fn sequential_word_counts_follow_the_chain() {
    let (m, n, w) = (2000usize, 10usize, 2055usize);
    let p = choose_p_sequential(m, n, w).unwrap();
    assert_eq!(p, 10);
    let a = random_matrix(m, n, 3);
    let s = tsqr_sequential_in_memory(&a, p, QrStrategy::Unblocked).unwrap();
    let c = s.counters;
    let tri = (n * (n + 1) / 2) as u64;
    assert_eq!(c.words_read, (m * n) as u64);
    assert_eq!(c.y_words, (m * n) as u64 - tri);
    assert_eq!(c.tau_words, (p * n) as u64);
    let chk = s.model_check(w).unwrap();
    assert!((chk.chain_words as f64 / chk.model_chain_words - 1.0).abs() <= 0.1);
    let model_words = chk.model.words;
    assert!(c.words_moved() as f64 >= model_words);
    assert!(c.words_moved() as f64 <= model_words + n as f64);
    assert_eq!(c.transfers(), 2 * p as u64);
}

#[test]
fn out_of_core_store_matches_in_memory() {
    let a = random_matrix(90, 5, 4);
    let layout = BlockRowLayout::new(90, 5, 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut store = BlockStore::create_dir(dir.path(), &a, &layout).unwrap();
    let disk = tsqr_sequential(&mut store, QrStrategy::Unblocked).unwrap();
    let mem = tsqr_sequential_in_memory(&a, 6, QrStrategy::Unblocked).unwrap();
    assert_eq!(disk.factor.r(), mem.factor.r());
    assert_eq!(disk.counters, mem.counters);
    for k in 0..6 {
        assert!(dir.path().join(format!("Y_{k}.mat")).exists());
        assert!(dir.path().join(format!("tau_{k}.vec")).exists());
    }
    let reopened = BlockStore::open_dir(dir.path()).unwrap();
    assert_eq!(reopened.meta().block_rows, layout.block_rows);
    let (y1, tau1) = reopened.load_y(1).unwrap();
    assert_eq!(y1.shape(), (15, 5));
    assert_eq!(tau1, mem.factor.nodes()[0].factor.tau());
}

#[test]
fn sequential_flops_match_householder_count() {
    let (m, n) = (200 * 12, 12);
    let a = random_matrix(m, n, 5);
    let s = tsqr_sequential_in_memory(&a, 8, QrStrategy::Unblocked).unwrap();
    let (mf, nf) = (m as f64, n as f64);
    let model = 2.0 * mf * nf * nf - 2.0 / 3.0 * nf.powi(3);
    assert!((s.flops.flops as f64 / model - 1.0).abs() < 0.05);
}

#[test]
fn single_worker_is_local_qr() {
    let a = random_matrix(30, 5, 6);
    let r = par(&a, "binary:1");
    assert_eq!(r.r(), &qr_unblocked(&a).unwrap().r);
    assert_eq!(r.critical().messages, 0);
}

#[test]
fn binary_four_workers() {
    let a = random_matrix(64, 8, 7);
    let r = par(&a, "binary:4");
    assert_eq!(r.critical().messages, 2);
    assert!(r_distance(r.r(), &oracle_r(&a)) <= 1e-13 * two_norm(&a));
    check_factor(&a, &r.factor, 4);
    // reduce mode: only the root keeps R
    assert!(r.r_per_worker[0].is_some());
    assert!(r.r_per_worker[1..].iter().all(Option::is_none));
}

#[test]
fn all_reduce_replicates_r_bitwise() {
    let a = random_matrix(128, 6, 8);
    for spec in ["binary:8", "binary:6", "flat:5", "qary:3:7"] {
        let tree = spec
            .parse::<ReductionTree>()
            .unwrap()
            .with_mode(TreeMode::AllReduce);
        let r = tsqr_parallel_matrix(&a, &tree, ParallelOptions::default()).unwrap();
        let root = r.r_per_worker[0].clone().unwrap();
        assert!(
            r.r_per_worker.iter().all(|x| x.as_ref() == Some(&root)),
            "{spec}"
        );
        assert_eq!(&root, r.r());
        check_factor(&a, &r.factor, tree.leaves());
    }
}

#[test]
fn butterfly_doubles_messages_not_stages() {
    let a = random_matrix(128, 6, 9);
    let tree = ReductionTree::binary(8).unwrap();
    let red = tsqr_parallel_matrix(&a, &tree, ParallelOptions::default()).unwrap();
    let all = tsqr_parallel_matrix(
        &a,
        &tree.clone().with_mode(TreeMode::AllReduce),
        ParallelOptions::default(),
    )
    .unwrap();
    let sent = |x: &ParallelTsqr| x.recorders.iter().map(|r| r.sent_messages).sum::<u64>();
    assert_eq!(sent(&red), 7);
    assert_eq!(sent(&all), 8 * 3);
    assert_eq!(red.critical().messages, all.critical().messages);
    assert_eq!(red.r(), all.r());
}

#[test]
fn threads_and_simulation_agree_bitwise() {
    let a = random_matrix(256, 8, 10);
    for spec in ["binary:8", "flat:4", "qary:4:16"] {
        let tree: ReductionTree = spec.parse().unwrap();
        let sim = tsqr_parallel_matrix(&a, &tree, ParallelOptions::default()).unwrap();
        let thr = tsqr_parallel_matrix(
            &a,
            &tree,
            ParallelOptions {
                exec: ExecMode::Threads,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sim.r(), thr.r());
        assert_eq!(sim.recorders, thr.recorders);
    }
}

#[test]
fn identity_stack_gives_unit_q_columns() {
    let a = Matrix::vstack(&[Matrix::identity(3), Matrix::zeros(9, 3)]).unwrap();
    let r = par(&a, "binary:4");
    let q = r.factor.explicit_q();
    for j in 0..3 {
        let col = q.col(j);
        assert_eq!(col.iter().filter(|v| v.abs() > 1e-15).count(), 1);
        assert!(col.iter().any(|v| (v.abs() - 1.0).abs() < 1e-15));
    }
}

#[test]
fn apply_q_of_r_reconstructs() {
    let a = random_matrix(128, 8, 11);
    let r = par(&a, "binary:8");
    let qr = tsqr_apply_q(&r.factor, r.r(), false).unwrap();
    assert!(qr.sub(&a).unwrap().frobenius_norm() <= 1e-13 * a.frobenius_norm());
    let x = random_matrix(128, 3, 12);
    let back = tsqr_apply_q(
        &r.factor,
        &tsqr_apply_q(&r.factor, &x, true).unwrap(),
        false,
    )
    .unwrap();
    assert!(back.sub(&x).unwrap().max_abs() <= 1e-13);
    let thin = r.factor.apply_qt_thin(&a).unwrap();
    assert!(thin.sub(r.r()).unwrap().max_abs() <= 1e-13 * two_norm(&a));
    assert!(tsqr_apply_q(&r.factor, &Matrix::zeros(5, 2), false).is_err());
}

#[test]
fn model_check_small_cases() {
    let a = random_matrix(16 * 40, 32, 13);
    let r = par(&a, "binary:16");
    let chk = par_runtime_model_check(640, 32, 16, &r.recorders);
    assert_eq!(chk.messages, 4);
    assert!(chk.messages_match && chk.words_within);

    let a = random_matrix(40, 10, 14);
    let r = par(&a, "binary:4");
    let chk = par_runtime_model_check(40, 10, 4, &r.recorders);
    assert_eq!(chk.words, 2 * 55);
    assert!((chk.words_ratio - 1.1).abs() < 1e-12);

    let r = par(&a, "binary:1");
    let chk = par_runtime_model_check(40, 10, 1, &r.recorders);
    assert_eq!((chk.messages, chk.words), (0, 0));
}

#[test]
fn critical_path_flops_track_model() {
    let n = 32;
    for p in [2usize, 4, 8] {
        let m = 100 * n * p;
        let a = random_matrix(m, n, p as u64);
        let r = par(&a, &format!("binary:{p}"));
        let chk = par_runtime_model_check(m, n, p, &r.recorders);
        assert!(
            (chk.flops as f64 / chk.model_flops - 1.0).abs() < 0.05,
            "P={p}"
        );
    }
}

#[test]
fn mismatched_blocks_are_rejected() {
    let tree = ReductionTree::binary(2).unwrap();
    let err = tsqr_parallel(
        vec![Matrix::zeros(5, 3), Matrix::zeros(5, 2)],
        &tree,
        ParallelOptions::default(),
    );
    assert!(matches!(err, Err(Error::Dimension(_))));
    let err = tsqr_parallel(
        vec![Matrix::zeros(5, 3), Matrix::zeros(2, 3)],
        &tree,
        ParallelOptions::default(),
    );
    assert!(matches!(err, Err(Error::BlockTooShort { .. })));
}

#[test]
fn orthogonality_is_unconditional() {
    for (i, kappa) in [1e3, 1e6, 1e9, 1e12].into_iter().enumerate() {
        let a = gen_cond_matrix(&CondSpec::new(256, 12, kappa, 100 + i as u64)).unwrap();
        for spec in ["binary:8", "flat:8", "qary:4:8"] {
            check_factor(&a, &par(&a, spec).factor, 8);
        }
        check_factor(
            &a,
            &tsqr_sequential_in_memory(&a, 8, QrStrategy::Unblocked)
                .unwrap()
                .factor,
            8,
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_tree_gives_the_same_r(p in 1usize..10, n in 1usize..8, extra in 0usize..20, seed in any::<u64>(), q in 2usize..5) {
        let m = p * n + extra;
        let a = random_matrix(m, n, seed);
        let want = oracle_r(&a);
        let tol = 1000.0 * EPS * two_norm(&a);
        for spec in [format!("binary:{p}"), format!("flat:{p}"), format!("qary:{q}:{p}")] {
            let r = par(&a, &spec);
            prop_assert!(r_distance(r.r(), &want) <= tol, "{}", spec);
        }
        let s = tsqr_sequential_in_memory(&a, p, QrStrategy::Blocked(n.min(3))).unwrap();
        prop_assert!(r_distance(s.factor.r(), &want) <= tol);
    }
}
