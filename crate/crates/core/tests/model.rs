use proptest::prelude::*;
use tsqr::model::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn table_cells_at_1e4_on_64x64() {
    // hand-evaluated: lg 64 = 6, n/b = 200
    let c = cost_caqr(1e4, 1e4, 64.0, 64.0, 50.0);
    assert_eq!(c.messages, 3.0 * 200.0 * 6.0 + 2.0 * 200.0 * 6.0);
    assert!(close(c.words, 15_682_500.0, 1e-12));
    assert!(close(c.flops, 1_383_333_333.333_333, 1e-12));
    let p = cost_pdgeqrf_2d(1e4, 1e4, 64.0, 64.0, 50.0);
    assert_eq!(p.messages, 182_400.0);
    assert!(close(p.words, 18_562_500.0, 1e-12));
    assert!(close(p.flops, 481_640_625.0, 1e-12));
}

#[test]
fn single_processor_sends_nothing() {
    for b in [1.0, 8.0, 50.0] {
        assert_eq!(cost_caqr(500.0, 300.0, 1.0, 1.0, b).messages, 0.0);
        assert_eq!(cost_pdgeqrf_2d(500.0, 300.0, 1.0, 1.0, b).messages, 0.0);
    }
}

#[test]
fn message_ratio_is_b_on_one_column() {
    for (pr, b) in [(2.0, 4.0), (16.0, 25.0), (1024.0, 200.0)] {
        let r = cost_pdgeqrf_2d(1e5, 1e4, pr, 1.0, b).messages
            / cost_caqr(1e5, 1e4, pr, 1.0, b).messages;
        assert!(close(r, b, 1e-12), "{r} vs {b}");
    }
}

#[test]
fn one_d_rows() {
    let (m, n, p) = (1e6, 100.0, 64.0);
    assert_eq!(cost_parallel(Algorithm::CholeskyQr, m, n, p).messages, 6.0);
    assert_eq!(
        cost_parallel(Algorithm::Householder, m, n, p).messages,
        2.0 * 100.0 * 6.0
    );
    assert_eq!(cost_parallel(Algorithm::Tsqr, m, n, p).messages, 6.0);
    let s = cost_sequential(Algorithm::CholeskyQr, m, n, 1e5).unwrap();
    assert_eq!((s.words, s.messages), (3.0 * m * n, 6.0 * m * n / 1e5));
}

#[test]
fn messages_bounded_when_triangle_is_small() {
    // W̃ >= 2W/3 gives 2mn/W̃ <= 3mn/W
    for (m, n, w) in [(1e6, 10.0, 1e4), (1e5, 50.0, 4e3), (1e7, 100.0, 1e6)] {
        let wt = w - n * (n + 1.0) / 2.0;
        if wt < 2.0 * w / 3.0 {
            continue;
        }
        let c = cost_seq_tsqr(m, n, w).unwrap();
        assert!(c.messages <= 3.0 * m * n / w, "{m} {n} {w}");
    }
}

#[test]
fn overlap_adjustment_examples() {
    let peta = MachineModel::peta();
    let (adj, applied) = overlap_adjustment(1e4, 1e4, 64.0, 64.0, 50.0, &peta);
    assert!(applied);
    let base = cost_caqr(1e4, 1e4, 64.0, 64.0, 50.0);
    assert!(close(
        base.flops - adj.flops,
        1e8 * 51.0 * 6.0 / 64.0,
        1e-12
    ));
    assert_eq!((adj.words, adj.messages), (base.words, base.messages));

    // beta/gamma = 800: b = 800 no longer qualifies
    let (same, applied) = overlap_adjustment(1e4, 1e4, 64.0, 64.0, 800.0, &peta);
    assert!(!applied);
    assert_eq!(same, cost_caqr(1e4, 1e4, 64.0, 64.0, 800.0));
}

#[test]
fn look_ahead_charges_two_latencies_per_broadcast() {
    let peta = MachineModel::peta();
    let la = cost_caqr_variant(
        1e4,
        1e4,
        4.0,
        64.0,
        50.0,
        CaqrVariant {
            overlap: false,
            look_ahead: true,
        },
        &peta,
    );
    assert_eq!(la.messages, 3.0 * 200.0 * 2.0 + 2.0 * 200.0 * 2.0);
}

#[test]
fn caqr_never_loses_at_best_p() {
    let peta = MachineModel::peta();
    let rep = speedup_report(&default_sizes(), &peta);
    for row in rep.rows.iter().filter(|r| r.feasible) {
        assert!(row.ratio_at_best_p >= 1.0 - 1e-9, "{row:?}");
        assert!(row.best_ratio >= 1.0 - 1e-9);
        assert!(row.best_vs_best >= 1.0 - 1e-9);
    }
}

#[test]
fn messages_fall_with_block_size() {
    let mut prev = f64::INFINITY;
    for b in block_sizes(1e5, 1e5, 16, 16) {
        let c = cost_caqr(1e5, 1e5, 16.0, 16.0, b as f64);
        assert!(c.messages < prev);
        prev = c.messages;
    }
}

#[test]
fn memory_rule_sets_the_smallest_p() {
    let peta = MachineModel::peta();
    let rep = speedup_report(&[5.5, 6.0, 7.5], &peta);
    assert_eq!(rep.row(5.5).unwrap().min_p, 2);
    assert_eq!(rep.row(6.0).unwrap().min_p, 32);
    // 10^15 / 5.5e10 > 8192
    assert!(!rep.row(7.5).unwrap().feasible);
    assert!(matches!(
        optimize_config(
            10f64.powf(7.5),
            8192,
            &peta,
            TwoD::Caqr,
            CaqrVariant::default()
        ),
        Err(tsqr::Error::NoFeasibleConfig(_))
    ));
}

#[test]
fn report_csv_has_one_line_per_size() {
    let rep = speedup_report(&[3.0, 4.0], &MachineModel::peta());
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .next()
        .unwrap()
        .starts_with("log10_n,n,feasible,min_p,best_p_pdgeqrf"));
}

#[test]
fn machine_spec_round_trips_through_json() {
    let spec: MachineSpec = serde_json::from_str(
        r#"{"peak_flops": 5e11, "alpha_s": 1e-5, "bandwidth_bytes_s": 4e9,
            "mem_words_per_proc": 5.5e10, "peak_fraction": 0.8, "p_max": 8192}"#,
    )
    .unwrap();
    assert_eq!(spec.to_model().unwrap(), MachineModel::peta());
    let bad = MachineSpec {
        alpha_s: -1.0,
        ..spec
    };
    assert!(bad.to_model().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn best_time_is_nonincreasing_in_p_max(e in 3.0f64..5.0, k in 0u32..13) {
        let peta = MachineModel::peta();
        let n = 10f64.powf(e).round();
        let (lo, hi) = (1usize << k, 1usize << (k + 1));
        for alg in [TwoD::Caqr, TwoD::Pdgeqrf] {
            let a = optimize_config(n, lo, &peta, alg, CaqrVariant::default()).unwrap();
            let b = optimize_config(n, hi, &peta, alg, CaqrVariant::default()).unwrap();
            prop_assert!(b.seconds() <= a.seconds());
        }
    }

    #[test]
    fn caqr_seconds_continuous_in_b(pr_l in 0u32..6, pc_l in 0u32..6) {
        let peta = MachineModel::peta();
        let (pr, pc) = (1usize << pr_l, 1usize << pc_l);
        let bs = block_sizes(1e5, 1e5, pr, pc);
        let t: Vec<f64> = bs
            .iter()
            .map(|&b| cost_caqr(1e5, 1e5, pr as f64, pc as f64, b as f64).priced(&peta).seconds)
            .collect();
        for w in t.windows(2) {
            prop_assert!(w[1].is_finite() && (w[1] / w[0]).abs() < 10.0);
        }
    }
}

#[test]
fn look_ahead_never_adds_latency() {
    let peta = MachineModel::peta();
    let la = CaqrVariant {
        overlap: false,
        look_ahead: true,
    };
    for pc in [1.0, 2.0, 4.0] {
        assert_eq!(
            cost_caqr_variant(1e4, 1e4, 8.0, pc, 50.0, la, &peta),
            cost_caqr(1e4, 1e4, 8.0, pc, 50.0)
        );
    }
}
