use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use tsqr::alt::{cgs, cholesky_qr, mgs_row, stability_sweep};
use tsqr::caqr::{caqr_factor_with, caqr_message_census};
use tsqr::executor::ExecMode;
use tsqr::gen::{gen_cond_matrix, random_matrix, CondSpec};
use tsqr::householder::qr_blocked;
use tsqr::householder::QrStrategy;
use tsqr::io::{read_matrix, write_matrix};
use tsqr::layout::{BlockCyclicLayout, BlockRowLayout};
use tsqr::model::*;
use tsqr::tree::ReductionTree;
use tsqr::tsqr::{
    choose_p_sequential, tsqr_parallel_matrix, tsqr_sequential, BlockStore, ParallelOptions,
};
use tsqr::{Error, Matrix};

use crate::{
    Algo, CaqrArgs, Command, FactorArgs, Formula, GenArgs, ModelArgs, OocArgs, StabilityArgs,
};

/// Exit code and message of a failed command.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    fn numerical(msg: impl Into<String>) -> Self {
        Failure {
            code: 1,
            msg: msg.into(),
        }
    }

    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 1 } else { 2 },
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::config(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Factor(a) => cmd_factor(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Oocdemo(a) => cmd_oocdemo(&a),
        Command::Model(a) => cmd_model(&a),
        Command::Stability(a) => cmd_stability(&a),
        Command::Caqr(a) => cmd_caqr(&a),
    }
}

fn check_input(path: &Path) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::config(format!("cannot read {}", path.display())))
    }
}

fn check_output(path: &Path) -> CmdResult {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure::config(format!(
            "directory of {} does not exist",
            path.display()
        ))),
        _ => Ok(()),
    }
}

fn check_outputs<'a>(paths: impl IntoIterator<Item = &'a Option<PathBuf>>) -> CmdResult {
    paths
        .into_iter()
        .flatten()
        .try_for_each(|p| check_output(p))
}

fn parse_grid(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::config(format!("bad grid {s:?}, expected PrxPc"));
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let r = r.trim().parse().map_err(|_| bad())?;
    let c = c.trim().parse().map_err(|_| bad())?;
    Ok((r, c))
}

fn exec_mode(threads: usize) -> ExecMode {
    if threads > 1 {
        ExecMode::Threads
    } else {
        ExecMode::Simulated
    }
}

fn relative_residual(a: &Matrix, q: &Matrix, r: &Matrix) -> Result<f64, Error> {
    let d = a.sub(&q.matmul(r)?)?.frobenius_norm();
    let na = a.frobenius_norm();
    Ok(if na > 0.0 { d / na } else { d })
}

fn print_json(v: &serde_json::Value) {
    // a closed pipe downstream is not an error worth reporting
    let _ = writeln!(
        io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(v).expect("json value")
    );
}

fn csv_sink(target: &str) -> Result<Box<dyn Write>, Failure> {
    if target == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        check_output(Path::new(target))?;
        Ok(Box::new(BufWriter::new(File::create(target)?)))
    }
}

fn cmd_factor(args: &FactorArgs) -> CmdResult {
    check_input(&args.input)?;
    check_outputs([&args.out, &args.q_out])?;
    let tree: Option<ReductionTree> = match args.algo {
        Algo::Tsqr => Some(args.tree.parse()?),
        _ => None,
    };
    let grid = match args.algo {
        Algo::Caqr => Some(parse_grid(&args.grid)?),
        _ => None,
    };
    let a = read_matrix(&args.input)?;
    let (m, n) = a.shape();
    let mode = exec_mode(args.threads);

    let (q, r, flops, conditional) = match args.algo {
        Algo::Tsqr => {
            let opts = ParallelOptions {
                exec: mode,
                ..Default::default()
            };
            let t = tsqr_parallel_matrix(&a, tree.as_ref().expect("parsed"), opts)?;
            let flops = t.recorders.iter().map(|r| r.flops.flops).sum::<u64>();
            (t.factor.explicit_q(), t.r().clone(), flops, false)
        }
        Algo::Householder => {
            let qr = qr_blocked(&a, args.block.min(n).max(1))?;
            (qr.factor.explicit_q(true), qr.r, qr.flops.flops, false)
        }
        Algo::Cgs | Algo::Mgs | Algo::Choleskyqr => {
            let f = match args.algo {
                Algo::Cgs => cgs,
                Algo::Mgs => mgs_row,
                _ => cholesky_qr,
            };
            let x = f(&a)?;
            (x.q, x.r, x.flops.flops + x.q_flops.flops, true)
        }
        Algo::Caqr => {
            let (pr, pc) = grid.expect("parsed");
            let lay = BlockCyclicLayout::new(m, n, args.block, pr, pc)?;
            let res = caqr_factor_with(&a, &lay, mode)?;
            let flops = res.recorders.iter().map(|r| r.flops.flops).sum::<u64>();
            (res.explicit_q(), res.r.clone(), flops, false)
        }
    };

    let mut report = json!({
        "algo": format!("{:?}", args.algo).to_lowercase(),
        "m": m,
        "n": n,
        "flops": flops,
    });
    let loss = (args.verify || conditional).then(|| q.orthogonality_loss());
    if let Some(l) = loss {
        report["orthogonality"] = json!(l);
    }
    if args.verify {
        report["residual"] = json!(relative_residual(&a, &q, &r)?);
    }
    print_json(&report);

    if let Some(l) = loss.filter(|_| conditional) {
        if (l.is_nan() || l > args.max_loss) && !args.allow_unstable {
            return Err(Failure::numerical(format!(
                "orthogonality loss {l:.3e} exceeds {:.1e}; pass --allow-unstable to keep the result",
                args.max_loss
            )));
        }
    }
    if let Some(p) = &args.out {
        write_matrix(p, &r)?;
    }
    if let Some(p) = &args.q_out {
        write_matrix(p, &q)?;
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    check_output(&args.out)?;
    let a = gen_cond_matrix(&CondSpec::new(args.m, args.n, args.kappa, args.seed))?;
    write_matrix(&args.out, &a)?;
    Ok(())
}

fn input_or_random(
    input: &Option<PathBuf>,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<Matrix, Failure> {
    match input {
        Some(p) => {
            check_input(p)?;
            Ok(read_matrix(p)?)
        }
        None => Ok(random_matrix(m, n, seed)),
    }
}

fn cmd_oocdemo(args: &OocArgs) -> CmdResult {
    check_outputs([&args.out])?;
    let a = input_or_random(&args.input, args.m, args.n, args.seed)?;
    let (m, n) = a.shape();
    let p = choose_p_sequential(m, n, args.w)?;
    let layout = BlockRowLayout::new(m, n, p).map_err(|e| {
        Failure::config(format!(
            "W = {} needs {p} blocks of under {n} rows each: {e}",
            args.w
        ))
    })?;
    let mut store = BlockStore::create_dir(&args.dir, &a, &layout)?;
    let run = tsqr_sequential(&mut store, QrStrategy::Unblocked)?;
    let chk = run.model_check(args.w)?;
    let c = run.counters;

    let mut out = csv::Writer::from_writer(io::stdout().lock());
    let rows: [(&str, f64, f64); 8] = [
        ("blocks", p as f64, (m * n) as f64 / chk.w_tilde),
        ("a_reads", c.a_reads as f64, p as f64),
        ("y_writes", c.y_writes as f64, p as f64),
        ("transfers", c.transfers() as f64, chk.model.messages),
        (
            "block_words",
            (c.words_read + c.y_words) as f64,
            chk.model_block_words,
        ),
        ("chain_words", chk.chain_words as f64, chk.model_chain_words),
        ("words", c.words_moved() as f64, chk.model.words),
        ("flops", run.flops.flops as f64, chk.model.flops),
    ];
    let io_err = |e: csv::Error| Failure::config(e.to_string());
    out.write_record(["quantity", "measured", "model"])
        .map_err(io_err)?;
    for (name, measured, model) in rows {
        out.write_record([name.to_string(), measured.to_string(), model.to_string()])
            .map_err(io_err)?;
    }
    out.flush()?;
    if let Some(path) = &args.out {
        write_matrix(path, run.factor.r())?;
    }
    Ok(())
}

fn load_machine(spec: &str) -> Result<MachineModel, Failure> {
    if spec == "peta" {
        return Ok(MachineModel::peta());
    }
    let path = Path::new(spec);
    check_input(path)?;
    let text = std::fs::read_to_string(path)?;
    let parsed: MachineSpec = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| Failure::config(format!("{spec}: {e}")))?
    } else {
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{spec}: {e}")))?
    };
    Ok(parsed.to_model()?)
}

fn cmd_model(args: &ModelArgs) -> CmdResult {
    let machine = load_machine(&args.machine)?;
    if let Some(f) = args.eval {
        let (pr, pc) = parse_grid(&args.grid)?;
        let (pr, pc) = (pr as f64, pc as f64);
        let (m, n, p, b) = (args.m, args.n, args.p, args.block);
        let w = args.w.unwrap_or(machine.fast_memory_words);
        let cost = match f {
            Formula::Caqr => cost_caqr(m, n, pr, pc, b),
            Formula::Pdgeqrf => cost_pdgeqrf_2d(m, n, pr, pc, b),
            Formula::ParTsqr => cost_parallel(Algorithm::Tsqr, m, n, p),
            Formula::ParHouseholder => cost_parallel(Algorithm::Householder, m, n, p),
            Formula::ParCholeskyqr => cost_parallel(Algorithm::CholeskyQr, m, n, p),
            Formula::SeqTsqr => cost_seq_tsqr(m, n, w)?,
        }
        .priced(&machine);
        print_json(&serde_json::to_value(cost).map_err(|e| Failure::config(e.to_string()))?);
        if args.report.is_none() {
            return Ok(());
        }
    }
    let sizes = args.sizes.clone().unwrap_or_else(default_sizes);
    let report = speedup_report(&sizes, &machine);
    report.write_csv(csv_sink(args.report.as_deref().unwrap_or("-"))?)?;
    Ok(())
}

fn parse_kappas(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|k| *k >= 1.0 && k.is_finite())
                .ok_or_else(|| Failure::config(format!("bad condition number {t:?}")))
        })
        .collect()
}

fn cmd_stability(args: &StabilityArgs) -> CmdResult {
    let kappas = parse_kappas(&args.kappas)?;
    check_outputs([&args.cells])?;
    let sink = csv_sink(&args.out)?;
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let report = stability_sweep(&kappas, args.m, args.n, &seeds)?;
    report.write_csv(sink)?;
    if let Some(p) = &args.cells {
        let mut out = csv::Writer::from_path(p).map_err(|e| Failure::config(e.to_string()))?;
        for cell in &report.cells {
            out.serialize(cell)
                .map_err(|e| Failure::config(e.to_string()))?;
        }
        out.flush()?;
    }
    Ok(())
}

fn cmd_caqr(args: &CaqrArgs) -> CmdResult {
    check_outputs([&args.out, &args.census])?;
    let (pr, pc) = parse_grid(&args.grid)?;
    let a = input_or_random(&args.input, args.m, args.n, args.seed)?;
    let (m, n) = a.shape();
    let lay = BlockCyclicLayout::new(m, n, args.block, pr, pc)?;
    let res = caqr_factor_with(&a, &lay, exec_mode(args.threads))?;
    let census = caqr_message_census(&res);
    let residual = relative_residual(&a, &res.explicit_q(), &res.r)?;
    print_json(&json!({
        "m": m,
        "n": n,
        "grid": [pr, pc],
        "block": args.block,
        "residual": residual,
        "total_messages": census.total_messages,
        "total_words": census.total_words,
        "column_messages": census.column_messages(),
        "schedule_messages": census.schedule_messages,
        "critical": census.critical,
        "model": census.model,
    }));
    if let Some(p) = &args.census {
        census.write_csv(BufWriter::new(File::create(p)?))?;
    }
    if let Some(p) = &args.out {
        write_matrix(p, &res.r)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("4x2").unwrap(), (4, 2));
        assert_eq!(parse_grid(" 8 X 1 ").unwrap(), (8, 1));
        for bad in ["4", "x2", "4x", "ax2", "4x2x1"] {
            assert_eq!(parse_grid(bad).unwrap_err().code, 2, "{bad}");
        }
    }

    #[test]
    fn kappa_lists() {
        assert_eq!(parse_kappas("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_kappas("1, 1e3,").unwrap(), vec![1.0, 1e3]);
        assert!(parse_kappas("0.5").is_err());
        assert!(parse_kappas("inf").is_err());
        assert!(parse_kappas("abc").is_err());
    }

    #[test]
    fn error_classes() {
        let num = Failure::from(Error::NotPositiveDefinite {
            pivot: 3,
            value: -1.0,
        });
        assert_eq!(num.code, 1);
        assert_eq!(Failure::from(Error::Grid("x".into())).code, 2);
    }
}
