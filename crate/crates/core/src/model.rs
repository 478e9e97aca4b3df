//! Latency-bandwidth-flop cost models.
//!
//! Every formula returns a [`CostEstimate`] with `flops`, `words` and
//! `messages` along the critical path. `seconds` is filled in by
//! [`CostEstimate::priced`] as `flops·gamma + words·beta + messages·alpha`.
//! Logarithms are base 2, rounded up when the argument is not a power of
//! two. Only the printed leading terms are implemented; lower-order terms
//! the tables omit are omitted here too.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log2(p)`, exact for powers of two, rounded up otherwise, 0 for `p <= 1`.
pub fn lg(p: f64) -> f64 {
    if p <= 1.0 {
        return 0.0;
    }
    let l = p.log2();
    if (l - l.round()).abs() < 1e-12 {
        l.round()
    } else {
        l.ceil()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub flops: f64,
    pub words: f64,
    pub messages: f64,
    pub seconds: f64,
}

impl CostEstimate {
    pub fn new(flops: f64, words: f64, messages: f64) -> Self {
        CostEstimate {
            flops,
            words,
            messages,
            seconds: 0.0,
        }
    }

    pub fn priced(mut self, machine: &MachineModel) -> Self {
        self.seconds = self.flops * machine.gamma()
            + self.words * machine.beta
            + self.messages * machine.alpha;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineModel {
    /// Peak flop rate per processor (flop/s).
    pub peak_flops: f64,
    /// Fraction of peak the local kernels are assumed to reach.
    pub peak_fraction: f64,
    /// Seconds per word.
    pub beta: f64,
    /// Seconds per message.
    pub alpha: f64,
    /// Fast-memory words for the sequential models.
    pub fast_memory_words: f64,
    /// Memory per processor in words, for the optimizer's feasibility rule.
    pub mem_words_per_proc: f64,
    pub p_max: usize,
}

/// On-disk machine description (TOML or JSON).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub peak_flops: f64,
    pub alpha_s: f64,
    pub bandwidth_bytes_s: f64,
    pub mem_words_per_proc: f64,
    pub peak_fraction: f64,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default = "default_word_bytes")]
    pub word_bytes: f64,
    #[serde(default = "default_fast_memory")]
    pub fast_memory_words: f64,
}

fn default_p_max() -> usize {
    1
}

fn default_word_bytes() -> f64 {
    8.0
}

fn default_fast_memory() -> f64 {
    // 1 MiB of doubles
    131_072.0
}

impl MachineSpec {
    pub fn to_model(&self) -> Result<MachineModel> {
        MachineModel {
            peak_flops: self.peak_flops,
            peak_fraction: self.peak_fraction,
            beta: self.word_bytes / self.bandwidth_bytes_s,
            alpha: self.alpha_s,
            fast_memory_words: self.fast_memory_words,
            mem_words_per_proc: self.mem_words_per_proc,
            p_max: self.p_max,
        }
        .validated()
    }
}

impl MachineModel {
    /// Petascale machine: 8192 processors at 500 Gflop/s peak, 10 µs
    /// latency, 4 GB/s links, kernels at 80% of peak.
    ///
    /// The per-processor memory is not published with the machine. 5.5e10
    /// words is taken from the two reported speedup baselines: n = 10^5.5
    /// fits on 2 processors but not 1, and n = 10^6 fits on 32 but not 16.
    pub fn peta() -> Self {
        MachineModel {
            peak_flops: 500e9,
            peak_fraction: 0.8,
            beta: 8.0 / 4e9,
            alpha: 10e-6,
            fast_memory_words: 131_072.0,
            mem_words_per_proc: 5.5e10,
            p_max: 8192,
        }
    }

    /// Seconds per flop at the modeled rate.
    pub fn gamma(&self) -> f64 {
        1.0 / (self.peak_fraction * self.peak_flops)
    }

    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("peak_flops", self.peak_flops),
            ("peak_fraction", self.peak_fraction),
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("fast_memory_words", self.fast_memory_words),
            ("mem_words_per_proc", self.mem_words_per_proc),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse(format!(
                    "machine field {name} must be positive, got {v}"
                )));
            }
        }
        if self.p_max == 0 {
            return Err(Error::Parse(
                "machine field p_max must be at least 1".into(),
            ));
        }
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tsqr,
    /// Blocked Householder: `PDGEQRF` in parallel, `PFDGEQRF` out of core.
    Householder,
    MgsRow,
    Cgs,
    CholeskyQr,
}

/// Parallel TSQR on a binary tree.
pub fn cost_par_tsqr(m: f64, n: f64, p: f64) -> CostEstimate {
    let l = lg(p);
    CostEstimate::new(
        2.0 * m * n * n / p + 2.0 * n * n * n / 3.0 * l,
        n * n / 2.0 * l,
        l,
    )
}

/// Rows of the parallel 1-D table (`P` processors, block-row layout).
pub fn cost_parallel(alg: Algorithm, m: f64, n: f64, p: f64) -> CostEstimate {
    let l = lg(p);
    let words = n * n / 2.0 * l;
    match alg {
        Algorithm::Tsqr => cost_par_tsqr(m, n, p),
        Algorithm::Householder => CostEstimate::new(
            2.0 * m * n * n / p - 2.0 * n * n * n / (3.0 * p),
            words,
            2.0 * n * l,
        ),
        Algorithm::MgsRow | Algorithm::Cgs => {
            CostEstimate::new(2.0 * m * n * n / p, words, 2.0 * n * l)
        }
        Algorithm::CholeskyQr => CostEstimate::new(m * n * n / p + n * n * n / 3.0, words, l),
    }
}

fn w_tilde(n: f64, w: f64) -> Result<f64> {
    let tri = n * (n + 1.0) / 2.0;
    if w <= tri {
        return Err(Error::FastMemoryTooSmall { w, triangle: tri });
    }
    Ok(w - tri)
}

/// Sequential TSQR with `W` words of fast memory.
pub fn cost_seq_tsqr(m: f64, n: f64, w: f64) -> Result<CostEstimate> {
    let wt = w_tilde(n, w)?;
    Ok(CostEstimate::new(
        2.0 * m * n * n - 2.0 * n * n * n / 3.0,
        2.0 * m * n - n * (n + 1.0) / 2.0 + m * n * n / wt,
        2.0 * m * n / wt,
    ))
}

/// Rows of the sequential (two-level memory) table. There is no sequential
/// CGS row.
pub fn cost_sequential(alg: Algorithm, m: f64, n: f64, w: f64) -> Result<CostEstimate> {
    let wt = w_tilde(n, w)?;
    Ok(match alg {
        Algorithm::Tsqr => return cost_seq_tsqr(m, n, w),
        Algorithm::Householder => CostEstimate::new(
            2.0 * m * n * n - 2.0 * n * n * n / 3.0,
            m * m * n * n / (2.0 * w) - m * n * n * n / (6.0 * w) + 1.5 * m * n - 0.75 * n * n,
            2.0 * m * n / w + m * n * n / (2.0 * w),
        ),
        Algorithm::MgsRow => CostEstimate::new(
            2.0 * m * n * n,
            1.5 * m * n + m * m * n * n / (2.0 * wt),
            2.0 * m * n * n / wt,
        ),
        Algorithm::CholeskyQr => {
            CostEstimate::new(m * n * n + n * n * n / 3.0, 3.0 * m * n, 6.0 * m * n / w)
        }
        Algorithm::Cgs => return Err(Error::NoModel("no sequential model for CGS".into())),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaqrVariant {
    /// Drop the redundant-flop reduction enabled by overlapping the update
    /// exchanges with computation.
    pub overlap: bool,
    /// Pipelined row broadcasts: each costs `min(2, log Pc)` latencies.
    pub look_ahead: bool,
}

/// Parallel CAQR on a `Pr x Pc` grid with `b x b` blocks.
pub fn cost_caqr(m: f64, n: f64, pr: f64, pc: f64, b: f64) -> CostEstimate {
    let (lr, lc) = (lg(pr), lg(pc));
    let p = pr * pc;
    CostEstimate::new(
        2.0 * n * n * (3.0 * m - n) / (3.0 * p)
            + b * n * n / (2.0 * pc)
            + 3.0 * b * n * (2.0 * m - n) / (2.0 * pr)
            + (4.0 * b * b * n / 3.0 + n * n * (3.0 * b + 5.0) / (2.0 * pc)) * lr
            - b * b * n,
        (n * n / pc + b * n / 2.0) * lr + ((m * n - n * n / 2.0) / pr + 2.0 * n) * lc,
        3.0 * n / b * lr + 2.0 * n / b * lc,
    )
}

/// ScaLAPACK-style 2-D blocked Householder QR.
pub fn cost_pdgeqrf_2d(m: f64, n: f64, pr: f64, pc: f64, b: f64) -> CostEstimate {
    let (lr, lc) = (lg(pr), lg(pc));
    let p = pr * pc;
    CostEstimate::new(
        2.0 * n * n * (3.0 * m - n) / (3.0 * p)
            + b * n * n / (2.0 * pc)
            + 3.0 * b * n * (2.0 * m - n) / (2.0 * pr)
            - b * b * n / (3.0 * pr),
        (n * n / pc + b * n) * lr + ((m * n - n * n / 2.0) / pr + b * n / 2.0) * lc,
        3.0 * n * lr + 2.0 * n / b * lc,
    )
}

/// CAQR with optional look-ahead and overlap adjustments.
pub fn cost_caqr_variant(
    m: f64,
    n: f64,
    pr: f64,
    pc: f64,
    b: f64,
    variant: CaqrVariant,
    machine: &MachineModel,
) -> CostEstimate {
    let mut c = if variant.overlap {
        overlap_adjustment(m, n, pr, pc, b, machine).0
    } else {
        cost_caqr(m, n, pr, pc, b)
    };
    if variant.look_ahead && lg(pc) > 2.0 {
        c.messages -= 2.0 * n / b * (lg(pc) - 2.0);
    }
    c
}

/// When `beta/gamma > b + 1` the update exchanges hide enough computation
/// to remove `n²(b+1) log(Pr) / Pc` redundant flops. Returns the adjusted
/// estimate and whether the adjustment applied.
pub fn overlap_adjustment(
    m: f64,
    n: f64,
    pr: f64,
    pc: f64,
    b: f64,
    machine: &MachineModel,
) -> (CostEstimate, bool) {
    let mut c = cost_caqr(m, n, pr, pc, b);
    let applies = machine.beta / machine.gamma() > b + 1.0;
    if applies {
        c.flops -= n * n * (b + 1.0) * lg(pr) / pc;
    }
    (c, applies)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoD {
    Caqr,
    Pdgeqrf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestConfig {
    pub p: usize,
    pub pr: usize,
    pub pc: usize,
    pub b: usize,
    pub cost: CostEstimate,
}

impl BestConfig {
    pub fn seconds(&self) -> f64 {
        self.cost.seconds
    }
}

/// Block sizes 1, 5, 10, ..., 50, 60, ..., capped at `min(200, m/Pr, n/Pc)`.
pub fn block_sizes(m: f64, n: f64, pr: usize, pc: usize) -> Vec<usize> {
    let cap = 200f64.min(m / pr as f64).min(n / pc as f64);
    let grid = std::iter::once(1)
        .chain((5..=50).step_by(5))
        .chain((60..=200).step_by(10));
    let out: Vec<usize> = grid.filter(|&b| b as f64 <= cap).collect();
    if out.is_empty() {
        vec![1]
    } else {
        out
    }
}

/// Memory rule: the `n x n` matrix spread over `P` processors must fit.
pub fn feasible(n: f64, p: usize, machine: &MachineModel) -> bool {
    n * n / p as f64 <= machine.mem_words_per_proc
}

fn price(
    alg: TwoD,
    n: f64,
    pr: usize,
    pc: usize,
    b: usize,
    variant: CaqrVariant,
    machine: &MachineModel,
) -> CostEstimate {
    let (prf, pcf, bf) = (pr as f64, pc as f64, b as f64);
    match alg {
        TwoD::Caqr => cost_caqr_variant(n, n, prf, pcf, bf, variant, machine),
        TwoD::Pdgeqrf => cost_pdgeqrf_2d(n, n, prf, pcf, bf),
    }
    .priced(machine)
}

/// Best grid shape and block size for a square `n x n` matrix on exactly
/// `p` processors (`p` a power of two), or `None` if it does not fit.
pub fn best_at_p(
    n: f64,
    p: usize,
    alg: TwoD,
    variant: CaqrVariant,
    machine: &MachineModel,
) -> Option<BestConfig> {
    if !feasible(n, p, machine) {
        return None;
    }
    let mut best: Option<BestConfig> = None;
    let mut pr = 1;
    while pr <= p {
        let pc = p / pr;
        for b in block_sizes(n, n, pr, pc) {
            let cost = price(alg, n, pr, pc, b, variant, machine);
            if best.is_none_or(|x| cost.seconds < x.cost.seconds) {
                best = Some(BestConfig { p, pr, pc, b, cost });
            }
        }
        pr *= 2;
    }
    best
}

/// Powers of two from 1 up to `p_max`.
pub fn processor_counts(p_max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |&p| p.checked_mul(2))
        .take_while(|&p| p <= p_max)
        .collect()
}

/// Exhaustive search over `P`, grid shape and block size.
pub fn optimize_config(
    n: f64,
    p_max: usize,
    machine: &MachineModel,
    alg: TwoD,
    variant: CaqrVariant,
) -> Result<BestConfig> {
    processor_counts(p_max)
        .into_iter()
        .filter_map(|p| best_at_p(n, p, alg, variant, machine))
        .min_by(|a, b| a.cost.seconds.total_cmp(&b.cost.seconds))
        .ok_or_else(|| {
            Error::NoFeasibleConfig(format!("n = {n} does not fit on up to {p_max} processors"))
        })
}

/// Per-`P` comparison for one problem size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointComparison {
    pub p: usize,
    pub pdgeqrf: BestConfig,
    pub caqr: BestConfig,
    pub caqr_overlap: BestConfig,
    pub caqr_look_ahead: BestConfig,
}

impl PointComparison {
    pub fn ratio(&self) -> f64 {
        self.pdgeqrf.seconds() / self.caqr.seconds()
    }

    pub fn ratio_overlap(&self) -> f64 {
        self.pdgeqrf.seconds() / self.caqr_overlap.seconds()
    }

    pub fn ratio_look_ahead(&self) -> f64 {
        self.pdgeqrf.seconds() / self.caqr_look_ahead.seconds()
    }
}

pub fn compare_at(n: f64, p: usize, machine: &MachineModel) -> Option<PointComparison> {
    let pd = best_at_p(n, p, TwoD::Pdgeqrf, CaqrVariant::default(), machine)?;
    let ca = best_at_p(n, p, TwoD::Caqr, CaqrVariant::default(), machine)?;
    let ov = best_at_p(
        n,
        p,
        TwoD::Caqr,
        CaqrVariant {
            overlap: true,
            look_ahead: false,
        },
        machine,
    )?;
    let la = best_at_p(
        n,
        p,
        TwoD::Caqr,
        CaqrVariant {
            overlap: false,
            look_ahead: true,
        },
        machine,
    )?;
    Some(PointComparison {
        p,
        pdgeqrf: pd,
        caqr: ca,
        caqr_overlap: ov,
        caqr_look_ahead: la,
    })
}

/// One row of the speedup report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub log10_n: f64,
    pub n: f64,
    pub feasible: bool,
    /// Smallest processor count that holds the matrix.
    pub min_p: usize,
    /// `P` where PDGEQRF is fastest, and the CAQR speedup there.
    pub best_p_pdgeqrf: usize,
    pub ratio_at_best_p: f64,
    pub ratio_at_best_p_overlap: f64,
    pub ratio_at_best_p_look_ahead: f64,
    /// Processor counts whose PDGEQRF time is within 1% of the best one,
    /// with the range of CAQR speedups over them.
    pub near_tie_p_lo: usize,
    pub near_tie_p_hi: usize,
    pub near_tie_ratio_lo: f64,
    pub near_tie_ratio_hi: f64,
    /// Largest CAQR speedup over all processor counts, and where.
    pub best_ratio: f64,
    pub best_ratio_p: usize,
    pub ratio_at_p_max: f64,
    pub ratio_at_p_max_overlap: f64,
    pub ratio_at_p_max_look_ahead: f64,
    /// Best CAQR over best PDGEQRF, each at its own optimal `P`.
    pub best_vs_best: f64,
    /// CAQR time on `min_p` processors over CAQR time on `p_max`.
    pub caqr_scaling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub machine: MachineModel,
    pub rows: Vec<SpeedupRow>,
}

/// `n = 10^e` for `e = 3.0, 3.5, ..., 7.5`.
pub fn default_sizes() -> Vec<f64> {
    (0..10).map(|i| 3.0 + 0.5 * i as f64).collect()
}

/// Table of CAQR over PDGEQRF modeled speedups for square matrices of
/// order `10^e`, `e` in `log10_sizes`.
pub fn speedup_report(log10_sizes: &[f64], machine: &MachineModel) -> SpeedupReport {
    let rows = log10_sizes
        .iter()
        .map(|&e| speedup_row(e, machine))
        .collect();
    SpeedupReport {
        machine: *machine,
        rows,
    }
}

fn speedup_row(e: f64, machine: &MachineModel) -> SpeedupRow {
    let n = 10f64.powf(e).round();
    let points: Vec<PointComparison> = processor_counts(machine.p_max)
        .into_iter()
        .filter_map(|p| compare_at(n, p, machine))
        .collect();
    let Some(first) = points.first() else {
        return SpeedupRow {
            log10_n: e,
            n,
            feasible: false,
            min_p: 0,
            best_p_pdgeqrf: 0,
            ratio_at_best_p: f64::NAN,
            ratio_at_best_p_overlap: f64::NAN,
            ratio_at_best_p_look_ahead: f64::NAN,
            near_tie_p_lo: 0,
            near_tie_p_hi: 0,
            near_tie_ratio_lo: f64::NAN,
            near_tie_ratio_hi: f64::NAN,
            best_ratio: f64::NAN,
            best_ratio_p: 0,
            ratio_at_p_max: f64::NAN,
            ratio_at_p_max_overlap: f64::NAN,
            ratio_at_p_max_look_ahead: f64::NAN,
            best_vs_best: f64::NAN,
            caqr_scaling: f64::NAN,
        };
    };
    let last = points.last().expect("nonempty");
    let best_pd = points
        .iter()
        .min_by(|a, b| a.pdgeqrf.seconds().total_cmp(&b.pdgeqrf.seconds()))
        .expect("nonempty");
    let best_ca = points
        .iter()
        .min_by(|a, b| a.caqr.seconds().total_cmp(&b.caqr.seconds()))
        .expect("nonempty");
    let best_ratio = points
        .iter()
        .max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
        .expect("nonempty");
    let ties: Vec<&PointComparison> = points
        .iter()
        .filter(|pt| pt.pdgeqrf.seconds() <= best_pd.pdgeqrf.seconds() * 1.01)
        .collect();
    let tie_ratios = ties.iter().map(|t| t.ratio());
    SpeedupRow {
        log10_n: e,
        n,
        feasible: true,
        min_p: first.p,
        best_p_pdgeqrf: best_pd.p,
        ratio_at_best_p: best_pd.ratio(),
        ratio_at_best_p_overlap: best_pd.ratio_overlap(),
        ratio_at_best_p_look_ahead: best_pd.ratio_look_ahead(),
        near_tie_p_lo: ties.iter().map(|t| t.p).min().unwrap_or(0),
        near_tie_p_hi: ties.iter().map(|t| t.p).max().unwrap_or(0),
        near_tie_ratio_lo: tie_ratios.clone().fold(f64::INFINITY, f64::min),
        near_tie_ratio_hi: tie_ratios.fold(f64::NEG_INFINITY, f64::max),
        best_ratio: best_ratio.ratio(),
        best_ratio_p: best_ratio.p,
        ratio_at_p_max: last.ratio(),
        ratio_at_p_max_overlap: last.ratio_overlap(),
        ratio_at_p_max_look_ahead: last.ratio_look_ahead(),
        best_vs_best: best_pd.pdgeqrf.seconds() / best_ca.caqr.seconds(),
        caqr_scaling: first.caqr.seconds() / last.caqr.seconds(),
    }
}

impl SpeedupReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn row(&self, log10_n: f64) -> Option<&SpeedupRow> {
        self.rows
            .iter()
            .find(|r| (r.log10_n - log10_n).abs() < 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn log_rounding() {
        assert_eq!(lg(1.0), 0.0);
        assert_eq!(lg(16.0), 4.0);
        assert_eq!(lg(5.0), 3.0);
    }

    #[test]
    fn par_tsqr_example() {
        let c = cost_par_tsqr(1024.0, 32.0, 16.0);
        assert!(close(c.flops, 131072.0 + 2.0 / 3.0 * 32768.0 * 4.0, 1e-14));
        assert_eq!((c.words, c.messages), (2048.0, 4.0));
        let one = cost_par_tsqr(1024.0, 32.0, 1.0);
        assert_eq!(
            (one.flops, one.words, one.messages),
            (2.0 * 1024.0 * 1024.0, 0.0, 0.0)
        );
    }

    #[test]
    fn seq_tsqr_example() {
        let c = cost_seq_tsqr(1e6, 50.0, 1e6).unwrap();
        assert!(close(c.messages, 1e8 / 998725.0, 1e-14));
        assert!(close(c.words, 1e8 - 1275.0 + 2.5e9 / 998725.0, 1e-14));
        assert!(cost_seq_tsqr(10.0, 50.0, 1000.0).is_err());
    }

    #[test]
    fn peta_gamma_and_overlap() {
        let m = MachineModel::peta();
        assert!(close(m.gamma(), 2.5e-12, 1e-12));
        assert!(close(m.beta / m.gamma(), 800.0, 1e-12));
        assert!(overlap_adjustment(1e4, 1e4, 64.0, 64.0, 50.0, &m).1);
    }

    #[test]
    fn sequential_cgs_has_no_model() {
        assert!(matches!(
            cost_sequential(Algorithm::Cgs, 100.0, 5.0, 1e4),
            Err(Error::NoModel(_))
        ));
    }

    #[test]
    fn block_size_grid() {
        assert_eq!(block_sizes(1e6, 1e6, 1, 1).len(), 1 + 10 + 15);
        assert_eq!(block_sizes(12.0, 12.0, 1, 1), vec![1, 5, 10]);
        assert_eq!(block_sizes(2.0, 2.0, 4, 1), vec![1]);
    }

    #[test]
    fn processor_grid() {
        assert_eq!(processor_counts(8), vec![1, 2, 4, 8]);
        assert_eq!(processor_counts(6), vec![1, 2, 4]);
    }
}
