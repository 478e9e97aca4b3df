//! Baselines whose orthogonality depends on the condition number:
//! CholeskyQR, classical Gram-Schmidt and row-oriented modified
//! Gram-Schmidt, plus the sweep that compares them with Householder QR and
//! TSQR.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::gen::{gen_cond_matrix, CondSpec};
use crate::householder::qr_unblocked;
use crate::matrix::{dot, Matrix};
use crate::tree::ReductionTree;
use crate::tsqr::{tsqr_parallel_matrix, ParallelOptions};

/// Explicit `Q` and `R`. `flops` covers producing `R`; `q_flops` the extra
/// work for `Q` where the two are separable (CholeskyQR).
#[derive(Clone, Debug)]
pub struct ExplicitQr {
    pub q: Matrix,
    pub r: Matrix,
    pub flops: FlopCounter,
    pub q_flops: FlopCounter,
}

fn check_tall(a: &Matrix) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::dim(format!(
            "need m >= n, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Upper Cholesky factor `R` with `g = Rᵀ R`. Fails at the first pivot that
/// is not positive.
pub fn cholesky_upper(g: &Matrix, flops: &mut FlopCounter) -> Result<Matrix> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::dim("Cholesky needs a square matrix"));
    }
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let rj: Vec<f64> = r.col(j)[..j].to_vec();
        let d = g[(j, j)] - dot(&rj, &rj);
        flops.add(2 * j as u64 + 1);
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let rjj = d.sqrt();
        r[(j, j)] = rjj;
        for k in j + 1..n {
            let s = g[(j, k)] - dot(&rj, &r.col(k)[..j]);
            r[(j, k)] = s / rjj;
        }
        flops.add(2 * j as u64 * (n - j - 1) as u64 + (n - j - 1) as u64);
        flops.div(n as u64 - j as u64);
    }
    Ok(r)
}

/// `R` from the Cholesky factorization of `AᵀA`, then `Q = A R⁻¹`.
pub fn cholesky_qr(a: &Matrix) -> Result<ExplicitQr> {
    check_tall(a)?;
    let (m, n) = a.shape();
    let mut flops = FlopCounter::default();
    // upper triangle of the Gram matrix only
    let mut g = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = dot(a.col(i), a.col(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    flops.add((m * n * (n + 1)) as u64);
    let r = cholesky_upper(&g, &mut flops)?;

    let mut q_flops = FlopCounter::default();
    let mut q = a.clone();
    for j in 0..n {
        for i in 0..j {
            let rij = r[(i, j)];
            let (qi, qj) = q.col_pair_mut(i, j);
            for (x, &y) in qj.iter_mut().zip(qi.iter()) {
                *x -= rij * y;
            }
        }
        let inv = 1.0 / r[(j, j)];
        q.col_mut(j).iter_mut().for_each(|x| *x *= inv);
        q_flops.add((2 * m * j + m) as u64);
        q_flops.div(1);
    }
    Ok(ExplicitQr {
        q,
        r,
        flops,
        q_flops,
    })
}

/// Classical Gram-Schmidt: every projection of column `j` uses the original
/// column.
pub fn cgs(a: &Matrix) -> Result<ExplicitQr> {
    check_tall(a)?;
    let (m, n) = a.shape();
    let mut flops = FlopCounter::default();
    let mut q = Matrix::zeros(m, n);
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let aj = a.col(j);
        for i in 0..j {
            r[(i, j)] = dot(q.col(i), aj);
        }
        let mut v = aj.to_vec();
        for i in 0..j {
            let rij = r[(i, j)];
            for (x, &y) in v.iter_mut().zip(q.col(i)) {
                *x -= rij * y;
            }
        }
        flops.add((4 * m * j) as u64);
        finish_column(&mut q, &mut r, j, v, &mut flops)?;
    }
    Ok(ExplicitQr {
        q,
        r,
        flops,
        q_flops: FlopCounter::default(),
    })
}

/// Row-oriented MGS: once `q_j` is known it is projected out of every
/// remaining column.
pub fn mgs_row(a: &Matrix) -> Result<ExplicitQr> {
    check_tall(a)?;
    let (m, n) = a.shape();
    let mut flops = FlopCounter::default();
    let mut w = a.clone();
    let mut q = Matrix::zeros(m, n);
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let v = w.col(j).to_vec();
        finish_column(&mut q, &mut r, j, v, &mut flops)?;
        let qj = q.col(j);
        for k in j + 1..n {
            let wk = w.col_mut(k);
            let rjk = dot(qj, wk);
            r[(j, k)] = rjk;
            for (x, &y) in wk.iter_mut().zip(qj) {
                *x -= rjk * y;
            }
        }
        flops.add((4 * m * (n - j - 1)) as u64);
    }
    Ok(ExplicitQr {
        q,
        r,
        flops,
        q_flops: FlopCounter::default(),
    })
}

fn finish_column(
    q: &mut Matrix,
    r: &mut Matrix,
    j: usize,
    mut v: Vec<f64>,
    flops: &mut FlopCounter,
) -> Result<()> {
    let nrm = dot(&v, &v).sqrt();
    flops.add(3 * v.len() as u64);
    flops.div(1);
    if !nrm.is_finite() || nrm <= 0.0 {
        return Err(Error::RankDeficient { column: j });
    }
    let inv = 1.0 / nrm;
    v.iter_mut().for_each(|x| *x *= inv);
    q.col_mut(j).copy_from_slice(&v);
    r[(j, j)] = nrm;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAlgorithm {
    TsqrBinary,
    TsqrFlat,
    Householder,
    Cgs,
    Mgs,
    CholeskyQr,
}

impl SweepAlgorithm {
    pub const ALL: [SweepAlgorithm; 6] = [
        SweepAlgorithm::TsqrBinary,
        SweepAlgorithm::TsqrFlat,
        SweepAlgorithm::Householder,
        SweepAlgorithm::Cgs,
        SweepAlgorithm::Mgs,
        SweepAlgorithm::CholeskyQr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAlgorithm::TsqrBinary => "tsqr-binary",
            SweepAlgorithm::TsqrFlat => "tsqr-flat",
            SweepAlgorithm::Householder => "householder",
            SweepAlgorithm::Cgs => "cgs",
            SweepAlgorithm::Mgs => "mgs",
            SweepAlgorithm::CholeskyQr => "choleskyqr",
        }
    }

    /// Householder-based methods, whose `Q` is orthonormal regardless of
    /// the input.
    pub fn is_unconditional(&self) -> bool {
        matches!(
            self,
            SweepAlgorithm::TsqrBinary | SweepAlgorithm::TsqrFlat | SweepAlgorithm::Householder
        )
    }

    /// Explicit thin `Q` and `R` of `a`; TSQR runs on `p` workers.
    pub fn factor(&self, a: &Matrix, p: usize) -> Result<(Matrix, Matrix)> {
        let tsqr = |tree: ReductionTree| -> Result<(Matrix, Matrix)> {
            let t = tsqr_parallel_matrix(a, &tree, ParallelOptions::default())?;
            Ok((t.factor.explicit_q(), t.r().clone()))
        };
        match self {
            SweepAlgorithm::TsqrBinary => tsqr(ReductionTree::binary(p)?),
            SweepAlgorithm::TsqrFlat => tsqr(ReductionTree::flat(p)?),
            SweepAlgorithm::Householder => {
                let qr = qr_unblocked(a)?;
                Ok((qr.factor.explicit_q(true), qr.r))
            }
            SweepAlgorithm::Cgs => cgs(a).map(|x| (x.q, x.r)),
            SweepAlgorithm::Mgs => mgs_row(a).map(|x| (x.q, x.r)),
            SweepAlgorithm::CholeskyQr => cholesky_qr(a).map(|x| (x.q, x.r)),
        }
    }
}

impl fmt::Display for SweepAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Failed,
}

/// One (algorithm, kappa, seed) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCell {
    pub algorithm: SweepAlgorithm,
    pub kappa: f64,
    pub seed: u64,
    pub orthogonality: Option<f64>,
    pub residual: Option<f64>,
    pub outcome: Outcome,
    pub error: Option<String>,
}

/// One (algorithm, kappa) pair over all seeds: worst values among the
/// seeds that completed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub algorithm: SweepAlgorithm,
    pub kappa: f64,
    pub seeds: usize,
    pub failures: usize,
    pub orthogonality: Option<f64>,
    pub residual: Option<f64>,
    /// `failed` when any seed failed.
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub rows: Vec<StabilityRow>,
    pub cells: Vec<StabilityCell>,
}

impl StabilityReport {
    pub fn row(&self, alg: SweepAlgorithm, kappa: f64) -> Option<&StabilityRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == alg && r.kappa == kappa)
    }

    pub fn cells_of(
        &self,
        alg: SweepAlgorithm,
        kappa: f64,
    ) -> impl Iterator<Item = &StabilityCell> {
        self.cells
            .iter()
            .filter(move |c| c.algorithm == alg && c.kappa == kappa)
    }

    /// Aggregated rows as CSV (header only for an empty report).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "algorithm",
            "kappa",
            "seeds",
            "failures",
            "orthogonality",
            "residual",
            "outcome",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.rows {
            wr.write_record([
                r.algorithm.name().to_string(),
                format!("{:e}", r.kappa),
                r.seeds.to_string(),
                r.failures.to_string(),
                opt(r.orthogonality),
                opt(r.residual),
                match r.outcome {
                    Outcome::Ok => "ok".into(),
                    Outcome::Failed => "failed".into(),
                },
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Largest power of two `<= 8` leaving every TSQR block at least `n` rows.
pub fn sweep_procs(m: usize, n: usize) -> usize {
    let mut p = 8;
    while p > 1 && m / p < n.max(1) {
        p /= 2;
    }
    p
}

/// Runs every algorithm on `gen_cond_matrix(m, n, kappa, seed)` for each
/// kappa and seed. A failing algorithm marks its cell failed; the sweep
/// goes on.
pub fn stability_sweep(
    kappas: &[f64],
    m: usize,
    n: usize,
    seeds: &[u64],
) -> Result<StabilityReport> {
    let p = sweep_procs(m, n);
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for &kappa in kappas {
        let inputs = seeds
            .iter()
            .map(|&s| gen_cond_matrix(&CondSpec::new(m, n, kappa, s)).map(|a| (s, a)))
            .collect::<Result<Vec<_>>>()?;
        for alg in SweepAlgorithm::ALL {
            let start = cells.len();
            for (seed, a) in &inputs {
                let cell = match alg.factor(a, p) {
                    Ok((q, r)) => {
                        let res = q.matmul(&r)?.sub(a)?.frobenius_norm() / a.frobenius_norm();
                        StabilityCell {
                            algorithm: alg,
                            kappa,
                            seed: *seed,
                            orthogonality: Some(q.orthogonality_loss()),
                            residual: Some(res),
                            outcome: Outcome::Ok,
                            error: None,
                        }
                    }
                    Err(e) => StabilityCell {
                        algorithm: alg,
                        kappa,
                        seed: *seed,
                        orthogonality: None,
                        residual: None,
                        outcome: Outcome::Failed,
                        error: Some(e.to_string()),
                    },
                };
                cells.push(cell);
            }
            let mine = &cells[start..];
            let worst =
                |f: fn(&StabilityCell) -> Option<f64>| mine.iter().filter_map(f).reduce(f64::max);
            let failures = mine.iter().filter(|c| c.outcome == Outcome::Failed).count();
            rows.push(StabilityRow {
                algorithm: alg,
                kappa,
                seeds: mine.len(),
                failures,
                orthogonality: worst(|c| c.orthogonality),
                residual: worst(|c| c.residual),
                outcome: if failures > 0 {
                    Outcome::Failed
                } else {
                    Outcome::Ok
                },
            });
        }
    }
    Ok(StabilityReport {
        m,
        n,
        p,
        rows,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_of_spd_matrix() {
        let g = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let r = cholesky_upper(&g, &mut FlopCounter::default()).unwrap();
        assert_eq!(
            r,
            Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap()
        );
    }

    #[test]
    fn cholesky_reports_the_failing_pivot() {
        let g = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        match cholesky_upper(&g, &mut FlopCounter::default()) {
            Err(Error::NotPositiveDefinite { pivot, value }) => {
                assert_eq!(pivot, 1);
                assert_eq!(value, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_column_is_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(cgs(&a), Err(Error::RankDeficient { column: 1 })));
        assert!(matches!(
            mgs_row(&a),
            Err(Error::RankDeficient { column: 1 })
        ));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in SweepAlgorithm::ALL {
            assert_eq!(a.name().parse::<SweepAlgorithm>().unwrap(), a);
        }
        assert!("qr".parse::<SweepAlgorithm>().is_err());
    }

    #[test]
    fn sweep_procs_keeps_blocks_tall() {
        assert_eq!(sweep_procs(1000, 50), 8);
        assert_eq!(sweep_procs(100, 30), 2);
        assert_eq!(sweep_procs(10, 10), 1);
    }
}
