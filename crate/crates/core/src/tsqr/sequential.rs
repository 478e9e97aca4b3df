use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{TsqrFactor, TsqrNode};
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::householder::{qr_triangle_on_rect_with, qr_with, HouseholderFactor, QrStrategy, Shape};
use crate::io::{read_mat1, read_vec, write_mat1, write_vec};
use crate::layout::BlockRowLayout;
use crate::matrix::Matrix;
use crate::model::{cost_seq_tsqr, CostEstimate};
use crate::tree::ReductionTree;

/// Smallest `P` with `mn/P + n(n+1)/2 <= W`.
pub fn choose_p_sequential(m: usize, n: usize, w: usize) -> Result<usize> {
    let tri = n * (n + 1) / 2;
    if w <= tri {
        return Err(Error::FastMemoryTooSmall {
            w: w as f64,
            triangle: tri as f64,
        });
    }
    Ok((m * n).div_ceil(w - tri).max(1))
}

/// Contents of `meta.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub block_rows: Vec<usize>,
}

/// Slow-memory traffic. A block read or a `(Y, tau)` write-back is one
/// transfer; words count payload only (the `R` part of `Y_0` stays in fast
/// memory and is not written).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferCounters {
    pub a_reads: u64,
    pub y_writes: u64,
    pub tau_writes: u64,
    pub words_read: u64,
    pub words_written: u64,
    pub y_words: u64,
    pub tau_words: u64,
}

impl TransferCounters {
    pub fn words_moved(&self) -> u64 {
        self.words_read + self.words_written
    }

    pub fn transfers(&self) -> u64 {
        self.a_reads + self.y_writes
    }
}

enum Backing {
    Memory {
        a: Vec<Matrix>,
        y: Vec<Option<Matrix>>,
        tau: Vec<Option<Vec<f64>>>,
    },
    Dir(PathBuf),
}

/// Slow memory for sequential TSQR: `A` blocks in, `Y` blocks and
/// multipliers out. The directory backing uses `meta.json`, `A_k.mat`,
/// `Y_k.mat` and `tau_k.vec`.
pub struct BlockStore {
    backing: Backing,
    meta: StoreMeta,
    counters: TransferCounters,
}

impl BlockStore {
    pub fn in_memory(a: &Matrix, layout: &BlockRowLayout) -> Result<Self> {
        check_layout(a, layout)?;
        let blocks: Vec<_> = layout
            .ranges()
            .into_iter()
            .map(|r| a.submatrix(r, 0..a.cols()))
            .collect();
        let p = blocks.len();
        Ok(BlockStore {
            backing: Backing::Memory {
                a: blocks,
                y: vec![None; p],
                tau: vec![None; p],
            },
            meta: meta_of(layout),
            counters: TransferCounters::default(),
        })
    }

    /// Writes `a` block by block into `dir` (setup, not counted).
    pub fn create_dir(dir: impl AsRef<Path>, a: &Matrix, layout: &BlockRowLayout) -> Result<Self> {
        check_layout(a, layout)?;
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (k, r) in layout.ranges().into_iter().enumerate() {
            write_mat1(dir.join(format!("A_{k}.mat")), &a.submatrix(r, 0..a.cols()))?;
        }
        let meta = meta_of(layout);
        std::fs::write(dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
        Ok(BlockStore {
            backing: Backing::Dir(dir.to_path_buf()),
            meta,
            counters: TransferCounters::default(),
        })
    }

    pub fn open_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta: StoreMeta = serde_json::from_slice(&std::fs::read(dir.join("meta.json"))?)?;
        if meta.block_rows.len() != meta.p || meta.block_rows.iter().sum::<usize>() != meta.m {
            return Err(Error::Format {
                path: dir.join("meta.json"),
                msg: "block rows do not add up to m over P blocks".into(),
            });
        }
        Ok(BlockStore {
            backing: Backing::Dir(dir.to_path_buf()),
            meta,
            counters: TransferCounters::default(),
        })
    }

    pub fn meta(&self) -> &StoreMeta {
        &self.meta
    }

    pub fn layout(&self) -> Result<BlockRowLayout> {
        BlockRowLayout::from_block_rows(self.meta.n, self.meta.block_rows.clone())
    }

    pub fn counters(&self) -> TransferCounters {
        self.counters
    }

    pub fn read_a(&mut self, k: usize) -> Result<Matrix> {
        let block = match &self.backing {
            Backing::Memory { a, .. } => a[k].clone(),
            Backing::Dir(d) => read_mat1(d.join(format!("A_{k}.mat")))?,
        };
        if block.shape() != (self.meta.block_rows[k], self.meta.n) {
            return Err(Error::dim(format!(
                "A_{k} is {}x{}, meta says {}x{}",
                block.rows(),
                block.cols(),
                self.meta.block_rows[k],
                self.meta.n
            )));
        }
        self.counters.a_reads += 1;
        self.counters.words_read += block.as_slice().len() as u64;
        Ok(block)
    }

    /// Stores `Y_k` and `tau_k`; `payload` is the number of words that carry
    /// reflector data.
    fn write_y(&mut self, k: usize, y: &Matrix, tau: &[f64], payload: u64) -> Result<()> {
        match &mut self.backing {
            Backing::Memory { y: ys, tau: ts, .. } => {
                ys[k] = Some(y.clone());
                ts[k] = Some(tau.to_vec());
            }
            Backing::Dir(d) => {
                write_mat1(d.join(format!("Y_{k}.mat")), y)?;
                write_vec(d.join(format!("tau_{k}.vec")), tau)?;
            }
        }
        self.counters.y_writes += 1;
        self.counters.tau_writes += 1;
        self.counters.y_words += payload;
        self.counters.tau_words += tau.len() as u64;
        self.counters.words_written += payload + tau.len() as u64;
        Ok(())
    }

    /// Reads back `(Y_k, tau_k)` (not counted).
    pub fn load_y(&self, k: usize) -> Result<(Matrix, Vec<f64>)> {
        match &self.backing {
            Backing::Memory { y, tau, .. } => match (&y[k], &tau[k]) {
                (Some(y), Some(t)) => Ok((y.clone(), t.clone())),
                _ => Err(Error::dim(format!("Y_{k} has not been written"))),
            },
            Backing::Dir(d) => Ok((
                read_mat1(d.join(format!("Y_{k}.mat")))?,
                read_vec(d.join(format!("tau_{k}.vec")))?,
            )),
        }
    }
}

fn meta_of(layout: &BlockRowLayout) -> StoreMeta {
    StoreMeta {
        m: layout.m,
        n: layout.n,
        p: layout.blocks(),
        block_rows: layout.block_rows.clone(),
    }
}

fn check_layout(a: &Matrix, layout: &BlockRowLayout) -> Result<()> {
    if a.shape() != (layout.m, layout.n) {
        return Err(Error::dim(format!(
            "layout is for {}x{}, matrix is {}x{}",
            layout.m,
            layout.n,
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SequentialTsqr {
    pub factor: TsqrFactor,
    pub counters: TransferCounters,
    pub flops: FlopCounter,
}

/// Measured traffic next to the sequential model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqModelCheck {
    pub p: usize,
    pub w_tilde: f64,
    pub measured: TransferCounters,
    pub model: CostEstimate,
    /// Multiplier traffic `nP`, the counterpart of the model's `mn²/W̃` term.
    pub chain_words: u64,
    pub model_chain_words: f64,
    /// `2mn - n(n+1)/2`, the block read/write volume.
    pub model_block_words: f64,
}

impl SequentialTsqr {
    pub fn model_check(&self, w: usize) -> Result<SeqModelCheck> {
        let (m, n) = (self.factor.rows() as f64, self.factor.cols() as f64);
        let model = cost_seq_tsqr(m, n, w as f64)?;
        let w_tilde = w as f64 - n * (n + 1.0) / 2.0;
        Ok(SeqModelCheck {
            p: self.factor.leaves().len(),
            w_tilde,
            measured: self.counters,
            model,
            chain_words: self.counters.tau_words,
            model_chain_words: m * n * n / w_tilde,
            model_block_words: 2.0 * m * n - n * (n + 1.0) / 2.0,
        })
    }
}

/// Flat-tree TSQR streaming the blocks of `store` through fast memory: one
/// `A` block and the running `R` resident at a time.
pub fn tsqr_sequential(store: &mut BlockStore, leaf: QrStrategy) -> Result<SequentialTsqr> {
    let layout = store.layout()?;
    let (p, n) = (layout.blocks(), layout.n);
    let mut flops = FlopCounter::default();
    let mut leaves: Vec<Option<HouseholderFactor>> = vec![None; p];
    let mut nodes = Vec::with_capacity(p.saturating_sub(1));

    let a0 = store.read_a(0)?;
    let qr = qr_with(a0, Shape::Dense, leaf)?;
    flops += qr.flops;
    let mut r = qr.r;
    {
        let mut y = qr.factor.packed().clone();
        for j in 0..n {
            y.col_mut(j)[..=j].iter_mut().for_each(|v| *v = 0.0);
        }
        let rows = layout.block_rows[0];
        let payload = (rows * n - n * (n + 1) / 2) as u64;
        store.write_y(0, &y, qr.factor.tau(), payload)?;
    }
    leaves[0] = Some(qr.factor);

    for k in 1..p {
        let ak = store.read_a(k)?;
        let qr = qr_triangle_on_rect_with(&r, &ak, leaf)?;
        flops += qr.flops;
        r = qr.r;
        let y = qr.factor.packed().submatrix(n..n + ak.rows(), 0..n);
        store.write_y(k, &y, qr.factor.tau(), y.as_slice().len() as u64)?;
        nodes.push(TsqrNode {
            participants: vec![0, k],
            contrib_rows: vec![n, ak.rows()],
            factor: qr.factor,
        });
    }

    let tree = ReductionTree::flat(p)?;
    let leaf_rows = layout.ranges().into_iter().map(|r| vec![r]).collect();
    let factor = TsqrFactor::new(layout.m, n, tree, leaf_rows, leaves, nodes, r)?;
    Ok(SequentialTsqr {
        factor,
        counters: store.counters(),
        flops,
    })
}

/// Sequential TSQR of an in-memory matrix split into `p` blocks.
pub fn tsqr_sequential_in_memory(a: &Matrix, p: usize, leaf: QrStrategy) -> Result<SequentialTsqr> {
    let layout = BlockRowLayout::new(a.rows(), a.cols(), p)?;
    let mut store = BlockStore::in_memory(a, &layout)?;
    tsqr_sequential(&mut store, leaf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_p_examples() {
        assert_eq!(choose_p_sequential(1_000_000, 50, 1_000_000).unwrap(), 51);
        assert_eq!(choose_p_sequential(100, 5, 1000).unwrap(), 1);
        assert!(matches!(
            choose_p_sequential(100, 50, 1000),
            Err(Error::FastMemoryTooSmall { .. })
        ));
    }

    #[test]
    fn choose_p_is_minimal() {
        for (m, n, w) in [(1000, 7, 500), (999, 3, 64), (4096, 16, 2000)] {
            let p = choose_p_sequential(m, n, w).unwrap();
            let fits = |p: usize| (m * n) as f64 / p as f64 + (n * (n + 1) / 2) as f64 <= w as f64;
            assert!(fits(p));
            assert!(p == 1 || !fits(p - 1));
        }
    }
}
