//! Data distributions: 1-D block rows for TSQR, 2-D block cyclic for CAQR.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `P` contiguous row blocks of `floor(m/P)` rows; the last block absorbs the
/// remainder when `P` does not divide `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRowLayout {
    pub m: usize,
    pub n: usize,
    pub block_rows: Vec<usize>,
}

impl BlockRowLayout {
    pub fn new(m: usize, n: usize, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::dim("block count must be at least 1"));
        }
        let base = m / p;
        if base < n {
            return Err(Error::BlockTooShort {
                block: 0,
                rows: base,
                cols: n,
            });
        }
        let mut block_rows = vec![base; p];
        block_rows[p - 1] += m - base * p;
        Ok(BlockRowLayout { m, n, block_rows })
    }

    /// Layout with explicit block sizes; every block needs at least `n` rows.
    pub fn from_block_rows(n: usize, block_rows: Vec<usize>) -> Result<Self> {
        if block_rows.is_empty() {
            return Err(Error::dim("block count must be at least 1"));
        }
        if let Some((block, &rows)) = block_rows.iter().enumerate().find(|(_, &r)| r < n) {
            return Err(Error::BlockTooShort {
                block,
                rows,
                cols: n,
            });
        }
        Ok(BlockRowLayout {
            m: block_rows.iter().sum(),
            n,
            block_rows,
        })
    }

    pub fn blocks(&self) -> usize {
        self.block_rows.len()
    }

    pub fn offset(&self, k: usize) -> usize {
        self.block_rows[..k].iter().sum()
    }

    pub fn range(&self, k: usize) -> Range<usize> {
        let o = self.offset(k);
        o..o + self.block_rows[k]
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        (0..self.blocks()).map(|k| self.range(k)).collect()
    }
}

/// Splits `a` into `p` block rows. Concatenating the result reproduces `a`
/// bitwise.
pub fn partition_block_rows(a: &Matrix, p: usize) -> Result<Vec<Matrix>> {
    let layout = BlockRowLayout::new(a.rows(), a.cols(), p)?;
    Ok(layout
        .ranges()
        .into_iter()
        .map(|r| a.submatrix(r, 0..a.cols()))
        .collect())
}

/// 2-D block cyclic distribution of `b x b` blocks over a `pr x pc` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCyclicLayout {
    pub m: usize,
    pub n: usize,
    pub b: usize,
    pub pr: usize,
    pub pc: usize,
}

impl BlockCyclicLayout {
    pub fn new(m: usize, n: usize, b: usize, pr: usize, pc: usize) -> Result<Self> {
        if b == 0 || pr == 0 || pc == 0 {
            return Err(Error::Grid(format!(
                "block size and grid dimensions must be positive (b={b}, grid {pr}x{pc})"
            )));
        }
        Ok(BlockCyclicLayout { m, n, b, pr, pc })
    }

    pub fn block_rows(&self) -> usize {
        self.m.div_ceil(self.b)
    }

    pub fn block_cols(&self) -> usize {
        self.n.div_ceil(self.b)
    }

    /// Grid coordinates `(r, c)` owning block `(ib, jb)`.
    pub fn owner(&self, ib: usize, jb: usize) -> (usize, usize) {
        (ib % self.pr, jb % self.pc)
    }

    pub fn row_block_range(&self, ib: usize) -> Range<usize> {
        ib * self.b..((ib + 1) * self.b).min(self.m)
    }

    pub fn col_block_range(&self, jb: usize) -> Range<usize> {
        jb * self.b..((jb + 1) * self.b).min(self.n)
    }

    /// Global rows owned by process row `r`, in increasing order.
    pub fn local_rows(&self, r: usize) -> Vec<usize> {
        (r..self.block_rows())
            .step_by(self.pr)
            .flat_map(|ib| self.row_block_range(ib))
            .collect()
    }

    /// Global columns owned by process column `c`, in increasing order.
    pub fn local_cols(&self, c: usize) -> Vec<usize> {
        (c..self.block_cols())
            .step_by(self.pc)
            .flat_map(|jb| self.col_block_range(jb))
            .collect()
    }
}
