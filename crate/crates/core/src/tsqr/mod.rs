//! Tall-skinny QR over a reduction tree.
//!
//! Every leaf owns a set of global rows. The leaf QR leaves its contribution
//! in the leaf's first `n` rows (its "slot"); a combine step stacks the slots
//! of its participants, factors the stack and leaves the result in the
//! receiver's slot. The implicit `Q` is that sequence of local factors, so
//! applying it is a gather / local apply / scatter walk over the schedule.

mod parallel;
mod sequential;

use std::ops::Range;

pub use parallel::{
    par_runtime_model_check, tsqr_parallel, tsqr_parallel_matrix, ParModelCheck, ParallelOptions,
    ParallelTsqr,
};
pub use sequential::{
    choose_p_sequential, tsqr_sequential, tsqr_sequential_in_memory, BlockStore, SeqModelCheck,
    SequentialTsqr, StoreMeta, TransferCounters,
};

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::householder::HouseholderFactor;
use crate::matrix::Matrix;
use crate::tree::ReductionTree;

/// One combine step of a finished run.
#[derive(Clone, Debug)]
pub struct TsqrNode {
    pub participants: Vec<usize>,
    /// Rows each participant contributes to the stack: `n` for a triangle,
    /// the whole block for a raw block (sequential chain).
    pub contrib_rows: Vec<usize>,
    pub factor: HouseholderFactor,
}

/// Implicit `Q` and final `R` of a TSQR run.
#[derive(Clone, Debug)]
pub struct TsqrFactor {
    m: usize,
    n: usize,
    tree: ReductionTree,
    leaf_rows: Vec<Vec<Range<usize>>>,
    leaves: Vec<Option<HouseholderFactor>>,
    nodes: Vec<TsqrNode>,
    r: Matrix,
}

/// First `k` rows of a row set given as ranges.
pub(crate) fn take_rows(ranges: &[Range<usize>], mut k: usize) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    for r in ranges {
        if k == 0 {
            break;
        }
        let len = r.len().min(k);
        out.push(r.start..r.start + len);
        k -= len;
    }
    out
}

impl TsqrFactor {
    /// `m` is the row count of the operands the factor acts on; leaf rows
    /// may cover only part of it (panels of a larger matrix).
    pub fn new(
        m: usize,
        n: usize,
        tree: ReductionTree,
        leaf_rows: Vec<Vec<Range<usize>>>,
        leaves: Vec<Option<HouseholderFactor>>,
        nodes: Vec<TsqrNode>,
        r: Matrix,
    ) -> Result<Self> {
        if leaf_rows.iter().flatten().any(|r| r.end > m) {
            return Err(Error::dim("leaf rows exceed the row count"));
        }
        if leaf_rows.len() != tree.leaves() || leaves.len() != tree.leaves() {
            return Err(Error::dim("leaf count does not match the tree"));
        }
        if r.shape() != (n, n) {
            return Err(Error::dim("R must be n x n"));
        }
        Ok(TsqrFactor {
            m,
            n,
            tree,
            leaf_rows,
            leaves,
            nodes,
            r,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn tree(&self) -> &ReductionTree {
        &self.tree
    }

    pub fn leaves(&self) -> &[Option<HouseholderFactor>] {
        &self.leaves
    }

    pub fn nodes(&self) -> &[TsqrNode] {
        &self.nodes
    }

    pub fn leaf_rows(&self) -> &[Vec<Range<usize>>] {
        &self.leaf_rows
    }

    /// Global rows where the thin `Q` has its identity part.
    pub fn root_slot(&self) -> Vec<Range<usize>> {
        take_rows(&self.leaf_rows[self.tree.root()], self.n)
    }

    fn node_rows(&self, node: &TsqrNode) -> Vec<Range<usize>> {
        node.participants
            .iter()
            .zip(&node.contrib_rows)
            .flat_map(|(&p, &k)| take_rows(&self.leaf_rows[p], k))
            .collect()
    }

    fn check(&self, c: &Matrix) -> Result<()> {
        if c.rows() != self.m {
            return Err(Error::dim(format!(
                "TSQR factor has {} rows, operand has {}",
                self.m,
                c.rows()
            )));
        }
        Ok(())
    }

    /// `c := Qᵀ c` for the full `m x m` orthogonal factor.
    pub fn apply_qt_in_place(&self, c: &mut Matrix, flops: &mut FlopCounter) -> Result<()> {
        self.check(c)?;
        for (rows, leaf) in self.leaf_rows.iter().zip(&self.leaves) {
            if let Some(f) = leaf {
                let mut block = c.gather_rows(rows);
                f.apply_qt_in_place(&mut block, flops)?;
                c.scatter_rows(rows, &block);
            }
        }
        for node in &self.nodes {
            let rows = self.node_rows(node);
            let mut block = c.gather_rows(&rows);
            node.factor.apply_qt_in_place(&mut block, flops)?;
            c.scatter_rows(&rows, &block);
        }
        Ok(())
    }

    /// `c := Q c` for the full `m x m` orthogonal factor.
    pub fn apply_q_in_place(&self, c: &mut Matrix, flops: &mut FlopCounter) -> Result<()> {
        self.check(c)?;
        for node in self.nodes.iter().rev() {
            let rows = self.node_rows(node);
            let mut block = c.gather_rows(&rows);
            node.factor.apply_q_in_place(&mut block, flops)?;
            c.scatter_rows(&rows, &block);
        }
        for (rows, leaf) in self.leaf_rows.iter().zip(&self.leaves).rev() {
            if let Some(f) = leaf {
                let mut block = c.gather_rows(rows);
                f.apply_q_in_place(&mut block, flops)?;
                c.scatter_rows(rows, &block);
            }
        }
        Ok(())
    }

    /// `Q c`. An `n`-row `c` is taken as the thin product (`m x k` result),
    /// an `m`-row `c` as the full one.
    pub fn apply_q(&self, c: &Matrix) -> Result<Matrix> {
        let mut full = if c.rows() == self.n && self.n != self.m {
            let mut full = Matrix::zeros(self.m, c.cols());
            full.scatter_rows(&self.root_slot(), c);
            full
        } else {
            c.clone()
        };
        self.apply_q_in_place(&mut full, &mut FlopCounter::default())?;
        Ok(full)
    }

    /// Full `Qᵀ c` (`m x k`).
    pub fn apply_qt(&self, c: &Matrix) -> Result<Matrix> {
        let mut out = c.clone();
        self.apply_qt_in_place(&mut out, &mut FlopCounter::default())?;
        Ok(out)
    }

    /// Thin `Qᵀ c` (`n x k`): the root slot rows of the full product.
    pub fn apply_qt_thin(&self, c: &Matrix) -> Result<Matrix> {
        Ok(self.apply_qt(c)?.gather_rows(&self.root_slot()))
    }

    /// Thin `Q` (`m x n`, orthonormal columns) with `A = Q R`.
    pub fn explicit_q(&self) -> Matrix {
        self.apply_q(&Matrix::identity(self.n))
            .expect("identity has n rows")
    }
}

/// `Q c` or `Qᵀ c` through a TSQR factor; see [`TsqrFactor::apply_q`].
pub fn tsqr_apply_q(factor: &TsqrFactor, c: &Matrix, transpose: bool) -> Result<Matrix> {
    if transpose {
        factor.apply_qt(c)
    } else {
        factor.apply_q(c)
    }
}

pub fn tsqr_explicit_q(factor: &TsqrFactor) -> Matrix {
    factor.explicit_q()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn take_rows_spans_ranges() {
        assert_eq!(take_rows(&[0..2, 5..9], 3), vec![0..2, 5..6]);
        assert_eq!(take_rows(&[0..2], 0), Vec::<Range<usize>>::new());
    }
}
