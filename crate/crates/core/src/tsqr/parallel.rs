use serde::{Deserialize, Serialize};

use super::{TsqrFactor, TsqrNode};
use crate::error::{Error, Result};
use crate::executor::{self, CommRecorder, ExecMode};
use crate::householder::{qr_stacked_triangles, qr_with, HouseholderFactor, QrStrategy, Shape};
use crate::layout::BlockRowLayout;
use crate::matrix::Matrix;
use crate::model::cost_par_tsqr;
use crate::tree::{ReductionTree, TreeMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelOptions {
    pub exec: ExecMode,
    pub leaf: QrStrategy,
}

impl Default for ParallelOptions {
    fn default() -> Self {
        ParallelOptions {
            exec: ExecMode::Simulated,
            leaf: QrStrategy::Unblocked,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParallelTsqr {
    pub factor: TsqrFactor,
    /// `R` as held by each worker after the run (`None` where the tree
    /// leaves a worker without one).
    pub r_per_worker: Vec<Option<Matrix>>,
    pub recorders: Vec<CommRecorder>,
}

impl ParallelTsqr {
    pub fn r(&self) -> &Matrix {
        self.factor.r()
    }

    /// Longest dependency chain over all workers.
    pub fn critical(&self) -> executor::PathClock {
        executor::aggregate(&self.recorders).critical
    }
}

struct WorkerOut {
    leaf: HouseholderFactor,
    nodes: Vec<(usize, HouseholderFactor)>,
    r: Option<Matrix>,
}

fn unpack(n: usize, words: Vec<f64>) -> Result<Matrix> {
    Matrix::unpack_upper(n, &words)
}

/// Runs TSQR with worker `i` owning `blocks[i]`. Triangles travel packed
/// (`n(n+1)/2` words).
pub fn tsqr_parallel(
    blocks: Vec<Matrix>,
    tree: &ReductionTree,
    opts: ParallelOptions,
) -> Result<ParallelTsqr> {
    let p = tree.leaves();
    if blocks.len() != p {
        return Err(Error::dim(format!(
            "{} blocks for a tree with {p} leaves",
            blocks.len()
        )));
    }
    let n = blocks[0].cols();
    for (k, b) in blocks.iter().enumerate() {
        if b.cols() != n {
            return Err(Error::dim(format!(
                "block {k} has {} columns, block 0 has {n}",
                b.cols()
            )));
        }
        if b.rows() < n {
            return Err(Error::BlockTooShort {
                block: k,
                rows: b.rows(),
                cols: n,
            });
        }
    }
    let events = tree.schedule();
    // event index of each (level, processor)
    let mut at_level: Vec<Vec<Option<usize>>> = vec![vec![None; p]; tree.levels().len()];
    for (e, ev) in events.iter().enumerate() {
        for &q in &ev.participants {
            at_level[ev.level - 1][q] = Some(e);
        }
    }
    let butterfly = tree.is_butterfly();
    let all_reduce = tree.mode() == TreeMode::AllReduce;
    let blocks_ref = &blocks;
    let events_ref = &events;
    let at_level_ref = &at_level;

    let out = executor::run(p, opts.exec, |mut comm| async move {
        let me = comm.id();
        let leaf = qr_with(blocks_ref[me].clone(), Shape::Dense, opts.leaf)?;
        comm.compute(leaf.flops);
        let mut r = leaf.r;
        let mut nodes = Vec::new();
        let mut alive = true;

        if butterfly {
            for k in 1..=at_level_ref.len() {
                let partner = me ^ (1 << (k - 1));
                comm.send(partner, r.pack_upper())?;
                let other = unpack(n, comm.recv(partner).await?)?;
                let stack = if me < partner { [r, other] } else { [other, r] };
                let qr = qr_stacked_triangles(&stack)?;
                comm.compute(qr.flops);
                r = qr.r;
                if me % (1 << k) == 0 {
                    let e = at_level_ref[k - 1][me].expect("receiver has an event");
                    nodes.push((e, qr.factor));
                }
            }
        } else {
            for level in at_level_ref {
                let Some(e) = level[me] else { continue };
                let ev = &events_ref[e];
                if ev.receiver != me {
                    comm.send(ev.receiver, r.pack_upper())?;
                    alive = false;
                    break;
                }
                let mut stack = Vec::with_capacity(ev.participants.len());
                for &q in &ev.participants {
                    if q == me {
                        stack.push(r.clone());
                    } else {
                        stack.push(unpack(n, comm.recv(q).await?)?);
                    }
                }
                let qr = qr_stacked_triangles(&stack)?;
                comm.compute(qr.flops);
                r = qr.r;
                nodes.push((e, qr.factor));
            }
            if all_reduce {
                let mut have: Option<Matrix> = alive.then(|| r.clone());
                for level in at_level_ref.iter().rev() {
                    let Some(e) = level[me] else { continue };
                    let ev = &events_ref[e];
                    if ev.receiver == me {
                        let root_r = have.as_ref().expect("receiver holds R before broadcasting");
                        for &q in &ev.participants[1..] {
                            comm.send(q, root_r.pack_upper())?;
                        }
                    } else {
                        have = Some(unpack(n, comm.recv(ev.receiver).await?)?);
                    }
                }
                r = have.expect("broadcast reaches every worker");
                alive = true;
            }
        }
        Ok(WorkerOut {
            leaf: leaf.factor,
            nodes,
            r: alive.then_some(r),
        })
    })?;

    let mut node_factors: Vec<Option<HouseholderFactor>> = vec![None; events.len()];
    let mut leaves = Vec::with_capacity(p);
    let mut r_per_worker = Vec::with_capacity(p);
    let mut recorders = Vec::with_capacity(p);
    for w in out {
        for (e, f) in w.value.nodes {
            node_factors[e] = Some(f);
        }
        leaves.push(Some(w.value.leaf));
        r_per_worker.push(w.value.r);
        recorders.push(w.recorder);
    }
    let nodes = events
        .iter()
        .zip(node_factors)
        .map(|(ev, f)| TsqrNode {
            contrib_rows: vec![n; ev.participants.len()],
            participants: ev.participants.clone(),
            factor: f.expect("every event has a factor"),
        })
        .collect();
    let r = r_per_worker[tree.root()]
        .clone()
        .ok_or_else(|| Error::Executor("root finished without R".into()))?;
    let mut offset = 0;
    let leaf_rows = blocks
        .iter()
        .map(|b| {
            offset += b.rows();
            vec![offset - b.rows()..offset]
        })
        .collect();
    let factor = TsqrFactor::new(offset, n, tree.clone(), leaf_rows, leaves, nodes, r)?;
    Ok(ParallelTsqr {
        factor,
        r_per_worker,
        recorders,
    })
}

/// Splits `a` into `P` block rows (remainder to the last block) and runs
/// [`tsqr_parallel`].
pub fn tsqr_parallel_matrix(
    a: &Matrix,
    tree: &ReductionTree,
    opts: ParallelOptions,
) -> Result<ParallelTsqr> {
    let layout = BlockRowLayout::new(a.rows(), a.cols(), tree.leaves())?;
    let blocks = layout
        .ranges()
        .into_iter()
        .map(|r| a.submatrix(r, 0..a.cols()))
        .collect();
    tsqr_parallel(blocks, tree, opts)
}

/// Critical-path counters of a parallel run next to the closed-form model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParModelCheck {
    pub messages: u64,
    pub model_messages: f64,
    pub words: u64,
    pub model_words: f64,
    /// `words / model_words`; the packed triangle gives `(n+1)/n`.
    pub words_ratio: f64,
    pub flops: u64,
    pub model_flops: f64,
    pub messages_match: bool,
    pub words_within: bool,
}

pub fn par_runtime_model_check(
    m: usize,
    n: usize,
    p: usize,
    recorders: &[CommRecorder],
) -> ParModelCheck {
    let critical = executor::aggregate(recorders).critical;
    let model = cost_par_tsqr(m as f64, n as f64, p as f64);
    let words_ratio = if model.words > 0.0 {
        critical.words as f64 / model.words
    } else if critical.words == 0 {
        1.0
    } else {
        f64::INFINITY
    };
    let nf = n as f64;
    ParModelCheck {
        messages: critical.messages,
        model_messages: model.messages,
        words: critical.words,
        model_words: model.words,
        words_ratio,
        flops: critical.flops,
        model_flops: model.flops,
        messages_match: critical.messages as f64 == model.messages,
        words_within: (1.0..=(nf + 1.0) / nf * (1.0 + 1e-12)).contains(&words_ratio),
    }
}
