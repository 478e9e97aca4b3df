//! Right-looking CAQR on a simulated `Pr x Pc` grid.
//!
//! Worker `(r, c)` (id `r·Pc + c`) owns the `b x b` blocks `(i, j)` with
//! `i mod Pr = r` and `j mod Pc = c`, stored as one local matrix whose rows
//! and columns are the owned global indices in increasing order.
//!
//! Panel `J` is factored by a reduce-mode TSQR down the owning process
//! column over a binary tree on *relative* process rows (`rel 0` owns the
//! diagonal block, so `R` lands there). The panel column then broadcasts
//! reflector tails and multipliers along each process row, every worker
//! applies its leaf `Qᵀ` to its trailing columns, and each tree level is
//! replayed as a paired exchange: the non-receiving row sends its slot to
//! the receiver, which applies the node's structured update and sends the
//! lower half back.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{self, Comm, CommRecorder, ExecMode, PathClock};
use crate::flops::FlopCounter;
use crate::householder::{
    apply_qt_structured, qr_stacked_triangles, qr_with, HouseholderFactor, QrStrategy, Shape,
};
use crate::layout::BlockCyclicLayout;
use crate::matrix::Matrix;
use crate::model::{cost_caqr, CostEstimate};
use crate::tree::{ceil_log2, CombineEvent, ReductionTree};
use crate::tsqr::{TsqrFactor, TsqrNode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageKind {
    Tsqr,
    Bcast,
    TreeExchange,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::Tsqr => "tsqr",
            MessageKind::Bcast => "bcast",
            MessageKind::TreeExchange => "tree-exchange",
        })
    }
}

/// One message as seen by one endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub panel: usize,
    /// Tree level for `tsqr` and `tree-exchange`, 1 (vectors) or 2
    /// (multipliers) for `bcast`.
    pub step: usize,
    pub kind: MessageKind,
    pub sent: bool,
    pub words: u64,
}

/// One panel's factorization, embedded in the full row space.
#[derive(Clone, Debug)]
pub struct CaqrPanel {
    pub cols: Range<usize>,
    /// Process rows taking part (relative to the diagonal owner).
    pub active_rows: usize,
    pub factor: TsqrFactor,
}

#[derive(Clone, Debug)]
pub struct CaqrResult {
    pub layout: BlockCyclicLayout,
    pub r: Matrix,
    pub panels: Vec<CaqrPanel>,
    pub recorders: Vec<CommRecorder>,
    pub logs: Vec<Vec<LogEntry>>,
}

impl CaqrResult {
    pub fn gather_r(&self) -> &Matrix {
        &self.r
    }

    /// `Q c` for the full `m x m` factor (`c` has `m` rows).
    pub fn apply_q(&self, c: &Matrix) -> Result<Matrix> {
        let mut out = c.clone();
        let mut flops = FlopCounter::default();
        for p in self.panels.iter().rev() {
            p.factor.apply_q_in_place(&mut out, &mut flops)?;
        }
        Ok(out)
    }

    /// `Qᵀ c` for the full `m x m` factor.
    pub fn apply_qt(&self, c: &Matrix) -> Result<Matrix> {
        let mut out = c.clone();
        let mut flops = FlopCounter::default();
        for p in &self.panels {
            p.factor.apply_qt_in_place(&mut out, &mut flops)?;
        }
        Ok(out)
    }

    /// Thin `Q` (`m x n`).
    pub fn explicit_q(&self) -> Matrix {
        self.apply_q(&Matrix::eye(self.layout.m, self.layout.n))
            .expect("row count matches by construction")
    }

    pub fn critical(&self) -> PathClock {
        executor::aggregate(&self.recorders).critical
    }
}

pub fn gather_r(result: &CaqrResult) -> Matrix {
    result.r.clone()
}

struct PanelPlan {
    j0: usize,
    bw: usize,
    pr_j: usize,
    pc_j: usize,
    pa: usize,
    tree: ReductionTree,
    events: Vec<CombineEvent>,
    /// event index of each (level, relative row)
    at_level: Vec<Vec<Option<usize>>>,
}

impl PanelPlan {
    fn row_of(&self, rel: usize, pr: usize) -> usize {
        (rel + self.pr_j) % pr
    }

    /// Events (in level order) whose receiver is `rel`.
    fn received(&self, rel: usize) -> impl Iterator<Item = usize> + '_ {
        self.at_level
            .iter()
            .filter_map(move |l| l[rel].filter(|&e| self.events[e].receiver == rel))
    }
}

fn plan(layout: &BlockCyclicLayout, rows_of: &[Vec<usize>]) -> Result<Vec<PanelPlan>> {
    let (pr, pc, b) = (layout.pr, layout.pc, layout.b);
    let mut plans = Vec::new();
    for jb in 0..layout.block_cols() {
        let j0 = jb * b;
        let bw = b.min(layout.n - j0);
        let pa = pr.min(layout.block_rows() - jb);
        let pr_j = jb % pr;
        for rel in 0..pa {
            let rows = &rows_of[(rel + pr_j) % pr];
            let act = rows.len() - rows.partition_point(|&g| g < j0);
            if act < bw {
                return Err(Error::Grid(format!(
                    "panel {jb}: process row {} has {act} active rows, fewer than the panel width {bw}",
                    (rel + pr_j) % pr
                )));
            }
        }
        let tree = ReductionTree::binary(pa)?;
        let events = tree.schedule();
        let mut at_level = vec![vec![None; pa]; tree.levels().len()];
        for (e, ev) in events.iter().enumerate() {
            for &q in &ev.participants {
                at_level[ev.level - 1][q] = Some(e);
            }
        }
        plans.push(PanelPlan {
            j0,
            bw,
            pr_j,
            pc_j: jb % pc,
            pa,
            tree,
            events,
            at_level,
        });
    }
    Ok(plans)
}

struct Endpoint {
    comm: Comm,
    log: Vec<LogEntry>,
}

impl Endpoint {
    fn send(
        &mut self,
        dst: usize,
        payload: Vec<f64>,
        panel: usize,
        step: usize,
        kind: MessageKind,
    ) -> Result<()> {
        self.log.push(LogEntry {
            panel,
            step,
            kind,
            sent: true,
            words: payload.len() as u64,
        });
        self.comm.send(dst, payload)
    }

    async fn recv(
        &mut self,
        src: usize,
        panel: usize,
        step: usize,
        kind: MessageKind,
    ) -> Result<Vec<f64>> {
        let payload = self.comm.recv(src).await?;
        self.log.push(LogEntry {
            panel,
            step,
            kind,
            sent: false,
            words: payload.len() as u64,
        });
        Ok(payload)
    }

    /// Binomial broadcast over `size` ranks with relative rank `q` (root 0).
    async fn bcast(
        &mut self,
        data: Option<Vec<f64>>,
        q: usize,
        size: usize,
        id_of: impl Fn(usize) -> usize,
        panel: usize,
        step: usize,
    ) -> Result<Vec<f64>> {
        let (data, mut s) = if q == 0 {
            (data.expect("root holds the payload"), 1)
        } else {
            let top = 1 << (usize::BITS - 1 - q.leading_zeros());
            (
                self.recv(id_of(q - top), panel, step, MessageKind::Bcast)
                    .await?,
                top << 1,
            )
        };
        while q + s < size {
            self.send(id_of(q + s), data.clone(), panel, step, MessageKind::Bcast)?;
            s <<= 1;
        }
        Ok(data)
    }
}

struct PanelOut {
    rel: usize,
    leaf: HouseholderFactor,
    nodes: Vec<(usize, HouseholderFactor)>,
    r: Option<Matrix>,
}

struct WorkerOut {
    local: Matrix,
    panels: Vec<(usize, PanelOut)>,
    log: Vec<LogEntry>,
}

fn split_payload(f: &HouseholderFactor) -> (Vec<f64>, Vec<f64>) {
    let mut words = f.pack_reflectors();
    let tau = words.split_off(words.len() - f.cols());
    (words, tau)
}

/// Contiguous runs of an increasing index list.
fn runs(idx: &[usize]) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    for &g in idx {
        match out.last_mut() {
            Some(r) if r.end == g => r.end += 1,
            _ => out.push(g..g + 1),
        }
    }
    out
}

pub fn caqr_factor(a: &Matrix, layout: &BlockCyclicLayout) -> Result<CaqrResult> {
    caqr_factor_with(a, layout, ExecMode::Simulated)
}

pub fn caqr_factor_with(
    a: &Matrix,
    layout: &BlockCyclicLayout,
    exec: ExecMode,
) -> Result<CaqrResult> {
    let (m, n) = a.shape();
    if (layout.m, layout.n) != (m, n) {
        return Err(Error::Grid(format!(
            "layout is for {}x{}, matrix is {m}x{n}",
            layout.m, layout.n
        )));
    }
    if m < n {
        return Err(Error::dim(format!("CAQR needs m >= n, got {m}x{n}")));
    }
    let (pr, pc) = (layout.pr, layout.pc);
    if !pr.is_power_of_two() {
        return Err(Error::Grid(format!("Pr must be a power of two, got {pr}")));
    }
    let rows_of: Vec<Vec<usize>> = (0..pr).map(|r| layout.local_rows(r)).collect();
    let cols_of: Vec<Vec<usize>> = (0..pc).map(|c| layout.local_cols(c)).collect();
    let plans = plan(layout, &rows_of)?;
    let locals: Vec<Matrix> = (0..pr * pc)
        .map(|id| {
            let (rows, cols) = (&rows_of[id / pc], &cols_of[id % pc]);
            Matrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
        })
        .collect();

    let (rows_ref, cols_ref, plans_ref, locals_ref) = (&rows_of, &cols_of, &plans, &locals);
    let out = executor::run(pr * pc, exec, |comm| async move {
        let me = comm.id();
        let (r, c) = (me / pc, me % pc);
        let (rows, cols) = (&rows_ref[r], &cols_ref[c]);
        let mut local = locals_ref[me].clone();
        let mut ep = Endpoint {
            comm,
            log: Vec::new(),
        };
        let mut panels = Vec::new();

        for (jp, pl) in plans_ref.iter().enumerate() {
            let rel = (r + pr - pl.pr_j) % pr;
            if rel >= pl.pa {
                continue;
            }
            let bw = pl.bw;
            let a_r = rows.partition_point(|&g| g < pl.j0);
            let act = rows.len() - a_r;
            let ct = cols.partition_point(|&g| g < pl.j0 + bw);
            let trailing = ct..cols.len();
            let id_at = |rel: usize| pl.row_of(rel, pr) * pc + c;

            // panel factorization down the owning process column
            let mut mine: Option<PanelOut> = None;
            if c == pl.pc_j {
                let p0 = cols.partition_point(|&g| g < pl.j0);
                let qr = qr_with(
                    local.submatrix(a_r..rows.len(), p0..p0 + bw),
                    Shape::Dense,
                    QrStrategy::Unblocked,
                )?;
                ep.comm.compute(qr.flops);
                let mut rr = qr.r;
                let mut nodes = Vec::new();
                let mut alive = true;
                for level in &pl.at_level {
                    let Some(e) = level[rel] else { continue };
                    let ev = &pl.events[e];
                    if ev.receiver != rel {
                        ep.send(
                            id_at(ev.receiver),
                            rr.pack_upper(),
                            jp,
                            ev.level,
                            MessageKind::Tsqr,
                        )?;
                        alive = false;
                        break;
                    }
                    let mut stack = Vec::with_capacity(ev.participants.len());
                    for &q in &ev.participants {
                        if q == rel {
                            stack.push(rr.clone());
                        } else {
                            let w = ep.recv(id_at(q), jp, ev.level, MessageKind::Tsqr).await?;
                            stack.push(Matrix::unpack_upper(bw, &w)?);
                        }
                    }
                    let node = qr_stacked_triangles(&stack)?;
                    ep.comm.compute(node.flops);
                    rr = node.r;
                    nodes.push((e, node.factor));
                }
                let mut panel = Matrix::zeros(act, bw);
                if rel == 0 {
                    panel.set_submatrix(0, 0, &rr);
                }
                local.set_submatrix(a_r, p0, &panel);
                mine = Some(PanelOut {
                    rel,
                    leaf: qr.factor,
                    nodes,
                    r: (alive && rel == 0).then_some(rr),
                });
            }

            // reflectors along the process row
            let (leaf, nodes) = if pc == 1 {
                let m = mine.as_ref().expect("single column owns the panel");
                (m.leaf.clone(), m.nodes.clone())
            } else {
                let q = (c + pc - pl.pc_j) % pc;
                let row_id = |q: usize| r * pc + (q + pl.pc_j) % pc;
                let (ys, taus) = match &mine {
                    Some(m) => {
                        let (mut ys, mut taus) = split_payload(&m.leaf);
                        for (_, f) in &m.nodes {
                            let (y, t) = split_payload(f);
                            ys.extend(y);
                            taus.extend(t);
                        }
                        (Some(ys), Some(taus))
                    }
                    None => (None, None),
                };
                let ys = ep.bcast(ys, q, pc, row_id, jp, 1).await?;
                let taus = ep.bcast(taus, q, pc, row_id, jp, 2).await?;
                match &mine {
                    Some(m) => (m.leaf.clone(), m.nodes.clone()),
                    None => {
                        let mut shapes = vec![(Shape::Dense, act, None)];
                        for e in pl.received(rel) {
                            let q = pl.events[e].participants.len();
                            shapes.push((Shape::StackedTriangles { q }, q * bw, Some(e)));
                        }
                        let (mut ya, mut ta) = (0, 0);
                        let mut leaf = None;
                        let mut nodes = Vec::new();
                        for (shape, rows_f, e) in shapes {
                            let tail = HouseholderFactor::packed_len(shape, rows_f, bw) - bw;
                            if ya + tail > ys.len() || ta + bw > taus.len() {
                                return Err(Error::Executor(format!(
                                    "panel {jp}: short reflector broadcast"
                                )));
                            }
                            let mut words = ys[ya..ya + tail].to_vec();
                            words.extend_from_slice(&taus[ta..ta + bw]);
                            ya += tail;
                            ta += bw;
                            let f =
                                HouseholderFactor::unpack_reflectors(shape, rows_f, bw, &words)?;
                            match e {
                                None => leaf = Some(f),
                                Some(e) => nodes.push((e, f)),
                            }
                        }
                        (leaf.expect("leaf comes first"), nodes)
                    }
                }
            };

            if !trailing.is_empty() {
                // leaf update
                let mut fl = FlopCounter::default();
                let leaf = leaf.with_t_counted(&mut fl);
                let mut cblk = local.submatrix(a_r..rows.len(), trailing.clone());
                leaf.apply_qt_in_place(&mut cblk, &mut fl)?;
                local.set_submatrix(a_r, ct, &cblk);
                ep.comm.compute(fl);

                // tree levels
                for level in &pl.at_level {
                    let Some(e) = level[rel] else { continue };
                    let ev = &pl.events[e];
                    let slot = a_r..a_r + bw;
                    if ev.receiver != rel {
                        let c_t = local.submatrix(slot, trailing.clone());
                        let dst = id_at(ev.receiver);
                        ep.send(dst, c_t.into_vec(), jp, ev.level, MessageKind::TreeExchange)?;
                        let back = ep
                            .recv(dst, jp, ev.level, MessageKind::TreeExchange)
                            .await?;
                        local.set_submatrix(
                            a_r,
                            ct,
                            &Matrix::from_col_major(bw, trailing.len(), back)?,
                        );
                        break;
                    }
                    let [_, other] = ev.participants[..] else {
                        return Err(Error::InvalidTree("CAQR update tree must be binary".into()));
                    };
                    let node = &nodes
                        .iter()
                        .find(|(x, _)| *x == e)
                        .expect("receiver holds its node factor")
                        .1;
                    let mut fl = FlopCounter::default();
                    let t = node.t_counted(&mut fl);
                    let c0 = local.submatrix(slot, trailing.clone());
                    let src = id_at(other);
                    let c1 = Matrix::from_col_major(
                        bw,
                        trailing.len(),
                        ep.recv(src, jp, ev.level, MessageKind::TreeExchange)
                            .await?,
                    )?;
                    let (hat0, hat1) = apply_qt_structured(node, Some(&t), &c0, &c1, &mut fl)?;
                    ep.comm.compute(fl);
                    local.set_submatrix(a_r, ct, &hat0);
                    ep.send(
                        src,
                        hat1.into_vec(),
                        jp,
                        ev.level,
                        MessageKind::TreeExchange,
                    )?;
                }
            }
            if let Some(m) = mine {
                panels.push((jp, m));
            }
        }
        Ok(WorkerOut {
            local,
            panels,
            log: ep.log,
        })
    })?;

    let mut full = Matrix::zeros(m, n);
    let mut per_panel: Vec<Vec<PanelOut>> = (0..plans.len()).map(|_| Vec::new()).collect();
    let mut recorders = Vec::with_capacity(out.len());
    let mut logs = Vec::with_capacity(out.len());
    for (id, w) in out.into_iter().enumerate() {
        let (rows, cols) = (&rows_of[id / pc], &cols_of[id % pc]);
        for (j, &gc) in cols.iter().enumerate() {
            let src = w.value.local.col(j);
            let dst = full.col_mut(gc);
            for (i, &gr) in rows.iter().enumerate() {
                dst[gr] = src[i];
            }
        }
        for (jp, p) in w.value.panels {
            per_panel[jp].push(p);
        }
        recorders.push(w.recorder);
        logs.push(w.value.log);
    }

    let mut panels = Vec::with_capacity(plans.len());
    for (pl, outs) in plans.iter().zip(per_panel) {
        let mut leaves: Vec<Option<HouseholderFactor>> = vec![None; pl.pa];
        let mut node_f: Vec<Option<HouseholderFactor>> = vec![None; pl.events.len()];
        let mut r_panel = None;
        for o in outs {
            leaves[o.rel] = Some(o.leaf);
            for (e, f) in o.nodes {
                node_f[e] = Some(f);
            }
            if o.r.is_some() {
                r_panel = o.r;
            }
        }
        let leaf_rows = (0..pl.pa)
            .map(|rel| {
                let rows = &rows_of[pl.row_of(rel, pr)];
                runs(&rows[rows.partition_point(|&g| g < pl.j0)..])
            })
            .collect();
        let nodes = pl
            .events
            .iter()
            .zip(node_f)
            .map(|(ev, f)| TsqrNode {
                participants: ev.participants.clone(),
                contrib_rows: vec![pl.bw; ev.participants.len()],
                factor: f.expect("every event has a factor"),
            })
            .collect();
        let r_panel =
            r_panel.ok_or_else(|| Error::Executor("diagonal owner finished without R".into()))?;
        panels.push(CaqrPanel {
            cols: pl.j0..pl.j0 + pl.bw,
            active_rows: pl.pa,
            factor: TsqrFactor::new(m, pl.bw, pl.tree.clone(), leaf_rows, leaves, nodes, r_panel)?,
        });
    }

    let r = full.submatrix(0..n, 0..n);
    if !r.is_upper_triangular() || full.submatrix(n..m, 0..n).max_abs() != 0.0 {
        return Err(Error::Executor(
            "assembled factor is not upper triangular".into(),
        ));
    }
    Ok(CaqrResult {
        layout: *layout,
        r,
        panels,
        recorders,
        logs,
    })
}

/// Aggregated sends per `(panel, step, kind)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub panel: usize,
    pub step: usize,
    pub kind: MessageKind,
    pub messages: u64,
    pub words: u64,
}

/// Per-panel schedule depth: the most messages (sent plus received) any
/// single worker handles in each phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelCensus {
    pub panel: usize,
    pub width: usize,
    pub active_rows: usize,
    pub has_update: bool,
    pub tsqr: u64,
    pub tree_exchange: u64,
    pub bcast: u64,
}

impl PanelCensus {
    /// Column-tree messages: TSQR plus update exchanges.
    pub fn column_messages(&self) -> u64 {
        self.tsqr + self.tree_exchange
    }
}

/// Computation that may run while a message is in flight. Recorded only;
/// the executor runs both sequentially.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapPair {
    pub panel: usize,
    pub level: usize,
    pub compute: String,
    pub comm: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaqrCensus {
    pub rows: Vec<CensusRow>,
    pub panels: Vec<PanelCensus>,
    pub overlaps: Vec<OverlapPair>,
    pub total_messages: u64,
    pub total_words: u64,
    /// Sum over panels of column-tree and broadcast depths.
    pub schedule_messages: u64,
    pub critical: PathClock,
    pub model: CostEstimate,
}

impl CaqrCensus {
    pub fn column_messages(&self) -> u64 {
        self.panels.iter().map(PanelCensus::column_messages).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wr.serialize(row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn caqr_message_census(result: &CaqrResult) -> CaqrCensus {
    let lay = &result.layout;
    let np = lay.block_cols();
    let mut rows: BTreeMap<(usize, usize, MessageKind), (u64, u64)> = BTreeMap::new();
    let mut depth = vec![[0u64; 3]; np];
    for log in &result.logs {
        let mut mine = vec![[0u64; 3]; np];
        for e in log {
            let k = match e.kind {
                MessageKind::Tsqr => 0,
                MessageKind::TreeExchange => 1,
                MessageKind::Bcast => 2,
            };
            mine[e.panel][k] += 1;
            if e.sent {
                let slot = rows.entry((e.panel, e.step, e.kind)).or_default();
                slot.0 += 1;
                slot.1 += e.words;
            }
        }
        for (d, x) in depth.iter_mut().zip(mine) {
            for k in 0..3 {
                d[k] = d[k].max(x[k]);
            }
        }
    }
    let mut overlaps = Vec::new();
    let panels: Vec<PanelCensus> = result
        .panels
        .iter()
        .zip(depth)
        .enumerate()
        .map(|(jp, (p, d))| {
            let has_update = p.cols.end < lay.n;
            if has_update {
                for level in 1..=ceil_log2(p.active_rows) as usize {
                    overlaps.push(OverlapPair {
                        panel: jp,
                        level,
                        compute: "form T, partial Yᵀ C".into(),
                        comm: "slot send".into(),
                    });
                    overlaps.push(OverlapPair {
                        panel: jp,
                        level,
                        compute: "C0 -= W".into(),
                        comm: "lower-half return".into(),
                    });
                }
            }
            PanelCensus {
                panel: jp,
                width: p.cols.len(),
                active_rows: p.active_rows,
                has_update,
                tsqr: d[0],
                tree_exchange: d[1],
                bcast: d[2],
            }
        })
        .collect();
    let rows: Vec<CensusRow> = rows
        .into_iter()
        .map(|((panel, step, kind), (messages, words))| CensusRow {
            panel,
            step,
            kind,
            messages,
            words,
        })
        .collect();
    let agg = executor::aggregate(&result.recorders);
    CaqrCensus {
        total_messages: rows.iter().map(|r| r.messages).sum(),
        total_words: rows.iter().map(|r| r.words).sum(),
        schedule_messages: panels.iter().map(|p| p.column_messages() + p.bcast).sum(),
        rows,
        panels,
        overlaps,
        critical: agg.critical,
        model: cost_caqr(
            lay.m as f64,
            lay.n as f64,
            lay.pr as f64,
            lay.pc as f64,
            lay.b as f64,
        ),
    }
}

/// Message counts of a column-at-a-time panel factorization on the same
/// grid: per column a norm reduction, a pivot broadcast and an update
/// reduction down the process column, plus the two row broadcasts per panel.
/// Counting only; nothing is factored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCensus {
    pub column_messages_per_panel: Vec<u64>,
    pub column_messages: u64,
    pub row_messages: u64,
}

pub fn reference_panel_census(layout: &BlockCyclicLayout) -> ReferenceCensus {
    let per: Vec<u64> = (0..layout.block_cols())
        .map(|jb| {
            let bw = layout.col_block_range(jb).len() as u64;
            let pa = layout.pr.min(layout.block_rows() - jb);
            3 * bw * ceil_log2(pa) as u64
        })
        .collect();
    ReferenceCensus {
        column_messages: per.iter().sum(),
        row_messages: 2 * layout.block_cols() as u64 * ceil_log2(layout.pc) as u64,
        column_messages_per_panel: per,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_merge_consecutive_rows() {
        assert_eq!(runs(&[0, 1, 2, 8, 9, 20]), vec![0..3, 8..10, 20..21]);
        assert!(runs(&[]).is_empty());
    }

    #[test]
    fn reference_counts_three_trees_per_column() {
        let lay = BlockCyclicLayout::new(64, 32, 8, 4, 2).unwrap();
        let rc = reference_panel_census(&lay);
        assert_eq!(rc.column_messages_per_panel, vec![48; 4]);
        assert_eq!(rc.row_messages, 8);
    }
}
