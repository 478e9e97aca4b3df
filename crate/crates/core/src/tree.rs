//! Reduction trees over `P` leaves.
//!
//! A tree is stored as its schedule: a list of levels, each a list of
//! combine groups. Within a group the lowest processor id receives, and the
//! participants' triangles are stacked in increasing id order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node index of leaf `i` at level `k`: `floor(i / 2^k)`.
pub fn level(i: usize, k: u32) -> usize {
    i >> k
}

/// Lowest processor id under the level-`k` node above leaf `i`.
pub fn first_proc(i: usize, k: u32) -> usize {
    level(i, k) << k
}

/// Lowest processor id of the sibling merged at level `k` (`k >= 1`).
pub fn target_first_proc(i: usize, k: u32) -> usize {
    debug_assert!(k >= 1);
    first_proc(i, k) + (1 << (k - 1))
}

pub fn ceil_log2(p: usize) -> u32 {
    if p <= 1 {
        0
    } else {
        usize::BITS - (p - 1).leading_zeros()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeShape {
    Flat,
    Binary,
    /// `q`-ary: at each level consecutive runs of `q` survivors combine.
    Qary(usize),
    /// Explicit groups per level.
    Levels(Vec<Vec<Vec<usize>>>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeMode {
    #[default]
    Reduce,
    AllReduce,
}

/// One combine step: the receiver stacks the triangles of all participants
/// (itself included) in increasing id order and factors the stack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombineEvent {
    /// 1-based tree level.
    pub level: usize,
    pub participants: Vec<usize>,
    pub receiver: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalPathStats {
    pub stages: usize,
    pub messages_per_proc: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTree {
    p: usize,
    shape: TreeShape,
    mode: TreeMode,
    levels: Vec<Vec<CombineEvent>>,
}

impl ReductionTree {
    pub fn binary(p: usize) -> Result<Self> {
        Self::new(p, TreeShape::Binary)
    }

    pub fn flat(p: usize) -> Result<Self> {
        Self::new(p, TreeShape::Flat)
    }

    pub fn qary(q: usize, p: usize) -> Result<Self> {
        Self::new(p, TreeShape::Qary(q))
    }

    pub fn from_levels(levels: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let p = levels
            .iter()
            .flatten()
            .flatten()
            .max()
            .map_or(1, |&m| m + 1);
        Self::new(p, TreeShape::Levels(levels))
    }

    pub fn new(p: usize, shape: TreeShape) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidTree("a tree needs at least one leaf".into()));
        }
        let groups = match &shape {
            TreeShape::Flat => (1..p).map(|k| vec![vec![0, k]]).collect(),
            TreeShape::Binary => binary_groups(p),
            TreeShape::Qary(q) => {
                if *q < 2 {
                    return Err(Error::InvalidTree(format!(
                        "q-ary tree needs q >= 2, got {q}"
                    )));
                }
                qary_groups(*q, p)
            }
            TreeShape::Levels(l) => l.clone(),
        };
        let levels = validate(p, groups)?;
        Ok(ReductionTree {
            p,
            shape,
            mode: TreeMode::Reduce,
            levels,
        })
    }

    pub fn with_mode(mut self, mode: TreeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn leaves(&self) -> usize {
        self.p
    }

    pub fn shape(&self) -> &TreeShape {
        &self.shape
    }

    pub fn mode(&self) -> TreeMode {
        self.mode
    }

    /// Processor holding the final `R` in reduce mode.
    pub fn root(&self) -> usize {
        self.levels
            .last()
            .and_then(|l| l.first())
            .map_or(0, |e| e.receiver)
    }

    /// Combine events grouped by level, in execution order.
    pub fn levels(&self) -> &[Vec<CombineEvent>] {
        &self.levels
    }

    /// Flattened schedule.
    pub fn schedule(&self) -> Vec<CombineEvent> {
        self.levels.iter().flatten().cloned().collect()
    }

    /// True when all-reduce runs as a butterfly (every pair exchanges).
    pub fn is_butterfly(&self) -> bool {
        self.mode == TreeMode::AllReduce
            && self.shape == TreeShape::Binary
            && self.p.is_power_of_two()
    }

    /// Stage count and messages received on the critical path. A stage is a
    /// level; a receiver takes one message per other participant.
    pub fn critical_path_stats(&self) -> CriticalPathStats {
        let stages = self.levels.len();
        let reduce_msgs: usize = self
            .levels
            .iter()
            .map(|l| {
                l.iter()
                    .map(|e| e.participants.len() - 1)
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        let messages_per_proc = match self.mode {
            TreeMode::Reduce => reduce_msgs,
            TreeMode::AllReduce if self.is_butterfly() => reduce_msgs,
            // reduce, then the same tree backwards as a broadcast
            TreeMode::AllReduce => 2 * reduce_msgs,
        };
        CriticalPathStats {
            stages: if self.mode == TreeMode::AllReduce && !self.is_butterfly() {
                2 * stages
            } else {
                stages
            },
            messages_per_proc,
        }
    }
}

fn binary_groups(p: usize) -> Vec<Vec<Vec<usize>>> {
    (1..=ceil_log2(p))
        .map(|k| {
            (0..p)
                .step_by(1 << k)
                .filter_map(|first| {
                    let target = target_first_proc(first, k);
                    (target < p).then(|| vec![first, target])
                })
                .collect()
        })
        .collect()
}

fn qary_groups(q: usize, p: usize) -> Vec<Vec<Vec<usize>>> {
    let mut active: Vec<usize> = (0..p).collect();
    let mut levels = Vec::new();
    while active.len() > 1 {
        let groups: Vec<Vec<usize>> = active
            .chunks(q)
            .filter(|c| c.len() > 1)
            .map(<[usize]>::to_vec)
            .collect();
        active = active.chunks(q).map(|c| c[0]).collect();
        levels.push(groups);
    }
    levels
}

fn validate(p: usize, groups: Vec<Vec<Vec<usize>>>) -> Result<Vec<Vec<CombineEvent>>> {
    let bad = |msg: String| Err(Error::InvalidTree(msg));
    let mut active = vec![true; p];
    let mut levels = Vec::with_capacity(groups.len());
    for (li, level_groups) in groups.into_iter().enumerate() {
        let mut seen = vec![false; p];
        let mut events = Vec::with_capacity(level_groups.len());
        for mut g in level_groups {
            g.sort_unstable();
            if g.len() < 2 {
                return bad(format!(
                    "level {}: group {g:?} has fewer than 2 members",
                    li + 1
                ));
            }
            for &id in &g {
                if id >= p {
                    return bad(format!("level {}: processor {id} out of range", li + 1));
                }
                if !active[id] {
                    return bad(format!("level {}: processor {id} already merged", li + 1));
                }
                if seen[id] {
                    return bad(format!("level {}: processor {id} appears twice", li + 1));
                }
                seen[id] = true;
            }
            for &id in &g[1..] {
                active[id] = false;
            }
            events.push(CombineEvent {
                level: li + 1,
                receiver: g[0],
                participants: g,
            });
        }
        if events.is_empty() {
            return bad(format!("level {} is empty", li + 1));
        }
        events.sort_by_key(|e| e.receiver);
        levels.push(events);
    }
    let left = active.iter().filter(|&&a| a).count();
    if left != 1 {
        return bad(format!("tree leaves {left} roots, expected 1"));
    }
    Ok(levels)
}

impl FromStr for ReductionTree {
    type Err = Error;

    /// `binary:P`, `flat:P`, `qary:q:P` or `levels:[[0,1],[2,3]];[[0,2]]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad tree spec {s:?}"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "binary" => Self::binary(num(rest)?),
            "flat" => Self::flat(num(rest)?),
            "qary" => {
                let (q, p) = rest.split_once(':').ok_or_else(bad)?;
                Self::qary(num(q)?, num(p)?)
            }
            "levels" => {
                let levels = rest
                    .split(';')
                    .map(|l| serde_json::from_str::<Vec<Vec<usize>>>(l.trim()).map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Self::from_levels(levels)
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ReductionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            TreeShape::Flat => write!(f, "flat:{}", self.p),
            TreeShape::Binary => write!(f, "binary:{}", self.p),
            TreeShape::Qary(q) => write!(f, "qary:{q}:{}", self.p),
            TreeShape::Levels(levels) => {
                write!(f, "levels:")?;
                for (i, l) in levels.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{}", serde_json::to_string(l).map_err(|_| fmt::Error)?)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(t: &ReductionTree) -> Vec<Vec<Vec<usize>>> {
        t.levels()
            .iter()
            .map(|l| l.iter().map(|e| e.participants.clone()).collect())
            .collect()
    }

    #[test]
    fn node_arithmetic() {
        assert_eq!(level(5, 0), 5);
        assert_eq!(level(5, 2), 1);
        assert_eq!(level(7, 3), 0);
        for i in 4..8 {
            assert_eq!(first_proc(i, 2), 4);
            assert_eq!(target_first_proc(i, 2), 6);
        }
        assert_eq!(first_proc(0, 5), 0);
        assert_eq!((first_proc(3, 1), target_first_proc(3, 1)), (2, 3));
    }

    #[test]
    fn binary_four() {
        let t = ReductionTree::binary(4).unwrap();
        assert_eq!(
            pairs(&t),
            vec![vec![vec![0, 1], vec![2, 3]], vec![vec![0, 2]]]
        );
        assert_eq!(t.root(), 0);
    }

    #[test]
    fn flat_four_is_a_chain() {
        let t = ReductionTree::flat(4).unwrap();
        let s = t.schedule();
        assert_eq!(s.len(), 3);
        assert!(s
            .iter()
            .enumerate()
            .all(|(k, e)| e.participants == vec![0, k + 1]));
        assert_eq!(t.critical_path_stats().stages, 3);
    }

    #[test]
    fn single_leaf_has_nothing_to_do() {
        for t in [ReductionTree::binary(1), ReductionTree::flat(1)] {
            let t = t.unwrap();
            assert!(t.schedule().is_empty());
            assert_eq!(
                t.critical_path_stats(),
                CriticalPathStats {
                    stages: 0,
                    messages_per_proc: 0
                }
            );
        }
    }

    #[test]
    fn binary_event_counts() {
        for p in 1..40 {
            let t = ReductionTree::binary(p).unwrap();
            assert_eq!(t.schedule().len(), p - 1);
            assert_eq!(t.levels().len() as u32, ceil_log2(p));
        }
        assert_eq!(
            ReductionTree::binary(16)
                .unwrap()
                .critical_path_stats()
                .stages,
            4
        );
    }

    #[test]
    fn odd_leaf_passes_through() {
        let t = ReductionTree::binary(5).unwrap();
        assert_eq!(
            pairs(&t),
            vec![
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0, 2]],
                vec![vec![0, 4]]
            ]
        );
    }

    #[test]
    fn power_of_two_levels_pair_everyone() {
        let p = 16;
        let t = ReductionTree::binary(p).unwrap();
        for (k, l) in t.levels().iter().enumerate() {
            let mut ids: Vec<_> = l.iter().flat_map(|e| e.participants.clone()).collect();
            ids.sort_unstable();
            let stride = 1 << k;
            assert_eq!(ids, (0..p).step_by(stride).collect::<Vec<_>>());
        }
    }

    #[test]
    fn qary_and_levels() {
        let t = ReductionTree::qary(4, 16).unwrap();
        assert_eq!(t.levels().len(), 2);
        assert_eq!(t.critical_path_stats().messages_per_proc, 6);
        let t: ReductionTree = "levels:[[0,1],[2,3]];[[0,2]]".parse().unwrap();
        assert_eq!(pairs(&t), pairs(&ReductionTree::binary(4).unwrap()));
        assert_eq!(t.to_string(), "levels:[[0,1],[2,3]];[[0,2]]");
    }

    #[test]
    fn malformed_trees_are_rejected() {
        for s in [
            "levels:[[0,1]];[[0,1]]",
            "levels:[[0,1],[1,2]]",
            "levels:[[0,1]];[[2,3]]",
            "levels:[[0]]",
            "binary:0",
            "star:4",
            "qary:1:4",
            "binary:x",
        ] {
            assert!(s.parse::<ReductionTree>().is_err(), "{s}");
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["binary:16", "flat:8", "qary:3:10"] {
            assert_eq!(s.parse::<ReductionTree>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn all_reduce_keeps_stage_count_on_butterflies() {
        let r = ReductionTree::binary(8).unwrap();
        let a = r.clone().with_mode(TreeMode::AllReduce);
        assert!(a.is_butterfly());
        assert_eq!(r.critical_path_stats(), a.critical_path_stats());
    }
}
