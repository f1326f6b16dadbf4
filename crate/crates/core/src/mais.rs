//! Maximum acyclic induced subgraph (MAIS) bound for a choice of desired messages.
//!
//! For users with pairwise-distinct desired messages, the digraph has one
//! vertex per desired message and an arc `(w_i, w_j)` when the user desiring
//! `w_i` knows `w_j`. Any valid code has length at least the largest acyclic
//! such digraph.
//!
//! Every acyclic digraph has a sink, and a user can serve as a sink for a
//! vertex set `S ∪ {v}` iff it desires `v` and knows nothing in `S`. The
//! exact search therefore grows realizable vertex sets one sink at a time,
//! level by level, which never depends on which users realized `S`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::assignment::{sample_rng, Assignment, AssignmentSpace};
use crate::decode::mask_as_list;
use crate::error::{PicodError, Result};
use crate::exec::Exec;
use crate::instance::{bit, members, Instance};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Digraph {
    pub vertices: Vec<u8>,
    pub arcs: Vec<(u8, u8)>,
}

impl Digraph {
    /// Acyclicity by repeatedly removing vertices without incoming arcs.
    pub fn is_acyclic(&self) -> bool {
        let mut alive: Vec<u8> = self.vertices.clone();
        loop {
            let next: Vec<u8> = alive
                .iter()
                .copied()
                .filter(|&v| self.arcs.iter().any(|&(a, b)| b == v && alive.contains(&a)))
                .collect();
            if next.is_empty() {
                return true;
            }
            if next.len() == alive.len() {
                return false;
            }
            alive = next;
        }
    }
}

/// Digraph induced by `chosen` users; their desired messages must be distinct.
pub fn build_digraph(inst: &Instance, d: &Assignment, chosen: &[usize]) -> Result<Digraph> {
    let mut vertices = Vec::with_capacity(chosen.len());
    for &u in chosen {
        if u >= inst.n() {
            return Err(PicodError::domain(format!("user {u} out of range")));
        }
        if vertices.contains(&d.get(u)) {
            return Err(PicodError::domain(format!(
                "message {} desired twice among chosen users",
                d.get(u)
            )));
        }
        vertices.push(d.get(u));
    }
    let mut arcs = Vec::new();
    for &u in chosen {
        for &v in &vertices {
            if inst.user(u).contains(v) {
                arcs.push((d.get(u), v));
            }
        }
    }
    Ok(Digraph { vertices, arcs })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaisResult {
    pub size: usize,
    /// Users with distinct desired messages inducing an acyclic digraph. Each
    /// user's side information avoids the desired messages of all later users.
    pub witness_users: Vec<usize>,
    #[serde(serialize_with = "mask_as_list")]
    pub vertices: u64,
}

/// Users desiring each message, as `(user, side-information mask)`.
fn desirers(inst: &Instance, d: &Assignment) -> Vec<Vec<(usize, u64)>> {
    let mut by_msg = vec![Vec::new(); inst.m() as usize + 1];
    for (j, a) in inst.users().iter().enumerate() {
        by_msg[d.get(j) as usize].push((j, a.mask()));
    }
    by_msg
}

/// Smallest user desiring `v` that knows nothing in `rest`.
fn sink_user(by_msg: &[Vec<(usize, u64)>], v: u8, rest: u64) -> Option<usize> {
    by_msg[v as usize]
        .iter()
        .find(|&&(_, a)| a & rest == 0)
        .map(|&(j, _)| j)
}

/// Size of the MAIS only.
pub fn mais_value(inst: &Instance, d: &Assignment) -> usize {
    let by_msg = desirers(inst, d);
    levels(&by_msg, d.image()).len() - 1
}

/// Realizable vertex sets grouped by size, each level sorted.
fn levels(by_msg: &[Vec<(usize, u64)>], image: u64) -> Vec<Vec<u64>> {
    let bound = image.count_ones() as usize;
    let mut levels = vec![vec![0u64]];
    while levels.len() <= bound {
        let mut next: Vec<u64> = Vec::new();
        for &s in levels.last().expect("nonempty") {
            for v in members(image & !s) {
                if sink_user(by_msg, v, s).is_some() {
                    next.push(s | bit(v));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        next.dedup();
        levels.push(next);
    }
    levels
}

/// Exact MAIS with a deterministic witness: the numerically smallest vertex
/// mask of maximum size, peeled one sink at a time taking the smallest
/// message and then the smallest user.
pub fn mais_size(inst: &Instance, d: &Assignment) -> MaisResult {
    let by_msg = desirers(inst, d);
    let levels = levels(&by_msg, d.image());
    let size = levels.len() - 1;
    let top = levels[size][0];
    let mut rest = top;
    let mut witness_users = Vec::with_capacity(size);
    for k in (1..=size).rev() {
        let (v, user) = members(rest)
            .into_iter()
            .find_map(|v| {
                let smaller = rest & !bit(v);
                if levels[k - 1].binary_search(&smaller).is_err() {
                    return None;
                }
                sink_user(&by_msg, v, smaller).map(|u| (v, u))
            })
            .expect("every realizable set has a realizable sink");
        witness_users.push(user);
        rest &= !bit(v);
    }
    MaisResult {
        size,
        witness_users,
        vertices: top,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum MinMaisMode {
    Exhaustive { budget: u128 },
    Sampled { seed: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinMais {
    /// Exact minimum in exhaustive mode; an upper bound on it when sampled.
    pub min: usize,
    pub witness: Assignment,
    pub mode: MinMaisMode,
    pub evaluated: u64,
    /// How many assignments attain each MAIS size.
    pub histogram: BTreeMap<usize, u64>,
}

impl MinMais {
    pub fn is_exhaustive(&self) -> bool {
        matches!(self.mode, MinMaisMode::Exhaustive { .. })
    }
}

#[derive(Clone)]
struct Acc {
    best: Option<(usize, usize)>,
    histogram: Vec<u64>,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Acc {
        self.best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (h, o) in self.histogram.iter_mut().zip(other.histogram) {
            *h += o;
        }
        self
    }
}

/// Minimum MAIS over all assignments, or over seeded random ones.
///
/// Ties pick the lexicographically smallest assignment (exhaustive) or the
/// lowest sample index (sampled).
pub fn min_mais(inst: &Instance, mode: MinMaisMode, exec: Exec) -> Result<MinMais> {
    let space = AssignmentSpace::new(inst);
    let (count, pick): (usize, Box<dyn Fn(usize) -> Assignment + Sync + Send>) = match mode {
        MinMaisMode::Exhaustive { budget } => {
            let n = space.check_budget(budget)?;
            let sp = space.clone();
            (n, Box::new(move |i| sp.nth(i as u128)))
        }
        MinMaisMode::Sampled { seed, samples } => {
            let n = usize::try_from(samples).map_err(|_| PicodError::domain("too many samples"))?;
            if n == 0 {
                return Err(PicodError::domain("sampled mode needs at least one sample"));
            }
            let sp = space.clone();
            (
                n,
                Box::new(move |i| sp.sample(&mut sample_rng(seed, i as u64))),
            )
        }
    };
    let acc = exec.map_reduce(
        count,
        |i| {
            let size = mais_value(inst, &pick(i));
            let mut histogram = vec![0; size + 1];
            histogram[size] = 1;
            Acc {
                best: Some((size, i)),
                histogram,
            }
        },
        || Acc {
            best: None,
            histogram: Vec::new(),
        },
        Acc::merge,
    );
    let (min, index) = acc
        .best
        .ok_or_else(|| PicodError::domain("empty assignment space"))?;
    let histogram = acc
        .histogram
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (k, c))
        .collect();
    Ok(MinMais {
        min,
        witness: pick(index),
        mode,
        evaluated: count as u64,
        histogram,
    })
}

/// Single-entry walk from the all-smallest assignment to `target`.
///
/// Users are handled in order; each user's desired message is advanced to its
/// next allowed message until it matches the target, one step per assignment.
pub fn assignment_walk(inst: &Instance, target: &Assignment) -> Result<Vec<Assignment>> {
    target.validate(inst)?;
    let space = AssignmentSpace::new(inst);
    let mut current = space.first();
    let mut walk = vec![current.clone()];
    for j in 0..inst.n() {
        let options = space.options(j);
        let goal = options
            .iter()
            .position(|&x| x == target.get(j))
            .expect("validated");
        for &next in &options[1..=goal] {
            current.desired[j] = next;
            walk.push(current.clone());
        }
    }
    debug_assert_eq!(&current, target);
    Ok(walk)
}
