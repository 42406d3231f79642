//! Continuous-time branching process driven by `f`, the tree embedding of
//! the growth chain.
//!
//! Degrees follow the tree convention: the root's degree is its number of
//! children, every other individual's degree is its number of children plus
//! the edge to its parent. An individual of degree `d` gives birth at rate
//! `f(d)`. Observed at the time `T_n` of the `n`-th birth, the genealogy has
//! the law of the tree `G_n` grown with `m = 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attachment::{AttachmentFunction, PhiTable, RateCache};
use crate::error::{Error, Result};
use crate::rng::{exp1, ReplicateSeed};

/// When to stop the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "until", rename_all = "snake_case")]
pub enum StopRule {
    /// Run on `[0, t]`.
    Time { t: f64 },
    /// Stop at `T_n`, the first time the population reaches `n + 1`.
    Size { n: usize },
}

/// Birth record of individual `i`; the root is individual 0, born at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Birth {
    pub time: f64,
    /// Parent index; `u32::MAX` for the root.
    pub parent: u32,
}

/// Retained history of one run: birth times and parents in birth order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingTrajectory {
    pub births: Vec<Birth>,
    /// `t` for a time rule, `T_n` for a size rule.
    pub end_time: f64,
    pub provenance: ReplicateSeed,
}

impl BranchingTrajectory {
    /// `|BP(t)|`.
    pub fn size_at(&self, t: f64) -> usize {
        self.births.partition_point(|b| b.time <= t)
    }

    /// Children of every individual born by `t`, counted at `t`.
    pub fn child_counts(&self, t: f64) -> Vec<u32> {
        let alive = self.size_at(t);
        let mut counts = vec![0u32; alive];
        for b in &self.births[1..alive] {
            counts[b.parent as usize] += 1;
        }
        counts
    }

    /// Tree degrees at `t`: children, plus one for non-root individuals.
    pub fn tree_degrees(&self, t: f64) -> Vec<u32> {
        let mut d = self.child_counts(t);
        for x in d.iter_mut().skip(1) {
            *x += 1;
        }
        d
    }

    /// `n[a, b]`: individuals born in `[a, b]`.
    pub fn born_in(&self, a: f64, b: f64) -> usize {
        self.births.iter().filter(|x| x.time >= a && x.time <= b).count()
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    who: u32,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap and we want the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.who.cmp(&self.who))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtbpOptions {
    /// Resource cap on the population.
    pub max_size: usize,
}

impl Default for CtbpOptions {
    fn default() -> Self {
        Self { max_size: 50_000_000 }
    }
}

/// Exact event-driven simulation. Every individual holds one pending birth
/// time, redrawn after each of its births, and the earliest pending event
/// fires next. For constant `f` all rates agree and the next parent is
/// uniform, so the queue is skipped.
pub fn run_ctbp(
    fun: &AttachmentFunction,
    until: StopRule,
    seed: ReplicateSeed,
    opts: &CtbpOptions,
) -> Result<BranchingTrajectory> {
    let mut rng = seed.stream("ctbp");
    let (t_stop, n_stop) = match until {
        StopRule::Time { t } => {
            if !(t >= 0.0) {
                return Err(Error::Domain(format!("stopping time must be >= 0, got {t}")));
            }
            (t, usize::MAX)
        }
        StopRule::Size { n } => (f64::INFINITY, n),
    };
    let mut births = vec![Birth { time: 0.0, parent: u32::MAX }];
    let mut end_time = if n_stop == 0 { 0.0 } else { t_stop };
    let cap_error = |size: usize| Error::Resource(format!("population passed the cap of {size}"));
    if n_stop == 0 {
        return Ok(BranchingTrajectory { births, end_time, provenance: seed });
    }
    if let Some(c) = fun.as_constant() {
        let mut t = 0.0;
        loop {
            let size = births.len();
            t += exp1(&mut rng) / (c * size as f64);
            if t > t_stop {
                break;
            }
            if size >= opts.max_size {
                return Err(cap_error(opts.max_size));
            }
            let parent = rng.random_range(0..size) as u32;
            births.push(Birth { time: t, parent });
            if births.len() - 1 == n_stop {
                end_time = t;
                break;
            }
        }
        return Ok(BranchingTrajectory { births, end_time, provenance: seed });
    }
    let mut rates = RateCache::new(fun, 0);
    let mut children: Vec<u32> = vec![0];
    let mut heap = BinaryHeap::new();
    heap.push(Event { time: exp1(&mut rng) / rates.get(0)?, who: 0 });
    while let Some(ev) = heap.pop() {
        if ev.time > t_stop {
            break;
        }
        if births.len() >= opts.max_size {
            return Err(cap_error(opts.max_size));
        }
        let parent = ev.who as usize;
        let child = births.len() as u32;
        births.push(Birth { time: ev.time, parent: ev.who });
        children[parent] += 1;
        children.push(0);
        let parent_degree = children[parent] + u32::from(parent != 0);
        heap.push(Event { time: ev.time + exp1(&mut rng) / rates.get(parent_degree as usize)?, who: ev.who });
        heap.push(Event { time: ev.time + exp1(&mut rng) / rates.get(1)?, who: child });
        if births.len() - 1 == n_stop {
            end_time = ev.time;
            break;
        }
    }
    Ok(BranchingTrajectory { births, end_time, provenance: seed })
}

/// `D^max_{a,b}(c)`: the largest `Phi_1(children at c)` among individuals
/// born in `[a, b]`; 0 when `c <= b` or nobody was born in `[a, b]`.
pub fn window_max_degree(traj: &BranchingTrajectory, table: &PhiTable, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::Domain(format!("window needs a < b, got [{a}, {b}]")));
    }
    if c <= b {
        return Ok(0.0);
    }
    let counts = traj.child_counts(c);
    let mut best: Option<u32> = None;
    for (i, birth) in traj.births.iter().enumerate().take(counts.len()) {
        if birth.time >= a && birth.time <= b {
            best = Some(best.map_or(counts[i], |m: u32| m.max(counts[i])));
        }
    }
    match best {
        None => Ok(0.0),
        Some(m) => table.at(1, m as usize),
    }
}

/// The hub at time `t`: the earliest-born individual of maximal tree degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubIndex {
    pub individual: usize,
    pub birth_time: f64,
    pub degree: u32,
}

/// `I*_c(t)`, the birth time (and index) of the oldest individual of maximal degree.
pub fn hub_index_continuous(traj: &BranchingTrajectory, t: f64) -> HubIndex {
    let d = traj.tree_degrees(t);
    let mut best = 0;
    for i in 1..d.len() {
        // births are in time order, so the first maximum is the earliest
        if d[i] > d[best] {
            best = i;
        }
    }
    HubIndex { individual: best, birth_time: traj.births[best].time, degree: d[best] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalthusianDiagnostic {
    pub t_grid: Vec<f64>,
    /// `e^{-lambda* t} |BP(t)|` on the grid.
    pub samples: Vec<f64>,
    /// The sample at the last grid point.
    pub w_estimate: f64,
}

/// One trajectory's normalized population on `t_grid` (sorted, non-empty).
pub fn malthusian_diagnostic(
    fun: &AttachmentFunction,
    lambda_star: f64,
    t_grid: &[f64],
    seed: ReplicateSeed,
    opts: &CtbpOptions,
) -> Result<MalthusianDiagnostic> {
    let t_max = *t_grid.last().ok_or_else(|| Error::Domain("time grid is empty".into()))?;
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be sorted".into()));
    }
    let traj = run_ctbp(fun, StopRule::Time { t: t_max }, seed, opts)?;
    let samples: Vec<f64> = t_grid.iter().map(|&t| (-lambda_star * t).exp() * traj.size_at(t) as f64).collect();
    Ok(MalthusianDiagnostic { t_grid: t_grid.to_vec(), w_estimate: *samples.last().unwrap(), samples })
}
