use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attachment::{AttachmentFunction, PhiTable, RateCache};
use crate::error::{Error, Result};
use crate::rng::ReplicateSeed;
use crate::sampling::WeightIndex;
use crate::sequence::AttachmentSequence;

/// Degrees, the weight index over `f(degree)`, and the running leader.
///
/// Vertices are numbered by arrival; `v_0` is present from the start with
/// no edges. A vertex that is still attaching its own edges is not a
/// candidate target and enters the index only once it is finished.
#[derive(Debug, Clone)]
pub struct GrowthState<'a> {
    rates: RateCache<'a>,
    /// `Some(c)` when `f` is the constant `c`: targets are uniform and the
    /// index is skipped.
    uniform: Option<f64>,
    degrees: Vec<u32>,
    index: WeightIndex,
    /// Vertices in the index (`v_0 .. v_{indexed-1}`).
    indexed: usize,
    pending: Option<usize>,
    k: u64,
    degree_sum: u64,
    leader: (usize, u32),
    leader_changes: u64,
}

impl<'a> GrowthState<'a> {
    /// `G_0`: the single vertex `v_0`.
    pub fn new(fun: &'a AttachmentFunction, capacity: usize) -> Result<Self> {
        let mut rates = RateCache::new(fun, 0);
        let w0 = rates.get(0)?;
        let uniform = fun.as_constant();
        let mut index = WeightIndex::with_capacity(if uniform.is_some() { 1 } else { capacity.max(1) });
        if uniform.is_none() {
            index.push(w0);
        }
        let mut degrees = Vec::with_capacity(capacity.max(1));
        degrees.push(0);
        Ok(Self {
            rates,
            uniform,
            degrees,
            index,
            indexed: 1,
            pending: None,
            k: 0,
            degree_sum: 0,
            leader: (0, 0),
            leader_changes: 0,
        })
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Edges attached so far.
    pub fn k(&self) -> u64 {
        self.k
    }

    /// Index of the newest vertex.
    pub fn newest(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn degree_sum(&self) -> u64 {
        self.degree_sum
    }

    /// `(I*, d_max)`.
    pub fn leader(&self) -> (usize, u32) {
        self.leader
    }

    pub fn leader_changes(&self) -> u64 {
        self.leader_changes
    }

    /// Number of candidate targets.
    pub fn candidates(&self) -> usize {
        self.indexed
    }

    /// Weight currently held in the index for vertex `i`.
    pub fn weight(&self, i: usize) -> f64 {
        match self.uniform {
            Some(c) => c,
            None => self.index.weight(i),
        }
    }

    /// Total candidate weight.
    pub fn total(&self) -> f64 {
        match self.uniform {
            Some(c) => c * self.indexed as f64,
            None => self.index.total(),
        }
    }

    /// Candidate weight of `v_0 .. v_{i-1}`.
    pub fn prefix(&self, i: usize) -> f64 {
        match self.uniform {
            Some(c) => c * i as f64,
            None => self.index.prefix(i),
        }
    }

    pub fn index(&self) -> &WeightIndex {
        &self.index
    }

    pub fn rebuilds(&self) -> u64 {
        self.index.rebuilds()
    }

    /// Adds the next vertex, which then attaches its edges.
    pub fn begin_vertex(&mut self) -> usize {
        assert!(self.pending.is_none(), "previous vertex not finished");
        self.degrees.push(0);
        let v = self.degrees.len() - 1;
        self.pending = Some(v);
        v
    }

    /// Attaches one edge of the pending vertex. The target is the candidate
    /// whose interval in prefix order contains `u * total`, `u` uniform on `[0, 1)`.
    #[inline]
    pub fn attach_edge(&mut self, u: f64) -> Result<usize> {
        let v = self.pending.expect("no vertex is attaching");
        let target = match self.uniform {
            Some(_) => ((u * self.indexed as f64) as usize).min(self.indexed - 1),
            None => self.index.sample(u),
        };
        self.degrees[target] += 1;
        let d = self.degrees[target];
        if self.uniform.is_none() {
            let w = self.rates.get(d as usize)?;
            self.index.set(target, w);
        }
        self.degrees[v] += 1;
        self.k += 1;
        self.degree_sum += 2;
        self.consider(target);
        self.consider(v);
        Ok(target)
    }

    /// Makes the pending vertex a candidate with weight `f(its degree)`.
    pub fn finish_vertex(&mut self) -> Result<()> {
        let v = self.pending.take().expect("no vertex is attaching");
        if self.uniform.is_none() {
            let w = self.rates.get(self.degrees[v] as usize)?;
            self.index.push(w);
            self.index.maintain()?;
        }
        self.indexed += 1;
        Ok(())
    }

    /// Rebuilds the index from the exact weights now.
    pub fn rebuild_index(&mut self) {
        if self.uniform.is_none() {
            self.index.rebuild();
        }
    }

    #[inline]
    fn consider(&mut self, v: usize) {
        let d = self.degrees[v];
        if v == self.leader.0 {
            self.leader.1 = d;
        } else if d > self.leader.1 || (d == self.leader.1 && v < self.leader.0) {
            self.leader = (v, d);
            self.leader_changes += 1;
        }
    }
}

/// Index of the oldest vertex of maximal degree.
pub fn leader_of(degrees: &[u32]) -> usize {
    let mut best = 0;
    for (i, &d) in degrees.iter().enumerate() {
        if d > degrees[best] {
            best = i;
        }
    }
    best
}

/// Snapshot after vertex `v_n` has attached all its edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub k: u64,
    pub d_max: u32,
    pub leader_index: u64,
    /// Leader changes since `G_0`, counted per attached edge.
    pub leader_changes: u64,
    pub phi1_dmax: Option<f64>,
    pub root_degree: u32,
    pub m_n: u32,
    /// `Phi_1(d_0(k)) / log k`, when a table is available and `k > 1`.
    pub root_phi1_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub provenance: ReplicateSeed,
    pub checkpoints: Vec<Checkpoint>,
    pub final_degrees: Option<Vec<u32>>,
    pub rebuilds: u64,
}

#[derive(Debug, Clone, Default)]
pub struct GrowOptions<'t> {
    /// Table for the `Phi_1` columns.
    pub phi_table: Option<&'t PhiTable>,
    /// Resource cap on attached edges.
    pub max_edges: Option<u64>,
    pub keep_degrees: bool,
}

/// Grows `G_0, G_1, ..., G_{n_max}`: vertex `v_n` brings `m_n` edges, each
/// attached in turn to an existing vertex chosen with probability
/// proportional to `f(current degree)`.
pub fn grow(
    fun: &AttachmentFunction,
    seq: &AttachmentSequence,
    n_max: u64,
    checkpoints: &[u64],
    seed: ReplicateSeed,
    opts: &GrowOptions<'_>,
) -> Result<TrajectoryRecord> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be >= 1".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("checkpoints must be strictly increasing".into()));
    }
    let sampler = seq.sampler()?;
    let mut attach = seed.stream("graph.attach");
    let mut seq_rng = seed.stream("graph.sequence");
    let mut state = GrowthState::new(fun, n_max as usize + 1)?;
    let mut cps = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    let snapshot = |state: &GrowthState, n: u64, m_n: u32, cps: &mut Vec<Checkpoint>| {
        let (li, d) = state.leader();
        let phi = |d: u32| opts.phi_table.and_then(|t| t.at(1, d as usize).ok());
        let root = state.degrees()[0];
        let k = state.k();
        cps.push(Checkpoint {
            n,
            k,
            d_max: d,
            leader_index: li as u64,
            leader_changes: state.leader_changes(),
            phi1_dmax: phi(d),
            root_degree: root,
            m_n,
            root_phi1_ratio: if k > 1 { phi(root).map(|p| p / (k as f64).ln()) } else { None },
        });
    };
    while next_cp < checkpoints.len() && checkpoints[next_cp] == 0 {
        snapshot(&state, 0, 0, &mut cps);
        next_cp += 1;
    }
    for n in 1..=n_max {
        let m = sampler.draw(n, &mut seq_rng);
        if let Some(cap) = opts.max_edges {
            if state.k() + m as u64 > cap {
                return Err(Error::Resource(format!("edge cap {cap} reached at vertex {n}")));
            }
        }
        state.begin_vertex();
        for _ in 0..m {
            let u: f64 = attach.random();
            state.attach_edge(u)?;
        }
        state.finish_vertex()?;
        if next_cp < checkpoints.len() && checkpoints[next_cp] == n {
            snapshot(&state, n, m, &mut cps);
            next_cp += 1;
        }
    }
    state.rebuild_index();
    Ok(TrajectoryRecord {
        provenance: seed,
        checkpoints: cps,
        final_degrees: opts.keep_degrees.then(|| state.degrees().to_vec()),
        rebuilds: state.rebuilds(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderStats {
    pub changed: bool,
    pub change_count: u64,
    pub final_leader: u64,
}

/// Leader changes between the last checkpoints at or before `n_lo` and `n_hi`.
/// Changes are counted per edge by [`grow`]; checkpoints only read the counter.
pub fn leader_statistics(record: &TrajectoryRecord, window: (u64, u64)) -> LeaderStats {
    let at = |n: u64| record.checkpoints.iter().rev().find(|c| c.n <= n);
    let lo = at(window.0).map_or(0, |c| c.leader_changes);
    let hi = at(window.1);
    let count = hi.map_or(0, |c| c.leader_changes) - lo;
    LeaderStats { changed: count > 0, change_count: count, final_leader: hi.map_or(0, |c| c.leader_index) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oldest_max_wins_ties() {
        assert_eq!(leader_of(&[3, 3, 2]), 0);
        assert_eq!(leader_of(&[1, 4, 2, 4]), 1);
    }

    #[test]
    fn first_vertex_joins_root() {
        let f = AttachmentFunction::power(0.7).unwrap();
        let rec = grow(
            &f,
            &AttachmentSequence::Constant { m: 1 },
            1,
            &[1],
            ReplicateSeed::new(1, 0),
            &GrowOptions { keep_degrees: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(rec.final_degrees.unwrap(), vec![1, 1]);
        assert_eq!(rec.checkpoints[0].leader_index, 0);
    }

    #[test]
    fn state_tracks_leader_per_edge() {
        let f = AttachmentFunction::affine(1.0).unwrap();
        let mut s = GrowthState::new(&f, 8).unwrap();
        s.begin_vertex();
        s.attach_edge(0.0).unwrap();
        s.finish_vertex().unwrap();
        // degrees [1, 1]: root leads
        assert_eq!(s.leader(), (0, 1));
        s.begin_vertex();
        // weights 2, 2; u = 0.75 picks v1
        assert_eq!(s.attach_edge(0.75).unwrap(), 1);
        s.finish_vertex().unwrap();
        assert_eq!(s.leader(), (1, 2));
        assert_eq!(s.leader_changes(), 1);
        assert_eq!(s.degree_sum(), 2 * s.k());
    }

    #[test]
    fn window_statistics() {
        let cp = |n, changes, leader| Checkpoint {
            n,
            k: n,
            d_max: 1,
            leader_index: leader,
            leader_changes: changes,
            phi1_dmax: None,
            root_degree: 1,
            m_n: 1,
            root_phi1_ratio: None,
        };
        let rec = TrajectoryRecord {
            provenance: ReplicateSeed::new(0, 0),
            checkpoints: vec![cp(10, 2, 0), cp(100, 2, 0), cp(1000, 5, 7)],
            final_degrees: None,
            rebuilds: 0,
        };
        assert_eq!(leader_statistics(&rec, (10, 100)), LeaderStats { changed: false, change_count: 0, final_leader: 0 });
        assert_eq!(leader_statistics(&rec, (100, 1000)), LeaderStats { changed: true, change_count: 3, final_leader: 7 });
    }
}
