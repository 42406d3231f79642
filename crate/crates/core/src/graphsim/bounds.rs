use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grow::GrowthState;
use crate::attachment::{AttachmentFunction, RateCache};
use crate::error::{Error, Result};
use crate::rng::ReplicateSeed;
use crate::sequence::{AttachmentSequence, RealizedSequence};

/// The lower chain next to the root degree it is coupled with, after each edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPath {
    /// `d(k)` for `k = 0..=k_max`.
    pub lower: Vec<u32>,
    /// `d_0(k)` of the coupled growth.
    pub root: Vec<u32>,
    /// Steps with `lower > root`.
    pub violations: u64,
}

/// Chain with `P(d(k+1) = d(k) + 1) = f(d(k)) / (3 C_f (k + 1))`, driven by
/// the same uniform as the growth step: it moves iff `U` is below that
/// probability, while the root is hit iff `U * total < f(d_0)`. When the two
/// agree the chain's probability is the smaller one, so `d(k) <= d_0(k)`.
pub fn bound_process_lower(
    fun: &AttachmentFunction,
    seq: &AttachmentSequence,
    k_max: u64,
    seed: ReplicateSeed,
) -> Result<LowerBoundPath> {
    let c_f = fun.linear_bound().ok_or_else(|| Error::Config("the lower bound chain needs a declared C_f".into()))?;
    if !fun.is_monotone() {
        return Err(Error::Config("the lower bound chain needs f declared monotone".into()));
    }
    let sampler = seq.sampler()?;
    let mut rng = seed.stream("graph.attach");
    let mut seq_rng = seed.stream("graph.sequence");
    let mut rates = RateCache::new(fun, 0);
    let mut state = GrowthState::new(fun, 1024)?;
    let mut out = LowerBoundPath { lower: vec![0], root: vec![0], violations: 0 };
    let mut d = 0u32;
    let mut n = 0u64;
    'outer: while state.k() < k_max {
        n += 1;
        let m = sampler.draw(n, &mut seq_rng);
        state.begin_vertex();
        for _ in 0..m {
            if state.k() >= k_max {
                break 'outer;
            }
            let k = state.k();
            let u: f64 = rng.random();
            let p = rates.get(d as usize)? / (3.0 * c_f * (k + 1) as f64);
            state.attach_edge(u)?;
            if u < p {
                d += 1;
            }
            let root = state.degrees()[0];
            if d > root {
                out.violations += 1;
            }
            out.lower.push(d);
            out.root.push(root);
        }
        state.finish_vertex()?;
    }
    Ok(out)
}

/// The upper chain for vertex `l` next to `d_l`, from `l`'s arrival on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundPath {
    pub l: usize,
    /// Edge count at which `l` arrived.
    pub start_k: u64,
    /// `bar d(k)` for `k = start_k..=k_max`.
    pub upper: Vec<u32>,
    /// `d_l(k)` of the coupled growth.
    pub actual: Vec<u32>,
    /// Steps where the chain's probability exceeded one and was clamped.
    pub clamped_steps: u64,
    /// Steps with `upper < actual`.
    pub violations: u64,
}

/// Chain with `P(bar d(k+1) = bar d(k) + 1) = f(bar d(k)) / (eps (k + 1) f(0))`
/// (clamped to one) for vertex `l`, coupled to the growth: `l` is hit iff
/// `U * total` falls in `l`'s prefix interval `[a, a + w_l)`, and the chain
/// moves iff `(U - a / total) mod 1` is below its probability. While `l`
/// attaches its own edges both move deterministically.
///
/// The premise `s^-1(k) >= eps (k + 1)` is checked on the realized sequence
/// at every step from `l`'s arrival.
pub fn bound_process_upper(
    fun: &AttachmentFunction,
    seq: &AttachmentSequence,
    eps: f64,
    l: usize,
    k_max: u64,
    seed: ReplicateSeed,
) -> Result<UpperBoundPath> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let f0 = fun.eval_f(0)?;
    if fun.f_star() < f0 {
        return Err(Error::Config("the upper bound chain needs inf f = f(0)".into()));
    }
    let sampler = seq.sampler()?;
    let mut rng = seed.stream("graph.attach");
    let mut seq_rng = seed.stream("graph.sequence");
    let mut rates = RateCache::new(fun, 0);
    let mut state = GrowthState::new(fun, 1024)?;
    let mut realized = RealizedSequence::new();
    let mut out = UpperBoundPath { l, start_k: 0, upper: Vec::new(), actual: Vec::new(), clamped_steps: 0, violations: 0 };
    let mut d_bar = 0u32;
    let mut started = l == 0;
    if started {
        out.upper.push(0);
        out.actual.push(0);
    }
    let mut n = 0usize;
    'outer: while state.k() < k_max {
        n += 1;
        let m = sampler.draw(n as u64, &mut seq_rng);
        realized.push(m);
        let v = state.begin_vertex();
        if v == l {
            started = true;
            out.start_k = state.k();
            out.upper.push(0);
            out.actual.push(0);
        }
        for _ in 0..m {
            if state.k() >= k_max {
                break 'outer;
            }
            let k = state.k();
            let u: f64 = rng.random();
            if !started {
                state.attach_edge(u)?;
                continue;
            }
            // s^-1(k) is the vertex attaching edge k + 1, i.e. v
            let s_inv = realized.s_inverse(k).expect("edge k belongs to the current vertex");
            debug_assert_eq!(s_inv, v);
            if (s_inv as f64) < eps * (k + 1) as f64 {
                return Err(Error::Config(format!(
                    "premise s^-1(k) >= eps (k + 1) fails first at k = {k} (s^-1 = {s_inv}, eps = {eps})"
                )));
            }
            if v == l {
                state.attach_edge(u)?;
                d_bar += 1;
            } else {
                let total = state.total();
                let a = state.prefix(l);
                let mut p = rates.get(d_bar as usize)? / (eps * (k + 1) as f64 * f0);
                if p > 1.0 {
                    p = 1.0;
                    out.clamped_steps += 1;
                }
                let shifted = (u - a / total).rem_euclid(1.0);
                state.attach_edge(u)?;
                if shifted < p {
                    d_bar += 1;
                }
            }
            let actual = state.degrees()[l];
            if d_bar < actual {
                out.violations += 1;
            }
            out.upper.push(d_bar);
            out.actual.push(actual);
        }
        state.finish_vertex()?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_is_the_start() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let p = bound_process_lower(&f, &AttachmentSequence::Constant { m: 1 }, 0, ReplicateSeed::new(1, 0)).unwrap();
        assert_eq!(p.lower, vec![0]);
        let q = bound_process_upper(&f, &AttachmentSequence::Constant { m: 1 }, 0.5, 0, 0, ReplicateSeed::new(1, 0)).unwrap();
        assert_eq!(q.upper, vec![0]);
    }

    #[test]
    fn missing_linear_bound_is_a_config_error() {
        let f = AttachmentFunction::power(1.5).unwrap();
        let r = bound_process_lower(&f, &AttachmentSequence::Constant { m: 1 }, 10, ReplicateSeed::new(1, 0));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn premise_violation_names_k() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        // m = 3 gives s^-1(k) ~ k / 3 < 0.5 (k + 1) soon after the start
        let r = bound_process_upper(&f, &AttachmentSequence::Constant { m: 3 }, 0.5, 1, 100, ReplicateSeed::new(1, 0));
        match r {
            Err(Error::Config(msg)) => assert!(msg.contains("k = 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
