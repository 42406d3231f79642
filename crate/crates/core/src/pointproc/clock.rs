use rand::Rng;

use crate::attachment::{AttachmentFunction, PhiTable, RateCache};
use crate::error::{Error, Result};
use crate::rng::exp1;

/// State of `xi_A`: `count` events by time `clock`, next event at `next_event`.
///
/// Event `j -> j + 1` takes an `Exp(f(A + j))` time, so the event times are
/// the partial sums `S_1^A(n) = sum_{i<n} E_i / f(A + i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockProcess {
    pub a: u64,
    pub count: u64,
    pub clock: f64,
    pub next_event: f64,
}

impl ClockProcess {
    /// Fresh process at time 0; `rate` must be `f(A)`.
    pub fn start<R: Rng + ?Sized>(a: u64, rate: f64, rng: &mut R) -> Self {
        Self { a, count: 0, clock: 0.0, next_event: exp1(rng) / rate }
    }

    /// Moves to the next event. `next_rate` is `f(A + count + 1)`, the rate
    /// after the jump.
    #[inline]
    pub fn fire<R: Rng + ?Sized>(&mut self, next_rate: f64, rng: &mut R) {
        self.clock = self.next_event;
        self.count += 1;
        self.next_event = self.clock + exp1(rng) / next_rate;
    }

    /// Lets time pass to `t` without crossing an event.
    #[inline]
    pub fn idle_to(&mut self, t: f64) {
        debug_assert!(t <= self.next_event);
        self.clock = self.clock.max(t);
    }
}

/// A path of `xi_A` on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiTrajectory {
    pub a: u64,
    pub t_end: f64,
    pub event_times: Vec<f64>,
}

impl XiTrajectory {
    /// `xi_A(t)` for `t <= t_end`.
    pub fn count_at(&self, t: f64) -> u64 {
        self.event_times.partition_point(|&s| s <= t) as u64
    }
}

/// A result cut short by a resource cap, with what was produced so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Capped<T> {
    pub partial: T,
    pub error: Error,
}

/// Exact event-by-event simulation of `xi_A` on `[0, t_end]`.
pub fn simulate_xi<R: Rng + ?Sized>(
    fun: &AttachmentFunction,
    a: u64,
    t_end: f64,
    rng: &mut R,
    event_cap: usize,
) -> std::result::Result<XiTrajectory, Capped<XiTrajectory>> {
    let mut traj = XiTrajectory { a, t_end, event_times: Vec::new() };
    let fail = |traj: XiTrajectory, error: Error| Capped { partial: traj, error };
    if !(t_end >= 0.0) {
        return Err(fail(traj, Error::Domain(format!("t_end must be >= 0, got {t_end}"))));
    }
    let mut rates = RateCache::new(fun, a);
    let r0 = match rates.get(0) {
        Ok(r) => r,
        Err(e) => return Err(fail(traj, e)),
    };
    let mut clock = ClockProcess::start(a, r0, rng);
    while clock.next_event <= t_end {
        if traj.event_times.len() >= event_cap {
            let msg = format!("xi simulation passed {event_cap} events before t = {t_end}");
            return Err(fail(traj, Error::Resource(msg)));
        }
        let r = match rates.get(clock.count as usize + 1) {
            Ok(r) => r,
            Err(e) => return Err(fail(traj, e)),
        };
        clock.fire(r, rng);
        traj.event_times.push(clock.clock);
    }
    Ok(traj)
}

/// `M_A` and its predictable quadratic variation sampled along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    /// `(t, M_A(t))`.
    pub samples: Vec<(f64, f64)>,
    /// `(t, <M_A>(t))`.
    pub qv: Vec<(f64, f64)>,
    /// Largest jump of `M_A` seen on `[0, t_end]`.
    pub max_jump: f64,
    /// `xi_A` at each checkpoint.
    pub counts: Vec<u64>,
}

/// Samples `M_A(t) = Phi_1^A(xi_A(t)) - t` and `<M_A>(t)` at `checkpoints`
/// from a single path of `xi_A`. `Phi_1^A(l) = Phi_1(A + l) - Phi_1(A)`.
pub fn martingale_path<R: Rng + ?Sized>(
    fun: &AttachmentFunction,
    table: &PhiTable,
    a: u64,
    t_end: f64,
    checkpoints: &[f64],
    rng: &mut R,
    event_cap: usize,
) -> Result<MartingalePath> {
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("checkpoints must be sorted".into()));
    }
    if checkpoints.iter().any(|&c| !(c >= 0.0 && c <= t_end)) {
        return Err(Error::Domain(format!("checkpoints must lie in [0, {t_end}]")));
    }
    if table.function() != fun {
        return Err(Error::Config("phi table was built for a different attachment function".into()));
    }
    let recip = table.recip();
    let horizon = table.horizon();
    let base = table.at(1, a as usize)?;
    let rate_at = |j: u64| -> Result<f64> {
        let idx = (a + j) as usize;
        if idx < horizon {
            Ok(1.0 / recip[idx])
        } else {
            Err(Error::Range { what: format!("xi_A reached degree {idx} past the table"), needed_horizon: idx + 1 })
        }
    };
    let mut out = MartingalePath {
        samples: Vec::with_capacity(checkpoints.len()),
        qv: Vec::with_capacity(checkpoints.len()),
        max_jump: 0.0,
        counts: Vec::with_capacity(checkpoints.len()),
    };
    let mut clock = ClockProcess::start(a, rate_at(0)?, rng);
    // qv accumulated up to the last event
    let mut qv_at_event = 0.0;
    for &c in checkpoints {
        while clock.next_event <= c {
            if clock.count as usize >= event_cap {
                return Err(Error::Resource(format!("martingale path passed {event_cap} events")));
            }
            let j = clock.count as usize;
            qv_at_event += (clock.next_event - clock.clock) * recip[a as usize + j];
            out.max_jump = out.max_jump.max(recip[a as usize + j]);
            clock.fire(rate_at(clock.count + 1)?, rng);
        }
        let j = clock.count;
        let phi = table.at(1, (a + j) as usize)? - base;
        out.samples.push((c, phi - c));
        out.qv.push((c, qv_at_event + (c - clock.clock) * recip[(a + j) as usize]));
        out.counts.push(j);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn empty_interval_has_no_events() {
        let f = AttachmentFunction::affine(1.0).unwrap();
        for r in 0..50 {
            let mut rng = derive_stream(3, r, "xi");
            assert!(simulate_xi(&f, 0, 0.0, &mut rng, 10).unwrap().event_times.is_empty());
        }
    }

    #[test]
    fn cap_returns_partial_path() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let mut rng = derive_stream(3, 0, "xi");
        let err = simulate_xi(&f, 0, 1e6, &mut rng, 100).unwrap_err();
        assert_eq!(err.partial.event_times.len(), 100);
        assert!(matches!(err.error, Error::Resource(_)));
    }

    #[test]
    fn unit_rates_qv_is_time() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let table = PhiTable::build(&f, 1000).unwrap();
        let mut rng = derive_stream(5, 0, "mg");
        let cps = [0.0, 1.0, 2.5, 7.0, 10.0];
        let path = martingale_path(&f, &table, 0, 10.0, &cps, &mut rng, 1 << 20).unwrap();
        assert_eq!(path.samples[0], (0.0, 0.0));
        for (&(t, q), &n) in path.qv.iter().zip(&path.counts) {
            assert!((q - t).abs() < 1e-12);
            let m = path.samples.iter().find(|s| s.0 == t).unwrap().1;
            assert_eq!(m, n as f64 - t);
        }
        assert!(path.max_jump <= 1.0);
    }
}
