use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attachment::{AttachmentFunction, RateCache};
use crate::error::{Error, Result};
use crate::pointproc::ClockProcess;

/// A path of the two-coordinate race.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceResult {
    /// `(X1_j, X2_j)` for `j = 0..=steps`.
    pub path: Vec<(u32, u32)>,
    /// Sign changes of `X1 - X2`, ignoring ties.
    pub lead_changes: u32,
    /// Steps `j >= 1` with `X1_j = X2_j`.
    pub tie_visits: u32,
}

impl RaceResult {
    fn from_path(path: Vec<(u32, u32)>) -> Self {
        let mut lead_changes = 0;
        let mut tie_visits = 0;
        let sign = |p: &(u32, u32)| (p.0 as i64 - p.1 as i64).signum();
        let mut last = sign(&path[0]);
        for p in &path[1..] {
            let s = sign(p);
            if s == 0 {
                tie_visits += 1;
            } else {
                if last != 0 && s != last {
                    lead_changes += 1;
                }
                last = s;
            }
        }
        Self { path, lead_changes, tie_visits }
    }

    /// Bit `j` is set when coordinate 1 moved at step `j + 1`.
    pub fn encode(&self) -> u64 {
        self.path.windows(2).enumerate().fold(0, |acc, (j, w)| if w[1].0 > w[0].0 { acc | (1 << j) } else { acc })
    }
}

fn check_init(init: (u32, u32)) -> Result<()> {
    if init.0 < 1 || init.1 < 1 {
        return Err(Error::Domain(format!("race needs both starting degrees >= 1, got {init:?}")));
    }
    Ok(())
}

/// The jump chain in which coordinate 1 moves with probability
/// `f(X1) / (f(X1) + f(X2))` and otherwise coordinate 2 moves.
pub fn race<R: Rng + ?Sized>(fun: &AttachmentFunction, init: (u32, u32), steps: usize, rng: &mut R) -> Result<RaceResult> {
    check_init(init)?;
    let mut rates = RateCache::new(fun, 0);
    let mut path = Vec::with_capacity(steps + 1);
    let (mut x1, mut x2) = init;
    path.push((x1, x2));
    for _ in 0..steps {
        let a = rates.get(x1 as usize)?;
        let b = rates.get(x2 as usize)?;
        let u: f64 = rng.random();
        if u * (a + b) < a {
            x1 += 1;
        } else {
            x2 += 1;
        }
        path.push((x1, x2));
    }
    Ok(RaceResult::from_path(path))
}

/// Two independent clocks with rates `f(a + i)` and `f(b + i)`, observed at
/// their combined event times.
pub fn two_clock_chain<R: Rng + ?Sized>(
    fun: &AttachmentFunction,
    init: (u32, u32),
    steps: usize,
    rng: &mut R,
) -> Result<RaceResult> {
    check_init(init)?;
    let mut r1 = RateCache::new(fun, init.0 as u64);
    let mut r2 = RateCache::new(fun, init.1 as u64);
    let mut c1 = ClockProcess::start(init.0 as u64, r1.get(0)?, rng);
    let mut c2 = ClockProcess::start(init.1 as u64, r2.get(0)?, rng);
    let mut path = Vec::with_capacity(steps + 1);
    path.push(init);
    for _ in 0..steps {
        if c1.next_event <= c2.next_event {
            let r = r1.get(c1.count as usize + 1)?;
            c1.fire(r, rng);
        } else {
            let r = r2.get(c2.count as usize + 1)?;
            c2.fire(r, rng);
        }
        path.push((init.0 + c1.count as u32, init.1 + c2.count as u32));
    }
    Ok(RaceResult::from_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lead_changes_skip_ties() {
        let r = RaceResult::from_path(vec![(1, 1), (2, 1), (2, 2), (2, 3), (3, 3), (4, 3)]);
        assert_eq!(r.tie_visits, 2);
        assert_eq!(r.lead_changes, 2);
        assert_eq!(r.encode(), 0b11001);
    }

    #[test]
    fn rejects_zero_start() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let mut rng = crate::rng::derive_stream(0, 0, "race");
        assert!(race(&f, (0, 1), 5, &mut rng).is_err());
    }
}
