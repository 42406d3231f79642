//! Attachment sequences `{m_n}`: how many edges vertex `v_n` brings.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of an i.i.d. `m_n` on `{1, 2, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum MDistribution {
    /// `P(m = j) = p (1 - p)^(j - 1)`.
    Geometric {
        p: f64,
    },
    /// `P(m = j) ∝ j^-s` on `1..=cap`.
    Zipf {
        s: f64,
        cap: u64,
    },
    PointMass {
        m: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttachmentSequence {
    Constant {
        m: u32,
    },
    Iid {
        dist: MDistribution,
    },
    /// `m_n = floor(1 + (log n)^nu)`.
    LogPower {
        nu: f64,
    },
}

impl AttachmentSequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            AttachmentSequence::Constant { m } | AttachmentSequence::Iid { dist: MDistribution::PointMass { m } } => {
                if *m < 1 {
                    return Err(Error::Domain("m must be >= 1".into()));
                }
            }
            AttachmentSequence::Iid { dist: MDistribution::Geometric { p } } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::Domain(format!("geometric p must lie in (0, 1], got {p}")));
                }
            }
            AttachmentSequence::Iid { dist: MDistribution::Zipf { s, cap } } => {
                if !(*s > 0.0) || *cap < 1 {
                    return Err(Error::Domain(format!("zipf needs s > 0 and cap >= 1, got s={s}, cap={cap}")));
                }
            }
            AttachmentSequence::LogPower { nu } => {
                if !(*nu >= 0.0 && nu.is_finite()) {
                    return Err(Error::Domain(format!("nu must be >= 0, got {nu}")));
                }
            }
        }
        Ok(())
    }

    /// Whether drawing `m_n` consumes randomness.
    pub fn is_random(&self) -> bool {
        matches!(self, AttachmentSequence::Iid { dist: MDistribution::Geometric { .. } | MDistribution::Zipf { .. } })
    }

    /// Sampler for `m_1, m_2, ...`.
    pub fn sampler(&self) -> Result<MSampler> {
        self.validate()?;
        Ok(match self {
            AttachmentSequence::Constant { m } | AttachmentSequence::Iid { dist: MDistribution::PointMass { m } } => {
                MSampler::Fixed(*m)
            }
            AttachmentSequence::Iid { dist: MDistribution::Geometric { p } } => {
                MSampler::Geometric(Geometric::new(*p).map_err(|e| Error::Domain(e.to_string()))?)
            }
            AttachmentSequence::Iid { dist: MDistribution::Zipf { s, cap } } => {
                MSampler::Zipf(Zipf::new(*cap as f64, *s).map_err(|e| Error::Domain(e.to_string()))?)
            }
            AttachmentSequence::LogPower { nu } => MSampler::LogPower(*nu),
        })
    }
}

/// Draws `m_n` for consecutive `n`.
#[derive(Debug, Clone)]
pub enum MSampler {
    Fixed(u32),
    Geometric(Geometric),
    Zipf(Zipf<f64>),
    LogPower(f64),
}

impl MSampler {
    /// `m_n` for `n >= 1`.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> u32 {
        match self {
            MSampler::Fixed(m) => *m,
            // rand_distr counts failures before the first success
            MSampler::Geometric(g) => (g.sample(rng) + 1).min(u32::MAX as u64) as u32,
            MSampler::Zipf(z) => z.sample(rng) as u32,
            MSampler::LogPower(nu) => log_power_m(n, *nu),
        }
    }
}

/// `floor(1 + (log n)^nu)`.
pub fn log_power_m(n: u64, nu: f64) -> u32 {
    (1.0 + (n as f64).ln().powf(nu)).floor() as u32
}

/// A realized prefix `m_1..m_n` with partial sums `s_n = m_1 + ... + m_n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealizedSequence {
    /// `s[n]` for `n = 0..`, with `s[0] = 0`.
    s: Vec<u64>,
}

impl RealizedSequence {
    pub fn new() -> Self {
        Self { s: vec![0] }
    }

    pub fn push(&mut self, m: u32) {
        let last = *self.s.last().unwrap();
        self.s.push(last + m as u64);
    }

    /// Number of realized terms.
    pub fn len(&self) -> usize {
        self.s.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m(&self, n: usize) -> u32 {
        (self.s[n] - self.s[n - 1]) as u32
    }

    pub fn s(&self, n: usize) -> u64 {
        self.s[n]
    }

    /// The unique `n` with `s_{n-1} <= k < s_n`: the vertex whose edges
    /// include edge number `k + 1`. `None` past the realized prefix.
    pub fn s_inverse(&self, k: u64) -> Option<usize> {
        let n = self.s.partition_point(|&v| v <= k);
        (n < self.s.len()).then_some(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn log_power_rule() {
        assert_eq!(log_power_m(1, 2.0), 1);
        assert_eq!(log_power_m(100, 2.0), (1.0 + 100f64.ln().powi(2)).floor() as u32);
        let ms: Vec<u32> = (1..2000).map(|n| log_power_m(n, 2.0)).collect();
        assert!(ms.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn s_inverse_matches_definition() {
        let mut r = RealizedSequence::new();
        for m in [1, 3, 2] {
            r.push(m);
        }
        // s = 0, 1, 4, 6
        let expect = [1, 2, 2, 2, 3, 3];
        for (k, &n) in expect.iter().enumerate() {
            assert_eq!(r.s_inverse(k as u64), Some(n));
        }
        assert_eq!(r.s_inverse(6), None);
    }

    #[test]
    fn geometric_m_has_mean_one_over_p() {
        let s = AttachmentSequence::Iid { dist: MDistribution::Geometric { p: 0.25 } }.sampler().unwrap();
        let mut rng = derive_stream(1, 0, "graph.sequence");
        let n = 200_000;
        let mean = (0..n).map(|i| s.draw(i + 1, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 4.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn zipf_stays_in_range() {
        let s = AttachmentSequence::Iid { dist: MDistribution::Zipf { s: 1.5, cap: 50 } }.sampler().unwrap();
        let mut rng = derive_stream(1, 0, "graph.sequence");
        assert!((0..10_000).all(|i| (1..=50).contains(&s.draw(i + 1, &mut rng))));
    }
}
