use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clock::ClockProcess;
use super::hypoexp::{hypoexp_cdf, DuplicatePolicy, HypoexpSpec};
use crate::attachment::{AttachmentFunction, Phi2Tail, PhiTable};
use crate::error::{Error, Result};
use crate::rng::derive_stream;
use crate::stats::{wilson_interval, Z99};
use crate::TriState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundCheck {
    pub x: f64,
    pub t: f64,
    pub s: f64,
    pub reps: u64,
    pub exceedances: u64,
    /// Empirical `P(M(s) > x K(t))`.
    pub empirical: f64,
    /// Wilson 99% upper confidence limit of `empirical`.
    pub wilson_upper: f64,
    /// `exp(-(x^2/2) K(t)^2 / (f_*^-2 + K(t + x K(t))))`.
    pub analytic: f64,
    /// `exp(-x^2 K(t) / (4D))`, when `(t', D)` were given and `(x, t)` are in its range.
    pub analytic_simplified: Option<f64>,
}

/// Monte Carlo check of the martingale tail bound for `M = M_0` at time `s`.
/// `c3` optionally supplies `(t', D)` with `K(3u) <= D K(u)` for `u >= t'`.
#[allow(clippy::too_many_arguments)]
pub fn tail_bound_check(
    fun: &AttachmentFunction,
    table: &PhiTable,
    x: f64,
    t: f64,
    s: f64,
    reps: u64,
    master_seed: u64,
    c3: Option<(f64, f64)>,
) -> Result<TailBoundCheck> {
    if !(x >= 0.0 && t >= 0.0 && (0.0..=t).contains(&s)) {
        return Err(Error::Domain(format!("need x >= 0 and 0 <= s <= t, got x={x}, t={t}, s={s}")));
    }
    let k_t = table.k_of(t)?;
    let f_star = fun.f_star();
    let analytic = if x == 0.0 {
        1.0
    } else {
        let k_far = table.k_of(t + x * k_t)?;
        (-(x * x / 2.0) * k_t * k_t / (f_star.powi(-2) + k_far)).exp()
    };
    let analytic_simplified = c3.and_then(|(t_prime, d)| {
        let t_min = t_prime.max(table.k_inverse(1.0 / (d * f_star * f_star))?);
        (t >= t_min && x <= 2.0 * t / k_t).then(|| (-(x * x) / (4.0 * d) * k_t).exp())
    });
    let threshold = x * k_t;
    let phi1 = table.column(1);
    let recip = table.recip();
    let horizon = table.horizon();
    let hits: Vec<bool> = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<bool> {
            let mut rng = derive_stream(master_seed, r, "pointproc.tail_bound");
            let mut clock = ClockProcess::start(0, 1.0 / recip[0], &mut rng);
            while clock.next_event <= s {
                let next = clock.count as usize + 1;
                if next >= horizon {
                    return Err(Error::Range { what: "xi passed the phi table".into(), needed_horizon: next + 1 });
                }
                clock.fire(1.0 / recip[next], &mut rng);
            }
            Ok(phi1[clock.count as usize] - s > threshold)
        })
        .collect::<Result<Vec<bool>>>()?;
    let exceedances = hits.iter().filter(|&&h| h).count() as u64;
    let (_, wilson_upper) = wilson_interval(exceedances, reps, Z99);
    Ok(TailBoundCheck {
        x,
        t,
        s,
        reps,
        exceedances,
        empirical: exceedances as f64 / reps as f64,
        wilson_upper,
        analytic,
        analytic_simplified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpCheck {
    pub n: usize,
    pub x: f64,
    /// `log P(S_1(n) <= Phi_1(n) - x Phi_2(n))`; `-inf` when the threshold is not positive.
    pub exact_logprob: f64,
    /// `-x^2 Phi_2(n) / 2`.
    pub predicted: f64,
    /// `exact_logprob / predicted`, `None` when `predicted = 0`.
    pub ratio: Option<f64>,
    pub method: DuplicatePolicy,
}

/// Exact lower moderate-deviation probability of `S_1(n)` against its
/// Gaussian-scale prediction.
pub fn mdp_rate_check(fun: &AttachmentFunction, table: &PhiTable, n: usize, x: f64) -> Result<MdpCheck> {
    if !(x >= 0.0) || n == 0 {
        return Err(Error::Domain(format!("need n >= 1 and x >= 0, got n={n}, x={x}")));
    }
    if let Phi2Tail::Finite { .. } = table.phi2_tail() {
        return Err(Error::Regime("moderate deviations are scaled by Phi_2(n), which stays bounded here".into()));
    }
    if fun.tends_to_infinity() == TriState::False {
        return Err(Error::Regime("moderate deviation scaling needs f(k) -> infinity".into()));
    }
    let phi1 = table.at(1, n)?;
    let phi2 = table.at(2, n)?;
    let predicted = -x * x * phi2 / 2.0;
    let threshold = phi1 - x * phi2;
    let ratio = |lp: f64| if predicted == 0.0 { None } else { Some(lp / predicted) };
    if threshold <= 0.0 {
        return Ok(MdpCheck {
            n,
            x,
            exact_logprob: f64::NEG_INFINITY,
            predicted,
            ratio: ratio(f64::NEG_INFINITY),
            method: DuplicatePolicy::Perturb,
        });
    }
    let rates = (0..n as u64).map(|i| fun.eval_f(i)).collect::<Result<Vec<_>>>()?;
    let v = hypoexp_cdf(&HypoexpSpec::new(rates, DuplicatePolicy::Perturb)?, threshold)?;
    let exact_logprob = v.p.ln();
    Ok(MdpCheck { n, x, exact_logprob, predicted, ratio: ratio(exact_logprob), method: v.method })
}
