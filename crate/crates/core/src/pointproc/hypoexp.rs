use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// What to do when rates (nearly) coincide and the partial-fraction
/// formula becomes singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicatePolicy {
    /// Require distinct rates; duplicates are a domain error.
    ExactDistinct,
    /// Spread near-equal rates by factors `1 + k * 1e-9`.
    Perturb,
    /// Numerical convolution on a grid of `2^16` steps.
    ConvolveGrid,
}

/// Law of `sum_i E_i / rate_i` for independent unit exponentials `E_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypoexpSpec {
    pub rates: Vec<f64>,
    pub duplicate_policy: DuplicatePolicy,
}

impl HypoexpSpec {
    pub fn new(rates: Vec<f64>, duplicate_policy: DuplicatePolicy) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Domain(format!("hypoexponential rates must be positive, got {r}")));
        }
        Ok(Self { rates, duplicate_policy })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypoexpValue {
    pub p: f64,
    /// Method that produced `p`.
    pub method: DuplicatePolicy,
    /// True when the closed form lost precision and the grid was used instead.
    pub fell_back: bool,
    /// True when all rates were equal and the Poisson identity was used.
    pub poisson_identity: bool,
}

const NEAR_EQUAL: f64 = 1e-8;
const PERTURB_STEP: f64 = 1e-9;
const GRID_STEPS: usize = 1 << 16;
const CANCELLATION_LIMIT: f64 = 1e-9;

/// `P(S <= t)` for `S` hypoexponential with the given rates.
pub fn hypoexp_cdf(spec: &HypoexpSpec, t: f64) -> Result<HypoexpValue> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be >= 0, got {t}")));
    }
    let value = |p, method, fell_back, poisson_identity| HypoexpValue { p, method, fell_back, poisson_identity };
    let rates = &spec.rates;
    if rates.is_empty() {
        return Ok(value(1.0, spec.duplicate_policy, false, false));
    }
    if t == 0.0 {
        return Ok(value(0.0, spec.duplicate_policy, false, false));
    }
    if rates.iter().all(|&r| r == rates[0]) && rates.len() > 1 {
        return Ok(value(erlang_cdf(rates.len(), rates[0] * t), spec.duplicate_policy, false, true));
    }
    let mut sorted = rates.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let has_near = sorted.windows(2).any(|w| (w[1] - w[0]) <= NEAR_EQUAL * w[1]);
    match spec.duplicate_policy {
        DuplicatePolicy::ConvolveGrid => {
            return Ok(value(convolve_grid(&sorted, t), DuplicatePolicy::ConvolveGrid, false, false))
        }
        DuplicatePolicy::ExactDistinct if has_near => {
            return Err(Error::Domain("rates are not distinct; use the perturb or grid policy".into()))
        }
        DuplicatePolicy::Perturb if has_near => perturb(&mut sorted),
        _ => {}
    }
    match partial_fractions(&sorted, t) {
        Some(p) => Ok(value(p, spec.duplicate_policy, false, false)),
        None => Ok(value(convolve_grid(&sorted, t), DuplicatePolicy::ConvolveGrid, true, false)),
    }
}

/// Separates runs of near-equal sorted rates by distinct relative factors.
fn perturb(sorted: &mut [f64]) {
    let mut run = 0u32;
    for i in 1..sorted.len() {
        if (sorted[i] - sorted[i - 1] / (1.0 + run as f64 * PERTURB_STEP)) <= NEAR_EQUAL * sorted[i] {
            run += 1;
            sorted[i] *= 1.0 + run as f64 * PERTURB_STEP;
        } else {
            run = 0;
        }
    }
}

/// `1 - sum_i C_i exp(-r_i t)` with `C_i = prod_{j != i} r_j / (r_j - r_i)`.
/// `None` when the terms are too large for the result to carry `1e-9`
/// absolute accuracy, or the result leaves `[0, 1]`.
fn partial_fractions(sorted: &[f64], t: f64) -> Option<f64> {
    let n = sorted.len();
    let mut sum = CompensatedSum::new();
    sum.add(1.0);
    let mut abs_total = 1.0;
    for i in 0..n {
        let mut c = 1.0;
        for j in 0..n {
            if j != i {
                c *= sorted[j] / (sorted[j] - sorted[i]);
            }
        }
        let term = c * (-sorted[i] * t).exp();
        if !term.is_finite() {
            return None;
        }
        abs_total += term.abs();
        sum.add(-term);
    }
    let p = sum.value();
    if abs_total * n as f64 * f64::EPSILON > CANCELLATION_LIMIT || !(-CANCELLATION_LIMIT..=1.0 + CANCELLATION_LIMIT).contains(&p)
    {
        return None;
    }
    Some(p.clamp(0.0, 1.0))
}

/// `P(Gamma(n, 1) <= x) = P(Poisson(x) >= n)`.
fn erlang_cdf(n: usize, x: f64) -> f64 {
    // Poisson pmf computed in log space to survive large x
    let log_pmf = |k: usize| -x + k as f64 * x.ln() - ln_factorial(k);
    if x < n as f64 {
        // upper tail sum_{k >= n}, terms decreasing from k = n
        let mut s = CompensatedSum::new();
        let mut k = n;
        let mut term = log_pmf(k).exp();
        while term > 0.0 && (term > 1e-18 * s.value() || k == n) {
            s.add(term);
            k += 1;
            term *= x / k as f64;
        }
        s.value().min(1.0)
    } else {
        let s: CompensatedSum = (0..n).map(|k| log_pmf(k).exp()).collect();
        (1.0 - s.value()).max(0.0)
    }
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Stage-by-stage convolution on `t_m = m t / 2^16`. Each stage's CDF is
/// piecewise linear between grid points and the exponential kernel is
/// integrated exactly against it:
/// `F_k(t_{m+1}) = e^{-x} F_k(t_m) + a F_{k-1}(t_m) + b F_{k-1}(t_{m+1})`
/// with `x = r h`, `b = 1 - (1 - e^{-x}) / x`, `a = (1 - e^{-x}) / x - e^{-x}`.
fn convolve_grid(rates: &[f64], t: f64) -> f64 {
    let h = t / GRID_STEPS as f64;
    let mut prev = vec![1.0f64; GRID_STEPS + 1];
    let mut cur = vec![0.0f64; GRID_STEPS + 1];
    for &r in rates {
        let x = r * h;
        let one_minus = -(-x).exp_m1();
        let decay = 1.0 - one_minus;
        let q = if x < 1e-5 { 1.0 - x / 2.0 + x * x / 6.0 } else { one_minus / x };
        let b = 1.0 - q;
        let a = q - decay;
        cur[0] = 0.0;
        for m in 0..GRID_STEPS {
            cur[m + 1] = decay * cur[m] + a * prev[m] + b * prev[m + 1];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[GRID_STEPS].clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(rates: &[f64], p: DuplicatePolicy) -> HypoexpSpec {
        HypoexpSpec::new(rates.to_vec(), p).unwrap()
    }

    #[test]
    fn equal_unit_rates_use_poisson() {
        let v = hypoexp_cdf(&spec(&[1.0, 1.0], DuplicatePolicy::Perturb), 1.0).unwrap();
        assert!(v.poisson_identity);
        assert!((v.p - (1.0 - 2.0 * (-1f64).exp())).abs() < 1e-15);
        let g = hypoexp_cdf(&spec(&[1.0, 1.0], DuplicatePolicy::ConvolveGrid), 1.0).unwrap();
        assert!((g.p - (1.0 - 2.0 * (-1f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn two_distinct_rates() {
        let want = 1.0 - 2.0 * (-1f64).exp() + (-2f64).exp();
        let v = hypoexp_cdf(&spec(&[1.0, 2.0], DuplicatePolicy::ExactDistinct), 1.0).unwrap();
        assert!((v.p - want).abs() < 1e-15, "{v:?}");
        let g = hypoexp_cdf(&spec(&[2.0, 1.0], DuplicatePolicy::ConvolveGrid), 1.0).unwrap();
        assert!((g.p - want).abs() < 1e-9, "{g:?}");
    }

    #[test]
    fn zero_time_is_zero() {
        assert_eq!(hypoexp_cdf(&spec(&[1.0, 3.0], DuplicatePolicy::Perturb), 0.0).unwrap().p, 0.0);
    }

    #[test]
    fn exact_policy_rejects_duplicates() {
        assert!(hypoexp_cdf(&spec(&[1.0, 1.0, 2.0], DuplicatePolicy::ExactDistinct), 1.0).is_err());
    }

    #[test]
    fn perturbed_duplicates_fall_back_when_ill_conditioned() {
        let v = hypoexp_cdf(&spec(&[1.0, 1.0, 2.0], DuplicatePolicy::Perturb), 1.0).unwrap();
        assert!(v.fell_back);
        // Gamma(2, 1) + Exp(2): density 2(t-1)e^{-t} + 2e^{-2t}
        let exact = 1.0 - (-2f64).exp() - 2.0 * (-1f64).exp();
        assert!((v.p - exact).abs() < 1e-8, "{} vs {exact}", v.p);
    }
}
