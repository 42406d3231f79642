//! Laplace transform of the offspring intensity, the Malthusian rate, and
//! numerical checks of the regularity assumptions on `K`.
//!
//! Offspring intensities are those of a non-root individual of the tree,
//! whose degree already counts the edge to its parent. Its birth rates are
//! `f(1), f(2), ...`, so every series below runs over `g(i) = f(i + 1)`.
//! For `f(k) = k + alpha` this gives `lambda* = 2 + alpha`; for constant `f`
//! the shift changes nothing.

use serde::{Deserialize, Serialize};

use crate::attachment::{AttachmentFunction, Phi2Tail, PhiTable};
use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_max, CompensatedSum};
use crate::TriState;

/// Degree offset of a non-root individual's offspring process.
pub const OFFSPRING_OFFSET: u64 = 1;

const MAX_TERMS: usize = 1 << 24;
const FIRST_CHECK: usize = 16;

/// A value of `rho_hat(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoHat {
    /// Partial sum plus tail estimate; `f64::INFINITY` when divergent.
    pub value: f64,
    /// Bound on the error left by truncation (heuristic past the ratio test).
    pub tail_bound: f64,
    /// Number of terms summed.
    pub terms: usize,
    pub divergent: bool,
}

impl RhoHat {
    fn divergent(terms: usize) -> Self {
        Self { value: f64::INFINITY, tail_bound: f64::INFINITY, terms, divergent: true }
    }
}

/// `rho_hat(lambda) = sum_{k>=1} prod_{i<k} g(i) / (lambda + g(i))` with
/// `g(i) = f(i + OFFSPRING_OFFSET)`.
///
/// Terms are summed until the tail estimate settles below `tol`. Polynomially
/// decaying terms get a power-law tail correction fitted at each doubling of
/// `k`; a fitted exponent at or below one marks the series divergent.
pub fn rho_hat(fun: &AttachmentFunction, lambda: f64, tol: f64) -> Result<RhoHat> {
    rho_hat_with_offset(fun, OFFSPRING_OFFSET, lambda, tol, None)
}

/// As [`rho_hat_with_offset`] with the default term cap.
pub fn rho_hat_with_offset(
    fun: &AttachmentFunction,
    offset: u64,
    lambda: f64,
    tol: f64,
    stop_above: Option<f64>,
) -> Result<RhoHat> {
    rho_hat_capped(fun, offset, lambda, tol, stop_above, MAX_TERMS)
}

/// As [`rho_hat`] with an explicit offset and term cap. With
/// `stop_above = Some(c)` the summation returns as soon as the partial sum
/// exceeds `c`. A series still undecided at the cap returns its last
/// extrapolated value (or, failing that, the partial sum with an infinite
/// tail bound) and is not marked divergent.
pub fn rho_hat_capped(
    fun: &AttachmentFunction,
    offset: u64,
    lambda: f64,
    tol: f64,
    stop_above: Option<f64>,
    max_terms: usize,
) -> Result<RhoHat> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("rho_hat needs lambda > 0, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(c) = fun.as_constant() {
        return Ok(RhoHat { value: c / lambda, tail_bound: 0.0, terms: 0, divergent: false });
    }
    let mut sum = CompensatedSum::new();
    let mut term = 1.0;
    let mut prev_check_term = f64::NAN;
    let mut prev_estimate = f64::NAN;
    let mut prev_extrapolated = f64::NAN;
    let mut last_good: Option<(f64, f64)> = None;
    let mut r_max = 0.0f64;
    let mut prev_r_max = 0.0f64;
    let mut below_one = 0;
    let mut prev_p = f64::NAN;
    let mut next_check = FIRST_CHECK;
    for k in 1..=max_terms {
        let g = fun.eval_f(offset + k as u64 - 1)?;
        if !(g > 0.0) {
            return Err(Error::Model(format!("f({}) = {g} is not positive", offset + k as u64 - 1)));
        }
        let factor = g / (lambda + g);
        term *= factor;
        r_max = r_max.max(factor);
        sum.add(term);
        if let Some(c) = stop_above {
            if sum.value() > c {
                return Ok(RhoHat { value: sum.value(), tail_bound: f64::INFINITY, terms: k, divergent: false });
            }
        }
        if term == 0.0 {
            return Ok(RhoHat { value: sum.value(), tail_bound: 0.0, terms: k, divergent: false });
        }
        if k < next_check {
            continue;
        }
        // ratio-test bound from the largest factor over the last stretch
        let geometric = if r_max < 1.0 { term * r_max / (1.0 - r_max) } else { f64::INFINITY };
        if prev_check_term.is_nan() {
            prev_check_term = term;
            next_check *= 2;
            prev_r_max = r_max;
            r_max = 0.0;
            continue;
        }
        let p = (prev_check_term / term).log2();
        let kf = k as f64;
        let power = if p > 1.0 { term * (kf / (p - 1.0) - 0.5 + p / (12.0 * kf)) } else { f64::INFINITY };
        if geometric < tol * 1e-3 && power.min(geometric) < tol * 1e-3 {
            return Ok(RhoHat { value: sum.value(), tail_bound: geometric.min(power), terms: k, divergent: false });
        }
        if p > 1.0 {
            below_one = 0;
            // the fitted tail leaves an error of order k^-p, which one
            // Richardson step across the doubling removes
            let estimate = sum.value() + power;
            let extrapolated =
                if prev_estimate.is_nan() { estimate } else { estimate + (estimate - prev_estimate) / (p.exp2() - 1.0) };
            let change = (extrapolated - prev_extrapolated).abs();
            if change < tol {
                return Ok(RhoHat {
                    value: extrapolated,
                    tail_bound: change.max(f64::EPSILON * extrapolated),
                    terms: k,
                    divergent: false,
                });
            }
            prev_estimate = estimate;
            prev_extrapolated = extrapolated;
            last_good = Some((extrapolated, change));
        } else {
            prev_estimate = f64::NAN;
            prev_extrapolated = f64::NAN;
            // factors creeping towards one with a stable exponent: polynomial
            // decay k^-p with p <= 1. A growing exponent means stretched
            // exponential decay that has not kicked in yet.
            if k >= 1 << 12 && r_max > prev_r_max && !(p > 1.3 * prev_p) {
                below_one += 1;
                if below_one >= 2 {
                    return Ok(RhoHat::divergent(k));
                }
            }
        }
        prev_check_term = term;
        prev_p = p;
        next_check *= 2;
        prev_r_max = r_max;
        r_max = 0.0;
    }
    Ok(match last_good {
        Some((value, change)) => RhoHat { value, tail_bound: change, terms: max_terms, divergent: false },
        None => RhoHat { value: sum.value(), tail_bound: f64::INFINITY, terms: max_terms, divergent: false },
    })
}

/// Output of [`solve_lambda_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MalthusianResult {
    pub lambda_star: f64,
    pub bracket: (f64, f64),
    pub rho_at_bracket: (f64, f64),
    pub truncation_k: usize,
    pub tail_bound: f64,
}

const BRACKET_LO: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 60;

/// Whether `rho_hat(lambda) > 1`, with an early exit once a partial sum passes one.
fn exceeds_one(fun: &AttachmentFunction, lambda: f64, tol: f64) -> Result<(bool, RhoHat)> {
    let r = rho_hat_with_offset(fun, OFFSPRING_OFFSET, lambda, tol, Some(1.0))?;
    Ok((r.divergent || r.value > 1.0, r))
}

/// Bisection for `rho_hat(lambda*) = 1` on `[1e-6, lambda_hi]`, where
/// `lambda_hi` doubles from 1 until `rho_hat(lambda_hi) < 1`.
pub fn solve_lambda_star(fun: &AttachmentFunction, tol: f64) -> Result<MalthusianResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let rho_tol = (tol * 1e-1).max(1e-14);
    let (lo_above, _) = exceeds_one(fun, BRACKET_LO, rho_tol)?;
    if !lo_above {
        return Err(Error::Model(format!("no Malthusian rate under truncation: rho_hat({BRACKET_LO}) <= 1")));
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while exceeds_one(fun, hi, rho_tol)?.0 {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::Numeric(format!("rho_hat stays above 1 up to lambda = {hi}")));
        }
        hi *= 2.0;
    }
    let mut lo = if doublings == 0 { BRACKET_LO } else { hi / 2.0 };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exceeds_one(fun, mid, rho_tol)?.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_lo = rho_hat(fun, lo, rho_tol)?;
    let r_hi = rho_hat(fun, hi, rho_tol)?;
    if r_lo.divergent && r_hi.value < 1.0 {
        // rho_hat jumps from infinity straight below one: the limit at
        // underline lambda is not above one
        return Err(Error::Model(format!("no Malthusian rate: rho_hat is infinite below {lo} and {} at {hi}", r_hi.value)));
    }
    Ok(MalthusianResult {
        lambda_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        rho_at_bracket: (r_lo.value, r_hi.value),
        truncation_k: r_lo.terms.max(r_hi.terms),
        tail_bound: r_lo.tail_bound.max(r_hi.tail_bound),
    })
}

/// Points at which the `K` ratios are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionGrid {
    pub t_values: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl AssumptionGrid {
    pub const DELTAS: [f64; 5] = [0.5, 0.2, 0.1, 0.05, 0.01];

    /// Ten points per decade from `t_min` up to `t_max`.
    pub fn geometric(t_min: f64, t_max: f64) -> Self {
        let mut t_values = Vec::new();
        let step = 10f64.powf(0.1);
        let mut t = t_min;
        while t <= t_max * (1.0 + 1e-12) {
            t_values.push(t);
            t *= step;
        }
        Self { t_values, deltas: Self::DELTAS.to_vec() }
    }

    /// Grid covering what `table` can evaluate `K(3t)` at.
    pub fn for_table(table: &PhiTable) -> Self {
        let top = table.at(1, table.horizon()).unwrap_or(0.0) / 3.0;
        Self::geometric(1.0, top.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub delta: f64,
    pub t: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `Phi_2(inf) = inf`.
    pub c1: TriState,
    /// `K((1 + delta) t) / K(t)` over the grid.
    pub c2_estimate: Vec<RatioPoint>,
    pub c2: TriState,
    /// `max_t K(3t) / K(t)`.
    pub c3_estimate: Option<f64>,
    pub prop_under_lamb: TriState,
    /// `limsup f(i)/i` estimated on the top decade of the table.
    pub d_bar: f64,
    pub rho_at_d_bar: f64,
    /// Smallest probed `lambda` at which `rho_hat` still converges.
    pub underline_lambda: Option<f64>,
}

const C2_SLACK: f64 = 0.05;

/// Numerical evidence for C1, C2, C3 and the Malthusian-rate premise.
pub fn check_assumptions(fun: &AttachmentFunction, table: &PhiTable, grid: &AssumptionGrid) -> AssumptionReport {
    let c1 = match table.phi2_tail() {
        Phi2Tail::Finite { .. } => TriState::False,
        Phi2Tail::Infinite => TriState::True,
        Phi2Tail::Unknown => TriState::Unknown,
    };

    let mut c2_estimate = Vec::new();
    for &delta in &grid.deltas {
        for &t in &grid.t_values {
            if let (Ok(k0), Ok(k1)) = (table.k_of(t), table.k_of((1.0 + delta) * t)) {
                if k0 > 0.0 {
                    c2_estimate.push(RatioPoint { delta, t, ratio: k1 / k0 });
                }
            }
        }
    }
    let c2 = match grid.deltas.iter().copied().fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d)))) {
        None => TriState::Unknown,
        Some(d_min) => {
            let pts: Vec<&RatioPoint> = c2_estimate.iter().filter(|p| p.delta == d_min).collect();
            match pts.iter().map(|p| p.t).fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t)))) {
                None => TriState::Unknown,
                Some(t_top) => {
                    let worst = pts.iter().filter(|p| p.t >= t_top / 10.0).map(|p| p.ratio).fold(0.0, f64::max);
                    TriState::from(worst <= (1.0 + d_min) * (1.0 + C2_SLACK))
                }
            }
        }
    };

    let c3_estimate = grid
        .t_values
        .iter()
        .filter_map(|&t| match (table.k_of(t), table.k_of(3.0 * t)) {
            (Ok(k0), Ok(k3)) if k0 > 0.0 => Some(k3 / k0),
            _ => None,
        })
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));

    let l = table.horizon();
    let mut d_bar = 0.0f64;
    for i in (l / 10).max(1)..l {
        if let Ok(v) = fun.eval_f(i as u64) {
            d_bar = d_bar.max(v / i as f64);
        }
    }
    let rho_at_d_bar = if d_bar > 0.0 { rho_hat(fun, d_bar, 1e-10).map(|r| r.value).unwrap_or(f64::NAN) } else { f64::INFINITY };
    let prop_under_lamb = if rho_at_d_bar > 1.0 { TriState::True } else { TriState::Unknown };

    AssumptionReport {
        c1,
        c2_estimate,
        c2,
        c3_estimate,
        prop_under_lamb,
        d_bar,
        rho_at_d_bar,
        underline_lambda: underline_lambda(fun),
    }
}

/// Bisection on the convergence of the series between `1e-6` and `2^10`.
fn underline_lambda(fun: &AttachmentFunction) -> Option<f64> {
    let conv = |l: f64| rho_hat_capped(fun, OFFSPRING_OFFSET, l, 1e-8, None, 1 << 16).map(|r| !r.divergent).unwrap_or(false);
    if conv(BRACKET_LO) {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while !conv(hi) {
        hi *= 2.0;
        if hi > 1024.0 {
            return None;
        }
    }
    let mut lo = hi / 2.0;
    if hi == 1.0 {
        lo = BRACKET_LO;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if conv(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub n: u64,
    /// `(lambda*^2 / 2) K(log n / lambda*)`, the predicted `log I*_n`.
    pub pred_log_index: f64,
    /// `log n / lambda* + (lambda* / 2) K(log n / lambda*)`, the predicted `Phi_1(d_max(n))`.
    pub pred_phi1_dmax: f64,
    pub applicable: bool,
    pub note: Option<String>,
}

/// Predicted centres of `log I*_n` and `Phi_1(d_max(n))` in the regime `Phi_2(inf) = inf`.
pub fn predict_asymptotics(
    fun: &AttachmentFunction,
    table: &PhiTable,
    result: &MalthusianResult,
    n: u64,
) -> Result<AsymptoticPrediction> {
    if n < 2 {
        return Err(Error::Domain(format!("prediction needs n >= 2, got {n}")));
    }
    if let Phi2Tail::Finite { .. } = table.phi2_tail() {
        return Err(Error::Regime(
            "Phi_2(inf) < inf: persistent regime, the index and max-degree asymptotics do not apply".into(),
        ));
    }
    let lam = result.lambda_star;
    let s = (n as f64).ln() / lam;
    let k = table.k_of(s)?;
    let (applicable, note) = match fun.as_constant() {
        Some(_) => (false, Some("formula does not apply to constant f (uniform tree has its own constants)".to_string())),
        None => (true, None),
    };
    Ok(AsymptoticPrediction { n, pred_log_index: 0.5 * lam * lam * k, pred_phi1_dmax: s + 0.5 * lam * k, applicable, note })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformTreeConstants {
    pub u_hat: f64,
    pub max_slope: f64,
}

/// `w(theta) = theta - (1 + theta) log(1 + theta)`.
pub fn w(theta: f64) -> f64 {
    theta - (1.0 + theta) * theta.ln_1p()
}

/// Inverse of `w` on the branch `theta >= 0`, for `y <= 0`.
pub fn w_inverse(y: f64) -> f64 {
    if y >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while w(hi) > y {
        hi *= 2.0;
    }
    bisect(|t| w(t) - y, 0.0, hi, 1e-15 * hi)
}

/// `Psi(u) = (1 - u) (1 + w^-1(-u / (1 - u)))` on `[0, 1)`.
pub fn psi(u: f64) -> f64 {
    (1.0 - u) * (1.0 + w_inverse(-u / (1.0 - u)))
}

/// The maximizer of `Psi` and its maximum, by golden-section search.
pub fn uniform_tree_constants() -> UniformTreeConstants {
    let u_hat = golden_max(psi, 0.0, 0.99, 1e-12);
    UniformTreeConstants { u_hat, max_slope: psi(u_hat) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_for_unit_rates() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let r = rho_hat(&f, 2.0, 1e-14).unwrap();
        assert!((r.value - 0.5).abs() < 1e-13, "{r:?}");
    }

    #[test]
    fn linear_rates_hit_one_at_three() {
        let f = AttachmentFunction::affine(1.0).unwrap();
        let r = rho_hat(&f, 3.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn literal_series_without_offset() {
        // prod (i+1)/(lambda+i+1) sums to 1/(lambda-1)
        let f = AttachmentFunction::affine(1.0).unwrap();
        let r = rho_hat_with_offset(&f, 0, 3.0, 1e-12, None).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn divergence_is_a_value() {
        let f = AttachmentFunction::affine(1.0).unwrap();
        let r = rho_hat(&f, 0.5, 1e-10).unwrap();
        assert!(r.divergent && r.value.is_infinite());
    }

    #[test]
    fn lambda_star_for_unit_rates() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let m = solve_lambda_star(&f, 1e-12).unwrap();
        assert!((m.lambda_star - 1.0).abs() < 1e-10, "{m:?}");
    }

    #[test]
    fn lambda_star_affine() {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let f = AttachmentFunction::affine(alpha).unwrap();
            let m = solve_lambda_star(&f, 1e-10).unwrap();
            assert!((m.lambda_star - (2.0 + alpha)).abs() < 1e-8, "alpha {alpha}: {m:?}");
        }
    }

    #[test]
    fn lambda_star_sign_change_for_sublinear_power() {
        let f = AttachmentFunction::power(0.3).unwrap();
        let tol = 1e-10;
        let m = solve_lambda_star(&f, tol).unwrap();
        let below = rho_hat(&f, m.lambda_star - 10.0 * tol, 1e-13).unwrap().value;
        let above = rho_hat(&f, m.lambda_star + 10.0 * tol, 1e-13).unwrap().value;
        assert!(below > 1.0 && above < 1.0, "{below} {above}");
    }

    #[test]
    fn uniform_constants() {
        let c = uniform_tree_constants();
        let ln2 = std::f64::consts::LN_2;
        assert!((c.u_hat - (1.0 - 1.0 / (2.0 * ln2))).abs() < 1e-6, "{c:?}");
        assert!((c.max_slope - 1.0 / ln2).abs() < 1e-10, "{c:?}");
        assert_eq!(psi(0.0), 1.0);
        assert!(psi(c.u_hat - 1e-3) < c.max_slope && psi(c.u_hat + 1e-3) < c.max_slope);
    }

    #[test]
    fn unit_rates_assumptions() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let table = PhiTable::build(&f, 3000).unwrap();
        let rep = check_assumptions(&f, &table, &AssumptionGrid::for_table(&table));
        assert_eq!(rep.c1, TriState::True);
        assert_eq!(rep.c2, TriState::True);
        assert!((rep.c3_estimate.unwrap() - 3.0).abs() < 1e-9);
        for p in &rep.c2_estimate {
            assert!((p.ratio - (1.0 + p.delta)).abs() < 1e-9);
        }
    }

    #[test]
    fn power_assumptions() {
        let f = AttachmentFunction::power(0.3).unwrap();
        let table = PhiTable::build(&f, 1 << 22).unwrap();
        // the ratio approaches its limit from above, so probe the top decade
        let rep = check_assumptions(&f, &table, &AssumptionGrid::geometric(2e3, 2e4));
        assert_eq!(rep.c1, TriState::True);
        assert_eq!(rep.c2, TriState::True);
        let c3 = rep.c3_estimate.unwrap();
        assert!((c3 - 3f64.powf(4.0 / 7.0)).abs() < 0.05, "{c3}");
        assert!(rep.c2_estimate.iter().all(|p| p.ratio >= 1.0));

        let g = AttachmentFunction::power(0.8).unwrap();
        let t2 = PhiTable::build(&g, 10_000).unwrap();
        assert_eq!(check_assumptions(&g, &t2, &AssumptionGrid::for_table(&t2)).c1, TriState::False);
    }

    #[test]
    fn uniform_prediction_flagged() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let table = PhiTable::build(&f, 100).unwrap();
        let m = solve_lambda_star(&f, 1e-12).unwrap();
        let p = predict_asymptotics(&f, &table, &m, 22026).unwrap();
        assert!(!p.applicable);
        assert!((p.pred_log_index - 0.5 * 22026f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn persistent_regime_refuses_prediction() {
        let f = AttachmentFunction::power(0.8).unwrap();
        let table = PhiTable::build(&f, 1000).unwrap();
        let m = solve_lambda_star(&f, 1e-8).unwrap();
        assert!(matches!(predict_asymptotics(&f, &table, &m, 1000), Err(Error::Regime(_))));
    }
}
