use crate::attachment::{AttachmentFunction, PhiTable};
use crate::error::{Error, Result};

/// Solution of the forward equations of `N(t) = Phi_1(xi(t))` on the
/// states `Phi_1(0), ..., Phi_1(cap - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSolution {
    pub t_end: f64,
    /// `Phi_1(n)` for `n < cap`.
    pub states: Vec<f64>,
    /// `P(xi(t_end) = n)` for `n < cap`.
    pub p: Vec<f64>,
    /// `P(xi(t_end) >= cap)`.
    pub tail_mass: f64,
    /// `max_{v, step} p_v f(v) / f(0)`; at most one when `p_v <= f(0) / f(v)` holds throughout.
    pub max_bound_ratio: f64,
    pub steps: usize,
}

impl ForwardSolution {
    /// `P(xi(t_end) >= n)`.
    pub fn survival(&self, n: usize) -> f64 {
        self.tail_mass + self.p.iter().skip(n).sum::<f64>()
    }
}

const TAIL_LIMIT: f64 = 1e-10;
const MAX_CAP: usize = 1 << 22;

/// Integrates `p_0' = -f(0) p_0`, `p_v' = f(v-1) p_{v-1} - f(v) p_v` with
/// classical RK4 and step `min(dt, 0.1 / max rate)`. Mass that leaves the
/// last state is collected in `tail_mass`, which must end below `1e-10`.
pub fn forward_equations(
    fun: &AttachmentFunction,
    table: &PhiTable,
    t_end: f64,
    state_cap: usize,
    dt: f64,
) -> Result<ForwardSolution> {
    if !(t_end >= 0.0) || !(dt > 0.0) || state_cap < 1 {
        return Err(Error::Domain(format!("need t_end >= 0, dt > 0, cap >= 1 (got {t_end}, {dt}, {state_cap})")));
    }
    let rates = rates_up_to(fun, state_cap)?;
    let sol = integrate(&rates, t_end, dt);
    if sol.tail_mass >= TAIL_LIMIT {
        let mut cap = state_cap * 2;
        while cap <= MAX_CAP {
            let r = rates_up_to(fun, cap)?;
            if integrate(&r, t_end, dt).tail_mass < TAIL_LIMIT {
                break;
            }
            cap *= 2;
        }
        return Err(Error::Range {
            what: format!("forward equations leave tail mass {:e} beyond state {state_cap} at t = {t_end}", sol.tail_mass),
            needed_horizon: cap,
        });
    }
    let states = (0..state_cap).map(|n| table.at(1, n)).collect::<Result<Vec<_>>>()?;
    let total: f64 = sol.p.iter().sum::<f64>();
    if !(1.0 - 1e-8..=1.0 + 1e-12).contains(&total) {
        return Err(Error::Numeric(format!("forward equations lost mass: sum p = {total}")));
    }
    Ok(ForwardSolution { t_end, states, p: sol.p, tail_mass: sol.tail_mass, max_bound_ratio: sol.max_ratio, steps: sol.steps })
}

fn rates_up_to(fun: &AttachmentFunction, cap: usize) -> Result<Vec<f64>> {
    (0..cap as u64)
        .map(|n| {
            let v = fun.eval_f(n)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::Model(format!("f({n}) = {v} is not positive")))
            }
        })
        .collect()
}

struct Raw {
    p: Vec<f64>,
    tail_mass: f64,
    max_ratio: f64,
    steps: usize,
}

fn integrate(rates: &[f64], t_end: f64, dt: f64) -> Raw {
    let cap = rates.len();
    let max_rate = rates.iter().copied().fold(0.0, f64::max);
    let dt_eff = dt.min(0.1 / max_rate);
    let steps = if t_end == 0.0 { 0 } else { (t_end / dt_eff).ceil() as usize };
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    // state vector: p_0..p_{cap-1}, then the absorbing tail
    let mut y = vec![0.0; cap + 1];
    y[0] = 1.0;
    let deriv = |y: &[f64], out: &mut [f64]| {
        out[0] = -rates[0] * y[0];
        for v in 1..cap {
            out[v] = rates[v - 1] * y[v - 1] - rates[v] * y[v];
        }
        out[cap] = rates[cap - 1] * y[cap - 1];
    };
    let mut k1 = vec![0.0; cap + 1];
    let mut k2 = vec![0.0; cap + 1];
    let mut k3 = vec![0.0; cap + 1];
    let mut k4 = vec![0.0; cap + 1];
    let mut tmp = vec![0.0; cap + 1];
    let bound_ratio = |y: &[f64]| (0..cap).map(|v| y[v] * rates[v] / rates[0]).fold(0.0, f64::max);
    let mut max_ratio = bound_ratio(&y);
    for _ in 0..steps {
        deriv(&y, &mut k1);
        for i in 0..=cap {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        deriv(&tmp, &mut k2);
        for i in 0..=cap {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        deriv(&tmp, &mut k3);
        for i in 0..=cap {
            tmp[i] = y[i] + h * k3[i];
        }
        deriv(&tmp, &mut k4);
        for i in 0..=cap {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        max_ratio = max_ratio.max(bound_ratio(&y));
    }
    let tail_mass = y.pop().unwrap().max(0.0);
    Raw { p: y, tail_mass, max_ratio, steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_rates_match_poisson() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let table = PhiTable::build(&f, 64).unwrap();
        let sol = forward_equations(&f, &table, 1.0, 40, 0.01).unwrap();
        assert!((sol.p[0] - (-1f64).exp()).abs() < 1e-10);
        let mut pmf = (-1f64).exp();
        for n in 0..40 {
            assert!((sol.p[n] - pmf).abs() < 1e-8, "n = {n}");
            pmf /= (n + 1) as f64;
        }
        assert!(sol.max_bound_ratio <= 1.0);
    }

    #[test]
    fn tail_breach_names_a_larger_cap() {
        let f = AttachmentFunction::constant(1.0).unwrap();
        let table = PhiTable::build(&f, 64).unwrap();
        match forward_equations(&f, &table, 10.0, 10, 0.01) {
            Err(Error::Range { needed_horizon, .. }) => assert!((40..=80).contains(&needed_horizon)),
            other => panic!("{other:?}"),
        }
    }
}
