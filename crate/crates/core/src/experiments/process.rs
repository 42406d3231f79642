//! Suites driven by the point processes and the branching embedding.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{fraction, CtbpTrajectoryRow, ExperimentConfig, Provenance, RunSummary, SummaryRow, Trajectories};
use crate::attachment::{AttachmentFunction, Phi2Tail, PhiTable};
use crate::ctbp::{hub_index_continuous, run_ctbp, CtbpOptions, StopRule};
use crate::error::{Error, Result};
use crate::graphsim::{grow, leader_of, GrowOptions};
use crate::malthusian::solve_lambda_star;
use crate::pointproc::{martingale_path, mdp_rate_check, tail_bound_check};
use crate::rng::ReplicateSeed;
use crate::stats::{correlation, histogram, mean_var, total_variation, tv_noise_floor, wilson_interval, Z99};
use crate::TriState;

const MAX_TABLE_HORIZON: usize = 1 << 26;

/// A table on which `K^-1(y)` is defined, with room above it for the
/// fluctuations of `xi`.
fn table_reaching_k(fun: &AttachmentFunction, y: f64) -> Result<PhiTable> {
    let mut h = 1 << 12;
    loop {
        let table = PhiTable::build(fun, h)?;
        if table.k_inverse(y).is_some() {
            return PhiTable::build(fun, 2 * h);
        }
        if let Phi2Tail::Finite { value, .. } = table.phi2_tail() {
            if value < y {
                return Err(Error::Regime(format!("K stays below {value} < {y}: Phi_2(inf) is finite")));
            }
        }
        if h >= MAX_TABLE_HORIZON {
            return Err(Error::Range { what: format!("K does not reach {y}"), needed_horizon: 2 * h });
        }
        h *= 2;
    }
}

/// Variance and a normal-theory 95% interval for it.
fn var_with_ci(x: &[f64]) -> (f64, (f64, f64)) {
    let (mean, var) = mean_var(x);
    let n = x.len() as f64;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let se = ((m4 - var * var).max(0.0) / n).sqrt();
    (var, (var - crate::stats::Z95 * se, var + crate::stats::Z95 * se))
}

/// Samples `B^(n)(t) = (M_A1(K^-1(n t)) - M_A2(K^-1(n t))) / sqrt(2n)` and
/// checks its mean, variance and the correlation of disjoint increments.
/// Verdicts are given at the largest `n`; the largest `t` plays `t = 1`.
pub fn run_race_fclt(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.check()?;
    let th = &cfg.thresholds;
    let fun = cfg.model.function()?;
    let (a1, a2) = cfg.race_start;
    let mut ts = cfg.t_values.clone();
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup();
    let t_top = *ts.last().unwrap();
    let event_cap = cfg.max_events.map_or(usize::MAX, |c| c as usize);
    let mut rows = Vec::new();
    let n_last = *cfg.n_values.last().unwrap();
    for &n in &cfg.n_values {
        let table = table_reaching_k(&fun, n as f64 * t_top)?;
        let times: Vec<f64> = ts.iter().map(|&t| table.k_inverse(n as f64 * t).expect("table reaches K^-1")).collect();
        let s_end = *times.last().unwrap();
        let scale = (2.0 * n as f64).sqrt();
        let paths: Vec<Vec<f64>> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let seed = ReplicateSeed::new(cfg.master_seed, r);
                let m1 = martingale_path(&fun, &table, a1, s_end, &times, &mut seed.stream(&format!("fclt.n{n}.a1")), event_cap)?;
                let m2 = martingale_path(&fun, &table, a2, s_end, &times, &mut seed.stream(&format!("fclt.n{n}.a2")), event_cap)?;
                Ok(m1.samples.iter().zip(&m2.samples).map(|(x, y)| (x.1 - y.1) / scale).collect())
            })
            .collect::<Result<_>>()?;
        let column = |j: usize| -> Vec<f64> { paths.iter().map(|p| p[j]).collect() };
        let judged = n == n_last;
        let mut vars = Vec::new();
        for (j, &t) in ts.iter().enumerate() {
            let b = column(j);
            let (var, ci) = var_with_ci(&b);
            vars.push(var);
            let row = SummaryRow::info(format!("var_b[n={n},t={t}]"), var).ci(ci).predicted(t);
            rows.push(if judged && t == t_top {
                let (lo, hi) = (th.fclt_var_lo * t, th.fclt_var_hi * t);
                row.judged((lo..=hi).contains(&var), format!("in [{lo}, {hi}]"))
            } else {
                row
            });
        }
        let top = column(ts.len() - 1);
        let (mean, var) = mean_var(&top);
        let sigma = (var / top.len() as f64).sqrt();
        let row = SummaryRow::info(format!("mean_b[n={n},t={t_top}]"), mean)
            .ci((mean - 3.0 * sigma, mean + 3.0 * sigma))
            .predicted(0.0);
        let k = th.fclt_mean_sigmas;
        rows.push(if judged { row.judged(mean.abs() <= k * sigma, format!("within {k} sigma of 0")) } else { row });
        if let Some(h) = ts.iter().position(|&t| t == t_top / 2.0) {
            let r = vars[h] / vars[ts.len() - 1];
            let row = SummaryRow::info(format!("var_ratio_half[n={n}]"), r).predicted(0.5);
            let (lo, hi) = (th.fclt_half_ratio_lo, th.fclt_half_ratio_hi);
            rows.push(if judged { row.judged((lo..=hi).contains(&r), format!("in [{lo}, {hi}]")) } else { row });
        }
        // disjoint increments over consecutive grid intervals, starting from B(0) = 0
        let mut prev = vec![0.0; paths.len()];
        let mut incs = Vec::new();
        for j in 0..ts.len() {
            let cur = column(j);
            incs.push(cur.iter().zip(&prev).map(|(c, p)| c - p).collect::<Vec<f64>>());
            prev = cur;
        }
        for j in 1..incs.len() {
            let rho = correlation(&incs[j - 1], &incs[j]);
            let lo = if j >= 2 { ts[j - 2] } else { 0.0 };
            let row = SummaryRow::info(format!("increment_corr[n={n},({lo},{}),({},{})]", ts[j - 1], ts[j - 1], ts[j]), rho)
                .predicted(0.0);
            let c = th.fclt_max_corr;
            rows.push(if judged { row.judged(rho.abs() < c, format!("|rho| < {c}")) } else { row });
        }
    }
    if let Some(spec) = &cfg.control {
        let cf = spec.function()?;
        let persistent = PhiTable::build(&cf, 1 << 16)?.phi2_tail().is_finite() == TriState::True;
        rows.push(
            SummaryRow::info("control.flagged_persistent", f64::from(u8::from(persistent)))
                .judged(persistent, "K stays bounded for the control, so B^(n) is undefined"),
        );
    }
    Ok(RunSummary { provenance: Provenance::of(cfg), rows, trajectories: Trajectories::None })
}

/// A table whose `Phi_1` covers `t + x K(t)` with room to spare.
fn table_for_tail(fun: &AttachmentFunction, x: f64, t: f64) -> Result<PhiTable> {
    let first = PhiTable::covering(fun, 2.0 * t)?;
    let far = t + x * first.k_of(t)?;
    if far <= t {
        return Ok(first);
    }
    PhiTable::covering(fun, 2.0 * far)
}

/// Empirical `P(M(s) > x K(t))` with its Wilson 99% upper limit against the
/// analytic bound, for the `(x, t, s)` triples zipped from the config.
pub fn run_tail_bounds(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.check()?;
    let fun = cfg.model.function()?;
    let mut rows = Vec::new();
    let triples: Vec<(f64, f64, f64)> =
        cfg.x_values.iter().zip(&cfg.t_values).zip(&cfg.s_values).map(|((&x, &t), &s)| (x, t, s)).collect();
    for &(x, t, s) in &triples {
        let table = table_for_tail(&fun, x, t)?;
        let c = tail_bound_check(&fun, &table, x, t, s, cfg.reps, cfg.master_seed, None)?;
        let (lo, hi) = wilson_interval(c.exceedances, c.reps, Z99);
        rows.push(
            SummaryRow::info(format!("tail_prob[x={x},t={t},s={s}]"), c.empirical)
                .ci((lo, hi))
                .predicted(c.analytic)
                .judged(c.wilson_upper <= c.analytic, "Wilson 99% upper limit <= analytic bound"),
        );
    }
    // The check has power: a small deviation level is hit far more often
    // than the bound at the first triple's level allows.
    let (x1, t1, s1) = triples[0];
    let x0 = 0.1 * x1;
    let table = table_for_tail(&fun, x1, t1)?;
    let reps = cfg.control_reps().min(cfg.reps);
    let small = tail_bound_check(&fun, &table, x0, t1, s1, reps, cfg.master_seed ^ 0x5eed, None)?;
    let bound = tail_bound_check(&fun, &table, x1, t1, s1, 1, cfg.master_seed, None)?.analytic;
    let (lo, hi) = wilson_interval(small.exceedances, small.reps, Z99);
    rows.push(
        SummaryRow::info(format!("control.tail_prob[x={x0},t={t1},s={s1}]"), small.empirical)
            .ci((lo, hi))
            .predicted(bound)
            .judged(lo > bound, format!("Wilson 99% lower limit must exceed the bound at x={x1}")),
    );
    Ok(RunSummary { provenance: Provenance::of(cfg), rows, trajectories: Trajectories::None })
}

/// Exact `log P(S_1(n) <= Phi_1(n) - x Phi_2(n))` over `-x^2 Phi_2(n) / 2`
/// across `n`: the ratio should move monotonically toward 1.
pub fn run_mdp_rates(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.check()?;
    let th = &cfg.thresholds;
    let fun = cfg.model.function()?;
    let x = cfg.x_values[0];
    let n_max = *cfg.n_values.last().unwrap() as usize;
    let table = PhiTable::build(&fun, (n_max + 1).max(1 << 12))?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for &n in &cfg.n_values {
        let c = mdp_rate_check(&fun, &table, n as usize, x)?;
        let r = c.ratio.unwrap_or(f64::NAN);
        ratios.push(r);
        rows.push(SummaryRow::info(format!("exact_logprob[n={n},x={x}]"), c.exact_logprob).predicted(c.predicted));
        rows.push(SummaryRow::info(format!("ratio[n={n},x={x}]"), r).predicted(1.0));
    }
    let toward = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    rows.push(
        SummaryRow::info("ratio.trend_toward_one", f64::from(u8::from(toward)))
            .judged(toward, "|ratio - 1| strictly decreasing in n"),
    );
    let last = *ratios.last().unwrap();
    rows.push(
        SummaryRow::info("ratio.final", last).predicted(1.0).judged(
            (th.mdp_ratio_lo..=th.mdp_ratio_hi).contains(&last),
            format!("in [{}, {}]", th.mdp_ratio_lo, th.mdp_ratio_hi),
        ),
    );
    let zero = mdp_rate_check(&fun, &table, n_max, 0.0)?;
    rows.push(
        SummaryRow::info("control.zero_deviation_ratio", zero.ratio.unwrap_or(f64::NAN))
            .judged(zero.ratio.is_none(), "ratio not applicable at x = 0"),
    );
    if let Some(spec) = &cfg.control {
        let cf = spec.function()?;
        let ct = PhiTable::build(&cf, (n_max + 1).max(1 << 12))?;
        let rejected = matches!(mdp_rate_check(&cf, &ct, n_max, x), Err(Error::Regime(_)));
        rows.push(
            SummaryRow::info("control.flagged_regime", f64::from(u8::from(rejected)))
                .judged(rejected, "control outside the Phi_2(inf) = inf regime must be rejected"),
        );
    }
    Ok(RunSummary { provenance: Provenance::of(cfg), rows, trajectories: Trajectories::None })
}

/// `(root degree, d_max, hub index)` of one tree.
type TreeTriple = (u32, u32, u64);

fn grown_triples(cfg: &ExperimentConfig, fun: &AttachmentFunction, n: u64, reps: u64, base: u64) -> Result<Vec<TreeTriple>> {
    cfg.vertex_budget(n)?;
    let opts = GrowOptions { phi_table: None, max_edges: cfg.max_events, keep_degrees: false };
    let seq = crate::sequence::AttachmentSequence::Constant { m: 1 };
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let rec = grow(fun, &seq, n, &[n], ReplicateSeed::new(cfg.master_seed, base + r), &opts)?;
            let c = &rec.checkpoints[0];
            Ok((c.root_degree, c.d_max, c.leader_index))
        })
        .collect()
}

fn tv_of<K: Ord + Clone>(a: &[K], b: &[K]) -> (f64, f64) {
    let ha = histogram(a.iter().cloned());
    let hb = histogram(b.iter().cloned());
    let total = (a.len() + b.len()) as f64;
    let mut pooled: BTreeMap<K, f64> = BTreeMap::new();
    for (k, c) in ha.iter().chain(hb.iter()) {
        *pooled.entry(k.clone()).or_insert(0.0) += *c as f64 / total;
    }
    (total_variation(&ha, &hb), tv_noise_floor(&pooled, a.len() as u64, b.len() as u64))
}

/// Discrete growth against the branching process stopped at `T_n`: total
/// variation between the laws of `(root degree, d_max)` and of
/// `(root degree, d_max, I*)`.
pub fn run_embedding_equivalence(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.check()?;
    let fun = cfg.model.function()?;
    let lambda = solve_lambda_star(&fun, 1e-10)?.lambda_star;
    let tv_max = cfg.thresholds.embedding_tv_max;
    let n_max = *cfg.n_values.last().unwrap();
    cfg.vertex_budget(n_max)?;
    let table = PhiTable::build(&fun, (n_max as usize + 1).max(16))?;
    let opts = CtbpOptions { max_size: cfg.max_vertices.map_or(CtbpOptions::default().max_size, |v| v as usize) };
    let mut rows = Vec::new();
    let mut traj = Vec::new();
    let mut last_ctbp = Vec::new();
    for &n in &cfg.n_values {
        let grown = grown_triples(cfg, &fun, n, cfg.reps, 0)?;
        let sampled: Vec<(TreeTriple, CtbpTrajectoryRow, bool)> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let bp = run_ctbp(&fun, StopRule::Size { n: n as usize }, ReplicateSeed::new(cfg.master_seed, r), &opts)?;
                let d = bp.tree_degrees(bp.end_time);
                let leader = leader_of(&d);
                let hub = hub_index_continuous(&bp, bp.end_time);
                let children = bp.child_counts(bp.end_time);
                let max_children = children.iter().copied().max().unwrap_or(0);
                let row = CtbpTrajectoryRow {
                    replicate: r,
                    t_or_n: n as f64,
                    size: bp.births.len() as u64,
                    d_max_n_degree: table.at(1, max_children as usize)?,
                    hub_birth_time: hub.birth_time,
                    w_sample: (-lambda * bp.end_time).exp() * bp.births.len() as f64,
                };
                Ok(((d[0], d[leader], leader as u64), row, hub.individual == leader))
            })
            .collect::<Result<_>>()?;
        let ctbp: Vec<TreeTriple> = sampled.iter().map(|s| s.0).collect();
        let matches = sampled.iter().filter(|s| s.2).count() as u64;
        traj.extend(sampled.into_iter().map(|s| s.1));
        let pair = |v: &[TreeTriple]| -> Vec<(u32, u32)> { v.iter().map(|t| (t.0, t.1)).collect() };
        let (tv2, floor2) = tv_of(&pair(&grown), &pair(&ctbp));
        let (tv3, floor3) = tv_of(&grown, &ctbp);
        rows.push(
            SummaryRow::info(format!("tv_root_dmax[n={n}]"), tv2).predicted(floor2).judged(tv2 < tv_max, format!("< {tv_max}")),
        );
        rows.push(
            SummaryRow::info(format!("tv_root_dmax_index[n={n}]"), tv3)
                .predicted(floor3)
                .judged(tv3 < tv_max, format!("< {tv_max}")),
        );
        rows.push(
            SummaryRow::info(format!("ctbp.hub_matches_leader[n={n}]"), fraction(matches, cfg.reps))
                .predicted(1.0)
                .judged(matches == cfg.reps, "all replicates"),
        );
        if n == n_max {
            last_ctbp = ctbp;
        }
    }
    if let Some(spec) = &cfg.control {
        let cf = spec.function()?;
        let other = grown_triples(cfg, &cf, n_max, cfg.control_reps(), 1 << 32)?;
        let pair = |v: &[TreeTriple]| -> Vec<(u32, u32)> { v.iter().map(|t| (t.0, t.1)).collect() };
        let (tv, _) = tv_of(&pair(&other), &pair(&last_ctbp));
        rows.push(
            SummaryRow::info(format!("control.flip.tv_root_dmax[n={n_max}]"), tv)
                .judged(tv >= tv_max, format!("growth under the control f must differ by >= {tv_max}")),
        );
    }
    Ok(RunSummary { provenance: Provenance::of(cfg), rows, trajectories: Trajectories::Ctbp(traj) })
}
