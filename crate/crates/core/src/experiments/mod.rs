//! Monte Carlo suites that set simulated statistics against the predicted
//! constants and emit one verdict row per metric.
//!
//! Every suite also runs a control model from the opposite regime (or an
//! input where the prediction does not apply) and reports whether the
//! primary test flips on it, so that a threshold cannot pass vacuously.

mod graph;
mod process;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::attachment::{AttachmentFunction, AttachmentKind};
use crate::error::{Error, Result};
use crate::rng::GENERATOR_ID;
use crate::sequence::AttachmentSequence;

pub use graph::{
    matched_zipf_cap, run_iid_tails, run_index_asymptotics, run_persistence_scan, run_slowvar, run_tree_maxdeg, run_uniform_tree,
};
pub use process::{run_embedding_equivalence, run_mdp_rates, run_race_fclt, run_tail_bounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    PersistenceScan,
    RaceFclt,
    IidTails,
    Slowvar,
    TreeMaxdeg,
    IndexAsymptotics,
    UniformTree,
    TailBounds,
    MdpRates,
    EmbeddingEquivalence,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 10] = [
        ExperimentName::PersistenceScan,
        ExperimentName::RaceFclt,
        ExperimentName::IidTails,
        ExperimentName::Slowvar,
        ExperimentName::TreeMaxdeg,
        ExperimentName::IndexAsymptotics,
        ExperimentName::UniformTree,
        ExperimentName::TailBounds,
        ExperimentName::MdpRates,
        ExperimentName::EmbeddingEquivalence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::PersistenceScan => "persistence_scan",
            ExperimentName::RaceFclt => "race_fclt",
            ExperimentName::IidTails => "iid_tails",
            ExperimentName::Slowvar => "slowvar",
            ExperimentName::TreeMaxdeg => "tree_maxdeg",
            ExperimentName::IndexAsymptotics => "index_asymptotics",
            ExperimentName::UniformTree => "uniform_tree",
            ExperimentName::TailBounds => "tail_bounds",
            ExperimentName::MdpRates => "mdp_rates",
            ExperimentName::EmbeddingEquivalence => "embedding_equivalence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s)
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An attachment function and sequence, as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub f: AttachmentKind,
    #[serde(default = "one_edge")]
    pub m: AttachmentSequence,
    /// Declared monotonicity, checked on a prefix.
    #[serde(default)]
    pub monotone: Option<bool>,
    /// Declared `C_f` with `f(k) <= C_f (k + 1)`.
    #[serde(default)]
    pub linear_bound: Option<f64>,
}

fn one_edge() -> AttachmentSequence {
    AttachmentSequence::Constant { m: 1 }
}

impl ModelSpec {
    pub fn new(f: AttachmentKind, m: AttachmentSequence) -> Self {
        Self { f, m, monotone: None, linear_bound: None }
    }

    pub fn function(&self) -> Result<AttachmentFunction> {
        let mut fun = AttachmentFunction::new(self.f.clone())?;
        if let Some(mono) = self.monotone {
            fun = fun.declare_monotone(mono)?;
        }
        if let Some(c) = self.linear_bound {
            fun = fun.with_linear_bound(c)?;
        }
        Ok(fun)
    }
}

/// Pass/fail cut-offs. The defaults are the pinned acceptance values;
/// `calibrate` reports how a pilot run sits against them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub version: u32,
    /// Largest leader-change fraction accepted as persistent.
    pub persistent_max_fraction: f64,
    /// Smallest leader-change fraction accepted as non-persistent.
    pub nonpersistent_min_fraction: f64,
    /// Smallest accepted ratio of non-persistent to persistent fractions.
    pub dichotomy_ratio: f64,
    pub fclt_var_lo: f64,
    pub fclt_var_hi: f64,
    pub fclt_half_ratio_lo: f64,
    pub fclt_half_ratio_hi: f64,
    pub fclt_max_corr: f64,
    pub fclt_mean_sigmas: f64,
    /// Relative window around the index and max-degree limits.
    pub index_rel_window: f64,
    pub uniform_dmax_rel: f64,
    pub uniform_index_lo: f64,
    pub uniform_index_hi: f64,
    pub iid_light_max_fraction: f64,
    pub iid_heavy_min_fraction: f64,
    pub slowvar_max_fraction: f64,
    pub slowvar_contrast: f64,
    pub maxdeg_rel: f64,
    pub mdp_ratio_lo: f64,
    pub mdp_ratio_hi: f64,
    pub embedding_tv_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            version: 1,
            persistent_max_fraction: 0.15,
            nonpersistent_min_fraction: 0.5,
            dichotomy_ratio: 5.0,
            fclt_var_lo: 0.85,
            fclt_var_hi: 1.15,
            fclt_half_ratio_lo: 0.4,
            fclt_half_ratio_hi: 0.6,
            fclt_max_corr: 0.1,
            fclt_mean_sigmas: 3.0,
            index_rel_window: 0.5,
            uniform_dmax_rel: 0.15,
            uniform_index_lo: 0.15,
            uniform_index_hi: 0.45,
            iid_light_max_fraction: 0.2,
            iid_heavy_min_fraction: 0.5,
            slowvar_max_fraction: 0.2,
            slowvar_contrast: 3.0,
            maxdeg_rel: 0.10,
            mdp_ratio_lo: 0.6,
            mdp_ratio_hi: 1.4,
            embedding_tv_max: 0.02,
        }
    }
}

/// One experiment run: the model, a control model, scales and seeds.
///
/// Scale lists mean different things per suite: checkpoint sizes for the
/// graph suites, FCLT sizes `n` and times for `race_fclt`, `(x, t, s)`
/// triples zipped from the three lists for `tail_bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub model: ModelSpec,
    #[serde(default)]
    pub control: Option<ModelSpec>,
    pub reps: u64,
    #[serde(default)]
    pub control_reps: Option<u64>,
    pub master_seed: u64,
    #[serde(default)]
    pub n_values: Vec<u64>,
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default)]
    pub x_values: Vec<f64>,
    #[serde(default)]
    pub s_values: Vec<f64>,
    /// Starting degrees `(A1, A2)` of the FCLT martingales.
    #[serde(default)]
    pub race_start: (u64, u64),
    /// Cap on vertices per replicate.
    #[serde(default)]
    pub max_vertices: Option<u64>,
    /// Cap on events (edges, births, clock rings) per replicate.
    #[serde(default)]
    pub max_events: Option<u64>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn affine(alpha: f64) -> AttachmentKind {
    AttachmentKind::Affine { alpha }
}

fn power(alpha: f64) -> AttachmentKind {
    AttachmentKind::Power { alpha }
}

fn constant_one() -> AttachmentKind {
    AttachmentKind::Constant { c: 1.0 }
}

impl ExperimentConfig {
    /// The full-scale setting of each suite.
    pub fn default_for(name: ExperimentName) -> Self {
        use crate::sequence::MDistribution;
        let m1 = one_edge();
        let base = |model: ModelSpec, control: Option<ModelSpec>, reps: u64| ExperimentConfig {
            name,
            model,
            control,
            reps,
            control_reps: None,
            master_seed: 20_240_601,
            n_values: Vec::new(),
            t_values: Vec::new(),
            x_values: Vec::new(),
            s_values: Vec::new(),
            race_start: (0, 0),
            max_vertices: None,
            max_events: None,
            thresholds: Thresholds::default(),
        };
        match name {
            ExperimentName::PersistenceScan => ExperimentConfig {
                n_values: vec![10_000, 100_000, 1_000_000],
                ..base(ModelSpec::new(power(0.3), m1.clone()), Some(ModelSpec::new(affine(1.0), m1)), 200)
            },
            ExperimentName::RaceFclt => ExperimentConfig {
                n_values: vec![50, 200],
                t_values: vec![0.25, 0.5, 1.0],
                ..base(ModelSpec::new(power(0.3), m1.clone()), Some(ModelSpec::new(power(0.8), m1)), 10_000)
            },
            ExperimentName::IidTails => ExperimentConfig {
                n_values: vec![10_000, 100_000],
                ..base(
                    ModelSpec::new(power(0.8), AttachmentSequence::Iid { dist: MDistribution::Geometric { p: 0.5 } }),
                    Some(ModelSpec::new(
                        power(0.8),
                        AttachmentSequence::Iid { dist: MDistribution::Zipf { s: 2.5, cap: 1_000_000 } },
                    )),
                    200,
                )
            },
            ExperimentName::Slowvar => ExperimentConfig {
                n_values: vec![10_000, 100_000],
                ..base(
                    ModelSpec::new(power(0.7), AttachmentSequence::LogPower { nu: 2.0 }),
                    Some(ModelSpec::new(
                        power(0.7),
                        AttachmentSequence::Iid { dist: MDistribution::Zipf { s: 1.5, cap: 1_000 } },
                    )),
                    50,
                )
            },
            ExperimentName::TreeMaxdeg => ExperimentConfig {
                n_values: vec![1_000, 10_000, 100_000],
                ..base(ModelSpec::new(affine(1.0), m1.clone()), Some(ModelSpec::new(constant_one(), m1)), 200)
            },
            ExperimentName::IndexAsymptotics => ExperimentConfig {
                n_values: vec![10_000, 100_000, 1_000_000],
                control_reps: Some(20),
                ..base(ModelSpec::new(power(0.3), m1.clone()), Some(ModelSpec::new(constant_one(), m1)), 200)
            },
            ExperimentName::UniformTree => ExperimentConfig {
                n_values: vec![10_000, 1_000_000],
                control_reps: Some(20),
                ..base(ModelSpec::new(constant_one(), m1.clone()), Some(ModelSpec::new(affine(1.0), m1)), 200)
            },
            ExperimentName::TailBounds => ExperimentConfig {
                x_values: vec![0.5, 1.0, 1.0],
                t_values: vec![50.0, 50.0, 50.0],
                s_values: vec![50.0, 50.0, 25.0],
                ..base(ModelSpec::new(power(0.3), m1), None, 100_000)
            },
            ExperimentName::MdpRates => ExperimentConfig {
                n_values: vec![50, 100, 200],
                x_values: vec![0.5],
                ..base(ModelSpec::new(power(0.3), m1.clone()), Some(ModelSpec::new(power(0.8), m1)), 1)
            },
            ExperimentName::EmbeddingEquivalence => ExperimentConfig {
                n_values: vec![10, 50],
                ..base(ModelSpec::new(power(0.3), m1.clone()), Some(ModelSpec::new(affine(1.0), m1)), 100_000)
            },
        }
    }

    /// Every violated rule, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.reps < 1 {
            errs.push("reps must be >= 1".to_string());
        }
        if self.control_reps == Some(0) {
            errs.push("control_reps must be >= 1".to_string());
        }
        for (what, spec) in
            std::iter::once(("model", Some(&self.model))).chain(std::iter::once(("control", self.control.as_ref())))
        {
            let Some(spec) = spec else { continue };
            if let Err(e) = spec.function() {
                errs.push(format!("{what}.f: {e}"));
            }
            if let Err(e) = spec.m.validate() {
                errs.push(format!("{what}.m: {e}"));
            }
        }
        if self.n_values.contains(&0) {
            errs.push("n_values must be positive".into());
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("n_values must be strictly increasing".into());
        }
        for (what, v) in [("t_values", &self.t_values), ("s_values", &self.s_values)] {
            if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                errs.push(format!("{what} must be positive and finite"));
            }
        }
        if self.x_values.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            errs.push("x_values must be >= 0 and finite".into());
        }
        let m_is_one = matches!(self.model.m, AttachmentSequence::Constant { m: 1 });
        let need = |errs: &mut Vec<String>, ok: bool, msg: &str| {
            if !ok {
                errs.push(msg.to_string());
            }
        };
        let needs_n = |errs: &mut Vec<String>, k: usize| {
            if self.n_values.len() < k {
                errs.push(format!("{} needs at least {k} n_values", self.name));
            }
        };
        match self.name {
            ExperimentName::UniformTree => {
                need(&mut errs, self.model.f == constant_one(), "f must be constant 1 for uniform_tree");
                need(&mut errs, m_is_one, "m must be constant 1 for uniform_tree");
                needs_n(&mut errs, 2);
            }
            ExperimentName::PersistenceScan | ExperimentName::IidTails | ExperimentName::Slowvar => {
                needs_n(&mut errs, 2);
                if self.name == ExperimentName::Slowvar {
                    need(&mut errs, matches!(self.model.m, AttachmentSequence::LogPower { .. }), "slowvar needs m = log_power");
                }
            }
            ExperimentName::TreeMaxdeg => {
                need(&mut errs, m_is_one, "m must be constant 1 for tree_maxdeg");
                needs_n(&mut errs, 1);
            }
            ExperimentName::IndexAsymptotics => {
                need(&mut errs, m_is_one, "m must be constant 1 for index_asymptotics");
                needs_n(&mut errs, 2);
                if let Ok(f) = self.model.function() {
                    need(&mut errs, f.as_constant().is_none(), "index_asymptotics needs a non-constant f (use uniform_tree)");
                }
            }
            ExperimentName::RaceFclt => {
                needs_n(&mut errs, 1);
                need(&mut errs, !self.t_values.is_empty(), "race_fclt needs t_values");
            }
            ExperimentName::TailBounds => {
                need(
                    &mut errs,
                    !self.x_values.is_empty()
                        && self.x_values.len() == self.t_values.len()
                        && self.t_values.len() == self.s_values.len(),
                    "tail_bounds needs x_values, t_values and s_values of equal non-zero length",
                );
                for (t, s) in self.t_values.iter().zip(&self.s_values) {
                    if s > t {
                        errs.push(format!("tail_bounds needs s <= t, got s={s}, t={t}"));
                    }
                }
            }
            ExperimentName::MdpRates => {
                needs_n(&mut errs, 1);
                need(&mut errs, self.x_values.len() == 1, "mdp_rates needs exactly one x value");
            }
            ExperimentName::EmbeddingEquivalence => {
                need(&mut errs, m_is_one, "m must be constant 1 for embedding_equivalence");
                needs_n(&mut errs, 1);
            }
        }
        errs
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::rng::sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    fn control_reps(&self) -> u64 {
        self.control_reps.unwrap_or(self.reps)
    }

    /// Resource error when a replicate would need more than `max_vertices`.
    fn vertex_budget(&self, n_max: u64) -> Result<()> {
        match self.max_vertices {
            Some(cap) if n_max + 1 > cap => {
                Err(Error::Resource(format!("{} vertices requested, max_vertices is {cap}", n_max + 1)))
            }
            _ => Ok(()),
        }
    }

    fn check(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported without a pass/fail rule.
    Info,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub estimate: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub predicted: Option<f64>,
    pub verdict: Verdict,
    /// The rule behind the verdict.
    pub tolerance: String,
}

impl SummaryRow {
    fn info(metric: impl Into<String>, estimate: f64) -> Self {
        Self {
            metric: metric.into(),
            estimate,
            ci_lo: None,
            ci_hi: None,
            predicted: None,
            verdict: Verdict::Info,
            tolerance: String::new(),
        }
    }

    fn ci(mut self, (lo, hi): (f64, f64)) -> Self {
        self.ci_lo = Some(lo);
        self.ci_hi = Some(hi);
        self
    }

    fn predicted(mut self, p: f64) -> Self {
        self.predicted = Some(p);
        self
    }

    fn judged(mut self, ok: bool, tolerance: impl Into<String>) -> Self {
        self.verdict = Verdict::from_bool(ok);
        self.tolerance = tolerance.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub experiment: ExperimentName,
    pub config_hash: String,
    pub master_seed: u64,
    pub code_version: String,
    pub generator: String,
}

impl Provenance {
    fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.name,
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR_ID.to_string(),
        }
    }
}

/// A row of `trajectories.csv` for the graph suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphTrajectoryRow {
    pub replicate: u64,
    pub n: u64,
    pub k: u64,
    pub d_max: u32,
    pub leader_index: u64,
    pub leader_changes: u64,
    pub phi1_dmax: Option<f64>,
}

/// A row of `trajectories.csv` for branching-process runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtbpTrajectoryRow {
    pub replicate: u64,
    /// Stopping size `n` (or time `t`, see `by_time`).
    pub t_or_n: f64,
    pub size: u64,
    pub d_max_n_degree: f64,
    pub hub_birth_time: f64,
    pub w_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Trajectories {
    None,
    Graph(Vec<GraphTrajectoryRow>),
    Ctbp(Vec<CtbpTrajectoryRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub provenance: Provenance,
    pub rows: Vec<SummaryRow>,
    pub trajectories: Trajectories,
}

impl RunSummary {
    /// No row failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn row(&self, metric: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }
}

/// Runs the suite named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.check()?;
    match cfg.name {
        ExperimentName::PersistenceScan => run_persistence_scan(cfg),
        ExperimentName::RaceFclt => run_race_fclt(cfg),
        ExperimentName::IidTails => run_iid_tails(cfg),
        ExperimentName::Slowvar => run_slowvar(cfg),
        ExperimentName::TreeMaxdeg => run_tree_maxdeg(cfg),
        ExperimentName::IndexAsymptotics => run_index_asymptotics(cfg),
        ExperimentName::UniformTree => run_uniform_tree(cfg),
        ExperimentName::TailBounds => run_tail_bounds(cfg),
        ExperimentName::MdpRates => run_mdp_rates(cfg),
        ExperimentName::EmbeddingEquivalence => run_embedding_equivalence(cfg),
    }
}

/// Replicates in a calibration pilot.
pub const PILOT_REPS: u64 = 20;

/// Pilot estimates next to the thresholds they are judged by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub version: u32,
    pub experiment: ExperimentName,
    pub pilot_reps: u64,
    pub config_hash: String,
    pub thresholds: Thresholds,
    pub pilot: Vec<SummaryRow>,
}

/// Runs a 20-replicate pilot of `cfg` and records it with the thresholds.
pub fn calibrate(cfg: &ExperimentConfig) -> Result<CalibrationFile> {
    let mut pilot_cfg = cfg.clone();
    pilot_cfg.reps = cfg.reps.min(PILOT_REPS);
    pilot_cfg.control_reps = Some(cfg.control_reps().min(PILOT_REPS));
    let summary = run_experiment(&pilot_cfg)?;
    Ok(CalibrationFile {
        version: cfg.thresholds.version,
        experiment: cfg.name,
        pilot_reps: pilot_cfg.reps,
        config_hash: cfg.hash(),
        thresholds: cfg.thresholds.clone(),
        pilot: summary.rows,
    })
}

fn wilson95(successes: u64, n: u64) -> (f64, f64) {
    crate::stats::wilson_interval(successes, n, crate::stats::Z95)
}

fn fraction(successes: u64, n: u64) -> f64 {
    successes as f64 / n as f64
}

/// Distribution-free 95% interval for the median from order statistics.
fn median_ci(values: &[f64]) -> (f64, f64) {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let half = crate::stats::Z95 * n.sqrt() / 2.0;
    let lo = ((n / 2.0 - half).floor().max(0.0)) as usize;
    let hi = ((n / 2.0 + half).ceil() as usize).min(v.len() - 1);
    (v[lo], v[hi])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in ExperimentName::ALL {
            assert_eq!(ExperimentName::parse(n.as_str()), Some(n));
        }
    }

    #[test]
    fn defaults_validate() {
        for n in ExperimentName::ALL {
            let cfg = ExperimentConfig::default_for(n);
            assert!(cfg.validate().is_empty(), "{n}: {:?}", cfg.validate());
        }
    }

    #[test]
    fn uniform_tree_rejects_other_f() {
        let mut cfg = ExperimentConfig::default_for(ExperimentName::UniformTree);
        cfg.model.f = AttachmentKind::Power { alpha: 0.3 };
        let errs = cfg.validate();
        assert!(errs.iter().any(|e| e == "f must be constant 1 for uniform_tree"), "{errs:?}");
    }

    #[test]
    fn all_errors_are_collected() {
        let mut cfg = ExperimentConfig::default_for(ExperimentName::UniformTree);
        cfg.model.f = AttachmentKind::Power { alpha: -0.1 };
        cfg.reps = 0;
        let errs = cfg.validate();
        assert!(errs.len() >= 3, "{errs:?}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default_for(ExperimentName::MdpRates);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.master_seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn median_ci_brackets_median() {
        let v: Vec<f64> = (0..101).map(f64::from).collect();
        let (lo, hi) = median_ci(&v);
        assert!(lo < 50.0 && hi > 50.0 && lo > 30.0 && hi < 70.0);
    }
}
