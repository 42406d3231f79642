//! The TOML run configuration.
//!
//! ```toml
//! [experiment]            # experiment / calibrate; every key optional
//! name = "persistence_scan"
//! reps = 200
//! control_reps = 20
//! n_values = [10000, 100000, 1000000]
//! t_values = [0.25, 0.5, 1.0]
//! x_values = [0.5]
//! s_values = [50.0]
//! race_start = [0, 0]
//!
//! [model]                 # required except for `experiment` / `calibrate`
//! f = { kind = "power", alpha = 0.3 }   # constant{c} | affine{alpha} | power{alpha}
//!                                       # | table{values, tail} | composite{op, parts}
//! m = { kind = "constant", m = 1 }      # constant{m} | iid{dist} | log_power{nu}
//! monotone = true                       # optional declarations
//! linear_bound = 1.0
//!
//! [control]               # same keys as [model]
//!
//! [thresholds]            # any field of the acceptance thresholds
//!
//! [simulate]              # simulate-graph, simulate-ctbp, race, check-assumptions
//! reps = 1
//! n_max = 100000
//! checkpoints = [1000, 10000, 100000]
//! until = { size = 1000 }               # or { time = 8.0 }
//! race_init = [1, 1]
//! race_steps = 1000
//! horizon = 1048576
//! t_min = 10.0
//! t_max = 10000.0
//! tol = 1e-10
//!
//! [rng]
//! master_seed = 42
//!
//! [output]
//! dir = "out"
//!
//! [resources]
//! max_events = 100000000
//! max_vertices = 10000000
//! ```

use std::path::{Path, PathBuf};

use hubs_core::experiments::{ExperimentConfig, ExperimentName, ModelSpec, Thresholds};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

/// How `simulate-ctbp` stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Until {
    Time(f64),
    Size(u64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SimulateSection {
    pub reps: Option<u64>,
    pub n_max: Option<u64>,
    pub checkpoints: Option<Vec<u64>>,
    pub until: Option<Until>,
    pub race_init: Option<(u32, u32)>,
    pub race_steps: Option<u64>,
    pub horizon: Option<u64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ExperimentSection {
    pub name: Option<ExperimentName>,
    pub reps: Option<u64>,
    pub control_reps: Option<u64>,
    pub n_values: Option<Vec<u64>>,
    pub t_values: Option<Vec<f64>>,
    pub x_values: Option<Vec<f64>>,
    pub s_values: Option<Vec<f64>>,
    pub race_start: Option<(u64, u64)>,
}

/// A validated configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    pub model: Option<ModelSpec>,
    pub control: Option<ModelSpec>,
    pub thresholds: Option<Thresholds>,
    pub simulate: SimulateSection,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub max_events: Option<u64>,
    pub max_vertices: Option<u64>,
}

/// Why a configuration was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Missing(PathBuf),
    Unreadable(String),
    /// Every schema or consistency violation found.
    Invalid(Vec<String>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Missing(p) => write!(f, "config file {} does not exist", p.display()),
            ConfigError::Unreadable(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Invalid(errs) => {
                writeln!(f, "invalid config ({} error{}):", errs.len(), if errs.len() == 1 { "" } else { "s" })?;
                for e in errs {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

const TOP_KEYS: [&str; 9] = ["experiment", "model", "control", "thresholds", "simulate", "rng", "output", "resources", "version"];

/// Collects errors while pulling typed fields out of a table.
struct Reader<'e> {
    errs: &'e mut Vec<String>,
}

impl Reader<'_> {
    fn section<'t>(&mut self, root: &'t Table, key: &str) -> Option<&'t Table> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.errs.push(format!("[{key}] must be a table"));
                None
            }
        }
    }

    fn unknown(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        for k in table.keys() {
            if !allowed.contains(&k.as_str()) {
                self.errs.push(format!("unknown key `{k}` in [{path}]"));
            }
        }
    }

    fn field<T: DeserializeOwned>(&mut self, table: &Table, path: &str, key: &str) -> Option<T> {
        let v = table.get(key)?;
        match v.clone().try_into::<T>() {
            Ok(x) => Some(x),
            Err(e) => {
                self.errs.push(format!("{path}.{key}: {}", e.message().trim()));
                None
            }
        }
    }
}

fn model_spec(r: &mut Reader<'_>, root: &Table, key: &str) -> Option<ModelSpec> {
    let t = r.section(root, key)?;
    r.unknown(t, key, &["f", "m", "monotone", "linear_bound"]);
    let f = r.field(t, key, "f");
    if !t.contains_key("f") {
        r.errs.push(format!("{key}.f is required"));
    }
    let m = if t.contains_key("m") { r.field(t, key, "m") } else { Some(hubs_core::AttachmentSequence::Constant { m: 1 }) };
    let monotone = r.field(t, key, "monotone");
    let linear_bound = r.field(t, key, "linear_bound");
    let spec = ModelSpec { f: f?, m: m?, monotone, linear_bound };
    if let Err(e) = spec.function() {
        r.errs.push(format!("{key}.f: {e}"));
    }
    if let Err(e) = spec.m.validate() {
        r.errs.push(format!("{key}.m: {e}"));
    }
    Some(spec)
}

/// Parses TOML text, reporting every violation found.
fn syntax_error(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start].matches('\n').count() + 1;
            let near = text[span.clone()].trim();
            format!("line {line}: {} (`{near}`)", e.message().trim())
        }
        None => e.message().trim().to_string(),
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Table = text.parse::<Table>().map_err(|e| ConfigError::Invalid(vec![syntax_error(text, &e)]))?;
    let mut errs = Vec::new();
    let mut r = Reader { errs: &mut errs };
    r.unknown(&root, "root", &TOP_KEYS);
    let mut cfg = RunConfig::default();
    if let Some(t) = r.section(&root, "experiment") {
        r.unknown(
            t,
            "experiment",
            &["name", "reps", "control_reps", "n_values", "t_values", "x_values", "s_values", "race_start"],
        );
        cfg.experiment = ExperimentSection {
            name: r.field(t, "experiment", "name"),
            reps: r.field(t, "experiment", "reps"),
            control_reps: r.field(t, "experiment", "control_reps"),
            n_values: r.field(t, "experiment", "n_values"),
            t_values: r.field(t, "experiment", "t_values"),
            x_values: r.field(t, "experiment", "x_values"),
            s_values: r.field(t, "experiment", "s_values"),
            race_start: r.field(t, "experiment", "race_start"),
        };
    }
    cfg.model = model_spec(&mut r, &root, "model");
    cfg.control = model_spec(&mut r, &root, "control");
    if r.section(&root, "thresholds").is_some() {
        cfg.thresholds = r.field(&root, "root", "thresholds");
    }
    if let Some(t) = r.section(&root, "simulate") {
        r.unknown(
            t,
            "simulate",
            &["reps", "n_max", "checkpoints", "until", "race_init", "race_steps", "horizon", "t_min", "t_max", "tol"],
        );
        cfg.simulate = SimulateSection {
            reps: r.field(t, "simulate", "reps"),
            n_max: r.field(t, "simulate", "n_max"),
            checkpoints: r.field(t, "simulate", "checkpoints"),
            until: r.field(t, "simulate", "until"),
            race_init: r.field(t, "simulate", "race_init"),
            race_steps: r.field(t, "simulate", "race_steps"),
            horizon: r.field(t, "simulate", "horizon"),
            t_min: r.field(t, "simulate", "t_min"),
            t_max: r.field(t, "simulate", "t_max"),
            tol: r.field(t, "simulate", "tol"),
        };
    }
    if let Some(t) = r.section(&root, "rng") {
        r.unknown(t, "rng", &["master_seed"]);
        cfg.master_seed = r.field(t, "rng", "master_seed");
    }
    if let Some(t) = r.section(&root, "output") {
        r.unknown(t, "output", &["dir"]);
        cfg.output_dir = r.field::<String>(t, "output", "dir").map(PathBuf::from);
    }
    if let Some(t) = r.section(&root, "resources") {
        r.unknown(t, "resources", &["max_events", "max_vertices"]);
        cfg.max_events = r.field(t, "resources", "max_events");
        cfg.max_vertices = r.field(t, "resources", "max_vertices");
    }
    if let Some(v) = root.get("version") {
        if v.as_integer() != Some(1) {
            errs.push("version must be 1".into());
        }
    }
    simulate_rules(&cfg, &mut errs);
    if let Some(name) = cfg.experiment.name {
        let exp = cfg.experiment_config(name, None, None);
        errs.extend(exp.validate());
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        errs.dedup();
        Err(ConfigError::Invalid(errs))
    }
}

fn simulate_rules(cfg: &RunConfig, errs: &mut Vec<String>) {
    let s = &cfg.simulate;
    if s.reps == Some(0) {
        errs.push("simulate.reps must be >= 1".into());
    }
    if s.n_max == Some(0) {
        errs.push("simulate.n_max must be >= 1".into());
    }
    if let Some(cps) = &s.checkpoints {
        if cps.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("simulate.checkpoints must be strictly increasing".into());
        }
        if let (Some(&last), Some(n)) = (cps.last(), s.n_max) {
            if last > n {
                errs.push(format!("simulate.checkpoints go past n_max = {n}"));
            }
        }
    }
    if let Some(Until::Time(t)) = s.until {
        if !(t >= 0.0 && t.is_finite()) {
            errs.push("simulate.until.time must be >= 0".into());
        }
    }
    if let Some((a, b)) = s.race_init {
        if a < 1 || b < 1 {
            errs.push("simulate.race_init degrees must be >= 1".into());
        }
    }
    if let (Some(lo), Some(hi)) = (s.t_min, s.t_max) {
        if !(lo > 0.0 && hi > lo) {
            errs.push("simulate needs 0 < t_min < t_max".into());
        }
    }
    if let Some(tol) = s.tol {
        if !(tol > 0.0) {
            errs.push("simulate.tol must be > 0".into());
        }
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    if !path.exists() {
        return Err(ConfigError::Missing(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable(e.to_string()))?;
    parse_config_str(&text)
}

impl RunConfig {
    /// The suite's defaults, overridden by whatever the file and flags set.
    pub fn experiment_config(&self, name: ExperimentName, seed: Option<u64>, reps: Option<u64>) -> ExperimentConfig {
        let mut c = ExperimentConfig::default_for(name);
        let e = &self.experiment;
        if let Some(m) = &self.model {
            c.model = m.clone();
        }
        if self.control.is_some() {
            c.control = self.control.clone();
        }
        if let Some(t) = &self.thresholds {
            c.thresholds = t.clone();
        }
        if let Some(v) = e.reps {
            c.reps = v;
        }
        if e.control_reps.is_some() {
            c.control_reps = e.control_reps;
        }
        if let Some(v) = &e.n_values {
            c.n_values = v.clone();
        }
        if let Some(v) = &e.t_values {
            c.t_values = v.clone();
        }
        if let Some(v) = &e.x_values {
            c.x_values = v.clone();
        }
        if let Some(v) = &e.s_values {
            c.s_values = v.clone();
        }
        if let Some(v) = e.race_start {
            c.race_start = v;
        }
        if let Some(s) = self.master_seed {
            c.master_seed = s;
        }
        c.max_events = self.max_events;
        c.max_vertices = self.max_vertices;
        if let Some(s) = seed {
            c.master_seed = s;
        }
        if let Some(r) = reps {
            c.reps = r;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match parse_config_str(text) {
            Err(ConfigError::Invalid(e)) => e,
            other => panic!("expected errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config_str("[model]\nf = { kind = \"power\", alpha = 0.3 }\n[rng]\nmaster_seed = 7\n").unwrap();
        assert_eq!(cfg.master_seed, Some(7));
        assert_eq!(cfg.model.unwrap().f, hubs_core::AttachmentKind::Power { alpha: 0.3 });
    }

    #[test]
    fn uniform_tree_needs_constant_f() {
        let e = errors(
            "[experiment]\nname = \"uniform_tree\"\n[model]\nf = { kind = \"power\", alpha = 0.3 }\nm = { kind = \"constant\", m = 1 }\n",
        );
        assert!(e.iter().any(|x| x == "f must be constant 1 for uniform_tree"), "{e:?}");
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let e = errors("[model]\nf = { kind = \"power\", alpha = -0.1 }\n");
        assert!(e.iter().any(|x| x.starts_with("model.f")), "{e:?}");
    }

    #[test]
    fn duplicate_key_is_named() {
        let e = errors("[rng]\nmaster_seed = 1\nmaster_seed = 2\n");
        assert!(e[0].contains("master_seed"), "{e:?}");
    }

    #[test]
    fn every_error_is_reported() {
        let e = errors("bogus = 1\n[rng]\nmaster_seed = \"x\"\nextra = 2\n[simulate]\nreps = 0\n");
        assert!(e.len() >= 4, "{e:?}");
    }
}
