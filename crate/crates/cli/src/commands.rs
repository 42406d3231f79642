use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hubs_core::attachment::{AttachmentFunction, PhiTable};
use hubs_core::ctbp::{hub_index_continuous, run_ctbp, CtbpOptions, StopRule};
use hubs_core::experiments::{
    calibrate, run_experiment, CtbpTrajectoryRow, ExperimentConfig, ExperimentName, GraphTrajectoryRow,
};
use hubs_core::graphsim::{grow, race, GrowOptions};
use hubs_core::malthusian::{check_assumptions, solve_lambda_star, AssumptionGrid};
use hubs_core::output::{write_ctbp_trajectories, write_graph_trajectories, write_summary, write_trajectories};
use hubs_core::rng::{sha256_hex, ReplicateSeed, GENERATOR_ID};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_config, RunConfig, Until};
use crate::{Cli, Command, Failure};

const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_OUT: &str = "out";

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    config_hash: String,
    master_seed: u64,
    generator: &'a str,
    exponential_sampling: &'a str,
    code_version: &'a str,
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Other(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    seed: u64,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let cfg = match &cli.config {
            Some(p) => parse_config(p)?,
            None => RunConfig::default(),
        };
        let out = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let seed = cli.seed.or(cfg.master_seed).unwrap_or(DEFAULT_SEED);
        fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
        Ok(Self { cfg, out, seed })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn model(&self) -> Result<(AttachmentFunction, hubs_core::AttachmentSequence), Failure> {
        let spec =
            self.cfg.model.as_ref().ok_or_else(|| Failure::Config("this command needs a [model] section (--config)".into()))?;
        Ok((spec.function()?, spec.m.clone()))
    }

    fn write_metadata(&self, command: &str, hash_input: &impl Serialize) -> Result<(), Failure> {
        let json = serde_json::to_vec(hash_input).map_err(|e| Failure::Other(e.to_string()))?;
        let meta = Metadata {
            command,
            config_hash: sha256_hex(&json),
            master_seed: self.seed,
            generator: GENERATOR_ID,
            exponential_sampling: "inverse CDF, -ln U with U uniform on (0, 1] from the replicate stream",
            code_version: env!("CARGO_PKG_VERSION"),
        };
        let path = self.path("metadata.json");
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| Failure::Other(e.to_string()))?;
        w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_err(&path, e))
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let ctx = Ctx::new(cli)?;
    let body = || match &cli.command {
        Command::SimulateGraph => simulate_graph(&ctx, cli.reps),
        Command::SimulateCtbp => simulate_ctbp(&ctx, cli.reps),
        Command::Race => run_race(&ctx, cli.reps),
        Command::Malthusian => malthusian(&ctx),
        Command::CheckAssumptions => assumptions(&ctx),
        Command::Experiment { name } => experiment(&ctx, name, cli.reps),
        Command::Calibrate { name } => run_calibrate(&ctx, name.as_deref(), cli.reps),
    };
    match cli.threads {
        Some(0) => Err(Failure::Config("--threads must be >= 1".into())),
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Failure::Other(e.to_string()))?.install(body)
        }
        None => body(),
    }
}

fn reps(ctx: &Ctx, flag: Option<u64>) -> Result<u64, Failure> {
    let r = flag.or(ctx.cfg.simulate.reps).unwrap_or(1);
    if r == 0 {
        return Err(Failure::Config("--reps must be >= 1".into()));
    }
    Ok(r)
}

/// Powers of ten below `n_max`, then `n_max`.
fn default_checkpoints(n_max: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(10u64), |x| x.checked_mul(10)).take_while(|&x| x < n_max).collect();
    v.push(n_max);
    v
}

fn simulate_graph(ctx: &Ctx, flag_reps: Option<u64>) -> Result<(), Failure> {
    let (fun, seq) = ctx.model()?;
    let n_max = ctx.cfg.simulate.n_max.ok_or_else(|| Failure::Config("simulate.n_max is required".into()))?;
    if let Some(cap) = ctx.cfg.max_vertices {
        if n_max + 1 > cap {
            return Err(Failure::Resource(format!("{} vertices requested, max_vertices is {cap}", n_max + 1)));
        }
    }
    let cps = ctx.cfg.simulate.checkpoints.clone().unwrap_or_else(|| default_checkpoints(n_max));
    let reps = reps(ctx, flag_reps)?;
    let table = PhiTable::build(&fun, 1 << 16).ok();
    let opts = GrowOptions { phi_table: table.as_ref(), max_edges: ctx.cfg.max_events, keep_degrees: false };
    let records = (0..reps)
        .into_par_iter()
        .map(|r| grow(&fun, &seq, n_max, &cps, ReplicateSeed::new(ctx.seed, r), &opts))
        .collect::<hubs_core::Result<Vec<_>>>()?;
    let rows: Vec<GraphTrajectoryRow> = records
        .iter()
        .flat_map(|rec| {
            rec.checkpoints.iter().map(move |c| GraphTrajectoryRow {
                replicate: rec.provenance.replicate,
                n: c.n,
                k: c.k,
                d_max: c.d_max,
                leader_index: c.leader_index,
                leader_changes: c.leader_changes,
                phi1_dmax: c.phi1_dmax,
            })
        })
        .collect();
    write_graph_trajectories(create(&ctx.path("trajectories.csv"))?, &rows)?;
    ctx.write_metadata("simulate-graph", &(&ctx.cfg, ctx.seed, reps))
}

fn simulate_ctbp(ctx: &Ctx, flag_reps: Option<u64>) -> Result<(), Failure> {
    let (fun, _) = ctx.model()?;
    let until = ctx.cfg.simulate.until.ok_or_else(|| Failure::Config("simulate.until is required".into()))?;
    let (rule, t_or_n) = match until {
        Until::Time(t) => (StopRule::Time { t }, t),
        Until::Size(n) => (StopRule::Size { n: n as usize }, n as f64),
    };
    let reps = reps(ctx, flag_reps)?;
    let lambda = solve_lambda_star(&fun, 1e-10).map(|r| r.lambda_star).unwrap_or(f64::NAN);
    let opts = CtbpOptions { max_size: ctx.cfg.max_vertices.map_or(CtbpOptions::default().max_size, |v| v as usize) };
    let runs = (0..reps)
        .into_par_iter()
        .map(|r| {
            let bp = run_ctbp(&fun, rule, ReplicateSeed::new(ctx.seed, r), &opts)?;
            let max_children = bp.child_counts(bp.end_time).into_iter().max().unwrap_or(0);
            Ok((r, bp.births.len() as u64, max_children, hub_index_continuous(&bp, bp.end_time).birth_time, bp.end_time))
        })
        .collect::<hubs_core::Result<Vec<_>>>()?;
    let top = runs.iter().map(|x| x.2).max().unwrap_or(0) as usize;
    let table = PhiTable::build(&fun, top.max(16))?;
    let rows = runs
        .into_iter()
        .map(|(r, size, mc, hub, end)| {
            Ok(CtbpTrajectoryRow {
                replicate: r,
                t_or_n,
                size,
                d_max_n_degree: table.at(1, mc as usize)?,
                hub_birth_time: hub,
                w_sample: (-lambda * end).exp() * size as f64,
            })
        })
        .collect::<hubs_core::Result<Vec<_>>>()?;
    write_ctbp_trajectories(create(&ctx.path("trajectories.csv"))?, &rows)?;
    ctx.write_metadata("simulate-ctbp", &(&ctx.cfg, ctx.seed, reps))
}

fn run_race(ctx: &Ctx, flag_reps: Option<u64>) -> Result<(), Failure> {
    let (fun, _) = ctx.model()?;
    let init = ctx.cfg.simulate.race_init.unwrap_or((1, 1));
    let steps = ctx.cfg.simulate.race_steps.ok_or_else(|| Failure::Config("simulate.race_steps is required".into()))?;
    let reps = reps(ctx, flag_reps)?;
    let results = (0..reps)
        .into_par_iter()
        .map(|r| race(&fun, init, steps as usize, &mut ReplicateSeed::new(ctx.seed, r).stream("race")))
        .collect::<hubs_core::Result<Vec<_>>>()?;
    let path = ctx.path("race.csv");
    let mut w = create(&path)?;
    let mut text = String::from("replicate,lead_changes,tie_visits,x1,x2\n");
    for (r, res) in results.iter().enumerate() {
        let (x1, x2) = *res.path.last().unwrap();
        text.push_str(&format!("{r},{},{},{x1},{x2}\n", res.lead_changes, res.tie_visits));
    }
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))?;
    ctx.write_metadata("race", &(&ctx.cfg, ctx.seed, reps))
}

fn write_json(ctx: &Ctx, name: &str, value: &impl Serialize) -> Result<(), Failure> {
    let path = ctx.path(name);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Other(e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_err(&path, e))
}

fn malthusian(ctx: &Ctx) -> Result<(), Failure> {
    let (fun, _) = ctx.model()?;
    let res = solve_lambda_star(&fun, ctx.cfg.simulate.tol.unwrap_or(1e-10))?;
    println!("lambda* = {}", res.lambda_star);
    write_json(ctx, "malthusian.json", &res)?;
    ctx.write_metadata("malthusian", &ctx.cfg)
}

fn assumptions(ctx: &Ctx) -> Result<(), Failure> {
    let (fun, _) = ctx.model()?;
    let horizon = ctx.cfg.simulate.horizon.unwrap_or(1 << 20) as usize;
    let table = PhiTable::build(&fun, horizon)?;
    let reach = table.at(1, horizon)?;
    let t_min = ctx.cfg.simulate.t_min.unwrap_or(10.0);
    let t_max = ctx.cfg.simulate.t_max.unwrap_or(reach / 3.0);
    if t_max > reach / 3.0 || t_min >= t_max {
        return Err(Failure::Config(format!("need t_min < t_max <= Phi_1(horizon)/3 = {}", reach / 3.0)));
    }
    let report = check_assumptions(&fun, &table, &AssumptionGrid::geometric(t_min, t_max));
    println!("C1 {:?}  C2 {:?}  C3 estimate {:?}", report.c1, report.c2, report.c3_estimate);
    write_json(ctx, "assumptions.json", &report)?;
    ctx.write_metadata("check-assumptions", &ctx.cfg)
}

fn experiment_config(ctx: &Ctx, name: Option<&str>, flag_reps: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let name = match name {
        Some(s) => ExperimentName::parse(s).ok_or_else(|| {
            let all: Vec<&str> = ExperimentName::ALL.iter().map(|n| n.as_str()).collect();
            Failure::Config(format!("unknown experiment `{s}`; expected one of {}", all.join(", ")))
        })?,
        None => ctx
            .cfg
            .experiment
            .name
            .ok_or_else(|| Failure::Config("no experiment named on the command line or in [experiment]".into()))?,
    };
    if let Some(file_name) = ctx.cfg.experiment.name {
        if file_name != name {
            return Err(Failure::Config(format!("config is for experiment `{file_name}`, not `{name}`")));
        }
    }
    let cfg = ctx.cfg.experiment_config(name, Some(ctx.seed), flag_reps);
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Failure::Config(format!("invalid experiment config:\n  - {}", errs.join("\n  - "))));
    }
    Ok(cfg)
}

fn experiment(ctx: &Ctx, name: &str, flag_reps: Option<u64>) -> Result<(), Failure> {
    let cfg = experiment_config(ctx, Some(name), flag_reps)?;
    let summary = run_experiment(&cfg)?;
    write_summary(create(&ctx.path("summary.csv"))?, &summary)?;
    let traj = ctx.path("trajectories.csv");
    let has = write_trajectories(create(&traj)?, &summary.trajectories)?;
    if !has {
        fs::remove_file(&traj).map_err(|e| io_err(&traj, e))?;
    }
    ctx.write_metadata(name, &cfg)?;
    for r in &summary.rows {
        println!("{:<8} {:<52} {}", r.verdict.as_str(), r.metric, r.estimate);
    }
    if summary.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> =
            summary.rows.iter().filter(|r| r.verdict == hubs_core::Verdict::Fail).map(|r| r.metric.as_str()).collect();
        Err(Failure::Verdict(format!("failed: {}", failed.join(", "))))
    }
}

fn run_calibrate(ctx: &Ctx, name: Option<&str>, flag_reps: Option<u64>) -> Result<(), Failure> {
    let cfg = experiment_config(ctx, name, flag_reps)?;
    let file = calibrate(&cfg)?;
    let text = toml::to_string(&file).map_err(|e| Failure::Other(e.to_string()))?;
    let path = ctx.path(&format!("acceptance-{}-v{}.toml", cfg.name, file.version));
    let mut w = create(&path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}
