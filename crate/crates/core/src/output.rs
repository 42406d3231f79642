//! CSV writers with a fixed column order, `.` decimals and LF line endings.
//!
//! Floats are written in Rust's shortest round-trip form, so equal values
//! always produce equal bytes. Missing values are empty fields.

use std::io::Write;

use crate::error::{Error, Result};
use crate::experiments::{CtbpTrajectoryRow, GraphTrajectoryRow, RunSummary, Trajectories};

pub const SUMMARY_HEADER: [&str; 7] = ["metric", "estimate", "ci_lo", "ci_hi", "predicted", "verdict", "tolerance"];
pub const GRAPH_TRAJECTORY_HEADER: [&str; 7] = ["replicate", "n", "k", "d_max", "leader_index", "leader_changes", "phi1_dmax"];
pub const CTBP_TRAJECTORY_HEADER: [&str; 6] = ["replicate", "t_or_n", "size", "d_max_N_degree", "hub_birth_time", "W_sample"];

fn float(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Resource(format!("writing csv: {e}"))
}

pub fn write_summary<W: Write>(w: W, summary: &RunSummary) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER).map_err(io)?;
    for r in &summary.rows {
        out.write_record([
            r.metric.clone(),
            float(r.estimate),
            opt(r.ci_lo),
            opt(r.ci_hi),
            opt(r.predicted),
            r.verdict.as_str().to_string(),
            r.tolerance.clone(),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_graph_trajectories<W: Write>(w: W, rows: &[GraphTrajectoryRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(GRAPH_TRAJECTORY_HEADER).map_err(io)?;
    for r in rows {
        out.write_record([
            r.replicate.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.d_max.to_string(),
            r.leader_index.to_string(),
            r.leader_changes.to_string(),
            opt(r.phi1_dmax),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_ctbp_trajectories<W: Write>(w: W, rows: &[CtbpTrajectoryRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(CTBP_TRAJECTORY_HEADER).map_err(io)?;
    for r in rows {
        out.write_record([
            r.replicate.to_string(),
            float(r.t_or_n),
            r.size.to_string(),
            float(r.d_max_n_degree),
            float(r.hub_birth_time),
            float(r.w_sample),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Writes the trajectory table; `false` when the run has none.
pub fn write_trajectories<W: Write>(w: W, t: &Trajectories) -> Result<bool> {
    match t {
        Trajectories::None => Ok(false),
        Trajectories::Graph(rows) => write_graph_trajectories(w, rows).map(|_| true),
        Trajectories::Ctbp(rows) => write_ctbp_trajectories(w, rows).map(|_| true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentName, Provenance, SummaryRow, Verdict};

    #[test]
    fn summary_layout_is_fixed() {
        let s = RunSummary {
            provenance: Provenance {
                experiment: ExperimentName::MdpRates,
                config_hash: "h".into(),
                master_seed: 1,
                code_version: "0".into(),
                generator: "g".into(),
            },
            rows: vec![SummaryRow {
                metric: "ratio[n=50,x=0.5]".into(),
                estimate: 2.5,
                ci_lo: None,
                ci_hi: Some(0.1),
                predicted: Some(1.0),
                verdict: Verdict::Fail,
                tolerance: "in [0.6, 1.4]".into(),
            }],
            trajectories: Trajectories::None,
        };
        let mut buf = Vec::new();
        write_summary(&mut buf, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "metric,estimate,ci_lo,ci_hi,predicted,verdict,tolerance\n\"ratio[n=50,x=0.5]\",2.5,,0.1,1,fail,\"in [0.6, 1.4]\"\n"
        );
    }
}
