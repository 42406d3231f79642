//! Generalized preferential attachment: growth simulation, continuous-time
//! branching embeddings and the deterministic functionals that predict when
//! a persistent hub emerges.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attachment;
pub mod ctbp;
pub mod error;
pub mod experiments;
pub mod graphsim;
pub mod malthusian;
pub mod numeric;
pub mod output;
pub mod pointproc;
pub mod rng;
pub mod sampling;
pub mod sequence;
pub mod stats;

pub use attachment::{AttachmentFunction, AttachmentKind, CompositeOp, Phi2Tail, PhiTable, TailRule};
pub use ctbp::{hub_index_continuous, malthusian_diagnostic, run_ctbp, window_max_degree, BranchingTrajectory, StopRule};
pub use error::{Error, Result};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentName, RunSummary, Verdict};
pub use graphsim::{grow, race, GrowOptions, TrajectoryRecord};
pub use malthusian::{
    check_assumptions, predict_asymptotics, rho_hat, solve_lambda_star, uniform_tree_constants, AssumptionGrid, AssumptionReport,
    MalthusianResult, RhoHat,
};
pub use rng::{derive_stream, ReplicateSeed, Stream};
pub use sequence::{AttachmentSequence, MDistribution};

/// Three-valued verdict for facts that can only be checked numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    True,
    False,
    Unknown,
}

impl From<bool> for TriState {
    fn from(b: bool) -> Self {
        if b {
            TriState::True
        } else {
            TriState::False
        }
    }
}
