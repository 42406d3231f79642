//! Single-vertex point processes `xi_A`, their martingales, and exact
//! small-instance oracles for the law of `S_1(n)`.

mod checks;
mod clock;
mod forward;
mod hypoexp;

pub use checks::{mdp_rate_check, tail_bound_check, MdpCheck, TailBoundCheck};
pub use clock::{martingale_path, simulate_xi, Capped, ClockProcess, MartingalePath, XiTrajectory};
pub use forward::{forward_equations, ForwardSolution};
pub use hypoexp::{hypoexp_cdf, DuplicatePolicy, HypoexpSpec, HypoexpValue};
