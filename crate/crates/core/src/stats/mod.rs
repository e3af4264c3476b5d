//! Ensembles, empirical laws and the experiments built on them.

mod convergence;
mod ensemble;
mod laws;
mod stationary;

pub use convergence::{
    convergence_report, ladder_step, ConvergenceReport, ConvergenceSetup, ModeDistance, NuEntry,
    PhaseDistance, Uniformity,
};
pub use ensemble::{
    energy_spectrum, run_ensemble, shells_by_radius, stream_id, Ensemble, EquationKind,
    ShellEnergy, FULL_STREAM_BASE,
};
pub use laws::{
    kolmogorov_q, ks_bootstrap_se, ks_distance, kuiper_distance, kuiper_q, kuiper_uniformity,
    time_mollified_law, EmpiricalLaw, KuiperResult, LawKind, Observable,
};
pub use stationary::{
    ou_mean_action, stationary_estimate, StationaryEstimate, StationaryMode, StationarySetup,
};
