//! Nonlinearity, resonant vector field, Hamiltonians and SDE integrators.

mod hamiltonian;
mod integrate;
mod nonlinearity;
mod params;
mod resonant;

pub use hamiltonian::{conserved_quantities, hamiltonian_full, hamiltonian_res, ConservedQuantities};
pub use integrate::{
    full_step_limit, integrate_effective, integrate_full, integrate_resonant_flow, oscillatory_residual,
    BlowUp, NoisePathSpec, ObservableSpec, PhaseSeries, StepGuard, Trajectory, BLOW_UP_NORM,
};
pub use nonlinearity::{galerkin_power_direct, nonlinearity, nonlinearity_direct, GalerkinProduct};
pub use params::ModelParams;
pub use resonant::{
    averaged_action_drift, averaged_action_drift_quadrature, nonresonant_field,
    quadrature_nodes, resonant_field_direct, resonant_field_quadrature, resonant_sum,
    rotated_full_drift,
};
