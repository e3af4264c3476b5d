use serde::Serialize;

use crate::dynamics::{ModelParams, ObservableSpec, StepGuard};
use crate::error::{config_err, Result};
use crate::field::C64;
use crate::resonance::ResonanceTable;

use super::ensemble::{energy_spectrum, mean_se, run_ensemble, shells_by_radius, EquationKind, ShellEnergy};
use super::laws::{ks_distance, EmpiricalLaw, Observable};

/// Stationary mean action `b²/(2γ)` of a linear mode.
pub fn ou_mean_action(b: f64, gamma: f64) -> f64 {
    b * b / (2.0 * gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarySetup {
    pub kind: EquationKind,
    pub burn_in: f64,
    pub horizon: f64,
    pub dt: f64,
    pub record_every: usize,
    pub paths: usize,
    pub master_seed: u64,
    /// Energy-spectrum shell edges; empty means unit shells.
    pub shells: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryMode {
    pub k: usize,
    /// Time-and-ensemble mean of `I_k` over `[burn_in, horizon]`.
    pub mean_time: f64,
    /// Standard error from per-path time means; `None` for one path.
    pub se_time: Option<f64>,
    /// Ensemble mean of `I_k` at `horizon`.
    pub mean_snapshot: f64,
    /// KS between the time-pooled law and the snapshot law.
    pub ks_time_vs_snapshot: f64,
    /// KS between the two halves of the post-burn-in window.
    pub ks_shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryEstimate {
    pub setup: StationarySetup,
    pub flagged: usize,
    pub modes: Vec<StationaryMode>,
    pub spectrum: Vec<ShellEnergy>,
    /// Time-pooled action laws, one per mode.
    #[serde(skip)]
    pub time_laws: Vec<EmpiricalLaw>,
}

/// Estimate stationary action laws from `setup.paths` trajectories started at `v0`.
///
/// The time-pooled law is the long-run estimate; the snapshot law at the
/// horizon is the ensemble variant. Their KS distance is reported as a
/// mixing diagnostic.
pub fn stationary_estimate(
    params: &ModelParams,
    table: &ResonanceTable,
    v0: &[C64],
    setup: &StationarySetup,
) -> Result<StationaryEstimate> {
    if !(setup.burn_in < setup.horizon) || setup.burn_in < 0.0 {
        return Err(config_err(format!(
            "burn-in {} must lie in [0, horizon = {})",
            setup.burn_in, setup.horizon
        )));
    }
    let obs = ObservableSpec {
        record_every: setup.record_every,
        ..Default::default()
    };
    let ens = run_ensemble(
        params,
        table,
        setup.kind,
        v0,
        setup.paths,
        setup.horizon,
        setup.dt,
        setup.master_seed,
        &obs,
        StepGuard::Enforce,
    )?;
    let (t0, t1) = (setup.burn_in, setup.horizon);
    let mid = 0.5 * (t0 + t1);
    let mut modes = Vec::with_capacity(params.n());
    let mut time_laws = Vec::with_capacity(params.n());
    for k in 0..params.n() {
        let obs = Observable::Action(k);
        let pooled = ens.window_law(obs, t0, t1)?;
        let snap = ens.final_law(obs)?;
        let first = ens.window_law(obs, t0, mid)?;
        let second = ens.window_law(obs, mid, t1)?;
        let path_means: Vec<f64> = ens
            .trajectories
            .iter()
            .filter(|t| !t.is_flagged())
            .map(|t| {
                let idx = t.window(t0, t1);
                idx.iter().map(|&i| t.actions[i][k]).sum::<f64>() / idx.len().max(1) as f64
            })
            .collect();
        modes.push(StationaryMode {
            k,
            mean_time: pooled.mean(),
            se_time: mean_se(&path_means).map(|(_, se)| se),
            mean_snapshot: snap.mean(),
            ks_time_vs_snapshot: ks_distance(&pooled, &snap)?,
            ks_shift: ks_distance(&first, &second)?,
        });
        time_laws.push(pooled);
    }
    let edges = if setup.shells.is_empty() {
        shells_by_radius(&params.grid)
    } else {
        setup.shells.clone()
    };
    let spectrum = energy_spectrum(&ens, &params.grid, &edges, t0, t1)?;
    Ok(StationaryEstimate {
        setup: setup.clone(),
        flagged: ens.flagged(),
        modes,
        spectrum,
        time_laws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::lattice::{DampingSpec, NoiseProfile, SpectralGrid};
    use crate::resonance::enumerate_resonant_tuples;

    #[test]
    fn ou_closed_form() {
        assert_eq!(ou_mean_action(1.0, 2.0), 0.25);
        assert_eq!(ou_mean_action(2.0, 2.0), 1.0);
    }

    #[test]
    fn linear_stationary_mean_and_shift() {
        let g = SpectralGrid::new(1, 1, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, 1).unwrap();
        let p = ModelParams::new(g, 1, 0.0, DampingSpec::default(), NoiseProfile::default()).unwrap();
        let setup = StationarySetup {
            kind: EquationKind::Effective,
            burn_in: 5.0,
            horizon: 45.0,
            dt: 0.005,
            record_every: 100,
            paths: 32,
            master_seed: 2,
            shells: vec![],
        };
        let est = stationary_estimate(&p, &t, &SpectralField::zeros(p.n()), &setup).unwrap();
        assert_eq!(est.flagged, 0);
        for m in &est.modes {
            let expect = ou_mean_action(p.noise.b[m.k], p.gamma.gamma[m.k]);
            let se = m.se_time.unwrap();
            assert!(se / expect < 0.05);
            assert!((m.mean_time - expect).abs() < 4.0 * se + 0.01 * expect, "{m:?} vs {expect}");
            assert!(m.ks_shift < 0.15);
        }
        let bad = StationarySetup { burn_in: 50.0, ..setup };
        assert!(stationary_estimate(&p, &t, &SpectralField::zeros(p.n()), &bad).is_err());
    }
}
