use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{integrate_effective, integrate_full, ModelParams, NoisePathSpec, ObservableSpec, StepGuard, Trajectory};
use crate::error::{config_err, Result};
use crate::field::C64;
use crate::lattice::SpectralGrid;
use crate::resonance::ResonanceTable;

use super::laws::{time_mollified_law, EmpiricalLaw, Observable};

/// Stream offset of full-equation paths. Effective paths use streams
/// `0..M`, full paths `FULL_STREAM_BASE + 0..M`, so the two never share noise.
pub const FULL_STREAM_BASE: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EquationKind {
    Effective,
    Full { nu: f64 },
}

/// Noise stream of path `index`.
///
/// Every `ν` of a ladder uses the same full-equation streams, so the ladder
/// differences are not swamped by path-to-path noise.
pub fn stream_id(kind: EquationKind, index: usize) -> u64 {
    match kind {
        EquationKind::Effective => index as u64,
        EquationKind::Full { .. } => FULL_STREAM_BASE | index as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ensemble {
    pub kind: EquationKind,
    pub master_seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub trajectories: Vec<Trajectory>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Number of trajectories aborted by the blow-up guard.
    pub fn flagged(&self) -> usize {
        self.trajectories.iter().filter(|t| t.is_flagged()).count()
    }

    /// Fraction of undefined phase samples over all series and unflagged paths.
    pub fn missing_fraction(&self) -> f64 {
        let (mut miss, mut total) = (0usize, 0usize);
        for t in self.trajectories.iter().filter(|t| !t.is_flagged()) {
            for ps in &t.phases {
                miss += ps.values.iter().filter(|v| v.is_none()).count();
                total += ps.values.len();
            }
        }
        if total == 0 {
            0.0
        } else {
            miss as f64 / total as f64
        }
    }

    /// Law of `obs` at the final time.
    pub fn final_law(&self, obs: Observable) -> Result<EmpiricalLaw> {
        time_mollified_law(&self.trajectories, obs, self.horizon, self.horizon)
    }

    pub fn window_law(&self, obs: Observable, t0: f64, t1: f64) -> Result<EmpiricalLaw> {
        time_mollified_law(&self.trajectories, obs, t0, t1)
    }

    /// Mean and standard error over unflagged paths of the oscillatory residual of mode `k`.
    pub fn residual_mean(&self, k: usize) -> Option<(f64, f64)> {
        let xs: Vec<f64> = self
            .trajectories
            .iter()
            .filter(|t| !t.is_flagged())
            .filter_map(|t| t.residual.as_ref().map(|r| r[k]))
            .collect();
        mean_se(&xs)
    }
}

/// Sample mean and its standard error; `None` for fewer than two values.
pub(crate) fn mean_se(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

/// Integrate `paths` independent trajectories from `v0`.
///
/// Trajectories run in parallel and are collected in path order, so the
/// result does not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    params: &ModelParams,
    table: &ResonanceTable,
    kind: EquationKind,
    v0: &[C64],
    paths: usize,
    horizon: f64,
    dt: f64,
    master_seed: u64,
    obs: &ObservableSpec,
    guard: StepGuard,
) -> Result<Ensemble> {
    if paths == 0 {
        return Err(config_err("ensemble needs at least one path"));
    }
    let trajectories = (0..paths)
        .into_par_iter()
        .map(|i| {
            let noise = NoisePathSpec::new(master_seed, stream_id(kind, i));
            match kind {
                EquationKind::Effective => integrate_effective(v0, params, table, horizon, dt, &noise, obs, guard),
                EquationKind::Full { nu } => integrate_full(v0, params, table, nu, horizon, dt, &noise, obs, guard),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        kind,
        master_seed,
        horizon,
        dt,
        trajectories,
    })
}

/// Shell edges `0, ½, 3/2, …` so that shell `r` holds the modes with `|k|` closest to `r`.
pub fn shells_by_radius(grid: &SpectralGrid) -> Vec<f64> {
    let rmax = (grid.max_eigen_int() as f64).sqrt();
    let mut edges = vec![0.0];
    let mut r = 0.5;
    while *edges.last().unwrap() <= rmax {
        edges.push(r);
        r += 1.0;
    }
    edges
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellEnergy {
    pub lo: f64,
    pub hi: f64,
    pub modes: usize,
    /// Mean of `E|v_k|²` over the shell; `None` for an empty shell.
    pub energy: Option<f64>,
}

/// `E_r`: shell average of `E|v_k|²` pooled over samples in `[t0, t1]`.
///
/// Shell `i` is `edges[i] ≤ |k| < edges[i+1]`.
pub fn energy_spectrum(ens: &Ensemble, grid: &SpectralGrid, edges: &[f64], t0: f64, t1: f64) -> Result<Vec<ShellEnergy>> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_err("shell edges must be strictly increasing"));
    }
    let radii: Vec<f64> = (0..grid.len()).map(|k| (grid.eigen_int()[k] as f64).sqrt()).collect();
    let mut shell_of = Vec::with_capacity(grid.len());
    for &r in &radii {
        match edges.windows(2).position(|w| r >= w[0] && r < w[1]) {
            Some(i) => shell_of.push(i),
            None => return Err(config_err(format!("shell edges do not cover radius {r}"))),
        }
    }
    let mut mode_mean = vec![0.0; grid.len()];
    for (k, m) in mode_mean.iter_mut().enumerate() {
        let law = ens.window_law(Observable::Action(k), t0, t1)?;
        *m = 2.0 * law.mean();
    }
    Ok(edges
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let members: Vec<f64> = (0..grid.len()).filter(|&k| shell_of[k] == i).map(|k| mode_mean[k]).collect();
            ShellEnergy {
                lo: w[0],
                hi: w[1],
                modes: members.len(),
                energy: if members.is_empty() {
                    None
                } else {
                    Some(members.iter().sum::<f64>() / members.len() as f64)
                },
            }
        })
        .collect())
}
