//! Time stepping for the effective equation, the full equation in the
//! interaction representation, and the deterministic resonant flow.
//!
//! The stochastic schemes are Euler-Maruyama with the linear damping
//! integrated exactly:
//!
//! ```text
//! v_k ← e^{-γ_k Δτ} (v_k + D_k(v) Δτ) + b_k (ΔW₊ + i ΔW₋),   ΔW± ~ N(0, Δτ)
//! ```
//!
//! where `D = R⁰` for the effective equation and `D = R⁰ + 𝓡(·, τ/ν)` for the
//! interaction variables `a_k = e^{iλ_kτ/ν} v_k` of the full equation.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::field::{actions, l2, phase_combination_checked, rotate_by_weights, SpectralField, C64};
use crate::resonance::ResonanceTable;

use super::hamiltonian::{conserved_quantities, ConservedQuantities};
use super::params::ModelParams;
use super::resonant::{resonant_field_direct, rotated_full_drift};

/// `|v|_{h^0}` above which a trajectory is aborted and flagged.
pub const BLOW_UP_NORM: f64 = 1e6;

/// Source of the Wiener increments of one trajectory.
///
/// The generator is ChaCha8 keyed by `master_seed` with stream number
/// `stream`; distinct streams are independent and reproducible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoisePathSpec {
    pub master_seed: u64,
    pub stream: u64,
}

impl NoisePathSpec {
    pub fn new(master_seed: u64, stream: u64) -> Self {
        NoisePathSpec { master_seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Whether step-size guards are enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepGuard {
    #[default]
    Enforce,
    Skip,
}

/// What a trajectory records besides the actions and the `h⁰` norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    /// Resonance vectors `s` (with `Λ̃·s = 0`) whose `Φ^s` is recorded.
    pub resonant: Vec<Vec<i64>>,
    /// Further phase combinations `s·φ` of the physical field.
    pub nonresonant: Vec<Vec<i64>>,
    /// Record every this many steps (the final time is always recorded).
    pub record_every: usize,
    /// Keep full snapshots of the integrated variable.
    pub snapshots: bool,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        ObservableSpec {
            resonant: Vec::new(),
            nonresonant: Vec::new(),
            record_every: 1,
            snapshots: false,
        }
    }
}

/// Samples of one phase combination; `None` where a mode in the support vanished.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSeries {
    pub s: Vec<i64>,
    pub resonant: bool,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlowUp {
    pub tau: f64,
    pub norm: f64,
}

/// Recorded output of one integration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    /// `I_k` per sample, all modes.
    pub actions: Vec<Vec<f64>>,
    pub norm_h0: Vec<f64>,
    pub phases: Vec<PhaseSeries>,
    /// Snapshots of the integrated variable (`a` for the full equation).
    pub snapshots: Vec<SpectralField>,
    /// `max_τ |∫_0^τ 𝓡_k ds|` per mode; full equation only.
    pub residual: Option<Vec<f64>>,
    /// Conserved quantities per sample; resonant flow only.
    pub conserved: Vec<ConservedQuantities>,
    pub blow_up: Option<BlowUp>,
    /// Integrated variable at the last completed step.
    pub final_state: SpectralField,
}

impl Trajectory {
    fn new(dt: f64, obs: &ObservableSpec) -> Self {
        let series = |list: &[Vec<i64>], resonant: bool| {
            list.iter()
                .map(|s| PhaseSeries {
                    s: s.clone(),
                    resonant,
                    values: Vec::new(),
                })
                .collect::<Vec<_>>()
        };
        let mut phases = series(&obs.resonant, true);
        phases.extend(series(&obs.nonresonant, false));
        Trajectory {
            dt,
            times: Vec::new(),
            actions: Vec::new(),
            norm_h0: Vec::new(),
            phases,
            snapshots: Vec::new(),
            residual: None,
            conserved: Vec::new(),
            blow_up: None,
            final_state: SpectralField::default(),
        }
    }

    /// `physical` is the field `v`; `state` the integrated variable.
    fn record(&mut self, tau: f64, physical: &[C64], state: &[C64], keep_snapshot: bool) {
        self.times.push(tau);
        self.actions.push(actions(physical));
        self.norm_h0.push(l2(physical));
        for ps in self.phases.iter_mut() {
            ps.values.push(phase_combination_checked(physical, &ps.s));
        }
        if keep_snapshot {
            self.snapshots.push(state.to_vec().into());
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.blow_up.is_some()
    }

    /// `Err(BlowUp)` for a flagged trajectory.
    pub fn into_result(self) -> Result<Self> {
        match self.blow_up {
            Some(b) => Err(Error::BlowUp { tau: b.tau, norm: b.norm }),
            None => Ok(self),
        }
    }

    /// Action of mode `k` at every recorded time.
    pub fn action_series(&self, k: usize) -> Vec<f64> {
        self.actions.iter().map(|a| a[k]).collect()
    }

    /// Indices of recorded samples with `t0 ≤ τ ≤ t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Vec<usize> {
        let eps = 1e-9 * self.dt.max(1e-300);
        self.times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= t0 - eps && t <= t1 + eps)
            .map(|(i, _)| i)
            .collect()
    }
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::StepSize {
            dt,
            reason: "step must be positive".into(),
        });
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(config_err(format!("horizon T = {horizon} must be nonnegative")));
    }
    let steps = (horizon / dt).round();
    if (steps * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::StepSize {
            dt,
            reason: format!("T = {horizon} is not an integer multiple of the step"),
        });
    }
    Ok(steps as usize)
}

fn check_damping_guard(params: &ModelParams, dt: f64, guard: StepGuard) -> Result<()> {
    let g = params.gamma.max();
    if guard == StepGuard::Enforce && dt * g >= 1.0 {
        return Err(Error::StepSize {
            dt,
            reason: format!("Δτ·max γ = {} must stay below 1", dt * g),
        });
    }
    Ok(())
}

/// Largest step that resolves the fastest oscillation of `𝓡` with 20 steps.
pub fn full_step_limit(params: &ModelParams, nu: f64) -> f64 {
    let l2 = params.grid.period().powi(2);
    nu * l2 * TAU / (20.0 * params.max_frequency() as f64)
}

struct Stepper {
    decay: Vec<f64>,
    kick: Vec<f64>,
    dt: f64,
    rng: ChaCha8Rng,
}

impl Stepper {
    fn new(params: &ModelParams, dt: f64, noise: &NoisePathSpec) -> Self {
        Stepper {
            decay: params.gamma.gamma.iter().map(|g| (-g * dt).exp()).collect(),
            kick: params.noise.b.iter().map(|b| b * dt.sqrt()).collect(),
            dt,
            rng: noise.rng(),
        }
    }

    fn step(&mut self, v: &mut [C64], drift: &[C64]) {
        for k in 0..v.len() {
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            v[k] = self.decay[k] * (v[k] + drift[k] * self.dt) + self.kick[k] * C64::new(re, im);
        }
    }
}

fn blown_up(v: &[C64]) -> Option<f64> {
    let n = l2(v);
    if !n.is_finite() || n > BLOW_UP_NORM {
        Some(n)
    } else {
        None
    }
}

fn check_len(v0: &[C64], params: &ModelParams) -> Result<()> {
    if v0.len() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            got: v0.len(),
        });
    }
    Ok(())
}

/// Effective equation `dv = (R⁰(v) - γv) dτ + b dβ`.
pub fn integrate_effective(
    v0: &[C64],
    params: &ModelParams,
    table: &ResonanceTable,
    horizon: f64,
    dt: f64,
    noise: &NoisePathSpec,
    obs: &ObservableSpec,
    guard: StepGuard,
) -> Result<Trajectory> {
    check_len(v0, params)?;
    let steps = step_count(horizon, dt)?;
    check_damping_guard(params, dt, guard)?;
    let every = obs.record_every.max(1);

    let mut traj = Trajectory::new(dt, obs);
    let mut stepper = Stepper::new(params, dt, noise);
    let mut v = v0.to_vec();
    traj.record(0.0, &v, &v, obs.snapshots);
    for j in 0..steps {
        let drift = resonant_field_direct(&v, table, params)?;
        stepper.step(&mut v, &drift);
        let tau = (j + 1) as f64 * dt;
        if let Some(norm) = blown_up(&v) {
            traj.blow_up = Some(BlowUp { tau, norm });
            break;
        }
        if (j + 1) % every == 0 || j + 1 == steps {
            traj.record(tau, &v, &v, obs.snapshots);
        }
    }
    traj.final_state = v.into();
    Ok(traj)
}

/// Full equation in the interaction representation,
/// `da = (R⁰(a) + 𝓡(a, τ/ν)) dτ - γa dτ + b dβ`.
///
/// Observables are evaluated on the physical field `v = Ψ_{-λτ/ν} a`; the
/// actions coincide for `a` and `v`. The oscillatory residual
/// `max_τ |∫_0^τ 𝓡_k ds|` is accumulated on the fly at every step.
#[allow(clippy::too_many_arguments)]
pub fn integrate_full(
    v0: &[C64],
    params: &ModelParams,
    table: &ResonanceTable,
    nu: f64,
    horizon: f64,
    dt: f64,
    noise: &NoisePathSpec,
    obs: &ObservableSpec,
    guard: StepGuard,
) -> Result<Trajectory> {
    check_len(v0, params)?;
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(config_err(format!("nu = {nu} must be positive")));
    }
    let steps = step_count(horizon, dt)?;
    check_damping_guard(params, dt, guard)?;
    let limit = full_step_limit(params, nu);
    if guard == StepGuard::Enforce && dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize {
            dt,
            reason: format!("nu = {nu} needs Δτ ≤ {limit:.3e} (20 steps per fastest oscillation)"),
        });
    }
    let every = obs.record_every.max(1);
    let lam = params.grid.eigen_int();
    let fast_rate = 1.0 / (nu * params.grid.period().powi(2));

    let mut traj = Trajectory::new(dt, obs);
    let mut stepper = Stepper::new(params, dt, noise);
    let mut a = v0.to_vec();
    let mut physical = a.clone();
    let mut cumulative = vec![C64::new(0.0, 0.0); a.len()];
    let mut residual = vec![0.0f64; a.len()];
    traj.record(0.0, &a, &a, obs.snapshots);
    for j in 0..steps {
        let theta = j as f64 * dt * fast_rate;
        let drift = rotated_full_drift(&a, params, theta);
        let r0 = resonant_field_direct(&a, table, params)?;
        for k in 0..a.len() {
            cumulative[k] += (drift[k] - r0[k]) * dt;
            residual[k] = residual[k].max(cumulative[k].norm());
        }
        stepper.step(&mut a, &drift);
        let tau = (j + 1) as f64 * dt;
        if let Some(norm) = blown_up(&a) {
            traj.blow_up = Some(BlowUp { tau, norm });
            break;
        }
        if (j + 1) % every == 0 || j + 1 == steps {
            physical.copy_from_slice(&a);
            rotate_by_weights(&mut physical, -tau * fast_rate, lam);
            traj.record(tau, &physical, &a, obs.snapshots);
        }
    }
    traj.residual = Some(residual);
    traj.final_state = a.into();
    Ok(traj)
}

/// Recompute `max_τ |Σ_{steps ≤ τ} 𝓡_k(a(s), s/ν) Δτ|` from stored snapshots.
///
/// Needs snapshots at every step (`record_every = 1`); the result then
/// matches the residual accumulated inside [`integrate_full`].
pub fn oscillatory_residual(
    traj: &Trajectory,
    params: &ModelParams,
    table: &ResonanceTable,
    nu: f64,
) -> Result<Vec<f64>> {
    if traj.snapshots.len() != traj.times.len() || traj.snapshots.is_empty() {
        return Err(config_err("oscillatory residual needs a snapshot at every recorded time"));
    }
    let fast_rate = 1.0 / (nu * params.grid.period().powi(2));
    let n = params.n();
    let mut cumulative = vec![C64::new(0.0, 0.0); n];
    let mut residual = vec![0.0f64; n];
    for j in 0..traj.times.len() - 1 {
        let h = traj.times[j + 1] - traj.times[j];
        let a = &traj.snapshots[j];
        let drift = rotated_full_drift(a, params, traj.times[j] * fast_rate);
        let r0 = resonant_field_direct(a, table, params)?;
        for k in 0..n {
            cumulative[k] += (drift[k] - r0[k]) * h;
            residual[k] = residual[k].max(cumulative[k].norm());
        }
    }
    Ok(residual)
}

/// Deterministic resonant flow `v̇ = R⁰(v)` by classical RK4 with step `h`.
/// Records the conserved quantities at every recorded sample.
pub fn integrate_resonant_flow(
    v0: &[C64],
    params: &ModelParams,
    table: &ResonanceTable,
    horizon: f64,
    h: f64,
    record_every: usize,
) -> Result<Trajectory> {
    check_len(v0, params)?;
    let steps = step_count(horizon, h)?;
    let every = record_every.max(1);
    let obs = ObservableSpec {
        record_every: every,
        snapshots: true,
        ..Default::default()
    };
    let mut traj = Trajectory::new(h, &obs);
    let grid = &params.grid;
    let mut v = v0.to_vec();
    traj.record(0.0, &v, &v, true);
    traj.conserved.push(conserved_quantities(&v, grid, table));

    let n = v.len();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    for j in 0..steps {
        let k1 = resonant_field_direct(&v, table, params)?;
        for i in 0..n {
            tmp[i] = v[i] + k1[i] * (0.5 * h);
        }
        let k2 = resonant_field_direct(&tmp, table, params)?;
        for i in 0..n {
            tmp[i] = v[i] + k2[i] * (0.5 * h);
        }
        let k3 = resonant_field_direct(&tmp, table, params)?;
        for i in 0..n {
            tmp[i] = v[i] + k3[i] * h;
        }
        let k4 = resonant_field_direct(&tmp, table, params)?;
        for i in 0..n {
            v[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        let tau = (j + 1) as f64 * h;
        if let Some(norm) = blown_up(&v) {
            traj.blow_up = Some(BlowUp { tau, norm });
            break;
        }
        if (j + 1) % every == 0 || j + 1 == steps {
            traj.record(tau, &v, &v, true);
            traj.conserved.push(conserved_quantities(&v, grid, table));
        }
    }
    traj.final_state = v.into();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DampingSpec, NoiseProfile, NoiseSpectrum, SpectralGrid};
    use crate::resonance::enumerate_resonant_tuples;

    fn setup(d: usize, n: i64, q: usize, rho: f64) -> (ModelParams, ResonanceTable) {
        let g = SpectralGrid::new(d, n, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, q).unwrap();
        let p = ModelParams::new(g, q, rho, DampingSpec::default(), NoiseProfile::default()).unwrap();
        (p, t)
    }

    fn random_field(n: usize, norm: f64, seed: u64) -> SpectralField {
        SpectralField::random(n, norm, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn linear_decay_is_exact() {
        let (p, t) = setup(2, 1, 1, 0.0);
        let p = p.clone().with_noise(NoiseSpectrum::silent(&p.grid));
        let v0 = random_field(p.n(), 1.0, 1);
        let horizon = 0.5;
        let tr = integrate_effective(&v0, &p, &t, horizon, 0.01, &NoisePathSpec::new(1, 0), &ObservableSpec::default(), StepGuard::Enforce).unwrap();
        for k in 0..p.n() {
            let expect = v0[k] * (-p.gamma.gamma[k] * horizon).exp();
            assert!((tr.final_state[k] - expect).norm() < 1e-14);
        }
        assert_eq!(tr.times.len(), 51);
    }

    #[test]
    fn full_equals_effective_when_linear() {
        let (p, t) = setup(2, 1, 1, 0.0);
        let v0 = random_field(p.n(), 1.0, 2);
        let ns = NoisePathSpec::new(9, 3);
        let obs = ObservableSpec::default();
        let dt = 1e-3;
        let e = integrate_effective(&v0, &p, &t, 0.2, dt, &ns, &obs, StepGuard::Enforce).unwrap();
        let f = integrate_full(&v0, &p, &t, 0.1, 0.2, dt, &ns, &obs, StepGuard::Enforce).unwrap();
        assert_eq!(e.final_state, f.final_state);
        // the full run records the back-rotated field, equal up to rounding
        for (x, y) in e.actions.iter().flatten().zip(f.actions.iter().flatten()) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1e-300));
        }
        assert!(f.residual.unwrap().iter().all(|r| *r == 0.0));
    }

    #[test]
    fn full_linear_moduli_decay() {
        let (p, t) = setup(1, 2, 1, 0.0);
        let p = p.clone().with_noise(NoiseSpectrum::silent(&p.grid));
        let v0 = random_field(p.n(), 1.0, 3);
        let tr = integrate_full(&v0, &p, &t, 0.5, 1.0, 0.005, &NoisePathSpec::new(0, 0), &ObservableSpec::default(), StepGuard::Enforce).unwrap();
        for k in 0..p.n() {
            let expect = v0[k].norm() * (-p.gamma.gamma[k]).exp();
            assert!((tr.final_state[k].norm() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn guards() {
        let (p, t) = setup(2, 1, 1, 1.0);
        let v0 = SpectralField::zeros(p.n());
        let ns = NoisePathSpec::new(0, 0);
        let obs = ObservableSpec::default();
        // γ_max = 3
        assert!(matches!(
            integrate_effective(&v0, &p, &t, 1.0, 0.5, &ns, &obs, StepGuard::Enforce),
            Err(Error::StepSize { .. })
        ));
        assert!(matches!(
            integrate_full(&v0, &p, &t, 0.05, 1.0, 0.01, &ns, &obs, StepGuard::Enforce),
            Err(Error::StepSize { .. })
        ));
        assert!(integrate_full(&v0, &p, &t, 0.05, 0.1, 0.01, &ns, &obs, StepGuard::Skip).is_ok());
        assert!(integrate_effective(&v0, &p, &t, 1.0, 0.3, &ns, &obs, StepGuard::Enforce).is_err());
        assert!(integrate_effective(&v0[..3], &p, &t, 1.0, 0.1, &ns, &obs, StepGuard::Enforce).is_err());
    }

    #[test]
    fn blow_up_is_flagged() {
        // large ρ and data: the explicit step diverges
        let (p, t) = setup(1, 1, 1, 50.0);
        let p = p.clone().with_noise(NoiseSpectrum::silent(&p.grid));
        let v0 = random_field(p.n(), 30.0, 4);
        let tr = integrate_effective(&v0, &p, &t, 1.0, 0.1, &NoisePathSpec::new(0, 0), &ObservableSpec::default(), StepGuard::Enforce).unwrap();
        assert!(tr.is_flagged());
        assert!(matches!(tr.into_result(), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn reproducible_and_streams_differ() {
        let (p, t) = setup(2, 1, 1, 1.0);
        let v0 = SpectralField::zeros(p.n());
        let obs = ObservableSpec::default();
        let run = |s| integrate_effective(&v0, &p, &t, 0.1, 0.01, &NoisePathSpec::new(7, s), &obs, StepGuard::Enforce).unwrap();
        assert_eq!(run(1), run(1));
        assert_ne!(run(1).final_state, run(2).final_state);
    }

    #[test]
    fn residual_recomputation_matches() {
        let (p, t) = setup(2, 1, 1, 1.0);
        let v0 = random_field(p.n(), 1.0, 5);
        let nu = 0.2;
        let dt = full_step_limit(&p, nu);
        let steps = 50;
        let obs = ObservableSpec { snapshots: true, ..Default::default() };
        let tr = integrate_full(&v0, &p, &t, nu, steps as f64 * dt, dt, &NoisePathSpec::new(1, 1), &obs, StepGuard::Enforce).unwrap();
        let again = oscillatory_residual(&tr, &p, &t, nu).unwrap();
        for (a, b) in again.iter().zip(tr.residual.as_ref().unwrap()) {
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }
        let no_snap = integrate_full(&v0, &p, &t, nu, 10.0 * dt, dt, &NoisePathSpec::new(1, 1), &ObservableSpec::default(), StepGuard::Enforce).unwrap();
        assert!(oscillatory_residual(&no_snap, &p, &t, nu).is_err());
    }

    #[test]
    fn frozen_state_residual_is_small() {
        // For constant a, ∫_0^τ 𝓡 ds is a trigonometric polynomial in τ/ν with
        // zero mean; over one full fast period (2πν) the left Riemann sum with
        // a step dividing the period is exact, so the sum returns to ~0.
        let (p, t) = setup(2, 1, 1, 1.0);
        let a = random_field(p.n(), 1.0, 6);
        let nu = 0.1;
        let period = TAU * nu;
        let m = 400;
        let h = period / m as f64;
        let mut cum = vec![C64::new(0.0, 0.0); p.n()];
        for j in 0..m {
            let th = j as f64 * h / nu;
            let r = super::super::resonant::nonresonant_field(&a, &t, &p, th).unwrap();
            for k in 0..p.n() {
                cum[k] += r[k] * h;
            }
        }
        assert!(cum.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn resonant_flow_conserves() {
        let (p, t) = setup(2, 1, 1, 1.0);
        let v0 = random_field(p.n(), 1.0, 7);
        let tr = integrate_resonant_flow(&v0, &p, &t, 0.5, 1e-3, 100).unwrap();
        let c0 = &tr.conserved[0];
        let c1 = tr.conserved.last().unwrap();
        assert!((c1.h0 - c0.h0).abs() < 1e-10);
        assert!((c1.h1 - c0.h1).abs() < 1e-10);
        assert!((c1.h_res - c0.h_res).abs() < 1e-10);
        for (a, b) in c0.momentum.iter().zip(&c1.momentum) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenspace_invariance() {
        let (p, t) = setup(2, 2, 1, 1.0);
        let lam = p.grid.eigen_int();
        let mut v0 = random_field(p.n(), 1.0, 8);
        for k in 0..p.n() {
            if lam[k] != 5 {
                v0[k] = C64::new(0.0, 0.0);
            }
        }
        let tr = integrate_resonant_flow(&v0, &p, &t, 0.5, 1e-3, 500).unwrap();
        for k in 0..p.n() {
            if lam[k] != 5 {
                assert_eq!(tr.final_state[k].norm(), 0.0);
            }
        }
    }
}
