//! TOML experiment configuration.
//!
//! Every section is optional and unknown keys are rejected. After
//! [`ExperimentConfig::resolve`] all defaults are filled in, and the resolved
//! file is what the CLI echoes next to its outputs.
//!
//! ```toml
//! [grid]
//! dim = 2
//! cutoff = 1
//! period = 1.0
//!
//! [model]
//! q = 1
//! rho = 1.0
//! damping = { kind = "affine", c0 = 1.0, c1 = 1.0 }
//! noise = { kind = "gaussian", amplitude = 1.0, rate = 0.5 }
//!
//! [run]
//! equation = "full"
//! nu = 0.1
//! horizon = 1.0
//! paths = 64
//! seed = 7
//!
//! [observables]
//! nonresonant = [{ modes = [[1, 0]], coeffs = [1] }]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::check::CheckOptions;
use crate::dynamics::{full_step_limit, ModelParams, StepGuard};
use crate::error::{config_err, Result};
use crate::field::SpectralField;
use crate::lattice::{DampingSpec, NoiseProfile, NoiseSpectrum, SpectralGrid, WaveIndex};
use crate::resonance::{DEFAULT_MODULE_BUDGET, DEFAULT_TUPLE_BUDGET};
use crate::stats::ladder_step;

/// Stream used for random initial fields; far from every path stream.
pub const INITIAL_FIELD_STREAM: u64 = 1 << 41;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub dim: usize,
    pub cutoff: i64,
    pub period: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            dim: 2,
            cutoff: 1,
            period: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub q: usize,
    pub rho: f64,
    pub damping: DampingSpec,
    pub noise: NoiseProfile,
    /// `false` sets every `b_k` to zero.
    pub forcing: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            q: 1,
            rho: 1.0,
            damping: DampingSpec::default(),
            noise: NoiseProfile::default(),
            forcing: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationChoice {
    Effective,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    /// Gaussian field rescaled to the given `h⁰` norm.
    Random { norm: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub equation: EquationChoice,
    pub nu: Option<f64>,
    pub ladder: Vec<f64>,
    pub horizon: f64,
    /// Defaults: `0.01` for the effective equation, the resolution limit for the full one.
    pub dt: Option<f64>,
    pub paths: usize,
    pub seed: u64,
    pub record_every: Option<usize>,
    pub initial: InitialSpec,
    pub guard: StepGuard,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            equation: EquationChoice::Effective,
            nu: None,
            ladder: vec![0.2, 0.1, 0.05],
            horizon: 1.0,
            dt: None,
            paths: 64,
            seed: 0,
            record_every: None,
            initial: InitialSpec::Zero,
            guard: StepGuard::Enforce,
        }
    }
}

/// `s = Σ coeffs[i] · e_{modes[i]}`, given by wave vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseVectorSpec {
    pub modes: Vec<Vec<i64>>,
    pub coeffs: Vec<i64>,
}

impl PhaseVectorSpec {
    pub fn to_dense(&self, grid: &SpectralGrid) -> Result<Vec<i64>> {
        if self.modes.len() != self.coeffs.len() {
            return Err(config_err("phase vector: modes and coeffs differ in length"));
        }
        let mut s = vec![0i64; grid.len()];
        for (l, &c) in self.modes.iter().zip(&self.coeffs) {
            let k = mode_index(grid, l)?;
            s[k] += c;
        }
        Ok(s)
    }
}

fn mode_index(grid: &SpectralGrid, l: &[i64]) -> Result<usize> {
    if l.len() != grid.dim() {
        return Err(config_err(format!("wave vector {l:?} must have {} components", grid.dim())));
    }
    grid.index_of(&WaveIndex::new(l))
        .ok_or_else(|| config_err(format!("wave vector {l:?} is outside the cutoff")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesSection {
    /// Tracked modes as wave vectors; empty means all.
    pub modes: Vec<Vec<i64>>,
    pub resonant: Vec<PhaseVectorSpec>,
    pub nonresonant: Vec<PhaseVectorSpec>,
    pub window_samples: usize,
    pub bootstrap_reps: usize,
    /// Shell edges for the energy spectrum; empty means unit shells.
    pub shells: Vec<f64>,
}

impl Default for ObservablesSection {
    fn default() -> Self {
        ObservablesSection {
            modes: Vec::new(),
            resonant: Vec::new(),
            nonresonant: Vec::new(),
            window_samples: 10,
            bootstrap_reps: 200,
            shells: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarySection {
    pub burn_in: f64,
    pub horizon: f64,
    pub dt: f64,
    pub record_every: usize,
    pub paths: usize,
    /// `h⁰` norm of the second, random initial condition.
    pub initial_norm: f64,
}

impl Default for StationarySection {
    fn default() -> Self {
        StationarySection {
            burn_in: 20.0,
            horizon: 200.0,
            dt: 1e-3,
            record_every: 1000,
            paths: 16,
            initial_norm: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    pub samples: usize,
    pub field_norm: f64,
    pub fd_step: f64,
    pub conservation_horizon: f64,
    pub conservation_step: f64,
    pub fft_oracle_max_modes: usize,
    /// Fault injection: drop tuple `[k, i]` from the table before checking.
    pub drop_tuple: Option<[usize; 2]>,
}

impl Default for CheckSection {
    fn default() -> Self {
        let o = CheckOptions::default();
        CheckSection {
            samples: o.samples,
            field_norm: o.field_norm,
            fd_step: o.fd_step,
            conservation_horizon: o.conservation_horizon,
            conservation_step: o.conservation_step,
            fft_oracle_max_modes: o.fft_oracle_max_modes,
            drop_tuple: None,
        }
    }
}

impl CheckSection {
    pub fn options(&self) -> CheckOptions {
        CheckOptions {
            samples: self.samples,
            field_norm: self.field_norm,
            fd_step: self.fd_step,
            conservation_horizon: self.conservation_horizon,
            conservation_step: self.conservation_step,
            fft_oracle_max_modes: self.fft_oracle_max_modes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonancesSection {
    pub tuple_budget: u64,
    /// ℓ¹ bound of the resonance module to list; 0 skips it.
    pub module_order: usize,
    pub module_budget: u64,
}

impl Default for ResonancesSection {
    fn default() -> Self {
        ResonancesSection {
            tuple_budget: DEFAULT_TUPLE_BUDGET as u64,
            module_order: 0,
            module_budget: DEFAULT_MODULE_BUDGET as u64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    pub run: RunSection,
    pub observables: ObservablesSection,
    pub stationary: StationarySection,
    pub check: CheckSection,
    pub resonances: ResonancesSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.grid.dim, self.grid.cutoff, self.grid.period)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let p = ModelParams::new(self.grid()?, m.q, m.rho, m.damping, m.noise)?;
        Ok(if m.forcing {
            p
        } else {
            let silent = NoiseSpectrum::silent(&p.grid);
            p.with_noise(silent)
        })
    }

    /// Fill in defaults that depend on other values and validate everything
    /// that can be checked before any compute.
    pub fn resolve(mut self) -> Result<Self> {
        let params = self.params()?;
        let run = &mut self.run;
        if !(run.horizon > 0.0) || !run.horizon.is_finite() {
            return Err(config_err("run.horizon must be positive"));
        }
        if run.paths == 0 {
            return Err(config_err("run.paths must be at least 1"));
        }
        if let InitialSpec::Random { norm } = run.initial {
            if !(norm >= 0.0) || !norm.is_finite() {
                return Err(config_err("run.initial.norm must be nonnegative"));
            }
        }
        if run.ladder.iter().any(|&nu| !(nu > 0.0)) || run.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(config_err("run.ladder must be positive and strictly decreasing"));
        }
        match run.equation {
            EquationChoice::Effective => {
                run.nu = None;
                if run.dt.is_none() {
                    let steps = (run.horizon / 0.01).ceil().max(1.0);
                    run.dt = Some(run.horizon / steps);
                }
            }
            EquationChoice::Full => {
                let nu = run.nu.ok_or_else(|| config_err("run.nu is required for the full equation"))?;
                if !(nu > 0.0) || !nu.is_finite() {
                    return Err(config_err("run.nu must be positive"));
                }
                if run.dt.is_none() {
                    run.dt = Some(ladder_step(&params, nu, run.horizon).0);
                }
                let dt = run.dt.unwrap();
                if run.guard == StepGuard::Enforce && dt > full_step_limit(&params, nu) * (1.0 + 1e-12) {
                    return Err(config_err(format!(
                        "run.dt = {dt} is above the resolution limit {} for nu = {nu}",
                        full_step_limit(&params, nu)
                    )));
                }
            }
        }
        let dt = run.dt.unwrap();
        let steps = (run.horizon / dt).round();
        if !(dt > 0.0) || (steps * dt - run.horizon).abs() > 1e-9 * run.horizon.max(1.0) {
            return Err(config_err(format!("run.horizon = {} must be a multiple of run.dt = {dt}", run.horizon)));
        }
        if run.guard == StepGuard::Enforce && dt * params.gamma.max() >= 1.0 {
            return Err(config_err(format!("run.dt = {dt} violates dt * max gamma < 1")));
        }
        if run.record_every.is_none() {
            run.record_every = Some(((steps as usize) / 100).max(1));
        }

        let obs = &self.observables;
        for l in &obs.modes {
            mode_index(&params.grid, l)?;
        }
        let lam = params.grid.eigen_int();
        let dot = |s: &[i64]| s.iter().zip(lam).map(|(a, b)| a * b).sum::<i64>();
        for spec in &obs.resonant {
            let s = spec.to_dense(&params.grid)?;
            if dot(&s) != 0 {
                return Err(config_err(format!("resonant phase vector {spec:?} has Λ·s ≠ 0")));
            }
        }
        for spec in &obs.nonresonant {
            let s = spec.to_dense(&params.grid)?;
            if dot(&s) == 0 {
                return Err(config_err(format!("non-resonant phase vector {spec:?} has Λ·s = 0")));
            }
        }
        if obs.window_samples == 0 || obs.bootstrap_reps < 2 {
            return Err(config_err("observables.window_samples ≥ 1 and bootstrap_reps ≥ 2 are required"));
        }

        let st = &self.stationary;
        if !(st.burn_in >= 0.0 && st.burn_in < st.horizon) {
            return Err(config_err("stationary.burn_in must lie in [0, horizon)"));
        }
        if st.paths == 0 || st.record_every == 0 {
            return Err(config_err("stationary.paths and record_every must be positive"));
        }
        let s_steps = (st.horizon / st.dt).round();
        if !(st.dt > 0.0) || (s_steps * st.dt - st.horizon).abs() > 1e-9 * st.horizon.max(1.0) {
            return Err(config_err("stationary.horizon must be a multiple of stationary.dt"));
        }
        if st.dt * params.gamma.max() >= 1.0 {
            return Err(config_err("stationary.dt violates dt * max gamma < 1"));
        }
        let ck = &self.check;
        if ck.samples == 0 || !(ck.fd_step > 0.0) || !(ck.conservation_step > 0.0) {
            return Err(config_err("check.samples, fd_step and conservation_step must be positive"));
        }
        Ok(self)
    }

    /// Flat indices of the tracked modes.
    pub fn tracked_modes(&self, grid: &SpectralGrid) -> Result<Vec<usize>> {
        if self.observables.modes.is_empty() {
            return Ok((0..grid.len()).collect());
        }
        self.observables.modes.iter().map(|l| mode_index(grid, l)).collect()
    }

    pub fn resonant_vectors(&self, grid: &SpectralGrid) -> Result<Vec<Vec<i64>>> {
        self.observables.resonant.iter().map(|s| s.to_dense(grid)).collect()
    }

    pub fn nonresonant_vectors(&self, grid: &SpectralGrid) -> Result<Vec<Vec<i64>>> {
        self.observables.nonresonant.iter().map(|s| s.to_dense(grid)).collect()
    }

    pub fn initial_field(&self, spec: InitialSpec, n: usize) -> SpectralField {
        match spec {
            InitialSpec::Zero => SpectralField::zeros(n),
            InitialSpec::Random { norm } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.run.seed);
                rng.set_stream(INITIAL_FIELD_STREAM);
                SpectralField::random(n, norm, &mut rng)
            }
        }
    }
}
