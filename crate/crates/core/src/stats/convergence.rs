//! The `ν → 0` ladder experiment: full-equation ensembles at decreasing `ν`
//! compared in law with one effective-equation ensemble.

use serde::Serialize;

use crate::dynamics::{ModelParams, ObservableSpec, StepGuard};
use crate::error::{config_err, Result};
use crate::field::C64;
use crate::resonance::ResonanceTable;

use super::ensemble::{run_ensemble, Ensemble, EquationKind};
use super::laws::{ks_bootstrap_se, ks_distance, kuiper_distance, kuiper_uniformity, Observable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSetup {
    /// Strictly decreasing, at least three values.
    pub ladder: Vec<f64>,
    pub paths: usize,
    pub horizon: f64,
    pub master_seed: u64,
    /// Flat indices of the tracked modes.
    pub modes: Vec<usize>,
    pub resonant: Vec<Vec<i64>>,
    pub nonresonant: Vec<Vec<i64>>,
    /// Recorded samples per path inside `[T/2, T]`.
    pub window_samples: usize,
    pub bootstrap_reps: usize,
    /// Step of the effective run; defaults to the full step at the smallest `ν`.
    pub effective_dt: Option<f64>,
}

impl ConvergenceSetup {
    fn validate(&self, params: &ModelParams) -> Result<()> {
        if self.ladder.len() < 3 {
            return Err(config_err("the ν ladder needs at least three values"));
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) || self.ladder.iter().any(|&nu| !(nu > 0.0)) {
            return Err(config_err("the ν ladder must be positive and strictly decreasing"));
        }
        if self.paths < 2 {
            return Err(config_err("an ensemble needs at least two paths"));
        }
        if let Some(&k) = self.modes.iter().find(|&&k| k >= params.n()) {
            return Err(config_err(format!("tracked mode {k} is outside the grid")));
        }
        for s in self.resonant.iter().chain(&self.nonresonant) {
            if s.len() != params.n() {
                return Err(config_err("phase vectors must have one entry per mode"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeDistance {
    pub k: usize,
    pub wave: Vec<i64>,
    /// KS between full and effective laws of `I_k(T)`.
    pub ks_at_t: f64,
    /// Bootstrap standard error of `ks_at_t`.
    pub ks_se: f64,
    /// KS between the laws of `I_k` pooled over `[T/2, T]`.
    pub ks_mollified: f64,
    /// Ensemble mean of `max_τ |∫ 𝓡_k|` and its standard error.
    pub residual_mean: f64,
    pub residual_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDistance {
    pub s: Vec<i64>,
    /// Two-sample Kuiper distance of the mollified laws of `Φ^s`.
    pub distance: f64,
    pub missing_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Uniformity {
    pub s: Vec<i64>,
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
    pub passes_95: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuEntry {
    pub nu: f64,
    pub dt: f64,
    pub flagged: usize,
    pub missing_fraction: f64,
    pub modes: Vec<ModeDistance>,
    pub resonant: Vec<PhaseDistance>,
    pub nonresonant: Vec<Uniformity>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub setup: ConvergenceSetup,
    pub effective_dt: f64,
    pub effective_flagged: usize,
    pub effective_missing_fraction: f64,
    pub entries: Vec<NuEntry>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per `(ν, observable, statistic)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu,observable,statistic,value,se\n");
        let sv = |s: &[i64]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        for e in &self.entries {
            for m in &e.modes {
                let w = sv(&m.wave);
                out += &format!("{},I[{}],ks_at_t,{:e},{:e}\n", e.nu, w, m.ks_at_t, m.ks_se);
                out += &format!("{},I[{}],ks_mollified,{:e},\n", e.nu, w, m.ks_mollified);
                out += &format!("{},I[{}],residual,{:e},{:e}\n", e.nu, w, m.residual_mean, m.residual_se);
            }
            for r in &e.resonant {
                out += &format!("{},Phi[{}],kuiper_distance,{:e},\n", e.nu, sv(&r.s), r.distance);
            }
            for u in &e.nonresonant {
                out += &format!("{},phase[{}],kuiper_uniform,{:e},{:e}\n", e.nu, sv(&u.s), u.statistic, u.p_value);
            }
        }
        out
    }
}

fn record_every(steps: usize, window_samples: usize) -> usize {
    (steps / 2 / window_samples.max(1)).max(1)
}

/// Full step for `ν`: the largest `T/n` below the resolution limit.
pub fn ladder_step(params: &ModelParams, nu: f64, horizon: f64) -> (f64, usize) {
    let limit = crate::dynamics::full_step_limit(params, nu);
    let steps = (horizon / limit).ceil().max(1.0) as usize;
    (horizon / steps as f64, steps)
}

pub fn convergence_report(
    params: &ModelParams,
    table: &ResonanceTable,
    v0: &[C64],
    setup: &ConvergenceSetup,
) -> Result<ConvergenceReport> {
    setup.validate(params)?;
    let horizon = setup.horizon;
    let obs_for = |steps: usize| ObservableSpec {
        resonant: setup.resonant.clone(),
        nonresonant: setup.nonresonant.clone(),
        record_every: record_every(steps, setup.window_samples),
        snapshots: false,
    };

    let finest = *setup.ladder.last().unwrap();
    let eff_dt = match setup.effective_dt {
        Some(dt) => dt,
        None => ladder_step(params, finest, horizon).0,
    };
    let eff_steps = (horizon / eff_dt).round() as usize;
    let eff = run_ensemble(
        params,
        table,
        EquationKind::Effective,
        v0,
        setup.paths,
        horizon,
        eff_dt,
        setup.master_seed,
        &obs_for(eff_steps),
        StepGuard::Enforce,
    )?;

    let mut entries = Vec::with_capacity(setup.ladder.len());
    for (i, &nu) in setup.ladder.iter().enumerate() {
        let (dt, steps) = ladder_step(params, nu, horizon);
        let full = run_ensemble(
            params,
            table,
            EquationKind::Full { nu },
            v0,
            setup.paths,
            horizon,
            dt,
            setup.master_seed,
            &obs_for(steps),
            StepGuard::Enforce,
        )?;
        entries.push(compare(params, setup, &eff, &full, nu, dt, i as u64)?);
    }
    Ok(ConvergenceReport {
        setup: setup.clone(),
        effective_dt: eff_dt,
        effective_flagged: eff.flagged(),
        effective_missing_fraction: eff.missing_fraction(),
        entries,
    })
}

fn compare(
    params: &ModelParams,
    setup: &ConvergenceSetup,
    eff: &Ensemble,
    full: &Ensemble,
    nu: f64,
    dt: f64,
    rung: u64,
) -> Result<NuEntry> {
    let (t0, t1) = (0.5 * setup.horizon, setup.horizon);
    let mut modes = Vec::with_capacity(setup.modes.len());
    for &k in &setup.modes {
        let obs = Observable::Action(k);
        let (a, b) = (full.final_law(obs)?, eff.final_law(obs)?);
        let ks_at_t = ks_distance(&a, &b)?;
        let boot_seed = setup.master_seed ^ (rung << 32) ^ k as u64;
        let ks_se = ks_bootstrap_se(&a, &b, setup.bootstrap_reps, boot_seed)?;
        let ks_mollified = ks_distance(&full.window_law(obs, t0, t1)?, &eff.window_law(obs, t0, t1)?)?;
        let (residual_mean, residual_se) = full.residual_mean(k).unwrap_or((0.0, 0.0));
        modes.push(ModeDistance {
            k,
            wave: params.grid.mode(k).0[..params.grid.dim()].to_vec(),
            ks_at_t,
            ks_se,
            ks_mollified,
            residual_mean,
            residual_se,
        });
    }
    let n_res = setup.resonant.len();
    let mut resonant = Vec::with_capacity(n_res);
    for (p, s) in setup.resonant.iter().enumerate() {
        let obs = Observable::Phase(p);
        let a = full.window_law(obs, t0, t1)?;
        let b = eff.window_law(obs, t0, t1)?;
        let distance = if a.is_empty() || b.is_empty() { 1.0 } else { kuiper_distance(&a, &b)? };
        resonant.push(PhaseDistance {
            s: s.clone(),
            distance,
            missing_fraction: a.missing_fraction(),
        });
    }
    let mut nonresonant = Vec::with_capacity(setup.nonresonant.len());
    for (p, s) in setup.nonresonant.iter().enumerate() {
        let law = full.window_law(Observable::Phase(n_res + p), t0, t1)?;
        let r = kuiper_uniformity(&law)?;
        nonresonant.push(Uniformity {
            s: s.clone(),
            statistic: r.statistic,
            n: r.n,
            p_value: r.p_value,
            passes_95: r.passes_95(),
        });
    }
    Ok(NuEntry {
        nu,
        dt,
        flagged: full.flagged(),
        missing_fraction: full.missing_fraction(),
        modes,
        resonant,
        nonresonant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::lattice::{DampingSpec, NoiseProfile, SpectralGrid};
    use crate::resonance::enumerate_resonant_tuples;

    fn setup_params(rho: f64) -> (ModelParams, ResonanceTable) {
        let g = SpectralGrid::new(1, 1, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, 1).unwrap();
        let p = ModelParams::new(g, 1, rho, DampingSpec::default(), NoiseProfile::default()).unwrap();
        (p, t)
    }

    fn small_setup(n: usize) -> ConvergenceSetup {
        let mut s = vec![0; n];
        s[2] = 1;
        ConvergenceSetup {
            ladder: vec![0.4, 0.2, 0.1],
            paths: 40,
            horizon: 0.5,
            master_seed: 3,
            modes: (0..n).collect(),
            resonant: vec![],
            nonresonant: vec![s],
            window_samples: 5,
            bootstrap_reps: 50,
            effective_dt: None,
        }
    }

    #[test]
    fn rejects_bad_ladders() {
        let (p, t) = setup_params(1.0);
        let v0 = SpectralField::zeros(p.n());
        let mut s = small_setup(p.n());
        s.ladder = vec![0.1, 0.2, 0.05];
        assert!(convergence_report(&p, &t, &v0, &s).is_err());
        s.ladder = vec![0.2, 0.1];
        assert!(convergence_report(&p, &t, &v0, &s).is_err());
    }

    #[test]
    fn linear_case_has_no_residual_and_is_deterministic() {
        let (p, t) = setup_params(0.0);
        let v0 = SpectralField::zeros(p.n());
        let s = small_setup(p.n());
        let r = convergence_report(&p, &t, &v0, &s).unwrap();
        for e in &r.entries {
            assert_eq!(e.flagged, 0);
            for m in &e.modes {
                assert_eq!(m.residual_mean, 0.0);
                // same law, independent noise: KS at the Monte-Carlo floor
                assert!(m.ks_at_t < 1.63 * (2.0 / s.paths as f64).sqrt());
            }
        }
        let again = convergence_report(&p, &t, &v0, &s).unwrap();
        assert_eq!(r.to_json().unwrap(), again.to_json().unwrap());
        assert_eq!(r.to_csv(), again.to_csv());
        assert!(r.to_csv().starts_with("nu,observable,statistic,value,se\n"));
    }
}
