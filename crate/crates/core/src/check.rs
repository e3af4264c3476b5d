//! Invariant suite run by `rnls check`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    averaged_action_drift, averaged_action_drift_quadrature, hamiltonian_res, integrate_resonant_flow, nonlinearity,
    nonlinearity_direct, resonant_field_direct, resonant_field_quadrature, ModelParams,
};
use crate::error::Result;
use crate::field::{rotate, SpectralField, C64};
use crate::resonance::ResonanceTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckOptions {
    /// Random fields per check.
    pub samples: usize,
    /// `h⁰` norm of the random fields.
    pub field_norm: f64,
    pub fd_step: f64,
    pub conservation_horizon: f64,
    pub conservation_step: f64,
    /// Skip the direct-convolution oracle of the FFT product above this many modes.
    pub fft_oracle_max_modes: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: 20,
            field_norm: 1.0,
            fd_step: 1e-5,
            conservation_horizon: 1.0,
            conservation_step: 1e-3,
            fft_oracle_max_modes: 125,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed error.
    pub error: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// `|a - b| / |b|`, or `|a - b|` when `b = 0`.
pub fn relative_error(a: &[C64], b: &[C64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `iρ (∂_x H^res + i ∂_y H^res)` per mode by central differences.
pub fn resonant_gradient_fd(v: &[C64], table: &ResonanceTable, rho: f64, step: f64) -> SpectralField {
    let mut w = v.to_vec();
    let mut out = SpectralField::zeros(v.len());
    for k in 0..v.len() {
        let mut partial = |delta: C64| {
            w[k] = v[k] + delta;
            let up = hamiltonian_res(&w, table);
            w[k] = v[k] - delta;
            let down = hamiltonian_res(&w, table);
            w[k] = v[k];
            (up - down) / (2.0 * step)
        };
        let dx = partial(C64::new(step, 0.0));
        let dy = partial(C64::new(0.0, step));
        out[k] = C64::new(0.0, rho) * C64::new(dx, dy);
    }
    out
}

struct Worst {
    name: &'static str,
    tolerance: f64,
    error: f64,
}

impl Worst {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Worst { name, tolerance, error: 0.0 }
    }

    fn see(&mut self, e: f64) {
        // NaN must fail the check
        if !(e <= self.error) {
            self.error = e;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            passed: self.error <= self.tolerance,
            error: self.error,
            tolerance: self.tolerance,
        }
    }
}

/// Run every invariant on random fields drawn from `seed`.
pub fn run_checks(params: &ModelParams, table: &ResonanceTable, opts: &CheckOptions, seed: u64) -> Result<CheckReport> {
    let grid = &params.grid;
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<SpectralField> = (0..opts.samples.max(1))
        .map(|_| SpectralField::random(n, opts.field_norm, &mut rng))
        .collect();
    let mut checks = Vec::new();

    let mut table_ok = Worst::new("table_resonance_conditions", 0.0);
    table_ok.see(if table.verify(grid) && table.matches(grid, params.q) { 0.0 } else { 1.0 });
    checks.push(table_ok.finish());

    let mut oracle = Worst::new("oracle_equivalence", 1e-12);
    for v in &fields {
        let d = resonant_field_direct(v, table, params)?;
        let q = resonant_field_quadrature(v, params);
        oracle.see(relative_error(&d, &q));
    }
    checks.push(oracle.finish());

    if n <= opts.fft_oracle_max_modes {
        let mut fft = Worst::new("fft_product_oracle", 1e-12);
        for v in fields.iter().take(5) {
            fft.see(relative_error(&nonlinearity(v, params), &nonlinearity_direct(v, params)));
        }
        checks.push(fft.finish());
    }

    let mut grad = Worst::new("hamiltonian_gradient", 1e-6);
    for v in &fields {
        let fd = resonant_gradient_fd(v, table, params.rho, opts.fd_step);
        let r0 = resonant_field_direct(v, table, params)?;
        grad.see(relative_error(&fd, &r0));
    }
    checks.push(grad.finish());

    let mut sym = Worst::new("symmetry_equivariance", 1e-12);
    let lam: Vec<f64> = grid.eigen_int().iter().map(|&l| l as f64).collect();
    let mut generators: Vec<Vec<f64>> = vec![vec![1.0; n], lam];
    for axis in 0..grid.dim() {
        generators.push((0..n).map(|k| grid.mode(k).0[axis] as f64).collect());
    }
    for (i, v) in fields.iter().enumerate() {
        let t = 0.37 + 1.91 * i as f64;
        for g in &generators {
            let theta: Vec<f64> = g.iter().map(|x| t * x).collect();
            let lhs = rotate(&resonant_field_direct(v, table, params)?, &theta)?;
            let rhs = resonant_field_direct(&rotate(v, &theta)?, table, params)?;
            sym.see(relative_error(&lhs, &rhs));
        }
    }
    checks.push(sym.finish());

    let mut drift = Worst::new("averaged_drift_identity", 1e-12);
    for v in &fields {
        let a = averaged_action_drift(v, table, params)?;
        let b = averaged_action_drift_quadrature(v, params);
        let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        drift.see(err / scale);
    }
    checks.push(drift.finish());

    let mut cons = Worst::new("conservation", 1e-8);
    let flow = integrate_resonant_flow(&fields[0], params, table, opts.conservation_horizon, opts.conservation_step, 1)?;
    if flow.is_flagged() {
        cons.see(f64::INFINITY);
    }
    let c0 = &flow.conserved[0];
    let mut initial = vec![c0.h0, c0.h1, c0.h_res];
    initial.extend(&c0.momentum);
    for c in &flow.conserved {
        let mut now = vec![c.h0, c.h1, c.h_res];
        now.extend(&c.momentum);
        for (a, b) in now.iter().zip(&initial) {
            cons.see((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    checks.push(cons.finish());

    if grid.dim() == 1 && params.q == 1 {
        let mut closed = Worst::new("one_dimensional_closed_form", 1e-12);
        for v in &fields {
            let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let expect: Vec<C64> = v
                .iter()
                .map(|&z| C64::new(0.0, -params.rho) * (2.0 * total - z.norm_sqr()) * z)
                .collect();
            closed.see(relative_error(&resonant_field_direct(v, table, params)?, &expect));
        }
        checks.push(closed.finish());
    }

    Ok(CheckReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DampingSpec, NoiseProfile, SpectralGrid};
    use crate::resonance::enumerate_resonant_tuples;

    fn setup(d: usize, n: i64, q: usize, rho: f64) -> (ModelParams, ResonanceTable) {
        let g = SpectralGrid::new(d, n, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, q).unwrap();
        let p = ModelParams::new(g, q, rho, DampingSpec::default(), NoiseProfile::default()).unwrap();
        (p, t)
    }

    fn quick() -> CheckOptions {
        CheckOptions {
            samples: 4,
            conservation_horizon: 0.1,
            ..Default::default()
        }
    }

    #[test]
    fn default_suite_passes() {
        for (d, n, q) in [(1, 3, 1), (2, 1, 1), (2, 1, 2)] {
            let (p, t) = setup(d, n, q, 1.0);
            let r = run_checks(&p, &t, &quick(), 1).unwrap();
            assert!(r.passed, "{:?}", r.checks);
        }
    }

    #[test]
    fn linear_gradient_is_trivial() {
        let (p, t) = setup(2, 1, 1, 0.0);
        let r = run_checks(&p, &t, &quick(), 2).unwrap();
        let g = r.checks.iter().find(|c| c.name == "hamiltonian_gradient").unwrap();
        assert!(g.passed);
        assert_eq!(g.error, 0.0);
    }

    #[test]
    fn corrupted_table_is_named() {
        let (p, t) = setup(2, 1, 1, 1.0);
        let bad = t.without_tuple(4, 0);
        let r = run_checks(&p, &bad, &quick(), 3).unwrap();
        assert!(!r.passed);
        assert!(r.failed().contains(&"oracle_equivalence"));
    }
}
