use crate::error::{config_err, Result};
use crate::lattice::{DampingSpec, DampingSpectrum, NoiseProfile, NoiseSpectrum, SpectralGrid};

use super::nonlinearity::GalerkinProduct;

/// Coefficients of the damped/driven equation on a fixed grid.
///
/// `rho = 0` is accepted and gives the linear (Ornstein-Uhlenbeck) model.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub grid: SpectralGrid,
    pub q: usize,
    pub rho: f64,
    pub damping_spec: DampingSpec,
    pub noise_profile: NoiseProfile,
    pub gamma: DampingSpectrum,
    pub noise: NoiseSpectrum,
    product: GalerkinProduct,
}

impl ModelParams {
    pub fn new(
        grid: SpectralGrid,
        q: usize,
        rho: f64,
        damping_spec: DampingSpec,
        noise_profile: NoiseProfile,
    ) -> Result<Self> {
        if q < 1 {
            return Err(config_err("q* must be at least 1"));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(config_err(format!("rho = {rho} must be finite and nonnegative")));
        }
        let gamma = DampingSpectrum::new(&grid, &damping_spec)?;
        let noise = NoiseSpectrum::new(&grid, &noise_profile)?;
        let product = GalerkinProduct::new(&grid, q);
        Ok(ModelParams {
            grid,
            q,
            rho,
            damping_spec,
            noise_profile,
            gamma,
            noise,
            product,
        })
    }

    /// Replace the noise amplitudes (e.g. with zeros for deterministic runs).
    pub fn with_noise(mut self, noise: NoiseSpectrum) -> Self {
        assert_eq!(noise.b.len(), self.grid.len());
        self.noise = noise;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn product(&self) -> &GalerkinProduct {
        &self.product
    }

    /// Largest integer frequency `|Λ̃·(q - l - e^k)|` a monomial of the
    /// nonlinearity can carry is `(q+1)·d·N²`; this returns the bound
    /// `(2q+2)·d·N²` used for step-size and quadrature sizing.
    pub fn max_frequency(&self) -> i64 {
        (2 * self.q as i64 + 2) * self.grid.max_eigen_int()
    }

    /// Non-fatal configuration warnings.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let d = self.grid.dim();
        if d >= 3 && (self.q as f64) >= 2.0 / (d as f64 - 2.0) {
            w.push(format!(
                "q* = {} with d = {d} is outside the well-posedness range q* < 2/(d-2) of the \
                 untruncated equation",
                self.q
            ));
        }
        w
    }
}
