//! Galerkin truncation of `|u|^{2q} u` in Fourier coefficients.
//!
//! The product of trigonometric polynomials of degree `N` has degree
//! `(2q+1)N`, so an FFT grid with `P ≥ (2q+2)N + 1` points per axis computes
//! the retained coefficients `|l|_∞ ≤ N` without aliasing. We use
//! `P = (q+1)(2N+1)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::field::{SpectralField, C64};
use crate::lattice::{SpectralGrid, WaveIndex};

use super::params::ModelParams;

/// Zero-padded FFT evaluator for the Galerkin-truncated power `|u|^{2q} u`.
#[derive(Clone)]
pub struct GalerkinProduct {
    dim: usize,
    q: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    grid_to_padded: Vec<usize>,
}

impl std::fmt::Debug for GalerkinProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GalerkinProduct")
            .field("dim", &self.dim)
            .field("q", &self.q)
            .field("size", &self.size)
            .finish()
    }
}

impl GalerkinProduct {
    pub fn new(grid: &SpectralGrid, q: usize) -> Self {
        let size = (q + 1) * grid.side();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let dim = grid.dim();
        let grid_to_padded = grid
            .modes()
            .iter()
            .map(|l| {
                (0..dim).fold(0usize, |acc, axis| {
                    acc * size + l.0[axis].rem_euclid(size as i64) as usize
                })
            })
            .collect();
        GalerkinProduct {
            dim,
            q,
            size,
            forward,
            inverse,
            grid_to_padded,
        }
    }

    /// Points per axis of the padded grid.
    pub fn padded_size(&self) -> usize {
        self.size
    }

    fn transform(&self, buf: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let p = self.size;
        let mut line = vec![C64::new(0.0, 0.0); p];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = p.pow((self.dim - 1 - axis) as u32);
            let outer = buf.len() / (p * stride);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * p * stride + inner;
                    for (j, x) in line.iter_mut().enumerate() {
                        *x = buf[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, x) in line.iter().enumerate() {
                        buf[base + j * stride] = *x;
                    }
                }
            }
        }
    }

    /// Fourier coefficients of `|u|^{2q} u` on the grid, where `u = Σ v_k e^{ik·x}`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let total = self.size.pow(self.dim as u32);
        let mut buf = vec![C64::new(0.0, 0.0); total];
        for (z, &p) in v.iter().zip(&self.grid_to_padded) {
            buf[p] = *z;
        }
        self.transform(&mut buf, &self.inverse);
        let q = self.q as i32;
        for z in buf.iter_mut() {
            *z *= z.norm_sqr().powi(q);
        }
        self.transform(&mut buf, &self.forward);
        let scale = 1.0 / total as f64;
        self.grid_to_padded.iter().map(|&p| buf[p] * scale).collect()
    }
}

/// `P⁰(v) = -iρ · (Galerkin-truncated |u|^{2q} u)`, evaluated with the padded FFT.
pub fn nonlinearity(v: &[C64], params: &ModelParams) -> SpectralField {
    let w = params.product().apply(v);
    let f = C64::new(0.0, -params.rho);
    w.into_iter().map(|z| f * z).collect::<Vec<_>>().into()
}

/// Galerkin-truncated `|u|^{2q} u` by repeated exact lattice convolution.
///
/// Independent of the FFT path; cost grows with the support of the partial
/// products, so it is meant for small grids.
pub fn galerkin_power_direct(v: &[C64], grid: &SpectralGrid, q: usize) -> Vec<C64> {
    let base: BTreeMap<WaveIndex, C64> = grid
        .modes()
        .iter()
        .zip(v)
        .map(|(l, z)| (*l, *z))
        .collect();
    let conj: BTreeMap<WaveIndex, C64> = grid
        .modes()
        .iter()
        .zip(v)
        .map(|(l, z)| (WaveIndex::default() - *l, z.conj()))
        .collect();
    let convolve = |a: &BTreeMap<WaveIndex, C64>, b: &BTreeMap<WaveIndex, C64>| {
        let mut out: BTreeMap<WaveIndex, C64> = BTreeMap::new();
        for (ka, za) in a {
            for (kb, zb) in b {
                *out.entry(*ka + *kb).or_insert(C64::new(0.0, 0.0)) += za * zb;
            }
        }
        out
    };
    let mut acc = base.clone();
    for _ in 0..q {
        acc = convolve(&acc, &base);
        acc = convolve(&acc, &conj);
    }
    grid.modes()
        .iter()
        .map(|l| acc.get(l).copied().unwrap_or(C64::new(0.0, 0.0)))
        .collect()
}

/// `P⁰` through [`galerkin_power_direct`]; the oracle for [`nonlinearity`].
pub fn nonlinearity_direct(v: &[C64], params: &ModelParams) -> SpectralField {
    let f = C64::new(0.0, -params.rho);
    galerkin_power_direct(v, &params.grid, params.q)
        .into_iter()
        .map(|z| f * z)
        .collect::<Vec<_>>()
        .into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DampingSpec, NoiseProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(d: usize, n: i64, q: usize) -> ModelParams {
        let g = SpectralGrid::new(d, n, 1.0).unwrap();
        ModelParams::new(g, q, 1.3, DampingSpec::default(), NoiseProfile::default()).unwrap()
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
        num / den.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_field() {
        let p = params(2, 2, 1);
        let v = SpectralField::zeros(p.n());
        assert!(nonlinearity(&v, &p).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_mode_cubic() {
        let p = params(1, 3, 1);
        let mut v = SpectralField::zeros(p.n());
        let c = C64::new(0.7, -0.4);
        v[5] = c;
        let out = nonlinearity(&v, &p);
        let expect = C64::new(0.0, -p.rho) * c.norm_sqr() * c;
        assert!((out[5] - expect).norm() < 1e-14);
        for (k, z) in out.iter().enumerate() {
            if k != 5 {
                assert!(z.norm() < 1e-14);
            }
        }
        let direct = nonlinearity_direct(&v, &p);
        assert!((direct[5] - expect).norm() < 1e-15);
    }

    #[test]
    fn fft_matches_direct_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (d, n, q) in [(1, 1, 1), (1, 2, 1), (1, 2, 2), (2, 1, 1), (2, 2, 1), (2, 1, 2), (2, 2, 2), (3, 1, 1)] {
            let p = params(d, n, q);
            for _ in 0..5 {
                let v = SpectralField::random(p.n(), 1.7, &mut rng);
                let a = nonlinearity(&v, &p);
                let b = nonlinearity_direct(&v, &p);
                assert!(rel_err(&a, &b) <= 1e-12, "d={d} N={n} q={q}: {}", rel_err(&a, &b));
            }
        }
    }

    #[test]
    fn padding_is_sufficient() {
        let g = SpectralGrid::new(2, 3, 1.0).unwrap();
        for q in 1..4 {
            let gp = GalerkinProduct::new(&g, q);
            assert!(gp.padded_size() as i64 >= (2 * q as i64 + 2) * 3 + 1);
        }
    }
}
