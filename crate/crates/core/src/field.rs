//! Spectral fields, action-angle coordinates, rotations and resonant monomials.
//!
//! Phases live in `[0, 2π)` and the phase of a vanishing amplitude is `0`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SpectralGrid;

pub type C64 = Complex64;

/// Amplitudes below this modulus have no well-defined phase.
pub const PHASE_FLOOR: f64 = 1e-14;

/// Complex amplitudes `v_k` in flat grid order.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralField(pub Vec<C64>);

impl SpectralField {
    pub fn zeros(n: usize) -> Self {
        SpectralField(vec![C64::new(0.0, 0.0); n])
    }

    /// Field with independent standard complex Gaussian entries, rescaled
    /// to `|v|_{h^0} = norm`.
    pub fn random<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> Self {
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let s = l2(&v);
        if s > 0.0 {
            for x in v.iter_mut() {
                *x *= norm / s;
            }
        }
        SpectralField(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// CSV row `Re, Im` per mode in flat order.
    pub fn csv_row(&self) -> String {
        let mut parts = Vec::with_capacity(2 * self.len());
        for z in &self.0 {
            parts.push(format!("{:e}", z.re));
            parts.push(format!("{:e}", z.im));
        }
        parts.join(",")
    }
}

impl std::ops::Deref for SpectralField {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl std::ops::DerefMut for SpectralField {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<Vec<C64>> for SpectralField {
    fn from(v: Vec<C64>) -> Self {
        SpectralField(v)
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Euclidean norm `|v|_{h^0}`.
pub fn l2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `I_k = ½|v_k|²`.
pub fn actions(v: &[C64]) -> Vec<f64> {
    v.iter().map(|z| 0.5 * z.norm_sqr()).collect()
}

/// `φ_k = Arg v_k ∈ [0, 2π)`, and `0` when `v_k = 0`.
pub fn phases(v: &[C64]) -> Vec<f64> {
    v.iter().map(|z| phase(*z)).collect()
}

pub fn phase(z: C64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        wrap_angle(z.im.atan2(z.re))
    }
}

/// Action-angle coordinates of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionAngleState {
    pub actions: Vec<f64>,
    pub phases: Vec<f64>,
}

impl ActionAngleState {
    pub fn of(v: &[C64]) -> Self {
        ActionAngleState {
            actions: actions(v),
            phases: phases(v),
        }
    }

    /// `v_k = √(2 I_k) e^{iφ_k}`.
    pub fn reconstruct(&self) -> SpectralField {
        self.actions
            .iter()
            .zip(&self.phases)
            .map(|(&i, &p)| C64::from_polar((2.0 * i).sqrt(), p))
            .collect::<Vec<_>>()
            .into()
    }
}

/// `Ψ_θ`: multiply each mode by `e^{iθ_k}`.
pub fn rotate(v: &[C64], theta: &[f64]) -> Result<SpectralField> {
    if theta.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: theta.len(),
        });
    }
    Ok(v.iter()
        .zip(theta)
        .map(|(z, &t)| z * C64::from_polar(1.0, t))
        .collect::<Vec<_>>()
        .into())
}

/// In-place `Ψ_{t·w}` for an integer weight vector `w` (e.g. `Λ̃`).
pub fn rotate_by_weights(v: &mut [C64], t: f64, weights: &[i64]) {
    for (z, &w) in v.iter_mut().zip(weights) {
        if w != 0 {
            *z *= C64::from_polar(1.0, t * w as f64);
        }
    }
}

/// Resonant monomial `V^s = Π v_k^{s_k⁺} Π v̄_k^{s_k⁻}`.
pub fn resonant_monomial(v: &[C64], s: &[i64]) -> Result<C64> {
    if s.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: s.len(),
        });
    }
    let mut acc = C64::new(1.0, 0.0);
    for (z, &c) in v.iter().zip(s) {
        if c > 0 {
            acc *= z.powu(c as u32);
        } else if c < 0 {
            acc *= z.conj().powu((-c) as u32);
        }
    }
    Ok(acc)
}

/// Phase combination `Φ^s = s·φ (mod 2π)`.
pub fn phase_combination(v: &[C64], s: &[i64]) -> Result<f64> {
    if s.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: s.len(),
        });
    }
    let total: f64 = v
        .iter()
        .zip(s)
        .filter(|(_, &c)| c != 0)
        .map(|(z, &c)| c as f64 * phase(*z))
        .sum();
    Ok(wrap_angle(total))
}

/// `Φ^s`, or `None` when some mode in the support of `s` is below
/// [`PHASE_FLOOR`] in modulus.
pub fn phase_combination_checked(v: &[C64], s: &[i64]) -> Option<f64> {
    let degenerate = v
        .iter()
        .zip(s)
        .any(|(z, &c)| c != 0 && z.norm() < PHASE_FLOOR);
    if degenerate {
        None
    } else {
        phase_combination(v, s).ok()
    }
}

/// `|v|_{h^p}² = Σ (λ_k ∨ 1)^p |v_k|²`, returned as the norm (not squared).
pub fn sobolev_norm(v: &[C64], grid: &SpectralGrid, p: f64) -> f64 {
    v.iter()
        .enumerate()
        .map(|(k, z)| grid.eigenvalue(k).max(1.0).powf(p) * z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Period-scaled norm `(2πL)^d Σ (|k| ∨ 1/L)^{2p} |v_k|²`, returned as the norm.
pub fn sobolev_norm_scaled(v: &[C64], grid: &SpectralGrid, p: f64) -> f64 {
    let l = grid.period();
    let vol = (TAU * l).powi(grid.dim() as i32);
    let sum: f64 = v
        .iter()
        .enumerate()
        .map(|(k, z)| grid.eigenvalue(k).sqrt().max(1.0 / l).powf(2.0 * p) * z.norm_sqr())
        .sum();
    (vol * sum).sqrt()
}

/// Default norm exponent: `⌈d/2⌉ + 1`, rounded up to an even integer.
pub fn default_norm_exponent(dim: usize) -> u32 {
    let r = dim.div_ceil(2) as u32 + 1;
    r + r % 2
}
