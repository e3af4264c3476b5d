//! Truncated Fourier lattice on the torus of period `2πL`.
//!
//! Modes are the integer vectors `l` with `|l|_∞ ≤ N` (a cube, not a ball),
//! ordered lexicographically. The wave vector is `k = l / L` and the
//! Laplacian eigenvalue is `λ = |l|² / L²`. Internally only the integer
//! eigenvalue `λ̃ = |l|²` is used; every resonance decision is made on it.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Integer lattice vector. Components past the grid dimension are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveIndex(pub [i64; MAX_DIM]);

impl WaveIndex {
    pub fn new(comps: &[i64]) -> Self {
        assert!(comps.len() <= MAX_DIM, "at most {MAX_DIM} components");
        let mut l = [0; MAX_DIM];
        l[..comps.len()].copy_from_slice(comps);
        WaveIndex(l)
    }

    /// Integer eigenvalue `λ̃ = Σ l_i²`.
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl std::ops::Add for WaveIndex {
    type Output = WaveIndex;
    fn add(self, rhs: WaveIndex) -> WaveIndex {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        WaveIndex(out)
    }
}

impl std::ops::Sub for WaveIndex {
    type Output = WaveIndex;
    fn sub(self, rhs: WaveIndex) -> WaveIndex {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        WaveIndex(out)
    }
}

/// The truncated lattice `{ l ∈ Z^d : |l|_∞ ≤ N }` with a fixed flat ordering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralGrid {
    dim: usize,
    cutoff: i64,
    period: f64,
    modes: Vec<WaveIndex>,
    eigen_int: Vec<i64>,
}

impl SpectralGrid {
    pub fn new(dim: usize, cutoff: i64, period: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(config_err(format!("dimension d = {dim} outside 1..={MAX_DIM}")));
        }
        if cutoff < 1 {
            return Err(config_err(format!("cutoff N = {cutoff} must be at least 1")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(config_err(format!("period L = {period} must be positive")));
        }
        let side = (2 * cutoff + 1) as usize;
        let n = side.pow(dim as u32);
        let mut modes = Vec::with_capacity(n);
        for flat in 0..n {
            let mut rem = flat;
            let mut l = [0i64; MAX_DIM];
            for axis in (0..dim).rev() {
                l[axis] = (rem % side) as i64 - cutoff;
                rem /= side;
            }
            modes.push(WaveIndex(l));
        }
        let eigen_int = modes.iter().map(WaveIndex::norm_sq).collect();
        Ok(SpectralGrid {
            dim,
            cutoff,
            period,
            modes,
            eigen_int,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of modes, `(2N+1)^d`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn side(&self) -> usize {
        (2 * self.cutoff + 1) as usize
    }

    pub fn modes(&self) -> &[WaveIndex] {
        &self.modes
    }

    pub fn mode(&self, flat: usize) -> WaveIndex {
        self.modes[flat]
    }

    /// Flat index of `l`, or `None` when `l` lies outside the cutoff.
    pub fn index_of(&self, l: &WaveIndex) -> Option<usize> {
        let side = self.side() as i64;
        let mut flat = 0i64;
        for axis in 0..MAX_DIM {
            let c = l.0[axis];
            if axis >= self.dim {
                if c != 0 {
                    return None;
                }
                continue;
            }
            if c.abs() > self.cutoff {
                return None;
            }
            flat = flat * side + (c + self.cutoff);
        }
        Some(flat as usize)
    }

    /// Flat index of the zero mode.
    pub fn zero_index(&self) -> usize {
        self.index_of(&WaveIndex::default()).expect("zero mode is always in the grid")
    }

    /// Integer eigenvalues `λ̃_k = |l|²` in flat order.
    pub fn eigen_int(&self) -> &[i64] {
        &self.eigen_int
    }

    /// Largest integer eigenvalue on the grid, `d·N²`.
    pub fn max_eigen_int(&self) -> i64 {
        self.dim as i64 * self.cutoff * self.cutoff
    }

    /// Physical eigenvalue `λ_k = λ̃_k / L²`.
    pub fn eigenvalue(&self, flat: usize) -> f64 {
        laplacian_eigenvalue(&self.modes[flat], self.period)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.eigenvalue(i)).collect()
    }

    /// Physical wave vector component `k_axis = l_axis / L`.
    pub fn wave_component(&self, flat: usize, axis: usize) -> f64 {
        self.modes[flat].0[axis] as f64 / self.period
    }

    /// Distinct integer eigenvalues in increasing order.
    pub fn shells(&self) -> Vec<i64> {
        let mut s = self.eigen_int.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}

impl Default for WaveIndex {
    fn default() -> Self {
        WaveIndex([0; MAX_DIM])
    }
}

/// Physical Laplacian eigenvalue `|l|² / L²`.
pub fn laplacian_eigenvalue(l: &WaveIndex, period: f64) -> f64 {
    l.norm_sq() as f64 / (period * period)
}

/// The damping function `f` with `γ_k = f(λ_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSpec {
    /// `f(λ) = c0 + c1·λ`.
    Affine { c0: f64, c1: f64 },
    /// `f(λ) = c0 + λ^p`, with `p ≥ 1` so that `f` grows at least linearly.
    Power { c0: f64, p: f64 },
}

impl Default for DampingSpec {
    fn default() -> Self {
        DampingSpec::Affine { c0: 1.0, c1: 1.0 }
    }
}

impl DampingSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DampingSpec::Affine { c0, c1 } => {
                if !(c0 > 0.0 && c1 > 0.0) || !c0.is_finite() || !c1.is_finite() {
                    return Err(config_err(format!(
                        "affine damping needs c0 > 0 and c1 > 0 (got c0 = {c0}, c1 = {c1})"
                    )));
                }
            }
            DampingSpec::Power { c0, p } => {
                if !(c0 > 0.0) || !c0.is_finite() {
                    return Err(config_err(format!("power damping needs c0 > 0 (got {c0})")));
                }
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(config_err(format!(
                        "power damping needs p >= 1 for at least linear growth (got {p})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match *self {
            DampingSpec::Affine { c0, c1 } => c0 + c1 * lambda,
            DampingSpec::Power { c0, p } => c0 + lambda.powf(p),
        }
    }
}

/// `γ = f(λ)` after validating the descriptor.
pub fn damping(lambda: f64, spec: &DampingSpec) -> Result<f64> {
    spec.validate()?;
    if !(lambda >= 0.0) {
        return Err(config_err(format!("eigenvalue {lambda} must be nonnegative")));
    }
    Ok(spec.eval(lambda))
}

/// Per-mode damping rates `γ_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DampingSpectrum {
    pub gamma: Vec<f64>,
}

impl DampingSpectrum {
    pub fn new(grid: &SpectralGrid, spec: &DampingSpec) -> Result<Self> {
        spec.validate()?;
        let gamma = grid.eigenvalues().into_iter().map(|l| spec.eval(l)).collect();
        Ok(DampingSpectrum { gamma })
    }

    pub fn max(&self) -> f64 {
        self.gamma.iter().copied().fold(0.0, f64::max)
    }
}

/// Amplitude profile of the random forcing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseProfile {
    /// `b_k = amplitude · exp(-rate · λ̃_k)`.
    Gaussian { amplitude: f64, rate: f64 },
    /// `b_k = amplitude · (1 + λ̃_k)^(-power)`.
    Polynomial { amplitude: f64, power: f64 },
}

impl Default for NoiseProfile {
    fn default() -> Self {
        NoiseProfile::Gaussian {
            amplitude: 1.0,
            rate: 0.5,
        }
    }
}

impl NoiseProfile {
    pub fn validate(&self) -> Result<()> {
        let (amp, decay) = match *self {
            NoiseProfile::Gaussian { amplitude, rate } => (amplitude, rate),
            NoiseProfile::Polynomial { amplitude, power } => (amplitude, power),
        };
        if !(amp > 0.0) || !amp.is_finite() {
            return Err(config_err(format!("noise amplitude must be positive (got {amp})")));
        }
        if !(decay >= 0.0) || !decay.is_finite() {
            return Err(config_err(format!("noise decay must be nonnegative (got {decay})")));
        }
        Ok(())
    }

    fn eval(&self, eigen_int: i64) -> f64 {
        let lam = eigen_int as f64;
        match *self {
            NoiseProfile::Gaussian { amplitude, rate } => amplitude * (-rate * lam).exp(),
            NoiseProfile::Polynomial { amplitude, power } => amplitude * (1.0 + lam).powf(-power),
        }
    }
}

/// Per-mode noise amplitudes `b_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseSpectrum {
    pub b: Vec<f64>,
}

impl NoiseSpectrum {
    pub fn new(grid: &SpectralGrid, profile: &NoiseProfile) -> Result<Self> {
        profile.validate()?;
        let b: Vec<f64> = grid.eigen_int().iter().map(|&l| profile.eval(l)).collect();
        if b.iter().any(|x| !(*x > 0.0)) {
            return Err(config_err("noise profile underflows to zero on the grid"));
        }
        Ok(NoiseSpectrum { b })
    }

    /// Spectrum with every amplitude set to zero. Only for deterministic runs.
    pub fn silent(grid: &SpectralGrid) -> Self {
        NoiseSpectrum {
            b: vec![0.0; grid.len()],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        NoiseSpectrum {
            b: self.b.iter().map(|x| x * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_sizes() {
        let g = SpectralGrid::new(1, 1, 1.0).unwrap();
        assert_eq!(g.len(), 3);
        let ls: Vec<i64> = g.modes().iter().map(|m| m.0[0]).collect();
        assert_eq!(ls, vec![-1, 0, 1]);
        assert_eq!(SpectralGrid::new(2, 2, 1.0).unwrap().len(), 25);
        assert_eq!(SpectralGrid::new(3, 1, 1.0).unwrap().len(), 27);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(0, 1, 1.0).is_err());
        assert!(SpectralGrid::new(4, 1, 1.0).is_err());
        assert!(SpectralGrid::new(2, 0, 1.0).is_err());
        assert!(SpectralGrid::new(2, 1, 0.0).is_err());
    }

    #[test]
    fn ordering_round_trips() {
        for (d, n) in [(1, 4), (2, 2), (3, 1)] {
            let g = SpectralGrid::new(d, n, 1.0).unwrap();
            for i in 0..g.len() {
                assert_eq!(g.index_of(&g.mode(i)), Some(i));
            }
            let mut sorted = g.modes().to_vec();
            sorted.sort();
            assert_eq!(sorted, g.modes());
        }
    }

    #[test]
    fn out_of_grid_index() {
        let g = SpectralGrid::new(2, 1, 1.0).unwrap();
        assert_eq!(g.index_of(&WaveIndex::new(&[2, 0])), None);
        assert_eq!(g.index_of(&WaveIndex::new(&[0, 0, 1])), None);
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(laplacian_eigenvalue(&WaveIndex::new(&[0, 0]), 3.0), 0.0);
        assert_eq!(laplacian_eigenvalue(&WaveIndex::new(&[1, 1]), 1.0), 2.0);
        assert_eq!(laplacian_eigenvalue(&WaveIndex::new(&[3, 4]), 1.0), 25.0);
        let g = SpectralGrid::new(2, 1, 2.0).unwrap();
        let i = g.index_of(&WaveIndex::new(&[1, 1])).unwrap();
        assert_eq!(g.eigenvalue(i), 0.5);
        assert_eq!(g.eigen_int()[i], 2);
        let g = SpectralGrid::new(3, 2, 1.0).unwrap();
        assert!(g.eigen_int().iter().all(|&l| (0..=g.max_eigen_int()).contains(&l)));
    }

    #[test]
    fn damping_values() {
        let def = DampingSpec::default();
        assert_eq!(damping(0.0, &def).unwrap(), 1.0);
        assert_eq!(damping(2.0, &def).unwrap(), 3.0);
        assert_eq!(damping(4.0, &DampingSpec::Power { c0: 1.0, p: 2.0 }).unwrap(), 17.0);
        assert!(damping(1.0, &DampingSpec::Affine { c0: 0.0, c1: 1.0 }).is_err());
        assert!(damping(1.0, &DampingSpec::Affine { c0: 1.0, c1: -1.0 }).is_err());
        assert!(damping(1.0, &DampingSpec::Power { c0: -1.0, p: 2.0 }).is_err());
        assert!(damping(1.0, &DampingSpec::Power { c0: 1.0, p: 0.5 }).is_err());
    }

    #[test]
    fn damping_monotone_positive() {
        let g = SpectralGrid::new(2, 3, 1.0).unwrap();
        let gamma = DampingSpectrum::new(&g, &DampingSpec::default()).unwrap();
        let mut pairs: Vec<(i64, f64)> =
            g.eigen_int().iter().copied().zip(gamma.gamma.iter().copied()).collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(pairs.iter().all(|p| p.1 > 0.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn noise_values() {
        let g = SpectralGrid::new(2, 1, 1.0).unwrap();
        let flat = NoiseSpectrum::new(&g, &NoiseProfile::Gaussian { amplitude: 1.0, rate: 0.0 }).unwrap();
        assert!(flat.b.iter().all(|&b| b == 1.0));

        let gauss = NoiseSpectrum::new(&g, &NoiseProfile::Gaussian { amplitude: 1.0, rate: 1.0 }).unwrap();
        let i = g.index_of(&WaveIndex::new(&[1, 0])).unwrap();
        assert_relative_eq!(gauss.b[i], 0.36788, epsilon = 1e-5);

        let poly = NoiseSpectrum::new(&g, &NoiseProfile::Polynomial { amplitude: 2.0, power: 1.0 }).unwrap();
        let i = g.index_of(&WaveIndex::new(&[1, 1])).unwrap();
        assert_relative_eq!(poly.b[i], 2.0 / 3.0, epsilon = 1e-15);

        assert!(NoiseSpectrum::new(&g, &NoiseProfile::Gaussian { amplitude: 0.0, rate: 1.0 }).is_err());
        assert!(NoiseSpectrum::new(&g, &NoiseProfile::Polynomial { amplitude: -1.0, power: 1.0 }).is_err());
    }

    #[test]
    fn grid_json_is_flat_ordered() {
        let g = SpectralGrid::new(1, 1, 1.0).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["eigen_int"], serde_json::json!([1, 0, 1]));
    }
}
