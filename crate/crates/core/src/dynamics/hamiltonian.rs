use serde::Serialize;

use crate::field::C64;
use crate::lattice::SpectralGrid;
use crate::resonance::ResonanceTable;

use super::params::ModelParams;
use super::resonant::resonant_sum;

/// `H(v) = -1/(2q+2) Σ v_{k_1}..v_{k_{q+1}} v̄_{k_{q+2}}..v̄_{k_{2q+2}}` over
/// momentum-conserving tuples inside the cutoff.
///
/// For a field supported on the grid this is `-1/(2q+2) ∫|u|^{2q+2}` divided
/// by the torus volume, where `u` is the truncated field; it is not the
/// Hamiltonian of the untruncated solution.
pub fn hamiltonian_full(v: &[C64], params: &ModelParams) -> f64 {
    let w = params.product().apply(v);
    let s: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
    -s / (2 * params.q + 2) as f64
}

/// `H^res`: the same sum restricted to resonant tuples. The output mode of
/// each stored tuple plays the role of the last annihilator.
pub fn hamiltonian_res(v: &[C64], table: &ResonanceTable) -> f64 {
    let s = resonant_sum(v, table);
    let total: f64 = v.iter().zip(&s).map(|(a, b)| (a.conj() * b).re).sum();
    -total / (2 * table.order() + 2) as f64
}

/// Quadratic integrals of the resonant flow plus `H^res` itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservedQuantities {
    /// `½ Σ |v_k|²`
    pub h0: f64,
    /// `½ Σ λ_k |v_k|²`
    pub h1: f64,
    /// `½ Σ k_l |v_k|²` for each axis `l`
    pub momentum: Vec<f64>,
    pub h_res: f64,
}

pub fn conserved_quantities(v: &[C64], grid: &SpectralGrid, table: &ResonanceTable) -> ConservedQuantities {
    let h0 = 0.5 * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let h1 = 0.5
        * v.iter()
            .enumerate()
            .map(|(k, z)| grid.eigenvalue(k) * z.norm_sqr())
            .sum::<f64>();
    let momentum = (0..grid.dim())
        .map(|axis| {
            0.5 * v
                .iter()
                .enumerate()
                .map(|(k, z)| grid.wave_component(k, axis) * z.norm_sqr())
                .sum::<f64>()
        })
        .collect();
    ConservedQuantities {
        h0,
        h1,
        momentum,
        h_res: hamiltonian_res(v, table),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rotate, SpectralField};
    use crate::lattice::{DampingSpec, NoiseProfile};
    use crate::resonance::enumerate_resonant_tuples;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(d: usize, n: i64, q: usize) -> (ModelParams, ResonanceTable) {
        let g = SpectralGrid::new(d, n, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, q).unwrap();
        let p = ModelParams::new(g, q, 1.0, DampingSpec::default(), NoiseProfile::default()).unwrap();
        (p, t)
    }

    #[test]
    fn zero_field() {
        let (p, t) = setup(2, 1, 1);
        let v = SpectralField::zeros(p.n());
        assert_eq!(hamiltonian_full(&v, &p), 0.0);
        assert_eq!(hamiltonian_res(&v, &t), 0.0);
    }

    #[test]
    fn single_mode_quartic() {
        let (p, t) = setup(1, 2, 1);
        let mut v = SpectralField::zeros(p.n());
        let c = C64::new(0.3, 1.1);
        v[3] = c;
        let expect = -0.25 * c.norm_sqr().powi(2);
        assert!((hamiltonian_full(&v, &p) - expect).abs() < 1e-15);
        assert!((hamiltonian_res(&v, &t) - expect).abs() < 1e-15);
    }

    #[test]
    fn brute_force_full_hamiltonian() {
        // direct sum over all momentum-conserving quadruples
        let (p, _) = setup(2, 1, 1);
        let g = &p.grid;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = SpectralField::random(p.n(), 1.0, &mut rng);
        let n = p.n();
        let mut s = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if g.mode(a) + g.mode(b) - g.mode(c) - g.mode(d) == Default::default() {
                            s += v[a] * v[b] * v[c].conj() * v[d].conj();
                        }
                    }
                }
            }
        }
        assert!(s.im.abs() < 1e-13);
        assert!((hamiltonian_full(&v, &p) + 0.25 * s.re).abs() < 1e-13);
    }

    #[test]
    fn invariances() {
        let (p, t) = setup(2, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = SpectralField::random(p.n(), 1.0, &mut rng);
        let gauge = rotate(&v, &vec![1.3; p.n()]).unwrap();
        assert!((hamiltonian_full(&gauge, &p) - hamiltonian_full(&v, &p)).abs() < 1e-13);
        let lam: Vec<f64> = p.grid.eigen_int().iter().map(|&l| 0.77 * l as f64).collect();
        let shifted = rotate(&v, &lam).unwrap();
        assert!((hamiltonian_res(&shifted, &t) - hamiltonian_res(&v, &t)).abs() < 1e-13);
        assert!(hamiltonian_res(&v, &t) <= 0.0);
    }
}
