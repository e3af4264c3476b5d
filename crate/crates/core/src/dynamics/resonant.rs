//! The resonant part `R⁰` of the nonlinearity, built two independent ways:
//! as a sum over resonant tuples, and as the average of the rotated
//! nonlinearity `Ψ_{-tΛ̃} P⁰ Ψ_{tΛ̃}` over `t ∈ [0, 2π)`.
//!
//! The average is computed exactly by a `K`-point rule with
//! `K = (2q+2)·d·N² + 1`. Every monomial of `P⁰_k` oscillates with an
//! integer frequency of modulus at most `(q+1)·d·N² < K`, and the uniform
//! `K`-point rule integrates `e^{imt}` exactly for `|m| < K`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::{rotate_by_weights, SpectralField, C64};
use crate::resonance::ResonanceTable;

use super::nonlinearity::nonlinearity;
use super::params::ModelParams;

/// `S_k = Σ_{tuples → k} v_{k_1}..v_{k_{q+1}} v̄_{k_{q+2}}..v̄_{k_{2q+1}}`.
pub fn resonant_sum(v: &[C64], table: &ResonanceTable) -> Vec<C64> {
    let q = table.order();
    let stride = table.stride();
    (0..table.n_modes())
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for row in table.raw(k).chunks_exact(stride) {
                let mut term = v[row[0] as usize];
                for &c in &row[1..q + 1] {
                    term *= v[c as usize];
                }
                for &a in &row[q + 1..] {
                    term *= v[a as usize].conj();
                }
                acc += term;
            }
            acc
        })
        .collect()
}

fn check_table(table: &ResonanceTable, params: &ModelParams) -> Result<()> {
    if table.matches(&params.grid, params.q) {
        Ok(())
    } else {
        Err(Error::TableMismatch(format!(
            "table has q = {} and {} modes, model has q = {} and {} modes",
            table.order(),
            table.n_modes(),
            params.q,
            params.n()
        )))
    }
}

/// `R⁰_k(v) = -iρ S_k(v)`, summing over the stored resonant tuples.
pub fn resonant_field_direct(
    v: &[C64],
    table: &ResonanceTable,
    params: &ModelParams,
) -> Result<SpectralField> {
    check_table(table, params)?;
    let f = C64::new(0.0, -params.rho);
    Ok(resonant_sum(v, table)
        .into_iter()
        .map(|z| f * z)
        .collect::<Vec<_>>()
        .into())
}

/// Quadrature nodes `t_j = 2πj/K` for the exact resonant average.
pub fn quadrature_nodes(params: &ModelParams) -> Vec<f64> {
    let k = params.max_frequency() as usize + 1;
    (0..k).map(|j| TAU * j as f64 / k as f64).collect()
}

/// `R⁰(v) = (1/K) Σ_j Ψ_{-t_j Λ̃} P⁰(Ψ_{t_j Λ̃} v)`.
pub fn resonant_field_quadrature(v: &[C64], params: &ModelParams) -> SpectralField {
    let nodes = quadrature_nodes(params);
    let lam = params.grid.eigen_int();
    let mut acc = vec![C64::new(0.0, 0.0); v.len()];
    let mut rotated = v.to_vec();
    for &t in &nodes {
        rotated.copy_from_slice(v);
        rotate_by_weights(&mut rotated, t, lam);
        let mut p = nonlinearity(&rotated, params);
        rotate_by_weights(&mut p, -t, lam);
        for (a, z) in acc.iter_mut().zip(p.iter()) {
            *a += z;
        }
    }
    let w = 1.0 / nodes.len() as f64;
    acc.into_iter().map(|z| z * w).collect::<Vec<_>>().into()
}

/// Drift of the interaction variables at fast phase `θ`:
/// `Ψ_{θΛ̃} P⁰(Ψ_{-θΛ̃} a)`. With `a_k = e^{iθλ̃_k} v_k` this is the
/// nonlinearity expressed in `a`.
pub fn rotated_full_drift(a: &[C64], params: &ModelParams, theta: f64) -> SpectralField {
    let lam = params.grid.eigen_int();
    let mut v = a.to_vec();
    rotate_by_weights(&mut v, -theta, lam);
    let mut p = nonlinearity(&v, params);
    rotate_by_weights(&mut p, theta, lam);
    p
}

/// Non-resonant, fast-oscillating remainder
/// `𝓡(a, θ) = Ψ_{θΛ̃} P⁰(Ψ_{-θΛ̃} a) - R⁰(a)`.
pub fn nonresonant_field(
    a: &[C64],
    table: &ResonanceTable,
    params: &ModelParams,
    theta: f64,
) -> Result<SpectralField> {
    let r0 = resonant_field_direct(a, table, params)?;
    let mut full = rotated_full_drift(a, params, theta);
    for (z, r) in full.iter_mut().zip(r0.iter()) {
        *z -= r;
    }
    Ok(full)
}

/// Real scalar product on `C ≅ R²`.
fn dot(a: C64, b: C64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// `(v_k · R_k(v))_k` with `R = R⁰ - γ v`: the averaged drift of the actions.
pub fn averaged_action_drift(
    v: &[C64],
    table: &ResonanceTable,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    let r0 = resonant_field_direct(v, table, params)?;
    Ok(v.iter()
        .zip(r0.iter())
        .zip(&params.gamma.gamma)
        .map(|((&z, &r), &g)| dot(z, r - g * z))
        .collect())
}

/// `⟨v_k · P_k⟩_Λ` by the exact `K`-point rule along the rotations `Ψ_{tΛ̃}`.
pub fn averaged_action_drift_quadrature(v: &[C64], params: &ModelParams) -> Vec<f64> {
    let nodes = quadrature_nodes(params);
    let lam = params.grid.eigen_int();
    let mut acc = vec![0.0; v.len()];
    let mut rotated = v.to_vec();
    for &t in &nodes {
        rotated.copy_from_slice(v);
        rotate_by_weights(&mut rotated, t, lam);
        let p0 = nonlinearity(&rotated, params);
        for (k, a) in acc.iter_mut().enumerate() {
            let p = p0[k] - params.gamma.gamma[k] * rotated[k];
            *a += dot(rotated[k], p);
        }
    }
    let w = 1.0 / nodes.len() as f64;
    acc.into_iter().map(|x| x * w).collect()
}
