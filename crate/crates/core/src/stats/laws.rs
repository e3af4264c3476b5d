//! Empirical laws of scalar observables and distances between them.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::wrap_angle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Linear,
    Circular,
}

/// Samples of a scalar observable. Circular samples live in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalLaw {
    pub samples: Vec<f64>,
    pub kind: LawKind,
    /// Samples dropped because the observable was undefined.
    pub missing: usize,
}

impl EmpiricalLaw {
    pub fn linear(samples: Vec<f64>) -> Self {
        EmpiricalLaw {
            samples,
            kind: LawKind::Linear,
            missing: 0,
        }
    }

    /// Circular law from possibly-missing angles.
    pub fn circular<I: IntoIterator<Item = Option<f64>>>(values: I) -> Self {
        let mut samples = Vec::new();
        let mut missing = 0;
        for v in values {
            match v {
                Some(x) => samples.push(wrap_angle(x)),
                None => missing += 1,
            }
        }
        EmpiricalLaw {
            samples,
            kind: LawKind::Circular,
            missing,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn missing_fraction(&self) -> f64 {
        let total = self.missing + self.samples.len();
        if total == 0 {
            0.0
        } else {
            self.missing as f64 / total as f64
        }
    }

    fn sorted(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("ks_distance"));
    }
    Ok(ks_sorted(&a.sorted(), &b.sorted()))
}

fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample Kuiper statistic `max(F_a - F_b) + max(F_b - F_a)`.
///
/// Unlike KS it does not depend on where a circle is cut open.
pub fn kuiper_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("kuiper_distance"));
    }
    let (sa, sb) = (a.sorted(), b.sorted());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut up, mut down): (f64, f64) = (0.0, 0.0);
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        let diff = i as f64 / na - j as f64 / nb;
        up = up.max(diff);
        down = down.max(-diff);
    }
    Ok(up + down)
}

/// Bootstrap standard error of [`ks_distance`], resampling both laws.
pub fn ks_bootstrap_se(a: &EmpiricalLaw, b: &EmpiricalLaw, reps: usize, seed: u64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("ks_bootstrap_se"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(reps);
    let mut ra = vec![0.0; a.len()];
    let mut rb = vec![0.0; b.len()];
    for _ in 0..reps {
        for x in ra.iter_mut() {
            *x = a.samples[rng.random_range(0..a.len())];
        }
        for x in rb.iter_mut() {
            *x = b.samples[rng.random_range(0..b.len())];
        }
        ra.sort_by(f64::total_cmp);
        rb.sort_by(f64::total_cmp);
        stats.push(ks_sorted(&ra, &rb));
    }
    let mean = stats.iter().sum::<f64>() / reps as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0).max(1.0);
    Ok(var.sqrt())
}

/// Asymptotic Kolmogorov tail `Q(λ) = 2 Σ (-1)^{j-1} e^{-2j²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if (j as i64) % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic Kuiper tail `Q(λ) = 2 Σ (4j²λ² - 1) e^{-2j²λ²}`.
pub fn kuiper_q(lambda: f64) -> f64 {
    if lambda < 0.4 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j2 = (j * j) as f64;
        let e = (-2.0 * j2 * lambda * lambda).exp();
        sum += (4.0 * j2 * lambda * lambda - 1.0) * e;
        if e < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kuiper test of a circular law against the uniform law on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KuiperResult {
    /// `V = D⁺ + D⁻`.
    pub statistic: f64,
    pub n: usize,
    /// Asymptotic p-value with the Stephens small-sample correction.
    pub p_value: f64,
}

impl KuiperResult {
    /// Whether the sample is inside the 95% null band of uniformity.
    pub fn passes_95(&self) -> bool {
        self.p_value > 0.05
    }
}

pub fn kuiper_uniformity(a: &EmpiricalLaw) -> Result<KuiperResult> {
    if a.is_empty() {
        return Err(Error::EmptySample("kuiper_uniformity"));
    }
    let u: Vec<f64> = a.sorted().into_iter().map(|x| wrap_angle(x) / TAU).collect();
    let mut u = u;
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let mut d_plus: f64 = 0.0;
    let mut d_minus: f64 = 0.0;
    for (i, &x) in u.iter().enumerate() {
        d_plus = d_plus.max((i + 1) as f64 / n - x);
        d_minus = d_minus.max(x - i as f64 / n);
    }
    let v = d_plus + d_minus;
    let sn = n.sqrt();
    let lambda = (sn + 0.155 + 0.24 / sn) * v;
    Ok(KuiperResult {
        statistic: v,
        n: u.len(),
        p_value: kuiper_q(lambda),
    })
}

/// Scalar observable of a recorded trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `I_k` for flat mode `k`.
    Action(usize),
    /// Index into the trajectory's phase series.
    Phase(usize),
    NormH0,
}

/// Pool samples of `obs` over recorded times in `[t0, t1]` and over every
/// unflagged trajectory.
pub fn time_mollified_law(trajs: &[Trajectory], obs: Observable, t0: f64, t1: f64) -> Result<EmpiricalLaw> {
    if t1 < t0 {
        return Err(Error::EmptySample("time window with t1 < t0"));
    }
    let mut lin = Vec::new();
    let mut circ = Vec::new();
    for tr in trajs.iter().filter(|t| !t.is_flagged()) {
        for i in tr.window(t0, t1) {
            match obs {
                Observable::Action(k) => lin.push(tr.actions[i][k]),
                Observable::NormH0 => lin.push(tr.norm_h0[i]),
                Observable::Phase(p) => circ.push(tr.phases[p].values[i]),
            }
        }
    }
    let law = match obs {
        Observable::Phase(_) => EmpiricalLaw::circular(circ),
        _ => EmpiricalLaw::linear(lin),
    };
    if law.is_empty() && law.missing == 0 {
        return Err(Error::EmptySample("time window contains no samples"));
    }
    Ok(law)
}
