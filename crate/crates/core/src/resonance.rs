//! Resonant tuples, the integer resonance module and unimodular bases.
//!
//! A tuple `(k_1..k_{q+1}; k_{q+2}..k_{2q+1}; k)` is resonant when it
//! conserves both momentum and the integer Laplacian eigenvalue:
//!
//! ```text
//! k_1 + .. + k_{q+1} - k_{q+2} - .. - k_{2q+1} - k = 0
//! λ̃_1 + .. + λ̃_{q+1} - λ̃_{q+2} - .. - λ̃_{2q+1} - λ̃_k = 0
//! ```
//!
//! All decisions here use exact integer arithmetic.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{config_err, Error, Result};
use crate::lattice::{SpectralGrid, WaveIndex};

/// Default cap on the number of stored resonant tuples.
pub const DEFAULT_TUPLE_BUDGET: u128 = 20_000_000;

/// Default cap on the number of candidate vectors scanned by
/// [`enumerate_resonance_module`].
pub const DEFAULT_MODULE_BUDGET: u128 = 50_000_000;

/// Borrowed view of one stored resonant tuple (flat grid indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResonantTuple<'a> {
    pub creators: &'a [u32],
    pub annihilators: &'a [u32],
    pub output: u32,
}

/// Every resonant tuple of order `2q+2` inside the cutoff, grouped by output mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceTable {
    order: usize,
    dim: usize,
    cutoff: i64,
    per_output: Vec<Vec<u32>>,
}

impl ResonanceTable {
    /// The nonlinearity exponent `q*`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of inputs per tuple, `2q+1`.
    pub fn stride(&self) -> usize {
        2 * self.order + 1
    }

    pub fn n_modes(&self) -> usize {
        self.per_output.len()
    }

    pub fn matches(&self, grid: &SpectralGrid, order: usize) -> bool {
        self.order == order
            && self.dim == grid.dim()
            && self.cutoff == grid.cutoff()
            && self.per_output.len() == grid.len()
    }

    /// Raw inputs for output mode `k`: consecutive chunks of
    /// `q+1` creators followed by `q` annihilators.
    pub fn raw(&self, k: usize) -> &[u32] {
        &self.per_output[k]
    }

    pub fn count(&self, k: usize) -> usize {
        self.per_output[k].len() / self.stride()
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..self.n_modes()).map(|k| self.count(k)).collect()
    }

    pub fn total(&self) -> usize {
        self.counts().iter().sum()
    }

    pub fn tuples(&self, k: usize) -> impl Iterator<Item = ResonantTuple<'_>> + '_ {
        let q = self.order;
        self.per_output[k]
            .chunks_exact(self.stride())
            .map(move |c| ResonantTuple {
                creators: &c[..q + 1],
                annihilators: &c[q + 1..],
                output: k as u32,
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = ResonantTuple<'_>> + '_ {
        (0..self.n_modes()).flat_map(move |k| self.tuples(k))
    }

    /// Copy of the table with one tuple removed. Used for fault injection.
    #[doc(hidden)]
    pub fn without_tuple(&self, k: usize, idx: usize) -> Self {
        let mut out = self.clone();
        let s = self.stride();
        out.per_output[k].drain(idx * s..(idx + 1) * s);
        out
    }

    /// Whether every tuple satisfies both conservation laws on `grid`.
    pub fn verify(&self, grid: &SpectralGrid) -> bool {
        self.iter().all(|t| tuple_is_resonant(grid, t))
    }

    /// One-dimensional cubic triviality: each tuple pairs the creators with
    /// the annihilator and the output as multisets.
    pub fn is_trivial_pairing(&self) -> bool {
        self.iter().all(|t| {
            let mut lhs: Vec<u32> = t.creators.to_vec();
            let mut rhs: Vec<u32> = t.annihilators.to_vec();
            rhs.push(t.output);
            lhs.sort_unstable();
            rhs.sort_unstable();
            lhs == rhs
        })
    }

    /// CSV export: one tuple per row, flat indices.
    pub fn to_csv(&self) -> String {
        let q = self.order;
        let mut out = String::from("output");
        for i in 1..=q + 1 {
            let _ = write!(out, ",c{i}");
        }
        for i in 1..=q {
            let _ = write!(out, ",a{i}");
        }
        out.push('\n');
        for t in self.iter() {
            let _ = write!(out, "{}", t.output);
            for c in t.creators.iter().chain(t.annihilators) {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, grid: &SpectralGrid) -> TableSummary {
        TableSummary {
            dim: grid.dim(),
            cutoff: grid.cutoff(),
            q: self.order,
            n_modes: self.n_modes(),
            total: self.total(),
            counts: self.counts(),
            all_resonant: self.verify(grid),
            trivial: self.is_trivial_pairing(),
        }
    }
}

/// JSON summary of a [`ResonanceTable`].
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TableSummary {
    pub dim: usize,
    pub cutoff: i64,
    pub q: usize,
    pub n_modes: usize,
    pub total: usize,
    pub counts: Vec<usize>,
    pub all_resonant: bool,
    pub trivial: bool,
}

fn tuple_is_resonant(grid: &SpectralGrid, t: ResonantTuple<'_>) -> bool {
    let lam = grid.eigen_int();
    let mut mom = WaveIndex::default();
    let mut freq = 0i64;
    for &c in t.creators {
        mom = mom + grid.mode(c as usize);
        freq += lam[c as usize];
    }
    for &a in t.annihilators.iter().chain(std::iter::once(&t.output)) {
        mom = mom - grid.mode(a as usize);
        freq -= lam[a as usize];
    }
    mom == WaveIndex::default() && freq == 0
}

type Key = (WaveIndex, i64);

/// Ordered `len`-tuples of grid modes, bucketed by (momentum sum, λ̃ sum).
fn bucket_tuples(grid: &SpectralGrid, len: usize) -> HashMap<Key, Vec<u32>> {
    let n = grid.len();
    let lam = grid.eigen_int();
    let mut map: HashMap<Key, Vec<u32>> = HashMap::new();
    let mut idx = vec![0usize; len];
    loop {
        let mut mom = WaveIndex::default();
        let mut freq = 0;
        for &i in &idx {
            mom = mom + grid.mode(i);
            freq += lam[i];
        }
        map.entry((mom, freq))
            .or_default()
            .extend(idx.iter().map(|&i| i as u32));
        // odometer increment
        let mut pos = len;
        loop {
            if pos == 0 {
                return map;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Enumerate all resonant tuples of the degree-`2q+1` nonlinearity.
pub fn enumerate_resonant_tuples(grid: &SpectralGrid, q: usize) -> Result<ResonanceTable> {
    enumerate_resonant_tuples_with_budget(grid, q, DEFAULT_TUPLE_BUDGET)
}

/// Same as [`enumerate_resonant_tuples`] with an explicit tuple budget.
///
/// Creator `(q+1)`-tuples are joined against `(annihilators, output)`
/// `(q+1)`-tuples on equal (momentum sum, λ̃ sum). The join size is computed
/// before anything is materialized so the budget guard is exact.
pub fn enumerate_resonant_tuples_with_budget(
    grid: &SpectralGrid,
    q: usize,
    budget: u128,
) -> Result<ResonanceTable> {
    if q < 1 {
        return Err(config_err("q* must be at least 1"));
    }
    let n = grid.len() as u128;
    let side = n
        .checked_pow((q + 1) as u32)
        .ok_or(Error::Overflow("tuple side count"))?;
    if side > budget {
        return Err(Error::Budget {
            what: "resonant tuple join",
            estimate: side,
            limit: budget,
        });
    }
    let width = q + 1;
    let left = bucket_tuples(grid, width);

    // Right side: annihilators followed by the output. Same buckets.
    let right = &left;
    let mut estimate: u128 = 0;
    for (key, r) in right {
        if let Some(l) = left.get(key) {
            estimate += (l.len() / width) as u128 * (r.len() / width) as u128;
        }
    }
    if estimate > budget {
        return Err(Error::Budget {
            what: "resonant tuples",
            estimate,
            limit: budget,
        });
    }

    let mut by_output: Vec<Vec<(Key, &[u32])>> = vec![Vec::new(); grid.len()];
    for (key, r) in right {
        if !left.contains_key(key) {
            continue;
        }
        for chunk in r.chunks_exact(width) {
            let out = chunk[q] as usize;
            by_output[out].push((*key, &chunk[..q]));
        }
    }

    let stride = 2 * q + 1;
    let per_output: Vec<Vec<u32>> = by_output
        .par_iter()
        .map(|rights| {
            let mut rows: Vec<Vec<u32>> = Vec::new();
            for (key, ann) in rights {
                for cre in left[key].chunks_exact(width) {
                    let mut row = Vec::with_capacity(stride);
                    row.extend_from_slice(cre);
                    row.extend_from_slice(ann);
                    rows.push(row);
                }
            }
            rows.sort_unstable();
            rows.concat()
        })
        .collect();

    Ok(ResonanceTable {
        order: q,
        dim: grid.dim(),
        cutoff: grid.cutoff(),
        per_output,
    })
}

/// An integer vector `s` over grid modes with `Λ̃·s = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResonanceVector {
    pub s: Vec<i64>,
    pub l1: i64,
    pub dot: i64,
}

impl ResonanceVector {
    pub fn new(s: Vec<i64>, eigen_int: &[i64]) -> Self {
        let l1 = s.iter().map(|x| x.abs()).sum();
        let dot = s.iter().zip(eigen_int).map(|(a, b)| a * b).sum();
        ResonanceVector { s, l1, dot }
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.s
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, c))
    }
}

/// Number of integer vectors in `Z^n` with `|s|_1 ≤ m`.
fn l1_ball_size(n: u128, m: u128) -> u128 {
    // Σ_j C(n,j) C(m,j) 2^j
    let mut total: u128 = 0;
    let mut cn: u128 = 1;
    let mut cm: u128 = 1;
    let mut pow: u128 = 1;
    for j in 0..=n.min(m) {
        total = total.saturating_add(cn.saturating_mul(cm).saturating_mul(pow));
        cn = cn.saturating_mul(n - j) / (j + 1);
        cm = cm.saturating_mul(m - j) / (j + 1);
        pow = pow.saturating_mul(2);
    }
    total
}

/// All nonzero `s` with `|s|_1 ≤ m` and `Λ̃·s = 0`, sorted lexicographically.
pub fn enumerate_resonance_module(grid: &SpectralGrid, m: usize) -> Result<Vec<ResonanceVector>> {
    enumerate_resonance_module_with_budget(grid, m, DEFAULT_MODULE_BUDGET)
}

pub fn enumerate_resonance_module_with_budget(
    grid: &SpectralGrid,
    m: usize,
    budget: u128,
) -> Result<Vec<ResonanceVector>> {
    if m < 2 {
        return Err(config_err(format!("resonance order m = {m} must be at least 2")));
    }
    let estimate = l1_ball_size(grid.len() as u128, m as u128);
    if estimate > budget {
        return Err(Error::Budget {
            what: "resonance module scan",
            estimate,
            limit: budget,
        });
    }
    let lam = grid.eigen_int();
    let mut out = Vec::new();
    let mut s = vec![0i64; grid.len()];
    scan_module(lam, 0, m as i64, 0, &mut s, &mut out);
    out.sort_unstable();
    Ok(out
        .into_iter()
        .map(|s| ResonanceVector::new(s, lam))
        .collect())
}

fn scan_module(lam: &[i64], pos: usize, left: i64, dot: i64, s: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if pos == lam.len() {
        if dot == 0 && s.iter().any(|&c| c != 0) {
            out.push(s.clone());
        }
        return;
    }
    for c in -left..=left {
        s[pos] = c;
        scan_module(lam, pos + 1, left - c.abs(), dot + c * lam[pos], s, out);
    }
    s[pos] = 0;
}

/// Unimodular integer matrix `R` whose first `n-1` columns span `W^⊥ ∩ Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnimodularBasis {
    /// `W` divided by the gcd of its entries.
    pub w: Vec<i64>,
    /// The gcd that was divided out.
    pub gcd: i64,
    /// `R = Bᵀ`, row-major.
    pub r: Vec<Vec<i64>>,
}

impl UnimodularBasis {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// Column `j` of `R`.
    pub fn column(&self, j: usize) -> Vec<i64> {
        self.r.iter().map(|row| row[j]).collect()
    }

    /// The `n-1` columns orthogonal to `W`.
    pub fn resonance_columns(&self) -> Vec<Vec<i64>> {
        (0..self.n().saturating_sub(1)).map(|j| self.column(j)).collect()
    }

    /// `Rᵀ x` in exact arithmetic.
    pub fn transpose_apply(&self, x: &[i64]) -> Result<Vec<i64>> {
        let n = self.n();
        let mut out = vec![0i64; n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            for i in 0..n {
                let term = self.r[i][j]
                    .checked_mul(x[i])
                    .ok_or(Error::Overflow("unimodular product"))?;
                acc = acc.checked_add(term).ok_or(Error::Overflow("unimodular product"))?;
            }
            *o = acc;
        }
        Ok(out)
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    // returns (g, x, y) with a x + b y = g
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x1, y1) = ext_gcd(b, a % b);
        (g, y1, x1 - (a / b) * y1)
    }
}

fn checked_lin(a: i64, x: i64, b: i64, y: i64) -> Result<i64> {
    a.checked_mul(x)
        .and_then(|p| b.checked_mul(y).and_then(|q| p.checked_add(q)))
        .ok_or(Error::Overflow("unimodular completion"))
}

/// Complete `W` to a unimodular basis by sequential extended-gcd row
/// reduction: rows of `B` are accumulated while `W` is reduced to `e_n`.
pub fn unimodular_completion(w: &[i64]) -> Result<UnimodularBasis> {
    let n = w.len();
    if n == 0 || w.iter().all(|&x| x == 0) {
        return Err(config_err("unimodular completion of the zero vector"));
    }
    let g = w.iter().fold(0i64, |acc, &x| ext_gcd(acc, x).0);
    let w_norm: Vec<i64> = w.iter().map(|x| x / g).collect();

    let mut b: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut x = w_norm.clone();
    for i in 0..n.saturating_sub(1) {
        let (xi, xj) = (x[i], x[i + 1]);
        if xi == 0 {
            continue;
        }
        // prefer the trivial Bezout pair when x_{i+1} already divides x_i
        let (gp, t, s) = if xj != 0 && xi % xj == 0 {
            (xj.abs(), xj.signum(), 0)
        } else {
            ext_gcd(xj, xi)
        };
        let (p, m) = (xj / gp, xi / gp);
        let (ri, rj) = (b[i].clone(), b[i + 1].clone());
        for c in 0..n {
            b[i][c] = checked_lin(p, ri[c], -m, rj[c])?;
            b[i + 1][c] = checked_lin(s, ri[c], t, rj[c])?;
        }
        x[i] = 0;
        x[i + 1] = gp;
    }
    if x[n - 1] < 0 {
        for c in b[n - 1].iter_mut() {
            *c = -*c;
        }
    }
    let r = (0..n).map(|i| (0..n).map(|j| b[j][i]).collect()).collect();
    Ok(UnimodularBasis { w: w_norm, gcd: g, r })
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// `y = Rᵀ φ (mod 2π)`: the first `n-1` entries are the resonant phase
/// combinations, the last one is the single fast coordinate.
pub fn phase_coordinates(phi: &[f64], basis: &UnimodularBasis) -> Result<Vec<f64>> {
    let n = basis.n();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phi.len(),
        });
    }
    Ok((0..n)
        .map(|j| {
            let y: f64 = (0..n).map(|i| basis.r[i][j] as f64 * phi[i]).sum();
            crate::field::wrap_angle(y)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadruple-loop oracle for `q = 1`, independent of the bucketed join.
    fn brute_force_cubic(grid: &SpectralGrid) -> Vec<Vec<u32>> {
        let n = grid.len();
        let lam = grid.eigen_int();
        let mut out = vec![Vec::new(); n];
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mom = grid.mode(a) + grid.mode(b) - grid.mode(c) - grid.mode(k);
                        if mom == WaveIndex::default() && lam[a] + lam[b] - lam[c] - lam[k] == 0 {
                            out[k].extend([a as u32, b as u32, c as u32]);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn table_matches_brute_force_on_small_grids() {
        let grids = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1)];
        for (d, n) in grids {
            let g = SpectralGrid::new(d, n, 1.0).unwrap();
            let t = enumerate_resonant_tuples(&g, 1).unwrap();
            let bf = brute_force_cubic(&g);
            for k in 0..g.len() {
                assert_eq!(t.raw(k), &bf[k][..], "d={d} N={n} k={k}");
            }
        }
    }

    #[test]
    fn one_dimensional_cubic_is_trivial() {
        let g = SpectralGrid::new(1, 3, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, 1).unwrap();
        assert!(t.is_trivial_pairing());
        assert!(t.verify(&g));
        // each output has the 2n-1 distinct pairings of a free index j:
        // (j,k;j) and (k,j;j), coinciding when j = k
        for k in 0..g.len() {
            assert_eq!(t.count(k), 2 * g.len() - 1);
        }
    }

    #[test]
    fn two_dimensional_rectangle_is_present() {
        let g = SpectralGrid::new(2, 1, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, 1).unwrap();
        let i = |a: i64, b: i64| g.index_of(&WaveIndex::new(&[a, b])).unwrap() as u32;
        let k = i(0, 0) as usize;
        assert!(t
            .tuples(k)
            .any(|tp| tp.creators == [i(1, 0), i(0, 1)] && tp.annihilators == [i(1, 1)]));
        assert!(!t.is_trivial_pairing());
    }

    #[test]
    fn identity_resonance_always_present() {
        for (d, n, q) in [(1, 2, 1), (2, 1, 2), (1, 3, 2)] {
            let g = SpectralGrid::new(d, n, 1.0).unwrap();
            let t = enumerate_resonant_tuples(&g, q).unwrap();
            for k in 0..g.len() as u32 {
                for j in 0..g.len() as u32 {
                    // creators (j, k, j, ..), annihilators (j, j, ..)
                    let mut cre = vec![j; q + 1];
                    cre[1] = k;
                    let ann = vec![j; q];
                    assert!(t
                        .tuples(k as usize)
                        .any(|tp| tp.creators == &cre[..] && tp.annihilators == &ann[..]));
                }
            }
        }
    }

    #[test]
    fn quintic_table_verifies() {
        let g = SpectralGrid::new(2, 1, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, 2).unwrap();
        assert!(t.verify(&g));
        for k in 0..g.len() {
            let rows: Vec<&[u32]> = t.raw(k).chunks_exact(5).collect();
            assert!(rows.windows(2).all(|w| w[0] < w[1]), "sorted and unique");
        }
    }

    #[test]
    fn budget_guard() {
        let g = SpectralGrid::new(2, 2, 1.0).unwrap();
        match enumerate_resonant_tuples_with_budget(&g, 1, 100) {
            Err(Error::Budget { estimate, .. }) => assert!(estimate > 100),
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(enumerate_resonant_tuples(&g, 0).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = SpectralGrid::new(1, 1, 1.0).unwrap();
        let t = enumerate_resonant_tuples(&g, 1).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("output,c1,c2,a1"));
        assert_eq!(lines.count(), t.total());
    }

    #[test]
    fn module_small_cases() {
        let g = SpectralGrid::new(1, 1, 1.0).unwrap();
        let a = enumerate_resonance_module(&g, 2).unwrap();
        assert!(a.iter().any(|r| r.s == vec![1, 0, -1]));
        assert!(a.iter().any(|r| r.s == vec![0, 1, 0]));
        assert!(a.iter().all(|r| r.dot == 0 && r.l1 <= 2 && r.l1 > 0));
        assert!(enumerate_resonance_module(&g, 1).is_err());
    }

    #[test]
    fn module_contains_rectangle() {
        let g = SpectralGrid::new(2, 1, 1.0).unwrap();
        let a = enumerate_resonance_module(&g, 4).unwrap();
        let mut rect = vec![0i64; g.len()];
        let i = |x: i64, y: i64| g.index_of(&WaveIndex::new(&[x, y])).unwrap();
        rect[i(1, 0)] = 1;
        rect[i(0, 1)] = 1;
        rect[i(1, 1)] = -1;
        rect[i(0, 0)] = -1;
        assert!(a.iter().any(|r| r.s == rect));
        assert!(a.windows(2).all(|w| w[0].s < w[1].s));

        // brute-force count over |s|_1 <= 4 restricted to the four rectangle corners
        let corners = [i(1, 0), i(0, 1), i(1, 1), i(0, 0)];
        let lam = g.eigen_int();
        let mut count = 0;
        for a0 in -4i64..=4 {
            for a1 in -4i64..=4 {
                for a2 in -4i64..=4 {
                    for a3 in -4i64..=4 {
                        let c = [a0, a1, a2, a3];
                        let l1: i64 = c.iter().map(|x| x.abs()).sum();
                        let dot: i64 = c.iter().zip(corners).map(|(x, j)| x * lam[j]).sum();
                        if l1 > 0 && l1 <= 4 && dot == 0 {
                            count += 1;
                        }
                    }
                }
            }
        }
        let restricted = a
            .iter()
            .filter(|r| r.support().all(|(j, _)| corners.contains(&j)))
            .count();
        assert_eq!(restricted, count);
    }

    #[test]
    fn module_budget_guard() {
        let g = SpectralGrid::new(2, 2, 1.0).unwrap();
        assert!(matches!(
            enumerate_resonance_module_with_budget(&g, 6, 1000),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn ball_size_formula() {
        // |s|_1 <= 1 in Z^3: zero plus 6 unit vectors
        assert_eq!(l1_ball_size(3, 1), 7);
        // |s|_1 <= 2 in Z^2: 13 points of the diamond
        assert_eq!(l1_ball_size(2, 2), 13);
    }

    fn check_basis(w: &[i64]) -> UnimodularBasis {
        let b = unimodular_completion(w).unwrap();
        assert_eq!(determinant(&b.r).abs(), 1);
        let rt_w = b.transpose_apply(&b.w).unwrap();
        let mut en = vec![0i64; w.len()];
        en[w.len() - 1] = 1;
        assert_eq!(rt_w, en);
        b
    }

    #[test]
    fn completion_examples() {
        let b = check_basis(&[1]);
        assert_eq!(b.r, vec![vec![1]]);
        assert!(b.resonance_columns().is_empty());

        let b = check_basis(&[1, 1]);
        assert_eq!(b.r, vec![vec![1, 0], vec![-1, 1]]);

        let b = check_basis(&[2, 1]);
        let z = b.column(0);
        assert!(z == vec![1, -2] || z == vec![-1, 2]);
    }

    #[test]
    fn completion_normalizes_gcd() {
        let b = check_basis(&[4, 6, 0, 10]);
        assert_eq!(b.gcd, 2);
        assert_eq!(b.w, vec![2, 3, 0, 5]);
        assert!(unimodular_completion(&[0, 0]).is_err());
        assert!(unimodular_completion(&[]).is_err());
    }

    #[test]
    fn completion_of_grid_eigenvalues() {
        let g = SpectralGrid::new(2, 2, 1.0).unwrap();
        let b = check_basis(g.eigen_int());
        for z in b.resonance_columns() {
            let dot: i64 = z.iter().zip(&b.w).map(|(a, c)| a * c).sum();
            assert_eq!(dot, 0);
        }
    }

    #[test]
    fn phase_coordinate_examples() {
        let b = unimodular_completion(&[1, 1]).unwrap();
        assert_eq!(phase_coordinates(&[0.0, 0.0], &b).unwrap(), vec![0.0, 0.0]);
        let y = phase_coordinates(&[2.0, 0.5], &b).unwrap();
        assert!((y[0] - 1.5).abs() < 1e-15 && (y[1] - 0.5).abs() < 1e-15);
        assert!(phase_coordinates(&[1.0], &b).is_err());
    }

    #[test]
    fn fast_shift_moves_only_last_coordinate() {
        let lam = vec![2i64, 4, 0, 6];
        let b = unimodular_completion(&lam).unwrap();
        let phi = [0.3, 1.1, 2.0, 4.5];
        let t = 0.37;
        let shifted: Vec<f64> = phi.iter().zip(&lam).map(|(p, l)| p + t * *l as f64).collect();
        let y0 = phase_coordinates(&phi, &b).unwrap();
        let y1 = phase_coordinates(&shifted, &b).unwrap();
        for j in 0..3 {
            let d = crate::field::wrap_angle(y1[j] - y0[j]);
            assert!(d.min(std::f64::consts::TAU - d) < 1e-12);
        }
        let d = crate::field::wrap_angle(y1[3] - y0[3] - t * b.gcd as f64);
        assert!(d.min(std::f64::consts::TAU - d) < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn completion_is_unimodular(w in proptest::collection::vec(-50i64..50, 1..7)) {
            proptest::prop_assume!(w.iter().any(|&x| x != 0));
            check_basis(&w);
        }
    }
}
