//! Flat-torus lattices of the weighted Clifford tori.
//!
//! For weights `a = (1, a₂, …, a_{n+1})` the torus `T^{n+1}_r / S¹` is the flat
//! torus `Π_a / Γ_a`, where `Π_a` is the hyperplane orthogonal to `a` and `Γ_a`
//! is the projection of the lattice `2πr·ℤ^{n+1}`. The first Laplace eigenvalue
//! is `4π²d²` with `d` the length of the shortest nonzero dual-lattice vector.
//!
//! All integer bookkeeping (`S`, `X_s`, `N_s`, numerators of `B`) is exact; only
//! the final metric quantities are floating point.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default cap on visited nodes for the full enumeration.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Relative tolerance for the equality case `λ₁ = C`.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Weights `a` with `a[0] = 1` and torus radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    a: Vec<i64>,
    r: f64,
}

impl WeightVector {
    pub fn new(a: Vec<i64>, r: f64) -> Result<Self> {
        if a.first() != Some(&1) {
            return invalid("weights must start with 1");
        }
        if a.iter().any(|&x| x < 1) {
            return invalid("weights must be positive integers");
        }
        if !(r.is_finite() && r > 0.0) {
            return invalid("torus radius must be positive");
        }
        Ok(Self { a, r })
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `R = 2πr`.
    #[allow(non_snake_case)]
    pub fn R(&self) -> f64 {
        2.0 * PI * self.r
    }

    /// Lattice rank `n = len(a) − 1`.
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    /// True when two entries of `a` coincide.
    pub fn has_repeated_component(&self) -> bool {
        let mut sorted = self.a.clone();
        sorted.sort_unstable();
        sorted.windows(2).any(|w| w[0] == w[1])
    }
}

/// The lattice `Γ_a ⊂ Π_a` with its Gram data.
#[derive(Debug, Clone)]
pub struct TorusLattice {
    pub weights: WeightVector,
    /// `S = Σ aᵢ²`.
    pub s: i64,
    /// `X₀ … X_{n+1}`.
    pub x: Vec<i64>,
    /// `N₁ … N_n`, stored at indices `0 … n−1`.
    pub n_coef: Vec<i64>,
    /// Rows are the basis vectors `OA_s`.
    pub basis: DMatrix<f64>,
    pub gram_a: DMatrix<f64>,
    /// Integer numerators `B_st`; the inverse Gram matrix is `B/R²`.
    pub b: DMatrix<i64>,
    pub dual_gram: DMatrix<f64>,
}

impl TorusLattice {
    pub fn n(&self) -> usize {
        self.weights.n()
    }

    /// Closed-form Gram entry `(R²/S)(−X_sX_t + min(s,t)S)`, 1-based `s, t`.
    pub fn gram_closed_form(&self, s: usize, t: usize) -> f64 {
        let r = self.weights.R();
        let num = -self.x[s] * self.x[t] + (s.min(t) as i64) * self.s;
        r * r * num as f64 / self.s as f64
    }

    /// Exact value of `δᵀBδ`.
    pub fn b_form(&self, delta: &[i64]) -> i64 {
        let n = self.n();
        let mut acc = 0;
        for s in 0..n {
            for t in 0..n {
                acc += delta[s] * self.b[(s, t)] * delta[t];
            }
        }
        acc
    }
}

pub fn build_lattice(weights: &WeightVector) -> Result<TorusLattice> {
    let n = weights.n();
    if n == 0 {
        return invalid("at least two weights are needed for a lattice");
    }
    let a = weights.a();
    // 1-based weight accessor with the bookkeeping convention a₁ := 0.
    let ab = |i: usize| if i == 1 { 0 } else { a[i - 1] };
    let s: i64 = a.iter().map(|v| v * v).sum();

    let mut x = vec![0i64; n + 2];
    for (sidx, slot) in x.iter_mut().enumerate().take(n + 1).skip(1) {
        *slot = (n + 2 - sidx..=n + 1).map(|i| a[i - 1]).sum();
    }
    x[n + 1] = x[n];
    let n_coef: Vec<i64> = (1..=n).map(|si| ab(n + 1 - si) - ab(n + 2 - si)).collect();

    let big_r = weights.R();
    let scale = big_r / s as f64;
    let mut basis = DMatrix::zeros(n, n + 1);
    for si in 1..=n {
        basis[(si - 1, 0)] = scale * (-x[si]) as f64;
        for k in 2..=n + 1 - si {
            basis[(si - 1, k - 1)] = scale * (-a[k - 1] * x[si]) as f64;
        }
        for l in n + 2 - si..=n + 1 {
            basis[(si - 1, l - 1)] = scale * (s - a[l - 1] * x[si]) as f64;
        }
    }
    let gram_a = &basis * basis.transpose();

    let mut b = DMatrix::zeros(n, n);
    for si in 0..n {
        for ti in si..n {
            let v = if si == n - 1 {
                1 + n_coef[si] * n_coef[si]
            } else if ti == si {
                2 + n_coef[si] * n_coef[si]
            } else if ti == si + 1 {
                -1 + n_coef[si] * n_coef[ti]
            } else {
                n_coef[si] * n_coef[ti]
            };
            b[(si, ti)] = v;
            b[(ti, si)] = v;
        }
    }
    let dual_gram = b.map(|v| v as f64 / (big_r * big_r));

    Ok(TorusLattice {
        weights: weights.clone(),
        s,
        x,
        n_coef,
        basis,
        gram_a,
        b,
        dual_gram,
    })
}

/// The closed-form inverse `B/R²` of the Gram matrix.
pub fn inverse_gram_closed_form(lattice: &TorusLattice) -> DMatrix<f64> {
    lattice.dual_gram.clone()
}

/// Coordinates of the orthogonal projection of `x` onto `Π_a` in the basis `OA_s`.
pub fn project_to_basis(lattice: &TorusLattice, x: &[f64]) -> Result<DVector<f64>> {
    let n = lattice.n();
    if x.len() != n + 1 {
        return invalid(format!("expected a point of length {}", n + 1));
    }
    let big_r = lattice.weights.R();
    Ok(DVector::from_fn(n, |si, _| {
        let s = si + 1;
        let diff = x[n - s] - x[n + 1 - s];
        (lattice.n_coef[si] as f64 * x[0] - diff) / big_r
    }))
}

/// Orthogonal projection onto `Π_a`: `x + θ(x)·a` with `θ = −⟨x, a⟩ / S`.
pub fn project_to_hyperplane(lattice: &TorusLattice, x: &[f64]) -> Vec<f64> {
    let a = lattice.weights.a();
    let dot: f64 = x.iter().zip(a).map(|(xi, &ai)| xi * ai as f64).sum();
    let theta = -dot / lattice.s as f64;
    x.iter().zip(a).map(|(xi, &ai)| xi + theta * ai as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    /// All nonzero `δ ∈ {−1,0,1}^n`.
    Restricted,
    /// Exact bounded enumeration of the integer lattice.
    Full,
}

/// Shortest nonzero dual vector: `δᵀBδ` (exact integer) and its coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestVector {
    pub form: i64,
    pub coefficients: Vec<i64>,
}

impl ShortestVector {
    /// `d² = δᵀBδ / R²`.
    pub fn d_squared(&self, lattice: &TorusLattice) -> f64 {
        let r = lattice.weights.R();
        self.form as f64 / (r * r)
    }
}

/// Sign representative with first nonzero entry positive.
fn canonical(delta: &[i64]) -> Vec<i64> {
    match delta.iter().find(|&&v| v != 0) {
        Some(&v) if v < 0 => delta.iter().map(|x| -x).collect(),
        _ => delta.to_vec(),
    }
}

fn better(form: i64, coef: &[i64], best: &Option<ShortestVector>) -> bool {
    match best {
        None => true,
        Some(b) => match form.cmp(&b.form) {
            Ordering::Less => true,
            Ordering::Equal => coef < b.coefficients.as_slice(),
            Ordering::Greater => false,
        },
    }
}

fn restricted_search(lattice: &TorusLattice) -> ShortestVector {
    let n = lattice.n();
    let mut best: Option<ShortestVector> = None;
    let mut delta = vec![-1i64; n];
    loop {
        if delta.iter().any(|&v| v != 0) {
            let form = lattice.b_form(&delta);
            let coef = canonical(&delta);
            if better(form, &coef, &best) {
                best = Some(ShortestVector { form, coefficients: coef });
            }
        }
        // Odometer over {−1, 0, 1}^n.
        let mut i = 0;
        while i < n && delta[i] == 1 {
            delta[i] = -1;
            i += 1;
        }
        if i == n {
            break;
        }
        delta[i] += 1;
    }
    best.expect("n >= 1 gives a nonzero candidate")
}

struct Enumerator<'a> {
    lattice: &'a TorusLattice,
    q: Vec<Vec<f64>>,
    bound: f64,
    delta: Vec<i64>,
    best: Option<ShortestVector>,
    visited: u64,
    cap: u64,
}

impl Enumerator<'_> {
    fn descend(&mut self, level: usize, remaining: f64) -> Result<()> {
        let n = self.delta.len();
        let center: f64 = -(level + 1..n).map(|j| self.q[level][j] * self.delta[j] as f64).sum::<f64>();
        let radius = (remaining.max(0.0) / self.q[level][level]).sqrt();
        let slack = 1e-9 * (1.0 + radius);
        let lo = (center - radius - slack).ceil() as i64;
        let hi = (center + radius + slack).floor() as i64;
        for v in lo..=hi {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::EnumerationBudget { visited: self.visited, cap: self.cap });
            }
            let t = self.q[level][level] * (v as f64 - center).powi(2);
            if t > remaining + 1e-9 * self.bound.max(1.0) {
                continue;
            }
            self.delta[level] = v;
            if level == 0 {
                if self.delta.iter().all(|&d| d == 0) {
                    continue;
                }
                let form = self.lattice.b_form(&self.delta);
                let coef = canonical(&self.delta);
                if better(form, &coef, &self.best) {
                    self.best = Some(ShortestVector { form, coefficients: coef });
                }
            } else {
                self.descend(level - 1, remaining - t)?;
            }
        }
        self.delta[level] = 0;
        Ok(())
    }
}

/// Upper-triangular form `δᵀBδ = Σ_i q_ii (δ_i + Σ_{j>i} q_ij δ_j)²`.
fn quadratic_decomposition(b: &DMatrix<i64>) -> Vec<Vec<f64>> {
    let n = b.nrows();
    let mut q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| b[(i, j)] as f64).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    q
}

fn full_search(lattice: &TorusLattice, cap: u64) -> Result<ShortestVector> {
    let start = restricted_search(lattice);
    let n = lattice.n();
    let mut e = Enumerator {
        lattice,
        q: quadratic_decomposition(&lattice.b),
        bound: start.form as f64,
        delta: vec![0; n],
        best: None,
        visited: 0,
        cap,
    };
    e.descend(n - 1, start.form as f64)?;
    Ok(e.best.unwrap_or(start))
}

/// Shortest dual vector by the requested method; ties resolve to the
/// lexicographically smallest sign-canonical coefficient vector.
pub fn shortest_dual_vector(lattice: &TorusLattice, method: SearchMethod, node_cap: u64) -> Result<ShortestVector> {
    match method {
        SearchMethod::Restricted => Ok(restricted_search(lattice)),
        SearchMethod::Full => full_search(lattice, node_cap),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub d_squared: f64,
    pub minimizer: Vec<i64>,
    pub lambda1: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub stable: bool,
    pub equality: bool,
    pub restricted_d_squared: f64,
    pub restricted_equals_full: bool,
    /// Equality flag recomputed from the multiset of weights.
    pub structural_equality: bool,
}

impl SpectrumReport {
    /// Numeric and structural equality determinations agree.
    pub fn equality_consistent(&self) -> bool {
        self.equality == self.structural_equality
    }
}

pub fn spectrum_report(weights: &WeightVector, node_cap: u64) -> Result<SpectrumReport> {
    let lattice = build_lattice(weights)?;
    let full = shortest_dual_vector(&lattice, SearchMethod::Full, node_cap)?;
    let restricted = shortest_dual_vector(&lattice, SearchMethod::Restricted, node_cap)?;
    let d_squared = full.d_squared(&lattice);
    let r = weights.r();
    // 4π²d² with the 4π² cancelled against R² = 4π²r², so integer forms give exact values.
    let lambda1 = full.form as f64 / (r * r);
    let c = 2.0 / (r * r);
    Ok(SpectrumReport {
        d_squared,
        minimizer: full.coefficients.clone(),
        lambda1,
        c,
        stable: lambda1 >= c * (1.0 - EQUALITY_TOL),
        equality: (lambda1 - c).abs() <= EQUALITY_TOL * c,
        restricted_d_squared: restricted.d_squared(&lattice),
        restricted_equals_full: restricted.form == full.form,
        structural_equality: weights.has_repeated_component(),
    })
}

/// All weight vectors `(1, a₂, …, a_{n+1})` with entries in `1..=max_entry` and
/// `1 ≤ n ≤ max_n`, in lexicographic order by length then entries.
pub fn exhaustive_weights(max_entry: i64, max_n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let mut tail = vec![1i64; n];
        loop {
            let mut a = vec![1];
            a.extend_from_slice(&tail);
            out.push(a);
            let mut i = n;
            while i > 0 && tail[i - 1] == max_entry {
                tail[i - 1] = 1;
                i -= 1;
            }
            if i == 0 {
                break;
            }
            tail[i - 1] += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(a: &[i64], r: f64) -> TorusLattice {
        build_lattice(&WeightVector::new(a.to_vec(), r).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert_eq!(
            WeightVector::new(vec![2, 1], 1.0).unwrap_err(),
            Error::InvalidInput("weights must start with 1".into())
        );
        assert!(WeightVector::new(vec![1, 0], 1.0).is_err());
        assert!(WeightVector::new(vec![1, 1], 0.0).is_err());
        assert!(build_lattice(&WeightVector::new(vec![1], 1.0).unwrap()).is_err());
    }

    #[test]
    fn hopf_basis_and_gram() {
        let l = lat(&[1, 1], 1.0);
        assert!((l.basis[(0, 0)] + PI).abs() < 1e-14);
        assert!((l.basis[(0, 1)] - PI).abs() < 1e-14);
        assert!((l.gram_a[(0, 0)] - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(l.b[(0, 0)], 2);
    }

    #[test]
    fn bookkeeping_for_one_two() {
        let l = lat(&[1, 2], 1.0);
        assert_eq!(l.s, 5);
        assert_eq!(l.x[1], 2);
        assert_eq!(l.n_coef, vec![-2]);
        assert_eq!(l.b[(0, 0)], 5);
        assert!((l.gram_a[(0, 0)] - 4.0 * PI * PI / 5.0).abs() < 1e-12);
    }

    #[test]
    fn shortest_vector_examples() {
        let l = lat(&[1, 2], 1.0);
        let sv = shortest_dual_vector(&l, SearchMethod::Full, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(sv.coefficients, vec![1]);
        assert_eq!(sv.form, 5);
        for n in 1..=5 {
            let l = lat(&vec![1; n + 1], 1.0);
            let sv = shortest_dual_vector(&l, SearchMethod::Full, DEFAULT_NODE_CAP).unwrap();
            assert_eq!(sv.form, 2);
        }
        let l = lat(&[1, 2, 3], 1.0);
        let f = shortest_dual_vector(&l, SearchMethod::Full, DEFAULT_NODE_CAP).unwrap();
        let r = shortest_dual_vector(&l, SearchMethod::Restricted, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(f, r);
    }

    #[test]
    fn full_search_finds_vectors_outside_the_unit_cube() {
        let l = lat(&[1, 6, 3], 1.0);
        let f = shortest_dual_vector(&l, SearchMethod::Full, DEFAULT_NODE_CAP).unwrap();
        let r = shortest_dual_vector(&l, SearchMethod::Restricted, DEFAULT_NODE_CAP).unwrap();
        assert_eq!((f.form, f.coefficients.clone()), (5, vec![2, 1]));
        assert_eq!(r.form, 10);
    }

    #[test]
    fn node_cap_is_enforced() {
        let l = lat(&[1, 6, 2, 4, 5, 3], 1.0);
        let err = shortest_dual_vector(&l, SearchMethod::Full, 3).unwrap_err();
        assert!(matches!(err, Error::EnumerationBudget { .. }));
    }

    #[test]
    fn spectrum_examples() {
        let rep = spectrum_report(&WeightVector::new(vec![1, 1], 1.0).unwrap(), DEFAULT_NODE_CAP).unwrap();
        assert!((rep.lambda1 - 2.0).abs() < 1e-12 && rep.equality);
        let rep = spectrum_report(&WeightVector::new(vec![1, 2], 1.0).unwrap(), DEFAULT_NODE_CAP).unwrap();
        assert!((rep.lambda1 - 5.0).abs() < 1e-12 && rep.stable && !rep.equality);
        let rep = spectrum_report(&WeightVector::new(vec![1, 2, 2], 2.0).unwrap(), DEFAULT_NODE_CAP).unwrap();
        assert!((rep.lambda1 - 0.5).abs() < 1e-12 && rep.equality && rep.equality_consistent());
    }

    #[test]
    fn projection_of_zero_is_zero() {
        let l = lat(&[1, 2, 3], 1.0);
        assert!(project_to_basis(&l, &[0.0; 3]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exhaustive_enumeration_size() {
        assert_eq!(exhaustive_weights(6, 5).len(), 6 + 36 + 216 + 1296 + 7776);
        assert_eq!(exhaustive_weights(2, 2)[..3], [vec![1, 1], vec![1, 2], vec![1, 1, 1]]);
    }
}
