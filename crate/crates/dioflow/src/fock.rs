//! Truncated bosonic Fock machinery.
//!
//! Builds everything the two numerical routes share: the finite occupation
//! basis, creation/annihilation matrices, the diagonal problem operator whose
//! entries are the exact squared polynomial values, the displaced-oscillator
//! initial operator with its coherent ground state, and the interpolation
//! between them.
//!
//! Truncation semantics: each mode keeps occupations `0..=d_i`; every operator
//! is the compression of its infinite-dimensional counterpart onto that box.
//! Truncated coherent states are renormalized to unit norm.

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::diophantine::{to_f64_exact, DiophantineError, Polynomial};
use crate::linalg::{hermiticity_defect, vector_norm};

/// Refuse to build bases past this size; the artifact is desk scale.
pub const MAX_DIMENSION: usize = 1 << 20;

/// Per-mode discarded coherent-state probability above which a cutoff
/// warning is emitted.
pub const COHERENT_TAIL_WARNING: f64 = 1e-6;

/// Hermiticity defect tolerance for validated operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("cutoffs must be positive (mode {mode} has cutoff 0)")]
    ZeroCutoff { mode: usize },
    #[error("basis dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("expected {expected} entries for {what}, got {got}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("lambda[{mode}] = {value} must be strictly positive and finite")]
    InvalidLambda { mode: usize, value: f64 },
    #[error("operator dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix of dimension {dim} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { dim: usize, defect: f64 },
    #[error("interpolation parameter s = {s} outside [0, 1]")]
    SOutOfRange { s: f64 },
    #[error("state norm {norm} too far from 1")]
    NotNormalized { norm: f64 },
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}

// ---------------------------------------------------------------------------
// Basis
// ---------------------------------------------------------------------------

/// Bijection between occupation multi-indices under per-mode cutoffs and flat
/// basis positions, in lexicographic order with the vacuum first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisMap {
    cutoffs: Vec<u32>,
    strides: Vec<usize>,
    dim: usize,
}

impl BasisMap {
    pub fn new(cutoffs: &[u32]) -> Result<Self, FockError> {
        assert!(!cutoffs.is_empty(), "at least one mode");
        for (mode, &d) in cutoffs.iter().enumerate() {
            if d == 0 {
                return Err(FockError::ZeroCutoff { mode });
            }
        }
        let mut dim: usize = 1;
        for &d in cutoffs {
            dim = dim
                .checked_mul(d as usize + 1)
                .filter(|&v| v <= MAX_DIMENSION)
                .ok_or(FockError::DimensionTooLarge {
                    dim: usize::MAX,
                    max: MAX_DIMENSION,
                })?;
        }
        if dim > MAX_DIMENSION {
            return Err(FockError::DimensionTooLarge {
                dim,
                max: MAX_DIMENSION,
            });
        }
        // Last mode varies fastest, so the first coordinate is the most
        // significant digit and flat order is lexicographic.
        let k = cutoffs.len();
        let mut strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * (cutoffs[i + 1] as usize + 1);
        }
        Ok(BasisMap {
            cutoffs: cutoffs.to_vec(),
            strides,
            dim,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[u32] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat position of a multi-index.
    pub fn flat(&self, index: &[u32]) -> usize {
        debug_assert_eq!(index.len(), self.cutoffs.len());
        index
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| n as usize * s)
            .sum()
    }

    /// Multi-index at a flat position.
    pub fn unflat(&self, mut position: usize) -> Vec<u32> {
        debug_assert!(position < self.dim);
        let mut out = Vec::with_capacity(self.cutoffs.len());
        for &s in &self.strides {
            out.push((position / s) as u32);
            position %= s;
        }
        out
    }

    /// All multi-indices in flat (lexicographic) order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.dim).map(|j| self.unflat(j))
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Dense Hermitian matrix, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: Array2<C64>,
}

impl HermitianOperator {
    pub fn new(entries: Array2<C64>) -> Result<Self, FockError> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(FockError::DimensionMismatch {
                left: rows,
                right: cols,
            });
        }
        let defect = hermiticity_defect(&entries);
        if defect > HERMITICITY_TOL {
            return Err(FockError::NotHermitian { dim: rows, defect });
        }
        Ok(HermitianOperator { entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut entries = Array2::zeros((n, n));
        for (j, &v) in diag.iter().enumerate() {
            entries[[j, j]] = C64::new(v, 0.0);
        }
        HermitianOperator { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    /// Apply to a vector.
    pub fn apply(&self, psi: &Array1<C64>) -> Array1<C64> {
        self.entries.dot(psi)
    }

    /// Real diagonal as a vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.entries[[j, j]].re).collect()
    }

    /// Expectation value `⟨x|A|x⟩` (real for Hermitian `A`).
    pub fn expectation(&self, x: &Array1<C64>) -> f64 {
        let ax = self.entries.dot(x);
        x.iter()
            .zip(ax.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Truncated annihilation matrix: `a[n-1][n] = sqrt(n)` for `1 <= n <= d` on
/// the `(d+1)`-dimensional single-mode space.
pub fn annihilation_matrix(d: u32) -> Array2<C64> {
    let n = d as usize + 1;
    let mut a = Array2::zeros((n, n));
    for level in 1..=d as usize {
        a[[level - 1, level]] = C64::new((level as f64).sqrt(), 0.0);
    }
    a
}

/// Truncated creation matrix, the conjugate transpose of
/// [`annihilation_matrix`].
pub fn creation_matrix(d: u32) -> Array2<C64> {
    crate::linalg::conj_transpose(&annihilation_matrix(d))
}

/// Lift a single-mode operator to the full tensor-product space by Kronecker
/// factors of identities on every other mode.
fn lift_single_mode(basis: &BasisMap, mode: usize, op: &Array2<C64>) -> Array2<C64> {
    let mut result: Option<Array2<C64>> = None;
    for (i, &d) in basis.cutoffs().iter().enumerate() {
        let factor: Array2<C64> = if i == mode {
            op.clone()
        } else {
            Array2::eye(d as usize + 1)
        };
        result = Some(match result {
            None => factor,
            Some(acc) => kron(&acc, &factor),
        });
    }
    result.expect("at least one mode")
}

/// The diagonal problem operator: entry at multi-index `n` is exactly
/// `D(n)²`, computed by the exact integer evaluator and converted to `f64`
/// only after the `2^53` exactness check.
pub fn build_hp(p: &Polynomial, basis: &BasisMap) -> Result<HermitianOperator, FockError> {
    if p.num_vars() != basis.num_modes() {
        return Err(FockError::ArityMismatch {
            what: "polynomial variables vs basis modes",
            expected: basis.num_modes(),
            got: p.num_vars(),
        });
    }
    let mut diag = Vec::with_capacity(basis.dim());
    for index in basis.indices() {
        let point: Vec<u64> = index.iter().map(|&n| n as u64).collect();
        let value = p.evaluate(&point)?;
        let square = &value * &value;
        diag.push(to_f64_exact(&square)?);
    }
    Ok(HermitianOperator::from_real_diagonal(&diag))
}

/// The displaced-oscillator initial operator
/// `Σ_i λ_i (a†_i - conj(α_i)) (a_i - α_i)`, assembled as a Kronecker-lifted
/// sum of per-mode tridiagonal blocks
/// `λ (n̂ - α a† - conj(α) a + |α|² I)`.
pub fn build_hi(instance: &ProblemInstance) -> HermitianOperator {
    let basis = &instance.basis;
    let dim = basis.dim();
    let mut total: Array2<C64> = Array2::zeros((dim, dim));
    for (mode, (&lambda, &alpha)) in instance
        .lambdas
        .iter()
        .zip(&instance.alphas)
        .enumerate()
    {
        let d = basis.cutoffs()[mode];
        let n = d as usize + 1;
        let mut block = Array2::zeros((n, n));
        let gauge = alpha.norm_sqr();
        for level in 0..n {
            block[[level, level]] = C64::new(lambda * (level as f64 + gauge), 0.0);
        }
        for level in 1..n {
            let root = (level as f64).sqrt();
            block[[level, level - 1]] = -alpha * lambda * root;
            block[[level - 1, level]] = -alpha.conj() * lambda * root;
        }
        total += &lift_single_mode(basis, mode, &block);
    }
    HermitianOperator::new(total).expect("construction is Hermitian")
}

/// Default non-degeneracy weights: square roots of the first `K` primes.
///
/// No nontrivial integer combination of distinct prime square roots vanishes,
/// so all eigenvalue sums `Σ λ_i n_i` of the undisplaced initial operator are
/// distinct.
pub fn choose_lambdas(num_modes: usize) -> Vec<f64> {
    assert!(num_modes >= 1);
    let mut primes = Vec::with_capacity(num_modes);
    let mut candidate = 2u64;
    while primes.len() < num_modes {
        if primes.iter().all(|&p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes.into_iter().map(|p| (p as f64).sqrt()).collect()
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

/// Monotone interpolation schedule on `[0, 1]` with `f(0) = 0`, `f(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Linear,
    Smooth,
}

impl Schedule {
    pub fn f(&self, s: f64) -> f64 {
        match self {
            Schedule::Linear => s,
            Schedule::Smooth => s * s * (3.0 - 2.0 * s),
        }
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        match self {
            Schedule::Linear => 1.0,
            Schedule::Smooth => 6.0 * s * (1.0 - s),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(Schedule::Linear),
            "smooth" => Some(Schedule::Smooth),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::Smooth => "smooth",
        }
    }
}

// ---------------------------------------------------------------------------
// Problem instance
// ---------------------------------------------------------------------------

/// A fully specified finite encoding: polynomial, truncation, displacement
/// parameters, non-degeneracy weights, and schedule.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub polynomial: Polynomial,
    pub basis: BasisMap,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<C64>,
    pub schedule: Schedule,
}

impl ProblemInstance {
    /// Overriding the default weights is allowed but loses the built-in
    /// non-degeneracy guarantee; degeneracies then surface downstream as
    /// gap-collapse diagnostics rather than wrong answers.
    pub fn new(
        polynomial: Polynomial,
        cutoffs: &[u32],
        lambdas: Vec<f64>,
        alphas: Vec<C64>,
        schedule: Schedule,
    ) -> Result<Self, FockError> {
        let k = polynomial.num_vars();
        if cutoffs.len() != k {
            return Err(FockError::ArityMismatch {
                what: "cutoffs",
                expected: k,
                got: cutoffs.len(),
            });
        }
        if lambdas.len() != k {
            return Err(FockError::ArityMismatch {
                what: "lambdas",
                expected: k,
                got: lambdas.len(),
            });
        }
        if alphas.len() != k {
            return Err(FockError::ArityMismatch {
                what: "alphas",
                expected: k,
                got: alphas.len(),
            });
        }
        for (mode, &l) in lambdas.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(FockError::InvalidLambda { mode, value: l });
            }
        }
        let basis = BasisMap::new(cutoffs)?;
        Ok(ProblemInstance {
            polynomial,
            basis,
            lambdas,
            alphas,
            schedule,
        })
    }

    /// Defaults from the artifact: `λ_i = sqrt(p_i)` over the primes,
    /// `α_i = 1`, linear schedule.
    pub fn with_defaults(polynomial: Polynomial, cutoffs: &[u32]) -> Result<Self, FockError> {
        let k = polynomial.num_vars();
        ProblemInstance::new(
            polynomial,
            cutoffs,
            choose_lambdas(k),
            vec![C64::new(1.0, 0.0); k],
            Schedule::Linear,
        )
    }

    /// Build the operator triple `(H_I, H_P, W = H_P - H_I)`.
    pub fn operators(&self) -> Result<Operators, FockError> {
        let h_i = build_hi(self);
        let h_p = build_hp(&self.polynomial, &self.basis)?;
        let w = HermitianOperator::new(h_p.entries() - h_i.entries())
            .expect("difference of Hermitian operators");
        Ok(Operators { h_i, h_p, w })
    }
}

/// The operator triple shared by both numerical routes.
#[derive(Debug, Clone)]
pub struct Operators {
    pub h_i: HermitianOperator,
    pub h_p: HermitianOperator,
    pub w: HermitianOperator,
}

impl Operators {
    /// The interpolating operator at schedule value `f`, i.e.
    /// `H_I + f · W`. Endpoints are returned bit-identically.
    pub fn at_schedule_value(&self, f: f64) -> HermitianOperator {
        if f == 0.0 {
            return self.h_i.clone();
        }
        if f == 1.0 {
            return self.h_p.clone();
        }
        let entries = self.h_i.entries() + &self.w.entries().mapv(|z| z * f);
        HermitianOperator::new(entries).expect("interpolant is Hermitian")
    }
}

/// The interpolating operator `H_I + f(s) (H_P - H_I)`.
///
/// Exactly `H_I` at `s = 0` and exactly `H_P` at `s = 1` (bit-identical
/// entries, no arithmetic on the endpoints).
pub fn interpolate(
    h_i: &HermitianOperator,
    h_p: &HermitianOperator,
    schedule: Schedule,
    s: f64,
) -> Result<HermitianOperator, FockError> {
    if h_i.dim() != h_p.dim() {
        return Err(FockError::DimensionMismatch {
            left: h_i.dim(),
            right: h_p.dim(),
        });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(FockError::SOutOfRange { s });
    }
    let f = schedule.f(s);
    if f == 0.0 {
        return Ok(h_i.clone());
    }
    if f == 1.0 {
        return Ok(h_p.clone());
    }
    let entries =
        h_i.entries() + &(h_p.entries() - h_i.entries()).mapv(|z| z * f);
    Ok(HermitianOperator::new(entries).expect("interpolant is Hermitian"))
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Unit-norm complex amplitude vector over a truncated basis.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    amplitudes: Array1<C64>,
    basis: BasisMap,
}

impl WaveFunction {
    pub fn new(amplitudes: Array1<C64>, basis: BasisMap) -> Result<Self, FockError> {
        assert_eq!(amplitudes.len(), basis.dim(), "amplitude count vs basis");
        let norm = vector_norm(&amplitudes.view());
        if (norm - 1.0).abs() > 1e-10 {
            return Err(FockError::NotNormalized { norm });
        }
        Ok(WaveFunction { amplitudes, basis })
    }

    pub(crate) fn from_parts_unchecked(amplitudes: Array1<C64>, basis: BasisMap) -> Self {
        WaveFunction { amplitudes, basis }
    }

    /// The basis vector `|n⟩` for a multi-index.
    pub fn basis_state(basis: &BasisMap, index: &[u32]) -> Self {
        let mut amplitudes = Array1::zeros(basis.dim());
        amplitudes[basis.flat(index)] = C64::new(1.0, 0.0);
        WaveFunction {
            amplitudes,
            basis: basis.clone(),
        }
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn basis(&self) -> &BasisMap {
        &self.basis
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.amplitudes.view())
    }

    /// Occupation probability of one Fock basis state.
    pub fn occupation(&self, index: &[u32]) -> f64 {
        self.amplitudes[self.basis.flat(index)].norm_sqr()
    }

    /// All `(multi-index, probability)` pairs sorted by descending
    /// probability, ties broken by basis position.
    pub fn occupations_descending(&self) -> Vec<(Vec<u32>, f64)> {
        let mut probs: Vec<(usize, f64)> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, z)| (j, z.norm_sqr()))
            .collect();
        probs.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
        probs
            .into_iter()
            .map(|(j, p)| (self.basis.unflat(j), p))
            .collect()
    }

    /// Expectation of the total number operator `Σ_i n̂_i`.
    pub fn total_number_expectation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, z)| {
                let total: u32 = self.basis.unflat(j).iter().sum();
                total as f64 * z.norm_sqr()
            })
            .sum()
    }
}

/// A truncated, renormalized coherent product state plus per-mode truncation
/// diagnostics.
#[derive(Debug, Clone)]
pub struct CoherentState {
    pub state: WaveFunction,
    /// Probability mass discarded by each mode's cutoff, before
    /// renormalization.
    pub tail_mass: Vec<f64>,
}

impl CoherentState {
    /// Human-readable warnings for modes whose discarded tail exceeds
    /// [`COHERENT_TAIL_WARNING`].
    pub fn truncation_warnings(&self) -> Vec<String> {
        self.tail_mass
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > COHERENT_TAIL_WARNING)
            .map(|(mode, &t)| {
                format!(
                    "coherent state tail mass {t:.3e} discarded in mode {}; consider a larger cutoff",
                    mode + 1
                )
            })
            .collect()
    }
}

/// Tensor product of truncated single-mode coherent states with amplitudes
/// `exp(-|α|²/2) αⁿ / sqrt(n!)`, renormalized to unit norm.
pub fn coherent_state(alphas: &[C64], basis: &BasisMap) -> Result<CoherentState, FockError> {
    if alphas.len() != basis.num_modes() {
        return Err(FockError::ArityMismatch {
            what: "alphas",
            expected: basis.num_modes(),
            got: alphas.len(),
        });
    }
    let mut joint: Array1<C64> = Array1::from_elem(1, C64::new(1.0, 0.0));
    let mut tail_mass = Vec::with_capacity(alphas.len());
    for (mode, &alpha) in alphas.iter().enumerate() {
        let d = basis.cutoffs()[mode] as usize;
        let mut mode_vec = Vec::with_capacity(d + 1);
        let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        mode_vec.push(amp);
        for n in 1..=d {
            amp *= alpha / C64::new((n as f64).sqrt(), 0.0);
            mode_vec.push(amp);
        }
        let kept: f64 = mode_vec.iter().map(|z| z.norm_sqr()).sum();
        tail_mass.push((1.0 - kept).max(0.0));
        // Outer product keeps the first mode most significant, matching the
        // lexicographic flat order of the basis.
        let mut next = Array1::zeros(joint.len() * (d + 1));
        for (i, &a) in joint.iter().enumerate() {
            for (n, &b) in mode_vec.iter().enumerate() {
                next[i * (d + 1) + n] = a * b;
            }
        }
        joint = next;
    }
    let norm = vector_norm(&joint.view());
    let renormalized = joint.mapv(|z| z / norm);
    Ok(CoherentState {
        state: WaveFunction::from_parts_unchecked(renormalized, basis.clone()),
        tail_mass,
    })
}

// ---------------------------------------------------------------------------
// JSON dumps
// ---------------------------------------------------------------------------

/// Row-major complex matrix dump: `{dim, cutoffs, entries: [[re, im], ...]}`.
#[derive(Debug, Serialize)]
pub struct OperatorDump {
    pub dim: usize,
    pub cutoffs: Vec<u32>,
    pub entries: Vec<[f64; 2]>,
}

impl OperatorDump {
    pub fn new(op: &HermitianOperator, basis: &BasisMap) -> Self {
        OperatorDump {
            dim: op.dim(),
            cutoffs: basis.cutoffs().to_vec(),
            entries: op.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Amplitude vector dump in the same layout as [`OperatorDump`].
#[derive(Debug, Serialize)]
pub struct StateDump {
    pub dim: usize,
    pub cutoffs: Vec<u32>,
    pub entries: Vec<[f64; 2]>,
}

impl StateDump {
    pub fn new(state: &WaveFunction) -> Self {
        StateDump {
            dim: state.basis().dim(),
            cutoffs: state.basis().cutoffs().to_vec(),
            entries: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{brute_force_min_square, parse, LatticeBox};
    use crate::linalg::hermitian_eig;
    use num_bigint::BigUint;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_round_trip_and_vacuum_first() {
        let basis = BasisMap::new(&[2, 3]).unwrap();
        assert_eq!(basis.dim(), 12);
        assert_eq!(basis.unflat(0), vec![0, 0]);
        for j in 0..basis.dim() {
            assert_eq!(basis.flat(&basis.unflat(j)), j);
        }
        // Lexicographic: (0,0),(0,1),...,(0,3),(1,0),...
        assert_eq!(basis.unflat(3), vec![0, 3]);
        assert_eq!(basis.unflat(4), vec![1, 0]);
    }

    #[test]
    fn annihilation_small_matrices() {
        let a1 = annihilation_matrix(1);
        assert_eq!(a1[[0, 1]], c(1.0, 0.0));
        assert_eq!(a1[[0, 0]], c(0.0, 0.0));
        assert_eq!(a1[[1, 0]], c(0.0, 0.0));
        assert_eq!(a1[[1, 1]], c(0.0, 0.0));

        let a2 = annihilation_matrix(2);
        assert_eq!(a2[[0, 1]], c(1.0, 0.0));
        assert_eq!(a2[[1, 2]], c(2.0_f64.sqrt(), 0.0));
        let nonzero = a2.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn commutator_truncation_defect() {
        // [a, a†] on the truncated space is the identity except the last
        // diagonal entry, where it is -d (defect -d-1 relative to identity).
        let d = 3;
        let a = annihilation_matrix(d);
        let adag = creation_matrix(d);
        let comm = a.dot(&adag) - adag.dot(&a);
        let n = d as usize + 1;
        for r in 0..n {
            for col in 0..n {
                let expect = if r == col && r < n - 1 {
                    1.0
                } else if r == col {
                    -(d as f64)
                } else {
                    0.0
                };
                assert!((comm[[r, col]] - c(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hp_diagonal_matches_polynomial() {
        let p = parse("x1 - 1").unwrap();
        let basis = BasisMap::new(&[2]).unwrap();
        let hp = build_hp(&p, &basis).unwrap();
        assert_eq!(hp.diagonal(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn hp_circle_zero_entry() {
        let p = parse("x1^2 + x2^2 - 25").unwrap();
        let basis = BasisMap::new(&[5, 5]).unwrap();
        let hp = build_hp(&p, &basis).unwrap();
        let j = basis.flat(&[3, 4]);
        assert_eq!(hp.entries()[[j, j]], c(0.0, 0.0));
    }

    #[test]
    fn hp_minimum_agrees_with_oracle() {
        for text in ["x1^2 - 7", "(x1 - 2)*(x1 - 5)", "x1^2 + x2^2 - 25", "3*x1 - x2^2 + 2"] {
            let p = parse(text).unwrap();
            let cutoffs: Vec<u32> = vec![6; p.num_vars()];
            let basis = BasisMap::new(&cutoffs).unwrap();
            let hp = build_hp(&p, &basis).unwrap();
            let min_diag = hp
                .diagonal()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let oracle =
                brute_force_min_square(&p, &LatticeBox::from_cutoffs(&cutoffs)).unwrap();
            let oracle_f64: f64 = oracle.min_square.to_string().parse().unwrap();
            assert_eq!(min_diag, oracle_f64, "{text}");
        }
    }

    #[test]
    fn hp_overflow_guard() {
        let p = parse("x1^9").unwrap();
        let basis = BasisMap::new(&[99]).unwrap();
        // 99^18 far exceeds 2^53.
        assert!(matches!(
            build_hp(&p, &basis),
            Err(FockError::Diophantine(
                DiophantineError::PrecisionOverflow { .. }
            ))
        ));
    }

    #[test]
    fn hi_at_zero_alpha_is_diagonal_with_zero_ground() {
        let p = parse("x1 + x2").unwrap();
        let instance = ProblemInstance::new(
            p,
            &[2, 2],
            vec![2.0_f64.sqrt(), 3.0_f64.sqrt()],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            Schedule::Linear,
        )
        .unwrap();
        let hi = build_hi(&instance);
        // Diagonal Σ λ_i n_i with smallest eigenvalue exactly zero.
        for (j, index) in instance.basis.indices().enumerate() {
            let expect =
                2.0_f64.sqrt() * index[0] as f64 + 3.0_f64.sqrt() * index[1] as f64;
            assert_eq!(hi.entries()[[j, j]], c(expect, 0.0));
            for k in 0..instance.basis.dim() {
                if k != j {
                    assert_eq!(hi.entries()[[j, k]], c(0.0, 0.0));
                }
            }
        }
        assert_eq!(hi.diagonal()[0], 0.0);

        // All 9 eigenvalue sums are distinct (λ = sqrt of distinct primes).
        let mut sums = hi.diagonal();
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in sums.windows(2) {
            assert!(pair[1] - pair[0] > 1e-9);
        }
    }

    #[test]
    fn hi_displaced_ground_energy_near_zero() {
        let p = parse("x1").unwrap();
        let instance = ProblemInstance::new(
            p,
            &[15],
            vec![1.0],
            vec![c(1.0, 0.0)],
            Schedule::Linear,
        )
        .unwrap();
        let hi = build_hi(&instance);
        let eig = hermitian_eig(hi.entries()).unwrap();
        assert!(eig.eigenvalues[0].abs() < 1e-8, "{}", eig.eigenvalues[0]);
    }

    #[test]
    fn hi_block_structure() {
        // Off-tridiagonal-block entries vanish: a matrix element can only
        // connect multi-indices differing by at most one quantum in exactly
        // one mode.
        let p = parse("x1 + x2").unwrap();
        let instance = ProblemInstance::with_defaults(p, &[3, 3]).unwrap();
        let hi = build_hi(&instance);
        let basis = &instance.basis;
        for j in 0..basis.dim() {
            for k in 0..basis.dim() {
                let nj = basis.unflat(j);
                let nk = basis.unflat(k);
                let diffs: Vec<i64> = nj
                    .iter()
                    .zip(&nk)
                    .map(|(&a, &b)| a as i64 - b as i64)
                    .collect();
                let changed: Vec<i64> = diffs.iter().copied().filter(|&d| d != 0).collect();
                let allowed = changed.is_empty() || (changed.len() == 1 && changed[0].abs() == 1);
                if !allowed {
                    assert_eq!(hi.entries()[[j, k]], c(0.0, 0.0), "{nj:?} vs {nk:?}");
                }
            }
        }
        assert!(hermiticity_defect(hi.entries()) <= HERMITICITY_TOL);
    }

    #[test]
    fn basis_states_are_unit_kets() {
        let basis = BasisMap::new(&[2, 2]).unwrap();
        let ket = WaveFunction::basis_state(&basis, &[1, 2]);
        assert_eq!(ket.norm(), 1.0);
        assert_eq!(ket.occupation(&[1, 2]), 1.0);
        assert_eq!(ket.amplitudes()[basis.flat(&[1, 2])], c(1.0, 0.0));
        assert_eq!(ket.total_number_expectation(), 3.0);
    }

    #[test]
    fn coherent_vacuum_at_zero_alpha() {
        let basis = BasisMap::new(&[4]).unwrap();
        let cs = coherent_state(&[c(0.0, 0.0)], &basis).unwrap();
        assert_eq!(cs.state.amplitudes()[0], c(1.0, 0.0));
        for j in 1..basis.dim() {
            assert_eq!(cs.state.amplitudes()[j], c(0.0, 0.0));
        }
        assert!(cs.truncation_warnings().is_empty());
    }

    #[test]
    fn coherent_number_expectation() {
        // Independent recomputation of <n> for the truncated, renormalized
        // state at alpha = 1, d = 15 via raw factorial sums.
        let basis = BasisMap::new(&[15]).unwrap();
        let cs = coherent_state(&[c(1.0, 0.0)], &basis).unwrap();
        let mut fact = 1.0;
        let mut kept = 0.0;
        let mut weighted = 0.0;
        for n in 0..=15u32 {
            if n > 0 {
                fact *= n as f64;
            }
            let w = (-1.0f64).exp() / fact;
            kept += w;
            weighted += n as f64 * w;
        }
        let expect = weighted / kept;
        let got = cs.state.total_number_expectation();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 1.0).abs() < 1e-6);
        assert!((cs.state.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_tail_warning_fires_for_tiny_cutoff() {
        let basis = BasisMap::new(&[1]).unwrap();
        let cs = coherent_state(&[c(2.0, 0.0)], &basis).unwrap();
        assert_eq!(cs.truncation_warnings().len(), 1);
        assert!((cs.state.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interpolate_endpoints_bit_identical() {
        let p = parse("x1 - 1").unwrap();
        let instance = ProblemInstance::with_defaults(p, &[4]).unwrap();
        let ops = instance.operators().unwrap();
        let at0 = interpolate(&ops.h_i, &ops.h_p, Schedule::Linear, 0.0).unwrap();
        let at1 = interpolate(&ops.h_i, &ops.h_p, Schedule::Linear, 1.0).unwrap();
        assert_eq!(at0.entries(), ops.h_i.entries());
        assert_eq!(at1.entries(), ops.h_p.entries());

        let mid = interpolate(&ops.h_i, &ops.h_p, Schedule::Linear, 0.5).unwrap();
        for j in 0..mid.dim() {
            for k in 0..mid.dim() {
                let expect = 0.5 * (ops.h_i.entries()[[j, k]] + ops.h_p.entries()[[j, k]]);
                assert!((mid.entries()[[j, k]] - expect).norm() < 1e-15);
            }
        }
        assert!(interpolate(&ops.h_i, &ops.h_p, Schedule::Linear, 1.5).is_err());
    }

    #[test]
    fn interpolate_is_affine_in_f() {
        // Strict 1e-14 at unit scale, relative to the entry scale beyond
        // (entries of the quartic fixture reach ~1300 where 1e-14 absolute
        // is below f64 resolution).
        for (text, cutoff) in [("x1 - 1", 5u32), ("(x1+1)^2", 5)] {
            let p = parse(text).unwrap();
            let instance = ProblemInstance::with_defaults(p, &[cutoff]).unwrap();
            let ops = instance.operators().unwrap();
            let scale = ops.w.max_abs_entry().max(1.0);
            for &s in &[0.125, 0.5, 0.875] {
                let hs = interpolate(&ops.h_i, &ops.h_p, Schedule::Linear, s).unwrap();
                let f = Schedule::Linear.f(s);
                for j in 0..hs.dim() {
                    for k in 0..hs.dim() {
                        let lhs = hs.entries()[[j, k]] - ops.h_i.entries()[[j, k]];
                        let rhs = (ops.h_p.entries()[[j, k]] - ops.h_i.entries()[[j, k]]) * f;
                        assert!((lhs - rhs).norm() < 1e-14 * scale, "{text}");
                    }
                }
            }
        }
    }

    #[test]
    fn lambdas_are_prime_square_roots() {
        assert_eq!(choose_lambdas(1), vec![2.0_f64.sqrt()]);
        assert_eq!(
            choose_lambdas(3),
            vec![2.0_f64.sqrt(), 3.0_f64.sqrt(), 5.0_f64.sqrt()]
        );
    }

    #[test]
    fn lambda_degeneracy_scan() {
        // All 49 sums sqrt(2) n1 + sqrt(3) n2 over [0,6]² differ pairwise.
        let lambdas = choose_lambdas(2);
        let mut sums = Vec::new();
        for n1 in 0..=6 {
            for n2 in 0..=6 {
                sums.push(lambdas[0] * n1 as f64 + lambdas[1] * n2 as f64);
            }
        }
        for i in 0..sums.len() {
            for j in (i + 1)..sums.len() {
                assert!((sums[i] - sums[j]).abs() > 1e-9, "{i} {j}");
            }
        }
    }

    #[test]
    fn schedule_contracts() {
        for schedule in [Schedule::Linear, Schedule::Smooth] {
            assert_eq!(schedule.f(0.0), 0.0);
            assert_eq!(schedule.f(1.0), 1.0);
            let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            for pair in grid.windows(2) {
                assert!(schedule.f(pair[1]) >= schedule.f(pair[0]));
            }
            let h = 1e-5;
            for &s in &grid[1..grid.len() - 1] {
                let fd = (schedule.f(s + h) - schedule.f(s - h)) / (2.0 * h);
                assert!(
                    (fd - schedule.f_prime(s)).abs() < 1e-6,
                    "{} at {s}",
                    schedule.name()
                );
            }
        }
    }

    #[test]
    fn built_operators_are_hermitian() {
        let p = parse("x1^2 + x2 - 3").unwrap();
        let instance = ProblemInstance::with_defaults(p, &[4, 3]).unwrap();
        let ops = instance.operators().unwrap();
        for op in [&ops.h_i, &ops.h_p, &ops.w] {
            assert!(hermiticity_defect(op.entries()) <= HERMITICITY_TOL);
        }
    }

    #[test]
    fn oracle_biguint_is_consistent() {
        let p = parse("x1 - 1").unwrap();
        let oracle = brute_force_min_square(&p, &LatticeBox::from_cutoffs(&[8])).unwrap();
        assert_eq!(oracle.min_square, BigUint::from(0u32));
        assert_eq!(oracle.witnesses, vec![vec![1]]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn constructed_operators_are_hermitian(
                coeffs in proptest::collection::vec(-9i64..=9, 3),
                lambda_seeds in proptest::collection::vec(0.5f64..3.0, 2),
                alpha_parts in proptest::collection::vec(-1.5f64..1.5, 4),
            ) {
                // D = c0 x1^2 + c1 x2 + c2 over a small two-mode basis.
                let p = crate::diophantine::Polynomial::new(
                    2,
                    [
                        (num_bigint::BigInt::from(coeffs[0]), vec![2, 0]),
                        (num_bigint::BigInt::from(coeffs[1]), vec![0, 1]),
                        (num_bigint::BigInt::from(coeffs[2]), vec![0, 0]),
                    ],
                )
                .unwrap();
                let alphas = vec![
                    C64::new(alpha_parts[0], alpha_parts[1]),
                    C64::new(alpha_parts[2], alpha_parts[3]),
                ];
                let instance = ProblemInstance::new(
                    p,
                    &[3, 3],
                    lambda_seeds.clone(),
                    alphas,
                    Schedule::Smooth,
                )
                .unwrap();
                let ops = instance.operators().unwrap();
                for op in [&ops.h_i, &ops.h_p, &ops.w] {
                    prop_assert!(hermiticity_defect(op.entries()) <= HERMITICITY_TOL);
                }
                let mid = interpolate(&ops.h_i, &ops.h_p, instance.schedule, 0.37).unwrap();
                prop_assert!(hermiticity_defect(mid.entries()) <= HERMITICITY_TOL);
            }
        }
    }
}
