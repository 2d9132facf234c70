//! The "kinematic" route: spectral-flow continuation.
//!
//! Follows the `M` lowest instantaneous eigenpairs of the interpolating
//! operator from the constructively known displaced-oscillator spectrum at
//! `s = 0` to the problem operator at `s = 1`. Each step takes a first-order
//! predictor from the coupled eigenvalue/eigenvector derivative system
//! (truncated to the tracked states), then corrects with a full dense
//! eigensolve and gauge-aligns the corrected vectors against the prediction.
//! The predictor-corrector discrepancy doubles as the empirical remainder
//! estimate that drives step-size control.
//!
//! The final ground eigenvalue is integer-valued by construction of the
//! problem operator, so modest accuracy at `s = 1` pins the answer: values
//! within 0.3 of an integer snap confidently.

use std::fmt;
use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{FockError, HermitianOperator, ProblemInstance};
use crate::linalg::{
    hermitian_eig, hermitian_eig_warm, inner, vector_norm, EigenDecomposition, LinalgError,
};

/// Tracked eigenvalue pairs closer than this are treated as a collapse of the
/// flow-derivative denominators.
pub const DEFAULT_GAP_EPS: f64 = 1e-6;

/// Snapping confidence radius: the problem spectrum is integer-valued, so
/// this much accuracy distinguishes neighbouring integers.
pub const SNAP_CONFIDENCE: f64 = 0.3;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("tracked eigenvalues {lower} and {upper} collapse at s = {s} (gap {gap:.3e})")]
    GapCollapse {
        s: f64,
        lower: usize,
        upper: usize,
        gap: f64,
    },
    #[error(
        "no clear eigenvector match for column {column} at s = {s} (best overlap {best_overlap:.3})"
    )]
    AmbiguousMatch {
        s: f64,
        column: usize,
        best_overlap: f64,
    },
    #[error("step size underflow at s = {s} (eps = {eps:.3e})")]
    StepUnderflow { s: f64, eps: f64 },
    #[error("work budget exhausted at s = {s} after {spent:.3e} units")]
    BudgetExhausted { s: f64, spent: f64 },
    #[error("step limit {limit} reached at s = {s}")]
    StepLimit { s: f64, limit: usize },
    #[error("need at least {needed} tracked states, got {got}")]
    TooFewTracked { needed: usize, got: usize },
    #[error("cannot track {requested} states in dimension {dim}")]
    TooManyTracked { requested: usize, dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Continuation failure with the successfully computed path prefix attached.
#[derive(Debug, Error)]
pub struct ContinuationError {
    pub error: FlowError,
    pub path: FlowPath,
}

impl fmt::Display for ContinuationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} path states computed)",
            self.error,
            self.path.states.len()
        )
    }
}

// ---------------------------------------------------------------------------
// Flow state
// ---------------------------------------------------------------------------

/// The tracked part of the instantaneous eigensystem at one parameter value.
#[derive(Debug, Clone)]
pub struct FlowState {
    /// Interpolation parameter in `[0, 1]`.
    pub s: f64,
    /// Tracked eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvector columns (`dim x M`), orthonormal.
    pub eigenvectors: Array2<C64>,
    /// Smallest adjacent gap among the tracked eigenvalues.
    pub gap_floor: f64,
}

fn gap_floor_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min)
}

impl FlowState {
    fn from_decomposition(s: f64, eig: &EigenDecomposition, m: usize) -> Self {
        let dim = eig.eigenvectors.nrows();
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().take(m).copied().collect();
        let mut eigenvectors = Array2::zeros((dim, m));
        for q in 0..m {
            for r in 0..dim {
                eigenvectors[[r, q]] = eig.eigenvectors[[r, q]];
            }
        }
        let gap_floor = gap_floor_of(&eigenvalues);
        FlowState {
            s,
            eigenvalues,
            eigenvectors,
            gap_floor,
        }
    }

    pub fn num_tracked(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Ground eigenvalue.
    pub fn e0(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest deviation from columnwise orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.num_tracked();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in a..m {
                let g = inner(&self.eigenvectors.column(a), &self.eigenvectors.column(b));
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest eigenpair residual `‖H v - E v‖` against an operator.
    pub fn residual_against(&self, h: &HermitianOperator) -> f64 {
        let mut worst = 0.0f64;
        for q in 0..self.num_tracked() {
            let v = self.eigenvectors.column(q).to_owned();
            let hv = h.apply(&v);
            let r: f64 = hv
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b * self.eigenvalues[q]).norm_sqr())
                .sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }
}

/// The `M` lowest eigenpairs of a Hermitian operator, as a flow state at
/// `s = 0`. Used both as the continuation initializer and as the
/// corrector/oracle along the path.
pub fn eigensolve(h: &HermitianOperator, m: usize) -> Result<FlowState, FlowError> {
    if m == 0 {
        return Err(FlowError::TooFewTracked { needed: 1, got: 0 });
    }
    if m > h.dim() {
        return Err(FlowError::TooManyTracked {
            requested: m,
            dim: h.dim(),
        });
    }
    let eig = hermitian_eig(h.entries())?;
    Ok(FlowState::from_decomposition(0.0, &eig, m))
}

// ---------------------------------------------------------------------------
// Flow derivatives
// ---------------------------------------------------------------------------

/// Parameter derivatives of the tracked eigensystem.
#[derive(Debug, Clone)]
pub struct FlowDerivatives {
    /// `dE_q/ds = f'(s) ⟨E_q|W|E_q⟩`.
    pub d_eigenvalues: Vec<f64>,
    /// `d|E_q⟩/ds`, expanded over the tracked states only; the diagonal gauge
    /// component is projected out exactly.
    pub d_eigenvectors: Array2<C64>,
}

/// First-order derivatives of eigenvalues and eigenvectors along the
/// deformation, truncated to the tracked subspace.
///
/// Fails with [`FlowError::GapCollapse`] when any adjacent tracked pair is
/// closer than `gap_eps`, which is where the eigenvector derivative
/// denominators blow up.
pub fn flow_derivatives(
    state: &FlowState,
    w: &HermitianOperator,
    f_prime: f64,
    gap_eps: f64,
) -> Result<FlowDerivatives, FlowError> {
    let m = state.num_tracked();
    let dim = state.dim();
    for q in 1..m {
        let gap = state.eigenvalues[q] - state.eigenvalues[q - 1];
        if gap.abs() <= gap_eps {
            return Err(FlowError::GapCollapse {
                s: state.s,
                lower: q - 1,
                upper: q,
                gap,
            });
        }
    }
    // Tracked matrix elements G[l][q] = ⟨E_l|W|E_q⟩.
    let wv = w.entries().dot(&state.eigenvectors);
    let mut g = Array2::<C64>::zeros((m, m));
    for l in 0..m {
        for q in 0..m {
            g[[l, q]] = inner(&state.eigenvectors.column(l), &wv.column(q));
        }
    }
    let d_eigenvalues: Vec<f64> = (0..m).map(|q| f_prime * g[[q, q]].re).collect();
    let mut d_eigenvectors = Array2::<C64>::zeros((dim, m));
    for q in 0..m {
        for l in 0..m {
            if l == q {
                continue;
            }
            let denom = state.eigenvalues[q] - state.eigenvalues[l];
            let coeff = g[[l, q]] * (f_prime / denom);
            for r in 0..dim {
                d_eigenvectors[[r, q]] += coeff * state.eigenvectors[[r, l]];
            }
        }
        // Pin the gauge: remove any roundoff component along |E_q⟩ so that
        // ⟨E_q|dE_q/ds⟩ is zero at machine precision.
        let proj = inner(
            &state.eigenvectors.column(q),
            &d_eigenvectors.column(q).view(),
        );
        for r in 0..dim {
            let vq = state.eigenvectors[[r, q]];
            d_eigenvectors[[r, q]] -= vq * proj;
        }
    }
    Ok(FlowDerivatives {
        d_eigenvalues,
        d_eigenvectors,
    })
}

// ---------------------------------------------------------------------------
// Gauge alignment
// ---------------------------------------------------------------------------

fn align_columns(
    reference: &Array2<C64>,
    candidate: &FlowState,
    apply_phases: bool,
) -> Result<(FlowState, Vec<usize>), FlowError> {
    // The candidate may carry more columns than the reference (the endpoint
    // hop matches the tracked branches against a full decomposition, since
    // a degenerate shell's lowest-M subset need not contain them).
    let m = reference.ncols();
    let cand_cols = candidate.num_tracked();
    assert!(cand_cols >= m, "candidate must cover the reference columns");
    assert_eq!(reference.nrows(), candidate.dim(), "reference row count");

    // Overlap of every reference column with every candidate column.
    let mut overlaps = Array2::<C64>::zeros((m, cand_cols));
    for r in 0..m {
        for c in 0..cand_cols {
            overlaps[[r, c]] = inner(&reference.column(r), &candidate.eigenvectors.column(c));
        }
    }
    // Greedy assignment by descending |overlap|; ties broken by index for
    // determinism.
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(m * cand_cols);
    for r in 0..m {
        for c in 0..cand_cols {
            entries.push((overlaps[[r, c]].norm(), r, c));
        }
    }
    entries.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite overlaps")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut assignment: Vec<Option<usize>> = vec![None; m];
    let mut taken = vec![false; cand_cols];
    for (_, r, c) in entries {
        if assignment[r].is_none() && !taken[c] {
            assignment[r] = Some(c);
            taken[c] = true;
        }
    }
    let assignment: Vec<usize> = assignment.into_iter().map(|a| a.expect("complete")).collect();
    for (r, &c) in assignment.iter().enumerate() {
        let best = overlaps[[r, c]].norm();
        if best < 0.5 {
            return Err(FlowError::AmbiguousMatch {
                s: candidate.s,
                column: r,
                best_overlap: best,
            });
        }
    }

    let dim = candidate.dim();
    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = Array2::<C64>::zeros((dim, m));
    for (r, &c) in assignment.iter().enumerate() {
        eigenvalues.push(candidate.eigenvalues[c]);
        let phase = if apply_phases {
            let o = overlaps[[r, c]];
            o.conj() / o.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for row in 0..dim {
            eigenvectors[[row, r]] = candidate.eigenvectors[[row, c]] * phase;
        }
    }
    let gap_floor = {
        let mut sorted = eigenvalues.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        gap_floor_of(&sorted)
    };
    Ok((
        FlowState {
            s: candidate.s,
            eigenvalues,
            eigenvectors,
            gap_floor,
        },
        assignment,
    ))
}

fn sort_state_ascending(state: FlowState) -> FlowState {
    let m = state.num_tracked();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        state.eigenvalues[a]
            .partial_cmp(&state.eigenvalues[b])
            .expect("finite")
            .then(a.cmp(&b))
    });
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return state;
    }
    let dim = state.dim();
    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = Array2::<C64>::zeros((dim, m));
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(state.eigenvalues[src]);
        for r in 0..dim {
            eigenvectors[[r, dst]] = state.eigenvectors[[r, src]];
        }
    }
    let gap_floor = gap_floor_of(&eigenvalues);
    FlowState {
        s: state.s,
        eigenvalues,
        eigenvectors,
        gap_floor,
    }
}

/// Imaginary spread and real floor of the columnwise overlaps between a
/// reference set and an aligned state.
fn alignment_quality(reference: &Array2<C64>, aligned: &FlowState) -> (f64, f64) {
    let mut imag_max = 0.0f64;
    let mut re_min = f64::INFINITY;
    for q in 0..aligned.num_tracked() {
        let o = inner(&reference.column(q), &aligned.eigenvectors.column(q));
        imag_max = imag_max.max(o.im.abs());
        re_min = re_min.min(o.re);
    }
    (imag_max, re_min)
}

/// Match candidate eigenvector columns to a reference set by maximum
/// overlap, then rotate each matched column's phase so the overlap with its
/// reference is real and positive.
///
/// This is the discrete realization of the zero-gauge condition
/// `⟨E_q|∂_s E_q⟩ = 0`: the permutation restores continuity ordering across
/// near-crossings, the phase kills the arbitrary eigenvector phase. Fails
/// with [`FlowError::AmbiguousMatch`] when the best available overlap for
/// some column is below 0.5.
pub fn gauge_align(reference: &Array2<C64>, candidate: &FlowState) -> Result<FlowState, FlowError> {
    align_columns(reference, candidate, true).map(|(state, _)| state)
}

// ---------------------------------------------------------------------------
// Continuation
// ---------------------------------------------------------------------------

/// Step-control knobs for [`continue_flow_with`].
#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// Gap threshold below which flow derivatives refuse to evaluate.
    pub gap_eps: f64,
    /// Initial step size.
    pub eps_init: f64,
    /// Step-size ceiling.
    pub eps_max: f64,
    /// Step sizes below this abort the run.
    pub eps_min: f64,
    /// Minimum per-column predictor-corrector overlap for acceptance.
    pub min_overlap: f64,
    /// Close enough to `s = 1` for the corrector-only endpoint hop when the
    /// flow derivatives hit a gap collapse.
    pub endpoint_hop_window: f64,
    /// Apply gauge phases during alignment (disable to verify that phases
    /// never affect eigenvalues).
    pub apply_phase_alignment: bool,
    /// A cold (from-scratch) corrector eigensolve is forced every this many
    /// accepted steps, stopping slow unitarity drift of the warm-start chain.
    pub cold_solve_interval: usize,
    /// Optional work budget in model flops; exceeded budgets abort with
    /// [`FlowError::BudgetExhausted`].
    pub work_budget: Option<f64>,
    /// Hard cap on accepted steps.
    pub max_steps: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            gap_eps: DEFAULT_GAP_EPS,
            eps_init: 0.01,
            eps_max: 0.05,
            eps_min: 1e-9,
            min_overlap: 0.9,
            endpoint_hop_window: 0.1,
            apply_phase_alignment: true,
            cold_solve_interval: 256,
            work_budget: None,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted continuation step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub s_from: f64,
    pub s_to: f64,
    pub step_size: f64,
    /// Number of states kept in the truncated derivative sums (= M).
    pub truncation_level: usize,
    /// Largest scaled predictor-corrector eigenvalue discrepancy; the
    /// empirical stand-in for the series remainder.
    pub remainder_estimate: f64,
    /// Smallest predictor-corrector overlap across tracked columns.
    pub min_overlap: f64,
    /// Largest imaginary part of the post-alignment overlaps
    /// `⟨reference_q|aligned_q⟩`; machine zero when the gauge phases were
    /// applied.
    pub alignment_imag_max: f64,
    /// Smallest real part of the post-alignment overlaps.
    pub alignment_re_min: f64,
    /// True for the corrector-only endpoint hop (no predictor available).
    pub corrector_only: bool,
}

/// Accepted states from `s = 0` to `s = 1` plus the per-step log.
#[derive(Debug, Clone, Default)]
pub struct FlowPath {
    pub states: Vec<FlowState>,
    pub step_log: Vec<StepRecord>,
}

impl FlowPath {
    pub fn final_state(&self) -> Option<&FlowState> {
        self.states.last()
    }

    /// Ground eigenvalue at the end of the path.
    pub fn e0_final(&self) -> Option<f64> {
        self.final_state().map(|s| s.e0())
    }

    /// CSV rows: `s, E_0..E_{M-1}, gap_floor, eps, N`.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let m = self
            .states
            .first()
            .map(|s| s.num_tracked())
            .unwrap_or(0);
        write!(out, "s")?;
        for q in 0..m {
            write!(out, ",E_{q}")?;
        }
        writeln!(out, ",gap_floor,eps,N")?;
        for (i, state) in self.states.iter().enumerate() {
            write!(out, "{}", state.s)?;
            for value in &state.eigenvalues {
                write!(out, ",{value}")?;
            }
            let eps = if i == 0 {
                0.0
            } else {
                self.step_log[i - 1].step_size
            };
            writeln!(out, ",{},{},{}", state.gap_floor, eps, m)?;
        }
        Ok(())
    }
}

/// Continuation with default step control; see [`continue_flow_with`].
pub fn continue_flow(
    instance: &ProblemInstance,
    m: usize,
    tol: f64,
) -> Result<FlowPath, ContinuationError> {
    continue_flow_with(instance, m, tol, &ContinuationConfig::default())
}

fn fail(error: FlowError, path: FlowPath) -> ContinuationError {
    ContinuationError { error, path }
}

/// Follow the `m` lowest eigenpairs of the interpolating operator from
/// `s = 0` to `s = 1`.
///
/// Every step predicts first-order in the step size using
/// [`flow_derivatives`], corrects with a full eigensolve of the interpolant,
/// and gauge-aligns the corrected state against the prediction. A step is
/// accepted when every eigenvalue discrepancy is below `tol · max(1, |E|)`
/// and every predictor-corrector overlap is at least
/// `max(config.min_overlap, 1 - tol)`; otherwise the step halves. After two
/// consecutive acceptances the step grows by 1.5 up to the ceiling.
///
/// If the flow derivatives hit a gap collapse within
/// `config.endpoint_hop_window` of `s = 1` (the problem operator may carry a
/// degenerate spectrum), the remaining segment is covered by a single
/// corrector-only eigensolve at `s = 1`.
pub fn continue_flow_with(
    instance: &ProblemInstance,
    m: usize,
    tol: f64,
    config: &ContinuationConfig,
) -> Result<FlowPath, ContinuationError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut path = FlowPath::default();
    if m < 2 {
        return Err(fail(FlowError::TooFewTracked { needed: 2, got: m }, path));
    }
    let ops = match instance.operators() {
        Ok(ops) => ops,
        Err(e) => return Err(fail(e.into(), path)),
    };
    let dim = ops.h_i.dim();
    if m > dim {
        return Err(fail(
            FlowError::TooManyTracked {
                requested: m,
                dim,
            },
            path,
        ));
    }
    let schedule = instance.schedule;
    let dim_cubed = (dim * dim * dim) as f64;
    let mut spent = 0.0f64;

    // Initial state: the constructively known spectrum at s = 0.
    let state0 = match eigensolve(&ops.h_i, m) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, path)),
    };
    spent += 40.0 * dim_cubed;
    path.states.push(state0);

    let mut eps = config.eps_init.min(config.eps_max);
    let mut consecutive_accepts = 0usize;
    let mut accepted = 0usize;
    // Full eigenbasis of the previous corrector, reused to warm-start the
    // next corrector solve.
    let mut warm_basis: Option<Array2<C64>> = None;

    'outer: loop {
        let state = path.states.last().expect("path non-empty").clone();
        if state.s >= 1.0 {
            break;
        }
        if accepted >= config.max_steps {
            return Err(fail(
                FlowError::StepLimit {
                    s: state.s,
                    limit: config.max_steps,
                },
                path,
            ));
        }
        if let Some(budget) = config.work_budget {
            if spent > budget {
                return Err(fail(FlowError::BudgetExhausted { s: state.s, spent }, path));
            }
        }

        let derivs = match flow_derivatives(&state, &ops.w, schedule.f_prime(state.s), config.gap_eps)
        {
            Ok(d) => d,
            Err(collapse @ FlowError::GapCollapse { .. }) => {
                // Degeneracy near the endpoint disables the derivatives; the
                // final segment is covered by the corrector alone.
                if 1.0 - state.s <= config.endpoint_hop_window {
                    let eig = match hermitian_eig(ops.h_p.entries()) {
                        Ok(e) => e,
                        Err(e) => return Err(fail(e.into(), path)),
                    };
                    // Match against the full decomposition: inside a
                    // degenerate shell the tracked branch need not be among
                    // the M lowest columns the tie-break picks.
                    let candidate = FlowState::from_decomposition(1.0, &eig, dim);
                    match align_columns(
                        &state.eigenvectors,
                        &candidate,
                        config.apply_phase_alignment,
                    ) {
                        Ok((aligned, _)) => {
                            let (imag_max, re_min) =
                                alignment_quality(&state.eigenvectors, &aligned);
                            // Branches may have crossed right at the
                            // endpoint; restore ascending storage order.
                            let aligned = sort_state_ascending(aligned);
                            path.step_log.push(StepRecord {
                                s_from: state.s,
                                s_to: 1.0,
                                step_size: 1.0 - state.s,
                                truncation_level: m,
                                remainder_estimate: (aligned.e0() - state.e0()).abs(),
                                min_overlap: f64::NAN,
                                alignment_imag_max: imag_max,
                                alignment_re_min: re_min,
                                corrector_only: true,
                            });
                            path.states.push(aligned);
                            break 'outer;
                        }
                        Err(_) => return Err(fail(collapse, path)),
                    }
                }
                return Err(fail(collapse, path));
            }
            Err(e) => return Err(fail(e, path)),
        };

        // Shrink-retry loop over the step size. Underflow is judged on the
        // controller value, not on the remaining interval: a final hop
        // smaller than the floor is still a valid step onto s = 1.
        let mut last_align_error: Option<FlowError> = None;
        loop {
            if eps < config.eps_min {
                let error = last_align_error
                    .take()
                    .unwrap_or(FlowError::StepUnderflow {
                        s: state.s,
                        eps,
                    });
                return Err(fail(error, path));
            }
            let eps_eff = eps.min(1.0 - state.s).min(config.eps_max);
            let s_new = if eps_eff >= 1.0 - state.s {
                1.0
            } else {
                state.s + eps_eff
            };

            // First-order predictor in eps (the truncated series step).
            let mut predicted_values = Vec::with_capacity(m);
            for q in 0..m {
                predicted_values.push(state.eigenvalues[q] + eps_eff * derivs.d_eigenvalues[q]);
            }
            let mut predicted_vectors = Array2::<C64>::zeros((dim, m));
            for q in 0..m {
                for r in 0..dim {
                    predicted_vectors[[r, q]] = state.eigenvectors[[r, q]]
                        + derivs.d_eigenvectors[[r, q]] * eps_eff;
                }
                let norm = vector_norm(&predicted_vectors.column(q));
                for r in 0..dim {
                    predicted_vectors[[r, q]] /= C64::new(norm, 0.0);
                }
            }

            // Corrector: full eigensolve of the interpolant at the new s.
            // The endpoint is always solved cold so that a diagonal problem
            // operator yields its exact eigenvalues.
            let h_new = ops.at_schedule_value(schedule.f(s_new));
            let use_cold = warm_basis.is_none()
                || s_new == 1.0
                || accepted % config.cold_solve_interval == config.cold_solve_interval - 1;
            let eig = {
                let solve = if use_cold {
                    spent += 40.0 * dim_cubed;
                    hermitian_eig(h_new.entries())
                } else {
                    spent += 12.0 * dim_cubed;
                    hermitian_eig_warm(h_new.entries(), warm_basis.as_ref().expect("warm basis"))
                };
                match solve {
                    Ok(e) => e,
                    Err(e) => return Err(fail(e.into(), path)),
                }
            };
            let candidate = FlowState::from_decomposition(s_new, &eig, m);

            let aligned = match align_columns(
                &predicted_vectors,
                &candidate,
                config.apply_phase_alignment,
            ) {
                Ok((aligned, assignment)) => {
                    if assignment.iter().enumerate().any(|(i, &c)| i != c) {
                        // A tracked pair swapped order within the step; treat
                        // like a too-large step.
                        None
                    } else {
                        Some(aligned)
                    }
                }
                Err(e) => {
                    last_align_error = Some(e);
                    None
                }
            };

            let accepted_step = aligned.and_then(|aligned| {
                let mut worst_disc = 0.0f64;
                for q in 0..m {
                    let scale = aligned.eigenvalues[q].abs().max(1.0);
                    let disc = (predicted_values[q] - aligned.eigenvalues[q]).abs() / scale;
                    worst_disc = worst_disc.max(disc);
                }
                let mut min_overlap = f64::INFINITY;
                for q in 0..m {
                    let o = inner(
                        &predicted_vectors.column(q),
                        &aligned.eigenvectors.column(q),
                    )
                    .norm();
                    min_overlap = min_overlap.min(o);
                }
                // Corrector consistency: both the coarse crossing guard and
                // the tolerance-level overlap must hold.
                let overlap_floor = config.min_overlap.max(1.0 - tol);
                (worst_disc <= tol && min_overlap >= overlap_floor)
                    .then_some((aligned, worst_disc, min_overlap))
            });

            match accepted_step {
                Some((aligned, discrepancy, min_overlap)) => {
                    let (imag_max, re_min) = alignment_quality(&predicted_vectors, &aligned);
                    path.step_log.push(StepRecord {
                        s_from: state.s,
                        s_to: s_new,
                        step_size: eps_eff,
                        truncation_level: m,
                        remainder_estimate: discrepancy,
                        min_overlap,
                        alignment_imag_max: imag_max,
                        alignment_re_min: re_min,
                        corrector_only: false,
                    });
                    warm_basis = Some(eig.eigenvectors);
                    path.states.push(aligned);
                    accepted += 1;
                    consecutive_accepts += 1;
                    if consecutive_accepts >= 2 {
                        eps = (eps * 1.5).min(config.eps_max);
                        consecutive_accepts = 0;
                    }
                    break;
                }
                None => {
                    eps *= 0.5;
                    consecutive_accepts = 0;
                }
            }
        }
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// Verdict snapping
// ---------------------------------------------------------------------------

/// Result of snapping a final ground eigenvalue to the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapVerdict {
    /// Nearest non-negative integer.
    pub snapped: u64,
    /// True when the residual is below [`SNAP_CONFIDENCE`].
    pub confident: bool,
}

impl SnapVerdict {
    /// The equation has a solution inside the truncation box exactly when
    /// the ground eigenvalue snaps confidently to zero.
    pub fn solvable_within_truncation(&self) -> bool {
        self.snapped == 0 && self.confident
    }
}

/// Snap a final ground eigenvalue to the nearest non-negative integer.
///
/// The problem spectrum is integer-valued by construction, so accuracy
/// better than 0.3 suffices to tell neighbouring integers apart.
pub fn snap_verdict(e0_final: f64) -> SnapVerdict {
    let snapped = e0_final.round().max(0.0) as u64;
    let confident = (e0_final - snapped as f64).abs() < SNAP_CONFIDENCE;
    SnapVerdict { snapped, confident }
}
