//! Merge the exact oracle, the spectral flow, and the adiabatic dynamics
//! into one auditable verdict.
//!
//! A finite truncation can certify a solution (exhibited and exactly
//! verified) or the absence of solutions *inside the box*; it can never rule
//! out solutions beyond the box, and the verdict vocabulary keeps that
//! distinction explicit. The exact oracle participates in every verdict at
//! desk scale: the point of the numerical routes is to be validated, not to
//! outrun enumeration.

use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::Serializer;
use serde::Serialize;
use thiserror::Error;

use crate::diophantine::{
    brute_force_min_square_capped, DiophantineError, LatticeBox, Polynomial,
    DEFAULT_ENUMERATION_CAP,
};
use crate::dynamics::{tau_sweep_with, DynamicsError, SweepConfig};
use crate::flow::{continue_flow_with, snap_verdict, ContinuationConfig, SnapVerdict};
use crate::fock::{FockError, ProblemInstance, Schedule};

/// Marker prefix for the cutoff-escalation diagnostic, stable for callers
/// that branch on it.
pub const BOUNDARY_DIAGNOSTIC: &str = "escalate cutoffs";

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("cutoff ladder must be non-empty and strictly increasing (rung {rung})")]
    BadLadder { rung: usize },
}

/// What a bounded run can honestly claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    /// A lattice point inside the box satisfies the equation exactly.
    SolvableWithWitness,
    /// All three components agree the minimum of `D²` over the box is at
    /// least 1. Says nothing about points beyond the box.
    NoSolutionWithinBox,
    /// The components disagree or some component failed; see diagnostics.
    Inconclusive,
}

fn serialize_biguint<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
    match value.to_u64() {
        Some(v) => serializer.serialize_u64(v),
        None => serializer.serialize_str(&value.to_string()),
    }
}

/// The merged decision artifact. Serializes with stable field names.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// An exactly verified solution, present iff the status is
    /// `SolvableWithWitness`. Prefers the lexicographically first witness
    /// with all coordinates positive, falling back to the first overall.
    pub witness: Option<Vec<u64>>,
    /// Final ground eigenvalue from the spectral flow, absent when the flow
    /// failed or was budget-capped.
    pub e0_flow: Option<f64>,
    /// Exact minimum of `D²` over the box.
    #[serde(serialize_with = "serialize_biguint")]
    pub e0_oracle: BigUint,
    /// Ground candidate identified by the adiabatic sweep, if any.
    pub dynamics_identified: Option<Vec<u64>>,
    pub cutoffs: Vec<u32>,
    pub diagnostics: Vec<String>,
}

/// Everything `decide` needs beyond the polynomial and the box.
#[derive(Debug, Clone)]
pub struct DecideConfig {
    /// Non-degeneracy weights; `None` takes square roots of the primes.
    pub lambdas: Option<Vec<f64>>,
    /// Displacements; `None` takes 1 for every mode.
    pub alphas: Option<Vec<C64>>,
    pub schedule: Schedule,
    /// Tracked states for the flow (clamped to the dimension).
    pub tracked: usize,
    /// Predictor-corrector tolerance for the flow.
    pub flow_tol: f64,
    pub tau0: f64,
    pub growth: f64,
    pub max_rounds: usize,
    pub steps_per_tau: f64,
    pub min_steps: usize,
    /// Work cap for the flow component; exceeding it demotes the component
    /// to a diagnostic instead of aborting the verdict.
    pub flow_budget: Option<f64>,
    /// Work cap for the sweep component.
    pub dynamics_budget: Option<f64>,
    pub enumeration_cap: u128,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            lambdas: None,
            alphas: None,
            schedule: Schedule::Linear,
            tracked: 6,
            flow_tol: 1e-6,
            tau0: 1.0,
            growth: 2.0,
            max_rounds: 16,
            steps_per_tau: 200.0,
            min_steps: 1000,
            flow_budget: Some(2e10),
            dynamics_budget: Some(3e10),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl DecideConfig {
    fn instance(&self, p: &Polynomial, cutoffs: &[u32]) -> Result<ProblemInstance, FockError> {
        let k = p.num_vars();
        let lambdas = self
            .lambdas
            .clone()
            .unwrap_or_else(|| crate::fock::choose_lambdas(k));
        let alphas = self
            .alphas
            .clone()
            .unwrap_or_else(|| vec![C64::new(1.0, 0.0); k]);
        ProblemInstance::new(p.clone(), cutoffs, lambdas, alphas, self.schedule)
    }
}

/// Lexicographically first witness with every coordinate positive, else the
/// first witness overall. Witness lists arrive lexicographically sorted.
fn pick_witness(witnesses: &[Vec<u64>]) -> Vec<u64> {
    witnesses
        .iter()
        .find(|w| w.iter().all(|&x| x >= 1))
        .unwrap_or(&witnesses[0])
        .clone()
}

/// Run all three components and merge them.
///
/// `SolvableWithWitness` requires an exactly verified witness (from the
/// oracle or a dynamics identification confirmed by exact evaluation);
/// `NoSolutionWithinBox` requires all three components to agree the box
/// minimum is at least 1; anything else is `Inconclusive` with diagnostics
/// naming the component that failed or disagreed. Flow and dynamics failures
/// demote to diagnostics rather than aborting, so an exact oracle answer is
/// never lost to numerics.
pub fn decide(p: &Polynomial, cutoffs: &[u32], config: &DecideConfig) -> Result<Verdict, DecisionError> {
    let lattice = LatticeBox::from_cutoffs(cutoffs);
    let instance = config.instance(p, cutoffs)?;
    let mut diagnostics: Vec<String> = Vec::new();

    let dim = instance.basis.dim();
    let tracked = config.tracked.clamp(2, dim);
    let flow_config = ContinuationConfig {
        work_budget: config.flow_budget,
        ..ContinuationConfig::default()
    };
    let sweep_config = SweepConfig {
        tau0: config.tau0,
        growth: config.growth,
        max_rounds: config.max_rounds,
        steps_per_tau: config.steps_per_tau,
        min_steps: config.min_steps,
        work_budget: config.dynamics_budget,
    };

    // The three components are independent; run the two numerical routes on
    // their own threads and enumerate on this one. Assembly below is a pure
    // merge, so the result does not depend on scheduling.
    let (oracle, flow_outcome, dynamics_outcome) = std::thread::scope(|scope| {
        let flow_handle = scope
            .spawn(|| continue_flow_with(&instance, tracked, config.flow_tol, &flow_config));
        let dynamics_handle = scope.spawn(|| tau_sweep_with(&instance, &sweep_config));
        let oracle = brute_force_min_square_capped(p, &lattice, config.enumeration_cap);
        (
            oracle,
            flow_handle.join().expect("flow thread must not panic"),
            dynamics_handle
                .join()
                .expect("dynamics thread must not panic"),
        )
    });

    // (a) the exact oracle.
    let oracle = oracle?;
    if oracle
        .witnesses
        .iter()
        .all(|w| lattice.on_upper_boundary(w))
    {
        diagnostics.push(format!(
            "box minimum {} attained only on the truncation boundary; {BOUNDARY_DIAGNOSTIC}",
            oracle.min_square
        ));
    }

    // (b) the kinematic route.
    let (e0_flow, snap) = match flow_outcome {
        Ok(path) => {
            let e0 = path.e0_final().expect("complete path has an endpoint");
            (Some(e0), Some(snap_verdict(e0)))
        }
        Err(failure) => {
            diagnostics.push(format!("flow: {failure}"));
            (None, None)
        }
    };

    // (c) the dynamical route, confirmed by exact evaluation.
    let mut dynamics_identified: Option<Vec<u64>> = None;
    let mut dynamics_square: Option<BigUint> = None;
    match dynamics_outcome {
        Ok(outcome) => {
            if outcome.truncated_by_budget {
                diagnostics.push(format!(
                    "dynamics: work budget exhausted after {} rounds without identification",
                    outcome.history.len()
                ));
            } else if outcome.identified.is_none() {
                diagnostics.push(format!(
                    "dynamics: no state reached majority occupation within {} rounds",
                    outcome.history.len()
                ));
            }
            if let Some(index) = outcome.identified {
                let point: Vec<u64> = index.iter().map(|&n| n as u64).collect();
                let value = p.evaluate(&point)?;
                let square = (&value * &value)
                    .to_biguint()
                    .expect("square is non-negative");
                if square != oracle.min_square {
                    diagnostics.push(format!(
                        "dynamics: identified state {point:?} has D² = {square}, oracle minimum is {}",
                        oracle.min_square
                    ));
                }
                dynamics_identified = Some(point);
                dynamics_square = Some(square);
            }
        }
        Err(failure) => {
            diagnostics.push(format!("dynamics: {failure}"));
        }
    }

    // Merge. A witness is only ever accepted with an exact zero.
    let oracle_witness = oracle.solvable().then(|| pick_witness(&oracle.witnesses));
    let dynamics_witness = match (&dynamics_identified, &dynamics_square) {
        (Some(point), Some(square)) if square.is_zero() => Some(point.clone()),
        _ => None,
    };
    let witness = oracle_witness.or(dynamics_witness);

    let status = if let Some(w) = &witness {
        debug_assert!(p.evaluate(w).expect("arity fixed").is_zero());
        if let Some(s) = snap {
            if s.confident && s.snapped >= 1 {
                diagnostics.push(format!(
                    "flow: ground eigenvalue snapped to {} despite the exhibited witness {w:?}",
                    s.snapped
                ));
            }
        }
        VerdictStatus::SolvableWithWitness
    } else {
        let oracle_agrees = oracle.min_square >= BigUint::one();
        let flow_agrees = snap.map(|s: SnapVerdict| s.confident && s.snapped >= 1);
        let dynamics_agrees = dynamics_square.as_ref().map(|sq| *sq >= BigUint::one());
        match (oracle_agrees, flow_agrees, dynamics_agrees) {
            (true, Some(true), Some(true)) => VerdictStatus::NoSolutionWithinBox,
            _ => {
                // Absent components have already left their diagnostics; a
                // present-but-disagreeing flow is spelled out here.
                if flow_agrees == Some(false) {
                    diagnostics.push(format!(
                        "flow: ground eigenvalue {e0_flow:?} does not confirm a positive minimum"
                    ));
                }
                VerdictStatus::Inconclusive
            }
        }
    };

    Ok(Verdict {
        status,
        witness,
        e0_flow,
        e0_oracle: oracle.min_square,
        dynamics_identified,
        cutoffs: cutoffs.to_vec(),
        diagnostics,
    })
}

/// One rung of a cutoff-escalation study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRung {
    pub cutoffs: Vec<u32>,
    pub verdict: Verdict,
    /// True when some minimizing point sits strictly inside the truncation
    /// (off the upper boundary), the practical convergence signal.
    pub interior_minimum: bool,
}

/// Verdicts across a ladder of increasing cutoffs.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub rungs: Vec<StudyRung>,
    /// True when every rung produced the same status.
    pub verdict_stable: bool,
}

/// Run [`decide`] at every rung of an increasing cutoff ladder and report
/// verdict stability plus boundary behaviour of the minimizers.
///
/// The truncation size a given equation needs is instance-dependent; the
/// ladder makes that dependence observable instead of guessing it.
pub fn convergence_study(
    p: &Polynomial,
    ladder: &[Vec<u32>],
    config: &DecideConfig,
) -> Result<StudyReport, DecisionError> {
    if ladder.is_empty() {
        return Err(DecisionError::BadLadder { rung: 0 });
    }
    for (rung, pair) in ladder.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        let non_decreasing = prev.len() == next.len()
            && prev.iter().zip(next).all(|(a, b)| a <= b)
            && prev.iter().zip(next).any(|(a, b)| a < b);
        if !non_decreasing {
            return Err(DecisionError::BadLadder { rung: rung + 1 });
        }
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    for cutoffs in ladder {
        let lattice = LatticeBox::from_cutoffs(cutoffs);
        let oracle = brute_force_min_square_capped(p, &lattice, config.enumeration_cap)?;
        let interior_minimum = oracle
            .witnesses
            .iter()
            .any(|w| !lattice.on_upper_boundary(w));
        let verdict = decide(p, cutoffs, config)?;
        rungs.push(StudyRung {
            cutoffs: cutoffs.clone(),
            verdict,
            interior_minimum,
        });
    }
    let first = rungs[0].verdict.status;
    let verdict_stable = rungs.iter().all(|r| r.verdict.status == first);
    Ok(StudyReport {
        rungs,
        verdict_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::parse;

    fn quick_config() -> DecideConfig {
        DecideConfig {
            max_rounds: 12,
            ..DecideConfig::default()
        }
    }

    #[test]
    fn decide_solvable_linear() {
        let p = parse("x1 - 1").unwrap();
        let verdict = decide(&p, &[8], &quick_config()).unwrap();
        assert_eq!(verdict.status, VerdictStatus::SolvableWithWitness);
        assert_eq!(verdict.witness, Some(vec![1]));
        assert_eq!(verdict.e0_oracle, BigUint::zero());
        assert_eq!(verdict.dynamics_identified, Some(vec![1]));
        let e0 = verdict.e0_flow.unwrap();
        assert!(e0.abs() < 1e-6);
        assert!(!verdict
            .diagnostics
            .iter()
            .any(|d| d.contains(BOUNDARY_DIAGNOSTIC)));
    }

    #[test]
    fn decide_unsolvable_shifted_square() {
        let p = parse("(x1+1)^2").unwrap();
        let verdict = decide(&p, &[8], &quick_config()).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NoSolutionWithinBox);
        assert_eq!(verdict.witness, None);
        assert_eq!(verdict.e0_oracle, BigUint::one());
        assert_eq!(verdict.dynamics_identified, Some(vec![0]));
        let e0 = verdict.e0_flow.unwrap();
        assert!((e0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn decide_boundary_escalation() {
        // The true solution x = 3 sits outside the box [0, 2]; the minimum
        // lands on the truncation boundary and the escalation warning fires.
        let p = parse("x1 - 3").unwrap();
        let verdict = decide(&p, &[2], &quick_config()).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NoSolutionWithinBox);
        assert_eq!(verdict.e0_oracle, BigUint::one());
        assert!(verdict
            .diagnostics
            .iter()
            .any(|d| d.contains(BOUNDARY_DIAGNOSTIC)));
    }

    #[test]
    fn decide_after_escalation_finds_witness() {
        let p = parse("x1 - 3").unwrap();
        let verdict = decide(&p, &[4], &quick_config()).unwrap();
        assert_eq!(verdict.status, VerdictStatus::SolvableWithWitness);
        assert_eq!(verdict.witness, Some(vec![3]));
        assert!(!verdict
            .diagnostics
            .iter()
            .any(|d| d.contains(BOUNDARY_DIAGNOSTIC)));
    }

    #[test]
    fn decide_with_exhausted_dynamics_is_inconclusive() {
        // No dynamics rounds at all: the no-solution case cannot reach three-way
        // agreement.
        let p = parse("(x1+1)^2").unwrap();
        let config = DecideConfig {
            max_rounds: 0,
            ..DecideConfig::default()
        };
        let verdict = decide(&p, &[6], &config).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Inconclusive);
        assert!(verdict
            .diagnostics
            .iter()
            .any(|d| d.starts_with("dynamics:")));
    }

    #[test]
    fn decide_solvable_does_not_need_dynamics() {
        let p = parse("x1 - 1").unwrap();
        let config = DecideConfig {
            max_rounds: 0,
            ..DecideConfig::default()
        };
        let verdict = decide(&p, &[8], &config).unwrap();
        assert_eq!(verdict.status, VerdictStatus::SolvableWithWitness);
        assert_eq!(verdict.witness, Some(vec![1]));
    }

    #[test]
    fn three_way_agreement_on_fixture_set() {
        for (text, cutoff) in [("x1 - 1", 8u32), ("(x1+1)^2", 8), ("x1 - 3", 4)] {
            let p = parse(text).unwrap();
            let verdict = decide(&p, &[cutoff], &quick_config()).unwrap();
            let snapped = snap_verdict(verdict.e0_flow.unwrap());
            assert!(snapped.confident, "{text} at {cutoff}");
            assert_eq!(
                BigUint::from(snapped.snapped),
                verdict.e0_oracle,
                "{text} at {cutoff}"
            );
            let identified = verdict.dynamics_identified.as_ref().unwrap();
            let value = p.evaluate(identified).unwrap();
            let square = (&value * &value).to_biguint().unwrap();
            assert_eq!(square, verdict.e0_oracle, "{text} at {cutoff}");
        }
    }

    #[test]
    fn dynamics_disagreement_is_reported_loudly() {
        // On the intentionally undersized box the majority criterion can
        // latch onto a transient non-ground state at short τ (the
        // identification rule is a postulate, not a theorem). The verdict
        // still rests on the exact components, and any value mismatch must
        // be spelled out in the diagnostics.
        let p = parse("x1 - 3").unwrap();
        let verdict = decide(&p, &[2], &quick_config()).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NoSolutionWithinBox);
        if let Some(identified) = &verdict.dynamics_identified {
            let value = p.evaluate(identified).unwrap();
            let square = (&value * &value).to_biguint().unwrap();
            if square != verdict.e0_oracle {
                assert!(
                    verdict
                        .diagnostics
                        .iter()
                        .any(|d| d.contains("oracle minimum")),
                    "mismatch must be diagnosed: {:?}",
                    verdict.diagnostics
                );
            }
        }
    }

    #[test]
    fn study_flips_verdict_when_box_grows() {
        let p = parse("x1 - 3").unwrap();
        let ladder = vec![vec![2], vec![4], vec![8]];
        let report = convergence_study(&p, &ladder, &quick_config()).unwrap();
        assert!(!report.verdict_stable);
        assert_eq!(
            report.rungs[0].verdict.status,
            VerdictStatus::NoSolutionWithinBox
        );
        assert!(!report.rungs[0].interior_minimum);
        assert_eq!(
            report.rungs[1].verdict.status,
            VerdictStatus::SolvableWithWitness
        );
        assert!(report.rungs[1].interior_minimum);
        assert_eq!(
            report.rungs[2].verdict.status,
            VerdictStatus::SolvableWithWitness
        );
    }

    #[test]
    fn study_stable_for_interior_unsolvable() {
        let p = parse("(x1+1)^2").unwrap();
        let ladder = vec![vec![2], vec![4], vec![8]];
        let report = convergence_study(&p, &ladder, &quick_config()).unwrap();
        assert!(report.verdict_stable);
        for rung in &report.rungs {
            assert_eq!(rung.verdict.status, VerdictStatus::NoSolutionWithinBox);
            assert_eq!(rung.verdict.e0_oracle, BigUint::one());
            assert!(rung.interior_minimum);
        }
    }

    #[test]
    fn study_constant_polynomial() {
        let p = parse("1").unwrap();
        let ladder = vec![vec![2], vec![4], vec![8]];
        let report = convergence_study(&p, &ladder, &quick_config()).unwrap();
        assert!(report.verdict_stable);
        for rung in &report.rungs {
            assert_eq!(rung.verdict.e0_oracle, BigUint::one());
            assert!(rung.interior_minimum);
        }
    }

    #[test]
    fn study_rejects_bad_ladder() {
        let p = parse("x1").unwrap();
        assert!(matches!(
            convergence_study(&p, &[], &quick_config()),
            Err(DecisionError::BadLadder { rung: 0 })
        ));
        let ladder = vec![vec![4], vec![4]];
        assert!(matches!(
            convergence_study(&p, &ladder, &quick_config()),
            Err(DecisionError::BadLadder { rung: 1 })
        ));
    }

    #[test]
    fn verdict_soundness_on_random_instances() {
        // Hard invariants, checked on seeded random single-variable
        // polynomials: a witness is present iff the status says solvable and
        // it evaluates to zero exactly; a zero oracle minimum is equivalent
        // to a witness existing in the box; no-solution verdicts carry a
        // positive oracle minimum.
        use num_traits::Zero;
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1729);
        let config = DecideConfig {
            max_rounds: 8,
            ..DecideConfig::default()
        };
        for _ in 0..10 {
            let a = rng.gen_range(-4i64..=4);
            let b = rng.gen_range(-6i64..=6);
            let c = rng.gen_range(0u32..=2);
            let text = format!("{a}*x1^{} + {b}", c + 1);
            let p = parse(&text).unwrap();
            if p.is_zero() {
                continue;
            }
            let verdict = decide(&p, &[5], &config).unwrap();
            match (&verdict.status, &verdict.witness) {
                (VerdictStatus::SolvableWithWitness, Some(w)) => {
                    assert!(p.evaluate(w).unwrap().is_zero(), "{text}");
                    assert!(verdict.e0_oracle.is_zero(), "{text}");
                }
                (VerdictStatus::SolvableWithWitness, None) => {
                    panic!("{text}: solvable without witness")
                }
                (_, Some(_)) => panic!("{text}: witness without solvable status"),
                (VerdictStatus::NoSolutionWithinBox, None) => {
                    assert!(verdict.e0_oracle >= BigUint::one(), "{text}");
                }
                (VerdictStatus::Inconclusive, None) => {
                    assert!(!verdict.diagnostics.is_empty(), "{text}");
                }
            }
            // Oracle definition: zero minimum iff some box point evaluates
            // to zero.
            let any_zero = crate::diophantine::LatticeBox::from_cutoffs(&[5])
                .points()
                .any(|pt| p.evaluate(&pt).unwrap().is_zero());
            assert_eq!(verdict.e0_oracle.is_zero(), any_zero, "{text}");
        }
    }

    #[test]
    fn witness_preference_is_positive_coordinates() {
        assert_eq!(
            pick_witness(&[vec![0, 5], vec![3, 4], vec![4, 3], vec![5, 0]]),
            vec![3, 4]
        );
        assert_eq!(pick_witness(&[vec![0, 5], vec![5, 0]]), vec![0, 5]);
        assert_eq!(pick_witness(&[vec![2]]), vec![2]);
    }

    #[test]
    fn verdict_json_field_names_are_stable() {
        let p = parse("x1 - 1").unwrap();
        let verdict = decide(&p, &[4], &quick_config()).unwrap();
        let json = serde_json::to_value(&verdict).unwrap();
        let object = json.as_object().unwrap();
        for field in [
            "status",
            "witness",
            "e0_flow",
            "e0_oracle",
            "dynamics_identified",
            "cutoffs",
            "diagnostics",
        ] {
            assert!(object.contains_key(field), "missing {field}");
        }
        assert_eq!(json["status"], "SolvableWithWitness");
        assert_eq!(json["e0_oracle"], 0);
    }
}
