//! Decide whether a multivariate Diophantine polynomial has a zero inside a
//! bounded lattice box, by three independent routes:
//!
//! * [`diophantine`]: exact integer arithmetic, meaning parsing, evaluation,
//!   and the brute-force enumeration oracle that anchors everything else;
//! * [`flow`], the "kinematic" route: follow the instantaneous eigensystem of
//!   an interpolating Hermitian operator from a solvable displaced-oscillator
//!   start to the problem operator, and snap the final ground eigenvalue to an
//!   integer;
//! * [`dynamics`], the "dynamical" route: integrate the time-dependent
//!   Schrödinger equation from a coherent initial state and identify the
//!   ground Fock state by the majority-occupation criterion.
//!
//! The [`fock`] module builds the truncated bosonic machinery shared by the
//! two numerical routes, and [`decision`] merges all three into one auditable
//! verdict. Everything runs at desk scale (dense matrices, a few hundred basis
//! states at most).
//!
//! The encoding works over the non-negative integers: occupation numbers start
//! at zero, so a polynomial `D` is declared solvable when `D(n1,...,nK) = 0`
//! for some tuple of integers `ni >= 0` inside the box. The classical question
//! over strictly positive integers is recovered by substituting `xi -> xi + 1`
//! before asking.
//!
//! Start with the `examples/` directory for runnable walkthroughs of each
//! capability, or the `dioflow` binary for the batch CLI.
//!
//! ```
//! use dioflow::decision::{decide, DecideConfig, VerdictStatus};
//! use dioflow::diophantine::parse;
//!
//! let p = parse("x1 - 2").unwrap();
//! let verdict = decide(&p, &[4], &DecideConfig::default()).unwrap();
//! assert_eq!(verdict.status, VerdictStatus::SolvableWithWitness);
//! assert_eq!(verdict.witness, Some(vec![2]));
//! ```

pub mod cli;
pub mod decision;
pub mod diophantine;
pub mod dynamics;
pub mod flow;
pub mod fock;
pub mod linalg;
