//! Follow the instantaneous eigensystem from the displaced oscillator to the
//! problem operator and snap the final ground eigenvalue to an integer.
//!
//! ```bash
//! cargo run --release --example spectral_flow
//! ```

use dioflow::diophantine::parse;
use dioflow::flow::{continue_flow, snap_verdict};
use dioflow::fock::{ProblemInstance, Schedule};
use num_complex::Complex64 as C64;

fn follow(text: &str) {
    let p = parse(text).unwrap();
    let instance = ProblemInstance::new(
        p,
        &[8],
        vec![2.0_f64.sqrt()],
        vec![C64::new(1.0, 0.0)],
        Schedule::Linear,
    )
    .unwrap();
    let path = continue_flow(&instance, 6, 1e-6).unwrap();

    println!("D = {text}");
    println!("  accepted steps: {}", path.step_log.len());
    let worst = path
        .step_log
        .iter()
        .map(|r| r.remainder_estimate)
        .fold(0.0f64, f64::max);
    println!("  worst remainder estimate: {worst:.2e}");

    // A few waypoints along the ground curve.
    let n = path.states.len();
    for &i in &[0, n / 4, n / 2, 3 * n / 4, n - 1] {
        let st = &path.states[i];
        println!(
            "  s = {:8.6}  E0 = {:+.6e}  gap floor = {:.3e}",
            st.s,
            st.e0(),
            st.gap_floor
        );
    }

    let e0 = path.e0_final().unwrap();
    let verdict = snap_verdict(e0);
    println!(
        "  E0(1) = {e0:.3e} snaps to {} (confident: {}) -> solvable within box: {}\n",
        verdict.snapped,
        verdict.confident,
        verdict.solvable_within_truncation()
    );
}

fn main() {
    // Solvable: x1 = 1 zeroes D, so the ground eigenvalue flows to 0.
    follow("x1 - 1");
    // Unsolvable everywhere: the minimum of D² is 1, reached at the vacuum.
    follow("(x1+1)^2");
}
