//! Integrate the time-dependent Schrödinger equation from the coherent
//! initial state and identify the ground Fock state by the
//! majority-occupation rule, re-running at doubled durations until it fires.
//!
//! ```bash
//! cargo run --release --example adiabatic_sweep
//! ```

use dioflow::diophantine::parse;
use dioflow::dynamics::{evolve, identify_ground, tau_sweep};
use dioflow::fock::{ProblemInstance, Schedule};
use num_complex::Complex64 as C64;

fn main() {
    let p = parse("x1 - 1").unwrap();
    let instance = ProblemInstance::new(
        p.clone(),
        &[8],
        vec![2.0_f64.sqrt()],
        vec![C64::new(1.0, 0.0)],
        Schedule::Linear,
    )
    .unwrap();

    // Slower driving leaves more probability on the true ground state |1>.
    println!("occupation of |1> after one run:");
    for tau in [1.0f64, 10.0, 100.0] {
        let steps = 1000.max((200.0 * tau).ceil() as usize);
        let report = evolve(&instance, tau, steps).unwrap();
        println!(
            "  tau = {tau:5.1}  p(|1>) = {:.4}  norm drift = {:.1e}",
            report.final_state.occupation(&[1]),
            report.norm_drift
        );
    }

    // The sweep doubles tau until one Fock state holds a strict majority.
    let outcome = tau_sweep(&instance, 1.0, 2.0, 12).unwrap();
    println!("\nsweep rounds:");
    for report in &outcome.history {
        let (state, prob) = &report.top_occupations[0];
        println!(
            "  tau = {:6.1}  steps = {:6}  top |{state:?}> p = {prob:.3}  identified: {}",
            report.tau,
            report.steps,
            identify_ground(report).is_some()
        );
    }
    match outcome.identified {
        Some(state) => {
            let point: Vec<u64> = state.iter().map(|&n| n as u64).collect();
            let value = p.evaluate(&point).unwrap();
            println!("\nidentified ground state {state:?}; D there = {value}");
            println!("exact confirmation: {}", if value == 0.into() { "solution" } else { "no solution at this point" });
        }
        None => println!("\nno identification within the round limit (inconclusive)"),
    }
}
