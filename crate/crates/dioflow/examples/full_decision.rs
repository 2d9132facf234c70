//! Merge the exact oracle, the spectral flow, and the adiabatic sweep into a
//! single verdict, including the cutoff-escalation diagnostic when the best
//! lattice point hugs the truncation boundary.
//!
//! ```bash
//! cargo run --release --example full_decision
//! ```

use dioflow::decision::{decide, DecideConfig};
use dioflow::diophantine::parse;

fn show(text: &str, cutoffs: &[u32]) {
    let p = parse(text).unwrap();
    let verdict = decide(&p, cutoffs, &DecideConfig::default()).unwrap();
    println!("D = {text} over cutoffs {cutoffs:?}:");
    println!("{}\n", serde_json::to_string_pretty(&verdict).unwrap());
}

fn main() {
    // The flow ends at 0, the sweep identifies |1>, the oracle confirms.
    show("x1 - 1", &[8]);

    // The true solution x1 = 3 lies outside [0, 2]; the minimum sits on the
    // truncation boundary and the verdict warns to escalate.
    show("x1 - 3", &[2]);

    // Same equation with room to breathe.
    show("x1 - 3", &[4]);
}
