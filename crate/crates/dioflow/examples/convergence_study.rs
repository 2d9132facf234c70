//! Run the full decision at every rung of an increasing cutoff ladder and
//! watch the verdict stabilize once the box is large enough to contain the
//! true minimizer.
//!
//! ```bash
//! cargo run --release --example convergence_study
//! ```

use dioflow::decision::{convergence_study, DecideConfig};
use dioflow::diophantine::parse;

fn main() {
    let p = parse("x1 - 3").unwrap();
    let ladder = vec![vec![2], vec![4], vec![8]];
    let report = convergence_study(&p, &ladder, &DecideConfig::default()).unwrap();

    println!("D = x1 - 3 across ladder {ladder:?}:");
    for rung in &report.rungs {
        println!(
            "  cutoffs {:?}: {:?}, oracle min {}, interior minimum: {}",
            rung.cutoffs, rung.verdict.status, rung.verdict.e0_oracle, rung.interior_minimum
        );
        for diagnostic in &rung.verdict.diagnostics {
            println!("    note: {diagnostic}");
        }
    }
    println!("verdict stable across ladder: {}", report.verdict_stable);
    println!("(the flip at cutoff 4 is the escalation paying off)");
}
