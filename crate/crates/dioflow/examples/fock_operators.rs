//! Build the truncated Fock machinery: basis map, ladder operators, the
//! diagonal problem operator, the displaced-oscillator initial operator, and
//! its coherent ground state.
//!
//! ```bash
//! cargo run --example fock_operators
//! ```

use dioflow::diophantine::parse;
use dioflow::flow::eigensolve;
use dioflow::fock::{
    annihilation_matrix, build_hi, build_hp, coherent_state, BasisMap, ProblemInstance, Schedule,
};
use num_complex::Complex64 as C64;

fn main() {
    // Single-mode ladder matrix at cutoff 3: a|n> = sqrt(n)|n-1>.
    let a = annihilation_matrix(3);
    println!("annihilation matrix (d = 3):");
    for row in a.rows() {
        let cells: Vec<String> = row.iter().map(|z| format!("{:5.3}", z.re)).collect();
        println!("  [{}]", cells.join(", "));
    }

    // Two-mode basis: lexicographic flat order, vacuum first.
    let basis = BasisMap::new(&[2, 2]).unwrap();
    println!("\nbasis dim {} over cutoffs {:?}:", basis.dim(), basis.cutoffs());
    for j in 0..basis.dim() {
        print!("  |{}> = {:?}", j, basis.unflat(j));
        if (j + 1) % 3 == 0 {
            println!();
        }
    }

    // Problem operator for x1² + x2² - 5: diagonal, entries D(n)² exactly.
    let p = parse("x1^2 + x2^2 - 5").unwrap();
    let hp = build_hp(&p, &basis).unwrap();
    println!("\nproblem operator diagonal: {:?}", hp.diagonal());
    println!("(zero entries mark solutions: (1,2) and (2,1))");

    // Displaced-oscillator initial operator and its coherent ground state.
    let instance = ProblemInstance::new(
        p,
        &[2, 2],
        vec![2.0_f64.sqrt(), 3.0_f64.sqrt()],
        vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        Schedule::Linear,
    )
    .unwrap();
    let hi = build_hi(&instance);
    let ground = eigensolve(&hi, 3).unwrap();
    println!("\nlowest initial eigenvalues: {:?}", ground.eigenvalues);

    let prepared = coherent_state(&instance.alphas, &instance.basis).unwrap();
    println!("coherent state occupations (top 4):");
    for (index, prob) in prepared.state.occupations_descending().iter().take(4) {
        println!("  |{index:?}>  p = {prob:.4}");
    }
    println!("per-mode discarded tail mass: {:?}", prepared.tail_mass);
    for warning in prepared.truncation_warnings() {
        println!("warning: {warning}");
    }
}
