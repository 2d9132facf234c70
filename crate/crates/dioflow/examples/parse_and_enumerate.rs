//! Parse a polynomial, evaluate it exactly, and run the enumeration oracle.
//!
//! ```bash
//! cargo run --example parse_and_enumerate
//! ```

use dioflow::diophantine::{brute_force_min_square, parse, LatticeBox};

fn main() {
    // x1² + x2² = 25: the circle with lattice points on it.
    let p = parse("x1^2 + x2^2 - 25").unwrap();
    println!("canonical form: {p}");
    println!("variables:      {}", p.num_vars());

    for point in [[3u64, 4], [4, 3], [1, 1]] {
        println!("D({point:?}) = {}", p.evaluate(&point).unwrap());
    }

    // Minimize D² over the box [0,7]²; zero minimum means a solution exists
    // inside the box, and every minimizer is listed in lexicographic order.
    let lattice = LatticeBox::new(vec![0, 0], vec![7, 7]).unwrap();
    let oracle = brute_force_min_square(&p, &lattice).unwrap();
    println!("min D² over [0,7]²: {}", oracle.min_square);
    println!("witnesses:          {:?}", oracle.witnesses);
    println!("solvable in box:    {}", oracle.solvable());

    // 24 is not a sum of two squares, so the shifted equation has no
    // solution anywhere; the oracle reports the best miss.
    let q = parse("x1^2 + x2^2 - 24").unwrap();
    let oracle = brute_force_min_square(&q, &lattice).unwrap();
    println!("min (x1^2+x2^2-24)² over [0,7]²: {}", oracle.min_square);
    println!("minimizers: {:?}", oracle.witnesses);
}
