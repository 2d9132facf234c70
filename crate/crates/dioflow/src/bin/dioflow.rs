use std::process::exit;

fn main() {
    exit(dioflow::cli::run(std::env::args()));
}
