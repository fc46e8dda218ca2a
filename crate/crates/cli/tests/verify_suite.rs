//! Runs the full verification suite and prints one line per criterion.

use nlslab::verify::{run_suite, PdeStudy, PhaseStudy};

fn main() {
    let outcomes = run_suite(2024, &PdeStudy::default(), &PhaseStudy::default(), None);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
