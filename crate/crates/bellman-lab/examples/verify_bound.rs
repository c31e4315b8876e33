//! Monte Carlo verification that no feasible function beats the
//! closed-form bound: thousands of random feasible samples per query,
//! each checked against min(1, f/λ, C^p F^p/λ^p).
//!
//! Run with: cargo run --release --example verify_bound

use bellman_lab::bellman::{BellmanQuery, Functional};
use bellman_lab::search::{verify_upper_bound, SearchConfig};

fn main() {
    for (functional, lambda) in [
        (Functional::B, 4.0),
        (Functional::B1, 5.0),
        (Functional::B2, 1.5),
    ] {
        let f = if functional == Functional::B1 { 1.0 } else { 0.5 };
        let query = BellmanQuery::new(2.0, f, 1.0, lambda, functional).unwrap();
        let cfg = SearchConfig::new(query, 2, 10, 2000, 42);
        let report = verify_upper_bound(&cfg).unwrap();
        println!(
            "{functional} at λ = {lambda}: target = {:.6}, best of {} feasible samples = {:.6}",
            report.target, report.feasible_trials, report.best
        );
        println!(
            "  violations: bound = {}, weak-type = {}; rejected samples = {}",
            report.upper_bound_violations, report.weak_type_violations, report.rejected_samples
        );
        assert_eq!(report.upper_bound_violations, 0);
    }
}
