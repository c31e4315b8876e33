//! Approach the sup from below with local search: seeded from the best
//! random sample and the extremal construction, moving one leaf-mass
//! quantum at a time while holding the norm constraint.
//!
//! The middle-branch run for the equivalent-norm equality constraint is
//! the numerical confirmation that the equality-constrained problem has
//! the same value as the inequality-constrained one there.
//!
//! Run with: cargo run --release --example search_attainment

use bellman_lab::bellman::{BellmanQuery, Functional};
use bellman_lab::norms::equiv_norm;
use bellman_lab::partition::integral;
use bellman_lab::search::{maximize, Optimizer, SearchConfig};

fn main() {
    // |||φ||| = F on the middle branch: target f/λ.
    let query = BellmanQuery::new(2.0, 0.5, 1.0, 1.5, Functional::B2).unwrap();
    let mut cfg = SearchConfig::new(query, 2, 12, 64, 2024);
    cfg.move_budget = 50_000;

    for optimizer in [Optimizer::CoordinateAscent, Optimizer::Anneal] {
        cfg.optimizer = optimizer;
        let report = maximize(&cfg).unwrap();
        println!(
            "{optimizer:?}: best = {:.6} vs target {:.6} (gap {:.2e}) after {} moves",
            report.best, report.target, report.gap, report.moves
        );
        let best = report.best_function().unwrap();
        println!(
            "  certificate: ∫ = {:.12}, |||φ||| = {:.9}",
            integral(best),
            equiv_norm(best, 2.0).unwrap().value
        );
        assert!(report.best <= report.target + 1e-12);
    }
}
