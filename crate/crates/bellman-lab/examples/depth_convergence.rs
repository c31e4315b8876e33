//! Discretization convergence: the attainment gap of the extremal
//! construction shrinks like the leaf measure as depth grows.
//!
//! Run with: cargo run --release --example depth_convergence

use bellman_lab::bellman::{BellmanQuery, Functional};
use bellman_lab::extremal::extremal_b1_power;
use bellman_lab::partition::build_tree;

fn main() {
    let query = BellmanQuery::new(2.0, 1.0, 1.0, 5.0, Functional::B1).unwrap();
    println!("B1 power construction at (p=2, f=1, F=1, λ=5); target 4/25 = 0.16");
    println!("{:>6} {:>10} {:>16} {:>12}", "depth", "leaves", "achieved", "gap");
    for depth in 4..=16 {
        let tree = build_tree(2, depth).unwrap();
        match extremal_b1_power(&query, tree) {
            Ok(recipe) => println!(
                "{depth:>6} {:>10} {:>16.10} {:>12.3e}",
                tree.leaf_count(),
                recipe.achieved.level_measure,
                recipe.achieved.gap
            ),
            Err(err) => println!("{depth:>6} {:>10} construction infeasible: {err}", tree.leaf_count()),
        }
    }
}
