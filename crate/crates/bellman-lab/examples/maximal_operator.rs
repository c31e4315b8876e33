//! The tree maximal operator: leaf values, level-set decomposition
//! into maximal cells, the distribution curve, and the weak type (1,1)
//! inequality.
//!
//! Run with: cargo run --example maximal_operator

use bellman_lab::maximal::{level_set_nodes, maximal_function, weak_type_check};
use bellman_lab::partition::{build_tree, node_average, StepFunction};

fn main() {
    let tree = build_tree(2, 2).unwrap();
    let phi = StepFunction::new(tree, vec![4.0, 0.0, 0.0, 0.0]).unwrap();

    let m = maximal_function(&phi);
    println!("φ  = {:?}", phi.values());
    println!("Mφ = {:?}", m.values().values());
    for (leaf, node) in m.argmax().iter().enumerate() {
        println!(
            "  leaf {leaf}: sup attained on cell (level {}, index {}), average {:.4}",
            node.level,
            node.index,
            node_average(&phi, *node).unwrap()
        );
    }

    println!("\ndistribution λ ↦ μ({{Mφ ≥ λ}}):");
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        println!("  λ = {lambda}: measure = {}", m.distribution_at(lambda));
    }

    // {Mφ ≥ λ} is a disjoint union of maximal cells with average ≥ λ.
    let lambda = 2.0;
    let cells = level_set_nodes(&phi, lambda);
    println!("\nmaximal cells of {{Mφ ≥ {lambda}}}: {cells:?}");

    // Weak type (1,1): μ({Mφ ≥ λ}) ≤ (1/λ) ∫_{Mφ ≥ λ} φ.
    for lambda in [0.5, 1.0, 2.0] {
        let rep = weak_type_check(&phi, lambda).unwrap();
        println!(
            "weak type at λ = {lambda}: μ = {} ≤ {} = (1/λ)∫_set φ",
            rep.measure, rep.bound
        );
    }
}
