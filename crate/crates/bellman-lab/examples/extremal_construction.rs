//! The extremal functions: discretize the sharp profiles onto a tree
//! and check how closely they attain the closed-form bounds.
//!
//! Run with: cargo run --release --example extremal_construction

use bellman_lab::bellman::{closed_form, BellmanQuery, Functional};
use bellman_lab::extremal::{extremal_b, extremal_b1_middle, extremal_b1_power};
use bellman_lab::partition::build_tree;

fn main() {
    let tree = build_tree(2, 14).unwrap();

    // Equivalent-norm problem, power branch: head profile + flat top.
    let q = BellmanQuery::new(2.0, 0.5, 1.0, 4.0, Functional::B).unwrap();
    let recipe = extremal_b(&q, tree).unwrap();
    println!("extremal B at (p=2, f=0.5, F=1, λ=4):");
    println!("  closed form          = {}", closed_form(&q).unwrap().value);
    println!("  attained (shaved λ)  = {}", recipe.achieved.level_measure);
    println!("  gap                  = {:.3e} (ε_d = {:.3e})", recipe.achieved.gap, recipe.achieved.eps_d);
    println!("  ∫φ                   = {}", recipe.achieved.integral);
    println!("  |||φ||| continuous   = {:?}", recipe.continuous.equiv_norm);
    println!("  |||φ||| discretized  = {:.9}", recipe.achieved.equiv_norm);

    // Quasi-norm problem, power branch: t^(-1/p) core + bounded tail.
    let q = BellmanQuery::new(2.0, 1.0, 1.0, 5.0, Functional::B1).unwrap();
    let recipe = extremal_b1_power(&q, tree).unwrap();
    println!("\nextremal B1 (power) at (p=2, f=1, F=1, λ=5):");
    println!("  closed form          = {}", closed_form(&q).unwrap().value);
    println!("  attained             = {}", recipe.achieved.level_measure);
    println!("  ‖φ‖ continuous       = {}", recipe.continuous.quasi_norm);
    println!("  core level identity μ({{φ' > θ}})·θ^p at θ = λ/k, 2λ/k:");
    for theta in [2.5, 5.0] {
        let m = recipe.core_measure_above(theta).unwrap();
        println!("    θ = {theta}: {:.12}", m * theta * theta);
    }

    // Quasi-norm problem, middle branch: the convex profile G.
    let q = BellmanQuery::new(2.0, 1.0, 1.0, 2.0, Functional::B1).unwrap();
    let recipe = extremal_b1_middle(&q, tree).unwrap();
    println!("\nextremal B1 (middle) at (p=2, f=1, F=1, λ=2):");
    println!("  closed form          = {}", closed_form(&q).unwrap().value);
    println!("  attained             = {}", recipe.achieved.level_measure);
    if let bellman_lab::extremal::ProfileSpec::B1Middle { g_ideal, .. } = &recipe.spec {
        println!(
            "  G: head t^(-1/2) on (0, {:.6}], exponential tail to {:.4}, ∫G = {:.12}",
            g_ideal.t0, g_ideal.domain, g_ideal.integral
        );
    }
}
