//! Closed form vs discretized attainment across a λ grid: the bound
//! curve is 1, then f/λ, then the power term, and the discretized
//! witnesses track it to within one leaf of measure.
//!
//! Run with: cargo run --release --example lambda_sweep

use bellman_lab::bellman::{closed_form, BellmanQuery, Functional};
use bellman_lab::extremal::{attainment_witness, shaved_level_measure};
use bellman_lab::partition::build_tree;

fn main() {
    let (p, f, norm) = (2.0, 0.5, 1.0);
    let tree = build_tree(2, 12).unwrap();
    let eps_d = tree.leaf_measure();

    println!("B sweep at p = {p}, f = {f}, F = {norm}, depth 12");
    println!("{:>8} {:>14} {:>14} {:>12} {:>8}", "lambda", "closed_form", "achieved", "gap", "branch");
    let mut lambda = 0.25;
    while lambda < 6.0 {
        let q = BellmanQuery::new(p, f, norm, lambda, Functional::B).unwrap();
        let cf = closed_form(&q).unwrap();
        let witness = attainment_witness(&q, tree).unwrap();
        let achieved = shaved_level_measure(&witness, lambda, eps_d);
        println!(
            "{lambda:>8.2} {:>14.8} {:>14.8} {:>12.2e} {:>8}",
            cf.value,
            achieved,
            cf.value - achieved,
            format!("{:?}", cf.branch)
        );
        lambda += 0.25;
    }
}
