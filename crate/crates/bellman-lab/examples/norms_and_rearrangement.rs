//! Weak-L^p norms, decreasing rearrangements, and equal-average
//! subsets on step functions.
//!
//! Run with: cargo run --example norms_and_rearrangement

use bellman_lab::norms::{equiv_norm, norm_comparison_check, quasi_norm};
use bellman_lab::partition::{build_tree, integral, NodeId, StepFunction};
use bellman_lab::rearrange::{
    decreasing_rearrangement, equal_average_subset, partition_equal_average, select_subfamily,
};

fn main() {
    let tree = build_tree(2, 3).unwrap();
    let phi = StepFunction::new(tree, vec![4.0, 1.0, 0.5, 0.5, 2.0, 0.0, 0.0, 1.0]).unwrap();
    let p = 2.0;

    println!("φ = {:?},  ∫φ = {}", phi.values(), integral(&phi));

    let q = quasi_norm(&phi, p).unwrap();
    let e = equiv_norm(&phi, p).unwrap();
    println!("‖φ‖_(2,∞)   = {:.6}  (attained at level λ* = {})", q.value, q.witness);
    println!("|||φ|||_(2,∞) = {:.6}  (attained at prefix s* = {})", e.value, e.witness);
    let cmp = norm_comparison_check(&phi, p).unwrap();
    println!("sandwich: 1 ≤ equiv/quasi = {:.4} ≤ k = {}", cmp.ratio, cmp.k);

    let re = decreasing_rearrangement(&phi, NodeId::ROOT).unwrap();
    println!("\nφ* as (value, mass) pairs: {:?}", re.pairs());

    // A subset of measure 0.3 whose average equals the global average.
    let cert = equal_average_subset(&phi, NodeId::ROOT, 0.3).unwrap();
    println!(
        "\nequal-average subset: β = {}, window offset r = {:.4}, average = {:.6}",
        cert.beta, cert.offset, cert.average
    );
    println!("  leaf fractions: {:?}", cert.fractions);

    // Split everything into equal-average parts of prescribed sizes.
    let parts = partition_equal_average(&re, &[0.25, 0.25, 0.5]).unwrap();
    println!("\nequal-average partition into masses (0.25, 0.25, 0.5):");
    for (i, c) in parts.iter().enumerate() {
        println!("  part {i}: mass = {:.4}, average = {:.6}", c.beta, c.average);
    }

    // Tree cells of prescribed total measure (Lemma-style selection).
    let nodes = select_subfamily(&tree, NodeId::ROOT, 0.375).unwrap();
    println!("\ncells covering measure 5/8: {nodes:?}");
}
