//! The step-function wire format and how it flows through the CLI:
//! write a function as JSON, read it back, and compute with it.
//!
//! Run with: cargo run --example step_function_io

use bellman_lab::maximal::maximal_function;
use bellman_lab::norms::norm_comparison_check;
use bellman_lab::partition::{build_tree, integral, StepFunction};

fn main() {
    let tree = build_tree(2, 3).unwrap();
    let phi = StepFunction::new(tree, vec![2.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.5, 0.5]).unwrap();

    // {arity, depth, values} with values in left-to-right leaf order;
    // the same format the `norms` and `maximal` subcommands read and
    // `--emit-certificate` writes.
    let text = phi.to_json();
    println!("wire format: {text}");

    let back = StepFunction::from_json(&text).unwrap();
    assert_eq!(back, phi);

    println!("∫φ = {}", integral(&back));
    let cmp = norm_comparison_check(&back, 2.0).unwrap();
    println!("quasi = {:.6}, equiv = {:.6}", cmp.quasi.value, cmp.equiv.value);
    let m = maximal_function(&back);
    println!("Mφ leaf values: {:?}", m.values().values());
}
