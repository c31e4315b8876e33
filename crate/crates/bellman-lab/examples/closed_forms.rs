//! The closed-form level-set bounds and their branch structure.
//!
//! For each functional the sharp bound on μ({M_T φ ≥ λ}) is a min of
//! three terms; this prints the value and active branch across a λ
//! range, plus the two thresholds where the branches hand over.
//!
//! Run with: cargo run --example closed_forms

use bellman_lab::bellman::{closed_form, corollary_norm_sup, thresholds, BellmanQuery, Functional};

fn main() {
    let (p, f, norm) = (2.0, 0.5, 1.0);

    for functional in [Functional::B, Functional::B1, Functional::B2] {
        let probe = BellmanQuery::new(p, f, norm, 1.0, functional).unwrap();
        let th = thresholds(&probe);
        println!(
            "{functional}: p = {p}, f = {f}, F = {norm}  (flat until λ = {}, power after λ = {:.4})",
            th.lambda_flat, th.lambda_power
        );
        for lambda in [0.25, 0.5, 1.0, th.lambda_power, 1.5 * th.lambda_power, 8.0] {
            let q = BellmanQuery::new(p, f, norm, lambda, functional).unwrap();
            let cf = closed_form(&q).unwrap();
            println!(
                "  λ = {lambda:8.4}  value = {:<22}  branch = {:?}",
                cf.value, cf.branch
            );
        }
        println!();
    }

    // The corollaries: sup of ‖M_T φ‖_{p,∞} over each feasible set.
    println!("sup ‖Mφ‖ under |||φ||| = F: {}", corollary_norm_sup(p, f, norm, Functional::B).unwrap());
    println!("sup ‖Mφ‖ under  ‖φ‖  = F: {}", corollary_norm_sup(p, f, norm, Functional::B1).unwrap());
}
