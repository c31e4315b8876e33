//! The maximal operator associated to a tree partition.
//!
//! `M_T φ(x) = sup { Av_I(φ) : x ∈ I, I a tree cell }`. On a finite
//! tree the sup runs over the ancestors of the leaf containing `x`
//! (including the leaf and the root), so `M_T φ` is again a step
//! function, computed in one bottom-up sweep for subtree sums plus one
//! top-down sweep carrying the running maximum.
//!
//! Level sets `{M_T φ ≥ λ}` decompose into maximal tree cells with
//! average at least `λ`; that decomposition drives the weak type (1,1)
//! inequality `μ({M_T φ ≥ λ}) ≤ (1/λ) ∫_{{M_T φ ≥ λ}} φ dμ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{ksum, NodeId, StepFunction};

/// `M_T φ` together with, per leaf, the ancestor cell attaining the sup.
#[derive(Debug, Clone)]
pub struct MaximalResult {
    values: StepFunction,
    argmax: Vec<NodeId>,
}

impl MaximalResult {
    /// `M_T φ` as a step function on the same tree.
    pub fn values(&self) -> &StepFunction {
        &self.values
    }

    /// For each leaf, the ancestor whose average attains `M_T φ`.
    pub fn argmax(&self) -> &[NodeId] {
        &self.argmax
    }

    /// Exact measure of `{M_T φ ≥ λ}` (a count of leaves over the leaf
    /// denominator).
    pub fn distribution_at(&self, lambda: f64) -> f64 {
        let hits = self
            .values
            .values()
            .iter()
            .filter(|m| **m >= lambda)
            .count() as u64;
        hits as f64 / self.values.tree().leaf_count() as f64
    }

    /// Strict variant, `μ({M_T φ > λ})`.
    pub fn distribution_above(&self, lambda: f64) -> f64 {
        let hits = self
            .values
            .values()
            .iter()
            .filter(|m| **m > lambda)
            .count() as u64;
        hits as f64 / self.values.tree().leaf_count() as f64
    }
}

/// Per-level subtree sums, `sums[level][index] = Σ leaf values below`.
/// Summing level by level is pairwise summation, accurate to
/// O(depth·ε) without compensation.
fn subtree_sums(phi: &StepFunction) -> Vec<Vec<f64>> {
    let tree = phi.tree();
    let depth = tree.depth() as usize;
    let arity = tree.arity() as usize;
    let mut sums: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
    sums.push(phi.values().to_vec());
    for level in (0..depth).rev() {
        let below = &sums[depth - 1 - level];
        let count = tree.nodes_at_level(level as u32) as usize;
        let mut row = Vec::with_capacity(count);
        for i in 0..count {
            row.push(below[i * arity..(i + 1) * arity].iter().sum());
        }
        sums.push(row);
    }
    sums.reverse(); // index by level now
    sums
}

/// Compute `M_T φ` in O(#nodes).
pub fn maximal_function(phi: &StepFunction) -> MaximalResult {
    let tree = phi.tree();
    let depth = tree.depth();
    let arity = tree.arity() as usize;
    let sums = subtree_sums(phi);

    // Running maxima down the tree.
    let mut running: Vec<(f64, NodeId)> = vec![(sums[0][0] / tree.leaf_count() as f64, NodeId::ROOT)];
    for level in 1..=depth {
        let span = tree.leaf_span(NodeId { level, index: 0 }) as f64;
        let row = &sums[level as usize];
        let mut next = Vec::with_capacity(row.len());
        for (i, &s) in row.iter().enumerate() {
            let avg = s / span;
            let inherited = running[i / arity];
            next.push(if avg > inherited.0 {
                (
                    avg,
                    NodeId {
                        level,
                        index: i as u64,
                    },
                )
            } else {
                inherited
            });
        }
        running = next;
    }

    let values: Vec<f64> = running.iter().map(|(m, _)| *m).collect();
    let argmax: Vec<NodeId> = running.iter().map(|(_, n)| *n).collect();
    MaximalResult {
        values: StepFunction::new(tree, values).expect("maximal values are valid"),
        argmax,
    }
}

/// The maximal tree cells `J` with `Av_J(φ) ≥ λ`; their union is
/// `{M_T φ ≥ λ}`.
pub fn level_set_nodes(phi: &StepFunction, lambda: f64) -> Vec<NodeId> {
    let tree = phi.tree();
    let sums = subtree_sums(phi);
    let mut out = Vec::new();
    let mut stack = vec![NodeId::ROOT];
    while let Some(node) = stack.pop() {
        let span = tree.leaf_span(node) as f64;
        let avg = sums[node.level as usize][node.index as usize] / span;
        if avg >= lambda {
            out.push(node);
        } else if !tree.is_leaf(node) {
            // Descend right-to-left so the output is left-to-right.
            let children: Vec<NodeId> = tree.children(node).collect();
            stack.extend(children.into_iter().rev());
        }
    }
    out
}

/// Both sides of the weak type (1,1) inequality at level `λ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakTypeReport {
    pub lambda: f64,
    /// `μ({M_T φ ≥ λ})`.
    pub measure: f64,
    /// `∫_{{M_T φ ≥ λ}} φ dμ`.
    pub integral_on_set: f64,
    /// `(1/λ) ∫_{{M_T φ ≥ λ}} φ dμ`, the dominating side.
    pub bound: f64,
}

/// Check `μ({M_T φ ≥ λ}) ≤ (1/λ) ∫_{{M_T φ ≥ λ}} φ dμ` and return both
/// sides. Failure is an invariant violation (the set decomposes into
/// cells of average ≥ λ, so this is a theorem).
pub fn weak_type_check(phi: &StepFunction, lambda: f64) -> Result<WeakTypeReport> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let m = maximal_function(phi);
    let n = phi.tree().leaf_count() as f64;
    let measure = m.distribution_at(lambda);
    let integral_on_set = ksum(
        phi.values()
            .iter()
            .zip(m.values().values())
            .filter(|(_, mv)| **mv >= lambda)
            .map(|(v, _)| *v),
    ) / n;
    let bound = integral_on_set / lambda;
    if measure > bound + 1e-12 * bound.max(1.0) {
        return Err(Error::Invariant(format!(
            "weak type (1,1) failed at lambda = {lambda}: measure {measure} > bound {bound}"
        )));
    }
    Ok(WeakTypeReport {
        lambda,
        measure,
        integral_on_set,
        bound,
    })
}
