//! Decreasing rearrangements and constructive equal-average selection.
//!
//! The selection lemmas here are the workhorses of the extremal
//! constructions: given a function with average `s` over a cell, one can
//! carve out a subset of any prescribed measure whose average is still
//! exactly `s` (a sliding window of the decreasing rearrangement), and a
//! cell can be partitioned into pieces of prescribed measures all
//! sharing the global average. Tree nodes of prescribed total measure
//! are picked greedily coarse-to-fine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{node_average, NodeId, StepFunction, TreePartition};
use crate::window::Segments;

/// Decreasing rearrangement of a step function restricted to a node:
/// `(value, mass)` pairs with strictly decreasing values, plus the leaf
/// provenance needed to map windows back to subsets.
#[derive(Debug, Clone)]
pub struct Rearrangement {
    pairs: Vec<(f64, f64)>,
    total_mass: f64,
    segments: Segments,
    node: Option<NodeId>,
}

impl Rearrangement {
    /// `(value, mass)` pairs, values strictly decreasing, masses > 0.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `Σ value·mass`, the integral of the source over its node.
    pub fn integral(&self) -> f64 {
        self.segments.total_integral()
    }

    /// Source node, when built from a step function.
    pub fn node(&self) -> Option<NodeId> {
        self.node
    }

    /// Distribution function `Σ {mass : value > t}`.
    pub fn mass_above(&self, t: f64) -> f64 {
        self.pairs
            .iter()
            .take_while(|(v, _)| *v > t)
            .map(|(_, m)| m)
            .sum()
    }

    /// A synthetic rearrangement from raw pairs (used by tests and by
    /// profile discretization); values must be nonincreasing. Equal
    /// values are merged. Provenance keys are the pair positions.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.iter().any(|(v, m)| !v.is_finite() || *v < 0.0 || !(*m > 0.0)) {
            return Err(Error::Domain(
                "rearrangement pairs need finite nonnegative values and positive masses".into(),
            ));
        }
        if pairs.windows(2).any(|w| w[0].0 < w[1].0) {
            return Err(Error::Domain(
                "rearrangement values must be nonincreasing".into(),
            ));
        }
        let keys = (0..pairs.len()).collect();
        let values = pairs.iter().map(|p| p.0).collect();
        let masses = pairs.iter().map(|p| p.1).collect();
        Ok(Self::from_segments(Segments::new(keys, values, masses), None))
    }

    fn from_segments(segments: Segments, node: Option<NodeId>) -> Self {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for (v, m) in segments.values.iter().zip(&segments.masses) {
            match pairs.last_mut() {
                Some((pv, pm)) if *pv == *v => *pm += m,
                _ => pairs.push((*v, *m)),
            }
        }
        let total_mass = segments.total_mass();
        Rearrangement {
            pairs,
            total_mass,
            segments,
            node,
        }
    }
}

/// A measurable subset `E ⊆ I` realizing a prescribed measure and
/// average, described by per-leaf coverage fractions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetCertificate {
    /// Source node, when the subset lives on a step function's tree.
    pub node: Option<NodeId>,
    /// Prescribed measure of the subset.
    pub beta: f64,
    /// Window offset into the decreasing rearrangement.
    pub offset: f64,
    /// Achieved average of the source over the subset.
    pub average: f64,
    /// `(leaf index, fraction)` pairs; fractions in `(0, 1]` and
    /// `Σ fraction · leaf measure = beta`. For synthetic rearrangements
    /// the indices refer to rearrangement pairs instead of leaves.
    pub fractions: Vec<(usize, f64)>,
}

/// Decreasing rearrangement of `φ` restricted to `I`. Ties between
/// equal-valued leaves are broken left-to-right by leaf index.
pub fn decreasing_rearrangement(phi: &StepFunction, node: NodeId) -> Result<Rearrangement> {
    if !phi.tree().contains(node) {
        return Err(Error::Domain(format!(
            "node (level {}, index {}) is not in the function's tree",
            node.level, node.index
        )));
    }
    let range = phi.tree().leaf_range(node);
    let w = phi.tree().leaf_measure();
    let mut order: Vec<usize> = range.clone().collect();
    order.sort_by(|&a, &b| {
        phi.values()[b]
            .partial_cmp(&phi.values()[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| phi.values()[i]).collect();
    let masses = vec![w; order.len()];
    Ok(Rearrangement::from_segments(
        Segments::new(order, values, masses),
        Some(node),
    ))
}

/// Fractions are relative to each key's original mass (`full_mass`),
/// not to whatever piece of it is still present in `segments`; a leaf
/// split across several windows then reports fractions that add up to
/// at most one.
fn window_to_certificate(
    segments: &Segments,
    node: Option<NodeId>,
    r: f64,
    beta: f64,
    full_mass: &impl Fn(usize) -> f64,
) -> SubsetCertificate {
    let end = r + beta;
    let mut fractions = Vec::new();
    let mut integral = 0.0;
    let mut pos = 0.0f64;
    for i in 0..segments.len() {
        let m = segments.masses[i];
        let (a, b) = (pos, pos + m);
        pos = b;
        if b <= r {
            continue;
        }
        if a >= end {
            break;
        }
        let covered = (end.min(b) - r.max(a)).max(0.0);
        if covered > 0.0 {
            let key = segments.keys[i];
            fractions.push((key, covered / full_mass(key)));
            integral += segments.values[i] * covered;
        }
    }
    SubsetCertificate {
        node,
        beta,
        offset: r,
        average: integral / beta,
        fractions,
    }
}

/// Equal-average subset selection: a subset `E_β ⊆ I` with
/// `μ(E_β) = β` and `Av_{E_β}(φ) = Av_I(φ)`, realized as a window of the
/// decreasing rearrangement mapped back to leaf fractions.
pub fn equal_average_subset(
    phi: &StepFunction,
    node: NodeId,
    beta: f64,
) -> Result<SubsetCertificate> {
    let mu = phi
        .tree()
        .contains(node)
        .then(|| phi.tree().node_measure(node))
        .ok_or_else(|| Error::Domain("node is not in the function's tree".into()))?;
    if !(beta > 0.0) || beta > mu * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "subset measure beta = {beta} out of range (0, {mu}]"
        )));
    }
    let beta = beta.min(mu);
    let s = node_average(phi, node)?;
    let re = decreasing_rearrangement(phi, node)?;
    let r = re.segments.solve_window(beta, s * beta)?;
    let w = phi.tree().leaf_measure();
    Ok(window_to_certificate(
        &re.segments,
        Some(node),
        r,
        beta,
        &|_| w,
    ))
}

/// Partition the rearranged mass into disjoint windows of prescribed
/// masses, each with average equal to the global average. Windows are
/// extracted iteratively; removing an equal-average window leaves the
/// remainder's average unchanged, so the construction telescopes.
pub fn partition_equal_average(
    rearrangement: &Rearrangement,
    masses: &[f64],
) -> Result<Vec<SubsetCertificate>> {
    if masses.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::Domain("window masses must be positive".into()));
    }
    let total = rearrangement.total_mass();
    let requested: f64 = masses.iter().sum();
    if (requested - total).abs() > 1e-9 * total.max(1.0) {
        return Err(Error::Domain(format!(
            "window masses sum to {requested}, expected total mass {total}"
        )));
    }
    let s = rearrangement.integral() / total;
    let source: std::collections::HashMap<usize, f64> = rearrangement
        .segments
        .keys
        .iter()
        .zip(&rearrangement.segments.masses)
        .map(|(k, m)| (*k, *m))
        .collect();
    let full_mass = |key: usize| source[&key];
    let mut remainder = rearrangement.segments.clone();
    let mut out = Vec::with_capacity(masses.len());
    for (i, &beta) in masses.iter().enumerate() {
        let last = i + 1 == masses.len();
        let beta = if last {
            remainder.total_mass()
        } else {
            beta
        };
        let r = remainder.solve_window(beta, s * beta)?;
        out.push(window_to_certificate(
            &remainder,
            rearrangement.node,
            r,
            beta,
            &full_mass,
        ));
        let (_, rest) = remainder.extract_window(r, beta);
        remainder = rest;
    }
    Ok(out)
}

/// Pairwise disjoint tree nodes under `I` whose measures sum to exactly
/// `(1 − a)·μ(I)`, chosen greedily coarse-to-fine from the left. The
/// target must be representable on the leaf grid.
pub fn select_subfamily(tree: &TreePartition, node: NodeId, a: f64) -> Result<Vec<NodeId>> {
    if !tree.contains(node) {
        return Err(Error::Domain("node is not in the tree".into()));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("a must lie in (0,1), got {a}")));
    }
    let span = tree.leaf_span(node);
    let target = (1.0 - a) * span as f64;
    let leaves = target.round();
    if (target - leaves).abs() > 1e-9 * span as f64 || leaves < 1.0 {
        let lo = target.floor().max(0.0) / tree.leaf_count() as f64;
        let hi = target.ceil() / tree.leaf_count() as f64;
        return Err(Error::Domain(format!(
            "target measure {} is not representable on the arity-{} depth-{} grid; \
             nearest representable measures are {} and {}",
            (1.0 - a) * tree.node_measure(node),
            tree.arity(),
            tree.depth(),
            lo,
            hi
        )));
    }
    Ok(select_leaf_count(tree, node, leaves as u64))
}

/// Greedy coarse-to-fine selection of disjoint nodes under `node`
/// covering exactly `leaves` leaves, starting from the left edge.
pub(crate) fn select_leaf_count(tree: &TreePartition, node: NodeId, leaves: u64) -> Vec<NodeId> {
    let arity = tree.arity() as u64;
    let start = tree.leaf_range(node).start as u64;
    let mut cursor = start;
    let mut remaining = leaves;
    let mut out = Vec::new();
    while remaining > 0 {
        // Largest arity-power block that fits the remaining target and
        // is aligned at the cursor.
        let mut size = 1u64;
        while size * arity <= remaining && cursor.is_multiple_of(size * arity) {
            size *= arity;
        }
        let level = tree.depth() - size.ilog(arity);
        out.push(NodeId {
            level,
            index: cursor / size,
        });
        cursor += size;
        remaining -= size;
    }
    out
}
