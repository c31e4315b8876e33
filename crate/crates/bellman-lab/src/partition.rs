//! Finite tree partitions of `[0,1]` and step functions on their leaves.
//!
//! A [`TreePartition`] models the unit interval with Lebesgue measure,
//! split into `arity^depth` equal leaves by a uniform tree of nested
//! cells. Cells are addressed implicitly by [`NodeId`]; endpoints and
//! measures are exact rationals with denominator `arity^depth`, so
//! measure bookkeeping (children summing to parents, level-set measures)
//! is integer arithmetic. Leaf values are `f64`.
//!
//! Non-atomicity of the underlying space is only approximated: the
//! finest resolution is the leaf measure `arity^(-depth)`. Deeper trees
//! approximate the continuum better.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `arity^depth`.
pub const DEFAULT_LEAF_BUDGET: u64 = 1 << 24;

/// A uniform tree partition of `[0,1]`: every internal node has exactly
/// `arity` children of equal measure, down to `depth` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePartition {
    arity: u32,
    depth: u32,
    leaf_count: u64,
}

/// Address of a tree cell: `index`-th node (left to right) at `level`
/// (root is level 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub level: u32,
    pub index: u64,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId { level: 0, index: 0 };
}

/// Exact rational endpoint `num / den` of a cell boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoint {
    pub num: u64,
    pub den: u64,
}

impl Endpoint {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Build a uniform tree with the default leaf budget.
pub fn build_tree(arity: u32, depth: u32) -> Result<TreePartition> {
    build_tree_with_budget(arity, depth, DEFAULT_LEAF_BUDGET)
}

/// Build a uniform tree, failing if `arity^depth` exceeds `budget`.
pub fn build_tree_with_budget(arity: u32, depth: u32, budget: u64) -> Result<TreePartition> {
    if arity < 2 {
        return Err(Error::Domain(format!("arity must be >= 2, got {arity}")));
    }
    if depth < 1 {
        return Err(Error::Domain(format!("depth must be >= 1, got {depth}")));
    }
    let mut leaf_count: u64 = 1;
    for _ in 0..depth {
        leaf_count = leaf_count
            .checked_mul(arity as u64)
            .filter(|&n| n <= budget)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "leaf budget exceeded: {arity}^{depth} > {budget}"
                ))
            })?;
    }
    Ok(TreePartition {
        arity,
        depth,
        leaf_count,
    })
}

impl TreePartition {
    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of leaves, `arity^depth`.
    pub fn leaf_count(&self) -> u64 {
        self.leaf_count
    }

    /// Measure of one leaf, `arity^(-depth)`.
    pub fn leaf_measure(&self) -> f64 {
        1.0 / self.leaf_count as f64
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    /// Number of nodes at `level`.
    pub fn nodes_at_level(&self, level: u32) -> u64 {
        (self.arity as u64).pow(level)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.level <= self.depth && node.index < self.nodes_at_level(node.level)
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "node (level {}, index {}) is not in an arity-{} depth-{} tree",
                node.level, node.index, self.arity, self.depth
            )))
        }
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        node.level == self.depth
    }

    /// The `arity` children of a non-leaf node.
    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> {
        let arity = self.arity as u64;
        let base = node.index * arity;
        let level = node.level + 1;
        (0..arity).map(move |j| NodeId {
            level,
            index: base + j,
        })
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        (node.level > 0).then(|| NodeId {
            level: node.level - 1,
            index: node.index / self.arity as u64,
        })
    }

    /// Leaves below `node`, as a half-open range of leaf indices.
    pub fn leaf_range(&self, node: NodeId) -> std::ops::Range<usize> {
        let span = (self.arity as u64).pow(self.depth - node.level);
        let start = node.index * span;
        start as usize..(start + span) as usize
    }

    /// Number of leaves below `node`.
    pub fn leaf_span(&self, node: NodeId) -> u64 {
        (self.arity as u64).pow(self.depth - node.level)
    }

    /// Exact measure of `node` as a rational over `arity^depth`.
    pub fn node_measure_exact(&self, node: NodeId) -> Endpoint {
        Endpoint {
            num: self.leaf_span(node),
            den: self.leaf_count,
        }
    }

    pub fn node_measure(&self, node: NodeId) -> f64 {
        self.node_measure_exact(node).as_f64()
    }

    /// Exact interval endpoints of `node` in `[0,1]`.
    pub fn node_endpoints(&self, node: NodeId) -> (Endpoint, Endpoint) {
        let span = self.leaf_span(node);
        let start = node.index * span;
        (
            Endpoint {
                num: start,
                den: self.leaf_count,
            },
            Endpoint {
                num: start + span,
                den: self.leaf_count,
            },
        )
    }
}

/// A nonnegative function constant on the leaves of a [`TreePartition`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    tree: TreePartition,
    values: Vec<f64>,
}

/// Wire format for [`StepFunction`]: `{arity, depth, values}` with
/// values in left-to-right leaf order.
#[derive(Debug, Serialize, Deserialize)]
struct StepFunctionWire {
    arity: u32,
    depth: u32,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(tree: TreePartition, values: Vec<f64>) -> Result<Self> {
        if values.len() as u64 != tree.leaf_count() {
            return Err(Error::Domain(format!(
                "expected {} leaf values, got {}",
                tree.leaf_count(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "leaf values must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(StepFunction { tree, values })
    }

    pub fn constant(tree: TreePartition, value: f64) -> Result<Self> {
        let n = tree.leaf_count() as usize;
        StepFunction::new(tree, vec![value; n])
    }

    pub fn tree(&self) -> TreePartition {
        self.tree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Leaf values may be adjusted in place as long as they stay
    /// nonnegative; callers in this crate preserve the invariant.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn to_json(&self) -> String {
        let wire = StepFunctionWire {
            arity: self.tree.arity(),
            depth: self.tree.depth(),
            values: self.values.clone(),
        };
        serde_json::to_string(&wire).expect("step function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: StepFunctionWire = serde_json::from_str(text)?;
        let tree = build_tree(wire.arity, wire.depth)?;
        StepFunction::new(tree, wire.values)
    }
}

/// Neumaier-compensated sum; the suites compare integrals at 1e-12 so
/// naive summation over 2^14 leaves is not good enough.
pub(crate) fn ksum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `∫ φ dμ` over the whole space.
pub fn integral(phi: &StepFunction) -> f64 {
    ksum(phi.values().iter().copied()) / phi.tree().leaf_count() as f64
}

/// `∫_I φ dμ`, exact leaf sum times the leaf measure.
pub fn node_integral(phi: &StepFunction, node: NodeId) -> Result<f64> {
    phi.tree().check_node(node)?;
    let range = phi.tree().leaf_range(node);
    Ok(ksum(phi.values()[range].iter().copied()) / phi.tree().leaf_count() as f64)
}

/// `Av_I(φ) = (1/μ(I)) ∫_I φ dμ`.
pub fn node_average(phi: &StepFunction, node: NodeId) -> Result<f64> {
    phi.tree().check_node(node)?;
    let range = phi.tree().leaf_range(node);
    let span = range.len() as f64;
    Ok(ksum(phi.values()[range].iter().copied()) / span)
}

/// Replace `φ` by its average on every leaf under `I`, leaving the rest
/// alone. Preserves the integral; never increases the equivalent
/// weak-L^p norm.
pub fn average_smooth(phi: &StepFunction, node: NodeId) -> Result<StepFunction> {
    let avg = node_average(phi, node)?;
    let mut out = phi.clone();
    let range = phi.tree().leaf_range(node);
    for v in &mut out.values_mut()[range] {
        *v = avg;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_of_unit_interval() {
        let t = build_tree(2, 1).unwrap();
        assert_eq!(t.leaf_count(), 2);
        let leaves: Vec<NodeId> = t.children(t.root()).collect();
        assert_eq!(leaves.len(), 2);
        for leaf in leaves {
            assert_eq!(t.node_measure(leaf), 0.5);
        }
        let (a, b) = t.node_endpoints(NodeId { level: 1, index: 1 });
        assert_eq!((a.num, a.den), (1, 2));
        assert_eq!((b.num, b.den), (2, 2));
    }

    #[test]
    fn eight_leaves_at_depth_three() {
        let t = build_tree(2, 3).unwrap();
        assert_eq!(t.leaf_count(), 8);
        assert_eq!(t.leaf_measure(), 0.125);
    }

    #[test]
    fn ternary_tree_measures_sum() {
        let t = build_tree(3, 2).unwrap();
        assert_eq!(t.leaf_count(), 9);
        // Every internal node has 3 children whose exact measures sum to
        // the parent's measure.
        for level in 0..t.depth() {
            for index in 0..t.nodes_at_level(level) {
                let node = NodeId { level, index };
                let parent = t.node_measure_exact(node);
                let child_sum: u64 = t
                    .children(node)
                    .map(|c| t.node_measure_exact(c).num)
                    .sum();
                assert_eq!(child_sum, parent.num);
            }
        }
    }

    #[test]
    fn budget_and_domain_errors() {
        assert!(matches!(build_tree(1, 3), Err(Error::Domain(_))));
        assert!(matches!(build_tree(2, 0), Err(Error::Domain(_))));
        assert!(matches!(
            build_tree_with_budget(2, 10, 512),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn integral_examples() {
        let t = build_tree(2, 2).unwrap();
        let one = StepFunction::constant(t, 1.0).unwrap();
        assert_eq!(integral(&one), 1.0);

        // 2 on [0, 1/4], 0 elsewhere.
        let phi = StepFunction::new(t, vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(integral(&phi), 0.5);

        let phi = StepFunction::new(t, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(integral(&phi), 2.5);
    }

    #[test]
    fn node_average_examples() {
        let t2 = build_tree(2, 1).unwrap();
        let phi = StepFunction::new(t2, vec![1.0, 0.0]).unwrap();
        assert_eq!(node_average(&phi, NodeId::ROOT).unwrap(), 0.5);

        let t4 = build_tree(2, 2).unwrap();
        let phi = StepFunction::new(t4, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let left = NodeId { level: 1, index: 0 };
        assert_eq!(node_average(&phi, left).unwrap(), 2.0);

        let c = StepFunction::constant(t4, 3.25).unwrap();
        assert_eq!(node_average(&c, left).unwrap(), 3.25);
    }

    #[test]
    fn node_average_rejects_foreign_node() {
        let t = build_tree(2, 2).unwrap();
        let phi = StepFunction::constant(t, 1.0).unwrap();
        let bad = NodeId { level: 3, index: 0 };
        assert!(node_average(&phi, bad).is_err());
    }

    #[test]
    fn average_smooth_examples() {
        let t2 = build_tree(2, 1).unwrap();
        let phi = StepFunction::new(t2, vec![4.0, 0.0]).unwrap();
        let psi = average_smooth(&phi, NodeId::ROOT).unwrap();
        assert_eq!(psi.values(), &[2.0, 2.0]);
        assert_eq!(integral(&psi), integral(&phi));

        let t4 = build_tree(2, 2).unwrap();
        let phi = StepFunction::new(t4, vec![4.0, 0.0, 1.0, 1.0]).unwrap();
        let psi = average_smooth(&phi, NodeId { level: 1, index: 0 }).unwrap();
        assert_eq!(psi.values(), &[2.0, 2.0, 1.0, 1.0]);
        assert_eq!(integral(&psi), integral(&phi));

        let c = StepFunction::constant(t4, 0.7).unwrap();
        let smoothed = average_smooth(&c, NodeId { level: 1, index: 1 }).unwrap();
        assert_eq!(smoothed.values(), c.values());
    }

    #[test]
    fn step_function_json_round_trip() {
        let t = build_tree(2, 2).unwrap();
        let phi = StepFunction::new(t, vec![0.25, 0.0, 1.5, 3.0]).unwrap();
        let text = phi.to_json();
        let back = StepFunction::from_json(&text).unwrap();
        assert_eq!(back, phi);
        assert!(text.contains("\"arity\":2"));
        assert!(text.contains("\"depth\":2"));
    }

    #[test]
    fn step_function_rejects_negative_values() {
        let t = build_tree(2, 1).unwrap();
        assert!(StepFunction::new(t, vec![1.0, -0.5]).is_err());
        assert!(StepFunction::new(t, vec![1.0]).is_err());
    }
}
