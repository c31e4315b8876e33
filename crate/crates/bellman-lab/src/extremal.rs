//! Extremal functions attaining the closed-form bounds, discretized
//! onto trees.
//!
//! Each construction follows the same pattern: a continuous profile on
//! the ideal non-atomic space attains the bound exactly and is recorded
//! symbolically with its exact metrics; the discretization snaps the
//! level-set measure down to the leaf grid, selects that measure as a
//! union of tree cells, and fills cells by exact cell averages of the
//! profile. Cell averaging preserves integrals and never increases the
//! equivalent norm, so the discretized function stays feasible while
//! `μ({M_T φ ≥ λ(1−ε_d)})` reaches the bound up to the grid slack
//! `ε_d = arity^(−depth)`.

use serde::{Deserialize, Serialize};

use crate::bellman::{closed_form, thresholds, BellmanQuery, Branch, Functional};
use crate::error::{Error, Result};
use crate::maximal::maximal_function;
use crate::norms::{equiv_norm, k_constant, quasi_norm};
use crate::partition::{integral, NodeId, StepFunction, TreePartition};
use crate::profile::{build_g, GSpec, Piece, Profile, Segment};
use crate::rearrange::select_leaf_count;
use crate::window::Segments;

/// Symbolic description of the continuous profile, in normalized
/// (`F = 1`) coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ProfileSpec {
    /// Decreasing head `(1−1/p)(t + 1/λ^p)^(−1/p)` on `[0, head_len]`,
    /// zero gap, flat top at level `λ` on `flat_measure`.
    BPower {
        head_len: f64,
        shift: f64,
        flat_level: f64,
        flat_measure_ideal: f64,
        flat_measure_snapped: f64,
    },
    /// Core `t^(−1/p)` on `[0, core_measure]` spread over tree cells
    /// with common average `k·core_measure^(−1/p)`, plus a bounded tail
    /// `(t + core_measure)^(−1/p)` on `[0, head_len]` on the complement.
    B1Power {
        core_measure_ideal: f64,
        core_measure_snapped: f64,
        head_len_ideal: f64,
        head_len_snapped: f64,
    },
    /// Convex profile `G` on `[0, f/λ]` spread over tree cells with
    /// common average `λ`, zero on the complement.
    B1Middle {
        g_ideal: GSpec,
        g_snapped: GSpec,
        core_measure_ideal: f64,
        core_measure_snapped: f64,
    },
}

/// Exact metrics of the continuous profile (scaled back by `F`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuousMetrics {
    pub integral: f64,
    pub quasi_norm: f64,
    /// Pinned only where the construction fixes it (`B`: equals `F`).
    pub equiv_norm: Option<f64>,
    /// `μ({M φ ≥ λ})` of the continuous construction = the closed form.
    pub level_measure: f64,
}

/// Metrics of the discretized step function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AchievedMetrics {
    pub integral: f64,
    pub quasi_norm: f64,
    pub equiv_norm: f64,
    /// `μ({M_T φ ≥ λ(1−eps_d)})`.
    pub level_measure: f64,
    /// Grid slack used for the shaved level and the attainment bound:
    /// one leaf measure.
    pub eps_d: f64,
    /// How much the level-set measure lost to grid snapping.
    pub snap_deficit: f64,
    /// Closed-form target.
    pub target: f64,
    /// `target − level_measure` (at most `eps_d` by construction).
    pub gap: f64,
}

/// A discretized extremal function with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalRecipe {
    pub query: BellmanQuery,
    /// Homogeneity factor: the construction is built at `F = 1` and the
    /// leaf values are scaled by `F`.
    pub scale: f64,
    pub spec: ProfileSpec,
    pub continuous: ContinuousMetrics,
    #[serde(skip)]
    function: Option<StepFunction>,
    pub leaf_values: Vec<f64>,
    pub tree_arity: u32,
    pub tree_depth: u32,
    pub achieved: AchievedMetrics,
    /// The tree cells carrying the flat/core part (where `M ≥ λ` is
    /// guaranteed by construction).
    pub core_nodes: Vec<NodeId>,
}

impl ExtremalRecipe {
    /// The discretized extremal step function.
    pub fn function(&self) -> &StepFunction {
        self.function.as_ref().expect("recipe carries its function")
    }

    /// `μ({φ' > θ})` of the continuous core part in normalized
    /// coordinates (the `t^(−1/p)` spread for the quasi-norm problem):
    /// equals `θ^(−p)` for `θ ≥ λ/k`.
    pub fn core_measure_above(&self, theta: f64) -> Option<f64> {
        match &self.spec {
            ProfileSpec::B1Power {
                core_measure_ideal, ..
            } => {
                let profile = Profile {
                    p: self.query.p,
                    segments: vec![Segment {
                        x0: 0.0,
                        x1: *core_measure_ideal,
                        piece: Piece::Power {
                            coef: 1.0,
                            shift: 0.0,
                        },
                    }],
                };
                Some(profile.measure_above(theta))
            }
            _ => None,
        }
    }

    /// Sup of the bounded tail `(t + k^p/λ^p)^(−1/p)` in normalized
    /// coordinates; the construction keeps it at `λ/k`.
    pub fn tail_sup(&self) -> Option<f64> {
        match &self.spec {
            ProfileSpec::B1Power {
                core_measure_ideal, ..
            } => Some(core_measure_ideal.powf(-1.0 / self.query.p)),
            _ => None,
        }
    }
}

/// `μ({M_T φ ≥ λ(1−eps)})`.
pub fn shaved_level_measure(phi: &StepFunction, lambda: f64, eps: f64) -> f64 {
    maximal_function(phi).distribution_at(lambda * (1.0 - eps))
}

fn snap_down(measure: f64, tree: &TreePartition) -> (u64, f64) {
    let n = tree.leaf_count();
    let leaves = ((measure * n as f64).floor() as u64).min(n);
    (leaves, leaves as f64 / n as f64)
}

/// Spread a decreasing profile over the leaves of the selected cells so
/// that every cell's average equals the profile's global average: cut
/// equal-average windows of the cells' measures, then average each
/// window onto that cell's leaves.
fn fill_core(
    core_cells: Vec<f64>,
    cell_mass: f64,
    nodes: &[NodeId],
    tree: &TreePartition,
) -> Result<Vec<f64>> {
    let total_cells = core_cells.len();
    let keys: Vec<usize> = (0..total_cells).collect();
    let masses = vec![cell_mass; total_cells];
    let mut remainder = Segments::new(keys, core_cells, masses);
    let total_mass = remainder.total_mass();
    let mean = remainder.total_integral() / total_mass;

    let mut out = Vec::with_capacity(total_cells);
    for (i, node) in nodes.iter().enumerate() {
        let count = tree.leaf_span(*node) as usize;
        let beta = if i + 1 == nodes.len() {
            remainder.total_mass()
        } else {
            count as f64 * cell_mass
        };
        let r = remainder.solve_window(beta, mean * beta)?;
        let (window, rest) = remainder.extract_window(r, beta);
        out.extend(window.chop_equal(count));
        remainder = rest;
    }
    Ok(out)
}

fn finalize(
    query: &BellmanQuery,
    tree: TreePartition,
    normalized_values: Vec<f64>,
    spec: ProfileSpec,
    continuous: ContinuousMetrics,
    core_nodes: Vec<NodeId>,
    snap_deficit: f64,
) -> Result<ExtremalRecipe> {
    let scale = query.norm_level;
    let values: Vec<f64> = normalized_values
        .into_iter()
        .map(|v| (v * scale).max(0.0))
        .collect();
    let phi = StepFunction::new(tree, values.clone())?;
    let eps_d = tree.leaf_measure();
    let level_measure = shaved_level_measure(&phi, query.lambda, eps_d);
    let target = closed_form(query)?.value;
    let achieved = AchievedMetrics {
        integral: integral(&phi),
        quasi_norm: quasi_norm(&phi, query.p)?.value,
        equiv_norm: equiv_norm(&phi, query.p)?.value,
        level_measure,
        eps_d,
        snap_deficit,
        target,
        gap: target - level_measure,
    };
    Ok(ExtremalRecipe {
        query: *query,
        scale,
        spec,
        continuous,
        function: Some(phi),
        leaf_values: values,
        tree_arity: tree.arity(),
        tree_depth: tree.depth(),
        achieved,
        core_nodes,
    })
}

/// Extremal function for the equivalent-norm problem on its power
/// branch (`λ > (F^p/f)^(1/(p−1))`): decreasing head plus a flat top at
/// level `λ` carried by tree cells of measure `1/λ^p` (snapped down).
pub fn extremal_b(query: &BellmanQuery, tree: TreePartition) -> Result<ExtremalRecipe> {
    query.validate()?;
    if query.functional == Functional::B1 {
        return Err(Error::Domain(
            "extremal_b builds the equivalent-norm extremizer; use extremal_b1_power for B1".into(),
        ));
    }
    let q = query.normalized();
    let (p, f, lambda) = (q.p, q.f, q.lambda);
    let th = thresholds(&q);
    if lambda <= th.lambda_power {
        return Err(Error::Domain(format!(
            "extremal_b needs the power branch: lambda/F = {lambda} <= threshold {}",
            th.lambda_power
        )));
    }

    let flat_ideal = lambda.powf(-p);
    let (flat_leaves, flat_snapped) = snap_down(flat_ideal, &tree);
    if flat_leaves == 0 {
        return Err(Error::Domain(format!(
            "flat-top measure {flat_ideal} is below one leaf; increase depth"
        )));
    }
    let shift = lambda.powf(-p);
    // Head length making the total integral exactly f with the snapped
    // flat top: ∫ head = f − λ·flat_snapped.
    let head_target = f - lambda * flat_snapped;
    let head_len = (head_target + lambda.powf(1.0 - p)).powf(p / (p - 1.0)) - shift;
    let z_measure = 1.0 - flat_snapped;
    if head_len < -1e-15 || head_len > z_measure * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "head length {head_len} does not fit the complement {z_measure}; increase depth"
        )));
    }
    let head_len = head_len.clamp(0.0, z_measure);

    let core_nodes = select_leaf_count(&tree, NodeId::ROOT, flat_leaves);
    let n = tree.leaf_count() as usize;
    let z_cells = n - flat_leaves as usize;

    let mut segments = vec![Segment {
        x0: 0.0,
        x1: head_len,
        piece: Piece::Power {
            coef: 1.0 - 1.0 / p,
            shift,
        },
    }];
    if head_len < z_measure {
        segments.push(Segment {
            x0: head_len,
            x1: z_measure,
            piece: Piece::Const { level: 0.0 },
        });
    }
    let z_profile = Profile { p, segments };

    let mut values = vec![lambda; flat_leaves as usize];
    values.extend(z_profile.cell_averages(z_cells));

    let spec = ProfileSpec::BPower {
        head_len,
        shift,
        flat_level: lambda,
        flat_measure_ideal: flat_ideal,
        flat_measure_snapped: flat_snapped,
    };
    let continuous = ContinuousMetrics {
        integral: query.f,
        quasi_norm: query.norm_level,
        equiv_norm: Some(query.norm_level),
        level_measure: flat_ideal,
    };
    finalize(
        query,
        tree,
        values,
        spec,
        continuous,
        core_nodes,
        flat_ideal - flat_snapped,
    )
}

/// Extremal function for the quasi-norm problem on its power branch
/// (`λ > (k^p F^p/f)^(1/(p−1))`): the rearrangement of `t^(−1/p)` on
/// `[0, k^p/λ^p]` spread over tree cells with common average `λ`, plus
/// a tail bounded by `λ/k` on the complement.
pub fn extremal_b1_power(query: &BellmanQuery, tree: TreePartition) -> Result<ExtremalRecipe> {
    query.validate()?;
    if query.functional != Functional::B1 {
        return Err(Error::Domain(
            "extremal_b1_power builds the quasi-norm extremizer (B1)".into(),
        ));
    }
    let q = query.normalized();
    let (p, f, lambda) = (q.p, q.f, q.lambda);
    let k = k_constant(p);
    let th = thresholds(&q);
    if lambda <= th.lambda_power {
        return Err(Error::Domain(format!(
            "extremal_b1_power needs the power branch: lambda/F = {lambda} <= threshold {}",
            th.lambda_power
        )));
    }
    let core_ideal = k.powf(p) / lambda.powf(p);
    if core_ideal >= 1.0 {
        return Err(Error::Domain(format!(
            "k^p/lambda^p = {core_ideal} must be < 1"
        )));
    }

    let (core_leaves, core_snapped) = snap_down(core_ideal, &tree);
    if core_leaves == 0 {
        return Err(Error::Domain(format!(
            "core measure {core_ideal} is below one leaf; increase depth"
        )));
    }
    let n = tree.leaf_count() as usize;
    let cell_mass = tree.leaf_measure();

    // Core: exact cell averages of t^(−1/p) on [0, core_snapped],
    // window-partitioned so every selected cell averages k·c^(−1/p) ≥ λ.
    let core_profile = Profile {
        p,
        segments: vec![Segment {
            x0: 0.0,
            x1: core_snapped,
            piece: Piece::Power {
                coef: 1.0,
                shift: 0.0,
            },
        }],
    };
    let core_cells = core_profile.cell_averages(core_leaves as usize);
    let core_nodes = select_leaf_count(&tree, NodeId::ROOT, core_leaves);
    let core_values = fill_core(core_cells, cell_mass, &core_nodes, &tree)?;

    // Tail on the complement: (t + c)^(−1/p) on [0, A1], zero after,
    // with ∫ tail = f − ∫ core.
    let core_integral = k * core_snapped.powf(1.0 - 1.0 / p);
    let head_len = (f / k).powf(p / (p - 1.0)) - core_snapped;
    let head_len_ideal = (f / k).powf(p / (p - 1.0)) - core_ideal;
    let z_measure = 1.0 - core_snapped;
    if head_len < -1e-15 || head_len > z_measure * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "tail length {head_len} does not fit the complement {z_measure}"
        )));
    }
    let head_len = head_len.clamp(0.0, z_measure);
    debug_assert!(f - core_integral >= -1e-12);

    let mut segments = vec![Segment {
        x0: 0.0,
        x1: head_len,
        piece: Piece::Power {
            coef: 1.0,
            shift: core_snapped,
        },
    }];
    if head_len < z_measure {
        segments.push(Segment {
            x0: head_len,
            x1: z_measure,
            piece: Piece::Const { level: 0.0 },
        });
    }
    let z_profile = Profile { p, segments };

    let mut values = core_values;
    values.extend(z_profile.cell_averages(n - core_leaves as usize));

    let spec = ProfileSpec::B1Power {
        core_measure_ideal: core_ideal,
        core_measure_snapped: core_snapped,
        head_len_ideal,
        head_len_snapped: head_len,
    };
    let continuous = ContinuousMetrics {
        integral: query.f,
        quasi_norm: query.norm_level,
        equiv_norm: None,
        level_measure: core_ideal,
    };
    finalize(
        query,
        tree,
        values,
        spec,
        continuous,
        core_nodes,
        core_ideal - core_snapped,
    )
}

/// Extremal function for the quasi-norm problem on its middle branch
/// (`f < λ ≤ (k^p F^p/f)^(1/(p−1))`): a convex profile `G` on
/// `[0, f/λ]` with `∫ G = f` and `G ≤ t^(−1/p)`, spread over tree cells
/// with common average `λ`, zero on the complement.
pub fn extremal_b1_middle(query: &BellmanQuery, tree: TreePartition) -> Result<ExtremalRecipe> {
    query.validate()?;
    if query.functional != Functional::B1 {
        return Err(Error::Domain(
            "extremal_b1_middle builds the quasi-norm extremizer (B1)".into(),
        ));
    }
    let q = query.normalized();
    let (p, f, lambda) = (q.p, q.f, q.lambda);
    let th = thresholds(&q);
    if lambda <= th.lambda_flat || lambda > th.lambda_power * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "extremal_b1_middle needs the middle branch: f/F = {f} < lambda/F <= {}",
            th.lambda_power
        )));
    }

    let core_ideal = f / lambda;
    let g_ideal = build_g(p, core_ideal, f)?;

    let (core_leaves, core_snapped) = snap_down(core_ideal, &tree);
    if core_leaves == 0 {
        return Err(Error::Domain(format!(
            "core measure {core_ideal} is below one leaf; increase depth"
        )));
    }
    // Re-solve G on the snapped domain so the integral is still exactly
    // f; the cells' common average becomes f/core_snapped ≥ λ.
    let g_snapped = build_g(p, core_snapped, f).map_err(|e| {
        Error::Domain(format!(
            "snapped middle-branch profile infeasible at this depth ({e}); increase depth"
        ))
    })?;

    let core_cells = g_snapped.profile().cell_averages(core_leaves as usize);
    let core_nodes = select_leaf_count(&tree, NodeId::ROOT, core_leaves);
    let core_values = fill_core(core_cells, tree.leaf_measure(), &core_nodes, &tree)?;

    let n = tree.leaf_count() as usize;
    let mut values = core_values;
    values.resize(n, 0.0);

    let spec = ProfileSpec::B1Middle {
        g_ideal,
        g_snapped,
        core_measure_ideal: core_ideal,
        core_measure_snapped: core_snapped,
    };
    let continuous = ContinuousMetrics {
        integral: query.f,
        quasi_norm: query.norm_level,
        equiv_norm: None,
        level_measure: core_ideal,
    };
    finalize(
        query,
        tree,
        values,
        spec,
        continuous,
        core_nodes,
        core_ideal - core_snapped,
    )
}

/// Best known feasible attainer for any query: the branch-appropriate
/// extremal construction where one exists, otherwise a flat level-λ
/// witness (middle branch of the equivalent-norm problems) or the
/// constant `f` (trivial branch), with a one-leaf spike raising the
/// constrained norm to `F` where the constraint is an equality.
pub fn attainment_witness(query: &BellmanQuery, tree: TreePartition) -> Result<StepFunction> {
    query.validate()?;
    let branch = closed_form(query)?.branch;

    match (query.functional, branch) {
        (Functional::B, Branch::One) => StepFunction::constant(tree, query.f),
        (Functional::B2, Branch::One) => {
            let base = StepFunction::constant(tree, query.f)?;
            spike_to_norm(base, query, NormKind::Equiv, 0)
        }
        (Functional::B1, Branch::One) => {
            let base = StepFunction::constant(tree, query.f)?;
            spike_to_norm(base, query, NormKind::Quasi, 0)
        }
        (Functional::B, Branch::FOverLambda) => Ok(flat_witness(query, tree, 0)?.0),
        (Functional::B2, Branch::FOverLambda) => {
            let reserve = spike_reserve_leaves(query, &tree);
            let (base, flat_leaves) = flat_witness(query, tree, reserve)?;
            // The flat cells carry the attainment; the spike must not
            // touch them.
            spike_to_norm(base, query, NormKind::Equiv, flat_leaves as usize)
        }
        (Functional::B1, Branch::FOverLambda) => {
            Ok(extremal_b1_middle(query, tree)?.function().clone())
        }
        (Functional::B | Functional::B2, Branch::Power) => {
            Ok(extremal_b(query, tree)?.function().clone())
        }
        (Functional::B1, Branch::Power) => {
            Ok(extremal_b1_power(query, tree)?.function().clone())
        }
    }
}

/// Flat witness for the middle branch: level `λ` on tree cells of
/// measure `⌊n·f/λ⌋/n` minus `reserve` leaves, the leftover mass spread
/// uniformly on the complement. Feasible for the equivalent-norm
/// problems on the whole middle branch. Returns the flat leaf count.
fn flat_witness(
    query: &BellmanQuery,
    tree: TreePartition,
    reserve: u64,
) -> Result<(StepFunction, u64)> {
    let n = tree.leaf_count();
    let (leaves, _) = snap_down(query.f / query.lambda, &tree);
    let leaves = leaves.saturating_sub(reserve).max(1);
    if leaves >= n {
        return Err(Error::Domain("flat witness needs a proper subset".into()));
    }
    let flat_mass = query.lambda * leaves as f64 / n as f64;
    let residual_level = (query.f - flat_mass) / ((n - leaves) as f64 / n as f64);
    if residual_level < 0.0 {
        return Err(Error::Domain("flat witness lost its residual mass".into()));
    }
    let mut values = vec![query.lambda; leaves as usize];
    values.resize(n as usize, residual_level);
    Ok((StepFunction::new(tree, values)?, leaves))
}

enum NormKind {
    Quasi,
    Equiv,
}

fn norm_of(phi: &StepFunction, p: f64, kind: &NormKind) -> Result<f64> {
    Ok(match kind {
        NormKind::Quasi => quasi_norm(phi, p)?.value,
        NormKind::Equiv => equiv_norm(phi, p)?.value,
    })
}

/// Leaves to shave off a flat witness so the spike's mass fits without
/// touching the flat level.
fn spike_reserve_leaves(query: &BellmanQuery, tree: &TreePartition) -> u64 {
    let n = tree.leaf_count() as f64;
    let spike_mass = 1.25 * query.norm_level * n.powf(1.0 / query.p - 1.0);
    (spike_mass / query.lambda * n).ceil() as u64 + 1
}

/// Raise the constrained norm to `F` (within `[F(1−1e−9), F]`, from
/// below) by growing a spike on the last leaf, taking the displaced
/// mass pro rata from the leaves after `protected`. The root average
/// stays `f` and the first `protected` leaves are untouched, so level
/// sets certified through those cells survive the projection.
fn spike_to_norm(
    base: StepFunction,
    query: &BellmanQuery,
    kind: NormKind,
    protected: usize,
) -> Result<StepFunction> {
    let p = query.p;
    let target = query.norm_level;
    let base_norm = norm_of(&base, p, &kind)?;
    if base_norm > target * (1.0 + 1e-9) {
        return Err(Error::Invariant(format!(
            "witness base norm {base_norm} already exceeds the target {target}"
        )));
    }
    if base_norm >= target * (1.0 - 1e-9) {
        return Ok(base);
    }
    let n = base.tree().leaf_count() as f64;
    let spike_leaf = base.values().len() - 1;
    let base_spike = base.values()[spike_leaf];
    let donor_mass: f64 =
        base.values()[protected..spike_leaf].iter().sum::<f64>() / n;

    let build = |v: f64| -> Result<StepFunction> {
        let extra = (v - base_spike) / n; // mass the spike consumes
        if donor_mass <= extra {
            return Err(Error::Domain(
                "spike would consume all unprotected mass; increase depth".into(),
            ));
        }
        let mut values = base.values().to_vec();
        let rho = (donor_mass - extra) / donor_mass;
        for val in &mut values[protected..spike_leaf] {
            *val *= rho;
        }
        values[spike_leaf] = v;
        StepFunction::new(base.tree(), values)
    };

    // v = F·n^(1/p) makes the spike's own prefix candidate equal F, for
    // either norm; 1.05 of that brackets the target from above.
    let mut hi = target * n.powf(1.0 / p) * 1.05;
    let mut lo = base_spike;
    if norm_of(&build(hi)?, p, &kind)? < target {
        return Err(Error::Numeric("spike cannot reach the target norm".into()));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if norm_of(&build(mid)?, p, &kind)? > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let out = build(lo)?;
    let achieved = norm_of(&out, p, &kind)?;
    if achieved < target * (1.0 - 1e-6) || achieved > target * (1.0 + 1e-12) {
        return Err(Error::Numeric(format!(
            "spike projection landed at norm {achieved}, target {target}"
        )));
    }
    Ok(out)
}
