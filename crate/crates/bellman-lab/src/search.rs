//! Randomized verification of the closed forms: feasible sampling,
//! upper-bound checking, and local search approaching the sup from
//! below.
//!
//! Every trial derives its RNG stream from `(seed, trial index)`, so
//! runs are reproducible and trials can be evaluated concurrently
//! without changing results.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bellman::{closed_form, BellmanQuery, Functional};
use crate::error::{Error, Result};
use crate::extremal::attainment_witness;
use crate::maximal::maximal_function;
use crate::norms::{equiv_norm, quasi_norm};
use crate::partition::{build_tree, integral, ksum, StepFunction, TreePartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Random,
    CoordinateAscent,
    Anneal,
}

/// Which norm constraint the feasible set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// `|||φ||| ≤ F` (problem B).
    NormLeF,
    /// `‖φ‖ = F` (problem B1).
    NormEqFQuasi,
    /// `|||φ||| = F` (problem B2).
    NormEqFEquiv,
}

impl ConstraintMode {
    pub fn for_functional(functional: Functional) -> Self {
        match functional {
            Functional::B => ConstraintMode::NormLeF,
            Functional::B1 => ConstraintMode::NormEqFQuasi,
            Functional::B2 => ConstraintMode::NormEqFEquiv,
        }
    }
}

/// Relative slack accepted on equality constraints.
const EQ_BAND: f64 = 1e-6;
/// Attempts per trial before a sampling rejection is recorded.
const SAMPLE_RETRIES: usize = 32;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub query: BellmanQuery,
    pub arity: u32,
    pub depth: u32,
    pub trials: u32,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub constraint: ConstraintMode,
    /// Local-search move budget for [`maximize`].
    pub move_budget: u32,
}

impl SearchConfig {
    pub fn new(query: BellmanQuery, arity: u32, depth: u32, trials: u32, seed: u64) -> Self {
        SearchConfig {
            query,
            arity,
            depth,
            trials,
            seed,
            optimizer: Optimizer::CoordinateAscent,
            constraint: ConstraintMode::for_functional(query.functional),
            move_budget: 50_000,
        }
    }

    pub fn tree(&self) -> Result<TreePartition> {
        build_tree(self.arity, self.depth)
    }

    fn validate(&self) -> Result<()> {
        self.query.validate()?;
        if self.trials < 1 {
            return Err(Error::Domain("trials must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub query: BellmanQuery,
    pub arity: u32,
    pub depth: u32,
    pub trials: u32,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub constraint: ConstraintMode,
    /// Closed-form value of the query.
    pub target: f64,
    /// Largest `μ({M_T φ ≥ λ})` observed over feasible functions.
    pub best: f64,
    pub gap: f64,
    pub mean_objective: f64,
    pub min_objective: f64,
    pub feasible_trials: u32,
    pub rejected_samples: u32,
    /// Must be zero: feasible functions exceeding the closed form.
    pub upper_bound_violations: u32,
    /// Must be zero: weak type (1,1) failures.
    pub weak_type_violations: u32,
    /// Moves executed by the optimizer (zero for bound verification).
    pub moves: u32,
    pub worst_violation_excess: Option<f64>,
    /// Offending function, serialized, if a violation ever occurs.
    pub violating_function: Option<String>,
    #[serde(skip)]
    best_function: Option<StepFunction>,
}

impl SearchReport {
    /// The best feasible function found (the certificate).
    pub fn best_function(&self) -> Option<&StepFunction> {
        self.best_function.as_ref()
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_add(1));
    rng
}

fn constrained_norm(phi: &StepFunction, p: f64, mode: ConstraintMode) -> Result<f64> {
    Ok(match mode {
        ConstraintMode::NormLeF => equiv_norm(phi, p)?.value,
        ConstraintMode::NormEqFQuasi => quasi_norm(phi, p)?.value,
        ConstraintMode::NormEqFEquiv => equiv_norm(phi, p)?.value,
    })
}

fn in_band(norm: f64, level: f64, mode: ConstraintMode) -> bool {
    match mode {
        ConstraintMode::NormLeF => norm <= level * (1.0 + 1e-12),
        ConstraintMode::NormEqFQuasi | ConstraintMode::NormEqFEquiv => {
            norm <= level * (1.0 + 1e-12) && norm >= level * (1.0 - EQ_BAND)
        }
    }
}

/// Raw candidate generators: a mixture of unstructured noise and
/// level-set-shaped profiles so both bound checking and attainment get
/// informative samples.
fn raw_candidate(config: &SearchConfig, tree: TreePartition, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = tree.leaf_count() as usize;
    let q = &config.query;
    let target_measure = closed_form(q).map(|c| c.value).unwrap_or(0.5);
    match rng.gen_range(0u32..6) {
        0 => (0..n).map(|_| rng.gen::<f64>()).collect(),
        1 => (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect(),
        2 => {
            let keep = (n / 8).max(1);
            let mut v = vec![0.0; n];
            for _ in 0..keep {
                let i = rng.gen_range(0..n);
                v[i] = rng.gen::<f64>();
            }
            v
        }
        3 | 4 => {
            // Flat level near λ on a contiguous block sized near the
            // closed-form measure, low floor elsewhere; optional spike.
            let level = q.lambda * rng.gen_range(0.8..1.3);
            let frac = (target_measure * rng.gen_range(0.5..1.4)).clamp(0.0, 0.9);
            let len = ((n as f64 * frac) as usize).clamp(1, n - 1);
            let start = rng.gen_range(0..n - len);
            let floor = rng.gen_range(0.0..0.2) * q.f;
            let mut v = vec![floor; n];
            for val in &mut v[start..start + len] {
                *val = level;
            }
            if rng.gen_range(0u32..2) == 1 {
                let i = rng.gen_range(0..n);
                v[i] = q.norm_level * (n as f64).powf(1.0 / q.p) * rng.gen_range(0.3..1.0);
            }
            v
        }
        _ => {
            let hi = rng.gen_range(1.0..4.0) * q.f;
            let lo = rng.gen_range(0.0..0.5) * q.f;
            let cut = rng.gen_range(1..n);
            (0..n).map(|i| if i < cut { hi } else { lo }).collect()
        }
    }
}

fn scale_to_integral(values: &mut [f64], f_target: f64) {
    let n = values.len() as f64;
    let current = ksum(values.iter().copied()) / n;
    if current <= 0.0 {
        for v in values.iter_mut() {
            *v = f_target;
        }
        return;
    }
    let alpha = f_target / current;
    for v in values.iter_mut() {
        *v *= alpha;
    }
}

/// Projection for the `≤ F` constraint: scale down to the norm, then
/// restore the integral by adding mass to the lowest-valued half. If a
/// few rounds do not settle, fall back to mixing toward the constant
/// `f`, which is always feasible and preserves the integral exactly.
fn project_le(phi: StepFunction, config: &SearchConfig) -> Result<StepFunction> {
    let (p, f, level) = (config.query.p, config.query.f, config.query.norm_level);
    let n = phi.values().len();
    let mut values = phi.values().to_vec();
    for _ in 0..8 {
        let cand = StepFunction::new(phi.tree(), values.clone())?;
        let norm = equiv_norm(&cand, p)?.value;
        if norm <= level * (1.0 + 1e-12) {
            return Ok(cand);
        }
        let alpha = level / norm;
        for v in values.iter_mut() {
            *v *= alpha;
        }
        // Redistribute the lost mass onto the lowest-valued half.
        let deficit = f * (1.0 - alpha);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let half = &order[..n / 2 + 1];
        let bump = deficit * n as f64 / half.len() as f64;
        for &i in half {
            values[i] += bump;
        }
    }
    // Convex mixing with the constant: norm is convex, the constant has
    // norm f ≤ F, and the integral is f for every mixing weight.
    let base = phi.values().to_vec();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let t = 0.5 * (lo + hi);
        let mixed: Vec<f64> = base.iter().map(|v| (1.0 - t) * v + t * f).collect();
        let cand = StepFunction::new(phi.tree(), mixed)?;
        if equiv_norm(&cand, p)?.value > level {
            lo = t;
        } else {
            hi = t;
        }
    }
    let mixed: Vec<f64> = base.iter().map(|v| (1.0 - hi) * v + hi * f).collect();
    let cand = StepFunction::new(phi.tree(), mixed)?;
    if equiv_norm(&cand, p)?.value <= level * (1.0 + 1e-12) {
        Ok(cand)
    } else {
        Err(Error::Numeric("≤-projection failed to settle".into()))
    }
}

/// O(n) norm of the projected family: the top level (a single value
/// `top_value` on `top_count` leaves) merged into the sorted remaining
/// values scaled by `rho`. All masses are multiples of one leaf, so the
/// powers of cumulative mass come from precomputed tables.
struct EqNormTables {
    /// `(c/n)^(1/p)` for cumulative leaf counts `c`.
    pow_q: Vec<f64>,
    /// `(c/n)^(1/p−1)`.
    pow_e: Vec<f64>,
    /// Remaining values, descending, with prefix sums.
    others_sorted: Vec<f64>,
    others_prefix: Vec<f64>,
    n: f64,
}

impl EqNormTables {
    fn new(others: Vec<f64>, n: usize, p: f64) -> Self {
        let mut others_sorted = others;
        others_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut others_prefix = Vec::with_capacity(others_sorted.len() + 1);
        others_prefix.push(0.0);
        let mut acc = 0.0;
        for v in &others_sorted {
            acc += v;
            others_prefix.push(acc);
        }
        let nf = n as f64;
        let pow_q: Vec<f64> = (0..=n).map(|c| (c as f64 / nf).powf(1.0 / p)).collect();
        let pow_e: Vec<f64> = (0..=n)
            .map(|c| {
                if c == 0 {
                    0.0
                } else {
                    (c as f64 / nf).powf(1.0 / p - 1.0)
                }
            })
            .collect();
        EqNormTables {
            pow_q,
            pow_e,
            others_sorted,
            others_prefix,
            n: nf,
        }
    }

    /// Max over merged prefixes of the quasi (`v·S^(1/p)`) or
    /// equivalent (`Φ·S^(1/p−1)`) candidate.
    fn norm(&self, top_value: f64, top_count: usize, rho: f64, mode: ConstraintMode) -> f64 {
        let quasi = matches!(mode, ConstraintMode::NormEqFQuasi);
        // Insertion point: others with ρ·w > top_value come first.
        let cut = self
            .others_sorted
            .partition_point(|w| rho * *w > top_value);
        let mut best = 0.0f64;
        let mut consider = |value: f64, count: usize, integral: f64| {
            let cand = if quasi {
                value * self.pow_q[count]
            } else {
                integral * self.pow_e[count]
            };
            if cand > best {
                best = cand;
            }
        };
        for i in 0..cut {
            let v = rho * self.others_sorted[i];
            if v <= 0.0 {
                break;
            }
            consider(v, i + 1, rho * self.others_prefix[i + 1] / self.n);
        }
        let top_integral = rho * self.others_prefix[cut] / self.n
            + top_value * top_count as f64 / self.n;
        consider(top_value, cut + top_count, top_integral);
        for i in cut..self.others_sorted.len() {
            let v = rho * self.others_sorted[i];
            if v <= 0.0 && quasi {
                break;
            }
            consider(
                v,
                i + 1 + top_count,
                rho * self.others_prefix[i + 1] / self.n + top_value * top_count as f64 / self.n,
            );
        }
        best
    }
}

/// Projection for equality constraints: scale the top rearrangement
/// level by `γ`, compensating the rest so the integral stays `f`, and
/// bisect `γ` until the norm lands in `[F(1−1e−6), F]` from below.
fn project_eq(phi: StepFunction, config: &SearchConfig) -> Result<StepFunction> {
    let (p, f, level) = (config.query.p, config.query.f, config.query.norm_level);
    let mode = config.constraint;
    let n = phi.values().len() as f64;
    let values = phi.values().to_vec();
    let v_max = values.iter().cloned().fold(0.0f64, f64::max);
    if v_max <= 0.0 {
        return Err(Error::Numeric("cannot project the zero function".into()));
    }
    let top: Vec<bool> = values.iter().map(|v| *v >= v_max * (1.0 - 1e-12)).collect();
    let top_count = top.iter().filter(|t| **t).count();
    let top_mass = ksum(values.iter().zip(&top).filter(|(_, t)| **t).map(|(v, _)| *v)) / n;
    let rest_mass = f - top_mass;
    if rest_mass <= f * 1e-9 {
        return Err(Error::Numeric("top level carries all the mass".into()));
    }
    let others: Vec<f64> = values
        .iter()
        .zip(&top)
        .filter(|(_, t)| !**t)
        .map(|(v, _)| *v)
        .collect();
    let tables = EqNormTables::new(others, values.len(), p);

    let build = |gamma: f64| -> Result<StepFunction> {
        let rho = (f - gamma * top_mass) / rest_mass;
        if rho < 0.0 {
            return Err(Error::Numeric("compensation went negative".into()));
        }
        let vals: Vec<f64> = values
            .iter()
            .zip(&top)
            .map(|(v, t)| if *t { v * gamma } else { v * rho })
            .collect();
        StepFunction::new(phi.tree(), vals)
    };
    let norm_at = |gamma: f64| -> Result<f64> {
        let rho = (f - gamma * top_mass) / rest_mass;
        if rho < 0.0 {
            return Err(Error::Numeric("compensation went negative".into()));
        }
        Ok(tables.norm(gamma * v_max, top_count, rho, mode))
    };

    let gamma_cap = (f / top_mass) * (1.0 - 1e-9);
    let n1 = norm_at(1.0)?;
    if in_band(n1, level, mode) {
        return build(1.0);
    }
    let (mut lo, mut hi) = if n1 < level {
        if norm_at(gamma_cap)? < level * (1.0 - EQ_BAND) {
            return Err(Error::Numeric("equality projection cannot reach F".into()));
        }
        (1.0, gamma_cap)
    } else {
        let eps = 1e-6;
        if norm_at(eps)? > level {
            return Err(Error::Numeric("equality projection cannot descend to F".into()));
        }
        (eps, 1.0)
    };
    // Norm at lo is below the band top, at hi above; keep the last γ
    // whose norm does not exceed F.
    let mut best_gamma = None;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let nm = norm_at(mid)?;
        if nm > level {
            hi = mid;
        } else {
            lo = mid;
            best_gamma = Some(mid);
            if nm >= level * (1.0 - EQ_BAND) {
                break;
            }
        }
    }
    let gamma = best_gamma.ok_or_else(|| Error::Numeric("equality projection stalled".into()))?;
    let out = build(gamma)?;
    let norm = constrained_norm(&out, p, mode)?;
    if in_band(norm, level, mode) {
        Ok(out)
    } else {
        Err(Error::Numeric(format!(
            "equality projection landed outside the band: {norm} vs {level}"
        )))
    }
}

/// Draw one feasible function: nonnegative, `∫ = f` (to 1e−12
/// relative), constraint satisfied from below.
pub fn sample_feasible(
    config: &SearchConfig,
    tree: TreePartition,
    rng: &mut ChaCha8Rng,
) -> Result<StepFunction> {
    config.validate()?;
    let f = config.query.f;
    for _ in 0..SAMPLE_RETRIES {
        let mut values = raw_candidate(config, tree, rng);
        scale_to_integral(&mut values, f);
        let phi = StepFunction::new(tree, values)?;
        let projected = match config.constraint {
            ConstraintMode::NormLeF => project_le(phi, config),
            _ => project_eq(phi, config),
        };
        if let Ok(mut phi) = projected {
            // Projections verify the constraint band on their output
            // and preserve the integral analytically; only rounding
            // drift needs a rescale, after which the band is re-checked.
            let cur = integral(&phi);
            if (cur - f).abs() <= 1e-12 * f.max(1.0) {
                return Ok(phi);
            }
            scale_to_integral(phi.values_mut(), f);
            let norm = constrained_norm(&phi, config.query.p, config.constraint)?;
            if in_band(norm, config.query.norm_level, config.constraint) {
                return Ok(phi);
            }
        }
    }
    Err(Error::Numeric(format!(
        "rejection budget exhausted after {SAMPLE_RETRIES} attempts"
    )))
}

/// Objective `μ({M_T φ ≥ λ})` plus a weak type (1,1) verdict computed
/// from the same maximal values.
fn objective(phi: &StepFunction, lambda: f64) -> (f64, bool) {
    let m = maximal_function(phi);
    let measure = m.distribution_at(lambda);
    let n = phi.tree().leaf_count() as f64;
    let int_on_set = ksum(
        phi.values()
            .iter()
            .zip(m.values().values())
            .filter(|(_, mv)| **mv >= lambda)
            .map(|(v, _)| *v),
    ) / n;
    let weak_ok = measure <= int_on_set / lambda + 1e-12;
    (measure, weak_ok)
}

struct TrialOutcome {
    measure: f64,
    rejected: u32,
    weak_violation: bool,
    bound_violation: Option<(f64, String)>,
    function: Option<StepFunction>,
}

fn run_trial(
    config: &SearchConfig,
    tree: TreePartition,
    target: f64,
    trial: u64,
    keep_function: bool,
) -> TrialOutcome {
    let mut rng = trial_rng(config.seed, trial);
    match sample_feasible(config, tree, &mut rng) {
        Ok(phi) => {
            let (measure, weak_ok) = objective(&phi, config.query.lambda);
            let bound_violation = (measure > target + 1e-12)
                .then(|| (measure - target, phi.to_json()));
            TrialOutcome {
                measure,
                rejected: 0,
                weak_violation: !weak_ok,
                bound_violation,
                function: keep_function.then_some(phi),
            }
        }
        Err(_) => TrialOutcome {
            measure: f64::NAN,
            rejected: 1,
            weak_violation: false,
            bound_violation: None,
            function: None,
        },
    }
}

fn empty_report(config: &SearchConfig, target: f64) -> SearchReport {
    SearchReport {
        query: config.query,
        arity: config.arity,
        depth: config.depth,
        trials: config.trials,
        seed: config.seed,
        optimizer: config.optimizer,
        constraint: config.constraint,
        target,
        best: 0.0,
        gap: target,
        mean_objective: 0.0,
        min_objective: 0.0,
        feasible_trials: 0,
        rejected_samples: 0,
        upper_bound_violations: 0,
        weak_type_violations: 0,
        moves: 0,
        worst_violation_excess: None,
        violating_function: None,
        best_function: None,
    }
}

/// Draw `trials` feasible functions and check every one of them against
/// the closed form. Violations should never happen; they are recorded
/// with the offending function serialized.
pub fn verify_upper_bound(config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    let tree = config.tree()?;
    let target = closed_form(&config.query)?.value;
    let outcomes: Vec<TrialOutcome> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, tree, target, t, false))
        .collect();

    let mut report = empty_report(config, target);
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for o in outcomes {
        report.rejected_samples += o.rejected;
        if o.rejected == 0 {
            report.feasible_trials += 1;
            sum += o.measure;
            min = min.min(o.measure);
            if o.measure > report.best {
                report.best = o.measure;
            }
            if o.weak_violation {
                report.weak_type_violations += 1;
            }
            if let Some((excess, json)) = o.bound_violation {
                report.upper_bound_violations += 1;
                if report.worst_violation_excess.is_none_or(|w| excess > w) {
                    report.worst_violation_excess = Some(excess);
                    report.violating_function = Some(json);
                }
            }
        }
    }
    if report.feasible_trials > 0 {
        report.mean_objective = sum / report.feasible_trials as f64;
        report.min_objective = min;
    }
    report.gap = target - report.best;
    Ok(report)
}

/// Local search from the best random sample and the branch-appropriate
/// extremal construction: move one leaf-mass quantum between leaf
/// pairs, keep the constraint band, accept improvements
/// (coordinate ascent) or Metropolis-style (annealing with geometric
/// cooling). The best objective is nondecreasing by construction.
pub fn maximize(config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    if config.optimizer == Optimizer::Random {
        return Err(Error::Domain(
            "maximize needs coordinate-ascent or annealing; use verify-bound for random sampling"
                .into(),
        ));
    }
    let tree = config.tree()?;
    let target = closed_form(&config.query)?.value;
    let lambda = config.query.lambda;

    let mut report = empty_report(config, target);

    // Seed pool: random feasible samples...
    let starts = config.trials.min(128);
    let outcomes: Vec<TrialOutcome> = (0..starts as u64)
        .into_par_iter()
        .map(|t| run_trial(config, tree, target, t, true))
        .collect();
    let mut seeds: Vec<(f64, StepFunction)> = Vec::new();
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for o in outcomes {
        report.rejected_samples += o.rejected;
        if o.rejected == 0 {
            report.feasible_trials += 1;
            sum += o.measure;
            min = min.min(o.measure);
            if o.weak_violation {
                report.weak_type_violations += 1;
            }
            if let Some((excess, json)) = o.bound_violation {
                report.upper_bound_violations += 1;
                report.worst_violation_excess = Some(excess);
                report.violating_function = Some(json);
            }
            if let Some(phi) = o.function {
                if seeds.is_empty() || o.measure > seeds[0].0 {
                    seeds.clear();
                    seeds.push((o.measure, phi));
                }
            }
        }
    }
    if report.feasible_trials > 0 {
        report.mean_objective = sum / report.feasible_trials as f64;
        report.min_objective = min;
    }

    // ...plus the discretized extremal construction, projected into the
    // constraint band if it sits below it.
    if let Ok(witness) = attainment_witness(&config.query, tree) {
        let norm = constrained_norm(&witness, config.query.p, config.constraint)?;
        let witness = if in_band(norm, config.query.norm_level, config.constraint) {
            Some(witness)
        } else {
            project_eq(witness, config).ok()
        };
        if let Some(phi) = witness {
            let (measure, weak_ok) = objective(&phi, lambda);
            if !weak_ok {
                report.weak_type_violations += 1;
            }
            if measure > target + 1e-12 {
                report.upper_bound_violations += 1;
                report.worst_violation_excess = Some(measure - target);
                report.violating_function = Some(phi.to_json());
            }
            if seeds.is_empty() || measure > seeds[0].0 {
                seeds.clear();
                seeds.push((measure, phi));
            }
        }
    }

    let (mut best_measure, mut current) = seeds
        .pop()
        .ok_or_else(|| Error::Numeric("no feasible starting point found".into()))?;
    let mut best_function = current.clone();
    let mut current_measure = best_measure;

    let mut rng = trial_rng(config.seed, 0);
    let n = current.values().len();
    let quantum = config.query.f; // value shift moving one leaf-mass of f/n
    let mut temperature = (target / 10.0).max(1e-6);

    for mv in 0..config.move_budget {
        if mv > 0 && mv % 100 == 0 {
            temperature *= 0.95;
        }
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let amount = current.values()[i].min(quantum);
        if amount <= 0.0 {
            continue;
        }
        let mut cand_values = current.values().to_vec();
        cand_values[i] -= amount;
        cand_values[j] += amount;
        let cand = StepFunction::new(current.tree(), cand_values)?;
        let norm = constrained_norm(&cand, config.query.p, config.constraint)?;
        if !in_band(norm, config.query.norm_level, config.constraint) {
            continue;
        }
        let (measure, weak_ok) = objective(&cand, lambda);
        if !weak_ok {
            report.weak_type_violations += 1;
        }
        if measure > target + 1e-12 {
            report.upper_bound_violations += 1;
            report.worst_violation_excess = Some(measure - target);
            report.violating_function = Some(cand.to_json());
        }
        let accept = match config.optimizer {
            Optimizer::CoordinateAscent => measure > current_measure,
            Optimizer::Anneal => {
                measure > current_measure
                    || rng.gen::<f64>() < ((measure - current_measure) / temperature).exp()
            }
            Optimizer::Random => unreachable!(),
        };
        if accept {
            current = cand;
            current_measure = measure;
            if measure > best_measure {
                best_measure = measure;
                best_function = current.clone();
            }
        }
    }

    report.moves = config.move_budget;
    report.best = best_measure;
    report.gap = target - best_measure;
    report.best_function = Some(best_function);
    Ok(report)
}
