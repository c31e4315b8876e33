//! Window extraction on decreasing profiles.
//!
//! Given a nonincreasing step profile on `[0, L]` with mean `s`, the map
//! `r ↦ (1/β)∫_r^{r+β}` is continuous and nonincreasing, and takes the
//! value `s` somewhere (top windows average at least `s`, bottom windows
//! at most `s`). This module solves for the offset `r` exactly — the
//! window integral is piecewise linear in `r` with knots at segment
//! boundaries shifted by `0` and `β` — and splits profiles at window
//! boundaries. Both the equal-average selection on step functions and
//! the extremal constructions are built on it.

use crate::error::{Error, Result};
use crate::partition::ksum;

/// A nonincreasing step profile: `values` nonincreasing, `masses > 0`.
/// `keys` tag each segment with caller-meaningful provenance (leaf
/// indices, cell indices) that survives splitting.
#[derive(Debug, Clone)]
pub(crate) struct Segments {
    pub keys: Vec<usize>,
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Segments {
    pub fn new(keys: Vec<usize>, values: Vec<f64>, masses: Vec<f64>) -> Self {
        debug_assert_eq!(keys.len(), values.len());
        debug_assert_eq!(keys.len(), masses.len());
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        Segments {
            keys,
            values,
            masses,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn total_mass(&self) -> f64 {
        ksum(self.masses.iter().copied())
    }

    pub fn total_integral(&self) -> f64 {
        ksum(self.values.iter().zip(&self.masses).map(|(v, m)| v * m))
    }

    /// Cumulative masses `S_0 = 0 < S_1 < … < S_k` and cumulative
    /// integrals at the same knots.
    fn knots(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut cum_mass = Vec::with_capacity(n + 1);
        let mut cum_int = Vec::with_capacity(n + 1);
        cum_mass.push(0.0);
        cum_int.push(0.0);
        let (mut m, mut mc) = (0.0f64, 0.0f64);
        let (mut i, mut ic) = (0.0f64, 0.0f64);
        for (v, w) in self.values.iter().zip(&self.masses) {
            // Neumaier updates; prefix sums feed exact linear solves.
            let t = m + w;
            mc += if m.abs() >= w.abs() { (m - t) + w } else { (w - t) + m };
            m = t;
            let x = v * w;
            let t = i + x;
            ic += if i.abs() >= x.abs() { (i - t) + x } else { (x - t) + i };
            i = t;
            cum_mass.push(m + mc);
            cum_int.push(i + ic);
        }
        (cum_mass, cum_int)
    }

    /// `Φ(x) = ∫_0^x profile(u) du`, linear between knots.
    fn cum_at(cum_mass: &[f64], cum_int: &[f64], values: &[f64], x: f64) -> f64 {
        let total = *cum_mass.last().unwrap();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= total {
            return *cum_int.last().unwrap();
        }
        // Last knot <= x.
        let i = match cum_mass.binary_search_by(|s| s.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if i >= values.len() {
            return *cum_int.last().unwrap();
        }
        cum_int[i] + values[i] * (x - cum_mass[i])
    }

    /// Smallest offset `r` such that `∫_r^{r+beta} = target`.
    ///
    /// Exact piecewise-linear solve over the knot grid; falls back to
    /// bisection (1e-12 tolerance, 200-iteration cap) if rounding leaves
    /// no clean bracket.
    pub fn solve_window(&self, beta: f64, target: f64) -> Result<f64> {
        let (cum_mass, cum_int) = self.knots();
        let total = *cum_mass.last().unwrap();
        if !(beta > 0.0) || beta > total * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "window mass {beta} out of range (0, {total}]"
            )));
        }
        let beta = beta.min(total);
        let hi = total - beta;
        let window = |r: f64| {
            Self::cum_at(&cum_mass, &cum_int, &self.values, r + beta)
                - Self::cum_at(&cum_mass, &cum_int, &self.values, r)
        };

        let w0 = window(0.0);
        let w1 = window(hi);
        let tol = 1e-9 * target.abs().max(1.0);
        if target > w0 + tol || target < w1 - tol {
            return Err(Error::Numeric(format!(
                "window target {target} outside attainable range [{w1}, {w0}]"
            )));
        }

        // Candidate offsets where linearity can break: knots and knots
        // shifted left by beta.
        let mut rs: Vec<f64> = Vec::with_capacity(2 * cum_mass.len() + 2);
        rs.push(0.0);
        rs.push(hi);
        for &s in &cum_mass {
            if s > 0.0 && s < hi {
                rs.push(s);
            }
            let shifted = s - beta;
            if shifted > 0.0 && shifted < hi {
                rs.push(shifted);
            }
        }
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rs.dedup();

        let mut prev_r = rs[0];
        let mut prev_w = window(prev_r);
        if prev_w <= target {
            return Ok(prev_r);
        }
        for &r in &rs[1..] {
            let w = window(r);
            if w <= target {
                // Linear on [prev_r, r]; interpolate exactly.
                let denom = prev_w - w;
                let root = if denom.abs() <= f64::EPSILON * prev_w.abs().max(1.0) {
                    r
                } else {
                    prev_r + (prev_w - target) / denom * (r - prev_r)
                };
                return Ok(root.clamp(prev_r, r));
            }
            prev_r = r;
            prev_w = w;
        }

        // Rounding pushed the crossing past the last knot; bisect.
        let (mut lo, mut hi_r) = (0.0f64, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi_r);
            if window(mid) > target {
                lo = mid;
            } else {
                hi_r = mid;
            }
            if hi_r - lo <= 1e-12 {
                return Ok(hi_r);
            }
        }
        Err(Error::Numeric(
            "window bisection failed to converge within 200 iterations".into(),
        ))
    }

    /// Averages over `cells` equal-mass cells: cell `i` gets
    /// `(∫ over its slice) / (mass per cell)`. Used to transplant a
    /// window of a rearranged profile onto equal-measure tree leaves;
    /// averaging preserves the window integral.
    pub fn chop_equal(&self, cells: usize) -> Vec<f64> {
        let (cum_mass, cum_int) = self.knots();
        let total = *cum_mass.last().unwrap();
        let h = total / cells as f64;
        let mut out = Vec::with_capacity(cells);
        let mut prev = 0.0;
        for i in 1..=cells {
            let x = if i == cells { total } else { i as f64 * h };
            let cur = Self::cum_at(&cum_mass, &cum_int, &self.values, x);
            out.push((cur - prev) / h);
            prev = cur;
        }
        out
    }

    /// Split off the window `[r, r+beta]` (in rearranged coordinates).
    /// Returns `(window, remainder)`; the remainder is the concatenation
    /// of `[0, r)` and `(r+beta, total]`, still nonincreasing.
    pub fn extract_window(&self, r: f64, beta: f64) -> (Segments, Segments) {
        let mut window = Segments::new(Vec::new(), Vec::new(), Vec::new());
        let mut rest = Segments::new(Vec::new(), Vec::new(), Vec::new());
        let mut pos = 0.0f64;
        let end = r + beta;
        for i in 0..self.len() {
            let m = self.masses[i];
            let (a, b) = (pos, pos + m);
            pos = b;
            let push = |seg: &mut Segments, mass: f64| {
                if mass > 0.0 {
                    seg.keys.push(self.keys[i]);
                    seg.values.push(self.values[i]);
                    seg.masses.push(mass);
                }
            };
            let in_lo = (r - a).clamp(0.0, m); // mass before the window
            let in_win = ((end.min(b)) - (r.max(a))).clamp(0.0, m);
            let in_hi = (b - end).clamp(0.0, m);
            // Guard against rounding making the three parts disagree
            // with the segment mass.
            let drift = m - (in_lo + in_win + in_hi);
            push(&mut rest, in_lo);
            push(&mut window, in_win + if in_win > 0.0 { drift } else { 0.0 });
            push(&mut rest, in_hi + if in_win <= 0.0 { drift } else { 0.0 });
        }
        // Remainder was emitted left-part-then-right-part per segment in
        // order, so values stay nonincreasing overall after regrouping:
        // left parts come from segments before the window, right parts
        // after. Interleaving only happens at the boundary segments,
        // where values are equal or already ordered.
        debug_assert!(window.values.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(rest.values.windows(2).all(|w| w[0] >= w[1]));
        (window, rest)
    }
}
