//! Continuous profiles backing the extremal constructions.
//!
//! The extremal functions are assembled from three ingredient shapes:
//! shifted power laws `c·(t+b)^(−1/p)`, flat levels, and (for the
//! middle-branch construction) a decreasing exponential tail glued C¹
//! onto a power-law head. All integrals are closed-form antiderivatives,
//! so discretization by cell averages is exact and preserves integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::k_constant;

/// One decreasing (or constant) piece on `[x0, x1]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Piece {
    /// `coef · (t + shift)^(−1/p)`.
    Power { coef: f64, shift: f64 },
    /// Constant level.
    Const { level: f64 },
    /// `v0 · exp(−(t − start)/rate)`, anchored at the piece start.
    Exp { v0: f64, start: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub piece: Piece,
}

/// A piecewise profile on `[0, L]` with exact integration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub p: f64,
    pub segments: Vec<Segment>,
}

impl Profile {
    pub fn domain_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.x1)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        for seg in &self.segments {
            let in_range = t <= seg.x1 || std::ptr::eq(seg, self.segments.last().unwrap());
            if in_range && t >= seg.x0 {
                return piece_value(self.p, &seg.piece, t);
            }
        }
        0.0
    }

    /// `∫_a^b profile` by closed-form antiderivatives.
    pub fn integral_on(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for seg in &self.segments {
            let lo = a.max(seg.x0);
            let hi = b.min(seg.x1);
            if hi > lo {
                acc += piece_integral(self.p, &seg.piece, lo, hi);
            }
        }
        acc
    }

    pub fn total_integral(&self) -> f64 {
        self.integral_on(0.0, self.domain_end())
    }

    /// `|{profile > θ}|`, exact per piece (all pieces are monotone).
    pub fn measure_above(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for seg in &self.segments {
            acc += match seg.piece {
                Piece::Const { level } => {
                    if level > theta {
                        seg.x1 - seg.x0
                    } else {
                        0.0
                    }
                }
                Piece::Power { coef, shift } => {
                    if coef <= 0.0 {
                        0.0
                    } else if theta <= 0.0 {
                        seg.x1 - seg.x0
                    } else {
                        // coef (t+shift)^(−1/p) > θ  ⟺  t < (coef/θ)^p − shift
                        let cut = (coef / theta).powf(self.p) - shift;
                        (cut.min(seg.x1) - seg.x0).max(0.0)
                    }
                }
                Piece::Exp { v0, start, rate } => {
                    if theta <= 0.0 {
                        seg.x1 - seg.x0
                    } else if theta >= v0 {
                        0.0
                    } else {
                        let cut = start + rate * (v0 / theta).ln();
                        (cut.min(seg.x1) - seg.x0).max(0.0)
                    }
                }
            };
        }
        acc
    }

    /// Exact cell averages over `cells` equal cells of `[0, domain_end]`.
    pub fn cell_averages(&self, cells: usize) -> Vec<f64> {
        let h = self.domain_end() / cells as f64;
        (0..cells)
            .map(|i| self.integral_on(i as f64 * h, (i + 1) as f64 * h) / h)
            .collect()
    }
}

fn piece_value(p: f64, piece: &Piece, t: f64) -> f64 {
    match *piece {
        Piece::Power { coef, shift } => coef * (t + shift).powf(-1.0 / p),
        Piece::Const { level } => level,
        Piece::Exp { v0, start, rate } => v0 * (-(t - start) / rate).exp(),
    }
}

fn piece_integral(p: f64, piece: &Piece, a: f64, b: f64) -> f64 {
    match *piece {
        Piece::Power { coef, shift } => {
            let k = k_constant(p);
            let e = 1.0 - 1.0 / p;
            coef * k * ((b + shift).powf(e) - (a + shift).powf(e))
        }
        Piece::Const { level } => level * (b - a),
        Piece::Exp { v0, start, rate } => {
            v0 * rate * ((-(a - start) / rate).exp() - (-(b - start) / rate).exp())
        }
    }
}

/// The middle-branch profile `G`: strictly decreasing, continuous,
/// convex on `(0, T]`, `G ≤ t^(−1/p)` with equality on the head
/// `(0, t0]`, `G(0+) = +∞`, and `|{G > t}|·t^p = 1` exactly for
/// `t ≥ t0^(−1/p)`. The tail is the exponential with matching value and
/// slope at `t0` (slope `−1/(p·t0)` in log scale), which stays strictly
/// below the power law and strictly positive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GSpec {
    pub p: f64,
    /// Domain length `T`.
    pub domain: f64,
    /// Head length: `G = t^(−1/p)` on `(0, t0]`.
    pub t0: f64,
    /// Achieved `∫_0^T G`.
    pub integral: f64,
}

impl GSpec {
    pub fn profile(&self) -> Profile {
        let mut segments = vec![Segment {
            x0: 0.0,
            x1: self.t0,
            piece: Piece::Power {
                coef: 1.0,
                shift: 0.0,
            },
        }];
        if self.t0 < self.domain {
            segments.push(Segment {
                x0: self.t0,
                x1: self.domain,
                piece: Piece::Exp {
                    v0: self.t0.powf(-1.0 / self.p),
                    start: self.t0,
                    rate: self.p * self.t0,
                },
            });
        }
        Profile {
            p: self.p,
            segments,
        }
    }
}

/// `∫_0^T G` as a function of the head length `t0`.
fn g_integral(p: f64, domain: f64, t0: f64) -> f64 {
    let k = k_constant(p);
    let head = k * t0.powf(1.0 - 1.0 / p);
    if t0 >= domain {
        return head;
    }
    // Tail: v0 = t0^(−1/p), rate = p·t0, from t0 to T.
    let tail = t0.powf(-1.0 / p) * p * t0 * (1.0 - (-(domain - t0) / (p * t0)).exp());
    head + tail
}

/// Build `G` on `[0, T]` with prescribed integral. Requires
/// `0 < target ≤ k·T^(1−1/p)` (the integral of the full power law);
/// the head length is solved by bisection, the integral sweeps
/// continuously from 0 (head only, `t0 → 0`) to the full power-law
/// integral (`t0 = T`).
pub fn build_g(p: f64, domain: f64, target: f64) -> Result<GSpec> {
    if !(domain > 0.0) || !(target > 0.0) {
        return Err(Error::Domain(format!(
            "G construction needs positive domain and target, got T = {domain}, target = {target}"
        )));
    }
    let max = k_constant(p) * domain.powf(1.0 - 1.0 / p);
    if target > max * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "G target integral {target} exceeds the power-law bound {max} on [0, {domain}]"
        )));
    }
    if target >= max {
        return Ok(GSpec {
            p,
            domain,
            t0: domain,
            integral: max,
        });
    }
    let (mut lo, mut hi) = (0.0f64, domain);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g_integral(p, domain, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t0 = 0.5 * (lo + hi);
    let spec = GSpec {
        p,
        domain,
        t0,
        integral: g_integral(p, domain, t0),
    };
    if (spec.integral - target).abs() > 1e-9 * target.max(1.0) {
        return Err(Error::Numeric(format!(
            "G head-length bisection did not reach the target integral: got {}, wanted {target}",
            spec.integral
        )));
    }
    Ok(spec)
}
