//! Closed-form Bellman functions for the tree maximal operator.
//!
//! For `p > 1`, `0 < f ≤ F` (and `f ≤ kF` for the quasi-norm problem,
//! `k = p/(p−1)`), the sharp bounds on `μ({M_T φ ≥ λ})` over
//! nonnegative `φ` with `∫ φ = f` and a weak-norm constraint at level
//! `F` are
//!
//! * `B(f,F,λ)  = min(1, f/λ, F^p/λ^p)` under `|||φ||| ≤ F`,
//! * `B₁(f,F,λ) = min(1, f/λ, k^p F^p/λ^p)` under `‖φ‖ = F`,
//! * `B₂(f,F,λ) = B(f,F,λ)` under `|||φ||| = F`,
//!
//! and consequently `sup ‖M_T φ‖_{p,∞} = F` (equivalent-norm
//! constraint) and `= kF` (quasi-norm constraint).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::k_constant;

/// Which extremal problem is asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Functional {
    /// `|||φ|||_{p,∞} ≤ F`.
    B,
    /// `‖φ‖_{p,∞} = F`.
    B1,
    /// `|||φ|||_{p,∞} = F`.
    B2,
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Functional::B => write!(f, "B"),
            Functional::B1 => write!(f, "B1"),
            Functional::B2 => write!(f, "B2"),
        }
    }
}

/// The tuple `(p, f, F, λ)` plus the functional.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BellmanQuery {
    pub p: f64,
    /// Prescribed integral `∫ φ dμ = f`.
    pub f: f64,
    /// Prescribed weak-norm level `F`.
    #[serde(rename = "F")]
    pub norm_level: f64,
    pub lambda: f64,
    pub functional: Functional,
}

impl BellmanQuery {
    pub fn new(p: f64, f: f64, norm_level: f64, lambda: f64, functional: Functional) -> Result<Self> {
        let q = BellmanQuery {
            p,
            f,
            norm_level,
            lambda,
            functional,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::Domain(format!("p must be > 1, got {}", self.p)));
        }
        for (name, v) in [("f", self.f), ("F", self.norm_level), ("lambda", self.lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let cap = match self.functional {
            Functional::B | Functional::B2 => self.norm_level,
            Functional::B1 => self.k() * self.norm_level,
        };
        if self.f > cap * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "domain constraint violated for {}: requires 0 < f <= {} (f = {}, F = {})",
                self.functional, cap, self.f, self.norm_level
            )));
        }
        Ok(())
    }

    /// `k = p/(p−1)`.
    pub fn k(&self) -> f64 {
        k_constant(self.p)
    }

    /// The query scaled to `F = 1`; constructions are built there and
    /// scaled back by homogeneity (`φ ↦ Fφ`, `λ ↦ Fλ`).
    pub fn normalized(&self) -> BellmanQuery {
        BellmanQuery {
            p: self.p,
            f: self.f / self.norm_level,
            norm_level: 1.0,
            lambda: self.lambda / self.norm_level,
            functional: self.functional,
        }
    }
}

/// Which term of the min is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `λ ≤ f`: the whole space.
    One,
    /// `f < λ ≤ λ_power`: the weak type (1,1) bound.
    FOverLambda,
    /// `λ > λ_power`: the norm-constraint bound.
    Power,
}

/// The two branch thresholds in `λ`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    /// Below this, the level set is everything: `λ_flat = f`.
    pub lambda_flat: f64,
    /// Above this, the power term is active:
    /// `(F^p/f)^(1/(p−1))`, resp. `(k^p F^p/f)^(1/(p−1))` for B₁.
    pub lambda_power: f64,
}

/// Closed-form value with its active branch and thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    pub branch: Branch,
    pub thresholds: Thresholds,
}

/// Branch thresholds for a query.
pub fn thresholds(q: &BellmanQuery) -> Thresholds {
    let p = q.p;
    let pow_f = match q.functional {
        Functional::B | Functional::B2 => q.norm_level.powf(p),
        Functional::B1 => q.k().powf(p) * q.norm_level.powf(p),
    };
    Thresholds {
        lambda_flat: q.f,
        lambda_power: (pow_f / q.f).powf(1.0 / (p - 1.0)),
    }
}

/// Evaluate the closed form `min(1, f/λ, C^p F^p/λ^p)` with `C = 1`
/// (B, B₂) or `C = k` (B₁).
pub fn closed_form(q: &BellmanQuery) -> Result<ClosedForm> {
    q.validate()?;
    let power_term = match q.functional {
        Functional::B | Functional::B2 => q.norm_level.powf(q.p) / q.lambda.powf(q.p),
        Functional::B1 => {
            q.k().powf(q.p) * q.norm_level.powf(q.p) / q.lambda.powf(q.p)
        }
    };
    let value = 1.0f64.min(q.f / q.lambda).min(power_term);
    let th = thresholds(q);
    let branch = if q.lambda <= th.lambda_flat {
        Branch::One
    } else if q.lambda <= th.lambda_power {
        Branch::FOverLambda
    } else {
        Branch::Power
    };
    Ok(ClosedForm {
        value,
        branch,
        thresholds: th,
    })
}

/// `sup ‖M_T φ‖_{p,∞}` over the feasible set: `F` for the
/// equivalent-norm problem, `kF` for the quasi-norm problem.
pub fn corollary_norm_sup(p: f64, f: f64, norm_level: f64, functional: Functional) -> Result<f64> {
    let q = BellmanQuery::new(p, f, norm_level, 1.0, functional)?;
    Ok(match functional {
        Functional::B | Functional::B2 => q.norm_level,
        Functional::B1 => q.k() * q.norm_level,
    })
}
