//! Information quantities of a model: max-relative entropy, storable
//! information, distinguishable number and capacity lower bounds.

mod capacity;
mod distinguish;
mod storable;

pub use capacity::{
    blahut_arimoto, blahut_arimoto_below, capacity_lower_bound, capacity_lower_bound_with,
    channel_matrix, mutual_information, BaResult, CapacityEstimate, CapacityOptions,
};
pub use distinguish::{distinguishable_number, is_distinguishable, DistinguishabilityResult};
pub use storable::{
    storable_info, storable_info_dual, storable_info_primal, PrimalSource, StorableInfoResult,
};
pub(crate) use storable::{solve_dual, weighted_primal, DualObjective};

use serde::{Deserialize, Serialize};

use crate::lp::{self, LinearProgram, LpStatus, VarBound};
use crate::model::{GpModel, StateVec};
use crate::{Error, Result};

/// A real number or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// `2^self`.
    pub fn exp2(&self) -> ExtReal {
        match *self {
            ExtReal::Finite(x) => ExtReal::Finite(x.exp2()),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.max(b)),
            _ => ExtReal::Infinite,
        }
    }

    /// `f64::INFINITY` for the infinite variant.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// `min{c ≥ 0 : c·target − s ∈ cone}`, `None` when no `c` works.
pub(crate) fn cone_scale(model: &GpModel, target: &StateVec, s: &StateVec) -> Result<Option<f64>> {
    let k = model.num_vertices();
    let mut obj = vec![0.0; k + 1];
    obj[0] = 1.0;
    let mut prob = LinearProgram::minimize(obj);
    prob.bounds = vec![VarBound::NONNEG; k + 1];
    for r in 0..=model.dim() {
        let mut row = Vec::with_capacity(k + 1);
        row.push(target.lifted()[r]);
        row.extend(model.vertices().iter().map(|v| -v.lifted()[r]));
        prob.add_eq(row, s.lifted()[r]);
    }
    let sol = lp::solve_with(&prob, model.lp_config())?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol.value)),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Lp(lp::LpError::NotOptimal(sol.status))),
    }
}

/// `D_max(s1‖s2) = log2 min{c : s1 ≤ c·s2}` in bits.
pub fn dmax(s1: &StateVec, s2: &StateVec, model: &GpModel) -> Result<ExtReal> {
    model.require_state(s1, "first state")?;
    model.require_state(s2, "second state")?;
    Ok(match cone_scale(model, s2, s1)? {
        // c ≥ 1 for normalized states; clamp the rounding below it
        Some(c) => ExtReal::Finite(c.max(1.0).log2()),
        None => ExtReal::Infinite,
    })
}

/// `max_{s ∈ F} 2^{D_max(s‖s*)}`.
pub fn n_at(s_star: &StateVec, family: &[StateVec], model: &GpModel) -> Result<ExtReal> {
    model.require_state(s_star, "base point")?;
    let mut best = ExtReal::Finite(1.0);
    for s in family {
        model.require_state(s, "family member")?;
        best = match cone_scale(model, s_star, s)? {
            Some(c) => best.max(ExtReal::Finite(c.max(1.0))),
            None => ExtReal::Infinite,
        };
        if !best.is_finite() {
            break;
        }
    }
    Ok(best)
}

/// Kullback-Leibler divergence in bits.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> ExtReal {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return ExtReal::Infinite;
        }
        d += a * (a / b).log2();
    }
    ExtReal::Finite(d)
}

/// Classical max-relative entropy `log2 max_i p_i / q_i`.
pub fn classical_dmax(p: &[f64], q: &[f64]) -> ExtReal {
    let mut r = 0.0f64;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return ExtReal::Infinite;
        }
        r = r.max(a / b);
    }
    ExtReal::Finite(r.log2())
}

/// The chain `2 ≤ d ≤ 2^C ≤ n ≤ D + 1` with `C` replaced by a lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub d: usize,
    pub two_pow_c: f64,
    pub c_lb_bits: f64,
    pub n: f64,
    pub dim_plus_one: usize,
    pub d_at_least_two: bool,
    pub d_le_two_pow_c: bool,
    pub two_pow_c_le_n: bool,
    pub n_le_dim_plus_one: bool,
    /// `n = D + 1`, attained exactly by simplices.
    pub saturated: bool,
    pub tol: f64,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.d_at_least_two && self.d_le_two_pow_c && self.two_pow_c_le_n && self.n_le_dim_plus_one
    }
}

/// Computes `d`, `C_lb` and `n` for the vertex family and checks the chain.
pub fn inequality_report(model: &GpModel) -> Result<InequalityReport> {
    let store = storable_info_dual(model.vertices(), model)?;
    let dist = distinguishable_number(model.vertices(), model)?;
    let cap = capacity_lower_bound_with(
        model,
        &CapacityOptions::default(),
        Some(&dist),
        Some(&store),
    )?;
    Ok(chain_verdicts(model, dist.count, cap.lower_bound, store.value))
}

/// Verdicts for already computed `d`, `C_lb` (bits) and `n`.
pub fn chain_verdicts(model: &GpModel, d: usize, c_lb: f64, n: f64) -> InequalityReport {
    let tol = 1e-6;
    let two_pow_c = c_lb.exp2();
    let dp1 = model.dim() + 1;
    InequalityReport {
        d,
        two_pow_c,
        c_lb_bits: c_lb,
        n,
        dim_plus_one: dp1,
        d_at_least_two: d >= 2,
        d_le_two_pow_c: d as f64 <= two_pow_c + tol,
        two_pow_c_le_n: two_pow_c <= n + tol,
        n_le_dim_plus_one: n <= dp1 as f64 + 1e-9,
        saturated: (n - dp1 as f64).abs() <= tol,
        tol,
    }
}
