//! Dense linear-programming kernel.
//!
//! Every quantity computed by this crate is the value of a small linear
//! program or a feasibility question about one. Problems are stated with
//! [`LinearProgram`] and solved by a two-phase tableau simplex using Bland's
//! rule. Optimal solutions carry a dual certificate so callers can check the
//! duality gap themselves.
//!
//! An exact rational re-solve is available through [`solve_exact`] and is
//! used automatically by [`feasible`]/[`solve_with`] when
//! [`LpConfig::exact_adjudication`] is set and the floating-point phase-one
//! residual lands within a factor of ten of the feasibility threshold.

mod scalar;
mod simplex;

use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use scalar::LpScalar;
use simplex::{RawSolution, RawStatus, RowOrigin, StandardForm, VarMap};

/// Default feasibility/optimality tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("expected an optimal solution, solver returned {0:?}")]
    NotOptimal(LpStatus),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarBound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VarBound {
    pub const NONNEG: VarBound = VarBound {
        lower: Some(0.0),
        upper: None,
    };
    pub const FREE: VarBound = VarBound {
        lower: None,
        upper: None,
    };

    pub fn between(lower: f64, upper: f64) -> Self {
        VarBound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

/// `optimize objective·x` subject to `eq` rows (`row·x = rhs`), `le` rows
/// (`row·x ≤ rhs`) and per-variable bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// New program over `objective.len()` nonnegative variables.
    pub fn new(objective: Vec<f64>, sense: Sense) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            sense,
            eq: Vec::new(),
            le: Vec::new(),
            bounds: vec![VarBound::NONNEG; n],
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(objective, Sense::Minimize)
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(objective, Sense::Maximize)
    }

    /// Pure feasibility problem (zero objective).
    pub fn feasibility(num_vars: usize) -> Self {
        Self::minimize(vec![0.0; num_vars])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq.push((row, rhs));
        self
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le.push((row, rhs));
        self
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le.push((row.into_iter().map(|a| -a).collect(), -rhs));
        self
    }

    pub fn set_bound(&mut self, var: usize, bound: VarBound) -> &mut Self {
        self.bounds[var] = bound;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bound(var, VarBound::FREE)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::MalformedProgram(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::MalformedProgram("non-finite objective".into()));
        }
        for (kind, rows) in [("eq", &self.eq), ("le", &self.le)] {
            for (i, (row, rhs)) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(LpError::MalformedProgram(format!(
                        "{kind} row {i} has width {} (expected {n})",
                        row.len()
                    )));
                }
                if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
                    return Err(LpError::MalformedProgram(format!(
                        "{kind} row {i} has non-finite entries"
                    )));
                }
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_some_and(|l| !l.is_finite()) || b.upper.is_some_and(|u| !u.is_finite())
            {
                return Err(LpError::MalformedProgram(format!(
                    "bound of x{j} must be finite or absent"
                )));
            }
            if let (Some(l), Some(u)) = (b.lower, b.upper) {
                if l > u {
                    return Err(LpError::MalformedProgram(format!(
                        "x{j} has lower bound {l} above upper bound {u}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest absolute right-hand side, used to scale feasibility checks.
    fn rhs_scale(&self) -> f64 {
        let rows = self.eq.iter().chain(&self.le).map(|(_, b)| b.abs());
        let bounds = self
            .bounds
            .iter()
            .flat_map(|b| [b.lower, b.upper])
            .flatten()
            .map(f64::abs);
        rows.chain(bounds).fold(1.0, f64::max)
    }

    /// Plain-text dump of the program, one constraint per line.
    pub fn to_tableau_text(&self) -> String {
        let mut s = String::new();
        let fmt_row = |row: &[f64]| {
            row.iter()
                .map(|v| format!("{v:>12.6e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            s,
            "# {:?} vars={} eq={} le={}",
            self.sense,
            self.num_vars(),
            self.eq.len(),
            self.le.len()
        );
        let _ = writeln!(s, "obj   | {}", fmt_row(&self.objective));
        for (row, b) in &self.eq {
            let _ = writeln!(s, "eq    | {} | = {b:.6e}", fmt_row(row));
        }
        for (row, b) in &self.le {
            let _ = writeln!(s, "le    | {} | <= {b:.6e}", fmt_row(row));
        }
        let bounds: Vec<String> = self
            .bounds
            .iter()
            .map(|b| {
                let l = b.lower.map_or("-inf".to_string(), |v| format!("{v}"));
                let u = b.upper.map_or("inf".to_string(), |v| format!("{v}"));
                format!("[{l},{u}]")
            })
            .collect();
        let _ = writeln!(s, "bnd   | {}", bounds.join(" "));
        s
    }
}

/// Dual certificate for an optimal solution.
///
/// Signs follow the Lagrangian `objective·x − y·(A x − b)` of the program as
/// stated, so `le` multipliers are `≤ 0` for minimization and `≥ 0` for
/// maximization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub eq: Vec<f64>,
    pub le: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Dual objective value implied by the multipliers and bounds.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; NaN unless optimal.
    pub value: f64,
    /// Primal point; empty unless optimal.
    pub point: Vec<f64>,
    pub dual: Option<DualCertificate>,
    pub iterations: usize,
    /// True when the answer came from the exact rational re-solve.
    pub exact: bool,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn require_optimal(self) -> Result<Self, LpError> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(LpError::NotOptimal(self.status))
        }
    }

    /// `|primal − dual|`, or infinity without a certificate.
    pub fn duality_gap(&self) -> f64 {
        match &self.dual {
            Some(d) if self.is_optimal() => (self.value - d.value).abs(),
            _ => f64::INFINITY,
        }
    }

    /// Largest constraint or bound violation of `point`.
    pub fn max_violation(&self, prob: &LinearProgram) -> f64 {
        max_violation(prob, &self.point)
    }
}

pub fn max_violation(prob: &LinearProgram, x: &[f64]) -> f64 {
    let dot = |row: &[f64]| -> f64 { row.iter().zip(x).map(|(a, v)| a * v).sum() };
    let mut worst = 0.0f64;
    for (row, b) in &prob.eq {
        worst = worst.max((dot(row) - b).abs());
    }
    for (row, b) in &prob.le {
        worst = worst.max(dot(row) - b);
    }
    for (b, &v) in prob.bounds.iter().zip(x) {
        if let Some(l) = b.lower {
            worst = worst.max(l - v);
        }
        if let Some(u) = b.upper {
            worst = worst.max(v - u);
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpConfig {
    pub tol: f64,
    /// Re-solve in exact rational arithmetic when the floating-point verdict
    /// is within `10·tol` of the feasibility boundary.
    pub exact_adjudication: bool,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            tol: DEFAULT_TOL,
            exact_adjudication: false,
        }
    }
}

impl LpConfig {
    pub fn with_tol(tol: f64) -> Self {
        LpConfig {
            tol,
            ..Default::default()
        }
    }
}

/// Solves `prob` with default settings and tolerance `tol`.
pub fn solve_lp(prob: &LinearProgram, tol: f64) -> Result<LpSolution, LpError> {
    solve_with(prob, &LpConfig::with_tol(tol))
}

pub fn solve_with(prob: &LinearProgram, config: &LpConfig) -> Result<LpSolution, LpError> {
    prob.validate()?;
    if !(config.tol > 0.0) {
        return Err(LpError::MalformedProgram("tolerance must be positive".into()));
    }
    log::trace!("solving LP\n{}", prob.to_tableau_text());
    let feas_tol = config.tol * prob.rhs_scale();
    let sf = StandardForm::<f64>::build(prob);
    let raw = simplex::solve_standard(&sf, config.tol, feas_tol)?;
    let sol = finish(prob, &sf, &raw, false);
    if config.exact_adjudication {
        let disputed = |x: f64| x > feas_tol / 10.0 && x <= feas_tol * 10.0;
        let p1 = raw.phase1;
        let viol = if sol.is_optimal() { sol.max_violation(prob) } else { 0.0 };
        if disputed(p1) || disputed(viol) {
            log::debug!("residuals {p1:.3e}/{viol:.3e} are disputed; re-solving exactly");
            let mut exact = solve_exact_as_f64(prob)?;
            exact.iterations += raw.iterations;
            return Ok(exact);
        }
    }
    Ok(sol)
}

/// Exact solution of a program whose coefficients are read as exact rationals.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub status: LpStatus,
    pub value: Option<BigRational>,
    pub point: Vec<BigRational>,
}

pub fn solve_exact(prob: &LinearProgram) -> Result<ExactSolution, LpError> {
    prob.validate()?;
    let sf = StandardForm::<BigRational>::build(prob);
    let raw = simplex::solve_standard(&sf, <BigRational as LpScalar>::zero(), 0.0)?;
    let status = raw_status(raw.status);
    if status != LpStatus::Optimal {
        return Ok(ExactSolution {
            status,
            value: None,
            point: Vec::new(),
        });
    }
    let point: Vec<BigRational> = sf
        .var_map
        .iter()
        .zip(&prob.bounds)
        .map(|(map, b)| match *map {
            VarMap::Shifted { col } => {
                <BigRational as LpScalar>::from_f64(b.lower.unwrap()) + raw.z[col].clone()
            }
            VarMap::Reflected { col } => {
                <BigRational as LpScalar>::from_f64(b.upper.unwrap()) - raw.z[col].clone()
            }
            VarMap::Split { pos, neg } => raw.z[pos].clone() - raw.z[neg].clone(),
        })
        .collect();
    let value = prob
        .objective
        .iter()
        .zip(&point)
        .fold(<BigRational as LpScalar>::zero(), |acc, (c, x)| {
            acc + <BigRational as LpScalar>::from_f64(*c) * x.clone()
        });
    Ok(ExactSolution {
        status,
        value: Some(value),
        point,
    })
}

fn solve_exact_as_f64(prob: &LinearProgram) -> Result<LpSolution, LpError> {
    let sf = StandardForm::<BigRational>::build(prob);
    let raw = simplex::solve_standard(&sf, <BigRational as LpScalar>::zero(), 0.0)?;
    let sf64 = StandardForm::<f64>::build(prob);
    let raw64 = RawSolution {
        status: raw.status,
        z: raw.z.iter().map(LpScalar::to_f64).collect(),
        y: raw.y.iter().map(LpScalar::to_f64).collect(),
        objective: raw.objective.to_f64(),
        phase1: raw.phase1.to_f64(),
        iterations: raw.iterations,
    };
    Ok(finish(prob, &sf64, &raw64, true))
}

fn raw_status(s: RawStatus) -> LpStatus {
    match s {
        RawStatus::Optimal => LpStatus::Optimal,
        RawStatus::Infeasible => LpStatus::Infeasible,
        RawStatus::Unbounded => LpStatus::Unbounded,
    }
}

fn finish(
    prob: &LinearProgram,
    sf: &StandardForm<f64>,
    raw: &RawSolution<f64>,
    exact: bool,
) -> LpSolution {
    let status = raw_status(raw.status);
    if status != LpStatus::Optimal {
        return LpSolution {
            status,
            value: f64::NAN,
            point: Vec::new(),
            dual: None,
            iterations: raw.iterations,
            exact,
        };
    }
    let point: Vec<f64> = sf
        .var_map
        .iter()
        .zip(&prob.bounds)
        .map(|(map, b)| match *map {
            VarMap::Shifted { col } => b.lower.unwrap() + raw.z[col],
            VarMap::Reflected { col } => b.upper.unwrap() - raw.z[col],
            VarMap::Split { pos, neg } => raw.z[pos] - raw.z[neg],
        })
        .collect();
    let value: f64 = prob.objective.iter().zip(&point).map(|(c, x)| c * x).sum();

    let flip = if prob.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut y_eq = vec![0.0; prob.eq.len()];
    let mut y_le = vec![0.0; prob.le.len()];
    for (i, origin) in sf.row_origin.iter().enumerate() {
        let y = flip * f64::from(sf.row_sign[i]) * raw.y[i];
        match *origin {
            RowOrigin::Eq(k) => y_eq[k] = y,
            RowOrigin::Le(k) => y_le[k] = y,
            RowOrigin::Upper(_) => {}
        }
    }
    let mut reduced = prob.objective.clone();
    for (rows, ys) in [(&prob.eq, &y_eq), (&prob.le, &y_le)] {
        for ((row, _), &y) in rows.iter().zip(ys.iter()) {
            if y == 0.0 {
                continue;
            }
            for (d, a) in reduced.iter_mut().zip(row) {
                *d -= a * y;
            }
        }
    }
    let mut dual_value: f64 = prob.eq.iter().zip(&y_eq).map(|((_, b), y)| b * y).sum::<f64>()
        + prob.le.iter().zip(&y_le).map(|((_, b), y)| b * y).sum::<f64>();
    for (d, b) in reduced.iter().zip(&prob.bounds) {
        // min over [l,u] of d·x for minimization, max for maximization
        let toward_lower = (*d > 0.0) == (prob.sense == Sense::Minimize);
        let bound = if toward_lower { b.lower } else { b.upper };
        match bound {
            Some(v) => dual_value += d * v,
            None => {
                if d.abs() > 1e3 * DEFAULT_TOL {
                    dual_value = flip * f64::NEG_INFINITY;
                }
            }
        }
    }
    LpSolution {
        status,
        value,
        point,
        dual: Some(DualCertificate {
            eq: y_eq,
            le: y_le,
            reduced_costs: reduced,
            value: dual_value,
        }),
        iterations: raw.iterations,
        exact,
    }
}

/// Outcome of a feasibility question.
#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<Vec<f64>>,
}

/// Decides whether the constraint set of `prob` is nonempty. The objective
/// is ignored.
pub fn feasible(prob: &LinearProgram, config: &LpConfig) -> Result<Feasibility, LpError> {
    let mut p = prob.clone();
    p.objective = vec![0.0; prob.num_vars()];
    p.sense = Sense::Minimize;
    let sol = solve_with(&p, config)?;
    Ok(match sol.status {
        LpStatus::Optimal => Feasibility {
            feasible: true,
            witness: Some(sol.point),
        },
        _ => Feasibility {
            feasible: false,
            witness: None,
        },
    })
}
