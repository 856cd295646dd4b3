use serde::{Deserialize, Serialize};

use super::cone_scale;
use crate::linalg;
use crate::lp::{self, LinearProgram, VarBound};
use crate::model::{EffectFunc, GpModel, Measurement, StateVec, DEDUP_TOL};
use crate::{Error, Result};

/// Above this many `(member, vertex)` pairs the dual program is solved by
/// adding family members on demand.
const FULL_DUAL_PAIRS: usize = 2500;

/// Tableau cells allowed for a direct solve of the discrimination program.
const PRIMAL_CELL_CAP: usize = 4_000_000;

/// Where the primal side of a [`StorableInfoResult`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimalSource {
    /// Solved the discrimination program directly.
    Lp,
    /// Read off the multipliers of the dual program and re-evaluated.
    Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorableInfoResult {
    /// `n(F)` from the dual program.
    pub value: f64,
    pub dual_xi: StateVec,
    /// `ξ / ⟨ξ, u⟩`.
    pub dual_state: StateVec,
    pub primal_value: Option<f64>,
    /// Failure effect first, then one effect per encoded state.
    pub primal_measurement: Option<Measurement>,
    pub primal_source: Option<PrimalSource>,
    /// Deduplicated members of `F`, in input order.
    pub encoding: Vec<StateVec>,
    /// Effects read from the dual multipliers, one per encoded state.
    pub certificate_effects: Vec<EffectFunc>,
}

impl StorableInfoResult {
    pub fn gap(&self) -> Option<f64> {
        self.primal_value.map(|p| (p - self.value).abs())
    }

    pub fn failure_effect(&self) -> Option<&EffectFunc> {
        self.primal_measurement.as_ref().map(|m| &m.effects[0])
    }
}

pub(crate) enum DualObjective {
    Unit,
    /// Minimize `dir · affine(ξ)` subject to `⟨ξ, u⟩ ≤ cap`.
    Direction { dir: Vec<f64>, cap: f64 },
}

pub(crate) struct DualOutcome {
    pub xi: Vec<f64>,
    /// One effect per family member; zero for members never added.
    pub effects: Vec<Vec<f64>>,
}

fn dedup_states(family: &[StateVec]) -> Vec<StateVec> {
    let mut out: Vec<StateVec> = Vec::new();
    for s in family {
        if !out
            .iter()
            .any(|t| linalg::dist(t.lifted(), s.lifted()) <= DEDUP_TOL)
        {
            out.push(s.clone());
        }
    }
    out
}

fn check_family(family: &[StateVec], model: &GpModel) -> Result<Vec<StateVec>> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty state family".into()));
    }
    for (i, s) in family.iter().enumerate() {
        model.require_state(s, &format!("family member {i}"))?;
    }
    Ok(dedup_states(family))
}

fn restricted_dual(
    family: &[StateVec],
    active: &[usize],
    model: &GpModel,
    objective: &DualObjective,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = model.dim() + 1;
    let k = model.num_vertices();
    let nvars = n + active.len() * k;
    let mut obj = vec![0.0; nvars];
    match objective {
        DualObjective::Unit => obj[0] = 1.0,
        DualObjective::Direction { dir, .. } => obj[1..n].copy_from_slice(dir),
    }
    let mut prob = LinearProgram::minimize(obj);
    for j in 0..n {
        prob.set_free(j);
    }
    for (a, &m) in active.iter().enumerate() {
        for r in 0..n {
            let mut row = vec![0.0; nvars];
            row[r] = 1.0;
            for (i, v) in model.vertices().iter().enumerate() {
                row[n + a * k + i] = -v.lifted()[r];
            }
            prob.add_eq(row, family[m].lifted()[r]);
        }
    }
    if let DualObjective::Direction { cap, .. } = objective {
        let mut row = vec![0.0; nvars];
        row[0] = 1.0;
        prob.add_le(row, *cap);
    }
    let sol = lp::solve_with(&prob, model.lp_config())?.require_optimal()?;
    let dual = sol.dual.expect("optimal solutions carry a certificate");
    let effects = (0..active.len())
        .map(|a| dual.eq[a * n..(a + 1) * n].to_vec())
        .collect();
    Ok((sol.point[..n].to_vec(), effects))
}

fn initial_active(family: &[StateVec]) -> Vec<usize> {
    let n = family[0].lifted().len();
    let mut active = vec![0];
    for r in 1..n {
        let key = |i: &usize| family[*i].lifted()[r];
        let idx: Vec<usize> = (0..family.len()).collect();
        let lo = *idx.iter().min_by(|a, b| key(a).total_cmp(&key(b))).unwrap();
        let hi = *idx.iter().max_by(|a, b| key(a).total_cmp(&key(b))).unwrap();
        active.extend([lo, hi]);
    }
    active.sort_unstable();
    active.dedup();
    active
}

/// Solves `min ⟨ξ,u⟩ s.t. ξ − s ∈ cone ∀s ∈ F` (or a directional variant).
/// `family` must already be deduplicated and validated.
pub(crate) fn solve_dual(
    family: &[StateVec],
    model: &GpModel,
    objective: &DualObjective,
) -> Result<DualOutcome> {
    let k = model.num_vertices();
    if family.len() * k <= FULL_DUAL_PAIRS {
        let all: Vec<usize> = (0..family.len()).collect();
        let (xi, effects) = restricted_dual(family, &all, model, objective)?;
        return Ok(DualOutcome { xi, effects });
    }
    let batch = 2 * (model.dim() + 1);
    let slack = 10.0 * model.tol();
    let mut active = initial_active(family);
    loop {
        let (xi, effects) = restricted_dual(family, &active, model, objective)?;
        let xi_vec = StateVec::from_lifted(xi.clone());
        let mut violated: Vec<(f64, usize)> = Vec::new();
        for (i, s) in family.iter().enumerate() {
            if active.binary_search(&i).is_ok() {
                continue;
            }
            let excess = match cone_scale(model, &xi_vec, s)? {
                Some(c) => c - 1.0,
                None => f64::INFINITY,
            };
            if excess > slack * xi[0].max(1.0) {
                violated.push((excess, i));
            }
        }
        log::debug!(
            "storable dual: {} active members, {} violated",
            active.len(),
            violated.len()
        );
        if violated.is_empty() {
            let mut full = vec![vec![0.0; model.dim() + 1]; family.len()];
            for (a, &m) in active.iter().enumerate() {
                full[m] = effects[a].clone();
            }
            return Ok(DualOutcome { xi, effects: full });
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        active.extend(violated.iter().take(batch).map(|&(_, i)| i));
        active.sort_unstable();
    }
}

/// `n(F) = min{⟨ξ,u⟩ : ξ ≥ s for all s ∈ F}`, dual side only.
pub fn storable_info_dual(family: &[StateVec], model: &GpModel) -> Result<StorableInfoResult> {
    let encoding = check_family(family, model)?;
    let out = solve_dual(&encoding, model, &DualObjective::Unit)?;
    let value = out.xi[0];
    let xi = StateVec::from_lifted(out.xi);
    Ok(StorableInfoResult {
        value,
        dual_state: xi.normalized(),
        dual_xi: xi,
        primal_value: None,
        primal_measurement: None,
        primal_source: None,
        encoding,
        certificate_effects: out.effects.into_iter().map(EffectFunc::new).collect(),
    })
}

fn with_failure(model: &GpModel, effects: Vec<EffectFunc>) -> Measurement {
    let mut fail = EffectFunc::unit(model.dim());
    for e in &effects {
        fail = &fail - e;
    }
    let mut labels = vec!["fail".to_string()];
    labels.extend((1..=effects.len()).map(|i| i.to_string()));
    let mut all = vec![fail];
    all.extend(effects);
    Measurement {
        effects: all,
        labels,
    }
}

fn decode_value(measurement: &Measurement, encoding: &[StateVec]) -> f64 {
    measurement.effects[1..]
        .iter()
        .zip(encoding)
        .map(|(e, s)| e.eval(s))
        .sum()
}

/// `max Σ_x w_x e_x(s_x)` over effects `e_x ≥ 0` with `Σ e_x ≤ u`.
pub(crate) fn weighted_primal(
    states: &[StateVec],
    weights: &[f64],
    model: &GpModel,
) -> Result<(f64, Vec<EffectFunc>)> {
    let n = model.dim() + 1;
    let l = states.len();
    let mut obj = Vec::with_capacity(n * l);
    for (s, w) in states.iter().zip(weights) {
        obj.extend(s.lifted().iter().map(|x| w * x));
    }
    let mut prob = LinearProgram::maximize(obj);
    prob.bounds = vec![VarBound::FREE; n * l];
    for x in 0..l {
        for v in model.vertices() {
            let mut row = vec![0.0; n * l];
            for r in 0..n {
                row[x * n + r] = -v.lifted()[r];
            }
            prob.add_le(row, 0.0);
        }
    }
    for v in model.vertices() {
        let row: Vec<f64> = (0..l).flat_map(|_| v.lifted().iter().copied()).collect();
        prob.add_le(row, 1.0);
    }
    let sol = lp::solve_with(&prob, model.lp_config())?.require_optimal()?;
    let effects = (0..l)
        .map(|x| EffectFunc::new(sol.point[x * n..(x + 1) * n].to_vec()))
        .collect();
    Ok((sol.value, effects))
}

/// `n(F) = max Σ_x e_x(s_x)` over effects with `Σ e_x ≤ u`, solved as one
/// program. The dual side of the result is left at the primal value.
pub fn storable_info_primal(family: &[StateVec], model: &GpModel) -> Result<StorableInfoResult> {
    let encoding = check_family(family, model)?;
    let n = model.dim() + 1;
    let k = model.num_vertices();
    let l = encoding.len();
    let rows = k * (l + 1);
    let cells = rows * (rows + 2 * n * l);
    if cells > PRIMAL_CELL_CAP {
        return Err(Error::TooLarge(format!(
            "discrimination program with {l} effects over {k} vertices"
        )));
    }
    let ones = vec![1.0; l];
    let (value, effects) = weighted_primal(&encoding, &ones, model)?;
    let measurement = with_failure(model, effects);
    let xi = StateVec::from_lifted(vec![f64::NAN; n]);
    Ok(StorableInfoResult {
        value,
        dual_state: xi.clone(),
        dual_xi: xi,
        primal_value: Some(value),
        primal_measurement: Some(measurement),
        primal_source: Some(PrimalSource::Lp),
        encoding,
        certificate_effects: Vec::new(),
    })
}

/// Both sides of the storable-information pair. The primal program is
/// solved directly when it fits under a size cap; otherwise the primal
/// measurement is the one certified by the dual multipliers, re-evaluated
/// on the encoding.
pub fn storable_info(family: &[StateVec], model: &GpModel) -> Result<StorableInfoResult> {
    let mut res = storable_info_dual(family, model)?;
    match storable_info_primal(&res.encoding, model) {
        Ok(p) => {
            res.primal_value = p.primal_value;
            res.primal_measurement = p.primal_measurement;
            res.primal_source = Some(PrimalSource::Lp);
        }
        Err(Error::TooLarge(_)) => {
            let m = with_failure(model, res.certificate_effects.clone());
            res.primal_value = Some(decode_value(&m, &res.encoding));
            res.primal_measurement = Some(m);
            res.primal_source = Some(PrimalSource::Certificate);
        }
        Err(e) => return Err(e),
    }
    Ok(res)
}
