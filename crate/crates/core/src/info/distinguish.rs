use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::storable::storable_info_dual;
use crate::lp::{self, LinearProgram};
use crate::model::{extreme_indices, EffectFunc, GpModel, Measurement, StateVec};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityResult {
    pub count: usize,
    pub states: Vec<StateVec>,
    /// Positions of `states` in the deduplicated input family.
    pub indices: Vec<usize>,
    /// `⟨s_x, e_{x'}⟩ = δ_{x,x'}`; effects sum to `u`.
    pub measurement: Measurement,
}

/// Effects `e_x ≥ 0` with `Σ e_x ≤ u` and `e_x(s_{x'}) = δ_{x,x'}`, if any.
pub fn is_distinguishable(states: &[StateVec], model: &GpModel) -> Result<Option<Vec<EffectFunc>>> {
    let n = model.dim() + 1;
    let l = states.len();
    let mut prob = LinearProgram::feasibility(n * l);
    for j in 0..n * l {
        prob.set_free(j);
    }
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
    for x in 0..l {
        for (y, s) in states.iter().enumerate() {
            let mut row = vec![0.0; n * l];
            row[x * n..(x + 1) * n].copy_from_slice(s.lifted());
            prob.add_eq(row, if x == y { 1.0 } else { 0.0 });
        }
    }
    let f = lp::feasible(&prob, model.lp_config())?;
    Ok(f.witness.map(|w| {
        (0..l)
            .map(|x| EffectFunc::new(w[x * n..(x + 1) * n].to_vec()))
            .collect()
    }))
}

fn result(
    model: &GpModel,
    family: &[StateVec],
    set: &[usize],
    mut effects: Vec<EffectFunc>,
) -> DistinguishabilityResult {
    // fold the failure effect into the first outcome
    let mut rest = EffectFunc::unit(model.dim());
    for e in &effects {
        rest = &rest - e;
    }
    effects[0] = &effects[0] + &rest;
    let mut measurement = Measurement::new(effects);
    measurement.labels = (1..=set.len()).map(|i| i.to_string()).collect();
    DistinguishabilityResult {
        count: set.len(),
        states: set.iter().map(|&i| family[i].clone()).collect(),
        indices: set.to_vec(),
        measurement,
    }
}

/// Largest perfectly distinguishable subfamily of `F`, searched among the
/// extreme points of its hull and capped by `floor(n(F))`. Ties go to the
/// lexicographically smallest index set.
pub fn distinguishable_number(
    family: &[StateVec],
    model: &GpModel,
) -> Result<DistinguishabilityResult> {
    let store = storable_info_dual(family, model)?;
    let family = store.encoding;
    let coords: Vec<Vec<f64>> = family.iter().map(StateVec::coords).collect();
    let cands = extreme_indices(&coords, model.lp_config())?;
    let cap = ((store.value + 1e-6).floor() as usize).min(cands.len());
    let pick = |set: &[usize]| -> Vec<StateVec> { set.iter().map(|&i| family[i].clone()).collect() };

    let singleton = || {
        // a loose tolerance can leave no extreme point at all
        let i = cands.first().copied().unwrap_or(0);
        let mut measurement = Measurement::new(vec![EffectFunc::unit(model.dim())]);
        measurement.labels = vec!["1".into()];
        DistinguishabilityResult {
            count: 1,
            states: vec![family[i].clone()],
            indices: vec![i],
            measurement,
        }
    };
    if cap < 2 {
        return Ok(singleton());
    }

    let mut level: Vec<(Vec<usize>, Vec<EffectFunc>)> = Vec::new();
    for (a, &i) in cands.iter().enumerate() {
        for &j in &cands[a + 1..] {
            if let Some(e) = is_distinguishable(&pick(&[i, j]), model)? {
                if cap == 2 {
                    return Ok(result(model, &family, &[i, j], e));
                }
                level.push((vec![i, j], e));
            }
        }
    }
    if level.is_empty() {
        return Ok(singleton());
    }
    let mut size = 2;
    loop {
        let known: HashSet<&[usize]> = level.iter().map(|(s, _)| s.as_slice()).collect();
        let mut next = Vec::new();
        for (set, _) in &level {
            let last = *set.last().unwrap();
            for &j in cands.iter().filter(|&&j| j > last) {
                let mut grown = set.clone();
                grown.push(j);
                let all_faces = (0..size).all(|drop| {
                    let face: Vec<usize> = grown
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != drop)
                        .map(|(_, &x)| x)
                        .collect();
                    known.contains(face.as_slice())
                });
                if !all_faces {
                    continue;
                }
                if let Some(e) = is_distinguishable(&pick(&grown), model)? {
                    if size + 1 == cap {
                        return Ok(result(model, &family, &grown, e));
                    }
                    next.push((grown, e));
                }
            }
        }
        if next.is_empty() {
            let (set, e) = level.swap_remove(0);
            return Ok(result(model, &family, &set, e));
        }
        level = next;
        size += 1;
    }
}
