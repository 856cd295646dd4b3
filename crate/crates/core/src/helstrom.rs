//! Weighted storable information, optimal discrimination and Helstrom
//! families.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::info::{self, DualObjective};
use crate::linalg;
use crate::lp::LpError;
use crate::model::{EffectFunc, GpModel, Measurement, ModelFile, StateVec};
use crate::{zoo, Error, Result};

/// Tolerance for `p − p_i` below which a conjugate state is unconstrained.
pub const DEGENERATE_GAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub states: Vec<StateVec>,
    pub weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<StateVec>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidEnsemble("no states".into()));
        }
        if states.len() != weights.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidEnsemble(format!("weight {w} is not a finite nonnegative number")));
        }
        Ok(Ensemble { states, weights })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_probability(&self) -> bool {
        (self.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }

    fn check(&self, model: &GpModel) -> Result<()> {
        for (i, s) in self.states.iter().enumerate() {
            model.require_state(s, &format!("ensemble state {i}"))?;
        }
        Ok(())
    }

    fn require_probability(&self) -> Result<()> {
        if !self.is_probability() {
            return Err(Error::InvalidEnsemble(format!(
                "weights sum to {}, not 1",
                self.weights.iter().sum::<f64>()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedN {
    pub value: f64,
    /// Cone element dominating every `q_s·s`.
    pub xi: StateVec,
}

/// `n(F, q) = min{⟨ξ,u⟩ : ξ ≥ q_s·s for all s}`.
pub fn weighted_n(ensemble: &Ensemble, model: &GpModel) -> Result<WeightedN> {
    ensemble.check(model)?;
    let scaled: Vec<StateVec> = ensemble
        .states
        .iter()
        .zip(&ensemble.weights)
        .map(|(s, &q)| s.scaled(q))
        .collect();
    let out = info::solve_dual(&scaled, model, &DualObjective::Unit)?;
    Ok(WeightedN {
        value: out.xi[0],
        xi: StateVec::from_lifted(out.xi),
    })
}

/// Optimal success probability `max Σ p_i e_i(s_i)` and a measurement
/// attaining it (failure weight folded into the first outcome).
pub fn success_prob(ensemble: &Ensemble, model: &GpModel) -> Result<(f64, Measurement)> {
    ensemble.check(model)?;
    ensemble.require_probability()?;
    let (value, mut effects) = info::weighted_primal(&ensemble.states, &ensemble.weights, model)?;
    let mut rest = EffectFunc::unit(model.dim());
    for e in &effects {
        rest = &rest - e;
    }
    effects[0] = &effects[0] + &rest;
    Ok((value, Measurement::new(effects)))
}

/// Equivalent ensembles `{p̃_i, s_i; 1 − p̃_i, t_i}` with common mixture
/// `s_0` and ratio `p = p_i / p̃_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelstromFamily {
    pub ratio: f64,
    pub common_state: StateVec,
    pub conjugates: Vec<StateVec>,
    pub tilde_weights: Vec<f64>,
    /// `p − p_i` was at most [`DEGENERATE_GAP`]; `t_i` is set to `s_0`.
    pub degenerate: Vec<bool>,
}

/// Builds the family from any `ξ` dominating every `p_i·s_i`.
pub fn from_dominating(xi: &StateVec, ensemble: &Ensemble, model: &GpModel) -> Result<HelstromFamily> {
    ensemble.require_probability()?;
    model.check_dim(xi.lifted().len(), "dominating vector")?;
    let p = xi.unit_pairing();
    let s0 = xi.normalized();
    let mut conjugates = Vec::with_capacity(ensemble.len());
    let mut degenerate = Vec::with_capacity(ensemble.len());
    for (i, (s, &pi)) in ensemble.states.iter().zip(&ensemble.weights).enumerate() {
        let gap = p - pi;
        if gap < -DEGENERATE_GAP {
            return Err(Error::DegenerateConjugate { index: i, gap });
        }
        if gap <= DEGENERATE_GAP {
            conjugates.push(s0.clone());
            degenerate.push(true);
        } else {
            conjugates.push((xi - &s.scaled(pi)).scaled(1.0 / gap));
            degenerate.push(false);
        }
    }
    Ok(HelstromFamily {
        ratio: p,
        common_state: s0,
        conjugates,
        tilde_weights: ensemble.weights.iter().map(|pi| (pi / p).min(1.0)).collect(),
        degenerate,
    })
}

/// The family with the smallest ratio, built from the optimizer of
/// [`weighted_n`]. Its conditions are checked before returning.
pub fn helstrom_family(ensemble: &Ensemble, model: &GpModel) -> Result<HelstromFamily> {
    ensemble.require_probability()?;
    let w = weighted_n(ensemble, model)?;
    let fam = from_dominating(&w.xi, ensemble, model)?;
    let (ok_ii, err_ii) = condition_ii(&fam, ensemble);
    let inside = conjugates_inside(&fam, model)?;
    if !ok_ii || !inside {
        return Err(Error::Lp(LpError::NumericalFailure(format!(
            "constructed family fails its conditions (mixture error {err_ii:.3e}, conjugates inside: {inside})"
        ))));
    }
    Ok(fam)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMode {
    /// The ratio must equal the optimal success probability.
    Strict,
    /// Only `P_S ≤ p` is required.
    Weak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub mode: FamilyMode,
    pub ratio_constant: bool,
    pub max_ratio_error: f64,
    pub mixture_identity: bool,
    pub max_mixture_error: f64,
    pub conjugates_in_state_space: bool,
    pub tilde_weights_in_unit_interval: bool,
    pub success_prob: f64,
    pub ratio_vs_success: bool,
    pub passed: bool,
}

fn condition_ii(fam: &HelstromFamily, ensemble: &Ensemble) -> (bool, f64) {
    let mut worst = 0.0f64;
    for ((s, t), &pt) in ensemble.states.iter().zip(&fam.conjugates).zip(&fam.tilde_weights) {
        let mix = s.mix(pt, t);
        worst = worst.max(linalg::max_abs_diff(mix.lifted(), fam.common_state.lifted()));
    }
    (worst <= 1e-9, worst)
}

fn conjugates_inside(fam: &HelstromFamily, model: &GpModel) -> Result<bool> {
    for t in &fam.conjugates {
        if t.lifted().len() != model.dim() + 1
            || !t.is_normalized(1e-9)
            || !model.in_cone(t)?.member
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks conditions (i) and (ii), membership of the conjugates and the
/// ratio against the optimal success probability.
pub fn verify_family(
    fam: &HelstromFamily,
    ensemble: &Ensemble,
    model: &GpModel,
    mode: FamilyMode,
) -> Result<FamilyVerdict> {
    let (ps, _) = success_prob(ensemble, model)?;
    let shapes_ok = fam.conjugates.len() == ensemble.len() && fam.tilde_weights.len() == ensemble.len();
    let mut ratio_err = 0.0f64;
    for (&pi, &pt) in ensemble.weights.iter().zip(&fam.tilde_weights) {
        let err = if pt > 0.0 {
            (pi / pt - fam.ratio).abs()
        } else {
            pi
        };
        ratio_err = ratio_err.max(err);
    }
    let ratio_constant = shapes_ok && ratio_err <= 1e-9 * fam.ratio.max(1.0);
    let (mixture_identity, mix_err) = if shapes_ok {
        condition_ii(fam, ensemble)
    } else {
        (false, f64::INFINITY)
    };
    let inside = shapes_ok && conjugates_inside(fam, model)?;
    let unit = fam.tilde_weights.iter().all(|&w| (0.0..=1.0).contains(&w));
    let ratio_vs_success = match mode {
        FamilyMode::Strict => (fam.ratio - ps).abs() <= 1e-7,
        FamilyMode::Weak => ps <= fam.ratio + 1e-9,
    };
    Ok(FamilyVerdict {
        mode,
        ratio_constant,
        max_ratio_error: ratio_err,
        mixture_identity,
        max_mixture_error: mix_err,
        conjugates_in_state_space: inside,
        tilde_weights_in_unit_interval: unit,
        success_prob: ps,
        ratio_vs_success,
        passed: ratio_constant && mixture_identity && inside && unit && ratio_vs_success,
    })
}

/// Model reference in an ensemble file: a zoo name, a path, or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Inline(ModelFile),
}

/// A state given by vertex index or by affine coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Vertex(usize),
    Coords(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub model: ModelRef,
    pub states: Vec<StateRef>,
    pub weights: Vec<f64>,
}

impl EnsembleFile {
    /// Resolves the model (files relative to `base_dir` first, then zoo
    /// names) and the states.
    pub fn resolve(&self, base_dir: &Path, tol: f64) -> Result<(GpModel, Ensemble)> {
        let model = match &self.model {
            ModelRef::Inline(f) => GpModel::from_file(f, tol)?,
            ModelRef::Name(name) => {
                let path = base_dir.join(name);
                if path.is_file() {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Error::InvalidParameter(format!("{}: {e}", path.display()))
                    })?;
                    GpModel::from_json(&text, tol)?
                } else {
                    zoo::from_name(name)?
                }
            }
        };
        let states = self
            .states
            .iter()
            .map(|r| match r {
                StateRef::Vertex(i) => model.vertices().get(*i).cloned().ok_or_else(|| {
                    Error::InvalidEnsemble(format!("vertex index {i} out of range"))
                }),
                StateRef::Coords(x) => Ok(StateVec::from_affine(x)),
            })
            .collect::<Result<Vec<_>>>()?;
        let ens = Ensemble::new(states, self.weights.clone())?;
        Ok((model, ens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    fn bit() -> GpModel {
        validate_model(&[vec![0.0], vec![1.0]], 1e-9).unwrap()
    }

    // affine coordinate of the bit = probability of the second outcome
    fn classical(p1: f64) -> StateVec {
        StateVec::from_affine(&[1.0 - p1])
    }

    #[test]
    fn distinguishable_pair() {
        let m = bit();
        let e = Ensemble::new(vec![classical(1.0), classical(0.0)], vec![0.5, 0.5]).unwrap();
        let w = weighted_n(&e, &m).unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
        let fam = helstrom_family(&e, &m).unwrap();
        assert!(linalg::max_abs_diff(fam.conjugates[0].lifted(), classical(0.0).lifted()) < 1e-12);
        assert!(linalg::max_abs_diff(fam.conjugates[1].lifted(), classical(1.0).lifted()) < 1e-12);
        let v = verify_family(&fam, &e, &m, FamilyMode::Strict).unwrap();
        assert!(v.passed, "{v:?}");
    }

    #[test]
    fn three_quarters() {
        let m = bit();
        let e = Ensemble::new(vec![classical(1.0), classical(0.5)], vec![0.5, 0.5]).unwrap();
        let (ps, meas) = success_prob(&e, &m).unwrap();
        assert!((ps - 0.75).abs() < 1e-12);
        m.validate_measurement(&meas).unwrap();
        let fam = helstrom_family(&e, &m).unwrap();
        assert!((fam.ratio - 0.75).abs() < 1e-12);
        assert!(linalg::max_abs_diff(fam.conjugates[0].lifted(), classical(0.0).lifted()) < 1e-9);
        assert!(linalg::max_abs_diff(fam.conjugates[1].lifted(), classical(1.0).lifted()) < 1e-9);
    }

    #[test]
    fn single_state_is_degenerate() {
        let m = bit();
        let e = Ensemble::new(vec![classical(0.3)], vec![1.0]).unwrap();
        let fam = helstrom_family(&e, &m).unwrap();
        assert_eq!(fam.degenerate, vec![true]);
        assert!((fam.ratio - 1.0).abs() < 1e-12);
        assert!(verify_family(&fam, &e, &m, FamilyMode::Strict).unwrap().passed);
    }

    #[test]
    fn weighted_single_state() {
        let m = bit();
        let e = Ensemble::new(vec![classical(0.3)], vec![0.7]).unwrap();
        assert!((weighted_n(&e, &m).unwrap().value - 0.7).abs() < 1e-12);
        assert!(matches!(helstrom_family(&e, &m), Err(Error::InvalidEnsemble(_))));
    }

    #[test]
    fn inflated_family_is_weak_only() {
        let m = bit();
        let e = Ensemble::new(vec![classical(1.0), classical(0.5)], vec![0.5, 0.5]).unwrap();
        let w = weighted_n(&e, &m).unwrap();
        let fam = from_dominating(&w.xi.scaled(1.1), &e, &m).unwrap();
        assert!(verify_family(&fam, &e, &m, FamilyMode::Weak).unwrap().passed);
        assert!(!verify_family(&fam, &e, &m, FamilyMode::Strict).unwrap().passed);
    }

    #[test]
    fn conjugate_outside_fails() {
        let m = bit();
        let e = Ensemble::new(vec![classical(1.0), classical(0.0)], vec![0.5, 0.5]).unwrap();
        let mut fam = helstrom_family(&e, &m).unwrap();
        fam.conjugates[0] = StateVec::from_affine(&[1.5]);
        let v = verify_family(&fam, &e, &m, FamilyMode::Weak).unwrap();
        assert!(!v.conjugates_in_state_space);
        assert!(!v.passed);
    }

    #[test]
    fn ensemble_file_resolves_zoo_names() {
        let text = r#"{"model": "pentagon", "states": [0, [0.0, 0.0]], "weights": [0.5, 0.5]}"#;
        let f: EnsembleFile = serde_json::from_str(text).unwrap();
        let (m, e) = f.resolve(Path::new("."), 1e-9).unwrap();
        assert_eq!(m.num_vertices(), 5);
        assert_eq!(e.len(), 2);
    }
}
