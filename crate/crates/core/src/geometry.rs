//! Point asymmetry: weights, antipodes, boundariness, distortion and the
//! Minkowski measure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::info::{self, DualObjective};
use crate::linalg;
use crate::lp::{self, LinearProgram, VarBound};
use crate::model::{GpModel, StateVec, SymmetryOp};
use crate::{Error, Result};

/// Base points with boundariness at or below this are treated as boundary.
pub const INTERIOR_THRESHOLD: f64 = 1e-7;

/// Samples closer than this are merged.
const SAMPLE_MERGE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub base_point: StateVec,
    /// `m_{s*}`.
    pub value: f64,
    pub boundariness: f64,
    pub witness_vertex: usize,
    pub antipode: StateVec,
    /// `‖v − s*‖₁ / ‖v∘ − s*‖₁` at the witness.
    pub norm_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiResult {
    pub measure: f64,
    pub critical_state: StateVec,
    /// `m_{s*}` re-evaluated at the critical state.
    pub distortion_at_critical: f64,
    pub critical_samples: Vec<StateVec>,
}

/// `t_{s*,v} = max{t : s* − t·v ∈ (1 − t)·S}`.
pub fn weight_t(s_star: &StateVec, v: &StateVec, model: &GpModel) -> Result<f64> {
    model.require_state(s_star, "base point")?;
    model.require_state(v, "state")?;
    weight_unchecked(s_star, v, model)
}

fn weight_unchecked(s_star: &StateVec, v: &StateVec, model: &GpModel) -> Result<f64> {
    let k = model.num_vertices();
    let mut obj = vec![0.0; k + 1];
    obj[0] = 1.0;
    let mut prob = LinearProgram::maximize(obj);
    prob.bounds = vec![VarBound::NONNEG; k + 1];
    prob.bounds[0] = VarBound::FREE;
    for r in 0..=model.dim() {
        let mut row = Vec::with_capacity(k + 1);
        row.push(v.lifted()[r]);
        row.extend(model.vertices().iter().map(|u| u.lifted()[r]));
        prob.add_eq(row, s_star.lifted()[r]);
    }
    let sol = lp::solve_with(&prob, model.lp_config())?.require_optimal()?;
    Ok(sol.value.clamp(0.0, 1.0))
}

fn antipode_from_weight(s_star: &StateVec, v: &StateVec, t: f64) -> Result<StateVec> {
    if 1.0 - t <= 1e-12 {
        return Err(Error::BoundaryBasePoint(0.0));
    }
    let r = t / (1.0 - t);
    Ok(&(s_star * (1.0 + r)) - &(v * r))
}

/// Boundary point `v∘ = s* + (t/(1 − t))(s* − v)` on the ray from `v`
/// through `s*`.
pub fn antipodal(s_star: &StateVec, v: &StateVec, model: &GpModel) -> Result<StateVec> {
    let t = weight_t(s_star, v, model)?;
    antipode_from_weight(s_star, v, t)
}

fn vertex_weights(s_star: &StateVec, model: &GpModel) -> Result<Vec<f64>> {
    model
        .vertices()
        .iter()
        .map(|v| {
            if linalg::dist(v.lifted(), s_star.lifted()) <= 1e-12 {
                Ok(f64::INFINITY)
            } else {
                weight_unchecked(s_star, v, model)
            }
        })
        .collect()
}

fn argmin(xs: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        if x < best.1 {
            best = (i, x);
        }
    }
    best
}

/// `b_{s*}`: the smallest weight over the vertices.
pub fn boundariness(s_star: &StateVec, model: &GpModel) -> Result<f64> {
    model.require_state(s_star, "base point")?;
    let (_, b) = argmin(&vertex_weights(s_star, model)?);
    Ok(if b.is_finite() { b } else { 0.0 })
}

/// `m_{s*} = 1/b_{s*} − 1` with the vertex attaining it.
pub fn max_distortion(s_star: &StateVec, model: &GpModel) -> Result<DistortionReport> {
    model.require_state(s_star, "base point")?;
    let (i, b) = argmin(&vertex_weights(s_star, model)?);
    if b <= INTERIOR_THRESHOLD || !b.is_finite() {
        return Err(Error::BoundaryBasePoint(if b.is_finite() { b } else { 0.0 }));
    }
    let v = model.vertex(i);
    let antipode = antipode_from_weight(s_star, v, b)?;
    let near = model.base_norm(&(v - s_star))?;
    let far = model.base_norm(&(&antipode - s_star))?;
    Ok(DistortionReport {
        base_point: s_star.clone(),
        value: 1.0 / b - 1.0,
        boundariness: b,
        witness_vertex: i,
        antipode,
        norm_ratio: near / far,
    })
}

/// `m = n − 1`, with the critical state read from the dual optimizer of the
/// storable-information program over the vertices.
pub fn minkowski_measure(model: &GpModel) -> Result<MinkowskiResult> {
    let store = info::storable_info_dual(model.vertices(), model)?;
    let critical = store.dual_state;
    let check = max_distortion(&critical, model)?;
    Ok(MinkowskiResult {
        measure: store.value - 1.0,
        distortion_at_critical: check.value,
        critical_samples: vec![critical.clone()],
        critical_state: critical,
    })
}

/// `m_{s*} ≤ m + tol`.
pub fn is_critical(s_star: &StateVec, model: &GpModel, tol: f64) -> Result<bool> {
    let m = minkowski_measure(model)?.measure;
    is_critical_at(s_star, m, model, tol)
}

/// As [`is_critical`] with the measure already known.
pub fn is_critical_at(s_star: &StateVec, measure: f64, model: &GpModel, tol: f64) -> Result<bool> {
    match max_distortion(s_star, model) {
        Ok(r) => Ok(r.value <= measure + tol),
        Err(Error::BoundaryBasePoint(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Critical states found by minimizing coordinate and random directions over
/// the optimal face of the dual program, plus midpoints of those found.
pub fn critical_samples(model: &GpModel, n_samples: usize, seed: u64) -> Result<Vec<StateVec>> {
    let mink = minkowski_measure(model)?;
    let m = mink.measure;
    let n = m + 1.0;
    let cap = n + 1e-9 * n.max(1.0);
    let d = model.dim();

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for j in 0..d {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[j] = sign;
            dirs.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = linalg::norm2(&g).max(1e-12);
        dirs.push(linalg::scale(&g, 1.0 / norm));
    }

    let tol = 1e-7;
    let mut found = vec![mink.critical_state];
    let push = |found: &mut Vec<StateVec>, s: StateVec| {
        if !found
            .iter()
            .any(|t| linalg::dist(t.lifted(), s.lifted()) <= SAMPLE_MERGE)
        {
            found.push(s);
        }
    };
    for dir in dirs {
        let out = info::solve_dual(
            model.vertices(),
            model,
            &DualObjective::Direction { dir, cap },
        )?;
        let s = StateVec::from_lifted(out.xi).normalized();
        if is_critical_at(&s, m, model, tol)? {
            push(&mut found, s);
        }
    }
    let base = found.len();
    for i in 0..base {
        for j in i + 1..base {
            let mid = found[i].mix(0.5, &found[j]);
            if is_critical_at(&mid, m, model, tol)? {
                push(&mut found, mid);
            }
        }
    }
    Ok(found)
}

/// The model `{A x + b}`. Recorded symmetries are conjugated along.
pub fn affine_image(model: &GpModel, a: &[Vec<f64>], b: &[f64]) -> Result<GpModel> {
    let d = model.dim();
    if a.len() != d || a.iter().any(|r| r.len() != d) || b.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "affine map must be {d}x{d} with a length-{d} offset"
        )));
    }
    let inv = linalg::invert(a).ok_or(Error::SingularMap)?;
    let pts: Vec<Vec<f64>> = model
        .vertex_coords()
        .iter()
        .map(|x| linalg::add(&linalg::mat_vec(a, x), b))
        .collect();
    let symmetry = model.symmetry().map(|ops| {
        let am = linalg::to_matrix(a);
        let ai = linalg::to_matrix(&inv);
        ops.iter()
            .map(|op| {
                let conj = &am * linalg::to_matrix(&op.matrix) * &ai;
                let matrix = linalg::from_matrix(&conj);
                let shift = linalg::mat_vec(&matrix, b);
                let offset = linalg::sub(&linalg::add(&linalg::mat_vec(a, &op.offset), b), &shift);
                SymmetryOp {
                    perm: op.perm.clone(),
                    matrix,
                    offset,
                }
            })
            .collect()
    });
    // a map that distorts the recorded symmetries past tolerance drops them
    match GpModel::from_points(format!("{}-affine", model.name()), &pts, symmetry, model.tol()) {
        Err(Error::InvalidSymmetry(_)) => GpModel::from_points(
            format!("{}-affine", model.name()),
            &pts,
            None,
            model.tol(),
        ),
        other => other,
    }
    .map(|m| m.with_lp_config(*model.lp_config()))
}

/// Brute-force `min m_{s*}` over a regular grid of the bounding box, for
/// cross-checking the dual route in dimensions up to 3.
pub fn grid_minimum(model: &GpModel, steps: usize) -> Result<(f64, StateVec)> {
    let d = model.dim();
    if d > 3 {
        return Err(Error::InvalidParameter("grid search supports D <= 3".into()));
    }
    let coords = model.vertex_coords();
    let lo: Vec<f64> = (0..d)
        .map(|j| coords.iter().map(|c| c[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|j| coords.iter().map(|c| c[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut best = (f64::INFINITY, model.barycenter());
    let total = (steps + 1).pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let x: Vec<f64> = (0..d)
            .map(|j| {
                let s = rem % (steps + 1);
                rem /= steps + 1;
                lo[j] + (hi[j] - lo[j]) * s as f64 / steps as f64
            })
            .collect();
        let s = StateVec::from_affine(&x);
        if !model.in_cone(&s)?.member {
            continue;
        }
        match max_distortion(&s, model) {
            Ok(r) if r.value < best.0 => best = (r.value, s),
            Ok(_) | Err(Error::BoundaryBasePoint(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    fn triangle() -> GpModel {
        validate_model(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], 1e-9).unwrap()
    }

    fn square() -> GpModel {
        validate_model(
            &[
                vec![1.0, 1.0],
                vec![-1.0, 1.0],
                vec![-1.0, -1.0],
                vec![1.0, -1.0],
            ],
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn centroid_weight_is_a_third() {
        let m = triangle();
        let c = StateVec::from_affine(&[1.0 / 3.0, 1.0 / 3.0]);
        let t = weight_t(&c, &StateVec::from_affine(&[1.0, 0.0]), &m).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-9);
        let a = antipodal(&c, &StateVec::from_affine(&[1.0, 0.0]), &m).unwrap();
        assert!(linalg::max_abs_diff(&a.coords(), &[0.0, 0.5]) < 1e-9);
    }

    #[test]
    fn square_center() {
        let m = square();
        let o = StateVec::from_affine(&[0.0, 0.0]);
        let a = antipodal(&o, &StateVec::from_affine(&[1.0, 1.0]), &m).unwrap();
        assert!(linalg::max_abs_diff(&a.coords(), &[-1.0, -1.0]) < 1e-9);
        assert!((boundariness(&o, &m).unwrap() - 0.5).abs() < 1e-9);
        let r = max_distortion(&o, &m).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!((r.norm_ratio - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bit_distortion_is_three_at_a_quarter() {
        let m = validate_model(&[vec![0.0], vec![1.0]], 1e-9).unwrap();
        let r = max_distortion(&StateVec::from_affine(&[0.75]), &m).unwrap();
        assert!((r.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_base_point_is_boundary() {
        let m = triangle();
        let err = max_distortion(m.vertex(0), &m).unwrap_err();
        assert!(matches!(err, Error::BoundaryBasePoint(_)));
    }

    #[test]
    fn triangle_measure_is_two() {
        let m = triangle();
        let r = minkowski_measure(&m).unwrap();
        assert!((r.measure - 2.0).abs() < 1e-9);
        assert!((r.distortion_at_critical - 2.0).abs() < 1e-9);
        assert!(linalg::max_abs_diff(&r.critical_state.coords(), &[1.0 / 3.0, 1.0 / 3.0]) < 1e-9);
        let samples = critical_samples(&m, 4, 1).unwrap();
        assert_eq!(samples.len(), 1);
    }

    #[test]
    fn singular_map_is_rejected() {
        let m = square();
        let err = affine_image(&m, &[vec![1.0, 1.0], vec![1.0, 1.0]], &[0.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::SingularMap);
    }

    #[test]
    fn grid_agrees_on_triangle() {
        let m = triangle();
        let (g, _) = grid_minimum(&m, 30).unwrap();
        // the centroid is on the 1/30 grid only approximately
        assert!((2.0 - 1e-9..2.2).contains(&g));
    }
}
