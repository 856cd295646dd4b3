//! Polytopic state spaces in lifted coordinates.
//!
//! A state with affine coordinates `x ∈ R^D` is stored as the lifted vector
//! `(1, x) ∈ R^{D+1}`. The unit effect `u` is the functional `(1, 0, …, 0)`,
//! so coordinate 0 of any lifted vector is its unit pairing. The positive
//! cone of states is the conic hull of the lifted vertices, and a functional
//! is positive iff it is nonnegative at every vertex. Every order relation is
//! therefore a linear program over the vertex list.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::lp::{self, LinearProgram, LpConfig, LpStatus, VarBound};
use crate::{Error, Result};

/// Points closer than this (Euclidean) are identified.
pub const DEDUP_TOL: f64 = 1e-12;

const RANDOM_MODEL_RETRIES: usize = 64;

/// Element of the state cone: `(unit pairing, affine part)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec {
    lifted: Vec<f64>,
}

impl StateVec {
    /// Normalized state with the given affine coordinates.
    pub fn from_affine(coords: &[f64]) -> Self {
        let mut lifted = Vec::with_capacity(coords.len() + 1);
        lifted.push(1.0);
        lifted.extend_from_slice(coords);
        StateVec { lifted }
    }

    pub fn from_lifted(lifted: Vec<f64>) -> Self {
        StateVec { lifted }
    }

    pub fn zero(dim: usize) -> Self {
        StateVec {
            lifted: vec![0.0; dim + 1],
        }
    }

    pub fn lifted(&self) -> &[f64] {
        &self.lifted
    }

    pub fn into_lifted(self) -> Vec<f64> {
        self.lifted
    }

    /// `⟨v, u⟩`.
    pub fn unit_pairing(&self) -> f64 {
        self.lifted[0]
    }

    /// Dimension `D` of the affine part.
    pub fn dim(&self) -> usize {
        self.lifted.len() - 1
    }

    /// Affine coordinates of `v / ⟨v, u⟩`.
    pub fn coords(&self) -> Vec<f64> {
        let w = self.lifted[0];
        self.lifted[1..].iter().map(|x| x / w).collect()
    }

    pub fn normalized(&self) -> StateVec {
        self.scaled(1.0 / self.lifted[0])
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.lifted[0] - 1.0).abs() <= tol
    }

    pub fn scaled(&self, s: f64) -> StateVec {
        StateVec {
            lifted: linalg::scale(&self.lifted, s),
        }
    }

    /// `p·self + (1 − p)·other`.
    pub fn mix(&self, p: f64, other: &StateVec) -> StateVec {
        StateVec {
            lifted: self
                .lifted
                .iter()
                .zip(&other.lifted)
                .map(|(a, b)| p * a + (1.0 - p) * b)
                .collect(),
        }
    }

    /// Convex (or conic) combination `Σ w_i s_i`.
    pub fn combination(states: &[StateVec], weights: &[f64]) -> StateVec {
        let dim = states[0].dim();
        let mut out = vec![0.0; dim + 1];
        for (s, &w) in states.iter().zip(weights) {
            for (o, x) in out.iter_mut().zip(&s.lifted) {
                *o += w * x;
            }
        }
        StateVec { lifted: out }
    }
}

impl Add for &StateVec {
    type Output = StateVec;
    fn add(self, rhs: &StateVec) -> StateVec {
        StateVec {
            lifted: linalg::add(&self.lifted, &rhs.lifted),
        }
    }
}

impl Sub for &StateVec {
    type Output = StateVec;
    fn sub(self, rhs: &StateVec) -> StateVec {
        StateVec {
            lifted: linalg::sub(&self.lifted, &rhs.lifted),
        }
    }
}

impl Mul<f64> for &StateVec {
    type Output = StateVec;
    fn mul(self, rhs: f64) -> StateVec {
        self.scaled(rhs)
    }
}

/// Affine functional on states, acting by the dot product with the lifted
/// vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EffectFunc {
    coeffs: Vec<f64>,
}

impl EffectFunc {
    pub fn new(coeffs: Vec<f64>) -> Self {
        EffectFunc { coeffs }
    }

    /// The unit effect `u`.
    pub fn unit(dim: usize) -> Self {
        let mut coeffs = vec![0.0; dim + 1];
        coeffs[0] = 1.0;
        EffectFunc { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        EffectFunc {
            coeffs: vec![0.0; dim + 1],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, v: &StateVec) -> f64 {
        linalg::dot(&self.coeffs, v.lifted())
    }

    /// `u − self`.
    pub fn complement(&self) -> EffectFunc {
        let mut coeffs: Vec<f64> = self.coeffs.iter().map(|c| -c).collect();
        coeffs[0] += 1.0;
        EffectFunc { coeffs }
    }

    pub fn scaled(&self, s: f64) -> EffectFunc {
        EffectFunc {
            coeffs: linalg::scale(&self.coeffs, s),
        }
    }
}

impl Add for &EffectFunc {
    type Output = EffectFunc;
    fn add(self, rhs: &EffectFunc) -> EffectFunc {
        EffectFunc::new(linalg::add(&self.coeffs, &rhs.coeffs))
    }
}

impl Sub for &EffectFunc {
    type Output = EffectFunc;
    fn sub(self, rhs: &EffectFunc) -> EffectFunc {
        EffectFunc::new(linalg::sub(&self.coeffs, &rhs.coeffs))
    }
}

/// Finite tuple of effects summing to `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub effects: Vec<EffectFunc>,
    pub labels: Vec<String>,
}

impl Measurement {
    pub fn new(effects: Vec<EffectFunc>) -> Self {
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Measurement { effects, labels }
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// Affine bijection of the state space, recorded with the vertex
/// permutation it induces: `matrix · v_i + offset = v_{perm[i]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryOp {
    pub perm: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl SymmetryOp {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        linalg::add(&linalg::mat_vec(&self.matrix, x), &self.offset)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SymmetryOp) -> SymmetryOp {
        let perm = other.perm.iter().map(|&j| self.perm[j]).collect();
        let a = linalg::to_matrix(&self.matrix);
        let b = linalg::to_matrix(&other.matrix);
        let matrix = linalg::from_matrix(&(&a * &b));
        let offset = self.apply(&other.offset);
        SymmetryOp {
            perm,
            matrix,
            offset,
        }
    }

    pub fn identity(dim: usize, k: usize) -> SymmetryOp {
        SymmetryOp {
            perm: (0..k).collect(),
            matrix: (0..dim)
                .map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect())
                .collect(),
            offset: vec![0.0; dim],
        }
    }

    /// Affine map of `R^D` realizing `vertices[i] ↦ vertices[perm[i]]`,
    /// fitted in lifted coordinates.
    pub fn from_vertex_perm(vertices: &[Vec<f64>], perm: Vec<usize>) -> Result<SymmetryOp> {
        let src: Vec<Vec<f64>> = vertices
            .iter()
            .map(|v| StateVec::from_affine(v).into_lifted())
            .collect();
        let dst: Vec<Vec<f64>> = perm.iter().map(|&j| src[j].clone()).collect();
        let lifted = linalg::fit_linear_map(&src, &dst)
            .ok_or_else(|| Error::InvalidSymmetry("vertices do not span the space".into()))?;
        let dim = vertices[0].len();
        Ok(SymmetryOp {
            perm,
            matrix: (1..=dim).map(|i| lifted[i][1..].to_vec()).collect(),
            offset: (1..=dim).map(|i| lifted[i][0]).collect(),
        })
    }
}

/// Membership in the state cone with the conic weights found.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeMembership {
    pub member: bool,
    pub weights: Vec<f64>,
}

/// A general probabilistic model whose state space is a polytope.
#[derive(Clone, Debug)]
pub struct GpModel {
    name: String,
    dim: usize,
    vertices: Vec<StateVec>,
    symmetry: Vec<SymmetryOp>,
    lp: LpConfig,
}

/// On-disk model description: affine coordinates, canonical vertex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Vec<SymmetryOp>>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn clean_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Builds a model from raw affine points with name `"model"`.
pub fn validate_model(points: &[Vec<f64>], tol: f64) -> Result<GpModel> {
    GpModel::from_points("model", points, None, tol)
}

/// Removes every point that is a convex combination of the others (after
/// merging points within [`DEDUP_TOL`]). Order of survivors is preserved.
pub fn extreme_points(points: &[Vec<f64>], tol: f64) -> Result<Vec<Vec<f64>>> {
    let distinct = dedup(points);
    let keep = extreme_indices(&distinct, &LpConfig::with_tol(tol))?;
    Ok(keep.into_iter().map(|i| distinct[i].clone()).collect())
}

fn dedup(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| linalg::dist(p, q) <= DEDUP_TOL) {
            out.push(p.clone());
        }
    }
    out
}

pub(crate) fn extreme_indices(points: &[Vec<f64>], cfg: &LpConfig) -> Result<Vec<usize>> {
    let n = points.len();
    if n <= 2 {
        return Ok((0..n).collect());
    }
    let dim = points[0].len();
    let mut keep = Vec::new();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut prob = LinearProgram::feasibility(others.len());
        prob.add_eq(vec![1.0; others.len()], 1.0);
        for c in 0..dim {
            prob.add_eq(others.iter().map(|&j| points[j][c]).collect(), points[i][c]);
        }
        if !lp::feasible(&prob, cfg)?.feasible {
            keep.push(i);
        }
    }
    Ok(keep)
}

impl GpModel {
    /// Validates `points`, reduces them to extreme points, re-charts onto
    /// the affine hull when it is lower-dimensional, and sorts vertices
    /// lexicographically. `symmetry` permutations index into `points`.
    pub fn from_points(
        name: impl Into<String>,
        points: &[Vec<f64>],
        symmetry: Option<Vec<SymmetryOp>>,
        tol: f64,
    ) -> Result<GpModel> {
        let name = name.into();
        let Some(first) = points.first() else {
            return Err(Error::DegenerateModel("no points".into()));
        };
        let ambient = first.len();
        if ambient == 0 {
            return Err(Error::DegenerateModel("zero-dimensional coordinates".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has {} coordinates, expected {ambient}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::DegenerateModel(format!("point {i} is not finite")));
            }
        }
        let cfg = LpConfig::with_tol(tol);

        // Symmetry ops are validated against the raw points first.
        if let Some(ops) = &symmetry {
            for (g, op) in ops.iter().enumerate() {
                check_symmetry(op, points, g)?;
            }
        }

        let mut index: Vec<usize> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            if !index.iter().any(|&j| linalg::dist(p, &points[j]) <= DEDUP_TOL) {
                index.push(i);
            }
        }
        if index.len() < 2 {
            return Err(Error::DegenerateModel(
                "state space is a single point".into(),
            ));
        }
        let mut pts: Vec<Vec<f64>> = index.iter().map(|&i| points[i].clone()).collect();

        let basis = linalg::affine_basis(&pts, 1e-9);
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::DegenerateModel(
                "state space is a single point".into(),
            ));
        }
        if dim < ambient {
            if symmetry.is_some() {
                return Err(Error::InvalidSymmetry(
                    "symmetry records require full-dimensional coordinates".into(),
                ));
            }
            let origin = pts[0].clone();
            pts = pts
                .iter()
                .map(|p| {
                    let d = linalg::sub(p, &origin);
                    basis.iter().map(|b| linalg::dot(b, &d)).collect()
                })
                .collect();
        }

        let keep = extreme_indices(&pts, &cfg)?;
        let survivors: Vec<usize> = keep.iter().map(|&i| index[i]).collect();
        let pts: Vec<Vec<f64>> = keep.iter().map(|&i| pts[i].clone()).collect();

        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&pts[a], &pts[b]));
        let sorted: Vec<Vec<f64>> = order
            .iter()
            .map(|&i| pts[i].iter().copied().map(clean_zero).collect())
            .collect();

        // raw point index -> canonical vertex index
        let mut canonical = vec![usize::MAX; points.len()];
        for (new, &old) in order.iter().enumerate() {
            canonical[survivors[old]] = new;
        }
        let symmetry = match symmetry {
            None => Vec::new(),
            Some(ops) => ops
                .into_iter()
                .map(|op| {
                    let mut perm = vec![0; sorted.len()];
                    for (new, &old) in order.iter().enumerate() {
                        let image = canonical[op.perm[survivors[old]]];
                        if image == usize::MAX {
                            return Err(Error::InvalidSymmetry(
                                "symmetry maps a vertex to a non-extreme point".into(),
                            ));
                        }
                        perm[new] = image;
                    }
                    Ok(SymmetryOp { perm, ..op })
                })
                .collect::<Result<Vec<_>>>()?,
        };

        Ok(GpModel {
            name,
            dim,
            vertices: sorted.iter().map(|p| StateVec::from_affine(p)).collect(),
            symmetry,
            lp: cfg,
        })
    }

    pub fn from_file(file: &ModelFile, tol: f64) -> Result<GpModel> {
        if let Some(v) = file.vertices.iter().find(|v| v.len() != file.dim) {
            return Err(Error::DimensionMismatch(format!(
                "vertex with {} coordinates in a dim-{} model",
                v.len(),
                file.dim
            )));
        }
        GpModel::from_points(file.name.clone(), &file.vertices, file.symmetry.clone(), tol)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            name: self.name.clone(),
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.lifted()[1..].iter().copied().map(clean_zero).collect())
                .collect(),
            symmetry: if self.symmetry.is_empty() {
                None
            } else {
                Some(self.symmetry.clone())
            },
        }
    }

    pub fn from_json(text: &str, tol: f64) -> Result<GpModel> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("model JSON: {e}")))?;
        GpModel::from_file(&file, tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `D`, the dimension of the state space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[StateVec] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &StateVec {
        &self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_coords(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(StateVec::coords).collect()
    }

    pub fn symmetry(&self) -> Option<&[SymmetryOp]> {
        if self.symmetry.is_empty() {
            None
        } else {
            Some(&self.symmetry)
        }
    }

    pub fn lp_config(&self) -> &LpConfig {
        &self.lp
    }

    pub fn tol(&self) -> f64 {
        self.lp.tol
    }

    pub fn with_lp_config(mut self, cfg: LpConfig) -> Self {
        self.lp = cfg;
        self
    }

    /// Uniform average of the vertices.
    pub fn barycenter(&self) -> StateVec {
        let w = vec![1.0 / self.num_vertices() as f64; self.num_vertices()];
        StateVec::combination(&self.vertices, &w)
    }

    pub(crate) fn check_dim(&self, len: usize, what: &str) -> Result<()> {
        if len != self.dim + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{what} has {len} lifted coordinates, model needs {}",
                self.dim + 1
            )));
        }
        Ok(())
    }

    /// Errors unless `s` is a normalized state of the model.
    pub(crate) fn require_state(&self, s: &StateVec, what: &str) -> Result<()> {
        self.check_dim(s.lifted().len(), what)?;
        if !s.is_normalized(self.tol() * 10.0) {
            return Err(Error::PointOutsideModel(format!(
                "{what} has unit pairing {}",
                s.unit_pairing()
            )));
        }
        if !self.in_cone(s)?.member {
            return Err(Error::PointOutsideModel(format!("{what} is not in the state space")));
        }
        Ok(())
    }

    /// Values `f(v_i)` at every vertex.
    pub fn values_at_vertices(&self, f: &EffectFunc) -> Vec<f64> {
        self.vertices.iter().map(|v| f.eval(v)).collect()
    }

    /// `0 ≤ f ≤ u` on the state space (checked at the vertices).
    pub fn is_effect(&self, f: &EffectFunc) -> bool {
        if f.coeffs().len() != self.dim + 1 {
            return false;
        }
        let tol = self.tol();
        self.vertices.iter().all(|v| {
            let x = f.eval(v);
            x >= -tol && x <= 1.0 + tol
        })
    }

    /// Probability `⟨s, e⟩`, clamped to `[0, 1]`.
    pub fn prob(&self, s: &StateVec, e: &EffectFunc) -> Result<f64> {
        self.check_dim(s.lifted().len(), "state")?;
        self.check_dim(e.coeffs().len(), "effect")?;
        if !s.is_normalized(self.tol()) {
            return Err(Error::PointOutsideModel(format!(
                "state has unit pairing {}",
                s.unit_pairing()
            )));
        }
        if !self.is_effect(e) {
            return Err(Error::InvalidEffect(
                "functional leaves [0,1] on the state space".into(),
            ));
        }
        Ok(e.eval(s).clamp(0.0, 1.0))
    }

    pub fn validate_measurement(&self, m: &Measurement) -> Result<()> {
        if m.is_empty() {
            return Err(Error::InvalidMeasurement("no effects".into()));
        }
        let mut total = vec![0.0; self.dim + 1];
        for (i, e) in m.effects.iter().enumerate() {
            if !self.is_effect(e) {
                return Err(Error::InvalidMeasurement(format!("entry {i} is not an effect")));
            }
            for (t, c) in total.iter_mut().zip(e.coeffs()) {
                *t += c;
            }
        }
        let unit = EffectFunc::unit(self.dim);
        let worst = self
            .vertices
            .iter()
            .map(|v| (linalg::dot(&total, v.lifted()) - unit.eval(v)).abs())
            .fold(0.0, f64::max);
        if worst > self.tol() * m.len() as f64 {
            return Err(Error::InvalidMeasurement(format!(
                "effects sum to u only within {worst:.3e}"
            )));
        }
        Ok(())
    }

    /// Outcome distribution of `m` on `s`.
    pub fn measure(&self, m: &Measurement, s: &StateVec) -> Result<Vec<f64>> {
        self.validate_measurement(m)?;
        m.effects.iter().map(|e| self.prob(s, e)).collect()
    }

    /// Conic membership `v = Σ λ_i v_i`, `λ ≥ 0`.
    pub fn in_cone(&self, v: &StateVec) -> Result<ConeMembership> {
        self.check_dim(v.lifted().len(), "vector")?;
        let k = self.num_vertices();
        let mut prob = LinearProgram::feasibility(k);
        for c in 0..=self.dim {
            prob.add_eq(
                self.vertices.iter().map(|u| u.lifted()[c]).collect(),
                v.lifted()[c],
            );
        }
        let f = lp::feasible(&prob, &self.lp)?;
        Ok(ConeMembership {
            member: f.feasible,
            weights: f.witness.unwrap_or_default(),
        })
    }

    /// Normalized and inside the state space.
    pub fn contains(&self, s: &StateVec) -> Result<bool> {
        Ok(s.is_normalized(self.tol() * 10.0) && self.in_cone(s)?.member)
    }

    /// Order-unit norm `inf{λ : −λu ≤ f ≤ λu}` = `max_i |f(v_i)|`.
    pub fn order_norm(&self, f: &EffectFunc) -> f64 {
        self.vertices
            .iter()
            .map(|v| f.eval(v).abs())
            .fold(0.0, f64::max)
    }

    /// Base norm `sup{|⟨v, f⟩| : ‖f‖ ≤ 1}`.
    pub fn base_norm(&self, v: &StateVec) -> Result<f64> {
        self.check_dim(v.lifted().len(), "vector")?;
        if v.lifted().iter().all(|x| *x == 0.0) {
            return Ok(0.0);
        }
        let n = self.dim + 1;
        let mut prob = LinearProgram::maximize(v.lifted().to_vec());
        prob.bounds = vec![VarBound::FREE; n];
        for u in &self.vertices {
            prob.add_le(u.lifted().to_vec(), 1.0);
            prob.add_ge(u.lifted().to_vec(), -1.0);
        }
        let sol = lp::solve_with(&prob, &self.lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.value),
            LpStatus::Unbounded => Err(Error::OutsideSpan),
            LpStatus::Infeasible => Err(Error::Lp(lp::LpError::NotOptimal(sol.status))),
        }
    }
}

fn check_symmetry(op: &SymmetryOp, points: &[Vec<f64>], g: usize) -> Result<()> {
    let k = points.len();
    let dim = points[0].len();
    if op.perm.len() != k
        || op.matrix.len() != dim
        || op.matrix.iter().any(|r| r.len() != dim)
        || op.offset.len() != dim
    {
        return Err(Error::InvalidSymmetry(format!("op {g} has wrong shape")));
    }
    let mut seen = vec![false; k];
    for &j in &op.perm {
        if j >= k || seen[j] {
            return Err(Error::InvalidSymmetry(format!("op {g} is not a permutation")));
        }
        seen[j] = true;
    }
    let scale = points
        .iter()
        .flatten()
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    for (i, p) in points.iter().enumerate() {
        let img = op.apply(p);
        if linalg::max_abs_diff(&img, &points[op.perm[i]]) > 1e-9 * scale {
            return Err(Error::InvalidSymmetry(format!(
                "op {g} does not map point {i} to point {}",
                op.perm[i]
            )));
        }
    }
    Ok(())
}

/// `k` points on the unit sphere of `R^dim`, seeded, reduced to a model.
/// Degenerate draws are resampled.
pub fn random_model(dim: usize, k: usize, seed: u64) -> Result<GpModel> {
    if dim == 0 || k < dim + 1 {
        return Err(Error::InvalidParameter(format!(
            "random model needs dim >= 1 and k >= dim + 1 (got dim={dim}, k={k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_MODEL_RETRIES {
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| loop {
                let p: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = linalg::norm2(&p);
                if n > 1e-6 {
                    break linalg::scale(&p, 1.0 / n);
                }
            })
            .collect();
        match GpModel::from_points(
            format!("random-d{dim}-k{k}-s{seed}"),
            &pts,
            None,
            lp::DEFAULT_TOL,
        ) {
            Ok(m) if m.dim() == dim => return Ok(m),
            _ => continue,
        }
    }
    Err(Error::DegenerateModel(format!(
        "no full-dimensional draw after {RANDOM_MODEL_RETRIES} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit() -> GpModel {
        validate_model(&[vec![0.0], vec![1.0]], 1e-9).unwrap()
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
    fn classical_bit_has_two_vertices() {
        let m = bit();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.num_vertices(), 2);
    }

    #[test]
    fn centroid_is_removed_from_simplex() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0 / 3.0, 1.0 / 3.0],
        ];
        let m = validate_model(&pts, 1e-9).unwrap();
        assert_eq!(m.num_vertices(), 3);
        assert_eq!(m.dim(), 2);
    }

    #[test]
    fn singleton_is_degenerate() {
        let err = validate_model(&[vec![0.5, 0.5], vec![0.5, 0.5]], 1e-9).unwrap_err();
        assert!(matches!(err, Error::DegenerateModel(_)));
    }

    #[test]
    fn lower_dimensional_input_is_recharted() {
        // three collinear points in R^2: a segment
        let m = validate_model(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.5]], 1e-9).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.num_vertices(), 2);
    }

    #[test]
    fn vertices_are_sorted_canonically() {
        let m = square();
        let coords = m.vertex_coords();
        let mut sorted = coords.clone();
        sorted.sort_by(|a, b| lex_cmp(a, b));
        assert_eq!(coords, sorted);
        assert_eq!(coords[0], vec![-1.0, -1.0]);
    }

    #[test]
    fn prob_of_unit_and_zero() {
        let m = square();
        let s = StateVec::from_affine(&[0.3, -0.2]);
        assert_eq!(m.prob(&s, &EffectFunc::unit(2)).unwrap(), 1.0);
        assert_eq!(m.prob(&s, &EffectFunc::zero(2)).unwrap(), 0.0);
    }

    #[test]
    fn prob_on_classical_bit() {
        // affine coordinate is p2; the indicator of outcome 1 is 1 - x
        let m = bit();
        let s = StateVec::from_affine(&[0.7]);
        let e = EffectFunc::new(vec![1.0, -1.0]);
        assert!((m.prob(&s, &e).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn prob_rejects_non_effect() {
        let m = square();
        let s = StateVec::from_affine(&[0.0, 0.0]);
        let err = m.prob(&s, &EffectFunc::new(vec![0.5, 1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::InvalidEffect(_)));
    }

    #[test]
    fn effect_tests() {
        let m = square();
        assert!(m.is_effect(&EffectFunc::unit(2)));
        assert!(!m.is_effect(&EffectFunc::unit(2).scaled(-1.0)));
        // supporting functional of the facet x = 1, scaled to peak 1
        assert!(m.is_effect(&EffectFunc::new(vec![0.5, 0.5, 0.0])));
    }

    #[test]
    fn trivial_measurement_is_uniform() {
        let m = square();
        let half = EffectFunc::unit(2).scaled(0.5);
        let meas = Measurement::new(vec![half.clone(), half]);
        let p = m.measure(&meas, &StateVec::from_affine(&[0.9, -0.4])).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn measurement_not_summing_to_unit_is_rejected() {
        let m = square();
        let meas = Measurement::new(vec![EffectFunc::unit(2).scaled(0.5)]);
        assert!(matches!(
            m.measure(&meas, &StateVec::from_affine(&[0.0, 0.0])),
            Err(Error::InvalidMeasurement(_))
        ));
    }

    #[test]
    fn cone_membership() {
        let m = square();
        let v0 = m.vertex(0).clone();
        let v1 = m.vertex(1).clone();
        let c = m.in_cone(&v0).unwrap();
        assert!(c.member);
        assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(!m.in_cone(&StateVec::from_lifted(vec![-1.0, 0.0, 0.0])).unwrap().member);
        let mid = v0.mix(0.5, &v1);
        let c = m.in_cone(&mid).unwrap();
        assert!(c.member);
        let rebuilt = StateVec::combination(m.vertices(), &c.weights);
        assert!(linalg::max_abs_diff(rebuilt.lifted(), mid.lifted()) < 1e-12);
    }

    #[test]
    fn order_norms() {
        let m = bit();
        assert_eq!(m.order_norm(&EffectFunc::unit(1)), 1.0);
        assert_eq!(m.order_norm(&EffectFunc::unit(1).scaled(2.0)), 2.0);
        // 3·p1 with p1 = 1 - x
        assert_eq!(m.order_norm(&EffectFunc::new(vec![3.0, -3.0])), 3.0);
    }

    #[test]
    fn base_norms() {
        let m = bit();
        let s = StateVec::from_affine(&[0.25]);
        assert!((m.base_norm(&s).unwrap() - 1.0).abs() < 1e-12);
        let diff = m.vertex(0) - m.vertex(1);
        assert!((m.base_norm(&diff).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(m.base_norm(&StateVec::zero(1)).unwrap(), 0.0);
    }

    #[test]
    fn hypercube_center_is_not_extreme() {
        let mut pts = Vec::new();
        for mask in 0..8u32 {
            pts.push((0..3).map(|b| if mask >> b & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
        pts.push(vec![0.0, 0.0, 0.0]);
        let ext = extreme_points(&pts, 1e-9).unwrap();
        assert_eq!(ext.len(), 8);
        assert_eq!(extreme_points(&ext, 1e-9).unwrap(), ext);
    }

    #[test]
    fn random_models() {
        let tri = random_model(2, 3, 11).unwrap();
        assert_eq!(tri.num_vertices(), 3);
        let seg = random_model(1, 5, 3).unwrap();
        assert_eq!(seg.num_vertices(), 2);
        // regression value recorded from the generator
        let m = random_model(3, 20, 7).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.num_vertices(), 20);
        let again = random_model(3, 20, 7).unwrap();
        assert_eq!(m.vertex_coords(), again.vertex_coords());
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let m = square();
        let text = m.to_json();
        let back = GpModel::from_json(&text, 1e-9).unwrap();
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn bad_symmetry_is_rejected() {
        let pts = vec![vec![0.0], vec![1.0]];
        let op = SymmetryOp {
            perm: vec![1, 0],
            matrix: vec![vec![1.0]],
            offset: vec![0.0],
        };
        let err = GpModel::from_points("bit", &pts, Some(vec![op]), 1e-9).unwrap_err();
        assert!(matches!(err, Error::InvalidSymmetry(_)));
        let flip = SymmetryOp::from_vertex_perm(&pts, vec![1, 0]).unwrap();
        assert!((flip.matrix[0][0] + 1.0).abs() < 1e-12);
        assert!(GpModel::from_points("bit", &pts, Some(vec![flip]), 1e-9).is_ok());
    }
}
