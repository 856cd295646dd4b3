//! Model generators with known reference values.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::lp::DEFAULT_TOL;
use crate::model::{GpModel, StateVec, SymmetryOp};
use crate::{Error, Result};

fn with_symmetry(name: String, pts: &[Vec<f64>], perms: Vec<Vec<usize>>) -> Result<GpModel> {
    let ops = perms
        .into_iter()
        .map(|p| SymmetryOp::from_vertex_perm(pts, p))
        .collect::<Result<Vec<_>>>()?;
    GpModel::from_points(name, pts, Some(ops), DEFAULT_TOL)
}

/// Probability simplex on `d` outcomes, charted by `(p_2, …, p_d)`.
pub fn simplex(d: usize) -> Result<GpModel> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("simplex needs d >= 2, got {d}")));
    }
    let pts: Vec<Vec<f64>> = (0..d)
        .map(|i| (1..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut swap: Vec<usize> = (0..d).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..d).map(|i| (i + 1) % d).collect();
    with_symmetry(format!("simplex-{d}"), &pts, vec![swap, cycle])
}

/// Regular `k`-gon inscribed in the unit circle.
pub fn regular_polygon(k: usize) -> Result<GpModel> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("polygon needs k >= 3, got {k}")));
    }
    let pts: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / k as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let rot: Vec<usize> = (0..k).map(|i| (i + 1) % k).collect();
    let refl: Vec<usize> = (0..k).map(|i| (k - i) % k).collect();
    with_symmetry(format!("polygon-{k}"), &pts, vec![rot, refl])
}

/// `[−1, 1]^dim`.
pub fn hypercube(dim: usize) -> Result<GpModel> {
    if dim == 0 {
        return Err(Error::InvalidParameter("hypercube needs dim >= 1".into()));
    }
    if dim > 16 {
        return Err(Error::TooLarge(format!("hypercube of dimension {dim}")));
    }
    let k = 1usize << dim;
    let pts: Vec<Vec<f64>> = (0..k)
        .map(|m| (0..dim).map(|b| if m >> b & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    let mut perms = vec![(0..k).map(|m| m ^ 1).collect::<Vec<_>>()];
    for j in 1..dim {
        perms.push(
            (0..k)
                .map(|m| {
                    let (a, b) = (m & 1, m >> j & 1);
                    (m & !(1 | 1 << j)) | (b) | (a << j)
                })
                .collect(),
        );
    }
    with_symmetry(format!("hypercube-{dim}"), &pts, perms)
}

/// `base × [−height/2, height/2]` for a two-dimensional base.
pub fn prism(base: &GpModel, height: f64) -> Result<GpModel> {
    if base.dim() != 2 {
        return Err(Error::InvalidParameter(format!(
            "prism base must be two-dimensional, got {}",
            base.dim()
        )));
    }
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::InvalidParameter(format!("prism height {height}")));
    }
    let h = height / 2.0;
    let pts: Vec<Vec<f64>> = base
        .vertex_coords()
        .iter()
        .flat_map(|x| [vec![x[0], x[1], -h], vec![x[0], x[1], h]])
        .collect();
    let k = pts.len();
    let mut perms = vec![(0..k).map(|i| i ^ 1).collect::<Vec<_>>()];
    for op in base.symmetry().unwrap_or(&[]) {
        perms.push((0..k).map(|i| 2 * op.perm[i / 2] + i % 2).collect());
    }
    with_symmetry(format!("prism-{}", base.name()), &pts, perms)
}

/// Icosahedron refined `level` times, projected to the unit sphere:
/// 12, 42, 162, 642, … points.
pub fn icosphere(level: usize) -> Vec<Vec<f64>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for a in [-1.0, 1.0] {
        for b in [-phi, phi] {
            pts.push(vec![0.0, a, b]);
            pts.push(vec![a, b, 0.0]);
            pts.push(vec![b, 0.0, a]);
        }
    }
    let unit = |p: &[f64]| linalg::scale(p, 1.0 / linalg::norm2(p));
    let mut pts: Vec<Vec<f64>> = pts.iter().map(|p| unit(p)).collect();
    let edge = 2.0 / (phi * phi + 1.0).sqrt();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let near = |a: &[f64], b: &[f64]| (linalg::dist(a, b) - edge).abs() < 1e-9;
    for i in 0..12 {
        for j in i + 1..12 {
            for l in j + 1..12 {
                if near(&pts[i], &pts[j]) && near(&pts[j], &pts[l]) && near(&pts[i], &pts[l]) {
                    faces.push([i, j, l]);
                }
            }
        }
    }
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[e] = *mid.entry(key).or_insert_with(|| {
                    pts.push(unit(&linalg::add(&pts[a], &pts[b])));
                    pts.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push(m);
        }
        faces = next;
    }
    pts
}

fn fibonacci_sphere(k: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..k)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Polytope inscribed in the unit ball of `R^dim` with `k` vertices.
///
/// `dim = 2` gives the regular `k`-gon. `dim = 3` uses the refined
/// icosahedron when `k` is 12, 42, 162, 642, … and a Fibonacci lattice
/// otherwise. Higher dimensions use seeded Gaussian directions.
pub fn ball_approx(dim: usize, k: usize, seed: u64) -> Result<GpModel> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("ball needs dim >= 2, got {dim}")));
    }
    if k < dim + 1 {
        return Err(Error::DegenerateModel(format!(
            "{k} points cannot span a {dim}-ball"
        )));
    }
    let name = format!("ball-{dim}-{k}");
    let pts = match dim {
        2 => return Ok(regular_polygon(k)?.with_name(name)),
        3 => {
            let level = (0..6).find(|&l| 10 * 4usize.pow(l) + 2 == k);
            match level {
                Some(l) => icosphere(l as usize),
                None => fibonacci_sphere(k),
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k)
                .map(|_| {
                    let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    linalg::scale(&g, 1.0 / linalg::norm2(&g))
                })
                .collect()
        }
    };
    let m = GpModel::from_points(name, &pts, None, DEFAULT_TOL)?;
    if m.dim() != dim {
        return Err(Error::DegenerateModel(format!(
            "sampled points span only {} dimensions",
            m.dim()
        )));
    }
    Ok(m)
}

/// Vertices reachable from `start` under the recorded generators.
pub fn orbit(model: &GpModel, start: usize) -> Result<Vec<usize>> {
    let ops = model.symmetry().ok_or(Error::NoSymmetryRecorded)?;
    let mut seen = vec![false; model.num_vertices()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        for op in ops {
            let j = op.perm[i];
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    Ok((0..seen.len()).filter(|&i| seen[i]).collect())
}

/// Average of the symmetry orbit of vertex `start`.
pub fn orbit_average(model: &GpModel, start: usize) -> Result<StateVec> {
    let orb = orbit(model, start)?;
    let states: Vec<StateVec> = orb.iter().map(|&i| model.vertex(i).clone()).collect();
    let w = vec![1.0 / orb.len() as f64; orb.len()];
    Ok(StateVec::combination(&states, &w))
}

/// Orbit average of a vertex under a vertex-transitive symmetry group.
pub fn maximally_mixed(model: &GpModel) -> Result<StateVec> {
    if orbit(model, 0)?.len() != model.num_vertices() {
        return Err(Error::NotTransitive);
    }
    orbit_average(model, 0)
}

/// Where a reference value comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "note", rename_all = "kebab-case")]
pub enum Source {
    ClosedForm(String),
    Regression(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCard {
    pub name: String,
    pub m: f64,
    pub n: f64,
    pub d: usize,
    /// Affine coordinates of a critical state, when it is unique or canonical.
    pub critical_state: Option<Vec<f64>>,
    pub source: Source,
}

fn card(name: &str, m: f64, d: usize, crit: Option<Vec<f64>>, source: Source) -> ReferenceCard {
    ReferenceCard {
        name: name.into(),
        m,
        n: m + 1.0,
        d,
        critical_state: crit,
        source,
    }
}

fn parse_suffix(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok()
}

/// Known values for named zoo models.
pub fn reference_values(name: &str) -> Result<ReferenceCard> {
    let closed = |s: &str| Source::ClosedForm(s.into());
    if name == "bit" {
        return reference_values("simplex-2").map(|c| ReferenceCard { name: name.into(), ..c });
    }
    if let Some(d) = parse_suffix(name, "simplex-").filter(|&d| d >= 2) {
        let u = 1.0 / d as f64;
        return Ok(card(
            name,
            (d - 1) as f64,
            d,
            Some(vec![u; d - 1]),
            closed("m = d - 1 for the classical simplex"),
        ));
    }
    let polygon = match name {
        "pentagon" => Some(5),
        "square" => Some(4),
        _ => parse_suffix(name, "polygon-").filter(|&k| k >= 3),
    };
    if let Some(k) = polygon {
        let (m, d, src) = if k == 3 {
            (2.0, 3, closed("triangle is a simplex"))
        } else if k % 2 == 0 {
            (1.0, 2, closed("point-symmetric"))
        } else {
            let src = if k == 5 {
                closed("m = 1/cos(pi/5)")
            } else {
                Source::Regression("dual program; m = 1/cos(pi/k)".into())
            };
            (1.0 / (PI / k as f64).cos(), 2, src)
        };
        return Ok(card(name, m, d, Some(vec![0.0, 0.0]), src));
    }
    let cube = match name {
        "cube" => Some(3),
        _ => parse_suffix(name, "hypercube-").filter(|&d| d >= 1),
    };
    if let Some(dim) = cube {
        return Ok(card(
            name,
            1.0,
            2,
            Some(vec![0.0; dim]),
            Source::Regression("point-symmetric; dual program gives n = 2".into()),
        ));
    }
    match name {
        "triangle-prism" => Ok(card(
            name,
            2.0,
            3,
            Some(vec![0.0, 0.0, 0.0]),
            Source::Regression("critical set is the axis segment |z| <= 1/3".into()),
        )),
        "square-prism" => Ok(card(
            name,
            1.0,
            2,
            Some(vec![0.0, 0.0, 0.0]),
            closed("point-symmetric"),
        )),
        "pentagon-prism" => Ok(card(
            name,
            1.0 / (PI / 5.0).cos(),
            2,
            Some(vec![0.0, 0.0, 0.0]),
            Source::Regression("dual program; same as the pentagon".into()),
        )),
        _ => Err(Error::UnknownModel(name.into())),
    }
}

/// Names of the standard zoo models, each accepted by [`from_name`].
pub fn catalog() -> Vec<String> {
    let mut names: Vec<String> = (2..=7).map(|d| format!("simplex-{d}")).collect();
    names.extend((3..=12).map(|k| format!("polygon-{k}")));
    names.extend((1..=4).map(|d| format!("hypercube-{d}")));
    names.extend(
        ["triangle-prism", "square-prism", "pentagon-prism", "ball-3-12", "ball-3-42", "ball-3-162"]
            .map(String::from),
    );
    names
}

/// Builds a zoo model from its name: `bit`, `simplex-D`, `polygon-K`,
/// `pentagon`, `square`, `cube`, `hypercube-D`, `triangle-prism`,
/// `square-prism`, `pentagon-prism`, `ball-D-K`.
pub fn from_name(name: &str) -> Result<GpModel> {
    let named = |m: GpModel| m.with_name(name);
    if let Some(d) = parse_suffix(name, "simplex-") {
        return simplex(d);
    }
    if let Some(k) = parse_suffix(name, "polygon-") {
        return regular_polygon(k);
    }
    if let Some(d) = parse_suffix(name, "hypercube-") {
        return hypercube(d);
    }
    if let Some(rest) = name.strip_prefix("ball-") {
        let parts: Vec<&str> = rest.split('-').collect();
        if let [d, k] = parts[..] {
            if let (Ok(d), Ok(k)) = (d.parse(), k.parse()) {
                return ball_approx(d, k, 0);
            }
        }
        return Err(Error::UnknownModel(name.into()));
    }
    match name {
        "bit" => simplex(2).map(named),
        "pentagon" => regular_polygon(5).map(named),
        "square" => regular_polygon(4).map(named),
        "cube" => hypercube(3).map(named),
        "triangle-prism" => prism(&regular_polygon(3)?, 2.0).map(named),
        "square-prism" => prism(&regular_polygon(4)?, 2.0).map(named),
        "pentagon-prism" => prism(&regular_polygon(5)?, 2.0).map(named),
        _ => Err(Error::UnknownModel(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(simplex(4).unwrap().num_vertices(), 4);
        assert_eq!(simplex(4).unwrap().dim(), 3);
        assert_eq!(regular_polygon(7).unwrap().num_vertices(), 7);
        assert_eq!(hypercube(4).unwrap().num_vertices(), 16);
        let p = prism(&regular_polygon(3).unwrap(), 2.0).unwrap();
        assert_eq!((p.dim(), p.num_vertices()), (3, 6));
        for (l, k) in [(0, 12), (1, 42), (2, 162), (3, 642)] {
            assert_eq!(icosphere(l).len(), k);
        }
    }

    #[test]
    fn icosphere_is_on_the_sphere() {
        for p in icosphere(2) {
            assert!((linalg::norm2(&p) - 1.0).abs() < 1e-12);
        }
        assert_eq!(ball_approx(3, 42, 0).unwrap().num_vertices(), 42);
        assert_eq!(ball_approx(3, 20, 0).unwrap().num_vertices(), 20);
        assert_eq!(ball_approx(4, 30, 5).unwrap().dim(), 4);
        assert!(matches!(ball_approx(3, 3, 0), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn maximally_mixed_states() {
        let s = maximally_mixed(&simplex(4).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(&s.coords(), &[0.25, 0.25, 0.25]) < 1e-12);
        let c = maximally_mixed(&regular_polygon(7).unwrap()).unwrap();
        assert!(linalg::norm2(&c.coords()) < 1e-12);
        let h = maximally_mixed(&hypercube(3).unwrap()).unwrap();
        assert!(linalg::norm2(&h.coords()) < 1e-12);
        let ball = ball_approx(3, 12, 0).unwrap();
        assert_eq!(maximally_mixed(&ball), Err(Error::NoSymmetryRecorded));
    }

    #[test]
    fn prism_group_is_transitive() {
        let p = from_name("triangle-prism").unwrap();
        assert_eq!(orbit(&p, 0).unwrap().len(), 6);
    }

    #[test]
    fn cards() {
        let c = reference_values("simplex-4").unwrap();
        assert_eq!((c.m, c.n, c.d), (3.0, 4.0, 4));
        let p = reference_values("pentagon").unwrap();
        assert_eq!(p.d, 2);
        assert!((p.m - (5f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(matches!(reference_values("dodecahedron"), Err(Error::UnknownModel(_))));
    }
}
