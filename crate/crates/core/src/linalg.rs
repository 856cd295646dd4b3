//! Small dense helpers on `Vec<f64>` coordinates.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm2(&sub(a, b))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Orthonormal basis of the affine hull of `points`, built by modified
/// Gram-Schmidt on `p_i - p_0` in input order. Directions whose residual
/// norm is below `tol · scale` are dropped.
pub fn affine_basis(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let Some(origin) = points.first() else {
        return Vec::new();
    };
    let scale = points
        .iter()
        .map(|p| dist(p, origin))
        .fold(0.0, f64::max)
        .max(1.0);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut r = sub(p, origin);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&r, q);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        let n = norm2(&r);
        if n > tol * scale {
            basis.push(scale_vec(r, 1.0 / n));
        }
    }
    basis
}

fn scale_vec(mut v: Vec<f64>, s: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x *= s);
    v
}

pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Inverse of a square matrix, `None` when numerically singular.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let a = to_matrix(m);
    if a.nrows() != a.ncols() {
        return None;
    }
    let scale = a.amax().max(1.0);
    let lu = a.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < 1e-12 * scale.powi(a.nrows() as i32) {
        return None;
    }
    lu.try_inverse().map(|inv| from_matrix(&inv))
}

/// Solves the least-squares problem `X · src ≈ dst` for a square `X`, where
/// `src` and `dst` hold one column vector per entry.
pub fn fit_linear_map(src: &[Vec<f64>], dst: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = src.first()?.len();
    let s = DMatrix::from_fn(n, src.len(), |i, j| src[j][i]);
    let d = DMatrix::from_fn(n, dst.len(), |i, j| dst[j][i]);
    let gram = &s * s.transpose();
    let inv = gram.try_inverse()?;
    Some(from_matrix(&(d * s.transpose() * inv)))
}
