use gptgeo_core::lp::{
    feasible, max_violation, solve_exact, solve_lp, solve_with, LinearProgram, LpConfig, LpError,
    LpStatus, VarBound, DEFAULT_TOL,
};
use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn cfg() -> LpConfig {
    LpConfig::default()
}

#[test]
fn minimize_x_with_x_at_least_one() {
    let mut p = LinearProgram::minimize(vec![1.0]);
    p.set_free(0).add_ge(vec![1.0], 1.0);
    let s = solve_lp(&p, DEFAULT_TOL).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(s.value, 1.0);
}

#[test]
fn contradictory_bounds_are_infeasible() {
    let mut p = LinearProgram::maximize(vec![1.0]);
    p.add_le(vec![1.0], 3.0).add_ge(vec![1.0], 5.0);
    assert_eq!(solve_lp(&p, DEFAULT_TOL).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn two_basic_points_oracle() {
    // basic feasible points of x + 2y = 2 are (2,0) and (0,1)
    let mut p = LinearProgram::minimize(vec![1.0, 1.0]);
    p.add_eq(vec![1.0, 2.0], 2.0);
    let s = solve_lp(&p, DEFAULT_TOL).unwrap();
    let candidates = [[2.0, 0.0], [0.0, 1.0]];
    let best = candidates.iter().map(|x| x[0] + x[1]).fold(f64::INFINITY, f64::min);
    assert!((s.value - best).abs() < 1e-12);
    assert!((s.point[0] - 0.0).abs() < 1e-12 && (s.point[1] - 1.0).abs() < 1e-12);
}

#[test]
fn unbounded_ray() {
    let mut p = LinearProgram::maximize(vec![1.0, 0.0]);
    p.add_le(vec![0.0, 1.0], 1.0);
    assert_eq!(solve_lp(&p, DEFAULT_TOL).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn feasibility_examples() {
    let mut p = LinearProgram::feasibility(1);
    p.add_ge(vec![1.0], 0.0).add_le(vec![1.0], 1.0);
    let f = feasible(&p, &cfg()).unwrap();
    let w = f.witness.unwrap();
    assert!(f.feasible && (0.0..=1.0).contains(&w[0]));

    let mut q = LinearProgram::feasibility(1);
    q.add_ge(vec![1.0], 2.0).add_le(vec![1.0], 1.0);
    let f = feasible(&q, &cfg()).unwrap();
    assert!(!f.feasible && f.witness.is_none());
}

#[test]
fn centroid_cone_membership_matches_linear_solve() {
    // lifted triangle vertices as columns; the 3x3 system has a unique solution
    let verts = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]];
    let target = [1.0, 1.0 / 3.0, 1.0 / 3.0];
    let a = DMatrix::from_fn(3, 3, |r, c| verts[c][r]);
    let oracle = a.lu().solve(&DVector::from_row_slice(&target)).unwrap();

    let mut p = LinearProgram::feasibility(3);
    for r in 0..3 {
        p.add_eq(verts.iter().map(|v| v[r]).collect(), target[r]);
    }
    let f = feasible(&p, &cfg()).unwrap();
    let w = f.witness.unwrap();
    for i in 0..3 {
        assert!((w[i] - oracle[i]).abs() < 1e-12);
        assert!((w[i] - 1.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn malformed_rows_are_rejected() {
    let mut p = LinearProgram::minimize(vec![1.0, 1.0]);
    p.add_le(vec![1.0], 1.0);
    assert!(matches!(solve_lp(&p, DEFAULT_TOL), Err(LpError::MalformedProgram(_))));
    let mut q = LinearProgram::minimize(vec![1.0]);
    q.set_bound(0, VarBound::between(2.0, 1.0));
    assert!(matches!(solve_lp(&q, DEFAULT_TOL), Err(LpError::MalformedProgram(_))));
    assert!(matches!(solve_lp(&LinearProgram::minimize(vec![1.0]), 0.0), Err(LpError::MalformedProgram(_))));
}

#[test]
fn bounded_variables() {
    // max x + y, 0.5 ≤ x ≤ 2, y ≤ 3 (y unbounded below), x + y ≤ 4
    let mut p = LinearProgram::maximize(vec![1.0, 1.0]);
    p.set_bound(0, VarBound::between(0.5, 2.0));
    p.set_bound(1, VarBound { lower: None, upper: Some(3.0) });
    p.add_le(vec![1.0, 1.0], 4.0);
    let s = solve_lp(&p, DEFAULT_TOL).unwrap();
    assert!((s.value - 4.0).abs() < 1e-12);
    assert!(max_violation(&p, &s.point) < 1e-12);
}

#[test]
fn exact_solver_agrees_on_a_small_program() {
    let mut p = LinearProgram::maximize(vec![3.0, 2.0]);
    p.add_le(vec![1.0, 1.0], 4.0).add_le(vec![1.0, 3.0], 6.0).add_le(vec![1.0, 0.0], 3.0);
    let e = solve_exact(&p).unwrap();
    let f = solve_lp(&p, DEFAULT_TOL).unwrap();
    assert_eq!(e.status, LpStatus::Optimal);
    assert_eq!(e.value.unwrap().to_f64().unwrap(), 11.0);
    assert!((f.value - 11.0).abs() < 1e-12);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's example cycles under the textbook rule without anti-cycling
    let mut p = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
    p.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
        .add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
        .add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
    let s = solve_lp(&p, DEFAULT_TOL).unwrap();
    assert!((s.value + 0.05).abs() < 1e-9);
}

/// Minimum of `c·x` over `{A x ≤ b, 0 ≤ x}` by enumerating every basic point.
fn vertex_enumeration(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let n = c.len();
    let mut all: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        all.push((e, 0.0));
    }
    let m = all.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, k| all[idx[r]].0[k]);
        let b = DVector::from_fn(n, |r, _| all[idx[r]].1);
        if let Some(x) = a.lu().solve(&b) {
            let ok = all.iter().all(|(row, rhs)| {
                row.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= rhs + 1e-9
            });
            if ok && x.iter().all(|v| v.is_finite()) {
                let v: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn small_program() -> impl Strategy<Value = (Vec<f64>, Vec<(Vec<f64>, f64)>)> {
    (2usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        let row = (prop::collection::vec(-3i32..=3, n), 0i32..=6)
            .prop_map(|(r, b)| (r.into_iter().map(f64::from).collect::<Vec<_>>(), f64::from(b)));
        (
            prop::collection::vec(-3i32..=3, n).prop_map(|c| c.into_iter().map(f64::from).collect()),
            prop::collection::vec(row, m),
        )
    })
}

fn build(c: &[f64], rows: &[(Vec<f64>, f64)]) -> LinearProgram {
    let n = c.len();
    let mut p = LinearProgram::minimize(c.to_vec());
    for (r, b) in rows {
        p.add_le(r.clone(), *b);
    }
    // a box keeps every instance bounded
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        p.add_le(e, 5.0);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimum_matches_vertex_enumeration((c, rows) in small_program()) {
        let p = build(&c, &rows);
        let mut boxed = rows.clone();
        for j in 0..c.len() {
            let mut e = vec![0.0; c.len()];
            e[j] = 1.0;
            boxed.push((e, 5.0));
        }
        // b ≥ 0 makes the origin feasible
        let oracle = vertex_enumeration(&c, &boxed).expect("origin is feasible");
        let s = solve_lp(&p, DEFAULT_TOL).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert!((s.value - oracle).abs() < 1e-8, "{} vs {}", s.value, oracle);
    }

    #[test]
    fn optimal_solutions_are_feasible_and_certified((c, rows) in small_program(), shift in -3i32..=3) {
        let mut p = build(&c, &rows);
        // shifted rows can make the program infeasible
        p.add_ge(vec![1.0; c.len()], f64::from(shift));
        let s = solve_lp(&p, DEFAULT_TOL).unwrap();
        if s.is_optimal() {
            prop_assert!(s.max_violation(&p) <= 1e-9);
            prop_assert!(s.duality_gap() <= 1e-9);
        }
        let again = solve_lp(&p, DEFAULT_TOL).unwrap();
        prop_assert_eq!(format!("{s:?}"), format!("{again:?}"));
    }

    #[test]
    fn exact_and_float_agree((c, rows) in small_program()) {
        let p = build(&c, &rows);
        let e = solve_exact(&p).unwrap();
        let f = solve_with(&p, &LpConfig { exact_adjudication: true, ..LpConfig::default() }).unwrap();
        prop_assert_eq!(e.status, f.status);
        prop_assert!((e.value.unwrap().to_f64().unwrap() - f.value).abs() < 1e-9);
    }
}
