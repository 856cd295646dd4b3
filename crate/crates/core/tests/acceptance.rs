//! One line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use gptgeo_core::geometry::{boundariness, critical_samples, is_critical, minkowski_measure};
use gptgeo_core::helstrom::{helstrom_family, success_prob, verify_family, Ensemble, FamilyMode};
use gptgeo_core::info::{
    capacity_lower_bound_with, chain_verdicts, distinguishable_number, storable_info, storable_info_dual,
    CapacityOptions,
};
use gptgeo_core::model::{EffectFunc, GpModel, StateVec};
use gptgeo_core::{linalg, sample, zoo, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn corpus() -> Result<Vec<GpModel>> {
    let mut ms: Vec<GpModel> = zoo::catalog().iter().map(|n| zoo::from_name(n)).collect::<Result<_>>()?;
    ms.extend(sample::random_corpus(50, SEED)?);
    Ok(ms)
}

/// Per-model quantities shared by several criteria.
struct Row {
    name: String,
    dim: usize,
    n_dual: f64,
    gap: f64,
    d: usize,
    c_lb: f64,
}

fn measure_identity(models: &[GpModel]) -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for m in models {
        let mk = minkowski_measure(m)?;
        let n = storable_info_dual(m.vertices(), m)?.value;
        worst = worst.max((mk.measure - (n - 1.0)).abs()).max((mk.distortion_at_critical - mk.measure).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        worst <= 1e-6 && secs < 30.0,
        format!("{} models, max error {worst:.2e}, {secs:.2}s", models.len()),
    ))
}

fn rows(models: &[GpModel]) -> Result<Vec<Row>> {
    models
        .iter()
        .map(|m| {
            let store = storable_info(m.vertices(), m)?;
            let dist = distinguishable_number(m.vertices(), m)?;
            let cap = capacity_lower_bound_with(m, &CapacityOptions::default(), Some(&dist), Some(&store))?;
            Ok(Row {
                name: m.name().into(),
                dim: m.dim(),
                n_dual: store.value,
                gap: store.gap().unwrap_or(f64::INFINITY),
                d: dist.count,
                c_lb: cap.lower_bound,
            })
        })
        .collect()
}

/// The shared corpus topped up to 100 instances with further random models.
fn duality(rows: &[Row]) -> Result<Outcome> {
    let mut gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    for m in sample::random_corpus(100usize.saturating_sub(rows.len()), SEED + 4)? {
        gaps.push(storable_info(m.vertices(), &m)?.gap().unwrap_or(f64::INFINITY));
    }
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    Ok(outcome(worst <= 1e-6, format!("{} instances, max gap {worst:.2e}", gaps.len())))
}

fn classical() -> Result<Outcome> {
    let mut bad = Vec::new();
    for d in 2..=7 {
        let m = zoo::simplex(d)?;
        let mk = minkowski_measure(&m)?.measure;
        let store = storable_info(m.vertices(), &m)?;
        let dist = distinguishable_number(m.vertices(), &m)?;
        let cap = capacity_lower_bound_with(&m, &CapacityOptions::default(), Some(&dist), Some(&store))?;
        let rep = chain_verdicts(&m, dist.count, cap.lower_bound, store.value);
        let df = d as f64;
        let ok = (mk - (df - 1.0)).abs() <= 1e-9
            && (store.value - df).abs() <= 1e-9
            && dist.count == d
            && (rep.two_pow_c - df).abs() <= 1e-9
            && rep.saturated
            && rep.holds();
        if !ok {
            bad.push(format!("simplex-{d}: m={mk} n={} d={} 2^C={}", store.value, dist.count, rep.two_pow_c));
        }
    }
    Ok(outcome(bad.is_empty(), if bad.is_empty() { "d = 2..7 saturate d = 2^C = n = D + 1".into() } else { bad.join("; ") }))
}

fn pentagon() -> Result<Outcome> {
    let m = zoo::regular_polygon(5)?;
    let mk = minkowski_measure(&m)?.measure;
    let d = distinguishable_number(m.vertices(), &m)?.count;
    let err = (mk - 1.0 / (PI / 5.0).cos()).abs();
    Ok(outcome(err <= 1e-9 && d == 2, format!("m = {mk:.12}, error {err:.2e}, d = {d}")))
}

fn point_symmetry() -> Result<Outcome> {
    let n = |m: GpModel| -> Result<f64> { Ok(storable_info_dual(m.vertices(), &m)?.value) };
    let mut sym = vec![("square", n(zoo::from_name("square")?)?), ("cube", n(zoo::from_name("cube")?)?)];
    for k in [4, 6, 8, 10] {
        sym.push(("even polygon", n(zoo::regular_polygon(k)?)?));
    }
    sym.push(("hypercube-4", n(zoo::hypercube(4)?)?));
    let sym_err = sym.iter().map(|(_, v)| (v - 2.0).abs()).fold(0.0, f64::max);
    let mut odd_min = f64::INFINITY;
    for k in [3, 5, 7, 9, 11] {
        odd_min = odd_min.min(n(zoo::regular_polygon(k)?)?);
    }
    Ok(outcome(
        sym_err <= 1e-9 && odd_min > 2.0 + 1e-3,
        format!("symmetric |n - 2| <= {sym_err:.2e}, odd polygons n >= {odd_min:.6}"),
    ))
}

fn ball() -> Result<Outcome> {
    let center = StateVec::from_affine(&[0.0, 0.0, 0.0]);
    let at = |k: usize| -> Result<(f64, f64)> {
        let m = zoo::ball_approx(3, k, SEED)?;
        Ok((boundariness(&center, &m)?, storable_info_dual(m.vertices(), &m)?.value))
    };
    let (b1, n1) = at(162)?;
    let (b2, n2) = at(642)?;
    let ok = (0.48..=0.5).contains(&b1) && (2.0..=2.02).contains(&n1) && b2 >= b1 - 1e-12 && n2 <= n1 + 1e-12;
    Ok(outcome(ok, format!("k=162: b = {b1:.9}, n = {n1:.9}; k=642: b = {b2:.9}, n = {n2:.9}")))
}

fn chain(rows: &[Row]) -> Outcome {
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| {
            let p = r.c_lb.exp2();
            !(r.d as f64 <= p + 1e-6 && p <= r.n_dual + 1e-6 && r.n_dual <= (r.dim + 1) as f64 + 1e-9 && r.d >= 2)
        })
        .map(|r| format!("{}: d={} 2^C={:.9} n={:.9}", r.name, r.d, r.c_lb.exp2(), r.n_dual))
        .collect();
    outcome(bad.is_empty(), if bad.is_empty() { format!("{} models", rows.len()) } else { bad.join("; ") })
}

fn maximally_mixed() -> Result<Outcome> {
    let mut ms: Vec<GpModel> = (2..=6).map(zoo::simplex).collect::<Result<_>>()?;
    ms.extend((3..=10).map(zoo::regular_polygon).collect::<Result<Vec<_>>>()?);
    ms.extend((1..=4).map(zoo::hypercube).collect::<Result<Vec<_>>>()?);
    let mut bad = Vec::new();
    for m in &ms {
        if !is_critical(&zoo::maximally_mixed(m)?, m, 1e-7)? {
            bad.push(m.name().to_string());
        }
    }
    Ok(outcome(bad.is_empty(), if bad.is_empty() { format!("{} models", ms.len()) } else { bad.join(", ") }))
}

fn prism() -> Result<Outcome> {
    let m = zoo::from_name("triangle-prism")?;
    let samples = critical_samples(&m, 16, SEED)?;
    let pts: Vec<Vec<f64>> = samples.iter().map(StateVec::coords).collect();
    // farthest pair spans the line; every sample must sit on it
    let mut best = (0, 0, 0.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = linalg::dist(&pts[i], &pts[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (a, b, span) = best;
    let mut off = 0.0f64;
    if span > 0.0 {
        let dir = linalg::scale(&linalg::sub(&pts[b], &pts[a]), 1.0 / span);
        for p in &pts {
            let r = linalg::sub(p, &pts[a]);
            let along = linalg::dot(&r, &dir);
            off = off.max(linalg::norm2(&linalg::sub(&r, &linalg::scale(&dir, along))));
        }
    }
    let ok = pts.len() >= 2 && span >= 0.1 && off <= 1e-6;
    Ok(outcome(ok, format!("{} samples, spread {span:.4}, off-line {off:.2e}", pts.len())))
}

fn helstrom() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let models = sample::random_corpus(100, SEED + 1)?;
    let (mut ratio_err, mut mix_err, mut ratio_const, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0);
    for (i, m) in models.iter().enumerate() {
        let e = sample::random_ensemble(m, 1 + i % 6, &mut rng);
        let f = helstrom_family(&e, m)?;
        let v = verify_family(&f, &e, m, FamilyMode::Strict)?;
        ratio_err = ratio_err.max((f.ratio - v.success_prob).abs());
        mix_err = mix_err.max(v.max_mixture_error);
        ratio_const = ratio_const.max(v.max_ratio_error);
        if !v.passed {
            failures += 1;
        }
    }
    let bit = zoo::simplex(2)?;
    let pair = Ensemble::new(vec![StateVec::from_affine(&[0.0]), StateVec::from_affine(&[0.5])], vec![0.5, 0.5])?;
    let ps = success_prob(&pair, &bit)?.0;
    let ok = failures == 0 && ratio_err <= 1e-7 && mix_err <= 1e-9 && ratio_const <= 1e-9 && (ps - 0.75).abs() <= 1e-12;
    Ok(outcome(
        ok,
        format!("100 ensembles, |p - P_S| <= {ratio_err:.2e}, (i) <= {ratio_const:.2e}, (ii) <= {mix_err:.2e}; classical pair P_S = {ps}"),
    ))
}

fn continuity() -> Result<Outcome> {
    let pool = sample::random_corpus(20, SEED + 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut violations = 0;
    for i in 0..1000 {
        let m = &pool[i % pool.len()];
        let s = sample::random_state(m, &mut rng);
        let e = sample::random_effect(m, &mut rng);
        let eps: f64 = rng.random_range(0.0..0.3);
        let s2 = s.mix(1.0 - eps, &sample::random_state(m, &mut rng));
        let other = sample::random_effect(m, &mut rng);
        let e2 = EffectFunc::new(e.coeffs().iter().zip(other.coeffs()).map(|(a, b)| (1.0 - eps) * a + eps * b).collect());
        let lhs = (m.prob(&s2, &e2)? - m.prob(&s, &e)?).abs();
        let rhs = m.base_norm(&(&s2 - &s))? + m.order_norm(&(&e2 - &e));
        if lhs > rhs + m.tol() {
            violations += 1;
        }
    }
    Ok(outcome(violations == 0, format!("1000 tuples, {violations} violations")))
}

fn capacity_bracket(rows: &[Row]) -> Outcome {
    let bad: Vec<&str> = rows
        .iter()
        .filter(|r| !(r.c_lb >= (r.d as f64).log2() - 1e-9 && r.c_lb <= r.n_dual.log2() + 1e-6))
        .map(|r| r.name.as_str())
        .collect();
    outcome(
        bad.is_empty(),
        format!("every quantity computed on {} models; log2 d <= C_lb <= log2 n {}", rows.len(), if bad.is_empty() { "everywhere".into() } else { format!("fails on {}", bad.join(", ")) }),
    )
}

fn run() -> Result<Vec<(&'static str, Outcome)>> {
    let models = corpus()?;
    let rows = rows(&models)?;
    Ok(vec![
        ("1 m = n - 1 and max_distortion(s*) = m", measure_identity(&models)?),
        ("2 strong duality", duality(&rows)?),
        ("3 classical simplices", classical()?),
        ("4 pentagon", pentagon()?),
        ("5 point symmetry iff n = 2", point_symmetry()?),
        ("6 discretized Bloch ball", ball()?),
        ("7 chain d <= 2^C_lb <= n <= D + 1", chain(&rows)),
        ("8 maximally mixed state is critical", maximally_mixed()?),
        ("9 triangle prism critical segment", prism()?),
        ("10 Helstrom families", helstrom()?),
        ("11 continuity bound", continuity()?),
        ("12 capacity bracket", capacity_bracket(&rows)),
    ])
}

fn main() -> ExitCode {
    let results = match run() {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL acceptance run aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut all = true;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        all &= o.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
