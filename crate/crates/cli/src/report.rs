use gptgeo_core::geometry;
use gptgeo_core::info::{self, CapacityOptions, InequalityReport};
use gptgeo_core::model::GpModel;
use gptgeo_core::{zoo, Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelId {
    pub name: String,
    pub source: String,
    pub dim: usize,
    pub vertices: usize,
    /// SHA-256 of the canonical model JSON.
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub lp: f64,
    pub identity: f64,
    pub duality: f64,
    pub chain: f64,
    pub critical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelId,
    pub m: f64,
    pub n_dual: f64,
    pub n_primal: Option<f64>,
    pub gap: Option<f64>,
    pub d: usize,
    pub c_lb_bits: Option<f64>,
    pub capacity_converged: Option<bool>,
    pub critical_state: Vec<f64>,
    pub boundariness_at_critical: f64,
    pub point_symmetric: bool,
    pub chain: Option<InequalityReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub tolerances: Tolerances,
    pub version: String,
    pub wall_clock_s: Option<f64>,
}

const IDENTITY_TOL: f64 = 1e-6;
const DUALITY_TOL: f64 = 1e-6;
const CRITICAL_TOL: f64 = 1e-7;
const SYMMETRY_TOL: f64 = 1e-9;

pub fn model_hash(m: &GpModel) -> String {
    Sha256::digest(m.to_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn check(name: &str, value: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= tol,
        value,
        tol,
    }
}

pub fn analyze(m: &GpModel, source: &str, lp_tol: f64, capacity: bool) -> Result<AnalysisReport> {
    let verts = m.vertices();
    let store = info::storable_info(verts, m)?;
    let mink = geometry::minkowski_measure(m)?;
    let crit = &mink.critical_state;
    let dist = info::distinguishable_number(verts, m)?;
    let n = store.value;

    let mut checks = vec![check(
        "m = n - 1: |max_distortion(s*) - m|",
        (mink.distortion_at_critical - mink.measure).abs(),
        IDENTITY_TOL,
    )];
    if let Some(g) = store.gap() {
        checks.push(check("strong duality: |n_primal - n_dual|", g, DUALITY_TOL));
    }

    // some vertex realizes the norm ratio n - 1 at s*
    let mut best = f64::INFINITY;
    for v in verts {
        let anti = geometry::antipodal(crit, v, m)?;
        let num = m.base_norm(&(v - crit))?;
        let den = m.base_norm(&(&anti - crit))?;
        best = best.min((num / den - (n - 1.0)).abs());
    }
    checks.push(check("pure state attains n - 1 at s*", best, IDENTITY_TOL));

    match zoo::maximally_mixed(m) {
        Ok(s_m) => {
            let r = geometry::max_distortion(&s_m, m)?;
            checks.push(check(
                "maximally mixed state is critical",
                (r.value - mink.measure).max(0.0),
                CRITICAL_TOL,
            ));
        }
        Err(Error::NoSymmetryRecorded | Error::NotTransitive) => {}
        Err(e) => return Err(e),
    }

    let (chain, c_lb, converged) = if capacity {
        let cap = info::capacity_lower_bound_with(m, &CapacityOptions::default(), Some(&dist), Some(&store))?;
        let rep = info::chain_verdicts(m, dist.count, cap.lower_bound, n);
        checks.push(Check {
            name: "chain 2 <= d <= 2^C_lb <= n <= D + 1".into(),
            passed: rep.holds(),
            value: 0.0,
            tol: rep.tol,
        });
        (Some(rep), Some(cap.lower_bound), Some(cap.converged))
    } else {
        let ok = dist.count >= 2 && dist.count as f64 <= n + 1e-6 && n <= (m.dim() + 1) as f64 + 1e-9;
        checks.push(Check {
            name: "chain 2 <= d <= n <= D + 1".into(),
            passed: ok,
            value: 0.0,
            tol: 1e-6,
        });
        (None, None, None)
    };

    let passed = checks.iter().all(|c| c.passed);
    Ok(AnalysisReport {
        model: ModelId {
            name: m.name().into(),
            source: source.into(),
            dim: m.dim(),
            vertices: m.num_vertices(),
            sha256: model_hash(m),
        },
        m: mink.measure,
        n_dual: n,
        n_primal: store.primal_value,
        gap: store.gap(),
        d: dist.count,
        c_lb_bits: c_lb,
        capacity_converged: converged,
        critical_state: crit.coords(),
        boundariness_at_critical: geometry::boundariness(crit, m)?,
        point_symmetric: (n - 2.0).abs() <= SYMMETRY_TOL,
        chain,
        checks,
        passed,
        tolerances: Tolerances {
            lp: lp_tol,
            identity: IDENTITY_TOL,
            duality: DUALITY_TOL,
            chain: 1e-6,
            critical: CRITICAL_TOL,
        },
        version: env!("CARGO_PKG_VERSION").into(),
        wall_clock_s: None,
    })
}
