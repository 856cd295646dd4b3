use std::fmt;

use clap::ValueEnum;
use gptgeo_core::helstrom::{self, FamilyMode};
use gptgeo_core::info::{self, CapacityOptions};
use gptgeo_core::lp::LpConfig;
use gptgeo_core::model::{EffectFunc, GpModel};
use gptgeo_core::{geometry, sample, zoo, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// |n_primal − n_dual| ≤ 1e-6.
    Duality,
    /// m = n − 1 and the critical state attains m, within 1e-6.
    #[value(alias = "theorem1")]
    Identity,
    /// 2 ≤ d ≤ 2^C_lb ≤ n ≤ D + 1.
    Chain,
    /// Helstrom ratio equals the optimal success probability.
    Helstrom,
    /// The probability rule is continuous in state and effect.
    Continuity,
}

pub struct Summary {
    pub scope: Scope,
    pub total: usize,
    pub failures: Vec<String>,
    /// Largest error seen, for scopes that measure one.
    pub max_error: f64,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.failures {
            writeln!(f, "FAIL {line}")?;
        }
        writeln!(
            f,
            "{:?}: {}/{} passed, max error {:.3e} -> {}",
            self.scope,
            self.total - self.failures.len(),
            self.total,
            self.max_error,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn models(zoo_models: bool, count: usize, seed: u64, cfg: &LpConfig) -> Result<Vec<GpModel>> {
    let ms = if zoo_models {
        zoo::catalog().iter().map(|n| zoo::from_name(n)).collect::<Result<Vec<_>>>()?
    } else {
        sample::random_corpus(count, seed)?
    };
    Ok(ms.into_iter().map(|m| m.with_lp_config(*cfg)).collect())
}

pub fn run(scope: Scope, seed: u64, count: usize, zoo_models: bool, cfg: &LpConfig) -> Result<Summary> {
    let mut s = Summary {
        scope,
        total: 0,
        failures: Vec::new(),
        max_error: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scope {
        Scope::Duality => {
            for m in models(zoo_models, count, seed, cfg)? {
                let r = info::storable_info(m.vertices(), &m)?;
                let gap = r.gap().unwrap_or(f64::INFINITY);
                s.record(m.name(), gap, 1e-6);
            }
        }
        Scope::Identity => {
            for m in models(zoo_models, count, seed, cfg)? {
                let mk = geometry::minkowski_measure(&m)?;
                let n = info::storable_info_dual(m.vertices(), &m)?.value;
                let err = (mk.measure - (n - 1.0))
                    .abs()
                    .max((mk.distortion_at_critical - mk.measure).abs());
                s.record(m.name(), err, 1e-6);
            }
        }
        Scope::Chain => {
            for m in models(zoo_models, count, seed, cfg)? {
                let store = info::storable_info(m.vertices(), &m)?;
                let dist = info::distinguishable_number(m.vertices(), &m)?;
                let cap = info::capacity_lower_bound_with(&m, &CapacityOptions::default(), Some(&dist), Some(&store))?;
                let rep = info::chain_verdicts(&m, dist.count, cap.lower_bound, store.value);
                s.total += 1;
                if !rep.holds() {
                    s.failures.push(format!(
                        "{}: d={} 2^C={:.9} n={:.9} D+1={}",
                        m.name(),
                        rep.d,
                        rep.two_pow_c,
                        rep.n,
                        rep.dim_plus_one
                    ));
                }
            }
        }
        Scope::Helstrom => {
            for (i, m) in models(zoo_models, count, seed, cfg)?.iter().enumerate() {
                let n = rng.random_range(1..=6);
                let ens = sample::random_ensemble(m, n, &mut rng);
                let fam = helstrom::helstrom_family(&ens, m)?;
                let v = helstrom::verify_family(&fam, &ens, m, FamilyMode::Strict)?;
                let err = (fam.ratio - v.success_prob).abs();
                s.max_error = s.max_error.max(err);
                s.total += 1;
                if !v.passed {
                    s.failures.push(format!("{} ensemble {i}: {v:?}", m.name()));
                }
            }
        }
        Scope::Continuity => {
            let pool = models(zoo_models, count.clamp(1, 20), seed, cfg)?;
            for i in 0..count {
                let m = &pool[i % pool.len()];
                let err = continuity_excess(m, &mut rng)?;
                s.record(&format!("{} tuple {i}", m.name()), err, 0.0);
            }
        }
    }
    Ok(s)
}

impl Summary {
    fn record(&mut self, what: &str, err: f64, tol: f64) {
        self.total += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= tol) {
            self.failures.push(format!("{what}: error {err:.3e} > {tol:.1e}"));
        }
    }
}

/// `|⟨s+Δs, e+Δe⟩ − ⟨s,e⟩| − (‖Δs‖₁ + ‖Δe‖ + tol)` for a random tuple; the
/// perturbed state and effect stay valid.
pub fn continuity_excess<R: Rng>(m: &GpModel, rng: &mut R) -> Result<f64> {
    let s = sample::random_state(m, rng);
    let e = sample::random_effect(m, rng);
    let eps: f64 = rng.random_range(0.0..0.3);
    let s2 = s.mix(1.0 - eps, &sample::random_state(m, rng));
    let e_other = sample::random_effect(m, rng);
    let e2 = EffectFunc::new(
        e.coeffs()
            .iter()
            .zip(e_other.coeffs())
            .map(|(a, b)| (1.0 - eps) * a + eps * b)
            .collect(),
    );
    let ds = &s2 - &s;
    let de = &e2 - &e;
    let lhs = (m.prob(&s2, &e2)? - m.prob(&s, &e)?).abs();
    let rhs = m.base_norm(&ds)? + m.order_norm(&de) + m.tol();
    Ok((lhs - rhs).max(0.0))
}
