//! Seeded random states, effects, ensembles and model corpora.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::helstrom::Ensemble;
use crate::model::{random_model, EffectFunc, GpModel, StateVec};
use crate::Result;

/// Largest vertex count drawn by [`random_corpus`].
pub const CORPUS_MAX_VERTICES: usize = 30;

/// Uniform point of the probability simplex with `k` entries.
pub fn dirichlet<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Random mixture of the vertices (strictly interior with probability 1).
pub fn random_state<R: Rng>(model: &GpModel, rng: &mut R) -> StateVec {
    let w = dirichlet(model.num_vertices(), rng);
    StateVec::combination(model.vertices(), &w)
}

/// Random effect: a random functional rescaled to span `[lo, hi] ⊂ [0, 1]`
/// over the vertices.
pub fn random_effect<R: Rng>(model: &GpModel, rng: &mut R) -> EffectFunc {
    let dim = model.dim();
    let g: Vec<f64> = (0..=dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = EffectFunc::new(g);
    let vals = model.values_at_vertices(&f);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a: f64 = rng.random_range(0.0..0.5);
    let b: f64 = rng.random_range(0.5..1.0);
    if hi - lo < 1e-12 {
        return EffectFunc::unit(dim).scaled(a);
    }
    // e = a·u + (b − a)(f − lo·u)/(hi − lo)
    let s = (b - a) / (hi - lo);
    let mut c: Vec<f64> = f.coeffs().iter().map(|x| x * s).collect();
    c[0] += a - lo * s;
    EffectFunc::new(c)
}

/// Ensemble of `n` states (vertices or mixtures) with random prior.
pub fn random_ensemble<R: Rng>(model: &GpModel, n: usize, rng: &mut R) -> Ensemble {
    let states = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                model.vertex(rng.random_range(0..model.num_vertices())).clone()
            } else {
                random_state(model, rng)
            }
        })
        .collect();
    Ensemble::new(states, dirichlet(n, rng)).expect("valid weights")
}

/// `count` random models with `D = 1..=4` cycling and at most
/// [`CORPUS_MAX_VERTICES`] vertices, seeded from `seed`.
pub fn random_corpus(count: usize, seed: u64) -> Result<Vec<GpModel>> {
    (0..count)
        .map(|i| {
            let dim = 1 + i % 4;
            let span = CORPUS_MAX_VERTICES - dim;
            let k = dim + 1 + (i * 7 + seed as usize) % span;
            random_model(dim, k, seed.wrapping_mul(1000).wrapping_add(i as u64))
        })
        .collect()
}
