use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distinguish::{distinguishable_number, DistinguishabilityResult};
use super::storable::{storable_info, StorableInfoResult};
use crate::model::{GpModel, Measurement, StateVec};
use crate::Result;

/// Subsets are enumerated exhaustively when there are at most this many.
const EXHAUSTIVE_SUBSETS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    /// Largest vertex subset whose discrimination measurement is tried.
    pub subset_cap: usize,
    /// Stop when the upper and lower capacity bounds are this close (bits).
    pub ba_tol: f64,
    pub ba_max_iter: usize,
    /// Number of random subsets when enumeration is too large.
    pub seeds: usize,
    pub seed: u64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            subset_cap: 12,
            ba_tol: 1e-9,
            ba_max_iter: 100_000,
            seeds: 16,
            seed: 0,
        }
    }
}

/// Blahut-Arimoto iterate for a classical channel `W[x][y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaResult {
    /// `I(p; W)` at the final input distribution, in bits.
    pub lower_bits: f64,
    /// `max_x D(W_x ‖ pW)`, an upper bound on the channel capacity.
    pub upper_bits: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn blahut_arimoto(w: &[Vec<f64>], tol_bits: f64, max_iter: usize) -> BaResult {
    blahut_arimoto_below(w, tol_bits, max_iter, f64::NEG_INFINITY)
}

/// As [`blahut_arimoto`], but stops (as converged) once the upper bound
/// drops to `cutoff_bits`: the channel cannot beat a known rate.
pub fn blahut_arimoto_below(
    w: &[Vec<f64>],
    tol_bits: f64,
    max_iter: usize,
    cutoff_bits: f64,
) -> BaResult {
    let cutoff = cutoff_bits * std::f64::consts::LN_2;
    let nx = w.len();
    let ny = w.first().map_or(0, Vec::len);
    let tol = tol_bits * std::f64::consts::LN_2;
    // Σ_y W ln W per row; D_x = self_info[x] − Σ_y W ln q
    let self_info: Vec<f64> = w
        .iter()
        .map(|row| row.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum())
        .collect();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut q = vec![0.0; ny];
    let mut ln_q = vec![0.0; ny];
    let mut d = vec![0.0; nx];
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        q.iter_mut().for_each(|x| *x = 0.0);
        for (px, row) in p.iter().zip(w) {
            for (qy, wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
        for (l, &qy) in ln_q.iter_mut().zip(&q) {
            *l = if qy > 0.0 { qy.ln() } else { 0.0 };
        }
        for ((dx, row), si) in d.iter_mut().zip(w).zip(&self_info) {
            *dx = si - row.iter().zip(&ln_q).map(|(wy, l)| wy * l).sum::<f64>();
        }
        lower = p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower <= tol || upper <= cutoff {
            converged = true;
            break;
        }
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (dx - upper).exp();
            z += *px;
        }
        p.iter_mut().for_each(|x| *x /= z);
    }
    BaResult {
        lower_bits: lower.max(0.0) / std::f64::consts::LN_2,
        upper_bits: upper / std::f64::consts::LN_2,
        input: p,
        iterations,
        converged,
    }
}

/// `I(p; W)` in bits.
pub fn mutual_information(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w.first().map_or(0, Vec::len);
    let mut q = vec![0.0; ny];
    for (px, row) in p.iter().zip(w) {
        for (qy, wy) in q.iter_mut().zip(row) {
            *qy += px * wy;
        }
    }
    let mut i = 0.0;
    for (px, row) in p.iter().zip(w) {
        for (&wy, &qy) in row.iter().zip(&q) {
            if *px > 0.0 && wy > 0.0 {
                i += px * wy * (wy / qy).log2();
            }
        }
    }
    i.max(0.0)
}

/// `W[x][y] = e_y(s_x)`, clamped to `[0,1]` and renormalized per row.
pub fn channel_matrix(inputs: &[StateVec], measurement: &Measurement) -> Vec<Vec<f64>> {
    inputs
        .iter()
        .map(|s| {
            let mut row: Vec<f64> = measurement
                .effects
                .iter()
                .map(|e| e.eval(s).clamp(0.0, 1.0))
                .collect();
            let z: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= z);
            row
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    /// Lower bound on the capacity, in bits.
    pub lower_bound: f64,
    /// Vertices carrying input weight in the best channel.
    pub best_encoding: Vec<usize>,
    pub input_distribution: Vec<f64>,
    pub best_measurement: Measurement,
    pub best_candidate: String,
    pub ba_iterations: usize,
    /// True when every candidate channel converged.
    pub converged: bool,
    pub candidates: usize,
}

fn subsets(k: usize, opts: &CapacityOptions) -> Vec<Vec<usize>> {
    let cap = opts.subset_cap.min(k);
    let exhaustive = k < 63 && (1usize << k) - k - 1 <= EXHAUSTIVE_SUBSETS;
    if exhaustive {
        let mut all: Vec<Vec<usize>> = (0..1usize << k)
            .filter(|m| m.count_ones() >= 2 && m.count_ones() as usize <= cap)
            .map(|m| (0..k).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.seeds)
        .map(|_| {
            let size = rng.random_range(2..=cap);
            let mut s = index::sample(&mut rng, k, size).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Capacity lower bound from the best of a finite list of measurements,
/// each inducing a classical channel on all vertices.
pub fn capacity_lower_bound(model: &GpModel, opts: &CapacityOptions) -> Result<CapacityEstimate> {
    capacity_lower_bound_with(model, opts, None, None)
}

/// As [`capacity_lower_bound`], reusing already computed results.
pub fn capacity_lower_bound_with(
    model: &GpModel,
    opts: &CapacityOptions,
    dist: Option<&DistinguishabilityResult>,
    store: Option<&StorableInfoResult>,
) -> Result<CapacityEstimate> {
    let verts = model.vertices();
    let mut candidates: Vec<(String, Measurement)> = Vec::new();

    let owned_dist;
    let dist = match dist {
        Some(d) => d,
        None => {
            owned_dist = distinguishable_number(verts, model)?;
            &owned_dist
        }
    };
    candidates.push((
        format!("distinguishable-{}", dist.count),
        dist.measurement.clone(),
    ));

    let owned_store;
    let store_meas = match store.and_then(|s| s.primal_measurement.as_ref()) {
        Some(m) => m,
        None => {
            owned_store = storable_info(verts, model)?;
            owned_store.primal_measurement.as_ref().expect("primal filled")
        }
    };
    candidates.push(("storable".into(), store_meas.clone()));

    for set in subsets(verts.len(), opts) {
        let fam: Vec<StateVec> = set.iter().map(|&i| verts[i].clone()).collect();
        let r = storable_info(&fam, model)?;
        let label = format!(
            "discriminate-{}",
            set.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        );
        candidates.push((label, r.primal_measurement.expect("primal filled")));
    }

    let mut best: Option<(BaResult, usize)> = None;
    let mut converged = true;
    for (i, (_, m)) in candidates.iter().enumerate() {
        let w = channel_matrix(verts, m);
        let cutoff = best.as_ref().map_or(f64::NEG_INFINITY, |(b, _)| b.lower_bits);
        let mut ba = blahut_arimoto_below(&w, opts.ba_tol, opts.ba_max_iter, cutoff);
        if i == 0 {
            // uniform input on the distinguishable family: exactly log2 d
            let mut p = vec![0.0; verts.len()];
            for s in &dist.states {
                if let Some(x) = verts.iter().position(|v| v == s) {
                    p[x] = 1.0 / dist.count as f64;
                }
            }
            let info = mutual_information(&p, &w);
            if info > ba.lower_bits {
                ba.lower_bits = info;
                ba.input = p;
            }
        }
        if !ba.converged {
            log::warn!("Blahut-Arimoto did not converge for candidate {}", candidates[i].0);
            converged = false;
        }
        if best.as_ref().is_none_or(|(b, _)| ba.lower_bits > b.lower_bits) {
            best = Some((ba, i));
        }
    }
    let (ba, i) = best.expect("at least two candidates");
    let (label, measurement) = candidates[i].clone();
    Ok(CapacityEstimate {
        lower_bound: ba.lower_bits,
        best_encoding: (0..verts.len()).filter(|&x| ba.input[x] > 1e-9).collect(),
        input_distribution: ba.input,
        best_measurement: measurement,
        best_candidate: label,
        ba_iterations: ba.iterations,
        converged,
        candidates: candidates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn noiseless_channels() {
        let bsc = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = blahut_arimoto(&bsc, 1e-12, 1000);
        assert!(r.converged);
        assert!((r.lower_bits - 1.0).abs() < 1e-12);
        let three = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((blahut_arimoto(&three, 1e-12, 1000).lower_bits - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn binary_symmetric_channel() {
        let e: f64 = 0.1;
        let w = vec![vec![1.0 - e, e], vec![e, 1.0 - e]];
        let h = -e * e.log2() - (1.0 - e) * (1.0 - e).log2();
        let r = blahut_arimoto(&w, 1e-12, 10_000);
        assert!((r.lower_bits - (1.0 - h)).abs() < 1e-10);
    }

    #[test]
    fn z_channel_upper_bound_brackets() {
        let w = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        let r = blahut_arimoto(&w, 1e-10, 100_000);
        assert!(r.converged);
        // closed form: log2(1 + (1-p) p^{p/(1-p)}) with p = 0.5
        let exact = (1.0f64 + 0.5 * 0.5).log2();
        assert!((r.lower_bits - exact).abs() < 1e-9);
        assert!(r.upper_bits >= r.lower_bits);
    }

    #[test]
    fn cutoff_stops_a_dominated_channel() {
        let useless = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let r = blahut_arimoto_below(&useless, 1e-300, 1000, 0.5);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn classical_bit_carries_one_bit() {
        let m = validate_model(&[vec![0.0], vec![1.0]], 1e-9).unwrap();
        let c = capacity_lower_bound(&m, &CapacityOptions::default()).unwrap();
        assert!((c.lower_bound - 1.0).abs() < 1e-9);
        assert!(c.converged);
    }
}
