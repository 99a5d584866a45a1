use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy_constant;
use crate::cf::CostSpec;
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Sample mean of `ψ` itself, which vanishes when `μ` is the mean constant.
    pub psi_mean: f64,
    pub psi_mean_stderr: f64,
}

/// `ψ(x) = c(⌊1/x⌋) + μ log x`, with `ψ(0) = 0`.
fn psi(x: f64, c: &CostSpec, mu: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let digit = (1.0 / x).floor();
    c.at(if digit >= u64::MAX as f64 { u64::MAX } else { digit as u64 }) + mu * x.ln()
}

fn gauss_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let y = 1.0 / x;
    y - y.floor()
}

/// Monte-Carlo estimate of `(2/𝔥(T)) (1/n) E_ξ[(Σ_{k<n} ψ(T^k x))²]` with `x`
/// drawn from the Gauss measure as `2^U − 1`.
///
/// Floating-point orbits only shadow true orbits, so this is a diagnostic.
/// Results depend only on `seed`, not on the thread count.
pub fn variance_birkhoff_estimate(
    c: &CostSpec,
    mu: f64,
    n_iter: u64,
    n_samples: u64,
    seed: u64,
) -> Result<BirkhoffEstimate> {
    if n_iter == 0 || n_samples == 0 {
        return Err(Error::Precondition("n_iter and n_samples must be at least 1".into()));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<[NeumaierSum; 4]> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = CHUNK.min(n_samples - chunk * CHUNK);
            let mut sums: [NeumaierSum; 4] = Default::default();
            for _ in 0..count {
                let u: f64 = rng.gen();
                let mut x = u.exp2() - 1.0;
                let first = psi(x, c, mu);
                let mut total = 0.0;
                for _ in 0..n_iter {
                    total += psi(x, c, mu);
                    x = gauss_step(x);
                }
                let y = total * total / n_iter as f64;
                sums[0].add(y);
                sums[1].add(y * y);
                sums[2].add(first);
                sums[3].add(first * first);
            }
            sums
        })
        .collect();
    let mut sums: [NeumaierSum; 4] = Default::default();
    for p in &partial {
        for (acc, part) in sums.iter_mut().zip(p) {
            acc.merge(part);
        }
    }
    let n = n_samples as f64;
    let moments = |sum: &NeumaierSum, sq: &NeumaierSum| {
        let mean = sum.value() / n;
        let var = if n_samples > 1 {
            ((sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, (var / n).sqrt())
    };
    let (mean, se) = moments(&sums[0], &sums[1]);
    let (psi_mean, psi_se) = moments(&sums[2], &sums[3]);
    let scale = 2.0 / entropy_constant();
    Ok(BirkhoffEstimate {
        estimate: scale * mean,
        stderr: scale * se,
        psi_mean,
        psi_mean_stderr: psi_se,
    })
}
