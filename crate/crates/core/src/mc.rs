//! Seeded Monte Carlo plumbing.
//!
//! Samples are drawn in fixed-size chunks. Chunk `k` uses a ChaCha stream
//! selected by `k`, and chunk partial sums are combined in chunk order, so an
//! estimate depends only on `(seed, samples)` and never on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            std_err: self.std_err * k.abs(),
            samples: self.samples,
        }
    }

    /// `|value - target| <= k * std_err`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err
    }
}

/// splitmix64 finalizer; used to derive independent seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    sum: f64,
    sum_sq: f64,
    count: usize,
}

fn finish(total: Partial) -> McEstimate {
    let m = total.count as f64;
    let mean = total.sum / m;
    let var = ((total.sum_sq / m) - mean * mean).max(0.0);
    let std_err = if total.count > 1 {
        (var * m / (m - 1.0) / m).sqrt()
    } else {
        f64::INFINITY
    };
    McEstimate {
        value: mean,
        std_err,
        samples: total.count,
    }
}

fn chunk_count(samples: usize) -> usize {
    samples.div_ceil(CHUNK)
}

/// Sample mean of `f` with its standard error.
pub fn mean<F>(seed: u64, samples: usize, f: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let partials: Vec<Result<Partial>> = (0..chunk_count(samples))
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k as u64);
            let len = CHUNK.min(samples - k * CHUNK);
            let mut p = Partial::default();
            for _ in 0..len {
                let v = f(&mut rng)?;
                p.sum += v;
                p.sum_sq += v * v;
                p.count += 1;
            }
            Ok(p)
        })
        .collect();
    let mut total = Partial::default();
    for p in partials {
        let p = p?;
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.count += p.count;
    }
    Ok(finish(total))
}

/// Sample means of the `k` components of `f`, all from the same draws.
pub fn mean_many<F>(seed: u64, samples: usize, k: usize, f: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    let partials: Vec<Result<Vec<Partial>>> = (0..chunk_count(samples))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut ps = vec![Partial::default(); k];
            for _ in 0..len {
                let vs = f(&mut rng)?;
                for (p, v) in ps.iter_mut().zip(vs) {
                    p.sum += v;
                    p.sum_sq += v * v;
                    p.count += 1;
                }
            }
            Ok(ps)
        })
        .collect();
    let mut totals = vec![Partial::default(); k];
    for ps in partials {
        for (t, p) in totals.iter_mut().zip(ps?) {
            t.sum += p.sum;
            t.sum_sq += p.sum_sq;
            t.count += p.count;
        }
    }
    Ok(totals.into_iter().map(finish).collect())
}

/// Maximum of `f` over `samples` seeded draws; `None` values are skipped.
/// Returns the maximum and the number of values that entered it.
pub fn sup<F>(seed: u64, samples: usize, f: F) -> Result<(f64, usize)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<f64>> + Sync,
{
    fold_extreme(seed, samples, f, f64::NEG_INFINITY, f64::max)
}

pub fn inf<F>(seed: u64, samples: usize, f: F) -> Result<(f64, usize)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<f64>> + Sync,
{
    fold_extreme(seed, samples, f, f64::INFINITY, f64::min)
}

fn fold_extreme<F>(
    seed: u64,
    samples: usize,
    f: F,
    init: f64,
    pick: fn(f64, f64) -> f64,
) -> Result<(f64, usize)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<f64>> + Sync,
{
    let partials: Vec<Result<(f64, usize)>> = (0..chunk_count(samples))
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k as u64);
            let len = CHUNK.min(samples - k * CHUNK);
            let mut best = init;
            let mut used = 0;
            for _ in 0..len {
                if let Some(v) = f(&mut rng)? {
                    best = pick(best, v);
                    used += 1;
                }
            }
            Ok((best, used))
        })
        .collect();
    let mut best = init;
    let mut used = 0;
    for p in partials {
        let (b, u) = p?;
        best = pick(best, b);
        used += u;
    }
    Ok((best, used))
}
