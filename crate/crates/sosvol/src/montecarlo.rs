//! Seeded uniform sampling over box and ball domains, and reference volume
//! estimation with confidence intervals.
//!
//! Sampling is keyed by `(seed, stream)`: the sample space is split into
//! fixed-size chunks and chunk `i` draws from stream `i` of a ChaCha
//! counter-mode generator. Results are therefore bitwise identical whether
//! chunks are processed sequentially or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::semialg::{OuterDomain, SemialgebraicSet, Shape};

/// Per-stream chunk size; fixed so the seed-space partition never changes.
const CHUNK: usize = 1 << 16;

/// Sampling strategy for [`volume_with_mode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Seeded pseudorandom points; estimates carry a standard error.
    Pseudo,
    /// Halton low-discrepancy points; no i.i.d. error model, so the
    /// estimate is emitted without a standard error.
    LowDiscrepancy,
}

/// Volume estimate `vol X * (hits / samples)`.
#[derive(Debug, Clone)]
pub struct VolumeEstimate {
    pub value: f64,
    /// `vol X * sqrt(p(1-p)/samples)`; absent in low-discrepancy mode.
    pub std_error: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub mode: SamplingMode,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_point(rng: &mut ChaCha12Rng, shape: &Shape, n: usize, out: &mut Vec<f64>) {
    out.clear();
    match shape {
        Shape::Box { half_widths } => {
            for a in half_widths.iter().take(n) {
                let u: f64 = rng.gen();
                out.push(a * (2.0 * u - 1.0));
            }
        }
        Shape::Ball { radius } => {
            // Gaussian direction normalized, radius = R * U^(1/n).
            loop {
                let mut norm_sq = 0.0;
                out.clear();
                for _ in 0..n {
                    let u1: f64 = rng.gen();
                    let u2: f64 = rng.gen();
                    let z =
                        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                    norm_sq += z * z;
                    out.push(z);
                }
                if norm_sq > 1e-300 {
                    let u: f64 = rng.gen();
                    let scale = radius * u.powf(1.0 / n as f64) / norm_sq.sqrt();
                    for v in out.iter_mut() {
                        *v *= scale;
                    }
                    break;
                }
            }
        }
    }
}

/// Uniform i.i.d. points of `X`, deterministic for a fixed seed.
pub fn sample(x_dom: &OuterDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = x_dom.dimension();
    let shape = x_dom.shape().clone();
    let chunks: Vec<(u64, usize)> = (0..count.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(count - c * CHUNK)))
        .collect();
    let mut parts: Vec<Vec<Vec<f64>>> = chunks
        .par_iter()
        .map(|&(stream, len)| {
            let mut rng = rng_for(seed, stream);
            let mut buf = Vec::with_capacity(n);
            let mut pts = Vec::with_capacity(len);
            for _ in 0..len {
                draw_point(&mut rng, &shape, n, &mut buf);
                pts.push(buf.clone());
            }
            pts
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for part in parts.iter_mut() {
        out.append(part);
    }
    out
}

/// Applies `f` to every sample point and counts hits, without materializing
/// the points. Chunk results are combined in stream order.
pub fn count_hits<F>(x_dom: &OuterDomain, count: usize, seed: u64, f: F) -> u64
where
    F: Fn(&[f64]) -> bool + Sync,
{
    let n = x_dom.dimension();
    let shape = x_dom.shape().clone();
    let chunks: Vec<(u64, usize)> = (0..count.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(count - c * CHUNK)))
        .collect();
    chunks
        .par_iter()
        .map(|&(stream, len)| {
            let mut rng = rng_for(seed, stream);
            let mut buf = Vec::with_capacity(n);
            let mut hits = 0u64;
            for _ in 0..len {
                draw_point(&mut rng, &shape, n, &mut buf);
                if f(&buf) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// Monte Carlo estimate of `vol K` by uniform sampling of `X`.
/// Assumes `K` is contained in `X` (certified elsewhere).
pub fn volume(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    count: usize,
    seed: u64,
) -> VolumeEstimate {
    volume_with_mode(k_set, x_dom, count, seed, SamplingMode::Pseudo)
}

pub fn volume_with_mode(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    count: usize,
    seed: u64,
    mode: SamplingMode,
) -> VolumeEstimate {
    let vol_x = x_dom.volume();
    match mode {
        SamplingMode::Pseudo => {
            let hits = count_hits(x_dom, count, seed, |x| k_set.contains(x));
            let p_hat = hits as f64 / count as f64;
            VolumeEstimate {
                value: vol_x * p_hat,
                std_error: Some(vol_x * (p_hat * (1.0 - p_hat) / count as f64).sqrt()),
                samples: count,
                seed,
                mode,
            }
        }
        SamplingMode::LowDiscrepancy => {
            let hits = halton_hits(k_set, x_dom, count);
            VolumeEstimate {
                value: vol_x * hits as f64 / count as f64,
                std_error: None,
                samples: count,
                seed,
                mode,
            }
        }
    }
}

const HALTON_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn halton_hits(k_set: &SemialgebraicSet, x_dom: &OuterDomain, count: usize) -> u64 {
    let n = x_dom.dimension();
    assert!(
        n <= HALTON_PRIMES.len(),
        "low-discrepancy mode supports up to 8 dimensions"
    );
    let mut hits = 0u64;
    let mut kept = 0usize;
    let mut index = 1u64;
    // For balls, points are drawn in the bounding box and rejected outside.
    let (scales, reject_ball) = match x_dom.shape() {
        Shape::Box { half_widths } => (half_widths.clone(), None),
        Shape::Ball { radius } => (vec![*radius; n], Some(*radius)),
    };
    let mut x = vec![0.0; n];
    while kept < count {
        for k in 0..n {
            x[k] = scales[k] * (2.0 * halton(index, HALTON_PRIMES[k]) - 1.0);
        }
        index += 1;
        if let Some(r) = reject_ball {
            if x.iter().map(|v| v * v).sum::<f64>() > r * r {
                continue;
            }
        }
        kept += 1;
        if k_set.contains(&x) {
            hits += 1;
        }
    }
    hits
}
