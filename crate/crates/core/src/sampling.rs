//! Deterministic admissible-sample generation.
//!
//! Every randomized trial derives its own RNG from
//! `(master seed, check name, trial index)` through a stable hash, so adding
//! or reordering checks never perturbs the samples of other checks, and a
//! fixed master seed reproduces every residual bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{real, RealScalar};

/// Default margin δ keeping samples away from evaluator poles.
pub const DEFAULT_MIN_SEPARATION: f64 = 0.05;

const MAX_ATTEMPTS: usize = 100_000;

/// Stable 64-bit sub-seed for one trial. FNV-1a over the inputs with a
/// splitmix64 finalizer; independent of platform and library versions.
pub fn sub_seed(master: u64, check: &str, trial: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let eat = |h: u64, byte: u8| (h ^ byte as u64).wrapping_mul(0x0000_0100_0000_01b3);
    for b in master.to_le_bytes() {
        h = eat(h, b);
    }
    for b in check.as_bytes() {
        h = eat(h, *b);
    }
    for b in trial.to_le_bytes() {
        h = eat(h, b);
    }
    // splitmix64 finalizer
    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The RNG for one trial of one check.
pub fn trial_rng(master: u64, check: &str, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, check, trial))
}

/// Rejection-sample λ uniform in [−1, 1]ⁿ subject to
/// `|λ_i − λ_j + m·γ + m'·γ̃| ≥ δ` for all i ≠ j and m, m' ∈ {−2, …, 2},
/// which keeps every denominator clear of zero including under up to two
/// dynamical shifts.
pub fn sample_lambda<T: RealScalar, R: Rng>(
    rng: &mut R,
    n: usize,
    gamma: f64,
    gamma_tilde: f64,
    delta: f64,
) -> Result<Vec<T>> {
    for _ in 0..MAX_ATTEMPTS {
        let cand: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if lambda_admissible(&cand, gamma, gamma_tilde, delta) {
            return Ok(cand.into_iter().map(real).collect());
        }
    }
    Err(Error::SamplingExhausted {
        attempts: MAX_ATTEMPTS,
    })
}

/// Admissibility predicate behind [`sample_lambda`].
pub fn lambda_admissible(lambda: &[f64], gamma: f64, gamma_tilde: f64, delta: f64) -> bool {
    let n = lambda.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let diff = lambda[i] - lambda[j];
            for m in -2i32..=2 {
                for mp in -2i32..=2 {
                    let v = diff + m as f64 * gamma + mp as f64 * gamma_tilde;
                    if v.abs() < delta {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Rejection-sample positions q uniform in [−1, 1]ⁿ with pairwise
/// separation `|q_i − q_j| ≥ δ`.
pub fn sample_positions<T: RealScalar, R: Rng>(
    rng: &mut R,
    n: usize,
    delta: f64,
) -> Result<Vec<T>> {
    for _ in 0..MAX_ATTEMPTS {
        let cand: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ok = (0..n).all(|i| {
            (i + 1..n).all(|j| (cand[i] - cand[j]).abs() >= delta)
        });
        if ok {
            return Ok(cand.into_iter().map(real).collect());
        }
    }
    Err(Error::SamplingExhausted {
        attempts: MAX_ATTEMPTS,
    })
}
