//! Random arithmetic sets `{n : X_n = 1}` with `P(X_n = 1) = |n|^{-α}`.
//!
//! Every indicator is drawn from a ChaCha8 stream keyed by the seed. The
//! uniform behind `X_n` is the `idx(n)`-th 64-bit word of that stream, where
//! `idx(n) = 2(|n| − 1)` for `n > 0` and `2(|n| − 1) + 1` for `n < 0`. So
//! `X_n` depends only on `(seed, n)`: enlarging the range never perturbs
//! earlier indicators, and any dyadic block `2^{k-1} ≤ |n| < 2^k` is a
//! contiguous run of the stream that can be read without touching the rest.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!("alpha = {alpha} must lie in [0, 1)")));
    }
    Ok(())
}

fn word_index(n: i64) -> u64 {
    2 * (n.unsigned_abs() - 1) + u64::from(n < 0)
}

fn unit_uniform(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Reader positioned on the stream word of `X_n`.
fn stream_at(seed: u64, n: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // word positions count 32-bit words
    rng.set_word_pos(2 * word_index(n) as u128);
    rng
}

/// `P(X_n = 1)`.
pub fn inclusion_probability(alpha: f64, n: i64) -> f64 {
    (n.unsigned_abs() as f64).powf(-alpha)
}

/// `X_n` for a single `n ≠ 0`, by random access into the stream.
pub fn indicator(alpha: f64, seed: u64, n: i64) -> bool {
    assert!(n != 0, "X_0 is not defined");
    let mut rng = stream_at(seed, n);
    unit_uniform(rng.next_u64()) < inclusion_probability(alpha, n)
}

/// Indicators for `lo ≤ |n| < hi`, returned as (positive, negative) with
/// entry `i` describing `±(lo + i)`.
pub fn sample_band(alpha: f64, seed: u64, lo: u64, hi: u64) -> (Vec<bool>, Vec<bool>) {
    assert!(lo >= 1 && hi >= lo);
    let count = (hi - lo) as usize;
    let mut pos = Vec::with_capacity(count);
    let mut neg = Vec::with_capacity(count);
    if count == 0 {
        return (pos, neg);
    }
    let mut rng = stream_at(seed, lo as i64);
    for m in lo..hi {
        let p = (m as f64).powf(-alpha);
        pos.push(unit_uniform(rng.next_u64()) < p);
        neg.push(unit_uniform(rng.next_u64()) < p);
    }
    (pos, neg)
}

/// One realization of `{X_n : 1 ≤ |n| ≤ n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomSet {
    alpha: f64,
    seed: u64,
    n_max: u64,
    positive: Vec<bool>,
    negative: Vec<bool>,
}

/// Draw the realization for `(alpha, seed)` on `1 ≤ |n| ≤ n_max`.
pub fn sample_random_set(alpha: f64, seed: u64, n_max: u64) -> Result<RandomSet> {
    check_alpha(alpha)?;
    let (positive, negative) = sample_band(alpha, seed, 1, n_max + 1);
    Ok(RandomSet {
        alpha,
        seed,
        n_max,
        positive,
        negative,
    })
}

impl RandomSet {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// `X_n`; zero outside `1 ≤ |n| ≤ n_max`.
    pub fn x(&self, n: i64) -> bool {
        let m = n.unsigned_abs();
        if m == 0 || m > self.n_max {
            return false;
        }
        if n > 0 {
            self.positive[(m - 1) as usize]
        } else {
            self.negative[(m - 1) as usize]
        }
    }

    /// `Y_n = X_n − |n|^{-α}`, the centered indicator.
    pub fn y(&self, n: i64) -> f64 {
        f64::from(u8::from(self.x(n))) - inclusion_probability(self.alpha, n)
    }

    /// Active positive sites `n ≥ 1` in increasing order.
    pub fn active_positive(&self) -> Vec<i64> {
        self.positive
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as i64 + 1)
            .collect()
    }

    /// All active sites, negative ones first, increasing.
    pub fn active(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self
            .negative
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &b)| b)
            .map(|(i, _)| -(i as i64 + 1))
            .collect();
        out.extend(self.active_positive());
        out
    }

    /// Replace the indicator at `n`; for hand-built test configurations.
    pub fn with_indicator(mut self, n: i64, value: bool) -> Self {
        let m = n.unsigned_abs();
        assert!(m >= 1 && m <= self.n_max);
        if n > 0 {
            self.positive[(m - 1) as usize] = value;
        } else {
            self.negative[(m - 1) as usize] = value;
        }
        self
    }

    /// A realization with no active sites at all.
    pub fn empty(alpha: f64, n_max: u64) -> Self {
        Self {
            alpha,
            seed: 0,
            n_max,
            positive: vec![false; n_max as usize],
            negative: vec![false; n_max as usize],
        }
    }
}
