//! The discrete Hilbert transform, its random variant `H_α`, and the random
//! maximal average `M_α`, all truncated at `|n| ≤ n_max`.

use crate::error::{LabError, Result};
use crate::fft::{convolve, ConvolutionMethod};
use crate::grid::{GridWindow, Signal};
use crate::random_set::RandomSet;

/// A linear map on finitely supported signals.
pub trait LinearOperator: Sync {
    fn apply(&self, f: &Signal) -> Signal;
}

impl<F> LinearOperator for F
where
    F: Fn(&Signal) -> Signal + Sync,
{
    fn apply(&self, f: &Signal) -> Signal {
        self(f)
    }
}

/// The identity map.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl LinearOperator for Identity {
    fn apply(&self, f: &Signal) -> Signal {
        f.clone()
    }
}

/// Convolution `Tf(x) = Σ_n k(n) f(x − n)` with a finitely supported kernel.
#[derive(Debug, Clone)]
pub struct ConvolutionOperator {
    kernel: Signal,
    method: ConvolutionMethod,
}

impl ConvolutionOperator {
    pub fn new(kernel: Signal, method: ConvolutionMethod) -> Self {
        Self { kernel, method }
    }

    /// Truncated discrete Hilbert transform.
    pub fn hilbert(n_max: u64) -> Self {
        Self::new(hilbert_kernel(n_max), ConvolutionMethod::Fft)
    }

    /// `H_α` for one realization.
    pub fn random_hilbert(set: &RandomSet) -> Self {
        Self::new(random_hilbert_kernel(set), ConvolutionMethod::Fft)
    }

    pub fn with_method(mut self, method: ConvolutionMethod) -> Self {
        self.method = method;
        self
    }

    pub fn kernel(&self) -> &Signal {
        &self.kernel
    }

    /// The adjoint, convolution with `k(−n)`.
    pub fn adjoint(&self) -> Self {
        let mut vals = self.kernel.values().to_vec();
        vals.reverse();
        Self::new(Signal::new(-(self.kernel.end() - 1), vals), self.method)
    }
}

impl LinearOperator for ConvolutionOperator {
    fn apply(&self, f: &Signal) -> Signal {
        convolve(f, &self.kernel, self.method)
    }
}

/// Signed power `sign(n)|n|^{1-α}`, the denominator of `H_α`.
pub(crate) fn signed_power(n: i64, alpha: f64) -> f64 {
    let m = n.unsigned_abs() as f64;
    let v = if alpha == 0.0 { m } else { m.powf(1.0 - alpha) };
    if n < 0 {
        -v
    } else {
        v
    }
}

/// `1/n` on `1 ≤ |n| ≤ n_max`, zero at the origin.
pub fn hilbert_kernel(n_max: u64) -> Signal {
    let n_max = n_max as i64;
    Signal::from_fn(GridWindow { lo: -n_max, hi: n_max + 1 }, |n| {
        if n == 0 {
            0.0
        } else {
            1.0 / n as f64
        }
    })
}

/// `X_n / n^{1-α}` on the realization's range.
pub fn random_hilbert_kernel(set: &RandomSet) -> Signal {
    let n_max = set.n_max() as i64;
    let alpha = set.alpha();
    Signal::from_fn(GridWindow { lo: -n_max, hi: n_max + 1 }, |n| {
        if n != 0 && set.x(n) {
            1.0 / signed_power(n, alpha)
        } else {
            0.0
        }
    })
}

/// `Hf(x) = Σ_{0<|n|≤n_max} f(x − n)/n`, stored on `[lo − n_max, hi + n_max)`.
pub fn hilbert_transform(f: &Signal, n_max: u64, method: ConvolutionMethod) -> Signal {
    convolve(f, &hilbert_kernel(n_max), method)
}

/// `H_α f(x) = Σ_{n≠0} X_n n^{α-1} f(x − n)` over the realization's range.
pub fn random_hilbert(f: &Signal, set: &RandomSet, method: ConvolutionMethod) -> Signal {
    convolve(f, &random_hilbert_kernel(set), method)
}

/// `M_α f(x) = sup_N |S_N⁻¹ Σ_{n=1}^N X_n f(x − n)|` over the `N ≤ n_max`
/// with `S_N ≥ 1`. Stored on `[lo + 1, hi + n_max)`, where every nonzero
/// value lives.
pub fn random_maximal(f: &Signal, set: &RandomSet) -> Result<Signal> {
    let active = set.active_positive();
    if active.is_empty() {
        return Err(LabError::Empty(
            "no active site in 1..=n_max, the maximal average is a sup over nothing".into(),
        ));
    }
    let window = GridWindow {
        lo: f.offset() + 1,
        hi: f.end() + set.n_max() as i64,
    };
    Ok(Signal::from_fn(window, |x| {
        let mut sum = 0.0;
        let mut best = 0.0f64;
        for (count, &n) in active.iter().enumerate() {
            sum += f.get(x - n);
            best = best.max(sum.abs() / (count + 1) as f64);
        }
        best
    }))
}
