//! FFT-backed linear convolution on ℤ.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{RealFftPlanner, RealToComplex};
use rustfft::FftPlanner;

use crate::grid::Signal;

thread_local! {
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
    static COMPLEX_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// How a convolution is evaluated. Both give the same numbers up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    Direct,
    #[default]
    Fft,
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn RealToComplex<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Length-n real FFT of `x` zero-padded to n.
pub fn real_spectrum(x: &[f64], n: usize) -> Vec<Complex64> {
    let plan = forward_plan(n);
    let mut input = plan.make_input_vec();
    input[..x.len()].copy_from_slice(x);
    let mut out = plan.make_output_vec();
    plan.process(&mut input, &mut out).expect("fft length");
    out
}

/// Linear convolution of two real sequences, length `a.len() + b.len() - 1`.
pub fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two().max(2);
    let fa = real_spectrum(a, n);
    let fb = real_spectrum(b, n);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inverse_real(&mut prod, n, len)
}

/// Convolve `a` with a kernel whose spectrum at length `n` is already known.
pub fn convolve_with_spectrum(a: &[f64], kernel_spectrum: &[Complex64], n: usize, len: usize) -> Vec<f64> {
    let fa = real_spectrum(a, n);
    let mut prod: Vec<Complex64> = fa.iter().zip(kernel_spectrum).map(|(x, y)| x * y).collect();
    inverse_real(&mut prod, n, len)
}

fn inverse_real(spec: &mut [Complex64], n: usize, len: usize) -> Vec<f64> {
    // imaginary parts of DC and Nyquist must vanish for the c2r transform
    spec[0].im = 0.0;
    if let Some(last) = spec.last_mut() {
        last.im = 0.0;
    }
    let plan = REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    let mut out = plan.make_output_vec();
    plan.process(spec, &mut out).expect("fft length");
    let scale = 1.0 / n as f64;
    out.truncate(len);
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// Direct O(nm) linear convolution.
pub fn convolve_real_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// (f * k)(x) = Σ_n k(n) f(x − n) as a signal on ℤ.
pub fn convolve(f: &Signal, kernel: &Signal, method: ConvolutionMethod) -> Signal {
    let values = match method {
        ConvolutionMethod::Direct => convolve_real_direct(f.values(), kernel.values()),
        ConvolutionMethod::Fft => convolve_real(f.values(), kernel.values()),
    };
    Signal::new(f.offset() + kernel.offset(), values)
}

/// In-place complex FFT (forward: e^{-2πi jm/n}; inverse unnormalized).
pub fn complex_fft(buf: &mut [Complex64], inverse: bool) {
    let plan = COMPLEX_PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Linear convolution of complex sequences.
pub fn convolve_complex(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    let mut fb = vec![Complex64::new(0.0, 0.0); n];
    fb[..b.len()].copy_from_slice(b);
    complex_fft(&mut fa, false);
    complex_fft(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    complex_fft(&mut fa, true);
    let scale = 1.0 / n as f64;
    fa.truncate(len);
    fa.iter_mut().for_each(|v| *v *= scale);
    fa
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_convolution() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.5, -1.0];
        let want = [0.5, 0.0, -0.5, -3.0];
        for (x, y) in convolve_real(&a, &b).iter().zip(want) {
            assert!((x - y).abs() < 1e-13);
        }
        assert_eq!(convolve_real_direct(&a, &b), want.to_vec());
    }

    #[test]
    fn complex_matches_direct() {
        let a: Vec<Complex64> = (0..7).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let b: Vec<Complex64> = (0..5).map(|i| Complex64::new(0.3 * i as f64, 2.0)).collect();
        let got = convolve_complex(&a, &b);
        for k in 0..got.len() {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..a.len() {
                if k >= i && k - i < b.len() {
                    s += a[i] * b[k - i];
                }
            }
            assert!((s - got[k]).norm() < 1e-11);
        }
    }
}
