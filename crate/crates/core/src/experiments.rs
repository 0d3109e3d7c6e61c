//! Monte Carlo drivers shared by the command line tool and the test suites.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `trial_seed(seed, trial)`, so results do not depend on scheduling and
//! rows are always reported in trial order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::fft::{convolve, ConvolutionMethod};
use crate::grid::{GridWindow, Signal};
use crate::hilbert::{hilbert_kernel, random_hilbert_kernel, ConvolutionOperator, LinearOperator};
use crate::random_set::sample_random_set;
use crate::scale::{scale_bilinear_bounds, trial_seed, ScaleBlock, ScaleBoundReport};
use crate::sparse::{build_sparse_collection, domination_ratio, verify_sparsity, DEFAULT_C0};
use crate::weights::{
    power_weight, scale_constants, single_scale_sparse_bound_with, weighted_lp_norm, SingleScaleReport,
};

/// Stream for one trial. The salt keeps experiments sharing a seed apart.
pub fn trial_rng(seed: u64, trial: usize, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
    rng.set_stream(salt);
    rng
}

/// A random subinterval of `window` whose length is `2^U` with `U` uniform
/// in `0..=log₂|window|`.
pub fn random_interval(rng: &mut impl Rng, window: GridWindow) -> GridWindow {
    let n = window.len() as u64;
    let top = 63 - n.leading_zeros();
    let len = 1u64 << rng.random_range(0..=top);
    let start = window.lo + rng.random_range(0..=(n - len)) as i64;
    GridWindow {
        lo: start,
        hi: start + len as i64,
    }
}

/// Independent ±1 values on `interval`.
pub fn random_signs(rng: &mut impl Rng, interval: GridWindow) -> Signal {
    Signal::from_fn(interval, |_| if rng.random::<bool>() { 1.0 } else { -1.0 })
}

/// The shapes used by the sparsity and weighted experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestShape {
    Signs,
    Uniform,
    Spike,
    Constant,
    TwoBumps,
}

const SHAPES: [TestShape; 5] = [
    TestShape::Signs,
    TestShape::Uniform,
    TestShape::Spike,
    TestShape::Constant,
    TestShape::TwoBumps,
];

/// A random test signal supported in `window`.
pub fn random_test_signal(rng: &mut impl Rng, window: GridWindow) -> (TestShape, Signal) {
    let shape = SHAPES[rng.random_range(0..SHAPES.len())];
    let iv = random_interval(rng, window);
    let s = match shape {
        TestShape::Signs => random_signs(rng, iv),
        TestShape::Uniform => Signal::from_fn(iv, |_| rng.random_range(-1.0..1.0)),
        TestShape::Spike => {
            let mut s = Signal::from_fn(iv, |_| rng.random_range(0.0..0.01));
            let at = rng.random_range(0..s.len());
            s.values_mut()[at] = 10f64.powf(rng.random_range(0.0..6.0));
            s
        }
        TestShape::Constant => Signal::from_fn(iv, |_| 1.0),
        TestShape::TwoBumps => {
            let a = random_interval(rng, window);
            let b = random_interval(rng, window);
            let h = rng.random_range(0.1..10.0);
            Signal::indicator(a.lo, a.hi).add(&Signal::indicator(b.lo, b.hi).scaled(h))
        }
    };
    (shape, s)
}

/// Which operator a domination run tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DominatedOperator {
    Hilbert,
    RandomHilbert { alpha: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationRow {
    pub trial: usize,
    pub numerator: f64,
    pub form: f64,
    pub ratio: f64,
    pub cubes: usize,
    pub c0: f64,
}

/// `|⟨Tf, g⟩| / Λ_r(f, g)` on `[0, n)` for random ±1 signals. `f` lives
/// on a random subinterval; `g` is either independent of `f` or equal to
/// `sign(Tf)` on a random subinterval. The truncation is `n`, which is
/// exact for signals inside the window.
pub fn domination_experiment(
    op: DominatedOperator,
    r: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<DominationRow>> {
    if n < 2 || trials == 0 {
        return Err(invalid("need a window of at least two points and one trial"));
    }
    let window = GridWindow::new(0, n as i64)?;
    let hilbert = hilbert_kernel(n as u64);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t, 1);
            let kernel = match op {
                DominatedOperator::Hilbert => hilbert.clone(),
                DominatedOperator::RandomHilbert { alpha } => {
                    random_hilbert_kernel(&sample_random_set(alpha, trial_seed(seed, t), n as u64)?)
                }
            };
            let operator = ConvolutionOperator::new(kernel, ConvolutionMethod::Fft);
            let fi = random_interval(&mut rng, window);
            let f = random_signs(&mut rng, fi);
            let iv = random_interval(&mut rng, window);
            let g = if rng.random::<bool>() {
                random_signs(&mut rng, iv)
            } else {
                let tf = operator.apply(&f);
                Signal::from_fn(iv, |x| if tf.get(x) >= 0.0 { 1.0 } else { -1.0 })
            };
            let rep = domination_ratio(&operator, &f, &g, r)?;
            Ok(DominationRow {
                trial: t,
                numerator: rep.numerator,
                form: rep.form,
                ratio: rep.ratio,
                cubes: rep.cubes,
                c0: rep.c0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SparsityRow {
    pub trial: usize,
    pub f_shape: TestShape,
    pub g_shape: TestShape,
    pub cubes: usize,
    pub c0: f64,
    pub min_density: f64,
    pub sparse: bool,
}

/// Build collections for random `(f, g)` on `[0, n)` and verify them.
pub fn sparsity_experiment(r: f64, n: usize, trials: usize, seed: u64) -> Result<Vec<SparsityRow>> {
    let window = GridWindow::new(0, n as i64)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t, 2);
            let (fs, f) = random_test_signal(&mut rng, window);
            let (gs, g) = random_test_signal(&mut rng, window);
            let s = build_sparse_collection(&f, &g, r, DEFAULT_C0)?;
            let rep = verify_sparsity(&s);
            Ok(SparsityRow {
                trial: t,
                f_shape: fs,
                g_shape: gs,
                cubes: s.len(),
                c0: s.c0.unwrap_or(DEFAULT_C0),
                min_density: rep.min_density,
                sparse: rep.sparse,
            })
        })
        .collect()
}

/// Both single-scale bounds for random `(f, g, realization)` on an
/// interval of length `2^k`; `f` and `g` are uniform on random
/// subintervals.
pub fn scale_bounds_experiment(alpha: f64, k: u32, trials: usize, seed: u64) -> Result<Vec<ScaleBoundReport>> {
    let side = 1i64 << k;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t, 3);
            let block = ScaleBlock::sample(alpha, trial_seed(seed, t), k)?;
            let lo = rng.random_range(-side..side);
            let interval = GridWindow::new(lo, lo + side)?;
            let fi = random_interval(&mut rng, interval);
            let f = Signal::from_fn(fi, |_| rng.random_range(-1.0..1.0));
            let gi = random_interval(&mut rng, interval);
            let g = Signal::from_fn(gi, |_| rng.random_range(-1.0..1.0));
            scale_bilinear_bounds(&f, &g, interval, &block, 0.0)
        })
        .collect()
}

/// Single-scale weighted bound for `w = (1+|x|)^a` on `[−2^{k+2}, 2^{k+2})`
/// with random test signals inside the window.
pub fn single_scale_experiment(
    a: f64,
    p: f64,
    r: f64,
    k: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<SingleScaleReport>> {
    let half = 1i64 << (k + 2);
    let window = GridWindow::new(-half, half)?;
    let w = power_weight(a, window)?;
    let constants = scale_constants(&w, p, r, &crate::grid::dyadic_family(window))?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t, 4);
            let (_, f) = random_test_signal(&mut rng, window);
            let (_, g) = random_test_signal(&mut rng, window);
            single_scale_sparse_bound_with(&f, &g, &w, &constants, k)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedNormRow {
    pub trial: usize,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
}

/// `‖H_α f‖_{ℓ^p(w)}/‖f‖_{ℓ^p(w)}` for `w = (1+|x|)^a`, random `f` on
/// `[−n, n)` and realizations truncated at `2n`. The output norm is taken
/// over the full support of `H_α f`.
pub fn weighted_norm_experiment(
    alpha: f64,
    p: f64,
    a: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<WeightedNormRow>> {
    let n = n as i64;
    let window = GridWindow::new(-n, n)?;
    let wide = power_weight(a, GridWindow::new(-3 * n - 1, 3 * n + 1)?)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t, 5);
            let (_, f) = random_test_signal(&mut rng, window);
            let set = sample_random_set(alpha, trial_seed(seed, t), 2 * n as u64)?;
            let out = convolve(&f, &random_hilbert_kernel(&set), ConvolutionMethod::Fft);
            let input_norm = weighted_lp_norm(&f, &wide, p)?;
            let output_norm = weighted_lp_norm(&out, &wide, p)?;
            Ok(WeightedNormRow {
                trial: t,
                input_norm,
                output_norm,
                ratio: output_norm / input_norm,
            })
        })
        .collect()
}

/// `‖H 1_{[0,n)}‖_{ℓ²→ℓ²}` estimated by power iteration, with the kernel
/// truncated at `truncation` and the output kept on all of ℤ.
pub fn hilbert_window_norm(n: usize, truncation: u64, max_iter: usize, tol: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("empty window"));
    }
    let kernel = hilbert_kernel(truncation);
    let op = ConvolutionOperator::new(kernel, ConvolutionMethod::Fft);
    let adj = op.adjoint();
    let window = GridWindow::new(0, n as i64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e11);
    let mut v = Signal::from_fn(window, |_| rng.random_range(-1.0..1.0));
    let mut prev = 0.0f64;
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let nv = v.lp_norm(2.0);
        v = v.scaled(1.0 / nv);
        let hv = op.apply(&v);
        let value = hv.lp_norm(2.0);
        change = (value - prev).abs() / value;
        if change <= tol {
            return Ok(value);
        }
        prev = value;
        v = adj.apply(&hv).restricted(window);
    }
    Err(LabError::NotConverged {
        iterations: max_iter,
        change,
    })
}

/// Sup of a slice, 0 when empty.
pub fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}
