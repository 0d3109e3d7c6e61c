//! Dyadic scale blocks `T_k` of `H_α − H`, their Fourier multipliers, and the
//! probabilistic experiments built on them.
//!
//! `T_k f(x) = Σ_{2^{k-1} ≤ |n| < 2^k} c_n f(x − n)` with
//! `c_n = Y_n / (sign(n)|n|^{1-α})`. Operator norms are taken in the
//! periodized model on `ℤ/Mℤ`, `M = 2^{k+3}`: there the convolution is a
//! circulant matrix whose singular values are exactly `|Z(j/M)|`, with
//! `Z(θ) = Σ c_n e^{2πi nθ}`. Inputs supported on an interval of length
//! `2^k` never wrap around at this period, so pairings on ℤ and on `ℤ/Mℤ`
//! agree.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::fft::{convolve, convolve_with_spectrum, real_spectrum, ConvolutionMethod};
use crate::grid::{bilinear_pairing, interval_average, GridWindow, Signal};
use crate::hilbert::signed_power;
use crate::random_set::{inclusion_probability, sample_band, RandomSet};
use crate::stats::{linear_fit, median};

/// The scale-`k` piece of `H_α − H` for one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleBlock {
    k: u32,
    alpha: f64,
    /// `c_n` for `n = 2^{k-1} + i`.
    positive: Vec<f64>,
    /// `c_{-n}` for `n = 2^{k-1} + i`.
    negative: Vec<f64>,
}

fn check_level(k: u32) -> Result<()> {
    if !(1..=40).contains(&k) {
        return Err(invalid(format!("scale index k = {k} must be in 1..=40")));
    }
    Ok(())
}

impl ScaleBlock {
    /// Build from explicit coefficients; `positive[i]` is `c_{2^{k-1}+i}`.
    pub fn from_coefficients(k: u32, alpha: f64, positive: Vec<f64>, negative: Vec<f64>) -> Result<Self> {
        check_level(k)?;
        let width = 1usize << (k - 1);
        if positive.len() > width || negative.len() > width {
            return Err(invalid(format!(
                "scale {k} holds at most {width} coefficients per sign"
            )));
        }
        Ok(Self {
            k,
            alpha,
            positive,
            negative,
        })
    }

    pub fn zero(k: u32, alpha: f64) -> Result<Self> {
        Self::from_coefficients(k, alpha, Vec::new(), Vec::new())
    }

    /// The block of a realization, truncated at the realization's `n_max`.
    pub fn from_random_set(set: &RandomSet, k: u32) -> Result<Self> {
        check_level(k)?;
        let lo = 1u64 << (k - 1);
        let hi = (1u64 << k).min(set.n_max() + 1).max(lo);
        let alpha = set.alpha();
        let coeff = |n: i64| set.y(n) / signed_power(n, alpha);
        let positive = (lo..hi).map(|m| coeff(m as i64)).collect();
        let negative = (lo..hi).map(|m| coeff(-(m as i64))).collect();
        Self::from_coefficients(k, alpha, positive, negative)
    }

    /// The block of the realization keyed by `seed`, drawing only the
    /// indicators with `2^{k-1} ≤ |n| < 2^k`.
    pub fn sample(alpha: f64, seed: u64, k: u32) -> Result<Self> {
        check_level(k)?;
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid(format!("alpha = {alpha} must lie in [0, 1)")));
        }
        let lo = 1u64 << (k - 1);
        let (pos, neg) = sample_band(alpha, seed, lo, 1u64 << k);
        let coeffs = |bits: &[bool], sign: i64| -> Vec<f64> {
            bits.iter()
                .enumerate()
                .map(|(i, &b)| {
                    let n = sign * (lo + i as u64) as i64;
                    (f64::from(u8::from(b)) - inclusion_probability(alpha, n)) / signed_power(n, alpha)
                })
                .collect()
        };
        Self::from_coefficients(k, alpha, coeffs(&pos, 1), coeffs(&neg, -1))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn lo(&self) -> i64 {
        1i64 << (self.k - 1)
    }

    /// `c_n`, zero off the block.
    pub fn coefficient(&self, n: i64) -> f64 {
        let i = n.abs() - self.lo();
        let side = if n > 0 { &self.positive } else { &self.negative };
        if i < 0 || i >= side.len() as i64 {
            0.0
        } else {
            side[i as usize]
        }
    }

    /// `(n, c_n)` over the block.
    pub fn coefficients(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let lo = self.lo();
        let pos = self.positive.iter().enumerate().map(move |(i, &c)| (lo + i as i64, c));
        let neg = self.negative.iter().enumerate().map(move |(i, &c)| (-(lo + i as i64), c));
        neg.chain(pos)
    }

    /// `2^{-(k-1)(1-α)}`, which dominates every `|c_n|`.
    pub fn coefficient_bound(&self) -> f64 {
        2f64.powf(-((self.k - 1) as f64) * (1.0 - self.alpha))
    }

    /// Bernstein grid size `2^{k+3}`.
    pub fn grid_size(&self) -> usize {
        1usize << (self.k + 3)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients().map(|(_, c)| c.abs()).sum()
    }

    /// Largest `|n|` carried by the block.
    pub fn reach(&self) -> i64 {
        let len = self.positive.len().max(self.negative.len()) as i64;
        if len == 0 {
            0
        } else {
            self.lo() + len - 1
        }
    }

    /// The convolution kernel on `[-reach, reach]`.
    pub fn kernel(&self) -> Signal {
        let r = self.reach();
        Signal::from_fn(GridWindow { lo: -r, hi: r + 1 }, |n| self.coefficient(n))
    }

    /// Coefficients folded onto `ℤ/mℤ`.
    fn periodized(&self, m: usize) -> Vec<f64> {
        let mut x = vec![0.0; m];
        for (n, c) in self.coefficients() {
            x[n.rem_euclid(m as i64) as usize] += c;
        }
        x
    }
}

/// `T_k f`, the truncated convolution with the block's coefficients.
pub fn scale_block_apply(f: &Signal, block: &ScaleBlock, method: ConvolutionMethod) -> Signal {
    convolve(f, &block.kernel(), method)
}

/// Circular convolution of a length-`M` vector with the block on `ℤ/Mℤ`.
pub fn periodic_apply(block: &ScaleBlock, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let kernel = block.periodized(m);
    let mut out = vec![0.0; m];
    for (j, &c) in kernel.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (i, &v) in f.iter().enumerate() {
            out[(i + j) % m] += c * v;
        }
    }
    out
}

/// `Z(θ_j)` on the Bernstein grid `θ_j = j / 2^{k+3}`.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierProfile {
    pub k: u32,
    pub values: Vec<Complex64>,
}

impl MultiplierProfile {
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Index of the grid point carrying the sup.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, z) in self.values.iter().enumerate() {
            if z.norm() > self.values[best].norm() {
                best = j;
            }
        }
        best
    }
}

/// Evaluate `Z` on `m` equispaced points with one zero-padded real FFT.
pub fn multiplier_on_grid(block: &ScaleBlock, m: usize) -> Result<Vec<Complex64>> {
    let needed = 2 * block.reach() as usize + 1;
    if m < needed {
        return Err(invalid(format!(
            "grid of {m} points aliases a block reaching ±{}",
            block.reach()
        )));
    }
    let half = real_spectrum(&block.periodized(m), m);
    // the real FFT uses e^{-2πi}, Z uses e^{+2πi}: Z_j = conj(X_j)
    Ok((0..m)
        .map(|j| if j <= m / 2 { half[j].conj() } else { half[m - j] })
        .collect())
}

fn grid_sup(block: &ScaleBlock, m: usize) -> Result<f64> {
    let needed = 2 * block.reach() as usize + 1;
    if m < needed {
        return Err(invalid(format!("grid of {m} points aliases the block")));
    }
    let half = real_spectrum(&block.periodized(m), m);
    Ok(half.iter().fold(0.0, |acc, z| acc.max(z.norm())))
}

pub fn multiplier_profile(block: &ScaleBlock) -> MultiplierProfile {
    MultiplierProfile {
        k: block.k,
        values: multiplier_on_grid(block, block.grid_size()).expect("Bernstein grid never aliases"),
    }
}

/// `max_j |Z(j/2^{k+3})|`: the exact ℓ² operator norm in the periodized
/// model. The sup of `|Z|` over the whole circle is within an absolute
/// factor of it (Bernstein's inequality for a polynomial of degree < 2^k).
pub fn opnorm_multiplier(block: &ScaleBlock) -> f64 {
    grid_sup(block, block.grid_size()).expect("Bernstein grid never aliases")
}

/// `max |Z|` on a grid `refine` times finer than the Bernstein grid.
pub fn opnorm_refined(block: &ScaleBlock, refine: usize) -> f64 {
    grid_sup(block, block.grid_size() * refine.max(1)).expect("refined grid never aliases")
}

/// One Monte Carlo draw of the concentration experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRow {
    pub alpha: f64,
    pub k: u32,
    pub seed: u64,
    pub opnorm: f64,
    pub bound: f64,
    pub exceed: bool,
}

/// Per-scale summary of the concentration experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSummary {
    pub k: u32,
    pub trials: usize,
    pub exceedances: usize,
    pub exceed_frequency: f64,
    /// Median of `‖T_k‖ / (√k · 2^{-k(1-α)/2})`.
    pub median_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationTable {
    pub rows: Vec<ConcentrationRow>,
    pub summary: Vec<ConcentrationSummary>,
}

/// `√k · 2^{-k(1-α)/2}`, the typical size of `‖T_k‖`.
pub fn concentration_scale(alpha: f64, k: u32) -> f64 {
    (k as f64).sqrt() * 2f64.powf(-(k as f64) * (1.0 - alpha) / 2.0)
}

/// Seed used by trial `t` of an experiment seeded with `base`.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// Empirical frequency of `‖T_k‖ > C √k 2^{-k(1-α)/2}` for each `k`.
/// Trial `t` uses the realization seeded by `trial_seed(seed, t)` for every
/// scale. Rows come out sorted by `(k, trial)`.
pub fn concentration_experiment(
    alpha: f64,
    ks: std::ops::RangeInclusive<u32>,
    trials: usize,
    c: f64,
    seed: u64,
) -> Result<ConcentrationTable> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!("alpha = {alpha} must lie in [0, 1)")));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for k in ks {
        check_level(k)?;
        let scale = concentration_scale(alpha, k);
        let bound = c * scale;
        let norms: Vec<Result<(u64, f64)>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let s = trial_seed(seed, t);
                Ok((s, opnorm_multiplier(&ScaleBlock::sample(alpha, s, k)?)))
            })
            .collect();
        let mut ratios = Vec::with_capacity(trials);
        let mut exceedances = 0;
        for item in norms {
            let (s, opnorm) = item?;
            let exceed = opnorm > bound;
            exceedances += usize::from(exceed);
            ratios.push(opnorm / scale);
            rows.push(ConcentrationRow {
                alpha,
                k,
                seed: s,
                opnorm,
                bound,
                exceed,
            });
        }
        summary.push(ConcentrationSummary {
            k,
            trials,
            exceedances,
            exceed_frequency: exceedances as f64 / trials as f64,
            median_ratio: median(&ratios),
        });
    }
    Ok(ConcentrationTable { rows, summary })
}

/// Both sides of the two single-scale bounds for one `(f, g, T_k)`.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleBoundReport {
    pub k: u32,
    pub alpha: f64,
    pub eps: f64,
    /// `|⟨T_k f, g⟩|`.
    pub lhs: f64,
    /// Realized `‖T_k‖_{ℓ²→ℓ²}` (periodized model).
    pub opnorm: f64,
    /// `‖T_k‖ ⟨f⟩_{I,2} ⟨g⟩_{I,2} |I|`.
    pub l2_bound_realized: f64,
    /// `2^{-k(1-α)/2+ε} ⟨f⟩_{I,2} ⟨g⟩_{I,2} |I|`.
    pub l2_bound_nominal: f64,
    /// `‖T_k‖ / 2^{-k(1-α)/2}`, the random constant of the ℓ² bound.
    pub realized_constant: f64,
    /// `2^{kα} ⟨f⟩_{I,1} ⟨g⟩_{I,1} |I|`.
    pub l1_bound: f64,
}

impl ScaleBoundReport {
    pub fn l1_ratio(&self) -> f64 {
        ratio(self.lhs, self.l1_bound)
    }

    pub fn l2_ratio(&self) -> f64 {
        ratio(self.lhs, self.l2_bound_realized)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Evaluate `|⟨T_k f, g⟩|` against both right-hand sides for `f, g`
/// supported in `interval = [lo, lo + 2^k)`. Averages are over the interval
/// itself.
pub fn scale_bilinear_bounds(
    f: &Signal,
    g: &Signal,
    interval: GridWindow,
    block: &ScaleBlock,
    eps: f64,
) -> Result<ScaleBoundReport> {
    let k = block.k;
    if interval.len() != 1usize << k {
        return Err(invalid(format!(
            "interval has length {}, expected 2^{k}",
            interval.len()
        )));
    }
    for s in [f, g] {
        if let Some((lo, hi)) = s.support() {
            if !interval.contains_range(lo, hi) {
                return Err(LabError::SupportOutsideWindow {
                    lo,
                    hi,
                    window_lo: interval.lo,
                    window_hi: interval.hi,
                });
            }
        }
    }
    let len = interval.len() as f64;
    let tf = scale_block_apply(f, block, ConvolutionMethod::Fft);
    let lhs = bilinear_pairing(&tf, g).abs();
    let avg = |s: &Signal, r: f64| interval_average(s, interval.lo, interval.hi, r);
    let l2 = avg(f, 2.0)? * avg(g, 2.0)? * len;
    let l1 = avg(f, 1.0)? * avg(g, 1.0)? * len;
    let opnorm = opnorm_multiplier(block);
    let typical = 2f64.powf(-(k as f64) * (1.0 - block.alpha) / 2.0);
    Ok(ScaleBoundReport {
        k,
        alpha: block.alpha,
        eps,
        lhs,
        opnorm,
        l2_bound_realized: opnorm * l2,
        l2_bound_nominal: typical * 2f64.powf(eps) * l2,
        realized_constant: opnorm / typical,
        l1_bound: 2f64.powf(k as f64 * block.alpha) * l1,
    })
}

/// The block compressed to `[0, len)`, `x ↦ 1_{[0,len)} T_k (1_{[0,len)} x)`,
/// applied through cached FFT spectra.
struct CompressedBlock {
    len: usize,
    reach: usize,
    n: usize,
    forward: Vec<Complex64>,
    backward: Vec<Complex64>,
}

impl CompressedBlock {
    fn new(block: &ScaleBlock, len: usize) -> Self {
        let kernel = block.kernel();
        let reach = block.reach() as usize;
        let n = (len + kernel.len()).next_power_of_two();
        let forward = real_spectrum(kernel.values(), n);
        let mut rev = kernel.values().to_vec();
        rev.reverse();
        let backward = real_spectrum(&rev, n);
        Self {
            len,
            reach,
            n,
            forward,
            backward,
        }
    }

    fn run(&self, x: &[f64], spectrum: &[Complex64]) -> Vec<f64> {
        let full = convolve_with_spectrum(x, spectrum, self.n, self.len + 2 * self.reach);
        full[self.reach..self.reach + self.len].to_vec()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, &self.forward)
    }

    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, &self.backward)
    }
}

fn lp(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn dual_direction(x: &[f64], q: f64) -> Vec<f64> {
    x.iter().map(|v| v.signum() * v.abs().powf(q - 1.0)).collect()
}

/// Boyd's nonlinear power method for `‖A‖_{ℓ^r → ℓ^{r'}}` from one start.
fn boyd_rr(op: &CompressedBlock, r: f64, start: Vec<f64>, max_iter: usize) -> f64 {
    let rp = r / (r - 1.0);
    let mut x = start;
    let nx = lp(&x, r);
    if nx == 0.0 {
        return 0.0;
    }
    x.iter_mut().for_each(|v| *v /= nx);
    let mut value = 0.0f64;
    for _ in 0..max_iter {
        let y = op.apply(&x);
        let new_value = lp(&y, rp);
        if new_value == 0.0 {
            return value;
        }
        let z = op.apply_transpose(&dual_direction(&y, rp));
        let mut next = dual_direction(&z, rp);
        let nn = lp(&next, r);
        if nn == 0.0 {
            return value.max(new_value);
        }
        next.iter_mut().for_each(|v| *v /= nn);
        let converged = (new_value - value).abs() <= 1e-12 * new_value;
        value = value.max(new_value);
        x = next;
        if converged {
            break;
        }
    }
    value
}

/// Lower estimate of `‖1_I T_k 1_I‖_{ℓ^r → ℓ^{r'}}` for `|I| = len`: the best
/// value of Boyd's iteration over point masses at both ends and the middle,
/// a random ±1 start and the plane wave at the multiplier's argmax.
pub fn block_rr_norm(block: &ScaleBlock, r: f64, len: usize, seed: u64) -> Result<f64> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(invalid(format!("r = {r} must lie in (1, 2]")));
    }
    if len == 0 {
        return Err(invalid("empty interval"));
    }
    let op = CompressedBlock::new(block, len);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for pos in [0, len / 2, len - 1] {
        let mut d = vec![0.0; len];
        d[pos] = 1.0;
        starts.push(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    starts.push((0..len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect());
    let profile = multiplier_profile(block);
    let theta = profile.theta(profile.argmax());
    starts.push(
        (0..len)
            .map(|x| (2.0 * std::f64::consts::PI * theta * x as f64).cos())
            .collect(),
    );
    Ok(starts
        .into_iter()
        .map(|s| boyd_rr(&op, r, s, 200))
        .fold(0.0, f64::max))
}

/// Scale-by-scale constants `‖1_I T_k 1_I‖_{r→r'} · |I|^{2/r − 1}` with
/// `|I| = 2^k` (the constant of `|⟨T_k f, g⟩| ≤ C_k ⟨f⟩_{I,r}⟨g⟩_{I,r}|I|`)
/// and the fitted decay exponent of their medians over realizations.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub r: f64,
    pub ks: Vec<u32>,
    pub median_constants: Vec<f64>,
    /// `−slope` of `log₂ C_k` against `k`.
    pub fitted_eta: f64,
}

pub fn rr_decay_fit(
    alpha: f64,
    r: f64,
    ks: &[u32],
    realizations: usize,
    seed: u64,
) -> Result<DecayFit> {
    if realizations == 0 || ks.len() < 2 {
        return Err(invalid("need at least one realization and two scales"));
    }
    let mut medians = Vec::with_capacity(ks.len());
    for &k in ks {
        let len = 1usize << k;
        let consts: Vec<Result<f64>> = (0..realizations)
            .into_par_iter()
            .map(|t| {
                let s = trial_seed(seed, t);
                let block = ScaleBlock::sample(alpha, s, k)?;
                Ok(block_rr_norm(&block, r, len, s)? * (len as f64).powf(2.0 / r - 1.0))
            })
            .collect();
        let consts = consts.into_iter().collect::<Result<Vec<_>>>()?;
        medians.push(median(&consts));
    }
    let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let y: Vec<f64> = medians.iter().map(|c| c.log2()).collect();
    Ok(DecayFit {
        alpha,
        r,
        ks: ks.to_vec(),
        fitted_eta: -linear_fit(&x, &y).slope,
        median_constants: medians,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_set::sample_random_set;

    #[test]
    fn delta_gives_coefficients() {
        let set = sample_random_set(0.5, 1, 64).unwrap();
        let block = ScaleBlock::from_random_set(&set, 5).unwrap();
        let out = scale_block_apply(&Signal::delta(0), &block, ConvolutionMethod::Fft);
        for n in -40..40i64 {
            assert!((out.get(n) - block.coefficient(n)).abs() < 1e-14);
        }
        assert_eq!(block.coefficient(15), 0.0);
        assert_eq!(block.coefficient(32), 0.0);
        assert!(block.coefficient(16) != 0.0);
    }

    #[test]
    fn sampled_block_matches_realization() {
        let set = sample_random_set(0.3, 77, 600).unwrap();
        for k in 1..=9 {
            let a = ScaleBlock::from_random_set(&set, k).unwrap();
            let b = ScaleBlock::sample(0.3, 77, k).unwrap();
            assert_eq!(a, b, "k = {k}");
        }
    }

    #[test]
    fn coefficient_bound_holds() {
        for seed in 0..20 {
            let block = ScaleBlock::sample(0.6, seed, 8).unwrap();
            let bound = block.coefficient_bound();
            assert!(block.coefficients().all(|(_, c)| c.abs() <= bound));
        }
    }

    #[test]
    fn single_coefficient_profile_is_flat() {
        let mut pos = vec![0.0; 4];
        pos[1] = -0.7; // n = 5 at k = 3
        let block = ScaleBlock::from_coefficients(3, 0.5, pos, vec![]).unwrap();
        assert_eq!(block.coefficient(5), -0.7);
        let prof = multiplier_profile(&block);
        assert_eq!(prof.grid_size(), 64);
        assert!(prof.values.iter().all(|z| (z.norm() - 0.7).abs() < 1e-13));
    }

    #[test]
    fn aligned_phases_peak_at_zero() {
        let block = ScaleBlock::from_coefficients(3, 0.5, vec![0.25, 0.0, 0.5, 0.0], vec![]).unwrap();
        let prof = multiplier_profile(&block);
        assert_eq!(prof.argmax(), 0);
        assert!((prof.sup() - 0.75).abs() < 1e-14);
        assert!((opnorm_multiplier(&block) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn multiplier_is_bounded_by_l1() {
        for seed in 0..30 {
            let block = ScaleBlock::sample(0.4, seed, 7).unwrap();
            assert!(opnorm_multiplier(&block) <= block.l1_norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_block() {
        let block = ScaleBlock::zero(6, 0.5).unwrap();
        assert_eq!(opnorm_multiplier(&block), 0.0);
        let blk = ScaleBlock::sample(0.0, 4, 6).unwrap();
        assert_eq!(opnorm_multiplier(&blk), 0.0);
    }

    #[test]
    fn profile_uses_positive_exponent() {
        let block = ScaleBlock::sample(0.5, 3, 4).unwrap();
        let prof = multiplier_profile(&block);
        for j in [0usize, 3, 17, 100] {
            let theta = prof.theta(j);
            let mut z = Complex64::new(0.0, 0.0);
            for (n, c) in block.coefficients() {
                z += c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * theta);
            }
            assert!((z - prof.values[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn interval_length_checked() {
        let block = ScaleBlock::sample(0.5, 3, 4).unwrap();
        let f = Signal::delta(0);
        let bad = GridWindow::new(0, 8).unwrap();
        assert!(scale_bilinear_bounds(&f, &f, bad, &block, 0.0).is_err());
        let ok = GridWindow::new(1, 17).unwrap();
        assert!(matches!(
            scale_bilinear_bounds(&f, &f, ok, &block, 0.0),
            Err(LabError::SupportOutsideWindow { .. })
        ));
    }

    #[test]
    fn point_masses_meet_the_l1_bound() {
        // f = δ_x, g = δ_y: LHS = |c_{y-x}| ≤ 2^{kα}·(1/|I|)²·|I|
        let k = 6;
        let block = ScaleBlock::sample(0.5, 12, k).unwrap();
        let interval = GridWindow::new(0, 64).unwrap();
        let (x, y) = (3, 3 + 40);
        let rep = scale_bilinear_bounds(&Signal::delta(x), &Signal::delta(y), interval, &block, 0.0).unwrap();
        assert!((rep.lhs - block.coefficient(y - x).abs()).abs() < 1e-14);
        assert!(rep.lhs <= rep.l1_bound * 2f64.powf(1.0 - 0.5) + 1e-15);
    }

    #[test]
    fn boyd_at_two_is_spectral_norm_of_compression() {
        // at r = 2 the compressed norm is at most the multiplier sup
        let block = ScaleBlock::sample(0.5, 8, 6).unwrap();
        let v = block_rr_norm(&block, 2.0, 64, 1).unwrap();
        assert!(v <= opnorm_multiplier(&block) * (1.0 + 1e-9));
        assert!(v > 0.3 * opnorm_multiplier(&block));
    }

    #[test]
    fn concentration_alpha_zero_is_all_zero() {
        let t = concentration_experiment(0.0, 3..=5, 4, 10.0, 1).unwrap();
        assert!(t.rows.iter().all(|r| r.opnorm == 0.0 && !r.exceed));
        assert_eq!(t.rows.len(), 12);
        assert!(concentration_experiment(0.5, 3..=4, 0, 10.0, 1).is_err());
    }
}
