//! Oscillatory singular integrals with polynomial phases, one dimension,
//! `K(y) = 1/y`, sampled on a uniform mesh.
//!
//! The kernel is split dyadically with a fixed smooth bump. With
//! `e(s) = exp(−1/s)` for `s > 0` (zero otherwise) let
//! `χ(s) = e(s)/(e(s) + e(1−s))`, `β(y) = 1 − χ(2|y| − 1)` and
//! `ψ(y) = β(y) − β(2y)`. Then `ψ` is supported in `1/4 ≤ |y| ≤ 1` and
//! `φ_j(y) = ψ(2^{1−j} y)/y` lives on `2^{j−3} ≤ |y| ≤ 2^{j−1}`.
//!
//! The localized piece at scale `k` is
//! `I_Q f(x) = ∫ e(P(y)) φ_k(y) (1_{⅓Q} f)(x − y) dy` with `ℓQ = 2^{k+2}`.
//! Integrals are composite Simpson sums on the mesh. Every integrand used
//! here vanishes smoothly at the ends of its support, so the rule converges
//! much faster than its nominal fourth order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::fft::complex_fft;
use crate::stats::linear_fit;

/// `e^{iλ}`.
pub fn cis(lambda: f64) -> Complex64 {
    Complex64::from_polar(1.0, lambda)
}

fn smooth_step(s: f64) -> f64 {
    let e = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (e(s), e(1.0 - s));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// The bump `ψ`, supported in `1/4 ≤ |y| ≤ 1`.
pub fn bump(y: f64) -> f64 {
    let beta = |t: f64| 1.0 - smooth_step(2.0 * t.abs() - 1.0);
    beta(y) - beta(2.0 * y)
}

/// `φ_j(y) = ψ(2^{1−j} y)/y`.
pub fn truncated_kernel(j: i32, y: f64) -> f64 {
    let b = bump(y * 2f64.powi(1 - j));
    if b == 0.0 {
        0.0
    } else {
        b / y
    }
}

/// `P(y) = Σ_{β=2}^{d} λ_β y^β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialPhase {
    /// `coefficients[i]` is `λ_{i+2}`.
    coefficients: Vec<f64>,
}

impl PolynomialPhase {
    /// From `λ_2, λ_3, …`; trailing zeros are dropped.
    pub fn new(mut coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("phase coefficients must be finite"));
        }
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Ok(Self { coefficients })
    }

    /// `P ≡ 0`.
    pub fn zero() -> Self {
        Self { coefficients: Vec::new() }
    }

    /// `y^d`.
    pub fn monomial(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("monomial phase needs degree ≥ 2, got {d}")));
        }
        let mut c = vec![0.0; d - 1];
        c[d - 2] = 1.0;
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// 0 for `P ≡ 0`.
    pub fn degree(&self) -> usize {
        if self.coefficients.is_empty() {
            0
        } else {
            self.coefficients.len() + 1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `‖P‖ = Σ|λ_β|`.
    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| (acc + c) * y) * y
    }

    /// `max_{|y| ≤ radius} |P′(y)|`, bounded by `Σ β|λ_β| radius^{β−1}`.
    pub fn derivative_bound(&self, radius: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 2) as f64 * c.abs() * radius.powi(i as i32 + 1))
            .sum()
    }
}

/// Result of normalizing a raw polynomial phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PhaseReduction {
    /// `P(y) = c₀ + c₁y + Σ_{β≥2} c_β y^β` with `Σ_{β≥2}|c_β| s^β = 1`;
    /// `phase` is the normalized `Σ c_β s^β y^β`.
    Oscillatory {
        phase: PolynomialPhase,
        dilation: f64,
        linear: f64,
        constant: f64,
    },
    /// No term of degree ≥ 2: `T_P` is `T` conjugated by a modulation.
    PureModulation { linear: f64, constant: f64 },
}

/// Split off the constant and linear terms of `raw` (`raw[β]` multiplies
/// `y^β`) and dilate `y → s·y` so that the remaining coefficients have
/// absolute sum 1.
pub fn normalize_phase(raw: &[f64]) -> Result<PhaseReduction> {
    if raw.iter().any(|c| !c.is_finite()) {
        return Err(invalid("phase coefficients must be finite"));
    }
    let constant = raw.first().copied().unwrap_or(0.0);
    let linear = raw.get(1).copied().unwrap_or(0.0);
    let high: Vec<f64> = raw.iter().skip(2).copied().collect();
    if high.iter().all(|&c| c == 0.0) {
        return Ok(PhaseReduction::PureModulation { linear, constant });
    }
    let mass = |s: f64| -> f64 {
        high.iter()
            .enumerate()
            .map(|(i, c)| c.abs() * s.powi(i as i32 + 2))
            .sum()
    };
    // bracket the root in [hi/2, hi] so bisection converges in relative terms
    let mut hi = 1.0f64;
    while mass(hi) < 1.0 {
        hi *= 2.0;
    }
    while mass(hi / 2.0) >= 1.0 {
        hi /= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let coefficients = high
        .iter()
        .enumerate()
        .map(|(i, c)| c * s.powi(i as i32 + 2))
        .collect();
    Ok(PhaseReduction::Oscillatory {
        phase: PolynomialPhase::new(coefficients)?,
        dilation: s,
        linear,
        constant,
    })
}

/// A complex function sampled at `x0 + i·h`, `i = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSignal {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<Complex64>,
}

impl MeshSignal {
    pub fn new(x0: f64, h: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && x0.is_finite()) {
            return Err(invalid(format!("mesh step {h} and origin {x0} must be finite, h > 0")));
        }
        Ok(Self { x0, h, values })
    }

    pub fn from_fn(x0: f64, h: f64, len: usize, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        Self::new(x0, h, (0..len).map(|i| f(x0 + i as f64 * h)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    /// `(h Σ|f|^p)^{1/p}`; `p = ∞` gives the max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.norm()));
        }
        (self.h * self.values.iter().map(|v| v.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    /// `h Σ f conj(g)` over common mesh points.
    pub fn inner(&self, other: &MeshSignal) -> Result<Complex64> {
        let shift = mesh_shift(self, other)?;
        let mut s = Complex64::new(0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            let j = i as i64 + shift;
            if j >= 0 && (j as usize) < other.len() {
                s += v * other.values[j as usize].conj();
            }
        }
        Ok(s * self.h)
    }
}

/// Offset `j − i` between index `i` of `a` and index `j` of `b` at the same
/// point, or an error if the meshes differ.
fn mesh_shift(a: &MeshSignal, b: &MeshSignal) -> Result<i64> {
    if (a.h - b.h).abs() > 1e-12 * a.h {
        return Err(invalid(format!("mesh steps differ: {} vs {}", a.h, b.h)));
    }
    let t = (a.x0 - b.x0) / a.h;
    if (t - t.round()).abs() > 1e-6 {
        return Err(invalid("meshes are not aligned"));
    }
    Ok(t.round() as i64)
}

/// Composite Simpson weights for `n` (odd) points, without the factor `h`.
fn simpson_weights(n: usize) -> Vec<f64> {
    assert!(n % 2 == 1 && n >= 3, "Simpson needs an odd number ≥ 3 of points");
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                1.0 / 3.0
            } else if i % 2 == 1 {
                4.0 / 3.0
            } else {
                2.0 / 3.0
            }
        })
        .collect()
}

/// Mesh resolution: at least `points_per_wavelength` samples per oscillation
/// of `e(P)` over the kernel support, and 16 samples per `2^{k−3}`.
pub const DEFAULT_POINTS_PER_WAVELENGTH: f64 = 16.0;

/// The localized piece `I_Q` at scale `k` for a cube centred at `center`.
///
/// Mesh points are `center + i·h`. With `J = 2^{k−1}/h` the kernel is
/// sampled at `|i| ≤ J`, the input at `|i·h| ≤ ℓQ/6` (indices `|i| ≤ T`) and
/// `I_Q f` is nonzero only at `|i| ≤ J + T`, well inside `Q`.
#[derive(Debug, Clone)]
pub struct LocalizedPiece {
    phase: PolynomialPhase,
    k: u32,
    center: f64,
    h: f64,
    half_kernel: usize,
    half_third: usize,
    /// `h·w_j·e(P(y_j))φ_k(y_j)` for `j = −J..=J`.
    kernel: Vec<Complex64>,
    fft_len: usize,
    forward: Vec<Complex64>,
    backward: Vec<Complex64>,
}

/// Largest admissible mesh step for `(phase, k)` at the given resolution.
pub fn required_step(phase: &PolynomialPhase, k: u32, points_per_wavelength: f64) -> f64 {
    let radius = 2f64.powi(k as i32 - 1);
    let slope = phase.derivative_bound(radius);
    let shape = 2f64.powi(k as i32 - 3) / 16.0;
    if slope == 0.0 {
        shape
    } else {
        (2.0 * std::f64::consts::PI / (points_per_wavelength * slope)).min(shape)
    }
}

impl LocalizedPiece {
    /// Piece on the coarsest mesh `h = 2^{k−1−m}` meeting the resolution.
    pub fn new(phase: PolynomialPhase, k: u32, center: f64, points_per_wavelength: f64) -> Result<Self> {
        if !(points_per_wavelength >= DEFAULT_POINTS_PER_WAVELENGTH) {
            return Err(invalid(format!(
                "at least {DEFAULT_POINTS_PER_WAVELENGTH} points per wavelength are required"
            )));
        }
        check_scale(k)?;
        let need = required_step(&phase, k, points_per_wavelength);
        let radius = 2f64.powi(k as i32 - 1);
        let mut m = 0;
        while radius / 2f64.powi(m) > need {
            m += 1;
        }
        Self::with_step(phase, k, center, radius / 2f64.powi(m))
    }

    /// Piece on a given mesh. `2^{k−1}/h` must be an integer and the
    /// step must resolve the phase at 16 points per wavelength.
    pub fn with_step(phase: PolynomialPhase, k: u32, center: f64, h: f64) -> Result<Self> {
        check_scale(k)?;
        let need = required_step(&phase, k, DEFAULT_POINTS_PER_WAVELENGTH);
        if !(h > 0.0) || h > need * (1.0 + 1e-12) {
            return Err(LabError::UnderResolved { given: h, required: need });
        }
        let radius = 2f64.powi(k as i32 - 1);
        let jf = radius / h;
        if (jf - jf.round()).abs() > 1e-9 {
            return Err(invalid(format!("2^(k-1)/h = {jf} must be an integer")));
        }
        let half_kernel = jf.round() as usize;
        let ell = 4.0 * 2f64.powi(k as i32);
        let half_third = ((ell / 6.0) / h + 1e-9).floor() as usize;
        let weights = simpson_weights(2 * half_kernel + 1);
        let kernel: Vec<Complex64> = (0..=2 * half_kernel)
            .map(|t| {
                let y = (t as f64 - half_kernel as f64) * h;
                cis(phase.eval(y)) * (h * weights[t] * truncated_kernel(k as i32, y))
            })
            .collect();
        let n_in = 2 * half_third + 1;
        let n_k = kernel.len();
        let n_out = n_in + n_k - 1;
        let fft_len = (n_out + n_k - 1).next_power_of_two();
        let spectrum = |v: &mut dyn Iterator<Item = Complex64>| {
            let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
            for (b, x) in buf.iter_mut().zip(v) {
                *b = x;
            }
            complex_fft(&mut buf, false);
            buf
        };
        let forward = spectrum(&mut kernel.iter().copied());
        let backward = spectrum(&mut kernel.iter().rev().map(|z| z.conj()));
        Ok(Self {
            phase,
            k,
            center,
            h,
            half_kernel,
            half_third,
            kernel,
            fft_len,
            forward,
            backward,
        })
    }

    pub fn phase(&self) -> &PolynomialPhase {
        &self.phase
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// `ℓQ = 2^{k+2}`.
    pub fn side(&self) -> f64 {
        4.0 * 2f64.powi(self.k as i32)
    }

    /// `Q = [c − ℓQ/2, c + ℓQ/2]`.
    pub fn cube(&self) -> (f64, f64) {
        let half = self.side() / 2.0;
        (self.center - half, self.center + half)
    }

    /// `⅓Q = [c − ℓQ/6, c + ℓQ/6]`.
    pub fn third(&self) -> (f64, f64) {
        let r = self.side() / 6.0;
        (self.center - r, self.center + r)
    }

    /// Mesh points of the input: `c + i·h`, `|i| ≤ T`.
    pub fn input_len(&self) -> usize {
        2 * self.half_third + 1
    }

    pub fn input_x0(&self) -> f64 {
        self.center - self.half_third as f64 * self.h
    }

    /// Mesh points where `I_Q f` can be nonzero.
    pub fn output_len(&self) -> usize {
        self.input_len() + self.kernel.len() - 1
    }

    pub fn output_x0(&self) -> f64 {
        self.center - (self.half_third + self.half_kernel) as f64 * self.h
    }

    /// Mesh covering all of `Q`.
    pub fn cube_mesh_len(&self) -> usize {
        let n = ((self.side() / 2.0) / self.h + 1e-9).floor() as usize;
        2 * n + 1
    }

    pub fn cube_x0(&self) -> f64 {
        self.center - ((self.cube_mesh_len() - 1) / 2) as f64 * self.h
    }

    /// Quadrature-weighted kernel samples `h w_j e(P(y_j)) φ_k(y_j)`.
    pub fn kernel_samples(&self) -> &[Complex64] {
        &self.kernel
    }

    /// Sample a function on the input mesh (`⅓Q`).
    pub fn sample_input(&self, f: impl FnMut(f64) -> Complex64) -> MeshSignal {
        MeshSignal::from_fn(self.input_x0(), self.h, self.input_len(), f).expect("valid mesh")
    }

    fn convolve(&self, x: &[Complex64], spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        buf[..x.len()].copy_from_slice(x);
        complex_fft(&mut buf, false);
        for (b, s) in buf.iter_mut().zip(spectrum) {
            *b *= s;
        }
        complex_fft(&mut buf, true);
        let scale = 1.0 / self.fft_len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    /// `I_Q` on raw input-mesh values, result on the output mesh.
    pub fn apply_raw(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.input_len());
        let mut out = self.convolve(x, &self.forward);
        out.truncate(self.output_len());
        out
    }

    /// `I*_Q` on raw output-mesh values, result on the input mesh.
    pub fn adjoint_raw(&self, g: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(g.len(), self.output_len());
        let out = self.convolve(g, &self.backward);
        let start = self.kernel.len() - 1;
        out[start..start + self.input_len()].to_vec()
    }

    /// Restrict `f` to the input mesh (this is the cutoff `1_{⅓Q}`).
    fn gather(&self, f: &MeshSignal, x0: f64, len: usize) -> Result<Vec<Complex64>> {
        let grid = MeshSignal::new(x0, self.h, Vec::new())?;
        let shift = mesh_shift(&grid, f)?;
        Ok((0..len as i64)
            .map(|i| {
                let j = i + shift;
                if j >= 0 && (j as usize) < f.len() {
                    f.values[j as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect())
    }

    /// `I_Q f` on the whole mesh of `Q`. `f` must live on a mesh aligned
    /// with the piece.
    pub fn apply(&self, f: &MeshSignal) -> Result<MeshSignal> {
        let x = self.gather(f, self.input_x0(), self.input_len())?;
        let core = self.apply_raw(&x);
        let len = self.cube_mesh_len();
        let offset = (len - 1) / 2 - (self.half_third + self.half_kernel);
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        values[offset..offset + core.len()].copy_from_slice(&core);
        MeshSignal::new(self.cube_x0(), self.h, values)
    }

    /// `I*_Q g(x) = 1_{⅓Q}(x) ∫ conj(e(P(y))φ_k(y)) g(x + y) dy` on the
    /// input mesh.
    pub fn adjoint(&self, g: &MeshSignal) -> Result<MeshSignal> {
        let x = self.gather(g, self.output_x0(), self.output_len())?;
        MeshSignal::new(self.input_x0(), self.h, self.adjoint_raw(&x))
    }

    /// `a(u) = e(P(u)) φ_k(u)`.
    pub fn amplitude(&self, u: f64) -> Complex64 {
        cis(self.phase.eval(u)) * truncated_kernel(self.k as i32, u)
    }

    fn check_in_third(&self, x: f64) -> Result<()> {
        let (a, b) = self.third();
        if x < a - 1e-12 || x > b + 1e-12 {
            return Err(invalid(format!("point {x} is outside ⅓Q = [{a}, {b}]")));
        }
        Ok(())
    }

    /// `K_Q(x, y) = ∫ conj(a(u)) a(u + x − y) du` for `x, y ∈ ⅓Q`, the kernel
    /// of `I*_Q I_Q` on `⅓Q`.
    pub fn kq_kernel(&self, x: f64, y: f64) -> Result<Complex64> {
        self.check_in_third(x)?;
        self.check_in_third(y)?;
        let s = x - y;
        let n = 2 * self.half_kernel + 1;
        let w = simpson_weights(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, wt) in w.iter().enumerate() {
            let u = (t as f64 - self.half_kernel as f64) * self.h;
            let a = self.amplitude(u);
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += a.conj() * self.amplitude(u + s) * *wt;
        }
        Ok(acc * self.h)
    }

    /// `K_Q` at lags `s = m·h`, `|m| ≤ M`, as `(M, values)` with
    /// `values[m + M]`. Same quadrature as [`Self::kq_kernel`].
    pub fn kq_profile(&self) -> (usize, Vec<Complex64>) {
        let n = 2 * self.half_kernel + 1;
        let w = simpson_weights(n);
        let amp: Vec<Complex64> = (0..n)
            .map(|t| self.amplitude((t as f64 - self.half_kernel as f64) * self.h))
            .collect();
        // C(m) = h Σ_t w_t conj(a_t) a_{t+m}: correlate b_t = w_t conj(a_t) with a
        let rev: Vec<Complex64> = (0..n).map(|t| amp[n - 1 - t].conj() * w[n - 1 - t]).collect();
        let full = crate::fft::convolve_complex(&rev, &amp);
        // full[n − 1 + m] = Σ_t w_t conj(a_t) a_{t+m}
        let max_lag = n - 1;
        let values = (0..2 * max_lag + 1).map(|i| full[i] * self.h).collect();
        (max_lag, values)
    }
}

fn check_scale(k: u32) -> Result<()> {
    if !(1..=20).contains(&k) {
        return Err(invalid(format!("scale k = {k} must be in 1..=20")));
    }
    Ok(())
}

/// Measure of the bad set of lags.
#[derive(Debug, Clone, Serialize)]
pub struct BadSetReport {
    pub k: u32,
    pub eps: f64,
    /// `|Q|^{−1−ε}`.
    pub threshold: f64,
    /// `|{s ∈ [−ℓQ/3, ℓQ/3] : |K_Q(s)| > |Q|^{−1−ε}}|`.
    pub measure: f64,
    /// `measure / ((ℓQ)^{−ε}|Q|)`.
    pub ratio: f64,
    /// `max_s |K_Q(s)|·|Q|`.
    pub peak_normalized: f64,
}

pub fn badset_measure(piece: &LocalizedPiece, eps: f64) -> Result<BadSetReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps = {eps} must be positive")));
    }
    let q = piece.side();
    let threshold = q.powf(-1.0 - eps);
    let (max_lag, values) = piece.kq_profile();
    let limit = q / 3.0;
    let mut count = 0usize;
    let mut peak = 0.0f64;
    for (i, v) in values.iter().enumerate() {
        let s = (i as f64 - max_lag as f64) * piece.h;
        if s.abs() > limit {
            continue;
        }
        peak = peak.max(v.norm());
        if v.norm() > threshold {
            count += 1;
        }
    }
    let measure = count as f64 * piece.h;
    Ok(BadSetReport {
        k: piece.k,
        eps,
        threshold,
        measure,
        ratio: measure / (q.powf(-eps) * q),
        peak_normalized: peak * q,
    })
}

/// Relative tolerance and iteration cap of [`iq_l2_norm`].
pub const POWER_TOL: f64 = 1e-6;
pub const POWER_MAX_ITER: usize = 500;

/// Largest singular value of the discretized `I_Q` on `L²(mesh)`, by power
/// iteration on `I*_Q I_Q`. Stops once the estimate changes by at most
/// `tol` (relative) in one step.
pub fn iq_l2_norm(piece: &LocalizedPiece) -> Result<f64> {
    iq_l2_norm_with(piece, POWER_TOL, POWER_MAX_ITER)
}

pub fn iq_l2_norm_with(piece: &LocalizedPiece, tol: f64, max_iter: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..piece.input_len())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut prev = 0.0f64;
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let nv = norm(&v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let av = piece.apply_raw(&v);
        // ‖I v‖ for unit v increases monotonically to the top singular value
        let value = norm(&av);
        if value == 0.0 {
            return Ok(0.0);
        }
        change = (value - prev).abs() / value;
        if change <= tol {
            return Ok(value);
        }
        prev = value;
        v = piece.adjoint_raw(&av);
    }
    Err(LabError::NotConverged {
        iterations: max_iter,
        change,
    })
}

/// The endpoint constants and their interpolation at `r`.
#[derive(Debug, Clone, Serialize)]
pub struct RieszThorinReport {
    pub r: f64,
    /// `θ = 2(r−1)/r`.
    pub theta: f64,
    /// `‖I_Q‖_{1→∞} = max_j w_j |e(P)φ_k|(y_j)` on the mesh.
    pub c1: f64,
    /// Measured `‖I_Q‖_{2→2}`.
    pub c2: f64,
    /// `c1^{1−θ} c2^θ`.
    pub bound: f64,
    /// `max ‖I_Q f‖_{r'}/‖f‖_r` over the random trials.
    pub measured: f64,
    pub trials: usize,
}

pub fn riesz_thorin_bound(piece: &LocalizedPiece, r: f64, trials: usize, seed: u64) -> Result<RieszThorinReport> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(invalid(format!("r = {r} must lie in (1, 2]")));
    }
    let theta = 2.0 * (r - 1.0) / r;
    let c1 = piece.kernel.iter().fold(0.0f64, |m, z| m.max(z.norm())) / piece.h;
    let c2 = iq_l2_norm(piece)?;
    let bound = c1.powf(1.0 - theta) * c2.powf(theta);
    let rp = r / (r - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut measured = 0.0f64;
    for _ in 0..trials {
        let x: Vec<Complex64> = (0..piece.input_len())
            .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let fx = MeshSignal::new(piece.input_x0(), piece.h, x.clone())?;
        let out = MeshSignal::new(piece.output_x0(), piece.h, piece.apply_raw(&x))?;
        measured = measured.max(out.lp_norm(rp) / fx.lp_norm(r));
    }
    Ok(RieszThorinReport {
        r,
        theta,
        c1,
        c2,
        bound,
        measured,
        trials,
    })
}

/// Near-part comparison `|T_P f − T f| ≲ Mf` with the kernel cut to `|y| ≤ 2`.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    /// `max_{0<|y|≤2} |e(P(y)) − 1|/|y|` on the mesh.
    pub kernel_sup: f64,
    /// `Σ_β |λ_β| 2^{β−1}`.
    pub analytic_bound: f64,
    /// `max_x |(T_P − T)f(x)| / (4·avg_{[x−2,x+2]}|f|)`, 0 when `f` is absent.
    pub ratio_sup: f64,
}

/// Compare `T_P` and `T` on the truncated kernel. If `f` is given, the
/// pointwise ratio is evaluated on `f`'s mesh.
pub fn local_vs_global_split(phase: &PolynomialPhase, h: f64, f: Option<&MeshSignal>) -> Result<SplitReport> {
    if !(h > 0.0 && h <= 0.25) {
        return Err(invalid(format!("mesh step {h} must lie in (0, 1/4]")));
    }
    let half = (2.0 / h).round() as usize;
    if ((half as f64) * h - 2.0).abs() > 1e-9 {
        return Err(invalid("2/h must be an integer"));
    }
    let n = 2 * half + 1;
    let diff: Vec<Complex64> = (0..n)
        .map(|t| {
            let y = (t as f64 - half as f64) * h;
            if t == half {
                Complex64::new(0.0, 0.0)
            } else {
                (cis(phase.eval(y)) - 1.0) / y
            }
        })
        .collect();
    let kernel_sup = diff.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let analytic_bound = phase
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs() * 2f64.powi(i as i32 + 1))
        .sum();
    let mut ratio_sup = 0.0f64;
    if let Some(f) = f {
        if (f.h - h).abs() > 1e-12 * h {
            return Err(invalid("signal mesh step differs from the kernel mesh"));
        }
        let w = simpson_weights(n);
        let len = f.len() as i64;
        for i in 0..len {
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for t in 0..n {
                let j = i - (t as i64 - half as i64);
                if j < 0 || j >= len {
                    continue;
                }
                let v = f.values[j as usize];
                num += diff[t] * v * w[t];
                den += v.norm() * w[t];
            }
            // 4·avg over [x−2, x+2] is the integral of |f| there
            if den > 0.0 {
                ratio_sup = ratio_sup.max(num.norm() / den);
            }
        }
    }
    Ok(SplitReport {
        kernel_sup,
        analytic_bound,
        ratio_sup,
    })
}

/// `‖I_Q‖_{2→2}` across scales and the fitted decay exponent.
#[derive(Debug, Clone, Serialize)]
pub struct OscDecay {
    pub ks: Vec<u32>,
    pub norms: Vec<f64>,
    /// `−slope` of `log₂ ‖I_Q‖` against `k`.
    pub fitted_eta: f64,
}

pub fn osc_decay(phase: &PolynomialPhase, ks: &[u32], points_per_wavelength: f64) -> Result<OscDecay> {
    if ks.len() < 2 {
        return Err(invalid("need at least two scales to fit a slope"));
    }
    let mut norms = Vec::with_capacity(ks.len());
    for &k in ks {
        let piece = LocalizedPiece::new(phase.clone(), k, 0.0, points_per_wavelength)?;
        norms.push(iq_l2_norm(&piece)?);
    }
    let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let y: Vec<f64> = norms.iter().map(|n| n.log2()).collect();
    Ok(OscDecay {
        ks: ks.to_vec(),
        fitted_eta: -linear_fit(&x, &y).slope,
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_partition() {
        assert_eq!(bump(0.2), 0.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.1), 0.0);
        assert!(bump(0.5) > 0.99);
        // Σ_j ψ(2^{-j} y) = 1 for |y| ≥ 1/2 once enough scales are summed
        for y in [0.7, 3.0, 17.5, 100.0] {
            let s: f64 = (0..12).map(|j| bump(y * 2f64.powi(-j))).sum();
            assert!((s - 1.0).abs() < 1e-14, "y = {y}");
        }
    }

    #[test]
    fn kernel_support() {
        let k = 5;
        assert_eq!(truncated_kernel(k, 3.9), 0.0);
        assert_eq!(truncated_kernel(k, 16.0), 0.0);
        assert!(truncated_kernel(k, 8.0) > 0.0);
        assert!(truncated_kernel(k, -8.0) < 0.0);
    }

    #[test]
    fn phase_arithmetic() {
        let p = PolynomialPhase::new(vec![0.5, -2.0]).unwrap();
        assert_eq!(p.degree(), 3);
        assert!((p.eval(2.0) - (0.5 * 4.0 - 16.0)).abs() < 1e-14);
        assert_eq!(p.norm(), 2.5);
        assert_eq!(PolynomialPhase::zero().degree(), 0);
    }

    #[test]
    fn normalize_quadratic() {
        match normalize_phase(&[0.0, 0.0, 4.0]).unwrap() {
            PhaseReduction::Oscillatory { phase, dilation, .. } => {
                assert!((dilation - 0.5).abs() < 1e-14);
                assert!((phase.coefficients()[0] - 1.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            normalize_phase(&[0.3, 2.0]).unwrap(),
            PhaseReduction::PureModulation {
                linear: 2.0,
                constant: 0.3
            }
        );
    }

    #[test]
    fn normalize_tiny_coefficients() {
        match normalize_phase(&[0.0, 0.0, 1e-6, 0.0, 1e-8]).unwrap() {
            PhaseReduction::Oscillatory { phase, .. } => assert!((phase.norm() - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        match normalize_phase(&[0.0, 0.0, 1e6]).unwrap() {
            PhaseReduction::Oscillatory { phase, dilation, .. } => {
                assert!((phase.norm() - 1.0).abs() < 1e-12);
                assert!((dilation - 1e-3).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn under_resolved_mesh_refused() {
        let p = PolynomialPhase::monomial(2).unwrap();
        let err = LocalizedPiece::with_step(p, 4, 0.0, 0.5).unwrap_err();
        assert!(matches!(err, LabError::UnderResolved { .. }));
    }

    #[test]
    fn output_stays_inside_cube() {
        let piece = LocalizedPiece::new(PolynomialPhase::monomial(2).unwrap(), 3, 10.0, 16.0).unwrap();
        let (a, b) = piece.cube();
        let lo = piece.output_x0();
        let hi = lo + (piece.output_len() - 1) as f64 * piece.step();
        assert!(a < lo && hi < b);
    }

    #[test]
    fn kq_diagonal_is_energy() {
        let piece = LocalizedPiece::new(PolynomialPhase::monomial(2).unwrap(), 3, 0.0, 16.0).unwrap();
        let v = piece.kq_kernel(1.0, 1.0).unwrap();
        assert!(v.im.abs() < 1e-14);
        // fine trapezoid reference for ∫|φ_3|² over |y| ≤ 4
        let h = piece.step() / 16.0;
        let n = (4.0 / h).round() as i64;
        let energy: f64 = (-n..=n)
            .map(|i| truncated_kernel(3, i as f64 * h).powi(2))
            .sum::<f64>()
            * h;
        assert!((v.re - energy).abs() < 1e-6 * energy);
        assert!(piece.kq_kernel(10.0, 0.0).is_err());
    }

    #[test]
    fn profile_matches_pointwise() {
        let piece = LocalizedPiece::new(PolynomialPhase::new(vec![0.6, 0.4]).unwrap(), 3, 0.0, 16.0).unwrap();
        let (m, prof) = piece.kq_profile();
        let h = piece.step();
        for lag in [0i64, 3, -7, 40, -120] {
            let s = lag as f64 * h;
            let direct = piece.kq_kernel(s / 2.0, -s / 2.0).unwrap();
            let fast = prof[(lag + m as i64) as usize];
            assert!((direct - fast).norm() < 1e-12, "lag {lag}");
        }
    }

    #[test]
    fn split_quadratic() {
        let rep = local_vs_global_split(&PolynomialPhase::monomial(2).unwrap(), 1.0 / 512.0, None).unwrap();
        assert!(rep.kernel_sup <= rep.analytic_bound);
        assert!(rep.kernel_sup * 2.0 >= rep.analytic_bound);
    }
}
