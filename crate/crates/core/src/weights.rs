//! Muckenhoupt `A_p` and reverse Hölder `RH_r` characteristics over finite
//! families of shifted dyadic cubes, dual weights and the weighted checks.
//!
//! Characteristics are suprema over the supplied family only, so they are
//! lower bounds for the true suprema; growth in the window size is the
//! diagnostic for leaving a class. Averages here are plain averages over
//! `Q` itself.

use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::grid::{check_exponent, dyadic_family, DyadicCube, GridWindow, PowerSums, Signal};

/// A strictly positive function on a window of ℤ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    window: GridWindow,
    values: Vec<f64>,
}

impl Weight {
    pub fn new(window: GridWindow, values: Vec<f64>) -> Result<Self> {
        if window.is_empty() {
            return Err(invalid("weight on an empty window"));
        }
        if values.len() != window.len() {
            return Err(invalid(format!(
                "{} weight values for a window of {} points",
                values.len(),
                window.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid(format!(
                "weight value {} at x = {} is not finite and positive",
                values[bad],
                window.lo + bad as i64
            )));
        }
        Ok(Self { window, values })
    }

    pub fn from_fn(window: GridWindow, f: impl FnMut(i64) -> f64) -> Result<Self> {
        Self::new(window, window.points().map(f).collect())
    }

    /// `w ≡ 1`.
    pub fn constant(window: GridWindow) -> Self {
        Self {
            window,
            values: vec![1.0; window.len()],
        }
    }

    /// Interpret a signal as a weight on its stored range.
    pub fn from_signal(s: &Signal) -> Result<Self> {
        Self::new(s.window(), s.values().to_vec())
    }

    pub fn to_signal(&self) -> Signal {
        Signal::new(self.window.lo, self.values.clone())
    }

    pub fn window(&self) -> GridWindow {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `w(x)`; panics outside the window.
    pub fn get(&self, x: i64) -> f64 {
        assert!(self.window.contains(x), "x = {x} outside the weight window");
        self.values[(x - self.window.lo) as usize]
    }

    /// `w^e` pointwise.
    pub fn powf(&self, e: f64) -> Self {
        Self {
            window: self.window,
            values: self.values.iter().map(|v| v.powf(e)).collect(),
        }
    }

    /// `w(Q) = Σ_{x∈Q} w(x)` for `Q` inside the window.
    pub fn mass(&self, lo: i64, hi: i64) -> f64 {
        let a = (lo.max(self.window.lo) - self.window.lo) as usize;
        let b = (hi.min(self.window.hi) - self.window.lo).max(0) as usize;
        self.values[a..b.max(a)].iter().sum()
    }
}

/// `w(x) = (1 + |x|)^a` on the window.
pub fn power_weight(a: f64, window: GridWindow) -> Result<Weight> {
    if !a.is_finite() {
        return Err(invalid(format!("power weight exponent {a} is not finite")));
    }
    Weight::from_fn(window, |x| (1.0 + x.unsigned_abs() as f64).powf(a))
}

/// Conjugate exponent `p' = p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p = {p} must be a finite number > 1")));
    }
    Ok(())
}

/// `σ = w^{1−p'}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    check_p(p)?;
    Ok(w.powf(1.0 - conjugate(p)))
}

/// A characteristic together with the cube attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicReport {
    pub characteristic: String,
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub argmax_cube: DyadicCube,
    pub value: f64,
}

fn check_family(w: &Weight, family: &[DyadicCube]) -> Result<()> {
    if family.is_empty() {
        return Err(LabError::Empty("cube family".into()));
    }
    if let Some(q) = family.iter().find(|q| !q.within(w.window)) {
        return Err(invalid(format!("cube {q} leaves the weight window")));
    }
    Ok(())
}

/// Sup of `per_cube` over the family; ties keep the first cube.
fn sup_over(family: &[DyadicCube], mut per_cube: impl FnMut(&DyadicCube) -> f64) -> (DyadicCube, f64) {
    let mut best = (family[0], f64::NEG_INFINITY);
    for q in family {
        let v = per_cube(q);
        if v > best.1 {
            best = (*q, v);
        }
    }
    best
}

/// `[w]_{A_p}` over the family, with the maximizing cube.
pub fn ap_report(w: &Weight, p: f64, family: &[DyadicCube]) -> Result<CharacteristicReport> {
    check_p(p)?;
    check_family(w, family)?;
    let s = w.to_signal();
    let mass = PowerSums::new(&s, 1.0);
    let dual = PowerSums::new(&s, 1.0 / (1.0 - p));
    let (cube, value) = sup_over(family, |q| {
        let (a, b) = q.bounds();
        let len = q.side() as f64;
        (mass.sum(a, b) / len) * (dual.sum(a, b) / len).powf(p - 1.0)
    });
    Ok(CharacteristicReport {
        characteristic: "A_p".into(),
        p: Some(p),
        r: None,
        argmax_cube: cube,
        value,
    })
}

/// `[w]_{A_p} = sup_Q (w(Q)/|Q|)·(w^{1/(1−p)}(Q)/|Q|)^{p−1}`.
pub fn ap_characteristic(w: &Weight, p: f64, family: &[DyadicCube]) -> Result<f64> {
    Ok(ap_report(w, p, family)?.value)
}

/// `[w]_{RH_r}` over the family, with the maximizing cube.
pub fn rh_report(w: &Weight, r: f64, family: &[DyadicCube]) -> Result<CharacteristicReport> {
    if !(r > 1.0) {
        return Err(invalid(format!("reverse Hölder exponent r = {r} must exceed 1")));
    }
    check_exponent(r)?;
    check_family(w, family)?;
    let s = w.to_signal();
    let mass = PowerSums::new(&s, 1.0);
    let high = PowerSums::new(&s, r);
    let (cube, value) = sup_over(family, |q| {
        let (a, b) = q.bounds();
        let len = q.side() as f64;
        (high.sum(a, b) / len).powf(1.0 / r) / (mass.sum(a, b) / len)
    });
    Ok(CharacteristicReport {
        characteristic: "RH_r".into(),
        p: None,
        r: Some(r),
        argmax_cube: cube,
        value,
    })
}

/// `[w]_{RH_r} = sup_Q ⟨w⟩_{Q,r}/⟨w⟩_Q`.
pub fn rh_characteristic(w: &Weight, r: f64, family: &[DyadicCube]) -> Result<f64> {
    Ok(rh_report(w, r, family)?.value)
}

/// The largest `r = 1 + 2^{−j}`, `0 ≤ j ≤ max_j`, with `[w]_{RH_r} ≤ 4`.
pub fn rh_scan(w: &Weight, family: &[DyadicCube], max_j: u32) -> Result<Option<f64>> {
    for j in 0..=max_j {
        let r = 1.0 + 2f64.powi(-(j as i32));
        if rh_characteristic(w, r, family)? <= 4.0 {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// `(Σ_x |f(x)|^p w(x))^{1/p}`; `f` must be supported in the weight window.
pub fn weighted_lp_norm(f: &Signal, w: &Weight, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let Some((lo, hi)) = f.support() else {
        return Ok(0.0);
    };
    let win = w.window();
    if !win.contains_range(lo, hi) {
        return Err(LabError::SupportOutsideWindow {
            lo,
            hi,
            window_lo: win.lo,
            window_hi: win.hi,
        });
    }
    let sum: f64 = (lo..hi).map(|x| f.get(x).abs().powf(p) * w.get(x)).sum();
    Ok(sum.powf(1.0 / p))
}

/// The characteristics entering the weighted bound for the random
/// Hilbert transform at `(p, α, r)`.
#[derive(Debug, Clone, Serialize)]
pub struct WwReport {
    pub p: f64,
    pub alpha: f64,
    pub r: f64,
    /// `(1+α)(p−1)+1`.
    pub q_power: f64,
    /// `[w^{1+α}]_{A_{(1+α)(p−1)+1}}`.
    pub power_char: f64,
    /// `1 + 1/((1+α)(p'−1))`.
    pub q_low: f64,
    /// `[w]_{A_{1+1/((1+α)(p'−1))}}`.
    pub low_char: f64,
    pub ap: f64,
    pub rh_w: f64,
    pub rh_sigma: f64,
    /// `[w]_{RH_r}·[σ]_{RH_r}`.
    pub rh_product: f64,
    /// Largest scanned `r = 1 + 2^{−j}` with `[w]_{RH_r} ≤ 4`.
    pub rh_scan_w: Option<f64>,
    pub rh_scan_sigma: Option<f64>,
    /// Every characteristic finite and `[w]_{RH_r}[σ]_{RH_r} < 4`.
    pub holds: bool,
}

pub fn check_ww_conditions(w: &Weight, p: f64, alpha: f64, r: f64, family: &[DyadicCube]) -> Result<WwReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(p > 1.0 + alpha && p < (1.0 + alpha) / alpha) {
        return Err(invalid(format!(
            "p = {p} must lie in (1+α, (1+α)/α) = ({}, {})",
            1.0 + alpha,
            (1.0 + alpha) / alpha
        )));
    }
    if !(r > 1.0 + alpha) {
        return Err(invalid(format!("r = {r} must exceed 1+α = {}", 1.0 + alpha)));
    }
    let q_power = (1.0 + alpha) * (p - 1.0) + 1.0;
    let q_low = 1.0 + 1.0 / ((1.0 + alpha) * (conjugate(p) - 1.0));
    let power_char = ap_characteristic(&w.powf(1.0 + alpha), q_power, family)?;
    let low_char = ap_characteristic(w, q_low, family)?;
    let ap = ap_characteristic(w, p, family)?;
    let sigma = dual_weight(w, p)?;
    let rh_w = rh_characteristic(w, r, family)?;
    let rh_sigma = rh_characteristic(&sigma, r, family)?;
    let rh_product = rh_w * rh_sigma;
    let finite = [power_char, low_char, ap, rh_w, rh_sigma].iter().all(|v| v.is_finite());
    Ok(WwReport {
        p,
        alpha,
        r,
        q_power,
        power_char,
        q_low,
        low_char,
        ap,
        rh_w,
        rh_sigma,
        rh_product,
        rh_scan_w: rh_scan(w, family, 20)?,
        rh_scan_sigma: rh_scan(&sigma, family, 20)?,
        holds: finite && rh_product < 4.0,
    })
}

/// `[w]_{A_p}`, `[w]_{RH_r}` and `[σ]_{RH_r}` for one weight.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaleConstants {
    pub p: f64,
    pub r: f64,
    pub ap: f64,
    pub rh_w: f64,
    pub rh_sigma: f64,
}

pub fn scale_constants(w: &Weight, p: f64, r: f64, family: &[DyadicCube]) -> Result<ScaleConstants> {
    let sigma = dual_weight(w, p)?;
    Ok(ScaleConstants {
        p,
        r,
        ap: ap_characteristic(w, p, family)?,
        rh_w: rh_characteristic(w, r, family)?,
        rh_sigma: rh_characteristic(&sigma, r, family)?,
    })
}

/// Both sides of the single-scale weighted bound.
#[derive(Debug, Clone, Serialize)]
pub struct SingleScaleReport {
    pub k: u32,
    pub p: f64,
    pub r: f64,
    /// `Σ_{|Q|=2^k} ⟨f⟩_{Q,r}⟨g⟩_{Q,r}|Q|` over grid 1.
    pub lhs: f64,
    /// `[w]_{A_p}^{1/p}[w]_{RH_r}[σ]_{RH_r}`.
    pub constant: f64,
    pub f_norm: f64,
    /// `‖g‖_{L^{p'}(w)}`.
    pub g_norm_w: f64,
    /// `‖g‖_{L^{p'}(σ)}`, the dual-space norm.
    pub g_norm_sigma: f64,
    /// `constant·‖f‖_{L^p(w)}‖g‖_{L^{p'}(w)}`.
    pub rhs: f64,
    /// `constant·‖f‖_{L^p(w)}‖g‖_{L^{p'}(σ)}`.
    pub rhs_dual: f64,
}

impl SingleScaleReport {
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }

    pub fn ratio_dual(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs_dual
        }
    }
}

/// `Σ_{|Q|=2^k} ⟨f⟩_{Q,r}⟨g⟩_{Q,r}|Q|` over grid 1, plain averages on `Q`.
pub fn single_scale_form(f: &Signal, g: &Signal, r: f64, k: u32) -> Result<f64> {
    check_exponent(r)?;
    let (Some(sf), Some(sg)) = (f.support(), g.support()) else {
        return Ok(0.0);
    };
    let lo = sf.0.max(sg.0);
    let hi = sf.1.min(sg.1);
    if lo >= hi {
        return Ok(0.0);
    }
    let pf = PowerSums::new(f, r);
    let pg = PowerSums::new(g, r);
    let window = GridWindow { lo, hi };
    let mut total = 0.0;
    for q in crate::grid::shifted_grid_cubes(1, k, window) {
        let (a, b) = q.bounds();
        let len = q.side() as f64;
        total += (pf.sum(a, b) / len).powf(1.0 / r) * (pg.sum(a, b) / len).powf(1.0 / r) * len;
    }
    Ok(total)
}

/// Evaluate the single-scale bound with precomputed characteristics.
pub fn single_scale_sparse_bound_with(
    f: &Signal,
    g: &Signal,
    w: &Weight,
    constants: &ScaleConstants,
    k: u32,
) -> Result<SingleScaleReport> {
    let (p, r) = (constants.p, constants.r);
    check_p(p)?;
    if !(r > 1.0) || p < r || p > conjugate(r) {
        return Err(invalid(format!(
            "p = {p} must lie in [r, r'] = [{r}, {}]",
            conjugate(r)
        )));
    }
    let pp = conjugate(p);
    let sigma = dual_weight(w, p)?;
    let lhs = single_scale_form(f, g, r, k)?;
    let constant = constants.ap.powf(1.0 / p) * constants.rh_w * constants.rh_sigma;
    let f_norm = weighted_lp_norm(f, w, p)?;
    let g_norm_w = weighted_lp_norm(g, w, pp)?;
    let g_norm_sigma = weighted_lp_norm(g, &sigma, pp)?;
    Ok(SingleScaleReport {
        k,
        p,
        r,
        lhs,
        constant,
        f_norm,
        g_norm_w,
        g_norm_sigma,
        rhs: constant * f_norm * g_norm_w,
        rhs_dual: constant * f_norm * g_norm_sigma,
    })
}

/// Single-scale bound with characteristics over every dyadic cube inside
/// the weight window.
pub fn single_scale_sparse_bound(
    f: &Signal,
    g: &Signal,
    w: &Weight,
    p: f64,
    r: f64,
    k: u32,
) -> Result<SingleScaleReport> {
    let constants = scale_constants(w, p, r, &dyadic_family(w.window()))?;
    single_scale_sparse_bound_with(f, g, w, &constants, k)
}
