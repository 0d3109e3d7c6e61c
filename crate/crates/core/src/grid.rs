//! Finitely supported signals on ℤ and the three shifted dyadic grids.
//!
//! Grid `t ∈ {1, 2, 3}` at level `k` consists of the intervals
//! `[m·2^k + o(t, k), (m+1)·2^k + o(t, k))`, where `o(t, k)` is the integer
//! nearest to `(-1)^k (t-1) 2^k / 3`. Each grid is nested (every cube is the
//! disjoint union of two cubes of the same grid one level down), and for a
//! fixed level the middle thirds `⅓Q` of the three grids tile ℤ exactly.
//! Since `2^k` is never divisible by 3 the discrete thirds have lengths
//! `⌊2^k/3⌋` or `⌈2^k/3⌉` (possibly zero at levels 0 and 1).
//!
//! All averages use counting measure; values outside a signal's stored
//! range are zero.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Half-open window `[lo, hi)` of ℤ in which an experiment lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridWindow {
    pub lo: i64,
    pub hi: i64,
}

impl GridWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(invalid(format!("window [{lo}, {hi}) has negative length")));
        }
        Ok(Self { lo, hi })
    }

    /// The window `[-n, n)`.
    pub fn symmetric(n: i64) -> Self {
        Self { lo: -n, hi: n }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn contains_range(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && hi <= self.hi
    }

    pub fn points(&self) -> impl Iterator<Item = i64> {
        self.lo..self.hi
    }
}

/// A real function on ℤ stored on `[offset, offset + values.len())` and zero
/// elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    offset: i64,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(offset: i64, values: Vec<f64>) -> Self {
        Self { offset, values }
    }

    pub fn zeros(window: GridWindow) -> Self {
        Self::new(window.lo, vec![0.0; window.len()])
    }

    pub fn from_fn(window: GridWindow, f: impl FnMut(i64) -> f64) -> Self {
        Self::new(window.lo, window.points().map(f).collect())
    }

    /// Unit mass at `x`.
    pub fn delta(x: i64) -> Self {
        Self::new(x, vec![1.0])
    }

    /// Indicator of `[lo, hi)`.
    pub fn indicator(lo: i64, hi: i64) -> Self {
        Self::new(lo, vec![1.0; (hi - lo).max(0) as usize])
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: i64) -> f64 {
        let i = x - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    /// Tight half-open range of the nonzero entries, `None` for the zero signal.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.values.iter().position(|&v| v != 0.0)?;
        let last = self.values.iter().rposition(|&v| v != 0.0)?;
        Some((self.offset + first as i64, self.offset + last as i64 + 1))
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .map(|v| v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| a * v).collect())
    }

    pub fn abs(&self) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| v.abs()).collect())
    }

    /// Pointwise product, stored on the overlap of the two ranges.
    pub fn product(&self, other: &Signal) -> Self {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end()).max(lo);
        Self::from_fn(GridWindow { lo, hi }, |x| self.get(x) * other.get(x))
    }

    /// Re-express on `window`, dropping anything outside it.
    pub fn restricted(&self, window: GridWindow) -> Self {
        Self::from_fn(window, |x| self.get(x))
    }

    pub fn add(&self, other: &Signal) -> Self {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        Self::from_fn(GridWindow { lo, hi }, |x| self.get(x) + other.get(x))
    }

    /// Index range actually stored.
    pub fn window(&self) -> GridWindow {
        GridWindow {
            lo: self.offset,
            hi: self.end(),
        }
    }
}

/// Offset `o(t, k)` of grid `t` at level `k`.
pub fn grid_offset(shift: u8, level: u32) -> i64 {
    let sign = if level.is_multiple_of(2) { 1 } else { -1 };
    let num = sign * (shift as i64 - 1) * (1i64 << level);
    // nearest integer to num/3; num is never ≡ 3/2 mod 3 so there are no ties
    (num + 1).div_euclid(3)
}

/// Offsets `(lo, len)` of `⅓Q` relative to the start of a cube of grid
/// `shift` at `level`.
fn third_geometry(shift: u8, level: u32) -> (i64, i64) {
    let side = 1i64 << level;
    let mut order: [(i64, u8); 3] = [1u8, 2, 3].map(|t| (grid_offset(t, level).rem_euclid(side), t));
    order.sort();
    let gaps = [
        order[1].0 - order[0].0,
        order[2].0 - order[1].0,
        order[0].0 + side - order[2].0,
    ];
    let p = order.iter().position(|&(_, t)| t == shift).expect("shift in 1..=3");
    (gaps[p], gaps[(p + 1) % 3])
}

/// A cube (interval) of one of the three shifted dyadic grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub shift: u8,
    pub level: u32,
    pub index: i64,
}

pub const MAX_LEVEL: u32 = 60;

impl DyadicCube {
    pub fn new(shift: u8, level: u32, index: i64) -> Result<Self> {
        if !(1..=3).contains(&shift) {
            return Err(invalid(format!("grid shift {shift} not in 1..=3")));
        }
        if level > MAX_LEVEL {
            return Err(invalid(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        Ok(Self { shift, level, index })
    }

    /// The cube of grid `shift` at `level` containing `x`.
    pub fn containing(shift: u8, level: u32, x: i64) -> Self {
        let index = (x - grid_offset(shift, level)).div_euclid(1i64 << level);
        Self { shift, level, index }
    }

    /// Side length ℓQ = |Q| = 2^level.
    pub fn side(&self) -> i64 {
        1i64 << self.level
    }

    pub fn start(&self) -> i64 {
        self.index * self.side() + grid_offset(self.shift, self.level)
    }

    pub fn end(&self) -> i64 {
        self.start() + self.side()
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.start(), self.end())
    }

    pub fn contains(&self, x: i64) -> bool {
        self.start() <= x && x < self.end()
    }

    /// The concentric triple 3Q, `3·2^level` points.
    pub fn triple(&self) -> (i64, i64) {
        let s = self.side();
        (self.start() - s, self.end() + s)
    }

    /// The middle third ⅓Q of the discrete grid.
    pub fn third(&self) -> (i64, i64) {
        let (lo, len) = third_geometry(self.shift, self.level);
        let a = self.start() + lo;
        (a, a + len)
    }

    /// The two cubes of the same grid one level down, left first.
    pub fn children(&self) -> Option<[DyadicCube; 2]> {
        if self.level == 0 {
            return None;
        }
        let left = Self::containing(self.shift, self.level - 1, self.start());
        debug_assert_eq!(left.start(), self.start());
        Some([
            left,
            DyadicCube {
                index: left.index + 1,
                ..left
            },
        ])
    }

    pub fn parent(&self) -> DyadicCube {
        Self::containing(self.shift, self.level + 1, self.start())
    }

    /// Q ⊂ self as sets.
    pub fn contains_cube(&self, q: &DyadicCube) -> bool {
        self.start() <= q.start() && q.end() <= self.end()
    }

    pub fn within(&self, window: GridWindow) -> bool {
        window.contains_range(self.start(), self.end())
    }
}

impl std::fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "D{}[{}, {})", self.shift, self.start(), self.end())
    }
}

/// Σ_{x ∈ [lo, hi)} |f(x)|^r by direct summation.
pub fn power_sum(f: &Signal, lo: i64, hi: i64, r: f64) -> f64 {
    let a = lo.max(f.offset());
    let b = hi.min(f.end());
    if a >= b {
        return 0.0;
    }
    let vals = &f.values()[(a - f.offset()) as usize..(b - f.offset()) as usize];
    if r == 1.0 {
        vals.iter().map(|v| v.abs()).sum()
    } else {
        vals.iter().map(|v| v.abs().powf(r)).sum()
    }
}

/// ⟨f⟩_{Q,r} = ( |3Q|⁻¹ Σ_{x∈3Q} |f(x)|^r )^{1/r}.
pub fn local_average(f: &Signal, q: &DyadicCube, r: f64) -> Result<f64> {
    check_exponent(r)?;
    let (lo, hi) = q.triple();
    Ok((power_sum(f, lo, hi, r) / (hi - lo) as f64).powf(1.0 / r))
}

/// Plain r-average over `[lo, hi)` (no tripling).
pub fn interval_average(f: &Signal, lo: i64, hi: i64, r: f64) -> Result<f64> {
    check_exponent(r)?;
    if hi <= lo {
        return Err(invalid("average over an empty interval"));
    }
    Ok((power_sum(f, lo, hi, r) / (hi - lo) as f64).powf(1.0 / r))
}

pub(crate) fn check_exponent(r: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid(format!("average exponent r = {r} must be a finite number ≥ 1")));
    }
    Ok(())
}

/// ⟨f, g⟩ = Σ_x f(x) g(x).
pub fn bilinear_pairing(f: &Signal, g: &Signal) -> f64 {
    let lo = f.offset().max(g.offset());
    let hi = f.end().min(g.end());
    (lo..hi).map(|x| f.get(x) * g.get(x)).sum()
}

/// Cubes of grid `shift` at `level` that meet the window, in index order.
pub fn shifted_grid_cubes(shift: u8, level: u32, window: GridWindow) -> Vec<DyadicCube> {
    if window.is_empty() {
        return Vec::new();
    }
    let first = DyadicCube::containing(shift, level, window.lo);
    let last = DyadicCube::containing(shift, level, window.hi - 1);
    (first.index..=last.index)
        .map(|index| DyadicCube { index, ..first })
        .collect()
}

/// All cubes of all three grids and every level that lie inside the window.
pub fn dyadic_family(window: GridWindow) -> Vec<DyadicCube> {
    let mut out = Vec::new();
    if window.is_empty() {
        return out;
    }
    let max_level = 63 - (window.len() as u64).leading_zeros();
    for level in 0..=max_level {
        for shift in 1..=3u8 {
            out.extend(
                shifted_grid_cubes(shift, level, window)
                    .into_iter()
                    .filter(|q| q.within(window)),
            );
        }
    }
    out
}

/// Prefix sums of |f|^r on a fixed range, for O(1) interval sums.
#[derive(Debug, Clone)]
pub struct PowerSums {
    lo: i64,
    prefix: Vec<f64>,
}

impl PowerSums {
    pub fn new(f: &Signal, r: f64) -> Self {
        let mut prefix = Vec::with_capacity(f.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in f.values() {
            acc += v.abs().powf(r);
            prefix.push(acc);
        }
        Self {
            lo: f.offset(),
            prefix,
        }
    }

    fn clamp(&self, x: i64) -> usize {
        (x - self.lo).clamp(0, self.prefix.len() as i64 - 1) as usize
    }

    /// Σ_{x ∈ [a, b)} |f(x)|^r.
    pub fn sum(&self, a: i64, b: i64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.prefix[self.clamp(b)] - self.prefix[self.clamp(a)]).max(0.0)
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap_or(&0.0)
    }
}
