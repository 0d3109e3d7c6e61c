//! Exponent calculus for interpolating between an ℓ² bound that decays like
//! `2^{−ak}` and an ℓ¹ bound that grows like `2^{bk}`.
//!
//! Interpolating at `1/r = (1−θ) + θ/2`, i.e. `θ = 2(r−1)/r`, gives the
//! exponent `η(r) = θa − (1−θ)b`; it vanishes at the critical index `r₀`.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Gain `a` of the ℓ² endpoint and growth `b` of the ℓ¹ endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointPair {
    pub a: f64,
    pub b: f64,
}

impl EndpointPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(invalid(format!("endpoint exponents need a > 0, b ≥ 0 (got a = {a}, b = {b})")));
        }
        Ok(Self { a, b })
    }

    /// The pair of the random Hilbert scale blocks: `a = (1−α)/2`, `b = α`.
    pub fn random_hilbert(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid(format!("alpha = {alpha} must lie in [0, 1)")));
        }
        Self::new((1.0 - alpha) / 2.0, alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalIndex {
    pub theta0: f64,
    pub r0: f64,
}

/// `θ₀ = b/(a+b)` and `1/r₀ = (1−θ₀) + θ₀/2`.
pub fn critical_index(pair: EndpointPair) -> Result<CriticalIndex> {
    let s = pair.a + pair.b;
    if !(s > 0.0) {
        return Err(invalid("a + b must be positive"));
    }
    let theta0 = pair.b / s;
    Ok(CriticalIndex {
        theta0,
        r0: 1.0 / ((1.0 - theta0) + theta0 / 2.0),
    })
}

/// Interpolation parameter `θ = 2(r−1)/r`.
pub fn theta_of(r: f64) -> f64 {
    2.0 * (r - 1.0) / r
}

/// `η(r) = θa − (1−θ)b`, defined for `1 < r < 2`.
pub fn gain_exponent(pair: EndpointPair, r: f64) -> Result<f64> {
    if !(r > 1.0 && r < 2.0) {
        return Err(invalid(format!("r = {r} must lie in (1, 2)")));
    }
    let theta = theta_of(r);
    Ok(theta * pair.a - (1.0 - theta) * pair.b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedExponents {
    pub p: f64,
    /// `max{1, 1/(p−1)}`.
    pub sparse: f64,
    /// `1 + 1/p`, reported for `p > 2`.
    pub composite: Option<f64>,
    /// `[w]_{A_p}` raised to the sparse exponent.
    pub sparse_bound: f64,
}

pub fn weighted_exponents(p: f64, ap_char: f64) -> Result<WeightedExponents> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p = {p} must be a finite number > 1")));
    }
    if !(ap_char >= 1.0) {
        return Err(invalid(format!("an A_p characteristic is at least 1 (got {ap_char})")));
    }
    let sparse = 1f64.max(1.0 / (p - 1.0));
    Ok(WeightedExponents {
        p,
        sparse,
        composite: (p > 2.0).then(|| 1.0 + 1.0 / p),
        sparse_bound: ap_char.powf(sparse),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_gives_four_thirds() {
        let c = critical_index(EndpointPair::random_hilbert(1.0 / 3.0).unwrap()).unwrap();
        assert!((c.theta0 - 0.5).abs() < 1e-15);
        assert!((c.r0 - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pure_gain() {
        let c = critical_index(EndpointPair::new(0.3, 0.0).unwrap()).unwrap();
        assert_eq!(c.theta0, 0.0);
        assert_eq!(c.r0, 1.0);
    }

    #[test]
    fn half_at_seven_quarters() {
        let eta = gain_exponent(EndpointPair::random_hilbert(0.5).unwrap(), 1.75).unwrap();
        assert!((eta - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn ranges() {
        let pair = EndpointPair::new(1.0, 1.0).unwrap();
        assert!(gain_exponent(pair, 1.0).is_err());
        assert!(gain_exponent(pair, 2.0).is_err());
        assert!(EndpointPair::new(0.0, 1.0).is_err());
        assert!(weighted_exponents(1.0, 2.0).is_err());
        assert!(weighted_exponents(2.0, 0.5).is_err());
    }

    #[test]
    fn weighted() {
        let w = weighted_exponents(2.0, 3.0).unwrap();
        assert_eq!(w.sparse, 1.0);
        assert_eq!(w.composite, None);
        assert!((weighted_exponents(3.0, 1.0).unwrap().composite.unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(weighted_exponents(1.001, 1.0).unwrap().sparse > 999.0);
    }
}
