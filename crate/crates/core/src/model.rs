//! Preferences, facility configurations and the two primitives everything
//! else is built on: individual utility and the indifferent individual.

use crate::error::{check_unit, Error, Result};
use crate::math::quality_response;

/// Locations closer than this are treated as coincident.
pub const COINCIDENT_EPS: f64 = 1e-12;

/// Common quality valuation `theta` and quality exponent `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preferences {
    theta: f64,
    gamma: f64,
}

impl Preferences {
    /// `theta > 0` and `0 < gamma <= 1`. Exponents other than 1 and 1/2 are
    /// supported numerically but have no closed-form optimum.
    pub fn new(theta: f64, gamma: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Domain {
                name: "theta",
                value: theta,
                domain: "(0, inf)",
            });
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Domain {
                name: "gamma",
                value: gamma,
                domain: "(0, 1]",
            });
        }
        Ok(Self { theta, gamma })
    }

    pub fn linear(theta: f64) -> Result<Self> {
        Self::new(theta, 1.0)
    }

    pub fn square_root(theta: f64) -> Result<Self> {
        Self::new(theta, 0.5)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `g(q) = q^gamma`.
    pub fn response(&self, q: f64) -> f64 {
        quality_response(q, self.gamma)
    }

    /// `theta * (g(q) - g(1 - q))`, the quality advantage of the left facility.
    pub(crate) fn quality_gap(&self, q: f64) -> f64 {
        self.theta * (self.response(q) - self.response(1.0 - q))
    }
}

/// Locations `a <= b` in `[0, 1]` and the left facility's quality share `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacilityConfig {
    a: f64,
    b: f64,
    q: f64,
}

impl FacilityConfig {
    pub fn new(a: f64, b: f64, q: f64) -> Result<Self> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        check_unit("q", q)?;
        if a > b {
            return Err(Error::Unordered { a, b });
        }
        Ok(Self { a, b, q })
    }

    /// Caller guarantees `0 <= a <= b <= 1` and `0 <= q <= 1`.
    pub(crate) fn new_unchecked(a: f64, b: f64, q: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&a) && a <= b && b <= 1.0 && (0.0..=1.0).contains(&q));
        Self { a, b, q }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.a, self.b, self.q]
    }

    /// Reflection `i -> 1 - i`: `(1 - b, 1 - a, 1 - q)`.
    pub fn mirror(&self) -> Self {
        Self {
            a: 1.0 - self.b,
            b: 1.0 - self.a,
            q: 1.0 - self.q,
        }
    }

    /// Max-norm distance over `(a, b, q)`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.q - other.q).abs())
    }

    pub fn is_coincident(&self) -> bool {
        (self.b - self.a).abs() < COINCIDENT_EPS
    }
}

/// Split point `jhat`: individuals in `[0, jhat]` use the facility at `a`,
/// those in `[jhat, 1]` the one at `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndifferencePoint {
    pub jhat: f64,
    /// Unclamped solution of `u(i, a) = u(i, b)`; `None` when `a = b`.
    pub raw: Option<f64>,
    /// Coincident facilities with equal quality. `jhat` is 0 by convention.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Facility {
    A,
    B,
}

/// `theta * qx^gamma - (i - x)^2`.
pub fn utility(i: f64, x: f64, qx: f64, prefs: &Preferences) -> Result<f64> {
    check_unit("i", i)?;
    check_unit("x", x)?;
    check_unit("qx", qx)?;
    Ok(utility_unchecked(i, x, qx, prefs))
}

#[inline]
pub(crate) fn utility_unchecked(i: f64, x: f64, qx: f64, prefs: &Preferences) -> f64 {
    let d = i - x;
    prefs.theta * prefs.response(qx) - d * d
}

pub fn indifferent_point(config: &FacilityConfig, prefs: &Preferences) -> IndifferencePoint {
    let FacilityConfig { a, b, q } = *config;
    if config.is_coincident() {
        // Everyone goes to the better facility; equal quality has no split.
        return if q > 0.5 {
            IndifferencePoint {
                jhat: 1.0,
                raw: None,
                degenerate: false,
            }
        } else if q < 0.5 {
            IndifferencePoint {
                jhat: 0.0,
                raw: None,
                degenerate: false,
            }
        } else {
            IndifferencePoint {
                jhat: 0.0,
                raw: None,
                degenerate: true,
            }
        };
    }
    let raw = raw_indifference(a, b, q, prefs);
    IndifferencePoint {
        jhat: raw.clamp(0.0, 1.0),
        raw: Some(raw),
        degenerate: false,
    }
}

/// `(a^2 - b^2 - theta (g(q) - g(1-q))) / (2 (a - b))`, for `a != b`.
#[inline]
pub(crate) fn raw_indifference(a: f64, b: f64, q: f64, prefs: &Preferences) -> f64 {
    (a * a - b * b - prefs.quality_gap(q)) / (2.0 * (a - b))
}

/// The facility individual `i` uses. Strict utility comparison decides;
/// ties go to `A` exactly when `i <= jhat`.
pub fn assign(i: f64, config: &FacilityConfig, prefs: &Preferences) -> Result<Facility> {
    check_unit("i", i)?;
    Ok(assign_unchecked(i, config, prefs))
}

pub(crate) fn assign_unchecked(i: f64, config: &FacilityConfig, prefs: &Preferences) -> Facility {
    let ua = utility_unchecked(i, config.a, config.q, prefs);
    let ub = utility_unchecked(i, config.b, 1.0 - config.q, prefs);
    if ua > ub {
        Facility::A
    } else if ua < ub {
        Facility::B
    } else if i <= indifferent_point(config, prefs).jhat {
        Facility::A
    } else {
        Facility::B
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(a: f64, b: f64, q: f64) -> FacilityConfig {
        FacilityConfig::new(a, b, q).unwrap()
    }

    /// Largest grid point that weakly prefers `a`, found by comparing
    /// utilities directly.
    fn brute_force_split(config: &FacilityConfig, prefs: &Preferences, points: usize) -> f64 {
        let mut last = 0.0;
        for k in 0..=points {
            let i = k as f64 / points as f64;
            let ua = prefs.theta * prefs.response(config.q) - (i - config.a).powi(2);
            let ub = prefs.theta * prefs.response(1.0 - config.q) - (i - config.b).powi(2);
            if ua >= ub - 1e-15 {
                last = i;
            }
        }
        last
    }

    #[test]
    fn utility_examples() {
        let lin = Preferences::linear(0.1).unwrap();
        assert!((utility(0.5, 0.25, 1.0, &lin).unwrap() - 0.0375).abs() < 1e-15);
        for &(theta, gamma) in &[(0.1, 1.0), (2.0, 0.5), (0.3, 0.7)] {
            let p = Preferences::new(theta, gamma).unwrap();
            assert_eq!(utility(0.4, 0.4, 0.0, &p).unwrap(), 0.0);
        }
        let root = Preferences::square_root(0.1).unwrap();
        let expected = 0.1 * 0.5f64.sqrt() - 0.0625;
        assert!((utility(0.5, 0.75, 0.5, &root).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.008_210_678).abs() < 1e-9);
    }

    #[test]
    fn utility_rejects_out_of_range() {
        let p = Preferences::linear(0.1).unwrap();
        assert!(utility(1.5, 0.2, 0.5, &p).is_err());
        assert!(utility(0.5, -0.1, 0.5, &p).is_err());
        assert!(utility(0.5, 0.2, 1.01, &p).is_err());
    }

    #[test]
    fn invalid_domain_values() {
        assert!(Preferences::new(0.0, 1.0).is_err());
        assert!(Preferences::new(0.1, 0.0).is_err());
        assert!(Preferences::new(0.1, 1.5).is_err());
        assert!(Preferences::new(f64::NAN, 1.0).is_err());
        assert!(FacilityConfig::new(0.6, 0.4, 0.5).is_err());
        assert!(FacilityConfig::new(0.1, 0.4, -0.5).is_err());
    }

    #[test]
    fn symmetric_split() {
        for theta in [0.01, 0.1, 3.0] {
            let p = Preferences::linear(theta).unwrap();
            let ip = indifferent_point(&cfg(0.25, 0.75, 0.5), &p);
            assert_eq!(ip.jhat, 0.5);
            assert!(!ip.degenerate);
        }
    }

    #[test]
    fn segregated_split_matches_brute_force() {
        let p = Preferences::linear(0.1).unwrap();
        let c = cfg(0.15, 0.65, 0.0);
        let brute = brute_force_split(&c, &p, 100_000);
        assert!((brute - 0.3).abs() <= 1e-5);
        let ip = indifferent_point(&c, &p);
        assert!((ip.jhat - 0.3).abs() < 1e-12);
        assert!((ip.jhat - (0.5 - 2.0 * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn coincident_with_higher_left_quality_serves_everyone_at_a() {
        for gamma in [1.0, 0.5, 0.25] {
            let p = Preferences::new(0.1, gamma).unwrap();
            let ip = indifferent_point(&cfg(0.2, 0.2, 0.8), &p);
            assert_eq!(ip.jhat, 1.0);
            assert!(ip.raw.is_none());
            let ip = indifferent_point(&cfg(0.2, 0.2, 0.3), &p);
            assert_eq!(ip.jhat, 0.0);
        }
    }

    #[test]
    fn clamped_above_one() {
        let p = Preferences::linear(1.0).unwrap();
        let c = cfg(0.4, 0.6, 1.0);
        let ip = indifferent_point(&c, &p);
        assert!((ip.raw.unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(ip.jhat, 1.0);
        assert_eq!(brute_force_split(&c, &p, 10_000), 1.0);
    }

    #[test]
    fn degenerate_marker() {
        let p = Preferences::linear(0.1).unwrap();
        let ip = indifferent_point(&cfg(0.3, 0.3, 0.5), &p);
        assert!(ip.degenerate);
        assert_eq!(ip.jhat, 0.0);
        // near-coincident counts as coincident
        let ip = indifferent_point(&cfg(0.3, 0.3 + 1e-13, 0.5), &p);
        assert!(ip.degenerate);
    }

    #[test]
    fn assignment_examples() {
        let p = Preferences::linear(0.1).unwrap();
        assert_eq!(assign(0.1, &cfg(0.25, 0.75, 0.5), &p).unwrap(), Facility::A);
        let c = cfg(0.15, 0.65, 0.0);
        let ua = utility(0.3, 0.15, 0.0, &p).unwrap();
        let ub = utility(0.3, 0.65, 1.0, &p).unwrap();
        assert!((ua - ub).abs() < 1e-15);
        assert_eq!(assign(0.3, &c, &p).unwrap(), Facility::A);
        assert_eq!(assign(0.35, &c, &p).unwrap(), Facility::B);
        assert!(assign(1.2, &c, &p).is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        let c = cfg(0.1, 0.7, 0.3);
        assert!(c.mirror().mirror().distance(&c) < 1e-15);
        let m = c.mirror();
        assert!(
            (m.a() - 0.3).abs() < 1e-15
                && (m.b() - 0.9).abs() < 1e-15
                && (m.q() - 0.7).abs() < 1e-15
        );
    }
}
