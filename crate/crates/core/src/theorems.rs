//! Executable checks of the closed-form optima, theta sweeps and regime
//! threshold detection.
//!
//! Every verification returns a [`VerificationResult`] rather than failing;
//! `passed` holds exactly when `max_discrepancy <= tolerance`. Claims that
//! assert a strict welfare improvement measure `before - after` and use the
//! negative tolerance `-MIN_GAIN`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_unit, Error, Result};
use crate::model::{indifferent_point, FacilityConfig, Preferences};
use crate::optimize::{solve, Family, Regime, SolveOptions, SolveReport, STRUCTURE_TOL};
use crate::welfare::welfare;

/// Linear-quality boundary between segregated and single-facility optima.
pub const THEOREM1_THRESHOLD: f64 = 0.25;

/// Upper end of the theta range where the square-root model has the
/// symmetric optimum: `1 / (4 sqrt 2)`.
pub const THEOREM2_UPPER: f64 = 1.0 / (4.0 * SQRT_2);

/// Smallest welfare gain accepted as a strict improvement.
pub const MIN_GAIN: f64 = 1e-15;

/// Inward step used by the boundary-perturbation check.
pub const LEMMA_STEP: f64 = 1e-3;

/// `(48 theta^2 + 24 theta - 1) / 48`: segregated optimum, linear quality.
pub fn segregated_welfare(theta: f64) -> f64 {
    (48.0 * theta * theta + 24.0 * theta - 1.0) / 48.0
}

/// `(24 theta - 1) / 48`: symmetric configuration, linear quality.
pub fn symmetric_welfare_linear(theta: f64) -> f64 {
    (24.0 * theta - 1.0) / 48.0
}

/// `(24 sqrt(2) theta - 1) / 48`: symmetric configuration, square-root quality.
pub fn symmetric_welfare_sqrt(theta: f64) -> f64 {
    (24.0 * SQRT_2 * theta - 1.0) / 48.0
}

/// `(48 theta - 4) / 48`: one facility with all the quality at 1/2.
pub fn corner_welfare(theta: f64) -> f64 {
    (48.0 * theta - 4.0) / 48.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Claim {
    /// Linear quality: segregated optima below 1/4, single facility above.
    Theorem1,
    /// Square-root quality: symmetric optimum below `1 / (4 sqrt 2)`.
    Theorem2,
    /// Coincident equal-quality facilities are never optimal.
    Remark,
    /// Interior split implies interior, distinct locations.
    LemmaBoundary,
}

impl Claim {
    pub fn as_str(self) -> &'static str {
        match self {
            Claim::Theorem1 => "theorem1",
            Claim::Theorem2 => "theorem2",
            Claim::Remark => "remark",
            Claim::LemmaBoundary => "lemma",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(Claim::Theorem1),
            "theorem2" => Ok(Claim::Theorem2),
            "remark" => Ok(Claim::Remark),
            "lemma" => Ok(Claim::LemmaBoundary),
            _ => Err(Error::InvalidArgument("unknown claim")),
        }
    }
}

/// One measured discrepancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub label: &'static str,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub claim: Claim,
    pub theta: f64,
    pub gamma: f64,
    pub passed: bool,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    /// Configurations backing the verdict (optima found, improving moves).
    pub witnesses: Vec<FacilityConfig>,
}

impl VerificationResult {
    fn new(
        claim: Claim,
        prefs: &Preferences,
        tolerance: f64,
        checks: Vec<Check>,
        witnesses: Vec<FacilityConfig>,
    ) -> Self {
        let max_discrepancy = checks
            .iter()
            .map(|c| c.discrepancy)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            claim,
            theta: prefs.theta(),
            gamma: prefs.gamma(),
            // NaN discrepancies fail
            passed: max_discrepancy <= tolerance,
            max_discrepancy,
            tolerance,
            checks,
            witnesses,
        }
    }
}

fn oracle_checks(report: &SolveReport, checks: &mut Vec<Check>) {
    checks.push(Check {
        label: "oracle excess",
        discrepancy: (report.oracle.welfare - report.welfare_star).max(0.0),
    });
    checks.push(Check {
        label: "oracle shortfall",
        discrepancy: (report.welfare_star - report.oracle.welfare).max(0.0),
    });
}

fn witnesses(report: &SolveReport) -> Vec<FacilityConfig> {
    let mut w: Vec<_> = report.optima.iter().map(|c| c.config).collect();
    w.push(report.oracle.config);
    w
}

/// Linear quality. Below 1/4 the optima are `(1/4 - theta, 3/4 - theta, 0)`
/// and its mirror; from 1/4 on one facility with all the quality sits at
/// 1/2 and serves everyone.
pub fn verify_theorem1(theta: f64, opts: &SolveOptions) -> Result<VerificationResult> {
    let prefs = Preferences::linear(theta)?;
    let report = solve(&prefs, opts)?;
    let mut checks = Vec::new();

    if theta < THEOREM1_THRESHOLD {
        let expected = [
            FacilityConfig::new(0.25 - theta, 0.75 - theta, 0.0)?,
            FacilityConfig::new(0.25 + theta, 0.75 + theta, 1.0)?,
        ];
        checks.push(Check {
            label: "optimum count",
            discrepancy: (report.optima.len() as f64 - 2.0).abs(),
        });
        let distance = expected
            .iter()
            .map(|e| {
                report
                    .optima
                    .iter()
                    .map(|o| o.config.distance(e))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        checks.push(Check {
            label: "config distance",
            discrepancy: distance,
        });
        checks.push(Check {
            label: "welfare",
            discrepancy: (report.welfare_star - segregated_welfare(theta)).abs(),
        });
    } else {
        let mut corner_q = 0.0f64;
        let mut serving = 0.0f64;
        let mut split = 0.0f64;
        let (mut low_q, mut high_q) = (false, false);
        for o in &report.optima {
            let c = o.config;
            let jhat = indifferent_point(&c, &prefs).jhat;
            corner_q = corner_q.max(c.q().min(1.0 - c.q()));
            split = split.max(jhat.min(1.0 - jhat));
            let server = if jhat >= 0.5 { c.a() } else { c.b() };
            serving = serving.max((server - 0.5).abs());
            low_q |= c.q() <= STRUCTURE_TOL;
            high_q |= c.q() >= 1.0 - STRUCTURE_TOL;
        }
        checks.push(Check {
            label: "corner quality",
            discrepancy: corner_q,
        });
        checks.push(Check {
            label: "serving location",
            discrepancy: serving,
        });
        checks.push(Check {
            label: "split at boundary",
            discrepancy: split,
        });
        checks.push(Check {
            label: "both corner families",
            discrepancy: if low_q && high_q { 0.0 } else { 1.0 },
        });
        checks.push(Check {
            label: "welfare",
            discrepancy: (report.welfare_star - corner_welfare(theta)).abs(),
        });
    }
    oracle_checks(&report, &mut checks);
    Ok(VerificationResult::new(
        Claim::Theorem1,
        &prefs,
        opts.tol,
        checks,
        witnesses(&report),
    ))
}

/// Square-root quality with `theta < 1 / (4 sqrt 2)`: the unique optimum is
/// `(1/4, 3/4, 1/2)` and it strictly beats the corner families.
pub fn verify_theorem2(theta: f64, opts: &SolveOptions) -> Result<VerificationResult> {
    if !(theta > 0.0 && theta < THEOREM2_UPPER) {
        return Err(Error::ThetaOutOfRange {
            theta,
            lo: 0.0,
            hi: THEOREM2_UPPER,
        });
    }
    let prefs = Preferences::square_root(theta)?;
    let report = solve(&prefs, opts)?;
    let symmetric = FacilityConfig::new(0.25, 0.75, 0.5)?;

    let corner = report
        .optima
        .iter()
        .chain(crate::optimize::candidate_stationary(&prefs)?.iter())
        .filter(|c| matches!(c.family, Family::CornerAllLeft | Family::CornerAllRight))
        .map(|c| c.welfare)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = report.welfare_star - corner;
    let expected_margin = symmetric_welfare_sqrt(theta) - corner_welfare(theta);

    let mut checks = vec![
        Check {
            label: "optimum count",
            discrepancy: (report.optima.len() as f64 - 1.0).abs(),
        },
        Check {
            label: "config distance",
            discrepancy: report.optima[0].config.distance(&symmetric),
        },
        Check {
            label: "welfare",
            discrepancy: (report.welfare_star - symmetric_welfare_sqrt(theta)).abs(),
        },
        Check {
            label: "corner margin",
            discrepancy: (margin - expected_margin).abs(),
        },
        Check {
            label: "strictly beats corners",
            discrepancy: if margin > 0.0 { 0.0 } else { f64::INFINITY },
        },
    ];
    oracle_checks(&report, &mut checks);
    Ok(VerificationResult::new(
        Claim::Theorem2,
        &prefs,
        opts.tol,
        checks,
        witnesses(&report),
    ))
}

const REMARK_LATTICE: usize = 21;

/// Exhibits `(a', b', 1/2)` with `a' < b'` that strictly beats the
/// coincident configuration `(a, a, 1/2)`.
pub fn verify_remark(a: f64, prefs: &Preferences) -> Result<VerificationResult> {
    check_unit("a", a)?;
    let coincident = FacilityConfig::new(a, a, 0.5)?;
    let before = welfare(&coincident, prefs);

    let last = (REMARK_LATTICE - 1) as f64;
    let mut best = (f64::NEG_INFINITY, coincident);
    for i in 0..REMARK_LATTICE {
        for j in (i + 1)..REMARK_LATTICE {
            let c = FacilityConfig::new_unchecked(i as f64 / last, j as f64 / last, 0.5);
            let w = welfare(&c, prefs);
            if w > best.0 {
                best = (w, c);
            }
        }
    }
    Ok(VerificationResult::new(
        Claim::Remark,
        prefs,
        -MIN_GAIN,
        vec![Check {
            label: "welfare deficit of best split",
            discrepancy: before - best.0,
        }],
        vec![coincident, best.1],
    ))
}

/// [`verify_remark`] for every `a` on a uniform grid of `points` values.
pub fn verify_remark_grid(prefs: &Preferences, points: usize) -> Result<VerificationResult> {
    if points < 2 {
        return Err(Error::InvalidArgument(
            "remark grid needs at least 2 points",
        ));
    }
    let mut checks = Vec::with_capacity(points);
    let mut worst: Option<(f64, Vec<FacilityConfig>)> = None;
    for k in 0..points {
        let r = verify_remark(k as f64 / (points - 1) as f64, prefs)?;
        if worst.as_ref().is_none_or(|(d, _)| r.max_discrepancy > *d) {
            worst = Some((r.max_discrepancy, r.witnesses.clone()));
        }
        checks.extend(r.checks);
    }
    let witnesses = worst.map(|(_, w)| w).unwrap_or_default();
    Ok(VerificationResult::new(
        Claim::Remark,
        prefs,
        -MIN_GAIN,
        checks,
        witnesses,
    ))
}

/// Boundary configurations with an interior split are never optimal: moving
/// a facility off the endpoint by [`LEMMA_STEP`] raises welfare. Also checks
/// that every optimum with an interior split has `0 < a < b < 1`.
pub fn verify_lemma_boundary(
    prefs: &Preferences,
    n_samples: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<VerificationResult> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "lemma check needs at least one sample",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::with_capacity(n_samples + 1);
    let mut witnesses = Vec::new();

    for k in 0..n_samples {
        let at_left = k % 2 == 0;
        let (start, moved) = sample_boundary(&mut rng, prefs, at_left)?;
        let gain = welfare(&moved, prefs) - welfare(&start, prefs);
        checks.push(Check {
            label: if at_left {
                "a = 0 perturbation"
            } else {
                "b = 1 perturbation"
            },
            discrepancy: -gain,
        });
        if gain < MIN_GAIN {
            witnesses.push(start);
        }
    }

    let report = solve(prefs, opts)?;
    let mut interior = f64::NEG_INFINITY;
    for o in &report.optima {
        let c = o.config;
        let jhat = indifferent_point(&c, prefs).jhat;
        if jhat > 0.0 && jhat < 1.0 {
            interior = interior.max(-c.a()).max(c.b() - 1.0).max(c.a() - c.b());
            witnesses.push(c);
        }
    }
    if interior.is_finite() {
        checks.push(Check {
            label: "interior optimum locations",
            discrepancy: interior,
        });
    }
    Ok(VerificationResult::new(
        Claim::LemmaBoundary,
        prefs,
        -MIN_GAIN,
        checks,
        witnesses,
    ))
}

/// Random `(0, b, q)` (or `(a, 1, q)`) whose split is comfortably interior,
/// paired with the configuration moved inward by [`LEMMA_STEP`].
fn sample_boundary(
    rng: &mut ChaCha8Rng,
    prefs: &Preferences,
    at_left: bool,
) -> Result<(FacilityConfig, FacilityConfig)> {
    for _ in 0..100_000 {
        let other = rng.random_range(0.1..=1.0);
        let q: f64 = rng.random_range(0.0..=1.0);
        let (start, moved) = if at_left {
            (
                FacilityConfig::new_unchecked(0.0, other, q),
                FacilityConfig::new_unchecked(LEMMA_STEP, other, q),
            )
        } else {
            let a = 1.0 - other;
            (
                FacilityConfig::new_unchecked(a, 1.0, q),
                FacilityConfig::new_unchecked(a, 1.0 - LEMMA_STEP, q),
            )
        };
        let jhat = indifferent_point(&start, prefs).jhat;
        if (0.05..=0.95).contains(&jhat) {
            return Ok((start, moved));
        }
    }
    Err(Error::InvalidArgument(
        "no boundary configuration with an interior split",
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub jhat: f64,
    pub welfare: f64,
    pub regime: Regime,
}

/// Solves at `steps` evenly spaced theta values in `[theta_min, theta_max]`
/// and reports the `q <= 1/2` representative of each optimum set.
pub fn sweep_theta(
    theta_min: f64,
    theta_max: f64,
    steps: usize,
    gamma: f64,
    opts: &SolveOptions,
) -> Result<Vec<SweepRow>> {
    if !(theta_min > 0.0 && theta_min < theta_max && theta_max.is_finite()) {
        return Err(Error::InvalidArgument(
            "sweep needs 0 < theta_min < theta_max",
        ));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument("sweep needs at least 2 steps"));
    }
    let span = theta_max - theta_min;
    let theta_at = |k: usize| {
        if k == steps - 1 {
            theta_max
        } else {
            theta_min + span * k as f64 / (steps - 1) as f64
        }
    };
    let row = |k: usize| -> Result<SweepRow> {
        let theta = theta_at(k);
        let prefs = Preferences::new(theta, gamma)?;
        let report = solve(&prefs, opts)?;
        let rep = report.representative();
        Ok(SweepRow {
            theta,
            a: rep.config.a(),
            b: rep.config.b(),
            q: rep.config.q(),
            jhat: indifferent_point(&rep.config, &prefs).jhat,
            welfare: rep.welfare,
            regime: report.regime,
        })
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..steps).into_par_iter().map(row).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..steps).map(row).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub theta: f64,
    pub lower_regime: Regime,
    pub upper_regime: Regime,
    pub iterations: usize,
}

/// Bisection on the regime label of [`solve`] until the bracket is narrower
/// than `tol`; returns its midpoint.
pub fn detect_threshold(
    gamma: f64,
    bracket: (f64, f64),
    tol: f64,
    opts: &SolveOptions,
) -> Result<Threshold> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidArgument("bracket must satisfy 0 < lo < hi"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "threshold tolerance must be positive",
        ));
    }
    let regime_at = |theta: f64| -> Result<Regime> {
        Ok(solve(&Preferences::new(theta, gamma)?, opts)?.regime)
    };
    let lower_regime = regime_at(lo)?;
    let upper_regime = regime_at(hi)?;
    if lower_regime == upper_regime {
        return Err(Error::NoRegimeChange(lower_regime));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if regime_at(mid)? == lower_regime {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        theta: 0.5 * (lo + hi),
        lower_regime,
        upper_regime,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> SolveOptions {
        SolveOptions {
            resolution: 61,
            tol: 1e-8,
        }
    }

    #[test]
    fn closed_form_arithmetic() {
        assert!((segregated_welfare(0.25) - 1.0 / 6.0).abs() < 1e-15);
        assert!((corner_welfare(0.25) - 1.0 / 6.0).abs() < 1e-15);
        assert!((corner_welfare(1.0) - 44.0 / 48.0).abs() < 1e-15);
        assert!((symmetric_welfare_sqrt(0.01) + 0.013_762_265_521_467_856).abs() < 1e-15);
        assert!((THEOREM2_UPPER - 0.176_776_695_296_636_9).abs() < 1e-15);
        for theta in [0.01, 0.1, 0.2] {
            let gap = segregated_welfare(theta) - symmetric_welfare_linear(theta);
            assert!((gap - theta * theta).abs() < 1e-15);
        }
    }

    #[test]
    fn theorem1_examples() {
        for theta in [0.1, 0.25, 1.0] {
            let r = verify_theorem1(theta, &SolveOptions::default()).unwrap();
            assert!(r.passed, "theta {theta}: {r:?}");
        }
        let r = verify_theorem1(0.1, &fast()).unwrap();
        assert!((r.witnesses[0].distance(&FacilityConfig::new(0.15, 0.65, 0.0).unwrap())) < 1e-12);
    }

    #[test]
    fn theorem2_examples() {
        for theta in [0.1, 0.17, 0.01] {
            let r = verify_theorem2(theta, &SolveOptions::default()).unwrap();
            assert!(r.passed, "theta {theta}: {r:?}");
        }
        assert!(matches!(
            verify_theorem2(0.2, &fast()),
            Err(Error::ThetaOutOfRange { .. })
        ));
    }

    #[test]
    fn remark_examples() {
        let lin = Preferences::linear(0.1).unwrap();
        let r = verify_remark(0.5, &lin).unwrap();
        assert!(r.passed);
        // the 21-point lattice contains the symmetric configuration
        assert_eq!(r.witnesses[1].to_array(), [0.25, 0.75, 0.5]);
        assert!((welfare(&r.witnesses[0], &lin) + 0.033_333_333_333_333_33).abs() < 1e-15);

        let r = verify_remark(0.0, &lin).unwrap();
        assert!(r.passed);
        assert!((welfare(&r.witnesses[0], &lin) - (0.05 - 1.0 / 3.0)).abs() < 1e-15);

        let root = Preferences::square_root(0.1).unwrap();
        assert!(verify_remark(0.5, &root).unwrap().passed);
        assert!(verify_remark(1.5, &root).is_err());
    }

    #[test]
    fn lemma_examples() {
        let lin = Preferences::linear(0.1).unwrap();
        let w0 = welfare(&FacilityConfig::new(0.0, 0.6, 0.3).unwrap(), &lin);
        let w1 = welfare(&FacilityConfig::new(1e-3, 0.6, 0.3).unwrap(), &lin);
        assert!(w1 > w0);
        let w0 = welfare(&FacilityConfig::new(0.4, 1.0, 0.7).unwrap(), &lin);
        let w1 = welfare(&FacilityConfig::new(0.4, 1.0 - 1e-3, 0.7).unwrap(), &lin);
        assert!(w1 > w0);

        let r = verify_lemma_boundary(&lin, 20, 7, &fast()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.checks.last().unwrap().label, "interior optimum locations");
        assert!(verify_lemma_boundary(&lin, 0, 7, &fast()).is_err());
    }

    #[test]
    fn sweep_rows_are_mirror_normalised() {
        let rows = sweep_theta(0.05, 0.45, 9, 1.0, &fast()).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.q <= 0.5));
        assert_eq!(rows[3].regime, Regime::Segregated); // theta = 0.2
        assert_eq!(rows[5].regime, Regime::SingleFacility); // theta = 0.3
        assert!(sweep_theta(0.3, 0.1, 3, 1.0, &fast()).is_err());
        assert!(sweep_theta(0.1, 0.3, 1, 1.0, &fast()).is_err());
    }

    #[test]
    fn threshold_requires_regime_change() {
        assert_eq!(
            detect_threshold(1.0, (0.3, 0.4), 1e-4, &fast()),
            Err(Error::NoRegimeChange(Regime::SingleFacility))
        );
    }

    #[test]
    fn claim_labels_round_trip() {
        for c in [
            Claim::Theorem1,
            Claim::Theorem2,
            Claim::Remark,
            Claim::LemmaBoundary,
        ] {
            assert_eq!(c.as_str().parse::<Claim>().unwrap(), c);
        }
    }
}
