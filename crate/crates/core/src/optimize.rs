//! Global optimum search.
//!
//! Three independent routes feed [`solve`]: the analytic stationary
//! configurations of the first-order conditions ([`candidate_stationary`]),
//! an exhaustive lattice search ([`grid_search`]), and derivative-free
//! polishing of the lattice winner ([`refine`]).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{golden_max, sqrt};
use crate::model::{indifferent_point, FacilityConfig, Preferences};
use crate::theorems::{Claim, THEOREM2_UPPER};
use crate::welfare::welfare;

pub const DEFAULT_RESOLUTION: usize = 201;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Welfare values closer than this are treated as tied.
pub const WELFARE_TIE_TOL: f64 = 1e-12;

/// Structural tolerance used when labelling regimes.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Configurations closer than this (max-norm) are the same optimum.
const DUPLICATE_TOL: f64 = 1e-9;

pub const MAX_REFINE_SWEEPS: usize = 2_000;
const INITIAL_RADIUS: f64 = 0.1;
const PATTERN_REACH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// h = 1: `(1/4, 3/4, 1/2)`.
    InteriorSymmetric,
    /// h = 2: `(1/4 - theta, 3/4 - theta, 0)`, linear quality, `theta < 1/4`.
    LowQualityLeft,
    /// h = 3: `(1/4 + theta, 3/4 + theta, 1)`, linear quality, `theta < 1/4`.
    HighQualityLeft,
    /// h = 4: `(a, 1/2, 0)`, the facility at `b` serves everyone.
    CornerAllRight,
    /// h = 5: `(1/2, b, 1)`, the facility at `a` serves everyone.
    CornerAllLeft,
    /// Best point of the lattice search.
    Lattice,
    /// Output of local refinement.
    Refined,
}

impl Family {
    /// Index `h` of the analytic candidate families.
    pub fn index(self) -> Option<u8> {
        match self {
            Family::InteriorSymmetric => Some(1),
            Family::LowQualityLeft => Some(2),
            Family::HighQualityLeft => Some(3),
            Family::CornerAllRight => Some(4),
            Family::CornerAllLeft => Some(5),
            Family::Lattice | Family::Refined => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::InteriorSymmetric => "InteriorSymmetric",
            Family::LowQualityLeft => "LowQualityLeft",
            Family::HighQualityLeft => "HighQualityLeft",
            Family::CornerAllRight => "CornerAllRight",
            Family::CornerAllLeft => "CornerAllLeft",
            Family::Lattice => "Lattice",
            Family::Refined => "Refined",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Family::InteriorSymmetric,
            Family::LowQualityLeft,
            Family::HighQualityLeft,
            Family::CornerAllRight,
            Family::CornerAllLeft,
            Family::Lattice,
            Family::Refined,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or(Error::InvalidArgument("unknown candidate family"))
    }
}

/// Open interval `(lo, hi)` of theta; `hi = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRange {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl ThetaRange {
    pub const POSITIVE: ThetaRange = ThetaRange { lo: 0.0, hi: None };

    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lo && self.hi.is_none_or(|hi| theta < hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub config: FacilityConfig,
    pub family: Family,
    pub welfare: f64,
    pub valid_for_theta: ThetaRange,
    /// For the corner families, the interval the free location may take
    /// without changing welfare (`a` for h = 4, `b` for h = 5).
    pub free_range: Option<(f64, f64)>,
}

impl Candidate {
    fn new(
        config: FacilityConfig,
        family: Family,
        prefs: &Preferences,
        valid_for_theta: ThetaRange,
    ) -> Self {
        Self {
            config,
            family,
            welfare: welfare(&config, prefs),
            valid_for_theta,
            free_range: None,
        }
    }

    fn at(config: FacilityConfig, family: Family, prefs: &Preferences) -> Self {
        let theta = prefs.theta();
        Self::new(
            config,
            family,
            prefs,
            ThetaRange {
                lo: theta,
                hi: Some(theta),
            },
        )
    }

    fn mirrored(&self, prefs: &Preferences) -> Self {
        let family = match self.family {
            Family::LowQualityLeft => Family::HighQualityLeft,
            Family::HighQualityLeft => Family::LowQualityLeft,
            Family::CornerAllRight => Family::CornerAllLeft,
            Family::CornerAllLeft => Family::CornerAllRight,
            other => other,
        };
        let config = self.config.mirror();
        Self {
            config,
            family,
            welfare: welfare(&config, prefs),
            valid_for_theta: self.valid_for_theta,
            free_range: self.free_range.map(|(lo, hi)| (1.0 - hi, 1.0 - lo)),
        }
    }
}

/// The analytic stationary configurations for `gamma` in `{1, 1/2}`.
///
/// The corner families are reported through their canonical member
/// (`(1/2, 1/2, 0)` and `(1/2, 1/2, 1)`) plus the range of the free location.
pub fn candidate_stationary(prefs: &Preferences) -> Result<Vec<Candidate>> {
    let gamma = prefs.gamma();
    if gamma != 1.0 && gamma != 0.5 {
        return Err(Error::NoAnalyticCandidates(gamma));
    }
    let theta = prefs.theta();
    let point = |a, b, q| FacilityConfig::new_unchecked(a, b, q);

    let mut out = vec![Candidate::new(
        point(0.25, 0.75, 0.5),
        Family::InteriorSymmetric,
        prefs,
        ThetaRange::POSITIVE,
    )];
    if gamma == 1.0 && theta < 0.25 {
        let segregated = ThetaRange {
            lo: 0.0,
            hi: Some(0.25),
        };
        out.push(Candidate::new(
            point(0.25 - theta, 0.75 - theta, 0.0),
            Family::LowQualityLeft,
            prefs,
            segregated,
        ));
        out.push(Candidate::new(
            point(0.25 + theta, 0.75 + theta, 1.0),
            Family::HighQualityLeft,
            prefs,
            segregated,
        ));
    }

    // On (a, 1/2, 0) nobody uses `a` iff 1/4 - a^2 <= theta.
    let edge = sqrt((0.25 - theta).max(0.0));
    let mut right = Candidate::new(
        point(0.5, 0.5, 0.0),
        Family::CornerAllRight,
        prefs,
        ThetaRange::POSITIVE,
    );
    right.free_range = Some((edge, 0.5));
    let mut left = Candidate::new(
        point(0.5, 0.5, 1.0),
        Family::CornerAllLeft,
        prefs,
        ThetaRange::POSITIVE,
    );
    left.free_range = Some((0.5, 1.0 - edge));
    out.push(right);
    out.push(left);
    Ok(out)
}

/// Exhaustive search over `{k / (R - 1)}^3` restricted to `a <= b`.
///
/// Ties go to the lexicographically smallest `(a, b, q)`, independent of
/// how the lattice is partitioned across threads.
pub fn grid_search(prefs: &Preferences, resolution: usize) -> Result<Candidate> {
    if resolution < 3 {
        return Err(Error::InvalidArgument("grid resolution must be at least 3"));
    }
    let last = (resolution - 1) as f64;
    let coord = |k: usize| k as f64 / last;

    let row = |ia: usize| -> (f64, [usize; 3]) {
        let a = coord(ia);
        let mut best = (f64::NEG_INFINITY, [ia, ia, 0]);
        for ib in ia..resolution {
            let b = coord(ib);
            for iq in 0..resolution {
                let w = welfare(&FacilityConfig::new_unchecked(a, b, coord(iq)), prefs);
                if w > best.0 {
                    best = (w, [ia, ib, iq]);
                }
            }
        }
        best
    };
    let pick = |x: (f64, [usize; 3]), y: (f64, [usize; 3])| {
        if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
            y
        } else {
            x
        }
    };

    #[cfg(feature = "parallel")]
    let (_, [ia, ib, iq]) = {
        use rayon::prelude::*;
        (0..resolution)
            .into_par_iter()
            .map(row)
            .reduce(|| (f64::NEG_INFINITY, [usize::MAX; 3]), pick)
    };
    #[cfg(not(feature = "parallel"))]
    let (_, [ia, ib, iq]) = (0..resolution)
        .map(row)
        .fold((f64::NEG_INFINITY, [usize::MAX; 3]), pick);

    let config = FacilityConfig::new_unchecked(coord(ia), coord(ib), coord(iq));
    Ok(Candidate::at(config, Family::Lattice, prefs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub candidate: Candidate,
    pub sweeps: usize,
    /// False when [`MAX_REFINE_SWEEPS`] ran out before the step fell below `tol`.
    pub converged: bool,
}

/// Coordinate-wise golden-section ascent inside `0 <= a <= b <= 1`,
/// `0 <= q <= 1`, with a pattern move along each sweep's displacement.
///
/// Only strict improvements are accepted, so the result never has lower
/// welfare than `start`. Stops when a full sweep moves less than `tol`.
pub fn refine(prefs: &Preferences, start: &FacilityConfig, tol: f64) -> Result<Refinement> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "refinement tolerance must be positive",
        ));
    }
    let eval = |x: [f64; 3]| {
        let [a, b, q] = project(x);
        welfare(&FacilityConfig::new_unchecked(a, b, q), prefs)
    };
    let xtol = 0.25 * tol;
    let mut x = start.to_array();
    let mut w = eval(x);
    let mut radius = INITIAL_RADIUS;

    for sweep in 1..=MAX_REFINE_SWEEPS {
        let before = x;
        for axis in 0..3 {
            let (lo, hi) = match axis {
                0 => (0.0, x[1]),
                1 => (x[0], 1.0),
                _ => (0.0, 1.0),
            };
            let lo = lo.max(x[axis] - radius);
            let hi = hi.min(x[axis] + radius);
            let (t, wt) = golden_max(
                |t| {
                    let mut y = x;
                    y[axis] = t;
                    eval(y)
                },
                lo,
                hi,
                xtol,
            );
            if wt > w {
                x[axis] = t;
                w = wt;
            }
        }

        let d = [x[0] - before[0], x[1] - before[1], x[2] - before[2]];
        let step = max_abs(d);
        if step > 0.0 {
            let reach = feasible_reach(x, d).min(PATTERN_REACH);
            if reach > 0.0 {
                let along = |t: f64| [x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]];
                let (t, wt) = golden_max(|t| eval(along(t)), 0.0, reach, xtol / step);
                if wt > w {
                    x = project(along(t));
                    w = wt;
                }
            }
        }

        let moved = max_abs([x[0] - before[0], x[1] - before[1], x[2] - before[2]]);
        if moved < tol {
            return Ok(Refinement {
                candidate: Candidate::at(
                    FacilityConfig::new_unchecked(x[0], x[1], x[2]),
                    Family::Refined,
                    prefs,
                ),
                sweeps: sweep,
                converged: true,
            });
        }
        radius = (2.0 * moved).clamp(tol, INITIAL_RADIUS);
    }

    Ok(Refinement {
        candidate: Candidate::at(
            FacilityConfig::new_unchecked(x[0], x[1], x[2]),
            Family::Refined,
            prefs,
        ),
        sweeps: MAX_REFINE_SWEEPS,
        converged: false,
    })
}

fn project([a, b, q]: [f64; 3]) -> [f64; 3] {
    let a = a.clamp(0.0, 1.0);
    [a, b.clamp(a, 1.0), q.clamp(0.0, 1.0)]
}

fn max_abs(v: [f64; 3]) -> f64 {
    v[0].abs().max(v[1].abs()).max(v[2].abs())
}

/// Largest `t >= 0` keeping `x + t d` feasible.
fn feasible_reach([a, b, q]: [f64; 3], [da, db, dq]: [f64; 3]) -> f64 {
    let mut t = f64::INFINITY;
    if da < 0.0 {
        t = t.min(-a / da);
    }
    if db > 0.0 {
        t = t.min((1.0 - b) / db);
    }
    if dq < 0.0 {
        t = t.min(-q / dq);
    } else if dq > 0.0 {
        t = t.min((1.0 - q) / dq);
    }
    if da > db {
        t = t.min((b - a) / (da - db));
    }
    t.max(0.0)
}

/// Structural shape of an optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Quality all in one facility, both facilities serve someone.
    Segregated,
    /// One facility serves everyone.
    SingleFacility,
    /// `(1/4, 3/4, 1/2)`-like: equal quality, mirror-symmetric locations.
    Symmetric,
    /// Any other shape.
    Empirical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Segregated => "Segregated",
            Regime::SingleFacility => "SingleFacility",
            Regime::Symmetric => "Symmetric",
            Regime::Empirical => "Empirical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Segregated" => Ok(Regime::Segregated),
            "SingleFacility" => Ok(Regime::SingleFacility),
            "Symmetric" => Ok(Regime::Symmetric),
            "Empirical" => Ok(Regime::Empirical),
            _ => Err(Error::InvalidArgument("unknown regime label")),
        }
    }
}

/// Label a configuration by inspecting its structure, with [`STRUCTURE_TOL`].
pub fn classify(config: &FacilityConfig, prefs: &Preferences) -> Regime {
    let split = indifferent_point(config, prefs);
    let q = config.q();
    if split.degenerate {
        Regime::Empirical
    } else if split.jhat <= STRUCTURE_TOL || split.jhat >= 1.0 - STRUCTURE_TOL {
        Regime::SingleFacility
    } else if q <= STRUCTURE_TOL || q >= 1.0 - STRUCTURE_TOL {
        Regime::Segregated
    } else if (q - 0.5).abs() <= STRUCTURE_TOL
        && (config.a() + config.b() - 1.0).abs() <= STRUCTURE_TOL
    {
        Regime::Symmetric
    } else {
        Regime::Empirical
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub resolution: usize,
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub prefs: Preferences,
    /// Every welfare-maximal configuration, closed under mirroring, sorted
    /// by `(q, a, b)`.
    pub optima: Vec<Candidate>,
    pub welfare_star: f64,
    pub regime: Regime,
    pub grid_best: Candidate,
    /// Lattice winner after refinement.
    pub oracle: Candidate,
    pub refine_sweeps: usize,
    pub refine_converged: bool,
    /// `|welfare_star - oracle.welfare|`.
    pub agreement: f64,
    /// Closed-form result that characterises this `(theta, gamma)`, if any.
    pub covered_by: Option<Claim>,
}

impl SolveReport {
    pub fn oracle_config(&self) -> FacilityConfig {
        self.oracle.config
    }

    pub fn oracle_welfare(&self) -> f64 {
        self.oracle.welfare
    }

    /// The mirror-normalised optimum (smallest `q`, so `q <= 1/2`).
    pub fn representative(&self) -> &Candidate {
        &self.optima[0]
    }
}

/// Best configuration(s) over the analytic candidates and the refined
/// lattice optimum.
///
/// The numerical route only replaces the analytic candidates when it beats
/// them by more than [`WELFARE_TIE_TOL`], or when no candidates exist.
pub fn solve(prefs: &Preferences, opts: &SolveOptions) -> Result<SolveReport> {
    let grid_best = grid_search(prefs, opts.resolution)?;
    let refined = refine(prefs, &grid_best.config, opts.tol)?;
    let oracle = refined.candidate;

    let analytic = match candidate_stationary(prefs) {
        Ok(c) => c,
        Err(Error::NoAnalyticCandidates(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let best_analytic = analytic
        .iter()
        .map(|c| c.welfare)
        .fold(f64::NEG_INFINITY, f64::max);

    let pool: Vec<Candidate> = if oracle.welfare > best_analytic + WELFARE_TIE_TOL {
        vec![oracle, oracle.mirrored(prefs)]
    } else {
        analytic
    };
    let welfare_star = pool
        .iter()
        .map(|c| c.welfare)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut optima: Vec<Candidate> = Vec::new();
    for c in pool
        .iter()
        .filter(|c| c.welfare >= welfare_star - WELFARE_TIE_TOL)
    {
        for c in [*c, c.mirrored(prefs)] {
            if !optima
                .iter()
                .any(|o| o.config.distance(&c.config) < DUPLICATE_TOL)
            {
                optima.push(c);
            }
        }
    }
    optima.sort_by(|x, y| {
        let (x, y) = (x.config, y.config);
        x.q()
            .total_cmp(&y.q())
            .then(x.a().total_cmp(&y.a()))
            .then(x.b().total_cmp(&y.b()))
    });

    let regime = classify(&optima[0].config, prefs);
    let covered_by = if prefs.gamma() == 1.0 {
        Some(Claim::Theorem1)
    } else if prefs.gamma() == 0.5 && prefs.theta() < THEOREM2_UPPER {
        Some(Claim::Theorem2)
    } else {
        None
    };

    Ok(SolveReport {
        prefs: *prefs,
        optima,
        welfare_star,
        regime,
        grid_best,
        oracle,
        refine_sweeps: refined.sweeps,
        refine_converged: refined.converged,
        agreement: (welfare_star - oracle.welfare).abs(),
        covered_by,
    })
}
