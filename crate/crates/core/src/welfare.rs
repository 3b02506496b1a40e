//! Aggregate welfare of a configuration.
//!
//! [`welfare_closed_form`] integrates the piecewise-quadratic integrand
//! symbolically, branch by branch. [`welfare_quadrature`] integrates the
//! per-individual choice numerically and never touches the closed-form
//! algebra, so the two act as mutual checks.

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::model::{
    assign_unchecked, indifferent_point, utility_unchecked, Facility, FacilityConfig, Preferences,
};

/// Central finite-difference step for the numerical gradient.
pub const FD_STEP: f64 = 1e-6;

/// Which branch of the split point the welfare value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WelfareBranch {
    /// `0 < jhat < 1`: both facilities serve someone.
    Interior,
    /// `jhat = 1`: everyone uses the facility at `a`.
    AllLeft,
    /// `jhat = 0`: everyone uses the facility at `b`.
    AllRight,
    /// `a = b` with equal qualities.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareValue {
    pub value: f64,
    pub jhat_used: f64,
    pub branch: WelfareBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradientMethod {
    Analytic,
    FiniteDifference,
}

/// Partial derivatives of the interior welfare branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareGradient {
    pub d_a: f64,
    pub d_b: f64,
    pub d_q: f64,
    pub method: GradientMethod,
}

impl WelfareGradient {
    pub fn max_abs(&self) -> f64 {
        self.d_a.abs().max(self.d_b.abs()).max(self.d_q.abs())
    }
}

pub fn welfare_closed_form(config: &FacilityConfig, prefs: &Preferences) -> WelfareValue {
    let split = indifferent_point(config, prefs);
    let (a, b, q) = (config.a(), config.b(), config.q());
    let theta = prefs.theta();

    if split.degenerate {
        // Both facilities at `a` with quality 1/2: everyone travels to `a`.
        let cost = ((1.0 - a) * (1.0 - a) * (1.0 - a) + a * a * a) / 3.0;
        return WelfareValue {
            value: theta * prefs.response(0.5) - cost,
            jhat_used: split.jhat,
            branch: WelfareBranch::Degenerate,
        };
    }

    let (value, branch) = if split.jhat <= 0.0 {
        (
            theta * prefs.response(1.0 - q) + b - b * b - 1.0 / 3.0,
            WelfareBranch::AllRight,
        )
    } else if split.jhat >= 1.0 {
        (
            theta * prefs.response(q) + a - a * a - 1.0 / 3.0,
            WelfareBranch::AllLeft,
        )
    } else {
        (interior_expression(a, b, q, prefs), WelfareBranch::Interior)
    };
    WelfareValue {
        value,
        jhat_used: split.jhat,
        branch,
    }
}

/// Shorthand for `welfare_closed_form(..).value`.
pub fn welfare(config: &FacilityConfig, prefs: &Preferences) -> f64 {
    welfare_closed_form(config, prefs).value
}

/// Interior branch, valid when `0 < jhat < 1`:
/// `theta g(1-q) - b^2 + b - 1/3 - N^2 / (4 (a - b))`
/// with `N = a^2 - b^2 - theta (g(q) - g(1-q))`.
pub(crate) fn interior_expression(a: f64, b: f64, q: f64, prefs: &Preferences) -> f64 {
    let n = a * a - b * b - prefs.quality_gap(q);
    prefs.theta() * prefs.response(1.0 - q) - b * b + b - 1.0 / 3.0 - n * n / (4.0 * (a - b))
}

/// Composite Simpson quadrature of each individual's realised utility.
///
/// `[0, 1]` is split at `jhat` and each piece gets `panels` Simpson panels.
/// On each piece the integrand is a quadratic in `i`, so the rule is exact up
/// to rounding.
pub fn welfare_quadrature(
    config: &FacilityConfig,
    prefs: &Preferences,
    panels: usize,
) -> Result<WelfareValue> {
    if panels < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least 2 panels"));
    }
    let split = indifferent_point(config, prefs);
    let integrand = |i: f64| {
        let i = i.clamp(0.0, 1.0);
        match assign_unchecked(i, config, prefs) {
            Facility::A => utility_unchecked(i, config.a(), config.q(), prefs),
            Facility::B => utility_unchecked(i, config.b(), 1.0 - config.q(), prefs),
        }
    };
    let value =
        simpson(&integrand, 0.0, split.jhat, panels) + simpson(&integrand, split.jhat, 1.0, panels);
    let branch = if split.degenerate {
        WelfareBranch::Degenerate
    } else if split.jhat <= 0.0 {
        WelfareBranch::AllRight
    } else if split.jhat >= 1.0 {
        WelfareBranch::AllLeft
    } else {
        WelfareBranch::Interior
    };
    Ok(WelfareValue {
        value,
        jhat_used: split.jhat,
        branch,
    })
}

fn simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let h = (hi - lo) / panels as f64;
    let mut sum = 0.0;
    let mut left = lo;
    let mut f_left = f(lo);
    for k in 1..=panels {
        let right = if k == panels { hi } else { lo + k as f64 * h };
        let f_right = f(right);
        sum += (right - left) * (f_left + 4.0 * f(0.5 * (left + right)) + f_right) / 6.0;
        left = right;
        f_left = f_right;
    }
    sum
}

/// Partial derivatives of the interior branch at `config`.
///
/// Closed-form first-order conditions for `gamma = 1` and `gamma = 1/2`
/// (the latter only for `0 < q < 1`); central differences with
/// [`FD_STEP`] otherwise.
pub fn welfare_gradient(config: &FacilityConfig, prefs: &Preferences) -> Result<WelfareGradient> {
    if config.is_coincident() {
        return Err(Error::GradientUndefined("facilities coincide"));
    }
    let split = indifferent_point(config, prefs);
    if !(split.jhat > 0.0 && split.jhat < 1.0) {
        return Err(Error::GradientUndefined("split point is not interior"));
    }

    let (a, b, q) = (config.a(), config.b(), config.q());
    let theta = prefs.theta();
    let gamma = prefs.gamma();
    let analytic = gamma == 1.0 || (gamma == 0.5 && q > 0.0 && q < 1.0);
    if !analytic {
        return Ok(finite_difference_gradient(a, b, q, prefs));
    }

    let gap = prefs.quality_gap(q);
    let n = a * a - b * b - gap;
    let den = 4.0 * (a - b) * (a - b);
    let d_a = -n * (3.0 * a * a - 4.0 * a * b + b * b + gap) / den;
    let d_b = -(((a - 2.0) * a - (b - 2.0) * b - gap)
        * (a * a + a * (2.0 - 4.0 * b) + b * (3.0 * b - 2.0) - gap))
        / den;
    let d_q = if gamma == 1.0 {
        theta * (theta * (1.0 - 2.0 * q) / (a - b) + a + b - 1.0)
    } else {
        let (rq, rp) = (sqrt(q), sqrt(1.0 - q));
        0.25 * theta * ((1.0 / rq + 1.0 / rp) * n / (a - b) - 2.0 / rp)
    };
    Ok(WelfareGradient {
        d_a,
        d_b,
        d_q,
        method: GradientMethod::Analytic,
    })
}

fn finite_difference_gradient(a: f64, b: f64, q: f64, prefs: &Preferences) -> WelfareGradient {
    let h = FD_STEP;
    let f = |a: f64, b: f64, q: f64| interior_expression(a, b, q, prefs);
    let d_a = (f(a + h, b, q) - f(a - h, b, q)) / (2.0 * h);
    let d_b = (f(a, b + h, q) - f(a, b - h, q)) / (2.0 * h);
    // q^gamma is undefined below zero, so the stencil stays inside [0, 1].
    let d_q = if q - h < 0.0 {
        (-3.0 * f(a, b, q) + 4.0 * f(a, b, q + h) - f(a, b, q + 2.0 * h)) / (2.0 * h)
    } else if q + h > 1.0 {
        (3.0 * f(a, b, q) - 4.0 * f(a, b, q - h) + f(a, b, q - 2.0 * h)) / (2.0 * h)
    } else {
        (f(a, b, q + h) - f(a, b, q - h)) / (2.0 * h)
    };
    WelfareGradient {
        d_a,
        d_b,
        d_q,
        method: GradientMethod::FiniteDifference,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(a: f64, b: f64, q: f64) -> FacilityConfig {
        FacilityConfig::new(a, b, q).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let lin = Preferences::linear(0.1).unwrap();
        let w = welfare_closed_form(&cfg(0.25, 0.75, 0.5), &lin);
        assert!((w.value - (24.0 * 0.1 - 1.0) / 48.0).abs() < 1e-15);
        assert_eq!(w.branch, WelfareBranch::Interior);

        let w = welfare(&cfg(0.15, 0.65, 0.0), &lin);
        assert!((w - (48.0 * 0.01 + 24.0 * 0.1 - 1.0) / 48.0).abs() < 1e-15);
        assert!((w - 0.039_166_666_666_666_67).abs() < 1e-15);

        let high = Preferences::linear(0.3).unwrap();
        let w = welfare_closed_form(&cfg(0.5, 0.8, 1.0), &high);
        assert_eq!(w.branch, WelfareBranch::AllLeft);
        assert!((w.value - (48.0 * 0.3 - 4.0) / 48.0).abs() < 1e-15);

        let root = Preferences::square_root(0.1).unwrap();
        let w = welfare(&cfg(0.25, 0.75, 0.5), &root);
        assert!((w - (24.0 * 2f64.sqrt() * 0.1 - 1.0) / 48.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_examples() {
        let lin = Preferences::linear(0.1).unwrap();
        let w = welfare_quadrature(&cfg(0.25, 0.75, 0.5), &lin, 64).unwrap();
        assert!((w.value - 0.029_166_666_666_666_667).abs() < 1e-10);
        let w = welfare_quadrature(&cfg(0.5, 0.5, 0.5), &lin, 64).unwrap();
        assert_eq!(w.branch, WelfareBranch::Degenerate);
        assert!((w.value - (0.05 - 1.0 / 12.0)).abs() < 1e-12);
        let w = welfare_quadrature(&cfg(0.15, 0.65, 0.0), &lin, 64).unwrap();
        assert!((w.value - 0.039_166_666_666_666_67).abs() < 1e-10);
        assert!(welfare_quadrature(&cfg(0.15, 0.65, 0.0), &lin, 1).is_err());
    }

    #[test]
    fn degenerate_closed_form_is_direct_integral() {
        let lin = Preferences::linear(0.1).unwrap();
        let w = welfare_closed_form(&cfg(0.5, 0.5, 0.5), &lin);
        assert_eq!(w.branch, WelfareBranch::Degenerate);
        assert!((w.value + 0.033_333_333_333_333_33).abs() < 1e-15);
        let w = welfare(&cfg(0.0, 0.0, 0.5), &lin);
        assert!((w - (0.05 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn gradient_vanishes_at_symmetric_point() {
        for prefs in [
            Preferences::linear(0.1).unwrap(),
            Preferences::square_root(0.1).unwrap(),
        ] {
            let g = welfare_gradient(&cfg(0.25, 0.75, 0.5), &prefs).unwrap();
            assert_eq!(g.method, GradientMethod::Analytic);
            assert!(g.max_abs() <= 1e-15, "{g:?}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let prefs = Preferences::linear(0.1).unwrap();
        let c = cfg(0.2, 0.7, 0.5);
        let g = welfare_gradient(&c, &prefs).unwrap();
        let h = 1e-6;
        let w = |a: f64, b: f64, q: f64| welfare(&cfg(a, b, q), &prefs);
        let fd = [
            (w(0.2 + h, 0.7, 0.5) - w(0.2 - h, 0.7, 0.5)) / (2.0 * h),
            (w(0.2, 0.7 + h, 0.5) - w(0.2, 0.7 - h, 0.5)) / (2.0 * h),
            (w(0.2, 0.7, 0.5 + h) - w(0.2, 0.7, 0.5 - h)) / (2.0 * h),
        ];
        for (an, fd) in [g.d_a, g.d_b, g.d_q].into_iter().zip(fd) {
            assert!((an - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "{an} vs {fd}");
        }
    }

    #[test]
    fn gradient_rejects_undefined_branches() {
        let prefs = Preferences::linear(0.1).unwrap();
        assert!(welfare_gradient(&cfg(0.4, 0.4, 0.2), &prefs).is_err());
        // everyone at b
        assert!(welfare_gradient(&cfg(0.5, 0.5 + 1e-3, 0.0), &prefs).is_err());
    }

    #[test]
    fn other_exponents_fall_back_to_differences() {
        let prefs = Preferences::new(0.1, 0.7).unwrap();
        let g = welfare_gradient(&cfg(0.2, 0.7, 0.4), &prefs).unwrap();
        assert_eq!(g.method, GradientMethod::FiniteDifference);
        let root = Preferences::square_root(0.05).unwrap();
        let g = welfare_gradient(&cfg(0.1, 0.6, 0.0), &root).unwrap();
        assert_eq!(g.method, GradientMethod::FiniteDifference);
        assert!(g.d_q.is_finite());
    }
}
