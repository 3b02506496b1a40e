use hotelling_core::theorems::{
    corner_welfare, segregated_welfare, symmetric_welfare_linear, symmetric_welfare_sqrt,
    THEOREM2_UPPER,
};
use hotelling_core::{
    detect_threshold, solve, sweep_theta, verify_lemma_boundary, verify_remark_grid,
    verify_theorem1, verify_theorem2, Error, Preferences, Regime, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions {
        resolution: 61,
        tol: 1e-8,
    }
}

#[test]
fn theorem1_welfare_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let theta: f64 = rng.random_range(1e-4..0.25);
        let prefs = Preferences::linear(theta).unwrap();
        let report = solve(&prefs, &opts()).unwrap();
        assert!(
            (report.welfare_star - segregated_welfare(theta)).abs() <= 1e-8,
            "theta {theta}"
        );
        let margin = report.welfare_star - symmetric_welfare_linear(theta);
        assert!(
            (margin - theta * theta).abs() <= 1e-10,
            "theta {theta}: margin {margin}"
        );
        assert_eq!(report.regime, Regime::Segregated);
    }
}

#[test]
fn theorem1_verified_across_regimes() {
    for theta in [0.01, 0.05, 0.1, 0.2, 0.2499, 0.25, 0.3, 0.5, 1.0, 4.0] {
        let r = verify_theorem1(theta, &opts()).unwrap();
        assert!(r.passed, "theta {theta}: {r:?}");
    }
}

#[test]
fn theorem2_welfare_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let theta: f64 = rng.random_range(1e-4..THEOREM2_UPPER);
        let r = verify_theorem2(theta, &opts()).unwrap();
        assert!(r.passed, "theta {theta}: {r:?}");
        let report = solve(&Preferences::square_root(theta).unwrap(), &opts()).unwrap();
        assert!((report.welfare_star - symmetric_welfare_sqrt(theta)).abs() <= 1e-8);
        assert!(report.welfare_star > corner_welfare(theta));
    }
}

#[test]
fn remark_holds_on_degenerate_grid() {
    for gamma in [1.0, 0.5] {
        for theta in [0.05, 0.1, 0.2] {
            let r = verify_remark_grid(&Preferences::new(theta, gamma).unwrap(), 101).unwrap();
            assert_eq!(r.checks.len(), 101);
            assert!(
                r.passed,
                "theta {theta} gamma {gamma}: {}",
                r.max_discrepancy
            );
        }
    }
}

#[test]
fn lemma_holds_on_sampled_boundaries() {
    for gamma in [1.0, 0.5] {
        for theta in [0.05, 0.1, 0.2] {
            let prefs = Preferences::new(theta, gamma).unwrap();
            let r = verify_lemma_boundary(&prefs, 200, 42, &opts()).unwrap();
            assert!(r.checks.len() >= 200);
            assert!(r.passed, "theta {theta} gamma {gamma}: {r:?}");
        }
    }
}

#[test]
fn linear_sweep_flips_between_020_and_030() {
    let rows = sweep_theta(0.05, 0.45, 9, 1.0, &opts()).unwrap();
    let thetas: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    assert!((thetas[3] - 0.2).abs() < 1e-12 && (thetas[5] - 0.3).abs() < 1e-12);
    for r in &rows {
        let expected = if r.theta < 0.25 {
            Regime::Segregated
        } else {
            Regime::SingleFacility
        };
        assert_eq!(r.regime, expected, "theta {}", r.theta);
        // the segregated configuration only exists below 1/4
        let formula = if r.theta < 0.25 {
            segregated_welfare(r.theta)
        } else {
            corner_welfare(r.theta)
        };
        assert!(
            (r.welfare - formula).abs() <= 1e-12,
            "theta {}: {} vs {formula}",
            r.theta,
            r.welfare
        );
        assert!(r.q <= 0.5);
    }
}

#[test]
fn square_root_sweep_is_symmetric() {
    let rows = sweep_theta(0.05, 0.15, 3, 0.5, &opts()).unwrap();
    for r in rows {
        assert_eq!(r.regime, Regime::Symmetric);
        assert_eq!([r.a, r.b, r.q], [0.25, 0.75, 0.5]);
        assert_eq!(r.jhat, 0.5);
    }
}

#[test]
fn linear_threshold_is_one_quarter() {
    let t = detect_threshold(1.0, (0.1, 0.4), 1e-4, &opts()).unwrap();
    assert!((t.theta - 0.25).abs() <= 1e-4, "{t:?}");
    assert_eq!(t.lower_regime, Regime::Segregated);
    assert_eq!(t.upper_regime, Regime::SingleFacility);
}

/// Brute force (161^3 lattice, then Nelder-Mead) puts the end of the
/// symmetric regime at 1 / (4 sqrt 2): symmetric at 0.1767, asymmetric
/// interior optimum at 0.1769.
#[test]
fn square_root_symmetry_breaks_at_theorem_bound() {
    let t = detect_threshold(0.5, (0.15, 0.30), 1e-4, &SolveOptions::default()).unwrap();
    assert_eq!(t.lower_regime, Regime::Symmetric);
    assert!((t.theta - THEOREM2_UPPER).abs() <= 1e-3, "{t:?}");
}

#[test]
fn square_root_reaches_single_facility_at_one_quarter() {
    let t = detect_threshold(0.5, (0.2, 0.30), 1e-4, &SolveOptions::default()).unwrap();
    assert_eq!(t.lower_regime, Regime::Empirical);
    assert_eq!(t.upper_regime, Regime::SingleFacility);
    assert!((t.theta - 0.25).abs() <= 1e-3, "{t:?}");
}

#[test]
fn threshold_needs_a_regime_change() {
    assert!(matches!(
        detect_threshold(1.0, (0.3, 0.4), 1e-4, &opts()),
        Err(Error::NoRegimeChange(Regime::SingleFacility))
    ));
    assert!(detect_threshold(1.0, (0.4, 0.3), 1e-4, &opts()).is_err());
}
