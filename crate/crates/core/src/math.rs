/// `q^gamma` with `0^gamma = 0`; exact fast paths for the linear and
/// square-root responses.
#[inline]
pub(crate) fn quality_response(q: f64, gamma: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else if gamma == 1.0 {
        q
    } else if gamma == 0.5 {
        libm::sqrt(q)
    } else {
        libm::pow(q, gamma)
    }
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// The endpoints are evaluated too, so a monotone or convex `f` still
/// returns its best endpoint. Returns `(x, f(x))`.
pub(crate) fn golden_max<F>(f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;

    let f_lo = f(lo);
    if hi <= lo {
        return (lo, f_lo);
    }
    let f_hi = f(hi);

    let (mut left, mut right) = (lo, hi);
    let mut x1 = right - INV_PHI * (right - left);
    let mut x2 = left + INV_PHI * (right - left);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // 200 iterations shrink any bracket inside [0, 1] far below 1e-16.
    for _ in 0..200 {
        if right - left <= xtol {
            break;
        }
        if f1 >= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - INV_PHI * (right - left);
            f1 = f(x1);
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + INV_PHI * (right - left);
            f2 = f(x2);
        }
    }

    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if f_lo > best.1 {
        best = (lo, f_lo);
    }
    if f_hi > best.1 {
        best = (hi, f_hi);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_peak() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx <= 0.0 && fx > -1e-15);
    }

    #[test]
    fn golden_prefers_endpoint_of_convex_function() {
        let (x, _) = golden_max(|x| (x - 0.4) * (x - 0.4), 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn zero_quality_is_zero_for_every_exponent() {
        for gamma in [1.0, 0.5, 0.3, 1e-3] {
            assert_eq!(quality_response(0.0, gamma), 0.0);
        }
        assert_eq!(quality_response(0.25, 0.5), 0.5);
    }
}
