//! Bracketing and bisection for monotone scalar maps.

use crate::error::{Error, Result};

pub(crate) const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 2000;

/// Solve `g(a) = target` for a nondecreasing, continuous `g`.
///
/// The bracket starts at `[-1, 1]` and each side is doubled outward until it
/// straddles `target`. Bisection then runs until the bracket cannot shrink
/// further in floating point (far below the `1e-10` absolute tolerance the
/// callers need). The level set `g = target` is located from both sides and
/// rejected as non-invertible when it is wider than a point.
pub fn invert_increasing<G: FnMut(f64) -> f64>(mut g: G, target: f64) -> Result<f64> {
    if !target.is_finite() {
        return Err(Error::BracketingFailure { value: target });
    }
    let mut hi = 1.0_f64;
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if g(hi) >= target {
            found = true;
            break;
        }
        hi *= 2.0;
    }
    if !found {
        return Err(Error::BracketingFailure { value: target });
    }
    let mut lo = -1.0_f64;
    found = false;
    for _ in 0..MAX_DOUBLINGS {
        if g(lo) <= target {
            found = true;
            break;
        }
        lo *= 2.0;
    }
    if !found || lo > hi {
        return Err(Error::BracketingFailure { value: target });
    }

    // strict brackets so that a flat stretch at the target level is seen whole
    let (mut lo_strict, mut hi_strict) = (lo, hi);
    for _ in 0..MAX_DOUBLINGS {
        if g(lo_strict) < target {
            break;
        }
        lo_strict *= 2.0;
    }
    for _ in 0..MAX_DOUBLINGS {
        if g(hi_strict) > target {
            break;
        }
        hi_strict *= 2.0;
    }
    // smallest a with g(a) >= target, and largest a with g(a) <= target
    let (l_lo, l_hi) = bisect(&mut g, lo_strict, hi, |v| v < target);
    let (r_lo, _) = bisect(&mut g, lo, hi_strict, |v| v <= target);
    let root = if (g(l_lo) - target).abs() < (g(l_hi) - target).abs() {
        l_lo
    } else {
        l_hi
    };
    if r_lo - l_hi > 1e-7 * root.abs().max(1.0) {
        return Err(Error::NotInvertible { value: target });
    }
    Ok(root)
}

/// Shrink `[lo, hi]` around the point where `below` switches from true to
/// false, until the bracket cannot shrink further in floating point.
fn bisect<G: FnMut(f64) -> f64>(
    g: &mut G,
    mut lo: f64,
    mut hi: f64,
    below: impl Fn(f64) -> bool,
) -> (f64, f64) {
    for _ in 0..MAX_BISECTIONS {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width <= 1e-15 {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        if below(g(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_linear_and_cubic() {
        let a = invert_increasing(|a| 2.0 * a, 6.0).unwrap();
        assert!((a - 3.0).abs() < 1e-12);
        let b = invert_increasing(|a| a * a * a, -27.0).unwrap();
        assert!((b + 3.0).abs() < 1e-12);
    }

    #[test]
    fn far_targets_are_bracketed() {
        let a = invert_increasing(|a| a, 1e40).unwrap();
        assert!((a / 1e40 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_segment_is_rejected() {
        let g = |a: f64| a.clamp(-1.0, 1.0) + (a - 5.0).max(0.0) + (a + 5.0).min(0.0);
        assert!(matches!(
            invert_increasing(g, 1.0),
            Err(Error::NotInvertible { .. })
        ));
        assert!(invert_increasing(g, 0.5).is_ok());
    }

    #[test]
    fn bounded_map_fails_to_bracket() {
        let g = |a: f64| a.tanh();
        assert!(matches!(
            invert_increasing(g, 2.0),
            Err(Error::BracketingFailure { .. })
        ));
        assert!(matches!(
            invert_increasing(|a: f64| a * a, -1.0),
            Err(Error::BracketingFailure { .. })
        ));
    }
}
