use crate::error::{Error, Result};

/// Bisection on `[lo, hi]`, which must bracket a sign change of `f`.
///
/// Iterates until the bracket is no wider than `tol` (or cannot be split
/// further in floating point) and returns its midpoint. Only the sign of `f`
/// drives the iteration, so `f` and `-f` produce identical iterates.
pub fn bisect_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("bisection needs finite lo < hi, got [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("bisection tolerance must be positive, got {tol}")));
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(x))
        }
    };
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_quadratic_roots() {
        let r = bisect_root(|x| x - 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        let r = bisect_root(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sign_flip_gives_identical_root() {
        let f = |x: f64| x.cos() - x;
        let a = bisect_root(f, 0.0, 1.0, 1e-14).unwrap();
        let b = bisect_root(|x| -f(x), 0.0, 1.0, 1e-14).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn bracket_and_finiteness_errors() {
        assert!(matches!(bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-9), Err(Error::Bracket { .. })));
        assert!(matches!(bisect_root(|_| f64::NAN, 0.0, 1.0, 1e-9), Err(Error::NonFinite(_))));
        assert!(bisect_root(|x| x, 1.0, 0.0, 1e-9).is_err());
        assert!(bisect_root(|x| x, -1.0, 1.0, 0.0).is_err());
    }
}
