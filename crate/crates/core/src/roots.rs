//! Scalar root finding for the boundary closures: Newton's method kept
//! inside a sign-change bracket, falling back to bisection whenever the
//! Newton iterate leaves the bracket or stops contracting it.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change found within [{lo}, {hi}] around {guess}")]
    NoBracket { guess: f64, lo: f64, hi: f64 },
    #[error("root iteration stalled at x = {x} with residual {residual} (tolerance {tol})")]
    NotConverged { x: f64, residual: f64, tol: f64 },
    #[error("non-finite residual at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Grows a window geometrically around `guess` inside `[lo, hi]` until the
/// function changes sign, returning the sign-change interval closest to
/// `guess` at the resolution of the growth sequence.
pub fn expand_bracket<F>(
    f: &F,
    guess: f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<(f64, f64), RootError>
where
    F: Fn(f64) -> f64,
{
    let fail = RootError::NoBracket { guess, lo, hi };
    let x0 = guess.clamp(lo, hi);
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(RootError::NonFinite(x0));
    }
    if f0 == 0.0 {
        return Ok((x0, x0));
    }
    let (mut left, mut fl) = (x0, f0);
    let (mut right, mut fr) = (x0, f0);
    let mut delta = step.abs().max(f64::EPSILON * x0.abs().max(1.0));
    loop {
        let (left_done, right_done) = (left <= lo, right >= hi);
        if left_done && right_done {
            return Err(fail);
        }
        if !left_done {
            let x = (x0 - delta).max(lo);
            let fx = f(x);
            if fx.is_finite() {
                if fx.signum() != fl.signum() || fx == 0.0 {
                    return Ok((x, left));
                }
                fl = fx;
            }
            left = x;
        }
        if !right_done {
            let x = (x0 + delta).min(hi);
            let fx = f(x);
            if fx.is_finite() {
                if fx.signum() != fr.signum() || fx == 0.0 {
                    return Ok((right, x));
                }
                fr = fx;
            }
            right = x;
        }
        delta *= 2.0;
    }
}

/// Safeguarded Newton on a bracket `[a, b]` with `f(a) f(b) <= 0`.
///
/// `fdf` returns the residual and its derivative. Iterates to machine
/// resolution and then requires `|f| <= ftol`.
pub fn safeguarded_newton<F>(fdf: F, a: f64, b: f64, x0: f64, ftol: f64) -> Result<Root, RootError>
where
    F: Fn(f64) -> (f64, f64),
{
    const MAX_ITER: usize = 200;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let (flo, fhi) = (fdf(lo).0, fdf(hi).0);
    if flo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fhi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    // a collapsed bracket from a caller whose own residual hit zero there
    if lo == hi && flo.abs() <= ftol {
        return Ok(Root {
            x: lo,
            residual: flo.abs(),
            iterations: 0,
        });
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoBracket { guess: x0, lo, hi });
    }
    let lo_negative = flo < 0.0;

    let mut x = if x0 > lo && x0 < hi {
        x0
    } else {
        0.5 * (lo + hi)
    };
    let mut best = (x, f64::INFINITY);
    let mut width_before = hi - lo;
    for it in 1..=MAX_ITER {
        let (fx, dfx) = fdf(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite(x));
        }
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx == 0.0 {
            return Ok(Root {
                x,
                residual: 0.0,
                iterations: it,
            });
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let contracting = hi - lo <= 0.5 * width_before;
        let next =
            if newton.is_finite() && newton > lo && newton < hi && (contracting || it % 4 != 0) {
                newton
            } else {
                0.5 * (lo + hi)
            };
        if it % 4 == 0 {
            width_before = hi - lo;
        }
        let resolution = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if (next - x).abs() <= resolution || hi - lo <= resolution {
            let (fn_, _) = fdf(next);
            let (x, r) = if fn_.abs() < best.1 {
                (next, fn_.abs())
            } else {
                best
            };
            return finish(x, r, it, ftol);
        }
        x = next;
    }
    finish(best.0, best.1, MAX_ITER, ftol)
}

fn finish(x: f64, residual: f64, iterations: usize, tol: f64) -> Result<Root, RootError> {
    if residual <= tol {
        Ok(Root {
            x,
            residual,
            iterations,
        })
    } else {
        Err(RootError::NotConverged { x, residual, tol })
    }
}

/// Plain bisection, used as an independent reference in tests.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let mut fa = f(a);
    for _ in 0..iterations {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_on_cubic() {
        let f = |x: f64| (x * x * x - 2.0 * x - 5.0, 3.0 * x * x - 2.0);
        let r = safeguarded_newton(f, 2.0, 3.0, 2.5, 1e-12).unwrap();
        assert!((r.x - 2.0945514815423265).abs() < 1e-14);
    }

    #[test]
    fn falls_back_when_derivative_vanishes() {
        // derivative is zero at the start point
        let f = |x: f64| (x * x * x - 0.001, 3.0 * x * x);
        let r = safeguarded_newton(f, -1.0, 1.0, 0.0, 1e-14).unwrap();
        assert!((r.x - 0.1).abs() < 1e-12);
    }

    #[test]
    fn bracket_prefers_nearest_root() {
        let f = |x: f64| (x - 1.0) * (x - 4.0);
        let (a, b) = expand_bracket(&f, 0.5, -10.0, 10.0, 0.1).unwrap();
        assert!(a <= 1.0 && b >= 1.0);
        let (a, b) = expand_bracket(&f, 3.5, -10.0, 10.0, 0.1).unwrap();
        assert!(a <= 4.0 && b >= 4.0);
    }

    #[test]
    fn bracket_failure_is_reported() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(
            expand_bracket(&f, 0.0, -5.0, 5.0, 0.1),
            Err(RootError::NoBracket { .. })
        ));
    }

    #[test]
    fn bracket_without_sign_change_rejected() {
        let f = |x: f64| (x * x + 1.0, 2.0 * x);
        assert!(safeguarded_newton(f, -1.0, 2.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn bisection_reference() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}
