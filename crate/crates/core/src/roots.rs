use crate::error::{Error, Result};
use crate::num::Real;

/// Bisection safeguarded secant (Illinois) on a sign-changing bracket.
pub fn refine_root<T: Real, F: Fn(T) -> Result<T>>(f: F, lo: T, hi: T) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::BracketNotFound(format!("[{lo}, {hi}]")));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = (a + b) * T::lit(0.5);
        }
        let fc = f(c)?;
        if fc == T::zero() || (b - a).abs() <= T::epsilon() * T::lit(4.0) * c.abs().max(T::one()) {
            return Ok(c);
        }
        if (fc > T::zero()) == (fb > T::zero()) {
            b = c;
            fb = fc;
            if side == -1 {
                fa = fa * T::lit(0.5);
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb = fb * T::lit(0.5);
            }
            side = 1;
        }
    }
    Ok((a + b) * T::lit(0.5))
}
