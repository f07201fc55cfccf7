//! Adaptive Gauss–Kronrod and double-exponential quadrature.

use crate::error::{Error, Result};
use crate::num::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7/K15 quadrature of `f` over the finite interval `[a, b]`.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol * |I|)`.
pub fn gauss_kronrod<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let mut segments = vec![gk15(&f, a, b)];
    loop {
        let total: T = segments.iter().map(|s| s.value).sum();
        let err: T = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: total.f64(),
                error: err.f64(),
            });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                estimate: total.f64(),
                error: err.f64(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = (seg.a + seg.b) * T::lit(0.5);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            return Err(Error::Quadrature {
                estimate: total.f64(),
                error: err.f64(),
            });
        }
        segments.push(gk15(&f, seg.a, mid));
        segments.push(gk15(&f, mid, seg.b));
    }
}

/// Exp-sinh quadrature of `f` over `[a, ∞)`.
///
/// Uses `x = a + exp(π/2 · sinh t)` and halves the trapezoid step until two
/// consecutive levels agree to `rel_tol`. Suited to integrands with an
/// integrable endpoint singularity at `a` and algebraic or exponential decay.
pub fn exp_sinh<T: Real, F: Fn(T) -> T>(f: F, a: T, rel_tol: T) -> Result<T> {
    let half_pi = T::FRAC_PI_2();
    let t_max = T::lit(6.8);
    let node = |t: T| -> T {
        let e = (half_pi * t.sinh()).exp();
        let w = half_pi * t.cosh() * e;
        let x = a + e;
        if w == T::zero() || !w.is_finite() || x == a {
            return T::zero();
        }
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    let mut h = T::lit(0.5);
    let mut sum = node(T::zero());
    let mut k = 1usize;
    loop {
        let t = h * T::from_usize_lossy(k);
        if t > t_max {
            break;
        }
        sum = sum + node(t) + node(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        h = h * T::lit(0.5);
        let mut k = 1usize;
        loop {
            let t = h * T::from_usize_lossy(k);
            if t > t_max {
                break;
            }
            sum = sum + node(t) + node(-t);
            k += 2;
        }
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= rel_tol * estimate.abs() {
            return Ok(estimate);
        }
    }
    Err(Error::Quadrature {
        estimate: estimate.f64(),
        error: f64::NAN,
    })
}

/// Trapezoid rule over tabulated `(x, y)` data.
pub fn trapezoid<T: Real>(x: &[T], y: &[T]) -> T {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * T::lit(0.5))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_polynomial_and_gaussian() {
        let v = gauss_kronrod(|x: f64| 12.0 * x * (1.0 - x).powi(2), 0.0, 1.0, 1e-15, 1e-15).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
        let g = gauss_kronrod(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(g, std::f64::consts::PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn gk_sqrt_singularity() {
        let v = gauss_kronrod(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn exp_sinh_gamma_integrals() {
        // Γ(1/2) = ∫ e^{-x} x^{-1/2}
        let v = exp_sinh(|x: f64| (-x).exp() / x.sqrt(), 0.0, 1e-14).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        let w = exp_sinh(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1e-14).unwrap();
        assert_relative_eq!(w, std::f64::consts::FRAC_PI_2, max_relative = 1e-13);
        let s = exp_sinh(|x: f64| (-250.0 * x).exp(), 0.0, 1e-14).unwrap();
        assert_relative_eq!(s, 1.0 / 250.0, max_relative = 1e-13);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let x = [0.0, 0.5, 2.0];
        let y = [1.0, 2.0, 5.0];
        assert_relative_eq!(trapezoid(&x, &y), 6.0, epsilon = 1e-14);
    }
}
