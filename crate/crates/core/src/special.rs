//! Gamma function and the confluent hypergeometric functions `M` and `U`.

use crate::error::{domain, Error, Result};
use crate::num::Real;
use crate::quadrature::exp_sinh;
use crate::roots::refine_root;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_TERMS: usize = 10_000;

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

/// `Γ(x)` by a Lanczos approximation, with reflection below `1/2`.
pub fn gamma_fn<T: Real>(x: T) -> Result<T> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x.f64()));
    }
    if x < T::lit(0.5) {
        let pi = T::PI();
        return Ok(pi / ((pi * x).sin() * gamma_fn(T::one() - x)?));
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    let half_pow = t.powf((z + T::lit(0.5)) * T::lit(0.5));
    Ok((T::PI() * T::lit(2.0)).sqrt() * half_pow * (-t).exp() * half_pow * acc)
}

/// `1/Γ(x)`, zero at the poles.
pub fn rgamma<T: Real>(x: T) -> T {
    match gamma_fn(x) {
        Ok(g) => T::one() / g,
        Err(_) => T::zero(),
    }
}

/// Sums the Kummer series, returning `(m, k)` with `M = m · e^k`.
fn kummer_series<T: Real>(a: T, b: T, s: T) -> Result<(T, T)> {
    let big = T::lit(1e250).min(T::max_value().sqrt());
    let tol = T::lit(1e-17).max(T::epsilon() * T::lit(0.05));
    let mut sum = T::one();
    let mut comp = T::zero();
    let mut term = T::one();
    let mut log_scale = T::zero();
    for k in 0..MAX_TERMS {
        let kk = T::from_usize_lossy(k);
        term = term * (a + kk) * s / ((b + kk) * (kk + T::one()));
        if term == T::zero() {
            return Ok((sum - comp, log_scale));
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if sum.abs() > big || term.abs() > big {
            sum = sum / big;
            comp = comp / big;
            term = term / big;
            log_scale = log_scale + big.ln();
        }
        let next_ratio = ((a + kk + T::one()) / (b + kk + T::one()) * s / (kk + T::lit(2.0))).abs();
        if term.abs() <= tol * sum.abs() && next_ratio < T::one() {
            return Ok((sum - comp, log_scale));
        }
    }
    Err(Error::NonConvergence(format!(
        "Kummer series M({a}, {b}, {s}) after {MAX_TERMS} terms"
    )))
}

fn check_m_args<T: Real>(b: T, s: T) -> Result<()> {
    if is_nonpositive_integer(b) {
        return Err(domain("b", b.f64(), "b not in {0, -1, -2, ...}"));
    }
    if !(s >= T::zero()) {
        return Err(domain("s", s.f64(), "[0, inf)"));
    }
    Ok(())
}

/// Kummer's function `M(a, b, s) = Σ (a)_k/(b)_k s^k/k!`.
pub fn kummer_m<T: Real>(a: T, b: T, s: T) -> Result<T> {
    check_m_args(b, s)?;
    let (m, k) = kummer_series(a, b, s)?;
    Ok(if k == T::zero() { m } else { m * k.exp() })
}

/// `e^{−s} M(a, b, s)`, finite for arguments where `M` itself overflows.
pub fn kummer_m_scaled<T: Real>(a: T, b: T, s: T) -> Result<T> {
    check_m_args(b, s)?;
    let (m, k) = kummer_series(a, b, s)?;
    Ok(m * (k - s).exp())
}

/// `dM/ds = (a/b) M(a+1, b+1, s)`.
pub fn kummer_m_prime<T: Real>(a: T, b: T, s: T) -> Result<T> {
    Ok(a / b * kummer_m(a + T::one(), b + T::one(), s)?)
}

/// Leading large-`s` behaviour `Γ(b)/Γ(a) e^s s^{a−b} [1 + (a−1)(a−b)/s]`.
pub fn kummer_m_asymptotic<T: Real>(a: T, b: T, s: T) -> Result<T> {
    let g = gamma_fn(b)? * rgamma(a);
    Ok(g * s.exp() * s.powf(a - b) * (T::one() + (a - T::one()) * (a - b) / s))
}

/// Tricomi's function `U(a, b, s)` for `s > 0`.
///
/// Closed forms are used for `U(−1/2, 1/2, s) = √s`, `U(a, a+1, s) = s^{−a}`
/// and nonpositive integer `a`. Otherwise `a > 0` goes through the Laplace
/// integral, `a − b + 1 > 0` through Kummer's transformation, and the
/// remaining non-integer `b` cases through the connection formula for
/// moderate `s`.
pub fn tricomi_u<T: Real>(a: T, b: T, s: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(domain("s", s.f64(), "(0, inf)"));
    }
    let one = T::one();
    if a == T::lit(-0.5) && b == T::lit(0.5) {
        return Ok(s.sqrt());
    }
    if b == a + one {
        return Ok(s.powf(-a));
    }
    if a == T::zero() {
        return Ok(one);
    }
    if is_nonpositive_integer(a) {
        let m = (-a).to_usize().unwrap_or(0);
        let mut poch = one;
        for i in 0..m {
            poch = poch * (b + T::from_usize_lossy(i));
        }
        let sign = if m % 2 == 0 { one } else { -one };
        return Ok(sign * poch * kummer_m(a, b, s)?);
    }
    if a > T::zero() {
        return tricomi_u_integral(a, b, s);
    }
    let a2 = a - b + one;
    if a2 > T::zero() {
        return Ok(s.powf(one - b) * tricomi_u(a2, T::lit(2.0) - b, s)?);
    }
    if b != b.round() && s <= T::lit(50.0) {
        let t1 = gamma_fn(one - b)? * rgamma(a2) * kummer_m(a, b, s)?;
        let t2 = gamma_fn(b - one)? * rgamma(a) * s.powf(one - b) * kummer_m(a2, T::lit(2.0) - b, s)?;
        return Ok(t1 + t2);
    }
    Err(Error::Unsupported {
        func: "tricomi_u",
        detail: format!("a = {a}, b = {b}, s = {s}"),
    })
}

fn tricomi_u_integral<T: Real>(a: T, b: T, s: T) -> Result<T> {
    let one = T::one();
    let am1 = a - one;
    let bam1 = b - a - one;
    let tol = T::lit(1e-14).max(T::epsilon() * T::lit(8.0));
    let integral = exp_sinh(
        |t: T| (-s * t).exp() * t.powf(am1) * (one + t).powf(bam1),
        T::zero(),
        tol,
    )?;
    Ok(integral * rgamma(a))
}

/// `dU/ds = −a U(a+1, b+1, s)`.
pub fn tricomi_u_prime<T: Real>(a: T, b: T, s: T) -> Result<T> {
    if a == T::zero() {
        return Ok(T::zero());
    }
    Ok(-a * tricomi_u(a + T::one(), b + T::one(), s)?)
}

/// Leading large-`s` behaviour `s^{−a} [1 − a(a−b+1)/s]`.
pub fn tricomi_u_asymptotic<T: Real>(a: T, b: T, s: T) -> T {
    s.powf(-a) * (T::one() - a * (a - b + T::one()) / s)
}

/// `𝒲{M, U}(s) = −Γ(b)/Γ(a) · e^s s^{−b}`.
pub fn wronskian_closed_form<T: Real>(a: T, b: T, s: T) -> Result<T> {
    Ok(-gamma_fn(b)? * rgamma(a) * s.exp() * s.powf(-b))
}

/// `M U' − M' U + Γ(b)/Γ(a) e^s s^{−b}`, with all derivatives from the
/// contiguous relations.
pub fn wronskian_residual<T: Real>(a: T, b: T, s: T) -> Result<T> {
    let m = kummer_m(a, b, s)?;
    let dm = kummer_m_prime(a, b, s)?;
    let u = tricomi_u(a, b, s)?;
    let du = tricomi_u_prime(a, b, s)?;
    Ok(m * du - dm * u - wronskian_closed_form(a, b, s)?)
}

fn scan_grid<T: Real>(s_max: T) -> Vec<T> {
    let mut grid = vec![T::zero()];
    let mut s = T::zero();
    while s < s_max {
        let step = T::lit(0.02).max(s * T::lit(0.01));
        s = (s + step).min(s_max);
        grid.push(s);
    }
    grid
}

/// Sign changes of `M(a, b, ·)` on `(0, s_max]` found by scanning, as brackets.
pub fn kummer_sign_changes<T: Real>(a: T, b: T, s_max: T) -> Result<Vec<(T, T)>> {
    let grid = scan_grid(s_max);
    let mut out = Vec::new();
    let mut prev = kummer_m_scaled(a, b, grid[0])?;
    for w in grid.windows(2) {
        let cur = kummer_m_scaled(a, b, w[1])?;
        if (prev > T::zero()) != (cur > T::zero()) {
            out.push((w[0], w[1]));
        }
        prev = cur;
    }
    Ok(out)
}

/// The positive zero `s⋆` of `M(−1/2, b, ·)`.
pub fn kummer_positive_zero<T: Real>(b: T) -> Result<T> {
    if !(b > T::zero()) {
        return Err(domain("b", b.f64(), "(0, inf)"));
    }
    let a = T::lit(-0.5);
    let brackets = kummer_sign_changes(a, b, T::lit(1000.0))?;
    let &(lo, hi) = brackets
        .first()
        .ok_or_else(|| Error::BracketNotFound(format!("M(-1/2, {b}, s), s in (0, 1000]")))?;
    let root = refine_root(|s| kummer_m(a, b, s), lo, hi)?;
    if kummer_m_prime(a, b, root)? >= T::zero() {
        return Err(Error::Precondition(format!("zero of M(-1/2, {b}, s) at {root} is not simple")));
    }
    Ok(root)
}
