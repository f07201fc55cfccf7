//! Self-similar profiles `u = |t|^{β/2} U(|x|/√|t|)`: forward profiles with an
//! expanding contact set `{r < R}` and shrinkers supported in `{r < R}`.

use crate::error::{domain, Error, Result};
use crate::integrator::{integrate, OdeOptions, OdeSolution, Termination};
use crate::model::beta_of_gamma;
use crate::num::Real;
use crate::quadrature::{exp_sinh, gauss_kronrod};
use crate::radial::{integrate_radial, Direction, RadialMeta, RadialOde, RadialOptions, RadialProfile, RadialStop};
use crate::roots::refine_root;
use crate::special::{gamma_fn, kummer_m, kummer_m_prime, kummer_m_scaled, kummer_positive_zero, tricomi_u, tricomi_u_prime};

/// Regularization parameters of the δ-family, largest first.
pub const DELTAS: [f64; 7] = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12];
/// Start offset of the free-boundary expansion, relative to `R`.
pub const FB_START_OFFSET: f64 = 1e-4;
/// Below this value the shrinker explorer regularizes `U^{γ−1}` to `(U + δ)^{γ−1}`.
pub const SHRINKER_DELTA_SWITCH: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForwardMethod {
    /// Richardson limit of the regularized family `γ(V + δ)^{γ−1}`.
    DeltaFamily,
    /// Shooting from `R + h₀` along the free-boundary expansion.
    FbExpansion,
    /// Closed forms, `γ ∈ {0, 1}` only.
    Explicit,
}

/// A forward profile with its free-boundary and far-field diagnostics.
#[derive(Clone, Debug)]
pub struct ForwardProfileResult<T> {
    pub profile: RadialProfile<T>,
    pub big_r: T,
    pub method: ForwardMethod,
    /// `lim U(r)/r^β`, available when the profile reaches `10 R`.
    pub asymptotic_c: Option<T>,
    /// Extrapolated `lim U^{1/β}(r)/(r − R)` as `r ↓ R`.
    pub fb_slope: T,
    /// Largest normalized residual of the profile ODE at interior points.
    pub max_residual: T,
    /// `p∞ = ∫_S^∞ s^{n/2−1} U((n+β)/2, n/2, s) γU^{γ−1}(2√s) ds` along the
    /// computed profile (`γ ∈ (0, 1)`, free-boundary expansion only).
    pub p_inf: Option<T>,
}

impl<T: Real> ForwardProfileResult<T> {
    /// Far-field constant predicted by `p∞`, namely `p∞ / 2^β`.
    pub fn c_from_p_inf(&self) -> Option<T> {
        let beta = self.profile.meta.gamma.and_then(|g| beta_of_gamma(g).ok())?;
        self.p_inf.map(|p| p / T::lit(2.0).powf(beta))
    }
}

fn default_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(100.0))
}

fn drift_coeff<T: Real>(n: usize, r: T) -> T {
    T::from_usize_lossy(n - 1) / r + r * T::lit(0.5)
}

fn check_forward_args<T: Real>(gamma: T, n: usize, big_r: T) -> Result<T> {
    let beta = beta_of_gamma(gamma)?;
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    if !(big_r > T::zero()) {
        return Err(domain("R", big_r.f64(), "(0, inf)"));
    }
    Ok(beta)
}

/// Radii used for sampled profiles: clustered near `R`, then uniform up to `r_max`
/// with spacing at most `R/100`.
pub fn profile_grid<T: Real>(big_r: T, r_max: T) -> Vec<T> {
    let mut g = vec![big_r];
    for k in 0..=24 {
        let off = big_r * T::lit(10f64.powf(-4.0 + k as f64 / 8.0));
        if big_r + off < r_max {
            g.push(big_r + off);
        }
    }
    let m = ((r_max - big_r) / big_r * T::lit(100.0)).ceil().to_usize().unwrap_or(0).max(400);
    let step = (r_max - big_r) / T::from_usize_lossy(m);
    for i in 1..=m {
        g.push(big_r + step * T::from_usize_lossy(i));
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    g.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * b.abs());
    if let Some(last) = g.last_mut() {
        *last = r_max;
    }
    g
}

/// `|U'' + A U' − (β/2)U − γU^{γ−1}|` divided by the sum of the magnitudes of the four terms.
pub fn forward_residual<T: Real>(gamma: T, n: usize, r: T, u: T, du: T, d2u: T) -> T {
    let beta = T::lit(2.0) / (T::lit(2.0) - gamma);
    let reaction = if gamma == T::zero() {
        T::zero()
    } else if gamma == T::one() {
        T::one()
    } else {
        gamma * u.max(T::underflow_floor()).powf(gamma - T::one())
    };
    let terms = [d2u, drift_coeff(n, r) * du, -beta * T::lit(0.5) * u, -reaction];
    let sum: T = terms.iter().copied().sum();
    let scale: T = terms.iter().map(|t| t.abs()).sum();
    if scale == T::zero() {
        T::zero()
    } else {
        sum.abs() / scale
    }
}

/// Extrapolates `q(h) = q₀ + k h` from `h = 10⁻²` and `h = 10⁻³`.
fn linear_extrapolate<T: Real>(q_coarse: T, q_fine: T) -> T {
    (T::lit(10.0) * q_fine - q_coarse) / T::lit(9.0)
}

/// The closed-form forward profile for `γ = 0`, with its derivative.
pub fn explicit_forward_gamma0_with_derivative<T: Real>(n: usize, big_r: T, r: T) -> Result<(T, T)> {
    check_forward_args(T::zero(), n, big_r)?;
    if r < big_r {
        return Err(domain("r", r.f64(), "[R, inf)"));
    }
    if r == big_r {
        return Ok((T::zero(), T::lit(2.0).sqrt()));
    }
    let half = T::lit(0.5);
    let a = T::from_usize_lossy(n + 1) * half;
    let b = T::from_usize_lossy(n) * half;
    let big_s = big_r * big_r * T::lit(0.25);
    let s = r * r * T::lit(0.25);
    let k = -(T::lit(8.0).sqrt() / big_r) * gamma_fn(a)? / gamma_fn(b)? * big_s.powf(b);
    let m_big = kummer_m_scaled(a, b, big_s)?;
    let u_big = tricomi_u(a, b, big_s)?;
    let decay = (big_s - s).exp();
    let us = tricomi_u(a, b, s)?;
    let dus = tricomi_u_prime(a, b, s)?;
    let ms = kummer_m_scaled(a, b, s)?;
    let dms = a / b * kummer_m_scaled(a + T::one(), b + T::one(), s)?;
    let u = k * (m_big * decay * us - u_big * ms);
    let du = k * r * half * (m_big * decay * (dus - us) - u_big * (dms - ms));
    Ok((u, du))
}

/// The closed-form forward profile for `γ = 0` in terms of Kummer's and Tricomi's functions.
pub fn explicit_forward_gamma0<T: Real>(n: usize, big_r: T, r: T) -> Result<T> {
    explicit_forward_gamma0_with_derivative(n, big_r, r).map(|p| p.0)
}

/// `lim U(r)/r = R^{n−1} 2^{1/2−n} U((n+1)/2, n/2, R²/4)` for `γ = 0`.
pub fn asymptotic_c_gamma0<T: Real>(n: usize, big_r: T) -> Result<T> {
    check_forward_args(T::zero(), n, big_r)?;
    let half = T::lit(0.5);
    let a = T::from_usize_lossy(n + 1) * half;
    let b = T::from_usize_lossy(n) * half;
    let nn = T::from_usize_lossy(n);
    Ok(big_r.powf(nn - T::one()) / T::lit(2.0).powf(nn - half) * tricomi_u(a, b, big_r * big_r * T::lit(0.25))?)
}

fn gamma1_integrand<T: Real>(n: usize, big_r: T, tau: T) -> T {
    let nn = T::from_usize_lossy(n);
    let q = T::lit(2.0) * nn + tau * tau;
    ((big_r * big_r - tau * tau) * T::lit(0.25)).exp() / (tau.powi(n as i32 - 1) * q * q)
}

fn gamma1_bracket<T: Real>(n: usize, big_r: T, r: T) -> Result<T> {
    let nn = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let inner = gauss_kronrod(
        |tau| gamma1_integrand(n, big_r, tau),
        big_r,
        r,
        T::zero(),
        T::epsilon() * T::lit(16.0),
    )?;
    Ok(T::one() / (two * nn + big_r * big_r) - two * big_r.powi(n as i32) * inner)
}

/// The closed-form forward profile for `γ = 1`, with its derivative.
pub fn explicit_forward_gamma1_with_derivative<T: Real>(n: usize, big_r: T, r: T) -> Result<(T, T)> {
    check_forward_args(T::one(), n, big_r)?;
    if r < big_r {
        return Err(domain("r", r.f64(), "[R, inf)"));
    }
    let two = T::lit(2.0);
    let q = two * T::from_usize_lossy(n) + r * r;
    let c = gamma1_bracket(n, big_r, r)?;
    let u = q * c - T::one();
    let du = two * r * c - q * two * big_r.powi(n as i32) * gamma1_integrand(n, big_r, r);
    Ok((u, du))
}

/// `U(r) = (2n + r²)(1/(2n + R²) − 2Rⁿe^{R²/4} ∫_R^r e^{−τ²/4} τ^{1−n}(2n + τ²)^{−2} dτ) − 1`.
pub fn explicit_forward_gamma1<T: Real>(n: usize, big_r: T, r: T) -> Result<T> {
    explicit_forward_gamma1_with_derivative(n, big_r, r).map(|p| p.0)
}

/// `lim U(r)/r² = ¼ ∫_{R²/4}^∞ τ^{n/2−1} U((n+2)/2, n/2, τ) dτ` for `γ = 1`, by quadrature.
pub fn asymptotic_c_gamma1<T: Real>(n: usize, big_r: T) -> Result<T> {
    check_forward_args(T::one(), n, big_r)?;
    let half = T::lit(0.5);
    let a = T::from_usize_lossy(n + 2) * half;
    let b = T::from_usize_lossy(n) * half;
    let big_s = big_r * big_r * T::lit(0.25);
    let fail = std::cell::Cell::new(None);
    let v = exp_sinh(
        |tau: T| match tricomi_u(a, b, tau) {
            Ok(u) => tau.powf(b - T::one()) * u,
            Err(e) => {
                fail.set(Some(e));
                T::zero()
            }
        },
        big_s,
        T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
    )?;
    if let Some(e) = fail.take() {
        return Err(e);
    }
    Ok(v * T::lit(0.25))
}

/// The same constant from the closed form: `1/(2n + R²) − 2Rⁿ ∫_R^∞ e^{(R²−τ²)/4} τ^{1−n}(2n + τ²)^{−2} dτ`.
pub fn asymptotic_c_gamma1_closed<T: Real>(n: usize, big_r: T) -> Result<T> {
    check_forward_args(T::one(), n, big_r)?;
    let two = T::lit(2.0);
    let tail = exp_sinh(|tau| gamma1_integrand(n, big_r, tau), big_r, T::epsilon() * T::lit(100.0))?;
    Ok(T::one() / (two * T::from_usize_lossy(n) + big_r * big_r) - two * big_r.powi(n as i32) * tail)
}

/// Richardson limit of `U(r)/r^β` over the last decade of radii, assuming
/// `U(r)/r^β = c + k r^{−2} + …`.
pub fn asymptotic_slope<T: Real>(profile: &RadialProfile<T>, beta: T) -> Result<T> {
    if profile.is_empty() {
        return Err(Error::Precondition("empty profile".into()));
    }
    let r_max = profile.r_max();
    let r_ref = if profile.fb_radius > T::zero() {
        profile.fb_radius
    } else {
        profile.r.iter().copied().find(|&r| r > T::zero()).unwrap_or(T::one())
    };
    if r_max < T::lit(10.0) * r_ref {
        return Err(Error::Precondition(format!("profile ends at {r_max} < 10 R = {}", T::lit(10.0) * r_ref)));
    }
    let radii: Vec<T> = (0..4).map(|j| r_max / T::lit(2.0).powi(j)).collect();
    let mut q = Vec::with_capacity(4);
    for &r in &radii {
        let (u, _) = profile.eval(r).ok_or_else(|| Error::Precondition(format!("no sample at r = {r}")))?;
        q.push(u / r.powf(beta));
    }
    let est: Vec<T> = (0..3)
        .map(|j| {
            let (r0, r1) = (radii[j] * radii[j], radii[j + 1] * radii[j + 1]);
            (r0 * q[j] - r1 * q[j + 1]) / (r0 - r1)
        })
        .collect();
    if (est[0] - est[1]).abs() > T::lit(0.05) * est[0].abs() {
        return Err(Error::NonConvergence(format!(
            "U/r^beta estimates {} and {} differ by more than 5%",
            est[0], est[1]
        )));
    }
    if !(est[0] > T::zero()) {
        return Err(Error::NonConvergence(format!("nonpositive limit {}", est[0])));
    }
    Ok(est[0])
}

fn forward_meta<T: Real>(gamma: T, n: usize) -> RadialMeta<T> {
    RadialMeta {
        gamma: Some(gamma),
        n,
        direction: Direction::Forward,
    }
}

fn ensure_monotone<T: Real>(profile: &RadialProfile<T>) -> Result<()> {
    for i in 1..profile.len() {
        if !(profile.u[i] > T::zero() && profile.du[i] > T::zero()) {
            return Err(Error::NonMonotone(profile.r[i].f64()));
        }
    }
    Ok(())
}

fn finish<T: Real>(
    gamma: T,
    big_r: T,
    method: ForwardMethod,
    profile: RadialProfile<T>,
    fb_slope: T,
    max_residual: T,
    p_inf: Option<T>,
) -> Result<ForwardProfileResult<T>> {
    ensure_monotone(&profile)?;
    let beta = beta_of_gamma(gamma)?;
    let asymptotic_c = if profile.r_max() >= T::lit(10.0) * big_r {
        Some(asymptotic_slope(&profile, beta)?)
    } else {
        None
    };
    Ok(ForwardProfileResult {
        profile,
        big_r,
        method,
        asymptotic_c,
        fb_slope,
        max_residual,
        p_inf,
    })
}

/// Forward profile `U'' + ((n−1)/r + r/2)U' − (β/2)U = γU^{γ−1}` on `(R, r_max)`
/// with `U(R) = 0` and `(U^{1/β})'(R) = √2/β`, at the default tolerance.
pub fn forward_profile<T: Real>(gamma: T, n: usize, big_r: T, r_max: T, method: ForwardMethod) -> Result<ForwardProfileResult<T>> {
    forward_profile_with_tol(gamma, n, big_r, r_max, method, default_tol())
}

/// [`forward_profile`] with an explicit integration tolerance.
pub fn forward_profile_with_tol<T: Real>(
    gamma: T,
    n: usize,
    big_r: T,
    r_max: T,
    method: ForwardMethod,
    tol: T,
) -> Result<ForwardProfileResult<T>> {
    check_forward_args(gamma, n, big_r)?;
    if !(r_max > T::lit(4.0) * big_r) {
        return Err(domain("r_max", r_max.f64(), "(4 R, inf)"));
    }
    match method {
        ForwardMethod::Explicit => forward_explicit(gamma, n, big_r, r_max),
        ForwardMethod::FbExpansion if gamma == T::zero() => forward_linear(n, big_r, r_max, tol),
        ForwardMethod::FbExpansion => forward_fb_expansion(gamma, n, big_r, r_max, tol),
        ForwardMethod::DeltaFamily => forward_delta_family(gamma, n, big_r, r_max, tol),
    }
}

fn forward_explicit<T: Real>(gamma: T, n: usize, big_r: T, r_max: T) -> Result<ForwardProfileResult<T>> {
    let eval: fn(usize, T, T) -> Result<(T, T)> = if gamma == T::zero() {
        explicit_forward_gamma0_with_derivative
    } else if gamma == T::one() {
        explicit_forward_gamma1_with_derivative
    } else {
        return Err(Error::Unsupported {
            func: "forward_profile",
            detail: format!("explicit method needs gamma in {{0, 1}}, got {gamma}"),
        });
    };
    let beta = beta_of_gamma(gamma)?;
    let grid = profile_grid(big_r, r_max);
    let mut u = Vec::with_capacity(grid.len());
    let mut du = Vec::with_capacity(grid.len());
    for &r in &grid {
        let (a, b) = eval(n, big_r, r)?;
        u.push(a);
        du.push(b);
    }
    u[0] = T::zero();
    let mut max_residual = T::zero();
    for (i, &r) in grid.iter().enumerate() {
        if r - big_r < T::lit(0.01) * big_r || i + 1 == grid.len() {
            continue;
        }
        let h = T::lit(1e-4) * r;
        let d2u = (eval(n, big_r, r + h)?.1 - eval(n, big_r, r - h)?.1) / (T::lit(2.0) * h);
        max_residual = max_residual.max(forward_residual(gamma, n, r, u[i], du[i], d2u));
    }
    let slope = |h: T| -> Result<T> { Ok(eval(n, big_r, big_r + h)?.0.powf(T::one() / beta) / h) };
    let fb_slope = linear_extrapolate(slope(T::lit(1e-2))?, slope(T::lit(1e-3))?);
    let profile = RadialProfile {
        r: grid,
        u,
        du,
        fb_radius: big_r,
        meta: forward_meta(gamma, n),
        stop: RadialStop::Reached,
    };
    finish(gamma, big_r, ForwardMethod::Explicit, profile, fb_slope, max_residual, None)
}

fn ode_opts<T: Real>(tol: T) -> OdeOptions<T> {
    let mut o = OdeOptions::with_tol(tol);
    o.max_steps = 500_000;
    o
}

fn reached<T: Real, const N: usize>(sol: &OdeSolution<T, N>) -> Result<()> {
    match sol.termination {
        Termination::Reached => Ok(()),
        Termination::Event { x, .. } => Err(Error::NonMonotone(x.f64())),
        Termination::BlowUp { x } => Err(Error::Integration(format!("overflow at r = {x}"))),
    }
}

/// Merges step nodes and `grid` (inside the covered range) after mapping states to `(U, U')`.
fn collect_samples<T: Real, M: Fn([T; 2]) -> (T, T)>(sol: &OdeSolution<T, 2>, grid: &[T], map: M, profile: &mut RadialProfile<T>) {
    let mut pts = sol.nodes();
    let (lo, hi) = (sol.x_start(), sol.x_end());
    for &x in grid {
        if x > lo && x < hi {
            if let Some(y) = sol.eval(x) {
                pts.push((x, y));
            }
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    for (x, y) in pts {
        if profile.r.last().is_some_and(|&last| x <= last) {
            continue;
        }
        let (u, du) = map(y);
        profile.r.push(x);
        profile.u.push(u);
        profile.du.push(du);
    }
}

/// Midpoints of accepted steps at least `r_min` away from the origin of the scan.
fn interior_points<T: Real, const N: usize>(sol: &OdeSolution<T, N>, r_min: T) -> Vec<T> {
    sol.steps
        .iter()
        .map(|s| (s.x0 + s.x1) * T::lit(0.5))
        .filter(|&x| x >= r_min)
        .collect()
}

fn empty_profile<T: Real>(gamma: T, n: usize, big_r: T) -> RadialProfile<T> {
    RadialProfile {
        r: Vec::new(),
        u: Vec::new(),
        du: Vec::new(),
        fb_radius: big_r,
        meta: forward_meta(gamma, n),
        stop: RadialStop::Reached,
    }
}

fn forward_linear<T: Real>(n: usize, big_r: T, r_max: T, tol: T) -> Result<ForwardProfileResult<T>> {
    let gamma = T::zero();
    let half = T::lit(0.5);
    let sqrt2 = T::lit(2.0).sqrt();
    let rhs = |r: T, y: &[T; 2]| [y[1], half * y[0] - drift_coeff(n, r) * y[1]];
    let sol = integrate(rhs, big_r, [T::zero(), sqrt2], r_max, &ode_opts(tol), &[])?;
    reached(&sol)?;
    let mut profile = empty_profile(gamma, n, big_r);
    collect_samples(&sol, &profile_grid(big_r, r_max), |y| (y[0], y[1]), &mut profile);
    let mut max_residual = T::zero();
    for r in interior_points(&sol, big_r * (T::one() + T::lit(0.01))) {
        let (y, dy) = (sol.eval(r).unwrap_or([T::nan(); 2]), sol.eval_derivative(r).unwrap_or([T::nan(); 2]));
        max_residual = max_residual.max(forward_residual(gamma, n, r, y[0], y[1], dy[1]));
    }
    let slope = |h: T| sol.eval(big_r + h).map(|y| y[0] / h).unwrap_or_else(T::nan);
    let fb_slope = linear_extrapolate(slope(T::lit(1e-2)), slope(T::lit(1e-3)));
    finish(gamma, big_r, ForwardMethod::FbExpansion, profile, fb_slope, max_residual, None)
}

/// Right-hand side in `W = U^{1/β}`, `V = W'`:
/// `W'' = [γ/β − (β−1)V² − A W V + W²/2] / W`.
fn w_rhs<T: Real>(gamma: T, beta: T, n: usize, r: T, y: &[T; 2]) -> [T; 2] {
    let (w, v) = (y[0], y[1]);
    let num = gamma / beta - (beta - T::one()) * v * v - drift_coeff(n, r) * w * v + w * w * T::lit(0.5);
    [v, num / w]
}

fn forward_fb_expansion<T: Real>(gamma: T, n: usize, big_r: T, r_max: T, tol: T) -> Result<ForwardProfileResult<T>> {
    let beta = beta_of_gamma(gamma)?;
    let one = T::one();
    let half = T::lit(0.5);
    let v0 = T::lit(2.0).sqrt() / beta;
    let v1 = -drift_coeff(n, big_r) / (one + beta * gamma);
    let h0 = T::lit(FB_START_OFFSET) * big_r;
    let w_start = v0 * h0 + half * v1 * v0 * h0 * h0;
    let y0 = [w_start, v0 + v1 * w_start];
    let zero_event = |_: T, y: &[T; 2]| y[0];
    let events: [&dyn Fn(T, &[T; 2]) -> T; 1] = [&zero_event];
    let sol = integrate(
        |r, y: &[T; 2]| w_rhs(gamma, beta, n, r, y),
        big_r + h0,
        y0,
        r_max,
        &ode_opts(tol),
        &events,
    )?;
    reached(&sol)?;
    let to_u = |y: [T; 2]| (y[0].powf(beta), beta * y[0].powf(beta - one) * y[1]);
    let mut profile = empty_profile(gamma, n, big_r);
    profile.r.push(big_r);
    profile.u.push(T::zero());
    profile.du.push(if beta == one { v0 } else { T::zero() });
    collect_samples(&sol, &profile_grid(big_r, r_max), to_u, &mut profile);

    let mut max_residual = T::zero();
    for r in interior_points(&sol, big_r * (one + T::lit(0.01))) {
        let (y, dy) = (sol.eval(r).unwrap_or([T::nan(); 2]), sol.eval_derivative(r).unwrap_or([T::nan(); 2]));
        let (w, v, dv) = (y[0], y[1], dy[1]);
        let (u, du) = to_u(y);
        let d2u = beta * w.powf(beta - one) * dv + beta * (beta - one) * w.powf(beta - T::lit(2.0)) * v * v;
        max_residual = max_residual.max(forward_residual(gamma, n, r, u, du, d2u));
    }
    let slope = |h: T| sol.eval(big_r + h).map(|y| y[0] / h).unwrap_or_else(T::nan);
    let fb_slope = linear_extrapolate(slope(T::lit(1e-2)), slope(T::lit(1e-3)));
    let p_inf = if gamma < one {
        let w_at = |h: T| -> T {
            if h < h0 {
                v0 * h + half * v1 * v0 * h * h
            } else {
                sol.eval(big_r + h).map(|y| y[0]).unwrap_or_else(T::nan)
            }
        };
        Some(p_inf_quadrature(gamma, beta, n, big_r, r_max, w_at)?)
    } else {
        None
    };
    finish(gamma, big_r, ForwardMethod::FbExpansion, profile, fb_slope, max_residual, p_inf)
}

/// `∫_S^∞ s^{n/2−1} U(a, n/2, s) γ W^{β−2}(2√s) ds` with `a = (n+β)/2`, computed in
/// `r = R + y^m`, `m = 1/(β−1)`, which removes the endpoint singularity. The
/// tail beyond `r_max` uses the `s^{−2}` decay of the integrand. `w_at` takes
/// the offset `r − R`.
fn p_inf_quadrature<T: Real, F: Fn(T) -> T>(gamma: T, beta: T, n: usize, big_r: T, r_max: T, w_at: F) -> Result<T> {
    let half = T::lit(0.5);
    let a = (T::from_usize_lossy(n) + beta) * half;
    let b = T::from_usize_lossy(n) * half;
    let fail = std::cell::Cell::new(None);
    let per_s = |h: T| -> T {
        let r = big_r + h;
        let s = r * r * T::lit(0.25);
        match tricomi_u(a, b, s) {
            Ok(u) => s.powf(b - T::one()) * u * gamma * w_at(h).powf(beta - T::lit(2.0)),
            Err(e) => {
                fail.set(Some(e));
                T::zero()
            }
        }
    };
    let m = T::one() / (beta - T::one());
    let y_max = (r_max - big_r).powf(T::one() / m);
    let body = gauss_kronrod(
        |y: T| {
            let h = y.powf(m);
            per_s(h) * (big_r + h) * half * m * y.powf(m - T::one())
        },
        T::zero(),
        y_max,
        T::zero(),
        T::lit(1e-8),
    )?;
    if let Some(e) = fail.take() {
        return Err(e);
    }
    let s_max = r_max * r_max * T::lit(0.25);
    Ok(body + per_s(r_max - big_r) * s_max)
}

fn forward_delta_family<T: Real>(gamma: T, n: usize, big_r: T, r_max: T, tol: T) -> Result<ForwardProfileResult<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::Unsupported {
            func: "forward_profile",
            detail: "the delta family is identically zero for gamma = 0".into(),
        });
    }
    let beta = beta_of_gamma(gamma)?;
    let half = T::lit(0.5);
    let grid = profile_grid(big_r, r_max);
    let mut fields: Vec<Vec<[T; 3]>> = Vec::new();
    for &d in &DELTAS {
        let delta = T::lit(d);
        let rhs = |r: T, y: &[T; 2]| {
            let reaction = gamma * (y[0].max(T::zero()) + delta).powf(gamma - T::one());
            [y[1], reaction + beta * half * y[0] - drift_coeff(n, r) * y[1]]
        };
        let sol = integrate(rhs, big_r, [T::zero(), T::zero()], r_max, &ode_opts(tol), &[])?;
        reached(&sol)?;
        let mut vals = Vec::with_capacity(grid.len());
        for &r in &grid {
            let y = sol.eval(r).unwrap_or([T::nan(); 2]);
            let dy = sol.eval_derivative(r).unwrap_or([T::nan(); 2]);
            vals.push([y[0], y[1], dy[1]]);
        }
        fields.push(vals);
    }
    let weights = richardson_weights(gamma, beta)?;
    let mut profile = empty_profile(gamma, n, big_r);
    let mut d2 = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        let mut e = [T::zero(); 3];
        for (k, w) in weights.iter().enumerate().take(fields.len()) {
            for (c, ec) in e.iter_mut().enumerate() {
                *ec = *ec + *w * fields[k][i][c];
            }
        }
        profile.r.push(r);
        profile.u.push(if i == 0 { T::zero() } else { e[0] });
        profile.du.push(if i == 0 { T::zero() } else { e[1] });
        d2.push(e[2]);
    }
    let mut max_residual = T::zero();
    for (i, &r) in grid.iter().enumerate() {
        if r - big_r >= T::lit(0.1) * big_r {
            max_residual = max_residual.max(forward_residual(gamma, n, r, profile.u[i], profile.du[i], d2[i]));
        }
    }
    let slope = |h: T| {
        profile
            .eval(big_r + h)
            .map(|(u, _)| u.max(T::zero()).powf(T::one() / beta) / h)
            .unwrap_or_else(T::nan)
    };
    let fb_slope = linear_extrapolate(slope(T::lit(1e-2)), slope(T::lit(1e-3)));
    finish(gamma, big_r, ForwardMethod::DeltaFamily, profile, fb_slope, max_residual, None)
}

/// Exponents of the δ-expansion `V_δ = U + Σ A_k δ^{e_k}`: the smallest
/// positive values of `iγ + j/β + l`.
pub fn delta_exponents<T: Real>(gamma: T, beta: T, count: usize) -> Vec<T> {
    let mut ex = Vec::new();
    for i in 0..=count {
        for j in 0..=count {
            for l in 0..=count {
                let e = T::from_usize_lossy(i) * gamma + T::from_usize_lossy(j) / beta + T::from_usize_lossy(l);
                if e > T::zero() {
                    ex.push(e);
                }
            }
        }
    }
    ex.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ex.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9));
    ex.truncate(count);
    ex
}

/// Weights `w_k` with `U ≈ Σ w_k V_{δ_k}`, exact for the constant plus the
/// leading `DELTAS.len() − 1` terms of the δ-expansion.
pub fn richardson_weights<T: Real>(gamma: T, beta: T) -> Result<Vec<T>> {
    let m = DELTAS.len();
    let ex = delta_exponents(gamma, beta, m - 1);
    // Row j of the transposed system holds δ_k^{e_j}; solve Aᵀ w = e₁.
    let mut a: Vec<Vec<T>> = (0..m)
        .map(|j| {
            DELTAS
                .iter()
                .map(|&d| if j == 0 { T::one() } else { T::lit(d).powf(ex[j - 1]) })
                .collect()
        })
        .collect();
    let mut rhs: Vec<T> = (0..m).map(|j| if j == 0 { T::one() } else { T::zero() }).collect();
    solve_dense(&mut a, &mut rhs)?;
    Ok(rhs)
}

/// Gaussian elimination with partial pivoting; the solution overwrites `b`.
fn solve_dense<T: Real>(a: &mut [Vec<T>], b: &mut [T]) -> Result<()> {
    let n = b.len();
    for i in 0..n {
        let p = (i..n)
            .max_by(|&x, &y| a[x][i].abs().partial_cmp(&a[y][i].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(i);
        if a[p][i] == T::zero() {
            return Err(Error::Precondition("singular extrapolation system".into()));
        }
        a.swap(i, p);
        b.swap(i, p);
        for j in i + 1..n {
            let f = a[j][i] / a[i][i];
            for k in i..n {
                let aik = a[i][k];
                a[j][k] = a[j][k] - f * aik;
            }
            b[j] = b[j] - f * b[i];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s = s - a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Ok(())
}

/// The δ-regularized profile `V_δ` sampled on `radii`, for ordering checks.
pub fn delta_profile<T: Real>(gamma: T, n: usize, big_r: T, delta: T, radii: &[T]) -> Result<Vec<T>> {
    let beta = check_forward_args(gamma, n, big_r)?;
    if !(delta > T::zero()) {
        return Err(domain("delta", delta.f64(), "(0, inf)"));
    }
    let r_end = radii.iter().copied().fold(big_r, T::max);
    if r_end <= big_r {
        return Ok(vec![T::zero(); radii.len()]);
    }
    let half = T::lit(0.5);
    let rhs = |r: T, y: &[T; 2]| {
        let reaction = if gamma == T::zero() {
            T::zero()
        } else {
            gamma * (y[0].max(T::zero()) + delta).powf(gamma - T::one())
        };
        [y[1], reaction + beta * half * y[0] - drift_coeff(n, r) * y[1]]
    };
    let sol = integrate(rhs, big_r, [T::zero(), T::zero()], r_end, &ode_opts(default_tol()), &[])?;
    reached(&sol)?;
    Ok(radii
        .iter()
        .map(|&r| if r <= big_r { T::zero() } else { sol.eval(r).map(|y| y[0]).unwrap_or_else(T::nan) })
        .collect())
}

/// A shrinking profile `U'' + ((n−1)/r − r/2)U' + (β/2)U = γU^{γ−1}` on `(0, R)`.
#[derive(Clone, Debug)]
pub struct ShrinkerResult<T> {
    pub big_r: T,
    /// Center height `U(0)`.
    pub ell: T,
    pub profile: RadialProfile<T>,
}

/// The `γ = 0` shrinker `U(r) = ℓ M(−1/2, n/2, r²/4)` with `R = 2√s⋆`.
pub fn shrinker_gamma0<T: Real>(n: usize) -> Result<ShrinkerResult<T>> {
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    let half = T::lit(0.5);
    let a = -half;
    let b = T::from_usize_lossy(n) * half;
    let s_star = kummer_positive_zero(b)?;
    let big_r = T::lit(2.0) * s_star.sqrt();
    let ell = -T::one() / ((s_star * half).sqrt() * kummer_m_prime(a, b, s_star)?);
    let m = 200;
    let mut profile = RadialProfile {
        r: Vec::with_capacity(m + 1),
        u: Vec::with_capacity(m + 1),
        du: Vec::with_capacity(m + 1),
        fb_radius: big_r,
        meta: RadialMeta {
            gamma: Some(T::zero()),
            n,
            direction: Direction::Backward,
        },
        stop: RadialStop::Zero { r: big_r },
    };
    for i in 0..=m {
        let r = big_r * T::from_usize_lossy(i) / T::from_usize_lossy(m);
        let s = r * r * T::lit(0.25);
        profile.r.push(r);
        profile.u.push(if i == m { T::zero() } else { ell * kummer_m(a, b, s)? });
        profile.du.push(ell * r * half * kummer_m_prime(a, b, s)?);
    }
    let slope = *profile.du.last().unwrap_or(&T::nan());
    let target = -T::lit(2.0).sqrt();
    if (slope - target).abs() > T::lit(1e-8).max(T::epsilon() * T::lit(1e3)) {
        return Err(Error::Precondition(format!("U'(R) = {slope}, expected {target}")));
    }
    Ok(ShrinkerResult { big_r, ell, profile })
}

/// For `n = 1`: `(∫₀ᴿ∫₀ʳ e^{τ²/4} dτ dr, ℓ ∫₀ᴿ e^{r²/4} dr)`, which equal `(2, 2√2)`
/// at the `γ = 0` shrinker.
pub fn shrinker_gamma0_n1_conditions<T: Real>(big_r: T, ell: T) -> Result<(T, T)> {
    let tol = T::epsilon() * T::lit(16.0);
    let q = |tau: T| (tau * tau * T::lit(0.25)).exp();
    let double = gauss_kronrod(|tau| (big_r - tau) * q(tau), T::zero(), big_r, T::zero(), tol)?;
    let single = gauss_kronrod(q, T::zero(), big_r, T::zero(), tol)?;
    Ok((double, ell * single))
}

/// Free-boundary defect of the `γ = 1` candidate `U(r) = ℓ − (ℓ−1) r²/(2n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolaDefect<T> {
    pub ell: T,
    /// Zero of the parabola, if any.
    pub big_r: Option<T>,
    /// Log–log slope of `|(U^{1/2})'(R − h)|` against `h`.
    pub exponent: Option<T>,
    /// `|(U^{1/2})'|` at the smallest sampled `h`.
    pub slope_near_fb: Option<T>,
}

/// Offsets `h` below `R` used by the parabola fit.
pub const PARABOLA_OFFSETS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Checks that no member of the `γ = 1` family meets the free-boundary condition.
pub fn shrinker_gamma1_scan<T: Real>(n: usize, ell_grid: &[T]) -> Result<Vec<ParabolaDefect<T>>> {
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    let nn = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(ell_grid.len());
    for &ell in ell_grid {
        if !(ell > T::zero()) {
            return Err(domain("ell", ell.f64(), "(0, inf)"));
        }
        if ell <= T::one() {
            out.push(ParabolaDefect {
                ell,
                big_r: None,
                exponent: None,
                slope_near_fb: None,
            });
            continue;
        }
        let k = (ell - T::one()) / (two * nn);
        let big_r = (two * nn * ell / (ell - T::one())).sqrt();
        let pts: Vec<(T, T)> = PARABOLA_OFFSETS
            .iter()
            .map(|&h| {
                let h = T::lit(h);
                let r = big_r - h;
                let u = k * h * (two * big_r - h);
                let du = -two * k * r;
                (h.ln(), (du.abs() / (two * u.sqrt())).ln())
            })
            .collect();
        let m = T::from_usize_lossy(pts.len());
        let mx = pts.iter().map(|p| p.0).sum::<T>() / m;
        let my = pts.iter().map(|p| p.1).sum::<T>() / m;
        let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        out.push(ParabolaDefect {
            ell,
            big_r: Some(big_r),
            exponent: Some(sxy / sxx),
            slope_near_fb: pts.last().map(|p| p.1.exp()),
        });
    }
    Ok(out)
}

/// Outcome of one shrinker shot from `(0, ℓ, 0)`.
#[derive(Clone, Debug)]
pub struct ShootReport<T> {
    pub gamma: T,
    pub ell: T,
    /// First zero of `U`, if reached before `r_max`.
    pub big_r: Option<T>,
    /// `(U^{1/β})'` at `U = 10⁻², 10⁻³, 10⁻⁴` on the way down.
    pub level_slopes: Vec<(T, T)>,
    /// Slope extrapolated to `U = 0` from the two lowest levels.
    pub fb_slope: Option<T>,
    /// `|fb_slope + √2/β|`.
    pub defect: Option<T>,
    pub stop: RadialStop<T>,
    pub profile: RadialProfile<T>,
}

/// Levels of `U` at which the shrinker slope is sampled.
pub const SHRINKER_LEVELS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Radius up to which shrinker shots are integrated.
pub const SHRINKER_R_MAX: f64 = 20.0;

/// Shoots the shrinker equation from the center and measures the free-boundary slope.
pub fn shrinker_shoot<T: Real>(gamma: T, n: usize, ell: T, tol: T) -> Result<ShootReport<T>> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(domain("gamma", gamma.f64(), "(0, 1)"));
    }
    if !(ell > T::zero()) {
        return Err(domain("ell", ell.f64(), "(0, inf)"));
    }
    let beta = beta_of_gamma(gamma)?;
    let delta = T::lit(SHRINKER_DELTA_SWITCH);
    let ode = RadialOde {
        n,
        drift: -T::one(),
        zeroth: beta * T::lit(0.5),
        rhs: |u: T| {
            if u > delta {
                gamma * u.powf(gamma - T::one())
            } else {
                gamma * (u.max(T::zero()) + delta).powf(gamma - T::one())
            }
        },
    };
    let mut opts = RadialOptions::new(tol, n);
    opts.meta = RadialMeta {
        gamma: Some(gamma),
        n,
        direction: Direction::Backward,
    };
    let profile = integrate_radial(&ode, (T::zero(), ell, T::zero()), T::lit(SHRINKER_R_MAX), &opts)?;
    let big_r = match profile.stop {
        RadialStop::Zero { r } => Some(r),
        _ => None,
    };
    let mut level_slopes = Vec::new();
    if big_r.is_some() {
        for &lv in &SHRINKER_LEVELS {
            let level = T::lit(lv);
            if level >= ell {
                continue;
            }
            let Some(i) = profile.u.iter().rposition(|&u| u > level) else {
                continue;
            };
            if i + 1 >= profile.len() {
                continue;
            }
            let (lo, hi) = (profile.r[i], profile.r[i + 1]);
            let r = refine_root(
                |r| {
                    profile
                        .eval(r)
                        .map(|(u, _)| u - level)
                        .ok_or_else(|| Error::Precondition("outside profile".into()))
                },
                lo,
                hi,
            )?;
            let (u, du) = profile.eval(r).unwrap_or((level, T::nan()));
            level_slopes.push((level, u.max(T::underflow_floor()).powf(T::one() / beta - T::one()) * du / beta));
        }
    }
    let fb_slope = if level_slopes.len() >= 2 {
        let k = level_slopes.len();
        let (l1, s1) = level_slopes[k - 2];
        let (l2, s2) = level_slopes[k - 1];
        let (w1, w2) = (l1.powf(T::one() / beta), l2.powf(T::one() / beta));
        Some((w1 * s2 - w2 * s1) / (w1 - w2))
    } else {
        None
    };
    let target = -T::lit(2.0).sqrt() / beta;
    Ok(ShootReport {
        gamma,
        ell,
        big_r,
        defect: fb_slope.map(|s| (s - target).abs()),
        fb_slope,
        level_slopes,
        stop: profile.stop,
        profile,
    })
}

/// Default `ℓ` grid for shrinker sweeps: 41 log-spaced values in `[10⁻², 10²]`.
pub fn default_ell_grid<T: Real>() -> Vec<T> {
    (0..=40).map(|i| T::lit(10f64.powf(-2.0 + 0.1 * i as f64))).collect()
}

/// Runs [`shrinker_shoot`] over `ells`.
pub fn shrinker_sweep<T: Real>(gamma: T, n: usize, ells: &[T], tol: T) -> Result<Vec<ShootReport<T>>> {
    ells.iter().map(|&ell| shrinker_shoot(gamma, n, ell, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma0_closed_form_boundary_values() {
        for n in 1..=3 {
            let (u, du) = explicit_forward_gamma0_with_derivative(n, 1.0, 1.0).unwrap();
            assert_eq!(u, 0.0);
            assert_relative_eq!(du, 2f64.sqrt(), max_relative = 1e-14);
            let (u, du) = explicit_forward_gamma0_with_derivative(n, 1.0, 1.0 + 1e-6).unwrap();
            assert!((u - 2f64.sqrt() * 1e-6).abs() < 1e-11, "n={n} u={u}");
            assert_relative_eq!(du, 2f64.sqrt(), max_relative = 1e-5);
        }
    }

    #[test]
    fn gamma0_closed_form_solves_ode() {
        for n in 1..=3 {
            for &r in &[1.5, 2.0, 3.0] {
                let h = 1e-4;
                let (u, du) = explicit_forward_gamma0_with_derivative(n, 1.0, r).unwrap();
                let d2u = (explicit_forward_gamma0_with_derivative(n, 1.0, r + h).unwrap().1
                    - explicit_forward_gamma0_with_derivative(n, 1.0, r - h).unwrap().1)
                    / (2.0 * h);
                let fd = (explicit_forward_gamma0(n, 1.0, r + h).unwrap() - explicit_forward_gamma0(n, 1.0, r - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(fd, du, max_relative = 1e-7);
                assert!(forward_residual(0.0, n, r, u, du, d2u) < 1e-8);
            }
        }
    }

    #[test]
    fn gamma0_large_r_slope() {
        for n in 1..=3 {
            let c = asymptotic_c_gamma0(n, 1.0).unwrap();
            let u = explicit_forward_gamma0(n, 1.0, 50.0).unwrap();
            assert_relative_eq!(u / 50.0, c, max_relative = 1e-3);
        }
    }

    #[test]
    fn gamma1_closed_form_near_fb() {
        let (u, du) = explicit_forward_gamma1_with_derivative::<f64>(2, 1.0, 1.0).unwrap();
        assert!(u.abs() < 1e-15 && du.abs() < 1e-15);
        for &h in &[1e-2, 1e-3] {
            let u: f64 = explicit_forward_gamma1(2, 1.0, 1.0 + h).unwrap();
            assert_relative_eq!(u.sqrt() / h, 0.5f64.sqrt(), max_relative = 2.0 * h);
        }
    }

    #[test]
    fn gamma1_far_field_constants_agree() {
        for n in 1..=3 {
            let q = asymptotic_c_gamma1(n, 1.0).unwrap();
            let c = asymptotic_c_gamma1_closed(n, 1.0).unwrap();
            assert_relative_eq!(q, c, max_relative = 1e-8);
            let u: f64 = explicit_forward_gamma1(n, 1.0, 50.0).unwrap();
            assert!((u / 2500.0 - q).abs() < 1e-2 * q);
        }
    }

    #[test]
    fn fb_expansion_matches_gamma0_closed_form() {
        for n in 1..=3 {
            let res = forward_profile(0.0, n, 1.0, 20.0, ForwardMethod::FbExpansion).unwrap();
            for i in 0..=50 {
                let r = 1.1 + 1.9 * i as f64 / 50.0;
                let (u, _) = res.profile.eval(r).unwrap();
                assert_relative_eq!(u, explicit_forward_gamma0(n, 1.0, r).unwrap(), max_relative = 1e-6);
            }
            let c = asymptotic_c_gamma0(n, 1.0).unwrap();
            assert_relative_eq!(res.asymptotic_c.unwrap(), c, max_relative = 1e-2);
            assert_relative_eq!(res.fb_slope, 2f64.sqrt(), max_relative = 1e-4);
            assert!(res.max_residual < 1e-7, "residual {}", res.max_residual);
        }
    }

    #[test]
    fn fb_expansion_matches_gamma1_closed_form() {
        for n in 1..=3 {
            let res = forward_profile(1.0, n, 1.0, 20.0, ForwardMethod::FbExpansion).unwrap();
            for i in 0..=50 {
                let r = 1.1 + 1.9 * i as f64 / 50.0;
                let (u, _) = res.profile.eval(r).unwrap();
                assert_relative_eq!(u, explicit_forward_gamma1(n, 1.0, r).unwrap(), max_relative = 1e-6);
            }
            assert_relative_eq!(res.fb_slope, 0.5f64.sqrt(), max_relative = 1e-5);
            assert!(res.max_residual < 1e-7, "residual {}", res.max_residual);
        }
    }

    #[test]
    fn general_gamma_profiles() {
        for &gamma in &[0.25, 0.5, 0.75] {
            for n in 1..=2 {
                let beta = 2.0 / (2.0 - gamma);
                let res = forward_profile(gamma, n, 1.0, 20.0, ForwardMethod::FbExpansion).unwrap();
                assert!((res.fb_slope - 2f64.sqrt() / beta).abs() < 1e-3, "slope {}", res.fb_slope);
                assert!(res.max_residual < 1e-7, "residual {}", res.max_residual);
                let c = res.asymptotic_c.unwrap();
                let cp = res.c_from_p_inf().unwrap();
                assert!((c - cp).abs() < 0.05 * c, "gamma={gamma} n={n}: c={c} p_inf/2^beta={cp}");
            }
        }
    }

    #[test]
    fn delta_family_agrees_with_fb_expansion() {
        for &gamma in &[0.25, 0.5, 0.75] {
            let fb = forward_profile(gamma, 1, 1.0, 5.0, ForwardMethod::FbExpansion).unwrap();
            let df = forward_profile(gamma, 1, 1.0, 5.0, ForwardMethod::DeltaFamily).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..=40 {
                let r = 1.1 + 1.9 * i as f64 / 40.0;
                let a = fb.profile.eval(r).unwrap().0;
                let b = df.profile.eval(r).unwrap().0;
                worst = worst.max((a - b).abs() / a);
            }
            assert!(worst < 1e-5, "gamma={gamma}: worst relative gap {worst}");
        }
    }

    #[test]
    fn explicit_method_rejects_general_gamma() {
        assert!(matches!(
            forward_profile(0.5, 1, 1.0, 5.0, ForwardMethod::Explicit),
            Err(Error::Unsupported { .. })
        ));
        assert!(forward_profile(0.0, 1, 1.0, 5.0, ForwardMethod::DeltaFamily).is_err());
        assert!(forward_profile(0.5, 1, 1.0, 3.0, ForwardMethod::FbExpansion).is_err());
    }

    #[test]
    fn asymptotic_slope_of_exact_power() {
        let r: Vec<f64> = (1..=400).map(|i| 0.05 * i as f64).collect();
        let beta = 1.5;
        let profile = RadialProfile {
            u: r.iter().map(|x| 0.7 * x.powf(beta)).collect(),
            du: r.iter().map(|x| 0.7 * beta * x.powf(beta - 1.0)).collect(),
            r,
            fb_radius: 1.0,
            meta: forward_meta(0.5, 1),
            stop: RadialStop::Reached,
        };
        assert_relative_eq!(asymptotic_slope(&profile, beta).unwrap(), 0.7, max_relative = 1e-10);
    }

    #[test]
    fn gamma0_shrinker_conditions() {
        let s = shrinker_gamma0::<f64>(1).unwrap();
        let (double, single) = shrinker_gamma0_n1_conditions(s.big_r, s.ell).unwrap();
        assert!((double - 2.0).abs() < 1e-8, "double integral {double}");
        assert!((single - 8f64.sqrt()).abs() < 1e-8, "single integral {single}");
        assert_eq!(s.profile.du[0], 0.0);
        for n in 2..=3 {
            let s = shrinker_gamma0::<f64>(n).unwrap();
            assert!(s.profile.du.iter().skip(1).all(|&d| d < 0.0));
        }
    }

    #[test]
    fn gamma1_parabolas_never_meet_fb_condition() {
        let rep = shrinker_gamma1_scan::<f64>(1, &[0.5, 1.0, 1.5, 2.0, 10.0]).unwrap();
        assert!(rep[0].big_r.is_none() && rep[1].big_r.is_none());
        assert_relative_eq!(rep[3].big_r.unwrap(), 2.0, max_relative = 1e-14);
        for d in &rep[2..] {
            assert!((d.exponent.unwrap() + 0.5).abs() < 0.05);
        }
    }

    #[test]
    fn shrinker_initial_curvature_sign() {
        for &(gamma, ell) in &[(0.5, 0.1), (0.5, 3.0), (0.25, 0.5), (0.75, 2.0)] {
            let beta = 2.0 / (2.0 - gamma);
            let rep = shrinker_shoot(gamma, 1, ell, 1e-10).unwrap();
            let sign = gamma * f64::powf(ell, gamma - 1.0) - beta / 2.0 * ell;
            let i = rep.profile.r.iter().position(|&r| r > 0.01).unwrap();
            assert_eq!(rep.profile.du[i] > 0.0, sign > 0.0, "gamma={gamma} ell={ell}");
        }
    }

    #[test]
    fn shrinker_continuation_to_gamma0() {
        for n in 1..=2 {
            let s0 = shrinker_gamma0::<f64>(n).unwrap();
            let rep = shrinker_shoot(0.001, n, s0.ell, 1e-10).unwrap();
            assert!((rep.big_r.unwrap() - s0.big_r).abs() < 1e-2);
            assert!(rep.defect.unwrap() < 1e-3, "defect {:?}", rep.defect);
        }
    }

    #[test]
    fn shrinker_continuation_to_gamma1() {
        for &ell in &[1.5, 2.0, 10.0] {
            let rep = shrinker_shoot(0.999, 1, ell, 1e-10).unwrap();
            let parabola = shrinker_gamma1_scan::<f64>(1, &[ell]).unwrap();
            assert!((rep.big_r.unwrap() - parabola[0].big_r.unwrap()).abs() < 1e-3);
            let s = &rep.level_slopes;
            for w in s.windows(2) {
                let ratio = w[1].1 / w[0].1;
                assert!((ratio - 10f64.sqrt()).abs() < 0.1, "ratio {ratio}");
            }
        }
    }

    #[test]
    fn richardson_weights_cancel_expansion() {
        for &gamma in &[0.25, 0.5, 0.75, 1.0] {
            let beta = 2.0 / (2.0 - gamma);
            let w = richardson_weights(gamma, beta).unwrap();
            assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
            for e in delta_exponents(gamma, beta, DELTAS.len() - 1) {
                let s: f64 = w.iter().zip(DELTAS).map(|(w, d)| w * d.powf(e)).sum();
                assert!(s.abs() < 1e-9, "exponent {e}: {s}");
            }
        }
    }
}
