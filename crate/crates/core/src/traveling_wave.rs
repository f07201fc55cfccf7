//! Traveling waves `u(x, t) = φ(e·x − ct)` with `cφ' + φ'' = γφ^{γ−1}` on `{φ > 0}`
//! and `|(φ^{1/β})'| = √2/β` at the front.

use crate::error::{domain, Error, Result};
use crate::integrator::{integrate, integrate_stiff_scalar, OdeOptions, Termination};
use crate::model::beta_of_gamma;
use crate::num::Real;
use crate::quadrature::gauss_kronrod;

/// Which admissible profile: `+` vanishes on `(−∞, offset]`, `−` on `[offset, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn unit<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// Start offset of numerically integrated profiles.
pub const TW_START_OFFSET: f64 = 1e-5;
/// Step-off distance from `P^±` along the separatrix.
pub const SEPARATRIX_STEP_OFF: f64 = 1e-6;

/// A sampled traveling-wave profile. Samples cover the support only, ordered by `ξ`.
#[derive(Clone, Debug)]
pub struct WaveProfile<T> {
    pub gamma: T,
    pub c: T,
    pub sign: Sign,
    /// Location of the front.
    pub offset: T,
    pub xi: Vec<T>,
    pub phi: Vec<T>,
    pub dphi: Vec<T>,
    /// Largest normalized residual `|cφ' + φ'' − γφ^{γ−1}|` at interior points.
    pub max_residual: T,
}

impl<T: Real> WaveProfile<T> {
    /// `(φ, φ')` at `xi`: zero off the support, cubic Hermite on it, `None` past the samples.
    pub fn eval(&self, xi: T) -> Option<(T, T)> {
        let on_support = match self.sign {
            Sign::Plus => xi > self.offset,
            Sign::Minus => xi < self.offset,
        };
        if !on_support {
            return Some((T::zero(), T::zero()));
        }
        let n = self.xi.len();
        if n == 0 || xi < self.xi[0] || xi > self.xi[n - 1] {
            return None;
        }
        let i = self.xi.partition_point(|&x| x < xi);
        if i == 0 {
            return Some((self.phi[0], self.dphi[0]));
        }
        let (x0, x1) = (self.xi[i - 1], self.xi[i]);
        let h = x1 - x0;
        let t = (xi - x0) / h;
        let (p0, p1, d0, d1) = (self.phi[i - 1], self.phi[i], self.dphi[i - 1] * h, self.dphi[i] * h);
        let (t2, t3) = (t * t, t * t * t);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let v = (two * t3 - three * t2 + T::one()) * p0 + (t3 - two * t2 + t) * d0 + (three * t2 - two * t3) * p1 + (t3 - t2) * d1;
        let dv = (T::lit(6.0) * (t2 - t) * (p0 - p1) + (three * t2 - T::lit(4.0) * t + T::one()) * d0 + (three * t2 - two * t) * d1) / h;
        Some((v, dv))
    }

    /// Checks `φ ≥ 0` and monotonicity on the support.
    pub fn check_invariants(&self) -> Result<()> {
        if self.phi.iter().any(|&p| p < T::zero()) {
            return Err(Error::Precondition("negative profile value".into()));
        }
        let s: T = self.sign.unit();
        for (i, (&x, &d)) in self.xi.iter().zip(&self.dphi).enumerate() {
            if x != self.offset && !(s * d > T::zero()) {
                return Err(Error::NonMonotone(self.xi[i].f64()));
            }
        }
        Ok(())
    }

    /// The mirror image `ξ ↦ 2·offset − ξ`, which is the profile for `(−c, −sign)`.
    pub fn mirrored(&self) -> Self {
        let mut xi: Vec<T> = self.xi.iter().map(|&x| T::lit(2.0) * self.offset - x).collect();
        let mut phi = self.phi.clone();
        let mut dphi: Vec<T> = self.dphi.iter().map(|&d| -d).collect();
        xi.reverse();
        phi.reverse();
        dphi.reverse();
        WaveProfile {
            gamma: self.gamma,
            c: -self.c,
            sign: self.sign.flip(),
            offset: self.offset,
            xi,
            phi,
            dphi,
            max_residual: self.max_residual,
        }
    }

    /// Translates the profile so the front sits at `offset`.
    pub fn shifted(&self, offset: T) -> Self {
        let d = offset - self.offset;
        let mut out = self.clone();
        out.offset = offset;
        out.xi.iter_mut().for_each(|x| *x = *x + d);
        out
    }
}

/// `(e^{−x} − 1 + x)/x²` with a five-term series for `|x| < 1e−4`.
fn phi1_ratio<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let mut acc = T::zero();
        let mut term = T::lit(0.5);
        for k in 0..5 {
            acc = acc + term;
            term = -term * x / T::from_usize_lossy(k + 3);
        }
        acc
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

/// `(1 − e^{−x})/x`, continuous at 0.
fn expm1_ratio<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        -(-x).exp_m1() / x
    }
}

/// Closed-form admissible profile and derivative for `γ ∈ {0, 1}` (front at 0).
pub fn explicit_tw_with_derivative<T: Real>(gamma: T, c: T, sign: Sign, xi: T) -> Result<(T, T)> {
    let on_support = match sign {
        Sign::Plus => xi > T::zero(),
        Sign::Minus => xi < T::zero(),
    };
    if gamma == T::zero() {
        if !on_support {
            return Ok((T::zero(), T::zero()));
        }
        // φ⁺ = √2 (1 − e^{−cξ})/c and φ⁻ = −φ⁺ on their supports.
        let s: T = sign.unit();
        let sqrt2 = T::lit(2.0).sqrt();
        let x = c * xi;
        Ok((s * sqrt2 * xi * expm1_ratio(x), s * sqrt2 * (-x).exp()))
    } else if gamma == T::one() {
        if !on_support {
            return Ok((T::zero(), T::zero()));
        }
        let x = c * xi;
        Ok((xi * xi * phi1_ratio(x), xi * expm1_ratio(x)))
    } else {
        Err(Error::Unsupported {
            func: "explicit_tw",
            detail: format!("closed forms exist for gamma in {{0, 1}}, got {gamma}"),
        })
    }
}

/// Closed-form admissible profile for `γ ∈ {0, 1}` (front at 0).
pub fn explicit_tw<T: Real>(gamma: T, c: T, sign: Sign, xi: T) -> Result<T> {
    explicit_tw_with_derivative(gamma, c, sign, xi).map(|p| p.0)
}

/// Sample offsets from the front: geometric near it, uniform further out.
fn support_offsets<T: Real>(xi_max: T) -> Vec<T> {
    let mut g = vec![T::zero()];
    for k in 0..=24 {
        let h = T::lit(10f64.powf(-6.0 + k as f64 / 4.0));
        if h < xi_max {
            g.push(h);
        }
    }
    let m = 400;
    for i in 1..=m {
        g.push(xi_max * T::from_usize_lossy(i) / T::from_usize_lossy(m));
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    g.dedup();
    g
}

/// Normalized residual `|cφ' + φ'' − γφ^{γ−1}| / (|cφ'| + |φ''| + |γφ^{γ−1}|)`.
pub fn tw_residual<T: Real>(gamma: T, c: T, phi: T, dphi: T, d2phi: T) -> T {
    let reaction = if gamma == T::zero() {
        T::zero()
    } else if gamma == T::one() {
        T::one()
    } else {
        gamma * phi.max(T::underflow_floor()).powf(gamma - T::one())
    };
    let terms = [c * dphi, d2phi, -reaction];
    let scale: T = terms.iter().map(|t| t.abs()).sum();
    if scale == T::zero() {
        T::zero()
    } else {
        terms.iter().copied().sum::<T>().abs() / scale
    }
}

/// Sampled closed-form profile on `|ξ| ≤ xi_max` for `γ ∈ {0, 1}`.
pub fn explicit_tw_profile<T: Real>(gamma: T, c: T, sign: Sign, xi_max: T) -> Result<WaveProfile<T>> {
    if !(xi_max > T::zero()) {
        return Err(domain("xi_max", xi_max.f64(), "(0, inf)"));
    }
    let s: T = sign.unit();
    let mut p = WaveProfile {
        gamma,
        c,
        sign,
        offset: T::zero(),
        xi: Vec::new(),
        phi: Vec::new(),
        dphi: Vec::new(),
        max_residual: T::zero(),
    };
    let mut offsets = support_offsets(xi_max);
    if sign == Sign::Minus {
        offsets.reverse();
    }
    for h in offsets {
        let xi = s * h;
        let (v, d) = if h == T::zero() {
            let d0 = if gamma == T::zero() { s * T::lit(2.0).sqrt() } else { T::zero() };
            (T::zero(), d0)
        } else {
            explicit_tw_with_derivative(gamma, c, sign, xi)?
        };
        if h > T::lit(1e-3) && h < xi_max {
            let dh = T::lit(1e-5) * h.max(T::one());
            let d2 = (explicit_tw_with_derivative(gamma, c, sign, xi + dh)?.1 - explicit_tw_with_derivative(gamma, c, sign, xi - dh)?.1)
                / (T::lit(2.0) * dh);
            p.max_residual = p.max_residual.max(tw_residual(gamma, c, v, d, d2));
        }
        p.xi.push(xi);
        p.phi.push(v);
        p.dphi.push(d);
    }
    Ok(p)
}

/// Separatrix expansion `V = sV₀ + v₁U + v₂U²` at `P^{±} = (0, ±√2/β)`.
fn separatrix_coeffs<T: Real>(gamma: T, beta: T, c: T, sign: Sign) -> (T, T, T) {
    let s: T = sign.unit();
    let v0 = s * T::lit(2.0).sqrt() / beta;
    let k = beta * gamma * T::lit(0.5);
    let v1 = -c / (T::one() + beta * gamma);
    let v2 = (-c * v1 - (T::one() + k) * v1 * v1) / (T::lit(2.0) * v0 * (T::one() + k));
    (v0, v1, v2)
}

fn tw_rhs<T: Real>(gamma: T, beta: T, c: T, y: &[T; 2]) -> [T; 2] {
    let (w, v) = (y[0], y[1]);
    let k = beta * gamma * T::lit(0.5);
    [v, (gamma / beta - c * w * v - k * v * v) / w]
}

/// Admissible profile for `γ ∈ (0, 1]` by shooting from the front along the
/// separatrix, with front at 0 and samples up to `|ξ| = xi_max`.
pub fn tw_profile<T: Real>(gamma: T, c: T, sign: Sign, xi_max: T, tol: T) -> Result<WaveProfile<T>> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(domain("gamma", gamma.f64(), "(0, 1]"));
    }
    if !(xi_max > T::zero()) {
        return Err(domain("xi_max", xi_max.f64(), "(0, inf)"));
    }
    if sign == Sign::Minus {
        return Ok(tw_profile(gamma, -c, Sign::Plus, xi_max, tol)?.mirrored());
    }
    let beta = beta_of_gamma(gamma)?;
    let one = T::one();
    let (v0, v1, v2) = separatrix_coeffs(gamma, beta, c, Sign::Plus);
    let h0 = T::lit(TW_START_OFFSET).min(xi_max * T::lit(1e-3));
    let w0 = v0 * h0 + T::lit(0.5) * v1 * v0 * h0 * h0 + (v1 * v1 * v0 + T::lit(2.0) * v2 * v0 * v0) * h0 * h0 * h0 / T::lit(6.0);
    let y0 = [w0, v0 + v1 * w0 + v2 * w0 * w0];
    let mut opts = OdeOptions::with_tol(tol);
    opts.max_steps = 500_000;
    opts.blowup_cap = T::max_value().powf(T::lit(0.5) / beta);
    let zero_event = |_: T, y: &[T; 2]| y[0];
    let events: [&dyn Fn(T, &[T; 2]) -> T; 1] = [&zero_event];
    let sol = integrate(|_, y: &[T; 2]| tw_rhs(gamma, beta, c, y), h0, y0, xi_max, &opts, &events)?;
    let xi_end = match sol.termination {
        Termination::Reached | Termination::BlowUp { .. } => sol.x_end(),
        Termination::Event { x, .. } => {
            return Err(Error::Integration(format!("profile reached zero at xi = {x}")));
        }
    };
    let to_phi = |y: [T; 2]| (y[0].powf(beta), beta * y[0].powf(beta - one) * y[1]);
    let mut p = WaveProfile {
        gamma,
        c,
        sign: Sign::Plus,
        offset: T::zero(),
        xi: vec![T::zero()],
        phi: vec![T::zero()],
        dphi: vec![if beta == one { v0 } else { T::zero() }],
        max_residual: T::zero(),
    };
    let mut pts = sol.nodes();
    for h in support_offsets(xi_max) {
        if h > h0 && h < xi_end {
            if let Some(y) = sol.eval(h) {
                pts.push((h, y));
            }
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    for (x, y) in pts {
        if p.xi.last().is_some_and(|&l| x <= l) {
            continue;
        }
        let (v, d) = to_phi(y);
        p.xi.push(x);
        p.phi.push(v);
        p.dphi.push(d);
    }
    for st in &sol.steps {
        let x = (st.x0 + st.x1) * T::lit(0.5);
        if x < T::lit(1e-3).min(xi_max * T::lit(0.1)) {
            continue;
        }
        let y = st.eval(x);
        let dy = st.eval_derivative(x);
        let (w, v, dv) = (y[0], y[1], dy[1]);
        let (ph, dph) = to_phi(y);
        let d2 = beta * w.powf(beta - one) * dv + beta * (beta - one) * w.powf(beta - T::lit(2.0)) * v * v;
        p.max_residual = p.max_residual.max(tw_residual(gamma, c, ph, dph, d2));
    }
    p.check_invariants()?;
    Ok(p)
}

/// Closed form for `γ ∈ {0, 1}`, shooting otherwise.
pub fn admissible_profile<T: Real>(gamma: T, c: T, sign: Sign, xi_max: T) -> Result<WaveProfile<T>> {
    if gamma == T::zero() || gamma == T::one() {
        explicit_tw_profile(gamma, c, sign, xi_max)
    } else {
        tw_profile(gamma, c, sign, xi_max, T::lit(1e-12).max(T::epsilon() * T::lit(100.0)))
    }
}

/// Phase-plane field in `U = φ^{1/β}`, `V = U'`, with `dτ = dξ/U`:
/// `(U̇, V̇) = (UV, (βγ/2)(2/β² − νUV − V²))`, `ν = 2c/(βγ)`.
pub fn phase_plane_field<T: Real>(u: T, v: T, gamma: T, c: T) -> Result<(T, T)> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(domain("gamma", gamma.f64(), "(0, 1]"));
    }
    let beta = beta_of_gamma(gamma)?;
    let k = beta * gamma * T::lit(0.5);
    let nu = c / k;
    Ok((u * v, k * (T::lit(2.0) / (beta * beta) - nu * u * v - v * v)))
}

/// A separatrix `V^±(U)` sampled in `x = ln U` with `dV/dx`.
#[derive(Clone, Debug)]
pub struct Separatrix<T> {
    pub gamma: T,
    pub c: T,
    pub sign: Sign,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub dv_dlnu: Vec<T>,
}

impl<T: Real> Separatrix<T> {
    /// `V(U)` by cubic Hermite interpolation in `ln U`.
    pub fn eval(&self, u: T) -> Option<T> {
        let n = self.u.len();
        if n < 2 || u < self.u[0] || u > self.u[n - 1] {
            return None;
        }
        let i = self.u.partition_point(|&x| x < u).max(1);
        let (x0, x1) = (self.u[i - 1].ln(), self.u[i].ln());
        let h = x1 - x0;
        let t = (u.ln() - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        Some(
            (two * t3 - three * t2 + T::one()) * self.v[i - 1]
                + (t3 - two * t2 + t) * h * self.dv_dlnu[i - 1]
                + (three * t2 - two * t3) * self.v[i]
                + (t3 - t2) * h * self.dv_dlnu[i],
        )
    }
}

/// Integrates the separatrix leaving `P^{sign}` up to `U = u_max` (`c ≠ 0`).
/// For `c < 0` the portrait is the `c > 0` one reflected through `V = 0`.
pub fn separatrix<T: Real>(gamma: T, c: T, sign: Sign, u_max: T) -> Result<Separatrix<T>> {
    if c == T::zero() {
        return Err(Error::Precondition("c = 0 has the explicit first integral instead".into()));
    }
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(domain("gamma", gamma.f64(), "(0, 1]"));
    }
    let u0 = T::lit(SEPARATRIX_STEP_OFF);
    if !(u_max > u0) {
        return Err(domain("u_max", u_max.f64(), "(1e-6, inf)"));
    }
    if c < T::zero() {
        let mut s = separatrix(gamma, -c, sign.flip(), u_max)?;
        s.c = c;
        s.sign = sign;
        s.v.iter_mut().for_each(|v| *v = -*v);
        s.dv_dlnu.iter_mut().for_each(|v| *v = -*v);
        return Ok(s);
    }
    let beta = beta_of_gamma(gamma)?;
    let k = beta * gamma * T::lit(0.5);
    let nu = c / k;
    let (v0, v1, v2) = separatrix_coeffs(gamma, beta, c, sign);
    let a = T::lit(2.0) / (beta * beta);
    let field = move |x: T, v: T| k * (a / v - nu * x.exp() - v);
    // The separatrix attracts its neighbours at a rate growing like U², so an
    // L-stable implicit scheme is used.
    let nodes = integrate_stiff_scalar(
        field,
        move |_, v: T| -k * (a / (v * v) + T::one()),
        u0.ln(),
        v0 + v1 * u0 + v2 * u0 * u0,
        u_max.ln(),
        T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
        1_000_000,
    )?;
    let mut out = Separatrix {
        gamma,
        c,
        sign,
        u: Vec::new(),
        v: Vec::new(),
        dv_dlnu: Vec::new(),
    };
    for (x, y) in nodes {
        let y = [y];
        let d = field(x, y[0]);
        // For c > 0 both separatrices are decreasing in U.
        if d > T::lit(1e-9) * (T::one() + y[0].abs()) {
            return Err(Error::Integration(format!("wrong branch: V increasing at U = {}", x.exp())));
        }
        if (y[0] > T::zero()) != (sign == Sign::Plus) {
            return Err(Error::Integration(format!("wrong branch: V changed sign at U = {}", x.exp())));
        }
        out.u.push(if x == u_max.ln() { u_max } else { x.exp() });
        out.v.push(y[0]);
        out.dv_dlnu.push(d);
    }
    Ok(out)
}

/// Branch of the `c = 0` first integral `V² = 2/β² ± kU^{−βγ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum C0Branch {
    MinusK,
    PlusK,
}

/// `V² = 2/β² ± kU^{−βγ}` for `c = 0`.
pub fn c0_first_integral<T: Real>(gamma: T, branch: C0Branch, k: T, u: T) -> Result<T> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(domain("gamma", gamma.f64(), "(0, 1]"));
    }
    if !(k > T::zero()) {
        return Err(domain("k", k.f64(), "(0, inf)"));
    }
    if !(u > T::zero()) {
        return Err(domain("U", u.f64(), "(0, inf)"));
    }
    let beta = beta_of_gamma(gamma)?;
    let base = T::lit(2.0) / (beta * beta);
    let t = k * u.powf(-beta * gamma);
    match branch {
        C0Branch::PlusK => Ok(base + t),
        C0Branch::MinusK => {
            let v = base - t;
            if v < T::zero() {
                let cutoff = (k * beta * beta * T::lit(0.5)).powf(T::one() / (beta * gamma));
                return Err(Error::Precondition(format!("V^2 < 0 for U = {u} below the cutoff {cutoff}")));
            }
            Ok(v)
        }
    }
}

/// The non-admissible `c = 0` profile on the `+k` branch, vanishing linearly at `ξ = 0`.
pub fn c0_linear_profile<T: Real>(gamma: T, k: T, xi_max: T) -> Result<WaveProfile<T>> {
    let beta = beta_of_gamma(gamma)?;
    let speed = |u: T| c0_first_integral(gamma, C0Branch::PlusK, k, u).map(|v2| v2.sqrt());
    let u_end = T::lit(2.0) * T::lit(2.0).sqrt() * xi_max / beta + T::one();
    let mut grid: Vec<T> = (0..=48).map(|i| T::lit(10f64.powf(-12.0 + i as f64 / 4.0))).collect();
    grid.retain(|&u| u < u_end);
    let m = 200;
    for i in 1..=m {
        grid.push(u_end * T::from_usize_lossy(i) / T::from_usize_lossy(m));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    grid.dedup();
    let tol = T::epsilon() * T::lit(100.0);
    let mut p = WaveProfile {
        gamma,
        c: T::zero(),
        sign: Sign::Plus,
        offset: T::zero(),
        xi: vec![T::zero()],
        phi: vec![T::zero()],
        dphi: vec![T::zero()],
        max_residual: T::zero(),
    };
    let inv = |u: T| speed(u).map(|v| T::one() / v).unwrap_or_else(|_| T::nan());
    let mut xi = gauss_kronrod(inv, T::zero(), grid[0], T::zero(), tol)?;
    let mut prev = grid[0];
    for &u in &grid {
        xi = xi + gauss_kronrod(inv, prev, u, T::zero(), tol)?;
        prev = u;
        let v = speed(u)?;
        p.xi.push(xi);
        p.phi.push(u.powf(beta));
        p.dphi.push(beta * u.powf(beta - T::one()) * v);
        if xi >= xi_max {
            break;
        }
    }
    Ok(p)
}

/// `| |(φ^{1/β})'| − √2/β |` at the front, extrapolated linearly from the two
/// samples closest to it.
pub fn fb_slope_check<T: Real>(profile: &WaveProfile<T>) -> Result<T> {
    let beta = beta_of_gamma(profile.gamma)?;
    let mut near: Vec<(T, T)> = profile
        .xi
        .iter()
        .zip(profile.phi.iter().zip(&profile.dphi))
        .filter(|(_, (&p, _))| p > T::zero())
        .map(|(&x, (&p, &d))| ((x - profile.offset).abs(), p.powf(T::one() / beta - T::one()) * d.abs() / beta))
        .collect();
    near.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    if near.len() < 2 {
        return Err(Error::Precondition("profile has no samples next to its front".into()));
    }
    let ((h1, s1), (h2, s2)) = (near[0], near[1]);
    let s0 = (h2 * s1 - h1 * s2) / (h2 - h1);
    Ok((s0 - T::lit(2.0).sqrt() / beta).abs())
}

/// `ψ_c(ξ) = a φ_c^+(ξ − ξ₊) + b φ_c^−(ξ − ξ₋)` with `ξ₋ ≤ ξ₊`.
#[derive(Clone, Debug)]
pub struct ComposedProfile<T> {
    pub plus: Option<WaveProfile<T>>,
    pub minus: Option<WaveProfile<T>>,
}

impl<T: Real> ComposedProfile<T> {
    /// `(ψ, ψ')` at `xi`, `None` outside the sampled range of a component.
    pub fn eval(&self, xi: T) -> Option<(T, T)> {
        let mut acc = (T::zero(), T::zero());
        for p in [&self.plus, &self.minus].into_iter().flatten() {
            let (v, d) = p.eval(xi)?;
            acc = (acc.0 + v, acc.1 + d);
        }
        Some(acc)
    }
}

/// Builds the composed profile; components are sampled up to `xi_max` from their fronts.
pub fn compose_profiles<T: Real>(a: bool, b: bool, xi_plus: T, xi_minus: T, gamma: T, c: T, xi_max: T) -> Result<ComposedProfile<T>> {
    if !a && !b {
        return Err(Error::Precondition("a² + b² must be nonzero".into()));
    }
    if xi_minus > xi_plus {
        return Err(Error::Precondition(format!("xi_minus = {xi_minus} > xi_plus = {xi_plus}")));
    }
    let plus = if a {
        Some(admissible_profile(gamma, c, Sign::Plus, xi_max)?.shifted(xi_plus))
    } else {
        None
    };
    let minus = if b {
        Some(admissible_profile(gamma, c, Sign::Minus, xi_max)?.shifted(xi_minus))
    } else {
        None
    };
    Ok(ComposedProfile { plus, minus })
}

/// Two fronts `φ_{c2}^−(x − c2 t − ξ2) + φ_{c1}^+(x − c1 t − ξ1)` moving towards each other.
#[derive(Clone, Debug)]
pub struct CollisionScene<T> {
    pub gamma: T,
    pub c1: T,
    pub c2: T,
    pub xi1: T,
    pub xi2: T,
    pub t_star: T,
    pub x_star: T,
    pub opening: T,
    plus: WaveProfile<T>,
    minus: WaveProfile<T>,
}

impl<T: Real> CollisionScene<T> {
    /// `u(x, t)` for `t < t⋆`.
    pub fn u(&self, x: T, t: T) -> Result<T> {
        if !(t < self.t_star) {
            return Err(domain("t", t.f64(), "(-inf, t_star)"));
        }
        let a = self
            .minus
            .eval(x - self.c2 * t - self.xi2)
            .ok_or_else(|| Error::Precondition(format!("x = {x} outside the sampled profile")))?;
        let b = self
            .plus
            .eval(x - self.c1 * t - self.xi1)
            .ok_or_else(|| Error::Precondition(format!("x = {x} outside the sampled profile")))?;
        Ok(a.0 + b.0)
    }

    /// The two free-boundary points `(ξ2 + c2 t, ξ1 + c1 t)` at time `t < t⋆`.
    pub fn fb_points(&self, t: T) -> Result<(T, T)> {
        if !(t < self.t_star) {
            return Err(domain("t", t.f64(), "(-inf, t_star)"));
        }
        Ok((self.xi2 + self.c2 * t, self.xi1 + self.c1 * t))
    }

    /// Largest `|x − x⋆|` covered by the sampled profiles at every `t ∈ [t⋆ − 1, t⋆)`.
    pub fn reach(&self) -> T {
        let a = self.minus.xi.first().map(|x| -*x).unwrap_or(T::zero());
        let b = self.plus.xi.last().copied().unwrap_or(T::zero());
        a.min(b) - self.c2.abs().max(self.c1.abs())
    }
}

/// Builds the colliding-wave scene; profiles are sampled up to `|ξ| = xi_max`.
pub fn colliding_tw<T: Real>(gamma: T, c1: T, c2: T, xi1: T, xi2: T, xi_max: T) -> Result<CollisionScene<T>> {
    if !(c1 < T::zero() && c2 > T::zero()) {
        return Err(Error::Precondition(format!("need c1 < 0 < c2, got c1 = {c1}, c2 = {c2}")));
    }
    if !(xi2 < xi1) {
        return Err(Error::Precondition(format!("need xi2 < xi1, got xi2 = {xi2}, xi1 = {xi1}")));
    }
    let dc = c2 - c1;
    let opening = T::PI() - (T::one() / c1).atan().abs() - (T::one() / c2).atan().abs();
    Ok(CollisionScene {
        gamma,
        c1,
        c2,
        xi1,
        xi2,
        t_star: (xi1 - xi2) / dc,
        x_star: (xi1 * c2 - xi2 * c1) / dc,
        opening,
        plus: admissible_profile(gamma, c1, Sign::Plus, xi_max)?,
        minus: admissible_profile(gamma, c2, Sign::Minus, xi_max)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn closed_forms() {
        assert_relative_eq!(explicit_tw(0.0, 0.0, Sign::Plus, 2.0).unwrap(), 2.0 * SQRT_2);
        assert_relative_eq!(explicit_tw(1.0, 0.0, Sign::Plus, 3.0).unwrap(), 4.5);
        assert_relative_eq!(
            explicit_tw(0.0, 2.0, Sign::Plus, 1.0).unwrap(),
            SQRT_2 / 2.0 * (1.0 - (-2f64).exp()),
            max_relative = 1e-15
        );
        assert_relative_eq!(explicit_tw(0.0, -1.5, Sign::Plus, 1.0).unwrap(), SQRT_2 / 1.5 * (1.5f64.exp() - 1.0), max_relative = 1e-15);
        assert_relative_eq!(explicit_tw(0.0, 2.0, Sign::Minus, -1.0).unwrap(), SQRT_2 / 2.0 * (2f64.exp() - 1.0), max_relative = 1e-15);
        assert_relative_eq!(explicit_tw(0.0, 0.0, Sign::Minus, -2.0).unwrap(), 2.0 * SQRT_2);
        assert_relative_eq!(explicit_tw(1.0, 1.0, Sign::Plus, 2.0).unwrap(), (-2f64).exp() + 1.0, max_relative = 1e-15);
        assert_eq!(explicit_tw(1.0, 1.0, Sign::Plus, -2.0).unwrap(), 0.0);
        assert_eq!(explicit_tw(0.0, 1.0, Sign::Minus, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn small_c_series_is_continuous() {
        for &xi in &[0.5, 2.0] {
            let a: f64 = explicit_tw(1.0, 1e-7, Sign::Plus, xi).unwrap();
            let b = explicit_tw(1.0, 0.0, Sign::Plus, xi).unwrap();
            assert!((a - b).abs() < 1e-7 * b);
            let ser: f64 = phi1_ratio(0.99999999e-4);
            let direct = phi1_ratio(1.00000001e-4);
            assert!((ser - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn shooting_matches_gamma1() {
        for &c in &[1.0, -1.0, 0.0, 0.3] {
            let p = tw_profile(1.0, c, Sign::Plus, 5.0, 1e-12).unwrap();
            for (i, &x) in p.xi.iter().enumerate().skip(1) {
                let e: f64 = explicit_tw(1.0, c, Sign::Plus, x).unwrap();
                assert!((p.phi[i] - e).abs() <= 1e-8 * e, "c={c} xi={x}: {} vs {e}", p.phi[i]);
            }
            assert!(p.max_residual < 1e-7);
            assert!(fb_slope_check(&p).unwrap() < 1e-6);
        }
        let p = tw_profile(1.0, 1.0, Sign::Plus, 5.0, 1e-12).unwrap();
        let (v, _) = p.eval(2.0).unwrap();
        assert_relative_eq!(v, (-2f64).exp() + 1.0, max_relative = 1e-8);
    }

    #[test]
    fn stationary_wave_is_power() {
        let gamma = 0.5;
        let beta: f64 = 4.0 / 3.0;
        let cb = (2.0 / (beta * beta)).powf(beta / 2.0);
        let p = tw_profile::<f64>(gamma, 0.0, Sign::Plus, 5.0, 1e-12).unwrap();
        for (i, &x) in p.xi.iter().enumerate().skip(1) {
            assert_relative_eq!(p.phi[i], cb * x.powf(beta), max_relative = 1e-9);
        }
    }

    #[test]
    fn far_field_growth_for_positive_speed() {
        let gamma = 0.5;
        let beta: f64 = 4.0 / 3.0;
        let p = tw_profile(gamma, 1.0, Sign::Plus, 1000.0, 1e-10).unwrap();
        let (v, _) = p.eval(1000.0).unwrap();
        let target = (2.0 * gamma / beta).powf(beta / 2.0);
        assert!((v / 1000f64.powf(beta / 2.0) / target - 1.0).abs() < 0.02);
    }

    #[test]
    fn mirror_symmetry() {
        let a = tw_profile(0.5, 0.7, Sign::Minus, 4.0, 1e-12).unwrap();
        let b = tw_profile(0.5, -0.7, Sign::Plus, 4.0, 1e-12).unwrap();
        assert_eq!(a.xi.len(), b.xi.len());
        for i in 0..a.xi.len() {
            let j = a.xi.len() - 1 - i;
            assert_eq!(a.xi[i], -b.xi[j]);
            assert_eq!(a.phi[i], b.phi[j]);
        }
        assert!(fb_slope_check(&a).unwrap() < 1e-6);
    }

    #[test]
    fn phase_plane_critical_points_and_isocline() {
        for &gamma in &[0.25, 0.5, 1.0] {
            let beta: f64 = 2.0 / (2.0 - gamma);
            for &s in &[1.0, -1.0] {
                let (du, dv) = phase_plane_field(0.0, s * SQRT_2 / beta, gamma, 0.8).unwrap();
                assert_eq!(du, 0.0);
                assert!(dv.abs() < 1e-15);
            }
            let nu = 2.0 * 0.8 / (beta * gamma);
            let u = 1.3;
            let v = (-nu * u + (nu * nu * u * u + 8.0 / (beta * beta)).sqrt()) / 2.0;
            assert!(phase_plane_field(u, v, gamma, 0.8).unwrap().1.abs() < 1e-14);
            let (_, dv) = phase_plane_field(1.0, 0.1, gamma, 0.0).unwrap();
            assert!(dv > 0.0);
        }
    }

    #[test]
    fn separatrix_far_field() {
        let gamma = 0.5;
        let beta = 4.0 / 3.0;
        let c: f64 = 1.0;
        let nu = 2.0 * c / (beta * gamma);
        let s = separatrix(gamma, c, Sign::Plus, 1e3).unwrap();
        let v = s.eval(1e3).unwrap();
        let target = 2.0 / (beta * beta * nu);
        assert!((1e3 * v / target - 1.0).abs() < 0.01, "U V = {}", 1e3 * v);
        assert!(s.v.windows(2).all(|w| w[1] <= w[0] && w[1] > 0.0));
        let m = separatrix(gamma, c, Sign::Minus, 1e3).unwrap();
        assert!(m.v.windows(2).all(|w| w[1] <= w[0] && w[1] < 0.0));
        let r = separatrix(gamma, -c, Sign::Minus, 1e3).unwrap();
        assert_eq!(r.v[5], -s.v[5]);
    }

    #[test]
    fn profile_lies_on_separatrix() {
        let gamma = 0.5;
        let beta: f64 = 4.0 / 3.0;
        let p = tw_profile::<f64>(gamma, 1.0, Sign::Plus, 20.0, 1e-12).unwrap();
        let s = separatrix(gamma, 1.0, Sign::Plus, 1e3).unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..p.xi.len() {
            let u = p.phi[i].powf(1.0 / beta);
            if u < 2e-6 {
                continue;
            }
            let v = p.dphi[i] / (beta * p.phi[i].powf(1.0 - 1.0 / beta));
            worst = worst.max((v - s.eval(u).unwrap()).abs());
        }
        assert!(worst < 1e-5, "worst {worst}");
    }

    #[test]
    fn first_integral() {
        let gamma = 0.5;
        let beta: f64 = 4.0 / 3.0;
        assert_relative_eq!(c0_first_integral(gamma, C0Branch::PlusK, 1e-14, 1.0).unwrap(), 2.0 / (beta * beta), max_relative = 1e-12);
        assert!(c0_first_integral(gamma, C0Branch::MinusK, 1.0, 0.1).is_err());
        let bg = beta * gamma;
        for &u in &[0.5, 1.0, 3.0] {
            let k = 0.7;
            let v2 = c0_first_integral(gamma, C0Branch::PlusK, k, u).unwrap();
            let d_formula = -bg * k * u.powf(-bg - 1.0);
            let v = v2.sqrt();
            let (du, dv) = phase_plane_field(u, v, gamma, 0.0).unwrap();
            assert!((d_formula - 2.0 * v * dv / du).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_vanishing_profile_fails_fb_law() {
        let p = c0_linear_profile(0.5, 1.0, 2.0).unwrap();
        assert!(fb_slope_check(&p).unwrap() > 1.0);
        for &g in &[0.0, 1.0] {
            for &c in &[-1.0, 0.0, 2.0] {
                for sign in [Sign::Plus, Sign::Minus] {
                    let p = explicit_tw_profile(g, c, sign, 3.0).unwrap();
                    assert!(fb_slope_check(&p).unwrap() < 1e-8, "g={g} c={c}");
                    assert!(p.max_residual < 1e-7);
                }
            }
        }
    }

    #[test]
    fn composition_and_collision() {
        let comp = compose_profiles(true, true, 1.0, -1.0, 0.5, 0.5, 5.0).unwrap();
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            assert_eq!(comp.eval(x).unwrap().0, 0.0);
        }
        assert!(comp.eval(1.5).unwrap().0 > 0.0 && comp.eval(-1.5).unwrap().0 > 0.0);
        assert!(compose_profiles(false, false, 0.0, 0.0, 0.5, 0.5, 1.0).is_err());
        assert!(compose_profiles(true, true, 0.0, 1.0, 0.5, 0.5, 1.0).is_err());

        let scene = colliding_tw(0.5, -1.0, 1.0, 1.0, -1.0, 10.0).unwrap();
        assert_eq!(scene.t_star, 1.0);
        assert_eq!(scene.x_star, 0.0);
        assert!((scene.opening - FRAC_PI_2).abs() < 1e-15);
        let (l, r) = scene.fb_points(0.5).unwrap();
        assert_eq!((l, r), (-0.5, 0.5));
        assert_eq!(scene.u(0.0, 0.5).unwrap(), 0.0);
        assert!(scene.u(0.7, 0.5).unwrap() > 0.0);
        assert!(scene.u(0.0, 1.0).is_err());
    }
}
