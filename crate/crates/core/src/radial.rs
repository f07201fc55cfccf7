//! Radial second-order ODEs `U'' + ((n−1)/r + drift·r/2)U' + zeroth·U = rhs(U)`
//! and the two power-growth barrier estimates.

use crate::error::{domain, Error, Result};
use crate::integrator::{integrate, OdeOptions, OdeSolution, Termination};
use crate::num::Real;

/// Regular-center series switch radius.
pub const R_SWITCH: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialMeta<T> {
    pub gamma: Option<T>,
    pub n: usize,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialStop<T> {
    Reached,
    Zero { r: T },
    BlowUp { r: T },
}

/// Sampled radial solution with first derivatives.
#[derive(Clone, Debug)]
pub struct RadialProfile<T> {
    pub r: Vec<T>,
    pub u: Vec<T>,
    pub du: Vec<T>,
    /// Radius where the profile meets zero, or `0` if it does not.
    pub fb_radius: T,
    pub meta: RadialMeta<T>,
    pub stop: RadialStop<T>,
}

impl<T: Real> RadialProfile<T> {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> T {
        *self.r.last().unwrap_or(&T::nan())
    }

    /// Cubic Hermite interpolation of `(U, U')`; `None` outside the sampled range.
    pub fn eval(&self, r: T) -> Option<(T, T)> {
        let n = self.r.len();
        if n == 0 || r < self.r[0] || r > self.r[n - 1] {
            return None;
        }
        let i = self.r.partition_point(|&x| x < r);
        if i == 0 {
            return Some((self.u[0], self.du[0]));
        }
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (u0, u1, d0, d1) = (self.u[i - 1], self.u[i], self.du[i - 1] * h, self.du[i] * h);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let u = h00 * u0 + h10 * d0 + h01 * u1 + h11 * d1;
        let du = ((T::lit(6.0) * t2 - T::lit(6.0) * t) * (u0 - u1)
            + (three * t2 - T::lit(4.0) * t + T::one()) * d0
            + (three * t2 - two * t) * d1)
            / h;
        Some((u, du))
    }

    /// Checks strictly increasing radii and nonnegative values (within `tol`).
    pub fn check_invariants(&self, tol: T) -> Result<()> {
        if self.r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("radii are not strictly increasing".into()));
        }
        if let Some(i) = self.u.iter().position(|&u| u < -tol) {
            return Err(Error::Precondition(format!("U({}) = {} < 0", self.r[i], self.u[i])));
        }
        Ok(())
    }
}

/// Coefficients of the radial operator.
#[derive(Clone, Copy, Debug)]
pub struct RadialOde<T, F> {
    pub n: usize,
    /// Coefficient of `(r/2) U'`: `+1` forward, `−1` backward, `0` for the plain Laplacian.
    pub drift: T,
    pub zeroth: T,
    pub rhs: F,
}

/// Optional outputs and events of [`integrate_radial`].
#[derive(Clone, Debug)]
pub struct RadialOptions<T> {
    pub tol: T,
    /// Extra radii at which dense output is recorded.
    pub sample_radii: Vec<T>,
    /// Stop when `U` crosses zero.
    pub stop_at_zero: bool,
    pub blowup_cap: T,
    pub meta: RadialMeta<T>,
}

impl<T: Real> RadialOptions<T> {
    pub fn new(tol: T, n: usize) -> Self {
        Self {
            tol,
            sample_radii: Vec::new(),
            stop_at_zero: true,
            blowup_cap: T::lit(1e12),
            meta: RadialMeta {
                gamma: None,
                n,
                direction: Direction::Forward,
            },
        }
    }
}

impl<T: Real, F: Fn(T) -> T> RadialOde<T, F> {
    fn second_derivative(&self, r: T, u: T, du: T) -> T {
        let n1 = T::from_usize_lossy(self.n - 1);
        (self.rhs)(u) - self.zeroth * u - (n1 / r + self.drift * r / T::lit(2.0)) * du
    }
}

/// Integrates the radial ODE from `init = (r0, u0, du0)` to `r_end`.
///
/// `r0 = 0` requires `du0 = 0` and uses the regular-center series on `[0, R_SWITCH]`.
pub fn integrate_radial<T, F>(
    ode: &RadialOde<T, F>,
    init: (T, T, T),
    r_end: T,
    opts: &RadialOptions<T>,
) -> Result<RadialProfile<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if ode.n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    if !(opts.tol > T::lit(1e-14) && opts.tol < T::lit(1e-4)) {
        return Err(domain("tol", opts.tol.f64(), "(1e-14, 1e-4)"));
    }
    let (r0, u0, du0) = init;
    if r0 < T::zero() || r_end <= r0 {
        return Err(Error::Precondition(format!("need 0 <= r0 < r_end, got r0 = {r0}, r_end = {r_end}")));
    }
    let mut r = Vec::new();
    let mut u = Vec::new();
    let mut du = Vec::new();
    let (start, ustart, dustart) = if r0 == T::zero() {
        if du0 != T::zero() {
            return Err(Error::Precondition("regular center needs du0 = 0".into()));
        }
        let rs = T::lit(R_SWITCH).min(r_end * T::lit(0.5));
        let c = ((ode.rhs)(u0) - ode.zeroth * u0) / T::from_usize_lossy(2 * ode.n);
        r.push(T::zero());
        u.push(u0);
        du.push(T::zero());
        (rs, u0 + c * rs * rs, T::lit(2.0) * c * rs)
    } else {
        (r0, u0, du0)
    };

    let mut ode_opts = OdeOptions::with_tol(opts.tol);
    ode_opts.blowup_cap = opts.blowup_cap;
    let zero_event = |_: T, y: &[T; 2]| y[0];
    let events: Vec<&dyn Fn(T, &[T; 2]) -> T> = if opts.stop_at_zero && ustart > T::zero() {
        vec![&zero_event]
    } else {
        Vec::new()
    };
    let sol = integrate(
        |x, y: &[T; 2]| [y[1], ode.second_derivative(x, y[0], y[1])],
        start,
        [ustart, dustart],
        r_end,
        &ode_opts,
        &events,
    )?;
    let stop = match sol.termination {
        Termination::Reached => RadialStop::Reached,
        Termination::Event { x, .. } => RadialStop::Zero { r: x },
        Termination::BlowUp { x } => RadialStop::BlowUp { r: x },
    };
    append_samples(&sol, &opts.sample_radii, &mut r, &mut u, &mut du);
    if let RadialStop::Zero { r: rz } = stop {
        if let Some(last) = u.last_mut() {
            if *r.last().unwrap() == rz {
                *last = T::zero();
            }
        }
    }
    let fb_radius = match stop {
        RadialStop::Zero { r } => r,
        _ => T::zero(),
    };
    Ok(RadialProfile {
        r,
        u,
        du,
        fb_radius,
        meta: opts.meta,
        stop,
    })
}

/// Merges step nodes and requested radii (inside the covered range) into the sample vectors.
pub(crate) fn append_samples<T: Real>(
    sol: &OdeSolution<T, 2>,
    extra: &[T],
    r: &mut Vec<T>,
    u: &mut Vec<T>,
    du: &mut Vec<T>,
) {
    let mut pts: Vec<(T, [T; 2])> = sol.nodes();
    let (lo, hi) = (sol.x_start(), sol.x_end());
    for &x in extra {
        if x > lo && x < hi {
            if let Some(y) = sol.eval(x) {
                pts.push((x, y));
            }
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    for (x, y) in pts {
        if r.last().is_some_and(|&last| x <= last) {
            continue;
        }
        r.push(x);
        u.push(y[0]);
        du.push(y[1]);
    }
}

/// `c_{n,k}` from iterating the integrated inequality: `c_{n,0} = 1`,
/// `c_{n,k+1} = c_{n,k} / ((2k+2)(2k+n))`.
pub fn c_nk<T: Real>(n: usize, k: usize) -> T {
    let mut c = T::one();
    for i in 0..k {
        c = c / T::from_usize_lossy((2 * i + 2) * (2 * i + n));
    }
    c
}

#[derive(Clone, Debug)]
pub struct PowerBoundReport<T> {
    pub holds: bool,
    pub c_nk: T,
    /// Smallest `φ(r) / (c_{n,k} λ^k r^{2k})` over the samples.
    pub min_ratio: T,
    pub first_failure: Option<T>,
    pub increasing: bool,
    /// Radius at which `φ` hit the overflow cap, if before `R`.
    pub blowup: Option<T>,
    pub samples: usize,
}

/// Checks `φ(r) ≥ c_{n,k} λ^k r^{2k}` on `(0, R)` for `r^{1−n}(r^{n−1}φ')' = λφ^α`, `φ(0)=1`, `φ'(0)=0`.
pub fn verify_power_lower_bound<T: Real>(lambda: T, alpha: T, n: usize, big_r: T, k: usize) -> Result<PowerBoundReport<T>> {
    if !(lambda > T::zero()) {
        return Err(domain("lambda", lambda.f64(), "(0, inf)"));
    }
    if !(alpha > T::one()) {
        return Err(domain("alpha", alpha.f64(), "(1, inf)"));
    }
    let ode = RadialOde {
        n,
        drift: T::zero(),
        zeroth: T::zero(),
        rhs: |p: T| lambda * p.max(T::zero()).powf(alpha),
    };
    let mut opts = RadialOptions::new(T::lit(1e-11), n);
    opts.stop_at_zero = false;
    opts.sample_radii = (1..=200).map(|i| big_r * T::from_usize_lossy(i) / T::lit(201.0)).collect();
    let prof = integrate_radial(&ode, (T::zero(), T::one(), T::zero()), big_r, &opts)?;
    let c = c_nk::<T>(n, k);
    let lam_k = lambda.powi(k as i32);
    let mut min_ratio = T::infinity();
    let mut first_failure = None;
    for (&r, &p) in prof.r.iter().zip(&prof.u) {
        if r <= T::zero() {
            continue;
        }
        let bound = c * lam_k * r.powi(2 * k as i32);
        let ratio = p / bound;
        min_ratio = min_ratio.min(ratio);
        if p < bound && first_failure.is_none() {
            first_failure = Some(r);
        }
    }
    let increasing = prof.du.iter().skip(1).all(|&d| d > T::zero());
    let blowup = match prof.stop {
        RadialStop::BlowUp { r } => Some(r),
        _ => None,
    };
    Ok(PowerBoundReport {
        holds: first_failure.is_none(),
        c_nk: c,
        min_ratio,
        first_failure,
        increasing,
        blowup,
        samples: prof.len(),
    })
}

#[derive(Clone, Debug)]
pub struct GrowthReport<T> {
    pub j: usize,
    pub theta: T,
    pub omega_star: T,
    pub r_star: T,
    /// `(ω⋆δ)^{1/γ} φ(R⋆) / δ`, a lower bound if `φ` blew up before `R⋆`.
    pub ratio: T,
    pub blowup: Option<T>,
    pub holds: bool,
}

/// Checks `(ω⋆δ)^{1/γ} φ(R⋆) ≥ δ` for `r^{1−n}(r^{n−1}φ')' = (cω⋆/δ)φ^{1+γ}`, `φ(0)=1`.
pub fn verify_growth_threshold<T: Real>(gamma: T, delta: T, c: T, n: usize) -> Result<GrowthReport<T>> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(domain("gamma", gamma.f64(), "(0, 1]"));
    }
    if !(delta > T::zero() && delta <= T::one()) {
        return Err(domain("delta", delta.f64(), "(0, 1]"));
    }
    if !(c > T::zero()) {
        return Err(domain("c", c.f64(), "(0, inf)"));
    }
    let inv = T::one() / gamma;
    let j = inv.ceil().to_usize().unwrap_or(1).max(1);
    let theta = T::from_usize_lossy(j) - inv;
    let one = T::one();
    let two = T::lit(2.0);
    let omega_star = delta.powf((one + theta) / (two * (theta + two / gamma)));
    let r_star = (delta.powf((one + theta) / two) / (c.powi(j as i32) * c_nk::<T>(n, j))).powf(one / T::from_usize_lossy(2 * j));
    let lambda = c * omega_star / delta;
    let ode = RadialOde {
        n,
        drift: T::zero(),
        zeroth: T::zero(),
        rhs: |p: T| lambda * p.max(T::zero()).powf(one + gamma),
    };
    let mut opts = RadialOptions::new(T::lit(1e-10), n);
    opts.stop_at_zero = false;
    let prof = integrate_radial(&ode, (T::zero(), one, T::zero()), r_star, &opts)?;
    let (phi_end, blowup) = match prof.stop {
        RadialStop::BlowUp { r } => (opts.blowup_cap, Some(r)),
        _ => (*prof.u.last().unwrap(), None),
    };
    let ratio = (omega_star * delta).powf(inv) * phi_end / delta;
    Ok(GrowthReport {
        j,
        theta,
        omega_star,
        r_star,
        ratio,
        blowup,
        holds: ratio >= one,
    })
}
