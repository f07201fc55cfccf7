//! Exponents, the regularized reaction family and the explicit homogeneous solutions.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::num::Real;
use crate::quadrature::gauss_kronrod;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `β = 2/(2−γ)`.
pub fn beta_of_gamma<T: Real>(gamma: T) -> Result<T> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(domain("gamma", gamma.f64(), "[0, 1]"));
    }
    Ok(T::lit(2.0) / (T::lit(2.0) - gamma))
}

/// A bump `h` supported in `[0, 1]` with unit mass, and its primitive `H`.
#[derive(Clone)]
pub struct MollifierSpec<T> {
    h: ScalarFn<T>,
    big_h: ScalarFn<T>,
    pub h_lipschitz: T,
    pub h_max: T,
}

impl<T: fmt::Debug> fmt::Debug for MollifierSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MollifierSpec")
            .field("h_lipschitz", &self.h_lipschitz)
            .field("h_max", &self.h_max)
            .finish_non_exhaustive()
    }
}

impl<T: Real> MollifierSpec<T> {
    /// Wraps a user-supplied pair. Values outside `[0, 1]` are handled here,
    /// so the closures only need to be correct on the unit interval.
    pub fn new<H, G>(h: H, big_h: G, h_lipschitz: T, h_max: T) -> Self
    where
        H: Fn(T) -> T + Send + Sync + 'static,
        G: Fn(T) -> T + Send + Sync + 'static,
    {
        Self {
            h: Arc::new(h),
            big_h: Arc::new(big_h),
            h_lipschitz,
            h_max,
        }
    }

    /// `h(v) = 12 v (1−v)²`, `H(v) = v²(6 − 8v + 3v²)`.
    pub fn polynomial() -> Self {
        Self::new(
            |v: T| T::lit(12.0) * v * (T::one() - v).powi(2),
            |v: T| v * v * (T::lit(6.0) - T::lit(8.0) * v + T::lit(3.0) * v * v),
            T::lit(12.0),
            T::lit(16.0 / 9.0),
        )
    }

    pub fn h(&self, v: T) -> T {
        if v <= T::zero() || v >= T::one() {
            T::zero()
        } else {
            (self.h)(v)
        }
    }

    pub fn big_h(&self, v: T) -> T {
        if v <= T::zero() {
            T::zero()
        } else if v >= T::one() {
            T::one()
        } else {
            (self.big_h)(v).max(T::zero()).min(T::one())
        }
    }

    /// Checks nonnegativity, `h'(0) > 0`, unit mass, and that `H` is a
    /// nondecreasing primitive of `h` with `H(0) = 0`, `H(1) = 1`.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Precondition(msg));
        let mass = gauss_kronrod(|v| self.h(v), T::zero(), T::one(), T::lit(1e-14), T::lit(1e-14))?;
        let mass_tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if (mass - T::one()).abs() > mass_tol {
            return fail(format!("mollifier mass {mass} differs from 1"));
        }
        let probe = T::lit(1e-6);
        if self.h(probe) <= T::zero() {
            return fail("mollifier has h'(0) <= 0".into());
        }
        let n = 512;
        let mut prev = self.big_h(T::zero());
        if prev != T::zero() {
            return fail("H(0) != 0".into());
        }
        for i in 1..=n {
            let v = T::from_usize_lossy(i) / T::from_usize_lossy(n);
            if self.h(v) < T::zero() {
                return fail(format!("h({v}) < 0"));
            }
            let cur = self.big_h(v);
            if cur < prev {
                return fail(format!("H decreases near {v}"));
            }
            prev = cur;
        }
        let h1 = (self.big_h)(T::one());
        if (h1 - T::one()).abs() > mass_tol {
            return fail(format!("H(1) = {h1}"));
        }
        Ok(())
    }
}

/// `γ`, `β` and the mollifier; immutable once built.
#[derive(Clone, Debug)]
pub struct ModelParams<T> {
    gamma: T,
    beta: T,
    mollifier: MollifierSpec<T>,
    lip_f1: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(gamma: T) -> Result<Self> {
        Self::with_mollifier(gamma, MollifierSpec::polynomial())
    }

    pub fn with_mollifier(gamma: T, mollifier: MollifierSpec<T>) -> Result<Self> {
        let beta = beta_of_gamma(gamma)?;
        let mut p = Self {
            gamma,
            beta,
            mollifier,
            lip_f1: T::zero(),
        };
        p.lip_f1 = p.estimate_lip_f1();
        Ok(p)
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn mollifier(&self) -> &MollifierSpec<T> {
        &self.mollifier
    }

    /// `c_β = (2/β²)^{β/2}`, the coefficient of the one-dimensional FB profile.
    pub fn c_beta(&self) -> T {
        (T::lit(2.0) / (self.beta * self.beta)).powf(self.beta / T::lit(2.0))
    }

    /// `√2/β`, the free-boundary slope of `u^{1/β}`.
    pub fn fb_slope(&self) -> T {
        T::SQRT_2() / self.beta
    }

    /// `u^γ` for `u > 0`.
    fn pow_gamma(&self, u: T) -> T {
        if self.gamma == T::one() {
            u
        } else if self.gamma == T::zero() {
            T::one()
        } else {
            u.powf(self.gamma)
        }
    }

    /// `γ u^{γ−1}` for `u > 0`, the derivative of `u^γ`.
    pub fn reaction_limit(&self, u: T) -> T {
        if u <= T::zero() || self.gamma == T::zero() {
            T::zero()
        } else if self.gamma == T::one() {
            T::one()
        } else {
            self.gamma * u.max(T::underflow_floor()).powf(self.gamma - T::one())
        }
    }

    fn scale(&self, eps: T) -> T {
        eps.powf(self.beta)
    }

    /// `h_ε(u) = ε^{−β} h(u/ε^β)`.
    pub fn h_eps(&self, u: T, eps: T) -> T {
        let s = self.scale(eps);
        self.mollifier.h(u / s) / s
    }

    /// `H_ε(u) = H(u/ε^β)`.
    pub fn big_h_eps(&self, u: T, eps: T) -> T {
        self.mollifier.big_h(u / self.scale(eps))
    }

    /// `f_ε = (F_ε)'`, the regularized reaction term.
    pub fn f_eps(&self, u: T, eps: T) -> T {
        self.f_eps_at_scale(u, self.scale(eps))
    }

    /// `f_ε` with the threshold `s = ε^β` precomputed.
    pub fn f_eps_at_scale(&self, u: T, s: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        if u >= s {
            return self.reaction_limit(u);
        }
        let v = u / s;
        let ug = self.pow_gamma(u);
        let limit = if self.gamma == T::zero() { T::zero() } else { self.gamma * ug / u };
        self.mollifier.h(v) / s * ug + self.mollifier.big_h(v) * limit
    }

    /// `F_ε(u) = H_ε(u) u₊^γ`.
    pub fn big_f_eps(&self, u: T, eps: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        self.big_h_eps(u, eps) * self.pow_gamma(u)
    }

    /// `u₊^γ`, the limit of `F_ε`.
    pub fn big_f_limit(&self, u: T) -> T {
        if u <= T::zero() {
            T::zero()
        } else {
            self.pow_gamma(u)
        }
    }

    /// Right-hand side of the equation satisfied by `u^{2−γ}`, given `|∇(u^{1/β})|²`.
    pub fn g_eps(&self, u: T, grad_root_sq: T, eps: T) -> T {
        let two = T::lit(2.0);
        let uu = u.max(T::zero());
        (two - self.gamma)
            * (self.h_eps(uu, eps) * uu
                + self.gamma * self.big_h_eps(uu, eps)
                + (T::one() - self.gamma) * self.beta * self.beta * grad_root_sq)
    }

    /// `γu/(ε + u^{2−γ})`.
    pub fn phillips_f(&self, u: T, eps: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        self.gamma * u / (eps + u.powf(T::lit(2.0) - self.gamma))
    }

    /// Lipschitz constant of `f_1`; `Lip(f_ε) = Lip(f_1)/ε²`.
    pub fn lip_f1(&self) -> T {
        self.lip_f1
    }

    pub fn lip_f_eps(&self, eps: T) -> T {
        self.lip_f1 / (eps * eps)
    }

    fn estimate_lip_f1(&self) -> T {
        let one = T::one();
        let n = 4000;
        let top = T::lit(2.0);
        let mut best = T::zero();
        let mut prev_u = T::zero();
        let mut prev_f = T::zero();
        for i in 1..=n {
            let u = top * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let f = self.f_eps(u, one);
            best = best.max(((f - prev_f) / (u - prev_u)).abs());
            prev_u = u;
            prev_f = f;
        }
        let beyond = self.gamma * (one - self.gamma);
        best.max(beyond) * T::lit(1.05)
    }

    /// Space-independent solution `[−(2γ/β)(t−t0)]₊^{β/2}`.
    pub fn explicit_t(&self, t: T, t0: T) -> T {
        let base = -(T::lit(2.0) * self.gamma / self.beta) * (t - t0);
        if base <= T::zero() {
            T::zero()
        } else {
            base.powf(self.beta / T::lit(2.0))
        }
    }

    /// Time-independent one-dimensional solution vanishing on `[a, b]`;
    /// `a = −∞` or `b = +∞` give the half-space profiles.
    pub fn explicit_halfspace(&self, xi: T, a: T, b: T) -> T {
        let k = (T::SQRT_2() / self.beta).powf(self.beta);
        let left = (a - xi).max(T::zero());
        let right = (xi - b).max(T::zero());
        k * (left.powf(self.beta) + right.powf(self.beta))
    }

    /// Radial homogeneous solution `c|y − y0|^β` in the first `n − k` coordinates.
    pub fn explicit_radial_cone(&self, x: &[T], x0: &[T], n: usize, k: usize) -> Result<T> {
        if n < 2 || k + 2 > n {
            return Err(domain("k", k as f64, "[0, n-2]"));
        }
        if x.len() < n - k || x0.len() < n - k {
            return Err(Error::Precondition("point has fewer than n-k coordinates".into()));
        }
        let dim = T::from_usize_lossy(n - k);
        let c = (self.gamma / (self.beta * (dim + self.beta - T::lit(2.0)))).powf(self.beta / T::lit(2.0));
        let r2: T = x.iter().zip(x0).take(n - k).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
        Ok(c * r2.sqrt().powf(self.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(g: f64) -> ModelParams<f64> {
        ModelParams::new(g).unwrap()
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_of_gamma(0.0).unwrap(), 1.0);
        assert_eq!(beta_of_gamma(1.0).unwrap(), 2.0);
        assert_relative_eq!(beta_of_gamma(2.0 / 3.0).unwrap(), 1.5, epsilon = 1e-15);
        assert!(beta_of_gamma(1.5).is_err());
        assert!(beta_of_gamma(-0.1).is_err());
        assert!(beta_of_gamma(f64::NAN).is_err());
    }

    #[test]
    fn default_mollifier() {
        let m = MollifierSpec::<f64>::polynomial();
        m.validate().unwrap();
        assert_eq!(m.h(0.0), 0.0);
        assert_eq!(m.h(1.0), 0.0);
        let d = 1e-7;
        assert_relative_eq!(m.h(d) / d, 12.0, max_relative = 1e-6);
        assert_relative_eq!(m.big_h(0.5), 0.6875, epsilon = 1e-15);
        assert_eq!(m.big_h(3.0), 1.0);
        assert_eq!(m.big_h(-1.0), 0.0);
    }

    #[test]
    fn bad_mollifier_rejected() {
        let m = MollifierSpec::<f64>::new(|v| 2.0 * v, |v| v * v, 2.0, 2.0);
        m.validate().unwrap();
        let skewed = MollifierSpec::<f64>::new(|v| 3.0 * v, |v| 1.5 * v * v, 3.0, 3.0);
        assert!(skewed.validate().is_err());
    }

    #[test]
    fn f_eps_examples() {
        assert_eq!(p(1.0).f_eps(1.0, 0.1), 1.0);
        for g in [0.0, 0.3, 1.0] {
            assert_eq!(p(g).f_eps(0.0, 0.2), 0.0);
            assert_eq!(p(g).f_eps(-1.0, 0.2), 0.0);
        }
        let q = p(0.5);
        let u = 0.3;
        assert_eq!(q.f_eps(u, 0.1), 0.5 * u.powf(-0.5));
    }

    #[test]
    fn big_f_examples() {
        assert_relative_eq!(p(1.0).big_f_eps(0.5, 1.0), 0.34375, epsilon = 1e-15);
        assert_relative_eq!(p(0.5).big_f_eps(2.0, 0.3), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(p(0.5).big_f_eps(-2.0, 0.3), 0.0);
    }

    #[test]
    fn f_is_derivative_of_big_f() {
        for g in [0.0, 0.25, 0.5, 1.0] {
            let q = p(g);
            let eps = 0.3f64;
            for i in 1..40 {
                let u = 0.01 * i as f64 * eps.powf(q.beta());
                let d = 1e-6 * u;
                let fd = (q.big_f_eps(u + d, eps) - q.big_f_eps(u - d, eps)) / (2.0 * d);
                assert_relative_eq!(fd, q.f_eps(u, eps), max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn g_eps_examples() {
        let q = p(0.5);
        assert_eq!(q.g_eps(0.0, 0.0, 0.1), 0.0);
        let one = p(1.0);
        assert_eq!(one.g_eps(0.004, 7.0, 0.1), one.g_eps(0.004, 0.0, 0.1));
        let bound = 1.5 * (16.0 / 9.0 + 0.5 + 0.5 * q.beta().powi(2) * 3.0);
        for i in 0..100 {
            let u = i as f64 * 0.001;
            assert!(q.g_eps(u, 3.0, 0.1) <= bound);
        }
    }

    #[test]
    fn phillips_examples() {
        assert_eq!(p(0.4).phillips_f(0.0, 0.1), 0.0);
        assert_relative_eq!(p(1.0).phillips_f(1.0, 1.0), 0.5, epsilon = 1e-15);
        let q = p(0.5);
        let us: Vec<f64> = (0..50).map(|i| 10f64.powf(i as f64 * 0.1)).collect();
        for w in us.windows(2) {
            assert!(q.phillips_f(w[1], 1e-3) <= q.phillips_f(w[0], 1e-3));
        }
        assert_relative_eq!(q.phillips_f(1e8, 1e-3), q.reaction_limit(1e8), max_relative = 1e-6);
    }

    #[test]
    fn explicit_t_examples() {
        let one = p(1.0);
        assert_eq!(one.explicit_t(0.0, 0.0), 0.0);
        assert_relative_eq!(one.explicit_t(-1.0, 0.0), 1.0, epsilon = 1e-15);
        assert_eq!(one.explicit_t(1.0, 0.0), 0.0);
    }

    #[test]
    fn explicit_halfspace_examples() {
        let zero = p(0.0);
        assert_relative_eq!(zero.explicit_halfspace(1.0, f64::NEG_INFINITY, 0.0), 2f64.sqrt(), epsilon = 1e-15);
        let q = p(0.6);
        assert_eq!(q.explicit_halfspace(0.3, -1.0, 2.0), 0.0);
        assert_relative_eq!(
            q.explicit_halfspace(-1.7, -1.0, 2.0),
            q.explicit_halfspace(2.7, -1.0, 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn explicit_halfspace_solves_ode() {
        for g in [0.2, 0.5, 1.0] {
            let q = p(g);
            let u = |x: f64| q.explicit_halfspace(x, f64::NEG_INFINITY, 0.0);
            let h = 1e-4;
            for x in [0.5, 1.0, 2.0] {
                let lap = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
                assert_relative_eq!(lap, q.reaction_limit(u(x)), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn explicit_radial_cone_examples() {
        let one = p(1.0);
        assert_eq!(one.explicit_radial_cone(&[0.3, 0.2], &[0.3, 0.2], 2, 0).unwrap(), 0.0);
        assert_relative_eq!(one.explicit_radial_cone(&[2.0, 0.0], &[0.0, 0.0], 2, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(one.explicit_radial_cone(&[1.0, 0.0, 0.0], &[0.0; 3], 3, 2).is_err());
    }

    #[test]
    fn explicit_radial_cone_residual() {
        let h = 1e-3;
        for (g, n, k) in [(0.5, 3usize, 0usize), (0.3, 4, 1), (1.0, 2, 0), (0.8, 3, 1)] {
            let q = p(g);
            let u = |x: &[f64]| q.explicit_radial_cone(x, &vec![0.0; n], n, k).unwrap();
            let x: Vec<f64> = (0..n).map(|i| 0.4 + 0.1 * i as f64).collect();
            let mut lap = 0.0;
            for i in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                lap += (u(&xp) - 2.0 * u(&x) + u(&xm)) / (h * h);
            }
            let target = q.reaction_limit(u(&x));
            assert!((lap - target).abs() <= 1e-5 * target.abs().max(1.0), "{g} {n} {k}: {lap} vs {target}");
        }
    }

    #[test]
    fn lipschitz_scaling() {
        let q = p(0.5);
        assert!(q.lip_f1() > 0.0);
        assert_relative_eq!(q.lip_f_eps(0.1), q.lip_f1() * 100.0, max_relative = 1e-12);
        let eps = 0.1f64;
        let mut worst: f64 = 0.0;
        for i in 1..2000 {
            let u0 = i as f64 * 1e-5;
            let u1 = u0 + 1e-5;
            worst = worst.max(((q.f_eps(u1, eps) - q.f_eps(u0, eps)) / 1e-5).abs());
        }
        assert!(worst <= q.lip_f_eps(eps));
    }

    #[test]
    fn generic_over_f32() {
        let q = ModelParams::<f32>::new(0.5).unwrap();
        assert!((q.beta() - 4.0 / 3.0).abs() < 1e-6);
        assert!(q.f_eps(0.0, 0.1) == 0.0);
        assert!(q.f_eps(1.0, 0.1) == 0.5);
    }
}
