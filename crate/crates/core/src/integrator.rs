//! Dormand–Prince 5(4) with PI step control, dense output and terminal events.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::roots::refine_root;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const A7: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Tolerances and limits for one integration.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h_max: T,
    pub max_steps: usize,
    /// Integration stops once `|y[0]|` exceeds this value.
    pub blowup_cap: T,
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max: T::infinity(),
            max_steps: 200_000,
            blowup_cap: T::lit(1e12),
        }
    }
}

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination<T, const N: usize> {
    Reached,
    Event { index: usize, x: T, y: [T; N] },
    BlowUp { x: T },
}

/// One accepted step with its quartic continuous extension.
#[derive(Clone, Copy, Debug)]
pub struct DenseStep<T, const N: usize> {
    pub x0: T,
    pub x1: T,
    rcont: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn y0(&self) -> [T; N] {
        self.rcont[0]
    }

    pub fn y1(&self) -> [T; N] {
        let mut y = self.rcont[0];
        for (yi, di) in y.iter_mut().zip(self.rcont[1]) {
            *yi = *yi + di;
        }
        y
    }

    pub fn eval(&self, x: T) -> [T; N] {
        let theta = (x - self.x0) / (self.x1 - self.x0);
        let theta1 = T::one() - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i]))))
    }

    /// Derivative of the continuous extension with respect to `x`.
    pub fn eval_derivative(&self, x: T) -> [T; N] {
        let h = self.x1 - self.x0;
        let theta = (x - self.x0) / h;
        let theta1 = T::one() - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            let q = r[3][i] + theta1 * r[4][i];
            let p = r[2][i] + theta * q;
            let dp = q - theta * r[4][i];
            let inner = r[1][i] + theta1 * p;
            let dinner = -p + theta1 * dp;
            (inner + theta * dinner) / h
        })
    }
}

/// Accepted steps plus the stopping reason.
#[derive(Clone, Debug)]
pub struct OdeSolution<T, const N: usize> {
    pub steps: Vec<DenseStep<T, N>>,
    pub termination: Termination<T, N>,
    pub rhs_evals: usize,
}

impl<T: Real, const N: usize> OdeSolution<T, N> {
    pub fn x_start(&self) -> T {
        self.steps.first().map(|s| s.x0).unwrap_or_else(T::nan)
    }

    /// Last abscissa covered by the solution (the event location if one fired).
    pub fn x_end(&self) -> T {
        self.steps.last().map(|s| s.x1).unwrap_or_else(T::nan)
    }

    pub fn y_end(&self) -> [T; N] {
        self.steps.last().map(|s| s.y1()).unwrap_or([T::nan(); N])
    }

    /// Dense evaluation; `None` outside the covered range.
    pub fn eval(&self, x: T) -> Option<[T; N]> {
        let idx = self.step_index(x)?;
        Some(self.steps[idx].eval(x))
    }

    /// Dense derivative; `None` outside the covered range.
    pub fn eval_derivative(&self, x: T) -> Option<[T; N]> {
        let idx = self.step_index(x)?;
        Some(self.steps[idx].eval_derivative(x))
    }

    fn step_index(&self, x: T) -> Option<usize> {
        let first = self.steps.first()?;
        let forward = first.x1 >= first.x0;
        let key = |s: &DenseStep<T, N>| if forward { s.x1 } else { -s.x1 };
        let xx = if forward { x } else { -x };
        let lo = if forward { first.x0 } else { -first.x0 };
        let hi = key(self.steps.last()?);
        if xx < lo || xx > hi {
            return None;
        }
        Some(self.steps.partition_point(|s| key(s) < xx).min(self.steps.len() - 1))
    }

    /// Step endpoints, starting with the initial point.
    pub fn nodes(&self) -> Vec<(T, [T; N])> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        if let Some(s) = self.steps.first() {
            out.push((s.x0, s.y0()));
        }
        out.extend(self.steps.iter().map(|s| (s.x1, s.y1())));
        out
    }
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            if *c != 0.0 {
                acc = acc + T::lit(*c) * k[i];
            }
        }
        y[i] + h * acc
    })
}

fn err_norm<T: Real, const N: usize>(e: &[T; N], y0: &[T; N], y1: &[T; N], opts: &OdeOptions<T>) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        acc = acc + (e[i] / sc).powi(2);
    }
    (acc / T::from_usize_lossy(N)).sqrt()
}

fn initial_step<T: Real, const N: usize, F: Fn(T, &[T; N]) -> [T; N]>(
    f: &F,
    x0: T,
    y0: &[T; N],
    f0: &[T; N],
    span: T,
    opts: &OdeOptions<T>,
) -> T {
    let sc = |i: usize, y: &[T; N]| opts.atol + opts.rtol * y[i].abs();
    let norm = |v: &[T; N], y: &[T; N]| {
        let mut a = T::zero();
        for i in 0..N {
            a = a + (v[i] / sc(i, y)).powi(2);
        }
        (a / T::from_usize_lossy(N)).sqrt()
    };
    let d0 = norm(y0, y0);
    let d1 = norm(f0, y0);
    let tiny = T::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    h0 = h0.min(span.abs()).min(opts.h_max);
    let dir = span.signum();
    let y1: [T; N] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
    let f1 = f(x0 + dir * h0, &y1);
    let diff: [T; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff, y0) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / dm).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(span.abs()).min(opts.h_max)
}

/// Integrates `y' = f(x, y)` from `x0` to `x_end` (either direction).
///
/// Each `events[i]` is a scalar function whose sign change terminates the
/// integration at the located root.
pub fn integrate<T, const N: usize, F>(
    f: F,
    x0: T,
    y0: [T; N],
    x_end: T,
    opts: &OdeOptions<T>,
    events: &[&dyn Fn(T, &[T; N]) -> T],
) -> Result<OdeSolution<T, N>>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let span = x_end - x0;
    let dir = if span >= T::zero() { T::one() } else { -T::one() };
    let mut steps = Vec::new();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut evals = 1usize;
    if span == T::zero() {
        return Ok(OdeSolution {
            steps,
            termination: Termination::Reached,
            rhs_evals: evals,
        });
    }
    let mut h = initial_step(&f, x0, &y0, &k1, span, opts);
    evals += 1;
    let mut g_prev: Vec<T> = events.iter().map(|g| g(x, &y)).collect();
    let mut facold = T::lit(1e-4);
    let safe = T::lit(0.9);
    let beta = T::lit(0.04);
    let expo1 = T::lit(0.2) - beta * T::lit(0.75);
    let mut last_rejected = false;

    for _ in 0..opts.max_steps {
        let remaining = (x_end - x) * dir;
        if remaining <= T::zero() {
            return Ok(OdeSolution {
                steps,
                termination: Termination::Reached,
                rhs_evals: evals,
            });
        }
        let mut hh = h.min(remaining).min(opts.h_max);
        if remaining - hh < T::lit(1e-10) * hh {
            hh = remaining;
        }
        let hs = hh * dir;
        if hh <= T::epsilon() * T::lit(16.0) * x.abs().max(T::one()) {
            return Err(Error::StepUnderflow(x.f64()));
        }
        let k2 = f(x + T::lit(C[1]) * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(x + T::lit(C[2]) * hs, &axpy(&y, hs, &[(A3[0], &k1), (A3[1], &k2)]));
        let k4 = f(x + T::lit(C[3]) * hs, &axpy(&y, hs, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]));
        let k5 = f(
            x + T::lit(C[4]) * hs,
            &axpy(&y, hs, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
        );
        let k6 = f(
            x + hs,
            &axpy(&y, hs, &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)]),
        );
        let y1 = axpy(
            &y,
            hs,
            &[(A7[0], &k1), (A7[2], &k3), (A7[3], &k4), (A7[4], &k5), (A7[5], &k6)],
        );
        let k7 = f(x + hs, &y1);
        evals += 6;
        let e: [T; N] = std::array::from_fn(|i| {
            hs * (T::lit(E[0]) * k1[i]
                + T::lit(E[2]) * k3[i]
                + T::lit(E[3]) * k4[i]
                + T::lit(E[4]) * k5[i]
                + T::lit(E[5]) * k6[i]
                + T::lit(E[6]) * k7[i])
        });
        let finite = y1.iter().chain(e.iter()).all(|v| v.is_finite());
        let err = if finite { err_norm(&e, &y, &y1, opts) } else { T::infinity() };
        let fac11 = if err.is_finite() { err.powf(expo1) } else { T::lit(10.0) };

        if err <= T::one() {
            let ydiff: [T; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [T; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let r4: [T; N] = std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]);
            let r5: [T; N] = std::array::from_fn(|i| {
                hs * (T::lit(D[0]) * k1[i]
                    + T::lit(D[2]) * k3[i]
                    + T::lit(D[3]) * k4[i]
                    + T::lit(D[4]) * k5[i]
                    + T::lit(D[5]) * k6[i]
                    + T::lit(D[6]) * k7[i])
            });
            let step = DenseStep {
                x0: x,
                x1: x + hs,
                rcont: [y, ydiff, bspl, r4, r5],
            };

            let mut fired: Option<(usize, T)> = None;
            for (i, g) in events.iter().enumerate() {
                let g1 = g(step.x1, &y1);
                let g0 = g_prev[i];
                if g1 == T::zero() || (g0 != T::zero() && (g0 > T::zero()) != (g1 > T::zero())) {
                    let root = if g1 == T::zero() {
                        step.x1
                    } else {
                        refine_root(|xx| Ok(g(xx, &step.eval(xx))), step.x0, step.x1)?
                    };
                    let closer = match fired {
                        Some((_, xr)) => (root - xr) * dir < T::zero(),
                        None => true,
                    };
                    if closer {
                        fired = Some((i, root));
                    }
                }
                g_prev[i] = g1;
            }
            let cap = opts.blowup_cap;
            let blow = y1[0].abs() > cap || !y1[0].is_finite();
            if blow {
                let xb = refine_root(|xx| Ok(step.eval(xx)[0].abs() - cap), step.x0, step.x1).unwrap_or(step.x1);
                let earlier_event = matches!(fired, Some((_, xr)) if (xr - xb) * dir < T::zero());
                if !earlier_event {
                    steps.push(truncate(step, xb));
                    return Ok(OdeSolution {
                        steps,
                        termination: Termination::BlowUp { x: xb },
                        rhs_evals: evals,
                    });
                }
            }
            if let Some((index, xr)) = fired {
                let yr = step.eval(xr);
                steps.push(truncate(step, xr));
                return Ok(OdeSolution {
                    steps,
                    termination: Termination::Event { index, x: xr, y: yr },
                    rhs_evals: evals,
                });
            }
            steps.push(step);
            x = x + hs;
            y = y1;
            k1 = k7;
            let mut fac = fac11 / facold.powf(beta);
            fac = (fac / safe).max(T::lit(0.1)).min(T::lit(5.0));
            let mut hnew = hh / fac;
            if last_rejected {
                hnew = hnew.min(hh);
            }
            facold = err.max(T::lit(1e-4));
            h = hnew;
            last_rejected = false;
        } else {
            let shrink = (fac11 / safe).min(T::lit(5.0));
            h = if err.is_finite() { hh / shrink } else { hh * T::lit(0.1) };
            last_rejected = true;
        }
    }
    Err(Error::MaxSteps(opts.max_steps))
}

/// Shortens an accepted step so that it ends at `x_new`, refitting the same
/// quartic in the rescaled step variable.
fn truncate<T: Real, const N: usize>(step: DenseStep<T, N>, x_new: T) -> DenseStep<T, N> {
    if x_new == step.x1 {
        return step;
    }
    let nodes = [0.0, 0.25, 0.5, 0.75, 1.0];
    let vals: Vec<[T; N]> = nodes
        .iter()
        .map(|&t| step.eval(step.x0 + T::lit(t) * (x_new - step.x0)))
        .collect();
    DenseStep {
        x0: step.x0,
        x1: x_new,
        rcont: monomial_to_rcont(&quartic_fit(&nodes, &vals)),
    }
}

fn quartic_fit<T: Real, const N: usize>(nodes: &[f64; 5], vals: &[[T; N]]) -> [[T; N]; 5] {
    let mut out = [[T::zero(); N]; 5];
    for comp in 0..N {
        let mut dd: Vec<T> = vals.iter().map(|v| v[comp]).collect();
        for level in 1..5 {
            for i in (level..5).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / T::lit(nodes[i] - nodes[i - level]);
            }
        }
        let mut poly = [T::zero(); 5];
        for k in (0..5).rev() {
            let mut next = [T::zero(); 5];
            for j in 0..4 {
                next[j + 1] = next[j + 1] + poly[j];
            }
            for j in 0..5 {
                next[j] = next[j] - T::lit(nodes[k]) * poly[j];
            }
            next[0] = next[0] + dd[k];
            poly = next;
        }
        for j in 0..5 {
            out[j][comp] = poly[j];
        }
    }
    out
}

fn monomial_to_rcont<T: Real, const N: usize>(m: &[[T; N]; 5]) -> [[T; N]; 5] {
    // y = r0 + r1 θ + r2 (θ − θ²) + r3 (θ² − θ³) + r4 (θ² − 2θ³ + θ⁴)
    let mut r = [[T::zero(); N]; 5];
    for c in 0..N {
        let (a0, a1, a2, a3, a4) = (m[0][c], m[1][c], m[2][c], m[3][c], m[4][c]);
        let r4 = a4;
        let r3 = -(a3 + T::lit(2.0) * r4);
        let r2 = -(a2 - r3 - r4);
        let r1 = a1 - r2;
        r[0][c] = a0;
        r[1][c] = r1;
        r[2][c] = r2;
        r[3][c] = r3;
        r[4][c] = r4;
    }
    r
}

/// Solves `y = base + hg·f(x, y)` by Newton; `None` if it fails or `y` changes sign.
fn sdirk_stage<T: Real>(f: &impl Fn(T, T) -> T, df: &impl Fn(T, T) -> T, x: T, base: T, hg: T, guess: T) -> Option<T> {
    let mut y = guess;
    for _ in 0..50 {
        let g = y - base - hg * f(x, y);
        let dy = g / (T::one() - hg * df(x, y));
        let next = y - dy;
        if !next.is_finite() || (next > T::zero()) != (guess > T::zero()) {
            return None;
        }
        y = next;
        if dy.abs() <= T::epsilon() * T::lit(4.0) * (T::one() + y.abs()) {
            return Some(y);
        }
    }
    None
}

/// One step of the L-stable two-stage SDIRK method of order 2.
fn sdirk_step<T: Real>(f: &impl Fn(T, T) -> T, df: &impl Fn(T, T) -> T, x: T, y: T, h: T) -> Option<T> {
    let g = T::one() - T::lit(0.5).sqrt();
    let y1 = sdirk_stage(f, df, x + g * h, y, g * h, y)?;
    let k1 = (y1 - y) / (g * h);
    sdirk_stage(f, df, x + h, y + (T::one() - g) * h * k1, g * h, y1)
}

/// Adaptive integration of a stiff scalar ODE `y' = f(x, y)` whose solution keeps
/// the sign of `y0`, with `df = ∂f/∂y`. Step doubling gives the error estimate and a
/// Richardson-corrected value. Returns the accepted nodes `(x, y)`.
pub fn integrate_stiff_scalar<T: Real>(
    f: impl Fn(T, T) -> T,
    df: impl Fn(T, T) -> T,
    x0: T,
    y0: T,
    x1: T,
    tol: T,
    max_steps: usize,
) -> Result<Vec<(T, T)>> {
    let mut out = vec![(x0, y0)];
    let (mut x, mut y) = (x0, y0);
    let span = x1 - x0;
    let mut h = span * T::lit(1e-3);
    let mut steps = 0;
    while x < x1 {
        steps += 1;
        if steps > max_steps {
            return Err(Error::MaxSteps(max_steps));
        }
        h = h.min(x1 - x);
        if h <= span * T::epsilon() * T::lit(16.0) {
            return Err(Error::Integration(format!("step size underflow at x = {x}")));
        }
        let full = sdirk_step(&f, &df, x, y, h);
        let half = sdirk_step(&f, &df, x, y, h * T::lit(0.5)).and_then(|m| sdirk_step(&f, &df, x + h * T::lit(0.5), m, h * T::lit(0.5)));
        let (full, half) = match (full, half) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                h = h * T::lit(0.25);
                continue;
            }
        };
        let err = (half - full).abs() / T::lit(3.0);
        let scale = tol * (T::one() + half.abs());
        if err <= scale {
            x = if x1 - x - h <= span * T::epsilon() { x1 } else { x + h };
            y = half + (half - full) / T::lit(3.0);
            out.push((x, y));
        }
        let ratio = if err == T::zero() { T::lit(4.0) } else { (scale / err).powf(T::one() / T::lit(3.0)) * T::lit(0.9) };
        h = h * ratio.max(T::lit(0.2)).min(T::lit(4.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_and_oscillator() {
        let opts = OdeOptions::with_tol(1e-12);
        let sol = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 2.0, &opts, &[]).unwrap();
        assert_eq!(sol.termination, Termination::Reached);
        assert_relative_eq!(sol.y_end()[0], 2f64.exp(), max_relative = 1e-10);
        let osc = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &opts, &[]).unwrap();
        assert_relative_eq!(osc.y_end()[0], 10f64.sin(), epsilon = 1e-9);
        for i in 0..100 {
            let x = 0.1 * i as f64 + 0.03;
            assert!((osc.eval(x).unwrap()[0] - x.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_direction() {
        let opts = OdeOptions::with_tol(1e-11);
        let sol = integrate(|_, y: &[f64; 1]| [-y[0]], 1.0, [1.0], -1.0, &opts, &[]).unwrap();
        assert_relative_eq!(sol.y_end()[0], 2f64.exp(), max_relative = 1e-9);
        assert!((sol.eval(0.0).unwrap()[0] - 1f64.exp()).abs() < 1e-8);
        assert!(sol.eval(1.5).is_none());
    }

    #[test]
    fn event_location() {
        let opts = OdeOptions::with_tol(1e-12);
        let ev = |_: f64, y: &[f64; 2]| y[0];
        let sol = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, &opts, &[&ev]).unwrap();
        match sol.termination {
            Termination::Event { index, x, y } => {
                assert_eq!(index, 0);
                assert_relative_eq!(x, std::f64::consts::FRAC_PI_2, max_relative = 1e-10);
                assert!(y[0].abs() < 1e-10);
            }
            t => panic!("unexpected {t:?}"),
        }
        assert_relative_eq!(sol.x_end(), std::f64::consts::FRAC_PI_2, max_relative = 1e-10);
        let before = sol.eval(sol.x_end() - 1e-3).unwrap()[0];
        assert!(before > 0.0);
    }

    #[test]
    fn blowup_detection() {
        // y' = y², y(0) = 1 blows up at x = 1.
        let opts = OdeOptions::with_tol(1e-10);
        let sol = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 5.0, &opts, &[]).unwrap();
        match sol.termination {
            Termination::BlowUp { x } => assert!((x - 1.0).abs() < 1e-9, "{x}"),
            t => panic!("unexpected {t:?}"),
        }
    }

    #[test]
    fn truncated_step_interpolant_matches() {
        let step = DenseStep::<f64, 1> {
            x0: 0.0,
            x1: 2.0,
            rcont: [[1.0], [0.5], [-0.3], [0.2], [0.1]],
        };
        let cut = truncate(step, 1.3);
        for i in 0..=10 {
            let x = 0.13 * i as f64;
            assert_relative_eq!(cut.eval(x)[0], step.eval(x)[0], epsilon = 1e-13);
        }
        assert_relative_eq!(cut.y1()[0], step.eval(1.3)[0], epsilon = 1e-13);
    }

    #[test]
    fn dense_derivative_matches_rhs() {
        let opts = OdeOptions::with_tol(1e-12);
        let osc = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &opts, &[]).unwrap();
        for i in 0..100 {
            let x = 0.1 * i as f64 + 0.03;
            let d = osc.eval_derivative(x).unwrap();
            assert!((d[0] - x.cos()).abs() < 1e-8);
            assert!((d[1] + x.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn stiff_scalar_tracks_slow_manifold() {
        // y' = -1e6 (y - cos x) - sin x has the solution cos x from y(0) = 1.
        let nodes = integrate_stiff_scalar(
            |x: f64, y: f64| -1e6 * (y - x.cos()) - x.sin(),
            |_, _| -1e6,
            0.0,
            1.0,
            1.0,
            1e-10,
            100_000,
        )
        .unwrap();
        assert!(nodes.len() < 5000);
        for (x, y) in nodes {
            assert!((y - x.cos()).abs() < 1e-8);
        }
    }
}
