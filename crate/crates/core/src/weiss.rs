//! Backward heat kernel, Weiss energies over time strips, the operator `Z`,
//! the monotonicity identity audit and blow-up rescaling.

use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::num::{pos_pow, Real};
use crate::solver::{Geometry, Grid, GridField, Reaction, Trajectory};

/// Spatial integrands are dropped where the kernel falls below this value.
pub const KERNEL_CUTOFF: f64 = 1e-16;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];
/// Gauss–Legendre panels per strip in `ln(t₀ − t)`.
const STRIP_PANELS: usize = 8;

/// `(4π|t|)^{−n/2} exp(−|x|²/(4|t|))` for `t < 0`.
pub fn backward_kernel<T: Real>(x: &[T], t: T, n: usize) -> Result<T> {
    if !(t < T::zero()) {
        return Err(domain("t", t.f64(), "(-inf, 0)"));
    }
    let r2: T = x.iter().map(|&v| v * v).sum();
    Ok(kernel_radial(r2.sqrt(), -t, n))
}

fn kernel_radial<T: Real>(r: T, tau: T, n: usize) -> T {
    let nn = T::from_usize_lossy(n);
    (T::lit(4.0) * T::PI() * tau).powf(-nn * T::lit(0.5)) * (-r * r / (T::lit(4.0) * tau)).exp()
}

impl<T: Real> Trajectory<T> {
    /// Wraps externally produced snapshots (times strictly increasing, same grid).
    pub fn from_snapshots(snapshots: Vec<GridField<T>>, eps: T, params: ModelParams<T>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::InsufficientSnapshots(format!("{} given", snapshots.len())));
        }
        let grid = &snapshots[0].grid;
        let mut dt = T::infinity();
        for w in snapshots.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::Precondition("snapshot times must increase strictly".into()));
            }
            if w[1].grid != *grid {
                return Err(Error::Precondition("snapshots live on different grids".into()));
            }
            dt = dt.min(w[1].t - w[0].t);
        }
        let top = snapshots.iter().map(|s| s.max()).fold(T::zero(), T::max);
        Ok(Trajectory {
            snapshots,
            eps,
            params,
            reaction: Reaction::Feps,
            dt,
            stride: 1,
            energy_log: Vec::new(),
            max_clip: T::zero(),
            max_sup: top,
        })
    }

    /// Field linearly interpolated to time `t` and the slope of the segment.
    fn field_and_rate(&self, t: T) -> Option<(Vec<T>, Vec<T>)> {
        let s = &self.snapshots;
        let n = s.len();
        if n < 2 || t < s[0].t || t > s[n - 1].t {
            return None;
        }
        let k = s.partition_point(|f| f.t <= t).clamp(1, n - 1);
        let (a, b) = (&s[k - 1], &s[k]);
        let h = b.t - a.t;
        let f = (t - a.t) / h;
        let vals = a.values.iter().zip(&b.values).map(|(&u, &v)| u + (v - u) * f).collect();
        let rate = a.values.iter().zip(&b.values).map(|(&u, &v)| (v - u) / h).collect();
        Some((vals, rate))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeissVariant {
    /// `2F_ε(u)` in the energy.
    Eps,
    /// `2u₊^γ` in the energy.
    Limit,
}

/// Centre `(x₀, t₀)`; radial runs require `x₀ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Center<T> {
    pub x: T,
    pub t: T,
}

struct StripTerms<T> {
    energy: T,
    mass: T,
    z: T,
    h: T,
}

fn check_center<T: Real>(grid: &Grid<T>, c: Center<T>) -> Result<()> {
    if let Geometry::Radial(_) = grid.geometry {
        if c.x != T::zero() {
            return Err(Error::Precondition("radial runs only admit centres on the axis".into()));
        }
    }
    Ok(())
}

/// Strip integrals over `t₀ − t ∈ (r², 4r²)`, unscaled.
fn strip_terms<T: Real>(traj: &Trajectory<T>, c: Center<T>, r: T, variant: WeissVariant) -> Result<StripTerms<T>> {
    if !(r > T::zero()) {
        return Err(domain("r", r.f64(), "(0, inf)"));
    }
    let grid = &traj.snapshots[0].grid;
    check_center(grid, c)?;
    let (t_lo, t_hi) = (c.t - T::lit(4.0) * r * r, c.t - r * r);
    if t_lo < traj.snapshots[0].t || t_hi > traj.t_end() {
        return Err(Error::InsufficientSnapshots(format!("strip [{t_lo}, {t_hi}] is not covered by the run")));
    }
    let p = &traj.params;
    let (gamma, beta, eps) = (p.gamma(), p.beta(), traj.eps);
    let n = grid.dim();
    let xs = grid.centers();
    let w = grid.weights();
    let dx2 = T::lit(2.0) * grid.dx;
    let (s_lo, s_hi) = ((r * r).ln(), (T::lit(4.0) * r * r).ln());
    let panel = (s_hi - s_lo) / T::from_usize_lossy(STRIP_PANELS);
    let mut acc = StripTerms {
        energy: T::zero(),
        mass: T::zero(),
        z: T::zero(),
        h: T::zero(),
    };
    let ghost = |v: &[T], i: isize| -> T {
        let len = v.len() as isize;
        if i < 0 {
            match grid.geometry {
                Geometry::LineSymmetric => -v[0],
                Geometry::Radial(_) => v[0],
            }
        } else if i >= len {
            -v[(len - 1) as usize]
        } else {
            v[i as usize]
        }
    };
    for j in 0..STRIP_PANELS {
        let mid = s_lo + panel * (T::from_usize_lossy(j) + T::lit(0.5));
        for (&node, &wt) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
            let s = mid + panel * T::lit(0.5) * T::lit(node);
            let tau = s.exp();
            // dt = τ ds
            let time_w = T::lit(wt) * panel * T::lit(0.5) * tau;
            let (u, ut) = traj
                .field_and_rate(c.t - tau)
                .ok_or_else(|| Error::InsufficientSnapshots(format!("no data at t = {}", c.t - tau)))?;
            for i in 0..u.len() {
                let dxc = xs[i] - c.x;
                let rho = kernel_radial(dxc.abs(), tau, n);
                if rho < T::lit(KERNEL_CUTOFF) {
                    continue;
                }
                let ii = i as isize;
                let grad = (ghost(&u, ii + 1) - ghost(&u, ii - 1)) / dx2;
                let ui = u[i];
                let pot = match variant {
                    WeissVariant::Eps => T::lit(2.0) * p.big_f_eps(ui, eps),
                    WeissVariant::Limit => T::lit(2.0) * pos_pow(ui, gamma),
                };
                let zu = dxc * grad - T::lit(2.0) * tau * ut[i] - beta * ui;
                let m = w[i] * rho * time_w;
                acc.energy = acc.energy + m * (grad * grad + pot);
                acc.mass = acc.mass + m * ui * ui / tau;
                acc.z = acc.z + m * zu * zu / tau;
                acc.h = acc.h + m * p.h_eps(ui, eps) * pos_pow(ui, gamma + T::one());
            }
        }
    }
    Ok(acc)
}

/// `W(r) = r^{−(2+βγ)}∫_S[|∇u|² + 2F]ρ − (β/2)r^{−(2+βγ)}∫_S u²ρ/(t₀−t)`.
pub fn weiss_energy<T: Real>(traj: &Trajectory<T>, c: Center<T>, r: T, variant: WeissVariant) -> Result<T> {
    let s = strip_terms(traj, c, r, variant)?;
    let p = &traj.params;
    let scale = r.powf(-(T::lit(2.0) + p.beta() * p.gamma()));
    Ok(scale * (s.energy - p.beta() * T::lit(0.5) * s.mass))
}

/// `Zv = (x − x₀)·∇v − 2(t₀ − t)∂ₜv − βv` at the snapshot nearest `t` and the cell
/// containing `x`, with centred differences.
pub fn z_operator<T: Real>(traj: &Trajectory<T>, c: Center<T>, x: T, t: T) -> Result<T> {
    let grid = &traj.snapshots[0].grid;
    check_center(grid, c)?;
    let k = traj.nearest(t);
    let i = grid.cell_of(x);
    if k == 0 || k + 1 >= traj.snapshots.len() || i == 0 || i + 1 >= grid.len() {
        return Err(Error::Precondition(format!("({x}, {t}) is too close to the edge of the run for centred differences")));
    }
    let s = &traj.snapshots;
    let v = &s[k].values;
    let grad = (v[i + 1] - v[i - 1]) / (T::lit(2.0) * grid.dx);
    let ut = (s[k + 1].values[i] - s[k - 1].values[i]) / (s[k + 1].t - s[k - 1].t);
    let beta = traj.params.beta();
    Ok((grid.x(i) - c.x) * grad - T::lit(2.0) * (c.t - s[k].t) * ut - beta * v[i])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeissSample<T> {
    pub r: T,
    pub w: T,
    /// `∫_S (Zu)²ρ/(t₀−t)`.
    pub z_term: T,
    /// `∫_S h_ε(u)u^{γ+1}ρ`.
    pub h_term: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityAudit<T> {
    pub samples: Vec<WeissSample<T>>,
    /// `|W(R₂) − W(R₁) − ∫ r^{−(3+βγ)}(z_term + 2β h_term) dr|`.
    pub defect: T,
    /// `defect / (|W(R₂)| + |W(R₁)| + 1)`.
    pub relative_defect: T,
    /// Largest drop `W(r_k) − W(r_{k+1})` over consecutive radii (≤ 0 when monotone).
    pub max_decrease: T,
}

impl<T: Real> MonotonicityAudit<T> {
    pub fn passes(&self, defect_tol: T, monotone_tol: T) -> bool {
        self.relative_defect <= defect_tol && self.max_decrease <= monotone_tol
    }
}

/// Weiss energies on `r_grid` with both right-hand integrands and the defect of
/// the monotonicity identity (trapezoid in `ln r`).
pub fn monotonicity_audit<T: Real>(traj: &Trajectory<T>, c: Center<T>, r_grid: &[T]) -> Result<MonotonicityAudit<T>> {
    if r_grid.len() < 2 || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("r_grid must be increasing with at least two points".into()));
    }
    let p = &traj.params;
    let bg = p.beta() * p.gamma();
    let mut samples = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let s = strip_terms(traj, c, r, WeissVariant::Eps)?;
        let w = r.powf(-(T::lit(2.0) + bg)) * (s.energy - p.beta() * T::lit(0.5) * s.mass);
        samples.push(WeissSample { r, w, z_term: s.z, h_term: s.h });
    }
    // dr = r d(ln r)
    let rate = |s: &WeissSample<T>| s.r.powf(-(T::lit(2.0) + bg)) * (s.z_term + T::lit(2.0) * p.beta() * s.h_term);
    let mut integral = T::zero();
    for w in samples.windows(2) {
        integral = integral + (w[1].r / w[0].r).ln() * T::lit(0.5) * (rate(&w[0]) + rate(&w[1]));
    }
    let (first, last) = (samples[0].w, samples[samples.len() - 1].w);
    let defect = (last - first - integral).abs();
    let max_decrease = samples.windows(2).map(|w| w[0].w - w[1].w).fold(T::neg_infinity(), T::max);
    Ok(MonotonicityAudit {
        relative_defect: defect / (last.abs() + first.abs() + T::one()),
        defect,
        max_decrease,
        samples,
    })
}

/// Sampling window for a blow-up: `x ∈ (−x_half, x_half)` (or `[0, x_half)` radially)
/// on `m` cells per half, at the rescaled times `times`.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaleWindow<T> {
    pub x_half: T,
    pub m: usize,
    pub times: Vec<T>,
}

/// `count` radii spaced geometrically on `[lo, hi]`.
pub fn geometric_radii<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    let q = (hi / lo).ln() / T::from_usize_lossy(count.max(2) - 1);
    (0..count.max(2)).map(|k| lo * (q * T::from_usize_lossy(k)).exp()).collect()
}

/// `u_r(x, t) = u(x₀ + rx, t₀ + r²t)/r^β` for a closure `u`.
pub fn rescale_point<T: Real>(u: impl Fn(T, T) -> T, c: Center<T>, r: T, beta: T, x: T, t: T) -> T {
    u(c.x + r * x, c.t + r * r * t) / r.powf(beta)
}

/// Blow-up family of a run sampled on `window`, one field per rescaled time.
pub fn blowup_rescale<T: Real>(traj: &Trajectory<T>, c: Center<T>, r: T, window: &RescaleWindow<T>) -> Result<Vec<GridField<T>>> {
    if !(r > T::zero()) {
        return Err(domain("r", r.f64(), "(0, inf)"));
    }
    let src = &traj.snapshots[0].grid;
    check_center(src, c)?;
    let grid = Grid::new(src.geometry, window.x_half, window.m)?;
    let (lo, hi) = grid.domain();
    let (dlo, dhi) = src.domain();
    if c.x + r * lo < dlo || c.x + r * hi > dhi {
        return Err(Error::Precondition("rescaled window leaves the computational domain".into()));
    }
    let beta = traj.params.beta();
    let scale = r.powf(beta);
    let mut out = Vec::with_capacity(window.times.len());
    for &t in &window.times {
        let tt = c.t + r * r * t;
        let (u, _) = traj
            .field_and_rate(tt)
            .ok_or_else(|| Error::Precondition(format!("rescaled time {t} maps to {tt}, outside the run")))?;
        let f = GridField {
            grid: src.clone(),
            t: tt,
            values: u,
        };
        out.push(GridField::from_fn(&grid, t, |x| f.interpolate(c.x + r * x) / scale));
    }
    Ok(out)
}

/// Blow-up family as a run in its own right: snapshots at the original snapshot
/// times mapped to `(t − t₀)/r²` (up to `t₀`), cell centres aligned with the
/// original grid, regularization `ε/r`.
pub fn rescaled_run<T: Real>(traj: &Trajectory<T>, c: Center<T>, r: T, x_half: T) -> Result<Trajectory<T>> {
    let dx = traj.snapshots[0].grid.dx;
    let m = (x_half * r / dx).round().to_usize().unwrap_or(0);
    let times: Vec<T> = traj.snapshots.iter().filter(|s| s.t <= c.t).map(|s| (s.t - c.t) / (r * r)).collect();
    let window = RescaleWindow {
        x_half: dx * T::from_usize_lossy(m) / r,
        m,
        times,
    };
    let fields = blowup_rescale(traj, c, r, &window)?;
    Trajectory::from_snapshots(fields, traj.eps / r, traj.params.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traveling_wave::colliding_tw;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_basics() {
        let t = -1.0 / (4.0 * std::f64::consts::PI);
        assert_relative_eq!(backward_kernel(&[0.0], t, 1).unwrap(), 1.0, max_relative = 1e-15);
        assert!(backward_kernel(&[0.0], 0.0, 1).is_err());
        let (x, tt, r) = (0.3, -0.7, 0.4);
        let a = backward_kernel(&[r * x], r * r * tt, 1).unwrap();
        let b = backward_kernel(&[x], tt, 1).unwrap();
        assert_relative_eq!(a, b / r, max_relative = 1e-14);
        let h = 1e-3;
        let mass: f64 = (-20000..=20000).map(|k| backward_kernel(&[k as f64 * h], -0.5, 1).unwrap() * h).sum();
        assert!((mass - 1.0).abs() < 1e-10);
    }

    fn static_run(f: impl Fn(f64) -> f64, x_max: f64, m: usize, times: &[f64]) -> Trajectory<f64> {
        let g = Grid::new(Geometry::LineSymmetric, x_max, m).unwrap();
        let snaps = times.iter().map(|&t| GridField::from_fn(&g, t, &f)).collect();
        Trajectory::from_snapshots(snaps, 1e-3, ModelParams::new(0.5).unwrap()).unwrap()
    }

    #[test]
    fn homogeneous_field_has_constant_energy() {
        let p = ModelParams::new(0.5).unwrap();
        let (cb, beta) = (p.c_beta(), p.beta());
        let traj = static_run(|x| cb * pos_pow(x, beta), 12.0, 4000, &[-1.0, 0.0]);
        let c = Center { x: 0.0, t: 0.0 };
        let ws: Vec<f64> = [0.1, 0.2, 0.3, 0.4].iter().map(|&r| weiss_energy(&traj, c, r, WeissVariant::Limit).unwrap()).collect();
        let spread = ws.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ws.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-3 * ws[0].abs().max(1.0), "{ws:?}");
        let z = z_operator(&static_run(|x| cb * pos_pow(x, beta), 12.0, 4000, &[-1.0, -0.5, 0.0]), c, 0.7, -0.5).unwrap();
        assert!(z.abs() < 1e-3, "{z}");
    }

    #[test]
    fn zero_and_constant_fields() {
        let traj = static_run(|_| 0.0, 4.0, 200, &[-1.0, 0.0]);
        let c = Center { x: 0.0, t: 0.0 };
        assert_eq!(weiss_energy(&traj, c, 0.3, WeissVariant::Eps).unwrap(), 0.0);
        let a = monotonicity_audit(&traj, c, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(a.defect, 0.0);
        let k = static_run(|_| 2.0, 4.0, 200, &[-1.0, -0.5, 0.0]);
        assert_relative_eq!(z_operator(&k, c, 0.0, -0.5).unwrap(), -2.0 * 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn space_independent_solution_has_zero_z() {
        let p = ModelParams::new(0.5).unwrap();
        let g = Grid::new(Geometry::LineSymmetric, 2.0, 64).unwrap();
        let snaps = (0..=40)
            .map(|k| {
                let t = -1.0 + 0.01 * k as f64;
                GridField::from_fn(&g, t, |_| p.explicit_t(t, 0.0))
            })
            .collect();
        let traj = Trajectory::from_snapshots(snaps, 1e-3, p.clone()).unwrap();
        let z = z_operator(&traj, Center { x: 0.0, t: 0.0 }, 0.3, -0.8).unwrap();
        assert!(z.abs() < 1e-4, "{z}");
    }

    #[test]
    fn rescaling_identity_and_invariance() {
        let p = ModelParams::new(0.5).unwrap();
        let beta = p.beta();
        let traj = static_run(|x| 0.7 * x.abs().powf(beta), 6.0, 600, &[-1.0, 0.0]);
        let c = Center { x: 0.0, t: 0.0 };
        let win = RescaleWindow {
            x_half: 2.0,
            m: 200,
            times: vec![-1.0, -0.5],
        };
        let id = blowup_rescale(&traj, c, 1.0, &win).unwrap();
        for (x, v) in id[0].grid.centers().into_iter().zip(&id[0].values) {
            assert!((v - 0.7 * x.abs().powf(beta)).abs() < 1e-3);
        }
        let half = blowup_rescale(&traj, c, 0.5, &win).unwrap();
        for (a, b) in half[1].values.iter().zip(&id[1].values) {
            assert!((a - b).abs() < 2e-3);
        }
    }

    #[test]
    fn energy_scales_under_blowup() {
        let p = ModelParams::new(0.5).unwrap();
        let g = Grid::new(Geometry::LineSymmetric, 6.0, 600).unwrap();
        let snaps = (0..=50)
            .map(|k| {
                let t = 0.02 * k as f64;
                GridField::from_fn(&g, t, |x: f64| (1.0 + t) * (-x * x).exp())
            })
            .collect();
        let traj = Trajectory::from_snapshots(snaps, 0.3, p).unwrap();
        let c = Center { x: 0.0, t: 1.0 };
        let (r, big_r) = (0.5, 0.4);
        let scaled = rescaled_run(&traj, c, r, 12.0).unwrap();
        let a = weiss_energy(&scaled, Center { x: 0.0, t: 0.0 }, big_r, WeissVariant::Eps).unwrap();
        let b = weiss_energy(&traj, c, r * big_r, WeissVariant::Eps).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn collision_blowup_approaches_cone() {
        let scene = colliding_tw(0.5, -1.0, 1.0, 1.0, -1.0, 5.0).unwrap();
        let beta = 4.0 / 3.0;
        let cb = (2.0f64 / (beta * beta)).powf(beta / 2.0);
        let c = Center { x: scene.x_star, t: scene.t_star };
        let u = |x: f64, t: f64| scene.u(x, t).unwrap();
        let mut prev = f64::INFINITY;
        for &r in &[0.2, 0.1, 0.05, 0.025] {
            let mut err: f64 = 0.0;
            for i in 0..=40 {
                let x = -1.0 + 0.05 * i as f64;
                for &t in &[-1.0, -0.25] {
                    err = err.max((rescale_point(u, c, r, beta, x, t) - cb * x.abs().powf(beta)).abs());
                }
            }
            assert!(err < prev, "r = {r}: {err} vs {prev}");
            prev = err;
        }
        assert!(prev < 0.1);
    }
}
