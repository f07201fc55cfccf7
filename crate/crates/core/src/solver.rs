//! Time stepping for `∂ₜu − Δu = −f_ε(u)` on truncated one-dimensional or radial
//! domains, with monitors for the uniform estimates.

use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::num::{pos_pow, Real};
use crate::special::gamma_fn;

/// Stability factor in `dt ≤ κ ε²/Lip(f₁)`.
pub const KAPPA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Cells on `[−x_max, x_max]`, `2m` of them.
    LineSymmetric,
    /// Radial reduction in dimension `n`, `m` cells on `[0, x_max]`.
    Radial(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub geometry: Geometry,
    pub x_max: T,
    pub m: usize,
    pub dx: T,
}

impl<T: Real> Grid<T> {
    pub const MIN_CELLS: usize = 64;

    pub fn new(geometry: Geometry, x_max: T, m: usize) -> Result<Self> {
        if !(x_max > T::zero() && x_max.is_finite()) {
            return Err(domain("x_max", x_max.f64(), "(0, inf)"));
        }
        if m < Self::MIN_CELLS {
            return Err(domain("m", m as f64, "[64, inf)"));
        }
        if geometry == Geometry::Radial(0) {
            return Err(domain("n", 0.0, "[1, inf)"));
        }
        Ok(Self {
            geometry,
            x_max,
            m,
            dx: x_max / T::from_usize_lossy(m),
        })
    }

    /// Grid with spacing as close as possible to `dx`.
    pub fn with_spacing(geometry: Geometry, x_max: T, dx: T) -> Result<Self> {
        let m = (x_max / dx).round().to_usize().unwrap_or(0);
        Self::new(geometry, x_max, m)
    }

    pub fn len(&self) -> usize {
        match self.geometry {
            Geometry::LineSymmetric => 2 * self.m,
            Geometry::Radial(_) => self.m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial dimension of the underlying problem.
    pub fn dim(&self) -> usize {
        match self.geometry {
            Geometry::LineSymmetric => 1,
            Geometry::Radial(n) => n,
        }
    }

    /// Cell-centre coordinate.
    pub fn x(&self, i: usize) -> T {
        let c = (T::from_usize_lossy(i) + T::lit(0.5)) * self.dx;
        match self.geometry {
            Geometry::LineSymmetric => c - self.x_max,
            Geometry::Radial(_) => c,
        }
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn domain(&self) -> (T, T) {
        match self.geometry {
            Geometry::LineSymmetric => (-self.x_max, self.x_max),
            Geometry::Radial(_) => (T::zero(), self.x_max),
        }
    }

    /// Index of the cell containing `x` (clamped).
    pub fn cell_of(&self, x: T) -> usize {
        let lo = self.domain().0;
        let k = ((x - lo) / self.dx).floor().to_isize().unwrap_or(0);
        k.clamp(0, self.len() as isize - 1) as usize
    }

    fn sphere_area(&self) -> T {
        match self.geometry {
            Geometry::LineSymmetric => T::one(),
            Geometry::Radial(n) => {
                let h = T::from_usize_lossy(n) * T::lit(0.5);
                T::lit(2.0) * T::PI().powf(h) / gamma_fn(h).unwrap_or(T::one())
            }
        }
    }

    /// Quadrature weights: the measure of each cell.
    pub fn weights(&self) -> Vec<T> {
        match self.geometry {
            Geometry::LineSymmetric => vec![self.dx; self.len()],
            Geometry::Radial(n) => {
                let w = self.sphere_area();
                let nn = T::from_usize_lossy(n);
                (0..self.m)
                    .map(|i| {
                        let a = T::from_usize_lossy(i) * self.dx;
                        let b = a + self.dx;
                        w * (b.powi(n as i32) - a.powi(n as i32)) / nn
                    })
                    .collect()
            }
        }
    }

    /// Area of the face `k` (between cells `k − 1` and `k`).
    fn face_area(&self, k: usize) -> T {
        match self.geometry {
            Geometry::LineSymmetric => T::one(),
            Geometry::Radial(n) => self.sphere_area() * (T::from_usize_lossy(k) * self.dx).powi(n as i32 - 1),
        }
    }

    /// Coefficients `(α_i, β_i)` with `(Lu)_i = α_i(u_{i−1} − u_i) + β_i(u_{i+1} − u_i)`.
    /// Ghost cells: odd reflection at `±x_max`, even reflection at the radial centre.
    fn laplacian(&self) -> Vec<(T, T)> {
        let w = self.weights();
        let len = self.len();
        (0..len)
            .map(|i| match self.geometry {
                Geometry::LineSymmetric => {
                    let c = T::one() / (self.dx * self.dx);
                    (c, c)
                }
                Geometry::Radial(_) => {
                    let lower = if i == 0 { T::zero() } else { self.face_area(i) / (self.dx * w[i]) };
                    (lower, self.face_area(i + 1) / (self.dx * w[i]))
                }
            })
            .collect()
    }
}

/// Cell-centred values at time `t`. Blow-up rescalings may carry negative times.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    pub grid: Grid<T>,
    pub t: T,
    pub values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
            grid: grid.clone(),
            t: T::zero(),
        }
    }

    pub fn from_fn(grid: &Grid<T>, t: T, f: impl Fn(T) -> T) -> Self {
        Self {
            values: grid.centers().into_iter().map(f).collect(),
            grid: grid.clone(),
            t,
        }
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    pub fn integral(&self, f: impl Fn(T) -> T) -> T {
        self.grid.weights().iter().zip(&self.values).map(|(&w, &u)| w * f(u)).sum()
    }

    /// Value in the cell left (`−1`) or right (`len`) of the grid, following the ghost rules.
    fn ghost(&self, i: isize) -> T {
        let n = self.values.len() as isize;
        if i < 0 {
            match self.grid.geometry {
                Geometry::LineSymmetric => -self.values[0],
                Geometry::Radial(_) => self.values[0],
            }
        } else if i >= n {
            -self.values[(n - 1) as usize]
        } else {
            self.values[i as usize]
        }
    }

    /// Centred gradient at each cell.
    pub fn gradient(&self) -> Vec<T> {
        let two_dx = T::lit(2.0) * self.grid.dx;
        (0..self.values.len() as isize).map(|i| (self.ghost(i + 1) - self.ghost(i - 1)) / two_dx).collect()
    }

    /// `∫|∇u|²` from face differences.
    pub fn dirichlet_energy(&self) -> T {
        let dx = self.grid.dx;
        let n = self.values.len();
        let mut acc = T::zero();
        let first = match self.grid.geometry {
            Geometry::LineSymmetric => 0,
            Geometry::Radial(_) => 1,
        };
        for k in first..=n {
            let d = (self.ghost(k as isize) - self.ghost(k as isize - 1)) / dx;
            let width = if k == 0 || k == n { dx * T::lit(0.5) } else { dx };
            acc = acc + self.grid.face_area(k) * d * d * width;
        }
        acc
    }

    /// Linear interpolation between cell centres with the boundary value 0 at `x_max`.
    pub fn interpolate(&self, x: T) -> T {
        let g = &self.grid;
        let (lo, hi) = g.domain();
        if x <= lo {
            return if g.geometry == Geometry::LineSymmetric { T::zero() } else { self.values[0] };
        }
        if x >= hi {
            return T::zero();
        }
        let s = (x - lo) / g.dx - T::lit(0.5);
        let k = s.floor();
        let f = s - k;
        let k = k.to_isize().unwrap_or(0);
        let a = self.ghost(k).max(T::zero());
        let b = self.ghost(k + 1).max(T::zero());
        let a = if k < 0 && g.geometry == Geometry::LineSymmetric { T::zero() } else { a };
        let b = if k + 1 >= self.values.len() as isize { T::zero() } else { b };
        a + (b - a) * f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reaction {
    /// `f_ε = (H_ε(u)u^γ)'`.
    Feps,
    /// `γu/(ε + u^{2−γ})`.
    Phillips,
}

/// Cubic bump `height·(1 − ((x−center)/radius)²)³`.
pub fn make_initial_bump<T: Real>(grid: &Grid<T>, center: T, radius: T, height: T) -> Result<GridField<T>> {
    if !(radius > T::zero()) {
        return Err(domain("radius", radius.f64(), "(0, inf)"));
    }
    if !(height > T::zero()) {
        return Err(domain("height", height.f64(), "(0, inf)"));
    }
    let (lo, hi) = grid.domain();
    let inside = match grid.geometry {
        Geometry::LineSymmetric => center - radius >= lo && center + radius < hi,
        Geometry::Radial(_) => center == T::zero() && radius < hi,
    };
    if !inside {
        return Err(Error::Precondition(format!("bump support [{}, {}] is not inside the domain", center - radius, center + radius)));
    }
    Ok(GridField::from_fn(grid, T::zero(), |x| {
        let z = (x - center) / radius;
        let s = T::one() - z * z;
        if s <= T::zero() {
            T::zero()
        } else {
            height * s * s * s
        }
    }))
}


/// Primitive of the reaction vanishing at 0.
pub fn reaction_primitive<T: Real>(params: &ModelParams<T>, reaction: Reaction, u: T, eps: T) -> T {
    match reaction {
        Reaction::Feps => params.big_f_eps(u, eps),
        Reaction::Phillips => {
            if u <= T::zero() {
                return T::zero();
            }
            let k = 16;
            let h = u / T::from_usize_lossy(k);
            let mut acc = T::zero();
            for j in 0..=k {
                let w = if j == 0 || j == k {
                    T::one()
                } else if j % 2 == 1 {
                    T::lit(4.0)
                } else {
                    T::lit(2.0)
                };
                acc = acc + w * params.phillips_f(h * T::from_usize_lossy(j), eps);
            }
            acc * h / T::lit(3.0)
        }
    }
}

/// Lipschitz bound of the reaction at level `eps`.
pub fn reaction_lipschitz<T: Real>(params: &ModelParams<T>, reaction: Reaction, eps: T) -> T {
    match reaction {
        Reaction::Feps => params.lip_f_eps(eps),
        Reaction::Phillips => {
            // |d/du γu/(ε+u^p)| ≤ γ·max(1/ε, (p−1)/ε) and p − 1 ≤ 1.
            params.gamma() / eps * T::lit(1.05)
        }
    }
}

/// `min(dx²/4, κ/Lip)`.
pub fn dt_limit<T: Real>(grid: &Grid<T>, eps: T, params: &ModelParams<T>, reaction: Reaction) -> T {
    let lip = reaction_lipschitz(params, reaction, eps);
    let diffusion = grid.dx * grid.dx / T::lit(4.0);
    if lip > T::zero() {
        diffusion.min(T::lit(KAPPA) / lip)
    } else {
        diffusion
    }
}

/// Factored `(I − dt L)` for repeated solves.
#[derive(Clone, Debug)]
struct ImplicitDiffusion<T> {
    sub: Vec<T>,
    upper_mod: Vec<T>,
    inv_denom: Vec<T>,
}

impl<T: Real> ImplicitDiffusion<T> {
    fn new(grid: &Grid<T>, dt: T) -> Result<Self> {
        let coeffs = grid.laplacian();
        let n = coeffs.len();
        let mut sub = vec![T::zero(); n];
        let mut diag = vec![T::zero(); n];
        let mut sup = vec![T::zero(); n];
        for (i, &(a, b)) in coeffs.iter().enumerate() {
            let mut d = T::one() + dt * (a + b);
            if i == 0 {
                match grid.geometry {
                    Geometry::LineSymmetric => d = d + dt * a,
                    Geometry::Radial(_) => d = d - dt * a,
                }
            } else {
                sub[i] = -dt * a;
            }
            if i == n - 1 {
                d = d + dt * b;
            } else {
                sup[i] = -dt * b;
            }
            diag[i] = d;
        }
        let mut upper_mod = vec![T::zero(); n];
        let mut inv_denom = vec![T::zero(); n];
        for i in 0..n {
            let denom = diag[i] - if i > 0 { sub[i] * upper_mod[i - 1] } else { T::zero() };
            if !(denom.abs() > T::zero()) || !denom.is_finite() {
                return Err(Error::Precondition("singular diffusion matrix".into()));
            }
            inv_denom[i] = T::one() / denom;
            upper_mod[i] = sup[i] * inv_denom[i];
        }
        Ok(Self { sub, upper_mod, inv_denom })
    }

    fn solve(&self, rhs: &mut [T]) {
        let n = rhs.len();
        for i in 0..n {
            let prev = if i > 0 { self.sub[i] * rhs[i - 1] } else { T::zero() };
            rhs[i] = (rhs[i] - prev) * self.inv_denom[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] = rhs[i] - self.upper_mod[i] * rhs[i + 1];
        }
    }
}

fn check_dt<T: Real>(grid: &Grid<T>, dt: T, eps: T, params: &ModelParams<T>, reaction: Reaction) -> Result<()> {
    if !(eps > T::zero()) {
        return Err(domain("eps", eps.f64(), "(0, inf)"));
    }
    let limit = dt_limit(grid, eps, params, reaction);
    if !(dt > T::zero()) || dt > limit * (T::one() + T::lit(1e-12)) {
        return Err(Error::Cfl { dt: dt.f64(), limit: limit.f64() });
    }
    Ok(())
}

/// Explicit reaction with clipping at zero; returns the largest clip.
fn react<T: Real>(values: &mut [T], dt: T, eps: T, params: &ModelParams<T>, reaction: Reaction) -> T {
    let mut clip = T::zero();
    let scale = eps.powf(params.beta());
    for u in values.iter_mut() {
        if *u <= T::zero() {
            continue;
        }
        let f = match reaction {
            Reaction::Feps => params.f_eps_at_scale(*u, scale),
            Reaction::Phillips => params.phillips_f(*u, eps),
        };
        let v = *u - dt * f;
        if v < T::zero() {
            clip = clip.max(-v);
            *u = T::zero();
        } else {
            *u = v;
        }
    }
    clip
}

/// One backward-Euler diffusion solve followed by the explicit reaction.
pub fn step<T: Real>(field: &GridField<T>, dt: T, eps: T, params: &ModelParams<T>, reaction: Reaction) -> Result<GridField<T>> {
    check_dt(&field.grid, dt, eps, params, reaction)?;
    let solver = ImplicitDiffusion::new(&field.grid, dt)?;
    let mut values = field.values.clone();
    solver.solve(&mut values);
    react(&mut values, dt, eps, params, reaction);
    Ok(GridField {
        grid: field.grid.clone(),
        t: field.t + dt,
        values,
    })
}

#[derive(Clone, Debug)]
pub struct EvolveConfig<T> {
    pub eps: T,
    pub t_end: T,
    pub reaction: Reaction,
    /// Defaults to the stability limit.
    pub dt: Option<T>,
    /// Steps between snapshots; defaults to spacing at most `ε²`.
    pub snapshot_stride: Option<usize>,
}

impl<T: Real> EvolveConfig<T> {
    pub fn new(eps: T, t_end: T) -> Self {
        Self {
            eps,
            t_end,
            reaction: Reaction::Feps,
            dt: None,
            snapshot_stride: None,
        }
    }
}

/// Per-step record: `∫|∂ₜu|²` over the step and `∫u²` at its end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLogEntry<T> {
    pub t: T,
    pub dtu2: T,
    pub u2: T,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub snapshots: Vec<GridField<T>>,
    pub eps: T,
    pub params: ModelParams<T>,
    pub reaction: Reaction,
    pub dt: T,
    pub stride: usize,
    pub energy_log: Vec<EnergyLogEntry<T>>,
    /// Largest clip applied by the reaction update.
    pub max_clip: T,
    /// Largest sup norm over all steps.
    pub max_sup: T,
}

impl<T: Real> Trajectory<T> {
    pub fn initial(&self) -> &GridField<T> {
        &self.snapshots[0]
    }

    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn t_end(&self) -> T {
        self.snapshots.last().map(|s| s.t).unwrap_or(T::zero())
    }

    /// Index of the snapshot closest to `t`.
    pub fn nearest(&self, t: T) -> usize {
        let i = self.snapshots.partition_point(|s| s.t < t);
        if i == 0 {
            return 0;
        }
        if i >= self.snapshots.len() {
            return self.snapshots.len() - 1;
        }
        if (self.snapshots[i].t - t) < (t - self.snapshots[i - 1].t) {
            i
        } else {
            i - 1
        }
    }

    /// Linear interpolation in time and space.
    pub fn value_at(&self, x: T, t: T) -> Option<T> {
        let s = &self.snapshots;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|f| f.t < t);
        if i == 0 {
            return Some(s[0].interpolate(x));
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let f = (t - a.t) / (b.t - a.t);
        Some(a.interpolate(x) * (T::one() - f) + b.interpolate(x) * f)
    }
}

/// Repeated `step` with a uniform time step and energy logging.
pub fn evolve<T: Real>(initial: &GridField<T>, params: &ModelParams<T>, config: &EvolveConfig<T>) -> Result<Trajectory<T>> {
    if !(config.t_end > initial.t) {
        return Err(domain("t_end", config.t_end.f64(), "(t_initial, inf)"));
    }
    if initial.values.iter().any(|&u| !(u >= T::zero())) {
        return Err(Error::Precondition("initial data must be nonnegative".into()));
    }
    let grid = &initial.grid;
    let limit = dt_limit(grid, config.eps, params, config.reaction);
    let span = config.t_end - initial.t;
    let dt_req = config.dt.unwrap_or(limit);
    check_dt(grid, dt_req, config.eps, params, config.reaction)?;
    let steps = (span / dt_req).ceil().to_usize().unwrap_or(1).max(1);
    let dt = span / T::from_usize_lossy(steps);
    let stride = config
        .snapshot_stride
        .unwrap_or_else(|| (config.eps * config.eps / dt).floor().to_usize().unwrap_or(1).max(1))
        .max(1);
    let solver = ImplicitDiffusion::new(grid, dt)?;
    let weights = grid.weights();
    let mut traj = Trajectory {
        snapshots: vec![initial.clone()],
        eps: config.eps,
        params: params.clone(),
        reaction: config.reaction,
        dt,
        stride,
        energy_log: Vec::with_capacity(steps),
        max_clip: T::zero(),
        max_sup: initial.max(),
    };
    let mut current = initial.values.clone();
    let mut next = current.clone();
    for k in 1..=steps {
        next.copy_from_slice(&current);
        solver.solve(&mut next);
        let clip = react(&mut next, dt, config.eps, params, config.reaction);
        traj.max_clip = traj.max_clip.max(clip);
        let mut dtu2 = T::zero();
        let mut u2 = T::zero();
        let mut sup = T::zero();
        for ((&w, &a), &b) in weights.iter().zip(&current).zip(&next) {
            let d = (b - a) / dt;
            dtu2 = dtu2 + w * d * d;
            u2 = u2 + w * b * b;
            sup = sup.max(b);
        }
        traj.max_sup = traj.max_sup.max(sup);
        let t = initial.t + dt * T::from_usize_lossy(k);
        traj.energy_log.push(EnergyLogEntry { t, dtu2, u2 });
        std::mem::swap(&mut current, &mut next);
        if k % stride == 0 || k == steps {
            traj.snapshots.push(GridField {
                grid: grid.clone(),
                t: if k == steps { config.t_end } else { t },
                values: current.clone(),
            });
        }
    }
    Ok(traj)
}

/// Runs independent configurations concurrently.
pub fn evolve_sweep<T: Real>(initial: &GridField<T>, params: &ModelParams<T>, configs: &[EvolveConfig<T>]) -> Vec<Result<Trajectory<T>>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || evolve(initial, params, c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Integration("solver thread panicked".into()))))
            .collect()
    })
}

/// Sorted disjoint closed intervals.
pub type Region<T> = Vec<(T, T)>;

/// The sublevel set `{u ≤ θε^β}` of the piecewise-linear interpolant, with the
/// boundary value 0 at `x_max`.
pub fn level_set<T: Real>(field: &GridField<T>, theta: T, eps: T, params: &ModelParams<T>) -> Result<Region<T>> {
    if !(theta > T::zero()) {
        return Err(domain("theta", theta.f64(), "(0, inf)"));
    }
    Ok(sublevel(field, theta * eps.powf(params.beta())))
}

/// `{u ≤ level}` of the piecewise-linear interpolant.
pub fn sublevel<T: Real>(field: &GridField<T>, level: T) -> Region<T> {
    let g = &field.grid;
    let (lo, hi) = g.domain();
    let mut nodes: Vec<(T, T)> = Vec::with_capacity(field.values.len() + 2);
    match g.geometry {
        Geometry::LineSymmetric => nodes.push((lo, T::zero())),
        Geometry::Radial(_) => nodes.push((lo, field.values[0])),
    }
    nodes.extend(g.centers().into_iter().zip(field.values.iter().copied()));
    nodes.push((hi, T::zero()));
    let mut out = Vec::new();
    let mut start = if nodes[0].1 <= level { Some(nodes[0].0) } else { None };
    for w in nodes.windows(2) {
        let ((x0, v0), (x1, v1)) = (w[0], w[1]);
        let (in0, in1) = (v0 <= level, v1 <= level);
        if in0 != in1 {
            let xc = x0 + (level - v0) / (v1 - v0) * (x1 - x0);
            if in1 {
                start = Some(xc);
            } else if let Some(s) = start.take() {
                out.push((s, xc));
            }
        }
    }
    if let Some(s) = start {
        out.push((s, nodes[nodes.len() - 1].0));
    }
    out
}

fn distance_to_region<T: Real>(x: T, r: &[(T, T)]) -> T {
    r.iter()
        .map(|&(a, b)| {
            if x < a {
                a - x
            } else if x > b {
                x - b
            } else {
                T::zero()
            }
        })
        .fold(T::infinity(), T::min)
}

fn directed_hausdorff<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> T {
    let mut best = T::zero();
    for &(p, q) in a {
        let mut cands = vec![p, q];
        for w in b.windows(2) {
            let mid = (w[0].1 + w[1].0) * T::lit(0.5);
            if mid >= p && mid <= q {
                cands.push(mid);
            }
        }
        for x in cands {
            best = best.max(distance_to_region(x, b));
        }
    }
    best
}

/// Result of a Hausdorff comparison; `empty` flags the empty-set convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hausdorff<T> {
    pub distance: T,
    pub empty: bool,
}

/// Symmetric Hausdorff distance between interval unions. If exactly one set is
/// empty the distance is `diameter` and the result is flagged.
pub fn hausdorff_distance<T: Real>(a: &[(T, T)], b: &[(T, T)], diameter: T) -> Hausdorff<T> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Hausdorff { distance: T::zero(), empty: true },
        (true, false) | (false, true) => Hausdorff { distance: diameter, empty: true },
        _ => Hausdorff {
            distance: directed_hausdorff(a, b).max(directed_hausdorff(b, a)),
            empty: false,
        },
    }
}

/// `(‖D²u₀‖∞ + 1)²` from second differences.
pub fn psi_constant<T: Real>(initial: &GridField<T>) -> T {
    let g = &initial.grid;
    let dx = g.dx;
    let mut m = T::zero();
    for i in 0..initial.values.len() as isize {
        let d2 = (initial.ghost(i + 1) - T::lit(2.0) * initial.ghost(i) + initial.ghost(i - 1)) / (dx * dx);
        m = m.max(d2.abs());
        if let Geometry::Radial(_) = g.geometry {
            let d1 = (initial.ghost(i + 1) - initial.ghost(i - 1)) / (T::lit(2.0) * dx);
            m = m.max((d1 / g.x(i as usize)).abs());
        }
    }
    (m + T::one()).powi(2)
}

/// `sup ψ` with `ψ = |∇u|² − 2F_ε(u) − Mu`, and `sup |∇(u^{1/β})|²`.
pub fn monitor_opt_reg_space<T: Real>(field: &GridField<T>, eps: T, params: &ModelParams<T>, big_m: T) -> (T, T) {
    let grad = field.gradient();
    let mut sup_psi = T::neg_infinity();
    for (&g, &u) in grad.iter().zip(&field.values) {
        let psi = g * g - T::lit(2.0) * params.big_f_eps(u, eps) - big_m * u;
        sup_psi = sup_psi.max(psi);
    }
    let inv_beta = T::one() / params.beta();
    let n = field.values.len();
    let root = |i: isize| pos_pow(field.ghost(i).max(T::zero()), inv_beta);
    let mut sup_root = T::zero();
    for i in 0..n as isize {
        let (lo, hi) = (i - 1, i + 1);
        if hi >= n as isize {
            continue;
        }
        if lo < 0 && field.grid.geometry == Geometry::LineSymmetric {
            continue;
        }
        if field.ghost(lo) <= T::zero() || field.ghost(hi) <= T::zero() {
            continue;
        }
        let d = (root(hi) - root(lo)) / (T::lit(2.0) * field.grid.dx);
        sup_root = sup_root.max(d * d);
    }
    (sup_psi, sup_root)
}

/// `sup |∂ₜ(u^{2−γ})|` over snapshots in `window`, on cells at least `margin`
/// away from the outer boundary.
pub fn monitor_opt_reg_time<T: Real>(traj: &Trajectory<T>, window: (T, T), margin: T) -> Result<T> {
    let (t0, t1) = window;
    if !(t0 >= traj.snapshots[0].t && t1 <= traj.t_end() && t0 < t1) {
        return Err(Error::Precondition(format!("window [{t0}, {t1}] is not inside the run")));
    }
    let p = T::lit(2.0) - traj.params.gamma();
    let grid = &traj.snapshots[0].grid;
    let cells: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.x(i);
            let (lo, hi) = grid.domain();
            let near_lo = grid.geometry == Geometry::LineSymmetric && x - lo < margin;
            !near_lo && hi - x >= margin
        })
        .collect();
    let snaps: Vec<&GridField<T>> = traj.snapshots.iter().filter(|s| s.t >= t0 && s.t <= t1).collect();
    if snaps.len() < 2 {
        return Err(Error::InsufficientSnapshots(format!("{} snapshots in [{t0}, {t1}]", snaps.len())));
    }
    let mut sup = T::zero();
    for w in snaps.windows(2) {
        let dt = w[1].t - w[0].t;
        for &i in &cells {
            let d = (pos_pow(w[1].values[i], p) - pos_pow(w[0].values[i], p)) / dt;
            sup = sup.max(d.abs());
        }
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthKind {
    /// Centre in `{u ≤ θε^β}`, sup over `Q_r`.
    Growth,
    /// Centre in `{u ≥ θε^β}`, sup over `Q_r^−`.
    NonDegeneracy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthSample<T> {
    pub x: T,
    pub t: T,
    pub kind: GrowthKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRow<T> {
    pub x: T,
    pub t: T,
    pub kind: GrowthKind,
    pub r: T,
    pub sup: T,
    pub ratio: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthTable<T> {
    pub rows: Vec<GrowthRow<T>>,
    pub max_growth_ratio: Option<T>,
    pub min_nondeg_ratio: Option<T>,
}

/// Dyadic radii `1/4, 1/8, …` down to `2dx`.
pub fn dyadic_radii<T: Real>(grid: &Grid<T>) -> Vec<T> {
    let mut r = T::lit(0.25);
    let mut out = Vec::new();
    while r >= T::lit(2.0) * grid.dx {
        out.push(r);
        r = r * T::lit(0.5);
    }
    out
}

/// Sup over discrete parabolic cylinders divided by `(ε² + r²)^{1/(2−γ)}`.
/// Samples outside their level set are skipped; none valid is an error.
pub fn monitor_growth_nondeg<T: Real>(traj: &Trajectory<T>, theta: T, samples: &[GrowthSample<T>]) -> Result<GrowthTable<T>> {
    let params = &traj.params;
    let level = theta * traj.eps.powf(params.beta());
    let grid = &traj.snapshots[0].grid;
    let radii = dyadic_radii(grid);
    let expo = T::one() / (T::lit(2.0) - params.gamma());
    let mut table = GrowthTable {
        rows: Vec::new(),
        max_growth_ratio: None,
        min_nondeg_ratio: None,
    };
    for s in samples {
        let k = traj.nearest(s.t);
        let i = grid.cell_of(s.x);
        let (x0, t0) = (grid.x(i), traj.snapshots[k].t);
        let u0 = traj.snapshots[k].values[i];
        let valid = match s.kind {
            GrowthKind::Growth => u0 <= level,
            GrowthKind::NonDegeneracy => u0 >= level,
        };
        if !valid {
            continue;
        }
        for &r in &radii {
            let t_hi = match s.kind {
                GrowthKind::Growth => t0 + r * r,
                GrowthKind::NonDegeneracy => t0,
            };
            let mut sup = T::zero();
            for snap in traj.snapshots.iter().filter(|f| f.t > t0 - r * r && f.t <= t_hi) {
                for (j, &u) in snap.values.iter().enumerate() {
                    if (grid.x(j) - x0).abs() < r {
                        sup = sup.max(u);
                    }
                }
            }
            let ratio = sup / (traj.eps * traj.eps + r * r).powf(expo);
            match s.kind {
                GrowthKind::Growth => table.max_growth_ratio = Some(table.max_growth_ratio.map_or(ratio, |m: T| m.max(ratio))),
                GrowthKind::NonDegeneracy => table.min_nondeg_ratio = Some(table.min_nondeg_ratio.map_or(ratio, |m: T| m.min(ratio))),
            }
            table.rows.push(GrowthRow {
                x: x0,
                t: t0,
                kind: s.kind,
                r,
                sup,
                ratio,
            });
        }
    }
    if table.rows.is_empty() {
        return Err(Error::Precondition("no valid sample point".into()));
    }
    Ok(table)
}

/// Cells adjacent to the boundary of `{u ≤ θε^β}` at the snapshots nearest `times`.
pub fn fb_sample_points<T: Real>(traj: &Trajectory<T>, theta: T, times: &[T]) -> Vec<GrowthSample<T>> {
    let level = theta * traj.eps.powf(traj.params.beta());
    let mut out = Vec::new();
    for &t in times {
        let snap = &traj.snapshots[traj.nearest(t)];
        let v = &snap.values;
        for i in 0..v.len().saturating_sub(1) {
            let (a, b) = (v[i] <= level, v[i + 1] <= level);
            if a != b {
                let (low, high) = if a { (i, i + 1) } else { (i + 1, i) };
                out.push(GrowthSample {
                    x: snap.grid.x(low),
                    t: snap.t,
                    kind: GrowthKind::Growth,
                });
                out.push(GrowthSample {
                    x: snap.grid.x(high),
                    t: snap.t,
                    kind: GrowthKind::NonDegeneracy,
                });
            }
        }
    }
    out
}

/// Spacetime quadratures of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport<T> {
    /// `∫_Q |∂ₜu|²` summed over steps.
    pub dtu2: T,
    /// Trapezoidal `∫∫u²`, `∫∫|∇u|²`, `∫∫F_ε(u)` over snapshots.
    pub u2: T,
    pub grad2: T,
    pub big_f: T,
    pub max_u2: T,
    pub initial_u2: T,
    /// `‖u₀‖²_{H¹} + 2‖u₀^γ‖_{L¹}`.
    pub bound: T,
    /// `dtu2 ≤ 1.1·bound`.
    pub bound_holds: bool,
    /// `max_t ∫u² ≤ ∫u₀²`.
    pub l2_decay_holds: bool,
}

pub fn energy_report<T: Real>(traj: &Trajectory<T>) -> EnergyReport<T> {
    let p = &traj.params;
    let u0 = traj.initial();
    let initial_u2 = u0.integral(|u| u * u);
    let bound = initial_u2 + u0.dirichlet_energy() + T::lit(2.0) * u0.integral(|u| pos_pow(u, p.gamma()));
    let dtu2: T = traj.energy_log.iter().map(|e| e.dtu2).sum::<T>() * traj.dt;
    let max_u2 = traj.energy_log.iter().map(|e| e.u2).fold(initial_u2, T::max);
    let mut acc = [T::zero(); 3];
    let vals = |f: &GridField<T>| {
        [
            f.integral(|u| u * u),
            f.dirichlet_energy(),
            f.integral(|u| reaction_primitive(p, traj.reaction, u, traj.eps)),
        ]
    };
    let mut prev = vals(u0);
    for w in traj.snapshots.windows(2) {
        let cur = vals(&w[1]);
        let h = (w[1].t - w[0].t) * T::lit(0.5);
        for j in 0..3 {
            acc[j] = acc[j] + h * (prev[j] + cur[j]);
        }
        prev = cur;
    }
    EnergyReport {
        dtu2,
        u2: acc[0],
        grad2: acc[1],
        big_f: acc[2],
        max_u2,
        initial_u2,
        bound,
        bound_holds: dtu2 <= bound * T::lit(1.1),
        l2_decay_holds: max_u2 <= initial_u2 * (T::one() + T::lit(1e-12)),
    }
}

/// Support barrier from the ε-level explicit solutions:
/// `u ≤ min{T_ε(t − t₀), ψ_ε(a₀ − |x − c|)}` with
/// `T_ε(s) = (ε² − (2γ/β)s)^{β/2}` and `ψ_ε(z) = (ε + (√2/β)z)^β` for `s < 0`, `z > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierEnvelope<T> {
    pub center: T,
    pub eps: T,
    pub gamma: T,
    pub beta: T,
    /// Time at which `T_ε` reaches `ε^β`.
    pub t0: T,
    pub a0: T,
}

impl<T: Real> BarrierEnvelope<T> {
    pub fn new(initial: &GridField<T>, params: &ModelParams<T>, eps: T, center: T, radius: T) -> Result<Self> {
        let gamma = params.gamma();
        if !(gamma > T::zero()) {
            return Err(Error::Unsupported {
                func: "barrier_envelope",
                detail: "the space-independent barrier needs gamma > 0".into(),
            });
        }
        let beta = params.beta();
        let two_over_beta = T::lit(2.0) / beta;
        let t0 = beta / (T::lit(2.0) * gamma) * (initial.max().powf(two_over_beta) - eps * eps);
        let k = beta / T::SQRT_2();
        let mut a0 = radius;
        for (x, &u) in initial.grid.centers().into_iter().zip(&initial.values) {
            if u > T::zero() {
                a0 = a0.max((x - center).abs() + k * u.powf(T::one() / beta));
            }
        }
        Ok(Self {
            center,
            eps,
            gamma,
            beta,
            t0,
            a0,
        })
    }

    /// `min{T_ε, ψ_ε}` with both capped at `ε^β` past their fronts.
    pub fn bound(&self, x: T, t: T) -> T {
        let cap = self.eps.powf(self.beta);
        let s = t - self.t0;
        let time = if s < T::zero() {
            (self.eps * self.eps - T::lit(2.0) * self.gamma / self.beta * s).powf(self.beta * T::lit(0.5))
        } else {
            cap
        };
        let z = self.a0 - (x - self.center).abs();
        let space = if z > T::zero() { (self.eps + T::SQRT_2() / self.beta * z).powf(self.beta) } else { cap };
        time.min(space)
    }

    /// Radius of `{u > ε^β}` allowed at time `t`; `None` once the set must be empty.
    pub fn radius(&self, t: T) -> Option<T> {
        if t < self.t0 {
            Some(self.a0)
        } else {
            None
        }
    }
}

/// `sup |x − c|` over cells with `u > level`.
pub fn support_radius<T: Real>(field: &GridField<T>, level: T, center: T) -> Option<T> {
    field
        .grid
        .centers()
        .into_iter()
        .zip(&field.values)
        .filter(|(_, &u)| u > level)
        .map(|(x, _)| (x - center).abs())
        .fold(None, |m: Option<T>, d| Some(m.map_or(d, |m| m.max(d))))
}

/// `u₀ ≤ M·G(x − c, T)` with the heat kernel `G`, `T` chosen to minimize `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFit<T> {
    pub m: T,
    pub t_shift: T,
    pub center: T,
    pub dim: usize,
}

impl<T: Real> GaussianFit<T> {
    pub fn kernel(dim: usize, x: T, t: T) -> T {
        let n = T::from_usize_lossy(dim);
        (T::lit(4.0) * T::PI() * t).powf(-n * T::lit(0.5)) * (-x * x / (T::lit(4.0) * t)).exp()
    }

    pub fn fit(initial: &GridField<T>, center: T) -> Result<Self> {
        let dim = initial.grid.dim();
        let r = support_radius(initial, T::zero(), center).ok_or_else(|| Error::Precondition("initial data vanish identically".into()))?;
        let r = r.max(initial.grid.dx);
        let xs = initial.grid.centers();
        let mut best: Option<(T, T)> = None;
        for k in -24..=24 {
            let t = r * r * T::lit(2f64.powf(k as f64 / 4.0));
            let m = xs
                .iter()
                .zip(&initial.values)
                .filter(|(_, &u)| u > T::zero())
                .map(|(&x, &u)| u / Self::kernel(dim, x - center, t))
                .fold(T::zero(), T::max);
            if m.is_finite() && best.is_none_or(|(bm, _)| m < bm) {
                best = Some((m, t));
            }
        }
        let (m, t_shift) = best.ok_or_else(|| Error::Precondition("no finite Gaussian majorant".into()))?;
        Ok(Self { m, t_shift, center, dim })
    }

    pub fn value(&self, x: T, t: T) -> T {
        self.m * Self::kernel(self.dim, x - self.center, t + self.t_shift)
    }

    /// `max (u − MG)` over all snapshots, relative to `max u₀`.
    pub fn excess(&self, traj: &Trajectory<T>) -> T {
        let top = traj.initial().max();
        let mut worst = T::neg_infinity();
        for s in &traj.snapshots {
            for (x, &u) in s.grid.centers().into_iter().zip(&s.values) {
                worst = worst.max((u - self.value(x, s.t)) / top);
            }
        }
        worst
    }

    /// `max_t MG(x_max, t)/max u₀`, the truncation indicator.
    pub fn boundary_ratio(&self, traj: &Trajectory<T>) -> T {
        let g = &traj.initial().grid;
        let top = traj.initial().max();
        traj.snapshots
            .iter()
            .map(|s| {
                let (lo, hi) = g.domain();
                let far = (hi - self.center).abs().min(if g.geometry == Geometry::LineSymmetric { (self.center - lo).abs() } else { hi });
                self.value(self.center + far, s.t) / top
            })
            .fold(T::zero(), T::max)
    }
}

/// Parameters of the reference bump run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRun<T> {
    pub gamma: T,
    pub bump_radius: T,
    pub bump_height: T,
    pub t_end: T,
    pub dx: T,
    /// Upper bound on the snapshot spacing (the stride also stays within `ε²`).
    pub snapshot_spacing: T,
    /// Gaussian truncation indicator the domain half-width is chosen for.
    pub truncation_tol: T,
}

impl<T: Real> ReferenceRun<T> {
    /// `γ = 1/2`, cubic bump of radius 1.5 and height 3 at the origin, `t ∈ [0, 1]`, `dx = 0.02`.
    pub fn standard() -> Self {
        Self {
            gamma: T::lit(0.5),
            bump_radius: T::lit(1.5),
            bump_height: T::lit(3.0),
            t_end: T::one(),
            dx: T::lit(0.02),
            snapshot_spacing: T::lit(1e-3),
            truncation_tol: T::lit(1e-12),
        }
    }

    /// Smallest multiple of 0.5 beyond the bump at which the Gaussian majorant
    /// stays below `truncation_tol·max u₀` up to `t_end`.
    pub fn half_width(&self) -> Result<T> {
        let probe_half = self.bump_radius + T::lit(4.0) * self.dx;
        let probe = Grid::with_spacing(Geometry::LineSymmetric, probe_half, self.dx)?;
        let u0 = make_initial_bump(&probe, T::zero(), self.bump_radius, self.bump_height)?;
        let fit = GaussianFit::fit(&u0, T::zero())?;
        let top = u0.max();
        let (lo, hi) = (fit.t_shift, fit.t_shift + self.t_end);
        let mut x = (self.bump_radius * T::lit(2.0)).ceil() * T::lit(0.5) + T::lit(0.5);
        for _ in 0..400 {
            let tau = (x * x * T::lit(0.5)).max(lo).min(hi);
            if fit.m * GaussianFit::kernel(1, x, tau) / top < self.truncation_tol {
                return Ok(x);
            }
            x = x + T::lit(0.5);
        }
        Err(Error::Precondition("no truncation width below 200".into()))
    }

    pub fn run(&self, eps: T) -> Result<Trajectory<T>> {
        let params = ModelParams::new(self.gamma)?;
        let grid = Grid::with_spacing(Geometry::LineSymmetric, self.half_width()?, self.dx)?;
        let u0 = make_initial_bump(&grid, T::zero(), self.bump_radius, self.bump_height)?;
        let mut cfg = EvolveConfig::new(eps, self.t_end);
        let dt = dt_limit(&grid, eps, &params, cfg.reaction);
        let spacing = self.snapshot_spacing.min(eps * eps);
        cfg.snapshot_stride = Some((spacing / dt).floor().to_usize().unwrap_or(1).max(1));
        evolve(&u0, &params, &cfg)
    }
}

/// [`ReferenceRun::standard`] at regularization `eps`.
pub fn reference_bump_run<T: Real>(eps: T) -> Result<Trajectory<T>> {
    ReferenceRun::standard().run(eps)
}

/// Flat data `A` on `[−10, 10]` with cell count `m`, compared at the centre
/// against `u^{2−γ} = A^{2−γ} − γ(2−γ)t`. Returns the run and the largest error.
pub fn flat_data_run<T: Real>(gamma: T, a: T, eps: T, t_end: T, m: usize) -> Result<(Trajectory<T>, T)> {
    let params = ModelParams::new(gamma)?;
    if !(a >= eps.powf(params.beta())) {
        return Err(Error::Precondition("flat data must be at least eps^beta".into()));
    }
    let grid = Grid::new(Geometry::LineSymmetric, T::lit(10.0), m)?;
    let u0 = GridField::from_fn(&grid, T::zero(), |_| a);
    let traj = evolve(&u0, &params, &EvolveConfig::new(eps, t_end))?;
    let mid = grid.cell_of(T::zero());
    let p = T::lit(2.0) - gamma;
    let mut worst = T::zero();
    for s in &traj.snapshots {
        let base = a.powf(p) - gamma * p * s.t;
        let exact = pos_pow(base, T::one() / p);
        if exact >= eps.powf(params.beta()) {
            worst = worst.max((s.values[mid] - exact).abs());
        }
    }
    Ok((traj, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(m: usize) -> Grid<f64> {
        Grid::new(Geometry::LineSymmetric, 3.0, m).unwrap()
    }

    #[test]
    fn bump_values() {
        let g = line(300);
        let u = make_initial_bump(&g, 0.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(u.values[g.cell_of(0.0)], 2.0 * (1.0 - (0.005f64).powi(2)).powi(3), max_relative = 1e-12);
        assert!(u.integral(|v| v) > 0.0);
        assert!(make_initial_bump(&g, 2.5, 1.0, 1.0).is_err());
        let edge = g.cell_of(1.0);
        assert!(u.values[edge] < 1e-5 && u.values[edge + 1] == 0.0);
    }

    #[test]
    fn zero_stays_zero_and_cfl() {
        let g = line(128);
        let p = ModelParams::new(0.5).unwrap();
        let z = GridField::zeros(&g);
        let dt = dt_limit(&g, 0.1, &p, Reaction::Feps);
        let s = step(&z, dt, 0.1, &p, Reaction::Feps).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert!(matches!(step(&z, dt * 1.01, 0.1, &p, Reaction::Feps), Err(Error::Cfl { .. })));
    }

    #[test]
    fn flat_data_oracle_and_time_convergence() {
        let (_, e1) = flat_data_run(0.5, 1.0, 0.1, 0.5, 200).unwrap();
        let (traj, e2) = flat_data_run(0.5, 1.0, 0.1, 0.5, 400).unwrap();
        assert!(e1 < 1e-4, "{e1}");
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        let sup = monitor_opt_reg_time(&traj, (0.1, 0.4), 5.0).unwrap();
        assert_relative_eq!(sup, 0.75, max_relative = 1e-2);
    }

    #[test]
    fn radial_laplacian_is_exact_on_quadratics() {
        for n in [1usize, 2, 3] {
            let g: Grid<f64> = Grid::new(Geometry::Radial(n), 1.0, 100).unwrap();
            let coeffs = g.laplacian();
            for i in 0..g.len() - 1 {
                let (a, b) = coeffs[i];
                let u = |j: isize| {
                    let j = if j < 0 { 0 } else { j as usize };
                    g.x(j).powi(2)
                };
                let l = a * (u(i as isize - 1) - u(i as isize)) + b * (u(i as isize + 1) - u(i as isize));
                assert!((l - 2.0 * n as f64).abs() < 1e-8 * (1.0 + 2.0 * n as f64), "n={n} i={i} {l}");
            }
        }
    }

    #[test]
    fn level_sets_and_hausdorff() {
        let g = line(100);
        let z = GridField::zeros(&g);
        let p = ModelParams::new(0.5).unwrap();
        assert_eq!(level_set(&z, 1.0, 0.1, &p).unwrap(), vec![(-3.0, 3.0)]);
        let lvl = 0.1f64.powf(p.beta());
        let full = GridField::from_fn(&g, 0.0, |_| 2.0 * lvl);
        assert_eq!(sublevel(&full, lvl).len(), 2);
        let r = hausdorff_distance(&[(0.0, 1.0)], &[(0.5, 1.5)], 6.0);
        assert_eq!(r.distance, 0.5);
        assert_eq!(hausdorff_distance(&[(0.0, 1.0)], &[(0.0, 1.0)], 6.0).distance, 0.0);
        let gap = hausdorff_distance(&[(0.0, 4.0)], &[(0.0, 1.0), (3.0, 4.0)], 6.0);
        assert_eq!(gap.distance, 1.0);
        let e = hausdorff_distance(&[], &[(0.0, 1.0)], 6.0);
        assert!(e.empty && e.distance == 6.0);
    }

    #[test]
    fn homogeneous_profile_monitors() {
        let p = ModelParams::new(0.5).unwrap();
        let g = line(600);
        let cb = p.c_beta();
        let f = GridField::from_fn(&g, 0.0, |x| cb * pos_pow(x, p.beta()));
        let (_, root) = monitor_opt_reg_space(&f, 1e-6, &p, 1.0);
        assert_relative_eq!(root, 2.0 / (p.beta() * p.beta()), max_relative = 1e-9);
        let (psi, root0) = monitor_opt_reg_space(&GridField::zeros(&g), 0.1, &p, 1.0);
        assert_eq!((psi, root0), (0.0, 0.0));
    }
}
