//! `evolve` writes a run directory; `weiss` reads one back.
//!
//! Layout: `<run>/config`, `<run>/times.csv` (k, t), `<run>/snapshots/<k>.csv` (x, u),
//! `<run>/summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use freebound::solver::{
    dt_limit, energy_report, evolve as run_evolve, fb_sample_points, make_initial_bump, monitor_growth_nondeg, monitor_opt_reg_space,
    monitor_opt_reg_time, psi_constant, support_radius, EvolveConfig, Geometry, Grid, GridField, Reaction, ReferenceRun, Trajectory,
};
use freebound::weiss::{geometric_radii, monotonicity_audit, Center};
use freebound::ModelParams;

use crate::config::{parse_config, ConfigError, RunConfig, Value, EVOLVE_SCHEMA};
use crate::output::{emit_csv, emit_json, output_dir, read_csv, read_json, Table};
use crate::{EvolveArgs, UsageError, WeissArgs};

const SNAPSHOT_SPACING: f64 = 1e-3;
const TRUNCATION_TOL: f64 = 1e-12;
/// Level-set factor θ for the growth monitors.
const GROWTH_THETA: f64 = 1.0;

fn usage(errors: &[ConfigError], source: &Path) -> anyhow::Error {
    let mut msg = format!("invalid config {}:\n", source.display());
    for e in errors {
        msg.push_str(&format!("  {e}\n"));
    }
    msg.push_str(&EVOLVE_SCHEMA.to_string());
    UsageError(msg).into()
}

fn geometry_of(cfg: &RunConfig) -> Geometry {
    match cfg.choice("geometry") {
        Some("radial") => Geometry::Radial(cfg.count("dim").unwrap_or(1)),
        _ => Geometry::LineSymmetric,
    }
}

fn reaction_of(cfg: &RunConfig) -> Reaction {
    match cfg.choice("reaction") {
        Some("phillips") => Reaction::Phillips,
        _ => Reaction::Feps,
    }
}

fn cross_checks(cfg: &RunConfig) -> Vec<ConfigError> {
    let mut errs = Vec::new();
    let radial = cfg.choice("geometry") == Some("radial");
    if radial && cfg.real("bump_center") != Some(0.0) {
        errs.push(ConfigError::Invalid("geometry=radial needs bump_center=0".into()));
    }
    if radial && cfg.real("x_max").is_none() {
        errs.push(ConfigError::Invalid("geometry=radial needs an explicit x_max".into()));
    }
    if !radial && cfg.count("dim") != Some(1) {
        errs.push(ConfigError::Invalid("dim applies to geometry=radial only".into()));
    }
    errs
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = parse_config(&text, &EVOLVE_SCHEMA).map_err(|e| usage(&e, path))?;
    let errs = cross_checks(&cfg);
    if !errs.is_empty() {
        return Err(usage(&errs, path));
    }
    Ok(cfg)
}

fn real(cfg: &RunConfig, key: &str) -> f64 {
    cfg.real(key).unwrap_or_else(|| panic!("`{key}` has a schema default"))
}

/// Half-width from the Gaussian truncation rule, shifted by the bump centre.
fn truncation_half_width(cfg: &RunConfig) -> Result<f64> {
    let rr = ReferenceRun {
        gamma: real(cfg, "gamma"),
        bump_radius: real(cfg, "bump_radius"),
        bump_height: real(cfg, "bump_height"),
        t_end: real(cfg, "t_end"),
        dx: real(cfg, "dx"),
        snapshot_spacing: SNAPSHOT_SPACING,
        truncation_tol: TRUNCATION_TOL,
    };
    Ok(rr.half_width()? + real(cfg, "bump_center").abs())
}

fn snapshot_path(dir: &Path, k: usize) -> PathBuf {
    dir.join("snapshots").join(format!("{k:06}.csv"))
}

pub fn evolve(args: &EvolveArgs) -> Result<bool> {
    let mut cfg = load_config(&args.config)?;
    let gamma = real(&cfg, "gamma");
    let eps = real(&cfg, "eps");
    let params = ModelParams::new(gamma)?;
    let geometry = geometry_of(&cfg);
    let x_max = match cfg.real("x_max") {
        Some(x) => x,
        None => {
            let x = truncation_half_width(&cfg)?;
            cfg.values.insert("x_max".into(), Value::Real(x));
            x
        }
    };
    let grid = Grid::with_spacing(geometry, x_max, real(&cfg, "dx"))?;
    let center = real(&cfg, "bump_center");
    let u0 = make_initial_bump(&grid, center, real(&cfg, "bump_radius"), real(&cfg, "bump_height"))?;
    let mut ec = EvolveConfig::new(eps, real(&cfg, "t_end"));
    ec.reaction = reaction_of(&cfg);
    ec.dt = cfg.real("dt");
    let dt = ec.dt.unwrap_or_else(|| dt_limit(&grid, eps, &params, ec.reaction));
    ec.snapshot_stride = Some(match cfg.count("stride") {
        Some(s) => s,
        None => ((SNAPSHOT_SPACING.min(eps * eps) / dt).floor() as usize).max(1),
    });
    let traj = run_evolve(&u0, &params, &ec)?;

    let dir = args.out.clone().or_else(|| cfg.out().cloned()).unwrap_or_else(|| output_dir(None, "evolve"));
    fs::create_dir_all(dir.join("snapshots")).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config"), cfg.to_text()).with_context(|| format!("writing {}", dir.join("config").display()))?;
    let xs = grid.centers();
    let mut times = Table::new(&["k", "t"]);
    for (k, s) in traj.snapshots.iter().enumerate() {
        let mut t = Table::new(&["x", "u"]);
        for (&x, &u) in xs.iter().zip(&s.values) {
            t.push(vec![x, u]);
        }
        emit_csv(&t, &snapshot_path(&dir, k))?;
        times.push(vec![k as f64, s.t]);
    }
    emit_csv(&times, &dir.join("times.csv"))?;
    emit_json(&run_summary(&cfg, &traj, center)?, &dir.join("summary.json"))?;
    println!(
        "evolved {} steps of dt = {:.3e} to t = {}, {} snapshots",
        traj.energy_log.len(),
        traj.dt,
        traj.t_end(),
        traj.snapshots.len()
    );
    println!("wrote {}", dir.display());
    Ok(true)
}

fn run_summary(cfg: &RunConfig, traj: &Trajectory<f64>, center: f64) -> Result<serde_json::Value> {
    let u0 = traj.initial();
    let grid = &u0.grid;
    let params = &traj.params;
    let e = energy_report(traj);
    let big_m = psi_constant(u0);
    let (mut psi, mut root) = (f64::NEG_INFINITY, 0.0f64);
    for s in &traj.snapshots {
        let (p, r) = monitor_opt_reg_space(s, traj.eps, params, big_m);
        psi = psi.max(p);
        root = root.max(r);
    }
    let t_end = traj.t_end();
    let time_reg = monitor_opt_reg_time(traj, (0.25 * t_end, t_end), 0.1 * grid.x_max).ok();
    let samples = fb_sample_points(traj, GROWTH_THETA, &[0.25 * t_end, 0.5 * t_end, 0.75 * t_end]);
    let growth = monitor_growth_nondeg(traj, GROWTH_THETA, &samples).ok();
    let level = traj.eps.powf(params.beta());
    let support: Vec<[f64; 2]> = traj
        .snapshots
        .iter()
        .map(|s| [s.t, support_radius(s, level, center).unwrap_or(0.0)])
        .collect();
    let (geometry, dim) = match grid.geometry {
        Geometry::LineSymmetric => ("line", 1),
        Geometry::Radial(n) => ("radial", n),
    };
    Ok(json!({
        "gamma": params.gamma(),
        "eps": traj.eps,
        "seed": cfg.seed(),
        "grid": {"geometry": geometry, "dim": dim, "x_max": grid.x_max, "m": grid.m, "dx": grid.dx},
        "dt": traj.dt,
        "stride": traj.stride,
        "steps": traj.energy_log.len(),
        "snapshots": traj.snapshots.len(),
        "max_clip": traj.max_clip,
        "max_sup": traj.max_sup,
        "energy": {
            "dtu2": e.dtu2,
            "u2": e.u2,
            "grad2": e.grad2,
            "big_f": e.big_f,
            "max_u2": e.max_u2,
            "initial_u2": e.initial_u2,
            "bound": e.bound,
            "bound_holds": e.bound_holds,
            "l2_decay_holds": e.l2_decay_holds,
        },
        "monitors": {
            "psi_constant": big_m,
            "sup_psi": psi,
            "sup_root_gradient_sq": root,
            "time_regularity": time_reg,
            "max_growth_ratio": growth.as_ref().and_then(|g| g.max_growth_ratio),
            "min_nondeg_ratio": growth.as_ref().and_then(|g| g.min_nondeg_ratio),
        },
        "support_level": level,
        "support_radii": support,
    }))
}

/// Rebuilds the trajectory stored in a run directory.
pub fn load_run(dir: &Path) -> Result<(RunConfig, Trajectory<f64>)> {
    let cfg = load_config(&dir.join("config"))?;
    let summary = read_json(&dir.join("summary.json"))?;
    let g = &summary["grid"];
    let x_max = g["x_max"].as_f64().context("summary.json: grid.x_max")?;
    let m = g["m"].as_u64().context("summary.json: grid.m")? as usize;
    let grid = Grid::new(geometry_of(&cfg), x_max, m)?;
    let times = read_csv(&dir.join("times.csv"))?.column("t").context("times.csv has no `t` column")?;
    let xs = grid.centers();
    let mut snaps = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let path = snapshot_path(dir, k);
        let table = read_csv(&path)?;
        let (Some(x), Some(u)) = (table.column("x"), table.column("u")) else {
            bail!("{}: expected columns x, u", path.display());
        };
        if x.len() != xs.len() || x.iter().zip(&xs).any(|(a, b)| (a - b).abs() > 1e-9 * x_max) {
            bail!("{}: cells do not match the grid in summary.json", path.display());
        }
        snaps.push(GridField { grid: grid.clone(), t, values: u });
    }
    let params = ModelParams::new(real(&cfg, "gamma"))?;
    let mut traj = Trajectory::from_snapshots(snaps, real(&cfg, "eps"), params)?;
    traj.reaction = reaction_of(&cfg);
    Ok((cfg, traj))
}

pub fn weiss(args: &WeissArgs) -> Result<bool> {
    let (_, traj) = load_run(&args.run)?;
    let dx = traj.initial().grid.dx;
    let t0 = args.t0.unwrap_or(0.8 * traj.t_end());
    let r_min = args.r_min.unwrap_or(4.0 * dx);
    let r_max = args.r_max.unwrap_or((0.45 * t0.max(0.0).sqrt()).min(0.4));
    if !(r_min > 0.0 && r_max > r_min) || args.count < 2 {
        return Err(UsageError(format!("need 0 < r_min < r_max and count >= 2, got r_min = {r_min}, r_max = {r_max}, count = {}", args.count)).into());
    }
    let center = Center { x: args.x0, t: t0 };
    let audit = monotonicity_audit(&traj, center, &geometric_radii(r_min, r_max, args.count))?;
    let out = args.out.clone().unwrap_or_else(|| args.run.clone());
    let mut table = Table::new(&["r", "W", "z_term", "h_term"]);
    for s in &audit.samples {
        table.push(vec![s.r, s.w, s.z_term, s.h_term]);
    }
    emit_csv(&table, &out.join("weiss.csv"))?;
    let nonneg = audit.samples.iter().all(|s| s.z_term >= 0.0 && s.h_term >= 0.0);
    emit_json(
        &json!({
            "center": {"x": center.x, "t": center.t},
            "r_min": r_min,
            "r_max": r_max,
            "count": args.count,
            "defect": audit.defect,
            "relative_defect": audit.relative_defect,
            "max_decrease": audit.max_decrease,
            "terms_nonnegative": nonneg,
        }),
        &out.join("weiss.json"),
    )?;
    println!(
        "Weiss audit at ({}, {}): W from {:.6} to {:.6}, largest decrease {:.2e}, identity defect {:.2e} relative",
        center.x,
        center.t,
        audit.samples.first().map_or(f64::NAN, |s| s.w),
        audit.samples.last().map_or(f64::NAN, |s| s.w),
        audit.max_decrease,
        audit.relative_defect
    );
    println!("wrote {}", out.display());
    Ok(true)
}
