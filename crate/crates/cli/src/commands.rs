use anyhow::Result;
use serde_json::json;

use freebound::acceptance::{run_criteria_seeded, CRITERIA};
use freebound::roots::refine_root;
use freebound::self_similar::{default_ell_grid, forward_profile, shrinker_gamma0, shrinker_gamma1_scan, shrinker_sweep, ForwardMethod};
use freebound::special::{gamma_fn, kummer_m, kummer_m_prime, kummer_sign_changes, tricomi_u, tricomi_u_prime};
use freebound::traveling_wave::{admissible_profile, colliding_tw, fb_slope_check, Sign};
use freebound::{beta_of_gamma, Error, ModelParams};

use crate::output::{emit_csv, emit_json, output_dir, Table};
use crate::{CollideArgs, ForwardArgs, MethodArg, ShrinkerArgs, SignArg, SpecialArgs, SpecialFn, TwArgs, UsageError, VerifyArgs};

fn required(v: Option<f64>, flag: &str, func: &str) -> Result<f64> {
    v.ok_or_else(|| UsageError(format!("--fn {func} needs --{flag}")).into())
}

fn nan_if_none(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

pub fn special(args: &SpecialArgs) -> Result<bool> {
    let value = match args.func {
        SpecialFn::M | SpecialFn::U => {
            let name = if args.func == SpecialFn::M { "M" } else { "U" };
            let (a, b, s) = (required(args.a, "a", name)?, required(args.b, "b", name)?, required(args.s, "s", name)?);
            match (args.func, args.derivative) {
                (SpecialFn::M, false) => kummer_m(a, b, s)?,
                (SpecialFn::M, true) => kummer_m_prime(a, b, s)?,
                (_, false) => tricomi_u(a, b, s)?,
                (_, true) => tricomi_u_prime(a, b, s)?,
            }
        }
        SpecialFn::Gamma => gamma_fn(required(args.s, "s", "gamma")?)?,
        SpecialFn::Zero => {
            let (a, b) = (required(args.a, "a", "zero")?, required(args.b, "b", "zero")?);
            let s_max = args.s.unwrap_or(1000.0);
            let brackets = kummer_sign_changes(a, b, s_max)?;
            let &(lo, hi) = brackets
                .first()
                .ok_or_else(|| Error::BracketNotFound(format!("M({a}, {b}, s), s in (0, {s_max}]")))?;
            refine_root(|x| kummer_m(a, b, x), lo, hi)?
        }
    };
    println!("{value}");
    Ok(true)
}

fn profile_table<'a>(r: &'a [f64], u: &'a [f64], du: &'a [f64]) -> Table {
    let mut t = Table::new(&["r", "U", "dU"]);
    for ((&r, &u), &du) in r.iter().zip(u).zip(du) {
        t.push(vec![r, u, du]);
    }
    t
}

pub fn profile_forward(args: &ForwardArgs) -> Result<bool> {
    let params = ModelParams::new(args.gamma)?;
    let method = match args.method {
        MethodArg::Fb => ForwardMethod::FbExpansion,
        MethodArg::Delta => ForwardMethod::DeltaFamily,
        MethodArg::Explicit => ForwardMethod::Explicit,
    };
    let r_max = args.r_max.unwrap_or(10.0 * args.radius);
    let res = forward_profile(args.gamma, args.n, args.radius, r_max, method)?;
    let dir = output_dir(args.out.as_deref(), "profile-forward");
    let p = &res.profile;
    emit_csv(&profile_table(&p.r, &p.u, &p.du), &dir.join("profile.csv"))?;
    let expected = params.fb_slope();
    let summary = json!({
        "gamma": args.gamma,
        "n": args.n,
        "R": res.big_r,
        "r_max": r_max,
        "method": format!("{:?}", args.method).to_lowercase(),
        "c": res.asymptotic_c,
        "c_from_p_inf": res.c_from_p_inf(),
        "p_inf": res.p_inf,
        "fb_slope": res.fb_slope,
        "fb_slope_expected": expected,
        "defects": {
            "fb_slope": (res.fb_slope - expected).abs(),
            "max_residual": res.max_residual,
        },
    });
    emit_json(&summary, &dir.join("summary.json"))?;
    println!(
        "forward profile gamma={} n={} R={}: c = {}, fb slope {:.12} (expected {:.12}), max residual {:.2e}",
        args.gamma,
        args.n,
        res.big_r,
        res.asymptotic_c.map_or("n/a".to_string(), |c| format!("{c:.12}")),
        res.fb_slope,
        expected,
        res.max_residual
    );
    println!("wrote {}", dir.display());
    Ok(true)
}

pub fn profile_shrinker(args: &ShrinkerArgs) -> Result<bool> {
    let beta = beta_of_gamma(args.gamma)?;
    let dir = output_dir(args.out.as_deref(), "profile-shrinker");
    let ells = if args.ell.is_empty() { default_ell_grid() } else { args.ell.clone() };
    if args.gamma == 0.0 {
        let res = shrinker_gamma0::<f64>(args.n)?;
        let p = &res.profile;
        emit_csv(&profile_table(&p.r, &p.u, &p.du), &dir.join("profile.csv"))?;
        emit_json(
            &json!({"gamma": 0.0, "n": args.n, "exists": true, "R": res.big_r, "ell": res.ell}),
            &dir.join("summary.json"),
        )?;
        println!("gamma=0 shrinker, n={}: R = {:.15}, ell = {}", args.n, res.big_r, res.ell);
        println!("wrote {}", dir.display());
        return Ok(true);
    }
    if args.gamma == 1.0 {
        let scan = shrinker_gamma1_scan(args.n, &ells)?;
        let mut table = Table::new(&["ell", "R", "exponent", "slope_near_fb"]);
        for d in &scan {
            table.push(vec![d.ell, nan_if_none(d.big_r), nan_if_none(d.exponent), nan_if_none(d.slope_near_fb)]);
        }
        emit_csv(&table, &dir.join("scan.csv"))?;
        let no_zero = scan.iter().filter(|d| d.big_r.is_none()).count();
        let exps: Vec<f64> = scan.iter().filter_map(|d| d.exponent).collect();
        let (elo, ehi) = exps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let consistent = scan.iter().all(|d| match d.exponent {
            None => d.big_r.is_none() && d.ell <= 1.0,
            Some(e) => (e + 0.5).abs() <= 0.05,
        });
        emit_json(
            &json!({
                "gamma": 1.0,
                "n": args.n,
                "exists": false,
                "candidates": scan.len(),
                "without_zero": no_zero,
                "exponent_min": if exps.is_empty() { None } else { Some(elo) },
                "exponent_max": if exps.is_empty() { None } else { Some(ehi) },
                "consistent": consistent,
            }),
            &dir.join("summary.json"),
        )?;
        println!("gamma=1, n={}: no shrinking profile meets the free-boundary condition", args.n);
        println!("  {} candidates with ell <= 1 never reach zero", no_zero);
        if !exps.is_empty() {
            println!(
                "  {} candidates with ell > 1: |(U^(1/2))'| ~ h^e near the zero with e in [{elo:.4}, {ehi:.4}], so the slope cannot tend to {:.6}",
                exps.len(),
                (2.0f64).sqrt() / beta
            );
        }
        println!("wrote {}", dir.display());
        if !consistent {
            eprintln!("scan does not support the nonexistence report");
        }
        return Ok(consistent);
    }
    let reports = shrinker_sweep(args.gamma, args.n, &ells, args.tol)?;
    let mut table = Table::new(&["ell", "R", "fb_slope", "defect"]);
    for r in &reports {
        table.push(vec![r.ell, nan_if_none(r.big_r), nan_if_none(r.fb_slope), nan_if_none(r.defect)]);
    }
    emit_csv(&table, &dir.join("sweep.csv"))?;
    let best = reports.iter().filter(|r| r.defect.is_some()).min_by(|a, b| a.defect.partial_cmp(&b.defect).unwrap());
    emit_json(
        &json!({
            "gamma": args.gamma,
            "n": args.n,
            "candidates": reports.len(),
            "reaching_zero": reports.iter().filter(|r| r.big_r.is_some()).count(),
            "best_ell": best.map(|r| r.ell),
            "best_R": best.and_then(|r| r.big_r),
            "best_defect": best.and_then(|r| r.defect),
        }),
        &dir.join("summary.json"),
    )?;
    match best {
        Some(b) => println!(
            "gamma={} n={}: smallest free-boundary defect {:.3e} at ell = {} (R = {})",
            args.gamma,
            args.n,
            b.defect.unwrap_or(f64::NAN),
            b.ell,
            nan_if_none(b.big_r)
        ),
        None => println!("gamma={} n={}: no candidate reaches zero", args.gamma, args.n),
    }
    println!("wrote {}", dir.display());
    Ok(true)
}

fn sign_of(s: SignArg) -> Sign {
    match s {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
    }
}

pub fn tw(args: &TwArgs) -> Result<bool> {
    let p = admissible_profile(args.gamma, args.c, sign_of(args.sign), args.xi_max)?;
    let dir = output_dir(args.out.as_deref(), "tw");
    let mut table = Table::new(&["xi", "phi", "dphi"]);
    for ((&x, &u), &du) in p.xi.iter().zip(&p.phi).zip(&p.dphi) {
        table.push(vec![x, u, du]);
    }
    emit_csv(&table, &dir.join("profile.csv"))?;
    let slope_defect = fb_slope_check(&p)?;
    emit_json(
        &json!({
            "gamma": args.gamma,
            "c": args.c,
            "sign": format!("{:?}", args.sign).to_lowercase(),
            "xi_max": args.xi_max,
            "offset": p.offset,
            "max_residual": p.max_residual,
            "fb_slope_defect": slope_defect,
        }),
        &dir.join("summary.json"),
    )?;
    println!(
        "traveling wave gamma={} c={}: max residual {:.2e}, free-boundary slope defect {:.2e}",
        args.gamma, args.c, p.max_residual, slope_defect
    );
    println!("wrote {}", dir.display());
    Ok(true)
}

pub fn collide(args: &CollideArgs) -> Result<bool> {
    if args.points < 2 {
        return Err(UsageError("--points must be at least 2".into()).into());
    }
    if args.before.iter().any(|&b| !(b > 0.0)) {
        return Err(UsageError("--before times must be positive".into()).into());
    }
    let scene = colliding_tw(args.gamma, args.c1, args.c2, args.xi1, args.xi2, args.xi_max)?;
    let dir = output_dir(args.out.as_deref(), "collide");
    let reach = scene.reach();
    let mut table = Table::new(&["t", "x", "u"]);
    for &b in &args.before {
        let t = scene.t_star - b;
        for k in 0..args.points {
            let x = scene.x_star - reach + 2.0 * reach * k as f64 / (args.points - 1) as f64;
            table.push(vec![t, x, scene.u(x, t)?]);
        }
    }
    emit_csv(&table, &dir.join("fields.csv"))?;
    emit_json(
        &json!({
            "gamma": args.gamma,
            "c1": args.c1,
            "c2": args.c2,
            "xi1": args.xi1,
            "xi2": args.xi2,
            "t_star": scene.t_star,
            "x_star": scene.x_star,
            "opening": scene.opening,
        }),
        &dir.join("scene.json"),
    )?;
    println!("collision at t* = {}, x* = {}, opening {}", scene.t_star, scene.x_star, scene.opening);
    println!("wrote {}", dir.display());
    Ok(true)
}

pub fn verify(args: &VerifyArgs) -> Result<bool> {
    if let Some(bad) = args.only.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(UsageError(format!("unknown criterion {bad}; ids are 1..={}", CRITERIA.len())).into());
    }
    let outcomes = run_criteria_seeded(&args.only, args.seed);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    Ok(passed == outcomes.len())
}
