use freebound::model::ModelParams;
use freebound::self_similar::{delta_profile, forward_profile, richardson_weights, shrinker_gamma0, ForwardMethod, DELTAS};
use freebound::solver::{evolve, make_initial_bump, EvolveConfig, Geometry, Grid, GridField};
use freebound::special::{kummer_m, kummer_m_prime, tricomi_u, tricomi_u_prime};
use freebound::traveling_wave::{compose_profiles, separatrix, tw_profile, Sign};
use freebound::weiss::{backward_kernel, monotonicity_audit, Center};
use proptest::prelude::*;

/// `|s y'' + (b − s) y' − a y|` over the sum of the term magnitudes, with `y''`
/// from a twice Richardson-extrapolated centred difference (error `O(h⁶)`).
fn confluent_residual(y: impl Fn(f64) -> f64, dy: f64, a: f64, b: f64, s: f64, h: f64) -> f64 {
    let d2 = |h: f64| (y(s + h) - 2.0 * y(s) + y(s - h)) / (h * h);
    let r1 = |h: f64| (4.0 * d2(h) - d2(2.0 * h)) / 3.0;
    let ypp = (16.0 * r1(h) - r1(2.0 * h)) / 15.0;
    let terms = [s * ypp, (b - s) * dy, -a * y(s)];
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if scale == 0.0 {
        0.0
    } else {
        terms.iter().sum::<f64>().abs() / scale
    }
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn costly() -> ProptestConfig {
    ProptestConfig::with_cases(8)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn reaction_scaling(gamma in 0.05f64..0.95, u in 1e-6f64..10.0, eps in 1e-3f64..1.0, r in 0.1f64..10.0) {
        let p = ModelParams::new(gamma).unwrap();
        let beta = p.beta();
        let lhs = p.f_eps(r.powf(beta) * u, eps);
        let rhs = r.powf(beta - 2.0) * p.f_eps(u, eps / r);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
        let lhs = p.big_f_eps(r.powf(beta) * u, eps);
        let rhs = r.powf(beta * gamma) * p.big_f_eps(u, eps / r);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn reaction_signs_and_monotone_cutoff(gamma in 0.0f64..=1.0, eps in 1e-3f64..1.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let p = ModelParams::new(gamma).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(p.f_eps(lo, eps) >= 0.0);
        prop_assert!(p.big_f_eps(lo, eps) >= 0.0);
        let (h_lo, h_hi) = (p.big_h_eps(lo, eps), p.big_h_eps(hi, eps));
        prop_assert!((0.0..=1.0).contains(&h_lo) && (0.0..=1.0).contains(&h_hi));
        prop_assert!(h_lo <= h_hi);
    }

    #[test]
    fn reaction_is_exact_above_cutoff(gamma in 0.05f64..1.0, eps in 1e-3f64..1.0, k in 1.0f64..100.0) {
        let p = ModelParams::new(gamma).unwrap();
        let u = k * eps.powf(p.beta());
        prop_assert_eq!(p.f_eps(u, eps), gamma * u.powf(gamma - 1.0));
    }

    #[test]
    fn beta_gamma_relation(gamma in 0.0f64..=1.0) {
        let beta = ModelParams::new(gamma).unwrap().beta();
        let (a, b) = (beta * gamma, 2.0 * (beta - 1.0));
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
    }

    #[test]
    fn kummer_ode_residual(a in -2.0f64..3.0, b in 0.5f64..3.0, s in 0.5f64..20.0) {
        let res = confluent_residual(|x| kummer_m(a, b, x).unwrap(), kummer_m_prime(a, b, s).unwrap(), a, b, s, 0.02 * s.min(1.0));
        prop_assert!(res <= 1e-8, "relative residual {res}");
    }

    #[test]
    fn tricomi_ode_residual(n in 1usize..=3, beta in 1.0f64..2.0, s in 0.5f64..100.0, shrinker in any::<bool>()) {
        let (a, b) = if shrinker { (-0.5, 0.5) } else { ((n as f64 + beta) / 2.0, n as f64 / 2.0) };
        let res = confluent_residual(|x| tricomi_u(a, b, x).unwrap(), tricomi_u_prime(a, b, s).unwrap(), a, b, s, 0.02 * s);
        prop_assert!(res <= 1e-8, "relative residual {res}");
    }

    #[test]
    fn kummer_terminating_linear(b in 0.1f64..10.0, s in 0.0f64..20.0) {
        let m = kummer_m(-1.0, b, s).unwrap();
        prop_assert!((m - (1.0 - s / b)).abs() <= 1e-14 * (1.0 + (1.0 - s / b).abs()));
    }

    #[test]
    fn tricomi_large_argument(n in 1usize..=3, beta in 1.0f64..2.0) {
        let (a, b) = ((n as f64 + beta) / 2.0, n as f64 / 2.0);
        let s = 1e3;
        let dev = (f64::powf(s, a) * tricomi_u(a, b, s).unwrap() - 1.0).abs();
        prop_assert!(dev <= 2.0 * a * (a + 1.0 - b).abs() / s, "deviation {dev}");
    }

    #[test]
    fn kernel_has_unit_mass(t in -2.0f64..-0.01) {
        let width = 40.0 * (-t).sqrt();
        let m = 20000;
        let h = 2.0 * width / m as f64;
        let mass: f64 = (0..=m).map(|k| {
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            w * h * backward_kernel(&[-width + k as f64 * h], t, 1).unwrap()
        }).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-10, "mass {mass}");
    }
}

proptest! {
    #![proptest_config(costly())]

    #[test]
    fn forward_profiles_positive_and_increasing(gamma in 0.1f64..0.9, n in 1usize..=3) {
        let res = forward_profile(gamma, n, 1.0, 10.0, ForwardMethod::FbExpansion).unwrap();
        let p = &res.profile;
        for i in 0..p.r.len() {
            if p.r[i] > res.big_r {
                prop_assert!(p.u[i] > 0.0 && p.du[i] > 0.0, "r={} U={} U'={}", p.r[i], p.u[i], p.du[i]);
            }
        }
        prop_assert!(res.max_residual <= 1e-7);
    }

    #[test]
    fn delta_family_is_ordered(gamma in 0.2f64..0.8, n in 1usize..=2) {
        let radii: Vec<f64> = (1..=20).map(|i| 1.0 + 0.1 * i as f64).collect();
        let beta = 2.0 / (2.0 - gamma);
        let fams: Vec<Vec<f64>> = DELTAS.iter().map(|&d| delta_profile(gamma, n, 1.0, d, &radii).unwrap()).collect();
        for w in fams.windows(2) {
            // DELTAS decrease, so the profiles must increase.
            for (a, b) in w[0].iter().zip(&w[1]) {
                prop_assert!(*b >= *a - 1e-12 * a.abs());
            }
        }
        let weights = richardson_weights(gamma, beta).unwrap();
        let finest = &fams[fams.len() - 1];
        for (k, &v) in finest.iter().enumerate() {
            let limit: f64 = weights.iter().zip(&fams).map(|(w, f)| w * f[k]).sum();
            prop_assert!(limit >= v - 1e-9 * v.abs(), "limit {limit} below V_delta {v}");
        }
    }

    #[test]
    fn traveling_wave_residual_and_mirror(gamma in 0.1f64..0.95, c in -2.0f64..2.0) {
        let p = tw_profile(gamma, c, Sign::Plus, 4.0, 1e-12).unwrap();
        prop_assert!(p.max_residual <= 1e-7, "residual {}", p.max_residual);
        let m = tw_profile(gamma, -c, Sign::Minus, 4.0, 1e-12).unwrap();
        prop_assert_eq!(p.xi.len(), m.xi.len());
        for i in 0..p.xi.len() {
            let j = p.xi.len() - 1 - i;
            prop_assert_eq!(p.xi[i], -m.xi[j]);
            prop_assert_eq!(p.phi[i], m.phi[j]);
        }
    }

    #[test]
    fn profile_lies_on_separatrix(gamma in 0.3f64..0.9, c in 0.3f64..2.0) {
        let beta = 2.0 / (2.0 - gamma);
        let p = tw_profile(gamma, c, Sign::Plus, 5.0, 1e-12).unwrap();
        let u_max = p.phi.iter().cloned().fold(0.0, f64::max).powf(1.0 / beta) * 1.01;
        let s = separatrix(gamma, c, Sign::Plus, u_max).unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..p.xi.len() {
            let u = p.phi[i].powf(1.0 / beta);
            if u < 2e-6 {
                continue;
            }
            let v = p.dphi[i] / (beta * p.phi[i].powf(1.0 - 1.0 / beta));
            worst = worst.max((v - s.eval(u).unwrap()).abs());
        }
        prop_assert!(worst <= 1e-5, "worst {worst}");
    }

    #[test]
    fn composed_components_solve_profile_equation(gamma in 0.1f64..0.9, c in -1.5f64..1.5, gap in 0.0f64..2.0) {
        let comp = compose_profiles(true, true, gap, 0.0, gamma, c, 3.0).unwrap();
        for part in [&comp.plus, &comp.minus].into_iter().flatten() {
            prop_assert!(part.max_residual <= 1e-7);
        }
    }

    #[test]
    fn scheme_preserves_order_positivity_and_max(
        c1 in -0.5f64..0.5, r1 in 0.3f64..1.0, h1 in 0.1f64..2.0,
        c2 in -0.5f64..0.5, r2 in 0.3f64..1.0, h2 in 0.0f64..1.0,
        eps in 0.05f64..0.3, gamma in 0.1f64..1.0,
    ) {
        let g = Grid::new(Geometry::LineSymmetric, 2.0, 64).unwrap();
        let p = ModelParams::new(gamma).unwrap();
        let low = make_initial_bump(&g, c1, r1, h1).unwrap();
        let extra = if h2 > 0.0 { make_initial_bump(&g, c2, r2, h2).unwrap().values } else { vec![0.0; g.len()] };
        let high = GridField { values: low.values.iter().zip(&extra).map(|(a, b)| a + b).collect(), ..low.clone() };
        let cfg = EvolveConfig::new(eps, 0.2);
        let a = evolve(&low, &p, &cfg).unwrap();
        let b = evolve(&high, &p, &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for (s, t) in a.snapshots.iter().zip(&b.snapshots) {
            prop_assert!(s.values.iter().all(|&v| v >= 0.0));
            prop_assert!(s.values.iter().zip(&t.values).all(|(u, v)| u <= v));
            prop_assert!(s.max() <= prev);
            prev = s.max();
        }
    }

    #[test]
    fn monotonicity_terms_are_nonnegative(h in 0.5f64..2.0, eps in 0.1f64..0.3) {
        let g = Grid::new(Geometry::LineSymmetric, 4.0, 128).unwrap();
        let p = ModelParams::new(0.5).unwrap();
        let u0 = make_initial_bump(&g, 0.0, 1.0, h).unwrap();
        let mut cfg = EvolveConfig::new(eps, 0.3);
        cfg.snapshot_stride = Some(4);
        let traj = evolve(&u0, &p, &cfg).unwrap();
        let audit = monotonicity_audit(&traj, Center { x: 0.0, t: 0.3 }, &[0.1, 0.15, 0.2, 0.25]).unwrap();
        for s in &audit.samples {
            prop_assert!(s.z_term >= 0.0 && s.h_term >= 0.0);
        }
    }
}

#[test]
fn gamma0_shrinker_is_caloric() {
    for n in 1..=3 {
        let s = shrinker_gamma0::<f64>(n).unwrap();
        let b = n as f64 / 2.0;
        let prof = |r: f64| s.ell * kummer_m(-0.5, b, r * r / 4.0).unwrap();
        let u = |r: f64, t: f64| (-t).sqrt() * prof(r / (-t).sqrt());
        let h = 1e-4;
        for &t in &[-1.0f64, -0.5] {
            for k in 1..10 {
                let r = 0.1 * k as f64 * s.big_r * (-t).sqrt();
                let ut = (u(r, t + h) - u(r, t - h)) / (2.0 * h);
                let ur = (u(r + h, t) - u(r - h, t)) / (2.0 * h);
                let urr = (u(r + h, t) - 2.0 * u(r, t) + u(r - h, t)) / (h * h);
                let lap = urr + (n as f64 - 1.0) / r * ur;
                assert!((ut - lap).abs() < 1e-6, "n={n} r={r} t={t}: {}", ut - lap);
            }
        }
    }
}
