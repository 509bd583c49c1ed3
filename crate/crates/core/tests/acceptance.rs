//! Acceptance suite. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use upwind_core::analysis::studies::{fit_loglog, filter_stability_sweep, zero_filter_study, ZeroFilterConfig};
use upwind_core::analysis::{check_estimates, entropy_residual, exact_evaluate, tv, Entropy, EstimateContext, ExactSolution};
use upwind_core::evolve::{run, Integrator, Scheme};
use upwind_core::filter::{builtin_filter, rescale, BUILTIN_FILTERS};
use upwind_core::flux::{Component, FluxSpec, Shape};
use upwind_core::geometry::{standard_measure, Grid, GridFunction};
use upwind_core::initial::InitialData;
use upwind_core::operator::{apply, apply_raw, apply_values, build_plan, lipschitz_bound};
use upwind_core::resolvent::{inverse_check, monotone_equivalence, ExpOperators};

type Outcome = Result<(bool, String), upwind_core::Error>;

fn criterion(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match res {
        Ok((ok, d)) => (ok, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= budget;
    let pass = ok && in_time;
    println!(
        "{} #{id} {name}: {detail} [{:.2}s / {:.0}s budget{}]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn burgers_2d(range: (f64, f64)) -> FluxSpec {
    FluxSpec::new(vec![Component::new(1.0, Shape::Burgers), Component::new(1.0, Shape::Burgers)], range, None).unwrap()
}

fn random_state(grid: &Grid, rng: &mut ChaCha8Rng, range: (f64, f64)) -> GridFunction {
    let values = (0..grid.len()).map(|_| rng.random_range(range.0..=range.1)).collect();
    GridFunction::new(grid.clone(), values, 0.0).unwrap()
}

fn eo_equivalence() -> Outcome {
    let n = 256;
    let g = Grid::new_1d(n, 0.0, 1.0)?;
    let flux = FluxSpec::burgers((-1.0, 1.0))?;
    let phi = rescale(&builtin_filter("box")?, g.h())?;
    let plan = build_plan(&flux, &phi, &standard_measure("line")?, &g)?;
    let fp = |u: f64| 0.5 * u.max(0.0).powi(2);
    let fm = |u: f64| 0.5 * u.min(0.0).powi(2);
    let eo = |a: f64, b: f64| fp(a) + fm(b);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let u = InitialData::random_bv(1, seed, 12, (-1.0, 1.0), 6.0)?.sample(&g)?;
        let got = apply(&plan, &u)?;
        let v = &u.values;
        let hand: Vec<f64> = (0..n)
            .map(|j| (eo(v[(j + 1) % n], v[j]) - eo(v[j], v[(j + n - 1) % n])) / g.h())
            .collect();
        worst = worst.max(sup_diff(&got.values, &hand));
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e} (tol 1e-12)")))
}

fn definition_folded() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for measure in ["line", "square", "hexagon"] {
        let (g, flux) = if measure == "line" {
            (Grid::new_1d(256, 0.0, 1.0)?, FluxSpec::burgers((-1.0, 1.0))?)
        } else {
            (Grid::square(128, 0.0, 1.0)?, burgers_2d((-1.0, 1.0)))
        };
        let dm = standard_measure(measure)?;
        for name in BUILTIN_FILTERS {
            let alpha = if name == "exponential" { 1.5 * g.h() } else { 3.0 * g.h() };
            let plan = build_plan(&flux, &rescale(&builtin_filter(name)?, alpha)?, &dm, &g)?;
            for _ in 0..5 {
                let u = random_state(&g, &mut rng, (-1.0, 1.0));
                let a = apply(&plan, &u)?;
                let b = apply_raw(&plan, &u)?;
                worst = worst.max(sup_diff(&a.values, &b.values));
            }
        }
    }
    Ok((worst <= 1e-12, format!("max |apply - apply_raw| {worst:.3e} (tol 1e-12)")))
}

fn estimates_run(
    t_end: f64,
) -> Result<(upwind_core::operator::OperatorPlan, GridFunction, upwind_core::evolve::Trajectory, Vec<upwind_core::analysis::MarginRow>), upwind_core::Error> {
    let g = Grid::new_1d(512, 0.0, 1.0)?;
    let flux = FluxSpec::burgers((-1.0, 1.0))?.negated();
    let phi = rescale(&builtin_filter("hat")?, 4.0 * g.h())?;
    let plan = build_plan(&flux, &phi, &standard_measure("line")?, &g)?;
    let u0 = InitialData::random_bv(1, 11, 10, (-1.0, 1.0), 5.0)?.sample(&g)?;
    let v0 = InitialData::random_bv(1, 12, 10, (-1.0, 1.0), 5.0)?.sample(&g)?;
    let it = Integrator::new(Scheme::Euler, t_end).with_safety(0.5);
    let outs = [0.1, 0.2, 0.3, 0.4];
    let mut tr = run(&plan, &u0, &it, &outs, &[])?;
    let other = run(&plan, &v0, &it, &outs, &[])?;
    let ctx = EstimateContext { plan: &plan, u0: &u0, entropies: &[], comparison: Some((&v0, &other)) };
    let rows = check_estimates(&mut tr, &ctx)?;
    Ok((plan, u0, tr, rows))
}

fn max_principle_bv_l1_mass() -> Outcome {
    let (_, _, _, rows) = estimates_run(0.5)?;
    let mut detail = Vec::new();
    let mut ok = true;
    for id in ["supbnd.max", "supbnd.min", "BVbnd", "L1bnd", "mass"] {
        let worst = rows.iter().filter(|r| r.id == id).map(|r| r.slack).fold(f64::INFINITY, f64::min);
        ok &= worst >= -1e-10;
        detail.push(format!("{id} {worst:.2e}"));
    }
    Ok((ok, format!("min slack {}", detail.join(", "))))
}

fn time_derivative_bound() -> Outcome {
    let (plan, u0, tr, _) = estimates_run(0.5)?;
    let rhs = 2.0 * plan.measure().total() * plan.flux().lipschitz() * tv(&u0);
    let mut worst: f64 = 0.0;
    for u in std::iter::once(&u0).chain(tr.snapshots.iter().map(|s| &s.u)) {
        let r = apply(&plan, u)?;
        let l1 = r.grid.cell_volume() * r.values.iter().map(|v| v.abs()).sum::<f64>();
        worst = worst.max(l1 / rhs);
    }
    Ok((worst <= 1.0, format!("max ||aud||_1 / bound = {worst:.4} over {} snapshots and t=0", tr.snapshots.len())))
}

fn entropy_dissipation() -> Outcome {
    let g = Grid::new_1d(256, 0.0, 1.0)?;
    let flux = FluxSpec::burgers((-1.0, 1.0))?.negated();
    let mut ents = vec![Entropy::Square];
    ents.extend([-0.6, -0.25, 0.0, 0.3, 0.7].map(Entropy::Kruzkov));
    let mut worst = f64::NEG_INFINITY;
    for name in BUILTIN_FILTERS {
        let alpha = if name == "exponential" { 2.0 * g.h() } else { 4.0 * g.h() };
        let plan = build_plan(&flux, &rescale(&builtin_filter(name)?, alpha)?, &standard_measure("line")?, &g)?;
        for seed in 0..10 {
            let u = InitialData::random_bv(1, 100 + seed, 10, (-1.0, 1.0), 6.0)?.sample(&g)?;
            for e in &ents {
                let r = entropy_residual(&plan, &u, e)?;
                worst = worst.max(r.values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
    }
    Ok((worst <= 1e-10, format!("max residual {worst:.3e} (tol 1e-10)")))
}

fn zero_filter_rate() -> Outcome {
    let base = ZeroFilterConfig {
        filter: builtin_filter("box")?,
        alphas: vec![0.2, 0.1, 0.05, 0.025],
        cells_per_alpha: 8.0,
        domain: (-1.5, 1.5),
        t_end: 0.5,
        scheme: Scheme::SspRk3,
        safety: 0.5,
        solution: ExactSolution::BurgersShock { u_l: 1.0, u_r: 0.0, x0: 0.0 },
    };
    let shock = zero_filter_study(&base)?;
    let rare = zero_filter_study(&ZeroFilterConfig {
        solution: ExactSolution::BurgersRarefaction { u_l: -1.0, u_r: 1.0, x0: 0.0 },
        ..base
    })?;
    let errs = |s: &upwind_core::analysis::studies::ZeroFilterStudy| {
        s.rows.iter().map(|r| format!("{:.3e}", r.l1_error)).collect::<Vec<_>>().join(" ")
    };
    let [grid_ol, filter_ol] = rare.oleinik.clone().expect("rarefaction study reports the one-sided check");
    let show = |o: &upwind_core::analysis::studies::OleinikReport| {
        format!("stride {} max {:.3} ({})", o.stride, o.max_forward_slope, if o.holds { "holds" } else { "exceeds" })
    };
    let ok = shock.monotone && shock.slope >= 0.5 && rare.slope >= 0.5;
    Ok((
        ok,
        format!(
            "shock errors [{}] slope {:.3} monotone {}; rarefaction errors [{}] slope {:.3}; one-sided check vs 2/T = {:.1}, reported only: {}, {}",
            errs(&shock),
            shock.slope,
            shock.monotone,
            errs(&rare),
            rare.slope,
            grid_ol.bound,
            show(&grid_ol),
            show(&filter_ol)
        ),
    ))
}

fn filter_dependence() -> Outcome {
    let sweep = filter_stability_sweep(
        &builtin_filter("box")?,
        &builtin_filter("hat")?,
        &[0.2, 0.1, 0.05],
        8.0,
        (-1.5, 1.5),
        &InitialData::Riemann { u_l: 1.0, u_r: 0.0, x0: 0.0 },
        0.5,
        Scheme::SspRk3,
    )?;
    let ratios: Vec<String> = sweep.rows.iter().map(|r| format!("{:.4}", r.result.ratio)).collect();
    Ok((
        sweep.ratio_slope <= 0.1,
        format!("ratios [{}] slope vs ln(1/alpha) {:.3} (max 0.1)", ratios.join(" "), sweep.ratio_slope),
    ))
}

fn stencil_2d() -> Outcome {
    let n = 64;
    let g = Grid::square(n, 0.0, 1.0)?;
    let flux = burgers_2d((-1.0, 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_state(&g, &mut rng, (-1.0, 1.0));
    let box_h = rescale(&builtin_filter("box")?, g.h())?;
    let sq = apply(&build_plan(&flux, &box_h, &standard_measure("square")?, &g)?, &u)?;
    let fp = |u: f64| 0.5 * u.max(0.0).powi(2);
    let fm = |u: f64| 0.5 * u.min(0.0).powi(2);
    let eo = |a: f64, b: f64| fp(a) + fm(b);
    let v = &u.values;
    let mut hand = vec![0.0; v.len()];
    for iy in 0..n {
        for ix in 0..n {
            let c = v[g.index(ix, iy)];
            let xp = v[g.index((ix + 1) % n, iy)];
            let xm = v[g.index((ix + n - 1) % n, iy)];
            let yp = v[g.index(ix, (iy + 1) % n)];
            let ym = v[g.index(ix, (iy + n - 1) % n)];
            hand[g.index(ix, iy)] = (eo(xp, c) - eo(c, xm) + eo(yp, c) - eo(c, ym)) / g.h();
        }
    }
    let d_sq = sup_diff(&sq.values, &hand);
    let hat = rescale(&builtin_filter("hat")?, 3.0 * g.h())?;
    let hex = apply(&build_plan(&flux, &hat, &standard_measure("hexagon")?, &g)?, &u)?;
    let tri = apply(&build_plan(&flux, &hat, &standard_measure("triangle")?, &g)?, &u)?;
    let d_hex = sup_diff(&hex.values, &tri.values);
    Ok((
        d_sq <= 1e-12 && d_hex <= 1e-12,
        format!("square vs per-axis EO {d_sq:.3e}; triangle vs hexagon {d_hex:.3e} (tol 1e-12)"),
    ))
}

fn resolvent_algebra() -> Outcome {
    let alpha = 0.1;
    let hs: [f64; 3] = [1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
    let mut res: Vec<[f64; 4]> = Vec::new();
    for &h in &hs {
        let g = Grid::new_1d((6.0_f64 / h).round() as usize, 0.0, 6.0)?;
        let ops = ExpOperators::new(alpha, &g)?;
        let v: Vec<f64> = g.centers().iter().map(|x| (std::f64::consts::TAU * x[0]).sin()).collect();
        res.push(inverse_check(&ops, &v).as_array());
    }
    let mut orders = [0.0; 4];
    for (k, o) in orders.iter_mut().enumerate() {
        let ys: Vec<f64> = res.iter().map(|r| r[k]).collect();
        *o = fit_loglog(&hs, &ys)?.0;
    }
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);

    let g = Grid::new_1d(1536, 0.0, 6.0)?;
    let ops = ExpOperators::new(alpha, &g)?;
    let flux = FluxSpec::burgers((0.0, 1.5))?;
    let u0 = InitialData::Sine { amp: 0.5, freq: 1.0, offset: 0.75 }.sample(&g)?;
    let eq = monotone_equivalence(&ops, &flux, &u0, 0.1)?;
    let tol = 5.0 * (eq.h * eq.h + eq.dt);
    Ok((
        min_order >= 1.9 && eq.l1_gap <= tol,
        format!(
            "orders [{}] (min 1.9); equivalence gap {:.3e} vs 5(h^2+dt) = {:.3e}",
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(" "),
            eq.l1_gap,
            tol
        ),
    ))
}

fn lipschitz_bound_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cases: Vec<(Grid, FluxSpec, &str, &str, f64)> = vec![
        (Grid::new_1d(128, 0.0, 1.0)?, FluxSpec::burgers((-1.0, 1.0))?, "line", "box", 1.0),
        (Grid::new_1d(128, 0.0, 1.0)?, FluxSpec::lwr((0.0, 1.0))?, "line", "hat", 4.0),
        (Grid::new_1d(256, 0.0, 1.0)?, FluxSpec::burgers((-1.0, 1.0))?, "line", "exponential", 2.0),
        (Grid::square(32, 0.0, 1.0)?, burgers_2d((-1.0, 1.0)), "hexagon", "hat", 3.0),
        (Grid::square(32, 0.0, 1.0)?, burgers_2d((-1.0, 1.0)), "square", "box", 1.0),
    ];
    let mut worst: f64 = 0.0;
    let pairs_per_case = 200;
    for (g, flux, m, f, cells) in &cases {
        let plan = build_plan(flux, &rescale(&builtin_filter(f)?, cells * g.h())?, &standard_measure(m)?, g)?;
        let bound = lipschitz_bound(&plan);
        let range = flux.state_range();
        for k in 0..pairs_per_case {
            let u: Vec<f64> = (0..g.len()).map(|_| rng.random_range(range.0..=range.1)).collect();
            let v: Vec<f64> = if k % 2 == 0 {
                (0..g.len()).map(|_| rng.random_range(range.0..=range.1)).collect()
            } else {
                // small perturbations probe the local constant
                u.iter().map(|x| (x + rng.random_range(-1e-3..1e-3)).clamp(range.0, range.1)).collect()
            };
            let du = sup_diff(&u, &v);
            if du == 0.0 {
                continue;
            }
            let ratio = sup_diff(&apply_values(&plan, &u)?, &apply_values(&plan, &v)?) / du;
            worst = worst.max(ratio / bound);
        }
    }
    Ok((worst <= 1.0, format!("max ratio / (4 L w Phi(0)) = {worst:.4} over {} pairs", cases.len() * pairs_per_case)))
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "EO equivalence", s(1), eo_equivalence),
        criterion(2, "definition equals folded form", s(5), definition_folded),
        criterion(3, "max principle, BV, L1 contraction, mass", s(10), max_principle_bv_l1_mass),
        criterion(4, "time-derivative bound", s(5), time_derivative_bound),
        criterion(5, "entropy dissipation", s(10), entropy_dissipation),
        criterion(6, "zero-filter rate", s(60), zero_filter_rate),
        criterion(7, "continuous dependence on the filter", s(60), filter_dependence),
        criterion(8, "2D stencil equivalences", s(10), stencil_2d),
        criterion(9, "resolvent algebra", s(30), resolvent_algebra),
        criterion(10, "Lipschitz bound of the right-hand side", s(10), lipschitz_bound_check),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn exact_oracle_sanity() {
    // The reference solutions the rate criterion relies on.
    let g = Grid::new_1d(300, -1.5, 1.5).unwrap();
    let s = exact_evaluate(&ExactSolution::BurgersShock { u_l: 1.0, u_r: 0.0, x0: 0.0 }, &g, 0.5).unwrap();
    for (x, v) in g.centers().iter().zip(&s.values) {
        if (-0.9..0.25).contains(&x[0]) {
            assert_eq!(*v, 1.0);
        } else if x[0] > 0.25 && x[0] < 1.5 {
            assert_eq!(*v, 0.0);
        }
    }
}
