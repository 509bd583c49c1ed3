//! Scenario drivers. Each returns an [`Outcome`] whose assertions decide the
//! exit status.

use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Map, Value};

use upwind_core::analysis::studies::{
    filter_stability_sweep, fit_loglog, state_hull, zero_filter_study, OleinikReport, ZeroFilterConfig,
};
use upwind_core::analysis::{
    check_estimates, entropy_residual, exact_evaluate, l1_distance, l1_norm, mass, tv, Entropy, EstimateContext,
    ExactSolution,
};
use upwind_core::evolve::{run, Integrator, Scheme};
use upwind_core::filter::{rescale, Filter};
use upwind_core::flux::FluxSpec;
use upwind_core::geometry::{standard_measure, DirectionMeasure, Grid, GridFunction};
use upwind_core::initial::InitialData;
use upwind_core::operator::{apply, apply_raw, build_plan, OperatorPlan};
use upwind_core::resolvent::{inverse_check, monotone_equivalence, ExpOperators};

use crate::config::{initial_data, named_filter, Convention, ExperimentConfig, InitialConfig, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, num, write_csv, write_json, write_margins, write_solution};

/// Slack below which an estimate counts as violated.
pub const MARGIN_TOL: f64 = -1e-10;
/// Smallest accepted fitted rate of the zero-filter sweep.
pub const MIN_ZERO_FILTER_RATE: f64 = 0.5;
/// Largest accepted log–log slope of the filter-dependence ratio.
pub const MAX_RATIO_SLOPE: f64 = 0.1;
/// Smallest accepted order of the resolvent identities.
pub const MIN_RESOLVENT_ORDER: f64 = 1.9;
pub const ENTROPY_TOL: f64 = 1e-10;
pub const FORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub scenario: String,
    /// Failed assertions as `(name, detail)`.
    pub failures: Vec<(String, String)>,
    pub metrics: Map<String, Value>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn new(scenario: &str) -> Self {
        Self { scenario: scenario.into(), failures: vec![], metrics: Map::new(), files: vec![] }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.into(), v.into());
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        if !ok {
            self.failures.push((name.into(), detail.into()));
        }
    }

    /// One-line JSON summary.
    pub fn summary(&self) -> Value {
        json!({
            "scenario": self.scenario,
            "pass": self.pass(),
            "failures": self.failures.iter().map(|(n, d)| json!({"assertion": n, "detail": d})).collect::<Vec<_>>(),
            "metrics": self.metrics,
        })
    }

    /// Writes `summary.json` next to the other artifacts.
    pub fn finish(mut self, out: &Path) -> CliResult<Self> {
        let path = write_json(&out.join("summary.json"), &self.summary())?;
        self.files.push(path);
        Ok(self)
    }
}

fn hull_of(values: &[&GridFunction]) -> (f64, f64) {
    values.iter().fold((0.0, 0.0), |(lo, hi), u| {
        let (a, b) = state_hull(u);
        (lo.min(a), hi.max(b))
    })
}

fn check_support(filter: &Filter, grid: &Grid) -> CliResult<()> {
    let support = filter.support_radius();
    let half = grid.half_domain();
    if support >= half {
        return Err(CliError::config("filter.alpha", format!("support exceeds half domain (support {support}, half domain {half})")));
    }
    Ok(())
}

fn check_alignment(cfg: &ExperimentConfig, filter: &Filter, h: f64) -> CliResult<()> {
    if !filter.atoms_aligned(h) {
        let msg = format!("atom off-lattice: {} filter with alpha = {} is not a multiple of h = {h}", filter.name(), filter.alpha());
        if cfg.filter.exact {
            return Err(CliError::config("filter.exact", msg));
        }
        warn!("{msg}");
    }
    Ok(())
}

fn plan_for(cfg: &ExperimentConfig, flux: &FluxSpec, filter: &Filter, measure: &DirectionMeasure, grid: &Grid) -> CliResult<OperatorPlan> {
    check_support(filter, grid)?;
    check_alignment(cfg, filter, grid.h())?;
    build_plan(flux, filter, measure, grid).map_err(|e| CliError::config("filter", e.to_string()))
}

fn integrator(cfg: &ExperimentConfig) -> CliResult<Integrator> {
    let it = &cfg.integrator;
    let scheme = Scheme::parse(&it.scheme).map_err(|e| CliError::config("integrator.scheme", e.to_string()))?;
    let mut out = Integrator::new(scheme, it.t_end).with_safety(it.safety);
    if let Some(dt) = it.dt {
        out = out.with_dt(dt);
    }
    Ok(out)
}

fn entropies(kruzkov: &[f64]) -> Vec<Entropy> {
    let mut e = vec![Entropy::Square];
    e.extend(kruzkov.iter().map(|&k| Entropy::Kruzkov(k)));
    e
}

/// Runs the scenario named in the config.
pub fn run_scenario(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    ensure_dir(out)?;
    let outcome = match &cfg.scenario {
        ScenarioConfig::Run { kruzkov, compare } => run_evolution(cfg, kruzkov, compare.as_ref(), out)?,
        ScenarioConfig::ZeroFilterSweep { alphas, cells_per_alpha } => zero_filter(cfg, alphas, *cells_per_alpha, out)?,
        ScenarioConfig::FilterStabilitySweep { phi, psi, alphas, cells_per_alpha } => {
            stability(cfg, phi, psi, alphas, *cells_per_alpha, out)?
        }
        ScenarioConfig::StencilEquivalence { tolerance } => stencil_equivalence(cfg, *tolerance, out)?,
        ScenarioConfig::EntropyAudit { kruzkov, states } => entropy_audit(cfg, kruzkov, *states, out)?,
        ScenarioConfig::ResolventCheck { alpha, cells, freq, equivalence_t_end } => {
            resolvent_check(cfg, *alpha, cells.as_deref(), *freq, *equivalence_t_end, out)?
        }
    };
    outcome.finish(out)
}

fn run_evolution(cfg: &ExperimentConfig, kruzkov: &[f64], compare: Option<&InitialConfig>, out: &Path) -> CliResult<Outcome> {
    let mut o = Outcome::new("run");
    let grid = cfg.grid()?;
    let u0 = cfg.initial()?.sample(&grid)?;
    let v0 = match compare {
        Some(c) => Some(initial_data(cfg, c, "scenario.compare")?.sample(&grid)?),
        None => None,
    };
    let range = match &v0 {
        Some(v) => hull_of(&[&u0, v]),
        None => hull_of(&[&u0]),
    };
    let flux = cfg.flux(range)?;
    let plan = plan_for(cfg, &flux, &cfg.filter()?, &cfg.measure()?, &grid)?;
    let it = integrator(cfg)?;
    let ents = entropies(kruzkov);
    info!("running {} cells to t = {}", grid.len(), it.t_end);
    let mut tr = run(&plan, &u0, &it, &cfg.integrator.output_times, &ents)?;
    let other = match &v0 {
        Some(v) => Some(run(&plan, v, &it, &cfg.integrator.output_times, &[])?),
        None => None,
    };
    let ctx = EstimateContext {
        plan: &plan,
        u0: &u0,
        entropies: &ents,
        comparison: v0.as_ref().zip(other.as_ref()),
    };
    let rows = check_estimates(&mut tr, &ctx)?;
    for (i, s) in tr.snapshots.iter().enumerate() {
        o.files.push(write_solution(&out.join(format!("solution_{i:03}.csv")), &s.u)?);
    }
    o.files.push(write_margins(&out.join("margins.csv"), &rows)?);
    for r in rows.iter().filter(|r| r.slack < MARGIN_TOL) {
        o.check(format!("margin.{}", r.id), false, format!("slack {} at t = {}", num(r.slack), num(r.t)));
    }
    let last = &tr.last().u;
    o.metric("steps", tr.steps);
    o.metric("dt", tr.dt);
    o.metric("t_end", last.t);
    o.metric("worst_slack", rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min));
    o.metric("sup", last.max());
    o.metric("inf", last.min());
    o.metric("tv", tv(last));
    o.metric("mass_drift", mass(last) - mass(&u0));
    o.metric("lipschitz_bound", upwind_core::operator::lipschitz_bound(&plan));
    Ok(o)
}

fn require_physical_burgers(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.flux.name != "burgers" || cfg.flux.convention != Convention::Conservation || cfg.flux.scales.is_some() {
        return Err(CliError::config("flux", "sweeps run the physical Burgers problem: name = \"burgers\", convention = \"conservation\""));
    }
    if cfg.grid.dim != 1 {
        return Err(CliError::config("grid.dim", "sweeps are one-dimensional"));
    }
    Ok(())
}

fn sweep_support(cfg: &ExperimentConfig, unit: &Filter, alphas: &[f64], cells_per_alpha: f64) -> CliResult<()> {
    for &a in alphas {
        let phi = rescale(unit, a).map_err(|e| CliError::config("scenario.alphas", e.to_string()))?;
        let half = 0.5 * cfg.grid.length;
        if phi.support_radius() >= half {
            return Err(CliError::config(
                "scenario.alphas",
                format!("support exceeds half domain at alpha = {a} (support {}, half domain {half})", phi.support_radius()),
            ));
        }
        check_alignment(cfg, &phi, a / cells_per_alpha)?;
    }
    Ok(())
}

fn oleinik_json(r: &OleinikReport) -> Value {
    json!({"stride": r.stride, "max_forward_slope": r.max_forward_slope, "bound": r.bound, "holds": r.holds})
}

fn zero_filter(cfg: &ExperimentConfig, alphas: &[f64], cells_per_alpha: f64, out: &Path) -> CliResult<Outcome> {
    let mut o = Outcome::new("zero_filter_sweep");
    require_physical_burgers(cfg)?;
    let solution = match cfg.initial {
        InitialConfig::Riemann { u_l, u_r, x0 } if u_l > u_r => ExactSolution::BurgersShock { u_l, u_r, x0 },
        InitialConfig::Riemann { u_l, u_r, x0 } if u_l < u_r => ExactSolution::BurgersRarefaction { u_l, u_r, x0 },
        _ => return Err(CliError::config("initial", "zero_filter_sweep needs Riemann data with u_l != u_r")),
    };
    let unit = cfg.unit_filter()?;
    sweep_support(cfg, &unit, alphas, cells_per_alpha)?;
    let scheme = Scheme::parse(&cfg.integrator.scheme).map_err(|e| CliError::config("integrator.scheme", e.to_string()))?;
    let study = zero_filter_study(&ZeroFilterConfig {
        filter: unit,
        alphas: alphas.to_vec(),
        cells_per_alpha,
        domain: (cfg.grid.lower, cfg.grid.lower + cfg.grid.length),
        t_end: cfg.integrator.t_end,
        scheme,
        safety: cfg.integrator.safety,
        solution,
    })?;
    o.files.push(write_csv(
        &out.join("sweep.csv"),
        &["alpha", "h", "cells", "l1_error", "fitted_rate"],
        study.rows.iter().map(|r| vec![num(r.alpha), num(r.h), r.cells.to_string(), num(r.l1_error), num(study.slope)]),
    )?);
    o.metric("fitted_rate", study.slope);
    o.metric("constant", study.constant);
    o.metric("monotone", study.monotone);
    o.metric("l1_errors", study.rows.iter().map(|r| r.l1_error).collect::<Vec<_>>());
    if let Some(reports) = &study.oleinik {
        o.metric("one_sided_check", reports.iter().map(oleinik_json).collect::<Vec<_>>());
    }
    o.check("monotone_decrease", study.monotone, "L1 error does not decrease with alpha");
    o.check(
        "fitted_rate",
        study.slope >= MIN_ZERO_FILTER_RATE,
        format!("rate {} below {MIN_ZERO_FILTER_RATE}", study.slope),
    );
    Ok(o)
}

fn stability(cfg: &ExperimentConfig, phi: &str, psi: &str, alphas: &[f64], cells_per_alpha: f64, out: &Path) -> CliResult<Outcome> {
    let mut o = Outcome::new("filter_stability_sweep");
    require_physical_burgers(cfg)?;
    let file = cfg.filter.file.as_deref();
    let phi = named_filter(cfg, phi, file, "scenario.phi")?;
    let psi = named_filter(cfg, psi, file, "scenario.psi")?;
    sweep_support(cfg, &phi, alphas, cells_per_alpha)?;
    sweep_support(cfg, &psi, alphas, cells_per_alpha)?;
    let scheme = Scheme::parse(&cfg.integrator.scheme).map_err(|e| CliError::config("integrator.scheme", e.to_string()))?;
    let sweep = filter_stability_sweep(
        &phi,
        &psi,
        alphas,
        cells_per_alpha,
        (cfg.grid.lower, cfg.grid.lower + cfg.grid.length),
        &cfg.initial()?,
        cfg.integrator.t_end,
        scheme,
    )?;
    o.files.push(write_csv(
        &out.join("dependence.csv"),
        &["alpha", "cells", "lhs", "rhs_factor", "ratio"],
        sweep.rows.iter().map(|r| {
            vec![num(r.alpha), r.cells.to_string(), num(r.result.lhs), num(r.result.rhs_factor), num(r.result.ratio)]
        }),
    )?);
    o.metric("ratio_slope", sweep.ratio_slope);
    o.metric("max_ratio", sweep.max_ratio);
    o.check(
        "ratio_slope",
        sweep.ratio_slope <= MAX_RATIO_SLOPE,
        format!("ratio grows with slope {} against ln(1/alpha)", sweep.ratio_slope),
    );
    Ok(o)
}

fn stencil_equivalence(cfg: &ExperimentConfig, tolerance: f64, out: &Path) -> CliResult<Outcome> {
    let mut o = Outcome::new("stencil_equivalence");
    if cfg.grid.dim != 2 {
        return Err(CliError::config("grid.dim", "stencil_equivalence needs a 2D grid"));
    }
    let grid = cfg.grid()?;
    let u = cfg.initial()?.sample(&grid)?;
    let flux = cfg.flux(hull_of(&[&u]))?;
    let filter = cfg.filter()?;
    let hex = apply(&plan_for(cfg, &flux, &filter, &standard_measure("hexagon")?, &grid)?, &u)?;
    let tri = apply(&plan_for(cfg, &flux, &filter, &standard_measure("triangle")?, &grid)?, &u)?;
    let diff: Vec<f64> = hex.values.iter().zip(&tri.values).map(|(a, b)| (a - b).abs()).collect();
    let worst = diff.iter().copied().fold(0.0, f64::max);
    o.files.push(write_csv(
        &out.join("stencil.csv"),
        &["cell", "x", "y", "hexagon", "triangle", "difference"],
        grid.centers().iter().enumerate().map(|(i, c)| {
            vec![i.to_string(), num(c[0]), num(c[1]), num(hex.values[i]), num(tri.values[i]), num(diff[i])]
        }),
    )?);
    o.metric("triangle_vs_hexagon", worst);
    o.check("triangle_vs_hexagon", worst <= tolerance, format!("max discrepancy {worst:e} > {tolerance:e}"));

    // With the box filter at α = h the square measure is the per-axis EO scheme.
    if filter.name() == "box" && (filter.alpha() - grid.h()).abs() <= 1e-12 * grid.h() {
        let sq = apply(&plan_for(cfg, &flux, &filter, &standard_measure("square")?, &grid)?, &u)?;
        let sx = flux.directional_split(&[1.0, 0.0])?;
        let sy = flux.directional_split(&[0.0, 1.0])?;
        let [nx, ny] = grid.n();
        let v = &u.values;
        let mut worst_sq: f64 = 0.0;
        for iy in 0..ny {
            for ix in 0..nx {
                let c = v[grid.index(ix, iy)];
                let xp = v[grid.index((ix + 1) % nx, iy)];
                let xm = v[grid.index((ix + nx - 1) % nx, iy)];
                let yp = v[grid.index(ix, (iy + 1) % ny)];
                let ym = v[grid.index(ix, (iy + ny - 1) % ny)];
                let hand = (sx.eo(xp, c) - sx.eo(c, xm) + sy.eo(yp, c) - sy.eo(c, ym)) / grid.h();
                worst_sq = worst_sq.max((hand - sq.values[grid.index(ix, iy)]).abs());
            }
        }
        o.metric("square_vs_axis_eo", worst_sq);
        o.check("square_vs_axis_eo", worst_sq <= tolerance, format!("max discrepancy {worst_sq:e} > {tolerance:e}"));
    }
    Ok(o)
}

fn entropy_audit(cfg: &ExperimentConfig, kruzkov: &[f64], states: usize, out: &Path) -> CliResult<Outcome> {
    let mut o = Outcome::new("entropy_audit");
    let grid = cfg.grid()?;
    let data: Vec<GridFunction> = match &cfg.initial {
        InitialConfig::RandomBv { seed, tv_budget, pieces, range } => (0..states.max(1) as u64)
            .map(|i| {
                let s = seed.unwrap_or(cfg.seed) + i;
                InitialData::random_bv(cfg.grid.dim, s, *pieces, (range[0], range[1]), *tv_budget)
                    .and_then(|d| d.sample(&grid))
                    .map_err(|e| CliError::config("initial", e.to_string()))
            })
            .collect::<CliResult<_>>()?,
        _ => vec![cfg.initial()?.sample(&grid)?],
    };
    let flux = cfg.flux(hull_of(&data.iter().collect::<Vec<_>>()))?;
    let plan = plan_for(cfg, &flux, &cfg.filter()?, &cfg.measure()?, &grid)?;
    let ents = entropies(kruzkov);
    let mut rows = vec![];
    let mut worst = Map::new();
    for e in &ents {
        let mut m = f64::NEG_INFINITY;
        for (i, u) in data.iter().enumerate() {
            let r = entropy_residual(&plan, u, e)?;
            let top = r.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rows.push(vec![e.name(), i.to_string(), num(top)]);
            m = m.max(top);
        }
        worst.insert(e.name(), json!(m));
        o.check(format!("entropy.{}", e.name()), m <= ENTROPY_TOL, format!("max residual {m:e} > {ENTROPY_TOL:e}"));
    }
    o.files.push(write_csv(&out.join("entropy_audit.csv"), &["entropy", "state", "max_residual"], rows)?);
    o.metric("states", data.len());
    o.metric("max_residual", Value::Object(worst));
    Ok(o)
}

fn resolvent_check(
    cfg: &ExperimentConfig,
    alpha: Option<f64>,
    cells: Option<&[usize]>,
    freq: f64,
    equivalence_t_end: Option<f64>,
    out: &Path,
) -> CliResult<Outcome> {
    let mut o = Outcome::new("resolvent_check");
    if cfg.grid.dim != 1 {
        return Err(CliError::config("grid.dim", "resolvent_check is one-dimensional"));
    }
    let alpha = alpha.unwrap_or(cfg.filter.alpha);
    let n = cfg.grid.n.unwrap_or(128);
    let cells: Vec<usize> = cells.map(<[usize]>::to_vec).unwrap_or_else(|| vec![n, 2 * n, 4 * n]);
    if cells.len() < 2 {
        return Err(CliError::config("scenario.cells", "need at least two grids"));
    }
    let mut hs = vec![];
    let mut res = vec![];
    for &c in &cells {
        let grid = cfg.grid_with(c)?;
        let ops = ExpOperators::new(alpha, &grid).map_err(|e| match e {
            upwind_core::Error::SupportTooLarge { support, half } => {
                CliError::config("scenario.alpha", format!("support exceeds half domain (support {support}, half domain {half})"))
            }
            other => CliError::config("scenario.alpha", other.to_string()),
        })?;
        let k = std::f64::consts::TAU * freq / cfg.grid.length;
        let v: Vec<f64> = grid.centers().iter().map(|x| (k * (x[0] - cfg.grid.lower)).sin()).collect();
        hs.push(grid.h());
        res.push(inverse_check(&ops, &v).as_array());
    }
    o.files.push(write_csv(
        &out.join("resolvent.csv"),
        &["h", "plus", "minus", "relation_plus", "relation_minus"],
        hs.iter().zip(&res).map(|(h, r)| {
            let mut row = vec![num(*h)];
            row.extend(r.iter().map(|&x| num(x)));
            row
        }),
    )?);
    let names = ["plus", "minus", "relation_plus", "relation_minus"];
    let mut orders = Map::new();
    for (i, name) in names.iter().enumerate() {
        let ys: Vec<f64> = res.iter().map(|r| r[i]).collect();
        let (order, _) = fit_loglog(&hs, &ys)?;
        orders.insert(name.to_string(), json!(order));
        o.check(
            format!("order.{name}"),
            order >= MIN_RESOLVENT_ORDER,
            format!("observed order {order} below {MIN_RESOLVENT_ORDER}"),
        );
    }
    o.metric("orders", Value::Object(orders));

    if let Some(t_end) = equivalence_t_end {
        let grid = cfg.grid_with(cells[cells.len() / 2])?;
        let ops = ExpOperators::new(alpha, &grid)?;
        let u0 = cfg.initial()?.sample(&grid)?;
        let flux = cfg.flux(hull_of(&[&u0]))?;
        match monotone_equivalence(&ops, &flux, &u0, t_end) {
            Ok(eq) => {
                let tol = 5.0 * (eq.h * eq.h + eq.dt);
                o.metric("equivalence_gap", eq.l1_gap);
                o.metric("equivalence_tolerance", tol);
                o.check("monotone_equivalence", eq.l1_gap <= tol, format!("gap {} > 5(h^2 + dt) = {}", eq.l1_gap, tol));
            }
            Err(upwind_core::Error::NotMonotone(at)) => {
                o.check("monotone_flux", false, format!("flux is not non-decreasing (near u = {at})"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(o)
}

/// `apply` against the unfolded definition on the configured state.
pub fn operator_check(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    ensure_dir(out)?;
    let mut o = Outcome::new("operator_check");
    let grid = cfg.grid()?;
    let u = cfg.initial()?.sample(&grid)?;
    let flux = cfg.flux(hull_of(&[&u]))?;
    let plan = plan_for(cfg, &flux, &cfg.filter()?, &cfg.measure()?, &grid)?;
    let a = apply(&plan, &u)?;
    let b = apply_raw(&plan, &u)?;
    let two = grid.dim() == 2;
    let header: &[&str] = if two {
        &["cell", "x", "y", "apply", "apply_raw", "difference"]
    } else {
        &["cell", "x", "apply", "apply_raw", "difference"]
    };
    let mut worst: f64 = 0.0;
    let rows: Vec<Vec<String>> = grid
        .centers()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = (a.values[i] - b.values[i]).abs();
            worst = worst.max(d);
            let mut r = vec![i.to_string(), num(c[0])];
            if two {
                r.push(num(c[1]));
            }
            r.extend([num(a.values[i]), num(b.values[i]), num(d)]);
            r
        })
        .collect();
    o.files.push(write_csv(&out.join("operator_check.csv"), header, rows)?);
    let total = mass(&a);
    let n = grid.len() as f64;
    o.metric("max_difference", worst);
    o.metric("total", total);
    o.metric("on_lattice", plan.on_lattice());
    o.check("definition_vs_folded", worst <= FORM_TOL, format!("max discrepancy {worst:e}"));
    o.check("conservation", total.abs() <= FORM_TOL * n, format!("h^d sum of apply = {total:e}"));
    o.finish(out)
}

/// Diagnostics of a solution CSV written by `run`, with the exact error when
/// the config describes a Burgers Riemann problem.
pub fn analyze(input: &Path, cfg: Option<&ExperimentConfig>, out: &Path) -> CliResult<Outcome> {
    ensure_dir(out)?;
    let mut o = Outcome::new("analyze");
    let u = read_solution(input)?;
    o.metric("t", u.t);
    o.metric("cells", u.grid.len());
    o.metric("sup", u.max());
    o.metric("inf", u.min());
    o.metric("tv", tv(&u));
    o.metric("mass", mass(&u));
    o.metric("l1_norm", l1_norm(&u));
    if let Some(cfg) = cfg {
        let sol = match cfg.initial {
            InitialConfig::Riemann { u_l, u_r, x0 } if cfg.flux.name == "burgers" && cfg.flux.convention == Convention::Conservation => {
                if u_l > u_r {
                    Some(ExactSolution::BurgersShock { u_l, u_r, x0 })
                } else if u_l < u_r {
                    Some(ExactSolution::BurgersRarefaction { u_l, u_r, x0 })
                } else {
                    None
                }
            }
            _ => None,
        };
        if let Some(sol) = sol {
            let exact = exact_evaluate(&sol, &u.grid, u.t)?;
            o.metric("l1_error", l1_distance(&u, &exact)?);
        }
    }
    o.finish(out)
}

fn read_solution(path: &Path) -> CliResult<GridFunction> {
    let shown = path.display().to_string();
    let bad = |m: String| CliError::Input { path: shown.clone(), message: m };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let two = match header.iter().collect::<Vec<_>>().as_slice() {
        ["t", "x", "u"] => false,
        ["t", "x", "y", "u"] => true,
        _ => return Err(bad("expected header `t,x,u` or `t,x,y,u`".into())),
    };
    let mut rows: Vec<Vec<f64>> = vec![];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        rows.push(rec.iter().map(|s| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")))).collect::<CliResult<_>>()?);
    }
    if rows.len() < 4 {
        return Err(bad("need at least four cells".into()));
    }
    let t = rows[0][0];
    let h = rows[1][1] - rows[0][1];
    let values: Vec<f64> = rows.iter().map(|r| r[r.len() - 1]).collect();
    let grid = if two {
        let n = (rows.len() as f64).sqrt().round() as usize;
        if n * n != rows.len() {
            return Err(bad("2D solutions must be square".into()));
        }
        Grid::new_2d(n, n, h, [rows[0][1] - 0.5 * h, rows[0][2] - 0.5 * h])?
    } else {
        let lo = rows[0][1] - 0.5 * h;
        Grid::new_1d(rows.len(), lo, lo + h * rows.len() as f64)?
    };
    Ok(GridFunction::new(grid, values, t)?)
}

/// Output directory: `--out` wins over the config.
pub fn output_dir(cfg: Option<&ExperimentConfig>, flag: Option<&Path>) -> PathBuf {
    match (flag, cfg) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(c)) => c.resolve(&c.output.dir),
        (None, None) => PathBuf::from("out"),
    }
}
