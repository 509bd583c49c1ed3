//! Convergence and stability studies over sweeps of filter scales.

use crate::analysis::diagnostics::l1_distance;
use crate::analysis::exact::{exact_evaluate, ExactSolution};
use crate::error::{Error, Result};
use crate::evolve::{run, Integrator, Scheme};
use crate::filter::{moment_distance, rescale, Filter};
use crate::flux::FluxSpec;
use crate::geometry::{standard_measure, Grid, GridFunction};
use crate::initial::InitialData;
use crate::operator::build_plan;

/// Least-squares fit of `ln y = slope·ln x + intercept`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("log-log fit needs at least two matching points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::Invalid("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Smallest interval containing the data and 0.
pub fn state_hull(u: &GridFunction) -> (f64, f64) {
    (u.min().min(0.0), u.max().max(0.0))
}

/// One-sided slope check for Burgers rarefactions: forward difference
/// quotients `(u_{j+s} − u_j)/(s h)` inside the fan should not exceed `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct OleinikReport {
    pub max_forward_slope: f64,
    /// Difference stride `s` in cells.
    pub stride: usize,
    pub bound: f64,
    pub holds: bool,
}

pub fn oleinik_check(u: &GridFunction, fan: (f64, f64), t: f64, stride: usize) -> OleinikReport {
    let g = &u.grid;
    let stride = stride.max(1);
    let step = stride as f64 * g.h();
    let n = g.len();
    let mut max_slope = f64::NEG_INFINITY;
    for j in 0..n {
        let x = g.center(j)[0];
        if x >= fan.0 && x + step <= fan.1 {
            max_slope = max_slope.max((u.values[(j + stride) % n] - u.values[j]) / step);
        }
    }
    let bound = 2.0 / t;
    OleinikReport { max_forward_slope: max_slope, stride, bound, holds: max_slope <= bound + 1e-8 }
}

#[derive(Debug, Clone)]
pub struct ZeroFilterConfig {
    /// Unit-scale filter shape.
    pub filter: Filter,
    pub alphas: Vec<f64>,
    /// `h = α / cells_per_alpha`.
    pub cells_per_alpha: f64,
    pub domain: (f64, f64),
    pub t_end: f64,
    pub scheme: Scheme,
    pub safety: f64,
    pub solution: ExactSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroFilterRow {
    pub alpha: f64,
    pub h: f64,
    pub cells: usize,
    pub l1_error: f64,
}

#[derive(Debug, Clone)]
pub struct ZeroFilterStudy {
    pub rows: Vec<ZeroFilterRow>,
    pub slope: f64,
    /// Fitted constant `C` in `error ≈ C α^slope`.
    pub constant: f64,
    pub monotone: bool,
    /// Only for rarefaction data, on the finest run: grid-scale and
    /// filter-scale (`stride = round(α/h)`) differences.
    pub oleinik: Option<[OleinikReport; 2]>,
}

/// Runs the physical 1D Burgers problem `u_t + (u²/2)_x = 0` for each α and
/// measures the L¹ error against the exact solution at `t_end`.
pub fn zero_filter_study(cfg: &ZeroFilterConfig) -> Result<ZeroFilterStudy> {
    let mut rows = Vec::new();
    let mut last = None;
    for &alpha in &cfg.alphas {
        let h = alpha / cfg.cells_per_alpha;
        let cells = ((cfg.domain.1 - cfg.domain.0) / h).round() as usize;
        let grid = Grid::new_1d(cells, cfg.domain.0, cfg.domain.1)?;
        let u0 = cfg.solution.initial().sample(&grid)?;
        let flux = FluxSpec::burgers(state_hull(&u0))?.negated();
        let phi = rescale(&cfg.filter, alpha)?;
        let plan = build_plan(&flux, &phi, &standard_measure("line")?, &grid)?;
        let it = Integrator::new(cfg.scheme, cfg.t_end).with_safety(cfg.safety);
        let tr = run(&plan, &u0, &it, &[], &[])?;
        let exact = exact_evaluate(&cfg.solution, &grid, cfg.t_end)?;
        let err = l1_distance(&tr.last().u, &exact)?;
        rows.push(ZeroFilterRow { alpha, h, cells, l1_error: err });
        last = Some(tr.last().u.clone());
    }
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.l1_error).collect();
    let (slope, intercept) = fit_loglog(&alphas, &errs)?;
    let mut order: Vec<&ZeroFilterRow> = rows.iter().collect();
    order.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    let monotone = order.windows(2).all(|w| w[1].l1_error < w[0].l1_error);
    let oleinik = match (&cfg.solution, last) {
        (ExactSolution::BurgersRarefaction { u_l, u_r, x0 }, Some(u)) => {
            let fan = (x0 + u_l * cfg.t_end, x0 + u_r * cfg.t_end);
            let stride = cfg.cells_per_alpha.round() as usize;
            Some([oleinik_check(&u, fan, cfg.t_end, 1), oleinik_check(&u, fan, cfg.t_end, stride)])
        }
        _ => None,
    };
    Ok(ZeroFilterStudy { rows, slope, constant: intercept.exp(), monotone, oleinik })
}

/// Result of comparing two filtered runs from the same initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceResult {
    /// `‖u^Φ(T) − u^Ψ(T)‖₁`
    pub lhs: f64,
    /// `√(T · ∫ r |Φ_α − Ψ_β| dr)`
    pub rhs_factor: f64,
    pub ratio: f64,
}

/// Runs `u0` with filters `phi` and `psi` (already rescaled) on the same grid
/// and flux, returning the L¹ gap at `t_end` and the filter-distance factor.
pub fn continuous_dependence_study(
    flux: &FluxSpec,
    u0: &GridFunction,
    phi: &Filter,
    psi: &Filter,
    t_end: f64,
    scheme: Scheme,
) -> Result<DependenceResult> {
    let grid = u0.grid.clone();
    let measure = standard_measure(if grid.dim() == 1 { "line" } else { "square" })?;
    let pa = build_plan(flux, phi, &measure, &grid)?;
    let pb = build_plan(flux, psi, &measure, &grid)?;
    // A common step keeps the two runs comparable.
    let ia = Integrator::new(scheme, t_end);
    let dt = ia.resolve_dt(&pa)?.min(ia.resolve_dt(&pb)?);
    let a = run(&pa, u0, &ia.clone().with_dt(dt), &[], &[])?;
    let b = run(&pb, u0, &ia.with_dt(dt), &[], &[])?;
    let lhs = l1_distance(&a.last().u, &b.last().u)?;
    let rhs_factor = (t_end * moment_distance(phi, psi)).sqrt();
    let ratio = if rhs_factor > 0.0 { lhs / rhs_factor } else { 0.0 };
    Ok(DependenceResult { lhs, rhs_factor, ratio })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceRow {
    pub alpha: f64,
    pub cells: usize,
    pub result: DependenceResult,
}

#[derive(Debug, Clone)]
pub struct DependenceSweep {
    pub rows: Vec<DependenceRow>,
    /// Slope of `ln ratio` against `ln(1/α)`; positive means the ratio grows
    /// as the filters shrink.
    pub ratio_slope: f64,
    /// Largest observed ratio, an empirical constant.
    pub max_ratio: f64,
}

/// Physical 1D Burgers runs with `phi_α` and `psi_α` for each α, on grids
/// with `h = α / cells_per_alpha`.
#[allow(clippy::too_many_arguments)]
pub fn filter_stability_sweep(
    phi: &Filter,
    psi: &Filter,
    alphas: &[f64],
    cells_per_alpha: f64,
    domain: (f64, f64),
    initial: &InitialData,
    t_end: f64,
    scheme: Scheme,
) -> Result<DependenceSweep> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        let h = alpha / cells_per_alpha;
        let cells = ((domain.1 - domain.0) / h).round() as usize;
        let grid = Grid::new_1d(cells, domain.0, domain.1)?;
        let u0 = initial.sample(&grid)?;
        let flux = FluxSpec::burgers(state_hull(&u0))?.negated();
        let result = continuous_dependence_study(&flux, &u0, &rescale(phi, alpha)?, &rescale(psi, alpha)?, t_end, scheme)?;
        rows.push(DependenceRow { alpha, cells, result });
    }
    let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.alpha).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.result.ratio).collect();
    let (ratio_slope, _) = fit_loglog(&inv, &ratios)?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(DependenceSweep { rows, ratio_slope, max_ratio })
}
