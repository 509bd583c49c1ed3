//! Discrete average upwind divergence.
//!
//! For a folded direction set `{(n, ω_n)}` and radial weights `ψ_k ≤ 0` at
//! `r_k = k h`, the operator at a cell `x` is
//!
//! ```text
//! aud F(u)(x) = Σ_n ω_n Σ_k (−ψ_k) [EO_n(u(x + r_k n), u(x)) − EO_n(u(x), u(x − r_k n))]
//! ```
//!
//! with `EO_n(a, b) = [F·n]⁺(a) + [F·n]⁻(b)`. It approximates `+div F(u)`.
//!
//! Off-lattice shifts sample `[F·n]⁺∘u` and `[F·n]⁻∘u` by bilinear
//! interpolation of the split values rather than of `u`. The interface fluxes
//! then telescope over the periodic grid and every tap enters with a
//! non-negative weight, so the scheme stays conservative and monotone.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::flux::{DirectionalSplit, FluxSpec, SplitCache};
use crate::geometry::{DirectionMeasure, FoldedMeasure, Grid, GridFunction, ShiftStencil};

/// Overshoot of the certified state range tolerated before a value counts as
/// a range violation; covers round-off in multi-stage time steps.
pub const RANGE_SLACK: f64 = 1e-8;

/// One direction of a plan with its weight, split and shift stencils.
#[derive(Debug, Clone)]
pub struct DirectionPlan {
    pub n: [f64; 2],
    pub weight: f64,
    pub split: DirectionalSplit,
    /// `x ↦ x + r_k n`, one per radial node.
    pub forward: Vec<ShiftStencil>,
    /// `x ↦ x − r_k n`, one per radial node.
    pub backward: Vec<ShiftStencil>,
}

/// Radial quadrature node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub k: usize,
    pub r: f64,
    pub psi: f64,
}

/// Everything needed to evaluate the operator on a fixed grid.
#[derive(Debug, Clone)]
pub struct OperatorPlan {
    grid: Grid,
    flux: FluxSpec,
    filter: Filter,
    measure: DirectionMeasure,
    folded: FoldedMeasure,
    directions: Vec<DirectionPlan>,
    raw_directions: Vec<DirectionPlan>,
    radial: Vec<RadialNode>,
    phi0: f64,
}

fn direction_plan(
    grid: &Grid,
    cache: &mut SplitCache,
    flux: &FluxSpec,
    n: [f64; 2],
    weight: f64,
    radial: &[RadialNode],
) -> Result<DirectionPlan> {
    let split = cache.get(flux, &n[..grid.dim()])?;
    let forward = radial.iter().map(|node| ShiftStencil::new(grid, n, node.r)).collect();
    let backward = radial.iter().map(|node| ShiftStencil::new(grid, [-n[0], -n[1]], node.r)).collect();
    Ok(DirectionPlan { n, weight, split, forward, backward })
}

pub fn build_plan(flux: &FluxSpec, filter: &Filter, measure: &DirectionMeasure, grid: &Grid) -> Result<OperatorPlan> {
    let d = grid.dim();
    if flux.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: flux.dim() });
    }
    if measure.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: measure.dim() });
    }
    let phi0 = filter.phi_at_zero();
    if !phi0.is_finite() {
        return Err(Error::UnboundedFilter);
    }
    let support = filter.support_radius();
    let half = grid.half_domain();
    if support >= half {
        return Err(Error::SupportTooLarge { support, half });
    }
    let h = grid.h();
    let cells = ((support / h).ceil() as usize).max(1);
    let radial: Vec<RadialNode> = filter
        .derivative_cell_weights(h, cells)?
        .into_iter()
        .enumerate()
        .filter(|(_, psi)| *psi != 0.0)
        .map(|(i, psi)| RadialNode { k: i + 1, r: (i + 1) as f64 * h, psi })
        .collect();

    let mut cache = SplitCache::default();
    let folded = measure.fold();
    let directions = folded
        .atoms()
        .iter()
        .map(|&(n, w)| direction_plan(grid, &mut cache, flux, n, w, &radial))
        .collect::<Result<Vec<_>>>()?;
    let raw_directions = measure
        .atoms()
        .iter()
        .map(|&(n, w)| direction_plan(grid, &mut cache, flux, n, w, &radial))
        .collect::<Result<Vec<_>>>()?;

    Ok(OperatorPlan {
        grid: grid.clone(),
        flux: flux.clone(),
        filter: filter.clone(),
        measure: measure.clone(),
        folded,
        directions,
        raw_directions,
        radial,
        phi0,
    })
}

impl OperatorPlan {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn flux(&self) -> &FluxSpec {
        &self.flux
    }

    pub fn filter(&self) -> &Filter {
        &self.filter
    }

    pub fn measure(&self) -> &DirectionMeasure {
        &self.measure
    }

    pub fn folded(&self) -> &FoldedMeasure {
        &self.folded
    }

    /// Folded directions used by [`apply`].
    pub fn directions(&self) -> &[DirectionPlan] {
        &self.directions
    }

    /// Unfolded directions used by [`apply_raw`].
    pub fn raw_directions(&self) -> &[DirectionPlan] {
        &self.raw_directions
    }

    pub fn radial(&self) -> &[RadialNode] {
        &self.radial
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Whether every shift in the plan is an exact lattice shift.
    pub fn on_lattice(&self) -> bool {
        self.directions.iter().all(|d| d.forward.iter().chain(&d.backward).all(ShiftStencil::is_exact))
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        let (lo, hi) = self.flux.state_range();
        for &v in values {
            if !(v >= lo - RANGE_SLACK && v <= hi + RANGE_SLACK) {
                return Err(Error::RangeViolation { value: v, lo, hi });
            }
        }
        Ok(())
    }

    /// Evaluates `Σ_n w_n Σ_k ψ_k term(i_n, n, u(x), fwd, bwd)` over the
    /// unfolded directions `i_n`, in a fixed order per cell. `fwd` and `bwd`
    /// sample functions of `u` at `x ± r_k n`.
    pub fn raw_sum<T>(&self, values: &[f64], term: T) -> Result<Vec<f64>>
    where
        T: Fn(usize, &DirectionPlan, f64, &Probe<'_>, &Probe<'_>) -> f64 + Sync,
    {
        self.check(values)?;
        let grid = &self.grid;
        let nx = grid.n()[0];
        Ok((0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                let u0 = values[i];
                let mut acc = 0.0;
                for (j, dir) in self.raw_directions.iter().enumerate() {
                    let mut s = 0.0;
                    for (k, node) in self.radial.iter().enumerate() {
                        let f = Probe { stencil: &dir.forward[k], grid, values, ix, iy };
                        let b = Probe { stencil: &dir.backward[k], grid, values, ix, iy };
                        s += node.psi * term(j, dir, u0, &f, &b);
                    }
                    acc += dir.weight * s;
                }
                acc
            })
            .collect())
    }
}

/// A shifted sample point handed to [`OperatorPlan::raw_sum`] terms.
pub struct Probe<'a> {
    stencil: &'a ShiftStencil,
    grid: &'a Grid,
    values: &'a [f64],
    ix: usize,
    iy: usize,
}

impl Probe<'_> {
    /// Interpolated `g(u)` at the shifted point.
    pub fn mean(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.stencil.mean(self.grid, self.values, self.ix, self.iy, g)
    }
}

/// `aud F(u)` in folded Engquist–Osher form, as raw values.
pub fn apply_values(plan: &OperatorPlan, values: &[f64]) -> Result<Vec<f64>> {
    plan.check(values)?;
    let grid = &plan.grid;
    let nx = grid.n()[0];
    // Split values at the cell centres; every shift samples these tables.
    let centred: Vec<(Vec<f64>, Vec<f64>)> = plan
        .directions
        .iter()
        .map(|d| {
            let gp = values.iter().map(|&u| d.split.g_plus(u)).collect();
            let gm = values.iter().map(|&u| d.split.g_minus(u)).collect();
            (gp, gm)
        })
        .collect();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (ix, iy) = (i % nx, i / nx);
            let mut acc = 0.0;
            for (dir, (gp, gm)) in plan.directions.iter().zip(&centred) {
                let (gp0, gm0) = (gp[i], gm[i]);
                let mut s = 0.0;
                for (k, node) in plan.radial.iter().enumerate() {
                    let gp_f = dir.forward[k].sample(grid, gp, ix, iy);
                    let gm_b = dir.backward[k].sample(grid, gm, ix, iy);
                    let upper = gp_f + gm0;
                    let lower = gp0 + gm_b;
                    s += -node.psi * (upper - lower);
                }
                acc += dir.weight * s;
            }
            acc
        })
        .collect())
}

pub fn apply(plan: &OperatorPlan, u: &GridFunction) -> Result<GridFunction> {
    if u.grid != plan.grid {
        return Err(Error::GridMismatch);
    }
    Ok(GridFunction { grid: u.grid.clone(), values: apply_values(plan, &u.values)?, t: u.t })
}

/// The unfolded definition with forward shifts for `g⁺` and backward shifts
/// for `g⁻`.
pub fn apply_raw(plan: &OperatorPlan, u: &GridFunction) -> Result<GridFunction> {
    if u.grid != plan.grid {
        return Err(Error::GridMismatch);
    }
    let values = plan.raw_sum(&u.values, |_, dir, u0, f, b| {
        let s = &dir.split;
        s.g_plus(u0) - f.mean(|v| s.g_plus(v)) - s.g_minus(u0) + b.mean(|v| s.g_minus(v))
    })?;
    Ok(GridFunction { grid: u.grid.clone(), values, t: u.t })
}

/// `4 L w(S^{d−1}) Φ_α(0)`, a Lipschitz constant of `u ↦ aud F(u)` in sup norm.
pub fn lipschitz_bound(plan: &OperatorPlan) -> f64 {
    4.0 * plan.flux.lipschitz() * plan.measure.total() * plan.phi0
}
