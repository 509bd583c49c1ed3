//! One-sided exponential averages and their first-order inverses in 1D.
//!
//! `A⁺v(x) = ∫₀^∞ e^{−ζ/α}/α v(x + ζ) dζ` and `A⁻v(x) = ∫₀^∞ e^{−ζ/α}/α v(x − ζ) dζ`
//! are inverted by `𝔸⁺ = I − α∂x` and `𝔸⁻ = I + α∂x`. In terms of the
//! unfiltered variable `U⁺ = 𝔸⁺u`, the filtered equation `u_t = aud f(u)`
//! becomes `∂t U⁺ = ∂x(f̃(u) + 2A⁻f⁻(u))` with `f̃ = f⁺ − f⁻`.

use crate::analysis::diagnostics::l1_distance;
use crate::error::{Error, Result};
use crate::evolve::{run, Integrator, Scheme};
use crate::filter::{builtin_filter, rescale, TAIL_TOL};
use crate::flux::{DirectionalSplit, FluxSpec};
use crate::geometry::{standard_measure, Grid, GridFunction};
use crate::operator::{apply_values, build_plan};

/// Discrete `A±` and `𝔸±` on a periodic 1D grid.
#[derive(Debug, Clone)]
pub struct ExpOperators {
    alpha: f64,
    grid: Grid,
    /// Cell integrals of the kernel: `w_0` over `[0, h/2]`, `w_m` over
    /// `[(m − ½)h, (m + ½)h]`; the tail is folded into the last weight.
    weights: Vec<f64>,
}

impl ExpOperators {
    pub fn new(alpha: f64, grid: &Grid) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: grid.dim() });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::NonPositiveScale(alpha));
        }
        let support = alpha * (1.0 / TAIL_TOL).ln();
        let half = grid.half_domain();
        if support >= half {
            return Err(Error::SupportTooLarge { support, half });
        }
        let h = grid.h();
        let m = (support / h).ceil() as usize;
        let mut weights = Vec::with_capacity(m + 1);
        weights.push(-(-h / (2.0 * alpha)).exp_m1());
        for k in 1..=m {
            let a = (k as f64 - 0.5) * h / alpha;
            // e^{−a} − e^{−a − h/α} = e^{−a}(1 − e^{−h/α})
            weights.push((-a).exp() * -(-h / alpha).exp_m1());
        }
        let head: f64 = weights[..m].iter().sum();
        weights[m] = 1.0 - head;
        Ok(Self { alpha, grid: grid.clone(), weights })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn convolve(&self, v: &[f64], sign: isize) -> Vec<f64> {
        let n = v.len() as isize;
        (0..n)
            .map(|j| {
                self.weights
                    .iter()
                    .enumerate()
                    .map(|(m, w)| w * v[(j + sign * m as isize).rem_euclid(n) as usize])
                    .sum()
            })
            .collect()
    }

    pub fn average_plus(&self, v: &[f64]) -> Vec<f64> {
        self.convolve(v, 1)
    }

    pub fn average_minus(&self, v: &[f64]) -> Vec<f64> {
        self.convolve(v, -1)
    }

    /// Centred difference `(v_{j+1} − v_{j−1}) / 2h`.
    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let h = self.grid.h();
        (0..n).map(|j| (v[(j + 1) % n] - v[(j + n - 1) % n]) / (2.0 * h)).collect()
    }

    /// `𝔸⁺v = v − α ∂x v`.
    pub fn inverse_plus(&self, v: &[f64]) -> Vec<f64> {
        let d = self.derivative(v);
        v.iter().zip(&d).map(|(a, b)| a - self.alpha * b).collect()
    }

    /// `𝔸⁻v = v + α ∂x v`.
    pub fn inverse_minus(&self, v: &[f64]) -> Vec<f64> {
        let d = self.derivative(v);
        v.iter().zip(&d).map(|(a, b)| a + self.alpha * b).collect()
    }
}

pub fn average_plus(ops: &ExpOperators, v: &GridFunction) -> Result<GridFunction> {
    if v.grid != ops.grid {
        return Err(Error::GridMismatch);
    }
    Ok(GridFunction { grid: v.grid.clone(), values: ops.average_plus(&v.values), t: v.t })
}

pub fn average_minus(ops: &ExpOperators, v: &GridFunction) -> Result<GridFunction> {
    if v.grid != ops.grid {
        return Err(Error::GridMismatch);
    }
    Ok(GridFunction { grid: v.grid.clone(), values: ops.average_minus(&v.values), t: v.t })
}

/// Sup-norm residuals of the resolvent identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseResiduals {
    /// `‖𝔸⁺A⁺v − v‖∞`
    pub plus: f64,
    /// `‖𝔸⁻A⁻v − v‖∞`
    pub minus: f64,
    /// `‖𝔸⁺A⁻v − (2A⁻v − v)‖∞`
    pub relation_plus: f64,
    /// `‖𝔸⁻A⁺v − (2A⁺v − v)‖∞`
    pub relation_minus: f64,
}

impl InverseResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.plus, self.minus, self.relation_plus, self.relation_minus]
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn inverse_check(ops: &ExpOperators, v: &[f64]) -> InverseResiduals {
    let ap = ops.average_plus(v);
    let am = ops.average_minus(v);
    let twice = |a: &[f64]| -> Vec<f64> { a.iter().zip(v).map(|(x, y)| 2.0 * x - y).collect() };
    InverseResiduals {
        plus: sup_diff(&ops.inverse_plus(&ap), v),
        minus: sup_diff(&ops.inverse_minus(&am), v),
        relation_plus: sup_diff(&ops.inverse_plus(&am), &twice(&am)),
        relation_minus: sup_diff(&ops.inverse_minus(&ap), &twice(&ap)),
    }
}

fn ensure_monotone(split: &DirectionalSplit) -> Result<()> {
    let (lo, hi) = split.state_range();
    for i in 0..=1024 {
        let u = lo + (hi - lo) * i as f64 / 1024.0;
        let m = split.g_minus(u);
        if m.abs() > 1e-12 {
            return Err(Error::NotMonotone(u));
        }
    }
    Ok(())
}

/// `∂t U⁺ = ∂x f(u)` for a non-decreasing flux.
pub fn unfiltered_system_step(ops: &ExpOperators, flux: &FluxSpec, u: &[f64]) -> Result<Vec<f64>> {
    let split = flux.directional_split(&[1.0])?;
    ensure_monotone(&split)?;
    let f: Vec<f64> = u.iter().map(|&x| split.total(x)).collect();
    Ok(ops.derivative(&f))
}

/// `∂t U⁺ = ∂x(f̃(u) + 2A⁻f⁻(u))` for a general flux.
pub fn unfiltered_system_rhs(ops: &ExpOperators, flux: &FluxSpec, u: &[f64]) -> Result<Vec<f64>> {
    let split = flux.directional_split(&[1.0])?;
    let minus: Vec<f64> = u.iter().map(|&x| split.g_minus(x)).collect();
    let am = ops.average_minus(&minus);
    let inner: Vec<f64> = u
        .iter()
        .zip(&minus)
        .zip(&am)
        .map(|((&x, &m), &a)| split.g_plus(x) - m + 2.0 * a)
        .collect();
    Ok(ops.derivative(&inner))
}

/// Outcome of evolving the filtered and unfiltered forms side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceResult {
    pub l1_gap: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Evolves `u_t = aud f(u)` with the exponential filter and, separately,
/// `U⁺_t = ∂x f(A⁺U⁺)` from `U⁺ = 𝔸⁺u0`, using the same SSP-RK3 steps;
/// returns `‖u(T) − A⁺U⁺(T)‖₁`.
pub fn monotone_equivalence(ops: &ExpOperators, flux: &FluxSpec, u0: &GridFunction, t_end: f64) -> Result<EquivalenceResult> {
    if u0.grid != ops.grid {
        return Err(Error::GridMismatch);
    }
    let split = flux.directional_split(&[1.0])?;
    ensure_monotone(&split)?;
    let phi = rescale(&builtin_filter("exponential")?, ops.alpha)?;
    let plan = build_plan(flux, &phi, &standard_measure("line")?, &ops.grid)?;
    let it = Integrator::new(Scheme::SspRk3, t_end);
    let dt = it.resolve_dt(&plan)?;
    let filtered = run(&plan, u0, &it, &[], &[])?;

    let rhs = |big: &[f64]| -> Result<Vec<f64>> { unfiltered_system_step(ops, flux, &ops.average_plus(big)) };
    let euler = |v: &[f64], h: f64| -> Result<Vec<f64>> {
        let r = rhs(v)?;
        Ok(v.iter().zip(&r).map(|(a, b)| a + h * b).collect())
    };
    let mut big = ops.inverse_plus(&u0.values);
    let n = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    for i in 0..n {
        let h = if i + 1 == n { t_end - (n - 1) as f64 * dt } else { dt };
        let u1 = euler(&big, h)?;
        let e1 = euler(&u1, h)?;
        let u2: Vec<f64> = big.iter().zip(&e1).map(|(a, b)| 0.75 * a + 0.25 * b).collect();
        let e2 = euler(&u2, h)?;
        big = big.iter().zip(&e2).map(|(a, b)| a / 3.0 + 2.0 / 3.0 * b).collect();
    }
    let recon = GridFunction { grid: ops.grid.clone(), values: ops.average_plus(&big), t: t_end };
    let l1_gap = l1_distance(&filtered.last().u, &recon)?;
    Ok(EquivalenceResult { l1_gap, h: ops.grid.h(), dt, steps: n })
}

/// `𝔸⁺ aud f(u)` evaluated through the operator module with the exponential
/// filter, for comparison with [`unfiltered_system_rhs`].
pub fn filtered_rhs_in_unfiltered_variable(ops: &ExpOperators, flux: &FluxSpec, u: &[f64]) -> Result<Vec<f64>> {
    let phi = rescale(&builtin_filter("exponential")?, ops.alpha)?;
    let plan = build_plan(flux, &phi, &standard_measure("line")?, &ops.grid)?;
    Ok(ops.inverse_plus(&apply_values(&plan, u)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(n: usize, alpha: f64) -> ExpOperators {
        ExpOperators::new(alpha, &Grid::new_1d(n, 0.0, 6.0).unwrap()).unwrap()
    }

    #[test]
    fn weights_have_unit_mass() {
        let o = ops(768, 0.1);
        assert!(o.weights().iter().all(|&w| w >= 0.0));
        assert!((o.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let c = vec![2.5; 768];
        assert!(o.average_plus(&c).iter().all(|v| (v - 2.5).abs() < 1e-14));
        let r = inverse_check(&o, &c);
        assert!(r.as_array().iter().all(|&x| x < 1e-13));
    }

    #[test]
    fn sine_closed_form() {
        let alpha = 0.1;
        let k = std::f64::consts::TAU;
        let mut errs = vec![];
        for n in [768, 1536] {
            let o = ops(n, alpha);
            let xs: Vec<f64> = o.grid().centers().iter().map(|x| x[0]).collect();
            let v: Vec<f64> = xs.iter().map(|x| (k * x).sin()).collect();
            let ap = o.average_plus(&v);
            let am = o.average_minus(&v);
            let d = 1.0 + (k * alpha).powi(2);
            let mut e: f64 = 0.0;
            for (i, x) in xs.iter().enumerate() {
                e = e.max((ap[i] - ((k * x).sin() + k * alpha * (k * x).cos()) / d).abs());
                e = e.max((am[i] - ((k * x).sin() - k * alpha * (k * x).cos()) / d).abs());
            }
            errs.push(e);
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.5, "{errs:?}");
    }

    #[test]
    fn pulse_stays_between_bounds() {
        let o = ExpOperators::new(0.05, &Grid::new_1d(64, 0.0, 4.0).unwrap()).unwrap();
        let v: Vec<f64> = (0..64).map(|i| if i == 32 { 1.0 } else { 0.0 }).collect();
        let a = o.average_plus(&v);
        assert!(a.iter().all(|&x| (0.0..1.0).contains(&x)));
        // Upwind side of the pulse for A⁺ is to the left: a decreasing tail.
        for j in 20..32 {
            assert!(a[j] <= a[j + 1]);
        }
        assert!(a[33..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn monotone_flux_required() {
        let o = ops(128, 0.1);
        let f = FluxSpec::burgers((-1.0, 1.0)).unwrap();
        assert!(matches!(unfiltered_system_step(&o, &f, &[0.0; 128]), Err(Error::NotMonotone(_))));
        let adv = FluxSpec::advection(1.0, (-1.0, 1.0)).unwrap();
        let zero = unfiltered_system_step(&o, &adv, &[0.3; 128]).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_wide_kernel() {
        let g = Grid::new_1d(64, 0.0, 1.0).unwrap();
        assert!(matches!(ExpOperators::new(0.1, &g), Err(Error::SupportTooLarge { .. })));
    }
}
