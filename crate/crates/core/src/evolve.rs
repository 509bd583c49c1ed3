//! Method-of-lines time stepping for `∂t u = aud F(u)`.

use crate::analysis::diagnostics::DiagnosticsReport;
use crate::analysis::entropy::Entropy;
use crate::error::{Error, Result};
use crate::geometry::GridFunction;
use crate::operator::{apply_values, lipschitz_bound, OperatorPlan};

/// Overshoot of the state range that aborts a run.
pub const BLOW_UP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    SspRk2,
    SspRk3,
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(Scheme::Euler),
            "ssp_rk2" => Ok(Scheme::SspRk2),
            "ssp_rk3" => Ok(Scheme::SspRk3),
            _ => Err(Error::UnknownName { kind: "scheme", name: name.to_string() }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::SspRk2 => "ssp_rk2",
            Scheme::SspRk3 => "ssp_rk3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrator {
    pub scheme: Scheme,
    /// Fixed step; `None` means `safety / lipschitz_bound`.
    pub dt: Option<f64>,
    pub safety: f64,
    pub t_end: f64,
}

impl Integrator {
    pub fn new(scheme: Scheme, t_end: f64) -> Self {
        Self { scheme, dt: None, safety: 0.5, t_end }
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    /// Step size for `plan`, checked against `safety / lipschitz_bound`.
    pub fn resolve_dt(&self, plan: &OperatorPlan) -> Result<f64> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::Invalid(format!("safety must lie in (0, 1], got {}", self.safety)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Invalid(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        let bound = self.safety / lipschitz_bound(plan);
        match self.dt {
            None => Ok(bound),
            Some(dt) if dt > 0.0 && dt <= bound * (1.0 + 1e-12) => Ok(dt),
            Some(dt) => Err(Error::StepBound { dt, bound }),
        }
    }
}

fn euler_stage(plan: &OperatorPlan, u: &[f64], dt: f64) -> Result<Vec<f64>> {
    let rhs = apply_values(plan, u)?;
    Ok(u.iter().zip(&rhs).map(|(a, r)| a + dt * r).collect())
}

fn combine(a: f64, u: &[f64], b: f64, v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(x, y)| a * x + b * y).collect()
}

/// One step of size `dt` on raw values.
pub fn step_values(plan: &OperatorPlan, u: &[f64], dt: f64, scheme: Scheme) -> Result<Vec<f64>> {
    let bound = 1.0 / lipschitz_bound(plan);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::StepBound { dt, bound });
    }
    let out = match scheme {
        Scheme::Euler => euler_stage(plan, u, dt)?,
        Scheme::SspRk2 => {
            let u1 = euler_stage(plan, u, dt)?;
            let u2 = euler_stage(plan, &u1, dt)?;
            combine(0.5, u, 0.5, &u2)
        }
        Scheme::SspRk3 => {
            let u1 = euler_stage(plan, u, dt)?;
            let e1 = euler_stage(plan, &u1, dt)?;
            let u2 = combine(0.75, u, 0.25, &e1);
            let e2 = euler_stage(plan, &u2, dt)?;
            combine(1.0 / 3.0, u, 2.0 / 3.0, &e2)
        }
    };
    Ok(out)
}

pub fn step(plan: &OperatorPlan, u: &GridFunction, dt: f64, scheme: Scheme) -> Result<GridFunction> {
    let values = step_values(plan, &u.values, dt, scheme)?;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { cell: i, t: u.t + dt });
    }
    Ok(GridFunction { grid: u.grid.clone(), values, t: u.t + dt })
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub u: GridFunction,
    pub report: DiagnosticsReport,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.u.t).collect()
    }
}

/// Integrates from `u0` to `integrator.t_end`, recording a snapshot at every
/// requested output time (and always at `t_end`). Steps are shortened to land
/// on output times exactly.
pub fn run(
    plan: &OperatorPlan,
    u0: &GridFunction,
    integrator: &Integrator,
    output_times: &[f64],
    entropies: &[Entropy],
) -> Result<Trajectory> {
    if u0.grid != *plan.grid() {
        return Err(Error::GridMismatch);
    }
    let dt = integrator.resolve_dt(plan)?;
    let t_end = integrator.t_end;
    let mut times: Vec<f64> = output_times.to_vec();
    if times.iter().any(|&t| !(t >= 0.0 && t <= t_end)) {
        return Err(Error::Invalid(format!("output times must lie in [0, {t_end}]")));
    }
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let (lo, hi) = plan.flux().state_range();
    let mut u = u0.values.clone();
    let mut t = u0.t;
    let mut steps = 0;
    let mut snapshots = Vec::with_capacity(times.len());
    for &target in &times {
        let span = target - t;
        if span > 0.0 {
            let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
            for i in 0..n {
                let h = if i + 1 == n { target - (t + (n - 1) as f64 * dt) } else { dt };
                u = step_values(plan, &u, h, integrator.scheme)?;
                steps += 1;
                let now = t + (i + 1) as f64 * dt;
                if let Some(c) = u.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { cell: c, t: now });
                }
                for &v in &u {
                    if v > hi + BLOW_UP_TOL || v < lo - BLOW_UP_TOL {
                        return Err(Error::BlowUp { t: now.min(target), value: v, lo, hi });
                    }
                }
            }
            t = target;
        }
        let snap = GridFunction { grid: u0.grid.clone(), values: u.clone(), t };
        let report = DiagnosticsReport::new(&snap, entropies);
        snapshots.push(Snapshot { u: snap, report });
    }
    Ok(Trajectory { snapshots, dt, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{builtin_filter, rescale};
    use crate::flux::FluxSpec;
    use crate::geometry::{standard_measure, Grid};
    use crate::operator::build_plan;

    fn plan(flux: FluxSpec, n: usize, cells: f64) -> OperatorPlan {
        let g = Grid::new_1d(n, -1.0, 1.0).unwrap();
        let phi = rescale(&builtin_filter("box").unwrap(), cells * g.h()).unwrap();
        build_plan(&flux, &phi, &standard_measure("line").unwrap(), &g).unwrap()
    }

    #[test]
    fn constants_are_stationary() {
        let p = plan(FluxSpec::burgers((-1.0, 1.0)).unwrap(), 32, 1.0);
        let u0 = GridFunction::constant(p.grid().clone(), 0.4);
        let tr = run(&p, &u0, &Integrator::new(Scheme::SspRk3, 1.0), &[0.5], &[]).unwrap();
        assert_eq!(tr.times(), vec![0.5, 1.0]);
        for s in &tr.snapshots {
            assert!(s.u.values.iter().all(|&v| v == 0.4));
        }
    }

    #[test]
    fn euler_step_matches_eo_update() {
        let p = plan(FluxSpec::burgers((-1.0, 1.0)).unwrap().negated(), 64, 1.0);
        let h = p.grid().h();
        let u0 = GridFunction::from_fn(p.grid().clone(), |x| if x[0] < 0.0 { 1.0 } else { 0.0 });
        let l = p.flux().lipschitz();
        let dt = h / (4.0 * l) * 0.5;
        let u1 = step(&p, &u0, dt, Scheme::Euler).unwrap();
        let feo = |a: f64, b: f64| 0.5 * a.max(0.0).powi(2) + 0.5 * b.min(0.0).powi(2);
        let v = &u0.values;
        for j in 0..64 {
            let (a, b) = (v[(j + 63) % 64], v[(j + 1) % 64]);
            let expect = v[j] - dt / h * (feo(v[j], b) - feo(a, v[j]));
            assert!((u1.values[j] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn advection_step_is_affine() {
        let p = plan(FluxSpec::advection(1.0, (-2.0, 2.0)).unwrap(), 64, 3.0);
        let g = p.grid().clone();
        let u = GridFunction::from_fn(g.clone(), |x| (3.0 * x[0]).sin());
        let v = GridFunction::from_fn(g.clone(), |x| (x[0] * 7.0).cos() * 0.5);
        let dt = 0.5 / lipschitz_bound(&p);
        let eps = 0.25;
        let mut w = u.clone();
        for (a, b) in w.values.iter_mut().zip(&v.values) {
            *a += eps * b;
        }
        let su = step(&p, &u, dt, Scheme::SspRk3).unwrap();
        let sw = step(&p, &w, dt, Scheme::SspRk3).unwrap();
        let sv = step(&p, &v, dt, Scheme::SspRk3).unwrap();
        for i in 0..g.len() {
            assert!((sw.values[i] - su.values[i] - eps * sv.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn step_bound_is_enforced() {
        let p = plan(FluxSpec::burgers((-1.0, 1.0)).unwrap(), 32, 1.0);
        let u0 = GridFunction::constant(p.grid().clone(), 0.0);
        let big = 2.0 / lipschitz_bound(&p);
        assert!(matches!(step(&p, &u0, big, Scheme::Euler), Err(Error::StepBound { .. })));
        let it = Integrator::new(Scheme::Euler, 1.0).with_dt(big);
        assert!(matches!(run(&p, &u0, &it, &[], &[]), Err(Error::StepBound { .. })));
    }

    #[test]
    fn lands_on_t_end_exactly() {
        let p = plan(FluxSpec::burgers((-1.0, 1.0)).unwrap().negated(), 64, 2.0);
        let u0 = GridFunction::from_fn(p.grid().clone(), |x| if x[0] < 0.0 { 1.0 } else { 0.0 });
        let tr = run(&p, &u0, &Integrator::new(Scheme::Euler, 0.3), &[0.0, 0.1], &[]).unwrap();
        assert_eq!(tr.times(), vec![0.0, 0.1, 0.3]);
        assert_eq!(tr.snapshots[0].u.values, u0.values);
    }
}
