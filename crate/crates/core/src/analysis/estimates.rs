//! A priori estimates checked along a trajectory.
//!
//! Every estimate is recorded as `lhs ≤ rhs` with `slack = rhs − lhs`.

use crate::analysis::diagnostics::{entropy_integral, l1_distance, mass, tv};
use crate::analysis::entropy::Entropy;
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::geometry::GridFunction;
use crate::operator::{apply, OperatorPlan};

/// One estimate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginRow {
    pub id: String,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl MarginRow {
    pub fn new(id: impl Into<String>, t: f64, lhs: f64, rhs: f64) -> Self {
        Self { id: id.into(), t, lhs, rhs, slack: rhs - lhs }
    }
}

/// Data the estimates are measured against.
pub struct EstimateContext<'a> {
    pub plan: &'a OperatorPlan,
    pub u0: &'a GridFunction,
    pub entropies: &'a [Entropy],
    /// Second initial datum and its trajectory, for the L¹ contraction.
    pub comparison: Option<(&'a GridFunction, &'a Trajectory)>,
}

/// Evaluates the sup/inf, BV, mass, time-derivative, L¹-contraction and
/// entropy estimates at every snapshot and stores the slacks in each report.
pub fn check_estimates(trajectory: &mut Trajectory, ctx: &EstimateContext<'_>) -> Result<Vec<MarginRow>> {
    let u0 = ctx.u0;
    let (max0, min0) = (u0.max(), u0.min());
    let tv0 = tv(u0);
    let mass0 = mass(u0);
    let plan = ctx.plan;
    let tlip = 2.0 * plan.measure().total() * plan.flux().lipschitz() * tv0;
    let eta0: Vec<f64> = ctx.entropies.iter().map(|e| entropy_integral(u0, e)).collect();
    if let Some((_, other)) = ctx.comparison {
        if other.snapshots.len() != trajectory.snapshots.len() {
            return Err(Error::Invalid("comparison trajectory has different output times".into()));
        }
    }

    let mut rows = Vec::new();
    for (si, snap) in trajectory.snapshots.iter_mut().enumerate() {
        let u = &snap.u;
        let t = u.t;
        let mut local = vec![
            MarginRow::new("supbnd.max", t, u.max(), max0),
            MarginRow::new("supbnd.min", t, -u.min(), -min0),
            MarginRow::new("BVbnd", t, tv(u), tv0),
            MarginRow::new("mass", t, (mass(u) - mass0).abs(), 0.0),
        ];
        let rate = apply(plan, u)?;
        let rate_l1 = rate.grid.cell_volume() * rate.values.iter().map(|v| v.abs()).sum::<f64>();
        local.push(MarginRow::new("TLipbnd", t, rate_l1, tlip));
        if let Some((v0, other)) = ctx.comparison {
            let v = &other.snapshots[si].u;
            if (v.t - t).abs() > 1e-12 {
                return Err(Error::Invalid("comparison trajectory has different output times".into()));
            }
            local.push(MarginRow::new("L1bnd", t, l1_distance(u, v)?, l1_distance(u0, v0)?));
        }
        for (e, &rhs) in ctx.entropies.iter().zip(&eta0) {
            local.push(MarginRow::new(format!("entropy.{}", e.name()), t, entropy_integral(u, e), rhs));
        }
        for row in &local {
            snap.report.margins.insert(row.id.clone(), row.slack);
        }
        rows.extend(local);
    }
    Ok(rows)
}
