//! Norms, total variation and per-snapshot reports.

use std::collections::BTreeMap;

use crate::analysis::entropy::Entropy;
use crate::error::{Error, Result};
use crate::geometry::GridFunction;

/// `h^d Σ |u − v|`.
pub fn l1_distance(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    Ok(u.grid.cell_volume() * u.values.iter().zip(&v.values).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

pub fn l1_norm(u: &GridFunction) -> f64 {
    u.grid.cell_volume() * u.values.iter().map(|a| a.abs()).sum::<f64>()
}

/// `h^d Σ u`.
pub fn mass(u: &GridFunction) -> f64 {
    u.grid.cell_volume() * u.values.iter().sum::<f64>()
}

/// Periodic jump sums along each axis, weighted by `h^{d−1}`.
pub fn tv_axes(u: &GridFunction) -> [f64; 2] {
    let g = &u.grid;
    let [nx, ny] = g.n();
    let w = g.h().powi(g.dim() as i32 - 1);
    let v = &u.values;
    let mut out = [0.0; 2];
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            out[0] += (v[iy * nx + (ix + 1) % nx] - v[i]).abs();
            if g.dim() == 2 {
                out[1] += (v[((iy + 1) % ny) * nx + ix] - v[i]).abs();
            }
        }
    }
    [out[0] * w, out[1] * w]
}

/// Total variation: the periodic jump sum in 1D, the sum of the axis
/// variations in 2D.
pub fn tv(u: &GridFunction) -> f64 {
    let a = tv_axes(u);
    a[0] + a[1]
}

/// `h^d Σ η(u)`.
pub fn entropy_integral(u: &GridFunction, eta: &Entropy) -> f64 {
    u.grid.cell_volume() * u.values.iter().map(|&x| eta.eta(x)).sum::<f64>()
}

/// Summary of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub t: f64,
    pub sup: f64,
    pub inf: f64,
    pub tv: f64,
    pub tv_axes: [f64; 2],
    pub mass: f64,
    pub l1_norm: f64,
    /// `(name, ∫η(u))` per registered entropy.
    pub entropies: Vec<(String, f64)>,
    /// Estimate id → slack (negative means violated).
    pub margins: BTreeMap<String, f64>,
}

impl DiagnosticsReport {
    pub fn new(u: &GridFunction, entropies: &[Entropy]) -> Self {
        let axes = tv_axes(u);
        Self {
            t: u.t,
            sup: u.max(),
            inf: u.min(),
            tv: axes[0] + axes[1],
            tv_axes: axes,
            mass: mass(u),
            l1_norm: l1_norm(u),
            entropies: entropies.iter().map(|e| (e.name(), entropy_integral(u, e))).collect(),
            margins: BTreeMap::new(),
        }
    }

    /// Smallest slack over all margins, or `+∞` if none are recorded.
    pub fn worst_margin(&self) -> f64 {
        self.margins.values().copied().fold(f64::INFINITY, f64::min)
    }
}
