//! Filter kernels `Φ` on `[0, ∞)` and their rescalings `Φ_α(r) = Φ(r/α)/α`.
//!
//! A kernel is stored at unit scale as a continuous part `P` plus downward
//! steps: `Φ = P + Σ |m_j| χ[0, r_j]`, so that `Φ' = P' + Σ m_j δ_{r_j}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// Tail mass below which an unbounded kernel is truncated.
pub const TAIL_TOL: f64 = 1e-12;

const MASS_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-12;

/// Piecewise-linear continuous part given on nodes `0 = r_0 < .. < r_n`.
#[derive(Debug)]
pub struct FilterTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    atoms: Vec<(f64, f64)>,
}

impl FilterTable {
    /// Builds a kernel from samples of its continuous part and a list of
    /// derivative atoms `(r_j > 0, m_j ≤ 0)`. A nonzero final value becomes a
    /// step down to zero at the last node.
    pub fn new(points: &[(f64, f64)], atoms: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidFilter("table needs at least two rows".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts[0].0 != 0.0 {
            return Err(Error::InvalidFilter("table must start at r = 0".into()));
        }
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) || pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidFilter("table r column must be finite and strictly increasing".into()));
        }
        let nodes: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mut values: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if values.iter().any(|&v| v < -CLAMP_TOL) {
            return Err(Error::InvalidFilter("kernel must be non-negative".into()));
        }
        for i in 0..values.len() {
            values[i] = values[i].max(0.0);
            if i > 0 && values[i] > values[i - 1] {
                if values[i] - values[i - 1] > CLAMP_TOL {
                    return Err(Error::InvalidFilter(format!("kernel increases at r = {}", nodes[i])));
                }
                values[i] = values[i - 1];
            }
        }
        let mut atoms = atoms.to_vec();
        for &(r, m) in &atoms {
            if !(r > 0.0 && r.is_finite()) || !(m <= 0.0) {
                return Err(Error::InvalidFilter(format!("atom ({r}, {m}) needs r > 0 and mass <= 0")));
            }
        }
        let end = *values.last().unwrap();
        let r_end = *nodes.last().unwrap();
        if end > 0.0 {
            for v in values.iter_mut() {
                *v -= end;
            }
            atoms.push((r_end, -end));
        }
        atoms.retain(|a| a.1 != 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let table = Self { nodes, values, atoms };
        let mass = table.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Normalization(mass));
        }
        Ok(table)
    }

    fn continuous(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        if r >= self.nodes[n - 1] {
            return 0.0;
        }
        let i = self.nodes.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        let t = (r - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    fn mass(&self) -> f64 {
        let cont: f64 = self
            .nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, v)| 0.5 * (r[1] - r[0]) * (v[0] + v[1]))
            .sum();
        cont + self.atoms.iter().map(|(r, m)| -m * r).sum::<f64>()
    }

    fn first_moment(&self) -> f64 {
        // ∫ r (a + b r) over each segment, exactly.
        let cont: f64 = self
            .nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, v)| {
                let (r0, r1) = (r[0], r[1]);
                let slope = (v[1] - v[0]) / (r1 - r0);
                let a = v[0] - slope * r0;
                a * (r1 * r1 - r0 * r0) / 2.0 + slope * (r1.powi(3) - r0.powi(3)) / 3.0
            })
            .sum();
        cont + self.atoms.iter().map(|(r, m)| -m * r * r / 2.0).sum::<f64>()
    }

    fn reach(&self) -> f64 {
        let last_atom = self.atoms.iter().map(|a| a.0).fold(0.0, f64::max);
        last_atom.max(*self.nodes.last().unwrap())
    }
}

#[derive(Debug, Clone)]
pub enum FilterShape {
    /// `χ[0,1]`
    Box,
    /// `max(2(1 − r), 0)`
    Hat,
    /// `e^{−r}`
    Exponential,
    Table(Arc<FilterTable>),
    /// The zero-filter limit. Only `rΦ ≡ 0` is meaningful.
    Dirac,
}

/// A kernel shape together with its scale `α`.
#[derive(Debug, Clone)]
pub struct Filter {
    shape: FilterShape,
    alpha: f64,
}

/// Names accepted by [`builtin_filter`].
pub const BUILTIN_FILTERS: [&str; 3] = ["box", "hat", "exponential"];

pub fn builtin_filter(name: &str) -> Result<Filter> {
    let shape = match name {
        "box" => FilterShape::Box,
        "hat" => FilterShape::Hat,
        "exponential" | "exp" => FilterShape::Exponential,
        _ => return Err(Error::UnknownName { kind: "filter", name: name.to_string() }),
    };
    Ok(Filter { shape, alpha: 1.0 })
}

/// `Φ_α` for a positive scale.
pub fn rescale(phi: &Filter, alpha: f64) -> Result<Filter> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveScale(alpha));
    }
    Ok(Filter { shape: phi.shape.clone(), alpha: phi.alpha * alpha })
}

impl Filter {
    pub fn new(shape: FilterShape, alpha: f64) -> Result<Self> {
        rescale(&Filter { shape, alpha: 1.0 }, alpha)
    }

    pub fn dirac() -> Self {
        Filter { shape: FilterShape::Dirac, alpha: 1.0 }
    }

    pub fn table(table: FilterTable) -> Self {
        Filter { shape: FilterShape::Table(Arc::new(table)), alpha: 1.0 }
    }

    pub fn shape(&self) -> &FilterShape {
        &self.shape
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn name(&self) -> &'static str {
        match self.shape {
            FilterShape::Box => "box",
            FilterShape::Hat => "hat",
            FilterShape::Exponential => "exponential",
            FilterShape::Table(_) => "table",
            FilterShape::Dirac => "dirac",
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self.shape, FilterShape::Dirac)
    }

    fn unit_continuous(&self, s: f64) -> f64 {
        match &self.shape {
            FilterShape::Box | FilterShape::Dirac => 0.0,
            FilterShape::Hat => (2.0 * (1.0 - s)).max(0.0),
            FilterShape::Exponential => (-s).exp(),
            FilterShape::Table(t) => t.continuous(s),
        }
    }

    fn unit_atoms(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            FilterShape::Box => vec![(1.0, -1.0)],
            FilterShape::Table(t) => t.atoms.clone(),
            _ => vec![],
        }
    }

    /// Continuous part of `Φ_α` at `r ≥ 0`.
    pub fn continuous(&self, r: f64) -> f64 {
        self.unit_continuous(r / self.alpha) / self.alpha
    }

    /// Atoms of `Φ_α'` as `(location, mass)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.unit_atoms().into_iter().map(|(r, m)| (self.alpha * r, m / self.alpha)).collect()
    }

    /// `Φ_α(r)` for `r > 0`, right-continuous at atoms. The Dirac filter
    /// evaluates to 0 away from the origin.
    pub fn value(&self, r: f64) -> f64 {
        let s = r / self.alpha;
        let steps: f64 = self.unit_atoms().iter().filter(|a| s < a.0).map(|a| -a.1).sum();
        (self.unit_continuous(s) + steps) / self.alpha
    }

    pub fn mass(&self) -> f64 {
        match &self.shape {
            FilterShape::Table(t) => t.mass(),
            _ => 1.0,
        }
    }

    pub fn first_moment(&self) -> f64 {
        let unit = match &self.shape {
            FilterShape::Box => 0.5,
            FilterShape::Hat => 1.0 / 3.0,
            FilterShape::Exponential => 1.0,
            FilterShape::Table(t) => t.first_moment(),
            FilterShape::Dirac => 0.0,
        };
        unit * self.alpha
    }

    /// `Φ_α(0⁺)`; infinite for the Dirac filter.
    pub fn phi_at_zero(&self) -> f64 {
        let unit = match &self.shape {
            FilterShape::Box | FilterShape::Exponential => 1.0,
            FilterShape::Hat => 2.0,
            FilterShape::Table(t) => t.values[0] + t.atoms.iter().map(|a| -a.1).sum::<f64>(),
            FilterShape::Dirac => f64::INFINITY,
        };
        unit / self.alpha
    }

    /// Radius beyond which the remaining mass is below [`TAIL_TOL`].
    pub fn support_radius(&self) -> f64 {
        let unit = match &self.shape {
            FilterShape::Box | FilterShape::Hat => 1.0,
            FilterShape::Exponential => (1.0 / TAIL_TOL).ln(),
            FilterShape::Table(t) => t.reach(),
            FilterShape::Dirac => 0.0,
        };
        unit * self.alpha
    }

    /// Points where `Φ_α` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = match &self.shape {
            FilterShape::Box | FilterShape::Hat => vec![1.0],
            FilterShape::Table(t) => t.nodes.iter().copied().chain(t.atoms.iter().map(|a| a.0)).collect(),
            _ => vec![],
        };
        for x in b.iter_mut() {
            *x *= self.alpha;
        }
        b
    }

    /// Whether every derivative atom sits on a multiple of `h`.
    pub fn atoms_aligned(&self, h: f64) -> bool {
        self.atoms().iter().all(|(r, _)| {
            let q = r / h;
            (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
        })
    }

    /// Cell integrals `ψ_k` of `Φ_α'` for `k = 1..=cells`, where cell 1 is
    /// `(0, 3h/2]` and cell `k ≥ 2` is `((k − ½)h, (k + ½)h]`.
    pub fn derivative_cell_weights(&self, h: f64, cells: usize) -> Result<Vec<f64>> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if self.is_dirac() {
            return Err(Error::UnboundedFilter);
        }
        let reach = (cells as f64 + 0.5) * h;
        let support = self.support_radius();
        if cells == 0 || reach < support * (1.0 - 1e-12) {
            return Err(Error::Truncation { reach, support });
        }
        let atoms = self.atoms();
        let edge = |k: usize| if k == 0 { 0.0 } else { (k as f64 + 0.5) * h };
        let mut out = Vec::with_capacity(cells);
        for k in 1..=cells {
            let (a, b) = (edge(k - 1), edge(k));
            let mut w = self.continuous(b) - self.continuous(a);
            for &(r, m) in &atoms {
                if r > a && r <= b {
                    w += m;
                }
            }
            out.push(w.min(0.0));
        }
        Ok(out)
    }
}

/// `∫₀^∞ r |Φ(r) − Ψ(r)| dr`.
pub fn moment_distance(phi: &Filter, psi: &Filter) -> f64 {
    let upper = phi.support_radius().max(psi.support_radius());
    if upper == 0.0 {
        return 0.0;
    }
    let eval = |f: &Filter, r: f64| if f.is_dirac() { 0.0 } else { f.value(r) };
    let mut breaks = phi.breakpoints();
    breaks.extend(psi.breakpoints());
    // Exponential tails decay over many scales; extra breaks help the
    // adaptive rule resolve them.
    for f in [phi, psi] {
        if matches!(f.shape, FilterShape::Exponential) {
            breaks.extend((1..28).map(|i| i as f64 * f.alpha));
        }
    }
    let scale = phi.first_moment().max(psi.first_moment()).max(f64::MIN_POSITIVE);
    quad::integrate_pieces(|r| r * (eval(phi, r) - eval(psi, r)).abs(), 0.0, upper, &breaks, 1e-13 * scale)
}
