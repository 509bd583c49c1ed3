//! Entropy / entropy-flux pairs and the pointwise entropy residual.
//!
//! For a directional split `g±` and a convex `η`, the entropy fluxes satisfy
//! `q±' = η'·g±'`. Constant offsets cancel in the residual, so the Kruzkov
//! pair is used in its closed form without normalising at 0.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::{DirectionalSplit, FluxSpec, Shape, SplitRepr};
use crate::geometry::GridFunction;
use crate::operator::OperatorPlan;
use crate::quad;

const CONVEXITY_TOL: f64 = 1e-10;
const QUAD_TOL: f64 = 1e-13;

/// User-supplied entropy with its first two derivatives.
pub struct CustomEntropy {
    pub name: String,
    pub eta: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomEntropy").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Entropy {
    /// `a·u`
    Linear(f64),
    /// `u²`
    Square,
    /// `|u − k|`
    Kruzkov(f64),
    /// `√((u − k)² + ε²)`
    SmoothKruzkov { k: f64, eps: f64 },
    /// `e^{λu}`
    Exponential(f64),
    Custom(Arc<CustomEntropy>),
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Entropy {
    pub fn name(&self) -> String {
        match self {
            Entropy::Linear(a) => format!("linear({a})"),
            Entropy::Square => "u^2".into(),
            Entropy::Kruzkov(k) => format!("kruzkov({k})"),
            Entropy::SmoothKruzkov { k, eps } => format!("kruzkov({k},eps={eps})"),
            Entropy::Exponential(l) => format!("exp({l})"),
            Entropy::Custom(c) => c.name.clone(),
        }
    }

    pub fn eta(&self, u: f64) -> f64 {
        match self {
            Entropy::Linear(a) => a * u,
            Entropy::Square => u * u,
            Entropy::Kruzkov(k) => (u - k).abs(),
            Entropy::SmoothKruzkov { k, eps } => ((u - k).powi(2) + eps * eps).sqrt(),
            Entropy::Exponential(l) => (l * u).exp(),
            Entropy::Custom(c) => (c.eta)(u),
        }
    }

    /// `η'`, with the subgradient 0 at the Kruzkov kink.
    pub fn d1(&self, u: f64) -> f64 {
        match self {
            Entropy::Linear(a) => *a,
            Entropy::Square => 2.0 * u,
            Entropy::Kruzkov(k) => sgn(u - k),
            Entropy::SmoothKruzkov { k, eps } => (u - k) / ((u - k).powi(2) + eps * eps).sqrt(),
            Entropy::Exponential(l) => l * (l * u).exp(),
            Entropy::Custom(c) => (c.d1)(u),
        }
    }

    /// `η''` away from kinks.
    pub fn d2(&self, u: f64) -> f64 {
        match self {
            Entropy::Linear(_) | Entropy::Kruzkov(_) => 0.0,
            Entropy::Square => 2.0,
            Entropy::SmoothKruzkov { k, eps } => eps * eps / ((u - k).powi(2) + eps * eps).powf(1.5),
            Entropy::Exponential(l) => l * l * (l * u).exp(),
            Entropy::Custom(c) => (c.d2)(u),
        }
    }

    /// Checks `η'' ≥ −1e−10` on a sample of `range`.
    pub fn check_convex(&self, range: (f64, f64)) -> Result<()> {
        let (lo, hi) = range;
        for i in 0..=1024 {
            let u = lo + (hi - lo) * i as f64 / 1024.0;
            let v = self.d2(u);
            if v < -CONVEXITY_TOL || v.is_nan() {
                return Err(Error::NonConvexEntropy { at: u, value: v });
            }
        }
        Ok(())
    }
}

/// Antiderivative of `η'·g'` for a piecewise-linear `g`, accumulated from
/// the node at 0.
#[derive(Debug, Clone)]
struct PiecewiseQ {
    nodes: Vec<f64>,
    slopes: Vec<f64>,
    q: Vec<f64>,
}

impl PiecewiseQ {
    fn new(nodes: Vec<f64>, g: &[f64], eta: &Entropy) -> Self {
        let n = nodes.len();
        let slopes: Vec<f64> = (0..n - 1).map(|i| (g[i + 1] - g[i]) / (nodes[i + 1] - nodes[i])).collect();
        let zero = nodes.iter().position(|&x| x == 0.0).unwrap_or(0);
        let mut q = vec![0.0; n];
        for i in zero..n - 1 {
            q[i + 1] = q[i] + slopes[i] * (eta.eta(nodes[i + 1]) - eta.eta(nodes[i]));
        }
        for i in (0..zero).rev() {
            q[i] = q[i + 1] - slopes[i] * (eta.eta(nodes[i + 1]) - eta.eta(nodes[i]));
        }
        Self { nodes, slopes, q }
    }

    fn eval(&self, eta: &Entropy, u: f64) -> f64 {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&x| x <= u).clamp(1, n - 1) - 1;
        self.q[i] + self.slopes[i] * (eta.eta(u) - eta.eta(self.nodes[i]))
    }
}

#[derive(Debug, Clone)]
enum QRepr {
    /// `q± = a·g±`
    Scaled(f64),
    /// `q± = sgn(u − k)(g±(u) − g±(k))`
    Kruzkov(f64),
    /// `η = u²` on a closed-form shape scaled by `coef`.
    SquareClosed { coef: f64, shape: Shape },
    Piecewise { plus: PiecewiseQ, minus: PiecewiseQ },
    /// Adaptive quadrature of `η'·g±'` between kinks.
    Quadrature,
    Zero,
}

/// Entropy fluxes `q±` along one direction.
#[derive(Debug, Clone)]
pub struct EntropyFluxPair {
    split: DirectionalSplit,
    eta: Entropy,
    repr: QRepr,
}

fn shape_square_q(shape: &Shape, u: f64, plus: bool) -> Option<f64> {
    Some(match (shape, plus) {
        (Shape::Linear, true) => u * u,
        (Shape::Linear, false) => 0.0,
        (Shape::Burgers, true) => 2.0 / 3.0 * u.max(0.0).powi(3),
        (Shape::Burgers, false) => 2.0 / 3.0 * u.min(0.0).powi(3),
        (Shape::Lwr, true) => {
            let v = u.min(0.5);
            v * v - 4.0 / 3.0 * v.powi(3)
        }
        (Shape::Lwr, false) => {
            if u > 0.5 {
                u * u - 4.0 / 3.0 * u.powi(3) - 1.0 / 12.0
            } else {
                0.0
            }
        }
        _ => return None,
    })
}

impl EntropyFluxPair {
    pub fn q_plus(&self, u: f64) -> f64 {
        self.eval(u, true)
    }

    pub fn q_minus(&self, u: f64) -> f64 {
        self.eval(u, false)
    }

    fn g(&self, u: f64, plus: bool) -> f64 {
        if plus {
            self.split.g_plus(u)
        } else {
            self.split.g_minus(u)
        }
    }

    fn eval(&self, u: f64, plus: bool) -> f64 {
        match &self.repr {
            QRepr::Zero => 0.0,
            QRepr::Scaled(a) => a * self.g(u, plus),
            QRepr::Kruzkov(k) => sgn(u - k) * (self.g(u, plus) - self.g(*k, plus)),
            QRepr::SquareClosed { coef, shape } => {
                // A negative coefficient swaps the increasing and decreasing parts.
                let part = if *coef >= 0.0 { plus } else { !plus };
                coef * shape_square_q(shape, u, part).unwrap_or(0.0)
            }
            QRepr::Piecewise { plus: p, minus: m } => {
                if plus {
                    p.eval(&self.eta, u)
                } else {
                    m.eval(&self.eta, u)
                }
            }
            QRepr::Quadrature => {
                let kinks = self.split.kinks();
                let eta = &self.eta;
                let dg = |s: f64| if plus { self.split.dg_plus(s) } else { self.split.dg_minus(s) };
                quad::integrate_pieces(|s| eta.d1(s) * dg(s), 0.0, u, &kinks, QUAD_TOL)
            }
        }
    }
}

/// Builds `q±` for `F·n` and a convex `η` on the flux state range.
pub fn entropy_flux_pair(flux: &FluxSpec, n: &[f64], eta: &Entropy) -> Result<EntropyFluxPair> {
    let split = flux.directional_split(n)?;
    pair_for_split(&split, eta)
}

fn pair_for_split(split: &DirectionalSplit, eta: &Entropy) -> Result<EntropyFluxPair> {
    eta.check_convex(split.state_range())?;
    let repr = match (eta, split.repr()) {
        (_, SplitRepr::Zero) => QRepr::Zero,
        (Entropy::Linear(a), _) => QRepr::Scaled(*a),
        (Entropy::Kruzkov(k), _) => QRepr::Kruzkov(*k),
        (Entropy::Square, SplitRepr::Closed { coef, shape }) if shape_square_q(shape, 0.0, true).is_some() => {
            QRepr::SquareClosed { coef: *coef, shape: shape.clone() }
        }
        (_, SplitRepr::Closed { shape: Shape::Table(t), .. }) => {
            let nodes = t.nodes().to_vec();
            let gp: Vec<f64> = nodes.iter().map(|&u| split.g_plus(u)).collect();
            let gm: Vec<f64> = nodes.iter().map(|&u| split.g_minus(u)).collect();
            QRepr::Piecewise { plus: PiecewiseQ::new(nodes.clone(), &gp, eta), minus: PiecewiseQ::new(nodes, &gm, eta) }
        }
        (_, SplitRepr::Tabulated(t)) => {
            let nodes = t.nodes().to_vec();
            let gp: Vec<f64> = (0..nodes.len()).map(|i| t.plus_at(i)).collect();
            let gm: Vec<f64> = (0..nodes.len()).map(|i| t.minus_at(i)).collect();
            QRepr::Piecewise { plus: PiecewiseQ::new(nodes.clone(), &gp, eta), minus: PiecewiseQ::new(nodes, &gm, eta) }
        }
        _ => QRepr::Quadrature,
    };
    Ok(EntropyFluxPair { split: split.clone(), eta: eta.clone(), repr })
}

/// Pointwise `η'(u)·aud F(u) − aud_q(u)`, where `aud_q` is the operator with
/// `g±` replaced by `q±`. Non-positive for convex `η`.
pub fn entropy_residual(plan: &OperatorPlan, u: &GridFunction, eta: &Entropy) -> Result<GridFunction> {
    if u.grid != *plan.grid() {
        return Err(Error::GridMismatch);
    }
    let pairs = plan
        .raw_directions()
        .iter()
        .map(|d| pair_for_split(&d.split, eta))
        .collect::<Result<Vec<_>>>()?;
    let values = plan.raw_sum(&u.values, |j, dir, u0, f, b| {
        let s = &dir.split;
        let q = &pairs[j];
        let flux_term = s.g_plus(u0) - f.mean(|v| s.g_plus(v)) - s.g_minus(u0) + b.mean(|v| s.g_minus(v));
        let q_term = q.q_plus(u0) - f.mean(|v| q.q_plus(v)) - q.q_minus(u0) + b.mean(|v| q.q_minus(v));
        eta.d1(u0) * flux_term - q_term
    })?;
    Ok(GridFunction { grid: u.grid.clone(), values, t: u.t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::Component;

    fn brute_q(split: &DirectionalSplit, eta: &Entropy, u: f64, plus: bool) -> f64 {
        // Midpoint sum of η'(s)·Δg over a fine s-grid from 0 to u.
        let n = 200_000;
        let h = u / n as f64;
        let g = |s: f64| if plus { split.g_plus(s) } else { split.g_minus(s) };
        (0..n)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                eta.d1(0.5 * (a + b)) * (g(b) - g(a))
            })
            .sum()
    }

    #[test]
    fn linear_entropy_reproduces_split() {
        let f = FluxSpec::burgers((-2.0, 2.0)).unwrap();
        let p = entropy_flux_pair(&f, &[1.0], &Entropy::Linear(1.0)).unwrap();
        for u in [-1.5, -0.2, 0.0, 0.7, 2.0] {
            assert_eq!(p.q_plus(u), p.split.g_plus(u));
            assert_eq!(p.q_minus(u), p.split.g_minus(u));
        }
    }

    #[test]
    fn square_entropy_burgers() {
        let f = FluxSpec::burgers((-2.0, 2.0)).unwrap();
        let p = entropy_flux_pair(&f, &[1.0], &Entropy::Square).unwrap();
        for u in [-1.5, -0.2, 0.0, 0.7, 2.0] {
            assert!((p.q_plus(u) - 2.0 / 3.0 * u.max(0.0).powi(3)).abs() < 1e-15);
            assert!((p.q_plus(u) - brute_q(&p.split, &Entropy::Square, u, true)).abs() < 1e-9);
            assert!((p.q_minus(u) - brute_q(&p.split, &Entropy::Square, u, false)).abs() < 1e-9);
        }
        let m = entropy_flux_pair(&f, &[-1.0], &Entropy::Square).unwrap();
        for u in [-1.5, 0.3, 2.0] {
            assert!((m.q_plus(u) - brute_q(&m.split, &Entropy::Square, u, true)).abs() < 1e-9);
            assert!((m.q_minus(u) - brute_q(&m.split, &Entropy::Square, u, false)).abs() < 1e-9);
        }
    }

    #[test]
    fn square_entropy_lwr() {
        let f = FluxSpec::lwr((-0.5, 1.5)).unwrap();
        let p = entropy_flux_pair(&f, &[1.0], &Entropy::Square).unwrap();
        for u in [-0.5, 0.25, 0.5, 0.9, 1.5] {
            assert!((p.q_plus(u) - brute_q(&p.split, &Entropy::Square, u, true)).abs() < 1e-9, "{u}");
            assert!((p.q_minus(u) - brute_q(&p.split, &Entropy::Square, u, false)).abs() < 1e-9, "{u}");
        }
    }

    #[test]
    fn kruzkov_at_zero() {
        let f = FluxSpec::burgers((-2.0, 2.0)).unwrap();
        let p = entropy_flux_pair(&f, &[1.0], &Entropy::Kruzkov(0.0)).unwrap();
        for u in [-1.0, 0.0, 0.5, 1.5] {
            assert_eq!(p.q_plus(u), 0.5 * u.max(0.0).powi(2));
        }
    }

    #[test]
    fn quadrature_and_tabulated_paths() {
        let eta = Entropy::Exponential(0.7);
        let f = FluxSpec::burgers((-2.0, 2.0)).unwrap();
        let p = entropy_flux_pair(&f, &[1.0], &eta).unwrap();
        assert!(matches!(p.repr, QRepr::Quadrature));
        let mixed = FluxSpec::new(vec![Component::new(1.0, Shape::Burgers), Component::new(1.0, Shape::Linear)], (-1.0, 1.0), None)
            .unwrap();
        let n = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let t = entropy_flux_pair(&mixed, &n, &Entropy::Square).unwrap();
        assert!(matches!(t.repr, QRepr::Piecewise { .. }));
        for u in [-1.0, -0.4, 0.3, 1.0] {
            assert!((p.q_plus(u) - brute_q(&p.split, &eta, u, true)).abs() < 1e-8, "{u}");
            assert!((t.q_plus(u) - brute_q(&t.split, &Entropy::Square, u, true)).abs() < 1e-8, "{u}");
            assert!((t.q_minus(u) - brute_q(&t.split, &Entropy::Square, u, false)).abs() < 1e-8, "{u}");
        }
    }

    #[test]
    fn non_convex_is_rejected() {
        let c = CustomEntropy {
            name: "cubic".into(),
            eta: Box::new(|u: f64| u.powi(3)),
            d1: Box::new(|u: f64| 3.0 * u * u),
            d2: Box::new(|u: f64| 6.0 * u),
        };
        let f = FluxSpec::burgers((-1.0, 1.0)).unwrap();
        assert!(matches!(
            entropy_flux_pair(&f, &[1.0], &Entropy::Custom(Arc::new(c))),
            Err(Error::NonConvexEntropy { .. })
        ));
    }

    #[test]
    fn smoothed_kruzkov_approaches_closed_form() {
        // Richardson-style check over three ε values.
        let f = FluxSpec::burgers((-1.0, 1.0)).unwrap();
        let k = 0.2;
        let exact = entropy_flux_pair(&f, &[1.0], &Entropy::Kruzkov(k)).unwrap();
        let u = 0.8;
        let target = exact.q_plus(u) - exact.q_plus(0.0);
        let mut errs = vec![];
        for eps in [1e-2, 5e-3, 2.5e-3] {
            let p = entropy_flux_pair(&f, &[1.0], &Entropy::SmoothKruzkov { k, eps }).unwrap();
            errs.push((p.q_plus(u) - p.q_plus(0.0) - target).abs());
        }
        assert!(errs[2] < errs[1] && errs[1] < errs[0]);
        assert!(errs[2] < 1e-2 * 2.5e-3 * 10.0 + 1e-6, "{errs:?}");
    }
}
