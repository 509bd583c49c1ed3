//! Scalar flux vectors and their monotone (Engquist–Osher) splitting.
//!
//! A flux `F = (f_1, .., f_d)` is stored as a list of scaled shapes. The
//! projection `F·n` onto a direction is split into a non-decreasing part
//! `g⁺(u) = ∫₀ᵘ max(0, (F·n)')` and a non-increasing part
//! `g⁻(u) = ∫₀ᵘ min(0, (F·n)')`. Built-in shapes carry exact splits; anything
//! else goes through a tabulated split on the certified state range.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Number of derivative samples used by the tabulated split.
pub const SPLIT_SAMPLES: usize = 4096;

/// Safety factor applied to a sampled Lipschitz estimate.
pub const LIPSCHITZ_SAFETY: f64 = 1.0 + 1e-3;

const UNIT_TOL: f64 = 1e-12;

/// Piecewise-linear flux given by samples `(u_i, f(u_i))`.
///
/// Values are shifted so that `f(0) = 0`; 0 is inserted as a node if needed.
#[derive(Debug)]
pub struct FluxTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl FluxTable {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("flux table needs at least two rows".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Invalid("flux table u column must be strictly increasing".into()));
        }
        if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Invalid("flux table has non-finite entries".into()));
        }
        let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
        if lo > 0.0 || hi < 0.0 {
            return Err(Error::RangeExcludesZero { lo, hi });
        }
        let f0 = interp(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>(), 0.0);
        if !pts.iter().any(|p| p.0 == 0.0) {
            let at = pts.partition_point(|p| p.0 < 0.0);
            pts.insert(at, (0.0, f0));
        }
        let nodes: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let values: Vec<f64> = pts.iter().map(|p| p.1 - f0).collect();
        let zero = nodes.iter().position(|&u| u == 0.0).expect("zero node inserted");

        let n = nodes.len();
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        for i in zero..n - 1 {
            let df = values[i + 1] - values[i];
            plus[i + 1] = plus[i] + df.max(0.0);
            minus[i + 1] = minus[i] + df.min(0.0);
        }
        for i in (0..zero).rev() {
            let df = values[i + 1] - values[i];
            plus[i] = plus[i + 1] - df.max(0.0);
            minus[i] = minus[i + 1] - df.min(0.0);
        }
        Ok(Self { nodes, values, plus, minus })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn value(&self, u: f64) -> f64 {
        interp(&self.nodes, &self.values, u)
    }

    fn derivative(&self, u: f64) -> f64 {
        let i = segment(&self.nodes, u);
        (self.values[i + 1] - self.values[i]) / (self.nodes[i + 1] - self.nodes[i])
    }
}

/// Flux supplied as a closure with its derivative.
pub struct CustomFlux {
    name: String,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    f0: f64,
}

impl CustomFlux {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let f0 = f(0.0);
        Self { name: name.into(), f: Box::new(f), df: Box::new(df), f0 }
    }
}

impl fmt::Debug for CustomFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFlux").field("name", &self.name).finish()
    }
}

/// Elementary flux shapes.
#[derive(Debug, Clone)]
pub enum Shape {
    /// `u`
    Linear,
    /// `u²/2`
    Burgers,
    /// `u(1 − u)`
    Lwr,
    Table(Arc<FluxTable>),
    Custom(Arc<CustomFlux>),
}

impl Shape {
    pub fn value(&self, u: f64) -> f64 {
        match self {
            Shape::Linear => u,
            Shape::Burgers => 0.5 * u * u,
            Shape::Lwr => u * (1.0 - u),
            Shape::Table(t) => t.value(u),
            Shape::Custom(c) => (c.f)(u) - c.f0,
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Shape::Linear => 1.0,
            Shape::Burgers => u,
            Shape::Lwr => 1.0 - 2.0 * u,
            Shape::Table(t) => t.derivative(u),
            Shape::Custom(c) => (c.df)(u),
        }
    }

    /// Increasing part of the shape, if known in closed form.
    pub fn plus(&self, u: f64) -> Option<f64> {
        Some(match self {
            Shape::Linear => u,
            Shape::Burgers => 0.5 * u.max(0.0).powi(2),
            Shape::Lwr => {
                let v = u.min(0.5);
                v * (1.0 - v)
            }
            Shape::Table(t) => interp(&t.nodes, &t.plus, u),
            Shape::Custom(_) => return None,
        })
    }

    /// Decreasing part of the shape, if known in closed form.
    pub fn minus(&self, u: f64) -> Option<f64> {
        Some(match self {
            Shape::Linear => 0.0,
            Shape::Burgers => 0.5 * u.min(0.0).powi(2),
            Shape::Lwr => {
                if u > 0.5 {
                    u * (1.0 - u) - 0.25
                } else {
                    0.0
                }
            }
            Shape::Table(t) => interp(&t.nodes, &t.minus, u),
            Shape::Custom(_) => return None,
        })
    }

    /// Derivative of [`Shape::plus`], `max(0, shape')`.
    pub fn plus_derivative(&self, u: f64) -> Option<f64> {
        if !self.has_closed_split() {
            return None;
        }
        Some(self.derivative(u).max(0.0))
    }

    /// Derivative of [`Shape::minus`], `min(0, shape')`.
    pub fn minus_derivative(&self, u: f64) -> Option<f64> {
        if !self.has_closed_split() {
            return None;
        }
        Some(self.derivative(u).min(0.0))
    }

    pub fn has_closed_split(&self) -> bool {
        !matches!(self, Shape::Custom(_))
    }

    /// Points where the derivative changes sign or is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Shape::Linear => vec![],
            Shape::Burgers => vec![0.0],
            Shape::Lwr => vec![0.5],
            Shape::Table(t) => t.nodes.clone(),
            Shape::Custom(_) => vec![],
        }
    }

    fn same_kind(&self, other: &Shape) -> bool {
        match (self, other) {
            (Shape::Linear, Shape::Linear) | (Shape::Burgers, Shape::Burgers) | (Shape::Lwr, Shape::Lwr) => true,
            (Shape::Table(a), Shape::Table(b)) => Arc::ptr_eq(a, b),
            (Shape::Custom(a), Shape::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// One flux component `f_i(u) = scale · shape(u)`.
#[derive(Debug, Clone)]
pub struct Component {
    pub scale: f64,
    pub shape: Shape,
}

impl Component {
    pub fn new(scale: f64, shape: Shape) -> Self {
        Self { scale, shape }
    }

    pub fn zero() -> Self {
        Self { scale: 0.0, shape: Shape::Linear }
    }
}

/// A flux vector with its certified state range and Lipschitz constant.
#[derive(Debug, Clone)]
pub struct FluxSpec {
    components: Vec<Component>,
    lipschitz: f64,
    state_range: (f64, f64),
}

impl FluxSpec {
    /// Builds a flux on `state_range`. When `lipschitz` is `None` it is
    /// estimated from sampled derivatives; a supplied value is checked
    /// against sampled difference quotients.
    pub fn new(components: Vec<Component>, state_range: (f64, f64), lipschitz: Option<f64>) -> Result<Self> {
        if components.is_empty() || components.len() > 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: components.len() });
        }
        let (lo, hi) = state_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        if lo > 0.0 || hi < 0.0 {
            return Err(Error::RangeExcludesZero { lo, hi });
        }
        for c in &components {
            if let Shape::Table(t) = &c.shape {
                let (tlo, thi) = t.range();
                if lo < tlo || hi > thi {
                    return Err(Error::Invalid(format!(
                        "state range [{lo}, {hi}] exceeds flux table range [{tlo}, {thi}]"
                    )));
                }
            }
        }
        let mut spec = Self { components, lipschitz: 0.0, state_range };
        let samples = spec.sample_points();
        let mut observed: f64 = 0.0;
        for &u in &samples {
            let d = spec.derivative(u);
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(Error::DerivativeFailure { at: u });
            }
            observed = observed.max(norm);
        }
        spec.lipschitz = match lipschitz {
            None => (observed * LIPSCHITZ_SAFETY).max(f64::MIN_POSITIVE),
            Some(l) => {
                if !(l > 0.0) {
                    return Err(Error::Invalid(format!("lipschitz constant must be positive, got {l}")));
                }
                let mut quotient: f64 = 0.0;
                for w in samples.windows(2) {
                    if w[1] > w[0] {
                        let (a, b) = (spec.eval(w[0]), spec.eval(w[1]));
                        let diff = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                        quotient = quotient.max(diff / (w[1] - w[0]));
                    }
                }
                if quotient > l * (1.0 + 1e-9) {
                    return Err(Error::LipschitzTooSmall { given: l, observed: quotient });
                }
                l
            }
        };
        Ok(spec)
    }

    /// `f(u) = u²/2` in one dimension.
    pub fn burgers(state_range: (f64, f64)) -> Result<Self> {
        Self::new(vec![Component::new(1.0, Shape::Burgers)], state_range, None)
    }

    /// `f(u) = c·u` in one dimension.
    pub fn advection(speed: f64, state_range: (f64, f64)) -> Result<Self> {
        Self::new(vec![Component::new(speed, Shape::Linear)], state_range, None)
    }

    /// Greenshields/LWR flux `f(u) = u(1 − u)`.
    pub fn lwr(state_range: (f64, f64)) -> Result<Self> {
        Self::new(vec![Component::new(1.0, Shape::Lwr)], state_range, None)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn state_range(&self) -> (f64, f64) {
        self.state_range
    }

    /// The flux `−F`, which turns `∂t u = div F(u)` into `∂t u + div F(u) = 0`.
    pub fn negated(&self) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Component { scale: -c.scale, shape: c.shape.clone() })
            .collect();
        Self { components, lipschitz: self.lipschitz, state_range: self.state_range }
    }

    /// Same flux certified on a different range. The Lipschitz constant is
    /// re-estimated.
    pub fn with_state_range(&self, state_range: (f64, f64)) -> Result<Self> {
        Self::new(self.components.clone(), state_range, None)
    }

    /// `F(u)`, padded with zeros to two components.
    pub fn eval(&self, u: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.scale * c.shape.value(u);
        }
        out
    }

    pub fn derivative(&self, u: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.scale * c.shape.derivative(u);
        }
        out
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.state_range.0 && u <= self.state_range.1
    }

    fn sample_points(&self) -> Vec<f64> {
        let (lo, hi) = self.state_range;
        let mut pts: Vec<f64> = (0..=SPLIT_SAMPLES)
            .map(|i| lo + (hi - lo) * i as f64 / SPLIT_SAMPLES as f64)
            .collect();
        for c in &self.components {
            pts.extend(c.shape.kinks().into_iter().filter(|&k| k >= lo && k <= hi));
        }
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Splits `u ↦ F(u)·n` into monotone parts.
    pub fn directional_split(&self, n: &[f64]) -> Result<DirectionalSplit> {
        if n.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: n.len() });
        }
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitDirection(n.to_vec()));
        }
        let terms: Vec<(f64, Shape)> = self
            .components
            .iter()
            .zip(n)
            .map(|(c, &ni)| (c.scale * ni, c.shape.clone()))
            .filter(|(coef, _)| *coef != 0.0)
            .collect();

        let repr = if terms.is_empty() {
            SplitRepr::Zero
        } else if terms.iter().all(|(_, s)| s.has_closed_split() && s.same_kind(&terms[0].1)) {
            let coef: f64 = terms.iter().map(|(c, _)| c).sum();
            if coef == 0.0 {
                SplitRepr::Zero
            } else {
                SplitRepr::Closed { coef, shape: terms[0].1.clone() }
            }
        } else {
            let derivative = |u: f64| terms.iter().map(|(c, s)| c * s.derivative(u)).sum::<f64>();
            SplitRepr::Tabulated(Arc::new(split_scalar(&derivative, self.state_range, SPLIT_SAMPLES)?))
        };
        Ok(DirectionalSplit { direction: n.to_vec(), repr, state_range: self.state_range })
    }
}

/// Tabulated monotone split on a node set that contains 0.
#[derive(Debug, Clone)]
pub struct SplitTable {
    nodes: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl SplitTable {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn plus(&self, u: f64) -> f64 {
        interp(&self.nodes, &self.plus, u)
    }

    pub fn minus(&self, u: f64) -> f64 {
        interp(&self.nodes, &self.minus, u)
    }

    /// Slopes of the increasing and decreasing parts on segment `i`.
    pub fn slopes(&self, i: usize) -> (f64, f64) {
        let du = self.nodes[i + 1] - self.nodes[i];
        ((self.plus[i + 1] - self.plus[i]) / du, (self.minus[i + 1] - self.minus[i]) / du)
    }

    pub fn segment(&self, u: f64) -> usize {
        segment(&self.nodes, u)
    }

    pub fn plus_at(&self, i: usize) -> f64 {
        self.plus[i]
    }

    pub fn minus_at(&self, i: usize) -> f64 {
        self.minus[i]
    }
}

/// Splits a scalar function given by its derivative into increasing and
/// decreasing parts on `range`, by trapezoid quadrature of `max(0, f')` and
/// `min(0, f')` outward from 0 on roughly `n_samples` nodes.
pub fn split_scalar(derivative: &dyn Fn(f64) -> f64, range: (f64, f64), n_samples: usize) -> Result<SplitTable> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if lo > 0.0 || hi < 0.0 {
        return Err(Error::RangeExcludesZero { lo, hi });
    }
    if n_samples < 2 {
        return Err(Error::Invalid("split needs at least two samples".into()));
    }
    let width = hi - lo;
    let side = |len: f64| -> usize {
        if len <= 0.0 {
            0
        } else {
            ((n_samples as f64 * len / width).round() as usize).max(2)
        }
    };
    let (n_neg, n_pos) = (side(-lo), side(hi));

    let mut nodes = Vec::with_capacity(n_neg + n_pos + 1);
    for i in (1..=n_neg).rev() {
        nodes.push(lo * i as f64 / n_neg as f64);
    }
    let zero = nodes.len();
    nodes.push(0.0);
    for i in 1..=n_pos {
        nodes.push(hi * i as f64 / n_pos as f64);
    }

    let mut d = Vec::with_capacity(nodes.len());
    for &u in &nodes {
        let v = derivative(u);
        if !v.is_finite() {
            return Err(Error::DerivativeFailure { at: u });
        }
        d.push(v);
    }
    let n = nodes.len();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for i in zero..n - 1 {
        let du = nodes[i + 1] - nodes[i];
        plus[i + 1] = plus[i] + 0.5 * du * (d[i].max(0.0) + d[i + 1].max(0.0));
        minus[i + 1] = minus[i] + 0.5 * du * (d[i].min(0.0) + d[i + 1].min(0.0));
    }
    for i in (0..zero).rev() {
        let du = nodes[i + 1] - nodes[i];
        plus[i] = plus[i + 1] - 0.5 * du * (d[i].max(0.0) + d[i + 1].max(0.0));
        minus[i] = minus[i + 1] - 0.5 * du * (d[i].min(0.0) + d[i + 1].min(0.0));
    }
    Ok(SplitTable { nodes, plus, minus })
}

#[derive(Debug, Clone)]
pub enum SplitRepr {
    /// `F·n ≡ 0`.
    Zero,
    /// `F·n = coef · shape` with an exact split.
    Closed { coef: f64, shape: Shape },
    Tabulated(Arc<SplitTable>),
}

/// Monotone split `g⁺ + g⁻ = F·n` along one direction.
#[derive(Debug, Clone)]
pub struct DirectionalSplit {
    direction: Vec<f64>,
    repr: SplitRepr,
    state_range: (f64, f64),
}

impl DirectionalSplit {
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn repr(&self) -> &SplitRepr {
        &self.repr
    }

    pub fn state_range(&self) -> (f64, f64) {
        self.state_range
    }

    /// Non-decreasing part `[F·n]⁺(u)`.
    #[inline]
    pub fn g_plus(&self, u: f64) -> f64 {
        match &self.repr {
            SplitRepr::Zero => 0.0,
            SplitRepr::Closed { coef, shape } => {
                if *coef >= 0.0 {
                    coef * shape.plus(u).unwrap_or(0.0)
                } else {
                    coef * shape.minus(u).unwrap_or(0.0)
                }
            }
            SplitRepr::Tabulated(t) => t.plus(u),
        }
    }

    /// Non-increasing part `[F·n]⁻(u)`.
    #[inline]
    pub fn g_minus(&self, u: f64) -> f64 {
        match &self.repr {
            SplitRepr::Zero => 0.0,
            SplitRepr::Closed { coef, shape } => {
                if *coef >= 0.0 {
                    coef * shape.minus(u).unwrap_or(0.0)
                } else {
                    coef * shape.plus(u).unwrap_or(0.0)
                }
            }
            SplitRepr::Tabulated(t) => t.minus(u),
        }
    }

    /// Derivative of `g⁺`, one-sided from the right at kinks.
    pub fn dg_plus(&self, u: f64) -> f64 {
        match &self.repr {
            SplitRepr::Zero => 0.0,
            SplitRepr::Closed { coef, shape } => {
                if *coef >= 0.0 {
                    coef * shape.plus_derivative(u).unwrap_or(0.0)
                } else {
                    coef * shape.minus_derivative(u).unwrap_or(0.0)
                }
            }
            SplitRepr::Tabulated(t) => t.slopes(t.segment(u)).0,
        }
    }

    /// Derivative of `g⁻`, one-sided from the right at kinks.
    pub fn dg_minus(&self, u: f64) -> f64 {
        match &self.repr {
            SplitRepr::Zero => 0.0,
            SplitRepr::Closed { coef, shape } => {
                if *coef >= 0.0 {
                    coef * shape.minus_derivative(u).unwrap_or(0.0)
                } else {
                    coef * shape.plus_derivative(u).unwrap_or(0.0)
                }
            }
            SplitRepr::Tabulated(t) => t.slopes(t.segment(u)).1,
        }
    }

    /// `(F·n)(u)` reconstructed from the split.
    pub fn total(&self, u: f64) -> f64 {
        self.g_plus(u) + self.g_minus(u)
    }

    /// Engquist–Osher flux `g⁺(a) + g⁻(b)` without range checks.
    #[inline]
    pub fn eo(&self, a: f64, b: f64) -> f64 {
        self.g_plus(a) + self.g_minus(b)
    }

    /// Points where `g±` may have kinks, inside the state range.
    pub fn kinks(&self) -> Vec<f64> {
        let (lo, hi) = self.state_range;
        let mut k = match &self.repr {
            SplitRepr::Zero => vec![],
            SplitRepr::Closed { shape, .. } => shape.kinks(),
            SplitRepr::Tabulated(t) => t.nodes.clone(),
        };
        k.retain(|&x| x >= lo && x <= hi);
        k
    }
}

/// Engquist–Osher flux with range checks on both states.
pub fn eo_flux(split: &DirectionalSplit, a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = split.state_range;
    for v in [a, b] {
        if !(v >= lo && v <= hi) {
            return Err(Error::RangeViolation { value: v, lo, hi });
        }
    }
    Ok(split.eo(a, b))
}

/// Checks `EO_{−n}(a, b) = −EO_n(b, a)`.
pub fn eo_antisymmetry_check(split_n: &DirectionalSplit, split_minus_n: &DirectionalSplit, a: f64, b: f64) -> bool {
    let lhs = split_minus_n.eo(a, b);
    let rhs = -split_n.eo(b, a);
    (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs()))
}

/// Per-direction split cache keyed by the bit pattern of the direction.
#[derive(Debug, Default)]
pub struct SplitCache {
    map: HashMap<Vec<u64>, DirectionalSplit>,
}

impl SplitCache {
    pub fn get(&mut self, flux: &FluxSpec, n: &[f64]) -> Result<DirectionalSplit> {
        let key: Vec<u64> = n.iter().map(|x| x.to_bits()).collect();
        if let Some(s) = self.map.get(&key) {
            return Ok(s.clone());
        }
        let s = flux.directional_split(n)?;
        self.map.insert(key, s.clone());
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn segment(nodes: &[f64], u: f64) -> usize {
    let i = nodes.partition_point(|&x| x <= u);
    i.clamp(1, nodes.len() - 1) - 1
}

fn interp(nodes: &[f64], values: &[f64], u: f64) -> f64 {
    let i = segment(nodes, u);
    let (x0, x1) = (nodes[i], nodes[i + 1]);
    let t = (u - x0) / (x1 - x0);
    values[i] + t * (values[i + 1] - values[i])
}
