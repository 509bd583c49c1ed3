//! Direction measures, half-sphere folding, periodic grids and shifts.

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-10;
const MERGE_TOL: f64 = 1e-12;

const S3: f64 = 0.866_025_403_784_438_6; // √3/2

/// Finite atomic measure on the unit sphere in one or two dimensions.
///
/// Directions are stored padded to two components; in 1D the second one is
/// always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMeasure {
    dim: usize,
    atoms: Vec<([f64; 2], f64)>,
}

/// Names accepted by [`standard_measure`].
pub const STANDARD_MEASURES: [&str; 4] = ["line", "square", "hexagon", "triangle"];

pub fn standard_measure(name: &str) -> Result<DirectionMeasure> {
    let (dim, atoms) = match name {
        "line" => (1, vec![([1.0, 0.0], 0.5), ([-1.0, 0.0], 0.5)]),
        "square" => (
            2,
            vec![([1.0, 0.0], 0.5), ([0.0, 1.0], 0.5), ([-1.0, 0.0], 0.5), ([0.0, -1.0], 0.5)],
        ),
        "hexagon" => (
            2,
            vec![
                ([1.0, 0.0], 1.0 / 3.0),
                ([0.5, S3], 1.0 / 3.0),
                ([-0.5, S3], 1.0 / 3.0),
                ([-1.0, 0.0], 1.0 / 3.0),
                ([-0.5, -S3], 1.0 / 3.0),
                ([0.5, -S3], 1.0 / 3.0),
            ],
        ),
        "triangle" => (2, vec![([1.0, 0.0], 2.0 / 3.0), ([-0.5, S3], 2.0 / 3.0), ([-0.5, -S3], 2.0 / 3.0)]),
        _ => return Err(Error::UnknownName { kind: "direction measure", name: name.to_string() }),
    };
    DirectionMeasure::new(dim, atoms)
}

/// `max_{a,b} |Σ w_i n_i^a n_i^b − δ_ab|` for a raw atom list.
pub fn normalization_deviation(dim: usize, atoms: &[([f64; 2], f64)]) -> f64 {
    let mut dev: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let m: f64 = atoms.iter().map(|(n, w)| w * n[a] * n[b]).sum();
            let delta = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((m - delta).abs());
        }
    }
    dev
}

pub fn validate_normalization(dm: &DirectionMeasure) -> f64 {
    normalization_deviation(dm.dim, &dm.atoms)
}

impl DirectionMeasure {
    pub fn new(dim: usize, atoms: Vec<([f64; 2], f64)>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::DimensionMismatch { expected: 2, got: dim });
        }
        if atoms.is_empty() {
            return Err(Error::Invalid("direction measure has no atoms".into()));
        }
        for (n, w) in &atoms {
            if dim == 1 && n[1] != 0.0 {
                return Err(Error::DimensionMismatch { expected: 1, got: 2 });
            }
            if ((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitDirection(n[..dim].to_vec()));
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::Invalid(format!("direction weight must be positive, got {w}")));
            }
        }
        let dev = normalization_deviation(dim, &atoms);
        if dev > NORMALIZATION_TOL {
            return Err(Error::Normalization(dev));
        }
        Ok(Self { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[([f64; 2], f64)] {
        &self.atoms
    }

    /// `w(S^{d−1})`.
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Folds antipodal atoms onto the closed upper half-sphere,
    /// `ω(U) = w(U) + w(−U)`.
    pub fn fold(&self) -> FoldedMeasure {
        let mut out: Vec<([f64; 2], f64)> = Vec::new();
        for &(n, w) in &self.atoms {
            let mut m = if n[1] > MERGE_TOL || (n[1].abs() <= MERGE_TOL && n[0] > 0.0) { n } else { [-n[0], -n[1]] };
            if m[1].abs() <= MERGE_TOL {
                m = [m[0].signum(), 0.0];
            }
            if let Some(slot) = out
                .iter_mut()
                .find(|(p, _)| (p[0] - m[0]).abs() <= MERGE_TOL && (p[1] - m[1]).abs() <= MERGE_TOL)
            {
                slot.1 += w;
            } else {
                out.push((m, w));
            }
        }
        FoldedMeasure { dim: self.dim, atoms: out }
    }
}

pub fn fold(dm: &DirectionMeasure) -> FoldedMeasure {
    dm.fold()
}

/// Atoms on the closed half-sphere with folded weights `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedMeasure {
    dim: usize,
    atoms: Vec<([f64; 2], f64)>,
}

impl FoldedMeasure {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[([f64; 2], f64)] {
        &self.atoms
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// Periodic, cell-centred uniform grid with a common spacing on all axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    h: f64,
    origin: [f64; 2],
}

impl Grid {
    /// 1D grid of `n` cells on `[a, b)`.
    pub fn new_1d(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 cells, got {n}")));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("invalid interval [{a}, {b})")));
        }
        Ok(Self { dim: 1, n: [n, 1], h: (b - a) / n as f64, origin: [a, 0.0] })
    }

    /// 2D grid of `nx × ny` square cells of side `h` with lower-left corner
    /// at `origin`.
    pub fn new_2d(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 cells per axis, got {nx}x{ny}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        Ok(Self { dim: 2, n: [nx, ny], h, origin })
    }

    /// Square `n × n` grid on `[a, b)²`.
    pub fn square(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidGrid(format!("invalid interval [{a}, {b})")));
        }
        Self::new_2d(n, n, (b - a) / n as f64, [a, a])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> [usize; 2] {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Domain length along each axis.
    pub fn lengths(&self) -> [f64; 2] {
        [self.n[0] as f64 * self.h, if self.dim == 2 { self.n[1] as f64 * self.h } else { 0.0 }]
    }

    /// Smallest half-length over the axes; filter supports must stay below.
    pub fn half_domain(&self) -> f64 {
        let l = self.lengths();
        if self.dim == 1 {
            0.5 * l[0]
        } else {
            0.5 * l[0].min(l[1])
        }
    }

    /// `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n[0] + ix
    }

    /// Centre of cell `i` (flat index).
    pub fn center(&self, i: usize) -> [f64; 2] {
        let (ix, iy) = (i % self.n[0], i / self.n[0]);
        let x = self.origin[0] + (ix as f64 + 0.5) * self.h;
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, self.origin[1] + (iy as f64 + 0.5) * self.h]
        }
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }
}

/// Values at cell centres of a periodic grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub t: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell: i, t });
        }
        Ok(Self { grid, values, t })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values, t: 0.0 }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = grid.centers().into_iter().map(f).collect();
        Self { grid, values, t: 0.0 }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fixed stencil realising `x ↦ u(x + r n)` on a periodic grid: an exact
/// index shift when `r n / h` is integral, bilinear interpolation otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftStencil {
    taps: Vec<(isize, isize, f64)>,
}

impl ShiftStencil {
    pub fn new(grid: &Grid, n: [f64; 2], r: f64) -> Self {
        let d = [r * n[0] / grid.h, if grid.dim == 2 { r * n[1] / grid.h } else { 0.0 }];
        let mut axes = [[(0isize, 1.0f64); 2]; 2];
        let mut counts = [1usize; 2];
        for a in 0..2 {
            let near = d[a].round();
            if (d[a] - near).abs() <= 1e-12 * d[a].abs().max(1.0) {
                axes[a][0] = (near as isize, 1.0);
            } else {
                let lo = d[a].floor();
                let f = d[a] - lo;
                axes[a] = [(lo as isize, 1.0 - f), (lo as isize + 1, f)];
                counts[a] = 2;
            }
        }
        let mut taps = Vec::with_capacity(4);
        for &(oy, wy) in &axes[1][..counts[1]] {
            for &(ox, wx) in &axes[0][..counts[0]] {
                taps.push((ox, oy, wx * wy));
            }
        }
        Self { taps }
    }

    pub fn is_exact(&self) -> bool {
        self.taps.len() == 1
    }

    pub fn taps(&self) -> &[(isize, isize, f64)] {
        &self.taps
    }

    /// Shifted value at cell `(ix, iy)`.
    #[inline]
    pub fn sample(&self, grid: &Grid, values: &[f64], ix: usize, iy: usize) -> f64 {
        let (nx, ny) = (grid.n[0] as isize, grid.n[1] as isize);
        let mut acc = 0.0;
        for &(ox, oy, w) in &self.taps {
            let jx = (ix as isize + ox).rem_euclid(nx) as usize;
            let jy = (iy as isize + oy).rem_euclid(ny) as usize;
            acc += w * values[jy * grid.n[0] + jx];
        }
        acc
    }

    /// Tap-weighted mean of `g(u)` over the stencil at cell `(ix, iy)`; equals
    /// `g(sample(..))` for exact shifts.
    #[inline]
    pub fn mean(&self, grid: &Grid, values: &[f64], ix: usize, iy: usize, g: impl Fn(f64) -> f64) -> f64 {
        let (nx, ny) = (grid.n[0] as isize, grid.n[1] as isize);
        let mut acc = 0.0;
        for &(ox, oy, w) in &self.taps {
            let jx = (ix as isize + ox).rem_euclid(nx) as usize;
            let jy = (iy as isize + oy).rem_euclid(ny) as usize;
            acc += w * g(values[jy * grid.n[0] + jx]);
        }
        acc
    }

    pub fn apply(&self, grid: &Grid, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(values.len());
        for iy in 0..grid.n[1] {
            for ix in 0..grid.n[0] {
                out.push(self.sample(grid, values, ix, iy));
            }
        }
        out
    }
}

/// Values of `x ↦ u(x + r n)` for `r ≥ 0`.
pub fn sample_shift(u: &GridFunction, n: [f64; 2], r: f64) -> Result<Vec<f64>> {
    if !(r >= 0.0) {
        return Err(Error::Invalid(format!("shift radius must be non-negative, got {r}")));
    }
    Ok(ShiftStencil::new(&u.grid, n, r).apply(&u.grid, &u.values))
}
