//! Initial data on periodic grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Grid, GridFunction};

/// Seeded piecewise-constant data with a bounded total variation.
///
/// Breakpoints are stored as fractions of the domain so the same data can be
/// sampled on any grid over the same box.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBv {
    dim: usize,
    xbreaks: Vec<f64>,
    ybreaks: Vec<f64>,
    /// Row-major block values, `ybreaks.len() × xbreaks.len()` (one row in 1D).
    values: Vec<f64>,
}

impl RandomBv {
    /// `pieces` blocks per axis with values in `range`, shrunk towards the
    /// midpoint of `range` until the total variation is at most `tv_budget`.
    pub fn new(dim: usize, seed: u64, pieces: usize, range: (f64, f64), tv_budget: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::DimensionMismatch { expected: 2, got: dim });
        }
        if pieces < 1 {
            return Err(Error::Invalid("random_bv needs at least one piece".into()));
        }
        let (lo, hi) = range;
        if !(hi >= lo) {
            return Err(Error::InvalidRange { lo, hi });
        }
        if !(tv_budget >= 0.0) {
            return Err(Error::Invalid(format!("tv_budget must be non-negative, got {tv_budget}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let breaks = |rng: &mut ChaCha8Rng| {
            let mut b: Vec<f64> = (0..pieces).map(|_| rng.random::<f64>()).collect();
            b.sort_by(f64::total_cmp);
            b
        };
        let xbreaks = breaks(&mut rng);
        let ybreaks = if dim == 2 { breaks(&mut rng) } else { vec![0.0] };
        let count = xbreaks.len() * ybreaks.len();
        let mut values: Vec<f64> = (0..count).map(|_| rng.random_range(lo..=hi)).collect();
        let mut data = Self { dim, xbreaks, ybreaks, values: values.clone() };
        let tv = data.total_variation();
        if tv > tv_budget && tv > 0.0 {
            let mid = 0.5 * (lo + hi);
            let s = tv_budget / tv;
            for v in values.iter_mut() {
                *v = mid + s * (*v - mid);
            }
            data.values = values;
        }
        Ok(data)
    }

    /// Total variation of the continuous data on a unit-length domain
    /// (per-axis jump sums weighted by the length of each interface).
    pub fn total_variation(&self) -> f64 {
        let (nx, ny) = (self.xbreaks.len(), self.ybreaks.len());
        let widths = |b: &[f64]| -> Vec<f64> {
            (0..b.len()).map(|i| if i + 1 < b.len() { b[i + 1] - b[i] } else { 1.0 - b[i] + b[0] }).collect()
        };
        let wy = if self.dim == 2 { widths(&self.ybreaks) } else { vec![1.0] };
        let wx = widths(&self.xbreaks);
        let v = |ix: usize, iy: usize| self.values[iy * nx + ix];
        let mut tv = 0.0;
        for iy in 0..ny {
            for ix in 0..nx {
                tv += (v((ix + 1) % nx, iy) - v(ix, iy)).abs() * wy[iy];
                if self.dim == 2 {
                    tv += (v(ix, (iy + 1) % ny) - v(ix, iy)).abs() * wx[ix];
                }
            }
        }
        tv
    }

    fn block(b: &[f64], s: f64) -> usize {
        // Block i covers [b_i, b_{i+1}); the last one wraps around to b_0.
        let i = b.partition_point(|&x| x <= s);
        if i == 0 {
            b.len() - 1
        } else {
            i - 1
        }
    }

    fn eval_fraction(&self, sx: f64, sy: f64) -> f64 {
        let ix = Self::block(&self.xbreaks, sx);
        let iy = if self.dim == 2 { Self::block(&self.ybreaks, sy) } else { 0 };
        self.values[iy * self.xbreaks.len() + ix]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant(f64),
    /// `u_l` for `x < x0`, `u_r` for `x ≥ x0` (first coordinate).
    Riemann { u_l: f64, u_r: f64, x0: f64 },
    /// `offset + amp·sin(2π freq x)` (times the same factor in `y` for 2D).
    Sine { amp: f64, freq: f64, offset: f64 },
    /// Piecewise-linear interpolation of `(x, u)` rows, constant outside.
    Table(Vec<(f64, f64)>),
    RandomBv(RandomBv),
}

impl InitialData {
    pub fn random_bv(dim: usize, seed: u64, pieces: usize, range: (f64, f64), tv_budget: f64) -> Result<Self> {
        Ok(InitialData::RandomBv(RandomBv::new(dim, seed, pieces, range, tv_budget)?))
    }

    /// Value at a point of the periodic box described by `grid`.
    pub fn eval(&self, x: [f64; 2], grid: &Grid) -> f64 {
        match self {
            InitialData::Constant(c) => *c,
            InitialData::Riemann { u_l, u_r, x0 } => {
                if x[0] < *x0 {
                    *u_l
                } else {
                    *u_r
                }
            }
            InitialData::Sine { amp, freq, offset } => {
                let tau = std::f64::consts::TAU;
                let s = (tau * freq * x[0]).sin();
                let s = if grid.dim() == 2 { s * (tau * freq * x[1]).sin() } else { s };
                offset + amp * s
            }
            InitialData::Table(rows) => {
                if x[0] <= rows[0].0 {
                    return rows[0].1;
                }
                let last = rows[rows.len() - 1];
                if x[0] >= last.0 {
                    return last.1;
                }
                let i = rows.partition_point(|r| r.0 <= x[0]) - 1;
                let (a, b) = (rows[i], rows[i + 1]);
                a.1 + (x[0] - a.0) / (b.0 - a.0) * (b.1 - a.1)
            }
            InitialData::RandomBv(r) => {
                let o = grid.origin();
                let l = grid.lengths();
                let frac = |v: f64, o: f64, l: f64| ((v - o) / l).rem_euclid(1.0);
                let sy = if grid.dim() == 2 { frac(x[1], o[1], l[1]) } else { 0.0 };
                r.eval_fraction(frac(x[0], o[0], l[0]), sy)
            }
        }
    }

    /// Point samples at the cell centres.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        if let InitialData::Table(rows) = self {
            if rows.len() < 2 || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Invalid("initial table needs increasing x with at least two rows".into()));
            }
        }
        if let InitialData::RandomBv(r) = self {
            if r.dim != grid.dim() {
                return Err(Error::DimensionMismatch { expected: grid.dim(), got: r.dim });
            }
        }
        let values: Vec<f64> = grid.centers().into_iter().map(|x| self.eval(x, grid)).collect();
        GridFunction::new(grid.clone(), values, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_sampling() {
        let g = Grid::new_1d(8, -1.0, 1.0).unwrap();
        let u = InitialData::Riemann { u_l: 1.0, u_r: 0.0, x0: 0.0 }.sample(&g).unwrap();
        assert_eq!(u.values, vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn random_bv_is_seeded_and_budgeted() {
        let a = RandomBv::new(1, 7, 12, (-1.0, 1.0), 3.0).unwrap();
        let b = RandomBv::new(1, 7, 12, (-1.0, 1.0), 3.0).unwrap();
        assert_eq!(a, b);
        assert!(a.total_variation() <= 3.0 + 1e-12);
        let c = RandomBv::new(1, 8, 12, (-1.0, 1.0), 3.0).unwrap();
        assert_ne!(a, c);
        let g = Grid::new_1d(4096, 0.0, 1.0).unwrap();
        let u = InitialData::RandomBv(a.clone()).sample(&g).unwrap();
        assert!(u.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        let tv: f64 = (0..4096).map(|i| (u.values[(i + 1) % 4096] - u.values[i]).abs()).sum();
        assert!(tv <= a.total_variation() + 1e-12);
    }

    #[test]
    fn random_bv_2d() {
        let r = RandomBv::new(2, 1, 5, (0.0, 1.0), 100.0).unwrap();
        let g = Grid::square(16, 0.0, 1.0).unwrap();
        let u = InitialData::RandomBv(r).sample(&g).unwrap();
        assert_eq!(u.values.len(), 256);
        let g1 = Grid::new_1d(16, 0.0, 1.0).unwrap();
        assert!(InitialData::random_bv(2, 1, 5, (0.0, 1.0), 1.0).unwrap().sample(&g1).is_err());
    }

    #[test]
    fn table_interpolates() {
        let g = Grid::new_1d(4, 0.0, 1.0).unwrap();
        let u = InitialData::Table(vec![(0.0, 0.0), (1.0, 1.0)]).sample(&g).unwrap();
        assert_eq!(u.values, vec![0.125, 0.375, 0.625, 0.875]);
    }
}
