//! Exact solutions of `u_t + div f(u) = 0` on a periodic interval.
//!
//! Riemann data on a periodic domain carries a second jump at the seam
//! `a ≡ b`. Both waves are solved independently and each owns the half of the
//! domain around it; evaluation fails once either wave leaves its half.

use crate::error::{Error, Result};
use crate::geometry::{Grid, GridFunction};
use crate::initial::InitialData;

#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    /// `u0(x − c t)`, periodic.
    AdvectionTranslate { u0: InitialData, speed: f64 },
    /// Burgers Riemann problem with `u_l > u_r`.
    BurgersShock { u_l: f64, u_r: f64, x0: f64 },
    /// Burgers Riemann problem with `u_l < u_r`.
    BurgersRarefaction { u_l: f64, u_r: f64, x0: f64 },
}

/// Self-similar Burgers Riemann solution at `ξ = x/t`.
pub fn burgers_riemann(l: f64, r: f64, xi: f64) -> f64 {
    if l > r {
        if xi < 0.5 * (l + r) {
            l
        } else {
            r
        }
    } else {
        xi.clamp(l, r)
    }
}

/// Interval swept by the Burgers wave from `(l, r)` per unit time.
fn wave_extent(l: f64, r: f64) -> (f64, f64) {
    if l > r {
        let s = 0.5 * (l + r);
        (s, s)
    } else {
        (l, r)
    }
}

impl ExactSolution {
    pub fn initial(&self) -> InitialData {
        match self {
            ExactSolution::AdvectionTranslate { u0, .. } => u0.clone(),
            ExactSolution::BurgersShock { u_l, u_r, x0 } | ExactSolution::BurgersRarefaction { u_l, u_r, x0 } => {
                InitialData::Riemann { u_l: *u_l, u_r: *u_r, x0: *x0 }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ExactSolution::BurgersShock { u_l, u_r, .. } if !(u_l > u_r) => {
                Err(Error::Inadmissible { kind: "shock", u_l, u_r })
            }
            ExactSolution::BurgersRarefaction { u_l, u_r, .. } if !(u_l < u_r) => {
                Err(Error::Inadmissible { kind: "rarefaction", u_l, u_r })
            }
            _ => Ok(()),
        }
    }
}

pub fn exact_evaluate(sol: &ExactSolution, grid: &Grid, t: f64) -> Result<GridFunction> {
    sol.validate()?;
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: grid.dim() });
    }
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("time must be non-negative, got {t}")));
    }
    let a = grid.origin()[0];
    let len = grid.lengths()[0];
    let b = a + len;
    let values: Vec<f64> = match sol {
        ExactSolution::AdvectionTranslate { u0, speed } => grid
            .centers()
            .into_iter()
            .map(|x| {
                let y = a + (x[0] - speed * t - a).rem_euclid(len);
                u0.eval([y, 0.0], grid)
            })
            .collect(),
        ExactSolution::BurgersShock { u_l, u_r, x0 } | ExactSolution::BurgersRarefaction { u_l, u_r, x0 } => {
            let (l, r, x0) = (*u_l, *u_r, *x0);
            if !(x0 > a && x0 < b) {
                return Err(Error::Invalid(format!("x0 = {x0} must lie inside ({a}, {b})")));
            }
            let (ml, mr) = (0.5 * (a + x0), 0.5 * (x0 + b));
            let tol = 1e-12 * len;
            let (e0, e1) = wave_extent(l, r);
            let (s0, s1) = wave_extent(r, l);
            if x0 + e0 * t < ml - tol || x0 + e1 * t > mr + tol || s0 * t < mr - b - tol || s1 * t > ml - a + tol {
                return Err(Error::WaveInteraction(t));
            }
            grid.centers()
                .into_iter()
                .map(|x| {
                    let x = x[0];
                    if t == 0.0 {
                        return if x < x0 { l } else { r };
                    }
                    if x >= ml && x < mr {
                        burgers_riemann(l, r, (x - x0) / t)
                    } else {
                        let y = if x >= mr { x - b } else { x - a };
                        burgers_riemann(r, l, y / t)
                    }
                })
                .collect()
        }
    };
    GridFunction::new(grid.clone(), values, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shock_position() {
        let g = Grid::new_1d(400, -1.0, 1.0).unwrap();
        let s = ExactSolution::BurgersShock { u_l: 1.0, u_r: 0.0, x0: 0.0 };
        let u = exact_evaluate(&s, &g, 0.5).unwrap();
        for (x, v) in g.centers().iter().zip(&u.values) {
            if x[0] > -0.5 && x[0] < 0.5 {
                assert_eq!(*v, if x[0] < 0.25 { 1.0 } else { 0.0 });
            }
        }
        let u0 = exact_evaluate(&s, &g, 0.0).unwrap();
        assert_eq!(u0.values, s.initial().sample(&g).unwrap().values);
    }

    #[test]
    fn rarefaction_fan() {
        let g = Grid::new_1d(400, -2.0, 2.0).unwrap();
        let s = ExactSolution::BurgersRarefaction { u_l: -1.0, u_r: 1.0, x0: 0.0 };
        let u = exact_evaluate(&s, &g, 1.0).unwrap();
        for (x, v) in g.centers().iter().zip(&u.values) {
            if x[0].abs() < 1.0 {
                assert_eq!(*v, x[0].clamp(-1.0, 1.0));
            }
        }
    }

    #[test]
    fn seam_wave_and_interaction() {
        let g = Grid::new_1d(200, -1.0, 1.0).unwrap();
        let s = ExactSolution::BurgersShock { u_l: 1.0, u_r: 0.0, x0: 0.0 };
        let u = exact_evaluate(&s, &g, 0.5).unwrap();
        // Seam rarefaction from 0 to 1 spreads to the right of x = −1.
        let i = g.centers().iter().position(|x| x[0] > -0.75).unwrap();
        assert!((u.values[i] - (g.center(i)[0] + 1.0) / 0.5).abs() < 1e-12);
        assert!(matches!(exact_evaluate(&s, &g, 1.5), Err(Error::WaveInteraction(_))));
        let bad = ExactSolution::BurgersShock { u_l: 0.0, u_r: 1.0, x0: 0.0 };
        assert!(matches!(exact_evaluate(&bad, &g, 0.1), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn advection_translates_periodically() {
        let g = Grid::new_1d(64, 0.0, 1.0).unwrap();
        let s = ExactSolution::AdvectionTranslate { u0: InitialData::Sine { amp: 1.0, freq: 1.0, offset: 0.0 }, speed: 1.0 };
        let u = exact_evaluate(&s, &g, 1.0).unwrap();
        let u0 = exact_evaluate(&s, &g, 0.0).unwrap();
        for (a, b) in u.values.iter().zip(&u0.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
