//! Model coefficients, computational grid and initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::WaveProfile;

/// Dispersion coefficients of the fifth-order system together with the wave
/// velocity `omega`.
///
/// Sign constraints (`a, c < 0`, every other coefficient `> 0`) are checked by
/// [`ModelParams::new`] and [`ModelParams::validate`]; the solvers call
/// `validate` on entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
    pub omega: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: f64, b: f64, c: f64, d: f64, a2: f64, b2: f64, c2: f64, d2: f64, omega: f64) -> Result<Self> {
        let params = Self {
            a,
            b,
            c,
            d,
            a2,
            b2,
            c2,
            d2,
            omega,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same coefficients, different velocity.
    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let negative = [("a", self.a), ("c", self.c)];
        let positive = [
            ("b", self.b),
            ("d", self.d),
            ("a2", self.a2),
            ("b2", self.b2),
            ("c2", self.c2),
            ("d2", self.d2),
        ];
        for (name, value) in negative.iter().chain(positive.iter()) {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: *value,
                    reason: "must be finite",
                });
            }
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be finite",
            });
        }
        for (name, value) in negative {
            if value >= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be negative",
                });
            }
        }
        for (name, value) in positive {
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }

    /// Checks the symmetric coupling `b = d`, `b2 = d2` under which the
    /// existence theory is stated.
    pub fn validate_theoretical_regime(&self) -> Result<()> {
        self.validate()?;
        if self.b != self.d {
            return Err(Error::InvalidParameter {
                name: "d",
                value: self.d,
                reason: "theoretical regime requires d = b",
            });
        }
        if self.b2 != self.d2 {
            return Err(Error::InvalidParameter {
                name: "d2",
                value: self.d2,
                reason: "theoretical regime requires d2 = b2",
            });
        }
        Ok(())
    }

    /// Upper bound `min{1, -a/b, -c/b, a2/b2, c2/b2}` on `|omega|` for which
    /// solitary waves are known to exist.
    pub fn admissible_velocity_bound(&self) -> Result<f64> {
        self.validate()?;
        Ok([
            1.0,
            -self.a / self.b,
            -self.c / self.b,
            self.a2 / self.b2,
            self.c2 / self.b2,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min))
    }

    /// `true` iff `0 < |omega| < admissible_velocity_bound()`. Never an error:
    /// solvers run outside the regime and record a warning instead.
    pub fn velocity_in_regime(&self) -> bool {
        match self.admissible_velocity_bound() {
            Ok(bound) => self.omega != 0.0 && self.omega.abs() < bound,
            Err(_) => false,
        }
    }

    /// Warning text for an out-of-regime velocity, if any.
    pub fn regime_warning(&self) -> Option<String> {
        if self.velocity_in_regime() {
            return None;
        }
        let bound = self.admissible_velocity_bound().unwrap_or(f64::NAN);
        Some(format!(
            "omega = {} lies outside the existence interval 0 < |omega| < {bound}",
            self.omega
        ))
    }
}

/// Free function form of [`ModelParams::admissible_velocity_bound`].
pub fn admissible_velocity_bound(params: &ModelParams) -> Result<f64> {
    params.admissible_velocity_bound()
}

/// Free function form of [`ModelParams::velocity_in_regime`].
pub fn check_velocity_in_regime(params: &ModelParams) -> bool {
    params.velocity_in_regime()
}

/// Periodic interval `[0, L)` sampled at `N` equispaced points, `N` a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "number of points must be a power of two >= 4, got {n_points}"
            )));
        }
        Ok(Self { length, n_points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Number of modes in the half spectrum, `N/2 + 1`.
    pub fn n_modes(&self) -> usize {
        self.n_points / 2 + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n_points).map(|j| f(self.x(j))).collect()
    }
}

/// Gaussian bump `A exp(-w (x - a0)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Gaussian {
    pub fn eval(&self, x: f64) -> f64 {
        let s = x - self.center;
        self.amplitude * (-self.width * s * s).exp()
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x| self.eval(x))
    }
}

/// Initial guess with identical Gaussian components `psi = v`.
pub fn gaussian_initial(grid: &Grid, center: f64, width: f64, amplitude: f64) -> Result<WaveProfile> {
    let g = Gaussian {
        center,
        width,
        amplitude,
    };
    gaussian_pair(grid, g, g)
}

/// Initial guess with independent Gaussians for `psi` and `v`.
pub fn gaussian_pair(grid: &Grid, psi: Gaussian, v: Gaussian) -> Result<WaveProfile> {
    for g in [&psi, &v] {
        if !(0.0..=grid.length()).contains(&g.center) {
            return Err(Error::Config(format!(
                "gaussian centre a0 = {} must lie in [0, {}]",
                g.center,
                grid.length()
            )));
        }
    }
    WaveProfile::new(*grid, psi.sample(grid), v.sample(grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig1() -> ModelParams {
        ModelParams::new(-2.0, 2.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, 0.8).unwrap()
    }

    #[test]
    fn bound_matches_reported_intervals() {
        let fig3 = ModelParams::new(-4.0, 4.0, -4.0, 4.0, 0.5, 2.0, 0.5, 2.0, 0.4).unwrap();
        assert_eq!(fig3.admissible_velocity_bound().unwrap(), 0.25);
        let fig4 = ModelParams::new(-4.0, 4.0, -4.0, 4.0, 1.0, 3.0, 1.0, 3.0, 0.4).unwrap();
        assert!((fig4.admissible_velocity_bound().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(fig1().admissible_velocity_bound().unwrap(), 1.0);
    }

    #[test]
    fn regime_checks() {
        assert!(fig1().velocity_in_regime());
        let fig3 = ModelParams::new(-4.0, 4.0, -4.0, 4.0, 0.5, 2.0, 0.5, 2.0, 0.4).unwrap();
        assert!(!fig3.velocity_in_regime());
        assert!(fig3.regime_warning().is_some());
        assert!(!fig1().with_omega(0.0).velocity_in_regime());
        assert!(fig1().with_omega(-0.8).velocity_in_regime());
    }

    #[test]
    fn sign_violations_are_rejected() {
        assert!(ModelParams::new(2.0, 2.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, 0.8).is_err());
        assert!(ModelParams::new(-2.0, 0.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, 0.8).is_err());
        assert!(ModelParams::new(-2.0, 2.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, f64::NAN).is_err());
        let p = ModelParams::new(-2.0, 2.0, -2.0, 3.0, 20.0, 5.0, 20.0, 5.0, 0.8).unwrap();
        assert!(p.validate_theoretical_regime().is_err());
        assert!(fig1().validate_theoretical_regime().is_ok());
    }

    #[test]
    fn grid_requires_power_of_two() {
        assert!(Grid::new(200.0, 4096).is_ok());
        assert!(Grid::new(200.0, 1000).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
        let g = Grid::new(200.0, 4096).unwrap();
        assert_eq!(g.spacing(), 200.0 / 4096.0);
        assert_eq!(g.n_modes(), 2049);
    }

    #[test]
    fn gaussian_values() {
        let g = Grid::new(200.0, 4096).unwrap();
        let w = gaussian_initial(&g, 100.0, 0.5, 1.0).unwrap();
        assert_eq!(w.psi()[2048], 1.0);
        let half = Gaussian {
            center: 50.0,
            width: 0.05,
            amplitude: 1.0,
        };
        let s = (2f64.ln() / 0.05).sqrt();
        assert!((half.eval(50.0 + s) - 0.5).abs() < 1e-14);
        assert!((half.eval(50.0 - s) - 0.5).abs() < 1e-14);
        let zero = gaussian_initial(&g, 100.0, 0.5, 0.0).unwrap();
        assert!(zero.psi().iter().chain(zero.v()).all(|&x| x == 0.0));
        assert!(gaussian_initial(&g, 250.0, 0.5, 1.0).is_err());
    }
}
