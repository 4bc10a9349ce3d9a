use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Grid;

/// Paired samples of the elevation profile `psi` and velocity profile `v`
/// on one grid. In the time-dependent setting `psi` is `eta` and `v` is `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    grid: Grid,
    psi: Vec<f64>,
    v: Vec<f64>,
}

impl WaveProfile {
    pub fn new(grid: Grid, psi: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = grid.n_points();
        if psi.len() != n || v.len() != n {
            return Err(Error::GridMismatch(format!(
                "profile lengths ({}, {}) do not match grid size {n}",
                psi.len(),
                v.len()
            )));
        }
        if psi.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::DegenerateState("profile contains non-finite samples".into()));
        }
        Ok(Self { grid, psi, v })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            psi: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>, Vec<f64>) {
        (self.grid, self.psi, self.v)
    }

    pub fn psi_max_norm(&self) -> f64 {
        max_norm(&self.psi)
    }

    pub fn v_max_norm(&self) -> f64 {
        max_norm(&self.v)
    }

    /// `max(|psi|_inf, |v|_inf)`.
    pub fn max_norm(&self) -> f64 {
        self.psi_max_norm().max(self.v_max_norm())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            psi: self.psi.iter().map(|x| alpha * x).collect(),
            v: self.v.iter().map(|x| alpha * x).collect(),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            grid: self.grid,
            psi: self.v.clone(),
            v: self.psi.clone(),
        }
    }
}

pub(crate) fn max_norm(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `|a - b|_inf / max(|a|_inf, floor)`.
pub(crate) fn relative_change(new: &[f64], old: &[f64], floor: f64) -> f64 {
    let diff = new.iter().zip(old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    diff / max_norm(new).max(floor)
}
