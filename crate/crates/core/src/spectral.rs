//! Periodic real-field spectral toolbox.
//!
//! Half-spectrum convention: a real field of `N` samples maps to `N/2 + 1`
//! complex coefficients `X_m = sum_j f_j exp(-2 pi i m j / N)`; the inverse
//! carries the `1/N` normalisation. Mode `m` has wavenumber `k_m = 2 pi m / L`.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::model::Grid;

pub type Spectrum = Vec<Complex64>;

/// FFT plans and wavenumbers for one grid. Cheap to clone; plans are shared.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

/// `k_m = 2 pi m / L` for `m = 0..=N/2`.
pub fn wavenumbers(grid: &Grid) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / grid.length();
    (0..grid.n_modes()).map(|m| base * m as f64).collect()
}

/// `(i k)^order`.
pub fn ik_power(k: f64, order: u32) -> Complex64 {
    let mag = k.powi(order as i32);
    match order % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = RealFftPlanner::<f64>::new();
        let n = grid.n_points();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers: wavenumbers(&grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn n_modes(&self) -> usize {
        self.wavenumbers.len()
    }

    /// Multiplicity of mode `m` in the full spectrum: 1 for the mean and the
    /// Nyquist mode, 2 otherwise.
    pub fn mode_weight(&self, m: usize) -> f64 {
        if m == 0 || m == self.n_modes() - 1 {
            1.0
        } else {
            2.0
        }
    }

    pub fn forward(&self, field: &[f64]) -> Spectrum {
        assert_eq!(field.len(), self.grid.n_points(), "field length does not match grid");
        let mut input = field.to_vec();
        let mut output = self.forward.make_output_vec();
        self.forward
            .process(&mut input, &mut output)
            .expect("forward transform buffers sized by the plan");
        output
    }

    /// Inverse transform with `1/N` normalisation. Imaginary parts of the mean
    /// and Nyquist coefficients are discarded.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.n_modes(), "spectrum length does not match grid");
        let mut input = spectrum.to_vec();
        let last = input.len() - 1;
        input[0].im = 0.0;
        input[last].im = 0.0;
        let mut output = self.inverse.make_output_vec();
        self.inverse
            .process(&mut input, &mut output)
            .expect("inverse transform buffers sized by the plan");
        let scale = 1.0 / self.grid.n_points() as f64;
        output.iter_mut().for_each(|x| *x *= scale);
        output
    }

    /// Multiplies every mode by `(i k_m)^order`. For odd orders the Nyquist
    /// mode is zeroed since its derivative is not representable on the grid.
    pub fn derivative_spectrum(&self, spectrum: &[Complex64], order: u32) -> Spectrum {
        let mut out: Spectrum = spectrum
            .iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| c * ik_power(k, order))
            .collect();
        if order % 2 == 1 {
            let last = out.len() - 1;
            out[last] = Complex64::new(0.0, 0.0);
        }
        out
    }

    pub fn derivative(&self, field: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return field.to_vec();
        }
        self.inverse(&self.derivative_spectrum(&self.forward(field), order))
    }

    /// Shifts a field to the right by `shift`: `f(x) -> f(x - shift)`.
    pub fn translate(&self, field: &[f64], shift: f64) -> Vec<f64> {
        let spectrum = self.forward(field);
        self.inverse(&self.translate_spectrum(&spectrum, shift))
    }

    pub fn translate_spectrum(&self, spectrum: &[Complex64], shift: f64) -> Spectrum {
        let mut out: Spectrum = spectrum
            .iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| c * Complex64::from_polar(1.0, -k * shift))
            .collect();
        // The Nyquist mode can only carry a cosine; keep its real projection.
        let last = out.len() - 1;
        out[last].im = 0.0;
        out
    }

    /// Rectangle rule `h * sum_j f_j`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.grid.spacing() * field.iter().sum::<f64>()
    }

    /// `integral of f^2` evaluated from the spectrum (Parseval).
    pub fn spectral_energy(&self, spectrum: &[Complex64]) -> f64 {
        let n = self.grid.n_points() as f64;
        let sum: f64 = spectrum
            .iter()
            .enumerate()
            .map(|(m, c)| self.mode_weight(m) * c.norm_sqr())
            .sum();
        self.grid.length() * sum / (n * n)
    }

    /// Zeroes modes above `2/3` of the Nyquist wavenumber.
    pub fn dealias(&self, spectrum: &mut [Complex64]) {
        let cutoff = (self.grid.n_points() / 3).max(1);
        for c in spectrum.iter_mut().skip(cutoff + 1) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}
