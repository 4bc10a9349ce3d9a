//! Cosine collocation with Newton iteration for general nonlinearities.
//!
//! Even solutions about `x = l` on `[0, 2l]` are expanded as
//!
//! ```text
//! psi(x) = sum_{k=0}^{N/2} psi_k cos(k pi x / l),   v(x) = sum_{k=0}^{N/2} v_k cos(k pi x / l)
//! ```
//!
//! and both steady equations are imposed at `x_j = 2 l (j - 1) / N`,
//! `j = 1..=N/2 + 1`, giving a square system of `N + 2` equations. The
//! residual is evaluated through the even extension on the uniform grid of
//! `N` points, so one residual costs a handful of real FFTs.
//!
//! Unknowns are ordered `[psi_0..psi_{N/2}, v_0..v_{N/2}]`; residual rows are
//! `[R1(x_1)..R1(x_{N/2+1}), R2(x_1)..R2(x_{N/2+1})]`.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{eval_all, residual_from, ProfileDerivatives};
use crate::model::{Gaussian, Grid, ModelParams};
use crate::nonlinearity::Nonlinearity;
use crate::profile::{max_norm, WaveProfile};
use crate::report::{IterationRecord, SolveReport, Termination};
use crate::spectral::Spectral;

/// Cosine coefficients of `psi` and `v` on `[0, 2l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExpansion")]
pub struct CosineExpansion {
    #[serde(rename = "l")]
    half_length: f64,
    #[serde(rename = "psi_coeffs")]
    psi: Vec<f64>,
    #[serde(rename = "v_coeffs")]
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct RawExpansion {
    l: f64,
    psi_coeffs: Vec<f64>,
    v_coeffs: Vec<f64>,
}

impl TryFrom<RawExpansion> for CosineExpansion {
    type Error = Error;

    fn try_from(raw: RawExpansion) -> Result<Self> {
        Self::new(raw.l, raw.psi_coeffs, raw.v_coeffs)
    }
}

impl CosineExpansion {
    /// Coefficient vectors must both have `N/2 + 1` entries with `N` a power
    /// of two.
    pub fn new(half_length: f64, psi: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if psi.len() != v.len() {
            return Err(Error::GridMismatch(format!(
                "coefficient counts differ: {} vs {}",
                psi.len(),
                v.len()
            )));
        }
        if psi.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 cosine modes, got {}",
                psi.len()
            )));
        }
        Grid::new(2.0 * half_length, 2 * (psi.len() - 1))?;
        if psi.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::DegenerateState("non-finite cosine coefficient".into()));
        }
        Ok(Self { half_length, psi, v })
    }

    pub fn zeros(half_length: f64, n_points: usize) -> Result<Self> {
        let m = n_points / 2 + 1;
        Self::new(half_length, vec![0.0; m], vec![0.0; m])
    }

    /// Projects Gaussian guesses centred at `l` onto the basis by
    /// interpolation at the collocation points.
    pub fn from_gaussians(half_length: f64, n_points: usize, psi: Gaussian, v: Gaussian) -> Result<Self> {
        for g in [&psi, &v] {
            if (g.center - half_length).abs() > 1e-12 * half_length.max(1.0) {
                return Err(Error::OffCenterProfile {
                    center: g.center,
                    half_length,
                });
            }
        }
        let grid = Grid::new(2.0 * half_length, n_points)?;
        let x = collocation_points(half_length, n_points);
        let sp = Spectral::new(grid);
        let psi_s: Vec<f64> = x.iter().map(|&x| psi.eval(x)).collect();
        let v_s: Vec<f64> = x.iter().map(|&x| v.eval(x)).collect();
        Self::new(half_length, cosine_transform(&sp, &psi_s), cosine_transform(&sp, &v_s))
    }

    /// Interpolates an existing profile whose grid spans `[0, 2l)`. The
    /// profile must be even about `l` to round-off.
    pub fn from_profile(w: &WaveProfile) -> Result<Self> {
        let grid = *w.grid();
        let n = grid.n_points();
        let scale = w.max_norm().max(f64::MIN_POSITIVE);
        let asym = (1..n)
            .map(|j| (w.psi()[j] - w.psi()[n - j]).abs().max((w.v()[j] - w.v()[n - j]).abs()))
            .fold(0.0, f64::max);
        if asym > 1e-8 * scale {
            return Err(Error::DegenerateState(format!(
                "profile is not even about the midpoint (asymmetry {asym:e})"
            )));
        }
        let sp = Spectral::new(grid);
        let m = n / 2 + 1;
        Self::new(
            grid.length() / 2.0,
            cosine_transform(&sp, &w.psi()[..m]),
            cosine_transform(&sp, &w.v()[..m]),
        )
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn psi_coeffs(&self) -> &[f64] {
        &self.psi
    }

    pub fn v_coeffs(&self) -> &[f64] {
        &self.v
    }

    pub fn n_modes(&self) -> usize {
        self.psi.len()
    }

    /// Number of uniform grid points `N` on `[0, 2l)`.
    pub fn n_points(&self) -> usize {
        2 * (self.psi.len() - 1)
    }

    pub fn grid(&self) -> Grid {
        Grid::new(2.0 * self.half_length, self.n_points()).expect("validated on construction")
    }

    /// `[psi_0.., v_0..]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.psi.iter().chain(&self.v).copied().collect()
    }

    pub fn from_flat(half_length: f64, flat: &[f64]) -> Result<Self> {
        let m = flat.len() / 2;
        Self::new(half_length, flat[..m].to_vec(), flat[m..].to_vec())
    }

    pub fn max_coeff(&self) -> f64 {
        max_norm(&self.psi).max(max_norm(&self.v))
    }

    /// Samples on the uniform grid of `N` points covering `[0, 2l)`.
    pub fn to_profile(&self) -> WaveProfile {
        let grid = self.grid();
        let sp = Spectral::new(grid);
        WaveProfile::new(
            grid,
            sp.inverse(&half_spectrum(&self.psi)),
            sp.inverse(&half_spectrum(&self.v)),
        )
        .expect("finite coefficients give finite samples")
    }

    /// Resamples onto another uniform grid over `[0, 2l)` by direct summation
    /// of the series.
    pub fn resample(&self, n_points: usize) -> Result<WaveProfile> {
        let grid = Grid::new(2.0 * self.half_length, n_points)?;
        let (psi, v) = grid.points().iter().map(|&x| evaluate_expansion(self, x, 0)).unzip();
        WaveProfile::new(grid, psi, v)
    }
}

/// `x_j = 2 l (j - 1) / N` for `j = 1..=N/2 + 1`, covering `[0, l]`.
pub fn collocation_points(half_length: f64, n_points: usize) -> Vec<f64> {
    (0..=n_points / 2)
        .map(|j| 2.0 * half_length * j as f64 / n_points as f64)
        .collect()
}

/// Direct summation of the `order`-th derivative of both series at `x`.
pub fn evaluate_expansion(e: &CosineExpansion, x: f64, order: u32) -> (f64, f64) {
    let mut psi = 0.0;
    let mut v = 0.0;
    for k in 0..e.n_modes() {
        let kappa = k as f64 * PI / e.half_length;
        let phase = kappa * x;
        let basis = kappa.powi(order as i32)
            * match order % 4 {
                0 => phase.cos(),
                1 => -phase.sin(),
                2 => -phase.cos(),
                _ => phase.sin(),
            };
        psi += e.psi[k] * basis;
        v += e.v[k] * basis;
    }
    (psi, v)
}

/// Half spectrum of the even extension whose samples equal the cosine series.
fn half_spectrum(coeffs: &[f64]) -> Vec<Complex64> {
    let m = coeffs.len();
    let n = 2.0 * (m - 1) as f64;
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let w = if k == 0 || k == m - 1 { n } else { n / 2.0 };
            Complex64::new(w * c, 0.0)
        })
        .collect()
}

/// Cosine coefficients interpolating `samples` at the collocation points.
fn cosine_transform(sp: &Spectral, samples: &[f64]) -> Vec<f64> {
    let n = sp.grid().n_points();
    let m = n / 2 + 1;
    let full: Vec<f64> = (0..n).map(|j| samples[if j < m { j } else { n - j }]).collect();
    let spec = sp.forward(&full);
    spec.iter()
        .enumerate()
        .map(|(k, c)| {
            let w = if k == 0 || k == m - 1 { 1.0 } else { 2.0 };
            w * c.re / n as f64
        })
        .collect()
}

/// Residual and Jacobian evaluation for one problem size.
pub struct CollocationSystem<'a> {
    half_length: f64,
    params: &'a ModelParams,
    nl: &'a Nonlinearity,
    sp: Spectral,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl<'a> CollocationSystem<'a> {
    pub fn new(half_length: f64, n_points: usize, params: &'a ModelParams, nl: &'a Nonlinearity) -> Result<Self> {
        params.validate()?;
        let grid = Grid::new(2.0 * half_length, n_points)?;
        let mut cos_table = Vec::with_capacity(n_points);
        let mut sin_table = Vec::with_capacity(n_points);
        for m in 0..n_points {
            let (s, c) = (2.0 * PI * m as f64 / n_points as f64).sin_cos();
            cos_table.push(c);
            sin_table.push(s);
        }
        // Exact values where the series only sees them at grid symmetry points.
        sin_table[0] = 0.0;
        sin_table[n_points / 2] = 0.0;
        cos_table[n_points / 4] = 0.0;
        cos_table[3 * n_points / 4] = 0.0;
        Ok(Self {
            half_length,
            params,
            nl,
            sp: Spectral::new(grid),
            cos_table,
            sin_table,
        })
    }

    pub fn n_unknowns(&self) -> usize {
        self.sp.grid().n_points() + 2
    }

    fn derivatives(&self, flat: &[f64]) -> ProfileDerivatives {
        let m = self.n_unknowns() / 2;
        let psi_hat = half_spectrum(&flat[..m]);
        let v_hat = half_spectrum(&flat[m..]);
        let d = |spec: &[Complex64], order: u32| {
            let mut f = if order == 0 {
                self.sp.inverse(spec)
            } else {
                self.sp.inverse(&self.sp.derivative_spectrum(spec, order))
            };
            f.truncate(m);
            f
        };
        ProfileDerivatives {
            psi: d(&psi_hat, 0),
            psi_x: d(&psi_hat, 1),
            psi_xx: d(&psi_hat, 2),
            psi_xxxx: d(&psi_hat, 4),
            v: d(&v_hat, 0),
            v_x: d(&v_hat, 1),
            v_xx: d(&v_hat, 2),
            v_xxxx: d(&v_hat, 4),
        }
    }

    /// Residual of both equations at the collocation points.
    pub fn residual(&self, flat: &[f64]) -> Vec<f64> {
        assert_eq!(flat.len(), self.n_unknowns(), "coefficient vector has wrong length");
        let (mut r1, r2) = residual_from(&self.derivatives(flat), self.params, self.nl);
        r1.extend(r2);
        r1
    }

    /// Central-difference Jacobian, column-major, with step
    /// `h_j = fd_step * max(1, |c_j|)`.
    pub fn jacobian_fd(&self, flat: &[f64], fd_step: f64) -> Vec<f64> {
        let n = self.n_unknowns();
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let h = fd_step * flat[j].abs().max(1.0);
                let mut x = flat.to_vec();
                x[j] = flat[j] + h;
                let plus = self.residual(&x);
                x[j] = flat[j] - h;
                let minus = self.residual(&x);
                plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect()
            })
            .collect();
        columns.concat()
    }

    /// Analytic Jacobian, column-major: linear symbols times the cosine basis
    /// minus the slot gradients of `H1`, `H2` times the basis derivatives.
    pub fn jacobian_analytic(&self, flat: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_unknowns();
        let m = n / 2;
        let n_pts = n - 2;
        let p = self.params;
        let slots = self.derivatives(flat).slots();
        let grads = (0..m)
            .map(|j| self.nl.h_gradient(&slots.at(j)))
            .collect::<Result<Vec<_>>>()?;
        let mut jac = vec![0.0; n * n];
        for k in 0..m {
            let kappa = k as f64 * PI / self.half_length;
            let k2 = kappa * kappa;
            let k4 = k2 * k2;
            // Symbols of the linear operators acting on cos(kappa x).
            let psi_eq1 = 1.0 - p.c * k2 + p.c2 * k4;
            let v_eq1 = -p.omega * (1.0 + p.d * k2 + p.d2 * k4);
            let psi_eq2 = -p.omega * (1.0 + p.b * k2 + p.b2 * k4);
            let v_eq2 = 1.0 - p.a * k2 + p.a2 * k4;
            let (col_psi, rest) = jac[k * n..].split_at_mut(n);
            let col_v = &mut rest[(m - 1) * n..m * n];
            for (j, (g1, g2)) in grads.iter().enumerate() {
                let idx = (k * j) % n_pts;
                let c = self.cos_table[idx];
                let s = self.sin_table[idx];
                let basis = [c, -kappa * s, -k2 * c];
                let dot = |g: &[f64]| g[0] * basis[0] + g[1] * basis[1] + g[2] * basis[2];
                col_psi[j] = psi_eq1 * c - dot(&g1[..3]);
                col_psi[m + j] = psi_eq2 * c - dot(&g2[..3]);
                col_v[j] = v_eq1 * c - dot(&g1[3..]);
                col_v[m + j] = v_eq2 * c - dot(&g2[3..]);
            }
        }
        Ok(jac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    FiniteDifference,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    None,
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    /// Bound on both the relative step and the residual max-norm.
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian_mode: JacobianMode,
    pub fd_step: f64,
    pub damping: Damping,
    pub max_halvings: u32,
    /// Coefficient max-norm below which a converged state counts as trivial.
    pub collapse_threshold: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            jacobian_mode: JacobianMode::FiniteDifference,
            fd_step: 1e-7,
            damping: Damping::Backtracking,
            max_halvings: 20,
            collapse_threshold: 1e-8,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.fd_step.is_nan() || self.fd_step <= 0.0 {
            return Err(Error::Config("newton tol and fd_step must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("newton max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Solves `J x = rhs` by LU with partial pivoting. Fails when the ratio of
/// extreme pivots signals a numerically singular matrix.
fn lu_solve(jac: &[f64], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = rhs.len();
    let a = MatRef::from_column_major_slice(jac, n, n);
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = u[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !condition.is_finite() || condition > 1e15 {
        return Err(Error::SingularJacobian { condition });
    }
    let mut x = Mat::from_fn(n, 1, |i, _| rhs[i]);
    lu.solve_in_place(x.as_mut());
    let x: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularJacobian { condition });
    }
    Ok((x, condition))
}

fn l2_norm(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton iteration on the collocation system. Backtracking halves
/// the step until the Euclidean residual norm decreases; convergence is
/// judged in the max-norm.
pub fn newton_solve(
    initial: &CosineExpansion,
    params: &ModelParams,
    nl: &Nonlinearity,
    cfg: &NewtonConfig,
) -> Result<(CosineExpansion, SolveReport)> {
    cfg.validate()?;
    let l = initial.half_length();
    let sys = CollocationSystem::new(l, initial.n_points(), params, nl)?;
    let mut c = initial.to_flat();
    let mut r = sys.residual(&c);
    let mut r_norm = max_norm(&r);
    let mut merit = l2_norm(&r);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iter {
        iterations = it;
        let jac = match cfg.jacobian_mode {
            JacobianMode::FiniteDifference => sys.jacobian_fd(&c, cfg.fd_step),
            JacobianMode::Analytic => sys.jacobian_analytic(&c)?,
        };
        let (delta, _condition) = lu_solve(&jac, &r)?;
        let try_step = |lambda: f64| {
            let trial: Vec<f64> = c.iter().zip(&delta).map(|(x, d)| x - lambda * d).collect();
            let r = sys.residual(&trial);
            let merit = l2_norm(&r);
            (trial, r, merit)
        };
        let mut lambda = 1.0;
        let mut halvings = 0;
        let mut attempt = try_step(lambda);
        if cfg.damping == Damping::Backtracking && r_norm >= cfg.tol {
            // Exhausted halvings keep the shortest step tried.
            while attempt.2.partial_cmp(&merit) != Some(std::cmp::Ordering::Less) && halvings < cfg.max_halvings {
                lambda *= 0.5;
                halvings += 1;
                attempt = try_step(lambda);
            }
        }
        let (trial, trial_r, trial_merit) = attempt;
        if !trial_merit.is_finite() {
            return Err(Error::DegenerateState(format!(
                "newton step produced a non-finite residual at iteration {it}"
            )));
        }
        let trial_norm = max_norm(&trial_r);
        let step = lambda * max_norm(&delta);
        let rel = step / max_norm(&trial).max(1e-14);
        c = trial;
        r = trial_r;
        r_norm = trial_norm;
        merit = trial_merit;
        history.push(IterationRecord {
            iteration: it,
            rel_change: rel,
            residual_inf: r_norm,
            m_s: None,
            n_s: None,
            step_norm: Some(step),
            halvings: Some(halvings),
        });
        log::debug!("newton {it}: step {step:.3e} rel {rel:.3e} residual {r_norm:.3e} halvings {halvings}");
        if (rel < cfg.tol || step < cfg.tol) && r_norm < cfg.tol {
            converged = true;
            break;
        }
    }
    let solution = CosineExpansion::from_flat(l, &c)?;
    let termination = if !converged {
        Termination::MaxIter
    } else if solution.max_coeff() < cfg.collapse_threshold {
        Termination::CollapsedToZero
    } else {
        Termination::Converged
    };
    let profile = solution.to_profile();
    let final_report = eval_all(&Spectral::new(*profile.grid()), &profile, params, nl).ok();
    let mut warnings = Vec::new();
    if let Some(w) = params.regime_warning() {
        warnings.push(w);
    }
    let report = SolveReport {
        iterations,
        converged: termination == Termination::Converged,
        termination,
        history,
        final_report,
        sign_degenerate: false,
        warnings,
    };
    Ok((solution, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic_params() -> ModelParams {
        ModelParams::new(-2.0, 2.0, -2.0, 2.0, 3.0, 3.0, 3.0, 3.0, 0.6).unwrap()
    }

    fn sample_expansion(n: usize) -> CosineExpansion {
        let m = n / 2 + 1;
        let psi = (0..m).map(|k| 0.7 * (-0.4 * k as f64).exp()).collect();
        let v = (0..m)
            .map(|k| -0.3 * (-0.5 * k as f64).exp() * (k as f64).cos())
            .collect();
        CosineExpansion::new(5.0, psi, v).unwrap()
    }

    #[test]
    fn points_cover_half_domain() {
        let x = collocation_points(10.0, 8);
        assert_eq!(x.len(), 5);
        assert_eq!(x[0], 0.0);
        assert!((x[4] - 10.0).abs() < 1e-15);
        assert!((x[1] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn fft_evaluation_matches_direct_sum() {
        let e = sample_expansion(16);
        let w = e.to_profile();
        for (j, x) in w.grid().points().into_iter().enumerate() {
            let (psi, v) = evaluate_expansion(&e, x, 0);
            assert!((psi - w.psi()[j]).abs() < 1e-13);
            assert!((v - w.v()[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_round_trip() {
        let e = sample_expansion(32);
        let back = CosineExpansion::from_profile(&e.to_profile()).unwrap();
        for (a, b) in e.to_flat().iter().zip(back.to_flat()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn off_center_rejected() {
        let g = Gaussian {
            center: 40.0,
            width: 0.05,
            amplitude: 1.0,
        };
        let err = CosineExpansion::from_gaussians(50.0, 64, g, g).unwrap_err();
        assert!(matches!(err, Error::OffCenterProfile { .. }));
    }

    #[test]
    fn asymmetric_profile_rejected() {
        let g = Grid::new(10.0, 16).unwrap();
        let w = WaveProfile::new(g, g.sample(|x| x.sin()), vec![0.0; 16]).unwrap();
        assert!(CosineExpansion::from_profile(&w).is_err());
    }

    #[test]
    fn json_round_trip() {
        let e = sample_expansion(8);
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("\"l\"") && text.contains("psi_coeffs") && text.contains("v_coeffs"));
        let back: CosineExpansion = serde_json::from_str(&text).unwrap();
        assert_eq!(e, back);
        assert!(serde_json::from_str::<CosineExpansion>(r#"{"l":1.0,"psi_coeffs":[1,2,3],"v_coeffs":[1,2]}"#).is_err());
    }

    #[test]
    fn residual_of_linear_mode_is_its_symbol() {
        // With zero nonlinearity contribution at O(eps), a single small cosine
        // mode gives residual ~ eps * symbol * cos.
        let p = quartic_params();
        let nl = Nonlinearity::QuarticVariational;
        let sys = CollocationSystem::new(5.0, 16, &p, &nl).unwrap();
        let eps = 1e-9;
        let mut flat = vec![0.0; 18];
        flat[2] = eps;
        let r = sys.residual(&flat);
        let kappa = 2.0 * PI / 5.0;
        let (k2, k4) = (kappa * kappa, kappa.powi(4));
        let x = collocation_points(5.0, 16);
        for j in 0..9 {
            let c = (kappa * x[j]).cos();
            assert!((r[j] - eps * (1.0 - p.c * k2 + p.c2 * k4) * c).abs() < 1e-15);
            assert!((r[9 + j] + eps * p.omega * (1.0 + p.b * k2 + p.b2 * k4) * c).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let p = quartic_params();
        let nl = Nonlinearity::QuarticVariational;
        let sys = CollocationSystem::new(5.0, 16, &p, &nl).unwrap();
        let flat = sample_expansion(16).to_flat();
        let ja = sys.jacobian_analytic(&flat).unwrap();
        let jf = sys.jacobian_fd(&flat, 1e-6);
        let scale = max_norm(&ja);
        for (a, f) in ja.iter().zip(&jf) {
            assert!((a - f).abs() <= 1e-6 * scale.max(1.0), "{a} vs {f}");
        }
    }

    #[test]
    fn zero_guess_collapses_immediately() {
        let p = quartic_params();
        let nl = Nonlinearity::QuarticVariational;
        let e = CosineExpansion::zeros(10.0, 16).unwrap();
        let (sol, rep) = newton_solve(&e, &p, &nl, &NewtonConfig::default()).unwrap();
        assert_eq!(rep.termination, Termination::CollapsedToZero);
        assert_eq!(rep.iterations, 1);
        assert_eq!(sol.max_coeff(), 0.0);
    }
}
