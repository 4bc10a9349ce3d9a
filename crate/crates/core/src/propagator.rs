//! Theta-scheme spectral time stepper for the evolution system
//!
//! ```text
//! (1 - d u_xx + d2 u_xxxx)_t   = -(eta + c eta_xx + c2 eta_xxxx)_x + (H1)_x
//! (1 - b eta_xx + b2 eta_xxxx)_t = -(u + a u_xx + a2 u_xxxx)_x + (H2)_x
//! ```
//!
//! Per mode this is `u_hat' = W1 eta_hat + L1`, `eta_hat' = W2 u_hat + L2`.
//! The linear coupling is treated with the theta rule and the nonlinear
//! terms explicitly at the old time level. States are [`WaveProfile`]s with
//! `psi` carrying `eta` and `v` carrying `u`, so a steady solution
//! `(psi, v)` is also a valid initial state; it should move right with
//! speed `omega`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Grid, ModelParams};
use crate::nonlinearity::{Nonlinearity, SlotFields};
use crate::profile::{max_norm, WaveProfile};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub dt: f64,
    pub t_final: f64,
    pub theta: f64,
    /// Keep every `snapshot_stride`-th state; 0 keeps only the endpoints.
    pub snapshot_stride: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 10.0,
            theta: 0.5,
            snapshot_stride: 0,
        }
    }
}

impl PropagationConfig {
    /// Number of steps; `t_final / dt` must be an integer up to round-off.
    pub fn n_steps(&self) -> Result<usize> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(Error::Config(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-8 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "t_final = {} is not an integer multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Per-mode symbols over the half spectrum. `W1`, `W2` vanish at the mean
/// and at the Nyquist mode, where an odd derivative is not representable.
#[derive(Debug, Clone)]
pub struct EvolutionSymbols {
    pub k: Vec<f64>,
    pub w1: Vec<Complex64>,
    pub w2: Vec<Complex64>,
    /// `ik / (1 + d k^2 + d2 k^4)`, multiplies `H1_hat`.
    pub l1: Vec<Complex64>,
    /// `ik / (1 + b k^2 + b2 k^4)`, multiplies `H2_hat`.
    pub l2: Vec<Complex64>,
}

/// Builds the symbols and checks that `1 - dt^2 W1 W2 theta^2` stays away
/// from zero at every mode.
pub fn build_symbols(grid: &Grid, params: &ModelParams, cfg: &PropagationConfig) -> Result<EvolutionSymbols> {
    params.validate()?;
    cfg.n_steps()?;
    let k = crate::spectral::wavenumbers(grid);
    let p = params;
    let nyquist = k.len() - 1;
    let mut s = EvolutionSymbols {
        k: k.clone(),
        w1: Vec::with_capacity(k.len()),
        w2: Vec::with_capacity(k.len()),
        l1: Vec::with_capacity(k.len()),
        l2: Vec::with_capacity(k.len()),
    };
    for (m, &kk) in k.iter().enumerate() {
        let (k2, k3, k5) = (kk * kk, kk.powi(3), kk.powi(5));
        let den1 = 1.0 + p.d * k2 + p.d2 * k2 * k2;
        let den2 = 1.0 + p.b * k2 + p.b2 * k2 * k2;
        let odd = if m == nyquist { 0.0 } else { 1.0 };
        let w1 = Complex64::new(0.0, odd * (-kk + p.c * k3 - p.c2 * k5) / den1);
        let w2 = Complex64::new(0.0, odd * (-kk + p.a * k3 - p.a2 * k5) / den2);
        let den = 1.0 - cfg.dt * cfg.dt * cfg.theta * cfg.theta * (w1 * w2).re;
        if den.abs() < 1e-12 || !den.is_finite() {
            return Err(Error::StabilityConfiguration {
                mode: m,
                wavenumber: kk,
            });
        }
        s.w1.push(w1);
        s.w2.push(w2);
        s.l1.push(Complex64::new(0.0, odd * kk / den1));
        s.l2.push(Complex64::new(0.0, odd * kk / den2));
    }
    Ok(s)
}

/// One configured stepper: symbols folded into per-mode update weights.
pub struct Stepper<'a> {
    sp: Spectral,
    nl: &'a Nonlinearity,
    symbols: EvolutionSymbols,
    dt: f64,
    theta: f64,
    // u_hat' = a u_hat + b eta_hat + c L2 + e L1
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    e: Vec<Complex64>,
}

/// Spectra of `u` and `eta`.
#[derive(Debug, Clone)]
struct SpectralState {
    u: Vec<Complex64>,
    eta: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &Grid, params: &ModelParams, nl: &'a Nonlinearity, cfg: &PropagationConfig) -> Result<Self> {
        let symbols = build_symbols(grid, params, cfg)?;
        let (dt, th) = (cfg.dt, cfg.theta);
        let n = symbols.k.len();
        let (mut a, mut b, mut c, mut e) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for (w1, w2) in symbols.w1.iter().zip(&symbols.w2) {
            let ww = w1 * w2;
            let den = 1.0 - dt * dt * th * th * ww;
            a.push((1.0 + dt * dt * th * (1.0 - th) * ww) / den);
            b.push(dt * w1 / den);
            c.push(dt * dt * th * w1 / den);
            e.push(Complex64::new(dt, 0.0) / den);
        }
        Ok(Self {
            sp: Spectral::new(*grid),
            nl,
            symbols,
            dt,
            theta: th,
            a,
            b,
            c,
            e,
        })
    }

    pub fn symbols(&self) -> &EvolutionSymbols {
        &self.symbols
    }

    /// Physical `(u, eta)` and the nonlinear spectra `(L1, L2)`.
    fn nonlinear(&self, s: &SpectralState) -> (Vec<f64>, Vec<f64>, Vec<Complex64>, Vec<Complex64>) {
        let u = self.sp.inverse(&s.u);
        let eta = self.sp.inverse(&s.eta);
        let mut fields = SlotFields {
            eta,
            u,
            ..Default::default()
        };
        if self.nl.uses_derivatives() {
            let d = |spec: &[Complex64], order| self.sp.inverse(&self.sp.derivative_spectrum(spec, order));
            fields.eta_x = d(&s.eta, 1);
            fields.eta_xx = d(&s.eta, 2);
            fields.u_x = d(&s.u, 1);
            fields.u_xx = d(&s.u, 2);
        }
        let (h1, h2) = self.nl.evaluate(&fields);
        let l1 = self
            .sp
            .forward(&h1)
            .iter()
            .zip(&self.symbols.l1)
            .map(|(h, s)| h * s)
            .collect();
        let l2 = self
            .sp
            .forward(&h2)
            .iter()
            .zip(&self.symbols.l2)
            .map(|(h, s)| h * s)
            .collect();
        (fields.u, fields.eta, l1, l2)
    }

    fn advance(&self, s: &SpectralState, l1: &[Complex64], l2: &[Complex64]) -> SpectralState {
        let (dt, th) = (self.dt, self.theta);
        let n = s.u.len();
        let mut u = Vec::with_capacity(n);
        let mut eta = Vec::with_capacity(n);
        for m in 0..n {
            let un = self.a[m] * s.u[m] + self.b[m] * s.eta[m] + self.c[m] * l2[m] + self.e[m] * l1[m];
            let w2 = self.symbols.w2[m];
            let en = s.eta[m] + dt * th * w2 * un + dt * (1.0 - th) * w2 * s.u[m] + dt * l2[m];
            u.push(un);
            eta.push(en);
        }
        SpectralState { u, eta }
    }

    fn to_spectral(&self, state: &WaveProfile) -> Result<SpectralState> {
        if state.grid() != self.sp.grid() {
            return Err(Error::GridMismatch("state grid differs from the stepper grid".into()));
        }
        Ok(SpectralState {
            u: self.sp.forward(state.v()),
            eta: self.sp.forward(state.psi()),
        })
    }

    fn to_profile(&self, s: &SpectralState, step: usize) -> Result<WaveProfile> {
        WaveProfile::new(*self.sp.grid(), self.sp.inverse(&s.eta), self.sp.inverse(&s.u))
            .map_err(|_| Error::BlowUp { step })
    }

    /// One step from `state`.
    pub fn step(&self, state: &WaveProfile) -> Result<WaveProfile> {
        let s = self.to_spectral(state)?;
        let (_, _, l1, l2) = self.nonlinear(&s);
        self.to_profile(&self.advance(&s, &l1, &l2), 1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub state: WaveProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostic {
    pub step: usize,
    pub time: f64,
    pub u_max: f64,
    pub eta_max: f64,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub final_state: WaveProfile,
    pub snapshots: Vec<Snapshot>,
    /// Max-norms at every time level including the last.
    pub diagnostics: Vec<StepDiagnostic>,
}

pub fn propagate(
    initial: &WaveProfile,
    params: &ModelParams,
    nl: &Nonlinearity,
    cfg: &PropagationConfig,
) -> Result<Propagation> {
    let steps = cfg.n_steps()?;
    let stepper = Stepper::new(initial.grid(), params, nl, cfg)?;
    let mut s = stepper.to_spectral(initial)?;
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        state: initial.clone(),
    }];
    let mut diagnostics = Vec::with_capacity(steps + 1);
    for n in 0..steps {
        let (u, eta, l1, l2) = stepper.nonlinear(&s);
        diagnostics.push(StepDiagnostic {
            step: n,
            time: n as f64 * cfg.dt,
            u_max: max_norm(&u),
            eta_max: max_norm(&eta),
        });
        s = stepper.advance(&s, &l1, &l2);
        if s.u.iter().chain(&s.eta).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            if let Some(last) = diagnostics.last() {
                log::warn!(
                    "blow-up at step {}: last max-norms u {:e}, eta {:e}",
                    n + 1,
                    last.u_max,
                    last.eta_max
                );
            }
            return Err(Error::BlowUp { step: n + 1 });
        }
        let done = n + 1;
        if cfg.snapshot_stride > 0 && done % cfg.snapshot_stride == 0 && done != steps {
            snapshots.push(Snapshot {
                step: done,
                time: done as f64 * cfg.dt,
                state: stepper.to_profile(&s, done)?,
            });
        }
    }
    let final_state = if steps == 0 {
        initial.clone()
    } else {
        stepper.to_profile(&s, steps)?
    };
    diagnostics.push(StepDiagnostic {
        step: steps,
        time: steps as f64 * cfg.dt,
        u_max: final_state.v_max_norm(),
        eta_max: final_state.psi_max_norm(),
    });
    if steps > 0 {
        snapshots.push(Snapshot {
            step: steps,
            time: steps as f64 * cfg.dt,
            state: final_state.clone(),
        });
    }
    Ok(Propagation {
        final_state,
        snapshots,
        diagnostics,
    })
}

/// Relative errors of `computed` against `reference` shifted right by
/// `omega * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationError {
    pub err_inf_u: f64,
    pub err_inf_eta: f64,
    pub err_l2_u: f64,
    pub err_l2_eta: f64,
}

impl TranslationError {
    pub fn max_l2(&self) -> f64 {
        self.err_l2_u.max(self.err_l2_eta)
    }
}

pub fn verify_translation(
    computed: &WaveProfile,
    reference: &WaveProfile,
    omega: f64,
    t: f64,
) -> Result<TranslationError> {
    if computed.grid() != reference.grid() {
        return Err(Error::GridMismatch("computed and reference grids differ".into()));
    }
    let sp = Spectral::new(*reference.grid());
    let shift = omega * t;
    let u_ref = sp.translate(reference.v(), shift);
    let eta_ref = sp.translate(reference.psi(), shift);
    let rel = |a: &[f64], b: &[f64], l2: bool| {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let (num, den) = if l2 {
            (l2_sum(&diff), l2_sum(b))
        } else {
            (max_norm(&diff), max_norm(b))
        };
        if den > 0.0 {
            num / den
        } else {
            num
        }
    };
    Ok(TranslationError {
        err_inf_u: rel(computed.v(), &u_ref, false),
        err_inf_eta: rel(computed.psi(), &eta_ref, false),
        err_l2_u: rel(computed.v(), &u_ref, true),
        err_l2_eta: rel(computed.psi(), &eta_ref, true),
    })
}

fn l2_sum(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ModelParams {
        ModelParams::new(-2.0, 2.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, 0.8).unwrap()
    }

    fn cfg(dt: f64, t_final: f64, theta: f64) -> PropagationConfig {
        PropagationConfig {
            dt,
            t_final,
            theta,
            snapshot_stride: 0,
        }
    }

    #[test]
    fn symbols_are_imaginary_and_vanish_at_zero() {
        let g = Grid::new(200.0, 256).unwrap();
        let s = build_symbols(&g, &fig1(), &PropagationConfig::default()).unwrap();
        assert_eq!(s.w1[0], Complex64::new(0.0, 0.0));
        assert_eq!(s.w2[0], Complex64::new(0.0, 0.0));
        assert!(s.w1.iter().chain(&s.w2).chain(&s.l1).chain(&s.l2).all(|w| w.re == 0.0));
    }

    #[test]
    fn first_mode_symbol() {
        let g = Grid::new(200.0, 4096).unwrap();
        let s = build_symbols(&g, &fig1(), &PropagationConfig::default()).unwrap();
        let k = std::f64::consts::PI / 100.0;
        // W1 = -ik (1 - c k^2 + c2 k^4) / (1 + d k^2 + d2 k^4) with c = -2, c2 = 20, d = 2, d2 = 5.
        let expect = -k * (1.0 + 2.0 * k * k + 20.0 * k.powi(4)) / (1.0 + 2.0 * k * k + 5.0 * k.powi(4));
        assert!((s.w1[1].im - expect).abs() < 1e-14);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(cfg(0.0, 1.0, 0.5).n_steps().is_err());
        assert!(cfg(0.3, 1.0, 0.5).n_steps().is_err());
        assert!(cfg(0.1, 1.0, 1.5).n_steps().is_err());
        assert_eq!(cfg(0.001, 10.0, 0.5).n_steps().unwrap(), 10000);
        assert_eq!(cfg(0.1, 0.0, 0.5).n_steps().unwrap(), 0);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid::new(50.0, 64).unwrap();
        let nl = Nonlinearity::power(2).unwrap();
        let out = propagate(&WaveProfile::zeros(g), &fig1(), &nl, &cfg(0.01, 1.0, 0.5)).unwrap();
        assert_eq!(out.final_state.max_norm(), 0.0);
        assert_eq!(out.diagnostics.len(), 101);
    }

    #[test]
    fn zero_duration_returns_initial() {
        let g = Grid::new(50.0, 64).unwrap();
        let w = WaveProfile::new(g, g.sample(|x| (-(x - 25.0).powi(2)).exp()), vec![0.0; 64]).unwrap();
        let out = propagate(&w, &fig1(), &Nonlinearity::power(1).unwrap(), &cfg(0.01, 0.0, 0.5)).unwrap();
        assert_eq!(out.final_state, w);
        assert_eq!(out.snapshots.len(), 1);
    }

    #[test]
    fn snapshots_follow_stride() {
        let g = Grid::new(50.0, 64).unwrap();
        let w = WaveProfile::new(g, g.sample(|x| 0.1 * (-(x - 25.0).powi(2)).exp()), vec![0.0; 64]).unwrap();
        let c = PropagationConfig {
            snapshot_stride: 25,
            ..cfg(0.01, 1.0, 0.5)
        };
        let out = propagate(&w, &fig1(), &Nonlinearity::power(1).unwrap(), &c).unwrap();
        let steps: Vec<usize> = out.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 25, 50, 75, 100]);
    }

    #[test]
    fn translation_of_exact_shift_is_zero() {
        let g = Grid::new(40.0, 128).unwrap();
        let sp = Spectral::new(g);
        let f = g.sample(|x| (-(x - 20.0).powi(2) / 4.0).exp());
        let reference = WaveProfile::new(g, f.clone(), f.clone()).unwrap();
        let moved = WaveProfile::new(g, sp.translate(&f, 3.2), sp.translate(&f, 3.2)).unwrap();
        let e = verify_translation(&moved, &reference, 0.8, 4.0).unwrap();
        assert!(e.err_inf_u <= 1e-12 && e.err_l2_eta <= 1e-12);
        let e0 = verify_translation(&reference, &reference, 0.8, 0.0).unwrap();
        assert!(e0.max_l2() <= 1e-14);
    }
}
