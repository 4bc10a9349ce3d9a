//! Stabilized Fourier fixed-point iteration for homogeneous nonlinearities.
//!
//! In Fourier space the steady equations read `D(k) [v_hat, psi_hat]^T =
//! [H1_hat, H2_hat]^T` with
//!
//! ```text
//! D11 = -omega (1 + d k^2 + d2 k^4)    D12 = 1 - c k^2 + c2 k^4
//! D21 =  1 - a k^2 + a2 k^4            D22 = -omega (1 + b k^2 + b2 k^4)
//! ```
//!
//! Each step inverts `D` mode by mode and rescales the result by
//! `M_s^((p+1)/p)` (velocity) and `N_s^((p+1)/p)` (elevation), where
//!
//! ```text
//! M_s = sum det |v_hat|^2   / sum Re[(H1_hat D22 - H2_hat D12) conj(v_hat)]
//! N_s = sum det |psi_hat|^2 / sum Re[(H2_hat D11 - H1_hat D21) conj(psi_hat)]
//! ```
//!
//! Both factors equal 1 at a solution and scale like `alpha^-p` under
//! `(psi, v) -> alpha (psi, v)`, which removes the unstable amplitude
//! direction of the plain fixed-point map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{eval_all, residual_from, ProfileDerivatives};
use crate::model::{Grid, ModelParams};
use crate::nonlinearity::{Nonlinearity, SlotFields};
use crate::profile::{max_norm, relative_change, WaveProfile};
use crate::report::{IterationRecord, SolveReport, Termination};
use crate::spectral::Spectral;

/// Per-mode entries of the dispersion matrix over the half spectrum.
#[derive(Debug, Clone)]
pub struct DispersionMatrix {
    pub k: Vec<f64>,
    pub d11: Vec<f64>,
    pub d12: Vec<f64>,
    pub d21: Vec<f64>,
    pub d22: Vec<f64>,
    pub det: Vec<f64>,
}

impl DispersionMatrix {
    pub fn n_modes(&self) -> usize {
        self.k.len()
    }
}

pub fn build_dispersion(grid: &Grid, params: &ModelParams) -> Result<DispersionMatrix> {
    params.validate()?;
    let k = crate::spectral::wavenumbers(grid);
    let p = params;
    let n = k.len();
    let mut m = DispersionMatrix {
        k,
        d11: Vec::with_capacity(n),
        d12: Vec::with_capacity(n),
        d21: Vec::with_capacity(n),
        d22: Vec::with_capacity(n),
        det: Vec::with_capacity(n),
    };
    for (mode, &kk) in m.k.iter().enumerate() {
        let k2 = kk * kk;
        let k4 = k2 * k2;
        let d11 = -p.omega * (1.0 + p.d * k2 + p.d2 * k4);
        let d12 = 1.0 - p.c * k2 + p.c2 * k4;
        let d21 = 1.0 - p.a * k2 + p.a2 * k4;
        let d22 = -p.omega * (1.0 + p.b * k2 + p.b2 * k4);
        let det = d11 * d22 - d21 * d12;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularDispersion {
                mode,
                wavenumber: kk,
                det,
            });
        }
        m.d11.push(d11);
        m.d12.push(d12);
        m.d21.push(d21);
        m.d22.push(d22);
        m.det.push(det);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Threshold on the successive relative change of both components.
    pub tol: f64,
    pub max_iter: usize,
    /// Abort once the iterate max-norm exceeds this.
    pub divergence_guard: f64,
    /// Abort after this many consecutive increases of the relative change.
    pub growth_limit: usize,
    pub record_history: bool,
    /// Apply 2/3-rule truncation to the nonlinear spectra.
    pub dealias: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            divergence_guard: 1e6,
            growth_limit: 50,
            record_history: true,
            dealias: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

const REL_FLOOR: f64 = 1e-14;
const COLLAPSE_NORM: f64 = 1e-12;
const SIGN_TRANSIENT: usize = 10;

/// Spectral data of one iterate shared by the stabilizers and the update.
struct Proposal {
    psi_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
    /// `(H1_hat D22 - H2_hat D12)`, the un-normalised velocity numerator.
    v_num: Vec<Complex64>,
    /// `(H2_hat D11 - H1_hat D21)`.
    psi_num: Vec<Complex64>,
}

fn proposal(sp: &Spectral, w: &WaveProfile, disp: &DispersionMatrix, nl: &Nonlinearity, dealias: bool) -> Proposal {
    let slots = if nl.uses_derivatives() {
        ProfileDerivatives::new(sp, w).slots()
    } else {
        SlotFields {
            eta: w.psi().to_vec(),
            u: w.v().to_vec(),
            ..Default::default()
        }
    };
    let (h1, h2) = nl.evaluate(&slots);
    let mut h1_hat = sp.forward(&h1);
    let mut h2_hat = sp.forward(&h2);
    if dealias {
        sp.dealias(&mut h1_hat);
        sp.dealias(&mut h2_hat);
    }
    let n = disp.n_modes();
    let v_num = (0..n)
        .map(|m| h1_hat[m] * disp.d22[m] - h2_hat[m] * disp.d12[m])
        .collect();
    let psi_num = (0..n)
        .map(|m| h2_hat[m] * disp.d11[m] - h1_hat[m] * disp.d21[m])
        .collect();
    Proposal {
        psi_hat: sp.forward(w.psi()),
        v_hat: sp.forward(w.v()),
        v_num,
        psi_num,
    }
}

fn ratio(
    sp: &Spectral,
    disp: &DispersionMatrix,
    field_hat: &[Complex64],
    num: &[Complex64],
    name: &str,
) -> Result<f64> {
    let mut top = 0.0;
    let mut bottom = 0.0;
    for m in 0..disp.n_modes() {
        let w = sp.mode_weight(m);
        top += w * disp.det[m] * field_hat[m].norm_sqr();
        bottom += w * (num[m] * field_hat[m].conj()).re;
    }
    if bottom == 0.0 || !bottom.is_finite() || !top.is_finite() {
        return Err(Error::DegenerateState(format!(
            "stabilizing factor {name} has vanishing or non-finite denominator"
        )));
    }
    Ok(top / bottom)
}

fn factors(sp: &Spectral, disp: &DispersionMatrix, prop: &Proposal) -> Result<(f64, f64)> {
    Ok((
        ratio(sp, disp, &prop.v_hat, &prop.v_num, "M_s")?,
        ratio(sp, disp, &prop.psi_hat, &prop.psi_num, "N_s")?,
    ))
}

/// Stabilizing factors `(M_s, N_s)` at the state `w`.
pub fn stabilizing_factors(
    sp: &Spectral,
    w: &WaveProfile,
    disp: &DispersionMatrix,
    nl: &Nonlinearity,
) -> Result<(f64, f64)> {
    factors(sp, disp, &proposal(sp, w, disp, nl, false))
}

/// `x^q`, exact `powi` for integral `q`, otherwise the sign-preserving real
/// power `sign(x) |x|^q`.
pub fn stabilizer_power(x: f64, q: f64) -> f64 {
    if q.fract() == 0.0 {
        x.powi(q as i32)
    } else {
        x.signum() * x.abs().powf(q)
    }
}

#[derive(Debug, Clone)]
pub struct IterateOutcome {
    pub profile: WaveProfile,
    pub m_s: f64,
    pub n_s: f64,
    /// A factor was negative and a non-integral exponent was applied
    /// sign-preservingly.
    pub sign_flip: bool,
}

/// One stabilized update. `p` fixes the exponent `(p+1)/p`.
pub fn iterate_once(
    sp: &Spectral,
    w: &WaveProfile,
    disp: &DispersionMatrix,
    nl: &Nonlinearity,
    p: u32,
) -> Result<IterateOutcome> {
    iterate_with(sp, w, disp, nl, p, false)
}

fn iterate_with(
    sp: &Spectral,
    w: &WaveProfile,
    disp: &DispersionMatrix,
    nl: &Nonlinearity,
    p: u32,
    dealias: bool,
) -> Result<IterateOutcome> {
    if p == 0 {
        return Err(Error::Config("homogeneity exponent p must be positive".into()));
    }
    let prop = proposal(sp, w, disp, nl, dealias);
    let (m_s, n_s) = factors(sp, disp, &prop)?;
    let q = f64::from(p + 1) / f64::from(p);
    let sign_flip = q.fract() != 0.0 && (m_s < 0.0 || n_s < 0.0);
    let sv = stabilizer_power(m_s, q);
    let spsi = stabilizer_power(n_s, q);
    let v_new: Vec<Complex64> = (0..disp.n_modes())
        .map(|m| prop.v_num[m] * (sv / disp.det[m]))
        .collect();
    let psi_new: Vec<Complex64> = (0..disp.n_modes())
        .map(|m| prop.psi_num[m] * (spsi / disp.det[m]))
        .collect();
    let profile = WaveProfile::new(*w.grid(), sp.inverse(&psi_new), sp.inverse(&v_new))
        .map_err(|_| Error::DegenerateState("iterate became non-finite".into()))?;
    Ok(IterateOutcome {
        profile,
        m_s,
        n_s,
        sign_flip,
    })
}

/// Runs the stabilized iteration from `initial` until the successive
/// relative change of both components falls below `cfg.tol`.
///
/// Non-convergence (iteration cap, divergence, collapse to zero) is reported
/// through [`SolveReport::termination`]; hard errors are reserved for invalid
/// input and degenerate starting states.
pub fn solve(
    initial: &WaveProfile,
    params: &ModelParams,
    nl: &Nonlinearity,
    cfg: &SolveConfig,
) -> Result<(WaveProfile, SolveReport)> {
    params.validate()?;
    cfg.validate()?;
    let p = nl.homogeneity().ok_or(Error::UnsupportedNonlinearity(
        "the stabilized fixed-point iteration (needs a homogeneous power law)",
    ))?;
    if initial.max_norm() == 0.0 {
        return Err(Error::DegenerateState("initial profile is identically zero".into()));
    }
    let grid = *initial.grid();
    let sp = Spectral::new(grid);
    let disp = build_dispersion(&grid, params)?;

    let mut warnings = Vec::new();
    if let Some(w) = params.regime_warning() {
        log::warn!("{w}");
        warnings.push(w);
    }

    let mut w = initial.clone();
    let mut history = Vec::new();
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;
    let mut sign_degenerate = false;
    let mut prev_change = f64::INFINITY;
    let mut growth = 0;

    for it in 1..=cfg.max_iter {
        let step = match iterate_with(&sp, &w, &disp, nl, p, cfg.dealias) {
            Ok(step) => step,
            Err(e) if it == 1 => return Err(e),
            Err(Error::DegenerateState(msg)) => {
                log::warn!("iteration {it}: {msg}");
                termination = if w.max_norm() < COLLAPSE_NORM {
                    Termination::CollapsedToZero
                } else {
                    Termination::Diverged
                };
                warnings.push(format!("iteration {it}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        };
        iterations = it;
        if step.sign_flip && it > SIGN_TRANSIENT {
            sign_degenerate = true;
        }
        let next = step.profile;
        let change = relative_change(next.psi(), w.psi(), REL_FLOOR).max(relative_change(next.v(), w.v(), REL_FLOOR));
        let norm = next.max_norm();

        if cfg.record_history {
            let d = ProfileDerivatives::new(&sp, &next);
            let (r1, r2) = residual_from(&d, params, nl);
            history.push(IterationRecord {
                iteration: it,
                rel_change: change,
                residual_inf: max_norm(&r1).max(max_norm(&r2)),
                m_s: Some(step.m_s),
                n_s: Some(step.n_s),
                step_norm: None,
                halvings: None,
            });
        }
        log::debug!("iter {it}: change {change:.3e} M_s {:.6} N_s {:.6}", step.m_s, step.n_s);

        w = next;
        if !norm.is_finite() || norm > cfg.divergence_guard {
            termination = Termination::Diverged;
            break;
        }
        if norm < COLLAPSE_NORM {
            termination = Termination::CollapsedToZero;
            break;
        }
        if change < cfg.tol {
            termination = Termination::Converged;
            break;
        }
        growth = if change > prev_change { growth + 1 } else { 0 };
        prev_change = change;
        if growth >= cfg.growth_limit {
            termination = Termination::Diverged;
            break;
        }
    }

    if sign_degenerate {
        warnings.push("negative stabilizing factor after the initial transient".into());
    }
    let final_report = match eval_all(&sp, &w, params, nl) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("functionals unavailable: {e}"));
            None
        }
    };
    let report = SolveReport {
        iterations,
        converged: termination == Termination::Converged,
        termination,
        history,
        final_report,
        sign_degenerate,
        warnings,
    };
    Ok((w, report))
}
