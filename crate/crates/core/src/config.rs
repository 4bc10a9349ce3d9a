//! TOML run configuration.
//!
//! ```toml
//! a = -2.0
//! b = 2.0
//! c = -2.0
//! d = 2.0
//! a2 = 20.0
//! b2 = 5.0
//! c2 = 20.0
//! d2 = 5.0
//! omega = 0.8
//! L = 200.0
//! N = 4096
//!
//! [nonlinearity]
//! kind = "homogeneous_power"
//! p = 8
//!
//! [initial]
//! a0 = 100.0
//! width = 0.5
//! amplitude = 1.0
//! ```
//!
//! Optional tables `[solver]`, `[newton]`, `[propagation]` and `[sweep]`
//! override the defaults of the corresponding stages. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collocation::{CosineExpansion, NewtonConfig};
use crate::error::{Error, Result};
use crate::model::{gaussian_pair, Gaussian, Grid, ModelParams};
use crate::nonlinearity::Nonlinearity;
use crate::petviashvili::SolveConfig;
use crate::profile::WaveProfile;
use crate::propagator::PropagationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    HomogeneousPower { p: u32 },
    QuarticVariational,
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<Nonlinearity> {
        match *self {
            Self::HomogeneousPower { p } => Nonlinearity::power(p),
            Self::QuarticVariational => Ok(Nonlinearity::QuarticVariational),
        }
    }

    pub fn p(&self) -> Option<u32> {
        match *self {
            Self::HomogeneousPower { p } => Some(p),
            Self::QuarticVariational => None,
        }
    }
}

/// Gaussian initial guess `amplitude * exp(-width (x - a0)^2)`; the
/// per-component keys override the shared ones.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Centre; defaults to `L / 2`.
    pub a0: Option<f64>,
    pub width: Option<f64>,
    pub amplitude: Option<f64>,
    pub psi_width: Option<f64>,
    pub psi_amplitude: Option<f64>,
    pub v_width: Option<f64>,
    pub v_amplitude: Option<f64>,
}

const DEFAULT_WIDTH: f64 = 0.5;
const DEFAULT_AMPLITUDE: f64 = 1.0;

impl InitialConfig {
    /// `(psi, v)` Gaussians on a domain of length `length`.
    pub fn gaussians(&self, length: f64) -> (Gaussian, Gaussian) {
        let center = self.a0.unwrap_or(length / 2.0);
        let width = self.width.unwrap_or(DEFAULT_WIDTH);
        let amplitude = self.amplitude.unwrap_or(DEFAULT_AMPLITUDE);
        let psi = Gaussian {
            center,
            width: self.psi_width.unwrap_or(width),
            amplitude: self.psi_amplitude.unwrap_or(amplitude),
        };
        let v = Gaussian {
            center,
            width: self.v_width.unwrap_or(width),
            amplitude: self.v_amplitude.unwrap_or(amplitude),
        };
        (psi, v)
    }
}

/// Velocity grid (and optionally exponents) for a sweep. Either list
/// `omegas` explicitly or give `omega_start`, `omega_stop`, `omega_step`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub omegas: Vec<f64>,
    pub omega_start: Option<f64>,
    pub omega_stop: Option<f64>,
    pub omega_step: Option<f64>,
    /// Exponents to sweep for homogeneous nonlinearities; defaults to the
    /// configured `p`.
    pub ps: Vec<u32>,
}

impl SweepConfig {
    pub fn omega_values(&self) -> Result<Vec<f64>> {
        let mut out = self.omegas.clone();
        match (self.omega_start, self.omega_stop, self.omega_step) {
            (None, None, None) => {}
            (Some(start), Some(stop), Some(step)) => {
                if step.is_nan() || step <= 0.0 || stop < start {
                    return Err(Error::Config(
                        "sweep needs omega_step > 0 and omega_stop >= omega_start".into(),
                    ));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded to 12 digits so that 0.1 + 2 * 0.1 prints as 0.3.
                out.extend((0..=count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12));
            }
            _ => {
                return Err(Error::Config(
                    "sweep range needs all of omega_start, omega_stop, omega_step".into(),
                ))
            }
        }
        if out.is_empty() {
            return Err(Error::Config("sweep lists no omega values".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
    pub omega: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    /// Require `b = d` and `b2 = d2`.
    #[serde(default)]
    pub theoretical_regime: bool,
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    /// Parses and validates. Syntax and key errors carry the TOML location.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.params_unchecked();
        if self.theoretical_regime {
            params.validate_theoretical_regime()?;
        } else {
            params.validate()?;
        }
        self.grid()?;
        self.nonlinearity.build()?;
        self.solver.validate()?;
        self.newton.validate()?;
        self.propagation.n_steps()?;
        if let Some(s) = &self.sweep {
            s.omega_values()?;
        }
        let (psi, v) = self.initial.gaussians(self.length);
        for g in [psi, v] {
            if g.width.is_nan() || g.width <= 0.0 || !g.amplitude.is_finite() {
                return Err(Error::Config(
                    "initial widths must be positive and amplitudes finite".into(),
                ));
            }
        }
        Ok(())
    }

    fn params_unchecked(&self) -> ModelParams {
        ModelParams {
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
            a2: self.a2,
            b2: self.b2,
            c2: self.c2,
            d2: self.d2,
            omega: self.omega,
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let p = self.params_unchecked();
        p.validate()?;
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.length, self.n_points)
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity> {
        self.nonlinearity.build()
    }

    /// Gaussian initial guess sampled on the uniform grid.
    pub fn initial_profile(&self) -> Result<WaveProfile> {
        let (psi, v) = self.initial.gaussians(self.length);
        gaussian_pair(&self.grid()?, psi, v)
    }

    /// Gaussian initial guess projected on the cosine basis over
    /// `[0, L]`, `l = L / 2`.
    pub fn initial_expansion(&self) -> Result<CosineExpansion> {
        let (psi, v) = self.initial.gaussians(self.length);
        CosineExpansion::from_gaussians(self.length / 2.0, self.n_points, psi, v)
    }

    /// Copy with a different velocity (and exponent, for power laws).
    pub fn with_point(&self, omega: f64, p: Option<u32>) -> Self {
        let mut out = self.clone();
        out.omega = omega;
        if let (Some(p), NonlinearityConfig::HomogeneousPower { .. }) = (p, self.nonlinearity) {
            out.nonlinearity = NonlinearityConfig::HomogeneousPower { p };
        }
        out.sweep = None;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"
a = -2.0
b = 2.0
c = -2.0
d = 2.0
a2 = 20.0
b2 = 5.0
c2 = 20.0
d2 = 5.0
omega = 0.8
L = 200.0
N = 4096

[nonlinearity]
kind = "homogeneous_power"
p = 8

[initial]
a0 = 100.0
width = 0.5
amplitude = 1.0
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_toml_str(FIG1).unwrap();
        assert_eq!(cfg.n_points, 4096);
        assert_eq!(cfg.nonlinearity, NonlinearityConfig::HomogeneousPower { p: 8 });
        assert_eq!(cfg.solver, SolveConfig::default());
        assert_eq!(cfg.propagation.theta, 0.5);
        let (psi, v) = cfg.initial.gaussians(cfg.length);
        assert_eq!(psi, v);
        assert_eq!(psi.center, 100.0);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::from_toml_str(FIG1).unwrap();
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_reports_location() {
        let text = FIG1.replace("omega = 0.8", "omega = 0.8\nomgea = 0.1");
        let msg = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(msg.contains("omgea"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_toml_str(&FIG1.replace("a = -2.0", "a = 2.0")).is_err());
        assert!(RunConfig::from_toml_str(&FIG1.replace("N = 4096", "N = 1000")).is_err());
        assert!(RunConfig::from_toml_str(&FIG1.replace("p = 8", "p = 0")).is_err());
        let asym = FIG1.replace("d = 2.0", "d = 3.0") + "";
        assert!(RunConfig::from_toml_str(&asym).is_ok());
        let strict = asym.replace("N = 4096", "N = 4096\ntheoretical_regime = true");
        assert!(RunConfig::from_toml_str(&strict).is_err());
    }

    #[test]
    fn sweep_ranges() {
        let s = SweepConfig {
            omega_start: Some(0.1),
            omega_stop: Some(0.9),
            omega_step: Some(0.1),
            ..Default::default()
        };
        let w = s.omega_values().unwrap();
        assert_eq!(w.len(), 9);
        assert_eq!(w[2], 0.3);
        assert_eq!(w[8], 0.9);
        assert!(SweepConfig::default().omega_values().is_err());
    }

    #[test]
    fn per_component_initial() {
        let text = FIG1.replace(
            "amplitude = 1.0",
            "amplitude = 1.0\npsi_amplitude = 1.5\npsi_width = 0.1\nv_width = 0.05",
        );
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let (psi, v) = cfg.initial.gaussians(cfg.length);
        assert_eq!((psi.amplitude, psi.width), (1.5, 0.1));
        assert_eq!((v.amplitude, v.width), (1.0, 0.05));
    }
}
