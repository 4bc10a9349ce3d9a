//! Nonlinear terms `H1`, `H2` and their potential `F`.
//!
//! Both built-in variants are point-wise maps of the six slots
//! `(eta, eta_x, eta_xx, u, u_x, u_xx)`. In the steady equations the
//! `eta` slots carry the elevation profile `psi` and the `u` slots carry the
//! velocity profile `v`.
//!
//! Other nonlinearities plug in through [`CustomNonlinearity`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Point values of the six slot arguments of `H1`, `H2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Slots {
    pub eta: f64,
    pub eta_x: f64,
    pub eta_xx: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
}

impl Slots {
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            eta: alpha * self.eta,
            eta_x: alpha * self.eta_x,
            eta_xx: alpha * self.eta_xx,
            u: alpha * self.u,
            u_x: alpha * self.u_x,
            u_xx: alpha * self.u_xx,
        }
    }
}

/// Slot arguments sampled on a grid. Derivative vectors may be left empty
/// when [`Nonlinearity::uses_derivatives`] is false.
#[derive(Debug, Clone, Default)]
pub struct SlotFields {
    pub eta: Vec<f64>,
    pub eta_x: Vec<f64>,
    pub eta_xx: Vec<f64>,
    pub u: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_xx: Vec<f64>,
}

impl SlotFields {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn at(&self, j: usize) -> Slots {
        let get = |v: &Vec<f64>| v.get(j).copied().unwrap_or(0.0);
        Slots {
            eta: self.eta[j],
            eta_x: get(&self.eta_x),
            eta_xx: get(&self.eta_xx),
            u: self.u[j],
            u_x: get(&self.u_x),
            u_xx: get(&self.u_xx),
        }
    }
}

/// Extension point for user-supplied nonlinearities.
///
/// Only `h1` and `h2` are mandatory. The analytic Newton Jacobian needs
/// `h_gradient`; the functionals `K`, `N` and `J` need `potential` and
/// `potential_gradient`.
pub trait CustomNonlinearity: Send + Sync + fmt::Debug {
    fn h1(&self, s: &Slots) -> f64;
    fn h2(&self, s: &Slots) -> f64;

    /// Partial derivatives of `H1` and `H2` with respect to the six slots, in
    /// slot order.
    fn h_gradient(&self, _s: &Slots) -> Option<([f64; 6], [f64; 6])> {
        None
    }

    /// `F(eta, eta_x, u, u_x)`.
    fn potential(&self, _eta: f64, _eta_x: f64, _u: f64, _u_x: f64) -> Option<f64> {
        None
    }

    /// `(F_eta, F_eta_x, F_u, F_u_x)`.
    fn potential_gradient(&self, _eta: f64, _eta_x: f64, _u: f64, _u_x: f64) -> Option<[f64; 4]> {
        None
    }

    fn uses_derivatives(&self) -> bool {
        true
    }
}

#[derive(Clone)]
pub enum Nonlinearity {
    /// `H1 = u^(p+1)`, `H2 = eta^(p+1)`, potential `(eta^(p+2) + u^(p+2)) / (p+2)`.
    HomogeneousPower {
        p: u32,
    },
    /// `F = u^4/4 + u u_x^2 + eta^4/4 + eta eta_x^2`, giving
    /// `H1 = eta^3 - eta_x^2 - 2 eta_xx eta` and `H2 = u^3 - u_x^2 - 2 u_xx u`.
    QuarticVariational,
    Custom(Arc<dyn CustomNonlinearity>),
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HomogeneousPower { p } => write!(f, "HomogeneousPower {{ p: {p} }}"),
            Self::QuarticVariational => write!(f, "QuarticVariational"),
            Self::Custom(c) => write!(f, "Custom({c:?})"),
        }
    }
}

impl Nonlinearity {
    pub fn power(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("power-law exponent p must be a positive integer".into()));
        }
        Ok(Self::HomogeneousPower { p })
    }

    /// Exponent `p` of a homogeneous nonlinearity of degree `p + 1`.
    pub fn homogeneity(&self) -> Option<u32> {
        match self {
            Self::HomogeneousPower { p } => Some(*p),
            _ => None,
        }
    }

    pub fn uses_derivatives(&self) -> bool {
        match self {
            Self::HomogeneousPower { .. } => false,
            Self::QuarticVariational => true,
            Self::Custom(c) => c.uses_derivatives(),
        }
    }

    pub fn h1(&self, s: &Slots) -> f64 {
        match self {
            Self::HomogeneousPower { p } => s.u.powi(*p as i32 + 1),
            Self::QuarticVariational => quartic_h(s.eta, s.eta_x, s.eta_xx),
            Self::Custom(c) => c.h1(s),
        }
    }

    pub fn h2(&self, s: &Slots) -> f64 {
        match self {
            Self::HomogeneousPower { p } => s.eta.powi(*p as i32 + 1),
            Self::QuarticVariational => quartic_h(s.u, s.u_x, s.u_xx),
            Self::Custom(c) => c.h2(s),
        }
    }

    /// Slot gradients of `(H1, H2)`.
    pub fn h_gradient(&self, s: &Slots) -> Result<([f64; 6], [f64; 6])> {
        match self {
            Self::HomogeneousPower { p } => {
                let e = *p as i32;
                let q = f64::from(*p + 1);
                Ok((
                    [0.0, 0.0, 0.0, q * s.u.powi(e), 0.0, 0.0],
                    [q * s.eta.powi(e), 0.0, 0.0, 0.0, 0.0, 0.0],
                ))
            }
            Self::QuarticVariational => {
                let g = |q: f64, r: f64, z: f64| [3.0 * q * q - 2.0 * z, -2.0 * r, -2.0 * q];
                let [a, b, c] = g(s.eta, s.eta_x, s.eta_xx);
                let [d, e, f] = g(s.u, s.u_x, s.u_xx);
                Ok(([a, b, c, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, d, e, f]))
            }
            Self::Custom(c) => c
                .h_gradient(s)
                .ok_or(Error::UnsupportedNonlinearity("analytic slot gradients")),
        }
    }

    /// `F(eta, eta_x, u, u_x)`.
    pub fn potential(&self, eta: f64, eta_x: f64, u: f64, u_x: f64) -> Result<f64> {
        match self {
            Self::HomogeneousPower { p } => {
                let e = *p as i32 + 2;
                Ok((eta.powi(e) + u.powi(e)) / f64::from(p + 2))
            }
            Self::QuarticVariational => Ok(0.25 * u.powi(4) + u * u_x * u_x + 0.25 * eta.powi(4) + eta * eta_x * eta_x),
            Self::Custom(c) => c.potential(eta, eta_x, u, u_x).ok_or(Error::UnsupportedFunctional("K")),
        }
    }

    /// `(F_eta, F_eta_x, F_u, F_u_x)`.
    pub fn potential_gradient(&self, eta: f64, eta_x: f64, u: f64, u_x: f64) -> Result<[f64; 4]> {
        match self {
            Self::HomogeneousPower { p } => {
                let e = *p as i32 + 1;
                Ok([eta.powi(e), 0.0, u.powi(e), 0.0])
            }
            Self::QuarticVariational => Ok([
                eta.powi(3) + eta_x * eta_x,
                2.0 * eta * eta_x,
                u.powi(3) + u_x * u_x,
                2.0 * u * u_x,
            ]),
            Self::Custom(c) => c
                .potential_gradient(eta, eta_x, u, u_x)
                .ok_or(Error::UnsupportedFunctional("N")),
        }
    }

    /// Point-wise `H1`, `H2` over sampled slot fields.
    pub fn evaluate(&self, fields: &SlotFields) -> (Vec<f64>, Vec<f64>) {
        let n = fields.len();
        match self {
            Self::HomogeneousPower { p } => {
                let e = *p as i32 + 1;
                (
                    fields.u.iter().map(|x| x.powi(e)).collect(),
                    fields.eta.iter().map(|x| x.powi(e)).collect(),
                )
            }
            _ => (0..n)
                .map(|j| {
                    let s = fields.at(j);
                    (self.h1(&s), self.h2(&s))
                })
                .unzip(),
        }
    }
}

fn quartic_h(q: f64, r: f64, z: f64) -> f64 {
    q * q * q - r * r - 2.0 * z * q
}
