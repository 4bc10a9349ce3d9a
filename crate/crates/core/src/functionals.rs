//! Variational functionals and the steady-equation residual.
//!
//! With `J_omega = I_omega / 2 - K`, `I_omega = I1 - 2 omega I2`,
//! `P_omega = I_omega - N`, every traveling wave is a critical point of
//! `J_omega` and lies on `P_omega = 0`. These quantities are evaluated on the
//! periodic grid by spectral differentiation and rectangle quadrature, and
//! are used to check solver output independently of the solver path.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ModelParams;
use crate::nonlinearity::{Nonlinearity, SlotFields};
use crate::profile::{max_norm, WaveProfile};
use crate::spectral::Spectral;

/// A profile together with the spectral derivatives the functionals need.
#[derive(Debug, Clone)]
pub struct ProfileDerivatives {
    pub psi: Vec<f64>,
    pub psi_x: Vec<f64>,
    pub psi_xx: Vec<f64>,
    pub psi_xxxx: Vec<f64>,
    pub v: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_xx: Vec<f64>,
    pub v_xxxx: Vec<f64>,
}

impl ProfileDerivatives {
    pub fn new(sp: &Spectral, w: &WaveProfile) -> Self {
        let psi_hat = sp.forward(w.psi());
        let v_hat = sp.forward(w.v());
        let d = |spec: &[num_complex::Complex64], order| sp.inverse(&sp.derivative_spectrum(spec, order));
        Self {
            psi: w.psi().to_vec(),
            psi_x: d(&psi_hat, 1),
            psi_xx: d(&psi_hat, 2),
            psi_xxxx: d(&psi_hat, 4),
            v: w.v().to_vec(),
            v_x: d(&v_hat, 1),
            v_xx: d(&v_hat, 2),
            v_xxxx: d(&v_hat, 4),
        }
    }

    /// Slot fields with `eta <- psi`, `u <- v`.
    pub fn slots(&self) -> SlotFields {
        SlotFields {
            eta: self.psi.clone(),
            eta_x: self.psi_x.clone(),
            eta_xx: self.psi_xx.clone(),
            u: self.v.clone(),
            u_x: self.v_x.clone(),
            u_xx: self.v_xx.clone(),
        }
    }
}

/// Flat record of every functional at one profile. Residual norms are
/// absolute; [`FunctionalReport::relative_residual_inf`] divides by the
/// profile amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub i1: f64,
    pub i2: f64,
    pub i_omega: f64,
    pub k: f64,
    pub n: f64,
    pub p_omega: f64,
    pub j_omega: f64,
    pub residual_inf: f64,
    pub residual_l2: f64,
    #[serde(skip)]
    pub amplitude: f64,
}

impl FunctionalReport {
    /// `residual_inf / max(|psi|_inf, |v|_inf)`.
    pub fn relative_residual_inf(&self) -> f64 {
        if self.amplitude > 0.0 {
            self.residual_inf / self.amplitude
        } else {
            self.residual_inf
        }
    }

    /// `|P_omega| / max(I_omega, 1)`.
    pub fn relative_nehari_defect(&self) -> f64 {
        self.p_omega.abs() / self.i_omega.max(1.0)
    }
}

fn quad(sp: &Spectral, n: usize, density: impl Fn(usize) -> f64) -> f64 {
    sp.integrate(&(0..n).map(density).collect::<Vec<_>>())
}

fn i1_from(sp: &Spectral, d: &ProfileDerivatives, p: &ModelParams) -> f64 {
    quad(sp, d.psi.len(), |j| {
        d.psi[j].powi(2) - p.c * d.psi_x[j].powi(2) + p.c2 * d.psi_xx[j].powi(2) + d.v[j].powi(2)
            - p.a * d.v_x[j].powi(2)
            + p.a2 * d.v_xx[j].powi(2)
    })
}

fn i2_from(sp: &Spectral, d: &ProfileDerivatives, p: &ModelParams) -> f64 {
    quad(sp, d.psi.len(), |j| {
        d.psi[j] * d.v[j] + p.b * d.psi_x[j] * d.v_x[j] + p.b2 * d.psi_xx[j] * d.v_xx[j]
    })
}

fn k_from(sp: &Spectral, d: &ProfileDerivatives, nl: &Nonlinearity) -> Result<f64> {
    let density = (0..d.psi.len())
        .map(|j| nl.potential(d.psi[j], d.psi_x[j], d.v[j], d.v_x[j]))
        .collect::<Result<Vec<_>>>()?;
    Ok(sp.integrate(&density))
}

fn n_from(sp: &Spectral, d: &ProfileDerivatives, nl: &Nonlinearity) -> Result<f64> {
    let density = (0..d.psi.len())
        .map(|j| {
            let g = nl.potential_gradient(d.psi[j], d.psi_x[j], d.v[j], d.v_x[j])?;
            Ok(d.psi[j] * g[0] + d.psi_x[j] * g[1] + d.v[j] * g[2] + d.v_x[j] * g[3])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sp.integrate(&density))
}

/// `I1 = int psi^2 - c psi'^2 + c2 psi''^2 + v^2 - a v'^2 + a2 v''^2`.
pub fn eval_i1(sp: &Spectral, w: &WaveProfile, params: &ModelParams) -> f64 {
    i1_from(sp, &ProfileDerivatives::new(sp, w), params)
}

/// `I2 = int psi v + b psi' v' + b2 psi'' v''`.
pub fn eval_i2(sp: &Spectral, w: &WaveProfile, params: &ModelParams) -> f64 {
    i2_from(sp, &ProfileDerivatives::new(sp, w), params)
}

/// `K = int F(psi, psi', v, v')`.
pub fn eval_k(sp: &Spectral, w: &WaveProfile, nl: &Nonlinearity) -> Result<f64> {
    k_from(sp, &ProfileDerivatives::new(sp, w), nl)
}

/// `N = int (psi, psi', v, v') . grad F`.
pub fn eval_n(sp: &Spectral, w: &WaveProfile, nl: &Nonlinearity) -> Result<f64> {
    n_from(sp, &ProfileDerivatives::new(sp, w), nl)
}

/// Left-hand sides of the two steady equations,
/// `-omega (v - d v'' + d2 v'''') + psi + c psi'' + c2 psi'''' - H1` and
/// `-omega (psi - b psi'' + b2 psi'''') + v + a v'' + a2 v'''' - H2`.
pub fn residual_fields(
    sp: &Spectral,
    w: &WaveProfile,
    params: &ModelParams,
    nl: &Nonlinearity,
) -> (Vec<f64>, Vec<f64>) {
    residual_from(&ProfileDerivatives::new(sp, w), params, nl)
}

pub(crate) fn residual_from(d: &ProfileDerivatives, p: &ModelParams, nl: &Nonlinearity) -> (Vec<f64>, Vec<f64>) {
    let (h1, h2) = nl.evaluate(&d.slots());
    let n = d.psi.len();
    let om = p.omega;
    let r1 = (0..n)
        .map(|j| {
            -om * (d.v[j] - p.d * d.v_xx[j] + p.d2 * d.v_xxxx[j]) + d.psi[j] + p.c * d.psi_xx[j] + p.c2 * d.psi_xxxx[j]
                - h1[j]
        })
        .collect();
    let r2 = (0..n)
        .map(|j| {
            -om * (d.psi[j] - p.b * d.psi_xx[j] + p.b2 * d.psi_xxxx[j]) + d.v[j] + p.a * d.v_xx[j] + p.a2 * d.v_xxxx[j]
                - h2[j]
        })
        .collect();
    (r1, r2)
}

/// Every functional plus the residual norms.
pub fn eval_all(sp: &Spectral, w: &WaveProfile, params: &ModelParams, nl: &Nonlinearity) -> Result<FunctionalReport> {
    let d = ProfileDerivatives::new(sp, w);
    let i1 = i1_from(sp, &d, params);
    let i2 = i2_from(sp, &d, params);
    let k = k_from(sp, &d, nl)?;
    let n = n_from(sp, &d, nl)?;
    let (r1, r2) = residual_from(&d, params, nl);
    let residual_inf = max_norm(&r1).max(max_norm(&r2));
    let sq: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a * a + b * b).collect();
    let residual_l2 = sp.integrate(&sq).sqrt();
    let i_omega = i1 - 2.0 * params.omega * i2;
    Ok(FunctionalReport {
        i1,
        i2,
        i_omega,
        k,
        n,
        p_omega: i_omega - n,
        j_omega: 0.5 * i_omega - k,
        residual_inf,
        residual_l2,
        amplitude: w.max_norm(),
    })
}

/// Discrete `H^2 x H^2` norm squared,
/// `int psi^2 + psi'^2 + psi''^2 + v^2 + v'^2 + v''^2`.
pub fn h2_norm_sq(sp: &Spectral, w: &WaveProfile) -> f64 {
    let d = ProfileDerivatives::new(sp, w);
    quad(sp, d.psi.len(), |j| {
        d.psi[j].powi(2)
            + d.psi_x[j].powi(2)
            + d.psi_xx[j].powi(2)
            + d.v[j].powi(2)
            + d.v_x[j].powi(2)
            + d.v_xx[j].powi(2)
    })
}

/// `I_omega` assembled as the integral of the sum of squares
///
/// ```text
/// (psi - omega v)^2 + (sqrt|c| psi' - b omega v' / sqrt|c|)^2 + (1 - omega^2) v^2
///   + (|a| - b^2 omega^2 / |c|) v'^2 + c2 (psi'' - omega b2 v'' / c2)^2
///   + (a2 - omega^2 b2^2 / c2) v''^2
/// ```
///
/// which is nonnegative term by term inside the existence regime.
pub fn i_omega_sum_of_squares(sp: &Spectral, w: &WaveProfile, p: &ModelParams) -> f64 {
    let d = ProfileDerivatives::new(sp, w);
    let om = p.omega;
    let ac = p.a.abs();
    let cc = p.c.abs();
    let sc = cc.sqrt();
    quad(sp, d.psi.len(), |j| {
        (d.psi[j] - om * d.v[j]).powi(2)
            + (sc * d.psi_x[j] - p.b * om / sc * d.v_x[j]).powi(2)
            + (1.0 - om * om) * d.v[j].powi(2)
            + (ac - p.b * p.b * om * om / cc) * d.v_x[j].powi(2)
            + p.c2 * (d.psi_xx[j] - om * p.b2 / p.c2 * d.v_xx[j]).powi(2)
            + (p.a2 - om * om * p.b2 * p.b2 / p.c2) * d.v_xx[j].powi(2)
    })
}

/// Constants of the equivalence `M1 |w|^2 <= I_omega(w) <= M2 |w|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    pub m1: f64,
    pub m2: f64,
    /// Set when `omega` is outside the existence regime; `m1` may then be
    /// nonpositive.
    pub out_of_regime: bool,
}

pub fn norm_equivalence_constants(p: &ModelParams) -> NormEquivalence {
    let w = p.omega.abs();
    let m1 = [
        1.0 - w,
        -p.c - p.b * w,
        -p.a - p.b * w,
        p.a2 - p.b2 * w,
        p.c2 - p.b2 * w,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let m2 = [
        1.0 + w,
        p.c.abs() + p.b * w,
        p.a.abs() + p.b * w,
        p.a2 + p.b2 * w,
        p.c2 + p.b2 * w,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    NormEquivalence {
        m1,
        m2,
        out_of_regime: !p.velocity_in_regime(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Grid;
    use std::f64::consts::PI;

    fn fig1(omega: f64) -> ModelParams {
        ModelParams::new(-2.0, 2.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, omega).unwrap()
    }

    fn sine_profile(psi_on: bool, v_on: bool) -> (Spectral, WaveProfile) {
        let g = Grid::new(2.0 * PI, 64).unwrap();
        let s = g.sample(f64::sin);
        let z = vec![0.0; 64];
        let w = WaveProfile::new(g, if psi_on { s.clone() } else { z.clone() }, if v_on { s } else { z }).unwrap();
        (Spectral::new(g), w)
    }

    #[test]
    fn zero_profile_gives_zero_everything() {
        let g = Grid::new(50.0, 64).unwrap();
        let sp = Spectral::new(g);
        let w = WaveProfile::zeros(g);
        for nl in [Nonlinearity::power(2).unwrap(), Nonlinearity::QuarticVariational] {
            let r = eval_all(&sp, &w, &fig1(0.8), &nl).unwrap();
            for x in [
                r.i1,
                r.i2,
                r.i_omega,
                r.k,
                r.n,
                r.p_omega,
                r.j_omega,
                r.residual_inf,
                r.residual_l2,
            ] {
                assert_eq!(x, 0.0);
            }
        }
    }

    #[test]
    fn i1_single_mode() {
        let (sp, w) = sine_profile(true, false);
        let p = fig1(0.5);
        let expected = (1.0 - p.c + p.c2) * PI;
        assert!((eval_i1(&sp, &w, &p) - expected).abs() < 1e-12 * expected);
        assert!((eval_i1(&sp, &w.scaled(2.0), &p) - 4.0 * expected).abs() < 1e-11 * expected);
    }

    #[test]
    fn i2_single_mode() {
        let (sp, w) = sine_profile(true, true);
        let p = ModelParams::new(-2.0, 2.0, -2.0, 2.0, 20.0, 5.0, 20.0, 5.0, 0.5).unwrap();
        assert!((eval_i2(&sp, &w, &p) - 8.0 * PI).abs() < 1e-12 * 8.0 * PI);
        let (sp, w) = sine_profile(true, false);
        assert_eq!(eval_i2(&sp, &w, &p), 0.0);
    }

    #[test]
    fn k_and_n_for_constants() {
        let g = Grid::new(30.0, 32).unwrap();
        let sp = Spectral::new(g);
        let c = 1.3f64;
        let w = WaveProfile::new(g, vec![c; 32], vec![0.0; 32]).unwrap();
        let quartic = Nonlinearity::QuarticVariational;
        assert!((eval_k(&sp, &w, &quartic).unwrap() - 30.0 * c.powi(4) / 4.0).abs() < 1e-12);
        assert!((eval_n(&sp, &w, &quartic).unwrap() - 30.0 * c.powi(4)).abs() < 1e-11);
        let w = WaveProfile::new(g, vec![c; 32], vec![c; 32]).unwrap();
        let k = eval_k(&sp, &w, &Nonlinearity::power(2).unwrap()).unwrap();
        assert!((k - 2.0 * 30.0 * c.powi(4) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn report_identities_hold_exactly() {
        let g = Grid::new(40.0, 128).unwrap();
        let sp = Spectral::new(g);
        let w = WaveProfile::new(
            g,
            g.sample(|x| (-(x - 20.0).powi(2) / 4.0).exp()),
            g.sample(|x| 0.7 * (-(x - 19.0).powi(2) / 3.0).exp()),
        )
        .unwrap();
        let p = fig1(0.6);
        let r = eval_all(&sp, &w, &p, &Nonlinearity::power(3).unwrap()).unwrap();
        assert_eq!(r.i_omega, r.i1 - 2.0 * p.omega * r.i2);
        assert_eq!(r.p_omega, r.i_omega - r.n);
        assert_eq!(r.j_omega, 0.5 * r.i_omega - r.k);
        let json = serde_json::to_value(r).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        let mut expected = vec![
            "i1",
            "i2",
            "i_omega",
            "k",
            "n",
            "p_omega",
            "j_omega",
            "residual_inf",
            "residual_l2",
        ];
        expected.sort();
        let mut keys = keys;
        keys.sort();
        assert_eq!(keys, expected);
    }

    #[test]
    fn norm_constants() {
        let c = norm_equivalence_constants(&fig1(0.8));
        assert!((c.m1 - 0.2).abs() < 1e-15);
        assert!(!c.out_of_regime);
        assert!(c.m2 >= c.m1);
        let c0 = norm_equivalence_constants(&fig1(0.0));
        assert_eq!(c0.m1, 1.0f64.min(2.0).min(2.0).min(20.0).min(20.0));
        assert!(c0.out_of_regime);
        let beyond = ModelParams::new(-4.0, 4.0, -4.0, 4.0, 0.5, 2.0, 0.5, 2.0, 0.4).unwrap();
        let c = norm_equivalence_constants(&beyond);
        assert!(c.out_of_regime);
        assert!(c.m1 <= 0.0);
    }
}
