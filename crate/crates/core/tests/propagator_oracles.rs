use std::f64::consts::PI;
use std::sync::Arc;

use boussinesq_core::propagator::{propagate, verify_translation, Stepper};
use boussinesq_core::{CustomNonlinearity, Grid, ModelParams, Nonlinearity, PropagationConfig, Slots, WaveProfile};
use num_complex::Complex64;
use proptest::prelude::*;

#[derive(Debug)]
struct Linear;

impl CustomNonlinearity for Linear {
    fn h1(&self, _: &Slots) -> f64 {
        0.0
    }

    fn h2(&self, _: &Slots) -> f64 {
        0.0
    }

    fn uses_derivatives(&self) -> bool {
        false
    }
}

fn params() -> ModelParams {
    ModelParams::new(-2.0, 2.0, -3.0, 1.5, 2.0, 1.0, 4.0, 3.0, 0.3).unwrap()
}

fn dft(f: &[f64]) -> Vec<Complex64> {
    let n = f.len();
    (0..n)
        .map(|m| {
            (0..n)
                .map(|j| f[j] * Complex64::from_polar(1.0, -2.0 * PI * (j * m) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn idft(c: &[Complex64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|j| {
            let s: Complex64 = (0..n)
                .map(|m| c[m] * Complex64::from_polar(1.0, 2.0 * PI * (j * m) as f64 / n as f64))
                .sum();
            s.re / n as f64
        })
        .collect()
}

/// Signed wavenumber of full-spectrum index `m`, and whether it is Nyquist.
fn wavenumber(m: usize, n: usize, length: f64) -> (f64, bool) {
    let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    (2.0 * PI * signed / length, m == n / 2)
}

/// `(W1, W2, ik/den1, ik/den2)` at one mode, all zero at Nyquist.
fn mode_symbols(k: f64, nyquist: bool, p: &ModelParams) -> (Complex64, Complex64, Complex64, Complex64) {
    if nyquist {
        let z = Complex64::new(0.0, 0.0);
        return (z, z, z, z);
    }
    let den1 = 1.0 + p.d * k * k + p.d2 * k.powi(4);
    let den2 = 1.0 + p.b * k * k + p.b2 * k.powi(4);
    (
        Complex64::new(0.0, (-k + p.c * k.powi(3) - p.c2 * k.powi(5)) / den1),
        Complex64::new(0.0, (-k + p.a * k.powi(3) - p.a2 * k.powi(5)) / den2),
        Complex64::new(0.0, k / den1),
        Complex64::new(0.0, k / den2),
    )
}

/// Theta step of `u' = W1 eta + N1`, `eta' = W2 u + N2` at one mode with the
/// forcing frozen, solved as a 2x2 system by Cramer's rule.
type Pair = (Complex64, Complex64);

fn theta_step((u, eta): Pair, (w1, w2): Pair, (n1, n2): Pair, dt: f64, th: f64) -> Pair {
    // [1, -dt th W1; -dt th W2, 1] [u'; eta'] = rhs
    let r1 = u + dt * (1.0 - th) * w1 * eta + dt * n1;
    let r2 = eta + dt * (1.0 - th) * w2 * u + dt * n2;
    let (a12, a21) = (-dt * th * w1, -dt * th * w2);
    let det = 1.0 - a12 * a21;
    ((r1 - a12 * r2) / det, (r2 - a21 * r1) / det)
}

fn naive_derivative(f: &[f64], length: f64, order: u32) -> Vec<f64> {
    let n = f.len();
    let c = dft(f);
    let scaled: Vec<Complex64> = (0..n)
        .map(|m| {
            let (k, nyq) = wavenumber(m, n, length);
            if nyq && order % 2 == 1 {
                Complex64::new(0.0, 0.0)
            } else {
                c[m] * Complex64::new(0.0, k).powu(order)
            }
        })
        .collect();
    idft(&scaled)
}

fn oracle_step(w: &WaveProfile, p: &ModelParams, quartic: bool, dt: f64, th: f64) -> (Vec<f64>, Vec<f64>) {
    let (eta, u) = (w.psi(), w.v());
    let n = u.len();
    let length = w.grid().length();
    let (h1, h2): (Vec<f64>, Vec<f64>) = if quartic {
        let h = |q: &[f64]| {
            let (qx, qxx) = (naive_derivative(q, length, 1), naive_derivative(q, length, 2));
            (0..n)
                .map(|j| q[j].powi(3) - qx[j].powi(2) - 2.0 * qxx[j] * q[j])
                .collect::<Vec<_>>()
        };
        (h(eta), h(u))
    } else {
        (
            u.iter().map(|x| x * x * x).collect(),
            eta.iter().map(|x| x * x * x).collect(),
        )
    };
    let (uh, eh, h1h, h2h) = (dft(u), dft(eta), dft(&h1), dft(&h2));
    let mut un = Vec::with_capacity(n);
    let mut en = Vec::with_capacity(n);
    for m in 0..n {
        let (k, nyq) = wavenumber(m, n, length);
        let (w1, w2, l1, l2) = mode_symbols(k, nyq, p);
        let (a, b) = theta_step((uh[m], eh[m]), (w1, w2), (l1 * h1h[m], l2 * h2h[m]), dt, th);
        un.push(a);
        en.push(b);
    }
    (idft(&en), idft(&un))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5..0.5f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_step_matches_theta_oracle(
        eta in field(16),
        u in field(16),
        length in 5.0..40.0f64,
        dt in 1e-4..1e-1f64,
        theta in 0.0..=1.0f64,
        quartic: bool,
    ) {
        let grid = Grid::new(length, 16).unwrap();
        let w = WaveProfile::new(grid, eta, u).unwrap();
        let p = params();
        let nl = if quartic { Nonlinearity::QuarticVariational } else { Nonlinearity::power(2).unwrap() };
        let cfg = PropagationConfig { dt, t_final: dt, theta, snapshot_stride: 0 };
        let got = Stepper::new(&grid, &p, &nl, &cfg).unwrap().step(&w).unwrap();
        let (oe, ou) = oracle_step(&w, &p, quartic, dt, theta);
        let scale = oe.iter().chain(&ou).fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(max_diff(got.psi(), &oe) <= 1e-12 * scale);
        prop_assert!(max_diff(got.v(), &ou) <= 1e-12 * scale);
    }

    #[test]
    fn explicit_euler_at_theta_zero(eta in field(8), u in field(8), dt in 1e-4..1e-2f64) {
        let grid = Grid::new(6.0, 8).unwrap();
        let w = WaveProfile::new(grid, eta.clone(), u.clone()).unwrap();
        let p = params();
        let nl = Nonlinearity::Custom(Arc::new(Linear));
        let cfg = PropagationConfig { dt, t_final: dt, theta: 0.0, snapshot_stride: 0 };
        let got = Stepper::new(&grid, &p, &nl, &cfg).unwrap().step(&w).unwrap();
        // u1 = u0 + dt W1 eta0 and eta1 = eta0 + dt W2 u0, mode by mode.
        let (uh, eh) = (dft(&u), dft(&eta));
        let (mut un, mut en) = (Vec::new(), Vec::new());
        for m in 0..8 {
            let (k, nyq) = wavenumber(m, 8, 6.0);
            let (w1, w2, _, _) = mode_symbols(k, nyq, &p);
            un.push(uh[m] + dt * w1 * eh[m]);
            en.push(eh[m] + dt * w2 * uh[m]);
        }
        prop_assert!(max_diff(got.v(), &idft(&un)) <= 1e-13);
        prop_assert!(max_diff(got.psi(), &idft(&en)) <= 1e-13);
    }
}

fn random_state(n: usize, length: f64, seed: u64) -> WaveProfile {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::new(length, n).unwrap();
    let eta = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let u = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    WaveProfile::new(grid, eta, u).unwrap()
}

#[test]
fn linear_recurrence_over_ten_thousand_steps() {
    let p = params();
    let nl = Nonlinearity::Custom(Arc::new(Linear));
    let w = random_state(16, 12.0, 7);
    for theta in [0.0, 0.5, 1.0] {
        let cfg = PropagationConfig {
            dt: 1e-3,
            t_final: 10.0,
            theta,
            snapshot_stride: 0,
        };
        let run = propagate(&w, &p, &nl, &cfg).unwrap();
        let (mut uh, mut eh) = (dft(w.v()), dft(w.psi()));
        for m in 0..16 {
            let (k, nyq) = wavenumber(m, 16, 12.0);
            let (w1, w2, _, _) = mode_symbols(k, nyq, &p);
            let z = Complex64::new(0.0, 0.0);
            for _ in 0..10_000 {
                (uh[m], eh[m]) = theta_step((uh[m], eh[m]), (w1, w2), (z, z), 1e-3, theta);
            }
        }
        let scale = w.max_norm();
        let (du, de) = (
            max_diff(run.final_state.v(), &idft(&uh)),
            max_diff(run.final_state.psi(), &idft(&eh)),
        );
        assert!(du < 1e-12 * scale && de < 1e-12 * scale, "theta {theta}: {du:e} {de:e}");
    }
}

/// `sum_m sign(k_m) (beta_m |u_m|^2 + alpha_m |eta_m|^2)` with
/// `W1 = i alpha`, `W2 = i beta`. Each mode's term is conserved by the linear
/// flow; the sign makes the sum definite since the symbols are odd in `k`.
fn quadratic_invariant(w: &WaveProfile, p: &ModelParams) -> f64 {
    let n = w.psi().len();
    let (uh, eh) = (dft(w.v()), dft(w.psi()));
    (0..n)
        .map(|m| {
            let (k, nyq) = wavenumber(m, n, w.grid().length());
            let (w1, w2, _, _) = mode_symbols(k, nyq, p);
            k.signum() * (w2.im * uh[m].norm_sqr() + w1.im * eh[m].norm_sqr())
        })
        .sum()
}

#[test]
fn midpoint_weight_conserves_the_linear_invariant() {
    let p = params();
    let nl = Nonlinearity::Custom(Arc::new(Linear));
    let w = random_state(32, 20.0, 11);
    let q0 = quadratic_invariant(&w, &p);
    let run = |theta| {
        let cfg = PropagationConfig {
            dt: 1e-2,
            t_final: 100.0,
            theta,
            snapshot_stride: 0,
        };
        quadratic_invariant(&propagate(&w, &p, &nl, &cfg).unwrap().final_state, &p)
    };
    let mid = run(0.5);
    assert!((mid - q0).abs() < 1e-10 * q0.abs(), "{mid} vs {q0}");
    // The invariant is negative definite: backward weighting damps it,
    // forward weighting amplifies it.
    assert!(q0 < 0.0);
    assert!(run(1.0).abs() < q0.abs());
    assert!(run(0.0).abs() > q0.abs());
}

#[test]
fn mean_is_conserved_by_the_nonlinear_flow() {
    let p = params();
    let nl = Nonlinearity::power(1).unwrap();
    let w = random_state(64, 30.0, 3).scaled(0.2);
    let cfg = PropagationConfig {
        dt: 1e-2,
        t_final: 5.0,
        theta: 0.5,
        snapshot_stride: 0,
    };
    let end = propagate(&w, &p, &nl, &cfg).unwrap().final_state;
    let mean = |f: &[f64]| f.iter().sum::<f64>() / f.len() as f64;
    assert!((mean(end.psi()) - mean(w.psi())).abs() < 1e-13);
    assert!((mean(end.v()) - mean(w.v())).abs() < 1e-13);
}

#[test]
fn zero_duration_has_zero_translation_error() {
    let grid = Grid::new(50.0, 256).unwrap();
    let g = grid.sample(|x| (-(x - 25.0).powi(2)).exp());
    let w = WaveProfile::new(grid, g.clone(), g).unwrap();
    let cfg = PropagationConfig {
        dt: 1e-3,
        t_final: 0.0,
        theta: 0.5,
        snapshot_stride: 0,
    };
    let run = propagate(&w, &params(), &Nonlinearity::power(1).unwrap(), &cfg).unwrap();
    let err = verify_translation(&run.final_state, &w, 0.3, 0.0).unwrap();
    assert!(err.max_l2() <= 1e-12 && err.err_inf_u <= 1e-12 && err.err_inf_eta <= 1e-12);
}
