//! Characteristic equation of the linearization at the trivial equilibrium.
//!
//! All delays and frequencies here are in original (unscaled) time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `|W'(rho)|` below which the two Hopf frequencies collide.
pub const DEGENERATE_ROOT_TOL: f64 = 1e-10;

const NEWTON_MAX_ITER: usize = 60;
const NEWTON_TOL: f64 = 1e-12;
const DEDUP_RADIUS: f64 = 1e-7;
const ROOT_ACCEPT: f64 = 1e-10;

/// The four scalars of the oscillator: damping `epsilon`, memory weight `mu`,
/// feedback gain `k` and delay `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub epsilon: f64,
    pub mu: f64,
    pub k: f64,
    pub tau: f64,
}

impl SystemParams {
    pub fn new(epsilon: f64, mu: f64, k: f64, tau: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            mu,
            k,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidParams(format!(
                "mu must lie in (0, 1), got {}",
                self.mu
            )));
        }
        if !self.k.is_finite() {
            return Err(Error::InvalidParams("k must be finite".into()));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParams(format!(
                "tau must be nonnegative, got {}",
                self.tau
            )));
        }
        Ok(())
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }
}

/// Characteristic function
/// `lambda^2 - mu lambda^2 e^{-lambda tau} - eps lambda + eps mu lambda e^{-lambda tau}
///  - mu e^{-lambda tau} + 1 - eps k (1 - mu)`.
pub fn eval_char(lambda: Complex64, p: &SystemParams) -> Complex64 {
    let e = (-lambda * p.tau).exp();
    let one_minus = Complex64::new(1.0, 0.0) - p.mu * e;
    lambda * lambda * one_minus - p.epsilon * lambda * one_minus - p.mu * e
        + (1.0 - p.epsilon * p.k * (1.0 - p.mu))
}

/// Derivative of [`eval_char`] with respect to `lambda`.
pub fn eval_char_deriv(lambda: Complex64, p: &SystemParams) -> Complex64 {
    let e = (-lambda * p.tau).exp();
    let one_minus = Complex64::new(1.0, 0.0) - p.mu * e;
    let mte = p.mu * p.tau * e;
    2.0 * lambda * one_minus + lambda * lambda * mte
        - p.epsilon * one_minus
        - p.epsilon * lambda * mte
        + mte
}

/// Quadratic `W(rho) = a rho^2 + b rho + c` whose positive roots are the
/// squared Hopf frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WPoly {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl WPoly {
    pub fn eval(&self, rho: f64) -> f64 {
        (self.a * rho + self.b) * rho + self.c
    }

    pub fn deriv(&self, rho: f64) -> f64 {
        2.0 * self.a * rho + self.b
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }
}

pub fn w_poly(epsilon: f64, mu: f64, k: f64) -> WPoly {
    let a = 1.0 + mu;
    let b = 2.0 * epsilon * k - 2.0 * (1.0 + mu) + epsilon * epsilon * (1.0 + mu);
    let c = epsilon * epsilon * k * k * (1.0 - mu) - 2.0 * epsilon * k + 1.0 + mu;
    WPoly { a, b, c }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub h1: bool,
    pub h2: bool,
}

impl Hypotheses {
    pub fn both(&self) -> bool {
        self.h1 && self.h2
    }
}

/// Upper bound on `k` required by H1.
pub fn h1_bound(epsilon: f64, mu: f64) -> f64 {
    (1.0 / epsilon).min((1.0 + mu) / epsilon - epsilon * (1.0 + mu) / 2.0)
}

pub fn check_hypotheses(epsilon: f64, mu: f64, k: f64) -> Hypotheses {
    Hypotheses {
        h1: k < h1_bound(epsilon, mu),
        h2: w_poly(epsilon, mu, k).discriminant() > 0.0,
    }
}

/// The two Hopf frequencies `0 < omega_minus < omega_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfFrequencies {
    pub omega_minus: f64,
    pub omega_plus: f64,
}

impl HopfFrequencies {
    pub fn get(&self, sign: BranchSign) -> f64 {
        match sign {
            BranchSign::Plus => self.omega_plus,
            BranchSign::Minus => self.omega_minus,
        }
    }
}

pub fn hopf_frequencies(epsilon: f64, mu: f64, k: f64) -> Result<HopfFrequencies> {
    let hyp = check_hypotheses(epsilon, mu, k);
    if !hyp.both() {
        return Err(Error::HypothesisViolated {
            k,
            h1: hyp.h1,
            h2: hyp.h2,
        });
    }
    let w = w_poly(epsilon, mu, k);
    let sq = w.discriminant().sqrt();
    // Stable quadratic roots: the larger by the direct formula (b < 0 under
    // H1), the smaller through the product of roots.
    let rho_plus = (-w.b + sq) / (2.0 * w.a);
    let rho_minus = w.c / (w.a * rho_plus);
    if !(rho_minus > 0.0) {
        return Err(Error::HypothesisViolated {
            k,
            h1: hyp.h1,
            h2: hyp.h2,
        });
    }
    Ok(HopfFrequencies {
        omega_minus: rho_minus.sqrt(),
        omega_plus: rho_plus.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchSign::Plus => "plus",
            BranchSign::Minus => "minus",
        }
    }
}

impl std::fmt::Display for BranchSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// First Hopf delay of one frequency branch and its spacing `2 pi / omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfBranch {
    pub sign: BranchSign,
    pub omega: f64,
    pub tau0: f64,
    pub period_step: f64,
}

impl HopfBranch {
    pub fn tau_j(&self, j: u32) -> f64 {
        self.tau0 + j as f64 * self.period_step
    }
}

/// `(cos(omega tau), sin(omega tau))` forced by `lambda = i omega` being a root.
pub fn cos_sin_rhs(epsilon: f64, mu: f64, k: f64, omega: f64) -> (f64, f64) {
    let p = mu * omega * omega - mu;
    let q = epsilon * mu * omega;
    let r = omega * omega - 1.0 + epsilon * k * (1.0 - mu);
    let s = epsilon * omega;
    let den = p * p + q * q;
    ((p * r + q * s) / den, (-p * s + q * r) / den)
}

pub fn hopf_branch(epsilon: f64, mu: f64, k: f64, sign: BranchSign) -> Result<HopfBranch> {
    let freqs = hopf_frequencies(epsilon, mu, k)?;
    let omega = freqs.get(sign);
    let (cos_rhs, sin_rhs) = cos_sin_rhs(epsilon, mu, k, omega);
    // arccos of the cosine line, reflected to 2 pi - theta when the sine line
    // is negative; atan2 gives the same angle without arccos's loss of
    // precision near cos = +-1.
    let mut angle = sin_rhs.atan2(cos_rhs);
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    if angle >= 2.0 * PI {
        angle -= 2.0 * PI;
    }
    Ok(HopfBranch {
        sign,
        omega,
        tau0: angle / omega,
        period_step: 2.0 * PI / omega,
    })
}

/// Delay `tau_j^sign` at which `+- i omega_sign` lie on the spectrum.
pub fn tau_branch(epsilon: f64, mu: f64, k: f64, sign: BranchSign, j: u32) -> Result<f64> {
    Ok(hopf_branch(epsilon, mu, k, sign)?.tau_j(j))
}

/// Sign of `Re d lambda / d tau` at the crossing, i.e. the sign of `W'(omega^2)`.
pub fn transversality_sign(epsilon: f64, mu: f64, k: f64, sign: BranchSign) -> Result<i8> {
    let freqs = hopf_frequencies(epsilon, mu, k)?;
    let omega = freqs.get(sign);
    let d = w_poly(epsilon, mu, k).deriv(omega * omega);
    if d.abs() < DEGENERATE_ROOT_TOL {
        return Err(Error::DegenerateRoot(d.abs()));
    }
    Ok(if d > 0.0 { 1 } else { -1 })
}

/// Delay intervals on which the trivial equilibrium is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityWindows {
    pub windows: Vec<(f64, f64)>,
}

impl StabilityWindows {
    /// Index of the last window, `None` when the equilibrium is never stable.
    pub fn m(&self) -> Option<usize> {
        self.windows.len().checked_sub(1)
    }

    pub fn contains(&self, tau: f64) -> bool {
        self.windows.iter().any(|&(lo, hi)| lo < tau && tau < hi)
    }
}

pub fn stability_windows(epsilon: f64, mu: f64, k: f64) -> Result<StabilityWindows> {
    let plus = hopf_branch(epsilon, mu, k, BranchSign::Plus)?;
    let minus = hopf_branch(epsilon, mu, k, BranchSign::Minus)?;
    let mut windows = Vec::new();
    // tau_j^- grows faster than tau_j^+, so the ordering fails after finitely many j.
    for j in 0.. {
        let lo = minus.tau_j(j);
        let hi = plus.tau_j(j);
        if lo >= hi {
            break;
        }
        windows.push((lo, hi));
    }
    Ok(StabilityWindows { windows })
}

fn newton(p: &SystemParams, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..NEWTON_MAX_ITER {
        let f = eval_char(z, p);
        if !f.re.is_finite() || !f.im.is_finite() {
            return None;
        }
        if f.norm() < NEWTON_TOL {
            return Some(z);
        }
        let df = eval_char_deriv(z, p);
        if df.norm() == 0.0 {
            return None;
        }
        z -= f / df;
    }
    let f = eval_char(z, p);
    (f.norm() < ROOT_ACCEPT).then_some(z)
}

/// Roots of the characteristic function in `[re_min, re_max] x [-im_max, im_max]`,
/// found by Newton iteration from a `grid_n x grid_n` grid of seeds.
///
/// Completeness is not certified; seeds that do not converge are dropped.
/// Returned roots are sorted by decreasing real part, then by imaginary part.
pub fn rightmost_roots(
    p: &SystemParams,
    re_min: f64,
    re_max: f64,
    im_max: f64,
    grid_n: usize,
) -> Vec<Complex64> {
    assert!(re_min < re_max && im_max > 0.0 && grid_n >= 4);
    let edge = 1e-9;
    let mut roots: Vec<Complex64> = Vec::new();
    for i in 0..grid_n {
        let re = re_min + (re_max - re_min) * i as f64 / (grid_n - 1) as f64;
        for j in 0..grid_n {
            let im = -im_max + 2.0 * im_max * j as f64 / (grid_n - 1) as f64;
            let Some(z) = newton(p, Complex64::new(re, im)) else {
                continue;
            };
            if eval_char(z, p).norm() >= ROOT_ACCEPT {
                continue;
            }
            if z.re < re_min - edge || z.re > re_max + edge || z.im.abs() > im_max + edge {
                continue;
            }
            if roots.iter().all(|r| (r - z).norm() > DEDUP_RADIUS) {
                roots.push(z);
            }
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Largest real part among the roots found by [`rightmost_roots`].
pub fn spectral_abscissa(
    p: &SystemParams,
    re_min: f64,
    re_max: f64,
    im_max: f64,
    grid_n: usize,
) -> Option<f64> {
    rightmost_roots(p, re_min, re_max, im_max, grid_n)
        .first()
        .map(|z| z.re)
}
