//! The bifurcation report written by `analyze` and read back by `simulate`.

use hopf_nfde::hopf_hopf::{find_hopf_hopf, resonance_check, HopfHopfPoint, RESONANCE_TOL};
use hopf_nfde::normalform::{
    duality_residual, eigenbasis, nf_coefficients, unfolding_params, via_lines, UnfoldingCase,
    UnfoldingParams, ViaLines,
};
use hopf_nfde::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCoefficient {
    pub name: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineReport {
    pub name: String,
    pub slope: f64,
    pub angle: f64,
    pub alpha_dir: [f64; 2],
    pub c_dir: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub epsilon: f64,
    pub mu: f64,
    pub j_plus: u32,
    pub j_minus: u32,
    pub k0: f64,
    pub tau0: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub hopf_residual: f64,
    pub ratio: f64,
    pub nonresonant: bool,
    pub nearest_resonance: (u32, u32),
    pub duality_residual: f64,
    pub coefficients: Vec<NamedCoefficient>,
    pub eps1: i8,
    pub eps2: i8,
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
    pub det: f64,
    pub c1_map: [f64; 2],
    pub c2_map: [f64; 2],
    /// `null` when a sign quantity sits on a classification boundary.
    pub case: Option<String>,
    /// The eight half-lines of case VIa; empty for other cases.
    pub lines: Vec<LineReport>,
}

impl AnalyzeReport {
    pub fn hopf_hopf(&self) -> HopfHopfPoint {
        HopfHopfPoint {
            k0: self.k0,
            tau0: self.tau0,
            omega1: self.omega1,
            omega2: self.omega2,
            j_plus: self.j_plus,
            j_minus: self.j_minus,
        }
    }

    pub fn unfolding(&self) -> UnfoldingParams {
        UnfoldingParams {
            eps1: self.eps1,
            eps2: self.eps2,
            b0: self.b0,
            c0: self.c0,
            d0: self.d0,
            det: self.det,
            c1_map: self.c1_map,
            c2_map: self.c2_map,
            case: UnfoldingCase::ALL
                .iter()
                .copied()
                .find(|c| Some(c.as_str()) == self.case.as_deref()),
        }
    }

    pub fn lines(&self) -> Option<ViaLines> {
        via_lines(&self.unfolding()).ok()
    }
}

/// Normal form, unfolding and bifurcation lines at a given Hopf-Hopf point.
pub fn build_report(hh: &HopfHopfPoint, epsilon: f64, mu: f64) -> Result<AnalyzeReport> {
    let res = resonance_check(hh.omega1, hh.omega2, RESONANCE_TOL);
    let basis = eigenbasis(hh, epsilon, mu)?;
    let coeffs = nf_coefficients(hh, epsilon, mu)?;
    let u = unfolding_params(&coeffs)?;
    let lines = match via_lines(&u) {
        Ok(l) => l
            .lines
            .iter()
            .map(|l| LineReport {
                name: l.name(),
                slope: l.slope,
                angle: l.angle(),
                alpha_dir: l.alpha_dir,
                c_dir: l.c_dir,
            })
            .collect(),
        Err(Error::WrongCase(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    Ok(AnalyzeReport {
        epsilon,
        mu,
        j_plus: hh.j_plus,
        j_minus: hh.j_minus,
        k0: hh.k0,
        tau0: hh.tau0,
        omega1: hh.omega1,
        omega2: hh.omega2,
        hopf_residual: hh.residual(epsilon, mu),
        ratio: res.ratio,
        nonresonant: res.nonresonant,
        nearest_resonance: res.nearest_ratio,
        duality_residual: duality_residual(&basis),
        coefficients: coeffs
            .named()
            .iter()
            .map(|(name, c)| NamedCoefficient {
                name: name.to_string(),
                re: c.re,
                im: c.im,
            })
            .collect(),
        eps1: u.eps1,
        eps2: u.eps2,
        b0: u.b0,
        c0: u.c0,
        d0: u.d0,
        det: u.det,
        c1_map: u.c1_map,
        c2_map: u.c2_map,
        case: u.case.map(|c| c.as_str().to_string()),
        lines,
    })
}

pub fn analyze(
    epsilon: f64,
    mu: f64,
    j_plus: u32,
    j_minus: u32,
    bracket: (f64, f64),
) -> Result<AnalyzeReport> {
    let hh = find_hopf_hopf(epsilon, mu, j_plus, j_minus, bracket.0, bracket.1)?;
    build_report(&hh, epsilon, mu)
}
