//! Hopf-Hopf points as crossings of the `tau^+` and `tau^-` Hopf branches.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chareq::{
    check_hypotheses, eval_char, hopf_branch, hopf_frequencies, BranchSign, SystemParams,
};
use crate::{Error, Result};

/// Number of scan intervals used to bracket sign changes of the gap function.
pub const SCAN_POINTS: usize = 400;
/// Default tolerance on the frequency ratio for the resonance test.
pub const RESONANCE_TOL: f64 = 1e-3;

const GAP_TOL: f64 = 1e-10;

/// Critical `(k0, tau0)` with the two frequencies and the branch indices of
/// the crossing curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfHopfPoint {
    pub k0: f64,
    pub tau0: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub j_plus: u32,
    pub j_minus: u32,
}

impl HopfHopfPoint {
    pub fn params(&self, epsilon: f64, mu: f64) -> SystemParams {
        SystemParams {
            epsilon,
            mu,
            k: self.k0,
            tau: self.tau0,
        }
    }

    /// Largest `|char(i omega)|` over both frequencies at the point.
    pub fn residual(&self, epsilon: f64, mu: f64) -> f64 {
        let p = self.params(epsilon, mu);
        [self.omega1, self.omega2]
            .iter()
            .map(|&w| eval_char(Complex64::new(0.0, w), &p).norm())
            .fold(0.0, f64::max)
    }
}

/// `tau_{j_plus}^+(k) - tau_{j_minus}^-(k)`.
pub fn branch_gap(epsilon: f64, mu: f64, j_plus: u32, j_minus: u32, k: f64) -> Result<f64> {
    let plus = hopf_branch(epsilon, mu, k, BranchSign::Plus)?;
    let minus = hopf_branch(epsilon, mu, k, BranchSign::Minus)?;
    Ok(plus.tau_j(j_plus) - minus.tau_j(j_minus))
}

fn admissible(epsilon: f64, mu: f64, k: f64) -> Result<()> {
    let h = check_hypotheses(epsilon, mu, k);
    if h.both() {
        Ok(())
    } else {
        Err(Error::HypothesisViolated {
            k,
            h1: h.h1,
            h2: h.h2,
        })
    }
}

/// Locates the Hopf-Hopf point in `[k_lo, k_hi]` by scanning the gap function
/// and bisecting the first genuine sign change.
///
/// Sign changes caused by the `2 pi` wrap of a branch angle are jumps rather
/// than roots and are skipped.
pub fn find_hopf_hopf(
    epsilon: f64,
    mu: f64,
    j_plus: u32,
    j_minus: u32,
    k_lo: f64,
    k_hi: f64,
) -> Result<HopfHopfPoint> {
    if !(k_lo < k_hi) {
        return Err(Error::InvalidParams(format!(
            "empty bracket [{k_lo}, {k_hi}]"
        )));
    }
    let gap = |k: f64| branch_gap(epsilon, mu, j_plus, j_minus, k);
    let ks: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| k_lo + (k_hi - k_lo) * i as f64 / SCAN_POINTS as f64)
        .collect();
    for &k in &ks {
        admissible(epsilon, mu, k)?;
    }
    let gs = ks.iter().map(|&k| gap(k)).collect::<Result<Vec<_>>>()?;

    for i in 0..SCAN_POINTS {
        let (mut a, mut b) = (ks[i], ks[i + 1]);
        let (mut ga, gb) = (gs[i], gs[i + 1]);
        if ga == 0.0 {
            return finish(epsilon, mu, j_plus, j_minus, a);
        }
        if ga.signum() == gb.signum() {
            continue;
        }
        let mut root = 0.5 * (a + b);
        for _ in 0..200 {
            root = 0.5 * (a + b);
            let gm = gap(root)?;
            if gm.abs() < GAP_TOL && (b - a) < 1e-13 * root.abs().max(1.0) {
                break;
            }
            if gm == 0.0 {
                break;
            }
            if gm.signum() == ga.signum() {
                a = root;
                ga = gm;
            } else {
                b = root;
            }
            if b - a <= f64::EPSILON * root.abs().max(1.0) {
                break;
            }
        }
        if gap(root)?.abs() < GAP_TOL {
            return finish(epsilon, mu, j_plus, j_minus, root);
        }
    }
    Err(Error::NoSignChange { lo: k_lo, hi: k_hi })
}

fn finish(epsilon: f64, mu: f64, j_plus: u32, j_minus: u32, k0: f64) -> Result<HopfHopfPoint> {
    let freqs = hopf_frequencies(epsilon, mu, k0)?;
    let tau0 = hopf_branch(epsilon, mu, k0, BranchSign::Plus)?.tau_j(j_plus);
    Ok(HopfHopfPoint {
        k0,
        tau0,
        omega1: freqs.omega_minus,
        omega2: freqs.omega_plus,
        j_plus,
        j_minus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub nonresonant: bool,
    pub ratio: f64,
    /// Closest low-order resonance `(p, q)`, either `(1, 2)` or `(1, 3)`.
    pub nearest_ratio: (u32, u32),
}

pub fn resonance_check(omega1: f64, omega2: f64, tol: f64) -> Resonance {
    debug_assert!(0.0 < omega1 && omega1 < omega2);
    let ratio = omega1 / omega2;
    let d2 = (ratio - 0.5).abs();
    let d3 = (ratio - 1.0 / 3.0).abs();
    Resonance {
        nonresonant: d2 > tol && d3 > tol,
        ratio,
        nearest_ratio: if d2 <= d3 { (1, 2) } else { (1, 3) },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub sign: BranchSign,
    pub j: u32,
    pub k: f64,
    pub tau: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    /// Grid values of `k` that fail H1 or H2.
    pub skipped: Vec<f64>,
}

/// Hopf delays `tau_j^+-(k)` on a grid of `k`, ordered by `(j, sign, k)`.
pub fn scan_hopf_curves(epsilon: f64, mu: f64, ks: &[f64], j_max: u32) -> CurveTable {
    let per_k: Vec<(f64, Option<[(f64, f64, f64); 2]>)> = ks
        .par_iter()
        .map(|&k| {
            let branches = hopf_branch(epsilon, mu, k, BranchSign::Plus)
                .and_then(|p| Ok((p, hopf_branch(epsilon, mu, k, BranchSign::Minus)?)));
            match branches {
                Ok((p, m)) => (
                    k,
                    Some([
                        (p.tau0, p.period_step, p.omega),
                        (m.tau0, m.period_step, m.omega),
                    ]),
                ),
                Err(_) => (k, None),
            }
        })
        .collect();

    let mut table = CurveTable::default();
    for &(k, ref b) in &per_k {
        if b.is_none() {
            table.skipped.push(k);
        }
    }
    for j in 0..=j_max {
        for (idx, sign) in [BranchSign::Plus, BranchSign::Minus]
            .into_iter()
            .enumerate()
        {
            for &(k, ref b) in &per_k {
                if let Some(b) = b {
                    let (tau0, step, omega) = b[idx];
                    table.rows.push(CurveRow {
                        sign,
                        j,
                        k,
                        tau: tau0 + j as f64 * step,
                        omega,
                    });
                }
            }
        }
    }
    table
}

/// Evenly spaced grid `lo, lo + step, ..., <= hi` (inclusive up to rounding).
pub fn k_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || hi < lo {
        return Vec::new();
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chareq::transversality_sign;

    const EPS: f64 = 0.1;
    const MU: f64 = 0.5;

    #[test]
    fn reference_point() {
        let hh = find_hopf_hopf(EPS, MU, 1, 1, 4.5, 5.2).unwrap();
        assert!((hh.k0 - 4.834585253).abs() < 1e-6, "{hh:?}");
        assert!((hh.tau0 - 8.815987316).abs() < 1e-6);
        assert!((hh.omega1 - 0.7307969965).abs() < 1e-7);
        assert!((hh.omega2 - 0.9007354676).abs() < 1e-7);
        assert!(hh.residual(EPS, MU) < 1e-9);
    }

    #[test]
    fn bracket_refinement_invariance() {
        let a = find_hopf_hopf(EPS, MU, 1, 1, 4.5, 5.2).unwrap();
        let b = find_hopf_hopf(EPS, MU, 1, 1, 4.7, 4.95).unwrap();
        assert!((a.k0 - b.k0).abs() < 1e-9);
    }

    #[test]
    fn empty_bracket_has_no_sign_change() {
        assert!(matches!(
            find_hopf_hopf(EPS, MU, 1, 1, 4.0, 4.2),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn bracket_outside_region() {
        assert!(matches!(
            find_hopf_hopf(EPS, MU, 1, 1, 2.0, 5.0),
            Err(Error::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn opposite_transversality_at_point() {
        let hh = find_hopf_hopf(EPS, MU, 1, 1, 4.5, 5.2).unwrap();
        assert_eq!(
            transversality_sign(EPS, MU, hh.k0, BranchSign::Plus).unwrap(),
            1
        );
        assert_eq!(
            transversality_sign(EPS, MU, hh.k0, BranchSign::Minus).unwrap(),
            -1
        );
    }

    #[test]
    fn resonance() {
        let r = resonance_check(0.7307969965, 0.9007354676, RESONANCE_TOL);
        assert!(r.nonresonant);
        assert!((r.ratio - 0.811334).abs() < 1e-6);
        let r = resonance_check(1.0, 2.0, RESONANCE_TOL);
        assert!(!r.nonresonant);
        assert_eq!(r.nearest_ratio, (1, 2));
        let r = resonance_check(1.0, 3.0005, RESONANCE_TOL);
        assert!(!r.nonresonant);
        assert_eq!(r.nearest_ratio, (1, 3));
    }

    #[test]
    fn resonance_flips_once_in_detuning() {
        let omega = 1.3;
        let mut prev = resonance_check(omega, 2.0 * omega, RESONANCE_TOL).nonresonant;
        let mut flips = 0;
        for i in 1..400 {
            let delta = i as f64 * 2e-5;
            let cur = resonance_check(omega, 2.0 * omega - delta, RESONANCE_TOL).nonresonant;
            if cur != prev {
                flips += 1;
            }
            prev = cur;
        }
        assert_eq!(flips, 1);
    }

    #[test]
    fn curve_scan() {
        let ks = k_grid(3.0, 6.0, 0.01);
        assert_eq!(ks.len(), 301);
        let table = scan_hopf_curves(EPS, MU, &ks, 3);
        assert!(table.skipped.is_empty());
        assert_eq!(table.rows.len(), 301 * 2 * 4);
        for r in &table.rows {
            let p = SystemParams {
                epsilon: EPS,
                mu: MU,
                k: r.k,
                tau: r.tau,
            };
            assert!(eval_char(Complex64::new(0.0, r.omega), &p).norm() < 1e-9);
        }
        // nearest crossing of the j = 1 branches sits next to (4.83, 8.82)
        let plus: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.j == 1 && r.sign == BranchSign::Plus)
            .collect();
        let minus: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.j == 1 && r.sign == BranchSign::Minus)
            .collect();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for (p, m) in plus.iter().zip(&minus) {
            let d = (p.tau - m.tau).abs();
            if d < best.0 {
                best = (d, p.k, p.tau);
            }
        }
        assert!(
            (best.1 - 4.83).abs() <= 0.01 && (best.2 - 8.82).abs() < 0.05,
            "{best:?}"
        );
        assert!(scan_hopf_curves(EPS, MU, &[], 3).rows.is_empty());
    }

    #[test]
    fn scan_flags_inadmissible_k() {
        let table = scan_hopf_curves(EPS, MU, &[1.0, 4.0], 0);
        assert_eq!(table.skipped, vec![1.0]);
        assert_eq!(table.rows.len(), 2);
    }
}
