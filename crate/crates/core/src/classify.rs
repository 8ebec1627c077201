//! Attractor labels from Poincaré sections, plus the fixed simulation
//! protocols used to label points of the `alpha` plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chareq::SystemParams;
use crate::hopf_hopf::HopfHopfPoint;
use crate::sim::{
    divergence_exponent, poincare, simulate, Crossing, DelayScheme, Direction, Formulation,
    PoincareSection, SimConfig, Trajectory,
};
use crate::{Error, Result};

/// Minimum number of crossings for a non-equilibrium label.
pub const MIN_CROSSINGS: usize = 200;
/// Crossings used by the fixed-point test.
pub const TAIL: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionClass {
    EquilibriumLike,
    /// Periodic orbit.
    FixedPoint,
    /// 2-torus.
    ClosedCurve,
    /// 3-torus.
    CurveFamily,
    /// Chaotic candidate.
    Scattered,
}

impl SectionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EquilibriumLike => "equilibrium_like",
            Self::FixedPoint => "fixed_point",
            Self::ClosedCurve => "closed_curve",
            Self::CurveFamily => "curve_family",
            Self::Scattered => "scattered",
        }
    }
}

impl std::fmt::Display for SectionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Radius around the mean for the fixed-point test.
    pub tol_point: f64,
    /// Largest nearest-neighbour ratio (all points over every other point)
    /// still counted as a curve.
    pub tol_curve: f64,
    /// Largest median radial thickness (relative to the radius) of a
    /// single loop around the centroid.
    pub tol_loop: f64,
    /// Divergence exponents at or below this count as zero. Finite-horizon
    /// estimates on tori, cycles and slow transients of this system reach
    /// about `1e-3`.
    pub zero_exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_point: 1e-4,
            tol_curve: 0.7,
            tol_loop: 0.35,
            zero_exponent: 2e-3,
        }
    }
}

/// Numbers behind a label.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionStats {
    pub crossings: usize,
    /// Slope of `ln |(x, y_delayed)|` against time over the crossings used.
    pub decay_rate: Option<f64>,
    /// Largest distance of the last [`TAIL`] crossings from their mean.
    pub spread: Option<f64>,
    pub nn_ratio: Option<f64>,
    pub loop_shape: Option<LoopShape>,
    pub divergence: Option<f64>,
}

/// How well the points trace one loop around their centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopShape {
    /// Fraction of the angular bins around the centroid that hold a point.
    pub coverage: f64,
    /// Median over bins of the radial extent divided by the median radius.
    pub thickness: f64,
}

const ANGLE_BINS: usize = 36;

pub fn loop_shape(cs: &[Crossing]) -> Option<LoopShape> {
    if cs.is_empty() {
        return None;
    }
    let n = cs.len() as f64;
    let cx = cs.iter().map(|c| c.x).sum::<f64>() / n;
    let cy = cs.iter().map(|c| c.y_delayed).sum::<f64>() / n;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); ANGLE_BINS];
    for c in cs {
        let (dx, dy) = (c.x - cx, c.y_delayed - cy);
        let a = (dy.atan2(dx) + std::f64::consts::PI) / std::f64::consts::TAU;
        let b = ((a * ANGLE_BINS as f64) as usize).min(ANGLE_BINS - 1);
        bins[b].push(dx.hypot(dy));
    }
    let coverage = bins.iter().filter(|b| !b.is_empty()).count() as f64 / ANGLE_BINS as f64;
    let mut rel: Vec<f64> = bins
        .iter_mut()
        .filter(|b| b.len() >= 3)
        .map(|b| {
            b.sort_by(f64::total_cmp);
            (b[b.len() - 1] - b[0]) / b[b.len() / 2]
        })
        .collect();
    if rel.is_empty() {
        return None;
    }
    rel.sort_by(f64::total_cmp);
    Some(LoopShape {
        coverage,
        thickness: rel[rel.len() / 2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: SectionClass,
    pub stats: SectionStats,
}

/// Crossings of the better populated direction (upward on ties).
pub fn same_direction(sec: &PoincareSection) -> Vec<Crossing> {
    let up = sec.filter(true);
    let down = sec.filter(false);
    if down.len() > up.len() {
        down
    } else {
        up
    }
}

fn norm(c: &Crossing) -> f64 {
    c.x.hypot(c.y_delayed)
}

fn fit_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stv: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let slope = stv / stt;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - mv - slope * (p.0 - mt)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// Log-linear decay of the crossing norms: negative slope over the whole
/// set and over both halves at comparable rates, with the total drop well
/// above the scatter.
fn decay_rate(cs: &[Crossing]) -> Option<(f64, bool)> {
    let pts: Vec<(f64, f64)> = cs
        .iter()
        .filter(|c| norm(c) > 0.0)
        .map(|c| (c.t, norm(c).ln()))
        .collect();
    if pts.len() < 5 {
        return None;
    }
    let (slope, rms) = fit_slope(&pts);
    let span = pts[pts.len() - 1].0 - pts[0].0;
    let half = pts.len() / 2;
    let (s1, _) = fit_slope(&pts[..half.max(2)]);
    let (s2, _) = fit_slope(&pts[half.min(pts.len() - 2)..]);
    let drop = -slope * span;
    let decaying = slope < 0.0
        && s1 < 0.0
        && s2 < 0.0
        && (0.5..=2.0).contains(&(s2 / s1))
        && drop > 1e-3
        && drop > 5.0 * rms;
    Some((slope, decaying))
}

fn spread(cs: &[Crossing]) -> f64 {
    let n = cs.len() as f64;
    let mx = cs.iter().map(|c| c.x).sum::<f64>() / n;
    let my = cs.iter().map(|c| c.y_delayed).sum::<f64>() / n;
    cs.iter()
        .map(|c| (c.x - mx).hypot(c.y_delayed - my))
        .fold(0.0, f64::max)
}

fn mean_nn(pts: &[(f64, f64)]) -> f64 {
    let total: f64 = pts
        .iter()
        .enumerate()
        .map(|(i, a)| {
            pts.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| (a.0 - b.0).hypot(a.1 - b.1))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / pts.len() as f64
}

/// Mean nearest-neighbour distance of all points, and its ratio to that of
/// every other point. The ratio is near `0.5` for points filling a curve
/// and near `0.71` for an area.
pub fn nn_ratio(cs: &[Crossing]) -> Option<(f64, f64)> {
    if cs.len() < 8 {
        return None;
    }
    let all: Vec<(f64, f64)> = cs.iter().map(|c| (c.x, c.y_delayed)).collect();
    let half: Vec<(f64, f64)> = all.iter().copied().step_by(2).collect();
    let (d_all, d_half) = (mean_nn(&all), mean_nn(&half));
    let ratio = if d_half > 0.0 { d_all / d_half } else { 1.0 };
    Some((d_all, ratio))
}

/// Labels a section.
///
/// The tests run in order: decaying crossing norms give
/// [`SectionClass::EquilibriumLike`]; the last [`TAIL`] same-direction
/// crossings within `tol_point` of their mean (or a section that repeats a
/// finite set of points) give [`SectionClass::FixedPoint`]; a
/// nearest-neighbour ratio below `tol_curve` together with a single thin
/// loop around the centroid gives [`SectionClass::ClosedCurve`]. Anything
/// else (several loops, open arcs, area-filling sets) is split by the
/// divergence exponent, which is only evaluated in that case.
pub fn classify_section<F>(
    sec: &PoincareSection,
    tol: &Tolerances,
    divergence: F,
) -> Result<Classification>
where
    F: FnOnce() -> Result<f64>,
{
    let cs = same_direction(sec);
    let mut stats = SectionStats {
        crossings: sec.len(),
        ..Default::default()
    };
    let done = |class, stats| Ok(Classification { class, stats });
    if cs.len() < 5 {
        let monotone = cs.windows(2).all(|w| norm(&w[1]) <= norm(&w[0]));
        return if monotone {
            done(SectionClass::EquilibriumLike, stats)
        } else {
            Err(Error::InsufficientData(format!(
                "{} crossings and no decay",
                sec.len()
            )))
        };
    }
    if let Some((rate, decaying)) = decay_rate(&cs) {
        stats.decay_rate = Some(rate);
        if decaying {
            return done(SectionClass::EquilibriumLike, stats);
        }
    }
    if sec.len() < MIN_CROSSINGS || cs.len() < TAIL {
        return Err(Error::InsufficientData(format!(
            "{} crossings, need {MIN_CROSSINGS}",
            sec.len()
        )));
    }
    let sp = spread(&cs[cs.len() - TAIL..]);
    stats.spread = Some(sp);
    if sp < tol.tol_point {
        return done(SectionClass::FixedPoint, stats);
    }
    if let Some((d_all, ratio)) = nn_ratio(&cs) {
        stats.nn_ratio = Some(ratio);
        if d_all < tol.tol_point {
            // finitely many repeated points: a periodic orbit with several passes
            return done(SectionClass::FixedPoint, stats);
        }
        stats.loop_shape = loop_shape(&cs);
        let single_loop = stats
            .loop_shape
            .is_some_and(|l| l.coverage >= 0.9 && l.thickness < tol.tol_loop);
        if ratio < tol.tol_curve && single_loop {
            return done(SectionClass::ClosedCurve, stats);
        }
    }
    let lambda = divergence()?;
    stats.divergence = Some(lambda);
    if lambda > tol.zero_exponent {
        done(SectionClass::Scattered, stats)
    } else {
        done(SectionClass::CurveFamily, stats)
    }
}

/// Mean spacing of the last [`TAIL`] same-direction crossings.
pub fn observed_period(sec: &PoincareSection) -> Option<f64> {
    let cs = same_direction(sec);
    if cs.len() < 2 {
        return None;
    }
    let tail = &cs[cs.len().saturating_sub(TAIL)..];
    Some((tail[tail.len() - 1].t - tail[0].t) / (tail.len() - 1) as f64)
}

/// Initial data, step and horizons of a labelled run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub x0: f64,
    pub y0: f64,
    pub steps_per_delay: usize,
    pub t_end: f64,
    pub transient: f64,
    pub formulation: Formulation,
    pub scheme: DelayScheme,
    pub delta0: f64,
    pub renorm_t: f64,
}

impl Protocol {
    /// Single points of the `alpha` plane.
    pub const POINT: Self = Self {
        x0: 0.1,
        y0: 0.0,
        steps_per_delay: 2000,
        t_end: 6000.0,
        transient: 3000.0,
        formulation: Formulation::Theta,
        scheme: DelayScheme::Hermite,
        delta0: 1e-9,
        renorm_t: 50.0,
    };

    /// Points on the line `alpha = iota (0.1, 0.081)`.
    pub const LINE_T: Self = Self {
        t_end: 12000.0,
        transient: 8000.0,
        ..Self::POINT
    };

    pub fn config(&self, params: SystemParams) -> SimConfig {
        SimConfig::new(params, self.x0, self.y0, self.steps_per_delay, self.t_end)
            .transient(self.transient)
            .formulation(self.formulation)
            .scheme(self.scheme)
    }

    /// Renormalisation segments covering the retained window, at least 50.
    pub fn n_renorm(&self) -> usize {
        (((self.t_end - self.transient) / self.renorm_t).round() as usize).max(50)
    }
}

/// `(k, tau)` at offset `alpha` from a Hopf-Hopf point.
pub fn params_at(
    hh: &HopfHopfPoint,
    epsilon: f64,
    mu: f64,
    alpha: [f64; 2],
) -> Result<SystemParams> {
    SystemParams::new(epsilon, mu, hh.k0 + alpha[0], hh.tau0 + alpha[1])
}

/// Everything produced by one labelled run.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRun {
    pub params: SystemParams,
    pub trajectory: Trajectory,
    pub section: PoincareSection,
    pub classification: Classification,
}

pub fn run_point(params: SystemParams, protocol: &Protocol, tol: &Tolerances) -> Result<PointRun> {
    let cfg = protocol.config(params);
    let trajectory = simulate(&cfg)?;
    let section = poincare(&trajectory, Direction::Both, protocol.transient);
    let classification = classify_section(&section, tol, || {
        divergence_exponent(
            &cfg,
            protocol.delta0,
            protocol.renorm_t,
            protocol.n_renorm(),
        )
    })?;
    Ok(PointRun {
        params,
        trajectory,
        section,
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineTRow {
    pub iota: f64,
    pub alpha: [f64; 2],
    pub k: f64,
    pub tau: f64,
    /// `None` for `iota = 0`, the Hopf-Hopf point itself.
    pub class: Option<SectionClass>,
    pub stats: Option<SectionStats>,
    pub divergence: Option<f64>,
    pub max_abs_x: Option<f64>,
}

/// Direction of the line `T`.
pub const LINE_T_DIR: [f64; 2] = [0.1, 0.081];

/// Labels each `iota` on the line `T` and estimates its divergence exponent,
/// in parallel, ordered as given.
pub fn line_t_scan(
    hh: &HopfHopfPoint,
    epsilon: f64,
    mu: f64,
    iotas: &[f64],
    protocol: &Protocol,
    tol: &Tolerances,
) -> Result<Vec<LineTRow>> {
    iotas
        .par_iter()
        .map(|&iota| {
            let alpha = [iota * LINE_T_DIR[0], iota * LINE_T_DIR[1]];
            let params = params_at(hh, epsilon, mu, alpha)?;
            let mut row = LineTRow {
                iota,
                alpha,
                k: params.k,
                tau: params.tau,
                class: None,
                stats: None,
                divergence: None,
                max_abs_x: None,
            };
            if iota != 0.0 {
                let run = run_point(params, protocol, tol)?;
                let stats = run.classification.stats;
                row.divergence = match stats.divergence {
                    Some(d) => Some(d),
                    None => Some(divergence_exponent(
                        &protocol.config(params),
                        protocol.delta0,
                        protocol.renorm_t,
                        protocol.n_renorm(),
                    )?),
                };
                row.class = Some(run.classification.class);
                row.stats = Some(stats);
                row.max_abs_x = Some(run.trajectory.max_abs_x());
            }
            Ok(row)
        })
        .collect()
}
