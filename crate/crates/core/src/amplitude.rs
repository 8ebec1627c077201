//! Planar amplitude system
//! `r1' = r1 (c1 + r1^2 + b0 r2^2)`, `r2' = r2 (c2 + c0 r1^2 + d0 r2^2)`
//! and the attractor it predicts for the full delay equation.
//!
//! Equilibria on an axis correspond to periodic solutions, interior
//! equilibria to 2-tori and closed orbits to 3-tori.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::normalform::{Region, UnfoldingCase, UnfoldingParams, ViaLines};
use crate::{Error, Result};

/// Representative radius in the `alpha` plane for [`predict_attractor`].
pub const REPRESENTATIVE_RADIUS: f64 = 0.1;
const DET_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub r1: f64,
    pub r2: f64,
}

impl AmplitudeState {
    pub fn new(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    fn dist(&self, other: &Self) -> f64 {
        (self.r1 - other.r1).hypot(self.r2 - other.r2)
    }
}

/// Coefficients of the truncated amplitude system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSystem {
    pub c1: f64,
    pub c2: f64,
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Origin,
    R1Axis,
    R2Axis,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEquilibrium {
    pub state: AmplitudeState,
    pub kind: EquilibriumKind,
    pub eigenvalues: [Complex64; 2],
    pub stable: bool,
}

fn eig2(j: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    [half + disc, half - disc]
}

impl AmplitudeSystem {
    pub fn new(c1: f64, c2: f64, b0: f64, c0: f64, d0: f64) -> Self {
        Self { c1, c2, b0, c0, d0 }
    }

    /// System at `alpha` for an unfolding.
    pub fn at(u: &UnfoldingParams, alpha: [f64; 2]) -> Self {
        Self::new(u.c1(alpha), u.c2(alpha), u.b0, u.c0, u.d0)
    }

    pub fn rhs(&self, s: AmplitudeState) -> [f64; 2] {
        let (r1, r2) = (s.r1, s.r2);
        let q1 = r1 * r1;
        let q2 = r2 * r2;
        [
            r1 * (self.c1 + q1 + self.b0 * q2),
            r2 * (self.c2 + self.c0 * q1 + self.d0 * q2),
        ]
    }

    pub fn jacobian(&self, s: AmplitudeState) -> [[f64; 2]; 2] {
        let (r1, r2) = (s.r1, s.r2);
        [
            [
                self.c1 + 3.0 * r1 * r1 + self.b0 * r2 * r2,
                2.0 * self.b0 * r1 * r2,
            ],
            [
                2.0 * self.c0 * r1 * r2,
                self.c2 + self.c0 * r1 * r1 + 3.0 * self.d0 * r2 * r2,
            ],
        ]
    }

    fn equilibrium(&self, state: AmplitudeState, kind: EquilibriumKind) -> AmplitudeEquilibrium {
        let eigenvalues = eig2(self.jacobian(state));
        AmplitudeEquilibrium {
            state,
            kind,
            eigenvalues,
            stable: eigenvalues.iter().all(|e| e.re < 0.0),
        }
    }

    /// All equilibria in the closed nonnegative quadrant.
    pub fn equilibria(&self) -> Result<Vec<AmplitudeEquilibrium>> {
        let det = self.d0 - self.b0 * self.c0;
        if det.abs() < DET_TOL {
            return Err(Error::DegenerateDet);
        }
        let mut out =
            vec![self.equilibrium(AmplitudeState::new(0.0, 0.0), EquilibriumKind::Origin)];
        if self.c1 < 0.0 {
            out.push(self.equilibrium(
                AmplitudeState::new((-self.c1).sqrt(), 0.0),
                EquilibriumKind::R1Axis,
            ));
        }
        let q2 = -self.c2 / self.d0;
        if q2 > 0.0 {
            out.push(
                self.equilibrium(AmplitudeState::new(0.0, q2.sqrt()), EquilibriumKind::R2Axis),
            );
        }
        let q1 = (self.b0 * self.c2 - self.d0 * self.c1) / det;
        let q2 = (self.c0 * self.c1 - self.c2) / det;
        if q1 > 0.0 && q2 > 0.0 {
            out.push(self.equilibrium(
                AmplitudeState::new(q1.sqrt(), q2.sqrt()),
                EquilibriumKind::Interior,
            ));
        }
        Ok(out)
    }

    fn step(&self, s: AmplitudeState, h: f64) -> AmplitudeState {
        let add = |s: AmplitudeState, k: [f64; 2], f: f64| {
            AmplitudeState::new(s.r1 + f * k[0], s.r2 + f * k[1])
        };
        let k1 = self.rhs(s);
        let k2 = self.rhs(add(s, k1, 0.5 * h));
        let k3 = self.rhs(add(s, k2, 0.5 * h));
        let k4 = self.rhs(add(s, k3, h));
        AmplitudeState::new(
            (s.r1 + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])).max(0.0),
            (s.r2 + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])).max(0.0),
        )
    }

    /// Fixed-step RK4 path `(t, state)` from `s0`, stopping early if the
    /// state leaves every bounded set (non-finite or above `1e6`).
    pub fn simulate(&self, s0: AmplitudeState, t_end: f64, h: f64) -> Vec<(f64, AmplitudeState)> {
        assert!(h > 0.0 && t_end > 0.0);
        let n = (t_end / h).round() as usize;
        let mut path = Vec::with_capacity(n + 1);
        let mut s = s0;
        path.push((0.0, s));
        for i in 1..=n {
            s = self.step(s, h);
            if !(s.r1.is_finite() && s.r2.is_finite()) || s.r1.max(s.r2) > 1e6 {
                break;
            }
            path.push((i as f64 * h, s));
        }
        path
    }
}

/// Free-function form of [`AmplitudeSystem::rhs`].
pub fn amplitude_rhs(s: AmplitudeState, c1: f64, c2: f64, b0: f64, c0: f64, d0: f64) -> [f64; 2] {
    AmplitudeSystem::new(c1, c2, b0, c0, d0).rhs(s)
}

pub fn equilibria(
    c1: f64,
    c2: f64,
    b0: f64,
    c0: f64,
    d0: f64,
) -> Result<Vec<AmplitudeEquilibrium>> {
    AmplitudeSystem::new(c1, c2, b0, c0, d0).equilibria()
}

pub fn simulate_amplitude(
    s0: AmplitudeState,
    sys: &AmplitudeSystem,
    t_end: f64,
    h: f64,
) -> Vec<(f64, AmplitudeState)> {
    sys.simulate(s0, t_end, h)
}

/// Closed orbit found by [`detect_cycle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCycle {
    pub period: f64,
    /// Return distance at the section between the last two passes.
    pub return_gap: f64,
}

/// Looks for a closed orbit through `s0`: after a transient of `t_end / 2`,
/// successive upward passes through the horizontal line of the first
/// interior equilibrium must return within `rel_tol` (relative to their
/// distance from that equilibrium) of each other while the
/// path keeps at least a tenth of its initial distance from every
/// equilibrium.
pub fn detect_cycle(
    sys: &AmplitudeSystem,
    s0: AmplitudeState,
    t_end: f64,
    h: f64,
    rel_tol: f64,
) -> Option<AmplitudeCycle> {
    let eqs = sys.equilibria().ok()?;
    let centre = eqs
        .iter()
        .find(|e| e.kind == EquilibriumKind::Interior)?
        .state;
    let path = sys.simulate(s0, t_end, h);
    if path.last()?.0 < t_end - h {
        return None;
    }
    let tail = &path[path.len() / 2..];
    let min_dist = tail
        .iter()
        .map(|(_, s)| {
            eqs.iter()
                .map(|e| e.state.dist(s))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    let start_dist = eqs
        .iter()
        .map(|e| e.state.dist(&s0))
        .fold(f64::INFINITY, f64::min);
    if min_dist < 0.1 * start_dist {
        return None;
    }
    // upward passes of r2 through centre.r2; these all lie on one side of the centre
    let mut passes: Vec<(f64, f64)> = Vec::new();
    for w in tail.windows(2) {
        let (t0, a) = w[0];
        let (t1, b) = w[1];
        if a.r2 < centre.r2 && b.r2 >= centre.r2 {
            let f = (centre.r2 - a.r2) / (b.r2 - a.r2);
            passes.push((t0 + f * (t1 - t0), a.r1 + f * (b.r1 - a.r1)));
        }
    }
    if passes.len() < 3 {
        return None;
    }
    let n = passes.len();
    let gap = (passes[n - 1].1 - passes[n - 2].1).abs();
    (gap < rel_tol * (passes[n - 1].1 - centre.r1).abs()).then(|| AmplitudeCycle {
        period: passes[n - 1].0 - passes[n - 2].0,
        return_gap: gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attractor {
    TrivialEq,
    Periodic,
    Torus2,
    Torus3,
    NoneStable,
}

impl Attractor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TrivialEq => "trivial_eq",
            Self::Periodic => "periodic",
            Self::Torus2 => "torus2",
            Self::Torus3 => "torus3",
            Self::NoneStable => "none_stable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub region: Region,
    pub alpha: [f64; 2],
    pub system: AmplitudeSystem,
    pub attractor: Attractor,
    /// The stable equilibrium behind the prediction, if any.
    pub equilibrium: Option<AmplitudeEquilibrium>,
}

impl Prediction {
    /// Critical mode (1 or 2) carrying a stable periodic solution.
    pub fn periodic_mode(&self) -> Option<u8> {
        match self.equilibrium?.kind {
            EquilibriumKind::R1Axis => Some(1),
            EquilibriumKind::R2Axis => Some(2),
            _ => None,
        }
    }
}

fn attractor_of(kind: EquilibriumKind) -> Attractor {
    match kind {
        EquilibriumKind::Origin => Attractor::TrivialEq,
        EquilibriumKind::R1Axis | EquilibriumKind::R2Axis => Attractor::Periodic,
        EquilibriumKind::Interior => Attractor::Torus2,
    }
}

/// Attractor type of the amplitude system at a given `alpha`.
pub fn predict_at(u: &UnfoldingParams, region: Region, alpha: [f64; 2]) -> Result<Prediction> {
    let system = AmplitudeSystem::at(u, alpha);
    let eqs = system.equilibria()?;
    if let Some(eq) = eqs.iter().find(|e| e.stable) {
        return Ok(Prediction {
            region,
            alpha,
            system,
            attractor: attractor_of(eq.kind),
            equilibrium: Some(*eq),
        });
    }
    let attractor = match eqs.iter().find(|e| e.kind == EquilibriumKind::Interior) {
        Some(centre) => {
            let s0 = AmplitudeState::new(centre.state.r1 * 1.01, centre.state.r2);
            let scale = system.c1.abs().max(system.c2.abs()).max(1e-12);
            let h = 0.02 / scale;
            let t_end = 4000.0 / scale;
            match detect_cycle(&system, s0, t_end, h, 1e-4) {
                Some(_) => Attractor::Torus3,
                None => Attractor::NoneStable,
            }
        }
        None => Attractor::NoneStable,
    };
    Ok(Prediction {
        region,
        alpha,
        system,
        attractor,
        equilibrium: None,
    })
}

/// Attractor predicted in region `D_i`, evaluated at radius
/// [`REPRESENTATIVE_RADIUS`] on the region's angular bisector.
///
/// In the truncated system `D5` collapses onto the common line of `L4` and
/// `L5`, where the interior equilibrium is a center; the closed orbits found
/// there stand in for the limit cycle of the full system.
pub fn predict_attractor(
    region: Region,
    u: &UnfoldingParams,
    lines: &ViaLines,
) -> Result<Prediction> {
    match u.case {
        Some(UnfoldingCase::VIa) => {}
        Some(other) => return Err(Error::WrongCase(other.to_string())),
        None => return Err(Error::WrongCase("unclassified".into())),
    }
    if !(1..=8).contains(&region.0) {
        return Err(Error::InvalidParams(format!("no region {region}")));
    }
    let dir = lines.bisector(region);
    let alpha = [
        REPRESENTATIVE_RADIUS * dir[0],
        REPRESENTATIVE_RADIUS * dir[1],
    ];
    predict_at(u, region, alpha)
}
