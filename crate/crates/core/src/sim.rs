//! Time integration of the delayed van der Pol system in original time.
//!
//! Two peer formulations are provided:
//!
//! * [`Formulation::Theta`]: `x' = y`, `y' = -eps (x^2 - 1) y - x + eps k theta(t)`
//!   with the algebraic recursion `theta(t) = (1 - mu) x(t) + mu theta(t - tau)`.
//! * [`Formulation::Neutral`]: `x' = y`,
//!   `y' = g(x, y, x(t - tau), y(t - tau)) + mu y'(t - tau)`.
//!
//! The step divides the delay exactly (`N = tau / h`), so breaking points
//! `t = j tau` fall on grid nodes and the delayed values at the first and last
//! RK stages are stored nodes. At the midpoint stages they come from the cubic
//! Hermite interpolant of the node history ([`DelayScheme::Hermite`]), using
//! one-sided derivatives at each node, or from the matching stage of step
//! `n - N` ([`DelayScheme::StageReuse`]). Both are fourth order.

use serde::{Deserialize, Serialize};

use crate::chareq::SystemParams;
use crate::{Error, Result};

/// States with a component above this magnitude are reported as a blowup.
pub const BLOWUP_LIMIT: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Theta,
    Neutral,
}

impl std::str::FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta" | "theta_form" => Ok(Self::Theta),
            "neutral" | "neutral_form" => Ok(Self::Neutral),
            other => Err(format!("unknown formulation '{other}'")),
        }
    }
}

/// Source of the delayed values at the intermediate RK stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayScheme {
    /// Cubic Hermite interpolation of the node history.
    #[default]
    Hermite,
    /// The matching stage of step `n - N`. Keeps the two formulations
    /// identical up to rounding.
    StageReuse,
}

impl std::str::FromStr for DelayScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hermite" => Ok(Self::Hermite),
            "stage_reuse" | "stage-reuse" => Ok(Self::StageReuse),
            other => Err(format!("unknown delay scheme '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SystemParams,
    /// Constant initial history of `x` on `[-tau, 0]`.
    pub x0: f64,
    /// Constant initial history of `y` on `[-tau, 0]`.
    pub y0: f64,
    /// Number of steps per delay; the step is `tau / steps_per_delay`.
    pub steps_per_delay: usize,
    pub t_end: f64,
    /// Samples before this time are integrated but not stored.
    pub transient: f64,
    pub formulation: Formulation,
    #[serde(default)]
    pub scheme: DelayScheme,
}

impl SimConfig {
    pub fn new(params: SystemParams, x0: f64, y0: f64, steps_per_delay: usize, t_end: f64) -> Self {
        Self {
            params,
            x0,
            y0,
            steps_per_delay,
            t_end,
            transient: 0.0,
            formulation: Formulation::Theta,
            scheme: DelayScheme::Hermite,
        }
    }

    pub fn transient(mut self, transient: f64) -> Self {
        self.transient = transient;
        self
    }

    pub fn formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }

    pub fn scheme(mut self, scheme: DelayScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn h(&self) -> f64 {
        self.params.tau / self.steps_per_delay as f64
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.h()).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.params.tau > 0.0) {
            return Err(Error::InvalidParams("simulation requires tau > 0".into()));
        }
        if self.steps_per_delay == 0 {
            return Err(Error::InvalidParams(
                "steps_per_delay must be positive".into(),
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParams("t_end must be positive".into()));
        }
        if !(self.transient >= 0.0 && self.transient < self.t_end) {
            return Err(Error::InvalidParams(format!(
                "transient {} must lie in [0, t_end)",
                self.transient
            )));
        }
        if !self.x0.is_finite() || !self.y0.is_finite() {
            return Err(Error::InvalidParams(
                "initial history must be finite".into(),
            ));
        }
        Ok(())
    }

    /// `y'` on the initial interval implied by the second-order equation with
    /// constant history; keeps the neutral form equivalent to the theta form.
    pub fn history_ydot(&self) -> f64 {
        let SystemParams { epsilon, k, .. } = self.params;
        -epsilon * (self.x0 * self.x0 - 1.0) * self.y0 - self.x0 + epsilon * k * self.x0
    }
}

/// Values at one RK stage: position, velocity, feedback signal and `y'`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Stage {
    x: f64,
    y: f64,
    theta: f64,
    ydot: f64,
}

/// Grid samples with cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub tau: f64,
    pub h: f64,
    /// Grid index of the first stored sample; its time is `start_index * h`.
    pub start_index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    pub ydot: Vec<f64>,
    pub y_delayed: Vec<f64>,
    pub ydot_delayed: Vec<f64>,
}

/// Interpolated state at an arbitrary time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub y_delayed: f64,
}

fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * h * m1
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        (self.start_index + i) as f64 * self.h
    }

    pub fn t_start(&self) -> f64 {
        self.time(0)
    }

    pub fn t_last(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Builds a trajectory from externally supplied samples, e.g. for testing
    /// the section code on analytic curves.
    pub fn from_samples(
        tau: f64,
        h: f64,
        start_index: usize,
        x: Vec<f64>,
        y: Vec<f64>,
        ydot: Vec<f64>,
        y_delayed: Vec<f64>,
        ydot_delayed: Vec<f64>,
    ) -> Self {
        let theta = vec![f64::NAN; x.len()];
        Self {
            tau,
            h,
            start_index,
            x,
            y,
            theta,
            ydot,
            y_delayed,
            ydot_delayed,
        }
    }

    /// Dense output on interval `i` (between samples `i` and `i + 1`) at
    /// fraction `s` in `[0, 1]`.
    pub fn interpolate_in(&self, i: usize, s: f64) -> DenseState {
        let h = self.h;
        DenseState {
            t: self.time(i) + s * h,
            x: hermite(self.x[i], self.y[i], self.x[i + 1], self.y[i + 1], h, s),
            y: hermite(
                self.y[i],
                self.ydot[i],
                self.y[i + 1],
                self.ydot[i + 1],
                h,
                s,
            ),
            y_delayed: hermite(
                self.y_delayed[i],
                self.ydot_delayed[i],
                self.y_delayed[i + 1],
                self.ydot_delayed[i + 1],
                h,
                s,
            ),
        }
    }

    /// Dense output at time `t` inside the stored window.
    pub fn interpolate(&self, t: f64) -> Option<DenseState> {
        if self.len() < 2 {
            return None;
        }
        let u = t / self.h - self.start_index as f64;
        if u < -1e-9 || u > (self.len() - 1) as f64 + 1e-9 {
            return None;
        }
        let i = (u.floor().max(0.0) as usize).min(self.len() - 2);
        let s = (u - i as f64).clamp(0.0, 1.0);
        Some(self.interpolate_in(i, s))
    }

    pub fn max_abs_x(&self) -> f64 {
        self.x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn rhs_theta(p: &SystemParams, x: f64, y: f64, theta_delayed: f64) -> (f64, f64) {
    let theta = (1.0 - p.mu) * x + p.mu * theta_delayed;
    let ydot = -p.epsilon * (x * x - 1.0) * y - x + p.epsilon * p.k * theta;
    (theta, ydot)
}

/// Right-hand side of the explicit neutral form (without the `mu y'(t - tau)` term).
pub fn neutral_g(p: &SystemParams, x: f64, y: f64, xd: f64, yd: f64) -> f64 {
    let SystemParams { epsilon, mu, k, .. } = *p;
    (-1.0 + epsilon * k * (1.0 - mu)) * x + epsilon * y + mu * xd
        - epsilon * mu * yd
        - epsilon * x * x * y
        + epsilon * mu * xd * xd * yd
}

/// Node values with the one-sided derivatives needed for Hermite
/// interpolation of the delayed quantities.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Node {
    s: Stage,
    /// `theta'` from the right and from the left.
    dtheta: [f64; 2],
    /// `y''` from the right and from the left (neutral form only).
    yddot: [f64; 2],
}

const RIGHT: usize = 0;
const LEFT: usize = 1;

/// Integrator state: ring buffers over one delay of stage and node values.
#[derive(Clone)]
struct Stepper {
    p: SystemParams,
    form: Formulation,
    scheme: DelayScheme,
    h: f64,
    n_delay: usize,
    /// Stage values of the last `n_delay` steps, indexed by step modulo `n_delay`.
    stages: Vec<[Stage; 4]>,
    /// Nodes `step - n_delay ..= step`, indexed by node modulo `n_delay + 1`.
    nodes: Vec<Node>,
    /// Constant initial history on `[-tau, 0]`.
    hist: Stage,
    step: usize,
    x: f64,
    y: f64,
}

impl Stepper {
    fn new(cfg: &SimConfig) -> Self {
        let n_delay = cfg.steps_per_delay;
        let hist = Stage {
            x: cfg.x0,
            y: cfg.y0,
            theta: cfg.x0,
            ydot: match cfg.formulation {
                Formulation::Theta => 0.0,
                Formulation::Neutral => cfg.history_ydot(),
            },
        };
        let mut st = Self {
            p: cfg.params,
            form: cfg.formulation,
            scheme: cfg.scheme,
            h: cfg.h(),
            n_delay,
            stages: vec![[hist; 4]; n_delay],
            nodes: vec![Node::default(); n_delay + 1],
            hist,
            step: 0,
            x: cfg.x0,
            y: cfg.y0,
        };
        st.store_node();
        st
    }

    fn node_at(&self, n: usize) -> &Node {
        &self.nodes[n % (self.n_delay + 1)]
    }

    /// Node `n - N`; the history (with zero derivatives) before `t = 0`.
    fn delayed_node(&self, n: usize) -> Node {
        if n < self.n_delay {
            Node {
                s: self.hist,
                ..Node::default()
            }
        } else {
            *self.node_at(n - self.n_delay)
        }
    }

    /// Values and one-sided derivatives at the current node. The left limit
    /// at `t = 0` belongs to the history and stays zero.
    fn store_node(&mut self) {
        let n = self.step;
        let d = self.delayed_node(n);
        let s = self.eval_with(self.x, self.y, d.s);
        let SystemParams { epsilon, mu, k, .. } = self.p;
        let mut node = Node {
            s,
            ..Node::default()
        };
        let sides: &[usize] = if n == 0 { &[RIGHT] } else { &[RIGHT, LEFT] };
        for &side in sides {
            node.dtheta[side] = (1.0 - mu) * s.y + mu * d.dtheta[side];
            if self.form == Formulation::Neutral {
                let (x, y, yd) = (s.x, s.y, s.ydot);
                let (xd, ydl, ydotd) = (d.s.x, d.s.y, d.s.ydot);
                let dg = (-1.0 + epsilon * k * (1.0 - mu)) * y + epsilon * yd + mu * ydl
                    - epsilon * mu * ydotd
                    - epsilon * (2.0 * x * y * y + x * x * yd)
                    + epsilon * mu * (2.0 * xd * ydl * ydl + xd * xd * ydotd);
                node.yddot[side] = dg + mu * d.yddot[side];
            }
        }
        self.nodes[n % (self.n_delay + 1)] = node;
    }

    /// Delayed values seen by stage `stage` of the current step.
    fn delayed(&self, stage: usize) -> Stage {
        let n = self.step;
        if n < self.n_delay {
            return self.hist;
        }
        match (self.scheme, stage) {
            (DelayScheme::StageReuse, _) => self.stages[n % self.n_delay][stage],
            (DelayScheme::Hermite, 0) => self.node_at(n - self.n_delay).s,
            (DelayScheme::Hermite, 3) => self.node_at(n - self.n_delay + 1).s,
            (DelayScheme::Hermite, _) => {
                let a = self.node_at(n - self.n_delay);
                let b = self.node_at(n - self.n_delay + 1);
                let mid = |pa: f64, ma: f64, pb: f64, mb: f64| hermite(pa, ma, pb, mb, self.h, 0.5);
                Stage {
                    x: mid(a.s.x, a.s.y, b.s.x, b.s.y),
                    y: mid(a.s.y, a.s.ydot, b.s.y, b.s.ydot),
                    theta: mid(a.s.theta, a.dtheta[RIGHT], b.s.theta, b.dtheta[LEFT]),
                    ydot: mid(a.s.ydot, a.yddot[RIGHT], b.s.ydot, b.yddot[LEFT]),
                }
            }
        }
    }

    fn eval_with(&self, x: f64, y: f64, d: Stage) -> Stage {
        match self.form {
            Formulation::Theta => {
                let (theta, ydot) = rhs_theta(&self.p, x, y, d.theta);
                Stage { x, y, theta, ydot }
            }
            Formulation::Neutral => {
                let ydot = neutral_g(&self.p, x, y, d.x, d.y) + self.p.mu * d.ydot;
                let theta = (1.0 - self.p.mu) * x + self.p.mu * d.theta;
                Stage { x, y, theta, ydot }
            }
        }
    }

    fn eval(&self, stage: usize, x: f64, y: f64) -> Stage {
        self.eval_with(x, y, self.delayed(stage))
    }

    /// Node values at the current step and one delay back.
    fn node(&self) -> (Stage, Stage) {
        let mut delayed = self.delayed_node(self.step).s;
        if self.step < self.n_delay {
            // the stored history y' only feeds the neutral term; y itself is constant
            delayed.ydot = 0.0;
        }
        (self.node_at(self.step).s, delayed)
    }

    fn advance(&mut self) {
        let h = self.h;
        let s1 = self.node_at(self.step).s;
        let s2 = self.eval(1, self.x + 0.5 * h * s1.y, self.y + 0.5 * h * s1.ydot);
        let s3 = self.eval(2, self.x + 0.5 * h * s2.y, self.y + 0.5 * h * s2.ydot);
        let s4 = self.eval(3, self.x + h * s3.y, self.y + h * s3.ydot);
        self.x += h / 6.0 * (s1.y + 2.0 * s2.y + 2.0 * s3.y + s4.y);
        self.y += h / 6.0 * (s1.ydot + 2.0 * s2.ydot + 2.0 * s3.ydot + s4.ydot);
        let slot = self.step % self.n_delay;
        self.stages[slot] = [s1, s2, s3, s4];
        self.step += 1;
        self.store_node();
    }

    fn blown_up(&self) -> bool {
        !(self.x.is_finite() && self.y.is_finite())
            || self.x.abs() > BLOWUP_LIMIT
            || self.y.abs() > BLOWUP_LIMIT
    }

    fn window(&self) -> impl Iterator<Item = Stage> + '_ {
        self.stages
            .iter()
            .flatten()
            .copied()
            .chain(self.nodes.iter().map(|n| n.s))
    }

    /// Sup-norm distance to `other` over the stored delay window.
    fn separation(&self, other: &Self) -> f64 {
        let mut d = (self.x - other.x).abs().max((self.y - other.y).abs());
        for (sa, sb) in self.window().zip(other.window()) {
            d = d
                .max((sa.x - sb.x).abs())
                .max((sa.y - sb.y).abs())
                .max((sa.theta - sb.theta).abs());
        }
        d
    }

    /// Pulls `self` towards `base` so that its separation is scaled by `f`.
    fn rescale_towards(&mut self, base: &Self, f: f64) {
        let lerp = |v: f64, b: f64| b + (v - b) * f;
        let stage = |sa: &mut Stage, sb: &Stage| {
            sa.x = lerp(sa.x, sb.x);
            sa.y = lerp(sa.y, sb.y);
            sa.theta = lerp(sa.theta, sb.theta);
            sa.ydot = lerp(sa.ydot, sb.ydot);
        };
        self.x = lerp(self.x, base.x);
        self.y = lerp(self.y, base.y);
        for (a, b) in self.stages.iter_mut().zip(&base.stages) {
            for (sa, sb) in a.iter_mut().zip(b) {
                stage(sa, sb);
            }
        }
        for (na, nb) in self.nodes.iter_mut().zip(&base.nodes) {
            stage(&mut na.s, &nb.s);
            for i in 0..2 {
                na.dtheta[i] = lerp(na.dtheta[i], nb.dtheta[i]);
                na.yddot[i] = lerp(na.yddot[i], nb.yddot[i]);
            }
        }
    }
}

fn check_finite(t: f64, vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite() && v.abs() < BLOWUP_LIMIT) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// Integrates the configured formulation and stores samples from `transient`
/// to `t_end`.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let h = cfg.h();
    let n_steps = cfg.n_steps();
    let start_index = ((cfg.transient / h).ceil() as usize).min(n_steps);
    let cap = n_steps + 1 - start_index;
    let mut traj = Trajectory {
        tau: cfg.params.tau,
        h,
        start_index,
        x: Vec::with_capacity(cap),
        y: Vec::with_capacity(cap),
        theta: Vec::with_capacity(cap),
        ydot: Vec::with_capacity(cap),
        y_delayed: Vec::with_capacity(cap),
        ydot_delayed: Vec::with_capacity(cap),
    };
    let mut st = Stepper::new(cfg);
    for n in 0..=n_steps {
        if n >= start_index {
            let (node, delayed) = st.node();
            check_finite(n as f64 * h, &[node.x, node.y, node.ydot])?;
            traj.x.push(node.x);
            traj.y.push(node.y);
            traj.theta.push(node.theta);
            traj.ydot.push(node.ydot);
            traj.y_delayed.push(delayed.y);
            traj.ydot_delayed.push(delayed.ydot);
        }
        if n < n_steps {
            st.advance();
            if st.blown_up() {
                return Err(Error::NonFiniteState {
                    t: (n + 1) as f64 * h,
                });
            }
        }
    }
    Ok(traj)
}

/// [`simulate`] with the theta formulation.
pub fn simulate_theta(cfg: &SimConfig) -> Result<Trajectory> {
    simulate(&cfg.formulation(Formulation::Theta))
}

/// [`simulate`] with the explicit neutral formulation.
pub fn simulate_neutral(cfg: &SimConfig) -> Result<Trajectory> {
    simulate(&cfg.formulation(Formulation::Neutral))
}

/// Two-trajectory estimate of the largest exponent.
///
/// The reference run is integrated to `max(transient, tau)`; a clone offset
/// by `delta0` in `x` over the whole delay window is then carried alongside
/// it. After every `renorm_t` time units the sup-norm separation `d` over the
/// window is recorded and the clone is pulled back to distance `delta0`.
/// The result is the mean of `ln(d / delta0) / renorm_t` over `n_renorm`
/// segments.
pub fn divergence_exponent(
    cfg: &SimConfig,
    delta0: f64,
    renorm_t: f64,
    n_renorm: usize,
) -> Result<f64> {
    cfg.validate()?;
    if !(1e-10..=1e-6).contains(&delta0) {
        return Err(Error::InvalidParams(format!(
            "delta0 = {delta0} outside [1e-10, 1e-6]"
        )));
    }
    if n_renorm < 50 {
        return Err(Error::InvalidParams(format!(
            "n_renorm = {n_renorm} must be at least 50"
        )));
    }
    let h = cfg.h();
    let seg_steps = (renorm_t / h).round() as usize;
    if seg_steps == 0 {
        return Err(Error::InvalidParams(
            "renorm_t shorter than one step".into(),
        ));
    }
    let mut base = Stepper::new(cfg);
    let start = ((cfg.transient / h).ceil() as usize).max(base.n_delay);
    for n in 0..start {
        base.advance();
        if base.blown_up() {
            return Err(Error::NonFiniteState {
                t: (n + 1) as f64 * h,
            });
        }
    }
    let mut clone = base.clone();
    clone.x += delta0;
    for st in clone.stages.iter_mut().flatten() {
        st.x += delta0;
    }
    for node in clone.nodes.iter_mut() {
        node.s.x += delta0;
    }
    let d_init = clone.separation(&base);
    clone.rescale_towards(&base, delta0 / d_init);
    let seg_t = seg_steps as f64 * h;
    let mut sum = 0.0;
    for seg in 0..n_renorm {
        for n in 0..seg_steps {
            base.advance();
            clone.advance();
            if base.blown_up() || clone.blown_up() {
                let t = (start + seg * seg_steps + n + 1) as f64 * h;
                return Err(Error::NonFiniteState { t });
            }
        }
        // a clone that merged with the reference to rounding counts as maximal contraction
        let d = clone.separation(&base).max(f64::MIN_POSITIVE);
        sum += (d / delta0).ln() / seg_t;
        clone.rescale_towards(&base, delta0 / d);
    }
    Ok(sum / n_renorm as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Both,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "up" => Ok(Self::Up),
            "down" => Ok(Self::Down),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    pub x: f64,
    pub y_delayed: f64,
    /// `true` when `y` increases through zero.
    pub upward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSection {
    pub crossings: Vec<Crossing>,
}

impl PoincareSection {
    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    pub fn filter(&self, upward: bool) -> Vec<Crossing> {
        self.crossings
            .iter()
            .copied()
            .filter(|c| c.upward == upward)
            .collect()
    }
}

const BISECT_ITERS: usize = 40;

/// Crossings of `y = 0` after `transient`, refined by bisection on the
/// dense output.
pub fn poincare(traj: &Trajectory, direction: Direction, transient: f64) -> PoincareSection {
    let mut crossings = Vec::new();
    for i in 0..traj.len().saturating_sub(1) {
        if traj.time(i + 1) < transient {
            continue;
        }
        let (y0, y1) = (traj.y[i], traj.y[i + 1]);
        let upward = y0 < 0.0 && y1 >= 0.0;
        let downward = y0 > 0.0 && y1 <= 0.0;
        let wanted = match direction {
            Direction::Up => upward,
            Direction::Down => downward,
            Direction::Both => upward || downward,
        };
        if !wanted {
            continue;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = if y1 == 0.0 { 1.0 } else { 0.5 };
        if y1 != 0.0 {
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                let ym = traj.interpolate_in(i, mid).y;
                best = mid;
                if ym == 0.0 || ym.abs() < 1e-13 {
                    break;
                }
                if (ym < 0.0) == (y0 < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                best = 0.5 * (lo + hi);
            }
        }
        let s = traj.interpolate_in(i, best);
        if s.t < transient {
            continue;
        }
        crossings.push(Crossing {
            t: s.t,
            x: s.x,
            y_delayed: s.y_delayed,
            upward,
        });
    }
    PoincareSection { crossings }
}
