//! Checks shared by the acceptance runner and the asserting integration tests.

#![allow(dead_code)]

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use hopf_nfde::amplitude::{predict_at, AmplitudeSystem};
use hopf_nfde::chareq::{
    check_hypotheses, eval_char, hopf_frequencies, tau_branch, BranchSign, SystemParams,
};
use hopf_nfde::classify::{
    observed_period, params_at, run_point, same_direction, PointRun, Protocol, SectionClass,
    Tolerances, LINE_T_DIR,
};
use hopf_nfde::hopf_hopf::{find_hopf_hopf, HopfHopfPoint};
use hopf_nfde::normalform::{
    duality_residual, eigenbasis, nf_coefficients, region_of, unfolding_params, via_lines,
    UnfoldingCase, UnfoldingParams, ViaLines,
};
use hopf_nfde::sim::{divergence_exponent, simulate, Formulation, SimConfig};
use hopf_nfde::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 0.1;
pub const MU: f64 = 0.5;

pub struct Check {
    pub id: u8,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(id: u8, parts: Vec<(bool, String)>) -> Self {
        Self {
            id,
            pass: parts.iter().all(|p| p.0),
            detail: parts
                .into_iter()
                .map(|(ok, s)| format!("{}{}", if ok { "" } else { "[x] " }, s))
                .collect::<Vec<_>>()
                .join("; "),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2}: {}  {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

pub fn point() -> HopfHopfPoint {
    find_hopf_hopf(EPS, MU, 1, 1, 4.5, 5.2).expect("Hopf-Hopf point")
}

pub fn unfolding() -> (HopfHopfPoint, UnfoldingParams, ViaLines) {
    let hh = point();
    let u = unfolding_params(&nf_coefficients(&hh, EPS, MU).unwrap()).unwrap();
    let lines = via_lines(&u).unwrap();
    (hh, u, lines)
}

pub fn criterion_1() -> Check {
    let (hh, dt) = timed(point);
    Check::new(
        1,
        vec![
            (
                (hh.k0 - 4.834585253).abs() < 1e-6,
                format!("k0 = {:.10}", hh.k0),
            ),
            (
                (hh.tau0 - 8.815987316).abs() < 1e-6,
                format!("tau0 = {:.10}", hh.tau0),
            ),
            (
                (hh.omega1 - 0.7307969965).abs() < 1e-7,
                format!("omega1 = {:.10}", hh.omega1),
            ),
            (
                (hh.omega2 - 0.9007354676).abs() < 1e-7,
                format!("omega2 = {:.10}", hh.omega2),
            ),
            (dt.as_secs_f64() < 1.0, format!("{:.3} s", dt.as_secs_f64())),
        ],
    )
}

pub fn criterion_2() -> Check {
    let hh = point();
    let (res, dt) = timed(|| duality_residual(&eigenbasis(&hh, EPS, MU).unwrap()));
    Check::new(
        2,
        vec![
            (res < 1e-8, format!("max |(Psi, Phi) - I| = {res:.2e}")),
            (dt.as_secs_f64() < 1.0, format!("{:.3} s", dt.as_secs_f64())),
        ],
    )
}

pub fn criterion_3() -> Check {
    let (_, u, _) = unfolding();
    let rel = |v: f64, r: f64| ((v - r) / r).abs();
    Check::new(
        3,
        vec![
            (rel(u.b0, 0.087454) < 1e-3, format!("b0 = {:.6}", u.b0)),
            (rel(u.c0, -45.7383) < 1e-3, format!("c0 = {:.4}", u.c0)),
            (u.d0 == -1.0, format!("d0 = {}", u.d0)),
            (
                (u.det - 3.0).abs() < 2e-3,
                format!("d0 - b0 c0 = {:.5}", u.det),
            ),
            (
                u.case == Some(UnfoldingCase::VIa),
                format!("case {:?}", u.case.map(|c| c.as_str())),
            ),
        ],
    )
}

pub fn criterion_4() -> Check {
    let (_, u, _) = unfolding();
    let want = [
        (u.c1_map, [0.2429777596, -0.2981855434], "c1"),
        (u.c2_map, [-0.2004123093, 0.4602126544], "c2"),
    ];
    Check::new(
        4,
        want.iter()
            .map(|(got, r, name)| {
                let err = (got[0] - r[0]).abs().max((got[1] - r[1]).abs());
                (
                    err < 1e-6,
                    format!("{name} = ({:.10}, {:.10})", got[0], got[1]),
                )
            })
            .collect(),
    )
}

pub fn criterion_5() -> Check {
    let (_, _, lines) = unfolding();
    let want = [0.435478, 0.814854, 0.828102, 0.828985, 0.828985, 0.874050];
    Check::new(
        5,
        want.iter()
            .zip(&lines.lines)
            .map(|(w, l)| {
                (
                    (l.slope - w).abs() < 1e-4,
                    format!("{} {:.6}", l.name(), l.slope),
                )
            })
            .collect(),
    )
}

pub fn labelled(hh: &HopfHopfPoint, alpha: [f64; 2], protocol: &Protocol) -> PointRun {
    let params = params_at(hh, EPS, MU, alpha).unwrap();
    run_point(params, protocol, &Tolerances::default()).unwrap()
}

pub fn criterion_6_d8() -> (bool, String) {
    let hh = point();
    let (run, dt) = timed(|| labelled(&hh, [-0.1, -0.08], &Protocol::POINT));
    let class = run.classification.class;
    (
        class == SectionClass::EquilibriumLike && dt.as_secs_f64() < 30.0,
        format!("(-0.1, -0.08) {class} in {:.2} s", dt.as_secs_f64()),
    )
}

pub fn criterion_6_d7() -> (bool, String) {
    let (hh, u, lines) = unfolding();
    let alpha = [-0.1, 0.1];
    let run = labelled(&hh, alpha, &Protocol::POINT);
    let class = run.classification.class;
    let cs = same_direction(&run.section);
    let (a, b) = (cs[cs.len() - 2], cs[cs.len() - 1]);
    let step = (a.x - b.x).hypot(a.y_delayed - b.y_delayed);
    let region = region_of(alpha[0], alpha[1], &lines).unwrap();
    let mode = predict_at(&u, region, alpha).unwrap().periodic_mode();
    let omega = match mode {
        Some(1) => hh.omega1,
        Some(2) => hh.omega2,
        _ => f64::NAN,
    };
    let expected = TAU / omega;
    let period = observed_period(&run.section).unwrap_or(f64::NAN);
    let rel = ((period - expected) / expected).abs();
    (
        class == SectionClass::FixedPoint && step < 1e-4 && rel < 0.05,
        format!(
            "(-0.1, 0.1) {class}, step {step:.1e}, period {period:.4} vs {expected:.4} (mode {mode:?}, {:.1}%)",
            100.0 * rel
        ),
    )
}

pub fn criterion_6_d6() -> (bool, String) {
    let hh = point();
    let class = labelled(&hh, [0.1, 0.085], &Protocol::POINT)
        .classification
        .class;
    (
        class == SectionClass::ClosedCurve,
        format!("(0.1, 0.085) {class}"),
    )
}

pub fn criterion_6_family() -> (bool, String) {
    let hh = point();
    let tol = Tolerances::default();
    let c = labelled(&hh, [0.2, 0.164], &Protocol::POINT).classification;
    let s = c.stats;
    let spread = s.spread.unwrap_or(0.0);
    let ratio = s.nn_ratio.unwrap_or(f64::INFINITY);
    let multi_loop = s
        .loop_shape
        .map_or(true, |l| l.coverage < 0.9 || l.thickness >= tol.tol_loop);
    (
        c.class == SectionClass::CurveFamily
            && spread > tol.tol_point
            && ratio < tol.tol_curve
            && multi_loop,
        format!(
            "(0.2, 0.164) {}, spread {spread:.3}, nn ratio {ratio:.3}, loop {:?}",
            c.class, s.loop_shape
        ),
    )
}

pub fn criterion_6() -> Check {
    Check::new(
        6,
        vec![
            criterion_6_d8(),
            criterion_6_d7(),
            criterion_6_d6(),
            criterion_6_family(),
        ],
    )
}

fn line_t_run(hh: &HopfHopfPoint, iota: f64) -> PointRun {
    labelled(
        hh,
        [iota * LINE_T_DIR[0], iota * LINE_T_DIR[1]],
        &Protocol::LINE_T,
    )
}

/// Labels and amplitudes at iota = 2.0 and 2.6.
pub fn criterion_7_ends() -> Vec<(bool, String)> {
    let hh = point();
    let r20 = line_t_run(&hh, 2.0);
    let r26 = line_t_run(&hh, 2.6);
    let (m20, m26) = (r20.trajectory.max_abs_x(), r26.trajectory.max_abs_x());
    vec![
        (
            r20.classification.class == SectionClass::CurveFamily,
            format!("iota 2.0 {}", r20.classification.class),
        ),
        (
            r26.classification.class == SectionClass::FixedPoint && m26 > m20,
            format!(
                "iota 2.6 {}, max|x| {m26:.3} vs {m20:.3}",
                r26.classification.class
            ),
        ),
    ]
}

/// Label and divergence exponents at iota = 2.5.
pub fn criterion_7_middle() -> (bool, String) {
    let hh = point();
    let protocol = Protocol::LINE_T;
    let run = line_t_run(&hh, 2.5);
    let class = run.classification.class;
    let cfg = protocol.config(run.params);
    let exps: Vec<f64> = [1e-8, 1e-9, 1e-10]
        .iter()
        .map(|&d0| divergence_exponent(&cfg, d0, protocol.renorm_t, protocol.n_renorm()).unwrap())
        .collect();
    (
        class == SectionClass::Scattered && exps.iter().all(|&e| e > 0.0),
        format!(
            "iota 2.5 {class}, exponents {:.2e} {:.2e} {:.2e}",
            exps[0], exps[1], exps[2]
        ),
    )
}

pub fn criterion_7() -> Check {
    let mut parts = criterion_7_ends();
    parts.insert(1, criterion_7_middle());
    Check::new(7, parts)
}

/// Sup-norm distance between the two formulations over `[0, 200]`.
pub fn formulation_gap(steps_per_delay: usize) -> f64 {
    let hh = point();
    let params = params_at(&hh, EPS, MU, [-0.1, 0.1]).unwrap();
    let cfg = SimConfig::new(params, 0.1, 0.0, steps_per_delay, 200.0);
    let a = simulate(&cfg.formulation(Formulation::Theta)).unwrap();
    let b = simulate(&cfg.formulation(Formulation::Neutral)).unwrap();
    assert_eq!(a.len(), b.len());
    (0..a.len())
        .map(|i| (a.x[i] - b.x[i]).abs().max((a.y[i] - b.y[i]).abs()))
        .fold(0.0, f64::max)
}

pub fn criterion_8() -> Check {
    let g1 = formulation_gap(2000);
    let g2 = formulation_gap(4000);
    Check::new(
        8,
        vec![
            (g1 < 1e-4, format!("gap {g1:.2e} at tau/2000")),
            (
                g1 >= 8.0 * g2,
                format!("{g2:.2e} at tau/4000, ratio {:.1}", g1 / g2),
            ),
        ],
    )
}

/// Amplitude equilibria found by Newton refinement from every node of a
/// 400 x 400 grid covering the quadrant up to a crude radius bound.
pub fn grid_equilibria(c: [f64; 5]) -> Vec<[f64; 2]> {
    let [c1, c2, b0, c0, d0] = c;
    let det = d0 - b0 * c0;
    let q_max = c1.abs().max(c2.abs() / d0.abs()).max(50.0 / det.abs()) + 1.0;
    let r_max = 1.5 * q_max.sqrt();
    let f = |r1: f64, r2: f64| {
        let (q1, q2) = (r1 * r1, r2 * r2);
        [r1 * (c1 + q1 + b0 * q2), r2 * (c2 + c0 * q1 + d0 * q2)]
    };
    let jac = |r1: f64, r2: f64| {
        let (q1, q2) = (r1 * r1, r2 * r2);
        [
            [c1 + 3.0 * q1 + b0 * q2, 2.0 * b0 * r1 * r2],
            [2.0 * c0 * r1 * r2, c2 + c0 * q1 + 3.0 * d0 * q2],
        ]
    };
    let n = 400;
    let mut roots: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (mut r1, mut r2) = (
                r_max * i as f64 / (n - 1) as f64,
                r_max * j as f64 / (n - 1) as f64,
            );
            let mut converged = false;
            for _ in 0..100 {
                let v = f(r1, r2);
                let m = jac(r1, r2);
                let dt = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if dt == 0.0 || !dt.is_finite() {
                    break;
                }
                let d1 = (v[0] * m[1][1] - v[1] * m[0][1]) / dt;
                let d2 = (m[0][0] * v[1] - m[1][0] * v[0]) / dt;
                r1 -= d1;
                r2 -= d2;
                if !(r1.is_finite() && r2.is_finite()) || r1.abs().max(r2.abs()) > 10.0 * r_max {
                    break;
                }
                if d1.abs().max(d2.abs()) < 1e-14 * (1.0 + r1.abs().max(r2.abs())) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                continue;
            }
            let root = [r1.abs(), r2.abs()];
            let v = f(root[0], root[1]);
            if v[0].abs().max(v[1].abs()) > 1e-9 {
                continue;
            }
            if !roots
                .iter()
                .any(|r| (r[0] - root[0]).abs().max((r[1] - root[1]).abs()) < 1e-7)
            {
                roots.push(root);
            }
        }
    }
    roots
}

pub fn random_amplitude_draws(n: usize, seed: u64) -> Vec<[f64; 5]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-5.0..=5.0));
        if (c[4] - c[2] * c[3]).abs() > 0.1 {
            out.push(c);
        }
    }
    out
}

pub fn criterion_9() -> Check {
    let draws = random_amplitude_draws(50, 9);
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    for c in &draws {
        let closed: Vec<[f64; 2]> = AmplitudeSystem::new(c[0], c[1], c[2], c[3], c[4])
            .equilibria()
            .unwrap()
            .iter()
            .map(|e| [e.state.r1, e.state.r2])
            .collect();
        let grid = grid_equilibria(*c);
        if closed.len() != grid.len() {
            mismatched += 1;
            continue;
        }
        for e in &closed {
            let d = grid
                .iter()
                .map(|g| (g[0] - e[0]).abs().max((g[1] - e[1]).abs()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    Check::new(
        9,
        vec![
            (
                mismatched == 0,
                format!("{mismatched} count mismatches in 50 draws"),
            ),
            (worst < 1e-6, format!("worst location error {worst:.1e}")),
        ],
    )
}

pub fn random_admissible(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let eps = rng.gen_range(0.01..1.0);
        let mu = rng.gen_range(0.01..0.99);
        let k = rng.gen_range(0.0..10.0);
        if check_hypotheses(eps, mu, k).both() && hopf_frequencies(eps, mu, k).is_ok() {
            out.push((eps, mu, k));
        }
    }
    out
}

pub fn hopf_residual(eps: f64, mu: f64, k: f64, sign: BranchSign, j: u32) -> f64 {
    let omega = hopf_frequencies(eps, mu, k).unwrap().get(sign);
    let tau = tau_branch(eps, mu, k, sign, j).unwrap();
    let p = SystemParams::new(eps, mu, k, tau).unwrap();
    eval_char(Complex64::new(0.0, omega), &p).norm()
}

pub fn criterion_10() -> Check {
    let mut worst = 0.0f64;
    for (eps, mu, k) in random_admissible(100, 10) {
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            for j in 0..=2 {
                worst = worst.max(hopf_residual(eps, mu, k, sign, j));
            }
        }
    }
    Check::new(
        10,
        vec![(
            worst < 1e-9,
            format!("worst residual {worst:.1e} over 600 roots"),
        )],
    )
}

pub fn all() -> Vec<fn() -> Check> {
    vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ]
}
