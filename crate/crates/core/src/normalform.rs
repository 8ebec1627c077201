//! Center eigenbasis, third-order normal form and unfolding of a Hopf-Hopf
//! point.
//!
//! Everything here lives in rescaled time `t -> t / tau`, so the delay is 1
//! and the critical eigenvalues are `+-i omega_1 tau_0`, `+-i omega_2 tau_0`.
//! Perturbations are `(k, tau) = (k0 + alpha1, tau0 + alpha2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hopf_hopf::HopfHopfPoint;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

pub const SINGULAR_TOL: f64 = 1e-12;
pub const CUBIC_TOL: f64 = 1e-12;
/// Magnitude below which a classification quantity counts as zero.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Angular tolerance for [`region_of`].
pub const ANGLE_TOL: f64 = 1e-6;
pub const QUAD_NODES: usize = 64;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Point masses of the linear part in rescaled time at `alpha = 0`.
///
/// `b1` and `b2` are the masses of `eta` at `0` and `-1`; `m` is the mass of
/// the difference operator at `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPieces {
    pub b1: [[f64; 2]; 2],
    pub b2: [[f64; 2]; 2],
    pub m: [[f64; 2]; 2],
}

impl LinearPieces {
    pub fn new(hh: &HopfHopfPoint, epsilon: f64, mu: f64) -> Self {
        let t = hh.tau0;
        Self {
            b1: [
                [0.0, t],
                [t * (-1.0 + epsilon * hh.k0 * (1.0 - mu)), epsilon * t],
            ],
            b2: [[0.0, 0.0], [t * mu, -t * epsilon * mu]],
            m: [[0.0, 0.0], [0.0, mu]],
        }
    }
}

fn row_mat_col(row: [C; 2], m: &[[f64; 2]; 2], col: [C; 2]) -> C {
    let mc = [
        col[0] * m[0][0] + col[1] * m[0][1],
        col[0] * m[1][0] + col[1] * m[1][1],
    ];
    row[0] * mc[0] + row[1] * mc[1]
}

fn dot(row: [C; 2], col: [C; 2]) -> C {
    row[0] * col[0] + row[1] * col[1]
}

/// Pairing between a row function `psi` on `[0, 1]` and a column function
/// `phi` on `[-1, 0]` for `d/dt [x(t) - M x(t-1)] = B1 x(t) + B2 x(t-1)`:
///
/// ```text
/// psi(0) phi(0) - psi(0) M phi(-1) - int_{-1}^0 psi'(xi+1) M phi(xi) dxi
///               + int_{-1}^0 psi(xi+1) B2 phi(xi) dxi
/// ```
///
/// `dpsi` is the derivative of `psi`. The derivative integral is the
/// contribution of the point mass of the difference operator.
pub fn bilinear_form<P, DP, F>(
    psi: P,
    dpsi: DP,
    phi: F,
    pieces: &LinearPieces,
    rule: &GaussLegendre,
) -> C
where
    P: Fn(f64) -> [C; 2],
    DP: Fn(f64) -> [C; 2],
    F: Fn(f64) -> [C; 2],
{
    let point = dot(psi(0.0), phi(0.0)) - row_mat_col(psi(0.0), &pieces.m, phi(-1.0));
    let integral: C = rule.integrate(-1.0, 0.0, |xi| {
        let ph = phi(xi);
        row_mat_col(psi(xi + 1.0), &pieces.b2, ph) - row_mat_col(dpsi(xi + 1.0), &pieces.m, ph)
    });
    point + integral
}

/// Basis of the center eigenspace and of its dual, in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBasis {
    pub epsilon: f64,
    pub mu: f64,
    pub tau0: f64,
    pub omega: [f64; 2],
    pub d1: C,
    pub d2: C,
    pub pieces: LinearPieces,
}

impl EigenBasis {
    /// Diagonal of `B`: `i w1 t0, -i w1 t0, i w2 t0, -i w2 t0`.
    pub fn b_diag(&self) -> [C; 4] {
        let (w1, w2) = (self.omega[0], self.omega[1]);
        let t = self.tau0;
        [I * w1 * t, -I * w1 * t, I * w2 * t, -I * w2 * t]
    }

    fn freq(&self, j: usize) -> f64 {
        let w = self.omega[j / 2];
        if j % 2 == 0 {
            w
        } else {
            -w
        }
    }

    fn normalizer(&self, j: usize) -> C {
        match j {
            0 => self.d1,
            1 => self.d1.conj(),
            2 => self.d2,
            _ => self.d2.conj(),
        }
    }

    /// Column `j` of `Phi(theta)`: `(1, i w) e^{i w t0 theta}` with `w` signed.
    pub fn phi_col(&self, j: usize, theta: f64) -> [C; 2] {
        let w = self.freq(j);
        let e = (I * w * self.tau0 * theta).exp();
        [e, I * w * e]
    }

    /// `Phi(theta)` as a 2 x 4 matrix.
    pub fn phi(&self, theta: f64) -> [[C; 4]; 2] {
        let mut out = [[C::default(); 4]; 2];
        for j in 0..4 {
            let col = self.phi_col(j, theta);
            out[0][j] = col[0];
            out[1][j] = col[1];
        }
        out
    }

    /// Row `i` of `Psi(s)`.
    pub fn psi_row(&self, i: usize, s: f64) -> [C; 2] {
        let (eps, mu, t) = (self.epsilon, self.mu, self.tau0);
        let w = self.freq(i);
        let d = self.normalizer(i);
        let em = (-I * w * t).exp();
        let es = (-I * w * t * s).exp();
        let first = -em * mu * eps + eps + I * em * mu * w - I * w;
        [d * es * first, -d * es]
    }

    /// Derivative of row `i` of `Psi` with respect to `s`.
    pub fn psi_row_deriv(&self, i: usize, s: f64) -> [C; 2] {
        let lam = I * self.freq(i) * self.tau0;
        let r = self.psi_row(i, s);
        [-lam * r[0], -lam * r[1]]
    }

    /// `Psi(s)` as a 4 x 2 matrix.
    pub fn psi(&self, s: f64) -> [[C; 2]; 4] {
        [0, 1, 2, 3].map(|i| self.psi_row(i, s))
    }

    /// Matrix of pairings `(Psi_i, Phi_j)` under [`bilinear_form`].
    pub fn gram(&self, rule: &GaussLegendre) -> [[C; 4]; 4] {
        let mut g = [[C::default(); 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = bilinear_form(
                    |s| self.psi_row(i, s),
                    |s| self.psi_row_deriv(i, s),
                    |th| self.phi_col(j, th),
                    &self.pieces,
                    rule,
                );
            }
        }
        g
    }
}

fn normalizer(epsilon: f64, mu: f64, tau0: f64, w: f64) -> Result<C> {
    let em = (-I * tau0 * w).exp();
    let den = em
        * (I * mu * w * (epsilon * tau0 + 2.0) - mu * (epsilon + tau0) + mu * tau0 * w * w)
        + epsilon
        - 2.0 * I * w;
    if den.norm() < SINGULAR_TOL {
        return Err(Error::SingularNormalizer(den.norm()));
    }
    Ok(den.inv())
}

pub fn eigenbasis(hh: &HopfHopfPoint, epsilon: f64, mu: f64) -> Result<EigenBasis> {
    Ok(EigenBasis {
        epsilon,
        mu,
        tau0: hh.tau0,
        omega: [hh.omega1, hh.omega2],
        d1: normalizer(epsilon, mu, hh.tau0, hh.omega1)?,
        d2: normalizer(epsilon, mu, hh.tau0, hh.omega2)?,
        pieces: LinearPieces::new(hh, epsilon, mu),
    })
}

/// Max-norm of `(Psi, Phi) - I` with the default quadrature.
pub fn duality_residual(basis: &EigenBasis) -> f64 {
    duality_residual_with(basis, &GaussLegendre::new(QUAD_NODES))
}

pub fn duality_residual_with(basis: &EigenBasis, rule: &GaussLegendre) -> f64 {
    let g = basis.gram(rule);
    let mut worst = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { c(1.0) } else { C::default() };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// Coefficients of the normal form
/// `z1' = i w1 z1 + a11 alpha1 z1 + a12 alpha2 z1 + c11 z1^2 z2 + c12 z1 z3 z4`,
/// `z3' = i w2 z3 + a21 alpha1 z3 + a22 alpha2 z3 + c21 z1 z2 z3 + c22 z3^2 z4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormCoeffs {
    pub a11: C,
    pub a12: C,
    pub c11: C,
    pub c12: C,
    pub a21: C,
    pub a22: C,
    pub c21: C,
    pub c22: C,
}

impl NormalFormCoeffs {
    pub fn named(&self) -> [(&'static str, C); 8] {
        [
            ("a11", self.a11),
            ("a12", self.a12),
            ("a21", self.a21),
            ("a22", self.a22),
            ("c11", self.c11),
            ("c12", self.c12),
            ("c21", self.c21),
            ("c22", self.c22),
        ]
    }
}

/// `(a_alpha1, a_alpha2, c_self, c_cross)` for one mode.
fn mode_coeffs(d: C, epsilon: f64, mu: f64, k0: f64, tau0: f64, w: f64) -> (C, C, C, C) {
    let em = (-I * tau0 * w).exp();
    let a_k = -d * epsilon * (1.0 - mu) * tau0;
    let a_tau = d * (k0 * epsilon * (mu - 1.0) - mu * (w * w + 1.0) * em + w * w + 1.0);
    let cross = -d * (2.0 * I * epsilon * mu * tau0 * w * em - 2.0 * I * epsilon * tau0 * w);
    (a_k, a_tau, 0.5 * cross, cross)
}

pub fn nf_coefficients(hh: &HopfHopfPoint, epsilon: f64, mu: f64) -> Result<NormalFormCoeffs> {
    let b = eigenbasis(hh, epsilon, mu)?;
    let (a11, a12, c11, c12) = mode_coeffs(b.d1, epsilon, mu, hh.k0, hh.tau0, hh.omega1);
    let (a21, a22, c22, c21) = mode_coeffs(b.d2, epsilon, mu, hh.k0, hh.tau0, hh.omega2);
    Ok(NormalFormCoeffs {
        a11,
        a12,
        c11,
        c12,
        a21,
        a22,
        c21,
        c22,
    })
}

/// The twelve unfoldings of the planar amplitude system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnfoldingCase {
    Ia,
    Ib,
    II,
    III,
    IVa,
    IVb,
    V,
    VIa,
    VIb,
    VIIa,
    VIIb,
    VIII,
}

impl UnfoldingCase {
    pub const ALL: [UnfoldingCase; 12] = [
        Self::Ia,
        Self::Ib,
        Self::II,
        Self::III,
        Self::IVa,
        Self::IVb,
        Self::V,
        Self::VIa,
        Self::VIb,
        Self::VIIa,
        Self::VIIb,
        Self::VIII,
    ];

    /// Signs of `(d0, b0, c0, d0 - b0 c0)` defining the case.
    pub fn signs(&self) -> [i8; 4] {
        match self {
            Self::Ia => [1, 1, 1, 1],
            Self::Ib => [1, 1, 1, -1],
            Self::II => [1, 1, -1, 1],
            Self::III => [1, -1, 1, 1],
            Self::IVa => [1, -1, -1, 1],
            Self::IVb => [1, -1, -1, -1],
            Self::V => [-1, 1, 1, -1],
            Self::VIa => [-1, 1, -1, 1],
            Self::VIb => [-1, 1, -1, -1],
            Self::VIIa => [-1, -1, 1, 1],
            Self::VIIb => [-1, -1, 1, -1],
            Self::VIII => [-1, -1, -1, -1],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ia => "Ia",
            Self::Ib => "Ib",
            Self::II => "II",
            Self::III => "III",
            Self::IVa => "IVa",
            Self::IVb => "IVb",
            Self::V => "V",
            Self::VIa => "VIa",
            Self::VIb => "VIb",
            Self::VIIa => "VIIa",
            Self::VIIb => "VIIb",
            Self::VIII => "VIII",
        }
    }
}

impl std::fmt::Display for UnfoldingCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coefficients of the rescaled amplitude system
/// `r1' = r1 (c1 + r1^2 + b0 r2^2)`, `r2' = r2 (c2 + c0 r1^2 + d0 r2^2)`
/// together with the linear maps `alpha -> (c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingParams {
    pub eps1: i8,
    pub eps2: i8,
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
    pub det: f64,
    pub c1_map: [f64; 2],
    pub c2_map: [f64; 2],
    /// `None` when a sign quantity sits on a classification boundary.
    pub case: Option<UnfoldingCase>,
}

impl UnfoldingParams {
    /// Builds the record from the four amplitude coefficients, with identity
    /// maps; used for direct experiments with the amplitude system.
    pub fn from_coefficients(
        b0: f64,
        c0: f64,
        d0: f64,
        c1_map: [f64; 2],
        c2_map: [f64; 2],
    ) -> Self {
        let mut u = Self {
            eps1: 1,
            eps2: d0.signum() as i8,
            b0,
            c0,
            d0,
            det: d0 - b0 * c0,
            c1_map,
            c2_map,
            case: None,
        };
        u.case = classify_unfolding(&u).ok();
        u
    }

    pub fn c1(&self, alpha: [f64; 2]) -> f64 {
        self.c1_map[0] * alpha[0] + self.c1_map[1] * alpha[1]
    }

    pub fn c2(&self, alpha: [f64; 2]) -> f64 {
        self.c2_map[0] * alpha[0] + self.c2_map[1] * alpha[1]
    }

    /// Inverse of the linear map `alpha -> (c1, c2)`.
    pub fn alpha_of(&self, c1: f64, c2: f64) -> Option<[f64; 2]> {
        let [a, b] = self.c1_map;
        let [cc, d] = self.c2_map;
        let det = a * d - b * cc;
        if det.abs() < 1e-300 {
            return None;
        }
        Some([(d * c1 - b * c2) / det, (-cc * c1 + a * c2) / det])
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else {
        -1
    }
}

pub fn unfolding_params(coeffs: &NormalFormCoeffs) -> Result<UnfoldingParams> {
    let (r11, r22) = (coeffs.c11.re, coeffs.c22.re);
    if r11.abs() < CUBIC_TOL || r22.abs() < CUBIC_TOL {
        return Err(Error::DegenerateCubic {
            re_c11: r11,
            re_c22: r22,
        });
    }
    let eps1 = sign(r11);
    let eps2 = sign(r22);
    let e1 = eps1 as f64;
    let d0 = (eps1 * eps2) as f64;
    let b0 = d0 * coeffs.c12.re / r22;
    let c0 = coeffs.c21.re / r11;
    let mut u = UnfoldingParams {
        eps1,
        eps2,
        b0,
        c0,
        d0,
        det: d0 - b0 * c0,
        c1_map: [e1 * coeffs.a11.re, e1 * coeffs.a12.re],
        c2_map: [e1 * coeffs.a21.re, e1 * coeffs.a22.re],
        case: None,
    };
    u.case = classify_unfolding(&u).ok();
    Ok(u)
}

pub fn classify_unfolding(u: &UnfoldingParams) -> Result<UnfoldingCase> {
    let quantities = [
        ("d0", u.d0),
        ("b0", u.b0),
        ("c0", u.c0),
        ("d0 - b0 c0", u.det),
    ];
    let mut signs = [0i8; 4];
    for (s, (name, v)) in signs.iter_mut().zip(quantities) {
        if !(v.abs() > BOUNDARY_TOL) {
            return Err(Error::BoundaryCase { name, value: v });
        }
        *s = sign(v);
    }
    UnfoldingCase::ALL
        .into_iter()
        .find(|case| case.signs() == signs)
        .ok_or_else(|| {
            Error::InvalidParams(format!("sign pattern {signs:?} matches no unfolding case"))
        })
}

/// One half-line of the case VIa bifurcation set, given both in the
/// `(c1, c2)` plane and in the `(alpha1, alpha2)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifLine {
    pub index: u8,
    /// Direction of the half-line in the `(c1, c2)` plane.
    pub c_dir: [f64; 2],
    /// Unit direction of the half-line in the `(alpha1, alpha2)` plane.
    pub alpha_dir: [f64; 2],
    /// `alpha2 / alpha1` along the half-line.
    pub slope: f64,
    /// Whether the half-line lies in `alpha1 > 0`.
    pub alpha1_positive: bool,
}

impl BifLine {
    pub fn angle(&self) -> f64 {
        self.alpha_dir[1]
            .atan2(self.alpha_dir[0])
            .rem_euclid(2.0 * PI)
    }

    pub fn name(&self) -> String {
        format!("L{}", self.index)
    }
}

/// The eight half-lines `L1..L8` around the origin for case VIa.
///
/// `L4` carries only its linear part, which coincides with `L5`; the two
/// are tangent at the origin and `D5` is not resolved at linear order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViaLines {
    pub lines: [BifLine; 8],
}

pub fn via_lines(u: &UnfoldingParams) -> Result<ViaLines> {
    let case = classify_unfolding(u)?;
    if case != UnfoldingCase::VIa {
        return Err(Error::WrongCase(case.to_string()));
    }
    // half-line c2 = slope * c1 restricted to c2 > 0
    let upper = |slope: f64| {
        if slope > 0.0 {
            [1.0, slope]
        } else {
            [-1.0, -slope]
        }
    };
    let tangent = (u.c0 - 1.0) / (u.b0 + 1.0);
    let dirs = [
        [1.0, 0.0],
        [0.0, 1.0],
        upper(u.c0),
        upper(tangent),
        upper(tangent),
        [-u.b0, 1.0],
        [-1.0, 0.0],
        [0.0, -1.0],
    ];
    let mut lines = [BifLine {
        index: 0,
        c_dir: [0.0; 2],
        alpha_dir: [0.0; 2],
        slope: 0.0,
        alpha1_positive: false,
    }; 8];
    for (idx, dir) in dirs.into_iter().enumerate() {
        let a = u
            .alpha_of(dir[0], dir[1])
            .ok_or_else(|| Error::InvalidParams("singular map alpha -> (c1, c2)".into()))?;
        let n = a[0].hypot(a[1]);
        lines[idx] = BifLine {
            index: idx as u8 + 1,
            c_dir: dir,
            alpha_dir: [a[0] / n, a[1] / n],
            slope: a[1] / a[0],
            alpha1_positive: a[0] > 0.0,
        };
    }
    Ok(ViaLines { lines })
}

/// Region `D1..D8` of the `(alpha1, alpha2)` plane; `D_i` lies
/// counterclockwise between `L_{i-1}` and `L_i` (with `L0 = L8`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Region(pub u8);

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "D{}", self.0)
    }
}

impl ViaLines {
    /// Counterclockwise angular width of region `D_i`, and its start angle.
    pub fn sector(&self, region: Region) -> (f64, f64) {
        let i = region.0 as usize;
        let start = self.lines[(i + 6) % 8].angle();
        let end = self.lines[i - 1].angle();
        (start, (end - start).rem_euclid(2.0 * PI))
    }

    /// Direction in the middle of a region. For the degenerate `D5` this is
    /// the common direction of `L4` and `L5`.
    pub fn bisector(&self, region: Region) -> [f64; 2] {
        let (start, width) = self.sector(region);
        let a = start + 0.5 * width;
        [a.cos(), a.sin()]
    }
}

pub fn region_of(alpha1: f64, alpha2: f64, lines: &ViaLines) -> Result<Region> {
    if alpha1 == 0.0 && alpha2 == 0.0 {
        return Err(Error::OnBoundary(alpha1, alpha2));
    }
    let a = alpha2.atan2(alpha1).rem_euclid(2.0 * PI);
    for l in &lines.lines {
        let d = (a - l.angle()).rem_euclid(2.0 * PI);
        if d.min(2.0 * PI - d) < ANGLE_TOL {
            return Err(Error::OnBoundary(alpha1, alpha2));
        }
    }
    for i in 1..=8u8 {
        let (start, width) = lines.sector(Region(i));
        if (a - start).rem_euclid(2.0 * PI) < width {
            return Ok(Region(i));
        }
    }
    Err(Error::OnBoundary(alpha1, alpha2))
}
