//! Numerical toolkit for nonresonant Hopf-Hopf bifurcations of the van der
//! Pol oscillator with extended delay feedback
//!
//! ```text
//! x'' + eps (x^2 - 1) x' + x = eps k theta(t),   theta(t) = (1 - mu) x(t) + mu theta(t - tau)
//! ```
//!
//! which is equivalent to a neutral functional differential equation in
//! `(x, y = x')`. The modules follow the analysis pipeline:
//!
//! * [`chareq`]: characteristic equation, Hopf frequencies and branches.
//! * [`hopf_hopf`]: intersections of Hopf branches in the `(k, tau)` plane.
//! * [`normalform`]: center eigenbasis, third-order normal form, unfolding.
//! * [`amplitude`]: planar amplitude system and its attractors.
//! * [`sim`]: time integration of the neutral system and Poincare sections.
//! * [`classify`]: attractor labels from sections and the fixed run protocols.

pub mod amplitude;
pub mod chareq;
pub mod classify;
mod error;
pub mod hopf_hopf;
pub mod normalform;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result};

pub use num_complex::Complex64;
