//! Forward potential-flow model of a rigid solid moving in a 2D perfect fluid,
//! and inverse detection of its position and velocity from the complex
//! potential of the fluid.
//!
//! The solid's exterior is the image of `|z| > 1` under
//! `f(z) = c₁z + Σ_{k≤−1} c_k z^k`. Given a configuration (position and rigid
//! velocity), [`flow`] evaluates the potential `ξ`, [`spectral`] computes its
//! Laurent moments `λ_n(ν)`, and [`inverse`] recovers the configuration back
//! from those moments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterx;
pub mod error;
pub mod exec;
pub mod flow;
pub mod inverse;
pub mod io;
pub mod rigid;
pub mod seqcore;
pub mod shape;
pub mod spectral;
pub mod track;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
pub use rigid::{Configuration, Position, RigidVelocity};
pub use seqcore::CoeffSeq;
pub use shape::ShapeSpec;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unit complex `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r >= t {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles, in `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > std::f64::consts::PI {
        d - std::f64::consts::TAU
    } else {
        d
    }
}
