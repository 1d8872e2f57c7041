//! Positions, rigid velocities and configurations.
//!
//! The rotation centre of the rigid velocity is always the reference point
//! `r` of the position, so a configuration is the sextuple
//! `(α, r, ω, w₀)`.

use crate::error::{invalid, Result};
use crate::{angle_diff, cis, wrap_angle, I};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Absolute tolerance on wrapped angle differences in [`equivalent`].
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    /// Orientation in `[0, 2π)`.
    pub alpha: f64,
    pub r: Complex64,
}

impl Position {
    pub fn new(alpha: f64, r: Complex64) -> Self {
        Self {
            alpha: wrap_angle(alpha),
            r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidVelocity {
    pub omega: f64,
    /// Translational velocity in the body frame.
    pub w0: Complex64,
}

impl RigidVelocity {
    pub fn new(omega: f64, w0: Complex64) -> Self {
        Self { omega, w0 }
    }

    pub fn is_zero(&self) -> bool {
        self.omega == 0.0 && self.w0 == Complex64::new(0.0, 0.0)
    }

    /// World-frame translational velocity `e^{iα} w₀`.
    pub fn world(&self, alpha: f64) -> Complex64 {
        cis(alpha) * self.w0
    }

    /// Real coordinates `(Re w₀, Im w₀, ω)`.
    pub fn as_vector(&self) -> [f64; 3] {
        [self.w0.re, self.w0.im, self.omega]
    }

    pub fn from_vector(u: [f64; 3]) -> Self {
        Self::new(u[2], Complex64::new(u[0], u[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub position: Position,
    pub velocity: RigidVelocity,
}

impl Configuration {
    pub fn new(alpha: f64, r: Complex64, omega: f64, w0: Complex64) -> Self {
        Self {
            position: Position::new(alpha, r),
            velocity: RigidVelocity::new(omega, w0),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.position.alpha
    }

    pub fn r(&self) -> Complex64 {
        self.position.r
    }

    pub fn omega(&self) -> f64 {
        self.velocity.omega
    }

    pub fn w0(&self) -> Complex64 {
        self.velocity.w0
    }

    pub fn w_world(&self) -> Complex64 {
        self.velocity.world(self.position.alpha)
    }
}

/// Tolerance-aware equivalence of two configurations for a shape with
/// `m`-fold rotational symmetry. `m = 0` means the shape is a disk, which is
/// invariant under every rotation.
pub fn equivalent_with_tol(
    a: &Configuration,
    b: &Configuration,
    m: u32,
    tol: f64,
) -> Result<bool> {
    if (a.r() - b.r()).norm() > tol || (a.omega() - b.omega()).abs() > tol {
        return Ok(false);
    }
    if m == 0 {
        // any rotation is a symmetry: compare world velocities
        return Ok((a.w_world() - b.w_world()).norm() <= tol);
    }
    let d = angle_diff(b.alpha(), a.alpha());
    let step = TAU / m as f64;
    let j = (d / step).round();
    if (d - j * step).abs() > ANGLE_TOL.max(tol) {
        return Ok(false);
    }
    let expected = cis(-j * step) * a.w0();
    Ok((expected - b.w0()).norm() <= tol)
}

/// Configurations equal up to a symmetry rotation `2πj/m` of the shape.
pub fn equivalent(a: &Configuration, b: &Configuration, m: u32) -> Result<bool> {
    if m < 1 {
        return invalid("symmetry order must be at least 1");
    }
    equivalent_with_tol(a, b, m, ANGLE_TOL)
}

/// Velocity `iω(x − r) + e^{iα}w₀` of the rigid motion at `x`.
pub fn rigid_velocity_field(cfg: &Configuration, x: Complex64) -> Complex64 {
    I * cfg.omega() * (x - cfg.r()) + cfg.w_world()
}
