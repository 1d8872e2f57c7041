//! Forward model: potential coefficients `ζ_k`, the complex potential `ξ`,
//! the fluid velocity, boundary residuals and the stealth classifier.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rigid::{Configuration, RigidVelocity};
use crate::seqcore::CoeffSeq;
use crate::shape::ShapeSpec;
use crate::{cis, I};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Coefficients of `ζ(z) = Σ_{k≤−1} ζ_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCoeffs {
    pub zeta: CoeffSeq,
}

impl PotentialCoeffs {
    /// `ζ(w)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let t = w.inv();
        let mut s = Complex64::new(0.0, 0.0);
        for k in self.min_index()..=-1 {
            s = s * t + self.zeta.get(k);
        }
        s * t
    }

    /// `ζ′(w) = Σ k ζ_k w^{k−1}`, termwise.
    pub fn eval_deriv(&self, w: Complex64) -> Complex64 {
        let t = w.inv();
        let mut s = Complex64::new(0.0, 0.0);
        for k in self.min_index()..=-1 {
            s = s * t + self.zeta.get(k) * k as f64;
        }
        s * t * t
    }

    fn min_index(&self) -> i64 {
        self.zeta.span().map(|(lo, _)| lo.min(-1)).unwrap_or(-1)
    }
}

/// `ζ_k = −w̄₀c_k + w₀č_k + iω(č∗c)_k` for `k ≤ −1`.
pub fn zeta_coeffs(shape: &ShapeSpec, vel: &RigidVelocity) -> PotentialCoeffs {
    let c = shape.coeffs();
    let cr = c.reflect();
    let z = c
        .scale(-vel.w0.conj())
        .add(&cr.scale(vel.w0))
        .add(&cr.conv(&c).scale(I * vel.omega));
    let lo = z.span().map(|s| s.0).unwrap_or(-1).min(-1);
    PotentialCoeffs {
        zeta: z.restrict(lo, -1),
    }
}

/// A shape in a given configuration, with its potential coefficients cached.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub shape: ShapeSpec,
    pub cfg: Configuration,
    pub zeta: PotentialCoeffs,
    rot: Complex64,
}

impl ForwardModel {
    pub fn new(shape: &ShapeSpec, cfg: &Configuration) -> Self {
        Self {
            shape: shape.clone(),
            cfg: *cfg,
            zeta: zeta_coeffs(shape, &cfg.velocity),
            rot: cis(-cfg.alpha()),
        }
    }

    /// Body-frame preimage `f⁻¹((z − r)e^{−iα})`.
    pub fn preimage(&self, z: Complex64) -> Result<Complex64> {
        self.shape.eval_map_inverse((z - self.cfg.r()) * self.rot)
    }

    /// World point `e^{iα}f(w) + r` of a body-frame point `w`.
    pub fn world_point(&self, w: Complex64) -> Complex64 {
        self.shape.f(w) / self.rot + self.cfg.r()
    }

    /// `ξ(z)`.
    pub fn potential(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.zeta.eval(self.preimage(z)?))
    }

    /// Physical fluid velocity `u = −conj(ξ′(z))`.
    ///
    /// The coefficient formula for `ζ` yields minus the physical potential
    /// (a unit disk translating along `x` gets `ξ = 1/z`), so the sign is
    /// restored here to make `u` satisfy the slip condition.
    pub fn velocity(&self, z: Complex64) -> Result<Complex64> {
        self.velocity_at_preimage(self.preimage(z)?)
    }

    /// Fluid velocity at the world point whose preimage is `w`.
    pub fn velocity_at_preimage(&self, w: Complex64) -> Result<Complex64> {
        let d = self.shape.df(w);
        if d.norm() <= 1e-14 * self.shape.c1().norm() {
            return Err(Error::CriticalPoint(w));
        }
        Ok(-(self.zeta.eval_deriv(w) * self.rot / d).conj())
    }

    /// `(ξ(z), u(z))` sharing one inversion.
    pub fn potential_and_velocity(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let w = self.preimage(z)?;
        Ok((self.zeta.eval(w), self.velocity_at_preimage(w)?))
    }

    /// Outward unit normal at the boundary point with preimage `e^{it}`.
    pub fn boundary_normal(&self, t: f64) -> Complex64 {
        let w = cis(t);
        let n = w * self.shape.df(w) / self.rot;
        n / n.norm()
    }
}

pub fn eval_potential(shape: &ShapeSpec, cfg: &Configuration, z: Complex64) -> Result<Complex64> {
    ForwardModel::new(shape, cfg).potential(z)
}

pub fn eval_fluid_velocity(
    shape: &ShapeSpec,
    cfg: &Configuration,
    z: Complex64,
) -> Result<Complex64> {
    ForwardModel::new(shape, cfg).velocity(z)
}

/// Row-major grid samples `(x, y, ξ, u)`; cells inside the solid, or where
/// inversion fails, carry `None`.
pub type GridSample = (f64, f64, Option<(Complex64, Complex64)>);

/// Evaluates `ξ` and `u` on the tensor grid `xs × ys` (x fastest).
pub fn forward_grid(model: &ForwardModel, xs: &[f64], ys: &[f64], exec: Exec) -> Vec<GridSample> {
    let nx = xs.len();
    exec.map_range(nx * ys.len(), |idx| {
        let (x, y) = (xs[idx % nx], ys[idx / nx]);
        (x, y, model.potential_and_velocity(Complex64::new(x, y)).ok())
    })
}

/// Deviation from constancy of the stream function along the boundary,
/// `max_j |s(t_j) − mean s|` with
/// `s(t) = Im ζ(e^{it}) + Im(w̄₀f(e^{it})) − (ω/2)|f(e^{it})|²`.
pub fn stream_boundary_residual(shape: &ShapeSpec, cfg: &Configuration, m: usize) -> f64 {
    stream_residual_with(shape, &cfg.velocity, &zeta_coeffs(shape, &cfg.velocity), m)
}

/// As [`stream_boundary_residual`] with explicitly supplied coefficients.
pub fn stream_residual_with(
    shape: &ShapeSpec,
    vel: &RigidVelocity,
    zeta: &PotentialCoeffs,
    m: usize,
) -> f64 {
    let s: Vec<f64> = (0..m)
        .map(|j| {
            let w = cis(TAU * j as f64 / m as f64);
            let f = shape.f(w);
            zeta.eval(w).im + (vel.w0.conj() * f).im - 0.5 * vel.omega * f.norm_sqr()
        })
        .collect();
    let mean = s.iter().sum::<f64>() / m as f64;
    s.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

/// Closed-form potential of the ellipse with semi-axes `a > b`, principal
/// square root. Its cut is the focal segment.
pub fn ellipse_potential_closed_form(
    a: f64,
    b: f64,
    cfg: &Configuration,
    z: Complex64,
) -> Result<Complex64> {
    let d = z - cfg.r();
    let e2 = cis(2.0 * cfg.alpha());
    let c2 = a * a - b * b;
    if d.norm() == 0.0 {
        return Err(Error::OnBranchCut(z));
    }
    let q = 1.0 - c2 * e2 / (d * d);
    if q.re <= 0.0 && q.im.abs() <= 1e-14 * (1.0 + q.norm()) {
        return Err(Error::OnBranchCut(z));
    }
    let den = 1.0 + q.sqrt();
    let w0 = cfg.w0();
    let first = (-c2 * w0.conj() + (a + b).powi(2) * w0) * cis(cfg.alpha()) / (2.0 * d * den);
    let second = I * c2 * (a + b).powi(2) * e2 * cfg.omega() / (4.0 * d * d * den * den);
    Ok(first + second)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StealthVerdict {
    RotatingDisk,
    TangentArc,
    TangentSegment,
    NotStealth,
}

/// Relative vanishing threshold for the `ζ_k`.
pub fn stealth_threshold(shape: &ShapeSpec, vel: &RigidVelocity) -> f64 {
    let l1 = shape.coeffs().l1_norm();
    1e-12 * l1 * (vel.w0.norm() + vel.omega.abs() * l1)
}

/// Classifies a motion that leaves the fluid at rest.
pub fn classify_stealth(shape: &ShapeSpec, vel: &RigidVelocity) -> Result<StealthVerdict> {
    if vel.is_zero() {
        return Err(Error::ZeroVelocity);
    }
    let zeta = zeta_coeffs(shape, vel);
    let thr = stealth_threshold(shape, vel);
    if zeta.zeta.iter().any(|(_, z)| z.norm() >= thr) {
        return Ok(StealthVerdict::NotStealth);
    }
    let nonzero_tail: Vec<usize> = shape
        .tail()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(j, _)| j)
        .collect();
    Ok(match nonzero_tail.as_slice() {
        [] => StealthVerdict::RotatingDisk,
        [0] => StealthVerdict::TangentSegment,
        _ => StealthVerdict::TangentArc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigid::rigid_velocity_field;
    use crate::shape::{make_arc, make_disk, make_ellipse, make_segment, make_c147};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_eval(z: &PotentialCoeffs, w: Complex64) -> Complex64 {
        z.zeta.iter().map(|(k, v)| v * w.powi(k as i32)).sum()
    }

    fn naive_deriv(z: &PotentialCoeffs, w: Complex64) -> Complex64 {
        z.zeta
            .iter()
            .map(|(k, v)| v * (k as f64) * w.powi(k as i32 - 1))
            .sum()
    }

    #[test]
    fn zeta_examples() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let z = zeta_coeffs(&e, &RigidVelocity::new(0.0, c(1.0, 0.0)));
        assert!((z.zeta.get(-1) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(z.zeta.prune(1e-15).support(), vec![-1]);

        let z = zeta_coeffs(&e, &RigidVelocity::new(1.0, c(0.0, 0.0)));
        assert!((z.zeta.get(-2) - c(0.0, 0.75)).norm() < 1e-15);
        assert_eq!(z.zeta.prune(1e-15).support(), vec![-2]);

        let arc = make_arc(0.5).unwrap();
        let z = zeta_coeffs(&arc, &RigidVelocity::new(1.0, c(-1.5, 0.0)));
        assert!(z.zeta.iter().all(|(_, v)| v.norm() < 1e-13));
    }

    #[test]
    fn zeta_support_bounds() {
        let s = make_c147(c(1.0, 0.2), c(0.1, 0.0), c(0.02, 0.01)).unwrap();
        let z = zeta_coeffs(&s, &RigidVelocity::new(0.7, c(0.3, -0.4)));
        let (lo, hi) = z.zeta.span().unwrap();
        assert!(hi <= -1 && lo >= -(2 * 7 + 1));
    }

    #[test]
    fn horner_matches_naive() {
        let s = make_c147(c(1.0, 0.2), c(0.1, 0.0), c(0.02, 0.01)).unwrap();
        let z = zeta_coeffs(&s, &RigidVelocity::new(0.7, c(0.3, -0.4)));
        for w in [c(1.0, 0.0), c(0.3, 1.5), c(-2.0, 0.7)] {
            assert!((z.eval(w) - naive_eval(&z, w)).norm() < 1e-14);
            assert!((z.eval_deriv(w) - naive_deriv(&z, w)).norm() < 1e-14);
        }
    }

    #[test]
    fn zeta_is_real_linear() {
        let s = make_c147(c(1.0, 0.2), c(0.1, 0.0), c(0.02, 0.01)).unwrap();
        let u1 = RigidVelocity::new(0.7, c(0.3, -0.4));
        let u2 = RigidVelocity::new(-1.1, c(2.0, 0.5));
        let sum = RigidVelocity::new(u1.omega + u2.omega, u1.w0 + u2.w0);
        let lhs = zeta_coeffs(&s, &sum).zeta;
        let rhs = zeta_coeffs(&s, &u1).zeta.add(&zeta_coeffs(&s, &u2).zeta);
        for k in -15..=-1 {
            assert!((lhs.get(k) - rhs.get(k)).norm() < 1e-15);
        }
        let scaled = zeta_coeffs(&s, &RigidVelocity::new(2.5 * u1.omega, 2.5 * u1.w0)).zeta;
        let base = zeta_coeffs(&s, &u1).zeta;
        for k in -15..=-1 {
            assert!((scaled.get(k) - base.get(k) * 2.5).norm() < 1e-15);
        }
    }

    #[test]
    fn potential_far_field() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.0, c(0.0, 0.0), 0.0, c(1.0, 0.0));
        let z = c(1e6, 0.0);
        let v = eval_potential(&e, &cfg, z).unwrap() * z;
        assert!((v - c(1.5, 0.0)).norm() / 1.5 < 1e-5);
    }

    #[test]
    fn potential_on_boundary_is_zeta() {
        let s = make_c147(c(1.0, 0.2), c(0.1, 0.0), c(0.02, 0.01)).unwrap();
        let cfg = Configuration::new(0.9, c(0.4, -1.0), 0.7, c(0.3, -0.4));
        let m = ForwardModel::new(&s, &cfg);
        for j in 0..32 {
            let w = cis(TAU * j as f64 / 32.0);
            let z = m.world_point(w);
            assert!((m.potential(z).unwrap() - m.zeta.eval(w)).norm() < 1e-10);
        }
    }

    #[test]
    fn stealth_potential_vanishes() {
        let arc = make_arc(0.5).unwrap();
        let cfg = Configuration::new(0.3, c(1.0, 1.0), 1.0, c(-1.5, 0.0));
        let m = ForwardModel::new(&arc, &cfg);
        for z in [c(5.0, 0.0), c(1.0, 4.0), c(-3.0, -2.0)] {
            assert!(m.potential(z).unwrap().norm() < 1e-12);
            assert!(m.velocity(z).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn velocity_decay() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.2, c(0.0, 0.0), 1.0, c(1.0, 0.5));
        let u1 = eval_fluid_velocity(&e, &cfg, c(100.0, 0.0)).unwrap().norm();
        let u2 = eval_fluid_velocity(&e, &cfg, c(200.0, 0.0)).unwrap().norm();
        assert!((u1 / u2 - 4.0).abs() < 0.05);
    }

    #[test]
    fn velocity_matches_finite_difference() {
        let s = make_c147(c(1.0, 0.2), c(0.1, 0.0), c(0.02, 0.01)).unwrap();
        let cfg = Configuration::new(0.9, c(0.4, -1.0), 0.7, c(0.3, -0.4));
        let m = ForwardModel::new(&s, &cfg);
        let z = c(2.5, 0.3);
        let h = 1e-5;
        let d = (m.potential(z + h).unwrap() - m.potential(z - h).unwrap()) / (2.0 * h);
        assert!((m.velocity(z).unwrap() + d.conj()).norm() < 1e-8);
    }

    #[test]
    fn slip_condition_on_boundary() {
        let s = make_c147(c(1.0, 0.2), c(0.1, 0.0), c(0.02, 0.01)).unwrap();
        let cfg = Configuration::new(0.9, c(0.4, -1.0), 0.7, c(0.3, -0.4));
        let m = ForwardModel::new(&s, &cfg);
        for j in 0..64 {
            let t = TAU * j as f64 / 64.0;
            let w = cis(t);
            let x = m.world_point(w);
            let u = m.velocity_at_preimage(w).unwrap();
            let v = rigid_velocity_field(&cfg, x);
            let n = m.boundary_normal(t);
            assert!(((u - v) * n.conj()).re.abs() < 1e-8);
        }
    }

    #[test]
    fn slip_normal_from_polyline() {
        // the analytic normal agrees with a finite-difference polyline normal
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.4, c(1.0, 0.0), -2.0, cis(PI / 3.0));
        let m = ForwardModel::new(&e, &cfg);
        let n = 4096;
        for j in (0..n).step_by(256) {
            let t = TAU * j as f64 / n as f64;
            let dt = TAU / n as f64;
            let tangent = m.world_point(cis(t + dt)) - m.world_point(cis(t - dt));
            let normal = -I * tangent / tangent.norm();
            assert!((normal - m.boundary_normal(t)).norm() < 1e-5);
            let x = m.world_point(cis(t));
            let u = m.velocity_at_preimage(cis(t)).unwrap();
            let v = rigid_velocity_field(&cfg, x);
            assert!(((u - v) * normal.conj()).re.abs() < 1e-4);
        }
    }

    #[test]
    fn stream_residual_examples() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(1.1, c(0.2, 0.3), -0.8, c(0.6, 1.3));
        assert!(stream_boundary_residual(&e, &cfg, 256) < 1e-10);

        let arc = make_arc(0.5).unwrap();
        let cfg = Configuration::new(0.0, c(0.0, 0.0), 1.0, c(-1.5, 0.0));
        assert!(stream_boundary_residual(&arc, &cfg, 256) < 1e-12);

        let cfg = Configuration::new(1.1, c(0.2, 0.3), -0.8, c(0.6, 1.3));
        let mut z = zeta_coeffs(&e, &cfg.velocity);
        z.zeta = z.zeta.add(&CoeffSeq::from_pairs([(-1, c(0.1, 0.0))]));
        assert!(stream_residual_with(&e, &cfg.velocity, &z, 256) > 1e-3);
    }

    #[test]
    fn closed_form_far_field_and_zero() {
        let cfg = Configuration::new(0.0, c(0.0, 0.0), 0.0, c(0.0, 0.0));
        assert_eq!(ellipse_potential_closed_form(2.0, 1.0, &cfg, c(3.0, 1.0)).unwrap(), c(0.0, 0.0));

        let cfg = Configuration::new(0.7, c(1.0, -1.0), 0.9, c(0.4, 0.8));
        let (a, b) = (2.0, 1.0);
        let lead = (-(a * a - b * b) * cfg.w0().conj() + (a + b) * (a + b) * cfg.w0()) * cis(0.7) / 4.0;
        let z = c(1e7, 3e6);
        let v = ellipse_potential_closed_form(a, b, &cfg, z).unwrap() * (z - cfg.r());
        assert!((v - lead).norm() < 1e-6 * lead.norm());
    }

    #[test]
    fn closed_form_rejects_cut() {
        let cfg = Configuration::new(0.0, c(0.0, 0.0), 1.0, c(1.0, 0.0));
        assert!(ellipse_potential_closed_form(2.0, 1.0, &cfg, c(0.5, 0.0)).is_err());
        assert!(ellipse_potential_closed_form(2.0, 1.0, &cfg, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn stealth_examples() {
        let disk = make_disk(1.0).unwrap();
        assert_eq!(
            classify_stealth(&disk, &RigidVelocity::new(1.0, c(0.0, 0.0))).unwrap(),
            StealthVerdict::RotatingDisk
        );
        assert_eq!(
            classify_stealth(&disk, &RigidVelocity::new(0.0, c(1.0, 0.0))).unwrap(),
            StealthVerdict::NotStealth
        );
        let arc = make_arc(0.5).unwrap();
        assert_eq!(
            classify_stealth(&arc, &RigidVelocity::new(1.0, c(-1.5, 0.0))).unwrap(),
            StealthVerdict::TangentArc
        );
        let seg = make_segment(1.3, 0.4).unwrap();
        assert_eq!(
            classify_stealth(&seg, &RigidVelocity::new(0.0, cis(0.4) * 2.0)).unwrap(),
            StealthVerdict::TangentSegment
        );
        assert_eq!(
            classify_stealth(&seg, &RigidVelocity::new(0.5, cis(0.4) * 2.0)).unwrap(),
            StealthVerdict::NotStealth
        );
        let e = make_ellipse(2.0, 1.0).unwrap();
        for v in [
            RigidVelocity::new(1.0, c(0.0, 0.0)),
            RigidVelocity::new(0.0, c(1.0, 0.0)),
            RigidVelocity::new(-0.3, c(0.2, 0.9)),
        ] {
            assert_eq!(classify_stealth(&e, &v).unwrap(), StealthVerdict::NotStealth);
        }
        assert!(matches!(
            classify_stealth(&e, &RigidVelocity::new(0.0, c(0.0, 0.0))),
            Err(Error::ZeroVelocity)
        ));
    }

    #[test]
    fn grid_policies_agree() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.3, c(0.0, 0.0), -2.0, cis(PI / 3.0));
        let m = ForwardModel::new(&e, &cfg);
        let xs: Vec<f64> = (0..21).map(|i| -3.0 + 0.3 * i as f64).collect();
        let ys = xs.clone();
        let a = forward_grid(&m, &xs, &ys, Exec::Sequential);
        let b = forward_grid(&m, &xs, &ys, Exec::Parallel);
        assert_eq!(a, b);
        assert!(a.iter().any(|s| s.2.is_none()));
        assert!(a.iter().any(|s| s.2.is_some()));
    }
}
