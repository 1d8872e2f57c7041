//! Conformal description of the solid's shape.
//!
//! The fluid domain around the solid at rest is the image of `|z| > 1` under
//! `f(z) = c₁z + Σ_{m=1}^{M} c₋ₘ z^{−m}`.

use crate::error::{invalid, Error, Result};
use crate::seqcore::CoeffSeq;
use crate::cis;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Shapes with area below this are rejected.
pub const AREA_TOL: f64 = 1e-9;
const NEWTON_MAX_ITER: usize = 100;
const DAMPING_RADIUS: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    c1: Complex64,
    /// `tail[j] = c₋(j+1)`.
    tail: Vec<Complex64>,
}

impl ShapeSpec {
    /// Validates `c₁ ≠ 0` and non-negative area.
    pub fn new(c1: Complex64, tail: Vec<Complex64>) -> Result<Self> {
        if !(c1.norm() > 0.0) || !c1.is_finite() {
            return invalid("c1 must be nonzero and finite");
        }
        if tail.iter().any(|c| !c.is_finite()) {
            return invalid("tail coefficients must be finite");
        }
        let s = Self { c1, tail };
        let a = s.area();
        if a < -AREA_TOL {
            return invalid(format!("negative area {a:e}"));
        }
        Ok(s)
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn tail(&self) -> &[Complex64] {
        &self.tail
    }

    /// Truncation order `M` (length of the tail).
    pub fn truncation(&self) -> usize {
        self.tail.len()
    }

    /// `c_k`, zero outside `{1, −1, …, −M}`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        match k {
            1 => self.c1,
            k if k <= -1 && ((-k) as usize) <= self.tail.len() => self.tail[(-k - 1) as usize],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// The full sequence `c` as a [`CoeffSeq`] over `[−M, 1]`.
    pub fn coeffs(&self) -> CoeffSeq {
        let m = self.tail.len();
        let mut v = Vec::with_capacity(m + 2);
        v.extend(self.tail.iter().rev().copied());
        v.push(Complex64::new(0.0, 0.0));
        v.push(self.c1);
        CoeffSeq::from_dense(-(m as i64), v)
    }

    pub fn l1_norm(&self) -> f64 {
        self.c1.norm() + self.tail.iter().map(|c| c.norm()).sum::<f64>()
    }

    /// `f(z)` for `|z| ≥ 1`.
    pub fn eval_map(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() < 1.0 - 1e-12 {
            return invalid(format!("|z| = {} < 1", z.norm()));
        }
        Ok(self.f(z))
    }

    /// `f(z)` without the domain check.
    pub fn f(&self, z: Complex64) -> Complex64 {
        let t = z.inv();
        let mut s = Complex64::new(0.0, 0.0);
        for c in self.tail.iter().rev() {
            s = (s + c) * t;
        }
        self.c1 * z + s
    }

    /// `f′(z) = c₁ − Σ m c₋ₘ z^{−m−1}`.
    pub fn df(&self, z: Complex64) -> Complex64 {
        let t = z.inv();
        let mut s = Complex64::new(0.0, 0.0);
        for (j, c) in self.tail.iter().enumerate().rev() {
            s = (s + c * (j as f64 + 1.0)) * t;
        }
        self.c1 - s * t
    }

    /// `f⁻¹(z)` for `z` in the fluid domain, with `|f⁻¹(z)| ≥ 1`.
    ///
    /// Newton from `z/c₁`; if that stalls, continuation along the ray from a
    /// far point down to `z`.
    pub fn eval_map_inverse(&self, z: Complex64) -> Result<Complex64> {
        let tol = 1e-12 * (1.0 + z.norm());
        if let Some(w) = self.newton(z, z / self.c1, tol) {
            return Ok(w);
        }
        if z.norm() > 0.0 {
            let far = (4.0 * self.l1_norm() / z.norm()).max(2.0);
            let steps = 64;
            let mut w = z * far / self.c1;
            for j in 1..=steps {
                let rho = far.powf(1.0 - j as f64 / steps as f64);
                let zj = z * rho;
                let tj = 1e-12 * (1.0 + zj.norm());
                match self.newton(zj, w, tj) {
                    Some(next) => w = next,
                    None => break,
                }
                if j == steps {
                    return Ok(w);
                }
            }
        }
        let w = z / self.c1;
        Err(Error::InversionFailed {
            z,
            residual: (self.f(w) - z).norm(),
        })
    }

    fn newton(&self, z: Complex64, w0: Complex64, tol: f64) -> Option<Complex64> {
        let mut w = w0;
        if w.norm() < 1.0 {
            w /= w.norm().max(1e-300);
        }
        let mut res = (self.f(w) - z).norm();
        for _ in 0..NEWTON_MAX_ITER {
            if res <= tol {
                break;
            }
            let d = self.df(w);
            if d.norm() == 0.0 {
                return None;
            }
            let step = (self.f(w) - z) / d;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = w - step * lambda;
                if cand.norm() >= DAMPING_RADIUS {
                    w = cand;
                    res = (self.f(w) - z).norm();
                    accepted = true;
                    break;
                }
                let r = (self.f(cand) - z).norm();
                if cand.norm() >= 1.0 && r < res {
                    w = cand;
                    res = r;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        (res <= tol && w.norm() >= 1.0 - 1e-9).then_some(w)
    }

    /// `π Σ_{k≤1} k|c_k|²`.
    pub fn area(&self) -> f64 {
        let tail: f64 = self
            .tail
            .iter()
            .enumerate()
            .map(|(j, c)| (j as f64 + 1.0) * c.norm_sqr())
            .sum();
        PI * (self.c1.norm_sqr() - tail)
    }

    /// Zero-area shapes such as segments and arcs.
    pub fn is_degenerate(&self) -> bool {
        self.area().abs() <= 1e-9 * self.c1.norm_sqr().max(1.0)
    }

    /// `f(e^{2πij/M})`, `j = 0..M`, counterclockwise.
    pub fn boundary(&self, m: usize) -> Result<Vec<Complex64>> {
        if m < 3 {
            return invalid("boundary needs at least 3 samples");
        }
        Ok((0..m).map(|j| self.f(cis(TAU * j as f64 / m as f64))).collect())
    }

    /// Largest `m` with `k ≡ 1 (mod m)` for every `k` in the support, i.e. the
    /// order of the rotational symmetry. A disk reports `0`.
    pub fn symmetry_order(&self) -> u32 {
        let mut g = 0u64;
        for (j, c) in self.tail.iter().enumerate() {
            if c.norm() != 0.0 {
                g = gcd(g, j as u64 + 2);
            }
        }
        g as u32
    }

    /// Polyline self-intersection test on `M` boundary samples. Diagnostic
    /// only; univalence is never enforced.
    pub fn boundary_self_intersects(&self, m: usize) -> Result<bool> {
        let p = self.boundary(m)?;
        let n = p.len();
        for i in 0..n {
            let (a, b) = (p[i], p[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (p[j], p[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Disk of the given radius centred at the reference point.
pub fn make_disk(radius: f64) -> Result<ShapeSpec> {
    if !(radius > 0.0) {
        return invalid("radius must be positive");
    }
    ShapeSpec::new(Complex64::new(radius, 0.0), vec![])
}

/// Ellipse with semi-axes `a > b > 0`, major axis along the real axis.
pub fn make_ellipse(a: f64, b: f64) -> Result<ShapeSpec> {
    if !(b > 0.0) || !(a > b) {
        return invalid("ellipse needs a > b > 0");
    }
    ShapeSpec::new(
        Complex64::new((a + b) / 2.0, 0.0),
        vec![Complex64::new((a - b) / 2.0, 0.0)],
    )
}

/// Circular arc `f(z) = z + (1−h²)/(z+ih)` for `0 < h < 1`, with the tail
/// truncated once `|c₋ₘ| < 1e−14`.
pub fn make_arc(h: f64) -> Result<ShapeSpec> {
    if !(h > 0.0 && h < 1.0) {
        return invalid("arc parameter h must lie in (0, 1)");
    }
    let q = 1.0 - h * h;
    let ratio = Complex64::new(0.0, -h);
    let mut tail = Vec::new();
    let mut ck = Complex64::new(q, 0.0);
    while ck.norm() >= 1e-14 {
        tail.push(ck);
        ck *= ratio;
    }
    ShapeSpec::new(Complex64::new(1.0, 0.0), tail)
}

/// Segment of half-length `2R` through the reference point at angle `θ`.
pub fn make_segment(radius: f64, theta: f64) -> Result<ShapeSpec> {
    if !(radius > 0.0) {
        return invalid("segment radius must be positive");
    }
    let c = cis(theta) * radius;
    ShapeSpec::new(c, vec![c])
}

/// Shape with `c₁, c₋₄, c₋₇` nonzero and every other coefficient null.
pub fn make_c147(c1: Complex64, cm4: Complex64, cm7: Complex64) -> Result<ShapeSpec> {
    if c1.norm() == 0.0 || cm4.norm() == 0.0 || cm7.norm() == 0.0 {
        return invalid("c1, c-4 and c-7 must all be nonzero");
    }
    let area = PI * (c1.norm_sqr() - 4.0 * cm4.norm_sqr() - 7.0 * cm7.norm_sqr());
    if area <= 0.0 {
        return invalid(format!("non-positive area {area:e}"));
    }
    let zero = Complex64::new(0.0, 0.0);
    ShapeSpec::new(c1, vec![zero, zero, zero, cm4, zero, zero, cm7])
}
