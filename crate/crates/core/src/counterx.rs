//! Families of non-detectable solids: `n` congruent solids at `n` positions,
//! each rotating about its own centre, all generating the potential `i/zⁿ`.
//!
//! Each boundary is a level set of `g(x) = ω|x − s|²/2 − ψ(x) − λ′` with
//! `ψ = Re(z⁻ⁿ) = cos(nθ)r⁻ⁿ`, found by bisection along rays from `s`.

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::rigid::{equivalent, Configuration, Position, RigidVelocity};
use crate::{cis, Complex64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// How the signed `level` argument enters `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelConvention {
    /// `g = ω|x − s|²/2 − ψ − level`.
    Minus,
    /// `g = ω|x − s|²/2 − ψ + level`.
    Plus,
}

/// One member of a counterexample family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetShape {
    /// 0-based index `k − 1`.
    pub member: usize,
    pub n: u32,
    pub omega: f64,
    /// Rotation centre `s_k`.
    pub s: Complex64,
    /// Signed level as supplied.
    pub level: f64,
    /// Positive level `λ′` actually used.
    pub effective_level: f64,
    pub convention: LevelConvention,
    /// Closed polyline; the last point is the root on the ray at `2π`.
    pub boundary: Vec<Complex64>,
    pub velocity: RigidVelocity,
    pub position: Position,
}

impl LevelSetShape {
    pub fn configuration(&self) -> Configuration {
        Configuration {
            position: self.position,
            velocity: self.velocity,
        }
    }
}

/// `ψ(x) = Im(i/zⁿ) = Re(z⁻ⁿ)`.
pub fn stream_function(n: u32, x: Complex64) -> f64 {
    x.powi(-(n as i32)).re
}

fn g(n: u32, omega: f64, s: Complex64, lam: f64, x: Complex64) -> f64 {
    0.5 * omega * (x - s).norm_sqr() - stream_function(n, x) - lam
}

const SCAN: usize = 4000;

/// Root of `g` along the ray `s + ρe^{iθ}` nearest the predicted radius.
fn ray_root(n: u32, omega: f64, s: Complex64, lam: f64, theta: f64, rmax: f64) -> Option<Complex64> {
    let dir = cis(theta);
    let h = |rho: f64| g(n, omega, s, lam, s + dir * rho);
    let predicted = (2.0 * lam / omega).sqrt();
    let rmin = 0.1;
    let step = (rmax - rmin) / SCAN as f64;
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (rmin, h(rmin));
    for i in 1..=SCAN {
        let rho = rmin + step * i as f64;
        let v = h(rho);
        if prev.1.is_finite() && v.is_finite() && prev.1.signum() != v.signum() {
            let mid = 0.5 * (prev.0 + rho);
            if best.is_none_or(|(lo, _)| (mid - predicted).abs() < (lo + 0.5 * step - predicted).abs()) {
                best = Some((prev.0, rho));
            }
        }
        prev = (rho, v);
    }
    let (mut lo, mut hi) = best?;
    let mut flo = h(lo);
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = h(mid);
        if fm == 0.0 {
            return Some(s + dir * mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(s + dir * (0.5 * (lo + hi)))
}

/// Builds the `n` members with centres `s_k = ρe^{2πi(k−1)/n}`.
pub fn build_family(n: u32, omega: f64, rho: f64, level: f64, resolution: usize) -> Result<Vec<LevelSetShape>> {
    build_family_with(n, omega, rho, level, resolution, Exec::default())
}

pub fn build_family_with(
    n: u32,
    omega: f64,
    rho: f64,
    level: f64,
    resolution: usize,
    exec: Exec,
) -> Result<Vec<LevelSetShape>> {
    if n < 2 {
        return invalid("n must be at least 2");
    }
    if !(omega > 0.0) || !(rho > 0.0) || !level.is_finite() {
        return invalid("need omega > 0, rho > 0 and a finite level");
    }
    if level == 0.0 {
        return invalid("level must be nonzero");
    }
    if resolution < 64 {
        return invalid("resolution must be at least 64");
    }
    let rmax = 10.0 * (2.0 * level.abs() / omega + 1.0).sqrt();
    // the construction needs λ′ > 0; try the sign as given first
    let attempts = if level > 0.0 {
        [(level, LevelConvention::Minus), (-level, LevelConvention::Plus)]
    } else {
        [(-level, LevelConvention::Plus), (level, LevelConvention::Minus)]
    };
    let mut last_err = None;
    for (lam, convention) in attempts {
        if lam <= 0.0 {
            continue;
        }
        match build_members(n, omega, rho, lam, resolution, rmax, exec) {
            Ok(members) => {
                return Ok(members
                    .into_iter()
                    .enumerate()
                    .map(|(k, (s, boundary))| LevelSetShape {
                        member: k,
                        n,
                        omega,
                        s,
                        level,
                        effective_level: lam,
                        convention,
                        boundary,
                        velocity: RigidVelocity::new(omega, Complex64::new(0.0, 0.0)),
                        position: Position::new(TAU * k as f64 / n as f64, s),
                    })
                    .collect())
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InvalidArgument("no admissible level".into())))
}

type Member = (Complex64, Vec<Complex64>);

fn build_members(n: u32, omega: f64, rho: f64, lam: f64, res: usize, rmax: f64, exec: Exec) -> Result<Vec<Member>> {
    (0..n as usize)
        .map(|k| {
            let offset = TAU * k as f64 / n as f64;
            let s = cis(offset) * rho;
            // rays offset by the member's rotation so members are exact copies
            let pts = exec.try_map_range(res + 1, |j| {
                let theta = offset + TAU * j as f64 / res as f64;
                ray_root(n, omega, s, lam, theta, rmax).ok_or(Error::NoRoot { member: k, ray: j })
            })?;
            Ok((s, pts))
        })
        .collect()
}

/// Per-member verification maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub member: usize,
    /// `max |ψ − ω|x − s|²/2 + λ′|` on the boundary.
    pub dirichlet_max: f64,
    /// `max |∂_τψ − ωτ·(x − s)|` by chord differences.
    pub slip_max: f64,
    /// `max |Im(i/zⁿ) − cos(nθ)r⁻ⁿ|`.
    pub potential_max: f64,
    pub closure_gap: f64,
    pub simple: bool,
    pub winding: i64,
    /// The singularity of `i/zⁿ` lies inside the solid.
    pub encloses_origin: bool,
    pub min_radius: f64,
    pub max_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub members: Vec<MemberReport>,
    /// Largest Hausdorff distance between member `k` and member 1 rotated by
    /// `2π(k−1)/n`.
    pub congruence_max: f64,
    pub positions_distinct: bool,
}

impl FamilyReport {
    /// Largest boundary-condition residual over all members.
    pub fn max_residual(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.dirichlet_max.max(m.slip_max).max(m.potential_max))
            .fold(0.0, f64::max)
    }
}

pub fn verify_family(family: &[LevelSetShape]) -> FamilyReport {
    let members = family.iter().map(verify_member).collect();
    let congruence_max = family
        .iter()
        .map(|m| {
            let rot = cis(TAU * m.member as f64 / m.n as f64);
            let turned: Vec<Complex64> = family[0].boundary.iter().map(|x| rot * x).collect();
            hausdorff(&turned, &m.boundary)
        })
        .fold(0.0, f64::max);
    let mut positions_distinct = true;
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            if equivalent(&a.configuration(), &b.configuration(), 1).unwrap_or(true) {
                positions_distinct = false;
            }
        }
    }
    FamilyReport {
        members,
        congruence_max,
        positions_distinct,
    }
}

fn verify_member(m: &LevelSetShape) -> MemberReport {
    let b = &m.boundary;
    let psi = |x: Complex64| stream_function(m.n, x);
    let dirichlet_max = b
        .iter()
        .map(|&x| (psi(x) - 0.5 * m.omega * (x - m.s).norm_sqr() + m.effective_level).abs())
        .fold(0.0, f64::max);
    let slip_max = b
        .windows(2)
        .map(|w| {
            let chord = w[1] - w[0];
            let len = chord.norm();
            let tau = chord / len;
            let mid = 0.5 * (w[0] + w[1]);
            let d_psi = (psi(w[1]) - psi(w[0])) / len;
            let rigid = m.omega * (tau.re * (mid - m.s).re + tau.im * (mid - m.s).im);
            (d_psi - rigid).abs()
        })
        .fold(0.0, f64::max);
    let potential_max = b
        .iter()
        .map(|&x| {
            let polar = (m.n as f64 * x.arg()).cos() * x.norm().powi(-(m.n as i32));
            ((I * x.powi(-(m.n as i32))).im - polar).abs()
        })
        .fold(0.0, f64::max);
    let ring = &b[..b.len() - 1];
    let radii = ring.iter().map(|x| (x - m.s).norm());
    MemberReport {
        member: m.member,
        dirichlet_max,
        slip_max,
        potential_max,
        closure_gap: (b[0] - b[b.len() - 1]).norm(),
        simple: is_simple(ring),
        winding: winding_number(ring, m.s),
        encloses_origin: winding_number(ring, Complex64::new(0.0, 0.0)) != 0,
        min_radius: radii.clone().fold(f64::INFINITY, f64::min),
        max_radius: radii.fold(0.0, f64::max),
    }
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Winding number of the closed polygon `ring` about `p`.
pub fn winding_number(ring: &[Complex64], p: Complex64) -> i64 {
    let total: f64 = (0..ring.len())
        .map(|i| ((ring[(i + 1) % ring.len()] - p) / (ring[i] - p)).arg())
        .sum();
    (total / TAU).round() as i64
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// No two non-adjacent edges of the closed polygon cross.
pub fn is_simple(ring: &[Complex64]) -> bool {
    let n = ring.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::moments_contour;

    #[test]
    fn figure3_family() {
        let fam = build_family(6, 0.7, 0.9, -2.5, 512).unwrap();
        assert_eq!(fam.len(), 6);
        assert_eq!(fam[0].convention, LevelConvention::Plus);
        let rep = verify_family(&fam);
        assert!(rep.max_residual() < 1e-6, "{}", rep.max_residual());
        assert!(rep.congruence_max < 1e-6);
        assert!(rep.positions_distinct);
        for m in &rep.members {
            assert!(m.simple && m.winding == 1 && m.encloses_origin);
            assert!(m.closure_gap < 1e-9);
        }
    }

    #[test]
    fn figure1_family() {
        let fam = build_family(2, 1.0, 0.5, 2.0, 256).unwrap();
        assert_eq!(fam[0].convention, LevelConvention::Minus);
        let rep = verify_family(&fam);
        assert!(rep.max_residual() < 1e-6);
        assert!(rep.congruence_max < 1e-6);
    }

    #[test]
    fn dilated_member_fails_dirichlet() {
        let mut fam = build_family(6, 0.7, 0.9, -2.5, 128).unwrap();
        let s = fam[2].s;
        fam[2].boundary.iter_mut().for_each(|x| *x = s + (*x - s) * 1.01);
        let rep = verify_family(&fam);
        assert!(rep.members[2].dirichlet_max > 1e-3);
        assert!(rep.members[0].dirichlet_max < 1e-6);
    }

    #[test]
    fn shared_potential_moments() {
        let t = moments_contour(|z| Ok(I / z.powi(6)), Complex64::new(0.0, 0.0), 10, 1.0, 512).unwrap();
        for n in 1..=10 {
            let expected = if n == 6 { I } else { Complex64::new(0.0, 0.0) };
            assert!((t.get(n) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_family(1, 0.7, 0.9, 2.5, 512).is_err());
        assert!(build_family(6, -0.7, 0.9, 2.5, 512).is_err());
        assert!(build_family(6, 0.7, 0.9, 2.5, 32).is_err());
    }

    #[test]
    fn polygon_helpers() {
        let sq: Vec<Complex64> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&(a, b)| Complex64::new(a, b))
            .collect();
        assert!(is_simple(&sq));
        assert_eq!(winding_number(&sq, Complex64::new(0.5, 0.5)), 1);
        assert_eq!(winding_number(&sq, Complex64::new(2.0, 0.5)), 0);
        let bow: Vec<Complex64> = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
            .iter()
            .map(|&(a, b)| Complex64::new(a, b))
            .collect();
        assert!(!is_simple(&bow));
        assert_eq!(hausdorff(&sq, &sq), 0.0);
    }
}
