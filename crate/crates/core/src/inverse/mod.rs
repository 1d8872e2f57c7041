//! Detection: recovering the position and velocity of a solid of known shape
//! from the moments of the potential.

mod c147;
mod ellipse;
mod lm;
mod symmetric;

pub use c147::{detect_c147, C147Case};
pub use ellipse::{detect_ellipse, EllipseOptions};
pub use symmetric::{detect_quarter_full, detect_quarter_symmetric};

use crate::error::{invalid, Error, Result};
use crate::rigid::{Configuration, Position, RigidVelocity};
use crate::spectral::{invert_moments, moments_from_geometry, GeometryCoeffs, MomentTable};
use crate::{wrap_angle, Complex64};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Moments below this fraction of `‖Λ‖∞` count as zero in case splits.
pub const ZERO_REL: f64 = 1e-9;

/// Which parameters a detection determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolved {
    pub r: bool,
    /// `Some(m)`: `α` is known modulo `2π/m`. `None`: unresolved.
    pub alpha_mod: Option<u32>,
    pub w_world: bool,
    /// Only `|ω|` is known; the reported `ω` is nonnegative.
    pub omega_abs_only: bool,
}

/// An alternative solution considered by a detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub configuration: Configuration,
    pub residual: f64,
}

/// Output of a detector: the equivalence class of solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub method: String,
    pub configurations: Vec<Configuration>,
    pub resolved: Resolved,
    /// Relative misfit of the solution against the measured moments.
    pub residual: f64,
    /// Largest `||q| − 1|` over recovered phase quantities `q`.
    pub phase_defect: f64,
    /// The detector could only determine part of the configuration.
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Candidate>,
}

/// Velocity recovered at a known position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityFit {
    pub velocity: RigidVelocity,
    /// `‖𝒢U − m‖ / ‖m‖` (absolute when `m = 0`).
    pub residual: f64,
    pub rank: usize,
}

/// Solves `𝒢_N U = Θ_N(r − ν, α)⁻¹Λ_N` in the real least-squares sense.
pub fn recover_velocity(geom: &GeometryCoeffs, pos: &Position, table: &MomentTable) -> Result<VelocityFit> {
    let n = table.len();
    if n == 0 {
        return invalid("empty moment table");
    }
    if geom.len() < n {
        return invalid(format!("geometry has {} coefficients, table has {n}", geom.len()));
    }
    let geom = geom.truncate(n);
    let m = invert_moments(table, pos.r, pos.alpha);
    let a = geom.real_matrix();
    let b = DVector::from_iterator(2 * n, m.iter().flat_map(|v| [v.re, v.im]));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
    if smax == 0.0 || rank < 3 {
        return Err(Error::RankDeficient { rank, n });
    }
    let u = svd
        .solve(&b, 1e-10 * smax)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let defect = (&a * &u - &b).norm();
    let bn = b.norm();
    Ok(VelocityFit {
        velocity: RigidVelocity::from_vector([u[0], u[1], u[2]]),
        residual: if bn > 0.0 { defect / bn } else { defect },
        rank,
    })
}

/// Recovers `α ∈ [0, 2π)` from values `e^{inα}` with coprime `n`'s through an
/// integer combination `Σ uᵢnᵢ = 1`.
pub fn bezout_angle(constraints: &[(u64, Complex64)]) -> Result<f64> {
    if constraints.is_empty() {
        return invalid("no constraints");
    }
    for &(n, e) in constraints {
        if n == 0 {
            return invalid("multipliers must be positive");
        }
        if (e.norm() - 1.0).abs() > 1e-6 {
            return invalid(format!("|e^{{i{n}α}}| = {} is not 1", e.norm()));
        }
    }
    let (g, coeffs) = bezout_coeffs(&constraints.iter().map(|c| c.0 as i64).collect::<Vec<_>>());
    if g != 1 {
        return Err(Error::NotCoprime { gcd: g as u64 });
    }
    let z = constraints
        .iter()
        .zip(&coeffs)
        .fold(Complex64::new(1.0, 0.0), |acc, (&(_, e), &u)| acc * (e / e.norm()).powi(u as i32));
    Ok(wrap_angle(z.arg()))
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// `gcd(ns)` and integers `u` with `Σ uᵢnᵢ = gcd`.
fn bezout_coeffs(ns: &[i64]) -> (i64, Vec<i64>) {
    let mut g = ns[0];
    let mut coeffs = vec![1];
    for &n in &ns[1..] {
        let (h, x, y) = egcd(g, n);
        coeffs.iter_mut().for_each(|u| *u *= x);
        coeffs.push(y);
        g = h;
    }
    (g, coeffs)
}

/// Relative 2-norm misfit between the moments of `cfg` and the table.
pub fn model_residual(geom: &GeometryCoeffs, cfg: &Configuration, table: &MomentTable) -> f64 {
    let pred = moments_from_geometry(&geom.truncate(table.len()), cfg, table.nu);
    let num: f64 = pred
        .lambdas
        .iter()
        .zip(&table.lambdas)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = table.lambdas.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn zero_floor(table: &MomentTable) -> Result<f64> {
    let sup = table.sup_norm();
    if !(sup > 0.0) {
        return Err(Error::Stealth("all moments vanish".into()));
    }
    Ok(ZERO_REL * sup)
}

/// A geometry coefficient of polynomial degree `deg` in the `c_k` counts as
/// zero below `1e−10 ‖c‖₁^deg`.
fn geom_nonzero(x: Complex64, l1: f64, deg: usize) -> bool {
    x.norm() > 1e-10 * l1.powi(deg as i32)
}

/// Normalizes a phase quantity, returning it with its modulus defect.
fn unit(q: Complex64) -> Result<(Complex64, f64)> {
    let m = q.norm();
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Numerical("phase quantity vanished".into()));
    }
    Ok((q / m, (m - 1.0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{make_c147, make_disk, make_ellipse};
    use crate::spectral::{geometry_coeffs, moments_closed_form};
    use crate::cis;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bezout_examples() {
        let a = bezout_angle(&[(3, cis(2.1)), (5, cis(3.5))]).unwrap();
        assert!((a - 0.7).abs() < 1e-12);
        assert!((bezout_angle(&[(1, cis(1.25))]).unwrap() - 1.25).abs() < 1e-12);
        assert!(matches!(
            bezout_angle(&[(2, cis(1.0)), (4, cis(2.0))]),
            Err(Error::NotCoprime { gcd: 2 })
        ));
        assert!(bezout_angle(&[(1, c(2.0, 0.0))]).is_err());
    }

    #[test]
    fn bezout_coefficients_sum_to_gcd() {
        for ns in [vec![3, 5], vec![5, 8], vec![6, 10, 15], vec![4, 6]] {
            let (g, u) = bezout_coeffs(&ns);
            assert_eq!(ns.iter().zip(&u).map(|(n, u)| n * u).sum::<i64>(), g);
        }
    }

    proptest! {
        #[test]
        fn bezout_recovers_planted_angle(alpha in 0.0..std::f64::consts::TAU, pair in prop::sample::select(vec![(3u64, 5u64), (5, 8), (2, 3), (6, 5)])) {
            let got = bezout_angle(&[(pair.0, cis(pair.0 as f64 * alpha)), (pair.1, cis(pair.1 as f64 * alpha))]).unwrap();
            prop_assert!(crate::angle_diff(got, alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn velocity_round_trip() {
        let s = make_c147(c(1.0, 0.2), c(0.1, -0.05), c(0.03, 0.02)).unwrap();
        let cfg = Configuration::new(0.8, c(0.3, -1.0), -0.7, c(0.4, 1.1));
        let geom = geometry_coeffs(&s, 12).unwrap();
        // Θ⁻¹ amplifies roundoff like (1 + |r − ν|)^N, so the residual bound
        // is checked close to r and the velocity far from it
        for (nu, max_res) in [(c(0.6, -0.6), 1e-10), (c(1.0, 1.0), 1e-8)] {
            let t = moments_closed_form(&s, &cfg, nu, 12).unwrap();
            let fit = recover_velocity(&geom, &cfg.position, &t).unwrap();
            let d = RigidVelocity::new(fit.velocity.omega - cfg.omega(), fit.velocity.w0 - cfg.w0());
            assert!(d.omega.abs() < 1e-8 && d.w0.norm() < 1e-8, "{d:?}");
            assert!(fit.residual < max_res, "{fit:?}");
            assert_eq!(fit.rank, 3);
        }
    }

    #[test]
    fn zero_measurements_give_zero_velocity() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let geom = geometry_coeffs(&e, 8).unwrap();
        let t = MomentTable {
            nu: c(0.0, 0.0),
            lambdas: vec![c(0.0, 0.0); 8],
        };
        let fit = recover_velocity(&geom, &Position::new(0.3, c(1.0, 0.0)), &t).unwrap();
        assert!(fit.velocity.is_zero());
    }

    #[test]
    fn disk_is_rank_deficient() {
        let d = make_disk(1.0).unwrap();
        let geom = geometry_coeffs(&d, 8).unwrap();
        let t = MomentTable {
            nu: c(0.0, 0.0),
            lambdas: vec![c(1.0, 0.0); 8],
        };
        assert!(matches!(
            recover_velocity(&geom, &Position::new(0.0, c(0.0, 0.0)), &t),
            Err(Error::RankDeficient { rank: 2, .. })
        ));
    }

    #[test]
    fn misplaced_position_shows_in_residual() {
        let s = make_c147(c(1.0, 0.0), c(0.15, 0.0), c(0.05, 0.02)).unwrap();
        let cfg = Configuration::new(0.4, c(0.0, 0.5), 1.3, c(-0.6, 0.9));
        let geom = geometry_coeffs(&s, 12).unwrap();
        let t = moments_closed_form(&s, &cfg, c(0.0, 0.0), 12).unwrap();
        let wrong = Position::new(0.4, cfg.r() + c(0.1, 0.0));
        assert!(recover_velocity(&geom, &wrong, &t).unwrap().residual > 1e-2);
    }
}
