use super::{bezout_angle, geom_nonzero, model_residual, unit, zero_floor, Candidate, DetectionResult, Resolved};
use crate::error::{invalid, Error, Result};
use crate::rigid::Configuration;
use crate::shape::ShapeSpec;
use crate::spectral::{geometry_coeffs, reexpand, GeometryCoeffs, MomentProvider, MomentTable};
use crate::{cis, Complex64, I};
use serde::{Deserialize, Serialize};

/// Motion classes distinguished by the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum C147Case {
    /// `ω ≠ 0`, `w₀ ≠ 0`.
    Generic,
    /// `ω = 0`.
    Translation,
    /// `w₀ = 0`.
    Rotation,
}

impl C147Case {
    pub fn label(self) -> &'static str {
        match self {
            C147Case::Generic => "generic",
            C147Case::Translation => "translation",
            C147Case::Rotation => "rotation",
        }
    }
}

struct Ctx<'a> {
    t: &'a MomentTable,
    g: &'a GeometryCoeffs,
    floor: f64,
}

impl Ctx<'_> {
    fn lam(&self, n: usize) -> Complex64 {
        self.t.get(n)
    }

    fn live(&self, v: Complex64) -> bool {
        v.norm() > self.floor
    }
}

type Found = Option<Result<(Configuration, f64)>>;

fn translating_centre(x: &Ctx) -> (Complex64, Vec<Complex64>) {
    // λ₁(ν − r) + λ₂(ν) = 0
    let r = x.t.nu + x.lam(2) / x.lam(1);
    (r, reexpand(&x.t.lambdas, x.t.nu, r))
}

fn generic(x: &Ctx) -> Found {
    if !x.live(x.lam(1)) {
        return None;
    }
    let (r, p) = translating_centre(x);
    if !x.live(p[2]) {
        return None;
    }
    let g = x.g;
    let b1 = g.b_k(1);
    let w2 = (x.lam(1) / b1).norm_sqr();
    Some((|| {
        // P₄P₁ = −e^{5iα} 𝒜₄ℬ₁|w₀|²
        let (e5, d5) = unit(p[3] * p[0] / (-g.a_k(4) * b1 * w2))?;
        // P₃/(i𝒞₃) = ωe^{3iα}: squaring removes the sign of ω
        let (t3, _) = unit(p[2] / (I * g.c_k(3)))?;
        let alpha = bezout_angle(&[(6, t3 * t3), (5, e5)])?;
        let omega = (p[2] / (I * g.c_k(3) * cis(3.0 * alpha))).re;
        let w0 = cis(-alpha) * x.lam(1) / b1;
        Ok((Configuration::new(alpha, r, omega, w0), d5))
    })())
}

fn translation(x: &Ctx) -> Found {
    if !x.live(x.lam(1)) {
        return None;
    }
    let (r, p) = translating_centre(x);
    let g = x.g;
    let b1 = g.b_k(1);
    let w2 = (x.lam(1) / b1).norm_sqr();
    Some((|| {
        // P₆P̄₁ = e^{5iα}ℬ₆ℬ̄₁|w₀|², P₇P₁ = −e^{8iα}𝒜₇ℬ₁|w₀|²
        let (e5, d5) = unit(p[5] * p[0].conj() / (g.b_k(6) * b1.conj() * w2))?;
        let (e8, d8) = unit(p[6] * p[0] / (-g.a_k(7) * b1 * w2))?;
        let alpha = bezout_angle(&[(5, e5), (8, e8)])?;
        let w0 = cis(-alpha) * x.lam(1) / b1;
        Ok((Configuration::new(alpha, r, 0.0, w0), d5.max(d8)))
    })())
}

fn rotation(x: &Ctx) -> Found {
    // w₀ = 0 forces λ₁ = λ₂(ν) = 0
    if x.live(x.lam(1)) || x.live(x.lam(2)) || !x.live(x.lam(3)) {
        return None;
    }
    // λ₄(ν) + 3(ν − r)λ₃ = 0
    let r = x.t.nu + x.lam(4) / (3.0 * x.lam(3));
    let p = reexpand(&x.t.lambdas, x.t.nu, r);
    let g = x.g;
    let om2 = (p[2] / g.c_k(3)).norm_sqr();
    Some((|| {
        // P₅P̄₃ = e^{2iα}𝒞₅𝒞̄₃ω², P₈P̄₅ = e^{3iα}𝒞₈𝒞̄₅ω²
        let (e2, d2) = unit(p[4] * p[2].conj() / (g.c_k(5) * g.c_k(3).conj() * om2))?;
        let (e3, d3) = unit(p[7] * p[4].conj() / (g.c_k(8) * g.c_k(5).conj() * om2))?;
        let alpha = bezout_angle(&[(2, e2), (3, e3)])?;
        let omega = (p[2] / (I * g.c_k(3) * cis(3.0 * alpha))).re;
        Ok((Configuration::new(alpha, r, omega, Complex64::new(0.0, 0.0)), d2.max(d3)))
    })())
}

/// Detection for shapes with only `c₁`, `c₋₄`, `c₋₇` nonzero. Every case
/// whose pivots are nonzero is attempted; the one with the smallest moment
/// misfit is returned and all attempts are listed in `candidates`.
pub fn detect_c147<P: MomentProvider>(shape: &ShapeSpec, provider: &P, nu: Complex64) -> Result<DetectionResult> {
    for (j, v) in shape.tail().iter().enumerate() {
        if *v != Complex64::new(0.0, 0.0) && j != 3 && j != 6 {
            return invalid(format!("c₋{} ≠ 0: not a (c₁, c₋₄, c₋₇) shape", j + 1));
        }
    }
    if shape.coeff(-4) == Complex64::new(0.0, 0.0) || shape.coeff(-7) == Complex64::new(0.0, 0.0) {
        return invalid("c₋₄ and c₋₇ must both be nonzero");
    }
    let t = provider.moments(nu)?;
    if t.len() < 8 {
        return invalid("need at least 8 moments");
    }
    let floor = zero_floor(&t)?;
    let g = geometry_coeffs(shape, t.len())?;
    let l1 = shape.l1_norm();
    for (v, deg) in [(g.a_k(4), 5), (g.a_k(7), 8), (g.b_k(6), 7), (g.c_k(3), 5), (g.c_k(5), 7), (g.c_k(8), 10)] {
        if !geom_nonzero(v, l1, deg) {
            return Err(Error::Numerical("a pivot geometry coefficient vanishes".into()));
        }
    }
    let x = Ctx { t: &t, g: &g, floor };
    let mut candidates = Vec::new();
    let mut best: Option<(Configuration, f64, f64, C147Case)> = None;
    let mut first_err = None;
    for (case, found) in [
        (C147Case::Generic, generic(&x)),
        (C147Case::Translation, translation(&x)),
        (C147Case::Rotation, rotation(&x)),
    ] {
        match found {
            None => {}
            Some(Err(e)) => {
                first_err.get_or_insert(e);
            }
            Some(Ok((cfg, defect))) => {
                let residual = model_residual(&g, &cfg, &t);
                candidates.push(Candidate {
                    label: case.label().into(),
                    configuration: cfg,
                    residual,
                });
                if best.as_ref().is_none_or(|b| residual < b.1) {
                    best = Some((cfg, residual, defect, case));
                }
            }
        }
    }
    let Some((cfg, residual, defect, case)) = best else {
        return Err(first_err.unwrap_or_else(|| Error::Numerical("no detection case applies".into())));
    };
    Ok(DetectionResult {
        method: format!("c147/{}", case.label()),
        configurations: vec![cfg],
        resolved: Resolved {
            r: true,
            alpha_mod: Some(1),
            w_world: true,
            omega_abs_only: false,
        },
        residual,
        phase_defect: defect,
        partial: false,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigid::equivalent_with_tol;
    use crate::shape::make_c147;
    use crate::spectral::ClosedFormProvider;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shape() -> ShapeSpec {
        make_c147(c(1.0, 0.3), c(0.12, -0.04), c(0.03, 0.05)).unwrap()
    }

    fn check(cfg: Configuration, case: &str) {
        let p = ClosedFormProvider::new(&shape(), &cfg, 12).unwrap();
        let res = detect_c147(&shape(), &p, c(0.5, -0.2)).unwrap();
        assert_eq!(res.configurations.len(), 1);
        assert_eq!(res.method, format!("c147/{case}"));
        assert!(equivalent_with_tol(&res.configurations[0], &cfg, 1, 1e-6).unwrap(), "{res:?}");
        assert!(res.phase_defect < 1e-8);
    }

    #[test]
    fn generic_case() {
        check(Configuration::new(2.3, c(0.4, 1.0), -0.9, c(0.7, -0.2)), "generic");
    }

    #[test]
    fn translation_case() {
        check(Configuration::new(4.1, c(-1.0, 0.2), 0.0, c(-0.3, 0.5)), "translation");
    }

    #[test]
    fn rotation_case() {
        check(Configuration::new(0.6, c(0.0, -0.7), 1.4, c(0.0, 0.0)), "rotation");
    }

    #[test]
    fn wrong_family_rejected() {
        let e = crate::shape::make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.0, c(0.0, 0.0), 1.0, c(1.0, 0.0));
        let p = ClosedFormProvider::new(&e, &cfg, 12).unwrap();
        assert!(detect_c147(&e, &p, c(0.0, 0.0)).is_err());
    }
}
