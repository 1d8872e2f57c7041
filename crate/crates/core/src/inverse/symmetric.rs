use super::{geom_nonzero, model_residual, unit, zero_floor, DetectionResult, Resolved};
use crate::error::{invalid, Result};
use crate::rigid::Configuration;
use crate::shape::ShapeSpec;
use crate::spectral::{geometry_coeffs, reexpand, GeometryCoeffs, MomentProvider, MomentTable};
use crate::{cis, wrap_angle, Complex64, I};
use std::f64::consts::FRAC_PI_2;

struct Partial {
    table: MomentTable,
    geom: GeometryCoeffs,
    l1: f64,
    floor: f64,
    r: Complex64,
    w_world: Complex64,
    omega_abs: f64,
    /// Moments transported to `r`: `P_n = e^{inα}(−𝒜_n w̄₀ + ℬ_n w₀ + iω𝒞_n)`.
    body: Vec<Complex64>,
}

fn partial<P: MomentProvider>(shape: &ShapeSpec, provider: &P, nu: Complex64) -> Result<Partial> {
    if !shape.symmetry_order().is_multiple_of(4) {
        return invalid(format!(
            "shape symmetry order {} is not a multiple of 4",
            shape.symmetry_order()
        ));
    }
    let table = provider.moments(nu)?;
    let n = table.len();
    if n < 2 {
        return invalid("need at least 2 moments");
    }
    let floor = zero_floor(&table)?;
    let geom = geometry_coeffs(shape, n)?;
    let l1 = shape.l1_norm();
    let first_c = |from: usize, need_next: bool| {
        (from..=n).find(|&m| {
            geom_nonzero(geom.c_k(m), l1, m + 2) && (!need_next || (m < n && table.get(m).norm() > floor))
        })
    };
    let l1m = table.get(1);
    let (r, w_world) = if l1m.norm() > floor {
        // λ₁(ν − r) + λ₂(ν) = 0
        (nu + table.get(2) / l1m, l1m / geom.b_k(1))
    } else {
        // w₀ = 0; λ_{m+1}(ν) = mλ_m(ν)(r − ν) at the first m with 𝒞_m λ_m ≠ 0
        let m = first_c(1, true).ok_or_else(|| {
            crate::Error::InvalidArgument("no m with 𝒞_m ≠ 0 and λ_m ≠ 0 within N; raise N".into())
        })?;
        (nu + table.get(m + 1) / (m as f64 * table.get(m)), Complex64::new(0.0, 0.0))
    };
    let body = reexpand(&table.lambdas, nu, r);
    let m = first_c(1, false)
        .ok_or_else(|| crate::Error::InvalidArgument("no m with 𝒞_m ≠ 0 within N; raise N".into()))?;
    let omega_abs = body[m - 1].norm() / geom.c_k(m).norm();
    Ok(Partial {
        table,
        geom,
        l1,
        floor,
        r,
        w_world,
        omega_abs,
        body,
    })
}

/// Magnitude misfit of the transported moments against the residue-class
/// pattern of a quarter-symmetric shape, which is independent of `α`.
fn pattern_residual(p: &Partial) -> f64 {
    let w = p.w_world.norm();
    let sup = p.body.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    p.body
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = i + 1;
            let expected = match n % 4 {
                1 => p.geom.b_k(n).norm() * w,
                3 => p.geom.a_k(n).norm() * w,
                0 => p.geom.c_k(n).norm() * p.omega_abs,
                _ => 0.0,
            };
            (v.norm() - expected).abs() / sup
        })
        .fold(0.0, f64::max)
}

/// Recovers `r`, `e^{iα}w₀` and `|ω|` for a shape invariant under rotation
/// by `π/2`. `α` and the sign of `ω` stay unresolved; the single reported
/// configuration carries `α = 0`, `w₀ = e^{iα}w₀` and `ω = |ω|`.
pub fn detect_quarter_symmetric<P: MomentProvider>(shape: &ShapeSpec, provider: &P, nu: Complex64) -> Result<DetectionResult> {
    let p = partial(shape, provider, nu)?;
    Ok(DetectionResult {
        method: "quarter-symmetric".into(),
        configurations: vec![Configuration::new(0.0, p.r, p.omega_abs, p.w_world)],
        resolved: Resolved {
            r: true,
            alpha_mod: None,
            w_world: true,
            omega_abs_only: true,
        },
        residual: pattern_residual(&p),
        phase_defect: 0.0,
        partial: true,
        candidates: Vec::new(),
    })
}

/// Full detection of a quarter-symmetric shape when a pair of nonzero
/// coefficients four indices apart exists for an active velocity component.
/// Returns the 4-member class `α + kπ/2`; falls back to the partial result
/// (with `partial = true`) when no such pair is available.
pub fn detect_quarter_full<P: MomentProvider>(shape: &ShapeSpec, provider: &P, nu: Complex64) -> Result<DetectionResult> {
    let p = partial(shape, provider, nu)?;
    let n = p.body.len();
    let pn = |k: usize| p.body[k - 1];
    let live = |k: usize| pn(k).norm() > p.floor;
    let w2 = p.w_world.norm_sqr();
    let om2 = p.omega_abs * p.omega_abs;

    // e^{4iα} = P_{m+4} P̄_m / (X_{m+4} X̄_m · |coefficient|²)
    let mut e4 = None;
    for m in 1..n.saturating_sub(3) {
        let pairs: [(Complex64, Complex64, f64, usize); 3] = [
            (p.geom.c_k(m), p.geom.c_k(m + 4), om2, m + 2),
            (-p.geom.a_k(m), -p.geom.a_k(m + 4), w2, m + 1),
            (p.geom.b_k(m), p.geom.b_k(m + 4), w2, m + 1),
        ];
        for (x, y, mag, deg) in pairs {
            if mag > 0.0
                && geom_nonzero(x, p.l1, deg)
                && geom_nonzero(y, p.l1, deg + 4)
                && live(m)
                && live(m + 4)
            {
                e4 = Some(pn(m + 4) * pn(m).conj() / (y * x.conj() * mag));
                break;
            }
        }
        if e4.is_some() {
            break;
        }
    }
    let Some(q) = e4 else {
        let mut res = detect_quarter_symmetric(shape, provider, nu)?;
        res.method = "quarter-full".into();
        return Ok(res);
    };
    let (e4, defect) = unit(q)?;
    let alpha0 = wrap_angle(e4.arg()) / 4.0;

    // sign of ω from the first live 𝒞_m, m ≡ 0 (mod 4)
    let omega = (1..=n)
        .find(|&m| geom_nonzero(p.geom.c_k(m), p.l1, m + 2) && live(m))
        .map(|m| (pn(m) / (I * p.geom.c_k(m) * cis(m as f64 * alpha0))).re)
        .unwrap_or(0.0);

    let configurations: Vec<Configuration> = (0..4)
        .map(|k| {
            let a = alpha0 + k as f64 * FRAC_PI_2;
            Configuration::new(a, p.r, omega, cis(-a) * p.w_world)
        })
        .collect();
    Ok(DetectionResult {
        method: "quarter-full".into(),
        residual: model_residual(&p.geom, &configurations[0], &p.table),
        configurations,
        resolved: Resolved {
            r: true,
            alpha_mod: Some(4),
            w_world: true,
            omega_abs_only: false,
        },
        phase_defect: defect,
        partial: false,
        candidates: Vec::new(),
    })
}
