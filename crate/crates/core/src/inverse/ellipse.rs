use super::lm::{minimize, Fit};
use super::{model_residual, zero_floor, DetectionResult, Resolved};
use crate::error::{invalid, Error, Result};
use crate::rigid::Configuration;
use crate::shape::make_ellipse;
use crate::spectral::operators::theta_matrix;
use crate::spectral::{geometry_coeffs, localize_chebyshev, reexpand, GeometryCoeffs, MomentProvider, MomentTable, SearchBox};
use crate::{cis, wrap_angle, Complex64, I};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Squared relative misfit at which a seed counts as an exact fit.
const EXACT_FIT: f64 = 1e-24;

#[derive(Debug, Clone, Copy)]
pub struct EllipseOptions {
    /// Region known to contain the centre.
    pub search: SearchBox,
    /// Nodes per side of the localization grid.
    pub grid: usize,
    /// Moments used by the final fit.
    pub fit_order: usize,
}

impl EllipseOptions {
    pub fn new(search: SearchBox) -> Self {
        Self {
            search,
            grid: 41,
            fit_order: 12,
        }
    }
}

/// Detects an ellipse with semi-axes `a > b` up to the `(α, w₀) ↦ (α + π, −w₀)`
/// symmetry.
///
/// The centre is first localized as the minimizer of the singularity radius,
/// then `(r, α)` are polished by a variable-projection least-squares fit of
/// the moments, and finally `w₀` and `ω` follow in closed form from `λ₁` and
/// `λ₂(r)`.
pub fn detect_ellipse<P: MomentProvider>(a: f64, b: f64, provider: &P, opts: &EllipseOptions) -> Result<DetectionResult> {
    if !(a > b && b > 0.0) {
        return invalid("ellipse needs a > b > 0");
    }
    if a - b <= 1e-9 * a {
        return invalid("a − b too small: the branch cut degenerates and α is unobservable");
    }
    let shape = make_ellipse(a, b)?;
    let n = opts.fit_order.min(provider.order()).max(4);
    let geom = geometry_coeffs(&shape, n)?;

    let r0 = localize_chebyshev(provider, opts.search, opts.grid)?;
    let full = provider.moments(r0)?;
    if full.len() < n {
        return invalid(format!("provider supplies {} moments, need {n}", full.len()));
    }
    let table = MomentTable {
        nu: r0,
        lambdas: full.lambdas[..n].to_vec(),
    };
    zero_floor(&table)?;

    // continuation in the number of moments: the low-order misfit has a far
    // wider basin around the solution than the full one
    let mut orders: Vec<usize> = [4, 6, 8].into_iter().filter(|&m| m < n).collect();
    orders.push(n);
    let stages: Vec<(GeometryCoeffs, MomentTable)> = orders
        .iter()
        .map(|&m| {
            let t = MomentTable {
                nu: r0,
                lambdas: table.lambdas[..m].to_vec(),
            };
            (geom.truncate(m), t)
        })
        .collect();
    let mut best: Option<Fit> = None;
    for k in 0..8 {
        let mut start = vec![r0.re, r0.im, k as f64 * PI / 8.0];
        let mut fit = None;
        for (g, t) in &stages {
            let f = minimize(|p: &[f64]| varpro_residual(g, t, Complex64::new(p[0], p[1]), p[2]), &start, 100);
            start = f.params.clone();
            fit = Some(f);
        }
        let fit = fit.expect("at least one stage");
        if best.as_ref().is_none_or(|b| fit.cost < b.cost) {
            best = Some(fit);
        }
        if best.as_ref().is_some_and(|b| b.cost < EXACT_FIT) {
            break;
        }
    }
    let best = best.expect("nonempty seed set");
    let r = Complex64::new(best.params[0], best.params[1]);
    let alpha = wrap_angle(best.params[2]) % PI;

    // μ = lim e^{−iα} ξ(z) z/(a+b) = e^{−iα}λ₁/(a+b)
    let mu = cis(-alpha) * table.get(1) / (a + b);
    let w0 = (mu + mu.conj()) / b + (mu - mu.conj()) / a;

    // λ₂(r) = iω c₁³c₋₁ e^{2iα}; the constant is checked against 𝒞₂
    let kappa = (a + b).powi(3) * (a - b) / 16.0;
    if (geom.c_k(2) - kappa).norm() > 1e-12 * kappa {
        return Err(Error::Numerical(format!(
            "ellipse constant mismatch: 𝒞₂ = {}, expected {kappa}",
            geom.c_k(2)
        )));
    }
    let p = reexpand(&table.lambdas, table.nu, r);
    let omega = (p[1] * cis(-2.0 * alpha) / (I * kappa)).re;

    let first = Configuration::new(alpha, r, omega, w0);
    let second = Configuration::new(alpha + PI, r, omega, -w0);
    Ok(DetectionResult {
        method: "ellipse".into(),
        residual: model_residual(&geom, &first, &table),
        configurations: vec![first, second],
        resolved: Resolved {
            r: true,
            alpha_mod: Some(2),
            w_world: true,
            omega_abs_only: false,
        },
        phase_defect: 0.0,
        partial: false,
        candidates: Vec::new(),
    })
}

/// Residual of `Λ ≈ Θ(r − ν, α)𝒢U` with `U` eliminated by least squares.
fn varpro_residual(geom: &GeometryCoeffs, table: &MomentTable, r: Complex64, alpha: f64) -> Vec<f64> {
    let n = table.len();
    let theta = theta_matrix(r - table.nu, alpha, n);
    let cols = geom.columns();
    let mut a = DMatrix::<f64>::zeros(2 * n, 3);
    for (j, col) in cols.iter().enumerate() {
        let v = &theta * DVector::from_column_slice(col);
        for k in 0..n {
            a[(2 * k, j)] = v[k].re;
            a[(2 * k + 1, j)] = v[k].im;
        }
    }
    let b = DVector::from_iterator(2 * n, table.lambdas.iter().flat_map(|v| [v.re, v.im]));
    let scale = b.norm().max(f64::MIN_POSITIVE);
    let qr = a.clone().qr();
    let u = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &b))
        .unwrap_or_else(|| DVector::zeros(3));
    ((b - a * u) / scale).iter().copied().collect()
}
