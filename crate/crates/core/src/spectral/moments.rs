//! Moments `λ_n(ν)`: Laurent coefficients of `ξ` about `ν`, by the closed
//! form and by contour quadrature, and providers `ν ↦ MomentTable`.

use super::geometry::{geometry_coeffs, GeometryCoeffs};
use super::operators::{binomial_table, reexpand};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::flow::{classify_stealth, ForwardModel, StealthVerdict};
use crate::rigid::Configuration;
use crate::shape::ShapeSpec;
use crate::cis;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

/// `λ₁(ν), …, λ_N(ν)` about the expansion point `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub nu: Complex64,
    pub lambdas: Vec<Complex64>,
}

impl MomentTable {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `λ_n` (1-based).
    pub fn get(&self, n: usize) -> Complex64 {
        self.lambdas[n - 1]
    }

    /// `max_n |λ_n|`.
    pub fn sup_norm(&self) -> f64 {
        self.lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// The same potential expanded about `nu`.
    pub fn reexpand(&self, nu: Complex64) -> MomentTable {
        MomentTable {
            nu,
            lambdas: reexpand(&self.lambdas, self.nu, nu),
        }
    }
}

/// Moments from precomputed geometry coefficients; `N = geom.len()`.
pub fn moments_from_geometry(geom: &GeometryCoeffs, cfg: &Configuration, nu: Complex64) -> MomentTable {
    let n = geom.len();
    let g = geom.apply(&cfg.velocity);
    let body: Vec<Complex64> = g
        .iter()
        .enumerate()
        .map(|(i, v)| cis((i + 1) as f64 * cfg.alpha()) * v)
        .collect();
    // e^{ikα}G_k are the moments about r; transport them to ν
    let lambdas = if cfg.r() == nu {
        body
    } else {
        reexpand(&body, cfg.r(), nu)
    };
    debug_assert_eq!(lambdas.len(), n);
    MomentTable { nu, lambdas }
}

/// `λ_n(ν) = Σ_k binom(n−1,k−1) e^{ikα}(r−ν)^{n−k}[−𝒜_k w̄₀ + ℬ_k w₀ + iω𝒞_k]`.
pub fn moments_closed_form(
    shape: &ShapeSpec,
    cfg: &Configuration,
    nu: Complex64,
    n: usize,
) -> Result<MomentTable> {
    let geom = geometry_coeffs(shape, n)?;
    Ok(moments_from_geometry(&geom, cfg, nu))
}

/// Scale of the terms summed in the closed form:
/// `s_n = Σ_k binom(n−1,k−1)|r−ν|^{n−k}|G_k|`. Used as the reference
/// magnitude for relative comparisons of `λ_n`.
pub fn moment_scales(geom: &GeometryCoeffs, cfg: &Configuration, nu: Complex64) -> Vec<f64> {
    let n = geom.len();
    let g: Vec<f64> = geom.apply(&cfg.velocity).iter().map(|v| v.norm()).collect();
    let b = binomial_table(n);
    let d = (cfg.r() - nu).norm();
    (1..=n)
        .map(|m| {
            (1..=m)
                .map(|k| b[m - 1][k - 1] * d.powi((m - k) as i32) * g[k - 1])
                .sum()
        })
        .collect()
}

/// Trapezoidal quadrature of `λ_n(ν) = (1/2πi)∮ ξ(z)(z−ν)^{n−1} dz` on the
/// circle of the given radius centred at `ν`.
pub fn moments_contour<F>(potential: F, nu: Complex64, n: usize, radius: f64, q: usize) -> Result<MomentTable>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    moments_contour_on(potential, nu, n, nu, radius, q, Exec::default())
}

/// As [`moments_contour`] with an arbitrary circle centre.
pub fn moments_contour_on<F>(
    potential: F,
    nu: Complex64,
    n: usize,
    center: Complex64,
    radius: f64,
    q: usize,
    exec: Exec,
) -> Result<MomentTable>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    if n < 1 {
        return invalid("N must be at least 1");
    }
    if q < 16 {
        return invalid("at least 16 quadrature nodes are required");
    }
    if !(radius > 0.0) || (nu - center).norm() >= radius {
        return invalid("contour must enclose the expansion point");
    }
    let samples = exec.try_map_range(q, |j| {
        let e = cis(TAU * j as f64 / q as f64);
        let z = center + e * radius;
        // dz/(2πi) = radius·e/Q per node
        potential(z).map(|xi| xi * e * radius)
    })?;
    let mut lambdas = vec![Complex64::new(0.0, 0.0); n];
    for (j, w) in samples.iter().enumerate() {
        let z = center + cis(TAU * j as f64 / q as f64) * radius;
        let mut p = *w;
        for l in lambdas.iter_mut() {
            *l += p;
            p *= z - nu;
        }
    }
    let scale = 1.0 / q as f64;
    lambdas.iter_mut().for_each(|l| *l *= scale);
    Ok(MomentTable { nu, lambdas })
}

/// Default node count `max(256, 8N)`.
pub fn default_nodes(n: usize) -> usize {
    (8 * n).max(256)
}

/// Source of moment tables at arbitrary expansion points. Implementations
/// must be callable concurrently.
pub trait MomentProvider: Send + Sync {
    fn moments(&self, nu: Complex64) -> Result<MomentTable>;

    /// Number of moments per table.
    fn order(&self) -> usize;
}

impl<P: MomentProvider + ?Sized> MomentProvider for &P {
    fn moments(&self, nu: Complex64) -> Result<MomentTable> {
        (**self).moments(nu)
    }

    fn order(&self) -> usize {
        (**self).order()
    }
}

impl<P: MomentProvider + ?Sized> MomentProvider for Arc<P> {
    fn moments(&self, nu: Complex64) -> Result<MomentTable> {
        (**self).moments(nu)
    }

    fn order(&self) -> usize {
        (**self).order()
    }
}

/// Synthetic moments from the closed form. A motion whose potential
/// coefficients all vanish (see [`classify_stealth`]) yields exact zeros
/// rather than amplified roundoff.
#[derive(Debug, Clone)]
pub struct ClosedFormProvider {
    geom: GeometryCoeffs,
    cfg: Configuration,
    null: bool,
}

impl ClosedFormProvider {
    pub fn new(shape: &ShapeSpec, cfg: &Configuration, n: usize) -> Result<Self> {
        let null = cfg.velocity.is_zero()
            || classify_stealth(shape, &cfg.velocity)? != StealthVerdict::NotStealth;
        Ok(Self {
            geom: geometry_coeffs(shape, n)?,
            cfg: *cfg,
            null,
        })
    }

    pub fn from_geometry(geom: GeometryCoeffs, cfg: &Configuration) -> Self {
        Self {
            geom,
            cfg: *cfg,
            null: false,
        }
    }

    /// True when the potential vanishes identically.
    pub fn is_null(&self) -> bool {
        self.null
    }
}

impl MomentProvider for ClosedFormProvider {
    fn moments(&self, nu: Complex64) -> Result<MomentTable> {
        if self.null {
            return Ok(MomentTable {
                nu,
                lambdas: vec![Complex64::new(0.0, 0.0); self.geom.len()],
            });
        }
        Ok(moments_from_geometry(&self.geom, &self.cfg, nu))
    }

    fn order(&self) -> usize {
        self.geom.len()
    }
}

/// Moments by contour quadrature of a potential evaluator. The disk
/// `|z − center| ≤ radius` must contain the solid; the contour for `ν` is the
/// circle about `ν` enclosing that disk with a margin.
#[derive(Clone)]
pub struct ContourProvider {
    potential: Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>,
    center: Complex64,
    radius: f64,
    n: usize,
    q: usize,
    exec: Exec,
}

impl ContourProvider {
    pub fn new<F>(potential: F, center: Complex64, radius: f64, n: usize) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            potential: Arc::new(potential),
            center,
            radius,
            n,
            q: default_nodes(n),
            exec: Exec::default(),
        }
    }

    /// Provider over the forward model; the enclosing disk is
    /// `|z − r| ≤ ‖c‖₁`.
    pub fn from_model(model: ForwardModel, n: usize) -> Self {
        let center = model.cfg.r();
        let radius = model.shape.l1_norm();
        Self::new(move |z| model.potential(z), center, radius, n)
    }

    pub fn with_nodes(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Contour radius used for `ν`: `|ν − center| + 1.5·radius`.
    pub fn contour_radius(&self, nu: Complex64) -> f64 {
        (nu - self.center).norm() + 1.5 * self.radius
    }
}

impl MomentProvider for ContourProvider {
    fn moments(&self, nu: Complex64) -> Result<MomentTable> {
        let p = &self.potential;
        moments_contour_on(|z| p(z), nu, self.n, nu, self.contour_radius(nu), self.q, self.exec)
    }

    fn order(&self) -> usize {
        self.n
    }
}

/// Moments at any `ν` from one measured table, by exact re-expansion.
#[derive(Debug, Clone)]
pub struct TransportProvider {
    base: MomentTable,
}

impl TransportProvider {
    pub fn new(base: MomentTable) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidArgument("empty moment table".into()));
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> &MomentTable {
        &self.base
    }
}

impl MomentProvider for TransportProvider {
    fn moments(&self, nu: Complex64) -> Result<MomentTable> {
        Ok(self.base.reexpand(nu))
    }

    fn order(&self) -> usize {
        self.base.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigid::RigidVelocity;
    use crate::shape::{make_arc, make_c147, make_ellipse};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ellipse_closed_form_examples() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.0, c(0.0, 0.0), 0.0, c(1.0, 0.0));
        let t = moments_closed_form(&e, &cfg, c(0.0, 0.0), 6).unwrap();
        assert!((t.get(1) - c(1.5, 0.0)).norm() < 1e-14);
        assert!(t.get(2).norm() < 1e-14);
    }

    #[test]
    fn lambda1_independent_of_nu() {
        let s = make_c147(c(1.0, 0.1), c(0.1, 0.0), c(0.02, 0.03)).unwrap();
        let cfg = Configuration::new(0.4, c(0.5, -0.2), 0.8, c(0.3, 0.9));
        let l: Vec<Complex64> = [c(0.0, 0.0), c(1.0, 1.0), c(-3.0, 0.0)]
            .iter()
            .map(|nu| moments_closed_form(&s, &cfg, *nu, 5).unwrap().get(1))
            .collect();
        assert!((l[0] - l[1]).norm() < 1e-14 && (l[0] - l[2]).norm() < 1e-14);
    }

    #[test]
    fn stealth_arc_moments_vanish() {
        let arc = make_arc(0.5).unwrap();
        let cfg = Configuration::new(0.3, c(1.0, -1.0), 1.0, c(-1.5, 0.0));
        for nu in [c(0.0, 0.0), c(2.0, 1.0)] {
            let t = moments_closed_form(&arc, &cfg, nu, 10).unwrap();
            assert!(t.sup_norm() < 1e-10);
        }
    }

    #[test]
    fn contour_laurent_orthogonality() {
        let t = moments_contour(|z| Ok(c(0.0, 1.0) / z.powi(6)), c(0.0, 0.0), 10, 1.5, 512).unwrap();
        for n in 1..=10 {
            let want = if n == 6 { c(0.0, 1.0) } else { c(0.0, 0.0) };
            assert!((t.get(n) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn contour_radius_independent() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.3, c(0.2, 0.1), -2.0, cis(1.0));
        let m = ForwardModel::new(&e, &cfg);
        // quadrature roundoff grows like ρ^n max|ξ|, so keep N low
        let a = moments_contour(|z| m.potential(z), c(0.1, 0.0), 5, 3.0, 512).unwrap();
        let b = moments_contour(|z| m.potential(z), c(0.1, 0.0), 5, 6.0, 512).unwrap();
        for n in 1..=5 {
            assert!((a.get(n) - b.get(n)).norm() < 1e-10 * (1.0 + a.get(n).norm()), "{n}");
        }
    }

    #[test]
    fn contour_matches_closed_form() {
        let s = make_c147(c(1.0, 0.1), c(0.1, 0.0), c(0.02, 0.03)).unwrap();
        let cfg = Configuration::new(0.4, c(0.5, -0.2), 0.8, c(0.3, 0.9));
        let geom = geometry_coeffs(&s, 10).unwrap();
        let nu = c(-0.3, 0.6);
        let cf = moments_from_geometry(&geom, &cfg, nu);
        let scales = moment_scales(&geom, &cfg, nu);
        let p = ContourProvider::from_model(ForwardModel::new(&s, &cfg), 10).with_nodes(512);
        let ct = p.moments(nu).unwrap();
        for n in 1..=10 {
            assert!((cf.get(n) - ct.get(n)).norm() < 1e-8 * scales[n - 1]);
        }
    }

    #[test]
    fn contour_rejects_bad_input() {
        let f = |z: Complex64| Ok(z.inv());
        assert!(moments_contour(f, c(0.0, 0.0), 4, 1.0, 8).is_err());
        assert!(moments_contour_on(f, c(5.0, 0.0), 4, c(0.0, 0.0), 1.0, 64, Exec::Sequential).is_err());
        let e = make_ellipse(2.0, 1.0).unwrap();
        let m = ForwardModel::new(&e, &Configuration::new(0.0, c(0.0, 0.0), 1.0, c(0.0, 0.0)));
        assert!(moments_contour(|z| m.potential(z), c(0.0, 0.0), 4, 1.5, 64).is_err());
    }

    #[test]
    fn transport_provider_is_exact() {
        let s = make_ellipse(2.0, 1.0).unwrap();
        let cfg = Configuration::new(0.6, c(1.0, 2.0), -1.0, c(0.5, 0.5));
        let cf = ClosedFormProvider::new(&s, &cfg, 12).unwrap();
        let tp = TransportProvider::new(cf.moments(c(0.0, 0.0)).unwrap()).unwrap();
        let nu = c(1.5, 1.0);
        let a = cf.moments(nu).unwrap();
        let b = tp.moments(nu).unwrap();
        for n in 1..=12 {
            assert!((a.get(n) - b.get(n)).norm() < 1e-10 * (1.0 + a.get(n).norm()));
        }
    }

    #[test]
    fn moments_are_linear_in_velocity() {
        let s = make_c147(c(1.0, 0.1), c(0.1, 0.0), c(0.02, 0.03)).unwrap();
        let geom = geometry_coeffs(&s, 6).unwrap();
        let p = Configuration::new(0.4, c(0.5, -0.2), 0.8, c(0.3, 0.9));
        let q = Configuration {
            velocity: RigidVelocity::new(1.6, c(0.6, 1.8)),
            ..p
        };
        let a = moments_from_geometry(&geom, &p, c(0.0, 0.0));
        let b = moments_from_geometry(&geom, &q, c(0.0, 0.0));
        for n in 1..=6 {
            assert!((a.get(n) * 2.0 - b.get(n)).norm() < 1e-13);
        }
    }
}
