//! Trajectory reconstruction from time-resolved moments: integrate
//! `d/dt (r, α) = (e^{iα}w₀, ω)` with `U = 𝒢_N⁺ Θ_N(r − ν, α)⁻¹ Λ_N(t, ν)`.

use crate::error::{invalid, Error, Result};
use crate::rigid::{Configuration, Position, RigidVelocity};
use crate::shape::ShapeSpec;
use crate::spectral::operators::invert_moments_raw;
use crate::spectral::{geometry_coeffs, moments_from_geometry, GeometryCoeffs, MomentTable};
use crate::{cis, Complex64};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Moment tables sampled at increasing times, all about the same `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesMeasurement {
    pub times: Vec<f64>,
    pub tables: Vec<MomentTable>,
}

impl TimeSeriesMeasurement {
    pub fn new(times: Vec<f64>, tables: Vec<MomentTable>) -> Result<Self> {
        if times.len() != tables.len() {
            return invalid("times and tables differ in length");
        }
        if times.len() < 2 {
            return invalid("need at least 2 samples");
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("times must be finite and strictly increasing");
        }
        let (n, nu) = (tables[0].len(), tables[0].nu);
        if n == 0 {
            return invalid("empty moment table");
        }
        if tables.iter().any(|t| t.len() != n || t.nu != nu) {
            return invalid("all tables must share N and ν");
        }
        Ok(Self { times, tables })
    }

    pub fn nu(&self) -> Complex64 {
        self.tables[0].nu
    }

    pub fn order(&self) -> usize {
        self.tables[0].len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub poses: Vec<Position>,
    pub velocities: Vec<RigidVelocity>,
}

/// A differentiable ground-truth pose history.
pub trait PosePath: Sync {
    fn pose(&self, t: f64) -> Position;
    /// `(dr/dt, dα/dt)`.
    fn rate(&self, t: f64) -> (Complex64, f64);
}

/// [`PosePath`] from a pose closure and its derivative.
pub struct PathFn<P, D> {
    pub pose: P,
    pub rate: D,
}

impl<P, D> PosePath for PathFn<P, D>
where
    P: Fn(f64) -> (Complex64, f64) + Sync,
    D: Fn(f64) -> (Complex64, f64) + Sync,
{
    fn pose(&self, t: f64) -> Position {
        let (r, a) = (self.pose)(t);
        Position::new(a, r)
    }

    fn rate(&self, t: f64) -> (Complex64, f64) {
        (self.rate)(t)
    }
}

/// Configuration on a path: `w₀ = e^{−iα} dr/dt`, `ω = dα/dt`.
pub fn configuration_on<P: PosePath + ?Sized>(path: &P, t: f64) -> Configuration {
    let pos = path.pose(t);
    let (dr, da) = path.rate(t);
    Configuration::new(pos.alpha, pos.r, da, cis(-pos.alpha) * dr)
}

pub fn synthesize_timeseries<P: PosePath + ?Sized>(
    shape: &ShapeSpec,
    path: &P,
    nu: Complex64,
    n: usize,
    times: &[f64],
) -> Result<TimeSeriesMeasurement> {
    let geom = geometry_coeffs(shape, n)?;
    let tables = times
        .iter()
        .map(|&t| moments_from_geometry(&geom, &configuration_on(path, t), nu))
        .collect();
    TimeSeriesMeasurement::new(times.to_vec(), tables)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Largest integration step; the actual step divides the interval evenly.
    pub step: f64,
    /// End time; defaults to the last sample.
    pub until: Option<f64>,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            until: None,
        }
    }
}

/// `|r − ν|` beyond which tracking is declared divergent.
pub const DIVERGENCE_RADIUS: f64 = 1e6;

/// Tracks from sampled moments, interpolated by a clamped cubic spline.
pub fn track(shape: &ShapeSpec, initial: Position, data: &TimeSeriesMeasurement, opts: &TrackOptions) -> Result<Trajectory> {
    let t0 = data.times[0];
    let t_end = opts.until.unwrap_or(*data.times.last().unwrap());
    if t_end < t0 || t_end > *data.times.last().unwrap() {
        return invalid("end time outside the sampled interval");
    }
    let spline = Spline::new(
        &data.times,
        data.tables
            .iter()
            .map(|t| t.lambdas.iter().flat_map(|v| [v.re, v.im]).collect())
            .collect(),
    );
    let source = |t: f64| {
        let v = spline.eval(t);
        Ok(v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
    };
    integrate(shape, initial, data.nu(), data.order(), t0, t_end, opts.step, source)
}

/// Tracks from moments available at any time (continuous measurement).
pub fn track_continuous<F>(
    shape: &ShapeSpec,
    initial: Position,
    nu: Complex64,
    n: usize,
    t_span: (f64, f64),
    step: f64,
    source: F,
) -> Result<Trajectory>
where
    F: Fn(f64) -> Result<MomentTable>,
{
    integrate(shape, initial, nu, n, t_span.0, t_span.1, step, |t| {
        let table = source(t)?;
        if table.len() < n || table.nu != nu {
            return invalid("source table does not match N or ν");
        }
        Ok(table.lambdas[..n].to_vec())
    })
}

/// Real pseudo-inverse of `𝒢_N` (3 × 2N).
fn geometry_pinv(geom: &GeometryCoeffs) -> Result<DMatrix<f64>> {
    let a = geom.real_matrix();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
    if smax == 0.0 || rank < 3 {
        return Err(Error::RankDeficient { rank, n: geom.len() });
    }
    svd.pseudo_inverse(1e-10 * smax).map_err(|e| Error::Numerical(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn integrate<F>(
    shape: &ShapeSpec,
    initial: Position,
    nu: Complex64,
    n: usize,
    t0: f64,
    t_end: f64,
    step: f64,
    source: F,
) -> Result<Trajectory>
where
    F: Fn(f64) -> Result<Vec<Complex64>>,
{
    if !(step > 0.0) {
        return invalid("step must be positive");
    }
    let pinv = geometry_pinv(&geometry_coeffs(shape, n)?)?;
    let velocity = |t: f64, r: Complex64, alpha: f64| -> Result<RigidVelocity> {
        if !(r.norm().is_finite() && alpha.is_finite()) || (r - nu).norm() > DIVERGENCE_RADIUS {
            return Err(Error::Diverged { t });
        }
        let lam = source(t)?;
        let m = invert_moments_raw(&lam, nu, r, alpha);
        let u = &pinv * DVector::from_iterator(2 * n, m.iter().flat_map(|v| [v.re, v.im]));
        Ok(RigidVelocity::from_vector([u[0], u[1], u[2]]))
    };
    let rhs = |t: f64, r: Complex64, alpha: f64| -> Result<(Complex64, f64)> {
        let v = velocity(t, r, alpha)?;
        Ok((v.world(alpha), v.omega))
    };

    let mut out = Trajectory {
        times: vec![t0],
        poses: vec![Position { alpha: initial.alpha, r: initial.r }],
        velocities: vec![velocity(t0, initial.r, initial.alpha)?],
    };
    if t_end == t0 {
        return Ok(out);
    }
    let steps = ((t_end - t0) / step - 1e-9).ceil().max(1.0) as usize;
    let h = (t_end - t0) / steps as f64;
    let (mut r, mut a) = (initial.r, initial.alpha);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let (k1r, k1a) = rhs(t, r, a)?;
        let (k2r, k2a) = rhs(t + 0.5 * h, r + 0.5 * h * k1r, a + 0.5 * h * k1a)?;
        let (k3r, k3a) = rhs(t + 0.5 * h, r + 0.5 * h * k2r, a + 0.5 * h * k2a)?;
        let t1 = if k + 1 == steps { t_end } else { t + h };
        let (k4r, k4a) = rhs(t1, r + h * k3r, a + h * k3a)?;
        r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        out.times.push(t1);
        // α is integrated unwrapped
        out.poses.push(Position { alpha: a, r });
        out.velocities.push(velocity(t1, r, a)?);
    }
    Ok(out)
}

/// Vector-valued clamped cubic spline; end slopes from one-sided 4-point
/// differences so the interpolant stays fourth-order accurate.
struct Spline {
    x: Vec<f64>,
    y: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
}

impl Spline {
    fn new(x: &[f64], y: Vec<Vec<f64>>) -> Self {
        let n = x.len();
        let dim = y[0].len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut slopes = vec![vec![0.0; dim]; n];
        if n < 4 {
            // piecewise-linear slopes: too few points for a spline
            for i in 0..n {
                let j = i.min(n - 2);
                for d in 0..dim {
                    slopes[i][d] = (y[j + 1][d] - y[j][d]) / h[j];
                }
            }
            return Self { x: x.to_vec(), y, slopes };
        }
        let end_slope = |idx: [usize; 4], d: usize| {
            let at = x[idx[0]];
            lagrange_derivative(&idx.map(|i| x[i]), &idx.map(|i| y[i][d]), at)
        };
        for d in 0..dim {
            slopes[0][d] = end_slope([0, 1, 2, 3], d);
            slopes[n - 1][d] = end_slope([n - 1, n - 2, n - 3, n - 4], d);
        }
        if n > 2 {
            // h_i m_{i−1} + 2(h_{i−1} + h_i) m_i + h_{i−1} m_{i+1} = 3(h_i δ_{i−1} + h_{i−1} δ_i)
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut lower = vec![0.0; m];
            for i in 1..n - 1 {
                lower[i - 1] = h[i];
                diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
                upper[i - 1] = h[i - 1];
            }
            for d in 0..dim {
                let delta = |i: usize| (y[i + 1][d] - y[i][d]) / h[i];
                let mut rhs: Vec<f64> = (1..n - 1).map(|i| 3.0 * (h[i] * delta(i - 1) + h[i - 1] * delta(i))).collect();
                rhs[0] -= lower[0] * slopes[0][d];
                rhs[m - 1] -= upper[m - 1] * slopes[n - 1][d];
                let sol = thomas(&lower, &diag, &upper, rhs);
                for (i, s) in sol.into_iter().enumerate() {
                    slopes[i + 1][d] = s;
                }
            }
        }
        Self { x: x.to_vec(), y, slopes }
    }

    fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s).powi(2),
            s * (1.0 - s).powi(2),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        (0..self.y[0].len())
            .map(|d| {
                h00 * self.y[i][d]
                    + h10 * h * self.slopes[i][d]
                    + h01 * self.y[i + 1][d]
                    + h11 * h * self.slopes[i + 1][d]
            })
            .collect()
    }
}

/// Derivative at `at` of the polynomial through the points.
fn lagrange_derivative(xs: &[f64; 4], ys: &[f64; 4], at: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..4 {
        let denom: f64 = (0..4).filter(|&m| m != j).map(|m| xs[j] - xs[m]).product();
        let mut num = 0.0;
        for l in (0..4).filter(|&l| l != j) {
            num += (0..4).filter(|&m| m != j && m != l).map(|m| at - xs[m]).product::<f64>();
        }
        total += ys[j] * num / denom;
    }
    total
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], mut rhs: Vec<f64>) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut b = diag[0];
    c[0] = upper[0] / b;
    rhs[0] /= b;
    for i in 1..n {
        b = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / b;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{make_c147, make_ellipse};
    use crate::I;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    fn circular() -> impl PosePath {
        PathFn {
            pose: |t: f64| (0.5 * cis(t), 0.3 * t),
            rate: |t: f64| (0.5 * I * cis(t), 0.3),
        }
    }

    #[test]
    fn constant_pose_gives_equal_tables() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let still = PathFn {
            pose: |_| (c(0.2, 0.1), 0.4),
            rate: |_| (c(0.0, 0.0), 0.0),
        };
        let d = synthesize_timeseries(&e, &still, c(0.0, 0.0), 6, &grid(5, 1.0)).unwrap();
        assert!(d.tables.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn uniform_translation_has_constant_lambda1() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let line = PathFn {
            pose: |t: f64| (c(t, 0.0), 0.0),
            rate: |_| (c(1.0, 0.0), 0.0),
        };
        let d = synthesize_timeseries(&e, &line, c(0.0, 0.0), 6, &grid(11, 1.0)).unwrap();
        for t in &d.tables {
            assert!((t.get(1) - c(1.5, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn spline_is_fourth_order() {
        let f = |t: f64| (3.0 * t).sin();
        let err = |n: usize| {
            let x = grid(n, 1.0);
            let s = Spline::new(&x, x.iter().map(|&t| vec![f(t)]).collect());
            (0..1000).map(|i| i as f64 / 999.0).map(|t| (s.eval(t)[0] - f(t)).abs()).fold(0.0, f64::max)
        };
        let ratio = err(21) / err(41);
        assert!(ratio > 12.0, "{ratio}");
    }

    #[test]
    fn ellipse_translation_tracked() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let line = PathFn {
            pose: |t: f64| (c(t, 0.0), 0.0),
            rate: |_| (c(1.0, 0.0), 0.0),
        };
        let d = synthesize_timeseries(&e, &line, c(0.0, 0.0), 12, &grid(200, 1.0)).unwrap();
        let tr = track(&e, Position::new(0.0, c(0.0, 0.0)), &d, &TrackOptions::default()).unwrap();
        let last = tr.poses.last().unwrap();
        assert!((last.r - c(1.0, 0.0)).norm() < 1e-4 && last.alpha.abs() < 1e-4);
    }

    #[test]
    fn circular_path_on_c147() {
        let s = make_c147(c(1.0, 0.0), c(0.1, 0.05), c(0.03, -0.02)).unwrap();
        let path = circular();
        let d = synthesize_timeseries(&s, &path, c(0.0, 0.0), 12, &grid(200, 1.0)).unwrap();
        let tr = track(&s, path.pose(0.0), &d, &TrackOptions::default()).unwrap();
        for (t, p) in tr.times.iter().zip(&tr.poses) {
            let truth = path.pose(*t);
            assert!((p.r - truth.r).norm() < 1e-3 && (p.alpha - 0.3 * t).abs() < 1e-3);
        }
        // U at t = 0 matches the ground truth
        let u = tr.velocities[0];
        let truth = configuration_on(&path, 0.0).velocity;
        assert!((u.w0 - truth.w0).norm() < 1e-6 && (u.omega - truth.omega).abs() < 1e-6);
    }

    #[test]
    fn rhs_is_self_consistent() {
        let s = make_c147(c(1.0, 0.0), c(0.1, 0.05), c(0.03, -0.02)).unwrap();
        let path = circular();
        let d = synthesize_timeseries(&s, &path, c(0.0, 0.0), 12, &grid(200, 1.0)).unwrap();
        let tr = track(&s, path.pose(0.0), &d, &TrackOptions { step: 1e-3, until: None }).unwrap();
        for k in (1..tr.times.len() - 1).step_by(97) {
            let h = tr.times[k + 1] - tr.times[k - 1];
            let dr = (tr.poses[k + 1].r - tr.poses[k - 1].r) / h;
            let da = (tr.poses[k + 1].alpha - tr.poses[k - 1].alpha) / h;
            let v = tr.velocities[k];
            assert!((dr - v.world(tr.poses[k].alpha)).norm() < 1e-5);
            assert!((da - v.omega).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_length_interval() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let d = synthesize_timeseries(&e, &circular(), c(0.0, 0.0), 8, &grid(10, 1.0)).unwrap();
        let init = Position::new(0.0, c(0.5, 0.0));
        let tr = track(&e, init, &d, &TrackOptions { step: 1e-3, until: Some(0.0) }).unwrap();
        assert_eq!(tr.poses, vec![init]);
    }

    #[test]
    fn measurement_validation() {
        let t = MomentTable { nu: c(0.0, 0.0), lambdas: vec![c(1.0, 0.0)] };
        assert!(TimeSeriesMeasurement::new(vec![0.0], vec![t.clone()]).is_err());
        assert!(TimeSeriesMeasurement::new(vec![0.0, 0.0], vec![t.clone(), t.clone()]).is_err());
        let mut u = t.clone();
        u.nu = c(1.0, 0.0);
        assert!(TimeSeriesMeasurement::new(vec![0.0, 1.0], vec![t, u]).is_err());
    }
}
