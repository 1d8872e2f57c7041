//! Estimates of the singularity radius `R(ν) = limsup |λ_j(ν)|^{1/j}` and
//! coarse localization of the solid as the minimizer of `R`.

use super::moments::{MomentProvider, MomentTable};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Entries below this (relative to `max(1, ‖Λ‖∞)`) count as zero.
pub const ZERO_MOMENT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub enum RadiusEstimator {
    /// `max_j |λ_j|^{1/j}`.
    RootTest,
    /// `max_j (|λ_j| j^γ)^{1/j}`, compensating the algebraic factor `j^{−γ}`
    /// carried by moments near a branch point.
    CorrectedRootTest { exponent: f64 },
    /// Least-squares fit of `log|λ_j| = j log R + p log j + b` on the upper
    /// envelope of the tail.
    #[default]
    EnvelopeFit,
}


/// Algebraic exponent used by [`localize_chebyshev`]: a square-root branch
/// point gives `|λ_j| ~ j^{−3/2} R^j`.
pub const LOCALIZE_EXPONENT: f64 = 1.5;

/// `R(ν)` estimated from `λ_{j_min}, …, λ_N` with the default estimator.
pub fn singularity_radius(table: &MomentTable, j_min: usize) -> Result<f64> {
    singularity_radius_with(table, j_min, RadiusEstimator::default())
}

pub fn singularity_radius_with(table: &MomentTable, j_min: usize, est: RadiusEstimator) -> Result<f64> {
    let n = table.len();
    if j_min < 1 || n < j_min + 8 {
        return invalid(format!("need N ≥ j_min + 8 (N = {n}, j_min = {j_min})"));
    }
    let floor = ZERO_MOMENT * table.sup_norm().max(1.0);
    let tail: Vec<(usize, f64)> = (j_min..=n)
        .map(|j| (j, table.get(j).norm()))
        .filter(|(_, m)| *m > floor)
        .collect();
    if tail.is_empty() {
        return Ok(0.0);
    }
    Ok(match est {
        RadiusEstimator::RootTest => root_test(&tail, 0.0),
        RadiusEstimator::CorrectedRootTest { exponent } => root_test(&tail, exponent),
        RadiusEstimator::EnvelopeFit => envelope_fit(&tail).unwrap_or_else(|| root_test(&tail, 0.0)),
    })
}

fn root_test(tail: &[(usize, f64)], gamma: f64) -> f64 {
    tail.iter()
        .map(|&(j, m)| ((m.ln() + gamma * (j as f64).ln()) / j as f64).exp())
        .fold(0.0, f64::max)
}

fn fit(points: &[(usize, f64)]) -> Option<(DVector<f64>, Vec<f64>)> {
    if points.len() < 4 {
        return None;
    }
    let a = DMatrix::from_fn(points.len(), 3, |i, c| {
        let j = points[i].0 as f64;
        match c {
            0 => j,
            1 => j.ln(),
            _ => 1.0,
        }
    });
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1.ln()));
    let sol = a.clone().svd(true, true).solve(&y, 1e-12).ok()?;
    let res = (&y - &a * &sol).iter().copied().collect();
    Some((sol, res))
}

fn envelope_fit(tail: &[(usize, f64)]) -> Option<f64> {
    let mut pts: Vec<(usize, f64)> = tail.to_vec();
    let (mut sol, mut res) = fit(&pts)?;
    for _ in 0..10 {
        let keep: Vec<(usize, f64)> = (0..pts.len())
            .filter(|&i| {
                let left = i == 0 || res[i] >= res[i - 1];
                let right = i + 1 == pts.len() || res[i] >= res[i + 1];
                left && right
            })
            .map(|i| pts[i])
            .collect();
        if keep.len() == pts.len() || keep.len() < 4 {
            break;
        }
        pts = keep;
        let next = fit(&pts)?;
        sol = next.0;
        res = next.1;
    }
    let r = sol[0].exp();
    r.is_finite().then_some(r)
}

/// Axis-aligned search rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub min: Complex64,
    pub max: Complex64,
}

impl SearchBox {
    pub fn new(min: Complex64, max: Complex64) -> Result<Self> {
        if !(max.re > min.re && max.im > min.im) {
            return invalid("search box must have positive extent");
        }
        Ok(Self { min, max })
    }

    /// Node `(i, j)` of a `grid × grid` lattice including the corners.
    pub fn node(&self, i: usize, j: usize, grid: usize) -> Complex64 {
        let t = |k: usize| if grid == 1 { 0.5 } else { k as f64 / (grid - 1) as f64 };
        Complex64::new(
            self.min.re + (self.max.re - self.min.re) * t(i),
            self.min.im + (self.max.im - self.min.im) * t(j),
        )
    }
}

/// Grid minimizer of the estimated singularity radius (the Chebyshev centre
/// of the singular set).
pub fn localize_chebyshev<P: MomentProvider>(provider: &P, search: SearchBox, grid: usize) -> Result<Complex64> {
    localize_chebyshev_with(provider, search, grid, Exec::default())
}

pub fn localize_chebyshev_with<P: MomentProvider>(
    provider: &P,
    search: SearchBox,
    grid: usize,
    exec: Exec,
) -> Result<Complex64> {
    if grid < 2 {
        return invalid("grid must have at least 2 nodes per side");
    }
    let n = provider.order();
    let j_min = (n / 2).max(1);
    let est = RadiusEstimator::CorrectedRootTest {
        exponent: LOCALIZE_EXPONENT,
    };
    let radii = exec.try_map_range(grid * grid, |idx| {
        let nu = search.node(idx % grid, idx / grid, grid);
        let t = provider.moments(nu)?;
        Ok::<_, Error>((nu, singularity_radius_with(&t, j_min, est)?))
    })?;
    let (best, r) = radii
        .iter()
        .copied()
        .fold((Complex64::new(0.0, 0.0), f64::INFINITY), |acc, (nu, r)| if r < acc.1 { (nu, r) } else { acc });
    if radii.iter().all(|(_, r)| *r == 0.0) || !r.is_finite() {
        return Err(Error::Stealth("all moment tails vanish".into()));
    }
    Ok(best)
}
