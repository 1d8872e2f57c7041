//! Geometry coefficients `𝒜_k, ℬ_k, 𝒞_k` of a shape.

use crate::error::{invalid, Error, Result};
use crate::flow::zeta_coeffs;
use crate::rigid::RigidVelocity;
use crate::seqcore::CoeffSeq;
use crate::shape::ShapeSpec;
use crate::I;
use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(𝒜_k, ℬ_k, 𝒞_k)` for `k = 1..N`, stored at index `k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryCoeffs {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
}

impl GeometryCoeffs {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `𝒜_k` (1-based).
    pub fn a_k(&self, k: usize) -> Complex64 {
        self.a[k - 1]
    }

    pub fn b_k(&self, k: usize) -> Complex64 {
        self.b[k - 1]
    }

    pub fn c_k(&self, k: usize) -> Complex64 {
        self.c[k - 1]
    }

    /// `G_k = −𝒜_k w̄₀ + ℬ_k w₀ + iω𝒞_k` for `k = 1..N`.
    pub fn apply(&self, vel: &RigidVelocity) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| -self.a[i] * vel.w0.conj() + self.b[i] * vel.w0 + I * vel.omega * self.c[i])
            .collect()
    }

    /// Columns `𝒢¹, 𝒢², 𝒢³`.
    pub fn columns(&self) -> [Vec<Complex64>; 3] {
        let n = self.len();
        [
            (0..n).map(|i| self.b[i] - self.a[i]).collect(),
            (0..n).map(|i| I * (self.a[i] + self.b[i])).collect(),
            (0..n).map(|i| I * self.c[i]).collect(),
        ]
    }

    /// Real `2N × 3` matrix of `𝒢_N`: rows `2k, 2k+1` hold the real and
    /// imaginary parts of entry `k`.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        let cols = self.columns();
        let n = self.len();
        DMatrix::from_fn(2 * n, 3, |row, col| {
            let v = cols[col][row / 2];
            if row % 2 == 0 {
                v.re
            } else {
                v.im
            }
        })
    }

    /// First `n` entries.
    pub fn truncate(&self, n: usize) -> GeometryCoeffs {
        GeometryCoeffs {
            a: self.a[..n].to_vec(),
            b: self.b[..n].to_vec(),
            c: self.c[..n].to_vec(),
        }
    }
}

/// `𝒢_N U` with `w₀ = U₁ + iU₂`, `ω = U₃`.
pub fn gn_apply(geom: &GeometryCoeffs, u: [f64; 3]) -> Vec<Complex64> {
    let cols = geom.columns();
    (0..geom.len())
        .map(|i| cols[0][i] * u[0] + cols[1][i] * u[1] + cols[2][i] * u[2])
        .collect()
}

/// `(d∗c^k)₋₁` for `k = 1..n`, where `d_j = (j+1)ζ_{j+1}`.
fn d_conv_powers(shape: &ShapeSpec, vel: &RigidVelocity, n: usize, c: &CoeffSeq) -> Vec<Complex64> {
    let zeta = zeta_coeffs(shape, vel).zeta;
    let d = CoeffSeq::from_pairs(zeta.iter().map(|(k, z)| (k - 1, z * k as f64)));
    let mut ck = CoeffSeq::delta(0);
    (1..=n)
        .map(|_| {
            ck = c.conv(&ck);
            // only indices j ≥ 1 of c^k meet d (supported on ≤ −2)
            d.iter().map(|(i, v)| v * ck.get(-1 - i)).sum()
        })
        .collect()
}

/// Geometry coefficients from `(d∗c^k)₋₁` evaluated at the three unit
/// velocities `w₀ = 1`, `w₀ = i`, `ω = 1`.
pub fn geometry_coeffs(shape: &ShapeSpec, n: usize) -> Result<GeometryCoeffs> {
    if n < 1 {
        return invalid("N must be at least 1");
    }
    let c = shape.coeffs();
    let x1 = d_conv_powers(shape, &RigidVelocity::new(0.0, Complex64::new(1.0, 0.0)), n, &c);
    let x2 = d_conv_powers(shape, &RigidVelocity::new(0.0, I), n, &c);
    let x3 = d_conv_powers(shape, &RigidVelocity::new(1.0, ZERO), n, &c);
    let mut g = GeometryCoeffs {
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
    };
    for k in 0..n {
        let kf = (k + 1) as f64;
        let x2i = x2[k] / I;
        let big_a = (x2i - x1[k]) / 2.0;
        let big_b = (x1[k] + x2i) / 2.0;
        let big_c = x3[k] / I;
        g.a.push(-big_a / kf);
        g.b.push(-big_b / kf);
        g.c.push(-big_c / kf);
    }
    Ok(g)
}

/// Which constraint on `i₁ + i₂` the enumeration of `C_k` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CReading {
    /// `i₁ + i₂ ≤ −1`.
    Strict,
    /// `i₁ + i₂ ≤ 0`; the extra terms carry the weight `i₁ + i₂ = 0`.
    Loose,
}

pub const BRUTEFORCE_MAX_N: usize = 10;
pub const BRUTEFORCE_MAX_M: usize = 8;

/// Direct enumeration of the defining index sums of `A_k, B_k, C_k`.
pub fn geometry_coeffs_bruteforce(shape: &ShapeSpec, n: usize) -> Result<GeometryCoeffs> {
    geometry_coeffs_bruteforce_with(shape, n, CReading::Strict)
}

pub fn geometry_coeffs_bruteforce_with(
    shape: &ShapeSpec,
    n: usize,
    reading: CReading,
) -> Result<GeometryCoeffs> {
    if n < 1 {
        return invalid("N must be at least 1");
    }
    if n > BRUTEFORCE_MAX_N || shape.truncation() > BRUTEFORCE_MAX_M {
        return Err(Error::SizeGuard(format!(
            "brute force limited to N ≤ {BRUTEFORCE_MAX_N}, M ≤ {BRUTEFORCE_MAX_M} (got N = {n}, M = {})",
            shape.truncation()
        )));
    }
    let support: Vec<(i64, Complex64)> = std::iter::once((1, shape.c1()))
        .chain(
            shape
                .tail()
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm() != 0.0)
                .map(|(j, v)| (-(j as i64) - 1, *v)),
        )
        .collect();
    let min_idx = support.iter().map(|s| s.0).min().unwrap();
    let enumerator = Enumerator {
        support: &support,
        min_idx,
    };
    let cbar = |i: i64| shape.coeff(-i).conj();

    let mut g = GeometryCoeffs {
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
    };
    for k in 1..=n {
        let mut a = ZERO;
        let mut b = ZERO;
        // i₁ ≤ −1 ranges over the tail for A, and over −1 only for B (c̄_{−i₁} ≠ 0 needs −i₁ ∈ support)
        for &(i1, c1) in &support {
            if i1 <= -1 {
                a += c1 * i1 as f64 * enumerator.sum(k, -i1);
            }
        }
        for i1 in -(shape.truncation() as i64 + 1)..=-1 {
            let w = cbar(i1);
            if w.norm() != 0.0 {
                b += w * i1 as f64 * enumerator.sum(k, -i1);
            }
        }
        let mut c = ZERO;
        for i1 in -1..=shape.truncation() as i64 {
            let w = cbar(i1);
            if w.norm() == 0.0 {
                continue;
            }
            for &(i2, c2) in &support {
                let s = i1 + i2;
                let keep = match reading {
                    CReading::Strict => s <= -1,
                    CReading::Loose => s <= 0,
                };
                if keep {
                    c += w * c2 * s as f64 * enumerator.sum(k, -s);
                }
            }
        }
        let kf = k as f64;
        g.a.push(-a / kf);
        g.b.push(-b / kf);
        g.c.push(-c / kf);
    }
    Ok(g)
}

struct Enumerator<'a> {
    support: &'a [(i64, Complex64)],
    min_idx: i64,
}

impl Enumerator<'_> {
    /// `Σ c_{j₁}⋯c_{j_count}` over index tuples with `j₁ + ⋯ + j_count = target`,
    /// enumerated term by term.
    fn sum(&self, count: usize, target: i64) -> Complex64 {
        let mut acc = ZERO;
        self.walk(count, target, Complex64::new(1.0, 0.0), &mut acc);
        acc
    }

    fn walk(&self, left: usize, target: i64, prod: Complex64, acc: &mut Complex64) {
        if left == 0 {
            if target == 0 {
                *acc += prod;
            }
            return;
        }
        for &(j, cj) in self.support {
            let rest = target - j;
            let r = (left - 1) as i64;
            // every remaining index lies in [min_idx, 1]
            if rest > r || rest < r * self.min_idx {
                continue;
            }
            self.walk(left - 1, rest, prod * cj, acc);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{make_c147, make_disk, make_ellipse};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ellipse_values() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let g = geometry_coeffs(&e, 4).unwrap();
        assert!((g.a_k(1) - c(0.75, 0.0)).norm() < 1e-14);
        assert!((g.b_k(1) - c(2.25, 0.0)).norm() < 1e-14);
        assert!(g.c_k(1).norm() < 1e-14);
        assert!(g.a_k(2).norm() < 1e-14 && g.b_k(2).norm() < 1e-14);
        let bf = geometry_coeffs_bruteforce(&e, 4).unwrap();
        assert!((bf.a_k(1) - c(0.75, 0.0)).norm() < 1e-14);
        assert!((bf.b_k(1) - c(2.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn disk_b1() {
        let d = make_disk(1.3).unwrap();
        let bf = geometry_coeffs_bruteforce(&d, 3).unwrap();
        assert!(bf.a_k(1).norm() == 0.0);
        assert!((bf.b_k(1) - c(1.69, 0.0)).norm() < 1e-14);
        let g = geometry_coeffs(&d, 3).unwrap();
        assert!(g.c.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn both_c_readings_agree() {
        let s = ShapeSpec::new(c(1.1, 0.2), vec![c(0.1, 0.05), c(-0.05, 0.02), c(0.03, 0.0)]).unwrap();
        let strict = geometry_coeffs_bruteforce_with(&s, 6, CReading::Strict).unwrap();
        let loose = geometry_coeffs_bruteforce_with(&s, 6, CReading::Loose).unwrap();
        for k in 1..=6 {
            assert!((strict.c_k(k) - loose.c_k(k)).norm() <= 1e-15 * (1.0 + strict.c_k(k).norm()));
        }
    }

    #[test]
    fn size_guard() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        assert!(matches!(geometry_coeffs_bruteforce(&e, 11), Err(Error::SizeGuard(_))));
        let long = ShapeSpec::new(c(1.0, 0.0), vec![c(0.01, 0.0); 9]).unwrap();
        assert!(matches!(geometry_coeffs_bruteforce(&long, 3), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn c147_low_order_entries() {
        let (c1, c4, c7) = (c(0.9, 0.3), c(0.08, -0.05), c(0.03, 0.02));
        let s = make_c147(c1, c4, c7).unwrap();
        let g = geometry_coeffs(&s, 8).unwrap();
        assert!((g.b_k(1) - c(c1.norm_sqr(), 0.0)).norm() < 1e-14);
        assert!((g.a_k(4) - c1.powi(4) * c4).norm() < 1e-14);
    }

    #[test]
    fn real_matrix_layout() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let g = geometry_coeffs(&e, 3).unwrap();
        let m = g.real_matrix();
        let u = [0.3, -0.7, 1.1];
        let v = gn_apply(&g, u);
        for k in 0..3 {
            let re: f64 = (0..3).map(|j| m[(2 * k, j)] * u[j]).sum();
            let im: f64 = (0..3).map(|j| m[(2 * k + 1, j)] * u[j]).sum();
            assert!((c(re, im) - v[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn gn_apply_examples() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let g = geometry_coeffs(&e, 3).unwrap();
        assert!(gn_apply(&g, [0.0; 3]).iter().all(|v| v.norm() == 0.0));
        assert!((gn_apply(&g, [1.0, 0.0, 0.0])[0] - c(1.5, 0.0)).norm() < 1e-14);
        let u = [0.4, -1.2, 0.8];
        let vel = RigidVelocity::from_vector(u);
        for (x, y) in gn_apply(&g, u).iter().zip(g.apply(&vel)) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
