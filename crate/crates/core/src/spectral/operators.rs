//! The operators `Θ_N`, its inverse, moment re-expansion, and the Pascal
//! identity for `e^{S_N D_N}`.

use crate::cis;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Binomial coefficients `binom(n, k)` for `0 ≤ k ≤ n ≤ max`, as `f64`.
pub fn binomial_table(max: usize) -> Vec<Vec<f64>> {
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(max + 1);
    for n in 0..=max {
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = t[n - 1][k - 1] + t[n - 1][k];
        }
        t.push(row);
    }
    t
}

/// `Θ_N(u, α)`: entry `(n, k) = binom(n−1, k−1) e^{ikα} u^{n−k}` for `k ≤ n`
/// (1-based), zero above the diagonal.
pub fn theta_matrix(u: Complex64, alpha: f64, n: usize) -> DMatrix<Complex64> {
    let b = binomial_table(n);
    let upow = powers(u, n);
    DMatrix::from_fn(n, n, |i, j| {
        if j > i {
            Complex64::new(0.0, 0.0)
        } else {
            cis((j + 1) as f64 * alpha) * upow[i - j] * b[i][j]
        }
    })
}

/// `Θ_N(u, α)⁻¹`: entry `(n, k) = e^{−inα} binom(n−1, k−1) (−u)^{n−k}`.
pub fn theta_inverse(u: Complex64, alpha: f64, n: usize) -> DMatrix<Complex64> {
    let b = binomial_table(n);
    let upow = powers(-u, n);
    DMatrix::from_fn(n, n, |i, j| {
        if j > i {
            Complex64::new(0.0, 0.0)
        } else {
            cis(-((i + 1) as f64) * alpha) * upow[i - j] * b[i][j]
        }
    })
}

fn powers(u: Complex64, n: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(n + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=n {
        p.push(acc);
        acc *= u;
    }
    p
}

/// Re-expands moments about `from` into moments about `to`:
/// `λ_m(to) = Σ_{j≤m} binom(m−1, j−1)(from − to)^{m−j} λ_j(from)`.
pub fn reexpand(lambdas: &[Complex64], from: Complex64, to: Complex64) -> Vec<Complex64> {
    let n = lambdas.len();
    let b = binomial_table(n);
    let p = powers(from - to, n);
    (1..=n)
        .map(|m| (1..=m).map(|j| p[m - j] * b[m - 1][j - 1] * lambdas[j - 1]).sum())
        .collect()
}

/// `m_n = e^{−inα} Σ_{k≤n} binom(n−1, k−1)(ν − r)^{n−k} λ_k(ν)`, i.e.
/// `Θ_N(r − ν, α)⁻¹ Λ_N`.
pub fn invert_moments_raw(lambdas: &[Complex64], nu: Complex64, r: Complex64, alpha: f64) -> Vec<Complex64> {
    reexpand(lambdas, nu, r)
        .into_iter()
        .enumerate()
        .map(|(i, v)| cis(-((i + 1) as f64) * alpha) * v)
        .collect()
}

/// `e^{S_N D_N} = Σ_j (S_N D_N)^j / j!` in exact integer arithmetic
/// (`S_N D_N` is nilpotent). Row-major, 0-based.
pub fn pascal_exp_sd(n: usize) -> Vec<Vec<i128>> {
    // (S D)_{k, k−1} = k − 1 in 1-based indexing
    let sd = |i: usize, j: usize| -> i128 {
        if i >= 1 && j == i - 1 {
            i as i128
        } else {
            0
        }
    };
    let mut result = identity(n);
    let mut power = identity(n);
    let mut fact: i128 = 1;
    for j in 1..n {
        let mut next = vec![vec![0i128; n]; n];
        for (r, row) in next.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = (0..n).map(|k| power[r][k] * sd(k, c)).sum();
            }
        }
        power = next;
        fact *= j as i128;
        for r in 0..n {
            for c in 0..n {
                assert_eq!(power[r][c] % fact, 0, "(SD)^j / j! is integral");
                result[r][c] += power[r][c] / fact;
            }
        }
    }
    result
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

/// Integer binomial `binom(n, k)`.
pub fn binom_i128(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}
