//! Finitely supported bilateral complex sequences `(a_k)_{k∈Z}`.
//!
//! A [`CoeffSeq`] stores its entries densely over the index span
//! `[lo, lo + len)`. Entries produced by arithmetic are kept even when they
//! are numerically tiny; call [`CoeffSeq::prune`] to drop them explicitly.

use num_complex::Complex64;
use std::fmt;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, PartialEq, Default)]
pub struct CoeffSeq {
    lo: i64,
    data: Vec<Complex64>,
}

impl CoeffSeq {
    /// The zero sequence.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Kronecker delta at index `k`.
    pub fn delta(k: i64) -> Self {
        Self {
            lo: k,
            data: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Builds a sequence from `(index, value)` pairs. Repeated indices add up.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let pairs: Vec<_> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Self::zero();
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap();
        let hi = pairs.iter().map(|p| p.0).max().unwrap();
        let mut data = vec![ZERO; (hi - lo + 1) as usize];
        for (k, v) in pairs {
            data[(k - lo) as usize] += v;
        }
        Self { lo, data }
    }

    /// Dense constructor: `values[j]` is the entry at index `lo + j`.
    pub fn from_dense(lo: i64, values: Vec<Complex64>) -> Self {
        Self { lo, data: values }
    }

    /// Entry at index `k`; zero outside the stored span.
    pub fn get(&self, k: i64) -> Complex64 {
        let j = k - self.lo;
        if j < 0 || j >= self.data.len() as i64 {
            ZERO
        } else {
            self.data[j as usize]
        }
    }

    /// Inclusive index span of the stored entries, `None` for the empty sequence.
    pub fn span(&self) -> Option<(i64, i64)> {
        if self.data.is_empty() {
            None
        } else {
            Some((self.lo, self.lo + self.data.len() as i64 - 1))
        }
    }

    /// Indices carrying a nonzero entry, ascending.
    pub fn support(&self) -> Vec<i64> {
        self.iter().filter(|(_, v)| *v != ZERO).map(|(k, _)| k).collect()
    }

    /// Iterates over all stored `(index, value)` pairs, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(j, v)| (self.lo + j as i64, *v))
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == ZERO)
    }

    /// Convolution `(a∗b)_k = Σ_j a_{k−j} b_j`.
    pub fn conv(&self, other: &CoeffSeq) -> CoeffSeq {
        if self.data.is_empty() || other.data.is_empty() {
            return CoeffSeq::zero();
        }
        let mut out = vec![ZERO; self.data.len() + other.data.len() - 1];
        for (i, a) in self.data.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.data.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CoeffSeq {
            lo: self.lo + other.lo,
            data: out,
        }
    }

    /// `c^k` with `c^0 = δ₀`.
    pub fn conv_power(&self, k: usize) -> CoeffSeq {
        let mut acc = CoeffSeq::delta(0);
        for _ in 0..k {
            acc = self.conv(&acc);
        }
        acc
    }

    /// `č_k = conj(c_{−k})`.
    pub fn reflect(&self) -> CoeffSeq {
        let Some((_, hi)) = self.span() else {
            return CoeffSeq::zero();
        };
        CoeffSeq {
            lo: -hi,
            data: self.data.iter().rev().map(|v| v.conj()).collect(),
        }
    }

    /// Entrywise complex conjugate `c̄`.
    pub fn conj(&self) -> CoeffSeq {
        CoeffSeq {
            lo: self.lo,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CoeffSeq {
        CoeffSeq {
            lo: self.lo,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise sum.
    pub fn add(&self, other: &CoeffSeq) -> CoeffSeq {
        let (a, b) = match (self.span(), other.span()) {
            (None, _) => return other.clone(),
            (_, None) => return self.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let lo = a.0.min(b.0);
        let hi = a.1.max(b.1);
        CoeffSeq {
            lo,
            data: (lo..=hi).map(|k| self.get(k) + other.get(k)).collect(),
        }
    }

    /// Keeps only the entries with index in `range` (inclusive bounds).
    pub fn restrict(&self, min: i64, max: i64) -> CoeffSeq {
        CoeffSeq::from_pairs(self.iter().filter(|(k, _)| *k >= min && *k <= max))
    }

    /// Zeroes entries with modulus `<= eps` and trims the span to the remaining support.
    pub fn prune(&self, eps: f64) -> CoeffSeq {
        CoeffSeq::from_pairs(self.iter().filter(|(_, v)| v.norm() > eps))
    }
}

impl fmt::Debug for CoeffSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.iter().filter(|(_, v)| *v != ZERO))
            .finish()
    }
}
