use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Amplitude;
use crate::error::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    dim: usize,
    entries: Vec<Amplitude>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Operator {
    pub fn new(dim: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("operator dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries do not form a {dim}x{dim} operator",
                entries.len()
            )));
        }
        if entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Input("non-finite operator entry".into()));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Amplitude) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim] }
    }

    /// `|a⟩⟨b|` on the flattened spaces of `a` and `b`.
    pub fn outer(a: &[Amplitude], b: &[Amplitude]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Shape("outer product of unequal lengths".into()));
        }
        Ok(Self::from_fn(a.len(), |r, c| a[r] * b[c].conj()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape("operator product of unequal dims".into()));
        }
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Ok(Self { dim: n, entries: out })
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape("operator sum of unequal dims".into()));
        }
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn apply(&self, v: &[Amplitude]) -> Result<Vec<Amplitude>> {
        if v.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector of length {} under a {}-dim operator",
                v.len(),
                self.dim
            )));
        }
        Ok(self
            .entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    pub fn trace(&self) -> Amplitude {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .expect("same dims")
            .max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `Tr(ρ²)` for a density operator.
    pub fn purity(&self) -> f64 {
        self.mul(self).expect("same dims").trace().re
    }

    /// Integer matrix if every entry is within `tol` of a Gaussian integer
    /// with zero imaginary part.
    pub fn to_integer(&self, tol: f64) -> Option<Vec<i64>> {
        self.entries
            .iter()
            .map(|a| {
                let r = a.re.round();
                ((a.re - r).abs() <= tol && a.im.abs() <= tol).then_some(r as i64)
            })
            .collect()
    }
}

/// Signed-permutation test on an integer matrix: exactly one `±1` per row
/// and column, zeros elsewhere.
pub fn is_signed_permutation(dim: usize, entries: &[i64]) -> bool {
    if entries.len() != dim * dim || entries.iter().any(|e| !matches!(e, -1..=1)) {
        return false;
    }
    let rows_ok = entries
        .chunks_exact(dim)
        .all(|row| row.iter().filter(|&&e| e != 0).count() == 1);
    let cols_ok = (0..dim).all(|c| (0..dim).filter(|&r| entries[r * dim + c] != 0).count() == 1);
    rows_ok && cols_ok
}

/// Exact check of `UᵀU = I` in integer arithmetic.
pub fn is_integer_orthogonal(dim: usize, entries: &[i64]) -> bool {
    if entries.len() != dim * dim {
        return false;
    }
    (0..dim).all(|i| {
        (0..dim).all(|j| {
            let dot: i64 = (0..dim).map(|k| entries[k * dim + i] * entries[k * dim + j]).sum();
            dot == i64::from(i == j)
        })
    })
}
