use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Amplitude, ORTHO_TOL};
use crate::error::{Error, Result};

/// Complex amplitude vector over a tensor product of subsystems.
///
/// Amplitudes are stored in row-major order: the first entry of `dims` is the
/// most significant digit of the flat index, so `|a⟩|b⟩` with dims `[4, 4]`
/// sits at `4 * a + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<Amplitude>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<Amplitude>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("state needs at least one subsystem".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Shape(format!("subsystem dimension {d} is below 2")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Shape("dimension product overflows".into()))?;
        if total != amps.len() {
            return Err(Error::Shape(format!(
                "{} amplitudes do not match dims {:?} (product {total})",
                amps.len(),
                dims
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Input("non-finite amplitude".into()));
        }
        Ok(Self { dims, amps })
    }

    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Natural basis vector `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::Index(format!("basis index {index} out of range {total}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); total];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    /// Haar-like random unit vector (normalized complex Gaussian).
    pub fn random<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<Self> {
        let total: usize = dims.iter().product();
        loop {
            let amps: Vec<Amplitude> = (0..total)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let v = Self::new(dims.clone(), amps)?;
            if v.norm() > 1e-6 {
                return v.normalized();
            }
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn into_amps(self) -> Vec<Amplitude> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= ORTHO_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_nan() || n <= 0.0 {
            return Err(Error::Input("cannot normalize a zero vector".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Amplitude) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Same amplitudes regrouped under different subsystem dimensions.
    pub fn reshaped(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.amps.clone())
    }

    /// `Σ c_k v_k` over vectors sharing this layout.
    pub fn linear_combination(coeffs: &[Amplitude], vectors: &[StateVector]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::Shape("empty linear combination".into()))?;
        if coeffs.len() != vectors.len() {
            return Err(Error::Shape("coefficient count differs from vector count".into()));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); first.len()];
        for (c, v) in coeffs.iter().zip(vectors) {
            if v.dims != first.dims {
                return Err(Error::Shape("vectors in combination have different dims".into()));
            }
            for (acc, a) in amps.iter_mut().zip(&v.amps) {
                *acc += c * a;
            }
        }
        Self::new(first.dims.clone(), amps)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Global-phase-insensitive overlap `|⟨a|b⟩|²` of two normalized vectors.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(super::inner_product(a, b)?.norm_sqr())
}
