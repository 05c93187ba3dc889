//! Dense complex linear algebra over small tensor-product spaces.
//!
//! Everything here is a pure function of its inputs. States and operators are
//! immutable once built and can be shared freely across threads.

mod layout;
pub mod linalg;
mod operator;
mod state;

use num_complex::Complex64;
use rand::Rng;

pub use operator::{is_integer_orthogonal, is_signed_permutation, Operator};
pub use state::{fidelity, StateVector};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use layout::Split;

pub type Amplitude = Complex64;

/// Largest total dimension a state may have unless a caller raises it.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;
/// Orthonormality and unitarity tolerance.
pub const ORTHO_TOL: f64 = 1e-12;
/// Singular values above this count toward the Schmidt rank.
pub const RANK_TOL: f64 = 1e-8;
/// Tolerance for general numeric assertions.
pub const GENERAL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    tensor_product_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_product_capped(a: &StateVector, b: &StateVector, cap: usize) -> Result<StateVector> {
    let total = a
        .len()
        .checked_mul(b.len())
        .ok_or(Error::Dimension { requested: usize::MAX, cap })?;
    if total > cap {
        return Err(Error::Dimension { requested: total, cap });
    }
    let mut amps = Vec::with_capacity(total);
    for x in a.amps() {
        amps.extend(b.amps().iter().map(|y| x * y));
    }
    let dims = a.dims().iter().chain(b.dims()).copied().collect();
    StateVector::new(dims, amps)
}

/// Tensor product of a whole list, left to right.
pub fn tensor_all(parts: &[StateVector]) -> Result<StateVector> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Shape("empty tensor product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, p| tensor_product(&acc, p))
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Amplitude> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!(
            "inner product of dims {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(a.amps().iter().zip(b.amps()).map(|(x, y)| x.conj() * y).sum())
}

/// Apply `op` to the listed subsystems, identity elsewhere.
///
/// The operator acts on the targets in the order given, first target most
/// significant.
pub fn apply_local(state: &StateVector, op: &Operator, targets: &[usize]) -> Result<StateVector> {
    let split = Split::new(state.dims(), targets)?;
    if op.dim() != split.target_len() {
        return Err(Error::Shape(format!(
            "{}-dim operator on targets {:?} of total dim {}",
            op.dim(),
            targets,
            split.target_len()
        )));
    }
    let src = state.amps();
    let mut out = vec![ZERO; src.len()];
    let mut local = vec![ZERO; split.target_len()];
    for &r in &split.rest_offsets {
        for (slot, &t) in local.iter_mut().zip(&split.target_offsets) {
            *slot = src[t + r];
        }
        for (row, &t) in split.target_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (col, x) in local.iter().enumerate() {
                acc += op.get(row, col) * x;
            }
            out[t + r] = acc;
        }
    }
    StateVector::new(state.dims().to_vec(), out)
}

/// Reduced density operator on `keep`, in the order listed.
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<Operator> {
    let split = Split::new(state.dims(), keep)?;
    let n = split.target_len();
    let amps = state.amps();
    let mut rho = vec![ZERO; n * n];
    for &r in &split.rest_offsets {
        for (i, &ti) in split.target_offsets.iter().enumerate() {
            let a = amps[ti + r];
            if a == ZERO {
                continue;
            }
            for (j, &tj) in split.target_offsets.iter().enumerate() {
                rho[i * n + j] += a * amps[tj + r].conj();
            }
        }
    }
    Operator::new(n, rho)
}

/// Partial trace of a density operator over a tensor layout `dims`.
pub fn partial_trace_operator(rho: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let split = Split::new(dims, keep)?;
    if rho.dim() != split.target_len() * split.rest_len() {
        return Err(Error::Shape(format!("{}-dim operator does not match dims {dims:?}", rho.dim())));
    }
    let n = split.target_len();
    Ok(Operator::from_fn(n, |i, j| {
        let (ti, tj) = (split.target_offsets[i], split.target_offsets[j]);
        split.rest_offsets.iter().map(|&r| rho.get(ti + r, tj + r)).sum()
    }))
}

/// `(⟨bra| ⊗ I) |state⟩` with `bra` living on `targets`; the result keeps the
/// remaining subsystems in their original order. Unnormalized.
pub fn contract(state: &StateVector, bra: &StateVector, targets: &[usize]) -> Result<StateVector> {
    let split = Split::new(state.dims(), targets)?;
    if bra.dims() != split.target_dims.as_slice() {
        return Err(Error::Shape(format!(
            "bra dims {:?} differ from target dims {:?}",
            bra.dims(),
            split.target_dims
        )));
    }
    if split.rest.is_empty() {
        return Err(Error::Shape("contraction would leave no subsystem".into()));
    }
    let amps = state.amps();
    let out: Vec<Amplitude> = split
        .rest_offsets
        .iter()
        .map(|&r| {
            split
                .target_offsets
                .iter()
                .zip(bra.amps())
                .map(|(&t, b)| b.conj() * amps[t + r])
                .sum()
        })
        .collect();
    StateVector::new(split.rest_dims, out)
}

/// Schmidt coefficients across the cut `side | complement`, descending.
///
/// Computed from the spectrum of the reduced density operator of the smaller
/// side. The list has `min(dim side, dim complement)` entries.
pub fn schmidt_singular_values(state: &StateVector, side: &[usize]) -> Result<Vec<f64>> {
    let split = Split::new(state.dims(), side)?;
    if split.rest.is_empty() {
        return Err(Error::Shape("cut leaves one side empty".into()));
    }
    let keep: Vec<usize> = if split.target_len() <= split.rest_len() {
        side.to_vec()
    } else {
        split.rest.clone()
    };
    let rho = partial_trace(state, &keep)?;
    Ok(linalg::hermitian_eigenvalues(&rho)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect())
}

/// Number of Schmidt coefficients above [`RANK_TOL`].
pub fn schmidt_rank(state: &StateVector, side: &[usize]) -> Result<usize> {
    Ok(schmidt_singular_values(state, side)?
        .into_iter()
        .filter(|&s| s > RANK_TOL)
        .count())
}

/// All bipartitions of `n` subsystems, each listed once by the side that
/// does not contain the last subsystem.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    (1usize..(1 << (n - 1)))
        .map(|mask| (0..n - 1).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)`.
///
/// Inputs are orthonormalized in order, then natural basis vectors are
/// projected out against everything collected so far (modified
/// Gram-Schmidt), keeping residuals of norm at least [`RANK_TOL`]. The output
/// is a deterministic function of the input.
pub fn complement_orthonormal_basis(vectors: &[StateVector], total_dim: usize) -> Result<Vec<StateVector>> {
    let dims = match vectors.first() {
        Some(v) => v.dims().to_vec(),
        None => vec![total_dim],
    };
    if vectors.iter().any(|v| v.len() != total_dim || v.dims() != dims.as_slice()) {
        return Err(Error::Shape(format!("all vectors must have dims {dims:?} and dimension {total_dim}")));
    }
    if vectors.len() > total_dim {
        return Err(Error::Rank(format!("{} vectors in dimension {total_dim}", vectors.len())));
    }
    let mut pool: Vec<Vec<Amplitude>> = Vec::with_capacity(total_dim);
    for (k, v) in vectors.iter().enumerate() {
        match orthogonalize(v.amps().to_vec(), &pool) {
            Some(q) => pool.push(q),
            None => return Err(Error::Rank(format!("input vector {k} is linearly dependent"))),
        }
    }
    let mut out = Vec::with_capacity(total_dim - vectors.len());
    for j in 0..total_dim {
        if pool.len() == total_dim {
            break;
        }
        let mut e = vec![ZERO; total_dim];
        e[j] = Complex64::new(1.0, 0.0);
        if let Some(q) = orthogonalize(e, &pool) {
            out.push(StateVector::new(dims.clone(), q.clone())?);
            pool.push(q);
        }
    }
    Ok(out)
}

fn orthogonalize(mut v: Vec<Amplitude>, pool: &[Vec<Amplitude>]) -> Option<Vec<Amplitude>> {
    for q in pool {
        let c: Amplitude = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        for (x, a) in v.iter_mut().zip(q) {
            *x -= c * a;
        }
    }
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n < RANK_TOL {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// Largest entry of `|G − I|` for the Gram matrix of `vectors`.
pub fn gram_deviation(vectors: &[StateVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let g = inner_product(a, b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}

/// Largest entry of `|Σ_k |b_k⟩⟨b_k| − I|`.
pub fn completeness_deviation(vectors: &[StateVector]) -> Result<f64> {
    let n = vectors
        .first()
        .map(StateVector::len)
        .ok_or_else(|| Error::Basis("empty basis".into()))?;
    let mut sum = Operator::zeros(n);
    for v in vectors {
        sum = sum.add(&Operator::outer(v.amps(), v.amps())?)?;
    }
    Ok(sum.max_abs_diff(&Operator::identity(n)))
}

/// Result of a projective measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub outcome: usize,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Exact Born-rule probabilities `‖(⟨b_k| ⊗ I)|ψ⟩‖²` for every basis vector.
pub fn outcome_probabilities(
    state: &StateVector,
    basis: &[StateVector],
    targets: &[usize],
) -> Result<Vec<f64>> {
    let split = Split::new(state.dims(), targets)?;
    if basis.is_empty() {
        return Err(Error::Basis("empty measurement basis".into()));
    }
    for (k, b) in basis.iter().enumerate() {
        if b.dims() != split.target_dims.as_slice() {
            return Err(Error::Basis(format!(
                "basis vector {k} has dims {:?}, targets have {:?}",
                b.dims(),
                split.target_dims
            )));
        }
    }
    let amps = state.amps();
    let probs: Vec<f64> = basis
        .iter()
        .map(|b| {
            split
                .rest_offsets
                .iter()
                .map(|&r| {
                    split
                        .target_offsets
                        .iter()
                        .zip(b.amps())
                        .map(|(&t, x)| x.conj() * amps[t + r])
                        .sum::<Amplitude>()
                        .norm_sqr()
                })
                .sum()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    if (total - state.norm_sqr()).abs() > GENERAL_TOL {
        return Err(Error::Basis(format!(
            "probabilities sum to {total}, basis is not complete on the targets"
        )));
    }
    Ok(probs)
}

/// Index drawn by inverse CDF over `probs` from one uniform variate.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = k;
        acc += p;
        if u < acc {
            return k;
        }
    }
    last_positive
}

/// Projective measurement of `targets` in `basis` with a seeded draw.
pub fn born_measure(
    state: &StateVector,
    basis: &[StateVector],
    targets: &[usize],
    seed: u64,
) -> Result<Measurement> {
    let probs = outcome_probabilities(state, basis, targets)?;
    let mut rng = rng_from_seed(seed);
    let outcome = sample_index(&probs, &mut rng);
    let probability = probs[outcome];
    let post_state = project_onto(state, &basis[outcome], targets)?;
    Ok(Measurement { outcome, probability, post_state })
}

/// Normalized `(|b⟩⟨b| ⊗ I)|ψ⟩`.
pub fn project_onto(state: &StateVector, b: &StateVector, targets: &[usize]) -> Result<StateVector> {
    let split = Split::new(state.dims(), targets)?;
    let rest = contract(state, b, targets)?;
    let mut out = vec![ZERO; state.len()];
    for (&t, x) in split.target_offsets.iter().zip(b.amps()) {
        for (&r, y) in split.rest_offsets.iter().zip(rest.amps()) {
            out[t + r] = x * y;
        }
    }
    StateVector::new(state.dims().to_vec(), out)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn c(re: f64) -> Amplitude {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tensor_of_basis_states() {
        let z = StateVector::basis(vec![4], 0).unwrap();
        let t = tensor_product(&z, &z).unwrap();
        assert_eq!(t.dims(), &[4, 4]);
        assert_eq!(t.amps()[0], c(1.0));
        assert!(t.amps()[1..].iter().all(|a| *a == ZERO));
    }

    #[test]
    fn tensor_respects_cap() {
        let a = StateVector::basis(vec![4, 4], 0).unwrap();
        let err = tensor_product_capped(&a, &a, 100).unwrap_err();
        assert_eq!(err, Error::Dimension { requested: 256, cap: 100 });
    }

    #[test]
    fn tensor_norms_multiply() {
        let mut rng = rng_from_seed(11);
        for _ in 0..100 {
            let a = StateVector::random(vec![3], &mut rng).unwrap().scaled(c(1.7));
            let b = StateVector::random(vec![2, 2], &mut rng).unwrap().scaled(c(0.3));
            let t = tensor_product(&a, &b).unwrap();
            assert!((t.norm() - a.norm() * b.norm()).abs() < 1e-13);
        }
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first() {
        let a = StateVector::new(vec![2], vec![Complex64::new(0.0, 1.0), ZERO]).unwrap();
        let b = StateVector::basis(vec![2], 0).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::new(0.0, -1.0));
        assert!(matches!(
            inner_product(&a, &StateVector::basis(vec![4], 0).unwrap()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn apply_identity_and_shift_round_trip() {
        let mut rng = rng_from_seed(5);
        let psi = StateVector::random(vec![4, 4, 4], &mut rng).unwrap();
        let same = apply_local(&psi, &Operator::identity(4), &[1]).unwrap();
        assert!(same.max_abs_diff(&psi) < 1e-15);

        let shift = Operator::from_fn(4, |r, c| if r == (c + 1) % 4 { c_one() } else { ZERO });
        let shifted = apply_local(&psi, &shift, &[2]).unwrap();
        let back = apply_local(&shifted, &shift.adjoint(), &[2]).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-14);
        assert!((shifted.norm() - 1.0).abs() < 1e-13);
    }

    fn c_one() -> Amplitude {
        c(1.0)
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let psi = StateVector::basis(vec![2, 3], 0).unwrap();
        assert!(matches!(
            apply_local(&psi, &Operator::identity(2), &[1]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn apply_on_reordered_targets() {
        // swap gate on (1, 0) equals swap on (0, 1); CNOT-like permutation differs
        let psi = StateVector::basis(vec![2, 2], 1).unwrap(); // |0⟩|1⟩
        let flip_second_if_first =
            Operator::from_real(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]).unwrap();
        let a = apply_local(&psi, &flip_second_if_first, &[0, 1]).unwrap();
        assert_eq!(a, psi);
        let b = apply_local(&psi, &flip_second_if_first, &[1, 0]).unwrap();
        assert_eq!(b, StateVector::basis(vec![2, 2], 3).unwrap());
    }

    #[test]
    fn partial_trace_of_product_is_pure() {
        let psi = StateVector::basis(vec![2, 2], 0).unwrap();
        let rho = partial_trace(&psi, &[0]).unwrap();
        let expected = Operator::from_real(2, &[1., 0., 0., 0.]).unwrap();
        assert!(rho.max_abs_diff(&expected) < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_order_independent() {
        let mut rng = rng_from_seed(3);
        let psi = StateVector::random(vec![2, 3, 2, 2], &mut rng).unwrap();
        let direct = partial_trace(&psi, &[0, 2]).unwrap();
        // drop subsystem 1 first, then 3 (now index 2), and the other way round
        let a = partial_trace(&psi, &[0, 2, 3]).unwrap();
        let a = partial_trace_operator(&a, &[2, 2, 2], &[0, 1]).unwrap();
        let b = partial_trace(&psi, &[0, 1, 2]).unwrap();
        let b = partial_trace_operator(&b, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(a.max_abs_diff(&direct) < 1e-12);
        assert!(b.max_abs_diff(&direct) < 1e-12);
        assert!((direct.trace().re - 1.0).abs() < 1e-12);
        assert!(direct.hermiticity_deviation() < 1e-14);
        assert!(linalg::hermitian_eigenvalues(&direct).iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn schmidt_of_product_and_bell() {
        let psi = StateVector::basis(vec![2, 2], 2).unwrap();
        let s = schmidt_singular_values(&psi, &[0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && s[1].abs() < 1e-7);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(vec![2, 2], &[h, 0., 0., h]).unwrap();
        let s = schmidt_singular_values(&bell, &[1]).unwrap();
        assert!(s.iter().all(|x| (x - h).abs() < 1e-12));
        assert!(matches!(schmidt_singular_values(&bell, &[0, 1]), Err(Error::Shape(_))));
    }

    #[test]
    fn bipartitions_of_three() {
        assert_eq!(bipartitions(3), vec![vec![0], vec![1], vec![0, 1]]);
        assert_eq!(bipartitions(2), vec![vec![0]]);
    }

    #[test]
    fn complement_of_two_basis_vectors() {
        let e0 = StateVector::basis(vec![4], 0).unwrap();
        let e1 = StateVector::basis(vec![4], 1).unwrap();
        let comp = complement_orthonormal_basis(&[e0, e1], 4).unwrap();
        assert_eq!(comp.len(), 2);
        assert_eq!(comp[0], StateVector::basis(vec![4], 2).unwrap());
        assert_eq!(comp[1], StateVector::basis(vec![4], 3).unwrap());
    }

    #[test]
    fn complement_rejects_dependent_inputs() {
        let e0 = StateVector::basis(vec![4], 0).unwrap();
        let twice = e0.scaled(c(2.0));
        assert!(matches!(
            complement_orthonormal_basis(&[e0, twice], 4),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn complement_is_deterministic_and_spanning() {
        let mut rng = rng_from_seed(9);
        let inputs: Vec<_> = (0..3).map(|_| StateVector::random(vec![3, 2], &mut rng).unwrap()).collect();
        let a = complement_orthonormal_basis(&inputs, 6).unwrap();
        let b = complement_orthonormal_basis(&inputs, 6).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for v in &a {
            for u in &inputs {
                assert!(inner_product(u, v).unwrap().norm() < 1e-10);
            }
        }
        assert!(gram_deviation(&a).unwrap() < 1e-10);
    }

    #[test]
    fn measuring_basis_state() {
        let psi = StateVector::basis(vec![3], 0).unwrap();
        let basis: Vec<_> = (0..3).map(|i| StateVector::basis(vec![3], i).unwrap()).collect();
        // whole-system measurement leaves no subsystem to contract onto, so
        // measure a product with an ancilla
        let anc = StateVector::basis(vec![2], 1).unwrap();
        let full = tensor_product(&psi, &anc).unwrap();
        let m = born_measure(&full, &basis, &[0], 123).unwrap();
        assert_eq!(m.outcome, 0);
        assert!((m.probability - 1.0).abs() < 1e-15);
        assert_eq!(m.post_state, full);
    }

    #[test]
    fn incomplete_basis_is_rejected() {
        let mut rng = rng_from_seed(1);
        let psi = StateVector::random(vec![2, 2], &mut rng).unwrap();
        let basis = vec![StateVector::basis(vec![2], 0).unwrap()];
        assert!(matches!(born_measure(&psi, &basis, &[0], 0), Err(Error::Basis(_))));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = rng_from_seed(77);
        let basis: Vec<_> = (0..4).map(|i| StateVector::basis(vec![2, 2], i).unwrap()).collect();
        for _ in 0..100 {
            let psi = StateVector::random(vec![2, 3, 2], &mut rng).unwrap();
            let p = outcome_probabilities(&psi, &basis, &[2, 0]).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn born_measure_is_reproducible() {
        let mut rng = rng_from_seed(4);
        let psi = StateVector::random(vec![4, 2], &mut rng).unwrap();
        let basis: Vec<_> = (0..4).map(|i| StateVector::basis(vec![4], i).unwrap()).collect();
        for seed in 0..50 {
            let a = born_measure(&psi, &basis, &[0], seed).unwrap();
            let b = born_measure(&psi, &basis, &[0], seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sample_index_skips_zero_probability() {
        let mut rng = rng_from_seed(0);
        for _ in 0..1000 {
            let k = sample_index(&[0.0, 0.5, 0.0, 0.5, 0.0], &mut rng);
            assert!(k == 1 || k == 3);
        }
    }
}
