//! Unextendible product bases, their exhaustive certificates, and the
//! four-dimensional entangled complement used to encode a logical ququart.
//!
//! Two instances solve `d^M − M(d−1) − 1 = 4`: three qubits (Shifts, four
//! members) and two qutrits (Tiles, five members).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::{
    bipartitions, complement_orthonormal_basis, gram_deviation, inner_product, partial_trace,
    schmidt_singular_values, tensor_all, StateVector, GENERAL_TOL, ORTHO_TOL, RANK_TOL,
};
use crate::rng::rng_from_seed;

/// Second Schmidt coefficient must exceed this for a cut to count as entangled.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-6;
/// Random combinations checked by [`extract_ees`].
pub const EES_SAMPLES: usize = 1000;
pub const EES_SAMPLE_SEED: u64 = 0x00EE_5EED;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductBasisMember {
    pub factors: Vec<StateVector>,
}

impl ProductBasisMember {
    pub fn full(&self) -> StateVector {
        tensor_all(&self.factors).expect("factors are small")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Upb {
    pub name: String,
    pub parties: usize,
    pub local_dim: usize,
    pub members: Vec<ProductBasisMember>,
}

impl Upb {
    pub fn new(name: impl Into<String>, parties: usize, local_dim: usize, members: Vec<ProductBasisMember>) -> Result<Self> {
        if parties < 2 || local_dim < 2 {
            return Err(Error::Input("need at least two parties of dimension at least two".into()));
        }
        for (k, m) in members.iter().enumerate() {
            if m.factors.len() != parties {
                return Err(Error::Shape(format!("member {k} has {} factors", m.factors.len())));
            }
            for f in &m.factors {
                if f.dims() != [local_dim] {
                    return Err(Error::Shape(format!("member {k} has a factor with dims {:?}", f.dims())));
                }
                if !f.is_normalized() {
                    return Err(Error::Input(format!("member {k} has an unnormalized factor")));
                }
            }
        }
        Ok(Self { name: name.into(), parties, local_dim, members })
    }

    pub fn total_dim(&self) -> usize {
        self.local_dim.pow(self.parties as u32)
    }

    /// Smallest possible size `M(d−1)+1`.
    pub fn minimal_size(&self) -> usize {
        self.parties * (self.local_dim - 1) + 1
    }

    pub fn full_products(&self) -> Vec<StateVector> {
        self.members.iter().map(ProductBasisMember::full).collect()
    }

    pub fn without_member(&self, k: usize) -> Self {
        let mut members = self.members.clone();
        members.remove(k);
        Self { name: format!("{} without member {k}", self.name), members, ..self.clone() }
    }

    /// Per-member factor amplitudes as `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let members: Vec<serde_json::Value> = self
            .members
            .iter()
            .map(|m| {
                let factors: Vec<Vec<[f64; 2]>> = m
                    .factors
                    .iter()
                    .map(|f| f.amps().iter().map(|a| [a.re, a.im]).collect())
                    .collect();
                serde_json::json!({ "factors": factors })
            })
            .collect();
        serde_json::json!({
            "name": self.name,
            "parties": self.parties,
            "local_dim": self.local_dim,
            "members": members,
        })
    }
}

fn ket(d: usize, amps: &[f64]) -> StateVector {
    StateVector::from_real(vec![d], amps)
        .and_then(|v| v.normalized())
        .expect("nonzero literal")
}

/// Shifts construction on three qubits: `|0,1,+⟩, |1,+,0⟩, |+,0,1⟩, |−,−,−⟩`.
pub fn shifts_upb() -> Upb {
    let zero = ket(2, &[1.0, 0.0]);
    let one = ket(2, &[0.0, 1.0]);
    let plus = ket(2, &[1.0, 1.0]);
    let minus = ket(2, &[1.0, -1.0]);
    let m = |a: &StateVector, b: &StateVector, c: &StateVector| ProductBasisMember {
        factors: vec![a.clone(), b.clone(), c.clone()],
    };
    let members = vec![
        m(&zero, &one, &plus),
        m(&one, &plus, &zero),
        m(&plus, &zero, &one),
        m(&minus, &minus, &minus),
    ];
    Upb::new("shifts", 3, 2, members).expect("well-formed")
}

/// Tiles construction on two qutrits.
pub fn tiles_upb() -> Upb {
    let e = |i: usize| {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        ket(3, &v)
    };
    let m = |a: StateVector, b: StateVector| ProductBasisMember { factors: vec![a, b] };
    let members = vec![
        m(e(0), ket(3, &[1.0, -1.0, 0.0])),
        m(e(2), ket(3, &[0.0, 1.0, -1.0])),
        m(ket(3, &[1.0, -1.0, 0.0]), e(2)),
        m(ket(3, &[0.0, 1.0, -1.0]), e(0)),
        m(ket(3, &[1.0, 1.0, 1.0]), ket(3, &[1.0, 1.0, 1.0])),
    ];
    Upb::new("tiles", 2, 3, members).expect("well-formed")
}

/// A product state orthogonal to every member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionWitness {
    /// Party each member is made orthogonal on.
    pub assignment: Vec<usize>,
    pub factors: Vec<StateVector>,
    pub max_overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpbCertificate {
    pub name: String,
    pub parties: usize,
    pub local_dim: usize,
    pub members: usize,
    pub minimal_size: usize,
    pub orthogonality_max_deviation: f64,
    pub orthogonal: bool,
    pub assignments_checked: usize,
    pub assignments_blocked: usize,
    pub unextendible: bool,
    pub witness: Option<ExtensionWitness>,
    pub complement_dim: usize,
}

impl UpbCertificate {
    pub fn passed(&self) -> bool {
        self.orthogonal && self.unextendible
    }
}

/// A unit vector orthogonal to all of `factors`, if their span is not the
/// whole local space.
fn local_orthogonal(factors: &[&StateVector], d: usize) -> Option<StateVector> {
    let mut pool: Vec<Vec<Complex64>> = Vec::new();
    for f in factors {
        let mut v = f.amps().to_vec();
        for q in &pool {
            let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(q).for_each(|(x, a)| *x -= c * a);
        }
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n >= RANK_TOL {
            v.iter_mut().for_each(|x| *x /= n);
            pool.push(v);
        }
    }
    if pool.len() >= d {
        return None;
    }
    let span: Vec<StateVector> = pool
        .into_iter()
        .map(|v| StateVector::new(vec![d], v).expect("local vector"))
        .collect();
    complement_orthonormal_basis(&span, d).ok()?.into_iter().next()
}

/// Exhaustive certificate.
///
/// A product vector orthogonal to every member exists iff the members can
/// be assigned to parties so that, on every party, the factors assigned there
/// leave a nonzero orthogonal direction. All `M^m` assignments are tried.
pub fn inspect_upb(upb: &Upb) -> UpbCertificate {
    let full = upb.full_products();
    let orthogonality_max_deviation = gram_deviation(&full).unwrap_or(f64::INFINITY);
    let (m, parties, d) = (upb.members.len(), upb.parties, upb.local_dim);
    let total = parties.pow(m as u32);
    let mut blocked = 0;
    let mut witness = None;
    let mut assignment = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        for slot in assignment.iter_mut().rev() {
            *slot = c % parties;
            c /= parties;
        }
        let locals: Option<Vec<StateVector>> = (0..parties)
            .map(|k| {
                let assigned: Vec<&StateVector> = (0..m)
                    .filter(|&j| assignment[j] == k)
                    .map(|j| &upb.members[j].factors[k])
                    .collect();
                local_orthogonal(&assigned, d)
            })
            .collect();
        match locals {
            None => blocked += 1,
            Some(factors) => {
                if witness.is_none() {
                    let product = tensor_all(&factors).expect("small");
                    let max_overlap = full
                        .iter()
                        .map(|v| inner_product(v, &product).expect("same dims").norm())
                        .fold(0.0, f64::max);
                    witness = Some(ExtensionWitness { assignment: assignment.clone(), factors, max_overlap });
                }
            }
        }
    }
    let complement_dim = complement_orthonormal_basis(&full, upb.total_dim()).map(|v| v.len()).unwrap_or(0);
    UpbCertificate {
        name: upb.name.clone(),
        parties,
        local_dim: d,
        members: m,
        minimal_size: upb.minimal_size(),
        orthogonality_max_deviation,
        orthogonal: orthogonality_max_deviation <= ORTHO_TOL,
        assignments_checked: total,
        assignments_blocked: blocked,
        unextendible: blocked == total,
        witness,
        complement_dim,
    }
}

/// Certificate, or a verification failure naming the first problem found.
pub fn verify_upb(upb: &Upb) -> Result<UpbCertificate> {
    let cert = inspect_upb(upb);
    if !cert.orthogonal {
        return Err(Error::Verification(format!(
            "{}: members are not orthogonal (deviation {:e})",
            cert.name, cert.orthogonality_max_deviation
        )));
    }
    if let Some(w) = &cert.witness {
        return Err(Error::Verification(format!(
            "{}: extendible, product witness with assignment {:?} has max overlap {:e}",
            cert.name, w.assignment, w.max_overlap
        )));
    }
    Ok(cert)
}

/// Orthonormal entangled basis of the complement of a UPB.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EesBasis {
    pub vectors: Vec<StateVector>,
    pub source_upb: Upb,
}

/// Entanglement statistics over the EEB vectors and random combinations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EesCertificate {
    pub basis_vectors: usize,
    pub samples: usize,
    pub seed: u64,
    /// Smallest second Schmidt coefficient over every tested vector and cut.
    pub min_second_schmidt: f64,
    /// Largest single-party purity over every tested vector and party.
    pub max_single_party_purity: f64,
    pub max_upb_overlap: f64,
}

/// Smallest second Schmidt coefficient over all bipartitions.
pub fn min_second_schmidt(v: &StateVector) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for side in bipartitions(v.dims().len()) {
        let s = schmidt_singular_values(v, &side)?;
        worst = worst.min(s.get(1).copied().unwrap_or(0.0));
    }
    Ok(worst)
}

fn max_single_party_purity(v: &StateVector) -> Result<f64> {
    (0..v.dims().len())
        .map(|k| Ok(partial_trace(v, &[k])?.purity()))
        .try_fold(0.0f64, |acc, p: Result<f64>| Ok(acc.max(p?)))
}

/// Fixed real orthogonal mixing `H/2` applied to the lexicographic
/// complement basis. Without it the three-qubit complement yields a vector
/// that is a product across one cut.
const MIXING: [[f64; 4]; 4] = [
    [0.5, 0.5, 0.5, 0.5],
    [0.5, 0.5, -0.5, -0.5],
    [0.5, -0.5, 0.5, -0.5],
    [0.5, -0.5, -0.5, 0.5],
];

/// Deterministic EEB: the lexicographic complement basis, mixed by [`MIXING`].
pub fn ees_vectors(upb: &Upb) -> Result<Vec<StateVector>> {
    let full = upb.full_products();
    let raw = complement_orthonormal_basis(&full, upb.total_dim())?;
    if raw.len() != 4 {
        return Err(Error::Structure(format!(
            "complement of {} has dimension {}, expected 4",
            upb.name,
            raw.len()
        )));
    }
    MIXING
        .iter()
        .map(|row| {
            let coeffs: Vec<Complex64> = row.iter().map(|&x| x.into()).collect();
            StateVector::linear_combination(&coeffs, &raw)
        })
        .collect()
}

/// Verified UPB → EEB with the default sampling check.
pub fn extract_ees(upb: &Upb) -> Result<EesBasis> {
    extract_ees_with(upb, EES_SAMPLES, EES_SAMPLE_SEED).map(|(b, _)| b)
}

pub fn extract_ees_with(upb: &Upb, samples: usize, seed: u64) -> Result<(EesBasis, EesCertificate)> {
    verify_upb(upb)?;
    let vectors = ees_vectors(upb)?;
    let basis = EesBasis { vectors, source_upb: upb.clone() };
    let cert = certify_ees(&basis, samples, seed)?;
    Ok((basis, cert))
}

/// Checks every basis vector and `samples` seeded random unit combinations.
pub fn certify_ees(ees: &EesBasis, samples: usize, seed: u64) -> Result<EesCertificate> {
    let full = ees.source_upb.full_products();
    let mut rng = rng_from_seed(seed);
    let mut min_s = f64::INFINITY;
    let mut max_p: f64 = 0.0;
    let mut max_overlap: f64 = 0.0;
    let qubits = ees.source_upb.local_dim == 2;
    let mut check = |v: &StateVector, what: &str| -> Result<()> {
        let s = min_second_schmidt(v)?;
        if s <= ENTANGLEMENT_THRESHOLD {
            return Err(Error::EesViolation(format!("{what} is a product across some cut (second Schmidt {s:e})")));
        }
        min_s = min_s.min(s);
        if qubits {
            let p = max_single_party_purity(v)?;
            if p >= 1.0 - GENERAL_TOL {
                return Err(Error::EesViolation(format!("{what} has a pure single-qubit reduction")));
            }
            max_p = max_p.max(p);
        }
        for u in &full {
            max_overlap = max_overlap.max(inner_product(u, v)?.norm());
        }
        Ok(())
    };
    for (i, v) in ees.vectors.iter().enumerate() {
        check(v, &format!("basis vector {i}"))?;
    }
    for k in 0..samples {
        let c = StateVector::random(vec![ees.vectors.len()], &mut rng)?;
        let v = StateVector::linear_combination(c.amps(), &ees.vectors)?;
        check(&v, &format!("random combination {k}"))?;
    }
    if max_overlap > GENERAL_TOL {
        return Err(Error::EesViolation(format!("EES overlaps the UPB span by {max_overlap:e}")));
    }
    Ok(EesCertificate {
        basis_vectors: ees.vectors.len(),
        samples,
        seed,
        min_second_schmidt: min_s,
        max_single_party_purity: max_p,
        max_upb_overlap: max_overlap,
    })
}

/// `(M, d)` with `2 ≤ M ≤ max_m`, `2 ≤ d ≤ max_d` and `d^M − M(d−1) − 1 = 4`.
pub fn solve_dimension_equation(max_m: u32, max_d: u64) -> Result<Vec<(u32, u64)>> {
    if max_m < 2 || max_d < 2 {
        return Err(Error::Input("bounds must be at least 2".into()));
    }
    let mut out = Vec::new();
    for m in 2..=max_m {
        for d in 2..=max_d {
            if dimension_excess(m, d) == Some(4) {
                out.push((m, d));
            }
        }
    }
    Ok(out)
}

/// `d^M − M(d−1) − 1`, or `None` on overflow.
pub fn dimension_excess(m: u32, d: u64) -> Option<u64> {
    d.checked_pow(m)?
        .checked_sub(u64::from(m) * (d - 1))?
        .checked_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_first_and_last_members_are_orthogonal() {
        let f = shifts_upb().full_products();
        assert!(inner_product(&f[0], &f[3]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn shifts_certificate() {
        let c = verify_upb(&shifts_upb()).unwrap();
        assert_eq!(c.members, 4);
        assert_eq!(c.minimal_size, 4);
        assert_eq!((c.assignments_checked, c.assignments_blocked), (81, 81));
        assert_eq!(c.complement_dim, 4);
    }

    #[test]
    fn tiles_certificate() {
        let c = verify_upb(&tiles_upb()).unwrap();
        assert_eq!(c.members, 5);
        assert_eq!(c.minimal_size, 5);
        assert_eq!((c.assignments_checked, c.assignments_blocked), (32, 32));
        assert_eq!(c.complement_dim, 4);
        assert!(c.orthogonality_max_deviation < 1e-12);
    }

    #[test]
    fn truncated_shifts_is_extendible() {
        let upb = shifts_upb().without_member(3);
        let c = inspect_upb(&upb);
        assert!(!c.unextendible);
        let w = c.witness.as_ref().unwrap();
        assert!(w.max_overlap < 1e-12);
        assert!(matches!(verify_upb(&upb), Err(Error::Verification(_))));
    }

    #[test]
    fn non_orthogonal_set_fails() {
        let mut upb = shifts_upb();
        upb.members[3] = upb.members[0].clone();
        assert!(matches!(verify_upb(&upb), Err(Error::Verification(_))));
    }

    #[test]
    fn ees_is_orthonormal_and_entangled() {
        for upb in [shifts_upb(), tiles_upb()] {
            let (ees, cert) = extract_ees_with(&upb, 50, 1).unwrap();
            assert_eq!(ees.vectors.len(), 4);
            assert!(gram_deviation(&ees.vectors).unwrap() < 1e-12);
            assert!(cert.min_second_schmidt > ENTANGLEMENT_THRESHOLD);
            assert!(cert.max_upb_overlap < 1e-10);
        }
    }

    #[test]
    fn ees_is_deterministic() {
        assert_eq!(ees_vectors(&shifts_upb()).unwrap(), ees_vectors(&shifts_upb()).unwrap());
    }

    #[test]
    fn dimension_equation() {
        assert_eq!(dimension_excess(3, 2), Some(4));
        assert_eq!(dimension_excess(2, 3), Some(4));
        assert_eq!(solve_dimension_equation(10, 10).unwrap(), vec![(2, 3), (3, 2)]);
        assert!(solve_dimension_equation(1, 10).is_err());
    }
}
