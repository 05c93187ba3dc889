//! Logical ququart protocols run on physical multi-particle systems.
//!
//! Logical level `i` of a slot is the `i`-th vector of the entangled
//! complement basis of a UPB: three qubits per slot for Shifts, two qutrits
//! per slot for Tiles. Measurements and corrections act in the physical
//! space; off the embedded subspace they act as the identity.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{derive_correction, BasisLabel, QuquartBasis, X1};
use crate::error::{Error, Result};
use crate::partysim::{OwnershipMap, PartyId, Session};
use crate::protocols::{
    derive_swap_table, swap_branches, swap_state, teleport_branches, ProtocolKind, ProtocolTranscript,
};
use crate::qmath::{
    complement_orthonormal_basis, contract, fidelity, outcome_probabilities, Operator, StateVector, GENERAL_TOL,
};
use crate::upb::{extract_ees_with, shifts_upb, tiles_upb, EesBasis, EesCertificate, EES_SAMPLES, EES_SAMPLE_SEED};

/// Projections of in-protocol states must leave less than this outside the
/// embedded subspace.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Largest residual tolerated for any intermediate protocol state.
pub const LEAKAGE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    /// 2×2×2 per slot, Shifts UPB.
    ThreeQubit,
    /// 3×3 per slot, Tiles UPB.
    TwoQutrit,
}

impl System {
    pub const ALL: [System; 2] = [System::ThreeQubit, System::TwoQutrit];

    /// Particle dimensions of one logical slot.
    pub fn particle_dims(self) -> Vec<usize> {
        match self {
            System::ThreeQubit => vec![2, 2, 2],
            System::TwoQutrit => vec![3, 3],
        }
    }

    pub fn slot_dim(self) -> usize {
        self.particle_dims().iter().product()
    }

    pub fn particles_per_slot(self) -> usize {
        self.particle_dims().len()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::ThreeQubit => "3qubit",
            System::TwoQutrit => "2qutrit",
        })
    }
}

impl FromStr for System {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "3qubit" | "three_qubit" | "shifts" => Ok(System::ThreeQubit),
            "2qutrit" | "two_qutrit" | "tiles" => Ok(System::TwoQutrit),
            other => Err(Error::Input(format!("unknown system '{other}' (expected 3qubit or 2qutrit)"))),
        }
    }
}

/// Logical ↔ physical correspondence for one system.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingMap {
    pub system: System,
    pub eeb: EesBasis,
    pub certificate: EesCertificate,
}

/// Logical coefficients of a physical state and what was left over.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogicalState {
    /// Dims `[4; slots]`.
    pub coefficients: StateVector,
    /// Norm of the component outside the embedded subspace.
    pub residual: f64,
}

/// `out[o, i, r] = Σ_j m[i][j] · x[o, j, r]` along `axis`.
fn map_axis(x: &[Complex64], shape: &[usize], axis: usize, m: &[Vec<Complex64>]) -> (Vec<Complex64>, Vec<usize>) {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let cols = shape[axis];
    let rows = m.len();
    let mut out = vec![ZERO; outer * rows * inner];
    for o in 0..outer {
        for (i, row) in m.iter().enumerate() {
            let dst = &mut out[(o * rows + i) * inner..(o * rows + i + 1) * inner];
            for (j, &w) in row.iter().enumerate().take(cols) {
                if w == ZERO {
                    continue;
                }
                let src = &x[(o * cols + j) * inner..(o * cols + j + 1) * inner];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += w * s);
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

impl EmbeddingMap {
    pub fn new(system: System) -> Result<Self> {
        let upb = match system {
            System::ThreeQubit => shifts_upb(),
            System::TwoQutrit => tiles_upb(),
        };
        let (eeb, certificate) = extract_ees_with(&upb, EES_SAMPLES, EES_SAMPLE_SEED)?;
        Ok(Self { system, eeb, certificate })
    }

    /// Process-wide instance; construction is deterministic.
    pub fn shared(system: System) -> &'static EmbeddingMap {
        static THREE: OnceLock<EmbeddingMap> = OnceLock::new();
        static TWO: OnceLock<EmbeddingMap> = OnceLock::new();
        let cell = match system {
            System::ThreeQubit => &THREE,
            System::TwoQutrit => &TWO,
        };
        cell.get_or_init(|| EmbeddingMap::new(system).expect("built-in UPBs certify"))
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.eeb.vectors
    }

    /// Particle dims of `slots` consecutive logical slots.
    pub fn physical_dims(&self, slots: usize) -> Vec<usize> {
        let one = self.system.particle_dims();
        (0..slots).flat_map(|_| one.iter().copied()).collect()
    }

    fn isometry(&self) -> Vec<Vec<Complex64>> {
        let n = self.system.slot_dim();
        (0..n).map(|p| self.vectors().iter().map(|e| e.amps()[p]).collect()).collect()
    }

    fn coisometry(&self) -> Vec<Vec<Complex64>> {
        self.vectors().iter().map(|e| e.amps().iter().map(|a| a.conj()).collect()).collect()
    }

    /// `Σ c_{i…} |i…⟩ ↦ Σ c_{i…} |ε_i⟩ ⊗ …`, one slot per logical ququart.
    pub fn embed(&self, logical: &StateVector) -> Result<StateVector> {
        if logical.dims().iter().any(|&d| d != 4) {
            return Err(Error::Shape(format!("logical dims must all be 4, got {:?}", logical.dims())));
        }
        let slots = logical.dims().len();
        let v = self.isometry();
        let mut shape = logical.dims().to_vec();
        let mut amps = logical.amps().to_vec();
        for axis in 0..slots {
            (amps, shape) = map_axis(&amps, &shape, axis, &v);
        }
        StateVector::new(self.physical_dims(slots), amps)
    }

    /// Logical coefficients and residual for any number of slots.
    pub fn logical_components(&self, physical: &StateVector) -> Result<LogicalState> {
        let per = self.system.particles_per_slot();
        let n = physical.dims().len();
        if n == 0 || !n.is_multiple_of(per) || physical.dims() != self.physical_dims(n / per).as_slice() {
            return Err(Error::Shape(format!(
                "physical dims {:?} are not whole {} slots",
                physical.dims(),
                self.system
            )));
        }
        let slots = n / per;
        let w = self.coisometry();
        let mut shape = vec![self.system.slot_dim(); slots];
        let mut amps = physical.amps().to_vec();
        for axis in 0..slots {
            (amps, shape) = map_axis(&amps, &shape, axis, &w);
        }
        let coefficients = StateVector::new(shape, amps)?;
        let back = self.embed(&coefficients)?;
        let residual = back
            .amps()
            .iter()
            .zip(physical.amps())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(LogicalState { coefficients, residual })
    }

    /// Like [`logical_components`](Self::logical_components), but a residual
    /// above [`PROJECTION_TOL`] is a leakage error.
    pub fn project_logical(&self, physical: &StateVector) -> Result<LogicalState> {
        let s = self.logical_components(physical)?;
        if s.residual > PROJECTION_TOL {
            return Err(Error::Leakage {
                residual: s.residual,
                threshold: PROJECTION_TOL,
                context: "state has left the entangled subspace".into(),
            });
        }
        Ok(s)
    }

    /// `V U V† + (I − V V†)` on one slot.
    pub fn embed_operator(&self, logical: &Operator) -> Result<Operator> {
        if logical.dim() != 4 {
            return Err(Error::Shape(format!("logical operator must be 4×4, got {}", logical.dim())));
        }
        let v = self.isometry();
        let n = v.len();
        Ok(Operator::from_fn(n, |r, c| {
            let mut x = if r == c { Complex64::new(1.0, 0.0) } else { ZERO };
            for i in 0..4 {
                x -= v[r][i] * v[c][i].conj();
                for j in 0..4 {
                    x += v[r][i] * logical.get(i, j) * v[c][j].conj();
                }
            }
            x
        }))
    }

    /// Embedded W/X/Y/Z state on two slots.
    pub fn embedded_basis_state(&self, label: BasisLabel) -> StateVector {
        self.embed(QuquartBasis::shared().state(label)).expect("logical basis state")
    }

    /// The sixteen embedded basis states in canonical order, followed by an
    /// orthonormal basis of the rest of the two-slot space.
    pub fn extended_measurement_basis(&self) -> Result<Vec<StateVector>> {
        let mut basis: Vec<StateVector> = BasisLabel::all().map(|l| self.embedded_basis_state(l)).collect();
        let total = self.system.slot_dim().pow(2);
        let rest = complement_orthonormal_basis(&basis, total)?;
        basis.extend(rest);
        Ok(basis)
    }
}

fn slot_particles(system: System, slot: usize) -> Vec<usize> {
    let per = system.particles_per_slot();
    (slot * per..(slot + 1) * per).collect()
}

fn slots_particles(system: System, slots: &[usize]) -> Vec<usize> {
    slots.iter().flat_map(|&s| slot_particles(system, s)).collect()
}

fn check_input(logical: &StateVector) -> Result<StateVector> {
    if logical.dims() != [4] {
        return Err(Error::Input(format!("logical input must be one ququart, got dims {:?}", logical.dims())));
    }
    logical.normalized()
}

fn leakage_check(map: &EmbeddingMap, state: &StateVector, stage: &str, worst: &mut f64) -> Result<()> {
    let r = map.logical_components(state)?.residual;
    if r > LEAKAGE_TOL {
        return Err(Error::Leakage { residual: r, threshold: LEAKAGE_TOL, context: stage.into() });
    }
    *worst = worst.max(r);
    Ok(())
}

/// Exact branch of collective teleportation, with its logical counterpart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollectiveTeleportBranch {
    pub outcome: BasisLabel,
    pub probability: f64,
    pub logical_probability: f64,
    /// Largest deviation between the projected physical pre-correction state
    /// and the logical one.
    pub pre_correction_deviation: f64,
    pub fidelity: f64,
    pub leakage: f64,
}

/// All sixteen outcomes computed exactly in the physical space.
pub fn collective_teleport_branches(system: System, logical_input: &StateVector) -> Result<Vec<CollectiveTeleportBranch>> {
    let map = EmbeddingMap::shared(system);
    let input = check_input(logical_input)?;
    let logical = teleport_branches(&input, X1)?;
    let physical = map.embed(&crate::qmath::tensor_product(&input, QuquartBasis::shared().state(X1))?)?;
    let measured = slots_particles(system, &[0, 1]);
    // after contracting slots 0 and 1 only Clara's slot remains
    let clara: Vec<usize> = (0..system.particles_per_slot()).collect();
    let basis = map.extended_measurement_basis()?;
    let probs = outcome_probabilities(&physical, &basis, &measured)?;
    let mut worst = 0.0;
    leakage_check(map, &physical, "prepared state", &mut worst)?;
    BasisLabel::all()
        .map(|outcome| {
            let mut leak = worst;
            let pre = contract(&physical, &basis[outcome.flat()], &measured)?.normalized()?;
            leakage_check(map, &pre, "after measurement", &mut leak)?;
            let pre_logical = map.project_logical(&pre)?.coefficients;
            let lb = &logical[outcome.flat()];
            let correction = map.embed_operator(&derive_correction(outcome, X1)?)?;
            let post = crate::qmath::apply_local(&pre, &correction, &clara)?;
            leakage_check(map, &post, "after correction", &mut leak)?;
            let post_logical = map.project_logical(&post)?.coefficients;
            Ok(CollectiveTeleportBranch {
                outcome,
                probability: probs[outcome.flat()],
                logical_probability: lb.probability,
                pre_correction_deviation: pre_logical.max_abs_diff(&lb.clara_pre),
                fidelity: fidelity(&input, &post_logical)?,
                leakage: leak,
            })
        })
        .collect()
}

/// Teleport a logical ququart from Alice's slot to Clara's slot.
///
/// Alice holds slot 0 (the input), Bob slots 1 and 2 (the `X1` resource);
/// Bob hands slot 1 to Alice and slot 2 to Clara, Alice measures slots 0 and
/// 1 in the embedded basis, and Clara applies the embedded correction. The
/// measurement draw matches the single-ququart runs with the same seed.
pub fn collective_teleport(system: System, logical_input: &StateVector, seed: u64) -> Result<ProtocolTranscript> {
    let map = EmbeddingMap::shared(system);
    let input = check_input(logical_input)?;
    let global = map.embed(&crate::qmath::tensor_product(&input, QuquartBasis::shared().state(X1))?)?;
    let mut worst = 0.0;
    leakage_check(map, &global, "prepared state", &mut worst)?;
    let (s0, s1, s2) = (slot_particles(system, 0), slot_particles(system, 1), slot_particles(system, 2));
    let ownership = OwnershipMap::new()
        .with(PartyId::Alice, &s0)
        .with(PartyId::Bob, &[s1.clone(), s2.clone()].concat());
    let mut session = Session::new(global, ownership, seed)?;
    session.transfer(PartyId::Bob, PartyId::Alice, &s1)?;
    session.transfer(PartyId::Bob, PartyId::Clara, &s2)?;
    let measured = [s0, s1].concat();
    let basis = map.extended_measurement_basis()?;
    let (outcome, probability) = session.measure_labeled(PartyId::Alice, &measured, &basis)?;
    leakage_check(map, session.state(), "after measurement", &mut worst)?;
    let msg = session.send_classical(PartyId::Alice, PartyId::Clara, outcome);
    let correction = map.embed_operator(&derive_correction(outcome, X1)?)?;
    session.apply_correction(PartyId::Clara, &correction, &s2, &msg)?;
    leakage_check(map, session.state(), "after correction", &mut worst)?;
    let received = contract(session.state(), &basis[outcome.flat()], &measured)?.normalized()?;
    let logical = map.project_logical(&received)?.coefficients;
    let f = fidelity(&input, &logical)?;
    let mut t = session.into_transcript(ProtocolKind::CollectiveTeleport, outcome, probability, f);
    t.leakage = Some(worst);
    Ok(t)
}

/// Exact branch of collective swapping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollectiveSwapBranch {
    pub outcome_23: BasisLabel,
    pub result_14: BasisLabel,
    pub probability: f64,
    pub logical_probability: f64,
    /// Fidelity of the projected outer pair with the derived table entry.
    pub fidelity_to_table: f64,
    pub leakage: f64,
}

fn collective_swap_state(map: &EmbeddingMap) -> Result<StateVector> {
    map.embed(&swap_state(X1, X1)?)
}

/// Slots 0..3 are particle groups (1,2,3), (4,5,6), (1',2',3'), (4',5',6')
/// or the qutrit analogue; the middle two slots are measured.
pub fn collective_swap_branches(system: System) -> Result<Vec<CollectiveSwapBranch>> {
    let map = EmbeddingMap::shared(system);
    let table = derive_swap_table(X1, X1)?;
    let logical = swap_branches(X1, X1)?;
    let psi = collective_swap_state(map)?;
    let mut worst = 0.0;
    leakage_check(map, &psi, "prepared state", &mut worst)?;
    let measured = slots_particles(system, &[1, 2]);
    let basis = map.extended_measurement_basis()?;
    let probs = outcome_probabilities(&psi, &basis, &measured)?;
    BasisLabel::all()
        .map(|outcome| {
            let mut leak = worst;
            let outer = contract(&psi, &basis[outcome.flat()], &measured)?.normalized()?;
            leakage_check(map, &outer, "after measurement", &mut leak)?;
            let outer_logical = map.project_logical(&outer)?.coefficients;
            let entry = table.entry(outcome);
            Ok(CollectiveSwapBranch {
                outcome_23: outcome,
                result_14: entry.result_14,
                probability: probs[outcome.flat()],
                logical_probability: logical[outcome.flat()].probability,
                fidelity_to_table: fidelity(&entry.outer_state(), &outer_logical)?,
                leakage: leak,
            })
        })
        .collect()
}

/// Swap entanglement between particle groups. Alice holds slot 0, Bob the
/// middle slots, Clara slot 3; the draw matches `partysim::swap_script`.
pub fn collective_swap(system: System, seed: u64) -> Result<ProtocolTranscript> {
    let map = EmbeddingMap::shared(system);
    let table = derive_swap_table(X1, X1)?;
    let psi = collective_swap_state(map)?;
    let mut worst = 0.0;
    leakage_check(map, &psi, "prepared state", &mut worst)?;
    let measured = slots_particles(system, &[1, 2]);
    let ownership = OwnershipMap::new()
        .with(PartyId::Alice, &slot_particles(system, 0))
        .with(PartyId::Bob, &measured)
        .with(PartyId::Clara, &slot_particles(system, 3));
    let mut session = Session::new(psi, ownership, seed)?;
    let basis = map.extended_measurement_basis()?;
    let (outcome, probability) = session.measure_labeled(PartyId::Bob, &measured, &basis)?;
    leakage_check(map, session.state(), "after measurement", &mut worst)?;
    session.send_classical(PartyId::Bob, PartyId::Alice, outcome);
    session.send_classical(PartyId::Bob, PartyId::Clara, outcome);
    let outer = contract(session.state(), &basis[outcome.flat()], &measured)?.normalized()?;
    let outer_logical = map.project_logical(&outer)?.coefficients;
    let entry = table.entry(outcome);
    let f = fidelity(&entry.outer_state(), &outer_logical)?;
    if f < 1.0 - GENERAL_TOL {
        return Err(Error::Structure(format!(
            "outcome {outcome}: outer groups have fidelity {f} with table entry {}",
            entry.result_14
        )));
    }
    let mut t = session.into_transcript(ProtocolKind::CollectiveSwap, outcome, probability, f);
    t.leakage = Some(worst);
    Ok(t)
}
