use serde::Serialize;
use serde_json::json;

use super::{EventKind, EventLog, ProtocolKind, ProtocolTranscript};
use crate::basis::{BasisLabel, QuquartBasis, X1};
use crate::error::{Error, Result};
use crate::partysim::PartyId;
use crate::qmath::{
    born_measure, contract, fidelity, inner_product, outcome_probabilities, tensor_product, StateVector,
    GENERAL_TOL, ORTHO_TOL,
};
use crate::rng::mix_seed;
use crate::transcription::{self, SwapLine};

/// Outcome on the middle pair and the state it leaves on the outer pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapTableEntry {
    pub outcome_23: BasisLabel,
    pub result_14: BasisLabel,
    pub phase: i8,
    pub coefficient_magnitude: f64,
}

impl SwapTableEntry {
    /// Normalized outer-pair state `phase · |result_14⟩`.
    pub fn outer_state(&self) -> StateVector {
        QuquartBasis::shared()
            .state(self.result_14)
            .scaled(f64::from(self.phase).into())
    }
}

/// Sixteen entries in canonical outcome order, whose results form a
/// permutation of the labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapTable {
    pub resource_12: BasisLabel,
    pub resource_34: BasisLabel,
    pub entries: Vec<SwapTableEntry>,
}

impl SwapTable {
    pub fn entry(&self, outcome: BasisLabel) -> &SwapTableEntry {
        &self.entries[outcome.flat()]
    }
}

/// `|resource_12⟩ ⊗ |resource_34⟩` on particles 1..4, dims `[4, 4, 4, 4]`.
pub fn swap_state(resource_12: BasisLabel, resource_34: BasisLabel) -> Result<StateVector> {
    let b = QuquartBasis::shared();
    tensor_product(b.state(resource_12), b.state(resource_34))
}

/// Brute-force expansion of the four-particle state in
/// `(basis on 2,3) ⊗ (basis on 1,4)`.
///
/// Fails with a structure error if any conditional outer state is not a
/// signed basis element of norm ¼, or if the resulting map is not a bijection.
pub fn derive_swap_table(resource_12: BasisLabel, resource_34: BasisLabel) -> Result<SwapTable> {
    let basis = QuquartBasis::shared();
    let psi = swap_state(resource_12, resource_34)?;
    let mut entries = Vec::with_capacity(16);
    for outcome in BasisLabel::all() {
        let outer = contract(&psi, basis.state(outcome), &[1, 2])?;
        let magnitude = outer.norm();
        if (magnitude - 0.25).abs() > ORTHO_TOL {
            return Err(Error::Structure(format!(
                "outcome {outcome} leaves outer norm {magnitude}, expected 1/4"
            )));
        }
        let (result, overlap) = BasisLabel::all()
            .map(|l| (l, inner_product(basis.state(l), &outer).expect("same dims")))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("sixteen labels");
        if overlap.im.abs() > GENERAL_TOL || (overlap.re.abs() - 0.25).abs() > GENERAL_TOL {
            return Err(Error::Structure(format!(
                "outcome {outcome}: outer state is not ±¼ times a basis element (best overlap {overlap})"
            )));
        }
        let phase: i8 = if overlap.re > 0.0 { 1 } else { -1 };
        let expected = basis.state(result).scaled((0.25 * f64::from(phase)).into());
        if expected.max_abs_diff(&outer) > GENERAL_TOL {
            return Err(Error::Structure(format!("outcome {outcome}: residual outside {result}")));
        }
        entries.push(SwapTableEntry { outcome_23: outcome, result_14: result, phase, coefficient_magnitude: magnitude });
    }
    let mut seen = [false; 16];
    for e in &entries {
        if std::mem::replace(&mut seen[e.result_14.flat()], true) {
            return Err(Error::Structure(format!("result {} appears twice", e.result_14)));
        }
    }
    Ok(SwapTable { resource_12, resource_34, entries })
}

/// The printed table from `data/swap_table.txt`.
pub fn transcribed_swap_table() -> Result<Vec<SwapLine>> {
    transcription::parse_swap_table(transcription::SWAP_TABLE)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapDiffEntry {
    pub outcome_23: BasisLabel,
    pub derived_result: BasisLabel,
    pub derived_phase: i8,
    pub reference_result: BasisLabel,
    pub reference_phase: i8,
    pub result_matches: bool,
    pub phase_matches: bool,
}

/// Entry-by-entry comparison of a derived table with a reference listing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapDiffReport {
    pub entries: Vec<SwapDiffEntry>,
    pub discrepancies: usize,
    pub reference_is_bijection: bool,
    /// Results the reference lists for more than one outcome, with those outcomes.
    pub reference_duplicates: Vec<(BasisLabel, Vec<BasisLabel>)>,
    /// Labels the reference never lists as a result.
    pub reference_missing: Vec<BasisLabel>,
}

pub fn compare_swap_tables(derived: &SwapTable, reference: &[SwapLine]) -> Result<SwapDiffReport> {
    if reference.len() != 16 {
        return Err(Error::Input(format!("reference has {} entries, expected 16", reference.len())));
    }
    let entries: Vec<SwapDiffEntry> = derived
        .entries
        .iter()
        .zip(reference)
        .map(|(d, r)| SwapDiffEntry {
            outcome_23: d.outcome_23,
            derived_result: d.result_14,
            derived_phase: d.phase,
            reference_result: r.result,
            reference_phase: r.sign,
            result_matches: d.result_14 == r.result,
            phase_matches: d.phase == r.sign,
        })
        .collect();
    let discrepancies = entries.iter().filter(|e| !(e.result_matches && e.phase_matches)).count();
    let mut by_result: Vec<Vec<BasisLabel>> = vec![Vec::new(); 16];
    for r in reference {
        by_result[r.result.flat()].push(r.outcome);
    }
    let reference_duplicates: Vec<(BasisLabel, Vec<BasisLabel>)> = by_result
        .iter()
        .enumerate()
        .filter(|(_, v)| v.len() > 1)
        .map(|(k, v)| (BasisLabel::from_flat(k).expect("in range"), v.clone()))
        .collect();
    let reference_missing: Vec<BasisLabel> = by_result
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_empty())
        .map(|(k, _)| BasisLabel::from_flat(k).expect("in range"))
        .collect();
    Ok(SwapDiffReport {
        entries,
        discrepancies,
        reference_is_bijection: reference_duplicates.is_empty(),
        reference_duplicates,
        reference_missing,
    })
}

/// Diff of the derived `X1 ⊗ X1` table against the printed one.
pub fn compare_swap_table_to_transcription() -> Result<SwapDiffReport> {
    compare_swap_tables(&derive_swap_table(X1, X1)?, &transcribed_swap_table()?)
}

/// Exact enumeration of the middle-pair measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapBranch {
    pub outcome_23: BasisLabel,
    pub probability: f64,
    /// Normalized outer-pair state, particle 1 first.
    pub outer: StateVector,
    pub fidelity_to_table: f64,
}

pub fn swap_branches(resource_12: BasisLabel, resource_34: BasisLabel) -> Result<Vec<SwapBranch>> {
    let basis = QuquartBasis::shared();
    let table = derive_swap_table(resource_12, resource_34)?;
    let psi = swap_state(resource_12, resource_34)?;
    let probs = outcome_probabilities(&psi, basis.states(), &[1, 2])?;
    BasisLabel::all()
        .map(|outcome| {
            let outer = contract(&psi, basis.state(outcome), &[1, 2])?.normalized()?;
            let fidelity_to_table = fidelity(&table.entry(outcome).outer_state(), &outer)?;
            Ok(SwapBranch { outcome_23: outcome, probability: probs[outcome.flat()], outer, fidelity_to_table })
        })
        .collect()
}

pub fn swap_run(seed: u64) -> Result<ProtocolTranscript> {
    swap_run_with(X1, X1, seed)
}

/// Bob measures particles 2 and 3; the outer pair must land on the derived
/// table's entry.
pub fn swap_run_with(resource_12: BasisLabel, resource_34: BasisLabel, seed: u64) -> Result<ProtocolTranscript> {
    let basis = QuquartBasis::shared();
    let table = derive_swap_table(resource_12, resource_34)?;
    let mut log = EventLog::default();
    log.push(EventKind::Prepare, None, json!({ "subsystems": [0, 1], "state": resource_12.to_string() }));
    log.push(EventKind::Prepare, None, json!({ "subsystems": [2, 3], "state": resource_34.to_string() }));
    let psi = swap_state(resource_12, resource_34)?;
    let step = log.next_step();
    let m = born_measure(&psi, basis.states(), &[1, 2], mix_seed(seed, step as u64))?;
    let outcome = BasisLabel::from_flat(m.outcome)?;
    log.push(
        EventKind::Measure,
        Some(PartyId::Bob),
        json!({ "subsystems": [1, 2], "outcome": outcome.to_string(), "probability": m.probability }),
    );
    for to in [PartyId::Alice, PartyId::Clara] {
        log.push(EventKind::Message, Some(PartyId::Bob), json!({ "to": to, "label": outcome.to_string() }));
    }
    let outer = contract(&m.post_state, basis.state(outcome), &[1, 2])?.normalized()?;
    let entry = table.entry(outcome);
    let f = fidelity(&entry.outer_state(), &outer)?;
    if f < 1.0 - ORTHO_TOL {
        return Err(Error::Structure(format!(
            "outcome {outcome}: outer pair has fidelity {f} with table entry {}",
            entry.result_14
        )));
    }
    Ok(ProtocolTranscript {
        protocol: ProtocolKind::Swap,
        seed,
        steps: log.into_events(),
        outcome,
        probability: m.probability,
        fidelity: f,
        leakage: None,
    })
}
