//! Deterministic three-party session harness.
//!
//! A [`Session`] owns the global state vector, records which party holds
//! each subsystem, and applies every action through one ordered event log.
//! Parties may only measure or correct subsystems they hold, and a
//! correction must cite a classical message already delivered to the party
//! applying it. Quantum transfers only move ownership; the state is global.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::basis::{BasisLabel, QuquartBasis};
use crate::error::{Error, Result};
use crate::protocols::{Event, EventKind, EventLog, ProtocolKind, ProtocolTranscript};
use crate::qmath::{apply_local, born_measure, contract, Operator, StateVector};
use crate::rng::mix_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartyId {
    Alice,
    Bob,
    Clara,
}

impl PartyId {
    pub const ALL: [PartyId; 3] = [PartyId::Alice, PartyId::Bob, PartyId::Clara];
}

/// Subsystem index → holder.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnershipMap(BTreeMap<usize, PartyId>);

impl OwnershipMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, party: PartyId, subsystems: &[usize]) -> Self {
        for &s in subsystems {
            self.0.insert(s, party);
        }
        self
    }

    pub fn owner(&self, subsystem: usize) -> Option<PartyId> {
        self.0.get(&subsystem).copied()
    }

    pub fn owned_by(&self, party: PartyId) -> Vec<usize> {
        self.0.iter().filter(|(_, p)| **p == party).map(|(s, _)| *s).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub from: PartyId,
    pub to: PartyId,
    pub payload: BasisLabel,
    pub step_index: usize,
}

/// Outcome of a session measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub index: usize,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct Session {
    state: StateVector,
    ownership: OwnershipMap,
    seed: u64,
    log: EventLog,
    messages: Vec<ClassicalMessage>,
}

/// Start a session; every subsystem of `global_state` must have an owner.
pub fn new_session(global_state: StateVector, ownership: OwnershipMap, seed: u64) -> Result<Session> {
    Session::new(global_state, ownership, seed)
}

impl Session {
    pub fn new(state: StateVector, ownership: OwnershipMap, seed: u64) -> Result<Self> {
        let n = state.dims().len();
        if ownership.is_empty() {
            return Err(Error::Setup("ownership map is empty".into()));
        }
        if let Some(s) = (0..n).find(|s| ownership.owner(*s).is_none()) {
            return Err(Error::Setup(format!("subsystem {s} has no owner")));
        }
        if let Some(s) = ownership.0.keys().find(|&&s| s >= n) {
            return Err(Error::Setup(format!("ownership lists subsystem {s}, state has {n}")));
        }
        let mut log = EventLog::default();
        for party in PartyId::ALL {
            let held = ownership.owned_by(party);
            if !held.is_empty() {
                log.push(EventKind::Prepare, Some(party), json!({ "subsystems": held }));
            }
        }
        Ok(Self { state, ownership, seed, log, messages: Vec::new() })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn ownership(&self) -> &OwnershipMap {
        &self.ownership
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn events(&self) -> &[Event] {
        self.log.events()
    }

    pub fn messages(&self) -> &[ClassicalMessage] {
        &self.messages
    }

    fn authorize(&self, party: PartyId, subsystems: &[usize], action: &str) -> Result<()> {
        if subsystems.is_empty() {
            return Err(Error::Index(format!("{action} names no subsystems")));
        }
        for &s in subsystems {
            match self.ownership.owner(s) {
                Some(p) if p == party => {}
                Some(p) => {
                    return Err(Error::Authorization(format!(
                        "{party:?} cannot {action} subsystem {s} held by {p:?}"
                    )))
                }
                None => return Err(Error::Authorization(format!("subsystem {s} does not exist"))),
            }
        }
        Ok(())
    }

    /// Hand subsystems from one party to another. The state is untouched.
    pub fn transfer(&mut self, from: PartyId, to: PartyId, subsystems: &[usize]) -> Result<()> {
        self.authorize(from, subsystems, "transfer")?;
        for &s in subsystems {
            self.ownership.0.insert(s, to);
        }
        self.log.push(EventKind::Transfer, Some(from), json!({ "to": to, "subsystems": subsystems }));
        Ok(())
    }

    fn event_seed(&self) -> u64 {
        mix_seed(self.seed, self.log.next_step() as u64)
    }

    /// Projective measurement in an arbitrary complete orthonormal basis of
    /// the targeted subsystems.
    pub fn measure(&mut self, party: PartyId, subsystems: &[usize], basis: &[StateVector]) -> Result<Outcome> {
        self.authorize(party, subsystems, "measure")?;
        let m = born_measure(&self.state, basis, subsystems, self.event_seed())?;
        self.state = m.post_state;
        self.log.push(
            EventKind::Measure,
            Some(party),
            json!({ "subsystems": subsystems, "outcome": m.outcome, "probability": m.probability }),
        );
        Ok(Outcome { index: m.outcome, probability: m.probability })
    }

    /// Measurement whose first sixteen basis vectors carry the canonical
    /// labels. Landing on any further vector is a leakage error.
    pub fn measure_labeled(
        &mut self,
        party: PartyId,
        subsystems: &[usize],
        basis: &[StateVector],
    ) -> Result<(BasisLabel, f64)> {
        self.authorize(party, subsystems, "measure")?;
        let m = born_measure(&self.state, basis, subsystems, self.event_seed())?;
        if m.outcome >= 16 {
            return Err(Error::Leakage {
                residual: m.probability.sqrt(),
                threshold: 0.0,
                context: format!("measurement landed on unlabeled outcome {}", m.outcome),
            });
        }
        let label = BasisLabel::from_flat(m.outcome)?;
        self.state = m.post_state;
        self.log.push(
            EventKind::Measure,
            Some(party),
            json!({ "subsystems": subsystems, "outcome": label.to_string(), "probability": m.probability }),
        );
        Ok((label, m.probability))
    }

    /// Joint measurement of two ququarts in the W/X/Y/Z basis.
    pub fn measure_ququart(&mut self, party: PartyId, subsystems: &[usize]) -> Result<BasisLabel> {
        Ok(self.measure_labeled(party, subsystems, QuquartBasis::shared().states())?.0)
    }

    pub fn send_classical(&mut self, from: PartyId, to: PartyId, payload: BasisLabel) -> ClassicalMessage {
        let step_index = self.log.push(
            EventKind::Message,
            Some(from),
            json!({ "to": to, "label": payload.to_string() }),
        );
        let msg = ClassicalMessage { from, to, payload, step_index };
        self.messages.push(msg);
        msg
    }

    /// Apply `op` to subsystems held by `party`, citing a message that was
    /// delivered to that party earlier in this session.
    pub fn apply_correction(
        &mut self,
        party: PartyId,
        op: &Operator,
        subsystems: &[usize],
        in_response_to: &ClassicalMessage,
    ) -> Result<()> {
        self.authorize(party, subsystems, "correct")?;
        if !self.messages.contains(in_response_to) {
            return Err(Error::Causality(format!(
                "correction cites message at step {} that was never sent",
                in_response_to.step_index
            )));
        }
        if in_response_to.to != party {
            return Err(Error::Causality(format!(
                "message at step {} was addressed to {:?}, not {party:?}",
                in_response_to.step_index, in_response_to.to
            )));
        }
        self.state = apply_local(&self.state, op, subsystems)?;
        self.log.push(
            EventKind::Correction,
            Some(party),
            json!({
                "subsystems": subsystems,
                "in_response_to": in_response_to.step_index,
                "label": in_response_to.payload.to_string(),
            }),
        );
        Ok(())
    }

    /// One JSON object per line: `{step, kind, party, payload}`.
    pub fn export_jsonl(&self) -> String {
        export_jsonl(self.log.events())
    }

    pub fn into_transcript(self, protocol: ProtocolKind, outcome: BasisLabel, probability: f64, fidelity: f64) -> ProtocolTranscript {
        ProtocolTranscript {
            protocol,
            seed: self.seed,
            steps: self.log.into_events(),
            outcome,
            probability,
            fidelity,
            leakage: None,
        }
    }
}

pub fn export_jsonl(events: &[Event]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect()
}

/// Result of a scripted session.
#[derive(Clone, Debug, PartialEq)]
pub struct ScriptOutcome {
    pub transcript: ProtocolTranscript,
    pub outcome: BasisLabel,
    /// Receiver's state for teleportation, outer pair for swapping; normalized.
    pub final_state: StateVector,
}

/// Teleportation driven through a session: Alice holds subsystem 0, Bob
/// holds 1 and 2 until he hands 1 to Alice and 2 to Clara.
pub fn teleport_script(input: &StateVector, resource: BasisLabel, seed: u64) -> Result<ScriptOutcome> {
    let basis = QuquartBasis::shared();
    let input = input.normalized()?;
    let global = crate::qmath::tensor_product(&input, basis.state(resource))?;
    let ownership = OwnershipMap::new().with(PartyId::Alice, &[0]).with(PartyId::Bob, &[1, 2]);
    let mut s = Session::new(global, ownership, seed)?;
    s.transfer(PartyId::Bob, PartyId::Alice, &[1])?;
    s.transfer(PartyId::Bob, PartyId::Clara, &[2])?;
    let (outcome, probability) = s.measure_labeled(PartyId::Alice, &[0, 1], basis.states())?;
    let msg = s.send_classical(PartyId::Alice, PartyId::Clara, outcome);
    let correction = crate::basis::derive_correction(outcome, resource)?;
    s.apply_correction(PartyId::Clara, &correction, &[2], &msg)?;
    let final_state = contract(s.state(), basis.state(outcome), &[0, 1])?.normalized()?;
    let fidelity = crate::qmath::fidelity(&input, &final_state)?;
    Ok(ScriptOutcome {
        transcript: s.into_transcript(ProtocolKind::Teleport, outcome, probability, fidelity),
        outcome,
        final_state,
    })
}

/// Swapping driven through a session: Alice holds 0, Bob 1 and 2, Clara 3.
pub fn swap_script(resource_12: BasisLabel, resource_34: BasisLabel, seed: u64) -> Result<ScriptOutcome> {
    let basis = QuquartBasis::shared();
    let table = crate::protocols::derive_swap_table(resource_12, resource_34)?;
    let global = crate::protocols::swap_state(resource_12, resource_34)?;
    let ownership = OwnershipMap::new()
        .with(PartyId::Alice, &[0])
        .with(PartyId::Bob, &[1, 2])
        .with(PartyId::Clara, &[3]);
    let mut s = Session::new(global, ownership, seed)?;
    let (outcome, probability) = s.measure_labeled(PartyId::Bob, &[1, 2], basis.states())?;
    s.send_classical(PartyId::Bob, PartyId::Alice, outcome);
    s.send_classical(PartyId::Bob, PartyId::Clara, outcome);
    let final_state = contract(s.state(), basis.state(outcome), &[1, 2])?.normalized()?;
    let fidelity = crate::qmath::fidelity(&table.entry(outcome).outer_state(), &final_state)?;
    Ok(ScriptOutcome {
        transcript: s.into_transcript(ProtocolKind::Swap, outcome, probability, fidelity),
        outcome,
        final_state,
    })
}
