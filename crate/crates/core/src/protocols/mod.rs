//! Four-level teleportation and entanglement swapping.
//!
//! Subsystem indices are zero-based: particle 1 of a protocol description is
//! subsystem 0, and so on.

mod swap;
mod teleport;

use serde::{Deserialize, Serialize};

use crate::basis::BasisLabel;
use crate::partysim::PartyId;

pub use swap::{
    compare_swap_table_to_transcription, compare_swap_tables, derive_swap_table, swap_branches, swap_run, swap_run_with,
    swap_state, transcribed_swap_table, SwapBranch, SwapDiffEntry, SwapDiffReport, SwapTable, SwapTableEntry,
};
pub use teleport::{
    compare_teleport_branches_to_transcription, teleport_branches, teleport_run, teleport_trials, BranchComparison,
    TeleportBranch, TrialStats,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Teleport,
    Swap,
    CollectiveTeleport,
    CollectiveSwap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Prepare,
    Transfer,
    Measure,
    Message,
    Correction,
}

/// One entry of a transcript. `step` is strictly increasing within a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub step: usize,
    pub kind: EventKind,
    pub party: Option<PartyId>,
    pub payload: serde_json::Value,
}

/// Seeded, replayable record of a protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub steps: Vec<Event>,
    pub outcome: BasisLabel,
    pub probability: f64,
    pub fidelity: f64,
    /// Largest component outside the embedded subspace seen during the run
    /// (collective protocols only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage: Option<f64>,
}

impl ProtocolTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

/// Append-only event list used to assemble transcripts.
#[derive(Debug, Default, Clone)]
pub(crate) struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    /// Records an event and returns its step index.
    pub fn push(&mut self, kind: EventKind, party: Option<PartyId>, payload: serde_json::Value) -> usize {
        let step = self.events.len();
        self.events.push(Event { step, kind, party, payload });
        step
    }

    pub fn next_step(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}
