use serde_json::{json, Map, Value};

use ququart::basis::{branch_map, compare_corrections, derive_correction, int_to_operator, natural_decomposition, QuquartBasis};
use ququart::collective::{
    collective_swap, collective_swap_branches, collective_teleport, collective_teleport_branches, EmbeddingMap,
    System, LEAKAGE_TOL,
};
use ququart::protocols::{
    compare_swap_tables, derive_swap_table, swap_run, teleport_branches, teleport_run, teleport_trials,
    transcribed_swap_table,
};
use ququart::qmath::{
    completeness_deviation, gram_deviation, outcome_probabilities, schmidt_rank, schmidt_singular_values,
    StateVector, GENERAL_TOL, ORTHO_TOL,
};
use ququart::rng::{mix_seed, rng_from_seed};
use ququart::upb::{dimension_excess, inspect_upb, shifts_upb, solve_dimension_equation, tiles_upb, Upb};
use ququart::{BasisLabel, Error, Operator};

use crate::report::{ReportEnvelope, Rows};

pub enum CliError {
    /// Bad flags or input; exit 2.
    Usage(String),
    /// The computation itself failed; exit 1.
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::Parse { .. } | Error::Shape(_) | Error::Index(_) | Error::Dimension { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

pub type CmdResult = Result<ReportEnvelope, CliError>;

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn check_row(rows: &mut Rows, name: &str, value: f64, tol: f64, ok: bool) {
    rows.push(vec![json!(name), json!(value), json!(tol), json!(ok)]);
}

pub fn verify_basis(tolerance: f64) -> CmdResult {
    let basis = QuquartBasis::shared();
    let states = basis.states();
    let gram = gram_deviation(states)?;
    let completeness = completeness_deviation(states)?;
    let mut schmidt: f64 = 0.0;
    let mut ranks = Vec::new();
    for s in states {
        for v in schmidt_singular_values(s, &[0])? {
            schmidt = schmidt.max((v - 0.5).abs());
        }
        ranks.push(schmidt_rank(s, &[0])?);
    }
    let mut inverse: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let want = StateVector::basis(vec![4, 4], 4 * i + j)?;
            inverse = inverse.max(natural_decomposition(i, j)?.reconstruct(basis).max_abs_diff(&want));
        }
    }
    // Born completeness on seeded random two-ququart states
    let mut rng = rng_from_seed(0);
    let mut born: f64 = 0.0;
    for _ in 0..100 {
        let s = StateVector::random(vec![4, 4], &mut rng)?;
        let p = outcome_probabilities(&s, states, &[0, 1])?;
        born = born.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    let mut rows = Rows::new(&["check", "value", "tolerance", "pass"]);
    let checks = [
        ("gram_deviation", gram),
        ("completeness_deviation", completeness),
        ("schmidt_deviation", schmidt),
        ("inverse_transform_error", inverse),
        ("born_sum_deviation", born),
    ];
    let mut pass = true;
    for (name, v) in checks {
        let ok = v <= tolerance;
        pass &= ok;
        check_row(&mut rows, name, v, tolerance, ok);
    }
    let ranks_ok = ranks.iter().all(|&r| r == 4);
    pass &= ranks_ok;
    rows.push(vec![json!("schmidt_rank_all_4"), json!(ranks_ok), Value::Null, json!(ranks_ok)]);
    let results = json!({
        "gram_deviation": gram,
        "completeness_deviation": completeness,
        "schmidt_deviation": schmidt,
        "schmidt_ranks": ranks,
        "inverse_transform_error": inverse,
        "born_sum_deviation": born,
    });
    Ok(ReportEnvelope::new("verify-basis", params(&[("tolerance", json!(tolerance))]), results, pass, rows))
}

pub fn verify_corrections(resource: BasisLabel) -> CmdResult {
    let report = compare_corrections(resource)?;
    let mut rows = Rows::new(&["label", "transcribed_signed_permutation", "derived_inverts_branch", "matches_transcription"]);
    let mut pass = true;
    let mut entries = Vec::new();
    for e in &report.entries {
        let undo = derive_correction(e.label, resource)?.mul(&int_to_operator(&branch_map(e.label, resource)?))?;
        let inverts = undo.max_abs_diff(&Operator::identity(4)) <= ORTHO_TOL;
        pass &= inverts && e.transcribed_is_signed_permutation;
        rows.push(vec![json!(e.label), json!(e.transcribed_is_signed_permutation), json!(inverts), json!(e.matches)]);
        entries.push(json!({
            "label": e.label,
            "transcribed": e.transcribed,
            "derived": e.derived,
            "transcribed_is_signed_permutation": e.transcribed_is_signed_permutation,
            "derived_inverts_branch": inverts,
            "matches_transcription": e.matches,
        }));
    }
    let results = json!({ "entries": entries, "mismatches": report.mismatches });
    Ok(ReportEnvelope::new("verify-corrections", params(&[("resource", json!(resource))]), results, pass, rows))
}

pub struct TeleportArgs {
    pub state: StateVector,
    pub state_text: String,
    pub resource: BasisLabel,
    pub trials: usize,
    pub seed: u64,
    pub exact: bool,
    pub parallel: bool,
}

pub fn teleport(a: TeleportArgs) -> CmdResult {
    let p = params(&[
        ("state", json!(a.state_text)),
        ("resource", json!(a.resource)),
        ("trials", json!(a.trials)),
        ("seed", json!(a.seed)),
        ("exact", json!(a.exact)),
        ("parallel", json!(a.parallel)),
    ]);
    if a.exact {
        let branches = teleport_branches(&a.state, a.resource)?;
        let mut rows = Rows::new(&["outcome", "probability", "fidelity"]);
        let mut pass = true;
        let mut out = Vec::new();
        for b in &branches {
            pass &= (b.probability - 1.0 / 16.0).abs() <= ORTHO_TOL && b.fidelity >= 1.0 - ORTHO_TOL;
            rows.push(vec![json!(b.outcome), json!(b.probability), json!(b.fidelity)]);
            out.push(json!({
                "outcome": b.outcome,
                "probability": b.probability,
                "fidelity": b.fidelity,
                "receiver_before_correction": b.clara_pre.amps(),
                "correction": b.correction.to_integer(ORTHO_TOL),
            }));
        }
        return Ok(ReportEnvelope::new("teleport", p, json!({ "mode": "exact", "branches": out }), pass, rows));
    }
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let stats = teleport_trials(&a.state, a.resource, a.seed, a.trials, a.parallel)?;
    let n = a.trials as f64;
    let mean = n / 16.0;
    let sigma = (n * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
    let (lo, hi) = ((mean - 5.0 * sigma).max(0.0), mean + 5.0 * sigma);
    let mut rows = Rows::new(&["outcome", "count", "frequency", "band_low", "band_high", "in_band"]);
    let mut pass = stats.min_fidelity >= 1.0 - ORTHO_TOL;
    for (l, &c) in BasisLabel::all().zip(&stats.counts) {
        let ok = (c as f64) >= lo && (c as f64) <= hi;
        pass &= ok;
        rows.push(vec![json!(l), json!(c), json!(c as f64 / n), json!(lo), json!(hi), json!(ok)]);
    }
    let mut results = json!({
        "mode": "sampled",
        "counts": stats.counts,
        "band": [lo, hi],
        "min_fidelity": stats.min_fidelity,
    });
    if a.trials == 1 {
        results["transcript"] = serde_json::to_value(teleport_run(&a.state, a.resource, mix_seed(a.seed, 0))?)
            .expect("transcript serializes");
    }
    Ok(ReportEnvelope::new("teleport", p, results, pass, rows))
}

pub fn swap_table(r12: BasisLabel, r34: BasisLabel) -> CmdResult {
    let table = derive_swap_table(r12, r34)?;
    let x1 = ququart::basis::X1;
    let diff = if (r12, r34) == (x1, x1) { Some(compare_swap_tables(&table, &transcribed_swap_table()?)?) } else { None };
    let mut rows = Rows::new(&["outcome_23", "result_14", "phase", "magnitude", "printed_result", "printed_phase", "matches_printed"]);
    for (k, e) in table.entries.iter().enumerate() {
        let d = diff.as_ref().map(|d| &d.entries[k]);
        rows.push(vec![
            json!(e.outcome_23),
            json!(e.result_14),
            json!(e.phase),
            json!(e.coefficient_magnitude),
            d.map_or(Value::Null, |d| json!(d.reference_result)),
            d.map_or(Value::Null, |d| json!(d.reference_phase)),
            d.map_or(Value::Null, |d| json!(d.result_matches && d.phase_matches)),
        ]);
    }
    let pass = table.entries.iter().all(|e| (e.coefficient_magnitude - 0.25).abs() <= ORTHO_TOL);
    let results = json!({ "table": table, "printed_diff": diff });
    Ok(ReportEnvelope::new(
        "swap-table",
        params(&[("resource_12", json!(r12)), ("resource_34", json!(r34))]),
        results,
        pass,
        rows,
    ))
}

pub fn swap(seed: u64, runs: usize) -> CmdResult {
    if runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let mut rows = Rows::new(&["run", "seed", "outcome", "probability", "fidelity"]);
    let mut pass = true;
    let mut transcript = Value::Null;
    for k in 0..runs {
        let s = if runs == 1 { seed } else { mix_seed(seed, k as u64) };
        let t = swap_run(s)?;
        pass &= t.fidelity >= 1.0 - ORTHO_TOL;
        rows.push(vec![json!(k), json!(s), json!(t.outcome), json!(t.probability), json!(t.fidelity)]);
        if runs == 1 {
            transcript = serde_json::to_value(&t).expect("transcript serializes");
        }
    }
    let results = json!({ "runs": runs, "transcript": transcript });
    Ok(ReportEnvelope::new("swap", params(&[("seed", json!(seed)), ("runs", json!(runs))]), results, pass, rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum UpbName {
    Shifts,
    Tiles,
}

fn upb_of(name: UpbName) -> Upb {
    match name {
        UpbName::Shifts => shifts_upb(),
        UpbName::Tiles => tiles_upb(),
    }
}

pub fn verify_upb(name: UpbName, drop: Option<usize>) -> CmdResult {
    let mut upb = upb_of(name);
    if let Some(k) = drop {
        if k >= upb.members.len() {
            return Err(CliError::Usage(format!("--drop {k}: {} has {} members", upb.name, upb.members.len())));
        }
        upb = upb.without_member(k);
    }
    let c = inspect_upb(&upb);
    let mut rows = Rows::new(&["check", "value"]);
    rows.push(vec![json!("members"), json!(c.members)]);
    rows.push(vec![json!("minimal_size"), json!(c.minimal_size)]);
    rows.push(vec![json!("orthogonality_max_deviation"), json!(c.orthogonality_max_deviation)]);
    rows.push(vec![json!("assignments_checked"), json!(c.assignments_checked)]);
    rows.push(vec![json!("assignments_blocked"), json!(c.assignments_blocked)]);
    rows.push(vec![json!("unextendible"), json!(c.unextendible)]);
    rows.push(vec![json!("complement_dim"), json!(c.complement_dim)]);
    let pass = c.passed();
    let p = params(&[("system", json!(format!("{name:?}").to_lowercase())), ("drop", json!(drop))]);
    Ok(ReportEnvelope::new("verify-upb", p, serde_json::to_value(&c).expect("serializes"), pass, rows))
}

pub fn solve_dim(max: u32) -> CmdResult {
    let sols = solve_dimension_equation(max, u64::from(max))?;
    let mut rows = Rows::new(&["parties", "local_dim", "excess"]);
    let mut pass = true;
    for &(m, d) in &sols {
        let ex = dimension_excess(m, d);
        pass &= ex == Some(4);
        rows.push(vec![json!(m), json!(d), json!(ex)]);
    }
    let expected: Vec<(u32, u64)> = [(2, 3), (3, 2)].into_iter().filter(|&(m, d)| m <= max && d <= u64::from(max)).collect();
    pass &= sols == expected;
    let results = json!({ "solutions": sols });
    Ok(ReportEnvelope::new("solve-dim", params(&[("max", json!(max))]), results, pass, rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CollectiveSystem {
    #[value(name = "3qubit")]
    ThreeQubit,
    #[value(name = "2qutrit")]
    TwoQutrit,
}

impl From<CollectiveSystem> for System {
    fn from(s: CollectiveSystem) -> Self {
        match s {
            CollectiveSystem::ThreeQubit => System::ThreeQubit,
            CollectiveSystem::TwoQutrit => System::TwoQutrit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Teleport,
    Swap,
}

pub struct CollectiveArgs {
    pub system: System,
    pub mode: Mode,
    pub state: StateVector,
    pub state_text: String,
    pub seed: u64,
    pub exact: bool,
}

pub fn collective(a: CollectiveArgs) -> CmdResult {
    let mut p = params(&[
        ("system", json!(a.system.to_string())),
        ("mode", json!(format!("{:?}", a.mode).to_lowercase())),
        ("seed", json!(a.seed)),
        ("exact", json!(a.exact)),
    ]);
    if a.mode == Mode::Teleport {
        p.insert("state".into(), json!(a.state_text));
    }
    let ok = |f: f64, leak: f64| f >= 1.0 - GENERAL_TOL && leak < LEAKAGE_TOL;
    let (results, pass, rows) = match (a.mode, a.exact) {
        (Mode::Teleport, false) => {
            let t = collective_teleport(a.system, &a.state, a.seed)?;
            let leak = t.leakage.unwrap_or(0.0);
            let mut rows = Rows::new(&["outcome", "probability", "logical_fidelity", "leakage"]);
            rows.push(vec![json!(t.outcome), json!(t.probability), json!(t.fidelity), json!(leak)]);
            (serde_json::to_value(&t).expect("serializes"), ok(t.fidelity, leak), rows)
        }
        (Mode::Swap, false) => {
            let t = collective_swap(a.system, a.seed)?;
            let leak = t.leakage.unwrap_or(0.0);
            let mut rows = Rows::new(&["outcome", "probability", "fidelity_to_table", "leakage"]);
            rows.push(vec![json!(t.outcome), json!(t.probability), json!(t.fidelity), json!(leak)]);
            (serde_json::to_value(&t).expect("serializes"), ok(t.fidelity, leak), rows)
        }
        (Mode::Teleport, true) => {
            let b = collective_teleport_branches(a.system, &a.state)?;
            let mut rows = Rows::new(&["outcome", "probability", "logical_probability", "logical_fidelity", "leakage"]);
            let mut pass = true;
            for x in &b {
                pass &= ok(x.fidelity, x.leakage) && (x.probability - x.logical_probability).abs() <= ORTHO_TOL;
                rows.push(vec![
                    json!(x.outcome),
                    json!(x.probability),
                    json!(x.logical_probability),
                    json!(x.fidelity),
                    json!(x.leakage),
                ]);
            }
            (json!({ "branches": b }), pass, rows)
        }
        (Mode::Swap, true) => {
            let b = collective_swap_branches(a.system)?;
            let mut rows =
                Rows::new(&["outcome_23", "result_14", "probability", "logical_probability", "fidelity_to_table", "leakage"]);
            let mut pass = true;
            for x in &b {
                pass &= ok(x.fidelity_to_table, x.leakage) && (x.probability - x.logical_probability).abs() <= ORTHO_TOL;
                rows.push(vec![
                    json!(x.outcome_23),
                    json!(x.result_14),
                    json!(x.probability),
                    json!(x.logical_probability),
                    json!(x.fidelity_to_table),
                    json!(x.leakage),
                ]);
            }
            (json!({ "branches": b }), pass, rows)
        }
    };
    Ok(ReportEnvelope::new("collective", p, results, pass, rows))
}

pub fn export_upb(name: UpbName) -> CmdResult {
    let upb = upb_of(name);
    let mut rows = Rows::new(&["member", "party", "level", "re", "im"]);
    for (m, member) in upb.members.iter().enumerate() {
        for (party, f) in member.factors.iter().enumerate() {
            for (level, a) in f.amps().iter().enumerate() {
                rows.push(vec![json!(m), json!(party), json!(level), json!(a.re), json!(a.im)]);
            }
        }
    }
    let eeb: Vec<Vec<[f64; 2]>> = match name {
        UpbName::Shifts => EmbeddingMap::shared(System::ThreeQubit).vectors().to_vec(),
        UpbName::Tiles => EmbeddingMap::shared(System::TwoQutrit).vectors().to_vec(),
    }
    .iter()
    .map(|v| v.amps().iter().map(|a| [a.re, a.im]).collect())
    .collect();
    let results = json!({ "upb": upb.to_json(), "entangled_basis": eeb });
    let p = params(&[("system", json!(format!("{name:?}").to_lowercase()))]);
    Ok(ReportEnvelope::new("export-upb", p, results, true, rows))
}
