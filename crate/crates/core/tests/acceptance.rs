//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use ququart::basis::{
    branch_map, correction_table, derive_correction, natural_decomposition, QuquartBasis, X1,
};
use ququart::collective::{collective_swap_branches, collective_teleport_branches, System};
use ququart::partysim::{swap_script, teleport_script, ClassicalMessage, OwnershipMap, PartyId, Session};
use ququart::protocols::{
    compare_swap_table_to_transcription, derive_swap_table, swap_branches, swap_run, teleport_branches, teleport_trials,
};
use ququart::qmath::{
    completeness_deviation, gram_deviation, is_signed_permutation, schmidt_singular_values, tensor_product,
    StateVector,
};
use ququart::rng::rng_from_seed;
use ququart::upb::{
    extract_ees_with, inspect_upb, shifts_upb, solve_dimension_equation, tiles_upb, verify_upb,
    ENTANGLEMENT_THRESHOLD,
};
use ququart::{BasisLabel, Error, Operator, Result};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn basis_suite() -> Result<Verdict> {
    let states = QuquartBasis::shared().states();
    let gram = gram_deviation(states)?;
    let comp = completeness_deviation(states)?;
    let mut schmidt: f64 = 0.0;
    for s in states {
        for v in schmidt_singular_values(s, &[0])? {
            schmidt = schmidt.max((v - 0.5).abs());
        }
    }
    verdict(
        gram < 1e-12 && comp < 1e-12 && schmidt < 1e-10,
        format!("gram dev {gram:.1e}, completeness dev {comp:.1e}, schmidt dev {schmidt:.1e}"),
    )
}

fn inverse_transform_suite() -> Result<Verdict> {
    let b = QuquartBasis::shared();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let want = StateVector::basis(vec![4, 4], 4 * i + j)?;
            worst = worst.max(natural_decomposition(i, j)?.reconstruct(b).max_abs_diff(&want));
        }
    }
    verdict(worst < 1e-14, format!("max reconstruction error {worst:.1e}"))
}

fn correction_suite() -> Result<Verdict> {
    let printed = correction_table();
    let transcribed_ok = BasisLabel::all().all(|l| is_signed_permutation(4, printed.integer(l)));
    let mut oracle_ok = true;
    let mut differing = Vec::new();
    for l in BasisLabel::all() {
        let u = derive_correction(l, X1)?;
        let m = branch_map(l, X1)?;
        let undo = u.mul(&ququart::basis::int_to_operator(&m))?;
        oracle_ok &= undo.max_abs_diff(&Operator::identity(4)) == 0.0;
        if u.to_integer(1e-12).as_deref() != Some(printed.integer(l).as_slice()) {
            differing.push(l.to_string());
        }
    }
    let mut rng = rng_from_seed(0xACCE_0003);
    let (mut min_f, mut p_dev) = (f64::INFINITY, 0.0f64);
    for _ in 0..1000 {
        let input = StateVector::random(vec![4], &mut rng)?;
        for br in teleport_branches(&input, X1)? {
            min_f = min_f.min(br.fidelity);
            p_dev = p_dev.max((br.probability - 1.0 / 16.0).abs());
        }
    }
    verdict(
        transcribed_ok && oracle_ok && min_f >= 1.0 - 1e-12 && p_dev < 1e-12,
        format!(
            "transcribed signed permutations: {transcribed_ok}; derived corrections invert every branch: {oracle_ok}; \
             1000 inputs min fidelity {min_f:.15}, max |p-1/16| {p_dev:.1e}; transcribed blocks differing from derivation: {}",
            differing.join(" ")
        ),
    )
}

fn sampling_suite() -> Result<Verdict> {
    let input = StateVector::from_real(vec![4], &[0.4, -0.2, 0.8, 0.4])?.normalized()?;
    let a = teleport_trials(&input, X1, 0x5EED_0004, 16000, true)?;
    let b = teleport_trials(&input, X1, 0x5EED_0004, 16000, false)?;
    let (lo, hi) = (*a.counts.iter().min().unwrap(), *a.counts.iter().max().unwrap());
    verdict(
        a == b && lo >= 847 && hi <= 1153 && a.min_fidelity >= 1.0 - 1e-12,
        format!("counts in [{lo}, {hi}] (band [847, 1153]); replay identical: {}", a == b),
    )
}

fn swap_suite() -> Result<Verdict> {
    let t = derive_swap_table(X1, X1)?;
    let mut seen = [false; 16];
    t.entries.iter().for_each(|e| seen[e.result_14.flat()] = true);
    let bijection = seen.iter().all(|&s| s);
    let mag = t.entries.iter().map(|e| (e.coefficient_magnitude - 0.25).abs()).fold(0.0, f64::max);
    let exact = swap_branches(X1, X1)?.iter().map(|b| b.fidelity_to_table).fold(1.0, f64::min);
    let mut sampled = f64::INFINITY;
    for seed in 0..1000 {
        sampled = sampled.min(swap_run(seed)?.fidelity);
    }
    let diff = compare_swap_table_to_transcription()?;
    let dups: Vec<String> = diff
        .reference_duplicates
        .iter()
        .map(|(r, os)| format!("{r}<-{}", os.iter().map(|o| o.to_string()).collect::<Vec<_>>().join("/")))
        .collect();
    let flags_expected = diff.reference_duplicates.iter().map(|(r, _)| r.to_string()).collect::<Vec<_>>()
        == ["X3", "Z1"];
    verdict(
        bijection && mag < 1e-12 && exact >= 1.0 - 1e-12 && sampled >= 1.0 - 1e-12 && flags_expected,
        format!(
            "bijection {bijection}, max |c-1/4| {mag:.1e}, 1000 runs min fidelity {sampled:.15}; printed table: \
             {} of 16 entries differ, duplicates {}",
            diff.discrepancies,
            dups.join(", ")
        ),
    )
}

fn upb_suite() -> Result<Verdict> {
    let s = verify_upb(&shifts_upb())?;
    let t = verify_upb(&tiles_upb())?;
    let trunc = inspect_upb(&shifts_upb().without_member(3));
    let witness_ok = trunc.witness.as_ref().is_some_and(|w| w.max_overlap < 1e-12);
    verdict(
        s.members == 4
            && t.members == 5
            && (s.assignments_checked, s.assignments_blocked) == (81, 81)
            && (t.assignments_checked, t.assignments_blocked) == (32, 32)
            && s.complement_dim == 4
            && t.complement_dim == 4
            && witness_ok,
        format!(
            "shifts ortho {:.1e} blocked {}/{}, tiles ortho {:.1e} blocked {}/{}, complements {}/{}, \
             truncated shifts witness found: {witness_ok}",
            s.orthogonality_max_deviation,
            s.assignments_blocked,
            s.assignments_checked,
            t.orthogonality_max_deviation,
            t.assignments_blocked,
            t.assignments_checked,
            s.complement_dim,
            t.complement_dim
        ),
    )
}

fn ees_suite() -> Result<Verdict> {
    let mut details = Vec::new();
    let mut pass = true;
    for (upb, seed) in [(shifts_upb(), 0xEE5_0007), (tiles_upb(), 0xEE5_0107)] {
        match extract_ees_with(&upb, 1000, seed) {
            Ok((ees, c)) => {
                pass &= ees.vectors.len() == 4 && c.min_second_schmidt > ENTANGLEMENT_THRESHOLD;
                let purity = if upb.local_dim == 2 {
                    format!(", max qubit purity {:.4}", c.max_single_party_purity)
                } else {
                    String::new()
                };
                details.push(format!("{}: min second Schmidt {:.4}{purity}", upb.name, c.min_second_schmidt));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{}: {e}", upb.name));
            }
        }
    }
    verdict(pass, details.join("; "))
}

fn dimension_suite() -> Result<Verdict> {
    let sol = solve_dimension_equation(10, 10)?;
    verdict(sol == [(2, 3), (3, 2)], format!("solutions {sol:?}"))
}

fn collective_suite() -> Result<Verdict> {
    let mut rng = rng_from_seed(0xC011_0009);
    let input = StateVector::random(vec![4], &mut rng)?;
    let logical_tp: Vec<f64> = teleport_branches(&input, X1)?.iter().map(|b| b.probability).collect();
    let logical_sp: Vec<f64> = swap_branches(X1, X1)?.iter().map(|b| b.probability).collect();
    let mut pass = true;
    let mut details = Vec::new();
    for system in System::ALL {
        let tb = collective_teleport_branches(system, &input)?;
        let min_f = tb.iter().map(|b| b.fidelity).fold(1.0, f64::min);
        let leak = tb.iter().map(|b| b.leakage).fold(0.0, f64::max);
        let tp_dev = tb.iter().zip(&logical_tp).map(|(b, p)| (b.probability - p).abs()).fold(0.0, f64::max);
        let sb = collective_swap_branches(system)?;
        let table_ok = sb.iter().all(|b| b.fidelity_to_table >= 1.0 - 1e-10);
        let sleak = sb.iter().map(|b| b.leakage).fold(0.0, f64::max);
        let sp_dev = sb.iter().zip(&logical_sp).map(|(b, p)| (b.probability - p).abs()).fold(0.0, f64::max);
        pass &= min_f >= 1.0 - 1e-10 && leak < 1e-8 && sleak < 1e-8 && table_ok && tp_dev < 1e-12 && sp_dev < 1e-12;
        details.push(format!(
            "{system}: teleport min fidelity {min_f:.12}, leakage {:.1e}, |Δp| {tp_dev:.1e}; swap table match {table_ok}, \
             leakage {:.1e}, |Δp| {sp_dev:.1e}",
            leak, sleak
        ));
    }
    verdict(pass, details.join("; "))
}

fn harness_suite() -> Result<Verdict> {
    let mut rng = rng_from_seed(0x4A55_0010);
    let mut worst: f64 = 0.0;
    let mut replay = true;
    for seed in 0..50 {
        let input = StateVector::random(vec![4], &mut rng)?;
        let s = teleport_script(&input, X1, seed)?;
        let direct = &teleport_branches(&input, X1)?[s.outcome.flat()];
        worst = worst.max(s.final_state.max_abs_diff(&direct.clara_post));
        replay &= s.transcript == teleport_script(&input, X1, seed)?.transcript;
        let w = swap_script(X1, X1, seed)?;
        let direct = &swap_branches(X1, X1)?[w.outcome.flat()];
        worst = worst.max(w.final_state.max_abs_diff(&direct.outer));
        replay &= w.transcript == swap_script(X1, X1, seed)?.transcript;
    }

    let global = tensor_product(&StateVector::basis(vec![4], 0)?, QuquartBasis::shared().state(X1))?;
    let own = OwnershipMap::new().with(PartyId::Alice, &[0]).with(PartyId::Bob, &[1, 2]);
    let mut s = Session::new(global.clone(), own.clone(), 0)?;
    let id = Operator::identity(4);
    let mut cases = Vec::new();
    cases.push(matches!(s.transfer(PartyId::Alice, PartyId::Clara, &[2]), Err(Error::Authorization(_))));
    cases.push(matches!(s.measure_ququart(PartyId::Clara, &[1, 2]), Err(Error::Authorization(_))));
    let forged = ClassicalMessage { from: PartyId::Alice, to: PartyId::Bob, payload: X1, step_index: 7 };
    cases.push(matches!(s.apply_correction(PartyId::Bob, &id, &[1], &forged), Err(Error::Causality(_))));
    let to_alice = s.send_classical(PartyId::Bob, PartyId::Alice, X1);
    cases.push(matches!(s.apply_correction(PartyId::Bob, &id, &[1], &to_alice), Err(Error::Causality(_))));
    cases.push(matches!(s.apply_correction(PartyId::Alice, &id, &[1], &to_alice), Err(Error::Authorization(_))));
    cases.push(matches!(Session::new(global.clone(), OwnershipMap::new(), 0), Err(Error::Setup(_))));
    cases.push(matches!(
        Session::new(global, OwnershipMap::new().with(PartyId::Alice, &[0]), 0),
        Err(Error::Setup(_))
    ));
    let fired = cases.iter().filter(|&&c| c).count();
    verdict(
        worst < 1e-12 && replay && fired == cases.len(),
        format!("max deviation from direct {worst:.1e}, replay {replay}, error cases fired {fired}/{}", cases.len()),
    )
}

type Suite = fn() -> Result<Verdict>;

fn main() {
    let suites: [(&str, Suite, Option<Duration>); 10] = [
        ("basis", basis_suite, Some(Duration::from_secs(1))),
        ("inverse transform", inverse_transform_suite, None),
        ("corrections", correction_suite, Some(Duration::from_secs(5))),
        ("sampling", sampling_suite, None),
        ("swap", swap_suite, Some(Duration::from_secs(5))),
        ("upb", upb_suite, None),
        ("ees", ees_suite, None),
        ("dimension equation", dimension_suite, None),
        ("collective", collective_suite, Some(Duration::from_secs(60))),
        ("harness", harness_suite, None),
    ];
    let mut failures = 0;
    for (k, (name, run, budget)) in suites.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let ok = pass && in_time;
        let budget_note = budget.map(|b| format!(" / budget {:.0}s", b.as_secs_f64())).unwrap_or_default();
        println!(
            "criterion {:>2} {:<18} {}  [{:.2}s{budget_note}] {detail}",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !ok {
            failures += 1;
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
