//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use repairforge::evidence::{
    amplify, overfit_check, InputGenerator, OverfitVerdict, Provenance, Reference,
};
use repairforge::faultloc::{suspiciousness, Formula};
use repairforge::interp::{evaluate, run_suite, ExecutionLimits, Value, Verdict};
use repairforge::minilang::{apply_patch, parse_expression, Expr, FixLocation, Patch, Program};
use repairforge::repair::{repair, AttemptResult, RepairConfig, RepairStatus};
use repairforge::symexec::{
    build_repair_constraint, install_probe, AngelicBounds, RepairConstraint,
};
use repairforge::synth::{check_candidate, synthesize, ComponentFlags, ComponentSet};

use common::load;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn expr(p: &Program, line: u32, text: &str) -> Expr {
    parse_expression(text, p, line).unwrap()
}

fn triangle_constraint() -> (Program, RepairConstraint) {
    let (p, suite) = load("triangle");
    let pp = install_probe(&p, &FixLocation::at(&p, 6).unwrap()).unwrap();
    let rc = build_repair_constraint(&pp, &suite, AngelicBounds::default()).unwrap();
    (p, rc)
}

fn triangle_end_to_end() -> Check {
    let start = Instant::now();
    let (p, suite) = load("triangle");
    let outcome = repair(&p, &suite, &RepairConfig::default()).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(10))?;
    ensure(outcome.status == RepairStatus::Repaired, || {
        format!("status {:?}", outcome.status)
    })?;
    let patch = outcome.patch.unwrap();
    ensure(patch.location.line == 6, || {
        format!("patched line {}", patch.location.line)
    })?;
    let want = expr(&p, 6, "a == b || b == c || a == c");
    ensure(patch.replacement == want, || {
        format!("patch `{}`", patch.replacement)
    })?;
    let repaired = outcome.repaired.unwrap();
    let given = run_suite(&repaired, &suite, ExecutionLimits::default());
    let report = overfit_check(&p, &patch, &suite).map_err(|e| e.to_string())?;
    ensure(given.all_pass() && given.cases.len() == 6, || {
        "given tests fail".into()
    })?;
    ensure(
        report.held_out.all_pass() && report.held_out.cases.len() == 4,
        || "held-out tests fail".into(),
    )?;
    Ok(format!(
        "`{}` at line 6 in {:?}",
        patch.replacement,
        start.elapsed()
    ))
}

fn minimal_fix() -> Check {
    let start = Instant::now();
    let (p, suite) = load("square");
    let outcome = repair(&p, &suite, &RepairConfig::default()).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(2))?;
    let patch = outcome.patch.ok_or("no patch")?;
    let want = expr(&p, patch.location.line, "input * input");
    ensure(patch.replacement == want, || {
        format!("patch `{}`", patch.replacement)
    })?;
    Ok(format!(
        "`{}` at line {}",
        patch.replacement, patch.location.line
    ))
}

fn overfitting_demo() -> Check {
    let start = Instant::now();
    let (p, suite) = load("triangle");
    let (_, rc) = triangle_constraint();
    let flags = ComponentFlags {
        unrestricted_constants: true,
        ..ComponentFlags::default()
    };
    let cs = ComponentSet::for_constraint(&rc, flags);
    let small = synthesize(&rc, &cs, 11).map_err(|e| e.to_string())?;
    let correct = expr(&p, 6, "a == b || b == c || a == c");
    ensure(small.size() < correct.size(), || {
        format!("`{small}` is not smaller")
    })?;
    let patch = Patch {
        location: rc.location.clone(),
        original: rc.original.clone(),
        replacement: small.clone(),
    };
    let repaired = apply_patch(&p, &patch).map_err(|e| e.to_string())?;
    ensure(
        run_suite(&repaired, &suite, ExecutionLimits::default()).all_pass(),
        || format!("`{small}` fails the given tests"),
    )?;
    let report = overfit_check(&p, &patch, &suite).map_err(|e| e.to_string())?;
    ensure(report.verdict == OverfitVerdict::Overfitting, || {
        format!("verdict {:?}", report.verdict)
    })?;
    let scalene = report
        .held_out
        .cases
        .iter()
        .find(|c| c.inputs == [3, 4, 5])
        .ok_or("no (3,4,5) test")?;
    let scalene_value = p.constant("SCALENE").unwrap();
    ensure(
        scalene.verdict == Verdict::Fail && scalene.expected == scalene_value,
        || "(3,4,5) does not fail".into(),
    )?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("`{small}` overfits; (3,4,5) fails"))
}

fn fault_localization() -> Check {
    let (p, suite) = load("triangle");
    let report = run_suite(&p, &suite, ExecutionLimits::default());
    let susp = suspiciousness(&report, Formula::Ochiai).map_err(|e| e.to_string())?;
    // Coverage counted by hand from the six tests: (line, failing, passing).
    let hand = [(8u32, 1.0f64, 1.0f64), (6, 1.0, 3.0), (2, 1.0, 5.0)];
    let total_fail = 1.0;
    for (line, ef, ep) in hand {
        let want = ef / (total_fail * (ef + ep)).sqrt();
        let got = susp
            .score_of(line)
            .ok_or_else(|| format!("no score for line {line}"))?;
        ensure((got - want).abs() <= 1e-9, || {
            format!("line {line}: {got} != {want}")
        })?;
    }
    ensure(
        (susp.score_of(8).unwrap() - 1.0 / 2f64.sqrt()).abs() <= 1e-9,
        || "line 8".into(),
    )?;
    ensure((susp.score_of(6).unwrap() - 0.5).abs() <= 1e-9, || {
        "line 6".into()
    })?;
    ensure(
        (susp.score_of(2).unwrap() - 1.0 / 6f64.sqrt()).abs() <= 1e-9,
        || "line 2".into(),
    )?;

    let outcome = repair(&p, &suite, &RepairConfig::default()).map_err(|e| e.to_string())?;
    let order: Vec<(u32, bool)> = outcome
        .attempts
        .iter()
        .map(|a| {
            (
                a.location.line,
                matches!(a.result, AttemptResult::Accepted { .. }),
            )
        })
        .collect();
    ensure(order == [(8, false), (6, true)], || {
        format!("attempts {order:?}")
    })?;
    Ok("scores match; line 8 rejected before line 6 accepted".into())
}

fn constraint_fidelity() -> Check {
    let (p, rc) = triangle_constraint();
    ensure(rc.unreached_tests == ["invalid", "equilateral"], || {
        format!("unreached {:?}", rc.unreached_tests)
    })?;
    let conjuncts = [
        ("isosceles_ab", [2, 2, 3], true),
        ("isosceles_ac", [2, 3, 2], true),
        ("isosceles_bc", [3, 2, 2], true),
        ("scalene", [2, 3, 4], false),
    ];
    ensure(rc.forests.len() == conjuncts.len(), || {
        format!("{} forests", rc.forests.len())
    })?;
    for (name, abc, value) in conjuncts {
        let forest = rc
            .forests
            .iter()
            .find(|f| f.test_name == name)
            .ok_or_else(|| format!("no forest for {name}"))?;
        let ok = forest.passing_paths.len() == 1
            && forest.passing_paths[0].len() == 1
            && ["a", "b", "c"]
                .iter()
                .zip(abc)
                .all(|(v, x)| forest.passing_paths[0][0].env[*v] == x)
            && forest.passing_paths[0][0].forced == Value::Bool(value);
        ensure(ok, || {
            format!("forest for {name} is {:?}", forest.passing_paths)
        })?;
    }
    let fixed = expr(&p, 6, "a == b || b == c || a == c");
    let buggy = expr(&p, 6, "a == b || b == c");
    ensure(check_candidate(&fixed, &rc), || "fix rejected".into())?;
    ensure(!check_candidate(&buggy, &rc), || "original accepted".into())?;
    Ok("four forests; fix accepted, original rejected".into())
}

fn property_suites() -> Check {
    let files = common::parser_round_trip()?;
    let paths = common::forest_soundness()?;
    let constraints = common::minimality(7)?;
    let m = common::mutation_soundness(0xACCE, 100)?;
    Ok(format!(
        "{files} files round-trip; {paths} paths replay; {constraints} constraints minimal; \
         mutants: {} repaired, {} already passing, {} no patch",
        m.repaired, m.already_passing, m.no_patch
    ))
}

fn evidence_bundle() -> Check {
    let start = Instant::now();
    let (p, suite) = load("triangle");
    let reference = common::program("triangle.reference");
    let outcome = repair(&p, &suite, &RepairConfig::default()).map_err(|e| e.to_string())?;
    let repaired = outcome.repaired.ok_or("no repair")?;
    let report = amplify(
        &p,
        &repaired,
        &suite,
        &InputGenerator::default(),
        Some(Reference {
            program: &reference,
            path: "triangle.reference.mlg",
        }),
        200,
    );
    within(start, Duration::from_secs(10))?;
    let revealing: Vec<_> = report
        .amplified
        .iter()
        .filter(|t| t.provenance == Provenance::DifferenceRevealing)
        .collect();
    ensure(revealing.len() >= 5, || {
        format!("{} difference-revealing tests", revealing.len())
    })?;
    for t in &revealing {
        let before = evaluate(&p, &t.inputs, ExecutionLimits::default()).status;
        let after = evaluate(&repaired, &t.inputs, ExecutionLimits::default()).status;
        ensure(before != after, || {
            format!("{} does not distinguish the programs", t.name)
        })?;
    }
    let combined = report.combined_suite(&suite);
    ensure(
        run_suite(&repaired, &combined, ExecutionLimits::default()).all_pass(),
        || "repaired program fails T and T'".into(),
    )?;
    Ok(format!(
        "{} difference-revealing; {} tests pass in {:?}",
        revealing.len(),
        combined.cases.len(),
        start.elapsed()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("triangle end-to-end", triangle_end_to_end),
        ("minimal fix", minimal_fix),
        ("overfitting demonstration", overfitting_demo),
        ("fault localization", fault_localization),
        ("constraint fidelity", constraint_fidelity),
        ("property suites", property_suites),
        ("evidence bundle", evidence_bundle),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
