use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use repairforge::evidence::{
    amplify, overfit_check, InputGenerator, OverfitVerdict, Provenance, Reference,
};
use repairforge::faultloc::{
    candidate_locations, suspiciousness, FaultLocError, FixLocation, Formula, SuspiciousnessReport,
};
use repairforge::interp::{run_cases, run_suite, ExecutionLimits, TestSuite};
use repairforge::minilang::{
    apply_patch, diff, parse_program, pretty_print, Patch, PatchFile, Program,
};
use repairforge::repair::{repair, AttemptResult, RepairConfig, RepairOutcome, RepairStatus};
use repairforge::symexec::{
    build_repair_constraint, install_probe, AngelicBounds, RepairConstraint, SymexecError,
};
use repairforge::synth::{synthesize_until, ComponentFlags, ComponentSet, SynthError};

use crate::{Bounds, Command, Components, Output, Search};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_PATCH: u8 = 2;
pub const EXIT_OVERFITTING: u8 = 3;

/// Report written by `localize`.
#[derive(Debug, Serialize, Deserialize)]
pub struct LocalizeReport {
    pub suspiciousness: SuspiciousnessReport,
    pub candidates: Vec<FixLocation>,
}

pub fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run {
            program,
            tests,
            held_out_only,
            out,
        } => run(&program, &tests, held_out_only, &out),
        Command::Localize {
            program,
            tests,
            top_k,
            tarantula,
            out,
        } => localize(&program, &tests, top_k as usize, tarantula, &out),
        Command::Constraint {
            program,
            tests,
            line,
            bounds,
            out,
        } => constraint(&program, &tests, line, &bounds, &out),
        Command::Synth {
            constraint,
            max_size,
            components,
            out,
        } => synth(&constraint, max_size as usize, &components, &out),
        Command::Repair {
            program,
            tests,
            search,
            write,
            patch_out,
            out,
        } => repair_cmd(
            &program,
            &tests,
            &search,
            write.as_deref(),
            patch_out.as_deref(),
            &out,
        ),
        Command::Evidence {
            program,
            tests,
            patch,
            reference,
            seed,
            count,
            suite_out,
            search,
            out,
        } => evidence(EvidenceArgs {
            program: &program,
            tests: &tests,
            patch: patch.as_deref(),
            reference: reference.as_deref(),
            seed,
            count: count as usize,
            suite_out: suite_out.as_deref(),
            search: &search,
            out: &out,
        }),
        Command::OverfitCheck {
            program,
            tests,
            patch,
            held_out_only,
            out,
        } => overfit(&program, &tests, &patch, held_out_only, &out),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_program(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_suite(path: &Path, program: &Program) -> Result<TestSuite> {
    TestSuite::from_json(&read(path)?, program).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_patch(path: &Path, program: &Program) -> Result<Patch> {
    let file: PatchFile = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{}: malformed patch file", path.display()))?;
    file.to_patch(program)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_report<T: Serialize>(out: &Output, value: &T) -> Result<()> {
    if let Some(path) = &out.report {
        let text = serde_json::to_string_pretty(value)?;
        fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn angelic_bounds(b: &Bounds) -> AngelicBounds {
    AngelicBounds {
        max_evals: b.max_evals as usize,
        max_paths: b.max_paths as usize,
        ..AngelicBounds::default()
    }
}

fn flags(c: &Components) -> ComponentFlags {
    ComponentFlags {
        unrestricted_constants: c.unrestricted_constants,
        include_div: c.include_div,
        all_operators: c.all_operators,
    }
}

fn repair_config(s: &Search) -> RepairConfig {
    let total = Duration::from_secs(s.budget_secs);
    let defaults = RepairConfig::default();
    RepairConfig {
        top_k: s.top_k as usize,
        max_size: s.max_size as usize,
        bounds: angelic_bounds(&s.bounds),
        flags: flags(&s.components),
        location_budget: defaults.location_budget.min(total),
        total_budget: total,
        ..defaults
    }
}

fn run(program: &Path, tests: &Path, held_out_only: bool, out: &Output) -> Result<u8> {
    let p = load_program(program)?;
    let suite = load_suite(tests, &p)?;
    let cases = if held_out_only {
        &suite.held_out
    } else {
        &suite.cases
    };
    let report = run_cases(&p, cases, ExecutionLimits::default());
    print!("{}", report.render_table());
    write_report(out, &report)?;
    Ok(EXIT_OK)
}

fn localize(
    program: &Path,
    tests: &Path,
    top_k: usize,
    tarantula: bool,
    out: &Output,
) -> Result<u8> {
    let p = load_program(program)?;
    let suite = load_suite(tests, &p)?;
    let report = run_suite(&p, &suite, ExecutionLimits::default());
    let formula = if tarantula {
        Formula::Tarantula
    } else {
        Formula::Ochiai
    };
    let susp = match suspiciousness(&report, formula) {
        Ok(s) => s,
        Err(FaultLocError::NoFailingTests) => {
            println!("all tests pass; nothing to localize");
            return Ok(EXIT_OK);
        }
        Err(e) => bail!(e),
    };
    let candidates = candidate_locations(&susp, &p, top_k).unwrap_or_default();
    print!("{}", susp.render_table());
    println!("candidates:");
    for c in &candidates {
        println!("  line {} {}", c.line, c.kind);
    }
    write_report(
        out,
        &LocalizeReport {
            suspiciousness: susp,
            candidates,
        },
    )?;
    Ok(EXIT_OK)
}

fn constraint(
    program: &Path,
    tests: &Path,
    line: u32,
    bounds: &Bounds,
    out: &Output,
) -> Result<u8> {
    let p = load_program(program)?;
    let suite = load_suite(tests, &p)?;
    let location =
        FixLocation::at(&p, line).ok_or_else(|| anyhow!("no statement on line {line}"))?;
    let pp = install_probe(&p, &location)?;
    match build_repair_constraint(&pp, &suite, angelic_bounds(bounds)) {
        Ok(c) => {
            println!("{}", c.to_json());
            write_report(out, &c)?;
            Ok(EXIT_OK)
        }
        Err(
            e @ (SymexecError::InfeasibleLocation { .. } | SymexecError::EvalBudgetExceeded { .. }),
        ) => {
            eprintln!("{e}");
            Ok(EXIT_NO_PATCH)
        }
        Err(e) => Err(e.into()),
    }
}

fn synth(path: &Path, max_size: usize, components: &Components, out: &Output) -> Result<u8> {
    let rc = RepairConstraint::from_json(&read(path)?)
        .with_context(|| format!("{}: malformed constraint", path.display()))?;
    let cs = ComponentSet::for_constraint(&rc, flags(components));
    match synthesize_until(&rc, &cs, max_size, None) {
        Ok(found) => {
            println!("{}", found.expr);
            write_report(out, &found)?;
            Ok(EXIT_OK)
        }
        Err(e @ SynthError::SynthesisExhausted { .. })
        | Err(e @ SynthError::DeadlineExceeded { .. }) => {
            eprintln!("{e}");
            Ok(EXIT_NO_PATCH)
        }
    }
}

fn describe(outcome: &RepairOutcome) {
    for a in &outcome.attempts {
        let what = match &a.result {
            AttemptResult::Infeasible { reason } => format!("infeasible: {reason}"),
            AttemptResult::SynthesisExhausted { reason } => format!("synthesis failed: {reason}"),
            AttemptResult::ValidationFailed { candidate, failing } => {
                format!("`{candidate}` rejected, fails {}", failing.join(", "))
            }
            AttemptResult::Accepted { replacement } => format!("accepted `{replacement}`"),
        };
        eprintln!("line {} ({}): {what}", a.location.line, a.location.kind);
    }
    let s = &outcome.stats;
    eprintln!(
        "{:?}: {} tests run, {} candidates checked, {} ms",
        outcome.status, s.tests_run, s.candidates_checked, s.elapsed_ms
    );
}

fn repair_cmd(
    program: &Path,
    tests: &Path,
    search: &Search,
    write: Option<&Path>,
    patch_out: Option<&Path>,
    out: &Output,
) -> Result<u8> {
    let p = load_program(program)?;
    let suite = load_suite(tests, &p)?;
    let outcome = repair(&p, &suite, &repair_config(search))?;
    describe(&outcome);
    write_report(out, &outcome)?;
    match (&outcome.patch, &outcome.repaired) {
        (Some(patch), Some(repaired)) => {
            print!("{}", diff(&p, repaired, &program.display().to_string()));
            if let Some(path) = write {
                fs::write(path, pretty_print(repaired))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            if let Some(path) = patch_out {
                let text = serde_json::to_string_pretty(&PatchFile::from_patch(patch))?;
                fs::write(path, text + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(EXIT_OK)
        }
        _ if outcome.status == RepairStatus::AlreadyPassing => Ok(EXIT_OK),
        _ => Ok(EXIT_NO_PATCH),
    }
}

struct EvidenceArgs<'a> {
    program: &'a Path,
    tests: &'a Path,
    patch: Option<&'a Path>,
    reference: Option<&'a Path>,
    seed: u64,
    count: usize,
    suite_out: Option<&'a Path>,
    search: &'a Search,
    out: &'a Output,
}

fn evidence(args: EvidenceArgs<'_>) -> Result<u8> {
    let p = load_program(args.program)?;
    let suite = load_suite(args.tests, &p)?;
    let repaired = match args.patch {
        Some(path) => apply_patch(&p, &load_patch(path, &p)?)?,
        None => {
            let outcome = repair(&p, &suite, &repair_config(args.search))?;
            match outcome.repaired {
                Some(r) => r,
                None if outcome.status == RepairStatus::AlreadyPassing => p.clone(),
                None => {
                    describe(&outcome);
                    return Ok(EXIT_NO_PATCH);
                }
            }
        }
    };
    let reference = args.reference.map(load_program).transpose()?;
    let reference_path = args
        .reference
        .map(|r| r.display().to_string())
        .unwrap_or_default();
    let gen = InputGenerator::with_seed(args.seed);
    let report = amplify(
        &p,
        &repaired,
        &suite,
        &gen,
        reference.as_ref().map(|program| Reference {
            program,
            path: &reference_path,
        }),
        args.count,
    );
    let s = &report.summary;
    println!(
        "{} probes: {} difference-revealing, {} random",
        s.probes, s.difference_revealing, s.random_probes
    );
    for t in report
        .amplified
        .iter()
        .filter(|t| t.provenance == Provenance::DifferenceRevealing)
    {
        let expected = t
            .expected
            .map_or_else(|| "?".to_string(), |v| v.to_string());
        println!(
            "  {} {:?}: original {}, repaired {}, expected {expected}",
            t.name, t.inputs, t.original, t.repaired
        );
    }
    if report.verdicts.is_some() {
        println!(
            "repaired program on T and T': {} passed, {} failed",
            s.passed, s.failed
        );
    } else {
        println!("no reference given: amplified tests are unoracled");
    }
    if let Some(path) = args.suite_out {
        let combined = report.combined_suite(&suite);
        fs::write(path, combined.to_json() + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    write_report(args.out, &report)?;
    Ok(EXIT_OK)
}

fn overfit(
    program: &Path,
    tests: &Path,
    patch: &Path,
    held_out_only: bool,
    out: &Output,
) -> Result<u8> {
    let p = load_program(program)?;
    let suite = load_suite(tests, &p)?;
    let patch = load_patch(patch, &p)?;
    let report = overfit_check(&p, &patch, &suite)?;
    if !held_out_only {
        println!("guiding tests:");
        print!("{}", report.guiding.render_table());
    }
    println!("held-out tests:");
    print!("{}", report.held_out.render_table());
    println!("verdict: {:?}", report.verdict);
    write_report(out, &report)?;
    Ok(match report.verdict {
        OverfitVerdict::NotOverfitting => EXIT_OK,
        OverfitVerdict::InvalidPatch => EXIT_NO_PATCH,
        OverfitVerdict::Overfitting => EXIT_OVERFITTING,
    })
}
