#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repairforge::interp::{run_suite, ExecutionLimits, ExecutionStatus, TestSuite};
use repairforge::minilang::{parse_program, pretty_print, BinaryOp, Expr, FixLocation, Program};
use repairforge::repair::{repair, RepairConfig, RepairStatus};
use repairforge::symexec::{
    build_repair_constraint, install_probe, replay, AngelicBounds, RepairConstraint,
};
use repairforge::synth::{
    check_candidate, enumerate_expressions, synthesize, ComponentFlags, ComponentSet,
};

pub const PROGRAMS: [&str; 6] = [
    "triangle", "square", "sum_to", "withdraw", "max3", "abs_diff",
];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn source(file: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn program(name: &str) -> Program {
    parse_program(&source(&format!("{name}.mlg"))).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> (Program, TestSuite) {
    let p = program(name);
    let suite = TestSuite::from_json(&source(&format!("{name}.tests.json")), &p).unwrap();
    (p, suite)
}

/// Every `.mlg` file in the corpus.
pub fn corpus_sources() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "mlg"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// Constraints for every corpus location whose constraint can be built.
pub fn corpus_constraints() -> Vec<(String, Program, TestSuite, RepairConstraint)> {
    let mut out = Vec::new();
    for name in PROGRAMS {
        let (p, suite) = load(name);
        for line in p.lines() {
            let Some(loc) = FixLocation::at(&p, line) else {
                continue;
            };
            let Ok(pp) = install_probe(&p, &loc) else {
                continue;
            };
            if let Ok(rc) = build_repair_constraint(&pp, &suite, AngelicBounds::default()) {
                out.push((format!("{name}:{line}"), p.clone(), suite.clone(), rc));
            }
        }
    }
    out
}

pub fn parser_round_trip() -> Result<usize, String> {
    let sources = corpus_sources();
    for (name, text) in &sources {
        let p = parse_program(text).map_err(|e| format!("{name}: {e}"))?;
        let printed = pretty_print(&p);
        let again = parse_program(&printed).map_err(|e| format!("{name} reprinted: {e}"))?;
        if again != p || pretty_print(&again) != printed {
            return Err(format!("{name}: print/parse is not a fixed point"));
        }
    }
    Ok(sources.len())
}

/// Replays every recorded path and checks it passes its test with the same
/// environments.
pub fn forest_soundness() -> Result<usize, String> {
    let mut paths = 0;
    for (name, p, suite, rc) in corpus_constraints() {
        let pp = install_probe(&p, &rc.location).unwrap();
        for forest in &rc.forests {
            let test = suite
                .cases
                .iter()
                .find(|t| t.name == forest.test_name)
                .unwrap();
            for path in &forest.passing_paths {
                let forced: Vec<_> = path.iter().map(|s| s.forced).collect();
                let (status, replayed) = replay(&pp, test, &forced);
                if status != ExecutionStatus::Returned(test.expected) || &replayed != path {
                    return Err(format!(
                        "{name}: path for {} does not replay",
                        forest.test_name
                    ));
                }
                paths += 1;
            }
        }
    }
    Ok(paths)
}

/// Pruned synthesis agrees with exhaustive enumeration on the smallest
/// satisfying size.
pub fn minimality(max_size: usize) -> Result<usize, String> {
    let constraints = corpus_constraints();
    for (name, _, _, rc) in &constraints {
        let cs = ComponentSet::for_constraint(rc, ComponentFlags::default());
        let ty = rc.location.kind.value_type();
        let brute = enumerate_expressions(&cs, ty, max_size)
            .into_iter()
            .find(|e| check_candidate(e, rc));
        let found = synthesize(rc, &cs, max_size).ok();
        match (&brute, &found) {
            (None, None) => {}
            (Some(b), Some(f)) if b.size() == f.size() && check_candidate(f, rc) => {}
            _ => {
                return Err(format!(
                    "{name}: exhaustive {brute:?}, synthesized {found:?}"
                ))
            }
        }
    }
    Ok(constraints.len())
}

fn binary_sites(e: &Expr, out: &mut usize) {
    if let Expr::Binary(_, l, r) = e {
        *out += 1;
        binary_sites(l, out);
        binary_sites(r, out);
    } else if let Expr::Unary(_, c) = e {
        binary_sites(c, out);
    }
}

fn nth_binary<'a>(e: &'a mut Expr, n: &mut usize) -> Option<&'a mut BinaryOp> {
    match e {
        Expr::Binary(op, l, r) => {
            if *n == 0 {
                return Some(op);
            }
            *n -= 1;
            nth_binary(l, n).or_else(|| nth_binary(r, n))
        }
        Expr::Unary(_, c) => nth_binary(c, n),
        _ => None,
    }
}

fn siblings(op: BinaryOp) -> &'static [BinaryOp] {
    use BinaryOp::*;
    match op {
        Add | Sub | Mul => &[Add, Sub, Mul],
        Div | Mod => &[Div, Mod],
        Eq | Ne => &[Eq, Ne],
        Lt | Le | Gt | Ge => &[Lt, Le, Gt, Ge],
        And | Or => &[And, Or],
    }
}

/// Replace one binary operator of `p` by a different one of the same
/// signature.
pub fn mutate(p: &Program, rng: &mut impl Rng) -> Option<(Program, u32)> {
    let sites: Vec<(u32, usize)> = p
        .statements()
        .iter()
        .flat_map(|s| {
            let mut n = 0;
            binary_sites(s.expr(), &mut n);
            (0..n).map(move |i| (s.line, i))
        })
        .collect();
    let &(line, mut index) = sites.choose(rng)?;
    let mut mutant = p.clone();
    let op = nth_binary(mutant.statement_at_mut(line)?.expr_mut(), &mut index)?;
    let choices: Vec<BinaryOp> = siblings(*op).iter().copied().filter(|o| o != op).collect();
    *op = *choices.choose(rng)?;
    Some((mutant, line))
}

pub struct MutationSummary {
    pub mutants: usize,
    pub repaired: usize,
    pub already_passing: usize,
    pub no_patch: usize,
}

/// Repairs `count` seeded single-operator mutants and checks every accepted
/// patch is sound and structure-preserving.
pub fn mutation_soundness(seed: u64, count: usize) -> Result<MutationSummary, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RepairConfig {
        top_k: 3,
        max_size: 7,
        location_budget: std::time::Duration::from_secs(2),
        total_budget: std::time::Duration::from_secs(5),
        ..RepairConfig::default()
    };
    let mut summary = MutationSummary {
        mutants: 0,
        repaired: 0,
        already_passing: 0,
        no_patch: 0,
    };
    while summary.mutants < count {
        let name = PROGRAMS[rng.gen_range(0..PROGRAMS.len())];
        let (p, suite) = load(name);
        let Some((mutant, line)) = mutate(&p, &mut rng) else {
            continue;
        };
        summary.mutants += 1;
        let outcome = repair(&mutant, &suite, &cfg).map_err(|e| format!("{name}:{line}: {e}"))?;
        match outcome.status {
            RepairStatus::Repaired => {
                summary.repaired += 1;
                let repaired = outcome
                    .repaired
                    .as_ref()
                    .ok_or("Repaired without a program")?;
                let patch = outcome.patch.as_ref().ok_or("Repaired without a patch")?;
                if !run_suite(repaired, &suite, ExecutionLimits::default()).all_pass() {
                    return Err(format!(
                        "{name}:{line}: accepted `{}` fails the suite",
                        patch.replacement
                    ));
                }
                if repaired.statements().len() != mutant.statements().len()
                    || repaired.lines() != mutant.lines()
                {
                    return Err(format!("{name}:{line}: patch changed program structure"));
                }
                let changed: Vec<u32> = mutant
                    .statements()
                    .iter()
                    .zip(repaired.statements())
                    .filter(|(a, b)| a.expr() != b.expr())
                    .map(|(a, _)| a.line)
                    .collect();
                if changed != [patch.location.line] {
                    return Err(format!("{name}:{line}: patch touched lines {changed:?}"));
                }
            }
            RepairStatus::AlreadyPassing => summary.already_passing += 1,
            RepairStatus::NoPatchFound => summary.no_patch += 1,
        }
    }
    Ok(summary)
}
