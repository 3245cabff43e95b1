use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use proptest::prelude::*;

use super::*;
use crate::minilang::{parse_expression, BinaryOp, FixKind, FixLocation};
use crate::symexec::{
    build_repair_constraint, install_probe, AngelicBounds, AngelicForest, AngelicStep,
};
use crate::testutil::load;

fn constraint_for(name: &str, line: u32) -> RepairConstraint {
    let (p, suite) = load(name);
    let pp = install_probe(&p, &FixLocation::at(&p, line).unwrap()).unwrap();
    build_repair_constraint(&pp, &suite, AngelicBounds::default()).unwrap()
}

/// Forests as lists of paths, each a list of (variable values, forced value).
type Forests = Vec<Vec<Vec<(Vec<i64>, Value)>>>;

fn manual(kind: ValueKind, vars: &[&str], forests: Forests) -> RepairConstraint {
    let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let forests = forests
        .into_iter()
        .enumerate()
        .map(|(i, paths)| AngelicForest {
            test_name: format!("t{i}"),
            passing_paths: paths
                .into_iter()
                .map(|path| {
                    path.into_iter()
                        .map(|(vals, forced)| AngelicStep {
                            env: vars.iter().cloned().zip(vals).collect(),
                            forced,
                        })
                        .collect()
                })
                .collect(),
        })
        .collect();
    RepairConstraint {
        location: FixLocation {
            line: 1,
            kind: match kind {
                ValueKind::Boolean => FixKind::BranchCondition,
                ValueKind::Integer => FixKind::ReturnExpr,
            },
            live_vars: vars,
        },
        value_kind: kind,
        forests,
        unreached_tests: vec![],
        constants: BTreeMap::new(),
        original: Expr::Int(0),
        program_literals: vec![],
    }
}

fn vars(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// First satisfying expression by plain enumeration and tree evaluation.
fn brute_force(rc: &RepairConstraint, cs: &ComponentSet, max_size: usize) -> Option<Expr> {
    enumerate_expressions(cs, value_type(rc.value_kind), max_size)
        .into_iter()
        .find(|e| check_candidate(e, rc))
}

#[test]
fn enumeration_of_integer_terms() {
    let cs = ComponentSet::new(
        vars(&["input"]),
        vec![],
        [Operator::Add, Operator::Sub, Operator::Mul, Operator::Neg],
    );
    let all: Vec<String> = enumerate_expressions(&cs, Type::Int, 3)
        .iter()
        .map(|e| e.to_string())
        .collect();
    assert_eq!(
        all,
        [
            "input",
            "-input",
            "input + input",
            "input - input",
            "input * input",
            "-(-input)"
        ]
    );
}

#[test]
fn enumeration_of_leaves_only() {
    let cs = ComponentSet::new(vars(&["a"]), vec![0], Operator::ALL);
    let all = enumerate_expressions(&cs, Type::Int, 1);
    assert_eq!(all, vec![Expr::var("a"), Expr::Int(0)]);
}

#[test]
fn enumeration_of_single_comparison() {
    let cs = ComponentSet::new(vars(&["a", "b"]), vec![], [Operator::Eq]);
    let all: Vec<String> = enumerate_expressions(&cs, Type::Bool, 3)
        .iter()
        .map(|e| e.to_string())
        .collect();
    assert_eq!(all, ["a == a", "a == b", "b == b"]);
    assert!(enumerate_expressions(
        &ComponentSet::new(vars(&["a"]), vec![], [Operator::Add]),
        Type::Bool,
        5
    )
    .is_empty());
}

#[test]
fn enumeration_is_size_ordered_and_duplicate_free() {
    let cs = ComponentSet::new(
        vars(&["a", "b"]),
        vec![0, 1],
        [Operator::Sub, Operator::Lt, Operator::And, Operator::Not],
    );
    let all = enumerate_expressions(&cs, Type::Bool, 7);
    assert!(all.windows(2).all(|w| w[0].size() <= w[1].size()));
    let unique: HashSet<&Expr> = all.iter().collect();
    assert_eq!(unique.len(), all.len());
    assert!(all.iter().all(|e| e.result_type() == Type::Bool));
}

#[test]
fn commutative_operators_emit_one_order() {
    let cs = ComponentSet::new(vars(&["a", "b"]), vec![], [Operator::Add, Operator::Sub]);
    let all: Vec<String> = enumerate_expressions(&cs, Type::Int, 3)
        .iter()
        .map(|e| e.to_string())
        .collect();
    assert!(all.contains(&"a + b".to_string()));
    assert!(!all.contains(&"b + a".to_string()));
    assert!(all.contains(&"a - b".to_string()) && all.contains(&"b - a".to_string()));
}

#[test]
fn preferred_ingredients_come_first_within_their_size() {
    let mut cs = ComponentSet::new(vars(&["a", "b"]), vec![], [Operator::Eq, Operator::Or]);
    cs.preferred = vec![parse_free("b == a")];
    let all: Vec<String> = enumerate_expressions(&cs, Type::Bool, 3)
        .iter()
        .map(|e| e.to_string())
        .collect();
    assert_eq!(all, ["b == a", "b == b", "a == a"]);
}

fn parse_free(text: &str) -> Expr {
    let (p, _) = load("max3");
    parse_expression(text, &p, 3).unwrap()
}

#[test]
fn check_candidate_on_triangle() {
    let rc = constraint_for("triangle", 6);
    let (p, _) = load("triangle");
    let fixed = parse_expression("a == b || b == c || a == c", &p, 6).unwrap();
    assert!(check_candidate(&fixed, &rc));
    assert!(!check_candidate(&rc.original, &rc));
    let empty = manual(ValueKind::Boolean, &["x"], vec![]);
    assert!(check_candidate(
        &Expr::binary(BinaryOp::Eq, Expr::Int(1), Expr::Int(2)),
        &empty
    ));
}

#[test]
fn triangle_components() {
    let rc = constraint_for("triangle", 6);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    assert_eq!(cs.variables, ["a", "b", "c"]);
    assert_eq!(cs.constants, [0, 1]);
    assert_eq!(
        cs.operators,
        [
            Operator::Eq,
            Operator::Ne,
            Operator::And,
            Operator::Or,
            Operator::Not
        ]
    );
    assert_eq!(cs.preferred[0], rc.original);
    let wide = ComponentSet::for_constraint(
        &rc,
        ComponentFlags {
            unrestricted_constants: true,
            include_div: true,
            all_operators: true,
        },
    );
    assert_eq!(wide.operators, Operator::ALL);
    assert_eq!(wide.constants, (-10..=10).collect::<Vec<_>>());
}

#[test]
fn triangle_fix_is_synthesized() {
    let rc = constraint_for("triangle", 6);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    let e = synthesize(&rc, &cs, DEFAULT_MAX_SIZE).unwrap();
    assert_eq!(e.to_string(), "a == b || b == c || a == c");
    assert_eq!(e.size(), 11);
}

#[test]
fn triangle_has_no_smaller_fix_over_default_components() {
    let rc = constraint_for("triangle", 6);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    let smaller = enumerate_expressions(&cs, Type::Bool, 10);
    assert!(smaller.len() > 10_000);
    assert_eq!(smaller.iter().find(|e| check_candidate(e, &rc)), None);
}

#[test]
fn wider_operator_set_admits_a_smaller_triangle_candidate() {
    let rc = constraint_for("triangle", 6);
    let ops = [
        Operator::Eq,
        Operator::Ne,
        Operator::Lt,
        Operator::Le,
        Operator::And,
        Operator::Or,
    ];
    let mut cs = ComponentSet::new(vars(&["a", "b", "c"]), vec![0, 1], ops);
    cs.preferred = rc.original.subterms().into_iter().cloned().collect();
    let e = synthesize(&rc, &cs, DEFAULT_MAX_SIZE).unwrap();
    assert_eq!(e.size(), 7);
    assert_eq!(Some(e), brute_force(&rc, &cs, 7));
}

#[test]
fn unrestricted_constants_give_an_overfitting_patch() {
    let rc = constraint_for("triangle", 6);
    let cs = ComponentSet::for_constraint(
        &rc,
        ComponentFlags {
            unrestricted_constants: true,
            ..ComponentFlags::default()
        },
    );
    assert_eq!(
        synthesize(&rc, &cs, DEFAULT_MAX_SIZE).unwrap().to_string(),
        "c != 4"
    );
}

#[test]
fn square_fix_is_synthesized() {
    let rc = constraint_for("square", 2);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    assert_eq!(
        synthesize(&rc, &cs, DEFAULT_MAX_SIZE).unwrap().to_string(),
        "input * input"
    );
    let plain = ComponentSet::new(
        vars(&["input"]),
        vec![],
        [Operator::Add, Operator::Sub, Operator::Mul],
    );
    assert_eq!(
        synthesize(&rc, &plain, 5).unwrap().to_string(),
        "input * input"
    );
}

#[test]
fn loop_step_is_synthesized() {
    let rc = constraint_for("sum_to", 7);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    assert_eq!(synthesize(&rc, &cs, 5).unwrap().to_string(), "i + 1");
}

#[test]
fn leaf_only_components_exhaust() {
    let rc = constraint_for("triangle", 8);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    assert!(cs.operators.is_empty());
    assert_eq!(
        synthesize(&rc, &cs, DEFAULT_MAX_SIZE),
        Err(SynthError::SynthesisExhausted { max_size: 11 })
    );
}

#[test]
fn contradictory_requirements_exhaust() {
    let rc = manual(
        ValueKind::Integer,
        &["x"],
        vec![
            vec![vec![(vec![2], Value::Int(4))]],
            vec![vec![(vec![2], Value::Int(5))]],
        ],
    );
    let cs = ComponentSet::new(
        vars(&["x"]),
        vec![0, 1],
        [Operator::Add, Operator::Mul, Operator::Neg],
    );
    assert_eq!(
        synthesize(&rc, &cs, 7),
        Err(SynthError::SynthesisExhausted { max_size: 7 })
    );
}

#[test]
fn identity_is_recovered() {
    let rc = manual(
        ValueKind::Integer,
        &["x"],
        [3, -1, 7]
            .iter()
            .map(|v| vec![vec![(vec![*v], Value::Int(*v))]])
            .collect(),
    );
    let cs = ComponentSet::new(vars(&["x"]), vec![0, 1], Operator::ALL);
    assert_eq!(synthesize(&rc, &cs, 5).unwrap(), Expr::var("x"));
}

#[test]
fn division_errors_count_as_unsatisfied() {
    let rc = manual(
        ValueKind::Integer,
        &["x"],
        vec![
            vec![vec![(vec![0], Value::Int(0))]],
            vec![vec![(vec![4], Value::Int(1))]],
        ],
    );
    let cs = ComponentSet::new(vars(&["x"]), vec![], [Operator::Div]);
    // `x / x` would be 1 on x = 4 but divides by zero on x = 0.
    assert_eq!(
        synthesize(&rc, &cs, 3),
        Err(SynthError::SynthesisExhausted { max_size: 3 })
    );
}

#[test]
fn synthesis_is_deterministic() {
    let rc = constraint_for("triangle", 6);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    let a = synthesize_until(&rc, &cs, DEFAULT_MAX_SIZE, None).unwrap();
    let b = synthesize_until(&rc, &cs, DEFAULT_MAX_SIZE, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn deadline_is_reported() {
    let rc = constraint_for("triangle", 6);
    let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
    let past = Instant::now() - Duration::from_millis(1);
    assert!(matches!(
        synthesize_until(&rc, &cs, DEFAULT_MAX_SIZE, Some(past)),
        Err(SynthError::DeadlineExceeded { .. })
    ));
}

#[test]
fn pruned_search_matches_brute_force_on_corpus() {
    for (name, line) in [
        ("triangle", 6),
        ("triangle", 8),
        ("square", 2),
        ("square", 3),
        ("sum_to", 7),
        ("withdraw", 4),
        ("withdraw", 5),
    ] {
        let rc = constraint_for(name, line);
        let cs = ComponentSet::for_constraint(&rc, ComponentFlags::default());
        let expected = brute_force(&rc, &cs, 7);
        let got = synthesize(&rc, &cs, 7).ok();
        assert_eq!(got, expected, "{name}:{line}");
        if let Some(e) = got {
            assert!(check_candidate(&e, &rc));
        }
    }
}

fn arb_constraint() -> impl Strategy<Value = RepairConstraint> {
    let env = prop::collection::vec(-3i64..4, 2);
    let step = (env, any::<bool>());
    let path = prop::collection::vec(step, 1..3);
    let forest = prop::collection::vec(path, 1..3);
    prop::collection::vec(forest, 0..4).prop_map(|forests| {
        manual(
            ValueKind::Boolean,
            &["x", "y"],
            forests
                .into_iter()
                .map(|paths| {
                    paths
                        .into_iter()
                        .map(|steps| {
                            steps
                                .into_iter()
                                .map(|(env, b)| (env, Value::Bool(b)))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_is_sound_and_minimal(rc in arb_constraint()) {
        let cs = ComponentSet::new(vars(&["x", "y"]), vec![0, 1], [Operator::Sub, Operator::Lt, Operator::Eq, Operator::And, Operator::Not]);
        let got = synthesize(&rc, &cs, 5).ok();
        if let Some(e) = &got {
            prop_assert!(check_candidate(e, &rc));
        }
        prop_assert_eq!(got, brute_force(&rc, &cs, 5));
    }
}
