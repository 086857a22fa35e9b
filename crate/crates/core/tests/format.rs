use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qfst::random::{random_machine, RandomMachineParams};
use qfst::*;

const MINIMAL: &str = "\
# one state, nothing happens
[machine]
name = still
mode = quantum
input_alphabet = a
output_alphabet =
states = q
initial = q

[unitary ^]
[unitary a]
[unitary $]
";

#[test]
fn minimal_machine_parses() {
    let m: Machine = parse_machine_text(MINIMAL).unwrap();
    assert!(validate_machine(&m).ok);
    assert_eq!(m.states, vec!["q"]);
    assert!(m.emissions.is_empty());
}

#[test]
fn f1_text_parses_to_builder_output() {
    let built: Machine = f1_qfst();
    let text = serialize_machine(&built);
    let parsed: Machine = parse_machine_text(&text).unwrap();
    assert!(
        parsed.approx_eq(&built, 0.0),
        "exported text must reproduce the builder exactly"
    );
    assert!(validate_machine(&parsed).ok);
}

#[test]
fn f1_export_uses_defining_expressions() {
    let text = serialize_machine(&f1_qfst::<f64>());
    assert!(text.contains(
        "[unitary ^]\nA1 <- s0 : 1/sqrt(3)\nA2 <- s0 : 1/sqrt(3)\nR <- s0 : 1/sqrt(3)\n"
    ));
    assert!(text.contains("qrej <- B2 : -1/sqrt(2)\n"));
    assert!(text.contains("[output]\nA1 a -> a\nA1 b -> b\nB2 a -> a\nB2 b -> b\n"));
}

#[test]
fn builtins_are_fixed_points() {
    for name in BUILTIN_NAMES {
        let m: Machine = builtin(name).unwrap();
        let once = serialize_machine(&m);
        let twice = serialize_machine(&parse_machine_text::<f64>(&once).unwrap());
        assert_eq!(once, twice, "{name}");
    }
}

#[test]
fn identity_machine_is_a_fixed_point() {
    let m: Machine = parse_machine_text(MINIMAL).unwrap();
    let once = serialize_machine(&m);
    assert_eq!(
        once,
        serialize_machine(&parse_machine_text::<f64>(&once).unwrap())
    );
}

#[test]
fn hand_edited_amplitude_fails_validation() {
    let text = serialize_machine(&f1_qfst::<f64>()).replace("A1 <- s0 : 1/sqrt(3)", "A1 <- s0 : 2");
    let m: Machine = parse_machine_text(&text).unwrap();
    let report = validate_machine(&m);
    assert!(!report.ok);
    assert!(report.errors().any(|i| i.location == "symbol `^`"));
}

#[test]
fn duplicate_entry_names_second_line() {
    let text = "\
[machine]
name = dup
mode = quantum
input_alphabet = a
output_alphabet =
states = A1 B1
initial = A1

[unitary ^]
B1 <- A1 : 1/sqrt(2)
B1 <- A1 : 1/sqrt(2)
[unitary a]
[unitary $]
";
    let err = parse_machine_text::<f64>(text).unwrap_err();
    assert_eq!(err.line, 11);
    assert!(matches!(err.kind, ParseErrorKind::Duplicate(_)));
}

#[test]
fn error_kinds_and_positions() {
    let base = MINIMAL.replace("[unitary a]\n", "[unitary a]\nq <- q : 1\n");
    let cases: [(&str, &str, usize, usize); 6] = [
        ("q <- q : 1\n", "q <- zz : 1\n", 12, 6),
        ("q <- q : 1\n", "q <- q : 1 +\n", 12, 13),
        ("q <- q : 1\n", "q <- q : sqrt(0 - 1)\n", 12, 9),
        ("[unitary $]\n", "[unitary x]\n", 13, 10),
        ("initial = q\n", "initial = p\n", 8, 11),
        ("mode = quantum\n", "mode = quantum\nmode = quantum\n", 5, 1),
    ];
    for (from, to, line, column) in cases {
        let text = base.replacen(from, to, 1);
        let err = parse_machine_text::<f64>(&text).unwrap_err();
        assert_eq!((err.line, err.column), (line, column), "{to:?}: {err}");
    }
}

#[test]
fn missing_operation_is_reported() {
    let text = MINIMAL.replace("[unitary $]\n", "");
    let err = parse_machine_text::<f64>(&text).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::Missing(_)));
    assert!(err.line >= 1);
}

#[test]
fn kraus_group_needs_every_index() {
    let text = MINIMAL.replace(
        "[unitary $]\n",
        "[kraus $ outcome=continue elem=0]\nq <- q : 1\n[kraus $ outcome=accept elem=2]\n",
    );
    let err = parse_machine_text::<f64>(&text).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::Missing(_)), "{err}");
}

#[test]
fn stochastic_machines_reject_unitary_sections() {
    let text = MINIMAL.replace("mode = quantum", "mode = stochastic");
    let err = parse_machine_text::<f64>(&text).unwrap_err();
    assert_eq!(err.line, 10);
}

#[test]
fn auto_completion_matches_builder() {
    let text = "\
[machine]
name = split
mode = quantum
input_alphabet =
output_alphabet =
states = s A B
initial = s
accept = A
reject = B

[unitary ^]
complete = auto
A <- s : 1/sqrt(2)
B <- s : 1/sqrt(2)
[unitary $]
";
    let m: Machine = parse_machine_text(text).unwrap();
    assert!(validate_machine(&m).ok);
    let r = run(&m, "").unwrap();
    assert!((r.accept[""] - 0.5).abs() < 1e-12);
    assert!((r.reject - 0.5).abs() < 1e-12);
}

fn random_specs(count: usize, seed: u64) -> Vec<Machine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let params = RandomMachineParams {
                mode: if k % 4 == 3 {
                    Mode::Stochastic
                } else {
                    Mode::Quantum
                },
                ..Default::default()
            };
            random_machine(&mut rng, &params)
        })
        .collect()
}

#[test]
fn random_machines_round_trip() {
    for m in random_specs(100, 11) {
        assert!(validate_machine(&m).ok);
        let once = serialize_machine(&m);
        let parsed: Machine = parse_machine_text(&once).unwrap();
        assert!(parsed.approx_eq(&m, 1e-12), "{once}");
        assert_eq!(serialize_machine(&parsed), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn corruption_is_reported_on_its_line(seed in 0u64..40, line_pick in any::<prop::sample::Index>(), col_pick in any::<prop::sample::Index>()) {
        let text = if seed < 4 {
            serialize_machine(&builtin::<f64>(BUILTIN_NAMES[seed as usize % 2]).unwrap())
        } else {
            serialize_machine(&random_specs(1, seed)[0])
        };
        let lines: Vec<&str> = text.lines().collect();
        let candidates: Vec<usize> = (0..lines.len()).filter(|&k| !lines[k].trim().is_empty()).collect();
        let target = candidates[line_pick.index(candidates.len())];
        let line = lines[target];
        let at = col_pick.index(line.chars().count() + 1);
        let mut corrupted: String = line.chars().take(at).collect();
        corrupted.push('$');
        corrupted.extend(line.chars().skip(at));
        let mut out = lines.clone();
        out[target] = &corrupted;
        let err = parse_machine_text::<f64>(&out.join("\n")).unwrap_err();
        prop_assert_eq!(err.line, target + 1, "{:?} -> {}", corrupted, err);
    }
}
