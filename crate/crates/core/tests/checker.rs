mod common;

use qfst::*;

fn opts(max_len: usize) -> CheckOptions<f64> {
    CheckOptions {
        threads: Some(1),
        ..CheckOptions::new(max_len)
    }
}

#[test]
fn oracle_examples() {
    assert_eq!(f1_oracle("abcab"), Expected::Defined("ab".into()));
    assert_eq!(f1_oracle("c"), Expected::Defined(String::new()));
    assert_eq!(f1_oracle("abab"), Expected::Undefined);
    assert_eq!(f1_oracle("acbca"), Expected::Undefined);
    assert_eq!(f1_oracle(""), Expected::Undefined);
}

#[test]
fn f1_passes_up_to_seven() {
    let report = exhaustive_check(&f1_qfst::<f64>(), &F1Oracle::default(), &opts(7)).unwrap();
    assert_eq!(report.checked_inputs, 3280);
    assert!(report.passed());
    assert!((report.min_accept_on_defined.unwrap() - 2.0 / 3.0).abs() < 1e-9);
    assert!((report.min_reject_on_undefined.unwrap() - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn empty_input_only() {
    let report = exhaustive_check(&f1_qfst::<f64>(), &F1Oracle::default(), &opts(0)).unwrap();
    assert_eq!(report.checked_inputs, 1);
    assert_eq!(report.defined_inputs, 0);
    assert_eq!(report.min_accept_on_defined, None);
    assert!((report.min_reject_on_undefined.unwrap() - 1.0).abs() < 1e-9);
    assert!(report.passed());
}

#[test]
fn classical_analog_fails_on_defined_inputs() {
    let report = exhaustive_check(
        &f1_stochastic_analog::<f64>(),
        &F1Oracle::default(),
        &opts(3),
    )
    .unwrap();
    let inputs: Vec<&str> = report.violations.iter().map(|v| v.input.as_str()).collect();
    assert_eq!(inputs, vec!["c", "aca", "bcb"]);
    assert!(report
        .violations
        .iter()
        .all(|v| matches!(v.expected, Expected::Defined(_))));
    assert!((report.min_accept_on_defined.unwrap() - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn alphabet_mismatch() {
    let oracle = F1Oracle {
        letters: vec!['0', '1'],
        separator: '2',
    };
    assert!(matches!(
        exhaustive_check(&f1_qfst::<f64>(), &oracle, &opts(2)),
        Err(CheckError::AlphabetMismatch { .. })
    ));
}

#[test]
fn worker_count_does_not_change_the_report() {
    let m = f1_stochastic_analog::<f64>();
    let one = exhaustive_check(&m, &F1Oracle::default(), &opts(5)).unwrap();
    let many = exhaustive_check(
        &m,
        &F1Oracle::default(),
        &CheckOptions {
            threads: Some(4),
            ..CheckOptions::new(5)
        },
    )
    .unwrap();
    assert_eq!(one, many);
}

#[test]
fn report_json_is_capped() {
    let report = exhaustive_check(
        &f1_stochastic_analog::<f64>(),
        &F1Oracle::default(),
        &opts(5),
    )
    .unwrap();
    let json = report.to_json(2);
    assert_eq!(json["total_violations"], report.violations.len());
    assert_eq!(json["violations"].as_array().unwrap().len(), 2);
    assert_eq!(json["violations"][0]["input"], "c");
    assert_eq!(json["violations"][0]["expected"]["defined"], "");
    assert_eq!(json["min_accept_on_defined"], 0.333333333333);
}

#[test]
fn word_enumeration_order() {
    let words = qfst::machines::all_words(&['a', 'b'], 2);
    assert_eq!(words, vec!["", "a", "b", "aa", "ab", "ba", "bb"]);
}
