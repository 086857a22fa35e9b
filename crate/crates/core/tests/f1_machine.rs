mod common;

use std::collections::BTreeMap;

use num_complex::Complex;
use qfst::machines::{build_f1_qfst, build_f1_stochastic_analog, BuildError};
use qfst::*;

use common::{close, f1_path_oracle};

const TOL: f64 = 1e-9;

fn f1() -> Machine {
    f1_qfst()
}

fn analog() -> Machine {
    f1_stochastic_analog()
}

fn idx(m: &Machine, name: &str) -> usize {
    m.state_index(name).unwrap()
}

fn assert_run(r: &Run, accept: &[(&str, f64)], reject: f64) {
    let want: BTreeMap<String, f64> = accept.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    assert_eq!(
        r.accept.keys().collect::<Vec<_>>(),
        want.keys().collect::<Vec<_>>(),
        "accept outputs of {r:?}"
    );
    for (k, v) in &want {
        assert!(
            close(r.accept[k], *v, TOL),
            "accept[{k}] = {} want {v}",
            r.accept[k]
        );
    }
    assert!(
        close(r.reject, reject, TOL),
        "reject = {} want {reject}",
        r.reject
    );
    assert!(close(r.unresolved, 0.0, TOL));
}

#[test]
fn builtins_validate() {
    assert!(validate_machine(&f1()).ok);
    assert!(validate_machine(&analog()).ok);
    assert_eq!(f1().states.len(), 12);
}

#[test]
fn every_builder_unitary_is_tight() {
    let m = f1();
    for (sym, set) in &m.operations {
        let u = set.total(m.dim());
        assert!(u.unitarity_residual() <= 1e-12, "symbol {sym}");
    }
}

#[test]
fn abstract_alphabet_variant() {
    let m: Machine = build_f1_qfst(&['0', '1'], '2').unwrap();
    let r = run(&m, "01201").unwrap();
    assert_run(&r, &[("01", 2.0 / 3.0)], 1.0 / 3.0);
}

#[test]
fn separator_collision_is_rejected() {
    assert_eq!(
        build_f1_qfst::<f64>(&['a', 'b'], 'a').unwrap_err(),
        BuildError::SeparatorCollision('a')
    );
    assert_eq!(
        build_f1_qfst::<f64>(&[], 'c').unwrap_err(),
        BuildError::NoLetters
    );
    assert!(build_f1_stochastic_analog::<f64>(&['a', '$'], 'c').is_err());
}

#[test]
fn initial_superposition_is_start_state() {
    let m = f1();
    let sup = initial_superposition(&m);
    assert_eq!(sup.len(), 1);
    assert_eq!(
        sup.get(&Configuration::new(idx(&m, "s0"), "")),
        Some(Complex::new(1.0, 0.0))
    );
    assert_eq!(sup.total_mass::<f64>(), 1.0);
}

#[test]
fn left_marker_splits_three_ways() {
    let m = f1();
    let (sup, ev) = step(&m, &initial_superposition(&m), '^').unwrap();
    let s = 1.0 / 3f64.sqrt();
    assert_eq!(sup.len(), 2);
    for name in ["A1", "A2"] {
        let a = sup.get(&Configuration::new(idx(&m, name), "")).unwrap();
        assert!((a - Complex::new(s, 0.0)).norm() < 1e-12);
    }
    assert!(close(ev.reject, 1.0 / 3.0, TOL));
    assert!(ev.accept.is_empty());
}

#[test]
fn right_marker_interferes() {
    let m = f1();
    let s = 1.0 / 3f64.sqrt();
    let sup = Superposition::from_entries([
        (Configuration::new(idx(&m, "B1"), "a"), Complex::new(s, 0.0)),
        (Configuration::new(idx(&m, "B2"), "a"), Complex::new(s, 0.0)),
    ]);
    let (next, ev) = step(&m, &sup, '$').unwrap();
    assert!(next.is_empty());
    assert_eq!(ev.accept.len(), 1);
    assert!(close(ev.accept["a"], 2.0 / 3.0, TOL));
    assert_eq!(ev.reject, 0.0, "the reject amplitude cancels exactly");
}

#[test]
fn unknown_symbol_step_fails() {
    let m = f1();
    assert_eq!(
        step(&m, &initial_superposition(&m), 'z').unwrap_err(),
        SimError::UnknownSymbol('z')
    );
}

#[test]
fn invalid_machine_cannot_step() {
    let mut m = f1();
    m.operations.remove(&'a');
    assert!(matches!(
        step(&m, &initial_superposition(&m), '^'),
        Err(SimError::Invalid(_))
    ));
}

#[test]
fn run_examples() {
    let m = f1();
    assert_run(&run(&m, "abcab").unwrap(), &[("ab", 2.0 / 3.0)], 1.0 / 3.0);
    assert_run(&run(&m, "c").unwrap(), &[("", 2.0 / 3.0)], 1.0 / 3.0);
    assert_run(&run(&m, "bcb").unwrap(), &[("b", 2.0 / 3.0)], 1.0 / 3.0);
    assert_run(
        &run(&m, "acb").unwrap(),
        &[("a", 1.0 / 6.0), ("b", 1.0 / 6.0)],
        2.0 / 3.0,
    );
    assert_run(&run(&m, "ab").unwrap(), &[], 1.0);
    assert_run(&run(&m, "cc").unwrap(), &[], 1.0);
}

#[test]
fn run_matches_hand_propagation() {
    let m = f1();
    for x in common::words_over(&['a', 'b', 'c'], 5) {
        let r = run(&m, &x).unwrap();
        let (acc, rej) = f1_path_oracle(&x);
        assert_eq!(
            r.accept.keys().collect::<Vec<_>>(),
            acc.keys().collect::<Vec<_>>(),
            "{x}"
        );
        for (k, v) in acc {
            assert!(close(r.accept[&k], v, TOL), "{x}");
        }
        assert!(close(r.reject, rej, TOL), "{x}");
    }
}

#[test]
fn illegal_input_names_position() {
    let err = run(&f1(), "ab$c").unwrap_err();
    assert_eq!(
        err,
        SimError::IllegalInput {
            position: 2,
            symbol: '$'
        }
    );
}

#[test]
fn stochastic_examples() {
    let m = analog();
    assert_run(
        &run_stochastic(&m, "abcab").unwrap(),
        &[("ab", 1.0 / 3.0)],
        2.0 / 3.0,
    );
    assert_run(
        &run_stochastic(&m, "c").unwrap(),
        &[("", 1.0 / 3.0)],
        2.0 / 3.0,
    );
    assert_run(
        &run_stochastic(&m, "acb").unwrap(),
        &[("a", 1.0 / 6.0), ("b", 1.0 / 6.0)],
        2.0 / 3.0,
    );
}

#[test]
fn modes_do_not_mix() {
    assert!(matches!(
        run(&analog(), "c"),
        Err(SimError::ModeMismatch { .. })
    ));
    assert!(matches!(
        run_stochastic(&f1(), "c"),
        Err(SimError::ModeMismatch { .. })
    ));
}

#[test]
fn recognition_marginalizes() {
    let m = f1();
    let (a, r, u) = recognize(&m, "abcab").unwrap();
    assert!(close(a, 2.0 / 3.0, TOL) && close(r, 1.0 / 3.0, TOL) && u == 0.0);
    let (a, r, _) = recognize(&m, "acb").unwrap();
    assert!(close(a, 1.0 / 3.0, TOL) && close(r, 2.0 / 3.0, TOL));
    let (a, r, u) = recognize(&m, "").unwrap();
    assert_eq!((a, u), (0.0, 0.0));
    assert!(close(r, 1.0, TOL));
}

#[test]
fn doubled_row_breaks_completeness_by_three() {
    let mut m = f1();
    let a1 = idx(&m, "A1");
    let set = m.operations.get_mut(&'a').unwrap();
    let elem = set
        .elements
        .iter_mut()
        .find(|e| e.outcome == Outcome::Continue)
        .unwrap();
    for s in 0..12 {
        elem.matrix[(a1, s)] *= 2.0;
    }
    let report = validate_machine(&m);
    assert!(!report.ok);
    let issue = report.errors().next().unwrap();
    assert_eq!(issue.location, "symbol `a`");
    assert!((issue.residual.unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn decompose_examples() {
    let none = Default::default();
    let id = Matrix::identity(3);
    let set = decompose_unitary(&id, &none, &none).unwrap();
    assert_eq!(set.elements.len(), 1);
    assert_eq!(set.elements[0].outcome, Outcome::Continue);
    assert_eq!(set.elements[0].matrix, id);

    let acc = [1usize].into();
    let set = decompose_unitary(&id, &acc, &none).unwrap();
    assert_eq!(
        set.elements.iter().map(|e| e.outcome).collect::<Vec<_>>(),
        vec![Outcome::Accept, Outcome::Continue]
    );
    let mut proj = Matrix::zeros(3);
    proj[(1, 1)] = Complex::new(1.0, 0.0);
    assert_eq!(set.elements[0].matrix, proj);
    assert_eq!(
        set.elements[1].matrix,
        &id + &proj.scale(Complex::new(-1.0, 0.0))
    );

    let m = f1();
    let u = m.operations[&'$'].total(12);
    let set = decompose_unitary(&u, &m.accept, &m.reject).unwrap();
    assert_eq!(set.elements.len(), 3);
    assert!(set.effect(12).max_abs_diff(&Matrix::identity(12)) <= 1e-12);

    let mut bad = Matrix::identity(2);
    bad[(0, 0)] = Complex::new(2.0, 0.0);
    let err = decompose_unitary(&bad, &none, &none).unwrap_err();
    assert!((err.residual - 3.0).abs() < 1e-12);
}

#[test]
fn identity_machine_is_inert() {
    let m = parse_machine_text::<f64>(
        "[machine]\nname = id\nmode = quantum\ninput_alphabet = a\noutput_alphabet =\nstates = q\ninitial = q\n\
         [unitary ^]\n[unitary a]\n[unitary $]\n",
    )
    .unwrap();
    assert!(validate_machine(&m).ok);
    let sup = Superposition::from_entries([(Configuration::new(0, ""), Complex::new(0.6, 0.8))]);
    let (next, ev) = step(&m, &sup, 'a').unwrap();
    assert_eq!(next, sup);
    assert!(ev.is_empty());
    let r = run(&m, "aaa").unwrap();
    assert_eq!(r.unresolved, 1.0);
}

#[test]
fn permutation_machine_is_deterministic_in_stochastic_mode() {
    let text = "\
[machine]
name = flip
mode = stochastic
input_alphabet = a
output_alphabet = x
states = p q yes
initial = p
accept = yes

[kraus ^ outcome=continue elem=0]
p <- p : 1
q <- q : 1
yes <- yes : 1

[kraus a outcome=continue elem=0]
q <- p : 1
p <- q : 1
yes <- yes : 1

[kraus $ outcome=continue elem=0]
p <- p : 1

[kraus $ outcome=accept elem=1]
yes <- q : 1
yes <- yes : 1

[output]
p a -> x
";
    let m = parse_machine_text::<f64>(text).unwrap();
    assert!(validate_machine(&m).ok, "{}", validate_machine(&m));
    let r = run_stochastic(&m, "aaa").unwrap();
    assert_eq!(r.accept, BTreeMap::from([("xx".to_string(), 1.0)]));
    assert_eq!((r.reject, r.unresolved), (0.0, 0.0));
}

#[test]
fn single_precision_f1() {
    let m: MachineSpec<f32> = f1_qfst();
    let r = run(&m, "abcab").unwrap();
    assert!((r.accept["ab"] - 2.0 / 3.0).abs() < 1e-5);
    assert!((r.reject - 1.0 / 3.0).abs() < 1e-5);
}

#[test]
fn json_shape() {
    let r = run(&f1(), "abcab").unwrap();
    assert_eq!(
        r.to_json().to_string(),
        r#"{"input":"abcab","accept":{"ab":0.666666666667},"reject":0.333333333333,"unresolved":0.0}"#
    );
}
