//! The three-path interference transducer for `x = w c w ↦ w`, its
//! classical counterpart, the reference function, and the exhaustive
//! bounded-error checker.
//!
//! State roles in the built-in machine:
//!
//! | state        | role                                                   |
//! |--------------|--------------------------------------------------------|
//! | `s0`         | start                                                  |
//! | `A1`, `A2`   | before the separator; `A1` copies letters to output    |
//! | `B1`, `B2`   | after the separator; `B2` copies letters to output     |
//! | `R`          | the third branch, rejecting right after the split      |
//! | `qacc`/`qrej`| targets of the final two-way Fourier transform         |
//! | `rA`, `rB`   | no separator seen before `$`                           |
//! | `rC`, `rD`   | a second separator                                     |
//!
//! Every reject sink is distinct so rejected branches never interfere.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::AmplitudeExpr;
use crate::model::{MachineSpec, Mode, OperationSet, LEFT_MARKER, RESERVED_SYMBOLS, RIGHT_MARKER};
use crate::scalar::Scalar;
use crate::simulator::{round_sig, RunResult, SimError, Simulator};
use crate::transition::{assemble, Completion, Entries};
use crate::validate::{
    decompose_annotated, split_by_partition, validate_machine, ValidationReport,
};

pub const F1_STATES: [&str; 12] = [
    "s0", "A1", "A2", "B1", "B2", "R", "qacc", "qrej", "rA", "rB", "rC", "rD",
];

pub const DEFAULT_LETTERS: [char; 2] = ['a', 'b'];
pub const DEFAULT_SEPARATOR: char = 'c';

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BuildError {
    #[error("separator `{0}` is also a letter")]
    SeparatorCollision(char),
    #[error("letter alphabet is empty")]
    NoLetters,
    #[error("`{0}` cannot be used as a tape symbol")]
    ReservedSymbol(char),
    #[error("duplicate letter `{0}`")]
    DuplicateLetter(char),
    #[error("constructed machine is invalid:\n{0}")]
    Invalid(ValidationReport),
}

fn check_letters(letters: &[char], separator: char) -> Result<(), BuildError> {
    if letters.is_empty() {
        return Err(BuildError::NoLetters);
    }
    let mut seen = BTreeSet::new();
    for &c in letters.iter().chain(std::iter::once(&separator)) {
        if RESERVED_SYMBOLS.contains(&c) || c.is_whitespace() || c.is_control() {
            return Err(BuildError::ReservedSymbol(c));
        }
        if c != separator && !seen.insert(c) {
            return Err(BuildError::DuplicateLetter(c));
        }
    }
    if letters.contains(&separator) {
        return Err(BuildError::SeparatorCollision(separator));
    }
    Ok(())
}

struct Topology {
    letters: Vec<char>,
    separator: char,
    accept: BTreeSet<usize>,
    reject: BTreeSet<usize>,
}

impl Topology {
    fn new(letters: &[char], separator: char) -> Result<Self, BuildError> {
        check_letters(letters, separator)?;
        let idx = |name: &str| F1_STATES.iter().position(|s| *s == name).unwrap();
        Ok(Self {
            letters: letters.to_vec(),
            separator,
            accept: [idx("qacc")].into(),
            reject: ["R", "qrej", "rA", "rB", "rC", "rD"].map(idx).into(),
        })
    }

    fn entries<T: Scalar>(rules: &[(&str, &str, &str)]) -> Entries<T> {
        let idx = |name: &str| F1_STATES.iter().position(|s| *s == name).unwrap();
        rules
            .iter()
            .map(|&(target, source, amp)| {
                let expr = AmplitudeExpr::parse(amp).expect("builder amplitude parses");
                let value = expr.eval().expect("builder amplitude evaluates");
                ((idx(target), idx(source)), (value, expr))
            })
            .collect()
    }

    /// `(symbol, target <- source : amplitude)` tables shared by both modes.
    fn letter_rules() -> Vec<(&'static str, &'static str, &'static str)> {
        vec![
            ("A1", "A1", "1"),
            ("A2", "A2", "1"),
            ("B1", "B1", "1"),
            ("B2", "B2", "1"),
        ]
    }

    fn separator_rules() -> Vec<(&'static str, &'static str, &'static str)> {
        vec![
            ("B1", "A1", "1"),
            ("B2", "A2", "1"),
            ("rC", "B1", "1"),
            ("rD", "B2", "1"),
        ]
    }

    fn emissions(&self) -> BTreeMap<(usize, char), String> {
        let a1 = 1;
        let b2 = 4;
        self.letters
            .iter()
            .flat_map(|&c| [((a1, c), c.to_string()), ((b2, c), c.to_string())])
            .collect()
    }

    fn spec<T: Scalar>(
        &self,
        name: &str,
        mode: Mode,
        operations: BTreeMap<char, OperationSet<T>>,
    ) -> Result<MachineSpec<T>, BuildError> {
        let mut input_alphabet = self.letters.clone();
        input_alphabet.push(self.separator);
        let spec = MachineSpec {
            name: name.to_string(),
            mode,
            states: F1_STATES.iter().map(|s| s.to_string()).collect(),
            initial: 0,
            input_alphabet,
            output_alphabet: self.letters.clone(),
            accept: self.accept.clone(),
            reject: self.reject.clone(),
            operations,
            emissions: self.emissions(),
        };
        let report = validate_machine(&spec);
        if report.ok {
            Ok(spec)
        } else {
            Err(BuildError::Invalid(report))
        }
    }
}

/// The quantum transducer over `letters` with the given separator.
///
/// `^` splits `s0` evenly into `A1`, `A2` and the rejecting `R`. Before the
/// separator `A1` copies each letter to the output; after it `B2` does. At
/// `$` the two surviving paths meet in a two-point Fourier transform onto
/// `qacc`/`qrej`, which cancels the reject amplitude exactly when both paths
/// wrote the same string. Unlisted columns are completed by Gram–Schmidt.
pub fn build_f1_qfst<T: Scalar>(
    letters: &[char],
    separator: char,
) -> Result<MachineSpec<T>, BuildError> {
    let topo = Topology::new(letters, separator)?;
    let n = F1_STATES.len();
    let unitary = |rules: &[(&str, &str, &str)]| -> OperationSet<T> {
        let (u, exprs) = assemble(n, &Topology::entries::<T>(rules), Completion::Auto)
            .expect("builder columns are orthonormal");
        decompose_annotated(&u, &exprs, &topo.accept, &topo.reject)
            .expect("completed matrix is unitary")
    };
    let mut ops = BTreeMap::new();
    ops.insert(
        LEFT_MARKER,
        unitary(&[
            ("A1", "s0", "1/sqrt(3)"),
            ("A2", "s0", "1/sqrt(3)"),
            ("R", "s0", "1/sqrt(3)"),
        ]),
    );
    let letter_op = unitary(&Topology::letter_rules());
    for &c in &topo.letters {
        ops.insert(c, letter_op.clone());
    }
    ops.insert(separator, unitary(&Topology::separator_rules()));
    ops.insert(
        RIGHT_MARKER,
        unitary(&[
            ("qacc", "B1", "1/sqrt(2)"),
            ("qrej", "B1", "1/sqrt(2)"),
            ("qacc", "B2", "1/sqrt(2)"),
            ("qrej", "B2", "-1/sqrt(2)"),
            ("rA", "A1", "1"),
            ("rB", "A2", "1"),
        ]),
    );
    topo.spec("f1", Mode::Quantum, ops)
}

/// Same topology with probabilities: 1/3 each at the split and a fair coin
/// between `qacc` and `qrej` for both paths at `$`. Unlisted columns stay
/// put.
pub fn build_f1_stochastic_analog<T: Scalar>(
    letters: &[char],
    separator: char,
) -> Result<MachineSpec<T>, BuildError> {
    let topo = Topology::new(letters, separator)?;
    let n = F1_STATES.len();
    let stochastic = |rules: &[(&str, &str, &str)]| -> OperationSet<T> {
        let (m, exprs) = assemble(n, &Topology::entries::<T>(rules), Completion::Identity)
            .expect("identity completion cannot fail");
        split_by_partition(&m, &exprs, &topo.accept, &topo.reject)
    };
    let mut ops = BTreeMap::new();
    ops.insert(
        LEFT_MARKER,
        stochastic(&[("A1", "s0", "1/3"), ("A2", "s0", "1/3"), ("R", "s0", "1/3")]),
    );
    let letter_op = stochastic(&Topology::letter_rules());
    for &c in &topo.letters {
        ops.insert(c, letter_op.clone());
    }
    ops.insert(separator, stochastic(&Topology::separator_rules()));
    ops.insert(
        RIGHT_MARKER,
        stochastic(&[
            ("qacc", "B1", "1/2"),
            ("qrej", "B1", "1/2"),
            ("qacc", "B2", "1/2"),
            ("qrej", "B2", "1/2"),
            ("rA", "A1", "1"),
            ("rB", "A2", "1"),
        ]),
    );
    topo.spec("f1-classical", Mode::Stochastic, ops)
}

pub fn f1_qfst<T: Scalar>() -> MachineSpec<T> {
    build_f1_qfst(&DEFAULT_LETTERS, DEFAULT_SEPARATOR).expect("default alphabet is valid")
}

pub fn f1_stochastic_analog<T: Scalar>() -> MachineSpec<T> {
    build_f1_stochastic_analog(&DEFAULT_LETTERS, DEFAULT_SEPARATOR)
        .expect("default alphabet is valid")
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["f1", "f1-classical"];

pub fn builtin<T: Scalar>(name: &str) -> Option<MachineSpec<T>> {
    match name {
        "f1" => Some(f1_qfst()),
        "f1-classical" => Some(f1_stochastic_analog()),
        _ => None,
    }
}

/// Value of a partial function on one input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Defined(String),
    Undefined,
}

/// Reference implementation of the partial function a machine should compute.
pub trait FunctionOracle: Sync {
    fn alphabet(&self) -> Vec<char>;
    fn evaluate(&self, input: &str) -> Expected;
}

/// `w c w ↦ w`, undefined elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F1Oracle {
    pub letters: Vec<char>,
    pub separator: char,
}

impl Default for F1Oracle {
    fn default() -> Self {
        Self {
            letters: DEFAULT_LETTERS.to_vec(),
            separator: DEFAULT_SEPARATOR,
        }
    }
}

impl FunctionOracle for F1Oracle {
    fn alphabet(&self) -> Vec<char> {
        let mut a = self.letters.clone();
        a.push(self.separator);
        a
    }

    fn evaluate(&self, input: &str) -> Expected {
        let mut parts = input.split(self.separator);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(left), Some(right), None) if left == right => Expected::Defined(left.to_string()),
            _ => Expected::Undefined,
        }
    }
}

pub fn f1_oracle(input: &str) -> Expected {
    F1Oracle::default().evaluate(input)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation<T> {
    pub input: String,
    pub expected: Expected,
    pub observed: RunResult<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedErrorReport<T> {
    pub checked_inputs: usize,
    pub defined_inputs: usize,
    pub threshold: T,
    /// `None` when no input in range was defined.
    pub min_accept_on_defined: Option<T>,
    pub min_reject_on_undefined: Option<T>,
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> BoundedErrorReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// JSON form with at most `limit` violations listed.
    pub fn to_json(&self, limit: usize) -> serde_json::Value {
        let p = |v: T| round_sig(v.to_f64_lossy(), 12);
        serde_json::json!({
            "checked_inputs": self.checked_inputs,
            "defined_inputs": self.defined_inputs,
            "threshold": p(self.threshold),
            "min_accept_on_defined": self.min_accept_on_defined.map(p),
            "min_reject_on_undefined": self.min_reject_on_undefined.map(p),
            "total_violations": self.violations.len(),
            "violations": self.violations.iter().take(limit).map(|v| serde_json::json!({
                "input": v.input,
                "expected": v.expected,
                "observed": v.observed.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CheckError {
    #[error("oracle alphabet {oracle:?} does not match machine input alphabet {machine:?}")]
    AlphabetMismatch {
        oracle: Vec<char>,
        machine: Vec<char>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions<T> {
    pub max_len: usize,
    pub threshold: T,
    /// Worker count; `None` uses every core.
    pub threads: Option<usize>,
}

impl<T: Scalar> CheckOptions<T> {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            threshold: T::from_f64_lossy(2.0) / T::from_f64_lossy(3.0),
            threads: None,
        }
    }
}

/// Every word of length `0..=max_len` over `alphabet`, shortest first, then
/// in alphabet order.
pub fn all_words(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |c| {
                    let mut next = w.clone();
                    next.push(*c);
                    next
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Runs every input up to `max_len` and checks the bounded-error condition:
/// accept mass on exactly the expected output (when defined) or reject mass
/// (when undefined) must reach `threshold` less the validation tolerance.
pub fn exhaustive_check<T: Scalar>(
    spec: &MachineSpec<T>,
    oracle: &dyn FunctionOracle,
    options: &CheckOptions<T>,
) -> Result<BoundedErrorReport<T>, CheckError> {
    let oracle_alphabet = oracle.alphabet();
    let same = oracle_alphabet.len() == spec.input_alphabet.len()
        && oracle_alphabet.iter().collect::<BTreeSet<_>>()
            == spec.input_alphabet.iter().collect::<BTreeSet<_>>();
    if !same {
        return Err(CheckError::AlphabetMismatch {
            oracle: oracle_alphabet,
            machine: spec.input_alphabet.clone(),
        });
    }
    let sim = Simulator::new(spec)?;
    let words = all_words(&spec.input_alphabet, options.max_len);
    let evaluate = |word: &String| -> Result<(Expected, RunResult<T>), SimError> {
        Ok((oracle.evaluate(word), sim.run_any(word)?))
    };
    let outcomes: Vec<_> = match options.threads {
        Some(1) => words.iter().map(evaluate).collect::<Result<_, _>>()?,
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CheckError::Pool(e.to_string()))?
            .install(|| words.par_iter().map(evaluate).collect::<Result<_, _>>())?,
        None => words.par_iter().map(evaluate).collect::<Result<_, _>>()?,
    };

    let floor = options.threshold - T::validation_tol();
    let mut report = BoundedErrorReport {
        checked_inputs: words.len(),
        defined_inputs: 0,
        threshold: options.threshold,
        min_accept_on_defined: None,
        min_reject_on_undefined: None,
        violations: Vec::new(),
    };
    let lower = |slot: &mut Option<T>, v: T| *slot = Some(slot.map_or(v, |m| m.min(v)));
    for (expected, observed) in outcomes {
        let score = match &expected {
            Expected::Defined(w) => {
                report.defined_inputs += 1;
                let p = observed.accept_on(w);
                lower(&mut report.min_accept_on_defined, p);
                p
            }
            Expected::Undefined => {
                lower(&mut report.min_reject_on_undefined, observed.reject);
                observed.reject
            }
        };
        if score.is_nan() || score < floor {
            report.violations.push(Violation {
                input: observed.input.clone(),
                expected,
                observed,
            });
        }
    }
    Ok(report)
}
