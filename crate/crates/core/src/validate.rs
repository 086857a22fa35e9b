//! Structural and numerical checks on machine definitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::amplitude::AmplitudeExpr;
use crate::matrix::Matrix;
use crate::model::{MachineSpec, Mode, OperationElement, OperationSet, Outcome, RESERVED_SYMBOLS};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    pub location: String,
    pub message: String,
    pub residual: Option<f64>,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}: {}: {}", self.location, self.message)?;
        if let Some(r) = self.residual {
            write!(f, " (residual {r:.3e})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn push(
        &mut self,
        severity: Severity,
        location: impl Into<String>,
        message: impl Into<String>,
        residual: Option<f64>,
    ) {
        self.issues.push(Issue {
            severity,
            location: location.into(),
            message: message.into(),
            residual,
        });
    }

    fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, location, message, None);
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

fn symbol_location(symbol: char) -> String {
    format!("symbol `{symbol}`")
}

fn check_alphabet(report: &mut ValidationReport, which: &str, alphabet: &[char]) {
    let mut seen = BTreeSet::new();
    for &c in alphabet {
        if RESERVED_SYMBOLS.contains(&c) || c.is_whitespace() || c.is_control() {
            report.error(
                which,
                format!("`{c}` is reserved and cannot be an alphabet symbol"),
            );
        }
        if !seen.insert(c) {
            report.error(which, format!("duplicate symbol `{c}`"));
        }
    }
}

/// Checks every invariant of a machine definition. Problems are collected
/// into the report rather than returned as errors.
pub fn validate_machine<T: Scalar>(spec: &MachineSpec<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = spec.dim();
    let tol = T::validation_tol();

    if n == 0 {
        report.error("states", "machine has no states");
    }
    let mut names = BTreeSet::new();
    for s in &spec.states {
        if !names.insert(s) {
            report.error("states", format!("duplicate state `{s}`"));
        }
    }
    if spec.initial >= n {
        report.error(
            "initial",
            format!("initial state index {} out of range", spec.initial),
        );
    }
    for (which, set) in [("accept", &spec.accept), ("reject", &spec.reject)] {
        for &s in set {
            if s >= n {
                report.error(which, format!("state index {s} out of range"));
            }
        }
    }
    for s in spec.accept.intersection(&spec.reject) {
        let name = spec.states.get(*s).map(String::as_str).unwrap_or("?");
        report.error(
            "partition",
            format!("state `{name}` is both accepting and rejecting"),
        );
    }
    check_alphabet(&mut report, "input_alphabet", &spec.input_alphabet);
    check_alphabet(&mut report, "output_alphabet", &spec.output_alphabet);

    let tape: Vec<char> = spec.tape_symbols();
    for sym in &tape {
        if !spec.operations.contains_key(sym) {
            report.error(symbol_location(*sym), "no operation defined");
        }
    }
    for sym in spec.operations.keys() {
        if !tape.contains(sym) {
            report.error(
                symbol_location(*sym),
                "operation for a symbol outside the tape alphabet",
            );
        }
    }

    for (&(state, sym), out) in &spec.emissions {
        let loc = format!("emission ({state}, `{sym}`)");
        if state >= n {
            report.error(&loc, "state index out of range");
        }
        if !tape.contains(&sym) {
            report.error(&loc, "symbol outside the tape alphabet");
        }
        if let Some(bad) = out.chars().find(|c| !spec.output_alphabet.contains(c)) {
            report.error(&loc, format!("`{bad}` is not in the output alphabet"));
        }
    }

    for (&sym, set) in &spec.operations {
        let loc = symbol_location(sym);
        if set.elements.is_empty() {
            report.error(&loc, "operation has no elements");
            continue;
        }
        if set.elements.iter().any(|e| e.matrix.dim() != n) {
            report.error(
                &loc,
                format!("element dimension differs from state count {n}"),
            );
            continue;
        }
        for (k, e) in set.elements.iter().enumerate() {
            if e.matrix.is_zero() {
                report.push(
                    Severity::Warning,
                    format!("{loc} element {k}"),
                    "all-zero element",
                    None,
                );
            }
        }
        match spec.mode {
            Mode::Quantum => {
                let continues = set
                    .elements
                    .iter()
                    .filter(|e| e.outcome == Outcome::Continue)
                    .count();
                if continues > 1 {
                    report.error(
                        &loc,
                        "more than one continue element; the surviving state would be mixed",
                    );
                }
                let residual = set.effect(n).max_abs_diff(&Matrix::identity(n));
                if residual.is_nan() || residual > tol {
                    report.push(
                        Severity::Error,
                        &loc,
                        "completeness violated: sum of M†M differs from identity",
                        Some(residual.to_f64_lossy()),
                    );
                }
            }
            Mode::Stochastic => {
                for (k, e) in set.elements.iter().enumerate() {
                    for t in 0..n {
                        for s in 0..n {
                            let v = e.matrix[(t, s)];
                            if v.im.abs() > tol || v.re < -tol {
                                report.error(
                                    format!("{loc} element {k}"),
                                    format!(
                                        "entry [{}, {}] is not a nonnegative real",
                                        spec.states[t], spec.states[s]
                                    ),
                                );
                            }
                        }
                    }
                }
                let total = set.total(n);
                let residual = (0..n)
                    .map(|s| {
                        let sum: T = (0..n).map(|t| total[(t, s)].re).sum();
                        (sum - T::one()).abs()
                    })
                    .fold(T::zero(), T::max);
                if residual.is_nan() || residual > tol {
                    report.push(
                        Severity::Error,
                        &loc,
                        "column sums differ from 1",
                        Some(residual.to_f64_lossy()),
                    );
                }
            }
        }
    }

    report.ok = !report.issues.iter().any(|i| i.severity == Severity::Error);
    report
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("matrix is not unitary (residual {residual:.3e})")]
pub struct NotUnitary {
    pub residual: f64,
}

/// Splits `u` into `P_acc·U`, `P_rej·U`, `P_non·U` (in that order), dropping
/// all-zero pieces. No unitarity check; stochastic machines use this too.
pub fn split_by_partition<T: Scalar>(
    u: &Matrix<T>,
    exprs: &BTreeMap<(usize, usize), AmplitudeExpr>,
    accept: &BTreeSet<usize>,
    reject: &BTreeSet<usize>,
) -> OperationSet<T> {
    let pieces = [
        (Outcome::Accept, u.restrict_rows(|r| accept.contains(&r))),
        (Outcome::Reject, u.restrict_rows(|r| reject.contains(&r))),
        (
            Outcome::Continue,
            u.restrict_rows(|r| !accept.contains(&r) && !reject.contains(&r)),
        ),
    ];
    let elements = pieces
        .into_iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(outcome, matrix)| {
            let exprs = exprs
                .iter()
                .filter(|(&(t, s), _)| !matrix[(t, s)].is_zero())
                .map(|(k, v)| (*k, v.clone()))
                .collect();
            OperationElement {
                matrix,
                outcome,
                exprs,
            }
        })
        .collect();
    OperationSet::new(elements)
}

/// Measure-after-step decomposition of a unitary transition.
pub fn decompose_unitary<T: Scalar>(
    u: &Matrix<T>,
    accept: &BTreeSet<usize>,
    reject: &BTreeSet<usize>,
) -> Result<OperationSet<T>, NotUnitary> {
    decompose_annotated(u, &BTreeMap::new(), accept, reject)
}

pub(crate) fn decompose_annotated<T: Scalar>(
    u: &Matrix<T>,
    exprs: &BTreeMap<(usize, usize), AmplitudeExpr>,
    accept: &BTreeSet<usize>,
    reject: &BTreeSet<usize>,
) -> Result<OperationSet<T>, NotUnitary> {
    let residual = u.unitarity_residual();
    if residual.is_nan() || residual > T::validation_tol() {
        return Err(NotUnitary {
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(split_by_partition(u, exprs, accept, reject))
}

/// True when `set` is exactly the partition split of its own sum, i.e. it
/// can be written back as a single transition matrix.
pub(crate) fn is_partition_split<T: Scalar>(
    set: &OperationSet<T>,
    dim: usize,
    accept: &BTreeSet<usize>,
    reject: &BTreeSet<usize>,
) -> bool {
    let resplit = split_by_partition(&set.total(dim), &BTreeMap::new(), accept, reject);
    resplit.elements.len() == set.elements.len()
        && resplit
            .elements
            .iter()
            .zip(&set.elements)
            .all(|(a, b)| a.outcome == b.outcome && a.matrix == b.matrix)
}
