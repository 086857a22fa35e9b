//! Machine definitions for one-way finite-state transducers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex;

use crate::amplitude::AmplitudeExpr;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const LEFT_MARKER: char = '^';
pub const RIGHT_MARKER: char = '$';

/// Symbols that can never be part of an alphabet.
pub const RESERVED_SYMBOLS: [char; 4] = [LEFT_MARKER, RIGHT_MARKER, '#', '_'];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Quantum,
    Stochastic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Quantum => "quantum",
            Mode::Stochastic => "stochastic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the register shows after a transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Accept,
    Reject,
    Continue,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Accept => "accept",
            Outcome::Reject => "reject",
            Outcome::Continue => "continue",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "accept" => Some(Outcome::Accept),
            "reject" => Some(Outcome::Reject),
            "continue" => Some(Outcome::Continue),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Source expressions of a matrix, keyed by `(target, source)`.
pub type ExprMap = BTreeMap<(usize, usize), AmplitudeExpr>;

/// One matrix of a per-symbol operation, tagged with its register outcome.
#[derive(Clone, Debug)]
pub struct OperationElement<T> {
    pub matrix: Matrix<T>,
    pub outcome: Outcome,
    /// Defining expressions for entries, keyed `(target, source)`. Entries
    /// without one are rendered as decimals on export.
    pub exprs: ExprMap,
}

impl<T: Scalar> OperationElement<T> {
    pub fn new(matrix: Matrix<T>, outcome: Outcome) -> Self {
        Self {
            matrix,
            outcome,
            exprs: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperationSet<T> {
    pub elements: Vec<OperationElement<T>>,
}

impl<T: Scalar> OperationSet<T> {
    pub fn new(elements: Vec<OperationElement<T>>) -> Self {
        Self { elements }
    }

    /// `Σ Mᵢ† Mᵢ`.
    pub fn effect(&self, dim: usize) -> Matrix<T> {
        self.elements
            .iter()
            .fold(Matrix::zeros(dim), |acc, e| &acc + &e.matrix.gram())
    }

    /// Entrywise sum of all elements.
    pub fn total(&self, dim: usize) -> Matrix<T> {
        self.elements
            .iter()
            .fold(Matrix::zeros(dim), |acc, e| &acc + &e.matrix)
    }

    /// Multiplies every element by `phase`.
    pub fn with_phase(&self, phase: Complex<T>) -> Self {
        Self {
            elements: self
                .elements
                .iter()
                .map(|e| OperationElement::new(e.matrix.scale(phase), e.outcome))
                .collect(),
        }
    }
}

/// Full definition of a quantum or stochastic one-way transducer.
///
/// States are referred to by index into `states`. Emission strings are keyed
/// by the source state of a transition and default to the empty string.
#[derive(Clone, Debug)]
pub struct MachineSpec<T> {
    pub name: String,
    pub mode: Mode,
    pub states: Vec<String>,
    pub initial: usize,
    pub input_alphabet: Vec<char>,
    pub output_alphabet: Vec<char>,
    pub accept: BTreeSet<usize>,
    pub reject: BTreeSet<usize>,
    pub operations: BTreeMap<char, OperationSet<T>>,
    pub emissions: BTreeMap<(usize, char), String>,
}

impl<T: Scalar> MachineSpec<T> {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// `^`, the input alphabet in declaration order, then `$`.
    pub fn tape_symbols(&self) -> Vec<char> {
        std::iter::once(LEFT_MARKER)
            .chain(self.input_alphabet.iter().copied())
            .chain(std::iter::once(RIGHT_MARKER))
            .collect()
    }

    pub fn emission(&self, state: usize, symbol: char) -> &str {
        self.emissions
            .get(&(state, symbol))
            .map(String::as_str)
            .unwrap_or("")
    }

    pub fn outcome_of(&self, state: usize) -> Outcome {
        if self.accept.contains(&state) {
            Outcome::Accept
        } else if self.reject.contains(&state) {
            Outcome::Reject
        } else {
            Outcome::Continue
        }
    }

    /// Same machine with states relabeled: old state `k` becomes `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim());
        let mut states = vec![String::new(); self.dim()];
        for (old, name) in self.states.iter().enumerate() {
            states[perm[old]] = name.clone();
        }
        let operations = self
            .operations
            .iter()
            .map(|(sym, set)| {
                let elements = set
                    .elements
                    .iter()
                    .map(|e| OperationElement {
                        matrix: e.matrix.permute(perm),
                        outcome: e.outcome,
                        exprs: e
                            .exprs
                            .iter()
                            .map(|(&(t, s), x)| ((perm[t], perm[s]), x.clone()))
                            .collect(),
                    })
                    .collect();
                (*sym, OperationSet::new(elements))
            })
            .collect();
        Self {
            name: self.name.clone(),
            mode: self.mode,
            states,
            initial: perm[self.initial],
            input_alphabet: self.input_alphabet.clone(),
            output_alphabet: self.output_alphabet.clone(),
            accept: self.accept.iter().map(|&s| perm[s]).collect(),
            reject: self.reject.iter().map(|&s| perm[s]).collect(),
            operations,
            emissions: self
                .emissions
                .iter()
                .map(|(&(s, c), v)| ((perm[s], c), v.clone()))
                .collect(),
        }
    }

    /// Structural equality with matrices compared entrywise within `tol`.
    /// Defining expressions are ignored.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        let same_ops = self.operations.len() == other.operations.len()
            && self
                .operations
                .iter()
                .zip(&other.operations)
                .all(|((sa, a), (sb, b))| {
                    sa == sb
                        && a.elements.len() == b.elements.len()
                        && a.elements.iter().zip(&b.elements).all(|(x, y)| {
                            x.outcome == y.outcome
                                && x.matrix.dim() == y.matrix.dim()
                                && x.matrix.max_abs_diff(&y.matrix) <= tol
                        })
                });
        let nonempty = |m: &BTreeMap<(usize, char), String>| {
            m.iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (*k, v.clone()))
                .collect::<BTreeMap<_, _>>()
        };
        same_ops
            && self.name == other.name
            && self.mode == other.mode
            && self.states == other.states
            && self.initial == other.initial
            && self.input_alphabet == other.input_alphabet
            && self.output_alphabet == other.output_alphabet
            && self.accept == other.accept
            && self.reject == other.reject
            && nonempty(&self.emissions) == nonempty(&other.emissions)
    }
}
