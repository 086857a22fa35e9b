//! Measure-many evolution of configuration ensembles.
//!
//! A configuration is a control state together with the output emitted so
//! far. Quantum runs accumulate complex amplitudes per configuration, so two
//! paths interfere exactly when they agree on both. Stochastic runs use the
//! same pipeline with nonnegative masses.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::model::{MachineSpec, Mode, Outcome, LEFT_MARKER, RIGHT_MARKER};
use crate::scalar::Scalar;
use crate::validate::{validate_machine, ValidationReport};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: usize,
    pub output: String,
}

impl Configuration {
    pub fn new(state: usize, output: impl Into<String>) -> Self {
        Self {
            state,
            output: output.into(),
        }
    }
}

/// What a configuration carries: a complex amplitude or a probability mass.
pub trait Weight<T: Scalar>: Copy + Debug + PartialEq + Send + Sync {
    const MODE: Mode;

    fn unit() -> Self;
    fn nothing() -> Self;
    fn plus(self, other: Self) -> Self;
    /// Contribution of `self` through a transition entry.
    fn through(self, entry: Complex<T>) -> Self;
    /// Size compared against the pruning threshold.
    fn magnitude(self) -> T;
    /// Probability represented by this weight.
    fn mass(self) -> T;
}

impl<T: Scalar> Weight<T> for Complex<T> {
    const MODE: Mode = Mode::Quantum;

    fn unit() -> Self {
        Complex::new(T::one(), T::zero())
    }
    fn nothing() -> Self {
        Complex::zero()
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn through(self, entry: Complex<T>) -> Self {
        entry * self
    }
    fn magnitude(self) -> T {
        self.norm()
    }
    fn mass(self) -> T {
        self.norm_sqr()
    }
}

impl<T: Scalar> Weight<T> for T {
    const MODE: Mode = Mode::Stochastic;

    fn unit() -> Self {
        T::one()
    }
    fn nothing() -> Self {
        T::zero()
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn through(self, entry: Complex<T>) -> Self {
        entry.re * self
    }
    fn magnitude(self) -> T {
        self.abs()
    }
    fn mass(self) -> T {
        self
    }
}

/// Finite map from configurations to weights, iterated in (state, output)
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<W> {
    entries: BTreeMap<Configuration, W>,
}

pub type Superposition<T> = Ensemble<Complex<T>>;
pub type Distribution<T> = Ensemble<T>;

impl<W> Default for Ensemble<W> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<W: Copy> Ensemble<W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Configuration, W)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, cfg: &Configuration) -> Option<W> {
        self.entries.get(cfg).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &W)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Squared norm (quantum) or total mass (stochastic).
    pub fn total_mass<T: Scalar>(&self) -> T
    where
        W: Weight<T>,
    {
        self.entries.values().map(|w| w.mass()).sum()
    }

    fn accumulate<T: Scalar>(&mut self, cfg: Configuration, w: W)
    where
        W: Weight<T>,
    {
        let slot = self.entries.entry(cfg).or_insert_with(W::nothing);
        *slot = slot.plus(w);
    }

    fn prune<T: Scalar>(&mut self)
    where
        W: Weight<T>,
    {
        let tol = T::prune_tol();
        self.entries
            .retain(|_, w| w.magnitude().is_nan() || w.magnitude() >= tol);
    }
}

/// Probability harvested by the register observation after one transition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepEvents<T> {
    pub accept: BTreeMap<String, T>,
    pub reject: T,
}

impl<T: Scalar> StepEvents<T> {
    pub fn total(&self) -> T {
        self.accept.values().copied().sum::<T>() + self.reject
    }

    pub fn is_empty(&self) -> bool {
        self.accept.is_empty() && self.reject.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult<T> {
    pub input: String,
    pub accept: BTreeMap<String, T>,
    pub reject: T,
    /// Non-halting mass left after the right marker.
    pub unresolved: T,
}

impl<T: Scalar> RunResult<T> {
    pub fn accept_total(&self) -> T {
        self.accept.values().copied().sum()
    }

    pub fn accept_on(&self, output: &str) -> T {
        self.accept.get(output).copied().unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.accept_total() + self.reject + self.unresolved
    }

    /// `(accept, reject, unresolved)` with accept marginalized over outputs.
    pub fn recognition(&self) -> (T, T, T) {
        (self.accept_total(), self.reject, self.unresolved)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Shape<'a> {
            input: &'a str,
            accept: BTreeMap<&'a str, f64>,
            reject: f64,
            unresolved: f64,
        }
        serde_json::to_value(Shape {
            input: &self.input,
            accept: self
                .accept
                .iter()
                .map(|(k, v)| (k.as_str(), round_sig(v.to_f64_lossy(), 12)))
                .collect(),
            reject: round_sig(self.reject.to_f64_lossy(), 12),
            unresolved: round_sig(self.unresolved.to_f64_lossy(), 12),
        })
        .expect("run result serializes")
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    // also folds -0.0 into 0.0
    if v == 0.0 || !v.is_finite() {
        return v + 0.0;
    }
    format!("{:.*e}", digits.saturating_sub(1), v)
        .parse()
        .expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("machine failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("operation requires a {expected} machine, got {actual}")]
    ModeMismatch { expected: Mode, actual: Mode },
    #[error("symbol `{0}` has no operation")]
    UnknownSymbol(char),
    #[error("illegal character `{symbol}` at position {position} of the input")]
    IllegalInput { position: usize, symbol: char },
}

/// Runs words through a machine that has passed validation.
#[derive(Clone, Copy, Debug)]
pub struct Simulator<'a, T> {
    spec: &'a MachineSpec<T>,
}

impl<'a, T: Scalar> Simulator<'a, T> {
    pub fn new(spec: &'a MachineSpec<T>) -> Result<Self, SimError> {
        let report = validate_machine(spec);
        if report.ok {
            Ok(Self { spec })
        } else {
            Err(SimError::Invalid(report))
        }
    }

    pub fn spec(&self) -> &'a MachineSpec<T> {
        self.spec
    }

    pub fn initial<W: Weight<T>>(&self) -> Ensemble<W> {
        Ensemble::from_entries([(Configuration::new(self.spec.initial, ""), W::unit())])
    }

    fn check_mode<W: Weight<T>>(&self) -> Result<(), SimError> {
        if W::MODE == self.spec.mode {
            Ok(())
        } else {
            Err(SimError::ModeMismatch {
                expected: W::MODE,
                actual: self.spec.mode,
            })
        }
    }

    /// Applies the operation for `symbol` and observes the register.
    pub fn step<W: Weight<T>>(
        &self,
        ensemble: &Ensemble<W>,
        symbol: char,
    ) -> Result<(Ensemble<W>, StepEvents<T>), SimError> {
        self.check_mode::<W>()?;
        let set = self
            .spec
            .operations
            .get(&symbol)
            .ok_or(SimError::UnknownSymbol(symbol))?;
        let n = self.spec.dim();

        let mut next = Ensemble::new();
        let mut events = StepEvents {
            accept: BTreeMap::new(),
            reject: T::zero(),
        };
        for element in &set.elements {
            let mut branch: Ensemble<W> = Ensemble::new();
            for (cfg, &w) in ensemble.iter() {
                let mut output = cfg.output.clone();
                output.push_str(self.spec.emission(cfg.state, symbol));
                for target in 0..n {
                    let entry = element.matrix[(target, cfg.state)];
                    if entry.is_zero() {
                        continue;
                    }
                    branch.accumulate(Configuration::new(target, output.clone()), w.through(entry));
                }
            }
            // prune only after accumulation so cancellations land first
            branch.prune();
            match element.outcome {
                Outcome::Continue => {
                    for (cfg, w) in branch.entries {
                        next.accumulate(cfg, w);
                    }
                }
                Outcome::Accept => {
                    for (cfg, w) in branch.entries {
                        let slot = events.accept.entry(cfg.output).or_insert_with(T::zero);
                        *slot = *slot + w.mass();
                    }
                }
                Outcome::Reject => {
                    events.reject = events.reject + branch.total_mass();
                }
            }
        }
        next.prune();
        Ok((next, events))
    }

    fn check_word(&self, word: &str) -> Result<(), SimError> {
        match word
            .chars()
            .enumerate()
            .find(|(_, c)| !self.spec.input_alphabet.contains(c))
        {
            Some((position, symbol)) => Err(SimError::IllegalInput { position, symbol }),
            None => Ok(()),
        }
    }

    fn run_with<W: Weight<T>>(&self, word: &str) -> Result<RunResult<T>, SimError> {
        self.check_mode::<W>()?;
        self.check_word(word)?;
        let mut ensemble = self.initial::<W>();
        let mut accept: BTreeMap<String, T> = BTreeMap::new();
        let mut reject = T::zero();
        let tape = std::iter::once(LEFT_MARKER)
            .chain(word.chars())
            .chain(std::iter::once(RIGHT_MARKER));
        for symbol in tape {
            let (next, events) = self.step(&ensemble, symbol)?;
            for (out, p) in events.accept {
                let slot = accept.entry(out).or_insert_with(T::zero);
                *slot = *slot + p;
            }
            reject = reject + events.reject;
            ensemble = next;
        }
        Ok(RunResult {
            input: word.to_string(),
            accept,
            reject,
            unresolved: ensemble.total_mass(),
        })
    }

    /// Quantum run over `^ word $`.
    pub fn run(&self, word: &str) -> Result<RunResult<T>, SimError> {
        self.run_with::<Complex<T>>(word)
    }

    pub fn run_stochastic(&self, word: &str) -> Result<RunResult<T>, SimError> {
        self.run_with::<T>(word)
    }

    /// Runs with whichever semantics the machine's mode calls for.
    pub fn run_any(&self, word: &str) -> Result<RunResult<T>, SimError> {
        match self.spec.mode {
            Mode::Quantum => self.run(word),
            Mode::Stochastic => self.run_stochastic(word),
        }
    }

    pub fn recognize(&self, word: &str) -> Result<(T, T, T), SimError> {
        Ok(self.run_any(word)?.recognition())
    }
}

pub fn initial_superposition<T: Scalar>(spec: &MachineSpec<T>) -> Superposition<T> {
    Ensemble::from_entries([(
        Configuration::new(spec.initial, ""),
        Complex::new(T::one(), T::zero()),
    )])
}

pub fn step<T: Scalar>(
    spec: &MachineSpec<T>,
    sup: &Superposition<T>,
    symbol: char,
) -> Result<(Superposition<T>, StepEvents<T>), SimError> {
    Simulator::new(spec)?.step(sup, symbol)
}

pub fn run<T: Scalar>(spec: &MachineSpec<T>, word: &str) -> Result<RunResult<T>, SimError> {
    Simulator::new(spec)?.run(word)
}

pub fn run_stochastic<T: Scalar>(
    spec: &MachineSpec<T>,
    word: &str,
) -> Result<RunResult<T>, SimError> {
    Simulator::new(spec)?.run_stochastic(word)
}

pub fn recognize<T: Scalar>(spec: &MachineSpec<T>, word: &str) -> Result<(T, T, T), SimError> {
    Simulator::new(spec)?.recognize(word)
}
