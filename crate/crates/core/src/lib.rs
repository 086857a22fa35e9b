//! Exact simulation of one-way quantum finite-state transducers with
//! measure-after-step semantics, plus a stochastic mode, a text format for
//! machine definitions and an exhaustive bounded-error checker.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` and `f32`); the
//! aliases below fix it to `f64`, which is what the tolerances in the docs
//! refer to.

pub mod amplitude;
pub mod format;
pub mod machines;
pub mod matrix;
pub mod model;
pub mod random;
pub mod sample;
pub mod scalar;
pub mod simulator;
pub mod transition;
pub mod validate;

pub use amplitude::{eval_amplitude, AmplitudeError, AmplitudeExpr};
pub use format::{parse_machine_text, serialize_machine, ParseError, ParseErrorKind};
pub use machines::{
    build_f1_qfst, build_f1_stochastic_analog, builtin, exhaustive_check, f1_oracle, f1_qfst,
    f1_stochastic_analog, BoundedErrorReport, CheckError, CheckOptions, Expected, F1Oracle,
    FunctionOracle, Violation, BUILTIN_NAMES,
};
pub use model::{
    MachineSpec, Mode, OperationElement, OperationSet, Outcome, LEFT_MARKER, RIGHT_MARKER,
};
pub use sample::{sample_outcomes, OutcomeLabel, SampleError};
pub use scalar::Scalar;
pub use simulator::{
    initial_superposition, recognize, run, run_stochastic, step, Configuration, Distribution,
    Ensemble, RunResult, SimError, Simulator, StepEvents, Superposition,
};
pub use validate::{decompose_unitary, validate_machine, Issue, Severity, ValidationReport};

pub type Complex64 = num_complex::Complex<f64>;
pub type Matrix = matrix::Matrix<f64>;
pub type Machine = model::MachineSpec<f64>;
pub type Operation = model::OperationSet<f64>;
pub type Element = model::OperationElement<f64>;
pub type Amplitudes = simulator::Superposition<f64>;
pub type Run = simulator::RunResult<f64>;
pub type Events = simulator::StepEvents<f64>;
pub type Report = machines::BoundedErrorReport<f64>;
