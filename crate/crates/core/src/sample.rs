//! Seeded draws from a run's exact outcome distribution.

use std::collections::BTreeMap;
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::simulator::RunResult;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeLabel {
    Accept(String),
    Reject,
    Unresolved,
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::Accept(w) => write!(f, "accept:{w}"),
            OutcomeLabel::Reject => f.write_str("reject"),
            OutcomeLabel::Unresolved => f.write_str("unresolved"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SampleError {
    #[error("sample count must be positive")]
    ZeroDraws,
    #[error("result carries no probability mass")]
    NoMass,
}

/// Every outcome of `result` with its exact probability, accepts first.
pub fn outcome_probabilities<T: Scalar>(result: &RunResult<T>) -> Vec<(OutcomeLabel, T)> {
    result
        .accept
        .iter()
        .map(|(w, p)| (OutcomeLabel::Accept(w.clone()), *p))
        .chain([
            (OutcomeLabel::Reject, result.reject),
            (OutcomeLabel::Unresolved, result.unresolved),
        ])
        .collect()
}

/// `n` independent draws; the same `(result, n, seed)` always gives the same
/// counts. Outcomes that were never drawn are omitted.
pub fn sample_outcomes<T: Scalar>(
    result: &RunResult<T>,
    n: u64,
    seed: u64,
) -> Result<BTreeMap<OutcomeLabel, u64>, SampleError> {
    if n == 0 {
        return Err(SampleError::ZeroDraws);
    }
    let outcomes = outcome_probabilities(result);
    // rounding can leave -1e-17 on an empty category
    let weights = outcomes.iter().map(|(_, p)| p.to_f64_lossy().max(0.0));
    let index = WeightedIndex::new(weights).map_err(|_| SampleError::NoMass)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..n {
        let k = index.sample(&mut rng);
        *counts.entry(outcomes[k].0.clone()).or_insert(0) += 1;
    }
    Ok(counts)
}
