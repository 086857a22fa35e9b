//! Assembly of partially specified transition matrices.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::One;
use thiserror::Error;

use crate::amplitude::AmplitudeExpr;
use crate::matrix::Matrix;
use crate::model::ExprMap;
use crate::scalar::Scalar;

/// How columns with no listed entries are filled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    /// The column for state `s` becomes the basis vector for `s`.
    Identity,
    /// Gram–Schmidt over the standard basis, candidates in state order.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("cannot complete the listed columns to a unitary; they are not orthonormal")]
pub struct CompletionFailed;

pub type Entries<T> = BTreeMap<(usize, usize), (Complex<T>, AmplitudeExpr)>;

/// Builds a `dim × dim` matrix from `(target, source)` entries. A column with
/// at least one listed entry is zero elsewhere.
pub fn assemble<T: Scalar>(
    dim: usize,
    entries: &Entries<T>,
    completion: Completion,
) -> Result<(Matrix<T>, ExprMap), CompletionFailed> {
    let mut m = Matrix::zeros(dim);
    let mut filled = vec![false; dim];
    let mut exprs = BTreeMap::new();
    for (&(t, s), (v, e)) in entries {
        m[(t, s)] = *v;
        filled[s] = true;
        exprs.insert((t, s), e.clone());
    }
    match completion {
        Completion::Identity => {
            for s in (0..dim).filter(|&s| !filled[s]) {
                m[(s, s)] = Complex::one();
            }
        }
        Completion::Auto => {
            if !m.complete_orthonormal(&filled) {
                return Err(CompletionFailed);
            }
        }
    }
    Ok((m, exprs))
}
