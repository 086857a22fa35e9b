//! Random valid machines, for property tests and fuzzing the format.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::Matrix;
use crate::model::{MachineSpec, Mode};
use crate::scalar::Scalar;
use crate::validate::split_by_partition;

/// Haar-ish random unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<T: Scalar, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(dim);
    let mut columns: Vec<Vec<Complex<T>>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im))
            })
            .collect();
        for _ in 0..2 {
            for b in &columns {
                let overlap: Complex<T> = b.iter().zip(&v).map(|(x, y)| x.conj() * *y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = *vi - *bi * overlap;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        let v: Vec<_> = v.into_iter().map(|x| x / norm).collect();
        m.set_column(j, &v);
        columns.push(v);
    }
    m
}

/// Random column-stochastic matrix with Dirichlet-like columns.
pub fn random_stochastic<T: Scalar, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(dim);
    for s in 0..dim {
        let weights: Vec<f64> = (0..dim)
            .map(|_| {
                if rng.random_bool(0.4) {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            m[(s, s)] = Complex::new(T::one(), T::zero());
            continue;
        }
        for (t, w) in weights.iter().enumerate() {
            m[(t, s)] = Complex::new(T::from_f64_lossy(w / total), T::zero());
        }
    }
    m
}

#[derive(Clone, Debug)]
pub struct RandomMachineParams {
    pub max_states: usize,
    pub max_letters: usize,
    pub mode: Mode,
}

impl Default for RandomMachineParams {
    fn default() -> Self {
        Self {
            max_states: 5,
            max_letters: 3,
            mode: Mode::Quantum,
        }
    }
}

const LETTER_POOL: [char; 6] = ['a', 'b', 'c', 'd', '0', '1'];
const OUTPUT_POOL: [char; 3] = ['x', 'y', 'z'];

/// A machine that always validates: every operation is the halting-partition
/// split of one random unitary (or stochastic matrix).
pub fn random_machine<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    params: &RandomMachineParams,
) -> MachineSpec<T> {
    let n = rng.random_range(1..=params.max_states.max(1));
    let letters = rng.random_range(1..=params.max_letters.clamp(1, LETTER_POOL.len()));
    let input_alphabet: Vec<char> = LETTER_POOL[..letters].to_vec();
    let output_alphabet: Vec<char> =
        OUTPUT_POOL[..rng.random_range(1..=OUTPUT_POOL.len())].to_vec();
    let states: Vec<String> = (0..n).map(|k| format!("q{k}")).collect();

    let mut accept = BTreeSet::new();
    let mut reject = BTreeSet::new();
    for s in 0..n {
        match rng.random_range(0..4) {
            0 => {
                accept.insert(s);
            }
            1 => {
                reject.insert(s);
            }
            _ => {}
        }
    }

    let mut spec = MachineSpec {
        name: format!("random{n}"),
        mode: params.mode,
        states,
        initial: rng.random_range(0..n),
        input_alphabet,
        output_alphabet,
        accept,
        reject,
        operations: BTreeMap::new(),
        emissions: BTreeMap::new(),
    };
    for symbol in spec.tape_symbols() {
        let m = match params.mode {
            Mode::Quantum => random_unitary::<T, R>(rng, n),
            Mode::Stochastic => random_stochastic::<T, R>(rng, n),
        };
        let set = split_by_partition(&m, &BTreeMap::new(), &spec.accept, &spec.reject);
        spec.operations.insert(symbol, set);
        for s in 0..n {
            if rng.random_bool(0.3) {
                let len = rng.random_range(1..=2);
                let out: String = (0..len)
                    .map(|_| spec.output_alphabet[rng.random_range(0..spec.output_alphabet.len())])
                    .collect();
                spec.emissions.insert((s, symbol), out);
            }
        }
    }
    spec
}
