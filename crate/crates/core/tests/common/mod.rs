#![allow(dead_code)]

use std::collections::BTreeMap;

/// Hand propagation of the three-path algorithm, independent of the
/// simulator: returns (accept mass per output, reject mass).
pub fn f1_path_oracle(x: &str) -> (BTreeMap<String, f64>, f64) {
    let branch = 1.0 / 3f64.sqrt();
    // third branch rejects at the split
    let mut reject = branch * branch;
    let mut accept = BTreeMap::new();
    let parts: Vec<&str> = x.split('c').collect();
    if parts.len() != 2 {
        // both surviving branches end in their own reject sink
        reject += 2.0 * branch * branch;
        return (accept, reject);
    }
    let (w1, w2) = (parts[0], parts[1]);
    let h = 1.0 / 2f64.sqrt();
    // (final state, output) -> amplitude
    let mut amp: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    *amp.entry(("qacc", w1)).or_default() += branch * h;
    *amp.entry(("qrej", w1)).or_default() += branch * h;
    *amp.entry(("qacc", w2)).or_default() += branch * h;
    *amp.entry(("qrej", w2)).or_default() -= branch * h;
    for ((state, out), a) in amp {
        let p = a * a;
        if p < 1e-24 {
            continue;
        }
        if state == "qacc" {
            *accept.entry(out.to_string()).or_default() += p;
        } else {
            reject += p;
        }
    }
    (accept, reject)
}

/// Classical counterpart: the same paths with probabilities.
pub fn f1_classical_oracle(x: &str) -> (BTreeMap<String, f64>, f64) {
    let third = 1.0 / 3.0;
    let parts: Vec<&str> = x.split('c').collect();
    if parts.len() != 2 {
        return (BTreeMap::new(), 1.0);
    }
    let mut accept = BTreeMap::new();
    for w in [parts[0], parts[1]] {
        *accept.entry(w.to_string()).or_default() += third / 2.0;
    }
    (accept, third + third)
}

/// `f1` by enumerating every split point: defined iff exactly one `c` and
/// the split at it gives equal halves.
pub fn split_enumeration_oracle(x: &str) -> Option<String> {
    let chars: Vec<char> = x.chars().collect();
    let c_count = chars.iter().filter(|&&c| c == 'c').count();
    let mut hits = Vec::new();
    for (k, &ch) in chars.iter().enumerate() {
        if ch != 'c' {
            continue;
        }
        let left: String = chars[..k].iter().collect();
        let right: String = chars[k + 1..].iter().collect();
        if left == right {
            hits.push(left);
        }
    }
    if c_count == 1 && hits.len() == 1 {
        hits.pop()
    } else {
        None
    }
}

pub fn words_over(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for c in alphabet {
                next.push(format!("{w}{c}"));
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

use num_complex::Complex;
use qfst::random::{random_machine, RandomMachineParams};
use qfst::{Machine, Mode, Simulator, Superposition};
use rand::Rng;

pub fn random_quantum_machine<R: Rng>(rng: &mut R) -> Machine {
    random_machine(rng, &RandomMachineParams::default())
}

pub fn random_word<R: Rng>(rng: &mut R, m: &Machine, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| m.input_alphabet[rng.random_range(0..m.input_alphabet.len())])
        .collect()
}

/// Random normalized-or-less superposition over short outputs.
pub fn random_superposition<R: Rng>(rng: &mut R, m: &Machine) -> Superposition<f64> {
    let mut entries = Vec::new();
    for s in 0..m.dim() {
        for out in ["", "x", "xy"] {
            if rng.random_bool(0.5) {
                entries.push((
                    qfst::Configuration::new(s, out),
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                ));
            }
        }
    }
    let sup = Superposition::from_entries(entries.clone());
    let norm = sup.total_mass::<f64>().sqrt();
    let scale = if norm > 0.0 {
        rng.random_range(0.1..=1.0) / norm
    } else {
        1.0
    };
    Superposition::from_entries(entries.into_iter().map(|(c, a)| (c, a * scale)))
}

/// ‖in‖² − ‖out‖² − harvested mass for one random probe.
pub fn step_conservation_gap<R: Rng>(rng: &mut R) -> f64 {
    let m = random_quantum_machine(rng);
    assert_eq!(m.mode, Mode::Quantum);
    let sim = Simulator::new(&m).expect("random machines validate");
    let sup = random_superposition(rng, &m);
    let symbols = m.tape_symbols();
    let symbol = symbols[rng.random_range(0..symbols.len())];
    let (next, events) = sim.step(&sup, symbol).unwrap();
    sup.total_mass::<f64>() - next.total_mass::<f64>() - events.total()
}

/// Largest difference between two runs over every reported probability.
pub fn result_distance(a: &qfst::Run, b: &qfst::Run) -> f64 {
    let keys: std::collections::BTreeSet<&String> =
        a.accept.keys().chain(b.accept.keys()).collect();
    let mut d = (a.reject - b.reject)
        .abs()
        .max((a.unresolved - b.unresolved).abs());
    for k in keys {
        d = d.max((a.accept_on(k) - b.accept_on(k)).abs());
    }
    d
}
