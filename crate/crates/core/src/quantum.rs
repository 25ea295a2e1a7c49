//! Desk-scale statevector simulation of the marking circuit.
//!
//! Basis states use value encoding: the index of `|s>|w>|flag>` is the bit
//! concatenation `s · 2^(w_qubits+1) + w · 2 + flag`. The initial state is
//! uniform over the `n · m` support points `S × W` with flag 0, normalized by
//! `1/sqrt(n m)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::witness::WitnessRelation;

pub const DEFAULT_QUBIT_CAP: u32 = 24;
pub const DEFAULT_PHASE_BITS: u32 = 6;
/// Norm tolerance every simulated state must satisfy.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("simulation needs {needed} qubits, above the cap of {cap}")]
    CapExceeded { needed: u32, cap: u32 },
    #[error("register values must be distinct; {0} appears twice")]
    DuplicateValue(u64),
    #[error("{0} register is empty")]
    EmptyRegister(&'static str),
    #[error("state has amplitude on basis index {0}, outside the oracle support")]
    SupportMismatch(usize),
    #[error("nothing to amplify: no marked pairs")]
    NothingToAmplify,
    #[error("need 1 <= M <= N, got N={n}, M={m}")]
    InvalidCounts { n: u64, m: u64 },
    #[error("marked subspace has zero probability")]
    ZeroMarkedProbability,
    #[error("state has zero norm")]
    ZeroState,
    #[error("phase bits must be between 1 and 20, got {0}")]
    BadPhaseBits(u32),
    #[error("oracle table has {got} entries, expected {want}")]
    TableSize { got: usize, want: usize },
    #[error("amplitudes do not form a unit vector (norm {0})")]
    NotNormalized(f64),
    #[error("value {value} does not fit the {register} register")]
    ValueTooLarge { value: u64, register: &'static str },
}

fn bits_for(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

/// Qubit counts for the `s`, `w` and one-qubit flag registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub s_qubits: u32,
    pub w_qubits: u32,
}

impl RegisterLayout {
    pub fn for_values(max_s: u64, max_w: u64, cap: u32) -> Result<Self, QuantumError> {
        let layout = RegisterLayout { s_qubits: bits_for(max_s), w_qubits: bits_for(max_w) };
        if layout.total_qubits() > cap {
            return Err(QuantumError::CapExceeded { needed: layout.total_qubits(), cap });
        }
        Ok(layout)
    }

    pub fn total_qubits(&self) -> u32 {
        self.s_qubits + self.w_qubits + 1
    }

    pub fn dimension(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn index(&self, s: u64, w: u64, flag: bool) -> usize {
        ((s as usize) << (self.w_qubits + 1)) | ((w as usize) << 1) | usize::from(flag)
    }

    pub fn decode(&self, index: usize) -> (u64, u64, bool) {
        let flag = index & 1 == 1;
        let w = (index >> 1) & ((1usize << self.w_qubits) - 1);
        let s = index >> (self.w_qubits + 1);
        (s as u64, w as u64, flag)
    }

    fn check(&self, s: u64, w: u64) -> Result<(), QuantumError> {
        if bits_for(s) > self.s_qubits {
            return Err(QuantumError::ValueTooLarge { value: s, register: "s" });
        }
        if bits_for(w) > self.w_qubits {
            return Err(QuantumError::ValueTooLarge { value: w, register: "w" });
        }
        Ok(())
    }
}

/// One entry of a state dump: `(basis index, real, imaginary)`.
pub type AmplitudeEntry = (usize, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    layout: RegisterLayout,
}

impl StateVector {
    /// A state with the given `(s, w, flag, amplitude)` entries; must have unit
    /// norm.
    pub fn from_entries(layout: RegisterLayout, entries: &[(u64, u64, bool, Complex64)]) -> Result<Self, QuantumError> {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        for &(s, w, f, a) in entries {
            layout.check(s, w)?;
            amplitudes[layout.index(s, w, f)] += a;
        }
        let state = StateVector { amplitudes, layout };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, s: u64, w: u64, flag: bool) -> Complex64 {
        self.amplitudes[self.layout.index(s, w, flag)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Non-zero amplitudes as `(s, w, flag, amplitude)`, by basis index.
    pub fn entries(&self) -> Vec<(u64, u64, bool, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, &a)| {
                let (s, w, f) = self.layout.decode(i);
                (s, w, f, a)
            })
            .collect()
    }

    pub fn dump(&self) -> Vec<AmplitudeEntry> {
        self.amplitudes.iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(i, a)| (i, a.re, a.im)).collect()
    }

    /// Probability of reading flag = 1.
    pub fn flag_probability(&self) -> f64 {
        self.amplitudes.iter().skip(1).step_by(2).map(Complex64::norm_sqr).sum()
    }
}

/// The oracle table `Q(s, w)` over a support `S × W`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedOracle {
    s_values: Vec<u64>,
    w_values: Vec<u64>,
    /// Row-major over `s_values × w_values`.
    table: Vec<bool>,
    descriptor: String,
}

fn check_distinct(values: &[u64], register: &'static str) -> Result<(), QuantumError> {
    if values.is_empty() {
        return Err(QuantumError::EmptyRegister(register));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    match sorted.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(QuantumError::DuplicateValue(w[0])),
        None => Ok(()),
    }
}

impl MarkedOracle {
    pub fn new(
        s_values: Vec<u64>,
        w_values: Vec<u64>,
        table: Vec<bool>,
        descriptor: impl Into<String>,
    ) -> Result<Self, QuantumError> {
        check_distinct(&s_values, "s")?;
        check_distinct(&w_values, "w")?;
        let want = s_values.len() * w_values.len();
        if table.len() != want {
            return Err(QuantumError::TableSize { got: table.len(), want });
        }
        Ok(MarkedOracle { s_values, w_values, table, descriptor: descriptor.into() })
    }

    /// The relation's own oracle rule evaluated over `S × W`.
    pub fn from_relation(s_values: &[u64], w_values: &[u64], relation: &WitnessRelation) -> Result<Self, QuantumError> {
        let table = s_values.iter().flat_map(|&s| w_values.iter().map(move |&w| relation.marks(s, w))).collect();
        MarkedOracle::new(s_values.to_vec(), w_values.to_vec(), table, relation.oracle_descriptor())
    }

    /// Marks exactly the listed `(s, w)` pairs.
    pub fn from_pairs(
        s_values: &[u64],
        w_values: &[u64],
        pairs: &[(u64, u64)],
        descriptor: impl Into<String>,
    ) -> Result<Self, QuantumError> {
        let table = s_values.iter().flat_map(|&s| w_values.iter().map(move |&w| pairs.contains(&(s, w)))).collect();
        MarkedOracle::new(s_values.to_vec(), w_values.to_vec(), table, descriptor)
    }

    pub fn s_values(&self) -> &[u64] {
        &self.s_values
    }

    pub fn w_values(&self) -> &[u64] {
        &self.w_values
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// `N`, the number of support points.
    pub fn support_size(&self) -> usize {
        self.table.len()
    }

    /// `M`, the number of marked support points.
    pub fn marked_count(&self) -> usize {
        self.table.iter().filter(|&&b| b).count()
    }

    pub fn is_marked(&self, s: u64, w: u64) -> bool {
        let (Some(i), Some(j)) =
            (self.s_values.iter().position(|&v| v == s), self.w_values.iter().position(|&v| v == w))
        else {
            return false;
        };
        self.table[i * self.w_values.len() + j]
    }

    /// Marked pairs in support order.
    pub fn marked_pairs(&self) -> Vec<(u64, u64)> {
        self.support().filter(|&(_, _, m)| m).map(|(s, w, _)| (s, w)).collect()
    }

    fn support(&self) -> impl Iterator<Item = (u64, u64, bool)> + '_ {
        self.s_values.iter().enumerate().flat_map(move |(i, &s)| {
            self.w_values.iter().enumerate().map(move |(j, &w)| (s, w, self.table[i * self.w_values.len() + j]))
        })
    }

    pub fn layout(&self, cap: u32) -> Result<RegisterLayout, QuantumError> {
        let max_s = *self.s_values.iter().max().expect("non-empty");
        let max_w = *self.w_values.iter().max().expect("non-empty");
        RegisterLayout::for_values(max_s, max_w, cap)
    }
}

/// Uniform superposition over `S × W` with the flag at 0.
pub fn prepare_superposition(s_values: &[u64], w_values: &[u64], cap: u32) -> Result<StateVector, QuantumError> {
    check_distinct(s_values, "s")?;
    check_distinct(w_values, "w")?;
    let max_s = *s_values.iter().max().expect("non-empty");
    let max_w = *w_values.iter().max().expect("non-empty");
    let layout = RegisterLayout::for_values(max_s, max_w, cap)?;
    let amp = Complex64::new(1.0 / ((s_values.len() * w_values.len()) as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    for &s in s_values {
        for &w in w_values {
            amplitudes[layout.index(s, w, false)] = amp;
        }
    }
    Ok(StateVector { amplitudes, layout })
}

fn check_support(state: &StateVector, oracle: &MarkedOracle) -> Result<(), QuantumError> {
    for (i, a) in state.amplitudes.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let (s, w, _) = state.layout.decode(i);
        if !oracle.s_values.contains(&s) || !oracle.w_values.contains(&w) {
            return Err(QuantumError::SupportMismatch(i));
        }
    }
    Ok(())
}

/// `|s>|w>|f> -> |s>|w>|f xor Q(s,w)>`: swaps flag 0 and flag 1 amplitudes of
/// every marked pair.
pub fn apply_marking(mut state: StateVector, oracle: &MarkedOracle) -> Result<StateVector, QuantumError> {
    check_support(&state, oracle)?;
    for (s, w, _) in oracle.support().filter(|&(_, _, m)| m) {
        state.layout.check(s, w)?;
        let i0 = state.layout.index(s, w, false);
        state.amplitudes.swap(i0, i0 | 1);
    }
    Ok(state)
}

/// `floor((pi/4) sqrt(N/M))`.
pub fn grover_iterations_optimal(n: u64, m: u64) -> Result<u64, QuantumError> {
    if m == 0 {
        return Err(QuantumError::NothingToAmplify);
    }
    if m > n {
        return Err(QuantumError::InvalidCounts { n, m });
    }
    Ok((PI / 4.0 * (n as f64 / m as f64).sqrt()).floor() as u64)
}

/// Closed-form marked probability `sin^2((2k+1) theta)`, `sin theta = sqrt(M/N)`.
pub fn grover_success_probability(n: u64, m: u64, k: u64) -> f64 {
    let theta = (m as f64 / n as f64).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Probability mass on marked support pairs, either flag value.
pub fn marked_probability(state: &StateVector, oracle: &MarkedOracle) -> f64 {
    oracle
        .support()
        .filter(|&(_, _, m)| m)
        .map(|(s, w, _)| state.amplitude(s, w, false).norm_sqr() + state.amplitude(s, w, true).norm_sqr())
        .sum()
}

/// `k` Grover rounds: phase flip of marked pairs, then inversion about the
/// mean over the `S × W` support (flag 0).
pub fn grover_amplify(state: StateVector, oracle: &MarkedOracle, k: u64) -> Result<StateVector, QuantumError> {
    check_support(&state, oracle)?;
    let layout = state.layout;
    let support: Vec<(usize, bool)> = oracle.support().map(|(s, w, m)| (layout.index(s, w, false), m)).collect();
    let mut state = state;
    let n = support.len() as f64;
    for _ in 0..k {
        for &(i, m) in &support {
            if m {
                state.amplitudes[i] = -state.amplitudes[i];
            }
        }
        let mean = support.iter().map(|&(i, _)| state.amplitudes[i]).sum::<Complex64>() / n;
        for &(i, _) in &support {
            state.amplitudes[i] = mean * 2.0 - state.amplitudes[i];
        }
    }
    Ok(state)
}

/// Marked probability after each of `0..=k` Grover rounds.
pub fn grover_trace(oracle: &MarkedOracle, k: u64, cap: u32) -> Result<Vec<f64>, QuantumError> {
    let mut state = prepare_superposition(&oracle.s_values, &oracle.w_values, cap)?;
    let mut trace = vec![marked_probability(&state, oracle)];
    for _ in 0..k {
        state = grover_amplify(state, oracle, 1)?;
        trace.push(marked_probability(&state, oracle));
    }
    Ok(trace)
}

/// Restriction to flag = 1, renormalized.
pub fn post_select_flag(mut state: StateVector) -> Result<StateVector, QuantumError> {
    let p = state.flag_probability();
    if p <= 0.0 {
        return Err(QuantumError::ZeroMarkedProbability);
    }
    let scale = 1.0 / p.sqrt();
    for (i, a) in state.amplitudes.iter_mut().enumerate() {
        if i & 1 == 0 {
            *a = Complex64::new(0.0, 0.0);
        } else {
            *a *= scale;
        }
    }
    Ok(state)
}

/// Result of quantum counting by phase estimation on the Grover operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEstimate {
    pub estimated_m: f64,
    pub phase_bits: u32,
    /// Measured phase `numerator / 2^phase_bits`, folded into `[0, 1/2]`.
    pub phase_numerator: u64,
    pub phase_denominator: u64,
    /// Probability of the reported (folded) outcome.
    pub probability: f64,
    /// The outcome distribution is a point mass: the phase is exact in t bits.
    pub exact: bool,
    pub support_size: u64,
}

/// Upper bound on `|estimated_M - M|` when the phase is read within one
/// grid step `2^-t`: with `d = pi / 2^t`, `2 sqrt(M (N - M)) d + N d^2`.
pub fn counting_error_bound(n: u64, m: u64, t: u32) -> f64 {
    let d = PI / (1u64 << t) as f64;
    2.0 * ((m as f64) * (n - m) as f64).sqrt() * d + n as f64 * d * d
}

/// Quantum counting: phase estimation with `t` ancilla qubits over the Grover
/// operator `G = (2|u><u| - I) O`, starting from the uniform support state.
///
/// The joint state `sum_x |x> G^x |u>` is built on the support subspace (the
/// full register has zero amplitude elsewhere), then the inverse QFT is
/// applied to the ancilla by FFT. The most probable outcome, folded so that
/// `y` and `2^t - y` coincide, is reported.
pub fn quantum_count(oracle: &MarkedOracle, t: u32, cap: u32) -> Result<CountEstimate, QuantumError> {
    if !(1..=20).contains(&t) {
        return Err(QuantumError::BadPhaseBits(t));
    }
    let layout = oracle.layout(cap)?;
    let needed = layout.total_qubits() + t;
    if needed > cap {
        return Err(QuantumError::CapExceeded { needed, cap });
    }
    let marks: Vec<bool> = oracle.support().map(|(_, _, m)| m).collect();
    let n = marks.len();
    let steps = 1usize << t;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    // columns[j][x] = (G^x u)_j, all real
    let mut columns = vec![vec![Complex64::new(0.0, 0.0); steps]; n];
    for x in 0..steps {
        for (col, &a) in columns.iter_mut().zip(&v) {
            col[x] = Complex64::new(a, 0.0);
        }
        for (a, &m) in v.iter_mut().zip(&marks) {
            if m {
                *a = -*a;
            }
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        for a in v.iter_mut() {
            *a = 2.0 * mean - *a;
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(steps);
    let mut probs = vec![0.0f64; steps];
    let scale = 1.0 / steps as f64;
    for col in columns.iter_mut() {
        fft.process(col);
        for (p, c) in probs.iter_mut().zip(col.iter()) {
            *p += (c * scale).norm_sqr();
        }
    }
    let half = steps / 2;
    let folded: Vec<f64> =
        (0..=half).map(|y| if y == 0 || y == half { probs[y] } else { probs[y] + probs[steps - y] }).collect();
    let (y, &p) =
        folded.iter().enumerate().fold((0, &-1.0), |acc, cur| if *cur.1 > *acc.1 + 1e-12 { cur } else { acc });
    let exact = p > 1.0 - 1e-9;
    let mut estimate = n as f64 * (PI * y as f64 / steps as f64).sin().powi(2);
    if exact {
        estimate = estimate.round();
    }
    Ok(CountEstimate {
        estimated_m: estimate,
        phase_bits: t,
        phase_numerator: y as u64,
        phase_denominator: steps as u64,
        probability: p,
        exact,
        support_size: n as u64,
    })
}

/// Non-quantum shortcut: `N` times the flag-1 probability after marking the
/// uniform state.
pub fn amplitude_sum_count(oracle: &MarkedOracle, cap: u32) -> Result<f64, QuantumError> {
    let state = prepare_superposition(&oracle.s_values, &oracle.w_values, cap)?;
    let marked = apply_marking(state, oracle)?;
    Ok(oracle.support_size() as f64 * marked.flag_probability())
}
