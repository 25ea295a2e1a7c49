//! Randomness regimes read off the entanglement between the `s` and `w`
//! registers of a post-selected marked state.
//!
//! One witness for everything gives a product state (Schmidt rank 1, no
//! randomness). One witness per element gives a maximally entangled pairing
//! (rank `l`, uniform spectrum). Witnesses shared by blocks of elements sit in
//! between. A state where some element appears with several witnesses is
//! outside that family and is reported as non-canonical.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{QuantumError, RegisterLayout, StateVector};
use crate::witness::WitnessRelation;

/// Schmidt coefficients at or below this are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
const UNIFORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("state has no marked support")]
    EmptySupport,
    #[error("state mixes flag values; post-select the flag first")]
    MixedFlags,
    #[error("pair ({0}, {1}) is not marked by the relation")]
    NotInRelation(u64, u64),
    #[error("witness value {0} does not occur in the marked support")]
    UnseenWitness(u64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    /// Descending, non-negative.
    pub coefficients: Vec<f64>,
    pub rank: usize,
}

/// Amplitudes over `(s, w)` pairs, flag dropped.
fn pair_amplitudes(state: &StateVector) -> Result<Vec<(u64, u64, Complex64)>, ClassifierError> {
    let entries = state.entries();
    let Some(first) = entries.first() else {
        return Err(ClassifierError::EmptySupport);
    };
    if entries.iter().any(|e| e.2 != first.2) {
        return Err(ClassifierError::MixedFlags);
    }
    Ok(entries.into_iter().map(|(s, w, _, a)| (s, w, a)).collect())
}

fn spectrum_of_pairs(pairs: &[(u64, u64, Complex64)]) -> Result<SchmidtSpectrum, ClassifierError> {
    if pairs.is_empty() {
        return Err(ClassifierError::EmptySupport);
    }
    let rows: BTreeMap<u64, usize> = distinct(pairs.iter().map(|p| p.0));
    let cols: BTreeMap<u64, usize> = distinct(pairs.iter().map(|p| p.1));
    let mut matrix = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
    for &(s, w, a) in pairs {
        matrix[(rows[&s], cols[&w])] += a;
    }
    let mut coefficients: Vec<f64> = matrix.svd(false, false).singular_values.iter().copied().collect();
    coefficients.sort_by(|a, b| b.total_cmp(a));
    let rank = coefficients.iter().filter(|&&c| c > RANK_TOLERANCE).count();
    if rank == 0 {
        return Err(ClassifierError::EmptySupport);
    }
    Ok(SchmidtSpectrum { coefficients, rank })
}

fn distinct(values: impl Iterator<Item = u64>) -> BTreeMap<u64, usize> {
    let mut map: BTreeMap<u64, usize> = values.map(|v| (v, 0)).collect();
    for (i, slot) in map.values_mut().enumerate() {
        *slot = i;
    }
    map
}

/// Singular values of the amplitude matrix over the `s | w` cut.
pub fn schmidt(state: &StateVector) -> Result<SchmidtSpectrum, ClassifierError> {
    spectrum_of_pairs(&pair_amplitudes(state)?)
}

/// Von Neumann entropy of the cut in bits, `-sum lambda log2 lambda` over the
/// squared coefficients.
pub fn entanglement_entropy(spectrum: &SchmidtSpectrum) -> f64 {
    let h: f64 = spectrum
        .coefficients
        .iter()
        .map(|c| c * c)
        .filter(|&l| l > RANK_TOLERANCE * RANK_TOLERANCE)
        .map(|l| -l * l.log2())
        .sum();
    h.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// One witness for all elements: product state.
    NoRandomness,
    /// Several witnesses, each serving a block of elements.
    Partial,
    /// Every element is its own block.
    Maximal,
    /// Some element carries more than one witness, or blocks are not uniform.
    NonCanonical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub witness: u64,
    pub elements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessClass {
    pub regime: Regime,
    pub entropy_bits: f64,
    pub schmidt_rank: usize,
    pub coefficients: Vec<f64>,
    /// Number of distinct elements in the marked support.
    pub elements: usize,
    /// Marked pairs grouped by witness, ascending.
    pub blocks: Vec<Block>,
}

impl RandomnessClass {
    /// Class of an empty satisfying set.
    pub fn trivial() -> Self {
        RandomnessClass {
            regime: Regime::NoRandomness,
            entropy_bits: 0.0,
            schmidt_rank: 0,
            coefficients: Vec::new(),
            elements: 0,
            blocks: Vec::new(),
        }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

fn all_close(values: &[f64]) -> bool {
    values.iter().all(|v| (v - values[0]).abs() <= UNIFORM_TOLERANCE)
}

/// Classifies a set of `(s, w, amplitude)` pairs.
pub fn classify_pairs(pairs: &[(u64, u64, Complex64)]) -> Result<RandomnessClass, ClassifierError> {
    let spectrum = spectrum_of_pairs(pairs)?;
    let entropy = entanglement_entropy(&spectrum);

    let mut by_witness: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    let mut witnesses_per_s: BTreeMap<u64, usize> = BTreeMap::new();
    for &(s, w, a) in pairs {
        by_witness.entry(w).or_default().push((s, a.norm()));
        *witnesses_per_s.entry(s).or_default() += 1;
    }
    let l = witnesses_per_s.len();
    let blocks: Vec<Block> = by_witness
        .iter()
        .map(|(&w, members)| {
            let mut elements: Vec<u64> = members.iter().map(|m| m.0).collect();
            elements.sort_unstable();
            Block { witness: w, elements }
        })
        .collect();
    let single_witness = witnesses_per_s.values().all(|&k| k == 1);
    let block_uniform = by_witness.values().all(|members| all_close(&members.iter().map(|m| m.1).collect::<Vec<_>>()));
    let live: Vec<f64> = spectrum.coefficients[..spectrum.rank].to_vec();

    let regime = if l == 1 {
        // a single element is both a product and a pairing; W = S_Q decides
        let (s, w, _) = pairs[0];
        if single_witness && s == w {
            Regime::Maximal
        } else {
            Regime::NoRandomness
        }
    } else if spectrum.rank == 1 {
        Regime::NoRandomness
    } else if !single_witness {
        Regime::NonCanonical
    } else if spectrum.rank == l && all_close(&live) {
        Regime::Maximal
    } else if spectrum.rank < l && block_uniform {
        Regime::Partial
    } else {
        Regime::NonCanonical
    };
    Ok(RandomnessClass {
        regime,
        entropy_bits: entropy,
        schmidt_rank: spectrum.rank,
        coefficients: spectrum.coefficients,
        elements: l,
        blocks,
    })
}

/// Classifies the post-selected marked state of `relation`.
pub fn classify(state: &StateVector, relation: &WitnessRelation) -> Result<RandomnessClass, ClassifierError> {
    let pairs = pair_amplitudes(state)?;
    if let Some(&(s, w, _)) = pairs.iter().find(|&&(s, w, _)| !relation.marks(s, w)) {
        return Err(ClassifierError::NotInRelation(s, w));
    }
    classify_pairs(&pairs)
}

/// Distribution of `s` given that the `w` register reads `w`.
pub fn conditional_information(state: &StateVector, w: u64) -> Result<Vec<(u64, f64)>, ClassifierError> {
    let pairs = pair_amplitudes(state)?;
    let column: Vec<(u64, f64)> = pairs.iter().filter(|p| p.1 == w).map(|p| (p.0, p.2.norm_sqr())).collect();
    let total: f64 = column.iter().map(|c| c.1).sum();
    if column.is_empty() || total <= 0.0 {
        return Err(ClassifierError::UnseenWitness(w));
    }
    Ok(column.into_iter().map(|(s, p)| (s, p / total)).collect())
}

/// Uniform post-selected state over the pairs of the given blocks
/// (`1/sqrt(l)` per pair, flag 1).
pub fn block_state(blocks: &[Block], cap: u32) -> Result<StateVector, ClassifierError> {
    let pairs: Vec<(u64, u64)> = blocks.iter().flat_map(|b| b.elements.iter().map(move |&s| (s, b.witness))).collect();
    if pairs.is_empty() {
        return Err(ClassifierError::EmptySupport);
    }
    let max_s = pairs.iter().map(|p| p.0).max().expect("non-empty");
    let max_w = pairs.iter().map(|p| p.1).max().expect("non-empty");
    let layout = RegisterLayout::for_values(max_s, max_w, cap)?;
    let amp = Complex64::new(1.0 / (pairs.len() as f64).sqrt(), 0.0);
    let entries: Vec<_> = pairs.iter().map(|&(s, w)| (s, w, true, amp)).collect();
    Ok(StateVector::from_entries(layout, &entries)?)
}
