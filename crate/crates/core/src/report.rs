//! The analysis report and its canonical JSON form.
//!
//! Field order is the struct declaration order and is stable. Floats are
//! rounded to 12 significant digits when a report is assembled, so emitted
//! JSON parses back to an identical report.

use serde::{Deserialize, Serialize};

use crate::classifier::RandomnessClass;
use crate::minimizer::{CompressibilityVerdict, CoverSolution, DiscardStep, WitnessAssignment};
use crate::quantum::{CountEstimate, RegisterLayout};
use crate::witness::CoverageReport;

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    /// `num / den` in lowest terms; `None` when `den = 0`.
    pub fn new(num: u64, den: u64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den);
        Some(Rational { num: num / g, den: den / g })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSummary {
    pub label: String,
    pub length: usize,
    pub min: u64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSummary {
    pub oracle: String,
    pub targets: usize,
    pub candidates: Vec<u64>,
    pub candidate_pool_size: usize,
    pub marked_pairs: usize,
    pub coverage: CoverageReport,
}

/// Where the oracle's targets differ from the true satisfying set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMismatch {
    /// Marked by the oracle but not satisfying the question.
    pub false_positives: Vec<u64>,
    /// Satisfying the question but never marked.
    pub false_negatives: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadoxSummary {
    pub detected: bool,
    pub narrative: String,
    pub discard_steps: Vec<DiscardStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCheck {
    pub ran: bool,
    pub skipped_reason: Option<String>,
    /// The skip was forced by the qubit cap rather than requested.
    pub cap_exceeded: bool,
    pub layout: Option<RegisterLayout>,
    /// `N = |S| · |W|`.
    pub support_size: usize,
    /// `M`, marked pairs under the assigned-witness oracle.
    pub marked_pairs: usize,
    pub pairs_per_element: Option<Rational>,
    /// log2 of the unnormalized `1/sqrt(2^(n+m))` prefactor, as written.
    pub unnormalized_prefactor_log2: f64,
    /// The `1/sqrt(n m)` amplitude actually used.
    pub normalization: f64,
    pub grover_iterations: Option<u64>,
    pub grover_success_probability: Option<f64>,
    pub grover_closed_form: Option<f64>,
    pub amplified_support_matches: Option<bool>,
    pub count: Option<CountEstimate>,
    pub count_error_bound: Option<f64>,
    /// Flag-1 probability times `N`; a non-quantum shortcut for comparison.
    pub amplitude_sum_count: Option<f64>,
}

impl QuantumCheck {
    pub fn skipped(reason: impl Into<String>, support_size: usize, marked_pairs: usize, n: usize, m: usize) -> Self {
        QuantumCheck {
            ran: false,
            skipped_reason: Some(reason.into()),
            cap_exceeded: false,
            layout: None,
            support_size,
            marked_pairs,
            pairs_per_element: None,
            unnormalized_prefactor_log2: -((n + m) as f64) / 2.0,
            normalization: sig12(1.0 / (support_size.max(1) as f64).sqrt()),
            grover_iterations: None,
            grover_success_probability: None,
            grover_closed_form: None,
            amplified_support_matches: None,
            count: None,
            count_error_bound: None,
            amplitude_sum_count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub sequence: SequenceSummary,
    pub question: String,
    pub bitstring: String,
    pub bitstring_popcount: usize,
    /// Number of oracle targets, the `q` the verdict compares against.
    pub q: usize,
    pub relation: RelationSummary,
    pub oracle_mismatch: Option<OracleMismatch>,
    pub min_cover: CoverSolution,
    pub exact_cover: CoverSolution,
    pub assignment: WitnessAssignment,
    pub paradox: ParadoxSummary,
    pub verdict: CompressibilityVerdict,
    pub compression_ratio: Option<Rational>,
    /// `(element, witness)` pairs behind the classification state.
    pub assigned_pairs: Vec<(u64, u64)>,
    pub quantum: QuantumCheck,
    pub classification: RandomnessClass,
    /// Raw multi-witness state, reported when the paradox fired.
    pub pre_resolution_classification: Option<RandomnessClass>,
    /// State restricted to a distinct-witness assignment, when the paradox
    /// fired and one exists.
    pub assignment_classification: Option<RandomnessClass>,
}

impl RandomnessReport {
    /// Canonical pretty JSON body, no run metadata.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Run metadata kept outside the canonical report body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub generated_unix_seconds: u64,
}

impl RunMetadata {
    pub fn now() -> Self {
        RunMetadata {
            tool: "qwitness".to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            generated_unix_seconds: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// File layout: `{"report": ..., "run": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub report: RandomnessReport,
    pub run: RunMetadata,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(2.0000000000000004), 2.0);
        assert_eq!(serde_json::to_string(&sig12(std::f64::consts::PI)).unwrap(), "3.14159265359");
    }

    #[test]
    fn rationals() {
        assert_eq!(Rational::new(4, 74), Some(Rational { num: 2, den: 37 }));
        assert_eq!(Rational::new(3, 0), None);
        assert_eq!(Rational::new(0, 5), Some(Rational { num: 0, den: 1 }));
    }
}
