//! End-to-end analysis of a (sequence, question) pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{self, ClassifierError, RandomnessClass, Regime};
use crate::minimizer::{
    self, paradox_detect, unique_witness_assignment, CompressionRegime, MinimizerError, DEFAULT_EXACT_THRESHOLD,
};
use crate::quantum::{self, MarkedOracle, QuantumError, DEFAULT_PHASE_BITS, DEFAULT_QUBIT_CAP};
use crate::report::{
    sig12, OracleMismatch, ParadoxSummary, QuantumCheck, RandomnessReport, Rational, RelationSummary, SequenceSummary,
};
use crate::sequence::{build_bitstring, satisfying_set, Question, Sequence, SequenceError};
use crate::witness::{
    coverage_check, relation_composite, relation_identity, relation_mobius, relation_recurrence, WitnessError,
    WitnessRelation,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("sequence stage: {0}")]
    Sequence(#[from] SequenceError),
    #[error("witness stage: {0}")]
    Witness(#[from] WitnessError),
    #[error("minimizer stage: {0}")]
    Minimizer(#[from] MinimizerError),
    #[error("quantum stage: {0}")]
    Quantum(#[from] QuantumError),
    #[error("classifier stage: {0}")]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub qubit_cap: u32,
    pub phase_bits: u32,
    pub exact_threshold: usize,
    pub quantum: bool,
    /// Worker threads for independent stages; results do not depend on it.
    pub jobs: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            qubit_cap: DEFAULT_QUBIT_CAP,
            phase_bits: DEFAULT_PHASE_BITS,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            quantum: true,
            jobs: 1,
        }
    }
}

/// The witness relation a question is analyzed under.
///
/// Parity uses the congruence oracle with witness 0; primality and explicit
/// target sets have no shared witnesses and use the identity relation.
pub fn relation_for(sequence: &Sequence, question: &Question) -> Result<WitnessRelation, PipelineError> {
    let satisfying = || satisfying_set(sequence, question);
    Ok(match question {
        Question::RecurrenceMembership { p, q } => relation_recurrence(sequence, *p, *q)?,
        Question::IsComposite => relation_composite(sequence),
        Question::MobiusPlusOne => relation_mobius(sequence)?,
        Question::IsEven => relation_recurrence(sequence, 2, 0)?,
        Question::IsPrime | Question::IdentityIn { .. } => relation_identity(&satisfying()?),
    })
}

fn round_class(mut c: RandomnessClass) -> RandomnessClass {
    c.entropy_bits = sig12(c.entropy_bits);
    c.coefficients.iter_mut().for_each(|x| *x = sig12(*x));
    c
}

fn uniform_pairs(pairs: &[(u64, u64)]) -> Vec<(u64, u64, Complex64)> {
    let a = Complex64::new(1.0 / (pairs.len() as f64).sqrt(), 0.0);
    pairs.iter().map(|&(s, w)| (s, w, a)).collect()
}

fn classify_from_pairs(pairs: &[(u64, u64)]) -> Result<RandomnessClass, PipelineError> {
    if pairs.is_empty() {
        return Ok(RandomnessClass::trivial());
    }
    Ok(round_class(classifier::classify_pairs(&uniform_pairs(pairs))?))
}

/// Post-selected marked state of `oracle`, classified against `relation`.
fn classify_simulated(
    oracle: &MarkedOracle,
    relation: &WitnessRelation,
    cap: u32,
) -> Result<RandomnessClass, PipelineError> {
    let state = quantum::prepare_superposition(oracle.s_values(), oracle.w_values(), cap)?;
    let marked = quantum::post_select_flag(quantum::apply_marking(state, oracle)?)?;
    Ok(round_class(classifier::classify(&marked, relation)?))
}

struct QuantumOutcome {
    check: QuantumCheck,
    classification: RandomnessClass,
}

fn quantum_stage(
    sequence: &Sequence,
    witnesses: &[u64],
    assigned: &[(u64, u64)],
    effective: &WitnessRelation,
    options: &AnalysisOptions,
) -> Result<QuantumOutcome, PipelineError> {
    let n = sequence.len();
    let m = witnesses.len();
    let support = n * m;
    let marked = assigned.len();
    let skip_with = |reason: String, cap_exceeded: bool| -> Result<QuantumOutcome, PipelineError> {
        let mut check = QuantumCheck::skipped(reason, support, marked, n, m);
        check.cap_exceeded = cap_exceeded;
        Ok(QuantumOutcome { check, classification: classify_from_pairs(assigned)? })
    };
    let skip = |reason: String| skip_with(reason, false);
    if !options.quantum {
        return skip("quantum stage disabled".to_owned());
    }
    if assigned.is_empty() {
        return skip("nothing to amplify: empty satisfying set".to_owned());
    }
    let oracle = MarkedOracle::from_pairs(sequence.elements(), witnesses, assigned, "assigned witness")?;
    let layout = match oracle.layout(options.qubit_cap) {
        Ok(l) if l.total_qubits() + options.phase_bits <= options.qubit_cap => l,
        Ok(l) => {
            return skip_with(
                format!(
                    "registers need {} qubits plus {} phase bits, above the cap of {}",
                    l.total_qubits(),
                    options.phase_bits,
                    options.qubit_cap
                ),
                true,
            )
        }
        Err(e @ QuantumError::CapExceeded { .. }) => return skip_with(e.to_string(), true),
        Err(e) => return Err(e.into()),
    };

    let classification = classify_simulated(&oracle, effective, options.qubit_cap)?;

    let k = quantum::grover_iterations_optimal(support as u64, marked as u64)?;
    let start = quantum::prepare_superposition(sequence.elements(), witnesses, options.qubit_cap)?;
    let amplified = quantum::grover_amplify(start, &oracle, k)?;
    let success = quantum::marked_probability(&amplified, &oracle);
    let selected = quantum::post_select_flag(quantum::apply_marking(amplified, &oracle)?)?;
    let mut support_pairs: Vec<(u64, u64)> =
        selected.entries().iter().filter(|e| e.3.norm() > 1e-12).map(|e| (e.0, e.1)).collect();
    support_pairs.sort_unstable();
    let mut expected = assigned.to_vec();
    expected.sort_unstable();

    let mut count = quantum::quantum_count(&oracle, options.phase_bits, options.qubit_cap)?;
    count.estimated_m = sig12(count.estimated_m);
    count.probability = sig12(count.probability);
    let bound = quantum::counting_error_bound(support as u64, marked as u64, options.phase_bits);
    let shortcut = quantum::amplitude_sum_count(&oracle, options.qubit_cap)?;

    Ok(QuantumOutcome {
        check: QuantumCheck {
            ran: true,
            skipped_reason: None,
            cap_exceeded: false,
            layout: Some(layout),
            support_size: support,
            marked_pairs: marked,
            pairs_per_element: Rational::new(marked as u64, assigned.len() as u64),
            unnormalized_prefactor_log2: -((n + m) as f64) / 2.0,
            normalization: sig12(1.0 / (support as f64).sqrt()),
            grover_iterations: Some(k),
            grover_success_probability: Some(sig12(success)),
            grover_closed_form: Some(sig12(quantum::grover_success_probability(support as u64, marked as u64, k))),
            amplified_support_matches: Some(support_pairs == expected),
            count: Some(count),
            count_error_bound: Some(sig12(bound)),
            amplitude_sum_count: Some(sig12(shortcut)),
        },
        classification,
    })
}

/// Full analysis: bitstring, witness relation, covers, paradox, verdict,
/// quantum cross-checks and randomness classification.
pub fn analyze(
    sequence: &Sequence,
    question: &Question,
    options: &AnalysisOptions,
) -> Result<RandomnessReport, PipelineError> {
    question.validate()?;
    let bitstring = build_bitstring(sequence, question)?;
    let satisfying = satisfying_set(sequence, question)?;
    let relation = relation_for(sequence, question)?;
    let q = relation.targets().len();

    let oracle_mismatch = {
        let fp: Vec<u64> = relation.targets().iter().copied().filter(|t| !satisfying.elements().contains(t)).collect();
        let fn_: Vec<u64> =
            satisfying.elements().iter().copied().filter(|s| relation.targets().binary_search(s).is_err()).collect();
        (!fp.is_empty() || !fn_.is_empty()).then_some(OracleMismatch { false_positives: fp, false_negatives: fn_ })
    };

    let coverable = relation.without_uncovered();
    let paradox = paradox_detect(&coverable, options.exact_threshold)?;
    let assignment = unique_witness_assignment(&coverable);
    let verdict = minimizer::compressibility_verdict(&relation, q, options.exact_threshold)?;
    let witnesses = verdict.witnesses.clone();

    // each target gets its smallest witness in the final set (itself if none)
    let assigned: Vec<(u64, u64)> = relation
        .targets()
        .iter()
        .map(|&t| {
            let w = if verdict.paradox {
                t
            } else {
                relation
                    .witnesses_of(t)
                    .unwrap_or_default()
                    .into_iter()
                    .find(|w| witnesses.binary_search(w).is_ok())
                    .unwrap_or(t)
            };
            (t, w)
        })
        .collect();
    let effective = WitnessRelation::from_incidence(
        relation.targets().to_vec(),
        witnesses.clone(),
        assigned
            .iter()
            .map(|(_, w)| vec![witnesses.binary_search(w).expect("assigned witness is in the final set")])
            .collect(),
    )?;

    let coverable = &coverable;
    let pre_stage = || -> Result<Option<RandomnessClass>, PipelineError> {
        if !paradox.paradox {
            return Ok(None);
        }
        let simulated = options
            .quantum
            .then(|| MarkedOracle::from_relation(sequence.elements(), coverable.candidates(), coverable).ok())
            .flatten()
            .filter(|o| o.layout(options.qubit_cap).is_ok())
            .map(|o| classify_simulated(&o, coverable, options.qubit_cap));
        match simulated {
            Some(result) => result.map(Some),
            None => {
                let raw_pairs: Vec<(u64, u64)> = coverable
                    .targets()
                    .iter()
                    .zip(coverable.incidence())
                    .flat_map(|(&t, row)| row.iter().map(move |&j| (t, coverable.candidates()[j])))
                    .collect();
                classify_from_pairs(&raw_pairs).map(Some)
            }
        }
    };
    let assignment_stage = || -> Result<Option<RandomnessClass>, PipelineError> {
        if paradox.paradox && assignment.saturating {
            classify_from_pairs(&assignment.pairs).map(Some)
        } else {
            Ok(None)
        }
    };

    let (outcome, pre, via_assignment) = if options.jobs > 1 {
        std::thread::scope(|scope| {
            let pre = scope.spawn(pre_stage);
            let via = scope.spawn(assignment_stage);
            let outcome = quantum_stage(sequence, &witnesses, &assigned, &effective, options);
            (outcome, pre.join().expect("worker panicked"), via.join().expect("worker panicked"))
        })
    } else {
        (quantum_stage(sequence, &witnesses, &assigned, &effective, options), pre_stage(), assignment_stage())
    };
    let outcome = outcome?;

    let mut min_cover = paradox.min_cover.clone();
    min_cover.certificate = min_cover.certificate.map(|c| c.replace(char::is_control, " "));

    Ok(RandomnessReport {
        sequence: SequenceSummary {
            label: sequence.label().to_owned(),
            length: sequence.len(),
            min: sequence.min(),
            max: sequence.max(),
        },
        question: question.descriptor(),
        bitstring: bitstring.to_text(),
        bitstring_popcount: bitstring.popcount(),
        q,
        relation: RelationSummary {
            oracle: relation.oracle_descriptor().to_owned(),
            targets: q,
            candidates: relation.candidates().to_vec(),
            candidate_pool_size: relation.candidate_pool().len(),
            marked_pairs: relation.pair_count(),
            coverage: coverage_check(&relation),
        },
        oracle_mismatch,
        min_cover,
        exact_cover: paradox.exact_cover.clone(),
        assignment,
        paradox: ParadoxSummary {
            detected: paradox.paradox,
            narrative: paradox.narrative.clone(),
            discard_steps: paradox.discard_steps.clone(),
        },
        compression_ratio: Rational::new(verdict.m as u64, verdict.q as u64),
        verdict,
        assigned_pairs: assigned,
        quantum: outcome.check,
        classification: outcome.classification,
        pre_resolution_classification: pre?,
        assignment_classification: via_assignment?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    /// Informational, not a defect.
    Note,
    Inconsistency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub message: String,
}

impl Finding {
    fn note(message: impl Into<String>) -> Self {
        Finding { kind: FindingKind::Note, message: message.into() }
    }

    fn inconsistency(message: impl Into<String>) -> Self {
        Finding { kind: FindingKind::Inconsistency, message: message.into() }
    }
}

/// Consistency findings for a finished report; empty means every check held.
pub fn cross_check(report: &RandomnessReport) -> Vec<Finding> {
    let mut findings = Vec::new();
    let v = &report.verdict;

    if report.oracle_mismatch.is_none() && report.bitstring_popcount != report.q {
        findings.push(Finding::inconsistency(format!(
            "bitstring has {} ones but the relation has {} targets",
            report.bitstring_popcount, report.q
        )));
    }
    if v.q != report.q {
        findings.push(Finding::inconsistency(format!("verdict q={} differs from report q={}", v.q, report.q)));
    }
    if CompressionRegime::from_counts(v.m, v.q) != v.regime {
        findings.push(Finding::inconsistency(format!(
            "regime inconsistent with m,q: {:?} for m={}, q={}",
            v.regime, v.m, v.q
        )));
    }
    if report.compression_ratio != Rational::new(v.m as u64, v.q as u64) {
        findings.push(Finding::inconsistency("compression ratio differs from m/q"));
    }
    if v.q > 0 {
        match report.classification.regime {
            Regime::NoRandomness if v.m != 1 => {
                findings.push(Finding::inconsistency(format!("classification NoRandomness but m={}", v.m)))
            }
            Regime::Maximal if v.m != v.q => {
                findings.push(Finding::inconsistency(format!("classification Maximal but m={} != q={}", v.m, v.q)))
            }
            _ => {}
        }
    }

    let qc = &report.quantum;
    if !qc.ran {
        findings.push(Finding::note(format!(
            "quantum stage skipped: {}",
            qc.skipped_reason.as_deref().unwrap_or("unspecified")
        )));
        return findings;
    }
    if let (Some(count), Some(bound)) = (&qc.count, qc.count_error_bound) {
        let classical = qc.marked_pairs as f64;
        if (count.estimated_m - classical).abs() > bound + 1e-9 {
            findings.push(Finding::inconsistency(format!(
                "quantum count {} differs from classical {} by more than {}",
                count.estimated_m, classical, bound
            )));
        }
        if count.exact && count.estimated_m != classical {
            findings.push(Finding::inconsistency("exact quantum count differs from classical count"));
        }
    }
    if qc.pairs_per_element.is_some_and(|r| r.num * report.q as u64 != qc.marked_pairs as u64 * r.den) {
        findings.push(Finding::inconsistency("marked pairs differ from q times pairs per element"));
    }
    if qc.amplified_support_matches == Some(false) {
        findings.push(Finding::inconsistency("Grover-amplified support differs from the assigned pairs"));
    }
    if let (Some(sim), Some(closed)) = (qc.grover_success_probability, qc.grover_closed_form) {
        if (sim - closed).abs() > 1e-9 {
            findings.push(Finding::inconsistency(format!(
                "simulated Grover probability {sim} differs from closed form {closed}"
            )));
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimizer::CoverKind;

    fn opts() -> AnalysisOptions {
        AnalysisOptions::default()
    }

    #[test]
    fn recurrence_example() {
        let r = analyze(&Sequence::range(1, 20).unwrap(), &Question::recurrence(2, 1).unwrap(), &opts()).unwrap();
        assert_eq!((r.verdict.m, r.q), (1, 10));
        assert_eq!(r.classification.regime, Regime::NoRandomness);
        assert!(r.classification.entropy_bits < 1e-9);
        let mismatch = r.oracle_mismatch.as_ref().unwrap();
        assert_eq!(mismatch.false_positives, vec![5, 9, 11, 13, 17, 19]);
        assert!(mismatch.false_negatives.is_empty());
        assert_eq!(r.compression_ratio, Some(Rational { num: 1, den: 10 }));
        assert!(cross_check(&r).is_empty(), "{:?}", cross_check(&r));
    }

    #[test]
    fn composite_example() {
        let r = analyze(&Sequence::range(2, 100).unwrap(), &Question::IsComposite, &opts()).unwrap();
        assert_eq!((r.verdict.m, r.q), (4, 74));
        assert_eq!(r.verdict.regime, CompressionRegime::Compressible);
        assert_eq!(r.min_cover.chosen, vec![2, 3, 5, 7]);
        assert_eq!(r.classification.regime, Regime::Partial);
        assert_eq!(r.classification.block_count(), 4);
        let sizes: Vec<usize> = r.classification.blocks.iter().map(|b| b.elements.len()).collect();
        assert_eq!(sizes, vec![49, 16, 6, 3]);
        assert!(r.oracle_mismatch.is_none());
        assert!(cross_check(&r).is_empty(), "{:?}", cross_check(&r));
    }

    #[test]
    fn mobius_example() {
        let r = analyze(&Sequence::squarefree(20).unwrap(), &Question::MobiusPlusOne, &opts()).unwrap();
        assert!(r.paradox.detected);
        assert_eq!(r.verdict.m, r.q);
        assert_eq!(r.classification.regime, Regime::Maximal);
        assert_eq!(r.pre_resolution_classification.as_ref().unwrap().regime, Regime::NonCanonical);
        // seven semiprimes over six primes: no distinct-witness assignment
        assert!(!r.assignment.saturating);
        assert!(r.assignment_classification.is_none());
        assert_eq!(r.exact_cover.kind, CoverKind::NoCoverExists);
        assert!(cross_check(&r).is_empty(), "{:?}", cross_check(&r));
    }

    #[test]
    fn skipped_quantum_is_a_note() {
        let o = AnalysisOptions { quantum: false, ..opts() };
        let r = analyze(&Sequence::range(2, 100).unwrap(), &Question::IsComposite, &o).unwrap();
        let f = cross_check(&r);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, FindingKind::Note);
        assert!(f[0].message.contains("quantum stage skipped"));
        assert_eq!(r.classification.regime, Regime::Partial);

        let o = AnalysisOptions { qubit_cap: 12, ..opts() };
        let r = analyze(&Sequence::range(2, 100).unwrap(), &Question::IsComposite, &o).unwrap();
        assert!(!r.quantum.ran && r.quantum.cap_exceeded);
    }

    #[test]
    fn tampered_m_is_flagged() {
        let mut r = analyze(&Sequence::range(2, 100).unwrap(), &Question::IsComposite, &opts()).unwrap();
        r.verdict.m = 80;
        let f = cross_check(&r);
        assert!(f.iter().any(|x| x.message.contains("regime inconsistent with m,q")));
    }

    #[test]
    fn other_questions() {
        let s = Sequence::range(1, 30).unwrap();
        let r = analyze(&s, &Question::IsEven, &opts()).unwrap();
        assert_eq!((r.verdict.m, r.q, r.classification.regime), (1, 15, Regime::NoRandomness));
        let r = analyze(&s, &Question::IsPrime, &opts()).unwrap();
        assert_eq!(r.verdict.m, r.q);
        assert_eq!(r.classification.regime, Regime::Maximal);
        let r = analyze(&s, &Question::identity_in([]), &opts()).unwrap();
        assert_eq!((r.q, r.verdict.m), (0, 0));
        assert_eq!(r.classification.regime, Regime::NoRandomness);
        assert_eq!(r.compression_ratio, None);
    }

    #[test]
    fn small_mobius_support_blocks() {
        let r = analyze(&Sequence::squarefree(10).unwrap(), &Question::MobiusPlusOne, &opts()).unwrap();
        assert!(!r.paradox.detected);
        assert_eq!(r.verdict.witnesses, vec![1, 2]);
        assert_eq!(r.classification.regime, Regime::Partial);
        assert!(cross_check(&r).is_empty(), "{:?}", cross_check(&r));
    }

    #[test]
    fn jobs_do_not_change_the_report() {
        let s = Sequence::squarefree(30).unwrap();
        let a = analyze(&s, &Question::MobiusPlusOne, &opts()).unwrap();
        let b = analyze(&s, &Question::MobiusPlusOne, &AnalysisOptions { jobs: 4, ..opts() }).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn report_round_trips() {
        let r = analyze(&Sequence::squarefree(25).unwrap(), &Question::MobiusPlusOne, &opts()).unwrap();
        let back = RandomnessReport::from_json(&r.canonical_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn domain_errors_name_the_stage() {
        let e = analyze(&Sequence::range(1, 10).unwrap(), &Question::MobiusPlusOne, &opts()).unwrap_err();
        assert!(matches!(e, PipelineError::Sequence(SequenceError::Domain { element: 4, .. })));
        assert!(e.to_string().starts_with("sequence stage"));
    }
}
