use std::path::Path;

use qwitness_core::minimizer::{
    exact_cover, greedy_cover, min_set_cover, paradox_detect, unique_witness_assignment, ParadoxReport,
    WitnessAssignment,
};
use qwitness_core::pipeline::relation_for;
use qwitness_core::quantum::{self, AmplitudeEntry, CountEstimate, MarkedOracle, RegisterLayout};
use qwitness_core::report::{sig12, SequenceSummary};
use qwitness_core::sequence::build_bitstring;
use qwitness_core::witness::{coverage_check, CoverageReport};
use qwitness_core::{analyze, cross_check, CoverSolution, FindingKind, RandomnessReport, RunMetadata, Sequence};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;

#[derive(Serialize)]
struct Envelope<'a, T> {
    report: &'a T,
    run: RunMetadata,
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Writes the JSON envelope and, when requested, the CSV companion.
fn emit<T: Serialize>(config: &RunConfig, body: &T, csv: Option<String>) -> Result<(), CliError> {
    let format = config.format();
    let out = config.out.as_deref();
    if format != OutputFormat::Json && csv.is_none() {
        return Err(CliError::Config("CSV output is only available for analyze".into()));
    }
    if format == OutputFormat::Both && out.is_none() {
        return Err(CliError::Config("--format both needs --out".into()));
    }
    if format != OutputFormat::Csv {
        let envelope = Envelope { report: body, run: RunMetadata::now() };
        let json = serde_json::to_string_pretty(&envelope).expect("report serializes");
        write_text(out, &json)?;
    }
    if let Some(csv) = csv.filter(|_| format != OutputFormat::Json) {
        let csv_path = match (format, out) {
            (OutputFormat::Both, Some(p)) => Some(p.with_extension("csv")),
            _ => out.map(Path::to_path_buf),
        };
        write_text(csv_path.as_deref(), csv.trim_end())?;
    }
    Ok(())
}

fn sequence_summary(s: &Sequence) -> SequenceSummary {
    SequenceSummary { label: s.label().to_owned(), length: s.len(), min: s.min(), max: s.max() }
}

pub fn run_analysis(config: &RunConfig, env_cap: Option<u32>) -> Result<RandomnessReport, CliError> {
    let sequence = config.sequence()?;
    let question = config.question(&sequence)?;
    let options = config.options(env_cap)?;
    let report = analyze(&sequence, &question, &options)?;
    if report.quantum.cap_exceeded {
        return Err(CliError::CapExceeded(format!(
            "{}; rerun with --no-quantum or a larger --qubit-cap",
            report.quantum.skipped_reason.as_deref().unwrap_or("qubit cap exceeded")
        )));
    }
    Ok(report)
}

pub fn analyze_cmd(config: &RunConfig, env_cap: Option<u32>) -> Result<(), CliError> {
    let report = run_analysis(config, env_cap)?;
    for finding in cross_check(&report) {
        let tag = match finding.kind {
            FindingKind::Note => "note",
            FindingKind::Inconsistency => "warning",
        };
        eprintln!("{tag}: {}", finding.message);
    }
    let sequence = config.sequence()?;
    let csv = build_bitstring(&sequence, &config.question(&sequence)?)
        .map_err(|e| CliError::Domain(e.to_string()))?
        .to_csv(&sequence);
    emit(config, &report, Some(csv))
}

#[derive(Serialize)]
struct IncidenceRow {
    target: u64,
    witnesses: Vec<u64>,
}

#[derive(Serialize)]
struct WitnessBody {
    sequence: SequenceSummary,
    question: String,
    oracle: String,
    candidates: Vec<u64>,
    candidate_pool_size: usize,
    incidence: Vec<IncidenceRow>,
    coverage: CoverageReport,
    min_cover: CoverSolution,
    greedy_cover: CoverSolution,
    exact_cover: CoverSolution,
    assignment: WitnessAssignment,
    paradox: ParadoxReport,
}

pub fn witness_cmd(config: &RunConfig, env_cap: Option<u32>) -> Result<(), CliError> {
    let sequence = config.sequence()?;
    let question = config.question(&sequence)?;
    let options = config.options(env_cap)?;
    let relation = relation_for(&sequence, &question)?;
    let coverable = relation.without_uncovered();
    let domain = |e: qwitness_core::minimizer::MinimizerError| CliError::Domain(e.to_string());
    let body = WitnessBody {
        sequence: sequence_summary(&sequence),
        question: question.descriptor(),
        oracle: relation.oracle_descriptor().to_owned(),
        candidates: relation.candidates().to_vec(),
        candidate_pool_size: relation.candidate_pool().len(),
        incidence: relation
            .targets()
            .iter()
            .map(|&t| IncidenceRow { target: t, witnesses: relation.witnesses_of(t).unwrap_or_default() })
            .collect(),
        coverage: coverage_check(&relation),
        min_cover: min_set_cover(&coverable, options.exact_threshold).map_err(domain)?,
        greedy_cover: greedy_cover(&coverable).map_err(domain)?,
        exact_cover: exact_cover(&coverable).map_err(domain)?,
        assignment: unique_witness_assignment(&coverable),
        paradox: paradox_detect(&coverable, options.exact_threshold).map_err(domain)?,
    };
    emit(config, &body, None)
}

#[derive(Serialize)]
struct SimulateBody {
    oracle: String,
    support_size: usize,
    marked: usize,
    layout: RegisterLayout,
    iterations: u64,
    optimal_iterations: u64,
    /// Marked probability after `0..=iterations` rounds.
    trace: Vec<f64>,
    closed_form: Vec<f64>,
    count: CountEstimate,
    count_error_bound: f64,
    state: Option<Vec<AmplitudeEntry>>,
}

fn simulation_oracle(config: &RunConfig) -> Result<MarkedOracle, CliError> {
    match (config.support, config.marked, config.has_sequence()) {
        (Some(_), _, true) | (None, Some(_), true) => {
            Err(CliError::Config("give either a sequence or --support/--marked, not both".into()))
        }
        (Some(n), Some(m), false) => {
            if n == 0 {
                return Err(CliError::Config("--support must be at least 1".into()));
            }
            if m > n {
                return Err(CliError::Domain(format!("--marked {m} exceeds --support {n}")));
            }
            let table = (1..=n).map(|s| s <= m).collect();
            Ok(MarkedOracle::new((1..=n).collect(), vec![1], table, format!("first {m} of {n}"))?)
        }
        (Some(_), None, false) | (None, Some(_), false) => {
            Err(CliError::Config("--support and --marked go together".into()))
        }
        (None, None, _) => {
            let sequence = config.sequence()?;
            let question = config.question(&sequence)?;
            let relation = relation_for(&sequence, &question)?;
            if relation.candidates().is_empty() {
                return Err(CliError::Domain("nothing to amplify: no marked pairs".into()));
            }
            Ok(MarkedOracle::from_relation(sequence.elements(), relation.candidates(), &relation)?)
        }
    }
}

pub fn simulate_cmd(config: &RunConfig, env_cap: Option<u32>) -> Result<(), CliError> {
    let options = config.options(env_cap)?;
    let oracle = simulation_oracle(config)?;
    let (n, m) = (oracle.support_size() as u64, oracle.marked_count() as u64);
    if m == 0 {
        return Err(CliError::Domain("nothing to amplify: no marked pairs".into()));
    }
    let layout = oracle.layout(options.qubit_cap)?;
    let optimal = quantum::grover_iterations_optimal(n, m)?;
    let k = config.iterations.unwrap_or(optimal);
    let trace = quantum::grover_trace(&oracle, k, options.qubit_cap)?;
    let mut count = quantum::quantum_count(&oracle, options.phase_bits, options.qubit_cap)?;
    count.estimated_m = sig12(count.estimated_m);
    count.probability = sig12(count.probability);
    let state = if config.dump_state.unwrap_or(false) {
        let start = quantum::prepare_superposition(oracle.s_values(), oracle.w_values(), options.qubit_cap)?;
        let dump = quantum::grover_amplify(start, &oracle, k)?.dump();
        Some(dump.into_iter().map(|(i, re, im)| (i, sig12(re), sig12(im))).collect())
    } else {
        None
    };
    let body = SimulateBody {
        oracle: oracle.descriptor().to_owned(),
        support_size: n as usize,
        marked: m as usize,
        layout,
        iterations: k,
        optimal_iterations: optimal,
        trace: trace.into_iter().map(sig12).collect(),
        closed_form: (0..=k).map(|i| sig12(quantum::grover_success_probability(n, m, i))).collect(),
        count,
        count_error_bound: sig12(quantum::counting_error_bound(n, m, options.phase_bits)),
        state,
    };
    emit(config, &body, None)
}
