//! Run configuration: a JSON document mirroring the command-line flags.

use std::path::{Path, PathBuf};

use qwitness_core::minimizer::{DEFAULT_EXACT_THRESHOLD, MAX_EXACT_THRESHOLD};
use qwitness_core::quantum::{DEFAULT_PHASE_BITS, DEFAULT_QUBIT_CAP};
use qwitness_core::{AnalysisOptions, Question, Sequence};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CAP_ENV: &str = "QWITNESS_QUBIT_CAP";
/// Largest cap accepted; a state vector of 2^30 amplitudes is 16 GiB.
pub const MAX_QUBIT_CAP: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionKind {
    Recurrence,
    Composite,
    MobiusPlusOne,
    Even,
    Prime,
    Identity,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Both,
}

/// Every field is optional so a config file and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub range: Option<(u64, u64)>,
    pub list: Option<Vec<u64>>,
    pub squarefree: Option<u64>,
    pub question: Option<QuestionKind>,
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub targets: Option<Vec<u64>>,
    pub qubit_cap: Option<u32>,
    pub phase_bits: Option<u32>,
    pub exact_threshold: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub quantum: Option<bool>,
    pub jobs: Option<usize>,
    /// simulate: synthetic oracle over `N` support points
    pub support: Option<u64>,
    /// simulate: marked points of the synthetic oracle
    pub marked: Option<u64>,
    /// simulate: Grover rounds to trace
    pub iterations: Option<u64>,
    /// simulate: include the final state's amplitudes
    pub dump_state: Option<bool>,
}

macro_rules! layer {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $(if $top.$field.is_some() { $base.$field = $top.$field; })*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` overridden by every field set in `flags`. A sequence given by
    /// flags replaces the file's sequence entirely.
    pub fn merged_with(mut self, flags: RunConfig) -> Self {
        if flags.range.is_some() || flags.list.is_some() || flags.squarefree.is_some() {
            self.range = None;
            self.list = None;
            self.squarefree = None;
        }
        if flags.support.is_some() || flags.marked.is_some() {
            self.support = None;
            self.marked = None;
        }
        layer!(self, flags; range, list, squarefree, question, p, q, targets, qubit_cap, phase_bits,
            exact_threshold, out, format, quantum, jobs, support, marked, iterations, dump_state);
        self
    }

    pub fn has_sequence(&self) -> bool {
        self.range.is_some() || self.list.is_some() || self.squarefree.is_some()
    }

    pub fn sequence(&self) -> Result<Sequence, CliError> {
        let given = [self.range.is_some(), self.list.is_some(), self.squarefree.is_some()];
        match given.iter().filter(|&&b| b).count() {
            0 => return Err(CliError::Config("no sequence given; use --range, --list or --squarefree".into())),
            1 => {}
            _ => return Err(CliError::Config("give exactly one of --range, --list, --squarefree".into())),
        }
        let sequence = if let Some((a, b)) = self.range {
            Sequence::range(a, b)
        } else if let Some(list) = &self.list {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return Err(CliError::Config("--list values must be distinct".into()));
            }
            Sequence::new(format!("list[{}]", list.len()), sorted)
        } else {
            Sequence::squarefree(self.squarefree.expect("checked above"))
        };
        sequence.map_err(|e| CliError::Domain(e.to_string()))
    }

    pub fn question(&self, sequence: &Sequence) -> Result<Question, CliError> {
        let kind = self.question.ok_or_else(|| CliError::Config("no question given; use --question".into()))?;
        if kind != QuestionKind::Recurrence && (self.p.is_some() || self.q.is_some()) {
            return Err(CliError::Config("--p and --q apply only to --question recurrence".into()));
        }
        if kind != QuestionKind::Identity && self.targets.is_some() {
            return Err(CliError::Config("--targets applies only to --question identity".into()));
        }
        Ok(match kind {
            QuestionKind::Recurrence => {
                let (Some(p), Some(q)) = (self.p, self.q) else {
                    return Err(CliError::Config("--question recurrence needs both --p and --q".into()));
                };
                Question::recurrence(p, q).map_err(|e| CliError::Domain(e.to_string()))?
            }
            QuestionKind::Composite => Question::IsComposite,
            QuestionKind::MobiusPlusOne => Question::MobiusPlusOne,
            QuestionKind::Even => Question::IsEven,
            QuestionKind::Prime => Question::IsPrime,
            QuestionKind::Identity => match &self.targets {
                Some(t) => Question::identity_in(t.iter().copied()),
                None => Question::identity_in(sequence.elements().iter().copied()),
            },
        })
    }

    /// Options with defaults filled in, the cap clamped by the environment
    /// ceiling `env_cap`.
    pub fn options(&self, env_cap: Option<u32>) -> Result<AnalysisOptions, CliError> {
        let mut cap = self.qubit_cap.unwrap_or(DEFAULT_QUBIT_CAP);
        if !(1..=MAX_QUBIT_CAP).contains(&cap) {
            return Err(CliError::Config(format!("--qubit-cap must be between 1 and {MAX_QUBIT_CAP}, got {cap}")));
        }
        if let Some(ceiling) = env_cap {
            cap = cap.min(ceiling);
        }
        let phase_bits = self.phase_bits.unwrap_or(DEFAULT_PHASE_BITS);
        if !(1..=20).contains(&phase_bits) {
            return Err(CliError::Config(format!("--phase-bits must be between 1 and 20, got {phase_bits}")));
        }
        let exact_threshold = self.exact_threshold.unwrap_or(DEFAULT_EXACT_THRESHOLD);
        if exact_threshold > MAX_EXACT_THRESHOLD {
            return Err(CliError::Config(format!(
                "--exact-threshold must be at most {MAX_EXACT_THRESHOLD}, got {exact_threshold}"
            )));
        }
        let jobs = self.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        Ok(AnalysisOptions { qubit_cap: cap, phase_bits, exact_threshold, quantum: self.quantum.unwrap_or(true), jobs })
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }
}

/// Parses the ceiling from the environment value, if set.
pub fn env_cap(value: Option<String>) -> Result<Option<u32>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<u32>() {
            Ok(c) if c >= 1 => Ok(Some(c)),
            _ => Err(CliError::Config(format!("{CAP_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}
