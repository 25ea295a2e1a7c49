//! Bipartite witness relations between satisfying elements and candidate
//! witnesses, one constructor per oracle rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::number_theory::{self, MobiusValue, NumberTheoryError};
use crate::sequence::{SatisfyingSet, Sequence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("recurrence oracle needs p >= 2 and 0 <= q < p, got p={p}, q={q}")]
    BadRecurrence { p: u64, q: u64 },
    #[error("element {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("incidence for target {target} references candidate index {index} (only {candidates} candidates)")]
    BadIndex { target: u64, index: usize, candidates: usize },
    #[error("incidence has {got} rows for {want} targets")]
    RowCount { got: usize, want: usize },
    #[error("{0} must be strictly ascending")]
    Unordered(&'static str),
    #[error(transparent)]
    NumberTheory(#[from] NumberTheoryError),
}

/// The marking rule `Q(s, w)` a relation was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum OracleRule {
    /// `(s mod p) xor w xor 1`: marks `s` when `s mod p = w`.
    Congruence { p: u64 },
    /// `isinteger(s / w)` restricted to `w != s`.
    ProperDivisor,
    /// `isprime(s / w)`.
    PrimeQuotient,
    /// `(s xor w) xor 1`: marks `s` when `s = w`.
    Identity,
    /// Given by an explicit incidence table.
    Table,
}

impl OracleRule {
    pub fn descriptor(&self) -> String {
        match self {
            OracleRule::Congruence { p } => format!("(s mod {p}) xor w xor 1"),
            OracleRule::ProperDivisor => "isinteger(s/w), s != w".to_owned(),
            OracleRule::PrimeQuotient => "isprime(s/w)".to_owned(),
            OracleRule::Identity => "(s xor w) xor 1".to_owned(),
            OracleRule::Table => "explicit incidence table".to_owned(),
        }
    }
}

/// Incidence between targets (elements of S_Q) and candidate witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRelation {
    targets: Vec<u64>,
    candidates: Vec<u64>,
    incidence: Vec<Vec<usize>>,
    rule: OracleRule,
    oracle_descriptor: String,
    /// Full candidate pool before pruning to candidates that witness something.
    candidate_pool: Vec<u64>,
}

fn strictly_ascending(v: &[u64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl WitnessRelation {
    fn assemble(
        targets: Vec<u64>,
        candidates: Vec<u64>,
        incidence: Vec<Vec<usize>>,
        rule: OracleRule,
        candidate_pool: Vec<u64>,
    ) -> Self {
        WitnessRelation { oracle_descriptor: rule.descriptor(), targets, candidates, incidence, rule, candidate_pool }
    }

    /// Builds a relation from an explicit incidence table. Rows are sorted and
    /// deduplicated.
    pub fn from_incidence(
        targets: Vec<u64>,
        candidates: Vec<u64>,
        mut incidence: Vec<Vec<usize>>,
    ) -> Result<Self, WitnessError> {
        if !strictly_ascending(&targets) {
            return Err(WitnessError::Unordered("targets"));
        }
        if !strictly_ascending(&candidates) {
            return Err(WitnessError::Unordered("candidates"));
        }
        if incidence.len() != targets.len() {
            return Err(WitnessError::RowCount { got: incidence.len(), want: targets.len() });
        }
        for (row, &t) in incidence.iter_mut().zip(&targets) {
            row.sort_unstable();
            row.dedup();
            if let Some(&index) = row.iter().find(|&&i| i >= candidates.len()) {
                return Err(WitnessError::BadIndex { target: t, index, candidates: candidates.len() });
            }
        }
        let pool = candidates.clone();
        Ok(Self::assemble(targets, candidates, incidence, OracleRule::Table, pool))
    }

    pub fn targets(&self) -> &[u64] {
        &self.targets
    }

    pub fn candidates(&self) -> &[u64] {
        &self.candidates
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn rule(&self) -> &OracleRule {
        &self.rule
    }

    pub fn oracle_descriptor(&self) -> &str {
        &self.oracle_descriptor
    }

    pub fn candidate_pool(&self) -> &[u64] {
        &self.candidate_pool
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Witness values of `target`, ascending; `None` if it is not a target.
    pub fn witnesses_of(&self, target: u64) -> Option<Vec<u64>> {
        let i = self.targets.binary_search(&target).ok()?;
        Some(self.incidence[i].iter().map(|&j| self.candidates[j]).collect())
    }

    /// For each candidate index, the target indices it witnesses.
    pub fn candidate_cover(&self) -> Vec<Vec<usize>> {
        let mut cover = vec![Vec::new(); self.candidates.len()];
        for (t, row) in self.incidence.iter().enumerate() {
            for &c in row {
                cover[c].push(t);
            }
        }
        cover
    }

    /// Total number of marked (target, witness) pairs.
    pub fn pair_count(&self) -> usize {
        self.incidence.iter().map(Vec::len).sum()
    }

    /// The classical oracle bit `Q(s, w)` for any pair, target or not.
    pub fn marks(&self, s: u64, w: u64) -> bool {
        match self.rule {
            OracleRule::Congruence { p } => s % p == w,
            OracleRule::ProperDivisor => w >= 2 && s != w && s.is_multiple_of(w),
            OracleRule::PrimeQuotient => {
                w >= 1 && s.is_multiple_of(w) && {
                    let r = s / w;
                    number_theory::is_prime(r) && !w.is_multiple_of(r)
                }
            }
            OracleRule::Identity => s == w,
            OracleRule::Table => self.witnesses_of(s).is_some_and(|ws| ws.binary_search(&w).is_ok()),
        }
    }

    /// The sub-relation on the given targets (those not present are ignored),
    /// with candidates pruned to the ones still witnessing something.
    pub fn restrict_to(&self, keep: &[u64]) -> WitnessRelation {
        let rows: Vec<usize> = (0..self.targets.len()).filter(|&i| keep.contains(&self.targets[i])).collect();
        self.rebuild(&rows)
    }

    /// The sub-relation without targets that have no witness.
    pub fn without_uncovered(&self) -> WitnessRelation {
        let rows: Vec<usize> = (0..self.targets.len()).filter(|&i| !self.incidence[i].is_empty()).collect();
        self.rebuild(&rows)
    }

    fn rebuild(&self, rows: &[usize]) -> WitnessRelation {
        let mut used: Vec<usize> = rows.iter().flat_map(|&i| self.incidence[i].iter().copied()).collect();
        used.sort_unstable();
        used.dedup();
        let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let incidence = rows.iter().map(|&i| self.incidence[i].iter().map(|c| remap[c]).collect()).collect();
        WitnessRelation {
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
            candidates: used.iter().map(|&c| self.candidates[c]).collect(),
            incidence,
            rule: self.rule.clone(),
            oracle_descriptor: self.oracle_descriptor.clone(),
            candidate_pool: self.candidate_pool.clone(),
        }
    }
}

/// Relation for the affine-recurrence question under the mod-p oracle.
///
/// The single candidate `q` marks every `s` with `s mod p = q`, which is not
/// the same set as the orbit members.
pub fn relation_recurrence(sequence: &Sequence, p: u64, q: u64) -> Result<WitnessRelation, WitnessError> {
    if p < 2 || q >= p {
        return Err(WitnessError::BadRecurrence { p, q });
    }
    let targets: Vec<u64> = sequence.elements().iter().copied().filter(|s| s % p == q).collect();
    let incidence = vec![vec![0]; targets.len()];
    Ok(WitnessRelation::assemble(targets, vec![q], incidence, OracleRule::Congruence { p }, vec![q]))
}

/// Relation for compositeness with the primes up to `floor(sqrt(max S))` as
/// candidates.
pub fn relation_composite(sequence: &Sequence) -> WitnessRelation {
    let n = sequence.max();
    let candidates = number_theory::primes_upto(number_theory::isqrt(n));
    let targets: Vec<u64> =
        sequence.elements().iter().copied().filter(|&s| s >= 4 && !number_theory::is_prime(s)).collect();
    let incidence = targets
        .iter()
        .map(|&s| candidates.iter().enumerate().filter(|&(_, &w)| s != w && s % w == 0).map(|(j, _)| j).collect())
        .collect();
    let pool = candidates.clone();
    WitnessRelation::assemble(targets, candidates, incidence, OracleRule::ProperDivisor, pool)
}

/// Relation for the Möbius(+1) question with the Möbius(-1) elements of the
/// sequence as candidate pool.
pub fn relation_mobius(sequence: &Sequence) -> Result<WitnessRelation, WitnessError> {
    let mut pool = Vec::new();
    let mut targets = Vec::new();
    for &s in sequence.elements() {
        match number_theory::mobius(s)? {
            MobiusValue::Zero => return Err(WitnessError::NotSquarefree(s)),
            MobiusValue::MinusOne => pool.push(s),
            MobiusValue::PlusOne => targets.push(s),
        }
    }
    // t witnesses s iff s / t is prime: enumerate s / p for each prime p | s
    let mut raw: Vec<Vec<u64>> = Vec::with_capacity(targets.len());
    for &s in &targets {
        let mut ws: Vec<u64> = number_theory::factorize(s)?
            .iter()
            .map(|&(p, _)| s / p)
            .filter(|t| pool.binary_search(t).is_ok())
            .collect();
        ws.sort_unstable();
        raw.push(ws);
    }
    let mut candidates: Vec<u64> = raw.iter().flatten().copied().collect();
    candidates.sort_unstable();
    candidates.dedup();
    let incidence = raw
        .iter()
        .map(|ws| ws.iter().map(|w| candidates.binary_search(w).expect("collected above")).collect())
        .collect();
    Ok(WitnessRelation::assemble(targets, candidates, incidence, OracleRule::PrimeQuotient, pool))
}

/// Every satisfying element witnesses itself.
pub fn relation_identity(satisfying: &SatisfyingSet) -> WitnessRelation {
    let mut targets = satisfying.elements().to_vec();
    targets.sort_unstable();
    targets.dedup();
    let incidence = (0..targets.len()).map(|i| vec![i]).collect();
    WitnessRelation::assemble(targets.clone(), targets.clone(), incidence, OracleRule::Identity, targets)
}

/// Anomalies in a relation's incidence structure.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageReport {
    pub uncovered: Vec<u64>,
    /// `(target, witness count)` for targets with more than one witness.
    pub multiply_witnessed: Vec<(u64, usize)>,
    /// `(candidate, target count)` for candidates witnessing more than one target.
    pub shared_witnesses: Vec<(u64, usize)>,
}

impl CoverageReport {
    pub fn is_clean(&self) -> bool {
        self.uncovered.is_empty() && self.multiply_witnessed.is_empty() && self.shared_witnesses.is_empty()
    }
}

pub fn coverage_check(relation: &WitnessRelation) -> CoverageReport {
    let mut report = CoverageReport::default();
    for (&t, row) in relation.targets.iter().zip(&relation.incidence) {
        match row.len() {
            0 => report.uncovered.push(t),
            1 => {}
            k => report.multiply_witnessed.push((t, k)),
        }
    }
    for (j, covered) in relation.candidate_cover().iter().enumerate() {
        if covered.len() > 1 {
            report.shared_witnesses.push((relation.candidates[j], covered.len()));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{satisfying_set, Question};

    #[test]
    fn recurrence_relation() {
        let r = relation_recurrence(&Sequence::range(1, 10).unwrap(), 2, 1).unwrap();
        assert_eq!(r.candidates(), &[1]);
        assert_eq!(r.targets(), &[1, 3, 5, 7, 9]);
        assert!(r.incidence().iter().all(|row| row == &[0]));

        let r = relation_recurrence(&Sequence::new("evens", vec![2, 4, 6]).unwrap(), 2, 1).unwrap();
        assert!(r.is_empty());

        let s = Sequence::range(1, 60).unwrap();
        let r = relation_recurrence(&s, 3, 2).unwrap();
        let expected: Vec<u64> = (2..=59).step_by(3).collect();
        assert_eq!(r.targets(), expected.as_slice());
        // the oracle misses x_0 = 1 and marks non-orbit members
        assert_eq!(number_theory::recurrence_orbit(3, 2, 60).unwrap(), vec![1, 5, 17, 53]);
        assert!(!r.targets().contains(&1));
        assert!(r.targets().contains(&8));
        assert!(relation_recurrence(&s, 3, 3).is_err());
    }

    #[test]
    fn composite_relation() {
        let r = relation_composite(&Sequence::range(2, 100).unwrap());
        assert_eq!(r.candidates(), &[2, 3, 5, 7]);
        assert_eq!(r.witnesses_of(49), Some(vec![7]));
        assert_eq!(r.witnesses_of(30), Some(vec![2, 3, 5]));
        assert_eq!(r.witnesses_of(7), None);
        assert_eq!(r.targets().len(), 74);
        let r = relation_composite(&Sequence::new("p", vec![2, 3, 5, 7]).unwrap());
        assert!(r.is_empty());
    }

    #[test]
    fn mobius_relation() {
        let s = Sequence::squarefree(25).unwrap();
        assert!(s.contains(35));
        assert_eq!(Sequence::squarefree(23).unwrap().max(), 35);
        let r = relation_mobius(&s).unwrap();
        assert_eq!(r.witnesses_of(35), Some(vec![5, 7]));
        assert_eq!(r.witnesses_of(21), Some(vec![3, 7]));
        assert_eq!(r.witnesses_of(15), Some(vec![3, 5]));
        assert_eq!(r.witnesses_of(1), Some(vec![]));
        assert!(r.candidate_pool().len() >= r.candidates().len());
        assert!(r.candidates().iter().all(|c| r.candidate_pool().contains(c)));
        assert_eq!(relation_mobius(&Sequence::range(1, 5).unwrap()), Err(WitnessError::NotSquarefree(4)));
    }

    #[test]
    fn identity_relation() {
        let r = relation_identity(&SatisfyingSet::new(vec![1, 6, 10, 14]));
        assert_eq!(r.targets(), r.candidates());
        assert_eq!(r.incidence(), &[vec![0], vec![1], vec![2], vec![3]]);
        assert!(relation_identity(&SatisfyingSet::new(vec![])).is_empty());
        let r = relation_identity(&SatisfyingSet::new(vec![42]));
        assert_eq!(r.witnesses_of(42), Some(vec![42]));
    }

    #[test]
    fn coverage() {
        let s = Sequence::squarefree(25).unwrap();
        let report = coverage_check(&relation_mobius(&s).unwrap());
        assert_eq!(report.uncovered, vec![1]);
        for t in [15, 21, 35] {
            assert!(report.multiply_witnessed.iter().any(|&(x, k)| x == t && k == 2));
        }
        for w in [3, 5, 7] {
            assert!(report.shared_witnesses.iter().any(|&(x, _)| x == w));
        }

        let r = relation_identity(&SatisfyingSet::new(vec![1, 6]));
        assert!(coverage_check(&r).is_clean());

        let r = relation_composite(&Sequence::range(2, 100).unwrap());
        assert!(coverage_check(&r).shared_witnesses.contains(&(2, 49)));
    }

    #[test]
    fn restriction() {
        let s = Sequence::squarefree(25).unwrap();
        let r = relation_mobius(&s).unwrap().restrict_to(&[15, 21, 35]);
        assert_eq!(r.targets(), &[15, 21, 35]);
        assert_eq!(r.candidates(), &[3, 5, 7]);
        assert_eq!(r.incidence(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        let full = relation_mobius(&s).unwrap().without_uncovered();
        assert!(!full.targets().contains(&1));
    }

    #[test]
    fn explicit_tables() {
        let r = WitnessRelation::from_incidence(vec![6, 10], vec![2, 3, 5], vec![vec![1, 0, 0], vec![2, 0]]).unwrap();
        assert_eq!(r.incidence(), &[vec![0, 1], vec![0, 2]]);
        assert!(r.marks(6, 3) && !r.marks(10, 3) && !r.marks(7, 2));
        assert!(WitnessRelation::from_incidence(vec![6], vec![2], vec![vec![1]]).is_err());
        assert!(WitnessRelation::from_incidence(vec![6, 6], vec![2], vec![vec![0], vec![0]]).is_err());
    }

    #[test]
    fn marks_agree_with_incidence() {
        let s = Sequence::range(2, 120).unwrap();
        let relations = [
            relation_composite(&s),
            relation_recurrence(&s, 3, 1).unwrap(),
            relation_mobius(&Sequence::squarefree(60).unwrap()).unwrap(),
            relation_identity(&satisfying_set(&s, &Question::IsPrime).unwrap()),
        ];
        for r in &relations {
            for (&t, row) in r.targets().iter().zip(r.incidence()) {
                for (j, &w) in r.candidates().iter().enumerate() {
                    assert_eq!(r.marks(t, w), row.contains(&j), "{} {t} {w}", r.oracle_descriptor());
                }
            }
        }
    }

    #[test]
    fn mobius_witness_count_is_omega() {
        let s = Sequence::squarefree(400).unwrap();
        let r = relation_mobius(&s).unwrap();
        for (&t, row) in r.targets().iter().zip(r.incidence()) {
            if t == 1 {
                continue;
            }
            let omega = number_theory::factorize(t).unwrap().len();
            assert_eq!(omega % 2, 0);
            // every s/p is below s, squarefree, and has mobius -1, so it is in S
            assert_eq!(row.len(), omega, "{t}");
        }
    }
}
