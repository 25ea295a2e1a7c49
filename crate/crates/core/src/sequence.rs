//! Sequences, questions, and the answer bitstring `B = Q(s_1)...Q(s_n)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::number_theory::{self, MobiusValue, NumberTheoryError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("sequence must be non-empty")]
    Empty,
    #[error("sequence elements must be positive; found 0")]
    NonPositive,
    #[error("sequence must be strictly ascending: {prev} is followed by {next}")]
    NotAscending { prev: u64, next: u64 },
    #[error("range [{start}, {end}] is empty")]
    EmptyRange { start: u64, end: u64 },
    #[error("recurrence question needs p >= 2 and 0 <= q < p, got p={p}, q={q}")]
    BadRecurrence { p: u64, q: u64 },
    #[error("element {element} is outside the question's domain: {reason}")]
    Domain { element: u64, reason: String },
    #[error(transparent)]
    NumberTheory(#[from] NumberTheoryError),
}

/// An ordered, strictly ascending, non-empty list of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    label: String,
    elements: Vec<u64>,
}

impl Sequence {
    pub fn new(label: impl Into<String>, elements: Vec<u64>) -> Result<Self, SequenceError> {
        if elements.is_empty() {
            return Err(SequenceError::Empty);
        }
        if elements[0] == 0 {
            return Err(SequenceError::NonPositive);
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(SequenceError::NotAscending { prev: w[0], next: w[1] });
        }
        Ok(Sequence { label: label.into(), elements })
    }

    /// The integers `start..=end`.
    pub fn range(start: u64, end: u64) -> Result<Self, SequenceError> {
        if start > end {
            return Err(SequenceError::EmptyRange { start, end });
        }
        Sequence::new(format!("range[{start},{end}]"), (start..=end).collect())
    }

    /// The first `n` squarefree positive integers.
    pub fn squarefree(n: u64) -> Result<Self, SequenceError> {
        let elements = number_theory::squarefree_support(n)?;
        Sequence::new(format!("squarefree[{n}]"), elements)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.elements.last().expect("non-empty by construction")
    }

    pub fn min(&self) -> u64 {
        self.elements[0]
    }

    pub fn contains(&self, v: u64) -> bool {
        self.elements.binary_search(&v).is_ok()
    }
}

/// A true/false question asked of every sequence element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Question {
    /// Membership in the orbit of `x -> p x + q` from 1.
    RecurrenceMembership {
        p: u64,
        q: u64,
    },
    IsComposite,
    /// Möbius value equal to +1; every element must be squarefree.
    MobiusPlusOne,
    IsEven,
    IsPrime,
    IdentityIn {
        targets: BTreeSet<u64>,
    },
}

impl Question {
    pub fn recurrence(p: u64, q: u64) -> Result<Self, SequenceError> {
        let question = Question::RecurrenceMembership { p, q };
        question.validate()?;
        Ok(question)
    }

    pub fn identity_in(targets: impl IntoIterator<Item = u64>) -> Self {
        Question::IdentityIn { targets: targets.into_iter().collect() }
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        match *self {
            Question::RecurrenceMembership { p, q } if p < 2 || q >= p => Err(SequenceError::BadRecurrence { p, q }),
            _ => Ok(()),
        }
    }

    /// Short stable text naming the question and its parameters.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Question::RecurrenceMembership { p, q } => write!(f, "recurrence(p={p},q={q})"),
            Question::IsComposite => f.write_str("composite"),
            Question::MobiusPlusOne => f.write_str("mobius-plus-one"),
            Question::IsEven => f.write_str("even"),
            Question::IsPrime => f.write_str("prime"),
            Question::IdentityIn { targets } => {
                let items: Vec<String> = targets.iter().map(u64::to_string).collect();
                write!(f, "identity{{{}}}", items.join(","))
            }
        }
    }
}

fn domain(element: u64, reason: impl Into<String>) -> SequenceError {
    SequenceError::Domain { element, reason: reason.into() }
}

fn mobius_plus_one(s: u64) -> Result<bool, SequenceError> {
    match number_theory::mobius(s) {
        Ok(MobiusValue::Zero) => Err(domain(s, "not squarefree (mobius value 0)")),
        Ok(v) => Ok(v == MobiusValue::PlusOne),
        Err(NumberTheoryError::MobiusOfZero) => Err(domain(s, "mobius is undefined at 0")),
        Err(e) => Err(e.into()),
    }
}

/// The exact classical answer of `question` at `s`.
pub fn answer(question: &Question, s: u64) -> Result<bool, SequenceError> {
    question.validate()?;
    match question {
        Question::RecurrenceMembership { p, q } => {
            if s == 0 {
                return Ok(false);
            }
            let orbit = number_theory::recurrence_orbit(*p, *q, s)?;
            Ok(orbit.last() == Some(&s))
        }
        Question::IsComposite => Ok(s >= 4 && !number_theory::is_prime(s)),
        Question::MobiusPlusOne => mobius_plus_one(s),
        Question::IsEven => Ok(s.is_multiple_of(2)),
        Question::IsPrime => Ok(number_theory::is_prime(s)),
        Question::IdentityIn { targets } => Ok(targets.contains(&s)),
    }
}

/// The answer bitstring for a sequence and a question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitString {
    bits: Vec<bool>,
    sequence_label: String,
    question: String,
}

impl BitString {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn sequence_label(&self) -> &str {
        &self.sequence_label
    }

    pub fn question(&self) -> &str {
        &self.question
    }

    /// Compact `'0'`/`'1'` text form.
    pub fn to_text(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// `element,bit` CSV with header, one row per sequence element.
    pub fn to_csv(&self, sequence: &Sequence) -> String {
        let mut out = String::from("element,bit\n");
        for (s, &b) in sequence.elements().iter().zip(&self.bits) {
            out.push_str(&format!("{s},{}\n", u8::from(b)));
        }
        out
    }
}

/// Elements of the sequence that satisfy the question, in sequence order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisfyingSet {
    elements: Vec<u64>,
}

impl SatisfyingSet {
    pub fn new(elements: Vec<u64>) -> Self {
        SatisfyingSet { elements }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn cardinality(&self) -> usize {
        self.elements.len()
    }
}

pub fn build_bitstring(sequence: &Sequence, question: &Question) -> Result<BitString, SequenceError> {
    question.validate()?;
    let bits = match question {
        // one orbit for the whole sequence instead of one per element
        Question::RecurrenceMembership { p, q } => {
            let orbit: BTreeSet<u64> = number_theory::recurrence_orbit(*p, *q, sequence.max())?.into_iter().collect();
            sequence.elements().iter().map(|s| orbit.contains(s)).collect()
        }
        _ => sequence.elements().iter().map(|&s| answer(question, s)).collect::<Result<Vec<_>, _>>()?,
    };
    Ok(BitString { bits, sequence_label: sequence.label().to_owned(), question: question.descriptor() })
}

pub fn satisfying_set(sequence: &Sequence, question: &Question) -> Result<SatisfyingSet, SequenceError> {
    let b = build_bitstring(sequence, question)?;
    Ok(SatisfyingSet::new(sequence.elements().iter().zip(b.bits()).filter_map(|(&s, &bit)| bit.then_some(s)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn answers() {
        assert_eq!(answer(&Question::MobiusPlusOne, 6), Ok(true));
        assert_eq!(answer(&Question::IsEven, 3), Ok(false));
        assert_eq!(answer(&Question::IsComposite, 35), Ok(true));
        assert_eq!(answer(&Question::IsComposite, 1), Ok(false));
        assert!(matches!(answer(&Question::MobiusPlusOne, 12), Err(SequenceError::Domain { element: 12, .. })));
        let rec = Question::recurrence(2, 1).unwrap();
        assert_eq!(answer(&rec, 15), Ok(true));
        assert_eq!(answer(&rec, 9), Ok(false));
        assert_eq!(answer(&rec, 1), Ok(true));
    }

    #[test]
    fn bad_questions_and_sequences() {
        assert!(Question::recurrence(1, 0).is_err());
        assert!(Question::recurrence(3, 3).is_err());
        assert_eq!(Sequence::new("x", vec![]), Err(SequenceError::Empty));
        assert_eq!(Sequence::new("x", vec![0, 1]), Err(SequenceError::NonPositive));
        assert_eq!(Sequence::new("x", vec![1, 3, 3]), Err(SequenceError::NotAscending { prev: 3, next: 3 }));
    }

    #[test]
    fn bitstrings() {
        let s = Sequence::range(2, 12).unwrap();
        let b = build_bitstring(&s, &Question::IsComposite).unwrap();
        assert_eq!(b.to_text(), "00101011101");
        let s = Sequence::range(1, 10).unwrap();
        assert_eq!(build_bitstring(&s, &Question::IsEven).unwrap().to_text(), "0101010101");
        let s = Sequence::squarefree(10).unwrap();
        assert_eq!(build_bitstring(&s, &Question::MobiusPlusOne).unwrap().to_text(), "1000101001");
    }

    #[test]
    fn bitstring_error_names_element() {
        let s = Sequence::range(1, 10).unwrap();
        let err = build_bitstring(&s, &Question::MobiusPlusOne).unwrap_err();
        assert!(matches!(err, SequenceError::Domain { element: 4, .. }));
    }

    #[test]
    fn satisfying_sets() {
        let s = Sequence::range(2, 12).unwrap();
        let sq = satisfying_set(&s, &Question::IsComposite).unwrap();
        assert_eq!(sq.elements(), &[4, 6, 8, 9, 10, 12]);
        assert_eq!(sq.cardinality(), 6);
        let s = Sequence::range(1, 10).unwrap();
        assert_eq!(satisfying_set(&s, &Question::identity_in([])).unwrap().cardinality(), 0);
        let s = Sequence::squarefree(10).unwrap();
        let sq = satisfying_set(&s, &Question::MobiusPlusOne).unwrap();
        assert_eq!(sq.elements(), &[1, 6, 10, 14]);
    }

    #[test]
    fn csv_form() {
        let s = Sequence::range(1, 3).unwrap();
        let b = build_bitstring(&s, &Question::IsEven).unwrap();
        assert_eq!(b.to_csv(&s), "element,bit\n1,0\n2,1\n3,0\n");
    }

    fn question_strategy() -> impl Strategy<Value = Question> {
        prop_oneof![
            (2u64..6).prop_flat_map(|p| (Just(p), 0..p)).prop_map(|(p, q)| Question::RecurrenceMembership { p, q }),
            Just(Question::IsComposite),
            Just(Question::IsEven),
            Just(Question::IsPrime),
            proptest::collection::btree_set(1u64..200, 0..20).prop_map(|targets| Question::IdentityIn { targets }),
        ]
    }

    proptest! {
        #[test]
        fn popcount_matches_satisfying_set(start in 1u64..500, len in 1u64..200, q in question_strategy()) {
            let s = Sequence::range(start, start + len - 1).unwrap();
            let b = build_bitstring(&s, &q).unwrap();
            let sq = satisfying_set(&s, &q).unwrap();
            prop_assert_eq!(b.len(), s.len());
            prop_assert_eq!(b.popcount(), sq.cardinality());
            prop_assert_eq!(build_bitstring(&s, &q).unwrap(), b);
        }

        #[test]
        fn recurrence_answer_matches_orbit(p in 2u64..7, qq in 0u64..7, end in 1u64..3000) {
            let q = qq % p;
            let s = Sequence::range(1, end).unwrap();
            let question = Question::RecurrenceMembership { p, q };
            let orbit = number_theory::recurrence_orbit(p, q, end).unwrap();
            let b = build_bitstring(&s, &question).unwrap();
            for (&x, &bit) in s.elements().iter().zip(b.bits()) {
                prop_assert_eq!(bit, orbit.contains(&x));
                prop_assert_eq!(answer(&question, x).unwrap(), bit);
            }
        }
    }
}
