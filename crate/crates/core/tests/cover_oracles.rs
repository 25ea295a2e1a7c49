use proptest::prelude::*;
use qwitness_core::minimizer::{
    compressibility_verdict, exact_cover, greedy_cover, min_set_cover, paradox_detect, unique_witness_assignment,
    CoverKind, DEFAULT_EXACT_THRESHOLD,
};
use qwitness_core::WitnessRelation;

fn relation(rows: &[Vec<usize>], candidates: usize) -> WitnessRelation {
    WitnessRelation::from_incidence(
        (1..=rows.len() as u64).collect(),
        (0..candidates as u64).map(|j| 100 + j).collect(),
        rows.to_vec(),
    )
    .unwrap()
}

/// Each row is a non-empty set of candidate indices.
fn arb_rows(max_targets: usize, max_candidates: usize) -> impl Strategy<Value = (Vec<Vec<usize>>, usize)> {
    (1..=max_targets, 1..=max_candidates).prop_flat_map(|(t, c)| {
        let row = proptest::collection::btree_set(0..c, 1..=c.min(4)).prop_map(|s| s.into_iter().collect());
        (proptest::collection::vec(row, t), Just(c))
    })
}

fn row_masks(rows: &[Vec<usize>], candidates: usize) -> Vec<u32> {
    (0..candidates)
        .map(|j| rows.iter().enumerate().filter(|(_, r)| r.contains(&j)).fold(0u32, |m, (i, _)| m | 1 << i))
        .collect()
}

/// Smallest subset of candidates covering every row (exactly once when `exact`),
/// lexicographically first among the smallest, by enumeration.
fn brute_cover(rows: &[Vec<usize>], candidates: usize, exact: bool) -> Option<Vec<usize>> {
    let masks = row_masks(rows, candidates);
    let full = (1u32 << rows.len()) - 1;
    let mut best: Option<Vec<usize>> = None;
    for subset in 0u32..1 << candidates {
        let chosen: Vec<usize> = (0..candidates).filter(|j| subset >> j & 1 == 1).collect();
        let mut union = 0u32;
        let mut overlap = false;
        for &j in &chosen {
            overlap |= union & masks[j] != 0;
            union |= masks[j];
        }
        if union != full || (exact && overlap) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => (chosen.len(), &chosen) < (b.len(), b),
        };
        if better {
            best = Some(chosen);
        }
    }
    best
}

/// Maximum matching size by Kuhn's augmenting paths.
fn kuhn(rows: &[Vec<usize>], candidates: usize) -> usize {
    fn augment(u: usize, rows: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &rows[u] {
            if !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|o| augment(o, rows, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; candidates];
    (0..rows.len()).filter(|&u| augment(u, rows, &mut vec![false; candidates], &mut owner)).count()
}

fn values(indices: &[usize]) -> Vec<u64> {
    indices.iter().map(|&j| 100 + j as u64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn min_cover_matches_enumeration((rows, c) in arb_rows(12, 10)) {
        let rel = relation(&rows, c);
        let got = min_set_cover(&rel, DEFAULT_EXACT_THRESHOLD).unwrap();
        let want = brute_cover(&rows, c, false).unwrap();
        prop_assert_eq!(got.kind, CoverKind::ExactMinimumCover);
        prop_assert_eq!(&got.chosen, &values(&want));
        prop_assert!(got.covers(&rel, false));
    }

    #[test]
    fn greedy_never_beats_exact((rows, c) in arb_rows(12, 10)) {
        let rel = relation(&rows, c);
        let greedy = greedy_cover(&rel).unwrap();
        let exact = min_set_cover(&rel, DEFAULT_EXACT_THRESHOLD).unwrap();
        prop_assert!(greedy.covers(&rel, false));
        prop_assert!(greedy.m >= exact.m);
        prop_assert_eq!(greedy.kind, CoverKind::GreedyCover);
    }

    #[test]
    fn exact_cover_matches_enumeration((rows, c) in arb_rows(10, 9)) {
        let rel = relation(&rows, c);
        let got = exact_cover(&rel).unwrap();
        match brute_cover(&rows, c, true) {
            Some(want) => {
                prop_assert_eq!(got.kind, CoverKind::ExactCover);
                prop_assert_eq!(&got.chosen, &values(&want));
                prop_assert!(got.covers(&rel, true));
            }
            None => prop_assert_eq!(got.kind, CoverKind::NoCoverExists),
        }
    }

    #[test]
    fn matching_size_matches_kuhn((rows, c) in arb_rows(12, 10)) {
        let rel = relation(&rows, c);
        let a = unique_witness_assignment(&rel);
        prop_assert_eq!(a.pairs.len(), kuhn(&rows, c));
        prop_assert_eq!(a.saturating, a.pairs.len() == rows.len());
        let mut used: Vec<u64> = a.pairs.iter().map(|p| p.1).collect();
        used.sort_unstable();
        used.dedup();
        prop_assert_eq!(used.len(), a.pairs.len());
        for &(t, w) in &a.pairs {
            prop_assert!(rel.marks(t, w));
        }
    }

    #[test]
    fn cover_size_ignores_row_order((rows, c) in arb_rows(10, 8), seed in any::<u64>()) {
        let mut shuffled = rows.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        let a = min_set_cover(&relation(&rows, c), DEFAULT_EXACT_THRESHOLD).unwrap();
        let b = min_set_cover(&relation(&shuffled, c), DEFAULT_EXACT_THRESHOLD).unwrap();
        prop_assert_eq!(a.m, b.m);
        let pa = paradox_detect(&relation(&rows, c), DEFAULT_EXACT_THRESHOLD).unwrap();
        let pb = paradox_detect(&relation(&shuffled, c), DEFAULT_EXACT_THRESHOLD).unwrap();
        prop_assert_eq!(pa.paradox, pb.paradox);
    }

    #[test]
    fn paradox_definition_holds((rows, c) in arb_rows(10, 8)) {
        let rel = relation(&rows, c);
        let q = rows.len();
        let report = paradox_detect(&rel, DEFAULT_EXACT_THRESHOLD).unwrap();
        let min = brute_cover(&rows, c, false).unwrap().len();
        let exact_small = brute_cover(&rows, c, true).is_some_and(|e| e.len() < q);
        let expected = min < q && rows.iter().all(|r| r.len() >= 2) && !exact_small;
        prop_assert_eq!(report.paradox, expected);

        let verdict = compressibility_verdict(&rel, q, DEFAULT_EXACT_THRESHOLD).unwrap();
        if expected {
            prop_assert_eq!(verdict.m, q);
        } else {
            prop_assert_eq!(verdict.m, min);
        }
    }
}

#[test]
fn above_threshold_falls_back_to_greedy() {
    // 30 targets, each with two private candidates, so nothing collapses
    let rows: Vec<Vec<usize>> = (0..30).map(|i| vec![2 * i, 2 * i + 1]).collect();
    let rel = relation(&rows, 60);
    let got = min_set_cover(&rel, 8).unwrap();
    assert_eq!(got.kind, CoverKind::GreedyCover);
    assert!(got.covers(&rel, false));
    assert!(min_set_cover(&rel, 65).is_err());
}
