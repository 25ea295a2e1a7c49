//! Minimum witness sets and the compressibility verdict.
//!
//! Two formal problems hide behind "the smallest witness set": minimum set
//! cover (every target witnessed at least once) and exact cover (every target
//! witnessed exactly once). Both are solved; the paradox is their divergence.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequence::SatisfyingSet;
use crate::witness::{relation_identity, WitnessRelation};

/// Default exactness threshold for the branch-and-bound cover search.
pub const DEFAULT_EXACT_THRESHOLD: usize = 24;
/// Largest threshold the bitmask search supports.
pub const MAX_EXACT_THRESHOLD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinimizerError {
    #[error("target {0} has no witness; remove uncovered targets first")]
    Uncovered(u64),
    #[error("q = {q} does not match the relation's {targets} targets")]
    CountMismatch { q: usize, targets: usize },
    #[error("exactness threshold {0} exceeds the supported maximum of 64")]
    ThresholdTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverKind {
    ExactMinimumCover,
    GreedyCover,
    ExactCover,
    NoCoverExists,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub chosen: Vec<u64>,
    pub m: usize,
    pub kind: CoverKind,
    pub certificate: Option<String>,
}

impl CoverSolution {
    fn new(chosen: Vec<u64>, kind: CoverKind, certificate: Option<String>) -> Self {
        CoverSolution { m: chosen.len(), chosen, kind, certificate }
    }

    /// Whether `chosen` covers every target of `relation` (each exactly once
    /// when `exactly_once`).
    pub fn covers(&self, relation: &WitnessRelation, exactly_once: bool) -> bool {
        relation.targets().iter().all(|&t| {
            let hits = relation
                .witnesses_of(t)
                .unwrap_or_default()
                .iter()
                .filter(|w| self.chosen.binary_search(w).is_ok())
                .count();
            if exactly_once {
                hits == 1
            } else {
                hits >= 1
            }
        })
    }
}

fn require_covered(relation: &WitnessRelation) -> Result<(), MinimizerError> {
    match relation.targets().iter().zip(relation.incidence()).find(|(_, row)| row.is_empty()) {
        Some((&t, _)) => Err(MinimizerError::Uncovered(t)),
        None => Ok(()),
    }
}

/// Greedy cover: repeatedly take the candidate covering the most uncovered
/// targets, smallest value on ties.
pub fn greedy_cover(relation: &WitnessRelation) -> Result<CoverSolution, MinimizerError> {
    require_covered(relation)?;
    let cover = relation.candidate_cover();
    let mut covered = vec![false; relation.targets().len()];
    let mut remaining = covered.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let (best, gain) = cover
            .iter()
            .enumerate()
            .map(|(j, ts)| (j, ts.iter().filter(|&&t| !covered[t]).count()))
            .fold((usize::MAX, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        debug_assert!(gain > 0);
        for &t in &cover[best] {
            if !covered[t] {
                covered[t] = true;
                remaining -= 1;
            }
        }
        chosen.push(relation.candidates()[best]);
    }
    chosen.sort_unstable();
    Ok(CoverSolution::new(chosen, CoverKind::GreedyCover, None))
}

struct CoverSearch<'a> {
    masks: &'a [u64],
    /// For each residual target bit, the largest candidate position covering it.
    last_cover: Vec<usize>,
    best_gain: Vec<u32>,
    picks: Vec<usize>,
    nodes: u64,
}

impl CoverSearch<'_> {
    /// Lexicographically first set of exactly `k` more candidates, chosen from
    /// positions `>= from`, covering `need`.
    fn search(&mut self, need: u64, from: usize, k: usize) -> bool {
        self.nodes += 1;
        if need == 0 {
            return true;
        }
        if k == 0 || from >= self.masks.len() {
            return false;
        }
        // a needed target whose last covering candidate is behind us is lost
        let mut bits = need;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            if self.last_cover[b] < from {
                return false;
            }
            bits &= bits - 1;
        }
        // best_gain[from] bounds what any single pick can still add
        if (k as u64) * u64::from(self.best_gain[from]) < u64::from(need.count_ones()) {
            return false;
        }
        for j in from..self.masks.len() {
            if self.masks[j] & need == 0 {
                continue;
            }
            self.picks.push(j);
            if self.search(need & !self.masks[j], j + 1, k - 1) {
                return true;
            }
            self.picks.pop();
        }
        false
    }
}

/// Minimum-cardinality witness set covering every target.
///
/// Witnesses that are the sole witness of some target are forced first; the
/// residual instance, with duplicate incidence rows collapsed, is solved
/// exactly by iterative-deepening branch-and-bound when it has at most
/// `exact_threshold` targets and greedily otherwise. Among minimum covers the
/// lexicographically smallest witness set is returned.
pub fn min_set_cover(relation: &WitnessRelation, exact_threshold: usize) -> Result<CoverSolution, MinimizerError> {
    if exact_threshold > MAX_EXACT_THRESHOLD {
        return Err(MinimizerError::ThresholdTooLarge(exact_threshold));
    }
    require_covered(relation)?;
    let candidates = relation.candidates();
    let mut forced: Vec<usize> = relation.incidence().iter().filter(|row| row.len() == 1).map(|row| row[0]).collect();
    forced.sort_unstable();
    forced.dedup();
    let mut is_forced = vec![false; candidates.len()];
    for &j in &forced {
        is_forced[j] = true;
    }
    let mut residual: Vec<Vec<usize>> =
        relation.incidence().iter().filter(|row| !row.iter().any(|&j| is_forced[j])).cloned().collect();
    residual.sort();
    residual.dedup();

    if residual.len() > exact_threshold {
        return greedy_cover(relation);
    }

    // bitmask per free candidate over residual targets
    let free: Vec<usize> = (0..candidates.len()).filter(|&j| !is_forced[j]).collect();
    let mut masks = vec![0u64; free.len()];
    let mut last_cover = vec![0usize; residual.len()];
    for (b, row) in residual.iter().enumerate() {
        for &j in row {
            let pos = free.binary_search(&j).expect("row touches no forced candidate");
            masks[pos] |= 1 << b;
            last_cover[b] = last_cover[b].max(pos);
        }
    }
    let mut best_gain = vec![0u32; free.len() + 1];
    for pos in (0..free.len()).rev() {
        best_gain[pos] = best_gain[pos + 1].max(masks[pos].count_ones());
    }
    let need: u64 = if residual.is_empty() { 0 } else { u64::MAX >> (64 - residual.len()) };
    let mut search = CoverSearch { masks: &masks, last_cover, best_gain, picks: Vec::new(), nodes: 0 };
    let upper = free.len();
    let mut k = 0;
    while !search.search(need, 0, k) {
        k += 1;
        assert!(k <= upper, "a cover always exists once uncovered targets are excluded");
        search.picks.clear();
    }
    let mut chosen: Vec<u64> =
        forced.iter().chain(search.picks.iter().map(|&pos| &free[pos])).map(|&j| candidates[j]).collect();
    chosen.sort_unstable();
    let certificate = format!(
        "{} forced witnesses; residual of {} distinct targets solved by branch-and-bound, no cover of size {} exists ({} nodes)",
        forced.len(),
        residual.len(),
        chosen.len().saturating_sub(1),
        search.nodes
    );
    Ok(CoverSolution::new(chosen, CoverKind::ExactMinimumCover, Some(certificate)))
}

struct ExactSearch<'a> {
    incidence: &'a [Vec<usize>],
    cover: &'a [Vec<usize>],
    covered: Vec<bool>,
    blocked: Vec<u32>,
    picks: Vec<usize>,
    best: Option<Vec<usize>>,
}

impl ExactSearch<'_> {
    fn better(&self, cand: &[usize]) -> bool {
        match &self.best {
            None => true,
            Some(b) => cand.len() < b.len() || (cand.len() == b.len() && cand < b.as_slice()),
        }
    }

    fn run(&mut self) {
        if let Some(b) = &self.best {
            if self.picks.len() > b.len() {
                return;
            }
        }
        // column with fewest live rows
        let mut pick: Option<(usize, usize)> = None;
        for (t, row) in self.incidence.iter().enumerate() {
            if self.covered[t] {
                continue;
            }
            let live = row.iter().filter(|&&c| self.blocked[c] == 0).count();
            if pick.is_none_or(|(_, n)| live < n) {
                pick = Some((t, live));
            }
        }
        let Some((t, live)) = pick else {
            let mut sol = self.picks.clone();
            sol.sort_unstable();
            if self.better(&sol) {
                self.best = Some(sol);
            }
            return;
        };
        if live == 0 {
            return;
        }
        if let Some(b) = &self.best {
            if self.picks.len() + 1 > b.len() {
                return;
            }
        }
        for &c in &self.incidence[t] {
            if self.blocked[c] != 0 {
                continue;
            }
            self.select(c, true);
            self.picks.push(c);
            self.run();
            self.picks.pop();
            self.select(c, false);
        }
    }

    fn select(&mut self, c: usize, on: bool) {
        for &t in &self.cover[c] {
            self.covered[t] = on;
            for &other in &self.incidence[t] {
                if on {
                    self.blocked[other] += 1;
                } else {
                    self.blocked[other] -= 1;
                }
            }
        }
    }
}

/// Minimum-cardinality witness set covering every target exactly once, by
/// exhaustive exact-cover backtracking (Algorithm X, fewest-options column
/// first). Ties go to the lexicographically smallest witness set.
pub fn exact_cover(relation: &WitnessRelation) -> Result<CoverSolution, MinimizerError> {
    require_covered(relation)?;
    let cover = relation.candidate_cover();
    let mut search = ExactSearch {
        incidence: relation.incidence(),
        cover: &cover,
        covered: vec![false; relation.targets().len()],
        blocked: vec![0; relation.candidates().len()],
        picks: Vec::new(),
        best: None,
    };
    search.run();
    Ok(match search.best {
        Some(best) => {
            let chosen = best.iter().map(|&j| relation.candidates()[j]).collect();
            CoverSolution::new(chosen, CoverKind::ExactCover, None)
        }
        None => CoverSolution::new(Vec::new(), CoverKind::NoCoverExists, None),
    })
}

/// An injective target-to-witness assignment, or the best partial one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessAssignment {
    /// True when every target received its own distinct witness.
    pub saturating: bool,
    /// `(target, witness)` pairs of a maximum matching, by target.
    pub pairs: Vec<(u64, u64)>,
}

/// Maximum bipartite matching of targets to distinct witnesses (Hopcroft-Karp).
pub fn unique_witness_assignment(relation: &WitnessRelation) -> WitnessAssignment {
    let adj = relation.incidence();
    let n_left = adj.len();
    let n_right = relation.candidates().len();
    const NIL: usize = usize::MAX;
    let mut match_left = vec![NIL; n_left];
    let mut match_right = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];

    fn bfs(adj: &[Vec<usize>], ml: &[usize], mr: &[usize], dist: &mut [usize]) -> bool {
        let mut queue = VecDeque::new();
        for u in 0..adj.len() {
            if ml[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = mr[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        found
    }

    fn dfs(u: usize, adj: &[Vec<usize>], ml: &mut [usize], mr: &mut [usize], dist: &mut [usize]) -> bool {
        for &v in &adj[u] {
            let w = mr[v];
            if w == NIL || (dist[w] == dist[u] + 1 && dfs(w, adj, ml, mr, dist)) {
                ml[u] = v;
                mr[v] = u;
                return true;
            }
        }
        dist[u] = usize::MAX;
        false
    }

    let mut size = 0;
    while bfs(adj, &match_left, &match_right, &mut dist) {
        for u in 0..n_left {
            if match_left[u] == NIL && dfs(u, adj, &mut match_left, &mut match_right, &mut dist) {
                size += 1;
            }
        }
    }
    let pairs = (0..n_left)
        .filter(|&u| match_left[u] != NIL)
        .map(|u| (relation.targets()[u], relation.candidates()[match_left[u]]))
        .collect();
    WitnessAssignment { saturating: size == n_left, pairs }
}

/// One step of the sequential discard rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardStep {
    pub target: u64,
    pub kept: u64,
    pub discarded: Vec<u64>,
    /// Targets left with no witness by this step.
    pub stranded: Vec<u64>,
}

/// Replays the rule "an element may not keep two witnesses": targets are
/// visited from largest to smallest; each multiply-witnessed target keeps one
/// witness and discards the rest. The kept witness is one whose removal would
/// strand another target if such exists, else the largest.
pub fn discard_trace(relation: &WitnessRelation) -> Vec<DiscardStep> {
    let n_cand = relation.candidates().len();
    let mut alive = vec![true; n_cand];
    let cover = relation.candidate_cover();
    let live_count = |t: usize, alive: &[bool]| relation.incidence()[t].iter().filter(|&&c| alive[c]).count();
    let mut steps = Vec::new();
    for t in (0..relation.targets().len()).rev() {
        let live: Vec<usize> = relation.incidence()[t].iter().copied().filter(|&c| alive[c]).collect();
        if live.len() < 2 {
            continue;
        }
        let sole_elsewhere = |c: usize| cover[c].iter().any(|&o| o != t && live_count(o, &alive) == 1);
        let kept = live
            .iter()
            .rev()
            .copied()
            .find(|&c| sole_elsewhere(c))
            .unwrap_or(*live.last().expect("two or more live witnesses"));
        let before: Vec<bool> = (0..relation.targets().len()).map(|o| live_count(o, &alive) == 0).collect();
        let discarded: Vec<usize> = live.iter().copied().filter(|&c| c != kept).collect();
        for &c in &discarded {
            alive[c] = false;
        }
        let stranded = (0..relation.targets().len())
            .filter(|&o| !before[o] && live_count(o, &alive) == 0)
            .map(|o| relation.targets()[o])
            .collect();
        steps.push(DiscardStep {
            target: relation.targets()[t],
            kept: relation.candidates()[kept],
            discarded: discarded.iter().map(|&c| relation.candidates()[c]).collect(),
            stranded,
        });
    }
    steps
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadoxReport {
    pub paradox: bool,
    pub narrative: String,
    pub min_cover: CoverSolution,
    pub exact_cover: CoverSolution,
    pub discard_steps: Vec<DiscardStep>,
}

/// Detects the witness paradox: a cover smaller than the target set exists,
/// every target has at least two witnesses, and yet no exact cover smaller
/// than the target set exists.
pub fn paradox_detect(relation: &WitnessRelation, exact_threshold: usize) -> Result<ParadoxReport, MinimizerError> {
    let min_cover = min_set_cover(relation, exact_threshold)?;
    let exact = exact_cover(relation)?;
    let q = relation.targets().len();
    let compress_signal = min_cover.m < q;
    let excess_signal = !relation.is_empty() && relation.incidence().iter().all(|row| row.len() >= 2);
    let no_small_exact = exact.kind == CoverKind::NoCoverExists || exact.m >= q;
    let paradox = compress_signal && excess_signal && no_small_exact;
    let steps = discard_trace(relation);

    let mut narrative = format!(
        "minimum cover m={} ({:?}) vs q={q}; exact cover: {}; ",
        min_cover.m,
        min_cover.kind,
        match exact.kind {
            CoverKind::NoCoverExists => "none".to_owned(),
            _ => format!("m={}", exact.m),
        }
    );
    if paradox {
        narrative.push_str("every target has several witnesses and every witness serves several targets, yet no single-witness choice covers all targets. Discard chain: ");
        let chain: Vec<String> = steps
            .iter()
            .map(|st| {
                let mut s = format!("{} keeps {} and discards {:?}", st.target, st.kept, st.discarded);
                if !st.stranded.is_empty() {
                    s.push_str(&format!(", stranding {:?}", st.stranded));
                }
                s
            })
            .collect();
        narrative.push_str(&chain.join("; "));
    } else if !compress_signal {
        narrative.push_str("no paradox: no cover is smaller than the target set");
    } else if !excess_signal {
        narrative.push_str("no paradox: some target has a single witness");
    } else {
        narrative.push_str("no paradox: an exact cover smaller than the target set exists");
    }
    Ok(ParadoxReport { paradox, narrative, min_cover, exact_cover: exact, discard_steps: steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompressionRegime {
    Compressible,
    Incompressible,
    Overcomplete,
}

impl CompressionRegime {
    pub fn from_counts(m: usize, q: usize) -> Self {
        match m.cmp(&q) {
            std::cmp::Ordering::Less => CompressionRegime::Compressible,
            std::cmp::Ordering::Equal => CompressionRegime::Incompressible,
            std::cmp::Ordering::Greater => CompressionRegime::Overcomplete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressibilityVerdict {
    pub m: usize,
    pub q: usize,
    pub regime: CompressionRegime,
    pub paradox: bool,
    /// Witness set behind `m`, after any paradox resolution.
    pub witnesses: Vec<u64>,
    pub notes: String,
}

/// Compares the minimum witness count with `q`.
///
/// Targets without any oracle witness witness themselves and add one each to
/// `m`. When the paradox fires, the identity relation (W = S_Q) replaces the
/// oracle relation and `m = q`.
pub fn compressibility_verdict(
    relation: &WitnessRelation,
    q: usize,
    exact_threshold: usize,
) -> Result<CompressibilityVerdict, MinimizerError> {
    if q != relation.targets().len() {
        return Err(MinimizerError::CountMismatch { q, targets: relation.targets().len() });
    }
    let coverable = relation.without_uncovered();
    let uncovered: Vec<u64> = relation
        .targets()
        .iter()
        .zip(relation.incidence())
        .filter(|(_, row)| row.is_empty())
        .map(|(&t, _)| t)
        .collect();
    let report = paradox_detect(&coverable, exact_threshold)?;
    let mut notes = Vec::new();
    if q == 0 {
        notes.push("empty satisfying set: trivially no randomness".to_owned());
    }
    if !uncovered.is_empty() {
        notes.push(format!("uncovered targets witness themselves: {uncovered:?}"));
    }
    if report.min_cover.kind == CoverKind::GreedyCover {
        notes.push("m is a greedy upper bound, not a proven minimum".to_owned());
    }
    let (m, witnesses) = if report.paradox {
        let identity = relation_identity(&SatisfyingSet::new(relation.targets().to_vec()));
        notes.push("paradox: witness set replaced by the satisfying set itself".to_owned());
        (q, identity.candidates().to_vec())
    } else {
        let mut w = report.min_cover.chosen.clone();
        w.extend(&uncovered);
        w.sort_unstable();
        w.dedup();
        (w.len(), w)
    };
    Ok(CompressibilityVerdict {
        m,
        q,
        regime: CompressionRegime::from_counts(m, q),
        paradox: report.paradox,
        witnesses,
        notes: notes.join("; "),
    })
}
