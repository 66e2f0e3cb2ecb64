//! The public committee-sequence rules.
//!
//! Two rules run in polynomial time: the per-level utilitarian rule (each
//! level independently maximizes its committee's total utility; the winner
//! set is the Cartesian product of per-level co-winners, kept in lazy
//! product form) and the greedy egalitarian rule (repeatedly add the
//! (level, candidate) pair that best improves the satisfaction histogram).
//! The remaining four — egalitarian maximin, both weighted refinements,
//! and the histogram-minimizing rule — delegate to the exact solver.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{CommitteeSequence, Election, Level, WeightOrder};
use crate::solver::{solve_all, Objective, SolveAllOutcome, SolveConfig};

/// Identifier of one of the six rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RuleId {
    /// Per-level utilitarian optimum.
    Sum,
    /// Definition-2 greedy histogram improvement.
    Greedy,
    /// Egalitarian maximin (maximize the minimum agent score).
    Egal,
    /// Weighted refinement prioritizing agent-min, then level-min, then sum.
    Als,
    /// Weighted refinement prioritizing agent-min, then sum, then level-min.
    Asl,
    /// Lexicographic minimization of the satisfaction histogram.
    Lex,
}

impl RuleId {
    pub const ALL: [RuleId; 6] = [
        RuleId::Sum,
        RuleId::Greedy,
        RuleId::Egal,
        RuleId::Als,
        RuleId::Asl,
        RuleId::Lex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Sum => "SUM",
            RuleId::Greedy => "GREEDY",
            RuleId::Egal => "EGAL",
            RuleId::Als => "ALS",
            RuleId::Asl => "ASL",
            RuleId::Lex => "LEX",
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<RuleId, String> {
        match s.to_ascii_uppercase().as_str() {
            "SUM" => Ok(RuleId::Sum),
            "GREEDY" => Ok(RuleId::Greedy),
            "EGAL" => Ok(RuleId::Egal),
            "ALS" => Ok(RuleId::Als),
            "ASL" => Ok(RuleId::Asl),
            "LEX" => Ok(RuleId::Lex),
            _ => Err(format!(
                "unknown rule `{s}` (expected one of SUM, GREEDY, EGAL, ALS, ASL, LEX)"
            )),
        }
    }
}

/// Errors from rule evaluation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RulesError {
    #[error("rule {0} is not solver-backed; call its dedicated entry point")]
    NotExact(RuleId),
}

// ---------------------------------------------------------------------------
// Per-level utilitarian rule
// ---------------------------------------------------------------------------

/// The utilitarian winner set in lazy product form: per level, the
/// committees maximizing the level's total utility are `mandatory` (every
/// candidate whose column sum strictly exceeds the boundary value) plus any
/// `slots`-subset of the `tied` boundary class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumWinners {
    levels: Vec<SumLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SumLevel {
    mandatory: Vec<u32>,
    tied: Vec<u32>,
    slots: usize,
}

impl SumWinners {
    /// Number of winning sequences, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        self.levels.iter().fold(1u128, |acc, l| {
            acc.saturating_mul(binomial_u128(l.tied.len() as u64, l.slots as u64))
        })
    }

    /// The designated single winner: per level, the top-sum candidates with
    /// lowest-index tie-breaking — equivalently, the canonically first
    /// winning sequence.
    pub fn designated(&self) -> CommitteeSequence {
        CommitteeSequence::from_sorted_unchecked(
            self.levels
                .iter()
                .map(|l| {
                    let mut committee = l.mandatory.clone();
                    committee.extend_from_slice(&l.tied[..l.slots]);
                    committee.sort_unstable();
                    committee
                })
                .collect(),
        )
    }

    /// Whether `x` is a winning sequence.
    pub fn contains(&self, x: &CommitteeSequence) -> bool {
        if x.committees().len() != self.levels.len() {
            return false;
        }
        self.levels.iter().zip(x.committees()).all(|(l, committee)| {
            committee.len() == l.mandatory.len() + l.slots
                && l.mandatory.iter().all(|c| committee.contains(c))
                && committee
                    .iter()
                    .filter(|c| !l.mandatory.contains(c))
                    .all(|c| l.tied.contains(c))
        })
    }

    /// Streams the winning sequences in canonical order.
    pub fn iter(&self) -> SumIter<'_> {
        SumIter {
            winners: self,
            positions: Some(
                self.levels
                    .iter()
                    .map(|l| (0..l.slots as u32).collect())
                    .collect(),
            ),
        }
    }

    /// The first `cap` winners in canonical order, plus a completeness flag
    /// (false when the cap truncated the set).
    pub fn materialize(&self, cap: usize) -> (Vec<CommitteeSequence>, bool) {
        let complete = self.count() <= cap as u128;
        (self.iter().take(cap).collect(), complete)
    }
}

/// Iterator over [`SumWinners`] in canonical order.
pub struct SumIter<'a> {
    winners: &'a SumWinners,
    /// Per level, the chosen positions into the tied class.
    positions: Option<Vec<Vec<u32>>>,
}

impl Iterator for SumIter<'_> {
    type Item = CommitteeSequence;

    fn next(&mut self) -> Option<CommitteeSequence> {
        let positions = self.positions.as_mut()?;
        let seq = CommitteeSequence::from_sorted_unchecked(
            self.winners
                .levels
                .iter()
                .zip(positions.iter())
                .map(|(l, pos)| {
                    let mut committee = l.mandatory.clone();
                    committee.extend(pos.iter().map(|&p| l.tied[p as usize]));
                    committee.sort_unstable();
                    committee
                })
                .collect(),
        );
        // Advance the per-level combination odometer, last level fastest.
        let mut t = self.winners.levels.len();
        loop {
            if t == 0 {
                self.positions = None;
                break;
            }
            t -= 1;
            let width = self.winners.levels[t].tied.len() as u32;
            if next_combination(&mut self.positions.as_mut().unwrap()[t], width) {
                break;
            }
        }
        Some(seq)
    }
}

fn next_combination(combo: &mut [u32], width: u32) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < width - (k - i) as u32 {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    for (j, slot) in combo.iter_mut().enumerate() {
        *slot = j as u32;
    }
    false
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The per-level utilitarian rule: every level's committee independently
/// maximizes the committee's total utility over all agents.
pub fn rule_sum(e: &Election) -> SumWinners {
    let levels = e
        .levels()
        .iter()
        .map(|level| {
            let m = level.width();
            let k = level.k();
            let mut order: Vec<u32> = (0..m as u32).collect();
            // Top-k by column sum, lowest index first among equals.
            order.sort_by_key(|&c| (std::cmp::Reverse(level.column_sum(c as usize)), c));
            if k == 0 {
                return SumLevel {
                    mandatory: Vec::new(),
                    tied: Vec::new(),
                    slots: 0,
                };
            }
            let boundary = level.column_sum(order[k - 1] as usize);
            let mut mandatory: Vec<u32> = (0..m as u32)
                .filter(|&c| level.column_sum(c as usize) > boundary)
                .collect();
            mandatory.sort_unstable();
            let tied: Vec<u32> = (0..m as u32)
                .filter(|&c| level.column_sum(c as usize) == boundary)
                .collect();
            SumLevel {
                slots: k - mandatory.len(),
                mandatory,
                tied,
            }
        })
        .collect();
    SumWinners { levels }
}

// ---------------------------------------------------------------------------
// Greedy rule
// ---------------------------------------------------------------------------

/// Operation counters backing the polynomial-time claim: one step per
/// candidate added, one pair evaluation per (level, candidate) considered
/// in a step, and one score update per agent touched by an evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GreedyCounters {
    pub steps: u64,
    pub pair_evaluations: u64,
    pub score_updates: u64,
}

/// Everything the greedy rule produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOutcome {
    /// The valid sequence: committees padded back to the election's `k_t`
    /// with lowest-index zero-utility candidates (which change no score).
    pub sequence: CommitteeSequence,
    /// The literal committees before padding (per level, sorted), whose
    /// sizes are the effective committee sizes below.
    pub unpadded: Vec<Vec<u32>>,
    /// Per level, `min(k_t, |supported candidates|)`.
    pub effective_k: Vec<usize>,
    /// The (level, candidate) additions in pick order.
    pub trace: Vec<(usize, u32)>,
    pub counters: GreedyCounters,
}

struct GreedyBase {
    /// Per level, candidates with positive total support, ascending.
    supported: Vec<Vec<u32>>,
    effective_k: Vec<usize>,
    /// Committees after the pre-seeding step (levels whose support count
    /// equals the effective size start full).
    committees: Vec<Vec<u32>>,
    scores: Vec<u64>,
}

fn greedy_base(e: &Election) -> GreedyBase {
    let n = e.num_agents();
    let mut supported = Vec::with_capacity(e.num_levels());
    let mut effective_k = Vec::with_capacity(e.num_levels());
    let mut committees = Vec::with_capacity(e.num_levels());
    let mut scores = vec![0u64; n];
    for level in e.levels() {
        let sup: Vec<u32> = (0..level.width() as u32)
            .filter(|&c| level.column_sum(c as usize) > 0)
            .collect();
        let eff = level.k().min(sup.len());
        let committee = if sup.len() == eff {
            for a in 0..n {
                for &c in &sup {
                    scores[a] += level.utility(a, c as usize);
                }
            }
            sup.clone()
        } else {
            Vec::new()
        };
        supported.push(sup);
        effective_k.push(eff);
        committees.push(committee);
    }
    GreedyBase {
        supported,
        effective_k,
        committees,
        scores,
    }
}

/// Sorted (ascending) agent scores after hypothetically adding candidate
/// `c` on `level` — larger under lexicographic comparison means a better
/// (lex-smaller) satisfaction histogram.
fn eval_addition(scores: &[u64], level: &Level, c: u32, counters: &mut GreedyCounters) -> Vec<u64> {
    counters.pair_evaluations += 1;
    counters.score_updates += scores.len() as u64;
    let mut v: Vec<u64> = scores
        .iter()
        .enumerate()
        .map(|(a, &s)| s + level.utility(a, c as usize))
        .collect();
    v.sort_unstable();
    v
}

/// Pads Definition-2 committees back to the election's committee sizes
/// with lowest-index zero-support candidates.
fn pad_committees(e: &Election, committees: &[Vec<u32>]) -> CommitteeSequence {
    let padded = committees
        .iter()
        .enumerate()
        .map(|(t, committee)| {
            let level = e.level(t);
            let mut full = committee.clone();
            let mut c = 0u32;
            while full.len() < level.k() {
                if level.column_sum(c as usize) == 0 && !committee.contains(&c) {
                    full.push(c);
                }
                c += 1;
            }
            full.sort_unstable();
            full
        })
        .collect();
    CommitteeSequence::from_sorted_unchecked(padded)
}

/// The greedy egalitarian rule: after pre-seeding levels whose supported
/// candidates exactly fill their (effectively lowered) committees, it
/// repeatedly adds the positively-supported (level, candidate) pair whose
/// addition yields the lexicographically smallest satisfaction histogram,
/// breaking ties by level order and then candidate order.
pub fn rule_greedy(e: &Election) -> GreedyOutcome {
    let mut base = greedy_base(e);
    let mut counters = GreedyCounters::default();
    let mut trace = Vec::new();
    loop {
        let mut best: Option<(Vec<u64>, usize, u32)> = None;
        for t in 0..e.num_levels() {
            if base.committees[t].len() >= base.effective_k[t] {
                continue;
            }
            for &c in &base.supported[t] {
                if base.committees[t].contains(&c) {
                    continue;
                }
                let v = eval_addition(&base.scores, e.level(t), c, &mut counters);
                // Strict improvement keeps the first (level, candidate)
                // among ties.
                if best.as_ref().map_or(true, |(bv, _, _)| v > *bv) {
                    best = Some((v, t, c));
                }
            }
        }
        let Some((_, t, c)) = best else { break };
        counters.steps += 1;
        for a in 0..e.num_agents() {
            base.scores[a] += e.level(t).utility(a, c as usize);
        }
        base.committees[t].push(c);
        base.committees[t].sort_unstable();
        trace.push((t, c));
    }
    let sequence = pad_committees(e, &base.committees);
    GreedyOutcome {
        sequence,
        unpadded: base.committees,
        effective_k: base.effective_k,
        trace,
        counters,
    }
}

/// All sequences the greedy rule can produce under any tie-breaking,
/// explored depth-first with memoization of visited incomplete states.
pub fn rule_greedy_all(e: &Election, config: &SolveConfig) -> GreedyAllOutcome {
    struct Walk<'a> {
        e: &'a Election,
        supported: &'a [Vec<u32>],
        effective_k: &'a [usize],
        memo: HashSet<Vec<Vec<u32>>>,
        winners: BTreeSet<CommitteeSequence>,
        cap: usize,
        capped: bool,
        deadline: Option<Instant>,
        stopped: bool,
    }

    impl Walk<'_> {
        fn dfs(&mut self, committees: &mut Vec<Vec<u32>>, scores: &mut Vec<u64>) {
            if self.capped || self.stopped {
                return;
            }
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    self.stopped = true;
                    return;
                }
            }
            if !self.memo.insert(committees.clone()) {
                return;
            }
            let mut counters = GreedyCounters::default();
            let mut best: Option<Vec<u64>> = None;
            let mut picks: Vec<(usize, u32)> = Vec::new();
            for t in 0..self.e.num_levels() {
                if committees[t].len() >= self.effective_k[t] {
                    continue;
                }
                for &c in &self.supported[t] {
                    if committees[t].contains(&c) {
                        continue;
                    }
                    let v = eval_addition(scores, self.e.level(t), c, &mut counters);
                    match &best {
                        Some(bv) if v < *bv => {}
                        Some(bv) if v == *bv => picks.push((t, c)),
                        _ => {
                            best = Some(v);
                            picks.clear();
                            picks.push((t, c));
                        }
                    }
                }
            }
            if picks.is_empty() {
                self.winners.insert(pad_committees(self.e, committees));
                if self.winners.len() >= self.cap {
                    self.capped = true;
                }
                return;
            }
            for (t, c) in picks {
                for a in 0..self.e.num_agents() {
                    scores[a] += self.e.level(t).utility(a, c as usize);
                }
                let at = committees[t].binary_search(&c).unwrap_err();
                committees[t].insert(at, c);
                self.dfs(committees, scores);
                committees[t].remove(at);
                for a in 0..self.e.num_agents() {
                    scores[a] -= self.e.level(t).utility(a, c as usize);
                }
            }
        }
    }

    let base = greedy_base(e);
    let mut walk = Walk {
        e,
        supported: &base.supported,
        effective_k: &base.effective_k,
        memo: HashSet::new(),
        winners: BTreeSet::new(),
        cap: config.winner_cap.max(1),
        capped: false,
        deadline: config.time_budget.map(|b| Instant::now() + b),
        stopped: false,
    };
    let mut committees = base.committees.clone();
    let mut scores = base.scores.clone();
    walk.dfs(&mut committees, &mut scores);
    GreedyAllOutcome {
        winners: walk.winners.into_iter().collect(),
        complete: !walk.capped && !walk.stopped,
    }
}

/// Winner set of the greedy search tree, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyAllOutcome {
    pub winners: Vec<CommitteeSequence>,
    /// False when the winner cap or the time budget cut the search short.
    pub complete: bool,
}

// ---------------------------------------------------------------------------
// Solver-backed rules
// ---------------------------------------------------------------------------

/// Winner-set enumeration for the solver-backed rules (egalitarian maximin,
/// both weighted refinements, and the histogram rule).
pub fn rule_exact(
    e: &Election,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<SolveAllOutcome, RulesError> {
    let objective = exact_objective(rule)?;
    Ok(solve_all(e, objective, config))
}

fn exact_objective(rule: RuleId) -> Result<Objective, RulesError> {
    match rule {
        RuleId::Egal => Ok(Objective::AgentMin),
        RuleId::Als => Ok(Objective::Weighted(WeightOrder::Als)),
        RuleId::Asl => Ok(Objective::Weighted(WeightOrder::Asl)),
        RuleId::Lex => Ok(Objective::Lex(Default::default())),
        RuleId::Sum | RuleId::Greedy => Err(RulesError::NotExact(rule)),
    }
}

/// A rule's winner set with a trust flag, for any of the six rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerSet {
    /// Winners in canonical order.
    pub winners: Vec<CommitteeSequence>,
    /// True when this is provably the complete winner set (no cap or
    /// budget interfered).
    pub complete: bool,
}

/// Uniform all-winners entry point across the six rules.
pub fn winner_set(e: &Election, rule: RuleId, config: &SolveConfig) -> WinnerSet {
    match rule {
        RuleId::Sum => {
            let (winners, complete) = rule_sum(e).materialize(config.winner_cap.max(1));
            WinnerSet { winners, complete }
        }
        RuleId::Greedy => {
            let out = rule_greedy_all(e, config);
            WinnerSet {
                winners: out.winners,
                complete: out.complete,
            }
        }
        _ => {
            let out = rule_exact(e, rule, config).expect("solver-backed rule");
            WinnerSet {
                winners: out.winners,
                complete: out.complete && out.optimal,
            }
        }
    }
}

/// Uniform single-winner entry point: the rule's deterministic designated
/// winner, plus whether it is trustworthy (false only when a budget stopped
/// a solver-backed rule early).
pub fn single_winner(e: &Election, rule: RuleId, config: &SolveConfig) -> (CommitteeSequence, bool) {
    match rule {
        RuleId::Sum => (rule_sum(e).designated(), true),
        RuleId::Greedy => (rule_greedy(e).sequence, true),
        _ => {
            let objective = exact_objective(rule).expect("solver-backed rule");
            let out = crate::solver::solve_one(e, objective, config);
            (out.winner, out.optimal)
        }
    }
}
