//! Exact optimization engine for the non-polynomial rules.
//!
//! A single depth-first branch-and-bound walker underlies everything here.
//! It extends partial committee sequences level by level and, within a
//! level, candidate by candidate in canonical (ascending index) order, so
//! leaves are reached in canonical sequence order. Admissible optimistic
//! bounds prune subtrees:
//!
//! * per agent, the current score plus the exact best completion (top-`r`
//!   utilities in the rest of the current level, plus the full top-`k_t`
//!   of every future level) bounds that agent's final score from above;
//! * the same construction on column sums bounds every level's score and
//!   the grand total.
//!
//! The minimum over agents of the per-agent bounds is an upper bound on
//! the egalitarian objective; for the weighted objectives the bound triple
//! is compared lexicographically in the priority order (sound because the
//! exact weights make the weighted objective order the priority order, and
//! a component-wise bound dominates every completion component-wise); for
//! the histogram objective only the min-agent bound gates pruning at
//! internal nodes, and full histograms are compared at leaves only — via
//! ascending sorted score vectors, which order identically.
//!
//! Three histogram backends are provided: the direct branch-and-bound, a
//! staged solver that minimizes histogram windows left to right freezing
//! earlier counts as exact constraints, and a rounds solver that repeatedly
//! maximizes the lowest unaccounted score and then minimizes its
//! multiplicity. All three agree on the winning histogram.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use crate::model::{CommitteeSequence, Election, ScoreTriple, WeightOrder};

/// Backend used for the histogram-minimizing objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LexBackend {
    /// Direct branch-and-bound over full histograms.
    #[default]
    Direct,
    /// Window-by-window minimization with frozen prefixes between stages.
    Staged,
    /// Round-by-round: maximize the lowest unaccounted score, then
    /// minimize its multiplicity, fixing both before the next round.
    Rounds,
}

/// The optimization target of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximize the minimum agent score.
    AgentMin,
    /// Maximize the weighted objective with the given priority order.
    Weighted(WeightOrder),
    /// Lexicographically minimize the satisfaction histogram.
    Lex(LexBackend),
}

/// Budgets and knobs for a solve.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Maximum number of winners [`solve_all`] may return.
    pub winner_cap: usize,
    /// Wall-clock budget for the whole solve.
    pub time_budget: Option<Duration>,
    /// Search-node budget for the whole solve.
    pub node_budget: Option<u64>,
    /// Histogram window width for the staged backend; `None` picks
    /// [`default_lex_window`] of the agent count.
    pub lex_window: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            winner_cap: 30,
            time_budget: Some(Duration::from_secs(10)),
            node_budget: None,
            lex_window: None,
        }
    }
}

impl SolveConfig {
    /// A configuration with no time or node budget, for exhaustive runs.
    pub fn unbounded() -> SolveConfig {
        SolveConfig {
            winner_cap: usize::MAX,
            time_budget: None,
            node_budget: None,
            lex_window: None,
        }
    }
}

/// Default histogram window width for the staged backend, chosen so that
/// `(n + 1)^window` stays below 10^17: `max(1, floor(17 ln 10 / ln(n+1)) - 1)`.
pub fn default_lex_window(n: usize) -> usize {
    let w = (17.0 * std::f64::consts::LN_10 / ((n as f64) + 1.0).ln()).floor() as i64 - 1;
    w.max(1) as usize
}

/// Result of a single-winner solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub winner: CommitteeSequence,
    /// False when a time or node budget stopped the search early, in which
    /// case `winner` is the best incumbent rather than a proven optimum.
    pub optimal: bool,
    /// Search nodes expanded.
    pub nodes: u64,
}

/// Result of a winner-set enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveAllOutcome {
    /// Winners in canonical order.
    pub winners: Vec<CommitteeSequence>,
    /// True when the set is provably the whole winner set; false when the
    /// winner cap or a budget stopped the enumeration first.
    pub complete: bool,
    /// False when a budget interrupted the underlying optimization, in
    /// which case the returned sequences may not be true optima.
    pub optimal: bool,
    pub nodes: u64,
}

/// Returns one optimal valid sequence for the objective; among co-optimal
/// sequences, the first in canonical order. Infeasible elections are
/// unrepresentable (construction rejects `k` above the candidate count), so
/// the only failure mode is budget exhaustion, reported via `optimal`.
pub fn solve_one(e: &Election, objective: Objective, config: &SolveConfig) -> SolveOutcome {
    match objective {
        Objective::AgentMin => best_solve(e, Goal::AgentMin, config),
        Objective::Weighted(order) => best_solve(e, Goal::from_order(order), config),
        Objective::Lex(LexBackend::Direct) => best_solve(e, Goal::Lex, config),
        Objective::Lex(LexBackend::Staged) => staged_lex_solve(e, config),
        Objective::Lex(LexBackend::Rounds) => rounds_lex_solve(e, config),
    }
}

/// Enumerates every optimal sequence for the objective, in canonical order,
/// up to `config.winner_cap`. The enumeration first establishes the optimal
/// value, then collects all leaves attaining it; each collected sequence
/// differs from every earlier one in at least one candidate on some level,
/// which is exactly the exclusion constraint of iterative re-solving.
pub fn solve_all(e: &Election, objective: Objective, config: &SolveConfig) -> SolveAllOutcome {
    let started = Instant::now();
    let first = solve_one(e, objective, config);
    if !first.optimal {
        return SolveAllOutcome {
            winners: vec![first.winner],
            complete: false,
            optimal: false,
            nodes: first.nodes,
        };
    }
    let goal = match objective {
        Objective::AgentMin => Goal::AgentMin,
        Objective::Weighted(order) => Goal::from_order(order),
        Objective::Lex(_) => Goal::Lex,
    };
    let ctx = Ctx::new(e);
    let target = target_value(e, &first.winner, goal);
    let cap = config.winner_cap.max(1);
    let mut search = Search::new(&ctx, Mode::Collect { cap }, goal, config);
    // The budgets cover the whole solve, so the collection phase gets what
    // the optimization phase left over.
    search.ctl.deadline = config
        .time_budget
        .map(|b| Instant::now() + b.saturating_sub(started.elapsed()));
    search.ctl.node_budget = config.node_budget.map(|b| b.saturating_sub(first.nodes));
    search.target = Some(target);
    search.run();
    let stopped = search.ctl.stopped;
    let capped = search.capped;
    let winners = if search.winners.is_empty() {
        // A budget can interrupt collection before it re-reaches the known
        // winner; never return an empty set when an optimum is in hand.
        vec![first.winner]
    } else {
        search.winners
    };
    SolveAllOutcome {
        winners,
        complete: !capped && !stopped,
        optimal: true,
        nodes: first.nodes + search.ctl.nodes,
    }
}

/// Staged histogram backend: minimizes histogram windows left to right,
/// freezing each minimized window's counts as exact constraints on later
/// stages. With a window of at least `Z + 1` this is a single stage and
/// coincides with the direct solve; any window yields the same histogram.
pub fn staged_lex_solve(e: &Election, config: &SolveConfig) -> SolveOutcome {
    let ctx = Ctx::new(e);
    let z = e.z_max() as usize;
    let window = config.lex_window.unwrap_or_else(|| default_lex_window(e.num_agents())).max(1);
    let mut nodes = 0u64;
    let mut winner: Option<CommitteeSequence> = None;
    let mut frozen: Vec<(u64, u64)> = Vec::new();
    let mut accounted = 0u64;
    let mut lo = 0usize;
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    loop {
        let hi = (lo + window).min(z + 1);
        let mut search = Search::new(&ctx, Mode::Stage { lo: lo as u64, hi: hi as u64 }, Goal::Lex, config);
        search.ctl.deadline = deadline;
        search.ctl.node_budget = config.node_budget.map(|b| b.saturating_sub(nodes));
        search.frozen = frozen.clone();
        if let Some(w) = &winner {
            // Seed with the previous stage's winner: it satisfies the
            // frozen constraints and gives the stage a pruning incumbent.
            let sorted = sorted_scores(e, w);
            search.best_window = Some(window_counts(&sorted, lo as u64, hi as u64));
            search.best_seq = Some(w.clone());
        }
        search.run();
        nodes += search.ctl.nodes;
        if search.ctl.stopped {
            return SolveOutcome {
                winner: winner
                    .or(search.best_seq)
                    .unwrap_or_else(|| canonical_first(e)),
                optimal: false,
                nodes,
            };
        }
        let stage_winner = search.best_seq.expect("a feasible leaf exists at every stage");
        let counts = search.best_window.expect("window counts recorded with the winner");
        for (offset, &c) in counts.iter().enumerate() {
            if c > 0 {
                frozen.push((lo as u64 + offset as u64, c));
                accounted += c;
            }
        }
        winner = Some(stage_winner);
        if hi > z || accounted == e.num_agents() as u64 {
            // Every score is now pinned (or every agent accounted for, so
            // all later windows are forced to zero).
            return SolveOutcome {
                winner: winner.unwrap(),
                optimal: true,
                nodes,
            };
        }
        lo = hi;
    }
}

/// Rounds histogram backend: each round maximizes the lowest score among
/// agents not yet accounted for, then minimizes how many agents sit at that
/// score, and freezes the resulting (score, multiplicity) block before the
/// next round. Terminates once every agent is accounted for.
pub fn rounds_lex_solve(e: &Election, config: &SolveConfig) -> SolveOutcome {
    let ctx = Ctx::new(e);
    let n = e.num_agents() as u64;
    let mut nodes = 0u64;
    let mut blocks: Vec<(u64, u64)> = Vec::new();
    let mut accounted = 0u64;
    let mut winner: Option<CommitteeSequence> = None;
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    while accounted < n {
        let mut search = Search::new(&ctx, Mode::Round, Goal::Lex, config);
        search.ctl.deadline = deadline;
        search.ctl.node_budget = config.node_budget.map(|b| b.saturating_sub(nodes));
        search.blocks = blocks.clone();
        if let Some(w) = &winner {
            let sorted = sorted_scores(e, w);
            let omega = sorted[accounted as usize];
            let mult = sorted[accounted as usize..]
                .iter()
                .take_while(|&&s| s == omega)
                .count() as u64;
            search.best_round = Some((omega, mult));
            search.best_seq = Some(w.clone());
        }
        search.run();
        nodes += search.ctl.nodes;
        if search.ctl.stopped {
            return SolveOutcome {
                winner: winner
                    .or(search.best_seq)
                    .unwrap_or_else(|| canonical_first(e)),
                optimal: false,
                nodes,
            };
        }
        let (omega, mult) = search.best_round.expect("a feasible leaf exists at every round");
        blocks.push((omega, mult));
        accounted += mult;
        winner = search.best_seq;
    }
    SolveOutcome {
        winner: winner.unwrap_or_else(|| canonical_first(e)),
        optimal: true,
        nodes,
    }
}

// ---------------------------------------------------------------------------
// Internal search machinery
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    AgentMin,
    Als,
    Asl,
    Lex,
}

impl Goal {
    fn from_order(order: WeightOrder) -> Goal {
        match order {
            WeightOrder::Als => Goal::Als,
            WeightOrder::Asl => Goal::Asl,
        }
    }
}

/// A leaf's value under a goal, in a directly comparable form.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Scalar(u64),
    Triple(ScoreTriple),
    /// Ascending sorted agent scores; maximizing this lexicographically is
    /// the same as minimizing the histogram lexicographically.
    Sorted(Vec<u64>),
}

impl Value {
    /// `Greater` means "better" (all goals maximize their value form).
    fn better(&self, other: &Value, goal: Goal) -> Ordering {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => a.cmp(b),
            (Value::Triple(a), Value::Triple(b)) => match goal {
                Goal::Als => a.cmp_als(b),
                Goal::Asl => a.cmp_asl(b),
                _ => unreachable!("triple values only arise for weighted goals"),
            },
            (Value::Sorted(a), Value::Sorted(b)) => a.cmp(b),
            _ => unreachable!("values of one search share a form"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    /// Keep the best leaf; first canonical co-optimum wins.
    Best,
    /// Collect every leaf whose value equals the target, up to `cap`.
    Collect { cap: usize },
    /// Minimize the histogram window `[lo, hi)` subject to frozen counts.
    Stage { lo: u64, hi: u64 },
    /// Maximize the lowest unaccounted score, then minimize its
    /// multiplicity, subject to the accumulated blocks.
    Round,
}

struct Ctl {
    nodes: u64,
    node_budget: Option<u64>,
    deadline: Option<Instant>,
    stopped: bool,
    done: bool,
}

impl Ctl {
    fn tick(&mut self) -> bool {
        if self.stopped || self.done {
            return false;
        }
        self.nodes += 1;
        if let Some(b) = self.node_budget {
            if self.nodes > b {
                self.stopped = true;
                return false;
            }
        }
        if self.nodes & 1023 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    self.stopped = true;
                    return false;
                }
            }
        }
        true
    }
}

/// Immutable per-election tables: flattened utilities, suffix top-`r`
/// sums per agent and per column, and full-level tops aggregated over
/// future levels.
struct Ctx {
    n: usize,
    tau: usize,
    widths: Vec<usize>,
    ks: Vec<usize>,
    util: Vec<Vec<u64>>,
    colsum: Vec<Vec<u64>>,
    /// `a_suf[t][(a * (m + 1) + j) * (k + 1) + r]`: best sum of `r`
    /// utilities among candidates `j..` of level `t` for agent `a`.
    a_suf: Vec<Vec<u64>>,
    /// `c_suf[t][j * (k + 1) + r]`: same for column sums.
    c_suf: Vec<Vec<u64>>,
    /// `a_fut[t][a]`: sum over levels `t..` of the full top-`k` for `a`
    /// (index `tau` is all zeros).
    a_fut: Vec<Vec<u64>>,
    c_fut_sum: Vec<u64>,
    c_fut_min: Vec<u64>,
}

impl Ctx {
    fn new(e: &Election) -> Ctx {
        let n = e.num_agents();
        let tau = e.num_levels();
        let mut widths = Vec::with_capacity(tau);
        let mut ks = Vec::with_capacity(tau);
        let mut util = Vec::with_capacity(tau);
        let mut colsum = Vec::with_capacity(tau);
        let mut a_suf = Vec::with_capacity(tau);
        let mut c_suf = Vec::with_capacity(tau);
        for level in e.levels() {
            let m = level.width();
            let k = level.k();
            widths.push(m);
            ks.push(k);
            let mut u = vec![0u64; n * m];
            for a in 0..n {
                for c in 0..m {
                    u[a * m + c] = level.utility(a, c);
                }
            }
            let cs: Vec<u64> = (0..m).map(|c| level.column_sum(c)).collect();
            a_suf.push(suffix_tops_multi(&u, n, m, k));
            c_suf.push(suffix_tops(&cs, k));
            util.push(u);
            colsum.push(cs);
        }
        let mut a_fut = vec![vec![0u64; n]; tau + 1];
        let mut c_fut_sum = vec![0u64; tau + 1];
        let mut c_fut_min = vec![u64::MAX; tau + 1];
        for t in (0..tau).rev() {
            let m = widths[t];
            let k = ks[t];
            for a in 0..n {
                a_fut[t][a] = a_fut[t + 1][a] + a_suf[t][(a * (m + 1)) * (k + 1) + k];
            }
            let full = c_suf[t][k];
            c_fut_sum[t] = c_fut_sum[t + 1] + full;
            c_fut_min[t] = c_fut_min[t + 1].min(full);
        }
        Ctx {
            n,
            tau,
            widths,
            ks,
            util,
            colsum,
            a_suf,
            c_suf,
            a_fut,
            c_fut_sum,
            c_fut_min,
        }
    }
}

/// `out[j * (k + 1) + r]` = best sum of `r` values among `values[j..]`.
fn suffix_tops(values: &[u64], k: usize) -> Vec<u64> {
    let m = values.len();
    let stride = k + 1;
    let mut out = vec![0u64; (m + 1) * stride];
    for j in (0..m).rev() {
        for r in 1..=k {
            let skip = out[(j + 1) * stride + r];
            let take = values[j] + out[(j + 1) * stride + r - 1];
            out[j * stride + r] = skip.max(take);
        }
    }
    out
}

fn suffix_tops_multi(util: &[u64], n: usize, m: usize, k: usize) -> Vec<u64> {
    let stride = k + 1;
    let mut out = vec![0u64; n * (m + 1) * stride];
    for a in 0..n {
        let tops = suffix_tops(&util[a * m..(a + 1) * m], k);
        out[(a * (m + 1)) * stride..((a + 1) * (m + 1)) * stride].copy_from_slice(&tops);
    }
    out
}

struct Search<'a> {
    ctx: &'a Ctx,
    mode: Mode,
    goal: Goal,
    ctl: Ctl,
    // Mutable walk state.
    scores: Vec<u64>,
    committees: Vec<Vec<u32>>,
    level_score: u64,
    finished_min: u64,
    finished_sum: u64,
    // Best mode.
    best: Option<Value>,
    best_seq: Option<CommitteeSequence>,
    // Collect mode.
    target: Option<Value>,
    winners: Vec<CommitteeSequence>,
    capped: bool,
    // Stage mode: required exact (score, count) pairs below `lo`, and the
    // incumbent's window counts.
    frozen: Vec<(u64, u64)>,
    best_window: Option<Vec<u64>>,
    // Round mode: fixed (score, multiplicity) blocks and the incumbent
    // (omega, multiplicity) — maximize omega, then minimize multiplicity.
    blocks: Vec<(u64, u64)>,
    best_round: Option<(u64, u64)>,
    bound_buf: Vec<u64>,
}

impl<'a> Search<'a> {
    fn new(ctx: &'a Ctx, mode: Mode, goal: Goal, config: &SolveConfig) -> Search<'a> {
        Search {
            ctx,
            mode,
            goal,
            ctl: Ctl {
                nodes: 0,
                node_budget: config.node_budget,
                deadline: config.time_budget.map(|b| Instant::now() + b),
                stopped: false,
                done: false,
            },
            scores: vec![0; ctx.n],
            committees: vec![Vec::new(); ctx.tau],
            level_score: 0,
            finished_min: u64::MAX,
            finished_sum: 0,
            best: None,
            best_seq: None,
            target: None,
            winners: Vec::new(),
            capped: false,
            frozen: Vec::new(),
            best_window: None,
            blocks: Vec::new(),
            best_round: None,
            bound_buf: vec![0; ctx.n],
        }
    }

    fn run(&mut self) {
        let r0 = if self.ctx.tau > 0 { self.ctx.ks[0] } else { 0 };
        self.dfs(0, 0, r0);
    }

    fn dfs(&mut self, t: usize, j: usize, r: usize) {
        if !self.ctl.tick() {
            return;
        }
        if t == self.ctx.tau {
            self.on_leaf();
            return;
        }
        if self.prune(t, j, r) {
            return;
        }
        if r == 0 {
            // Level complete: fold it into the finished aggregates.
            let saved_min = self.finished_min;
            let saved_sum = self.finished_sum;
            let saved_level = self.level_score;
            self.finished_min = self.finished_min.min(self.level_score);
            self.finished_sum += self.level_score;
            self.level_score = 0;
            let next_r = if t + 1 < self.ctx.tau { self.ctx.ks[t + 1] } else { 0 };
            self.dfs(t + 1, 0, next_r);
            self.level_score = saved_level;
            self.finished_sum = saved_sum;
            self.finished_min = saved_min;
            return;
        }
        let m = self.ctx.widths[t];
        let forced = m - j == r;
        // Include candidate j (canonically first), then — unless forced —
        // exclude it.
        self.include(t, j);
        self.dfs(t, j + 1, r - 1);
        self.exclude(t, j);
        if !forced {
            self.dfs(t, j + 1, r);
        }
    }

    fn include(&mut self, t: usize, j: usize) {
        let m = self.ctx.widths[t];
        for a in 0..self.ctx.n {
            self.scores[a] += self.ctx.util[t][a * m + j];
        }
        self.level_score += self.ctx.colsum[t][j];
        self.committees[t].push(j as u32);
    }

    fn exclude(&mut self, t: usize, j: usize) {
        let m = self.ctx.widths[t];
        for a in 0..self.ctx.n {
            self.scores[a] -= self.ctx.util[t][a * m + j];
        }
        self.level_score -= self.ctx.colsum[t][j];
        self.committees[t].pop();
    }

    /// Per-agent optimistic bounds at node `(t, j, r)`, written into
    /// `bound_buf`; returns their minimum.
    fn agent_bounds(&mut self, t: usize, j: usize, r: usize) -> u64 {
        let ctx = self.ctx;
        let m = ctx.widths[t];
        let stride = ctx.ks[t] + 1;
        let mut min = u64::MAX;
        for a in 0..ctx.n {
            let b = self.scores[a]
                + ctx.a_suf[t][(a * (m + 1) + j) * stride + r]
                + ctx.a_fut[t + 1][a];
            self.bound_buf[a] = b;
            min = min.min(b);
        }
        min
    }

    fn triple_bound(&mut self, t: usize, j: usize, r: usize) -> ScoreTriple {
        let ctx = self.ctx;
        let stride = ctx.ks[t] + 1;
        let cur = self.level_score + ctx.c_suf[t][j * stride + r];
        ScoreTriple {
            agent_min: self.agent_bounds(t, j, r),
            level_min: self.finished_min.min(cur).min(ctx.c_fut_min[t + 1]),
            total: self.finished_sum + cur + ctx.c_fut_sum[t + 1],
        }
    }

    fn cmp_triples(&self, a: &ScoreTriple, b: &ScoreTriple) -> Ordering {
        match self.goal {
            Goal::Als => a.cmp_als(b),
            Goal::Asl => a.cmp_asl(b),
            _ => unreachable!("triple comparisons only arise for weighted goals"),
        }
    }

    fn prune(&mut self, t: usize, j: usize, r: usize) -> bool {
        match self.mode {
            Mode::Best => match self.goal {
                Goal::AgentMin => {
                    let v = match &self.best {
                        None => return false,
                        Some(Value::Scalar(v)) => *v,
                        _ => unreachable!("incumbent form matches the goal"),
                    };
                    self.agent_bounds(t, j, r) <= v
                }
                Goal::Als | Goal::Asl => {
                    let v = match &self.best {
                        None => return false,
                        Some(Value::Triple(v)) => *v,
                        _ => unreachable!("incumbent form matches the goal"),
                    };
                    let bound = self.triple_bound(t, j, r);
                    self.cmp_triples(&bound, &v) != Ordering::Greater
                }
                Goal::Lex => {
                    // A completion with an agent below the incumbent's
                    // minimum is strictly lex-worse; equality cannot prune.
                    let gate = match &self.best {
                        None => return false,
                        Some(Value::Sorted(v)) => v[0],
                        _ => unreachable!("incumbent form matches the goal"),
                    };
                    self.agent_bounds(t, j, r) < gate
                }
            },
            Mode::Collect { .. } => match self.goal {
                Goal::AgentMin => {
                    let v = match self.target.as_ref() {
                        Some(Value::Scalar(v)) => *v,
                        _ => unreachable!("collect mode always has a matching target"),
                    };
                    self.agent_bounds(t, j, r) < v
                }
                Goal::Als | Goal::Asl => {
                    let v = match self.target.as_ref() {
                        Some(Value::Triple(v)) => *v,
                        _ => unreachable!("collect mode always has a matching target"),
                    };
                    let bound = self.triple_bound(t, j, r);
                    self.cmp_triples(&bound, &v) == Ordering::Less
                }
                Goal::Lex => {
                    let gate = match self.target.as_ref() {
                        Some(Value::Sorted(v)) => v[0],
                        _ => unreachable!("collect mode always has a matching target"),
                    };
                    self.agent_bounds(t, j, r) < gate
                }
            },
            Mode::Stage { lo, hi } => {
                // Feasibility gate: the first frozen score (or `lo` when
                // nothing is frozen) is the least score any agent may end
                // at, so a minimum bound below it is hopeless.
                let f_gate = self.frozen.first().map(|&(s, _)| s).unwrap_or(lo);
                let min_bound = self.agent_bounds(t, j, r);
                if min_bound < f_gate {
                    return true;
                }
                // Incumbent gate: only the agents occupying frozen slots
                // may end strictly below the incumbent window's first
                // nonzero index — one more would force a nonzero count at
                // an earlier window index (lex-worse) or break a frozen
                // count (infeasible).
                let threshold = match &self.best_window {
                    Some(w) => match w.iter().position(|&c| c > 0) {
                        Some(i) => lo + i as u64,
                        None => hi,
                    },
                    None => return false,
                };
                let accounted: usize = self.frozen.iter().map(|&(_, c)| c as usize).sum();
                let below = self.bound_buf.iter().filter(|&&b| b < threshold).count();
                below > accounted
            }
            Mode::Round => {
                let q: usize = self.blocks.iter().map(|&(_, c)| c as usize).sum();
                let best_omega = self.best_round.map(|(omega, _)| omega);
                self.agent_bounds(t, j, r);
                self.bound_buf.sort_unstable();
                // The lowest unaccounted score can never exceed the
                // (q+1)-th smallest per-agent bound.
                if let Some(omega) = best_omega {
                    if self.bound_buf[q] < omega {
                        return true;
                    }
                }
                // Staircase feasibility: agents whose bound is below a
                // block's score must all fit into strictly lower blocks.
                let mut allowed = 0u64;
                for &(s, cnt) in &self.blocks {
                    let unable = self.bound_buf.partition_point(|&b| b < s) as u64;
                    if unable > allowed {
                        return true;
                    }
                    allowed += cnt;
                }
                // Mirror staircase on current scores (lower bounds):
                // agents already above a block's score cannot occupy it or
                // any lower block.
                let mut cur = self.scores.clone();
                cur.sort_unstable();
                let mut capacity_above = self.ctx.n as u64;
                for &(s, cnt) in &self.blocks {
                    capacity_above -= cnt;
                    let above = (self.ctx.n - cur.partition_point(|&v| v <= s)) as u64;
                    if above > capacity_above {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn on_leaf(&mut self) {
        match self.mode {
            Mode::Best => {
                let value = self.leaf_value();
                let improves = match &self.best {
                    None => true,
                    Some(b) => value.better(b, self.goal) == Ordering::Greater,
                };
                if improves {
                    self.best = Some(value);
                    self.best_seq = Some(self.current_sequence());
                }
            }
            Mode::Collect { cap } => {
                let value = self.leaf_value();
                if Some(&value) == self.target.as_ref() {
                    self.winners.push(self.current_sequence());
                    if self.winners.len() >= cap {
                        self.capped = true;
                        self.ctl.done = true;
                    }
                }
            }
            Mode::Stage { lo, hi } => {
                let mut sorted = self.scores.clone();
                sorted.sort_unstable();
                // The sorted scores must start with exactly the frozen
                // (score, count) groups and nothing else below `lo`.
                let mut idx = 0usize;
                for &(s, cnt) in &self.frozen {
                    for _ in 0..cnt {
                        if idx >= sorted.len() || sorted[idx] != s {
                            return;
                        }
                        idx += 1;
                    }
                }
                if idx < sorted.len() && sorted[idx] < lo {
                    return;
                }
                let window = window_counts(&sorted, lo, hi);
                let improves = match &self.best_window {
                    None => true,
                    // Minimizing the window counts lexicographically.
                    Some(b) => window < *b,
                };
                if improves {
                    self.best_window = Some(window);
                    self.best_seq = Some(self.current_sequence());
                }
            }
            Mode::Round => {
                let mut sorted = self.scores.clone();
                sorted.sort_unstable();
                let mut idx = 0usize;
                for &(s, cnt) in &self.blocks {
                    for _ in 0..cnt {
                        if idx >= sorted.len() || sorted[idx] != s {
                            return;
                        }
                        idx += 1;
                    }
                }
                if idx >= sorted.len() {
                    return;
                }
                if let Some(&(last, _)) = self.blocks.last() {
                    if sorted[idx] <= last {
                        // An unaccounted agent at (or below) the last
                        // block's score would change that block's count.
                        return;
                    }
                }
                let omega = sorted[idx];
                let mult = sorted[idx..].iter().take_while(|&&s| s == omega).count() as u64;
                let improves = match self.best_round {
                    None => true,
                    Some((bo, bm)) => omega > bo || (omega == bo && mult < bm),
                };
                if improves {
                    self.best_round = Some((omega, mult));
                    self.best_seq = Some(self.current_sequence());
                }
            }
        }
    }

    fn leaf_value(&self) -> Value {
        match self.goal {
            Goal::AgentMin => Value::Scalar(*self.scores.iter().min().expect("agents exist")),
            Goal::Als | Goal::Asl => Value::Triple(ScoreTriple {
                agent_min: *self.scores.iter().min().expect("agents exist"),
                level_min: self.finished_min,
                total: self.finished_sum,
            }),
            Goal::Lex => {
                let mut sorted = self.scores.clone();
                sorted.sort_unstable();
                Value::Sorted(sorted)
            }
        }
    }

    fn current_sequence(&self) -> CommitteeSequence {
        CommitteeSequence::from_sorted_unchecked(self.committees.clone())
    }
}

fn best_solve(e: &Election, goal: Goal, config: &SolveConfig) -> SolveOutcome {
    let ctx = Ctx::new(e);
    let mut search = Search::new(&ctx, Mode::Best, goal, config);
    search.run();
    let stopped = search.ctl.stopped;
    SolveOutcome {
        winner: search.best_seq.unwrap_or_else(|| canonical_first(e)),
        optimal: !stopped,
        nodes: search.ctl.nodes,
    }
}

fn target_value(e: &Election, x: &CommitteeSequence, goal: Goal) -> Value {
    match goal {
        Goal::AgentMin => Value::Scalar(crate::model::score_agent_min(e, x).expect("valid winner")),
        Goal::Als | Goal::Asl => {
            Value::Triple(crate::model::score_triple(e, x).expect("valid winner"))
        }
        Goal::Lex => Value::Sorted(sorted_scores(e, x)),
    }
}

fn sorted_scores(e: &Election, x: &CommitteeSequence) -> Vec<u64> {
    let mut s = crate::model::agent_scores(e, x).expect("valid winner");
    s.sort_unstable();
    s
}

fn window_counts(sorted: &[u64], lo: u64, hi: u64) -> Vec<u64> {
    let mut counts = vec![0u64; (hi - lo) as usize];
    for &s in sorted {
        if s >= lo && s < hi {
            counts[(s - lo) as usize] += 1;
        }
    }
    counts
}

/// The canonically first valid sequence: the `k_t` lowest-indexed
/// candidates on every level. Used as a fallback when a budget stops a
/// search before any leaf is reached.
fn canonical_first(e: &Election) -> CommitteeSequence {
    CommitteeSequence::from_sorted_unchecked(
        e.levels()
            .iter()
            .map(|l| (0..l.k() as u32).collect())
            .collect(),
    )
}

/// Optimistic bound triple for the partial sequence fixing the first
/// `prefix.len()` levels (test hook for admissibility checks).
#[cfg(test)]
pub(crate) fn prefix_bound(e: &Election, prefix: &[Vec<u32>]) -> ScoreTriple {
    let ctx = Ctx::new(e);
    assert!(prefix.len() < ctx.tau);
    let mut search = Search::new(&ctx, Mode::Best, Goal::Als, &SolveConfig::unbounded());
    for (t, committee) in prefix.iter().enumerate() {
        for &c in committee {
            search.include(t, c as usize);
        }
        search.finished_min = search.finished_min.min(search.level_score);
        search.finished_sum += search.level_score;
        search.level_score = 0;
    }
    let t = prefix.len();
    search.triple_bound(t, 0, ctx.ks[t])
}
