//! Core domain types and score functions.
//!
//! Everything downstream — rules, solvers, axiom checkers — is defined in
//! terms of the types and operations in this module. An [`Election`] fixes
//! the agent order and the per-level candidate order once at construction;
//! those orders are the canonical tie-break orders used everywhere else.
//!
//! Scores live in `u64`. The constructor computes the grand total utility of
//! the whole election with checked arithmetic and rejects elections whose
//! magnitudes could overflow, so every later score computation (each bounded
//! by that grand total) can use plain arithmetic.

use std::cmp::Ordering;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Errors produced when constructing or scoring the model types.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("election must have at least one agent")]
    NoAgents,
    #[error("election must have at least one level")]
    NoLevels,
    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),
    #[error("level {level}: must offer at least one candidate")]
    EmptyLevel { level: usize },
    #[error("level {level}: duplicate candidate id `{name}`")]
    DuplicateCandidateName { level: usize, name: String },
    #[error("level {level}: committee size {k} exceeds candidate count {m}")]
    KappaTooLarge { level: usize, k: usize, m: usize },
    #[error("level {level}: expected one utility row per agent ({expected}), found {found}")]
    BadUtilityRowCount {
        level: usize,
        expected: usize,
        found: usize,
    },
    #[error("level {level}, row {row}: expected {expected} utility entries, found {found}")]
    BadUtilityRowLen {
        level: usize,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("utility magnitudes overflow the supported score range")]
    Overflow,
    #[error("unknown agent id `{0}`")]
    UnknownAgent(String),
    #[error("level {level}: unknown candidate id `{name}`")]
    UnknownCandidate { level: usize, name: String },
    #[error("sequence has {found} committees, election has {expected} levels")]
    LevelCountMismatch { expected: usize, found: usize },
    #[error("level {level}: candidate index {index} out of range (width {width})")]
    CandidateOutOfRange {
        level: usize,
        index: u32,
        width: usize,
    },
    #[error("level {level}: candidate index {index} appears twice in one committee")]
    DuplicateCommitteeMember { level: usize, index: u32 },
    #[error("level index {index} out of range ({count} levels)")]
    LevelOutOfRange { index: usize, count: usize },
}

/// Optional provenance carried by an election.
///
/// The three named fields are part of the canonical file format; `notes`
/// collects free-form annotations added by pipeline steps (for example when
/// cleanup has to clamp a committee size).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// One level of an election: its candidate pool, committee size, and the
/// dense utility matrix (one row per agent, one column per candidate).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level {
    candidates: Vec<String>,
    k: usize,
    utilities: Vec<Vec<u64>>,
}

impl Level {
    /// Builds a level. `utilities[a][c]` is agent `a`'s utility for
    /// candidate `c`; the row count must match the election's agent count
    /// (validated by [`Election::new`]).
    pub fn new(candidates: Vec<String>, k: usize, utilities: Vec<Vec<u64>>) -> Level {
        Level {
            candidates,
            k,
            utilities,
        }
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    /// Number of candidates offered on this level.
    pub fn width(&self) -> usize {
        self.candidates.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Utility of candidate `c` for agent `a`.
    pub fn utility(&self, agent: usize, candidate: usize) -> u64 {
        self.utilities[agent][candidate]
    }

    pub fn utilities(&self) -> &[Vec<u64>] {
        &self.utilities
    }

    /// Sum of all agents' utilities for one candidate (its "column sum").
    pub fn column_sum(&self, candidate: usize) -> u64 {
        self.utilities.iter().map(|row| row[candidate]).sum()
    }
}

/// A multilevel election: agents, levels, and optional provenance.
///
/// Invariants established at construction and preserved thereafter:
/// at least one agent and one level; unique agent ids; at least one
/// candidate per level with unique ids within the level; `k <= width` on
/// every level; utility matrices shaped `n x width`; and the election-wide
/// total utility fits in `u64`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ElectionRaw")]
pub struct Election {
    agents: Vec<String>,
    levels: Vec<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Meta>,
}

#[derive(Deserialize)]
struct ElectionRaw {
    agents: Vec<String>,
    levels: Vec<RawLevel>,
    #[serde(default)]
    meta: Option<Meta>,
}

#[derive(Deserialize)]
struct RawLevel {
    candidates: Vec<String>,
    k: usize,
    utilities: Vec<Vec<u64>>,
}

impl TryFrom<ElectionRaw> for Election {
    type Error = ModelError;

    fn try_from(raw: ElectionRaw) -> Result<Election, ModelError> {
        let levels = raw
            .levels
            .into_iter()
            .map(|l| Level::new(l.candidates, l.k, l.utilities))
            .collect();
        Election::new(raw.agents, levels, raw.meta)
    }
}

impl Election {
    /// Validates and builds an election. See the type-level documentation
    /// for the invariants enforced here.
    pub fn new(
        agents: Vec<String>,
        levels: Vec<Level>,
        meta: Option<Meta>,
    ) -> Result<Election, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        if levels.is_empty() {
            return Err(ModelError::NoLevels);
        }
        for (i, a) in agents.iter().enumerate() {
            if agents[..i].contains(a) {
                return Err(ModelError::DuplicateAgent(a.clone()));
            }
        }
        let n = agents.len();
        let mut grand_total: u64 = 0;
        for (t, level) in levels.iter().enumerate() {
            if level.candidates.is_empty() {
                return Err(ModelError::EmptyLevel { level: t });
            }
            for (i, c) in level.candidates.iter().enumerate() {
                if level.candidates[..i].contains(c) {
                    return Err(ModelError::DuplicateCandidateName {
                        level: t,
                        name: c.clone(),
                    });
                }
            }
            if level.k > level.width() {
                return Err(ModelError::KappaTooLarge {
                    level: t,
                    k: level.k,
                    m: level.width(),
                });
            }
            if level.utilities.len() != n {
                return Err(ModelError::BadUtilityRowCount {
                    level: t,
                    expected: n,
                    found: level.utilities.len(),
                });
            }
            for (row, utilities) in level.utilities.iter().enumerate() {
                if utilities.len() != level.width() {
                    return Err(ModelError::BadUtilityRowLen {
                        level: t,
                        row,
                        expected: level.width(),
                        found: utilities.len(),
                    });
                }
                for &u in utilities {
                    grand_total = grand_total.checked_add(u).ok_or(ModelError::Overflow)?;
                }
            }
        }
        Ok(Election {
            agents,
            levels,
            meta,
        })
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    /// Number of agents, `n`.
    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, t: usize) -> &Level {
        &self.levels[t]
    }

    /// Number of levels, `tau`.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn meta(&self) -> Option<&Meta> {
        self.meta.as_ref()
    }

    pub fn set_meta(&mut self, meta: Option<Meta>) {
        self.meta = meta;
    }

    /// Index of the agent with the given id.
    pub fn agent_index(&self, id: &str) -> Result<usize, ModelError> {
        self.agents
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| ModelError::UnknownAgent(id.to_string()))
    }

    /// Number of distinct candidate names across all levels. A name offered
    /// on several levels counts once.
    pub fn num_distinct_candidates(&self) -> usize {
        let mut names: Vec<&str> = self
            .levels
            .iter()
            .flat_map(|l| l.candidates.iter().map(|c| c.as_str()))
            .collect();
        names.sort_unstable();
        names.dedup();
        names.len()
    }

    /// The largest score any single agent could reach if every candidate on
    /// every level were selected: `Z = max_a sum_t sum_{c in C_t} u_t(a,c)`.
    ///
    /// This deliberately ignores the committee sizes, so histograms may
    /// carry trailing zero entries for unreachable scores.
    pub fn z_max(&self) -> u64 {
        (0..self.num_agents())
            .map(|a| {
                self.levels
                    .iter()
                    .map(|l| l.utilities[a].iter().sum::<u64>())
                    .sum::<u64>()
            })
            .max()
            .unwrap_or(0)
    }

    /// Checks that a committee sequence refers only to this election's
    /// levels and candidates (validity, i.e. exact sizes, is *not* required).
    pub fn check_compat(&self, x: &CommitteeSequence) -> Result<(), ModelError> {
        if x.committees.len() != self.num_levels() {
            return Err(ModelError::LevelCountMismatch {
                expected: self.num_levels(),
                found: x.committees.len(),
            });
        }
        for (t, committee) in x.committees.iter().enumerate() {
            let width = self.levels[t].width();
            for (i, &c) in committee.iter().enumerate() {
                if (c as usize) >= width {
                    return Err(ModelError::CandidateOutOfRange {
                        level: t,
                        index: c,
                        width,
                    });
                }
                if i > 0 && committee[i - 1] == c {
                    return Err(ModelError::DuplicateCommitteeMember { level: t, index: c });
                }
            }
        }
        Ok(())
    }
}

/// One committee per level, stored as sorted candidate indices.
///
/// The derived `Ord` is the canonical order used for winner-set
/// canonicalization: committees compare level by level, and two committees
/// on one level compare lexicographically on their sorted index lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CommitteeSequence {
    committees: Vec<Vec<u32>>,
}

impl CommitteeSequence {
    /// Builds a sequence from per-level candidate indices, sorting each
    /// committee and validating it against the election.
    pub fn from_indices(
        e: &Election,
        mut committees: Vec<Vec<u32>>,
    ) -> Result<CommitteeSequence, ModelError> {
        for committee in &mut committees {
            committee.sort_unstable();
        }
        let x = CommitteeSequence { committees };
        e.check_compat(&x)?;
        Ok(x)
    }

    /// Builds a sequence from per-level candidate names.
    pub fn from_names(
        e: &Election,
        names: &[Vec<&str>],
    ) -> Result<CommitteeSequence, ModelError> {
        if names.len() != e.num_levels() {
            return Err(ModelError::LevelCountMismatch {
                expected: e.num_levels(),
                found: names.len(),
            });
        }
        let mut committees = Vec::with_capacity(names.len());
        for (t, level_names) in names.iter().enumerate() {
            let mut committee = Vec::with_capacity(level_names.len());
            for name in level_names {
                let idx = e.levels[t]
                    .candidates
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| ModelError::UnknownCandidate {
                        level: t,
                        name: name.to_string(),
                    })?;
                committee.push(idx as u32);
            }
            committees.push(committee);
        }
        CommitteeSequence::from_indices(e, committees)
    }

    /// Internal constructor for callers that guarantee sortedness and
    /// in-range indices (the solver's hot path).
    pub(crate) fn from_sorted_unchecked(committees: Vec<Vec<u32>>) -> CommitteeSequence {
        debug_assert!(committees.iter().all(|c| c.windows(2).all(|w| w[0] < w[1])));
        CommitteeSequence { committees }
    }

    pub fn committees(&self) -> &[Vec<u32>] {
        &self.committees
    }

    pub fn committee(&self, t: usize) -> &[u32] {
        &self.committees[t]
    }

    /// True when every committee has exactly the size its level requests.
    pub fn is_valid(&self, e: &Election) -> bool {
        self.committees.len() == e.num_levels()
            && self
                .committees
                .iter()
                .zip(e.levels())
                .all(|(committee, level)| committee.len() == level.k())
    }

    /// Renders the sequence with candidate names, e.g. `[{a,b}, {c}]`.
    pub fn display(&self, e: &Election) -> String {
        let mut out = String::from("[");
        for (t, committee) in self.committees.iter().enumerate() {
            if t > 0 {
                out.push_str(", ");
            }
            out.push('{');
            for (i, &c) in committee.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&e.level(t).candidates()[c as usize]);
            }
            out.push('}');
        }
        out.push(']');
        out
    }
}

/// Counts of agents per agent-score value, indexed `0..=Z`.
///
/// Lexicographically smaller histograms (compared from index 0 upward) are
/// better: fewer agents stuck at the lowest differing score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatHistogram {
    counts: Vec<u64>,
}

impl SatHistogram {
    pub fn new(counts: Vec<u64>) -> SatHistogram {
        SatHistogram { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Index of the first nonzero count — the minimum agent score — or
    /// `None` for an (impossible in practice) all-zero histogram.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c > 0)
    }
}

/// The three scores `(scr_A^min, scr_L^min, scr_Sigma)` of one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub agent_min: u64,
    pub level_min: u64,
    pub total: u64,
}

impl ScoreTriple {
    /// Compares triples in the priority order agent-min, then level-min,
    /// then total. Equivalent to comparing the weighted objectives with
    /// weights `(theta*sigma, sigma, 1)`.
    pub fn cmp_als(&self, other: &ScoreTriple) -> Ordering {
        (self.agent_min, self.level_min, self.total).cmp(&(
            other.agent_min,
            other.level_min,
            other.total,
        ))
    }

    /// Compares triples in the priority order agent-min, then total, then
    /// level-min. Equivalent to comparing the weighted objectives with
    /// weights `(theta*sigma, 1, theta)`.
    pub fn cmp_asl(&self, other: &ScoreTriple) -> Ordering {
        (self.agent_min, self.total, self.level_min).cmp(&(
            other.agent_min,
            other.total,
            other.level_min,
        ))
    }
}

/// Priority order of the two weighted objectives: `Als` refines the
/// egalitarian optimum by level-min before total, `Asl` by total before
/// level-min.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightOrder {
    Als,
    Asl,
}

/// The weights `theta` and `sigma` that linearize the two triple orders.
///
/// `theta` is one plus the maximum achievable level score (over all levels
/// and valid sequences); `sigma` is one plus the maximum achievable sum
/// score. Both are exact, computed from per-level top-`k` column sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveWeights {
    pub theta: u64,
    pub sigma: u64,
}

/// Agent `a`'s total utility for the selected candidates across all levels.
///
/// Defined for partial (even over-full) sequences: only subset-consistency
/// with the election is required.
pub fn score_agent(e: &Election, x: &CommitteeSequence, agent_id: &str) -> Result<u64, ModelError> {
    e.check_compat(x)?;
    let a = e.agent_index(agent_id)?;
    Ok(score_agent_by_index(e, x, a))
}

fn score_agent_by_index(e: &Election, x: &CommitteeSequence, a: usize) -> u64 {
    x.committees()
        .iter()
        .enumerate()
        .map(|(t, committee)| {
            committee
                .iter()
                .map(|&c| e.level(t).utility(a, c as usize))
                .sum::<u64>()
        })
        .sum()
}

/// All agents' scores in agent order.
pub fn agent_scores(e: &Election, x: &CommitteeSequence) -> Result<Vec<u64>, ModelError> {
    e.check_compat(x)?;
    Ok((0..e.num_agents())
        .map(|a| score_agent_by_index(e, x, a))
        .collect())
}

/// The egalitarian objective: the minimum agent score.
pub fn score_agent_min(e: &Election, x: &CommitteeSequence) -> Result<u64, ModelError> {
    Ok(agent_scores(e, x)?.into_iter().min().expect("n >= 1"))
}

/// Total utility all agents assign to level `t`'s committee.
pub fn score_level(e: &Election, x: &CommitteeSequence, t: usize) -> Result<u64, ModelError> {
    e.check_compat(x)?;
    if t >= e.num_levels() {
        return Err(ModelError::LevelOutOfRange {
            index: t,
            count: e.num_levels(),
        });
    }
    Ok(x.committee(t)
        .iter()
        .map(|&c| e.level(t).column_sum(c as usize))
        .sum())
}

/// The minimum level score over all levels.
pub fn score_level_min(e: &Election, x: &CommitteeSequence) -> Result<u64, ModelError> {
    e.check_compat(x)?;
    Ok((0..e.num_levels())
        .map(|t| {
            x.committee(t)
                .iter()
                .map(|&c| e.level(t).column_sum(c as usize))
                .sum::<u64>()
        })
        .min()
        .expect("tau >= 1"))
}

/// The utilitarian objective: total utility over all agents and levels.
/// Always equals both the sum of agent scores and the sum of level scores.
pub fn score_sum(e: &Election, x: &CommitteeSequence) -> Result<u64, ModelError> {
    let by_agents: u64 = agent_scores(e, x)?.into_iter().sum();
    debug_assert_eq!(
        by_agents,
        (0..e.num_levels())
            .map(|t| score_level(e, x, t).unwrap())
            .sum::<u64>()
    );
    Ok(by_agents)
}

/// All three scores of one sequence in a single pass.
pub fn score_triple(e: &Election, x: &CommitteeSequence) -> Result<ScoreTriple, ModelError> {
    let scores = agent_scores(e, x)?;
    Ok(ScoreTriple {
        agent_min: scores.iter().copied().min().expect("n >= 1"),
        level_min: score_level_min(e, x)?,
        total: scores.iter().sum(),
    })
}

/// Counts how many agents sit at each score value `0..=Z`.
pub fn sat_histogram(e: &Election, x: &CommitteeSequence) -> Result<SatHistogram, ModelError> {
    let scores = agent_scores(e, x)?;
    let z = e.z_max() as usize;
    let mut counts = vec![0u64; z + 1];
    for s in scores {
        counts[s as usize] += 1;
    }
    Ok(SatHistogram::new(counts))
}

/// Lexicographic comparison of two histograms from index 0 upward; the
/// shorter operand is padded with zeros. `Less` is strictly better for the
/// leximin rule, and the result always equals the numeric comparison of the
/// exact scores from [`lex_score_exact`].
pub fn lex_compare(h1: &SatHistogram, h2: &SatHistogram) -> Ordering {
    let len = h1.counts().len().max(h2.counts().len());
    for i in 0..len {
        let a = h1.counts().get(i).copied().unwrap_or(0);
        let b = h2.counts().get(i).copied().unwrap_or(0);
        match a.cmp(&b) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

/// The exact leximin score `sum_i counts[i] * (n+1)^(Z-i)` as a big
/// integer. Exists for equivalence testing against [`lex_compare`]; the
/// solver never materializes this number.
pub fn lex_score_exact(e: &Election, x: &CommitteeSequence) -> Result<BigUint, ModelError> {
    let hist = sat_histogram(e, x)?;
    let base = BigUint::from(e.num_agents() as u64 + 1);
    let mut acc = BigUint::from(0u32);
    // Horner evaluation from index 0 (highest power) downward.
    for &count in hist.counts() {
        acc = acc * &base + BigUint::from(count);
    }
    Ok(acc)
}

/// Computes the exact weights `theta` (one plus the best achievable level
/// score) and `sigma` (one plus the best achievable sum score) from
/// per-level top-`k` column sums.
pub fn compute_weights(e: &Election) -> ObjectiveWeights {
    let mut best_level = 0u64;
    let mut best_total = 0u64;
    for level in e.levels() {
        let mut sums: Vec<u64> = (0..level.width()).map(|c| level.column_sum(c)).collect();
        sums.sort_unstable_by(|a, b| b.cmp(a));
        let top_k: u64 = sums[..level.k()].iter().sum();
        best_level = best_level.max(top_k);
        best_total += top_k;
    }
    ObjectiveWeights {
        theta: best_level + 1,
        sigma: best_total + 1,
    }
}

/// The score triple dotted with the weight vector of the chosen order:
/// `(theta*sigma, sigma, 1)` for [`WeightOrder::Als`] and
/// `(theta*sigma, 1, theta)` for [`WeightOrder::Asl`]. Computed in big
/// integers since `theta*sigma*agent_min` can exceed any fixed width.
pub fn weighted_objective(
    e: &Election,
    x: &CommitteeSequence,
    order: WeightOrder,
) -> Result<BigUint, ModelError> {
    let triple = score_triple(e, x)?;
    let w = compute_weights(e);
    Ok(weighted_value(&w, &triple, order))
}

/// The weighted objective of an explicit triple (used by tests and by the
/// two-stage equivalence check in the oracle).
pub fn weighted_value(w: &ObjectiveWeights, triple: &ScoreTriple, order: WeightOrder) -> BigUint {
    let theta = BigUint::from(w.theta);
    let sigma = BigUint::from(w.sigma);
    let a = BigUint::from(triple.agent_min);
    let l = BigUint::from(triple.level_min);
    let s = BigUint::from(triple.total);
    match order {
        WeightOrder::Als => &theta * &sigma * a + sigma * l + s,
        WeightOrder::Asl => &theta * &sigma * a + s * theta + l,
    }
}
