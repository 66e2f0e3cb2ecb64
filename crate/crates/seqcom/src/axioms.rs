//! Election algebra and axiomatic property checkers.
//!
//! The five properties checked here:
//!
//! * **P1 safe concatenation** — appending two elections never forces the
//!   rule below the egalitarian score any pair of separate winners yields.
//! * **P2 safe union** — merging two disjoint electorates level-wise never
//!   forces the rule below any pair of separate winners.
//! * **P3 sub-consistency** — a sequence winning in two disjoint
//!   electorates also wins in the combined electorate.
//! * **P4 Pareto** — no winner is dominated by another valid sequence.
//! * **P5 independent groups** — when agents split into groups supporting
//!   disjoint level blocks, the winner set is the Cartesian product of the
//!   per-group winner sets.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{
    score_agent_min, CommitteeSequence, Election, Level, ModelError,
};
use crate::oracle::{enumerate_valid, EnumerationBudget};
use crate::rules::{winner_set, RuleId, WinnerSet};
use crate::solver::SolveConfig;

/// Errors from the election algebra (precondition violations).
#[derive(Debug, thiserror::Error)]
pub enum AxiomsError {
    #[error("agent sets differ (concatenation needs identical agents in identical order)")]
    AgentMismatch,
    #[error("level counts differ: {0} vs {1}")]
    TauMismatch(usize, usize),
    #[error("agent `{0}` appears in both elections")]
    OverlappingAgents(String),
    #[error("level {level}: candidate sets or committee sizes differ")]
    CandidateMismatch { level: usize },
    #[error("property {0} compares two elections; use its pairwise checker")]
    NeedsPair(Property),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// Election algebra
// ---------------------------------------------------------------------------

/// Concatenates the level sequences of two elections over the same agents.
pub fn concat_elections(e1: &Election, e2: &Election) -> Result<Election, AxiomsError> {
    if e1.agents() != e2.agents() {
        return Err(AxiomsError::AgentMismatch);
    }
    let mut levels: Vec<Level> = Vec::with_capacity(e1.num_levels() + e2.num_levels());
    for level in e1.levels().iter().chain(e2.levels()) {
        levels.push(Level::new(
            level.candidates().to_vec(),
            level.k(),
            level.utilities().to_vec(),
        ));
    }
    Ok(Election::new(e1.agents().to_vec(), levels, None)?)
}

/// Merges two elections over disjoint electorates level-by-level: candidate
/// sets are united by name, committee sizes add, and each agent keeps zero
/// utility for candidates only the other election fields.
pub fn union_elections(e1: &Election, e2: &Election) -> Result<Election, AxiomsError> {
    if e1.num_levels() != e2.num_levels() {
        return Err(AxiomsError::TauMismatch(e1.num_levels(), e2.num_levels()));
    }
    for a in e2.agents() {
        if e1.agents().contains(a) {
            return Err(AxiomsError::OverlappingAgents(a.clone()));
        }
    }
    let mut agents = e1.agents().to_vec();
    agents.extend_from_slice(e2.agents());
    let mut levels = Vec::with_capacity(e1.num_levels());
    for (l1, l2) in e1.levels().iter().zip(e2.levels()) {
        let mut candidates = l1.candidates().to_vec();
        for c in l2.candidates() {
            if !candidates.contains(c) {
                candidates.push(c.clone());
            }
        }
        let pos: HashMap<&str, usize> = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let width = candidates.len();
        let mut utilities = Vec::with_capacity(agents.len());
        for a in 0..e1.num_agents() {
            let mut row = vec![0u64; width];
            for (c, name) in l1.candidates().iter().enumerate() {
                row[pos[name.as_str()]] = l1.utility(a, c);
            }
            utilities.push(row);
        }
        for a in 0..e2.num_agents() {
            let mut row = vec![0u64; width];
            for (c, name) in l2.candidates().iter().enumerate() {
                row[pos[name.as_str()]] = l2.utility(a, c);
            }
            utilities.push(row);
        }
        levels.push(Level::new(candidates, l1.k() + l2.k(), utilities));
    }
    Ok(Election::new(agents, levels, None)?)
}

/// Places two elections side by side: the combined election runs `e1`'s
/// levels (where `e2`'s agents value everything at zero) and then `e2`'s
/// levels (vice versa). Colliding agent names get a `1:`/`2:` prefix.
/// By construction the result splits into (at least) two independent
/// groups with the cut after `e1`'s levels.
pub fn glue_elections(e1: &Election, e2: &Election) -> Result<Election, AxiomsError> {
    let collide = e2.agents().iter().any(|a| e1.agents().contains(a));
    let rename = |prefix: &str, names: &[String]| -> Vec<String> {
        if collide {
            names.iter().map(|a| format!("{prefix}{a}")).collect()
        } else {
            names.to_vec()
        }
    };
    let mut agents = rename("1:", e1.agents());
    agents.extend(rename("2:", e2.agents()));
    let n1 = e1.num_agents();
    let n2 = e2.num_agents();
    let mut levels = Vec::with_capacity(e1.num_levels() + e2.num_levels());
    for level in e1.levels() {
        let mut utilities = level.utilities().to_vec();
        utilities.extend(std::iter::repeat(vec![0u64; level.width()]).take(n2));
        levels.push(Level::new(level.candidates().to_vec(), level.k(), utilities));
    }
    for level in e2.levels() {
        let mut utilities = vec![vec![0u64; level.width()]; n1];
        utilities.extend_from_slice(level.utilities());
        levels.push(Level::new(level.candidates().to_vec(), level.k(), utilities));
    }
    Ok(Election::new(agents, levels, None)?)
}

// ---------------------------------------------------------------------------
// Grouping detection
// ---------------------------------------------------------------------------

/// A partition of the agents into groups supporting disjoint, contiguous
/// level blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    /// Per group, the agent indices (ascending); every agent appears in
    /// exactly one group (all-zero agents join the first).
    pub agent_parts: Vec<Vec<usize>>,
    /// Per group, the exclusive end of its level block; the blocks are
    /// `[0, cuts[0])`, `[cuts[0], cuts[1])`, …, and the last cut equals
    /// the level count.
    pub level_cuts: Vec<usize>,
}

impl Grouping {
    /// Number of groups.
    pub fn len(&self) -> usize {
        self.agent_parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agent_parts.is_empty()
    }

    /// The level range `[start, end)` of group `s`.
    pub fn block(&self, s: usize) -> (usize, usize) {
        let start = if s == 0 { 0 } else { self.level_cuts[s - 1] };
        (start, self.level_cuts[s])
    }
}

/// Detects the finest partition of levels into contiguous blocks with
/// pairwise-disjoint supporting agent sets. Always succeeds; elections
/// whose supports cannot be separated yield the trivial single group.
pub fn detect_grouping(e: &Election) -> Grouping {
    // Per level, the set of agents with any positive utility.
    let supports: Vec<BTreeSet<usize>> = e
        .levels()
        .iter()
        .map(|level| {
            (0..e.num_agents())
                .filter(|&a| (0..level.width()).any(|c| level.utility(a, c) > 0))
                .collect()
        })
        .collect();
    // Blocks as (exclusive level end, agent set); start with one block per
    // level, then merge every pair of blocks sharing an agent — along with
    // everything between them, to keep blocks contiguous — to a fixpoint.
    let mut ends: Vec<usize> = (1..=e.num_levels()).collect();
    let mut parts: Vec<BTreeSet<usize>> = supports;
    'merge: loop {
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if !parts[i].is_disjoint(&parts[j]) {
                    let merged: BTreeSet<usize> =
                        parts[i..=j].iter().flatten().copied().collect();
                    parts.splice(i..=j, [merged]);
                    ends.splice(i..j, []);
                    continue 'merge;
                }
            }
        }
        break;
    }
    // Attach empty blocks (levels nobody supports) to their left neighbor,
    // or to the right neighbor at the front.
    let mut s = 0;
    while s < parts.len() {
        if parts[s].is_empty() && parts.len() > 1 {
            if s == 0 {
                ends.remove(0);
                parts.remove(0);
            } else {
                ends.remove(s - 1);
                parts.remove(s);
            }
        } else {
            s += 1;
        }
    }
    // All-zero agents join the first group.
    let placed: BTreeSet<usize> = parts.iter().flatten().copied().collect();
    for a in 0..e.num_agents() {
        if !placed.contains(&a) {
            parts[0].insert(a);
        }
    }
    Grouping {
        agent_parts: parts.into_iter().map(|p| p.into_iter().collect()).collect(),
        level_cuts: ends,
    }
}

/// The per-group sub-elections of a grouping: group `s` keeps its block's
/// levels verbatim (candidates and committee sizes included) restricted to
/// its own agents' utility rows.
pub fn sub_elections(e: &Election, grouping: &Grouping) -> Result<Vec<Election>, AxiomsError> {
    (0..grouping.len())
        .map(|s| {
            let (start, end) = grouping.block(s);
            let agents: Vec<String> = grouping.agent_parts[s]
                .iter()
                .map(|&a| e.agents()[a].clone())
                .collect();
            let levels = e.levels()[start..end]
                .iter()
                .map(|level| {
                    Level::new(
                        level.candidates().to_vec(),
                        level.k(),
                        grouping.agent_parts[s]
                            .iter()
                            .map(|&a| level.utilities()[a].clone())
                            .collect(),
                    )
                })
                .collect();
            Ok(Election::new(agents, levels, None)?)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

/// The five checkable properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    SafeConcatenation,
    SafeUnion,
    SubConsistency,
    Pareto,
    IndependentGroups,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::SafeConcatenation,
        Property::SafeUnion,
        Property::SubConsistency,
        Property::Pareto,
        Property::IndependentGroups,
    ];

    /// Short code (P1–P5).
    pub fn code(self) -> &'static str {
        match self {
            Property::SafeConcatenation => "P1",
            Property::SafeUnion => "P2",
            Property::SubConsistency => "P3",
            Property::Pareto => "P4",
            Property::IndependentGroups => "P5",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Property::SafeConcatenation => "safe-concatenation",
            Property::SafeUnion => "safe-union",
            Property::SubConsistency => "sub-consistency",
            Property::Pareto => "pareto",
            Property::IndependentGroups => "independent-groups",
        }
    }
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome category of a property check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    /// The property's premise is empty on this input (e.g. no shared
    /// winners in a sub-consistency check).
    HoldsVacuous,
    Violated,
    /// The check could not be decided (truncated winner sets, enumeration
    /// budget, trivial grouping, …).
    Skipped,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::HoldsVacuous => "holds-vacuous",
            Verdict::Violated => "violated",
            Verdict::Skipped => "skipped",
        })
    }
}

/// One property check's result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub property: Property,
    pub rule: RuleId,
    pub verdict: Verdict,
    /// Human-readable violation evidence; present exactly when violated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Why the check was skipped; present exactly when skipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<String>,
}

impl AxiomVerdict {
    fn holds(property: Property, rule: RuleId) -> AxiomVerdict {
        AxiomVerdict { property, rule, verdict: Verdict::Holds, witness: None, skipped_reason: None }
    }

    fn vacuous(property: Property, rule: RuleId) -> AxiomVerdict {
        AxiomVerdict {
            property,
            rule,
            verdict: Verdict::HoldsVacuous,
            witness: None,
            skipped_reason: None,
        }
    }

    fn violated(property: Property, rule: RuleId, witness: String) -> AxiomVerdict {
        AxiomVerdict {
            property,
            rule,
            verdict: Verdict::Violated,
            witness: Some(witness),
            skipped_reason: None,
        }
    }

    fn skipped(property: Property, rule: RuleId, reason: &str) -> AxiomVerdict {
        AxiomVerdict {
            property,
            rule,
            verdict: Verdict::Skipped,
            witness: None,
            skipped_reason: Some(reason.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Property checkers
// ---------------------------------------------------------------------------

/// A complete winner set, or `None` when truncation makes it untrustworthy.
fn complete_winners(e: &Election, rule: RuleId, config: &SolveConfig) -> Option<WinnerSet> {
    let set = winner_set(e, rule, config);
    set.complete.then_some(set)
}

const TRUNCATED: &str = "winner set truncated";

/// P1: concatenating `e1` and `e2` must leave some winner at least as good
/// (in minimum agent score) as every pairing of separate winners. The
/// universal-existential condition collapses to comparing two maxima
/// because the combined side does not depend on the pair.
pub fn check_safe_concatenation(
    e1: &Election,
    e2: &Election,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<AxiomVerdict, AxiomsError> {
    let property = Property::SafeConcatenation;
    let combined = concat_elections(e1, e2)?;
    let (Some(w1), Some(w2), Some(w)) = (
        complete_winners(e1, rule, config),
        complete_winners(e2, rule, config),
        complete_winners(&combined, rule, config),
    ) else {
        return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED));
    };
    let best_combined = w
        .winners
        .iter()
        .map(|x| score_agent_min(&combined, x).expect("winner is valid"))
        .max()
        .expect("winner sets are nonempty");
    let mut worst: Option<(u64, &CommitteeSequence, &CommitteeSequence)> = None;
    for x1 in &w1.winners {
        for x2 in &w2.winners {
            let mut committees = x1.committees().to_vec();
            committees.extend_from_slice(x2.committees());
            let joined = CommitteeSequence::from_sorted_unchecked(committees);
            let v = score_agent_min(&combined, &joined).expect("concatenation is valid");
            if worst.as_ref().map_or(true, |&(bv, _, _)| v > bv) {
                worst = Some((v, x1, x2));
            }
        }
    }
    let (pair_best, x1, x2) = worst.expect("winner sets are nonempty");
    if best_combined >= pair_best {
        Ok(AxiomVerdict::holds(property, rule))
    } else {
        Ok(AxiomVerdict::violated(
            property,
            rule,
            format!(
                "separate winners {} and {} reach minimum score {pair_best} after \
                 concatenation, but the best combined winner reaches only {best_combined}",
                x1.display(e1),
                x2.display(e2)
            ),
        ))
    }
}

/// P2: the level-wise union of two disjoint electorates must leave some
/// winner at least as good (in minimum agent score) as every pairing of
/// separate winners.
pub fn check_safe_union(
    e1: &Election,
    e2: &Election,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<AxiomVerdict, AxiomsError> {
    let property = Property::SafeUnion;
    let combined = union_elections(e1, e2)?;
    let (Some(w1), Some(w2), Some(w)) = (
        complete_winners(e1, rule, config),
        complete_winners(e2, rule, config),
        complete_winners(&combined, rule, config),
    ) else {
        return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED));
    };
    // Index maps from each election's per-level candidates into the union.
    let union_pos: Vec<HashMap<&str, u32>> = combined
        .levels()
        .iter()
        .map(|level| {
            level
                .candidates()
                .iter()
                .enumerate()
                .map(|(i, c)| (c.as_str(), i as u32))
                .collect()
        })
        .collect();
    let map_committee = |e: &Election, t: usize, committee: &[u32]| -> Vec<u32> {
        committee
            .iter()
            .map(|&c| union_pos[t][e.level(t).candidates()[c as usize].as_str()])
            .collect()
    };
    let best_combined = w
        .winners
        .iter()
        .map(|x| score_agent_min(&combined, x).expect("winner is valid"))
        .max()
        .expect("winner sets are nonempty");
    let mut worst: Option<(u64, &CommitteeSequence, &CommitteeSequence)> = None;
    for x1 in &w1.winners {
        for x2 in &w2.winners {
            let mut committees = Vec::with_capacity(combined.num_levels());
            let mut feasible = true;
            for t in 0..combined.num_levels() {
                let mut joint = map_committee(e1, t, x1.committee(t));
                joint.extend(map_committee(e2, t, x2.committee(t)));
                joint.sort_unstable();
                joint.dedup();
                // A candidate picked on both sides shrinks the union below
                // the summed committee size; such pairs have no union.
                if joint.len() != combined.level(t).k() {
                    feasible = false;
                    break;
                }
                committees.push(joint);
            }
            if !feasible {
                continue;
            }
            let joined = CommitteeSequence::from_sorted_unchecked(committees);
            let v = score_agent_min(&combined, &joined).expect("union sequence is valid");
            if worst.as_ref().map_or(true, |&(bv, _, _)| v > bv) {
                worst = Some((v, x1, x2));
            }
        }
    }
    // No pair admits a union: the premise is empty.
    let Some((pair_best, x1, x2)) = worst else {
        return Ok(AxiomVerdict::vacuous(property, rule));
    };
    if best_combined >= pair_best {
        Ok(AxiomVerdict::holds(property, rule))
    } else {
        Ok(AxiomVerdict::violated(
            property,
            rule,
            format!(
                "separate winners {} and {} reach minimum score {pair_best} after the \
                 union, but the best combined winner reaches only {best_combined}",
                x1.display(e1),
                x2.display(e2)
            ),
        ))
    }
}

/// Builds P3's combined election: `e1`'s candidate structure with both
/// electorates' utility rows stacked (`e2`'s remapped onto `e1`'s
/// per-level candidate order).
pub fn sub_consistency_merge(e1: &Election, e2: &Election) -> Result<Election, AxiomsError> {
    if e1.num_levels() != e2.num_levels() {
        return Err(AxiomsError::TauMismatch(e1.num_levels(), e2.num_levels()));
    }
    for a in e2.agents() {
        if e1.agents().contains(a) {
            return Err(AxiomsError::OverlappingAgents(a.clone()));
        }
    }
    let mut agents = e1.agents().to_vec();
    agents.extend_from_slice(e2.agents());
    let mut levels = Vec::with_capacity(e1.num_levels());
    for (t, (l1, l2)) in e1.levels().iter().zip(e2.levels()).enumerate() {
        let remap = candidate_remap(l1, l2, t)?;
        let mut utilities = l1.utilities().to_vec();
        for a in 0..e2.num_agents() {
            let mut row = vec![0u64; l1.width()];
            for (c2, &c1) in remap.iter().enumerate() {
                row[c1 as usize] = l2.utility(a, c2);
            }
            utilities.push(row);
        }
        levels.push(Level::new(l1.candidates().to_vec(), l1.k(), utilities));
    }
    Ok(Election::new(agents, levels, None)?)
}

/// Per candidate index of `l2`, the index of the same-named candidate in
/// `l1`; errors unless the candidate sets and committee sizes agree.
fn candidate_remap(l1: &Level, l2: &Level, t: usize) -> Result<Vec<u32>, AxiomsError> {
    if l1.width() != l2.width() || l1.k() != l2.k() {
        return Err(AxiomsError::CandidateMismatch { level: t });
    }
    let pos: HashMap<&str, u32> = l1
        .candidates()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i as u32))
        .collect();
    l2.candidates()
        .iter()
        .map(|c| {
            pos.get(c.as_str())
                .copied()
                .ok_or(AxiomsError::CandidateMismatch { level: t })
        })
        .collect()
}

/// P3: every sequence winning in both sub-electorates (if any) must also
/// win once the electorates are combined over the shared candidate
/// structure.
pub fn check_sub_consistency(
    e1: &Election,
    e2: &Election,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<AxiomVerdict, AxiomsError> {
    let property = Property::SubConsistency;
    let combined = sub_consistency_merge(e1, e2)?;
    let (Some(w1), Some(w2)) = (
        complete_winners(e1, rule, config),
        complete_winners(e2, rule, config),
    ) else {
        return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED));
    };
    // Re-express e2's winners in e1's candidate order before intersecting.
    let remaps: Vec<Vec<u32>> = e1
        .levels()
        .iter()
        .zip(e2.levels())
        .enumerate()
        .map(|(t, (l1, l2))| candidate_remap(l1, l2, t))
        .collect::<Result<_, _>>()?;
    let w2_mapped: BTreeSet<CommitteeSequence> = w2
        .winners
        .iter()
        .map(|x| {
            CommitteeSequence::from_sorted_unchecked(
                x.committees()
                    .iter()
                    .enumerate()
                    .map(|(t, committee)| {
                        let mut mapped: Vec<u32> =
                            committee.iter().map(|&c| remaps[t][c as usize]).collect();
                        mapped.sort_unstable();
                        mapped
                    })
                    .collect(),
            )
        })
        .collect();
    let shared: Vec<&CommitteeSequence> = w1
        .winners
        .iter()
        .filter(|x| w2_mapped.contains(x))
        .collect();
    if shared.is_empty() {
        return Ok(AxiomVerdict::vacuous(property, rule));
    }
    let Some(w) = complete_winners(&combined, rule, config) else {
        return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED));
    };
    match shared.iter().find(|x| !w.winners.contains(x)) {
        None => Ok(AxiomVerdict::holds(property, rule)),
        Some(x) => Ok(AxiomVerdict::violated(
            property,
            rule,
            format!(
                "{} wins in both sub-electorates but not in the combined election",
                x.display(e1)
            ),
        )),
    }
}

/// P4: no winner may be Pareto-dominated by any valid sequence.
pub fn check_pareto(
    e: &Election,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<AxiomVerdict, AxiomsError> {
    let property = Property::Pareto;
    let Some(w) = complete_winners(e, rule, config) else {
        return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED));
    };
    let Ok(all) = enumerate_valid(e, EnumerationBudget::default()) else {
        return Ok(AxiomVerdict::skipped(property, rule, "enumeration budget exceeded"));
    };
    for y in all {
        for x in &w.winners {
            if crate::oracle::dominates(e, &y, x).expect("sequences are valid") {
                return Ok(AxiomVerdict::violated(
                    property,
                    rule,
                    format!("winner {} is dominated by {}", x.display(e), y.display(e)),
                ));
            }
        }
    }
    Ok(AxiomVerdict::holds(property, rule))
}

/// P5: on an election with at least two independent groups, the winner set
/// must equal the Cartesian product of the per-group winner sets.
pub fn check_independent_groups(
    e: &Election,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<AxiomVerdict, AxiomsError> {
    let property = Property::IndependentGroups;
    let grouping = detect_grouping(e);
    if grouping.len() < 2 {
        return Ok(AxiomVerdict::skipped(property, rule, "trivial grouping"));
    }
    let subs = sub_elections(e, &grouping)?;
    let mut sub_sets = Vec::with_capacity(subs.len());
    for sub in &subs {
        match complete_winners(sub, rule, config) {
            Some(set) => sub_sets.push(set.winners),
            None => return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED)),
        }
    }
    let Some(w) = complete_winners(e, rule, config) else {
        return Ok(AxiomVerdict::skipped(property, rule, TRUNCATED));
    };
    // Walk the product in canonical order (blocks are contiguous and
    // ordered, so block-major lexicographic order is canonical order) and
    // compare element-wise against the full winner set.
    let product_len = sub_sets
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    let mismatch = |witness: String| AxiomVerdict::violated(property, rule, witness);
    if product_len != w.winners.len() as u128 {
        return Ok(mismatch(format!(
            "winner set has {} sequences but the group product has {product_len}",
            w.winners.len()
        )));
    }
    let mut odo = vec![0usize; sub_sets.len()];
    for expect in &w.winners {
        let mut committees = Vec::with_capacity(e.num_levels());
        for (s, set) in sub_sets.iter().enumerate() {
            committees.extend_from_slice(set[odo[s]].committees());
        }
        let assembled = CommitteeSequence::from_sorted_unchecked(committees);
        if &assembled != expect {
            return Ok(mismatch(format!(
                "winner set and group product diverge at {} (product has {})",
                expect.display(e),
                assembled.display(e)
            )));
        }
        // Advance the product odometer, last group fastest.
        for s in (0..sub_sets.len()).rev() {
            odo[s] += 1;
            if odo[s] < sub_sets[s].len() {
                break;
            }
            odo[s] = 0;
        }
    }
    Ok(AxiomVerdict::holds(property, rule))
}

/// Convenience dispatcher over the two single-election properties (P4 and
/// P5); the pairwise properties need two elections and their own calls.
pub fn check_single(
    e: &Election,
    property: Property,
    rule: RuleId,
    config: &SolveConfig,
) -> Result<AxiomVerdict, AxiomsError> {
    match property {
        Property::Pareto => check_pareto(e, rule, config),
        Property::IndependentGroups => check_independent_groups(e, rule, config),
        other => Err(AxiomsError::NeedsPair(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lex_compare, sat_histogram, score_agent_min};
    use crate::oracle::{gen_example1, sample_election, RandomSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny(seed: u64) -> Election {
        let spec = RandomSpec {
            max_agents: 3,
            max_levels: 2,
            max_candidates: 3,
            max_k: 2,
            max_utility: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_election(&spec, &mut rng)
    }

    /// Same layout as `tiny`, with agent and candidate names disjoint from
    /// every `tiny` election.
    fn tiny_disjoint(seed: u64) -> Election {
        let e = tiny(seed);
        let agents = e.agents().iter().map(|a| format!("x{a}")).collect();
        let levels = e
            .levels()
            .iter()
            .map(|l| {
                Level::new(
                    l.candidates().iter().map(|c| format!("x{c}")).collect(),
                    l.k(),
                    l.utilities().to_vec(),
                )
            })
            .collect();
        Election::new(agents, levels, None).unwrap()
    }

    #[test]
    fn concatenation_stacks_levels() {
        let e = gen_example1();
        let c = concat_elections(&e, &e).unwrap();
        assert_eq!(c.num_levels(), 6);
        assert_eq!(c.agents(), e.agents());
        assert_eq!(c.level(4).candidates(), e.level(1).candidates());
        let other = Election::new(
            vec!["someone".into()],
            vec![Level::new(vec!["c".into()], 1, vec![vec![1]])],
            None,
        )
        .unwrap();
        assert!(matches!(
            concat_elections(&e, &other),
            Err(AxiomsError::AgentMismatch)
        ));
    }

    #[test]
    fn union_pads_cross_utilities_with_zero() {
        let e1 = tiny(1);
        let e2 = (0..100u64)
            .map(|s| tiny_disjoint(1000 + s))
            .find(|e| e.num_levels() == e1.num_levels())
            .expect("some seed matches the level count");
        let u = union_elections(&e1, &e2).unwrap();
        assert_eq!(u.num_agents(), e1.num_agents() + e2.num_agents());
        for t in 0..u.num_levels() {
            assert_eq!(u.level(t).k(), e1.level(t).k() + e2.level(t).k());
            assert_eq!(
                u.level(t).width(),
                e1.level(t).width() + e2.level(t).width()
            );
            // First electorate's agents value the second's candidates at 0.
            for a in 0..e1.num_agents() {
                for c in e1.level(t).width()..u.level(t).width() {
                    assert_eq!(u.level(t).utility(a, c), 0);
                }
            }
        }
        assert!(union_elections(&e1, &e1).is_err());
    }

    #[test]
    fn union_minimum_score_splits_by_electorate() {
        // With disjoint candidate names, an agent's score under a united
        // sequence is its score under its own half.
        for seed in 0..30u64 {
            let e1 = tiny(seed);
            let e2 = tiny_disjoint(seed + 1000);
            if e1.num_levels() != e2.num_levels() {
                continue;
            }
            let u = union_elections(&e1, &e2).unwrap();
            let x1 = crate::solver::solve_one(
                &e1,
                crate::solver::Objective::AgentMin,
                &SolveConfig::unbounded(),
            )
            .winner;
            let x2 = crate::solver::solve_one(
                &e2,
                crate::solver::Objective::AgentMin,
                &SolveConfig::unbounded(),
            )
            .winner;
            let mut committees = Vec::new();
            for t in 0..u.num_levels() {
                let mut joint: Vec<u32> = x1.committee(t).to_vec();
                let offset = e1.level(t).width() as u32;
                joint.extend(x2.committee(t).iter().map(|&c| c + offset));
                committees.push(joint);
            }
            let joined = CommitteeSequence::from_sorted_unchecked(committees);
            assert_eq!(
                score_agent_min(&u, &joined).unwrap(),
                score_agent_min(&e1, &x1)
                    .unwrap()
                    .min(score_agent_min(&e2, &x2).unwrap()),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn grouping_isolates_disjoint_support_blocks() {
        // One agent supports only level 0; three others only levels 1–4.
        let mut utilities_first = vec![vec![2, 1]];
        utilities_first.extend(vec![vec![0, 0]; 3]);
        let mut levels = vec![Level::new(
            vec!["c0".into(), "c1".into()],
            1,
            utilities_first,
        )];
        for _ in 1..5 {
            let mut rows = vec![vec![0, 0]];
            rows.extend(vec![vec![1, 2]; 3]);
            levels.push(Level::new(vec!["d0".into(), "d1".into()], 1, rows));
        }
        let e = Election::new(
            vec!["a1".into(), "a2".into(), "a3".into(), "a4".into()],
            levels,
            None,
        )
        .unwrap();
        let g = detect_grouping(&e);
        assert_eq!(g.agent_parts, vec![vec![0], vec![1, 2, 3]]);
        assert_eq!(g.level_cuts, vec![1, 5]);
        assert_eq!(g.block(0), (0, 1));
        assert_eq!(g.block(1), (1, 5));
    }

    #[test]
    fn grouping_merges_interleaved_support() {
        // Supports {a}, {b}, {a}: the outer blocks share an agent, forcing
        // everything between into one trivial group.
        let rows = |a: u64, b: u64| vec![vec![a], vec![b]];
        let e = Election::new(
            vec!["a".into(), "b".into()],
            vec![
                Level::new(vec!["c0".into()], 1, rows(1, 0)),
                Level::new(vec!["c1".into()], 1, rows(0, 1)),
                Level::new(vec!["c2".into()], 1, rows(1, 0)),
            ],
            None,
        )
        .unwrap();
        let g = detect_grouping(&e);
        assert_eq!(g.len(), 1);
        assert_eq!(g.agent_parts, vec![vec![0, 1]]);
        assert_eq!(g.level_cuts, vec![3]);
    }

    #[test]
    fn grouping_handles_zero_agents_and_dead_levels() {
        // Agent 2 values nothing; level 1 is supported by nobody.
        let e = Election::new(
            vec!["a".into(), "b".into(), "z".into()],
            vec![
                Level::new(vec!["c0".into()], 1, vec![vec![1], vec![0], vec![0]]),
                Level::new(vec!["c1".into()], 1, vec![vec![0], vec![0], vec![0]]),
                Level::new(vec!["c2".into()], 1, vec![vec![0], vec![3], vec![0]]),
            ],
            None,
        )
        .unwrap();
        let g = detect_grouping(&e);
        assert_eq!(g.agent_parts, vec![vec![0, 2], vec![1]]);
        assert_eq!(g.level_cuts, vec![2, 3]);
    }

    #[test]
    fn trivial_grouping_on_fully_shared_support() {
        let e = gen_example1();
        let g = detect_grouping(&e);
        assert_eq!(g.len(), 1);
        assert_eq!(g.agent_parts, vec![vec![0, 1, 2, 3]]);
    }

    fn level_supported(e: &Election, t: usize) -> bool {
        (0..e.num_agents())
            .any(|a| (0..e.level(t).width()).any(|c| e.level(t).utility(a, c) > 0))
    }

    #[test]
    fn glue_produces_a_two_group_election() {
        let mut checked = 0;
        for seed in 0..30u64 {
            let e1 = tiny(seed);
            let e2 = tiny(seed + 500);
            // Dead boundary levels (nobody supports them) legitimately
            // shift the detected cut; require supported edges to pin it.
            if !level_supported(&e1, e1.num_levels() - 1) || !level_supported(&e2, 0) {
                continue;
            }
            checked += 1;
            let glued = glue_elections(&e1, &e2).unwrap();
            assert_eq!(glued.num_levels(), e1.num_levels() + e2.num_levels());
            assert_eq!(glued.num_agents(), e1.num_agents() + e2.num_agents());
            let g = detect_grouping(&glued);
            // Each side may split further, but the construction's cut is
            // always present.
            assert!(g.len() >= 2, "seed {seed}");
            assert!(g.level_cuts.contains(&e1.num_levels()), "seed {seed}");
            let subs = sub_elections(&glued, &g).unwrap();
            assert_eq!(
                subs.iter().map(|s| s.num_levels()).sum::<usize>(),
                glued.num_levels()
            );
            assert_eq!(
                subs.iter().map(|s| s.num_agents()).sum::<usize>(),
                glued.num_agents()
            );
        }
        assert!(checked >= 10);
    }

    #[test]
    fn pairwise_checks_hold_on_safe_rules() {
        let config = SolveConfig::unbounded();
        for seed in 0..12u64 {
            let e1 = tiny(seed);
            let e2_same_agents = {
                // Same agent list as e1 for concatenation.
                let donor = tiny(seed + 100);
                let levels = donor
                    .levels()
                    .iter()
                    .map(|l| {
                        Level::new(
                            l.candidates().to_vec(),
                            l.k(),
                            (0..e1.num_agents())
                                .map(|a| {
                                    l.utilities()[a % donor.num_agents()].clone()
                                })
                                .collect(),
                        )
                    })
                    .collect();
                Election::new(e1.agents().to_vec(), levels, None).unwrap()
            };
            for rule in [RuleId::Lex, RuleId::Egal] {
                let v = check_safe_concatenation(&e1, &e2_same_agents, rule, &config).unwrap();
                assert_eq!(v.verdict, Verdict::Holds, "seed {seed} {rule} P1");
            }
            let e2 = tiny_disjoint(seed + 200);
            if e1.num_levels() == e2.num_levels() {
                for rule in [RuleId::Lex, RuleId::Egal] {
                    let v = check_safe_union(&e1, &e2, rule, &config).unwrap();
                    assert_eq!(v.verdict, Verdict::Holds, "seed {seed} {rule} P2");
                }
            }
        }
    }

    #[test]
    fn duplicated_electorates_are_sub_consistent() {
        let config = SolveConfig::unbounded();
        for seed in 0..12u64 {
            let e1 = tiny(seed);
            let e2 = {
                let agents = e1.agents().iter().map(|a| format!("twin-{a}")).collect();
                let levels = e1
                    .levels()
                    .iter()
                    .map(|l| Level::new(l.candidates().to_vec(), l.k(), l.utilities().to_vec()))
                    .collect();
                Election::new(agents, levels, None).unwrap()
            };
            for rule in RuleId::ALL {
                let v = check_sub_consistency(&e1, &e2, rule, &config).unwrap();
                assert_eq!(v.verdict, Verdict::Holds, "seed {seed} {rule}");
            }
        }
    }

    #[test]
    fn sub_consistency_respects_candidate_reordering() {
        // e2 lists the same candidates in reverse order; winners must be
        // compared by name, not by raw index.
        let e1 = Election::new(
            vec!["a".into()],
            vec![Level::new(
                vec!["p".into(), "q".into()],
                1,
                vec![vec![5, 1]],
            )],
            None,
        )
        .unwrap();
        let e2 = Election::new(
            vec!["b".into()],
            vec![Level::new(
                vec!["q".into(), "p".into()],
                1,
                vec![vec![1, 5]],
            )],
            None,
        )
        .unwrap();
        let config = SolveConfig::unbounded();
        let v = check_sub_consistency(&e1, &e2, RuleId::Egal, &config).unwrap();
        // Both prefer p; the shared winner survives the merge.
        assert_eq!(v.verdict, Verdict::Holds);

        // Flip e2's utilities: now the winners differ by name and the
        // premise is empty.
        let e3 = Election::new(
            vec!["b".into()],
            vec![Level::new(
                vec!["q".into(), "p".into()],
                1,
                vec![vec![5, 1]],
            )],
            None,
        )
        .unwrap();
        let v = check_sub_consistency(&e1, &e3, RuleId::Egal, &config).unwrap();
        assert_eq!(v.verdict, Verdict::HoldsVacuous);
    }

    #[test]
    fn pareto_holds_for_the_histogram_rule() {
        let config = SolveConfig::unbounded();
        for seed in 0..25u64 {
            let e = tiny(seed);
            let v = check_pareto(&e, RuleId::Lex, &config).unwrap();
            assert_eq!(v.verdict, Verdict::Holds, "seed {seed}");
        }
        // A single valid sequence can never be dominated.
        let e = Election::new(
            vec!["a".into()],
            vec![Level::new(vec!["c".into()], 1, vec![vec![1]])],
            None,
        )
        .unwrap();
        for rule in RuleId::ALL {
            let v = check_pareto(&e, rule, &config).unwrap();
            assert_eq!(v.verdict, Verdict::Holds, "{rule}");
        }
    }

    #[test]
    fn independent_groups_hold_for_histogram_and_greedy_rules() {
        let config = SolveConfig::unbounded();
        let mut checked = 0;
        for seed in 0..20u64 {
            let e1 = tiny(seed);
            let e2 = tiny(seed + 700);
            let glued = glue_elections(&e1, &e2).unwrap();
            if detect_grouping(&glued).len() < 2 {
                continue;
            }
            checked += 1;
            for rule in [RuleId::Lex, RuleId::Greedy] {
                let v = check_independent_groups(&glued, rule, &config).unwrap();
                assert_eq!(v.verdict, Verdict::Holds, "seed {seed} {rule}");
            }
        }
        assert!(checked >= 10);
    }

    #[test]
    fn independent_groups_skip_trivial_groupings() {
        let e = gen_example1();
        let v =
            check_independent_groups(&e, RuleId::Lex, &SolveConfig::unbounded()).unwrap();
        assert_eq!(v.verdict, Verdict::Skipped);
        assert_eq!(v.skipped_reason.as_deref(), Some("trivial grouping"));
    }

    #[test]
    fn truncated_winner_sets_yield_skipped() {
        // Cap the winner set below the worked example's three egalitarian
        // winners: every checker that needs the full set must skip.
        let e = gen_example1();
        let capped = SolveConfig { winner_cap: 1, ..SolveConfig::unbounded() };
        let v = check_pareto(&e, RuleId::Egal, &capped).unwrap();
        assert_eq!(v.verdict, Verdict::Skipped);
        assert_eq!(v.skipped_reason.as_deref(), Some(TRUNCATED));
    }

    #[test]
    fn max_max_collapse_matches_the_literal_condition() {
        // On small pairs, evaluate the universal-existential reading of P1
        // directly and compare with the checker.
        let config = SolveConfig::unbounded();
        for seed in 40..52u64 {
            let e1 = tiny(seed);
            let e2 = {
                let donor = tiny(seed + 300);
                let levels = donor
                    .levels()
                    .iter()
                    .map(|l| {
                        Level::new(
                            l.candidates().to_vec(),
                            l.k(),
                            (0..e1.num_agents())
                                .map(|a| l.utilities()[a % donor.num_agents()].clone())
                                .collect(),
                        )
                    })
                    .collect();
                Election::new(e1.agents().to_vec(), levels, None).unwrap()
            };
            for rule in [RuleId::Egal, RuleId::Sum, RuleId::Greedy] {
                let combined = concat_elections(&e1, &e2).unwrap();
                let w1 = winner_set(&e1, rule, &config);
                let w2 = winner_set(&e2, rule, &config);
                let w = winner_set(&combined, rule, &config);
                assert!(w1.complete && w2.complete && w.complete);
                let literal = w1.winners.iter().all(|x1| {
                    w2.winners.iter().all(|x2| {
                        let mut committees = x1.committees().to_vec();
                        committees.extend_from_slice(x2.committees());
                        let joined = CommitteeSequence::from_sorted_unchecked(committees);
                        let target = score_agent_min(&combined, &joined).unwrap();
                        w.winners
                            .iter()
                            .any(|x| score_agent_min(&combined, x).unwrap() >= target)
                    })
                });
                let verdict = check_safe_concatenation(&e1, &e2, rule, &config)
                    .unwrap()
                    .verdict;
                assert_eq!(
                    literal,
                    verdict == Verdict::Holds,
                    "seed {seed} rule {rule}"
                );
            }
        }
    }

    #[test]
    fn histogram_rule_factors_over_glued_elections() {
        // Beyond the verdict: the histogram winner of a glued election is
        // the pair of per-side histogram winners.
        let config = SolveConfig::unbounded();
        for seed in 60..70u64 {
            let e1 = tiny(seed);
            let e2 = tiny(seed + 900);
            let glued = glue_elections(&e1, &e2).unwrap();
            let g = detect_grouping(&glued);
            if g.len() != 2 || g.level_cuts[0] != e1.num_levels() {
                continue;
            }
            let w = winner_set(&glued, RuleId::Lex, &config);
            let subs = sub_elections(&glued, &g).unwrap();
            let w1 = winner_set(&subs[0], RuleId::Lex, &config);
            let w2 = winner_set(&subs[1], RuleId::Lex, &config);
            assert_eq!(w.winners.len(), w1.winners.len() * w2.winners.len());
            // Histograms of glued winners equal the per-side histograms
            // with zero-score counts adjusted for the other side's agents.
            let x = &w.winners[0];
            let h = sat_histogram(&glued, x).unwrap();
            let h1 = sat_histogram(&subs[0], &w1.winners[0]).unwrap();
            for (s, &c) in h1.counts().iter().enumerate().skip(1) {
                assert!(h.counts()[s] >= c, "seed {seed} score {s}");
            }
            let _ = lex_compare(&h, &h);
        }
    }

    #[test]
    fn verdict_serialization_uses_kebab_case() {
        let v = AxiomVerdict::skipped(Property::IndependentGroups, RuleId::Asl, "trivial grouping");
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"independent-groups\""));
        assert!(json.contains("\"ASL\""));
        assert!(json.contains("\"skipped\""));
        assert!(!json.contains("witness"));
        assert_eq!(Property::SafeConcatenation.code(), "P1");
        assert_eq!(Property::SafeUnion.to_string(), "safe-union");
        assert_eq!(Verdict::HoldsVacuous.to_string(), "holds-vacuous");
    }
}
