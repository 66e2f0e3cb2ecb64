//! Ranked-preference ingestion.
//!
//! Converts strict (possibly incomplete) linear orders plus a candidate →
//! level label map into multilevel elections, in three utility classes:
//! single approval, double approval, and a ten-point Borda-ratio split.
//! A cleanup pass then drops unsupported candidates and unanimous levels
//! and rejects degenerate or oversized instances, and a committee-size
//! rule derives each level's seat count from its candidate count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Election, Level, Meta, ModelError};

/// Errors raised while parsing or converting preference data.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: candidate id {id} out of range (1..={count})")]
    UnknownCandidateId { line: usize, id: usize, count: usize },
    #[error("line {line}: candidate id {id} repeated within one order")]
    DuplicateInOrder { line: usize, id: usize },
    #[error("profile lists no votes")]
    EmptyProfile,
    #[error("duplicate candidate name `{0}` in the header")]
    DuplicateCandidate(String),
    #[error("label map assigns unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("candidate `{candidate}` labeled with unknown level `{label}`")]
    UnknownLevelLabel { candidate: String, label: String },
    #[error("candidate `{0}` has no level labels")]
    UnlabeledCandidate(String),
    #[error("level `{0}` has no candidates")]
    EmptyLevel(String),
    #[error("invalid label map: {0}")]
    BadLabelMap(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// Ranked profiles
// ---------------------------------------------------------------------------

/// A multiset of strict, possibly incomplete, linear orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedProfile {
    /// Candidate names in file order.
    pub candidates: Vec<String>,
    /// One order per agent (multiplicities already expanded, preserving
    /// file order): candidate indices, most preferred first.
    pub orders: Vec<Vec<u32>>,
}

impl RankedProfile {
    pub fn num_agents(&self) -> usize {
        self.orders.len()
    }
}

/// Parses the strict-order preference format:
///
/// ```text
/// <number of candidates>
/// <candidate name>        (one line per candidate)
/// ...
/// <multiplicity>: <id>, <id>, ...   (ids are 1-based header positions)
/// ```
///
/// Blank lines and `#` comment lines are ignored. Each vote line expands
/// into `multiplicity` identical agents.
pub fn parse_ranked(text: &str) -> Result<RankedProfile, IngestError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines.next().ok_or(IngestError::EmptyProfile)?;
    let count: usize = header.parse().map_err(|_| IngestError::Malformed {
        line,
        reason: format!("expected a candidate count, found `{header}`"),
    })?;
    if count == 0 {
        return Err(IngestError::Malformed {
            line,
            reason: "candidate count must be positive".into(),
        });
    }
    let mut candidates = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, name) = lines.next().ok_or(IngestError::Malformed {
            line,
            reason: format!("header promises {count} candidate names"),
        })?;
        if candidates.iter().any(|c| c == name) {
            let _ = line;
            return Err(IngestError::DuplicateCandidate(name.to_string()));
        }
        candidates.push(name.to_string());
    }
    let mut orders = Vec::new();
    for (line, vote) in lines {
        let (mult, order) = vote.split_once(':').ok_or(IngestError::Malformed {
            line,
            reason: "vote lines look like `<multiplicity>: <id>, <id>, ...`".into(),
        })?;
        let mult: usize = mult.trim().parse().map_err(|_| IngestError::Malformed {
            line,
            reason: format!("bad multiplicity `{}`", mult.trim()),
        })?;
        let mut ids: Vec<u32> = Vec::new();
        for token in order.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let id: usize = token.parse().map_err(|_| IngestError::Malformed {
                line,
                reason: format!("bad candidate id `{token}`"),
            })?;
            if id == 0 || id > count {
                return Err(IngestError::UnknownCandidateId { line, id, count });
            }
            let idx = (id - 1) as u32;
            if ids.contains(&idx) {
                return Err(IngestError::DuplicateInOrder { line, id });
            }
            ids.push(idx);
        }
        for _ in 0..mult {
            orders.push(ids.clone());
        }
    }
    if orders.is_empty() {
        return Err(IngestError::EmptyProfile);
    }
    Ok(RankedProfile { candidates, orders })
}

// ---------------------------------------------------------------------------
// Label maps
// ---------------------------------------------------------------------------

/// Sidecar document assigning every candidate to one or more levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    /// Level names in election order.
    pub levels: Vec<String>,
    /// Candidate name → level names the candidate runs on.
    pub assignments: BTreeMap<String, Vec<String>>,
}

impl LabelMap {
    /// Parses the JSON sidecar format.
    pub fn from_json(text: &str) -> Result<LabelMap, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::BadLabelMap(e.to_string()))
    }
}

/// The three utility constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceClass {
    #[serde(rename = "APPROVAL1")]
    Approval1,
    #[serde(rename = "APPROVAL2")]
    Approval2,
    #[serde(rename = "POINT")]
    Point,
}

impl InstanceClass {
    pub const ALL: [InstanceClass; 3] =
        [InstanceClass::Approval1, InstanceClass::Approval2, InstanceClass::Point];

    pub fn name(self) -> &'static str {
        match self {
            InstanceClass::Approval1 => "APPROVAL1",
            InstanceClass::Approval2 => "APPROVAL2",
            InstanceClass::Point => "POINT",
        }
    }
}

impl std::fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InstanceClass {
    type Err = String;

    fn from_str(s: &str) -> Result<InstanceClass, String> {
        match s.to_ascii_uppercase().as_str() {
            "APPROVAL1" => Ok(InstanceClass::Approval1),
            "APPROVAL2" => Ok(InstanceClass::Approval2),
            "POINT" => Ok(InstanceClass::Point),
            _ => Err(format!(
                "unknown instance class `{s}` (expected APPROVAL1, APPROVAL2, or POINT)"
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Election construction
// ---------------------------------------------------------------------------

/// Integer round-half-up of `numerator / denominator`.
fn round_half_up(numerator: u64, denominator: u64) -> u64 {
    let q = numerator / denominator;
    // Round up exactly when twice the remainder reaches the denominator.
    if 2 * (numerator % denominator) >= denominator {
        q + 1
    } else {
        q
    }
}

/// Builds the multilevel election for a profile, a label map, and a
/// utility class. Agents are the expanded voters in file order (named
/// `v1`, `v2`, …); each level's candidates keep file order. Committee
/// sizes are provisional (1 per level) until a committee-size rule runs.
pub fn build_election(
    profile: &RankedProfile,
    labels: &LabelMap,
    class: InstanceClass,
) -> Result<Election, IngestError> {
    for candidate in labels.assignments.keys() {
        if !profile.candidates.contains(candidate) {
            return Err(IngestError::UnknownCandidate(candidate.clone()));
        }
    }
    for name in &profile.candidates {
        let assigned = labels
            .assignments
            .get(name)
            .ok_or_else(|| IngestError::UnlabeledCandidate(name.clone()))?;
        if assigned.is_empty() {
            return Err(IngestError::UnlabeledCandidate(name.clone()));
        }
        for label in assigned {
            if !labels.levels.contains(label) {
                return Err(IngestError::UnknownLevelLabel {
                    candidate: name.clone(),
                    label: label.clone(),
                });
            }
        }
    }
    // Per level, the member candidate indices in file order.
    let members: Vec<Vec<u32>> = labels
        .levels
        .iter()
        .map(|level| {
            (0..profile.candidates.len() as u32)
                .filter(|&c| {
                    labels.assignments[&profile.candidates[c as usize]].contains(level)
                })
                .collect()
        })
        .collect();
    for (level, m) in labels.levels.iter().zip(&members) {
        if m.is_empty() {
            return Err(IngestError::EmptyLevel(level.clone()));
        }
    }
    let m_o = profile.candidates.len() as u64;
    let n = profile.num_agents();
    let levels = labels
        .levels
        .iter()
        .zip(&members)
        .map(|(_, member)| {
            let col_of: BTreeMap<u32, usize> =
                member.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let mut utilities = vec![vec![0u64; member.len()]; n];
            for (a, order) in profile.orders.iter().enumerate() {
                // The agent's ranked candidates present on this level,
                // most preferred first, with global order positions.
                let present: Vec<(usize, u32)> = order
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| col_of.contains_key(c))
                    .map(|(p, &c)| (p, c))
                    .collect();
                match class {
                    InstanceClass::Approval1 => {
                        if let Some(&(_, c)) = present.first() {
                            utilities[a][col_of[&c]] = 1;
                        }
                    }
                    InstanceClass::Approval2 => {
                        for &(_, c) in present.iter().take(2) {
                            utilities[a][col_of[&c]] = 1;
                        }
                    }
                    InstanceClass::Point => match *present.as_slice() {
                        [] => {}
                        [(_, c)] => utilities[a][col_of[&c]] = 10,
                        [(p1, c1), (p2, c2), ..] => {
                            let b1 = m_o - p1 as u64;
                            let b2 = m_o - p2 as u64;
                            let u1 = round_half_up(10 * b1, b1 + b2);
                            utilities[a][col_of[&c1]] = u1;
                            utilities[a][col_of[&c2]] = 10 - u1;
                        }
                    },
                }
            }
            Level::new(
                member
                    .iter()
                    .map(|&c| profile.candidates[c as usize].clone())
                    .collect(),
                1,
                utilities,
            )
        })
        .collect();
    let agents = (1..=n).map(|i| format!("v{i}")).collect();
    let meta = Meta {
        class: Some(class.name().to_string()),
        ..Meta::default()
    };
    Ok(Election::new(agents, levels, Some(meta))?)
}

// ---------------------------------------------------------------------------
// Cleanup
// ---------------------------------------------------------------------------

/// Why cleanup rejected an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum RejectReason {
    /// At most one level remains.
    TooFewLevels { tau: usize },
    /// At most three distinct candidates remain.
    TooFewCandidates { m: usize },
    /// Distinct candidate count exceeds the class limit.
    TooManyCandidates { m: usize, limit: usize },
    /// Agent count exceeds the class limit.
    TooManyAgents { n: usize, limit: usize },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::TooFewLevels { tau } => write!(f, "only {tau} level(s) remain"),
            RejectReason::TooFewCandidates { m } => {
                write!(f, "only {m} distinct candidate(s) remain")
            }
            RejectReason::TooManyCandidates { m, limit } => {
                write!(f, "{m} distinct candidates exceed the limit of {limit}")
            }
            RejectReason::TooManyAgents { n, limit } => {
                write!(f, "{n} agents exceed the limit of {limit}")
            }
        }
    }
}

/// Result of the cleanup pass: a (possibly reduced) election, or the
/// reason the instance was discarded. Rejection is a value, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CleanupOutcome {
    Kept(Election),
    Rejected(RejectReason),
}

impl CleanupOutcome {
    pub fn kept(self) -> Option<Election> {
        match self {
            CleanupOutcome::Kept(e) => Some(e),
            CleanupOutcome::Rejected(_) => None,
        }
    }
}

/// Drops candidates no agent supports and levels every agent scores
/// identically, then rejects instances that end up degenerate (≤ 1 level
/// or ≤ 3 distinct candidates) or exceed the class size limits (more than
/// 160 candidates for the approval classes; more than 80 agents or 80
/// candidates for the point class). Committee sizes are clamped — with a
/// note in the metadata — when a level loses candidates below its `k`.
pub fn cleanup(e: &Election, class: InstanceClass) -> CleanupOutcome {
    let n = e.num_agents();
    let mut levels = Vec::new();
    let mut notes = Vec::new();
    for (t, level) in e.levels().iter().enumerate() {
        // Unanimous level: all agents assign the same utility row.
        let unanimous = (1..n).all(|a| level.utilities()[a] == level.utilities()[0]);
        if unanimous {
            continue;
        }
        let kept: Vec<usize> =
            (0..level.width()).filter(|&c| level.column_sum(c) > 0).collect();
        // A level an agent cares about has a positive entry somewhere, so
        // a non-unanimous level keeps at least one candidate.
        let k = if level.k() > kept.len() {
            notes.push(format!(
                "cleanup clamped k at level {t} from {} to {}",
                level.k(),
                kept.len()
            ));
            kept.len()
        } else {
            level.k()
        };
        levels.push(Level::new(
            kept.iter().map(|&c| level.candidates()[c].clone()).collect(),
            k,
            (0..n)
                .map(|a| kept.iter().map(|&c| level.utility(a, c)).collect())
                .collect(),
        ));
    }
    let tau = levels.len();
    if tau <= 1 {
        return CleanupOutcome::Rejected(RejectReason::TooFewLevels { tau });
    }
    let mut names: Vec<&str> = levels
        .iter()
        .flat_map(|l| l.candidates().iter().map(String::as_str))
        .collect();
    names.sort_unstable();
    names.dedup();
    let m = names.len();
    if m <= 3 {
        return CleanupOutcome::Rejected(RejectReason::TooFewCandidates { m });
    }
    match class {
        InstanceClass::Approval1 | InstanceClass::Approval2 => {
            if m > 160 {
                return CleanupOutcome::Rejected(RejectReason::TooManyCandidates {
                    m,
                    limit: 160,
                });
            }
        }
        InstanceClass::Point => {
            if n > 80 {
                return CleanupOutcome::Rejected(RejectReason::TooManyAgents { n, limit: 80 });
            }
            if m > 80 {
                return CleanupOutcome::Rejected(RejectReason::TooManyCandidates {
                    m,
                    limit: 80,
                });
            }
        }
    }
    let mut meta = e.meta().cloned().unwrap_or_default();
    meta.notes.extend(notes);
    CleanupOutcome::Kept(
        Election::new(e.agents().to_vec(), levels, Some(meta))
            .expect("cleanup preserves validity"),
    )
}

// ---------------------------------------------------------------------------
// Committee-size rule
// ---------------------------------------------------------------------------

/// Sets every level's committee size to `max(min(l, |C_t| − 1), 1)`:
/// `l` seats, but always at least one candidate left out, and never zero
/// seats. Records the rule in the metadata.
pub fn kappa_rule(e: &Election, l: usize) -> Election {
    assert!(l >= 1, "the committee-size parameter is positive");
    let levels = e
        .levels()
        .iter()
        .map(|level| {
            let k = l.min(level.width().saturating_sub(1)).max(1);
            Level::new(level.candidates().to_vec(), k, level.utilities().to_vec())
        })
        .collect();
    let mut meta = e.meta().cloned().unwrap_or_default();
    meta.kappa_rule = Some(format!("kappa^({l})"));
    Election::new(e.agents().to_vec(), levels, Some(meta))
        .expect("the committee-size rule preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(levels: &[&str], pairs: &[(&str, &[&str])]) -> LabelMap {
        LabelMap {
            levels: levels.iter().map(|s| s.to_string()).collect(),
            assignments: pairs
                .iter()
                .map(|(c, ls)| (c.to_string(), ls.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }

    #[test]
    fn parses_and_expands_multiplicities() {
        let p = parse_ranked("2\nAlice\nBob\n3: 1,2\n1: 2\n").unwrap();
        assert_eq!(p.candidates, vec!["Alice", "Bob"]);
        assert_eq!(p.num_agents(), 4);
        assert_eq!(p.orders[0], vec![0, 1]);
        assert_eq!(p.orders[2], vec![0, 1]);
        assert_eq!(p.orders[3], vec![1]);
    }

    #[test]
    fn parser_rejects_malformed_input() {
        assert!(matches!(parse_ranked(""), Err(IngestError::EmptyProfile)));
        assert!(matches!(
            parse_ranked("2\nA\nB\n"),
            Err(IngestError::EmptyProfile)
        ));
        assert!(matches!(
            parse_ranked("2\nA\nB\n1: 1,1\n"),
            Err(IngestError::DuplicateInOrder { id: 1, .. })
        ));
        assert!(matches!(
            parse_ranked("2\nA\nB\n1: 3\n"),
            Err(IngestError::UnknownCandidateId { id: 3, .. })
        ));
        assert!(matches!(
            parse_ranked("2\nA\nB\nnot a vote\n"),
            Err(IngestError::Malformed { .. })
        ));
        assert!(matches!(
            parse_ranked("2\nA\nA\n1: 1\n"),
            Err(IngestError::DuplicateCandidate(_))
        ));
    }

    #[test]
    fn point_splits_follow_the_borda_ratio() {
        // Four candidates overall; the agent ranks A then B on one level:
        // Borda scores 4 and 3, so A gets round(40/7) = 6 and B gets 4.
        let p = parse_ranked("4\nA\nB\nC\nD\n1: 1,2,3,4\n").unwrap();
        let lm = labels(
            &["L1", "L2"],
            &[("A", &["L1"]), ("B", &["L1"]), ("C", &["L2"]), ("D", &["L2"])],
        );
        let e = build_election(&p, &lm, InstanceClass::Point).unwrap();
        assert_eq!(e.level(0).utilities()[0], vec![6, 4]);
        // C and D sit at positions 2 and 3: Borda 2 and 1, split 7/3.
        assert_eq!(e.level(1).utilities()[0], vec![7, 3]);

        // Two candidates overall at positions 0 and 1: Borda 2 and 1.
        let p = parse_ranked("2\nA\nB\n1: 1,2\n").unwrap();
        let lm = labels(&["L1"], &[("A", &["L1"]), ("B", &["L1"])]);
        let e = build_election(&p, &lm, InstanceClass::Point).unwrap();
        assert_eq!(e.level(0).utilities()[0], vec![7, 3]);
    }

    #[test]
    fn point_gives_ten_to_a_sole_present_candidate() {
        let p = parse_ranked("3\nA\nB\nC\n1: 2,1\n").unwrap();
        let lm = labels(&["L1", "L2"], &[("A", &["L1"]), ("B", &["L1"]), ("C", &["L2"])]);
        let e = build_election(&p, &lm, InstanceClass::Point).unwrap();
        // B is ranked first: Borda 3 vs A's 2 → 6/4 split on level 1.
        assert_eq!(e.level(0).utilities()[0], vec![4, 6]);
        // C is not ranked at all → level 2 gives nothing.
        assert_eq!(e.level(1).utilities()[0], vec![0]);

        let p = parse_ranked("3\nA\nB\nC\n1: 3,1\n").unwrap();
        let e = build_election(&p, &lm, InstanceClass::Point).unwrap();
        // Only A is present on level 1 → it takes the full 10.
        assert_eq!(e.level(0).utilities()[0], vec![10, 0]);
        assert_eq!(e.level(1).utilities()[0], vec![10]);
    }

    #[test]
    fn approval_classes_cap_per_level_approvals() {
        let p = parse_ranked("4\nA\nB\nC\nD\n2: 1,2,3,4\n1: 4\n").unwrap();
        let lm = labels(
            &["L1"],
            &[("A", &["L1"]), ("B", &["L1"]), ("C", &["L1"]), ("D", &["L1"])],
        );
        let one = build_election(&p, &lm, InstanceClass::Approval1).unwrap();
        assert_eq!(one.level(0).utilities()[0], vec![1, 0, 0, 0]);
        assert_eq!(one.level(0).utilities()[2], vec![0, 0, 0, 1]);
        let two = build_election(&p, &lm, InstanceClass::Approval2).unwrap();
        assert_eq!(two.level(0).utilities()[0], vec![1, 1, 0, 0]);
        // A single present candidate is approved alone.
        assert_eq!(two.level(0).utilities()[2], vec![0, 0, 0, 1]);
    }

    #[test]
    fn class_invariants_hold_on_a_mixed_profile() {
        let text = "5\nA\nB\nC\nD\nE\n2: 1,2,3,4,5\n1: 5,3\n1: 2\n3: 4,1,5\n";
        let p = parse_ranked(text).unwrap();
        let lm = labels(
            &["L1", "L2"],
            &[
                ("A", &["L1"]),
                ("B", &["L1", "L2"]),
                ("C", &["L2"]),
                ("D", &["L1"]),
                ("E", &["L2"]),
            ],
        );
        for class in InstanceClass::ALL {
            let e = build_election(&p, &lm, class).unwrap();
            for level in e.levels() {
                for row in level.utilities() {
                    let sum: u64 = row.iter().sum();
                    match class {
                        InstanceClass::Approval1 => assert!(sum <= 1),
                        InstanceClass::Approval2 => {
                            assert!(sum <= 2);
                            assert!(row.iter().all(|&u| u <= 1));
                        }
                        InstanceClass::Point => {
                            assert!(sum == 0 || sum == 10, "row {row:?}");
                            // A split's larger share goes to the better
                            // rank: every nonzero pair has max ≥ 5.
                            if row.iter().filter(|&&u| u > 0).count() == 2 {
                                assert!(*row.iter().max().unwrap() >= 5);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn labels_are_validated() {
        let p = parse_ranked("2\nA\nB\n1: 1,2\n").unwrap();
        let missing = labels(&["L1"], &[("A", &["L1"])]);
        assert!(matches!(
            build_election(&p, &missing, InstanceClass::Approval1),
            Err(IngestError::UnlabeledCandidate(_))
        ));
        let unknown_level = labels(&["L1"], &[("A", &["L1"]), ("B", &["L9"])]);
        assert!(matches!(
            build_election(&p, &unknown_level, InstanceClass::Approval1),
            Err(IngestError::UnknownLevelLabel { .. })
        ));
        let stray = labels(&["L1"], &[("A", &["L1"]), ("B", &["L1"]), ("Z", &["L1"])]);
        assert!(matches!(
            build_election(&p, &stray, InstanceClass::Approval1),
            Err(IngestError::UnknownCandidate(_))
        ));
        let empty_level = labels(&["L1", "L2"], &[("A", &["L1"]), ("B", &["L1"])]);
        assert!(matches!(
            build_election(&p, &empty_level, InstanceClass::Approval1),
            Err(IngestError::EmptyLevel(_))
        ));
    }

    fn election(rows: Vec<Vec<Vec<u64>>>, widths: &[usize]) -> Election {
        // rows[t][a] = utilities; candidate names unique per level.
        let n = rows[0].len();
        let levels = rows
            .into_iter()
            .enumerate()
            .map(|(t, utilities)| {
                Level::new(
                    (0..widths[t]).map(|c| format!("t{t}c{c}")).collect(),
                    1,
                    utilities,
                )
            })
            .collect();
        Election::new((1..=n).map(|i| format!("v{i}")).collect(), levels, None).unwrap()
    }

    #[test]
    fn cleanup_drops_unanimous_levels_and_dead_candidates() {
        // Level 0: both agents score (1, 0) — unanimous, dropped.
        // Level 1: candidate 1 unsupported — dropped; candidate 0 stays.
        // Levels 2–4 keep the instance above the degeneracy floor.
        let e = election(
            vec![
                vec![vec![1, 0], vec![1, 0]],
                vec![vec![2, 0], vec![1, 0]],
                vec![vec![1, 2], vec![2, 1]],
                vec![vec![0, 3], vec![3, 0]],
            ],
            &[2, 2, 2, 2],
        );
        let cleaned = cleanup(&e, InstanceClass::Point).kept().unwrap();
        assert_eq!(cleaned.num_levels(), 3);
        assert_eq!(cleaned.level(0).width(), 1);
        assert_eq!(cleaned.level(0).candidates(), ["t1c0"]);
        assert_eq!(cleaned.num_distinct_candidates(), 5);
        // Idempotent: a second pass changes nothing.
        let again = cleanup(&cleaned, InstanceClass::Point).kept().unwrap();
        assert_eq!(again, cleaned);
    }

    #[test]
    fn cleanup_rejects_degenerate_instances() {
        // Everything unanimous → zero levels survive.
        let e = election(vec![vec![vec![1, 1], vec![1, 1]]], &[2]);
        assert_eq!(
            cleanup(&e, InstanceClass::Approval1),
            CleanupOutcome::Rejected(RejectReason::TooFewLevels { tau: 0 })
        );
        // Two surviving levels but only three distinct candidates.
        let e = election(
            vec![
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![1], vec![2]],
            ],
            &[2, 1],
        );
        assert_eq!(
            cleanup(&e, InstanceClass::Approval1),
            CleanupOutcome::Rejected(RejectReason::TooFewCandidates { m: 3 })
        );
    }

    #[test]
    fn cleanup_enforces_class_size_limits() {
        // 81 agents with varied utilities over two levels of 3 candidates.
        let n = 81;
        let rows = |t: usize| -> Vec<Vec<u64>> {
            (0..n)
                .map(|a| {
                    let mut row = vec![0u64; 3];
                    row[(a + t) % 3] = 1 + (a % 2) as u64;
                    row
                })
                .collect()
        };
        let e = election(vec![rows(0), rows(1)], &[3, 3]);
        assert_eq!(
            cleanup(&e, InstanceClass::Point),
            CleanupOutcome::Rejected(RejectReason::TooManyAgents { n: 81, limit: 80 })
        );
        // The approval classes have no agent limit.
        assert!(cleanup(&e, InstanceClass::Approval1).kept().is_some());
    }

    #[test]
    fn cleanup_clamps_oversized_committees_with_a_note() {
        let mut levels = vec![
            Level::new(
                vec!["a".into(), "b".into(), "c".into()],
                3,
                vec![vec![1, 0, 0], vec![2, 0, 0]],
            ),
            Level::new(
                vec!["d".into(), "e".into()],
                1,
                vec![vec![1, 2], vec![2, 1]],
            ),
        ];
        levels.push(Level::new(
            vec!["f".into(), "g".into()],
            1,
            vec![vec![0, 1], vec![1, 0]],
        ));
        let e = Election::new(vec!["v1".into(), "v2".into()], levels, None).unwrap();
        let cleaned = cleanup(&e, InstanceClass::Approval2).kept().unwrap();
        assert_eq!(cleaned.level(0).width(), 1);
        assert_eq!(cleaned.level(0).k(), 1);
        let meta = cleaned.meta().unwrap();
        assert_eq!(meta.notes.len(), 1);
        assert!(meta.notes[0].contains("clamped k at level 0"));
    }

    #[test]
    fn kappa_rule_follows_the_formula() {
        let e = election(
            vec![
                vec![vec![1, 2], vec![2, 1]],                 // width 2
                vec![vec![1, 2, 3, 4, 5], vec![5, 4, 3, 2, 1]], // width 5
                vec![vec![2], vec![1]],                       // width 1
            ],
            &[2, 5, 1],
        );
        let k2 = kappa_rule(&e, 2);
        assert_eq!(
            k2.levels().iter().map(Level::k).collect::<Vec<_>>(),
            vec![1, 2, 1]
        );
        let k3 = kappa_rule(&e, 3);
        assert_eq!(
            k3.levels().iter().map(Level::k).collect::<Vec<_>>(),
            vec![1, 3, 1]
        );
        assert_eq!(k3.meta().unwrap().kappa_rule.as_deref(), Some("kappa^(3)"));
    }

    #[test]
    fn pipeline_is_deterministic() {
        let text = "4\nW\nX\nY\nZ\n2: 1,3,2\n1: 4,2\n2: 2,4,1,3\n";
        let lm = labels(
            &["morning", "evening"],
            &[
                ("W", &["morning"]),
                ("X", &["morning", "evening"]),
                ("Y", &["evening"]),
                ("Z", &["morning", "evening"]),
            ],
        );
        let p = parse_ranked(text).unwrap();
        let a = build_election(&p, &lm, InstanceClass::Approval2).unwrap();
        let b = build_election(&p, &lm, InstanceClass::Approval2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.agents()[0], "v1");
        assert_eq!(a.meta().unwrap().class.as_deref(), Some("APPROVAL2"));
        assert_eq!(a.level(0).candidates(), ["W", "X", "Z"]);
    }
}
