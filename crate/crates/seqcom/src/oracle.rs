//! Brute-force reference implementations and adversarial instance
//! generators.
//!
//! Everything here is ground truth for tests: the winner sets computed by
//! [`brute_rule`] scan every valid committee sequence, and the generators
//! build elections from classic reductions (partition, unary bin packing,
//! vertex cover) whose decision thresholds are exposed so the equivalences
//! can be asserted against independent combinatorial oracles.
//!
//! Enumeration streams sequences in canonical order — per level, `k`-subsets
//! of the candidate indices in lexicographic order, chained level-major — so
//! winner sets come out canonically sorted without a separate pass.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{
    agent_scores, compute_weights, lex_compare, sat_histogram, score_triple, weighted_value,
    CommitteeSequence, Election, Level, Meta, ModelError, ScoreTriple, WeightOrder,
};
use crate::rules::RuleId;

/// Errors produced by enumeration and brute-force evaluation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{total} valid sequences exceed the enumeration budget of {budget}")]
    BudgetExceeded { total: u128, budget: u64 },
    #[error("rule {0:?} has no enumeration-based reference; its defining procedure is the reference")]
    UnsupportedRule(RuleId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// What to do when the number of valid sequences exceeds the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnExceed {
    /// Refuse to enumerate at all.
    Error,
    /// Enumerate the first `max_sequences` sequences and flag truncation.
    Truncate,
}

/// Cap on how many valid committee sequences an enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_sequences: u64,
    pub on_exceed: OnExceed,
}

impl Default for EnumerationBudget {
    fn default() -> EnumerationBudget {
        EnumerationBudget {
            max_sequences: 1_000_000,
            on_exceed: OnExceed::Error,
        }
    }
}

/// Number of valid committee sequences, `prod_t C(|C_t|, k_t)`, saturating
/// at `u128::MAX` for astronomically large spaces.
pub fn count_valid(e: &Election) -> u128 {
    let mut total: u128 = 1;
    for level in e.levels() {
        let choices = binomial(level.width() as u64, level.k() as u64);
        total = total.saturating_mul(choices);
    }
    total
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Multiply before dividing keeps the intermediate an integer;
        // saturate on overflow since callers only compare against budgets.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Streaming enumeration of all valid committee sequences in canonical
/// order. The total count is known up front; in [`OnExceed::Error`] mode an
/// over-budget space is rejected before the first sequence is produced.
pub fn enumerate_valid(
    e: &Election,
    budget: EnumerationBudget,
) -> Result<Enumeration<'_>, OracleError> {
    let total = count_valid(e);
    if total > budget.max_sequences as u128 && budget.on_exceed == OnExceed::Error {
        return Err(OracleError::BudgetExceeded {
            total,
            budget: budget.max_sequences,
        });
    }
    Ok(Enumeration {
        e,
        current: Some(
            e.levels()
                .iter()
                .map(|l| (0..l.k() as u32).collect())
                .collect(),
        ),
        remaining: budget.max_sequences,
        truncated: false,
    })
}

/// Iterator over valid sequences; see [`enumerate_valid`].
pub struct Enumeration<'a> {
    e: &'a Election,
    current: Option<Vec<Vec<u32>>>,
    remaining: u64,
    truncated: bool,
}

impl Enumeration<'_> {
    /// True once iteration stopped because the budget ran out rather than
    /// because the space was exhausted.
    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

impl Iterator for Enumeration<'_> {
    type Item = CommitteeSequence;

    fn next(&mut self) -> Option<CommitteeSequence> {
        let current = self.current.as_mut()?;
        if self.remaining == 0 {
            self.truncated = true;
            self.current = None;
            return None;
        }
        self.remaining -= 1;
        let result = CommitteeSequence::from_sorted_unchecked(current.clone());
        // Advance the level-major odometer: bump the last level's
        // combination; on wrap, reset it and carry leftward.
        let mut t = self.e.num_levels();
        loop {
            if t == 0 {
                self.current = None;
                break;
            }
            t -= 1;
            let width = self.e.level(t).width() as u32;
            if next_combination(&mut self.current.as_mut().unwrap()[t], width) {
                break;
            }
        }
        Some(result)
    }
}

/// Advances `combo` to the lexicographically next `k`-subset of
/// `0..width`; returns false (and resets to the first subset) on wrap.
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

/// Full winner set of a rule by scanning every valid sequence.
///
/// Supported rules: the egalitarian maximin, both weighted refinements, the
/// leximin histogram rule, and the per-level utilitarian rule. The greedy
/// rule is procedural — its defining procedure (and its tie-breaking search
/// tree) is its own reference — so it is rejected here.
pub fn brute_rule(
    e: &Election,
    rule: RuleId,
    budget: EnumerationBudget,
) -> Result<Vec<CommitteeSequence>, OracleError> {
    match rule {
        RuleId::Egal => brute_argmax(e, budget, |e, x| Ok(score_triple(e, x)?.agent_min)),
        RuleId::Als => {
            let w = compute_weights(e);
            brute_argmax(e, budget, move |e, x| {
                Ok(weighted_value(&w, &score_triple(e, x)?, WeightOrder::Als))
            })
        }
        RuleId::Asl => {
            let w = compute_weights(e);
            brute_argmax(e, budget, move |e, x| {
                Ok(weighted_value(&w, &score_triple(e, x)?, WeightOrder::Asl))
            })
        }
        RuleId::Lex => brute_lex(e, budget),
        RuleId::Sum => brute_sum(e, budget),
        RuleId::Greedy => Err(OracleError::UnsupportedRule(rule)),
    }
}

fn brute_argmax<V, F>(
    e: &Election,
    budget: EnumerationBudget,
    mut value: F,
) -> Result<Vec<CommitteeSequence>, OracleError>
where
    V: Ord,
    F: FnMut(&Election, &CommitteeSequence) -> Result<V, OracleError>,
{
    let mut best: Option<V> = None;
    let mut winners: Vec<CommitteeSequence> = Vec::new();
    for x in enumerate_valid(e, budget)? {
        let v = value(e, &x)?;
        match &best {
            Some(b) if v < *b => {}
            Some(b) if v == *b => winners.push(x),
            _ => {
                best = Some(v);
                winners.clear();
                winners.push(x);
            }
        }
    }
    Ok(winners)
}

fn brute_lex(
    e: &Election,
    budget: EnumerationBudget,
) -> Result<Vec<CommitteeSequence>, OracleError> {
    let mut best = None;
    let mut winners: Vec<CommitteeSequence> = Vec::new();
    for x in enumerate_valid(e, budget)? {
        let h = sat_histogram(e, &x)?;
        match &best {
            Some(b) => match lex_compare(&h, b) {
                std::cmp::Ordering::Greater => {}
                std::cmp::Ordering::Equal => winners.push(x),
                std::cmp::Ordering::Less => {
                    best = Some(h);
                    winners.clear();
                    winners.push(x);
                }
            },
            None => {
                best = Some(h);
                winners.push(x);
            }
        }
    }
    Ok(winners)
}

fn brute_sum(
    e: &Election,
    budget: EnumerationBudget,
) -> Result<Vec<CommitteeSequence>, OracleError> {
    // Per level, the winning committees maximize the committee's column-sum
    // total; the winner set is the Cartesian product across levels.
    let mut per_level: Vec<Vec<Vec<u32>>> = Vec::with_capacity(e.num_levels());
    for (t, level) in e.levels().iter().enumerate() {
        let mut best: Option<u64> = None;
        let mut committees: Vec<Vec<u32>> = Vec::new();
        let mut combo: Vec<u32> = (0..level.k() as u32).collect();
        loop {
            let total: u64 = combo.iter().map(|&c| level.column_sum(c as usize)).sum();
            match best {
                Some(b) if total < b => {}
                Some(b) if total == b => committees.push(combo.clone()),
                _ => {
                    best = Some(total);
                    committees.clear();
                    committees.push(combo.clone());
                }
            }
            if !next_combination(&mut combo, level.width() as u32) {
                break;
            }
        }
        let _ = t;
        per_level.push(committees);
    }
    let total: u128 = per_level
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    if total > budget.max_sequences as u128 && budget.on_exceed == OnExceed::Error {
        return Err(OracleError::BudgetExceeded {
            total,
            budget: budget.max_sequences,
        });
    }
    // Materialize the product level-major, which preserves canonical order.
    let mut winners = vec![Vec::new()];
    for committees in &per_level {
        let mut extended = Vec::with_capacity(winners.len() * committees.len());
        for prefix in &winners {
            for committee in committees {
                if extended.len() as u64 >= budget.max_sequences {
                    break;
                }
                let mut seq: Vec<Vec<u32>> = prefix.clone();
                seq.push(committee.clone());
                extended.push(seq);
            }
        }
        winners = extended;
    }
    Ok(winners
        .into_iter()
        .map(CommitteeSequence::from_sorted_unchecked)
        .collect())
}

/// Two-stage reference for the weighted rules: restrict to the egalitarian
/// winner set, then maximize the second component, then the third. Used to
/// cross-check that the weighted objectives implement their priority orders.
pub fn brute_rule_two_stage(
    e: &Election,
    order: WeightOrder,
    budget: EnumerationBudget,
) -> Result<Vec<CommitteeSequence>, OracleError> {
    let egal = brute_rule(e, RuleId::Egal, budget)?;
    let triples: Vec<ScoreTriple> = egal
        .iter()
        .map(|x| score_triple(e, x).map_err(OracleError::from))
        .collect::<Result<_, _>>()?;
    let key = |t: &ScoreTriple| match order {
        WeightOrder::Als => (t.level_min, t.total),
        WeightOrder::Asl => (t.total, t.level_min),
    };
    let best = triples.iter().map(key).max().expect("nonempty winner set");
    Ok(egal
        .into_iter()
        .zip(triples)
        .filter(|(_, t)| key(t) == best)
        .map(|(x, _)| x)
        .collect())
}

/// True iff `x` dominates `y`: no agent is worse off under `x` and at least
/// one agent is strictly better off.
pub fn dominates(
    e: &Election,
    x: &CommitteeSequence,
    y: &CommitteeSequence,
) -> Result<bool, ModelError> {
    let sx = agent_scores(e, x)?;
    let sy = agent_scores(e, y)?;
    Ok(sx.iter().zip(&sy).all(|(a, b)| a >= b) && sx.iter().zip(&sy).any(|(a, b)| a > b))
}

// ---------------------------------------------------------------------------
// Adversarial instance generators
// ---------------------------------------------------------------------------

/// Election encoding a PARTITION instance: two agents, one level per number
/// with two candidates and `k = 1`; picking candidate `i` on level `t`
/// credits the whole number `x_t` to agent `i`.
///
/// The multiset admits an equal split iff the egalitarian optimum `v`
/// satisfies `2 * v >= partition_threshold_doubled(multiset)`.
pub fn gen_partition_instance(multiset: &[u64]) -> Result<Election, ModelError> {
    let agents = vec!["p1".to_string(), "p2".to_string()];
    let levels = multiset
        .iter()
        .map(|&x| {
            Level::new(
                vec!["c1".into(), "c2".into()],
                1,
                vec![vec![x, 0], vec![0, x]],
            )
        })
        .collect();
    Election::new(agents, levels, gadget_meta("partition"))
}

/// The doubled decision threshold for [`gen_partition_instance`]: the sum
/// of the multiset. Comparing `2 * optimum >= sum` avoids halving.
pub fn partition_threshold_doubled(multiset: &[u64]) -> u64 {
    multiset.iter().sum()
}

/// Election encoding a UNARY BIN PACKING instance with `k` bins: one agent
/// and one candidate per bin, one level per item with `k_t = 1`. Assigning
/// item `s` to bin `i` (selecting candidate `i`) costs agent `i` the item
/// size, all other agents nothing, against a base of `M = 1 + sum(items)`
/// per level.
///
/// The items fit into `k` bins of capacity `b` iff the egalitarian optimum
/// is at least [`binpacking_threshold`]`(items, b)`.
pub fn gen_binpacking_instance(items: &[u64], k: usize) -> Result<Election, ModelError> {
    let m_big: u64 = 1 + items.iter().sum::<u64>();
    let agents = (1..=k).map(|i| format!("b{i}")).collect();
    let levels = items
        .iter()
        .map(|&x| {
            let utilities = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| if i == j { m_big - x } else { m_big })
                        .collect()
                })
                .collect();
            Level::new((1..=k).map(|j| format!("c{j}")).collect(), 1, utilities)
        })
        .collect();
    Election::new(agents, levels, gadget_meta("binpacking"))
}

/// The decision threshold `N * M - b` for [`gen_binpacking_instance`].
pub fn binpacking_threshold(items: &[u64], b: u64) -> u64 {
    let m_big: u64 = 1 + items.iter().sum::<u64>();
    items.len() as u64 * m_big - b
}

/// Election encoding a VERTEX COVER instance: one agent per edge, a single
/// level whose candidates are the vertices `0..=max_endpoint`, committee
/// size `k`, and unit utility from an edge agent to each of its endpoints.
///
/// The graph has a vertex cover of size `k` iff the egalitarian optimum is
/// at least [`VERTEX_COVER_THRESHOLD`] (selecting extra vertices never
/// hurts, so requiring exactly `k` picks preserves the equivalence).
pub fn gen_vertexcover_instance(edges: &[(u32, u32)], k: usize) -> Result<Election, ModelError> {
    let num_vertices = edges
        .iter()
        .map(|&(u, v)| u.max(v) + 1)
        .max()
        .unwrap_or(0) as usize;
    let agents = edges.iter().map(|&(u, v)| format!("e{u}-{v}")).collect();
    let utilities = edges
        .iter()
        .map(|&(u, v)| {
            (0..num_vertices)
                .map(|w| u64::from(w as u32 == u || w as u32 == v))
                .collect()
        })
        .collect();
    let level = Level::new(
        (0..num_vertices).map(|v| format!("v{v}")).collect(),
        k,
        utilities,
    );
    Election::new(agents, vec![level], gadget_meta("vertexcover"))
}

/// Decision threshold for [`gen_vertexcover_instance`]: a cover exists iff
/// every edge agent scores at least 1.
pub const VERTEX_COVER_THRESHOLD: u64 = 1;

fn gadget_meta(class: &str) -> Option<Meta> {
    Some(Meta {
        source: Some("generated".into()),
        class: Some(class.into()),
        kappa_rule: None,
        notes: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Random and worked-example elections
// ---------------------------------------------------------------------------

/// Shape bounds for [`sample_election`]: each instance draws its agent
/// count, level count, per-level width, committee sizes, and utilities
/// uniformly within these bounds.
#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub max_agents: usize,
    pub max_levels: usize,
    pub max_candidates: usize,
    pub max_k: usize,
    pub max_utility: u64,
}

/// Draws a random election within the spec's bounds from the given RNG.
pub fn sample_election<R: Rng>(spec: &RandomSpec, rng: &mut R) -> Election {
    let n = rng.gen_range(1..=spec.max_agents);
    let tau = rng.gen_range(1..=spec.max_levels);
    let agents = (1..=n).map(|a| format!("a{a}")).collect();
    let levels = (1..=tau)
        .map(|t| {
            let width = rng.gen_range(1..=spec.max_candidates);
            let k = rng.gen_range(1..=spec.max_k.min(width));
            let utilities = (0..n)
                .map(|_| (0..width).map(|_| rng.gen_range(0..=spec.max_utility)).collect())
                .collect();
            Level::new(
                (1..=width).map(|c| format!("t{t}c{c}")).collect(),
                k,
                utilities,
            )
        })
        .collect();
    Election::new(agents, levels, None).expect("sampled shapes are always well-formed")
}

/// Deterministic random election with an exact shape: `n` agents, `tau`
/// levels of `width` candidates each, committee size `k` per level, and
/// utilities drawn uniformly from `0..=max_utility`.
pub fn gen_random_election(
    n: usize,
    tau: usize,
    width: usize,
    k: usize,
    max_utility: u64,
    seed: u64,
) -> Result<Election, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = (1..=n).map(|a| format!("a{a}")).collect();
    let levels = (1..=tau)
        .map(|t| {
            let utilities = (0..n)
                .map(|_| (0..width).map(|_| rng.gen_range(0..=max_utility)).collect())
                .collect();
            Level::new(
                (1..=width).map(|c| format!("t{t}c{c}")).collect(),
                k,
                utilities,
            )
        })
        .collect();
    let mut e = Election::new(agents, levels, None)?;
    e.set_meta(Some(Meta {
        source: Some(format!("random(seed={seed})")),
        class: Some("random".into()),
        kappa_rule: None,
        notes: Vec::new(),
    }));
    Ok(e)
}

/// The worked four-friends election: Ben, Dora, Eric, and Fina plan
/// breakfast, lunch, and dinner, two options per meal, one pick each.
pub fn gen_example1() -> Election {
    let agents = ["Ben", "Dora", "Eric", "Fina"]
        .into_iter()
        .map(String::from)
        .collect();
    let levels = vec![
        Level::new(
            vec!["breakfast-1".into(), "breakfast-2".into()],
            1,
            vec![vec![0, 0], vec![3, 0], vec![3, 0], vec![0, 3]],
        ),
        Level::new(
            vec!["lunch-1".into(), "lunch-2".into()],
            1,
            vec![vec![2, 1], vec![3, 0], vec![3, 0], vec![0, 3]],
        ),
        Level::new(
            vec!["dinner-1".into(), "dinner-2".into()],
            1,
            vec![vec![2, 1], vec![1, 2], vec![1, 2], vec![0, 0]],
        ),
    ];
    let meta = Some(Meta {
        source: Some("example1".into()),
        class: Some("worked-example".into()),
        kappa_rule: None,
        notes: Vec::new(),
    });
    Election::new(agents, levels, meta).expect("example election is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::score_agent_min;

    fn seq(e: &Election, picks: &[u32]) -> CommitteeSequence {
        CommitteeSequence::from_indices(e, picks.iter().map(|&c| vec![c]).collect()).unwrap()
    }

    #[test]
    fn enumeration_counts_and_order() {
        let e = gen_example1();
        assert_eq!(count_valid(&e), 8);
        let all: Vec<_> = enumerate_valid(&e, EnumerationBudget::default())
            .unwrap()
            .collect();
        assert_eq!(all.len(), 8);
        // Canonical order: level-major, lowest candidate indices first.
        assert_eq!(all[0], seq(&e, &[0, 0, 0]));
        assert_eq!(all[1], seq(&e, &[0, 0, 1]));
        assert_eq!(all[7], seq(&e, &[1, 1, 1]));
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn enumeration_respects_mixed_widths() {
        // C(4,2) * C(3,1) = 18 sequences.
        let e = gen_random_election(2, 2, 4, 2, 3, 11).unwrap();
        let e = {
            // Rebuild with the second level narrowed to 3 candidates, k = 1.
            let mut levels: Vec<Level> = e.levels().to_vec();
            let narrow = Level::new(
                vec!["x1".into(), "x2".into(), "x3".into()],
                1,
                vec![vec![1, 0, 2], vec![0, 1, 1]],
            );
            levels[1] = narrow;
            Election::new(e.agents().to_vec(), levels, None).unwrap()
        };
        assert_eq!(count_valid(&e), 18);
        assert_eq!(
            enumerate_valid(&e, EnumerationBudget::default())
                .unwrap()
                .count(),
            18
        );
        // A level with k equal to its width contributes exactly one choice.
        let tight = Election::new(
            vec!["a".into()],
            vec![Level::new(
                vec!["c1".into(), "c2".into()],
                2,
                vec![vec![1, 1]],
            )],
            None,
        )
        .unwrap();
        assert_eq!(count_valid(&tight), 1);
    }

    #[test]
    fn budget_modes_error_or_truncate() {
        let e = gen_example1();
        let err = enumerate_valid(
            &e,
            EnumerationBudget {
                max_sequences: 4,
                on_exceed: OnExceed::Error,
            },
        );
        assert!(matches!(err, Err(OracleError::BudgetExceeded { total: 8, budget: 4 })));

        let mut stream = enumerate_valid(
            &e,
            EnumerationBudget {
                max_sequences: 4,
                on_exceed: OnExceed::Truncate,
            },
        )
        .unwrap();
        let got: Vec<_> = stream.by_ref().collect();
        assert_eq!(got.len(), 4);
        assert!(stream.truncated());
    }

    #[test]
    fn brute_rules_reproduce_the_worked_example() {
        let e = gen_example1();
        let budget = EnumerationBudget::default();

        let sum = brute_rule(&e, RuleId::Sum, budget).unwrap();
        assert_eq!(sum, vec![seq(&e, &[0, 0, 1])]);
        assert_eq!(
            score_triple(&e, &sum[0]).unwrap(),
            ScoreTriple {
                agent_min: 0,
                level_min: 5,
                total: 19
            }
        );

        let lex = brute_rule(&e, RuleId::Lex, budget).unwrap();
        assert_eq!(lex, vec![seq(&e, &[1, 0, 0])]);
        let h = sat_histogram(&e, &lex[0]).unwrap();
        assert_eq!((h.counts()[3], h.counts()[4]), (1, 3));

        let als = brute_rule(&e, RuleId::Als, budget).unwrap();
        assert_eq!(als, vec![seq(&e, &[0, 1, 0])]);
        assert_eq!(
            score_triple(&e, &als[0]).unwrap(),
            ScoreTriple {
                agent_min: 3,
                level_min: 4,
                total: 14
            }
        );

        let asl = brute_rule(&e, RuleId::Asl, budget).unwrap();
        assert_eq!(asl, vec![seq(&e, &[1, 0, 1])]);
        assert_eq!(
            score_triple(&e, &asl[0]).unwrap(),
            ScoreTriple {
                agent_min: 3,
                level_min: 3,
                total: 16
            }
        );

        let egal = brute_rule(&e, RuleId::Egal, budget).unwrap();
        assert_eq!(
            egal,
            vec![seq(&e, &[0, 1, 0]), seq(&e, &[1, 0, 0]), seq(&e, &[1, 0, 1])]
        );
    }

    #[test]
    fn two_stage_filtering_matches_weighted_argmax() {
        let budget = EnumerationBudget::default();
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = RandomSpec {
                max_agents: 4,
                max_levels: 3,
                max_candidates: 3,
                max_k: 2,
                max_utility: 3,
            };
            let e = sample_election(&spec, &mut rng);
            for order in [WeightOrder::Als, WeightOrder::Asl] {
                let rule = match order {
                    WeightOrder::Als => RuleId::Als,
                    WeightOrder::Asl => RuleId::Asl,
                };
                assert_eq!(
                    brute_rule(&e, rule, budget).unwrap(),
                    brute_rule_two_stage(&e, order, budget).unwrap(),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn weighted_and_lex_winners_stay_egalitarian() {
        let budget = EnumerationBudget::default();
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let spec = RandomSpec {
                max_agents: 4,
                max_levels: 3,
                max_candidates: 3,
                max_k: 2,
                max_utility: 3,
            };
            let e = sample_election(&spec, &mut rng);
            let egal = brute_rule(&e, RuleId::Egal, budget).unwrap();
            for rule in [RuleId::Lex, RuleId::Als, RuleId::Asl] {
                let winners = brute_rule(&e, rule, budget).unwrap();
                assert!(!winners.is_empty());
                for w in &winners {
                    assert!(egal.contains(w), "rule {rule:?} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn dominance_is_strict_and_directional() {
        let e = gen_example1();
        let x = seq(&e, &[1, 0, 0]);
        assert!(!dominates(&e, &x, &x).unwrap());
        // Scores (4,4,4,3) vs (3,5,5,3): incomparable.
        let y = seq(&e, &[1, 0, 1]);
        assert_eq!(agent_scores(&e, &x).unwrap(), vec![4, 4, 4, 3]);
        assert_eq!(agent_scores(&e, &y).unwrap(), vec![3, 5, 5, 3]);
        assert!(!dominates(&e, &x, &y).unwrap());
        assert!(!dominates(&e, &y, &x).unwrap());
        // Scores (3,5,5,3) vs (2,5,5,3): strict dominance one way.
        let z = seq(&e, &[0, 1, 1]);
        assert_eq!(agent_scores(&e, &z).unwrap(), vec![2, 5, 5, 3]);
        assert!(dominates(&e, &y, &z).unwrap());
        assert!(!dominates(&e, &z, &y).unwrap());
    }

    #[test]
    fn partition_gadget_thresholds() {
        let budget = EnumerationBudget::default();
        let cases: [(&[u64], u64, bool); 3] = [
            (&[1, 1], 1, true),
            (&[3, 1, 1], 2, false),
            (&[2, 2, 2, 2], 4, true),
        ];
        for (multiset, expected_opt, splittable) in cases {
            let e = gen_partition_instance(multiset).unwrap();
            let egal = brute_rule(&e, RuleId::Egal, budget).unwrap();
            let opt = score_agent_min(&e, &egal[0]).unwrap();
            assert_eq!(opt, expected_opt);
            assert_eq!(
                2 * opt >= partition_threshold_doubled(multiset),
                splittable
            );
        }
    }

    #[test]
    fn binpacking_gadget_threshold() {
        let e = gen_binpacking_instance(&[1, 1], 2).unwrap();
        let egal = brute_rule(&e, RuleId::Egal, EnumerationBudget::default()).unwrap();
        let opt = score_agent_min(&e, &egal[0]).unwrap();
        assert_eq!(opt, 5);
        assert_eq!(binpacking_threshold(&[1, 1], 1), 5);
        assert!(opt >= binpacking_threshold(&[1, 1], 1));
    }

    #[test]
    fn vertexcover_gadget_threshold() {
        let budget = EnumerationBudget::default();
        let single = gen_vertexcover_instance(&[(0, 1)], 1).unwrap();
        let egal = brute_rule(&single, RuleId::Egal, budget).unwrap();
        assert_eq!(score_agent_min(&single, &egal[0]).unwrap(), 1);

        let triangle = gen_vertexcover_instance(&[(0, 1), (1, 2), (0, 2)], 1).unwrap();
        let egal = brute_rule(&triangle, RuleId::Egal, budget).unwrap();
        assert_eq!(score_agent_min(&triangle, &egal[0]).unwrap(), 0);

        let triangle2 = gen_vertexcover_instance(&[(0, 1), (1, 2), (0, 2)], 2).unwrap();
        let egal = brute_rule(&triangle2, RuleId::Egal, budget).unwrap();
        assert_eq!(score_agent_min(&triangle2, &egal[0]).unwrap(), 1);
    }

    #[test]
    fn random_generation_is_deterministic() {
        let a = gen_random_election(4, 3, 3, 1, 3, 7).unwrap();
        let b = gen_random_election(4, 3, 3, 1, 3, 7).unwrap();
        assert_eq!(a, b);
        let c = gen_random_election(4, 3, 3, 1, 3, 8).unwrap();
        assert_ne!(a, c);
    }
}
