//! Seeded search for the violation fixtures frozen under `tests/data/`.
//!
//! Each property/rule cell known to admit violations gets a deterministic
//! random search: sample small elections (or compatible pairs), run the
//! checker with the default winner cap and no time budget, and freeze the
//! first violating instance as pretty-printed JSON. Re-running regenerates
//! byte-identical files as long as the sampling code stays untouched.

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqcom::axioms::{
    check_independent_groups, check_pareto, check_safe_concatenation, check_safe_union,
    check_sub_consistency, detect_grouping, glue_elections, AxiomVerdict, Verdict,
};
use seqcom::model::{Election, Level};
use seqcom::oracle::{sample_election, RandomSpec};
use seqcom::rules::RuleId;
use seqcom::solver::SolveConfig;

fn out_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn spec() -> RandomSpec {
    RandomSpec {
        max_agents: 4,
        max_levels: 3,
        max_candidates: 4,
        max_k: 2,
        max_utility: 3,
    }
}

fn config() -> SolveConfig {
    SolveConfig {
        winner_cap: 30,
        time_budget: None,
        node_budget: None,
        lex_window: None,
    }
}

fn save(name: &str, e: &Election) {
    let path = out_dir().join(name);
    let json = serde_json::to_string_pretty(e).expect("elections serialize");
    fs::write(&path, json + "\n").expect("fixture directory is writable");
    println!("  wrote {}", path.display());
}

/// Renames agents (and optionally candidates) so two samples become
/// disjoint or aligned as a pair-check needs.
fn rename(e: &Election, agent_prefix: &str, candidate_prefix: Option<&str>) -> Election {
    let agents = e.agents().iter().map(|a| format!("{agent_prefix}{a}")).collect();
    let levels = e
        .levels()
        .iter()
        .map(|l| {
            let candidates = match candidate_prefix {
                Some(p) => l.candidates().iter().map(|c| format!("{p}{c}")).collect(),
                None => l.candidates().to_vec(),
            };
            Level::new(candidates, l.k(), l.utilities().to_vec())
        })
        .collect();
    Election::new(agents, levels, None).expect("renaming preserves validity")
}

/// Same level structure as `e` (candidates and committee sizes), fresh
/// utilities, fresh disjoint agents — the shape sub-consistency pairs need.
fn reshape(e: &Election, rng: &mut ChaCha8Rng, max_utility: u64) -> Election {
    let n = rng.gen_range(1..=4);
    let agents = (0..n).map(|i| format!("b{i}")).collect();
    let levels = e
        .levels()
        .iter()
        .map(|l| {
            let utilities = (0..n)
                .map(|_| (0..l.width()).map(|_| rng.gen_range(0..=max_utility)).collect())
                .collect();
            Level::new(l.candidates().to_vec(), l.k(), utilities)
        })
        .collect();
    Election::new(agents, levels, None).expect("reshaping preserves validity")
}

fn search_pair(
    label: &str,
    rule: RuleId,
    files: (&str, &str),
    mut make: impl FnMut(u64) -> Option<(Election, Election)>,
    check: impl Fn(&Election, &Election, RuleId, &SolveConfig) -> AxiomVerdict,
) {
    let cfg = config();
    for seed in 0..200_000u64 {
        let Some((e1, e2)) = make(seed) else { continue };
        let verdict = check(&e1, &e2, rule, &cfg);
        if verdict.verdict == Verdict::Violated {
            println!("{label}: violated at seed {seed}");
            println!("  witness: {}", verdict.witness.as_deref().unwrap_or("-"));
            save(files.0, &e1);
            save(files.1, &e2);
            return;
        }
    }
    panic!("{label}: no violation found in the search budget");
}

fn search_single(
    label: &str,
    rule: RuleId,
    file: &str,
    mut make: impl FnMut(u64) -> Option<Election>,
    check: impl Fn(&Election, RuleId, &SolveConfig) -> AxiomVerdict,
) {
    let cfg = config();
    for seed in 0..200_000u64 {
        let Some(e) = make(seed) else { continue };
        let verdict = check(&e, rule, &cfg);
        if verdict.verdict == Verdict::Violated {
            println!("{label}: violated at seed {seed}");
            println!("  witness: {}", verdict.witness.as_deref().unwrap_or("-"));
            save(file, &e);
            return;
        }
    }
    panic!("{label}: no violation found in the search budget");
}

fn main() {
    fs::create_dir_all(out_dir()).expect("fixture directory");
    let spec = spec();

    // Concatenation pairs need identical agent lists: resample until the
    // second draw has the same agent count (names then coincide).
    let concat_pair = |seed: u64| -> Option<(Election, Election)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e1 = sample_election(&spec, &mut rng);
        let e2 = sample_election(&spec, &mut rng);
        (e1.num_agents() == e2.num_agents()).then_some((e1, e2))
    };
    search_pair(
        "P1 x GREEDY",
        RuleId::Greedy,
        ("p1_greedy_a.elec", "p1_greedy_b.elec"),
        concat_pair,
        |a, b, r, c| check_safe_concatenation(a, b, r, c).unwrap(),
    );

    // Union pairs need equal level counts, disjoint agents and disjoint
    // candidates.
    let union_pair = |seed: u64| -> Option<(Election, Election)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e1 = sample_election(&spec, &mut rng);
        let e2 = sample_election(&spec, &mut rng);
        (e1.num_levels() == e2.num_levels())
            .then(|| (e1, rename(&e2, "b:", Some("x:"))))
    };
    search_pair(
        "P2 x GREEDY",
        RuleId::Greedy,
        ("p2_greedy_a.elec", "p2_greedy_b.elec"),
        union_pair,
        |a, b, r, c| check_safe_union(a, b, r, c).unwrap(),
    );
    search_pair(
        "P2 x SUM",
        RuleId::Sum,
        ("p2_sum_a.elec", "p2_sum_b.elec"),
        union_pair,
        |a, b, r, c| check_safe_union(a, b, r, c).unwrap(),
    );

    // Sub-consistency pairs share the candidate structure.
    let sub_pair = |seed: u64| -> Option<(Election, Election)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e1 = sample_election(&spec, &mut rng);
        let e2 = reshape(&e1, &mut rng, spec.max_utility);
        Some((e1, e2))
    };
    for (rule, files) in [
        (RuleId::Greedy, ("p3_greedy_a.elec", "p3_greedy_b.elec")),
        (RuleId::Asl, ("p3_asl_a.elec", "p3_asl_b.elec")),
        (RuleId::Als, ("p3_als_a.elec", "p3_als_b.elec")),
    ] {
        search_pair(
            &format!("P3 x {rule}"),
            rule,
            files,
            sub_pair,
            |a, b, r, c| check_sub_consistency(a, b, r, c).unwrap(),
        );
    }

    // Pareto violations on single instances.
    let single = |seed: u64| -> Option<Election> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Some(sample_election(&spec, &mut rng))
    };
    search_single("P4 x GREEDY", RuleId::Greedy, "p4_greedy.elec", single, |e, r, c| {
        check_pareto(e, r, c).unwrap()
    });
    search_single("P4 x ALS", RuleId::Als, "p4_als.elec", single, |e, r, c| {
        check_pareto(e, r, c).unwrap()
    });

    // Independent-groups violations on glued two-group instances.
    let glued = |seed: u64| -> Option<Election> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e1 = sample_election(&spec, &mut rng);
        let e2 = sample_election(&spec, &mut rng);
        let glued = glue_elections(&e1, &e2).ok()?;
        (detect_grouping(&glued).len() >= 2).then_some(glued)
    };
    search_single("P5 x ASL", RuleId::Asl, "p5_asl.elec", glued, |e, r, c| {
        check_independent_groups(e, r, c).unwrap()
    });
    search_single("P5 x ALS", RuleId::Als, "p5_als.elec", glued, |e, r, c| {
        check_independent_groups(e, r, c).unwrap()
    });

    println!("all fixtures written to {}", out_dir().display());
}
