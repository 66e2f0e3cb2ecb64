//! Electing egalitarian sequences of committees in multilevel elections.
//!
//! A *multilevel election* asks a fixed set of agents to fill one committee
//! per level: level `t` offers its own candidate pool, a committee size
//! `k_t`, and a matrix of nonnegative integer utilities. A *committee
//! sequence* picks one committee per level and is *valid* when every
//! committee has exactly the requested size. This crate implements six
//! voting rules over such elections together with the machinery needed to
//! study them:
//!
//! - [`model`] — the domain types (elections, committee sequences,
//!   satisfaction histograms, score triples) and every score function the
//!   rules are defined through.
//! - [`oracle`] — brute-force reference implementations of all rules by full
//!   enumeration, plus adversarial instance generators built from classic
//!   reductions (partition, bin packing, vertex cover).
//! - [`solver`] — an exact branch-and-bound engine for the NP-hard
//!   objectives (egalitarian maximin, two weighted refinements, and the
//!   leximin histogram objective), including full winner-set enumeration via
//!   exclusion constraints and two alternative staged backends for the
//!   histogram objective.
//! - [`rules`] — the public rule entry points: the utilitarian per-level rule
//!   and the greedy rule run in polynomial time; the egalitarian rules
//!   delegate to the solver.
//! - [`axioms`] — election algebra (concatenation, union, grouping
//!   detection) and per-instance checkers for five properties: safe
//!   concatenation, safe union, sub-consistency, Pareto efficiency, and
//!   independent groups.
//! - [`ingest`] — a pipeline converting ranked-preference data plus a
//!   candidate-to-level label map into elections of three instance classes,
//!   with cleanup and the committee-size rule `k_i = max(min(l, |C_i|-1), 1)`.
//!
//! All types are immutable after construction and every operation is a pure
//! function, so instances may be processed concurrently without locking.

pub mod axioms;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod rules;
pub mod solver;

pub use axioms::{AxiomVerdict, Grouping, Property, Verdict};
pub use ingest::{CleanupOutcome, InstanceClass, LabelMap, RankedProfile};
pub use model::{
    CommitteeSequence, Election, Level, Meta, ModelError, ObjectiveWeights, SatHistogram,
    ScoreTriple, WeightOrder,
};
pub use rules::{RuleId, WinnerSet};
pub use solver::{LexBackend, Objective, SolveAllOutcome, SolveConfig, SolveOutcome};
