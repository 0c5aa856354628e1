//! Nested-retweet analysis: extract following triples from tweet corpora,
//! measure how the probability that a receiver re-spreads a sender's tweets
//! varies with the number of intermediate spreaders, and test for drops in
//! that curve.
//!
//! Pipeline: [`corpus`] streams tweets, [`rt`] recognises `RT @y: RT @x`
//! chains, [`influence`] aggregates counts into a mergeable state and derives
//! the curve, [`stats`] runs the one-sided Welch test. [`synth`] produces
//! corpora with known ground truth.

pub mod cli;
pub mod corpus;
pub mod curve_file;
pub mod influence;
pub mod numfmt;
pub mod plot;
pub mod rt;
pub mod state_file;
pub mod stats;
pub mod synth;

pub use corpus::{open_corpus, parse_snap_record, parse_tsv_record, CorpusFormat, Tweet};
pub use influence::{
    accumulate, curve, pattern_instances, retweet_probability, spreader_sets, AggregateState, CurvePoint,
    PatternInstance,
};
pub use rt::{extract_rt_chain, normalize_username, to_following_triple, FollowingTriple, Username};
pub use stats::{one_sided_p, test_drop, welch_t, DropTestResult, SampleSummary};
