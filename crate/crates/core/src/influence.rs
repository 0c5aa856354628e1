//! Triple and author counting, spreader sets, pattern instances and the
//! spreader-count curve.
//!
//! An `AggregateState` is a mergeable value: shards of a corpus can be
//! accumulated independently and combined with [`AggregateState::merge`].

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{open_corpus, CorpusError, CorpusFormat, Tweet};
use crate::rt::{to_following_triple, FollowingTriple, Username};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub tweets_seen: u64,
    pub triples_emitted: u64,
    pub malformed_skipped: u64,
}

impl Diagnostics {
    fn add(&mut self, other: &Diagnostics) {
        self.tweets_seen += other.tweets_seen;
        self.triples_emitted += other.triples_emitted;
        self.malformed_skipped += other.malformed_skipped;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregateState {
    /// C(T_xyz) for every triple seen at least once.
    pub triple_counts: HashMap<FollowingTriple, u64>,
    /// C(v): every tweet v posted, retweets included.
    pub author_counts: HashMap<Username, u64>,
    pub diagnostics: Diagnostics,
}

impl AggregateState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_tweet(&mut self, tweet: &Tweet) {
        self.diagnostics.tweets_seen += 1;
        match self.author_counts.get_mut(&tweet.author) {
            Some(c) => *c += 1,
            None => {
                self.author_counts.insert(tweet.author.clone(), 1);
            }
        }
        if let Some(triple) = to_following_triple(tweet) {
            self.diagnostics.triples_emitted += 1;
            *self.triple_counts.entry(triple).or_insert(0) += 1;
        }
    }

    /// Pointwise sum of both states.
    pub fn merge(mut self, other: AggregateState) -> AggregateState {
        let (mut big, small) = if self.triple_counts.len() + self.author_counts.len()
            >= other.triple_counts.len() + other.author_counts.len()
        {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        for (k, v) in small.triple_counts {
            *big.triple_counts.entry(k).or_insert(0) += v;
        }
        for (k, v) in small.author_counts {
            *big.author_counts.entry(k).or_insert(0) += v;
        }
        big.diagnostics.add(&small.diagnostics);
        big
    }

    pub fn is_empty(&self) -> bool {
        self.triple_counts.is_empty() && self.author_counts.is_empty() && self.diagnostics == Diagnostics::default()
    }
}

/// Counts authors and following triples over a tweet sequence.
pub fn accumulate<I>(tweets: I) -> AggregateState
where
    I: IntoIterator,
    I::Item: Borrow<Tweet>,
{
    let mut state = AggregateState::new();
    for t in tweets {
        state.add_tweet(t.borrow());
    }
    state
}

/// Streams one corpus file into a fresh state, recording skipped records.
pub fn accumulate_file(path: &Path, format: CorpusFormat) -> Result<AggregateState, CorpusError> {
    let mut stream = open_corpus(path, format)?;
    let mut state = AggregateState::new();
    for tweet in stream.by_ref() {
        state.add_tweet(&tweet?);
    }
    state.diagnostics.malformed_skipped += stream.skipped();
    Ok(state)
}

pub type SpreaderSets = BTreeMap<(Username, Username), BTreeSet<Username>>;

/// S_ab for every sender/receiver pair joined by at least one triple.
pub fn spreader_sets(state: &AggregateState) -> SpreaderSets {
    let mut sets = SpreaderSets::new();
    for t in state.triple_counts.keys() {
        sets.entry((t.x.clone(), t.z.clone())).or_default().insert(t.y.clone());
    }
    sets
}

/// A retweet ratio kept with its integer parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    /// Σ_y C(T_ayb)
    pub hits: u64,
    /// C(a)
    pub sender_tweets: u64,
    /// min(hits / sender_tweets, 1)
    pub value: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfluenceError {
    #[error("sender {0} has no tweets in the sample")]
    MissingSender(Username),
    #[error("spreader set is empty")]
    NoSpreaders,
    #[error("min_instances and max_n must be at least 1")]
    BadCurveParams,
}

/// Pr(b|a;S_ab) = Σ_{y∈S} C(T_ayb) / C(a), clamped to 1.
pub fn retweet_probability(
    a: &Username,
    b: &Username,
    spreaders: &BTreeSet<Username>,
    state: &AggregateState,
) -> Result<Probability, InfluenceError> {
    if spreaders.is_empty() {
        return Err(InfluenceError::NoSpreaders);
    }
    let sender_tweets = match state.author_counts.get(a) {
        Some(&c) if c > 0 => c,
        _ => return Err(InfluenceError::MissingSender(a.clone())),
    };
    let mut key = FollowingTriple { x: a.clone(), y: a.clone(), z: b.clone() };
    let mut hits = 0;
    for y in spreaders {
        key.y = y.clone();
        hits += state.triple_counts.get(&key).copied().unwrap_or(0);
    }
    Ok(Probability::from_counts(hits, sender_tweets))
}

impl Probability {
    pub fn from_counts(hits: u64, sender_tweets: u64) -> Probability {
        let clamped = hits > sender_tweets;
        let value = if clamped { 1.0 } else { hits as f64 / sender_tweets as f64 };
        Probability { hits, sender_tweets, value, clamped }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternInstance {
    pub a: Username,
    pub b: Username,
    pub spreaders: BTreeSet<Username>,
    pub pr: Probability,
}

impl PatternInstance {
    pub fn n(&self) -> usize {
        self.spreaders.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceReport {
    /// Sorted by (a, b).
    pub instances: Vec<PatternInstance>,
    pub absent_senders: u64,
    pub clamped: u64,
}

/// One instance per (a, b) with a non-empty spreader set. Pairs whose sender
/// posted nothing in-sample are skipped and counted.
pub fn pattern_instances(state: &AggregateState) -> InstanceReport {
    let mut grouped: BTreeMap<(&Username, &Username), Vec<(&Username, u64)>> = BTreeMap::new();
    for (t, &c) in &state.triple_counts {
        grouped.entry((&t.x, &t.z)).or_default().push((&t.y, c));
    }
    let mut report = InstanceReport::default();
    for ((a, b), members) in grouped {
        let Some(&sender_tweets) = state.author_counts.get(a) else {
            report.absent_senders += 1;
            continue;
        };
        let hits = members.iter().map(|&(_, c)| c).sum();
        let pr = Probability::from_counts(hits, sender_tweets);
        if pr.clamped {
            report.clamped += 1;
        }
        report.instances.push(PatternInstance {
            a: a.clone(),
            b: b.clone(),
            spreaders: members.into_iter().map(|(y, _)| y.clone()).collect(),
            pr,
        });
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    /// Pr(n): unweighted mean of instance probabilities.
    pub mean: f64,
    /// Sample variance (divisor instances − 1); 0 for a single instance.
    pub variance: f64,
    pub instances: u64,
}

pub const DEFAULT_MIN_INSTANCES: u64 = 30;
pub const DEFAULT_MAX_N: usize = 20;

/// Mean and sample variance of `values`, summed in ascending order so the
/// result does not depend on the order instances arrive in.
pub fn moments(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let variance =
        if values.len() < 2 { 0.0 } else { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0) };
    (mean, variance)
}

/// Groups instances by spreader count and reports every n in 1..=max_n with
/// at least `min_instances` instances.
pub fn curve<'a, I>(instances: I, min_instances: u64, max_n: usize) -> Result<Vec<CurvePoint>, InfluenceError>
where
    I: IntoIterator<Item = &'a PatternInstance>,
{
    if min_instances == 0 || max_n == 0 {
        return Err(InfluenceError::BadCurveParams);
    }
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for inst in instances {
        let n = inst.n();
        if (1..=max_n).contains(&n) {
            groups.entry(n).or_default().push(inst.pr.value);
        }
    }
    Ok(groups
        .into_iter()
        .filter(|(_, prs)| prs.len() as u64 >= min_instances)
        .map(|(n, mut prs)| {
            let (mean, variance) = moments(&mut prs);
            CurvePoint { n, mean, variance, instances: prs.len() as u64 }
        })
        .collect())
}
