//! Synthetic corpora with a known response function.
//!
//! For every spreader count `n` in the response table the generator builds
//! `instances_per_n` isolated groups: one sender, `n` spreaders and one
//! receiver, all with fresh usernames. The sender posts
//! `originals_per_sender` originals, every spreader retweets each of them,
//! and the receiver retweets each original with probability `f(n)` through
//! one uniformly chosen spreader.
//!
//! The receiver's realized spreader set can be smaller than `n` (it only
//! contains spreaders the receiver actually retweeted through), so the
//! manifest reports groups by realized size next to two expectations: the
//! per-intended-`n` conditional mean `E[K/m | K >= 1]` and the exact mean the
//! pipeline should report for each realized group size.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{CorpusFormat, CorpusWriter, Tweet};
use crate::numfmt::sig10;
use crate::rt::normalize_username;

const BASE_TIMESTAMP: i64 = 1_243_814_400;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// (n, f(n)) for n = 1..=N, in order.
    pub response: Vec<(usize, f64)>,
    pub instances_per_n: u64,
    pub originals_per_sender: u64,
    pub format: CorpusFormat,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.response.is_empty() {
            return bad("response table is empty".into());
        }
        for (i, &(n, f)) in self.response.iter().enumerate() {
            if n != i + 1 {
                return bad(format!("response must cover n = 1..N without gaps (entry {} has n = {n})", i + 1));
            }
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("f({n}) = {f} is not a probability"));
            }
        }
        if self.instances_per_n == 0 || self.originals_per_sender == 0 {
            return bad("instances_per_n and originals_per_sender must be at least 1".into());
        }
        Ok(())
    }

    fn max_n(&self) -> usize {
        self.response.len()
    }
}

/// Parses `"1:0.1,2:0.15"` into a response table sorted by n.
pub fn parse_response(spec: &str) -> Result<Vec<(usize, f64)>, SynthError> {
    let mut table = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (n, f) =
            item.split_once(':').ok_or_else(|| SynthError::Config(format!("response entry {item:?} is not n:p")))?;
        let n: usize = n.trim().parse().map_err(|_| SynthError::Config(format!("bad n in {item:?}")))?;
        let f: f64 = f.trim().parse().map_err(|_| SynthError::Config(format!("bad probability in {item:?}")))?;
        table.push((n, f));
    }
    table.sort_by_key(|&(n, _)| n);
    Ok(table)
}

pub fn format_response(response: &[(usize, f64)]) -> String {
    response.iter().map(|(n, f)| format!("{n}:{f}")).collect::<Vec<_>>().join(",")
}

/// `E[K/m | K >= 1]` for `K ~ Binomial(m, f(n))`, per intended n.
/// `None` where f(n) = 0: such groups never produce an instance.
pub fn expected_curve(config: &SynthConfig) -> Vec<(usize, Option<f64>)> {
    let m = config.originals_per_sender as f64;
    config
        .response
        .iter()
        .map(|&(n, f)| {
            if f <= 0.0 {
                return (n, None);
            }
            // P(K >= 1) = 1 - (1-f)^m
            let p_any = -(m * (-f).ln_1p()).exp_m1();
            (n, Some(f / p_any))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedExpectation {
    /// Expected number of instances whose realized spreader set has this size.
    pub instances: f64,
    /// Expected mean retweet probability over those instances.
    pub pr: f64,
}

fn binomial_pmf(m: u64, f: f64) -> Vec<f64> {
    if f <= 0.0 {
        let mut v = vec![0.0; m as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if f >= 1.0 {
        let mut v = vec![0.0; m as usize + 1];
        v[m as usize] = 1.0;
        return v;
    }
    let (lf, lq) = (f.ln(), (-f).ln_1p());
    let mut ln_choose = 0.0;
    (0..=m)
        .map(|k| {
            if k > 0 {
                ln_choose += ((m - k + 1) as f64).ln() - (k as f64).ln();
            }
            (ln_choose + k as f64 * lf + (m - k) as f64 * lq).exp()
        })
        .collect()
}

/// Expected instance count and mean probability for each realized spreader
/// count, mixing over intended groups. The number of distinct spreaders hit
/// by `k` uniform draws over `n` follows the occupancy distribution.
pub fn realized_expected_curve(config: &SynthConfig) -> Vec<(usize, Option<RealizedExpectation>)> {
    let m = config.originals_per_sender;
    let max_n = config.max_n();
    let mut weight = vec![0.0; max_n + 1];
    let mut weighted_pr = vec![0.0; max_n + 1];
    for &(n, f) in &config.response {
        let pmf = binomial_pmf(m, f);
        let mut occupancy = vec![0.0; n + 1];
        occupancy[0] = 1.0;
        for (k, &pk) in pmf.iter().enumerate().skip(1) {
            for d in (1..=n.min(k)).rev() {
                occupancy[d] = occupancy[d] * d as f64 / n as f64 + occupancy[d - 1] * (n - d + 1) as f64 / n as f64;
            }
            occupancy[0] = 0.0;
            let pr = k as f64 / m as f64;
            for (d, &pd) in occupancy.iter().enumerate().skip(1) {
                let w = config.instances_per_n as f64 * pk * pd;
                weight[d] += w;
                weighted_pr[d] += w * pr;
            }
        }
    }
    (1..=max_n)
        .map(|d| {
            let e =
                (weight[d] > 0.0).then(|| RealizedExpectation { instances: weight[d], pr: weighted_pr[d] / weight[d] });
            (d, e)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub n: usize,
    pub intended_instances: u64,
    /// Groups whose receiver retweeted through exactly n distinct spreaders.
    pub realized_instances: u64,
    pub expected_conditional_pr: Option<f64>,
    pub response: f64,
    pub expected_realized_pr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub config: SynthConfig,
    pub rows: Vec<ManifestRow>,
    pub tweets_written: u64,
    /// Groups where the receiver never retweeted; they yield no instance.
    pub silent_groups: u64,
}

pub const MANIFEST_HEADER: &str =
    "n,intended_instances,realized_instances,expected_conditional_pr,response,expected_realized_pr";

impl Manifest {
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let opt = |v: Option<f64>| v.map(sig10).unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(s, "# seed={}", c.seed);
        let _ = writeln!(s, "# response={}", format_response(&c.response));
        let _ = writeln!(
            s,
            "# instances_per_n={} originals_per_sender={} format={} tweets={} silent_groups={}",
            c.instances_per_n, c.originals_per_sender, c.format, self.tweets_written, self.silent_groups
        );
        let _ = writeln!(s, "{MANIFEST_HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.n,
                r.intended_instances,
                r.realized_instances,
                opt(r.expected_conditional_pr),
                sig10(r.response),
                opt(r.expected_realized_pr)
            );
        }
        s
    }
}

pub fn manifest_path(corpus: &Path) -> PathBuf {
    let mut name = corpus.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.csv");
    corpus.with_file_name(name)
}

fn user(name: String) -> crate::rt::Username {
    normalize_username(&name).expect("generated usernames fit the grammar")
}

/// Generates the corpus into `sink`, returning the manifest.
pub fn generate_tweets<F>(config: &SynthConfig, mut sink: F) -> Result<Manifest, SynthError>
where
    F: FnMut(Tweet) -> io::Result<()>,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = config.originals_per_sender;
    let mut realized = vec![0u64; config.max_n() + 1];
    let mut clock = BASE_TIMESTAMP;
    let mut written = 0u64;
    let mut silent = 0u64;
    let mut group = 0u64;
    let mut emit = |author: &crate::rt::Username, text: String, sink: &mut F| -> io::Result<()> {
        clock += 1;
        written += 1;
        sink(Tweet { author: author.clone(), timestamp: clock, text })
    };
    let mut used = Vec::new();
    for &(n, f) in &config.response {
        for _ in 0..config.instances_per_n {
            let sender = user(format!("s{group}"));
            let spreaders: Vec<_> = (0..n).map(|j| user(format!("p{group}_{j}"))).collect();
            let receiver = user(format!("r{group}"));
            used.clear();
            used.resize(n, false);
            let mut hits = 0u64;
            for k in 0..m {
                let original = format!("msg {group}.{k}");
                emit(&sender, original.clone(), &mut sink)?;
                for sp in &spreaders {
                    emit(sp, format!("RT @{sender}: {original}"), &mut sink)?;
                }
                if rng.gen_bool(f) {
                    let j = rng.gen_range(0..n);
                    used[j] = true;
                    hits += 1;
                    emit(&receiver, format!("RT @{}: RT @{sender}: {original}", spreaders[j]), &mut sink)?;
                }
            }
            if hits == 0 {
                silent += 1;
            } else {
                realized[used.iter().filter(|&&u| u).count()] += 1;
            }
            group += 1;
        }
    }
    let conditional = expected_curve(config);
    let realized_expect = realized_expected_curve(config);
    let rows = config
        .response
        .iter()
        .map(|&(n, f)| ManifestRow {
            n,
            intended_instances: config.instances_per_n,
            realized_instances: realized[n],
            expected_conditional_pr: conditional[n - 1].1,
            response: f,
            expected_realized_pr: realized_expect[n - 1].1.map(|e| e.pr),
        })
        .collect();
    Ok(Manifest { config: config.clone(), rows, tweets_written: written, silent_groups: silent })
}

/// Writes the corpus to `out` and its manifest next to it.
pub fn generate(config: &SynthConfig, out: &Path) -> Result<Manifest, SynthError> {
    generate_with_manifest(config, out, &manifest_path(out))
}

pub fn generate_with_manifest(config: &SynthConfig, out: &Path, manifest: &Path) -> Result<Manifest, SynthError> {
    config.validate()?;
    let mut writer = CorpusWriter::new(BufWriter::with_capacity(1 << 16, File::create(out)?), config.format);
    let result = generate_tweets(config, |t| writer.write(&t))?;
    writer.into_inner().flush()?;
    std::fs::write(manifest, result.to_csv())?;
    Ok(result)
}
