//! Reference implementations shared by the integration tests. Nothing here
//! calls into the parsing, aggregation or statistics code under test.
#![allow(dead_code, clippy::excessive_precision)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use rtcurve::{normalize_username, Tweet};

// ---------------------------------------------------------------------------
// Quadratic-time reference pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RefInstance {
    pub a: String,
    pub b: String,
    pub spreaders: BTreeSet<String>,
    pub hits: u64,
    pub sender_tweets: u64,
    pub pr: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefPoint {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub instances: u64,
}

/// `(spreader, origin)` of a tweet starting `RT @spreader: RT @origin`.
fn leading_pair(re: &Regex, text: &str) -> Option<(String, String)> {
    let caps = re.captures(text)?;
    let y = caps.get(1)?.as_str();
    let x = caps.get(2)?.as_str();
    if y.len() > 15 || x.len() > 15 {
        return None;
    }
    Some((y.to_ascii_lowercase(), x.to_ascii_lowercase()))
}

fn pair_regex() -> Regex {
    Regex::new(r"^(?i:rt)[ \t\n\x0C\r]+@([A-Za-z0-9_]+):?[ \t\n\x0C\r]*(?i:rt)[ \t\n\x0C\r]+@([A-Za-z0-9_]+)").unwrap()
}

/// Mean and sample variance summed in ascending order.
pub fn ref_moments(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let len = v.len() as f64;
    let mut sum = 0.0;
    for x in &v {
        sum += x;
    }
    let mean = sum / len;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for x in &v {
        ss += (x - mean) * (x - mean);
    }
    (mean, ss / (len - 1.0))
}

/// Enumerates every ordered (a, b) pair and every candidate spreader y over
/// the raw tweets, straight from the definitions.
pub fn reference_pipeline(tweets: &[Tweet]) -> (Vec<RefInstance>, Vec<RefPoint>) {
    let re = pair_regex();
    let parsed: Vec<(String, Option<(String, String)>)> =
        tweets.iter().map(|t| (t.author.as_str().to_owned(), leading_pair(&re, &t.text))).collect();
    let mut users = BTreeSet::new();
    for (author, pair) in &parsed {
        users.insert(author.clone());
        if let Some((y, x)) = pair {
            users.insert(y.clone());
            users.insert(x.clone());
        }
    }
    let users: Vec<String> = users.into_iter().collect();
    let mut instances = Vec::new();
    for a in &users {
        for b in &users {
            if a == b {
                continue;
            }
            let mut spreaders = BTreeSet::new();
            let mut hits = 0u64;
            for y in &users {
                if y == a || y == b {
                    continue;
                }
                let count = parsed
                    .iter()
                    .filter(|(author, pair)| author == b && pair.as_ref() == Some(&(y.clone(), a.clone())))
                    .count() as u64;
                if count > 0 {
                    spreaders.insert(y.clone());
                    hits += count;
                }
            }
            if spreaders.is_empty() {
                continue;
            }
            let sender_tweets = parsed.iter().filter(|(author, _)| author == a).count() as u64;
            if sender_tweets == 0 {
                continue;
            }
            let raw = hits as f64 / sender_tweets as f64;
            instances.push(RefInstance {
                a: a.clone(),
                b: b.clone(),
                spreaders,
                hits,
                sender_tweets,
                pr: if raw > 1.0 { 1.0 } else { raw },
                clamped: raw > 1.0,
            });
        }
    }
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for inst in &instances {
        groups.entry(inst.spreaders.len()).or_default().push(inst.pr);
    }
    let points = groups
        .into_iter()
        .map(|(n, prs)| {
            let (mean, variance) = ref_moments(&prs);
            RefPoint { n, mean, variance, instances: prs.len() as u64 }
        })
        .collect();
    (instances, points)
}

/// A random corpus of at most `max_tweets` tweets over at most 12 users,
/// mixing plain tweets, single and nested retweets, self-loops, odd
/// separators and users that are only ever mentioned.
pub fn random_corpus(seed: u64, max_tweets: usize) -> Vec<Tweet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = ["alice", "Bob", "carol", "DAVE", "eve", "frank", "Grace", "heidi", "ivan", "judy", "mallory", "oscar"];
    let user_count = rng.gen_range(3..=pool.len());
    let authors = rng.gen_range(2..=user_count);
    let len = rng.gen_range(0..=max_tweets);
    let pick = |rng: &mut ChaCha8Rng| {
        let name = pool[rng.gen_range(0..user_count)];
        if rng.gen_bool(0.2) {
            name.to_uppercase()
        } else {
            name.to_owned()
        }
    };
    let rt = |rng: &mut ChaCha8Rng| ["RT", "rt", "Rt"][rng.gen_range(0..3)];
    let sep = |rng: &mut ChaCha8Rng| [": ", ":", " ", ":\t", ":  "][rng.gen_range(0..5)];
    (0..len)
        .map(|i| {
            let author = pool[rng.gen_range(0..authors)];
            let text = match rng.gen_range(0..10) {
                0 | 1 => format!("post number {i}"),
                2 => format!("RT @{}: single hop {i}", pick(&mut rng)),
                3 => format!(
                    "{} @{}{}{} @{}{}deep {} @{}: x",
                    rt(&mut rng),
                    pick(&mut rng),
                    sep(&mut rng),
                    rt(&mut rng),
                    pick(&mut rng),
                    sep(&mut rng),
                    rt(&mut rng),
                    pick(&mut rng)
                ),
                4 => format!("via @{} not a retweet", pick(&mut rng)),
                5 => format!("RT @{}: RT @{}", pick(&mut rng), pick(&mut rng)),
                _ => format!(
                    "{} @{}{}{} @{}{}msg {i}",
                    rt(&mut rng),
                    pick(&mut rng),
                    sep(&mut rng),
                    rt(&mut rng),
                    pick(&mut rng),
                    sep(&mut rng)
                ),
            };
            Tweet { author: normalize_username(author).unwrap(), timestamp: i as i64, text }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Numerical integration of the Student-t density
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
pub fn gauss_kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive bisection until each panel's error estimate is below `tol` or
/// at the round-off level of the whole integral.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gauss_kronrod15(f, a, b);
        if err <= tol || depth >= 40 {
            return val;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol, depth + 1) + rec(f, m, b, tol, depth + 1)
    }
    let panels = 16;
    let width = (b - a) / panels as f64;
    let scale: f64 =
        (0..panels).map(|i| gauss_kronrod15(f, a + i as f64 * width, a + (i + 1) as f64 * width).0.abs()).sum();
    rec(f, a, b, tol.max(1e-16 * scale), 0)
}

/// `∫_c^∞ g(s) ds` through `s = c + u / (1 - u)`.
fn tail_integral<G: Fn(f64) -> f64>(g: &G, c: f64, tol: f64) -> f64 {
    let h = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        g(c + u / w) / (w * w)
    };
    integrate(&h, 0.0, 1.0, tol)
}

/// `P(T > t)` by integrating the unnormalised density `(1 + s²/df)^(-(df+1)/2)`
/// and dividing by its integral over the whole line.
pub fn student_tail_by_quadrature(t: f64, df: f64) -> f64 {
    let g = move |s: f64| (-(df + 1.0) / 2.0 * (s * s / df).ln_1p()).exp();
    let half = tail_integral(&g, 0.0, 1e-17);
    let upper = tail_integral(&g, t.abs(), 1e-17);
    let p = upper / (2.0 * half);
    if t >= 0.0 {
        p
    } else {
        1.0 - p
    }
}

pub fn normal_tail_by_quadrature(t: f64) -> f64 {
    let g = |s: f64| (-0.5 * s * s).exp();
    let half = tail_integral(&g, 0.0, 1e-17);
    tail_integral(&g, t, 1e-17) / (2.0 * half)
}

/// Reference tails at 40 digits from an arbitrary-precision quadrature
/// package, rows are df ∈ {2, 5, 30, 200, 1e5}, columns t ∈ {0, .5, 1, 2, 5, 10}.
pub const FROZEN_T_GRID: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];
pub const FROZEN_DF_GRID: [f64; 5] = [2.0, 5.0, 30.0, 200.0, 1e5];
pub const FROZEN_TAILS: [[f64; 6]; 5] = [
    [
        0.5,
        0.33333333333333333333,
        0.21132486540518711775,
        0.091751709536136983634,
        0.018874775675311862909,
        0.0049262285116628454234,
    ],
    [
        0.5,
        0.31914943582046450335,
        0.1816087338245613128,
        0.050969739414929178123,
        0.0020523579900266612103,
        0.000085473787871481795353,
    ],
    [
        0.5,
        0.31036150244256364298,
        0.16265430771301494562,
        0.02731252248149155196,
        0.000011648342733503897566,
        2.2876257041148065963e-11,
    ],
    [
        0.5,
        0.30881237615823033544,
        0.15925942395487333324,
        0.0234265930935354886,
        6.2509906388576976811e-7,
        1.1887415722103795667e-19,
    ],
    [
        0.5,
        0.30853808882720901947,
        0.15865646378205500803,
        0.022751481728753231625,
        2.8713508393208364266e-7,
        7.816507650103639002e-24,
    ],
];
