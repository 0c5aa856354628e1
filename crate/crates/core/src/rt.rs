//! Retweet-chain recognition.
//!
//! A retweet chain is the run of `RT @name` prefixes at the very start of a
//! tweet body. The grammar accepted here is, per prefix:
//!
//! ```text
//! RT <whitespace>+ @<username> [:] <whitespace>*
//! ```
//!
//! with `RT` matched case-insensitively and `<username>` being
//! `[A-Za-z0-9_]{1,15}`. Matching stops at the first position where another
//! prefix cannot be read. `via @user` and quote styles are not recognized.

use std::borrow::Borrow;
use std::fmt;

use thiserror::Error;

use crate::corpus::Tweet;

pub const MAX_USERNAME_LEN: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid username {0:?}")]
pub struct InvalidUsername(pub String);

/// A case-folded username matching `[a-z0-9_]{1,15}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Username(String);

impl Username {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Username {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Username {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Username {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for Username {
    type Err = InvalidUsername;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_username(s)
    }
}

#[inline]
fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Case-fold `raw` and check it against the username grammar.
pub fn normalize_username(raw: &str) -> Result<Username, InvalidUsername> {
    let bytes = raw.as_bytes();
    if bytes.is_empty() || bytes.len() > MAX_USERNAME_LEN || !bytes.iter().all(|&b| is_name_byte(b)) {
        return Err(InvalidUsername(raw.to_owned()));
    }
    Ok(Username(raw.to_ascii_lowercase()))
}

/// Reads one `RT @name[:] ` prefix starting at `pos`.
/// Returns the name's byte range and the position after the separator.
fn read_prefix(bytes: &[u8], pos: usize) -> Option<(usize, usize, usize)> {
    let rest = &bytes[pos..];
    if rest.len() < 4 || !rest[..2].eq_ignore_ascii_case(b"RT") {
        return None;
    }
    let mut i = 2;
    let ws_start = i;
    while i < rest.len() && rest[i].is_ascii_whitespace() {
        i += 1;
    }
    if i == ws_start || i >= rest.len() || rest[i] != b'@' {
        return None;
    }
    i += 1;
    let name_start = i;
    while i < rest.len() && is_name_byte(rest[i]) {
        i += 1;
    }
    let name_len = i - name_start;
    if name_len == 0 || name_len > MAX_USERNAME_LEN {
        return None;
    }
    let name_end = i;
    if i < rest.len() && rest[i] == b':' {
        i += 1;
    }
    while i < rest.len() && rest[i].is_ascii_whitespace() {
        i += 1;
    }
    Some((pos + name_start, pos + name_end, pos + i))
}

/// Usernames of the leading retweet chain, outermost first.
pub fn extract_rt_chain(text: &str) -> Vec<Username> {
    let bytes = text.as_bytes();
    let mut chain = Vec::new();
    let mut pos = 0;
    while let Some((start, end, next)) = read_prefix(bytes, pos) {
        chain.push(Username(text[start..end].to_ascii_lowercase()));
        pos = next;
    }
    chain
}

/// The first two chain entries without allocating the rest of the chain.
fn leading_pair(text: &str) -> Option<(&str, &str)> {
    let bytes = text.as_bytes();
    let (s1, e1, next) = read_prefix(bytes, 0)?;
    let (s2, e2, _) = read_prefix(bytes, next)?;
    Some((&text[s1..e1], &text[s2..e2]))
}

/// Origin `x`, spreader `y` and poster `z` of a tweet starting `RT @y: RT @x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FollowingTriple {
    pub x: Username,
    pub y: Username,
    pub z: Username,
}

impl FollowingTriple {
    /// Builds a triple, rejecting any pair of equal usernames.
    pub fn new(x: Username, y: Username, z: Username) -> Option<Self> {
        if x == y || y == z || x == z {
            return None;
        }
        Some(FollowingTriple { x, y, z })
    }
}

/// Maps a tweet to its following triple, if its text carries at least two
/// nested retweet prefixes and the three users are distinct. Deeper chains
/// only contribute their two outermost mentions.
pub fn to_following_triple(tweet: &Tweet) -> Option<FollowingTriple> {
    let (y, x) = leading_pair(&tweet.text)?;
    let z = tweet.author.as_str();
    if x.eq_ignore_ascii_case(y) || y.eq_ignore_ascii_case(z) || x.eq_ignore_ascii_case(z) {
        return None;
    }
    Some(FollowingTriple {
        x: Username(x.to_ascii_lowercase()),
        y: Username(y.to_ascii_lowercase()),
        z: tweet.author.clone(),
    })
}
