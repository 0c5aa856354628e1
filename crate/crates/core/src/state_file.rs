//! Text serialization of an [`AggregateState`].
//!
//! One record per line, tab-separated fields, LF terminated, lines sorted
//! bytewise:
//!
//! ```text
//! A <user> <count>
//! D <key> <value>
//! T <x> <y> <z> <count>
//! ```
//!
//! Sorted output makes the file a canonical form of the state, so two
//! equal states always serialize to identical bytes.

use std::collections::hash_map::Entry;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::influence::{AggregateState, Diagnostics};
use crate::rt::{normalize_username, FollowingTriple, Username};

#[derive(Debug, Error)]
pub enum StateFileError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn diagnostic_entries(d: &Diagnostics) -> [(&'static str, u64); 3] {
    [("malformed_skipped", d.malformed_skipped), ("triples_emitted", d.triples_emitted), ("tweets_seen", d.tweets_seen)]
}

/// All lines of the canonical serialization, sorted, without terminators.
pub fn state_lines(state: &AggregateState) -> Vec<String> {
    let mut lines = Vec::with_capacity(state.author_counts.len() + state.triple_counts.len() + 3);
    for (user, count) in &state.author_counts {
        lines.push(format!("A\t{user}\t{count}"));
    }
    for (key, value) in diagnostic_entries(&state.diagnostics) {
        lines.push(format!("D\t{key}\t{value}"));
    }
    for (t, count) in &state.triple_counts {
        lines.push(format!("T\t{}\t{}\t{}\t{count}", t.x, t.y, t.z));
    }
    lines.sort_unstable();
    lines
}

pub fn write_state<W: Write>(state: &AggregateState, mut out: W) -> io::Result<()> {
    for line in state_lines(state) {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial state file at `path`.
pub fn save_state(state: &AggregateState, path: &Path) -> io::Result<()> {
    let tmp =
        path.with_file_name(format!(".{}.partial", path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()));
    let res = fs::File::create(&tmp).and_then(|f| {
        let mut w = io::BufWriter::new(f);
        write_state(state, &mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()
    });
    match res.and_then(|()| fs::rename(&tmp, path)) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn user(field: &str, line: usize) -> Result<Username, StateFileError> {
    normalize_username(field).map_err(|e| StateFileError::Parse { line, msg: e.to_string() })
}

fn count(field: &str, line: usize) -> Result<u64, StateFileError> {
    match field.parse::<u64>() {
        Ok(c) => Ok(c),
        Err(_) => Err(StateFileError::Parse { line, msg: format!("bad count {field:?}") }),
    }
}

pub fn read_state<R: BufRead>(input: R) -> Result<AggregateState, StateFileError> {
    let mut state = AggregateState::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = |msg: String| StateFileError::Parse { line: lineno, msg };
        let duplicate = || bad(format!("duplicate record {line:?}"));
        match (fields[0], fields.len()) {
            ("A", 3) => {
                let c = count(fields[2], lineno)?;
                if c == 0 {
                    return Err(bad("author count must be positive".into()));
                }
                match state.author_counts.entry(user(fields[1], lineno)?) {
                    Entry::Occupied(_) => return Err(duplicate()),
                    Entry::Vacant(v) => {
                        v.insert(c);
                    }
                }
            }
            ("T", 5) => {
                let c = count(fields[4], lineno)?;
                if c == 0 {
                    return Err(bad("triple count must be positive".into()));
                }
                let t =
                    FollowingTriple::new(user(fields[1], lineno)?, user(fields[2], lineno)?, user(fields[3], lineno)?)
                        .ok_or_else(|| bad("triple users must be distinct".into()))?;
                match state.triple_counts.entry(t) {
                    Entry::Occupied(_) => return Err(duplicate()),
                    Entry::Vacant(v) => {
                        v.insert(c);
                    }
                }
            }
            ("D", 3) => {
                let v = count(fields[2], lineno)?;
                let d = &mut state.diagnostics;
                match fields[1] {
                    "tweets_seen" => d.tweets_seen = v,
                    "triples_emitted" => d.triples_emitted = v,
                    "malformed_skipped" => d.malformed_skipped = v,
                    other => return Err(bad(format!("unknown diagnostic {other:?}"))),
                }
            }
            _ => return Err(bad(format!("unrecognised record {line:?}"))),
        }
    }
    Ok(state)
}

pub fn load_state(path: &Path) -> Result<AggregateState, StateFileError> {
    read_state(io::BufReader::new(fs::File::open(path)?))
}
