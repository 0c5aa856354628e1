//! Streaming tweet readers and writers for the SNAP block format and TSV.
//!
//! SNAP records look like
//!
//! ```text
//! T 2009-06-01 00:00:00
//! U http://twitter.com/alice
//! W hello
//! ```
//!
//! with a tab after the one-letter prefix, separated by blank lines. A `T`
//! line that follows a `W` line also starts a new record. Lines following `W` that carry no recognised prefix are
//! continuation lines of the text and are joined with a single space.
//!
//! TSV records are `author \t epoch-seconds-or-empty \t text`, one per line.
//!
//! Readers never hold more than one record in memory. Malformed records are
//! skipped and tallied; only I/O failures end a stream with an error.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use thiserror::Error;

use crate::rt::{normalize_username, Username};

const SNAP_TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tweet {
    pub author: Username,
    /// UTC seconds; 0 when the source carried no usable timestamp.
    pub timestamp: i64,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusFormat {
    Snap,
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "snap" => Ok(CorpusFormat::Snap),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(format!("unknown corpus format {other:?} (expected snap or tsv)")),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Snap => "snap",
            CorpusFormat::Tsv => "tsv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Malformed {
    #[error("record has no user line")]
    MissingUser,
    #[error("record has no text line")]
    MissingText,
    #[error("invalid author: {0}")]
    BadAuthor(String),
    #[error("expected at least 3 tab-separated fields, found {0}")]
    TooFewFields(usize),
    #[error("record is not valid UTF-8")]
    NotUtf8,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Open { path: String, source: io::Error },
    #[error("read error after {records} records: {source}")]
    Read { records: u64, source: io::Error },
}

fn author_from_url(url: &str) -> Result<Username, Malformed> {
    let trimmed = url.trim().trim_end_matches('/');
    let last = trimmed.rsplit('/').next().unwrap_or("");
    normalize_username(last).map_err(|e| Malformed::BadAuthor(e.0))
}

fn parse_snap_time(raw: &str) -> i64 {
    NaiveDateTime::parse_from_str(raw.trim(), SNAP_TIME_FORMAT).map(|dt| dt.and_utc().timestamp()).unwrap_or(0)
}

/// Parses one SNAP record block. A missing or unparseable `T` line yields
/// timestamp 0; a missing `U` or `W` line makes the record malformed.
pub fn parse_snap_record<S: AsRef<str>>(block: &[S]) -> Result<Tweet, Malformed> {
    let mut timestamp = 0;
    let mut author = None;
    let mut text: Option<String> = None;
    for line in block {
        let line = line.as_ref();
        if let Some(rest) = line.strip_prefix("T\t") {
            timestamp = parse_snap_time(rest);
        } else if let Some(rest) = line.strip_prefix("U\t") {
            author = Some(author_from_url(rest)?);
        } else if let Some(rest) = line.strip_prefix("W\t") {
            text = Some(rest.to_owned());
        } else if let Some(body) = text.as_mut() {
            body.push(' ');
            body.push_str(line);
        }
    }
    let author = author.ok_or(Malformed::MissingUser)?;
    let text = text.ok_or(Malformed::MissingText)?;
    Ok(Tweet { author, timestamp, text })
}

/// Parses one TSV line. Fields past the second are rejoined with tabs.
/// An empty or unparseable timestamp field yields 0.
pub fn parse_tsv_record(line: &str) -> Result<Tweet, Malformed> {
    let mut fields = line.splitn(3, '\t');
    let author = fields.next().unwrap_or("");
    let (Some(ts), Some(text)) = (fields.next(), fields.next()) else {
        return Err(Malformed::TooFewFields(line.split('\t').count()));
    };
    let author = normalize_username(author).map_err(|e| Malformed::BadAuthor(e.0))?;
    let timestamp = ts.trim().parse::<i64>().unwrap_or(0);
    Ok(Tweet { author, timestamp, text: text.to_owned() })
}

/// Counts kept alongside a stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamTally {
    pub records: u64,
    pub yielded: u64,
    pub skipped: u64,
}

/// A single-consumer tweet stream over any buffered reader.
pub struct TweetStream<R> {
    reader: R,
    format: CorpusFormat,
    buf: Vec<u8>,
    /// SNAP lines read ahead of the record being assembled.
    pending: Option<String>,
    block: Vec<String>,
    block_bad_utf8: bool,
    tally: StreamTally,
    done: bool,
}

/// Opens `path` as a tweet stream.
pub fn open_corpus(path: &Path, format: CorpusFormat) -> Result<TweetStream<BufReader<File>>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Open { path: path.display().to_string(), source })?;
    Ok(TweetStream::new(BufReader::with_capacity(1 << 16, file), format))
}

impl<R: BufRead> TweetStream<R> {
    pub fn new(reader: R, format: CorpusFormat) -> Self {
        TweetStream {
            reader,
            format,
            buf: Vec::with_capacity(256),
            pending: None,
            block: Vec::new(),
            block_bad_utf8: false,
            tally: StreamTally::default(),
            done: false,
        }
    }

    pub fn tally(&self) -> StreamTally {
        self.tally
    }

    pub fn skipped(&self) -> u64 {
        self.tally.skipped
    }

    /// Next raw line without its terminator. `Ok(None)` at end of input;
    /// `Ok(Some(Err(())))` for a line that is not UTF-8.
    fn read_line(&mut self) -> io::Result<Option<Result<String, ()>>> {
        self.buf.clear();
        if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        if self.buf.last() == Some(&b'\r') {
            self.buf.pop();
        }
        Ok(Some(String::from_utf8(std::mem::take(&mut self.buf)).map_err(|_| ())))
    }

    fn finish_record(&mut self, parsed: Result<Tweet, Malformed>) -> Option<Tweet> {
        self.tally.records += 1;
        match parsed {
            Ok(t) => {
                self.tally.yielded += 1;
                Some(t)
            }
            Err(_) => {
                self.tally.skipped += 1;
                None
            }
        }
    }

    fn next_tsv(&mut self) -> io::Result<Option<Tweet>> {
        loop {
            let Some(line) = self.read_line()? else {
                return Ok(None);
            };
            let parsed = match line {
                Ok(l) if l.is_empty() => continue,
                Ok(l) => parse_tsv_record(&l),
                Err(()) => Err(Malformed::NotUtf8),
            };
            if let Some(t) = self.finish_record(parsed) {
                return Ok(Some(t));
            }
        }
    }

    fn take_block(&mut self) -> Option<Tweet> {
        let parsed = if self.block_bad_utf8 { Err(Malformed::NotUtf8) } else { parse_snap_record(&self.block) };
        self.block.clear();
        self.block_bad_utf8 = false;
        self.finish_record(parsed)
    }

    fn block_has_text(&self) -> bool {
        self.block.iter().any(|l| l.starts_with("W\t"))
    }

    fn next_snap(&mut self) -> io::Result<Option<Tweet>> {
        loop {
            let line = match self.pending.take() {
                Some(l) => Some(Ok(l)),
                None => self.read_line()?,
            };
            match line {
                None => {
                    if self.block.is_empty() && !self.block_bad_utf8 {
                        return Ok(None);
                    }
                    if let Some(t) = self.take_block() {
                        return Ok(Some(t));
                    }
                }
                Some(Err(())) => self.block_bad_utf8 = true,
                Some(Ok(l)) if l.trim().is_empty() => {
                    if !self.block.is_empty() || self.block_bad_utf8 {
                        if let Some(t) = self.take_block() {
                            return Ok(Some(t));
                        }
                    }
                }
                Some(Ok(l)) => {
                    if l.starts_with("T\t") && self.block_has_text() {
                        self.pending = Some(l);
                        if let Some(t) = self.take_block() {
                            return Ok(Some(t));
                        }
                    } else {
                        self.block.push(l);
                    }
                }
            }
        }
    }
}

impl<R: BufRead> Iterator for TweetStream<R> {
    type Item = Result<Tweet, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let res = match self.format {
            CorpusFormat::Snap => self.next_snap(),
            CorpusFormat::Tsv => self.next_tsv(),
        };
        match res {
            Ok(Some(t)) => Some(Ok(t)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(source) => {
                self.done = true;
                Some(Err(CorpusError::Read { records: self.tally.records, source }))
            }
        }
    }
}

fn flatten_text(text: &str) -> std::borrow::Cow<'_, str> {
    if text.contains(['\n', '\r']) {
        text.replace("\r\n", " ").replace(['\n', '\r'], " ").into()
    } else {
        text.into()
    }
}

/// Writes tweets in either corpus format. Line breaks inside a tweet's text
/// are replaced with spaces so every record stays readable.
pub struct CorpusWriter<W: Write> {
    out: W,
    format: CorpusFormat,
}

impl<W: Write> CorpusWriter<W> {
    pub fn new(out: W, format: CorpusFormat) -> Self {
        CorpusWriter { out, format }
    }

    pub fn write(&mut self, tweet: &Tweet) -> io::Result<()> {
        let text = flatten_text(&tweet.text);
        match self.format {
            CorpusFormat::Tsv => writeln!(self.out, "{}\t{}\t{}", tweet.author, tweet.timestamp, text),
            CorpusFormat::Snap => {
                let when = DateTime::from_timestamp(tweet.timestamp, 0).unwrap_or_default().format(SNAP_TIME_FORMAT);
                write!(self.out, "T\t{when}\nU\thttp://twitter.com/{}\nW\t{text}\n\n", tweet.author)
            }
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
