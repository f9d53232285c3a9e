//! Reasoning-trace data model and the line-delimited corpus format.
//!
//! A corpus file is UTF-8 JSON lines. The first line is a header
//! `{"schema_version":1,"name":"...","rank_cap":1024}`; every following line
//! is one trace. Ranks at or beyond the cap are stored as the cap value and
//! read back as [`Rank::BEYOND`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Rule 2 of the default rule set needs top-1000 resolution.
pub const DEFAULT_RANK_CAP: u32 = 1024;

/// 1-based rank of the end-of-thinking token in a next-token distribution.
///
/// Anything at or past the recording cap collapses to [`Rank::BEYOND`], which
/// compares greater than every real rank and never satisfies a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u32);

impl Rank {
    pub const BEYOND: Rank = Rank(u32::MAX);

    /// Builds a rank from a raw observation. `raw >= cap` maps to `BEYOND`.
    pub fn new(raw: u32, cap: u32) -> Option<Rank> {
        match raw {
            0 => None,
            r if r >= cap => Some(Rank::BEYOND),
            r => Some(Rank(r)),
        }
    }

    /// Like [`Rank::new`] but maps 0 to rank 1.
    pub fn saturating(raw: u32, cap: u32) -> Rank {
        Rank::new(raw.max(1), cap).unwrap_or(Rank::BEYOND)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn is_beyond(self) -> bool {
        self == Rank::BEYOND
    }

    /// "Within the top N": inclusive, and never true for `BEYOND`.
    #[inline]
    pub fn within(self, top_n: u32) -> bool {
        self.0 != u32::MAX && self.0 <= top_n
    }

    /// Value written to disk / fed to features: `BEYOND` becomes the cap.
    pub fn to_capped(self, cap: u32) -> u32 {
        if self.is_beyond() {
            cap
        } else {
            self.0.min(cap)
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_beyond() {
            f.write_str("MAX")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Outcome-map key: a sentence index after which thinking was cut, or the
/// unmodified run. Index 0 doubles as the no-think point (zero think tokens).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TruncateAt {
    Sentence(u32),
    Full,
}

impl TruncateAt {
    pub const NO_THINK: TruncateAt = TruncateAt::Sentence(0);

    pub fn sentence(self) -> Option<u32> {
        match self {
            TruncateAt::Sentence(i) => Some(i),
            TruncateAt::Full => None,
        }
    }
}

impl fmt::Display for TruncateAt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncateAt::Sentence(i) => write!(f, "{i}"),
            TruncateAt::Full => f.write_str("full"),
        }
    }
}

impl FromStr for TruncateAt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "full" {
            return Ok(TruncateAt::Full);
        }
        // Reject "+3", "03" and friends so keys stay canonical.
        if s.is_empty()
            || !s.bytes().all(|b| b.is_ascii_digit())
            || (s.len() > 1 && s.starts_with('0'))
        {
            return Err(format!("bad truncation key {s:?}"));
        }
        s.parse::<u32>()
            .map(TruncateAt::Sentence)
            .map_err(|e| format!("bad truncation key {s:?}: {e}"))
    }
}

impl Serialize for TruncateAt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TruncateAt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct KeyVisitor;
        impl Visitor<'_> for KeyVisitor {
            type Value = TruncateAt;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"full\" or a stringified sentence index")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<TruncateAt, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_str(KeyVisitor)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceRecord {
    pub index: u32,
    pub think_tokens_cum: u64,
    pub eot_rank: Rank,
    pub trigger_word: bool,
    pub boxed_confidence: Option<f64>,
    pub text_digest: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationOutcome {
    pub content_tokens: u64,
    pub correct: bool,
    pub looped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReasoningTrace {
    pub trace_id: String,
    pub rcp_index: Option<u32>,
    pub sentences: Vec<SentenceRecord>,
    pub outcomes: BTreeMap<TruncateAt, TruncationOutcome>,
    pub full_think_tokens: u64,
    pub meta: BTreeMap<String, String>,
}

impl ReasoningTrace {
    /// Recorded outcome of cutting thinking at `at`. Never interpolates.
    pub fn lookup_outcome(&self, at: TruncateAt) -> Result<&TruncationOutcome> {
        self.outcomes
            .get(&at)
            .ok_or_else(|| Error::OutcomeNotRecorded {
                trace_id: self.trace_id.clone(),
                at,
            })
    }

    /// Think tokens spent when thinking is cut at `at`.
    pub fn think_tokens_at(&self, at: TruncateAt) -> Result<u64> {
        match at {
            TruncateAt::Full => Ok(self.full_think_tokens),
            TruncateAt::Sentence(0) => Ok(0),
            TruncateAt::Sentence(i) => self
                .sentences
                .get(i as usize)
                .map(|s| s.think_tokens_cum)
                .ok_or_else(|| {
                    Error::validation(&self.trace_id, "truncate_at", format!("no sentence {i}"))
                }),
        }
    }

    /// Total generation cost of the run cut at `at`.
    pub fn cost_at(&self, at: TruncateAt) -> Result<u64> {
        let outcome = self.lookup_outcome(at)?;
        Ok(self.think_tokens_at(at)? + outcome.content_tokens)
    }

    pub fn has_confidence(&self) -> bool {
        self.sentences.iter().any(|s| s.boxed_confidence.is_some())
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.trace_id.as_str();
        if id.is_empty() {
            return Err(Error::validation(id, "trace_id", "empty"));
        }
        if self.sentences.is_empty() {
            return Err(Error::validation(id, "sentences", "trace has no sentences"));
        }
        let mut prev_cum = 0u64;
        for (pos, s) in self.sentences.iter().enumerate() {
            if s.index as usize != pos {
                return Err(Error::validation(
                    id,
                    "sentences.index",
                    format!("expected {pos}, found {}", s.index),
                ));
            }
            if s.think_tokens_cum == 0 || s.think_tokens_cum <= prev_cum {
                return Err(Error::validation(
                    id,
                    "sentences.think_tokens_cum",
                    format!("not strictly increasing at sentence {pos}"),
                ));
            }
            prev_cum = s.think_tokens_cum;
            if let Some(c) = s.boxed_confidence {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::validation(
                        id,
                        "sentences.boxed_confidence",
                        format!("{c} outside [0,1] at sentence {pos}"),
                    ));
                }
            }
        }
        if self.full_think_tokens != prev_cum {
            return Err(Error::validation(
                id,
                "full_think_tokens",
                format!(
                    "{} != last think_tokens_cum {prev_cum}",
                    self.full_think_tokens
                ),
            ));
        }
        if !self.outcomes.contains_key(&TruncateAt::Full) {
            return Err(Error::validation(id, "outcomes", "missing key \"full\""));
        }
        for (at, o) in &self.outcomes {
            if let TruncateAt::Sentence(i) = at {
                if *i as usize >= self.sentences.len() {
                    return Err(Error::validation(
                        id,
                        "outcomes",
                        format!("key {i} has no sentence"),
                    ));
                }
            }
            if o.looped && o.correct {
                return Err(Error::validation(
                    id,
                    "outcomes",
                    format!("key {at} is looped and correct"),
                ));
            }
        }
        if let Some(r) = self.rcp_index {
            if r as usize >= self.sentences.len() {
                return Err(Error::validation(
                    id,
                    "rcp_index",
                    format!("{r} has no sentence"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub schema_version: u32,
    pub rank_cap: u32,
    pub traces: Vec<ReasoningTrace>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, traces: Vec<ReasoningTrace>) -> Self {
        Corpus {
            name: name.into(),
            schema_version: SCHEMA_VERSION,
            rank_cap: DEFAULT_RANK_CAP,
            traces,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.traces.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if self.rank_cap < 2 {
            return Err(Error::Params(format!("rank_cap {} < 2", self.rank_cap)));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.traces {
            t.validate()?;
            if !seen.insert(t.trace_id.as_str()) {
                return Err(Error::validation(&t.trace_id, "trace_id", "duplicate"));
            }
        }
        Ok(())
    }

    /// Serializes to the line-delimited format. Validates first.
    pub fn to_jsonl(&self) -> Result<String> {
        self.validate()?;
        let header = WireHeader {
            schema_version: self.schema_version,
            name: self.name.clone(),
            rank_cap: self.rank_cap,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for t in &self.traces {
            let wire = WireTrace::from_trace(t, self.rank_cap);
            out.push_str(&serde_json::to_string(&wire).expect("trace serializes"));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Corpus> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, htext) = lines.next().ok_or(Error::EmptyCorpus)?;
        let header: WireHeader = serde_json::from_str(htext).map_err(|e| Error::Parse {
            line: hline,
            reason: format!("bad header: {e}"),
        })?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                line: hline,
                reason: format!("unsupported schema_version {}", header.schema_version),
            });
        }
        let mut traces = Vec::new();
        for (line, l) in lines {
            let wire: WireTrace = serde_json::from_str(l).map_err(|e| Error::Parse {
                line,
                reason: e.to_string(),
            })?;
            traces.push(wire.into_trace(header.rank_cap, line)?);
        }
        let corpus = Corpus {
            name: header.name,
            schema_version: header.schema_version,
            rank_cap: header.rank_cap,
            traces,
        };
        corpus.validate()?;
        Ok(corpus)
    }
}

pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_jsonl(&text)
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = corpus.to_jsonl()?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireHeader {
    schema_version: u32,
    name: String,
    #[serde(default = "default_cap")]
    rank_cap: u32,
}

fn default_cap() -> u32 {
    DEFAULT_RANK_CAP
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireSentence {
    index: u32,
    think_tokens_cum: u64,
    eot_rank: u32,
    #[serde(default, skip_serializing_if = "is_false")]
    trigger_word: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boxed_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text_digest: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireTrace {
    trace_id: String,
    #[serde(default)]
    rcp_index: Option<u32>,
    sentences: Vec<WireSentence>,
    outcomes: BTreeMap<TruncateAt, TruncationOutcome>,
    full_think_tokens: u64,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

impl WireTrace {
    fn from_trace(t: &ReasoningTrace, cap: u32) -> Self {
        WireTrace {
            trace_id: t.trace_id.clone(),
            rcp_index: t.rcp_index,
            sentences: t
                .sentences
                .iter()
                .map(|s| WireSentence {
                    index: s.index,
                    think_tokens_cum: s.think_tokens_cum,
                    eot_rank: s.eot_rank.to_capped(cap),
                    trigger_word: s.trigger_word,
                    boxed_confidence: s.boxed_confidence,
                    text_digest: s.text_digest.clone(),
                })
                .collect(),
            outcomes: t.outcomes.clone(),
            full_think_tokens: t.full_think_tokens,
            meta: t.meta.clone(),
        }
    }

    fn into_trace(self, cap: u32, line: usize) -> Result<ReasoningTrace> {
        let trace_id = self.trace_id;
        let sentences = self
            .sentences
            .into_iter()
            .map(|s| {
                let eot_rank = Rank::new(s.eot_rank, cap).ok_or_else(|| Error::Parse {
                    line,
                    reason: format!(
                        "trace {trace_id}: eot_rank must be >= 1 (sentence {})",
                        s.index
                    ),
                })?;
                Ok(SentenceRecord {
                    index: s.index,
                    think_tokens_cum: s.think_tokens_cum,
                    eot_rank,
                    trigger_word: s.trigger_word,
                    boxed_confidence: s.boxed_confidence,
                    text_digest: s.text_digest,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReasoningTrace {
            trace_id,
            rcp_index: self.rcp_index,
            sentences,
            outcomes: self.outcomes,
            full_think_tokens: self.full_think_tokens,
            meta: self.meta,
        })
    }
}
