//! Streaming sentence-boundary detection over decoded token texts.
//!
//! A token closes a sentence when it contains terminal punctuation followed by
//! whitespace or the end of the token, or completes a blank line. Text since
//! the previous boundary must contain at least one non-punctuation,
//! non-whitespace character, so runs like `?!` or `...` close one sentence.
//! Several sentence ends inside one token yield a single boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::Rank;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmenterConfig {
    /// Characters that can end a sentence.
    pub punctuation: String,
    /// Treat `\n\n` as a boundary.
    pub blank_line: bool,
    /// Suppress boundaries after the words listed in `abbreviations`.
    pub abbreviation_guard: bool,
    pub abbreviations: Vec<String>,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            punctuation: ".?!".into(),
            blank_line: true,
            abbreviation_guard: true,
            abbreviations: [
                "e.g", "i.e", "etc", "vs", "cf", "Dr", "Mr", "Mrs", "Ms", "Fig", "Eq",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenEvent {
    pub step: u64,
    pub text: String,
    pub eot_rank: Rank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEvent {
    pub sentence_index: u32,
    pub at_step: u64,
    pub eot_rank_at_boundary: Rank,
}

/// Per-stream segmentation state. Memory is constant in the stream length:
/// only the previous character and a short tail of the current word are kept.
#[derive(Clone, Debug)]
pub struct Segmenter {
    config: SegmenterConfig,
    tail_cap: usize,
    next_step: u64,
    next_sentence: u32,
    content_since_boundary: bool,
    prev_char: Option<char>,
    word_tail: String,
}

impl Segmenter {
    pub fn new(config: SegmenterConfig) -> Self {
        let tail_cap = config
            .abbreviations
            .iter()
            .map(|a| a.chars().count())
            .max()
            .unwrap_or(0)
            + 1;
        Segmenter {
            config,
            tail_cap,
            next_step: 0,
            next_sentence: 0,
            content_since_boundary: false,
            prev_char: None,
            word_tail: String::new(),
        }
    }

    pub fn sentences_seen(&self) -> u32 {
        self.next_sentence
    }

    pub fn steps_seen(&self) -> u64 {
        self.next_step
    }

    fn guarded(&self) -> bool {
        if !self.config.abbreviation_guard {
            return false;
        }
        self.config.abbreviations.iter().any(|abbr| {
            self.word_tail
                .strip_suffix(abbr.as_str())
                .is_some_and(|head| {
                    head.chars()
                        .next_back()
                        .is_none_or(|c| !c.is_alphanumeric())
                })
        })
    }

    fn push_tail(&mut self, c: char) {
        if c.is_whitespace() {
            self.word_tail.clear();
            return;
        }
        self.word_tail.push(c);
        if self.word_tail.chars().count() > self.tail_cap {
            self.word_tail.remove(0);
        }
    }

    /// Consumes one token. Steps must arrive contiguously from 0.
    pub fn feed(&mut self, event: &TokenEvent) -> Result<Option<BoundaryEvent>> {
        self.feed_text(event.step, &event.text, event.eot_rank)
    }

    pub fn feed_text(
        &mut self,
        step: u64,
        text: &str,
        eot_rank: Rank,
    ) -> Result<Option<BoundaryEvent>> {
        if step != self.next_step {
            return Err(Error::OutOfOrder {
                expected: self.next_step,
                got: step,
            });
        }
        self.next_step += 1;

        let mut fired = false;
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            let next = chars.peek().copied();
            if c == '\n' && self.prev_char == Some('\n') && self.config.blank_line {
                if self.content_since_boundary {
                    fired = true;
                    self.content_since_boundary = false;
                }
            } else if self.config.punctuation.contains(c) {
                let terminal = next.is_none_or(char::is_whitespace);
                if terminal && self.content_since_boundary && !self.guarded() {
                    fired = true;
                    self.content_since_boundary = false;
                }
            } else if !c.is_whitespace() {
                self.content_since_boundary = true;
            }
            self.push_tail(c);
            self.prev_char = Some(c);
        }

        if !fired {
            return Ok(None);
        }
        let ev = BoundaryEvent {
            sentence_index: self.next_sentence,
            at_step: step,
            eot_rank_at_boundary: eot_rank,
        };
        self.next_sentence += 1;
        Ok(Some(ev))
    }
}

/// Runs a whole token sequence through a fresh segmenter.
pub fn segment_all<'a>(
    config: &SegmenterConfig,
    tokens: impl IntoIterator<Item = (&'a str, Rank)>,
) -> Vec<BoundaryEvent> {
    let mut seg = Segmenter::new(config.clone());
    tokens
        .into_iter()
        .enumerate()
        .filter_map(|(step, (text, rank))| {
            seg.feed_text(step as u64, text, rank)
                .expect("steps are contiguous")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(config: &SegmenterConfig, tokens: &[&str]) -> Vec<u64> {
        segment_all(config, tokens.iter().map(|t| (*t, Rank::BEYOND)))
            .iter()
            .map(|b| b.at_step)
            .collect()
    }

    #[test]
    fn terminal_period() {
        let c = SegmenterConfig::default();
        assert_eq!(steps(&c, &["The", " answer", " is", " 7."]), vec![3]);
    }

    #[test]
    fn abbreviation_false_positive_without_guard() {
        let off = SegmenterConfig {
            abbreviation_guard: false,
            ..SegmenterConfig::default()
        };
        assert_eq!(steps(&off, &["e.g", ". wait"]), vec![1]);
        assert_eq!(
            steps(&SegmenterConfig::default(), &["e.g", ". wait"]),
            Vec::<u64>::new()
        );
        assert_eq!(
            steps(&SegmenterConfig::default(), &["Slovenia vs", "."]),
            Vec::<u64>::new()
        );
        // A word that merely ends in a guarded abbreviation is not guarded.
        assert_eq!(
            steps(&SegmenterConfig::default(), &["canvas", "."]),
            vec![1]
        );
    }

    #[test]
    fn decimals_inside_a_token_are_not_boundaries() {
        let c = SegmenterConfig::default();
        assert!(steps(&c, &["x", " = 3.14", " so"]).is_empty());
    }

    #[test]
    fn consecutive_punctuation_is_one_boundary() {
        let c = SegmenterConfig::default();
        assert_eq!(
            steps(&c, &["Really", "?!", " Yes", "...", " ok"]),
            vec![1, 3]
        );
        assert_eq!(steps(&c, &["Done", ".", ".", " ."]), vec![1]);
    }

    #[test]
    fn blank_line() {
        let c = SegmenterConfig::default();
        assert_eq!(steps(&c, &["Step one", "\n", "\n", "Step two"]), vec![2]);
        assert_eq!(steps(&c, &["a\n\nb\n\n"]), vec![0]);
        let off = SegmenterConfig {
            blank_line: false,
            ..SegmenterConfig::default()
        };
        assert!(steps(&off, &["Step one", "\n\n", "two"]).is_empty());
    }

    #[test]
    fn boundary_carries_rank_and_index() {
        let mut seg = Segmenter::new(SegmenterConfig::default());
        let r = Rank::saturating(3, 1024);
        assert_eq!(seg.feed_text(0, "Hi", Rank::BEYOND).unwrap(), None);
        let b = seg.feed_text(1, ".", r).unwrap().unwrap();
        assert_eq!(
            (b.sentence_index, b.at_step, b.eot_rank_at_boundary),
            (0, 1, r)
        );
        let b = seg.feed_text(2, " Bye!", r).unwrap().unwrap();
        assert_eq!(b.sentence_index, 1);
        assert_eq!(seg.sentences_seen(), 2);
    }

    #[test]
    fn out_of_order_step_is_rejected() {
        let mut seg = Segmenter::new(SegmenterConfig::default());
        seg.feed_text(0, "a", Rank::BEYOND).unwrap();
        assert!(matches!(
            seg.feed_text(2, "b", Rank::BEYOND),
            Err(Error::OutOfOrder {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn tail_stays_bounded() {
        let mut seg = Segmenter::new(SegmenterConfig::default());
        for step in 0..10_000 {
            seg.feed_text(step, "abcdefghij", Rank::BEYOND).unwrap();
        }
        assert!(seg.word_tail.chars().count() <= seg.tail_cap);
    }
}
