//! Session-oriented line protocol for live early stopping.
//!
//! Each input line is one JSON object with `type` in `start`, `token`, `end`;
//! each produces exactly one reply line with `type` in `ack`, `decision`,
//! `summary`, `error`.
//!
//! ```text
//! {"type":"start","session_id":"a"}
//! {"type":"ack","session_id":"a"}
//! {"type":"token","session_id":"a","text":" 7.","eot_rank":3}
//! {"type":"decision","session_id":"a","action":"stop","rule":"R1","sentence_index":0}
//! {"type":"end","session_id":"a"}
//! {"type":"summary","session_id":"a","sentences_seen":1,"fired_rule":"R1"}
//! ```
//!
//! `eot_rank` is a 1-based rank; values above the rank cap, `null`, or an
//! absent field mean the token was not in the observed top-K.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{RankWindow, RuleSet};
use crate::segmenter::{Segmenter, SegmenterConfig};
use crate::trace::{Rank, DEFAULT_RANK_CAP};

/// When the rule set is consulted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cadence {
    /// At sentence boundaries, with sentence ranks as the window.
    #[default]
    Sentence,
    /// After every token, with token ranks as the window.
    Token,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Thinking,
    Stopped,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum Message {
    Start {
        session_id: String,
        #[serde(default)]
        rules: Option<RuleSet>,
    },
    Token {
        session_id: String,
        text: String,
        #[serde(default)]
        eot_rank: Option<u32>,
    },
    End {
        session_id: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Continue,
    Stop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Reply {
    Ack {
        session_id: String,
    },
    Decision {
        session_id: String,
        action: Action,
        #[serde(skip_serializing_if = "Option::is_none")]
        rule: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        sentence_index: Option<u32>,
    },
    Summary {
        session_id: String,
        sentences_seen: u32,
        fired_rule: Option<String>,
    },
    Error {
        session_id: Option<String>,
        reason: String,
    },
}

impl Reply {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("reply serializes")
    }
}

/// One live generation. State is constant-size apart from the shared rules.
#[derive(Clone, Debug)]
pub struct Session {
    pub session_id: String,
    segmenter: Segmenter,
    window: RankWindow,
    rules: Arc<RuleSet>,
    pub phase: Phase,
    fired: Option<(String, u32)>,
    tokens_seen: u64,
}

impl Session {
    pub fn new(
        session_id: impl Into<String>,
        rules: Arc<RuleSet>,
        segmenter: SegmenterConfig,
    ) -> Self {
        Session {
            session_id: session_id.into(),
            segmenter: Segmenter::new(segmenter),
            window: RankWindow::EMPTY,
            rules,
            phase: Phase::Thinking,
            fired: None,
            tokens_seen: 0,
        }
    }

    pub fn sentences_seen(&self) -> u32 {
        self.segmenter.sentences_seen()
    }

    /// Feeds one token; returns the fired rule and sentence index on stop.
    pub fn push_token(
        &mut self,
        text: &str,
        rank: Rank,
        cadence: Cadence,
    ) -> Result<Option<(&str, u32)>> {
        if self.phase == Phase::Stopped {
            return Err(Error::SessionStopped);
        }
        let step = self.tokens_seen;
        self.tokens_seen += 1;
        let boundary = self.segmenter.feed_text(step, text, rank)?;
        let at = match cadence {
            Cadence::Sentence => match boundary {
                Some(b) => {
                    self.window = self.window.advance(b.eot_rank_at_boundary);
                    b.sentence_index
                }
                None => return Ok(None),
            },
            Cadence::Token => {
                self.window = self.window.advance(rank);
                // Sentence in progress, or the one this token just closed.
                boundary.map_or(self.segmenter.sentences_seen(), |b| b.sentence_index)
            }
        };
        if let Some(id) = self.rules.evaluate(&self.window).fired_rule() {
            self.phase = Phase::Stopped;
            self.fired = Some((id.to_string(), at));
            let (id, at) = self.fired.as_ref().expect("just set");
            return Ok(Some((id.as_str(), *at)));
        }
        Ok(None)
    }

    pub fn fired_rule(&self) -> Option<&str> {
        self.fired.as_ref().map(|(id, _)| id.as_str())
    }

    pub fn stop_sentence(&self) -> Option<u32> {
        self.fired.as_ref().map(|(_, at)| *at)
    }
}

#[derive(Clone, Debug)]
pub struct Controller {
    default_rules: Arc<RuleSet>,
    segmenter: SegmenterConfig,
    rank_cap: u32,
    cadence: Cadence,
    sessions: BTreeMap<String, Session>,
}

impl Controller {
    pub fn new(default_rules: RuleSet, segmenter: SegmenterConfig) -> Result<Self> {
        default_rules.validate()?;
        Ok(Controller {
            default_rules: Arc::new(default_rules),
            segmenter,
            rank_cap: DEFAULT_RANK_CAP,
            cadence: Cadence::Sentence,
            sessions: BTreeMap::new(),
        })
    }

    pub fn with_rank_cap(mut self, cap: u32) -> Self {
        self.rank_cap = cap;
        self
    }

    pub fn with_cadence(mut self, cadence: Cadence) -> Self {
        self.cadence = cadence;
        self
    }

    pub fn active_sessions(&self) -> usize {
        self.sessions.len()
    }

    pub fn handle_line(&mut self, line: &str) -> Reply {
        let msg: Message = match serde_json::from_str(line) {
            Ok(m) => m,
            Err(e) => {
                // Recover the id if the line is at least an object carrying one.
                let session_id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("session_id")?.as_str().map(String::from));
                return Reply::Error {
                    session_id,
                    reason: format!("malformed message: {e}"),
                };
            }
        };
        self.handle(msg)
    }

    fn handle(&mut self, msg: Message) -> Reply {
        let err = |session_id: String, reason: &str| Reply::Error {
            session_id: Some(session_id),
            reason: reason.to_string(),
        };
        match msg {
            Message::Start { session_id, rules } => {
                if self.sessions.contains_key(&session_id) {
                    return err(session_id, "session already exists");
                }
                let rules = match rules {
                    Some(r) => match r.validate() {
                        Ok(()) => Arc::new(r),
                        Err(e) => return err(session_id, &e.to_string()),
                    },
                    None => Arc::clone(&self.default_rules),
                };
                let s = Session::new(session_id.clone(), rules, self.segmenter.clone());
                self.sessions.insert(session_id.clone(), s);
                Reply::Ack { session_id }
            }
            Message::Token {
                session_id,
                text,
                eot_rank,
            } => {
                let Some(s) = self.sessions.get_mut(&session_id) else {
                    return err(session_id, "unknown session");
                };
                let rank = match eot_rank {
                    Some(0) => return err(session_id, "eot_rank must be >= 1"),
                    Some(r) => Rank::saturating(r, self.rank_cap),
                    None => Rank::BEYOND,
                };
                match s.push_token(&text, rank, self.cadence) {
                    Ok(Some((id, at))) => Reply::Decision {
                        rule: Some(id.to_string()),
                        sentence_index: Some(at),
                        session_id,
                        action: Action::Stop,
                    },
                    Ok(None) => Reply::Decision {
                        session_id,
                        action: Action::Continue,
                        rule: None,
                        sentence_index: None,
                    },
                    Err(e) => err(session_id, &e.to_string()),
                }
            }
            Message::End { session_id } => match self.sessions.remove(&session_id) {
                Some(s) => Reply::Summary {
                    sentences_seen: s.sentences_seen(),
                    fired_rule: s.fired_rule().map(String::from),
                    session_id,
                },
                None => err(session_id, "unknown session"),
            },
        }
    }

    /// Serves one reply line per input line until end of input. Blank lines are skipped.
    pub fn serve<R: BufRead, W: Write>(&mut self, input: R, mut output: W) -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(output, "{}", self.handle_line(&line).to_line())?;
            output.flush()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::default_rcpd_rules;

    fn controller() -> Controller {
        Controller::new(default_rcpd_rules(), SegmenterConfig::default()).unwrap()
    }

    fn send(c: &mut Controller, line: &str) -> String {
        c.handle_line(line).to_line()
    }

    #[test]
    fn r1_fires_on_first_boundary() {
        let mut c = controller();
        assert_eq!(
            send(&mut c, r#"{"type":"start","session_id":"a"}"#),
            r#"{"type":"ack","session_id":"a"}"#
        );
        assert_eq!(
            send(
                &mut c,
                r#"{"type":"token","session_id":"a","text":"The answer","eot_rank":40}"#
            ),
            r#"{"type":"decision","session_id":"a","action":"continue"}"#
        );
        assert_eq!(
            send(
                &mut c,
                r#"{"type":"token","session_id":"a","text":" is 7.","eot_rank":3}"#
            ),
            r#"{"type":"decision","session_id":"a","action":"stop","rule":"R1","sentence_index":0}"#
        );
        assert_eq!(
            send(
                &mut c,
                r#"{"type":"token","session_id":"a","text":" more","eot_rank":3}"#
            ),
            r#"{"type":"error","session_id":"a","reason":"session already stopped"}"#
        );
        assert_eq!(
            send(&mut c, r#"{"type":"end","session_id":"a"}"#),
            r#"{"type":"summary","session_id":"a","sentences_seen":1,"fired_rule":"R1"}"#
        );
        assert_eq!(c.active_sessions(), 0);
    }

    #[test]
    fn beyond_ranks_never_stop() {
        let mut c = controller();
        send(&mut c, r#"{"type":"start","session_id":"b"}"#);
        for i in 0..100 {
            let text = if i % 3 == 2 { "." } else { " word" };
            let line =
                format!(r#"{{"type":"token","session_id":"b","text":"{text}","eot_rank":null}}"#);
            assert!(send(&mut c, &line).ends_with(r#""action":"continue"}"#));
        }
        let s = send(&mut c, r#"{"type":"end","session_id":"b"}"#);
        assert_eq!(
            s,
            r#"{"type":"summary","session_id":"b","sentences_seen":33,"fired_rule":null}"#
        );
    }

    #[test]
    fn errors_preserve_session() {
        let mut c = controller();
        send(&mut c, r#"{"type":"start","session_id":"a"}"#);
        let r = c.handle_line(r#"{"type":"token","session_id":"a","text":5}"#);
        assert!(matches!(r, Reply::Error { session_id: Some(ref s), .. } if s == "a"));
        assert!(matches!(
            c.handle_line("not json"),
            Reply::Error {
                session_id: None,
                ..
            }
        ));
        assert!(matches!(
            c.handle_line(r#"{"type":"hello"}"#),
            Reply::Error { .. }
        ));
        assert_eq!(
            send(&mut c, r#"{"type":"token","session_id":"zz","text":"x"}"#),
            r#"{"type":"error","session_id":"zz","reason":"unknown session"}"#
        );
        assert_eq!(
            send(&mut c, r#"{"type":"start","session_id":"a"}"#),
            r#"{"type":"error","session_id":"a","reason":"session already exists"}"#
        );
        assert_eq!(c.active_sessions(), 1);
        assert!(send(
            &mut c,
            r#"{"type":"token","session_id":"a","text":"x","eot_rank":900}"#
        )
        .contains("continue"));
    }

    #[test]
    fn custom_rules_per_session() {
        let mut c = controller();
        let start = r#"{"type":"start","session_id":"c","rules":{"rules":[{"rule_id":"T","current_threshold":100}]}}"#;
        assert!(send(&mut c, start).contains("ack"));
        let r = send(
            &mut c,
            r#"{"type":"token","session_id":"c","text":"Hm.","eot_rank":90}"#,
        );
        assert!(r.contains(r#""rule":"T""#));
        let bad = r#"{"type":"start","session_id":"d","rules":{"rules":[{"rule_id":"T","current_threshold":0}]}}"#;
        assert!(send(&mut c, bad).contains("error"));
        assert_eq!(c.active_sessions(), 1);
    }

    #[test]
    fn token_cadence_checks_every_token() {
        let mut c = controller().with_cadence(Cadence::Token);
        send(&mut c, r#"{"type":"start","session_id":"a"}"#);
        assert!(send(
            &mut c,
            r#"{"type":"token","session_id":"a","text":"One.","eot_rank":500}"#
        )
        .contains("continue"));
        let r = send(
            &mut c,
            r#"{"type":"token","session_id":"a","text":" two","eot_rank":4}"#,
        );
        assert_eq!(
            r,
            r#"{"type":"decision","session_id":"a","action":"stop","rule":"R1","sentence_index":1}"#
        );
    }
}
