//! Early stopping of long reasoning by watching the rank of the
//! end-of-thinking token at sentence boundaries.
//!
//! Traces ([`trace`]) are segmented into sentences ([`segmenter`]), windows of
//! sentence ranks are checked against threshold rules ([`rules`]), and stop
//! strategies are replayed over recorded truncation outcomes ([`strategy`],
//! [`eval`]). [`synth`] generates traces with a known completion point,
//! [`miner`] learns rules from labeled windows, and [`stream`] runs the
//! rules live over a line protocol.

pub mod config;
pub mod error;
pub mod eval;
pub mod miner;
pub mod rules;
pub mod segmenter;
pub mod strategy;
pub mod stream;
pub mod synth;
pub mod trace;

pub use config::ToolkitConfig;
pub use error::{Error, Result};
pub use eval::{evaluate_corpus, stage_profile, StageConfig, StageStats, StrategyReport};
pub use miner::{distill_rules, train, MinedModel, MinerParams};
pub use rules::{default_rcpd_rules, RankWindow, RuleSet, StepRule, StopDecision};
pub use segmenter::{BoundaryEvent, Segmenter, SegmenterConfig, TokenEvent};
pub use strategy::{decide_stop, run_strategy, StrategyConfig};
pub use stream::{Cadence, Controller, Reply};
pub use synth::{generate, SynthParams};
pub use trace::{Corpus, Rank, ReasoningTrace, TruncateAt};
