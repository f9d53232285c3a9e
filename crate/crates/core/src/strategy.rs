//! Early-exit strategies replayed against recorded truncation outcomes.

use std::fmt;

use crate::error::{Error, Result};
use crate::rules::{RankWindow, RuleSet};
use crate::trace::{ReasoningTrace, TruncateAt};

/// Deer's probe threshold is not published; this is a configurable default.
pub const DEFAULT_DEER_THRESHOLD: f64 = 0.95;

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyConfig {
    /// No intervention.
    Full,
    /// Stop at the first sentence boundary at or past a think-token budget.
    BudgetForce { budget_tokens: u64 },
    /// Skip thinking entirely.
    NoThink,
    /// Stop once the end-of-thinking rank enters the top 5.
    ThinkRank5,
    /// Stop at a trigger-word sentence whose answer-probe confidence clears the threshold.
    Deer { confidence_threshold: f64 },
    /// Stop when any rule in the set fires over the rank window.
    Rcpd { rules: RuleSet },
}

impl StrategyConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            StrategyConfig::Full => "full",
            StrategyConfig::BudgetForce { .. } => "budget_force",
            StrategyConfig::NoThink => "nothink",
            StrategyConfig::ThinkRank5 => "think_rank5",
            StrategyConfig::Deer { .. } => "deer",
            StrategyConfig::Rcpd { .. } => "rcpd",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyConfig::BudgetForce { budget_tokens: 0 } => {
                Err(Error::Params("budget_force needs budget_tokens > 0".into()))
            }
            StrategyConfig::Deer {
                confidence_threshold: t,
            } if !(0.0..=1.0).contains(t) => {
                Err(Error::Params(format!("deer threshold {t} outside [0,1]")))
            }
            StrategyConfig::Rcpd { rules } => rules.validate(),
            _ => Ok(()),
        }
    }

    /// Fails when the trace lacks the fields this strategy reads.
    pub fn check_applicable(&self, trace: &ReasoningTrace) -> Result<()> {
        if let StrategyConfig::Deer { .. } = self {
            if !trace.has_confidence() {
                return Err(Error::StrategyInapplicable {
                    strategy: self.to_string(),
                    reason: format!("trace {} has no boxed_confidence fields", trace.trace_id),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyConfig::BudgetForce { budget_tokens } => {
                write!(f, "budget_force@{budget_tokens}")
            }
            StrategyConfig::Deer {
                confidence_threshold,
            } => write!(f, "deer@{confidence_threshold}"),
            other => f.write_str(other.kind()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StopPoint {
    pub at: TruncateAt,
    pub fired_rule: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyOutcome {
    pub truncate_at: TruncateAt,
    pub fired_rule: Option<String>,
    pub think_tokens: u64,
    pub content_tokens: u64,
    pub total_tokens: u64,
    pub correct: bool,
    pub looped: bool,
}

/// First sentence at which `rules` fires, with the rule id.
pub fn first_firing<'r>(rules: &'r RuleSet, trace: &ReasoningTrace) -> Option<(u32, &'r str)> {
    let mut window = RankWindow::EMPTY;
    for s in &trace.sentences {
        window = window.advance(s.eot_rank);
        if let Some(id) = rules.evaluate(&window).fired_rule() {
            return Some((s.index, id));
        }
    }
    None
}

pub fn decide(config: &StrategyConfig, trace: &ReasoningTrace) -> Result<StopPoint> {
    config.check_applicable(trace)?;
    let stop = |at: Option<u32>| at.map_or(TruncateAt::Full, TruncateAt::Sentence);
    let point = match config {
        StrategyConfig::Full => StopPoint {
            at: TruncateAt::Full,
            fired_rule: None,
        },
        StrategyConfig::NoThink => StopPoint {
            at: TruncateAt::NO_THINK,
            fired_rule: None,
        },
        StrategyConfig::BudgetForce { budget_tokens } => StopPoint {
            at: stop(
                trace
                    .sentences
                    .iter()
                    .find(|s| s.think_tokens_cum >= *budget_tokens)
                    .map(|s| s.index),
            ),
            fired_rule: None,
        },
        StrategyConfig::ThinkRank5 => {
            let hit = trace
                .sentences
                .iter()
                .find(|s| s.eot_rank.within(5))
                .map(|s| s.index);
            StopPoint {
                at: stop(hit),
                fired_rule: hit.map(|_| "R1".to_string()),
            }
        }
        StrategyConfig::Deer {
            confidence_threshold,
        } => StopPoint {
            at: stop(
                trace
                    .sentences
                    .iter()
                    .find(|s| {
                        s.trigger_word
                            && s.boxed_confidence
                                .is_some_and(|c| c >= *confidence_threshold)
                    })
                    .map(|s| s.index),
            ),
            fired_rule: None,
        },
        StrategyConfig::Rcpd { rules } => match first_firing(rules, trace) {
            Some((i, id)) => StopPoint {
                at: TruncateAt::Sentence(i),
                fired_rule: Some(id.to_string()),
            },
            None => StopPoint {
                at: TruncateAt::Full,
                fired_rule: None,
            },
        },
    };
    Ok(point)
}

/// Where the strategy would cut thinking on this trace.
pub fn decide_stop(config: &StrategyConfig, trace: &ReasoningTrace) -> Result<TruncateAt> {
    decide(config, trace).map(|p| p.at)
}

/// Replays the strategy: decides the cut, then reads the recorded outcome.
pub fn run_strategy(config: &StrategyConfig, trace: &ReasoningTrace) -> Result<StrategyOutcome> {
    let point = decide(config, trace)?;
    let outcome = *trace.lookup_outcome(point.at)?;
    let think_tokens = trace.think_tokens_at(point.at)?;
    Ok(StrategyOutcome {
        truncate_at: point.at,
        fired_rule: point.fired_rule,
        think_tokens,
        content_tokens: outcome.content_tokens,
        total_tokens: think_tokens + outcome.content_tokens,
        correct: outcome.correct,
        looped: outcome.looped,
    })
}
