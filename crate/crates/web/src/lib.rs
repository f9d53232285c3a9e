//! Browser bindings. Every export takes plain values and returns a JSON
//! string, so the page needs no generated TypeScript types.

use rcp_core::eval::evaluate_corpus;
use rcp_core::rules::default_rcpd_rules;
use rcp_core::strategy::decide;
use rcp_core::{generate, Rank, RankWindow, RuleSet, StrategyConfig, SynthParams, TruncateAt};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Stop {
    strategy: String,
    at: Option<u32>,
    rule: Option<String>,
    tokens: u64,
    correct: bool,
}

#[derive(Serialize)]
struct TraceView {
    trace_id: String,
    rcp_index: Option<u32>,
    ranks: Vec<u32>,
    think_tokens: Vec<u64>,
    content_tokens: Vec<Option<u64>>,
    correct: Vec<Option<bool>>,
    stops: Vec<Stop>,
}

fn params(seed: u64, n: usize) -> SynthParams {
    SynthParams {
        n_traces: n,
        seed,
        ..SynthParams::default()
    }
}

fn rules_or_default(rules_json: &str) -> Result<RuleSet, String> {
    if rules_json.trim().is_empty() {
        Ok(default_rcpd_rules())
    } else {
        RuleSet::from_json(rules_json).map_err(|e| e.to_string())
    }
}

/// One synthetic trace: rank trajectory, per-depth outcomes and where each strategy stops.
pub fn trace_view(seed: u64, index: usize) -> Result<String, String> {
    let corpus = generate(&params(seed, index + 1)).map_err(|e| e.to_string())?;
    let t = &corpus.traces[index];
    let cap = corpus.rank_cap;
    let configs = [
        StrategyConfig::Full,
        StrategyConfig::BudgetForce {
            budget_tokens: 2000,
        },
        StrategyConfig::Deer {
            confidence_threshold: 0.95,
        },
        StrategyConfig::ThinkRank5,
        StrategyConfig::Rcpd {
            rules: default_rcpd_rules(),
        },
    ];
    let mut stops = Vec::new();
    for c in &configs {
        let p = decide(c, t).map_err(|e| e.to_string())?;
        let o = rcp_core::run_strategy(c, t).map_err(|e| e.to_string())?;
        stops.push(Stop {
            strategy: c.to_string(),
            at: p.at.sentence(),
            rule: p.fired_rule,
            tokens: o.total_tokens,
            correct: o.correct,
        });
    }
    let at = |i: usize| t.outcomes.get(&TruncateAt::Sentence(i as u32));
    let view = TraceView {
        trace_id: t.trace_id.clone(),
        rcp_index: t.rcp_index,
        ranks: t
            .sentences
            .iter()
            .map(|s| s.eot_rank.to_capped(cap))
            .collect(),
        think_tokens: t.sentences.iter().map(|s| s.think_tokens_cum).collect(),
        content_tokens: (0..t.sentences.len())
            .map(|i| at(i).map(|o| o.content_tokens))
            .collect(),
        correct: (0..t.sentences.len())
            .map(|i| at(i).map(|o| o.correct))
            .collect(),
        stops,
    };
    Ok(serde_json::to_string(&view).expect("view serializes"))
}

#[derive(Serialize)]
struct Step {
    index: usize,
    rank: Option<u32>,
    fired: Option<String>,
}

/// Runs a rule set over a comma or space separated rank sequence.
/// `max` or `-` mean beyond the observed top-K. Empty rules = default rules.
pub fn check_ranks(ranks: &str, rules_json: &str) -> Result<String, String> {
    let rules = rules_or_default(rules_json)?;
    let mut window = RankWindow::EMPTY;
    let mut steps = Vec::new();
    for (index, tok) in ranks
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
    {
        let rank = match tok.to_ascii_lowercase().as_str() {
            "max" | "-" => Rank::BEYOND,
            s => {
                let v: u32 = s
                    .parse()
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| format!("not a rank: {tok:?}"))?;
                Rank::saturating(v, rcp_core::trace::DEFAULT_RANK_CAP)
            }
        };
        window = window.advance(rank);
        steps.push(Step {
            index,
            rank: (!rank.is_beyond()).then(|| rank.get()),
            fired: rules.evaluate(&window).fired_rule().map(String::from),
        });
    }
    Ok(serde_json::to_string(&steps).expect("steps serialize"))
}

/// Strategy comparison table over `n` synthetic traces.
pub fn compare(n: usize, seed: u64, rules_json: &str) -> Result<String, String> {
    if n == 0 || n > 2000 {
        return Err("n must be in 1..=2000".into());
    }
    let corpus = generate(&params(seed, n)).map_err(|e| e.to_string())?;
    let mut configs = rcp_core::eval::budget_sweep(&[1000, 2000, 3000]);
    configs.extend([
        StrategyConfig::NoThink,
        StrategyConfig::Deer {
            confidence_threshold: 0.95,
        },
        StrategyConfig::ThinkRank5,
        StrategyConfig::Rcpd {
            rules: rules_or_default(rules_json)?,
        },
    ]);
    let reports = evaluate_corpus(&corpus, &configs).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&reports).expect("reports serialize"))
}

#[wasm_bindgen(js_name = traceView)]
pub fn trace_view_js(seed: u32, index: u32) -> Result<String, JsError> {
    trace_view(seed as u64, index as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = checkRanks)]
pub fn check_ranks_js(ranks: &str, rules_json: &str) -> Result<String, JsError> {
    check_ranks(ranks, rules_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = compare)]
pub fn compare_js(n: u32, seed: u32, rules_json: &str) -> Result<String, JsError> {
    compare(n as usize, seed as u64, rules_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = defaultRules)]
pub fn default_rules_js() -> String {
    default_rcpd_rules().to_json()
}
