//! Seeded generator of synthetic reasoning traces with three stages.
//!
//! Each trace has a stage boundary `B` and a completion point `S*`:
//!
//! - before `B` (insufficient exploration) cut-off runs give short content and
//!   low accuracy;
//! - between `B` and `S*` (compensatory reasoning) content shrinks by
//!   `compensation_slope` tokens per sentence while accuracy ramps to the
//!   plateau;
//! - from `S*` on (convergence) content and correctness are flat.
//!
//! The end-of-thinking rank sits far down the distribution until an approach
//! window before `S*`, decays geometrically to the top 5 at `S*`, then bounces
//! back up during reflection with short re-dips at the end of each reflection
//! cycle. The unmodified run may loop until `token_cap`.
//!
//! Trace `i` draws from its own ChaCha stream `i` under the corpus seed, so
//! every trace is reproducible on its own.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::RankWindow;
use crate::segmenter::TokenEvent;
use crate::trace::{
    Corpus, Rank, ReasoningTrace, SentenceRecord, TruncateAt, TruncationOutcome, DEFAULT_RANK_CAP,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub n_traces: usize,
    pub seed: u64,
    pub rank_cap: u32,
    /// Mean length of the insufficient-exploration stage, in sentences.
    pub stage1_len: f64,
    /// Inclusive range for the completion point `S*`.
    pub rcp_index_range: (u32, u32),
    /// Inclusive token-count range of one pre-RCP sentence.
    pub sentence_tokens: (u32, u32),
    /// Log-uniform range of ranks far from any conclusion.
    pub rank_far: (f64, f64),
    /// Inclusive range for the approach window length.
    pub approach_window: (u32, u32),
    /// Post-RCP reflection length as a multiple of `S*` (non-looping runs).
    pub reflection_len: (f64, f64),
    /// Inclusive token-count range of one reflection sentence.
    pub reflection_tokens_per_sentence: (u32, u32),
    /// Log-uniform range of ranks during reflection.
    pub rank_reflection: (f64, f64),
    /// Inclusive range of reflection-cycle lengths; each cycle ends in a re-dip.
    pub reflection_cycle: (u32, u32),
    /// Inclusive range of approach lengths before a re-dip.
    pub redip_approach: (u32, u32),
    pub p_correct_stage1: f64,
    pub p_correct_plateau: f64,
    /// Extra content tokens per sentence short of `S*`.
    pub compensation_slope: f64,
    /// Content tokens once reasoning has converged.
    pub content_base: f64,
    /// Content tokens when cut during insufficient exploration.
    pub content_stage1: f64,
    /// Standard deviation of content-token noise.
    pub content_noise: f64,
    /// Probability that the unmodified run loops to `token_cap`.
    pub p_loop: f64,
    pub token_cap: u64,
    /// Probability that a non-cycle-start sentence opens with a trigger word.
    pub p_trigger: f64,
    /// Record outcomes every `outcome_stride` sentences (plus `S*` and its neighbours).
    pub outcome_stride: u32,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_traces: 500,
            seed: 42,
            rank_cap: DEFAULT_RANK_CAP,
            stage1_len: 8.0,
            rcp_index_range: (32, 120),
            sentence_tokens: (15, 45),
            rank_far: (200.0, 5000.0),
            approach_window: (4, 7),
            reflection_len: (0.3, 1.0),
            reflection_tokens_per_sentence: (15, 45),
            rank_reflection: (50.0, 2000.0),
            reflection_cycle: (8, 20),
            redip_approach: (0, 5),
            p_correct_stage1: 0.1,
            p_correct_plateau: 0.8,
            compensation_slope: 12.0,
            content_base: 400.0,
            content_stage1: 250.0,
            content_noise: 40.0,
            p_loop: 0.04,
            token_cap: 16_384,
            p_trigger: 0.15,
            outcome_stride: 1,
        }
    }
}

impl SynthParams {
    /// Named parameter sets: `default` (also accepted as `paper-like`), `no-loops`, `flat`.
    pub fn preset(name: &str) -> Result<SynthParams> {
        let base = SynthParams::default();
        match name {
            "default" | "paper-like" => Ok(base),
            "no-loops" => Ok(SynthParams {
                p_loop: 0.0,
                ..base
            }),
            "flat" => Ok(SynthParams {
                p_loop: 0.0,
                compensation_slope: 0.0,
                content_stage1: base.content_base,
                ..base
            }),
            other => Err(Error::Params(format!(
                "unknown preset {other:?} (expected default, no-loops, flat)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Params(msg));
        for (name, p) in [
            ("p_correct_stage1", self.p_correct_stage1),
            ("p_correct_plateau", self.p_correct_plateau),
            ("p_loop", self.p_loop),
            ("p_trigger", self.p_trigger),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0,1]"));
            }
        }
        if self.p_correct_stage1 > self.p_correct_plateau {
            return bad("p_correct_stage1 exceeds p_correct_plateau".into());
        }
        let ranges_u = [
            ("rcp_index_range", self.rcp_index_range),
            ("sentence_tokens", self.sentence_tokens),
            ("approach_window", self.approach_window),
            (
                "reflection_tokens_per_sentence",
                self.reflection_tokens_per_sentence,
            ),
            ("reflection_cycle", self.reflection_cycle),
            ("redip_approach", self.redip_approach),
        ];
        for (name, (lo, hi)) in ranges_u {
            if lo > hi {
                return bad(format!("{name} range ({lo}, {hi}) is empty"));
            }
        }
        let ranges_f = [
            ("rank_far", self.rank_far),
            ("rank_reflection", self.rank_reflection),
            ("reflection_len", self.reflection_len),
        ];
        for (name, (lo, hi)) in ranges_f {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo <= 0.0 {
                return bad(format!(
                    "{name} range ({lo}, {hi}) is empty or non-positive"
                ));
            }
        }
        if self.sentence_tokens.0 == 0 || self.reflection_tokens_per_sentence.0 == 0 {
            return bad("sentences need at least one token".into());
        }
        if self.reflection_cycle.0 == 0 {
            return bad("reflection_cycle must be >= 1".into());
        }
        if self.approach_window.0 == 0 {
            return bad("approach_window must be >= 1".into());
        }
        if self.rank_far.0 <= 5.0 || self.rank_reflection.0 <= 5.0 {
            return bad("far and reflection ranks must stay outside the top 5".into());
        }
        if self.rcp_index_range.0 < self.approach_window.1 + 1 {
            return bad("rcp_index_range must start after the longest approach window".into());
        }
        if self.compensation_slope < 0.0 || self.content_noise < 0.0 {
            return bad("compensation_slope and content_noise must be >= 0".into());
        }
        if self.content_base < 1.0 || self.content_stage1 < 1.0 {
            return bad("content sizes must be >= 1".into());
        }
        if self.stage1_len < 1.0 || !self.stage1_len.is_finite() {
            return bad("stage1_len must be >= 1".into());
        }
        if self.rank_cap < 7 {
            return bad("rank_cap must exceed 6".into());
        }
        if self.outcome_stride == 0 {
            return bad("outcome_stride must be >= 1".into());
        }
        let longest = self.rcp_index_range.1 as u64 * self.sentence_tokens.1 as u64;
        if self.token_cap <= longest {
            return bad(format!(
                "token_cap {} not above longest pre-RCP think {longest}",
                self.token_cap
            ));
        }
        Ok(())
    }
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn geometric(from: f64, to: f64, step: u32, len: u32) -> f64 {
    from * (to / from).powf(step as f64 / len as f64)
}

/// Structural facts about one generated trace, kept in `meta`.
struct Layout {
    stage_boundary: u32,
    rcp: u32,
    looped: bool,
}

struct TraceGen<'p> {
    p: &'p SynthParams,
    rng: ChaCha8Rng,
}

impl TraceGen<'_> {
    fn tokens(&mut self, (lo, hi): (u32, u32)) -> u64 {
        self.rng.random_range(lo..=hi) as u64
    }

    fn noise(&mut self) -> f64 {
        if self.p.content_noise == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, self.p.content_noise)
            .expect("finite sd")
            .sample(&mut self.rng)
    }

    fn trace(mut self, ordinal: usize) -> ReasoningTrace {
        let p = self.p;
        let cap = p.rank_cap;
        let rcp = self
            .rng
            .random_range(p.rcp_index_range.0..=p.rcp_index_range.1);
        let b_raw = (p.stage1_len * self.rng.random_range(0.5..1.5)).round() as u32;
        let stage_boundary = b_raw.clamp(1, rcp - 1);
        let window = self
            .rng
            .random_range(p.approach_window.0..=p.approach_window.1);
        let looped = self.rng.random_bool(p.p_loop);
        let latent: f64 = self.rng.random();

        let mut ranks: Vec<f64> = Vec::new();
        let mut lens: Vec<u64> = Vec::new();
        let mut trigger: Vec<bool> = Vec::new();
        let mut confidence: Vec<f64> = Vec::new();

        // Exploration and compensation up to the start of the approach.
        let approach_start = rcp - window;
        for _ in 0..approach_start {
            ranks.push(log_uniform(&mut self.rng, p.rank_far));
            lens.push(self.tokens(p.sentence_tokens));
        }
        let r_start = log_uniform(&mut self.rng, p.rank_far);
        let r_end = self.rng.random_range(1..=5) as f64;
        for k in 0..window {
            ranks.push(geometric(r_start, r_end, k, window).max(6.0));
            lens.push(self.tokens(p.sentence_tokens));
        }
        ranks.push(r_end);
        lens.push(self.tokens(p.sentence_tokens));
        for t in 0..=rcp {
            let start_of_stage2 = t == stage_boundary;
            trigger.push(start_of_stage2 || self.rng.random_bool(p.p_trigger));
            let c = if t < stage_boundary {
                self.rng.random_range(0.0..0.4)
            } else {
                let frac = (t - stage_boundary) as f64 / (rcp - stage_boundary) as f64;
                (0.4 + 0.5 * frac + self.rng.random_range(-0.05..0.05)).clamp(0.0, 1.0)
            };
            confidence.push(c);
        }

        // Reflection: cycles that bounce back up and re-dip at their end.
        let think_before = lens.iter().sum::<u64>();
        let target_reflection = if looped {
            None
        } else {
            let mult = self
                .rng
                .random_range(p.reflection_len.0..=p.reflection_len.1);
            Some(((rcp as f64 * mult).round() as usize).max(1))
        };
        let mut think = think_before;
        let mut reflected = 0usize;
        'cycles: loop {
            let cycle = self
                .rng
                .random_range(p.reflection_cycle.0..=p.reflection_cycle.1);
            let approach = self
                .rng
                .random_range(p.redip_approach.0..=p.redip_approach.1)
                .min(cycle - 1);
            let plateau = cycle - approach - 1;
            let r_from = log_uniform(&mut self.rng, p.rank_reflection);
            let r_dip = self.rng.random_range(1..=5) as f64;
            for k in 0..cycle {
                let rank = if k < plateau {
                    log_uniform(&mut self.rng, p.rank_reflection)
                } else if k + 1 < cycle {
                    geometric(r_from, r_dip, k - plateau, approach + 1).max(6.0)
                } else {
                    r_dip
                };
                let len = self.tokens(p.reflection_tokens_per_sentence);
                let done = match target_reflection {
                    Some(n) => reflected >= n,
                    None => think + len > p.token_cap,
                };
                if done {
                    break 'cycles;
                }
                think += len;
                reflected += 1;
                ranks.push(rank);
                lens.push(len);
                trigger.push(k == 0 || self.rng.random_bool(p.p_trigger));
                confidence.push(self.rng.random_range(0.9..=1.0));
            }
        }

        let mut cum = 0u64;
        let sentences: Vec<SentenceRecord> = ranks
            .iter()
            .zip(&lens)
            .enumerate()
            .map(|(i, (&r, &len))| {
                cum += len;
                SentenceRecord {
                    index: i as u32,
                    think_tokens_cum: cum,
                    eot_rank: Rank::saturating(r.round() as u32, cap),
                    trigger_word: trigger[i],
                    boxed_confidence: Some(confidence[i]),
                    text_digest: None,
                }
            })
            .collect();
        let full_think_tokens = cum;

        let layout = Layout {
            stage_boundary,
            rcp,
            looped,
        };
        let outcomes = self.outcomes(&layout, &sentences, latent);

        let mut meta = BTreeMap::new();
        meta.insert("generator".to_string(), "synth".to_string());
        meta.insert("stage_boundary".to_string(), stage_boundary.to_string());
        meta.insert("approach_window".to_string(), window.to_string());
        ReasoningTrace {
            trace_id: format!("synth-{:05}", ordinal),
            rcp_index: Some(rcp),
            sentences,
            outcomes,
            full_think_tokens,
            meta,
        }
    }

    fn p_correct(&self, l: &Layout, t: u32) -> f64 {
        let p = self.p;
        if t < l.stage_boundary {
            p.p_correct_stage1
        } else if t >= l.rcp {
            p.p_correct_plateau
        } else {
            let frac = (t - l.stage_boundary) as f64 / (l.rcp - l.stage_boundary) as f64;
            p.p_correct_stage1 + frac * (p.p_correct_plateau - p.p_correct_stage1)
        }
    }

    fn outcomes(
        &mut self,
        l: &Layout,
        sentences: &[SentenceRecord],
        latent: f64,
    ) -> BTreeMap<TruncateAt, TruncationOutcome> {
        let p = self.p;
        let full_think = sentences.last().map_or(0, |s| s.think_tokens_cum);
        let full_content = if l.looped {
            0
        } else {
            (p.content_base + self.noise()).round().max(1.0) as u64
        };
        let full_cost = full_think + full_content;

        let mut out = BTreeMap::new();
        let n = sentences.len() as u32;
        for t in 0..n {
            let near_rcp = t + 1 >= l.rcp && t <= l.rcp + 1;
            if t % p.outcome_stride != 0 && !near_rcp {
                continue;
            }
            let expected = if t < l.stage_boundary {
                p.content_stage1
            } else if t <= l.rcp {
                p.content_base + p.compensation_slope * (l.rcp - t) as f64
            } else {
                p.content_base
            };
            let think = if t == 0 {
                0
            } else {
                sentences[t as usize].think_tokens_cum
            };
            let mut content = (expected + self.noise()).round().max(1.0) as u64;
            // Cutting early never costs more than letting the run finish.
            if think + content > full_cost && think < full_cost {
                content = full_cost - think;
            }
            out.insert(
                TruncateAt::Sentence(t),
                TruncationOutcome {
                    content_tokens: content,
                    correct: latent < self.p_correct(l, t),
                    looped: false,
                },
            );
        }
        out.insert(
            TruncateAt::Full,
            TruncationOutcome {
                content_tokens: full_content,
                correct: !l.looped && latent < p.p_correct_plateau,
                looped: l.looped,
            },
        );
        out
    }
}

/// Generates a corpus. Deterministic in `params`.
pub fn generate(params: &SynthParams) -> Result<Corpus> {
    params.validate()?;
    if params.n_traces == 0 {
        return Err(Error::Params("n_traces must be >= 1".into()));
    }
    let traces = (0..params.n_traces)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            TraceGen { p: params, rng }.trace(i)
        })
        .collect();
    let corpus = Corpus {
        name: format!("synth-seed{}", params.seed),
        schema_version: crate::trace::SCHEMA_VERSION,
        rank_cap: params.rank_cap,
        traces,
    };
    corpus.validate()?;
    Ok(corpus)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledWindow {
    pub trace_ordinal: usize,
    pub sentence_index: u32,
    pub rcp_index: u32,
    pub window: RankWindow,
    pub is_rcp: bool,
}

/// One labeled window per sentence boundary; positive exactly at the RCP.
pub fn label_windows(corpus: &Corpus) -> Result<Vec<LabeledWindow>> {
    let mut out = Vec::new();
    for (ordinal, t) in corpus.traces.iter().enumerate() {
        let rcp = t
            .rcp_index
            .ok_or_else(|| Error::validation(&t.trace_id, "rcp_index", "required for labeling"))?;
        let mut window = RankWindow::EMPTY;
        for s in &t.sentences {
            window = window.advance(s.eot_rank);
            out.push(LabeledWindow {
                trace_ordinal: ordinal,
                sentence_index: s.index,
                rcp_index: rcp,
                window,
                is_rcp: s.index == rcp,
            });
        }
    }
    Ok(out)
}

const FILLER: [&str; 6] = [" so", " we", " check", " the", " next", " case"];

/// Renders a trace as a token stream whose sentence boundaries fall exactly
/// on the trace's sentences. Interior tokens carry `Rank::BEYOND`; the
/// sentence-final token carries the sentence's rank.
pub fn render_tokens(trace: &ReasoningTrace) -> Vec<TokenEvent> {
    let mut out = Vec::new();
    let mut step = 0u64;
    for s in &trace.sentences {
        let opener = if s.trigger_word { "Wait" } else { "Then" };
        let words = 1 + (s.index as usize % 4);
        out.push(TokenEvent {
            step,
            text: if s.index == 0 {
                opener.to_string()
            } else {
                format!(" {opener}")
            },
            eot_rank: Rank::BEYOND,
        });
        step += 1;
        for w in 0..words {
            out.push(TokenEvent {
                step,
                text: FILLER[(s.index as usize + w) % FILLER.len()].to_string(),
                eot_rank: Rank::BEYOND,
            });
            step += 1;
        }
        out.push(TokenEvent {
            step,
            text: ".".to_string(),
            eot_rank: s.eot_rank,
        });
        step += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, seed: u64) -> SynthParams {
        SynthParams {
            n_traces: n,
            seed,
            ..SynthParams::default()
        }
    }

    #[test]
    fn deterministic_bytes() {
        let a = generate(&small(20, 42)).unwrap().to_jsonl().unwrap();
        let b = generate(&small(20, 42)).unwrap().to_jsonl().unwrap();
        assert_eq!(a, b);
        let c = generate(&small(20, 43)).unwrap().to_jsonl().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn traces_are_independent_substreams() {
        let big = generate(&small(30, 9)).unwrap();
        let little = generate(&small(5, 9)).unwrap();
        assert_eq!(&big.traces[..5], &little.traces[..]);
    }

    #[test]
    fn rank_trajectory_invariant() {
        let c = generate(&small(100, 1)).unwrap();
        for t in &c.traces {
            let rcp = t.rcp_index.unwrap() as usize;
            let w: usize = t.meta["approach_window"].parse().unwrap();
            let at_rcp = t.sentences[rcp].eot_rank;
            assert!(at_rcp.within(5), "{}", t.trace_id);
            for s in &t.sentences[..rcp] {
                assert!(s.eot_rank > at_rcp, "{} sentence {}", t.trace_id, s.index);
            }
            // Strictly above the RCP rank throughout the approach window.
            for s in &t.sentences[rcp - w..rcp] {
                assert!(!s.eot_rank.within(5));
            }
        }
    }

    #[test]
    fn flat_parameters_give_constant_content() {
        let p = SynthParams {
            content_noise: 0.0,
            ..SynthParams::preset("flat").unwrap()
        };
        let c = generate(&SynthParams { n_traces: 10, ..p }).unwrap();
        for t in &c.traces {
            let b: u32 = t.meta["stage_boundary"].parse().unwrap();
            let contents: Vec<u64> = t
                .outcomes
                .iter()
                .filter(|(k, _)| k.sentence().is_some_and(|i| i >= b))
                .map(|(_, o)| o.content_tokens)
                .collect();
            assert!(contents.iter().all(|&x| x == contents[0]), "{}", t.trace_id);
            assert!(!t.outcomes[&TruncateAt::Full].looped);
        }
    }

    #[test]
    fn compensation_strictly_decreasing_without_noise() {
        let p = SynthParams {
            content_noise: 0.0,
            n_traces: 20,
            ..SynthParams::default()
        };
        let c = generate(&p).unwrap();
        for t in &c.traces {
            let b: u32 = t.meta["stage_boundary"].parse().unwrap();
            let rcp = t.rcp_index.unwrap();
            let content = |i: u32| t.outcomes[&TruncateAt::Sentence(i)].content_tokens;
            for i in b..rcp {
                assert!(content(i) > content(i + 1), "{} at {i}", t.trace_id);
            }
        }
    }

    #[test]
    fn truncation_never_costs_more_than_full() {
        let c = generate(&small(100, 5)).unwrap();
        for t in &c.traces {
            let full = t.cost_at(TruncateAt::Full).unwrap();
            let looped = t.outcomes[&TruncateAt::Full].looped;
            for k in t.outcomes.keys() {
                // A looped run's last sentences already think as long as the run itself.
                if *k != TruncateAt::Full && (!looped || k.sentence() <= t.rcp_index) {
                    assert!(t.cost_at(*k).unwrap() <= full, "{} at {k}", t.trace_id);
                }
            }
        }
    }

    #[test]
    fn correctness_is_monotone_per_trace() {
        let c = generate(&small(100, 3)).unwrap();
        for t in &c.traces {
            let mut prev = false;
            for (k, o) in &t.outcomes {
                if k.sentence().is_some() {
                    assert!(o.correct || !prev, "{} regressed at {k}", t.trace_id);
                    prev = o.correct;
                }
            }
        }
    }

    #[test]
    fn looped_runs_reach_token_cap() {
        let p = SynthParams {
            p_loop: 1.0,
            n_traces: 5,
            ..SynthParams::default()
        };
        let c = generate(&p).unwrap();
        for t in &c.traces {
            let full = t.outcomes[&TruncateAt::Full];
            assert!(full.looped && !full.correct);
            assert!(t.full_think_tokens <= p.token_cap);
            assert!(t.full_think_tokens + p.reflection_tokens_per_sentence.1 as u64 > p.token_cap);
        }
    }

    #[test]
    fn label_windows_one_positive_per_trace() {
        let c = generate(&small(25, 8)).unwrap();
        let w = label_windows(&c).unwrap();
        let total: usize = c.traces.iter().map(|t| t.sentences.len()).sum();
        assert_eq!(w.len(), total);
        assert_eq!(w.iter().filter(|x| x.is_rcp).count(), 25);
        let first = &w[0];
        assert_eq!(first.sentence_index, 0);
        assert_eq!(first.window.history, [Rank::BEYOND; 5]);
    }

    #[test]
    fn label_windows_requires_rcp() {
        let mut c = generate(&small(2, 8)).unwrap();
        c.traces[1].rcp_index = None;
        assert!(label_windows(&c).is_err());
    }

    #[test]
    fn parameter_errors() {
        let bad = |p: SynthParams| generate(&p).is_err();
        assert!(bad(SynthParams {
            p_loop: 1.5,
            ..small(1, 0)
        }));
        assert!(bad(SynthParams {
            rcp_index_range: (50, 40),
            ..small(1, 0)
        }));
        assert!(bad(SynthParams {
            rank_far: (3.0, 100.0),
            ..small(1, 0)
        }));
        assert!(bad(SynthParams {
            p_correct_stage1: 0.9,
            p_correct_plateau: 0.5,
            ..small(1, 0)
        }));
        assert!(bad(small(0, 0)));
        assert!(SynthParams::preset("nope").is_err());
    }

    #[test]
    fn rendered_tokens_segment_back_to_sentences() {
        use crate::segmenter::{segment_all, SegmenterConfig};
        let c = generate(&small(3, 4)).unwrap();
        for t in &c.traces {
            let toks = render_tokens(t);
            let b = segment_all(
                &SegmenterConfig::default(),
                toks.iter().map(|e| (e.text.as_str(), e.eot_rank)),
            );
            assert_eq!(b.len(), t.sentences.len());
            for (ev, s) in b.iter().zip(&t.sentences) {
                assert_eq!(ev.eot_rank_at_boundary, s.eot_rank);
            }
        }
    }
}
