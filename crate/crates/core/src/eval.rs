//! Corpus replay: per-strategy Token / Acc / CR aggregates and stage profiles.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::{run_strategy, StrategyConfig, StrategyOutcome};
use crate::trace::{Corpus, TruncateAt};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyReport {
    pub strategy: String,
    pub avg_total_tokens: f64,
    pub accuracy_pct: f64,
    pub compression_rate_pct: f64,
    pub n_traces: usize,
    pub loop_rate_pct: f64,
}

/// Ratio of average tokens to the unmodified run's average, in percent.
pub fn compression_rate_pct(avg_tokens: f64, full_avg_tokens: f64) -> f64 {
    100.0 * avg_tokens / full_avg_tokens
}

#[derive(Default)]
struct Totals {
    tokens: u64,
    correct: usize,
    looped: usize,
    n: usize,
}

impl Totals {
    fn add(&mut self, o: &StrategyOutcome) {
        self.tokens += o.total_tokens;
        self.correct += o.correct as usize;
        self.looped += o.looped as usize;
        self.n += 1;
    }

    fn avg_tokens(&self) -> f64 {
        self.tokens as f64 / self.n as f64
    }

    fn report(&self, strategy: String, full_avg: f64) -> StrategyReport {
        let avg = self.avg_tokens();
        StrategyReport {
            strategy,
            avg_total_tokens: avg,
            accuracy_pct: 100.0 * self.correct as f64 / self.n as f64,
            compression_rate_pct: compression_rate_pct(avg, full_avg),
            n_traces: self.n,
            loop_rate_pct: 100.0 * self.looped as f64 / self.n as f64,
        }
    }
}

/// One budget-forcing config per budget, in the given order.
pub fn budget_sweep(budgets: &[u64]) -> Vec<StrategyConfig> {
    budgets
        .iter()
        .map(|&b| StrategyConfig::BudgetForce { budget_tokens: b })
        .collect()
}

/// Replays every config over every trace. A FULL row is always present
/// (prepended when not requested) because it anchors CR. Everything is
/// checked before any report is produced.
pub fn evaluate_corpus(corpus: &Corpus, configs: &[StrategyConfig]) -> Result<Vec<StrategyReport>> {
    corpus.validate()?;
    let mut configs = configs.to_vec();
    if !configs.contains(&StrategyConfig::Full) {
        configs.insert(0, StrategyConfig::Full);
    }
    for cfg in &configs {
        cfg.validate()?;
        for t in &corpus.traces {
            cfg.check_applicable(t)?;
        }
    }

    let mut totals: Vec<Totals> = configs.iter().map(|_| Totals::default()).collect();
    for t in &corpus.traces {
        for (cfg, tot) in configs.iter().zip(totals.iter_mut()) {
            tot.add(&run_strategy(cfg, t)?);
        }
    }

    let full_idx = configs
        .iter()
        .position(|c| *c == StrategyConfig::Full)
        .expect("full present");
    let full_avg = totals[full_idx].avg_tokens();
    Ok(configs
        .iter()
        .zip(&totals)
        .enumerate()
        .map(|(i, (cfg, tot))| {
            let mut r = tot.report(cfg.to_string(), full_avg);
            if i == full_idx {
                r.compression_rate_pct = 100.0;
            }
            r
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DepthAxis {
    /// Sentence index as recorded.
    Absolute,
    /// Sentence index minus the trace's annotated RCP.
    #[default]
    RelativeToRcp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub axis: DepthAxis,
    /// Inclusive depth range used for the think/content correlation.
    pub window: (i64, i64),
    /// Offsets past the RCP over which per-sentence accuracy gain is measured.
    pub post_rcp_span: u32,
    /// Minimum recorded truncation depths per trace.
    pub min_depths: usize,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            axis: DepthAxis::RelativeToRcp,
            window: (-20, 0),
            post_rcp_span: 20,
            min_depths: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthBucket {
    pub depth: i64,
    pub n: usize,
    pub mean_content_tokens: f64,
    pub accuracy_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageStats {
    pub axis: DepthAxis,
    pub buckets: Vec<DepthBucket>,
    pub window: (i64, i64),
    pub n_window_points: usize,
    /// Pearson r between depth and content tokens inside `window`.
    pub correlation: f64,
    /// Set when r is undefined (zero variance); `correlation` is then 0.
    pub degenerate: bool,
    /// Largest mean paired accuracy change from one sentence to the next past
    /// the RCP, in percentage points. `None` without RCP annotations.
    pub max_post_rcp_gain_pp: Option<f64>,
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x, sy + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Per-depth content and accuracy, the think/content correlation and the
/// post-RCP accuracy slope over a corpus with dense truncation outcomes.
pub fn stage_profile(corpus: &Corpus, config: &StageConfig) -> Result<StageStats> {
    let mut sums: BTreeMap<i64, (usize, u64, usize)> = BTreeMap::new();
    let mut window_points = Vec::new();
    let mut gains: BTreeMap<u32, (i64, usize)> = BTreeMap::new();
    let all_annotated = corpus.traces.iter().all(|t| t.rcp_index.is_some());

    for t in &corpus.traces {
        let depths = t.outcomes.keys().filter(|k| k.sentence().is_some()).count();
        if depths < config.min_depths {
            return Err(Error::InsufficientCoverage(format!(
                "trace {} has {depths} truncation depths, need {}",
                t.trace_id, config.min_depths
            )));
        }
        let origin = match config.axis {
            DepthAxis::Absolute => 0,
            DepthAxis::RelativeToRcp => t.rcp_index.ok_or_else(|| {
                Error::InsufficientCoverage(format!("trace {} has no rcp_index", t.trace_id))
            })? as i64,
        };
        for (at, o) in &t.outcomes {
            let Some(i) = at.sentence() else { continue };
            let depth = i as i64 - origin;
            let e = sums.entry(depth).or_default();
            e.0 += 1;
            e.1 += o.content_tokens;
            e.2 += o.correct as usize;
            if (config.window.0..=config.window.1).contains(&depth) {
                window_points.push((depth as f64, o.content_tokens as f64));
            }
        }
        if let Some(rcp) = t.rcp_index {
            for d in 0..config.post_rcp_span {
                let a = t.outcomes.get(&TruncateAt::Sentence(rcp + d));
                let b = t.outcomes.get(&TruncateAt::Sentence(rcp + d + 1));
                if let (Some(a), Some(b)) = (a, b) {
                    let g = gains.entry(d).or_default();
                    g.0 += b.correct as i64 - a.correct as i64;
                    g.1 += 1;
                }
            }
        }
    }

    let buckets = sums
        .into_iter()
        .map(|(depth, (n, content, correct))| DepthBucket {
            depth,
            n,
            mean_content_tokens: content as f64 / n as f64,
            accuracy_pct: 100.0 * correct as f64 / n as f64,
        })
        .collect();
    let r = pearson(&window_points);
    let max_gain = if all_annotated && !gains.is_empty() {
        gains
            .values()
            .map(|&(delta, n)| 100.0 * delta as f64 / n as f64)
            .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))))
    } else {
        None
    };
    Ok(StageStats {
        axis: config.axis,
        buckets,
        window: config.window,
        n_window_points: window_points.len(),
        correlation: r.unwrap_or(0.0),
        degenerate: r.is_none(),
        max_post_rcp_gain_pp: max_gain,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
}

const COLUMNS: [&str; 5] = ["strategy", "Token", "Acc", "CR", "loop%"];

fn row_cells(r: &StrategyReport) -> [String; 5] {
    [
        r.strategy.clone(),
        format!("{:.0}", r.avg_total_tokens),
        format!("{:.2}", r.accuracy_pct),
        format!("{:.1}", r.compression_rate_pct),
        format!("{:.2}", r.loop_rate_pct),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(reports: &[StrategyReport], format: ReportFormat) -> String {
    let rows: Vec<[String; 5]> = reports.iter().map(row_cells).collect();
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&COLUMNS.join(","));
            out.push('\n');
            for row in &rows {
                let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        ReportFormat::Table => {
            let mut widths = COLUMNS.map(str::len);
            for row in &rows {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: [&str; 5], out: &mut String| {
                let _ = write!(out, "{:<w$}", cells[0], w = widths[0]);
                for (c, w) in cells[1..].iter().zip(&widths[1..]) {
                    let _ = write!(out, "  {c:>w$}");
                }
                out.push('\n');
            };
            line(COLUMNS, &mut out);
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
            for row in &rows {
                line(
                    [&row[0], &row[1], &row[2], &row[3], &row[4]].map(String::as_str),
                    &mut out,
                );
            }
        }
    }
    out
}
