//! Gradient-boosted decision trees over rank windows, gain importance, and
//! distillation of the ensemble into stepwise threshold rules.
//!
//! Trees are fit by least squares to the negative logistic-loss gradient
//! with Newton leaf values. Split search is exact: every boundary between
//! consecutive distinct feature values is a candidate. Rows are put into a
//! canonical order before training, so the model does not depend on the
//! order the windows arrive in.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{RankWindow, RuleSet, StepRule, HISTORY_LEN};
use crate::synth::LabeledWindow;
use crate::trace::DEFAULT_RANK_CAP;

/// Current rank plus five history ranks.
pub const N_FEATURES: usize = HISTORY_LEN + 1;

const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinerParams {
    pub depth: usize,
    pub n_trees: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Report split thresholds at log2 midpoints instead of linear ones.
    pub log_transform: bool,
    /// Weight of a positive row; `None` means negatives / positives.
    pub positive_weight: Option<f64>,
    /// Row fraction sampled per tree (1.0 = all rows, no randomness).
    pub subsample: f64,
    pub rank_cap: u32,
    /// Upper limit on rules kept in `MinedModel::distilled_rules`.
    pub max_rules: usize,
}

impl Default for MinerParams {
    fn default() -> Self {
        MinerParams {
            depth: 3,
            n_trees: 50,
            learning_rate: 0.1,
            seed: 7,
            log_transform: true,
            positive_weight: None,
            subsample: 1.0,
            rank_cap: DEFAULT_RANK_CAP,
            max_rules: 4,
        }
    }
}

/// Ranks `r0..r5` as features; `r0` is the current sentence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector {
    pub ranks: [f64; N_FEATURES],
    pub label: bool,
}

impl FeatureVector {
    pub fn from_window(window: &RankWindow, label: bool, cap: u32) -> Self {
        let mut ranks = [0.0; N_FEATURES];
        for (k, slot) in ranks.iter_mut().enumerate() {
            *slot = window.at(k).to_capped(cap) as f64;
        }
        FeatureVector { ranks, label }
    }
}

pub fn features(windows: &[LabeledWindow], cap: u32) -> Vec<FeatureVector> {
    windows
        .iter()
        .map(|w| FeatureVector::from_window(&w.window, w.is_rcp, cap))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        /// Rows with `value <= threshold` go left.
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        /// Training rows reaching the leaf, by label.
        n_pos: u64,
        n_neg: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { value, .. } => return *value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinedModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Share of total split gain per feature, summing to 100.
    pub importance: [f64; N_FEATURES],
    pub rank_cap: u32,
    pub distilled_rules: RuleSet,
}

impl MinedModel {
    pub fn margin(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn predict(&self, x: &[f64; N_FEATURES]) -> bool {
        self.margin(x) > 0.0
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn cmp_rows(a: &FeatureVector, b: &FeatureVector) -> Ordering {
    a.ranks
        .iter()
        .zip(&b.ranks)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.label.cmp(&b.label))
}

/// Per-feature sorted distinct values and each row's bin.
struct Binned {
    values: Vec<Vec<f64>>,
    bins: Vec<Vec<u32>>,
}

impl Binned {
    fn new(rows: &[FeatureVector]) -> Self {
        let mut values = Vec::with_capacity(N_FEATURES);
        let mut bins = Vec::with_capacity(N_FEATURES);
        for f in 0..N_FEATURES {
            let mut v: Vec<f64> = rows.iter().map(|r| r.ranks[f]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            let b = rows
                .iter()
                .map(|r| {
                    v.binary_search_by(|x| x.total_cmp(&r.ranks[f]))
                        .expect("value present") as u32
                })
                .collect();
            values.push(v);
            bins.push(b);
        }
        Binned { values, bins }
    }
}

struct Grower<'a> {
    binned: &'a Binned,
    residual: &'a [f64],
    hessian: &'a [f64],
    weight: &'a [f64],
    labels: &'a [bool],
    max_depth: usize,
    log_transform: bool,
    gain_by_feature: [f64; N_FEATURES],
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    bin: usize,
    gain: f64,
}

impl Grower<'_> {
    fn leaf(&self, rows: &[usize]) -> Node {
        let (mut swr, mut swh, mut n_pos) = (0.0, 0.0, 0u64);
        for &i in rows {
            let w = self.weight[i];
            swr += w * self.residual[i];
            swh += w * self.hessian[i];
            n_pos += self.labels[i] as u64;
        }
        Node::Leaf {
            value: swr / swh.max(1e-12),
            n_pos,
            n_neg: rows.len() as u64 - n_pos,
        }
    }

    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let (mut tot_r, mut tot_w) = (0.0, 0.0);
        for &i in rows {
            tot_r += self.weight[i] * self.residual[i];
            tot_w += self.weight[i];
        }
        let parent = tot_r * tot_r / tot_w;
        let mut best: Option<BestSplit> = None;
        for f in 0..N_FEATURES {
            let n_bins = self.binned.values[f].len();
            if n_bins < 2 {
                continue;
            }
            let mut hist_r = vec![0.0; n_bins];
            let mut hist_w = vec![0.0; n_bins];
            for &i in rows {
                let b = self.binned.bins[f][i] as usize;
                hist_r[b] += self.weight[i] * self.residual[i];
                hist_w[b] += self.weight[i];
            }
            let (mut lr, mut lw) = (0.0, 0.0);
            for b in 0..n_bins - 1 {
                lr += hist_r[b];
                lw += hist_w[b];
                if hist_w[b] == 0.0 && b > 0 {
                    // Same partition as the previous boundary; keep the lowest threshold.
                    continue;
                }
                let rw = tot_w - lw;
                if lw <= 0.0 || rw <= 1e-12 {
                    continue;
                }
                let rr = tot_r - lr;
                let gain = lr * lr / lw + rr * rr / rw - parent;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|s| gain > s.gain) {
                    best = Some(BestSplit {
                        feature: f,
                        bin: b,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn threshold(&self, feature: usize, rows: &[usize], bin: usize) -> f64 {
        // Midpoint between the split value and the next value present in this node.
        let lo = self.binned.values[feature][bin];
        let next = rows
            .iter()
            .map(|&i| self.binned.bins[feature][i] as usize)
            .filter(|&b| b > bin)
            .min()
            .expect("non-empty right side");
        let hi = self.binned.values[feature][next];
        if self.log_transform && lo > 0.0 {
            ((lo.log2() + hi.log2()) / 2.0).exp2()
        } else {
            (lo + hi) / 2.0
        }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        if depth >= self.max_depth {
            self.nodes.push(self.leaf(&rows));
            return id;
        }
        let Some(split) = self.best_split(&rows) else {
            self.nodes.push(self.leaf(&rows));
            return id;
        };
        let threshold = self.threshold(split.feature, &rows, split.bin);
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.binned.bins[split.feature][i] as usize <= split.bin);
        self.gain_by_feature[split.feature] += split.gain;
        // Placeholder, patched once children exist.
        self.nodes.push(Node::Leaf {
            value: 0.0,
            n_pos: 0,
            n_neg: 0,
        });
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold,
            gain: split.gain,
            left,
            right,
        };
        id
    }
}

/// Trains the ensemble and selects up to `max_rules` rules from its paths.
pub fn train(rows: &[FeatureVector], params: &MinerParams) -> Result<MinedModel> {
    if params.n_trees == 0 {
        return Err(Error::Params("n_trees must be >= 1".into()));
    }
    if !(1..=6).contains(&params.depth) {
        return Err(Error::Params(format!(
            "depth {} not in [1, 6]",
            params.depth
        )));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::Params("learning_rate must be positive".into()));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::Params("subsample must be in (0, 1]".into()));
    }
    if rows.iter().any(|r| r.ranks.iter().any(|v| !v.is_finite())) {
        return Err(Error::Training("non-finite feature value".into()));
    }
    let n_pos = rows.iter().filter(|r| r.label).count();
    let n_neg = rows.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Training(
            "need both positive and negative windows".into(),
        ));
    }

    let mut rows = rows.to_vec();
    rows.sort_by(cmp_rows);
    let binned = Binned::new(&rows);
    let labels: Vec<bool> = rows.iter().map(|r| r.label).collect();
    let pos_w = params
        .positive_weight
        .unwrap_or(n_neg as f64 / n_pos as f64);
    if !(pos_w > 0.0 && pos_w.is_finite()) {
        return Err(Error::Params("positive_weight must be positive".into()));
    }
    let weight: Vec<f64> = labels
        .iter()
        .map(|&y| if y { pos_w } else { 1.0 })
        .collect();
    let base_score = (pos_w * n_pos as f64 / n_neg as f64).ln();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut margin = vec![base_score; rows.len()];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut gain_by_feature = [0.0; N_FEATURES];
    let all: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..params.n_trees {
        let mut residual = Vec::with_capacity(rows.len());
        let mut hessian = Vec::with_capacity(rows.len());
        for (m, &y) in margin.iter().zip(&labels) {
            let p = sigmoid(*m);
            residual.push(y as u8 as f64 - p);
            hessian.push(p * (1.0 - p));
        }
        let sample = if params.subsample < 1.0 {
            let mut s: Vec<usize> = all
                .iter()
                .copied()
                .filter(|_| rng.random_bool(params.subsample))
                .collect();
            if s.is_empty() {
                s = all.clone();
            }
            s
        } else {
            all.clone()
        };
        let mut grower = Grower {
            binned: &binned,
            residual: &residual,
            hessian: &hessian,
            weight: &weight,
            labels: &labels,
            max_depth: params.depth,
            log_transform: params.log_transform,
            gain_by_feature: [0.0; N_FEATURES],
            nodes: Vec::new(),
        };
        grower.grow(sample, 0);
        for (g, add) in gain_by_feature.iter_mut().zip(grower.gain_by_feature) {
            *g += add;
        }
        let tree = Tree {
            nodes: grower.nodes,
        };
        for (m, r) in margin.iter_mut().zip(&rows) {
            *m += params.learning_rate * tree.predict(&r.ranks);
        }
        trees.push(tree);
    }

    let total: f64 = gain_by_feature.iter().sum();
    if total <= 0.0 {
        return Err(Error::Training("no informative split found".into()));
    }
    let importance = gain_by_feature.map(|g| 100.0 * g / total);
    let mut model = MinedModel {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        importance,
        rank_cap: params.rank_cap,
        distilled_rules: RuleSet::default(),
    };
    model.distilled_rules = select_rules(&model, &rows, params.max_rules).rules;
    Ok(model)
}

/// Result of rule distillation; `warning` is set when nothing could be extracted.
#[derive(Clone, Debug, PartialEq)]
pub struct Distilled {
    pub rules: RuleSet,
    pub warning: Option<String>,
}

struct Candidate {
    rule: StepRule,
    score: f64,
}

fn collect_paths(tree: &Tree, cap: u32, out: &mut Vec<Candidate>) {
    fn walk(
        nodes: &[Node],
        i: usize,
        upper: &mut [Option<f64>; N_FEATURES],
        lower: bool,
        score: f64,
        cap: u32,
        out: &mut Vec<Candidate>,
    ) {
        match &nodes[i] {
            Node::Split {
                feature,
                threshold,
                gain,
                left,
                right,
            } => {
                let saved = upper[*feature];
                upper[*feature] = Some(saved.map_or(*threshold, |u| u.min(*threshold)));
                walk(nodes, *left, upper, lower, score + gain, cap, out);
                upper[*feature] = saved;
                walk(nodes, *right, upper, true, score + gain, cap, out);
            }
            Node::Leaf {
                value,
                n_pos,
                n_neg,
            } => {
                // Only downward-closed regions where positives outnumber negatives become rules.
                if lower || *value <= 0.0 || n_pos <= n_neg {
                    return;
                }
                let bound = |u: f64| (u.floor() as u32).clamp(1, cap - 1);
                let current = upper[0].map_or(cap - 1, bound);
                let history: Vec<(u8, u32)> = (1..N_FEATURES)
                    .filter_map(|f| upper[f].map(|u| (f as u8, bound(u))))
                    .collect();
                out.push(Candidate {
                    rule: StepRule::new("", current, &history),
                    score,
                });
            }
        }
    }
    walk(
        &tree.nodes,
        0,
        &mut [None; N_FEATURES],
        false,
        0.0,
        cap,
        out,
    );
}

/// Converts the highest-gain positive root-to-leaf paths into threshold
/// rules, drops rules dominated by another candidate, keeps at most
/// `max_rules`. Rule ids are `M1`, `M2`, ... by descending path gain.
pub fn distill_rules(model: &MinedModel, max_rules: usize) -> Distilled {
    let cands = candidates(model);
    let mut kept: Vec<Candidate> = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        let dominated = cands.iter().enumerate().any(|(j, o)| {
            j != i && c.rule.is_dominated_by(&o.rule) && (!o.rule.is_dominated_by(&c.rule) || j < i)
        });
        if !dominated {
            kept.push(Candidate {
                rule: c.rule.clone(),
                score: c.score,
            });
        }
    }
    kept.truncate(max_rules);
    finish(kept.into_iter().map(|c| c.rule).collect())
}

/// Positive upper-bound-only paths of all trees, highest path gain first.
fn candidates(model: &MinedModel) -> Vec<Candidate> {
    let mut cands = Vec::new();
    for t in &model.trees {
        collect_paths(t, model.rank_cap, &mut cands);
    }
    // Ties broken on thresholds so the order is total.
    cands.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.rule.current_threshold.cmp(&b.rule.current_threshold))
            .then_with(|| a.rule.history.cmp(&b.rule.history))
    });
    cands.dedup_by(|a, b| a.rule == b.rule);
    cands
}

fn finish(rules: Vec<StepRule>) -> Distilled {
    let rules: Vec<StepRule> = rules
        .into_iter()
        .enumerate()
        .map(|(k, r)| StepRule {
            rule_id: format!("M{}", k + 1),
            ..r
        })
        .collect();
    let warning = rules
        .is_empty()
        .then(|| "model has no positive-predicting leaf with upper bounds only".to_string());
    Distilled {
        rules: RuleSet { rules },
        warning,
    }
}

fn rule_hits(rule: &StepRule, rows: &[FeatureVector]) -> Vec<bool> {
    rows.iter()
        .map(|r| {
            r.ranks[0] <= rule.current_threshold as f64
                && rule
                    .history
                    .iter()
                    .all(|&(o, t)| r.ranks[o as usize] <= t as f64)
        })
        .collect()
}

/// Forward selection over the same candidate paths as [`distill_rules`]:
/// repeatedly adds the path whose union with the rules so far has the best F1
/// on `rows`, stopping when F1 no longer improves or `max_rules` is reached.
/// Dominated rules are dropped at the end.
pub fn select_rules(model: &MinedModel, rows: &[FeatureVector], max_rules: usize) -> Distilled {
    let cands = candidates(model);
    let hits: Vec<Vec<bool>> = cands.iter().map(|c| rule_hits(&c.rule, rows)).collect();
    let mut covered = vec![false; rows.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut best_f1 = 0.0;
    while chosen.len() < max_rules {
        let mut step: Option<(usize, f64)> = None;
        for (i, h) in hits.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let f1 = BinaryMetrics::score(
                rows.iter()
                    .enumerate()
                    .map(|(j, r)| (covered[j] || h[j], r.label)),
            )
            .f1;
            // Strict improvement keeps the earliest (highest-gain) candidate on ties.
            if f1 > best_f1 + 1e-12 && step.is_none_or(|(_, b)| f1 > b + 1e-12) {
                step = Some((i, f1));
            }
        }
        let Some((i, f1)) = step else { break };
        for (c, h) in covered.iter_mut().zip(&hits[i]) {
            *c |= *h;
        }
        chosen.push(i);
        best_f1 = f1;
    }
    let rules: Vec<StepRule> = chosen.iter().map(|&i| cands[i].rule.clone()).collect();
    let kept = rules
        .iter()
        .enumerate()
        .filter(|(i, r)| {
            !rules
                .iter()
                .enumerate()
                .any(|(j, o)| j != *i && r.is_dominated_by(o) && (!o.is_dominated_by(r) || j < *i))
        })
        .map(|(_, r)| r.clone())
        .collect();
    finish(kept)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Default)]
pub struct BinaryMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Precision or recall was undefined (no predicted or no actual positives).
    pub degenerate: bool,
}

impl BinaryMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let mut degenerate = false;
        let precision = if tp + fp == 0 {
            degenerate = true;
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            degenerate = true;
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        BinaryMetrics {
            precision,
            recall,
            f1,
            degenerate,
        }
    }

    pub fn score<I: IntoIterator<Item = (bool, bool)>>(pairs: I) -> Self {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (pred, actual) in pairs {
            match (pred, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        BinaryMetrics::from_counts(tp, fp, fn_)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    pub ensemble: BinaryMetrics,
    pub distilled: BinaryMetrics,
    /// Share of held-out RCPs with a positive ensemble prediction within one sentence.
    pub tolerant_recall: f64,
    pub importance: [f64; N_FEATURES],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<FoldMetrics>,
    pub mean_importance: [f64; N_FEATURES],
    pub mean_ensemble: BinaryMetrics,
    pub mean_distilled: BinaryMetrics,
    pub mean_tolerant_recall: f64,
}

fn mean_metrics(ms: impl Iterator<Item = BinaryMetrics>) -> BinaryMetrics {
    let ms: Vec<BinaryMetrics> = ms.collect();
    let n = ms.len() as f64;
    BinaryMetrics {
        precision: ms.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: ms.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: ms.iter().map(|m| m.f1).sum::<f64>() / n,
        degenerate: ms.iter().any(|m| m.degenerate),
    }
}

/// Assigns whole traces to folds with a seeded shuffle of trace ordinals.
pub fn fold_assignment(n_traces: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_traces).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n_traces];
    for (pos, &t) in order.iter().enumerate() {
        fold_of[t] = pos % folds;
    }
    fold_of
}

/// K-fold cross-validation over traces: each fold trains on the other folds'
/// windows and scores ensemble and distilled rules on its own.
pub fn cross_validate(
    windows: &[LabeledWindow],
    folds: usize,
    params: &MinerParams,
) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::Params("folds must be >= 2".into()));
    }
    let positives = windows.iter().filter(|w| w.is_rcp).count();
    if positives < folds {
        return Err(Error::Training(format!(
            "{positives} positives for {folds} folds"
        )));
    }
    let n_traces = windows
        .iter()
        .map(|w| w.trace_ordinal + 1)
        .max()
        .unwrap_or(0);
    let fold_of = fold_assignment(n_traces, folds, params.seed);

    let mut out = Vec::with_capacity(folds);
    for k in 0..folds {
        let (test, train_set): (Vec<&LabeledWindow>, Vec<&LabeledWindow>) =
            windows.iter().partition(|w| fold_of[w.trace_ordinal] == k);
        let train_rows: Vec<FeatureVector> = train_set
            .iter()
            .map(|w| FeatureVector::from_window(&w.window, w.is_rcp, params.rank_cap))
            .collect();
        let model = train(&train_rows, params)?;
        let rules = &model.distilled_rules;

        let preds: Vec<bool> = test
            .iter()
            .map(|w| {
                model.predict(&FeatureVector::from_window(&w.window, false, params.rank_cap).ranks)
            })
            .collect();
        let ensemble = BinaryMetrics::score(preds.iter().zip(&test).map(|(&p, w)| (p, w.is_rcp)));
        let distilled = BinaryMetrics::score(
            test.iter()
                .map(|w| (rules.evaluate(&w.window).is_terminate(), w.is_rcp)),
        );

        let mut hit = std::collections::BTreeMap::<usize, bool>::new();
        for (p, w) in preds.iter().zip(&test) {
            let near = w.sentence_index.abs_diff(w.rcp_index) <= 1;
            let e = hit.entry(w.trace_ordinal).or_insert(false);
            *e |= *p && near;
        }
        let tolerant_recall = if hit.is_empty() {
            0.0
        } else {
            hit.values().filter(|h| **h).count() as f64 / hit.len() as f64
        };
        out.push(FoldMetrics {
            fold: k,
            n_test: test.len(),
            ensemble,
            distilled,
            tolerant_recall,
            importance: model.importance,
        });
    }
    Ok(CvReport {
        mean_ensemble: mean_metrics(out.iter().map(|f| f.ensemble)),
        mean_distilled: mean_metrics(out.iter().map(|f| f.distilled)),
        mean_tolerant_recall: out.iter().map(|f| f.tolerant_recall).sum::<f64>() / folds as f64,
        mean_importance: std::array::from_fn(|k| {
            out.iter().map(|f| f.importance[k]).sum::<f64>() / folds as f64
        }),
        folds: out,
    })
}
