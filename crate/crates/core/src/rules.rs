//! Stepwise threshold rules over a window of end-of-thinking ranks.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::Rank;

/// Number of preceding sentence ranks kept alongside the current one.
pub const HISTORY_LEN: usize = 5;

/// Current rank plus up to five preceding ranks, most recent first.
/// Missing history is `Rank::BEYOND`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankWindow {
    pub current: Rank,
    pub history: [Rank; HISTORY_LEN],
}

impl RankWindow {
    /// The window before any sentence has been seen.
    pub const EMPTY: RankWindow = RankWindow {
        current: Rank::BEYOND,
        history: [Rank::BEYOND; HISTORY_LEN],
    };

    /// `history[0]` is the previous sentence. Extra entries are ignored.
    pub fn new(current: Rank, history: &[Rank]) -> Self {
        let mut h = [Rank::BEYOND; HISTORY_LEN];
        for (slot, r) in h.iter_mut().zip(history) {
            *slot = *r;
        }
        RankWindow {
            current,
            history: h,
        }
    }

    /// Window for the next sentence: the current rank shifts into history.
    #[inline]
    pub fn advance(&self, next: Rank) -> RankWindow {
        let mut history = [Rank::BEYOND; HISTORY_LEN];
        history[0] = self.current;
        history[1..].copy_from_slice(&self.history[..HISTORY_LEN - 1]);
        RankWindow {
            current: next,
            history,
        }
    }

    /// Rank at `offset` sentences back; 0 is the current sentence.
    #[inline]
    pub fn at(&self, offset: usize) -> Rank {
        if offset == 0 {
            self.current
        } else {
            self.history[offset - 1]
        }
    }

    /// Builds the window ending at `index` from a per-sentence rank sequence.
    pub fn ending_at(ranks: &[Rank], index: usize) -> RankWindow {
        let current = ranks[index];
        let mut h = [Rank::BEYOND; HISTORY_LEN];
        for (k, slot) in h.iter_mut().enumerate() {
            if let Some(i) = index.checked_sub(k + 1) {
                *slot = ranks[i];
            }
        }
        RankWindow {
            current,
            history: h,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRule {
    pub rule_id: String,
    pub current_threshold: u32,
    /// `(offset, threshold)` pairs; offset 1 is the previous sentence.
    #[serde(default)]
    pub history: Vec<(u8, u32)>,
}

impl StepRule {
    pub fn new(rule_id: impl Into<String>, current_threshold: u32, history: &[(u8, u32)]) -> Self {
        StepRule {
            rule_id: rule_id.into(),
            current_threshold,
            history: history.to_vec(),
        }
    }

    #[inline]
    pub fn is_satisfied(&self, w: &RankWindow) -> bool {
        w.current.within(self.current_threshold)
            && self
                .history
                .iter()
                .all(|&(offset, threshold)| w.history[offset as usize - 1].within(threshold))
    }

    /// Threshold at `offset` (0 = current); `None` when unconstrained.
    pub fn threshold_at(&self, offset: u8) -> Option<u32> {
        if offset == 0 {
            Some(self.current_threshold)
        } else {
            self.history
                .iter()
                .find(|(o, _)| *o == offset)
                .map(|(_, t)| *t)
        }
    }

    /// True when every window this rule accepts is also accepted by `other`.
    pub fn is_dominated_by(&self, other: &StepRule) -> bool {
        (0..=HISTORY_LEN as u8).all(|o| match (self.threshold_at(o), other.threshold_at(o)) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub rules: Vec<StepRule>,
}

/// Outcome of consulting a rule set at one sentence boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision<'r> {
    Continue,
    TerminateThinking { rule_id: &'r str },
}

impl<'r> StopDecision<'r> {
    pub fn is_terminate(&self) -> bool {
        matches!(self, StopDecision::TerminateThinking { .. })
    }

    pub fn fired_rule(&self) -> Option<&'r str> {
        match self {
            StopDecision::Continue => None,
            StopDecision::TerminateThinking { rule_id } => Some(rule_id),
        }
    }
}

/// The four RCPD rules, in order R1..R4.
pub fn default_rcpd_rules() -> RuleSet {
    RuleSet {
        rules: vec![
            StepRule::new("R1", 5, &[]),
            StepRule::new("R2", 10, &[(1, 50), (2, 100), (3, 1000)]),
            StepRule::new("R3", 20, &[(1, 20), (2, 20)]),
            StepRule::new("R4", 50, &[(1, 50), (2, 50), (3, 50), (4, 50), (5, 50)]),
        ],
    }
}

/// The single-rule set equivalent to stopping once the rank enters the top 5.
pub fn think_rank5_rules() -> RuleSet {
    RuleSet {
        rules: vec![StepRule::new("R1", 5, &[])],
    }
}

impl RuleSet {
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for r in &self.rules {
            if r.rule_id.is_empty() {
                return Err(Error::InvalidRules("empty rule_id".into()));
            }
            if !ids.insert(r.rule_id.as_str()) {
                return Err(Error::InvalidRules(format!(
                    "duplicate rule_id {}",
                    r.rule_id
                )));
            }
            let mut offsets = [false; HISTORY_LEN + 1];
            let check = |t: u32| {
                if t == 0 || t == u32::MAX {
                    Err(Error::InvalidRules(format!(
                        "{}: threshold {t} out of range",
                        r.rule_id
                    )))
                } else {
                    Ok(())
                }
            };
            check(r.current_threshold)?;
            for &(o, t) in &r.history {
                if !(1..=HISTORY_LEN as u8).contains(&o) {
                    return Err(Error::InvalidRules(format!(
                        "{}: offset {o} not in [1,5]",
                        r.rule_id
                    )));
                }
                if std::mem::replace(&mut offsets[o as usize], true) {
                    return Err(Error::InvalidRules(format!(
                        "{}: offset {o} repeated",
                        r.rule_id
                    )));
                }
                check(t)?;
            }
        }
        Ok(())
    }

    /// First satisfied rule wins; the stop itself is a disjunction.
    #[inline]
    pub fn evaluate(&self, window: &RankWindow) -> StopDecision<'_> {
        for r in &self.rules {
            if r.is_satisfied(window) {
                return StopDecision::TerminateThinking {
                    rule_id: &r.rule_id,
                };
            }
        }
        StopDecision::Continue
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule set serializes")
    }

    pub fn from_json(text: &str) -> Result<RuleSet> {
        let rules: RuleSet =
            serde_json::from_str(text).map_err(|e| Error::InvalidRules(e.to_string()))?;
        rules.validate()?;
        Ok(rules)
    }

    /// Loads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: impl AsRef<Path>) -> Result<RuleSet> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "toml") {
            let rules: RuleSet =
                toml::from_str(&text).map_err(|e| Error::InvalidRules(e.to_string()))?;
            rules.validate()?;
            Ok(rules)
        } else {
            RuleSet::from_json(&text)
        }
    }
}

/// Literal, unoptimized restatement of the four default rules. Test oracle.
pub fn oracle_evaluate(window: &RankWindow) -> Option<&'static str> {
    fn top(r: Rank, n: u32) -> bool {
        !r.is_beyond() && r.get() <= n
    }
    let c = window.current;
    let h = |k: usize| window.history[k - 1];

    // 1. current within top 5
    if top(c, 5) {
        return Some("R1");
    }
    // 2. current top 10; previous one, two, three within top 50, 100, 1000
    if top(c, 10) && top(h(1), 50) && top(h(2), 100) && top(h(3), 1000) {
        return Some("R2");
    }
    // 3. current and two preceding all within top 20
    if top(c, 20) && top(h(1), 20) && top(h(2), 20) {
        return Some("R3");
    }
    // 4. current and preceding five all within top 50
    if top(c, 50) && (1..=5).all(|k| top(h(k), 50)) {
        return Some("R4");
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::DEFAULT_RANK_CAP;

    fn r(v: u32) -> Rank {
        Rank::saturating(v, DEFAULT_RANK_CAP)
    }

    fn w(current: u32, hist: [u32; 5]) -> RankWindow {
        RankWindow::new(r(current), &hist.map(r))
    }

    const M: u32 = u32::MAX;

    #[test]
    fn default_rules_shape() {
        let rs = default_rcpd_rules();
        rs.validate().unwrap();
        assert_eq!(rs.rules.len(), 4);
        assert_eq!(rs.rules[0].current_threshold, 5);
        assert!(rs.rules[0].history.is_empty());
        assert_eq!(rs.rules[1].current_threshold, 10);
        assert_eq!(rs.rules[1].history, vec![(1, 50), (2, 100), (3, 1000)]);
        assert_eq!(rs.rules[2].current_threshold, 20);
        assert_eq!(rs.rules[2].history, vec![(1, 20), (2, 20)]);
        assert_eq!(rs.rules[3].current_threshold, 50);
        assert_eq!(rs.rules[3].history.len(), 5);
        assert!(rs.rules[3].history.iter().all(|&(_, t)| t == 50));
    }

    #[test]
    fn examples() {
        let rs = default_rcpd_rules();
        let fired = |win| rs.evaluate(&win).fired_rule();
        assert_eq!(fired(w(4, [M; 5])), Some("R1"));
        assert_eq!(fired(w(8, [42, 90, 800, M, M])), Some("R2"));
        assert_eq!(fired(w(15, [18, 19, M, M, M])), Some("R3"));
        assert_eq!(fired(w(45, [50, 49, 48, 47, 46])), Some("R4"));
        assert_eq!(fired(w(6, [60, 90, 900, 60, 60])), None);
        assert_eq!(fired(w(1, [1; 5])), Some("R1"));
        assert_eq!(fired(w(M, [1; 5])), None);
    }

    #[test]
    fn inclusive_boundaries() {
        let rs = default_rcpd_rules();
        assert!(rs.evaluate(&w(5, [M; 5])).is_terminate());
        assert!(!rs.evaluate(&w(6, [M; 5])).is_terminate());
        assert_eq!(
            rs.evaluate(&w(10, [50, 100, 1000, M, M])).fired_rule(),
            Some("R2")
        );
        assert!(!rs.evaluate(&w(10, [50, 100, 1001, M, M])).is_terminate());
        assert_eq!(
            rs.evaluate(&w(20, [20, 20, M, M, M])).fired_rule(),
            Some("R3")
        );
        assert!(!rs.evaluate(&w(50, [50, 50, 50, 50, 51])).is_terminate());
    }

    #[test]
    fn beyond_never_satisfies_large_thresholds() {
        let rs = RuleSet {
            rules: vec![StepRule::new("X", 5000, &[(1, 5000)])],
        };
        rs.validate().unwrap();
        assert!(!rs.evaluate(&w(3, [M; 5])).is_terminate());
        assert!(rs.evaluate(&w(3, [1023, M, M, M, M])).is_terminate());
    }

    #[test]
    fn advance_shifts_history() {
        let mut win = RankWindow::EMPTY;
        for v in 1..=7 {
            win = win.advance(r(v));
        }
        assert_eq!(win.current.get(), 7);
        assert_eq!(win.history.map(|x| x.get()), [6, 5, 4, 3, 2]);
        let ranks: Vec<Rank> = (1..=7).map(r).collect();
        assert_eq!(RankWindow::ending_at(&ranks, 6), win);
        assert_eq!(RankWindow::ending_at(&ranks, 0), RankWindow::new(r(1), &[]));
    }

    #[test]
    fn validation_rejects_bad_rules() {
        let bad = |rule: StepRule| RuleSet { rules: vec![rule] }.validate().is_err();
        assert!(bad(StepRule::new("A", 0, &[])));
        assert!(bad(StepRule::new("A", 5, &[(0, 5)])));
        assert!(bad(StepRule::new("A", 5, &[(6, 5)])));
        assert!(bad(StepRule::new("A", 5, &[(1, 5), (1, 6)])));
        assert!(bad(StepRule::new("", 5, &[])));
        let dup = RuleSet {
            rules: vec![StepRule::new("A", 5, &[]), StepRule::new("A", 6, &[])],
        };
        assert!(dup.validate().is_err());
    }

    #[test]
    fn domination() {
        let a = StepRule::new("a", 5, &[]);
        let b = StepRule::new("b", 5, &[(1, 50)]);
        assert!(b.is_dominated_by(&a));
        assert!(!a.is_dominated_by(&b));
        let c = StepRule::new("c", 3, &[(2, 10)]);
        assert!(c.is_dominated_by(&a));
        assert!(!c.is_dominated_by(&b));
    }

    #[test]
    fn json_round_trip_and_config_shape() {
        let rs = default_rcpd_rules();
        assert_eq!(RuleSet::from_json(&rs.to_json()).unwrap(), rs);
        let text =
            r#"{"rules":[{"rule_id":"R9","current_threshold":7,"history":[[1,30],[3,500]]}]}"#;
        let parsed = RuleSet::from_json(text).unwrap();
        assert_eq!(parsed.rules[0].history, vec![(1, 30), (3, 500)]);
        let toml_text = "[[rules]]\nrule_id = \"T\"\ncurrent_threshold = 5\nhistory = [[1, 50]]\n";
        let t: RuleSet = toml::from_str(toml_text).unwrap();
        assert_eq!(t.rules[0], StepRule::new("T", 5, &[(1, 50)]));
    }
}
