mod common;

use proptest::prelude::*;
use rcp_core::eval::evaluate_corpus;
use rcp_core::rules::{default_rcpd_rules, oracle_evaluate, think_rank5_rules, HISTORY_LEN};
use rcp_core::strategy::run_strategy;
use rcp_core::{decide_stop, Corpus, RankWindow, RuleSet, StepRule, StrategyConfig, TruncateAt};

use common::{rank, trace, CAP};

fn window() -> impl Strategy<Value = RankWindow> {
    (rank(), prop::array::uniform5(rank())).prop_map(|(c, h)| RankWindow {
        current: c,
        history: h,
    })
}

fn rule_set() -> impl Strategy<Value = RuleSet> {
    let rule = (
        1u32..200,
        prop::collection::btree_map(1u8..=5, 1u32..1500, 0..=5),
    );
    prop::collection::vec(rule, 1..5).prop_map(|rs| RuleSet {
        rules: rs
            .into_iter()
            .enumerate()
            .map(|(i, (c, h))| {
                StepRule::new(format!("X{i}"), c, &h.into_iter().collect::<Vec<_>>())
            })
            .collect(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn default_rules_agree_with_oracle(w in window()) {
        let rules = default_rcpd_rules();
        prop_assert_eq!(rules.evaluate(&w).fired_rule(), oracle_evaluate(&w));
    }

    #[test]
    fn lowering_ranks_never_cancels_a_stop(rules in rule_set(), w in window(), cut in prop::array::uniform6(0u32..1100)) {
        // w2 <= w pointwise: lower each finite rank, and lower BEYOND to an arbitrary finite rank.
        let lower = |r: rcp_core::Rank, d: u32| {
            if r.is_beyond() { rcp_core::Rank::saturating(d.clamp(1, CAP), CAP) } else { rcp_core::Rank::saturating(r.get().saturating_sub(d).max(1), CAP) }
        };
        let mut w2 = w;
        w2.current = lower(w.current, cut[0]);
        for k in 0..HISTORY_LEN {
            w2.history[k] = lower(w.history[k], cut[k + 1]);
        }
        if rules.evaluate(&w).is_terminate() {
            prop_assert!(rules.evaluate(&w2).is_terminate());
        }
    }

    #[test]
    fn top5_current_always_fires_r1(w in window(), r in 1u32..=5) {
        let w = RankWindow { current: rcp_core::Rank::saturating(r, CAP), ..w };
        let rules = default_rcpd_rules();
        prop_assert_eq!(rules.evaluate(&w).fired_rule(), Some("R1"));
    }

    #[test]
    fn think_rank5_is_r1_only(t in trace(40)) {
        let a = run_strategy(&StrategyConfig::ThinkRank5, &t).unwrap();
        let b = run_strategy(&StrategyConfig::Rcpd { rules: think_rank5_rules() }, &t).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn all_beyond_returns_full(t in trace(30)) {
        let mut t = t;
        for s in &mut t.sentences {
            s.eot_rank = rcp_core::Rank::BEYOND;
        }
        prop_assert_eq!(decide_stop(&StrategyConfig::Rcpd { rules: default_rcpd_rules() }, &t).unwrap(), TruncateAt::Full);
    }

    #[test]
    fn smaller_budget_stops_no_later(t in trace(40), a in 1u64..8000, b in 1u64..8000) {
        let (lo, hi) = (a.min(b), a.max(b));
        let at = |budget| decide_stop(&StrategyConfig::BudgetForce { budget_tokens: budget }, &t).unwrap();
        // FULL sorts after every sentence index.
        prop_assert!(at(lo) <= at(hi));
    }

    #[test]
    fn corpus_round_trips(ts in prop::collection::vec(trace(15), 1..6)) {
        let traces = ts.into_iter().enumerate().map(|(i, mut t)| { t.trace_id = format!("t{i}"); t }).collect();
        let c = Corpus::new("prop", traces);
        let text = c.to_jsonl().unwrap();
        let back = Corpus::from_jsonl(&text).unwrap();
        prop_assert_eq!(back.to_jsonl().unwrap(), text);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn report_ignores_trace_order(ts in prop::collection::vec(trace(20), 2..12), rot in 0usize..12) {
        let traces: Vec<_> = ts.into_iter().enumerate().map(|(i, mut t)| { t.trace_id = format!("t{i}"); t }).collect();
        let configs = [
            StrategyConfig::NoThink,
            StrategyConfig::ThinkRank5,
            StrategyConfig::BudgetForce { budget_tokens: 500 },
            StrategyConfig::Rcpd { rules: default_rcpd_rules() },
        ];
        let a = evaluate_corpus(&Corpus::new("a", traces.clone()), &configs).unwrap();
        let mut shuffled = traces;
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let b = evaluate_corpus(&Corpus::new("a", shuffled), &configs).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rule_sets_round_trip_json_and_toml(rules in rule_set()) {
        prop_assert_eq!(&RuleSet::from_json(&rules.to_json()).unwrap(), &rules);
        let toml_text = toml::to_string(&rules).unwrap();
        prop_assert_eq!(&toml::from_str::<RuleSet>(&toml_text).unwrap(), &rules);
    }
}
