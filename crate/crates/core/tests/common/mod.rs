#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use rcp_core::trace::{SentenceRecord, TruncationOutcome};
use rcp_core::{Rank, ReasoningTrace, TruncateAt};

pub const CAP: u32 = 1024;

/// Ranks drawn so that all rule thresholds and their neighbours show up often.
pub fn rank() -> impl Strategy<Value = Rank> {
    prop_oneof![
        3 => prop::sample::select(vec![1u32, 4, 5, 6, 9, 10, 11, 19, 20, 21, 49, 50, 51, 99, 100, 101, 999, 1000, 1001]),
        2 => 1u32..=1023,
        1 => Just(u32::MAX),
    ]
    .prop_map(|r| if r == u32::MAX { Rank::BEYOND } else { Rank::saturating(r, CAP) })
}

/// A valid trace with outcomes at every sentence and at FULL.
pub fn trace(max_sentences: usize) -> impl Strategy<Value = ReasoningTrace> {
    prop::collection::vec(
        (rank(), 1u64..200, 1u64..2000, any::<bool>(), 0.0f64..=1.0),
        1..=max_sentences,
    )
    .prop_flat_map(|rows| {
        let n = rows.len();
        (
            Just(rows),
            1u64..3000,
            any::<bool>(),
            prop::option::of(0..n as u32),
        )
    })
    .prop_map(|(rows, full_content, full_correct, rcp)| {
        let mut cum = 0;
        let mut sentences = Vec::new();
        let mut outcomes = BTreeMap::new();
        for (i, (r, len, content, correct, conf)) in rows.into_iter().enumerate() {
            cum += len;
            sentences.push(SentenceRecord {
                index: i as u32,
                think_tokens_cum: cum,
                eot_rank: r,
                trigger_word: i % 3 == 1,
                boxed_confidence: Some(conf),
                text_digest: None,
            });
            outcomes.insert(
                TruncateAt::Sentence(i as u32),
                TruncationOutcome {
                    content_tokens: content,
                    correct,
                    looped: false,
                },
            );
        }
        outcomes.insert(
            TruncateAt::Full,
            TruncationOutcome {
                content_tokens: full_content,
                correct: full_correct,
                looped: false,
            },
        );
        ReasoningTrace {
            trace_id: "p".into(),
            rcp_index: rcp,
            sentences,
            outcomes,
            full_think_tokens: cum,
            meta: BTreeMap::new(),
        }
    })
}
