use rcp_core::synth::label_windows;
use rcp_core::*;

#[test]
fn loop_rate_and_plateau_accuracy_match_parameters() {
    let p = SynthParams::default();
    let c = generate(&p).unwrap();
    let n = c.traces.len() as f64;
    let loops = c
        .traces
        .iter()
        .filter(|t| t.outcomes[&TruncateAt::Full].looped)
        .count() as f64;
    assert!(
        (loops / n - p.p_loop).abs() <= 0.015,
        "loop rate {}",
        loops / n
    );

    let (mut hit, mut total) = (0usize, 0usize);
    for t in &c.traces {
        let rcp = t.rcp_index.unwrap();
        for (k, o) in &t.outcomes {
            if k.sentence().is_some_and(|s| s >= rcp) {
                total += 1;
                hit += o.correct as usize;
            }
        }
    }
    let acc = hit as f64 / total as f64;
    assert!(
        (acc - p.p_correct_plateau).abs() <= 0.05,
        "plateau accuracy {acc}"
    );
}

#[test]
fn one_positive_window_per_trace() {
    let c = generate(&SynthParams {
        n_traces: 60,
        ..SynthParams::default()
    })
    .unwrap();
    let w = label_windows(&c).unwrap();
    assert_eq!(w.iter().filter(|x| x.is_rcp).count(), 60);
    let sentences: usize = c.traces.iter().map(|t| t.sentences.len()).sum();
    assert_eq!(w.len(), sentences);
    for x in w.iter().filter(|x| x.sentence_index == 0) {
        assert!(x.window.history.iter().all(|r| r.is_beyond()));
    }
}

#[test]
fn presets_generate() {
    for name in ["default", "paper-like", "no-loops", "flat"] {
        let p = SynthParams {
            n_traces: 5,
            ..SynthParams::preset(name).unwrap()
        };
        generate(&p).unwrap();
    }
    assert!(SynthParams::preset("nope").is_err());
}
