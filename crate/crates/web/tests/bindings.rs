use rcp_web::{check_ranks, compare, trace_view};

#[test]
fn trace_view_marks_rcpd_stop() {
    let v: serde_json::Value = serde_json::from_str(&trace_view(42, 3).unwrap()).unwrap();
    let n = v["ranks"].as_array().unwrap().len();
    assert_eq!(v["think_tokens"].as_array().unwrap().len(), n);
    let rcpd = v["stops"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["strategy"] == "rcpd")
        .unwrap();
    assert!(rcpd["at"].as_u64().unwrap() <= v["rcp_index"].as_u64().unwrap());
}

#[test]
fn check_ranks_fires_rules() {
    let v: serde_json::Value =
        serde_json::from_str(&check_ranks("900, 40, 80 30, 9", "").unwrap()).unwrap();
    let fired: Vec<_> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["fired"].clone())
        .collect();
    assert!(fired[..4].iter().all(|f| f.is_null()));
    assert_eq!(fired[4], "R2");
    assert!(check_ranks("1, x", "").is_err());
    assert!(check_ranks("0", "").is_err());
    let custom = r#"{"rules":[{"rule_id":"A","current_threshold":1000}]}"#;
    assert!(check_ranks("900", custom).unwrap().contains("\"A\""));
}

#[test]
fn compare_reports_full_first() {
    let v: serde_json::Value = serde_json::from_str(&compare(20, 1, "").unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows[0]["strategy"], "full");
    assert_eq!(rows[0]["compression_rate_pct"], 100.0);
    assert!(compare(0, 1, "").is_err());
}

#[test]
fn beyond_tokens_break_r2() {
    let v: serde_json::Value =
        serde_json::from_str(&check_ranks("900 40 max 30 9", "").unwrap()).unwrap();
    assert!(v[2]["rank"].is_null());
    assert!(v[4]["fired"].is_null());
}
