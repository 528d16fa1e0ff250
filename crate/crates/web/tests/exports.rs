//! Native runs of the exported functions.

use hiercc_web::{rate_curve, trace, verify_random};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn curve_matches_example_values() {
    let v = parse(rate_curve(2, 4));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2]["scheme1"]["rbar"]["frac"], "39/10");
    assert_eq!(rows[2]["scheme2"]["m2"]["frac"], "73/30");
    assert!(!rows[0]["scheme1"]["flags"].as_array().unwrap().is_empty());
    assert!(parse(rate_curve(2, 30))["error"].is_string());
}

#[test]
fn trace_of_the_example() {
    let v = parse(trace(3, 2, 6, 1, "1,2,3,4,5,6", 1));
    assert_eq!(v["lines"][0], "Y^1 = W^{12}_2 + W^{13}_3 + W^{14}_4 + W^{15}_5 + W^{16}_6");
    assert_eq!(v["lines"].as_array().unwrap().len(), 6 + 37);
    assert!(v["users"].as_array().unwrap().iter().all(|u| u["success"] == true));
    assert!(parse(trace(3, 2, 6, 1, "1,2", 1))["error"].is_string());
    assert!(parse(trace(3, 2, 6, 3, "1,2,3,4,5,6", 1))["error"].is_string());
}

#[test]
fn random_verify_reports() {
    let v = parse(verify_random(2, 2, 3, 2, 4, 10));
    assert_eq!((v["attempted"].as_u64(), v["passed"].as_u64()), (Some(10), Some(10)));
    assert_eq!(v["oracle_checked"], true);
    assert!(parse(verify_random(2, 1, 2, 1, 0, 1))["error"].is_string());
}
