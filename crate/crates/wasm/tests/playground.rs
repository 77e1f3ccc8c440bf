use dialkit_wasm::{bucket_values, canonicalize_state, score_pair};

#[test]
fn identical_pair_scores_100() {
    let v = score_pair("The hotel is in the north.", "the hotel is in the north .").unwrap();
    assert!((v["bleu"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert!((v["rougeL"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert_eq!(v["precisions"].as_array().unwrap().len(), 4);
}

#[test]
fn empty_reference_is_an_error() {
    assert!(score_pair("hello", "   ").is_err());
}

#[test]
fn state_is_canonicalized() {
    let v = canonicalize_state("[taxi] leave 5pm [hotel] stars 4 , area north , broken");
    assert_eq!(
        v["canonical"],
        "[hotel] area north , stars 4 [taxi] leave 5pm"
    );
    assert_eq!(v["triples"].as_array().unwrap().len(), 3);
    assert_eq!(v["dropped"], 1);
    assert_eq!(canonicalize_state("none")["canonical"], "none");
}

#[test]
fn values_are_bucketed() {
    let v = bucket_values("utr_num", "", "3, 7 12 2 9").unwrap();
    let buckets = v["buckets"].as_array().unwrap();
    let counts: Vec<u64> = buckets
        .iter()
        .map(|b| b["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![2, 2, 1]);
    assert_eq!(buckets[0]["label"], "[2,6)");
    assert_eq!(buckets[2]["mean"], 12.0);

    let v = bucket_values("sp1_len", "0 10", "").unwrap();
    assert!(v["buckets"][0]["mean"].is_null());
    assert!(bucket_values("speed", "", "1").is_err());
    assert!(bucket_values("sp1_len", "5 1", "1").is_err());
    assert!(bucket_values("sp1_len", "", "x").is_err());
}
