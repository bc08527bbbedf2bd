mod common;

use serde_json::json;
use vistrack_sim::scenario::ScenarioFile;

#[test]
fn bundled_scenarios_build() {
    for name in ["case1", "case2_v1", "case2_v2", "case2_v3"] {
        let sc = common::bundled(name);
        assert_eq!(sc.seeds, (1..=50).collect::<Vec<u64>>());
        assert_eq!(sc.loss_limit, 15);
        assert_eq!((sc.width, sc.height), (60.0, 50.0));
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v = common::open_map();
    v["colour"] = json!("red");
    assert!(ScenarioFile::parse(&v.to_string()).is_err());
    let mut v = common::open_map();
    v["episode"]["retries"] = json!(3);
    assert!(ScenarioFile::parse(&v.to_string()).is_err());
}

#[test]
fn invalid_scenarios_are_config_errors() {
    let cases = [
        ("robot_init", json!([15.0, 15.0, 0.0, 0.0])),
        ("obstacles", json!([[[40.0, 1.0], [45.0, 1.0], [45.0, 5.0]]])),
    ];
    for (key, value) in cases {
        let mut v = common::open_map();
        v["obstacles"] = json!([[[14.0, 14.0], [16.0, 14.0], [16.0, 16.0], [14.0, 16.0]]]);
        v[key] = value;
        let err = ScenarioFile::parse(&v.to_string()).unwrap().build().unwrap_err();
        assert!(err.is_config(), "{key}: {err}");
    }
    let mut v = common::open_map();
    v["episode"]["loss_limit"] = json!(0);
    assert!(ScenarioFile::parse(&v.to_string()).unwrap().build().unwrap_err().is_config());
    let mut v = common::open_map();
    v["noise"]["sensor"] = json!([0.01, 0.5, 0.0, 4e-4]);
    assert!(ScenarioFile::parse(&v.to_string()).unwrap().build().unwrap_err().is_config());
}
