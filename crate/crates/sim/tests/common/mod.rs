#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::{json, Value};
use vistrack_sim::scenario::{Scenario, ScenarioFile};

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn bundled(name: &str) -> Scenario {
    ScenarioFile::load(&scenarios_dir().join(format!("{name}.json"))).unwrap().build().unwrap()
}

/// Empty 30 x 30 map, robot at (5, 15) facing +x, linear target at (11, 15).
pub fn open_map() -> Value {
    json!({
        "name": "open",
        "map": {"width": 30.0, "height": 30.0},
        "obstacles": [],
        "noise": {
            "robot": [0.004, 0, 0, 0, 0, 0.004, 0, 0, 0, 0, 0.0004, 0, 0, 0, 0, 0.0004],
            "target": [0.01, 0, 0, 0.01],
            "sensor": [0.01, 0, 0, 4e-4]
        },
        "sensor": "range_bearing",
        "robot_init": [5.0, 15.0, 0.0, 0.0],
        "target": {"model": "linear_integrator", "init": [11.0, 15.0], "script": {"controls": []}},
        "planner": {"objective": "bpod", "relax_tf": -0.5, "relax_lo": 0.0},
        "episode": {"max_steps": 50, "seeds": [1, 2, 3]}
    })
}

pub fn build(v: &Value) -> Scenario {
    ScenarioFile::parse(&v.to_string()).unwrap().build().unwrap()
}
