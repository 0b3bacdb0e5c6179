//! Round-trip an instance through the JSON file format and solve it.

use rcop::model::{instance_from_json, instance_to_json, read_instance, write_instance};
use rcop::solver::{solve_dwr, SolveOptions};

fn main() {
    let text = r#"{
        "name": "from-json",
        "domain": {"kind": "psd_rank_k_spectral", "n": 2, "k": 1},
        "objective": [-1.0, 0.0, 0.0, 0.0],
        "constraints": [
            {"A": [0.0, 0.5, 0.5, 0.0], "bl": 0.0, "bu": 0.0},
            {"A": [1.0, 0.0, 0.0, 0.0], "bl": "-inf", "bu": 0.5}
        ]
    }"#;
    let inst = instance_from_json(text).expect("parses");
    println!("parsed instance {:?} with {} constraints", inst.name, inst.m());

    let dir = std::env::temp_dir().join("rcop-instance-example.json");
    write_instance(&dir, &inst).expect("writes");
    let back = read_instance(&dir).expect("reads");
    assert_eq!(back.objective.data(), inst.objective.data(), "bit-exact round trip");
    println!("round-tripped through {}", dir.display());

    let sol = solve_dwr(&back, &SolveOptions::default());
    println!("v_rel = {:.9} ({:?})", sol.v_rel, sol.status);
    println!("serialized form:\n{}", instance_to_json(&back));
}
