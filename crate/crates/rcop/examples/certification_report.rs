//! Full certification of a bundled fixture: decision rules, verification
//! flags, and the JSON report consumed by the command-line tool.

use rcop::certify::{certify, report_to_json, CertifyOptions};
use rcop::demos;

fn main() {
    for name in ["trs", "egbd"] {
        let inst = demos::instance(name).unwrap();
        let certified = certify(&inst, &CertifyOptions::default());
        println!("== {name}: v_rel = {:.6}", certified.solution.v_rel);
        for p in &certified.report.predictions {
            println!("  [{}] {}", if p.applies { "applies" } else { "   -   " }, p.rule);
        }
        println!(
            "  verified: extreme point {:?}, objective {:?}, convex hull {:?}, gap {:?}",
            certified.report.verified.extreme_point,
            certified.report.verified.objective,
            certified.report.verified.convex_hull,
            certified.report.gap,
        );
    }

    println!("\nfull JSON report for fixture eg1:");
    let certified = certify(&demos::instance("eg1").unwrap(), &CertifyOptions::default());
    println!("{}", report_to_json("eg1", &certified));
}
