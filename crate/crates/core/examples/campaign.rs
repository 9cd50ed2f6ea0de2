//! A small campaign built in code, run in parallel, and exported as plot
//! rows.

use varmeas::harness::{plot_rows, run_suite, CampaignConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = CampaignConfig::from_json(
        r#"{
            "seed": 11,
            "horizon": 128,
            "tolerance": 0.05,
            "theorems": ["th1", "th1m", "p4", "thmcsequi"],
            "families": [
                { "kind": "bounded_pair", "params": { "atoms": 5 } },
                { "kind": "mass_escape", "expect": { "th1": "hypothesis_failed", "th1m": "hypothesis_failed" } },
                { "kind": "step_perturbed" }
            ]
        }"#,
    )?;
    let out = run_suite(&config)?;
    for r in &out.results {
        println!("{:<10} {:<16} {:?} ({:?})", r.theorem, r.family, r.report.verdict, r.outcome);
    }
    let rows = plot_rows(&serde_json::to_value(&out)?)?;
    println!("{} plot rows; summary {:?}", rows.len(), out.summary);
    assert_eq!(out.exit_code(), 0);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
