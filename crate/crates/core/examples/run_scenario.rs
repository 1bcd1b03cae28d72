//! Runs an inline scenario through the experiment harness and prints the table.
//!
//! cargo run --release --example run_scenario -- [out_dir]

use capsnet::harness::{run_str, RunOptions};

const SCENARIO: &str = r#"
experiment = "bandwidth_scan"

[parameters]
gamma = "0.24 2pi_MHz"

[[sweep]]
name = "c_in"
start = 10
stop = 100
points = 3
scale = "log"

[[sweep]]
name = "sigma_t"
start = "100 ns"
stop = "2000 ns"
points = 4
scale = "log"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("capsnet").display().to_string());
    let opts = RunOptions {
        out_dir: out.into(),
        ..RunOptions::default()
    };
    let summary = run_str(SCENARIO, "bandwidth", &opts)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", summary.table.to_csv());
    println!("-> {}", summary.csv_path.display());
    Ok(())
}
