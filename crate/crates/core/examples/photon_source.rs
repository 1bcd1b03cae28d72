//! Characterises the cavity photon source: drive inversion, master equation,
//! g1 kernel and temporal-mode decomposition.
//!
//! cargo run --release --example photon_source -- [C_in] [p_br] [sigma_t*gamma] [lambda|entangler]

use std::time::Instant;

use capsnet::cavity::CavityParams;
use capsnet::source::{characterize, LevelScheme, SourceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (c_in, p_br, sigma) = (arg(0, 10.0), arg(1, 0.5), arg(2, 1.0));
    let scheme = match args.get(3).map(String::as_str) {
        Some("entangler") => LevelScheme::Entangler4lvl,
        _ => LevelScheme::Lambda3lvl,
    };

    let params = CavityParams::delay_matched(c_in, 1.0)?;
    let spec = SourceSpec::standard(params, p_br, sigma, scheme);
    let start = Instant::now();
    let report = characterize(&spec)?;
    let lam = &report.modes.eigenvalues;

    println!("scheme        {scheme:?}");
    println!("C_in          {c_in}");
    println!("p_br          {p_br}");
    println!("sigma_t       {sigma} / gamma");
    println!("P_gen         {:.5}", report.modes.p_gen);
    println!("lambda_1      {:.5}", lam[0]);
    println!("lambda_2      {:.5}", lam[1]);
    println!("purity        {:.5}", report.modes.purity);
    println!("overlap       {:.6}", report.target_overlap);
    println!(
        "flux budget   {:.3e} off unity",
        report.budget.total() - 1.0
    );
    println!("trace drift   {:.2e}", report.max_trace_drift);
    println!("elapsed       {:.2?}", start.elapsed());
    Ok(())
}
