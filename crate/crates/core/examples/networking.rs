//! End-to-end heralded entanglement between two CAPS nodes fed by a simulated
//! cavity photon source.
//!
//! cargo run --release --example networking -- [type2|type3|type1] [C_in] [sigma_t*gamma] [p_br]

use std::time::Instant;

use capsnet::cavity::{r_opt, CavityParams};
use capsnet::protocols::{
    spectral_grid, type1, type2, type2_mismatched, type3, NodeConfig, PhotonSpectrum,
};
use capsnet::source::{characterize, LevelScheme, SourceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let protocol = args
        .first()
        .map(String::as_str)
        .unwrap_or("type2")
        .to_string();
    let (c_in, sigma, p_br) = (arg(1, 100.0), arg(2, 1.0), arg(3, 0.5));
    let gamma = 1.0;
    let start = Instant::now();

    let scheme = if protocol == "type2" {
        LevelScheme::Lambda3lvl
    } else {
        LevelScheme::Entangler4lvl
    };
    let params = CavityParams::delay_matched(c_in, gamma)?;
    let report = characterize(&SourceSpec::standard(params, p_br, sigma, scheme))?;
    let p_gen = report.modes.p_gen;
    let node = NodeConfig::matched(c_in, gamma)?;
    let grid = spectral_grid(sigma, 16.0, 2049)?;
    let photon = PhotonSpectrum::from_decomposition(&report.kernel, &report.modes, grid)?;

    let out = match protocol.as_str() {
        "type2" => {
            let (a, b) = type2_mismatched(&node, &node)?;
            type2(&a, &b, &photon)?
        }
        "type3" => type3(&node, &photon)?,
        _ => type1(&report.kernel, &report.kernel)?,
    };
    let reference = p_gen * r_opt(c_in)?.powi(2);
    println!("protocol      {protocol}");
    println!("C_in          {c_in}");
    println!("sigma_t       {sigma} / gamma");
    println!("P_gen         {p_gen:.5}");
    println!("purity        {:.5}", report.modes.purity);
    println!("1 - F         {:.3e}", out.infidelity());
    println!("P_success     {:.5}", out.p_success);
    println!(
        "P_gen r_opt^2 {reference:.5}  (ratio {:.4})",
        out.p_success / reference
    );
    for o in &out.outcomes {
        println!(
            "  outcome {:>4}  p = {:.5}  F = {:.6}",
            o.outcome, o.probability, o.fidelity
        );
    }
    println!("elapsed       {:.2?}", start.elapsed());
    Ok(())
}
