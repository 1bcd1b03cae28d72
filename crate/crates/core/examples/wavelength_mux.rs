//! Crosstalk between atoms coupled to neighbouring longitudinal modes of a
//! long fibre cavity, from random antinode placements.
//!
//! cargo run --release --example wavelength_mux -- [finesse] [trials] [seed]

use capsnet::transfer::{wvm_crosstalk, WvmScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let finesse = args.first().and_then(|s| s.parse().ok()).unwrap_or(2000.0);
    let trials = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let s = WvmScenario::reference(finesse, trials, seed);
    let out = wvm_crosstalk(&s)?;
    println!("finesse      {finesse}");
    println!("C_in         {:.2}", out.c_in);
    println!("kappa_ex     {:.4e} rad/s", out.kappa_ex);
    for (n, m) in out.channels.iter().zip(&out.per_channel_mean) {
        println!("mode {n:+}      1-F = {m:.3e}");
    }
    println!("mean         1-F = {:.3e}", out.mean_infidelity);
    Ok(())
}
