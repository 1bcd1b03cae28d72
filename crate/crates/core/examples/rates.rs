//! Multiplexed entanglement rates from a fixed success probability.
//!
//! cargo run --release --example rates -- [p_success]

use capsnet::throughput::{dark_count_error, rate_time_mux, rate_wavelength_mux, MuxScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.65);
    let sigma_t = 210e-9;
    let base = MuxScenario::new(200, 100e-6, sigma_t, p)?;
    println!(
        "time multiplexing, N = 200: {:.3e} /s",
        rate_time_mux(&base)
    );
    for n_ch in [1, 2, 4, 6, 10, 20] {
        let s = base.with_channels(n_ch);
        println!(
            "wavelength multiplexing, {n_ch:>2} channels: {:.3e} /s ({} idle atoms)",
            rate_wavelength_mux(&s),
            s.remainder_atoms()
        );
    }
    println!(
        "dark-count error bound at 100 /s: {:.2e}",
        dark_count_error(sigma_t, 100.0)
    );
    Ok(())
}
