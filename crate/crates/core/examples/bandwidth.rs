//! Finite-bandwidth gate infidelity versus pulse width, with the
//! `5.2 C^-0.6 / γ` rule of thumb and the bisected minimum width.
//!
//! cargo run --release --example bandwidth -- [target]

use capsnet::gate::{matched_infidelity, min_sigma_t, sigma_t_rule_of_thumb};
use capsnet::two_pi_mhz;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-4);
    let gamma = two_pi_mhz(0.24);

    println!(
        "{:>6} {:>14} {:>12} {:>16}",
        "C_in", "rule (1/gamma)", "1-F at rule", "min for target"
    );
    for c in [10.0, 30.0, 100.0, 300.0] {
        let rule = sigma_t_rule_of_thumb(c, gamma);
        let inf = matched_infidelity(c, gamma, rule)?;
        let best = min_sigma_t(c, gamma, target)?;
        println!(
            "{c:>6} {:>14.3} {inf:>12.3e} {:>16.3}",
            rule * gamma,
            best * gamma
        );
    }

    println!("\nC_in = 100");
    for k in 0..9 {
        let st = 0.2 * 2f64.powf(k as f64 / 2.0) / gamma;
        println!(
            "sigma_t = {:>6.3}/gamma  1-F = {:.3e}",
            st * gamma,
            matched_infidelity(100.0, gamma, st)?
        );
    }
    Ok(())
}
