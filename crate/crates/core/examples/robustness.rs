//! Monte-Carlo gate infidelity when the coupling strength or the cavity
//! frequency fluctuates from shot to shot.
//!
//! cargo run --release --example robustness -- [samples] [seed]

use capsnet::cavity::{CavityParams, InterfaceOptics};
use capsnet::gate::{default_gaussian_mode, min_sigma_t};
use capsnet::robustness::{robustness_mc, FluctuationSpec, FluctuationTarget, RobustnessScenario};
use capsnet::two_pi_mhz;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let samples = args.first().copied().unwrap_or(10_000) as usize;
    let seed = args.get(1).copied().unwrap_or(7);

    let gamma = two_pi_mhz(0.24);
    let c_in = 100.0;
    let params = CavityParams::delay_matched(c_in, gamma)?;
    let sigma_t = min_sigma_t(c_in, gamma, 1e-4)?;
    let base = RobustnessScenario {
        params,
        optics: InterfaceOptics::matched(&params)?,
        mode: default_gaussian_mode(sigma_t)?,
        sigma_t,
    };
    println!(
        "C_in = {c_in}, sigma_t = {:.3}/gamma, {samples} samples",
        sigma_t * gamma
    );

    let runs = [
        (FluctuationTarget::CouplingG, "g", [0.1, 0.2, 0.3]),
        (
            FluctuationTarget::CavityFreq,
            "cavity (sigma_w)",
            [0.05, 0.1, 0.2],
        ),
    ];
    for (target, label, widths) in runs {
        for fwhm in widths {
            let spec = FluctuationSpec {
                target,
                fwhm,
                samples,
                seed,
            };
            let s = robustness_mc(&base, &spec)?;
            println!(
                "{label:<18} fwhm {fwhm:<5} 1-F = {:.3e} (nominal {:.3e}), P = {:.4}",
                s.mean_infidelity,
                s.nominal.infidelity(),
                s.mean_success
            );
        }
    }
    Ok(())
}
