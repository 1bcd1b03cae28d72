//! Long-pulse CAPS gate: conventional versus reflectivity-matched mirror path,
//! and the single-mode reflection spectrum at one cooperativity.
//!
//! cargo run --release --example caps_gate -- [c_in]

use capsnet::cavity::{r_opt, reflection_r0, reflection_r1, CavityParams, InterfaceOptics};
use capsnet::gate::caps_longpulse;
use capsnet::two_pi_mhz;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c_in: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10.0);
    let gamma = two_pi_mhz(0.24);

    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10}",
        "C_in", "1-F conv", "P conv", "1-F opt", "P opt"
    );
    for c in [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0] {
        let p = CavityParams::delay_matched(c, gamma)?;
        let conv = caps_longpulse(&p, &InterfaceOptics::unit());
        let opt = caps_longpulse(&p, &InterfaceOptics::matched(&p)?);
        println!(
            "{c:>8} {:>10.3e} {:>10.4} {:>10.3e} {:>10.4}",
            1.0 - conv.f_c,
            conv.p_success,
            (1.0 - opt.f_c).max(0.0),
            opt.p_success
        );
    }

    let p = CavityParams::delay_matched(c_in, gamma)?;
    println!("\nC_in = {c_in}, r_opt = {:.4}", r_opt(c_in)?);
    println!(
        "{:>10} {:>8} {:>8} {:>10}",
        "delta/k", "|r0|^2", "|r1|^2", "phase/pi"
    );
    for i in -8..=8 {
        let d = 0.25 * i as f64 * p.kappa();
        let (r0, r1) = (reflection_r0(&p, d), reflection_r1(&p, d));
        println!(
            "{:>10.2} {:>8.4} {:>8.4} {:>10.4}",
            d / p.kappa(),
            r0.norm_sqr(),
            r1.norm_sqr(),
            (r1 / r0).arg() / std::f64::consts::PI
        );
    }
    Ok(())
}
