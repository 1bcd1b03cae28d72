//! Cavity length and group delays: the two reflection channels delay the
//! pulse equally only at one length.
//!
//! cargo run --release --example cavity_length -- [c_in] [sigma0_over_aeff]

use capsnet::cavity::{l_cav_opt, params_from_length, pulse_delays, LengthModel};
use capsnet::{two_pi_mhz, SPEED_OF_LIGHT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let c_in = args.first().copied().unwrap_or(100.0);
    let sigma0 = args.get(1).copied().unwrap_or(0.10);
    let gamma = two_pi_mhz(0.24);

    let base = LengthModel {
        sigma0_over_aeff: sigma0,
        v_g: SPEED_OF_LIGHT,
        c: SPEED_OF_LIGHT,
        l_cav: 0.1,
        t_ex: 0.1,
        alpha_loss: 0.01,
        gamma,
    }
    .with_c_in(c_in)
    .with_optimal_coupler();
    let opt = l_cav_opt(&base, gamma, c_in);
    println!(
        "C_in = {c_in}, loss = {:.3e}, T_ex = {:.3e}",
        base.alpha_loss, base.t_ex
    );
    println!("optimal length = {:.2} cm\n", opt * 100.0);
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "L (cm)", "tau0 (ns)", "tau1 (ns)", "diff (ns)"
    );
    for l_cm in [2.0, 5.0, 8.0, 9.0, 10.0, 12.0, 15.0, 20.0, 30.0] {
        let p = params_from_length(&base.with_length(l_cm / 100.0))?;
        let (t0, t1) = pulse_delays(&p)?;
        println!(
            "{l_cm:>8} {:>12.2} {:>12.2} {:>12.2}",
            t0 * 1e9,
            t1 * 1e9,
            (t1 - t0) * 1e9
        );
    }
    Ok(())
}
