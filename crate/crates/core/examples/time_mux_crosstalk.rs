//! Crosstalk when many atoms share one cavity and all but the target are
//! hidden by a large detuning.
//!
//! cargo run --release --example time_mux_crosstalk -- [n_atoms]

use capsnet::cavity::{r_opt, CavityParams};
use capsnet::crosstalk::{
    crosstalk_fidelity_approx, crosstalk_fidelity_exact, detuning_requirement, MultiAtomScenario,
};
use capsnet::two_pi_mhz;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let gamma = two_pi_mhz(0.24);

    for c_in in [10.0, 100.0] {
        let params = CavityParams::delay_matched(c_in, gamma)?;
        let mut s = MultiAtomScenario {
            params,
            n_atoms: n,
            detuning_spectators: 0.0,
            r_m: r_opt(c_in)?,
            target_index: 1,
        };
        println!("C_in = {c_in}, N = {n}");
        for ratio in [200.0, 500.0, 1000.0, 2000.0] {
            s.detuning_spectators = ratio * n as f64 * gamma;
            let exact = crosstalk_fidelity_exact(&s)?.infidelity;
            let approx = crosstalk_fidelity_approx(c_in, n, s.detuning_spectators, gamma);
            println!("  Da/(N gamma) = {ratio:>5}  exact {exact:.3e}  approx {approx:.3e}");
        }
        let req = detuning_requirement(&s, 1e-4)?;
        println!("  detuning for 1e-4: {req:?}\n");
    }
    Ok(())
}
