//! Transfer-matrix reflection spectrum of a long cavity with one atom per
//! longitudinal mode, for all atoms in |0> and in |1>, scanned across each resonance.
//!
//! cargo run --release --example tm_spectrum -- [n_atoms] [points]

use capsnet::transfer::{
    balanced_kappa_ex, central_antinode, gamma_1d, tm_reflectance, TmAtom, TmCavity, WvmScenario,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let n_atoms = args.first().copied().unwrap_or(2).max(1);
    let points = args.get(1).copied().unwrap_or(13);

    let s = WvmScenario {
        n_atoms,
        n_channels: n_atoms,
        ..WvmScenario::reference(2000.0, 1, 0)
    };
    let kappa_ex = balanced_kappa_ex(&s)?;
    let mut cav = TmCavity::from_rates(kappa_ex, s.kappa_in(), s.gamma, s.omega_fsr, s.n0)?;
    for n in s.channels() {
        cav.atoms.push(TmAtom {
            x: central_antinode((s.n0 as i64 + n) as u64),
            gamma_1d: gamma_1d(s.g(), s.omega_fsr),
            delta_a: n as f64 * s.omega_fsr,
        });
    }
    let off = vec![false; n_atoms];
    let on = vec![true; n_atoms];
    let kappa = kappa_ex + s.kappa_in();
    println!("C_in = {:.1}, kappa_ex = {:.3e} rad/s", s.c_in(), kappa_ex);
    for n in s.channels() {
        println!("\nmode {n:+}");
        println!(
            "{:>10} {:>10} {:>10} {:>10}",
            "delta/k", "|r0|^2", "|r1|^2", "phase/pi"
        );
        for i in 0..points {
            let x = -3.0 + 6.0 * i as f64 / (points - 1).max(1) as f64;
            let d = n as f64 * s.omega_fsr + x * kappa;
            let r0 = tm_reflectance(&cav, d, &off)?;
            let r1 = tm_reflectance(&cav, d, &on)?;
            println!(
                "{x:>10.3} {:>10.4} {:>10.4} {:>10.4}",
                r0.norm_sqr(),
                r1.norm_sqr(),
                (r1 / r0).arg() / std::f64::consts::PI
            );
        }
    }
    Ok(())
}
