use capsnet::cavity::{
    kappa_ex_opt, r_opt, reflection_r0, reflection_r1, CavityParams, InterfaceOptics,
};
use capsnet::crosstalk::{binomial_weights, crosstalk_fidelity_exact, MultiAtomScenario};
use capsnet::gate::caps_longpulse;
use capsnet::harness::units::{Dimension, Quantity};
use capsnet::throughput::{rate_time_mux, rate_wavelength_mux, MuxScenario};
use capsnet::transfer::{
    central_antinode, gamma_1d, mirror_out_determinant, tm_atom, tm_mirror_out, tm_reflectance,
    TmAtom, TmCavity,
};
use capsnet::two_pi_mhz;
use proptest::prelude::*;

fn gamma() -> f64 {
    two_pi_mhz(0.24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn single_mode_reflection_is_passive(
        c_in in 0.0f64..500.0,
        ex_ratio in 0.01f64..20.0,
        delta in -50.0f64..50.0,
        delta_a in -10.0f64..10.0,
    ) {
        let g = gamma();
        let kin = 10.0 * g;
        let gc = (2.0 * c_in * kin * g).sqrt();
        let p = CavityParams::new(gc, kin, ex_ratio * kin, g).unwrap().with_delta_a(delta_a * g);
        prop_assert!(reflection_r0(&p, delta * g).norm() <= 1.0 + 1e-12);
        prop_assert!(reflection_r1(&p, delta * g).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn matched_coupler_balances_both_channels(c_in in 0.1f64..1000.0, kin in 0.1f64..100.0) {
        let g = gamma();
        let kin = kin * g;
        let kex = kappa_ex_opt(kin, c_in).unwrap();
        let p = CavityParams::optimal(c_in, kin, g).unwrap();
        prop_assert!((p.kappa_ex - kex).abs() <= 1e-12 * kex);
        let r = r_opt(c_in).unwrap();
        prop_assert!((reflection_r0(&p, 0.0).norm() - r).abs() < 1e-10);
        prop_assert!((reflection_r1(&p, 0.0).norm() - r).abs() < 1e-10);
        let out = caps_longpulse(&p, &InterfaceOptics::matched(&p).unwrap());
        prop_assert!(out.infidelity() < 1e-12);
        prop_assert!((out.p_success - r * r).abs() < 1e-10);
    }

    #[test]
    fn conventional_gate_error_is_two_fifths_over_one_plus_c(c_in in 0.0f64..400.0) {
        let p = CavityParams::optimal(c_in, 5.0 * gamma(), gamma()).unwrap();
        let out = caps_longpulse(&p, &InterfaceOptics::unit());
        prop_assert!((out.infidelity() - 0.4 / (1.0 + c_in)).abs() < 1e-12);
    }

    #[test]
    fn atom_matrix_is_unimodular(
        g1d in 0.0f64..10.0,
        gt in 0.1f64..10.0,
        d in -20.0f64..20.0,
        da in -20.0f64..20.0,
    ) {
        let m = tm_atom(g1d, gt, d, da);
        prop_assert!((m.determinant() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn back_mirror_determinant(t in 1e-6f64..0.999) {
        let m = tm_mirror_out(t);
        let want = mirror_out_determinant(t);
        prop_assert!((m.determinant().re - want).abs() < 1e-9 * want);
        prop_assert!(m.determinant().im.abs() < 1e-9 * want);
    }

    #[test]
    fn multimode_reflection_is_passive_and_periodic(
        c_in in 1.0f64..200.0,
        x in -0.5f64..0.5,
        state: bool,
        n_atoms in 1usize..4,
    ) {
        let g = gamma();
        let fsr = 2.0 * std::f64::consts::PI * 27e9;
        let n0 = 8148;
        let p = CavityParams::delay_matched(c_in, g).unwrap();
        let mut cav = TmCavity::from_rates(p.kappa_ex, p.kappa_in, g, fsr, n0).unwrap();
        for k in 0..n_atoms {
            cav.atoms.push(TmAtom {
                x: central_antinode(n0 + k as u64),
                gamma_1d: gamma_1d(p.g, fsr),
                delta_a: k as f64 * fsr,
            });
        }
        let states = vec![state; n_atoms];
        let d = x * fsr;
        let r = tm_reflectance(&cav, d, &states).unwrap();
        prop_assert!(r.norm() <= 1.0 + 1e-9);
        // with no atoms the spectrum repeats every free spectral range
        let mut empty = cav.clone();
        empty.atoms.clear();
        let a = tm_reflectance(&empty, d, &[]).unwrap();
        let b = tm_reflectance(&empty, d + fsr, &[]).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn binomial_weights_are_a_distribution(n in 0usize..400) {
        let w = binomial_weights(n);
        prop_assert_eq!(w.len(), n + 1);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn crosstalk_falls_with_detuning(c_in in 1.0f64..200.0, n in 2usize..300, ratio in 50.0f64..5000.0) {
        let g = gamma();
        let params = CavityParams::delay_matched(c_in, g).unwrap();
        let mut s = MultiAtomScenario {
            params,
            n_atoms: n,
            detuning_spectators: ratio * n as f64 * g,
            r_m: r_opt(c_in).unwrap(),
            target_index: 1,
        };
        let near = crosstalk_fidelity_exact(&s).unwrap().infidelity;
        s.detuning_spectators *= 2.0;
        let far = crosstalk_fidelity_exact(&s).unwrap().infidelity;
        prop_assert!(near >= 0.0 && far >= 0.0);
        prop_assert!(far <= near * (1.0 + 1e-9));
    }

    #[test]
    fn time_mux_rate_is_monotone_and_capped(
        n in 1usize..1000,
        tau_s in 1e-6f64..1e-3,
        sigma_t in 1e-8f64..1e-6,
        p in 0.01f64..1.0,
    ) {
        let a = MuxScenario::new(n, tau_s, sigma_t, p).unwrap();
        let b = MuxScenario::new(n + 1, tau_s, sigma_t, p).unwrap();
        let ra = rate_time_mux(&a);
        prop_assert!(rate_time_mux(&b) >= ra);
        prop_assert!(ra <= p / (a.pulse_spacing_factor * sigma_t));
        prop_assert!(ra <= n as f64 * p / tau_s);
    }

    #[test]
    fn wavelength_mux_scales_with_full_channels(
        per in 1usize..100,
        n_ch in 1usize..20,
        tau_s in 1e-6f64..1e-3,
        sigma_t in 1e-8f64..1e-6,
        p in 0.01f64..1.0,
    ) {
        let one = MuxScenario::new(per, tau_s, sigma_t, p).unwrap();
        let many = MuxScenario::new(per * n_ch, tau_s, sigma_t, p).unwrap().with_channels(n_ch);
        let r = rate_wavelength_mux(&many);
        prop_assert!((r - n_ch as f64 * rate_time_mux(&one)).abs() <= 1e-9 * r);
        let ceiling = (per * n_ch) as f64 * p / (tau_s + one.pulse_spacing_factor * sigma_t);
        prop_assert!(r <= ceiling * (1.0 + 1e-12));
        prop_assert_eq!(rate_wavelength_mux(&one), rate_time_mux(&one));
    }

    #[test]
    fn units_round_trip(x in -1e6f64..1e6) {
        let ns = Quantity::parse(&format!("{x} ns")).unwrap().to_si(Dimension::Time, None).unwrap();
        let us = Quantity::parse(&format!("{} us", x / 1e3)).unwrap().to_si(Dimension::Time, None).unwrap();
        prop_assert!((ns - us).abs() <= 1e-12 * ns.abs().max(1e-30));
        let mhz = Quantity::parse(&format!("{x} 2pi_MHz")).unwrap().to_si(Dimension::Rate, None).unwrap();
        prop_assert!((mhz - two_pi_mhz(x)).abs() <= 1e-12 * mhz.abs().max(1e-30));
        let g = Quantity::parse(&format!("{x} gamma")).unwrap().to_si(Dimension::Rate, Some(gamma())).unwrap();
        prop_assert!((g - x * gamma()).abs() <= 1e-12 * g.abs().max(1e-30));
    }
}
