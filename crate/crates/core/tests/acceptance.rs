//! One pass/fail line per acceptance criterion. Exits nonzero if any fails.

use std::cell::OnceCell;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use capsnet::cavity::{
    l_cav_opt, pulse_delays, r_opt, reflection_r0, reflection_r1, CavityParams, InterfaceOptics,
    LengthModel,
};
use capsnet::crosstalk::{crosstalk_fidelity_approx, crosstalk_fidelity_exact, MultiAtomScenario};
use capsnet::gate::{
    caps_finite_bandwidth, caps_longpulse, default_gaussian_mode, delay_mismatch_infidelity,
    matched_infidelity, min_sigma_t, sigma_t_rule_of_thumb,
};
use capsnet::harness::{run_str, RunOptions};
use capsnet::protocols::{
    spectral_grid, type1, type2, type2_mismatched, type3, NodeConfig, PhotonSpectrum,
};
use capsnet::robustness::{robustness_mc, FluctuationSpec, FluctuationTarget, RobustnessScenario};
use capsnet::source::{characterize, LevelScheme, SourceReport, SourceSpec};
use capsnet::throughput::{rate_time_mux, MuxScenario};
use capsnet::transfer::{wvm_crosstalk, HiddenModel, TmCavity, WvmScenario};
use capsnet::{two_pi_mhz, SPEED_OF_LIGHT};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn gamma() -> f64 {
    two_pi_mhz(0.24)
}

fn closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [0.0, 1.0, 10.0, 100.0, 400.0] {
        let p = CavityParams::optimal(c, 3.0 * gamma(), gamma())?;
        let s = (1.0 + 2.0 * c).sqrt();
        let r = (s - 1.0) / (s + 1.0);
        let conv = caps_longpulse(&p, &InterfaceOptics::unit());
        worst = worst
            .max((conv.infidelity() - 0.4 / (1.0 + c)).abs())
            .max((conv.p_success - (1.0 + r * r) / 2.0).abs())
            .max((r_opt(c)? - r).abs());
        if c > 0.0 {
            let opt = caps_longpulse(&p, &InterfaceOptics::new(r_opt(c)?, 0.0)?);
            worst = worst
                .max((opt.f_c - 1.0).abs())
                .max((opt.p_success - r * r).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.1e}")))
}

fn cavity_length() -> Outcome {
    let model = |c_in: f64, group_index: f64| {
        LengthModel {
            sigma0_over_aeff: 0.10,
            v_g: SPEED_OF_LIGHT / group_index,
            c: SPEED_OF_LIGHT,
            l_cav: 0.1,
            t_ex: 0.1,
            alpha_loss: 0.01,
            gamma: gamma(),
        }
        .with_c_in(c_in)
    };
    let a = l_cav_opt(&model(100.0, 1.0), gamma(), 100.0);
    let c7 = WvmScenario::reference(2000.0, 1, 0).c_in();
    let b = l_cav_opt(&model(c7, 1.4), gamma(), c7);
    let ok = (a / 0.098 - 1.0).abs() <= 0.01 && (b / 0.11 - 1.0).abs() <= 0.02;
    Ok((
        ok,
        format!(
            "{:.2} cm at C=100, {:.2} cm at C={c7:.1}",
            a * 100.0,
            b * 100.0
        ),
    ))
}

fn bandwidth_rule() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [10.0, 30.0, 100.0] {
        let t = Instant::now();
        let inf = matched_infidelity(c, gamma(), sigma_t_rule_of_thumb(c, gamma()))?;
        let fast = t.elapsed() < Duration::from_secs(1);
        ok &= inf <= 1.5e-4 && fast;
        parts.push(format!("C={c}: {inf:.2e}"));
    }
    Ok((ok, parts.join(", ")))
}

fn delay_approximation() -> Outcome {
    let p = CavityParams::optimal(40.0, 0.2 / 3.0, 1.0)?;
    let (t0, t1) = pulse_delays(&p)?;
    let o = InterfaceOptics::new(r_opt(p.c_in())?, 0.5 * (t0 + t1))?;
    let mut worst: f64 = 0.0;
    for x in [0.05, 0.1, 0.2, 0.3] {
        let st = (t1 - t0).abs() / x;
        let inf = caps_finite_bandwidth(&p, &o, &default_gaussian_mode(st)?)?.infidelity();
        worst = worst.max((inf / delay_mismatch_infidelity(t0, t1, st) - 1.0).abs());
    }
    Ok((
        worst <= 0.1,
        format!("max relative deviation {:.1}%", worst * 100.0),
    ))
}

fn crosstalk() -> Outcome {
    let n = 200;
    let mut worst: f64 = 0.0;
    for c_in in [10.0, 100.0] {
        let params = CavityParams::delay_matched(c_in, gamma())?;
        for k in 0..=10 {
            let ratio = 200.0 * 10f64.powf(k as f64 / 10.0);
            let delta_a = ratio * n as f64 * gamma();
            let s = MultiAtomScenario {
                params,
                n_atoms: n,
                detuning_spectators: delta_a,
                r_m: r_opt(c_in)?,
                target_index: 1,
            };
            let exact = crosstalk_fidelity_exact(&s)?.infidelity;
            let approx = crosstalk_fidelity_approx(c_in, n, delta_a, gamma());
            worst = worst.max((approx / exact - 1.0).abs());
        }
    }
    Ok((
        worst <= 0.2,
        format!("max relative deviation {:.1}%", worst * 100.0),
    ))
}

fn source(
    c_in: f64,
    p_br: f64,
    sigma: f64,
    scheme: LevelScheme,
) -> Result<SourceReport, capsnet::Error> {
    let params = CavityParams::delay_matched(c_in, 1.0)?;
    characterize(&SourceSpec::standard(params, p_br, sigma, scheme))
}

fn photon_source(golden: &SourceReport) -> Outcome {
    let m = &golden.modes;
    let pure = source(10.0, 0.0, 1.0, LevelScheme::Lambda3lvl)?;
    let ok = (m.eigenvalues[0] - 0.68).abs() <= 0.02
        && (m.eigenvalues[1] - 0.025).abs() <= 0.005
        && (m.p_gen - 0.72).abs() <= 0.02
        && pure.modes.purity >= 0.999
        && pure.target_overlap >= 0.999;
    Ok((
        ok,
        format!(
            "l1 {:.4}, l2 {:.4}, P_gen {:.4}; p_br=0 purity {:.5}, overlap {:.5}",
            m.eigenvalues[0], m.eigenvalues[1], m.p_gen, pure.modes.purity, pure.target_overlap
        ),
    ))
}

fn hom_identity(golden: &SourceReport) -> Outcome {
    let f = type1(&golden.kernel, &golden.kernel)?.outcomes[0].fidelity;
    let want = (1.0 + golden.modes.purity) / 2.0;
    let d = (f - want).abs();
    Ok((
        d <= 1e-6,
        format!("F {f:.8} vs (1+V)/2 {want:.8}, diff {d:.1e}"),
    ))
}

fn end_to_end() -> Outcome {
    let (c_in, sigma) = (100.0, 1.0);
    let node = NodeConfig::matched(c_in, 1.0)?;
    let r2 = r_opt(c_in)?.powi(2);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, scheme) in [
        ("type2", LevelScheme::Lambda3lvl),
        ("type3", LevelScheme::Entangler4lvl),
    ] {
        let rep = source(c_in, 0.5, sigma, scheme)?;
        let photon = PhotonSpectrum::from_decomposition(
            &rep.kernel,
            &rep.modes,
            spectral_grid(sigma, 16.0, 2049)?,
        )?;
        let out = if name == "type2" {
            let (a, b) = type2_mismatched(&node, &node)?;
            type2(&a, &b, &photon)?
        } else {
            type3(&node, &photon)?
        };
        let ratio = out.p_success / (rep.modes.p_gen * r2);
        ok &= out.infidelity() <= 3e-4 && (ratio - 1.0).abs() <= 0.02;
        parts.push(format!(
            "{name} 1-F {:.2e}, P/(P_gen r_opt^2) {ratio:.4}",
            out.infidelity()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn transfer_oracle() -> Outcome {
    let fsr = 2.0 * std::f64::consts::PI * 27e9;
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for c_in in [10.0, 100.0] {
        let p = CavityParams::delay_matched(c_in, gamma())?;
        let mut cav = TmCavity::single_atom(&p, fsr, 8148)?;
        cav.hidden = HiddenModel::Removed;
        let t = Instant::now();
        for i in 0..=200 {
            let d = (i as f64 / 20.0 - 5.0) * p.kappa();
            let r1 = cav.reflectance(d, &[true])?;
            let r0 = cav.reflectance(d, &[false])?;
            worst = worst
                .max((r1 - reflection_r1(&p, d)).norm())
                .max((r0 - reflection_r0(&p, d)).norm());
        }
        slowest = slowest.max(t.elapsed());
    }
    Ok((
        worst <= 1e-3 && slowest < Duration::from_secs(1),
        format!("max |r_tm - r| {worst:.1e}, slowest scan {slowest:.1?}"),
    ))
}

fn wavelength_mux() -> Outcome {
    let a = wvm_crosstalk(&WvmScenario::reference(2000.0, 50, 1))?.mean_infidelity;
    let b = wvm_crosstalk(&WvmScenario::reference(100.0, 50, 1))?.mean_infidelity;
    Ok((
        a < 1e-6 && b < 1e-4,
        format!("F_int=2000: {a:.2e}, F_int=100: {b:.2e}"),
    ))
}

fn rates(dir: &std::path::Path) -> Outcome {
    let tm = rate_time_mux(&MuxScenario::new(200, 100e-6, 210e-9, 0.65)?);
    let cfg = r#"
experiment = "rate_tables"
[parameters]
n_atoms = 200
n_channels = 6
tau_s = "100 us"
sigma_t = "210 ns"
p_model = "type3"
c_in = 100
"#;
    let opts = RunOptions {
        workers: Some(1),
        seed: None,
        out_dir: dir.to_path_buf(),
    };
    let s = run_str(cfg, "rates", &opts)?;
    let wm = s.table.column("rate_wavelength_mux_per_s").unwrap()[0];
    let p = s.table.column("p_success").unwrap()[0];
    Ok((
        tm > 4e5 && wm >= 9e5,
        format!("time mux {tm:.3e} /s; 6 channels with type-III P={p:.4}: {wm:.3e} /s"),
    ))
}

fn robustness() -> Outcome {
    let c_in = 100.0;
    let params = CavityParams::delay_matched(c_in, gamma())?;
    let sigma_t = min_sigma_t(c_in, gamma(), 1e-4)?;
    let base = RobustnessScenario {
        params,
        optics: InterfaceOptics::matched(&params)?,
        mode: default_gaussian_mode(sigma_t)?,
        sigma_t,
    };
    let run = |target, fwhm| {
        robustness_mc(
            &base,
            &FluctuationSpec {
                target,
                fwhm,
                samples: 10_000,
                seed: 7,
            },
        )
    };
    let g = run(FluctuationTarget::CouplingG, 0.2)?;
    let j = run(FluctuationTarget::CavityFreq, 0.1)?;
    let added = j.mean_infidelity - j.nominal.infidelity();
    Ok((
        g.mean_infidelity <= 1e-3 && added <= 2e-4,
        format!(
            "g 20%: {:.2e}; jitter 0.1 sigma_w adds {added:.2e}",
            g.mean_infidelity
        ),
    ))
}

fn determinism(dir: &std::path::Path) -> Outcome {
    let configs = [
        r#"
experiment = "robustness"
seed = 11
[parameters]
c_in = 30
sigma_t = "1 per_gamma"
samples = 500
[[sweep]]
name = "fwhm"
start = 0.05
stop = 0.3
points = 4
"#,
        r#"
experiment = "wvm_crosstalk"
seed = 5
[parameters]
trials = 6
[[sweep]]
name = "finesse_int"
start = 100
stop = 1000
points = 3
scale = "log"
"#,
        r#"
experiment = "crosstalk_scan"
[[sweep]]
name = "detuning_ratio"
start = 200
stop = 2000
points = 6
scale = "log"
"#,
    ];
    let mut same = true;
    for (i, cfg) in configs.iter().enumerate() {
        let mut bodies = Vec::new();
        for workers in [1, 4, 4] {
            let out = dir.join(format!("det{i}_{workers}_{}", bodies.len()));
            let opts = RunOptions {
                workers: Some(workers),
                seed: None,
                out_dir: out,
            };
            let s = run_str(cfg, "det", &opts)?;
            bodies.push(std::fs::read(&s.csv_path)?);
        }
        same &= bodies.windows(2).all(|w| w[0] == w[1]);
    }
    Ok((
        same,
        format!(
            "{} scenarios, workers 1 and 4, byte-identical CSV",
            configs.len()
        ),
    ))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    // shared by two criteria; built inside the first one's timer
    let cell: OnceCell<Result<SourceReport, String>> = OnceCell::new();
    let golden = || -> Result<&SourceReport, Box<dyn std::error::Error>> {
        cell.get_or_init(|| {
            source(10.0, 0.5, 1.0, LevelScheme::Lambda3lvl).map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| e.clone().into())
    };

    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let checks: Vec<(&str, u64, Check)> = vec![
        ("closed-form gate metrics", 1, Box::new(closed_forms)),
        ("optimal cavity length", 1, Box::new(cavity_length)),
        ("pulse-width criterion", 3, Box::new(bandwidth_rule)),
        (
            "delay-mismatch approximation",
            1,
            Box::new(delay_approximation),
        ),
        ("time-multiplexing crosstalk", 10, Box::new(crosstalk)),
        (
            "photon source golden point",
            300,
            Box::new(|| photon_source(golden()?)),
        ),
        (
            "type-I equals (1+V)/2",
            60,
            Box::new(|| hom_identity(golden()?)),
        ),
        ("type-II/III end to end", 600, Box::new(end_to_end)),
        (
            "transfer-matrix single-mode limit",
            2,
            Box::new(transfer_oracle),
        ),
        (
            "wavelength-multiplexing crosstalk",
            120,
            Box::new(wavelength_mux),
        ),
        ("multiplexed rates", 600, Box::new(|| rates(dir.path()))),
        ("robustness thresholds", 120, Box::new(robustness)),
        (
            "determinism across workers",
            300,
            Box::new(|| determinism(dir.path())),
        ),
    ];

    let mut failed = 0;
    for (i, (name, budget, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let res = check();
        let el = t.elapsed();
        let (ok, detail) = match res {
            Ok((ok, d)) => (ok, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = el <= Duration::from_secs(*budget);
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        let late = if in_time { "" } else { " over budget" };
        println!(
            "{} {:>2} {name}: {detail} [{el:.2?}{late}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
