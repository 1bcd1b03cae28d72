//! Parameter schemas, output columns and entry points of every experiment.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Mutex;

use num_complex::Complex64 as C64;

use super::config::{Bound, ParamSpec, Point};
use super::units::Dimension::{Dimensionless as Dl, Frequency, Length, Rate, Time};
use super::Experiment;
use crate::cavity::{
    l_cav_opt, params_from_length, pulse_delays, r_opt, reflection_r0, reflection_r1, CavityParams,
    InterfaceOptics, LengthModel,
};
use crate::crosstalk::{crosstalk_fidelity_approx, crosstalk_fidelity_exact, MultiAtomScenario};
use crate::error::{invalid, Error, Result};
use crate::gate::{
    caps_finite_bandwidth, caps_metrics, default_gaussian_mode, delay_mismatch_infidelity,
    gaussian_mode, min_sigma_t, sigma_t_rule_of_thumb,
};
use crate::protocols::{
    memory_load, spectral_grid, type1, type2, type2_mismatched, type2_pair, type3, NodeConfig,
    PhotonSpectrum, ProtocolResult,
};
use crate::robustness::{robustness_mc, FluctuationSpec, FluctuationTarget, RobustnessScenario};
use crate::source::{characterize, write_kernel, LevelScheme, SourceReport, SourceSpec};
use crate::throughput::{dark_count_error, rate_time_mux, rate_wavelength_mux, MuxScenario};
use crate::transfer::{
    balanced_kappa_ex, central_antinode, gamma_1d, tm_reflectance, wvm_crosstalk, HiddenModel,
    TmAtom, TmCavity, WvmScenario,
};
use crate::SPEED_OF_LIGHT;

const GAMMA: ParamSpec = ParamSpec::num(
    "gamma",
    Rate,
    Bound::Positive,
    "0.24 2pi_MHz",
    "atomic decay rate",
);
const C_IN: ParamSpec =
    ParamSpec::num("c_in", Dl, Bound::Positive, "100", "internal cooperativity");
const KAPPA_IN: ParamSpec = ParamSpec::optional(
    "kappa_in",
    Rate,
    Bound::Positive,
    "internal loss rate; defaults to the delay-matched value",
);
const SIGMA_T: ParamSpec = ParamSpec::num(
    "sigma_t",
    Time,
    Bound::Positive,
    "1 per_gamma",
    "photon pulse width",
);
const P_BR: ParamSpec = ParamSpec::num(
    "p_br",
    Dl,
    Bound::Unit,
    "0.5",
    "branching ratio back to the initial state",
);
const FOCK_CUTOFF: ParamSpec =
    ParamSpec::int("fock_cutoff", 1, "2", "photon-number truncation per mode");
const KERNEL_POINTS: ParamSpec = ParamSpec::int(
    "kernel_points",
    3,
    "201",
    "odd number of kernel grid points",
);
const OMEGA_FSR: ParamSpec = ParamSpec::num(
    "omega_fsr",
    Rate,
    Bound::Positive,
    "2.7 2pi_GHz",
    "free spectral range",
);
const N0: ParamSpec = ParamSpec::int("n0", 1, "81481", "reference longitudinal mode index");
const FINESSE: ParamSpec = ParamSpec::num(
    "finesse_int",
    Dl,
    Bound::Positive,
    "2000",
    "intrinsic finesse 2π/α_loss",
);
const SIGMA0: ParamSpec = ParamSpec::num(
    "sigma0_over_aeff",
    Dl,
    Bound::Positive,
    "0.10",
    "cross-section over mode area",
);
const GROUP_INDEX: ParamSpec = ParamSpec::num("group_index", Dl, Bound::Positive, "1.4", "c / v_g");
const HIDDEN: ParamSpec = ParamSpec::choice(
    "hidden",
    &["sentinel", "removed"],
    "sentinel",
    "model of atoms in |0⟩",
);
const SENTINEL: ParamSpec = ParamSpec::num(
    "sentinel",
    Dl,
    Bound::Positive,
    "1e6",
    "hidden-atom detuning in units of γ",
);

pub(super) fn schema(e: Experiment) -> &'static [ParamSpec] {
    match e {
        Experiment::ReflectionScan => {
            const S: &[ParamSpec] = &[
                GAMMA,
                ParamSpec::num("c_in", Dl, Bound::Positive, "10", "internal cooperativity"),
                KAPPA_IN,
                ParamSpec::optional(
                    "kappa_ex",
                    Rate,
                    Bound::NonNegative,
                    "external rate; defaults to the balanced value",
                ),
                ParamSpec::num(
                    "delta_a",
                    Rate,
                    Bound::Any,
                    "0 rad_s",
                    "atom-cavity detuning",
                ),
                ParamSpec::num("delta", Rate, Bound::Any, "0 rad_s", "probe detuning"),
            ];
            S
        }
        Experiment::LongpulseMetrics => {
            const S: &[ParamSpec] = &[
                GAMMA,
                C_IN,
                ParamSpec::optional(
                    "r_m",
                    Dl,
                    Bound::Unit,
                    "extra mirror reflectivity to evaluate",
                ),
                ParamSpec::optional(
                    "l_cav",
                    Length,
                    Bound::Positive,
                    "cavity length; rates then follow from geometry",
                ),
                SIGMA0,
                GROUP_INDEX,
            ];
            S
        }
        Experiment::BandwidthScan => {
            const S: &[ParamSpec] = &[
                GAMMA,
                C_IN,
                SIGMA_T,
                KAPPA_IN,
                ParamSpec::flag(
                    "delay_compensation",
                    "true",
                    "delay the mirror path by the mean cavity delay",
                ),
                ParamSpec::num(
                    "span",
                    Dl,
                    Bound::Positive,
                    "8",
                    "grid half-width in units of σ_ω",
                ),
                ParamSpec::int("points", 16, "2049", "spectral grid points"),
            ];
            S
        }
        Experiment::Robustness => {
            const S: &[ParamSpec] = &[
                GAMMA,
                C_IN,
                ParamSpec::optional(
                    "sigma_t",
                    Time,
                    Bound::Positive,
                    "pulse width; defaults to the shortest meeting target_infidelity",
                ),
                ParamSpec::num(
                    "target_infidelity",
                    Dl,
                    Bound::Positive,
                    "1e-4",
                    "nominal infidelity used to pick sigma_t",
                ),
                ParamSpec::choice(
                    "fluctuation",
                    &["coupling_g", "cavity_freq", "length"],
                    "coupling_g",
                    "fluctuating quantity",
                ),
                ParamSpec::num(
                    "fwhm",
                    Dl,
                    Bound::NonNegative,
                    "0.2",
                    "fluctuation FWHM (fraction, or units of σ_ω for cavity_freq)",
                ),
                ParamSpec::int("samples", 1, "10000", "Monte-Carlo samples"),
                ParamSpec::flag("records", "false", "write per-sample records"),
            ];
            S
        }
        Experiment::CrosstalkScan => {
            const S: &[ParamSpec] = &[
                GAMMA,
                C_IN,
                ParamSpec::int("n_atoms", 1, "200", "atoms sharing the cavity"),
                ParamSpec::num(
                    "detuning_ratio",
                    Dl,
                    Bound::Positive,
                    "200",
                    "hiding detuning Δ_a / (N_a γ)",
                ),
                KAPPA_IN,
            ];
            S
        }
        Experiment::SourceCharacterize => {
            const S: &[ParamSpec] = &[
                GAMMA,
                ParamSpec::num("c_in", Dl, Bound::Positive, "10", "internal cooperativity"),
                P_BR,
                SIGMA_T,
                ParamSpec::choice(
                    "level_scheme",
                    &["lambda", "entangler"],
                    "lambda",
                    "emitter level scheme",
                ),
                FOCK_CUTOFF,
                KERNEL_POINTS,
                ParamSpec::int(
                    "steps_per_sigma",
                    10,
                    "200",
                    "integrator steps per pulse width",
                ),
                ParamSpec::flag(
                    "write_kernel",
                    "false",
                    "write the g1 kernel next to the table",
                ),
            ];
            S
        }
        Experiment::ProtocolEval => {
            const S: &[ParamSpec] = &[
                ParamSpec::choice(
                    "protocol",
                    &["memory_load", "type1", "type2", "type2_pair", "type3"],
                    "type3",
                    "networking protocol",
                ),
                ParamSpec::choice(
                    "photon",
                    &["source", "ideal"],
                    "source",
                    "simulated emitter or ideal Gaussian photon",
                ),
                GAMMA,
                C_IN,
                ParamSpec::optional(
                    "c_in_b",
                    Dl,
                    Bound::Positive,
                    "cooperativity of node B; defaults to c_in",
                ),
                SIGMA_T,
                P_BR,
                FOCK_CUTOFF,
                KERNEL_POINTS,
                ParamSpec::num(
                    "span",
                    Dl,
                    Bound::Positive,
                    "16",
                    "spectral half-width in units of 1/σ_t",
                ),
                ParamSpec::int("points", 3, "2049", "odd number of spectral points"),
            ];
            S
        }
        Experiment::TmSpectrum => {
            const S: &[ParamSpec] = &[
                GAMMA,
                OMEGA_FSR,
                N0,
                FINESSE,
                SIGMA0,
                GROUP_INDEX,
                ParamSpec::int("n_channels", 0, "10", "atoms, one per mode offset"),
                ParamSpec::optional(
                    "kappa_ex",
                    Rate,
                    Bound::Positive,
                    "external rate; defaults to the balanced value",
                ),
                HIDDEN,
                SENTINEL,
                ParamSpec::num(
                    "delta",
                    Rate,
                    Bound::Any,
                    "0 rad_s",
                    "probe detuning from the reference mode",
                ),
            ];
            S
        }
        Experiment::WvmCrosstalk => {
            const S: &[ParamSpec] = &[
                GAMMA,
                OMEGA_FSR,
                N0,
                FINESSE,
                SIGMA0,
                GROUP_INDEX,
                ParamSpec::int("n_atoms", 1, "10", "atoms"),
                ParamSpec::int("n_channels", 1, "10", "longitudinal modes in use"),
                ParamSpec::int("trials", 1, "50", "random placements"),
                ParamSpec::num(
                    "window_lo",
                    Dl,
                    Bound::Unit,
                    "0.45",
                    "placement window start (fraction of L)",
                ),
                ParamSpec::num(
                    "window_hi",
                    Dl,
                    Bound::Unit,
                    "0.55",
                    "placement window end (fraction of L)",
                ),
                HIDDEN,
                SENTINEL,
                ParamSpec::flag(
                    "balance_kappa_ex",
                    "true",
                    "balance |r0| and |r1| for the centre atom",
                ),
                ParamSpec::flag("records", "false", "write per-target records"),
            ];
            S
        }
        Experiment::RateTables => {
            const S: &[ParamSpec] = &[
                ParamSpec::int("n_atoms", 1, "200", "atoms"),
                ParamSpec::int("n_channels", 1, "1", "wavelength channels"),
                ParamSpec::num(
                    "tau_s",
                    Time,
                    Bound::NonNegative,
                    "100 us",
                    "shuttling time",
                ),
                ParamSpec::num("sigma_t", Time, Bound::Positive, "210 ns", "pulse width"),
                ParamSpec::num(
                    "pulse_spacing",
                    Dl,
                    Bound::Positive,
                    "5",
                    "pulse slot in units of sigma_t",
                ),
                ParamSpec::choice(
                    "p_model",
                    &["fixed", "caps_opt", "caps_conventional", "type2", "type3"],
                    "fixed",
                    "source of the success probability",
                ),
                ParamSpec::num(
                    "p_success",
                    Dl,
                    Bound::Unit,
                    "0.65",
                    "success probability for p_model = fixed",
                ),
                C_IN,
                GAMMA,
                P_BR,
                ParamSpec::num(
                    "r_dark",
                    Frequency,
                    Bound::NonNegative,
                    "0 per_s",
                    "detector dark-count rate",
                ),
            ];
            S
        }
    }
}

pub(super) fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::ReflectionScan => &[
            "re_r0",
            "im_r0",
            "re_r1",
            "im_r1",
            "abs2_r0",
            "abs2_r1",
            "phase_diff_pi",
        ],
        Experiment::LongpulseMetrics => &[
            "r_opt",
            "f_c_conventional",
            "p_conventional",
            "f_c_opt",
            "p_opt",
            "f_c_custom",
            "p_custom",
            "g_rad_s",
            "kappa_in_rad_s",
            "kappa_ex_rad_s",
            "tau0_s",
            "tau1_s",
            "l_cav_opt_m",
        ],
        Experiment::BandwidthScan => &[
            "sigma_t_gamma",
            "infidelity",
            "f_c",
            "p_success",
            "tau0_s",
            "tau1_s",
            "delay_approx",
            "rule_of_thumb_s",
        ],
        Experiment::Robustness => &[
            "sigma_t_s",
            "nominal_infidelity",
            "mean_infidelity",
            "added_infidelity",
            "mean_success",
            "resampled",
        ],
        Experiment::CrosstalkScan => &[
            "delta_a_rad_s",
            "infidelity_exact",
            "infidelity_approx",
            "approx_over_exact",
            "p_success",
            "per_atom_infidelity",
        ],
        Experiment::SourceCharacterize => &[
            "p_gen",
            "lambda_1",
            "lambda_2",
            "lambda_3",
            "lambda_4",
            "purity",
            "target_overlap",
            "emitted",
            "internal_loss",
            "decay_to_ground",
            "residual",
            "max_trace_drift",
        ],
        Experiment::ProtocolEval => &[
            "fidelity",
            "infidelity",
            "p_success",
            "p_gen",
            "purity",
            "p_reference",
        ],
        Experiment::TmSpectrum => &["re_r0", "im_r0", "re_r1", "im_r1", "abs2_r0", "abs2_r1"],
        Experiment::WvmCrosstalk => &[
            "c_in",
            "kappa_ex_rad_s",
            "mean_infidelity",
            "min_channel_infidelity",
            "max_channel_infidelity",
        ],
        Experiment::RateTables => &[
            "p_success",
            "rate_time_mux_per_s",
            "rate_wavelength_mux_per_s",
            "remainder_atoms",
            "dark_count_error",
        ],
    }
}

/// A failure while evaluating one grid point.
#[derive(Debug)]
pub(super) enum PointError {
    Model(Error),
    Io(String),
}

impl From<Error> for PointError {
    fn from(e: Error) -> Self {
        PointError::Model(e)
    }
}

/// Shared state of one run.
pub(super) struct Context {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub stem: String,
    /// Side files written so far, for the metadata sidecar.
    pub side_files: Mutex<Vec<String>>,
    cache: Mutex<HashMap<String, f64>>,
}

impl Context {
    pub fn new(seed: u64, out_dir: PathBuf, stem: String) -> Self {
        Self {
            seed,
            out_dir,
            stem,
            side_files: Mutex::new(Vec::new()),
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn side_path(&self, kind: &str, index: usize, ext: &str) -> (PathBuf, String) {
        let name = format!("{}.{kind}.{index}.{ext}", self.stem);
        (self.out_dir.join(&name), name)
    }

    fn write_side<F>(
        &self,
        kind: &str,
        index: usize,
        ext: &str,
        write: F,
    ) -> std::result::Result<(), PointError>
    where
        F: FnOnce(&std::path::Path) -> std::io::Result<()>,
    {
        let (path, name) = self.side_path(kind, index, ext);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)
                .map_err(|e| PointError::Io(format!("{}: {e}", dir.display())))?;
        }
        write(&path).map_err(|e| PointError::Io(format!("{}: {e}", path.display())))?;
        self.side_files
            .lock()
            .expect("side-file list poisoned")
            .push(name);
        Ok(())
    }
}

fn write_csv<R: serde::Serialize>(path: &std::path::Path, rows: &[R]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// Delay-matched node unless `kappa_in` is given, in which case the coupler
/// is balanced for that loss rate.
fn node_params(p: &Point) -> Result<CavityParams> {
    let (gamma, c) = (p.num("gamma"), p.num("c_in"));
    match p.opt_num("kappa_in") {
        Some(k) => CavityParams::optimal(c, k, gamma),
        None => CavityParams::delay_matched(c, gamma),
    }
}

fn delays_or_nan(params: &CavityParams) -> (f64, f64) {
    pulse_delays(params).unwrap_or((f64::NAN, f64::NAN))
}

pub(super) fn evaluate(
    e: Experiment,
    p: &Point,
    ctx: &Context,
) -> std::result::Result<Vec<f64>, PointError> {
    match e {
        Experiment::ReflectionScan => reflection_scan(p).map_err(Into::into),
        Experiment::LongpulseMetrics => longpulse_metrics(p).map_err(Into::into),
        Experiment::BandwidthScan => bandwidth_scan(p).map_err(Into::into),
        Experiment::Robustness => robustness(p, ctx),
        Experiment::CrosstalkScan => crosstalk_scan(p).map_err(Into::into),
        Experiment::SourceCharacterize => source_characterize(p, ctx),
        Experiment::ProtocolEval => protocol_eval(p).map_err(Into::into),
        Experiment::TmSpectrum => tm_spectrum(p).map_err(Into::into),
        Experiment::WvmCrosstalk => wvm(p, ctx),
        Experiment::RateTables => rate_tables(p, ctx).map_err(Into::into),
    }
}

fn reflection_scan(p: &Point) -> Result<Vec<f64>> {
    let mut params = node_params(p)?.with_delta_a(p.num("delta_a"));
    if let Some(k) = p.opt_num("kappa_ex") {
        params.kappa_ex = k;
        params.validate()?;
    }
    let d = p.num("delta");
    let (r0, r1) = (reflection_r0(&params, d), reflection_r1(&params, d));
    Ok(vec![
        r0.re,
        r0.im,
        r1.re,
        r1.im,
        r0.norm_sqr(),
        r1.norm_sqr(),
        (r1 / r0).arg() / std::f64::consts::PI,
    ])
}

fn length_model(p: &Point) -> LengthModel {
    LengthModel {
        sigma0_over_aeff: p.num("sigma0_over_aeff"),
        v_g: SPEED_OF_LIGHT / p.num("group_index"),
        c: SPEED_OF_LIGHT,
        l_cav: 1.0,
        t_ex: 0.5,
        alpha_loss: 0.5,
        gamma: p.num("gamma"),
    }
}

fn longpulse_metrics(p: &Point) -> Result<Vec<f64>> {
    let (gamma, c) = (p.num("gamma"), p.num("c_in"));
    let model = length_model(p).with_c_in(c);
    let params = match p.opt_num("l_cav") {
        Some(l) => params_from_length(&model.with_length(l).with_optimal_coupler())?,
        None => CavityParams::delay_matched(c, gamma)?,
    };
    let (r0, r1) = (reflection_r0(&params, 0.0), reflection_r1(&params, 0.0));
    let ro = r_opt(params.c_in())?;
    let conv = caps_metrics(C64::from(1.0), r0, r1);
    let opt = caps_metrics(C64::from(ro), r0, r1);
    let custom = p
        .opt_num("r_m")
        .map(|rm| caps_metrics(C64::from(rm), r0, r1));
    let (t0, t1) = delays_or_nan(&params);
    Ok(vec![
        ro,
        conv.f_c,
        conv.p_success,
        opt.f_c,
        opt.p_success,
        custom.map_or(f64::NAN, |g| g.f_c),
        custom.map_or(f64::NAN, |g| g.p_success),
        params.g,
        params.kappa_in,
        params.kappa_ex,
        t0,
        t1,
        l_cav_opt(&model, gamma, c),
    ])
}

fn bandwidth_scan(p: &Point) -> Result<Vec<f64>> {
    let (gamma, c, st) = (p.num("gamma"), p.num("c_in"), p.num("sigma_t"));
    let params = node_params(p)?;
    let (t0, t1) = pulse_delays(&params)?;
    let tau_m = if p.flag("delay_compensation") {
        (0.5 * (t0 + t1)).max(0.0)
    } else {
        0.0
    };
    let optics = InterfaceOptics::new(r_opt(params.c_in())?, tau_m)?;
    let mode = gaussian_mode(st, p.num("span"), p.usize("points"))?;
    let out = caps_finite_bandwidth(&params, &optics, &mode)?;
    Ok(vec![
        st * gamma,
        out.infidelity(),
        out.f_c,
        out.p_success,
        t0,
        t1,
        delay_mismatch_infidelity(t0, t1, st),
        sigma_t_rule_of_thumb(c, gamma),
    ])
}

fn robustness(p: &Point, ctx: &Context) -> std::result::Result<Vec<f64>, PointError> {
    let (gamma, c) = (p.num("gamma"), p.num("c_in"));
    let st = match p.opt_num("sigma_t") {
        Some(s) => s,
        None => min_sigma_t(c, gamma, p.num("target_infidelity"))?,
    };
    let (params, optics) = crate::gate::matched_setup(c, gamma)?;
    let base = RobustnessScenario {
        params,
        optics,
        mode: default_gaussian_mode(st)?,
        sigma_t: st,
    };
    let target = match p.text("fluctuation") {
        "coupling_g" => FluctuationTarget::CouplingG,
        "cavity_freq" => FluctuationTarget::CavityFreq,
        _ => FluctuationTarget::Length,
    };
    let spec = FluctuationSpec {
        target,
        fwhm: p.num("fwhm"),
        samples: p.usize("samples"),
        seed: ctx.seed,
    };
    let out = robustness_mc(&base, &spec)?;
    if p.flag("records") {
        ctx.write_side("samples", p.index, "csv", |path| {
            write_csv(path, &out.records)
        })?;
    }
    let nominal = out.nominal.infidelity();
    Ok(vec![
        st,
        nominal,
        out.mean_infidelity,
        out.mean_infidelity - nominal,
        out.mean_success,
        out.resampled as f64,
    ])
}

fn crosstalk_scan(p: &Point) -> Result<Vec<f64>> {
    let (gamma, n) = (p.num("gamma"), p.usize("n_atoms"));
    let delta_a = p.num("detuning_ratio") * n as f64 * gamma;
    let params = node_params(p)?;
    let s = MultiAtomScenario {
        params,
        n_atoms: n,
        detuning_spectators: delta_a,
        r_m: r_opt(params.c_in())?,
        target_index: 1,
    };
    let exact = crosstalk_fidelity_exact(&s)?;
    let approx = crosstalk_fidelity_approx(params.c_in(), n, delta_a, gamma);
    Ok(vec![
        delta_a,
        exact.infidelity,
        approx,
        approx / exact.infidelity,
        exact.gate.p_success,
        1.0 - exact.per_atom_fidelity,
    ])
}

fn source_spec(p: &Point, c_in: f64, scheme: LevelScheme) -> Result<SourceSpec> {
    let params = CavityParams::delay_matched(c_in, p.num("gamma"))?;
    let st = p.num("sigma_t");
    let mut spec = SourceSpec::standard(params, p.num("p_br"), st, scheme);
    spec.fock_cutoff = p.usize("fock_cutoff");
    spec.kernel_points = p.usize("kernel_points");
    if let Some(steps) = p.opt_num("steps_per_sigma") {
        spec.dt = st / steps;
    }
    spec.validate()?;
    Ok(spec)
}

fn scheme_of(name: &str) -> LevelScheme {
    match name {
        "entangler" => LevelScheme::Entangler4lvl,
        _ => LevelScheme::Lambda3lvl,
    }
}

fn source_characterize(p: &Point, ctx: &Context) -> std::result::Result<Vec<f64>, PointError> {
    let spec = source_spec(p, p.num("c_in"), scheme_of(p.text("level_scheme")))?;
    let r = characterize(&spec)?;
    if p.flag("write_kernel") {
        ctx.write_side("kernel", p.index, "txt", |path| {
            write_kernel(&r.kernel, path)
        })?;
    }
    let lam = |k: usize| r.modes.eigenvalues.get(k).copied().unwrap_or(0.0);
    let b = &r.budget;
    Ok(vec![
        r.modes.p_gen,
        lam(0),
        lam(1),
        lam(2),
        lam(3),
        r.modes.purity,
        r.target_overlap,
        b.emitted,
        b.internal_loss,
        b.decay_to_ground,
        b.residual,
        r.max_trace_drift,
    ])
}

/// Protocol outcome together with source figures `(P_gen, purity)` and the
/// long-pulse reference probability.
fn run_protocol(p: &Point, c_a: f64, c_b: f64) -> Result<(ProtocolResult, f64, f64, f64)> {
    let gamma = p.num("gamma");
    let st = p.num("sigma_t");
    let protocol = p.text("protocol");
    let ideal = p.text("photon") == "ideal";
    let scheme = match protocol {
        "type1" | "type3" => LevelScheme::Entangler4lvl,
        _ => LevelScheme::Lambda3lvl,
    };
    let source = |c: f64| -> Result<SourceReport> { characterize(&source_spec(p, c, scheme)?) };
    let grid = spectral_grid(st, p.num("span"), p.usize("points"))?;

    if protocol == "type1" {
        if ideal {
            return Err(invalid(
                "photon",
                "type1 interferes two emitted photons and needs photon = \"source\"",
            ));
        }
        let (ra, rb) = (source(c_a)?, source(c_b)?);
        let out = type1(&ra.kernel, &rb.kernel)?;
        return Ok((out, ra.modes.p_gen, ra.modes.purity, f64::NAN));
    }

    let (photon, p_gen, purity) = if ideal {
        let spec = PhotonSpectrum::from_mode(&gaussian_mode(st, p.num("span"), p.usize("points"))?);
        (spec, 1.0, 1.0)
    } else {
        let r = source(c_a)?;
        let spec = PhotonSpectrum::from_decomposition(&r.kernel, &r.modes, grid)?;
        (spec, r.modes.p_gen, r.modes.purity)
    };
    let node_a = NodeConfig::matched(c_a, gamma)?;
    let node_b = NodeConfig::matched(c_b, gamma)?;
    let (ra, rb) = (r_opt(c_a)?, r_opt(c_b)?);
    let (out, reference) = match protocol {
        "memory_load" => (memory_load(&node_b, &photon)?, p_gen * rb * rb),
        "type2" => {
            let (a, b) = type2_mismatched(&node_a, &node_b)?;
            (type2(&a, &b, &photon)?, p_gen * ra.min(rb).powi(2))
        }
        "type2_pair" => (type2_pair(&node_a, &node_b, &photon, &photon)?, f64::NAN),
        _ => (type3(&node_b, &photon)?, p_gen * rb * rb),
    };
    Ok((out, p_gen, purity, reference))
}

fn protocol_eval(p: &Point) -> Result<Vec<f64>> {
    let c_a = p.num("c_in");
    let c_b = p.opt_num("c_in_b").unwrap_or(c_a);
    let (out, p_gen, purity, reference) = run_protocol(p, c_a, c_b)?;
    Ok(vec![
        out.fidelity,
        out.infidelity(),
        out.p_success,
        p_gen,
        purity,
        reference,
    ])
}

fn wvm_scenario(
    p: &Point,
    n_atoms: usize,
    n_channels: usize,
    trials: usize,
    seed: u64,
) -> WvmScenario {
    let hidden = match p.text("hidden") {
        "removed" => HiddenModel::Removed,
        _ => HiddenModel::Sentinel(p.num("sentinel")),
    };
    WvmScenario {
        omega_fsr: p.num("omega_fsr"),
        n0: p.int("n0"),
        finesse_int: p.num("finesse_int"),
        gamma: p.num("gamma"),
        sigma0_over_aeff: p.num("sigma0_over_aeff"),
        c_over_vg: p.num("group_index"),
        n_atoms,
        n_channels,
        trials,
        seed,
        window: (
            p.opt_num("window_lo").unwrap_or(0.45),
            p.opt_num("window_hi").unwrap_or(0.55),
        ),
        hidden,
        balance_kappa_ex: true,
    }
}

fn tm_spectrum(p: &Point) -> Result<Vec<f64>> {
    let nch = p.usize("n_channels");
    let s = wvm_scenario(p, nch.max(1), nch.max(1), 1, 0);
    let kappa_ex = match p.opt_num("kappa_ex") {
        Some(k) => k,
        None => balanced_kappa_ex(&s)?,
    };
    let mut cav = TmCavity::from_rates(kappa_ex, s.kappa_in(), s.gamma, s.omega_fsr, s.n0)?;
    cav.hidden = s.hidden;
    let g1d = gamma_1d(s.g(), s.omega_fsr);
    if nch > 0 {
        for n in s.channels() {
            cav.atoms.push(TmAtom {
                x: central_antinode((s.n0 as i64 + n) as u64),
                gamma_1d: g1d,
                delta_a: n as f64 * s.omega_fsr,
            });
        }
    }
    let delta = p.num("delta");
    let r0 = tm_reflectance(&cav, delta, &vec![false; cav.atoms.len()])?;
    let r1 = tm_reflectance(&cav, delta, &vec![true; cav.atoms.len()])?;
    Ok(vec![
        r0.re,
        r0.im,
        r1.re,
        r1.im,
        r0.norm_sqr(),
        r1.norm_sqr(),
    ])
}

#[derive(serde::Serialize)]
struct WvmRow {
    trial: usize,
    channel: i64,
    infidelity: f64,
}

fn wvm(p: &Point, ctx: &Context) -> std::result::Result<Vec<f64>, PointError> {
    let mut s = wvm_scenario(
        p,
        p.usize("n_atoms"),
        p.usize("n_channels"),
        p.usize("trials"),
        ctx.seed,
    );
    s.balance_kappa_ex = p.flag("balance_kappa_ex");
    let out = wvm_crosstalk(&s)?;
    if p.flag("records") {
        let rows: Vec<WvmRow> = out
            .records
            .iter()
            .map(|r| WvmRow {
                trial: r.trial,
                channel: r.channel,
                infidelity: r.infidelity,
            })
            .collect();
        ctx.write_side("records", p.index, "csv", |path| write_csv(path, &rows))?;
    }
    let min = out
        .per_channel_mean
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max = out
        .per_channel_mean
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![out.c_in, out.kappa_ex, out.mean_infidelity, min, max])
}

fn rate_tables(p: &Point, ctx: &Context) -> Result<Vec<f64>> {
    let c = p.num("c_in");
    let p_success = match p.text("p_model") {
        "fixed" => p.num("p_success"),
        "caps_opt" => r_opt(c)?.powi(2),
        "caps_conventional" => {
            let params = CavityParams::optimal(c, 1.0, 1.0)?;
            caps_metrics(
                C64::from(1.0),
                reflection_r0(&params, 0.0),
                reflection_r1(&params, 0.0),
            )
            .p_success
        }
        model => {
            let key = format!(
                "{model}:{c}:{}:{}:{}",
                p.num("sigma_t"),
                p.num("gamma"),
                p.num("p_br")
            );
            let cached = ctx.cache.lock().expect("cache poisoned").get(&key).copied();
            match cached {
                Some(v) => v,
                None => {
                    let v = protocol_probability(p, model, c)?;
                    ctx.cache.lock().expect("cache poisoned").insert(key, v);
                    v
                }
            }
        }
    };
    let s = MuxScenario {
        n_atoms: p.usize("n_atoms"),
        tau_s: p.num("tau_s"),
        sigma_t: p.num("sigma_t"),
        pulse_spacing_factor: p.num("pulse_spacing"),
        p_success,
        n_channels: p.usize("n_channels"),
        r_dark: p.num("r_dark"),
    };
    s.validate()?;
    Ok(vec![
        p_success,
        rate_time_mux(&s),
        rate_wavelength_mux(&s),
        s.remainder_atoms() as f64,
        dark_count_error(s.sigma_t, s.r_dark),
    ])
}

/// End-to-end success probability with the simulated source, at the default
/// source and spectral resolution.
fn protocol_probability(p: &Point, model: &str, c: f64) -> Result<f64> {
    let gamma = p.num("gamma");
    let st = p.num("sigma_t");
    let scheme = if model == "type3" {
        LevelScheme::Entangler4lvl
    } else {
        LevelScheme::Lambda3lvl
    };
    let params = CavityParams::delay_matched(c, gamma)?;
    let r = characterize(&SourceSpec::standard(params, p.num("p_br"), st, scheme))?;
    let photon =
        PhotonSpectrum::from_decomposition(&r.kernel, &r.modes, spectral_grid(st, 16.0, 2049)?)?;
    let node = NodeConfig::matched(c, gamma)?;
    let out = if model == "type3" {
        type3(&node, &photon)?
    } else {
        let (a, b) = type2_mismatched(&node, &node)?;
        type2(&a, &b, &photon)?
    };
    Ok(out.p_success)
}

/// Physical-sanity warnings for one point; they never stop a run.
pub(super) fn warnings(e: Experiment, p: &Point) -> Vec<String> {
    let mut w = Vec::new();
    let pulse_check = match e {
        Experiment::BandwidthScan | Experiment::Robustness => true,
        Experiment::ProtocolEval => true,
        Experiment::RateTables => matches!(p.text("p_model"), "type2" | "type3"),
        _ => false,
    };
    if pulse_check {
        if let Some(st) = p.opt_num("sigma_t") {
            let c = p.opt_num("c_in_b").unwrap_or(p.num("c_in"));
            let rule = sigma_t_rule_of_thumb(c, p.num("gamma"));
            if st < rule {
                w.push(format!(
                    "sigma_t = {st:.4e} s is below the pulse-width criterion 5.2 C_in^-0.6 / gamma = {rule:.4e} s \
                     (C_in = {c}); expect CAPS infidelity above 1e-4"
                ));
            }
        }
    }
    if matches!(e, Experiment::TmSpectrum | Experiment::WvmCrosstalk) {
        let nch = p.opt_num("n_channels").unwrap_or(1.0).max(1.0) as usize;
        let s = wvm_scenario(p, nch, nch, 1, 0);
        let kappa_ex = p
            .opt_num("kappa_ex")
            .unwrap_or(s.kappa_in() * (1.0 + 2.0 * s.c_in()).sqrt());
        let limit = s.omega_fsr / (4.0 * std::f64::consts::PI);
        if kappa_ex >= limit {
            w.push(format!(
                "kappa_ex = {kappa_ex:.4e} rad/s is not below omega_fsr / 4pi = {limit:.4e} rad/s; \
                 the coupler transmittance would exceed 1"
            ));
        }
        if let (Some(lo), Some(hi)) = (p.opt_num("window_lo"), p.opt_num("window_hi")) {
            if lo >= hi {
                w.push(format!("placement window [{lo}, {hi}] is empty"));
            }
        }
    }
    w
}
