//! CAPS gate metrics: long-pulse closed forms and finite-bandwidth quadrature.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cavity::{
    pulse_delays, r_opt, reflection_r0, reflection_r1, CavityParams, InterfaceOptics,
};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{half_grid_weights, simpson_weights, uniform_grid};

/// Default half-width of the detuning grid in units of `σ_ω`.
pub const DEFAULT_SPAN: f64 = 8.0;
/// Default number of quadrature nodes.
pub const DEFAULT_POINTS: usize = 2049;
/// Largest change tolerated between a grid and its refinement.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// How a mode was produced; analytic shapes can be resampled on finer grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeShape {
    Gaussian { sigma_t: f64, span: f64 },
    Tabulated,
}

/// Complex spectral amplitude on a detuning grid, with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMode {
    pub grid: Vec<f64>,
    pub amplitude: Vec<C64>,
    pub weights: Vec<f64>,
    pub shape: ModeShape,
}

impl SpectralMode {
    /// Validates ordering, lengths and the sub-normalisation bound.
    pub fn new(grid: Vec<f64>, amplitude: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        if grid.len() != amplitude.len() || grid.len() != weights.len() {
            return Err(invalid(
                "mode",
                "grid, amplitude and weights differ in length",
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("mode.grid", "must be strictly increasing"));
        }
        let m = Self {
            grid,
            amplitude,
            weights,
            shape: ModeShape::Tabulated,
        };
        if m.norm() > 1.0 + 1e-9 {
            return Err(invalid("mode", format!("norm {} exceeds 1", m.norm())));
        }
        Ok(m)
    }

    /// Tabulated mode on a uniform grid with Simpson weights.
    pub fn from_uniform(grid: Vec<f64>, amplitude: Vec<C64>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(invalid("mode.grid", "needs at least 3 points"));
        }
        let w = simpson_weights(grid.len(), grid[1] - grid[0])?;
        Self::new(grid, amplitude, w)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `Σ w |f|²`.
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.amplitude)
            .map(|(w, f)| w * f.norm_sqr())
            .sum()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitude.iter().map(|f| f.norm_sqr()).collect()
    }

    /// Full width at half maximum of `|f|²`, by linear interpolation.
    pub fn fwhm(&self) -> f64 {
        let d = self.density();
        let (imax, &peak) = d
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty mode");
        let half = peak / 2.0;
        let cross = |range: &mut dyn Iterator<Item = usize>| -> f64 {
            let mut prev = imax;
            for i in range {
                if d[i] < half {
                    let t = (d[prev] - half) / (d[prev] - d[i]);
                    return self.grid[prev] + t * (self.grid[i] - self.grid[prev]);
                }
                prev = i;
            }
            self.grid[prev]
        };
        let hi = cross(&mut (imax + 1..d.len()));
        let lo = cross(&mut (0..imax).rev());
        hi - lo
    }

    /// Temporal amplitude `(1/√2π) ∫ f(Δ) e^{-iΔt} dΔ`.
    pub fn temporal(&self, t: f64) -> C64 {
        let s: C64 = self
            .grid
            .iter()
            .zip(&self.amplitude)
            .zip(&self.weights)
            .map(|((d, f), w)| f * C64::new(0.0, -d * t).exp() * *w)
            .sum();
        s / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// Same shape on a grid with twice the resolution, when regenerable.
    pub fn refined(&self) -> Option<SpectralMode> {
        match self.shape {
            ModeShape::Gaussian { sigma_t, span } => {
                gaussian_mode(sigma_t, span, 2 * self.len() - 1).ok()
            }
            ModeShape::Tabulated => None,
        }
    }

    /// Every other node, when that still forms a Simpson grid.
    pub fn coarsened(&self) -> Option<SpectralMode> {
        let h = self.grid[1] - self.grid[0];
        let w = half_grid_weights(self.len(), h)?;
        Some(SpectralMode {
            grid: self.grid.iter().step_by(2).copied().collect(),
            amplitude: self.amplitude.iter().step_by(2).copied().collect(),
            weights: w,
            shape: self.shape,
        })
    }
}

/// Normalised Gaussian spectral mode with `σ_ω = 1/σ_t`, sampled on `±span·σ_ω`.
pub fn gaussian_mode(sigma_t: f64, span: f64, n_points: usize) -> Result<SpectralMode> {
    if !(sigma_t > 0.0) || !sigma_t.is_finite() {
        return Err(invalid("sigma_t", "must be positive"));
    }
    if n_points < 16 {
        return Err(invalid("n_points", "at least 16 points are required"));
    }
    if !(span > 0.0) {
        return Err(invalid("span", "must be positive"));
    }
    let sw = 1.0 / sigma_t;
    let grid = uniform_grid(-span * sw, span * sw, n_points);
    let weights = simpson_weights(n_points, grid[1] - grid[0])?;
    let norm = (std::f64::consts::PI * sw * sw).powf(-0.25);
    let amplitude = grid
        .iter()
        .map(|d| C64::from(norm * (-d * d / (2.0 * sw * sw)).exp()))
        .collect();
    Ok(SpectralMode {
        grid,
        amplitude,
        weights,
        shape: ModeShape::Gaussian { sigma_t, span },
    })
}

/// Default-resolution Gaussian mode.
pub fn default_gaussian_mode(sigma_t: f64) -> Result<SpectralMode> {
    gaussian_mode(sigma_t, DEFAULT_SPAN, DEFAULT_POINTS)
}

/// Conditional fidelity, success probability and leakage of a heralded gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub f_c: f64,
    pub p_success: f64,
    pub leakage: f64,
}

impl GateOutcome {
    /// Builds the outcome from the process fidelity and the success
    /// probability for a `d`-dimensional channel.
    pub fn from_process(f_pro: f64, p: f64, d: f64) -> Self {
        let infid = if p > 0.0 {
            (1.0 / (1.0 + 1.0 / d)) * (1.0 - f_pro / p)
        } else {
            1.0
        };
        let f_c = (1.0 - infid).clamp(0.0, 1.0);
        let p = p.clamp(0.0, 1.0);
        Self {
            f_c,
            p_success: p,
            leakage: 1.0 - p,
        }
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.f_c
    }
}

/// Closed-form metrics from three on-resonance amplitudes.
pub fn caps_metrics(r_m: C64, r0: C64, r1: C64) -> GateOutcome {
    let p = (2.0 * r_m.norm_sqr() + r0.norm_sqr() + r1.norm_sqr()) / 4.0;
    let f_pro = (2.0 * r_m - r0 + r1).norm_sqr() / 16.0;
    GateOutcome::from_process(f_pro, p, 4.0)
}

/// Long-pulse (`Δ = 0`) gate metrics for a general mirror reflectivity.
pub fn caps_longpulse(params: &CavityParams, optics: &InterfaceOptics) -> GateOutcome {
    caps_metrics(
        C64::from(optics.r_m),
        reflection_r0(params, 0.0),
        reflection_r1(params, 0.0),
    )
}

/// Finite-bandwidth metrics for arbitrary response functions. The mode is
/// renormalised; the success probability carries its norm.
pub fn finite_bandwidth_with<F0, F1>(
    mode: &SpectralMode,
    r_m: C64,
    tau_m: f64,
    r0: F0,
    r1: F1,
) -> GateOutcome
where
    F0: Fn(f64) -> C64,
    F1: Fn(f64) -> C64,
{
    let mut n = 0.0;
    let mut o0 = C64::from(0.0);
    let mut o1 = C64::from(0.0);
    let mut n0 = 0.0;
    let mut n1 = 0.0;
    for ((&d, f), &w) in mode.grid.iter().zip(&mode.amplitude).zip(&mode.weights) {
        let s = w * f.norm_sqr();
        if s == 0.0 {
            continue;
        }
        let ph = C64::new(0.0, -tau_m * d).exp();
        let a0 = r0(d);
        let a1 = r1(d);
        n += s;
        o0 += ph * a0 * s;
        o1 += ph * a1 * s;
        n0 += a0.norm_sqr() * s;
        n1 += a1.norm_sqr() * s;
    }
    if n == 0.0 {
        return GateOutcome {
            f_c: 0.0,
            p_success: 0.0,
            leakage: 1.0,
        };
    }
    let (o0, o1, n0, n1) = (o0 / n, o1 / n, n0 / n, n1 / n);
    let p = (2.0 * r_m.norm_sqr() + n0 + n1) / 4.0;
    let f_pro = (2.0 * r_m - o0 + o1).norm_sqr() / 16.0;
    let mut out = GateOutcome::from_process(f_pro, p, 4.0);
    out.p_success = (out.p_success * n).clamp(0.0, 1.0);
    out.leakage = 1.0 - out.p_success;
    out
}

/// Runs an evaluation with the grid-convergence policy: compare against the
/// half grid and, if needed, refine once.
pub fn with_convergence<E>(mode: &SpectralMode, eval: E) -> Result<GateOutcome>
where
    E: Fn(&SpectralMode) -> GateOutcome,
{
    let base = eval(mode);
    let change = |a: &GateOutcome, b: &GateOutcome| {
        (a.f_c - b.f_c).abs().max((a.p_success - b.p_success).abs())
    };
    let coarse_change = mode.coarsened().map(|c| change(&base, &eval(&c)));
    match coarse_change {
        Some(c) if c <= CONVERGENCE_TOL => Ok(base),
        _ => match mode.refined() {
            Some(fine) => {
                let out = eval(&fine);
                let c = change(&base, &out);
                if c <= CONVERGENCE_TOL {
                    Ok(out)
                } else {
                    Err(Error::NonConvergence {
                        change: c,
                        tol: CONVERGENCE_TOL,
                    })
                }
            }
            None => match coarse_change {
                Some(c) => Err(Error::NonConvergence {
                    change: c,
                    tol: CONVERGENCE_TOL,
                }),
                // grids too small to halve are accepted as given
                None => Ok(base),
            },
        },
    }
}

/// Finite-bandwidth CAPS gate with the reflections of `params`.
pub fn caps_finite_bandwidth(
    params: &CavityParams,
    optics: &InterfaceOptics,
    mode: &SpectralMode,
) -> Result<GateOutcome> {
    caps_finite_bandwidth_shifted(params, optics, mode, 0.0)
}

/// As [`caps_finite_bandwidth`] with the cavity resonance displaced by
/// `shift`: the probe sees `Δ - shift` and the atom sits at `-shift`
/// relative to the displaced mode.
pub fn caps_finite_bandwidth_shifted(
    params: &CavityParams,
    optics: &InterfaceOptics,
    mode: &SpectralMode,
    shift: f64,
) -> Result<GateOutcome> {
    params.validate()?;
    if !optics.tau_m.is_finite() {
        return Err(invalid("tau_m", "must be finite"));
    }
    let p = params.with_delta_a(params.delta_a - shift);
    with_convergence(mode, |m| {
        finite_bandwidth_with(
            m,
            C64::from(optics.r_m),
            optics.tau_m,
            |d| reflection_r0(&p, d - shift),
            |d| reflection_r1(&p, d - shift),
        )
    })
}

/// Leading-order infidelity from a residual delay mismatch.
pub fn delay_mismatch_infidelity(tau0: f64, tau1: f64, sigma_t: f64) -> f64 {
    let x = (tau1 - tau0) / sigma_t;
    x * x / 20.0
}

/// Infidelity of the delay-matched, reflectivity-matched gate at `sigma_t`.
pub fn matched_infidelity(c_in: f64, gamma: f64, sigma_t: f64) -> Result<f64> {
    let p = CavityParams::delay_matched(c_in, gamma)?;
    let optics = InterfaceOptics::matched(&p)?;
    let mode = default_gaussian_mode(sigma_t)?;
    Ok(caps_finite_bandwidth(&p, &optics, &mode)?.infidelity())
}

/// Shortest pulse width whose matched-gate infidelity stays below `target`,
/// by bisection in `ln σ_t` to 1e-3 relative.
pub fn min_sigma_t(c_in: f64, gamma: f64, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(invalid("target_infidelity", "must be positive"));
    }
    let f = |s: f64| matched_infidelity(c_in, gamma, s);
    let (mut lo, mut hi) = (1e-2 / gamma, 1e3 / gamma);
    if f(hi)? > target {
        return Err(Error::NoBracket(format!(
            "infidelity above {target:e} even at sigma_t = {hi:e} s"
        )));
    }
    if f(lo)? <= target {
        return Ok(lo);
    }
    while hi / lo > 1.0 + 1e-3 {
        let mid = (lo * hi).sqrt();
        if f(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Empirical pulse-width rule `σ_t γ ≈ 5.2 C^-0.6` near 1e-4 infidelity.
pub fn sigma_t_rule_of_thumb(c_in: f64, gamma: f64) -> f64 {
    5.2 * c_in.powf(-0.6) / gamma
}

/// Matched optics helper used by examples: `r_m = r_opt`, `τ_m` at the mean delay.
pub fn matched_setup(c_in: f64, gamma: f64) -> Result<(CavityParams, InterfaceOptics)> {
    let p = CavityParams::delay_matched(c_in, gamma)?;
    let (t0, t1) = pulse_delays(&p)?;
    Ok((p, InterfaceOptics::new(r_opt(c_in)?, 0.5 * (t0 + t1))?))
}
