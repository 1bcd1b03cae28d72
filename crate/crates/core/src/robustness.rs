//! Monte-Carlo robustness of the CAPS gate under parameter fluctuations.
//!
//! Every sample owns a ChaCha stream keyed by `(seed, sample index)`, samples
//! are collected in index order and reduced sequentially, so summaries do not
//! depend on how the index range is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityParams, InterfaceOptics};
use crate::error::{invalid, Error, Result};
use crate::gate::{
    caps_finite_bandwidth, caps_finite_bandwidth_shifted, GateOutcome, SpectralMode,
};

/// FWHM of a Gaussian in units of its standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
/// Draws allowed per sample before giving up.
pub const RESAMPLE_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationTarget {
    /// Fractional fluctuation of `g`.
    CouplingG,
    /// Cavity-frequency jitter, FWHM in units of `σ_ω`.
    CavityFreq,
    /// Fractional fluctuation of the cavity length.
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSpec {
    pub target: FluctuationTarget,
    pub fwhm: f64,
    pub samples: usize,
    pub seed: u64,
}

impl FluctuationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm >= 0.0) || !self.fwhm.is_finite() {
            return Err(invalid("fwhm", "must be finite and non-negative"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "at least one sample is required"));
        }
        Ok(())
    }
}

/// Nominal configuration the fluctuations act on. Optics stay calibrated to
/// the nominal parameters.
#[derive(Debug, Clone)]
pub struct RobustnessScenario {
    pub params: CavityParams,
    pub optics: InterfaceOptics,
    pub mode: SpectralMode,
    /// Pulse width, used to scale cavity jitter.
    pub sigma_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub drawn_value: f64,
    pub f_c: f64,
    pub p: f64,
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub nominal: GateOutcome,
    /// `1 - Σ p F / Σ p`.
    pub mean_infidelity: f64,
    pub mean_success: f64,
    pub samples: usize,
    pub resampled: usize,
    pub records: Vec<SampleRecord>,
}

fn perturbed(
    base: &RobustnessScenario,
    target: FluctuationTarget,
    draw: f64,
) -> Option<(CavityParams, f64)> {
    let p = base.params;
    match target {
        FluctuationTarget::CouplingG => {
            let g = p.g * (1.0 + draw);
            (g > 0.0).then_some((CavityParams { g, ..p }, 0.0))
        }
        FluctuationTarget::Length => {
            let s = 1.0 + draw;
            (s > 0.0).then_some((
                CavityParams {
                    g: p.g / s.sqrt(),
                    kappa_in: p.kappa_in / s,
                    kappa_ex: p.kappa_ex / s,
                    ..p
                },
                0.0,
            ))
        }
        FluctuationTarget::CavityFreq => Some((p, draw / base.sigma_t)),
    }
}

fn one_sample(base: &RobustnessScenario, spec: &FluctuationSpec, i: usize) -> Result<SampleRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(i as u64);
    let sd = spec.fwhm / FWHM_PER_SIGMA;
    let normal = Normal::new(0.0, sd).map_err(|e| invalid("fwhm", e.to_string()))?;
    for attempt in 0..RESAMPLE_CAP {
        let draw = if sd == 0.0 {
            0.0
        } else {
            normal.sample(&mut rng)
        };
        if let Some((params, shift)) = perturbed(base, spec.target, draw) {
            let out = if shift == 0.0 {
                caps_finite_bandwidth(&params, &base.optics, &base.mode)?
            } else {
                caps_finite_bandwidth_shifted(&params, &base.optics, &base.mode, shift)?
            };
            return Ok(SampleRecord {
                sample_id: i,
                drawn_value: draw,
                f_c: out.f_c,
                p: out.p_success,
                resamples: attempt,
            });
        }
    }
    Err(Error::ResampleCap {
        sample: i,
        attempts: RESAMPLE_CAP,
    })
}

/// Success-weighted Monte-Carlo average of the finite-bandwidth gate.
pub fn robustness_mc(
    base: &RobustnessScenario,
    spec: &FluctuationSpec,
) -> Result<RobustnessSummary> {
    spec.validate()?;
    let nominal = caps_finite_bandwidth(&base.params, &base.optics, &base.mode)?;
    let records = (0..spec.samples)
        .into_par_iter()
        .map(|i| one_sample(base, spec, i))
        .collect::<Result<Vec<_>>>()?;

    let mut pf = 0.0;
    let mut ps = 0.0;
    let mut resampled = 0;
    for r in &records {
        pf += r.p * r.f_c;
        ps += r.p;
        resampled += r.resamples;
    }
    let mean_infidelity = if ps > 0.0 { 1.0 - pf / ps } else { 1.0 };
    Ok(RobustnessSummary {
        nominal,
        mean_infidelity,
        mean_success: ps / spec.samples as f64,
        samples: spec.samples,
        resampled,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{default_gaussian_mode, matched_setup};

    fn scenario() -> RobustnessScenario {
        let (params, optics) = matched_setup(100.0, 1.0).unwrap();
        let st = 5.2 * 100f64.powf(-0.6);
        RobustnessScenario {
            params,
            optics,
            mode: default_gaussian_mode(st).unwrap(),
            sigma_t: st,
        }
    }

    #[test]
    fn zero_width_reproduces_nominal() {
        let s = scenario();
        for target in [
            FluctuationTarget::CouplingG,
            FluctuationTarget::CavityFreq,
            FluctuationTarget::Length,
        ] {
            let spec = FluctuationSpec {
                target,
                fwhm: 0.0,
                samples: 16,
                seed: 3,
            };
            let out = robustness_mc(&s, &spec).unwrap();
            for r in &out.records {
                assert_eq!(r.f_c, out.nominal.f_c);
                assert_eq!(r.p, out.nominal.p_success);
            }
            assert!((out.mean_infidelity - out.nominal.infidelity()).abs() < 1e-14);
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let s = scenario();
        let spec = FluctuationSpec {
            target: FluctuationTarget::CouplingG,
            fwhm: 0.2,
            samples: 64,
            seed: 11,
        };
        let a = robustness_mc(&s, &spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| robustness_mc(&s, &spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn heavy_tails_are_resampled() {
        let s = scenario();
        let spec = FluctuationSpec {
            target: FluctuationTarget::CouplingG,
            fwhm: 2.0,
            samples: 200,
            seed: 5,
        };
        let out = robustness_mc(&s, &spec).unwrap();
        assert!(out.resampled > 0);
        assert!(out.records.iter().all(|r| r.drawn_value > -1.0));
    }
}
