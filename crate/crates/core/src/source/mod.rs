//! Cavity-based single-photon and atom-photon entanglement source.
//!
//! A driven Λ system (or a four-level entangler coupled to two polarisation
//! modes) is integrated with a Lindblad master equation. The emitted field's
//! two-time correlation is assembled by quantum regression in [`kernel`].

pub mod drive;
pub mod kernel;
pub mod master;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::error::{invalid, Error, Result};
use crate::quadrature::simpson_weights;

pub use drive::GaussianDrive;
pub use kernel::{
    autocorrelation, decompose, read_kernel, write_kernel, ModeDecomposition, TemporalKernel,
};
use master::{Liouvillian, Rk4, SparseOp};

/// Trace drift tolerated before integration aborts.
pub const TRACE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelScheme {
    /// `|u⟩ → |e⟩ → |g⟩` with one cavity mode.
    Lambda3lvl,
    /// `|u⟩ → |e⟩ → |0⟩, |1⟩` with two polarisation modes.
    Entangler4lvl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub params: CavityParams,
    pub p_br: f64,
    pub target_sigma_t: f64,
    pub level_scheme: LevelScheme,
    pub fock_cutoff: usize,
    pub time_window: (f64, f64),
    /// Requested step; the integrator may shrink it to land on the kernel grid.
    pub dt: f64,
    pub kernel_points: usize,
}

impl SourceSpec {
    /// Window `[-5σ, 6σ]`, `dt = σ/200`, cutoff 2 and a 201-point kernel grid.
    pub fn standard(
        params: CavityParams,
        p_br: f64,
        sigma_t: f64,
        level_scheme: LevelScheme,
    ) -> Self {
        Self {
            params,
            p_br,
            target_sigma_t: sigma_t,
            level_scheme,
            fock_cutoff: 2,
            time_window: (-5.0 * sigma_t, 6.0 * sigma_t),
            dt: sigma_t / 200.0,
            kernel_points: 201,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(0.0..=1.0).contains(&self.p_br) {
            return Err(invalid("p_br", "must lie in [0, 1]"));
        }
        if !(self.target_sigma_t > 0.0) {
            return Err(invalid("target_sigma_t", "must be positive"));
        }
        if self.fock_cutoff < 1 {
            return Err(invalid("fock_cutoff", "must be at least 1"));
        }
        let (ti, tf) = self.time_window;
        if !(tf > ti) {
            return Err(invalid("time_window", "t_f must exceed t_i"));
        }
        if !(self.dt > 0.0) || self.dt > tf - ti {
            return Err(invalid(
                "dt",
                "must be positive and shorter than the window",
            ));
        }
        if self.kernel_points < 3 || self.kernel_points % 2 == 0 {
            return Err(invalid("kernel_points", "must be odd and at least 3"));
        }
        Ok(())
    }

    /// `(steps, decimation, dt)` with `steps` an exact multiple of the kernel intervals.
    pub fn stepping(&self) -> (usize, usize, f64) {
        let (ti, tf) = self.time_window;
        let intervals = self.kernel_points - 1;
        let dec = ((tf - ti) / self.dt / intervals as f64).ceil().max(1.0) as usize;
        let steps = dec * intervals;
        (steps, dec, (tf - ti) / steps as f64)
    }

    /// Drive inversion; the entangler sees doubled rates.
    pub fn drive(&self) -> Result<GaussianDrive> {
        let p = &self.params;
        let s = match self.level_scheme {
            LevelScheme::Lambda3lvl => 1.0,
            LevelScheme::Entangler4lvl => 2.0,
        };
        GaussianDrive::new(
            s * p.g,
            s * p.kappa(),
            s * p.kappa_ex,
            p.gamma,
            self.target_sigma_t,
        )
    }
}

/// Operators of one level scheme on the truncated atom ⊗ Fock space.
#[derive(Debug, Clone)]
pub struct SourceSystem {
    pub dim: usize,
    pub levels: usize,
    pub modes: usize,
    pub cutoff: usize,
    pub h0: SparseOp,
    pub h_drive: SparseOp,
    pub collapse: Vec<SparseOp>,
    /// Output-coupling operators `√(2κ_ex) c_m`, one per mode.
    pub outputs: Vec<SparseOp>,
    /// Internal-loss operators `√(2κ_in) c_m`.
    pub internal: Vec<SparseOp>,
    /// Spontaneous-decay operators.
    pub decay: Vec<SparseOp>,
}

const U: usize = 0;
const E: usize = 1;

impl SourceSystem {
    pub fn new(spec: &SourceSpec) -> Self {
        let (levels, modes) = match spec.level_scheme {
            LevelScheme::Lambda3lvl => (3, 1),
            LevelScheme::Entangler4lvl => (4, 2),
        };
        let nc = spec.fock_cutoff + 1;
        let photon_states = nc.pow(modes as u32);
        let dim = levels * photon_states;
        let index =
            |a: usize, n: &[usize]| a * photon_states + n.iter().fold(0, |acc, &k| acc * nc + k);
        let photon_configs: Vec<Vec<usize>> = (0..photon_states)
            .map(|mut k| {
                let mut n = vec![0; modes];
                for slot in n.iter_mut().rev() {
                    *slot = k % nc;
                    k /= nc;
                }
                n
            })
            .collect();

        let annihilate = |m: usize| {
            SparseOp::from_entries(
                dim,
                (0..levels).flat_map(|a| {
                    photon_configs.iter().filter(|n| n[m] > 0).map(move |n| {
                        let mut lower = n.clone();
                        lower[m] -= 1;
                        (
                            index(a, &lower),
                            index(a, n),
                            C64::from((n[m] as f64).sqrt()),
                        )
                    })
                }),
            )
        };
        let transition = |to: usize, from: usize| {
            SparseOp::from_entries(
                dim,
                photon_configs
                    .iter()
                    .map(|n| (index(to, n), index(from, n), C64::from(1.0))),
            )
        };

        let p = &spec.params;
        let ground = |m: usize| 2 + m;
        let mut h0 = SparseOp::zero(dim);
        for m in 0..modes {
            let coupling = transition(E, ground(m)).mul(&annihilate(m)).scale(p.g);
            h0 = h0.add(&coupling).add(&coupling.adjoint());
        }
        let h_drive = transition(E, U).add(&transition(U, E));

        let outputs: Vec<SparseOp> = (0..modes)
            .map(|m| annihilate(m).scale((2.0 * p.kappa_ex).sqrt()))
            .collect();
        let internal: Vec<SparseOp> = (0..modes)
            .map(|m| annihilate(m).scale((2.0 * p.kappa_in).sqrt()))
            .collect();
        let per_ground = match spec.level_scheme {
            LevelScheme::Lambda3lvl => 2.0 * (1.0 - spec.p_br) * p.gamma,
            LevelScheme::Entangler4lvl => (1.0 - spec.p_br) * p.gamma,
        };
        let mut decay = vec![transition(U, E).scale((2.0 * spec.p_br * p.gamma).sqrt())];
        decay.extend((0..modes).map(|m| transition(ground(m), E).scale(per_ground.sqrt())));

        let collapse = outputs
            .iter()
            .chain(&internal)
            .chain(&decay)
            .cloned()
            .collect();
        Self {
            dim,
            levels,
            modes,
            cutoff: spec.fock_cutoff,
            h0,
            h_drive,
            collapse,
            outputs,
            internal,
            decay,
        }
    }

    pub fn liouvillian(&self) -> Liouvillian {
        Liouvillian::new(&self.h0, &self.h_drive, &self.collapse)
    }

    /// `|u, vac⟩⟨u, vac|` in row-major form.
    pub fn initial_state(&self) -> Vec<C64> {
        let mut x = vec![C64::from(0.0); self.dim * self.dim];
        x[0] = C64::from(1.0);
        x
    }

    /// Population of each atomic level with photons traced out.
    pub fn level_populations(&self, rho: &[C64]) -> Vec<f64> {
        let per = self.dim / self.levels;
        (0..self.levels)
            .map(|a| {
                (0..per)
                    .map(|k| rho[(a * per + k) * (self.dim + 1)].re)
                    .sum()
            })
            .collect()
    }

    /// Mean intracavity photon number summed over modes.
    pub fn photon_number(&self, rho: &[C64]) -> f64 {
        let nc = self.cutoff + 1;
        let per = self.dim / self.levels;
        (0..self.dim)
            .map(|i| {
                let mut k = i % per;
                let mut n = 0;
                for _ in 0..self.modes {
                    n += k % nc;
                    k /= nc;
                }
                n as f64 * rho[i * (self.dim + 1)].re
            })
            .sum()
    }
}

pub fn trace(rho: &[C64], dim: usize) -> C64 {
    (0..dim).map(|i| rho[i * (dim + 1)]).sum()
}

/// Drive sampled at every half step of the integration grid.
#[derive(Debug, Clone)]
pub struct DriveProfile {
    pub t0: f64,
    pub dt: f64,
    /// `Ω(t0 + k dt/2)`, `k = 0..=2 steps`.
    pub omega: Vec<f64>,
    pub drive: GaussianDrive,
}

impl DriveProfile {
    pub fn times(&self) -> Vec<f64> {
        (0..self.omega.len())
            .map(|k| self.t0 + 0.5 * k as f64 * self.dt)
            .collect()
    }

    fn at_step(&self, n: usize) -> [f64; 3] {
        [
            self.omega[2 * n],
            self.omega[2 * n + 1],
            self.omega[2 * n + 2],
        ]
    }
}

pub fn drive_profile(spec: &SourceSpec) -> Result<DriveProfile> {
    spec.validate()?;
    let drive = spec.drive()?;
    let (steps, _, dt) = spec.stepping();
    let t0 = spec.time_window.0;
    let omega = (0..=2 * steps)
        .map(|k| drive.omega(t0 + 0.5 * k as f64 * dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(DriveProfile {
        t0,
        dt,
        omega,
        drive,
    })
}

/// Integrated loss channels over the window plus residual excitation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBudget {
    pub emitted: f64,
    pub internal_loss: f64,
    pub decay_to_ground: f64,
    pub decay_to_initial: f64,
    /// Population left in `|u⟩`, `|e⟩` and intracavity photons.
    pub residual: f64,
}

impl FluxBudget {
    /// Sums to 1; decay back into `|u⟩` stays inside the system.
    pub fn total(&self) -> f64 {
        self.emitted + self.internal_loss + self.decay_to_ground + self.residual
    }
}

/// Solved master equation: ρ on the kernel grid and the map used for regression.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub system: SourceSystem,
    pub liouvillian: Liouvillian,
    pub profile: DriveProfile,
    pub steps: usize,
    pub decimation: usize,
    /// ρ at every kernel-grid time.
    pub rho_grid: Vec<Vec<C64>>,
    pub max_trace_drift: f64,
    pub budget: FluxBudget,
}

impl Dynamics {
    pub fn kernel_times(&self) -> Vec<f64> {
        (0..self.rho_grid.len())
            .map(|k| self.profile.t0 + (k * self.decimation) as f64 * self.profile.dt)
            .collect()
    }

    pub fn final_state(&self) -> &[C64] {
        self.rho_grid.last().expect("grid is never empty")
    }

    /// Evolves `x` from kernel-grid index `from`, reporting each later grid point.
    pub fn propagate<F>(&self, from: usize, mut x: Vec<C64>, mut visit: F)
    where
        F: FnMut(usize, &[C64]),
    {
        let mut rk = Rk4::new(x.len());
        for n in from * self.decimation..self.steps {
            rk.step(
                &self.liouvillian,
                self.profile.at_step(n),
                self.profile.dt,
                &mut x,
            );
            if (n + 1) % self.decimation == 0 {
                visit((n + 1) / self.decimation, &x);
            }
        }
    }
}

/// Integrates the source from `|u, vac⟩` across the window.
pub fn evolve_master(spec: &SourceSpec, profile: DriveProfile) -> Result<Dynamics> {
    spec.validate()?;
    let system = SourceSystem::new(spec);
    let liouvillian = system.liouvillian();
    let (steps, decimation, dt) = spec.stepping();
    let d = system.dim;

    let rate = |ops: &[SparseOp], rho: &[C64]| -> f64 {
        ops.iter()
            .map(|l| l.adjoint().mul(l).adjoint_trace(rho).re)
            .sum()
    };
    let to_ground = &system.decay[1..];
    let to_initial = &system.decay[..1];
    let mut fluxes = [
        Vec::with_capacity(steps + 1),
        Vec::new(),
        Vec::new(),
        Vec::new(),
    ];
    let mut record = |rho: &[C64]| {
        fluxes[0].push(rate(&system.outputs, rho));
        fluxes[1].push(rate(&system.internal, rho));
        fluxes[2].push(rate(to_ground, rho));
        fluxes[3].push(rate(to_initial, rho));
    };

    let mut x = system.initial_state();
    let mut rho_grid = vec![x.clone()];
    record(&x);
    let mut rk = Rk4::new(x.len());
    let mut max_drift: f64 = 0.0;
    for n in 0..steps {
        rk.step(&liouvillian, profile.at_step(n), dt, &mut x);
        let drift = (trace(&x, d) - 1.0).norm();
        max_drift = max_drift.max(drift);
        if drift > TRACE_TOLERANCE || !drift.is_finite() {
            return Err(Error::TraceDrift {
                drift,
                t: profile.t0 + (n + 1) as f64 * dt,
                dt,
            });
        }
        record(&x);
        if (n + 1) % decimation == 0 {
            rho_grid.push(x.clone());
        }
    }

    // steps = decimation * (odd count - 1) is always even
    let w = simpson_weights(steps + 1, dt)?;
    let integral = |f: &[f64]| f.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let pops = system.level_populations(&x);
    let budget = FluxBudget {
        emitted: integral(&fluxes[0]),
        internal_loss: integral(&fluxes[1]),
        decay_to_ground: integral(&fluxes[2]),
        decay_to_initial: integral(&fluxes[3]),
        residual: pops[U] + pops[E] + system.photon_number(&x),
    };
    Ok(Dynamics {
        system,
        liouvillian,
        profile,
        steps,
        decimation,
        rho_grid,
        max_trace_drift: max_drift,
        budget,
    })
}

/// Convenience: drive, master equation, kernel and decomposition in one call.
#[derive(Debug, Clone)]
pub struct SourceReport {
    pub drive: GaussianDrive,
    pub budget: FluxBudget,
    pub max_trace_drift: f64,
    pub kernel: TemporalKernel,
    pub modes: ModeDecomposition,
    /// `|⟨φ_target|v_1⟩|²` on the kernel grid.
    pub target_overlap: f64,
}

pub fn characterize(spec: &SourceSpec) -> Result<SourceReport> {
    let profile = drive_profile(spec)?;
    let drive = profile.drive;
    let dynamics = evolve_master(spec, profile)?;
    let kernel = autocorrelation(&dynamics)?;
    let modes = decompose(&kernel)?;
    let target: Vec<C64> = kernel
        .times
        .iter()
        .map(|&t| C64::from(drive.target_mode(t)))
        .collect();
    let target_overlap = modes.overlap(0, &target, &kernel.weights);
    Ok(SourceReport {
        drive,
        budget: dynamics.budget,
        max_trace_drift: dynamics.max_trace_drift,
        kernel,
        modes,
        target_overlap,
    })
}
