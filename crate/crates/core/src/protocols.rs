//! Memory loading and remote-entanglement protocols built on CAPS gates.
//!
//! Single-photon protocols depend on the photon only through its spectral
//! density `S(Δ)`, so pure modes and mixed kernels share one code path:
//! a kernel is decomposed into temporal modes, each mode is transformed to
//! the detuning grid and the populations weight the densities.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{r_opt, reflection_r0, reflection_r1, CavityParams, InterfaceOptics};
use crate::error::{invalid, Result};
use crate::gate::SpectralMode;
use crate::quadrature::{simpson_weights, uniform_grid};
use crate::source::{decompose, ModeDecomposition, TemporalKernel};

/// Modes whose population falls below this fraction of `P_gen` are dropped.
pub const MODE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub params: CavityParams,
    pub optics: InterfaceOptics,
}

impl NodeConfig {
    pub fn new(params: CavityParams, optics: InterfaceOptics) -> Self {
        Self { params, optics }
    }

    /// Delay-matched cavity with `r_m = r_opt` and the mean cavity delay.
    pub fn matched(c_in: f64, gamma: f64) -> Result<Self> {
        let (params, optics) = crate::gate::matched_setup(c_in, gamma)?;
        Ok(Self { params, optics })
    }

    /// Delay-compensated responses `e^{-iτ_mΔ} r_j(Δ)`.
    fn responses(&self, delta: f64) -> (C64, C64) {
        let ph = C64::new(0.0, -self.optics.tau_m * delta).exp();
        (
            ph * reflection_r0(&self.params, delta),
            ph * reflection_r1(&self.params, delta),
        )
    }

    fn r_m(&self) -> C64 {
        C64::from(self.optics.r_m)
    }
}

/// Photon spectral density `S(Δ)` on a quadrature grid; `∫S` is the photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSpectrum {
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub density: Vec<f64>,
}

impl PhotonSpectrum {
    pub fn from_mode(mode: &SpectralMode) -> Self {
        Self {
            grid: mode.grid.clone(),
            weights: mode.weights.clone(),
            density: mode.density(),
        }
    }

    /// Mode-by-mode transform of a decomposed kernel.
    pub fn from_decomposition(
        kernel: &TemporalKernel,
        modes: &ModeDecomposition,
        grid: Vec<f64>,
    ) -> Result<Self> {
        let weights = simpson_weights(grid.len(), grid[1] - grid[0])?;
        let keep: Vec<usize> = (0..modes.eigenvalues.len())
            .filter(|&k| modes.eigenvalues[k] > MODE_CUTOFF * modes.p_gen)
            .collect();
        let density = grid
            .par_iter()
            .map(|&d| {
                let phase: Vec<C64> = kernel
                    .times
                    .iter()
                    .zip(&kernel.weights)
                    .map(|(&t, &w)| C64::new(0.0, d * t).exp() * w)
                    .collect();
                keep.iter()
                    .map(|&k| {
                        let amp: C64 = modes.modes[k].iter().zip(&phase).map(|(u, p)| u * p).sum();
                        modes.eigenvalues[k] * amp.norm_sqr() / (2.0 * PI)
                    })
                    .sum()
            })
            .collect();
        Ok(Self {
            grid,
            weights,
            density,
        })
    }

    pub fn from_kernel(kernel: &TemporalKernel, grid: Vec<f64>) -> Result<Self> {
        let modes = decompose(kernel)?;
        Self::from_decomposition(kernel, &modes, grid)
    }

    /// Double Fourier transform of the kernel, without decomposition.
    pub fn from_kernel_direct(kernel: &TemporalKernel, grid: Vec<f64>) -> Result<Self> {
        let weights = simpson_weights(grid.len(), grid[1] - grid[0])?;
        let n = kernel.len();
        let density = grid
            .par_iter()
            .map(|&d| {
                let e: Vec<C64> = kernel
                    .times
                    .iter()
                    .zip(&kernel.weights)
                    .map(|(&t, &w)| C64::new(0.0, d * t).exp() * w)
                    .collect();
                let mut s = C64::from(0.0);
                for i in 0..n {
                    let row: C64 = (0..n).map(|j| kernel.values[(i, j)] * e[j]).sum();
                    s += e[i].conj() * row;
                }
                s.re / (2.0 * PI)
            })
            .collect();
        Ok(Self {
            grid,
            weights,
            density,
        })
    }

    pub fn total(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.density)
            .map(|(w, s)| w * s)
            .sum()
    }

    fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .iter()
            .zip(self.weights.iter().zip(&self.density))
            .map(|(&d, (&w, &s))| (d, w * s))
            .filter(|&(_, ws)| ws != 0.0)
    }
}

/// Uniform detuning grid covering `±span/σ_t`.
pub fn spectral_grid(sigma_t: f64, span: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(sigma_t > 0.0) || !(span > 0.0) {
        return Err(invalid("sigma_t", "grid needs positive width and span"));
    }
    if n_points < 3 || n_points % 2 == 0 {
        return Err(invalid("n_points", "must be odd and at least 3"));
    }
    Ok(uniform_grid(-span / sigma_t, span / sigma_t, n_points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub outcome: String,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub fidelity: f64,
    pub p_success: f64,
    pub outcomes: Vec<OutcomeRecord>,
}

impl ProtocolResult {
    /// Aggregates outcomes: probabilities add, fidelities average by probability.
    pub fn from_outcomes(outcomes: Vec<OutcomeRecord>) -> Self {
        let p: f64 = outcomes.iter().map(|o| o.probability).sum();
        let pf: f64 = outcomes.iter().map(|o| o.probability * o.fidelity).sum();
        Self {
            fidelity: if p > 0.0 { pf / p } else { 0.0 },
            p_success: p,
            outcomes,
        }
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Accumulates `∫S |⟨target|ψ⟩|²` and `∫S ‖ψ‖²` for one heralded outcome.
#[derive(Default, Clone, Copy)]
struct Moments {
    overlap: f64,
    norm: f64,
}

impl Moments {
    fn add(&mut self, weight: f64, state: &[C64], target: &[C64]) {
        let ov: C64 = target.iter().zip(state).map(|(t, s)| t.conj() * s).sum();
        self.overlap += weight * ov.norm_sqr();
        self.norm += weight * state.iter().map(|s| s.norm_sqr()).sum::<f64>();
    }

    fn record(&self, outcome: impl Into<String>) -> OutcomeRecord {
        OutcomeRecord {
            outcome: outcome.into(),
            probability: self.norm,
            fidelity: if self.norm > 0.0 {
                self.overlap / self.norm
            } else {
                0.0
            },
        }
    }
}

fn loading_operator(node: &NodeConfig, delta: f64) -> [[C64; 2]; 2] {
    let (r0, r1) = node.responses(delta);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rp = (r1 + r0) * 0.5;
    let rmn = (r1 - r0) * 0.5;
    [[node.r_m() * s, -rp * s], [C64::from(0.0), rmn * s]]
}

/// Heralded loading of a photonic qubit into the node's atom.
///
/// Fidelity is the state fidelity averaged over input qubits,
/// `(2 F_pro / p + 1) / 3`, which is the same for both outcomes.
pub fn memory_load(node: &NodeConfig, photon: &PhotonSpectrum) -> Result<ProtocolResult> {
    node.params.validate()?;
    let mut f_pro = 0.0;
    let mut p = 0.0;
    for (d, ws) in photon.points() {
        let e = loading_operator(node, d);
        f_pro += ws * (e[0][0] + e[1][1]).norm_sqr() / 4.0;
        p += ws
            * (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| e[i][j].norm_sqr())
                .sum::<f64>()
            / 2.0;
    }
    let fidelity = if p > 0.0 {
        (2.0 * f_pro / p + 1.0) / 3.0
    } else {
        0.0
    };
    let outcomes = (0..2)
        .map(|j| OutcomeRecord {
            outcome: format!("{j}"),
            probability: p,
            fidelity,
        })
        .collect();
    Ok(ProtocolResult::from_outcomes(outcomes))
}

const ISQ2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Basis order `|00⟩, |01⟩, |10⟩, |11⟩`.
fn bell(kind: &str) -> [C64; 4] {
    let (a, b) = (C64::from(ISQ2), C64::from(-ISQ2));
    let z = C64::from(0.0);
    match kind {
        "phi+" => [a, z, z, a],
        "phi-" => [a, z, z, b],
        "psi+" => [z, a, a, z],
        _ => [z, a, b, z],
    }
}

/// Type-II: one photon in `|+⟩` reflects off both nodes and is measured.
/// Outcome 0 heralds `Φ⁻`, outcome 1 heralds `Ψ⁻`.
pub fn type2(a: &NodeConfig, b: &NodeConfig, photon: &PhotonSpectrum) -> Result<ProtocolResult> {
    a.params.validate()?;
    b.params.validate()?;
    let targets = [bell("phi-"), bell("psi-")];
    let mut m = [Moments::default(); 2];
    for (d, ws) in photon.points() {
        let (a0, a1) = a.responses(d);
        let (b0, b1) = b.responses(d);
        let (ma, mb) = (a.r_m(), b.r_m());
        for (j, mj) in m.iter_mut().enumerate() {
            let s = if j == 0 { 1.0 } else { -1.0 };
            let state = [
                (a0 * mb + ma * b0 * s) / 4.0,
                (a0 * mb + ma * b1 * s) / 4.0,
                (a1 * mb + ma * b0 * s) / 4.0,
                (a1 * mb + ma * b1 * s) / 4.0,
            ];
            mj.add(ws, &state, &targets[j]);
        }
    }
    Ok(ProtocolResult::from_outcomes(vec![
        m[0].record("0"),
        m[1].record("1"),
    ]))
}

/// Mirror reflectivities that balance two unequal nodes in the long-pulse limit,
/// `r_m^A r_opt^B = r_m^B r_opt^A`: the node with the smaller `r_opt` gets
/// `r_opt^min / r_opt^max` on its mirror and the other keeps 1.
pub fn type2_mismatched(a: &NodeConfig, b: &NodeConfig) -> Result<(NodeConfig, NodeConfig)> {
    let ra = r_opt(a.params.c_in())?;
    let rb = r_opt(b.params.c_in())?;
    let (ma, mb) = if ra >= rb {
        (1.0, rb / ra)
    } else {
        (ra / rb, 1.0)
    };
    let with = |n: &NodeConfig, r_m: f64| -> Result<NodeConfig> {
        Ok(NodeConfig {
            params: n.params,
            optics: InterfaceOptics::new(r_m, n.optics.tau_m)?,
        })
    };
    Ok((with(a, ma)?, with(b, mb)?))
}

/// Type-II′: each node loads one half of a photonic Bell pair.
/// Outcome `(j_A, j_B)` heralds `(|01⟩ + (-1)^{j_A - j_B}|10⟩)/√2`.
pub fn type2_pair(
    a: &NodeConfig,
    b: &NodeConfig,
    photon_a: &PhotonSpectrum,
    photon_b: &PhotonSpectrum,
) -> Result<ProtocolResult> {
    a.params.validate()?;
    b.params.validate()?;
    let pb: Vec<(f64, f64, C64, C64)> = photon_b
        .points()
        .map(|(d, w)| {
            let (r0, r1) = b.responses(d);
            (d, w, (r1 + r0) * 0.5, (r1 - r0) * 0.5)
        })
        .collect();
    let norm = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    let (ma, mb) = (a.r_m(), b.r_m());
    let partial: Vec<[Moments; 4]> = photon_a
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(da, wa)| {
            let (r0, r1) = a.responses(da);
            let (pa, na) = ((r1 + r0) * 0.5, (r1 - r0) * 0.5);
            let mut m = [Moments::default(); 4];
            for &(_, wb, pbv, nbv) in &pb {
                for (k, mk) in m.iter_mut().enumerate() {
                    let s = if k == 0 || k == 3 { 1.0 } else { -1.0 };
                    let state = [
                        -(ma * pbv + mb * pa * s) * norm,
                        ma * nbv * norm,
                        mb * na * s * norm,
                        C64::from(0.0),
                    ];
                    let target = [
                        C64::from(0.0),
                        C64::from(ISQ2),
                        C64::from(ISQ2 * s),
                        C64::from(0.0),
                    ];
                    mk.add(wa * wb, &state, &target);
                }
            }
            m
        })
        .collect();
    let mut total = [Moments::default(); 4];
    for m in &partial {
        for k in 0..4 {
            total[k].overlap += m[k].overlap;
            total[k].norm += m[k].norm;
        }
    }
    let labels = ["00", "01", "10", "11"];
    Ok(ProtocolResult::from_outcomes(
        labels
            .iter()
            .zip(&total)
            .map(|(l, m)| m.record(*l))
            .collect(),
    ))
}

/// Type-III: an atom-photon entangled source at A, memory loading at B.
/// Outcome 0 heralds `Φ⁻`, outcome 1 heralds `Φ⁺`; both have the same statistics.
pub fn type3(b: &NodeConfig, photon: &PhotonSpectrum) -> Result<ProtocolResult> {
    b.params.validate()?;
    let mut overlap = 0.0;
    let mut p = 0.0;
    for (d, ws) in photon.points() {
        let e = loading_operator(b, d);
        overlap += ws * (e[0][0] + e[1][1]).norm_sqr() / 2.0;
        p += ws
            * (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| e[i][j].norm_sqr())
                .sum::<f64>();
    }
    let fidelity = if p > 0.0 { overlap / p } else { 0.0 };
    let outcomes = ["0", "1"]
        .iter()
        .map(|l| OutcomeRecord {
            outcome: l.to_string(),
            probability: p / 2.0,
            fidelity,
        })
        .collect();
    Ok(ProtocolResult::from_outcomes(outcomes))
}

/// Mean-wavepacket overlap `∬ Re[g_A* g_B] / (tr g_A tr g_B)`.
pub fn mean_wavepacket_overlap(ka: &TemporalKernel, kb: &TemporalKernel) -> Result<f64> {
    ka.same_grid(kb)?;
    let n = ka.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += ka.weights[i] * ka.weights[j] * (ka.values[(i, j)].conj() * kb.values[(i, j)]).re;
        }
    }
    let norm = ka.p_gen() * kb.p_gen();
    if !(norm > 0.0) {
        return Err(invalid("kernel", "zero photon number"));
    }
    Ok(s / norm)
}

/// Type-I: two-photon interference of emitters A and B, `F = (1 + M)/2`.
/// Only the fidelity is modelled; the success probability is left at `P_A P_B / 2`.
pub fn type1(ka: &TemporalKernel, kb: &TemporalKernel) -> Result<ProtocolResult> {
    let m = mean_wavepacket_overlap(ka, kb)?;
    let f = (1.0 + m) / 2.0;
    let p = ka.p_gen() * kb.p_gen() / 2.0;
    Ok(ProtocolResult::from_outcomes(vec![
        OutcomeRecord {
            outcome: "psi+".into(),
            probability: p / 2.0,
            fidelity: f,
        },
        OutcomeRecord {
            outcome: "psi-".into(),
            probability: p / 2.0,
            fidelity: f,
        },
    ]))
}
