//! Multi-mode cavity spectra from 2×2 transfer matrices, and crosstalk between
//! atoms assigned to different longitudinal modes.
//!
//! Positions are fractions of the cavity length, so `L_cav` itself never
//! enters. The chain is `M_in · M_p · [M_a M_p]… · M_out` and the reflection
//! seen from the input side is `M21 / M11`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::crosstalk::enumerate_channel;
use crate::error::{invalid, Error, Result};

pub type Tm = Matrix2<C64>;

/// Hidden atoms sit this many `γ` away from every mode.
pub const DEFAULT_SENTINEL: f64 = 1e6;
/// `|M11|` below this is treated as a singular chain.
pub const SINGULAR_TOL: f64 = 1e-300;

fn c(re: f64) -> C64 {
    C64::from(re)
}

/// Input coupler `[[1, √(1-T)], [√(1-T), 1]] / √T`.
pub fn tm_mirror_in(t: f64) -> Tm {
    let a = (1.0 - t).sqrt();
    Tm::new(c(1.0), c(a), c(a), c(1.0)) / c(t.sqrt())
}

/// Back mirror `[[1, √(1-T)], [-√(1-T), 1]] / √T`.
pub fn tm_mirror_out(t: f64) -> Tm {
    let b = (1.0 - t).sqrt();
    Tm::new(c(1.0), c(b), c(-b), c(1.0)) / c(t.sqrt())
}

/// Exact determinant of [`tm_mirror_out`], `(2 - T)/T`.
pub fn mirror_out_determinant(t: f64) -> f64 {
    (2.0 - t) / t
}

/// Free propagation over a fraction `dx` of the cavity at detuning `delta`
/// from the reference mode `omega_0`.
pub fn tm_propagation(delta: f64, omega_0: f64, omega_fsr: f64, dx: f64) -> Tm {
    let ph = PI * (delta + omega_0) / omega_fsr * dx;
    let e = C64::from_polar(1.0, -ph);
    Tm::new(e, c(0.0), c(0.0), e.conj())
}

/// [`tm_propagation`] with the reference mode given by its index, so the
/// large phase `π n_0 dx` is reduced modulo 2π without rounding loss.
pub fn tm_propagation_mode(delta: f64, n0: u64, omega_fsr: f64, dx: f64) -> Tm {
    let n = n0 as f64;
    let p = n * dx;
    let err = n.mul_add(dx, -p);
    let ph = PI * (p.rem_euclid(2.0) + err + delta / omega_fsr * dx);
    let e = C64::from_polar(1.0, -ph);
    Tm::new(e, c(0.0), c(0.0), e.conj())
}

/// Linear atomic scatterer with `ζ = Γ_1D / (2(Δ - Δ_a) + iΓ)`.
pub fn tm_atom(gamma_1d: f64, gamma_total: f64, delta: f64, delta_a: f64) -> Tm {
    let z = gamma_1d / C64::new(2.0 * (delta - delta_a), gamma_total);
    let iz = C64::i() * z;
    Tm::new(c(1.0) + iz, iz, -iz, c(1.0) - iz)
}

/// `(r, t)` of a single element seen from the left.
pub fn scattering_amplitudes(m: &Tm) -> (C64, C64) {
    (m[(1, 0)] / m[(0, 0)], c(1.0) / m[(0, 0)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmAtom {
    /// Position as a fraction of the cavity length.
    pub x: f64,
    pub gamma_1d: f64,
    /// Detuning when the atom is in `|1⟩`.
    pub delta_a: f64,
}

/// How atoms in `|0⟩` are represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenModel {
    /// Far-detuned by the given multiple of `γ`.
    Sentinel(f64),
    /// Dropped from the chain.
    Removed,
}

impl Default for HiddenModel {
    fn default() -> Self {
        HiddenModel::Sentinel(DEFAULT_SENTINEL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmCavity {
    pub omega_fsr: f64,
    /// Reference longitudinal mode index, `ω_0 = n_0 ω_FSR`.
    pub n0: u64,
    pub t_ex: f64,
    pub t_in: f64,
    /// Atomic excited-state decay (amplitude convention); `Γ = 2γ`.
    pub gamma: f64,
    pub atoms: Vec<TmAtom>,
    pub hidden: HiddenModel,
}

impl TmCavity {
    /// Empty cavity with couplers mapped from single-mode rates,
    /// `T = 4πκ/ω_FSR`.
    pub fn from_rates(
        kappa_ex: f64,
        kappa_in: f64,
        gamma: f64,
        omega_fsr: f64,
        n0: u64,
    ) -> Result<Self> {
        let cav = Self {
            omega_fsr,
            n0,
            t_ex: 4.0 * PI * kappa_ex / omega_fsr,
            t_in: 4.0 * PI * kappa_in / omega_fsr,
            gamma,
            atoms: Vec::new(),
            hidden: HiddenModel::default(),
        };
        cav.validate()?;
        Ok(cav)
    }

    /// Single atom of `params` at the antinode nearest the cavity centre.
    pub fn single_atom(params: &CavityParams, omega_fsr: f64, n0: u64) -> Result<Self> {
        let mut cav = Self::from_rates(
            params.kappa_ex,
            params.kappa_in,
            params.gamma,
            omega_fsr,
            n0,
        )?;
        cav.atoms.push(TmAtom {
            x: central_antinode(n0),
            gamma_1d: gamma_1d(params.g, omega_fsr),
            delta_a: params.delta_a,
        });
        Ok(cav)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_fsr > 0.0) {
            return Err(invalid("omega_fsr", "must be positive"));
        }
        for (name, t) in [("t_ex", self.t_ex), ("t_in", self.t_in)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(invalid(name, format!("transmittance {t} outside (0, 1)")));
            }
        }
        if !(self.gamma > 0.0) {
            return Err(invalid("gamma", "must be positive"));
        }
        for a in &self.atoms {
            if !(0.0..=1.0).contains(&a.x) {
                return Err(invalid("atoms.x", "positions must lie in [0, 1]"));
            }
            if !(a.gamma_1d >= 0.0) {
                return Err(invalid("atoms.gamma_1d", "must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn omega_0(&self) -> f64 {
        self.n0 as f64 * self.omega_fsr
    }

    /// Chain product with atoms in the given states (`true` is `|1⟩`).
    pub fn chain(&self, delta: f64, states: &[bool]) -> Result<Tm> {
        if states.len() != self.atoms.len() {
            return Err(invalid(
                "atom_states",
                format!("{} states for {} atoms", states.len(), self.atoms.len()),
            ));
        }
        let mut present: Vec<(f64, f64, f64)> = Vec::with_capacity(self.atoms.len());
        for (a, &on) in self.atoms.iter().zip(states) {
            let da = match (on, self.hidden) {
                (true, _) => a.delta_a,
                (false, HiddenModel::Sentinel(k)) => k * self.gamma,
                (false, HiddenModel::Removed) => continue,
            };
            present.push((a.x, a.gamma_1d, da));
        }
        present.sort_by(|p, q| p.0.total_cmp(&q.0));
        let gamma_total = 2.0 * self.gamma;
        let mut m = tm_mirror_in(self.t_ex);
        let mut x = 0.0;
        for (xa, g1d, da) in present {
            m = m
                * tm_propagation_mode(delta, self.n0, self.omega_fsr, xa - x)
                * tm_atom(g1d, gamma_total, delta, da);
            x = xa;
        }
        Ok(
            m * tm_propagation_mode(delta, self.n0, self.omega_fsr, 1.0 - x)
                * tm_mirror_out(self.t_in),
        )
    }

    /// `r_cav = M21 / M11`.
    pub fn reflectance(&self, delta: f64, states: &[bool]) -> Result<C64> {
        let m = self.chain(delta, states)?;
        if m[(0, 0)].norm() < SINGULAR_TOL {
            return Err(Error::SingularChain(m[(0, 0)].norm()));
        }
        Ok(m[(1, 0)] / m[(0, 0)])
    }
}

/// Free-function form of [`TmCavity::reflectance`].
pub fn tm_reflectance(cavity: &TmCavity, delta: f64, atom_states: &[bool]) -> Result<C64> {
    cavity.reflectance(delta, atom_states)
}

/// `Γ_1D = π g² / ω_FSR`.
pub fn gamma_1d(g: f64, omega_fsr: f64) -> f64 {
    PI * g * g / omega_fsr
}

/// Antinode of mode `n0` nearest the cavity centre.
pub fn central_antinode(n0: u64) -> f64 {
    ((n0 / 2) as f64 + 0.5) / n0 as f64
}

/// Antinodes `x = (k + ½)/m` of mode `m` inside `[lo, hi]`.
pub fn antinodes(mode: u64, lo: f64, hi: f64) -> Vec<f64> {
    let m = mode as f64;
    let k0 = (lo * m - 0.5).ceil().max(0.0) as u64;
    let k1 = (hi * m - 0.5).floor().max(0.0) as u64;
    (k0..=k1)
        .map(|k| (k as f64 + 0.5) / m)
        .filter(|x| (lo..=hi).contains(x))
        .collect()
}

/// `(Δ, r)` pairs over a detuning scan.
pub fn tm_spectrum(cavity: &TmCavity, deltas: &[f64], states: &[bool]) -> Result<Vec<(f64, C64)>> {
    deltas
        .iter()
        .map(|&d| cavity.reflectance(d, states).map(|r| (d, r)))
        .collect()
}

/// Wavelength-multiplexed scenario: one or more atoms per longitudinal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WvmScenario {
    pub omega_fsr: f64,
    pub n0: u64,
    /// Intrinsic finesse `2π/α_loss`.
    pub finesse_int: f64,
    pub gamma: f64,
    pub sigma0_over_aeff: f64,
    /// Group index `c/v_g`.
    pub c_over_vg: f64,
    pub n_atoms: usize,
    pub n_channels: usize,
    pub trials: usize,
    pub seed: u64,
    pub window: (f64, f64),
    pub hidden: HiddenModel,
    /// Re-tune `κ_ex` so that `|r_0| = |r_1|` for the centre atom.
    pub balance_kappa_ex: bool,
}

impl WvmScenario {
    /// The reference setting: 2.7 GHz FSR, ytterbium-like linewidth, ten channels.
    pub fn reference(finesse_int: f64, trials: usize, seed: u64) -> Self {
        Self {
            omega_fsr: 2.0 * PI * 2.7e9,
            n0: 81_481,
            finesse_int,
            gamma: 2.0 * PI * 0.24e6,
            sigma0_over_aeff: 0.10,
            c_over_vg: 1.4,
            n_atoms: 10,
            n_channels: 10,
            trials,
            seed,
            window: (0.45, 0.55),
            hidden: HiddenModel::default(),
            balance_kappa_ex: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_fsr > 0.0) || !(self.gamma > 0.0) {
            return Err(invalid("omega_fsr", "rates must be positive"));
        }
        if !(self.finesse_int > 2.0 * PI) {
            return Err(invalid("finesse_int", "round-trip loss must be below 1"));
        }
        if self.n_channels == 0
            || self.n_atoms < self.n_channels
            || self.n_atoms % self.n_channels != 0
        {
            return Err(invalid(
                "n_channels",
                "atoms must split evenly over at least one channel",
            ));
        }
        if self.n_atoms > 24 {
            return Err(invalid(
                "n_atoms",
                "bit-string enumeration supports up to 24 atoms",
            ));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        let (lo, hi) = self.window;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(invalid("window", "need 0 <= lo < hi <= 1"));
        }
        if self.n0 < self.n_channels as u64 {
            return Err(invalid("n0", "reference mode index too small"));
        }
        Ok(())
    }

    /// `C_in = (c/v_g)(σ0/A_eff) F / π`.
    pub fn c_in(&self) -> f64 {
        self.c_over_vg * self.sigma0_over_aeff * self.finesse_int / PI
    }

    /// `κ_in = ω_FSR / (2F)`.
    pub fn kappa_in(&self) -> f64 {
        self.omega_fsr / (2.0 * self.finesse_int)
    }

    pub fn g(&self) -> f64 {
        (2.0 * self.c_in() * self.kappa_in() * self.gamma).sqrt()
    }

    /// Mode offsets `-N/2 .. N/2`.
    pub fn channels(&self) -> Vec<i64> {
        let n = self.n_channels as i64;
        (0..n).map(|k| k - n / 2).collect()
    }

    fn cavity(&self, kappa_ex: f64) -> Result<TmCavity> {
        let mut cav = TmCavity::from_rates(
            kappa_ex,
            self.kappa_in(),
            self.gamma,
            self.omega_fsr,
            self.n0,
        )?;
        cav.hidden = self.hidden;
        Ok(cav)
    }
}

/// External coupling that balances `|r_0| = |r_1|` for a lone resonant atom at
/// the central antinode, by bisection over `[0.7, 1.3]` of the single-mode optimum.
pub fn balanced_kappa_ex(s: &WvmScenario) -> Result<f64> {
    let k0 = s.kappa_in() * (1.0 + 2.0 * s.c_in()).sqrt();
    let g1d = gamma_1d(s.g(), s.omega_fsr);
    let imbalance = |ke: f64| -> Result<f64> {
        let mut cav = s.cavity(ke)?;
        cav.atoms.push(TmAtom {
            x: central_antinode(s.n0),
            gamma_1d: g1d,
            delta_a: 0.0,
        });
        Ok(cav.reflectance(0.0, &[true])?.norm() - cav.reflectance(0.0, &[false])?.norm())
    };
    let (mut lo, mut hi) = (0.7 * k0, 1.3 * k0);
    let (flo, fhi) = (imbalance(lo)?, imbalance(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!(
            "|r1| - |r0| keeps sign {} on [{lo:.4e}, {hi:.4e}]",
            flo.signum()
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if imbalance(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-13 * k0 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WvmRecord {
    pub trial: usize,
    pub channel: i64,
    pub atom: usize,
    pub infidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WvmResult {
    pub kappa_ex: f64,
    pub c_in: f64,
    pub channels: Vec<i64>,
    pub per_channel_mean: Vec<f64>,
    pub mean_infidelity: f64,
    pub records: Vec<WvmRecord>,
}

/// Random antinode placement per trial, then the conditional infidelity of
/// every target against all bit strings of the other atoms.
pub fn wvm_crosstalk(s: &WvmScenario) -> Result<WvmResult> {
    s.validate()?;
    let kappa_ex = if s.balance_kappa_ex {
        balanced_kappa_ex(s)?
    } else {
        s.kappa_in() * (1.0 + 2.0 * s.c_in()).sqrt()
    };
    let base = s.cavity(kappa_ex)?;
    let channels = s.channels();
    let per_channel = s.n_atoms / s.n_channels;
    let g1d = gamma_1d(s.g(), s.omega_fsr);
    let slots: Vec<Vec<f64>> = channels
        .iter()
        .map(|&n| antinodes((s.n0 as i64 + n) as u64, s.window.0, s.window.1))
        .collect();
    for (n, xs) in channels.iter().zip(&slots) {
        if xs.len() < per_channel {
            return Err(invalid(
                "window",
                format!(
                    "mode offset {n} has {} antinodes for {per_channel} atoms",
                    xs.len()
                ),
            ));
        }
    }

    let trials: Vec<Vec<WvmRecord>> = (0..s.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            rng.set_stream(trial as u64);
            let mut cav = base.clone();
            let mut owner = Vec::new();
            for (ci, &n) in channels.iter().enumerate() {
                for k in sample(&mut rng, slots[ci].len(), per_channel) {
                    cav.atoms.push(TmAtom {
                        x: slots[ci][k],
                        gamma_1d: g1d,
                        delta_a: n as f64 * s.omega_fsr,
                    });
                    owner.push(n);
                }
            }
            (0..cav.atoms.len())
                .map(|target| {
                    let infidelity =
                        target_infidelity(&cav, target, owner[target] as f64 * s.omega_fsr)?;
                    Ok(WvmRecord {
                        trial,
                        channel: owner[target],
                        atom: target,
                        infidelity,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let records: Vec<WvmRecord> = trials.into_iter().flatten().collect();
    let per_channel_mean = channels
        .iter()
        .map(|&n| {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.channel == n)
                .map(|r| r.infidelity)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let mean_infidelity = records.iter().map(|r| r.infidelity).sum::<f64>() / records.len() as f64;
    Ok(WvmResult {
        kappa_ex,
        c_in: s.c_in(),
        channels,
        per_channel_mean,
        mean_infidelity,
        records,
    })
}

/// Infidelity of the gate on `target` probed at `delta`. The mirror amplitude
/// is calibrated on the target alone, `r_m = (r_1 - r_0)/2`.
pub fn target_infidelity(cav: &TmCavity, target: usize, delta: f64) -> Result<f64> {
    let alone = TmCavity {
        atoms: vec![cav.atoms[target]],
        ..cav.clone()
    };
    let r_m = (alone.reflectance(delta, &[true])? - alone.reflectance(delta, &[false])?) / 2.0;
    let others: Vec<usize> = (0..cav.atoms.len()).filter(|&k| k != target).collect();
    let mut states = vec![false; cav.atoms.len()];
    let mut failure = None;
    let out = enumerate_channel(r_m, cav.atoms.len(), |j, bits| {
        for (b, &k) in others.iter().enumerate() {
            states[k] = bits >> b & 1 == 1;
        }
        states[target] = j == 1;
        cav.reflectance(delta, &states).unwrap_or_else(|e| {
            failure = Some(e);
            C64::from(0.0)
        })
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out.infidelity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{reflection_r0, reflection_r1};
    use crate::gate::caps_metrics;

    const GAMMA: f64 = 2.0 * PI * 0.24e6;

    #[test]
    fn atom_matrix_properties() {
        assert_eq!(tm_atom(0.0, 1.0, 0.3, 0.0), Tm::identity());
        let m = tm_atom(0.4, 1.0, 0.2, 0.2);
        let (r, t) = scattering_amplitudes(&m);
        assert!((r - C64::from(-0.4 / 1.4)).norm() < 1e-12);
        assert!(r.norm_sqr() + t.norm_sqr() < 1.0);
        assert!((m.determinant() - c(1.0)).norm() < 1e-12);
        let lossless = tm_atom(0.4, 0.0, 0.7, 0.2);
        let (r, t) = scattering_amplitudes(&lossless);
        assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_determinants() {
        for t in [0.01, 0.3, 0.9] {
            assert!((tm_mirror_in(t).determinant() - c(1.0)).norm() < 1e-12);
            assert!((tm_mirror_out(t).determinant() - c(mirror_out_determinant(t))).norm() < 1e-9);
        }
    }

    #[test]
    fn matched_empty_cavity_is_dark_and_periodic() {
        let fsr = 2.0 * PI * 2.7e9;
        let cav = TmCavity::from_rates(1e6, 1e6, GAMMA, fsr, 81_481).unwrap();
        let r = cav.reflectance(0.0, &[]).unwrap();
        assert!(r.norm() < 1e-9, "{r}");
        for d in [0.0, 3e6, 1.7e8] {
            let a = cav.reflectance(d, &[]).unwrap();
            let b = cav.reflectance(d + fsr, &[]).unwrap();
            assert!((a - b).norm() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn single_mode_limit() {
        let fsr = 2.0 * PI * 27e9;
        for (c_in, scale) in [(10.0, 1.0), (100.0, 1.0), (100.0, 0.8), (100.0, 1.2)] {
            let base = CavityParams::delay_matched(c_in, GAMMA).unwrap();
            let p = CavityParams::new(base.g, base.kappa_in, scale * base.kappa_ex, GAMMA).unwrap();
            let cav = TmCavity::single_atom(&p, fsr, 8148).unwrap();
            let k = p.kappa();
            let worst = (0..=200)
                .map(|i| -5.0 * k + 0.05 * k * i as f64)
                .map(|d| {
                    let r1 = (cav.reflectance(d, &[true]).unwrap() - reflection_r1(&p, d)).norm();
                    let r0 = (cav.reflectance(d, &[false]).unwrap() - reflection_r0(&p, d)).norm();
                    r1.max(r0)
                })
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "C = {c_in}, scale {scale}: {worst}");
        }
    }

    #[test]
    fn antinode_enumeration() {
        let xs = antinodes(100, 0.45, 0.55);
        assert_eq!(xs.len(), 10);
        assert!((xs[0] - 45.5 / 100.0).abs() < 1e-15);
        assert!(antinodes(2, 0.45, 0.55).is_empty());
    }

    #[test]
    fn one_channel_is_the_single_atom_gate() {
        let mut s = WvmScenario::reference(2000.0, 2, 7);
        s.n_atoms = 1;
        s.n_channels = 1;
        let out = wvm_crosstalk(&s).unwrap();
        let cav = {
            let mut c = s.cavity(out.kappa_ex).unwrap();
            c.atoms.push(TmAtom {
                x: 0.5,
                gamma_1d: gamma_1d(s.g(), s.omega_fsr),
                delta_a: 0.0,
            });
            c
        };
        // placement does not matter for the mirror-calibrated single atom
        let r0 = cav.reflectance(0.0, &[false]).unwrap();
        let r1 = cav.reflectance(0.0, &[true]).unwrap();
        let gate = caps_metrics((r1 - r0) / 2.0, r0, r1);
        for r in &out.records {
            assert!((r.infidelity - gate.infidelity()).abs() < 1e-9);
        }
    }

    #[test]
    fn one_dip_per_mode() {
        let fsr = 2.0 * PI * 2.7e9;
        let mut cav = TmCavity::from_rates(3e7, 1e7, GAMMA, fsr, 81_481).unwrap();
        cav.atoms.push(TmAtom {
            x: central_antinode(81_481),
            gamma_1d: 1e5,
            delta_a: 0.0,
        });
        let deltas: Vec<f64> = (0..4000)
            .map(|i| -2.5 * fsr + i as f64 * fsr / 1000.0)
            .collect();
        let spec = tm_spectrum(&cav, &deltas, &[false]).unwrap();
        let dips = spec
            .windows(3)
            .filter(|w| w[1].1.norm() < w[0].1.norm() && w[1].1.norm() < w[2].1.norm())
            .count();
        assert_eq!(dips, 4);
        assert!(spec.iter().all(|(_, r)| r.norm_sqr() <= 1.0 + 1e-9));
    }

    #[test]
    fn sentinel_sensitivity() {
        let mut s = WvmScenario::reference(2000.0, 2, 3);
        let base = wvm_crosstalk(&s).unwrap().mean_infidelity;
        s.hidden = HiddenModel::Sentinel(2.0 * DEFAULT_SENTINEL);
        let doubled = wvm_crosstalk(&s).unwrap().mean_infidelity;
        s.hidden = HiddenModel::Removed;
        let removed = wvm_crosstalk(&s).unwrap().mean_infidelity;
        assert!((base - doubled).abs() < 1e-2 * base);
        assert!((base - removed).abs() < 2e-2 * base);
    }
}
