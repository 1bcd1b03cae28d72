//! Crosstalk from detuned spectator atoms sharing the cavity mode.
//!
//! The `(N+1)`-qubit channel has `2^N` reflection amplitudes, but for a
//! single-mode cavity they depend only on how many spectators are in `|1⟩`.
//! Sums are therefore regrouped over that count with binomial weights.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::error::{invalid, Error, Result};
use crate::gate::GateOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiAtomScenario {
    pub params: CavityParams,
    pub n_atoms: usize,
    /// Detuning applied to every spectator.
    pub detuning_spectators: f64,
    pub r_m: f64,
    /// 1-based; the regrouped sums make the result independent of it.
    pub target_index: usize,
}

impl MultiAtomScenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_atoms == 0 {
            return Err(invalid("n_atoms", "must be at least 1"));
        }
        if self.n_atoms > 1 && self.detuning_spectators == 0.0 {
            return Err(invalid(
                "detuning_spectators",
                "resonant spectators are a degenerate configuration",
            ));
        }
        if !(self.target_index >= 1 && self.target_index <= self.n_atoms) {
            return Err(invalid("target_index", "must lie in 1..=n_atoms"));
        }
        if !(self.r_m > 0.0 && self.r_m <= 1.0) {
            return Err(invalid("r_m", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Resonant reflection with the target in `j` and `m` spectators in `|1⟩`.
pub fn reflection_multi(s: &MultiAtomScenario, j: u8, m: usize) -> C64 {
    let p = &s.params;
    let g2 = p.g * p.g;
    let denom = C64::from(p.kappa() + j as f64 * g2 / p.gamma)
        + m as f64 * g2 / C64::new(p.gamma, s.detuning_spectators);
    C64::from(1.0) - 2.0 * p.kappa_ex / denom
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// `C(n, m) / 2^n` for all `m`, computed in log space.
pub fn binomial_weights(n: usize) -> Vec<f64> {
    let lf = ln_factorials(n);
    let ln2n = n as f64 * std::f64::consts::LN_2;
    (0..=n)
        .map(|m| (lf[n] - lf[m] - lf[n - m] - ln2n).exp())
        .collect()
}

/// Metrics of the `(N+1)`-qubit channel with complex mirror amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkOutcome {
    pub gate: GateOutcome,
    /// Collective infidelity `1 - F_c^(N)`.
    pub infidelity: f64,
    /// Average single-gate fidelity `[F_c^(N)]^(1/N)`.
    pub per_atom_fidelity: f64,
}

impl CrosstalkOutcome {
    fn new(f_pro: f64, one_minus_l: f64, n_atoms: usize) -> Self {
        let d = 2f64.powi(n_atoms as i32 + 1);
        let gate = GateOutcome::from_process(f_pro, one_minus_l, d);
        let infidelity = if one_minus_l > 0.0 {
            (1.0 / (1.0 + 1.0 / d)) * (1.0 - f_pro / one_minus_l)
        } else {
            1.0
        };
        Self {
            gate,
            infidelity,
            per_atom_fidelity: (1.0 - infidelity).max(0.0).powf(1.0 / n_atoms as f64),
        }
    }
}

/// Binomially regrouped evaluation, O(N).
pub fn crosstalk_fidelity_exact(s: &MultiAtomScenario) -> Result<CrosstalkOutcome> {
    s.validate()?;
    let n = s.n_atoms;
    let w = binomial_weights(n - 1);
    let rm = C64::from(s.r_m);
    let mut leak = 0.0;
    let mut pro = C64::from(0.0);
    for (m, wm) in w.iter().enumerate() {
        let r0 = reflection_multi(s, 0, m);
        let r1 = reflection_multi(s, 1, m);
        leak += wm * (r0.norm_sqr() + r1.norm_sqr());
        pro += (r1 - r0) * *wm;
    }
    let one_minus_l = 0.5 * rm.norm_sqr() + 0.25 * leak;
    let f_pro = (2.0 * rm + pro).norm_sqr() / 16.0;
    Ok(CrosstalkOutcome::new(f_pro, one_minus_l, n))
}

/// Direct enumeration over spectator bit strings for an arbitrary
/// reflection map `r(j_target, spectator_bits)`.
pub fn enumerate_channel<F>(r_m: C64, n_atoms: usize, mut r: F) -> Result<CrosstalkOutcome>
where
    F: FnMut(u8, u64) -> C64,
{
    if n_atoms == 0 || n_atoms > 24 {
        return Err(invalid("n_atoms", "enumeration supports 1..=24 atoms"));
    }
    let strings = 1u64 << (n_atoms - 1);
    let mut leak = 0.0;
    let mut pro = C64::from(0.0);
    for bits in 0..strings {
        let r0 = r(0, bits);
        let r1 = r(1, bits);
        leak += r0.norm_sqr() + r1.norm_sqr();
        pro += r1 - r0;
    }
    let sf = strings as f64;
    let one_minus_l = 0.5 * r_m.norm_sqr() + 0.25 * leak / sf;
    let f_pro = (2.0 * r_m + pro / sf).norm_sqr() / 16.0;
    Ok(CrosstalkOutcome::new(f_pro, one_minus_l, n_atoms))
}

/// Bit-string oracle for the single-mode model.
pub fn crosstalk_fidelity_enumerated(s: &MultiAtomScenario) -> Result<CrosstalkOutcome> {
    s.validate()?;
    enumerate_channel(C64::from(s.r_m), s.n_atoms, |j, bits| {
        reflection_multi(s, j, bits.count_ones() as usize)
    })
}

/// Large-detuning approximation `½(1 + ¾C)(Nγ/Δa)²`.
pub fn crosstalk_fidelity_approx(c_in: f64, n_atoms: usize, delta_a: f64, gamma: f64) -> f64 {
    let x = n_atoms as f64 * gamma / delta_a;
    0.5 * (1.0 + 0.75 * c_in) * x * x
}

/// Spectator detuning at which the approximation reaches `target`.
pub fn required_detuning_approx(c_in: f64, n_atoms: usize, gamma: f64, target: f64) -> f64 {
    n_atoms as f64 * gamma * (0.5 * (1.0 + 0.75 * c_in) / target).sqrt()
}

/// Spectator detuning at which the exact collective infidelity reaches `target`.
pub fn required_detuning_exact(base: &MultiAtomScenario, target: f64) -> Result<f64> {
    let eval = |da: f64| {
        crosstalk_fidelity_exact(&MultiAtomScenario {
            detuning_spectators: da,
            ..*base
        })
        .map(|o| o.infidelity)
    };
    let floor = eval(1e30)?;
    if floor >= target {
        return Err(Error::NoBracket(format!(
            "infidelity floor {floor:e} is above the target {target:e}"
        )));
    }
    let guess =
        required_detuning_approx(base.params.c_in(), base.n_atoms, base.params.gamma, target);
    let (mut lo, mut hi) = (guess / 16.0, guess * 16.0);
    while eval(hi)? > target {
        hi *= 4.0;
    }
    while eval(lo)? < target && lo > 1e-12 * guess {
        lo /= 4.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if eval(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    Ok(hi)
}

/// Detuning requirement expressed two ways: for the collective
/// `(N+1)`-qubit infidelity and for the average per-gate infidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningRequirement {
    pub collective_approx: f64,
    pub collective_exact: f64,
    pub per_atom_approx: f64,
    pub per_atom_exact: f64,
}

pub fn detuning_requirement(base: &MultiAtomScenario, target: f64) -> Result<DetuningRequirement> {
    let n = base.n_atoms as f64;
    let p = &base.params;
    // per-atom target ε means a collective infidelity 1 - (1-ε)^N
    let collective_from_per_atom = 1.0 - (1.0 - target).powf(n);
    Ok(DetuningRequirement {
        collective_approx: required_detuning_approx(p.c_in(), base.n_atoms, p.gamma, target),
        collective_exact: required_detuning_exact(base, target)?,
        per_atom_approx: required_detuning_approx(
            p.c_in(),
            base.n_atoms,
            p.gamma,
            collective_from_per_atom,
        ),
        per_atom_exact: required_detuning_exact(base, collective_from_per_atom)?,
    })
}
