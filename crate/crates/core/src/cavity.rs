//! Atom-cavity parameters and single-mode reflection responses.
//!
//! All rates are angular (rad/s). The reflection coefficients follow the
//! input-output convention where `r -> 1` far from resonance.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Atom-cavity parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Atom-photon coupling rate.
    pub g: f64,
    /// Internal loss rate of the cavity field.
    pub kappa_in: f64,
    /// External (output-coupler) rate.
    pub kappa_ex: f64,
    /// Total decay rate of the atomic excited state (amplitude convention).
    pub gamma: f64,
    /// Atom-cavity detuning.
    #[serde(default)]
    pub delta_a: f64,
}

impl CavityParams {
    pub fn new(g: f64, kappa_in: f64, kappa_ex: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            g,
            kappa_in,
            kappa_ex,
            gamma,
            delta_a: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Coupling chosen for a target `C_in` with `kappa_ex` at its optimum.
    pub fn optimal(c_in: f64, kappa_in: f64, gamma: f64) -> Result<Self> {
        if !(c_in >= 0.0) || !c_in.is_finite() {
            return Err(invalid("c_in", "must be finite and non-negative"));
        }
        let g = (2.0 * c_in * kappa_in * gamma).sqrt();
        Self::new(g, kappa_in, kappa_ex_opt(kappa_in, c_in)?, gamma)
    }

    /// Optimal coupler together with `kappa_in/gamma = (1+C)/C`, the
    /// condition under which both atomic states delay the pulse equally.
    pub fn delay_matched(c_in: f64, gamma: f64) -> Result<Self> {
        if !(c_in > 0.0) {
            return Err(invalid("c_in", "delay matching needs C_in > 0"));
        }
        Self::optimal(c_in, gamma * (1.0 + c_in) / c_in, gamma)
    }

    pub fn with_delta_a(mut self, delta_a: f64) -> Self {
        self.delta_a = delta_a;
        self
    }

    /// Checks finiteness and signs. `g = 0` is accepted (uncoupled atom).
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g", self.g),
            ("kappa_in", self.kappa_in),
            ("kappa_ex", self.kappa_ex),
            ("gamma", self.gamma),
            ("delta_a", self.delta_a),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.g < 0.0 {
            return Err(invalid("g", "must be non-negative"));
        }
        if self.kappa_in <= 0.0 {
            return Err(invalid("kappa_in", "must be positive"));
        }
        if self.kappa_ex <= 0.0 {
            return Err(invalid("kappa_ex", "must be positive"));
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", "must be positive"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_in + self.kappa_ex
    }

    /// Internal cooperativity `g^2 / (2 kappa_in gamma)`.
    pub fn c_in(&self) -> f64 {
        self.g * self.g / (2.0 * self.kappa_in * self.gamma)
    }

    /// Cooperativity with respect to the total cavity decay.
    pub fn c_total(&self) -> f64 {
        self.g * self.g / (2.0 * self.kappa() * self.gamma)
    }
}

/// Mirror path of the interface: amplitude reflectivity and delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceOptics {
    pub r_m: f64,
    pub tau_m: f64,
}

impl InterfaceOptics {
    pub fn new(r_m: f64, tau_m: f64) -> Result<Self> {
        if !(r_m > 0.0 && r_m <= 1.0) {
            return Err(invalid("r_m", "must lie in (0, 1]"));
        }
        if !(tau_m >= 0.0) || !tau_m.is_finite() {
            return Err(invalid("tau_m", "must be finite and non-negative"));
        }
        Ok(Self { r_m, tau_m })
    }

    /// Plain mirror, no delay.
    pub fn unit() -> Self {
        Self {
            r_m: 1.0,
            tau_m: 0.0,
        }
    }

    /// Reflectivity matched to `r_opt` and delay set to the mean cavity delay.
    pub fn matched(params: &CavityParams) -> Result<Self> {
        let (t0, t1) = pulse_delays(params)?;
        Self::new(r_opt(params.c_in())?, (0.5 * (t0 + t1)).max(0.0))
    }
}

/// Bare-cavity reflection (atom in the uncoupled state).
pub fn reflection_r0(p: &CavityParams, delta: f64) -> C64 {
    let id = C64::new(0.0, delta);
    (C64::from(p.kappa_in - p.kappa_ex) - id) / (C64::from(p.kappa()) - id)
}

/// Reflection with the atom in the coupled state.
pub fn reflection_r1(p: &CavityParams, delta: f64) -> C64 {
    let id = C64::new(0.0, delta);
    let atom = C64::new(p.gamma, p.delta_a - delta);
    let g2 = C64::from(p.g * p.g);
    let num = (C64::from(p.kappa_in - p.kappa_ex) - id) * atom + g2;
    let den = (C64::from(p.kappa()) - id) * atom + g2;
    num / den
}

/// Reflection for atomic state `j` (0 or 1).
pub fn reflection(p: &CavityParams, j: u8, delta: f64) -> C64 {
    if j == 0 {
        reflection_r0(p, delta)
    } else {
        reflection_r1(p, delta)
    }
}

/// External coupling that balances `|r0(0)| = |r1(0)|`.
pub fn kappa_ex_opt(kappa_in: f64, c_in: f64) -> Result<f64> {
    if !(kappa_in > 0.0) || !kappa_in.is_finite() {
        return Err(invalid("kappa_in", "must be positive"));
    }
    if !(c_in >= 0.0) || !c_in.is_finite() {
        return Err(invalid("c_in", "must be non-negative"));
    }
    Ok(kappa_in * (1.0 + 2.0 * c_in).sqrt())
}

/// Reflectivity magnitude at the balanced coupling.
pub fn r_opt(c_in: f64) -> Result<f64> {
    if !(c_in >= 0.0) || c_in.is_nan() {
        return Err(invalid("c_in", "must be non-negative"));
    }
    if c_in.is_infinite() {
        return Ok(1.0);
    }
    Ok(1.0 - 2.0 / (1.0 + (1.0 + 2.0 * c_in).sqrt()))
}

/// Group delays `(tau_0, tau_1)` of the two reflection channels at `Δ = 0`.
///
/// Evaluated as `Re[-i r_j'(0) / r_j(0)]`, which reduces to the closed forms
/// `2κex/(κex²-κin²)` and its atom-loaded counterpart when `Δa = 0`.
pub fn pulse_delays(p: &CavityParams) -> Result<(f64, f64)> {
    p.validate()?;
    let a = C64::from(p.kappa_in - p.kappa_ex);
    let b = C64::from(p.kappa());
    let scale = p.kappa();

    // bare cavity: N = a - iΔ, D = b - iΔ
    if a.norm() <= 1e-12 * scale {
        return Err(Error::Domain(
            "tau_0 is singular at kappa_ex = kappa_in (r_0(0) = 0)".into(),
        ));
    }
    let tau0 = (-C64::i() * (-C64::i() / a + C64::i() / b)).re;

    let atom = C64::new(p.gamma, p.delta_a);
    let g2 = C64::from(p.g * p.g);
    let n = a * atom + g2;
    let d = b * atom + g2;
    if n.norm() <= 1e-12 * (scale * (p.gamma + p.delta_a.abs()) + p.g * p.g) {
        return Err(Error::Domain("tau_1 is singular (r_1(0) = 0)".into()));
    }
    let dn = -C64::i() * (atom + a);
    let dd = -C64::i() * (atom + b);
    let tau1 = (-C64::i() * (dn / n - dd / d)).re;
    Ok((tau0, tau1))
}

/// Parameters of the cavity-length model, where the coupling and both cavity
/// rates follow from geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthModel {
    /// Resonant cross-section over effective mode area.
    pub sigma0_over_aeff: f64,
    /// Group velocity in the cavity (m/s).
    pub v_g: f64,
    /// Vacuum light speed (m/s).
    pub c: f64,
    /// Cavity length (m).
    pub l_cav: f64,
    /// Coupler transmittance.
    pub t_ex: f64,
    /// Round-trip loss.
    pub alpha_loss: f64,
    /// Atomic decay rate, needed to turn the cross-section into a rate.
    pub gamma: f64,
}

impl LengthModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_cav > 0.0) {
            return Err(invalid("l_cav", "must be positive"));
        }
        if !(self.t_ex > 0.0 && self.t_ex < 1.0) {
            return Err(invalid("t_ex", "must lie in (0, 1)"));
        }
        if !(self.alpha_loss >= 0.0 && self.alpha_loss < 1.0) {
            return Err(invalid("alpha_loss", "must lie in [0, 1)"));
        }
        if !(self.sigma0_over_aeff > 0.0 && self.v_g > 0.0 && self.c > 0.0 && self.gamma > 0.0) {
            return Err(invalid(
                "length_model",
                "sigma0_over_aeff, v_g, c and gamma must be positive",
            ));
        }
        Ok(())
    }

    /// Radiative rate into the cavity mode per round trip.
    pub fn gamma_1d(&self) -> f64 {
        (self.c / self.v_g) * self.sigma0_over_aeff * self.gamma
    }

    /// Internal cooperativity, independent of `l_cav`.
    pub fn c_in(&self) -> f64 {
        (self.c / self.v_g) * self.sigma0_over_aeff * 2.0 / self.alpha_loss
    }

    /// Round-trip loss giving a requested cooperativity.
    pub fn with_c_in(mut self, c_in: f64) -> Self {
        self.alpha_loss = (self.c / self.v_g) * self.sigma0_over_aeff * 2.0 / c_in;
        self
    }

    pub fn with_length(mut self, l_cav: f64) -> Self {
        self.l_cav = l_cav;
        self
    }

    /// Coupler transmittance that puts `kappa_ex` at its optimum.
    pub fn with_optimal_coupler(mut self) -> Self {
        self.t_ex = self.alpha_loss * (1.0 + 2.0 * self.c_in()).sqrt();
        self
    }
}

/// Cavity length at which the delay-matching condition holds.
pub fn l_cav_opt(model: &LengthModel, gamma: f64, c_in: f64) -> f64 {
    model.sigma0_over_aeff * model.c / (2.0 * gamma * (1.0 + c_in))
}

/// Maps geometry onto rates.
pub fn params_from_length(model: &LengthModel) -> Result<CavityParams> {
    model.validate()?;
    let g = (model.v_g * model.gamma_1d() / model.l_cav).sqrt();
    let kappa_ex = model.v_g * model.t_ex / (4.0 * model.l_cav);
    let kappa_in = model.v_g * model.alpha_loss / (4.0 * model.l_cav);
    CavityParams::new(g, kappa_in, kappa_ex, model.gamma)
}

/// Phase of a complex number in (-π, π].
pub fn arg_pi(z: C64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Difference of two phases wrapped to (-π, π].
pub fn phase_difference(a: f64, b: f64) -> f64 {
    use std::f64::consts::PI;
    let mut d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_pi_mhz;
    use approx::assert_relative_eq;

    fn matched(c: f64) -> CavityParams {
        CavityParams::optimal(c, 1.0, 1.0).unwrap()
    }

    #[test]
    fn impedance_matched_bare_cavity_is_black() {
        let p = CavityParams::new(1.0, 2.0, 2.0, 1.0).unwrap();
        assert!(reflection_r0(&p, 0.0).norm() < 1e-15);
    }

    #[test]
    fn balanced_reflections_at_c100() {
        // r_opt = 1 - 2/(1+sqrt(201))
        let want = 1.0 - 2.0 / (1.0 + 201f64.sqrt());
        assert!((want - 0.86822).abs() < 1e-5);
        let p = matched(100.0);
        assert_relative_eq!(reflection_r0(&p, 0.0).re, -want, epsilon = 1e-12);
        assert_relative_eq!(reflection_r1(&p, 0.0).re, want, epsilon = 1e-12);
        assert_relative_eq!(r_opt(100.0).unwrap(), want, epsilon = 1e-15);
    }

    #[test]
    fn phase_difference_is_pi() {
        let p = matched(30.0);
        let d = phase_difference(
            arg_pi(reflection_r1(&p, 0.0)),
            arg_pi(reflection_r0(&p, 0.0)),
        );
        assert_relative_eq!(d.abs(), std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn far_detuned_limits() {
        let p = matched(10.0);
        assert!((reflection_r0(&p, 1e12).norm() - 1.0).abs() < 1e-9);
        let hidden = p.with_delta_a(1e14);
        for d in [-3.0, 0.0, 0.7, 5.0] {
            assert!((reflection_r1(&hidden, d) - reflection_r0(&p, d)).norm() < 1e-9);
        }
        let uncoupled = CavityParams { g: 0.0, ..p };
        assert!((reflection_r1(&uncoupled, 0.4) - reflection_r0(&uncoupled, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn kappa_ex_opt_values() {
        assert_eq!(kappa_ex_opt(2.0, 0.0).unwrap(), 2.0);
        assert_relative_eq!(kappa_ex_opt(1.5, 4.0).unwrap(), 4.5, epsilon = 1e-15);
        let k = kappa_ex_opt(two_pi_mhz(0.25), 100.0).unwrap();
        assert_relative_eq!(k / two_pi_mhz(1.0), 3.544, max_relative = 1e-3);
        assert!(kappa_ex_opt(0.0, 1.0).is_err());
        assert!(kappa_ex_opt(1.0, -1.0).is_err());
    }

    #[test]
    fn r_opt_edges() {
        assert_eq!(r_opt(0.0).unwrap(), 0.0);
        assert!(r_opt(-1.0).is_err());
        assert_eq!(r_opt(f64::INFINITY).unwrap(), 1.0);
        assert!(r_opt(1e8).unwrap() > r_opt(1e6).unwrap());
    }

    #[test]
    fn delays_general_form_matches_closed_form() {
        let p = CavityParams::new(2.3, 0.7, 3.1, 1.1).unwrap();
        let (t0, t1) = pulse_delays(&p).unwrap();
        let (g, ki, ke, ga) = (p.g, p.kappa_in, p.kappa_ex, p.gamma);
        let t0c = 2.0 * ke / (ke * ke - ki * ki);
        let t1c = 2.0 * ke * (g * g - ga * ga)
            / (g.powi(4) + 2.0 * g * g * ga * ki - ga * ga * (ke * ke - ki * ki));
        assert_relative_eq!(t0, t0c, max_relative = 1e-12);
        assert_relative_eq!(t1, t1c, max_relative = 1e-12);
    }

    #[test]
    fn delays_at_optimal_coupler() {
        let c: f64 = 20.0;
        let p = matched(c);
        let (t0, t1) = pulse_delays(&p).unwrap();
        let s = (1.0 + 2.0 * c).sqrt();
        assert_relative_eq!(t0, s / (p.kappa_in * c), max_relative = 1e-12);
        assert_relative_eq!(
            t1,
            (2.0 * c * p.kappa_in - p.gamma) / (p.gamma * p.kappa_in * c * s),
            max_relative = 1e-12
        );
    }

    #[test]
    fn delay_matching_equalises_delays() {
        for c in [1.0, 10.0, 100.0, 400.0] {
            let p = CavityParams::delay_matched(c, 1.0).unwrap();
            let (t0, t1) = pulse_delays(&p).unwrap();
            assert_relative_eq!(t0, t1, max_relative = 1e-12);
        }
        let gamma = two_pi_mhz(0.24);
        let p = CavityParams::delay_matched(100.0, gamma).unwrap();
        let (t0, _) = pulse_delays(&p).unwrap();
        assert_relative_eq!(t0, 201f64.sqrt() / (101.0 * gamma), max_relative = 1e-12);
        assert!((t0 / 93.1e-9 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn tau1_vanishes_when_g_equals_gamma() {
        let c = 1.0 / (2.0 * 0.3);
        let p = CavityParams::optimal(c, 0.3, 1.0).unwrap();
        assert_relative_eq!(p.g, 1.0, epsilon = 1e-12);
        assert!(pulse_delays(&p).unwrap().1.abs() < 1e-12);
    }

    #[test]
    fn tau0_pole_is_a_domain_error() {
        let p = CavityParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(pulse_delays(&p), Err(Error::Domain(_))));
    }

    fn yb_model(c_in: f64) -> LengthModel {
        LengthModel {
            sigma0_over_aeff: 0.10,
            v_g: SPEED_OF_LIGHT,
            c: SPEED_OF_LIGHT,
            l_cav: 0.1,
            t_ex: 0.01,
            alpha_loss: 0.0,
            gamma: two_pi_mhz(0.24),
        }
        .with_c_in(c_in)
    }
    use crate::SPEED_OF_LIGHT;

    #[test]
    fn optimal_lengths() {
        let m = yb_model(100.0);
        let l100 = l_cav_opt(&m, m.gamma, 100.0);
        assert!((l100 / 0.098 - 1.0).abs() < 0.01, "{l100}");
        let l89 = l_cav_opt(&m, m.gamma, 89.0);
        assert!((l89 / 0.11 - 1.0).abs() < 0.02, "{l89}");
        let ratio = l_cav_opt(&m, m.gamma, 999.0) / l100;
        assert!((ratio - 101.0 / 1000.0).abs() < 1e-12);
    }

    #[test]
    fn length_scaling_keeps_cooperativity() {
        let m = yb_model(100.0);
        let a = params_from_length(&m).unwrap();
        let b = params_from_length(&m.with_length(2.0 * m.l_cav)).unwrap();
        assert_relative_eq!(b.kappa_in, a.kappa_in / 2.0, max_relative = 1e-14);
        assert_relative_eq!(b.g, a.g / 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(a.c_in(), b.c_in(), max_relative = 1e-12);
        assert_relative_eq!(a.c_in(), 100.0, max_relative = 1e-12);
    }

    #[test]
    fn optimal_length_satisfies_delay_matching() {
        let m = yb_model(100.0);
        let l = l_cav_opt(&m, m.gamma, 100.0);
        let p = params_from_length(&m.with_length(l).with_optimal_coupler()).unwrap();
        assert_relative_eq!(p.kappa_in / p.gamma, 1.01, max_relative = 1e-9);
        let (t0, t1) = pulse_delays(&p).unwrap();
        assert_relative_eq!(t0, t1, max_relative = 1e-9);
    }

    #[test]
    fn length_deviation_map() {
        let m = yb_model(100.0);
        let l = l_cav_opt(&m, m.gamma, 100.0);
        let p = params_from_length(&m.with_length(l)).unwrap();
        let dl = 0.07;
        let q = params_from_length(&m.with_length(l * (1.0 + dl))).unwrap();
        assert_relative_eq!(q.g, p.g / (1.0 + dl).sqrt(), max_relative = 1e-13);
        assert_relative_eq!(q.kappa(), p.kappa() / (1.0 + dl), max_relative = 1e-13);
    }

    #[test]
    fn taylor_remainder_is_quadratic() {
        let p = CavityParams::new(3.0, 0.8, 2.4, 1.0).unwrap();
        let (t0, t1) = pulse_delays(&p).unwrap();
        for (j, tau) in [(0u8, t0), (1u8, t1)] {
            let r = reflection(&p, j, 0.0);
            let mut ratios = Vec::new();
            for d in [1e-2, 5e-3, 2.5e-3] {
                let lin = r * C64::new(0.0, tau * d).exp();
                ratios.push((reflection(&p, j, d) - lin).norm() / (d * d));
            }
            assert!(ratios.iter().all(|x| x.is_finite() && *x < 1e3));
            assert!((ratios[2] / ratios[1] - 1.0).abs() < 0.05);
        }
    }
}
