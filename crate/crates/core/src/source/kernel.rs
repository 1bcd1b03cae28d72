//! Two-time field correlation `g1(t, t') = ⟨a†(t) a(t')⟩` and its temporal modes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dynamics;
use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;

/// Relative Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Negative eigenvalues below `-NEGATIVE_TOL * trace` are rejected.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Discretised `g1` on a uniform grid with Simpson weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalKernel {
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[(i, j)] = g1(t_i, t_j)`.
    pub values: DMatrix<C64>,
    /// Integration steps per kernel interval.
    pub decimation: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    times: Vec<f64>,
    weights: Vec<f64>,
    p_gen: f64,
    decimation: usize,
}

impl TemporalKernel {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `Σ w_i g1(t_i, t_i)`.
    pub fn p_gen(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.values[(i, i)].re)
            .sum()
    }

    /// Kernel `Σ λ_k u_k*(t) u_k(t')` from explicit modes on a Simpson grid.
    pub fn from_modes(times: Vec<f64>, populations: &[f64], modes: &[Vec<C64>]) -> Result<Self> {
        let n = times.len();
        let h = if n > 1 { times[1] - times[0] } else { 0.0 };
        let weights = simpson_weights(n, h)?;
        let mut values = DMatrix::zeros(n, n);
        for (lam, u) in populations.iter().zip(modes) {
            if u.len() != n {
                return Err(Error::GridMismatch(format!(
                    "mode has {} points, grid {n}",
                    u.len()
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    values[(i, j)] += u[i].conj() * u[j] * *lam;
                }
            }
        }
        Ok(Self {
            times,
            weights,
            values,
            decimation: 1,
        })
    }

    /// Largest `|K_ij - conj K_ji|` relative to the largest entry.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.values[(i, j)] - self.values[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn same_grid(&self, other: &TemporalKernel) -> Result<()> {
        let close =
            self.len() == other.len()
                && self.times.iter().zip(&other.times).all(|(a, b)| {
                    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
                });
        if close {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "kernels on {} and {} point grids do not coincide",
                self.len(),
                other.len()
            )))
        }
    }

    /// Portable text: a `#`-prefixed JSON header followed by rows of `re,im` pairs.
    pub fn to_text(&self) -> String {
        let header = Header {
            times: self.times.clone(),
            weights: self.weights.clone(),
            p_gen: self.p_gen(),
            decimation: self.decimation,
        };
        let mut out = format!(
            "# {}\n",
            serde_json::to_string(&header).expect("header serialises")
        );
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| {
                    let v = self.values[(i, j)];
                    format!("{},{}", v.re, v.im)
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Domain(format!("kernel file: {m}"));
        let mut lines = text.lines();
        let head = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| bad("missing `#` header".into()))?;
        let header: Header = serde_json::from_str(head.trim()).map_err(|e| bad(e.to_string()))?;
        let n = header.times.len();
        if header.weights.len() != n {
            return Err(Error::GridMismatch(
                "weights and times differ in length".into(),
            ));
        }
        let mut values = DMatrix::zeros(n, n);
        let mut rows = 0;
        for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            if i >= n {
                return Err(bad(format!("more than {n} rows")));
            }
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != n {
                return Err(bad(format!(
                    "row {i} has {} entries, expected {n}",
                    cells.len()
                )));
            }
            for (j, cell) in cells.iter().enumerate() {
                let (re, im) = cell
                    .split_once(',')
                    .ok_or_else(|| bad(format!("entry ({i},{j}) is not `re,im`")))?;
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| bad(format!("entry ({i},{j}): {e}")))
                };
                values[(i, j)] = C64::new(parse(re)?, parse(im)?);
            }
            rows += 1;
        }
        if rows != n {
            return Err(bad(format!("{rows} rows, expected {n}")));
        }
        Ok(Self {
            times: header.times,
            weights: header.weights,
            values,
            decimation: header.decimation,
        })
    }
}

pub fn write_kernel(kernel: &TemporalKernel, path: &std::path::Path) -> std::io::Result<()> {
    std::fs::write(path, kernel.to_text())
}

pub fn read_kernel(path: &std::path::Path) -> std::io::Result<Result<TemporalKernel>> {
    Ok(TemporalKernel::from_text(&std::fs::read_to_string(path)?))
}

/// Quantum-regression kernel: each column `t'` starts from `L ρ(t')` and is
/// propagated forward; the upper triangle follows by conjugation.
pub fn autocorrelation(dynamics: &Dynamics) -> Result<TemporalKernel> {
    let n = dynamics.rho_grid.len();
    let outputs = &dynamics.system.outputs;
    let columns: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![C64::from(0.0); n];
            for l in outputs {
                // Tr[L† Λ(L ρ)]
                let x = l.apply_left(&dynamics.rho_grid[j]);
                col[j] += l.adjoint_trace(&x);
                dynamics.propagate(j, x, |i, xi| col[i] += l.adjoint_trace(xi));
            }
            col
        })
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        for i in j..n {
            if !col[i].re.is_finite() || !col[i].im.is_finite() {
                return Err(Error::Domain(format!("regression diverged at ({i}, {j})")));
            }
            values[(i, j)] = col[i];
            values[(j, i)] = col[i].conj();
        }
    }
    let times = dynamics.kernel_times();
    let h = times[1] - times[0];
    Ok(TemporalKernel {
        weights: simpson_weights(n, h)?,
        times,
        values,
        decimation: dynamics.decimation,
    })
}

/// Mode populations and temporal modes, sorted by population.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `modes[k][i] = u_k(t_i)`, orthonormal under the kernel weights.
    pub modes: Vec<Vec<C64>>,
    pub p_gen: f64,
    pub purity: f64,
}

impl ModeDecomposition {
    /// `|⟨u_k|f⟩|² / ⟨f|f⟩` on the weighted grid.
    pub fn overlap(&self, k: usize, f: &[C64], weights: &[f64]) -> f64 {
        let norm: f64 = f.iter().zip(weights).map(|(a, w)| a.norm_sqr() * w).sum();
        let inner: C64 = self.modes[k]
            .iter()
            .zip(f)
            .zip(weights)
            .map(|((u, a), w)| u.conj() * a * *w)
            .sum();
        inner.norm_sqr() / norm
    }
}

/// Eigen-decomposition of `√(w_i w_j) g1(t_i, t_j)`.
pub fn decompose(kernel: &TemporalKernel) -> Result<ModeDecomposition> {
    let herm = kernel.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NonHermitian(herm));
    }
    let n = kernel.len();
    let sw: Vec<f64> = kernel.weights.iter().map(|w| w.sqrt()).collect();
    let mut sym = DMatrix::from_fn(n, n, |i, j| kernel.values[(i, j)] * (sw[i] * sw[j]));
    // remove round-off asymmetry before the Hermitian solver
    for i in 0..n {
        sym[(i, i)].im = 0.0;
        for j in 0..i {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)].conj());
            sym[(i, j)] = avg;
            sym[(j, i)] = avg.conj();
        }
    }
    let trace: f64 = (0..n).map(|i| sym[(i, i)].re).sum();
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lowest = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lowest < -NEGATIVE_TOL * trace.abs() {
        return Err(Error::NotPositive {
            eigenvalue: lowest,
            trace,
        });
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let modes = order
        .iter()
        .map(|&k| {
            (0..n)
                .map(|i| eig.eigenvectors[(i, k)].conj() / sw[i])
                .collect()
        })
        .collect();
    let p_gen: f64 = eigenvalues.iter().sum();
    let purity = if p_gen > 0.0 {
        eigenvalues.iter().map(|l| l * l).sum::<f64>() / (p_gen * p_gen)
    } else {
        0.0
    };
    Ok(ModeDecomposition {
        eigenvalues,
        modes,
        p_gen,
        purity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::uniform_grid;

    fn gaussian(times: &[f64], s: f64, t0: f64) -> Vec<C64> {
        times
            .iter()
            .map(|t| {
                C64::from(
                    (std::f64::consts::PI * s * s).powf(-0.25)
                        * (-(t - t0).powi(2) / (2.0 * s * s)).exp(),
                )
            })
            .collect()
    }

    #[test]
    fn rank_one_round_trip() {
        let t = uniform_grid(-6.0, 6.0, 121);
        let u: Vec<C64> = gaussian(&t, 1.0, 0.3)
            .iter()
            .zip(&t)
            .map(|(a, t)| a * C64::from_polar(1.0, 0.4 * t))
            .collect();
        let k = TemporalKernel::from_modes(t.clone(), &[0.7], &[u.clone()]).unwrap();
        let norm: f64 = u
            .iter()
            .zip(&k.weights)
            .map(|(a, w)| a.norm_sqr() * w)
            .sum();
        let d = decompose(&k).unwrap();
        assert!((d.eigenvalues[0] - 0.7 * norm).abs() < 1e-12);
        assert!(d.eigenvalues[1].abs() < 1e-12);
        assert!((d.overlap(0, &u, &k.weights) - 1.0).abs() < 1e-12);
        assert!((d.purity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn modes_are_orthonormal() {
        let t = uniform_grid(-6.0, 6.0, 81);
        let a = gaussian(&t, 1.0, -1.0);
        let b = gaussian(&t, 0.7, 1.5);
        let k = TemporalKernel::from_modes(t, &[0.5, 0.2], &[a, b]).unwrap();
        let d = decompose(&k).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                let s: C64 = d.modes[p]
                    .iter()
                    .zip(&d.modes[q])
                    .zip(&k.weights)
                    .map(|((x, y), w)| x.conj() * y * *w)
                    .sum();
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-8);
            }
        }
        assert!((d.p_gen - k.p_gen()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let t = uniform_grid(0.0, 1.0, 5);
        let mut k =
            TemporalKernel::from_modes(t.clone(), &[1.0], &[gaussian(&t, 1.0, 0.5)]).unwrap();
        k.values[(0, 1)] += C64::new(0.1, 0.0);
        assert!(matches!(decompose(&k), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let t = uniform_grid(-3.0, 3.0, 31);
        let k = TemporalKernel::from_modes(
            t.clone(),
            &[0.3, 0.1],
            &[gaussian(&t, 1.0, 0.0), gaussian(&t, 0.5, 1.0)],
        )
        .unwrap();
        let back = TemporalKernel::from_text(&k.to_text()).unwrap();
        assert_eq!(back, k);
    }
}
