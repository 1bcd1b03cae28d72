//! Sparse Lindblad master equation with a single scalar drive.
//!
//! The generator is `L(t) = L_0 + Ω(t) L_1` on row-major `vec(ρ)`. Both parts
//! share one CSR pattern, so a right-hand-side evaluation is a single sparse
//! product regardless of the Hilbert-space size.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

/// Sparse square operator as a triplet list.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (i, j, v) in entries {
            *acc.entry((i, j)).or_default() += v;
        }
        Self {
            dim,
            entries: acc
                .into_iter()
                .filter(|(_, v)| *v != C64::from(0.0))
                .map(|((i, j), v)| (i, j, v))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_entries(
            self.dim,
            self.entries.iter().map(|&(i, j, v)| (i, j, v * s)),
        )
    }

    pub fn add(&self, other: &SparseOp) -> Self {
        Self::from_entries(self.dim, self.entries.iter().chain(&other.entries).copied())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_entries(
            self.dim,
            self.entries.iter().map(|&(i, j, v)| (j, i, v.conj())),
        )
    }

    pub fn mul(&self, other: &SparseOp) -> Self {
        let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for &(k, j, v) in &other.entries {
            by_row[k].push((j, v));
        }
        let mut out = Vec::new();
        for &(i, k, a) in &self.entries {
            for &(j, b) in &by_row[k] {
                out.push((i, j, a * b));
            }
        }
        Self::from_entries(self.dim, out)
    }

    /// `Tr[A† X]` for a row-major dense `X`.
    pub fn adjoint_trace(&self, x: &[C64]) -> C64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| v.conj() * x[i * self.dim + j])
            .sum()
    }

    /// Dense `A X` for row-major `X`.
    pub fn apply_left(&self, x: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::from(0.0); d * d];
        for &(i, k, v) in &self.entries {
            for j in 0..d {
                out[i * d + j] += v * x[k * d + j];
            }
        }
        out
    }
}

/// CSR superoperator `A + Ω B` with a shared sparsity pattern.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    fixed: Vec<C64>,
    driven: Vec<C64>,
}

impl Liouvillian {
    /// Builds `-i[H_0 + Ω H_1, ρ] + Σ D[L]ρ`.
    pub fn new(h0: &SparseOp, h1: &SparseOp, collapse: &[SparseOp]) -> Self {
        let d = h0.dim;
        let mut acc: BTreeMap<(usize, usize), (C64, C64)> = BTreeMap::new();
        let idx = |i: usize, j: usize| i * d + j;
        let mut push = |row: usize, col: usize, v: C64, driven: bool| {
            let e = acc.entry((row, col)).or_default();
            if driven {
                e.1 += v;
            } else {
                e.0 += v;
            }
        };
        let mi = C64::new(0.0, -1.0);
        for (h, driven) in [(h0, false), (h1, true)] {
            for &(i, k, v) in &h.entries {
                // -i H ρ
                for j in 0..d {
                    push(idx(i, j), idx(k, j), mi * v, driven);
                }
                // +i ρ H: (ρH)_{jk'} with H_{ik}
                for j in 0..d {
                    push(idx(j, k), idx(j, i), -mi * v, driven);
                }
            }
        }
        for l in collapse {
            for &(i, k, a) in &l.entries {
                for &(j, m, b) in &l.entries {
                    push(idx(i, j), idx(k, m), a * b.conj(), false);
                }
            }
            let ldl = l.adjoint().mul(l);
            for &(i, k, v) in &ldl.entries {
                for j in 0..d {
                    push(idx(i, j), idx(k, j), -0.5 * v, false);
                    push(idx(j, k), idx(j, i), -0.5 * v, false);
                }
            }
        }
        let n = d * d;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut fixed = Vec::with_capacity(acc.len());
        let mut driven = Vec::with_capacity(acc.len());
        for (&(r, c), &(a, b)) in &acc {
            if a == C64::from(0.0) && b == C64::from(0.0) {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            fixed.push(a);
            driven.push(b);
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim: d,
            row_ptr,
            cols,
            fixed,
            driven,
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// `out = (A + Ω B) x`.
    pub fn apply(&self, omega: f64, x: &[C64], out: &mut [C64]) {
        for r in 0..self.dim * self.dim {
            let mut s = C64::from(0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += (self.fixed[k] + self.driven[k] * omega) * x[self.cols[k]];
            }
            out[r] = s;
        }
    }
}

/// Scratch space for the fixed-step RK4 integrator.
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::from(0.0); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// One step with drive values at the start, midpoint and end.
    pub fn step(&mut self, l: &Liouvillian, om: [f64; 3], dt: f64, x: &mut [C64]) {
        l.apply(om[0], x, &mut self.k1);
        for (t, (a, b)) in self.tmp.iter_mut().zip(x.iter().zip(&self.k1)) {
            *t = a + b * (0.5 * dt);
        }
        l.apply(om[1], &self.tmp, &mut self.k2);
        for (t, (a, b)) in self.tmp.iter_mut().zip(x.iter().zip(&self.k2)) {
            *t = a + b * (0.5 * dt);
        }
        l.apply(om[1], &self.tmp, &mut self.k3);
        for (t, (a, b)) in self.tmp.iter_mut().zip(x.iter().zip(&self.k3)) {
            *t = a + b * dt;
        }
        l.apply(om[2], &self.tmp, &mut self.k4);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]) * (dt / 6.0);
        }
    }
}
