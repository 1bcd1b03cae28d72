//! Uniform grids and composite Simpson weights.

use crate::error::{invalid, Result};

/// `n` equally spaced points on `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + h * i as f64).collect()
}

/// Composite Simpson weights for `n` (odd) points spaced by `h`.
pub fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    if n < 3 || n % 2 == 0 {
        return Err(invalid(
            "n_points",
            format!("Simpson rule needs an odd count >= 3, got {n}"),
        ));
    }
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
    }
    Ok(w)
}

/// Weights for the subset `0, 2, 4, ...` of a grid, if that subset is
/// itself a valid Simpson grid.
pub fn half_grid_weights(n: usize, h: f64) -> Option<Vec<f64>> {
    let m = (n + 1) / 2;
    if n % 2 == 0 || m < 3 || m % 2 == 0 {
        return None;
    }
    simpson_weights(m, 2.0 * h).ok()
}
