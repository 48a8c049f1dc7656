//! Coefficients of the two-dimensional reflected-BM MAP as an SDE in `(ρ, Θ¹, Θ²)`.

use crate::error::{Error, Result};
use crate::geometry::{SimplexPoint, SIMPLEX_TOL};

/// `d(ρ, Θ) = a dt + b̃ dW̃ + γ dℓ` with `W̃` of covariance `diag(1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeCoefficients {
    pub a: [f64; 3],
    pub b: [[f64; 2]; 3],
    pub gamma: [f64; 3],
    pub lambda2: f64,
    pub lambda3: f64,
}

/// Coefficients at `θ`; `γ` is nonzero in the angular rows only at the two boundary points.
pub fn sde_coefficients(theta: &SimplexPoint) -> Result<SdeCoefficients> {
    if theta.dim() != 2 {
        return Err(Error::InvalidParameter("SDE coefficients exist for d = 2 only".into()));
    }
    let (t1, t2) = (theta[0], theta[1]);
    let s = 1.0 + t1 * t1 + t2 * t2;
    let lambda2 = s + (s * s - 2.0).sqrt();
    // Conjugate root via the product, avoiding cancellation.
    let lambda3 = 2.0 / lambda2;
    let r = lambda2.sqrt() + lambda3.sqrt();
    let p = t1 * t2;
    let dlt = t1 - t2;
    let b = [[2.0 * p / r + r / 2.0, -dlt / r], [-dlt / r, r / 4.0 - p / r], [dlt / r, -(r / 4.0 - p / r)]];
    let at_01 = t1.abs() <= SIMPLEX_TOL;
    let at_10 = t2.abs() <= SIMPLEX_TOL;
    let ind = (at_01 as i32 - at_10 as i32) as f64;
    Ok(SdeCoefficients { a: [-1.0, dlt, -dlt], b, gamma: [1.0, ind, -ind], lambda2, lambda3 })
}

/// `b̃ diag(1,2) b̃ᵀ`.
pub fn effective_sigma(c: &SdeCoefficients) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = c.b[i][0] * c.b[j][0] + 2.0 * c.b[i][1] * c.b[j][1];
        }
    }
    m
}

/// Diffusion matrix of `(ρ, Θ¹, Θ²)` from the BM MAP coefficients at `θ`.
pub fn reference_sigma(t1: f64, t2: f64) -> [[f64; 3]; 3] {
    let s = t1 * t1 + t2 * t2;
    let c = t2 - t1;
    [[2.0, c, -c], [c, s, -s], [-c, -s, s]]
}
