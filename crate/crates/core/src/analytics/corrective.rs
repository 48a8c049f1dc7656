//! Law of the first corrective jump of the reflected symmetric MAP.
//!
//! Direction `j` is chosen with probability `Ξ_j^{−α}/Σ_k Ξ_k^{−α}`; given `j`, the ordinate jump `x`
//! has unnormalized density `h_j(x) = e^x (e^x + 2Ξ_j − 1)^{−(1+α)}` on `(log(1−Ξ_j), ∞)`, whose total
//! mass is `Ξ_j^{−α}/α`. The raw bracket therefore integrates to `Σ_j Ξ_j^{−α}/α = q(Ξ)/c`.

use super::kernel::jump_vector_v;
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use rand::Rng;
use rand_distr::{Distribution, Open01};

fn check(alpha: f64, xi: &SimplexPoint, j: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0,2)")));
    }
    if !xi.is_interior() {
        return Err(Error::OutsideSupport("corrective law needs an interior modulator".into()));
    }
    if j >= xi.dim() {
        return Err(Error::InvalidParameter(format!("coordinate {j} out of range")));
    }
    Ok(())
}

/// Unnormalized per-direction bracket `h_j(x)`; zero outside the support.
pub fn corrective_raw_density(alpha: f64, xi: &SimplexPoint, j: usize, x: f64) -> Result<f64> {
    check(alpha, xi, j)?;
    let w = x.exp() + 2.0 * xi[j] - 1.0;
    if x <= (1.0 - xi[j]).ln() || w <= 0.0 {
        return Ok(0.0);
    }
    // e^x w^{−(1+α)} written as e^{−αx}(1 + (2Ξ_j − 1)e^{−x})^{−(1+α)} to avoid overflow.
    if x > 0.0 {
        return Ok((-alpha * x).exp() * (1.0 + (2.0 * xi[j] - 1.0) * (-x).exp()).powf(-(1.0 + alpha)));
    }
    Ok(x.exp() * w.powf(-(1.0 + alpha)))
}

fn direction_weights(alpha: f64, xi: &SimplexPoint) -> Vec<f64> {
    xi.components().iter().map(|c| c.powf(-alpha)).collect()
}

/// Probability density of `(j, x)`: integrates to one over all directions.
pub fn corrective_jump_density(alpha: f64, xi: &SimplexPoint, j: usize, x: f64) -> Result<f64> {
    let h = corrective_raw_density(alpha, xi, j, x)?;
    let total: f64 = direction_weights(alpha, xi).iter().sum();
    Ok(alpha * h / total)
}

/// Probability that the corrective jump is driven by coordinate `j`.
pub fn corrective_direction_probability(alpha: f64, xi: &SimplexPoint, j: usize) -> Result<f64> {
    check(alpha, xi, j)?;
    let w = direction_weights(alpha, xi);
    Ok(w[j] / w.iter().sum::<f64>())
}

/// Marginal CDF of the ordinate jump, mixed over directions.
pub fn corrective_jump_cdf(alpha: f64, xi: &SimplexPoint, x: f64) -> Result<f64> {
    check(alpha, xi, 0)?;
    let w = direction_weights(alpha, xi);
    let total: f64 = w.iter().sum();
    let mut f = 0.0;
    for (j, &c) in xi.components().iter().enumerate() {
        let s = x.exp() + 2.0 * c - 1.0;
        if x > (1.0 - c).ln() && s > 0.0 {
            f += w[j] / total * (1.0 - (c / s).powf(alpha));
        }
    }
    Ok(f)
}

/// Inverse CDF within direction `j`: `e^x = Ξ_j (1−u)^{−1/α} − 2Ξ_j + 1`.
pub fn corrective_inverse_cdf(alpha: f64, xi: &SimplexPoint, j: usize, u: f64) -> Result<f64> {
    check(alpha, xi, j)?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidParameter(format!("u = {u} outside [0,1)")));
    }
    let c = xi[j];
    Ok((c * (1.0 - u).powf(-1.0 / alpha) - 2.0 * c + 1.0).ln())
}

/// One corrective jump `(j, Δξ, Ξ_L)` with `Ξ_L = e^{−Δξ}(Ξ + (e^{Δξ} − 1)e_j)`.
pub fn corrective_jump_sampler<R: Rng + ?Sized>(
    alpha: f64,
    xi: &SimplexPoint,
    rng: &mut R,
) -> Result<(usize, f64, SimplexPoint)> {
    check(alpha, xi, 0)?;
    let w = direction_weights(alpha, xi);
    let total: f64 = w.iter().sum();
    let mut pick: f64 = rng.random::<f64>() * total;
    let mut j = w.len() - 1;
    for (k, &wk) in w.iter().enumerate() {
        if pick < wk {
            j = k;
            break;
        }
        pick -= wk;
    }
    let u: f64 = Open01.sample(rng);
    let x = corrective_inverse_cdf(alpha, xi, j, u)?;
    let landing = jump_vector_v(xi, j, x)?;
    Ok((j, x, landing))
}
