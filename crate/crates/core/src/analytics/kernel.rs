//! Killing rate and jump kernel of the killed MAP.

use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::levy::StableParams;
use crate::quadrature::{integrate_from_neg_infinity, integrate_to_infinity, QuadOptions};

fn shared_alpha(params: &[StableParams]) -> Result<f64> {
    let a = params.first().ok_or_else(|| Error::InvalidParameter("no coordinate parameters".into()))?.alpha();
    if params.iter().any(|p| p.alpha() != a) {
        return Err(Error::InvalidParameter("coordinates must share alpha".into()));
    }
    Ok(a)
}

fn check_dim(params: &[StableParams], d: usize) -> Result<()> {
    if params.len() != d {
        return Err(Error::InvalidParameter(format!("{} parameter sets for dimension {d}", params.len())));
    }
    Ok(())
}

/// `q(x) = (1/α) Σ_k c2^{(k)} (x_k/‖x‖₁)^{−α}`; depends on `x` only through its angle.
pub fn killing_rate(params: &[StableParams], x: &[f64]) -> Result<f64> {
    check_dim(params, x.len())?;
    let alpha = shared_alpha(params)?;
    if x.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::OutsideSupport(format!("killing rate needs a strictly positive point, got {x:?}")));
    }
    let norm: f64 = x.iter().sum();
    Ok(params.iter().zip(x).map(|(p, &v)| p.c2() * (v / norm).powf(-alpha)).sum::<f64>() / alpha)
}

/// Angle after an ordinate jump `y` driven by coordinate `j`:
/// `e^{−y}(θ + (e^y − 1)e_j)`.
pub fn jump_vector_v(theta: &SimplexPoint, j: usize, y: f64) -> Result<SimplexPoint> {
    let t = theta.components();
    if j >= t.len() {
        return Err(Error::InvalidParameter(format!("coordinate {j} out of range")));
    }
    if !(y > (1.0 - t[j]).ln()) || !y.is_finite() {
        return Err(Error::OutsideSupport(format!("y = {y} not above log(1 - theta_j)")));
    }
    let s = (-y).exp();
    let mut v: Vec<f64> = t.iter().map(|c| c * s).collect();
    // θ_j e^{−y} + 1 − e^{−y}, written to stay in [0,1].
    v[j] = t[j] * s - (-y).exp_m1();
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > 1e-15 {
        for c in &mut v {
            *c /= sum;
        }
    }
    SimplexPoint::new(v)
}

/// Lévy density of an ordinate jump `y` caused by coordinate `j` at angle `θ`.
/// Jumps at or below `log(1 − θ_j)` kill and carry no kernel mass here.
pub fn jump_kernel_density(params: &[StableParams], theta: &SimplexPoint, j: usize, y: f64) -> Result<f64> {
    check_dim(params, theta.dim())?;
    if j >= theta.dim() {
        return Err(Error::InvalidParameter(format!("coordinate {j} out of range")));
    }
    if !theta.is_interior() {
        return Err(Error::OutsideSupport("kernel needs an interior angle".into()));
    }
    if y == 0.0 {
        return Err(Error::OutsideSupport("kernel is singular at y = 0".into()));
    }
    let p = &params[j];
    let c = if y > 0.0 {
        p.c1()
    } else if y > (1.0 - theta[j]).ln() {
        p.c2()
    } else {
        0.0
    };
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(c * jump_weight(y, 1.0 + p.alpha()))
}

/// `e^y |e^y − 1|^{−p}`, evaluated without overflow for large `|y|`.
pub fn jump_weight(y: f64, p: f64) -> f64 {
    if y > 0.0 {
        ((1.0 - p) * y).exp() * (-(-y).exp_m1()).powf(-p)
    } else {
        y.exp() * (-y.exp_m1()).powf(-p)
    }
}

/// Kernel mass of upward jumps above `δ` in coordinate `j`: `c1 (e^δ − 1)^{−α}/α`.
pub fn upward_mass(p: &StableParams, delta: f64) -> f64 {
    p.c1() * delta.exp_m1().powf(-p.alpha()) / p.alpha()
}

/// Kernel mass of non-killing downward jumps below `−δ`:
/// `c2 ((1 − e^{−δ})^{−α} − θ_j^{−α})/α` when `1 − e^{−δ} < θ_j`.
pub fn downward_mass(p: &StableParams, theta_j: f64, delta: f64) -> f64 {
    let w = -(-delta).exp_m1();
    if w >= theta_j {
        return 0.0;
    }
    p.c2() * (w.powf(-p.alpha()) - theta_j.powf(-p.alpha())) / p.alpha()
}

/// Orthant-exiting Lévy mass at unit norm, `Σ_j ∫_{θ_j}^∞ Π_j(−du)`, by quadrature of the Lévy
/// densities. A downward jump of size `u` exits iff `u > θ_j`.
pub fn exit_mass_quadrature(params: &[StableParams], theta: &SimplexPoint) -> Result<f64> {
    check_dim(params, theta.dim())?;
    let mut total = 0.0;
    for (j, p) in params.iter().enumerate() {
        if p.c2() == 0.0 {
            continue;
        }
        total += integrate_to_infinity(|u| p.levy_density(-u), theta[j], QuadOptions::default())?;
    }
    Ok(total)
}

/// Mass of the ordinate kernel's exiting region `Σ_j c2^{(j)} ∫_{−∞}^{log(1−θ_j)} e^y (1 − e^y)^{−(1+α)} dy`.
///
/// Equals `Σ_j c2^{(j)} (θ_j^{−α} − 1)/α`: exits by jumps of size `u ≥ 1` have no preimage
/// `y = log(1 − u)`, so this falls short of the killing rate by `Σ_j c2^{(j)}/α`.
pub fn exit_mass_ordinate_quadrature(params: &[StableParams], theta: &SimplexPoint) -> Result<f64> {
    check_dim(params, theta.dim())?;
    let mut total = 0.0;
    for (j, p) in params.iter().enumerate() {
        if p.c2() == 0.0 {
            continue;
        }
        let top = (1.0 - theta[j]).ln();
        total += p.c2() * integrate_from_neg_infinity(|y| jump_weight(y, 1.0 + p.alpha()), top, QuadOptions::default())?;
    }
    Ok(total)
}
