//! L1-polar geometry on the closed orthant.
//!
//! A nonzero `x ∈ [0,∞)^d` decomposes as `(log ‖x‖₁, x/‖x‖₁)`; the zero vector maps to the
//! cemetery `(−∞, ∂)`, which is a distinct variant rather than a NaN sentinel.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Absolute tolerance on the component sum of a simplex point.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point of the closed L1 simplex `{θ ∈ [0,1]^d : Σθ = 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates without renormalizing.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidVector("empty simplex point".into()));
        }
        let mut sum = 0.0;
        for &c in &components {
            if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidVector(format!("component {c} outside [0,1]")));
            }
            sum += c;
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidVector(format!("components sum to {sum}")));
        }
        Ok(SimplexPoint(components))
    }

    /// Projects a nonnegative nonzero vector onto the simplex by L1 normalization.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        if v.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidVector(format!("{v:?} not in the closed orthant")));
        }
        let s: f64 = v.iter().sum();
        if s <= 0.0 {
            return Err(Error::InvalidVector("zero vector has no angle".into()));
        }
        Ok(SimplexPoint(v.iter().map(|c| c / s).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// True when every component is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&c| c > 0.0)
    }

    /// Barycentre `(1/d, …, 1/d)`.
    pub fn barycentre(d: usize) -> Self {
        SimplexPoint(vec![1.0 / d as f64; d])
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// L1-polar representation of an orthant vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolarPoint {
    Point { log_norm: f64, angle: SimplexPoint },
    Cemetery,
}

impl PolarPoint {
    pub fn log_norm(&self) -> f64 {
        match self {
            PolarPoint::Point { log_norm, .. } => *log_norm,
            PolarPoint::Cemetery => f64::NEG_INFINITY,
        }
    }

    pub fn angle(&self) -> Option<&SimplexPoint> {
        match self {
            PolarPoint::Point { angle, .. } => Some(angle),
            PolarPoint::Cemetery => None,
        }
    }

    pub fn is_cemetery(&self) -> bool {
        matches!(self, PolarPoint::Cemetery)
    }
}

/// L1 norm of a vector (no sign checks).
#[inline]
pub fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c.abs()).sum()
}

/// `x ↦ (log‖x‖₁, x/‖x‖₁)`, with `0 ↦ (−∞, ∂)`.
pub fn polar_decompose(x: &[f64]) -> Result<PolarPoint> {
    if x.is_empty() {
        return Err(Error::InvalidVector("empty vector".into()));
    }
    if x.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidVector(format!("{x:?} not in [0,∞)^d")));
    }
    let s: f64 = x.iter().sum();
    if s == 0.0 {
        return Ok(PolarPoint::Cemetery);
    }
    Ok(PolarPoint::Point {
        log_norm: s.ln(),
        angle: SimplexPoint(x.iter().map(|c| c / s).collect()),
    })
}

/// Inverse of [`polar_decompose`]; the cemetery composes to the zero vector of dimension `d`.
pub fn polar_compose(p: &PolarPoint, d: usize) -> Vec<f64> {
    match p {
        PolarPoint::Point { log_norm, angle } => {
            let r = log_norm.exp();
            angle.components().iter().map(|c| r * c).collect()
        }
        PolarPoint::Cemetery => vec![0.0; d],
    }
}

/// Negation operator `N^{(j)}`: flips the sign of coordinate `j`.
pub fn negate(x: &[f64], j: usize) -> Vec<f64> {
    let mut y = x.to_vec();
    y[j] = -y[j];
    y
}

/// Reflection operator `R`: negates the unique negative coordinate, identity on the orthant.
///
/// Returns `None` when more than one coordinate is negative (independent coordinates never jump
/// together, so this state is unreachable on a valid skeleton).
pub fn reflect_once(x: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<usize> = (0..x.len()).filter(|&i| x[i] < 0.0).collect();
    match neg.as_slice() {
        [] => Some(x.to_vec()),
        [j] => Some(negate(x, *j)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_examples() {
        let p = polar_decompose(&[1.0, 1.0]).unwrap();
        assert!((p.log_norm() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(p.angle().unwrap().components(), &[0.5, 0.5]);
        assert_eq!(polar_decompose(&[0.0, 0.0]).unwrap(), PolarPoint::Cemetery);
        let q = polar_decompose(&[0.3, 0.7]).unwrap();
        assert!(q.log_norm().abs() < 1e-15);
        assert!((q.angle().unwrap()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn compose_examples() {
        let p = PolarPoint::Point { log_norm: 2f64.ln(), angle: SimplexPoint::new(vec![0.5, 0.5]).unwrap() };
        let x = polar_compose(&p, 2);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert_eq!(polar_compose(&PolarPoint::Cemetery, 2), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(polar_decompose(&[-0.1, 1.0]).is_err());
        assert!(polar_decompose(&[f64::NAN, 1.0]).is_err());
        assert!(polar_decompose(&[f64::INFINITY, 1.0]).is_err());
    }

    #[test]
    fn reflection_operators() {
        assert_eq!(reflect_once(&[-0.2, 0.7]).unwrap(), vec![0.2, 0.7]);
        assert_eq!(negate(&[0.3, 0.4], 0), vec![-0.3, 0.4]);
        assert!(reflect_once(&[-0.2, -0.7]).is_none());
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexPoint::new(vec![0.5, 0.5 + 1e-10]).is_err());
        assert!(SimplexPoint::new(vec![1.2, -0.2]).is_err());
        assert!(SimplexPoint::new(vec![0.25, 0.75]).unwrap().is_interior());
        assert!(!SimplexPoint::new(vec![0.0, 1.0]).unwrap().is_interior());
    }
}
