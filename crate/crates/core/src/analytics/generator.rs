//! Generators: the orthant Lévy operator, the Skorokhod-stable MAP operator in two variants, and
//! the reflected-BM MAP operator.

use super::classd::{directional, SmoothG, TestFunction};
use super::kernel::{jump_vector_v, jump_weight};
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::levy::StableParams;
use crate::quadrature::{integrate, integrate_power_singular, integrate_to_infinity, QuadOptions, SINGULAR_SPLIT};
use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Per-coordinate Lévy triplet of a spectrally-positive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateLevy {
    pub drift: f64,
    pub sigma: f64,
    pub jumps: Option<StableParams>,
}

impl CoordinateLevy {
    pub fn brownian() -> Self {
        CoordinateLevy { drift: 0.0, sigma: 1.0, jumps: None }
    }

    /// Strictly stable spectrally-positive driver; the drift `−c1/(α−1)` makes it centred under the
    /// unit-cutoff compensation.
    pub fn stable(p: StableParams) -> Self {
        CoordinateLevy { drift: -p.c1() / (p.alpha() - 1.0), sigma: 0.0, jumps: Some(p) }
    }
}

/// `𝓛g(w) = Σ_i ( b_i ∂_i g + σ_i²/2 ∂_ii g + ∫ (g(w + u e_i) − g(w) − u ∂_i g 1_{u<1}) Π_i(du) )`.
pub fn generator_orthant_levy(g: &SmoothG, w: &[f64], coords: &[CoordinateLevy]) -> Result<f64> {
    let d = g.dim;
    if w.len() != d || coords.len() != d {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }
    let grad = (g.gradient)(w);
    let hess = (g.hessian)(w);
    let g0 = (g.value)(w);
    let opts = outer_opts(g0);
    let mut total = 0.0;
    for (i, c) in coords.iter().enumerate() {
        total += c.drift * grad[i] + 0.5 * c.sigma * c.sigma * hess[i * d + i];
        let Some(p) = c.jumps else { continue };
        if p.c2() != 0.0 {
            return Err(Error::InvalidParameter("orthant generator needs upward jumps only".into()));
        }
        let shifted = |u: f64| {
            let mut z = w.to_vec();
            z[i] += u;
            (g.value)(&z) - g0
        };
        let dens = |u: f64| p.levy_density(u);
        let head = integrate_power_singular(|u| shifted(u) - u * grad[i], dens, 1.0 + p.alpha(), SINGULAR_SPLIT, rounding(g0))?;
        let mid = integrate(|u| (shifted(u) - u * grad[i]) * dens(u), SINGULAR_SPLIT, 1.0, opts)?;
        let tail = integrate_to_infinity(|u| shifted(u) * dens(u), 1.0, opts)?;
        total += head + mid + tail;
    }
    Ok(total)
}

/// Which form of the Skorokhod-stable MAP generator to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    /// Ordinate held fixed inside `f`, density `e^y (e^y−1)^{−α}`.
    Literal,
    /// Ordinate jump `x + y`, density `e^y (e^y−1)^{−(1+α)}`, plus the centring drift.
    Reconciled,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Literal => "literal",
            Variant::Reconciled => "reconciled",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "literal" => Ok(Variant::Literal),
            "reconciled" => Ok(Variant::Reconciled),
            _ => Err(Error::Parse(format!("unknown generator variant {s:?}"))),
        }
    }
}

/// `|Γ(1+α) sin(πα)/π|`.
pub fn skorokhod_c1(alpha: f64) -> f64 {
    (gamma(1.0 + alpha) * (PI * alpha).sin() / PI).abs()
}

/// Rounding level of head-fit coefficients for a bracket `f(·) − f0 − …` of values near `|f0|`;
/// the cubic fit amplifies value noise by a few orders of magnitude.
fn rounding(f0: f64) -> f64 {
    1e-12 * f0.abs().max(1.0)
}

/// Options for the regular parts: value noise of `f(·) − f0` integrated against weights of mass up
/// to ~1e4 near the split bounds the attainable absolute accuracy.
fn outer_opts(f0: f64) -> QuadOptions {
    QuadOptions { abs_tol: 1e-10 * f0.abs().max(1.0), ..QuadOptions::default() }
}

fn landing(theta: &SimplexPoint, j: usize, y: f64) -> Vec<f64> {
    // y > 0 always admissible.
    jump_vector_v(theta, j, y).map(|v| v.into_vec()).unwrap_or_else(|_| theta.components().to_vec())
}

/// Skorokhod-stable MAP generator at an interior `(x, θ)`.
///
/// The compensator is active iff `e^x (e^y − 1) < 1`, i.e. the jump of the underlying coordinate
/// is below one. The reconciled form carries the drift `−c1/(α−1) e^{(α−1)x} Σ_j V_j·∇f`.
pub fn generator_skorokhod_map(f: &TestFunction, x: f64, theta: &SimplexPoint, alpha: f64, variant: Variant) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("Skorokhod-stable generator needs alpha in (1,2), got {alpha}")));
    }
    if !theta.is_interior() || theta.dim() != f.dim {
        return Err(Error::OutsideSupport("generator needs an interior angle of matching dimension".into()));
    }
    let c1 = skorokhod_c1(alpha);
    let t = theta.components();
    let grad = f.gradient(x, t);
    let f0 = f.eval(x, t);
    let cut = (-x).exp().ln_1p();
    let eps = SINGULAR_SPLIT.min(cut);
    let opts = outer_opts(f0);
    let mut total = 0.0;
    for j in 0..f.dim {
        let vj = directional(&grad, t, j);
        let (p, shift) = match variant {
            Variant::Literal => (alpha, 0.0),
            Variant::Reconciled => (1.0 + alpha, 1.0),
        };
        let weight = move |y: f64| jump_weight(y, p);
        let bracket = |y: f64, compensate: bool| {
            let v = landing(theta, j, y);
            let jump = f.eval(x + shift * y, &v) - f0;
            let comp = match variant {
                Variant::Literal => vj,
                Variant::Reconciled => y.exp_m1() * vj,
            };
            if compensate { jump - comp } else { jump }
        };
        let head = integrate_power_singular(|y| bracket(y, true), weight, p, eps, rounding(f0))?;
        let mid = if cut > eps { integrate(|y| bracket(y, true) * weight(y), eps, cut, opts)? } else { 0.0 };
        let tail = integrate_to_infinity(|y| bracket(y, false) * weight(y), cut, opts)?;
        total += c1 * (head + mid + tail);
        if variant == Variant::Reconciled {
            total -= c1 / (alpha - 1.0) * ((alpha - 1.0) * x).exp() * vj;
        }
    }
    Ok(total)
}

/// Drift `b` and diffusion `a` of the reflected-BM MAP at angle `θ`, in `(ordinate, θ_1..θ_d)` order.
pub fn bm_map_coefficients(theta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let d = theta.len();
    let df = d as f64;
    let mut b = vec![-df / 2.0];
    b.extend(theta.iter().map(|t| df * t - 1.0));
    let mut a = DMatrix::zeros(d + 1, d + 1);
    a[(0, 0)] = df;
    for i in 0..d {
        let ti = theta[i];
        a[(0, i + 1)] = 1.0 - df * ti;
        a[(i + 1, 0)] = 1.0 - df * ti;
        a[(i + 1, i + 1)] = (1.0 - ti).powi(2) + (df - 1.0) * ti * ti;
        for j in i + 1..d {
            let tj = theta[j];
            let v = df * ti * tj - ti - tj;
            a[(i + 1, j + 1)] = v;
            a[(j + 1, i + 1)] = v;
        }
    }
    (b, a)
}

/// `Σ b_i ∂_i f + (1/2) Σ a_ij ∂_ij f`.
pub fn generator_bm_map(f: &TestFunction, x: f64, theta: &[f64]) -> Result<f64> {
    let h = f.hessian(x, theta).ok_or_else(|| Error::InvalidParameter("BM generator needs a Hessian".into()))?;
    let g = f.gradient(x, theta);
    let (b, a) = bm_map_coefficients(theta);
    let n = theta.len() + 1;
    let mut v: f64 = b.iter().zip(&g).map(|(p, q)| p * q).sum();
    for i in 0..n {
        for j in 0..n {
            v += 0.5 * a[(i, j)] * h[i * n + j];
        }
    }
    Ok(v)
}

/// Smallest eigenvalue of `a` restricted to `ℝ × {u : Σu = 0}`.
pub fn tangent_min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let d = n - 1;
    // Orthonormal basis: e₀ and the Helmert vectors of the sum-zero hyperplane.
    let mut q = DMatrix::zeros(n, d);
    q[(0, 0)] = 1.0;
    for k in 1..d {
        let kf = k as f64;
        let s = 1.0 / (kf * (kf + 1.0)).sqrt();
        for i in 0..k {
            q[(i + 1, k)] = s;
        }
        q[(k + 1, k)] = -kf * s;
    }
    let m = q.transpose() * a * &q;
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
