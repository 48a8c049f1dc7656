//! Test functions on `ℝ × S` and the oblique-derivative boundary class.
//!
//! Functions are evaluated at `(x, θ)` with `θ` an ambient vector of `ℝ^d`; gradients carry
//! `d + 1` components with index 0 the ordinate direction, Hessians are row-major `(d+1)²`.

use crate::error::{Error, Result};
use crate::geometry::{SimplexPoint, SIMPLEX_TOL};
use rand::Rng;
use std::sync::Arc;

type Scalar2 = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
type Vector2 = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type Scalar1 = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Vector1 = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth function on the closed orthant with analytic gradient and Hessian.
#[derive(Clone)]
pub struct SmoothG {
    pub name: String,
    pub dim: usize,
    pub bound: f64,
    pub value: Scalar1,
    pub gradient: Vector1,
    pub hessian: Vector1,
}

impl std::fmt::Debug for SmoothG {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothG({}, d={})", self.name, self.dim)
    }
}

impl SmoothG {
    pub fn constant(dim: usize, c: f64) -> SmoothG {
        SmoothG {
            name: format!("const({c})"),
            dim,
            bound: c.abs(),
            value: Arc::new(move |_| c),
            gradient: Arc::new(move |_| vec![0.0; dim]),
            hessian: Arc::new(move |_| vec![0.0; dim * dim]),
        }
    }

    /// `exp(−Σ a_k w_k²)`; Neumann on every face.
    pub fn gaussian(weights: Vec<f64>) -> SmoothG {
        let dim = weights.len();
        let (w1, w2, w3) = (weights.clone(), weights.clone(), weights.clone());
        let val = move |w: &[f64], a: &[f64]| (-w.iter().zip(a).map(|(x, k)| k * x * x).sum::<f64>()).exp();
        SmoothG {
            name: format!("gaussian{weights:?}"),
            dim,
            bound: 1.0,
            value: Arc::new(move |w| val(w, &w1)),
            gradient: Arc::new(move |w| {
                let g = val(w, &w2);
                if g == 0.0 {
                    return vec![0.0; dim];
                }
                w.iter().zip(&w2).map(|(x, k)| -2.0 * k * x * g).collect()
            }),
            hessian: Arc::new(move |w| {
                let g = val(w, &w3);
                let mut h = vec![0.0; dim * dim];
                if g == 0.0 {
                    return h;
                }
                for i in 0..dim {
                    for j in 0..dim {
                        let mut v = 4.0 * w3[i] * w3[j] * w[i] * w[j] * g;
                        if i == j {
                            v -= 2.0 * w3[i] * g;
                        }
                        h[i * dim + j] = v;
                    }
                }
                h
            }),
        }
    }

    /// `1/(1 + Σ w_k²)`; Neumann on every face.
    pub fn rational(dim: usize) -> SmoothG {
        let s = |w: &[f64]| 1.0 + w.iter().map(|x| x * x).sum::<f64>();
        SmoothG {
            name: "rational".into(),
            dim,
            bound: 1.0,
            value: Arc::new(move |w| 1.0 / s(w)),
            gradient: Arc::new(move |w| {
                let u = s(w);
                if u.is_infinite() {
                    return vec![0.0; dim];
                }
                w.iter().map(|x| -2.0 * x / (u * u)).collect()
            }),
            hessian: Arc::new(move |w| {
                let u = s(w);
                let mut h = vec![0.0; dim * dim];
                if u.is_infinite() {
                    return h;
                }
                for i in 0..dim {
                    for j in 0..dim {
                        let mut v = 8.0 * w[i] * w[j] / (u * u * u);
                        if i == j {
                            v -= 2.0 / (u * u);
                        }
                        h[i * dim + j] = v;
                    }
                }
                h
            }),
        }
    }

    /// `cos(w_1²) exp(−Σ w_k²)`; Neumann on every face.
    pub fn cosine_bump(dim: usize) -> SmoothG {
        // The Gaussian factor underflows first; testing it keeps `cos(∞)` out at infinity.
        let val = |w: &[f64]| {
            let e = (-w.iter().map(|x| x * x).sum::<f64>()).exp();
            if e == 0.0 { 0.0 } else { (w[0] * w[0]).cos() * e }
        };
        SmoothG {
            name: "cosine_bump".into(),
            dim,
            bound: 1.0,
            value: Arc::new(val),
            gradient: Arc::new(move |w| {
                let e = (-w.iter().map(|x| x * x).sum::<f64>()).exp();
                if e == 0.0 {
                    return vec![0.0; dim];
                }
                let (c, s) = ((w[0] * w[0]).cos(), (w[0] * w[0]).sin());
                (0..dim)
                    .map(|k| if k == 0 { (-2.0 * w[0] * s - 2.0 * w[0] * c) * e } else { -2.0 * w[k] * c * e })
                    .collect()
            }),
            hessian: Arc::new(move |w| {
                let e = (-w.iter().map(|x| x * x).sum::<f64>()).exp();
                if e == 0.0 {
                    return vec![0.0; dim * dim];
                }
                let (c, s) = ((w[0] * w[0]).cos(), (w[0] * w[0]).sin());
                let x = w[0];
                // First factor p = cos(x²), second factor e; derivatives of p only in coordinate 0.
                let p0 = -2.0 * x * s;
                let p00 = -2.0 * s - 4.0 * x * x * c;
                let mut h = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        let ei = -2.0 * w[i] * e;
                        let ej = -2.0 * w[j] * e;
                        let mut eij = 4.0 * w[i] * w[j] * e;
                        if i == j {
                            eij -= 2.0 * e;
                        }
                        let pi = if i == 0 { p0 } else { 0.0 };
                        let pj = if j == 0 { p0 } else { 0.0 };
                        let pij = if i == 0 && j == 0 { p00 } else { 0.0 };
                        h[i * dim + j] = pij * e + pi * ej + pj * ei + c * eij;
                    }
                }
                h
            }),
        }
    }

    /// `Π_k cos(w_k) e^{−w_k}`: not Neumann, `∂_k g = −1` at the origin.
    pub fn cos_exp_product(dim: usize) -> SmoothG {
        let val = |w: &[f64]| w.iter().map(|x| x.cos() * (-x).exp()).product::<f64>();
        SmoothG {
            name: "cos_exp_product".into(),
            dim,
            bound: 1.0,
            value: Arc::new(val),
            gradient: Arc::new(move |w| {
                let f: Vec<f64> = w.iter().map(|x| x.cos() * (-x).exp()).collect();
                let df: Vec<f64> = w.iter().map(|x| -(x.sin() + x.cos()) * (-x).exp()).collect();
                (0..dim).map(|k| (0..dim).map(|m| if m == k { df[m] } else { f[m] }).product()).collect()
            }),
            hessian: Arc::new(move |w| {
                let f: Vec<f64> = w.iter().map(|x| x.cos() * (-x).exp()).collect();
                let df: Vec<f64> = w.iter().map(|x| -(x.sin() + x.cos()) * (-x).exp()).collect();
                let ddf: Vec<f64> = w.iter().map(|x| 2.0 * x.sin() * (-x).exp()).collect();
                let mut h = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        h[i * dim + j] = (0..dim)
                            .map(|m| match (m == i, m == j) {
                                (true, true) => ddf[m],
                                (true, false) | (false, true) => df[m],
                                _ => f[m],
                            })
                            .product();
                    }
                }
                h
            }),
        }
    }

    /// `(1/2) Σ ∂²g/∂z_i²`.
    pub fn half_laplacian(&self, w: &[f64]) -> f64 {
        let h = (self.hessian)(w);
        0.5 * (0..self.dim).map(|i| h[i * self.dim + i]).sum::<f64>()
    }
}

/// A function `f(x, θ)` with analytic derivatives.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub dim: usize,
    pub bound: f64,
    value: Scalar2,
    gradient: Vector2,
    hessian: Option<Vector2>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction({}, d={})", self.name, self.dim)
    }
}

impl TestFunction {
    pub fn new(name: &str, dim: usize, bound: f64, value: Scalar2, gradient: Vector2, hessian: Option<Vector2>) -> Self {
        TestFunction { name: name.into(), dim, bound, value, gradient, hessian }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let n = dim + 1;
        TestFunction::new(
            &format!("const({c})"),
            dim,
            c.abs(),
            Arc::new(move |_, _| c),
            Arc::new(move |_, _| vec![0.0; n]),
            Some(Arc::new(move |_, _| vec![0.0; n * n])),
        )
    }

    pub fn eval(&self, x: f64, theta: &[f64]) -> f64 {
        (self.value)(x, theta)
    }

    pub fn gradient(&self, x: f64, theta: &[f64]) -> Vec<f64> {
        (self.gradient)(x, theta)
    }

    pub fn hessian(&self, x: f64, theta: &[f64]) -> Option<Vec<f64>> {
        self.hessian.as_ref().map(|h| h(x, theta))
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    /// Largest relative deviation of the gradient from central differences at `(x, θ)`.
    pub fn gradient_fd_error(&self, x: f64, theta: &[f64], step: f64) -> f64 {
        let g = self.gradient(x, theta);
        let mut worst: f64 = 0.0;
        for k in 0..=self.dim {
            let fd = if k == 0 {
                (self.eval(x + step, theta) - self.eval(x - step, theta)) / (2.0 * step)
            } else {
                let mut p = theta.to_vec();
                let mut m = theta.to_vec();
                p[k - 1] += step;
                m[k - 1] -= step;
                (self.eval(x, &p) - self.eval(x, &m)) / (2.0 * step)
            };
            worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1.0));
        }
        worst
    }
}

/// Tolerance of the Neumann spot check.
pub const NEUMANN_TOL: f64 = 1e-8;

/// Pulls a Neumann function back to `f(x, θ) = g(e^x θ)`, rejecting `g` whose normal derivative
/// exceeds [`NEUMANN_TOL`] at one of 20 deterministic face points.
pub fn make_class_d(g: SmoothG) -> Result<TestFunction> {
    let d = g.dim;
    let mut rng = crate::rng::stream(0x4e65_756d, 0);
    for k in 0..20 {
        let face = k % d;
        let mut w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 3.0).collect();
        w[face] = 0.0;
        let der = (g.gradient)(&w)[face];
        if der.abs() > NEUMANN_TOL {
            return Err(Error::NotNeumann { point: w, derivative: der });
        }
    }
    let (gv, gg, gh) = (g.value.clone(), g.gradient.clone(), g.hessian.clone());
    let gg2 = g.gradient.clone();
    // Zero components stay zero even when e^x overflows.
    let lift = |x: f64, t: &[f64]| -> Vec<f64> { t.iter().map(|&c| if c == 0.0 { 0.0 } else { x.exp() * c }).collect() };
    let value: Scalar2 = Arc::new(move |x, t| gv(&lift(x, t)));
    let gradient: Vector2 = Arc::new(move |x, t| {
        let w = lift(x, t);
        let dg = gg(&w);
        let mut out = Vec::with_capacity(d + 1);
        out.push(w.iter().zip(&dg).map(|(a, b)| a * b).sum());
        out.extend(dg.iter().map(|v| x.exp() * v));
        out
    });
    let hessian: Vector2 = Arc::new(move |x, t| {
        let w = lift(x, t);
        let dg = gg2(&w);
        let hg = gh(&w);
        let ex = x.exp();
        let n = d + 1;
        let mut h = vec![0.0; n * n];
        let mut hxx: f64 = w.iter().zip(&dg).map(|(a, b)| a * b).sum();
        for k in 0..d {
            for l in 0..d {
                hxx += w[k] * w[l] * hg[k * d + l];
            }
        }
        h[0] = hxx;
        for k in 0..d {
            let mixed = ex * dg[k] + ex * (0..d).map(|l| w[l] * hg[k * d + l]).sum::<f64>();
            h[k + 1] = mixed;
            h[(k + 1) * n] = mixed;
            for l in 0..d {
                h[(k + 1) * n + l + 1] = ex * ex * hg[k * d + l];
            }
        }
        h
    });
    Ok(TestFunction::new(&format!("pullback({})", g.name), d, g.bound, value, gradient, Some(hessian)))
}

/// Oblique derivative `(e₀ + e_i − Σ_{j≠i} θ_j e_j)·∇f(x, θ)` at a boundary angle with `θ_i = 0`.
pub fn class_d_residual(f: &TestFunction, x: f64, i: usize, theta: &SimplexPoint) -> Result<f64> {
    let t = theta.components();
    if i >= t.len() || t[i].abs() > SIMPLEX_TOL {
        return Err(Error::OutsideSupport(format!("theta_{i} must vanish on the boundary face")));
    }
    let g = f.gradient(x, t);
    let mut r = g[0] + g[i + 1];
    for (j, &tj) in t.iter().enumerate() {
        if j != i {
            r -= tj * g[j + 1];
        }
    }
    Ok(r)
}

/// The jump direction `V_j = e₀ + (1−θ_j)e_j − Σ_{k≠j} θ_k e_k` dotted with `∇f`.
pub fn directional(grad: &[f64], theta: &[f64], j: usize) -> f64 {
    let mut r = grad[0] + grad[j + 1];
    for (k, &tk) in theta.iter().enumerate() {
        r -= tk * grad[k + 1];
    }
    r
}
