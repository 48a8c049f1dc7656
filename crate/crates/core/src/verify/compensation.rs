//! Compensation formula of the killed MAP's Lévy system.
//!
//! For a bounded functional `f` of `(ξ_{s−}, Δξ_s, Ξ_{s−}, Ξ_s)`, the expected sum over jumps with
//! `|Δξ| > δ` before `t ∧ ζ` equals the expected time integral of `f` against the jump kernel.

use super::{DetailRow, Ensemble, TestReport};
use crate::analytics::kernel::{downward_mass, jump_kernel_density, jump_vector_v, upward_mass};
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::lamperti::{map_to_ssmp, ssmp_to_map};
use crate::levy::StableParams;
use crate::path::{EventTag, MapPath};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::ssmp::{simulate, Model, SsmpConfig, StopAt};
use crate::stats::MeanVar;

/// A bounded functional of a MAP jump.
pub trait JumpFunctional: Sync {
    fn name(&self) -> String;

    /// `f(ξ_{s−}, Δξ, Ξ_{s−}, Ξ_s)`.
    fn eval(&self, xi_minus: f64, dxi: f64, theta_minus: &[f64], theta: &[f64]) -> f64;

    /// Supremum of `|f|` on the truncated domain; infinite values are rejected.
    fn bound(&self) -> f64;

    /// `Σ_j ∫_{|y|>δ} f(ξ, y, θ, v(θ,j,y)) L(θ, j, dy)`; quadrature by default.
    fn kernel_integral(&self, params: &[StableParams], xi: f64, theta: &SimplexPoint, delta: f64) -> Result<f64> {
        let opts = QuadOptions { rel_tol: 1e-9, ..QuadOptions::default() };
        let t = theta.components();
        let mut total = 0.0;
        for j in 0..t.len() {
            let integrand = |y: f64| {
                let k = jump_kernel_density(params, theta, j, y).unwrap_or(0.0);
                if k == 0.0 {
                    return 0.0;
                }
                let v = jump_vector_v(theta, j, y).map(|v| v.into_vec()).unwrap_or_else(|_| t.to_vec());
                self.eval(xi, y, t, &v) * k
            };
            total += integrate_to_infinity(integrand, delta, opts)?;
            let lo = (1.0 - t[j]).ln();
            if lo < -delta {
                total += integrate(integrand, lo, -delta, opts)?;
            }
        }
        Ok(total)
    }
}

/// `f ≡ 1`: counts jumps.
#[derive(Debug, Clone, Copy)]
pub struct Indicator;

impl JumpFunctional for Indicator {
    fn name(&self) -> String {
        "indicator".into()
    }
    fn eval(&self, _: f64, _: f64, _: &[f64], _: &[f64]) -> f64 {
        1.0
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn kernel_integral(&self, params: &[StableParams], _: f64, theta: &SimplexPoint, delta: f64) -> Result<f64> {
        Ok(params.iter().zip(theta.components()).map(|(p, &t)| upward_mass(p, delta) + downward_mass(p, t, delta)).sum())
    }
}

/// `f = up` on upward jumps and `down` on downward jumps.
#[derive(Debug, Clone, Copy)]
pub struct SignSplit {
    pub up: f64,
    pub down: f64,
}

impl JumpFunctional for SignSplit {
    fn name(&self) -> String {
        format!("sign_split(up={}, down={})", self.up, self.down)
    }
    fn eval(&self, _: f64, dxi: f64, _: &[f64], _: &[f64]) -> f64 {
        if dxi > 0.0 { self.up } else { self.down }
    }
    fn bound(&self) -> f64 {
        self.up.abs().max(self.down.abs())
    }
    fn kernel_integral(&self, params: &[StableParams], _: f64, theta: &SimplexPoint, delta: f64) -> Result<f64> {
        Ok(params
            .iter()
            .zip(theta.components())
            .map(|(p, &t)| self.up * upward_mass(p, delta) + self.down * downward_mass(p, t, delta))
            .sum())
    }
}

/// Per-path empirical jump sum and kernel-side integral up to MAP time `t`.
pub fn path_sides<F: JumpFunctional + ?Sized>(
    f: &F,
    map: &MapPath,
    params: &[StableParams],
    t: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    let mut emp = 0.0;
    let mut ker = 0.0;
    let end = t.min(map.lifetime.value());
    for k in 0..map.len() {
        let tk = map.times[k];
        if tk > end {
            break;
        }
        if k > 0 && map.tags[k] == EventTag::Jump && !map.is_cemetery(k) {
            let dxi = map.ordinate[k] - map.ordinate[k - 1];
            if dxi.abs() > delta {
                emp += f.eval(map.ordinate[k - 1], dxi, map.modulator(k - 1), map.modulator(k));
            }
        }
        if map.is_cemetery(k) {
            break;
        }
        let next = if k + 1 < map.len() { map.times[k + 1].min(end) } else { end };
        if next > tk {
            let theta = SimplexPoint::new(map.modulator(k).to_vec())?;
            ker += (next - tk) * f.kernel_integral(params, map.ordinate[k], &theta, delta)?;
        }
    }
    Ok((emp, ker))
}

/// Empirical jump sum versus kernel integral on the same ensemble, started at `(0, θ)`.
pub fn compensation_test<F: JumpFunctional + ?Sized>(
    f: &F,
    cfg: &SsmpConfig,
    theta: &SimplexPoint,
    t: f64,
    delta: f64,
    ens: &Ensemble,
) -> Result<TestReport> {
    if cfg.model != Model::Killed {
        return Err(Error::InvalidParameter("compensation test needs the killed model".into()));
    }
    if !f.bound().is_finite() {
        return Err(Error::InvalidParameter(format!("functional {} is unbounded", f.name())));
    }
    let alpha = cfg.index();
    let sides = ens.run(|_, rng| {
        let sim = simulate(cfg, theta.components(), StopAt::ClockBudget(t), rng)?;
        let path = if ens.roundtrip { map_to_ssmp(&ssmp_to_map(&sim.path, alpha)?, alpha)? } else { sim.path };
        let map = ssmp_to_map(&path, alpha)?;
        path_sides(f, &map, &cfg.params, t, delta)
    })?;
    let emp: MeanVar = sides.iter().map(|s| s.0).collect();
    let ker: MeanVar = sides.iter().map(|s| s.1).collect();
    let diff: MeanVar = sides.iter().map(|s| s.0 - s.1).collect();
    let n = sides.len();
    let mut r = TestReport::moment(&format!("compensation[{}]", f.name()), emp.mean(), diff.std_error(), ker.mean(), n, ens.significance);
    r.details.push(DetailRow::moment("jump_sum", n, emp.mean(), ker.mean(), emp.std_error()));
    r.details.push(DetailRow::moment("kernel_side", n, ker.mean(), emp.mean(), ker.std_error()));
    r.notes.push(format!("cutoff |dxi| > {delta}, MAP horizon {t}"));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Generic(SignSplit);
    impl JumpFunctional for Generic {
        fn name(&self) -> String {
            "generic".into()
        }
        fn eval(&self, a: f64, b: f64, c: &[f64], d: &[f64]) -> f64 {
            self.0.eval(a, b, c, d)
        }
        fn bound(&self) -> f64 {
            self.0.bound()
        }
    }

    #[test]
    fn closed_forms_match_default_quadrature() {
        let p = vec![StableParams::new(1.3, 0.45).unwrap(); 2];
        let theta = SimplexPoint::new(vec![0.7, 0.3]).unwrap();
        let s = SignSplit { up: 2.0, down: -1.0 };
        let closed = s.kernel_integral(&p, 0.0, &theta, 0.2).unwrap();
        let quad = Generic(s).kernel_integral(&p, 0.0, &theta, 0.2).unwrap();
        assert!((closed - quad).abs() < 1e-8 * closed.abs());
    }

    #[test]
    fn huge_cutoff_gives_empty_sides() {
        let p = StableParams::symmetric(1.0).unwrap();
        let cfg = SsmpConfig::iid(Model::Killed, 2, p, 10.0).unwrap();
        let h = SimplexPoint::barycentre(2);
        let ens = Ensemble::new(200, 3);
        let r = compensation_test(&Indicator, &cfg, &h, 0.5, 1e3, &ens).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(r.details[1].estimate.abs() < 1e-300);
        assert!(r.pass);
    }
}
