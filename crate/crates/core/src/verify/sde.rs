//! Euler scheme for the two-dimensional reflected SDE and its comparison with transformed paths.

use super::{DetailRow, Ensemble, TestReport};
use crate::analytics::sde_coefficients;
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::lamperti::{map_state_at, ssmp_to_map};
use crate::path::{EventTag, Lifetime, MapPath};
use crate::ssmp::{simulate, Model, SsmpConfig, StopAt};
use crate::stats::{ks_two_sample, MeanVar};
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest overshoot a single fold may absorb; beyond it the fold would leave `[0, 1]`.
pub const MAX_OVERSHOOT: f64 = 0.5;

/// One Euler step of `(ρ, Θ¹)` with symmetrized reflection of `Θ¹` into `[0, 1]`.
///
/// The folded distance `2·overshoot` is the local-time increment; `γ_ρ = 1` on both faces.
fn euler_step<R: Rng + ?Sized>(rho: &mut f64, t1: &mut f64, dt: f64, rng: &mut R) -> Result<()> {
    let c = sde_coefficients(&SimplexPoint::new(vec![*t1, 1.0 - *t1])?)?;
    let sd = dt.sqrt();
    let w1: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
    let w2: f64 = rng.sample::<f64, _>(StandardNormal) * sd * std::f64::consts::SQRT_2;
    *rho += c.a[0] * dt + c.b[0][0] * w1 + c.b[0][1] * w2;
    let mut x = *t1 + c.a[1] * dt + c.b[1][0] * w1 + c.b[1][1] * w2;
    let over = if x < 0.0 { -x } else if x > 1.0 { x - 1.0 } else { 0.0 };
    if over > MAX_OVERSHOOT {
        return Err(Error::StepTooCoarse(over));
    }
    if over > 0.0 {
        x = if x < 0.0 { -x } else { 2.0 - x };
        *rho += 2.0 * over;
    }
    *t1 = x;
    Ok(())
}

/// Euler path of `(ρ, Θ)` from `(0, θ₀)` on a uniform grid of step `dt` up to `horizon`.
pub fn sde_simulate<R: Rng + ?Sized>(theta0: &SimplexPoint, horizon: f64, dt: f64, rng: &mut R) -> Result<MapPath> {
    if theta0.dim() != 2 || !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidParameter("SDE needs d = 2, dt > 0 and horizon > 0".into()));
    }
    let steps = (horizon / dt).ceil() as usize;
    let h = horizon / steps as f64;
    let mut map = MapPath::with_capacity(2, steps + 1);
    let (mut rho, mut t1) = (0.0, theta0[0]);
    map.push(0.0, rho, &[t1, 1.0 - t1], None, EventTag::Start);
    for k in 1..=steps {
        euler_step(&mut rho, &mut t1, h, rng)?;
        map.push(k as f64 * h, rho, &[t1, 1.0 - t1], None, EventTag::Grid);
    }
    map.lifetime = Lifetime::Censored(horizon);
    Ok(map)
}

fn sde_terminal<R: Rng + ?Sized>(theta0: &SimplexPoint, t: f64, dt: f64, rng: &mut R) -> Result<(f64, f64)> {
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let (mut rho, mut t1) = (0.0, theta0[0]);
    for _ in 0..steps {
        euler_step(&mut rho, &mut t1, h, rng)?;
    }
    Ok((rho, t1))
}

/// Two-sample KS on `ρ_t` and `Θ¹_t`: SDE Euler paths against transformed Skorokhod-BM paths.
///
/// The two samples use disjoint halves of the ensemble's streams. Passes iff both p-values exceed
/// the significance level.
pub fn sde_vs_transform_test(cfg: &SsmpConfig, theta: &SimplexPoint, t: f64, dt: f64, ens: &Ensemble) -> Result<TestReport> {
    if cfg.model != Model::SkorokhodBm || cfg.dim != 2 {
        return Err(Error::InvalidParameter("SDE comparison needs the two-dimensional Skorokhod-BM model".into()));
    }
    let n = ens.n_paths;
    let pairs: Vec<(f64, f64)> = ens.run(|i, rng| {
        if i % 2 == 0 {
            sde_terminal(theta, t, dt, rng)
        } else {
            let sim = simulate(cfg, theta.components(), StopAt::ClockBudget(t), rng)?;
            let map = ssmp_to_map(&sim.path, 2.0)?;
            let (xi, th) = map_state_at(&map, t).ok_or_else(|| Error::InsufficientData("transformed path died before t".into()))?;
            Ok((xi, th[0]))
        }
    })?;
    let (sde, ssmp): (Vec<_>, Vec<_>) = pairs.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    let col = |v: &[(usize, &(f64, f64))], c: usize| -> Vec<f64> { v.iter().map(|(_, p)| if c == 0 { p.0 } else { p.1 }).collect() };
    let ks_rho = ks_two_sample(&col(&sde, 0), &col(&ssmp, 0));
    let ks_theta = ks_two_sample(&col(&sde, 1), &col(&ssmp, 1));
    let (worst, p) = if ks_rho.p_value <= ks_theta.p_value { (ks_rho.statistic, ks_rho.p_value) } else { (ks_theta.statistic, ks_theta.p_value) };
    let mut r = TestReport::distributional("sde_vs_transform", "transformed skorokhod_bm", worst, p, n, ens.significance);
    r.details.push(DetailRow::distributional("rho", n, ks_rho.statistic, ks_rho.p_value, ens.significance));
    r.details.push(DetailRow::distributional("theta1", n, ks_theta.statistic, ks_theta.p_value, ens.significance));
    r.pass = r.details.iter().all(|d| d.pass);
    Ok(r)
}

/// Sample variance of `ρ_t` from the SDE against `2t`, with a fourth-moment standard error.
pub fn sde_short_time_variance(theta: &SimplexPoint, t: f64, dt: f64, ens: &Ensemble) -> Result<TestReport> {
    let rho: Vec<f64> = ens.run(|_, rng| sde_terminal(theta, t, dt, rng).map(|p| p.0))?;
    let m: MeanVar = rho.iter().copied().collect();
    let var = m.variance();
    let m4: MeanVar = rho.iter().map(|x| (x - m.mean()).powi(4)).collect();
    let se = ((m4.mean() - var * var).max(0.0) / rho.len() as f64).sqrt();
    Ok(TestReport::moment("sde_short_time_variance", var, se, 2.0 * t, rho.len(), ens.significance))
}
