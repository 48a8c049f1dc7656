//! Dynkin defect `E f(state_τ) − f(state_0) − E ∫₀^τ Af` for the reflected MAP generators.
//!
//! `τ` is the first skeleton event at or after MAP time `t`; it is a stopping time, so the
//! defect vanishes for the true generator without any end-of-window correction.

use super::{Ensemble, TestReport};
use crate::analytics::{generator_bm_map, generator_skorokhod_map, TestFunction, Variant};
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::lamperti::ssmp_to_map;
use crate::path::{EventTag, MapPath};
use crate::ssmp::{simulate, Model, SsmpConfig, StopAt};
use crate::stats::MeanVar;

/// Default bound on `|Af|` along paths.
pub const DEFAULT_AF_BOUND: f64 = 1e6;

/// Reports per test function.
#[derive(Debug, Clone)]
pub struct DynkinOutcome {
    pub reports: Vec<TestReport>,
}

/// Defect of one path: `f(τ) − f(0) − ∫₀^τ Af`, trapezoidal between events and left-point across
/// marked jumps.
pub fn path_defect<A>(map: &MapPath, f: &TestFunction, af: A, bound: f64) -> Result<f64>
where
    A: Fn(f64, &[f64]) -> Result<f64>,
{
    let n = map.len();
    if map.is_cemetery(n - 1) {
        return Err(Error::InsufficientData("path absorbed before the Dynkin horizon".into()));
    }
    let checked = |x: f64, t: &[f64]| -> Result<f64> {
        let v = af(x, t)?;
        if !(v.abs() <= bound) {
            return Err(Error::GeneratorBound { value: v, bound });
        }
        Ok(v)
    };
    let mut integral = 0.0;
    let mut left = checked(map.ordinate[0], map.modulator(0))?;
    for k in 0..n - 1 {
        let dt = map.times[k + 1] - map.times[k];
        let right = checked(map.ordinate[k + 1], map.modulator(k + 1))?;
        integral += if map.tags[k + 1] == EventTag::Jump { dt * left } else { 0.5 * dt * (left + right) };
        left = right;
    }
    let end = f.eval(map.ordinate[n - 1], map.modulator(n - 1));
    Ok(end - f.eval(map.ordinate[0], map.modulator(0)) - integral)
}

fn defect_reports(name: &str, fs: &[TestFunction], defects: &[Vec<f64>], ens: &Ensemble) -> Vec<TestReport> {
    fs.iter()
        .enumerate()
        .map(|(i, f)| {
            let m: MeanVar = defects.iter().map(|d| d[i]).collect();
            TestReport::moment(&format!("{name}[{}]", f.name), m.mean(), m.std_error(), 0.0, defects.len(), ens.significance)
        })
        .collect()
}

/// Reflected-BM MAP generator against simulated Skorokhod-reflected Brownian paths from angle `θ`.
pub fn dynkin_bm(fs: &[TestFunction], cfg: &SsmpConfig, theta: &SimplexPoint, t: f64, ens: &Ensemble) -> Result<DynkinOutcome> {
    if cfg.model != Model::SkorokhodBm {
        return Err(Error::InvalidParameter("BM Dynkin test needs the Skorokhod-BM model".into()));
    }
    if fs.iter().any(|f| !f.has_hessian() || f.dim != cfg.dim) {
        return Err(Error::InvalidParameter("test functions need a Hessian and matching dimension".into()));
    }
    let defects = ens.run(|_, rng| {
        let sim = simulate(cfg, theta.components(), StopAt::ClockBudget(t), rng)?;
        let map = ssmp_to_map(&sim.path, 2.0)?;
        fs.iter().map(|f| path_defect(&map, f, |x, th| generator_bm_map(f, x, th), DEFAULT_AF_BOUND)).collect()
    })?;
    Ok(DynkinOutcome { reports: defect_reports("dynkin_bm", fs, &defects, ens) })
}

/// Bilinear table of `Af(x, (θ₁, 1−θ₁))` for `d = 2`, with direct evaluation outside the ordinate
/// range and clamping of `θ₁` to the tabulated band.
pub struct AfTable {
    xs: Vec<f64>,
    ts: Vec<f64>,
    values: Vec<f64>,
}

impl AfTable {
    pub fn build<A: Fn(f64, &[f64]) -> Result<f64> + Sync>(af: A, x_range: (f64, f64), nx: usize, nt: usize) -> Result<AfTable> {
        use rayon::prelude::*;
        let xs: Vec<f64> = (0..nx).map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (nx - 1) as f64).collect();
        // Cosine spacing concentrates nodes near the faces; the ends sit 1e-4 inside.
        let edge = 1e-4;
        let ts: Vec<f64> = (0..nt)
            .map(|j| edge + (1.0 - 2.0 * edge) * 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / (nt - 1) as f64).cos()))
            .collect();
        let values: Vec<f64> = (0..nx * nt)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / nt, k % nt);
                af(xs[i], &[ts[j], 1.0 - ts[j]])
            })
            .collect::<Result<_>>()?;
        Ok(AfTable { xs, ts, values })
    }

    /// Interpolated value, or `None` outside the ordinate range.
    pub fn lookup(&self, x: f64, t1: f64) -> Option<f64> {
        let (x0, x1) = (self.xs[0], *self.xs.last().unwrap());
        if !(x >= x0 && x <= x1) {
            return None;
        }
        let t = t1.clamp(self.ts[0], *self.ts.last().unwrap());
        let i = (((x - x0) / (x1 - x0) * (self.xs.len() - 1) as f64) as usize).min(self.xs.len() - 2);
        let j = self.ts.partition_point(|&v| v <= t).clamp(1, self.ts.len() - 1) - 1;
        let u = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        let v = (t - self.ts[j]) / (self.ts[j + 1] - self.ts[j]);
        let nt = self.ts.len();
        let at = |a: usize, b: usize| self.values[a * nt + b];
        Some((1.0 - u) * (1.0 - v) * at(i, j) + u * (1.0 - v) * at(i + 1, j) + (1.0 - u) * v * at(i, j + 1) + u * v * at(i + 1, j + 1))
    }
}

/// Table resolution for the stable Dynkin test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub x_range: (f64, f64),
    pub nx: usize,
    pub nt: usize,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec { x_range: (-3.0, 3.0), nx: 241, nt: 161 }
    }
}

/// Skorokhod-stable MAP generator (`d = 2`) against simulated paths, one report per function.
///
/// A variant whose generator integral diverges yields failing reports that carry the reason.
pub fn dynkin_skorokhod(
    fs: &[TestFunction],
    variant: Variant,
    cfg: &SsmpConfig,
    theta: &SimplexPoint,
    t: f64,
    table: TableSpec,
    ens: &Ensemble,
) -> Result<DynkinOutcome> {
    if cfg.model != Model::SkorokhodStable || cfg.dim != 2 {
        return Err(Error::InvalidParameter("stable Dynkin test needs the two-dimensional Skorokhod-stable model".into()));
    }
    let alpha = cfg.index();
    let name = format!("dynkin_skorokhod_{}", variant.as_str());
    let probe = SimplexPoint::new(vec![0.3, 0.7])?;
    let mut tables = Vec::with_capacity(fs.len());
    for f in fs {
        match generator_skorokhod_map(f, 0.0, &probe, alpha, variant) {
            Err(Error::Divergent(why)) => {
                let mut r = TestReport::moment(&format!("{name}[{}]", f.name), 0.0, 0.0, 0.0, 0, ens.significance);
                r.pass = false;
                r.statistic = f64::INFINITY;
                r.p_value = 0.0;
                r.notes.push(format!("generator integral diverges: {why}"));
                return Ok(DynkinOutcome { reports: vec![r; 1].into_iter().chain(fs.iter().skip(1).map(|g| {
                    let mut s = TestReport::moment(&format!("{name}[{}]", g.name), 0.0, 0.0, 0.0, 0, ens.significance);
                    s.pass = false;
                    s.statistic = f64::INFINITY;
                    s.p_value = 0.0;
                    s.notes.push("generator integral diverges".into());
                    s
                })).collect() });
            }
            Err(e) => return Err(e),
            Ok(_) => {}
        }
        let af = |x: f64, th: &[f64]| generator_skorokhod_map(f, x, &SimplexPoint::new(th.to_vec())?, alpha, variant);
        tables.push(AfTable::build(af, table.x_range, table.nx, table.nt)?);
    }
    let defects = ens.run(|_, rng| {
        let sim = simulate(cfg, theta.components(), StopAt::ClockBudget(t), rng)?;
        let map = ssmp_to_map(&sim.path, alpha)?;
        fs.iter()
            .zip(&tables)
            .map(|(f, tab)| {
                let af = |x: f64, th: &[f64]| match tab.lookup(x, th[0]) {
                    Some(v) => Ok(v),
                    None => {
                        let t1 = th[0].clamp(1e-4, 1.0 - 1e-4);
                        generator_skorokhod_map(f, x, &SimplexPoint::new(vec![t1, 1.0 - t1])?, alpha, variant)
                    }
                };
                path_defect(&map, f, af, DEFAULT_AF_BOUND)
            })
            .collect()
    })?;
    Ok(DynkinOutcome { reports: defect_reports(&name, fs, &defects, ens) })
}
