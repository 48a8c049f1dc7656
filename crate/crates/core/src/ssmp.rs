//! The four orthant ssMps: stable killed at orthant exit, reflected symmetric stable,
//! Skorokhod-reflected spectrally-positive stable, and Skorokhod-reflected Brownian motion.
//!
//! Constructions are pure maps from one-dimensional driver skeletons on a shared event grid to a
//! d-dimensional skeleton. [`simulate`] samples the drivers and applies the construction.

use crate::error::{Error, Result};
use crate::geometry::l1_norm;
use crate::levy::{simulate_drivers, AdaptiveScheme, DistanceRule, Driver, DriverState, StableParams};
use crate::path::{EventTag, JumpMark, PathStatus, SkeletonPath};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Killed,
    Symmetric,
    SkorokhodStable,
    SkorokhodBm,
}

impl Model {
    pub fn parse(s: &str) -> Result<Model> {
        Ok(match s {
            "killed" | "killed-orthant" => Model::Killed,
            "symmetric" | "reflected-symmetric" => Model::Symmetric,
            "skorokhod-stable" => Model::SkorokhodStable,
            "skorokhod-bm" => Model::SkorokhodBm,
            other => return Err(Error::InvalidParameter(format!("unknown model {other:?}"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Killed => "killed",
            Model::Symmetric => "symmetric",
            Model::SkorokhodStable => "skorokhod-stable",
            Model::SkorokhodBm => "skorokhod-bm",
        }
    }

    pub fn all() -> [Model; 4] {
        [Model::Killed, Model::Symmetric, Model::SkorokhodStable, Model::SkorokhodBm]
    }

    fn distance_rule(self) -> DistanceRule {
        match self {
            Model::Killed | Model::Symmetric => DistanceRule::Absolute,
            Model::SkorokhodStable | Model::SkorokhodBm => DistanceRule::Reflected,
        }
    }
}

/// Validated model configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmpConfig {
    pub model: Model,
    pub dim: usize,
    /// One entry per coordinate; empty for Brownian motion.
    pub params: Vec<StableParams>,
    /// Absorption threshold on `‖·‖₁`.
    pub epsilon: f64,
    pub horizon: f64,
    pub scheme: AdaptiveScheme,
}

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Default cap on the Lamperti-clock length of one sampler step.
pub const DEFAULT_CLOCK_STEP: f64 = 1e-3;

fn model_index(model: Model, params: &[StableParams]) -> f64 {
    match (model, params.first()) {
        (Model::SkorokhodBm, _) | (_, None) => 2.0,
        (_, Some(p)) => p.alpha(),
    }
}

/// Relative threshold floor `φ` per model.
///
/// Exits of the killed and symmetric models happen by jumps, so the floor must stay far below
/// typical boundary distances or near-face jumps are absorbed into the Gaussian part and creep
/// across. A Skorokhod coordinate sits at distance zero on its face, where the floor alone sets
/// the threshold and a tiny value would make the jump rate explode.
pub fn default_phi(model: Model) -> f64 {
    match model.distance_rule() {
        DistanceRule::Absolute => 1e-6,
        DistanceRule::Reflected => 1e-2,
    }
}

impl SsmpConfig {
    pub fn new(model: Model, dim: usize, params: Vec<StableParams>, horizon: f64) -> Result<Self> {
        let index = model_index(model, &params);
        let cfg = SsmpConfig {
            model,
            dim,
            params,
            epsilon: DEFAULT_EPSILON,
            horizon,
            scheme: AdaptiveScheme {
                max_step: DEFAULT_CLOCK_STEP,
                phi: default_phi(model),
                clock_index: Some(index),
                ..AdaptiveScheme::default()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same stable law in every coordinate.
    pub fn iid(model: Model, dim: usize, params: StableParams, horizon: f64) -> Result<Self> {
        Self::new(model, dim, vec![params; dim], horizon)
    }

    pub fn brownian(dim: usize, horizon: f64) -> Result<Self> {
        Self::new(Model::SkorokhodBm, dim, Vec::new(), horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension {} < 2", self.dim)));
        }
        if !(self.horizon > 0.0) || !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive, epsilon nonnegative".into()));
        }
        if self.model == Model::SkorokhodBm {
            if !self.params.is_empty() {
                return Err(Error::InvalidParameter("Brownian model takes no stable parameters".into()));
            }
            return Ok(());
        }
        if self.params.len() != self.dim {
            return Err(Error::InvalidParameter(format!("{} parameter sets for dimension {}", self.params.len(), self.dim)));
        }
        let a = self.params[0].alpha();
        if self.params.iter().any(|p| (p.alpha() - a).abs() > 1e-12) {
            return Err(Error::InvalidParameter("all coordinates must share alpha".into()));
        }
        for (i, p) in self.params.iter().enumerate() {
            match self.model {
                Model::Killed if !p.is_two_sided() => {
                    return Err(Error::InvalidParameter(format!("coordinate {i} must have jumps of both signs")))
                }
                Model::Symmetric if (p.rho() - 0.5).abs() > 1e-12 => {
                    return Err(Error::InvalidParameter(format!("coordinate {i} must be symmetric (rho = 1/2)")))
                }
                Model::SkorokhodStable if !p.is_spectrally_positive() => {
                    return Err(Error::InvalidParameter(format!(
                        "coordinate {i} must be spectrally positive (alpha in (1,2), alpha(1-rho) = 1)"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Self-similarity index: `α` for the stable models, 2 for Brownian motion.
    pub fn index(&self) -> f64 {
        match self.model {
            Model::SkorokhodBm => 2.0,
            _ => self.params[0].alpha(),
        }
    }

    pub fn drivers(&self) -> Vec<Driver> {
        match self.model {
            Model::SkorokhodBm => vec![Driver::Brownian; self.dim],
            _ => self.params.iter().map(|&p| Driver::Stable(p)).collect(),
        }
    }
}

/// When to end a simulation before the configured horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopAt {
    Horizon,
    /// First exit of the driver from the open orthant (first corrective event for the symmetric
    /// model, killing for the killed model).
    FirstExit,
    /// Once `∫‖state‖₁^{−index} dt` reaches the value, so the MAP is observed up to it.
    ClockBudget(f64),
}

fn check_drivers(drivers: &[SkeletonPath]) -> Result<()> {
    let first = drivers.first().ok_or_else(|| Error::InvalidPath("no driver paths".into()))?;
    for p in drivers {
        if p.dim() != 1 || p.times != first.times {
            return Err(Error::InvalidPath("drivers must be 1-d on a shared event grid".into()));
        }
    }
    Ok(())
}

fn driver_values(drivers: &[SkeletonPath], k: usize, out: &mut [f64]) {
    for (o, p) in out.iter_mut().zip(drivers) {
        *o = p.value(k)[0];
    }
}

fn driver_mark(drivers: &[SkeletonPath], k: usize) -> Option<JumpMark> {
    drivers.iter().enumerate().find_map(|(i, p)| p.marks[k].map(|m| JumpMark { coord: i, size: m.size }))
}

/// Joins the drivers and kills the path at the first event with a negative coordinate.
pub fn kill_at_orthant_exit(drivers: &[SkeletonPath]) -> Result<SkeletonPath> {
    check_drivers(drivers)?;
    let d = drivers.len();
    let mut x = vec![0.0; d];
    driver_values(drivers, 0, &mut x);
    if x.iter().any(|&c| c <= 0.0) {
        return Err(Error::BoundaryStart);
    }
    let times = &drivers[0].times;
    let mut out = SkeletonPath::with_capacity(&x, times.len());
    out.horizon = drivers[0].horizon;
    for k in 1..times.len() {
        driver_values(drivers, k, &mut x);
        let mark = driver_mark(drivers, k);
        let (imin, xmin) = x.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (i, v)| if v < a.1 { (i, v) } else { a });
        if xmin < 0.0 {
            let coord = match mark {
                Some(m) if x[m.coord] < 0.0 => Some(m.coord),
                _ => None,
            };
            let j = coord.unwrap_or(imin);
            out.push(times[k], &vec![0.0; d], mark.filter(|m| Some(m.coord) == coord), EventTag::Kill);
            out.status = PathStatus::Killed { time: times[k], coord, overshoot: -x[j] };
            out.horizon = times[k];
            return Ok(out);
        }
        out.push(times[k], &x, mark, if mark.is_some() { EventTag::Jump } else { EventTag::Grid });
    }
    Ok(out)
}

fn absorb_or_push(out: &mut SkeletonPath, t: f64, y: &[f64], mark: Option<JumpMark>, tag: EventTag, eps: f64) -> bool {
    if l1_norm(y) <= eps {
        out.push(t, &vec![0.0; y.len()], mark, EventTag::Absorb);
        out.status = PathStatus::Absorbed { time: t };
        out.horizon = t;
        true
    } else {
        out.push(t, y, mark, tag);
        false
    }
}

/// `X̂ = (|X^{(1)}|, …, |X^{(d)}|)`, absorbed once `‖X̂‖₁ ≤ ε`; events where a coordinate changes
/// sign are tagged corrective.
pub fn reflect_symmetric(drivers: &[SkeletonPath], eps: f64) -> Result<SkeletonPath> {
    check_drivers(drivers)?;
    let d = drivers.len();
    let mut x = vec![0.0; d];
    let mut prev = vec![0.0; d];
    driver_values(drivers, 0, &mut prev);
    let y0: Vec<f64> = prev.iter().map(|v| v.abs()).collect();
    let times = &drivers[0].times;
    let mut out = SkeletonPath::with_capacity(&y0, times.len());
    out.horizon = drivers[0].horizon;
    let mut y = y0;
    for k in 1..times.len() {
        driver_values(drivers, k, &mut x);
        let flipped = (0..d).find(|&i| (x[i] < 0.0) != (prev[i] < 0.0));
        let old = y.clone();
        for i in 0..d {
            y[i] = x[i].abs();
        }
        let (mark, tag) = classify(&old, &y, driver_mark(drivers, k), flipped);
        if absorb_or_push(&mut out, times[k], &y, mark, tag, eps) {
            return Ok(out);
        }
        std::mem::swap(&mut prev, &mut x);
    }
    Ok(out)
}

fn classify(old: &[f64], new: &[f64], driver_mark: Option<JumpMark>, flipped: Option<usize>) -> (Option<JumpMark>, EventTag) {
    match (flipped, driver_mark) {
        (Some(j), _) => (Some(JumpMark { coord: j, size: new[j] - old[j] }), EventTag::Corrective),
        (None, Some(m)) => (Some(JumpMark { coord: m.coord, size: new[m.coord] - old[m.coord] }), EventTag::Jump),
        (None, None) => (None, EventTag::Grid),
    }
}

/// Recursive form of [`reflect_symmetric`]: run the driver inside the orthant, and at each exit
/// apply `R` (negate the offending coordinate) and continue with the correspondingly negated
/// driver. Agrees with the coordinate-wise absolute value exactly.
pub fn reflect_symmetric_recursive(drivers: &[SkeletonPath], eps: f64) -> Result<SkeletonPath> {
    check_drivers(drivers)?;
    let d = drivers.len();
    let mut x = vec![0.0; d];
    driver_values(drivers, 0, &mut x);
    let mut sign: Vec<f64> = x.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut y: Vec<f64> = x.iter().zip(&sign).map(|(a, s)| s * a).collect();
    let times = &drivers[0].times;
    let mut out = SkeletonPath::with_capacity(&y, times.len());
    out.horizon = drivers[0].horizon;
    for k in 1..times.len() {
        driver_values(drivers, k, &mut x);
        let old = y.clone();
        for i in 0..d {
            y[i] = sign[i] * x[i];
        }
        let mut flipped = None;
        if let Some(z) = crate::geometry::reflect_once(&y) {
            if let Some(j) = (0..d).find(|&i| y[i] < 0.0) {
                sign[j] = -sign[j];
                flipped = Some(j);
            }
            y = z;
        } else {
            return Err(Error::InvalidPath(format!("simultaneous exits at event {k}")));
        }
        let (mark, tag) = classify(&old, &y, driver_mark(drivers, k), flipped);
        if absorb_or_push(&mut out, times[k], &y, mark, tag, eps) {
            return Ok(out);
        }
    }
    Ok(out)
}

/// Coordinate-wise `X − (0 ∧ inf_{s≤t} X_s)`, absorbed once `‖·‖₁ ≤ ε`.
///
/// The running infimum uses event values and, where drivers carry them, per-interval infima.
pub fn skorokhod_reflect(drivers: &[SkeletonPath], eps: f64) -> Result<SkeletonPath> {
    check_drivers(drivers)?;
    let d = drivers.len();
    let mut x = vec![0.0; d];
    driver_values(drivers, 0, &mut x);
    let mut runmin = x.clone();
    let mut y: Vec<f64> = x.iter().zip(&runmin).map(|(a, m)| a - m.min(0.0)).collect();
    let times = &drivers[0].times;
    let mut out = SkeletonPath::with_capacity(&y, times.len());
    out.horizon = drivers[0].horizon;
    for k in 1..times.len() {
        driver_values(drivers, k, &mut x);
        let old = y.clone();
        for i in 0..d {
            let mut m = runmin[i].min(x[i]);
            if let Some(inf) = &drivers[i].interval_inf {
                m = m.min(inf[k]);
            }
            runmin[i] = m;
            y[i] = x[i] - m.min(0.0);
        }
        let mark = driver_mark(drivers, k).map(|m| JumpMark { coord: m.coord, size: y[m.coord] - old[m.coord] });
        let tag = if mark.is_some() { EventTag::Jump } else { EventTag::Grid };
        if absorb_or_push(&mut out, times[k], &y, mark, tag, eps) {
            return Ok(out);
        }
    }
    Ok(out)
}

/// Applies the model's construction to driver paths.
pub fn construct(cfg: &SsmpConfig, drivers: &[SkeletonPath]) -> Result<SkeletonPath> {
    match cfg.model {
        Model::Killed => kill_at_orthant_exit(drivers),
        Model::Symmetric => reflect_symmetric(drivers, cfg.epsilon),
        Model::SkorokhodStable | Model::SkorokhodBm => skorokhod_reflect(drivers, cfg.epsilon),
    }
}

/// Driver paths and the constructed ssMp path.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub drivers: Vec<SkeletonPath>,
    pub path: SkeletonPath,
}

/// Samples drivers from `x0` and constructs the ssMp path.
pub fn simulate<R: Rng + ?Sized>(cfg: &SsmpConfig, x0: &[f64], stop_at: StopAt, rng: &mut R) -> Result<Simulated> {
    if x0.len() != cfg.dim {
        return Err(Error::InvalidParameter(format!("start point has {} coordinates, expected {}", x0.len(), cfg.dim)));
    }
    if x0.iter().any(|&c| !c.is_finite() || c < 0.0) || l1_norm(x0) == 0.0 {
        return Err(Error::InvalidParameter("start point must lie in [0,∞)^d \\ {0}".into()));
    }
    if cfg.model == Model::Killed && x0.iter().any(|&c| c <= 0.0) {
        return Err(Error::BoundaryStart);
    }
    let model = cfg.model;
    let eps = cfg.epsilon;
    let index = cfg.index();
    let mut clock = 0.0;
    let mut last_t = 0.0;
    let mut last_norm = l1_norm(x0);
    let stop = |s: &DriverState| -> bool {
        let norm = match model {
            Model::Killed => {
                if s.values.iter().any(|&v| v < 0.0) {
                    return true;
                }
                l1_norm(s.values)
            }
            Model::Symmetric => {
                if matches!(stop_at, StopAt::FirstExit) && s.values.iter().any(|&v| v < 0.0) {
                    return true;
                }
                l1_norm(s.values)
            }
            Model::SkorokhodStable | Model::SkorokhodBm => {
                s.values.iter().zip(s.running_min).map(|(x, m)| x - m.min(0.0)).sum()
            }
        };
        if norm <= eps {
            return true;
        }
        if let StopAt::ClockBudget(b) = stop_at {
            clock += last_norm.powf(-index) * (s.time - last_t);
            last_t = s.time;
            last_norm = norm;
            return clock >= b;
        }
        false
    };
    let drivers = simulate_drivers(&cfg.drivers(), x0, cfg.horizon, &cfg.scheme, model.distance_rule(), rng, stop)?;
    let path = construct(cfg, &drivers)?;
    Ok(Simulated { drivers, path })
}
