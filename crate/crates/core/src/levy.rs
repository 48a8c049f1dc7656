//! One-dimensional driving processes: two-sided and spectrally-positive stable laws and Brownian
//! motion, their Lévy descriptors, exact increments, and path samplers.
//!
//! The characteristic exponent convention is `E e^{izX_t} = exp(−tΨ(z))` with
//! `Ψ(z) = |z|^α e^{±iπα(1/2−ρ)}` (sign of `z`).

use crate::error::{Error, Result};
use crate::path::{EventTag, JumpMark, PathStatus, SkeletonPath};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson, StandardNormal};
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_PI_2, PI};

/// Arguments within this distance of an integer give an exactly vanishing sine.
const INTEGER_SNAP: f64 = 1e-12;

fn sin_pi_snapped(u: f64) -> f64 {
    if (u - u.round()).abs() < INTEGER_SNAP {
        0.0
    } else {
        (PI * u).sin()
    }
}

/// Stable index and positivity parameter with the derived Lévy-density constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    rho: f64,
    c1: f64,
    c2: f64,
}

impl StableParams {
    /// Requires `α ∈ (0,2)`, `ρ ∈ (0,1)` and nonnegative Lévy constants (for `α > 1` this is the
    /// admissible band `1 − 1/α ≤ ρ ≤ 1/α`).
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0,2)")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho = {rho} outside (0,1)")));
        }
        let g = gamma(1.0 + alpha) / PI;
        let c1 = g * sin_pi_snapped(alpha * rho);
        let c2 = g * sin_pi_snapped(alpha * (1.0 - rho));
        if c1 < 0.0 || c2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "(alpha, rho) = ({alpha}, {rho}) gives a negative Lévy density"
            )));
        }
        Ok(StableParams { alpha, rho, c1, c2 })
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.5)
    }

    /// Spectrally-positive law: `α ∈ (1,2)`, `ρ = 1 − 1/α`.
    pub fn spectrally_positive(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("spectrally positive needs alpha in (1,2), got {alpha}")));
        }
        Self::new(alpha, 1.0 - 1.0 / alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn is_spectrally_positive(&self) -> bool {
        self.alpha > 1.0 && (self.alpha * (1.0 - self.rho) - 1.0).abs() < INTEGER_SNAP
    }

    pub fn is_two_sided(&self) -> bool {
        self.c1 > 0.0 && self.c2 > 0.0
    }

    /// `|x|^{−(1+α)}(c1 1_{x>0} + c2 1_{x<0})`.
    pub fn levy_density(&self, x: f64) -> f64 {
        let c = if x > 0.0 {
            self.c1
        } else if x < 0.0 {
            self.c2
        } else {
            return 0.0;
        };
        c * x.abs().powf(-(1.0 + self.alpha))
    }

    pub fn char_exponent(&self, z: f64) -> Complex64 {
        if z == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = PI * self.alpha * (0.5 - self.rho) * z.signum();
        Complex64::from_polar(z.abs().powf(self.alpha), phase)
    }

    /// `Π(|x| > δ) = (c1 + c2) δ^{−α}/α`.
    pub fn tail_mass(&self, delta: f64) -> f64 {
        (self.c1 + self.c2) * delta.powf(-self.alpha) / self.alpha
    }

    /// Drift `b_δ` of the decomposition `X_t = b_δ t + (compensated jumps ≤ δ) + (jumps > δ)`.
    pub fn truncated_drift(&self, delta: f64) -> f64 {
        if (self.alpha - 1.0).abs() < 1e-12 {
            (PI * (self.rho - 0.5)).sin()
        } else {
            (self.c1 - self.c2) * delta.powf(1.0 - self.alpha) / (1.0 - self.alpha)
        }
    }

    /// Variance rate `∫_{|x|≤δ} x² Π(dx)` of the small-jump part.
    pub fn small_jump_variance(&self, delta: f64) -> f64 {
        (self.c1 + self.c2) * delta.powf(2.0 - self.alpha) / (2.0 - self.alpha)
    }

    /// Skewness of the equivalent `S_α(σ, β, 0)` law (meaningful for `α ≠ 1`).
    pub fn beta(&self) -> f64 {
        (PI * self.alpha * (self.rho - 0.5)).tan() / (FRAC_PI_2 * self.alpha).tan()
    }

    /// Scale `σ` with `σ^α = cos(πα(ρ − 1/2))`.
    pub fn scale(&self) -> f64 {
        (PI * self.alpha * (self.rho - 0.5)).cos().powf(1.0 / self.alpha)
    }

    /// Samples a jump of absolute size exceeding `delta` from the normalized tail.
    pub fn sample_big_jump<R: Rng + ?Sized>(&self, delta: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        let size = delta * u.powf(-1.0 / self.alpha);
        let p_up = self.c1 / (self.c1 + self.c2);
        if rng.random::<f64>() < p_up {
            size
        } else {
            -size
        }
    }
}

/// `(c1, c2, Lévy density, characteristic exponent)` of a stable law.
pub fn stable_descriptors(
    params: StableParams,
) -> (f64, f64, impl Fn(f64) -> f64, impl Fn(f64) -> Complex64) {
    (params.c1, params.c2, move |x| params.levy_density(x), move |z| params.char_exponent(z))
}

/// Mass of `{‖x‖₁ > r}` under the axis-supported Lévy measure of independent coordinates.
pub fn axis_tail_mass(params: &[StableParams], r: f64) -> f64 {
    params.iter().map(|p| p.tail_mass(r)).sum()
}

/// Unit-time Chambers–Mallows–Stuck draw with `E e^{izX} = exp(−Ψ(z))`.
fn cms_unit<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    let a = p.alpha;
    if (a - 1.0).abs() < 1e-12 {
        return p.scale() * v.tan() + p.truncated_drift(1.0);
    }
    let w: f64 = rng.sample(Exp1);
    let t = p.beta() * (FRAC_PI_2 * a).tan();
    let b = t.atan() / a;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * a));
    let x = s * (a * (v + b)).sin() / v.cos().powf(1.0 / a) * ((v - a * (v + b)).cos() / w).powf((1.0 - a) / a);
    p.scale() * x
}

/// Exact increment of the stable process over `dt`, via `dt^{1/α}` scaling.
pub fn sample_stable_increment<R: Rng + ?Sized>(params: &StableParams, dt: f64, rng: &mut R) -> f64 {
    dt.powf(1.0 / params.alpha) * cms_unit(params, rng)
}

/// Minimum of a Brownian bridge from `a` to `b` with total variance `var`.
pub fn bridge_minimum<R: Rng + ?Sized>(a: f64, b: f64, var: f64, rng: &mut R) -> f64 {
    if var <= 0.0 {
        return a.min(b);
    }
    let u: f64 = rng.sample(Open01);
    let d = b - a;
    0.5 * (a + b - (d * d - 2.0 * var * u.ln()).sqrt())
}

/// Default bound on the expected number of big jumps per grid cell.
pub const DEFAULT_JUMP_CAP: f64 = 1e4;

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("grid must start at 0 and increase strictly".into()));
    }
    Ok(())
}

/// Fixed-threshold stable path on `grid`, started at `x0`.
///
/// Jumps with `|w| > δ` are marked events at their exact times; the remainder of each cell is
/// the difference between one exact increment and the cell's marked jumps, attributed to the
/// closing grid point. Every cell sum is therefore exactly stable in law.
pub fn sample_stable_path<R: Rng + ?Sized>(
    params: &StableParams,
    x0: f64,
    grid: &[f64],
    delta: f64,
    jump_cap: f64,
    rng: &mut R,
) -> Result<SkeletonPath> {
    check_grid(grid)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let rate = if delta.is_infinite() { 0.0 } else { params.tail_mass(delta) };
    let max_cell = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if rate * max_cell > jump_cap {
        return Err(Error::TooManyJumps { expected: rate * max_cell, cap: jump_cap });
    }
    let mut path = SkeletonPath::with_capacity(&[x0], grid.len());
    let mut x = x0;
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let total = sample_stable_increment(params, h, rng);
        jumps.clear();
        if rate > 0.0 {
            let n: f64 = Poisson::new(rate * h).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng);
            for _ in 0..n as usize {
                let s = t0 + h * rng.random::<f64>();
                jumps.push((s, params.sample_big_jump(delta, rng)));
            }
            jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let mut marked = 0.0;
        for &(s, j) in &jumps {
            if s <= path.last_time() || s >= t1 {
                continue;
            }
            x += j;
            marked += j;
            path.push(s, &[x], Some(JumpMark { coord: 0, size: j }), EventTag::Jump);
        }
        x += total - marked;
        path.push(t1, &[x], None, EventTag::Grid);
    }
    path.horizon = *grid.last().unwrap();
    Ok(path)
}

/// Standard Brownian path on `grid` started at `x0`, with exact per-cell bridge minima.
pub fn sample_bm_path<R: Rng + ?Sized>(x0: f64, grid: &[f64], rng: &mut R) -> Result<SkeletonPath> {
    check_grid(grid)?;
    let mut path = SkeletonPath::with_capacity(&[x0], grid.len());
    let mut inf = Vec::with_capacity(grid.len());
    inf.push(x0);
    let mut x = x0;
    for w in grid.windows(2) {
        let h = w[1] - w[0];
        let z: f64 = rng.sample(StandardNormal);
        let y = x + h.sqrt() * z;
        inf.push(bridge_minimum(x, y, h, rng));
        x = y;
        path.push(w[1], &[x], None, EventTag::Grid);
    }
    path.horizon = *grid.last().unwrap();
    path.interval_inf = Some(inf);
    Ok(path)
}

/// Regular grid `0, dt, 2dt, …` ending exactly at `horizon`.
pub fn regular_grid(horizon: f64, dt: f64) -> Vec<f64> {
    let n = (horizon / dt).ceil().max(1.0) as usize;
    let mut g: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    g.push(horizon);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * horizon.max(1.0));
    g
}

/// A driving coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Driver {
    Stable(StableParams),
    Brownian,
}

/// How the distance of a driver to its boundary is measured when sizing the jump threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceRule {
    /// `|x|`.
    Absolute,
    /// `x − (0 ∧ inf_{s≤t} x_s)`.
    Reflected,
}

/// State-adaptive joint sampler settings.
///
/// Coordinate `i` marks every jump larger than `δ_i = η·max(dist_i, φ·Σ_k dist_k, floor)`;
/// smaller jumps form a Gaussian increment with matched drift and variance, lumped at the next
/// event. Step lengths keep `κ` expected marked jumps per coordinate and never exceed
/// `max_step`, or `max_step·(Σ_k dist_k)^a` when `clock_index = Some(a)`; the latter caps steps of
/// the Lamperti clock `∫‖x‖^{−a}` uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveScheme {
    pub eta: f64,
    pub phi: f64,
    pub floor: f64,
    pub kappa: f64,
    pub max_step: f64,
    pub clock_index: Option<f64>,
    pub max_events: usize,
}

impl Default for AdaptiveScheme {
    fn default() -> Self {
        AdaptiveScheme { eta: 0.1, phi: 0.01, floor: 1e-9, kappa: 1.0, max_step: 1e-3, clock_index: None, max_events: 50_000_000 }
    }
}

/// Snapshot passed to the stopping rule after each event.
pub struct DriverState<'a> {
    pub time: f64,
    pub values: &'a [f64],
    pub running_min: &'a [f64],
    pub mark: Option<JumpMark>,
}

/// Simulates independent drivers started at `x0` on `[0, horizon]` with shared event times.
///
/// `stop` is consulted after each event; returning `true` ends the simulation there and sets the
/// horizon of the output paths to that event time.
pub fn simulate_drivers<R: Rng + ?Sized>(
    drivers: &[Driver],
    x0: &[f64],
    horizon: f64,
    scheme: &AdaptiveScheme,
    rule: DistanceRule,
    rng: &mut R,
    mut stop: impl FnMut(&DriverState) -> bool,
) -> Result<Vec<SkeletonPath>> {
    let d = drivers.len();
    if x0.len() != d || d == 0 {
        return Err(Error::InvalidParameter("one start value per driver".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon = {horizon} must be positive")));
    }
    let mut paths: Vec<SkeletonPath> = x0
        .iter()
        .map(|&x| {
            let mut p = SkeletonPath::start(&[x]);
            p.interval_inf = Some(vec![x]);
            p
        })
        .collect();
    let mut x = x0.to_vec();
    let mut runmin = x0.to_vec();
    let mut pend_mean = vec![0.0; d];
    let mut pend_var = vec![0.0; d];
    let mut delta = vec![0.0; d];
    let mut rate = vec![0.0; d];
    let mut t = 0.0;
    let mut events = 0usize;

    // Applies the pending Gaussian increment of driver `i`; returns the infimum over it.
    let flush = |i: usize, x: &mut [f64], runmin: &mut [f64], mean: &mut [f64], var: &mut [f64], rng: &mut R| -> f64 {
        let a = x[i];
        let b = a + mean[i] + var[i].sqrt() * rng.sample::<f64, _>(StandardNormal);
        let m = if rule == DistanceRule::Reflected { bridge_minimum(a, b, var[i], rng) } else { a.min(b) };
        x[i] = b;
        runmin[i] = runmin[i].min(m);
        mean[i] = 0.0;
        var[i] = 0.0;
        m
    };

    let refresh = |x: &[f64], runmin: &[f64], delta: &mut [f64], rate: &mut [f64]| -> f64 {
        let dist = |i: usize| match rule {
            DistanceRule::Absolute => x[i].abs(),
            DistanceRule::Reflected => x[i] - runmin[i].min(0.0),
        };
        let norm: f64 = (0..d).map(dist).sum();
        let mut h = match scheme.clock_index {
            Some(a) => scheme.max_step * norm.powf(a),
            None => scheme.max_step,
        };
        for i in 0..d {
            if let Driver::Stable(p) = drivers[i] {
                let di = scheme.eta * dist(i).max(scheme.phi * norm).max(scheme.floor);
                delta[i] = di;
                rate[i] = p.tail_mass(di);
                h = h.min(scheme.kappa / rate[i]);
            } else {
                rate[i] = 0.0;
            }
        }
        h
    };

    'outer: while t < horizon {
        let h = refresh(&x, &runmin, &mut delta, &mut rate);
        let mut t_end = (t + h).min(horizon);
        let mut s = t;
        loop {
            let total_rate: f64 = rate.iter().sum();
            let wait = if total_rate > 0.0 { rng.sample::<f64, _>(Exp1) / total_rate } else { f64::INFINITY };
            let next = s + wait;
            let upto = next.min(t_end);
            for i in 0..d {
                let dt = upto - s;
                match drivers[i] {
                    Driver::Stable(p) => {
                        pend_mean[i] += p.truncated_drift(delta[i]) * dt;
                        pend_var[i] += p.small_jump_variance(delta[i]) * dt;
                    }
                    Driver::Brownian => pend_var[i] += dt,
                }
            }
            if next >= t_end || next <= paths[0].last_time() {
                break;
            }
            let mut pick = rng.random::<f64>() * total_rate;
            let mut j = 0;
            while j + 1 < d && pick >= rate[j] {
                pick -= rate[j];
                j += 1;
            }
            let Driver::Stable(p) = drivers[j] else { unreachable!("Brownian drivers have zero jump rate") };
            let w = p.sample_big_jump(delta[j], rng);
            // The small-jump part accrued under the current thresholds precedes the jump, as its
            // own event midway to it, so the jump's left limit is the true pre-jump state.
            let tf = 0.5 * (s + next);
            let own_event = tf > paths[0].last_time() && tf < next;
            let mut inf = vec![0.0; d];
            for i in 0..d {
                inf[i] = flush(i, &mut x, &mut runmin, &mut pend_mean, &mut pend_var, rng);
                if own_event {
                    paths[i].push(tf, &[x[i]], None, EventTag::Grid);
                    paths[i].interval_inf.as_mut().unwrap().push(inf[i]);
                }
            }
            if own_event {
                events += 1;
                let st = DriverState { time: tf, values: &x, running_min: &runmin, mark: None };
                if stop(&st) {
                    t = tf;
                    break 'outer;
                }
            }
            let prev = x[j];
            x[j] += w;
            runmin[j] = runmin[j].min(x[j]);
            let mark = JumpMark { coord: 0, size: w };
            for i in 0..d {
                let m = (i == j).then_some(mark);
                let tag = if m.is_some() { EventTag::Jump } else { EventTag::Grid };
                let before = if i == j { prev } else { x[i] };
                let lo = if own_event { before } else { before.min(inf[i]) };
                paths[i].push(next, &[x[i]], m, tag);
                paths[i].interval_inf.as_mut().unwrap().push(lo);
            }
            events += 1;
            if events > scheme.max_events {
                return Err(Error::TooManyJumps { expected: events as f64, cap: scheme.max_events as f64 });
            }
            s = next;
            let st = DriverState { time: s, values: &x, running_min: &runmin, mark: Some(JumpMark { coord: j, size: w }) };
            if stop(&st) {
                t = s;
                break 'outer;
            }
            let h_new = refresh(&x, &runmin, &mut delta, &mut rate);
            t_end = t_end.min(s + h_new);
        }
        for i in 0..d {
            let m = flush(i, &mut x, &mut runmin, &mut pend_mean, &mut pend_var, rng);
            paths[i].push(t_end, &[x[i]], None, EventTag::Grid);
            paths[i].interval_inf.as_mut().unwrap().push(m);
        }
        events += 1;
        t = t_end;
        let st = DriverState { time: t, values: &x, running_min: &runmin, mark: None };
        if stop(&st) {
            break;
        }
    }
    for p in &mut paths {
        p.horizon = t;
        p.status = PathStatus::Alive;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    #[allow(clippy::approx_constant)]
    fn cauchy_constants() {
        let p = StableParams::new(1.0, 0.5).unwrap();
        assert!((p.c1() - 1.0 / PI).abs() < 1e-15);
        assert!((p.c2() - 0.318_309_886_183_790_7).abs() < 1e-15);
    }

    #[test]
    fn spectrally_positive_has_no_negative_jumps() {
        let p = StableParams::new(1.5, 1.0 / 3.0).unwrap();
        assert!(p.is_spectrally_positive());
        assert_eq!(p.c2(), 0.0);
        assert_eq!(p.levy_density(-1.0), 0.0);
        assert!((p.beta() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_exponent_is_real() {
        for &a in &[0.5, 1.0, 1.7] {
            let p = StableParams::symmetric(a).unwrap();
            for &z in &[-2.0, 0.3, 5.0] {
                let psi = p.char_exponent(z);
                assert!(psi.im.abs() < 1e-15);
                assert!((psi.re - f64::abs(z).powf(a)).abs() < 1e-12);
            }
            assert_eq!(p.char_exponent(0.0), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableParams::new(2.0, 0.5).is_err());
        assert!(StableParams::new(1.0, 1.0).is_err());
        assert!(StableParams::new(1.5, 0.9).is_err());
    }

    #[test]
    fn infinite_threshold_has_no_marks() {
        let p = StableParams::new(1.2, 0.5).unwrap();
        let grid = regular_grid(1.0, 0.1);
        let path = sample_stable_path(&p, 0.0, &grid, f64::INFINITY, DEFAULT_JUMP_CAP, &mut stream(1, 0)).unwrap();
        assert!(path.marks.iter().all(|m| m.is_none()));
        assert_eq!(path.len(), grid.len());
    }

    #[test]
    fn jump_cap_is_enforced() {
        let p = StableParams::new(1.0, 0.5).unwrap();
        let r = sample_stable_path(&p, 0.0, &[0.0, 1.0], 1e-6, 100.0, &mut stream(1, 0));
        assert!(matches!(r, Err(Error::TooManyJumps { .. })));
    }

    #[test]
    fn golden_values() {
        let p = StableParams::new(1.5, 1.0 / 3.0).unwrap();
        let x = sample_stable_increment(&p, 1.0, &mut stream(42, 0));
        let again = sample_stable_increment(&p, 1.0, &mut stream(42, 0));
        assert_eq!(x.to_bits(), again.to_bits());
        let b = sample_bm_path(0.0, &[0.0, 1.0], &mut stream(7, 0)).unwrap();
        let b2 = sample_bm_path(0.0, &[0.0, 1.0], &mut stream(7, 0)).unwrap();
        assert_eq!(b, b2);
    }

    #[test]
    fn bridge_minimum_is_below_endpoints() {
        let mut r = stream(3, 0);
        for _ in 0..1000 {
            let m = bridge_minimum(0.3, -0.1, 0.05, &mut r);
            assert!(m <= -0.1);
        }
    }

    #[test]
    fn grid_helper() {
        let g = regular_grid(1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(regular_grid(1.0, 0.25).len(), 5);
    }
}
