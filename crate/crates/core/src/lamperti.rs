//! The norm-dependent Lamperti transform in both directions.
//!
//! Output events are exactly the images of input events under the time change, so the transform
//! introduces no resampling error and jump bookkeeping is preserved.

use crate::clock::{clock_integral, ordinate_clock, ClockSign};
use crate::error::{Error, Result};
use crate::geometry::l1_norm;
use crate::path::{EventTag, Lifetime, MapPath, PathStatus, SkeletonPath};

/// `(ξ_t, Ξ_t) = (log‖Z_{I_t}‖₁, arg Z_{I_t})` with `I` the inverse of `∫₀ˢ ‖Z_r‖₁^{−α} dr`.
///
/// A path ending in a kill or absorption event yields a finite lifetime; otherwise the MAP is
/// censored at the image of the observation horizon.
pub fn ssmp_to_map(z: &SkeletonPath, alpha: f64) -> Result<MapPath> {
    let d = z.dim();
    if l1_norm(z.value(0)) == 0.0 {
        return Err(Error::InvalidPath("ssMp path starts at the origin".into()));
    }
    let clock = clock_integral(z, alpha, ClockSign::Minus)?;
    let (_, knots) = clock.knots();
    let n = z.len();
    let mut m = MapPath::with_capacity(d, n);
    let mut theta = vec![0.0; d];
    for k in 0..n {
        let v = z.value(k);
        let r = l1_norm(v);
        if r == 0.0 {
            if k + 1 != n {
                return Err(Error::InvalidPath(format!("zero state at non-terminal event {k}")));
            }
            m.push(knots[k], f64::NEG_INFINITY, &theta, z.marks[k], z.tags[k]);
            m.lifetime = Lifetime::Finite(knots[k]);
            return Ok(m);
        }
        for (th, &c) in theta.iter_mut().zip(v) {
            *th = c / r;
        }
        m.push(knots[k], r.ln(), &theta, z.marks[k], z.tags[k]);
    }
    m.lifetime = Lifetime::Censored(clock.terminal());
    Ok(m)
}

/// Path with polar decomposition `(e^{ξ_{φ(t)}}, Ξ_{φ(t)})`, `φ` the inverse of `∫₀ˢ e^{αξ_r} dr`;
/// the cemetery maps to the origin at `K = ∫₀^ζ e^{αξ_s} ds`.
pub fn map_to_ssmp(m: &MapPath, alpha: f64) -> Result<SkeletonPath> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    m.validate()?;
    let d = m.dim();
    let n = m.len();
    let end = m.lifetime.value();
    let finite_end = end.is_finite() && end > *m.times.last().unwrap();
    let clock = ordinate_clock(&m.times, &m.ordinate, alpha, if finite_end { end } else { m.times[n - 1] })?;
    let (_, knots) = clock.knots();
    let state = |k: usize| -> Vec<f64> {
        if m.is_cemetery(k) {
            vec![0.0; d]
        } else {
            let r = m.ordinate[k].exp();
            m.modulator(k).iter().map(|c| r * c).collect()
        }
    };
    let mut z = SkeletonPath::with_capacity(&state(0), n);
    for k in 1..n {
        z.push(knots[k], &state(k), m.marks[k], m.tags[k]);
    }
    z.horizon = if finite_end { clock.terminal() } else { z.last_time() };
    let last = n - 1;
    if m.is_cemetery(last) {
        let t = knots[last];
        z.status = match m.tags[last] {
            EventTag::Absorb => PathStatus::Absorbed { time: t },
            _ => {
                let (coord, overshoot) = match m.marks[last] {
                    Some(mk) if last > 0 => (Some(mk.coord), -(z.value(last - 1)[mk.coord] + mk.size)),
                    _ => (None, 0.0),
                };
                PathStatus::Killed { time: t, coord, overshoot }
            }
        };
        z.horizon = t;
    }
    Ok(z)
}

/// Sup-norm distance between two skeletons over events, including event times.
pub fn skeleton_distance(a: &SkeletonPath, b: &SkeletonPath) -> f64 {
    if a.len() != b.len() || a.dim() != b.dim() {
        return f64::INFINITY;
    }
    let mut dist: f64 = 0.0;
    for k in 0..a.len() {
        dist = dist.max((a.times[k] - b.times[k]).abs());
        for (x, y) in a.value(k).iter().zip(b.value(k)) {
            dist = dist.max((x - y).abs());
        }
    }
    dist
}

/// MAP state in force at MAP time `t` (last event at or before `t`), or `None` once dead or
/// beyond the censoring horizon.
pub fn map_state_at(m: &MapPath, t: f64) -> Option<(f64, &[f64])> {
    if t > m.lifetime.value() {
        return None;
    }
    let k = m.index_at(t);
    if m.is_cemetery(k) {
        None
    } else {
        Some((m.ordinate[k], m.modulator(k)))
    }
}
