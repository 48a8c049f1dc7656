//! Additive clocks `t ↦ ∫₀ᵗ ‖Z_r‖₁^{±α} dr` on skeletons and their generalized inverses.
//!
//! Integrals use the left-point rule: on `[t_k, t_{k+1})` the integrand is frozen at event `k`.

use crate::error::{Error, Result};
use crate::geometry::l1_norm;
use crate::path::SkeletonPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockSign {
    Plus,
    Minus,
}

/// Continuous nondecreasing piecewise-linear function through `(times[k], values[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Clock {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Clock {
    /// Builds a clock from interval rates: on `[times[k], times[k+1])` the slope is `rates[k]`.
    pub fn from_rates(times: &[f64], rates: &[f64]) -> Result<Clock> {
        if times.len() != rates.len() + 1 || times.is_empty() {
            return Err(Error::InvalidPath("clock needs one rate per interval".into()));
        }
        let mut values = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        values.push(acc);
        for k in 0..rates.len() {
            let r = rates[k];
            if !r.is_finite() || r < 0.0 {
                return Err(Error::NonFiniteClock(times[k]));
            }
            acc += r * (times[k + 1] - times[k]);
            values.push(acc);
        }
        Ok(Clock { times: times.to_vec(), values })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.times, &self.values)
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Clock value at the end of its domain.
    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Value at `s`, clamped to the domain.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.times[0] {
            return self.values[0];
        }
        if s >= self.end_time() {
            return self.terminal();
        }
        let k = self.times.partition_point(|&u| u <= s) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (c0, c1) = (self.values[k], self.values[k + 1]);
        c0 + (c1 - c0) * (s - t0) / (t1 - t0)
    }

    /// `inf{s : clock(s) > c}`.
    pub fn invert(&self, c: f64) -> Result<f64> {
        let end = self.terminal();
        if !(c < end) {
            return Err(Error::ClockExhausted { t: c, end });
        }
        if c < self.values[0] {
            return Ok(self.times[0]);
        }
        let k = self.values.partition_point(|&v| v <= c);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (c0, c1) = (self.values[k - 1], self.values[k]);
        Ok((t0 + (t1 - t0) * (c - c0) / (c1 - c0)).min(t1))
    }
}

/// `t ↦ ∫₀ᵗ ‖path_r‖₁^{±α} dr` on `[0, horizon]`, stopping at a terminal cemetery event.
pub fn clock_integral(path: &SkeletonPath, alpha: f64, sign: ClockSign) -> Result<Clock> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    let n = path.len();
    let terminal = path.tags[n - 1].is_terminal();
    let mut times: Vec<f64> = path.times.clone();
    if !terminal && path.horizon > path.last_time() {
        times.push(path.horizon);
    }
    let exponent = match sign {
        ClockSign::Plus => alpha,
        ClockSign::Minus => -alpha,
    };
    let mut rates = Vec::with_capacity(times.len() - 1);
    for k in 0..times.len() - 1 {
        let r = l1_norm(path.value(k));
        let rate = r.powf(exponent);
        if !rate.is_finite() {
            return Err(Error::NonFiniteClock(times[k]));
        }
        rates.push(rate);
    }
    Clock::from_rates(&times, &rates)
}

/// `t ↦ ∫₀ᵗ e^{α ξ_r} dr` for a piecewise-constant ordinate, up to `end`.
pub fn ordinate_clock(times: &[f64], ordinate: &[f64], alpha: f64, end: f64) -> Result<Clock> {
    let mut knots = times.to_vec();
    if end > *times.last().unwrap() {
        knots.push(end);
    }
    let rates: Vec<f64> = (0..knots.len() - 1).map(|k| (alpha * ordinate[k]).exp()).collect();
    Clock::from_rates(&knots, &rates)
}

/// Right-continuous generalized inverse of a clock.
pub fn invert_clock(clock: &Clock, t: f64) -> Result<f64> {
    clock.invert(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::EventTag;
    use std::f64::consts::E;

    fn constant(norm: f64, horizon: f64) -> SkeletonPath {
        let mut p = SkeletonPath::start(&[norm / 2.0, norm / 2.0]);
        p.horizon = horizon;
        p
    }

    #[test]
    fn unit_and_constant_clocks() {
        let c = clock_integral(&constant(1.0, 3.0), 1.7, ClockSign::Minus).unwrap();
        assert!((c.eval(2.2) - 2.2).abs() < 1e-15);
        let c = clock_integral(&constant(2.0, 3.0), 1.0, ClockSign::Minus).unwrap();
        assert!((c.eval(2.0) - 1.0).abs() < 1e-15);
        assert!((invert_clock(&c, 0.7).unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn two_piece_clock() {
        let mut p = SkeletonPath::start(&[0.5, 0.5]);
        p.push(1.0, &[E / 2.0, E / 2.0], None, EventTag::Grid);
        p.horizon = 2.0;
        let c = clock_integral(&p, 1.0, ClockSign::Plus).unwrap();
        assert!((c.eval(2.0) - (1.0 + E)).abs() < 1e-14);
        assert!((invert_clock(&c, 1.0 + E / 2.0).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn identity_inverse() {
        let c = Clock::from_rates(&[0.0, 1.0], &[1.0]).unwrap();
        assert!((invert_clock(&c, 0.7).unwrap() - 0.7).abs() < 1e-15);
        assert!(matches!(invert_clock(&c, 1.0), Err(Error::ClockExhausted { .. })));
    }

    #[test]
    fn zero_norm_with_negative_exponent_signals() {
        let mut p = SkeletonPath::start(&[0.0, 0.0]);
        p.horizon = 1.0;
        assert!(matches!(clock_integral(&p, 1.0, ClockSign::Minus), Err(Error::NonFiniteClock(_))));
    }

    #[test]
    fn flat_segments_invert_right_continuously() {
        let c = Clock::from_rates(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.invert(1.0).unwrap(), 2.0);
        assert!((c.invert(0.5).unwrap() - 0.5).abs() < 1e-15);
    }
}
