//! Piecewise-constant càdlàg path skeletons for ssMps and MAPs.
//!
//! `values[k]` is the right limit at `times[k]`; the left limit at `times[k]` is `values[k-1]`.

use crate::error::{Error, Result};
use crate::geometry::{PolarPoint, SimplexPoint};
use serde::{Deserialize, Serialize};

/// A single-coordinate jump: coordinate index and signed size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMark {
    pub coord: usize,
    pub size: f64,
}

/// What happened at an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventTag {
    Start,
    /// Grid or sub-step point without a marked jump.
    Grid,
    /// Marked jump inside the state space.
    Jump,
    /// Jump produced by applying the reflection operator after an exit.
    Corrective,
    Kill,
    Absorb,
}

impl EventTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EventTag::Start => "start",
            EventTag::Grid => "grid",
            EventTag::Jump => "jump",
            EventTag::Corrective => "corrective",
            EventTag::Kill => "kill",
            EventTag::Absorb => "absorb",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "start" => EventTag::Start,
            "grid" => EventTag::Grid,
            "jump" => EventTag::Jump,
            "corrective" => EventTag::Corrective,
            "kill" => EventTag::Kill,
            "absorb" => EventTag::Absorb,
            other => return Err(Error::Parse(format!("unknown tag {other:?}"))),
        })
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, EventTag::Kill | EventTag::Absorb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathStatus {
    Alive,
    /// Killed by a jump of `coord` landing `overshoot > 0` below the boundary (`coord` is
    /// `None` for an exit detected on the continuous part).
    Killed { time: f64, coord: Option<usize>, overshoot: f64 },
    Absorbed { time: f64 },
}

/// Event skeleton of a d-dimensional càdlàg path observed on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonPath {
    dim: usize,
    pub times: Vec<f64>,
    values: Vec<f64>,
    pub marks: Vec<Option<JumpMark>>,
    pub tags: Vec<EventTag>,
    pub status: PathStatus,
    pub horizon: f64,
    /// One-dimensional drivers only: infimum of the path over `(t_{k-1}, t_k]`, left limit at
    /// `t_k` included.
    pub interval_inf: Option<Vec<f64>>,
}

impl SkeletonPath {
    /// A path holding `x0` at time 0.
    pub fn start(x0: &[f64]) -> Self {
        SkeletonPath {
            dim: x0.len(),
            times: vec![0.0],
            values: x0.to_vec(),
            marks: vec![None],
            tags: vec![EventTag::Start],
            status: PathStatus::Alive,
            horizon: 0.0,
            interval_inf: None,
        }
    }

    pub fn with_capacity(x0: &[f64], events: usize) -> Self {
        let mut p = Self::start(x0);
        p.times.reserve(events);
        p.values.reserve(events * x0.len());
        p.marks.reserve(events);
        p.tags.reserve(events);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last_value(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("nonempty path")
    }

    /// Left limit at event `k ≥ 1`.
    pub fn left_limit(&self, k: usize) -> &[f64] {
        self.value(k - 1)
    }

    pub fn flat_values(&self) -> &[f64] {
        &self.values
    }

    /// Appends an event; `t` must exceed the last event time.
    pub fn push(&mut self, t: f64, x: &[f64], mark: Option<JumpMark>, tag: EventTag) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert!(t > self.last_time(), "event times must increase: {t} after {}", self.last_time());
        self.times.push(t);
        self.values.extend_from_slice(x);
        self.marks.push(mark);
        self.tags.push(tag);
    }

    /// Builds a path from raw columns, validating the skeleton invariants.
    pub fn from_parts(
        dim: usize,
        times: Vec<f64>,
        values: Vec<f64>,
        marks: Vec<Option<JumpMark>>,
        tags: Vec<EventTag>,
        status: PathStatus,
        horizon: f64,
    ) -> Result<Self> {
        let p = SkeletonPath { dim, times, values, marks, tags, status, horizon, interval_inf: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 || self.dim == 0 {
            return Err(Error::InvalidPath("empty path".into()));
        }
        if self.values.len() != n * self.dim || self.marks.len() != n || self.tags.len() != n {
            return Err(Error::InvalidPath("column lengths disagree".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath("times not strictly increasing".into()));
        }
        if self.horizon < self.last_time() {
            return Err(Error::InvalidPath("horizon precedes last event".into()));
        }
        for m in self.marks.iter().flatten() {
            if m.coord >= self.dim {
                return Err(Error::InvalidPath(format!("mark coordinate {} out of range", m.coord)));
            }
        }
        if let Some(inf) = &self.interval_inf {
            if inf.len() != n {
                return Err(Error::InvalidPath("interval_inf length".into()));
            }
        }
        Ok(())
    }

    /// Index of the event in force at time `t` (last event with `times[k] ≤ t`).
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// Right-continuous value at `t ∈ [0, horizon]`.
    pub fn value_at(&self, t: f64) -> &[f64] {
        self.value(self.index_at(t))
    }

    /// Coordinate `i` as a one-dimensional path sharing the event grid.
    pub fn coordinate(&self, i: usize) -> SkeletonPath {
        let values: Vec<f64> = (0..self.len()).map(|k| self.value(k)[i]).collect();
        let marks = self
            .marks
            .iter()
            .map(|m| m.and_then(|m| (m.coord == i).then_some(JumpMark { coord: 0, size: m.size })))
            .collect();
        SkeletonPath {
            dim: 1,
            times: self.times.clone(),
            values,
            marks,
            tags: self.tags.clone(),
            status: self.status,
            horizon: self.horizon,
            interval_inf: None,
        }
    }

    /// Joins one-dimensional coordinate paths sharing the same event grid.
    pub fn join(coords: &[SkeletonPath]) -> Result<SkeletonPath> {
        let first = coords.first().ok_or_else(|| Error::InvalidPath("no coordinates".into()))?;
        let n = first.len();
        for c in coords {
            if c.dim != 1 || c.times != first.times {
                return Err(Error::InvalidPath("coordinate paths must be 1-d on a shared grid".into()));
            }
        }
        let d = coords.len();
        let mut values = Vec::with_capacity(n * d);
        let mut marks = Vec::with_capacity(n);
        let mut tags = Vec::with_capacity(n);
        for k in 0..n {
            values.extend(coords.iter().map(|c| c.values[k]));
            let mut mark = None;
            for (i, c) in coords.iter().enumerate() {
                if let Some(m) = c.marks[k] {
                    if mark.is_some() {
                        return Err(Error::InvalidPath(format!("simultaneous jumps at event {k}")));
                    }
                    mark = Some(JumpMark { coord: i, size: m.size });
                }
            }
            tags.push(if k == 0 { EventTag::Start } else if mark.is_some() { EventTag::Jump } else { EventTag::Grid });
            marks.push(mark);
        }
        Ok(SkeletonPath {
            dim: d,
            times: first.times.clone(),
            values,
            marks,
            tags,
            status: PathStatus::Alive,
            horizon: first.horizon,
            interval_inf: None,
        })
    }
}

/// Lifetime of a MAP path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lifetime {
    /// Killed or absorbed at `ζ`.
    Finite(f64),
    /// Alive at the observation horizon; `ζ` exceeds the value.
    Censored(f64),
}

impl Lifetime {
    pub fn value(self) -> f64 {
        match self {
            Lifetime::Finite(z) | Lifetime::Censored(z) => z,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, Lifetime::Censored(_))
    }
}

/// Event skeleton of a MAP `(ξ, Ξ)`; a cemetery event has ordinate `−∞` and zero modulator.
#[derive(Debug, Clone, PartialEq)]
pub struct MapPath {
    dim: usize,
    pub times: Vec<f64>,
    pub ordinate: Vec<f64>,
    modulator: Vec<f64>,
    pub marks: Vec<Option<JumpMark>>,
    pub tags: Vec<EventTag>,
    pub lifetime: Lifetime,
}

impl MapPath {
    pub fn new(dim: usize) -> Self {
        MapPath {
            dim,
            times: Vec::new(),
            ordinate: Vec::new(),
            modulator: Vec::new(),
            marks: Vec::new(),
            tags: Vec::new(),
            lifetime: Lifetime::Censored(0.0),
        }
    }

    pub fn with_capacity(dim: usize, events: usize) -> Self {
        let mut m = Self::new(dim);
        m.times.reserve(events);
        m.ordinate.reserve(events);
        m.modulator.reserve(events * dim);
        m.marks.reserve(events);
        m.tags.reserve(events);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Modulator at event `k`; all zeros at the cemetery.
    pub fn modulator(&self, k: usize) -> &[f64] {
        &self.modulator[k * self.dim..(k + 1) * self.dim]
    }

    pub fn is_cemetery(&self, k: usize) -> bool {
        self.ordinate[k] == f64::NEG_INFINITY
    }

    pub fn state(&self, k: usize) -> PolarPoint {
        if self.is_cemetery(k) {
            PolarPoint::Cemetery
        } else {
            let angle = SimplexPoint::normalize(self.modulator(k)).expect("modulator on the simplex");
            PolarPoint::Point { log_norm: self.ordinate[k], angle }
        }
    }

    /// Appends an event. A cemetery state is passed as `xi = −∞` with any modulator.
    pub fn push(&mut self, t: f64, xi: f64, theta: &[f64], mark: Option<JumpMark>, tag: EventTag) {
        debug_assert_eq!(theta.len(), self.dim);
        debug_assert!(self.times.last().is_none_or(|&s| t > s));
        self.times.push(t);
        self.ordinate.push(xi);
        if xi == f64::NEG_INFINITY {
            self.modulator.extend(std::iter::repeat_n(0.0, self.dim));
        } else {
            self.modulator.extend_from_slice(theta);
        }
        self.marks.push(mark);
        self.tags.push(tag);
    }

    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::InvalidPath("empty MAP path".into()));
        }
        if self.ordinate.len() != n || self.modulator.len() != n * self.dim {
            return Err(Error::InvalidPath("column lengths disagree".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath("times not strictly increasing".into()));
        }
        for k in 0..n {
            if self.is_cemetery(k) {
                if k + 1 != n {
                    return Err(Error::InvalidPath("cemetery must be terminal".into()));
                }
                continue;
            }
            let s: f64 = self.modulator(k).iter().sum();
            if (s - 1.0).abs() > 1e-12 || self.modulator(k).iter().any(|&c| c < 0.0) {
                return Err(Error::InvalidPath(format!("modulator off the simplex at event {k}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_lookup() {
        let mut p = SkeletonPath::start(&[1.0, 2.0]);
        p.push(0.5, &[1.5, 2.0], Some(JumpMark { coord: 0, size: 0.5 }), EventTag::Jump);
        p.push(1.0, &[1.5, 1.0], None, EventTag::Grid);
        p.horizon = 2.0;
        p.validate().unwrap();
        assert_eq!(p.value_at(0.49), &[1.0, 2.0]);
        assert_eq!(p.value_at(0.5), &[1.5, 2.0]);
        assert_eq!(p.value_at(1.7), &[1.5, 1.0]);
        assert_eq!(p.left_limit(1), &[1.0, 2.0]);
    }

    #[test]
    fn join_rejects_simultaneous_jumps() {
        let mut a = SkeletonPath::start(&[1.0]);
        a.push(1.0, &[2.0], Some(JumpMark { coord: 0, size: 1.0 }), EventTag::Jump);
        let b = a.clone();
        assert!(SkeletonPath::join(&[a.clone(), b]).is_err());
        let mut c = SkeletonPath::start(&[1.0]);
        c.push(1.0, &[1.0], None, EventTag::Grid);
        let j = SkeletonPath::join(&[a, c]).unwrap();
        assert_eq!(j.marks[1], Some(JumpMark { coord: 0, size: 1.0 }));
        assert_eq!(j.coordinate(1).value(1), &[1.0]);
    }

    #[test]
    fn validation_catches_disorder() {
        let r = SkeletonPath::from_parts(1, vec![0.0, 0.0], vec![1.0, 1.0], vec![None, None], vec![EventTag::Start, EventTag::Grid], PathStatus::Alive, 1.0);
        assert!(r.is_err());
    }

    #[test]
    fn map_cemetery_is_terminal() {
        let mut m = MapPath::new(2);
        m.push(0.0, 0.0, &[0.5, 0.5], None, EventTag::Start);
        m.push(1.0, f64::NEG_INFINITY, &[0.5, 0.5], None, EventTag::Kill);
        m.validate().unwrap();
        assert!(m.state(1).is_cemetery());
        assert_eq!(m.modulator(1), &[0.0, 0.0]);
        m.push(2.0, 0.0, &[0.5, 0.5], None, EventTag::Grid);
        assert!(m.validate().is_err());
    }
}
