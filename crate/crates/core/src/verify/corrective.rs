//! First corrective jump of the reflected symmetric MAP against its closed-form law.

use super::{DetailRow, Ensemble, TestReport};
use crate::analytics::corrective::{corrective_jump_cdf, corrective_jump_density, corrective_jump_sampler};
use crate::analytics::killing_rate;
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::lamperti::ssmp_to_map;
use crate::path::{EventTag, MapPath};
use crate::ssmp::{simulate, Model, SsmpConfig, StopAt};
use crate::stats::{ks_two_sample, MeanVar};

/// Minimum number of events per modulator bin.
pub const MIN_BIN_EVENTS: usize = 100;

/// One path's first corrective jump and pre-jump compensator.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectiveEvent {
    pub time: f64,
    pub dxi: f64,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    /// Whether the crossing coincided with a marked driver jump.
    pub by_jump: bool,
    /// Draw from the closed-form law at `before`.
    pub matched: f64,
    /// `1{L ≤ t} − ∫₀^{t∧L} q(Ξ_s) ds`.
    pub compensated: f64,
}

/// Bins, survival check, and the per-path events.
#[derive(Debug, Clone)]
pub struct CorrectiveOutcome {
    pub gof: TestReport,
    pub survival: TestReport,
    pub events: Vec<CorrectiveEvent>,
}

fn compensated_survival(map: &MapPath, params: &[crate::levy::StableParams], horizon: f64, l: Option<f64>) -> Result<f64> {
    // Stopping at the censoring time keeps the compensated indicator centred.
    let end = l.unwrap_or(f64::INFINITY).min(horizon).min(map.lifetime.value());
    let mut integral = 0.0;
    for k in 0..map.len() {
        let tk = map.times[k];
        if tk >= end || map.is_cemetery(k) {
            break;
        }
        let next = if k + 1 < map.len() { map.times[k + 1].min(end) } else { end };
        integral += (next - tk) * killing_rate(params, map.modulator(k))?;
    }
    let died = l.is_some_and(|l| l <= horizon);
    Ok(if died { 1.0 } else { 0.0 } - integral)
}

/// Simulates `ens.n_paths` reflected paths from angle `θ` until the first corrective jump.
pub fn corrective_jump_gof(cfg: &SsmpConfig, theta: &SimplexPoint, bins: usize, survival_t: f64, ens: &Ensemble) -> Result<CorrectiveOutcome> {
    if cfg.model != Model::Symmetric {
        return Err(Error::InvalidParameter("corrective-jump law needs the reflected symmetric model".into()));
    }
    let alpha = cfg.index();
    let events: Vec<Option<CorrectiveEvent>> = ens.run(|_, rng| {
        let sim = simulate(cfg, theta.components(), StopAt::FirstExit, rng)?;
        let map = ssmp_to_map(&sim.path, alpha)?;
        let k = (1..map.len()).find(|&k| map.tags[k] == EventTag::Corrective);
        let Some(k) = k else {
            let comp = compensated_survival(&map, &cfg.params, survival_t, None)?;
            return Ok(Some(CorrectiveEvent {
                time: f64::INFINITY,
                dxi: f64::NAN,
                before: Vec::new(),
                after: Vec::new(),
                by_jump: false,
                matched: f64::NAN,
                compensated: comp,
            }));
        };
        let before = map.modulator(k - 1).to_vec();
        let xi = SimplexPoint::new(before.clone())?;
        let (_, matched, _) = corrective_jump_sampler(alpha, &xi, rng)?;
        let j = map.marks[k].map(|m| m.coord).unwrap_or(0);
        Ok(Some(CorrectiveEvent {
            time: map.times[k],
            dxi: map.ordinate[k] - map.ordinate[k - 1],
            before,
            after: map.modulator(k).to_vec(),
            by_jump: sim.drivers[j].tags[k] == EventTag::Jump,
            matched,
            compensated: compensated_survival(&map, &cfg.params, survival_t, Some(map.times[k]))?,
        }))
    })?;
    let events: Vec<CorrectiveEvent> = events.into_iter().flatten().collect();
    let n = events.len();
    let found: Vec<&CorrectiveEvent> = events.iter().filter(|e| e.time.is_finite()).collect();
    let creeping = found.iter().filter(|e| !e.by_jump).count();

    let mut gof = TestReport::distributional("corrective_jump_gof", "closed-form corrective law", 0.0, 1.0, n, ens.significance);
    let threshold = ens.significance / bins as f64;
    let mut worst_p: f64 = 1.0;
    let mut worst_d: f64 = 0.0;
    for b in 0..bins {
        let (lo, hi) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
        let members: Vec<&&CorrectiveEvent> =
            found.iter().filter(|e| e.before[0] >= lo && (e.before[0] < hi || (b + 1 == bins && e.before[0] <= hi))).collect();
        if members.len() < MIN_BIN_EVENTS {
            return Err(Error::InsufficientData(format!("bin [{lo}, {hi}) has {} events", members.len())));
        }
        let obs: Vec<f64> = members.iter().map(|e| e.dxi).collect();
        let sim: Vec<f64> = members.iter().map(|e| e.matched).collect();
        let ks = ks_two_sample(&obs, &sim);
        worst_p = worst_p.min(ks.p_value);
        worst_d = worst_d.max(ks.statistic);
        gof.details.push(DetailRow::distributional(&format!("bin[{lo:.2},{hi:.2})"), members.len(), ks.statistic, ks.p_value, threshold));
        if lo <= 0.5 && 0.5 < hi {
            gof.details.push(median_row(alpha, &members, &obs)?);
        }
    }
    gof.statistic = worst_d;
    gof.estimate = worst_d;
    gof.p_value = (worst_p * bins as f64).min(1.0);
    gof.pass = gof.details.iter().filter(|r| r.label.starts_with("bin")).all(|r| r.pass);
    gof.notes.push(format!("{} of {} paths reached a corrective jump; {creeping} crossings were not at a marked jump", found.len(), n));
    gof.notes.push(format!("Bonferroni threshold per bin {threshold}"));

    let comp: MeanVar = events.iter().map(|e| e.compensated).collect();
    let mut survival = TestReport::moment("pre_corrective_survival", comp.mean(), comp.std_error(), 0.0, n, ens.significance);
    let died = events.iter().filter(|e| e.time <= survival_t).count() as f64 / n as f64;
    survival.notes.push(format!("P(L <= {survival_t}) = {died:.5}; estimate is the mean compensated indicator"));
    Ok(CorrectiveOutcome { gof, survival, events })
}

/// Observed median of the bin against the median of the matched closed-form mixture.
fn median_row(alpha: f64, members: &[&&CorrectiveEvent], obs: &[f64]) -> Result<DetailRow> {
    let mut sorted = obs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted[sorted.len() / 2];
    let points: Vec<SimplexPoint> = members.iter().map(|e| SimplexPoint::new(e.before.clone())).collect::<Result<_>>()?;
    let mix_cdf = |x: f64| -> Result<f64> {
        let mut s = 0.0;
        for p in &points {
            s += corrective_jump_cdf(alpha, p, x)?;
        }
        Ok(s / points.len() as f64)
    };
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mix_cdf(mid)? < 0.5 { lo = mid } else { hi = mid }
    }
    let reference = 0.5 * (lo + hi);
    let mut dens = 0.0;
    for p in &points {
        for j in 0..p.dim() {
            dens += corrective_jump_density(alpha, p, j, reference)?;
        }
    }
    dens /= points.len() as f64;
    let se = 1.0 / (2.0 * dens * (points.len() as f64).sqrt());
    Ok(DetailRow::moment("centre_bin_median", points.len(), m, reference, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::StableParams;

    #[test]
    fn small_run_produces_events() {
        let p = StableParams::symmetric(1.0).unwrap();
        let cfg = SsmpConfig::iid(Model::Symmetric, 2, p, 1e3).unwrap();
        let ens = Ensemble::new(300, 2);
        let out = corrective_jump_gof(&cfg, &SimplexPoint::barycentre(2), 1, 0.5, &ens).unwrap();
        assert_eq!(out.events.len(), 300);
        assert!(out.events.iter().all(|e| e.time.is_finite()));
        for e in &out.events {
            // Corrective jumps land on the simplex.
            assert!((e.after.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(e.dxi > (1.0 - e.before.iter().cloned().fold(0.0, f64::max)).ln() - 1e-12);
        }
    }
}
