//! Window estimate of the killing hazard of the killed MAP.

use super::{DetailRow, Ensemble, TestReport};
use crate::analytics::killing_rate;
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::lamperti::{map_to_ssmp, ssmp_to_map};
use crate::levy::StableParams;
use crate::path::Lifetime;
use crate::ssmp::{simulate, Model, SsmpConfig, StopAt};

/// Per-path lifetime observation: `(ζ or censoring time, censored)`.
pub type LifetimeSample = (f64, bool);

/// Simulates killed MAP lifetimes from `(0, θ)` observed up to MAP time `window`.
pub fn sample_lifetimes(cfg: &SsmpConfig, theta: &SimplexPoint, window: f64, ens: &Ensemble) -> Result<Vec<LifetimeSample>> {
    if cfg.model != Model::Killed {
        return Err(Error::InvalidParameter("killing-rate estimation needs the killed model".into()));
    }
    let alpha = cfg.index();
    ens.run(|_, rng| {
        let sim = simulate(cfg, theta.components(), StopAt::ClockBudget(window), rng)?;
        let path = if ens.roundtrip { map_to_ssmp(&ssmp_to_map(&sim.path, alpha)?, alpha)? } else { sim.path };
        let map = ssmp_to_map(&path, alpha)?;
        Ok(match map.lifetime {
            Lifetime::Finite(z) => (z, false),
            Lifetime::Censored(c) => (c, true),
        })
    })
}

/// Occurrence/exposure hazard on `[0, w]` with a delta-method standard error.
pub fn window_hazard(samples: &[LifetimeSample], w: f64) -> Result<(f64, f64)> {
    let n = samples.len() as f64;
    let kills: Vec<f64> = samples.iter().map(|&(z, c)| if !c && z <= w { 1.0 } else { 0.0 }).collect();
    let exposure: Vec<f64> = samples.iter().map(|&(z, _)| z.min(w)).collect();
    let e: f64 = exposure.iter().sum();
    if e <= 0.0 || samples.iter().all(|&(z, c)| c && z < w) {
        return Err(Error::InsufficientData("every path is censored before the window closes".into()));
    }
    let k: f64 = kills.iter().sum();
    let rate = k / e;
    let mean_e = e / n;
    let resid: f64 = kills.iter().zip(&exposure).map(|(a, b)| (a - rate * b).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((rate, (resid / n).sqrt() / mean_e))
}

/// Estimate, its standard error, and the window-halving check.
#[derive(Debug, Clone)]
pub struct KillingOutcome {
    pub report: TestReport,
    pub samples: Vec<LifetimeSample>,
}

/// Hazard over `[0, window]` against `killing_rate(θ)`, with the estimate at `window/2` recorded
/// as a detail row.
pub fn estimate_killing_rate(cfg: &SsmpConfig, theta: &SimplexPoint, window: f64, ens: &Ensemble) -> Result<KillingOutcome> {
    let samples = sample_lifetimes(cfg, theta, window, ens)?;
    let report = killing_report(&samples, &cfg.params, theta, window, ens, "killing_rate")?;
    Ok(KillingOutcome { report, samples })
}

fn killing_report(
    samples: &[LifetimeSample],
    reference_params: &[StableParams],
    theta: &SimplexPoint,
    window: f64,
    ens: &Ensemble,
    name: &str,
) -> Result<TestReport> {
    let q = killing_rate(reference_params, theta.components())?;
    let (rate, se) = window_hazard(samples, window)?;
    let (half, half_se) = window_hazard(samples, window / 2.0)?;
    let mut r = TestReport::moment(name, rate, se, q, samples.len(), ens.significance);
    r.details.push(DetailRow::moment(&format!("window={window}"), samples.len(), rate, q, se));
    r.details.push(DetailRow::moment(&format!("window={}", window / 2.0), samples.len(), half, q, half_se));
    // The halved window shares paths with the full one, so the combined error is conservative.
    let conv = DetailRow::moment("halving", samples.len(), half, rate, (se * se + half_se * half_se).sqrt());
    r.notes.push(format!("halving check {}: |{half:.5} - {rate:.5}| vs 3 se", if conv.pass { "passes" } else { "fails" }));
    r.details.push(conv);
    Ok(r)
}

/// Power check: the same lifetimes judged against the killing rate of `alternative` parameters.
/// The report passes iff the moment test rejects.
pub fn killing_power_check(
    samples: &[LifetimeSample],
    alternative: &[StableParams],
    theta: &SimplexPoint,
    window: f64,
    ens: &Ensemble,
) -> Result<TestReport> {
    let mut r = killing_report(samples, alternative, theta, window, ens, "killing_power")?;
    let accepted = r.pass;
    r.pass = !accepted;
    let q = killing_rate(alternative, theta.components())?;
    r.notes.push(format!(
        "rejects mismatched reference {q:.5}: {} (|diff| = {:.5}, 3 se = {:.5})",
        !accepted,
        (r.estimate - q).abs(),
        3.0 * r.std_error
    ));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hazard_of_exponential_lifetimes() {
        // Exp(2) lifetimes censored at 0.5: occurrence/exposure is the MLE of the rate.
        use rand::Rng;
        let mut rng = crate::rng::stream(5, 0);
        let s: Vec<LifetimeSample> = (0..20000)
            .map(|_| {
                let z = -rng.random::<f64>().ln() / 2.0;
                if z > 0.5 { (0.5, true) } else { (z, false) }
            })
            .collect();
        let (r, se) = window_hazard(&s, 0.5).unwrap();
        assert!((r - 2.0).abs() < 3.0 * se, "{r} {se}");
    }

    #[test]
    fn all_censored_is_an_error() {
        let s = vec![(0.001, true); 10];
        assert!(matches!(window_hazard(&s, 0.01), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn small_ensemble_is_consistent() {
        let p = StableParams::symmetric(1.0).unwrap();
        let cfg = SsmpConfig::iid(Model::Killed, 2, p, 1.0).unwrap();
        let h = SimplexPoint::barycentre(2);
        let ens = Ensemble::new(4000, 1);
        let out = estimate_killing_rate(&cfg, &h, 0.05, &ens).unwrap();
        assert!(out.report.pass, "{}", out.report.summary());
        let again = estimate_killing_rate(&cfg, &h, 0.05, &ens).unwrap();
        assert_eq!(again.report, out.report);
    }
}
