//! Sampler fidelity: characteristic function, big-jump intensity, and big-jump tail law.

use super::{DetailRow, Ensemble, TestReport};
use crate::error::Result;
use crate::levy::{regular_grid, sample_stable_increment, sample_stable_path, StableParams, DEFAULT_JUMP_CAP};
use crate::path::EventTag;
use crate::stats::{ks_one_sample, normal_two_sided_p, MeanVar};

/// Empirical characteristic function of unit-time increments against `exp(−Ψ(z))`.
///
/// Real and imaginary parts are studentized separately; the report carries the largest absolute
/// deviation and passes iff every part lies within three standard errors.
pub fn cf_test(params: &StableParams, zs: &[f64], ens: &Ensemble) -> Result<TestReport> {
    let xs: Vec<f64> = ens.run(|_, rng| Ok(sample_stable_increment(params, 1.0, rng)))?;
    let n = xs.len();
    let mut details = Vec::with_capacity(2 * zs.len());
    for &z in zs {
        let target = (-params.char_exponent(z)).exp();
        let re: MeanVar = xs.iter().map(|x| (z * x).cos()).collect();
        let im: MeanVar = xs.iter().map(|x| (z * x).sin()).collect();
        details.push(DetailRow::moment(&format!("re z={z}"), n, re.mean(), target.re, re.std_error()));
        details.push(DetailRow::moment(&format!("im z={z}"), n, im.mean(), target.im, im.std_error()));
    }
    let worst = details.iter().max_by(|a, b| a.statistic.abs().total_cmp(&b.statistic.abs())).cloned();
    let name = format!("cf(alpha={}, rho={:.4})", params.alpha(), params.rho());
    let mut r = match &worst {
        Some(w) => TestReport::moment(&name, w.estimate, w.std_error, w.reference.unwrap_or(0.0), n, ens.significance),
        None => TestReport::moment(&name, 0.0, 0.0, 0.0, n, ens.significance),
    };
    r.pass = details.iter().all(|d| d.pass);
    r.p_value = worst.map_or(1.0, |w| normal_two_sided_p(w.statistic));
    r.details = details;
    Ok(r)
}

/// Mean number of marked jumps `|w| > δ` on `[0, horizon]` against `Π(|x| > δ)·horizon`.
pub fn big_jump_intensity_test(params: &StableParams, delta: f64, horizon: f64, ens: &Ensemble) -> Result<TestReport> {
    let grid = regular_grid(horizon, horizon);
    let counts: Vec<f64> = ens.run(|_, rng| {
        let path = sample_stable_path(params, 0.0, &grid, delta, DEFAULT_JUMP_CAP, rng)?;
        Ok(path.tags.iter().filter(|&&t| t == EventTag::Jump).count() as f64)
    })?;
    let m: MeanVar = counts.into_iter().collect();
    Ok(TestReport::moment("big_jump_intensity", m.mean(), m.std_error(), params.tail_mass(delta) * horizon, m.count() as usize, ens.significance))
}

/// One-sample KS of `|w|` for jumps beyond `δ` against `1 − (|w|/δ)^{−α}`, plus the upward
/// fraction against `c1/(c1+c2)`.
pub fn tail_law_test(params: &StableParams, delta: f64, ens: &Ensemble) -> Result<TestReport> {
    let ws: Vec<f64> = ens.run(|_, rng| Ok(params.sample_big_jump(delta, rng)))?;
    let n = ws.len();
    let a = params.alpha();
    let sizes: Vec<f64> = ws.iter().map(|w| w.abs()).collect();
    let ks = ks_one_sample(&sizes, |s| if s <= delta { 0.0 } else { 1.0 - (s / delta).powf(-a) });
    let up: MeanVar = ws.iter().map(|&w| (w > 0.0) as u8 as f64).collect();
    let p_up = params.c1() / (params.c1() + params.c2());
    let mut r = TestReport::distributional("tail_law", "1 - (|w|/delta)^-alpha", ks.statistic, ks.p_value, n, ens.significance);
    r.details.push(DetailRow::distributional("size", n, ks.statistic, ks.p_value, ens.significance));
    // Binomial standard error at the reference; exact zero when the law is one-sided.
    let se = (p_up * (1.0 - p_up) / n as f64).sqrt();
    r.details.push(DetailRow::moment("upward_fraction", n, up.mean(), p_up, se));
    r.pass = r.details.iter().all(|d| d.pass);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_cf_small_sample() {
        let p = StableParams::symmetric(1.0).unwrap();
        let r = cf_test(&p, &[0.5, 1.0, 2.0], &Ensemble::new(20_000, 11)).unwrap();
        assert_eq!(r.details.len(), 6);
        assert!(r.pass, "{}", r.summary());
    }

    #[test]
    fn cf_at_zero_is_exact() {
        let p = StableParams::new(1.5, 1.0 / 3.0).unwrap();
        let r = cf_test(&p, &[0.0], &Ensemble::new(100, 1)).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn cauchy_intensity_and_tail() {
        let p = StableParams::symmetric(1.0).unwrap();
        let r = big_jump_intensity_test(&p, 1.0, 1.0, &Ensemble::new(20_000, 2)).unwrap();
        assert!((r.reference_value().unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!(r.pass, "{}", r.summary());
        let t = tail_law_test(&p, 1.0, &Ensemble::new(10_000, 3)).unwrap();
        assert!(t.pass, "{}", t.summary());
    }

    #[test]
    fn one_sided_tail_has_no_downward_jumps() {
        let p = StableParams::spectrally_positive(1.5).unwrap();
        let t = tail_law_test(&p, 0.5, &Ensemble::new(2_000, 4)).unwrap();
        assert_eq!(t.details[1].estimate, 1.0);
        assert!(t.pass);
    }
}
