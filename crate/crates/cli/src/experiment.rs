//! Experiment orchestration and the on-disk artifact bundle.
//!
//! Bundle layout under the output directory:
//! `config.toml`, `paths/ssmp_<i>.csv`, `paths/map_<i>.csv`, `reports/<k>_<name>.json`,
//! `reports/<k>_<name>.details.csv`, `plots/*.csv`, `reports.json`, `failures.json` and
//! `metadata.json`. Everything but `metadata.json` is a function of the config alone.

use crate::config::{ExperimentConfig, TestKind};
use anyhow::{Context, Result};
use orthant_lamperti::analytics::{corrective_jump_cdf, killing_rate, make_class_d, SmoothG, TestFunction};
use orthant_lamperti::csvio::{write_map, write_skeleton};
use orthant_lamperti::geometry::SimplexPoint;
use orthant_lamperti::lamperti::{map_to_ssmp, skeleton_distance, ssmp_to_map};
use orthant_lamperti::levy::StableParams;
use orthant_lamperti::rng::{stream, AUX_STREAM_OFFSET};
use orthant_lamperti::ssmp::{simulate, Model, SsmpConfig, StopAt};
use orthant_lamperti::verify::dynkin::TableSpec;
use orthant_lamperti::verify::killing::window_hazard;
use orthant_lamperti::verify::{
    big_jump_intensity_test, cf_test, compensation_test, corrective_jump_gof, dynkin_bm, dynkin_skorokhod,
    estimate_killing_rate, killing_power_check, sde_short_time_variance, sde_vs_transform_test, tail_law_test,
    write_details_csv, CorrectiveOutcome, Ensemble, Indicator, SignSplit, TestReport,
};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Reports of one run and the files written.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub reports: Vec<TestReport>,
    pub files: Vec<PathBuf>,
}

impl Bundle {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<Failure> {
        self.reports.iter().filter(|r| !r.pass).map(Failure::from).collect()
    }
}

/// Machine-readable entry of the failure list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub name: String,
    pub summary: String,
}

impl From<&TestReport> for Failure {
    fn from(r: &TestReport) -> Self {
        Failure { name: r.name.clone(), summary: r.summary() }
    }
}

struct Writer {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn create(&mut self, rel: &str) -> Result<fs::File> {
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        self.files.push(p);
        Ok(f)
    }

    fn text(&mut self, rel: &str, body: &str) -> Result<()> {
        use std::io::Write;
        self.create(rel)?.write_all(body.as_bytes())?;
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, rel: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(rel, &s)
    }

    fn csv(&mut self, rel: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(rel)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// File-name form of a report name.
fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// The three smooth class-𝒟 test functions used by the Dynkin checks.
pub fn dynkin_functions(dim: usize) -> Result<Vec<TestFunction>> {
    Ok(vec![
        make_class_d(SmoothG::gaussian(vec![1.0; dim]))?,
        make_class_d(SmoothG::rational(dim))?,
        make_class_d(SmoothG::cosine_bump(dim))?,
    ])
}

/// Writes `cfg.sim.paths_written` ssMp paths and their MAP transforms, each observed up to
/// Lamperti time `sim.map_horizon`. Stream indices sit above those of the test ensembles.
pub fn simulate_stage(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut w = Writer { root: out.to_path_buf(), files: Vec::new() };
    write_paths(cfg, &mut w)?;
    Ok(w.files)
}

fn write_paths(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let ssmp = cfg.ssmp()?;
    let x0 = cfg.start()?;
    let alpha = ssmp.index();
    for i in 0..cfg.sim.paths_written {
        let mut rng = stream(cfg.ensemble.seed, AUX_STREAM_OFFSET + i as u64);
        let z = simulate(&ssmp, &x0, StopAt::ClockBudget(cfg.sim.map_horizon), &mut rng)?.path;
        let m = ssmp_to_map(&z, alpha)?;
        write_skeleton(&z, w.create(&format!("paths/ssmp_{i}.csv"))?)?;
        write_map(&m, w.create(&format!("paths/map_{i}.csv"))?)?;
    }
    Ok(())
}

/// Runs the configured simulation, transform and selected tests, writing the bundle to `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Bundle> {
    cfg.validate()?;
    let mut w = Writer { root: out.to_path_buf(), files: Vec::new() };
    w.text("config.toml", &cfg.to_flat()?)?;
    write_paths(cfg, &mut w)?;
    let mut reports = Vec::new();
    for (k, kind) in cfg.tests.select.iter().enumerate() {
        // Each selected test draws from its own seed so adding a test leaves the others unchanged.
        let ens = Ensemble {
            significance: cfg.tests.significance,
            ..Ensemble::new(cfg.ensemble.n_paths, cfg.ensemble.seed.wrapping_add(k as u64))
        };
        reports.extend(run_test(*kind, cfg, &ens, &mut w)?);
    }
    for (i, r) in reports.iter().enumerate() {
        let base = format!("reports/{i:02}_{}", slug(&r.name));
        w.json(&format!("{base}.json"), r)?;
        if !r.details.is_empty() {
            write_details_csv(r, w.create(&format!("{base}.details.csv"))?)?;
        }
    }
    w.json("reports.json", &reports)?;
    let bundle = Bundle { reports, files: Vec::new() };
    w.json("failures.json", &bundle.failures())?;
    let stamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    w.json(
        "metadata.json",
        &serde_json::json!({ "unix_time": stamp, "version": env!("CARGO_PKG_VERSION"), "all_pass": bundle.all_pass() }),
    )?;
    Ok(Bundle { files: w.files, ..bundle })
}

fn distinct_params(ssmp: &SsmpConfig) -> Vec<StableParams> {
    let mut out: Vec<StableParams> = Vec::new();
    for p in &ssmp.params {
        if !out.contains(p) {
            out.push(*p);
        }
    }
    out
}

fn run_test(kind: TestKind, cfg: &ExperimentConfig, ens: &Ensemble, w: &mut Writer) -> Result<Vec<TestReport>> {
    let model = kind
        .model_for(cfg.model.kind, cfg.model.dim)
        .with_context(|| format!("test {} does not apply to model {}", kind.as_str(), cfg.model.kind.as_str()))?;
    let ssmp = cfg.ssmp_as(model)?;
    let theta = cfg.theta()?;
    let t = &cfg.tests;
    let reports = match kind {
        TestKind::Roundtrip => vec![roundtrip(cfg, &ssmp, ens)?],
        TestKind::Cf => distinct_params(&ssmp).iter().map(|p| cf_test(p, &t.z, ens)).collect::<Result<_, _>>()?,
        TestKind::BigJumpIntensity => distinct_params(&ssmp)
            .iter()
            .map(|p| big_jump_intensity_test(p, t.jump_delta, 1.0, ens))
            .collect::<Result<_, _>>()?,
        TestKind::TailLaw => {
            distinct_params(&ssmp).iter().map(|p| tail_law_test(p, t.jump_delta, ens)).collect::<Result<_, _>>()?
        }
        TestKind::Killing | TestKind::KillingPower => {
            let out = estimate_killing_rate(&ssmp, &theta, t.window, ens)?;
            hazard_plot(w, &out.samples, &ssmp.params, &theta, t.window)?;
            if kind == TestKind::Killing {
                vec![out.report]
            } else {
                let alt = ssmp
                    .params
                    .iter()
                    .map(|p| StableParams::new(t.alternative_alpha, p.rho()))
                    .collect::<Result<Vec<_>, _>>()?;
                vec![killing_power_check(&out.samples, &alt, &theta, t.window, ens)?]
            }
        }
        TestKind::Compensation => vec![
            compensation_test(&Indicator, &ssmp, &theta, t.t, t.delta, ens)?,
            compensation_test(&SignSplit { up: 1.0, down: -0.5 }, &ssmp, &theta, t.t, t.delta, ens)?,
        ],
        TestKind::Corrective => {
            let out = corrective_jump_gof(&ssmp, &theta, t.bins, t.survival_t, ens)?;
            corrective_plot(w, &out, ssmp.index())?;
            vec![out.gof, out.survival]
        }
        TestKind::Dynkin => {
            let fs = dynkin_functions(ssmp.dim)?;
            if ssmp.model == Model::SkorokhodBm {
                dynkin_bm(&fs, &ssmp, &theta, t.t, ens)?.reports
            } else {
                let mut all = Vec::new();
                for v in cfg.variants()? {
                    all.extend(dynkin_skorokhod(&fs, v, &ssmp, &theta, t.t, TableSpec::default(), ens)?.reports);
                }
                all
            }
        }
        TestKind::Sde => vec![sde_vs_transform_test(&ssmp, &theta, t.t, t.dt, ens)?],
        TestKind::SdeVariance => vec![sde_short_time_variance(&theta, t.t, t.dt, ens)?],
    };
    Ok(reports)
}

fn roundtrip(cfg: &ExperimentConfig, ssmp: &SsmpConfig, ens: &Ensemble) -> Result<TestReport> {
    let x0 = cfg.theta()?.into_vec();
    let alpha = ssmp.index();
    let budget = cfg.sim.map_horizon;
    let dists = ens.run(|_, rng| {
        let z = simulate(ssmp, &x0, StopAt::ClockBudget(budget), rng)?.path;
        Ok(skeleton_distance(&z, &map_to_ssmp(&ssmp_to_map(&z, alpha)?, alpha)?))
    })?;
    let worst = dists.iter().copied().fold(0.0, f64::max);
    let mut r = TestReport::moment("lamperti_roundtrip", worst, 0.0, 0.0, dists.len(), ens.significance);
    r.pass = worst <= 1e-9;
    r.notes.push(format!("sup-norm distance over events {worst:.3e}, tolerance 1e-9"));
    Ok(r)
}

/// Empirical hazard over shrinking windows against the analytic rate.
fn hazard_plot(w: &mut Writer, samples: &[(f64, bool)], params: &[StableParams], theta: &SimplexPoint, window: f64) -> Result<()> {
    let q = killing_rate(params, theta.components())?;
    let mut rows = Vec::new();
    for k in 0..4 {
        let win = window / f64::from(1 << (3 - k));
        if let Ok((rate, se)) = window_hazard(samples, win) {
            rows.push(vec![win, rate, se, q]);
        }
    }
    w.csv("plots/hazard.csv", &["window", "empirical", "std_error", "analytic"], &rows)
}

/// Histogram of corrective ordinate jumps against the expected counts of the closed-form law,
/// mixed over the observed pre-jump angles.
fn corrective_plot(w: &mut Writer, out: &CorrectiveOutcome, alpha: f64) -> Result<()> {
    const BINS: usize = 40;
    const MIXTURE: usize = 2000;
    let events: Vec<_> = out.events.iter().filter(|e| e.dxi.is_finite()).collect();
    let mut x: Vec<f64> = events.iter().map(|e| e.dxi).collect();
    if x.len() < 2 {
        return w.csv("plots/corrective_hist.csv", &["lo", "hi", "count", "expected"], &[]);
    }
    x.sort_by(f64::total_cmp);
    let (lo, hi) = (x[x.len() / 100], x[x.len() - 1 - x.len() / 100]);
    let edges: Vec<f64> = (0..=BINS).map(|k| lo + (hi - lo) * k as f64 / BINS as f64).collect();
    let angles: Vec<SimplexPoint> = events
        .iter()
        .step_by((events.len() / MIXTURE).max(1))
        .map(|e| SimplexPoint::normalize(&e.before))
        .collect::<Result<_, _>>()?;
    let mut cdf = vec![0.0; edges.len()];
    for a in &angles {
        for (c, &e) in cdf.iter_mut().zip(&edges) {
            *c += corrective_jump_cdf(alpha, a, e)? / angles.len() as f64;
        }
    }
    let n = x.len() as f64;
    let rows = (0..BINS)
        .map(|k| {
            let count = x.iter().filter(|&&v| v >= edges[k] && v < edges[k + 1]).count() as f64;
            vec![edges[k], edges[k + 1], count, n * (cdf[k + 1] - cdf[k])]
        })
        .collect::<Vec<_>>();
    w.csv("plots/corrective_hist.csv", &["lo", "hi", "count", "expected"], &rows)
}
