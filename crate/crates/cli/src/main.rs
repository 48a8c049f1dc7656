//! `orthant`: simulate ssMps, apply the Lamperti transform, evaluate closed forms and run
//! verification suites.
//!
//! Exit status: 0 when every selected test passes, 1 when a test fails (the failure list is
//! printed as JSON on stdout), 2 on invalid input or any other error.

// `!(x > 0.0)` is the NaN-rejecting form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use orthant_cli::config::{EnsembleSection, ModelSection, PerCoord, SimSection, TestKind, TestsSection};
use orthant_cli::experiment::{dynkin_functions, Failure};
use orthant_cli::{run_experiment, simulate_stage, ExperimentConfig};
use orthant_lamperti::analytics::{
    corrective_jump_density, exit_mass_quadrature, generator_bm_map, generator_skorokhod_map, jump_kernel_density,
    killing_rate, sde_coefficients, Variant,
};
use orthant_lamperti::csvio::{read_map, read_skeleton, write_map, write_skeleton};
use orthant_lamperti::geometry::SimplexPoint;
use orthant_lamperti::lamperti::{map_to_ssmp, ssmp_to_map};
use orthant_lamperti::levy::StableParams;
use orthant_lamperti::ssmp::Model;
use orthant_lamperti::verify::TestReport;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "orthant", version, about = "Lamperti transforms of orthant self-similar Markov processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate ssMp sample paths and their MAP transforms as CSV.
    Simulate(SimulateArgs),
    /// Convert a path CSV between the ssMp and MAP representations.
    Transform {
        #[arg(long, value_enum)]
        direction: Direction,
        /// Self-similarity index.
        #[arg(long)]
        alpha: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Evaluate closed-form quantities as CSV on stdout.
    Analytics {
        #[command(subcommand)]
        what: Analytic,
    },
    /// Run the tests selected by a config and write the artifact bundle.
    Verify {
        /// Runs only this test instead of the configured selection.
        #[arg(value_enum)]
        test: Option<VerifyTest>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "ORTHANT_OUT_DIR", default_value = "orthant-out")]
        out: PathBuf,
    },
    /// Summarize the reports of a bundle.
    Report {
        #[arg(long, env = "ORTHANT_OUT_DIR", default_value = "orthant-out")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config; the model flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "config")]
    model: Option<ModelArg>,
    #[arg(long = "d", default_value_t = 2)]
    dim: usize,
    /// Start point `x1,..,xd`; defaults to the barycentre of the simplex.
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<f64>>,
    #[arg(long)]
    alpha: Option<f64>,
    /// One value, or one per coordinate.
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e9)]
    horizon: f64,
    /// Lamperti-clock length of each path.
    #[arg(long, default_value_t = 1.0)]
    map_horizon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Overrides `sim.paths_written` of a config.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, env = "ORTHANT_OUT_DIR", default_value = "orthant-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Killed,
    Symmetric,
    SkorokhodStable,
    SkorokhodBm,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Killed => Model::Killed,
            ModelArg::Symmetric => Model::Symmetric,
            ModelArg::SkorokhodStable => Model::SkorokhodStable,
            ModelArg::SkorokhodBm => Model::SkorokhodBm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    ToMap,
    ToSsmp,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyTest {
    Roundtrip,
    Killing,
    Compensation,
    Corrective,
    Dynkin,
    Sde,
    Cf,
}

impl From<VerifyTest> for TestKind {
    fn from(t: VerifyTest) -> TestKind {
        match t {
            VerifyTest::Roundtrip => TestKind::Roundtrip,
            VerifyTest::Killing => TestKind::Killing,
            VerifyTest::Compensation => TestKind::Compensation,
            VerifyTest::Corrective => TestKind::Corrective,
            VerifyTest::Dynkin => TestKind::Dynkin,
            VerifyTest::Sde => TestKind::Sde,
            VerifyTest::Cf => TestKind::Cf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionArg {
    Gaussian,
    Rational,
    CosineBump,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorModel {
    SkorokhodStable,
    SkorokhodBm,
}

#[derive(Subcommand)]
enum Analytic {
    /// Killing rate `q(θ)`: closed form beside the exit mass of the jump kernel by quadrature.
    Q {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
    },
    /// Jump-kernel density of ordinate jumps per driving coordinate on a grid.
    Kernel {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Corrective-jump density per direction on a grid.
    Corrective {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Coefficients of the two-dimensional reflected-BM MAP SDE in `(ρ, Θ¹, Θ²)` rows.
    Sde {
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
    },
    /// MAP generator applied to a class-D test function at one point.
    Generator {
        #[arg(long, value_enum)]
        model: GeneratorModel,
        #[arg(long, value_enum)]
        function: FunctionArg,
        /// Index of the Skorokhod-stable driver.
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value = "reconciled")]
        variant: String,
        #[arg(long)]
        x: f64,
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
    },
}

#[derive(Args)]
struct Grid {
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 121)]
    points: usize,
}

impl Grid {
    fn nodes(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.to > self.from) {
            bail!("need at least two points on a nonempty interval");
        }
        Ok((0..self.points).map(|k| self.from + (self.to - self.from) * k as f64 / (self.points - 1) as f64).collect())
    }
}

fn params(alpha: f64, rho: &[f64], dim: usize) -> Result<Vec<StableParams>> {
    let rho = match rho.len() {
        1 => vec![rho[0]; dim],
        n if n == dim => rho.to_vec(),
        n => bail!("{n} rho values for dimension {dim}"),
    };
    rho.iter().map(|&r| Ok(StableParams::new(alpha, r)?)).collect()
}

/// Writes a CSV table to stdout.
fn emit(header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn columns(first: &str, prefix: &str, d: usize) -> Vec<String> {
    std::iter::once(first.to_string()).chain((1..=d).map(|j| format!("{prefix}{j}"))).collect()
}

fn analytics(what: Analytic) -> Result<()> {
    match what {
        Analytic::Q { alpha, rho, theta } => {
            let p = params(alpha, &rho, theta.len())?;
            let th = SimplexPoint::new(theta)?;
            emit(&["closed_form".into(), "quadrature".into()], &[vec![killing_rate(&p, th.components())?, exit_mass_quadrature(&p, &th)?]])
        }
        Analytic::Kernel { alpha, rho, theta, grid } => {
            let p = params(alpha, &rho, theta.len())?;
            let th = SimplexPoint::new(theta)?;
            let mut rows = Vec::new();
            for y in grid.nodes()?.into_iter().filter(|&y| y != 0.0) {
                let mut row = vec![y];
                for j in 0..th.dim() {
                    row.push(jump_kernel_density(&p, &th, j, y)?);
                }
                rows.push(row);
            }
            emit(&columns("y", "density", th.dim()), &rows)
        }
        Analytic::Corrective { alpha, theta, grid } => {
            let th = SimplexPoint::new(theta)?;
            let mut rows = Vec::new();
            for x in grid.nodes()? {
                let mut row = vec![x];
                for j in 0..th.dim() {
                    row.push(corrective_jump_density(alpha, &th, j, x)?);
                }
                rows.push(row);
            }
            emit(&columns("x", "density", th.dim()), &rows)
        }
        Analytic::Sde { theta } => {
            let c = sde_coefficients(&SimplexPoint::new(theta)?)?;
            let header: Vec<String> =
                ["row", "drift", "b1", "b2", "reflection", "lambda2", "lambda3"].iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<f64>> =
                (0..3).map(|i| vec![i as f64, c.a[i], c.b[i][0], c.b[i][1], c.gamma[i], c.lambda2, c.lambda3]).collect();
            emit(&header, &rows)
        }
        Analytic::Generator { model, function, alpha, variant, x, theta } => {
            let th = SimplexPoint::new(theta)?;
            let fs = dynkin_functions(th.dim())?;
            let f = &fs[match function {
                FunctionArg::Gaussian => 0,
                FunctionArg::Rational => 1,
                FunctionArg::CosineBump => 2,
            }];
            let v = match model {
                GeneratorModel::SkorokhodBm => generator_bm_map(f, x, th.components())?,
                GeneratorModel::SkorokhodStable => generator_skorokhod_map(f, x, &th, alpha, Variant::parse(&variant)?)?,
            };
            let mut header = columns("x", "theta", th.dim());
            header.push("value".into());
            let mut row = vec![x];
            row.extend(th.components());
            row.push(v);
            emit(&header, &[row])
        }
    }
}

fn transform(input: &Path, output: &Path, alpha: f64, direction: Direction) -> Result<()> {
    let src = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let dst = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    match direction {
        Direction::ToMap => write_map(&ssmp_to_map(&read_skeleton(src)?, alpha)?, dst)?,
        Direction::ToSsmp => write_skeleton(&map_to_ssmp(&read_map(src)?, alpha)?, dst)?,
    }
    Ok(())
}

fn simulate_config(a: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&a.config, a.model) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(model)) => {
            let kind = Model::from(model);
            let (alpha, rho) = match (kind, a.alpha, &a.rho) {
                (Model::SkorokhodBm, _, _) => (None, None),
                (_, Some(alpha), Some(rho)) => {
                    let rho = if rho.len() == 1 { PerCoord::One(rho[0]) } else { PerCoord::Many(rho.clone()) };
                    (Some(PerCoord::One(alpha)), Some(rho))
                }
                _ => bail!("model {} needs --alpha and --rho", kind.as_str()),
            };
            let cfg = ExperimentConfig {
                model: ModelSection { kind, dim: a.dim, alpha, rho },
                sim: SimSection { horizon: a.horizon, map_horizon: a.map_horizon, start: a.start.clone(), ..SimSection::default() },
                ensemble: EnsembleSection { n_paths: 1, seed: a.seed },
                tests: TestsSection::default(),
            };
            cfg.validate()?;
            cfg
        }
        (None, None) => bail!("either --config or --model is required"),
    };
    if let Some(n) = a.paths {
        cfg.sim.paths_written = n;
    }
    Ok(cfg)
}

fn print_reports(reports: &[TestReport]) -> Result<bool> {
    let mut out = std::io::stdout().lock();
    for r in reports {
        writeln!(out, "{}", r.summary())?;
        for n in &r.notes {
            writeln!(out, "  note: {n}")?;
        }
    }
    let failures: Vec<Failure> = reports.iter().filter(|r| !r.pass).map(Failure::from).collect();
    if !failures.is_empty() {
        writeln!(out, "{}", serde_json::to_string_pretty(&serde_json::json!({ "failures": failures }))?)?;
    }
    Ok(failures.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = simulate_config(&a)?;
            for f in simulate_stage(&cfg, &a.out)? {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Transform { direction, alpha, input, output } => transform(&input, &output, alpha, direction).map(|_| true),
        Command::Analytics { what } => analytics(what).map(|_| true),
        Command::Verify { test, config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(t) = test {
                cfg.tests.select = vec![t.into()];
            }
            let bundle = run_experiment(&cfg, &out)?;
            print_reports(&bundle.reports)
        }
        Command::Report { dir } => {
            let p = dir.join("reports.json");
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let reports: Vec<TestReport> = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            print_reports(&reports)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            println!("{}", serde_json::json!({ "failures": [{ "name": "error", "summary": format!("{e:#}") }] }));
            ExitCode::from(2)
        }
    }
}
