//! Monte Carlo estimators and statistical tests confronting the closed forms with simulation.
//!
//! Every ensemble draws path `i` from its own stream `(seed, i)`, so reports are bit-for-bit
//! reproducible regardless of the number of worker threads.

pub mod cf;
pub mod compensation;
pub mod corrective;
pub mod dynkin;
pub mod killing;
pub mod sde;

use crate::error::Result;
use crate::stats::normal_two_sided_p;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cf::{big_jump_intensity_test, cf_test, tail_law_test};
pub use compensation::{compensation_test, Indicator, JumpFunctional, SignSplit};
pub use corrective::{corrective_jump_gof, CorrectiveOutcome};
pub use dynkin::{dynkin_bm, dynkin_skorokhod, DynkinOutcome};
pub use killing::{estimate_killing_rate, killing_power_check, KillingOutcome};
pub use sde::{sde_short_time_variance, sde_simulate, sde_vs_transform_test};

/// Default significance level.
pub const SIGNIFICANCE: f64 = 0.01;

/// Ensemble size, seed, and acceptance level shared by all tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub n_paths: usize,
    pub seed: u64,
    pub significance: f64,
    /// Pass every simulated path through `map_to_ssmp ∘ ssmp_to_map` before use.
    pub roundtrip: bool,
}

impl Ensemble {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Ensemble { n_paths, seed, significance: SIGNIFICANCE, roundtrip: false }
    }

    /// Runs `f` on every path index with its own stream; results keep index order.
    pub fn run<T: Send, F>(&self, f: F) -> Result<Vec<T>>
    where
        F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync + Send,
    {
        (0..self.n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = crate::rng::stream(self.seed, i as u64);
                f(i, &mut rng)
            })
            .collect()
    }
}

/// Reference a report compares against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reference {
    Value(f64),
    Distribution(String),
}

/// One line of per-bin or per-component detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub label: String,
    pub n: usize,
    pub estimate: f64,
    pub reference: Option<f64>,
    pub std_error: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Outcome of one statistical check.
///
/// Moment tests pass iff `|estimate − reference| ≤ 3·std_error`; distributional tests pass iff
/// `p_value > significance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub reference: Reference,
    pub statistic: f64,
    pub p_value: f64,
    pub n_paths: usize,
    pub significance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<DetailRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn studentize(estimate: f64, reference: f64, se: f64) -> f64 {
    let diff = estimate - reference;
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

impl TestReport {
    pub fn moment(name: &str, estimate: f64, std_error: f64, reference: f64, n_paths: usize, significance: f64) -> Self {
        let z = studentize(estimate, reference, std_error);
        TestReport {
            name: name.into(),
            estimate,
            std_error,
            reference: Reference::Value(reference),
            statistic: z,
            p_value: normal_two_sided_p(z),
            n_paths,
            significance,
            pass: (estimate - reference).abs() <= 3.0 * std_error,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn distributional(name: &str, reference: &str, statistic: f64, p_value: f64, n_paths: usize, significance: f64) -> Self {
        TestReport {
            name: name.into(),
            estimate: statistic,
            std_error: 0.0,
            reference: Reference::Distribution(reference.into()),
            statistic,
            p_value,
            n_paths,
            significance,
            pass: p_value > significance,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_notes(mut self, notes: impl IntoIterator<Item = String>) -> Self {
        self.notes.extend(notes);
        self
    }

    /// Numeric reference, if the check compares against one.
    pub fn reference_value(&self) -> Option<f64> {
        match self.reference {
            Reference::Value(v) => Some(v),
            Reference::Distribution(_) => None,
        }
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let reference = match &self.reference {
            Reference::Value(v) => format!("{v:.6}"),
            Reference::Distribution(s) => s.clone(),
        };
        format!(
            "{} {}: estimate {:.6} (se {:.2e}) vs {} | stat {:.3} p {:.4} n {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.estimate,
            self.std_error,
            reference,
            self.statistic,
            self.p_value,
            self.n_paths
        )
    }
}

impl DetailRow {
    pub fn moment(label: &str, n: usize, estimate: f64, reference: f64, std_error: f64) -> Self {
        let z = studentize(estimate, reference, std_error);
        DetailRow {
            label: label.into(),
            n,
            estimate,
            reference: Some(reference),
            std_error,
            statistic: z,
            p_value: normal_two_sided_p(z),
            pass: (estimate - reference).abs() <= 3.0 * std_error,
        }
    }

    pub fn distributional(label: &str, n: usize, statistic: f64, p_value: f64, threshold: f64) -> Self {
        DetailRow {
            label: label.into(),
            n,
            estimate: statistic,
            reference: None,
            std_error: 0.0,
            statistic,
            p_value,
            pass: p_value > threshold,
        }
    }
}

/// Writes report details as CSV.
pub fn write_details_csv<W: std::io::Write>(report: &TestReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "n", "estimate", "reference", "std_error", "statistic", "p_value", "pass"])?;
    for r in &report.details {
        out.write_record([
            r.label.clone(),
            r.n.to_string(),
            r.estimate.to_string(),
            r.reference.map(|v| v.to_string()).unwrap_or_default(),
            r.std_error.to_string(),
            r.statistic.to_string(),
            r.p_value.to_string(),
            r.pass.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
