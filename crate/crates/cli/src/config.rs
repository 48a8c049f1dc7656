//! Experiment configuration: a flat file of dotted `key = value` lines (TOML dotted keys).

use anyhow::{bail, Context, Result};
use orthant_lamperti::analytics::Variant;
use orthant_lamperti::geometry::SimplexPoint;
use orthant_lamperti::levy::StableParams;
use orthant_lamperti::ssmp::{Model, SsmpConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One value shared by every coordinate, or one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerCoord {
    One(f64),
    Many(Vec<f64>),
}

impl PerCoord {
    fn expand(&self, dim: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            PerCoord::One(v) => Ok(vec![*v; dim]),
            PerCoord::Many(v) if v.len() == dim => Ok(v.clone()),
            PerCoord::Many(v) => bail!("{what} has {} entries for dimension {dim}", v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Model,
    pub dim: usize,
    /// Absent for `skorokhod-bm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<PerCoord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<PerCoord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// ssMp time horizon.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Lamperti-clock length of persisted sample paths.
    #[serde(default = "default_map_horizon")]
    pub map_horizon: f64,
    /// Starting angle; the start point is this angle at norm one. Defaults to the barycentre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    /// Start point of persisted sample paths; defaults to `θ` at norm one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Number of sample paths persisted as CSV.
    #[serde(default = "default_paths_written")]
    pub paths_written: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_paths: usize,
    pub seed: u64,
}

/// Selectable checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Roundtrip,
    Cf,
    BigJumpIntensity,
    TailLaw,
    Killing,
    KillingPower,
    Compensation,
    Corrective,
    Dynkin,
    Sde,
    SdeVariance,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Roundtrip => "roundtrip",
            TestKind::Cf => "cf",
            TestKind::BigJumpIntensity => "big-jump-intensity",
            TestKind::TailLaw => "tail-law",
            TestKind::Killing => "killing",
            TestKind::KillingPower => "killing-power",
            TestKind::Compensation => "compensation",
            TestKind::Corrective => "corrective",
            TestKind::Dynkin => "dynkin",
            TestKind::Sde => "sde",
            TestKind::SdeVariance => "sde-variance",
        }
    }

    /// Construction the test runs on, given the configured one. The killing, compensation and
    /// corrective checks reuse the configured stable drivers under their own construction.
    pub fn model_for(self, configured: Model, dim: usize) -> Option<Model> {
        let stable_orthant = matches!(configured, Model::Killed | Model::Symmetric);
        match self {
            TestKind::Roundtrip => Some(configured),
            TestKind::Cf | TestKind::BigJumpIntensity | TestKind::TailLaw => {
                (configured != Model::SkorokhodBm).then_some(configured)
            }
            TestKind::Killing | TestKind::KillingPower | TestKind::Compensation => stable_orthant.then_some(Model::Killed),
            TestKind::Corrective => stable_orthant.then_some(Model::Symmetric),
            TestKind::Dynkin => {
                (configured == Model::SkorokhodBm || (configured == Model::SkorokhodStable && dim == 2)).then_some(configured)
            }
            TestKind::Sde | TestKind::SdeVariance => (configured == Model::SkorokhodBm && dim == 2).then_some(configured),
        }
    }
}

fn variant_names() -> Vec<String> {
    vec![Variant::Literal.as_str().into(), Variant::Reconciled.as_str().into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestsSection {
    #[serde(default)]
    pub select: Vec<TestKind>,
    #[serde(default = "default_significance")]
    pub significance: f64,
    /// MAP-time window of the killing hazard.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Killing rate of this index is the mismatched reference of the power check.
    #[serde(default = "default_alternative_alpha")]
    pub alternative_alpha: f64,
    /// MAP horizon of the compensation, Dynkin and SDE checks.
    #[serde(default = "default_t")]
    pub t: f64,
    /// Ordinate-jump cutoff of the compensation check.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_survival_t")]
    pub survival_t: f64,
    /// Euler step of the SDE checks.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Arguments of the characteristic-function check.
    #[serde(default = "default_z")]
    pub z: Vec<f64>,
    /// Big-jump threshold of the intensity and tail-law checks.
    #[serde(default = "default_jump_delta")]
    pub jump_delta: f64,
    #[serde(default = "variant_names")]
    pub variants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub sim: SimSection,
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub tests: TestsSection,
}

fn default_horizon() -> f64 {
    1e9
}
fn default_map_horizon() -> f64 {
    1.0
}
fn default_paths_written() -> usize {
    3
}
fn default_significance() -> f64 {
    orthant_lamperti::verify::SIGNIFICANCE
}
fn default_window() -> f64 {
    0.01
}
fn default_alternative_alpha() -> f64 {
    1.2
}
fn default_t() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.5
}
fn default_bins() -> usize {
    5
}
fn default_survival_t() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-4
}
fn default_z() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_jump_delta() -> f64 {
    1.0
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            horizon: default_horizon(),
            map_horizon: default_map_horizon(),
            theta: None,
            start: None,
            max_step: None,
            eta: None,
            phi: None,
            paths_written: default_paths_written(),
        }
    }
}

impl Default for TestsSection {
    fn default() -> Self {
        TestsSection {
            select: Vec::new(),
            significance: default_significance(),
            window: default_window(),
            alternative_alpha: default_alternative_alpha(),
            t: default_t(),
            delta: default_delta(),
            bins: default_bins(),
            survival_t: default_survival_t(),
            dt: default_dt(),
            z: default_z(),
            jump_delta: default_jump_delta(),
            variants: variant_names(),
        }
    }
}

fn t_needs_killed(select: &[TestKind]) -> bool {
    select.iter().any(|k| matches!(k, TestKind::Killing | TestKind::KillingPower | TestKind::Compensation))
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut String) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push_str(&format!("{key} = {other}\n")),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("malformed experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// On-disk form: one dotted `key = value` line per leaf.
    pub fn to_flat(&self) -> Result<String> {
        let table = toml::Table::try_from(self).context("serializing config")?;
        let mut out = String::new();
        flatten("", &table, &mut out);
        Ok(out)
    }

    pub fn params(&self) -> Result<Vec<StableParams>> {
        let m = &self.model;
        match (m.kind, &m.alpha, &m.rho) {
            (Model::SkorokhodBm, None, None) => Ok(Vec::new()),
            (Model::SkorokhodBm, _, _) => bail!("skorokhod-bm takes no stable parameters"),
            (_, Some(a), Some(r)) => {
                let a = a.expand(m.dim, "model.alpha")?;
                let r = r.expand(m.dim, "model.rho")?;
                a.iter().zip(&r).map(|(&a, &r)| Ok(StableParams::new(a, r)?)).collect()
            }
            _ => bail!("model {} needs model.alpha and model.rho", m.kind.as_str()),
        }
    }

    pub fn ssmp(&self) -> Result<SsmpConfig> {
        self.ssmp_as(self.model.kind)
    }

    /// The configured drivers under construction `model`.
    pub fn ssmp_as(&self, model: Model) -> Result<SsmpConfig> {
        let mut cfg = SsmpConfig::new(model, self.model.dim, self.params()?, self.sim.horizon)?;
        if let Some(s) = self.sim.max_step {
            cfg.scheme.max_step = s;
        }
        if let Some(e) = self.sim.eta {
            cfg.scheme.eta = e;
        }
        if let Some(p) = self.sim.phi {
            cfg.scheme.phi = p;
        }
        Ok(cfg)
    }

    pub fn theta(&self) -> Result<SimplexPoint> {
        match &self.sim.theta {
            Some(t) => Ok(SimplexPoint::new(t.clone())?),
            None => Ok(SimplexPoint::barycentre(self.model.dim)),
        }
    }

    pub fn start(&self) -> Result<Vec<f64>> {
        match &self.sim.start {
            Some(x) => Ok(x.clone()),
            None => Ok(self.theta()?.into_vec()),
        }
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        self.tests.variants.iter().map(|v| Ok(Variant::parse(v)?)).collect()
    }

    /// Rejects regimes the model cannot run and checks the selection against the model.
    pub fn validate(&self) -> Result<()> {
        let cfg = self.ssmp()?;
        let theta = self.theta()?;
        if theta.dim() != cfg.dim {
            bail!("sim.theta has {} entries for dimension {}", theta.dim(), cfg.dim);
        }
        let killed = self.model.kind == Model::Killed || t_needs_killed(&self.tests.select);
        if killed && !theta.is_interior() {
            bail!("killed model needs an interior starting angle");
        }
        let x0 = self.start()?;
        if x0.len() != cfg.dim || x0.iter().any(|&c| !(c >= 0.0 && c.is_finite())) || x0.iter().all(|&c| c == 0.0) {
            bail!("sim.start must be a nonzero point of [0,inf)^{}", cfg.dim);
        }
        if self.model.kind == Model::Killed && x0.contains(&0.0) {
            bail!("killed model needs a start point inside the open orthant");
        }
        if self.ensemble.n_paths == 0 {
            bail!("ensemble.n_paths must be positive");
        }
        let t = &self.tests;
        if !(t.significance > 0.0 && t.significance < 1.0) {
            bail!("tests.significance must lie in (0,1)");
        }
        for (name, v) in [("window", t.window), ("t", t.t), ("delta", t.delta), ("survival_t", t.survival_t), ("dt", t.dt), ("jump_delta", t.jump_delta)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tests.{name} must be positive");
            }
        }
        if !(self.sim.map_horizon > 0.0) {
            bail!("sim.map_horizon must be positive");
        }
        if t.bins == 0 {
            bail!("tests.bins must be positive");
        }
        self.variants()?;
        for k in &t.select {
            let Some(m) = k.model_for(cfg.model, cfg.dim) else {
                bail!("test {} does not apply to model {} in dimension {}", k.as_str(), cfg.model.as_str(), cfg.dim);
            };
            self.ssmp_as(m).with_context(|| format!("test {} runs on the {} construction", k.as_str(), m.as_str()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model.kind = \"killed\"\nmodel.dim = 2\nmodel.alpha = 1.0\nmodel.rho = 0.5\nensemble.n_paths = 10\nensemble.seed = 1\n";

    #[test]
    fn defaults_fill_sections() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.sim, SimSection::default());
        assert_eq!(c.tests, TestsSection::default());
        assert_eq!(c.params().unwrap().len(), 2);
    }

    #[test]
    fn flat_form_has_dotted_keys_only() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        let flat = c.to_flat().unwrap();
        assert!(flat.lines().all(|l| !l.starts_with('[') && l.contains('.') && l.contains(" = ")));
        assert_eq!(ExperimentConfig::parse(&flat).unwrap(), c);
    }

    #[test]
    fn per_coordinate_lists() {
        let text = MINIMAL.replace("model.rho = 0.5", "model.rho = [0.5, 0.4]");
        let p = ExperimentConfig::parse(&text).unwrap().params().unwrap();
        assert_eq!(p[1].rho(), 0.4);
        let bad = MINIMAL.replace("model.rho = 0.5", "model.rho = [0.5]");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn rejects_inapplicable_test() {
        let text = format!("{MINIMAL}tests.select = [\"sde\"]\n");
        let e = ExperimentConfig::parse(&text).unwrap_err();
        assert!(format!("{e:#}").contains("does not apply"));
    }

    #[test]
    fn corrective_needs_symmetric_drivers() {
        let ok = format!("{MINIMAL}tests.select = [\"corrective\", \"killing\"]\n");
        assert!(ExperimentConfig::parse(&ok).is_ok());
        let skew = ok.replace("model.rho = 0.5", "model.rho = 0.4");
        assert!(ExperimentConfig::parse(&skew).is_err());
    }

    #[test]
    fn rejects_unknown_key() {
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}sim.hrizon = 1.0\n")).is_err());
    }
}
