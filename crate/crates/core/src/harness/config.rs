use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::synthetic::{CtrSpec, SentimentSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Classify,
    Logreg,
    Separation,
    BoundsAudit,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Classify => "classify",
            Experiment::Logreg => "logreg",
            Experiment::Separation => "separation",
            Experiment::BoundsAudit => "bounds-audit",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classify" => Experiment::Classify,
            "logreg" => Experiment::Logreg,
            "separation" => Experiment::Separation,
            "bounds-audit" => Experiment::BoundsAudit,
            _ => return Err(Error::Usage(format!("unknown experiment `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Global,
    PerCoord,
    Pa,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Global => "global",
            Algorithm::PerCoord => "per-coord",
            Algorithm::Pa => "pa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "global" => Algorithm::Global,
            "per-coord" => Algorithm::PerCoord,
            "pa" => Algorithm::Pa,
            _ => {
                return Err(Error::Usage(format!(
                    "unknown algorithm `{s}` (expected global, per-coord or pa)"
                )))
            }
        })
    }
}

/// Where examples come from: a LIBSVM file, or a seeded generator named
/// `synthetic:ctr` / `synthetic:sentiment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    File(PathBuf),
    SyntheticCtr(CtrSpec),
    SyntheticSentiment(SentimentSpec),
}

impl DataSource {
    pub fn label(&self) -> String {
        match self {
            DataSource::File(p) => p.display().to_string(),
            DataSource::SyntheticCtr(_) => "synthetic:ctr".into(),
            DataSource::SyntheticSentiment(_) => "synthetic:sentiment".into(),
        }
    }
}

impl FromStr for DataSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "synthetic:ctr" => DataSource::SyntheticCtr(CtrSpec::default()),
            "synthetic:sentiment" => DataSource::SyntheticSentiment(SentimentSpec::default()),
            _ if s.starts_with("synthetic:") => {
                return Err(Error::Usage(format!("unknown generator `{s}`")))
            }
            _ => DataSource::File(PathBuf::from(s)),
        })
    }
}

/// Log-spaced grid of fixed rates searched by the separation experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for EtaGrid {
    fn default() -> Self {
        Self {
            min: 1e-4,
            max: 1.0,
            points: 50,
        }
    }
}

/// Everything a run depends on. Unset fields take per-experiment defaults in
/// [`RunConfig::resolve`]; the resolved values are echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub experiment: Experiment,
    pub dataset: Option<DataSource>,
    /// `None` takes the experiment's default list; an empty list is an error.
    pub algorithms: Option<Vec<Algorithm>>,
    /// Box radius `R`: the feasible set is `[-R, R]^n`.
    pub radius: Option<f64>,
    pub scale_per_coord: Option<f64>,
    pub scale_global: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub t0: Vec<usize>,
    pub eta_grid: EtaGrid,
    pub epsilon: f64,
    pub shuffle: bool,
    /// Fill the `wall_ms` column. Off by default so that repeated runs are
    /// byte-identical.
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            dataset: None,
            algorithms: None,
            radius: None,
            scale_per_coord: None,
            scale_global: None,
            lambda: None,
            seed: 7,
            t0: Vec::new(),
            eta_grid: EtaGrid::default(),
            epsilon: crate::adversarial::DEFAULT_EPSILON,
            shuffle: true,
            timing: false,
            out: None,
        }
    }

    /// Fill unset fields with the experiment's defaults:
    ///
    /// | experiment | R   | per-coord scale | global scale | lambda | algorithms          |
    /// |------------|-----|-----------------|--------------|--------|---------------------|
    /// | classify   | 100 | 0.6 / R         | 0.2 / R      | -      | global, per-coord, pa |
    /// | logreg     | 1   | 0.1             | 0.1          | 1e-4   | global, per-coord   |
    /// | separation | -   | 1               | -            | -      | global, per-coord   |
    pub fn resolve(mut self) -> Self {
        match self.experiment {
            Experiment::Classify => {
                let r = *self.radius.get_or_insert(100.0);
                self.scale_per_coord.get_or_insert(0.6 / r);
                self.scale_global.get_or_insert(0.2 / r);
                self.dataset.get_or_insert_with(|| {
                    DataSource::SyntheticSentiment(SentimentSpec::default())
                });
                self.algorithms
                    .get_or_insert_with(|| vec![Algorithm::Global, Algorithm::PerCoord, Algorithm::Pa]);
            }
            Experiment::Logreg => {
                self.radius.get_or_insert(1.0);
                self.scale_per_coord.get_or_insert(0.1);
                self.scale_global.get_or_insert(0.1);
                self.lambda.get_or_insert(1e-4);
                self.dataset
                    .get_or_insert_with(|| DataSource::SyntheticCtr(CtrSpec::default()));
                self.algorithms
                    .get_or_insert_with(|| vec![Algorithm::Global, Algorithm::PerCoord]);
            }
            Experiment::Separation => {
                self.scale_per_coord.get_or_insert(1.0);
                if self.t0.is_empty() {
                    self.t0 = vec![1_000, 10_648, 97_336];
                }
                self.algorithms
                    .get_or_insert_with(|| vec![Algorithm::Global, Algorithm::PerCoord]);
            }
            Experiment::BoundsAudit => {}
        }
        self
    }

    pub fn algorithm_list(&self) -> &[Algorithm] {
        self.algorithms.as_deref().unwrap_or(&[])
    }

    /// `(key, value)` pairs in the same syntax the config-file parser reads.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![("experiment".to_string(), self.experiment.as_str().to_string())];
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        if let Some(d) = &self.dataset {
            push("dataset", d.label());
            match d {
                DataSource::SyntheticCtr(spec) => push("generator", format!("{spec:?}")),
                DataSource::SyntheticSentiment(spec) => push("generator", format!("{spec:?}")),
                DataSource::File(_) => {}
            }
        }
        if let Some(algorithms) = &self.algorithms {
            push("algorithms", join(algorithms.iter().map(|a| a.as_str())));
        }
        let opt = |v: Option<f64>| v.map(|x| format!("{x}"));
        if let Some(v) = opt(self.radius) {
            push("radius", v);
        }
        if let Some(v) = opt(self.scale_per_coord) {
            push("scale-per-coord", v);
        }
        if let Some(v) = opt(self.scale_global) {
            push("scale-global", v);
        }
        if let Some(v) = opt(self.lambda) {
            push("lambda", v);
        }
        push("seed", self.seed.to_string());
        if self.experiment == Experiment::Separation {
            push("t0", join(self.t0.iter().map(|t| t.to_string())));
            push("eta-min", format!("{}", self.eta_grid.min));
            push("eta-max", format!("{}", self.eta_grid.max));
            push("eta-points", self.eta_grid.points.to_string());
            push("epsilon", format!("{}", self.epsilon));
        }
        if matches!(self.experiment, Experiment::Classify | Experiment::Logreg) {
            push("shuffle", self.shuffle.to_string());
        }
        push("timing", self.timing.to_string());
        if let Some(p) = &self.out {
            push("out", p.display().to_string());
        }
        out
    }

    /// Set one field from its kebab-case key, as used by both the config file
    /// and the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Usage(format!("{key}: `{value}` is not {what}"));
        let float = || value.parse::<f64>().map_err(|_| bad("a number"));
        let int = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
        let boolean = || value.parse::<bool>().map_err(|_| bad("true or false"));
        match key {
            "experiment" => self.experiment = value.parse()?,
            "dataset" => self.dataset = Some(value.parse()?),
            "algorithms" => {
                self.algorithms = Some(split_list(value).map(str::parse).collect::<Result<_>>()?)
            }
            "radius" => self.radius = Some(float()?),
            "scale-per-coord" => self.scale_per_coord = Some(float()?),
            "scale-global" => self.scale_global = Some(float()?),
            "lambda" => self.lambda = Some(float()?),
            "seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "t0" => {
                self.t0 = split_list(value)
                    .map(|s| s.parse().map_err(|_| bad("a list of integers")))
                    .collect::<Result<_>>()?
            }
            "eta-min" => self.eta_grid.min = float()?,
            "eta-max" => self.eta_grid.max = float()?,
            "eta-points" => self.eta_grid.points = int()?,
            "epsilon" => self.epsilon = float()?,
            "shuffle" => self.shuffle = boolean()?,
            "timing" => self.timing = boolean()?,
            "out" => self.out = Some(PathBuf::from(value)),
            // echoed for provenance only; generators are configured in code
            "generator" => {}
            _ => return Err(Error::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Apply a config file: one `key = value` per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim_start();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: format!("expected key = value, got `{raw}`"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: k + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let experiment = text
            .lines()
            .filter_map(|l| l.trim_start().strip_prefix("experiment"))
            .find_map(|rest| rest.trim_start().strip_prefix('='))
            .ok_or_else(|| Error::Usage("config does not name an experiment".into()))?;
        let mut cfg = RunConfig::new(experiment.trim().parse()?);
        cfg.apply_text(text)?;
        Ok(cfg)
    }
}

fn join<'a>(items: impl Iterator<Item = impl AsRef<str> + 'a>) -> String {
    items.map(|s| s.as_ref().to_string()).collect::<Vec<_>>().join(",")
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_defaults() {
        let cfg = RunConfig::new(Experiment::Classify).resolve();
        assert_eq!(cfg.radius, Some(100.0));
        assert_eq!(cfg.scale_per_coord, Some(0.006));
        assert_eq!(cfg.scale_global, Some(0.002));
        assert_eq!(cfg.algorithm_list().len(), 3);
    }

    #[test]
    fn logreg_defaults() {
        let cfg = RunConfig::new(Experiment::Logreg).resolve();
        assert_eq!(cfg.radius, Some(1.0));
        assert_eq!(cfg.scale_per_coord, Some(0.1));
        assert_eq!(cfg.scale_global, Some(0.1));
    }

    #[test]
    fn pairs_round_trip_through_text() {
        let mut cfg = RunConfig::new(Experiment::Separation);
        cfg.set("t0", "1000, 8000").unwrap();
        cfg.set("algorithms", "per-coord").unwrap();
        cfg.set("epsilon", "0.05").unwrap();
        let cfg = cfg.resolve();
        let text: String = cfg.to_pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(RunConfig::from_text(&text).unwrap(), cfg);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let err = RunConfig::from_text("experiment = logreg\n# c\nradius = abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = RunConfig::from_text("experiment = logreg\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(RunConfig::from_text("seed = 1\n").is_err());
    }

    #[test]
    fn unknown_algorithm_is_usage_error() {
        let mut cfg = RunConfig::new(Experiment::Classify);
        assert!(matches!(cfg.set("algorithms", "global,cw"), Err(Error::Usage(_))));
    }
}
