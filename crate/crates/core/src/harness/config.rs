use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::methods::MethodKind;
use crate::data::{gen_high_rank_noise, gen_parity, load_csv, CsvSchema, Dataset};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::probe::ProbeConfig;
use crate::stats::SelectionMetric;

pub const DEFAULT_SEEDS: [u64; 5] = [7, 42, 99, 1337, 2026];
pub const EXTENDED_SEEDS: [u64; 5] = [100, 200, 300, 400, 500];
/// Largest polynomial design matrix (rows × columns) a cell may build.
pub const DEFAULT_POLY_BUDGET: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Csv,
    Parity,
    HighRankNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub kind: DatasetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Seed for synthetic generators; the data stays fixed across run seeds.
    #[serde(default)]
    pub data_seed: u64,
}

impl DatasetSpec {
    fn blank(name: &str, kind: DatasetKind) -> Self {
        DatasetSpec {
            name: name.into(),
            kind,
            path: None,
            label: None,
            features: None,
            classes: None,
            n: None,
            d: None,
            k: None,
            data_seed: 0,
        }
    }

    pub fn csv(name: &str, path: impl Into<PathBuf>, label: &str) -> Self {
        DatasetSpec {
            path: Some(path.into()),
            label: Some(label.into()),
            ..Self::blank(name, DatasetKind::Csv)
        }
    }

    pub fn parity(n: usize, d: usize, k: usize) -> Self {
        DatasetSpec {
            n: Some(n),
            d: Some(d),
            k: Some(k),
            ..Self::blank("parity", DatasetKind::Parity)
        }
    }

    pub fn high_rank_noise(n: usize, d: usize) -> Self {
        DatasetSpec {
            n: Some(n),
            d: Some(d),
            ..Self::blank("high_rank_noise", DatasetKind::HighRankNoise)
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("dataset {:?}: {msg}", self.name)));
        if self.name.is_empty() || self.name.contains('/') {
            return bad("name must be nonempty and contain no '/'");
        }
        match self.kind {
            DatasetKind::Csv => {
                if self.path.is_none() || self.label.is_none() {
                    return bad("csv datasets need `path` and `label`");
                }
                if self.n.is_some() || self.d.is_some() || self.k.is_some() {
                    return bad("`n`, `d`, `k` apply only to synthetic datasets");
                }
            }
            DatasetKind::Parity | DatasetKind::HighRankNoise => {
                if self.path.is_some() || self.label.is_some() {
                    return bad("synthetic datasets take no `path` or `label`");
                }
                if self.kind == DatasetKind::HighRankNoise && self.k.is_some() {
                    return bad("`k` applies only to parity");
                }
            }
        }
        Ok(())
    }

    /// Loads or generates the dataset. Relative CSV paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Dataset> {
        self.check()?;
        match self.kind {
            DatasetKind::Csv => {
                let path = self.path.as_ref().expect("checked");
                let path = if path.is_relative() {
                    base.join(path)
                } else {
                    path.clone()
                };
                let schema = CsvSchema {
                    label: self.label.clone().expect("checked"),
                    features: self.features.clone(),
                    classes: self.classes.clone(),
                };
                load_csv(path, &self.name, &schema)
            }
            DatasetKind::Parity => {
                let mut s = RandomStream::derive(self.data_seed, &format!("{}/data", self.name));
                let ds = gen_parity(
                    self.n.unwrap_or(10_000),
                    self.d.unwrap_or(20),
                    self.k.unwrap_or(10),
                    &mut s,
                )?;
                Ok(ds.renamed(&self.name))
            }
            DatasetKind::HighRankNoise => {
                let mut s = RandomStream::derive(self.data_seed, &format!("{}/data", self.name));
                let ds = gen_high_rank_noise(self.n.unwrap_or(5_000), self.d.unwrap_or(200), &mut s)?;
                Ok(ds.renamed(&self.name))
            }
        }
    }
}

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_methods() -> Vec<MethodKind> {
    MethodKind::DEFAULT.to_vec()
}

fn default_poly_budget() -> usize {
    DEFAULT_POLY_BUDGET
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Benchmark matrix. `out_dir`, `jobs` and `base_dir` steer execution only
/// and are left out of the serialized echo so reports do not depend on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodKind>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Appends 100, 200, 300, 400, 500 to `seeds`.
    #[serde(default)]
    pub extended_seeds: bool,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default = "default_poly_budget")]
    pub poly_budget: usize,
    #[serde(default)]
    pub baseline_metric: SelectionMetric,
    #[serde(default = "default_out_dir", skip_serializing)]
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing)]
    pub jobs: Option<usize>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn new(datasets: Vec<DatasetSpec>, methods: Vec<MethodKind>) -> Self {
        RunConfig {
            datasets,
            methods,
            seeds: default_seeds(),
            extended_seeds: false,
            test_fraction: default_test_fraction(),
            probe: ProbeConfig::default(),
            poly_budget: DEFAULT_POLY_BUDGET,
            baseline_metric: SelectionMetric::default(),
            out_dir: default_out_dir(),
            jobs: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config; relative dataset paths and `out_dir` resolve against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.out_dir.is_relative() {
            cfg.out_dir = cfg.base_dir.join(&cfg.out_dir);
        }
        Ok(cfg)
    }

    /// Seeds actually run, including the extended set when enabled.
    pub fn effective_seeds(&self) -> Vec<u64> {
        let mut seeds = self.seeds.clone();
        if self.extended_seeds {
            seeds.extend(EXTENDED_SEEDS.iter().filter(|s| !self.seeds.contains(s)));
        }
        seeds
    }

    /// Keeps only the named datasets; unknown names are an error.
    pub fn restrict_datasets(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            if !self.datasets.iter().any(|d| &d.name == n) {
                return Err(Error::Config(format!("no dataset named {n:?} in config")));
            }
        }
        self.datasets.retain(|d| names.contains(&d.name));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("at least one dataset is required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::Config(format!("duplicate seed {dup}")));
        }
        let mut names = BTreeSet::new();
        for d in &self.datasets {
            if !names.insert(&d.name) {
                return Err(Error::Config(format!("duplicate dataset name {:?}", d.name)));
            }
            d.check()?;
        }
        let mut kinds = BTreeSet::new();
        if let Some(m) = self.methods.iter().find(|m| !kinds.insert(**m)) {
            return Err(Error::Config(format!("duplicate method {}", m.name())));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if !(self.probe.lambda >= 0.0) || self.probe.max_iter == 0 || !(self.probe.tol > 0.0) {
            return Err(Error::Config("probe needs lambda >= 0, max_iter >= 1, tol > 0".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [[dataset]]
            name = "p"
            kind = "parity"
            n = 100
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seeds, DEFAULT_SEEDS);
        assert_eq!(cfg.methods.len(), 7);
        assert_eq!(cfg.test_fraction, 0.2);
        assert_eq!(cfg.probe, ProbeConfig::default());
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "out_dir = \"../out\"\n[[dataset]]\nname = \"p\"\nkind = \"parity\"\n",
        )
        .unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.base_dir, dir.path());
        assert_eq!(cfg.out_dir, dir.path().join("../out"));
    }

    #[test]
    fn extended_seeds_append() {
        let mut cfg = RunConfig::new(vec![DatasetSpec::parity(50, 4, 2)], vec![MethodKind::Raw]);
        cfg.extended_seeds = true;
        assert_eq!(cfg.effective_seeds(), [7, 42, 99, 1337, 2026, 100, 200, 300, 400, 500]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = RunConfig::new(vec![DatasetSpec::parity(50, 4, 2)], vec![MethodKind::Raw]);
        cfg.seeds = vec![1, 2, 1];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.seeds = vec![1];
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
        cfg.methods = vec![MethodKind::Raw];
        cfg.datasets.clear();
        assert!(cfg.validate().is_err());
        assert!(RunConfig::from_toml_str("methods = [\"raw\"]\n[[dataset]]\nname=\"x\"\nkind=\"csv\"\n").is_err());
        assert!(RunConfig::from_toml_str("bogus = 1\n[[dataset]]\nname=\"x\"\nkind=\"parity\"\n").is_err());
    }

    #[test]
    fn echo_omits_execution_settings() {
        let mut cfg = RunConfig::new(vec![DatasetSpec::parity(50, 4, 2)], vec![MethodKind::Raw]);
        cfg.jobs = Some(3);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(!json.contains("jobs") && !json.contains("out_dir"));
    }
}
