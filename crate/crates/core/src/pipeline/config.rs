//! Experiment configuration (TOML).

use std::collections::BTreeSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::SyntheticModel;
use crate::netprops::BetweennessMode;
use crate::simplify::Method;

pub const DEFAULT_SIZES: [f64; 11] = [0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50];
pub const DEFAULT_RADII: [usize; 5] = [2, 3, 4, 5, 6];
pub const DEFAULT_REPETITIONS: usize = 10;
pub const DEFAULT_COMPARISON_SIZE: f64 = 0.1;
pub const DEFAULT_COMPARISON_RADIUS: usize = 2;
pub const DEFAULT_EXACT_LIMIT: usize = 20_000;
pub const DEFAULT_PIVOTS: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    #[serde(flatten)]
    pub model: SyntheticModel,
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    /// Edge-list file; exclusive with `synthetic`.
    pub path: Option<PathBuf>,
    pub synthetic: Option<SyntheticSource>,
    pub directed: bool,
    /// Free-form grouping tags used by the ANOVA summaries.
    pub type_tag: String,
    pub size_class: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetweennessSetting {
    /// Exact up to `exact_limit` nodes, `pivots` sources above.
    Auto {
        exact_limit: usize,
        pivots: usize,
    },
    Exact,
    Pivots(usize),
}

impl BetweennessSetting {
    pub fn mode_for(self, n: usize, seed: u64) -> BetweennessMode {
        match self {
            BetweennessSetting::Exact => BetweennessMode::Exact,
            BetweennessSetting::Auto { exact_limit, .. } if n <= exact_limit => BetweennessMode::Exact,
            BetweennessSetting::Auto { pivots: k, .. } | BetweennessSetting::Pivots(k) => {
                BetweennessMode::Pivots { k, seed }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub datasets: Vec<DatasetEntry>,
    pub methods: Vec<Method>,
    pub sizes: Vec<f64>,
    pub radii: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub betweenness: BetweennessSetting,
    pub comparison_size: f64,
    pub comparison_radius: usize,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// SHA-256 over the canonical JSON form; the output directory is not part of it.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Simplification tasks the grid will run.
    pub fn task_count(&self) -> usize {
        let per_network: usize = self
            .methods
            .iter()
            .map(|m| match m {
                Method::Cg => self.radii.len(),
                Method::Bp => 1,
                _ => self.sizes.len(),
            })
            .sum();
        self.datasets.len() * per_network * self.repetitions
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    datasets: Vec<RawDataset>,
    methods: Option<Vec<String>>,
    sizes: Option<Vec<f64>>,
    radii: Option<Vec<i64>>,
    repetitions: Option<i64>,
    master_seed: Option<u64>,
    betweenness: Option<String>,
    exact_limit: Option<i64>,
    pivots: Option<i64>,
    comparison_size: Option<f64>,
    comparison_radius: Option<i64>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: Option<String>,
    path: Option<PathBuf>,
    synthetic: Option<SyntheticSource>,
    #[serde(default)]
    directed: bool,
    #[serde(rename = "type")]
    type_tag: Option<String>,
    size_class: Option<String>,
}

const TOP_KEYS: [&str; 12] = [
    "datasets",
    "methods",
    "sizes",
    "radii",
    "repetitions",
    "master_seed",
    "betweenness",
    "exact_limit",
    "pivots",
    "comparison_size",
    "comparison_radius",
    "output_dir",
];
const DATASET_KEYS: [&str; 6] = ["name", "path", "synthetic", "directed", "type", "size_class"];

/// Reads, defaults and validates a config file. Relative dataset paths are
/// resolved against the file's directory.
pub fn validate_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Like [`validate_config`] for config text already in memory.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_owned()]))?;
    // unknown keys are reported and dropped so that value checks still run
    let mut errors = Vec::new();
    table.retain(|key, _| {
        let known = TOP_KEYS.contains(&key);
        if !known {
            errors.push(format!("unknown key `{key}`"));
        }
        known
    });
    if let Some(toml::Value::Array(entries)) = table.get_mut("datasets") {
        for (i, entry) in entries.iter_mut().enumerate() {
            if let toml::Value::Table(t) = entry {
                t.retain(|key, _| {
                    let known = DATASET_KEYS.contains(&key);
                    if !known {
                        errors.push(format!("datasets[{i}]: unknown key `{key}`"));
                    }
                    known
                });
            }
        }
    }
    let raw: RawConfig = match table.try_into() {
        Ok(raw) => raw,
        Err(e) => {
            errors.push(e.message().to_owned());
            return Err(Error::Config(errors));
        }
    };

    let methods = match raw.methods {
        None => Method::ALL.to_vec(),
        Some(names) => {
            names.iter().filter_map(|n| n.parse::<Method>().map_err(|e| errors.push(e.to_string())).ok()).collect()
        }
    };
    if methods.is_empty() {
        errors.push("methods must not be empty".into());
    }
    if methods.iter().collect::<BTreeSet<_>>().len() != methods.len() {
        errors.push("methods contain duplicates".into());
    }

    let sizes = raw.sizes.unwrap_or_else(|| DEFAULT_SIZES.to_vec());
    if sizes.is_empty() {
        errors.push("sizes must not be empty".into());
    }
    for s in &sizes {
        if !(*s > 0.0 && *s <= 1.0) {
            errors.push(format!("size {s} outside (0, 1]"));
        }
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        errors.push("sizes must be strictly increasing".into());
    }

    let radii: Vec<usize> = match raw.radii {
        None => DEFAULT_RADII.to_vec(),
        Some(r) => r
            .into_iter()
            .filter_map(|c| {
                if c < 1 {
                    errors.push(format!("radius {c} must be >= 1"));
                    None
                } else {
                    Some(c as usize)
                }
            })
            .collect(),
    };
    if radii.is_empty() {
        errors.push("radii must not be empty".into());
    }
    if radii.iter().collect::<BTreeSet<_>>().len() != radii.len() {
        errors.push("radii contain duplicates".into());
    }

    let repetitions = raw.repetitions.unwrap_or(DEFAULT_REPETITIONS as i64);
    if repetitions < 1 {
        errors.push(format!("repetitions must be >= 1, got {repetitions}"));
    }

    let positive = |name: &str, v: Option<i64>, default: usize, errors: &mut Vec<String>| -> usize {
        match v {
            None => default,
            Some(v) if v >= 1 => v as usize,
            Some(v) => {
                errors.push(format!("{name} must be >= 1, got {v}"));
                default
            }
        }
    };
    let exact_limit = positive("exact_limit", raw.exact_limit, DEFAULT_EXACT_LIMIT, &mut errors);
    let pivots = positive("pivots", raw.pivots, DEFAULT_PIVOTS, &mut errors);
    let betweenness = match raw.betweenness.as_deref().unwrap_or("auto") {
        "auto" => BetweennessSetting::Auto { exact_limit, pivots },
        "exact" => BetweennessSetting::Exact,
        "pivots" => BetweennessSetting::Pivots(pivots),
        other => {
            errors.push(format!("betweenness must be auto, exact or pivots, got {other:?}"));
            BetweennessSetting::Exact
        }
    };

    let comparison_size = raw.comparison_size.unwrap_or(DEFAULT_COMPARISON_SIZE);
    if !(comparison_size > 0.0 && comparison_size <= 1.0) {
        errors.push(format!("comparison_size {comparison_size} outside (0, 1]"));
    }
    let comparison_radius =
        positive("comparison_radius", raw.comparison_radius, DEFAULT_COMPARISON_RADIUS, &mut errors);

    if raw.datasets.is_empty() {
        errors.push("at least one dataset is required".into());
    }
    let mut names = BTreeSet::new();
    let mut datasets = Vec::new();
    for (i, d) in raw.datasets.into_iter().enumerate() {
        let name = d.name.unwrap_or_default();
        if name.is_empty() {
            errors.push(format!("datasets[{i}]: missing name"));
        } else if !names.insert(name.clone()) {
            errors.push(format!("datasets[{i}]: duplicate name {name:?}"));
        }
        let path = d.path.map(|p| if p.is_absolute() { p } else { base_dir.join(p) });
        match (&path, &d.synthetic) {
            (Some(p), None) => {
                if let Err(e) = File::open(p) {
                    errors.push(format!("datasets[{i}]: cannot read {}: {e}", p.display()));
                }
            }
            (None, Some(s)) => {
                if let Err(e) = s.model.validate(s.n) {
                    errors.push(format!("datasets[{i}]: {e}"));
                }
            }
            _ => errors.push(format!("datasets[{i}]: exactly one of `path` and `synthetic` is required")),
        }
        datasets.push(DatasetEntry {
            name,
            path,
            synthetic: d.synthetic,
            directed: d.directed,
            type_tag: d.type_tag.unwrap_or_default(),
            size_class: d.size_class.unwrap_or_default(),
        });
    }

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(RunConfig {
        datasets,
        methods,
        sizes,
        radii,
        repetitions: repetitions as usize,
        master_seed: raw.master_seed.unwrap_or(0),
        betweenness,
        comparison_size,
        comparison_radius,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
    })
}
