//! Experiment orchestration over the (network x method x size x repetition) grid.
//!
//! Stage one ranks the sizes of every (network, method) pair and picks the
//! best size; stage two ranks the methods at one comparison size.

mod config;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    parse_config, validate_config, BetweennessSetting, DatasetEntry, RunConfig, SyntheticSource,
    DEFAULT_COMPARISON_RADIUS, DEFAULT_COMPARISON_SIZE, DEFAULT_RADII, DEFAULT_REPETITIONS, DEFAULT_SIZES,
};
pub use report::{emit_reports, load_store, ReportFormat};

use crate::assess::{best_size, verdict_by, Assessment, BestSize, Orientation, Verdict};
use crate::error::{Error, Result};
use crate::graph::{generate_synthetic, load_edge_list_file, Graph};
use crate::netprops::{full_report, BetweennessMode, GlobalProperty, LocalProperty, PropertyReport};
use crate::similarity::{
    average_over_repetitions, correlate_globals, ks_d, one_way_anova, AnovaResult, GlobalCorrelation,
    RepetitionOutcome, SimilarityRecord,
};
use crate::simplify::{simplify, Method, SimplifyFlag, SizeParameter};

/// Seed of one grid task: the first 8 bytes of SHA-256 over the task coordinates.
pub fn task_seed(master_seed: u64, network: &str, method: Method, size: SizeParameter, repetition: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(network.as_bytes());
    h.update([0]);
    h.update(method.as_str().as_bytes());
    h.update([0]);
    h.update(size.to_string().as_bytes());
    h.update([0]);
    h.update((repetition as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn same_size(a: SizeParameter, b: SizeParameter) -> bool {
    match (a, b) {
        (SizeParameter::Fraction(x), SizeParameter::Fraction(y)) => (x - y).abs() < 1e-9,
        (a, b) => a == b,
    }
}

/// Size grid of one method, ordered by increasing simplified network size
/// (CG radii therefore descend).
pub fn size_grid(config: &RunConfig, method: Method) -> Vec<SizeParameter> {
    match method {
        Method::Cg => {
            let mut radii = config.radii.clone();
            radii.sort_unstable_by(|a, b| b.cmp(a));
            radii.into_iter().map(SizeParameter::Radius).collect()
        }
        Method::Bp => vec![SizeParameter::Unset],
        _ => config.sizes.iter().map(|&s| SizeParameter::Fraction(s)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginalRecord {
    pub name: String,
    pub type_tag: String,
    pub size_class: String,
    pub directed: bool,
    pub nodes: usize,
    pub links: usize,
    pub lwcc_fraction: f64,
    pub betweenness: BetweennessMode,
    pub globals: BTreeMap<GlobalProperty, Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "error", rename_all = "snake_case")]
pub enum TaskStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub network: String,
    pub method: Method,
    pub size: SizeParameter,
    pub repetition: usize,
    pub seed: u64,
    pub status: TaskStatus,
    pub nodes: usize,
    pub links: usize,
    pub achieved_fraction: f64,
    pub lwcc_fraction: f64,
    pub d: BTreeMap<LocalProperty, f64>,
    pub globals: BTreeMap<GlobalProperty, Option<f64>>,
    pub flags: Vec<SimplifyFlag>,
}

impl TaskRecord {
    fn outcome(&self) -> RepetitionOutcome<f64> {
        RepetitionOutcome {
            d: self.d.clone(),
            globals: self.globals.clone(),
            lwcc_fraction: self.lwcc_fraction,
            achieved_fraction: self.achieved_fraction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub planned_tasks: usize,
    pub completed_tasks: usize,
    pub failed_tasks: usize,
}

/// `A` over the sizes of one method, for one network (local properties) or
/// pooled over all networks (global properties).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeAssessment {
    /// `None` for the pooled global-property assessment.
    pub network: Option<String>,
    pub method: Method,
    pub sizes: Vec<SizeParameter>,
    pub assessment: Assessment<f64>,
    pub best: BestSize<SizeParameter, f64>,
}

/// One-way ANOVA of best sizes grouped by a dataset tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeDependence {
    pub method: Method,
    pub grouping: String,
    pub groups: BTreeMap<String, Vec<f64>>,
    pub result: Option<AnovaResult<f64>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeStage {
    pub local: Vec<SizeAssessment>,
    pub global: Vec<SizeAssessment>,
    pub dependence: Vec<SizeDependence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkComparison {
    pub network: String,
    pub assessment: Assessment<f64>,
    pub verdict: Verdict<Method, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyComparison {
    pub property: String,
    /// `"a"` for local properties (lower is better), `"rho"` for global ones.
    pub score: String,
    pub verdict: Verdict<Method, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStage {
    pub size: f64,
    pub radius: usize,
    pub per_network: Vec<NetworkComparison>,
    pub per_property: Vec<PropertyComparison>,
}

/// Everything one run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultStore {
    pub manifest: Manifest,
    pub config: RunConfig,
    pub originals: Vec<OriginalRecord>,
    pub tasks: Vec<TaskRecord>,
    pub similarity: Vec<SimilarityRecord<f64>>,
    pub correlations: Vec<GlobalCorrelation<f64>>,
    pub size_stage: SizeStage,
    pub comparison: std::result::Result<ComparisonStage, String>,
}

impl ResultStore {
    pub fn failed_tasks(&self) -> usize {
        self.manifest.failed_tasks
    }

    fn record(&self, network: &str, method: Method, size: SizeParameter) -> Option<&SimilarityRecord<f64>> {
        self.similarity.iter().find(|r| r.network == network && r.method == method && same_size(r.size, size))
    }

    fn correlation(&self, method: Method, size: SizeParameter) -> Option<&GlobalCorrelation<f64>> {
        self.correlations.iter().find(|c| c.method == method && same_size(c.size, size))
    }
}

fn load_dataset(entry: &DatasetEntry) -> Result<Graph> {
    match (&entry.path, &entry.synthetic) {
        (Some(path), _) => load_edge_list_file(path, entry.directed),
        (None, Some(s)) => generate_synthetic(s.model, s.n, s.seed),
        (None, None) => Err(Error::InvalidParameter(format!("dataset {} has no source", entry.name))),
    }
}

struct Network {
    entry: DatasetEntry,
    graph: Graph,
    report: PropertyReport<f64>,
    record: OriginalRecord,
}

struct TaskSpec<'a> {
    network: &'a Network,
    method: Method,
    size: SizeParameter,
    repetition: usize,
    seed: u64,
}

fn run_task(spec: &TaskSpec<'_>, setting: BetweennessSetting) -> TaskRecord {
    let mut record = TaskRecord {
        network: spec.network.entry.name.clone(),
        method: spec.method,
        size: spec.size,
        repetition: spec.repetition,
        seed: spec.seed,
        status: TaskStatus::Ok,
        nodes: 0,
        links: 0,
        achieved_fraction: 0.0,
        lwcc_fraction: 0.0,
        d: BTreeMap::new(),
        globals: BTreeMap::new(),
        flags: Vec::new(),
    };
    let original = &spec.network.report;
    let outcome = simplify(&spec.network.graph, spec.method, spec.size, spec.seed).and_then(|net| {
        let g = &net.graph;
        let report = full_report::<f64>(g, setting.mode_for(g.node_count(), spec.seed));
        let mut d = BTreeMap::new();
        for p in original.local_properties() {
            if let (Some(a), Some(b)) = (original.local(p), report.local(p)) {
                d.insert(p, ks_d(a, b)?);
            }
        }
        Ok((net, report, d))
    });
    match outcome {
        Ok((net, report, d)) => {
            record.nodes = net.graph.node_count();
            record.links = report.link_count;
            record.achieved_fraction = net.achieved_fraction(spec.network.record.nodes);
            record.lwcc_fraction = net.graph.components().lwcc_fraction;
            record.d = d;
            record.globals = report.globals();
            record.flags = net.flags;
        }
        Err(e) => record.status = TaskStatus::Failed(e.to_string()),
    }
    record
}

/// Runs the whole grid and both analysis stages.
///
/// Dataset loading failures abort the run; a failing simplification task is
/// recorded as failed and the run continues.
pub fn run_experiment(config: &RunConfig) -> Result<ResultStore> {
    let networks: Vec<Network> = config
        .datasets
        .iter()
        .map(|entry| {
            let graph = load_dataset(entry)?;
            let n = graph.simple_view().node_count();
            let mode = config
                .betweenness
                .mode_for(n, task_seed(config.master_seed, &entry.name, Method::Rn, SizeParameter::Unset, 0));
            let report = full_report::<f64>(&graph, mode);
            let record = OriginalRecord {
                name: entry.name.clone(),
                type_tag: entry.type_tag.clone(),
                size_class: entry.size_class.clone(),
                directed: entry.directed,
                nodes: report.node_count,
                links: report.link_count,
                lwcc_fraction: graph.components().lwcc_fraction,
                betweenness: mode,
                globals: report.globals(),
            };
            Ok(Network { entry: entry.clone(), graph, report, record })
        })
        .collect::<Result<_>>()?;

    let mut specs = Vec::with_capacity(config.task_count());
    for network in &networks {
        for &method in &config.methods {
            for size in size_grid(config, method) {
                for repetition in 0..config.repetitions {
                    let seed = task_seed(config.master_seed, &network.entry.name, method, size, repetition);
                    specs.push(TaskSpec { network, method, size, repetition, seed });
                }
            }
        }
    }
    let tasks: Vec<TaskRecord> = specs.par_iter().map(|s| run_task(s, config.betweenness)).collect();

    let mut similarity = Vec::new();
    let mut start = 0;
    while start < tasks.len() {
        let head = &tasks[start];
        let end = start
            + tasks[start..]
                .iter()
                .take_while(|t| t.network == head.network && t.method == head.method && t.size == head.size)
                .count();
        let reps: Vec<RepetitionOutcome<f64>> =
            tasks[start..end].iter().filter(|t| t.status == TaskStatus::Ok).map(TaskRecord::outcome).collect();
        if !reps.is_empty() {
            let original = &networks.iter().find(|n| n.entry.name == head.network).expect("network").record.globals;
            similarity.push(average_over_repetitions(&head.network, head.method, head.size, original, &reps)?);
        }
        start = end;
    }

    let mut correlations = Vec::new();
    for &method in &config.methods {
        for size in size_grid(config, method) {
            let records: Vec<&SimilarityRecord<f64>> =
                similarity.iter().filter(|r| r.method == method && same_size(r.size, size)).collect();
            correlations.push(correlate_globals(method, size, &records));
        }
    }

    let failed = tasks.iter().filter(|t| t.status != TaskStatus::Ok).count();
    let mut store = ResultStore {
        manifest: Manifest {
            tool: "netsimp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash(),
            master_seed: config.master_seed,
            planned_tasks: config.task_count(),
            completed_tasks: tasks.len() - failed,
            failed_tasks: failed,
        },
        config: config.clone(),
        originals: networks.into_iter().map(|n| n.record).collect(),
        tasks,
        similarity,
        correlations,
        size_stage: SizeStage::default(),
        comparison: Err("not run".into()),
    };
    store.size_stage = size_stage(&store);
    store.comparison =
        comparison_stage(&store, config.comparison_size, config.comparison_radius).map_err(|e| e.to_string());
    Ok(store)
}

fn labels<I: IntoIterator<Item = T>, T: ToString>(items: I) -> Vec<String> {
    items.into_iter().map(|x| x.to_string()).collect()
}

/// Stage one: `A` over sizes and the best size, per (network, method) from
/// local-property D values and per method from pooled global-property rho.
pub fn size_stage(store: &ResultStore) -> SizeStage {
    let config = &store.config;
    let mut stage = SizeStage::default();
    for &method in &config.methods {
        let grid = size_grid(config, method);
        if grid.len() < 2 {
            continue;
        }
        for original in &store.originals {
            let present: Vec<(SizeParameter, &SimilarityRecord<f64>)> =
                grid.iter().filter_map(|&s| store.record(&original.name, method, s).map(|r| (s, r))).collect();
            if present.len() < 2 {
                continue;
            }
            let props: Vec<LocalProperty> = LocalProperty::ALL
                .into_iter()
                .filter(|p| present.iter().any(|(_, r)| r.mean_d.contains_key(p)))
                .collect();
            let scores: Vec<Vec<Option<f64>>> =
                present.iter().map(|(_, r)| props.iter().map(|p| r.mean_d.get(p).copied()).collect()).collect();
            let sizes: Vec<SizeParameter> = present.iter().map(|&(s, _)| s).collect();
            if let Some(sa) = assess_sizes(
                Some(original.name.clone()),
                method,
                sizes,
                labels(props),
                &scores,
                Orientation::LowerIsBetter,
            ) {
                stage.local.push(sa);
            }
        }
        let present: Vec<(SizeParameter, &GlobalCorrelation<f64>)> =
            grid.iter().filter_map(|&s| store.correlation(method, s).map(|c| (s, c))).collect();
        if present.len() >= 2 {
            let scores: Vec<Vec<Option<f64>>> =
                present.iter().map(|(_, c)| GlobalProperty::ALL.iter().map(|p| c.rho[p]).collect()).collect();
            let sizes = present.iter().map(|&(s, _)| s).collect();
            if let Some(sa) =
                assess_sizes(None, method, sizes, labels(GlobalProperty::ALL), &scores, Orientation::HigherIsBetter)
            {
                stage.global.push(sa);
            }
        }
        for grouping in ["type", "size_class"] {
            stage.dependence.push(size_dependence(store, &stage.local, method, grouping));
        }
    }
    stage
}

fn assess_sizes(
    network: Option<String>,
    method: Method,
    sizes: Vec<SizeParameter>,
    properties: Vec<String>,
    scores: &[Vec<Option<f64>>],
    orientation: Orientation,
) -> Option<SizeAssessment> {
    let orient = vec![orientation; properties.len()];
    let assessment = Assessment::new(labels(sizes.iter()), properties, scores, &orient).ok()?;
    let points: Vec<(SizeParameter, f64)> = sizes.iter().copied().zip(assessment.a.iter().copied()).collect();
    let best = best_size(&points).ok()?;
    Some(SizeAssessment { network, method, sizes, assessment, best })
}

fn size_value(s: SizeParameter) -> f64 {
    match s {
        SizeParameter::Fraction(f) => f,
        SizeParameter::Radius(c) => c as f64,
        SizeParameter::Unset => f64::NAN,
    }
}

fn size_dependence(store: &ResultStore, local: &[SizeAssessment], method: Method, grouping: &str) -> SizeDependence {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for sa in local.iter().filter(|sa| sa.method == method) {
        let Some(orig) = store.originals.iter().find(|o| Some(&o.name) == sa.network.as_ref()) else { continue };
        let tag = if grouping == "type" { &orig.type_tag } else { &orig.size_class };
        groups.entry(tag.clone()).or_default().push(size_value(sa.best.size));
    }
    let values: Vec<Vec<f64>> = groups.values().cloned().collect();
    let (result, note) = match one_way_anova(&values) {
        // non-finite F has no JSON form
        Ok(r) if !r.f.is_finite() => (None, Some(format!("no within-group variance, F infinite, p = {}", r.p))),
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SizeDependence { method, grouping: grouping.to_owned(), groups, result, note }
}

/// Stage two: methods compared at fraction `size` (sampling), radius `radius`
/// (CG) and BP's only setting.
pub fn comparison_stage(store: &ResultStore, size: f64, radius: usize) -> Result<ComparisonStage> {
    let at = |m: Method| match m {
        Method::Cg => SizeParameter::Radius(radius),
        Method::Bp => SizeParameter::Unset,
        _ => SizeParameter::Fraction(size),
    };
    let methods = &store.config.methods;
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods to compare".into()));
    }
    for &m in methods {
        let size = at(m);
        if store.correlation(m, size).is_none()
            && !store.similarity.iter().any(|r| r.method == m && same_size(r.size, size))
        {
            return Err(Error::MissingRecord { method: m.to_string(), size: size.to_string() });
        }
    }
    let mut per_network = Vec::new();
    for original in &store.originals {
        let mut records = Vec::new();
        for &m in methods {
            let r = store.record(&original.name, m, at(m)).ok_or_else(|| Error::MissingRecord {
                method: m.to_string(),
                size: format!("{} on {}", at(m), original.name),
            })?;
            records.push(r);
        }
        let props: Vec<LocalProperty> =
            LocalProperty::ALL.into_iter().filter(|p| records.iter().any(|r| r.mean_d.contains_key(p))).collect();
        let scores: Vec<Vec<Option<f64>>> =
            records.iter().map(|r| props.iter().map(|p| r.mean_d.get(p).copied()).collect()).collect();
        let orient = vec![Orientation::LowerIsBetter; props.len()];
        let Ok(assessment) = Assessment::new(labels(methods.iter()), labels(props), &scores, &orient) else { continue };
        let a: Vec<(Method, f64)> = methods.iter().copied().zip(assessment.a.iter().copied()).collect();
        let verdict = verdict_by(&a, Orientation::LowerIsBetter)?;
        per_network.push(NetworkComparison { network: original.name.clone(), assessment, verdict });
    }

    let mut per_property = Vec::new();
    for p in LocalProperty::ALL {
        // methods ranked across networks, one column per network
        let scores: Vec<Vec<Option<f64>>> = methods
            .iter()
            .map(|&m| {
                store
                    .originals
                    .iter()
                    .map(|o| store.record(&o.name, m, at(m)).and_then(|r| r.mean_d.get(&p).copied()))
                    .collect()
            })
            .collect();
        let orient = vec![Orientation::LowerIsBetter; store.originals.len()];
        let Ok(assessment) =
            Assessment::new(labels(methods.iter()), labels(store.originals.iter().map(|o| &o.name)), &scores, &orient)
        else {
            continue;
        };
        let a: Vec<(Method, f64)> = methods.iter().copied().zip(assessment.a.iter().copied()).collect();
        per_property.push(PropertyComparison {
            property: p.to_string(),
            score: "a".into(),
            verdict: verdict_by(&a, Orientation::LowerIsBetter)?,
        });
    }
    for p in GlobalProperty::ALL {
        let rho: Vec<(Method, f64)> = methods
            .iter()
            .filter_map(|&m| store.correlation(m, at(m)).and_then(|c| c.rho[&p]).map(|r| (m, r)))
            .collect();
        if rho.is_empty() {
            continue;
        }
        per_property.push(PropertyComparison {
            property: p.to_string(),
            score: "rho".into(),
            verdict: verdict_by(&rho, Orientation::HigherIsBetter)?,
        });
    }
    Ok(ComparisonStage { size, radius, per_network, per_property })
}
