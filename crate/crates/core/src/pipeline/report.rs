//! Writing and reading result directories.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{size_grid, ResultStore, SizeAssessment, TaskStatus};
use crate::error::Result;
use crate::netprops::GlobalProperty;
use crate::similarity::write_similarity_csv;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn csv_file(path: &Path, header: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    Ok(w)
}

/// Writes `manifest.json`, `store.json` and `assessments.json`; the CSV
/// format adds the tables and the `plotdata/` series. Row order follows the
/// store, so equal stores give identical bytes.
pub fn emit_reports(store: &ResultStore, dir: &Path, format: ReportFormat) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("manifest.json"), &store.manifest)?;
    write_json(&dir.join("store.json"), store)?;
    write_json(
        &dir.join("assessments.json"),
        &serde_json::json!({ "size_stage": store.size_stage, "comparison": store.comparison }),
    )?;
    match format {
        ReportFormat::Json => Ok(()),
        ReportFormat::Csv => {
            write_tables(store, dir)?;
            let plot = dir.join("plotdata");
            fs::create_dir_all(&plot)?;
            write_plotdata(store, &plot)
        }
    }
}

/// Reads back `store.json` from a result directory.
pub fn load_store(dir: &Path) -> Result<ResultStore> {
    let file = File::open(dir.join("store.json"))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

fn write_tables(store: &ResultStore, dir: &Path) -> Result<()> {
    let mut w = csv_file(
        &dir.join("networks.csv"),
        &[
            "network",
            "type",
            "size_class",
            "directed",
            "nodes",
            "links",
            "lwcc_fraction",
            "density",
            "degree_mixing",
            "transitivity",
        ],
    )?;
    for o in &store.originals {
        let g = |p| opt(o.globals.get(&p).copied().flatten());
        w.write_record([
            o.name.clone(),
            o.type_tag.clone(),
            o.size_class.clone(),
            o.directed.to_string(),
            o.nodes.to_string(),
            o.links.to_string(),
            o.lwcc_fraction.to_string(),
            g(GlobalProperty::Density),
            g(GlobalProperty::DegreeMixing),
            g(GlobalProperty::Transitivity),
        ])?;
    }
    w.flush()?;

    let mut w = csv_file(
        &dir.join("tasks.csv"),
        &[
            "network",
            "method",
            "size",
            "rep",
            "seed",
            "status",
            "nodes",
            "links",
            "achieved_fraction",
            "lwcc_fraction",
            "flags",
            "error",
        ],
    )?;
    for t in &store.tasks {
        let (status, error) = match &t.status {
            TaskStatus::Ok => ("ok", String::new()),
            TaskStatus::Failed(e) => ("failed", e.clone()),
        };
        let flags: Vec<String> = t.flags.iter().map(|f| serde_json::to_string(f).expect("flag serializes")).collect();
        w.write_record([
            t.network.clone(),
            t.method.to_string(),
            t.size.to_string(),
            t.repetition.to_string(),
            t.seed.to_string(),
            status.to_owned(),
            t.nodes.to_string(),
            t.links.to_string(),
            t.achieved_fraction.to_string(),
            t.lwcc_fraction.to_string(),
            flags.join(";"),
            error,
        ])?;
    }
    w.flush()?;

    write_similarity_csv(&store.similarity, create(&dir.join("similarity.csv"))?)?;

    let mut w = csv_file(&dir.join("correlations.csv"), &["method", "size", "property", "rho", "pairs"])?;
    for c in &store.correlations {
        for (p, rho) in &c.rho {
            w.write_record([
                c.method.to_string(),
                c.size.to_string(),
                p.to_string(),
                opt(*rho),
                c.pairs[p].to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv_file(
        &dir.join("best_sizes.csv"),
        &["scope", "network", "method", "best_size", "a", "global_minimum", "global_minimum_a", "no_local_minimum"],
    )?;
    let stage = &store.size_stage;
    for (scope, list) in [("local", &stage.local), ("global", &stage.global)] {
        for sa in list {
            w.write_record([
                scope.to_owned(),
                sa.network.clone().unwrap_or_default(),
                sa.method.to_string(),
                sa.best.size.to_string(),
                sa.best.a.to_string(),
                sa.best.global_minimum.to_string(),
                sa.best.global_minimum_a.to_string(),
                sa.best.no_local_minimum.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv_file(
        &dir.join("size_anova.csv"),
        &["method", "grouping", "groups", "f", "p", "df_between", "df_within", "note"],
    )?;
    for d in &stage.dependence {
        let groups: Vec<String> = d.groups.iter().map(|(k, v)| format!("{k}:{}", v.len())).collect();
        let r = d.result.as_ref();
        w.write_record([
            d.method.to_string(),
            d.grouping.clone(),
            groups.join(";"),
            opt(r.map(|r| r.f)),
            opt(r.map(|r| r.p)),
            r.map_or_else(String::new, |r| r.df_between.to_string()),
            r.map_or_else(String::new, |r| r.df_within.to_string()),
            d.note.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let mut w =
        csv_file(&dir.join("verdicts.csv"), &["scope", "subject", "score", "position", "method", "value", "slot"])?;
    if let Ok(cmp) = &store.comparison {
        let rows =
            cmp.per_network.iter().map(|n| ("network", n.network.as_str(), "a", &n.verdict)).chain(
                cmp.per_property.iter().map(|p| ("property", p.property.as_str(), p.score.as_str(), &p.verdict)),
            );
        for (scope, subject, score, verdict) in rows {
            for (i, (m, v)) in verdict.ordered.iter().enumerate() {
                let slot = if verdict.best.candidates.contains(m) {
                    "best"
                } else if verdict.second.as_ref().is_some_and(|s| s.candidates.contains(m)) {
                    "second"
                } else if verdict.worst.as_ref().is_some_and(|s| s.candidates.contains(m)) {
                    "worst"
                } else {
                    ""
                };
                w.write_record([scope, subject, score, &(i + 1).to_string(), m.as_str(), &v.to_string(), slot])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn a_at(sa: &SizeAssessment, size: &super::SizeParameter) -> Option<f64> {
    sa.sizes.iter().position(|s| s == size).map(|i| sa.assessment.a[i])
}

fn write_plotdata(store: &ResultStore, dir: &Path) -> Result<()> {
    let stage = &store.size_stage;
    let mut mean = csv_file(&dir.join("mean_local_a.csv"), &["method", "size", "mean_a", "networks"])?;
    let mut global = csv_file(&dir.join("global_a.csv"), &["method", "size", "a"])?;
    let mut freq = csv_file(&dir.join("best_size_frequency.csv"), &["method", "size", "count"])?;
    for &m in &store.config.methods {
        for size in size_grid(&store.config, m) {
            let values: Vec<f64> =
                stage.local.iter().filter(|sa| sa.method == m).filter_map(|sa| a_at(sa, &size)).collect();
            if !values.is_empty() {
                let avg = values.iter().sum::<f64>() / values.len() as f64;
                mean.write_record([m.to_string(), size.to_string(), avg.to_string(), values.len().to_string()])?;
            }
            if let Some(a) = stage.global.iter().find(|sa| sa.method == m).and_then(|sa| a_at(sa, &size)) {
                global.write_record([m.to_string(), size.to_string(), a.to_string()])?;
            }
            let count = stage.local.iter().filter(|sa| sa.method == m && sa.best.size == size).count();
            if stage.local.iter().any(|sa| sa.method == m) {
                freq.write_record([m.to_string(), size.to_string(), count.to_string()])?;
            }
        }
    }
    mean.flush()?;
    global.flush()?;
    freq.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{parse_config, run_experiment};

    fn store() -> ResultStore {
        let text = r#"
methods = ["RN", "BF", "CG"]
sizes = [0.1, 0.3]
radii = [2, 3]
repetitions = 2
[[datasets]]
name = "ba"
synthetic = { model = "preferential-attachment", k = 2, n = 80, seed = 3 }
[[datasets]]
name = "er"
synthetic = { model = "uniform-random", p = 0.08, n = 80, seed = 4 }
[[datasets]]
name = "er2"
synthetic = { model = "uniform-random", p = 0.04, n = 90, seed = 5 }
"#;
        run_experiment(&parse_config(text, Path::new(".")).unwrap()).unwrap()
    }

    fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        for sub in ["", "plotdata"] {
            let mut names: Vec<_> =
                fs::read_dir(dir.join(sub)).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_file()).collect();
            names.sort();
            files.extend(names.into_iter().map(|p| (p.display().to_string(), fs::read(&p).unwrap())));
        }
        files
    }

    #[test]
    fn csv_reports_are_reproducible() {
        let s = store();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        emit_reports(&s, a.path(), ReportFormat::Csv).unwrap();
        emit_reports(&store(), b.path(), ReportFormat::Csv).unwrap();
        let (fa, fb) = (read_all(a.path()), read_all(b.path()));
        assert_eq!(fa.len(), 13);
        for ((_, x), (_, y)) in fa.iter().zip(&fb) {
            assert_eq!(x, y);
        }
        assert_eq!(load_store(a.path()).unwrap().tasks.len(), s.tasks.len());
        let tasks = fs::read_to_string(a.path().join("tasks.csv")).unwrap();
        assert_eq!(tasks.lines().count(), 1 + s.tasks.len());
    }

    #[test]
    fn json_format_writes_assessments() {
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&store(), dir.path(), ReportFormat::Json).unwrap();
        let v: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("assessments.json")).unwrap()).unwrap();
        assert!(v["comparison"]["Ok"]["per_network"].is_array());
        assert!(!dir.path().join("tasks.csv").exists());
    }

    #[test]
    fn empty_store_gives_header_only_tables() {
        let mut s = store();
        s.config.datasets.clear();
        s.originals.clear();
        s.tasks.clear();
        s.similarity.clear();
        s.correlations.clear();
        s.size_stage = Default::default();
        s.comparison = Err("no data".into());
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&s, dir.path(), ReportFormat::Csv).unwrap();
        for name in ["tasks.csv", "similarity.csv", "verdicts.csv", "plotdata/mean_local_a.csv"] {
            assert_eq!(fs::read_to_string(dir.path().join(name)).unwrap().lines().count(), 1, "{name}");
        }
    }
}
