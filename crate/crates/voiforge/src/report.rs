//! Report files derived from an `ExperimentRecord`. Every file is a pure
//! function of the record, so re-emitting from `record.json` reproduces them.

use std::fs;
use std::path::{Path, PathBuf};

use voiforge_core::robust::Group;

use crate::config::{from_versioned_str, to_versioned_string};
use crate::error::{Result, VfError};
use crate::pipeline::{ExperimentRecord, Metrics};
use crate::svg;
use crate::tables::{feature_csv_string, fmt_f64, icc_csv_string};

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| VfError::Data(e.to_string()))?).expect("UTF-8"))
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn metric_header(prefix: &str) -> Vec<String> {
    ["AUC", "SE", "SP"].iter().flat_map(|m| [format!("{prefix}_{m}"), format!("{prefix}_{m}_sd")]).collect()
}

fn metric_cells(m: &Metrics) -> Vec<String> {
    [m.auc, m.se, m.sp].iter().flat_map(|v| [fmt_f64(v.mean), fmt_f64(v.std)]).collect()
}

/// Relative path and contents of every report file.
pub fn render(record: &ExperimentRecord) -> Result<Vec<(PathBuf, String)>> {
    if record.baseline.top.is_empty() || record.tables.is_empty() {
        return Err(VfError::Data("record holds no results".into()));
    }
    let mut files = Vec::new();
    for (m, t) in &record.tables {
        files.push((PathBuf::from("features").join(format!("{}.csv", m.id())), feature_csv_string(t)?));
    }

    let mut head = strings(&["rank", "fs_method", "classifier", "cv_AUC"]);
    head.extend(metric_header("train"));
    head.extend(metric_header("test"));
    head.extend(strings(&["n_features", "features"]));
    let rows: Vec<Vec<String>> = record
        .baseline
        .top
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut r = vec![(i + 1).to_string(), t.method.to_string(), t.classifier.to_string(), fmt_f64(t.selection_cv_auc)];
            r.extend(metric_cells(&t.train));
            r.extend(metric_cells(&t.test));
            r.push(t.features.len().to_string());
            r.push(t.features.join(";"));
            r
        })
        .collect();
    files.push((PathBuf::from("selection.csv"), csv_string(&head, &rows)?));

    if !record.robustness.is_empty() {
        let mut head = vec!["group".to_string()];
        head.extend(record.robustness.iter().map(|r| r.modification.id().to_string()));
        let rows: Vec<Vec<String>> = Group::ALL
            .iter()
            .map(|g| {
                let mut row = vec![g.label().to_string()];
                for r in &record.robustness {
                    let p = r.proportions.iter().find(|(pg, _)| pg == g).and_then(|(_, p)| *p);
                    row.push(p.map(|p| fmt_f64(p.percent)).unwrap_or_default());
                }
                row
            })
            .collect();
        files.push((PathBuf::from("robustness.csv"), csv_string(&head, &rows)?));
        for r in &record.robustness {
            files.push((PathBuf::from("icc").join(format!("{}.csv", r.modification.id())), icc_csv_string(&r.icc)?));
            if record.config.plots {
                files.push((
                    PathBuf::from("plots").join(format!("icc_{}.svg", r.modification.id())),
                    svg::icc_bars(&r.icc, record.config.icc_threshold),
                ));
            }
        }
    }

    if let Some(fm) = &record.fixed_model {
        let mut head = strings(&["modification", "fs_method", "classifier", "n_features"]);
        head.extend(metric_header("train"));
        head.extend(metric_header("test"));
        head.extend(strings(&["train_delta", "test_delta", "avg_icc"]));
        let rows: Vec<Vec<String>> = fm
            .rows
            .iter()
            .map(|r| {
                let mut c = vec![r.modification.id().into(), r.method.to_string(), r.classifier.to_string(), r.n_features.to_string()];
                c.extend(metric_cells(&r.train));
                c.extend(metric_cells(&r.test));
                c.extend([fmt_f64(r.train_delta), fmt_f64(r.test_delta), fmt_f64(r.avg_icc)]);
                c
            })
            .collect();
        files.push((PathBuf::from("fixed_model.csv"), csv_string(&head, &rows)?));
    }

    if let Some(rs) = &record.reselect {
        let mut head = strings(&["modification", "fs_method", "classifier", "n_features", "common", "f_c"]);
        head.extend(metric_header("train"));
        head.extend(metric_header("test"));
        head.extend(strings(&["train_delta", "test_delta", "avg_icc", "features"]));
        let rows: Vec<Vec<String>> = rs
            .rows
            .iter()
            .map(|r| {
                let mut c = vec![
                    r.modification.id().into(),
                    r.method.to_string(),
                    r.classifier.to_string(),
                    r.features.len().to_string(),
                    r.common.to_string(),
                    fmt_f64(r.f_c),
                ];
                c.extend(metric_cells(&r.train));
                c.extend(metric_cells(&r.test));
                c.extend([fmt_f64(r.train_delta), fmt_f64(r.test_delta), fmt_f64(r.avg_icc), r.features.join(";")]);
                c
            })
            .collect();
        files.push((PathBuf::from("reselect.csv"), csv_string(&head, &rows)?));
        if record.config.plots {
            let sets: Vec<(String, Vec<String>)> = rs.rows.iter().map(|r| (r.modification.id().to_string(), r.features.clone())).collect();
            files.push((PathBuf::from("plots").join("common_features.svg"), svg::common_matrix(&sets)));
        }
    }
    Ok(files)
}

/// Writes `record.json` and every rendered file under `dir`. Nothing is
/// written unless rendering succeeds completely.
pub fn emit_reports(record: &ExperimentRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = render(record)?;
    files.push((PathBuf::from("record.json"), to_versioned_string(record)? + "\n"));
    let mut written = Vec::new();
    for (rel, body) in files {
        let p = dir.join(&rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| VfError::io(parent, e))?;
        }
        fs::write(&p, body).map_err(|e| VfError::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}

pub fn read_record(path: &Path) -> Result<ExperimentRecord> {
    let text = fs::read_to_string(path).map_err(|e| VfError::io(path, e))?;
    from_versioned_str(&text).map_err(|e| match e {
        VfError::Config(m) => VfError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}
