//! CSV formats: feature tables, dataset manifests and ICC tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voiforge_core::robust::IccReport;
use voiforge_core::FeatureTable;

use crate::error::{Result, VfError};

/// Shortest decimal form that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| VfError::io(parent, e))?;
    }
    Ok(())
}

pub fn feature_csv_string(table: &FeatureTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["subject_id".to_string(), "label".to_string()];
    head.extend(table.names.iter().cloned());
    w.write_record(&head)?;
    for ((s, l), row) in table.subjects.iter().zip(&table.labels).zip(&table.rows) {
        let mut rec = vec![s.clone(), l.to_string()];
        rec.extend(row.iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| VfError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `subject_id,label,<feature names>` with round-trip exact values.
pub fn write_feature_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, feature_csv_string(table)?).map_err(|e| VfError::io(path, e))
}

pub fn read_feature_csv(path: &Path) -> Result<FeatureTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| VfError::Data(format!("{}: {e}", path.display())))?;
    let head = r.headers()?.clone();
    if head.len() < 3 || &head[0] != "subject_id" || &head[1] != "label" {
        return Err(VfError::Data(format!("{}: header must start with subject_id,label", path.display())));
    }
    let names: Vec<String> = head.iter().skip(2).map(String::from).collect();
    let (mut subjects, mut labels, mut rows) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let err = |what: &str| VfError::Data(format!("{} row {}: {what}", path.display(), line + 2));
        subjects.push(rec[0].to_string());
        labels.push(rec[1].trim().parse::<u8>().map_err(|_| err("label is not 0/1"))?);
        let row = rec.iter().skip(2).map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
        rows.push(row.map_err(|_| err("unparsable value"))?);
    }
    Ok(FeatureTable::new(subjects, labels, names, rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
    pub pcr: u8,
    pub subtype: String,
}

/// Reads `subject_id,image_path,mask_path,pcr,subtype`; relative paths are
/// resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<SubjectRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| VfError::Data(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let mut out: Vec<SubjectRecord> = Vec::new();
    for rec in r.deserialize() {
        let mut s: SubjectRecord = rec?;
        if s.pcr > 1 {
            return Err(VfError::Data(format!("subject {}: pcr must be 0 or 1", s.subject_id)));
        }
        if out.iter().any(|o| o.subject_id == s.subject_id) {
            return Err(VfError::Data(format!("duplicate subject_id {}", s.subject_id)));
        }
        for p in [&mut s.image_path, &mut s.mask_path] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Paths are written as given.
pub fn write_manifest(records: &[SubjectRecord], path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| VfError::Data(e.to_string()))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| VfError::io(path, e))
}

/// `feature_name,category,icc,flag`.
pub fn icc_csv_string(report: &IccReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["feature_name", "category", "icc", "flag"])?;
    for e in &report.entries {
        w.write_record([e.feature.as_str(), e.category.label(), &fmt_f64(e.icc), e.flag.as_deref().unwrap_or("")])?;
    }
    let bytes = w.into_inner().map_err(|e| VfError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn feature_csv_round_trips_bits(vals in proptest::collection::vec(proptest::num::f64::ANY, 6)) {
            let table = FeatureTable::new(
                vec!["a".into(), "b,c".into()],
                vec![0, 1],
                vec!["shape_X".into(), "glcm_Y".into(), "firstorder_Z".into()],
                vec![vals[..3].to_vec(), vals[3..].to_vec()],
            ).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("f.csv");
            write_feature_csv(&table, &p).unwrap();
            let back = read_feature_csv(&p).unwrap();
            prop_assert_eq!(&back.subjects, &table.subjects);
            for (r0, r1) in table.rows.iter().zip(&back.rows) {
                for (a, b) in r0.iter().zip(r1) {
                    prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
                }
            }
        }
    }

    #[test]
    fn manifest_paths_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "subject_id,image_path,mask_path,pcr,subtype\ns1,img/s1.nrrd,/abs/m.nrrd,1,HER2+\n").unwrap();
        let m = read_manifest(&p).unwrap();
        assert_eq!(m[0].image_path, dir.path().join("img/s1.nrrd"));
        assert_eq!(m[0].mask_path, PathBuf::from("/abs/m.nrrd"));
        fs::write(&p, "subject_id,image_path,mask_path,pcr,subtype\ns1,a,b,2,TNBC\n").unwrap();
        assert!(read_manifest(&p).is_err());
    }
}
