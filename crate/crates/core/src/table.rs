use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Subjects x features with a binary label per subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub subjects: Vec<String>,
    pub labels: Vec<u8>,
    pub names: Vec<String>,
    /// One row per subject, in `names` order.
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(subjects: Vec<String>, labels: Vec<u8>, names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if subjects.len() != labels.len() || subjects.len() != rows.len() {
            return Err(Error::SubjectMismatch(format!(
                "{} subjects, {} labels, {} rows",
                subjects.len(),
                labels.len(),
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != names.len()) {
            return Err(Error::FeatureMismatch(format!("row {r} has {} values, expected {}", rows[r].len(), names.len())));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!("label {l} is not binary")));
        }
        Ok(FeatureTable { subjects, labels, names, rows })
    }

    pub fn n_subjects(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureTable {
        FeatureTable {
            subjects: idx.iter().map(|&i| self.subjects[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> FeatureTable {
        FeatureTable {
            subjects: self.subjects.clone(),
            labels: self.labels.clone(),
            names: idx.iter().map(|&j| self.names[j].clone()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
        }
    }

    /// Errors unless `other` has the same subjects and feature names in the same order.
    pub fn check_aligned(&self, other: &FeatureTable) -> Result<()> {
        if self.subjects != other.subjects {
            return Err(Error::SubjectMismatch("subject lists differ".into()));
        }
        if self.names != other.names {
            return Err(Error::FeatureMismatch("feature names differ".into()));
        }
        Ok(())
    }
}
