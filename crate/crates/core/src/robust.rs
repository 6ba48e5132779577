//! Feature robustness: ICC between original and modified VOIs, grouped
//! proportions above a threshold, AUC change and selected-feature overlap.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::table::FeatureTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IccModel {
    /// Two-way mixed, consistency, single measurement.
    #[default]
    ConsistencyC31,
    /// Two-way random, absolute agreement, single measurement.
    AgreementA21,
}

impl IccModel {
    pub fn label(self) -> &'static str {
        match self {
            IccModel::ConsistencyC31 => "ICC(3,1)",
            IccModel::AgreementA21 => "ICC(A,1)",
        }
    }
}

/// Two-rater ICC. Returns NaN when the between-subject mean square is zero.
pub fn icc(a: &[f64], b: &[f64], model: IccModel) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SubjectMismatch(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.len() < 3 {
        return Err(Error::InvalidParameter(format!("ICC needs at least 3 subjects, got {}", a.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = a.len() as f64;
    let k = 2.0;
    let rows: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
    let ca = a.iter().sum::<f64>() / n;
    let cb = b.iter().sum::<f64>() / n;
    let grand = (ca + cb) / 2.0;
    let ss_rows = k * rows.iter().map(|r| (r - grand) * (r - grand)).sum::<f64>();
    let ss_cols = n * ((ca - grand).powi(2) + (cb - grand).powi(2));
    let ss_err: f64 = a
        .iter()
        .zip(b)
        .zip(&rows)
        .map(|((x, y), r)| (x - r - ca + grand).powi(2) + (y - r - cb + grand).powi(2))
        .sum();
    let scale: f64 = a.iter().chain(b).map(|v| v * v).sum();
    if ss_rows <= 1e-24 * scale || ss_rows == 0.0 {
        return Ok(f64::NAN);
    }
    let msr = ss_rows / (n - 1.0);
    let mse = ss_err / ((n - 1.0) * (k - 1.0));
    let msc = ss_cols / (k - 1.0);
    Ok(match model {
        IccModel::ConsistencyC31 => (msr - mse) / (msr + (k - 1.0) * mse),
        IccModel::AgreementA21 => (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Shape,
    Firstorder,
    Texture,
}

impl Category {
    pub fn of(name: &str) -> Category {
        if name.starts_with("shape_") {
            Category::Shape
        } else if name.starts_with("firstorder_") {
            Category::Firstorder
        } else {
            Category::Texture
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Shape => "shape",
            Category::Firstorder => "firstorder",
            Category::Texture => "texture",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    All,
    Shape,
    Firstorder,
    Texture,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::All, Group::Shape, Group::Firstorder, Group::Texture];

    pub fn contains(self, c: Category) -> bool {
        match self {
            Group::All => true,
            Group::Shape => c == Category::Shape,
            Group::Firstorder => c == Category::Firstorder,
            Group::Texture => c == Category::Texture,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Group::All => "all",
            Group::Shape => "shape",
            Group::Firstorder => "firstorder",
            Group::Texture => "texture",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccEntry {
    pub feature: String,
    pub category: Category,
    /// NaN when undefined.
    #[serde(with = "crate::nan_serde")]
    pub icc: f64,
    /// Set when the value is undefined (zero between-subject variance).
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccReport {
    pub modification: String,
    pub model: IccModel,
    pub entries: Vec<IccEntry>,
}

impl IccReport {
    pub fn get(&self, feature: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.icc)
    }

    /// Mean ICC over `features`, skipping undefined values; NaN if none remain.
    pub fn average(&self, features: &[String]) -> f64 {
        let vals: Vec<f64> =
            features.iter().filter_map(|f| self.get(f)).filter(|v| !v.is_nan()).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }
}

pub fn robustness_report(
    baseline: &FeatureTable,
    modified: &FeatureTable,
    modification: &str,
    model: IccModel,
) -> Result<IccReport> {
    baseline.check_aligned(modified)?;
    let mut entries = Vec::with_capacity(baseline.n_features());
    for (j, name) in baseline.names.iter().enumerate() {
        let v = icc(&baseline.column(j), &modified.column(j), model)?;
        entries.push(IccEntry {
            feature: name.clone(),
            category: Category::of(name),
            icc: v,
            flag: v.is_nan().then(|| String::from("zero_variance")),
        });
    }
    Ok(IccReport { modification: modification.into(), model, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    /// Unrounded percentage of defined ICCs above the threshold.
    pub percent: f64,
    pub above: usize,
    pub defined: usize,
    pub undefined: usize,
}

/// Share of features in `group` with ICC strictly above `threshold`.
/// Undefined ICCs are left out of the denominator and counted separately.
pub fn proportion_above(report: &IccReport, threshold: f64, group: Group) -> Result<Proportion> {
    let members: Vec<&IccEntry> = report.entries.iter().filter(|e| group.contains(e.category)).collect();
    let undefined = members.iter().filter(|e| e.icc.is_nan()).count();
    let defined = members.len() - undefined;
    if defined == 0 {
        return Err(Error::Empty("ICC group"));
    }
    let above = members.iter().filter(|e| e.icc > threshold).count();
    Ok(Proportion { percent: 100.0 * above as f64 / defined as f64, above, defined, undefined })
}

/// Relative AUC change in percent.
pub fn delta_auc(auc1: f64, auc2: f64) -> Result<f64> {
    if !(auc1 > 0.0) {
        return Err(Error::InvalidParameter(format!("baseline AUC must be > 0, got {auc1}")));
    }
    Ok((auc2 - auc1) / auc1 * 100.0)
}

/// Percentage of the baseline selection that is also in the modified selection.
pub fn common_fraction(baseline: &[String], modified: &[String]) -> Result<f64> {
    let b: BTreeSet<&str> = baseline.iter().map(String::as_str).collect();
    if b.is_empty() {
        return Err(Error::Empty("baseline feature set"));
    }
    let m: BTreeSet<&str> = modified.iter().map(String::as_str).collect();
    Ok(100.0 * b.intersection(&m).count() as f64 / b.len() as f64)
}
