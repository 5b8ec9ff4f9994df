//! The versioned data file: calibrated linking signs, the exceptional-filling
//! rule table for `N`, and the family tables.
//!
//! The shipped file is compiled in; `CHAINFILL_DATA` names a replacement.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::LinkingData;
use crate::instructions::ChainLink;
use crate::seifert::ExceptionalType;
use crate::slopes::Slope;

pub const SHIPPED: &str = include_str!("../data/chainfill-data.json");
pub const DATA_ENV: &str = "CHAINFILL_DATA";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid data file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Conditions on `N(r/s, t/u)` under which a rule applies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RulePattern {
    Any,
    /// `{n, offset − n + 1/m}`
    IntegerAndShift {
        offset: i64,
    },
    OneInteger,
    /// both slopes are integers with the given sum
    IntegerPair {
        sum: i64,
    },
    /// one slope is `base + 1/n`
    OneReciprocal {
        base: i64,
    },
    BothReciprocal {
        base: i64,
    },
    ExactlyOneReciprocal {
        base: i64,
    },
    NoReciprocal {
        base: i64,
    },
    Otherwise,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeRule {
    pub slope: Slope,
    pub pattern: RulePattern,
    #[serde(rename = "type")]
    pub result_type: ExceptionalType,
    /// Lens order as a polynomial in the pattern parameters and `r, s, t, u`.
    #[serde(default)]
    pub order: Option<String>,
    #[serde(default)]
    pub q: Option<String>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub slope: Slope,
    pub form: String,
    /// The type asserted for every parameter value, when there is one.
    #[serde(rename = "type", default)]
    pub expected_type: Option<ExceptionalType>,
    #[serde(default)]
    pub corrected: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyData {
    pub id: String,
    /// Slot templates `(numerator, denominator)` in the parameter `n`.
    #[serde(default)]
    pub instruction: Vec<(String, String)>,
    #[serde(default)]
    pub min: Option<i64>,
    #[serde(default)]
    pub max: Option<i64>,
    #[serde(default)]
    pub excluded: Vec<i64>,
    /// Range of the exceptional triple when it is wider than the table's.
    #[serde(default)]
    pub triple_min: Option<i64>,
    #[serde(default)]
    pub triple_excluded: Option<Vec<i64>>,
    /// The `(S^H, ·, ·)` slopes realising the family's exceptional triple.
    pub triple: [Slope; 3],
    #[serde(default)]
    pub exterior_of: Option<String>,
    #[serde(default)]
    pub remark: Option<String>,
    #[serde(default)]
    pub rows: Vec<FamilyRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFile {
    pub version: String,
    pub linking: Vec<LinkingData>,
    pub large_exceptional: Vec<Slope>,
    pub rules: Vec<SlopeRule>,
    pub families: Vec<FamilyData>,
}

impl DataFile {
    pub fn parse(text: &str) -> Result<DataFile, DataError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn family(&self, id: &str) -> Option<&FamilyData> {
        self.families.iter().find(|f| f.id.eq_ignore_ascii_case(id))
    }

    pub fn linking(&self, link: ChainLink) -> Option<&LinkingData> {
        self.linking.iter().find(|l| l.link == link)
    }
}

/// Reads the file named by `CHAINFILL_DATA`, or the shipped copy.
pub fn load() -> Result<DataFile, DataError> {
    match std::env::var(DATA_ENV) {
        Ok(path) if !path.is_empty() => {
            let text = std::fs::read_to_string(&path).map_err(|source| DataError::Io { path, source })?;
            DataFile::parse(&text)
        }
        _ => DataFile::parse(SHIPPED),
    }
}

static DATA: OnceLock<DataFile> = OnceLock::new();

/// The process-wide data file. An unreadable override falls back to the
/// shipped copy after a warning on standard error.
pub fn data() -> &'static DataFile {
    DATA.get_or_init(|| {
        load().unwrap_or_else(|e| {
            eprintln!("warning: {e}; using the shipped data file");
            DataFile::parse(SHIPPED).expect("shipped data file parses")
        })
    })
}

pub fn linking(link: ChainLink) -> Option<&'static LinkingData> {
    data().linking(link)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_parses() {
        let d = DataFile::parse(SHIPPED).unwrap();
        assert_eq!(d.linking.len(), 5);
        assert_eq!(d.family("A").unwrap().rows.len(), 6);
        assert_eq!(d.family("isolated").unwrap().rows.len(), 6);
        assert_eq!(d.family("B").unwrap().rows.len(), 5);
        assert_eq!(d.family("Cprime").unwrap().exterior_of.as_deref(), Some("C"));
        for l in &d.linking {
            assert_eq!(l.signs.len(), l.link.arity());
        }
    }
}
