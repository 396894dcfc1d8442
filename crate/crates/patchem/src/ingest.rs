//! Compound CSV ingestion and export, and patent bundle JSON.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use patchem_core::coreid::{CompoundRecord, CoreIdError};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 4] = ["patent_id", "compound_id", "smiles", "is_core"];

/// One patent's compound set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatentBundle {
    pub patent_id: String,
    pub compounds: Vec<CompoundRecord>,
    #[serde(default)]
    pub provenance: Vec<String>,
}

impl PatentBundle {
    pub fn core(&self) -> Option<&CompoundRecord> {
        self.compounds.iter().find(|c| c.is_core == Some(true))
    }

    /// True when every compound carries a label and exactly one is the core.
    pub fn is_labeled(&self) -> bool {
        self.compounds.iter().all(|c| c.is_core.is_some()) && self.core().is_some()
    }
}

fn parse_flag(raw: &str, line: u64) -> Result<Option<bool>> {
    match raw {
        "1" => Ok(Some(true)),
        "0" => Ok(Some(false)),
        "" => Ok(None),
        other => Err(Error::CsvFormat {
            line,
            message: format!("is_core must be 0, 1 or empty, found {other:?}"),
        }),
    }
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::CsvFormat {
        line,
        message: e.to_string(),
    }
}

/// Parses compound CSV text, grouping rows by patent in order of first
/// appearance. SMILES are validated eagerly.
pub fn parse_compounds_csv(text: &str) -> Result<Vec<PatentBundle>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(&e))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::CsvFormat {
            line: 1,
            message: format!("header must be exactly {}", CSV_HEADER.join(",")),
        });
    }
    let mut bundles: Vec<PatentBundle> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let (patent_id, compound_id, smiles, flag) = (&record[0], &record[1], &record[2], &record[3]);
        if patent_id.is_empty() || compound_id.is_empty() {
            return Err(Error::CsvFormat {
                line,
                message: "patent_id and compound_id must be non-empty".into(),
            });
        }
        let is_core = parse_flag(flag, line)?;
        let compound = CompoundRecord::new(patent_id, compound_id, smiles, is_core).map_err(|e| match e {
            CoreIdError::Parse {
                compound_id,
                diagnostic,
            } => Error::Parse {
                line,
                compound_id,
                diagnostic,
            },
            other => Error::CoreId(other),
        })?;
        if !seen.insert((patent_id.to_string(), compound_id.to_string())) {
            return Err(Error::DuplicateCompoundId {
                patent_id: patent_id.into(),
                compound_id: compound_id.into(),
            });
        }
        let slot = *index.entry(patent_id.to_string()).or_insert_with(|| {
            bundles.push(PatentBundle {
                patent_id: patent_id.into(),
                compounds: Vec::new(),
                provenance: Vec::new(),
            });
            bundles.len() - 1
        });
        let bundle = &mut bundles[slot];
        if is_core == Some(true) && bundle.core().is_some() {
            return Err(Error::MultipleCores(patent_id.into()));
        }
        bundle.compounds.push(compound);
    }
    Ok(bundles)
}

pub fn read_compounds_csv(path: &Path) -> Result<Vec<PatentBundle>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_compounds_csv(&text)
}

pub fn compounds_csv(bundles: &[PatentBundle]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for b in bundles {
        for c in &b.compounds {
            let flag = match c.is_core {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            w.write_record([c.patent_id.as_str(), c.compound_id.as_str(), c.smiles.as_str(), flag])
                .expect("writing to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("flushing memory")).expect("CSV output is UTF-8")
}

pub fn write_compounds_csv(path: &Path, bundles: &[PatentBundle]) -> Result<()> {
    std::fs::write(path, compounds_csv(bundles)).map_err(|e| Error::io(path, e))
}

pub fn read_bundles_json(path: &Path) -> Result<Vec<PatentBundle>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Bundles from `.json` files, compound CSV otherwise.
pub fn read_bundles(path: &Path) -> Result<Vec<PatentBundle>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_bundles_json(path)
    } else {
        read_compounds_csv(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "patent_id,compound_id,smiles,is_core\n\
        P1,a,CCO,0\n\
        P1,b,c1ccccc1,1\n\
        P2,c,CCN,\n\
        P1,d,CC(=O)O,0\n\
        P2,e,C1CC1,\n";

    #[test]
    fn groups_by_patent() {
        let b = parse_compounds_csv(FIXTURE).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].compounds.len(), 3);
        assert_eq!(b[1].compounds.len(), 2);
        assert_eq!(b[0].core().unwrap().compound_id, "b");
        assert!(b[0].is_labeled());
        assert!(!b[1].is_labeled());
    }

    #[test]
    fn round_trip() {
        let b = parse_compounds_csv(FIXTURE).unwrap();
        assert_eq!(parse_compounds_csv(&compounds_csv(&b)).unwrap(), b);
    }

    #[test]
    fn two_cores_rejected() {
        let text = "patent_id,compound_id,smiles,is_core\nP,a,C,1\nP,b,CC,1\n";
        assert!(matches!(parse_compounds_csv(text), Err(Error::MultipleCores(p)) if p == "P"));
    }

    #[test]
    fn bad_smiles_cites_line() {
        let text = "patent_id,compound_id,smiles,is_core\nP,a,C,0\nP,b,CC,0\nP,c,C1CC,1\n";
        match parse_compounds_csv(text) {
            Err(Error::Parse { line, compound_id, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(compound_id, "c");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn format_errors() {
        assert!(matches!(
            parse_compounds_csv("a,b,c,d\n"),
            Err(Error::CsvFormat { line: 1, .. })
        ));
        let text = "patent_id,compound_id,smiles,is_core\nP,a,C,yes\n";
        assert!(matches!(
            parse_compounds_csv(text),
            Err(Error::CsvFormat { line: 2, .. })
        ));
        let text = "patent_id,compound_id,smiles,is_core\nP,a,C\n";
        assert!(matches!(
            parse_compounds_csv(text),
            Err(Error::CsvFormat { line: 2, .. })
        ));
        let text = "patent_id,compound_id,smiles,is_core\nP,a,C,0\nP,a,CC,0\n";
        assert!(matches!(
            parse_compounds_csv(text),
            Err(Error::DuplicateCompoundId { .. })
        ));
    }
}
