//! Report emission: machine JSON plus human markdown.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes `<stem>.json` and `<stem>.md` into `dir`, creating it if needed.
pub fn write_report<T: Serialize>(dir: &Path, stem: &str, value: &T, markdown: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    let mut json = serde_json::to_string_pretty(value).expect("report serializes");
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    let md_path = dir.join(format!("{stem}.md"));
    std::fs::write(&md_path, markdown).map_err(|e| Error::io(&md_path, e))
}

/// Escapes a value for a markdown table cell.
pub fn cell(s: &str) -> String {
    s.replace('|', "\\|")
}
