//! Map files, CSV output and the final-screen document.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dungeon_core::evolution::OptimisationHistory;
use dungeon_core::grid::ParseError;
use dungeon_core::{GridMap, MetricVector, METRIC_COUNT};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

/// A map as twelve glyph strings, the JSON form used by the API and journals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiMap {
    pub rows: Vec<String>,
}

impl From<GridMap> for ApiMap {
    fn from(map: GridMap) -> ApiMap {
        ApiMap { rows: map.to_rows() }
    }
}

impl TryFrom<&ApiMap> for GridMap {
    type Error = ParseError;

    fn try_from(api: &ApiMap) -> Result<GridMap, ParseError> {
        GridMap::from_rows(&api.rows)
    }
}

pub fn read_map(path: &Path) -> Result<GridMap, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    GridMap::parse(&text).map_err(|source| FormatError::Parse { path: path.display().to_string(), source })
}

/// Reads a map that must be structurally valid and feasible.
pub fn read_feasible_map(path: &Path) -> Result<GridMap, FormatError> {
    let map = read_map(path)?;
    let invalid = |message: String| FormatError::Invalid { path: path.display().to_string(), message };
    let report = map.feasibility().map_err(|e| invalid(e.to_string()))?;
    if !report.feasible() {
        return Err(invalid("no passable path from entrance to exit".into()));
    }
    Ok(map)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), FormatError> {
    fs::write(path, contents).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

/// Formats `v` with at most nine significant digits, trailing zeros dropped.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("scientific notation round-trips");
    rounded.to_string()
}

pub fn metrics_header() -> String {
    (1..=METRIC_COUNT).map(|i| format!("M{i}")).collect::<Vec<_>>().join(",")
}

/// Header line plus one data row.
pub fn metrics_csv(m: &MetricVector) -> String {
    let row: Vec<String> = m.as_slice().iter().map(|&v| sig9(v)).collect();
    format!("{}\n{}\n", metrics_header(), row.join(","))
}

pub const HISTORY_HEADER: &str = "generation,best_fitness_sum,mean_fitness_sum,feasible_count";

/// One row per generation; generations without feasible members leave the
/// fitness columns empty.
pub fn history_csv(history: &OptimisationHistory) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(sig9).unwrap_or_default();
    for r in &history.records {
        writeln!(
            out,
            "{},{},{},{}",
            r.generation,
            opt(r.best_fitness_sum),
            opt(r.mean_fitness_sum),
            r.feasible_count
        )
        .expect("writing to a String");
    }
    out
}

/// Splits a final-screen document into its titled map blocks.
pub fn parse_blocks(text: &str) -> Result<Vec<(String, GridMap)>, ParseError> {
    let mut blocks = Vec::new();
    let mut title: Option<String> = None;
    let mut body = String::new();
    let mut flush = |title: &mut Option<String>, body: &mut String| -> Result<(), ParseError> {
        if let Some(t) = title.take() {
            blocks.push((t, GridMap::parse(body.trim_end())?));
        }
        body.clear();
        Ok(())
    };
    for line in text.lines() {
        if let Some(t) = line.strip_prefix("# ") {
            flush(&mut title, &mut body)?;
            title = Some(t.to_string());
        } else if !line.trim().is_empty() {
            body.push_str(line);
            body.push('\n');
        }
    }
    flush(&mut title, &mut body)?;
    Ok(blocks)
}

/// Values from a one-column CSV; a non-numeric first line is a header.
pub fn read_column(path: &Path) -> Result<Vec<f64>, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(FormatError::Invalid {
                    path: path.display().to_string(),
                    message: format!("line {}: {field:?} is not a number", i + 1),
                })
            }
        }
    }
    Ok(values)
}
