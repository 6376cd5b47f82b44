//! Space files: CSV distance matrices, JSON point clouds, and the space JSON
//! written by the generators.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::GeneratedSpace;
use crate::metric_space::{FiniteMetricSpace, PointMetric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub n: usize,
    pub diam: f64,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_dimension: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
    pub dist: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_metric")]
    pub metric: PointMetric,
}

fn default_metric() -> PointMetric {
    PointMetric::Euclidean
}

/// A loaded space plus whatever measure came with it.
#[derive(Debug, Clone)]
pub struct LoadedSpace {
    pub space: FiniteMetricSpace,
    pub masses: Option<Vec<f64>>,
    pub known_dimension: Option<f64>,
}

impl SpaceFile {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        SpaceFile {
            n: space.len(),
            diam: space.diameter(),
            label: space.label().to_string(),
            resolution: Some(space.resolution()),
            known_dimension: None,
            masses: None,
            dist: space.matrix(),
        }
    }

    pub fn from_generated(g: &GeneratedSpace) -> Self {
        SpaceFile {
            known_dimension: g.known_dimension,
            masses: Some(g.masses.clone()),
            ..Self::from_space(&g.space)
        }
    }
}

pub fn read_csv_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {r}, column {c}: {field:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_csv_matrix(values: &[Vec<f64>]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in values {
        writer
            .write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Loads a `.csv` matrix, a point-cloud JSON or a space JSON. `normalize`
/// rescales to that diameter; without it the input diameter must lie in `(0,1)`.
pub fn load_space(path: &Path, normalize: Option<f64>) -> Result<LoadedSpace> {
    let text = fs::read_to_string(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let m = read_csv_matrix(&text)?;
        let space = match normalize {
            Some(t) => FiniteMetricSpace::from_matrix_normalized(&m, &label, t)?,
            None => FiniteMetricSpace::from_matrix(&m, &label)?,
        };
        return Ok(LoadedSpace { space, masses: None, known_dimension: None });
    }
    parse_space_json(&text, &label, normalize)
}

pub fn parse_space_json(text: &str, label: &str, normalize: Option<f64>) -> Result<LoadedSpace> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("points").is_some() {
        let cloud: PointCloud = serde_json::from_value(value)?;
        let space = FiniteMetricSpace::from_points(&cloud.points, cloud.metric, label, normalize)?;
        return Ok(LoadedSpace { space, masses: None, known_dimension: None });
    }
    if value.get("dist").is_some() {
        let file: SpaceFile = serde_json::from_value(value)?;
        if file.dist.len() != file.n {
            return Err(Error::Parse(format!(
                "space file declares n = {} but has {} rows",
                file.n,
                file.dist.len()
            )));
        }
        let space = match normalize {
            Some(t) => FiniteMetricSpace::from_matrix_normalized(&file.dist, &file.label, t)?,
            None => FiniteMetricSpace::from_matrix(&file.dist, &file.label)?,
        };
        if let Some(m) = &file.masses {
            if m.len() != file.n {
                return Err(Error::Parse(format!("{} masses for {} points", m.len(), file.n)));
            }
        }
        return Ok(LoadedSpace {
            space,
            masses: file.masses,
            known_dimension: file.known_dimension,
        });
    }
    Err(Error::UnknownFormat(
        "JSON input needs either a \"points\" or a \"dist\" field".to_string(),
    ))
}
