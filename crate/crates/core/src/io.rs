//! CSV panels and declarative design files.
//!
//! Row and column positions in errors are 1-based, counting the header as
//! row 1 and the label column (when present) as column 1.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MultiSeries;
use crate::sim::{SimDesign, Table1Case, DEFAULT_BURN_IN, DEFAULT_N_MC, DEFAULT_T};
use crate::spectra::Functional;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    /// The first column holds labels when its first data cell is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvSchema {
    pub labels: LabelColumn,
    /// Columns to keep, by header name; empty keeps every column.
    pub columns: Vec<String>,
}

fn parse_cell(cell: &str, row: usize, column: usize) -> Result<f64> {
    let trimmed = cell.trim();
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumeric {
            row,
            column,
            value: cell.to_string(),
        }),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let (row, column) = match e.position() {
        Some(p) => (p.line() as usize, 0),
        None => (0, 0),
    };
    let (row, column) = match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, len, .. } => (
            pos.as_ref().map_or(row, |p| p.line() as usize),
            *len as usize + 1,
        ),
        _ => (row, column),
    };
    Error::Parse {
        row,
        column,
        message: e.to_string(),
    }
}

/// Reads a panel from CSV bytes: a header row, an optional label column,
/// then numeric columns in time order.
pub fn ingest_csv_bytes(bytes: &[u8], schema: &CsvSchema) -> Result<MultiSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "missing header row".into(),
        });
    }
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Parse {
            row: 2,
            column: 1,
            message: "no data rows".into(),
        });
    }
    let has_labels = match schema.labels {
        LabelColumn::Present => true,
        LabelColumn::Absent => false,
        LabelColumn::Auto => records[0].get(0).is_some_and(|c| c.trim().parse::<f64>().is_err()),
    };
    let first = usize::from(has_labels);
    if headers.len() <= first {
        return Err(Error::Parse {
            row: 1,
            column: headers.len(),
            message: "no numeric columns".into(),
        });
    }
    let wanted: Vec<usize> = if schema.columns.is_empty() {
        (first..headers.len()).collect()
    } else {
        schema
            .columns
            .iter()
            .map(|name| {
                headers[first..]
                    .iter()
                    .position(|h| h == name)
                    .map(|i| i + first)
                    .ok_or_else(|| Error::MissingColumn(name.clone()))
            })
            .collect::<Result<_>>()?
    };
    let mut columns = vec![Vec::with_capacity(records.len()); wanted.len()];
    let mut labels = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        let row = r + 2;
        if has_labels {
            labels.push(rec.get(0).unwrap_or_default().to_string());
        }
        for (out, &c) in columns.iter_mut().zip(&wanted) {
            out.push(parse_cell(rec.get(c).unwrap_or_default(), row, c + 1)?);
        }
    }
    let names = wanted.iter().map(|&c| headers[c].clone()).collect();
    let series = MultiSeries::new(names, columns)?;
    if has_labels {
        series.with_labels(labels)
    } else {
        Ok(series)
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<MultiSeries> {
    let bytes = std::fs::read(path)?;
    ingest_csv_bytes(&bytes, schema)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    name: String,
    k: Option<usize>,
    a: Vec<Vec<Vec<f64>>>,
    sigma: Option<Vec<Vec<f64>>>,
    sigma_diag: Option<Vec<f64>>,
    #[serde(rename = "T", alias = "t")]
    t: Option<usize>,
    n_mc: Option<usize>,
    functional: Option<Functional>,
    burn_in: Option<usize>,
    boundary: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    design: Vec<RawDesign>,
    #[serde(default)]
    case: Vec<Table1Case>,
}

/// Designs and an optional case binding read from a design file.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub designs: Vec<SimDesign>,
    pub table1: Vec<Table1Case>,
}

fn convert(raw: RawDesign) -> Result<SimDesign> {
    let sigma = match (raw.sigma, raw.sigma_diag) {
        (Some(s), None) => s,
        (None, Some(d)) => (0..d.len())
            .map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect())
            .collect(),
        _ => {
            return Err(Error::Config(format!(
                "design '{}' needs exactly one of sigma and sigma_diag",
                raw.name
            )))
        }
    };
    let design = SimDesign {
        k: raw.k.unwrap_or(raw.a.len()),
        name: raw.name,
        a: raw.a,
        sigma,
        t: raw.t.unwrap_or(DEFAULT_T),
        n_mc: raw.n_mc.unwrap_or(DEFAULT_N_MC),
        functional: raw.functional.unwrap_or(Functional::Unconditional),
        burn_in: raw.burn_in.unwrap_or(DEFAULT_BURN_IN),
        boundary: raw.boundary.unwrap_or(false),
    };
    design.validate()?;
    Ok(design)
}

/// Parses a TOML design file with `[[design]]` and optional `[[case]]` tables.
pub fn parse_design_config(text: &str) -> Result<DesignConfig> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let designs = raw.design.into_iter().map(convert).collect::<Result<Vec<_>>>()?;
    for (i, d) in designs.iter().enumerate() {
        if designs[..i].iter().any(|o| o.name == d.name) {
            return Err(Error::Config(format!("duplicate design name '{}'", d.name)));
        }
    }
    for c in &raw.case {
        if !designs.iter().any(|d| d.name == c.design) {
            return Err(Error::Config(format!(
                "case {} refers to unknown design '{}'",
                c.case, c.design
            )));
        }
    }
    Ok(DesignConfig {
        designs,
        table1: raw.case,
    })
}

pub fn load_design_config(path: impl AsRef<Path>) -> Result<DesignConfig> {
    parse_design_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_detected_and_carried() {
        let s = ingest_csv_bytes(b"date,a,b\n2000Q1,1,2\n2000Q2,3,4\n", &CsvSchema::default()).unwrap();
        assert_eq!(s.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(s.labels().unwrap(), &["2000Q1".to_string(), "2000Q2".to_string()]);
        assert_eq!(s.column(1), &[2.0, 4.0]);
    }

    #[test]
    fn numeric_first_column_is_data() {
        let s = ingest_csv_bytes(b"a,b\n1,2\n3,4\n", &CsvSchema::default()).unwrap();
        assert_eq!(s.n_series(), 2);
        assert!(s.labels().is_none());
    }

    #[test]
    fn blank_cell_reports_coordinates() {
        let err = ingest_csv_bytes(b"d,a,b\nx,1,2\ny,,4\n", &CsvSchema::default()).unwrap_err();
        match err {
            Error::NonNumeric { row, column, .. } => assert_eq!((row, column), (3, 2)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ragged_row_is_parse_error() {
        let err = ingest_csv_bytes(b"a,b\n1,2\n3\n", &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err:?}");
    }

    #[test]
    fn selected_columns() {
        let schema = CsvSchema {
            columns: vec!["b".into()],
            ..CsvSchema::default()
        };
        let s = ingest_csv_bytes(b"a,b\n1,2\n3,4\n", &schema).unwrap();
        assert_eq!(s.column(0), &[2.0, 4.0]);
        let schema = CsvSchema {
            columns: vec!["zz".into()],
            ..CsvSchema::default()
        };
        assert!(matches!(
            ingest_csv_bytes(b"a,b\n1,2\n", &schema),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn design_file_round_trip() {
        let text = r#"
[[design]]
name = "d"
a = [[[0.0, 0.5], [0.0, 0.5]]]
sigma_diag = [1.0, 1.0]
T = 100
n_mc = 50

[[case]]
case = 1
design = "d"
reference_rate = 0.5
"#;
        let cfg = parse_design_config(text).unwrap();
        assert_eq!(cfg.designs[0].k, 1);
        assert_eq!(cfg.designs[0].t, 100);
        assert_eq!(cfg.designs[0].sigma[1][1], 1.0);
        assert_eq!(cfg.table1[0].design, "d");
    }

    #[test]
    fn design_file_errors() {
        assert!(matches!(parse_design_config("[[design]]\nname = 1"), Err(Error::Config(_))));
        let both = "[[design]]\nname='d'\na=[[[0.0,0.0],[0.0,0.0]]]\nsigma_diag=[1.0,1.0]\nsigma=[[1.0,0.0],[0.0,1.0]]\n";
        assert!(parse_design_config(both).is_err());
        let explosive = "[[design]]\nname='d'\na=[[[1.2,0.0],[0.0,0.0]]]\nsigma_diag=[1.0,1.0]\n";
        assert!(matches!(parse_design_config(explosive), Err(Error::InvalidDesign(_))));
    }
}
