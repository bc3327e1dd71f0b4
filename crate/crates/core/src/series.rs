//! Panels of named, equally sampled real-valued series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A length-`T` panel of `p` named series on a common sampling grid.
///
/// Storage is column-major: each series is one contiguous `Vec<f64>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeries {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    /// Optional per-row labels (dates); carried through, never interpreted.
    labels: Option<Vec<String>>,
}

impl MultiSeries {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidInput("panel needs at least one series".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} names for {} series",
                names.len(),
                columns.len()
            )));
        }
        let len = columns[0].len();
        if len == 0 {
            return Err(Error::InvalidInput("series must be non-empty".into()));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != len {
                return Err(Error::InvalidInput(format!(
                    "series '{name}' has length {}, expected {len}",
                    col.len()
                )));
            }
            if let Some(pos) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "series '{name}' has a non-finite value at row {pos}"
                )));
            }
        }
        Ok(Self {
            names,
            columns,
            labels: None,
        })
    }

    /// Builds a panel with default names `s0`, `s1`, ...
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (0..columns.len()).map(|i| format!("s{i}")).collect();
        Self::new(names, columns)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "{} row labels for {} rows",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Sample length `T`.
    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of series `p`.
    pub fn n_series(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        Ok(self.column(self.index_of(name)?))
    }

    /// New panel holding the given columns, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut names = Vec::with_capacity(indices.len());
        let mut columns = Vec::with_capacity(indices.len());
        for &j in indices {
            if j >= self.n_series() {
                return Err(Error::InvalidInput(format!("column index {j} out of range")));
            }
            names.push(self.names[j].clone());
            columns.push(self.columns[j].clone());
        }
        Ok(Self {
            names,
            columns,
            labels: self.labels.clone(),
        })
    }

    /// Value of series `j` at time `t`.
    #[inline]
    pub fn at(&self, t: usize, j: usize) -> f64 {
        self.columns[j][t]
    }

    /// Applies `f` to one column in place. Errors if the result is not finite.
    pub fn map_column(&mut self, j: usize, f: impl Fn(f64) -> f64) -> Result<()> {
        for (t, v) in self.columns[j].iter_mut().enumerate() {
            let out = f(*v);
            if !out.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "transform of series '{}' is not finite at row {t}",
                    self.names[j]
                )));
            }
            *v = out;
        }
        Ok(())
    }

    /// Replaces one column wholesale (same length required).
    pub fn replace_column(&mut self, j: usize, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::InvalidInput("replacement column has wrong length".into()));
        }
        self.columns[j] = values;
        Ok(())
    }

    /// Averages consecutive non-overlapping groups of `factor` rows.
    ///
    /// A trailing partial group is dropped. The label of each group is the
    /// label of its last row.
    pub fn aggregate_mean(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidInput("aggregation factor must be positive".into()));
        }
        let groups = self.len() / factor;
        if groups == 0 {
            return Err(Error::TooShort {
                len: self.len(),
                min: factor,
            });
        }
        let columns = self
            .columns
            .iter()
            .map(|col| {
                col.chunks_exact(factor)
                    .map(|c| c.iter().sum::<f64>() / factor as f64)
                    .collect()
            })
            .collect();
        let labels = self.labels.as_ref().map(|l| {
            (0..groups)
                .map(|g| l[(g + 1) * factor - 1].clone())
                .collect()
        });
        Ok(Self {
            names: self.names.clone(),
            columns,
            labels,
        })
    }
}
