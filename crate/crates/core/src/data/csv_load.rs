use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Column layout of a CSV dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    /// Header name of the label column.
    pub label: String,
    /// Feature columns in order; every non-label column when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
    /// Label values in class-id order. When absent, distinct values are
    /// sorted (numerically if they all parse as integers) and numbered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
}

impl CsvSchema {
    pub fn with_label(label: impl Into<String>) -> Self {
        CsvSchema {
            label: label.into(),
            features: None,
            classes: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, name: &str, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let position = |column: &str| {
        header
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: column.to_owned(),
            })
    };
    let label_col = position(&schema.label)?;
    let feature_cols: Vec<usize> = match &schema.features {
        Some(names) => names.iter().map(|n| position(n)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&i| i != label_col).collect(),
    };
    if feature_cols.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no feature columns", path.display())));
    }

    let mut entries = Vec::new();
    let mut raw_labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| Error::CsvParse {
                path: path.to_path_buf(),
                row: line,
                column: header[c].clone(),
                value: cell.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvParse {
                    path: path.to_path_buf(),
                    row: line,
                    column: header[c].clone(),
                    value: cell.to_owned(),
                });
            }
            entries.push(value);
        }
        raw_labels.push((line, record.get(label_col).unwrap_or("").to_owned()));
    }

    let classes: Vec<String> = match &schema.classes {
        Some(c) => c.clone(),
        None => {
            let distinct: BTreeSet<&str> = raw_labels.iter().map(|(_, v)| v.as_str()).collect();
            let mut values: Vec<String> = distinct.into_iter().map(str::to_owned).collect();
            if values.iter().all(|v| v.parse::<i64>().is_ok()) {
                values.sort_by_key(|v| v.parse::<i64>().unwrap());
            }
            values
        }
    };
    let ids: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let labels = raw_labels
        .iter()
        .map(|(line, v)| {
            ids.get(v.as_str()).copied().ok_or_else(|| Error::UnknownLabel {
                path: path.to_path_buf(),
                row: *line,
                value: v.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let features = Matrix::new(raw_labels.len(), feature_cols.len(), entries)?;
    Dataset::new(name, features, labels, classes.len())
}

/// Writes `f0..f{d-1},label` with a header row.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<String> = (0..ds.d()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..ds.n() {
        let mut row: Vec<String> = ds.features().row_slice(i).iter().map(|v| v.to_string()).collect();
        row.push(ds.labels()[i].to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_file() {
        let f = write("a,b,y\n1,2,0\n3,4,1\n5,6,0\n");
        let ds = load_csv(f.path(), "t", &CsvSchema::with_label("y")).unwrap();
        assert_eq!((ds.n(), ds.d(), ds.class_count()), (3, 2, 2));
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.features().get(1, 1), 4.0);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let f = write("a,b,y\n1,2,0\n3,abc,1\n");
        match load_csv(f.path(), "t", &CsvSchema::with_label("y")) {
            Err(Error::CsvParse { row, column, value, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_label_with_explicit_classes() {
        let f = write("a,y\n1,cat\n2,dog\n3,cow\n");
        let schema = CsvSchema {
            label: "y".into(),
            features: None,
            classes: Some(vec!["cat".into(), "dog".into()]),
        };
        assert!(matches!(
            load_csv(f.path(), "t", &schema),
            Err(Error::UnknownLabel { row: 4, .. })
        ));
    }

    #[test]
    fn missing_file_and_column() {
        assert!(matches!(
            load_csv("/nonexistent/x.csv", "t", &CsvSchema::with_label("y")),
            Err(Error::Io { .. })
        ));
        let f = write("a,b\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), "t", &CsvSchema::with_label("y")),
            Err(Error::MissingColumn { .. })
        ));
    }

    #[test]
    fn integer_labels_sort_numerically_and_feature_subset() {
        let f = write("a,b,y\n1,2,10\n3,4,2\n5,6,10\n");
        let schema = CsvSchema {
            label: "y".into(),
            features: Some(vec!["b".into()]),
            classes: None,
        };
        let ds = load_csv(f.path(), "t", &schema).unwrap();
        assert_eq!(ds.labels(), &[1, 0, 1]);
        assert_eq!(ds.d(), 1);
        assert_eq!(ds.features().get(2, 0), 6.0);
    }
}
