//! Tabular datasets, CSV ingestion and z-score standardization.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major real matrix.
pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    BinaryIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    pub label_name: String,
    pub id_name: Option<String>,
}

impl FeatureSchema {
    pub fn new(
        feature_names: Vec<String>,
        feature_kinds: Vec<FeatureKind>,
        label_name: impl Into<String>,
        id_name: Option<String>,
    ) -> Result<Self> {
        let schema = FeatureSchema {
            feature_names,
            feature_kinds,
            label_name: label_name.into(),
            id_name,
        };
        schema.validate()?;
        Ok(schema)
    }

    /// All features continuous.
    pub fn continuous<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        label_name: impl Into<String>,
        id_name: Option<String>,
    ) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let kinds = vec![FeatureKind::Continuous; names.len()];
        Self::new(names, kinds, label_name, id_name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_names.is_empty() {
            return Err(Error::Schema("at least one feature is required".into()));
        }
        if self.feature_names.len() != self.feature_kinds.len() {
            return Err(Error::Schema(format!(
                "{} feature names but {} feature kinds",
                self.feature_names.len(),
                self.feature_kinds.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature `{name}`")));
            }
        }
        if seen.contains(self.label_name.as_str()) {
            return Err(Error::Schema(format!(
                "label `{}` is also listed as a feature",
                self.label_name
            )));
        }
        if let Some(id) = &self.id_name {
            if seen.contains(id.as_str()) || *id == self.label_name {
                return Err(Error::Schema(format!("id column `{id}` collides with another column")));
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub rows: Matrix,
    /// 1 = success.
    pub labels: Vec<u8>,
    pub ids: Vec<String>,
    /// Marks rows created by a resampler.
    pub synthetic: Vec<bool>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, rows: Matrix, labels: Vec<u8>, ids: Vec<String>) -> Result<Self> {
        let synthetic = vec![false; rows.len()];
        let data = Dataset {
            schema,
            rows,
            labels,
            ids,
            synthetic,
        };
        data.validate()?;
        Ok(data)
    }

    /// Builds a dataset whose ids are the 0-based row indices.
    pub fn with_row_ids(schema: FeatureSchema, rows: Matrix, labels: Vec<u8>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(schema, rows, labels, ids)
    }

    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        let n = self.rows.len();
        if self.labels.len() != n || self.ids.len() != n || self.synthetic.len() != n {
            return Err(Error::Data(format!(
                "{} rows, {} labels, {} ids, {} synthetic flags",
                n,
                self.labels.len(),
                self.ids.len(),
                self.synthetic.len()
            )));
        }
        let d = self.schema.n_features();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "row {r}: non-finite value in `{}`",
                        self.schema.feature_names[c]
                    )));
                }
                if self.schema.feature_kinds[c] == FeatureKind::BinaryIndicator && v != 0.0 && v != 1.0 {
                    return Err(Error::Data(format!(
                        "row {r}: indicator `{}` holds {v}",
                        self.schema.feature_names[c]
                    )));
                }
            }
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l > 1) {
            return Err(Error::Data(format!("label {bad} is not binary")));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn success_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn success_rate(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.success_count() as f64 / self.rows.len() as f64
        }
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            synthetic: indices.iter().map(|&i| self.synthetic[i]).collect(),
        }
    }
}

/// Feature rows read from a file without labels.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledRows {
    pub ids: Vec<String>,
    pub rows: Matrix,
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn read_header(reader: &mut csv::Reader<std::fs::File>, path: &Path) -> Result<HashMap<String, usize>> {
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if index.insert(h.to_string(), i).is_some() {
            return Err(Error::Schema(format!("duplicate column `{h}`")));
        }
    }
    Ok(index)
}

fn column(index: &HashMap<String, usize>, name: &str) -> Result<usize> {
    index.get(name).copied().ok_or_else(|| Error::MissingColumn {
        column: name.to_string(),
    })
}

fn parse_cell(raw: &str, row: usize, column: &str, kind: FeatureKind) -> Result<f64> {
    let cell_err = |reason: &str| Error::Cell {
        row,
        column: column.to_string(),
        value: raw.to_string(),
        reason: reason.to_string(),
    };
    if raw.is_empty() {
        return Err(cell_err("missing value"));
    }
    let v: f64 = raw.parse().map_err(|_| cell_err("not a number"))?;
    if !v.is_finite() {
        return Err(cell_err("non-finite value"));
    }
    if kind == FeatureKind::BinaryIndicator && v != 0.0 && v != 1.0 {
        return Err(cell_err("indicator must be 0 or 1"));
    }
    Ok(v)
}

fn parse_label(raw: &str, row: usize) -> Result<u8> {
    match raw.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(Error::Label {
            row,
            value: raw.to_string(),
        }),
    }
}

fn record_row(record: csv::Result<csv::StringRecord>, row: usize) -> Result<csv::StringRecord> {
    record.map_err(|e| Error::Data(format!("row {row}: {e}")))
}

/// Reads a labeled CSV. Rows are numbered from 1, header excluded.
pub fn ingest_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    schema.validate()?;
    let mut reader = open_reader(path)?;
    let index = read_header(&mut reader, path)?;
    let feature_cols = schema
        .feature_names
        .iter()
        .map(|n| column(&index, n))
        .collect::<Result<Vec<_>>>()?;
    let label_col = column(&index, &schema.label_name)?;
    let id_col = schema.id_name.as_deref().map(|n| column(&index, n)).transpose()?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row_no = i + 1;
        let record = record_row(record, row_no)?;
        let mut row = Vec::with_capacity(feature_cols.len());
        for (f, &col) in feature_cols.iter().enumerate() {
            row.push(parse_cell(
                record.get(col).unwrap_or(""),
                row_no,
                &schema.feature_names[f],
                schema.feature_kinds[f],
            )?);
        }
        labels.push(parse_label(record.get(label_col).unwrap_or(""), row_no)?);
        ids.push(match id_col {
            Some(col) => record.get(col).unwrap_or("").to_string(),
            None => i.to_string(),
        });
        rows.push(row);
    }
    Dataset::new(schema.clone(), rows, labels, ids)
}

/// Reads feature rows for classification. The label and id columns may be
/// present; any other column that is not a schema feature is rejected.
pub fn ingest_unlabeled_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<UnlabeledRows> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let index = read_header(&mut reader, path)?;
    let mut columns: Vec<(&String, &usize)> = index.iter().collect();
    columns.sort_by_key(|(_, &i)| i);
    for (name, _) in columns {
        let known = schema.feature_index(name).is_some()
            || *name == schema.label_name
            || schema.id_name.as_deref() == Some(name.as_str());
        if !known {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }
    let feature_cols = schema
        .feature_names
        .iter()
        .map(|n| column(&index, n))
        .collect::<Result<Vec<_>>>()?;
    let id_col = schema.id_name.as_deref().and_then(|n| index.get(n).copied());

    let mut out = UnlabeledRows {
        ids: Vec::new(),
        rows: Vec::new(),
    };
    for (i, record) in reader.records().enumerate() {
        let row_no = i + 1;
        let record = record_row(record, row_no)?;
        let mut row = Vec::with_capacity(feature_cols.len());
        for (f, &col) in feature_cols.iter().enumerate() {
            row.push(parse_cell(
                record.get(col).unwrap_or(""),
                row_no,
                &schema.feature_names[f],
                schema.feature_kinds[f],
            )?);
        }
        out.ids.push(match id_col {
            Some(col) => record.get(col).unwrap_or("").to_string(),
            None => i.to_string(),
        });
        out.rows.push(row);
    }
    Ok(out)
}

/// Derives a schema from a CSV header: every column other than the label and
/// id is a feature, and a feature whose values are all 0 or 1 is an indicator.
pub fn infer_schema(path: impl AsRef<Path>, label_name: &str, id_name: Option<&str>) -> Result<FeatureSchema> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let index = read_header(&mut reader, path)?;
    column(&index, label_name)?;
    if let Some(id) = id_name {
        column(&index, id)?;
    }
    let mut columns: Vec<(String, usize)> = index.into_iter().collect();
    columns.sort_by_key(|(_, i)| *i);
    let features: Vec<(String, usize)> = columns
        .into_iter()
        .filter(|(n, _)| n != label_name && Some(n.as_str()) != id_name)
        .collect();
    let mut binary = vec![true; features.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record_row(record, i + 1)?;
        for (f, (_, col)) in features.iter().enumerate() {
            if binary[f] {
                let cell = record.get(*col).unwrap_or("");
                binary[f] = matches!(cell.parse::<f64>(), Ok(v) if v == 0.0 || v == 1.0);
            }
        }
    }
    let kinds = binary
        .into_iter()
        .map(|b| {
            if b {
                FeatureKind::BinaryIndicator
            } else {
                FeatureKind::Continuous
            }
        })
        .collect();
    FeatureSchema::new(
        features.into_iter().map(|(n, _)| n).collect(),
        kinds,
        label_name,
        id_name.map(str::to_string),
    )
}

/// Writes the dataset as CSV: id column (when the schema names one), features, label.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let to_err = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    let mut header: Vec<&str> = Vec::new();
    if let Some(id) = &data.schema.id_name {
        header.push(id);
    }
    header.extend(data.schema.feature_names.iter().map(String::as_str));
    header.push(&data.schema.label_name);
    writer.write_record(&header).map_err(to_err)?;
    for (i, row) in data.rows.iter().enumerate() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if data.schema.id_name.is_some() {
            record.push(data.ids[i].clone());
        }
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(data.labels[i].to_string());
        writer.write_record(&record).map_err(to_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub means: Vec<f64>,
    /// Population standard deviations.
    pub stddevs: Vec<f64>,
    pub constant_mask: Vec<bool>,
}

/// Per-column mean and population standard deviation.
pub fn fit_standardizer(data: &Dataset) -> Result<StandardizationStats> {
    fit_rows(&data.rows)
}

pub(crate) fn fit_rows(rows: &[Vec<f64>]) -> Result<StandardizationStats> {
    let first = rows
        .first()
        .ok_or(Error::Empty("cannot standardize an empty dataset"))?;
    let d = first.len();
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    let mut stddevs = vec![0.0; d];
    let mut constant_mask = vec![false; d];
    for j in 0..d {
        let constant = rows.iter().all(|r| r[j] == first[j]);
        if constant {
            means[j] = first[j];
            constant_mask[j] = true;
            continue;
        }
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        means[j] = mean;
        stddevs[j] = var.sqrt();
        if stddevs[j] == 0.0 {
            constant_mask[j] = true;
        }
    }
    Ok(StandardizationStats {
        means,
        stddevs,
        constant_mask,
    })
}

impl StandardizationStats {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                if self.constant_mask[j] {
                    0.0
                } else {
                    (x - self.means[j]) / self.stddevs[j]
                }
            })
            .collect())
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Matrix> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Maps a z value of feature `j` back to raw units.
    pub fn to_raw(&self, j: usize, z: f64) -> f64 {
        if self.constant_mask[j] {
            self.means[j]
        } else {
            self.means[j] + z * self.stddevs[j]
        }
    }
}

/// Standardizes every row of `data`.
pub fn transform(data: &Dataset, stats: &StandardizationStats) -> Result<Matrix> {
    stats.transform_rows(&data.rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    fn ab_schema() -> FeatureSchema {
        FeatureSchema::continuous(["a", "b"], "y", None).unwrap()
    }

    #[test]
    fn ingest_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "b,y,a\n1,0,2\n3,1,4\n5,0,6\n");
        let data = ingest_csv(&path, &ab_schema()).unwrap();
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.n_features(), 2);
        assert_eq!(data.rows[1], vec![4.0, 3.0]);
        assert_eq!(data.labels, vec![0, 1, 0]);
        assert_eq!(data.ids, vec!["0", "1", "2"]);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,y\n1,0\n");
        let err = ingest_csv(&path, &ab_schema()).unwrap_err();
        assert!(
            matches!(&err, Error::MissingColumn { column } if column == "b"),
            "{err}"
        );
    }

    #[test]
    fn bad_label_cites_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,y\n1,1,0\n1,1,1\n1,1,0\n1,1,1\n1,1,2\n");
        let err = ingest_csv(&path, &ab_schema()).unwrap_err();
        assert!(matches!(&err, Error::Label { row: 5, value } if value == "2"), "{err}");
    }

    #[test]
    fn bad_cell_cites_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,y\n1,1,0\n1,x,1\n");
        match ingest_csv(&path, &ab_schema()).unwrap_err() {
            Error::Cell { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
            }
            e => panic!("unexpected {e}"),
        }
        let path = write_file(&dir, "e.csv", "a,b,y\n1,,0\n");
        assert!(matches!(
            ingest_csv(&path, &ab_schema()),
            Err(Error::Cell { row: 1, .. })
        ));
        let path = write_file(&dir, "f.csv", "a,b,y\nNaN,1,0\n");
        assert!(matches!(ingest_csv(&path, &ab_schema()), Err(Error::Cell { .. })));
    }

    #[test]
    fn indicator_rejects_non_binary() {
        let schema = FeatureSchema::new(vec!["a".into()], vec![FeatureKind::BinaryIndicator], "y", None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,y\n1,0\n0.5,1\n");
        assert!(matches!(ingest_csv(&path, &schema), Err(Error::Cell { row: 2, .. })));
    }

    #[test]
    fn schema_invariants() {
        assert!(FeatureSchema::continuous(Vec::<String>::new(), "y", None).is_err());
        assert!(FeatureSchema::continuous(["a", "a"], "y", None).is_err());
        assert!(FeatureSchema::continuous(["a", "y"], "y", None).is_err());
        assert!(FeatureSchema::continuous(["a"], "y", Some("a".into())).is_err());
    }

    #[test]
    fn infer_marks_indicators() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "id,x,flag,y\nr1,0.5,1,0\nr2,2,0,1\n");
        let schema = infer_schema(&path, "y", Some("id")).unwrap();
        assert_eq!(schema.feature_names, vec!["x", "flag"]);
        assert_eq!(
            schema.feature_kinds,
            vec![FeatureKind::Continuous, FeatureKind::BinaryIndicator]
        );
        let data = ingest_csv(&path, &schema).unwrap();
        assert_eq!(data.ids, vec!["r1", "r2"]);
    }

    #[test]
    fn unlabeled_rejects_unknown_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,zzz\n1,2,3\n");
        assert!(matches!(
            ingest_unlabeled_csv(&path, &ab_schema()),
            Err(Error::UnknownFeature(c)) if c == "zzz"
        ));
        let path = write_file(&dir, "e.csv", "a,y\n1,0\n");
        assert!(matches!(
            ingest_unlabeled_csv(&path, &ab_schema()),
            Err(Error::MissingColumn { column }) if column == "b"
        ));
        let path = write_file(&dir, "f.csv", "b,a,y\n1,2,0\n");
        let rows = ingest_unlabeled_csv(&path, &ab_schema()).unwrap();
        assert_eq!(rows.rows, vec![vec![2.0, 1.0]]);
    }

    fn column_data(values: &[f64]) -> Dataset {
        let schema = FeatureSchema::continuous(["x"], "y", None).unwrap();
        let rows = values.iter().map(|&v| vec![v]).collect();
        Dataset::with_row_ids(schema, rows, vec![0; values.len()]).unwrap()
    }

    #[test]
    fn standardizer_examples() {
        let stats = fit_standardizer(&column_data(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(stats.means[0], 2.0);
        assert!((stats.stddevs[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((stats.stddevs[0] - 0.8165).abs() < 1e-4);
        let z = stats.transform_row(&[3.0]).unwrap();
        assert!((z[0] - 1.224744871391589).abs() < 1e-12);
        assert_eq!(stats.transform_row(&[2.0]).unwrap(), vec![0.0]);

        let stats = fit_standardizer(&column_data(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(
            (stats.means[0], stats.stddevs[0], stats.constant_mask[0]),
            (5.0, 0.0, true)
        );
        assert_eq!(stats.transform_row(&[123.0]).unwrap(), vec![0.0]);

        let stats = fit_standardizer(&column_data(&[0.0, 1.0])).unwrap();
        assert_eq!((stats.means[0], stats.stddevs[0]), (0.5, 0.5));

        // repeated 0.1 has a rounding-prone mean but is still constant
        let stats = fit_standardizer(&column_data(&[0.1, 0.1, 0.1])).unwrap();
        assert!(stats.constant_mask[0]);
    }

    #[test]
    fn standardizer_errors() {
        let empty = column_data(&[]);
        assert!(matches!(fit_standardizer(&empty), Err(Error::Empty(_))));
        let stats = fit_standardizer(&column_data(&[1.0, 2.0])).unwrap();
        assert!(matches!(
            stats.transform_row(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn standardized_columns_have_unit_moments(
                values in prop::collection::vec(-1e3f64..1e3, 2..60)
            ) {
                let data = column_data(&values);
                let stats = fit_standardizer(&data).unwrap();
                prop_assume!(!stats.constant_mask[0]);
                let z: Vec<f64> = transform(&data, &stats).unwrap().into_iter().map(|r| r[0]).collect();
                let n = z.len() as f64;
                let mean = z.iter().sum::<f64>() / n;
                let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!((sd - 1.0).abs() < 1e-9);
            }

            #[test]
            fn csv_round_trip_is_exact(
                rows in prop::collection::vec((-1e6f64..1e6, 0u8..2, 0u8..2), 1..40)
            ) {
                let schema = FeatureSchema::new(
                    vec!["x".into(), "flag".into()],
                    vec![FeatureKind::Continuous, FeatureKind::BinaryIndicator],
                    "y",
                    Some("id".into()),
                ).unwrap();
                let data = Dataset::new(
                    schema.clone(),
                    rows.iter().map(|&(x, f, _)| vec![x, f as f64]).collect(),
                    rows.iter().map(|&(_, _, y)| y).collect(),
                    (0..rows.len()).map(|i| format!("rec{i}")).collect(),
                ).unwrap();
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("rt.csv");
                write_csv(&data, &path).unwrap();
                prop_assert_eq!(ingest_csv(&path, &schema).unwrap(), data);
            }
        }
    }
}
