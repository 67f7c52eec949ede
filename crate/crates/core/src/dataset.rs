//! Ternary data model.
//!
//! Individuals are rows over {True, False, Unknown}; the optional label column
//! uses the same three states. The CSV wire format uses the tokens `1`, `0`
//! and `?`, a mandatory header row, an optional leading `id` column and an
//! optional `label` column anywhere after it.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};

/// Name of the reserved label column.
pub const LABEL_COLUMN: &str = "label";
/// Name of the reserved row identifier column.
pub const ID_COLUMN: &str = "id";

/// Open-world truth value of a membership assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ternary {
    True,
    False,
    Unknown,
}

impl Ternary {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Ternary::True
        } else {
            Ternary::False
        }
    }

    pub fn is_known(self) -> bool {
        self != Ternary::Unknown
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Ternary::True => Some(true),
            Ternary::False => Some(false),
            Ternary::Unknown => None,
        }
    }

    /// 1.0 / 0.0 for known values.
    pub fn as_f64(self) -> Option<f64> {
        self.as_bool().map(|b| if b { 1.0 } else { 0.0 })
    }

    pub fn negate(self) -> Self {
        match self {
            Ternary::True => Ternary::False,
            Ternary::False => Ternary::True,
            Ternary::Unknown => Ternary::Unknown,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Ternary::True => "1",
            Ternary::False => "0",
            Ternary::Unknown => "?",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s {
            "1" => Some(Ternary::True),
            "0" => Some(Ternary::False),
            "?" => Some(Ternary::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Ternary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Per-feature metadata: the imputation constant and the variance of the
/// known cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureInfo {
    pub name: String,
    pub prior: f64,
    pub known_variance: f64,
}

/// How imputation priors are assigned to features.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PriorStrategy {
    /// Frequency of True among known cells, clamped to `[0.01, 0.99]`.
    #[default]
    ObservedFrequency,
    /// 0.5 for every feature.
    Uninformative,
    /// The same constant for every feature.
    Constant(f64),
}

const PRIOR_MIN: f64 = 0.01;
const PRIOR_MAX: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct CsvLayout {
    has_ids: bool,
    /// Position of the label column among the non-id columns.
    label_index: Option<usize>,
}

/// An N×D ternary matrix with optional ternary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<FeatureInfo>,
    cells: Vec<Ternary>,
    labels: Option<Vec<Ternary>>,
    row_ids: Vec<String>,
    layout: CsvLayout,
}

/// Fraction of True among known cells and the number of known cells.
fn known_frequency(column: impl Iterator<Item = Ternary>) -> (Option<f64>, usize) {
    let (mut ones, mut known) = (0usize, 0usize);
    for v in column {
        match v {
            Ternary::True => {
                ones += 1;
                known += 1;
            }
            Ternary::False => known += 1,
            Ternary::Unknown => {}
        }
    }
    if known == 0 {
        (None, 0)
    } else {
        (Some(ones as f64 / known as f64), known)
    }
}

impl Dataset {
    /// Builds a dataset from row vectors. Priors follow
    /// [`PriorStrategy::ObservedFrequency`].
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<Ternary>>,
        labels: Option<Vec<Ternary>>,
        row_ids: Option<Vec<String>>,
    ) -> Result<Self> {
        let d = feature_names.len();
        let n = rows.len();
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(invalid("features", format!("duplicate feature name `{name}`")));
            }
        }
        let mut cells = Vec::with_capacity(n * d);
        for (t, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(invalid(
                    "rows",
                    format!("row {t} has {} cells, expected {d}", row.len()),
                ));
            }
            cells.extend(row);
        }
        if let Some(y) = &labels {
            crate::error::check_dim(n, y.len())?;
        }
        let has_ids = row_ids.is_some();
        let row_ids = match row_ids {
            Some(ids) => {
                crate::error::check_dim(n, ids.len())?;
                let mut seen = HashSet::new();
                for id in &ids {
                    if !seen.insert(id.as_str()) {
                        return Err(invalid("row_ids", format!("duplicate row id `{id}`")));
                    }
                }
                ids
            }
            None => (0..n).map(|t| t.to_string()).collect(),
        };
        let label_index = labels.as_ref().map(|_| d);
        let features = feature_names
            .into_iter()
            .map(|name| FeatureInfo {
                name,
                prior: 0.5,
                known_variance: 0.0,
            })
            .collect();
        let mut ds = Dataset {
            features,
            cells,
            labels,
            row_ids,
            layout: CsvLayout {
                has_ids,
                label_index,
            },
        };
        ds.refresh_statistics();
        ds.set_prior_strategy(PriorStrategy::ObservedFrequency)?;
        Ok(ds)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureInfo] {
        &self.features
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn row(&self, t: usize) -> &[Ternary] {
        let d = self.n_features();
        &self.cells[t * d..(t + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Ternary]> + '_ {
        (0..self.n_rows()).map(move |t| self.row(t))
    }

    pub fn cell(&self, t: usize, i: usize) -> Ternary {
        self.cells[t * self.n_features() + i]
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = Ternary> + '_ {
        let d = self.n_features();
        (0..self.n_rows()).map(move |t| self.cells[t * d + i])
    }

    pub fn labels(&self) -> Option<&[Ternary]> {
        self.labels.as_deref()
    }

    /// Label of row `t`, Unknown when the dataset carries no labels.
    pub fn label(&self, t: usize) -> Ternary {
        self.labels.as_ref().map_or(Ternary::Unknown, |y| y[t])
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn count_unknown_cells(&self) -> usize {
        self.cells.iter().filter(|v| !v.is_known()).count()
    }

    /// Replaces the labels; the label column is appended after the features
    /// when the dataset had none.
    pub fn with_labels(mut self, labels: Vec<Ternary>) -> Result<Self> {
        crate::error::check_dim(self.n_rows(), labels.len())?;
        if self.layout.label_index.is_none() {
            self.layout.label_index = Some(self.n_features());
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self.layout.label_index = None;
        self
    }

    /// Recomputes every feature prior with the given strategy.
    pub fn set_prior_strategy(&mut self, strategy: PriorStrategy) -> Result<()> {
        if let PriorStrategy::Constant(c) = strategy {
            if !(c > 0.0 && c < 1.0) {
                return Err(invalid("prior", format!("{c} is outside (0, 1)")));
            }
        }
        for i in 0..self.n_features() {
            let prior = match strategy {
                PriorStrategy::ObservedFrequency => known_frequency(self.column(i))
                    .0
                    .map_or(0.5, |p| p.clamp(PRIOR_MIN, PRIOR_MAX)),
                PriorStrategy::Uninformative => 0.5,
                PriorStrategy::Constant(c) => c,
            };
            self.features[i].prior = prior;
        }
        Ok(())
    }

    /// Overrides the imputation prior of one feature.
    pub fn set_prior(&mut self, feature: usize, prior: f64) -> Result<()> {
        if !(prior > 0.0 && prior < 1.0) {
            return Err(invalid("prior", format!("{prior} is outside (0, 1)")));
        }
        self.features[feature].prior = prior;
        Ok(())
    }

    fn refresh_statistics(&mut self) {
        for i in 0..self.n_features() {
            let (p, _) = known_frequency(self.column(i));
            self.features[i].known_variance = p.map_or(0.0, |p| p * (1.0 - p));
        }
    }

    /// Keeps the given rows, in the given order. Feature metadata is kept
    /// as is.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut cells = Vec::with_capacity(rows.len() * d);
        for &t in rows {
            cells.extend_from_slice(self.row(t));
        }
        Dataset {
            features: self.features.clone(),
            cells,
            labels: self
                .labels
                .as_ref()
                .map(|y| rows.iter().map(|&t| y[t]).collect()),
            row_ids: rows.iter().map(|&t| self.row_ids[t].clone()).collect(),
            layout: self.layout,
        }
    }

    /// Keeps the given feature columns, in the given order.
    pub fn select_features(&self, keep: &[usize]) -> Dataset {
        let mut cells = Vec::with_capacity(self.n_rows() * keep.len());
        for t in 0..self.n_rows() {
            let row = self.row(t);
            cells.extend(keep.iter().map(|&i| row[i]));
        }
        let layout = CsvLayout {
            has_ids: self.layout.has_ids,
            label_index: self.layout.label_index.map(|li| {
                // keep the label after the same features it followed before
                keep.iter().filter(|&&i| i < li).count()
            }),
        };
        Dataset {
            features: keep.iter().map(|&i| self.features[i].clone()).collect(),
            cells,
            labels: self.labels.clone(),
            row_ids: self.row_ids.clone(),
            layout,
        }
    }

    /// Serializes the dataset in the ternary CSV format, preserving the
    /// column layout it was loaded with.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let label_at = self.layout.label_index.filter(|_| self.labels.is_some());
        let mut header: Vec<&str> = Vec::with_capacity(self.n_features() + 2);
        if self.layout.has_ids {
            header.push(ID_COLUMN);
        }
        for (i, f) in self.features.iter().enumerate() {
            if label_at == Some(i) {
                header.push(LABEL_COLUMN);
            }
            header.push(&f.name);
        }
        if label_at == Some(self.n_features()) {
            header.push(LABEL_COLUMN);
        }
        w.write_record(&header).map_err(csv_write_error)?;
        for t in 0..self.n_rows() {
            let mut record: Vec<&str> = Vec::with_capacity(header.len());
            if self.layout.has_ids {
                record.push(&self.row_ids[t]);
            }
            for (i, v) in self.row(t).iter().enumerate() {
                if label_at == Some(i) {
                    record.push(self.label(t).token());
                }
                record.push(v.token());
            }
            if label_at == Some(self.n_features()) {
                record.push(self.label(t).token());
            }
            w.write_record(&record).map_err(csv_write_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Parses a ternary CSV document.
pub fn load_csv<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_read_error(e, 1))?,
        None => {
            return Err(Error::Csv {
                line: 1,
                column: 1,
                message: "missing header row".into(),
            })
        }
    };
    let mut seen = HashSet::new();
    for (c, name) in header.iter().enumerate() {
        if !seen.insert(name) {
            return Err(Error::Csv {
                line: 1,
                column: c + 1,
                message: format!("duplicate column `{name}`"),
            });
        }
    }
    let has_ids = header.get(0) == Some(ID_COLUMN);
    let data_start = usize::from(has_ids);
    let label_col = header.iter().position(|h| h == LABEL_COLUMN);
    let feature_cols: Vec<usize> = (data_start..header.len())
        .filter(|&c| Some(c) != label_col)
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&c| header[c].to_string()).collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_read_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Csv {
                line,
                column: record.len().min(header.len()) + 1,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let parse = |c: usize| -> Result<Ternary> {
            Ternary::parse_token(&record[c]).ok_or_else(|| Error::Csv {
                line,
                column: c + 1,
                message: format!("invalid cell `{}` (expected 1, 0 or ?)", &record[c]),
            })
        };
        let row = feature_cols.iter().map(|&c| parse(c)).collect::<Result<Vec<_>>>()?;
        if let Some(lc) = label_col {
            labels.push(parse(lc)?);
        }
        if has_ids {
            ids.push(record[0].to_string());
        }
        rows.push(row);
    }
    if has_ids {
        let mut seen = HashSet::new();
        for (t, id) in ids.iter().enumerate() {
            if !seen.insert(id.as_str()) {
                return Err(Error::Csv {
                    line: t as u64 + 2,
                    column: 1,
                    message: format!("duplicate row id `{id}`"),
                });
            }
        }
    }
    let mut ds = Dataset::new(
        feature_names,
        rows,
        label_col.map(|_| labels),
        has_ids.then_some(ids),
    )?;
    ds.layout.label_index = label_col.map(|lc| feature_cols.iter().filter(|&&c| c < lc).count());
    Ok(ds)
}

fn csv_read_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Csv {
        line,
        column: 0,
        message: e.to_string(),
    }
}

/// Keeps features whose known-cell variance `p(1-p)` strictly exceeds
/// `cutoff`. Columns without known cells are dropped.
pub fn variance_select(ds: &Dataset, cutoff: f64) -> Result<Dataset> {
    if !(0.0..=0.25).contains(&cutoff) {
        return Err(invalid("cutoff", format!("{cutoff} is outside [0, 0.25]")));
    }
    let keep: Vec<usize> = (0..ds.n_features())
        .filter(|&i| {
            let (p, known) = known_frequency(ds.column(i));
            known > 0 && p.is_some_and(|p| p * (1.0 - p) > cutoff)
        })
        .collect();
    Ok(ds.select_features(&keep))
}

/// Whether a soft cell came from the data or was filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Observed,
    Imputed,
}

/// N×D matrix of values in `[0, 1]`; observed cells are exactly 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl SoftMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>, provenance: Vec<Provenance>) -> Result<Self> {
        crate::error::check_dim(n * d, values.len())?;
        crate::error::check_dim(n * d, provenance.len())?;
        for (v, p) in values.iter().zip(&provenance) {
            if !(0.0..=1.0).contains(v) {
                return Err(invalid("values", format!("{v} is outside [0, 1]")));
            }
            if *p == Provenance::Observed && *v != 0.0 && *v != 1.0 {
                return Err(invalid("values", format!("observed cell holds {v}")));
            }
        }
        Ok(SoftMatrix {
            n,
            d,
            values,
            provenance,
        })
    }

    /// Builds from rows; cells equal to 0 or 1 are marked observed, the rest
    /// imputed.
    pub fn from_rows(rows: &[Vec<f64>], d: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            crate::error::check_dim(d, row.len())?;
            values.extend_from_slice(row);
        }
        let provenance = values
            .iter()
            .map(|&v| {
                if v == 0.0 || v == 1.0 {
                    Provenance::Observed
                } else {
                    Provenance::Imputed
                }
            })
            .collect();
        SoftMatrix::new(rows.len(), d, values, provenance)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.d..(t + 1) * self.d]
    }

    pub fn value(&self, t: usize, i: usize) -> f64 {
        self.values[t * self.d + i]
    }

    pub fn provenance(&self, t: usize, i: usize) -> Provenance {
        self.provenance[t * self.d + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn select_rows(&self, rows: &[usize]) -> SoftMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.d);
        let mut provenance = Vec::with_capacity(rows.len() * self.d);
        for &t in rows {
            values.extend_from_slice(self.row(t));
            provenance.extend_from_slice(&self.provenance[t * self.d..(t + 1) * self.d]);
        }
        SoftMatrix {
            n: rows.len(),
            d: self.d,
            values,
            provenance,
        }
    }

    pub(crate) fn from_dataset_with(ds: &Dataset, mut fill: impl FnMut(usize, usize) -> f64) -> Self {
        let (n, d) = (ds.n_rows(), ds.n_features());
        let mut values = Vec::with_capacity(n * d);
        let mut provenance = Vec::with_capacity(n * d);
        for t in 0..n {
            for (i, v) in ds.row(t).iter().enumerate() {
                match v.as_f64() {
                    Some(x) => {
                        values.push(x);
                        provenance.push(Provenance::Observed);
                    }
                    None => {
                        values.push(fill(t, i));
                        provenance.push(Provenance::Imputed);
                    }
                }
            }
        }
        SoftMatrix {
            n,
            d,
            values,
            provenance,
        }
    }
}

/// Replaces every Unknown cell with its column's imputation prior.
pub fn impute_constant(ds: &Dataset) -> SoftMatrix {
    SoftMatrix::from_dataset_with(ds, |_, i| ds.features()[i].prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Ternary::{False as F, True as T, Unknown as U};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn loads_minimal_document() {
        let ds = load_csv("f1,label\n1,1\n?,0\n".as_bytes()).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.n_features(), 1);
        assert_eq!(ds.row(0), &[T]);
        assert_eq!(ds.row(1), &[U]);
        assert_eq!(ds.labels().unwrap(), &[T, F]);
    }

    #[test]
    fn header_only_gives_empty_dataset() {
        let ds = load_csv("a,b,c\n".as_bytes()).unwrap();
        assert_eq!(ds.n_rows(), 0);
        assert_eq!(ds.n_features(), 3);
        assert!(ds.labels().is_none());
    }

    #[test]
    fn malformed_token_reports_line() {
        let err = load_csv("f1,f2\n1,0\n2,0\n".as_bytes()).unwrap_err();
        match err {
            Error::Csv { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row_and_duplicate_header_are_rejected() {
        assert!(matches!(
            load_csv("f1,f2\n1\n".as_bytes()),
            Err(Error::Csv { line: 2, .. })
        ));
        assert!(matches!(
            load_csv("f1,f1\n1,0\n".as_bytes()),
            Err(Error::Csv { line: 1, column: 2, .. })
        ));
        assert!(load_csv("id,f\na,1\na,0\n".as_bytes()).is_err());
    }

    #[test]
    fn id_column_and_label_position_round_trip() {
        let text = "id,label,f1,f2\nx,1,1,?\ny,?,0,1\n";
        let ds = load_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.row_ids(), &["x".to_string(), "y".to_string()]);
        assert_eq!(ds.to_csv_string(), text);
    }

    #[test]
    fn default_prior_is_clamped_observed_frequency() {
        let ds = Dataset::new(
            names(&["a", "b", "c"]),
            vec![vec![T, T, U], vec![U, T, U], vec![F, T, U], vec![T, T, U]],
            None,
            None,
        )
        .unwrap();
        assert!((ds.features()[0].prior - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ds.features()[1].prior, 0.99);
        assert_eq!(ds.features()[2].prior, 0.5);
    }

    #[test]
    fn variance_selection_examples() {
        let ds = Dataset::new(
            names(&["const", "half", "mixed", "blank"]),
            vec![
                vec![T, T, T, U],
                vec![T, F, U, U],
                vec![T, T, F, U],
                vec![T, F, T, U],
            ],
            None,
            None,
        )
        .unwrap();
        let kept = variance_select(&ds, 0.1).unwrap();
        assert_eq!(kept.feature_names(), names(&["half", "mixed"]));
        // p = 2/3 over known cells, variance 2/9
        assert!((kept.features()[1].known_variance - 2.0 / 9.0).abs() < 1e-15);
        let kept = variance_select(&ds, 0.2).unwrap();
        assert_eq!(kept.feature_names(), names(&["half", "mixed"]));
        let kept = variance_select(&ds, 0.23).unwrap();
        assert_eq!(kept.feature_names(), names(&["half"]));
        let kept = variance_select(&ds, 0.0).unwrap();
        assert_eq!(kept.feature_names(), names(&["half", "mixed"]));
        assert!(variance_select(&ds, 0.3).is_err());
    }

    #[test]
    fn constant_imputation() {
        let mut ds = Dataset::new(names(&["a"]), vec![vec![T], vec![U], vec![F], vec![T]], None, None)
            .unwrap();
        let soft = impute_constant(&ds);
        assert!((soft.value(1, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(soft.provenance(1, 0), Provenance::Imputed);
        assert_eq!(soft.value(0, 0), 1.0);
        assert_eq!(soft.provenance(0, 0), Provenance::Observed);

        ds.set_prior_strategy(PriorStrategy::Constant(0.5)).unwrap();
        assert_eq!(impute_constant(&ds).value(1, 0), 0.5);
    }

    #[test]
    fn imputation_without_unknowns_is_a_cast() {
        let ds = Dataset::new(names(&["a", "b"]), vec![vec![T, F], vec![F, F]], None, None).unwrap();
        let soft = impute_constant(&ds);
        assert_eq!(soft.values(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn soft_matrix_rejects_fractional_observed_cells() {
        assert!(SoftMatrix::new(1, 1, vec![0.5], vec![Provenance::Observed]).is_err());
        assert!(SoftMatrix::new(1, 1, vec![1.5], vec![Provenance::Imputed]).is_err());
    }
}
