//! Multivariate time series ingestion and transformation.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A `T x d` matrix of observations, one row per date.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    names: Vec<String>,
    time_labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        values: DMatrix<f64>,
        names: Vec<String>,
        time_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Empty("dataset has no observations".into()));
        }
        if names.len() != values.ncols() {
            return Err(Error::Dimension(format!(
                "{} series names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (row, col) = (idx % values.nrows(), idx / values.nrows());
            return Err(Error::Parse {
                row: row + 1,
                column: names[col].clone(),
                value: values[(row, col)].to_string(),
            });
        }
        if let Some(labels) = &time_labels {
            if labels.len() != values.nrows() {
                return Err(Error::Dimension(format!(
                    "{} time labels for {} rows",
                    labels.len(),
                    values.nrows()
                )));
            }
        }
        Ok(Self {
            values,
            names,
            time_labels,
        })
    }

    /// Dataset with generated names `x1, x2, ...` and no time labels.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let names = (1..=values.ncols()).map(|i| format!("x{i}")).collect();
        Self::new(values, names, None)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn time_labels(&self) -> Option<&[String]> {
        self.time_labels.as_deref()
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// Number of series `d`.
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Keeps the named columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, columns: &[S]) -> Result<Self> {
        let idx = columns
            .iter()
            .map(|c| {
                let c = c.as_ref();
                self.names
                    .iter()
                    .position(|n| n == c)
                    .ok_or_else(|| Error::UnknownColumn(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = self.values.select_columns(&idx);
        let names = idx.iter().map(|&i| self.names[i].clone()).collect();
        Self::new(values, names, self.time_labels.clone())
    }

    /// Subtracts each column's sample mean.
    pub fn demean(&self) -> Self {
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        Self {
            values,
            names: self.names.clone(),
            time_labels: self.time_labels.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Name of a column holding date labels; excluded from the values.
    pub time_column: Option<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            time_column: None,
        }
    }
}

pub fn load_csv<P: AsRef<Path>>(path: P, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, options)
}

/// Parses CSV from any reader. Rows are numbered from 1, counting data rows
/// only.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::Empty("csv file has no rows".into())),
    };
    let width = first.len();
    let (header, pending): (Vec<String>, Option<csv::StringRecord>) = if options.has_header {
        (first.iter().map(str::to_string).collect(), None)
    } else {
        ((1..=width).map(|i| format!("x{i}")).collect(), Some(first))
    };

    let time_idx = match &options.time_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))?,
        ),
        None => None,
    };
    let value_cols: Vec<usize> = (0..width).filter(|&c| Some(c) != time_idx).collect();
    if value_cols.is_empty() {
        return Err(Error::Empty("csv file has no value columns".into()));
    }
    let names: Vec<String> = value_cols.iter().map(|&c| header[c].clone()).collect();
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for record in pending.into_iter().map(Ok).chain(records) {
        let record = record?;
        rows += 1;
        if record.len() != width {
            return Err(Error::Ragged {
                row: rows,
                expected: width,
                found: record.len(),
            });
        }
        for &c in &value_cols {
            let cell = &record[c];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => data.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: rows,
                        column: header[c].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        if let Some(t) = time_idx {
            labels.push(record[t].to_string());
        }
    }
    if rows == 0 {
        return Err(Error::Empty(
            "csv file has a header but no data rows".into(),
        ));
    }
    let values = DMatrix::from_row_slice(rows, value_cols.len(), &data);
    Dataset::new(values, names, time_idx.map(|_| labels))
}

/// Writes a dataset as CSV using shortest round-trip float formatting.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = Vec::with_capacity(ds.dim() + 1);
    if ds.time_labels.is_some() {
        header.push("time".to_string());
    }
    header.extend(ds.names.iter().cloned());
    wtr.write_record(&header)?;
    for t in 0..ds.len() {
        let mut row = Vec::with_capacity(header.len());
        if let Some(labels) = &ds.time_labels {
            row.push(labels[t].clone());
        }
        row.extend(ds.values.row(t).iter().map(|v| format!("{v:?}")));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// `order`-th difference of every series. Names gain a `Δ` prefix per
/// differencing pass; time labels keep the trailing dates.
pub fn difference(ds: &Dataset, order: usize) -> Result<Dataset> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "difference order must be positive".into(),
        ));
    }
    if order >= ds.len() {
        return Err(Error::InsufficientSample(format!(
            "cannot take difference of order {order} of a series of length {}",
            ds.len()
        )));
    }
    let mut values = ds.values.clone();
    for k in 0..order {
        let n = values.nrows();
        values = values.rows(1, n - 1) - values.rows(0, n - 1);
        debug_assert_eq!(values.nrows(), ds.len() - k - 1);
    }
    let prefix = "Δ".repeat(order);
    let names = ds.names.iter().map(|n| format!("{prefix}{n}")).collect();
    let labels = ds.time_labels.as_ref().map(|l| l[order..].to_vec());
    Dataset::new(values, names, labels)
}

/// Block split `X_t = (X_1t', X_2t')'` with `X_1t` the leading `d1` series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub d1: usize,
    pub d2: usize,
}

impl Partition {
    pub fn new(d: usize, d1: usize) -> Result<Self> {
        if d1 == 0 || d1 >= d {
            return Err(Error::InvalidArgument(format!(
                "d1 must satisfy 1 <= d1 < d = {d}, got {d1}"
            )));
        }
        Ok(Self { d1, d2: d - d1 })
    }

    pub fn dim(&self) -> usize {
        self.d1 + self.d2
    }

    /// Dimension `d1 * d2` of the cross-covariance vector.
    pub fn cross_dim(&self) -> usize {
        self.d1 * self.d2
    }
}

pub fn select_partition(ds: &Dataset, d1: usize) -> Result<Partition> {
    Partition::new(ds.dim(), d1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), &CsvOptions::default())
    }

    fn column(v: &[f64]) -> Dataset {
        Dataset::from_matrix(DMatrix::from_column_slice(v.len(), 1, v)).unwrap()
    }

    #[test]
    fn reads_small_file() {
        let ds = parse("a,b\n1,2\n3,4\n5,6").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.names(), ["a", "b"]);
        assert_eq!(ds.values()[(2, 1)], 6.0);
    }

    #[test]
    fn bad_cell_names_row() {
        let err = parse("a,b\n1,2\n3,x\n5,6").unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_empty_and_duplicates() {
        assert!(matches!(
            parse("a,b\n1,2\n3\n"),
            Err(Error::Ragged { row: 2, .. })
        ));
        assert!(matches!(parse(""), Err(Error::Empty(_))));
        assert!(matches!(parse("a,b\n"), Err(Error::Empty(_))));
        assert!(matches!(
            parse("a,a\n1,2\n"),
            Err(Error::DuplicateColumn(_))
        ));
        assert!(matches!(parse("a,b\n1,nan\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("a,b\n1,inf\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn time_column_is_excluded() {
        let opts = CsvOptions {
            time_column: Some("date".into()),
            ..CsvOptions::default()
        };
        let ds = read_csv("date,m1,ppi\n1979-04,1,2\n1979-05,3,4\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.names(), ["m1", "ppi"]);
        assert_eq!(ds.time_labels().unwrap(), ["1979-04", "1979-05"]);
        let d = difference(&ds, 1).unwrap();
        assert_eq!(d.time_labels().unwrap(), ["1979-05"]);
        assert_eq!(d.names(), ["Δm1", "Δppi"]);
    }

    #[test]
    fn headerless_and_semicolon() {
        let opts = CsvOptions {
            delimiter: b';',
            has_header: false,
            time_column: None,
        };
        let ds = read_csv("1;2\n3;4\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.names(), ["x1", "x2"]);
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn differences() {
        let ds = column(&[1.0, 3.0, 6.0]);
        assert_eq!(difference(&ds, 1).unwrap().values().as_slice(), &[2.0, 3.0]);
        assert_eq!(difference(&ds, 2).unwrap().values().as_slice(), &[1.0]);
        assert!(difference(&ds, 3).is_err());
        let flat = column(&[5.0; 4]);
        assert_eq!(difference(&flat, 1).unwrap().values().as_slice(), &[0.0; 3]);
    }

    #[test]
    fn partitions() {
        let two = Partition::new(2, 1).unwrap();
        assert_eq!((two.d1, two.d2), (1, 1));
        let five = Partition::new(5, 2).unwrap();
        assert_eq!((five.d1, five.d2), (2, 3));
        assert!(Partition::new(2, 2).is_err());
        assert!(Partition::new(2, 0).is_err());
    }

    #[test]
    fn column_reorder_and_demean() {
        let ds = parse("a,b,c\n1,2,3\n3,4,5\n").unwrap();
        let r = ds.select_columns(&["c", "a"]).unwrap();
        assert_eq!(r.names(), ["c", "a"]);
        assert_eq!(r.values()[(1, 0)], 5.0);
        assert!(matches!(
            ds.select_columns(&["z"]),
            Err(Error::UnknownColumn(_))
        ));
        let m = ds.demean();
        assert_eq!(m.values().column(0).as_slice(), &[-1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn repeated_first_difference_equals_second(v in proptest::collection::vec(-1e6f64..1e6, 3..40)) {
            let ds = column(&v);
            let twice = difference(&difference(&ds, 1).unwrap(), 1).unwrap();
            let direct = difference(&ds, 2).unwrap();
            prop_assert_eq!(twice.values(), direct.values());
        }

        #[test]
        fn csv_round_trip_is_exact(
            rows in proptest::collection::vec(proptest::collection::vec(proptest::num::f64::NORMAL, 3), 1..20)
        ) {
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            let ds = Dataset::from_matrix(DMatrix::from_row_slice(rows.len(), 3, &flat)).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf).unwrap();
            let back = read_csv(buf.as_slice(), &CsvOptions::default()).unwrap();
            prop_assert_eq!(back.values(), ds.values());
        }
    }
}
