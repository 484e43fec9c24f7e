//! Rectangular numeric data tables read from and written to CSV.
//!
//! Cells are `f64`; missing values (empty cells, `NA`, `NaN`, `.`) are stored
//! as NaN and removed by listwise deletion before any model sees the data.

use crate::error::{Error, Result};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct PanelTable {
    headers: Vec<String>,
    /// Column-major storage; every column has `n_rows` entries.
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

fn parse_cell(raw: &str) -> Result<f64> {
    let s = raw.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") || s == "." {
        return Ok(f64::NAN);
    }
    s.parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse `{s}` as a number")))
}

impl PanelTable {
    pub fn from_columns(headers: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if headers.len() != columns.len() {
            return Err(Error::InvalidArgument(
                "header count does not match column count".into(),
            ));
        }
        if headers.is_empty() {
            return Err(Error::Degenerate("table has no columns".into()));
        }
        let n_rows = columns[0].len();
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::InvalidArgument("columns have unequal lengths".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate column `{h}`")));
            }
        }
        Ok(Self { headers, columns, n_rows })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| {
                if e.is_io_error() {
                    match e.into_kind() {
                        csv::ErrorKind::Io(source) => {
                            Error::Io { path: path.display().to_string(), source }
                        }
                        _ => unreachable!("is_io_error guaranteed an io kind"),
                    }
                } else {
                    Error::Csv { path: path.display().to_string(), message: e.to_string() }
                }
            })?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?
            .iter()
            .map(|h| h.to_string())
            .collect();
        if headers.is_empty() {
            return Err(Error::Csv {
                path: path.display().to_string(),
                message: "no header row".into(),
            });
        }
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
        for (row_idx, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Csv {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            if record.len() != headers.len() {
                return Err(Error::Csv {
                    path: path.display().to_string(),
                    message: format!(
                        "row {} has {} fields, expected {}",
                        row_idx + 2,
                        record.len(),
                        headers.len()
                    ),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                let v = parse_cell(cell).map_err(|_| Error::Csv {
                    path: path.display().to_string(),
                    message: format!("row {}, column `{}`: cannot parse `{}`", row_idx + 2, headers[j], cell),
                })?;
                columns[j].push(v);
            }
        }
        let n_rows = columns[0].len();
        let mut seen = std::collections::HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::Csv {
                    path: path.display().to_string(),
                    message: format!("duplicate column `{h}`"),
                });
            }
        }
        Ok(Self { headers, columns, n_rows })
    }

    /// Values are written with `{:?}`-style shortest round-trip formatting, so
    /// a write/read cycle is bit-exact and repeated writes are byte-identical.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
        writer
            .write_record(&self.headers)
            .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
        let mut record = Vec::with_capacity(self.headers.len());
        for i in 0..self.n_rows {
            record.clear();
            for col in &self.columns {
                let v = col[i];
                record.push(if v.is_nan() { "NA".to_string() } else { format!("{v:?}") });
            }
            writer.write_record(&record).map_err(|e| Error::Csv {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
        writer
            .flush()
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        let idx = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok(&self.columns[idx])
    }

    /// Indices of rows where every listed column is finite (listwise deletion).
    pub fn complete_rows(&self, names: &[&str]) -> Result<Vec<usize>> {
        let cols: Vec<&[f64]> = names.iter().map(|n| self.column(n)).collect::<Result<_>>()?;
        Ok((0..self.n_rows)
            .filter(|&i| cols.iter().all(|c| c[i].is_finite()))
            .collect())
    }

    /// Errors if the column takes any value other than exactly 0.0 or 1.0 on
    /// the given rows.
    pub fn require_binary(&self, name: &str, rows: &[usize]) -> Result<()> {
        let col = self.column(name)?;
        for &i in rows {
            let v = col[i];
            if v != 0.0 && v != 1.0 {
                return Err(Error::NotBinary { column: name.to_string(), row: i, value: v });
            }
        }
        Ok(())
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.n_rows {
            return Err(Error::InvalidArgument(format!(
                "new column `{name}` has {} values, table has {} rows",
                values.len(),
                self.n_rows
            )));
        }
        if self.has_column(name) {
            return Err(Error::InvalidArgument(format!("column `{name}` already exists")));
        }
        self.headers.push(name.to_string());
        self.columns.push(values);
        Ok(())
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        for &i in rows {
            if i >= self.n_rows {
                return Err(Error::InvalidArgument(format!("row index {i} out of range")));
            }
        }
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        Ok(Self { headers: self.headers.clone(), columns, n_rows: rows.len() })
    }
}

/// Rows of a panel grouped by a unit column and ordered by a time column.
/// Output vectors are aligned with the original row order.
fn panel_order(table: &PanelTable, group: &str, time: &str) -> Result<Vec<Vec<usize>>> {
    let g = table.column(group)?;
    let t = table.column(time)?;
    let mut by_group: std::collections::BTreeMap<u64, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..table.n_rows() {
        if !g[i].is_finite() || !t[i].is_finite() {
            return Err(Error::InvalidArgument(format!(
                "row {i}: group/time columns must not contain missing values"
            )));
        }
        by_group.entry(g[i].to_bits()).or_default().push(i);
    }
    let mut out = Vec::with_capacity(by_group.len());
    for (_, mut rows) in by_group {
        rows.sort_by(|&a, &b| t[a].partial_cmp(&t[b]).unwrap().then(a.cmp(&b)));
        for w in rows.windows(2) {
            if t[w[0]] == t[w[1]] {
                return Err(Error::InvalidArgument(format!(
                    "duplicate time value {} within a group",
                    t[w[0]]
                )));
            }
        }
        out.push(rows);
    }
    Ok(out)
}

/// Within-group first difference of `value` along `time`; the first
/// observation of each group is missing.
pub fn first_difference(
    table: &PanelTable,
    group: &str,
    time: &str,
    value: &str,
) -> Result<Vec<f64>> {
    let v = table.column(value)?;
    let mut out = vec![f64::NAN; table.n_rows()];
    for rows in panel_order(table, group, time)? {
        for w in rows.windows(2) {
            out[w[1]] = v[w[1]] - v[w[0]];
        }
    }
    Ok(out)
}

/// Time elapsed since the most recent prior event (a row with `event == 1`)
/// within the group. Before any event the clock counts from the group's first
/// observation, which starts at 0. Missing event cells leave the clock running.
pub fn time_since_event(
    table: &PanelTable,
    group: &str,
    time: &str,
    event: &str,
) -> Result<Vec<f64>> {
    let e = table.column(event)?;
    let t = table.column(time)?;
    let mut out = vec![f64::NAN; table.n_rows()];
    for rows in panel_order(table, group, time)? {
        let mut origin = t[rows[0]];
        for &i in &rows {
            out[i] = t[i] - origin;
            if e[i] == 1.0 {
                origin = t[i];
            } else if e[i].is_finite() && e[i] != 0.0 {
                return Err(Error::NotBinary { column: event.to_string(), row: i, value: e[i] });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PanelTable {
        PanelTable::from_columns(
            vec!["id".into(), "year".into(), "war".into(), "trade".into()],
            vec![
                vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0],
                vec![1990.0, 1991.0, 1992.0, 1990.0, 1991.0, 1992.0],
                vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                vec![3.0, 5.0, f64::NAN, 2.0, 2.5, 4.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip_preserves_values_and_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        let table = toy();
        table.write_csv(&path).unwrap();
        let back = PanelTable::read_csv(&path).unwrap();
        assert_eq!(back.headers(), table.headers());
        assert_eq!(back.n_rows(), 6);
        let orig = table.column("trade").unwrap();
        let got = back.column("trade").unwrap();
        for i in 0..6 {
            assert_eq!(got[i].is_nan(), orig[i].is_nan());
            if !orig[i].is_nan() {
                assert_eq!(got[i], orig[i]);
            }
        }
        // Re-writing produces byte-identical output.
        let path2 = dir.path().join("toy2.csv");
        back.write_csv(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn missing_tokens_parse_as_nan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("na.csv");
        std::fs::write(&path, "a,b\n1,NA\n,2\nNaN,3\n.,4\n").unwrap();
        let t = PanelTable::read_csv(&path).unwrap();
        let a = t.column("a").unwrap();
        assert_eq!(a[0], 1.0);
        assert!(a[1].is_nan() && a[2].is_nan() && a[3].is_nan());
        let b = t.column("b").unwrap();
        assert!(b[0].is_nan());
        assert_eq!(&b[1..], &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn listwise_deletion_and_subsetting() {
        let t = toy();
        let rows = t.complete_rows(&["war", "trade"]).unwrap();
        assert_eq!(rows, vec![0, 1, 3, 4, 5]);
        let sub = t.subset(&rows).unwrap();
        assert_eq!(sub.n_rows(), 5);
        assert_eq!(sub.column("year").unwrap(), &[1990.0, 1991.0, 1990.0, 1991.0, 1992.0]);
    }

    #[test]
    fn binary_validation_names_the_offending_cell() {
        let t = toy();
        let all: Vec<usize> = (0..6).collect();
        t.require_binary("war", &all).unwrap();
        let err = t.require_binary("trade", &[0]).unwrap_err();
        match err {
            Error::NotBinary { column, row, value } => {
                assert_eq!(column, "trade");
                assert_eq!(row, 0);
                assert_eq!(value, 3.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_column_and_duplicate_headers_error() {
        let t = toy();
        assert!(matches!(t.column("gdp"), Err(Error::UnknownColumn(_))));
        let dup = PanelTable::from_columns(
            vec!["a".into(), "a".into()],
            vec![vec![1.0], vec![2.0]],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn first_difference_respects_groups_and_time_order() {
        // Rows arrive shuffled; differences must follow (group, time) order
        // while the output stays aligned with the original rows.
        let t = PanelTable::from_columns(
            vec!["id".into(), "year".into(), "x".into()],
            vec![
                vec![2.0, 1.0, 1.0, 2.0],
                vec![1991.0, 1992.0, 1991.0, 1990.0],
                vec![7.0, 10.0, 4.0, 5.0],
            ],
        )
        .unwrap();
        let d = first_difference(&t, "id", "year", "x").unwrap();
        assert!(d[2].is_nan()); // first obs of unit 1
        assert_eq!(d[1], 6.0); // 10 - 4
        assert!(d[3].is_nan()); // first obs of unit 2
        assert_eq!(d[0], 2.0); // 7 - 5
    }

    #[test]
    fn event_clock_counts_from_group_start_and_resets_on_events() {
        let t = toy();
        let c = time_since_event(&t, "id", "year", "war").unwrap();
        // Unit 1: start 1990 -> 0, 1991 -> 1 (event), 1992 -> 1 since event.
        assert_eq!(&c[0..3], &[0.0, 1.0, 1.0]);
        // Unit 2: no event until 1992.
        assert_eq!(&c[3..6], &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn duplicate_times_within_a_group_are_rejected() {
        let t = PanelTable::from_columns(
            vec!["id".into(), "year".into(), "x".into()],
            vec![vec![1.0, 1.0], vec![1990.0, 1990.0], vec![1.0, 2.0]],
        )
        .unwrap();
        assert!(first_difference(&t, "id", "year", "x").is_err());
    }
}
