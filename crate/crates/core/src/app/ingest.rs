//! CSV ingestion of price or return series.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dated daily log-returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Log-returns `ln(P_t / P_{t-1})` from dated prices (dates strictly increasing).
    pub fn from_prices(dates: Vec<NaiveDate>, prices: &[f64]) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: prices.len(),
            });
        }
        if dates.len() != prices.len() {
            return Err(Error::InvalidInput("dates and prices differ in length".into()));
        }
        let returns = prices.windows(2).map(|p| (p[1] / p[0]).ln()).collect();
        Ok(Self {
            dates: dates[1..].to_vec(),
            returns,
        })
    }
}

/// What the value column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Price,
    Return,
}

/// Which CSV columns to read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub date: String,
    pub value: String,
    pub kind: InputKind,
}

impl ColumnSpec {
    /// `date,price`
    pub fn prices() -> Self {
        Self {
            date: "date".into(),
            value: "price".into(),
            kind: InputKind::Price,
        }
    }

    /// `date,return`
    pub fn returns() -> Self {
        Self {
            date: "date".into(),
            value: "return".into(),
            kind: InputKind::Return,
        }
    }

    pub fn for_kind(kind: InputKind) -> Self {
        match kind {
            InputKind::Price => Self::prices(),
            InputKind::Return => Self::returns(),
        }
    }
}

const DATE_FORMATS: [&str; 4] = ["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%Y%m%d"];

fn parse_date(s: &str) -> Option<NaiveDate> {
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s.trim(), f).ok())
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            row: 0,
            column: name.into(),
            message: "missing column in header".into(),
        })
}

/// Reads a headed CSV of dates and prices (or precomputed returns), sorts
/// by date and returns log-returns. Rows are numbered from 1 after the header.
pub fn ingest_prices(path: &Path, columns: &ColumnSpec) -> Result<ReturnSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let di = column_index(&headers, &columns.date, path)?;
    let vi = column_index(&headers, &columns.value, path)?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let fail = |column: &str, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            row: i as u64 + 1,
            column: column.into(),
            message,
        };
        let raw_date = rec.get(di).unwrap_or("");
        let date = parse_date(raw_date)
            .ok_or_else(|| fail(&columns.date, format!("unparseable date `{raw_date}`")))?;
        let raw = rec.get(vi).unwrap_or("");
        let value: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| fail(&columns.value, format!("unparseable value `{raw}`")))?;
        if columns.kind == InputKind::Price && value <= 0.0 {
            return Err(fail(&columns.value, format!("price must be positive, got {value}")));
        }
        rows.push((date, value));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidInput(format!("duplicate date {}", w[0].0)));
    }
    let (dates, values): (Vec<NaiveDate>, Vec<f64>) = rows.into_iter().unzip();
    match columns.kind {
        InputKind::Price => ReturnSeries::from_prices(dates, &values),
        InputKind::Return => {
            if values.is_empty() {
                return Err(Error::TooShort { needed: 1, got: 0 });
            }
            Ok(ReturnSeries {
                dates,
                returns: values,
            })
        }
    }
}

/// Reads a single numeric column (`value`, or else `return`) from a headed CSV,
/// such as the output of `simulate`.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let vi = column_index(&headers, "value", path).or_else(|_| column_index(&headers, "return", path))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let raw = rec.get(vi).unwrap_or("");
        let v: f64 = raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: rec.position().map_or(0, |p| p.line()),
            row: i as u64 + 1,
            column: headers[vi].to_string(),
            message: format!("unparseable value `{raw}`"),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Writes `index,value` rows.
pub fn write_series(path: &Path, values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["index", "value"])?;
    for (i, v) in values.iter().enumerate() {
        wtr.write_record([i.to_string(), format!("{v:?}")])?;
    }
    wtr.flush()?;
    Ok(())
}
