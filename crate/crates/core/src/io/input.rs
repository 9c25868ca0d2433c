//! CSV ingestion of censored survival data and the `ψ` file transform.
//!
//! Dialect: comma separated, header row, `.` decimals. Required columns are
//! `time` (nonnegative) and `status` (`1` = event, `0` = censored).

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{Observation, SurvivalSample};

/// Label of the aggregate group.
pub const ALL_GROUP: &str = "All";

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub label: String,
    pub sample: SurvivalSample,
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::MalformedHeader(format!("missing `{name}` column")))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn map_csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line());
    match line {
        Some(line) => Error::BadRow {
            line,
            reason: err.to_string(),
        },
        None => Error::Csv(err),
    }
}

fn parse_time(field: &str, line: u64) -> Result<f64> {
    let time: f64 = field.parse().map_err(|_| Error::BadRow {
        line,
        reason: format!("time `{field}` is not a number"),
    })?;
    if !time.is_finite() || time < 0.0 {
        return Err(Error::BadRow {
            line,
            reason: format!("time `{field}` must be finite and nonnegative"),
        });
    }
    Ok(time)
}

fn parse_status(field: &str, line: u64) -> Result<bool> {
    match field {
        "1" => Ok(true),
        "0" => Ok(false),
        _ => Err(Error::BadRow {
            line,
            reason: format!("status `{field}` must be 0 or 1"),
        }),
    }
}

/// Reads a survival CSV. Returns the `"All"` aggregate first, then one
/// group per distinct label of `group_column` in sorted order.
pub fn read_survival_csv(path: &Path, group_column: Option<&str>) -> Result<Vec<Group>> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(map_csv_error)?.clone();
    let time_col = column(&headers, "time")?;
    let status_col = column(&headers, "status")?;
    let group_col = group_column.map(|g| column(&headers, g)).transpose()?;

    let mut all = Vec::new();
    let mut groups: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(map_csv_error)?;
        let line = line_of(&record);
        let time = parse_time(&record[time_col], line)?;
        let event = parse_status(&record[status_col], line)?;
        let obs = Observation::new(time, event);
        if let Some(g) = group_col {
            let label = &record[g];
            if label.is_empty() {
                return Err(Error::BadRow {
                    line,
                    reason: "empty group label".into(),
                });
            }
            groups.entry(label.to_string()).or_default().push(obs);
        }
        all.push(obs);
    }
    if all.is_empty() {
        return Err(Error::EmptyGroup(ALL_GROUP.into()));
    }

    let mut out = Vec::with_capacity(groups.len() + 1);
    out.push(Group {
        label: ALL_GROUP.into(),
        sample: SurvivalSample::new(all)?,
    });
    for (label, obs) in groups {
        if obs.is_empty() {
            return Err(Error::EmptyGroup(label));
        }
        out.push(Group {
            sample: SurvivalSample::new(obs)?,
            label,
        });
    }
    Ok(out)
}

/// Rewrites the `time` column of a survival CSV as `1 / (tau0 − time)`,
/// copying every other column unchanged.
pub fn transform_csv(input: &Path, tau0: f64, output: &Path) -> Result<()> {
    if !tau0.is_finite() {
        return Err(Error::invalid("tau0", "endpoint must be finite"));
    }
    let mut reader = open(input)?;
    let headers = reader.headers().map_err(map_csv_error)?.clone();
    let time_col = column(&headers, "time")?;
    let status_col = column(&headers, "status")?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(map_csv_error)?;
        let line = line_of(&record);
        let time = parse_time(&record[time_col], line)?;
        parse_status(&record[status_col], line)?;
        if time >= tau0 {
            return Err(Error::EndpointNotAbove { time, tau0 });
        }
        rows.push((record, 1.0 / (tau0 - time)));
    }

    let mut writer = csv::Writer::from_path(output)?;
    writer.write_record(&headers)?;
    for (record, mapped) in rows {
        let mapped = mapped.to_string();
        writer.write_record(record.iter().enumerate().map(|(i, field)| {
            if i == time_col {
                mapped.as_str()
            } else {
                field
            }
        }))?;
    }
    writer.flush()?;
    Ok(())
}
