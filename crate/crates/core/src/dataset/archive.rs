//! Battery Archive timeseries CSV ingestion.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::KeyValues;

/// One logged sample of a cycler file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub test_time: f64,
    pub cycle_index: i64,
    pub current: f64,
    pub voltage: f64,
    pub cell_temperature: Option<f64>,
}

/// Header names bound to the logical record fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub test_time: String,
    pub cycle_index: String,
    pub current: String,
    pub voltage: String,
    pub temperature: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            test_time: "Test_Time (s)".into(),
            cycle_index: "Cycle_Index".into(),
            current: "Current (A)".into(),
            voltage: "Voltage (V)".into(),
            temperature: "Cell_Temperature (C)".into(),
        }
    }
}

impl ColumnMap {
    /// Apply `col.*` overrides from a flat key-value map.
    pub fn with_overrides(mut self, kv: &KeyValues) -> Self {
        let slots: [(&str, &mut String); 5] = [
            ("col.test_time", &mut self.test_time),
            ("col.cycle_index", &mut self.cycle_index),
            ("col.current", &mut self.current),
            ("col.voltage", &mut self.voltage),
            ("col.temperature", &mut self.temperature),
        ];
        for (key, slot) in slots {
            if let Some(v) = kv.get(key) {
                *slot = v.clone();
            }
        }
        self
    }
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn parse_field(raw: &str, line: usize, what: &str) -> Result<f64> {
    let v = raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{what}: cannot parse `{raw}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{what}: non-finite value `{raw}`"),
        });
    }
    Ok(v)
}

/// Parse a comma-separated cycler log with a header row.
///
/// Records come back in file order. Error line numbers count the header as
/// line 1.
pub fn parse_timeseries<R: Read>(reader: R, columns: &ColumnMap) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(Error::EmptyInput);
    }
    if headers.iter().any(|h| h.trim().is_empty()) {
        return Err(Error::Parse {
            line: 1,
            message: "header contains an empty column name".into(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = headers.iter().find(|h| !seen.insert(h.trim())) {
        return Err(Error::Parse {
            line: 1,
            message: format!("duplicate column `{dup}`"),
        });
    }

    let required =
        |name: &str| find_column(&headers, name).ok_or_else(|| Error::MissingColumn(name.into()));
    let i_time = required(&columns.test_time)?;
    let i_cycle = required(&columns.cycle_index)?;
    let i_current = required(&columns.current)?;
    let i_voltage = required(&columns.voltage)?;
    let i_temp = find_column(&headers, &columns.temperature);

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let test_time = parse_field(&row[i_time], line, &columns.test_time)?;
        if test_time < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("negative test time {test_time}"),
            });
        }
        let cycle = parse_field(&row[i_cycle], line, &columns.cycle_index)?;
        if cycle.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("cycle index `{}` is not an integer", &row[i_cycle]),
            });
        }
        let current = parse_field(&row[i_current], line, &columns.current)?;
        let voltage = parse_field(&row[i_voltage], line, &columns.voltage)?;
        if voltage <= 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("voltage must be positive, got {voltage}"),
            });
        }
        let cell_temperature = i_temp
            .and_then(|i| row.get(i))
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite());
        out.push(RawRecord {
            test_time,
            cycle_index: cycle as i64,
            current,
            voltage,
            cell_temperature,
        });
    }
    Ok(out)
}

pub fn read_timeseries(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_timeseries(std::io::BufReader::new(file), columns)
}

/// Flip the current sign so discharge is positive.
pub fn invert_current(records: &mut [RawRecord]) {
    for r in records {
        r.current = -r.current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "Date_Time,Test_Time (s),Cycle_Index,Current (A),Voltage (V),Cell_Temperature (C)\n";

    #[test]
    fn header_only() {
        let recs = parse_timeseries(HEADER.as_bytes(), &ColumnMap::default()).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn empty_file() {
        assert!(matches!(
            parse_timeseries("".as_bytes(), &ColumnMap::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn three_rows() {
        let text = format!("{HEADER}a,0,1,0,4.1,25.0\nb,1.5,1,1.25,4.05,\nc,2.5,2,-0.5,4.0,25.5\n");
        let recs = parse_timeseries(text.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(
            recs[1],
            RawRecord {
                test_time: 1.5,
                cycle_index: 1,
                current: 1.25,
                voltage: 4.05,
                cell_temperature: None
            }
        );
        assert_eq!(recs[2].cycle_index, 2);
        assert_eq!(recs[2].cell_temperature, Some(25.5));
    }

    #[test]
    fn nan_voltage_names_row() {
        let text = format!("{HEADER}a,0,1,0,4.1,25\nb,1,1,1,NaN,25\n");
        match parse_timeseries(text.as_bytes(), &ColumnMap::default()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("Voltage"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        let text = "Test_Time (s),Cycle_Index,Current (A)\n0,1,0\n";
        assert!(matches!(
            parse_timeseries(text.as_bytes(), &ColumnMap::default()),
            Err(Error::MissingColumn(c)) if c == "Voltage (V)"
        ));
    }

    #[test]
    fn temperature_column_optional() {
        let text = "Test_Time (s),Cycle_Index,Current (A),Voltage (V)\n0,1,0,4.1\n";
        let recs = parse_timeseries(text.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(recs[0].cell_temperature, None);
    }

    #[test]
    fn column_overrides() {
        let kv = crate::kv::parse_kv("col.test_time=t\ncol.voltage=v\n").unwrap();
        let cols = ColumnMap::default().with_overrides(&kv);
        let text = "t,Cycle_Index,Current (A),v\n0,1,0,4.1\n";
        let recs = parse_timeseries(text.as_bytes(), &cols).unwrap();
        assert_eq!(recs[0].voltage, 4.1);
    }

    #[test]
    fn duplicate_header_rejected() {
        let text = "Test_Time (s),Test_Time (s),Cycle_Index,Current (A),Voltage (V)\n";
        assert!(matches!(
            parse_timeseries(text.as_bytes(), &ColumnMap::default()),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
