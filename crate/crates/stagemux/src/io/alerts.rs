//! Alert stream files: JSONL (one alert per line) and CSV with a header
//! row. Stage indices are one-based on the wire and zero-based in memory.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::Ipv4Addr;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stagemux_core::alert::Alert;
use stagemux_core::AlertStream;

const KNOWN_FIELDS: [&str; 10] = [
    "ts",
    "id",
    "src_ip",
    "src_port",
    "dst_ip",
    "dst_port",
    "priority",
    "severity",
    "truth_attack",
    "truth_stage",
];

/// One alert as it appears on the wire.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlertDoc {
    pub ts: i64,
    pub id: String,
    pub src_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_ip: Ipv4Addr,
    pub dst_port: u16,
    pub priority: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_attack: Option<String>,
    /// One-based stage index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_stage: Option<usize>,
}

impl AlertDoc {
    pub fn from_alert(alert: &Alert) -> Self {
        AlertDoc {
            ts: alert.ts,
            id: alert.id.clone(),
            src_ip: alert.src_ip,
            src_port: alert.src_port,
            dst_ip: alert.dst_ip,
            dst_port: alert.dst_port,
            priority: alert.priority,
            severity: alert.severity,
            truth_attack: alert.truth_attack.clone(),
            truth_stage: alert.truth_stage.map(|s| s + 1),
        }
    }

    pub fn into_alert(self) -> Result<Alert> {
        let truth_stage = match self.truth_stage {
            Some(0) => bail!("truth_stage is one-based, got 0"),
            Some(s) => Some(s - 1),
            None => None,
        };
        Ok(Alert {
            ts: self.ts,
            id: self.id,
            src_ip: self.src_ip,
            src_port: self.src_port,
            dst_ip: self.dst_ip,
            dst_port: self.dst_port,
            priority: self.priority,
            severity: self.severity,
            truth_attack: self.truth_attack,
            truth_stage,
        })
    }
}

/// A parsed stream plus the number of ignored unknown fields.
#[derive(Debug)]
pub struct ParsedStream {
    pub stream: AlertStream,
    pub unknown_fields: usize,
}

/// Parses one alert per line, skipping blank lines. Unknown keys are
/// counted, not rejected; a malformed line fails with its line number.
/// The result is stably sorted by timestamp.
pub fn parse_jsonl(reader: impl Read) -> Result<ParsedStream> {
    let mut alerts = Vec::new();
    let mut unknown_fields = 0usize;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.with_context(|| format!("line {line_no}: read failed"))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .with_context(|| format!("line {line_no}: malformed JSON"))?;
        if let Some(map) = value.as_object() {
            unknown_fields += map
                .keys()
                .filter(|k| !KNOWN_FIELDS.contains(&k.as_str()))
                .count();
        }
        let doc: AlertDoc = serde_json::from_value(value)
            .with_context(|| format!("line {line_no}: invalid alert record"))?;
        alerts.push(
            doc.into_alert()
                .with_context(|| format!("line {line_no}: invalid alert record"))?,
        );
    }
    let mut stream = AlertStream::new(alerts);
    stream.sort_by_ts();
    Ok(ParsedStream {
        stream,
        unknown_fields,
    })
}

/// Parses CSV with a mandatory header row. Extra columns are counted as
/// unknown fields once each; missing known columns fail per record.
pub fn parse_csv(reader: impl Read) -> Result<ParsedStream> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let unknown_fields = rdr
        .headers()
        .context("missing CSV header row")?
        .iter()
        .filter(|h| !KNOWN_FIELDS.contains(h))
        .count();
    let mut alerts = Vec::new();
    for (idx, row) in rdr.deserialize::<AlertDoc>().enumerate() {
        // Header is line 1, first record line 2.
        let line_no = idx + 2;
        let doc = row.with_context(|| format!("line {line_no}: invalid alert record"))?;
        alerts.push(
            doc.into_alert()
                .with_context(|| format!("line {line_no}: invalid alert record"))?,
        );
    }
    let mut stream = AlertStream::new(alerts);
    stream.sort_by_ts();
    Ok(ParsedStream {
        stream,
        unknown_fields,
    })
}

/// Reads an alert file, picking the format from the extension
/// (`.csv` means CSV, anything else JSONL).
pub fn read_alert_file(path: &Path) -> Result<ParsedStream> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "csv") {
        parse_csv(file)
    } else {
        parse_jsonl(file)
    };
    parsed.with_context(|| format!("parse {}", path.display()))
}

pub fn write_jsonl(stream: &AlertStream, mut writer: impl Write) -> Result<()> {
    for alert in stream.alerts() {
        serde_json::to_writer(&mut writer, &AlertDoc::from_alert(alert))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv(stream: &AlertStream, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    // Serde would drop None fields and leave ragged records; write the
    // cells explicitly so every row has all columns.
    wtr.write_record(KNOWN_FIELDS)?;
    for alert in stream.alerts() {
        let doc = AlertDoc::from_alert(alert);
        wtr.write_record(&[
            doc.ts.to_string(),
            doc.id,
            doc.src_ip.to_string(),
            doc.src_port.to_string(),
            doc.dst_ip.to_string(),
            doc.dst_port.to_string(),
            doc.priority.to_string(),
            doc.severity.map(|v| v.to_string()).unwrap_or_default(),
            doc.truth_attack.unwrap_or_default(),
            doc.truth_stage.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_alert_file(path: &Path, stream: &AlertStream) -> Result<()> {
    let file = File::create(path).with_context(|| format!("create {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(stream, file)
    } else {
        write_jsonl(stream, file)
    }
}

/// Severity table: alert id to severity level, stored as a JSON object.
pub fn read_severity_map(path: &Path) -> Result<BTreeMap<String, u32>> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    serde_json::from_reader(file).with_context(|| format!("parse {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINES: &str = concat!(
        "{\"ts\": 3, \"id\": \"probe\", \"src_ip\": \"10.0.0.1\", \"src_port\": 1, ",
        "\"dst_ip\": \"10.0.0.2\", \"dst_port\": 80, \"priority\": 1}\n",
        "{\"ts\": 1, \"id\": \"scan\", \"src_ip\": \"10.0.0.3\", \"src_port\": 2, ",
        "\"dst_ip\": \"10.0.0.4\", \"dst_port\": 80, \"priority\": 2, ",
        "\"truth_attack\": \"a#0\", \"truth_stage\": 1, \"extra\": true}\n",
    );

    #[test]
    fn jsonl_parses_sorts_and_counts_unknown_fields() {
        let parsed = parse_jsonl(LINES.as_bytes()).unwrap();
        assert_eq!(parsed.unknown_fields, 1);
        let ids: Vec<&str> = parsed
            .stream
            .alerts()
            .iter()
            .map(|a| a.id.as_str())
            .collect();
        assert_eq!(ids, ["scan", "probe"]);
        assert_eq!(parsed.stream.alerts()[0].truth_stage, Some(0));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let text = format!("{LINES}{{\"ts\": 9}}\n");
        let err = parse_jsonl(text.as_bytes()).unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
    }

    #[test]
    fn zero_truth_stage_is_rejected() {
        let text = LINES.replace("\"truth_stage\": 1", "\"truth_stage\": 0");
        let err = parse_jsonl(text.as_bytes()).unwrap_err();
        assert!(format!("{err:#}").contains("one-based"), "{err:#}");
    }

    #[test]
    fn jsonl_round_trips() {
        let parsed = parse_jsonl(LINES.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&parsed.stream, &mut buf).unwrap();
        let again = parse_jsonl(buf.as_slice()).unwrap();
        assert_eq!(parsed.stream, again.stream);
        assert_eq!(again.unknown_fields, 0);
    }

    #[test]
    fn csv_round_trips_with_optionals() {
        let parsed = parse_jsonl(LINES.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_csv(&parsed.stream, &mut buf).unwrap();
        let again = parse_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed.stream, again.stream);
    }

    #[test]
    fn csv_missing_column_fails_with_line_number() {
        let text = "ts,id,src_ip,src_port,dst_ip,dst_port\n5,x,10.0.0.1,1,10.0.0.2,80\n";
        let err = parse_csv(text.as_bytes()).unwrap_err();
        assert!(format!("{err:#}").contains("line 2"), "{err:#}");
    }
}
