//! Probability-stream CSV files.
//!
//! Tri-sensor files use the header `t,prob_uwb,prob_ir,prob_ac,label`,
//! single-sensor files `t,prob,label`. Reals are written with six decimals.

use std::fmt::Write as _;
use std::path::Path;

use lifefuse_core::{ProbabilityStream, SensorStreams};

use crate::error::{Error, Result};
use crate::fsutil::write_file;

pub const STREAMS_HEADER: [&str; 5] = ["t", "prob_uwb", "prob_ir", "prob_ac", "label"];
pub const SINGLE_HEADER: [&str; 3] = ["t", "prob", "label"];

pub fn format_streams(streams: &SensorStreams) -> String {
    let mut out = STREAMS_HEADER.join(",");
    out.push('\n');
    for k in 0..streams.len() {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{}",
            streams.timestamps[k],
            streams.uwb.probs[k],
            streams.infrared.probs[k],
            streams.acoustic.probs[k],
            streams.labels()[k]
        );
    }
    out
}

pub fn format_probability_stream(stream: &ProbabilityStream) -> String {
    let mut out = SINGLE_HEADER.join(",");
    out.push('\n');
    for k in 0..stream.len() {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{}",
            stream.timestamps[k], stream.probs[k], stream.labels[k]
        );
    }
    out
}

pub fn write_streams(path: &Path, streams: &SensorStreams) -> Result<()> {
    write_file(path, format_streams(streams).as_bytes())
}

pub fn write_probability_stream(path: &Path, stream: &ProbabilityStream) -> Result<()> {
    write_file(path, format_probability_stream(stream).as_bytes())
}

/// Rows of a CSV with the given header, each field parsed as `f64`, with
/// 1-based file line numbers.
fn read_rows(path: &Path, text: &str, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let values = record
            .iter()
            .zip(header)
            .map(|(field, name)| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::parse(path, line, format!("column `{name}`: `{field}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 1, "no data rows"));
    }
    Ok(rows)
}

fn probability(path: &Path, line: u64, name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::parse(
            path,
            line,
            format!("column `{name}`: probability {v} outside [0, 1]"),
        ))
    }
}

fn label(path: &Path, line: u64, v: f64) -> Result<u8> {
    if v == 0.0 || v == 1.0 {
        Ok(v as u8)
    } else {
        Err(Error::parse(path, line, format!("column `label`: {v} is not 0 or 1")))
    }
}

fn check_time(path: &Path, line: u64, t: f64) -> Result<f64> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::parse(path, line, "column `t`: time must be finite"))
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_streams(path: &Path, text: &str) -> Result<SensorStreams> {
    let rows = read_rows(path, text, &STREAMS_HEADER)?;
    let n = rows.len();
    let (mut t, mut uwb, mut ir, mut ac, mut labels) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for (line, v) in rows {
        t.push(check_time(path, line, v[0])?);
        uwb.push(probability(path, line, STREAMS_HEADER[1], v[1])?);
        ir.push(probability(path, line, STREAMS_HEADER[2], v[2])?);
        ac.push(probability(path, line, STREAMS_HEADER[3], v[3])?);
        labels.push(label(path, line, v[4])?);
    }
    Ok(SensorStreams::from_columns(t, uwb, ir, ac, labels)?)
}

pub fn parse_probability_stream(path: &Path, text: &str) -> Result<ProbabilityStream> {
    let rows = read_rows(path, text, &SINGLE_HEADER)?;
    let (mut t, mut probs, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for (line, v) in rows {
        t.push(check_time(path, line, v[0])?);
        probs.push(probability(path, line, SINGLE_HEADER[1], v[1])?);
        labels.push(label(path, line, v[2])?);
    }
    Ok(ProbabilityStream::new(t, probs, labels)?)
}

pub fn read_streams(path: &Path) -> Result<SensorStreams> {
    parse_streams(path, &read_text(path)?)
}

/// Loads a single-sensor `t,prob,label` file, for example an infrared
/// detector's output.
pub fn load_probability_stream(path: &Path) -> Result<ProbabilityStream> {
    parse_probability_stream(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_stream_parses() {
        let s = parse_probability_stream(Path::new("x.csv"), "t,prob,label\n0.0,0.5,0\n1.0,0.25,1\n").unwrap();
        assert_eq!(s.probs, vec![0.5, 0.25]);
        assert_eq!(s.labels, vec![0, 1]);
    }

    #[test]
    fn out_of_range_names_line() {
        let err = parse_probability_stream(Path::new("x.csv"), "t,prob,label\n0.0,0.5,0\n1.0,1.2,1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("x.csv:3"), "{msg}");
        assert!(msg.contains("1.2"), "{msg}");
    }

    #[test]
    fn malformed_row_names_line() {
        let err = parse_probability_stream(Path::new("x.csv"), "t,prob,label\n0.0,abc,0\n").unwrap_err();
        assert!(err.to_string().contains("x.csv:2"), "{err}");
        let err = parse_probability_stream(Path::new("x.csv"), "t,prob,label\n0.0,0.1\n").unwrap_err();
        assert!(err.to_string().contains("x.csv:2"), "{err}");
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(parse_probability_stream(Path::new("x.csv"), "time,p,label\n0,0.5,0\n").is_err());
    }
}
