//! Training histories, prediction sequences and metric reports.

use std::fmt::Write as _;
use std::path::Path;

use lifefuse_core::fusion::{EpochRecord, Metrics, Prediction};
use serde::Serialize;

use crate::error::{Error, Result};

pub const HISTORY_HEADER: &str = "epoch,train_loss,test_loss";
pub const PREDICTIONS_HEADER: &str = "t,pred,truth";
pub const COMPARISON_HEADER: &str = "variant,epoch,train_loss,test_loss";

pub fn format_history(records: &[EpochRecord]) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in records {
        let _ = writeln!(out, "{},{:.9},{:.9}", r.epoch, r.train_loss, r.test_loss);
    }
    out
}

/// `t` is the stream time of each window's last step.
pub fn format_predictions(predictions: &[Prediction], timestamps: &[f64]) -> String {
    let mut out = format!("{PREDICTIONS_HEADER}\n");
    for p in predictions {
        let t = timestamps.get(p.step).copied().unwrap_or(p.step as f64);
        let _ = writeln!(out, "{t:.6},{:.6},{}", p.pred, p.truth);
    }
    out
}

pub fn format_comparison(variants: &[(String, Vec<EpochRecord>)]) -> String {
    let mut out = format!("{COMPARISON_HEADER}\n");
    for (name, records) in variants {
        for r in records {
            let _ = writeln!(out, "{name},{},{:.9},{:.9}", r.epoch, r.train_loss, r.test_loss);
        }
    }
    out
}

/// Everything `eval` reports.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub fusion: Metrics,
    pub threshold: f64,
    /// ROC-AUC of each raw sensor stream, in uwb, infrared, acoustic order.
    pub sensor_auc: [f64; 3],
    pub ds_auc: f64,
    pub ds_reliability: [f64; 3],
    pub test_windows: usize,
}

pub fn format_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Parses simple numeric CSV columns; the header must match `header`.
fn parse_table(path: &Path, text: &str, header: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `{header}`, found `{}`", other.unwrap_or("")),
            ))
        }
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<String> = l.split(',').map(|f| f.trim().to_string()).collect();
            if fields.len() == width {
                Ok(fields)
            } else {
                Err(Error::parse(
                    path,
                    i as u64 + 2,
                    format!("expected {width} fields, found {}", fields.len()),
                ))
            }
        })
        .collect()
}

fn num(path: &Path, row: usize, field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, row as u64 + 2, format!("`{field}` is not a number")))
}

pub fn parse_history(path: &Path, text: &str) -> Result<Vec<(f64, f64, f64)>> {
    parse_table(path, text, HISTORY_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, f)| Ok((num(path, i, &f[0])?, num(path, i, &f[1])?, num(path, i, &f[2])?)))
        .collect()
}

pub fn parse_predictions(path: &Path, text: &str) -> Result<Vec<(f64, f64, f64)>> {
    parse_table(path, text, PREDICTIONS_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, f)| Ok((num(path, i, &f[0])?, num(path, i, &f[1])?, num(path, i, &f[2])?)))
        .collect()
}

/// Variant name with its `(epoch, train, test)` rows, in file order.
pub fn parse_comparison(path: &Path, text: &str) -> Result<Vec<(String, Vec<(f64, f64, f64)>)>> {
    let mut out: Vec<(String, Vec<(f64, f64, f64)>)> = Vec::new();
    for (i, f) in parse_table(path, text, COMPARISON_HEADER)?.iter().enumerate() {
        let row = (num(path, i, &f[1])?, num(path, i, &f[2])?, num(path, i, &f[3])?);
        match out.last_mut() {
            Some((name, rows)) if *name == f[0] => rows.push(row),
            _ => out.push((f[0].clone(), vec![row])),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_round_trip() {
        let recs = [
            EpochRecord {
                epoch: 0,
                train_loss: 0.7,
                test_loss: 0.71,
            },
            EpochRecord {
                epoch: 1,
                train_loss: 0.5,
                test_loss: 0.55,
            },
        ];
        let text = format_history(&recs);
        assert!(text.starts_with("epoch,train_loss,test_loss\n0,"));
        let rows = parse_history(Path::new("h.csv"), &text).unwrap();
        assert_eq!(rows, vec![(0.0, 0.7, 0.71), (1.0, 0.5, 0.55)]);
    }

    #[test]
    fn comparison_groups_variants() {
        let r = |e| EpochRecord {
            epoch: e,
            train_loss: 0.1,
            test_loss: 0.2,
        };
        let text = format_comparison(&[("a".into(), vec![r(0), r(1)]), ("b".into(), vec![r(0)])]);
        let parsed = parse_comparison(Path::new("c.csv"), &text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].1.len(), 2);
    }
}
