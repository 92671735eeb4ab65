//! CSV output for benchmark rows and their per-(method, sweep) aggregates.

use std::io::Write;

use super::{Experiment, Method, TrialRecord};

pub const RECORD_HEADER: [&str; 7] = ["experiment", "method", "sweep", "trial", "mse", "fidelity", "ratio"];
pub const AGGREGATE_HEADER: [&str; 10] = [
    "experiment",
    "method",
    "sweep",
    "count",
    "mse_mean",
    "mse_std",
    "fidelity_mean",
    "fidelity_std",
    "ratio_mean",
    "ratio_std",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records<W: Write>(out: W, experiment: Experiment, records: &[TrialRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            experiment.name().to_string(),
            r.method.name().to_string(),
            r.sweep.to_string(),
            r.trial.to_string(),
            r.mse.to_string(),
            opt(r.fidelity),
            opt(r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and sample standard deviation of the present values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

fn summarize(values: impl Iterator<Item = f64>) -> Option<Summary> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(Summary { mean, std })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub sweep: f64,
    pub count: usize,
    pub mse: Summary,
    pub fidelity: Option<Summary>,
    pub ratio: Option<Summary>,
}

/// One row per (sweep, method) in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut keys: Vec<(f64, Method)> = Vec::new();
    for r in records {
        if !keys
            .iter()
            .any(|&(s, m)| s.to_bits() == r.sweep.to_bits() && m == r.method)
        {
            keys.push((r.sweep, r.method));
        }
    }
    keys.into_iter()
        .map(|(sweep, method)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.sweep.to_bits() == sweep.to_bits() && r.method == method)
                .collect();
            AggregateRow {
                method,
                sweep,
                count: group.len(),
                mse: summarize(group.iter().map(|r| r.mse)).expect("non-empty group"),
                fidelity: summarize(group.iter().filter_map(|r| r.fidelity)),
                ratio: summarize(group.iter().filter_map(|r| r.ratio)),
            }
        })
        .collect()
}

/// The aggregate row for `(method, sweep)`, if present.
pub fn find(rows: &[AggregateRow], method: Method, sweep: f64) -> Option<&AggregateRow> {
    rows.iter().find(|r| r.method == method && r.sweep == sweep)
}

pub fn write_aggregate<W: Write>(out: W, experiment: Experiment, rows: &[AggregateRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            experiment.name().to_string(),
            r.method.name().to_string(),
            r.sweep.to_string(),
            r.count.to_string(),
            r.mse.mean.to_string(),
            r.mse.std.to_string(),
            opt(r.fidelity.map(|s| s.mean)),
            opt(r.fidelity.map(|s| s.std)),
            opt(r.ratio.map(|s| s.mean)),
            opt(r.ratio.map(|s| s.std)),
        ])?;
    }
    w.flush()?;
    Ok(())
}
