use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolver::Row;

pub const SCHEMA: [&str; 5] = ["step", "time", "normT", "normS", "energy"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Flat,
    Growing,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormSummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub max: f64,
    /// `final / initial`, absent when the initial norm is zero.
    pub ratio: Option<f64>,
    pub classification: Growth,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Header line of the input series, if any.
    pub source: Option<String>,
    pub rows: usize,
    pub final_time: f64,
    #[serde(rename = "normT")]
    pub norm_t: NormSummary,
    #[serde(rename = "normS")]
    pub norm_s: NormSummary,
    pub energy_relative_drift: Option<f64>,
    pub threshold: f64,
    pub floor: f64,
    pub classification: Growth,
}

/// Growing iff the final value clears `floor` and exceeds `threshold`
/// times the initial one.
pub fn classify(initial: f64, last: f64, threshold: f64, floor: f64) -> Growth {
    if last > floor && (initial == 0.0 || last / initial >= threshold) {
        Growth::Growing
    } else {
        Growth::Flat
    }
}

fn norm_summary(v: &[f64], threshold: f64, floor: f64) -> NormSummary {
    let (initial, last) = (v[0], v[v.len() - 1]);
    NormSummary {
        initial,
        last,
        max: v.iter().copied().fold(f64::MIN, f64::max),
        ratio: (initial != 0.0).then(|| last / initial),
        classification: classify(initial, last, threshold, floor),
    }
}

/// Parse a series written by `evolve` and summarize it.
pub fn summarize(text: &str, threshold: f64, floor: f64) -> Result<SeriesReport> {
    let bad = |m: String| Error::Malformed(m);
    let source = text.lines().next().and_then(|l| l.strip_prefix('#')).map(|l| l.trim().to_string());
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != SCHEMA {
        return Err(bad(format!("expected header `{}`", SCHEMA.join(","))));
    }
    let rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| bad(e.to_string()))?;
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if ![r.time, r.norm_t, r.norm_s, r.energy].iter().all(|x| x.is_finite()) {
            return Err(bad(format!("non-finite entry in row {i}")));
        }
        if i > 0 && r.time <= rows[i - 1].time {
            return Err(bad(format!("time column not increasing at row {i}")));
        }
    }
    let nt: Vec<f64> = rows.iter().map(|r| r.norm_t).collect();
    let ns: Vec<f64> = rows.iter().map(|r| r.norm_s).collect();
    let norm_t = norm_summary(&nt, threshold, floor);
    let norm_s = norm_summary(&ns, threshold, floor);
    let classification =
        if norm_t.classification == Growth::Growing || norm_s.classification == Growth::Growing { Growth::Growing } else { Growth::Flat };
    let (e0, e1) = (rows[0].energy, rows[rows.len() - 1].energy);
    Ok(SeriesReport {
        tool: super::TOOL,
        version: super::VERSION,
        command: String::new(),
        source,
        rows: rows.len(),
        final_time: rows[rows.len() - 1].time,
        norm_t,
        norm_s,
        energy_relative_drift: (e0 != 0.0).then(|| (e1 - e0) / e0),
        threshold,
        floor,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(summarize("", 100.0, 1e-8), Err(Error::Malformed(_))));
        assert!(matches!(summarize("step,time,normT,normS,energy\n", 100.0, 1e-8), Err(Error::Malformed(_))));
    }

    #[test]
    fn round_off_growth_is_flat() {
        assert_eq!(classify(1e-14, 1e-11, 100.0, 1e-8), Growth::Flat);
        assert_eq!(classify(1e-14, 1e-3, 100.0, 1e-8), Growth::Growing);
        assert_eq!(classify(25.0, 25.0, 100.0, 1e-8), Growth::Flat);
    }
}
