//! Machine-readable reports: a JSON document carrying the full configuration
//! and every per-run record, and a flat CSV with one row per repetition.

use polyvol::volume::{Rounding, RunStatistics};
use polyvol::walks::{OracleKind, WalkVariant};
use serde::Serialize;

#[derive(Serialize)]
pub struct EstimateReport<'a> {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub dimension: usize,
    pub rows: usize,
    pub epsilon: f64,
    pub walk: WalkVariant,
    pub oracle: OracleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk_len_override: Option<usize>,
    pub rounding: &'a Rounding,
    pub seed: u64,
    pub repetitions: usize,
    pub parallel: usize,
    pub statistics: &'a RunStatistics,
}

#[derive(Serialize)]
pub struct ChebyshevReport {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub dimension: usize,
    pub rows: usize,
    pub seed: u64,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// One row per repetition; statistics recompute exactly from the volume
/// column because it carries full precision. The rel_err column is filled
/// only when an exact volume is known.
pub fn to_csv(stats: &RunStatistics) -> String {
    let mut out = String::from(
        "run,volume,n,w,alpha,beta,det_correction,elapsed_seconds,seed,stream,rel_err\n",
    );
    for (i, run) in stats.runs.iter().enumerate() {
        let rel = stats
            .exact
            .map(|e| format!("{:.16e}", (e - run.volume) / e))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{:.16e},{},{},{},{},{:.16e},{:.3},{},{},{}\n",
            i + 1,
            run.volume,
            run.n,
            run.w,
            run.alpha,
            run.beta,
            run.det_correction,
            run.elapsed_seconds,
            run.seed,
            run.stream,
            rel,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyvol::generators;
    use polyvol::volume::{estimate_with_statistics, VolumeParams};
    use polyvol::RngStream;

    #[test]
    fn csv_rows_match_repetitions_and_recompute() {
        let p = generators::cube(2).unwrap();
        let stats = estimate_with_statistics(
            &p,
            &VolumeParams::default(),
            4,
            Some(4.0),
            &RngStream::new(5),
        )
        .unwrap();
        let csv = to_csv(&stats);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 5);
        let mut volumes = Vec::new();
        for row in &lines[1..] {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 11);
            volumes.push(fields[1].parse::<f64>().unwrap());
        }
        let mean = volumes.iter().sum::<f64>() / volumes.len() as f64;
        assert_eq!(mean.to_bits(), stats.mean.to_bits());
    }

    #[test]
    fn json_report_carries_every_estimate_field() {
        let p = generators::cube(2).unwrap();
        let stats = estimate_with_statistics(
            &p,
            &VolumeParams::default(),
            2,
            None,
            &RngStream::new(5),
        )
        .unwrap();
        let report = EstimateReport {
            command: "estimate",
            generator: Some("cube:2".into()),
            file: None,
            dimension: p.dim(),
            rows: p.num_rows(),
            epsilon: 1.0,
            walk: polyvol::walks::WalkVariant::Cdhr,
            oracle: polyvol::walks::OracleKind::Facet,
            walk_len_override: None,
            rounding: &Rounding::Off,
            seed: 5,
            repetitions: 2,
            parallel: 1,
            statistics: &stats,
        };
        let json: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        let run = &json["statistics"]["runs"][0];
        for field in [
            "volume",
            "n",
            "w",
            "alpha",
            "beta",
            "counts",
            "ratios",
            "det_correction",
            "elapsed_seconds",
            "seed",
            "stream",
        ] {
            assert!(!run[field].is_null(), "missing field {field}");
        }
        assert_eq!(json["statistics"]["repetitions"], 2);
        assert_eq!(json["seed"], 5);
    }
}
