//! Filter comparison table: corrupt once, run each filter, score each output.

use std::time::Duration;

use crate::error::Result;
use crate::filters::{filter_image, FilterKind, FilterParams, FilterStats};
use crate::image::RgbImage;
use crate::metrics::{MetricReport, Scielab};
use crate::noise::{inject, NoiseSpec};

/// Timed runs per filter; the median is reported.
pub const TIMING_RUNS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    /// Filter name, or `NONE` for the unfiltered noisy image.
    pub name: String,
    pub metrics: MetricReport,
    pub pixels_switched: usize,
    pub distance_evals: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "filter,mae,mse,ncd,pcd,seconds,switched,distance_evals";

    pub fn row(&self, name: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.name,
                r.metrics.to_csv_row(),
                r.pixels_switched,
                r.distance_evals
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<10}{:>10}{:>12}{:>12}{:>10}{:>10}{:>10}{:>14}\n",
            "filter", "MAE", "MSE", "NCD", "PCD", "time(s)", "switched", "dist.evals"
        );
        for r in &self.rows {
            let m = &r.metrics;
            out.push_str(&format!(
                "{:<10}{:>10.3}{:>12.3}{:>12.6}{:>10.3}{:>10.4}{:>10}{:>14}\n",
                r.name, m.mae, m.mse, m.ncd, m.pcd, m.elapsed, r.pixels_switched, r.distance_evals
            ));
        }
        out
    }
}

/// Corrupts `original` with `spec`, then filters and scores the noisy image
/// with every `(kind, params)` entry. The first row is always `NONE`.
pub fn run_benchmark(
    original: &RgbImage,
    spec: &NoiseSpec,
    filters: &[(FilterKind, FilterParams)],
    scielab: &Scielab,
) -> Result<BenchReport> {
    let (noisy, _) = inject(original, spec)?;
    let mut rows = vec![BenchRow {
        name: "NONE".into(),
        metrics: MetricReport::compare(original, &noisy, scielab)?,
        pixels_switched: 0,
        distance_evals: 0,
    }];
    for (kind, params) in filters {
        let (output, stats, elapsed) = timed(&noisy, *kind, params)?;
        let mut metrics = MetricReport::compare(original, &output, scielab)?;
        metrics.elapsed = elapsed.as_secs_f64();
        rows.push(BenchRow {
            name: kind.name().into(),
            metrics,
            pixels_switched: stats.pixels_switched,
            distance_evals: stats.distance_evals,
        });
    }
    Ok(BenchReport { rows })
}

fn timed(
    noisy: &RgbImage,
    kind: FilterKind,
    params: &FilterParams,
) -> Result<(RgbImage, FilterStats, Duration)> {
    let mut times = Vec::with_capacity(TIMING_RUNS);
    let mut last = None;
    for _ in 0..TIMING_RUNS {
        let (out, stats) = filter_image(noisy, kind, params)?;
        times.push(stats.elapsed);
        last = Some((out, stats));
    }
    times.sort();
    let (out, stats) = last.expect("at least one run");
    Ok((out, stats, times[TIMING_RUNS / 2]))
}
