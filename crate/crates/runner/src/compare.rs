use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::run::{RunError, RunSummary};
use crate::svg::{box_chart, line_chart, Series};

/// Window of the reward moving average.
pub const MOVING_AVERAGE_WINDOW: usize = 101;

/// Trailing moving average; the window shrinks at the start of the series.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for i in 0..xs.len() {
        sum += xs[i];
        if i >= w {
            sum -= xs[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}

/// Linear-interpolation quantile of unsorted data.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty data");
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricStats {
    pub median: f64,
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
}

impl MetricStats {
    pub fn of(xs: &[f64]) -> Self {
        MetricStats {
            median: median(xs),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            q1: quantile(xs, 0.25),
            q3: quantile(xs, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

pub const METRICS: [&str; 3] = ["mol_scaffolds", "topo_scaffolds", "diverse_actives"];

/// Final value of each diversity metric for every rerun.
pub fn final_metrics(runs: &[RunSummary]) -> [Vec<f64>; 3] {
    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    for r in runs {
        let (_, m, t, d) = r.final_counts();
        out[0].push(m as f64);
        out[1].push(t as f64);
        out[2].push(d as f64);
    }
    out
}

/// Per-step median over reruns of the moving-average extrinsic reward.
pub fn reward_curve(runs: &[RunSummary], window: usize) -> Vec<f64> {
    let curves: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| moving_average(&r.records.iter().map(|x| x.mean_extrinsic).collect::<Vec<_>>(), window))
        .collect();
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    (0..len).map(|i| median(&curves.iter().map(|c| c[i]).collect::<Vec<_>>())).collect()
}

/// Writes `comparison.csv`, `reward_curves.csv`, `reward.svg` and one box
/// chart per diversity metric into `dir`.
pub fn write_comparison(dir: &Path, groups: &[(String, Vec<RunSummary>)]) -> Result<(), RunError> {
    let io = |p: &Path, e: &dyn std::fmt::Display| RunError::Io { path: p.display().to_string(), msg: e.to_string() };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;

    let table = dir.join("comparison.csv");
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(&table).map_err(|e| io(&table, &e))?));
    wtr.write_record(["label", "metric", "median", "mean", "q1", "q3", "iqr", "runs"])
        .map_err(|e| io(&table, &e))?;
    for (label, runs) in groups {
        for (metric, values) in METRICS.iter().zip(final_metrics(runs)) {
            if values.is_empty() {
                continue;
            }
            let s = MetricStats::of(&values);
            wtr.write_record([
                label.clone(),
                metric.to_string(),
                s.median.to_string(),
                s.mean.to_string(),
                s.q1.to_string(),
                s.q3.to_string(),
                s.iqr().to_string(),
                values.len().to_string(),
            ])
            .map_err(|e| io(&table, &e))?;
        }
    }
    wtr.flush().map_err(|e| io(&table, &e))?;

    let curves: Vec<Series> = groups
        .iter()
        .map(|(label, runs)| Series { label: label.clone(), values: reward_curve(runs, MOVING_AVERAGE_WINDOW) })
        .collect();
    let path = dir.join("reward_curves.csv");
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(&path).map_err(|e| io(&path, &e))?));
    let mut header = vec!["step".to_string()];
    header.extend(curves.iter().map(|c| c.label.clone()));
    wtr.write_record(&header).map_err(|e| io(&path, &e))?;
    let len = curves.iter().map(|c| c.values.len()).max().unwrap_or(0);
    for i in 0..len {
        let mut row = vec![(i + 1).to_string()];
        row.extend(curves.iter().map(|c| c.values.get(i).map_or(String::new(), |v| v.to_string())));
        wtr.write_record(&row).map_err(|e| io(&path, &e))?;
    }
    wtr.flush().map_err(|e| io(&path, &e))?;

    let svg = dir.join("reward.svg");
    std::fs::write(&svg, line_chart("moving-average extrinsic reward", "step", &curves))
        .map_err(|e| io(&svg, &e))?;
    for (k, metric) in METRICS.iter().enumerate() {
        let boxes: Vec<Series> = groups
            .iter()
            .map(|(label, runs)| Series { label: label.clone(), values: final_metrics(runs)[k].clone() })
            .collect();
        let path = dir.join(format!("{metric}.svg"));
        std::fs::write(&path, box_chart(metric, &boxes)).map_err(|e| io(&path, &e))?;
    }
    Ok(())
}
