//! Experiment engine: JSON configs, seeded runs, JSONL trajectories, CSV
//! summaries and SVG plots.

mod config;
mod experiment;
mod plot;
mod summary;

pub use config::{ExperimentConfig, ExternalSpec, FunctionSpec, Method};
pub use experiment::{
    gap, read_trajectory, run_experiment, run_id, trajectory_file_name, FunctionInfo, Manifest, RunEntry,
    TrajectoryRecord, MANIFEST_FILE, MANIFEST_FORMAT, MANIFEST_VERSION,
};
pub use plot::{plot, render_svg, PlotSeries};
pub use summary::{load_runs, summarize, to_csv, write_summary, LoadedRun, SummaryStats, SUMMARY_FILE, SUMMARY_HEADER};

/// Element `i` is the mean of the last `min(i + 1, window)` values ending at
/// `i`, so the output has the same length as the input.
pub fn rolling_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "rolling window must be at least 1");
    let mut out = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        let lo = (i + 1).saturating_sub(window);
        let slice = &series[lo..=i];
        out.push(slice.iter().sum::<f64>() / slice.len() as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rolling_average_examples() {
        assert_eq!(rolling_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.0, 1.5, 2.5, 3.5]);
        assert_eq!(rolling_average(&[], 3), Vec::<f64>::new());
        assert_eq!(rolling_average(&[2.5; 7], 50), vec![2.5; 7]);
    }

    proptest! {
        #[test]
        fn rolling_average_shape(series in prop::collection::vec(-1e3f64..1e3, 0..80), window in 1usize..100) {
            let out = rolling_average(&series, window);
            prop_assert_eq!(out.len(), series.len());
            prop_assert_eq!(rolling_average(&series, 1), series);
        }
    }
}
