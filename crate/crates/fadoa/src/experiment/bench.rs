//! Runtime benchmarking of the estimators on one fixed scene.
//!
//! Repetitions are interleaved across methods so machine load perturbs all
//! medians alike; the acquisition is prepared once per method and only the
//! estimator call is timed.

use std::time::Instant;

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, MethodTag};
use super::runner::{draw_scene, estimate, prepare_input, MethodInput};

/// Published reference medians in seconds for the default configuration
/// (reported alongside measurements; never gated).
pub const REFERENCE_RUNTIMES_S: &[(MethodTag, f64)] = &[
    (MethodTag::Fd2dMusic, 3.7737),
    (MethodTag::FaHadMusic, 0.5300),
    (MethodTag::JadRdMusic, 1.3491),
];

/// Measured runtimes of one method.
#[derive(Debug, Clone)]
pub struct MethodRuntime {
    pub method: MethodTag,
    pub median_seconds: f64,
    /// Median of the per-run sums of internal stage timings.
    pub stage_sum_median_seconds: f64,
    pub runs: Vec<f64>,
}

/// Benchmark outcome across the configured methods.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub reps: usize,
    pub runtimes: Vec<MethodRuntime>,
    /// fa-had-music < jad-rd-music < fd-2d-music on this run; None when the
    /// three methods were not all benchmarked.
    pub ordering_ok: Option<bool>,
}

impl BenchReport {
    pub fn median_of(&self, method: MethodTag) -> Option<f64> {
        self.runtimes.iter().find(|r| r.method == method).map(|r| r.median_seconds)
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Times `reps` runs of every configured method on trial 0 of the config's
/// scene at the first SNR point. Needs reps >= 11 for median stability.
pub fn runtime_bench(cfg: &ExperimentConfig, reps: usize) -> Result<BenchReport> {
    cfg.validate()?;
    if reps < 11 {
        return Err(Error::InvalidInput(format!(
            "runtime bench needs at least 11 repetitions, got {reps}"
        )));
    }
    let snr = cfg.snr_db[0];
    let noise_var = crate::waveform::snr_db_to_noise_var(snr);
    let scene = draw_scene(cfg, 0)?;
    let inputs: Vec<(MethodTag, MethodInput)> = cfg
        .methods
        .iter()
        .map(|&m| Ok((m, prepare_input(cfg, m, &scene, noise_var, 0)?)))
        .collect::<Result<_>>()?;

    let mut walls: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); inputs.len()];
    let mut stage_sums: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); inputs.len()];
    for _rep in 0..reps {
        for (i, (method, input)) in inputs.iter().enumerate() {
            let t = Instant::now();
            let est = estimate(cfg, *method, input)?;
            walls[i].push(t.elapsed().as_secs_f64());
            stage_sums[i].push(est.total_seconds());
        }
    }
    let runtimes: Vec<MethodRuntime> = inputs
        .iter()
        .enumerate()
        .map(|(i, (method, _))| MethodRuntime {
            method: *method,
            median_seconds: median(walls[i].clone()),
            stage_sum_median_seconds: median(stage_sums[i].clone()),
            runs: walls[i].clone(),
        })
        .collect();

    let report = BenchReport { reps, runtimes, ordering_ok: None };
    let fa = report.median_of(MethodTag::FaHadMusic);
    let jad = report.median_of(MethodTag::JadRdMusic);
    let fd = report.median_of(MethodTag::Fd2dMusic);
    let ordering_ok = match (fa, jad, fd) {
        (Some(fa), Some(jad), Some(fd)) => Some(fa < jad && jad < fd),
        _ => None,
    };
    Ok(BenchReport { ordering_ok, ..report })
}
