//! Canned experiment plans reproducing the reference result set as CSV
//! files, ids 3 through 9:
//!
//! - 3: estimated versus true angles, minimal acquisition (T = 1, 0 dB)
//! - 4: RMSE versus SNR for several (N, T) pairs
//! - 5: RMSE versus number of moves K
//! - 6: covariance-reconstruction NSE versus the protocol phase alpha
//! - 7: method comparison versus SNR (a) and versus pilot length (b)
//! - 8: hybrid front end versus fully digital fluid array
//! - 9: coordinated array movement versus single-antenna sequential sampling
//!
//! Every plan derives from a base configuration: its seed, grids, and trial
//! budget scale the canned sweep (per-figure default trials are multiplied
//! by base.trials / 100).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scm_recon::{nse, reconstruct_full, ExactOracle, FreshNoiseOracle};

use super::config::{ExperimentConfig, GainModel, MethodTag, ReconSource};
use super::metrics::assignment;
use super::runner::{run_monte_carlo, run_monte_carlo_without_bounds};

/// One produced figure: named CSV files plus a JSON manifest.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub id: u8,
    pub description: &'static str,
    /// (file name, file contents) pairs.
    pub files: Vec<(String, String)>,
    pub manifest: serde_json::Value,
}

impl FigureOutput {
    pub fn write_to(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        std::fs::write(
            dir.join(format!("fig{}_manifest.json", self.id)),
            serde_json::to_string_pretty(&self.manifest)?,
        )?;
        Ok(())
    }
}

fn scaled_trials(base: &ExperimentConfig, default_trials: usize) -> usize {
    ((default_trials * base.trials) as f64 / 100.0).ceil().max(1.0) as usize
}

/// Dispatches a figure id to its plan.
pub fn run_figure(id: u8, base: &ExperimentConfig) -> Result<FigureOutput> {
    match id {
        3 => fig3(base),
        4 => fig4(base),
        5 => fig5(base),
        6 => fig6(base),
        7 => fig7(base),
        8 => fig8(base),
        9 => fig9(base),
        other => Err(Error::InvalidInput(format!(
            "figure id {other} not in 3..=9"
        ))),
    }
}

fn fig3(base: &ExperimentConfig) -> Result<FigureOutput> {
    // Equal-power sources: the per-target accuracy statement this figure
    // demonstrates is a fading-free property (under Rayleigh gains a fixed
    // fraction of targets sits in a deep fade at any SNR).
    let cfg = ExperimentConfig {
        methods: vec![MethodTag::FaHadMusic],
        n_frames: 1,
        snr_db: vec![0.0],
        trials: scaled_trials(base, 200),
        gain_model: GainModel::UnitModulus,
        min_source_separation_deg: base.min_source_separation_deg.max(10.0),
        min_abs_theta_deg: base.min_abs_theta_deg.max(10.0),
        n_pilots: base.n_pilots.max(400),
        out_dir: None,
        ..base.clone()
    };
    let summary = run_monte_carlo_without_bounds(&cfg)?;
    let mut csv = String::from(
        "trial,target,truth_theta_deg,truth_phi_deg,est_theta_deg,est_phi_deg,err_deg\n",
    );
    for (_, _, records) in &summary.records {
        for rec in records {
            let Some(est) = &rec.estimates else { continue };
            let angles = est.angles();
            let perm = assignment(&rec.truth, &angles)?;
            for (i, t) in rec.truth.iter().enumerate() {
                let e = angles[perm[i]];
                csv.push_str(&format!(
                    "{},{},{:.4},{:.4},{:.4},{:.4},{:.6}\n",
                    rec.trial,
                    i,
                    t.theta_deg(),
                    t.phi_deg(),
                    e.theta_deg(),
                    e.phi_deg(),
                    rec.errors_deg[i]
                ));
            }
        }
    }
    let mut errs: Vec<f64> = summary
        .records
        .iter()
        .flat_map(|(_, _, recs)| recs.iter().flat_map(|r| r.errors_deg.iter().copied()))
        .collect();
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = errs.get(errs.len() / 2).copied().unwrap_or(f64::NAN);
    let below_2 = errs.iter().filter(|&&e| e < 2.0).count() as f64 / errs.len().max(1) as f64;
    Ok(FigureOutput {
        id: 3,
        description: "estimated versus true angles under minimal acquisition",
        files: vec![("fig3_scatter.csv".into(), csv)],
        manifest: serde_json::json!({
            "figure": 3,
            "config": serde_json::to_value(&cfg).expect("serializes"),
            "median_err_deg": median,
            "fraction_below_2deg": below_2,
        }),
    })
}

/// Shared sweep body for the RMSE-versus-SNR style figures.
fn sweep_csv(
    configs: &[(String, ExperimentConfig)],
    with_bounds: bool,
) -> Result<(String, Vec<serde_json::Value>)> {
    let mut csv = String::from("curve,method,snr_db,rmse_deg,crlb_deg,fail_rate\n");
    let mut rows_json = Vec::new();
    for (label, cfg) in configs {
        let summary = if with_bounds {
            run_monte_carlo(cfg)?
        } else {
            run_monte_carlo_without_bounds(cfg)?
        };
        for row in &summary.rows {
            csv.push_str(&format!(
                "{},{},{},{:.6},{:.6e},{:.4}\n",
                label, row.method, row.snr_db, row.rmse_deg, row.crlb_deg, row.fail_rate
            ));
            rows_json.push(serde_json::json!({
                "curve": label,
                "method": row.method.as_str(),
                "snr_db": row.snr_db,
                "rmse_deg": row.rmse_deg,
                "crlb_deg": row.crlb_deg,
                "fail_rate": row.fail_rate,
            }));
        }
    }
    Ok((csv, rows_json))
}

fn fig4(base: &ExperimentConfig) -> Result<FigureOutput> {
    let trials = scaled_trials(base, 50);
    let snr = vec![-10.0, -5.0, 0.0, 5.0, 10.0];
    let mut configs = Vec::new();
    for (n, t) in [(8, 1), (8, 3), (8, 5), (12, 3), (12, 5)] {
        configs.push((
            format!("N{n}_T{t}"),
            ExperimentConfig {
                methods: vec![MethodTag::FaHadMusic],
                n_elements: n,
                n_frames: t,
                snr_db: snr.clone(),
                trials,
                out_dir: None,
                ..base.clone()
            },
        ));
    }
    let (csv, rows) = sweep_csv(&configs, false)?;
    Ok(FigureOutput {
        id: 4,
        description: "RMSE versus SNR over array size N and frame count T",
        files: vec![("fig4_rmse_vs_snr.csv".into(), csv)],
        manifest: serde_json::json!({ "figure": 4, "trials": trials, "rows": rows }),
    })
}

fn fig5(base: &ExperimentConfig) -> Result<FigureOutput> {
    let trials = scaled_trials(base, 50);
    let mut configs = Vec::new();
    for (n, t) in [(8, 1), (8, 3), (12, 3)] {
        for k in [20usize, 24, 28, 32, 36, 40] {
            configs.push((
                format!("N{n}_T{t}_K{k}"),
                ExperimentConfig {
                    methods: vec![MethodTag::FaHadMusic],
                    n_elements: n,
                    n_frames: t,
                    n_moves: k,
                    snr_db: vec![0.0],
                    trials,
                    out_dir: None,
                    ..base.clone()
                },
            ));
        }
    }
    let (csv, rows) = sweep_csv(&configs, false)?;
    Ok(FigureOutput {
        id: 5,
        description: "RMSE versus number of coordinated moves K at 0 dB",
        files: vec![("fig5_rmse_vs_k.csv".into(), csv)],
        manifest: serde_json::json!({ "figure": 5, "trials": trials, "rows": rows }),
    })
}

fn fig6(base: &ExperimentConfig) -> Result<FigureOutput> {
    let trials = scaled_trials(base, 20);
    let mut alphas: Vec<f64> = (1..=7).map(|k| k as f64 * PI / 16.0).collect();
    alphas.insert(0, 0.02);
    alphas.push(PI / 2.0 - 0.02);
    let mut csv = String::from("alpha_rad,n_moves,median_nse\n");
    let mut rows = Vec::new();
    for &k in &[16usize, 24, 32] {
        let cfg = ExperimentConfig {
            methods: vec![MethodTag::JadRdMusic],
            n_moves: k,
            snr_db: vec![0.0],
            trials,
            recon: ReconSource::Sampled,
            out_dir: None,
            ..base.clone()
        };
        cfg.validate()?;
        for &alpha in &alphas {
            let mut errs = Vec::with_capacity(trials);
            for trial in 0..trials as u64 {
                let scene = super::runner::draw_scene(&cfg, trial)?;
                let noise_var = crate::waveform::snr_db_to_noise_var(0.0);
                let truth_oracle =
                    ExactOracle::new(&scene.geom, &scene.traj, &scene.unit_sources(), noise_var);
                let truth = truth_oracle.full_covariance();
                // Physical replay: every configuration is a fresh pilot
                // frame, which is what makes the conditioning of the
                // off-diagonal solve visible in the NSE.
                let pilots =
                    crate::waveform::PilotMatrix::new(cfg.n_sources, cfg.n_pilots)?;
                let oracle = FreshNoiseOracle::new(
                    &scene.geom,
                    &scene.traj,
                    &scene.scaled_sources(cfg.n_pilots),
                    &pilots,
                    noise_var,
                    cfg.seed ^ trial,
                )?;
                let rec = reconstruct_full(&oracle, alpha)?;
                errs.push(nse(&truth, &rec.matrix)?);
            }
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = errs[errs.len() / 2];
            csv.push_str(&format!("{alpha},{k},{median:.6e}\n"));
            rows.push(serde_json::json!({
                "alpha_rad": alpha, "n_moves": k, "median_nse": median,
            }));
        }
    }
    Ok(FigureOutput {
        id: 6,
        description: "covariance-reconstruction NSE versus the protocol phase",
        files: vec![("fig6_nse_vs_alpha.csv".into(), csv)],
        manifest: serde_json::json!({ "figure": 6, "trials": trials, "rows": rows }),
    })
}

fn fig7(base: &ExperimentConfig) -> Result<FigureOutput> {
    let trials = scaled_trials(base, 40);
    let snr = vec![-10.0, -5.0, 0.0, 5.0, 10.0];
    let compare = ExperimentConfig {
        methods: vec![MethodTag::FaHadMusic, MethodTag::JadRdMusic, MethodTag::Fd2dMusic],
        n_frames: 3,
        snr_db: snr,
        trials,
        recon: ReconSource::Sampled,
        // A near-broadside source makes a(0, phi) phi-independent and nearly
        // inside the signal subspace, which floods the decoupled elevation
        // spectrum; its elevation is unidentifiable there (the bound itself
        // diverges), so the comparison scenes exclude |theta| < 10 deg.
        min_abs_theta_deg: base.min_abs_theta_deg.max(10.0),
        n_pilots: base.n_pilots.max(400),
        out_dir: None,
        ..base.clone()
    };
    let (csv_a, rows_a) = sweep_csv(&[("methods".into(), compare.clone())], true)?;

    let mut csv_b = String::from("method,n_pilots,rmse_deg,fail_rate\n");
    let mut rows_b = Vec::new();
    for n_p in [50usize, 100, 200, 400] {
        let cfg = ExperimentConfig {
            n_pilots: n_p,
            snr_db: vec![0.0],
            out_dir: None,
            ..compare.clone()
        };
        let summary = run_monte_carlo_without_bounds(&cfg)?;
        for row in &summary.rows {
            csv_b.push_str(&format!(
                "{},{},{:.6},{:.4}\n",
                row.method, n_p, row.rmse_deg, row.fail_rate
            ));
            rows_b.push(serde_json::json!({
                "method": row.method.as_str(), "n_pilots": n_p,
                "rmse_deg": row.rmse_deg, "fail_rate": row.fail_rate,
            }));
        }
    }
    Ok(FigureOutput {
        id: 7,
        description: "method comparison versus SNR (a) and pilot length (b)",
        files: vec![
            ("fig7a_rmse_vs_snr.csv".into(), csv_a),
            ("fig7b_rmse_vs_pilots.csv".into(), csv_b),
        ],
        manifest: serde_json::json!({
            "figure": 7,
            "trials": trials,
            "rows_a": rows_a,
            "rows_b": rows_b,
            "note": "third-party baseline curves from external methods are out of scope; \
                     only the in-scope estimators and the uncompressed-model bound are emitted",
        }),
    })
}

fn fig8(base: &ExperimentConfig) -> Result<FigureOutput> {
    let trials = scaled_trials(base, 40);
    let snr = vec![-10.0, -5.0, 0.0, 5.0, 10.0];
    let cfg = ExperimentConfig {
        methods: vec![MethodTag::JadRdMusic, MethodTag::Fdfa],
        snr_db: snr,
        trials,
        recon: ReconSource::Sampled,
        min_abs_theta_deg: base.min_abs_theta_deg.max(10.0),
        n_pilots: base.n_pilots.max(400),
        out_dir: None,
        ..base.clone()
    };
    let (csv, rows) = sweep_csv(&[("had-vs-fdfa".into(), cfg)], false)?;
    Ok(FigureOutput {
        id: 8,
        description: "hybrid front end (reconstructed covariance) versus fully digital fluid array",
        files: vec![("fig8_had_vs_fdfa.csv".into(), csv)],
        manifest: serde_json::json!({ "figure": 8, "trials": trials, "rows": rows }),
    })
}

fn fig9(base: &ExperimentConfig) -> Result<FigureOutput> {
    let trials = scaled_trials(base, 40);
    let snr = vec![-10.0, -5.0, 0.0, 5.0, 10.0];
    let cfg = ExperimentConfig {
        methods: vec![MethodTag::Fdfa, MethodTag::Sfa],
        snr_db: snr,
        trials,
        min_abs_theta_deg: base.min_abs_theta_deg.max(10.0),
        n_pilots: base.n_pilots.max(400),
        out_dir: None,
        ..base.clone()
    };
    let (csv, rows) = sweep_csv(&[("array-vs-sfa".into(), cfg)], false)?;
    Ok(FigureOutput {
        id: 9,
        description: "coordinated array movement versus single-antenna sequential sampling",
        files: vec![("fig9_array_vs_sfa.csv".into(), csv)],
        manifest: serde_json::json!({ "figure": 9, "trials": trials, "rows": rows }),
    })
}
