//! One scene, four acquisition architectures: the hybrid front end against
//! the fully digital UPA, the fully digital fluid array, and sequential
//! single-antenna sampling, with the hardware/overhead accounting of each.
//!
//! Run with: cargo run --release -p fadoa --example baseline_comparison

use fadoa::baselines::AcquisitionMode;
use fadoa::experiment::{
    draw_scene, estimate, pair_errors_deg, prepare_input, ExperimentConfig, MethodTag,
};
use fadoa::waveform::snr_db_to_noise_var;

fn main() -> fadoa::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.n_sources = 3;
    cfg.snr_db = vec![5.0];
    let noise_var = snr_db_to_noise_var(cfg.snr_db[0]);
    let scene = draw_scene(&cfg, 1)?;

    println!("architecture accounting (N = {}, K = {}, T = {}):", cfg.n_elements, cfg.n_moves, cfg.n_frames);
    let rows = [
        AcquisitionMode::fa_had(cfg.n_elements, cfg.n_moves, cfg.n_frames)?,
        AcquisitionMode::fdfa(cfg.n_elements, cfg.n_moves),
        AcquisitionMode::sfa(cfg.n_elements, cfg.n_moves),
    ];
    println!("{:<8} antennas rf_chains adjustments pilot_frames", "mode");
    for m in rows {
        println!(
            "{:<8} {:<8} {:<9} {:<11} {:<12}",
            format!("{:?}", m.tag),
            m.antennas,
            m.rf_chains,
            m.mechanical_adjustments,
            m.pilot_frames
        );
    }

    println!("\nmean paired error per method at {} dB:", cfg.snr_db[0]);
    for method in [
        MethodTag::FaHadMusic,
        MethodTag::Fd2dMusic,
        MethodTag::Fdfa,
        MethodTag::Sfa,
    ] {
        let input = prepare_input(&cfg, method, &scene, noise_var, 1)?;
        let result = estimate(&cfg, method, &input)?;
        let errors = pair_errors_deg(&scene.truth, &result.angles())?;
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        println!(
            "{:<13} mean err {:.4} deg in {:.3} s",
            method.as_str(),
            mean,
            result.total_seconds()
        );
    }
    Ok(())
}
