//! FA-HAD-MUSIC end to end: synthesize one compressive acquisition and
//! estimate six directions from it.
//!
//! Run with: cargo run --release -p fadoa --example fa_had_music

use fadoa::experiment::{
    assignment, draw_scene, estimate, pair_errors_deg, prepare_input, ExperimentConfig, MethodTag,
};
use fadoa::waveform::snr_db_to_noise_var;

fn main() -> fadoa::Result<()> {
    // The default configuration: 8-element array, 24 moves, 3 phase frames
    // per position, 6 sources, 0 dB.
    let cfg = ExperimentConfig::default();
    let snr_db = cfg.snr_db[0];
    let scene = draw_scene(&cfg, 0)?;
    let input = prepare_input(
        &cfg,
        MethodTag::FaHadMusic,
        &scene,
        snr_db_to_noise_var(snr_db),
        0,
    )?;
    let result = estimate(&cfg, MethodTag::FaHadMusic, &input)?;

    let angles = result.angles();
    let perm = assignment(&scene.truth, &angles)?;
    let errors = pair_errors_deg(&scene.truth, &angles)?;
    println!("fa-had-music at {snr_db} dB, K*T = {} compressed rows", cfg.n_moves * cfg.n_frames);
    println!("{:<24} {:<24} err_deg", "truth (theta, phi)", "estimate");
    for (i, t) in scene.truth.iter().enumerate() {
        let e = angles[perm[i]];
        println!(
            "({:>8.3}, {:>8.3})     ({:>8.3}, {:>8.3})     {:.4}",
            t.theta_deg(),
            t.phi_deg(),
            e.theta_deg(),
            e.phi_deg(),
            errors[i]
        );
    }
    for s in &result.stages {
        println!("stage {:<14} {:.4} s", s.label, s.seconds);
    }
    Ok(())
}
