//! JAD-RD-MUSIC on a reconstructed covariance: the 2-D search decouples
//! into a 1-D elevation spectrum (through the Bessel-coefficient manifold)
//! and one conditional azimuth search per elevation peak.
//!
//! Run with: cargo run --release -p fadoa --example jad_rd_music

use fadoa::experiment::{
    assignment, draw_scene, estimate, pair_errors_deg, prepare_input, ExperimentConfig, MethodTag,
    ReconSource,
};
use fadoa::geometry::build_virtual_array;
use fadoa::jad_music::bessel_manifold;
use fadoa::waveform::snr_db_to_noise_var;

fn main() -> fadoa::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.recon = ReconSource::Sampled;
    // Elevations of near-broadside sources are unidentifiable in the
    // decoupled search (a(0, phi) does not depend on phi), so keep the
    // scene away from theta = 0.
    cfg.min_abs_theta_deg = 10.0;
    cfg.n_pilots = 400;
    let snr_db = cfg.snr_db[0];
    let scene = draw_scene(&cfg, 0)?;
    let virt = build_virtual_array(&scene.geom, &scene.traj);

    // The expansion order adapts to the projected aperture per elevation.
    for phi_deg in [0.0, 45.0, 80.0] {
        let m = bessel_manifold(&virt, (phi_deg as f64).to_radians(), cfg.eps)?;
        println!(
            "phi = {phi_deg:>4.1} deg: truncation order L1 = {}, manifold {}x{}",
            m.order(),
            m.matrix().nrows(),
            m.width()
        );
    }

    let input = prepare_input(
        &cfg,
        MethodTag::JadRdMusic,
        &scene,
        snr_db_to_noise_var(snr_db),
        0,
    )?;
    let result = estimate(&cfg, MethodTag::JadRdMusic, &input)?;
    let angles = result.angles();
    let perm = assignment(&scene.truth, &angles)?;
    let errors = pair_errors_deg(&scene.truth, &angles)?;
    println!("\njad-rd-music on the reconstructed covariance at {snr_db} dB:");
    for (i, t) in scene.truth.iter().enumerate() {
        let e = angles[perm[i]];
        println!(
            "truth ({:>8.3}, {:>8.3}) -> ({:>8.3}, {:>8.3})  err {:.4} deg",
            t.theta_deg(),
            t.phi_deg(),
            e.theta_deg(),
            e.phi_deg(),
            errors[i]
        );
    }
    for s in &result.stages {
        println!("stage {:<18} {:.4} s", s.label, s.seconds);
    }
    Ok(())
}
