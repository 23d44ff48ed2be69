//! Cramér-Rao bounds for the compressive acquisition: the general bound on
//! the trial's actual combining matrix versus the single-source closed form.
//!
//! Run with: cargo run --release -p fadoa --example crlb_bounds

use fadoa::crlb::{crlb_from_fisher, crlb_general, fisher_single_source};
use fadoa::experiment::{draw_scene, prepare_input, ExperimentConfig, MethodInput, MethodTag};
use fadoa::geometry::build_virtual_array;
use fadoa::waveform::{equivalent_signal, snr_db_to_noise_var, PilotMatrix};

fn main() -> fadoa::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.n_sources = 1;
    cfg.min_abs_theta_deg = 10.0; // elevation information vanishes at broadside
    let scene = draw_scene(&cfg, 3)?;
    let virt = build_virtual_array(&scene.geom, &scene.traj);
    let truth = scene.truth[0];
    println!(
        "single source at ({:.2}, {:.2}) deg, N = {}, K = {}, T = {}, N_p = {}",
        truth.theta_deg(),
        truth.phi_deg(),
        cfg.n_elements,
        cfg.n_moves,
        cfg.n_frames,
        cfg.n_pilots
    );
    println!("snr_db  general theta/phi (deg)       closed-form theta/phi (deg)");
    for snr_db in [-10.0, 0.0, 10.0, 20.0] {
        let noise_var = snr_db_to_noise_var(snr_db);
        let input = prepare_input(&cfg, MethodTag::FaHadMusic, &scene, noise_var, 3)?;
        let MethodInput::Compressed { stack, .. } = &input else { unreachable!() };
        let pilots = PilotMatrix::new(cfg.n_sources, cfg.n_pilots)?;
        let s_bar = equivalent_signal(&scene.scaled_sources(cfg.n_pilots), &pilots)?;
        let general = crlb_general(&stack.w().adjoint(), &virt, &scene.truth, &s_bar, noise_var)?;
        let fisher = fisher_single_source(
            &virt,
            truth.theta,
            truth.phi,
            cfg.n_frames,
            cfg.n_moves,
            cfg.n_pilots,
            scene.gains[0].norm_sqr(),
            noise_var,
        );
        let closed = crlb_from_fisher(&fisher)?;
        println!(
            "{snr_db:>6}  {:>10.4e} / {:>10.4e}      {:>10.4e} / {:>10.4e}",
            general.theta_root_deg(0),
            general.phi_root_deg(0),
            closed[0][0].sqrt().to_degrees(),
            closed[1][1].sqrt().to_degrees()
        );
    }
    println!("\nthe closed form treats the combiner Gram matrix as identity; the two");
    println!("bounds agree to within tens of percent under random phase draws.");
    Ok(())
}
