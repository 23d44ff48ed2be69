//! Command-line front end over the library: every subcommand is a thin
//! wrapper around `fadoa::experiment`.
//!
//! Global flags can also be set through environment variables with the
//! FADOA_ prefix (FADOA_CONFIG, FADOA_SEED, FADOA_OUT, FADOA_THREADS).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fadoa::crlb::{crlb_from_fisher, crlb_general, fisher_single_source};
use fadoa::experiment::{
    run_figure, run_monte_carlo, runtime_bench, ExperimentConfig, MethodTag, ReconSource,
    REFERENCE_RUNTIMES_S,
};
use fadoa::geometry::build_virtual_array;
use fadoa::scm_recon::{amplification_factor, nse, reconstruct_full, ExactOracle, SampledOracle};
use fadoa::waveform::{equivalent_signal, snr_db_to_noise_var, PilotMatrix};

#[derive(Parser)]
#[command(name = "fadoa", version, about = "Fluid-array DOA estimation toolkit")]
struct Cli {
    /// JSON experiment configuration; defaults apply for missing fields.
    #[arg(long, global = true, env = "FADOA_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true, env = "FADOA_SEED")]
    seed: Option<u64>,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, env = "FADOA_OUT")]
    out: Option<PathBuf>,

    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true, env = "FADOA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CrlbMode {
    General,
    ClosedForm,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded Monte-Carlo sweep; writes results.csv and manifest.json.
    Simulate {
        /// Print the effective configuration as JSON and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// One seeded trial of one estimator; prints truth versus estimates.
    Estimate {
        #[arg(long, value_enum)]
        method: MethodTag,
        /// Trial id within the seeded stream.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Per-angle root bounds in degrees for the configured scene.
    Crlb {
        #[arg(long, value_enum, default_value = "general")]
        mode: CrlbMode,
    },
    /// Covariance reconstruction diagnostics: NSE and conditioning.
    Recon {
        /// Differential phase in radians (defaults to the config value).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ReconSource,
    },
    /// Median estimator runtimes on the configured scene.
    Bench {
        #[arg(long, default_value_t = 11)]
        reps: usize,
    },
    /// Reproduce one canned result set (ids 3..=9) as CSV.
    Fig {
        #[arg(long)]
        id: u8,
    },
}

fn load_config(cli: &Cli) -> fadoa::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> fadoa::Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate { dump_config } => {
            if *dump_config {
                println!("{}", cfg.to_json_pretty());
                return Ok(());
            }
            cfg.validate()?;
            let summary = run_monte_carlo(&cfg)?;
            println!("snr_db  method         rmse_deg   crlb_deg   fail  median_runtime_s");
            for row in &summary.rows {
                println!(
                    "{:>6}  {:<13} {:>9.4}  {:>9.2e}  {:>5.2}  {:>9.4}",
                    row.snr_db,
                    row.method.as_str(),
                    row.rmse_deg,
                    row.crlb_deg,
                    row.fail_rate,
                    row.median_runtime_s
                );
            }
            match &cfg.out_dir {
                Some(dir) => println!(
                    "wrote {} and {}",
                    dir.join("results.csv").display(),
                    dir.join("manifest.json").display()
                ),
                None => print!("{}", summary.csv),
            }
            Ok(())
        }
        Command::Estimate { method, trial } => {
            cfg.validate()?;
            let snr = cfg.snr_db[0];
            let noise_var = snr_db_to_noise_var(snr);
            let scene = fadoa::experiment::draw_scene(&cfg, *trial)?;
            let input =
                fadoa::experiment::prepare_input(&cfg, *method, &scene, noise_var, *trial)?;
            let est = fadoa::experiment::estimate(&cfg, *method, &input)?;
            let angles = est.angles();
            let perm = fadoa::experiment::assignment(&scene.truth, &angles)?;
            let errs = fadoa::experiment::pair_errors_deg(&scene.truth, &angles)?;
            println!("method: {}  snr: {snr} dB  trial: {trial}", method.as_str());
            println!("truth (theta, phi) deg   ->  estimate (theta, phi) deg    err_deg");
            for (i, t) in scene.truth.iter().enumerate() {
                let e = angles[perm[i]];
                println!(
                    "({:>8.3}, {:>8.3})    ->  ({:>8.3}, {:>8.3})    {:>8.4}",
                    t.theta_deg(),
                    t.phi_deg(),
                    e.theta_deg(),
                    e.phi_deg(),
                    errs[i]
                );
            }
            for s in &est.stages {
                println!("stage {:<16} {:>9.4} s", s.label, s.seconds);
            }
            Ok(())
        }
        Command::Crlb { mode } => {
            cfg.validate()?;
            let snr = cfg.snr_db[0];
            let noise_var = snr_db_to_noise_var(snr);
            let scene = fadoa::experiment::draw_scene(&cfg, 0)?;
            let virt = build_virtual_array(&scene.geom, &scene.traj);
            match mode {
                CrlbMode::General => {
                    let input = fadoa::experiment::prepare_input(
                        &cfg,
                        MethodTag::FaHadMusic,
                        &scene,
                        noise_var,
                        0,
                    )?;
                    let fadoa::experiment::MethodInput::Compressed { stack, .. } = &input else {
                        unreachable!("fa-had preparation yields a compressed stack")
                    };
                    let pilots = PilotMatrix::new(cfg.n_sources, cfg.n_pilots)?;
                    let s_bar = equivalent_signal(&scene.scaled_sources(cfg.n_pilots), &pilots)?;
                    let report = crlb_general(
                        &stack.w().adjoint(),
                        &virt,
                        &scene.truth,
                        &s_bar,
                        noise_var,
                    )?;
                    println!("general bound, snr {snr} dB, {} sources", cfg.n_sources);
                    for (l, t) in scene.truth.iter().enumerate() {
                        println!(
                            "source {l} at ({:>7.2}, {:>7.2}) deg: root bounds theta {:.4e} deg, phi {:.4e} deg",
                            t.theta_deg(),
                            t.phi_deg(),
                            report.theta_root_deg(l),
                            report.phi_root_deg(l)
                        );
                    }
                }
                CrlbMode::ClosedForm => {
                    println!(
                        "closed-form single-source bound, snr {snr} dB (each source treated alone)"
                    );
                    for (l, t) in scene.truth.iter().enumerate() {
                        let p_hat = scene.gains[l].norm_sqr();
                        let fisher = fisher_single_source(
                            &virt,
                            t.theta,
                            t.phi,
                            cfg.n_frames,
                            cfg.n_moves,
                            cfg.n_pilots,
                            p_hat,
                            noise_var,
                        );
                        match crlb_from_fisher(&fisher) {
                            Ok(c) => println!(
                                "source {l} at ({:>7.2}, {:>7.2}) deg: root bounds theta {:.4e} deg, phi {:.4e} deg",
                                t.theta_deg(),
                                t.phi_deg(),
                                c[0][0].sqrt().to_degrees(),
                                c[1][1].sqrt().to_degrees()
                            ),
                            Err(e) => println!("source {l}: {e}"),
                        }
                    }
                }
            }
            Ok(())
        }
        Command::Recon { alpha, mode } => {
            cfg.validate()?;
            let alpha = alpha.unwrap_or(cfg.alpha);
            let noise_var = snr_db_to_noise_var(cfg.snr_db[0]);
            let scene = fadoa::experiment::draw_scene(&cfg, 0)?;
            let exact =
                ExactOracle::new(&scene.geom, &scene.traj, &scene.unit_sources(), noise_var);
            let truth = exact.full_covariance();
            let rec = match mode {
                ReconSource::Exact => reconstruct_full(&exact, alpha)?,
                ReconSource::Sampled => {
                    let blocks = fadoa::experiment::synth_blocks(&cfg, &scene, noise_var, 0)?;
                    let oracle = SampledOracle::new(&blocks)?;
                    reconstruct_full(&oracle, alpha)?
                }
            };
            let err = nse(&truth, &rec.matrix)?;
            println!("reconstruction: {:?} mode, alpha = {alpha} rad", rec.mode);
            println!(
                "amplification of the off-diagonal solve |rho| = {:.4}",
                amplification_factor(alpha)?
            );
            println!("measurements per block: {}", rec.measurements_per_block);
            println!(
                "front-end configurations per position: {} ({} pilot frames over K = {})",
                rec.configurations_per_position,
                rec.configurations_per_position * cfg.n_moves,
                cfg.n_moves
            );
            println!("NSE against the analytic covariance: {err:.6e}");
            Ok(())
        }
        Command::Bench { reps } => {
            cfg.validate()?;
            let mut bench_cfg = cfg.clone();
            if bench_cfg.methods.len() == 1 {
                bench_cfg.methods =
                    vec![MethodTag::FaHadMusic, MethodTag::JadRdMusic, MethodTag::Fd2dMusic];
            }
            let report = runtime_bench(&bench_cfg, *reps)?;
            println!("{} repetitions per method (interleaved)", report.reps);
            for rt in &report.runtimes {
                let reference = REFERENCE_RUNTIMES_S
                    .iter()
                    .find(|(m, _)| *m == rt.method)
                    .map(|(_, s)| format!("{s:.4}"))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "{:<13} median {:>8.4} s  (stage sum {:>8.4} s, reference {reference} s)",
                    rt.method.as_str(),
                    rt.median_seconds,
                    rt.stage_sum_median_seconds
                );
            }
            if let Some(ok) = report.ordering_ok {
                println!(
                    "runtime ordering fa-had-music < jad-rd-music < fd-2d-music: {}",
                    if ok { "holds" } else { "violated" }
                );
            }
            Ok(())
        }
        Command::Fig { id } => {
            cfg.validate()?;
            let out = run_figure(*id, &cfg)?;
            let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            out.write_to(&dir)?;
            println!("figure {}: {}", out.id, out.description);
            for (name, _) in &out.files {
                println!("wrote {}", dir.join(name).display());
            }
            println!("wrote {}", dir.join(format!("fig{}_manifest.json", out.id)).display());
            Ok(())
        }
    }
}
