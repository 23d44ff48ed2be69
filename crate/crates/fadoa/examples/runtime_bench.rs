//! Median estimator runtimes on the default scene, interleaved repetitions.
//!
//! Run with: cargo run --release -p fadoa --example runtime_bench

use fadoa::experiment::{runtime_bench, ExperimentConfig, MethodTag, REFERENCE_RUNTIMES_S};

fn main() -> fadoa::Result<()> {
    let cfg = ExperimentConfig {
        methods: vec![MethodTag::FaHadMusic, MethodTag::JadRdMusic, MethodTag::Fd2dMusic],
        ..ExperimentConfig::default()
    };
    let report = runtime_bench(&cfg, 11)?;
    println!("{} interleaved repetitions per method", report.reps);
    for rt in &report.runtimes {
        let reference = REFERENCE_RUNTIMES_S
            .iter()
            .find(|(m, _)| *m == rt.method)
            .map(|(_, s)| *s);
        println!(
            "{:<13} median {:.4} s (reference {:?} s)",
            rt.method.as_str(),
            rt.median_seconds,
            reference
        );
    }
    if let Some(ok) = report.ordering_ok {
        println!("fa-had-music < jad-rd-music < fd-2d-music: {}", if ok { "holds" } else { "violated" });
    }
    Ok(())
}
