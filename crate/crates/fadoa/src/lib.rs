//! 2-D direction-of-arrival estimation with a fluid antenna array behind a
//! hybrid analog-digital front end.
//!
//! The array performs K coordinated moves, sweeping out an N*K-element
//! virtual aperture; a switch/phase-shifter network compresses each position
//! snapshot onto a single RF chain. On top of that acquisition model the
//! crate provides:
//!
//! - [`fast_music`]: FA-HAD-MUSIC, 2-D MUSIC directly on the phase-compressed
//!   observations,
//! - [`scm_recon`]: element-wise reconstruction of the full virtual-array
//!   spatial covariance from scalar combined measurements,
//! - [`jad_music`]: JAD-RD-MUSIC, a Jacobi-Anger reduced-dimension 2-D MUSIC
//!   on the reconstructed covariance,
//! - [`crlb`]: the compressive-model Cramér-Rao bound and single-source
//!   Fisher approximations,
//! - [`baselines`]: fully-digital UPA, fully-digital fluid-array, and
//!   single-fluid-antenna reference pipelines,
//! - [`experiment`]: seeded Monte-Carlo sweeps, RMSE/NSE metrics, runtime
//!   benchmarks, and CSV/JSON emission.
//!
//! See the `examples/` directory for one runnable example per capability;
//! the `fadoa` binary exposes the same flows as subcommands.

pub mod baselines;
pub mod crlb;
pub mod error;
pub mod experiment;
pub mod fast_music;
pub mod frontend;
pub mod geometry;
pub mod jad_music;
pub mod numerics;
pub mod scm_recon;
pub mod waveform;

pub use error::{Error, Result};
pub use geometry::{
    build_virtual_array, steering_derivatives, steering_vector, AnglePair, ArrayGeometry,
    Trajectory, TrajectoryAxis, VirtualArray,
};
