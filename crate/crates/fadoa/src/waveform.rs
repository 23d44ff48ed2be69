//! Pilot signals, the line-of-sight channel, and per-position noisy array
//! snapshots.
//!
//! The quasi-static contract: one `SourceSet` and one pilot stream generate
//! the snapshots of every spatial sampling position within a trial, so
//! cross-position correlations carry the full virtual-aperture information.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{steering_vector, AnglePair, ArrayGeometry, Trajectory};

/// L far-field sources: angle pairs plus complex path gains.
#[derive(Debug, Clone)]
pub struct SourceSet {
    angles: Vec<AnglePair>,
    gains: Vec<Complex64>,
}

impl SourceSet {
    pub fn new(angles: Vec<AnglePair>, gains: Vec<Complex64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidInput("need at least one source".into()));
        }
        if angles.len() != gains.len() {
            return Err(Error::DimensionMismatch {
                context: "SourceSet",
                expected: angles.len().to_string(),
                got: gains.len().to_string(),
            });
        }
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::NonFinite("SourceSet gains"));
        }
        Ok(Self { angles, gains })
    }

    /// Unit gains for every angle.
    pub fn with_unit_gains(angles: Vec<AnglePair>) -> Result<Self> {
        let gains = vec![Complex64::new(1.0, 0.0); angles.len()];
        Self::new(angles, gains)
    }

    pub fn angles(&self) -> &[AnglePair] {
        &self.angles
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Source powers |gamma_l|^2.
    pub fn powers(&self) -> Vec<f64> {
        self.gains.iter().map(|g| g.norm_sqr()).collect()
    }
}

/// L x N_p orthogonal pilot matrix with S S^H = I_L: the first L rows of the
/// N_p-point unitary discrete Fourier basis.
#[derive(Debug, Clone)]
pub struct PilotMatrix {
    data: DMatrix<Complex64>,
}

impl PilotMatrix {
    pub fn new(n_sources: usize, n_pilots: usize) -> Result<Self> {
        if n_sources == 0 {
            return Err(Error::InvalidInput("pilot matrix needs L >= 1 rows".into()));
        }
        if n_pilots < n_sources {
            return Err(Error::InvalidInput(format!(
                "pilot length N_p = {n_pilots} must be at least L = {n_sources}"
            )));
        }
        let scale = 1.0 / (n_pilots as f64).sqrt();
        let data = DMatrix::from_fn(n_sources, n_pilots, |l, n| {
            let phase = -2.0 * PI * (l as f64) * (n as f64) / n_pilots as f64;
            Complex64::from_polar(scale, phase)
        });
        Ok(Self { data })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn n_sources(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_pilots(&self) -> usize {
        self.data.ncols()
    }
}

/// Equivalent transmitted signal: the path gains folded into the pilots,
/// row l = gamma_l * s_l.
pub fn equivalent_signal(sources: &SourceSet, pilots: &PilotMatrix) -> Result<DMatrix<Complex64>> {
    if sources.len() != pilots.n_sources() {
        return Err(Error::DimensionMismatch {
            context: "equivalent_signal",
            expected: sources.len().to_string(),
            got: pilots.n_sources().to_string(),
        });
    }
    let mut s_bar = pilots.matrix().clone();
    for (l, gain) in sources.gains().iter().enumerate() {
        for n in 0..s_bar.ncols() {
            s_bar[(l, n)] *= gain;
        }
    }
    Ok(s_bar)
}

/// The raw N x N_p array output at one spatial sampling position, before any
/// analog combining.
#[derive(Debug, Clone)]
pub struct SnapshotBlock {
    pub position: usize,
    pub data: DMatrix<Complex64>,
}

/// Array manifold of the displaced array at position `k`: column l is the
/// steering vector for source l evaluated at the shifted element coordinates.
pub fn manifold_at_position(
    geom: &ArrayGeometry,
    traj: &Trajectory,
    angles: &[AnglePair],
    k: usize,
) -> DMatrix<Complex64> {
    let (dx, dy) = traj.displacements()[k];
    let shifted: Vec<(f64, f64)> = geom.elements().iter().map(|(x, y)| (x + dx, y + dy)).collect();
    let mut a = DMatrix::zeros(shifted.len(), angles.len());
    for (l, ang) in angles.iter().enumerate() {
        let col = steering_vector(&shifted, *ang);
        for (n, v) in col.into_iter().enumerate() {
            a[(n, l)] = v;
        }
    }
    a
}

/// Snapshots at position `k`: A_k * S_bar + N_k, with N_k i.i.d. circular
/// complex Gaussian of per-entry variance `noise_var`. Deterministic given
/// the RNG state.
pub fn snapshots_at_position<R: Rng>(
    k: usize,
    geom: &ArrayGeometry,
    traj: &Trajectory,
    sources: &SourceSet,
    pilots: &PilotMatrix,
    noise_var: f64,
    rng: &mut R,
) -> Result<SnapshotBlock> {
    if k >= traj.len() {
        return Err(Error::OutOfRange(format!(
            "position {k} >= trajectory length {}",
            traj.len()
        )));
    }
    if noise_var < 0.0 || !noise_var.is_finite() {
        return Err(Error::InvalidInput(format!("noise variance {noise_var} must be >= 0")));
    }
    let s_bar = equivalent_signal(sources, pilots)?;
    let a_k = manifold_at_position(geom, traj, sources.angles(), k);
    let mut data = a_k * s_bar;
    if noise_var > 0.0 {
        let sigma = (noise_var / 2.0).sqrt();
        for v in data.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(sigma * re, sigma * im);
        }
    }
    Ok(SnapshotBlock { position: k, data })
}

/// Per-entry noise variance for a nominal SNR in dB, under unit expected
/// per-symbol signal power: sigma^2 = 10^(-snr/10).
pub fn snr_db_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Inverse of [`snr_db_to_noise_var`].
pub fn noise_var_to_snr_db(noise_var: f64) -> f64 {
    -10.0 * noise_var.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TrajectoryAxis;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pilot_l1_np1_is_unit() {
        let p = PilotMatrix::new(1, 1).unwrap();
        assert!((p.matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pilots_orthonormal_small() {
        let p = PilotMatrix::new(2, 4).unwrap();
        let gram = p.matrix() * p.matrix().adjoint();
        let eye = DMatrix::<Complex64>::identity(2, 2);
        assert!((gram - eye).norm() < 1e-12);
    }

    #[test]
    fn pilots_gram_matrix_oracle() {
        // Direct Gram-matrix oracle: entry (i, j) = sum_n s_i(n) conj(s_j(n)).
        let p = PilotMatrix::new(6, 64).unwrap();
        let m = p.matrix();
        for i in 0..6 {
            for j in 0..6 {
                let mut acc = Complex64::ZERO;
                for n in 0..64 {
                    acc += m[(i, n)] * m[(j, n)].conj();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (acc - Complex64::new(expect, 0.0)).norm() <= 1e-12,
                    "gram({i},{j}) = {acc}"
                );
            }
        }
    }

    #[test]
    fn pilots_reject_short_frames() {
        assert!(PilotMatrix::new(4, 3).is_err());
        assert!(PilotMatrix::new(0, 3).is_err());
    }

    #[test]
    fn equivalent_signal_unit_gains_is_pilots() {
        let angles = vec![AnglePair::from_degrees(10.0, 20.0).unwrap(); 2];
        let sources = SourceSet::with_unit_gains(angles).unwrap();
        let pilots = PilotMatrix::new(2, 8).unwrap();
        let s_bar = equivalent_signal(&sources, &pilots).unwrap();
        assert!((s_bar - pilots.matrix()).norm() < 1e-15);
    }

    #[test]
    fn equivalent_signal_scales_rows() {
        let angles = vec![AnglePair::from_degrees(10.0, 20.0).unwrap()];
        let sources = SourceSet::new(angles, vec![Complex64::new(0.0, 2.0)]).unwrap();
        let pilots = PilotMatrix::new(1, 4).unwrap();
        let s_bar = equivalent_signal(&sources, &pilots).unwrap();
        let expect = pilots.matrix().map(|v| v * Complex64::new(0.0, 2.0));
        assert!((s_bar - expect).norm() < 1e-15);
    }

    #[test]
    fn equivalent_signal_power_matches_direct_sum() {
        // p_hat per row = |gamma_l|^2 * mean per-symbol pilot power.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = 3;
        let n_p = 50;
        let angles: Vec<AnglePair> = (0..l)
            .map(|i| AnglePair::from_degrees(-30.0 + 20.0 * i as f64, 10.0).unwrap())
            .collect();
        let gains: Vec<Complex64> = (0..l)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 2.0)
            .collect();
        let sources = SourceSet::new(angles, gains.clone()).unwrap();
        let pilots = PilotMatrix::new(l, n_p).unwrap();
        let s_bar = equivalent_signal(&sources, &pilots).unwrap();
        for i in 0..l {
            let p_hat: f64 =
                (0..n_p).map(|n| s_bar[(i, n)].norm_sqr()).sum::<f64>() / n_p as f64;
            let row_power: f64 =
                (0..n_p).map(|n| pilots.matrix()[(i, n)].norm_sqr()).sum::<f64>() / n_p as f64;
            let direct = gains[i].norm_sqr() * row_power;
            assert!((p_hat - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_single_source_is_rank_one() {
        let geom = ArrayGeometry::ula_y(4, 0.5).unwrap();
        let traj = Trajectory::identity();
        let ang = AnglePair::from_degrees(25.0, 40.0).unwrap();
        let sources = SourceSet::with_unit_gains(vec![ang]).unwrap();
        let pilots = PilotMatrix::new(1, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let block =
            snapshots_at_position(0, &geom, &traj, &sources, &pilots, 0.0, &mut rng).unwrap();
        let a = DVector::from_vec(steering_vector(geom.elements(), ang));
        let srow = pilots.matrix().row(0).clone_owned();
        let expect = &a * &srow;
        assert!((&block.data - expect).norm() < 1e-12);
    }

    #[test]
    fn broadside_sources_make_identical_rows() {
        let geom = ArrayGeometry::ula_y(5, 0.5).unwrap();
        let traj = Trajectory::identity();
        let angles = vec![
            AnglePair::from_degrees(0.0, 31.0).unwrap(),
            AnglePair::from_degrees(0.0, -57.0).unwrap(),
        ];
        let sources = SourceSet::with_unit_gains(angles).unwrap();
        let pilots = PilotMatrix::new(2, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let block =
            snapshots_at_position(0, &geom, &traj, &sources, &pilots, 0.0, &mut rng).unwrap();
        for r in 1..5 {
            let diff = block.data.row(r) - block.data.row(0);
            assert!(diff.norm() < 1e-12, "row {r} differs");
        }
    }

    #[test]
    fn sample_covariance_converges_to_analytic_expectation() {
        // (1/N_p) Y Y^H -> A R_s A^H + sigma^2 I at large N_p, with
        // R_s = (1/N_p) S_bar S_bar^H known analytically from the gains.
        let n_p = 100_000;
        let geom = ArrayGeometry::ula_y(4, 0.5).unwrap();
        let traj = Trajectory::identity();
        let angles = vec![
            AnglePair::from_degrees(-20.0, 35.0).unwrap(),
            AnglePair::from_degrees(42.0, -10.0).unwrap(),
        ];
        // Unit per-symbol power: gains scaled by sqrt(N_p) against the
        // orthonormal pilots.
        let scale = (n_p as f64).sqrt();
        let gains = vec![
            Complex64::new(1.0, 0.4).unscale((1.0f64 + 0.16).sqrt()) * scale,
            Complex64::new(0.6, -0.8) * scale,
        ];
        let sources = SourceSet::new(angles.clone(), gains.clone()).unwrap();
        let pilots = PilotMatrix::new(2, n_p).unwrap();
        let sigma2 = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let block =
            snapshots_at_position(0, &geom, &traj, &sources, &pilots, sigma2, &mut rng).unwrap();
        let sample = (&block.data * block.data.adjoint()).scale(1.0 / n_p as f64);
        let a = manifold_at_position(&geom, &traj, &angles, 0);
        let r_s = DMatrix::from_diagonal(&DVector::from_vec(
            gains.iter().map(|g| Complex64::new(g.norm_sqr() / n_p as f64, 0.0)).collect(),
        ));
        let expect =
            &a * r_s * a.adjoint() + DMatrix::<Complex64>::identity(4, 4).scale(sigma2);
        let rel = (&sample - &expect).norm() / expect.norm();
        assert!(rel < 0.05, "relative Frobenius error {rel}");
    }

    #[test]
    fn noise_independent_across_positions() {
        // E{Y_k1 Y_k2^H} has no noise term for k1 != k2: with zero signal the
        // cross-covariance must vanish as N_p grows.
        let n_p = 20_000;
        let geom = ArrayGeometry::ula_y(3, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let traj = Trajectory::random(&mut rng, 2, 0.15, 0.45, TrajectoryAxis::X).unwrap();
        let angles = vec![AnglePair::from_degrees(10.0, 10.0).unwrap()];
        let sources = SourceSet::new(angles, vec![Complex64::ZERO]).unwrap();
        let pilots = PilotMatrix::new(1, n_p).unwrap();
        let mut rng_a = ChaCha8Rng::seed_from_u64(101);
        let mut rng_b = ChaCha8Rng::seed_from_u64(202);
        let b0 =
            snapshots_at_position(0, &geom, &traj, &sources, &pilots, 1.0, &mut rng_a).unwrap();
        let b1 =
            snapshots_at_position(1, &geom, &traj, &sources, &pilots, 1.0, &mut rng_b).unwrap();
        let cross = (&b0.data * b1.data.adjoint()).scale(1.0 / n_p as f64);
        let auto = (&b0.data * b0.data.adjoint()).scale(1.0 / n_p as f64);
        assert!(cross.norm() < 0.05 * auto.norm(), "cross {} auto {}", cross.norm(), auto.norm());
    }

    #[test]
    fn snr_helper_round_trips() {
        for snr in [-10.0, -5.0, 0.0, 2.5, 5.0, 10.0, 20.0] {
            let v = snr_db_to_noise_var(snr);
            let back = noise_var_to_snr_db(v);
            assert!((back - snr).abs() < 1e-12, "snr {snr} -> {v} -> {back}");
        }
        assert_eq!(snr_db_to_noise_var(0.0), 1.0);
    }
}
