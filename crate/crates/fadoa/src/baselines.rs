//! Reference acquisition modes and estimators: fully digital 2-D MUSIC on a
//! uniform planar array (FD-2D-MUSIC), the fully digital fluid array (FDFA),
//! and single-fluid-antenna sequential sampling (SFA).

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fast_music::{AngleEstimate, AngleEstimateSet, StageTiming, TwoStageGrid};
use crate::geometry::{
    build_virtual_array, steering_vector_into, AnglePair, ArrayGeometry, Trajectory, VirtualArray,
};
use crate::jad_music::{jad_rd_music, JadGrids, PinvStrategy};
use crate::numerics::{find_peaks_2d, hermitian_evd, top_local_maxima_2d};
use crate::waveform::SnapshotBlock;

/// Architecture tag for the acquisition-mode accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeTag {
    FdUpa,
    Fdfa,
    Sfa,
    FaHad,
}

/// One row of the architecture comparison: hardware and overhead counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcquisitionMode {
    pub tag: ModeTag,
    pub antennas: usize,
    pub rf_chains: usize,
    pub mechanical_adjustments: usize,
    pub pilot_frames: usize,
}

impl AcquisitionMode {
    /// Proposed mode: N antennas, one RF chain, K adjustments, T*K pilot
    /// frames, valid only for T < N.
    pub fn fa_had(n: usize, k: usize, t: usize) -> Result<Self> {
        if t >= n {
            return Err(Error::InvalidInput(format!(
                "hybrid acquisition requires T < N, got T = {t}, N = {n}"
            )));
        }
        Ok(Self {
            tag: ModeTag::FaHad,
            antennas: n,
            rf_chains: 1,
            mechanical_adjustments: k,
            pilot_frames: t * k,
        })
    }

    /// Fully digital fluid array: one RF chain per element.
    pub fn fdfa(n: usize, k: usize) -> Self {
        Self {
            tag: ModeTag::Fdfa,
            antennas: n,
            rf_chains: n,
            mechanical_adjustments: k,
            pilot_frames: k,
        }
    }

    /// Single fluid antenna visiting all N*K virtual positions.
    pub fn sfa(n: usize, k: usize) -> Self {
        Self {
            tag: ModeTag::Sfa,
            antennas: 1,
            rf_chains: 1,
            mechanical_adjustments: n * k,
            pilot_frames: n * k,
        }
    }

    /// Static fully digital UPA: no movement, one acquisition.
    pub fn fd_upa(n_upa: usize) -> Self {
        Self {
            tag: ModeTag::FdUpa,
            antennas: n_upa,
            rf_chains: n_upa,
            mechanical_adjustments: 0,
            pilot_frames: 1,
        }
    }
}

/// The densest half-wavelength UPA inside the bounding box of the virtual
/// aperture (the "identical spatial constraints" reference array).
pub fn upa_in_bounding_box(virt: &VirtualArray) -> Result<ArrayGeometry> {
    let (mut x_min, mut x_max) = (f64::MAX, f64::MIN);
    let (mut y_min, mut y_max) = (f64::MAX, f64::MIN);
    for &(x, y) in virt.coords() {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let nx = ((x_max - x_min) / 0.5).floor() as usize + 1;
    let ny = ((y_max - y_min) / 0.5).floor() as usize + 1;
    ArrayGeometry::upa(nx, ny, 0.5, 0.5, (x_min, y_min))
}

/// Classical 2-D MUSIC on an arbitrary covariance/coordinate pair: EVD,
/// noise-subspace denominator ||U_n^H a||^2 per grid cell, two-stage search.
/// This is the full-search engine the reduced-dimension method is compared
/// against.
pub fn music_2d_on_covariance(
    cov: &DMatrix<Complex64>,
    coords: &[(f64, f64)],
    l: usize,
    theta_grid: &TwoStageGrid,
    phi_grid: &TwoStageGrid,
) -> Result<AngleEstimateSet> {
    let n = coords.len();
    if cov.nrows() != n || cov.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "music_2d_on_covariance",
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", cov.nrows(), cov.ncols()),
        });
    }
    if l == 0 || l >= n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= L < {n} for a nonempty noise subspace, got L = {l}"
        )));
    }
    let mut stages = Vec::new();
    let t0 = Instant::now();
    let eig = hermitian_evd(cov)?;
    let u_n = eig.vectors.columns(l, n - l).clone_owned();
    stages.push(StageTiming { label: "evd", seconds: t0.elapsed().as_secs_f64() });

    let scan = |theta_axis: &crate::numerics::GridAxis,
                phi_axis: &crate::numerics::GridAxis|
     -> Vec<f64> {
        let mut values = vec![0.0; theta_axis.len() * phi_axis.len()];
        let mut a = vec![Complex64::ZERO; n];
        for (it, th) in theta_axis.iter().enumerate() {
            for (ip, ph) in phi_axis.iter().enumerate() {
                steering_vector_into(coords, AnglePair { theta: th, phi: ph }, &mut a);
                let mut den = 0.0;
                for c in 0..u_n.ncols() {
                    let col = u_n.column(c);
                    let mut acc = Complex64::ZERO;
                    for i in 0..n {
                        acc += col[i].conj() * a[i];
                    }
                    den += acc.norm_sqr();
                }
                values[it * phi_axis.len() + ip] = 1.0 / den.max(1e-280);
            }
        }
        values
    };

    let t1 = Instant::now();
    let theta_axis = theta_grid.coarse_axis()?;
    let phi_axis = phi_grid.coarse_axis()?;
    let coarse = scan(&theta_axis, &phi_axis);
    find_peaks_2d(&coarse, theta_axis.len(), phi_axis.len(), l, 2)?;
    let candidates =
        top_local_maxima_2d(&coarse, theta_axis.len(), phi_axis.len(), 2 * l + 4, 2);
    stages.push(StageTiming { label: "coarse-search", seconds: t1.elapsed().as_secs_f64() });

    let t2 = Instant::now();
    let mut refined = Vec::with_capacity(candidates.len());
    for (it, ip) in candidates {
        let fine_theta = theta_grid.fine_axis_around(theta_axis.value(it).to_degrees())?;
        let fine_phi = phi_grid.fine_axis_around(phi_axis.value(ip).to_degrees())?;
        let fine = scan(&fine_theta, &fine_phi);
        let (mut best, mut best_val) = (0, f64::NEG_INFINITY);
        for (idx, &v) in fine.iter().enumerate() {
            if v > best_val {
                best = idx;
                best_val = v;
            }
        }
        refined.push(AngleEstimate {
            angle: AnglePair::new(
                fine_theta.value(best / fine_phi.len()),
                fine_phi.value(best % fine_phi.len()),
            )?,
            height: best_val,
        });
    }
    let estimates =
        crate::fast_music::select_distinct(refined, l, theta_grid.coarse_step_deg)?;
    stages.push(StageTiming { label: "refine", seconds: t2.elapsed().as_secs_f64() });

    Ok(AngleEstimateSet {
        estimates,
        coarse_step_deg: theta_grid.coarse_step_deg,
        fine_step_deg: theta_grid.fine_step_deg,
        stages,
    })
}

/// FD-2D-MUSIC: sample covariance of static UPA snapshots, then the
/// classical full search.
pub fn fd_2d_music(
    snapshots: &SnapshotBlock,
    geom: &ArrayGeometry,
    l: usize,
    theta_grid: &TwoStageGrid,
    phi_grid: &TwoStageGrid,
) -> Result<AngleEstimateSet> {
    if snapshots.data.nrows() != geom.len() {
        return Err(Error::DimensionMismatch {
            context: "fd_2d_music",
            expected: geom.len().to_string(),
            got: snapshots.data.nrows().to_string(),
        });
    }
    let t0 = Instant::now();
    let n_p = snapshots.data.ncols();
    let cov = (&snapshots.data * snapshots.data.adjoint()).scale(1.0 / n_p as f64);
    let cov_time = t0.elapsed().as_secs_f64();
    let mut out = music_2d_on_covariance(&cov, geom.elements(), l, theta_grid, phi_grid)?;
    out.stages.insert(0, StageTiming { label: "covariance", seconds: cov_time });
    Ok(out)
}

/// Direct sample covariance of the stacked per-position snapshots on the
/// virtual aperture: (1/N_p) Upsilon Upsilon^H, position-major.
pub fn virtual_sample_covariance(blocks: &[SnapshotBlock]) -> Result<DMatrix<Complex64>> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput("need at least one snapshot block".into()));
    }
    let n = blocks[0].data.nrows();
    let n_p = blocks[0].data.ncols();
    if blocks.iter().any(|b| b.data.nrows() != n || b.data.ncols() != n_p) {
        return Err(Error::InvalidInput("snapshot blocks disagree on dimensions".into()));
    }
    let k = blocks.len();
    let mut stacked = DMatrix::<Complex64>::zeros(n * k, n_p);
    for (ki, b) in blocks.iter().enumerate() {
        for r in 0..n {
            for c in 0..n_p {
                stacked[(ki * n + r, c)] = b.data[(r, c)];
            }
        }
    }
    Ok((&stacked * stacked.adjoint()).scale(1.0 / n_p as f64))
}

/// FDFA: the fully digital fluid array observes every element at every
/// position; its direct virtual-array sample covariance feeds the same
/// reduced-dimension estimator as the reconstructed-covariance pipeline.
pub fn fdfa_music(
    blocks: &[SnapshotBlock],
    virt: &VirtualArray,
    l: usize,
    eps: f64,
    grids: &JadGrids,
    pinv: PinvStrategy,
) -> Result<AngleEstimateSet> {
    let t0 = Instant::now();
    let cov = virtual_sample_covariance(blocks)?;
    let cov_time = t0.elapsed().as_secs_f64();
    let mut out = jad_rd_music(&cov, virt, l, eps, grids, pinv)?;
    out.stages.insert(0, StageTiming { label: "covariance", seconds: cov_time });
    Ok(out)
}

/// The single-fluid-antenna equivalent of a coordinated acquisition: one
/// element whose N*K-stop trajectory visits exactly the virtual coordinates.
#[derive(Debug, Clone)]
pub struct SfaMode {
    pub geometry: ArrayGeometry,
    pub trajectory: Trajectory,
    pub accounting: AcquisitionMode,
}

pub fn sfa_mode(geom: &ArrayGeometry, traj: &Trajectory) -> Result<SfaMode> {
    let virt = build_virtual_array(geom, traj);
    let origin = virt.coords()[0];
    let geometry = ArrayGeometry::new(vec![origin])?;
    let displacements: Vec<(f64, f64)> = virt
        .coords()
        .iter()
        .map(|&(x, y)| (x - origin.0, y - origin.1))
        .collect();
    let trajectory = Trajectory::new(displacements)?;
    Ok(SfaMode {
        geometry,
        trajectory,
        accounting: AcquisitionMode::sfa(geom.len(), traj.len()),
    })
}
