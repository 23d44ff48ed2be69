//! FA-HAD-MUSIC: 2-D MUSIC directly on the phase-compressed observations.
//!
//! The K*T x K*T covariance of the stacked combined measurements is
//! eigendecomposed once; the pseudospectrum
//! P(theta, phi) = 1 / (a^H W U_n U_n^H W^H a) is then scanned on a coarse
//! grid and refined on a fine lattice around each of the L peaks. The
//! denominator is evaluated through the factored form
//! ||W^H a||^2 - ||U_s^H W^H a||^2, which equals the projector quadratic
//! form exactly ([U_s U_n] is unitary) at a fraction of its cost.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frontend::MeasurementStack;
use crate::geometry::{steering_vector_into, AnglePair, VirtualArray};
use crate::numerics::{find_peaks_2d, hermitian_evd, top_local_maxima_2d, GridAxis};

/// The `count` tallest refined candidates, any two at least
/// `min_separation_deg` apart (Chebyshev over the angle pair). Refinement
/// windows of neighboring coarse candidates may converge onto one spike;
/// this collapses the duplicates.
pub(crate) fn select_distinct(
    mut refined: Vec<AngleEstimate>,
    count: usize,
    min_separation_deg: f64,
) -> Result<Vec<AngleEstimate>> {
    refined.sort_by(|a, b| b.height.partial_cmp(&a.height).unwrap_or(std::cmp::Ordering::Equal));
    let mut picked: Vec<AngleEstimate> = Vec::with_capacity(count);
    for cand in refined {
        if picked.len() == count {
            break;
        }
        let distinct = picked.iter().all(|p| {
            let dt = (p.angle.theta_deg() - cand.angle.theta_deg()).abs();
            let dp = (p.angle.phi_deg() - cand.angle.phi_deg()).abs();
            dt.max(dp) >= min_separation_deg
        });
        if distinct {
            picked.push(cand);
        }
    }
    if picked.len() < count {
        return Err(Error::ResolutionFailure { found: picked.len(), requested: count });
    }
    Ok(picked)
}

/// Sample covariance of the compressed observation stack.
#[derive(Debug, Clone)]
pub struct CompressedCovariance {
    pub matrix: DMatrix<Complex64>,
    pub n_pilots: usize,
}

/// R_com = (1/N_p) Y Y^H.
pub fn compressed_covariance(
    y: &DMatrix<Complex64>,
    n_pilots: usize,
) -> Result<CompressedCovariance> {
    if y.ncols() != n_pilots {
        return Err(Error::DimensionMismatch {
            context: "compressed_covariance",
            expected: n_pilots.to_string(),
            got: y.ncols().to_string(),
        });
    }
    if n_pilots == 0 {
        return Err(Error::InvalidInput("covariance needs at least one pilot column".into()));
    }
    let matrix = (y * y.adjoint()).scale(1.0 / n_pilots as f64);
    Ok(CompressedCovariance { matrix, n_pilots })
}

/// Wall-clock spent in one stage of an estimator.
#[derive(Debug, Clone)]
pub struct StageTiming {
    pub label: &'static str,
    pub seconds: f64,
}

/// One estimated direction with its pseudospectrum height.
#[derive(Debug, Clone)]
pub struct AngleEstimate {
    pub angle: AnglePair,
    pub height: f64,
}

/// The L estimated directions of one run, with grid metadata and per-stage
/// wall-clock times.
#[derive(Debug, Clone)]
pub struct AngleEstimateSet {
    pub estimates: Vec<AngleEstimate>,
    pub coarse_step_deg: f64,
    pub fine_step_deg: f64,
    pub stages: Vec<StageTiming>,
}

impl AngleEstimateSet {
    pub fn angles(&self) -> Vec<AnglePair> {
        self.estimates.iter().map(|e| e.angle).collect()
    }

    pub fn total_seconds(&self) -> f64 {
        self.stages.iter().map(|s| s.seconds).sum()
    }
}

/// Two-stage search grid for one angular axis: a coarse lattice over
/// [lo_deg, hi_deg], then a fine lattice in a window around each coarse peak.
/// Both lattices are anchored at integer multiples of their steps.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TwoStageGrid {
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub coarse_step_deg: f64,
    pub fine_step_deg: f64,
    pub refine_window_deg: f64,
}

impl TwoStageGrid {
    /// 1 degree coarse over the clipped domain |angle| <= 89.5 deg, 0.05 deg
    /// fine in +-1.5 deg windows.
    pub fn standard() -> Self {
        Self {
            lo_deg: -89.5,
            hi_deg: 89.5,
            coarse_step_deg: 1.0,
            fine_step_deg: 0.05,
            refine_window_deg: 1.5,
        }
    }

    pub fn coarse_axis(&self) -> Result<GridAxis> {
        GridAxis::lattice_deg(self.lo_deg, self.hi_deg, self.coarse_step_deg)
    }

    pub fn fine_axis_around(&self, center_deg: f64) -> Result<GridAxis> {
        GridAxis::lattice_deg(
            (center_deg - self.refine_window_deg).max(self.lo_deg),
            (center_deg + self.refine_window_deg).min(self.hi_deg),
            self.fine_step_deg,
        )
    }
}

/// Evaluator for the FA-HAD-MUSIC pseudospectrum denominator
/// a^H (W U_n U_n^H W^H) a. Read-only once built; grid cells can be
/// evaluated from any number of threads.
pub struct FaHadSpectrum {
    /// Conjugated combining weights per (k, tau) slot, each of length N.
    w_conj: Vec<Vec<Complex64>>,
    /// K*T x L signal-subspace basis.
    u_s: DMatrix<Complex64>,
    coords: Vec<(f64, f64)>,
    n_elements: usize,
    n_positions: usize,
}

impl FaHadSpectrum {
    pub fn new(
        stack: &MeasurementStack,
        virt: &VirtualArray,
        u_s: DMatrix<Complex64>,
    ) -> Result<Self> {
        let n = stack.n_elements();
        let k = stack.n_positions();
        if virt.n_elements() != n || virt.n_positions() != k {
            return Err(Error::DimensionMismatch {
                context: "FaHadSpectrum",
                expected: format!("virtual array {}x{}", n, k),
                got: format!("{}x{}", virt.n_elements(), virt.n_positions()),
            });
        }
        let slots = k * stack.n_frames();
        if u_s.nrows() != slots {
            return Err(Error::DimensionMismatch {
                context: "FaHadSpectrum",
                expected: slots.to_string(),
                got: u_s.nrows().to_string(),
            });
        }
        let w = stack.w();
        let mut w_conj = Vec::with_capacity(slots);
        for tau in 0..stack.n_frames() {
            for ki in 0..k {
                let col = tau * k + ki;
                let mut block = Vec::with_capacity(n);
                for i in 0..n {
                    block.push(w[(ki * n + i, col)].conj());
                }
                w_conj.push(block);
            }
        }
        Ok(Self {
            w_conj,
            u_s,
            coords: virt.coords().to_vec(),
            n_elements: n,
            n_positions: k,
        })
    }

    /// Pseudospectrum denominator at one angle, floored away from zero so the
    /// reciprocal stays finite.
    pub fn denominator(&self, angle: AnglePair) -> f64 {
        let mut a = vec![Complex64::ZERO; self.coords.len()];
        steering_vector_into(&self.coords, angle, &mut a);
        self.denominator_with_scratch(&a)
    }

    fn denominator_with_scratch(&self, a: &[Complex64]) -> f64 {
        let n = self.n_elements;
        let k = self.n_positions;
        let slots = self.w_conj.len();
        // v = W^H a, exploiting the one-block-per-column support of W.
        let mut v = vec![Complex64::ZERO; slots];
        for (slot, wc) in self.w_conj.iter().enumerate() {
            let ki = slot % k;
            let base = ki * n;
            let mut acc = Complex64::ZERO;
            for i in 0..n {
                acc += wc[i] * a[base + i];
            }
            v[slot] = acc;
        }
        let v_norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        // ||U_s^H v||^2 via the signal columns.
        let mut sig = 0.0;
        for l in 0..self.u_s.ncols() {
            let col = self.u_s.column(l);
            let mut acc = Complex64::ZERO;
            for s in 0..slots {
                acc += col[s].conj() * v[s];
            }
            sig += acc.norm_sqr();
        }
        (v_norm2 - sig).max(1e-280)
    }

    fn scan(&self, theta: &GridAxis, phi: &GridAxis) -> Vec<f64> {
        let mut values = vec![0.0; theta.len() * phi.len()];
        let mut a = vec![Complex64::ZERO; self.coords.len()];
        for (it, th) in theta.iter().enumerate() {
            for (ip, ph) in phi.iter().enumerate() {
                steering_vector_into(&self.coords, AnglePair { theta: th, phi: ph }, &mut a);
                values[it * phi.len() + ip] = 1.0 / self.denominator_with_scratch(&a);
            }
        }
        values
    }
}

/// FA-HAD-MUSIC: compressed covariance, subspace split, and a two-stage 2-D
/// spectral search over the virtual-array manifold. Returns exactly `l`
/// angle pairs.
pub fn fa_had_music(
    stack: &MeasurementStack,
    virt: &VirtualArray,
    l: usize,
    theta_grid: &TwoStageGrid,
    phi_grid: &TwoStageGrid,
) -> Result<AngleEstimateSet> {
    let slots = stack.n_positions() * stack.n_frames();
    if slots <= l {
        return Err(Error::InvalidInput(format!(
            "noise subspace is empty: K*T = {slots} must exceed L = {l}"
        )));
    }
    if l == 0 {
        return Err(Error::InvalidInput("need at least one source".into()));
    }
    let mut stages = Vec::new();

    let t0 = Instant::now();
    let r_com = compressed_covariance(stack.y(), stack.y().ncols())?;
    stages.push(StageTiming { label: "covariance", seconds: t0.elapsed().as_secs_f64() });

    let t1 = Instant::now();
    let eig = hermitian_evd(&r_com.matrix)?;
    let u_s = eig.vectors.columns(0, l).clone_owned();
    stages.push(StageTiming { label: "evd", seconds: t1.elapsed().as_secs_f64() });

    let t2 = Instant::now();
    let spectrum = FaHadSpectrum::new(stack, virt, u_s)?;
    let theta_axis = theta_grid.coarse_axis()?;
    let phi_axis = phi_grid.coarse_axis()?;
    let coarse = spectrum.scan(&theta_axis, &phi_axis);
    // Narrow pseudospectrum spikes undersample on the coarse lattice, so
    // refine a surplus of candidates and pick the L largest at fine
    // resolution. The >= L maxima contract still gates resolution failures.
    find_peaks_2d(&coarse, theta_axis.len(), phi_axis.len(), l, 2)?;
    let candidates =
        top_local_maxima_2d(&coarse, theta_axis.len(), phi_axis.len(), 2 * l + 4, 2);
    stages.push(StageTiming { label: "coarse-search", seconds: t2.elapsed().as_secs_f64() });

    let t3 = Instant::now();
    let mut refined = Vec::with_capacity(candidates.len());
    for (it, ip) in candidates {
        let th_c = theta_axis.value(it).to_degrees();
        let ph_c = phi_axis.value(ip).to_degrees();
        let fine_theta = theta_grid.fine_axis_around(th_c)?;
        let fine_phi = phi_grid.fine_axis_around(ph_c)?;
        let fine = spectrum.scan(&fine_theta, &fine_phi);
        let (mut best, mut best_val) = (0, f64::NEG_INFINITY);
        for (idx, &v) in fine.iter().enumerate() {
            if v > best_val {
                best = idx;
                best_val = v;
            }
        }
        let bt = best / fine_phi.len();
        let bp = best % fine_phi.len();
        refined.push(AngleEstimate {
            angle: AnglePair::new(fine_theta.value(bt), fine_phi.value(bp))?,
            height: best_val,
        });
    }
    let estimates = select_distinct(refined, l, theta_grid.coarse_step_deg)?;
    stages.push(StageTiming { label: "refine", seconds: t3.elapsed().as_secs_f64() });

    Ok(AngleEstimateSet {
        estimates,
        coarse_step_deg: theta_grid.coarse_step_deg,
        fine_step_deg: theta_grid.fine_step_deg,
        stages,
    })
}
