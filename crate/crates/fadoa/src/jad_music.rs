//! JAD-RD-MUSIC: Jacobi-Anger dimension-reduced 2-D MUSIC on a full
//! virtual-array covariance.
//!
//! The planar manifold factorizes per element as
//! a_i(theta, phi) = e^{j z_i(phi) sin(theta)} = sum_l J_l(z_i(phi)) e^{j l theta}
//! with z_i(phi) = 2 pi (x_i cos(phi) + y_i sin(phi)). Truncating at order L1
//! gives a(theta, phi) ~ B(phi) e(theta), so azimuth is eliminated in closed
//! form and elevation reduces to the 1-D search
//! S(phi) = d^H E^+(phi) d,  E(phi) = B^H(phi) U_n U_n^H B(phi),
//! where d selects the l = 0 harmonic. E(phi) is structurally rank-deficient
//! (J_{-l} = (-1)^l J_l makes mirrored columns equal up to sign), hence the
//! pseudo-inverse. Folding the mirrored columns halves the dimension without
//! changing d^H E^+ d, which is how the hot loop evaluates it.
//!
//! Azimuth follows per elevation peak from the 1-D spectrum
//! P(theta | phi) = 1 / ||U_n^H a(theta, phi)||^2, searched once per peak, so
//! pairing is automatic. Sources sharing an elevation are out of contract:
//! each elevation peak yields exactly one azimuth.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fast_music::{AngleEstimate, AngleEstimateSet, StageTiming};
use crate::geometry::{steering_vector_into, AnglePair, VirtualArray};
use crate::numerics::{
    bessel_j_row, find_peaks_1d, hermitian_evd, hermitian_pinv_quadform, top_local_maxima_1d,
    truncation_order,
    GridAxis, Spectrum1d,
};
use std::f64::consts::PI;

/// Default Jacobi-Anger truncation tolerance.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Pseudo-inversion policy for the reduced matrix E(phi).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub enum PinvStrategy {
    /// Moore-Penrose with eigenvalues below rel_tol * lambda_max dropped.
    Threshold(f64),
    /// Plain inverse of E + delta * mean_diag * I.
    DiagonalLoading(f64),
}

impl Default for PinvStrategy {
    fn default() -> Self {
        PinvStrategy::Threshold(1e-10)
    }
}

/// The truncated Bessel coefficient matrix B(phi), rows indexed by virtual
/// element, columns by harmonic order -L1..L1.
#[derive(Debug, Clone)]
pub struct BesselManifold {
    matrix: DMatrix<f64>,
    order: u32,
    phi: f64,
}

impl BesselManifold {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Number of retained harmonics, 2 L1 + 1.
    pub fn width(&self) -> usize {
        2 * self.order as usize + 1
    }

    /// The truncated-expansion approximation B(phi) e(theta) of the steering
    /// vector at (theta, self.phi).
    pub fn approx_steering(&self, theta: f64) -> Vec<Complex64> {
        let l1 = self.order as i64;
        let harmonics: Vec<Complex64> = (-l1..=l1)
            .map(|l| Complex64::from_polar(1.0, l as f64 * theta))
            .collect();
        (0..self.matrix.nrows())
            .map(|i| {
                let mut acc = Complex64::ZERO;
                for (c, h) in harmonics.iter().enumerate() {
                    acc += self.matrix[(i, c)] * h;
                }
                acc
            })
            .collect()
    }
}

/// Elevation-dependent expansion arguments z_i(phi) for every virtual
/// element.
fn z_values(coords: &[(f64, f64)], phi: f64) -> Vec<f64> {
    let (sin_phi, cos_phi) = phi.sin_cos();
    coords.iter().map(|(x, y)| 2.0 * PI * (x * cos_phi + y * sin_phi)).collect()
}

/// Builds B(phi) with the truncation order chosen per phi from
/// z_max = max_i |z_i(phi)| and the tolerance eps. The mirrored columns obey
/// J_{-l} = (-1)^l J_l exactly by construction.
pub fn bessel_manifold(virt: &VirtualArray, phi: f64, eps: f64) -> Result<BesselManifold> {
    let z = z_values(virt.coords(), phi);
    let z_max = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let order = truncation_order(z_max, eps)?;
    let l1 = order as usize;
    let mut matrix = DMatrix::zeros(virt.len(), 2 * l1 + 1);
    for (i, &zi) in z.iter().enumerate() {
        let row = bessel_j_row(l1, zi)?;
        for (l, &v) in row.iter().enumerate() {
            matrix[(i, l1 + l)] = v;
            if l > 0 {
                matrix[(i, l1 - l)] = if l % 2 == 1 { -v } else { v };
            }
        }
    }
    Ok(BesselManifold { matrix, order, phi })
}

/// The constraint vector selecting the l = 0 harmonic: one at the center of
/// the 2 L1 + 1 slots, zero elsewhere.
pub fn selector_vector(order: u32) -> DVector<f64> {
    let w = 2 * order as usize + 1;
    let mut d = DVector::zeros(w);
    d[order as usize] = 1.0;
    d
}

/// Shared state of a reduced-dimension search against one covariance.
struct JadContext {
    u_s: DMatrix<Complex64>,
    coords: Vec<(f64, f64)>,
    eps: f64,
    pinv: PinvStrategy,
}

impl JadContext {
    /// S(phi) = d^H E^+(phi) d evaluated through the half-width folding:
    /// with B = B_h F and F F^T = D = diag(1, 2, ..., 2), the value equals
    /// the (0, 0) entry of pinv(D^{1/2} B_h^T Pi B_h D^{1/2}).
    fn elevation_value(&self, phi: f64) -> Result<f64> {
        let z = z_values(&self.coords, phi);
        let z_max = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let order = truncation_order(z_max, self.eps)? as usize;
        let width = order + 1;
        let n = self.coords.len();
        let l = self.u_s.ncols();
        // Half manifold: column-major width x n layout so that both Gram
        // products below stream contiguously over elements.
        let mut b_h = DMatrix::<f64>::zeros(width, n);
        for (i, &zi) in z.iter().enumerate() {
            let row = bessel_j_row(order, zi)?;
            b_h.column_mut(i).copy_from_slice(&row);
        }
        // G = B_h B_h^T in this layout (real symmetric, GEMM-backed).
        let g = &b_h * b_h.transpose();
        // M = U_s^H B_h^T (L x width, complex).
        let mut m = vec![Complex64::ZERO; l * width];
        for li in 0..l {
            let col = self.u_s.column(li);
            for i in 0..n {
                let u = col[i].conj();
                let brow = b_h.column(i);
                let mrow = &mut m[li * width..(li + 1) * width];
                for (a, out) in mrow.iter_mut().enumerate() {
                    *out += u * brow[a];
                }
            }
        }
        // E_h = G - M^H M, then the fold scaling D^{1/2} . D^{1/2} with
        // d_0 = 1 and d_i = sqrt(2) otherwise.
        let mut e_h = DMatrix::<Complex64>::zeros(width, width);
        for a in 0..width {
            for b in a..width {
                let mut acc = Complex64::new(g[(a, b)], 0.0);
                for li in 0..l {
                    acc -= m[li * width + a].conj() * m[li * width + b];
                }
                let scale = if a == 0 { 1.0 } else { std::f64::consts::SQRT_2 }
                    * if b == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                e_h[(a, b)] = acc * scale;
                e_h[(b, a)] = acc.conj() * scale;
            }
        }
        match self.pinv {
            PinvStrategy::Threshold(tol) => hermitian_pinv_quadform(&e_h, 0, tol),
            PinvStrategy::DiagonalLoading(delta) => {
                let mean_diag =
                    e_h.diagonal().iter().map(|z| z.re).sum::<f64>() / width as f64;
                for i in 0..width {
                    e_h[(i, i)] += delta * mean_diag.max(f64::MIN_POSITIVE);
                }
                hermitian_pinv_quadform(&e_h, 0, 0.0)
            }
        }
    }

    /// Conditional azimuth spectrum denominator
    /// ||U_n^H a||^2 = ||a||^2 - ||U_s^H a||^2 (exact: the EVD basis is
    /// unitary), floored away from zero.
    fn azimuth_denominator(&self, theta: f64, phi: f64, scratch: &mut Vec<Complex64>) -> f64 {
        scratch.resize(self.coords.len(), Complex64::ZERO);
        steering_vector_into(&self.coords, AnglePair { theta, phi }, scratch);
        let total = self.coords.len() as f64; // unit-modulus entries
        let mut sig = 0.0;
        for l in 0..self.u_s.ncols() {
            let col = self.u_s.column(l);
            let mut acc = Complex64::ZERO;
            for (i, a) in scratch.iter().enumerate() {
                acc += col[i].conj() * a;
            }
            sig += acc.norm_sqr();
        }
        (total - sig).max(1e-280)
    }
}

fn signal_subspace(
    r_hat: &DMatrix<Complex64>,
    virt: &VirtualArray,
    l: usize,
) -> Result<DMatrix<Complex64>> {
    let nk = virt.len();
    if r_hat.nrows() != nk || r_hat.ncols() != nk {
        return Err(Error::DimensionMismatch {
            context: "jad_music",
            expected: format!("{nk}x{nk}"),
            got: format!("{}x{}", r_hat.nrows(), r_hat.ncols()),
        });
    }
    if l == 0 || l >= nk {
        return Err(Error::InvalidInput(format!(
            "need 1 <= L < N*K for a nonempty noise subspace, got L = {l}, N*K = {nk}"
        )));
    }
    let eig = hermitian_evd(r_hat)?;
    Ok(eig.vectors.columns(0, l).clone_owned())
}

/// The elevation spectrum S(phi) = d^H E^+(phi) d sampled on `phi_axis`,
/// with the truncation order recomputed at every grid point.
pub fn elevation_spectrum(
    r_hat: &DMatrix<Complex64>,
    virt: &VirtualArray,
    phi_axis: &GridAxis,
    l: usize,
    eps: f64,
    pinv: PinvStrategy,
) -> Result<Spectrum1d> {
    let ctx = JadContext {
        u_s: signal_subspace(r_hat, virt, l)?,
        coords: virt.coords().to_vec(),
        eps,
        pinv,
    };
    let mut values = Vec::with_capacity(phi_axis.len());
    for phi in phi_axis.iter() {
        values.push(ctx.elevation_value(phi)?);
    }
    Spectrum1d::new(phi_axis.clone(), values)
}

/// Elevation-then-azimuth search grids.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct JadGrids {
    pub phi_lo_deg: f64,
    pub phi_hi_deg: f64,
    pub phi_coarse_step_deg: f64,
    pub phi_fine_step_deg: f64,
    pub phi_refine_window_deg: f64,
    pub theta_lo_deg: f64,
    pub theta_hi_deg: f64,
    pub theta_step_deg: f64,
}

impl JadGrids {
    /// 0.2 deg coarse elevation with 0.02 deg refinement, 0.05 deg azimuth,
    /// both clipped to |angle| <= 89.5 deg.
    pub fn standard() -> Self {
        Self {
            phi_lo_deg: -89.5,
            phi_hi_deg: 89.5,
            phi_coarse_step_deg: 0.2,
            phi_fine_step_deg: 0.02,
            phi_refine_window_deg: 0.4,
            theta_lo_deg: -89.5,
            theta_hi_deg: 89.5,
            theta_step_deg: 0.05,
        }
    }
}

/// JAD-RD-MUSIC end to end: L elevation peaks from S(phi), a local
/// refinement around each, then one azimuth per refined elevation. Pairing
/// is inherited from the conditioning.
pub fn jad_rd_music(
    r_hat: &DMatrix<Complex64>,
    virt: &VirtualArray,
    l: usize,
    eps: f64,
    grids: &JadGrids,
    pinv: PinvStrategy,
) -> Result<AngleEstimateSet> {
    let mut stages = Vec::new();
    let t0 = Instant::now();
    let ctx = JadContext {
        u_s: signal_subspace(r_hat, virt, l)?,
        coords: virt.coords().to_vec(),
        eps,
        pinv,
    };
    stages.push(StageTiming { label: "evd", seconds: t0.elapsed().as_secs_f64() });

    let t1 = Instant::now();
    let coarse_axis =
        GridAxis::lattice_deg(grids.phi_lo_deg, grids.phi_hi_deg, grids.phi_coarse_step_deg)?;
    let mut coarse = Vec::with_capacity(coarse_axis.len());
    for phi in coarse_axis.iter() {
        coarse.push(ctx.elevation_value(phi)?);
    }
    // As in the 2-D searches: refine a surplus of elevation candidates and
    // keep the L tallest at fine resolution.
    find_peaks_1d(&coarse, l, 2)?;
    let candidates = top_local_maxima_1d(&coarse, l + 2, 2);
    stages.push(StageTiming { label: "elevation-search", seconds: t1.elapsed().as_secs_f64() });

    let t2 = Instant::now();
    let mut refined: Vec<(f64, f64)> = Vec::with_capacity(candidates.len());
    for &ip in &candidates {
        let center = coarse_axis.value(ip).to_degrees();
        let fine_axis = GridAxis::lattice_deg(
            (center - grids.phi_refine_window_deg).max(grids.phi_lo_deg),
            (center + grids.phi_refine_window_deg).min(grids.phi_hi_deg),
            grids.phi_fine_step_deg,
        )?;
        let (mut best, mut best_val) = (coarse_axis.value(ip), f64::NEG_INFINITY);
        for phi in fine_axis.iter() {
            let v = ctx.elevation_value(phi)?;
            if v > best_val {
                best = phi;
                best_val = v;
            }
        }
        refined.push((best, best_val));
    }
    refined.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let min_sep = grids.phi_coarse_step_deg.to_radians();
    let mut elevations: Vec<f64> = Vec::with_capacity(l);
    for (phi, _) in refined {
        if elevations.len() == l {
            break;
        }
        if elevations.iter().all(|e| (e - phi).abs() >= min_sep) {
            elevations.push(phi);
        }
    }
    if elevations.len() < l {
        return Err(Error::ResolutionFailure { found: elevations.len(), requested: l });
    }
    stages.push(StageTiming { label: "elevation-refine", seconds: t2.elapsed().as_secs_f64() });

    let t3 = Instant::now();
    let theta_axis =
        GridAxis::lattice_deg(grids.theta_lo_deg, grids.theta_hi_deg, grids.theta_step_deg)?;
    let mut estimates = Vec::with_capacity(l);
    let mut scratch = Vec::new();
    for &phi in &elevations {
        let (mut best, mut best_val) = (theta_axis.value(0), f64::NEG_INFINITY);
        for theta in theta_axis.iter() {
            let p = 1.0 / ctx.azimuth_denominator(theta, phi, &mut scratch);
            if p > best_val {
                best = theta;
                best_val = p;
            }
        }
        estimates.push(AngleEstimate {
            angle: AnglePair::new(best, phi)?,
            height: best_val,
        });
    }
    stages.push(StageTiming { label: "azimuth-search", seconds: t3.elapsed().as_secs_f64() });

    Ok(AngleEstimateSet {
        estimates,
        coarse_step_deg: grids.phi_coarse_step_deg,
        fine_step_deg: grids.theta_step_deg,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_virtual_array, ArrayGeometry, Trajectory, TrajectoryAxis};
    use crate::numerics::pseudo_inverse;
    use crate::scm_recon::ExactOracle;
    use crate::waveform::SourceSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_virtual_array(n: usize, k: usize, seed: u64) -> VirtualArray {
        let geom = ArrayGeometry::ula_y(n, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traj = Trajectory::random(&mut rng, k, 0.15, 0.45, TrajectoryAxis::X).unwrap();
        build_virtual_array(&geom, &traj)
    }

    #[test]
    fn manifold_row_at_origin_is_center_selector() {
        let geom = ArrayGeometry::new(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        let virt = build_virtual_array(&geom, &Trajectory::identity());
        let m = bessel_manifold(&virt, 0.7, 1e-3).unwrap();
        let l1 = m.order() as usize;
        // Element at the origin: J_0(0) = 1, all other orders 0, so the
        // approximate steering entry is exactly 1 for every theta.
        assert_eq!(m.matrix()[(0, l1)], 1.0);
        for c in 0..m.width() {
            if c != l1 {
                assert_eq!(m.matrix()[(0, c)], 0.0);
            }
        }
        let approx = m.approx_steering(0.83);
        assert!((approx[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn manifold_theta_zero_is_neumann_sum() {
        // b(z) e(0) = sum_l J_l(z) = 1 within 10 * eps.
        let virt = small_virtual_array(4, 5, 3);
        let eps = 1e-3;
        let m = bessel_manifold(&virt, 0.4, eps).unwrap();
        for v in m.approx_steering(0.0) {
            assert!((v - Complex64::new(1.0, 0.0)).norm() <= 10.0 * eps);
        }
    }

    #[test]
    fn manifold_column_symmetry_exact() {
        let virt = small_virtual_array(4, 6, 9);
        let m = bessel_manifold(&virt, -0.9, 1e-4).unwrap();
        let l1 = m.order() as usize;
        for l in 1..=l1 {
            let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
            for i in 0..virt.len() {
                assert_eq!(m.matrix()[(i, l1 - l)], sign * m.matrix()[(i, l1 + l)]);
            }
        }
    }

    #[test]
    fn manifold_error_bounded_and_shrinks_with_eps() {
        let virt = small_virtual_array(4, 8, 5);
        let phi_sweep: Vec<f64> = (-8..=8).map(|i| (i as f64 * 10.0).to_radians()).collect();
        let theta_sweep: Vec<f64> = (-17..=17).map(|i| (i as f64 * 5.0).to_radians()).collect();
        let max_err = |eps: f64| {
            let mut worst = 0.0f64;
            for &phi in &phi_sweep {
                let m = bessel_manifold(&virt, phi, eps).unwrap();
                for &theta in &theta_sweep {
                    let approx = m.approx_steering(theta);
                    let exact = crate::geometry::steering_vector(
                        virt.coords(),
                        AnglePair { theta, phi },
                    );
                    for (a, e) in approx.iter().zip(&exact) {
                        worst = worst.max((a - e).norm());
                    }
                }
            }
            worst
        };
        let coarse = max_err(1e-3);
        assert!(coarse <= 1e-2, "eps 1e-3 manifold error {coarse}");
        let fine = max_err(1e-5);
        assert!(fine <= coarse / 10.0, "eps 1e-5 error {fine} vs {coarse}");
    }

    /// Exact noiseless covariance of the given scene on the virtual array.
    fn exact_covariance(
        n: usize,
        k: usize,
        seed: u64,
        angles: &[(f64, f64)],
        noise_var: f64,
    ) -> (DMatrix<Complex64>, VirtualArray) {
        let geom = ArrayGeometry::ula_y(n, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traj = Trajectory::random(&mut rng, k, 0.15, 0.45, TrajectoryAxis::X).unwrap();
        let pairs: Vec<AnglePair> = angles
            .iter()
            .map(|&(t, p)| AnglePair::from_degrees(t, p).unwrap())
            .collect();
        let sources = SourceSet::with_unit_gains(pairs).unwrap();
        let oracle = ExactOracle::new(&geom, &traj, &sources, noise_var);
        (oracle.full_covariance(), build_virtual_array(&geom, &traj))
    }

    #[test]
    fn elevation_spectrum_peaks_at_truth() {
        let (r, virt) = exact_covariance(4, 8, 11, &[(25.0, -18.0)], 0.0);
        let axis = GridAxis::lattice_deg(-60.0, 60.0, 0.5).unwrap();
        let spec =
            elevation_spectrum(&r, &virt, &axis, 1, 1e-3, PinvStrategy::default()).unwrap();
        let mut best = 0;
        for (i, &v) in spec.values.iter().enumerate() {
            if v > spec.values[best] {
                best = i;
            }
        }
        let got = spec.axis.value(best).to_degrees();
        assert!((got + 18.0).abs() <= 0.5 + 1e-9, "phi peak at {got}");
    }

    #[test]
    fn elevation_spectrum_scale_invariant_argmax() {
        let (r, virt) = exact_covariance(4, 6, 13, &[(10.0, 33.0)], 0.05);
        let axis = GridAxis::lattice_deg(-60.0, 60.0, 1.0).unwrap();
        let a = elevation_spectrum(&r, &virt, &axis, 1, 1e-3, PinvStrategy::default()).unwrap();
        let scaled = r.scale(5.0);
        let b =
            elevation_spectrum(&scaled, &virt, &axis, 1, 1e-3, PinvStrategy::default()).unwrap();
        let argmax = |s: &Spectrum1d| {
            let mut best = 0;
            for (i, &v) in s.values.iter().enumerate() {
                if v > s.values[best] {
                    best = i;
                }
            }
            best
        };
        assert_eq!(argmax(&a), argmax(&b));
    }

    #[test]
    fn folded_value_matches_full_pinv_route() {
        // Dual route: the half-width folded evaluation must equal
        // d^H pinv(B^H Pi B) d on the full 2L1+1 matrix.
        let (r, virt) = exact_covariance(3, 5, 17, &[(-20.0, 12.0), (35.0, -40.0)], 0.3);
        let l = 2;
        let eig = hermitian_evd(&r).unwrap();
        let u_s = eig.vectors.columns(0, l).clone_owned();
        let nk = virt.len();
        let ctx = JadContext {
            u_s: u_s.clone(),
            coords: virt.coords().to_vec(),
            eps: 1e-3,
            pinv: PinvStrategy::Threshold(1e-10),
        };
        for phi_deg in [-50.0, -12.5, 0.0, 7.0, 41.0] {
            let phi = (phi_deg as f64).to_radians();
            let fast = ctx.elevation_value(phi).unwrap();
            // Full route.
            let m = bessel_manifold(&virt, phi, 1e-3).unwrap();
            let b = m.matrix().map(|v| Complex64::new(v, 0.0));
            let proj = DMatrix::<Complex64>::identity(nk, nk) - &u_s * u_s.adjoint();
            let e_full = b.adjoint() * proj * &b;
            let pinv = pseudo_inverse(&e_full, 1e-10).unwrap();
            let d = selector_vector(m.order()).map(|v| Complex64::new(v, 0.0));
            let slow = (d.adjoint() * pinv * &d)[(0, 0)].re;
            assert!(
                (fast - slow).abs() <= 1e-7 * slow.abs().max(1.0),
                "phi {phi_deg}: folded {fast} vs full {slow}"
            );
        }
    }

    #[test]
    fn reduced_matrix_is_rank_deficient() {
        let (r, virt) = exact_covariance(4, 6, 19, &[(15.0, 25.0)], 0.2);
        let eig = hermitian_evd(&r).unwrap();
        let u_s = eig.vectors.columns(0, 1).clone_owned();
        let nk = virt.len();
        for phi_deg in [-30.0, 10.0, 55.0] {
            let phi = (phi_deg as f64).to_radians();
            let m = bessel_manifold(&virt, phi, 1e-3).unwrap();
            let b = m.matrix().map(|v| Complex64::new(v, 0.0));
            let proj = DMatrix::<Complex64>::identity(nk, nk) - &u_s * u_s.adjoint();
            let e_full = b.adjoint() * proj * &b;
            let svd = e_full.svd(false, false);
            let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            let smin = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
            assert!(
                smin / smax <= 1e-6,
                "phi {phi_deg}: sigma_min/sigma_max = {:.3e}",
                smin / smax
            );
        }
    }

    #[test]
    fn recovers_two_sources_with_distinct_elevations() {
        let truth = [(-25.0, -30.0), (40.0, 20.0)];
        let (r, virt) = exact_covariance(4, 10, 23, &truth, 0.0);
        let est =
            jad_rd_music(&r, &virt, 2, 1e-3, &JadGrids::standard(), PinvStrategy::default())
                .unwrap();
        assert_eq!(est.estimates.len(), 2);
        let mut got: Vec<(f64, f64)> = est
            .estimates
            .iter()
            .map(|e| (e.angle.theta_deg(), e.angle.phi_deg()))
            .collect();
        got.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let mut want = truth.to_vec();
        want.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for ((gt, gp), (wt, wp)) in got.iter().zip(&want) {
            assert!((gt - wt).abs() <= 0.05 + 1e-9, "theta {gt} vs {wt}");
            assert!((gp - wp).abs() <= 0.02 + 1e-9, "phi {gp} vs {wp}");
        }
    }

    #[test]
    fn shared_elevation_returns_single_azimuth_per_peak() {
        // Two sources at one elevation: the conditional azimuth search
        // returns one theta per elevation peak, so at most one of the two is
        // recovered there (documented contract).
        let truth = [(-30.0, 15.0), (35.0, 15.0)];
        let (r, virt) = exact_covariance(4, 10, 29, &truth, 0.0);
        match jad_rd_music(&r, &virt, 2, 1e-3, &JadGrids::standard(), PinvStrategy::default()) {
            Err(Error::ResolutionFailure { .. }) => {} // fewer than 2 elevation peaks
            Ok(est) => {
                let near_true_elev: Vec<&AngleEstimate> = est
                    .estimates
                    .iter()
                    .filter(|e| (e.angle.phi_deg() - 15.0).abs() < 0.5)
                    .collect();
                // Each elevation peak near the truth carries exactly one
                // azimuth, and it is one of the two true azimuths.
                for e in near_true_elev {
                    let t = e.angle.theta_deg();
                    assert!(
                        (t + 30.0).abs() < 1.0 || (t - 35.0).abs() < 1.0,
                        "azimuth {t} matches neither source"
                    );
                }
            }
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn diagonal_loading_also_finds_peak() {
        let (r, virt) = exact_covariance(4, 8, 31, &[(12.0, -22.0)], 0.1);
        let est = jad_rd_music(
            &r,
            &virt,
            1,
            1e-3,
            &JadGrids::standard(),
            PinvStrategy::DiagonalLoading(1e-8),
        )
        .unwrap();
        let got = est.estimates[0].angle;
        assert!((got.theta_deg() - 12.0).abs() < 0.2);
        assert!((got.phi_deg() + 22.0).abs() < 0.2);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let virt = small_virtual_array(3, 4, 1);
        let r = DMatrix::<Complex64>::identity(7, 7);
        assert!(jad_rd_music(&r, &virt, 1, 1e-3, &JadGrids::standard(), PinvStrategy::default())
            .is_err());
        let r12 = DMatrix::<Complex64>::identity(12, 12);
        assert!(
            jad_rd_music(&r12, &virt, 12, 1e-3, &JadGrids::standard(), PinvStrategy::default())
                .is_err()
        );
    }
}
