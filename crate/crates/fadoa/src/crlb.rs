//! Cramér-Rao bounds for the compressive acquisition model, plus the
//! single-source closed-form Fisher approximation.
//!
//! General bound: with Phi = W^H the augmented combining matrix,
//! Q = Phi Phi^H, whitened quantities A~ = Q^{-1/2} Phi A and
//! B~ = Q^{-1/2} Phi B (B holding the steering derivatives), and the
//! projector Pi onto the orthogonal complement of A~,
//!
//!   CRLB = (sigma^2 / 2) [ Re{ sum_n S~^H(n) B~^H Pi B~ S~(n) } ]^{-1},
//!
//! a 2L x 2L matrix over (theta_1..theta_L, phi_1..phi_L). The n-sum
//! collapses to an entrywise product with the Gram matrix of the doubled
//! signal rows.
//!
//! Single source: the Fisher entries reduce to population variances of the
//! projected virtual coordinates d_bar = x cos(phi) + y sin(phi) and
//! d_tilde = -x sin(phi) + y cos(phi), scaled linearly by T * K (the Q ~ I
//! approximation for random phases).

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{steering_derivatives, steering_vector, AnglePair, VirtualArray};
use crate::numerics::hermitian_sqrt_inv;

/// Echo of the configuration a bound was computed for.
#[derive(Debug, Clone)]
pub struct BoundConfig {
    pub n_sources: usize,
    pub n_virtual: usize,
    pub n_observations: usize,
    pub n_pilots: usize,
    pub noise_var: f64,
    pub combiner: String,
}

/// The 2L x 2L angle-block bound: theta block first, then phi.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub crlb: DMatrix<f64>,
    pub root_bounds_rad: Vec<f64>,
    pub config: BoundConfig,
}

impl BoundReport {
    /// Root bound of source `l`'s azimuth, in degrees.
    pub fn theta_root_deg(&self, l: usize) -> f64 {
        self.root_bounds_rad[l].to_degrees()
    }

    /// Root bound of source `l`'s elevation, in degrees.
    pub fn phi_root_deg(&self, l: usize) -> f64 {
        self.root_bounds_rad[self.config.n_sources + l].to_degrees()
    }

    /// RMSE-style scalar bound in degrees:
    /// (1/L) sum_l sqrt((var_theta_l + var_phi_l) / 2).
    pub fn rmse_floor_deg(&self) -> f64 {
        let l = self.config.n_sources;
        let mut acc = 0.0;
        for i in 0..l {
            acc += ((self.crlb[(i, i)] + self.crlb[(l + i, l + i)]) / 2.0).sqrt();
        }
        (acc / l as f64).to_degrees()
    }
}

/// General compressive-model bound. `phi_mat` is the augmented combining
/// matrix W^H (K*T x N*K); pass the identity for a fully digital
/// virtual-array model. `s_bar` is the realized equivalent signal (L x N_p).
pub fn crlb_general(
    phi_mat: &DMatrix<Complex64>,
    virt: &VirtualArray,
    angles: &[AnglePair],
    s_bar: &DMatrix<Complex64>,
    noise_var: f64,
) -> Result<BoundReport> {
    let l = angles.len();
    let nk = virt.len();
    let kt = phi_mat.nrows();
    if phi_mat.ncols() != nk {
        return Err(Error::DimensionMismatch {
            context: "crlb_general",
            expected: format!("Phi with {nk} columns"),
            got: phi_mat.ncols().to_string(),
        });
    }
    if s_bar.nrows() != l {
        return Err(Error::DimensionMismatch {
            context: "crlb_general",
            expected: format!("{l} signal rows"),
            got: s_bar.nrows().to_string(),
        });
    }
    if kt <= 2 * l {
        return Err(Error::InvalidInput(format!(
            "need K*T > 2L observations, got K*T = {kt}, L = {l}"
        )));
    }
    if noise_var <= 0.0 {
        return Err(Error::InvalidInput("noise variance must be positive".into()));
    }
    let n_p = s_bar.ncols();

    // Manifold and derivative matrices on the virtual aperture.
    let mut a = DMatrix::<Complex64>::zeros(nk, l);
    let mut b = DMatrix::<Complex64>::zeros(nk, 2 * l);
    for (j, ang) in angles.iter().enumerate() {
        for (i, v) in steering_vector(virt.coords(), *ang).into_iter().enumerate() {
            a[(i, j)] = v;
        }
        let (dt, dp) = steering_derivatives(virt.coords(), *ang);
        for i in 0..nk {
            b[(i, j)] = dt[i];
            b[(i, l + j)] = dp[i];
        }
    }

    let q = phi_mat * phi_mat.adjoint();
    let q_inv_sqrt = hermitian_sqrt_inv(&q, 1e-12)?;
    let a_t = &q_inv_sqrt * phi_mat * a;
    let b_t = &q_inv_sqrt * phi_mat * b;

    let gram = a_t.adjoint() * &a_t;
    let gram_inv = gram.clone().try_inverse().ok_or_else(|| Error::SingularMatrix {
        context: "crlb_general",
        detail: "whitened manifold Gram matrix is singular".into(),
    })?;
    let projector = DMatrix::<Complex64>::identity(kt, kt) - &a_t * gram_inv * a_t.adjoint();
    let c = b_t.adjoint() * projector * &b_t;

    // Gram of the doubled signal rows: G_ij = sum_n conj(s2_i(n)) s2_j(n).
    let mut s2 = DMatrix::<Complex64>::zeros(2 * l, n_p);
    for i in 0..l {
        for n in 0..n_p {
            s2[(i, n)] = s_bar[(i, n)];
            s2[(l + i, n)] = s_bar[(i, n)];
        }
    }
    let g = s2.conjugate() * s2.transpose();

    // Re{ C entrywise* G }, symmetrized against rounding.
    let dim = 2 * l;
    let mut inner = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            inner[(i, j)] = (c[(i, j)] * g[(i, j)]).re;
        }
    }
    let inner = (&inner + inner.transpose()).scale(0.5);

    let scale = inner.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let crlb = inner.clone().try_inverse().map(|m| m.scale(noise_var / 2.0)).ok_or_else(
        || {
            let eig = nalgebra::SymmetricEigen::new(inner.clone());
            let near_null: Vec<usize> = (0..dim)
                .filter(|&i| eig.eigenvalues[i].abs() <= 1e-14 * scale.max(1e-300))
                .collect();
            Error::SingularMatrix {
                context: "crlb_general",
                detail: format!(
                    "information matrix has unbounded directions at indices {near_null:?}"
                ),
            }
        },
    )?;
    let root_bounds_rad = (0..dim).map(|i| crlb[(i, i)].max(0.0).sqrt()).collect();
    Ok(BoundReport {
        crlb,
        root_bounds_rad,
        config: BoundConfig {
            n_sources: l,
            n_virtual: nk,
            n_observations: kt,
            n_pilots: n_p,
            noise_var,
            combiner: format!("{}x{} augmented combining matrix", kt, nk),
        },
    })
}

/// Closed-form 2 x 2 single-source Fisher approximation.
#[derive(Debug, Clone, Copy)]
pub struct FisherApprox {
    pub theta_theta: f64,
    pub phi_phi: f64,
    pub cross: f64,
}

impl FisherApprox {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.theta_theta, self.cross], [self.cross, self.phi_phi]]
    }

    pub fn determinant(&self) -> f64 {
        self.theta_theta * self.phi_phi - self.cross * self.cross
    }
}

/// F_theta_theta = (8 N_p p_hat pi^2 cos^2(theta) / sigma^2) T K Var(d_bar),
/// and analogously with sin^2(theta) / Var(d_tilde) and the
/// sin(theta)cos(theta) Cov(d_bar, d_tilde) cross term. The variances are
/// population moments over the N*K virtual coordinates (lambda = 1 units).
#[allow(clippy::too_many_arguments)]
pub fn fisher_single_source(
    virt: &VirtualArray,
    theta: f64,
    phi: f64,
    n_frames: usize,
    n_positions: usize,
    n_pilots: usize,
    p_hat: f64,
    noise_var: f64,
) -> FisherApprox {
    let nk = virt.len() as f64;
    let (sin_phi, cos_phi) = phi.sin_cos();
    // Two-pass (centered) moments: exact zeros for degenerate coordinate
    // sets, no cancellation.
    let d_bar: Vec<f64> =
        virt.coords().iter().map(|&(x, y)| x * cos_phi + y * sin_phi).collect();
    let d_tilde: Vec<f64> =
        virt.coords().iter().map(|&(x, y)| -x * sin_phi + y * cos_phi).collect();
    let mean_bar = d_bar.iter().sum::<f64>() / nk;
    let mean_tilde = d_tilde.iter().sum::<f64>() / nk;
    let var_bar = d_bar.iter().map(|d| (d - mean_bar).powi(2)).sum::<f64>() / nk;
    let var_tilde = d_tilde.iter().map(|d| (d - mean_tilde).powi(2)).sum::<f64>() / nk;
    let cov = d_bar
        .iter()
        .zip(&d_tilde)
        .map(|(a, b)| (a - mean_bar) * (b - mean_tilde))
        .sum::<f64>()
        / nk;
    let tk = (n_frames * n_positions) as f64;
    let (sin_t, cos_t) = theta.sin_cos();
    let base = 8.0 * n_pilots as f64 * p_hat * PI * PI / noise_var * tk;
    FisherApprox {
        theta_theta: base * cos_t * cos_t * var_bar,
        phi_phi: base * sin_t * sin_t * var_tilde,
        cross: base * sin_t * cos_t * cov,
    }
}

/// CRLB = F^{-1} for the 2 x 2 single-source Fisher matrix; diagonal entries
/// are variance bounds in rad^2.
pub fn crlb_from_fisher(f: &FisherApprox) -> Result<[[f64; 2]; 2]> {
    let det = f.determinant();
    let scale = f
        .theta_theta
        .abs()
        .max(f.phi_phi.abs())
        .max(f.cross.abs())
        .powi(2);
    if det.abs() <= 1e-18 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularMatrix {
            context: "crlb_from_fisher",
            detail: format!("Fisher determinant {det:.3e} below relative floor"),
        });
    }
    Ok([
        [f.phi_phi / det, -f.cross / det],
        [-f.cross / det, f.theta_theta / det],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{stack_observations, Combiner};
    use crate::geometry::{build_virtual_array, ArrayGeometry, Trajectory, TrajectoryAxis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random-phase acquisition geometry and combining matrix of the default
    /// N = 8, K = 24 setup; the rows of the stack are irrelevant here.
    fn default_phi(
        n: usize,
        k: usize,
        t: usize,
        seed: u64,
    ) -> (VirtualArray, DMatrix<Complex64>) {
        let geom = ArrayGeometry::ula_y(n, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traj = Trajectory::random(&mut rng, k, 0.15, 0.45, TrajectoryAxis::X).unwrap();
        let virt = build_virtual_array(&geom, &traj);
        let combiners: Vec<Combiner> =
            (0..k * t).map(|_| Combiner::random_phase(n, &mut rng)).collect();
        let rows = vec![vec![Complex64::ZERO; 4]; k * t];
        let stack = stack_observations(&rows, &combiners, k, t).unwrap();
        (virt, stack.w().adjoint())
    }

    fn constant_modulus_signal(l: usize, n_p: usize, amp: f64) -> DMatrix<Complex64> {
        DMatrix::from_fn(l, n_p, |i, n| {
            Complex64::from_polar(amp, 0.3 * (i + 1) as f64 * n as f64)
        })
    }

    #[test]
    fn doubling_pilots_halves_the_bound() {
        let (virt, phi) = default_phi(4, 6, 2, 3);
        let angles = vec![AnglePair::from_degrees(22.0, -31.0).unwrap()];
        let s1 = constant_modulus_signal(1, 25, 1.0);
        let mut s2 = DMatrix::<Complex64>::zeros(1, 50);
        for n in 0..25 {
            s2[(0, n)] = s1[(0, n)];
            s2[(0, 25 + n)] = s1[(0, n)];
        }
        let b1 = crlb_general(&phi, &virt, &angles, &s1, 0.5).unwrap();
        let b2 = crlb_general(&phi, &virt, &angles, &s2, 0.5).unwrap();
        for i in 0..2 {
            let ratio = b1.crlb[(i, i)] / b2.crlb[(i, i)];
            assert!((ratio - 2.0).abs() < 1e-9, "diag {i} ratio {ratio}");
        }
    }

    #[test]
    fn noise_scales_the_bound_linearly() {
        let (virt, phi) = default_phi(4, 6, 2, 5);
        let angles = vec![AnglePair::from_degrees(-15.0, 40.0).unwrap()];
        let s = constant_modulus_signal(1, 30, 1.0);
        let b1 = crlb_general(&phi, &virt, &angles, &s, 0.25).unwrap();
        let b4 = crlb_general(&phi, &virt, &angles, &s, 1.0).unwrap();
        for i in 0..2 {
            let ratio = b4.crlb[(i, i)] / b1.crlb[(i, i)];
            assert!((ratio - 4.0).abs() < 1e-9, "diag {i} ratio {ratio}");
        }
    }

    #[test]
    fn general_and_closed_form_agree_for_single_source() {
        // Cross-formula consistency on default-style draws.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let (virt, phi) = default_phi(8, 24, 3, 100 + trial);
            let theta_deg =
                (10.0 + 50.0 * rng.random::<f64>()) * if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
            let phi_deg = 120.0 * rng.random::<f64>() - 60.0;
            let ang = AnglePair::from_degrees(theta_deg, phi_deg).unwrap();
            let n_p = 64;
            let s = constant_modulus_signal(1, n_p, 1.0);
            let noise_var = 1.0;
            let general = crlb_general(&phi, &virt, &[ang], &s, noise_var).unwrap();
            let fisher = fisher_single_source(
                &virt, ang.theta, ang.phi, 3, 24, n_p, 1.0, noise_var,
            );
            let closed = crlb_from_fisher(&fisher).unwrap();
            for (i, c) in [closed[0][0], closed[1][1]].iter().enumerate() {
                let ratio = c / general.crlb[(i, i)];
                assert!(
                    (0.7..=1.3).contains(&ratio),
                    "trial {trial}, diag {i}: ratio {ratio:.3} (theta {theta_deg:.1}, phi {phi_deg:.1})"
                );
            }
        }
    }

    #[test]
    fn coincident_virtual_elements_carry_no_information() {
        let geom = ArrayGeometry::new(vec![(0.3, -0.7)]).unwrap();
        let traj = Trajectory::new(vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]).unwrap();
        let virt = build_virtual_array(&geom, &traj);
        let f = fisher_single_source(&virt, 0.4, -0.2, 2, 3, 32, 1.0, 0.5);
        assert_eq!(f.theta_theta, 0.0);
        assert_eq!(f.phi_phi, 0.0);
        assert_eq!(f.cross, 0.0);
    }

    #[test]
    fn fisher_is_linear_in_frames() {
        let (virt, _) = default_phi(4, 8, 1, 7);
        let f1 = fisher_single_source(&virt, 0.5, 0.3, 2, 8, 40, 1.2, 0.7);
        let f2 = fisher_single_source(&virt, 0.5, 0.3, 4, 8, 40, 1.2, 0.7);
        assert_eq!(f2.theta_theta, 2.0 * f1.theta_theta);
        assert_eq!(f2.phi_phi, 2.0 * f1.phi_phi);
        assert_eq!(f2.cross, 2.0 * f1.cross);
    }

    #[test]
    fn broadside_elevation_is_unidentifiable() {
        let (virt, _) = default_phi(4, 8, 1, 9);
        let f = fisher_single_source(&virt, 0.0, 0.6, 3, 8, 40, 1.0, 1.0);
        assert_eq!(f.phi_phi, 0.0);
        assert_eq!(f.cross, 0.0);
        assert!(f.theta_theta > 0.0);
        assert!(crlb_from_fisher(&f).is_err());
    }

    #[test]
    fn fisher_inverse_closed_form() {
        let f = FisherApprox { theta_theta: 4.0, phi_phi: 9.0, cross: 0.0 };
        let c = crlb_from_fisher(&f).unwrap();
        assert!((c[0][0] - 0.25).abs() < 1e-15);
        assert!((c[1][1] - 1.0 / 9.0).abs() < 1e-15);

        // Nonzero covariance against the ad - bc closed form.
        let f = FisherApprox { theta_theta: 5.0, phi_phi: 3.0, cross: 1.5 };
        let det = 5.0 * 3.0 - 1.5 * 1.5;
        let c = crlb_from_fisher(&f).unwrap();
        assert!((c[0][0] - 3.0 / det).abs() < 1e-14);
        assert!((c[0][1] + 1.5 / det).abs() < 1e-14);

        // Random positive definite: F * CRLB = I.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let a = 1.0 + rng.random::<f64>();
            let b = 1.0 + rng.random::<f64>();
            let c_off = 0.8 * rng.random::<f64>();
            let f = FisherApprox { theta_theta: a, phi_phi: b, cross: c_off };
            let inv = crlb_from_fisher(&f).unwrap();
            let m = f.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    let prod: f64 = (0..2).map(|k| m[i][k] * inv[k][j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((prod - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bound_is_monotone_when_aperture_grows() {
        // Appending positions that strictly enlarge the projected coordinate
        // spread grows both T*K and the variances, so the closed-form bound
        // cannot increase.
        let geom = ArrayGeometry::ula_y(4, 0.5).unwrap();
        let mut prev: Option<[f64; 2]> = None;
        for k in [4usize, 8, 16] {
            let disp: Vec<(f64, f64)> = (0..k).map(|i| (0.3 * i as f64, 0.0)).collect();
            let traj = Trajectory::new(disp).unwrap();
            let virt = build_virtual_array(&geom, &traj);
            let f = fisher_single_source(&virt, 0.5, 0.4, 1, k, 32, 1.0, 1.0);
            let c = crlb_from_fisher(&f).unwrap();
            if let Some(p) = prev {
                assert!(c[0][0] <= p[0] * (1.0 + 1e-12), "theta bound grew");
                assert!(c[1][1] <= p[1] * (1.0 + 1e-12), "phi bound grew");
            }
            prev = Some([c[0][0], c[1][1]]);
        }
    }

    #[test]
    fn singular_inputs_are_reported() {
        let (virt, phi) = default_phi(4, 6, 1, 21);
        let angles = vec![AnglePair::from_degrees(20.0, 10.0).unwrap()];
        let s = constant_modulus_signal(1, 16, 1.0);
        assert!(crlb_general(&phi, &virt, &angles, &s, 0.0).is_err());
        // Duplicate source angles make the manifold Gram singular.
        let dup = vec![angles[0], angles[0]];
        let s2 = constant_modulus_signal(2, 16, 1.0);
        assert!(crlb_general(&phi, &virt, &dup, &s2, 1.0).is_err());
    }
}
