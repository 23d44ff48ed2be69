//! Fluid-array layout, coordinated trajectory, virtual aperture, and
//! steering-vector math.
//!
//! All lengths are wavelength-normalized (lambda = 1), so a phase across the
//! aperture depends only on the stored coordinates. Angles are radians
//! internally; degree conversions happen at the CLI/config boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Default per-move step range in wavelengths for randomly drawn trajectories.
pub const DEFAULT_STEP_RANGE: (f64, f64) = (0.15, 0.45);

/// An (azimuth, elevation) pair in radians, each within [-pi/2, pi/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub theta: f64,
    pub phi: f64,
}

impl AnglePair {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let half = PI / 2.0 + 1e-12;
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::NonFinite("AnglePair"));
        }
        if theta.abs() > half || phi.abs() > half {
            return Err(Error::InvalidInput(format!(
                "angles must lie in [-pi/2, pi/2], got theta={theta}, phi={phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi.to_degrees()
    }
}

/// Element coordinates of the array at its initial position, in wavelengths.
/// The z coordinate is always zero (planar array).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    elements: Vec<(f64, f64)>,
}

impl ArrayGeometry {
    pub fn new(elements: Vec<(f64, f64)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInput("geometry needs at least 1 element".into()));
        }
        if elements.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinite("ArrayGeometry"));
        }
        for i in 0..elements.len() {
            for j in (i + 1)..elements.len() {
                if elements[i] == elements[j] {
                    return Err(Error::InvalidInput(format!(
                        "element positions must be pairwise distinct; {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { elements })
    }

    /// Uniform linear array along the y axis with the given spacing (in
    /// wavelengths), first element at the origin.
    pub fn ula_y(count: usize, spacing: f64) -> Result<Self> {
        if spacing <= 0.0 {
            return Err(Error::InvalidInput("ULA spacing must be positive".into()));
        }
        Self::new((0..count).map(|n| (0.0, spacing * n as f64)).collect())
    }

    /// Uniform planar array on a rectangular grid, first element at `origin`.
    pub fn upa(nx: usize, ny: usize, dx: f64, dy: f64, origin: (f64, f64)) -> Result<Self> {
        if dx <= 0.0 || dy <= 0.0 {
            return Err(Error::InvalidInput("UPA spacings must be positive".into()));
        }
        let mut elements = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                elements.push((origin.0 + dx * ix as f64, origin.1 + dy * iy as f64));
            }
        }
        Self::new(elements)
    }

    pub fn elements(&self) -> &[(f64, f64)] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Axis along which a random trajectory moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryAxis {
    X,
    Y,
    Both,
}

/// The joint displacements applied to every element, one per spatial
/// sampling position. The first displacement is always (0, 0): position 1 is
/// the initial layout itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    displacements: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn new(displacements: Vec<(f64, f64)>) -> Result<Self> {
        if displacements.is_empty() {
            return Err(Error::InvalidInput("trajectory needs K >= 1 positions".into()));
        }
        if displacements[0] != (0.0, 0.0) {
            return Err(Error::InvalidInput(
                "the first trajectory displacement must be exactly (0, 0)".into(),
            ));
        }
        if displacements.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinite("Trajectory"));
        }
        Ok(Self { displacements })
    }

    /// The K = 1 trajectory: the array never moves.
    pub fn identity() -> Self {
        Self { displacements: vec![(0.0, 0.0)] }
    }

    /// K cumulative displacements with each step drawn uniformly from
    /// [step_min, step_max] along the chosen axis. Deterministic given the
    /// RNG state.
    pub fn random<R: Rng>(
        rng: &mut R,
        positions: usize,
        step_min: f64,
        step_max: f64,
        axis: TrajectoryAxis,
    ) -> Result<Self> {
        if positions == 0 {
            return Err(Error::InvalidInput("trajectory needs K >= 1 positions".into()));
        }
        if !(0.0 < step_min && step_min <= step_max) || !step_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "invalid step range [{step_min}, {step_max}]"
            )));
        }
        let mut displacements = Vec::with_capacity(positions);
        let (mut x, mut y) = (0.0, 0.0);
        displacements.push((x, y));
        let draw = |rng: &mut R| step_min + (step_max - step_min) * rng.random::<f64>();
        for _ in 1..positions {
            match axis {
                TrajectoryAxis::X => x += draw(rng),
                TrajectoryAxis::Y => y += draw(rng),
                TrajectoryAxis::Both => {
                    x += draw(rng);
                    y += draw(rng);
                }
            }
            displacements.push((x, y));
        }
        Ok(Self { displacements })
    }

    pub fn displacements(&self) -> &[(f64, f64)] {
        &self.displacements
    }

    /// Number of spatial sampling positions K.
    pub fn len(&self) -> usize {
        self.displacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacements.is_empty()
    }
}

/// The N*K-element virtual aperture swept out by the moving array, ordered
/// position-major: all N elements at position 1, then position 2, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualArray {
    coords: Vec<(f64, f64)>,
    n_elements: usize,
    n_positions: usize,
}

impl VirtualArray {
    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_positions(&self) -> usize {
        self.n_positions
    }

    /// Flat index of element `n` at position `k` under position-major order.
    pub fn index(&self, n: usize, k: usize) -> usize {
        k * self.n_elements + n
    }

    /// Inverse of [`VirtualArray::index`]: the (element, position) pair of a
    /// flat coordinate index.
    pub fn element_position(&self, idx: usize) -> (usize, usize) {
        (idx % self.n_elements, idx / self.n_elements)
    }
}

/// Builds the virtual aperture: coordinate (n, k) is element n's layout
/// coordinate plus displacement k.
pub fn build_virtual_array(geom: &ArrayGeometry, traj: &Trajectory) -> VirtualArray {
    let n = geom.len();
    let k = traj.len();
    let mut coords = Vec::with_capacity(n * k);
    for (dx, dy) in traj.displacements() {
        for (x, y) in geom.elements() {
            coords.push((x + dx, y + dy));
        }
    }
    VirtualArray {
        coords,
        n_elements: n,
        n_positions: k,
    }
}

/// Writes the steering vector for the given coordinates into `out`:
/// entry i = exp(j 2 pi (x_i sin(theta) cos(phi) + y_i sin(theta) sin(phi))).
pub fn steering_vector_into(coords: &[(f64, f64)], angle: AnglePair, out: &mut [Complex64]) {
    debug_assert_eq!(coords.len(), out.len());
    let sin_theta = angle.theta.sin();
    let (sin_phi, cos_phi) = angle.phi.sin_cos();
    let bx = sin_theta * cos_phi;
    let by = sin_theta * sin_phi;
    for (o, (x, y)) in out.iter_mut().zip(coords) {
        let (s, c) = (2.0 * PI * (x * bx + y * by)).sin_cos();
        *o = Complex64::new(c, s);
    }
}

/// Steering vector over an arbitrary coordinate set; every entry has unit
/// modulus.
pub fn steering_vector(coords: &[(f64, f64)], angle: AnglePair) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; coords.len()];
    steering_vector_into(coords, angle, &mut out);
    out
}

/// Analytic partial derivatives of the steering vector with respect to
/// azimuth and elevation.
///
/// With d_bar_i = x_i cos(phi) + y_i sin(phi) and
/// d_tilde_i = -x_i sin(phi) + y_i cos(phi):
/// da/dtheta = j 2 pi cos(theta) d_bar ⊙ a,
/// da/dphi   = j 2 pi sin(theta) d_tilde ⊙ a.
pub fn steering_derivatives(
    coords: &[(f64, f64)],
    angle: AnglePair,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = steering_vector(coords, angle);
    let (sin_theta, cos_theta) = angle.theta.sin_cos();
    let (sin_phi, cos_phi) = angle.phi.sin_cos();
    let mut d_theta = Vec::with_capacity(coords.len());
    let mut d_phi = Vec::with_capacity(coords.len());
    for (&(x, y), a_i) in coords.iter().zip(&a) {
        let d_bar = x * cos_phi + y * sin_phi;
        let d_tilde = -x * sin_phi + y * cos_phi;
        let j2pi = Complex64::new(0.0, 2.0 * PI);
        d_theta.push(j2pi * cos_theta * d_bar * a_i);
        d_phi.push(j2pi * sin_theta * d_tilde * a_i);
    }
    (d_theta, d_phi)
}
