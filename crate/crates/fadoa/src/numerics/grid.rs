//! Angle grids and sampled spectra.
//!
//! Grids are lattices of integer multiples of the step, so that coarse and
//! fine stages of different estimators sample identical candidate angles.

use crate::error::{Error, Result};

/// A uniform angular grid in radians. Points are `start + i * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    start: f64,
    step: f64,
    len: usize,
}

impl GridAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !step.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid axis needs finite start and positive step, got start={start}, step={step}"
            )));
        }
        if len == 0 {
            return Err(Error::InvalidInput("grid axis needs at least one point".into()));
        }
        Ok(Self { start, step, len })
    }

    /// All multiples of `step_deg` inside `[lo_deg, hi_deg]`, in radians.
    /// Anchoring the lattice at zero keeps coarse and fine grids of all
    /// estimators on one family of candidate angles.
    pub fn lattice_deg(lo_deg: f64, hi_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) || !lo_deg.is_finite() || !hi_deg.is_finite() {
            return Err(Error::InvalidInput(format!(
                "invalid lattice spec [{lo_deg}, {hi_deg}] step {step_deg}"
            )));
        }
        let k_lo = (lo_deg / step_deg - 1e-9).ceil() as i64;
        let k_hi = (hi_deg / step_deg + 1e-9).floor() as i64;
        if k_hi < k_lo {
            return Err(Error::InvalidInput(format!(
                "lattice [{lo_deg}, {hi_deg}] step {step_deg} contains no points"
            )));
        }
        Self::new(
            (k_lo as f64 * step_deg).to_radians(),
            step_deg.to_radians(),
            (k_hi - k_lo + 1) as usize,
        )
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.value(i))
    }

    /// Index of the grid point closest to `x` (radians).
    pub fn nearest_index(&self, x: f64) -> usize {
        let raw = ((x - self.start) / self.step).round();
        raw.clamp(0.0, (self.len - 1) as f64) as usize
    }
}

/// A spectrum sampled on a 1-D grid.
#[derive(Debug, Clone)]
pub struct Spectrum1d {
    pub axis: GridAxis,
    pub values: Vec<f64>,
}

impl Spectrum1d {
    pub fn new(axis: GridAxis, values: Vec<f64>) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "Spectrum1d",
                expected: axis.len().to_string(),
                got: values.len().to_string(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Spectrum1d values"));
        }
        Ok(Self { axis, values })
    }
}

/// A spectrum sampled on a theta x phi grid, theta-major:
/// `values[i_theta * phi.len() + i_phi]`.
#[derive(Debug, Clone)]
pub struct Spectrum2d {
    pub theta: GridAxis,
    pub phi: GridAxis,
    pub values: Vec<f64>,
}

impl Spectrum2d {
    pub fn new(theta: GridAxis, phi: GridAxis, values: Vec<f64>) -> Result<Self> {
        if theta.len() * phi.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "Spectrum2d",
                expected: format!("{}x{}", theta.len(), phi.len()),
                got: values.len().to_string(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Spectrum2d values"));
        }
        Ok(Self { theta, phi, values })
    }

    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phi.len() + i_phi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_hits_integer_degrees() {
        let ax = GridAxis::lattice_deg(-89.0, 89.0, 1.0).unwrap();
        assert_eq!(ax.len(), 179);
        assert!((ax.value(0).to_degrees() + 89.0).abs() < 1e-12);
        assert!((ax.value(119).to_degrees() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_is_anchored_at_zero() {
        // A window around 30.07 at step 0.05 must consist of multiples of 0.05.
        let ax = GridAxis::lattice_deg(30.07 - 1.5, 30.07 + 1.5, 0.05).unwrap();
        for v in ax.iter() {
            let deg = v.to_degrees();
            let k = (deg / 0.05).round();
            assert!((deg - k * 0.05).abs() < 1e-9, "{deg} not on the lattice");
        }
    }

    #[test]
    fn nearest_index_clamps() {
        let ax = GridAxis::lattice_deg(-10.0, 10.0, 1.0).unwrap();
        assert_eq!(ax.nearest_index((-20.0_f64).to_radians()), 0);
        assert_eq!(ax.nearest_index(20.0_f64.to_radians()), ax.len() - 1);
        assert_eq!(ax.nearest_index(3.2_f64.to_radians()), 13);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(GridAxis::lattice_deg(1.0, -1.0, 0.5).is_err());
        assert!(GridAxis::lattice_deg(0.0, 1.0, 0.0).is_err());
        assert!(GridAxis::new(0.0, -0.1, 3).is_err());
        let ax = GridAxis::new(0.0, 0.1, 3).unwrap();
        assert!(Spectrum1d::new(ax.clone(), vec![1.0, 2.0]).is_err());
        assert!(Spectrum1d::new(ax, vec![1.0, f64::NAN, 2.0]).is_err());
    }
}
