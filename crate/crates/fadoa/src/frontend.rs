//! The analog front end: switch/phase-shifter combining vectors, their
//! application to raw snapshots, and the stacked (Y, W) observation pair.
//!
//! Row ordering of Y is frame-major: row (k, tau) sits at tau * K + k,
//! mirroring the stacking Y = [Y_1^T, ..., Y_T^T]^T with each Y_tau holding
//! positions k = 1..K. W is N*K x K*T; column (k, tau) is zero outside the
//! N-row block of position k, so Y = W^H A S_bar holds identically in the
//! noiseless case.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::waveform::SnapshotBlock;

/// A switch mask plus per-element phases; the effective combining weight is
/// w = m_s ⊙ (1/sqrt(N)) e^{j alpha}, so ||w||^2 = (active count)/N <= 1.
#[derive(Debug, Clone)]
pub struct Combiner {
    switches: Vec<bool>,
    phases: Vec<f64>,
}

impl Combiner {
    pub fn new(switches: Vec<bool>, phases: Vec<f64>) -> Result<Self> {
        if switches.is_empty() || switches.len() != phases.len() {
            return Err(Error::DimensionMismatch {
                context: "Combiner",
                expected: switches.len().to_string(),
                got: phases.len().to_string(),
            });
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("Combiner phases"));
        }
        Ok(Self { switches, phases })
    }

    /// All switches on, phases i.i.d. uniform over [0, 2*pi). This is the
    /// omnidirectional acquisition configuration.
    pub fn random_phase<R: Rng>(n: usize, rng: &mut R) -> Self {
        Self {
            switches: vec![true; n],
            phases: (0..n).map(|_| TAU * rng.random::<f64>()).collect(),
        }
    }

    /// Switches on exactly at `active` (distinct, in range), with the phase
    /// assigned position-wise; inactive elements get phase 0.
    pub fn selection(n: usize, active: &[usize], phases: &[f64]) -> Result<Self> {
        if active.len() != phases.len() {
            return Err(Error::DimensionMismatch {
                context: "Combiner::selection",
                expected: active.len().to_string(),
                got: phases.len().to_string(),
            });
        }
        let mut switches = vec![false; n];
        let mut assigned = vec![0.0; n];
        for (&idx, &ph) in active.iter().zip(phases) {
            if idx >= n {
                return Err(Error::OutOfRange(format!("active index {idx} >= N = {n}")));
            }
            if switches[idx] {
                return Err(Error::InvalidInput(format!("duplicate active index {idx}")));
            }
            switches[idx] = true;
            assigned[idx] = ph;
        }
        Combiner::new(switches, assigned)
    }

    pub fn len(&self) -> usize {
        self.switches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.switches.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.switches.iter().filter(|&&s| s).count()
    }

    /// Effective weight vector including the 1/sqrt(N) normalization.
    pub fn weights(&self) -> Vec<Complex64> {
        let scale = 1.0 / (self.len() as f64).sqrt();
        self.switches
            .iter()
            .zip(&self.phases)
            .map(|(&on, &ph)| {
                if on {
                    Complex64::from_polar(scale, ph)
                } else {
                    Complex64::ZERO
                }
            })
            .collect()
    }
}

/// One combined observation row: w^H Upsilon_k.
pub fn apply_combiner(combiner: &Combiner, block: &SnapshotBlock) -> Result<Vec<Complex64>> {
    if combiner.len() != block.data.nrows() {
        return Err(Error::DimensionMismatch {
            context: "apply_combiner",
            expected: block.data.nrows().to_string(),
            got: combiner.len().to_string(),
        });
    }
    let w = combiner.weights();
    let n_p = block.data.ncols();
    let mut row = vec![Complex64::ZERO; n_p];
    for (n, wn) in w.iter().enumerate() {
        if wn.norm_sqr() == 0.0 {
            continue;
        }
        let wc = wn.conj();
        for (col, out) in row.iter_mut().enumerate() {
            *out += wc * block.data[(n, col)];
        }
    }
    Ok(row)
}

/// The unified spatiotemporal data set: Y (K*T x N_p) and the augmented
/// block-sparse combining matrix W (N*K x K*T).
#[derive(Debug, Clone)]
pub struct MeasurementStack {
    y: DMatrix<Complex64>,
    w: DMatrix<Complex64>,
    n_elements: usize,
    n_positions: usize,
    n_frames: usize,
}

impl MeasurementStack {
    pub fn y(&self) -> &DMatrix<Complex64> {
        &self.y
    }

    pub fn w(&self) -> &DMatrix<Complex64> {
        &self.w
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_positions(&self) -> usize {
        self.n_positions
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    /// Row of Y holding the observation of position `k` in frame `tau`.
    pub fn row_index(&self, k: usize, tau: usize) -> usize {
        tau * self.n_positions + k
    }

    /// Replaces Y by c * Y (the combining matrix is untouched).
    pub fn scale_observations(&mut self, c: Complex64) {
        for v in self.y.iter_mut() {
            *v *= c;
        }
    }
}

/// Assembles Y and W from K*T combined rows and their combiners, both
/// indexed frame-major: slot tau * K + k holds (k, tau). Every pair must be
/// present and every row must have the same pilot length.
pub fn stack_observations(
    rows: &[Vec<Complex64>],
    combiners: &[Combiner],
    n_positions: usize,
    n_frames: usize,
) -> Result<MeasurementStack> {
    let slots = n_positions * n_frames;
    if rows.len() != slots || combiners.len() != slots {
        return Err(Error::DimensionMismatch {
            context: "stack_observations",
            expected: format!("{slots} (K*T) rows and combiners"),
            got: format!("{} rows, {} combiners", rows.len(), combiners.len()),
        });
    }
    let n = combiners[0].len();
    let n_p = rows[0].len();
    if combiners.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidInput("combiners disagree on element count".into()));
    }
    if rows.iter().any(|r| r.len() != n_p) {
        return Err(Error::InvalidInput("rows disagree on pilot length".into()));
    }
    let mut y = DMatrix::zeros(slots, n_p);
    let mut w = DMatrix::zeros(n * n_positions, slots);
    for tau in 0..n_frames {
        for k in 0..n_positions {
            let slot = tau * n_positions + k;
            for (col, v) in rows[slot].iter().enumerate() {
                y[(slot, col)] = *v;
            }
            for (i, wv) in combiners[slot].weights().into_iter().enumerate() {
                w[(k * n + i, slot)] = wv;
            }
        }
    }
    Ok(MeasurementStack {
        y,
        w,
        n_elements: n,
        n_positions,
        n_frames,
    })
}
