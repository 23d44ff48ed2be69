//! Shared numerical kernels: Hermitian eigendecomposition, pseudo-inverse,
//! Bessel functions of the first kind, expansion-order selection, and grid
//! peak search.

pub mod bessel;
pub mod grid;
pub mod linalg;
pub mod peaks;

pub use bessel::{bessel_j, bessel_j_row, truncation_order, MAX_BESSEL_ARGUMENT};
pub use grid::{GridAxis, Spectrum1d, Spectrum2d};
pub use linalg::{
    hermitian_evd, hermitian_pinv, hermitian_pinv_quadform, hermitian_sqrt_inv, pseudo_inverse,
    EigenPair,
};
pub use peaks::{find_peaks_1d, find_peaks_2d, top_local_maxima_1d, top_local_maxima_2d};
