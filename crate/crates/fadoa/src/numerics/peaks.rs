//! Strict local-maximum search on sampled spectra, with a minimum-separation
//! rule to keep sidelobes from being picked twice.

use crate::error::{Error, Result};

/// The `count` largest strict local maxima of a 1-D array, any two at least
/// `min_separation` cells apart. Boundary cells qualify when their single
/// neighbor is smaller. Ties prefer the lower index; returned indices are
/// sorted ascending. Fewer than `count` maxima is a resolution failure.
pub fn find_peaks_1d(values: &[f64], count: usize, min_separation: usize) -> Result<Vec<usize>> {
    let n = values.len();
    let mut maxima: Vec<usize> = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || values[i] > values[i - 1];
        let right_ok = i + 1 == n || values[i] > values[i + 1];
        if left_ok && right_ok {
            maxima.push(i);
        }
    }
    select(maxima, count, |&a, &b| a.abs_diff(b) >= min_separation, |&i| values[i], |&i| i)
}

/// 2-D variant on a row-major `rows x cols` array with 8-neighborhood
/// maxima and Chebyshev-distance separation. Returns (row, col) pairs sorted
/// by linear index.
pub fn find_peaks_2d(
    values: &[f64],
    rows: usize,
    cols: usize,
    count: usize,
    min_separation: usize,
) -> Result<Vec<(usize, usize)>> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context: "find_peaks_2d",
            expected: format!("{rows}x{cols}"),
            got: values.len().to_string(),
        });
    }
    let at = |r: usize, c: usize| values[r * cols + c];
    let mut maxima: Vec<(usize, usize)> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = at(r, c);
            let mut is_max = true;
            'nb: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                        continue;
                    }
                    if at(nr as usize, nc as usize) >= v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                maxima.push((r, c));
            }
        }
    }
    select(
        maxima,
        count,
        |&a, &b| a.0.abs_diff(b.0).max(a.1.abs_diff(b.1)) >= min_separation,
        |&(r, c)| at(r, c),
        |&(r, c)| r * cols + c,
    )
}

/// Up to `max_count` largest strict local maxima of a row-major 2-D array,
/// separation-filtered like [`find_peaks_2d`] but tolerating a shortfall.
/// Returned in descending height order.
pub fn top_local_maxima_2d(
    values: &[f64],
    rows: usize,
    cols: usize,
    max_count: usize,
    min_separation: usize,
) -> Vec<(usize, usize)> {
    match find_peaks_2d(values, rows, cols, max_count, min_separation) {
        Ok(mut peaks) => {
            peaks.sort_by(|a, b| {
                values[b.0 * cols + b.1]
                    .partial_cmp(&values[a.0 * cols + a.1])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            peaks
        }
        Err(Error::ResolutionFailure { found, .. }) if found > 0 => {
            top_local_maxima_2d(values, rows, cols, found, min_separation)
        }
        Err(_) => Vec::new(),
    }
}

/// 1-D companion of [`top_local_maxima_2d`].
pub fn top_local_maxima_1d(
    values: &[f64],
    max_count: usize,
    min_separation: usize,
) -> Vec<usize> {
    match find_peaks_1d(values, max_count, min_separation) {
        Ok(mut peaks) => {
            peaks.sort_by(|a, b| {
                values[*b].partial_cmp(&values[*a]).unwrap_or(std::cmp::Ordering::Equal)
            });
            peaks
        }
        Err(Error::ResolutionFailure { found, .. }) if found > 0 => {
            top_local_maxima_1d(values, found, min_separation)
        }
        Err(_) => Vec::new(),
    }
}

/// Greedy selection of the `count` largest candidates under a pairwise
/// separation predicate, ties broken by lower linear index.
fn select<T: Copy>(
    mut candidates: Vec<T>,
    count: usize,
    separated: impl Fn(&T, &T) -> bool,
    value: impl Fn(&T) -> f64,
    index: impl Fn(&T) -> usize,
) -> Result<Vec<T>> {
    candidates.sort_by(|a, b| {
        value(b)
            .partial_cmp(&value(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(index(a).cmp(&index(b)))
    });
    let mut picked: Vec<T> = Vec::with_capacity(count);
    for cand in candidates {
        if picked.len() == count {
            break;
        }
        if picked.iter().all(|p| separated(p, &cand)) {
            picked.push(cand);
        }
    }
    if picked.len() < count {
        return Err(Error::ResolutionFailure {
            found: picked.len(),
            requested: count,
        });
    }
    picked.sort_by_key(|p| index(p));
    Ok(picked)
}
