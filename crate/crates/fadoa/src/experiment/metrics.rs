//! RMSE with optimal truth-to-estimate pairing, and per-trial records.
//!
//! Estimates come back from the estimators unordered, so each trial is
//! matched to its truth by the assignment minimizing the total squared
//! angular error (exhaustive over permutations; all supported configs have
//! L <= 8). The reported metric is
//! RMSE = (1/L) sum_l sqrt(mean_t [ (d_theta^2 + d_phi^2) / 2 ])  [degrees].

use crate::error::{Error, Result};
use crate::fast_music::AngleEstimateSet;
use crate::geometry::AnglePair;

/// Largest source count the exhaustive assignment accepts.
pub const MAX_ASSIGNMENT_SOURCES: usize = 8;

/// Squared angular error of one (truth, estimate) pair in degrees squared:
/// (d_theta^2 + d_phi^2) / 2.
fn pair_sq_err(truth: &AnglePair, est: &AnglePair) -> f64 {
    let dt = truth.theta_deg() - est.theta_deg();
    let dp = truth.phi_deg() - est.phi_deg();
    (dt * dt + dp * dp) / 2.0
}

/// The estimate index assigned to each truth index under the
/// minimum-total-squared-error matching (exhaustive over permutations).
pub fn assignment(truth: &[AnglePair], estimates: &[AnglePair]) -> Result<Vec<usize>> {
    let l = truth.len();
    if estimates.len() != l {
        return Err(Error::DimensionMismatch {
            context: "assignment",
            expected: l.to_string(),
            got: estimates.len().to_string(),
        });
    }
    if l == 0 {
        return Err(Error::InvalidInput("need at least one source".into()));
    }
    if l > MAX_ASSIGNMENT_SOURCES {
        return Err(Error::InvalidInput(format!(
            "exhaustive assignment supports at most {MAX_ASSIGNMENT_SOURCES} sources, got {l}"
        )));
    }
    let mut cost = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..l {
            cost[i * l + j] = pair_sq_err(&truth[i], &estimates[j]);
        }
    }
    // Heap's algorithm over estimate indices.
    let mut perm: Vec<usize> = (0..l).collect();
    let mut counters = vec![0usize; l];
    let mut best_perm = perm.clone();
    let mut best_total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * l + j]).sum();
    let mut i = 0;
    while i < l {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let total: f64 = perm.iter().enumerate().map(|(r, &j)| cost[r * l + j]).sum();
            if total < best_total {
                best_total = total;
                best_perm = perm.clone();
            }
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(best_perm)
}

/// Per-truth-index squared errors (degrees^2) under the minimum-total-error
/// assignment of estimates to truths.
pub fn assign_sq_errors(truth: &[AnglePair], estimates: &[AnglePair]) -> Result<Vec<f64>> {
    let perm = assignment(truth, estimates)?;
    Ok(perm
        .iter()
        .enumerate()
        .map(|(i, &j)| pair_sq_err(&truth[i], &estimates[j]))
        .collect())
}

/// Paired per-source angular errors in degrees.
pub fn pair_errors_deg(truth: &[AnglePair], estimates: &[AnglePair]) -> Result<Vec<f64>> {
    Ok(assign_sq_errors(truth, estimates)?.into_iter().map(f64::sqrt).collect())
}

/// RMSE over trials in degrees. Each trial contributes its assigned
/// squared errors; trials must all carry the same source count.
pub fn rmse(truths: &[Vec<AnglePair>], estimates: &[Vec<AnglePair>]) -> Result<f64> {
    if truths.is_empty() || truths.len() != estimates.len() {
        return Err(Error::InvalidInput(format!(
            "rmse needs matching nonempty trial sets, got {} truths and {} estimates",
            truths.len(),
            estimates.len()
        )));
    }
    let l = truths[0].len();
    let mut acc = vec![0.0f64; l];
    for (t, e) in truths.iter().zip(estimates) {
        if t.len() != l {
            return Err(Error::InvalidInput("trials disagree on source count".into()));
        }
        for (i, sq) in assign_sq_errors(t, e)?.into_iter().enumerate() {
            acc[i] += sq;
        }
    }
    let n_trials = truths.len() as f64;
    Ok(acc.iter().map(|s| (s / n_trials).sqrt()).sum::<f64>() / l as f64)
}

/// Everything recorded about one Monte-Carlo trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: u64,
    pub truth: Vec<AnglePair>,
    pub estimates: Option<AngleEstimateSet>,
    /// Assigned per-source errors in degrees; empty when the trial failed.
    pub errors_deg: Vec<f64>,
    pub stage_seconds: Vec<(&'static str, f64)>,
    pub total_seconds: f64,
    /// CRLB-based RMSE floor for this trial's realization, degrees.
    pub crlb_floor_deg: Option<f64>,
    pub seed_lineage: String,
    pub failed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap(t: f64, p: f64) -> AnglePair {
        AnglePair::from_degrees(t, p).unwrap()
    }

    #[test]
    fn perfect_estimates_have_zero_rmse() {
        let truth = vec![vec![ap(10.0, 20.0), ap(-30.0, 5.0)]];
        assert_eq!(rmse(&truth, &truth).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_unit_errors() {
        // Errors of (1 deg, 1 deg) give sqrt((1 + 1)/2) = 1 deg.
        let truth = vec![vec![ap(10.0, 20.0)]];
        let est = vec![vec![ap(11.0, 21.0)]];
        assert!((rmse(&truth, &est).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assignment_is_permutation_invariant() {
        // Exhaustive-permutation oracle for L <= 4: the reported RMSE must
        // not depend on the order the estimator returned the angles in.
        let truth = vec![ap(-40.0, 10.0), ap(5.0, -25.0), ap(33.0, 48.0), ap(60.0, -60.0)];
        let base = vec![ap(-39.5, 10.2), ap(5.4, -25.1), ap(32.0, 47.0), ap(59.0, -61.0)];
        let reference = rmse(&[truth.clone()], &[base.clone()]).unwrap();
        // All 24 permutations.
        let idx = [0usize, 1, 2, 3];
        let mut perms = Vec::new();
        for a in idx {
            for b in idx {
                for c in idx {
                    for d in idx {
                        let p = [a, b, c, d];
                        let mut seen = [false; 4];
                        if p.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                            perms.push(p);
                        }
                    }
                }
            }
        }
        assert_eq!(perms.len(), 24);
        for p in perms {
            let shuffled: Vec<AnglePair> = p.iter().map(|&i| base[i]).collect();
            let got = rmse(&[truth.clone()], &[shuffled]).unwrap();
            assert!(
                (got - reference).abs() < 1e-12,
                "permutation {p:?}: {got} vs {reference}"
            );
        }
    }

    #[test]
    fn assignment_picks_the_cheaper_matching() {
        let truth = vec![ap(0.0, 0.0), ap(10.0, 0.0)];
        // Estimates swapped relative to truth order.
        let est = vec![ap(9.5, 0.0), ap(0.5, 0.0)];
        let errs = pair_errors_deg(&truth, &est).unwrap();
        assert!(errs[0] < 1.0 && errs[1] < 1.0, "assignment failed: {errs:?}");
    }

    #[test]
    fn empty_and_mismatched_inputs_rejected() {
        assert!(rmse(&[], &[]).is_err());
        let t = vec![vec![ap(0.0, 0.0)]];
        assert!(rmse(&t, &[]).is_err());
        assert!(assign_sq_errors(&t[0], &[]).is_err());
    }
}
