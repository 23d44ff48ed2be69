//! Hermitian eigendecomposition, Moore-Penrose pseudo-inverse, inverse
//! matrix square root, and a fast pseudo-inverse quadratic form used by the
//! reduced-dimension spectrum search.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix: real eigenvalues sorted
/// descending, unitary eigenvector matrix with column j paired to value j.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

fn check_square_finite(m: &DMatrix<Complex64>, context: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: "square matrix".into(),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(context));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix. The input must be Hermitian to
/// within 1e-8 (relative to its largest entry); it is symmetrized as
/// (R + R^H)/2 before decomposition. Output is deterministic for a fixed
/// input.
pub fn hermitian_evd(m: &DMatrix<Complex64>) -> Result<EigenPair> {
    check_square_finite(m, "hermitian_evd")?;
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if asym > 1e-8 * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian: max asymmetry {asym:.3e} exceeds 1e-8 * {scale:.3e}"
        )));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenPair { values, vectors })
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// `rel_tol * sigma_max` are treated as zero.
pub fn pseudo_inverse(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<DMatrix<Complex64>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("pseudo_inverse"));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd requested with u");
    let v_t = svd.v_t.as_ref().expect("svd requested with v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * smax;
    // M^+ = V S^+ U^H
    let k = svd.singular_values.len();
    let mut s_inv = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > cut && s > 0.0 {
            s_inv[(i, i)] = Complex64::new(1.0 / s, 0.0);
        }
    }
    Ok(v_t.adjoint() * s_inv * u.adjoint())
}

/// Pseudo-inverse of a Hermitian matrix via its eigendecomposition.
/// Eigenvalues with |lambda| <= rel_tol * max|lambda| are treated as zero.
pub fn hermitian_pinv(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<DMatrix<Complex64>> {
    let eig = hermitian_evd(m)?;
    let lmax = eig.values.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let cut = rel_tol * lmax;
    let n = m.nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam.abs() > cut {
            let v = eig.vectors.column(j);
            let w = 1.0 / lam;
            for r in 0..n {
                for c in 0..n {
                    out[(r, c)] += v[r] * v[c].conj() * w;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse Hermitian square root Q^{-1/2}, with eigenvalues floored at
/// `floor_rel * lambda_max` before inversion. Errors when the matrix has no
/// positive spectrum at all.
pub fn hermitian_sqrt_inv(m: &DMatrix<Complex64>, floor_rel: f64) -> Result<DMatrix<Complex64>> {
    let eig = hermitian_evd(m)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Err(Error::SingularMatrix {
            context: "hermitian_sqrt_inv",
            detail: format!("largest eigenvalue {lmax:.3e} is not positive"),
        });
    }
    let floor = floor_rel * lmax;
    let n = m.nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        let w = 1.0 / lam.max(floor).sqrt();
        let v = eig.vectors.column(j);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += v[r] * v[c].conj() * w;
            }
        }
    }
    Ok(out)
}

/// Computes e_idx^H E^+ e_idx for a Hermitian positive semidefinite matrix E,
/// where eigenvalues <= rel_tol * lambda_max are treated as zero.
///
/// This is the hot kernel of the reduced-dimension elevation search, so it
/// avoids a full eigenvector matrix: the complex problem is embedded as a
/// real symmetric one, tridiagonalized by Householder reflections, and the QL
/// rotations are accumulated on a single coordinate vector.
pub fn hermitian_pinv_quadform(m: &DMatrix<Complex64>, idx: usize, rel_tol: f64) -> Result<f64> {
    check_square_finite(m, "hermitian_pinv_quadform")?;
    let n = m.nrows();
    if idx >= n {
        return Err(Error::OutOfRange(format!("index {idx} >= dim {n}")));
    }
    // Real embedding [[A, -B], [B, A]] of E = A + iB; its spectrum is the
    // spectrum of E doubled, and the quadratic form on [e_idx; 0] equals the
    // complex quadratic form.
    let nn = 2 * n;
    let mut a = vec![0.0f64; nn * nn];
    for c in 0..n {
        for r in 0..n {
            let z = m[(r, c)];
            a[r * nn + c] = z.re;
            a[r * nn + (c + n)] = -z.im;
            a[(r + n) * nn + c] = z.im;
            a[(r + n) * nn + (c + n)] = z.re;
        }
    }
    let mut w = vec![0.0f64; nn];
    w[idx] = 1.0;
    let (mut d, mut e) = tridiagonalize_apply(&mut a, nn, &mut w);
    e.push(0.0); // spare slot used by the QL sweep
    ql_implicit_vector(&mut d, &mut e, &mut w)?;
    let lmax = d.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * lmax;
    let mut sum = 0.0;
    for j in 0..nn {
        if d[j] > cut && d[j] > 0.0 {
            sum += w[j] * w[j] / d[j];
        }
    }
    Ok(sum)
}

/// Householder tridiagonalization of a symmetric matrix stored row-major in
/// `a` (only the lower triangle is read and written). Returns the diagonal
/// and subdiagonal of T = Q^T A Q and replaces `w` by Q^T w.
///
/// Rows are reduced from the bottom up so every inner loop streams over a
/// contiguous leading row segment; the Householder vector of stage i is
/// row i's leading part and is left in place.
fn tridiagonalize_apply(a: &mut [f64], n: usize, w: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in (1..n).rev() {
        let m = i; // length of the row segment a[i][0..m]
        let f = a[i * n + (m - 1)];
        let mut sigma_head = 0.0;
        for j in 0..(m - 1) {
            let x = a[i * n + j];
            sigma_head += x * x;
        }
        if sigma_head <= f64::MIN_POSITIVE {
            // Already tridiagonal at this row.
            e[i - 1] = f;
            continue;
        }
        let sigma = sigma_head + f * f;
        let g = if f >= 0.0 { -sigma.sqrt() } else { sigma.sqrt() };
        e[i - 1] = g;
        let h = sigma - f * g; // ||v||^2 / 2
        v[..m].copy_from_slice(&a[i * n..i * n + m]);
        v[m - 1] = f - g;

        // p = A v / h over the leading m x m block, reading only the lower
        // triangle with symmetric dual accumulation.
        p[..m].fill(0.0);
        for j in 0..m {
            let vj = v[j];
            let row = &a[j * n..j * n + j];
            let mut acc = a[j * n + j] * vj;
            for k in 0..j {
                acc += row[k] * v[k];
            }
            for k in 0..j {
                p[k] += row[k] * vj;
            }
            p[j] += acc;
        }
        let mut vp = 0.0;
        for j in 0..m {
            p[j] /= h;
            vp += v[j] * p[j];
        }
        let kk = vp / (2.0 * h);
        for j in 0..m {
            q[j] = p[j] - kk * v[j];
        }
        // A <- A - v q^T - q v^T on the lower triangle.
        for j in 0..m {
            let vj = v[j];
            let qj = q[j];
            let row = &mut a[j * n..j * n + j + 1];
            for k in 0..=j {
                row[k] -= vj * q[k] + qj * v[k];
            }
        }
        // w <- P w with P = I - v v^T / h.
        let mut s = 0.0;
        for j in 0..m {
            s += v[j] * w[j];
        }
        let ts = s / h;
        for j in 0..m {
            w[j] -= ts * v[j];
        }
    }
    for j in 0..n {
        d[j] = a[j * n + j];
    }
    (d, e)
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix with
/// diagonal `d` (length n) and subdiagonal `e` (length n, `e[i]` couples
/// `d[i]` and `d[i+1]`, last slot spare). The plane rotations are accumulated
/// on the coordinate vector `w`, so on return `d` holds the eigenvalues and
/// `w[j]` the coordinate of the tracked vector along eigenvector `j`.
fn ql_implicit_vector(d: &mut [f64], e: &mut [f64], w: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    debug_assert_eq!(e.len(), n);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::SingularMatrix {
                    context: "ql_implicit_vector",
                    detail: "QL iteration failed to converge".into(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = w[i + 1];
                w[i + 1] = s * w[i] + c * f;
                w[i] = c * w[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
