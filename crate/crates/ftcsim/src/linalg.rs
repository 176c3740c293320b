//! Dense symmetric eigendecomposition and small matrix helpers.
//!
//! The static Hamiltonians assembled in this crate are real symmetric in the
//! product eigenbasis (charge operators enter only in pairs), so a real
//! solver covers every diagonalization the simulator needs. The implementation
//! is the classic two-stage scheme: Householder reduction to tridiagonal form
//! followed by implicit-shift QL iteration with eigenvector accumulation.

use ndarray::{Array1, Array2};

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

/// Maximum absolute asymmetry |A - A^T| tolerated by [`eigh`].
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (max |A - A^T| = {0:.3e})")]
    NotSymmetric(f64),
    #[error("QL iteration failed to converge at row {0}")]
    NoConvergence(usize),
}

/// Eigendecomposition of a real symmetric matrix; eigenvalues ascending.
pub fn eigh(a: &Array2<f64>) -> Result<SymEigen, LinalgError> {
    let (n, m) = a.dim();
    if n != m {
        return Err(LinalgError::NotSquare(n, m));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
    if asym > SYMMETRY_TOL * scale {
        return Err(LinalgError::NotSymmetric(asym));
    }

    let mut z = a.clone();
    let (mut d, mut e) = tred2(&mut z);
    tqli(&mut d, &mut e, &mut z)?;
    sort_ascending(&mut d, &mut z);
    Ok(SymEigen { values: d, vectors: z })
}

/// Eigenvalues only (ascending) of a real symmetric matrix.
pub fn eigvalsh(a: &Array2<f64>) -> Result<Array1<f64>, LinalgError> {
    // The accumulation of Q dominates the cost, so skip it.
    let (n, m) = a.dim();
    if n != m {
        return Err(LinalgError::NotSquare(n, m));
    }
    let mut z = a.clone();
    let (mut d, mut e) = tred2_novec(&mut z);
    tqli_novec(&mut d, &mut e)?;
    let mut v = d.to_vec();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(Array1::from_vec(v))
}

// Householder reduction A -> tridiagonal (d, e), accumulating the orthogonal
// transform in `z` so that A = Z T Z^T on exit. Inner loops run on contiguous
// row slices of the flat buffer.
fn tred2(z: &mut Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let n = z.nrows();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    {
        let zs = z.as_slice_mut().expect("contiguous");
        for i in (1..n).rev() {
            let l = i - 1;
            let mut h = 0.0;
            if l > 0 {
                let mut scale = 0.0;
                for k in 0..=l {
                    scale += zs[i * n + k].abs();
                }
                if scale == 0.0 {
                    e[i] = zs[i * n + l];
                } else {
                    for k in 0..=l {
                        zs[i * n + k] /= scale;
                        h += zs[i * n + k] * zs[i * n + k];
                    }
                    let mut f = zs[i * n + l];
                    let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                    e[i] = scale * g;
                    h -= f * g;
                    zs[i * n + l] = f - g;
                    f = 0.0;
                    for j in 0..=l {
                        zs[j * n + i] = zs[i * n + j] / h;
                        // g = row_j[0..=j] . row_i[0..=j] + col_j[j+1..=l] . row_i[j+1..=l]
                        let mut g = 0.0;
                        for k in 0..=j {
                            g += zs[j * n + k] * zs[i * n + k];
                        }
                        for k in (j + 1)..=l {
                            g += zs[k * n + j] * zs[i * n + k];
                        }
                        e[j] = g / h;
                        f += e[j] * zs[i * n + j];
                    }
                    let hh = f / (h + h);
                    for j in 0..=l {
                        let f = zs[i * n + j];
                        let g = e[j] - hh * f;
                        e[j] = g;
                        for k in 0..=j {
                            zs[j * n + k] -= f * e[k] + g * zs[i * n + k];
                        }
                    }
                }
            } else {
                e[i] = zs[i * n + l];
            }
            d[i] = h;
        }
        d[0] = 0.0;
        e[0] = 0.0;
        // accumulate the transform; G and row-axpy keep the inner loops on
        // contiguous slices
        let mut gbuf = vec![0.0f64; n];
        for i in 0..n {
            if d[i] != 0.0 {
                let ii = i;
                for gj in gbuf.iter_mut().take(ii) {
                    *gj = 0.0;
                }
                for k in 0..ii {
                    let w = zs[ii * n + k];
                    if w == 0.0 {
                        continue;
                    }
                    let row = &zs[k * n..k * n + ii];
                    for (gj, rv) in gbuf[..ii].iter_mut().zip(row) {
                        *gj += w * rv;
                    }
                }
                for k in 0..ii {
                    let f = zs[k * n + ii];
                    if f == 0.0 {
                        continue;
                    }
                    let row = &mut zs[k * n..k * n + ii];
                    for (rv, gj) in row.iter_mut().zip(&gbuf[..ii]) {
                        *rv -= f * gj;
                    }
                }
            }
            d[i] = zs[i * n + i];
            zs[i * n + i] = 1.0;
            for j in 0..i {
                zs[j * n + i] = 0.0;
                zs[i * n + j] = 0.0;
            }
        }
    }
    (Array1::from_vec(d), Array1::from_vec(e))
}

// Reduction without eigenvector accumulation.
fn tred2_novec(z: &mut Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let n = z.nrows();
    let mut d = Array1::zeros(n);
    let mut e = Array1::zeros(n);
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z[[i, k]].abs();
            }
            if scale == 0.0 {
                e[i] = z[[i, l]];
            } else {
                for k in 0..=l {
                    z[[i, k]] /= scale;
                    h += z[[i, k]] * z[[i, k]];
                }
                let mut f = z[[i, l]];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[[i, l]] = f - g;
                f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[[j, k]] * z[[i, k]];
                    }
                    for k in (j + 1)..=l {
                        g += z[[k, j]] * z[[i, k]];
                    }
                    e[j] = g / h;
                    f += e[j] * z[[i, j]];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = z[[i, j]];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let t = f * e[k] + g * z[[i, k]];
                        z[[j, k]] -= t;
                    }
                }
            }
        } else {
            e[i] = z[[i, l]];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = z[[i, i]];
    }
    (d, e)
}

fn pythag(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

// Implicit-shift QL on the tridiagonal (d, e). Rotations touch eigenvector
// pairs; operating on the transposed accumulator keeps them contiguous.
fn tqli(d: &mut Array1<f64>, e: &mut Array1<f64>, z: &mut Array2<f64>) -> Result<(), LinalgError> {
    let n = d.len();
    let mut qt = vec![0.0f64; n * n];
    {
        let zs = z.as_slice().expect("contiguous");
        for i in 0..n {
            for j in 0..n {
                qt[j * n + i] = zs[i * n + j];
            }
        }
    }
    tqli_rows(d, e, &mut qt, n)?;
    {
        let zs = z.as_slice_mut().expect("contiguous");
        for i in 0..n {
            for j in 0..n {
                zs[i * n + j] = qt[j * n + i];
            }
        }
    }
    Ok(())
}

// qt rows are eigenvector candidates.
fn tqli_rows(d: &mut Array1<f64>, e: &mut Array1<f64>, qt: &mut [f64], n: usize) -> Result<(), LinalgError> {
    debug_assert_eq!(n, d.len());
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
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
            if iter > 50 {
                return Err(LinalgError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                {
                    let (lo, hi) = qt.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..(i + 1) * n];
                    let row_ip = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_ip.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn tqli_novec(d: &mut Array1<f64>, e: &mut Array1<f64>) -> Result<(), LinalgError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
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
            if iter > 50 {
                return Err(LinalgError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_ascending(d: &mut Array1<f64>, z: &mut Array2<f64>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let dv = d.clone();
    let zc = z.clone();
    for (new, &old) in order.iter().enumerate() {
        d[new] = dv[old];
        for k in 0..n {
            z[[k, new]] = zc[[k, old]];
        }
    }
}

/// `out = a b` for real square matrices (thin wrapper, kept for readability).
pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    a.dot(b)
}

/// Similarity transform `v^T a v`.
pub fn conjugate(a: &Array2<f64>, v: &Array2<f64>) -> Array2<f64> {
    v.t().dot(a).dot(v)
}

/// Kronecker product of dense real matrices.
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == 0.0 {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Solve `a x = b` for square `a` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(LinalgError::NotSquare(a.nrows(), a.ncols()));
    }
    let m = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if lu[[r, col]].abs() > lu[[piv, col]].abs() {
                piv = r;
            }
        }
        if lu[[piv, col]] == 0.0 {
            return Err(LinalgError::NoConvergence(col));
        }
        if piv != col {
            for c in 0..n {
                lu.swap([col, c], [piv, c]);
            }
            for c in 0..m {
                x.swap([col, c], [piv, c]);
            }
        }
        for r in (col + 1)..n {
            let f = lu[[r, col]] / lu[[col, col]];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                lu[[r, c]] -= f * lu[[col, c]];
            }
            for c in 0..m {
                x[[r, c]] -= f * x[[col, c]];
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..m {
            let mut s = x[[col, c]];
            for k in (col + 1)..n {
                s -= lu[[col, k]] * x[[k, c]];
            }
            x[[col, c]] = s / lu[[col, col]];
        }
    }
    Ok(x)
}

/// Matrix inverse via [`solve`] against the identity.
pub fn inverse(a: &Array2<f64>) -> Result<Array2<f64>, LinalgError> {
    solve(a, &Array2::eye(a.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn residual(a: &Array2<f64>, eig: &SymEigen) -> f64 {
        let av = a.dot(&eig.vectors);
        let mut worst = 0.0f64;
        for (j, &w) in eig.values.iter().enumerate() {
            for i in 0..a.nrows() {
                worst = worst.max((av[[i, j]] - w * eig.vectors[[i, j]]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two_analytic() {
        let a = array![[1.0, 2.0], [2.0, -1.0]];
        let eig = eigh(&a).unwrap();
        let r = 5.0f64.sqrt();
        assert!((eig.values[0] + r).abs() < 1e-12);
        assert!((eig.values[1] - r).abs() < 1e-12);
        assert!(residual(&a, &eig) < 1e-12);
    }

    #[test]
    fn random_symmetric_residual_and_orthogonality() {
        // deterministic pseudo-random fill
        let n = 60;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        let eig = eigh(&a).unwrap();
        assert!(residual(&a, &eig) < 1e-10);
        let q = eig.vectors.t().dot(&eig.vectors);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((q[[i, j]] - want).abs() < 1e-10);
            }
        }
        // eigvalsh agrees with the full decomposition
        let vals = eigvalsh(&a).unwrap();
        for i in 0..n {
            assert!((vals[i] - eig.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_passthrough() {
        let a = Array2::from_diag(&array![3.0, -1.0, 2.0]);
        let eig = eigh(&a).unwrap();
        assert_eq!(eig.values.to_vec(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = array![[0.0, 1.0], [0.5, 0.0]];
        assert!(matches!(eigh(&a), Err(LinalgError::NotSymmetric(_))));
    }

    #[test]
    fn solve_and_inverse() {
        let a = array![[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 2.0]];
        let inv = inverse(&a).unwrap();
        let id = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kron_shapes_and_values() {
        let a = array![[1.0, 2.0], [0.0, 1.0]];
        let b = array![[0.0, 1.0], [1.0, 0.0]];
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 1]], 1.0);
        assert_eq!(k[[0, 3]], 2.0);
        assert_eq!(k[[3, 2]], 1.0);
        assert_eq!(k[[2, 0]], 0.0);
    }
}
