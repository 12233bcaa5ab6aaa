//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Columns of the returned matrix are the eigenvectors.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Flip each column so that its first entry of magnitude above `1e-12` is positive.
pub fn fix_column_signs(v: &mut DMatrix<f64>) {
    for j in 0..v.ncols() {
        let lead = v.column(j).iter().copied().find(|x| x.abs() > 1e-12);
        if matches!(lead, Some(x) if x < 0.0) {
            v.column_mut(j).neg_mut();
        }
    }
}

/// `f(M)` for a symmetric `M` via its eigen-decomposition.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_desc(m);
    let d = DMatrix::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

/// Symmetric inverse square root of a positive definite matrix.
pub fn inv_sqrt_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |x| 1.0 / x.sqrt())
}

/// Orthogonal polar factor `U Vᵀ` of `M = U Σ Vᵀ`.
pub fn polar_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    u * vt
}

/// Ratio of the largest to the smallest eigenvalue magnitude of a symmetric matrix.
pub fn sym_condition(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen_desc(m);
    let abs: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Householder reflection `H` (orthogonal, symmetric) with `H e_last = v`.
///
/// `v` must be a unit vector. Returns the identity when `v = e_last`.
pub fn householder_to(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let mut u = -v.clone();
    u[n - 1] += 1.0;
    let norm = u.norm();
    if norm < 1e-14 {
        return DMatrix::identity(n, n);
    }
    u /= norm;
    DMatrix::identity(n, n) - (&u * u.transpose()) * 2.0
}

/// Minimum-norm least-squares solution of `A x = b` via SVD with relative cutoff `rcond`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rcond * smax).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("svd solve with both factors")
}

/// Numerical rank with singular values above `rel_tol · σ_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Value at zero of the least-squares polynomial of degree `deg` through `(x_k, y_k)`.
///
/// The abscissae are scaled by their maximum before fitting.
pub fn polyfit_at_zero(x: &[f64], y: &[f64], deg: usize) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let rows = x.len();
    let v = DMatrix::from_fn(rows, deg + 1, |i, j| (x[i] / scale).powi(j as i32));
    let coef = lstsq(&v, &DVector::from_column_slice(y), 1e-14);
    coef[0]
}

/// Operator 2-norm of a symmetric matrix.
pub fn sym_norm2(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen_desc(m);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
