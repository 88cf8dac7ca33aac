//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Reciprocal condition number below which a design matrix is rejected.
pub const RCOND_TOL: f64 = 1e-12;

/// Least-squares fit of every column of `y` on `x`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// `k × m` coefficients, one column per dependent variable.
    pub coefficients: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    /// Reciprocal condition number of the column-equilibrated design.
    pub rcond: f64,
}

/// Rank-deficient design. `columns` are the indices involved in the
/// near-null direction of the design.
#[derive(Debug, Clone, PartialEq)]
pub struct Collinear {
    pub columns: Vec<usize>,
    pub rcond: f64,
}

/// Solves `min ‖y − xβ‖` column by column through an SVD of the
/// equilibrated design, refusing designs with `rcond < RCOND_TOL`.
pub fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LeastSquares, Collinear> {
    assert_eq!(x.nrows(), y.nrows(), "least_squares: row mismatch");
    let k = x.ncols();
    if k == 0 {
        return Ok(LeastSquares {
            coefficients: DMatrix::zeros(0, y.ncols()),
            residuals: y.clone(),
            rcond: 1.0,
        });
    }
    let scales: Vec<f64> = (0..k)
        .map(|j| {
            let n = x.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut xs = x.clone();
    for (j, s) in scales.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = xs.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let (imin, smin) = sv.argmin();
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(rcond >= RCOND_TOL) || x.nrows() < k {
        let v_t = svd.v_t.as_ref().expect("svd computed with V");
        let row = v_t.row(imin);
        let peak = row.amax();
        let columns = (0..k).filter(|&j| row[j].abs() > 1e-6 * peak.max(1e-300)).collect();
        return Err(Collinear { columns, rcond });
    }
    let mut beta = svd
        .solve(y, 0.0)
        .expect("svd computed with U and V");
    // one step of iterative refinement
    let r = y - &xs * &beta;
    beta += svd.solve(&r, 0.0).expect("svd computed with U and V");
    for (j, s) in scales.iter().enumerate() {
        beta.row_mut(j).scale_mut(1.0 / s);
    }
    let residuals = y - x * &beta;
    Ok(LeastSquares {
        coefficients: beta,
        residuals,
        rcond,
    })
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// non-increasing order (eigenvectors as matching columns).
pub fn symmetric_eigen_desc(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = 0.5 * (a + a.transpose());
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

/// Largest modulus among the (complex) eigenvalues of a square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Orthonormal `n × n` matrix whose first column is `v / ‖v‖`.
pub fn complete_basis(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let mut m = DMatrix::identity(n, n);
    m.set_column(0, &(v / v.norm()));
    // Gram-Schmidt against the remaining identity columns, skipping the
    // one most aligned with v.
    let drop = v.iamax();
    let mut basis: Vec<DVector<f64>> = vec![v / v.norm()];
    for j in 0..n {
        if j == drop {
            continue;
        }
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        for b in &basis {
            let proj = b.dot(&e);
            e -= b * proj;
        }
        for b in &basis {
            let proj = b.dot(&e);
            e -= b * proj;
        }
        basis.push(e.normalize());
    }
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, b);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_and_orthogonality() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DMatrix::from_column_slice(4, 1, &[1.0, 3.0, 5.0, 7.1]);
        let ls = least_squares(&x, &y).unwrap();
        let xtr = x.transpose() * &ls.residuals;
        assert!(xtr.amax() < 1e-12);
    }

    #[test]
    fn duplicate_columns_named() {
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 2.0, 1.0, 5.0, 5.0, 1.0, -1.0, -1.0]);
        let y = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let err = least_squares(&x, &y).unwrap_err();
        assert_eq!(err.columns, vec![1, 2]);
    }

    #[test]
    fn completed_basis_is_orthonormal() {
        let v = DVector::from_vec(vec![0.3, -2.0, 0.5, 1.0]);
        let q = complete_basis(&v);
        let eye = q.transpose() * &q;
        assert!((eye - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
        let first = q.column(0);
        assert!((first - v.normalize()).amax() < 1e-15);
    }

    #[test]
    fn radius_of_rotation_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -0.8, 0.8, 0.0]);
        assert!((spectral_radius(&a) - 0.8).abs() < 1e-12);
    }
}
