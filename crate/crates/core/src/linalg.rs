//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// `(A + A†) / 2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Largest elementwise deviation of `a` from `a†`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    let adj = a.adjoint();
    a.iter()
        .zip(adj.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are real; the
/// columns of the returned matrix are the matching eigenvectors.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitize(a).symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Rebuild `V diag(values) V†`.
pub fn from_spectrum(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    let out = &scaled * vectors.adjoint();
    debug_assert_eq!(out.nrows(), n);
    out
}

/// Square root of a Hermitian positive semidefinite matrix; negative
/// eigenvalues (solver noise) are clipped to zero.
pub fn sqrt_psd(a: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(a);
    let roots: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    from_spectrum(&roots, &vectors)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// `exp(2πi k / d)` with `k` reduced modulo `d` first, so that equal powers of
/// the root of unity are bit-identical.
pub fn root_of_unity(d: usize, k: usize) -> C64 {
    let r = (k % d) as f64;
    C64::from_polar(1.0, std::f64::consts::TAU * r / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(4.0, 0.0),
            C64::new(9.0, 0.0),
        ]));
        let r = sqrt_psd(&a);
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((r[(1, 1)].re - 3.0).abs() < 1e-12);
        assert!(r[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn roots_of_unity_wrap() {
        assert_eq!(root_of_unity(6, 7), root_of_unity(6, 1));
        assert!((root_of_unity(2, 1) - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_values_sorted() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 2.0),
        ]));
        let s = singular_values(&a);
        assert!((s[0] - 2.0).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12);
    }
}
