use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{real_embedding, symmetrize};

/// Largest eigenvalue and a unit eigenvector of a symmetric PSD matrix.
///
/// Inside a repeated top eigenspace the vector is the normalized projection of
/// the first coordinate axis with a nonzero projection. The sign makes the
/// first nonzero component positive. `λ·wwᵀ` is then a best rank-1
/// approximation in Frobenius norm.
pub fn dominant_rank1(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let n = m.nrows();
    let eig = symmetrize(m).symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = eig.eigenvalues.amax().max(1e-300);
    let top: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] >= lmax - 1e-10 * scale).collect();
    let mut w = eig.eigenvectors.column(top[0]).into_owned();
    if top.len() > 1 {
        for axis in 0..n {
            let mut proj = DVector::zeros(n);
            for &i in &top {
                let e = eig.eigenvectors.column(i);
                proj += e * e[axis];
            }
            if proj.norm() > 1e-8 {
                w = proj;
                break;
            }
        }
    }
    w /= w.norm();
    if let Some(first) = w.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            w = -w;
        }
    }
    (lmax, w)
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian PSD matrix, via
/// its real embedding. The global phase makes the first nonzero component
/// real and positive.
pub fn dominant_rank1_hermitian(m: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let n = m.nrows();
    let (lambda, w) = dominant_rank1(&real_embedding(m));
    let mut z = DVector::from_fn(n, |i, _| Complex64::new(w[i], w[i + n]));
    let norm = z.norm();
    if norm > 0.0 {
        z /= Complex64::new(norm, 0.0);
    }
    if let Some(first) = z.iter().find(|v| v.norm() > 1e-12).cloned() {
        let phase = first.conj() / first.norm();
        z *= phase;
    }
    (lambda, z)
}
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_eigenvalue_picks_first_axis() {
        let (l, w) = dominant_rank1(&DMatrix::identity(3, 3));
        assert!((l - 1.0).abs() < 1e-12);
        assert!((w - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn sign_makes_first_component_positive() {
        let v = DVector::from_vec(vec![-1.0, 2.0]);
        let (l, w) = dominant_rank1(&(&v * v.transpose()));
        assert!((l - 5.0).abs() < 1e-12);
        assert!(w[0] > 0.0);
        assert!((w[1] / w[0] + 2.0).abs() < 1e-12);
    }
}
