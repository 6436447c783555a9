//! Dense kernels shared by every module, backed by `faer`.
//!
//! Matrices are `faer::Mat<c64>`. Hermitian eigensolves dispatch to a real
//! symmetric solver when the input has no imaginary part, which is the common
//! case for ground states of real Hamiltonians.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as c64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalues below this are treated as exactly zero in entropies, logarithms
/// and square roots.
pub const EIG_FLOOR: f64 = 1e-12;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };

pub fn is_real(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

fn real_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

fn complexify(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn herm_eigvals(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if is_real(m) {
        real_part(m)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))
    } else {
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))
    }
}

/// Eigen-decomposition `m = V diag(w) V†` of a Hermitian matrix, ascending `w`.
pub fn herm_eigh(m: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    if m.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if is_real(m) {
        let evd = real_part(m)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let w = evd.S().column_vector().iter().copied().collect();
        Ok((w, complexify(evd.U())))
    } else {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let w = evd.S().column_vector().iter().map(|x| x.re).collect();
        Ok((w, evd.U().to_owned()))
    }
}

/// Thin SVD `m = U diag(s) V†`, singular values descending.
pub fn thin_svd(m: MatRef<'_, c64>) -> Result<(Mat<c64>, Vec<f64>, Mat<c64>)> {
    if is_real(m) {
        let svd = real_part(m)
            .thin_svd()
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let s = svd.S().column_vector().iter().copied().collect();
        Ok((complexify(svd.U()), s, complexify(svd.V())))
    } else {
        let svd = m.thin_svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let s = svd.S().column_vector().iter().map(|x| x.re).collect();
        Ok((svd.U().to_owned(), s, svd.V().to_owned()))
    }
}

/// Gram matrix `m m†`.
pub fn gram_rows(m: MatRef<'_, c64>) -> Mat<c64> {
    if is_real(m) {
        let r = real_part(m);
        complexify((&r * r.transpose()).as_ref())
    } else {
        m * m.adjoint()
    }
}

/// Gram matrix `m† m`.
pub fn gram_cols(m: MatRef<'_, c64>) -> Mat<c64> {
    if is_real(m) {
        let r = real_part(m);
        complexify((r.transpose() * &r).as_ref())
    } else {
        m.adjoint() * m
    }
}

/// Von Neumann entropy (nats) of a probability spectrum with the eigenvalue floor.
pub fn entropy_of_spectrum(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > EIG_FLOOR)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Entropy of `m m†` normalised to unit trace, computed on the smaller Gram side.
pub fn entanglement_entropy(m: MatRef<'_, c64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let g = if m.nrows() <= m.ncols() { gram_rows(m) } else { gram_cols(m) };
    let w = herm_eigvals(g.as_ref())?;
    let tr: f64 = w.iter().sum();
    if tr <= 0.0 {
        return Err(Error::Domain("zero-norm state".into()));
    }
    let p: Vec<f64> = w.iter().map(|x| x / tr).collect();
    Ok(entropy_of_spectrum(&p))
}

pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

/// `Re Tr(a† b)`, the real Frobenius inner product.
pub fn real_inner(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            acc += x.re * y.re + x.im * y.im;
        }
    }
    acc
}

pub fn hermiticity_defect(m: MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Unitary defect `‖U†U − 1‖_F`.
pub fn unitarity_defect(u: MatRef<'_, c64>) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { ONE } else { ZERO };
            acc += (g[(i, j)] - target).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `exp(i·t·H)` for Hermitian `H`, through its eigenbasis.
pub fn expi_hermitian(h: MatRef<'_, c64>, t: f64) -> Result<Mat<c64>> {
    let (w, v) = herm_eigh(h)?;
    let n = w.len();
    let mut scaled = v.clone();
    for (k, &wk) in w.iter().enumerate() {
        let phase = c64::from_polar(1.0, wk * t);
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    Ok(&scaled * v.adjoint())
}

/// Nearest unitary in Frobenius norm (polar factor `U V†`).
pub fn polar_unitary(m: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let (u, _, v) = thin_svd(m)?;
    Ok(&u * v.adjoint())
}

/// Haar-random unitary of size `n` (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let g = Mat::from_fn(n, n, |_, _| {
        c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// Haar-random real orthogonal matrix, stored as complex.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let g = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(n, n, |i, k| {
        let s = if r[(k, k)] < 0.0 { -1.0 } else { 1.0 };
        c64::new(q[(i, k)] * s, 0.0)
    })
}

/// Haar-random isometry `d_in -> d_out` (first `d_in` columns of a Haar unitary).
pub fn haar_isometry<R: Rng + ?Sized>(d_out: usize, d_in: usize, rng: &mut R) -> Mat<c64> {
    assert!(d_out >= d_in);
    let u = haar_unitary(d_out, rng);
    Mat::from_fn(d_out, d_in, |i, j| u[(i, j)])
}

/// Random Hermitian matrix with i.i.d. Gaussian entries, Frobenius-normalised.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let g = Mat::from_fn(n, n, |_, _| {
        c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut h = Mat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    let nrm = h.norm_l2();
    if nrm > 0.0 {
        for j in 0..n {
            for i in 0..n {
                h[(i, j)] /= nrm;
            }
        }
    }
    h
}

/// Random normalised complex vector with Gaussian entries.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<c64> {
    let mut v: Vec<c64> = (0..n)
        .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let nrm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

pub fn identity(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 5, 9] {
            let u = haar_unitary(n, &mut rng);
            assert!(unitarity_defect(u.as_ref()) < 1e-12);
        }
    }

    #[test]
    fn expi_of_hermitian_is_unitary_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(6, &mut rng);
        let a = expi_hermitian(h.as_ref(), 0.3).unwrap();
        let b = expi_hermitian(h.as_ref(), 0.4).unwrap();
        let c = expi_hermitian(h.as_ref(), 0.7).unwrap();
        assert!(unitarity_defect(a.as_ref()) < 1e-12);
        let ab = &a * &b;
        assert!((&ab - &c).norm_l2() < 1e-12);
    }

    #[test]
    fn real_and_complex_eigensolvers_agree() {
        let m = Mat::from_fn(4, 4, |i, j| c64::new(1.0 / (1.0 + i as f64 + j as f64), 0.0));
        let w_real = herm_eigvals(m.as_ref()).unwrap();
        let w_cplx: Vec<f64> = m
            .self_adjoint_eigenvalues(Side::Lower)
            .unwrap();
        for (a, b) in w_real.iter().zip(&w_cplx) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit() {
        assert!((entropy_of_spectrum(&[0.5, 0.5]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy_of_spectrum(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn polar_projection_repairs_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(5, &mut rng);
        let noisy = Mat::from_fn(5, 5, |i, j| u[(i, j)] + c64::new(1e-6 * (i as f64), -1e-6));
        let p = polar_unitary(noisy.as_ref()).unwrap();
        assert!(unitarity_defect(p.as_ref()) < 1e-13);
        assert!((&p - &u).norm_l2() < 1e-5);
    }
}
