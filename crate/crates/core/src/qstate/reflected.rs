//! Canonical purification, reflected entropy and `h = S_R − I`.
//!
//! The canonical purification of `ρ` on subsystems `(X_1, …, X_k)` lives on
//! `(X_1, …, X_k, X̄_k, …, X̄_1)`: its amplitude at `(x, x̄)` is `√ρ[x, x̄]`,
//! with the mirrored factors conjugated in the computational basis. For two
//! parties the order is `(A, B, B̄, Ā)`, so every cut used below is contiguous.

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;

use super::{
    conditional_mutual_information, entropy_report, to_three_party, DensityMatrix, PureState,
    Tripartition,
};
use crate::error::{domain, Result};
use crate::linalg::{self, EIG_FLOOR};

/// Lays out the matrix `x` (rows and columns over `dims`) as a state on
/// `(dims, reversed dims)`.
fn mirrored_state(x: MatRef<'_, c64>, dims: &[usize]) -> Result<PureState> {
    let k = dims.len();
    let n: usize = dims.iter().product();
    // column index of x is the row-major index of (x̄_1..x̄_k); the state
    // stores the mirror reversed, (x̄_k..x̄_1).
    let rev: Vec<usize> = dims.iter().rev().copied().collect();
    let mut col_of_rev = vec![0usize; n];
    for (r, slot) in col_of_rev.iter_mut().enumerate() {
        let mut rem = r;
        let mut digits = vec![0usize; k];
        for p in (0..k).rev() {
            digits[p] = rem % rev[p];
            rem /= rev[p];
        }
        // digits[p] is the digit of subsystem k-1-p
        let mut c = 0;
        for q in 0..k {
            c = c * dims[q] + digits[k - 1 - q];
        }
        *slot = c;
    }
    let mut amps = Vec::with_capacity(n * n);
    for i in 0..n {
        for &c in &col_of_rev {
            amps.push(x[(i, c)]);
        }
    }
    let mut all_dims = dims.to_vec();
    all_dims.extend(rev);
    PureState::normalized(amps, all_dims)
}

/// Canonical purification `|√ρ⟩` through an eigendecomposition of `ρ`.
pub fn canonical_purification(rho: &DensityMatrix) -> Result<PureState> {
    let (w, v) = linalg::herm_eigh(rho.matrix())?;
    if let Some(&m) = w.first() {
        if m < -1e-8 {
            return domain(format!("negative eigenvalue {m:.3e}: not a density matrix"));
        }
    }
    let n = w.len();
    let mut vs = v.clone();
    for (k, &wk) in w.iter().enumerate() {
        let s = if wk > EIG_FLOOR { wk.sqrt() } else { 0.0 };
        for i in 0..n {
            vs[(i, k)] *= s;
        }
    }
    let sqrt_rho = &vs * v.adjoint();
    mirrored_state(sqrt_rho.as_ref(), rho.dims())
}

/// Canonical purification of `ρ_AB` read off the Schmidt decomposition of the
/// state across AB|C; avoids diagonalising `ρ_AB` when `d_C` is small.
pub fn canonical_purification_of(state: &PureState, part: &Tripartition) -> Result<PureState> {
    let s3 = to_three_party(state, part)?;
    let psi = s3.matricize(&[0, 1])?;
    let (u, s, _) = linalg::thin_svd(psi.as_ref())?;
    let r = s.iter().filter(|&&x| x * x > EIG_FLOOR).count();
    let us = Mat::from_fn(u.nrows(), r, |i, k| u[(i, k)] * s[k]);
    let ur = Mat::from_fn(u.nrows(), r, |i, k| u[(i, k)]);
    let sqrt_rho = &us * ur.adjoint();
    mirrored_state(sqrt_rho.as_ref(), &s3.dims()[..2])
}

fn check_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().len() != 2 {
        return domain(format!(
            "reflected entropy needs a two-party density matrix, got dims {:?}",
            rho.dims()
        ));
    }
    Ok(())
}

/// `S_R(A:B) = S(AĀ)` of the canonical purification of a two-party `ρ_AB`.
pub fn reflected_entropy(rho: &DensityMatrix) -> Result<f64> {
    check_bipartite(rho)?;
    let pur = canonical_purification(rho)?;
    pur.subsystem_entropy(&[0, 3])
}

/// `S_R(A:B)` for the A and B parties of `state`.
pub fn reflected_entropy_of(state: &PureState, part: &Tripartition) -> Result<f64> {
    let pur = canonical_purification_of(state, part)?;
    pur.subsystem_entropy(&[0, 3])
}

/// `h(A:B) = S_R(A:B) − I(A:B)`.
pub fn h_measure(state: &PureState, part: &Tripartition) -> Result<f64> {
    let rep = entropy_report(state, part)?;
    Ok(reflected_entropy_of(state, part)? - rep.i_ab)
}

/// `h(A:B)` as `I(Ā:B|A)` on the canonical purification.
pub fn h_via_cmi(state: &PureState, part: &Tripartition) -> Result<f64> {
    let pur = canonical_purification_of(state, part)?;
    // (A, B, B̄, Ā) = (0, 1, 2, 3)
    conditional_mutual_information(&pur, &[3], &[0], &[1])
}

/// The four equal conditional mutual informations
/// `[I(Ā:B|A), I(A:B̄|B), I(B:Ā|A), I(B̄:A|Ā)]`.
pub fn h_cmi_forms(state: &PureState, part: &Tripartition) -> Result<[f64; 4]> {
    let pur = canonical_purification_of(state, part)?;
    Ok([
        conditional_mutual_information(&pur, &[3], &[0], &[1])?,
        conditional_mutual_information(&pur, &[0], &[1], &[2])?,
        conditional_mutual_information(&pur, &[1], &[0], &[3])?,
        conditional_mutual_information(&pur, &[2], &[3], &[0])?,
    ])
}
