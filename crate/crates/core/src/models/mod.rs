//! Qubit ring Hamiltonians, exact ground states and a free-fermion oracle.
//!
//! Site `j` of an `N`-site ring is bit `N − 1 − j` of a basis index, so basis
//! indices coincide with the row-major amplitude order of a [`PureState`]
//! with `N` qubit subsystems. `|0⟩` is the `+1` eigenstate of `Z`.
//!
//! [`PureState`]: crate::qstate::PureState

mod ed;

pub use ed::{
    ground_state, translate_state, GroundStateOptions, GroundStateResult, SectorBasis, SectorLabel,
    SparseHamiltonian,
};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Conserved quantity used to split the Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    None,
    /// `∏_j Z_j`.
    Parity,
    /// `Σ_j Z_j`.
    Magnetization,
}

/// A term `matrix` acting on sites `j, j+1, …, j+support−1 (mod N)`, summed over all `j`.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub support: usize,
    /// Real symmetric `2^support × 2^support` matrix; the first site is the most significant bit.
    pub matrix: Mat<f64>,
}

/// Translation-invariant Hamiltonian on a periodic qubit ring.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    n: usize,
    terms: Vec<LocalTerm>,
    symmetry: Symmetry,
}

impl LocalHamiltonian {
    pub fn new(n: usize, terms: Vec<LocalTerm>, symmetry: Symmetry) -> Result<Self> {
        if n < 2 {
            return domain("a ring needs at least 2 sites");
        }
        if n > 30 {
            return domain(format!("N = {n} exceeds the exact-diagonalisation range"));
        }
        for t in &terms {
            if t.support == 0 || t.support > 3 {
                return domain(format!("term support {} outside 1..=3", t.support));
            }
            if t.support > n {
                return domain(format!("term support {} exceeds N = {n}", t.support));
            }
            let dim = 1usize << t.support;
            if t.matrix.nrows() != dim || t.matrix.ncols() != dim {
                return domain("local matrix does not match its support");
            }
            for i in 0..dim {
                for j in 0..dim {
                    if (t.matrix[(i, j)] - t.matrix[(j, i)]).abs() > 1e-12 {
                        return domain("local matrix is not Hermitian");
                    }
                }
            }
        }
        Ok(Self { n, terms, symmetry })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// The same local terms on a ring of `n` sites.
    pub fn with_sites(&self, n: usize) -> Result<Self> {
        Self::new(n, self.terms.clone(), self.symmetry)
    }

    /// Every placed term as (sites, local matrix).
    pub fn placed_terms(&self) -> impl Iterator<Item = (Vec<usize>, &Mat<f64>)> + '_ {
        self.terms.iter().flat_map(move |t| {
            (0..self.n).map(move |j| ((0..t.support).map(|k| (j + k) % self.n).collect(), &t.matrix))
        })
    }

    /// Upper bound on `‖H‖` from the local operator norms.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let m = &t.matrix;
                let w = m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap_or_default();
                let op = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                op * self.n as f64
            })
            .sum()
    }

    /// Dense `2^N × 2^N` matrix; intended for small rings.
    pub fn to_dense(&self) -> Result<Mat<f64>> {
        if self.n > 14 {
            return domain("dense Hamiltonian limited to N ≤ 14");
        }
        let sparse = SparseHamiltonian::new(self, SectorBasis::full(self.n));
        Ok(sparse.to_dense())
    }
}

pub(crate) mod pauli {
    use faer::Mat;

    pub fn x() -> Mat<f64> {
        Mat::from_fn(2, 2, |i, j| if i != j { 1.0 } else { 0.0 })
    }

    pub fn z() -> Mat<f64> {
        Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 1) => -1.0,
            _ => 0.0,
        })
    }

    pub fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
        let (ra, ca) = (a.nrows(), a.ncols());
        let (rb, cb) = (b.nrows(), b.ncols());
        Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
    }

    /// `XX + YY`, which is real.
    pub fn xx_plus_yy() -> Mat<f64> {
        Mat::from_fn(4, 4, |i, j| if (i, j) == (1, 2) || (i, j) == (2, 1) { 2.0 } else { 0.0 })
    }
}

/// `H = Σ_j [−X_j X_{j+1} − Z_j + λ (X_j X_{j+1} Z_{j+2} + Z_j X_{j+1} X_{j+2})]`.
pub fn build_obrien_fendley(n: usize, lambda: f64) -> Result<LocalHamiltonian> {
    if !lambda.is_finite() {
        return domain("λ must be finite");
    }
    let (x, z) = (pauli::x(), pauli::z());
    let mut terms = vec![
        LocalTerm { support: 1, matrix: &z * faer::Scale(-1.0) },
        LocalTerm { support: 2, matrix: &pauli::kron(&x, &x) * faer::Scale(-1.0) },
    ];
    if lambda != 0.0 {
        let xxz = pauli::kron(&pauli::kron(&x, &x), &z);
        let zxx = pauli::kron(&pauli::kron(&z, &x), &x);
        terms.push(LocalTerm { support: 3, matrix: (&xxz + &zxx) * faer::Scale(lambda) });
    }
    LocalHamiltonian::new(n, terms, Symmetry::Parity)
}

/// Transverse-field Ising chain, the `λ = 0` point of [`build_obrien_fendley`].
pub fn build_ising(n: usize) -> Result<LocalHamiltonian> {
    build_obrien_fendley(n, 0.0)
}

/// `H = Σ_j (X_j X_{j+1} + Y_j Y_{j+1} + Δ Z_j Z_{j+1})`.
pub fn build_xxz(n: usize, delta: f64) -> Result<LocalHamiltonian> {
    check_delta(delta)?;
    let z = pauli::z();
    let m = pauli::xx_plus_yy() + pauli::kron(&z, &z) * faer::Scale(delta);
    LocalHamiltonian::new(n, vec![LocalTerm { support: 2, matrix: m }], Symmetry::Magnetization)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(-1.0..1.0).contains(&delta) {
        return domain(format!("Δ = {delta} outside [−1, 1)"));
    }
    Ok(())
}

/// Compactification radius `R = √(2π / arccos(−Δ))` of the XXZ chain.
pub fn radius(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok((2.0 * std::f64::consts::PI / (-delta).acos()).sqrt())
}

/// Ground energy of the critical transverse-field Ising ring `−Σ X X − Σ Z`
/// from its Jordan–Wigner solution (even fermion parity, antiperiodic modes).
pub fn free_fermion_ising_oracle(n: usize) -> Result<f64> {
    if n < 2 {
        return domain("oracle needs N ≥ 2");
    }
    let nf = n as f64;
    let sum: f64 = (0..n)
        .map(|m| (std::f64::consts::PI * (m as f64 + 0.5) / nf).sin().abs())
        .sum();
    Ok(-2.0 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(n: usize) -> Mat<f64> {
        Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `I ⊗ … ⊗ ops[0] at sites[0] ⊗ …` with site 0 leftmost.
    fn embed(n: usize, ops: &[(usize, Mat<f64>)]) -> Mat<f64> {
        let mut acc = Mat::from_fn(1, 1, |_, _| 1.0);
        for site in 0..n {
            let f = ops.iter().find(|(s, _)| *s == site).map(|(_, m)| m.clone()).unwrap_or(eye(2));
            acc = pauli::kron(&acc, &f);
        }
        acc
    }

    fn obf_kron_oracle(n: usize, lambda: f64) -> Mat<f64> {
        let (x, z) = (pauli::x(), pauli::z());
        let mut h = Mat::<f64>::zeros(1 << n, 1 << n);
        for j in 0..n {
            let (j1, j2) = ((j + 1) % n, (j + 2) % n);
            h -= embed(n, &[(j, x.clone()), (j1, x.clone())]);
            h -= embed(n, &[(j, z.clone())]);
            if lambda != 0.0 {
                h += embed(n, &[(j, x.clone()), (j1, x.clone()), (j2, z.clone())]) * faer::Scale(lambda);
                h += embed(n, &[(j, z.clone()), (j1, x.clone()), (j2, x.clone())]) * faer::Scale(lambda);
            }
        }
        h
    }

    #[test]
    fn obf_two_sites_by_hand() {
        let h = build_obrien_fendley(2, 0.0).unwrap().to_dense().unwrap();
        let (x, z) = (pauli::x(), pauli::z());
        let want = pauli::kron(&x, &x) * faer::Scale(-2.0)
            - pauli::kron(&z, &eye(2))
            - pauli::kron(&eye(2), &z);
        assert!((&h - &want).norm_max() < 1e-15);
    }

    #[test]
    fn obf_matches_kronecker_oracle() {
        for n in [3, 5, 8] {
            for lambda in [0.0, 0.3, 0.428, 0.6] {
                let h = build_obrien_fendley(n, lambda).unwrap().to_dense().unwrap();
                let want = obf_kron_oracle(n, lambda);
                assert!((&h - &want).norm_max() < 1e-12, "N={n} λ={lambda}");
            }
        }
    }

    #[test]
    fn xxz_matches_kronecker_oracle() {
        let (x, z) = (pauli::x(), pauli::z());
        let y_sq = |n: usize, a: usize, b: usize| {
            // Y_a Y_b = −(XZ)_a (XZ)_b with XZ = −iY
            let xz = &x * &z;
            embed(n, &[(a, xz.clone()), (b, xz)]) * faer::Scale(-1.0)
        };
        let n = 6;
        let delta = 0.37;
        let mut want = Mat::<f64>::zeros(1 << n, 1 << n);
        for j in 0..n {
            let k = (j + 1) % n;
            want += embed(n, &[(j, x.clone()), (k, x.clone())]);
            want += y_sq(n, j, k);
            want += embed(n, &[(j, z.clone()), (k, z.clone())]) * faer::Scale(delta);
        }
        let h = build_xxz(n, delta).unwrap().to_dense().unwrap();
        assert!((&h - &want).norm_max() < 1e-12);
    }

    #[test]
    fn radius_values() {
        assert!((radius(0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((radius(0.5).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((radius(-0.5).unwrap() - 6f64.sqrt()).abs() < 1e-12);
        assert!(radius(1.0).is_err() && radius(-1.5).is_err());
        assert!(build_xxz(6, 1.2).is_err());
    }

    #[test]
    fn oracle_two_sites_matches_dense() {
        let h = build_ising(2).unwrap().to_dense().unwrap();
        let w = h.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        let e0 = w.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((e0 - free_fermion_ising_oracle(2).unwrap()).abs() < 1e-12);
        assert!((e0 + 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oracle_energy_density_converges_to_minus_four_over_pi() {
        let target = -4.0 / std::f64::consts::PI;
        let mut prev = f64::INFINITY;
        for n in [4, 8, 16, 32, 64, 128, 256] {
            let e = free_fermion_ising_oracle(n).unwrap() / n as f64;
            let gap = (e - target).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn builders_are_symmetric_and_validated() {
        let bad = LocalTerm { support: 2, matrix: Mat::from_fn(4, 4, |i, j| (i * 4 + j) as f64) };
        assert!(LocalHamiltonian::new(4, vec![bad], Symmetry::None).is_err());
        let big = LocalTerm { support: 4, matrix: eye(16) };
        assert!(LocalHamiltonian::new(6, vec![big], Symmetry::None).is_err());
        assert!(build_obrien_fendley(1, 0.0).is_err());
        assert!(build_obrien_fendley(2, 0.3).is_err());
    }
}
