//! Dense pure states, density matrices and the entropic quantities built on them.
//!
//! A [`PureState`] is a normalised amplitude vector over an ordered list of
//! subsystems, stored row-major (the first subsystem is the slowest index).
//! All entropies are in nats.

mod reflected;

pub use reflected::{
    canonical_purification, canonical_purification_of, h_cmi_forms, h_measure, h_via_cmi,
    reflected_entropy, reflected_entropy_of,
};

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;

const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PureState {
    amps: Vec<c64>,
    dims: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl PureState {
    /// Builds a state, rejecting inconsistent dimensions or a norm off by more than 1e-12.
    pub fn new(amps: Vec<c64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&amps, &dims)?;
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return domain(format!("state norm² = {n2}, expected 1"));
        }
        Ok(Self { amps, dims, labels: None })
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(mut amps: Vec<c64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&amps, &dims)?;
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !n2.is_finite() || n2 <= 0.0 {
            return domain("cannot normalise a zero or non-finite vector");
        }
        let s = n2.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= s);
        Ok(Self { amps, dims, labels: None })
    }

    /// Product of single-subsystem basis states `|k_0 k_1 ...⟩`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(k, d)| k >= d) {
            return domain("basis digits out of range");
        }
        let total: usize = dims.iter().product();
        let mut amps = vec![linalg::ZERO; total];
        let idx = digits.iter().zip(&dims).fold(0, |acc, (k, d)| acc * d + k);
        amps[idx] = linalg::ONE;
        Self::new(amps, dims)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::Dimension("one label per subsystem".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.amps.iter().all(|a| a.im == 0.0)
    }

    pub fn inner(&self, other: &PureState) -> c64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Offsets into the amplitude vector for every multi-index over `set`, in
    /// row-major order of `set` as given.
    fn offsets(&self, set: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offs = vec![0usize];
        for &k in set {
            let d = self.dims[k];
            let st = strides[k];
            offs = offs.iter().flat_map(|&o| (0..d).map(move |x| o + x * st)).collect();
        }
        offs
    }

    /// Reshapes the amplitudes into a matrix whose rows run over `rows` (in the
    /// order given) and whose columns run over the remaining subsystems in
    /// their natural order.
    pub fn matricize(&self, rows: &[usize]) -> Result<Mat<c64>> {
        check_index_set(rows, self.dims.len(), true)?;
        let cols: Vec<usize> = (0..self.dims.len()).filter(|k| !rows.contains(k)).collect();
        let ro = self.offsets(rows);
        let co = self.offsets(&cols);
        Ok(Mat::from_fn(ro.len(), co.len(), |i, j| self.amps[ro[i] + co[j]]))
    }

    /// Permutes and merges subsystems: party `p` of the result is the ordered
    /// tensor product of `groups[p]`. Every subsystem must appear exactly once.
    pub fn regroup(&self, groups: &[Vec<usize>]) -> Result<PureState> {
        let order: Vec<usize> = groups.iter().flatten().copied().collect();
        check_index_set(&order, self.dims.len(), true)?;
        if order.len() != self.dims.len() {
            return domain("regroup must use every subsystem exactly once");
        }
        let offs = self.offsets(&order);
        let amps = offs.iter().map(|&o| self.amps[o]).collect();
        let dims = groups
            .iter()
            .map(|g| g.iter().map(|&k| self.dims[k]).product())
            .collect();
        Ok(PureState { amps, dims, labels: None })
    }

    /// Applies a `d_out × d_k` linear map to subsystem `k`. The result is not
    /// renormalised; use [`PureState::renormalized`] after non-isometric maps.
    pub fn apply_local(&self, k: usize, op: MatRef<'_, c64>) -> Result<PureState> {
        if k >= self.dims.len() || op.ncols() != self.dims[k] {
            return Err(Error::Dimension(format!(
                "operator with {} columns on subsystem {k} of dims {:?}",
                op.ncols(),
                self.dims
            )));
        }
        let d_in = self.dims[k];
        let d_out = op.nrows();
        let left: usize = self.dims[..k].iter().product();
        let right: usize = self.dims[k + 1..].iter().product();
        let mut out = vec![linalg::ZERO; left * d_out * right];
        for l in 0..left {
            for j in 0..d_in {
                let src = &self.amps[(l * d_in + j) * right..(l * d_in + j + 1) * right];
                for i in 0..d_out {
                    let m = op[(i, j)];
                    if m == linalg::ZERO {
                        continue;
                    }
                    let dst = &mut out[(l * d_out + i) * right..(l * d_out + i + 1) * right];
                    for (o, s) in dst.iter_mut().zip(src) {
                        *o += m * s;
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims[k] = d_out;
        Ok(PureState { amps: out, dims, labels: self.labels.clone() })
    }

    pub fn renormalized(self) -> Result<PureState> {
        PureState::normalized(self.amps, self.dims)
    }

    /// Entanglement entropy of the subsystems in `set` (empty or full sets give 0).
    pub fn subsystem_entropy(&self, set: &[usize]) -> Result<f64> {
        check_index_set(set, self.dims.len(), false)?;
        if set.is_empty() || set.len() == self.dims.len() {
            return Ok(0.0);
        }
        linalg::entanglement_entropy(self.matricize(set)?.as_ref())
    }
}

fn check_dims(amps: &[c64], dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension("subsystem dimensions must be positive".into()));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    if total != Some(amps.len()) {
        return Err(Error::Dimension(format!(
            "dims {dims:?} do not match {} amplitudes",
            amps.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_index_set(set: &[usize], n: usize, nonempty: bool) -> Result<()> {
    if nonempty && set.is_empty() {
        return domain("empty subsystem set");
    }
    for (i, &k) in set.iter().enumerate() {
        if k >= n {
            return domain(format!("subsystem {k} out of range (have {n})"));
        }
        if set[..i].contains(&k) {
            return domain(format!("subsystem {k} repeated"));
        }
    }
    Ok(())
}

/// A Hermitian, unit-trace, positive semidefinite operator on a list of subsystems.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Mat<c64>,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates hermiticity and trace to 1e-12. Positivity is checked where
    /// eigenvalues are computed anyway.
    pub fn new(matrix: Mat<c64>, dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_defect(matrix.as_ref());
        if herm > NORM_TOL {
            return domain(format!("matrix is not Hermitian (defect {herm:.2e})"));
        }
        let tr = linalg::trace(matrix.as_ref());
        if (tr - linalg::ONE).norm() > NORM_TOL {
            return domain(format!("trace {tr} differs from 1"));
        }
        Ok(Self { matrix, dims })
    }

    pub(crate) fn from_trusted(matrix: Mat<c64>, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full invariant check including the minimum eigenvalue ≥ −1e-10.
    pub fn validate(&self) -> Result<()> {
        let w = linalg::herm_eigvals(self.matrix.as_ref())?;
        match w.first() {
            Some(&m) if m < -1e-10 => domain(format!("negative eigenvalue {m:.3e}")),
            _ => Ok(()),
        }
    }
}

/// Partial trace of `|ψ⟩⟨ψ|` onto `keep` (kept subsystems ordered as given).
pub fn reduced_density(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    let m = state.matricize(keep)?;
    let rho = linalg::gram_rows(m.as_ref());
    let dims = keep.iter().map(|&k| state.dims()[k]).collect();
    Ok(DensityMatrix::from_trusted(rho, dims))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let herm = linalg::hermiticity_defect(rho.matrix());
    if herm > NORM_TOL {
        return domain(format!("matrix is not Hermitian (defect {herm:.2e})"));
    }
    let w = linalg::herm_eigvals(rho.matrix())?;
    Ok(linalg::entropy_of_spectrum(&w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

/// Assignment of every subsystem of a state to one of the parties A, B, C.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tripartition {
    assignment: Vec<Party>,
}

impl Tripartition {
    pub fn new(assignment: Vec<Party>) -> Result<Self> {
        for p in [Party::A, Party::B, Party::C] {
            if !assignment.contains(&p) {
                return domain(format!("party {p:?} is empty"));
            }
        }
        Ok(Self { assignment })
    }

    /// A tripartition of sites on a ring; every party must be one contiguous arc.
    pub fn ring(assignment: Vec<Party>) -> Result<Self> {
        let t = Self::new(assignment)?;
        if !t.is_ring_contiguous() {
            return domain("parties are not contiguous arcs of the ring");
        }
        Ok(t)
    }

    /// `n_a` sites of A, then `n_b` of B, then `n_c` of C.
    pub fn contiguous(n_a: usize, n_b: usize, n_c: usize) -> Result<Self> {
        let mut a = vec![Party::A; n_a];
        a.extend(std::iter::repeat_n(Party::B, n_b));
        a.extend(std::iter::repeat_n(Party::C, n_c));
        Self::new(a)
    }

    /// The trivial partition of a three-subsystem state.
    pub fn abc() -> Self {
        Self { assignment: vec![Party::A, Party::B, Party::C] }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[Party] {
        &self.assignment
    }

    pub fn sites(&self, p: Party) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == p).collect()
    }

    /// True when each party occupies a single arc of the ring.
    pub fn is_ring_contiguous(&self) -> bool {
        let n = self.assignment.len();
        let boundaries = (0..n)
            .filter(|&i| self.assignment[i] != self.assignment[(i + 1) % n])
            .count();
        boundaries <= 3
    }

    /// Relabels so that `first` becomes A and `second` becomes B.
    pub fn pairing(&self, first: Party, second: Party) -> Result<Self> {
        if first == second {
            return domain("pairing needs two distinct parties");
        }
        let map = |p: Party| {
            if p == first {
                Party::A
            } else if p == second {
                Party::B
            } else {
                Party::C
            }
        };
        Self::new(self.assignment.iter().map(|&p| map(p)).collect())
    }

    pub(crate) fn check_state(&self, state: &PureState) -> Result<()> {
        if self.assignment.len() != state.num_subsystems() {
            return Err(Error::Dimension(format!(
                "tripartition of {} subsystems applied to a state with {}",
                self.assignment.len(),
                state.num_subsystems()
            )));
        }
        Ok(())
    }
}

/// Entropies of the three parties and of AB, with I(A:B).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s_a: f64,
    pub s_b: f64,
    pub s_c: f64,
    pub s_ab: f64,
    pub i_ab: f64,
}

pub fn entropy_report(state: &PureState, part: &Tripartition) -> Result<EntropyReport> {
    part.check_state(state)?;
    let a = part.sites(Party::A);
    let b = part.sites(Party::B);
    let c = part.sites(Party::C);
    let s_a = state.subsystem_entropy(&a)?;
    let s_b = state.subsystem_entropy(&b)?;
    let s_c = state.subsystem_entropy(&c)?;
    // S_AB = S_C for a pure state.
    let s_ab = s_c;
    Ok(EntropyReport { s_a, s_b, s_c, s_ab, i_ab: s_a + s_b - s_ab })
}

pub fn mutual_information(state: &PureState, part: &Tripartition) -> Result<f64> {
    Ok(entropy_report(state, part)?.i_ab)
}

/// `I(X:Z|Y) = S_XY + S_YZ − S_XYZ − S_Y`.
pub fn conditional_mutual_information(
    state: &PureState,
    x: &[usize],
    y: &[usize],
    z: &[usize],
) -> Result<f64> {
    let n = state.num_subsystems();
    check_index_set(x, n, true)?;
    check_index_set(y, n, false)?;
    check_index_set(z, n, true)?;
    let xy: Vec<usize> = x.iter().chain(y).copied().collect();
    let yz: Vec<usize> = y.iter().chain(z).copied().collect();
    let xyz: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
    if check_index_set(&xyz, n, true).is_err() {
        return domain("conditional mutual information needs disjoint sets");
    }
    let sorted = |v: Vec<usize>| {
        let mut v = v;
        v.sort_unstable();
        v
    };
    let (xy, yz, xyz) = (sorted(xy), sorted(yz), sorted(xyz));
    Ok(state.subsystem_entropy(&xy)? + state.subsystem_entropy(&yz)?
        - state.subsystem_entropy(&xyz)?
        - state.subsystem_entropy(y)?)
}

/// Groups a state into its three parties, in order (A, B, C).
pub fn to_three_party(state: &PureState, part: &Tripartition) -> Result<PureState> {
    part.check_state(state)?;
    state.regroup(&[part.sites(Party::A), part.sites(Party::B), part.sites(Party::C)])
}

/// `ρ_AB` with dims `[d_A, d_B]`, A-sites then B-sites.
pub fn rho_ab(state: &PureState, part: &Tripartition) -> Result<DensityMatrix> {
    let s3 = to_three_party(state, part)?;
    let rho = reduced_density(&s3, &[0, 1])?;
    Ok(rho)
}
