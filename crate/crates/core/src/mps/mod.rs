//! Periodic uniform MPS and the transfer-matrix coarse-graining chain.
//!
//! A ring of `N` copies of `M_s` (each `D × D`) is blocked into regions of `n`
//! sites by diagonalising the regrouped `n`-th power of the transfer matrix
//! `T = Σ_s M_s ⊗ M̄_s`. The blocked tensors are then truncated onto their
//! leading Schmidt vectors and reassembled into a three-site ring.

pub mod io;
mod pumps;

pub use pumps::{pumps_energy, pumps_optimize, PumpsOptions, PumpsResult};

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::qstate::PureState;

/// Largest dense export (amplitudes) attempted by [`UniformMPS::to_dense`].
pub const MAX_DENSE_AMPLITUDES: usize = 1 << 24;

#[derive(Clone, Debug)]
pub struct UniformMPS {
    mats: Vec<Mat<c64>>,
    n_sites: usize,
}

impl UniformMPS {
    /// `mats[s]` is the `D × D` matrix for physical index `s`.
    pub fn new(mats: Vec<Mat<c64>>, n_sites: usize) -> Result<Self> {
        if mats.is_empty() {
            return domain("MPS needs a nonzero physical dimension");
        }
        let d = mats[0].nrows();
        if d == 0 || mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::Dimension("all MPS matrices must be D × D".into()));
        }
        if mats.iter().any(|m| {
            (0..d).any(|j| (0..d).any(|i| !m[(i, j)].re.is_finite() || !m[(i, j)].im.is_finite()))
        }) {
            return domain("MPS tensor has non-finite entries");
        }
        if n_sites < 3 {
            return domain("uniform MPS needs at least 3 sites");
        }
        Ok(Self { mats, n_sites })
    }

    pub fn random<R: Rng + ?Sized>(d: usize, bond: usize, n_sites: usize, rng: &mut R) -> Result<Self> {
        let mats = (0..d)
            .map(|_| {
                Mat::from_fn(bond, bond, |_, _| {
                    c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            })
            .collect();
        Self::new(mats, n_sites)
    }

    /// `M_0 = diag(1, 0)`, `M_1 = diag(0, 1)`.
    pub fn ghz(n_sites: usize) -> Result<Self> {
        let m0 = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { linalg::ONE } else { linalg::ZERO });
        let m1 = Mat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { linalg::ONE } else { linalg::ZERO });
        Self::new(vec![m0, m1], n_sites)
    }

    pub fn mats(&self) -> &[Mat<c64>] {
        &self.mats
    }

    pub fn phys_dim(&self) -> usize {
        self.mats.len()
    }

    pub fn bond_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn with_sites(&self, n_sites: usize) -> Result<Self> {
        Self::new(self.mats.clone(), n_sites)
    }

    /// Entry `M[s, α, β]`.
    pub fn entry(&self, s: usize, a: usize, b: usize) -> c64 {
        self.mats[s][(a, b)]
    }

    /// Dense state `ψ(s_1…s_N) = Tr(M_{s_1}⋯M_{s_N})`, normalised, one subsystem per site.
    pub fn to_dense(&self) -> Result<PureState> {
        let d = self.phys_dim();
        let total = d
            .checked_pow(self.n_sites as u32)
            .filter(|&t| t <= MAX_DENSE_AMPLITUDES)
            .ok_or_else(|| Error::Domain("dense export too large".into()))?;
        // prefix products for the first N−1 sites, then close with a trace
        let mut prefix: Vec<Mat<c64>> = self.mats.clone();
        for _ in 1..self.n_sites - 1 {
            let mut next = Vec::with_capacity(prefix.len() * d);
            for p in &prefix {
                for m in &self.mats {
                    next.push(p * m);
                }
            }
            prefix = next;
        }
        let bond = self.bond_dim();
        let mut amps = Vec::with_capacity(total);
        for p in &prefix {
            for m in &self.mats {
                let mut t = linalg::ZERO;
                for i in 0..bond {
                    for k in 0..bond {
                        t += p[(i, k)] * m[(k, i)];
                    }
                }
                amps.push(t);
            }
        }
        PureState::normalized(amps, vec![d; self.n_sites])
    }
}

/// `T_{(αγ),(βδ)} = Σ_s M_s[α,β] M̄_s[γ,δ]`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    mat: Mat<c64>,
    bond: usize,
}

impl TransferMatrix {
    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn bond_dim(&self) -> usize {
        self.bond
    }

    /// Entry `T[α, β, γ, δ]` in the natural four-index labelling.
    pub fn entry(&self, a: usize, b: usize, g: usize, d: usize) -> c64 {
        self.mat[(a * self.bond + g, b * self.bond + d)]
    }

    pub fn power(&self, n: usize) -> Mat<c64> {
        let mut acc = self.mat.clone();
        for _ in 1..n {
            acc = &acc * &self.mat;
        }
        acc
    }
}

pub fn transfer_matrix(mps: &UniformMPS) -> TransferMatrix {
    let bond = mps.bond_dim();
    let mut t = Mat::<c64>::zeros(bond * bond, bond * bond);
    for m in mps.mats() {
        let mc = Mat::from_fn(bond, bond, |i, j| m[(i, j)].conj());
        t += linalg::kron(m.as_ref(), mc.as_ref());
    }
    TransferMatrix { mat: t, bond }
}

/// `Σ_S M_S ⊗ M̄_S` for any list of `D × D` matrices, in the `(αγ),(βδ)` grouping.
pub fn transfer_of(mats: &[Mat<c64>]) -> Mat<c64> {
    let bond = mats.first().map_or(0, |m| m.nrows());
    let mut t = Mat::<c64>::zeros(bond * bond, bond * bond);
    for m in mats {
        let mc = Mat::from_fn(bond, bond, |i, j| m[(i, j)].conj());
        t += linalg::kron(m.as_ref(), mc.as_ref());
    }
    t
}

/// Blocked tensor `M⁽ⁿ⁾_S = √λ_S U_S` for `n` contiguous sites.
#[derive(Clone, Debug)]
pub struct CoarseTensor {
    mats: Vec<Mat<c64>>,
    n: usize,
    eigenvalues: Vec<f64>,
}

impl CoarseTensor {
    pub fn mats(&self) -> &[Mat<c64>] {
        &self.mats
    }

    pub fn phys_dim(&self) -> usize {
        self.mats.len()
    }

    pub fn bond_dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.nrows())
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    /// Retained eigenvalues of the regrouped `Tⁿ`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Σ_S M_S ⊗ M̄_S`, which equals `Tⁿ` up to the truncation.
    pub fn reconstruct_transfer(&self) -> Mat<c64> {
        transfer_of(&self.mats)
    }

    /// The tensor of the concatenated region: `M_{(S,S')} = M_S M'_{S'}`.
    pub fn join(&self, other: &CoarseTensor) -> CoarseTensor {
        let mut mats = Vec::with_capacity(self.mats.len() * other.mats.len());
        for a in &self.mats {
            for b in &other.mats {
                mats.push(a * b);
            }
        }
        CoarseTensor { mats, n: self.n + other.n, eigenvalues: Vec::new() }
    }
}

fn regroup_transfer(tn: MatRef<'_, c64>, bond: usize) -> Mat<c64> {
    // R[(α,β),(γ,δ)] = Tⁿ[(α,γ),(β,δ)]
    Mat::from_fn(bond * bond, bond * bond, |r, c| {
        let (a, b) = (r / bond, r % bond);
        let (g, d) = (c / bond, c % bond);
        tn[(a * bond + g, b * bond + d)]
    })
}

/// Relative threshold below which eigenvalues of the regrouped `Tⁿ` are dropped.
const COARSE_FLOOR: f64 = 1e-12;

pub fn coarse_grain(t: &TransferMatrix, n: usize) -> Result<CoarseTensor> {
    if n == 0 {
        return domain("coarse-graining needs n ≥ 1");
    }
    let bond = t.bond;
    let tn = t.power(n);
    let mut r = regroup_transfer(tn.as_ref(), bond);
    // symmetrise away rounding before the Hermitian solve
    let sz = r.nrows();
    for j in 0..sz {
        for i in 0..j {
            let avg = (r[(i, j)] + r[(j, i)].conj()) * 0.5;
            r[(i, j)] = avg;
            r[(j, i)] = avg.conj();
        }
        r[(j, j)] = c64::new(r[(j, j)].re, 0.0);
    }
    let (w, u) = linalg::herm_eigh(r.as_ref())?;
    let top = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if top == 0.0 {
        return domain("transfer matrix power vanishes");
    }
    if let Some(&lo) = w.first() {
        if lo < -1e-10 * top.max(1.0) {
            return domain(format!(
                "regrouped transfer matrix has eigenvalue {lo:.3e}: not positive"
            ));
        }
    }
    let mut order: Vec<usize> = (0..w.len()).filter(|&k| w[k] > COARSE_FLOOR * top).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    let mats = order
        .iter()
        .map(|&k| {
            let s = w[k].sqrt();
            Mat::from_fn(bond, bond, |a, b| u[(a * bond + b, k)] * s)
        })
        .collect();
    Ok(CoarseTensor { mats, n, eigenvalues: order.iter().map(|&k| w[k]).collect() })
}

/// Schmidt data of the two-region ring `Σ_{αβ} M^a_{S_a αβ} M^b_{S_b βα}`.
#[derive(Clone, Debug)]
pub struct BipartiteSchmidt {
    /// Schmidt values `λ_j`, descending, `Σ λ_j² = 1`.
    pub values: Vec<f64>,
    /// Left Schmidt vectors as columns (`d_a × r`).
    pub left: Mat<c64>,
    pub entropy: f64,
}

fn ring_pair_matrix(ma: &[Mat<c64>], mb: &[Mat<c64>]) -> Mat<c64> {
    Mat::from_fn(ma.len(), mb.len(), |i, j| {
        let (a, b) = (&ma[i], &mb[j]);
        let bond = a.nrows();
        let mut t = linalg::ZERO;
        for x in 0..bond {
            for y in 0..bond {
                t += a[(x, y)] * b[(y, x)];
            }
        }
        t
    })
}

pub fn schmidt_bipartite(ma: &CoarseTensor, mb: &CoarseTensor) -> Result<BipartiteSchmidt> {
    if ma.bond_dim() != mb.bond_dim() {
        return Err(Error::Dimension("bond dimensions differ".into()));
    }
    let psi = ring_pair_matrix(&ma.mats, &mb.mats);
    let nrm = psi.norm_l2();
    if nrm == 0.0 {
        return domain("two-region contraction vanishes");
    }
    let (u, s, _) = linalg::thin_svd(psi.as_ref())?;
    let values: Vec<f64> = s.iter().map(|x| x / nrm).collect();
    let probs: Vec<f64> = values.iter().map(|x| x * x).collect();
    Ok(BipartiteSchmidt { entropy: linalg::entropy_of_spectrum(&probs), values, left: u })
}

/// Physical-dimension truncation rule: keep Schmidt values `> epsilon`, at most `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub epsilon: f64,
    pub cap: Option<usize>,
}

impl Truncation {
    pub fn exact() -> Self {
        Self { epsilon: 0.0, cap: None }
    }

    pub fn threshold(epsilon: f64) -> Self {
        Self { epsilon, cap: None }
    }

    pub fn capped(cap: usize, epsilon: f64) -> Self {
        Self { epsilon, cap: Some(cap) }
    }
}

/// A blocked tensor projected onto its retained Schmidt vectors.
#[derive(Clone, Debug)]
pub struct TruncatedTensor {
    pub tensor: CoarseTensor,
    pub discarded_weight: f64,
}

pub fn truncate_physical(
    mn: &CoarseTensor,
    schmidt: &BipartiteSchmidt,
    rule: Truncation,
) -> Result<TruncatedTensor> {
    if schmidt.left.nrows() != mn.phys_dim() {
        return Err(Error::Dimension("Schmidt vectors do not match the tensor".into()));
    }
    let mut keep: Vec<usize> = (0..schmidt.values.len())
        .filter(|&j| schmidt.values[j] > rule.epsilon)
        .collect();
    if let Some(cap) = rule.cap {
        keep.truncate(cap.max(1));
    }
    let discarded_weight: f64 = (0..schmidt.values.len())
        .filter(|j| !keep.contains(j))
        .map(|j| schmidt.values[j] * schmidt.values[j])
        .sum();
    let bond = mn.bond_dim();
    let mats = keep
        .iter()
        .map(|&j| {
            let mut acc = Mat::<c64>::zeros(bond, bond);
            for (s, m) in mn.mats.iter().enumerate() {
                let w = schmidt.left[(s, j)].conj();
                if w != linalg::ZERO {
                    acc += m * faer::Scale(w);
                }
            }
            acc
        })
        .collect();
    Ok(TruncatedTensor {
        tensor: CoarseTensor { mats, n: mn.n, eigenvalues: Vec::new() },
        discarded_weight,
    })
}

/// Three truncated region tensors forming a three-site ring.
#[derive(Clone, Debug)]
pub struct CoarseTripartite {
    pub tensors: [CoarseTensor; 3],
    pub discarded: [f64; 3],
    pub truncation: [Truncation; 3],
}

impl CoarseTripartite {
    pub fn phys_dims(&self) -> [usize; 3] {
        [self.tensors[0].phys_dim(), self.tensors[1].phys_dim(), self.tensors[2].phys_dim()]
    }

    pub fn total_discarded(&self) -> f64 {
        self.discarded.iter().sum()
    }
}

pub fn assemble_tripartite(
    ma: TruncatedTensor,
    mb: TruncatedTensor,
    mc: TruncatedTensor,
    truncation: [Truncation; 3],
) -> Result<CoarseTripartite> {
    let bond = ma.tensor.bond_dim();
    if mb.tensor.bond_dim() != bond || mc.tensor.bond_dim() != bond {
        return Err(Error::Dimension("bond dimensions differ between regions".into()));
    }
    Ok(CoarseTripartite {
        discarded: [ma.discarded_weight, mb.discarded_weight, mc.discarded_weight],
        tensors: [ma.tensor, mb.tensor, mc.tensor],
        truncation,
    })
}

/// Dense `ψ[a,b,c] = Tr(M^A_a M^B_b M^C_c)`, renormalised.
pub fn dense_export(tri: &CoarseTripartite) -> Result<PureState> {
    let [ta, tb, tc] = &tri.tensors;
    let (da, db, dc) = (ta.phys_dim(), tb.phys_dim(), tc.phys_dim());
    let mut amps = vec![linalg::ZERO; da * db * dc];
    for a in 0..da {
        for b in 0..db {
            let ab = &ta.mats[a] * &tb.mats[b];
            let block = ring_pair_matrix(std::slice::from_ref(&ab), &tc.mats);
            for c in 0..dc {
                amps[(a * db + b) * dc + c] = block[(0, c)];
            }
        }
    }
    PureState::normalized(amps, vec![da, db, dc])
}

/// The full chain for a contiguous tripartition `(n_a, n_b, n_c)` of the ring:
/// block each region, truncate it against its complement, and assemble.
pub fn coarse_tripartite(
    mps: &UniformMPS,
    sizes: [usize; 3],
    rules: [Truncation; 3],
) -> Result<CoarseTripartite> {
    let n: usize = sizes.iter().sum();
    if n != mps.n_sites() || sizes.contains(&0) {
        return domain(format!(
            "region sizes {sizes:?} do not tile a ring of {} sites",
            mps.n_sites()
        ));
    }
    let t = transfer_matrix(mps);
    let mut out = Vec::with_capacity(3);
    for (k, &nk) in sizes.iter().enumerate() {
        let region = coarse_grain(&t, nk)?;
        let rest = coarse_grain(&t, n - nk)?;
        let schmidt = schmidt_bipartite(&region, &rest)?;
        out.push(truncate_physical(&region, &schmidt, rules[k])?);
    }
    let mc = out.pop().expect("three regions");
    let mb = out.pop().expect("three regions");
    let ma = out.pop().expect("three regions");
    assemble_tripartite(ma, mb, mc, rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{entropy_report, Tripartition};
    use crate::zoo::{self, FixedPointSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    /// Nested-loop oracle for T[α,β,γ,δ].
    fn brute_transfer(mps: &UniformMPS, a: usize, b: usize, g: usize, d: usize) -> c64 {
        (0..mps.phys_dim()).map(|s| mps.entry(s, a, b) * mps.entry(s, g, d).conj()).sum()
    }

    #[test]
    fn transfer_matrix_of_product_state_is_scalar() {
        let m = Mat::from_fn(1, 1, |_, _| c64::new(0.6, 0.0));
        let m2 = Mat::from_fn(1, 1, |_, _| c64::new(0.0, 0.8));
        let mps = UniformMPS::new(vec![m, m2], 4).unwrap();
        let t = transfer_matrix(&mps);
        assert!((t.matrix()[(0, 0)] - linalg::ONE).norm() < 1e-15);
    }

    #[test]
    fn transfer_matrix_matches_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mps = UniformMPS::random(3, 3, 5, &mut rng).unwrap();
        let t = transfer_matrix(&mps);
        for a in 0..3 {
            for b in 0..3 {
                for g in 0..3 {
                    for d in 0..3 {
                        let want = brute_transfer(&mps, a, b, g, d);
                        assert!((t.entry(a, b, g, d) - want).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn ghz_transfer_matrix_has_two_unit_eigenvalues() {
        let mps = UniformMPS::ghz(6).unwrap();
        let t = transfer_matrix(&mps);
        let r = regroup_transfer(t.matrix(), 2);
        let w = linalg::herm_eigvals(r.as_ref()).unwrap();
        let ones = w.iter().filter(|x| (*x - 1.0).abs() < 1e-12).count();
        let zeros = w.iter().filter(|x| x.abs() < 1e-12).count();
        assert_eq!((ones, zeros), (2, 2));
    }

    #[test]
    fn coarse_grain_dimensions() {
        let m = Mat::from_fn(1, 1, |_, _| linalg::ONE);
        let z = Mat::from_fn(1, 1, |_, _| linalg::ZERO);
        let prod = UniformMPS::new(vec![m, z], 6).unwrap();
        let t = transfer_matrix(&prod);
        for n in 1..5 {
            assert_eq!(coarse_grain(&t, n).unwrap().phys_dim(), 1);
        }
        let ghz = UniformMPS::ghz(6).unwrap();
        let tg = transfer_matrix(&ghz);
        for n in 1..5 {
            assert_eq!(coarse_grain(&tg, n).unwrap().phys_dim(), 2);
        }
        assert!(coarse_grain(&tg, 0).is_err());
    }

    #[test]
    fn coarse_dimension_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (d, bond) in [(2, 3), (3, 2), (2, 2)] {
            let mps = UniformMPS::random(d, bond, 8, &mut rng).unwrap();
            let t = transfer_matrix(&mps);
            for n in 1..6 {
                let c = coarse_grain(&t, n).unwrap();
                assert!(c.phys_dim() <= (bond * bond).min(d.pow(n as u32)));
            }
        }
    }

    #[test]
    fn coarse_tensor_reconstructs_power_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mps = UniformMPS::random(2, 3, 9, &mut rng).unwrap();
        let t = transfer_matrix(&mps);
        let (m, n) = (2, 3);
        let cm = coarse_grain(&t, m).unwrap();
        let cn = coarse_grain(&t, n).unwrap();
        let cmn = coarse_grain(&t, m + n).unwrap();
        let joined = cm.join(&cn).reconstruct_transfer();
        let direct = cmn.reconstruct_transfer();
        let exact = t.power(m + n);
        let scale = exact.norm_l2();
        assert!((&joined - &exact).norm_l2() / scale < 1e-10);
        assert!((&direct - &exact).norm_l2() / scale < 1e-10);
    }

    #[test]
    fn ghz_schmidt_spectrum() {
        let mps = UniformMPS::ghz(6).unwrap();
        let t = transfer_matrix(&mps);
        let a = coarse_grain(&t, 2).unwrap();
        let b = coarse_grain(&t, 4).unwrap();
        let s = schmidt_bipartite(&a, &b).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.values[0] - h).abs() < 1e-12 && (s.values[1] - h).abs() < 1e-12);
        assert!((s.entropy - LN_2).abs() < 1e-12);

        let trunc = truncate_physical(&a, &s, Truncation::threshold(0.1)).unwrap();
        assert_eq!(trunc.tensor.phys_dim(), 2);
        assert!(trunc.discarded_weight < 1e-14);
    }

    #[test]
    fn product_schmidt_spectrum_is_trivial() {
        let m = Mat::from_fn(1, 1, |_, _| c64::new(0.6, 0.0));
        let m2 = Mat::from_fn(1, 1, |_, _| c64::new(0.8, 0.0));
        let prod = UniformMPS::new(vec![m, m2], 5).unwrap();
        let t = transfer_matrix(&prod);
        let s = schmidt_bipartite(&coarse_grain(&t, 2).unwrap(), &coarse_grain(&t, 3).unwrap()).unwrap();
        assert_eq!(s.values.len(), 1);
        assert!((s.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_pipeline_preserves_entropies() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mps = UniformMPS::random(2, 2, 9, &mut rng).unwrap();
        let dense = mps.to_dense().unwrap();
        let part = Tripartition::contiguous(3, 3, 3).unwrap();
        let want = entropy_report(&dense, &part).unwrap();
        let tri = coarse_tripartite(&mps, [3, 3, 3], [Truncation::exact(); 3]).unwrap();
        let got = entropy_report(&dense_export(&tri).unwrap(), &Tripartition::abc()).unwrap();
        assert!((want.s_a - got.s_a).abs() < 1e-9);
        assert!((want.s_b - got.s_b).abs() < 1e-9);
        assert!((want.s_c - got.s_c).abs() < 1e-9);
    }

    #[test]
    fn ghz_pipeline_gives_ghz() {
        let mps = UniformMPS::ghz(9).unwrap();
        let tri = coarse_tripartite(&mps, [3, 3, 3], [Truncation::exact(); 3]).unwrap();
        let psi = dense_export(&tri).unwrap();
        assert_eq!(psi.dims(), &[2, 2, 2]);
        let r = entropy_report(&psi, &Tripartition::abc()).unwrap();
        assert!((r.s_a - LN_2).abs() < 1e-12 && (r.i_ab - LN_2).abs() < 1e-12);
        // two orthogonal product branches with equal weight
        let nz: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).filter(|&p| p > 1e-12).collect();
        assert_eq!(nz.len(), 2);
        assert!(nz.iter().all(|p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn fixed_point_is_invariant_under_blocking() {
        let mps = zoo::make_fixed_point_mps(&FixedPointSpec::injective(vec![0.6, 0.4]), 6).unwrap();
        let t = transfer_matrix(&mps);
        for n in 1..5 {
            let c = coarse_grain(&t, n).unwrap();
            let diff = &c.reconstruct_transfer() - t.matrix();
            assert!(diff.norm_l2() < 1e-10);
            assert_eq!(c.phys_dim(), 4);
        }
    }
}
