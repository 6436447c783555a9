//! Generators for states with known tripartite structure: GHZ, W, triangle
//! states, sums of triangle states (SOTS) and fixed-point MPS.
//!
//! A triangle state factorises as `|ψ⟩_{A_R B_L} |ψ⟩_{B_R C_L} |ψ⟩_{C_R A_L}`
//! after splitting each party as `X = X_L ⊗ X_R`; a SOTS is a superposition of
//! triangle states living in mutually orthogonal blocks of every party.

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::mps::UniformMPS;
use crate::qstate::{conditional_mutual_information, PureState};

const SPECTRUM_TOL: f64 = 1e-12;

pub fn make_ghz(d: usize) -> Result<PureState> {
    if d == 0 {
        return domain("GHZ needs d ≥ 1");
    }
    let mut amps = vec![linalg::ZERO; d * d * d];
    let a = c64::new((d as f64).sqrt().recip(), 0.0);
    for j in 0..d {
        amps[(j * d + j) * d + j] = a;
    }
    PureState::new(amps, vec![d, d, d])
}

/// GHZ state of `n` parties with local dimension `d`.
pub fn make_ghz_n(d: usize, n: usize) -> Result<PureState> {
    if d == 0 || n == 0 {
        return domain("GHZ needs d, n ≥ 1");
    }
    let total = d.checked_pow(n as u32).ok_or_else(|| Error::Domain("GHZ too large".into()))?;
    let mut amps = vec![linalg::ZERO; total];
    let a = c64::new((d as f64).sqrt().recip(), 0.0);
    for j in 0..d {
        let idx = (0..n).fold(0, |acc, _| acc * d + j);
        amps[idx] = a;
    }
    PureState::new(amps, vec![d; n])
}

/// `(|100⟩ + |010⟩ + |001⟩)/√3`.
pub fn make_w() -> PureState {
    let mut amps = vec![linalg::ZERO; 8];
    let a = c64::new(3f64.sqrt().recip(), 0.0);
    for idx in [4, 2, 1] {
        amps[idx] = a;
    }
    PureState::new(amps, vec![2, 2, 2]).expect("W state is normalised")
}

/// Single-excitation W state on `n` qubits.
pub fn make_w_n(n: usize) -> Result<PureState> {
    if !(2..=24).contains(&n) {
        return domain("W state needs 2 ≤ n ≤ 24 qubits");
    }
    let mut amps = vec![linalg::ZERO; 1 << n];
    let a = c64::new((n as f64).sqrt().recip(), 0.0);
    for k in 0..n {
        amps[1 << k] = a;
    }
    PureState::new(amps, vec![2; n])
}

/// A bipartite pure state `Σ_i √λ_i |i⟩|i⟩` on `left_dim × right_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteFactor {
    pub spectrum: Vec<f64>,
    pub left_dim: usize,
    pub right_dim: usize,
}

impl BipartiteFactor {
    pub fn new(spectrum: Vec<f64>, left_dim: usize, right_dim: usize) -> Result<Self> {
        let f = Self { spectrum, left_dim, right_dim };
        f.validate()?;
        Ok(f)
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        Self { spectrum: vec![0.5, 0.5], left_dim: 2, right_dim: 2 }
    }

    pub fn trivial() -> Self {
        Self { spectrum: vec![1.0], left_dim: 1, right_dim: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.left_dim == 0 || self.right_dim == 0 {
            return domain("factor dimensions must be positive");
        }
        if self.spectrum.len() > self.left_dim.min(self.right_dim) {
            return domain("Schmidt rank exceeds factor dimensions");
        }
        if self.spectrum.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return domain("spectrum entries must be nonnegative");
        }
        let total: f64 = self.spectrum.iter().sum();
        if (total - 1.0).abs() > SPECTRUM_TOL {
            return domain(format!("spectrum sums to {total}, expected 1"));
        }
        Ok(())
    }

    fn amplitude(&self, l: usize, r: usize) -> f64 {
        if l == r && l < self.spectrum.len() {
            self.spectrum[l].sqrt()
        } else {
            0.0
        }
    }

    pub fn entropy(&self) -> f64 {
        linalg::entropy_of_spectrum(&self.spectrum)
    }

    fn random<R: Rng + ?Sized>(rng: &mut R, max_leg: usize) -> Self {
        let left_dim = rng.random_range(1..=max_leg);
        let right_dim = rng.random_range(1..=max_leg);
        let rank = left_dim.min(right_dim);
        let raw: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        Self { spectrum: raw.iter().map(|x| x / total).collect(), left_dim, right_dim }
    }
}

/// Three bipartite factors `A_R–B_L`, `B_R–C_L`, `C_R–A_L`. Each party is
/// ordered `(X_L, X_R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleSpec {
    pub ab: BipartiteFactor,
    pub bc: BipartiteFactor,
    pub ca: BipartiteFactor,
    /// Apply a Haar-random unitary to each party after assembly.
    pub scramble: bool,
}

impl TriangleSpec {
    pub fn bell_pairs() -> Self {
        Self {
            ab: BipartiteFactor::bell(),
            bc: BipartiteFactor::bell(),
            ca: BipartiteFactor::bell(),
            scramble: false,
        }
    }

    pub fn trivial() -> Self {
        Self {
            ab: BipartiteFactor::trivial(),
            bc: BipartiteFactor::trivial(),
            ca: BipartiteFactor::trivial(),
            scramble: false,
        }
    }

    /// Random factors with leg dimensions in `1..=max_leg`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_leg: usize, scramble: bool) -> Self {
        Self {
            ab: BipartiteFactor::random(rng, max_leg),
            bc: BipartiteFactor::random(rng, max_leg),
            ca: BipartiteFactor::random(rng, max_leg),
            scramble,
        }
    }

    /// `(d_A, d_B, d_C)`.
    pub fn party_dims(&self) -> [usize; 3] {
        [
            self.ca.right_dim * self.ab.left_dim,
            self.ab.right_dim * self.bc.left_dim,
            self.bc.right_dim * self.ca.left_dim,
        ]
    }

    fn validate(&self) -> Result<()> {
        self.ab.validate()?;
        self.bc.validate()?;
        self.ca.validate()
    }

    /// Unscrambled amplitudes on `(d_A, d_B, d_C)`.
    fn raw_amplitudes(&self) -> Vec<c64> {
        let (a_l, a_r) = (self.ca.right_dim, self.ab.left_dim);
        let (b_l, b_r) = (self.ab.right_dim, self.bc.left_dim);
        let (c_l, c_r) = (self.bc.right_dim, self.ca.left_dim);
        let [da, db, dc] = self.party_dims();
        let mut amps = vec![linalg::ZERO; da * db * dc];
        for al in 0..a_l {
            for ar in 0..a_r {
                for bl in 0..b_l {
                    let f_ab = self.ab.amplitude(ar, bl);
                    if f_ab == 0.0 {
                        continue;
                    }
                    for br in 0..b_r {
                        for cl in 0..c_l {
                            let f_bc = self.bc.amplitude(br, cl);
                            if f_bc == 0.0 {
                                continue;
                            }
                            for cr in 0..c_r {
                                let f_ca = self.ca.amplitude(cr, al);
                                if f_ca == 0.0 {
                                    continue;
                                }
                                let a = al * a_r + ar;
                                let b = bl * b_r + br;
                                let c = cl * c_r + cr;
                                amps[(a * db + b) * dc + c] = c64::new(f_ab * f_bc * f_ca, 0.0);
                            }
                        }
                    }
                }
            }
        }
        amps
    }
}

fn scramble_parties(state: PureState, rng: &mut ChaCha8Rng) -> Result<PureState> {
    let mut s = state;
    for k in 0..s.num_subsystems() {
        let u = linalg::haar_unitary(s.dims()[k], rng);
        s = s.apply_local(k, u.as_ref())?;
    }
    Ok(s)
}

pub fn make_triangle(spec: &TriangleSpec, seed: u64) -> Result<PureState> {
    spec.validate()?;
    let state = PureState::normalized(spec.raw_amplitudes(), spec.party_dims().to_vec())?;
    if spec.scramble {
        scramble_parties(state, &mut ChaCha8Rng::seed_from_u64(seed))
    } else {
        Ok(state)
    }
}

/// Three Bell pairs shared pairwise between A, B and C (each party is 4-dimensional).
pub fn bell_triangle() -> PureState {
    make_triangle(&TriangleSpec::bell_pairs(), 0).expect("valid spec")
}

/// Weighted orthogonal-block superposition of triangle states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SotsSpec {
    pub weights: Vec<f64>,
    pub blocks: Vec<TriangleSpec>,
    /// Per-block offsets of the block subspace inside each party. Defaults to
    /// stacking the blocks.
    pub offsets: Option<Vec<[usize; 3]>>,
    /// Total party dimensions; defaults to the smallest that fits the blocks.
    pub party_dims: Option<[usize; 3]>,
    pub scramble: bool,
}

impl SotsSpec {
    /// GHZ_d as a SOTS: `d` trivial blocks with `p_j = 1/d`.
    pub fn ghz(d: usize) -> Self {
        Self {
            weights: vec![1.0 / d as f64; d],
            blocks: vec![TriangleSpec::trivial(); d],
            offsets: None,
            party_dims: None,
            scramble: false,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_blocks: usize, max_leg: usize) -> Self {
        let raw: Vec<f64> = (0..n_blocks).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        Self {
            weights: raw.iter().map(|x| x / total).collect(),
            blocks: (0..n_blocks).map(|_| TriangleSpec::random(rng, max_leg, true)).collect(),
            offsets: None,
            party_dims: None,
            scramble: true,
        }
    }

    fn layout(&self) -> Result<(Vec<[usize; 3]>, [usize; 3])> {
        if self.weights.len() != self.blocks.len() || self.blocks.is_empty() {
            return domain("need one weight per block and at least one block");
        }
        if self.weights.iter().any(|&p| p < 0.0) {
            return domain("block weights must be nonnegative");
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > SPECTRUM_TOL {
            return domain(format!("block weights sum to {total}, expected 1"));
        }
        let sizes: Vec<[usize; 3]> = self.blocks.iter().map(|b| b.party_dims()).collect();
        let offsets = match &self.offsets {
            Some(o) => {
                if o.len() != self.blocks.len() {
                    return domain("one offset triple per block");
                }
                o.clone()
            }
            None => {
                let mut acc = [0usize; 3];
                sizes
                    .iter()
                    .map(|s| {
                        let here = acc;
                        for p in 0..3 {
                            acc[p] += s[p];
                        }
                        here
                    })
                    .collect()
            }
        };
        let needed = (0..3)
            .map(|p| offsets.iter().zip(&sizes).map(|(o, s)| o[p] + s[p]).max().unwrap_or(0))
            .collect::<Vec<_>>();
        let dims = self.party_dims.unwrap_or([needed[0], needed[1], needed[2]]);
        for p in 0..3 {
            if needed[p] > dims[p] {
                return domain(format!("blocks overflow party {p} of dimension {}", dims[p]));
            }
            for i in 0..offsets.len() {
                for j in 0..i {
                    let (a0, a1) = (offsets[i][p], offsets[i][p] + sizes[i][p]);
                    let (b0, b1) = (offsets[j][p], offsets[j][p] + sizes[j][p]);
                    if a0 < b1 && b0 < a1 {
                        return domain(format!(
                            "blocks {j} and {i} overlap in party {p}: embedding is not orthogonal"
                        ));
                    }
                }
            }
        }
        Ok((offsets, dims))
    }
}

pub fn make_sots(spec: &SotsSpec, seed: u64) -> Result<PureState> {
    let (offsets, dims) = spec.layout()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [da, db, dc] = dims;
    let mut amps = vec![linalg::ZERO; da * db * dc];
    for ((block, &p), off) in spec.blocks.iter().zip(&spec.weights).zip(&offsets) {
        let tri = make_triangle(block, rng.random())?;
        let [ba, bb, bc] = block.party_dims();
        let w = p.sqrt();
        let src = tri.amplitudes();
        for a in 0..ba {
            for b in 0..bb {
                for c in 0..bc {
                    let idx = ((off[0] + a) * db + off[1] + b) * dc + off[2] + c;
                    amps[idx] += src[(a * bb + b) * bc + c] * w;
                }
            }
        }
    }
    let state = PureState::normalized(amps, dims.to_vec())?;
    if spec.scramble {
        scramble_parties(state, &mut rng)
    } else {
        Ok(state)
    }
}

/// Applies a Haar-random isometry `d → factor·d` to every party.
pub fn apply_random_isometries(state: &PureState, factor: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = state.clone();
    for k in 0..s.num_subsystems() {
        let d = s.dims()[k];
        let v = linalg::haar_isometry(d * factor, d, &mut rng);
        s = s.apply_local(k, v.as_ref())?;
    }
    Ok(s)
}

/// Zero-correlation-length MPS: `m` blocks, each a ring of bond pairs with
/// Schmidt spectrum `spectra[i]`, superposed with weights `weights[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSpec {
    pub spectra: Vec<Vec<f64>>,
    /// Block weights (probabilities); uniform when absent.
    pub weights: Option<Vec<f64>>,
}

impl FixedPointSpec {
    pub fn injective(spectrum: Vec<f64>) -> Self {
        Self { spectra: vec![spectrum], weights: None }
    }

    pub fn blocks(&self) -> usize {
        self.spectra.len()
    }
}

/// Fixed-point tensor `M_{(i,jL,jR), (ã,ãL), (b̃,b̃R)} = δ_{iã} δ_{ãb̃} δ_{jL ãL}
/// δ_{jR b̃R} √λ_{ã,ãL}`, scaled per site so block `i` carries weight `p_i`.
/// With one block this is the injective fixed point on physical `(jL, jR)`.
pub fn make_fixed_point_mps(spec: &FixedPointSpec, n_sites: usize) -> Result<UniformMPS> {
    let m = spec.spectra.len();
    if m == 0 {
        return domain("fixed-point MPS needs at least one block");
    }
    for s in &spec.spectra {
        if s.is_empty() || s.iter().any(|&x| x < 0.0) {
            return domain("spectra must be nonempty and nonnegative");
        }
        let total: f64 = s.iter().sum();
        if (total - 1.0).abs() > SPECTRUM_TOL {
            return domain(format!("spectrum sums to {total}, expected 1"));
        }
    }
    let weights = match &spec.weights {
        Some(w) => {
            if w.len() != m || w.iter().any(|&x| x < 0.0) {
                return domain("one nonnegative weight per block");
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > SPECTRUM_TOL {
                return domain(format!("block weights sum to {total}, expected 1"));
            }
            w.clone()
        }
        None => vec![1.0 / m as f64; m],
    };
    if n_sites < 3 {
        return domain("uniform MPS needs at least 3 sites");
    }
    let db = spec.spectra.iter().map(Vec::len).max().unwrap_or(1);
    let bond = m * db;
    let phys = m * db * db;
    let mut mats = vec![Mat::<c64>::zeros(bond, bond); phys];
    for (i, lam) in spec.spectra.iter().enumerate() {
        let site_weight = weights[i].powf(0.5 / n_sites as f64);
        for jl in 0..lam.len() {
            for jr in 0..db {
                let s = (i * db + jl) * db + jr;
                mats[s][(i * db + jl, i * db + jr)] = c64::new(lam[jl].sqrt() * site_weight, 0.0);
            }
        }
    }
    UniformMPS::new(mats, n_sites)
}

/// Cyclic conditional mutual informations `I(i−1 : i+1 | i)` for every party `i`.
pub fn markov_residuals(state: &PureState) -> Result<Vec<f64>> {
    let n = state.num_subsystems();
    if n < 3 {
        return domain("need at least three parties");
    }
    (0..n)
        .map(|i| {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            conditional_mutual_information(state, &[prev], &[i], &[next])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{canonical_purification_of, entropy_report, h_measure, Tripartition};
    use std::f64::consts::LN_2;

    #[test]
    fn ghz_and_w_amplitudes() {
        let g = make_ghz(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.amplitudes()[0].re - s).abs() < 1e-15);
        assert!((g.amplitudes()[7].re - s).abs() < 1e-15);
        let w = make_w();
        let t = 3f64.sqrt().recip();
        for (i, a) in w.amplitudes().iter().enumerate() {
            let want = if [1, 2, 4].contains(&i) { t } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_triangle_entropies() {
        let t = bell_triangle();
        let r = entropy_report(&t, &Tripartition::abc()).unwrap();
        for s in [r.s_a, r.s_b, r.s_c] {
            assert!((s - 2.0 * LN_2).abs() < 1e-12);
        }
        assert!((r.i_ab - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn trivial_factor_leaves_bipartite_state() {
        let spec = TriangleSpec {
            ab: BipartiteFactor::new(vec![0.7, 0.3], 2, 2).unwrap(),
            bc: BipartiteFactor::trivial(),
            ca: BipartiteFactor::trivial(),
            scramble: false,
        };
        let t = make_triangle(&spec, 0).unwrap();
        assert_eq!(t.dims(), &[2, 2, 1]);
        assert!(t.subsystem_entropy(&[2]).unwrap().abs() < 1e-14);
        let expect = -0.7 * 0.7f64.ln() - 0.3 * 0.3f64.ln();
        assert!((t.subsystem_entropy(&[0]).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(BipartiteFactor::new(vec![0.5, 0.4], 2, 2).is_err());
        assert!(BipartiteFactor::new(vec![0.5, 0.5], 1, 2).is_err());
        let mut s = SotsSpec::ghz(2);
        s.offsets = Some(vec![[0, 0, 0], [0, 1, 1]]);
        assert!(make_sots(&s, 0).is_err());
        assert!(make_fixed_point_mps(&FixedPointSpec { spectra: vec![], weights: None }, 6).is_err());
    }

    #[test]
    fn ghz_as_sots() {
        for d in 2..=4 {
            let s = make_sots(&SotsSpec::ghz(d), 0).unwrap();
            let g = make_ghz(d).unwrap();
            for (a, b) in s.amplitudes().iter().zip(g.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_block_sots_is_triangle() {
        let spec = SotsSpec {
            weights: vec![1.0],
            blocks: vec![TriangleSpec::bell_pairs()],
            offsets: None,
            party_dims: None,
            scramble: false,
        };
        let s = make_sots(&spec, 3).unwrap();
        let t = bell_triangle();
        assert!((s.inner(&t).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_sots_has_vanishing_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut spec = SotsSpec::random(&mut rng, 2, 3);
        spec.weights = vec![0.7, 0.3];
        let s = make_sots(&spec, 5).unwrap();
        let h = h_measure(&s, &Tripartition::abc()).unwrap();
        assert!(h.abs() < 1e-9, "h = {h}");
    }

    #[test]
    fn markov_residual_examples() {
        let ghz4 = make_ghz_n(2, 4).unwrap();
        // every GHZ marginal has entropy ln 2, so each cyclic CMI cancels
        for r in markov_residuals(&ghz4).unwrap() {
            assert!(r.abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let generic = PureState::new(linalg::random_unit_vector(16, &mut rng), vec![2; 4]).unwrap();
        assert!(markov_residuals(&generic).unwrap().iter().all(|&r| r > 1e-3));
        let prod = PureState::basis(vec![2, 2, 2, 2], &[0, 1, 0, 1]).unwrap();
        assert!(markov_residuals(&prod).unwrap().iter().all(|r| r.abs() < 1e-14));

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = make_sots(&SotsSpec::random(&mut rng, 2, 2), 7).unwrap();
        let sops = canonical_purification_of(&s, &Tripartition::abc()).unwrap();
        for r in markov_residuals(&sops).unwrap() {
            assert!(r.abs() < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn fixed_point_mps_shapes() {
        let m = make_fixed_point_mps(&FixedPointSpec::injective(vec![0.5, 0.5]), 6).unwrap();
        assert_eq!((m.phys_dim(), m.bond_dim()), (4, 2));
        let spec = FixedPointSpec { spectra: vec![vec![1.0], vec![1.0]], weights: None };
        let ghz = make_fixed_point_mps(&spec, 5).unwrap();
        assert_eq!((ghz.phys_dim(), ghz.bond_dim()), (2, 2));
        let dense = ghz.to_dense().unwrap();
        let want = make_ghz_n(2, 5).unwrap();
        assert!((dense.inner(&want).norm() - 1.0).abs() < 1e-12);
    }
}
