//! Symmetry-resolved matrix-free Hamiltonians and restarted Lanczos.

use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LocalHamiltonian, Symmetry};
use crate::error::{domain, Error, Result};
use crate::qstate::PureState;

const ABSENT: u32 = u32::MAX;
const CHUNK: usize = 1 << 12;

/// Basis states of one symmetry sector, with the inverse lookup table.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    /// `None` for the full space (identity map).
    states: Option<Vec<u32>>,
    index: Option<Vec<u32>>,
}

impl SectorBasis {
    pub fn full(n: usize) -> Self {
        Self { n, states: None, index: None }
    }

    fn from_filter(n: usize, keep: impl Fn(u32) -> bool) -> Self {
        let total = 1u64 << n;
        let mut index = vec![ABSENT; total as usize];
        let mut states = Vec::new();
        for x in 0..total as u32 {
            if keep(x) {
                index[x as usize] = states.len() as u32;
                states.push(x);
            }
        }
        Self { n, states: Some(states), index: Some(index) }
    }

    /// Basis states with `popcount ≡ odd (mod 2)`.
    pub fn parity(n: usize, odd: bool) -> Self {
        Self::from_filter(n, |x| (x.count_ones() % 2 == 1) == odd)
    }

    /// Basis states with exactly `ones` sites in `|1⟩`.
    pub fn magnetization(n: usize, ones: u32) -> Self {
        Self::from_filter(n, |x| x.count_ones() == ones)
    }

    pub fn dim(&self) -> usize {
        self.states.as_ref().map_or(1usize << self.n, |s| s.len())
    }

    #[inline]
    fn state(&self, i: usize) -> u32 {
        self.states.as_ref().map_or(i as u32, |s| s[i])
    }

    #[inline]
    fn lookup(&self, x: u32) -> u32 {
        self.index.as_ref().map_or(x, |t| t[x as usize])
    }

    /// Embeds a sector vector into the full `2^N` amplitude vector.
    pub fn embed(&self, v: &[f64]) -> Vec<c64> {
        let mut out = vec![c64::new(0.0, 0.0); 1usize << self.n];
        for (i, &a) in v.iter().enumerate() {
            out[self.state(i) as usize] = c64::new(a, 0.0);
        }
        out
    }
}

/// Off-diagonal entries of a placed term, grouped by local row.
#[derive(Clone, Debug)]
struct PlacedTerm {
    /// Bit positions of the term's sites, most significant local bit first.
    bits: Vec<u32>,
    /// `rows[c]` = `(flip mask on the full index, value)` for `c' ≠ c`.
    rows: Vec<Vec<(u32, f64)>>,
}

impl PlacedTerm {
    #[inline]
    fn local(&self, x: u32) -> usize {
        let mut c = 0usize;
        for &b in &self.bits {
            c = (c << 1) | ((x >> b) & 1) as usize;
        }
        c
    }
}

/// Matrix-free Hamiltonian restricted to a sector.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    basis: SectorBasis,
    diag: Vec<f64>,
    terms: Vec<PlacedTerm>,
}

impl SparseHamiltonian {
    pub fn new(h: &LocalHamiltonian, basis: SectorBasis) -> Self {
        let n = h.n_sites();
        let mut diag_terms = Vec::new();
        let mut terms = Vec::new();
        for (sites, m) in h.placed_terms() {
            let bits: Vec<u32> = sites.iter().map(|&s| (n - 1 - s) as u32).collect();
            let k = bits.len();
            let dim = 1usize << k;
            let flip_of = |delta: usize| -> u32 {
                (0..k).filter(|&i| delta >> (k - 1 - i) & 1 == 1).map(|i| 1u32 << bits[i]).sum()
            };
            let diag: Vec<f64> = (0..dim).map(|c| m[(c, c)]).collect();
            let rows: Vec<Vec<(u32, f64)>> = (0..dim)
                .map(|c| {
                    (0..dim)
                        .filter(|&c2| c2 != c && m[(c, c2)] != 0.0)
                        .map(|c2| (flip_of(c ^ c2), m[(c, c2)]))
                        .collect()
                })
                .collect();
            if diag.iter().any(|&d| d != 0.0) {
                diag_terms.push((PlacedTerm { bits: bits.clone(), rows: Vec::new() }, diag));
            }
            if rows.iter().any(|r| !r.is_empty()) {
                terms.push(PlacedTerm { bits, rows });
            }
        }
        let dim = basis.dim();
        let mut diag = vec![0.0; dim];
        diag.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                let x = basis.state(ci * CHUNK + o);
                *slot = diag_terms.iter().map(|(t, d)| d[t.local(x)]).sum();
            }
        });
        Self { basis, diag, terms }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    /// `y = H v`, gathered row by row.
    pub fn apply(&self, v: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                let i = ci * CHUNK + o;
                let x = self.basis.state(i);
                let mut acc = self.diag[i] * v[i];
                for t in &self.terms {
                    for &(mask, val) in &t.rows[t.local(x)] {
                        let j = self.basis.lookup(x ^ mask);
                        debug_assert!(j != ABSENT, "term leaves the symmetry sector");
                        acc += val * v[j as usize];
                    }
                }
                *slot = acc;
            }
        });
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let dim = self.dim();
        let mut out = Mat::<f64>::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        let mut col = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..dim {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateOptions {
    /// Krylov vectors kept between restarts.
    pub krylov: usize,
    pub max_restarts: usize,
    /// Convergence when `‖Hψ − Eψ‖ < tol · ‖H‖`.
    pub tol: f64,
    pub seed: u64,
    /// Gap below which two sector ground states count as degenerate.
    pub degeneracy_tol: f64,
    /// On a degenerate pair, return the symmetric (parity-even or lowest-sector) state.
    pub cat_state: bool,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            krylov: 40,
            max_restarts: 200,
            tol: 1e-8,
            seed: 7,
            degeneracy_tol: 1e-10,
            cat_state: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SectorLabel {
    Full,
    Parity { odd: bool },
    Magnetization { ones: u32 },
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: PureState,
    pub residual_norm: f64,
    pub sector: SectorLabel,
    pub matvecs: usize,
    /// Lowest Ritz value after each restart (non-increasing).
    pub energy_history: Vec<f64>,
    /// Energy of the lowest state in a different sector (or the second Ritz value).
    pub next_energy: Option<f64>,
    pub degenerate: bool,
}

struct SectorSolution {
    energy: f64,
    vector: Vec<f64>,
    residual: f64,
    second: Option<f64>,
    matvecs: usize,
    history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK).zip(x.par_chunks(CHUNK)).for_each(|(yc, xc)| {
        for (a, b) in yc.iter_mut().zip(xc) {
            *a += alpha * b;
        }
    });
}

fn scale(alpha: f64, x: &mut [f64]) {
    x.par_chunks_mut(CHUNK).for_each(|c| c.iter_mut().for_each(|a| *a *= alpha));
}

fn tridiag_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let evd = t.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    Ok((evd.S().column_vector().iter().copied().collect(), evd.U().to_owned()))
}

/// Explicitly restarted Lanczos with full reorthogonalisation.
fn lanczos(h: &SparseHamiltonian, opts: &GroundStateOptions, norm: f64, seed: u64) -> Result<SectorSolution> {
    let dim = h.dim();
    if dim == 0 {
        return domain("empty symmetry sector");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nrm = dot(&start, &start).sqrt();
    scale(1.0 / nrm, &mut start);

    let m_max = opts.krylov.max(2).min(dim);
    let tol = opts.tol * norm.max(1.0);
    let mut matvecs = 0;
    let mut history = Vec::new();
    let mut w = vec![0.0; dim];
    let mut best = (f64::INFINITY, start.clone(), f64::INFINITY, None);

    for _ in 0..opts.max_restarts.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);
        loop {
            let k = basis.len() - 1;
            h.apply(&basis[k], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // full reorthogonalisation, applied twice
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    axpy(-c, q, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            if basis.len() == m_max || b < 1e-12 * norm.max(1.0) {
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            scale(1.0 / b, &mut next);
            basis.push(next);
        }
        let (theta, s) = tridiag_eigen(&alpha, &beta)?;
        let mut ritz = vec![0.0; dim];
        for (k, q) in basis.iter().enumerate() {
            axpy(s[(k, 0)], q, &mut ritz);
        }
        let rn = dot(&ritz, &ritz).sqrt();
        scale(1.0 / rn, &mut ritz);
        h.apply(&ritz, &mut w);
        matvecs += 1;
        let e = dot(&w, &ritz);
        axpy(-e, &ritz, &mut w);
        let residual = dot(&w, &w).sqrt();
        history.push(theta[0]);
        let second = theta.get(1).copied();
        if residual < tol {
            // a converged vector wins over an earlier one that is lower only by rounding
            best = (e, ritz, residual, second);
            break;
        }
        if e <= best.0 {
            best = (e, ritz.clone(), residual, second);
        }
        start = ritz;
    }
    let (energy, vector, residual, second) = best;
    if residual >= tol {
        return Err(Error::NotConverged { iterations: matvecs, residual });
    }
    Ok(SectorSolution { energy, vector, residual, second, matvecs, history })
}

fn sectors(h: &LocalHamiltonian) -> Vec<(SectorLabel, SectorBasis)> {
    let n = h.n_sites();
    match h.symmetry() {
        Symmetry::None => vec![(SectorLabel::Full, SectorBasis::full(n))],
        Symmetry::Parity => [false, true]
            .into_iter()
            .map(|odd| (SectorLabel::Parity { odd }, SectorBasis::parity(n, odd)))
            .collect(),
        Symmetry::Magnetization => {
            let half = (n / 2) as u32;
            let mut ones = vec![half];
            if n % 2 == 1 {
                ones.push(half + 1);
            }
            ones.into_iter()
                .map(|k| (SectorLabel::Magnetization { ones: k }, SectorBasis::magnetization(n, k)))
                .collect()
        }
    }
}

/// Lowest eigenpair over the Hamiltonian's symmetry sectors.
///
/// For parity-symmetric chains both sectors are solved; for magnetisation the
/// zero-magnetisation sector (both `±1/2` sectors for odd `N`) is used.
pub fn ground_state(h: &LocalHamiltonian, opts: &GroundStateOptions) -> Result<GroundStateResult> {
    if h.n_sites() > 24 {
        return domain(format!("ground_state supports N ≤ 24, got {}", h.n_sites()));
    }
    let norm = h.norm_bound();
    let mut solved = Vec::new();
    for (k, (label, basis)) in sectors(h).into_iter().enumerate() {
        let sparse = SparseHamiltonian::new(h, basis);
        let sol = lanczos(&sparse, opts, norm, opts.seed.wrapping_add(k as u64))?;
        solved.push((label, sparse.basis, sol));
    }
    solved.sort_by(|a, b| a.2.energy.total_cmp(&b.2.energy));
    let next_energy = if solved.len() > 1 { Some(solved[1].2.energy) } else { solved[0].2.second };
    let degenerate = next_energy.is_some_and(|e| (e - solved[0].2.energy).abs() < opts.degeneracy_tol);
    let total_matvecs = solved.iter().map(|s| s.2.matvecs).sum();
    let pick = if degenerate && opts.cat_state {
        // symmetric member of the pair: the even-parity / first-listed sector
        solved
            .iter()
            .position(|s| matches!(s.0, SectorLabel::Parity { odd: false }))
            .unwrap_or(0)
    } else {
        0
    };
    let (label, basis, sol) = solved.swap_remove(pick);
    let state = PureState::normalized(basis.embed(&sol.vector), vec![2; h.n_sites()])?;
    Ok(GroundStateResult {
        energy: sol.energy,
        state,
        residual_norm: sol.residual,
        sector: label,
        matvecs: total_matvecs,
        energy_history: sol.history,
        next_energy,
        degenerate,
    })
}

/// Cyclic translation `j → j + 1` of an `N`-qubit state.
pub fn translate_state(state: &PureState) -> Result<PureState> {
    let n = state.num_subsystems();
    if state.dims().iter().any(|&d| d != 2) {
        return domain("translation expects a qubit ring");
    }
    let amps = state.amplitudes();
    let mut out = vec![c64::new(0.0, 0.0); amps.len()];
    for (x, &a) in amps.iter().enumerate() {
        // site j moves to j+1: bit N−1−j moves to bit N−2−j (rotate right)
        let y = ((x >> 1) | ((x & 1) << (n - 1))) & ((1 << n) - 1);
        out[y] = a;
    }
    PureState::new(out, state.dims().to_vec())
}
