//! Variational ground states in the space of periodic uniform MPS.
//!
//! Every local term is expanded in Pauli strings, so each contribution to
//! `⟨ψ|H|ψ⟩` is the trace of a cyclic product of generalised transfer
//! matrices `T_o = Σ_{s s'} o[s', s] M_s ⊗ M̄_{s'}`. Opening the bra tensor at
//! every position gives the gradient with respect to `M̄`, and the Rayleigh
//! quotient is minimised by L-BFGS over the real and imaginary parts of `M`.

use std::collections::VecDeque;

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{transfer_of, UniformMPS};
use crate::error::{domain, Result};
use crate::linalg::{self, ONE, ZERO};
use crate::models::LocalHamiltonian;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpsOptions {
    pub bond_dim: usize,
    pub max_iterations: usize,
    /// Stop when `‖∇E‖ · ‖M‖` falls below this.
    pub gradient_tol: f64,
    /// L-BFGS history length.
    pub memory: usize,
    pub seed: u64,
}

impl Default for PumpsOptions {
    fn default() -> Self {
        Self { bond_dim: 8, max_iterations: 4000, gradient_tol: 1e-9, memory: 12, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct PumpsResult {
    pub mps: UniformMPS,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Energy after each accepted step (non-increasing).
    pub history: Vec<f64>,
}

/// `coef · ⊗_k ops[k]` on consecutive sites.
struct PauliString {
    coef: c64,
    ops: Vec<Mat<c64>>,
}

fn paulis() -> [Mat<c64>; 4] {
    let i = c64::new(0.0, 1.0);
    [
        Mat::from_fn(2, 2, |r, c| if r == c { ONE } else { ZERO }),
        Mat::from_fn(2, 2, |r, c| if r != c { ONE } else { ZERO }),
        Mat::from_fn(2, 2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => ZERO,
        }),
        Mat::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => ONE,
            (1, 1) => -ONE,
            _ => ZERO,
        }),
    ]
}

/// Pauli expansion of every local term; the identity string is returned as a
/// per-site constant.
fn expand(h: &LocalHamiltonian) -> (Vec<PauliString>, f64) {
    let basis = paulis();
    let mut strings = Vec::new();
    let mut constant = 0.0;
    for term in h.terms() {
        let k = term.support;
        let dim = 1usize << k;
        let m = Mat::from_fn(dim, dim, |r, c| c64::new(term.matrix[(r, c)], 0.0));
        for code in 0..4usize.pow(k as u32) {
            let idx: Vec<usize> = (0..k).map(|p| (code / 4usize.pow((k - 1 - p) as u32)) % 4).collect();
            let mut p = Mat::from_fn(1, 1, |_, _| ONE);
            for &q in &idx {
                p = linalg::kron(p.as_ref(), basis[q].as_ref());
            }
            // Tr(P h) / 2^k
            let coef = (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| p[(r, c)] * m[(c, r)])
                .sum::<c64>()
                / dim as f64;
            if coef.norm() < 1e-14 {
                continue;
            }
            if idx.iter().all(|&q| q == 0) {
                constant += coef.re;
            } else {
                strings.push(PauliString { coef, ops: idx.iter().map(|&q| basis[q].clone()).collect() });
            }
        }
    }
    (strings, constant)
}

/// `Σ_{s s'} o[s', s] M_s ⊗ M̄_{s'}`.
fn op_transfer(mats: &[Mat<c64>], o: &Mat<c64>) -> Mat<c64> {
    let bond = mats[0].nrows();
    let mut t = Mat::<c64>::zeros(bond * bond, bond * bond);
    for (sp, bra) in mats.iter().enumerate() {
        let conj = Mat::from_fn(bond, bond, |i, j| bra[(i, j)].conj());
        let mut ket = Mat::<c64>::zeros(bond, bond);
        for (s, m) in mats.iter().enumerate() {
            let w = o[(sp, s)];
            if w != ZERO {
                ket += m * faer::Scale(w);
            }
        }
        t += linalg::kron(ket.as_ref(), conj.as_ref());
    }
    t
}

/// `G[γ, δ] = Σ_{αβ} K[α, β] R[(β, δ), (α, γ)]`: the bra tensor left open in `Tr(X R)`.
fn open_bra(ket: &Mat<c64>, r: &Mat<c64>, out: &mut Mat<c64>) {
    let bond = ket.nrows();
    for a in 0..bond {
        for b in 0..bond {
            let k = ket[(a, b)];
            if k == ZERO {
                continue;
            }
            for g in 0..bond {
                for d in 0..bond {
                    out[(g, d)] += k * r[(b * bond + d, a * bond + g)];
                }
            }
        }
    }
}

/// Trace of a cyclic product whose first `ops.len()` factors carry operators
/// and the rest are plain transfer matrices, with its `M̄` gradient.
fn cyclic_trace(mats: &[Mat<c64>], t: &Mat<c64>, ops: &[Mat<c64>], n: usize) -> (c64, Vec<Mat<c64>>) {
    let bond = mats[0].nrows();
    let dd = bond * bond;
    let factors: Vec<Mat<c64>> = ops.iter().map(|o| op_transfer(mats, o)).collect();
    let x = |i: usize| if i < factors.len() { &factors[i] } else { t };
    // prefix[i] = X_0 ⋯ X_{i−1}, suffix[i] = X_i ⋯ X_{n−1}
    let mut prefix = vec![linalg::identity(dd)];
    for i in 0..n {
        let next = &prefix[i] * x(i);
        prefix.push(next);
    }
    let mut suffix = vec![linalg::identity(dd); n + 1];
    for i in (0..n).rev() {
        suffix[i] = x(i) * &suffix[i + 1];
    }
    let value = linalg::trace(prefix[n].as_ref());
    let mut grad = vec![Mat::<c64>::zeros(bond, bond); mats.len()];
    let mut plain = Mat::<c64>::zeros(dd, dd);
    for i in 0..n {
        let r = &suffix[i + 1] * &prefix[i];
        if i < ops.len() {
            for (tt, g) in grad.iter_mut().enumerate() {
                let mut ket = Mat::<c64>::zeros(bond, bond);
                for (s, m) in mats.iter().enumerate() {
                    let w = ops[i][(tt, s)];
                    if w != ZERO {
                        ket += m * faer::Scale(w);
                    }
                }
                open_bra(&ket, &r, g);
            }
        } else {
            plain += &r;
        }
    }
    for (tt, g) in grad.iter_mut().enumerate() {
        open_bra(&mats[tt], &plain, g);
    }
    (value, grad)
}

struct Evaluated {
    energy: f64,
    /// `∂E/∂M̄`
    grad: Vec<Mat<c64>>,
}

fn check_compatible(mats: &[Mat<c64>], h: &LocalHamiltonian, n: usize) -> Result<()> {
    if mats.len() != 2 {
        return domain("the Hamiltonians act on qubits; MPS physical dimension must be 2");
    }
    if h.n_sites() != n {
        return domain(format!("Hamiltonian has N = {}, MPS has N = {n}", h.n_sites()));
    }
    Ok(())
}

fn evaluate(mats: &[Mat<c64>], strings: &[PauliString], constant: f64, n: usize) -> Result<Evaluated> {
    let t = transfer_of(mats);
    let (den, den_grad) = cyclic_trace(mats, &t, &[], n);
    if !den.re.is_finite() || den.re <= 0.0 {
        return domain("MPS has vanishing or non-finite norm");
    }
    let mut num = ZERO;
    let mut num_grad = vec![Mat::<c64>::zeros(mats[0].nrows(), mats[0].nrows()); mats.len()];
    for s in strings {
        let (v, g) = cyclic_trace(mats, &t, &s.ops, n);
        num += s.coef * v;
        for (acc, gi) in num_grad.iter_mut().zip(&g) {
            *acc += gi * faer::Scale(s.coef);
        }
    }
    let nf = n as f64;
    let e = nf * num.re / den.re;
    // the bra derivative of a translation-invariant sum is N times the single placement
    let grad = num_grad
        .iter()
        .zip(&den_grad)
        .map(|(gn, gd)| (gn * faer::Scale(c64::new(nf, 0.0)) - gd * faer::Scale(c64::new(e, 0.0))) * faer::Scale(c64::new(1.0 / den.re, 0.0)))
        .collect();
    Ok(Evaluated { energy: e + nf * constant, grad })
}

/// `⟨ψ(M)|H|ψ(M)⟩ / ⟨ψ(M)|ψ(M)⟩` on the MPS's ring.
pub fn pumps_energy(mps: &UniformMPS, h: &LocalHamiltonian) -> Result<f64> {
    check_compatible(mps.mats(), h, mps.n_sites())?;
    let (strings, constant) = expand(h);
    Ok(evaluate(mps.mats(), &strings, constant, mps.n_sites())?.energy)
}

fn pack(mats: &[Mat<c64>]) -> Vec<f64> {
    let mut x = Vec::new();
    for m in mats {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                x.push(m[(i, j)].re);
                x.push(m[(i, j)].im);
            }
        }
    }
    x
}

fn unpack(x: &[f64], d: usize, bond: usize) -> Vec<Mat<c64>> {
    (0..d)
        .map(|s| {
            Mat::from_fn(bond, bond, |i, j| {
                let k = 2 * ((s * bond + j) * bond + i);
                c64::new(x[k], x[k + 1])
            })
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient of `E` with respect to the packed real parameters: `2 ∂E/∂M̄`.
fn real_gradient(ev: &Evaluated) -> Vec<f64> {
    pack(&ev.grad).iter().map(|g| 2.0 * g).collect()
}

fn rescale(x: &mut [f64], d: usize, bond: usize, n: usize) {
    let mats = unpack(x, d, bond);
    let tn = super::TransferMatrix { mat: transfer_of(&mats), bond }.power(n);
    let z = linalg::trace(tn.as_ref()).re;
    if z > 0.0 && z.is_finite() {
        let k = z.powf(-0.5 / n as f64);
        x.iter_mut().for_each(|v| *v *= k);
    }
}

/// Minimises the energy of a periodic uniform MPS of bond dimension
/// `opts.bond_dim` on `n` sites, from a seeded random tensor.
pub fn pumps_optimize(h: &LocalHamiltonian, n: usize, opts: &PumpsOptions) -> Result<PumpsResult> {
    if n < 3 {
        return domain("uniform MPS needs at least 3 sites");
    }
    if opts.bond_dim == 0 {
        return domain("bond dimension must be positive");
    }
    let h = h.with_sites(n)?;
    let (strings, constant) = expand(&h);
    let (d, bond) = (2usize, opts.bond_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = 1.0 / ((d * bond) as f64).sqrt();
    let mut x: Vec<f64> = (0..2 * d * bond * bond)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v * scale
        })
        .collect();
    rescale(&mut x, d, bond, n);
    let eval = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let ev = evaluate(&unpack(x, d, bond), &strings, constant, n)?;
        Ok((ev.energy, real_gradient(&ev)))
    };
    let (mut f, mut g) = eval(&x)?;
    let mut history = vec![f];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;
    let measure = |x: &[f64], g: &[f64]| dot(g, g).sqrt() * dot(x, x).sqrt();
    while iterations < opts.max_iterations {
        if measure(&x, &g) < opts.gradient_tol {
            converged = true;
            break;
        }
        iterations += 1;
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = memory.back().map_or_else(
            || 0.1 / dot(&g, &g).sqrt().max(1e-300) * dot(&x, &x).sqrt(),
            |(s, y, _)| dot(s, y) / dot(y, y),
        );
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            memory.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            if let Ok((ft, gt)) = eval(&trial) {
                if ft <= f + 1e-4 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((mut xn, fnew, gn)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            memory.push_back((s, y, 1.0 / sy));
            if memory.len() > opts.memory {
                memory.pop_front();
            }
        }
        let stalled = f - fnew <= 1e-15 * f.abs();
        x = std::mem::take(&mut xn);
        f = fnew;
        g = gn;
        history.push(f);
        if stalled && memory.is_empty() {
            break;
        }
    }
    // the energy is scale invariant; return a unit-norm tensor
    rescale(&mut x, d, bond, n);
    let (f_final, g_final) = eval(&x)?;
    let gradient_norm = measure(&x, &g_final);
    Ok(PumpsResult {
        mps: UniformMPS::new(unpack(&x, d, bond), n)?,
        energy: f_final,
        iterations,
        gradient_norm,
        converged: converged || gradient_norm < opts.gradient_tol,
        history,
    })
}
