//! Entanglement of purification by conjugate gradient over unitaries on `C`.
//!
//! A purification `|φ⟩` on `(A, B, C_L, C_R)` is rotated by `U ← e^{iΘδt} U`
//! acting on `C = C_L C_R`; the objective is `S(A C_L)`. Its derivative along
//! a Hermitian generator `Θ` is `Tr(Θ E)` with `E = −i(K − K†)`,
//! `K[c, c'] = Σ_{ab} φ[a,b,c] Ȳ[a,b,c']` and `Y = (ln ρ_{AC_L} ⊗ 1) φ`.

mod bruteforce;

pub use bruteforce::ep_bruteforce;

use faer::{Mat, MatRef};
use log::debug;
use num_complex::Complex64 as c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, EIG_FLOOR};
use crate::qstate::{conditional_mutual_information, entropy_report, PureState, Tripartition};

/// How the (compressed) purifying system is factored into `C_L ⊗ C_R`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitPolicy {
    /// `⌈√r⌉ × ⌈√r⌉` for a support of rank `r`.
    #[default]
    Balanced,
    /// `r × r`, enough for the optimum of any state.
    Saturating,
    Explicit(usize, usize),
    /// Saturating while `r² ≤ budget`, balanced beyond.
    Budget(usize),
}

impl SplitPolicy {
    pub fn dims(&self, rank: usize) -> Result<(usize, usize)> {
        match *self {
            SplitPolicy::Balanced => {
                let s = (rank as f64).sqrt().ceil() as usize;
                let s = if s * s < rank { s + 1 } else { s };
                Ok((s.max(1), s.max(1)))
            }
            SplitPolicy::Saturating => Ok((rank.max(1), rank.max(1))),
            SplitPolicy::Budget(budget) => {
                if rank * rank <= budget {
                    SplitPolicy::Saturating.dims(rank)
                } else {
                    SplitPolicy::Balanced.dims(rank)
                }
            }
            SplitPolicy::Explicit(l, r) => {
                if l * r < rank || l == 0 || r == 0 {
                    return domain(format!(
                        "split {l}×{r} cannot hold a purifier of rank {rank}"
                    ));
                }
                Ok((l, r))
            }
        }
    }
}

/// Search-direction rule of the optimiser.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpMethod {
    /// Polak–Ribière conjugate gradient with a bracketing line search.
    #[default]
    Nlcg,
    /// Limited-memory BFGS on the Hermitian generators with Armijo backtracking.
    Lbfgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpOptions {
    pub method: EpMethod,
    /// Stop when the gradient norm `‖E‖_F` falls below `eta`.
    pub eta: f64,
    pub max_iterations: usize,
    /// Random starts in addition to the identity.
    pub restarts: usize,
    pub seed: u64,
    pub split: SplitPolicy,
    /// Golden-section evaluations per line search after bracketing.
    pub line_search_evals: usize,
    /// Steepest-descent restart period of the conjugate directions.
    pub restart_period: usize,
}

impl Default for EpOptions {
    fn default() -> Self {
        Self {
            method: EpMethod::Nlcg,
            eta: 1e-4,
            max_iterations: 1000,
            restarts: 3,
            seed: 0,
            split: SplitPolicy::Balanced,
            line_search_evals: 6,
            restart_period: 50,
        }
    }
}

/// Purification on `(A, B, C_L, C_R)` with the optimiser state.
#[derive(Clone, Debug)]
pub struct PurificationProblem {
    /// Reference amplitudes as an `(a b) × (l r)` matrix.
    phi: Mat<c64>,
    dims: [usize; 4],
    real: bool,
    pub unitary: Mat<c64>,
    pub direction: Mat<c64>,
    pub step: f64,
    pub gradient_norm: f64,
}

/// Objective value and the pieces the gradient needs.
struct Evaluation {
    entropy: f64,
    /// Rotated amplitudes `(a b) × (l r)`.
    rotated: Mat<c64>,
}

impl PurificationProblem {
    /// `state` must have four subsystems `(A, B, C_L, C_R)`.
    pub fn new(state: &PureState) -> Result<Self> {
        if state.num_subsystems() != 4 {
            return domain("a purification problem needs subsystems (A, B, C_L, C_R)");
        }
        let d = state.dims();
        let dims = [d[0], d[1], d[2], d[3]];
        let phi = state.matricize(&[0, 1])?;
        let dc = dims[2] * dims[3];
        Ok(Self {
            real: linalg::is_real(phi.as_ref()),
            phi,
            dims,
            unitary: linalg::identity(dc),
            direction: Mat::zeros(dc, dc),
            step: 0.0,
            gradient_norm: f64::NAN,
        })
    }

    /// Compresses `C` of a three-party state onto the support of `ρ_C`, then
    /// embeds it into `C_L ⊗ C_R` chosen by `split`.
    pub fn from_tripartite(state: &PureState, split: SplitPolicy) -> Result<Self> {
        if state.num_subsystems() != 3 {
            return domain("expected a state on (A, B, C)");
        }
        let m = state.matricize(&[0, 1])?;
        let (u, s, _) = linalg::thin_svd(m.as_ref())?;
        let rank = s.iter().filter(|&&x| x * x > EIG_FLOOR).count().max(1);
        let (dl, dr) = split.dims(rank)?;
        let (da, db) = (state.dims()[0], state.dims()[1]);
        let dc = dl * dr;
        // φ[(ab), k] = s_k u_k(ab), padded with zeros up to d_L d_R
        let phi = Mat::from_fn(da * db, dc, |i, k| if k < rank { u[(i, k)] * s[k] } else { linalg::ZERO });
        let state4 = PureState::normalized(
            (0..da * db).flat_map(|i| (0..dc).map(move |k| (i, k))).map(|(i, k)| phi[(i, k)]).collect(),
            vec![da, db, dl, dr],
        )?;
        Self::new(&state4)
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn split_dims(&self) -> (usize, usize) {
        (self.dims[2], self.dims[3])
    }

    pub fn c_dim(&self) -> usize {
        self.dims[2] * self.dims[3]
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    fn rotate(&self, u: MatRef<'_, c64>) -> Mat<c64> {
        // φ'[(ab), c] = Σ_c' U[c, c'] φ[(ab), c']
        &self.phi * u.transpose()
    }

    /// `(a b) × (l r)` → `(a l) × (b r)`.
    fn reshape_acl(&self, rot: &Mat<c64>) -> Mat<c64> {
        let [_, db, dl, dr] = self.dims;
        let da = self.dims[0];
        Mat::from_fn(da * dl, db * dr, |row, col| {
            let (a, l) = (row / dl, row % dl);
            let (b, r) = (col / dr, col % dr);
            rot[(a * db + b, l * dr + r)]
        })
    }

    fn evaluate(&self, u: MatRef<'_, c64>) -> Result<Evaluation> {
        let rotated = self.rotate(u);
        let m = self.reshape_acl(&rotated);
        Ok(Evaluation { entropy: linalg::entanglement_entropy(m.as_ref())?, rotated })
    }

    /// `S(A C_L)` at unitary `u`.
    pub fn objective_at(&self, u: MatRef<'_, c64>) -> Result<f64> {
        Ok(self.evaluate(u)?.entropy)
    }

    pub fn objective(&self) -> Result<f64> {
        self.objective_at(self.unitary.as_ref())
    }

    /// Gradient `E` at unitary `u`, with the objective value.
    pub fn gradient_at(&self, u: MatRef<'_, c64>) -> Result<(Mat<c64>, f64)> {
        let ev = self.evaluate(u)?;
        let m = self.reshape_acl(&ev.rotated);
        let (rows, cols) = (m.nrows(), m.ncols());
        // Y = (ln ρ_{AC_L}) M, taken on the smaller Gram side:
        // ln(M M†) M = M ln(M† M) on the support.
        let y = if rows <= cols {
            &log_on_support(linalg::gram_rows(m.as_ref()).as_ref())? * &m
        } else {
            &m * &log_on_support(linalg::gram_cols(m.as_ref()).as_ref())?
        };
        // back to (ab) × (lr)
        let [da, db, dl, dr] = self.dims;
        let y_ab = Mat::from_fn(da * db, dl * dr, |i, c| {
            let (a, b) = (i / db, i % db);
            let (l, r) = (c / dr, c % dr);
            y[(a * dl + l, b * dr + r)]
        });
        // K = φ'^T Ȳ
        let k = ev.rotated.transpose() * y_ab.conjugate();
        let dc = dl * dr;
        let e = Mat::from_fn(dc, dc, |i, j| {
            let diff = k[(i, j)] - k[(j, i)].conj();
            c64::new(diff.im, -diff.re)
        });
        Ok((e, ev.entropy))
    }

    /// Rotated purification `(1 ⊗ U)|φ⟩` as a state on `(A, B, C_L, C_R)`.
    pub fn purified_at(&self, u: MatRef<'_, c64>) -> Result<PureState> {
        let rot = self.rotate(u);
        let amps = (0..rot.nrows())
            .flat_map(|i| (0..rot.ncols()).map(move |c| (i, c)))
            .map(|(i, c)| rot[(i, c)])
            .collect();
        PureState::normalized(amps, self.dims.to_vec())
    }

    pub fn purified(&self) -> Result<PureState> {
        self.purified_at(self.unitary.as_ref())
    }

    /// `e^{iΘt} U`, re-projected onto the unitary group.
    fn step_unitary(&self, theta: &StepGenerator, t: f64, u: MatRef<'_, c64>) -> Result<Mat<c64>> {
        let n = theta.w.len();
        let mut scaled = theta.v.clone();
        for (k, &wk) in theta.w.iter().enumerate() {
            let ph = c64::from_polar(1.0, wk * t);
            for i in 0..n {
                scaled[(i, k)] *= ph;
            }
        }
        let mut out = &(&scaled * theta.v.adjoint()) * u;
        if self.real && theta.real_rotation && linalg::is_real(u) {
            // e^{iΘt} is real orthogonal for imaginary Θ; drop rounding noise
            for j in 0..n {
                for i in 0..n {
                    out[(i, j)].im = 0.0;
                }
            }
        }
        Ok(out)
    }
}

/// `ln` of a Hermitian PSD matrix restricted to eigenvalues above the floor.
fn log_on_support(g: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let (w, v) = linalg::herm_eigh(g)?;
    let n = w.len();
    let mut vl = v.clone();
    for (k, &wk) in w.iter().enumerate() {
        let l = if wk > EIG_FLOOR { wk.ln() } else { 0.0 };
        for i in 0..n {
            vl[(i, k)] *= l;
        }
    }
    Ok(&vl * v.adjoint())
}

/// Eigendecomposition of a search direction, reused along the line.
struct StepGenerator {
    w: Vec<f64>,
    v: Mat<c64>,
    real_rotation: bool,
}

impl StepGenerator {
    fn new(theta: MatRef<'_, c64>) -> Result<Self> {
        let real_rotation =
            (0..theta.ncols()).all(|j| (0..theta.nrows()).all(|i| theta[(i, j)].re == 0.0));
        let (w, v) = linalg::herm_eigh(theta)?;
        Ok(Self { w, v, real_rotation })
    }
}

/// Hermitian gradient `E` of `S(A C_L)` at the problem's current unitary.
pub fn ep_gradient(problem: &PurificationProblem) -> Result<Mat<c64>> {
    Ok(problem.gradient_at(problem.unitary.as_ref())?.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpResult {
    pub ep: f64,
    /// Best `S(A C_L)` found, before the `min(S_A, S_B)` bound is applied.
    pub raw_objective: f64,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub restarts: usize,
    pub split_dims: (usize, usize),
    pub converged: bool,
    /// The optimiser stayed above `min(S_A, S_B)`, which was reported instead.
    pub capped: bool,
    /// Accepted objective values of the winning start.
    pub history: Vec<f64>,
    #[serde(skip)]
    pub unitary: Option<Mat<c64>>,
}

struct RunOutcome {
    value: f64,
    unitary: Mat<c64>,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    history: Vec<f64>,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Bracketing followed by golden-section search for `min_t f(t)`, `f(0) = f0`.
/// Returns the best evaluated `(t, f)` with `f < f0`, if any.
fn line_search<F>(f0: f64, mut f: F, t_guess: f64, t_max: f64, golden_evals: usize) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut t1 = t_guess.min(t_max);
    let mut f1 = f(t1)?;
    let (mut lo, mut hi);
    if f1 < f0 {
        // expand until the objective rises
        lo = 0.0;
        loop {
            let t2 = (2.0 * t1).min(t_max);
            if t2 <= t1 {
                return Ok(Some((t1, f1)));
            }
            let f2 = f(t2)?;
            if f2 >= f1 {
                hi = t2;
                break;
            }
            lo = t1;
            t1 = t2;
            f1 = f2;
        }
    } else {
        // shrink until the objective drops
        let mut tries = 0;
        loop {
            hi = t1;
            t1 *= 0.25;
            tries += 1;
            if tries > 40 {
                return Ok(None);
            }
            f1 = f(t1)?;
            if f1 < f0 {
                lo = 0.0;
                break;
            }
        }
    }
    let (mut best_t, mut best_f) = (t1, f1);
    let (mut a, mut b, mut c) = (lo, t1, hi);
    let mut fb = f1;
    for _ in 0..golden_evals {
        // probe the larger sub-interval
        let x = if c - b > b - a { b + GOLDEN * (c - b) } else { b - GOLDEN * (b - a) };
        let fx = f(x)?;
        if fx < fb {
            if x > b {
                a = b;
            } else {
                c = b;
            }
            b = x;
            fb = fx;
        } else if x > b {
            c = x;
        } else {
            a = x;
        }
        if fx < best_f {
            best_t = x;
            best_f = fx;
        }
    }
    Ok(Some((best_t, best_f)))
}

fn run_nlcg(problem: &PurificationProblem, start: Mat<c64>, opts: &EpOptions) -> Result<RunOutcome> {
    let mut u = start;
    let (mut e, mut f) = problem.gradient_at(u.as_ref())?;
    let mut gnorm = e.norm_l2();
    let mut theta = -&e;
    let mut history = vec![f];
    let mut last_step = 0.0;
    let mut since_restart = 0;
    let mut iterations = 0;
    let mut converged = gnorm <= opts.eta;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        // directional derivative along Θ
        let mut slope = linalg::real_inner(theta.as_ref(), e.as_ref());
        if slope >= 0.0 || since_restart >= opts.restart_period {
            theta = -&e;
            slope = -gnorm * gnorm;
            since_restart = 0;
        }
        let tnorm = theta.norm_l2();
        let t_max = std::f64::consts::PI / tnorm;
        let t_guess = if last_step > 0.0 { 2.0 * last_step } else { (-f.max(1e-3) / slope).min(0.1 * t_max) };
        let generator = StepGenerator::new(theta.as_ref())?;
        let found = line_search(
            f,
            |t| problem.objective_at(problem.step_unitary(&generator, t, u.as_ref())?.as_ref()),
            t_guess,
            t_max,
            opts.line_search_evals,
        )?;
        let Some((t, _)) = found else {
            if since_restart == 0 {
                // no decrease even along steepest descent
                break;
            }
            theta = -&e;
            since_restart = 0;
            continue;
        };
        last_step = t;
        let stepped = problem.step_unitary(&generator, t, u.as_ref())?;
        u = linalg::polar_unitary(stepped.as_ref())?;
        let (e_new, f_new) = problem.gradient_at(u.as_ref())?;
        if f_new > f {
            // re-unitarisation moved uphill by rounding; keep the history monotone
            history.push(f);
        } else {
            history.push(f_new);
        }
        let denom = gnorm * gnorm;
        let diff = &e_new - &e;
        let beta = (linalg::real_inner(e_new.as_ref(), diff.as_ref()) / denom).max(0.0);
        theta = &(-&e_new) + &(&theta * faer::Scale(c64::new(beta, 0.0)));
        since_restart += 1;
        e = e_new;
        f = f_new.min(f);
        gnorm = e.norm_l2();
        converged = gnorm <= opts.eta;
    }
    Ok(RunOutcome { value: f, unitary: u, iterations, grad_norm: gnorm, converged, history })
}

/// Generators are compared in the fixed frame of `U ← e^{iΘt} U`, so stored
/// steps and gradient differences need no transport.
fn run_lbfgs(problem: &PurificationProblem, start: Mat<c64>, opts: &EpOptions) -> Result<RunOutcome> {
    const MEMORY: usize = 10;
    let mut u = start;
    let (mut e, mut f) = problem.gradient_at(u.as_ref())?;
    let mut gnorm = e.norm_l2();
    let mut history = vec![f];
    let mut pairs: std::collections::VecDeque<(Mat<c64>, Mat<c64>, f64)> = Default::default();
    let mut iterations = 0;
    let mut converged = gnorm <= opts.eta;
    let inner = |a: &Mat<c64>, b: &Mat<c64>| linalg::real_inner(a.as_ref(), b.as_ref());
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let mut q = e.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * inner(s, &q);
            q -= y * faer::Scale(c64::new(a, 0.0));
            alphas.push(a);
        }
        let gamma = match pairs.back() {
            Some((s, y, _)) => inner(s, y) / inner(y, y),
            None => 0.1 / gnorm.max(1e-300),
        };
        q *= faer::Scale(c64::new(gamma, 0.0));
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * inner(y, &q);
            q += s * faer::Scale(c64::new(a - b, 0.0));
        }
        let mut theta = -&q;
        let mut slope = inner(&theta, &e);
        if slope >= 0.0 {
            pairs.clear();
            theta = &e * faer::Scale(c64::new(-0.1 / gnorm.max(1e-300), 0.0));
            slope = inner(&theta, &e);
        }
        // keep the rotation angle below π/2
        let tnorm = linalg::herm_eigvals(theta.as_ref())?.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let mut t = if tnorm > 0.5 * std::f64::consts::PI { 0.5 * std::f64::consts::PI / tnorm } else { 1.0 };
        let generator = StepGenerator::new(theta.as_ref())?;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = problem.step_unitary(&generator, t, u.as_ref())?;
            let fc = problem.objective_at(cand.as_ref())?;
            if fc <= f + 1e-4 * t * slope {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(cand) = accepted else {
            if pairs.is_empty() {
                break;
            }
            pairs.clear();
            continue;
        };
        u = linalg::polar_unitary(cand.as_ref())?;
        let (e_new, f_new) = problem.gradient_at(u.as_ref())?;
        let s = &theta * faer::Scale(c64::new(t, 0.0));
        let y = &e_new - &e;
        let sy = inner(&s, &y);
        if sy > 1e-300 {
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > MEMORY {
                pairs.pop_front();
            }
        }
        history.push(f_new.min(f));
        e = e_new;
        f = f_new;
        gnorm = e.norm_l2();
        converged = gnorm <= opts.eta;
    }
    Ok(RunOutcome { value: f, unitary: u, iterations, grad_norm: gnorm, converged, history })
}

/// Minimises `S(A C_L)` from a prepared problem over the identity and
/// `opts.restarts` seeded random starts.
pub fn minimize_problem(problem: &mut PurificationProblem, opts: &EpOptions) -> Result<EpResult> {
    let dc = problem.c_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<RunOutcome> = None;
    let mut total_iterations = 0;
    for k in 0..=opts.restarts {
        let start = if k == 0 {
            problem.unitary.clone()
        } else if problem.real {
            linalg::haar_orthogonal(dc, &mut rng)
        } else {
            linalg::haar_unitary(dc, &mut rng)
        };
        let run = match opts.method {
            EpMethod::Nlcg => run_nlcg(problem, start, opts)?,
            EpMethod::Lbfgs => run_lbfgs(problem, start, opts)?,
        };
        debug!(
            "start {k}: S = {:.10} after {} iterations, |E| = {:.2e}",
            run.value, run.iterations, run.grad_norm
        );
        total_iterations += run.iterations;
        let better = best.as_ref().is_none_or(|b| {
            run.value < b.value - 1e-12 || (run.value <= b.value + 1e-12 && run.converged && !b.converged)
        });
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    problem.unitary = best.unitary.clone();
    problem.gradient_norm = best.grad_norm;
    Ok(EpResult {
        ep: best.value,
        raw_objective: best.value,
        iterations: total_iterations,
        final_gradient_norm: best.grad_norm,
        restarts: opts.restarts,
        split_dims: problem.split_dims(),
        converged: best.converged,
        capped: false,
        history: best.history,
        unitary: Some(best.unitary),
    })
}

/// Entanglement of purification of `ρ_AB` for a state on `(A, B, C)`.
///
/// The returned value is an upper bound; it is clamped to `min(S_A, S_B)`,
/// which any purification attains, and `capped` records when that happened.
pub fn minimize_ep(state: &PureState, opts: &EpOptions) -> Result<(EpResult, PurificationProblem)> {
    let mut problem = PurificationProblem::from_tripartite(state, opts.split)?;
    let mut res = minimize_problem(&mut problem, opts)?;
    let rep = entropy_report(state, &Tripartition::abc())?;
    let bound = rep.s_a.min(rep.s_b);
    if res.ep > bound + 1e-12 {
        res.ep = bound;
        res.capped = true;
    }
    Ok((res, problem))
}

/// `g(A:B) = 2 E_P − I` with the E_P details.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GMeasure {
    pub g: f64,
    pub ep: EpResult,
    pub i_ab: f64,
}

pub fn g_measure(state: &PureState, part: &Tripartition, opts: &EpOptions) -> Result<GMeasure> {
    let s3 = crate::qstate::to_three_party(state, part)?;
    let (ep, _) = minimize_ep(&s3, opts)?;
    let i_ab = entropy_report(&s3, &Tripartition::abc())?.i_ab;
    Ok(GMeasure { g: 2.0 * ep.ep - i_ab, ep, i_ab })
}

/// `g` of one purification and the conditional mutual informations it splits into.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GDecomposition {
    /// `2 S(A C_L) − I(A:B)` of this purification.
    pub g: f64,
    /// `[I(C_L:BC_R|A), I(C_R:A|B), I(C_R:AC_L|B), I(C_L:B|A)]`.
    pub cmis: [f64; 4],
    /// `|g − cmis[0] − cmis[1]|`, `|g − cmis[2] − cmis[3]|`.
    pub residuals: (f64, f64),
}

/// Decomposition of `g` for a purification on `(A, B, C_L, C_R)`.
pub fn g_decomposition(purified: &PureState) -> Result<GDecomposition> {
    if purified.num_subsystems() != 4 {
        return domain("decomposition needs subsystems (A, B, C_L, C_R)");
    }
    let (a, b, cl, cr) = (0, 1, 2, 3);
    let s_acl = purified.subsystem_entropy(&[a, cl])?;
    let s_a = purified.subsystem_entropy(&[a])?;
    let s_b = purified.subsystem_entropy(&[b])?;
    let s_ab = purified.subsystem_entropy(&[a, b])?;
    let g = 2.0 * s_acl - (s_a + s_b - s_ab);
    let cmis = [
        conditional_mutual_information(purified, &[cl], &[a], &[b, cr])?,
        conditional_mutual_information(purified, &[cr], &[b], &[a])?,
        conditional_mutual_information(purified, &[cr], &[b], &[a, cl])?,
        conditional_mutual_information(purified, &[cl], &[a], &[b])?,
    ];
    Ok(GDecomposition {
        g,
        cmis,
        residuals: ((g - cmis[0] - cmis[1]).abs(), (g - cmis[2] - cmis[3]).abs()),
    })
}

/// Residuals of both decompositions at the problem's current unitary.
pub fn g_decomposition_residual(problem: &PurificationProblem) -> Result<(f64, f64)> {
    Ok(g_decomposition(&problem.purified()?)?.residuals)
}

pub(crate) fn check_small(problem: &PurificationProblem, max_dc: usize) -> Result<()> {
    if problem.c_dim() > max_dc {
        return Err(Error::Domain(format!(
            "purifier dimension {} exceeds {max_dc}",
            problem.c_dim()
        )));
    }
    Ok(())
}
