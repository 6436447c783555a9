//! Multi-start steepest descent for small purifiers, used as a reference.

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_small, PurificationProblem, SplitPolicy};
use crate::error::{domain, Result};
use crate::linalg;
use crate::qstate::PureState;

const STARTS: usize = 200;
const MAX_STEPS: usize = 400;

/// One Armijo-backtracked steepest-descent run from `u`.
fn descend(problem: &PurificationProblem, mut u: Mat<c64>) -> Result<f64> {
    let (mut e, mut f) = problem.gradient_at(u.as_ref())?;
    let mut t = 0.5;
    for _ in 0..MAX_STEPS {
        let g2 = e.norm_l2().powi(2);
        if g2.sqrt() < 1e-7 {
            break;
        }
        // step along Θ = −E: U ← exp(−iEt) U
        let mut accepted = None;
        let mut tt = t * 2.0;
        for _ in 0..50 {
            let cand = &linalg::expi_hermitian(e.as_ref(), -tt)? * &u;
            let fc = problem.objective_at(cand.as_ref())?;
            if fc <= f - 1e-4 * tt * g2 {
                accepted = Some((cand, fc));
                break;
            }
            tt *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        t = tt;
        let converged = f - fc < 1e-13;
        u = linalg::polar_unitary(cand.as_ref())?;
        (e, f) = problem.gradient_at(u.as_ref())?;
        if converged {
            break;
        }
    }
    Ok(f)
}

/// Minimum of `S(A C_L)` over 200 Haar-random starts refined by steepest
/// descent. Only for purifiers with `d_{C_L} d_{C_R} ≤ 8`.
pub fn ep_bruteforce(state: &PureState, split: SplitPolicy, seed: u64) -> Result<f64> {
    if state.num_subsystems() != 3 {
        return domain("expected a state on (A, B, C)");
    }
    let problem = PurificationProblem::from_tripartite(state, split)?;
    check_small(&problem, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b007);
    let dc = problem.c_dim();
    let mut best = f64::INFINITY;
    for _ in 0..STARTS {
        let u = linalg::haar_unitary(dc, &mut rng);
        best = best.min(descend(&problem, u)?);
    }
    Ok(best)
}
