//! Per-region isometric compression of a state on `(A, B, C)`.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg;
use crate::qstate::{to_three_party, PureState, Tripartition};

/// Rank caps of the compressed parties; C is capped at `c_l · c_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub a: usize,
    pub b: usize,
    pub c_l: usize,
    pub c_r: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self { a: 64, b: 64, c_l: 12, c_r: 12 }
    }
}

impl Caps {
    pub fn c(&self) -> usize {
        self.c_l * self.c_r
    }

    /// Caps that never truncate.
    pub fn unlimited() -> Self {
        Self { a: usize::MAX, b: usize::MAX, c_l: 1 << 16, c_r: 1 << 16 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a == 0 || self.b == 0 || self.c_l == 0 || self.c_r == 0 {
            return domain("caps must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Compressed {
    /// Renormalised state on `(Ã, B̃, C̃)`.
    pub state: PureState,
    /// Discarded weight of `ρ_A`, `ρ_B`, `ρ_C`.
    pub discarded: [f64; 3],
    /// Region dimensions before compression.
    pub original_dims: [usize; 3],
}

/// Columns of the leading eigenvectors of `m m†` whose Schmidt values exceed
/// `epsilon`, at most `cap` of them, with the discarded weight.
fn leading_subspace(m: &Mat<c64>, cap: usize, epsilon: f64) -> Result<(Mat<c64>, f64)> {
    let (rows, cols) = (m.nrows(), m.ncols());
    // eigenpairs of the smaller Gram matrix, largest first
    let (w, basis) = if rows <= cols {
        let (w, v) = linalg::herm_eigh(linalg::gram_rows(m.as_ref()).as_ref())?;
        (w, v)
    } else {
        let (w, v) = linalg::herm_eigh(linalg::gram_cols(m.as_ref()).as_ref())?;
        (w, v)
    };
    let total: f64 = w.iter().map(|x| x.max(0.0)).sum();
    let order: Vec<usize> = (0..w.len()).rev().collect();
    let mut keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| w[k] / total > epsilon * epsilon && w[k] / total > linalg::EIG_FLOOR)
        .collect();
    keep.truncate(cap.max(1));
    if keep.is_empty() {
        keep.push(order[0]);
    }
    let kept: f64 = keep.iter().map(|&k| w[k].max(0.0)).sum();
    let discarded = ((total - kept) / total).max(0.0);
    let v = if rows <= cols {
        Mat::from_fn(rows, keep.len(), |i, j| basis[(i, keep[j])])
    } else {
        // left singular vectors u = m v / σ
        let vk = Mat::from_fn(cols, keep.len(), |i, j| basis[(i, keep[j])]);
        let mut u = m * &vk;
        for (j, &k) in keep.iter().enumerate() {
            let s = w[k].max(0.0).sqrt();
            for i in 0..rows {
                u[(i, j)] /= s;
            }
        }
        u
    };
    Ok((v, discarded))
}

/// Replaces subsystem `k` of `amps` (dims `dims`) by its image under `v†`.
fn project_mode(amps: &[c64], dims: &[usize], k: usize, v: &Mat<c64>) -> Vec<c64> {
    let left: usize = dims[..k].iter().product();
    let right: usize = dims[k + 1..].iter().product();
    let (d, r) = (dims[k], v.ncols());
    let vh = v.adjoint().to_owned();
    let mut out = vec![linalg::ZERO; left * r * right];
    for l in 0..left {
        let block = Mat::from_fn(d, right, |i, j| amps[(l * d + i) * right + j]);
        let img = &vh * &block;
        for i in 0..r {
            for j in 0..right {
                out[(l * r + i) * right + j] = img[(i, j)];
            }
        }
    }
    out
}

/// Compresses each party onto the top eigenvectors of its reduced density
/// matrix. Caps larger than a region's dimension keep it whole.
pub fn compress_tripartite(
    state: &PureState,
    part: &Tripartition,
    caps: Caps,
    epsilon: f64,
) -> Result<Compressed> {
    caps.validate()?;
    if !(0.0..1.0).contains(&epsilon) {
        return domain(format!("truncation threshold {epsilon} outside [0, 1)"));
    }
    let s3 = to_three_party(state, part)?;
    let dims = s3.dims().to_vec();
    let original_dims = [dims[0], dims[1], dims[2]];
    let cap = [caps.a, caps.b, caps.c()];
    let mut amps = s3.amplitudes().to_vec();
    let mut cur = dims.clone();
    let mut discarded = [0.0; 3];
    for k in 0..3 {
        let m = s3.matricize(&[k])?;
        let (v, dw) = leading_subspace(&m, cap[k], epsilon)?;
        discarded[k] = dw;
        if v.ncols() < cur[k] {
            amps = project_mode(&amps, &cur, k, &v);
            cur[k] = v.ncols();
        }
    }
    let state = PureState::normalized(amps, cur)?;
    Ok(Compressed { state, discarded, original_dims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::entropy_report;
    use crate::zoo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_rank_caps_preserve_entropies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = PureState::new(linalg::random_unit_vector(1 << 7, &mut rng), vec![2; 7]).unwrap();
        let part = Tripartition::contiguous(2, 2, 3).unwrap();
        let c = compress_tripartite(&psi, &part, Caps::unlimited(), 0.0).unwrap();
        let a = entropy_report(&psi, &part).unwrap();
        let b = entropy_report(&c.state, &Tripartition::abc()).unwrap();
        assert!((a.s_a - b.s_a).abs() < 1e-10);
        assert!((a.s_b - b.s_b).abs() < 1e-10);
        assert!((a.s_ab - b.s_ab).abs() < 1e-10);
        assert!(c.discarded.iter().all(|&w| w < 1e-12));
    }

    #[test]
    fn ghz_compresses_exactly_to_qubits() {
        let psi = zoo::make_ghz_n(2, 12).unwrap();
        let part = Tripartition::contiguous(4, 4, 4).unwrap();
        let caps = Caps { a: 2, b: 2, c_l: 2, c_r: 1 };
        let c = compress_tripartite(&psi, &part, caps, 0.0).unwrap();
        assert_eq!(c.state.dims(), &[2, 2, 2]);
        assert!(c.discarded.iter().all(|&w| w < 1e-14));
        let r = entropy_report(&c.state, &Tripartition::abc()).unwrap();
        assert!((r.i_ab - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn tall_regions_use_the_complement_gram() {
        // A has 5 qubits against 2 + 1 qubits elsewhere
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = PureState::new(linalg::random_unit_vector(1 << 8, &mut rng), vec![2; 8]).unwrap();
        let part = Tripartition::contiguous(5, 2, 1).unwrap();
        let c = compress_tripartite(&psi, &part, Caps::unlimited(), 1e-10).unwrap();
        assert_eq!(c.state.dims(), &[8, 4, 2]);
        let a = entropy_report(&psi, &part).unwrap();
        let b = entropy_report(&c.state, &Tripartition::abc()).unwrap();
        assert!((a.i_ab - b.i_ab).abs() < 1e-10);
    }

    #[test]
    fn discarded_weight_grows_as_caps_shrink() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = PureState::new(linalg::random_unit_vector(1 << 9, &mut rng), vec![2; 9]).unwrap();
        let part = Tripartition::contiguous(3, 3, 3).unwrap();
        let mut last = -1.0;
        for cap in [8, 6, 4, 2] {
            let caps = Caps { a: cap, b: cap, c_l: 8, c_r: 1 };
            let c = compress_tripartite(&psi, &part, caps, 0.0).unwrap();
            let d = c.discarded[0] + c.discarded[1];
            assert!(d >= last - 1e-15);
            last = d;
        }
    }
}
