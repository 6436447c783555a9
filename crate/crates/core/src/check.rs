//! Seeded property suites behind the `check` subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ep::{g_decomposition_residual, g_measure, EpOptions, PurificationProblem, SplitPolicy};
use crate::error::Result;
use crate::harness::fit_series;
use crate::linalg;
use crate::mps::{coarse_tripartite, dense_export, Truncation, UniformMPS};
use crate::qstate::{
    conditional_mutual_information, entropy_report, h_cmi_forms, h_measure, reflected_entropy_of,
    PureState, Tripartition,
};
use crate::zoo::{self, SotsSpec, TriangleSpec};

/// Outcome of one suite: the worst value seen against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub worst: f64,
    pub bound: f64,
    pub passed: bool,
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: worst {:.3e} (bound {:.0e})", self.name, self.worst, self.bound)
    }
}

fn suite(name: &'static str, bound: f64, values: Result<Vec<f64>>) -> SuiteResult {
    match values {
        Ok(v) => {
            let worst = v.iter().fold(0.0f64, |a, &x| a.max(x));
            SuiteResult { name, worst, bound, passed: worst <= bound && v.iter().all(|x| x.is_finite()) }
        }
        Err(_) => SuiteResult { name, worst: f64::NAN, bound, passed: false },
    }
}

fn random_state(rng: &mut ChaCha8Rng, dims: Vec<usize>) -> Result<PureState> {
    let n = dims.iter().product();
    PureState::new(linalg::random_unit_vector(n, rng), dims)
}

/// Runs every suite with `count` samples each, seeded by `seed`.
pub fn run_checks(seed: u64, count: usize) -> Vec<SuiteResult> {
    let abc = Tripartition::abc();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sat = EpOptions { split: SplitPolicy::Saturating, seed, ..Default::default() };

    let triangles: Vec<(TriangleSpec, u64)> =
        (0..count).map(|k| (TriangleSpec::random(&mut rng, 3, true), seed + k as u64)).collect();
    out.push(suite(
        "triangle states have g = 0",
        1e-5,
        triangles
            .iter()
            .map(|(s, k)| Ok(g_measure(&zoo::make_triangle(s, *k)?, &abc, &sat)?.g.abs()))
            .collect(),
    ));
    out.push(suite(
        "triangle states have h = 0",
        1e-9,
        triangles
            .iter()
            .map(|(s, k)| Ok(h_measure(&zoo::make_triangle(s, *k)?, &abc)?.abs()))
            .collect(),
    ));
    out.push(suite(
        "SOTS have h = 0",
        1e-9,
        (0..count)
            .map(|k| {
                let spec = SotsSpec::random(&mut rng, 2, 2);
                Ok(h_measure(&zoo::make_sots(&spec, seed + k as u64)?, &abc)?.abs())
            })
            .collect(),
    ));
    out.push(suite(
        "S_R ≥ I",
        1e-10,
        (0..count)
            .map(|_| {
                let psi = random_state(&mut rng, vec![2, 3, 4])?;
                Ok((entropy_report(&psi, &abc)?.i_ab - reflected_entropy_of(&psi, &abc)?).max(0.0))
            })
            .collect(),
    ));
    out.push(suite(
        "four CMI forms of h agree",
        1e-9,
        (0..count)
            .map(|_| {
                let psi = random_state(&mut rng, vec![2, 2, 3])?;
                let f = h_cmi_forms(&psi, &abc)?;
                let h = h_measure(&psi, &abc)?;
                Ok(f.iter().map(|x| (x - h).abs()).fold(0.0, f64::max))
            })
            .collect(),
    ));
    out.push(suite(
        "strong subadditivity",
        1e-10,
        (0..count)
            .map(|_| {
                let psi = random_state(&mut rng, vec![2, 2, 2, 3])?;
                Ok((-conditional_mutual_information(&psi, &[0], &[1], &[2, 3])?).max(0.0))
            })
            .collect(),
    ));
    out.push(suite(
        "g decompositions of arbitrary purifications",
        1e-9,
        (0..count)
            .map(|_| {
                let psi = random_state(&mut rng, vec![2, 2, 2, 2])?;
                let (a, b) = g_decomposition_residual(&PurificationProblem::new(&psi)?)?;
                Ok(a.max(b))
            })
            .collect(),
    ));
    out.push(suite(
        "untruncated coarse-graining preserves entropies",
        1e-9,
        (0..count.min(10))
            .map(|_| {
                let mps = UniformMPS::random(2, 3, 9, &mut rng)?;
                let tri = coarse_tripartite(&mps, [3, 3, 3], [Truncation::exact(); 3])?;
                let a = entropy_report(&dense_export(&tri)?, &abc)?;
                let b = entropy_report(&mps.to_dense()?, &Tripartition::contiguous(3, 3, 3)?)?;
                Ok((a.s_a - b.s_a).abs().max((a.s_b - b.s_b).abs()).max((a.s_ab - b.s_ab).abs()))
            })
            .collect(),
    ));
    out.push(suite(
        "power-law fit recovers its generator",
        1e-6,
        fit_series("h", &[12, 15, 18, 21, 24].map(|n: usize| (n, 0.1155 + 2.0 / (n * n) as f64)))
            .map(|f| vec![(f.asymptote - 0.1155).abs()]),
    ));
    out
}
