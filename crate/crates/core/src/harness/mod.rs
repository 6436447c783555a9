//! End-to-end experiments: ground state or generated state, per-region
//! compression, then `I`, `S_R`, `E_P`, `g`, `h` per size and a finite-size fit.

mod compress;
mod fit;

pub use compress::{compress_tripartite, Caps, Compressed};
pub use fit::{fit_series, ScalingFit, DEFAULT_EXPONENT};

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ep::{minimize_ep, EpMethod, EpOptions, SplitPolicy};
use crate::error::{Error, Result};
use crate::models::{self, ground_state, GroundStateOptions, LocalHamiltonian};
use crate::mps::{self, io, PumpsOptions, Truncation, UniformMPS};
use crate::qstate::{entropy_report, reflected_entropy_of, PureState, Tripartition};
use crate::zoo::{self, FixedPointSpec, SotsSpec, TriangleSpec};

/// A positive rational `num/den`, written `"1/3"` (or `"1"`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::Config(format!("ratio {num}/{den} must be positive")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    /// `r · n` when it is an integer.
    pub fn of(&self, n: usize) -> Option<usize> {
        let x = self.num * n as u64;
        x.is_multiple_of(self.den).then_some((x / self.den) as usize)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse ratio {s:?}; expected p/q"));
        let (p, q) = s.trim().split_once('/').unwrap_or((s.trim(), "1"));
        Ratio::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?)
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `"1/3,1/3,1/3"`.
pub fn parse_ratios(s: &str) -> Result<[Ratio; 3]> {
    let parts: Vec<Ratio> = s.split(',').map(str::parse).collect::<Result<_>>()?;
    parts
        .try_into()
        .map_err(|_| Error::Config(format!("expected three ratios, got {s:?}")))
}

pub fn equal_thirds() -> [Ratio; 3] {
    [Ratio { num: 1, den: 3 }; 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Ising,
    ObrienFendley { lambda: f64 },
    Xxz { delta: f64 },
    Ghz,
    W,
    /// Random triangle state with legs up to `max_leg`; one instance per size.
    Triangle { max_leg: usize },
    /// Random SOTS with `blocks` blocks; one instance per size.
    Sots { blocks: usize, max_leg: usize },
    /// Fixed-point MPS with `blocks` blocks of bond dimension 2.
    FixedPoint { blocks: usize },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ising => "ising",
            ModelSpec::ObrienFendley { .. } => "obf",
            ModelSpec::Xxz { .. } => "xxz",
            ModelSpec::Ghz => "ghz",
            ModelSpec::W => "w",
            ModelSpec::Triangle { .. } => "triangle",
            ModelSpec::Sots { .. } => "sots",
            ModelSpec::FixedPoint { .. } => "fpmps",
        }
    }

    pub fn hamiltonian(&self, n: usize) -> Option<Result<LocalHamiltonian>> {
        match *self {
            ModelSpec::Ising => Some(models::build_ising(n)),
            ModelSpec::ObrienFendley { lambda } => Some(models::build_obrien_fendley(n, lambda)),
            ModelSpec::Xxz { delta } => Some(models::build_xxz(n, delta)),
            _ => None,
        }
    }

    /// Size grid used when none is given.
    pub fn default_sizes(&self) -> Vec<usize> {
        match self {
            ModelSpec::Xxz { .. } => vec![12, 18, 24],
            ModelSpec::FixedPoint { .. } => vec![6, 9, 12],
            _ => vec![9, 12, 15, 18, 21],
        }
    }

    /// The generated states of these models do not depend on `N`.
    pub fn is_three_party(&self) -> bool {
        matches!(self, ModelSpec::Triangle { .. } | ModelSpec::Sots { .. })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Ed,
    Mps,
    Import,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" => Ok(Backend::Ed),
            "mps" => Ok(Backend::Mps),
            "import" => Ok(Backend::Import),
            _ => Err(Error::Config(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub sizes: Vec<usize>,
    pub ratios: [Ratio; 3],
    pub backend: Backend,
    /// State or tensor file for the import backend.
    pub input: Option<PathBuf>,
    pub caps: Caps,
    /// Schmidt values at or below this are dropped during compression.
    pub epsilon: f64,
    pub ep: EpOptions,
    /// Overrides the default `Budget(c_l · c_r)` split of the purifier.
    pub split: Option<SplitPolicy>,
    pub ground: GroundStateOptions,
    /// Bond dimension for the variational MPS backend; scheduled from `N` when absent.
    pub bond_dim: Option<usize>,
    pub seed: u64,
    /// Concurrent size points; 0 uses the rayon default.
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            sizes: model.default_sizes(),
            model,
            ratios: equal_thirds(),
            backend: Backend::Ed,
            input: None,
            caps: Caps::default(),
            epsilon: 1e-8,
            ep: EpOptions { method: EpMethod::Lbfgs, max_iterations: 4000, ..Default::default() },
            split: None,
            ground: GroundStateOptions::default(),
            bond_dim: None,
            seed: 0,
            threads: 0,
        }
    }

    pub fn region_sizes(&self, n: usize) -> Result<[usize; 3]> {
        let mut out = [0; 3];
        for (k, r) in self.ratios.iter().enumerate() {
            out[k] = r.of(n).filter(|&x| x > 0).ok_or_else(|| {
                Error::Config(format!("ratio {r} of N = {n} is not a positive integer"))
            })?;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("empty size list".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("sizes {:?} are not ascending", self.sizes)));
        }
        let total = self.ratios.iter().fold((0u64, 1u64), |(p, q), r| {
            let (p, q) = (p * r.den + r.num * q, q * r.den);
            let g = gcd(p, q);
            (p / g, q / g)
        });
        if total != (1, 1) {
            return Err(Error::Config(format!(
                "ratios {} do not sum to 1",
                self.ratios.map(|r| r.to_string()).join(",")
            )));
        }
        for &n in &self.sizes {
            self.region_sizes(n)?;
            if self.model.hamiltonian(n).is_some() && self.backend == Backend::Ed && n > 24 {
                return Err(Error::Config(format!("exact diagonalisation is limited to N ≤ 24, got {n}")));
            }
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} outside [0, 1)", self.epsilon)));
        }
        if self.backend == Backend::Import && self.input.is_none() {
            return Err(Error::Config("the import backend needs an input file".into()));
        }
        self.caps.validate()
    }

    fn ep_options(&self, n: usize) -> EpOptions {
        EpOptions {
            split: self.split.unwrap_or(SplitPolicy::Budget(self.caps.c())),
            seed: self.seed.wrapping_add(n as u64),
            ..self.ep
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    /// Measured, but the purification optimiser stopped above its gradient tolerance.
    NotConverged,
    Failed,
}

/// Measured quantities in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub g: f64,
    pub h: f64,
    pub i: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub e_p: f64,
    pub s_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpDiagnostics {
    pub raw_objective: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub split: (usize, usize),
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceDiagnostics {
    /// Ground or variational energy, when the state came from a Hamiltonian.
    pub energy: Option<f64>,
    pub residual: Option<f64>,
    pub degenerate: Option<bool>,
    pub sector: Option<String>,
    pub bond_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub n: usize,
    pub ratios: [Ratio; 3],
    pub sizes: [usize; 3],
    pub status: Status,
    pub measures: Option<Measures>,
    /// Party dimensions after compression.
    pub dims: Option<[usize; 3]>,
    pub discarded: Option<[f64; 3]>,
    pub ep: Option<EpDiagnostics>,
    pub source: Option<SourceDiagnostics>,
    pub error: Option<String>,
    /// Seconds spent on the point; kept out of persisted output.
    #[serde(skip)]
    pub wall_time: f64,
}

impl ResultRecord {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Checks `g = 2E_P − I` and `h = S_R − I` as stored, and the sign bounds.
    pub fn check_bookkeeping(&self) -> Result<()> {
        let Some(m) = self.measures else { return Ok(()) };
        let bad = |what: &str| Err(Error::Domain(format!("N = {}: {what}", self.n)));
        if (m.g - (2.0 * m.e_p - m.i)).abs() > 1e-12 {
            return bad("g ≠ 2E_P − I");
        }
        if (m.h - (m.s_r - m.i)).abs() > 1e-12 {
            return bad("h ≠ S_R − I");
        }
        if m.g < -1e-6 || m.h < -1e-9 {
            return bad("negative g or h");
        }
        Ok(())
    }
}

/// The state handed to the measurements, already on `(Ã, B̃, C̃)`.
struct Prepared {
    state: PureState,
    discarded: [f64; 3],
    source: SourceDiagnostics,
}

fn no_source() -> SourceDiagnostics {
    SourceDiagnostics { energy: None, residual: None, degenerate: None, sector: None, bond_dim: None }
}

/// Linear interpolation of the bond-dimension schedule, `D = 12` at `N = 24`
/// to `D = 26` at `N = 84`, clamped to `[8, 32]`.
pub fn scheduled_bond_dim(n: usize) -> usize {
    let d = 12.0 + (n as f64 - 24.0) * 14.0 / 60.0;
    d.round().clamp(8.0, 32.0) as usize
}

fn fixed_point_spec(blocks: usize, seed: u64) -> Result<FixedPointSpec> {
    if blocks == 0 {
        return Err(Error::Config("fixed-point MPS needs at least one block".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectra = (0..blocks)
        .map(|_| {
            let x: f64 = rng.random_range(0.55..0.95);
            vec![x, 1.0 - x]
        })
        .collect();
    Ok(FixedPointSpec { spectra, weights: None })
}

impl ExperimentConfig {
    fn truncation_rules(&self) -> [Truncation; 3] {
        [
            Truncation::capped(self.caps.a, self.epsilon),
            Truncation::capped(self.caps.b, self.epsilon),
            Truncation::capped(self.caps.c(), self.epsilon),
        ]
    }

    fn prepare_mps(&self, mps: &UniformMPS, sizes: [usize; 3], source: SourceDiagnostics) -> Result<Prepared> {
        let tri = mps::coarse_tripartite(mps, sizes, self.truncation_rules())?;
        Ok(Prepared { state: mps::dense_export(&tri)?, discarded: tri.discarded, source })
    }

    fn prepare_dense(&self, state: &PureState, part: &Tripartition, source: SourceDiagnostics) -> Result<Prepared> {
        let c = compress_tripartite(state, part, self.caps, self.epsilon)?;
        Ok(Prepared { state: c.state, discarded: c.discarded, source })
    }

    fn prepare(&self, n: usize, sizes: [usize; 3]) -> Result<Prepared> {
        let part = Tripartition::contiguous(sizes[0], sizes[1], sizes[2])?;
        let seed = self.seed.wrapping_add(n as u64);
        if self.backend == Backend::Import {
            let path = self.input.as_deref().ok_or_else(|| Error::Config("no input file".into()))?;
            return match io::read_mps(path) {
                Ok(m) => self.prepare_mps(&m.with_sites(n)?, sizes, no_source()),
                Err(_) => {
                    let state = io::read_state(path)?;
                    let part = if state.num_subsystems() == 3 { Tripartition::abc() } else { part };
                    self.prepare_dense(&state, &part, no_source())
                }
            };
        }
        if let Some(h) = self.model.hamiltonian(n) {
            let h = h?;
            return match self.backend {
                Backend::Mps => {
                    let bond = self.bond_dim.unwrap_or_else(|| scheduled_bond_dim(n));
                    let opts = PumpsOptions { bond_dim: bond, seed, ..Default::default() };
                    let res = mps::pumps_optimize(&h, n, &opts)?;
                    let source = SourceDiagnostics {
                        energy: Some(res.energy),
                        residual: Some(res.gradient_norm),
                        degenerate: None,
                        sector: None,
                        bond_dim: Some(bond),
                    };
                    self.prepare_mps(&res.mps, sizes, source)
                }
                _ => {
                    let gs = ground_state(&h, &GroundStateOptions { seed: self.seed, ..self.ground })?;
                    let source = SourceDiagnostics {
                        energy: Some(gs.energy),
                        residual: Some(gs.residual_norm),
                        degenerate: Some(gs.degenerate),
                        sector: Some(format!("{:?}", gs.sector)),
                        bond_dim: None,
                    };
                    self.prepare_dense(&gs.state, &part, source)
                }
            };
        }
        match (&self.model, self.backend) {
            (ModelSpec::Ghz, Backend::Mps) => self.prepare_mps(&UniformMPS::ghz(n)?, sizes, no_source()),
            (ModelSpec::Ghz, _) => self.prepare_dense(&zoo::make_ghz_n(2, n)?, &part, no_source()),
            (ModelSpec::W, Backend::Mps) => {
                Err(Error::Config("the W state has no periodic uniform MPS form".into()))
            }
            (ModelSpec::W, _) => self.prepare_dense(&zoo::make_w_n(n)?, &part, no_source()),
            (&ModelSpec::Triangle { max_leg }, _) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let spec = TriangleSpec::random(&mut rng, max_leg, true);
                let state = zoo::make_triangle(&spec, rng.random())?;
                self.prepare_dense(&state, &Tripartition::abc(), no_source())
            }
            (&ModelSpec::Sots { blocks, max_leg }, _) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let spec = SotsSpec::random(&mut rng, blocks, max_leg);
                let state = zoo::make_sots(&spec, rng.random())?;
                self.prepare_dense(&state, &Tripartition::abc(), no_source())
            }
            (&ModelSpec::FixedPoint { blocks }, backend) => {
                let mps = zoo::make_fixed_point_mps(&fixed_point_spec(blocks, self.seed)?, n)?;
                if backend == Backend::Mps {
                    self.prepare_mps(&mps, sizes, no_source())
                } else {
                    self.prepare_dense(&mps.to_dense()?, &part, no_source())
                }
            }
            _ => unreachable!("Hamiltonian models handled above"),
        }
    }
}

/// Runs the pipeline at one size. Failures become a `Failed` record.
pub fn run_point(config: &ExperimentConfig, n: usize) -> ResultRecord {
    let start = Instant::now();
    let sizes = config.region_sizes(n).unwrap_or([0; 3]);
    let mut rec = ResultRecord {
        n,
        ratios: config.ratios,
        sizes,
        status: Status::Failed,
        measures: None,
        dims: None,
        discarded: None,
        ep: None,
        source: None,
        error: None,
        wall_time: 0.0,
    };
    if let Err(e) = measure(config, n, &mut rec) {
        rec.status = Status::Failed;
        rec.error = Some(e.to_string());
    }
    rec.wall_time = start.elapsed().as_secs_f64();
    info!("N = {n}: {:?} in {:.1} s", rec.status, rec.wall_time);
    rec
}

fn measure(config: &ExperimentConfig, n: usize, rec: &mut ResultRecord) -> Result<()> {
    let sizes = config.region_sizes(n)?;
    let prep = config.prepare(n, sizes)?;
    rec.source = Some(prep.source);
    rec.discarded = Some(prep.discarded);
    let s3 = prep.state;
    rec.dims = Some([s3.dims()[0], s3.dims()[1], s3.dims()[2]]);
    let abc = Tripartition::abc();
    let rep = entropy_report(&s3, &abc)?;
    let s_r = reflected_entropy_of(&s3, &abc)?;
    let (ep, _) = minimize_ep(&s3, &config.ep_options(n))?;
    rec.measures = Some(Measures {
        g: 2.0 * ep.ep - rep.i_ab,
        h: s_r - rep.i_ab,
        i: rep.i_ab,
        s_a: rep.s_a,
        s_b: rep.s_b,
        s_ab: rep.s_ab,
        e_p: ep.ep,
        s_r,
    });
    rec.ep = Some(EpDiagnostics {
        raw_objective: ep.raw_objective,
        iterations: ep.iterations,
        gradient_norm: ep.final_gradient_norm,
        split: ep.split_dims,
        capped: ep.capped,
    });
    rec.status = if ep.converged { Status::Converged } else { Status::NotConverged };
    Ok(())
}

/// Fits of `g` and `h`, or why they failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub g: Option<ScalingFit>,
    pub h: Option<ScalingFit>,
    pub errors: Vec<String>,
}

/// `h` uses every measured point, since `S_R` and `I` are computed directly;
/// `g` only points whose purification optimiser converged.
pub fn fit_records(records: &[ResultRecord]) -> FitSummary {
    let series = |f: fn(&Measures) -> f64, converged_only: bool| -> Vec<(usize, f64)> {
        records
            .iter()
            .filter(|r| r.is_converged() || !converged_only)
            .filter_map(|r| r.measures.as_ref().map(|m| (r.n, f(m))))
            .collect()
    };
    let mut errors = Vec::new();
    let mut run = |name: &str, pts: Vec<(usize, f64)>| match fit_series(name, &pts) {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    };
    let g = run("g", series(|m| m.g, true));
    let h = run("h", series(|m| m.h, false));
    FitSummary { g, h, errors }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<ResultRecord>,
    pub fits: FitSummary,
}

impl ExperimentOutput {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(ResultRecord::is_converged)
    }
}

/// One JSON object per line.
pub fn records_to_jsonl(records: &[ResultRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Plot table with columns `N,g,h,I` (measured points only).
pub fn records_to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from("N,g,h,I\n");
    for r in records {
        if let Some(m) = r.measures {
            out.push_str(&format!("{},{},{},{}\n", r.n, m.g, m.h, m.i));
        }
    }
    out
}

/// Runs every size (concurrently up to `config.threads`), in ascending order
/// of output, and fits the converged points.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let records: Vec<ResultRecord> =
        pool.install(|| config.sizes.par_iter().map(|&n| run_point(config, n)).collect());
    let fits = fit_records(&records);
    Ok(ExperimentOutput { records, fits })
}

/// Companion file paths for a primary output: `(jsonl, csv, fit)`.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (out.with_extension("jsonl"), out.with_extension("csv"), out.with_extension("fit.json"))
}

/// Writes the records as JSON lines, the CSV plot table and the fit summary.
pub fn persist(out: &Path, output: &ExperimentOutput) -> Result<()> {
    let (jsonl, csv, fit) = output_paths(out);
    let mut f = std::fs::File::create(jsonl)?;
    f.write_all(records_to_jsonl(&output.records)?.as_bytes())?;
    std::fs::write(csv, records_to_csv(&output.records))?;
    let mut summary = serde_json::to_string_pretty(&output.fits)?;
    summary.push('\n');
    std::fs::write(fit, summary)?;
    Ok(())
}

#[cfg(test)]
mod tests;
