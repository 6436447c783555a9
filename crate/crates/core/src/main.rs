use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use triparticle::check::run_checks;
use triparticle::ep::{EpMethod, SplitPolicy};
use triparticle::harness::{
    fit_records, output_paths, parse_ratios, persist, records_from_jsonl, records_to_csv,
    records_to_jsonl, run_experiment, run_point, Caps, ExperimentConfig, ExperimentOutput,
    ModelSpec,
};
use triparticle::{Error, Result};

#[derive(Parser)]
#[command(name = "triparticle", version, about = "Tripartite entanglement measures g = 2E_P − I and h = S_R − I")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every size of an experiment, write records, plot table and fit.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        /// Primary output file; companions get `.csv`/`.jsonl` and `.fit.json` extensions.
        #[arg(long, default_value = "results.jsonl")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Run a single size and print its record.
    Point {
        #[command(flatten)]
        exp: ExpArgs,
        /// Ring size.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Refit stored JSON-lines records.
    Fit {
        /// Records written by `run`.
        records: PathBuf,
        /// Where to write the fit summary (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded property suites.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per suite.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Nlcg,
    Lbfgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    Ising,
    Obf,
    Xxz,
    Ghz,
    W,
    Triangle,
    Sots,
    Fpmps,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long, value_enum, default_value_t = ModelName::Ising)]
    model: ModelName,
    /// Three-site coupling of the O'Brien–Fendley chain.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// XXZ anisotropy in [−1, 1).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Blocks of the SOTS or fixed-point MPS models.
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    /// Largest leg dimension of random triangle and SOTS states.
    #[arg(long, default_value_t = 3)]
    max_leg: usize,
    /// Comma-separated ring sizes; model default when absent.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value = "1/3,1/3,1/3")]
    ratios: String,
    /// `a,b,c_l,c_r` rank caps.
    #[arg(long, default_value = "64,64,12,12")]
    caps: String,
    /// Schmidt-value threshold of the compression.
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    /// Gradient-norm tolerance of the E_P optimiser.
    #[arg(long, default_value_t = 1e-4)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ed")]
    backend: String,
    /// State or MPS tensor file for `--backend import`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Purifier split: `budget`, `balanced`, `saturating` or `LxR`.
    #[arg(long)]
    split: Option<String>,
    /// Search direction of the E_P optimiser.
    #[arg(long, value_enum, default_value_t = Method::Lbfgs)]
    method: Method,
    /// Random starts of the E_P optimiser besides the identity.
    #[arg(long)]
    restarts: Option<usize>,
    /// Use the symmetric ground state when the two lowest levels are degenerate.
    #[arg(long)]
    cat: bool,
    /// Bond dimension of the variational MPS backend.
    #[arg(long)]
    bond_dim: Option<usize>,
}

fn parse_caps(s: &str) -> Result<Caps> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Config(format!("bad cap {x:?}"))))
        .collect::<Result<_>>()?;
    match v[..] {
        [a, b, c_l, c_r] => Ok(Caps { a, b, c_l, c_r }),
        _ => Err(Error::Config(format!("expected four caps a,b,c_l,c_r, got {s:?}"))),
    }
}

fn parse_split(s: &str, caps: Caps) -> Result<SplitPolicy> {
    match s {
        "budget" => Ok(SplitPolicy::Budget(caps.c())),
        "balanced" => Ok(SplitPolicy::Balanced),
        "saturating" => Ok(SplitPolicy::Saturating),
        _ => {
            let bad = || Error::Config(format!("bad split {s:?}"));
            let (l, r) = s.split_once('x').ok_or_else(bad)?;
            Ok(SplitPolicy::Explicit(l.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?))
        }
    }
}

fn threads() -> Result<usize> {
    match std::env::var("TRIPARTICLE_THREADS") {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("TRIPARTICLE_THREADS={v:?} is not a count"))),
        Err(_) => Ok(0),
    }
}

impl ExpArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let model = match self.model {
            ModelName::Ising => ModelSpec::Ising,
            ModelName::Obf => ModelSpec::ObrienFendley { lambda: self.lambda },
            ModelName::Xxz => ModelSpec::Xxz { delta: self.delta },
            ModelName::Ghz => ModelSpec::Ghz,
            ModelName::W => ModelSpec::W,
            ModelName::Triangle => ModelSpec::Triangle { max_leg: self.max_leg },
            ModelName::Sots => ModelSpec::Sots { blocks: self.blocks, max_leg: self.max_leg },
            ModelName::Fpmps => ModelSpec::FixedPoint { blocks: self.blocks },
        };
        let mut c = ExperimentConfig::new(model);
        if let Some(s) = &self.sizes {
            c.sizes = s.clone();
        }
        c.ratios = parse_ratios(&self.ratios)?;
        c.caps = parse_caps(&self.caps)?;
        c.epsilon = self.epsilon;
        c.ep.eta = self.eta;
        c.ep.method = match self.method {
            Method::Nlcg => EpMethod::Nlcg,
            Method::Lbfgs => EpMethod::Lbfgs,
        };
        if let Some(r) = self.restarts {
            c.ep.restarts = r;
        }
        c.seed = self.seed;
        c.backend = self.backend.parse()?;
        c.input = self.input.clone();
        c.split = self.split.as_deref().map(|s| parse_split(s, c.caps)).transpose()?;
        c.ground.cat_state = self.cat;
        c.bond_dim = self.bond_dim;
        c.threads = threads()?;
        Ok(c)
    }
}

fn render(records: &[triparticle::harness::ResultRecord], format: Format) -> Result<String> {
    match format {
        Format::Jsonl => records_to_jsonl(records),
        Format::Csv => Ok(records_to_csv(records)),
    }
}

fn status_code(output: &ExperimentOutput) -> ExitCode {
    if output.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { exp, out, format } => {
            let config = exp.config()?;
            let output = run_experiment(&config)?;
            persist(&out, &output)?;
            if let Format::Csv = format {
                // the requested format takes the primary path
                let (jsonl, _, _) = output_paths(&out);
                if jsonl != out {
                    std::fs::write(&out, records_to_csv(&output.records))?;
                }
            }
            for r in &output.records {
                eprintln!("N = {:>2}: {:?} ({:.1} s)", r.n, r.status, r.wall_time);
            }
            Ok(status_code(&output))
        }
        Command::Point { exp, n, format } => {
            let config = exp.config()?;
            config.validate()?;
            let rec = run_point(&config, n);
            print!("{}", render(std::slice::from_ref(&rec), format)?);
            Ok(match rec.status {
                triparticle::harness::Status::Converged => ExitCode::SUCCESS,
                triparticle::harness::Status::NotConverged => ExitCode::from(2),
                triparticle::harness::Status::Failed => {
                    error!("{}", rec.error.unwrap_or_default());
                    ExitCode::from(2)
                }
            })
        }
        Command::Fit { records, out } => {
            let recs = records_from_jsonl(&std::fs::read_to_string(records)?)?;
            let fits = fit_records(&recs);
            let text = serde_json::to_string_pretty(&fits)? + "\n";
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(if fits.errors.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Check { seed, count, out } => {
            let results = run_checks(seed, count);
            let text: String = results.iter().map(|r| format!("{r}\n")).collect();
            print!("{text}");
            if let Some(p) = out {
                std::fs::write(p, &text)?;
            }
            Ok(if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
