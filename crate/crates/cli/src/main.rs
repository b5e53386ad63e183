use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fmps_core::bounds::{check_theorem1, theorem1_bound};
use fmps_core::entropy::{entropy_profile, DENSE_CAP};
use fmps_core::harness::persist::{load_mps, mps_to_json, save_mps};
use fmps_core::harness::report::{report_bounds, ReportOptions};
use fmps_core::harness::sweep::{load_csv, run_sweep, save_outputs, to_csv_string};
use fmps_core::harness::{NRange, PartialConfig};
use fmps_core::mps::{from_state_vector, mps_inner, poly_to_mps, truncate, TruncationPolicy};
use fmps_core::polyapprox::fit_chebyshev;
use fmps_core::{discretize, FunctionSpec, MatrixProductState};

/// Function-to-MPS encodings, entanglement profiles and bound checks.
#[derive(Parser, Debug)]
#[command(name = "fmps", version)]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML sweep configuration; flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exit with status 3 when a bound is violated.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a function on the 2^N grid and print normalized amplitudes.
    Discretize(FunctionArgs),
    /// Encode a function as an MPS file.
    Encode {
        #[command(flatten)]
        function: FunctionArgs,
        /// Use the bond-dimension p+1 encoding of a degree-p Chebyshev fit.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Per-cut von Neumann entropies.
    Entropy {
        #[command(flatten)]
        source: SourceArgs,
        /// Overlap loss used for the entropy bound of a function input.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Rank-cap an MPS and report the fidelity.
    Truncate {
        #[command(flatten)]
        source: SourceArgs,
        /// Maximum bond dimension to keep.
        #[arg(long)]
        chi: Option<usize>,
        /// Relative singular-value cutoff.
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
    },
    /// Run a (function, N) sweep.
    Sweep(SweepArgs),
    /// Run every bound check and print a report.
    Bounds {
        /// Sweep CSV to report on; runs a fresh sweep when omitted.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[command(flatten)]
        args: SweepArgs,
        /// Random perturbations per perturbation check.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Args, Debug)]
struct FunctionArgs {
    /// Function spec, `family[:key=value,...]`.
    function: String,
    #[arg(short = 'n', long = "qubits")]
    n: usize,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Function spec; mutually exclusive with --mps.
    function: Option<String>,
    #[arg(short = 'n', long = "qubits")]
    n: Option<usize>,
    /// MPS file written by `encode` or `truncate`.
    #[arg(long, conflicts_with = "function")]
    mps: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// Function spec; repeat for several.
    #[arg(short = 'f', long = "function")]
    functions: Vec<String>,
    /// Qubit counts as lo:hi[:step].
    #[arg(long)]
    n_range: Option<NRange>,
    /// Truncation ranks, comma separated.
    #[arg(long, value_delimiter = ',')]
    chi: Option<Vec<usize>>,
    /// Overlap loss used for the entropy bound [default: 0.01].
    #[arg(long)]
    delta: Option<f64>,
    /// Largest N computed from dense unfoldings [default: 16].
    #[arg(long)]
    dense_cap: Option<usize>,
    /// Worker threads; 0 picks one per core [default: 0].
    #[arg(long)]
    workers: Option<usize>,
    /// Fill the runtime_ms column.
    #[arg(long)]
    timing: bool,
}

/// Bad command-line input detected after parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

enum Outcome {
    Ok,
    Violation,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn parse_spec(s: &str) -> anyhow::Result<FunctionSpec> {
    Ok(s.parse::<FunctionSpec>()?)
}

fn load_source(
    source: &SourceArgs,
) -> anyhow::Result<(MatrixProductState, Option<(FunctionSpec, usize)>)> {
    match (&source.function, &source.mps) {
        (Some(f), None) => {
            let n = source.n.ok_or_else(|| usage("a function input needs -n"))?;
            let spec = parse_spec(f)?;
            let state = discretize(&spec, &spec.default_domain(), n)?;
            Ok((from_state_vector(&state)?, Some((spec, n))))
        }
        (None, Some(path)) => Ok((load_mps(path)?, None)),
        _ => Err(usage("give either a function spec or --mps")),
    }
}

fn mps_output(cli: &Cli, mps: &MatrixProductState) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => Ok(save_mps(mps, path)?),
        None => emit(None, &(mps_to_json(mps)? + "\n")),
    }
}

impl SweepArgs {
    fn partial(&self, cli: &Cli) -> anyhow::Result<PartialConfig> {
        let file = match &cli.config {
            Some(path) => PartialConfig::load(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            functions: (!self.functions.is_empty()).then(|| self.functions.clone()),
            n_range: self.n_range,
            chi_list: self.chi.clone(),
            delta: self.delta,
            output_path: None,
            seed: cli.seed,
            dense_cap: self.dense_cap,
            workers: self.workers,
            record_timing: self.timing.then_some(true),
        };
        Ok(file.overlay(flags))
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let format = cli.format.unwrap_or(Format::Csv);
    match &cli.command {
        Command::Discretize(args) => {
            let spec = parse_spec(&args.function)?;
            let domain = spec.default_domain();
            let state = discretize(&spec, &domain, args.n)?;
            let xs = domain.grid(args.n);
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("index,x,amplitude\n");
                    for (i, (x, a)) in xs.iter().zip(state.values()).enumerate() {
                        writeln!(s, "{i},{x},{a}")?;
                    }
                    s
                }
                Format::Json => {
                    serde_json::to_string_pretty(&serde_json::json!({
                        "function": spec.to_string(),
                        "N": args.n,
                        "domain": domain,
                        "x": xs,
                        "amplitudes": state.values(),
                    }))? + "\n"
                }
            };
            emit(cli.out.as_deref(), &text)?;
        }
        Command::Encode { function, degree } => {
            let spec = parse_spec(&function.function)?;
            let domain = spec.default_domain();
            let mps = match degree {
                Some(p) => poly_to_mps(&fit_chebyshev(&spec, &domain, *p)?, function.n, &domain)?,
                None => from_state_vector(&discretize(&spec, &domain, function.n)?)?,
            };
            eprintln!("N={} bond_dims={:?}", mps.n_qubits(), mps.bond_dims());
            mps_output(cli, &mps)?;
        }
        Command::Entropy { source, delta } => {
            let (mps, origin) = load_source(source)?;
            let profile = match &origin {
                Some((spec, n)) if *n <= DENSE_CAP => {
                    entropy_profile(&discretize(spec, &spec.default_domain(), *n)?)?
                }
                _ => entropy_profile(&mps)?,
            };
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("cut,entropy,rank\n");
                    for c in &profile.per_cut {
                        writeln!(s, "{},{},{}", c.cut, c.entropy, c.rank)?;
                    }
                    s
                }
                Format::Json => serde_json::to_string_pretty(&profile)? + "\n",
            };
            emit(cli.out.as_deref(), &text)?;
            eprintln!("s_max={} argmax_cut={}", profile.s_max, profile.argmax_cut);
            if let Some((spec, n)) = &origin {
                let bound = theorem1_bound(spec, &spec.default_domain(), *n, *delta)?;
                let check = check_theorem1(&profile, bound);
                eprintln!("entropy bound={bound} satisfied={}", check.satisfied);
                if cli.strict && spec.family.is_sdr() && !check.satisfied {
                    return Ok(Outcome::Violation);
                }
            }
        }
        Command::Truncate {
            source,
            chi,
            threshold,
        } => {
            if chi.is_none() && *threshold <= 0.0 {
                return Err(usage("truncate needs --chi or a positive --threshold"));
            }
            let policy = TruncationPolicy {
                chi_max: *chi,
                sv_threshold: *threshold,
            };
            let (mps, _) = load_source(source)?;
            let result = truncate(&mps, &policy)?;
            let fidelity = mps_inner(&mps, &result.state)? / mps.norm();
            eprintln!(
                "fidelity={fidelity} discarded={} bond_dims={:?}",
                result.total_discarded(),
                result.state.bond_dims()
            );
            mps_output(cli, &result.state)?;
        }
        Command::Sweep(args) => {
            let config = args.partial(cli)?.resolve()?;
            let output = run_sweep(&config)?;
            let failed = output.rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} rows recorded errors");
            }
            let json = format == Format::Json;
            match cli.out.as_ref().or(config.output_path.as_ref()) {
                Some(path) => save_outputs(&output, path, json)?,
                None if json => emit(None, &(serde_json::to_string_pretty(&output)? + "\n"))?,
                None => emit(None, &to_csv_string(&output)?)?,
            }
            let violated = output
                .rows
                .iter()
                .any(|r| r.is_sdr() && r.metrics.as_ref().is_some_and(|m| !m.theorem1_pass));
            if cli.strict && violated {
                return Ok(Outcome::Violation);
            }
        }
        Command::Bounds {
            sweep,
            args,
            trials,
        } => {
            let output = match sweep {
                Some(path) => load_csv(path)?,
                None => run_sweep(&args.partial(cli)?.resolve()?)?,
            };
            let opts = ReportOptions {
                seed: cli.seed.unwrap_or(0),
                trials: *trials,
                ..ReportOptions::default()
            };
            let report = report_bounds(&output, &opts)?;
            emit(None, &report.to_text())?;
            if let Some(path) = &cli.out {
                let text = match format {
                    Format::Csv => report.to_csv()?,
                    Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                };
                emit(Some(path), &text)?;
            }
            if cli.strict && !report.passed() {
                return Ok(Outcome::Violation);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<fmps_core::Error>() {
        Some(
            fmps_core::Error::SpecParse { .. }
            | fmps_core::Error::InvalidConfig(_)
            | fmps_core::Error::InvalidDomain { .. },
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => {
            eprintln!("bound violated");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_map_to_one() {
        assert_eq!(exit_code(&usage("x")), 1);
        let parse: anyhow::Error = "nosuch".parse::<FunctionSpec>().unwrap_err().into();
        assert_eq!(exit_code(&parse), 1);
        assert_eq!(exit_code(&fmps_core::Error::ZeroFunction.into()), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 2);
    }
}
