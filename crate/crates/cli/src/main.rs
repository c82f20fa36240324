use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hawkes_cluster_cli::bench::{cmd_bench, default_kernels, default_methods};
use hawkes_cluster_cli::config::{Format, KernelSpec, Method, PartialConfig};
use hawkes_cluster_cli::simulate::cmd_simulate;
use hawkes_cluster_cli::verify::{cmd_verify, Suite};
use hawkes_cluster_cli::{CliError, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "hawkes-cluster", version, about = "Simulate, verify and benchmark Hawkes process clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate independent clusters and write one record per replication.
    Simulate(SimulateArgs),
    /// Run Monte Carlo verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Time the samplers over a grid of kernels (CSV, kernels as columns).
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Exponential,
    Powerlaw,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Parking,
    Branching,
    DassiosZhao,
    PoissonRace,
    Theorem2,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Parking => Method::Parking,
            MethodArg::Branching => Method::Branching,
            MethodArg::DassiosZhao => Method::DassiosZhao,
            MethodArg::PoissonRace => Method::PoissonRace,
            MethodArg::Theorem2 => Method::Theorem2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel family.
    #[arg(long, value_enum)]
    kernel: Option<Family>,
    /// Exponential kernel g(x) = alpha e^(-beta x).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Power-law kernel g(x) = c / (d + x)^2.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
}

impl KernelArgs {
    fn spec(&self) -> Result<Option<KernelSpec>, CliError> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Config(format!("--{flag} is required for this kernel")));
        match self.kernel {
            None if self.alpha.is_some() || self.beta.is_some() => {
                Ok(Some(KernelSpec::Exponential { alpha: need(self.alpha, "alpha")?, beta: need(self.beta, "beta")? }))
            }
            None if self.c.is_some() || self.d.is_some() => {
                Ok(Some(KernelSpec::Powerlaw { c: need(self.c, "c")?, d: need(self.d, "d")? }))
            }
            None => Ok(None),
            Some(Family::Exponential) => {
                Ok(Some(KernelSpec::Exponential { alpha: need(self.alpha, "alpha")?, beta: need(self.beta, "beta")? }))
            }
            Some(Family::Powerlaw) => Ok(Some(KernelSpec::Powerlaw { c: need(self.c, "c")?, d: need(self.d, "d")? })),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Number of replications.
    #[arg(long)]
    reps: Option<u64>,
    /// Master seed; replication r draws from the stream (seed, r).
    #[arg(long)]
    seed: Option<u64>,
    /// Condition every cluster on exactly this many events.
    #[arg(long)]
    cond_size: Option<u64>,
    /// Record output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary report path, pretty JSON (default: stderr).
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Samples per Monte Carlo check.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Kernel for the cross-sampler suite (default exponential alpha=3, beta=4).
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Kernels such as exp(3,4) or powerlaw(1,2), separated by ';' or given
    /// by repeating the flag (default: both four-kernel families).
    #[arg(long = "kernels", value_delimiter = ';')]
    kernels: Vec<String>,
    /// Methods to time (default: parking, dassios-zhao, branching).
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, CliError> {
    let file = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            PartialConfig::from_json(&text)?
        }
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        kernel: args.kernel.spec()?,
        method: args.method.map(Into::into),
        reps: args.reps,
        cond_size: args.cond_size,
        seed: args.seed,
        out: args.out,
        summary: args.summary,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }),
        threads: args.threads,
    };
    let cfg = file.merge(flags).finish()?;
    let summary = cmd_simulate(&cfg, output(&cfg.out)?)?;
    let text = serde_json::to_string_pretty(&summary)?;
    match &cfg.summary {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let report = cmd_verify(args.suite, args.seed, args.budget, args.kernel.spec()?, args.threads)?;
    print!("{report}");
    if let Some(p) = &args.json {
        std::fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILURE) })
}

fn bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    let kernels = if args.kernels.is_empty() {
        default_kernels()
    } else {
        args.kernels.iter().map(|k| k.parse()).collect::<Result<_, _>>()?
    };
    for k in &kernels {
        KernelSpec::build(k)?;
    }
    let methods = if args.methods.is_empty() { default_methods() } else { args.methods.into_iter().map(Into::into).collect() };
    let table = cmd_bench(&kernels, &methods, args.reps, args.seed)?;
    output(&args.out)?.write_all(table.to_csv()?.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code())
    })
}
