use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcloak_core::bench::{self, Algorithm, TrialConfig};
use qcloak_core::circuit::QuantumCircuit;
use qcloak_core::correct::Corrector;
use qcloak_core::metrics::MetricReport;
use qcloak_core::obfuscate::{obfuscate, random_plan_on, GatePool};
use qcloak_core::transpile::{transpile_with, BasisSet};
use qcloak_core::{io as formats, key, qasm, sim};

/// Obfuscate quantum circuits ahead of untrusted compilation and restore
/// their measured outputs afterwards.
#[derive(Parser)]
#[command(name = "qcloak", version)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Append encryptor gates and write the key.
    Obfuscate(ObfuscateArgs),
    /// Lower to a basis gate set and optimise, as an external compiler would.
    Transpile(TranspileArgs),
    /// Sample measurement counts from the ideal statevector.
    Simulate(SimulateArgs),
    /// Undo the encryptor gates on measured counts.
    Correct(CorrectArgs),
    /// Score obfuscated counts with TVD and DFC.
    Evaluate(EvaluateArgs),
    /// Run the randomized benchmark experiment.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ObfuscateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Gate pool JSON; defaults to the six-gate pool {x, cx, swap, ccx, cswap, s}.
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Explicit insertion plan JSON.
    #[arg(long, conflicts_with_all = ["num_gates", "seed"])]
    plan: Option<PathBuf>,
    /// Number of random encryptor gates, placed on measured qubits.
    #[arg(long, default_value_t = 5)]
    num_gates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    key: PathBuf,
}

#[derive(Args)]
struct TranspileArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "cx,rz,rx,x,p")]
    basis: String,
    /// Skip peephole optimisation.
    #[arg(long)]
    no_opt: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the exact distribution, ordered by outcome index.
    #[arg(long)]
    probs: Option<PathBuf>,
}

#[derive(Args)]
struct CorrectArgs {
    #[arg(long)]
    counts: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    pool: Option<PathBuf>,
    /// The obfuscated circuit, for its measurement map.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    orig: PathBuf,
    #[arg(long)]
    obfus: PathBuf,
    #[arg(long)]
    correct_output: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoChoice {
    Bv,
    Grover,
    Qaoa,
    Shor,
    Hhl,
    All,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    algo: AlgoChoice,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 5)]
    num_gates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, default_value = "cx,rz,rx,x,p")]
    basis: String,
    #[arg(long)]
    no_opt: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

enum Failure {
    Usage(anyhow::Error),
    Invalid(anyhow::Error),
    Unsound(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Unsound(_) => 3,
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn usage(self, context: impl FnOnce() -> String) -> CliResult<T>;
    fn invalid(self, context: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::Usage(e.into().context(context())))
    }

    fn invalid(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::Invalid(e.into().context(context())))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).usage(|| format!("cannot read {}", path.display()))
}

fn write(path: Option<&Path>, contents: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, contents).usage(|| format!("cannot write {}", p.display())),
        None => io::stdout()
            .write_all(contents.as_bytes())
            .usage(|| "cannot write to stdout".into()),
    }
}

fn read_circuit(path: &Path) -> CliResult<QuantumCircuit> {
    let text = read(path)?;
    match qasm::parse_with_warnings(&text) {
        Ok(out) => {
            for w in &out.warnings {
                log::warn!("{}:{w}", path.display());
            }
            Ok(out.circuit)
        }
        Err(errs) => {
            let lines: Vec<String> = errs.errors().map(|d| format!("{}:{d}", path.display())).collect();
            Err(Failure::Invalid(anyhow!(lines.join("\n"))))
        }
    }
}

fn read_pool(path: Option<&Path>) -> CliResult<GatePool> {
    match path {
        Some(p) => formats::pool_from_json(&read(p)?).invalid(|| format!("invalid pool file {}", p.display())),
        None => Ok(GatePool::canonical()),
    }
}

fn parse_basis(text: &str) -> CliResult<BasisSet> {
    text.parse().usage(|| format!("invalid --basis {text:?}"))
}

#[cfg(unix)]
fn is_world_readable(path: &Path) -> io::Result<bool> {
    use std::os::unix::fs::PermissionsExt;
    let mode = fs::metadata(path)?.permissions().mode();
    Ok(mode & 0o004 != 0)
}

#[cfg(not(unix))]
fn is_world_readable(_path: &Path) -> io::Result<bool> {
    Ok(false)
}

fn write_key(path: &Path, text: &str) -> CliResult {
    let mut options = fs::OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        options.mode(0o600);
    }
    let mut file = options.open(path).usage(|| format!("cannot write {}", path.display()))?;
    writeln!(file, "{text}").usage(|| format!("cannot write {}", path.display()))?;
    if is_world_readable(path).unwrap_or(false) {
        log::warn!("key file {} is world-readable; the key is the only secret", path.display());
    }
    Ok(())
}

fn cmd_obfuscate(args: ObfuscateArgs) -> CliResult {
    let circuit = read_circuit(&args.input)?;
    let pool = read_pool(args.pool.as_deref())?;
    let plan = match &args.plan {
        Some(p) => formats::plan_from_json(&read(p)?).invalid(|| format!("invalid plan file {}", p.display()))?,
        None => {
            let measured = circuit.measurement_map().measured_qubits();
            random_plan_on(&pool, &measured, args.num_gates, args.seed)
                .invalid(|| "cannot draw a plan over the measured qubits".into())?
        }
    };
    let (obf, k) = obfuscate(&circuit, &pool, &plan).invalid(|| "plan does not fit the pool and circuit".into())?;
    // Refuse keys that could never be corrected.
    Corrector::new(&k, &pool, &circuit.measurement_map()).invalid(|| "plan is not correctable".into())?;
    write_key(&args.key, &key::encode(&k))?;
    write(args.out.as_deref(), &qasm::emit(&obf))
}

fn cmd_transpile(args: TranspileArgs) -> CliResult {
    let circuit = read_circuit(&args.input)?;
    let basis = parse_basis(&args.basis)?;
    let compiled = transpile_with(&circuit, &basis, !args.no_opt).invalid(|| "transpilation failed".into())?;
    log::info!("{} gates -> {} gates", circuit.gate_count(), compiled.gate_count());
    write(args.out.as_deref(), &qasm::emit(&compiled))
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let circuit = read_circuit(&args.input)?;
    let probs = sim::circuit_probabilities(&circuit).invalid(|| "simulation failed".into())?;
    if let Some(p) = &args.probs {
        write(Some(p), &formats::probabilities_to_json(&probs))?;
    }
    let counts = sim::sample(&probs, args.shots, args.seed);
    write(args.out.as_deref(), &formats::counts_to_json(&counts))
}

fn cmd_correct(args: CorrectArgs) -> CliResult {
    let circuit = read_circuit(&args.input)?;
    let pool = read_pool(args.pool.as_deref())?;
    let counts = formats::counts_from_json(&read(&args.counts)?)
        .invalid(|| format!("invalid counts file {}", args.counts.display()))?;
    let key_text = read(&args.key)?;
    let k = key::decode(formats::key_from_file_text(&key_text), &pool, circuit.num_qubits)
        .invalid(|| format!("invalid key file {}", args.key.display()))?;
    let corrector =
        Corrector::new(&k, &pool, &circuit.measurement_map()).invalid(|| "key cannot be applied".into())?;
    let corrected = corrector.correct_counts(&counts).invalid(|| "counts do not match the circuit".into())?;
    write(args.out.as_deref(), &formats::counts_to_json(&corrected))
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult {
    let orig = formats::counts_from_json(&read(&args.orig)?)
        .invalid(|| format!("invalid counts file {}", args.orig.display()))?;
    let obfus = formats::counts_from_json(&read(&args.obfus)?)
        .invalid(|| format!("invalid counts file {}", args.obfus.display()))?;
    let report = MetricReport::evaluate(&orig, &obfus, &args.correct_output).invalid(|| "cannot score".into())?;
    let json = serde_json::to_string(&report).expect("report serialises");
    write(args.out.as_deref(), &format!("{json}\n"))
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let pool = read_pool(args.pool.as_deref())?;
    let config = TrialConfig {
        num_gates: args.num_gates,
        shots: args.shots,
        basis: parse_basis(&args.basis)?,
        optimize: !args.no_opt,
    };
    let algorithms: Vec<Algorithm> = match args.algo {
        AlgoChoice::Bv => vec![Algorithm::Bv],
        AlgoChoice::Grover => vec![Algorithm::Grover],
        AlgoChoice::Qaoa => vec![Algorithm::Qaoa],
        AlgoChoice::Shor => vec![Algorithm::Shor],
        AlgoChoice::Hhl => vec![Algorithm::Hhl],
        AlgoChoice::All => Algorithm::ALL.to_vec(),
    };
    fs::create_dir_all(&args.out_dir).usage(|| format!("cannot create {}", args.out_dir.display()))?;
    let single = algorithms.len() == 1;
    let mut summaries = Vec::new();
    for algorithm in algorithms {
        let benchmark = algorithm.default_benchmark();
        let experiment = bench::run_experiment(&benchmark, args.trials, &pool, &config, args.seed)
            .invalid(|| format!("{algorithm} experiment failed"))?;
        let dir = if single {
            args.out_dir.clone()
        } else {
            args.out_dir.join(algorithm.name())
        };
        fs::create_dir_all(&dir).usage(|| format!("cannot create {}", dir.display()))?;
        let csv_path = dir.join("trials.csv");
        let file = fs::File::create(&csv_path).usage(|| format!("cannot write {}", csv_path.display()))?;
        bench::write_trials_csv(file, &experiment.trials).usage(|| format!("cannot write {}", csv_path.display()))?;
        let s = &experiment.summary;
        eprintln!(
            "{:<7} median TVD {:.4}  median DFC {:+.4}  sound {}",
            s.algorithm, s.median_tvd, s.median_dfc, s.correction_soundness
        );
        summaries.push(experiment.summary);
    }
    let json = serde_json::to_string_pretty(&summaries).expect("summary serialises");
    write(Some(&args.out_dir.join("summary.json")), &format!("{json}\n"))?;
    let unsound: Vec<&str> = summaries
        .iter()
        .filter(|s| !s.correction_soundness)
        .map(|s| s.algorithm.as_str())
        .collect();
    if unsound.is_empty() {
        Ok(())
    } else {
        Err(Failure::Unsound(format!("correction was not sound for {}", unsound.join(", "))))
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
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Obfuscate(a) => cmd_obfuscate(a),
        Command::Transpile(a) => cmd_transpile(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Correct(a) => cmd_correct(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(e) | Failure::Invalid(e) => eprintln!("error: {e:#}"),
                Failure::Unsound(msg) => eprintln!("soundness check failed: {msg}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
