use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hamembed::conditions::{classify_regime, decide, ConditionError, Embeddable, Verdict};
use hamembed::io::{self, IoError};
use hamembed::oracle::{self, EnumerationBudget, OracleError};
use hamembed::pipeline::{self, EmbeddingViolation};
use hamembed::{GddParams, ParamError};

const EXIT_CONDITIONS: u8 = 2;
const EXIT_UNDETERMINED: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "hamembed", version, about = "Embed edge-colored K(a^(p); λ, μ) into Hamiltonian decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(clap::Args)]
struct ParamArgs {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    lambda: u64,
    #[arg(long)]
    mu: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the embedding conditions and the parameter regime.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build a Hamiltonian decomposition extending the instance.
    Embed {
        file: PathBuf,
        #[arg(long, env = "HAMEMBED_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the construction trace to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Check a result file against its instance.
    Verify { instance: PathBuf, result: PathBuf },
    /// Write a random instance that satisfies the conditions.
    Gen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        r: u64,
        #[arg(long, env = "HAMEMBED_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        timeout: u64,
    },
    /// Search for a Hamiltonian decomposition of K(a^(p); λ, μ) by brute force.
    Oracle {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "HAMEMBED_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        timeout: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(kind: &str, message: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_INPUT, message: format!("error[{kind}]: {message}") }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e.code(), e)
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Failure::input(e.code(), e)
    }
}

impl From<ConditionError> for Failure {
    fn from(e: ConditionError) -> Self {
        match e {
            ConditionError::Params(p) => p.into(),
            other => Failure::input("invalid-instance", other),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Timeout => Failure { code: EXIT_UNDETERMINED, message: format!("error[timeout]: {e}") },
            OracleError::Params(p) => p.into(),
            OracleError::Conditions(c) => c.into(),
            other => Failure::input("budget", other),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input("io", format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_code(v: Embeddable) -> u8 {
    match v {
        Embeddable::Yes => 0,
        Embeddable::No => EXIT_CONDITIONS,
        Embeddable::Undetermined => EXIT_UNDETERMINED,
    }
}

fn budget(timeout: u64) -> EnumerationBudget {
    EnumerationBudget { timeout: Duration::from_secs(timeout), ..EnumerationBudget::default() }
}

fn check_json(params: &GddParams, verdict: &Verdict) -> serde_json::Value {
    let stats: Vec<_> = verdict
        .stats
        .iter()
        .map(|s| json!({"color": s.color, "omega": s.omega, "s": s.s, "mixed_edges": s.mixed_edges}))
        .collect();
    let regime = classify_regime(params);
    json!({
        "verdict": verdict.embeddable,
        "violated": verdict.violated.iter().map(|c| c.code()).collect::<Vec<_>>(),
        "regime": verdict.regime.name(),
        "parameter_regime": regime.tag.name(),
        "min_large_radius": regime.min_large_radius,
        "classes": stats,
    })
}

fn check_table(params: &GddParams, verdict: &Verdict) -> String {
    let mut out = String::new();
    let regime = classify_regime(params);
    out.push_str(&format!(
        "a={} p={} lambda={} mu={} r={}\n",
        params.a,
        params.p,
        params.lambda,
        params.mu,
        params.r.map_or("-".to_string(), |r| r.to_string())
    ));
    out.push_str(&format!("verdict   {:?}\n", verdict.embeddable).to_lowercase());
    out.push_str(&format!("regime    {} (parameters: {})\n", verdict.regime.name(), regime.tag.name()));
    if !verdict.violated.is_empty() {
        let ids: Vec<_> = verdict.violated.iter().map(|c| c.code()).collect();
        out.push_str(&format!("violated  {}\n", ids.join(", ")));
    }
    out.push_str("color  omega  s  mixed\n");
    for s in &verdict.stats {
        out.push_str(&format!("{:>5}  {:>5}  {:>1}  {:>5}\n", s.color, s.omega, s.s, s.mixed_edges));
    }
    out
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check { file, format } => {
            let (params, g) = io::parse_instance(&read(&file)?)?;
            let verdict = decide(&g, &params)?;
            match format {
                Format::Json => println!("{:#}", check_json(&params, &verdict)),
                Format::Table => print!("{}", check_table(&params, &verdict)),
            }
            Ok(verdict_code(verdict.embeddable))
        }
        Command::Embed { file, seed, out, trace } => {
            let (params, g) = io::parse_instance(&read(&file)?)?;
            let report = match pipeline::embed(&g, &params, seed) {
                Ok(report) => report,
                Err(e) if e.is_input_error() => return Err(Failure::input("invalid-instance", e)),
                Err(e) => return Err(Failure { code: EXIT_INTERNAL, message: format!("error[contract]: {e}") }),
            };
            if trace {
                for stage in &report.trace {
                    eprintln!("{:<14} {:>5} vertices {:>6} edges  {}", stage.stage, stage.vertices, stage.edges, stage.note);
                }
            }
            write_out(out.as_deref(), &io::serialize_result(&params, &report))?;
            Ok(verdict_code(report.verdict.embeddable))
        }
        Command::Verify { instance, result } => {
            let (params, g) = io::parse_instance(&read(&instance)?)?;
            let parsed = io::parse_result(&read(&result)?)?;
            let verdict = decide(&g, &params)?;
            let mut problems: Vec<String> = Vec::new();
            if parsed.verdict != verdict.embeddable {
                problems.push(format!("verdict {:?} but the instance gives {:?}", parsed.verdict, verdict.embeddable));
            }
            if parsed.violated != verdict.violated {
                problems.push("violated conditions differ".into());
            }
            match (&parsed.embedding, parsed.verdict) {
                (Some((embedded_params, full)), _) => {
                    if *embedded_params != params {
                        problems.push("result parameters differ from the instance".into());
                    }
                    for v in pipeline::verify_embedding(&g, &params, full) {
                        problems.push(describe(&v));
                    }
                }
                (None, Embeddable::Yes) => problems.push("verdict yes without an embedding".into()),
                (None, _) => {}
            }
            println!("{:#}", json!({"ok": problems.is_empty(), "problems": problems}));
            Ok(if problems.is_empty() { 0 } else { EXIT_INTERNAL })
        }
        Command::Gen { params, r, seed, out, timeout } => {
            let params = GddParams::embedding(params.a, params.p, params.lambda, params.mu, r)?;
            match oracle::generate_valid_input(&params, &budget(timeout), seed)? {
                Some(g) => {
                    write_out(out.as_deref(), &io::serialize_instance(&params, &g))?;
                    Ok(0)
                }
                None => Err(Failure::input(
                    "no-decomposition",
                    format!("K({}^({}); {}, {}) has no Hamiltonian decomposition", params.a, params.p + r, params.lambda, params.mu),
                )),
            }
        }
        Command::Oracle { params, seed, timeout } => {
            let params = GddParams::new(params.a, params.p, params.lambda, params.mu, None)?;
            match oracle::brute_force_decompose(&params, params.p, &budget(timeout), seed)? {
                Some(g) => {
                    print!("{}", io::serialize_instance(&params, &g));
                    Ok(0)
                }
                None => {
                    println!("{:#}", json!({"decomposable": false}));
                    Ok(EXIT_CONDITIONS)
                }
            }
        }
    }
}

fn describe(v: &EmbeddingViolation) -> String {
    match v {
        EmbeddingViolation::NotComplete => "edges do not form K(a^(p+r); lambda, mu)".into(),
        EmbeddingViolation::ColorCount { expected, found } => format!("{found} colors, expected {expected}"),
        EmbeddingViolation::UncoloredEdge(i) => format!("edge {i} has no valid color"),
        EmbeddingViolation::NotHamiltonian(j) => format!("color {j} is not a Hamiltonian cycle"),
        EmbeddingViolation::RestrictionMismatch => "restriction to the original parts differs from the instance".into(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
