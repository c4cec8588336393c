use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use renorm_core::cli::{run, Command, MapSpecDocument, Options, ResultDocument};
use renorm_core::{Config, Error};

#[derive(Parser)]
#[command(name = "renorm", version, about = "Renormalisation experiments for unimodal and Hénon-like maps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Permutation override, e.g. "p=3; 0->1,1->2,2->0".
    #[arg(long, global = true)]
    perm: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Fixed-point residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "RENORM_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Output file for json; output directory for csv.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// TOML file with numerical settings overriding the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Renormalisation fixed point, scaling and unstable eigenvalue.
    FixedPoint { spec: PathBuf },
    /// Renormalisation tower and the decay of the thickening.
    Tower { spec: PathBuf },
    /// Pieces of the Cantor attractor and the adding-machine conjugacy.
    Cantor { spec: PathBuf },
    /// Average Jacobian and distortion.
    Jacobian { spec: PathBuf },
    /// Convergence of ∂_yφ_n to the universal profile, and tilts at the tip.
    Universality { spec: PathBuf },
    /// Projective gap of line fields near the tip.
    Linefield { spec: PathBuf },
    /// Hölder exponents of the conjugacy between two attractors.
    Rigidity { spec_a: PathBuf, spec_b: PathBuf },
}

const EXIT_ASSERTION: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn read_spec(path: &Path) -> Result<MapSpecDocument, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    MapSpecDocument::from_toml(&text).map_err(|e| match e {
        Error::BadInput(m) => Error::BadInput(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn read_config(path: Option<&Path>) -> Result<Config, Error> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))
}

fn write_output(doc: &ResultDocument, format: Format, out: Option<&Path>) -> Result<(), Error> {
    let io = |e: io::Error| Error::Io(e.to_string());
    match (format, out) {
        (Format::Json, None) => writeln!(io::stdout(), "{}", doc.to_json()).map_err(io),
        (Format::Json, Some(p)) => fs::write(p, doc.to_json() + "\n").map_err(io),
        // the first table is the headline one
        (Format::Csv, None) => match doc.tables.first() {
            Some(t) => t.write_csv(io::stdout().lock()),
            None => Ok(()),
        },
        (Format::Csv, Some(dir)) => {
            fs::create_dir_all(dir).map_err(io)?;
            fs::write(dir.join("result.json"), doc.to_json() + "\n").map_err(io)?;
            for t in &doc.tables {
                t.write_csv(fs::File::create(dir.join(format!("{}.csv", t.name))).map_err(io)?)?;
            }
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<ResultDocument, Error> {
    let mut cfg = read_config(cli.config.as_deref())?;
    cfg.workers = cli.workers;
    if cli.workers > 0 {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    }
    let (cmd, paths): (Command, Vec<&PathBuf>) = match &cli.command {
        Cmd::FixedPoint { spec } => (Command::FixedPoint, vec![spec]),
        Cmd::Tower { spec } => (Command::Tower, vec![spec]),
        Cmd::Cantor { spec } => (Command::Cantor, vec![spec]),
        Cmd::Jacobian { spec } => (Command::Jacobian, vec![spec]),
        Cmd::Universality { spec } => (Command::Universality, vec![spec]),
        Cmd::Linefield { spec } => (Command::Linefield, vec![spec]),
        Cmd::Rigidity { spec_a, spec_b } => (Command::Rigidity, vec![spec_a, spec_b]),
    };
    let specs = paths.into_iter().map(|p| read_spec(p)).collect::<Result<Vec<_>, _>>()?;
    let opts = Options { perm: cli.perm.clone(), depth: cli.depth, tol: cli.tol };
    let doc = run(cmd, &specs, &opts, &cfg)?;
    write_output(&doc, cli.format, cli.out.as_deref())?;
    Ok(doc)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(doc) if doc.passed => ExitCode::SUCCESS,
        Ok(doc) => {
            for a in doc.assertions.iter().filter(|a| !a.passed) {
                eprintln!("assertion failed: {} = {} (expected {})", a.name, a.measured, a.expected);
            }
            ExitCode::from(EXIT_ASSERTION)
        }
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(if e.kind() == "bad-input" { EXIT_BAD_INPUT } else { EXIT_NUMERICAL })
        }
    }
}
