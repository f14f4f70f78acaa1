use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pencil_curvature_cli::{
    cmd_classify, cmd_factorize, cmd_kakeya, cmd_report, cmd_scaling, cmd_sublevel, cmd_witness,
    parse_exponent_inverse, parse_ladder, parse_pencil_file, wrap_report, CliError, Mode,
    PencilInput, RunOutput,
};

/// Curvature analysis of codimension-2 quadratic surfaces via the matrix
/// pencil det(sA + tB): classification, destabilizing witnesses, pairing
/// factorizations, sublevel measures, counterexample scaling and Kakeya
/// slab experiments.
#[derive(Parser)]
#[command(name = "pencil-curvature", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the human report to OUT.txt and the machine report to OUT.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the pencil (well-curved / flat / degenerate) with roots.
    Classify {
        /// Pencil file, or a directory of pencil files for batch mode.
        file: PathBuf,
        /// Arithmetic mode: exact (default) or float with tolerances.
        #[arg(long, default_value = "exact")]
        mode: Mode,
    },
    /// Construct the destabilizing curve and verify its orbit decay.
    Witness {
        file: PathBuf,
        /// Dyadic lambda ladder `a:b` meaning 2^-a .. 2^-b.
        #[arg(long, default_value = "2:12")]
        ladder: String,
    },
    /// Pairing factorization of root multiplicities, or a Farkas certificate.
    Factorize {
        /// Pencil file (omit when passing --multiplicities).
        file: Option<PathBuf>,
        /// Comma-separated multiplicities, e.g. 3,1.
        #[arg(long, value_delimiter = ',')]
        multiplicities: Option<Vec<usize>>,
    },
    /// Sublevel-set measures and decay exponents of |det(sA + tB)|.
    Sublevel {
        file: PathBuf,
        /// Dyadic delta ladder `a:b` meaning 2^-a .. 2^-b.
        #[arg(long, default_value = "4:14")]
        ladder: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Operator lower-bound scaling along a counterexample family.
    Scaling {
        file: PathBuf,
        /// ball | intro-slab | flat-boxes | degenerate | common-kernel
        #[arg(long)]
        family: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value = "2:8")]
        ladder: String,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Kakeya slab-count norms at a fixed thickness.
    Kakeya {
        file: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 3.0)]
        r: f64,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Combined report: classification, factorization, ranges, witness.
    Report {
        file: PathBuf,
        #[arg(long, default_value = "exact")]
        mode: Mode,
        /// Also run the sublevel fit and a scaling experiment.
        #[arg(long)]
        full: bool,
        /// Extra exponent queries `p:q` or `p:q:r` (repeatable).
        #[arg(long = "exponents")]
        exponents: Vec<String>,
    },
}

fn load(path: &Path) -> Result<PencilInput, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_pencil_file(&text)
}

/// Batch mode: a directory input maps the command over every `.json` inside.
fn input_paths(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::Input(format!("{}: no .json pencil files", path.display())));
        }
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn run_one(cmd: &Command, path: &Path) -> Result<(PencilInput, &'static str, RunOutput), CliError> {
    match cmd {
        Command::Classify { mode, .. } => {
            let input = load(path)?;
            let out = cmd_classify(&input, *mode)?;
            Ok((input, "classify", out))
        }
        Command::Witness { ladder, .. } => {
            let input = load(path)?;
            let out = cmd_witness(&input, parse_ladder(ladder)?)?;
            Ok((input, "witness", out))
        }
        Command::Factorize { multiplicities, .. } => {
            let input = load(path)?;
            let out = cmd_factorize(Some(&input), multiplicities.clone())?;
            Ok((input, "factorize", out))
        }
        Command::Sublevel { ladder, samples, seed, .. } => {
            let input = load(path)?;
            let out = cmd_sublevel(&input, parse_ladder(ladder)?, *samples, *seed)?;
            Ok((input, "sublevel", out))
        }
        Command::Scaling { family, p, q, ladder, budget, seed, .. } => {
            let input = load(path)?;
            let out = cmd_scaling(&input, family, *p, *q, parse_ladder(ladder)?, *budget, *seed)?;
            Ok((input, "scaling", out))
        }
        Command::Kakeya { delta, r, budget, seed, .. } => {
            let input = load(path)?;
            let out = cmd_kakeya(&input, *delta, *r, *budget, *seed)?;
            Ok((input, "kakeya", out))
        }
        Command::Report { mode, full, exponents, .. } => {
            let input = load(path)?;
            let mut out = cmd_report(&input, *mode, *full)?;
            if !exponents.is_empty() {
                let mut requests = Vec::new();
                for spec in exponents {
                    let parts: Vec<&str> = spec.split(':').collect();
                    if parts.len() < 2 || parts.len() > 3 {
                        return Err(CliError::Input(format!(
                            "exponent query '{spec}' must be p:q or p:q:r"
                        )));
                    }
                    let up = parse_exponent_inverse(parts[0])?;
                    let uq = parse_exponent_inverse(parts[1])?;
                    let ur = parts.get(2).map(|r| parse_exponent_inverse(r)).transpose()?;
                    requests.push((up, uq, ur));
                }
                let (h, j) = pencil_curvature_cli::ranges_section(&input, &requests)?;
                out.human.push('\n');
                out.human.push_str(&h);
                if let serde_json::Value::Object(map) = &mut out.machine {
                    map.insert("requested_ranges".into(), j);
                }
            }
            Ok((input, "report", out))
        }
    }
}

fn file_of(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::Classify { file, .. }
        | Command::Witness { file, .. }
        | Command::Sublevel { file, .. }
        | Command::Scaling { file, .. }
        | Command::Kakeya { file, .. }
        | Command::Report { file, .. } => Some(file),
        Command::Factorize { file, .. } => file.as_ref(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<(String, serde_json::Value), CliError> {
        match file_of(&cli.command) {
            None => {
                // factorize with raw multiplicities needs no file
                let Command::Factorize { multiplicities, .. } = &cli.command else {
                    unreachable!()
                };
                let out = cmd_factorize(None, multiplicities.clone())?;
                Ok((
                    out.human,
                    serde_json::json!({
                        "schema_version": pencil_curvature_cli::SCHEMA_VERSION,
                        "command": "factorize",
                        "result": out.machine,
                    }),
                ))
            }
            Some(path) => {
                let paths = input_paths(path)?;
                let mut humans = Vec::new();
                let mut machines = Vec::new();
                for p in &paths {
                    let (input, name, out) = run_one(&cli.command, p)?;
                    let header = format!(
                        "== {} ({})\n",
                        p.display(),
                        input.label.as_deref().unwrap_or("unlabelled")
                    );
                    humans.push(format!("{header}{}", out.human));
                    machines.push(wrap_report(&input, name, out.machine));
                }
                let machine = if machines.len() == 1 {
                    machines.pop().unwrap()
                } else {
                    serde_json::json!({
                        "schema_version": pencil_curvature_cli::SCHEMA_VERSION,
                        "batch": machines,
                    })
                };
                Ok((humans.join("\n"), machine))
            }
        }
    })();
    match result {
        Ok((human, machine)) => {
            print!("{human}");
            if let Some(out) = &cli.out {
                let txt = out.with_extension("txt");
                let jsn = out.with_extension("json");
                let pretty = serde_json::to_string_pretty(&machine).expect("serializable");
                if let Err(e) =
                    std::fs::write(&txt, &human).and_then(|_| std::fs::write(&jsn, pretty))
                {
                    eprintln!("error writing outputs: {e}");
                    return ExitCode::from(1);
                }
            } else {
                println!("{}", serde_json::to_string_pretty(&machine).expect("serializable"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
