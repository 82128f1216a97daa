use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noether_core::dsl::{load_model, render_model};
use noether_core::homology::TruncationWindow;
use noether_core::koszul::ShellWindow;
use noether_core::model::ModelSpec;
use noether_core::report::{run_check, run_gauge, run_homology, Report};
use noether_core::zoo;

#[derive(Parser)]
#[command(
    name = "noether",
    version,
    about = "Noether identities, Koszul-Tate complexes and gauge supersymmetries of Lagrangian models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify identities, nilpotency, extended-Lagrangian closure and gauge supersymmetry.
    Check(Common),
    /// Print the components of the ascent operator.
    Gauge(Common),
    /// Window-relative homology of a Koszul-Tate differential.
    Homology(Common),
    /// Print a built-in model in the model file format.
    Zoo {
        /// bf:N, trivial[:N] or scalar:N
        #[arg(long = "zoo", value_name = "NAME")]
        name: String,
    },
}

#[derive(Args)]
struct Common {
    /// Model file.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "zoo",
        required_unless_present = "zoo"
    )]
    model: Option<PathBuf>,
    /// Built-in model: bf:N, trivial[:N] or scalar:N.
    #[arg(long, value_name = "NAME")]
    zoo: Option<String>,
    /// Highest generator stage used (default: all declared stages).
    #[arg(long, value_name = "N", allow_negative_numbers = true)]
    stage: Option<i32>,
    #[arg(long = "jet-order", value_name = "J")]
    jet_order: Option<usize>,
    #[arg(long = "poly-degree", value_name = "D")]
    poly_degree: Option<usize>,
    #[arg(long, value_name = "K")]
    sector: Option<u32>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

struct Loaded {
    model: ModelSpec,
    label: String,
    options: BTreeMap<String, i64>,
}

fn load(c: &Common) -> Result<Loaded, String> {
    if let Some(name) = &c.zoo {
        let model = zoo::by_name(name).map_err(|e| e.to_string())?;
        return Ok(Loaded {
            model,
            label: format!("zoo:{name}"),
            options: BTreeMap::new(),
        });
    }
    let path = c.model.as_ref().expect("clap enforces --model or --zoo");
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    match load_model(&text) {
        Ok(l) => Ok(Loaded {
            model: l.model,
            label: path.display().to_string(),
            options: l.options,
        }),
        Err(diags) => Err(diags
            .iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect::<Vec<_>>()
            .join("\n")),
    }
}

fn option_usize(
    flag: Option<usize>,
    opts: &BTreeMap<String, i64>,
    key: &str,
) -> Result<Option<usize>, String> {
    match (flag, opts.get(key)) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(&v)) => usize::try_from(v)
            .map(Some)
            .map_err(|_| format!("option {key} must be non-negative, got {v}")),
        (None, None) => Ok(None),
    }
}

fn run(cmd: &Command) -> Result<Report, String> {
    let (c, which) = match cmd {
        Command::Check(c) => (c, "check"),
        Command::Gauge(c) => (c, "gauge"),
        Command::Homology(c) => (c, "homology"),
        Command::Zoo { .. } => unreachable!("handled by main"),
    };
    let l = load(c)?;
    let o = &l.options;
    let stage = c.stage.or_else(|| o.get("stage").map(|&v| v as i32));
    let jet = option_usize(c.jet_order, o, "jet-order")?;
    let deg = option_usize(c.poly_degree, o, "poly-degree")?;
    let sector = match (c.sector, o.get("sector")) {
        (Some(v), _) => v,
        (None, Some(&v)) => {
            u32::try_from(v).map_err(|_| format!("option sector must be non-negative, got {v}"))?
        }
        (None, None) => 1,
    };
    let r = match which {
        "check" => {
            let shell = match (jet, deg) {
                (None, None) => None,
                (j, d) => Some(ShellWindow {
                    jet_order: j.unwrap_or(2),
                    multiplier_degree: d.unwrap_or(2),
                }),
            };
            run_check(&l.model, &l.label, stage, shell)
        }
        "gauge" => run_gauge(&l.model, &l.label, stage),
        _ => {
            let d = deg.unwrap_or(1);
            if d == 0 {
                return Err("--poly-degree must be at least 1".into());
            }
            let w = TruncationWindow::new(jet.unwrap_or(1), d, sector);
            run_homology(&l.model, &l.label, stage, w)
        }
    };
    r.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Zoo { name } = &cli.command {
        return match zoo::by_name(name) {
            Ok(m) => {
                print!("# built-in model {name}\n{}", render_model(&m));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let report = match run(&cli.command) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let c = match &cli.command {
        Command::Check(c) | Command::Gauge(c) | Command::Homology(c) => c,
        Command::Zoo { .. } => unreachable!(),
    };
    match &c.report {
        Some(p) if p.as_os_str() == "-" => print!("{}", report.to_json_string()),
        Some(p) => {
            if let Err(e) = std::fs::write(p, report.to_json_string()) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
            print!("{}", report.summary());
        }
        None => print!("{}", report.summary()),
    }
    if report.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
