//! `tmkit`: validate, analyze, simulate and export `.tm` model files.
//!
//! Exit codes: 0 success, 1 errors in the model or analysis, 2 usage or
//! I/O problems.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tmkit::export::{self, ExportOptions, RankDir, Target};
use tmkit::{enumerate_chronologies, parse_named, report, simulate, DslError, Parsed, TimeValue};

#[derive(Parser)]
#[command(name = "tmkit", version, about = "Thinging Machine modeling toolkit")]
struct Cli {
    /// Treat warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List diagnostics for a model file.
    Validate { file: PathBuf },
    /// Show the change regions and whether each is well formed.
    Changes { file: PathBuf },
    /// Show precedence edges between changes and the pairwise order.
    Order {
        file: PathBuf,
        /// Analyze models whose changes form several unconnected groups.
        #[arg(long)]
        allow_multi: bool,
    },
    /// List the chronologies (linear extensions) of the changes.
    Chronologies {
        file: PathBuf,
        /// Maximum number of sequences to print; the total is always exact.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        #[arg(long)]
        allow_multi: bool,
    },
    /// Run a scenario against the behavior model.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        /// Simulation end, e.g. `50ms`.
        #[arg(long, default_value = "1s", value_parser = parse_time)]
        horizon: TimeValue,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        format: TraceFormat,
        #[arg(long)]
        allow_multi: bool,
    },
    /// Write the model as DOT or JSON.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long, value_enum, default_value_t = TargetArg::Static)]
        target: TargetArg,
        /// Include anchor numbers in stage labels.
        #[arg(long)]
        show_anchors: bool,
        #[arg(long, value_enum, default_value_t = RankDirArg::LR)]
        rankdir: RankDirArg,
        /// Output file; standard output when absent.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Static,
    Dynamic,
    Behavior,
}

#[derive(Clone, Copy, ValueEnum)]
#[allow(clippy::upper_case_acronyms)]
enum RankDirArg {
    #[value(name = "LR", alias = "lr")]
    LR,
    #[value(name = "TB", alias = "tb")]
    TB,
}

fn parse_time(s: &str) -> Result<TimeValue, String> {
    let t: TimeValue = s.parse().map_err(|e: tmkit::TimeError| e.to_string())?;
    if t.is_zero() {
        return Err("horizon must be positive".to_string());
    }
    Ok(t)
}

/// Outcome of a command: findings (exit 1) or a usage/IO failure (exit 2).
enum Failure {
    Findings,
    Usage(String),
}

struct Ui {
    color: bool,
    strict: bool,
}

impl Ui {
    fn paint(&self, text: &str, ansi: &str) -> String {
        if self.color {
            format!("\x1b[{ansi}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    /// Colors severity words at the start of diagnostic lines and WARN lines.
    fn highlight(&self, text: &str) -> String {
        if !self.color {
            return text.to_string();
        }
        text.lines()
            .map(|line| {
                if let Some(rest) = line.strip_prefix("WARN ") {
                    format!("{} {rest}", self.paint("WARN", "33"))
                } else {
                    line.replacen(" error ", &format!(" {} ", self.paint("error", "31")), 1)
                        .replacen(
                            " warning ",
                            &format!(" {} ", self.paint("warning", "33")),
                            1,
                        )
                }
            })
            .map(|l| l + "\n")
            .collect()
    }
}

fn load(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parses a file for the analysis commands; problems go to stderr.
fn load_document(ui: &Ui, path: &Path) -> Result<Parsed, Failure> {
    let text = load(path)?;
    match parse_named(&text, &file_label(path)) {
        Ok(parsed) => {
            if !parsed.warnings.is_empty() {
                eprint!("{}", ui.highlight(&report::diagnostics(&parsed.warnings)));
                if ui.strict && parsed.warnings.warning_count() > 0 {
                    return Err(Failure::Findings);
                }
            }
            Ok(parsed)
        }
        Err(e) => {
            eprintln!("{}", ui.highlight(&e.to_string()));
            Err(Failure::Findings)
        }
    }
}

fn run(cli: Cli, ui: &Ui) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file } => {
            let text = load(&file)?;
            match parse_named(&text, &file_label(&file)) {
                Ok(parsed) => {
                    print!("{}", ui.highlight(&report::diagnostics(&parsed.warnings)));
                    if ui.strict && parsed.warnings.warning_count() > 0 {
                        return Err(Failure::Findings);
                    }
                    Ok(())
                }
                Err(DslError::Syntax(errors)) => {
                    for e in &errors {
                        println!("{e}");
                    }
                    println!("{} errors, 0 warnings", errors.len());
                    Err(Failure::Findings)
                }
                Err(DslError::Invalid(diags)) => {
                    print!("{}", ui.highlight(&report::diagnostics(&diags)));
                    Err(Failure::Findings)
                }
            }
        }
        Command::Changes { file } => {
            let parsed = load_document(ui, &file)?;
            let doc = parsed.document;
            print!("{}", report::changes(&doc.model, &doc.partition));
            Ok(())
        }
        Command::Order { file, allow_multi } => {
            let doc = load_document(ui, &file)?.document;
            let dag = doc.precedence(allow_multi).map_err(|e| {
                eprintln!("{e}");
                Failure::Findings
            })?;
            print!("{}", report::order(&dag));
            Ok(())
        }
        Command::Chronologies {
            file,
            limit,
            allow_multi,
        } => {
            let doc = load_document(ui, &file)?.document;
            let dag = doc.precedence(allow_multi).map_err(|e| {
                eprintln!("{e}");
                Failure::Findings
            })?;
            let ch =
                enumerate_chronologies(&dag, limit).map_err(|e| Failure::Usage(e.to_string()))?;
            print!("{}", report::chronologies(&ch));
            Ok(())
        }
        Command::Simulate {
            file,
            scenario,
            horizon,
            format,
            allow_multi,
        } => {
            let doc = load_document(ui, &file)?.document;
            let Some(sc) = doc.scenario(&scenario) else {
                let known: Vec<&str> = doc.scenarios.iter().map(|s| s.name.as_str()).collect();
                return Err(Failure::Usage(format!(
                    "no scenario `{scenario}` (available: {})",
                    if known.is_empty() {
                        "none".to_string()
                    } else {
                        known.join(", ")
                    }
                )));
            };
            let behavior = doc.behavior_model(allow_multi).map_err(|e| {
                eprintln!("{e}");
                Failure::Findings
            })?;
            let trace =
                simulate(&behavior, &doc.dynamic, &doc.constraints, sc, horizon).map_err(|e| {
                    eprintln!("{e}");
                    Failure::Findings
                })?;
            match format {
                TraceFormat::Text => print!("{}", ui.highlight(&trace.to_text())),
                TraceFormat::Json => print!("{}", export::trace_to_json(&trace)),
            }
            if ui.strict && !trace.warnings.is_empty() {
                return Err(Failure::Findings);
            }
            Ok(())
        }
        Command::Export {
            file,
            format,
            target,
            show_anchors,
            rankdir,
            output,
        } => {
            let doc = load_document(ui, &file)?.document;
            let text = match format {
                ExportFormat::Json => export::to_json(&doc),
                ExportFormat::Dot => {
                    let opts = ExportOptions {
                        target: match target {
                            TargetArg::Static => Target::Static,
                            TargetArg::Dynamic => Target::Dynamic,
                            TargetArg::Behavior => Target::Behavior,
                        },
                        show_anchors,
                        rankdir: match rankdir {
                            RankDirArg::LR => RankDir::LR,
                            RankDirArg::TB => RankDir::TB,
                        },
                    };
                    export::to_dot(&doc, &opts).map_err(|e| {
                        eprintln!("{e}");
                        Failure::Findings
                    })?
                }
            };
            match output {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ui = Ui {
        color: std::env::var("TMKIT_COLOR").is_ok_and(|v| v == "1"),
        strict: cli.strict,
    };
    match run(cli, &ui) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Findings) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("tmkit: {msg}");
            ExitCode::from(2)
        }
    }
}
