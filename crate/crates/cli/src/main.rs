use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use archforge_core::build::{
    self, ConvertRequest, ExtractOptions, GraphFormat, ModuleState, Project,
};
use archforge_core::graph::{LintOptions, Severity};
use clap::{Parser, Subcommand, ValueEnum};

/// Extracts a LaTeX blueprint from annotated MiniLean sources.
#[derive(Parser)]
#[command(name = "archforge", version)]
struct Cli {
    /// Path to the configuration file. Defaults to $ARCHFORGE_CONFIG, then
    /// `architect.json` in the working directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write fragments, macros, blueprint.json and graphs for stale modules.
    Extract {
        /// Rebuild every module.
        #[arg(long)]
        force: bool,
        /// Exit 2 when warnings were reported.
        #[arg(long)]
        strict: bool,
        /// Output directory, overriding `outDir`.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Print the dependency graph.
    Graph {
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        /// Write to FILE instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Lint the blueprint and cross-check the configured `.tex` files.
    Check {
        /// Fail on warnings too, and lint upstream nodes.
        #[arg(long)]
        strict: bool,
    },
    /// Print progress counts.
    Status {
        #[arg(long)]
        json: bool,
    },
    /// Move legacy LaTeX nodes into Lean attributes.
    Convert {
        /// Blueprint `.tex` files holding legacy nodes.
        #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
        blueprint: Vec<PathBuf>,
        /// Also convert nodes without `\lean` whose label names a declaration.
        #[arg(long)]
        all_nodes: bool,
        /// Keep `\uses` that Lean inference would otherwise supply.
        #[arg(long)]
        keep_uses: bool,
        /// Print the planned edits and write nothing.
        #[arg(long)]
        dry_run: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

fn project(cli: &Cli) -> Result<Project> {
    let cwd = std::env::current_dir().context("reading the working directory")?;
    Ok(Project::discover(&cwd, cli.config.as_deref())?)
}

fn run(cli: &Cli) -> Result<u8> {
    let project = project(cli)?;
    match &cli.command {
        Command::Extract { force, strict, out } => {
            let out_dir = match out {
                Some(o) => std::env::current_dir()?.join(o),
                None => project.out_dir(),
            };
            let report = build::extract(&project, &out_dir, ExtractOptions { force: *force })?;
            for (module, state) in &report.modules {
                let s = match state {
                    ModuleState::Fresh => "fresh",
                    ModuleState::Stale => "stale",
                };
                println!("{s:5} {module}");
            }
            println!(
                "{} of {} modules rebuilt, {} node fragments written, {} files removed",
                report.rebuilt(),
                report.modules.len(),
                report.node_fragments_written,
                report.removed.len()
            );
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(if *strict && !report.warnings.is_empty() {
                2
            } else {
                0
            })
        }
        Command::Graph { format, out } => {
            let format = match format {
                Format::Dot => GraphFormat::Dot,
                Format::Json => GraphFormat::Json,
            };
            let text = build::graph(&project, format)?;
            match out {
                Some(path) => {
                    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Check { strict } => {
            let report = build::check(&project, LintOptions { strict: *strict })?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.lints.findings {
                println!("{f}");
            }
            let errors = report
                .lints
                .findings
                .iter()
                .filter(|f| f.severity() == Severity::Error)
                .count();
            let warnings = report.lints.findings.len() - errors;
            println!("{errors} errors, {warnings} warnings");
            Ok(u8::from(report.failed(*strict)))
        }
        Command::Status { json } => {
            let s = build::status(&project)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                println!("nodes:              {}", s.total_nodes);
                println!("labels:             {}", s.labels);
                println!("statements leanOk:  {}", s.statements_lean_ok);
                println!("proofs leanOk:      {} of {}", s.proofs_lean_ok, s.proofs);
                println!("sorried proofs:     {}", s.sorried_proofs);
                println!("upstream nodes:     {}", s.upstream_nodes);
                println!("notReady nodes:     {}", s.not_ready_nodes);
            }
            Ok(0)
        }
        Command::Convert {
            blueprint,
            all_nodes,
            keep_uses,
            dry_run,
        } => {
            let request = ConvertRequest {
                blueprint: blueprint.clone(),
                all_nodes: *all_nodes,
                keep_uses: *keep_uses,
                dry_run: *dry_run,
            };
            let outcome = build::convert(&project, &request)?;
            for s in &outcome.plan.skipped {
                let label = s.label.as_deref().unwrap_or("(unlabelled)");
                eprintln!(
                    "skipped {}:{} {label}: {}",
                    s.file.display(),
                    s.line,
                    s.reason
                );
            }
            if *dry_run {
                for (path, text) in &outcome.preview {
                    println!("=== {}", path.display());
                    print!("{text}");
                }
            }
            let p = &outcome.plan;
            println!(
                "{} Lean insertions, {} LaTeX replacements, {} skipped{}",
                p.source_edits.len(),
                p.latex_edits.len(),
                p.skipped.len(),
                if *dry_run {
                    " (dry run, nothing written)"
                } else {
                    ""
                }
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
