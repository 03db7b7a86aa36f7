use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfplast::mean_field::MeanFieldOperators;
use mfplast::output::{rows_from_history, write_results};
use mfplast::scenario::Scenario;
use mfplast::selfcheck::run_checks;
use mfplast::solver::Solver;
use mfplast::tensor::Ten4;
use mfplast::{Error, Result};

#[derive(Parser)]
#[command(name = "mfplast", version, about = "Mean-field elasto-plastic homogenization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a load program and write result tables.
    Run {
        #[command(flatten)]
        input: Input,
        /// Output directory (overrides `[output] directory`; default `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat all inclusions as purely elastic.
        #[arg(long)]
        elastic_inclusions: bool,
        /// Also write the per-phase table.
        #[arg(long)]
        per_phase: bool,
    },
    /// Print concentration, influence and effective stiffness tensors.
    Operators {
        #[command(flatten)]
        input: Input,
        /// Print every influence tensor instead of a summary.
        #[arg(long)]
        full: bool,
    },
    /// Run the built-in oracle battery.
    Check,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Scenario file (TOML).
    scenario: Option<PathBuf>,
    /// Use the built-in reference scenario.
    #[arg(long)]
    default_scenario: bool,
}

impl Input {
    fn load(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Scenario::parse(&text).map_err(|e| match e {
                    Error::Parse { line, message } => Error::Parse {
                        line,
                        message: format!("{}: {message}", path.display()),
                    },
                    other => other,
                })
            }
            None => Ok(Scenario::default_scenario()),
        }
    }
}

fn print_tensor(name: &str, t: &Ten4) {
    println!("{name} (Mandel):");
    let m = t.mandel();
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:>14.6e}", m[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }
}

fn operators(scenario: &Scenario, full: bool) -> Result<()> {
    let phases = scenario.phases()?;
    let ops = MeanFieldOperators::assemble(&phases, scenario.scheme)?;
    println!("scheme: {}, phases: {}", scenario.scheme.name(), phases.len());
    print_tensor("effective stiffness", ops.effective_stiffness());
    for (a, p) in phases.iter().enumerate() {
        print_tensor(&format!("A[{a}] {} (f = {:.6})", p.id, p.volume_fraction), ops.concentration(a));
    }
    if full {
        for a in 0..phases.len() {
            for b in 0..phases.len() {
                print_tensor(&format!("B[{a}][{b}]"), ops.influence(a, b));
            }
        }
    } else {
        println!("influence tensors |B[a][b]|_max:");
        for a in 0..phases.len() {
            let row: Vec<String> = (0..phases.len())
                .map(|b| format!("{:.3e}", ops.influence(a, b).max_abs()))
                .collect();
            println!("  {a:>3}: {}", row.join(" "));
        }
    }
    println!("residual |sum f A - I|      = {:.3e}", ops.concentration_residual());
    println!("residual max_b |sum f B_ab| = {:.3e}", ops.influence_residual());
    Ok(())
}

fn run(mut scenario: Scenario, out: Option<PathBuf>, elastic: bool, per_phase: bool) -> Result<()> {
    if elastic {
        scenario = scenario.with_elastic_inclusions();
    }
    let phases = scenario.phases()?;
    let ops = MeanFieldOperators::assemble(&phases, scenario.scheme)?;
    let solver = Solver::new(&ops, &phases, scenario.settings.clone());
    let history = solver.drive(&scenario.program)?;
    let rows = rows_from_history(&history, &ops);
    let dir = out
        .or_else(|| scenario.output.directory.clone())
        .unwrap_or_else(|| Path::new("results").to_path_buf());
    let ids: Vec<String> = phases.iter().map(|p| p.id.clone()).collect();
    let files = write_results(
        &dir,
        &rows,
        &ids,
        per_phase || scenario.output.per_phase,
        scenario.output.plot_data,
    )?;
    let last = history.last().expect("history holds the initial state");
    println!(
        "{} increments, final strain_33 = {:.6e}, stress_33 = {:.6e} MPa, plastic_strain_33 = {:.6e}",
        history.len() - 1,
        last.macro_strain.get(2, 2),
        last.macro_stress.get(2, 2),
        last.macro_plastic_strain.get(2, 2)
    );
    println!("wrote {}", files.macro_table.display());
    for path in files.phase_table.iter().chain(&files.plots) {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn check() -> bool {
    let mut ok = true;
    for c in run_checks() {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            input,
            out,
            elastic_inclusions,
            per_phase,
        } => input
            .load()
            .and_then(|s| run(s, out, elastic_inclusions, per_phase)),
        Command::Operators { input, full } => input.load().and_then(|s| operators(&s, full)),
        Command::Check => {
            return if check() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
