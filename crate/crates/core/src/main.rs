use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fiberamp::config::{load_config, SolverKind};
use fiberamp::diagnostics::autonomy_diagnostics;
use fiberamp::equivalent::{epsilon_sweep, run_equivalent, SweepSpec};
use fiberamp::gain::{compare_with_oracle, random_irradiance_pairs, DopantModel};
use fiberamp::report::{self, RunManifest, Table};
use fiberamp::simulate::Simulator;
use fiberamp::{Config, Error};

#[derive(Parser)]
#[command(name = "fiberamp", version, about = "Coupled-mode simulation of doped fiber amplifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the guided modes.
    Modes {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the fiber and write the power trace.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        solver: Option<SolverKind>,
        /// Fiber length override (m).
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        steps_per_beat: Option<u32>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Integrate the equivalent short fiber, optionally against the original.
    Equivalent {
        #[command(flatten)]
        config: ConfigArg,
        /// Short fiber length (m).
        #[arg(long)]
        ltilde: f64,
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Worst-case deviation over launches on a pump power by short length grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// `start:stop:count` or a comma-separated list (W).
        #[arg(long)]
        pp0: String,
        /// Comma-separated short lengths (m).
        #[arg(long)]
        ltilde: String,
        /// Launch fraction increment in percent.
        #[arg(long, default_value_t = 10)]
        increment: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Autonomy remainders along the configured run.
    Diagnose {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form populations against the rate-equation oracle.
    GainCheck {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a CSV written by this tool as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// JSON configuration file.
    #[arg(long = "config")]
    path: PathBuf,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::LaunchMismatch { .. } | Error::NoModes(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(arg: &ConfigArg) -> Result<Config, Failure> {
    load_config(&arg.path).map_err(|e| Failure::Config(e.to_string()))
}

fn simulator(config: Config) -> Result<Simulator<f64>, Failure> {
    Ok(Simulator::new(config)?)
}

fn write_table(
    mut table: Table,
    manifest: &mut RunManifest,
    out: &Path,
    started: Instant,
) -> Result<(), Failure> {
    let mut meta = manifest.header_lines();
    meta.append(&mut table.meta);
    table.meta = meta;
    table.write_file(out)?;
    manifest.outputs.push(out.display().to_string());
    manifest.wall_seconds = Some(started.elapsed().as_secs_f64());
    manifest.write_sidecar(out)?;
    Ok(())
}

fn plot_trace(table: &Table, out: &Path, title: &str) -> Result<(), Failure> {
    let ys: Vec<usize> = (1..table.columns.len()).collect();
    std::fs::write(out, report::line_plot_svg(table, 0, &ys, title, "power (W)"))?;
    Ok(())
}

fn plot_sweep(table: &Table, out: &Path, title: &str) -> Result<(), Failure> {
    let (pumps, lts, grid) = report::sweep_grid(table)?;
    std::fs::write(out, report::contour_svg(&lts, &pumps, &grid, 8, title, "L~ (m)", "pump power (W)"))?;
    Ok(())
}

fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Config(format!("cannot parse grid {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        return Ok(match n {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        });
    }
    text.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Modes { config, out } => {
            let cfg = load(&config)?;
            let sim = simulator(cfg)?;
            let table = report::modes_table(&sim.family);
            match out {
                Some(path) => {
                    let mut m = RunManifest::new("modes", &sim.config.hash(), &sim.config.numerics.solver.to_string());
                    write_table(table, &mut m, &path, started)?;
                }
                None => print!("{}", table.to_csv_string()),
            }
        }
        Command::Simulate { config, out, solver, length, steps_per_beat, plot } => {
            let mut cfg = load(&config)?;
            if let Some(s) = solver {
                cfg.numerics.solver = s;
            }
            if let Some(l) = length {
                cfg.fiber.length = l;
            }
            if let Some(n) = steps_per_beat {
                cfg.numerics.steps_per_beat = n;
            }
            let sim = simulator(cfg)?;
            let trace = sim.simulate()?;
            let mut m = RunManifest::new("simulate", &sim.config.hash(), &trace.solver.to_string());
            m.steps.push(trace.steps);
            let table = report::trace_table(&trace);
            if let Some(p) = plot {
                plot_trace(&table, &p, "power along the fiber")?;
            }
            write_table(table, &mut m, &out, started)?;
        }
        Command::Equivalent { config, ltilde, compare, out, plot } => {
            let sim = simulator(load(&config)?)?;
            let launch = sim.config.launch.clone();
            let run = run_equivalent(&sim, ltilde, &launch, compare)?;
            let mut m = RunManifest::new("equivalent", &sim.config.hash(), &run.short.solver.to_string());
            m.steps.push(run.short.steps);
            let table = match (&run.report, &run.long) {
                (Some(rep), Some(long)) => {
                    m.steps.push(long.steps);
                    let mut t = report::comparison_table(rep);
                    t.push_meta("speedup", format!("{:.1}", run.long_seconds.unwrap_or(0.0) / run.short_seconds.max(1e-9)));
                    t
                }
                _ => report::trace_table(&run.short),
            };
            if let Some(p) = plot {
                plot_trace(&table, &p, &format!("equivalent fiber, L~ = {ltilde} m"))?;
            }
            write_table(table, &mut m, &out, started)?;
        }
        Command::Sweep { config, pp0, ltilde, increment, out, plot } => {
            let sim = simulator(load(&config)?)?;
            let spec = SweepSpec { pump_powers: parse_list(&pp0)?, l_tildes: parse_list(&ltilde)?, percent_step: increment };
            let sweep = epsilon_sweep(&sim, &spec)?;
            let mut m = RunManifest::new("sweep", &sim.config.hash(), &sim.config.numerics.solver.to_string());
            m.steps.push(sim.step_count(sim.config.fiber.length)?);
            let table = report::sweep_table(&sweep, &sim.family.names());
            if let Some(p) = plot {
                plot_sweep(&table, &p, "worst-case relative deviation")?;
            }
            write_table(table, &mut m, &out, started)?;
        }
        Command::Diagnose { config, out } => {
            let sim = simulator(load(&config)?)?;
            let opts = sim.options(sim.config.fiber.length, true)?;
            let trace = sim.run(&sim.config.dopant, &sim.config.launch, &opts)?;
            let diag = autonomy_diagnostics(&sim.system(&sim.config.dopant), &trace)?;
            let mut m = RunManifest::new("diagnose", &sim.config.hash(), &trace.solver.to_string());
            m.steps.push(trace.steps);
            write_table(report::diagnostics_table(&diag), &mut m, &out, started)?;
        }
        Command::GainCheck { config, samples, seed, out } => {
            let cfg = load(&config)?;
            let model = DopantModel::new(&cfg.dopant, &cfg.fiber);
            let rows = random_irradiance_pairs(samples, seed)
                .into_iter()
                .map(|(is, ip)| compare_with_oracle(&model, is, ip))
                .collect::<Result<Vec<_>, _>>()?;
            let mut table = report::gain_check_table(&rows);
            table.push_meta("seed", seed);
            match out {
                Some(path) => {
                    let mut m = RunManifest::new("gain-check", &cfg.hash(), "newton");
                    write_table(table, &mut m, &path, started)?;
                }
                None => print!("{}", table.to_csv_string()),
            }
        }
        Command::Plot { input, out, title } => {
            let table = Table::read_file(&input).map_err(|e| match e {
                Error::Io(io) => Failure::Runtime(format!("{}: {io}", input.display())),
                e => Failure::Runtime(format!("{}: {e}", input.display())),
            })?;
            let title = title.unwrap_or_else(|| input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            if table.column_index("epsilon").is_some() {
                plot_sweep(&table, &out, &title)?;
            } else if table.columns.len() >= 2 {
                plot_trace(&table, &out, &title)?;
            } else {
                return Err(Failure::Runtime(format!("{}: need at least two columns", input.display())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
