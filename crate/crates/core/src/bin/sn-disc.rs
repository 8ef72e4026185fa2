use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use sn_disc::io::{parse_radii, to_json_bytes, write_sweep_csv, SolutionBundle, SolutionDoc};
use sn_disc::solver::{Method, SolverConfig};
use sn_disc::study::{solve_with, sweep_radius_with, SweepRecord};
use sn_disc::verify::{oracle_table, run_suite, Check, OracleRow, TestFunction, VerifyOptions};
use sn_disc::Error;

const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Radial ground states of the planar Schrödinger–Newton equation on a disc.
#[derive(Debug, Parser)]
#[command(name = "sn-disc", version)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground state on one disc, written as a JSON solution document.
    Solve {
        #[arg(long)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Shooting)]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Ground states over a radius ladder, written as a CSV table.
    Sweep {
        /// `A:B:geometric:K` or a comma separated list.
        #[arg(long, default_value = "4:64:geometric:5")]
        radii: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Shooting)]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the invariant suite and prints one line per check.
    Verify {
        /// Skips the finest oracle grid and the large singular quadrature.
        #[arg(long)]
        quick: bool,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Radial double energy against the 2D brute-force sum.
    Oracle {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Grid cells per radius; the table also has twice this unless --quick.
        #[arg(long, default_value_t = 32)]
        cells: usize,
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Radial grid intervals.
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Root-finding and stall tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap of the quotient minimizer.
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn config(&self) -> Result<SolverConfig, Failure> {
        let cfg = SolverConfig {
            n: self.grid,
            root_tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Shooting,
    Nehari,
    Both,
}

impl MethodArg {
    fn methods(self) -> &'static [Method] {
        match self {
            MethodArg::Shooting => &[Method::Shooting],
            MethodArg::Nehari => &[Method::Nehari],
            MethodArg::Both => &[Method::Shooting, Method::Nehari],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn bad_input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_BAD_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::CoincidentPoints | Error::OutsideDisc { .. } | Error::Domain(_) | Error::InvalidInput(_) => {
                EXIT_BAD_INPUT
            }
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
            _ => EXIT_NO_CONVERGENCE,
        };
        Failure { code, message: err.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Self {
        Failure { code: EXIT_IO, message: err.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_BAD_INPUT } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("sn-disc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve { radius, method, common } => solve(radius, method, &common),
        Command::Sweep { radii, method, common } => sweep(&radii, method, &common),
        Command::Verify { quick, tolerance_scale, common } => verify(quick, tolerance_scale, &common),
        Command::Oracle { radius, cells, quick, common } => oracle(radius, cells, quick, &common),
    }
}

/// Writes to `--out` or stdout. The file is only created once the bytes exist.
fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            w.write_all(bytes)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn table<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => Ok(to_json_bytes(&rows)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(Error::from)?;
            }
            w.into_inner().map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })
        }
    }
}

fn solve(radius: f64, method: MethodArg, common: &Common) -> Result<u8, Failure> {
    let cfg = common.config()?;
    let format = common.format.unwrap_or(Format::Json);
    let states = match method {
        MethodArg::Both => {
            let (a, b) =
                rayon::join(|| solve_with(radius, Method::Shooting, &cfg), || solve_with(radius, Method::Nehari, &cfg));
            vec![a?, b?]
        }
        m => vec![solve_with(radius, m.methods()[0], &cfg)?],
    };
    for st in &states {
        info!(
            "{}: R = {}, c_R = {:.10e}, lambda = {:.10e}, residual = {:.3e}",
            st.method, st.radius, st.c_r, st.lambda, st.residual_l2
        );
    }
    let bytes = match (format, states.as_slice()) {
        (Format::Json, [one]) => to_json_bytes(&SolutionDoc::new(one, &cfg))?,
        (Format::Json, [a, b]) => to_json_bytes(&SolutionBundle::new(a, b, &cfg)?)?,
        (Format::Csv, _) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["r".to_string()];
            header.extend(states.iter().map(|s| format!("phi_{}", s.method)));
            w.write_record(&header).map_err(Error::from)?;
            for (i, r) in states[0].profile.nodes().enumerate() {
                let mut rec = vec![format!("{r:.16e}")];
                rec.extend(states.iter().map(|s| format!("{:.16e}", s.profile.values()[i])));
                w.write_record(&rec).map_err(Error::from)?;
            }
            w.into_inner().map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?
        }
        _ => unreachable!("one or two states"),
    };
    emit(&common.out, &bytes)?;
    Ok(0)
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("SN_DISC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::bad_input(format!("SN_DISC_THREADS={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn sweep(radii: &str, method: MethodArg, common: &Common) -> Result<u8, Failure> {
    let cfg = common.config()?;
    let radii = parse_radii(radii)?;
    let threads = threads_from_env()?;
    let per_method: Vec<Vec<SweepRecord>> =
        method.methods().iter().map(|&m| sweep_radius_with(&radii, m, &cfg, threads)).collect::<Result<_, _>>()?;
    let rows: Vec<SweepRecord> = (0..radii.len()).flat_map(|i| per_method.iter().map(move |t| t[i].clone())).collect();
    for row in rows.iter().filter(|r| !r.is_ok()) {
        log::warn!("R = {} ({}): {}", row.radius, row.method, row.status);
    }
    let bytes = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &rows)?;
            buf
        }
        Format::Json => to_json_bytes(&rows)?,
    };
    emit(&common.out, &bytes)?;
    if rows.iter().any(SweepRecord::is_ok) {
        Ok(0)
    } else {
        Err(Failure { code: EXIT_NO_CONVERGENCE, message: "no radius in the sweep was solved".into() })
    }
}

fn verify(quick: bool, tolerance_scale: f64, common: &Common) -> Result<u8, Failure> {
    let cfg = common.config()?;
    if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
        return Err(Failure::bad_input("--tolerance-scale must be positive"));
    }
    let checks: Vec<Check> = run_suite(&cfg, VerifyOptions { quick, tolerance_scale });
    let mut report = String::new();
    for c in &checks {
        report.push_str(&format!(
            "{} {:<34} measured {:<12.4e} tolerance {:<10.3e} {:>7.2}s\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.seconds
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    report.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    match &common.out {
        Some(_) => {
            print!("{report}");
            emit(&common.out, &table(&checks, common.format.unwrap_or(Format::Json))?)?;
        }
        None => emit(&None, report.as_bytes())?,
    }
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
}

fn oracle(radius: f64, cells: usize, quick: bool, common: &Common) -> Result<u8, Failure> {
    let resolutions: Vec<usize> = if quick { vec![cells] } else { vec![cells, 2 * cells] };
    let rows: Vec<OracleRow> = oracle_table(radius, &TestFunction::ALL, &resolutions)?;
    emit(&common.out, &table(&rows, common.format.unwrap_or(Format::Csv))?)?;
    Ok(0)
}
