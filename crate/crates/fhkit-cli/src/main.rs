use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fhkit::norms::Mode;
use fhkit_cli::ops::{self, load_phase, CheckKind, LatticeChoice, NList, Output};
use fhkit_cli::runner::{self, RunOptions};
use fhkit_cli::{corpus, CliError};

#[derive(Parser)]
#[command(name = "fhkit", version = runner::VERSION, about = "Factorisation-hypothesis checks and Fourier partial-sum experiments on the 2-torus")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads (scenarios for `run`, data-parallel loops otherwise).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomised operations that do not set one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports and tables.
    #[arg(long, global = true, default_value = "fhkit-out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Grid search for points where FH fails. Exit 0 = NO_WITNESS_FOUND, 2 = VIOLATED.
    FhCheck {
        #[arg(long)]
        phase: PathBuf,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        omega_samples: usize,
        /// Report path (default: <out-dir>/fh-check.json).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Structural checks of the Q recursion.
    QcalcVerify {
        #[arg(long, default_value_t = 8)]
        max_depth: u32,
        #[arg(long, value_enum, default_value_t = CheckKind::All)]
        check: CheckKind,
        #[arg(long, default_value_t = 50)]
        draws: usize,
    },
    /// Norm estimates over a range of multipliers. CSV: n,lambda,norm,M,N,x,y,grid,dyadic_norm.
    NormSweep {
        #[arg(long)]
        phase: PathBuf,
        #[arg(long, default_value = "rect")]
        mode: Mode,
        #[arg(long, default_value = "2^6..2^11")]
        n: NList,
        #[arg(long)]
        mmax: Option<i64>,
        #[arg(long, default_value_t = fhkit::oscint::DEFAULT_MAX_GRID_LOG2)]
        max_grid_log2: u32,
        /// Target direction ω for d > 1, comma separated.
        #[arg(long, value_delimiter = ',')]
        direction: Option<Vec<f64>>,
        #[arg(long)]
        no_witnesses: bool,
        /// CSV path (default: <out-dir>/norm-sweep.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The sine-kernel double integral on a lambda grid. CSV: lambda,value.
    Fefferman {
        #[arg(long, default_value = "log:1e2:1e7:25")]
        lambda_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random principal-value integrals of degree-d polynomial phases.
    SwSweep {
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Square partial sums for a scalar phase with a chosen lattice part. CSV as norm-sweep.
    SquareSum {
        #[arg(long)]
        phase: PathBuf,
        #[arg(long, value_enum, default_value_t = LatticeChoice::File)]
        lattice: LatticeChoice,
        /// Tuning point x,y (default: first FH witness).
        #[arg(long, value_delimiter = ',', num_args = 2)]
        point: Option<Vec<f64>>,
        #[arg(long, default_value = "2^4..2^8")]
        n: NList,
        #[arg(long, default_value_t = fhkit::oscint::DEFAULT_MAX_GRID_LOG2)]
        max_grid_log2: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a scenario file. Exit 1 if any assertion fails.
    Run { config: PathBuf },
    /// Write the bundled phase files and scenario file into --out-dir.
    Corpus,
}

fn save(out_dir: &Path, default_name: &str, explicit: Option<PathBuf>, text: &str) -> Result<PathBuf, CliError> {
    let path = explicit.unwrap_or_else(|| out_dir.join(default_name));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn emit(g: &Global, name: &str, out: &Output, json: Option<PathBuf>, csv: Option<PathBuf>) -> Result<(), CliError> {
    let jp = save(&g.out_dir, &format!("{name}.json"), json, &out.json_text())?;
    eprintln!("wrote {}", jp.display());
    if let Some(table) = &out.csv {
        let cp = save(&g.out_dir, &format!("{name}.csv"), csv, table)?;
        eprintln!("wrote {}", cp.display());
    }
    print!("{}", out.json_text());
    Ok(())
}

fn real_main(cli: Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    fhkit::par::init_threads(g.jobs);
    match cli.command {
        Command::FhCheck { phase, grid, omega_samples, json } => {
            let f = load_phase(&phase)?;
            let out = ops::fh_check(&f, &ops::FhParams { grid, omega_samples })?;
            emit(g, "fh-check", &out, json, None)?;
            Ok(if out.metrics.verdict.as_deref() == Some("VIOLATED") { 2 } else { 0 })
        }
        Command::QcalcVerify { max_depth, check, draws } => {
            let out = ops::qcalc_verify(&ops::QcalcParams { max_depth, check, draws }, g.seed)?;
            emit(g, "qcalc-verify", &out, None, None)?;
            Ok(if out.metrics.all_pass == Some(true) { 0 } else { 1 })
        }
        Command::NormSweep { phase, mode, n, mmax, max_grid_log2, direction, no_witnesses, out } => {
            let f = load_phase(&phase)?;
            let p = ops::NormParams { mode, n, mmax, max_grid_log2, oversample: 2, top_k: 4, witnesses: !no_witnesses, direction };
            let o = ops::norm_sweep(&f, &p, Some(&phase))?;
            emit(g, "norm-sweep", &o, None, out)?;
            Ok(0)
        }
        Command::Fefferman { lambda_grid, out } => {
            let o = ops::fefferman(&ops::FeffParams { lambda_grid })?;
            emit(g, "fefferman", &o, None, out)?;
            Ok(0)
        }
        Command::SwSweep { degree, trials } => {
            let o = ops::sw_sweep(&ops::SwParams { degree, trials }, g.seed)?;
            emit(g, "sw-sweep", &o, None, None)?;
            Ok(0)
        }
        Command::SquareSum { phase, lattice, point, n, max_grid_log2, out } => {
            let f = load_phase(&phase)?;
            let point = point.map(|v| [v[0], v[1]]);
            let p = ops::SquareParams { lattice, point, n, mmax: None, max_grid_log2, oversample: 2 };
            let o = ops::square_sum(&f, &p, Some(&phase))?;
            emit(g, "square-sum", &o, None, out)?;
            Ok(0)
        }
        Command::Run { config } => {
            let opts = RunOptions { jobs: g.jobs, seed: g.seed, out_dir: g.out_dir.clone() };
            let records = runner::run(&config, &opts)?;
            let mut failed = 0;
            for r in &records {
                for a in &r.assertions {
                    println!("{} {} {}: {}", r.scenario, if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
                }
                if r.assertions.is_empty() {
                    println!("{} done (no assertions)", r.scenario);
                }
                failed += usize::from(!r.passed());
            }
            println!("{} scenarios, {failed} with failed assertions", records.len());
            Ok(u8::from(failed > 0))
        }
        Command::Corpus => {
            for p in corpus::bundle_corpus(&g.out_dir)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
