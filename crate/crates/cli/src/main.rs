use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sflab::flow::constants::{c_eps, c_q, c_rq, c_tilde};
use sflab_cli::{load_scenario, run_scenario, run_suite, write_samples, InputError, RunOptions};

#[derive(Parser)]
#[command(name = "sflab", version, about = "Spectral flow estimators on finite weighted-trace models")]
struct Cli {
    /// Agreement tolerance, overriding the scenario's.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// RNG seed, overriding the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "SFLAB_THREADS")]
    threads: Option<usize>,
    /// Include wall-clock timings in reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run {
        scenario: PathBuf,
        /// Report file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integrand samples (needs a `csv` block in the scenario).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run every scenario in a directory.
    Suite {
        dir: PathBuf,
        /// Directory for per-scenario reports and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print normalization constants.
    Constants {
        #[arg(long, default_value_t = 1.5)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        eps: Option<f64>,
    },
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> InputError {
    InputError(format!("{}: {e}", path.display()))
}

fn execute(cli: Cli) -> Result<u8, InputError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| InputError(format!("threads: {e}")))?;
    }
    let opts = RunOptions {
        tolerance: cli.tol,
        seed: cli.seed,
        timing: cli.timing,
    };
    match cli.command {
        Command::Run { scenario, out, csv } => {
            let s = load_scenario(&scenario)?;
            let output = run_scenario(&s, &opts)?;
            let json = output.report.to_json();
            match &out {
                Some(p) => fs::write(p, &json).map_err(|e| io_err(p, e))?,
                None => print!("{json}"),
            }
            if let Some(p) = &csv {
                let samples = output
                    .samples
                    .as_deref()
                    .ok_or_else(|| InputError("--csv needs a csv block in the scenario".into()))?;
                write_samples(p, samples).map_err(|e| io_err(p, e))?;
            }
            if !output.report.pass {
                eprintln!("{}: invariant failure", s.name);
                return Ok(1);
            }
            Ok(0)
        }
        Command::Suite { dir, out } => {
            let summary = run_suite(&dir, &opts, out.as_deref())?;
            print!("{}", summary.table());
            if let Some(out) = &out {
                let p = out.join("summary.json");
                let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
                fs::write(&p, json + "\n").map_err(|e| io_err(&p, e))?;
            }
            Ok(summary.exit_code() as u8)
        }
        Command::Constants { r, q, p, eps } => {
            let show = |name: String, v: sflab::Result<f64>| -> Result<(), InputError> {
                let v = v.map_err(|e| InputError(format!("{name}: {e}")))?;
                println!("{name} = {v:.16e}");
                Ok(())
            };
            show(format!("C_{{r,q}}(r={r}, q={q})"), c_rq(r, q))?;
            show(format!("C_q(q={q})"), c_q(q))?;
            show(format!("C~_{{p/2}}(p={p})"), c_tilde(p))?;
            if let Some(e) = eps {
                show(format!("C^eps(eps={e})"), c_eps(e))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
