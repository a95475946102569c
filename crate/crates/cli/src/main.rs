use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use urdd_core::ensemble::{free_induction_decay, storage_curves, write_storage_csv, StorageResult};
use urdd_core::export::{write_sequence_csv, SequenceRecord};
use urdd_core::sequences::{
    baseline, sequence_by_name, symmetric_ur, ur_phases, Baseline, PhaseSequence, PiFraction, Sign,
};
use urdd_core::sweeps::{fidelity_map, scaling_fit, write_map_csv, write_map_pgm, StaticPoint};

mod config;

use config::{EnsembleConfig, SweepConfig};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (schemaVersion 1, build ",
    env!("URDD_BUILD_ID"),
    ")"
);

/// Universally robust dynamical decoupling toolkit.
#[derive(Parser)]
#[command(name = "urdd", version = VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a phase sequence.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of pulses (required for ur and ur-sym).
        #[arg(long)]
        n: Option<usize>,
        /// Second-pulse phase in units of π, e.g. `1/2`. Defaults to Φ(n).
        #[arg(long)]
        phi2_over_pi: Option<String>,
        /// Branch of Φ(n): + or -.
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fidelity map over detuning and amplitude error.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional PGM heatmap of -log10(1-F).
        #[arg(long)]
        heatmap: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Log-log slopes of the composed error against 1-p.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,12,16,20")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 0.95)]
        p_min: f64,
        #[arg(long, default_value_t = 0.99)]
        p_max: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        delta: f64,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Storage-efficiency proxy of an inhomogeneous ensemble.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        /// Sequence labels; `FID` means no pulses.
        #[arg(long, value_delimiter = ',', required = true)]
        sequences: Vec<String>,
        /// Storage times in seconds.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Ur,
    UrSym,
    Cpmg,
    Xy4,
    Xy8,
    Kdd,
    KddXy4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<urdd_core::Error> for Failure {
    fn from(e: urdd_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn read_config<T>(path: &Path) -> Result<T, Failure>
where
    T: for<'de> serde::Deserialize<'de> + config::Versioned,
{
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    config::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes through a buffer and flushes before reporting success.
fn write_file<F>(path: &Path, body: F) -> Outcome
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn write_stdout<F>(body: F) -> Outcome
where
    F: FnOnce(&mut io::StdoutLock) -> io::Result<()>,
{
    let mut out = io::stdout().lock();
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn generate(
    family: Family,
    n: Option<usize>,
    phi2: Option<&str>,
    sign: &str,
) -> Result<PhaseSequence, Failure> {
    let sign: Sign = sign.parse()?;
    let phi2: Option<PiFraction> = phi2.map(str::parse).transpose()?;
    let need_n = || n.ok_or_else(|| Failure::Usage("--n is required for UR families".into()));
    let seq = match family {
        Family::Ur => {
            let n = need_n()?;
            match phi2 {
                Some(p) => ur_phases(n, p, sign)?,
                None => symmetric_ur(n, sign)?,
            }
        }
        Family::UrSym => {
            if phi2.is_some() {
                return Err(Failure::Usage(
                    "ur-sym fixes phi2 = Φ(n); use --family ur to choose it".into(),
                ));
            }
            symmetric_ur(need_n()?, sign)?
        }
        other => {
            let b = match other {
                Family::Cpmg => Baseline::Cpmg,
                Family::Xy4 => Baseline::Xy4,
                Family::Xy8 => Baseline::Xy8,
                Family::Kdd => Baseline::Kdd,
                _ => Baseline::KddXy4,
            };
            if phi2.is_some() {
                return Err(Failure::Usage(format!("{} has fixed phases", b.name())));
            }
            let seq = baseline(b);
            if let Some(n) = n {
                if n != seq.n() {
                    return Err(Failure::Usage(format!(
                        "{} has {} pulses, not {n}",
                        b.name(),
                        seq.n()
                    )));
                }
            }
            seq
        }
    };
    Ok(seq)
}

fn cmd_gen(
    family: Family,
    n: Option<usize>,
    phi2: Option<String>,
    sign: String,
    format: Format,
) -> Outcome {
    let seq = generate(family, n, phi2.as_deref(), &sign)?;
    write_stdout(|out| match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &SequenceRecord::from(&seq))?;
            writeln!(out)
        }
        Format::Csv => write_sequence_csv(out, &seq),
    })
}

fn cmd_sweep(config: &Path, out: &Path, heatmap: Option<&Path>, threads: Option<usize>) -> Outcome {
    let cfg: SweepConfig = read_config(config)?;
    let seq = sequence_by_name(&cfg.sequence)?;
    let map = with_threads(threads, || {
        fidelity_map(&seq, cfg.total_pulses, &cfg.grid, &cfg.protocol())
    })??;
    write_file(out, |w| write_map_csv(w, &map))?;
    if let Some(path) = heatmap {
        write_file(path, |w| write_map_pgm(w, &map))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scaling(
    n_list: &[usize],
    p_min: f64,
    p_max: f64,
    points: usize,
    at: StaticPoint,
    out: Option<&Path>,
) -> Outcome {
    let rows = scaling_fit(n_list, (p_min, p_max), points, &at)?;
    let body = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "n,slope,points_used")?;
        for r in &rows {
            let slope = r.slope.map(urdd_core::format_float).unwrap_or_default();
            writeln!(w, "{},{},{}", r.n, slope, r.points_used)?;
        }
        Ok(())
    };
    match out {
        Some(path) => write_file(path, |w| body(w)),
        None => write_stdout(|w| body(w)),
    }
}

fn cmd_ensemble(
    config: &Path,
    names: &[String],
    times: &[f64],
    out: &Path,
    threads: Option<usize>,
) -> Outcome {
    let cfg: EnsembleConfig = read_config(config)?;
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Failure::Usage(format!(
            "storage times must be positive, got {t}"
        )));
    }
    let is_fid = |n: &str| n.eq_ignore_ascii_case("FID");
    let sequences = names
        .iter()
        .filter(|n| !is_fid(n))
        .map(|n| sequence_by_name(n))
        .collect::<urdd_core::Result<Vec<_>>>()?;

    let results: Vec<StorageResult> = with_threads(threads, || -> urdd_core::Result<_> {
        let curves = if sequences.is_empty() {
            Vec::new()
        } else {
            storage_curves(&cfg.ensemble, &cfg.protocol(), &sequences, times)?
        };
        times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut per_sequence = Vec::with_capacity(names.len());
                let mut pulsed = curves.get(i).map(|r| r.per_sequence.iter());
                for name in names {
                    if is_fid(name) {
                        per_sequence
                            .push(("FID".to_string(), free_induction_decay(&cfg.ensemble, t)?));
                    } else if let Some(row) = pulsed.as_mut().and_then(Iterator::next) {
                        per_sequence.push(row.clone());
                    }
                }
                Ok(StorageResult {
                    storage_time: t,
                    efficiency_proxy: per_sequence.iter().map(|r| r.1).fold(0.0, f64::max),
                    per_sequence,
                })
            })
            .collect()
    })??;
    write_file(out, |w| write_storage_csv(w, &results))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen {
            family,
            n,
            phi2_over_pi,
            sign,
            format,
        } => cmd_gen(family, n, phi2_over_pi, sign, format),
        Command::Sweep {
            config,
            out,
            heatmap,
            threads,
        } => cmd_sweep(&config, &out, heatmap.as_deref(), threads),
        Command::Scaling {
            n_list,
            p_min,
            p_max,
            points,
            alpha,
            beta,
            delta,
            out,
        } => cmd_scaling(
            &n_list,
            p_min,
            p_max,
            points,
            StaticPoint { alpha, beta, delta },
            out.as_deref(),
        ),
        Command::Ensemble {
            config,
            sequences,
            times,
            out,
            threads,
        } => cmd_ensemble(&config, &sequences, &times, &out, threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
