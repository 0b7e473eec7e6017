use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qrng_core::compare::{compare, AnalysisParams, DEFAULT_WINDOW};
use qrng_core::pipeline;
use qrng_core::unitary::{build_ux, decompose, reconstruct};
use qrng_core::verify::run_physics_checks;
use qrng_core::{AccuracyFunction, DecompositionPlan, Operator, PreparationSpec, SourceSpec, C64};

#[derive(Parser)]
#[command(name = "qrng", version, about = "Simulated spin-1 random number generation and analysis")]
struct Cli {
    /// Output format for machine-readable results.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Measure `count` prepared states and write a packed ternary file.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = PreparationSpec::PlusOne)]
        prep: PreparationSpec,
        /// Packed ternary output; the record is also written to `<out>.record.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a packed ternary file to a packed bit file.
    Transform {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normality report and bit-frequency chi-square for a packed bit file.
    Analyze {
        input: PathBuf,
        #[arg(long, default_value_t = AccuracyFunction::SqrtLog)]
        accuracy: AccuracyFunction,
        /// Also evaluate the built-in predictors with this prefix window.
        #[arg(long)]
        window: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the same analysis over several bit sources.
    Compare {
        /// Comma-separated: qrng, qrng:<prep>, lcg, xorshift.
        #[arg(long, value_delimiter = ',', default_value = "qrng,lcg,xorshift")]
        sources: Vec<SourceSpec>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bits per source.
        #[arg(long, default_value_t = 1 << 20)]
        count: u64,
        #[arg(long, default_value_t = AccuracyFunction::SqrtLog)]
        accuracy: AccuracyFunction,
        #[arg(long, default_value_t = DEFAULT_WINDOW as u32)]
        window: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Beam-splitter plan for a 3x3 unitary (U_x by default), or the matrix
    /// a plan reconstructs.
    Decompose {
        /// JSON `{"re": [[..]], "im": [[..]]}`.
        #[arg(long, conflicts_with = "plan")]
        matrix: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the spin algebra and decomposition invariants.
    VerifyPhysics {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    re: [[f64; 3]; 3],
    im: [[f64; 3]; 3],
}

impl MatrixJson {
    fn from_operator(op: &Operator) -> Self {
        let rows = op.rows();
        Self {
            re: rows.map(|r| r.map(|z| z.re)),
            im: rows.map(|r| r.map(|z| z.im)),
        }
    }

    fn to_operator(&self) -> Operator {
        let mut rows = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = C64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Operator::from_rows(rows)
    }
}

fn check_input(path: &Path) -> Result<()> {
    let meta = std::fs::metadata(path).with_context(|| format!("cannot read {}", path.display()))?;
    ensure!(meta.is_file(), "{} is not a regular file", path.display());
    Ok(())
}

fn check_output(path: &Path) -> Result<()> {
    ensure!(!path.is_dir(), "{} is a directory", path.display());
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure!(parent.is_dir(), "output directory {} does not exist", parent.display());
    }
    Ok(())
}

fn check_distinct(input: &Path, out: &Path) -> Result<()> {
    if let (Ok(a), Ok(b)) = (input.canonicalize(), out.canonicalize()) {
        ensure!(a != b, "input and output are the same file: {}", input.display());
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).with_context(|| format!("invalid JSON in {}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, _format: Format) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush().with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".record.json");
    PathBuf::from(name)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let format = cli.format;
    match cli.command {
        Command::Generate { seed, count, prep, out } => {
            check_output(&out)?;
            let record_path = sidecar(&out);
            let start = Instant::now();
            let record = pipeline::generate(create(&out)?, prep, count, seed)
                .with_context(|| format!("writing {}", out.display()))?;
            emit(&record, Some(&record_path), format)?;
            emit(&record, None, format)?;
            let [a, b, c] = record.tallies;
            eprintln!(
                "generated {count} digits ({prep}, seed {seed}) in {:.2?}: tallies 0={a} 1={b} 2={c} -> {}",
                start.elapsed(),
                out.display()
            );
        }
        Command::Transform { input, out } => {
            check_input(&input)?;
            check_output(&out)?;
            check_distinct(&input, &out)?;
            let n = pipeline::transform(open(&input)?, create(&out)?)
                .with_context(|| format!("transforming {}", input.display()))?;
            eprintln!("transformed {n} digits -> {}", out.display());
        }
        Command::Analyze {
            input,
            accuracy,
            window,
            out,
        } => {
            check_input(&input)?;
            if let Some(o) = &out {
                check_output(o)?;
            }
            let report = pipeline::analyze(open(&input)?, accuracy, window.map(|w| w as usize))
                .with_context(|| format!("analyzing {}", input.display()))?;
            emit(&report, out.as_deref(), format)?;
            let nr = &report.normality;
            eprintln!(
                "n = {}, accuracy {}: normality {} over m = 1..={}; chi-square {:.3} (p = {:.4})",
                nr.n,
                nr.accuracy,
                if nr.pass { "PASS" } else { "FAIL" },
                nr.per_m.len(),
                report.chi_square.statistic,
                report.chi_square.p_value
            );
            for e in &report.predictors {
                eprintln!(
                    "  {:<16} correct {} incorrect {} withheld {} k-correct {}",
                    e.predictor, e.correct, e.incorrect, e.withheld, e.k_correct_for
                );
            }
        }
        Command::Compare {
            sources,
            seed,
            count,
            accuracy,
            window,
            out,
        } => {
            if let Some(o) = &out {
                check_output(o)?;
            }
            ensure!(!sources.is_empty(), "no sources given");
            let params = AnalysisParams {
                n: count,
                seed,
                accuracy,
                window: window as usize,
            };
            let report = compare(&sources, &params)?;
            emit(&report, out.as_deref(), format)?;
            for row in &report.rows {
                match (&row.analysis, &row.error) {
                    (Some(a), _) => eprintln!(
                        "{:<18} normality {}  chi-square p = {:.4}  {:.3e} bits/s",
                        row.source,
                        if a.normality.pass { "PASS" } else { "FAIL" },
                        a.chi_square.p_value,
                        row.throughput_bits_per_sec
                    ),
                    (None, Some(e)) => eprintln!("{:<18} error: {e}", row.source),
                    (None, None) => eprintln!("{:<18} no result", row.source),
                }
            }
        }
        Command::Decompose { matrix, plan, out } => {
            for p in matrix.iter().chain(plan.iter()) {
                check_input(p)?;
            }
            if let Some(o) = &out {
                check_output(o)?;
            }
            if let Some(plan_path) = plan {
                let plan: DecompositionPlan = read_json(&plan_path)?;
                let u = reconstruct(&plan);
                emit(&MatrixJson::from_operator(&u), out.as_deref(), format)?;
                eprintln!(
                    "reconstructed {} layers; unitarity deviation {:.2e}",
                    plan.layers.len(),
                    u.unitarity_deviation()
                );
            } else {
                let u = match &matrix {
                    Some(p) => read_json::<MatrixJson>(p)?.to_operator(),
                    None => build_ux(),
                };
                let plan = decompose(&u)?;
                let err = reconstruct(&plan).max_abs_diff(&u);
                emit(&plan, out.as_deref(), format)?;
                eprintln!("{} layers; round-trip error {err:.2e}", plan.layers.len());
            }
        }
        Command::VerifyPhysics { out } => {
            if let Some(o) = &out {
                check_output(o)?;
            }
            let checks = run_physics_checks();
            emit(&checks, out.as_deref(), format)?;
            let mut failed = 0;
            for c in &checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                eprintln!("[{tag}] {} ({:.2e} < {:.0e})", c.name, c.value, c.tolerance);
                failed += usize::from(!c.pass);
            }
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", checks.len());
                return Ok(ExitCode::FAILURE);
            }
            eprintln!("all {} checks passed", checks.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("a/b.qt3")), PathBuf::from("a/b.qt3.record.json"));
    }

    #[test]
    fn matrix_json_round_trip() {
        let u = build_ux();
        let back = MatrixJson::from_operator(&u).to_operator();
        assert_eq!(back.max_abs_diff(&u), 0.0);
    }

    #[test]
    fn bad_paths_rejected() {
        assert!(check_input(Path::new("/definitely/not/here")).is_err());
        assert!(check_output(Path::new("/definitely/not/here/out.bin")).is_err());
        assert!(check_output(Path::new("relative.bin")).is_ok());
    }
}
