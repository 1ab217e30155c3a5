//! The `junta` command line.
//!
//! Exit codes: 0 success, 1 learner failure, 2 bad input, 3 I/O failure.
//! Data goes to files or stdout, diagnostics to stderr.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{Junta, Sign};
use crate::error::{invalid, Error, Result};
use crate::fourier::{biased_spectrum, level_weight};
use crate::learner::{learn_junta, LearnReport, LearnStatus, LearnerParams};
use crate::measure::{stream_rng, BiasVector};
use crate::russo::{root_set, russo_row};
use crate::sampling::{write_examples_csv, ExampleSource, Oracle, Recorder, ReplayOracle};
use crate::subsets::mask_to_subset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_LEARN_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Version of the bench CSV header.
pub const RUN_RECORD_SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "junta",
    version,
    about = "Junta analysis and multi-oracle learning experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random non-constant junta as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Biased Fourier coefficients and level weights up to a level.
    Spectrum {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        bias: f64,
        #[arg(long, default_value_t = 1)]
        max_level: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of `s, r, lhs, rhs, residual` for the generalized Russo formula.
    RussoCheck {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bias: Vec<f64>,
        #[arg(long)]
        max_order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical-bias root set `R_s` as JSON.
    Roots {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a junta from simulated (or replayed) biased oracles.
    Learn(LearnArgs),
    /// Run a grid of learning experiments and append CSV records.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct LearnArgs {
    /// Target junta; optional with `--replay`.
    #[arg(long = "fn")]
    pub function: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub biases: Vec<f64>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Bias margin; defaults to `1 - max |r|`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bias separation; defaults to the smallest gap between biases.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long = "samples-per-coeff")]
    pub samples_per_coeff: Option<u64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub attempt_budget: Option<u64>,
    #[arg(long)]
    pub unknown_biases: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write every example drawn from oracle `j` to `<dir>/oracle_<j>.csv`.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Serve oracle `j` from `<dir>/oracle_<j>.csv` instead of simulating.
    #[arg(long, conflicts_with = "dump")]
    pub replay: Option<PathBuf>,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Csv(c) if c.is_io_error() => EXIT_IO,
        Error::Json(j) if j.is_io() => EXIT_IO,
        _ => EXIT_BAD_INPUT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen { n, k, seed, out } => cmd_gen(n, k, seed, out.as_deref(), stdout),
        Command::Spectrum {
            function,
            bias,
            max_level,
            format,
            out,
        } => cmd_spectrum(&function, bias, max_level, format, out.as_deref(), stdout),
        Command::RussoCheck {
            function,
            bias,
            max_order,
            out,
        } => cmd_russo(&function, &bias, max_order, out.as_deref(), stdout),
        Command::Roots { function, s, out } => cmd_roots(&function, s, out.as_deref(), stdout),
        Command::Learn(args) => cmd_learn(&args, stdout, stderr),
        Command::Bench { config } => cmd_bench(&config, stderr),
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, data: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, data)?,
        None => stdout.write_all(data)?,
    }
    Ok(())
}

pub fn load_junta(path: &Path) -> Result<Junta> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Junta::from_json(&text)
}

pub fn cmd_gen(n: usize, k: usize, seed: u64, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let f = Junta::random(n, k, seed, k > 0)?;
    emit(out, stdout, format!("{}\n", f.to_json()).as_bytes())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CoefficientEntry {
    subset: Vec<usize>,
    value: f64,
}

#[derive(Serialize)]
struct LevelEntry {
    level: usize,
    weight: f64,
    coefficients: Vec<CoefficientEntry>,
}

#[derive(Serialize)]
struct SpectrumDoc {
    n: usize,
    relevant: Vec<usize>,
    bias: f64,
    levels: Vec<LevelEntry>,
}

fn subset_label(s: &[usize]) -> String {
    s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

pub fn cmd_spectrum(
    path: &Path,
    bias: f64,
    max_level: usize,
    format: Format,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let f = load_junta(path)?;
    let bv = BiasVector::uniform(f.n(), bias)?;
    let spec = biased_spectrum(&f, &bv)?;
    let rel = f.relevant();
    let mut levels = Vec::new();
    for level in 0..=max_level.min(f.n()) {
        let coefficients = spec
            .iter()
            .enumerate()
            .filter(|(m, _)| m.count_ones() as usize == level)
            .map(|(m, &value)| CoefficientEntry {
                subset: mask_to_subset(m, rel),
                value,
            })
            .collect();
        levels.push(LevelEntry {
            level,
            weight: level_weight(&f, level, bias)?,
            coefficients,
        });
    }
    let data = match format {
        Format::Json => {
            let doc = SpectrumDoc {
                n: f.n(),
                relevant: rel.to_vec(),
                bias,
                levels,
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["kind", "level", "subset", "value"])?;
            for l in &levels {
                w.write_record(["weight", &l.level.to_string(), "", &l.weight.to_string()])?;
                for c in &l.coefficients {
                    w.write_record([
                        "coefficient",
                        &l.level.to_string(),
                        &subset_label(&c.subset),
                        &c.value.to_string(),
                    ])?;
                }
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    emit(out, stdout, &data)?;
    Ok(EXIT_OK)
}

pub fn cmd_russo(
    path: &Path,
    biases: &[f64],
    max_order: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let f = load_junta(path)?;
    if max_order == 0 {
        return Err(invalid("max-order must be at least 1"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for &r in biases {
        for s in 1..=max_order {
            w.serialize(russo_row(&f, s, r)?)?;
        }
    }
    let data = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    emit(out, stdout, &data)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RootPointDoc {
    re: f64,
    multiplicity: usize,
}

#[derive(Serialize)]
struct RootSetDoc {
    s: usize,
    points: Vec<RootPointDoc>,
}

pub fn cmd_roots(path: &Path, s: usize, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let f = load_junta(path)?;
    let set = root_set(&f, s)?;
    let doc = RootSetDoc {
        s,
        points: set
            .points
            .iter()
            .map(|p| RootPointDoc {
                // normalize -0.0
                re: p.re + 0.0,
                multiplicity: p.multiplicity,
            })
            .collect(),
    };
    let mut text = serde_json::to_string(&doc)?;
    text.push('\n');
    emit(out, stdout, text.as_bytes())?;
    Ok(EXIT_OK)
}

/// Default bias margin and separation for a bias list.
pub fn default_alpha_gamma(biases: &[f64]) -> (f64, f64) {
    let alpha = 1.0 - biases.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mut sorted = biases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gamma = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::min)
        .unwrap_or(1.0)
        .min(1.0 - f64::EPSILON);
    (alpha, gamma)
}

pub fn learner_params(args: &LearnArgs) -> LearnerParams {
    let (alpha, gamma) = default_alpha_gamma(&args.biases);
    let mut p = LearnerParams::new(
        args.k,
        args.s,
        args.alpha.unwrap_or(alpha),
        args.gamma.unwrap_or(gamma),
        args.delta,
    );
    p.threshold = args.threshold;
    p.samples_per_coefficient = args.samples_per_coeff;
    p.unknown_biases = args.unknown_biases;
    p.attempt_budget = args.attempt_budget;
    p
}

fn dump_file(dir: &Path, j: usize) -> PathBuf {
    dir.join(format!("oracle_{j}.csv"))
}

/// Runs the learner described by `args`.
pub fn run_learn(args: &LearnArgs) -> Result<LearnReport> {
    let params = learner_params(args);
    let known = |r: f64| (!args.unknown_biases).then_some(r);
    if let Some(dir) = &args.replay {
        let mut oracles = args
            .biases
            .iter()
            .enumerate()
            .map(|(j, &r)| ReplayOracle::from_csv(&dump_file(dir, j), known(r), j))
            .collect::<Result<Vec<_>>>()?;
        return learn_junta(&mut oracles, &params);
    }
    let path = args
        .function
        .as_deref()
        .ok_or_else(|| invalid("--fn is required unless --replay is given"))?;
    let f = load_junta(path)?;
    let oracles = args
        .biases
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let o = Oracle::new(f.clone(), r, args.seed, j as u64)?;
            Ok(if args.unknown_biases { o.hidden() } else { o })
        })
        .collect::<Result<Vec<_>>>()?;
    match &args.dump {
        None => {
            let mut oracles = oracles;
            learn_junta(&mut oracles, &params)
        }
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let mut rec: Vec<Recorder<Oracle>> = oracles.into_iter().map(Recorder::new).collect();
            let report = learn_junta(&mut rec, &params)?;
            for (j, r) in rec.iter().enumerate() {
                write_examples_csv(&dump_file(dir, j), r.n(), r.log())?;
            }
            Ok(report)
        }
    }
}

pub fn cmd_learn(args: &LearnArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let report = run_learn(args)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.report.as_deref(), stdout, text.as_bytes())?;
    if report.status.is_success() {
        Ok(EXIT_OK)
    } else {
        writeln!(stderr, "learner finished with status {:?}", report.status)?;
        Ok(EXIT_LEARN_FAILED)
    }
}

/// A grid of learning experiments; every combination of the list fields is a cell.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub output: PathBuf,
    pub master_seed: u64,
    pub trials: usize,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub s: Vec<usize>,
    pub bias_sets: Vec<Vec<f64>>,
    pub samples_per_coeff: Vec<u64>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub unknown_biases: bool,
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchCell {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub biases: Vec<f64>,
    pub samples_per_coeff: u64,
}

impl BenchConfig {
    pub fn cells(&self) -> Result<Vec<BenchCell>> {
        let mut cells = Vec::new();
        for &n in &self.n {
            for &k in &self.k {
                for &s in &self.s {
                    for biases in &self.bias_sets {
                        for &m in &self.samples_per_coeff {
                            if s * biases.len() < k {
                                return Err(invalid(format!(
                                    "cell n={n} k={k} s={s} with {} biases violates s * t >= k",
                                    biases.len()
                                )));
                            }
                            cells.push(BenchCell {
                                n,
                                k,
                                s,
                                biases: biases.clone(),
                                samples_per_coeff: m,
                            });
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// One bench CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub cell: usize,
    pub trial: usize,
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub biases: String,
    pub samples_per_coeff: u64,
    pub seed: u64,
    pub status: String,
    pub success: bool,
    pub samples_used: u64,
    pub wall_ms: u64,
}

fn run_seed(master: u64, cell: usize, trial: usize) -> u64 {
    use rand::RngCore;
    stream_rng(master, ((cell as u64) << 32) | trial as u64).next_u64()
}

/// Whether `report` reproduces `f` exactly.
pub fn report_matches(f: &Junta, report: &LearnReport) -> bool {
    let truth = f.relevant_variables_bruteforce();
    if report.relevant != truth {
        return false;
    }
    match report.status {
        LearnStatus::ConstantFunction => f.is_constant_exact() == report.table.first().copied(),
        LearnStatus::ExactSuccess => (0..report.table.len()).all(|idx| {
            let mut x = vec![Sign::Minus; f.n()];
            for (b, &i) in report.relevant.iter().enumerate() {
                x[i] = Sign::from_bool(idx >> b & 1 == 1);
            }
            f.eval_unchecked(&x) == report.table[idx]
        }),
        _ => false,
    }
}

fn bench_run(cfg: &BenchConfig, cell_idx: usize, cell: &BenchCell, trial: usize) -> Result<RunRecord> {
    let seed = run_seed(cfg.master_seed, cell_idx, trial);
    let f = Junta::random(cell.n, cell.k, seed, cell.k > 0)?;
    let (alpha, gamma) = default_alpha_gamma(&cell.biases);
    let mut params = LearnerParams::new(cell.k, cell.s, alpha, gamma, cfg.delta);
    params.threshold = cfg.threshold;
    params.samples_per_coefficient = Some(cell.samples_per_coeff);
    params.unknown_biases = cfg.unknown_biases;
    let mut oracles = cell
        .biases
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let o = Oracle::new(f.clone(), r, seed, j as u64)?;
            Ok(if cfg.unknown_biases { o.hidden() } else { o })
        })
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    let report = learn_junta(&mut oracles, &params)?;
    Ok(RunRecord {
        schema: RUN_RECORD_SCHEMA,
        cell: cell_idx,
        trial,
        n: cell.n,
        k: cell.k,
        s: cell.s,
        biases: cell.biases.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(";"),
        samples_per_coeff: cell.samples_per_coeff,
        seed,
        status: format!("{:?}", report.status),
        success: report_matches(&f, &report),
        samples_used: oracles.iter().map(|o| o.draws()).sum(),
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

fn existing_rows(path: &Path) -> Result<usize> {
    if !path.exists() {
        return Ok(0);
    }
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = 0;
    for rec in r.deserialize::<RunRecord>() {
        let rec = rec?;
        if rec.schema != RUN_RECORD_SCHEMA {
            return Err(invalid(format!(
                "{} has schema {}, expected {RUN_RECORD_SCHEMA}",
                path.display(),
                rec.schema
            )));
        }
        rows += 1;
    }
    Ok(rows)
}

pub fn cmd_bench(config: &Path, stderr: &mut dyn Write) -> Result<i32> {
    let cfg: BenchConfig = serde_json::from_str(&fs::read_to_string(config)?)?;
    let cells = cfg.cells()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let done = existing_rows(&cfg.output)?;
    if done > 0 {
        writeln!(stderr, "resuming after {done} recorded runs")?;
    }
    let fresh = !cfg.output.exists() || fs::metadata(&cfg.output)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(&cfg.output)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    let chunk = rayon::current_num_threads().max(1);
    for batch in jobs[done.min(jobs.len())..].chunks(chunk) {
        let records = batch
            .par_iter()
            .map(|&(c, t)| bench_run(&cfg, c, &cells[c], t))
            .collect::<Result<Vec<_>>>()?;
        for rec in records {
            w.serialize(rec)?;
        }
        w.flush()?;
    }
    Ok(EXIT_OK)
}
