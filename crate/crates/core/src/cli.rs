//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 I/O or configuration error, 3 resource cap.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    run_sweep, run_quench_pair, run_verification_suite, write_outputs, ExperimentPlan, Fault, QuenchSample,
    VerifySettings, DEFAULT_MAX_SITES, REFERENCE_SAMPLES, REFERENCE_SIGMA1_RATIO,
};
use crate::model::{build_hamiltonian, sample_spec, MAX_DENSE_SITES};
use crate::spectral::diagonalize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

const DEFAULTS: &str = "\
Defaults (reference protocol): n = 3..10, sigma0 = 1, sigma1 = 0.4 * sigma0, \
samples = 100 per n, subsystem-site = 1, seed = 2011, out = ./out, max-n = 12.

Config files are flat `key = value` text (keys: n, sigma0, sigma1, seed, samples, \
subsystem_site, workers, out, max_n, subsample_threshold, subsample_size, verbose); \
command-line flags override them.

Exit codes: 0 success, 1 verification failure, 2 I/O or configuration error, 3 resource cap.";

#[derive(Debug, Parser)]
#[command(name = "nonthermal", version, about = "Quench experiments on disordered XYZ spin chains", after_help = DEFAULTS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one disordered chain, write spec.json and print its spectrum summary.
    Hamiltonian(CommonArgs),
    /// Disorder-ensemble sweep: records.csv, aggregate.csv and metadata.json.
    #[command(visible_alias = "sweep")]
    Fig2(CommonArgs),
    /// Run the verification suite and write verify_report.json.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Deliberately corrupt an input to confirm the checks can fail (testing only).
        #[arg(long, value_name = "FAULT")]
        inject_fault: Option<String>,
        /// Reduced instance counts.
        #[arg(long)]
        quick: bool,
    },
    /// One quench pair; prints its record as JSON to stdout.
    Quench {
        #[command(flatten)]
        common: CommonArgs,
        /// Disorder sample index within the sweep at this n.
        #[arg(long, default_value_t = 0)]
        sample_index: usize,
        /// Initial H0 eigenstate index (bit i-1 = site i, 1 = spin down).
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Chain length: a single value, a list `3,4,6` or a range `3..10` (inclusive).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Coupling standard deviation (absolute); defaults to 0.4 * sigma0.
    #[arg(long)]
    pub sigma1: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disorder samples per chain length.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub subsystem_site: Option<usize>,
    /// Worker threads (0 = all cores). Does not affect any output byte.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raise the chain-length cap (dense limit 14).
    #[arg(long)]
    pub max_n: Option<usize>,
    #[arg(long)]
    pub verbose: bool,
}

/// Effective configuration after defaults, config file and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n_values: Option<Vec<usize>>,
    pub sigma0: f64,
    pub sigma1: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub subsystem_site: usize,
    pub workers: usize,
    pub out: PathBuf,
    pub max_n: usize,
    pub subsample_threshold: usize,
    pub subsample_size: usize,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let plan = ExperimentPlan::default();
        Self {
            n_values: None,
            sigma0: plan.sigma0,
            sigma1: None,
            seed: plan.master_seed,
            samples: REFERENCE_SAMPLES,
            subsystem_site: plan.subsystem_site,
            workers: 0,
            out: PathBuf::from("out"),
            max_n: DEFAULT_MAX_SITES,
            subsample_threshold: plan.subsample_threshold,
            subsample_size: plan.subsample_size,
            verbose: false,
        }
    }
}

/// Parses `6`, `3,4,6` or `3..10` (inclusive).
pub fn parse_n_values(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse chain lengths `{text}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let values = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Applies a flat `key = value` text. Blank lines and `#` comments are ignored.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            match key.as_str() {
                "n" => self.n_values = Some(parse_n_values(value)?),
                "sigma0" => self.sigma0 = parse_value(&key, value)?,
                "sigma1" => self.sigma1 = Some(parse_value(&key, value)?),
                "seed" => self.seed = parse_value(&key, value)?,
                "samples" => self.samples = parse_value(&key, value)?,
                "subsystem_site" => self.subsystem_site = parse_value(&key, value)?,
                "workers" => self.workers = parse_value(&key, value)?,
                "out" => self.out = PathBuf::from(value),
                "max_n" => self.max_n = parse_value(&key, value)?,
                "subsample_threshold" => self.subsample_threshold = parse_value(&key, value)?,
                "subsample_size" => self.subsample_size = parse_value(&key, value)?,
                "verbose" => self.verbose = parse_value(&key, value)?,
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(())
    }

    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_config_text(&text)?;
        }
        if let Some(n) = &args.n {
            cfg.n_values = Some(parse_n_values(n)?);
        }
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {$(
                if let Some(v) = args.$field.clone() { cfg.$target = v; }
            )*};
        }
        set!(sigma0 => sigma0, seed => seed, samples => samples, subsystem_site => subsystem_site,
             workers => workers, out => out, max_n => max_n);
        if args.sigma1.is_some() {
            cfg.sigma1 = args.sigma1;
        }
        cfg.verbose |= args.verbose;
        if cfg.max_n > MAX_DENSE_SITES {
            return Err(Error::ResourceCap(format!(
                "max_n={} exceeds the dense limit of {MAX_DENSE_SITES} sites",
                cfg.max_n
            )));
        }
        if cfg.max_n > DEFAULT_MAX_SITES {
            eprintln!(
                "warning: max_n={} is above the default cap of {DEFAULT_MAX_SITES}; expect multi-GiB memory and long runtimes",
                cfg.max_n
            );
        }
        Ok(cfg)
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1.unwrap_or(REFERENCE_SIGMA1_RATIO * self.sigma0)
    }

    pub fn plan(&self) -> Result<ExperimentPlan> {
        if self.sigma0.is_nan() || self.sigma0 <= 0.0 {
            return Err(Error::Config("sigma0 must be positive".into()));
        }
        Ok(ExperimentPlan {
            n_values: self.n_values.clone().unwrap_or_else(|| ExperimentPlan::default().n_values),
            samples_per_n: self.samples,
            sigma0: self.sigma0,
            sigma1_ratio: self.sigma1() / self.sigma0,
            subsystem_site: self.subsystem_site,
            master_seed: self.seed,
            max_sites: self.max_n,
            subsample_threshold: self.subsample_threshold,
            subsample_size: self.subsample_size,
            workers: self.workers,
        })
    }

    /// The single chain length for per-chain commands (default 6).
    pub fn single_n(&self) -> Result<usize> {
        match self.n_values.as_deref() {
            None => Ok(6),
            Some([n]) => {
                if *n > self.max_n {
                    return Err(Error::ResourceCap(format!("n={n} exceeds the cap of {} sites", self.max_n)));
                }
                Ok(*n)
            }
            Some(_) => Err(Error::Config("this command takes a single chain length".into())),
        }
    }

    /// Echo for metadata sidecars. Leaves out the worker count and output
    /// path, which do not influence results.
    pub fn echo(&self) -> serde_json::Value {
        json!({
            "n": self.n_values,
            "sigma0": self.sigma0,
            "sigma1": self.sigma1(),
            "seed": self.seed,
            "samples": self.samples,
            "subsystem_site": self.subsystem_site,
            "max_n": self.max_n,
            "subsample_threshold": self.subsample_threshold,
            "subsample_size": self.subsample_size,
        })
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn cmd_hamiltonian(cfg: &RunConfig) -> Result<i32> {
    let n = cfg.single_n()?;
    let spec = sample_spec(n, cfg.sigma0, cfg.sigma1(), cfg.seed)?;
    let sd = diagonalize(&build_hamiltonian(&spec)?.full)?;
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("spec.json");
    fs::write(&path, spec.to_json()? + "\n")?;
    let e = sd.eigenvalues();
    println!("spec: {}", path.display());
    println!("n = {n}, dimension = {}", sd.dim());
    println!("min eigenvalue = {}", e[0]);
    println!("max eigenvalue = {}", e[e.len() - 1]);
    println!("degenerate levels: {}", !sd.is_nondegenerate());
    let gaps = sd.gap_degenerate();
    println!("degenerate gaps: {gaps}");
    if gaps {
        eprintln!("warning: the spectrum has degenerate gaps; equilibration bounds assume nondegenerate gaps");
    }
    Ok(EXIT_OK)
}

pub fn cmd_fig2(cfg: &RunConfig) -> Result<i32> {
    let plan = cfg.plan()?;
    plan.validate()?;
    if cfg.verbose {
        eprintln!("running n = {:?}, {} samples each", plan.n_values, plan.samples_per_n);
    }
    let output = run_sweep(&plan)?;
    let files = write_outputs(&cfg.out, &output, json!({ "config": cfg.echo() }))?;
    println!(
        "{:>3} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "n", "samples", "delta_k", "D_omega", "d_eff", "C_eq", "max_Delta"
    );
    for p in &output.panels {
        println!(
            "{:>3} {:>8} {:>12.5} {:>12.5} {:>12.3} {:>12.5} {:>12.5}",
            p.n, p.samples, p.delta_k.mean, p.d_omega.mean, p.d_eff.mean, p.c_eq.mean, p.max_margin.mean
        );
    }
    for a in &output.alignment {
        println!(
            "n = {}: sigma^Z alignment median {:.4}, {:.1}% above {}",
            a.n,
            a.median,
            100.0 * a.fraction_above_threshold,
            a.threshold
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(cfg: &RunConfig, fault: Option<&str>, quick: bool) -> Result<i32> {
    let fault = fault.map(str::parse::<Fault>).transpose()?;
    let plan = cfg.plan()?;
    let settings = if quick {
        VerifySettings { master_seed: plan.master_seed, sigma0: plan.sigma0, sigma1_ratio: plan.sigma1_ratio, ..VerifySettings::quick() }
    } else {
        VerifySettings::from_plan(&plan)
    };
    let report = run_verification_suite(&settings, fault)?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("verify_report.json");
    write_json(&path, &report)?;
    let failures = report.failures();
    if failures.is_empty() {
        println!("all {} checks passed; report: {}", report.checks.len(), path.display());
        Ok(EXIT_OK)
    } else {
        let names: Vec<&str> = failures.iter().map(|c| c.name.as_str()).collect();
        eprintln!("verification failed: {}", names.join(", "));
        Ok(EXIT_VERIFY_FAILED)
    }
}

pub fn cmd_quench(cfg: &RunConfig, sample_index: usize, k: usize) -> Result<i32> {
    let n = cfg.single_n()?;
    let plan = ExperimentPlan { n_values: vec![n], ..cfg.plan()? };
    plan.validate()?;
    let spec = sample_spec(n, plan.sigma0, plan.sigma1(), plan.sample_seed(n, sample_index))?;
    let sample = QuenchSample::prepare(spec, sample_index, plan.subsystem_site)?;
    let outcome = run_quench_pair(&sample, k)?;
    println!("{}", serde_json::to_string_pretty(&outcome.record)?);
    Ok(EXIT_OK)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceCap(_) => EXIT_RESOURCE,
        _ => EXIT_IO,
    }
}

pub fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Hamiltonian(args) => cmd_hamiltonian(&RunConfig::resolve(&args)?),
        Command::Fig2(args) => cmd_fig2(&RunConfig::resolve(&args)?),
        Command::Verify { common, inject_fault, quick } => {
            cmd_verify(&RunConfig::resolve(&common)?, inject_fault.as_deref(), quick)
        }
        Command::Quench { common, sample_index, k } => cmd_quench(&RunConfig::resolve(&common)?, sample_index, k),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
