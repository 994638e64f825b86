//! `lpw`: batch front end for norms, decompositions, weight probes and the
//! verification suites.
//!
//! Exit status is 0 on success, 1 when a selected suite fails and 2 on a
//! configuration, input or report error.

use clap::{Parser, Subcommand};
use lpw::config::RunConfig;
use lpw::grid::GridFunction;
use lpw::lpaley::{analyze, bands};
use lpw::report::{suite_csv, Report};
use lpw::spaces::{compute_norm, NormContext, TestFunctionDictionary};
use lpw::verify::{Corpus, Harness, SUITES};
use lpw::weights::{
    alpha_grid, ap_constant, pair_maxima, reverse_holder_probe, xclass_constants, xclass_fit, Witness,
};
use lpw::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "lpw", version, about = "Weighted Besov and Triebel-Lizorkin norms on a periodic grid")]
struct Cli {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "lpw-out")]
    out: PathBuf,
    /// Overrides the corpus seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true, env = "LPW_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluates the norm described by the `norm` section of the config.
    Norm,
    /// Writes the band functions and φ-transform coefficients of the `norm` input.
    Decompose,
    /// Probes the weight described by the `weights` section of the config.
    Weights {
        #[command(subcommand)]
        probe: Probe,
    },
    /// Runs one suite, or `all` selected by the config.
    Verify { suite: String },
    /// Renders a report as a text table and per-suite CSV files.
    Report {
        /// Report to render; `<out>/report.json` when absent.
        path: Option<PathBuf>,
    },
}

#[derive(Subcommand, Clone, Copy)]
enum Probe {
    /// Muckenhoupt `A_p` estimate over the configured cube family.
    Ap,
    /// Growth constants of the weight sequence and the fitted exponents.
    Xclass,
    /// Reverse Hölder exponents.
    Rh,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lpw: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Io(io) => Error::config("--config", format!("{}: {io}", p.display())),
            other => other,
        })?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.corpus.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Prints `text` and stores it under the output directory.
fn emit(cli: &Cli, name: &str, text: &str) -> Result<()> {
    print!("{text}");
    write(&cli.out.join(name), text)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Error::config("--threads", "needs at least one thread"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Report { path } => render(cli, path.clone().unwrap_or_else(|| cli.out.join("report.json"))),
        Command::Norm => norm(cli, &load_config(cli)?),
        Command::Decompose => decompose(cli, &load_config(cli)?),
        Command::Weights { probe } => weights(cli, &load_config(cli)?, *probe),
        Command::Verify { suite } => verify(cli, load_config(cli)?, suite),
    }
}

/// The `norm` input, or the first corpus member when none is configured.
fn input(cfg: &RunConfig) -> Result<GridFunction> {
    match &cfg.norm.input {
        Some(stem) => {
            let f = GridFunction::read_from(Path::new(stem)).map_err(|e| Error::config("norm.input", e.to_string()))?;
            if *f.spec() != cfg.grid_spec()? {
                return Err(Error::config("norm.input", "grid differs from the configured grid"));
            }
            Ok(f)
        }
        None => {
            let pair = cfg.pair()?;
            let mut c = Corpus::for_pair(&pair, 1, cfg.corpus.seed)?;
            Ok(c.members.remove(0).f)
        }
    }
}

fn norm(cli: &Cli, cfg: &RunConfig) -> Result<bool> {
    let req = cfg.norm_request()?;
    let pair = cfg.pair()?;
    let family = cfg.sample_family()?;
    let dictionary = TestFunctionDictionary::standard(pair.spec.n)?;
    let ctx = NormContext { pair: &pair, family: &family, dictionary: &dictionary };
    let rec = compute_norm(&input(cfg)?, &req, &ctx)?;
    emit(cli, "norm.json", &json(&rec)?)?;
    Ok(true)
}

fn decompose(cli: &Cli, cfg: &RunConfig) -> Result<bool> {
    let pair = cfg.pair()?;
    let f = input(cfg)?;
    let dir = cli.out.join("decompose");
    fs::create_dir_all(&dir)?;
    bands(&f, &pair)?.write_to(&dir.join("band"))?;
    let lambda = analyze(&f, &pair)?;
    lambda.write_jsonl(fs::File::create(dir.join("coefficients.jsonl"))?)?;
    println!("{} levels, {} coefficients written to {}", pair.count(), lambda.len(), dir.display());
    Ok(true)
}

#[derive(Serialize)]
struct ApOutput {
    weight: String,
    p: f64,
    v_min: i32,
    v_max: i32,
    constant: f64,
    witness: Witness,
}

fn weights(cli: &Cli, cfg: &RunConfig, probe: Probe) -> Result<bool> {
    let w = &cfg.weights;
    let spec = cfg.grid_spec()?;
    let family = cfg.weight_family();
    let wspec = family.weight_grid(spec.n, spec.half_width)?;
    let cubes = family.cubes(&wspec)?;
    let text = match probe {
        Probe::Ap => {
            let gamma = lpw::weights::WeightSpec::parse(&w.weight)?;
            let est = ap_constant(&gamma, w.p, &wspec, &cubes)?;
            json(&ApOutput {
                weight: w.weight.clone(),
                p: w.p,
                v_min: family.v_min,
                v_max: family.v_max,
                constant: est.constant,
                witness: Witness::from(&est.witness),
            })?
        }
        Probe::Xclass => {
            let ts = w.sequence.build()?;
            let levels = (cfg.levels.k_min, cfg.levels.k_max);
            let constants = xclass_constants(&ts, levels, w.p, w.alpha, w.sigma, &wspec, &cubes)?;
            let pm = pair_maxima(&ts, levels, w.p, w.sigma, &wspec, &cubes)?;
            let fit = xclass_fit(&pm, &alpha_grid(-6.0, 6.0, 0.05), 1e-9)?;
            let mut out = BTreeMap::new();
            out.insert("constants", serde_json::to_value(constants)?);
            out.insert("fit", serde_json::to_value(fit)?);
            json(&out)?
        }
        Probe::Rh => {
            let gamma = lpw::weights::WeightSpec::parse(&w.weight)?;
            json(&reverse_holder_probe(&gamma, w.p, &wspec, &cubes, &w.eps, w.rh_bound, cfg.ceilings.ap)?)?
        }
    };
    let name = match probe {
        Probe::Ap => "weights_ap.json",
        Probe::Xclass => "weights_xclass.json",
        Probe::Rh => "weights_rh.json",
    };
    emit(cli, name, &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct Timings {
    threads: usize,
    total_seconds: f64,
    suites: BTreeMap<String, f64>,
}

fn verify(cli: &Cli, cfg: RunConfig, suite: &str) -> Result<bool> {
    let names = if suite == "all" {
        cfg.selected_suites()
    } else if SUITES.contains(&suite) {
        vec![suite.to_string()]
    } else {
        return Err(Error::config("suite", format!("unknown suite `{suite}`; known: all, {}", SUITES.join(", "))));
    };
    let start = Instant::now();
    let harness = Harness::new(cfg.clone())?;
    let mut results = Vec::new();
    let mut timings = BTreeMap::new();
    for name in &names {
        let t = Instant::now();
        let r = harness.run(name)?;
        let secs = t.elapsed().as_secs_f64();
        eprintln!("{:<18} {}  {secs:.2} s", name, if r.pass { "pass" } else { "FAIL" });
        timings.insert(name.clone(), secs);
        results.push(r);
    }
    let report = Report::new(cfg, results);
    write(&cli.out.join("report.json"), &report.to_json()?)?;
    write_rendering(cli, &report)?;
    let t = Timings { threads: rayon::current_num_threads(), total_seconds: start.elapsed().as_secs_f64(), suites: timings };
    write(&cli.out.join("timings.json"), &json(&t)?)?;
    print!("{}", report.table());
    Ok(report.pass)
}

fn write_rendering(cli: &Cli, report: &Report) -> Result<()> {
    write(&cli.out.join("report.txt"), &report.table())?;
    for s in &report.suites {
        write(&cli.out.join("csv").join(format!("{}.csv", s.name)), &suite_csv(s)?)?;
    }
    Ok(())
}

fn render(cli: &Cli, path: PathBuf) -> Result<bool> {
    let text = fs::read_to_string(&path).map_err(|e| Error::config("report", format!("{}: {e}", path.display())))?;
    let report = Report::from_json(&text)?;
    write_rendering(cli, &report)?;
    print!("{}", report.table());
    Ok(true)
}
