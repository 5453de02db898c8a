//! `scforge <command> --config FILE [--jobs N] [--seed S] [--out DIR]`
//!
//! Every command writes `<command>.json` with its results and the config
//! hash into the output directory, plus command-specific artifacts. Exit
//! codes: 0 success, 1 runtime or construction failure, 2 config error.

pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::construct::{self, build_met, build_peg, build_random, TannerGraph};
use crate::de::{precompute_delta_with_model, threshold_bracket, DeModel};
use crate::designer::{design_max_rate, design_min_iters, design_min_iters_nonuniform_checks};
use crate::ege::{ege_run, EgeOutcome};
use crate::ensemble::{io as ens_io, Ensemble};
use crate::error::{Error, Result};
use crate::sim::estimate_fer;
use config::Loaded;

#[derive(Debug, Parser)]
#[command(name = "scforge", version, about = "Spatially-coupled LDPC / RA ensemble design over the BEC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Design rate of the ensemble.
    Rate,
    /// BP threshold by density evolution.
    Threshold,
    /// Local degree distribution design (alg 2, 3 or 4).
    Design,
    /// Transfer function samples at one position.
    Delta,
    /// Expected graph evolution of the peeling decoder.
    Ege,
    /// Finite-length graph instance.
    Build,
    /// Block erasure rate of a graph instance.
    Simulate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Rate => "rate",
            Command::Threshold => "threshold",
            Command::Design => "design",
            Command::Delta => "delta",
            Command::Ege => "ege",
            Command::Build => "build",
            Command::Simulate => "simulate",
        }
    }
}

/// Outcome of a command: the line printed on stdout and the JSON summary.
struct Report {
    line: String,
    summary: Value,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("scforge {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}

/// Runs a parsed command line; returns the printed line.
pub fn execute(cli: &Cli) -> Result<String> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config FILE is required".into()))?;
    let cfg = config::load(path, cli.seed)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.jobs {
            if n == 0 {
                return Err(Error::Config("--jobs must be positive".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(e.to_string()))?
    };
    std::fs::create_dir_all(&cli.out)?;
    let report = pool.install(|| match cli.command {
        Command::Rate => cmd_rate(&cfg),
        Command::Threshold => cmd_threshold(&cfg),
        Command::Design => cmd_design(&cfg, &cli.out),
        Command::Delta => cmd_delta(&cfg, &cli.out),
        Command::Ege => cmd_ege(&cfg, &cli.out),
        Command::Build => cmd_build(&cfg, &cli.out),
        Command::Simulate => cmd_simulate(&cfg, &cli.out),
    })?;
    let mut summary = report.summary;
    summary["command"] = json!(cli.command.name());
    summary["config_hash"] = json!(cfg.hash);
    summary["seed"] = json!(cfg.seed());
    let text = serde_json::to_string_pretty(&summary).expect("plain data serializes");
    std::fs::write(cli.out.join(format!("{}.json", cli.command.name())), text + "\n")?;
    Ok(report.line)
}

fn rate_of(e: &Ensemble, include_last_term: bool) -> f64 {
    match e {
        Ensemble::Ldpc(x) => x.general_rate(include_last_term),
        Ensemble::Ra(x) => x.design_rate(),
    }
}

fn threshold_of(e: &Ensemble, cfg: &Loaded) -> (f64, f64) {
    threshold_bracket(&DeModel::from_ensemble(e), &cfg.de_options())
}

fn cmd_rate(cfg: &Loaded) -> Result<Report> {
    let e = cfg.ensemble()?;
    let rate = rate_of(&e, cfg.config.rate.include_last_term);
    Ok(Report { line: format!("{rate:.6}"), summary: json!({ "rate": rate }) })
}

fn cmd_threshold(cfg: &Loaded) -> Result<Report> {
    let e = cfg.ensemble()?;
    let (lo, hi) = threshold_of(&e, cfg);
    let t = 0.5 * (lo + hi);
    Ok(Report { line: format!("{t:.6}"), summary: json!({ "threshold": t, "bracket": [lo, hi] }) })
}

fn cmd_design(cfg: &Loaded, out: &Path) -> Result<Report> {
    let e = cfg.ensemble()?;
    let (alg, p) = cfg.design()?;
    let de = cfg.de_options();
    let ldpc = || match &e {
        Ensemble::Ldpc(x) => Ok(x),
        Ensemble::Ra(_) => Err(Error::Config(format!("algorithm {alg} needs an sc-ldpc ensemble"))),
    };
    let outcome = match alg {
        2 => design_max_rate(ldpc()?, &p, &de, None)?,
        3 => design_min_iters(&e, &p, &de, None)?,
        _ => design_min_iters_nonuniform_checks(ldpc()?, &p, &de, None)?,
    };
    let designed = &outcome.ensemble;
    ens_io::save(designed, &out.join("designed.ens"))?;
    std::fs::write(out.join("design_log.csv"), outcome.log_csv())?;
    let (lo, hi) = threshold_of(designed, cfg);
    let t = 0.5 * (lo + hi);
    let rate = rate_of(designed, false);
    Ok(Report {
        line: format!("threshold {t:.6} rate {rate:.6}"),
        summary: json!({
            "alg": alg,
            "threshold": t,
            "rate": rate,
            "steps": outcome.log.len(),
            "warnings": outcome.warnings,
            "ensemble_hash": ens_io::ensemble_hash(designed),
        }),
    })
}

fn cmd_delta(cfg: &Loaded, out: &Path) -> Result<Report> {
    let e = cfg.ensemble()?;
    let s = cfg.delta()?;
    let p = precompute_delta_with_model(&DeModel::from_ensemble(&e), s.epsilon, s.u, s.q_grid, &cfg.de_options())
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(out.join("delta.csv"), p.to_csv())?;
    Ok(Report {
        line: format!("{} samples at position {}", p.len(), s.u),
        summary: json!({ "epsilon": s.epsilon, "u": s.u, "q_grid": s.q_grid }),
    })
}

fn cmd_ege(cfg: &Loaded, out: &Path) -> Result<Report> {
    let Ensemble::Ldpc(e) = cfg.ensemble()? else {
        return Err(Error::Config("graph evolution needs an sc-ldpc ensemble".into()));
    };
    let (eps, opts) = cfg.ege()?;
    let tr = ege_run(&e, eps, &opts);
    std::fs::write(out.join("ege.csv"), tr.to_csv())?;
    let outcome = match tr.outcome {
        EgeOutcome::Success => "success",
        EgeOutcome::Stall => "stall",
        EgeOutcome::Budget => "budget",
    };
    let end = tr.samples.last().map_or(0.0, |s| s.tau);
    Ok(Report {
        line: format!("{outcome} at tau {end:.4}"),
        summary: json!({
            "epsilon": eps,
            "outcome": outcome,
            "final_tau": end,
            "samples": tr.samples.len(),
            "clamped": tr.clamped,
            "conservation_error": tr.conservation_error,
        }),
    })
}

fn graph_summary(g: &TannerGraph) -> Value {
    json!({
        "vars": g.num_vars(),
        "checks": g.num_checks(),
        "edges": g.num_edges(),
        "short_cycle": g.girth_up_to(6),
        "lint": g.lint(),
    })
}

fn cmd_build(cfg: &Loaded, out: &Path) -> Result<Report> {
    let e = cfg.ensemble()?;
    let (method, peg) = cfg.build()?;
    let seed = cfg.seed();
    let g = match (method.as_str(), &e) {
        ("peg", _) => build_peg(&e, &peg, seed)?,
        ("random", Ensemble::Ldpc(x)) => build_random(x, seed)?,
        ("met", Ensemble::Ldpc(x)) => build_met(x, seed)?,
        (m, Ensemble::Ra(_)) => return Err(Error::Config(format!("sc-ra instances use method peg, not {m}"))),
        _ => unreachable!("method validated"),
    };
    let path = out.join("graph.txt");
    construct::save(&g, &path)?;
    let mut summary = graph_summary(&g);
    summary["method"] = json!(method);
    summary["graph"] = json!(path);
    Ok(Report { line: format!("{} variables, {} checks, {} edges", g.num_vars(), g.num_checks(), g.num_edges()), summary })
}

fn cmd_simulate(cfg: &Loaded, out: &Path) -> Result<Report> {
    let (path, eps, stop) = cfg.simulate()?;
    let g = construct::load(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let r = estimate_fer(&g, &eps, stop, cfg.seed());
    std::fs::write(out.join("simulate.csv"), r.to_csv())?;
    let line = r.points.iter().map(|p| format!("{}:{:.3e}", p.epsilon, p.fer)).collect::<Vec<_>>().join(" ");
    Ok(Report { line, summary: serde_json::to_value(&r).expect("plain data serializes") })
}
