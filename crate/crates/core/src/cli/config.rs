//! TOML run configuration. Every table rejects unknown keys.
//!
//! ```toml
//! seed = 1
//!
//! [ensemble]            # either `file = "x.ens"` or inline parameters
//! kind = "sc-ldpc"      # or "sc-ra"
//! l = 4
//! r = 8
//! L = 10
//! w = 3
//! M = 990
//! met = false
//!
//! [design]
//! alg = 3
//!
//! [simulate]
//! graph = "graph.txt"
//! eps = [0.44, 0.46]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::de::DeOptions;
use crate::designer::DesignParams;
use crate::ege::EgeOptions;
use crate::ensemble::{io as ens_io, Ensemble, ScEnsemble, ScRaEnsemble};
use crate::error::{Error, Result};
use crate::construct::PegParams;
use crate::sim::StopRule;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub ensemble: Option<EnsembleSection>,
    #[serde(default)]
    pub de: DeSection,
    #[serde(default)]
    pub rate: RateSection,
    pub design: Option<DesignSection>,
    pub delta: Option<DeltaSection>,
    pub ege: Option<EgeSection>,
    pub build: Option<BuildSection>,
    pub simulate: Option<SimSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub file: Option<PathBuf>,
    pub kind: Option<String>,
    pub l: Option<usize>,
    pub r: Option<usize>,
    #[serde(rename = "L")]
    pub positions: Option<usize>,
    pub w: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub q: Option<usize>,
    #[serde(default)]
    pub met: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeSection {
    pub convergence_eps: Option<f64>,
    pub fixpoint_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub bisect_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    #[serde(default)]
    pub include_last_term: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub alg: u8,
    pub l_min: Option<usize>,
    pub l_max: Option<usize>,
    pub r_min: Option<usize>,
    pub r_max: Option<usize>,
    pub q_grid: Option<usize>,
    pub i_max: Option<usize>,
    pub margin: Option<f64>,
    pub literal_check_update: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaSection {
    pub epsilon: f64,
    pub u: usize,
    #[serde(default = "default_q")]
    pub q_grid: usize,
}

fn default_q() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgeSection {
    pub epsilon: f64,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub stall_tol: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildSection {
    /// `random`, `met` or `peg`.
    pub method: String,
    pub target_girth: Option<usize>,
    pub expand_l: Option<usize>,
    pub expand_d: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub graph: PathBuf,
    pub eps: Vec<f64>,
    pub min_errors: Option<u64>,
    pub max_trials: Option<u64>,
}

/// A parsed configuration with the directory relative paths refer to.
#[derive(Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub base: PathBuf,
    pub hash: String,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn parse(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
}

/// Reads `path`; the hash covers the file bytes and the seed override.
pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Loaded> {
    let bytes = std::fs::read(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| cfg_err("config is not UTF-8"))?;
    let mut config = parse(&text)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    if let Some(s) = seed_override {
        h.update(format!("\nseed override {s}"));
        config.seed = Some(s);
    }
    let hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, base, hash })
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(0)
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        let s = self.config.ensemble.as_ref().ok_or_else(|| cfg_err("missing [ensemble]"))?;
        if let Some(f) = &s.file {
            let e = ens_io::load(&self.resolve(f)).map_err(|e| cfg_err(format!("{}: {e}", f.display())))?;
            let bad = e.validate();
            if !bad.is_empty() {
                return Err(cfg_err(format!("{}: {}", f.display(), bad[0])));
            }
            return Ok(e);
        }
        let need = |x: Option<usize>, k: &str| x.ok_or_else(|| cfg_err(format!("[ensemble] needs `{k}`")));
        let kind = s.kind.as_deref().unwrap_or("sc-ldpc");
        let e = match kind {
            "sc-ldpc" => {
                let e = ScEnsemble::regular(need(s.l, "l")?, need(s.r, "r")?, need(s.positions, "L")?, need(s.w, "w")?, need(s.m, "M")?)
                    .map_err(|e| cfg_err(e.to_string()))?;
                Ensemble::Ldpc(if s.met { e.with_met().map_err(|e| cfg_err(e.to_string()))? } else { e })
            }
            "sc-ra" => Ensemble::Ra(
                ScRaEnsemble::regular(need(s.q, "q")?, need(s.positions, "L")?, need(s.m, "M")?).map_err(|e| cfg_err(e.to_string()))?,
            ),
            k => return Err(cfg_err(format!("unknown ensemble kind `{k}`"))),
        };
        Ok(e)
    }

    pub fn de_options(&self) -> DeOptions {
        let d = &self.config.de;
        let base = DeOptions::default();
        DeOptions {
            convergence_eps: d.convergence_eps.unwrap_or(base.convergence_eps),
            fixpoint_tol: d.fixpoint_tol.unwrap_or(base.fixpoint_tol),
            max_iters: d.max_iters.unwrap_or(base.max_iters),
            bisect_tol: d.bisect_tol.unwrap_or(base.bisect_tol),
        }
    }

    pub fn design(&self) -> Result<(u8, DesignParams)> {
        let s = self.config.design.as_ref().ok_or_else(|| cfg_err("missing [design]"))?;
        let b = DesignParams::default();
        let p = DesignParams {
            l_min: s.l_min.unwrap_or(b.l_min),
            l_max: s.l_max.unwrap_or(b.l_max),
            r_min: s.r_min.unwrap_or(b.r_min),
            r_max: s.r_max.unwrap_or(b.r_max),
            q_grid: s.q_grid.unwrap_or(b.q_grid),
            i_max: s.i_max.unwrap_or(b.i_max),
            margin: s.margin.unwrap_or(b.margin),
            literal_check_update: s.literal_check_update.unwrap_or(b.literal_check_update),
            ..b
        };
        if !(2..=4).contains(&s.alg) {
            return Err(cfg_err(format!("[design] alg must be 2, 3 or 4, got {}", s.alg)));
        }
        Ok((s.alg, p))
    }

    pub fn delta(&self) -> Result<&DeltaSection> {
        self.config.delta.as_ref().ok_or_else(|| cfg_err("missing [delta]"))
    }

    pub fn ege(&self) -> Result<(f64, EgeOptions)> {
        let s = self.config.ege.as_ref().ok_or_else(|| cfg_err("missing [ege]"))?;
        let b = EgeOptions::default();
        Ok((
            s.epsilon,
            EgeOptions {
                step: s.step.or(b.step),
                tol: s.tol.unwrap_or(b.tol),
                stall_tol: s.stall_tol.unwrap_or(b.stall_tol),
                max_steps: s.max_steps.unwrap_or(b.max_steps),
            },
        ))
    }

    pub fn build(&self) -> Result<(String, PegParams)> {
        let s = self.config.build.as_ref().ok_or_else(|| cfg_err("missing [build]"))?;
        let b = PegParams::default();
        let p = PegParams {
            target_girth: s.target_girth.unwrap_or(b.target_girth),
            expand_l: s.expand_l.unwrap_or(b.expand_l),
            expand_d: s.expand_d.unwrap_or(b.expand_d),
        };
        match s.method.as_str() {
            "random" | "met" | "peg" => Ok((s.method.clone(), p)),
            m => Err(cfg_err(format!("[build] method must be random, met or peg, got `{m}`"))),
        }
    }

    pub fn simulate(&self) -> Result<(PathBuf, Vec<f64>, StopRule)> {
        let s = self.config.simulate.as_ref().ok_or_else(|| cfg_err("missing [simulate]"))?;
        if s.eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(cfg_err("[simulate] eps values must lie in [0, 1]"));
        }
        let b = StopRule::default();
        let stop = StopRule { min_errors: s.min_errors.unwrap_or(b.min_errors), max_trials: s.max_trials.unwrap_or(b.max_trials) };
        if stop.max_trials == 0 {
            return Err(cfg_err("[simulate] max_trials must be positive"));
        }
        Ok((self.resolve(&s.graph), s.eps.clone(), stop))
    }
}
