//! Iterated local design of per-position degree distributions.
//!
//! Every algorithm sweeps the symmetric position pairs `(u, L-1-u)` from the
//! center outwards, recomputes the BP threshold, samples the transfer
//! function `δ_u` and re-optimizes `λ_u` by linear programming.

mod local;

use num_rational::Rational64;
use rayon::prelude::*;

use crate::de::{precompute_delta_with_model, threshold_bracket, DeModel, DeOptions};
use crate::ensemble::{ratio_f64, DegreeDistribution, Ensemble, ScEnsemble};
use crate::error::{param_err, Result};
use local::LocalProblem;

pub use local::linearize_iteration_objective;

#[derive(Clone, Debug, PartialEq)]
pub struct DesignParams {
    pub l_min: usize,
    pub l_max: usize,
    /// Check degree sweep, non-uniform check design only.
    pub r_min: usize,
    pub r_max: usize,
    /// Grid size of the transfer-function samples.
    pub q_grid: usize,
    /// Outer iterations.
    pub i_max: usize,
    /// Decoding constraints are imposed as `ε λ(δ) ≤ z (1 - margin)`.
    pub margin: f64,
    pub slp_tol: f64,
    pub slp_max_rounds: usize,
    /// Non-uniform check design: set `T[v][u] = r_v M_c - Σ_{j≠u} T[v][j]`
    /// verbatim instead of moving only the filled sockets (see
    /// [`design_min_iters_nonuniform_checks`]).
    pub literal_check_update: bool,
}

impl Default for DesignParams {
    fn default() -> Self {
        DesignParams {
            l_min: 3,
            l_max: 10,
            r_min: 6,
            r_max: 8,
            q_grid: 1000,
            i_max: 10,
            margin: 1e-6,
            slp_tol: 1e-6,
            slp_max_rounds: 50,
            literal_check_update: false,
        }
    }
}

impl DesignParams {
    fn check(&self) -> Result<()> {
        if self.l_min < 2 || self.l_min > self.l_max {
            return param_err(format!("need 2 ≤ l_min ≤ l_max, got {}..{}", self.l_min, self.l_max));
        }
        if self.r_min > self.r_max || self.r_min < 2 {
            return param_err(format!("bad check degree range {}..{}", self.r_min, self.r_max));
        }
        if self.q_grid < 10 {
            return param_err(format!("grid size {} below 10", self.q_grid));
        }
        Ok(())
    }
}

/// One committed local design step.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignStep {
    /// Outer iteration, from 1.
    pub iter: usize,
    /// Designed position (0-based; its mirror receives the same `λ`).
    pub u: usize,
    /// Threshold estimate used for the constraints.
    pub eps_bp: f64,
    /// Local objective: `∫λ` (rate design) or the iteration estimate.
    pub objective: f64,
    /// Check position and degree picked by the non-uniform check design.
    pub check: Option<(usize, usize)>,
    pub avg_degree: f64,
    pub changed: bool,
}

#[derive(Clone, Debug)]
pub struct DesignOutcome {
    pub ensemble: Ensemble,
    pub log: Vec<DesignStep>,
    pub warnings: Vec<String>,
}

impl DesignOutcome {
    /// CSV with columns `iter,u,eps_bp,objective,v,r_v,avg_degree,changed`.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iter,u,eps_bp,objective,v,r_v,avg_degree,changed\n");
        for st in &self.log {
            let (v, r) = st.check.map_or((String::new(), String::new()), |(v, r)| (v.to_string(), r.to_string()));
            s.push_str(&format!(
                "{},{},{},{},{v},{r},{},{}\n",
                st.iter, st.u, st.eps_bp, st.objective, st.avg_degree, st.changed
            ));
        }
        s
    }
}

/// Called after every local step with the step record and the current
/// ensemble.
pub type Observer<'a> = &'a mut dyn FnMut(&DesignStep, &Ensemble);

fn check_even(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return param_err(format!("local design needs even L, got {n}"));
    }
    Ok(())
}

fn set_pair(e: &mut Ensemble, u: usize, lam: DegreeDistribution) {
    let mirror = e.positions() - 1 - u;
    match e {
        Ensemble::Ldpc(x) => {
            x.set_lambda(u, lam.clone());
            x.set_lambda(mirror, lam);
        }
        Ensemble::Ra(x) => {
            x.set_lambda(u, lam.clone());
            x.set_lambda(mirror, lam);
        }
    }
}

/// Largest `ε` at which DE provably converges (lower bisection bracket), so
/// the incumbent `λ_u` satisfies the decoding constraints.
fn design_epsilon(model: &DeModel, opts: &DeOptions) -> f64 {
    threshold_bracket(model, opts).0
}

const CHANGE_TOL: f64 = 1e-6;

/// Rate maximization: each local step maximizes `∫λ_u` under the
/// decoding constraints and sets `N_u = (Σ_i T[i][u]) ∫λ_u`.
pub fn design_max_rate(
    e: &ScEnsemble,
    p: &DesignParams,
    opts: &DeOptions,
    observer: Option<Observer>,
) -> Result<DesignOutcome> {
    p.check()?;
    check_even(e.positions())?;
    let mut ens = e.clone();
    let mut model = DeModel::ldpc(&ens);
    let mut log = Vec::new();
    let mut warnings = Vec::new();
    let mut observer = observer;
    let n = ens.positions();
    for iter in 1..=p.i_max {
        let mut any_change = false;
        for u in (0..n / 2).rev() {
            let eps = design_epsilon(&model, opts);
            let prof = precompute_delta_with_model(&model, eps, u, p.q_grid, opts)?;
            let local = LocalProblem::new(&prof, eps, p.l_min, p.l_max, p.margin);
            let old = ens.lambda(u).clone();
            let (lam, changed) = match local.max_rate().map(|x| local.to_distribution(&x)) {
                Some(Ok(lam)) => {
                    let changed = lam.max_abs_diff(&old) > CHANGE_TOL;
                    (if changed { lam } else { old.clone() }, changed)
                }
                _ => {
                    warnings.push(format!("iteration {iter}, position {u}: rate LP infeasible, λ kept"));
                    (old.clone(), false)
                }
            };
            any_change |= changed;
            let mirror = n - 1 - u;
            let sockets = ratio_f64(ens.connectivity().col_sum(u));
            ens.set_lambda(u, lam.clone());
            ens.set_lambda(mirror, lam.clone());
            ens.set_var_count(u, sockets * lam.integral());
            ens.set_var_count(mirror, ratio_f64(ens.connectivity().col_sum(mirror)) * lam.integral());
            model.set_lambda(u, lam.clone());
            model.set_lambda(mirror, lam.clone());
            let step = DesignStep {
                iter,
                u,
                eps_bp: eps,
                objective: lam.integral(),
                check: None,
                avg_degree: lam.average_degree(),
                changed,
            };
            if let Some(obs) = observer.as_mut() {
                obs(&step, &Ensemble::Ldpc(ens.clone()));
            }
            log.push(step);
        }
        if !any_change {
            break;
        }
    }
    Ok(DesignOutcome { ensemble: Ensemble::Ldpc(ens), log, warnings })
}

/// Minimizes the one-dimensional iteration estimate at `u` for a fixed
/// average degree. Starts from `current` when it is feasible.
fn local_min_iters(
    local: &LocalProblem,
    current: &DegreeDistribution,
    inv_avg: f64,
    p: &DesignParams,
) -> Option<(Vec<f64>, f64)> {
    let start = local
        .restrict(current)
        .filter(|x| local.is_feasible(x, Some(inv_avg)))
        .or_else(|| local.feasible_start(Some(inv_avg)))?;
    Some(local.min_iterations(start, Some(inv_avg), p.slp_tol, p.slp_max_rounds))
}

/// Iteration-count minimization with the average degree held at its
/// initial value (`l` for LDPC, `q` for SC-RA).
pub fn design_min_iters(
    e: &Ensemble,
    p: &DesignParams,
    opts: &DeOptions,
    observer: Option<Observer>,
) -> Result<DesignOutcome> {
    p.check()?;
    check_even(e.positions())?;
    let inv_avg = match e {
        Ensemble::Ldpc(x) => 1.0 / x.l() as f64,
        Ensemble::Ra(x) => 1.0 / x.q() as f64,
    };
    let mut ens = e.clone();
    let mut model = DeModel::from_ensemble(&ens);
    let mut log = Vec::new();
    let mut warnings = Vec::new();
    let mut observer = observer;
    let n = ens.positions();
    for iter in 1..=p.i_max {
        let mut any_change = false;
        for u in (0..n / 2).rev() {
            let eps = design_epsilon(&model, opts);
            let prof = precompute_delta_with_model(&model, eps, u, p.q_grid, opts)?;
            let local = LocalProblem::new(&prof, eps, p.l_min, p.l_max, p.margin);
            let old = ens.lambdas()[u].clone();
            let (lam, objective, changed) = match local_min_iters(&local, &old, inv_avg, p) {
                Some((x, f)) => match local.to_distribution(&x) {
                    Ok(lam) if lam.max_abs_diff(&old) > CHANGE_TOL => (lam, f, true),
                    _ => (old.clone(), f, false),
                },
                None => {
                    warnings.push(format!("iteration {iter}, position {u}: no feasible λ, kept"));
                    (old.clone(), f64::INFINITY, false)
                }
            };
            any_change |= changed;
            set_pair(&mut ens, u, lam.clone());
            model.set_lambda(u, lam.clone());
            model.set_lambda(n - 1 - u, lam.clone());
            let step = DesignStep {
                iter,
                u,
                eps_bp: eps,
                objective,
                check: None,
                avg_degree: lam.average_degree(),
                changed,
            };
            if let Some(obs) = observer.as_mut() {
                obs(&step, &ens);
            }
            log.push(step);
        }
        if !any_change {
            break;
        }
    }
    Ok(DesignOutcome { ensemble: ens, log, warnings })
}

struct Candidate {
    v: usize,
    r: usize,
    ensemble: ScEnsemble,
    lambda: Vec<f64>,
    objective: f64,
}

/// Applies check degree `r` at position `v` (and its mirror) for the design
/// of variable position `u`. Returns `None` when the change would need a
/// negative edge count or overfill the checks.
fn with_check_degree(e: &ScEnsemble, u: usize, v: usize, r: usize, literal: bool) -> Option<ScEnsemble> {
    let mut c = e.clone();
    let mc = Rational64::from_integer(e.mc() as i64);
    let (um, vm) = (e.mirror_var(u), e.mirror_check(v));
    let t = e.connectivity();
    let new_entry = if literal {
        let others: Rational64 = t.row_range(v).filter(|&j| j != u).map(|j| t.get(v, j)).sum();
        mc * Rational64::from_integer(r as i64) - others
    } else {
        // the row keeps its count of unfilled sockets
        t.get(v, u) + mc * Rational64::from_integer(r as i64 - e.check_degree(v) as i64)
    };
    if new_entry < Rational64::from_integer(0) {
        return None;
    }
    let tm = c.connectivity_mut();
    if vm == v {
        // self-mirrored row: both u and its mirror share the change
        let half = (new_entry - t.get(v, u)) / Rational64::from_integer(2);
        let a = t.get(v, u) + half;
        if a < Rational64::from_integer(0) {
            return None;
        }
        tm.set(v, u, a);
        tm.set(v, um, a);
    } else {
        tm.set(v, u, new_entry);
        tm.set(vm, um, new_entry);
    }
    c.set_check_degree(v, r);
    c.set_check_degree(vm, r);
    let cap = mc * Rational64::from_integer(r as i64);
    if c.connectivity().row_sum(v) > cap || c.connectivity().row_sum(vm) > cap {
        return None;
    }
    Some(c)
}

/// Iteration-count minimization that also picks one check degree `r_v`,
/// `v ∈ [u, u+w)`, per local step.
///
/// Each candidate `(v, r_v)` starts from the incumbent ensemble. By default
/// `T[v][u]` moves by `(r_v - r_old) M_c`, so boundary rows keep their
/// unfilled sockets; with `literal_check_update` the row is refilled to
/// `r_v M_c` instead (identical on full interior rows). The average degree
/// of `λ_u` follows the new column sum: `1/∫λ_u = Σ_i T[i][u] / M`.
/// Candidates are ranked by the iteration estimate, then smaller `r_v`, then
/// smaller `v`.
pub fn design_min_iters_nonuniform_checks(
    e: &ScEnsemble,
    p: &DesignParams,
    opts: &DeOptions,
    observer: Option<Observer>,
) -> Result<DesignOutcome> {
    p.check()?;
    check_even(e.positions())?;
    if e.met().is_some() {
        return param_err("non-uniform check design needs the random-construction ensemble");
    }
    let mut ens = e.clone();
    let mut log = Vec::new();
    let mut warnings = Vec::new();
    let mut observer = observer;
    let n = ens.positions();
    let w = ens.width();
    for iter in 1..=p.i_max {
        let mut any_change = false;
        for u in (0..n / 2).rev() {
            let eps = design_epsilon(&DeModel::ldpc(&ens), opts);
            let grid: Vec<(usize, usize)> =
                (u..u + w).flat_map(|v| (p.r_min..=p.r_max).map(move |r| (v, r))).collect();
            let results: Vec<Result<Option<Candidate>>> = grid
                .par_iter()
                .map(|&(v, r)| {
                    let Some(cand) = with_check_degree(&ens, u, v, r, p.literal_check_update) else {
                        return Ok(None);
                    };
                    let sockets = ratio_f64(cand.connectivity().col_sum(u));
                    let inv_avg = cand.m() as f64 / sockets;
                    let model = DeModel::ldpc(&cand);
                    let prof = precompute_delta_with_model(&model, eps, u, p.q_grid, opts)?;
                    let local = LocalProblem::new(&prof, eps, p.l_min, p.l_max, p.margin);
                    Ok(local_min_iters(&local, ens.lambda(u), inv_avg, p).map(|(lambda, objective)| Candidate {
                        v,
                        r,
                        ensemble: cand,
                        lambda,
                        objective,
                    }))
                })
                .collect();
            let mut best: Option<(Candidate, LocalLam)> = None;
            for res in results {
                let Some(c) = res? else { continue };
                if !c.objective.is_finite() {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((b, _)) => (c.objective, c.r, c.v) < (b.objective, b.r, b.v),
                };
                if better {
                    let lam = LocalLam::new(&c.lambda, p.l_min)?;
                    best = Some((c, lam));
                }
            }
            let old = ens.lambda(u).clone();
            let step = match best {
                Some((c, lam)) => {
                    let changed = lam.0.max_abs_diff(&old) > CHANGE_TOL || c.r != ens.check_degree(c.v);
                    any_change |= changed;
                    let mut next = c.ensemble;
                    next.set_lambda(u, lam.0.clone());
                    next.set_lambda(n - 1 - u, lam.0.clone());
                    ens = next;
                    DesignStep {
                        iter,
                        u,
                        eps_bp: eps,
                        objective: c.objective,
                        check: Some((c.v, c.r)),
                        avg_degree: lam.0.average_degree(),
                        changed,
                    }
                }
                None => {
                    warnings.push(format!("iteration {iter}, position {u}: no feasible candidate, kept"));
                    DesignStep {
                        iter,
                        u,
                        eps_bp: eps,
                        objective: f64::INFINITY,
                        check: None,
                        avg_degree: old.average_degree(),
                        changed: false,
                    }
                }
            };
            if let Some(obs) = observer.as_mut() {
                obs(&step, &Ensemble::Ldpc(ens.clone()));
            }
            log.push(step);
        }
        if !any_change {
            break;
        }
    }
    Ok(DesignOutcome { ensemble: Ensemble::Ldpc(ens), log, warnings })
}

struct LocalLam(DegreeDistribution);

impl LocalLam {
    fn new(x: &[f64], l_min: usize) -> Result<Self> {
        DegreeDistribution::new(x.iter().enumerate().map(|(i, &c)| (l_min + i, c)).filter(|p| p.1 > 0.0)).map(LocalLam)
    }
}
