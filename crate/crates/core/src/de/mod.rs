//! Density evolution over the BEC for coupled ensembles.
//!
//! A [`DeModel`] holds the precomputed coefficients of one ensemble; the
//! flooding update is `x_u ← ε λ_u(δ_u)` where `δ_u` is the average erasure
//! probability of the check-to-variable messages entering position `u`.

mod delta;

use num_traits::Zero;

use crate::ensemble::{ratio_f64, DegreeDistribution, Ensemble, ScEnsemble, ScRaEnsemble};

pub use delta::{one_dim_iterations, precompute_delta, precompute_delta_with_model, DeltaProfile};

/// Numeric realizations of "converged" and "saturated".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeOptions {
    /// All `x_u` below this counts as decoded.
    pub convergence_eps: f64,
    /// Max-norm change below this counts as a fixed point.
    pub fixpoint_tol: f64,
    pub max_iters: usize,
    /// Final bracket width of the threshold bisection.
    pub bisect_tol: f64,
}

impl Default for DeOptions {
    fn default() -> Self {
        DeOptions { convergence_eps: 1e-8, fixpoint_tol: 1e-10, max_iters: 100_000, bisect_tol: 1e-5 }
    }
}

#[derive(Clone, Debug)]
struct RandomChecks {
    /// `(u, T[v][u] / (M_c r_v))` per check position.
    rows: Vec<Vec<(usize, f64)>>,
    exps: Vec<i32>,
}

#[derive(Clone, Debug)]
struct MetChecks {
    width: usize,
    /// `S^v` rows and `1/r_v` per check position.
    types: Vec<Vec<Vec<i32>>>,
    inv_r: Vec<f64>,
}

#[derive(Clone, Debug)]
enum CheckSide {
    Random(RandomChecks),
    Met(MetChecks),
    Ra { q: usize },
}

/// Precomputed DE coefficients for one ensemble.
#[derive(Clone, Debug)]
pub struct DeModel {
    positions: usize,
    check_positions: usize,
    lambdas: Vec<DegreeDistribution>,
    /// `(v, T[v][u] / Σ_i T[i][u])` per variable position; for typed check
    /// sides the first entry is the type `t = v - u`.
    cols: Vec<Vec<(usize, f64)>>,
    checks: CheckSide,
}

impl DeModel {
    /// Random-construction DE, or MET DE when the ensemble carries a profile.
    pub fn ldpc(e: &ScEnsemble) -> Self {
        let (n, nc) = (e.positions(), e.check_positions());
        let t = e.connectivity();
        let mut cols = Vec::with_capacity(n);
        for u in 0..n {
            let total = ratio_f64(t.col_sum(u));
            let col: Vec<(usize, f64)> = t
                .col_range(u)
                .filter(|&v| !t.get(v, u).is_zero())
                .map(|v| (v, t.get_f64(v, u) / total))
                .collect();
            cols.push(col);
        }
        let checks = match e.met() {
            None => {
                let rows = (0..nc)
                    .map(|v| {
                        let cap = (e.mc() * e.check_degree(v)) as f64;
                        t.row_range(v)
                            .filter(|&u| !t.get(v, u).is_zero())
                            .map(|u| (u, t.get_f64(v, u) / cap))
                            .collect()
                    })
                    .collect();
                let exps = e.check_degrees().iter().map(|&r| r as i32 - 1).collect();
                CheckSide::Random(RandomChecks { rows, exps })
            }
            Some(p) => CheckSide::Met(MetChecks {
                width: e.width(),
                types: p
                    .type_matrices
                    .iter()
                    .map(|s| s.iter().map(|row| row.iter().map(|&c| c as i32).collect()).collect())
                    .collect(),
                inv_r: e.check_degrees().iter().map(|&r| 1.0 / r as f64).collect(),
            }),
        };
        DeModel { positions: n, check_positions: nc, lambdas: e.lambdas().to_vec(), cols, checks }
    }

    /// DE of the SC-RA ensemble with one edge of every type per check and a
    /// degree-2 accumulator loop at each check position.
    pub fn scra(e: &ScRaEnsemble) -> Self {
        let (n, q) = (e.positions(), e.q());
        let cols = (0..n).map(|u| (u..u + q).map(|v| (v, 1.0 / q as f64)).collect()).collect();
        DeModel {
            positions: n,
            check_positions: n + q - 1,
            lambdas: e.lambdas().to_vec(),
            cols,
            checks: CheckSide::Ra { q },
        }
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        match e {
            Ensemble::Ldpc(e) => Self::ldpc(e),
            Ensemble::Ra(e) => Self::scra(e),
        }
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn lambda(&self, u: usize) -> &DegreeDistribution {
        &self.lambdas[u]
    }

    /// Replaces `λ_u`; the check side does not depend on it.
    pub fn set_lambda(&mut self, u: usize, lambda: DegreeDistribution) {
        self.lambdas[u] = lambda;
    }

    /// Length of the auxiliary (accumulator) message vector.
    pub fn aux_len(&self) -> usize {
        match self.checks {
            CheckSide::Ra { .. } => self.check_positions,
            _ => 0,
        }
    }

    /// Check-node half iteration: fills `incoming[u]` with the average
    /// check-to-variable erasure probability at position `u`, and the next
    /// accumulator messages into `aux_out`.
    pub fn check_pass(&self, x: &[f64], aux: &[f64], eps: f64, incoming: &mut [f64], aux_out: &mut [f64]) {
        match &self.checks {
            CheckSide::Random(c) => {
                let y: Vec<f64> = c
                    .rows
                    .iter()
                    .zip(&c.exps)
                    .map(|(row, &e)| {
                        let s: f64 = row.iter().map(|&(u, a)| a * x[u]).sum();
                        1.0 - (1.0 - s).max(0.0).powi(e)
                    })
                    .collect();
                for (u, col) in self.cols.iter().enumerate() {
                    incoming[u] = col.iter().map(|&(v, wt)| wt * y[v]).sum();
                }
            }
            CheckSide::Met(c) => {
                let w = c.width;
                let mut y = vec![0.0; self.check_positions * w];
                let mut known = vec![0.0; w];
                for v in 0..self.check_positions {
                    for (t, k) in known.iter_mut().enumerate() {
                        *k = if t <= v && v - t < self.positions { 1.0 - x[v - t] } else { 1.0 };
                    }
                    let s = &c.types[v];
                    for t in 0..w {
                        let mut acc = 0.0;
                        for row in s {
                            if row[t] == 0 {
                                continue;
                            }
                            let mut prod = row[t] as f64;
                            for (tp, &cnt) in row.iter().enumerate() {
                                let e = if tp == t { cnt - 1 } else { cnt };
                                prod *= known[tp].powi(e);
                            }
                            acc += prod;
                        }
                        y[v * w + t] = 1.0 - acc * c.inv_r[v];
                    }
                }
                for (u, col) in self.cols.iter().enumerate() {
                    incoming[u] = col.iter().map(|&(v, wt)| wt * y[v * w + (v - u)]).sum();
                }
            }
            CheckSide::Ra { q } => {
                let q = *q;
                let mut y = vec![0.0; self.check_positions * q];
                let mut known = vec![1.0; q];
                for v in 0..self.check_positions {
                    for (t, k) in known.iter_mut().enumerate() {
                        *k = if t <= v && v - t < self.positions { 1.0 - x[v - t] } else { 1.0 };
                    }
                    let acc_known = 1.0 - aux[v];
                    let all: f64 = known.iter().product();
                    aux_out[v] = eps * (1.0 - acc_known * all);
                    for t in 0..q {
                        let others: f64 = known.iter().enumerate().filter(|&(tp, _)| tp != t).map(|(_, k)| k).product();
                        y[v * q + t] = 1.0 - acc_known * acc_known * others;
                    }
                }
                for (u, col) in self.cols.iter().enumerate() {
                    incoming[u] = col.iter().map(|&(v, wt)| wt * y[v * q + (v - u)]).sum();
                }
            }
        }
    }
}

/// Message state: variable-to-check erasure probabilities per position and
/// accumulator messages (SC-RA only).
#[derive(Clone, Debug, PartialEq)]
pub struct DeState {
    pub x: Vec<f64>,
    pub aux: Vec<f64>,
}

impl DeState {
    /// Every message starts at the channel value `ε`.
    pub fn initial(model: &DeModel, eps: f64) -> Self {
        DeState { x: vec![eps; model.positions], aux: vec![eps; model.aux_len()] }
    }
}

/// Scratch buffers reused across iterations.
pub(crate) struct Workspace {
    incoming: Vec<f64>,
    next: DeState,
}

impl Workspace {
    pub(crate) fn new(model: &DeModel) -> Self {
        Workspace {
            incoming: vec![0.0; model.positions],
            next: DeState { x: vec![0.0; model.positions], aux: vec![0.0; model.aux_len()] },
        }
    }
}

/// Positions pinned to a fixed outgoing message value.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Clamp {
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

/// One flooding iteration in place; returns the max-norm change.
pub(crate) fn step_in_place(model: &DeModel, s: &mut DeState, eps: f64, clamp: Option<Clamp>, ws: &mut Workspace) -> f64 {
    model.check_pass(&s.x, &s.aux, eps, &mut ws.incoming, &mut ws.next.aux);
    for u in 0..model.positions {
        ws.next.x[u] = eps * model.lambdas[u].eval(ws.incoming[u]);
    }
    if let Some(c) = clamp {
        ws.next.x[c.a] = c.value;
        ws.next.x[c.b] = c.value;
    }
    let mut change: f64 = 0.0;
    for (a, b) in s.x.iter().zip(&ws.next.x).chain(s.aux.iter().zip(&ws.next.aux)) {
        change = change.max((a - b).abs());
    }
    std::mem::swap(s, &mut ws.next);
    change
}

/// Incoming check-to-variable average at every position for state `s`.
pub fn incoming_messages(model: &DeModel, s: &DeState, eps: f64) -> Vec<f64> {
    let mut incoming = vec![0.0; model.positions];
    let mut aux = vec![0.0; model.aux_len()];
    model.check_pass(&s.x, &s.aux, eps, &mut incoming, &mut aux);
    incoming
}

/// One flooding DE iteration.
pub fn de_step(model: &DeModel, s: &DeState, eps: f64) -> DeState {
    let mut next = s.clone();
    let mut ws = Workspace::new(model);
    step_in_place(model, &mut next, eps, None, &mut ws);
    next
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeOutcome {
    pub converged: bool,
    /// Iterations performed; the required iteration count `I_r` when
    /// converged.
    pub iterations: usize,
}

/// Runs DE from `x = ε` until decoding succeeds, stalls, or hits the cap.
pub fn de_run(model: &DeModel, eps: f64, opts: &DeOptions) -> DeOutcome {
    let mut s = DeState::initial(model, eps);
    let mut ws = Workspace::new(model);
    for it in 1..=opts.max_iters {
        let change = step_in_place(model, &mut s, eps, None, &mut ws);
        if s.x.iter().all(|&x| x < opts.convergence_eps) {
            return DeOutcome { converged: true, iterations: it };
        }
        if change < opts.fixpoint_tol {
            return DeOutcome { converged: false, iterations: it };
        }
    }
    DeOutcome { converged: false, iterations: opts.max_iters }
}

/// Bisection bracket `(lo, hi)` around the BP threshold: DE converges at
/// `lo` and fails at `hi`, with `hi - lo ≤ bisect_tol`.
pub fn threshold_bracket(model: &DeModel, opts: &DeOptions) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > opts.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if de_run(model, mid, opts).converged {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// BP threshold: midpoint of the final bisection bracket.
pub fn bp_threshold(model: &DeModel, opts: &DeOptions) -> f64 {
    let (lo, hi) = threshold_bracket(model, opts);
    0.5 * (lo + hi)
}

/// Average convergence speed `L / I_r`, zero when DE does not converge.
pub fn convergence_speed(model: &DeModel, eps: f64, opts: &DeOptions) -> f64 {
    let out = de_run(model, eps, opts);
    if out.converged {
        model.positions as f64 / out.iterations as f64
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::ScEnsemble;

    /// Straight transcription of the coupled recursion on dense arrays,
    /// deliberately sharing nothing with `DeModel`.
    fn oracle_iterations(e: &ScEnsemble, eps: f64, cap: usize) -> Option<usize> {
        let (n, nc) = (e.positions(), e.check_positions());
        let t: Vec<Vec<f64>> = (0..nc).map(|v| (0..n).map(|u| e.connectivity().get_f64(v, u)).collect()).collect();
        let mut x = vec![eps; n];
        for it in 1..=cap {
            let y: Vec<f64> = (0..nc)
                .map(|v| {
                    let num: f64 = (0..n).map(|j| t[v][j] * x[j]).sum();
                    let rv = e.check_degree(v) as f64;
                    1.0 - (1.0 - num / (e.mc() as f64 * rv)).powf(rv - 1.0)
                })
                .collect();
            x = (0..n)
                .map(|u| {
                    let num: f64 = (0..nc).map(|i| t[i][u] * y[i]).sum();
                    let den: f64 = (0..nc).map(|i| t[i][u]).sum();
                    let z = num / den;
                    eps * e.lambda(u).terms().map(|(d, c)| c * z.powf(d as f64 - 1.0)).sum::<f64>()
                })
                .collect();
            if x.iter().all(|&v| v < 1e-8) {
                return Some(it);
            }
        }
        None
    }

    fn regular(n: usize) -> DeModel {
        DeModel::ldpc(&ScEnsemble::regular(4, 8, n, 3, 990).unwrap())
    }

    #[test]
    fn zero_is_absorbing() {
        let m = regular(10);
        let s = DeState::initial(&m, 0.0);
        assert_eq!(de_step(&m, &s, 0.7).x, vec![0.0; 10]);
        let out = de_run(&m, 0.0, &DeOptions::default());
        assert_eq!(out, DeOutcome { converged: true, iterations: 1 });
    }

    #[test]
    fn full_erasure_is_fixed_in_interior() {
        let m = regular(10);
        let s = DeState::initial(&m, 1.0);
        let inc = incoming_messages(&m, &s, 1.0);
        // position 0 sees boundary checks 0 and 1
        let y0 = 1.0 - (2.0f64 / 3.0).powi(7);
        let y1 = 1.0 - (1.0f64 / 3.0).powi(7);
        assert!((inc[0] - (y0 + y1 + 1.0) / 3.0).abs() < 1e-14);
        assert!((inc[5] - 1.0).abs() < 1e-14);
        assert_eq!(de_step(&m, &s, 1.0).x[5], 1.0);
    }

    #[test]
    fn run_matches_dense_oracle() {
        let e = ScEnsemble::regular(4, 8, 10, 3, 990).unwrap();
        let m = DeModel::ldpc(&e);
        let opts = DeOptions::default();
        let out = de_run(&m, 0.49, &opts);
        assert!(out.converged);
        assert_eq!(Some(out.iterations), oracle_iterations(&e, 0.49, 100_000));
        assert!(!de_run(&m, 0.52, &opts).converged);
    }

    #[test]
    fn trajectory_monotone_and_symmetric() {
        let m = regular(20);
        let mut s = DeState::initial(&m, 0.495);
        for _ in 0..400 {
            let next = de_step(&m, &s, 0.495);
            for u in 0..20 {
                assert!(next.x[u] <= s.x[u] + 1e-15);
                assert!((next.x[u] - next.x[19 - u]).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&next.x[u]));
            }
            s = next;
        }
    }

    #[test]
    fn uncoupled_threshold_matches_scalar_de() {
        let e = ScEnsemble::regular(3, 6, 1, 1, 6).unwrap();
        let opts = DeOptions::default();
        let got = bp_threshold(&DeModel::ldpc(&e), &opts);
        // scalar recursion x ← ε(1 - (1 - x)^5)^2
        let converges = |eps: f64| {
            let mut x = eps;
            for _ in 0..100_000 {
                let nx = eps * (1.0 - (1.0 - x).powi(5)).powi(2);
                if nx < 1e-8 {
                    return true;
                }
                if (nx - x).abs() < 1e-10 {
                    return false;
                }
                x = nx;
            }
            false
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > 1e-5 {
            let mid = 0.5 * (lo + hi);
            if converges(mid) {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((got - 0.5 * (lo + hi)).abs() < 1e-9);
        assert!((got - 0.4294).abs() < 1e-3);
    }

    #[test]
    fn convergence_speed_edges() {
        let m = regular(20);
        let opts = DeOptions::default();
        assert_eq!(convergence_speed(&m, 0.0, &opts), 20.0);
        assert_eq!(convergence_speed(&m, 0.6, &opts), 0.0);
        let e = ScEnsemble::regular(4, 8, 20, 3, 990).unwrap();
        let it = oracle_iterations(&e, 0.47, 100_000).unwrap();
        assert_eq!(convergence_speed(&m, 0.47, &opts), 20.0 / it as f64);
    }

    #[test]
    fn met_matches_random_for_uniform_interior_states() {
        let e = ScEnsemble::regular(3, 6, 10, 3, 6).unwrap();
        let random = DeModel::ldpc(&e);
        let met = DeModel::ldpc(&e.with_met().unwrap());
        let mut seed = 0x2545f4914f6cdd1du64;
        for _ in 0..5 {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            let x = (seed >> 11) as f64 / (1u64 << 53) as f64;
            let s = DeState { x: vec![x; 10], aux: vec![] };
            let a = incoming_messages(&random, &s, 0.5);
            let b = incoming_messages(&met, &s, 0.5);
            for u in 2..8 {
                assert!((a[u] - b[u]).abs() < 1e-12, "{x}: {} vs {}", a[u], b[u]);
            }
        }
        let z = DeState::initial(&met, 0.0);
        assert!(incoming_messages(&met, &z, 0.3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scra_zero_is_absorbing() {
        let m = DeModel::scra(&ScRaEnsemble::regular(5, 10, 2).unwrap());
        let s = DeState::initial(&m, 0.0);
        let next = de_step(&m, &s, 0.5);
        assert!(next.x.iter().chain(&next.aux).all(|&v| v == 0.0));
    }

    #[test]
    fn regular_thresholds() {
        let opts = DeOptions::default();
        let t10 = bp_threshold(&regular(10), &opts);
        assert!((t10 - 0.4981).abs() < 5e-4, "{t10}");
        let ra = DeModel::scra(&ScRaEnsemble::regular(5, 10, 2).unwrap());
        let t = bp_threshold(&ra, &opts);
        assert!((t - 0.5107).abs() < 1e-3, "{t}");
    }
}
