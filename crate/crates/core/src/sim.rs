//! Finite-length erasure decoding and block erasure rate estimation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construct::TannerGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeelResult {
    pub success: bool,
    /// Erased variables left when no degree-one check remains.
    pub residual: usize,
}

/// Peeling decoder. Returns the erasure mask left over (the maximal
/// stopping set inside `erased`).
pub fn peel(g: &TannerGraph, erased: &[bool]) -> Vec<bool> {
    assert_eq!(erased.len(), g.num_vars(), "mask length differs from the variable count");
    let mut left = erased.to_vec();
    // per check: number of erased neighbours and xor of their ids
    let mut count = vec![0u32; g.num_checks()];
    let mut acc = vec![0usize; g.num_checks()];
    for (v, adj) in g.var_adj.iter().enumerate() {
        if left[v] {
            for &c in adj {
                count[c] += 1;
                acc[c] ^= v;
            }
        }
    }
    let mut stack: Vec<usize> = (0..g.num_checks()).filter(|&c| count[c] == 1).collect();
    while let Some(c) = stack.pop() {
        if count[c] != 1 {
            continue;
        }
        let v = acc[c];
        left[v] = false;
        for &c2 in &g.var_adj[v] {
            count[c2] -= 1;
            acc[c2] ^= v;
            if count[c2] == 1 {
                stack.push(c2);
            }
        }
    }
    left
}

pub fn peel_decode(g: &TannerGraph, erased: &[bool]) -> PeelResult {
    let residual = peel(g, erased).iter().filter(|&&x| x).count();
    PeelResult { success: residual == 0, residual }
}

/// Flooding BP on the erasure channel: every round, each check with exactly
/// one erased neighbour resolves it; stops when a round changes nothing.
pub fn flood_decode(g: &TannerGraph, erased: &[bool]) -> Vec<bool> {
    let mut state = erased.to_vec();
    loop {
        let mut resolved = Vec::new();
        for adj in &g.check_adj {
            let mut it = adj.iter().filter(|&&v| state[v]);
            if let (Some(&v), None) = (it.next(), it.next()) {
                resolved.push(v);
            }
        }
        if resolved.is_empty() {
            return state;
        }
        for v in resolved {
            state[v] = false;
        }
    }
}

/// Peeling with a uniformly random degree-one check at every step. Entry
/// `k` holds the number of degree-one checks per check position after `k`
/// recoveries; the run ends when none are left.
pub fn peel_trajectory(g: &TannerGraph, erased: &[bool], rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let npos = g.check_pos.iter().max().map_or(0, |m| m + 1);
    let mut left = erased.to_vec();
    let mut count = vec![0u32; g.num_checks()];
    let mut acc = vec![0usize; g.num_checks()];
    for (v, adj) in g.var_adj.iter().enumerate() {
        if left[v] {
            for &c in adj {
                count[c] += 1;
                acc[c] ^= v;
            }
        }
    }
    // degree-one checks with O(1) removal
    let mut ones: Vec<usize> = Vec::new();
    let mut slot = vec![usize::MAX; g.num_checks()];
    let mut per_pos = vec![0usize; npos];
    let insert = |c: usize, ones: &mut Vec<usize>, slot: &mut Vec<usize>, per_pos: &mut Vec<usize>| {
        slot[c] = ones.len();
        ones.push(c);
        per_pos[g.check_pos[c]] += 1;
    };
    let remove = |c: usize, ones: &mut Vec<usize>, slot: &mut Vec<usize>, per_pos: &mut Vec<usize>| {
        let i = slot[c];
        let last = *ones.last().unwrap();
        ones.swap_remove(i);
        if last != c {
            slot[last] = i;
        }
        slot[c] = usize::MAX;
        per_pos[g.check_pos[c]] -= 1;
    };
    for c in 0..g.num_checks() {
        if count[c] == 1 {
            insert(c, &mut ones, &mut slot, &mut per_pos);
        }
    }
    let mut out = vec![per_pos.clone()];
    while !ones.is_empty() {
        let c = ones[rng.gen_range(0..ones.len())];
        let v = acc[c];
        left[v] = false;
        for &c2 in &g.var_adj[v] {
            if count[c2] == 1 {
                remove(c2, &mut ones, &mut slot, &mut per_pos);
            }
            count[c2] -= 1;
            acc[c2] ^= v;
            if count[c2] == 1 {
                insert(c2, &mut ones, &mut slot, &mut per_pos);
            }
        }
        out.push(per_pos.clone());
    }
    out
}

/// Trials stop at `min_errors` block errors or `max_trials`, whichever
/// comes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { min_errors: 100, max_trials: 1_000_000 }
    }
}

impl StopRule {
    pub fn fixed(trials: u64) -> Self {
        StopRule { min_errors: u64::MAX, max_trials: trials }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimPoint {
    pub epsilon: f64,
    pub trials: u64,
    pub errors: u64,
    pub fer: f64,
    /// 95% normal-approximation interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Unrecovered variables over all decoded bits.
    pub ber: f64,
    pub wall_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub seed: u64,
    pub stop: StopRule,
    pub points: Vec<SimPoint>,
}

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,trials,errors,fer,ci_lo,ci_hi\n");
        for p in &self.points {
            s += &format!("{},{},{},{:.6e},{:.6e},{:.6e}\n", p.epsilon, p.trials, p.errors, p.fer, p.ci_lo, p.ci_hi);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Generator of trial `trial` at grid index `point`: one key, disjoint
/// streams.
pub fn trial_rng(seed: u64, point: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | trial);
    rng
}

pub fn erasure_mask(n: usize, eps: f64, rng: &mut impl Rng) -> Vec<bool> {
    (0..n).map(|_| rng.gen::<f64>() < eps).collect()
}

const BATCH: u64 = 1024;

fn wald(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let h = 1.96 * (p * (1.0 - p) / n).sqrt();
    ((p - h).max(0.0), (p + h).min(1.0))
}

/// Block erasure rate per channel parameter. Batches run in parallel on the
/// current rayon pool; the stop rule is applied in trial order, so results
/// do not depend on the number of workers.
pub fn estimate_fer(g: &TannerGraph, eps_grid: &[f64], stop: StopRule, seed: u64) -> SimResult {
    let n = g.num_vars();
    let mut points = Vec::with_capacity(eps_grid.len());
    for (i, &eps) in eps_grid.iter().enumerate() {
        let start = Instant::now();
        let (mut trials, mut errors, mut residual) = (0u64, 0u64, 0u64);
        'outer: while trials < stop.max_trials {
            let hi = (trials + BATCH).min(stop.max_trials);
            let outcomes: Vec<usize> = (trials..hi)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, i, t);
                    peel_decode(g, &erasure_mask(n, eps, &mut rng)).residual
                })
                .collect();
            for r in outcomes {
                trials += 1;
                residual += r as u64;
                if r > 0 {
                    errors += 1;
                    if errors >= stop.min_errors {
                        break 'outer;
                    }
                }
            }
        }
        let fer = if trials > 0 { errors as f64 / trials as f64 } else { 0.0 };
        let (ci_lo, ci_hi) = if trials > 0 { wald(errors, trials) } else { (0.0, 1.0) };
        let ber = if trials > 0 && n > 0 { residual as f64 / (trials as f64 * n as f64) } else { 0.0 };
        points.push(SimPoint { epsilon: eps, trials, errors, fer, ci_lo, ci_hi, ber, wall_secs: start.elapsed().as_secs_f64() });
        log::info!("eps {eps}: {errors}/{trials} block errors");
    }
    SimResult { seed, stop, points }
}

/// `k` distinct indices below `n`, uniformly at random.
pub fn random_subset(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}
