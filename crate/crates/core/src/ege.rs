//! Expected graph evolution of the peeling decoder on a coupled ensemble.
//!
//! `R[v][j-1]` is the expected number of edges at degree-`j` checks of
//! position `v`; `U[u][k]` the expected number of edges at erased variables
//! of type `types[u][k]` at position `u`. A variable type `x` has
//! `x[t]` edges into check position `u + t`.

use crate::ensemble::ScEnsemble;

/// Compositions of `d` into `parts` non-negative parts, in lexicographic
/// order.
pub fn compositions(d: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(d);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=d {
            cur.push(a);
            rec(d - a, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(d, parts, &mut Vec::new(), &mut out);
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn multinomial_pmf(x: &[usize], p: &[f64]) -> f64 {
    let mut n = 0;
    let mut out = 1.0;
    for (&k, &pk) in x.iter().zip(p) {
        n += k;
        out *= binomial(n, k) * pk.powi(k as i32);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarType {
    pub x: Vec<usize>,
}

impl VarType {
    pub fn degree(&self) -> usize {
        self.x.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgeState {
    pub tau: f64,
    pub r: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
}

impl EgeState {
    pub fn total_r(&self) -> f64 {
        self.r.iter().flatten().sum()
    }

    pub fn total_u(&self) -> f64 {
        self.u.iter().flatten().sum()
    }

    /// `Σ_v R[v][0]`, the expected number of degree-one checks.
    pub fn degree_one(&self) -> f64 {
        self.r.iter().map(|row| row.first().copied().unwrap_or(0.0)).sum()
    }
}

/// Expected change of the state over one peeling step.
#[derive(Clone, Debug, PartialEq)]
pub struct EgeDerivatives {
    pub dr: Vec<Vec<f64>>,
    pub du: Vec<Vec<f64>>,
}

/// Static data of the evolution: type lists and check degrees.
#[derive(Clone, Debug)]
pub struct EgeSystem {
    width: usize,
    m: usize,
    mc: usize,
    check_degrees: Vec<usize>,
    fill: Vec<f64>,
    types: Vec<Vec<VarType>>,
    /// `init_u[u][k]` per unit erasure probability.
    init_u: Vec<Vec<f64>>,
}

impl EgeSystem {
    pub fn new(e: &ScEnsemble) -> Self {
        let t = e.connectivity();
        let w = e.width();
        let mut types = Vec::with_capacity(e.positions());
        let mut init_u = Vec::with_capacity(e.positions());
        for u in 0..e.positions() {
            let col: Vec<f64> = (0..w).map(|i| t.get_f64(u + i, u)).collect();
            let sockets: f64 = col.iter().sum();
            let p: Vec<f64> = col.iter().map(|c| c / sockets).collect();
            let mut ty = Vec::new();
            let mut init = Vec::new();
            for (d, lam) in e.lambda(u).terms() {
                for x in compositions(d, w) {
                    if x.iter().zip(&p).any(|(&k, &pk)| k > 0 && pk == 0.0) {
                        continue;
                    }
                    init.push(lam * sockets * multinomial_pmf(&x, &p));
                    ty.push(VarType { x });
                }
            }
            types.push(ty);
            init_u.push(init);
        }
        let fill = (0..e.check_positions()).map(|v| e.fill_fraction(v)).collect();
        EgeSystem {
            width: w,
            m: e.m(),
            mc: e.mc(),
            check_degrees: e.check_degrees().to_vec(),
            fill,
            types,
            init_u,
        }
    }

    pub fn types(&self, u: usize) -> &[VarType] {
        &self.types[u]
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Degree-`m` probability of a check at `v` before erasure: binomial
    /// thinning of the `r_v` sockets by the fill fraction (a point mass at
    /// `r_v` on full rows).
    pub fn check_degree_pmf(&self, v: usize, m: usize) -> f64 {
        let r = self.check_degrees[v];
        if m > r {
            return 0.0;
        }
        let f = self.fill[v];
        binomial(r, m) * f.powi(m as i32) * (1.0 - f).powi((r - m) as i32)
    }

    pub fn init(&self, eps: f64) -> EgeState {
        let r = (0..self.check_degrees.len())
            .map(|v| {
                let rv = self.check_degrees[v];
                (1..=rv)
                    .map(|j| {
                        let s: f64 = (j..=rv)
                            .map(|m| self.check_degree_pmf(v, m) * binomial(m, j) * eps.powi(j as i32) * (1.0 - eps).powi((m - j) as i32))
                            .sum();
                        j as f64 * self.mc as f64 * s
                    })
                    .collect()
            })
            .collect();
        let u = self.init_u.iter().map(|row| row.iter().map(|c| eps * c).collect()).collect();
        EgeState { tau: 0.0, r, u }
    }

    /// Position window of degree-one checks at `m`: variable positions
    /// `max(m-w+1, 0) ..= min(m, L-1)`.
    fn window(&self, m: usize) -> std::ops::RangeInclusive<usize> {
        m.saturating_sub(self.width - 1)..=m.min(self.types.len() - 1)
    }

    /// Expected one-step change, or `None` when no degree-one check can
    /// be removed.
    ///
    /// `F_{j,v,t}` is the mean of a binomial, `t δ_{j,v}`, so the check side
    /// only needs the expected number of further edges into each position.
    pub fn derivatives(&self, s: &EgeState) -> Option<EgeDerivatives> {
        let n = self.types.len();
        let nc = self.check_degrees.len();
        let w = self.width;
        // first[u][a] = Σ_x x_a/|x| U ; second[u][a][b] = Σ_x x_a x_b/|x| U
        let mut first = vec![vec![0.0; w]; n];
        let mut second = vec![vec![vec![0.0; w]; w]; n];
        for u in 0..n {
            for (ty, &uu) in self.types[u].iter().zip(&s.u[u]) {
                if uu <= 0.0 {
                    continue;
                }
                let c = uu / ty.degree() as f64;
                for a in 0..w {
                    if ty.x[a] == 0 {
                        continue;
                    }
                    first[u][a] += c * ty.x[a] as f64;
                    for b in 0..w {
                        second[u][a][b] += c * (ty.x[a] * ty.x[b]) as f64;
                    }
                }
            }
        }
        let denom: Vec<f64> = (0..nc).map(|m| self.window(m).map(|u| first[u][m - u]).sum()).collect();
        let r1: Vec<f64> = (0..nc).map(|m| if denom[m] > 0.0 { s.r[m][0].max(0.0) } else { 0.0 }).collect();
        let total: f64 = r1.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let p: Vec<f64> = r1.iter().map(|x| x / total).collect();
        let g: Vec<f64> = (0..nc).map(|m| if p[m] > 0.0 { p[m] / denom[m] } else { 0.0 }).collect();

        let du = (0..n)
            .map(|u| {
                self.types[u]
                    .iter()
                    .zip(&s.u[u])
                    .map(|(ty, &uu)| -uu * (0..w).map(|a| ty.x[a] as f64 * g[u + a]).sum::<f64>())
                    .collect()
            })
            .collect();

        // expected number of edges of the removed variable, other than the
        // one to the degree-one check, landing at position v
        let mut further = vec![0.0; nc];
        for u in 0..n {
            for a in 0..w {
                let ga = g[u + a];
                if ga == 0.0 {
                    continue;
                }
                for b in 0..w {
                    let mut e = second[u][a][b];
                    if a == b {
                        e -= first[u][a];
                    }
                    further[u + b] += ga * e;
                }
            }
        }
        let dr = (0..nc)
            .map(|v| {
                let row = &s.r[v];
                let tot: f64 = row.iter().map(|x| x.max(0.0)).sum();
                let delta = |j: usize| if j <= row.len() && tot > 0.0 { row[j - 1].max(0.0) / tot } else { 0.0 };
                (1..=row.len())
                    .map(|j| {
                        let d = j as f64 * further[v] * (delta(j + 1) - delta(j));
                        if j == 1 { d - p[v] } else { d }
                    })
                    .collect()
            })
            .collect();
        Some(EgeDerivatives { dr, du })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EgeOutcome {
    /// Erased edges exhausted.
    Success,
    /// No degree-one checks left with erased edges remaining.
    Stall,
    /// Step budget spent.
    Budget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgeSample {
    pub tau: f64,
    /// `Σ_v R[v][0] / M`
    pub r1: f64,
    /// `R[v][0]` per check position.
    pub r1_positions: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgeTrajectory {
    pub samples: Vec<EgeSample>,
    pub outcome: EgeOutcome,
    /// Entries clamped at zero after a step.
    pub clamped: usize,
    /// Largest `|ΣR - ΣU| / ΣU(0)` seen.
    pub conservation_error: f64,
}

impl EgeTrajectory {
    /// CSV with columns `tau,r1,R1_0,…`.
    pub fn to_csv(&self) -> String {
        let nc = self.samples.first().map_or(0, |s| s.r1_positions.len());
        let mut out = String::from("tau,r1");
        for v in 0..nc {
            out.push_str(&format!(",R1_{v}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!("{},{}", s.tau, s.r1));
            for x in &s.r1_positions {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgeOptions {
    /// Euler step in `τ`; `None` means `1/M`.
    pub step: Option<f64>,
    /// Success once `ΣU ≤ tol · ΣU(0)`.
    pub tol: f64,
    /// Stall once `r1 < stall_tol`.
    pub stall_tol: f64,
    pub max_steps: usize,
}

impl Default for EgeOptions {
    fn default() -> Self {
        EgeOptions { step: None, tol: 1e-6, stall_tol: 1e-6, max_steps: 10_000_000 }
    }
}

pub fn init_ege(e: &ScEnsemble, eps: f64) -> EgeState {
    EgeSystem::new(e).init(eps)
}

pub fn ege_derivatives(s: &EgeState, e: &ScEnsemble) -> Option<EgeDerivatives> {
    EgeSystem::new(e).derivatives(s)
}

/// Explicit Euler integration from [`init_ege`].
pub fn ege_run(e: &ScEnsemble, eps: f64, opts: &EgeOptions) -> EgeTrajectory {
    let sys = EgeSystem::new(e);
    let m = sys.m() as f64;
    let dt = opts.step.unwrap_or(1.0 / m);
    // one derivative evaluation is the change over one peeling step (1/M)
    let scale = dt * m;
    let mut s = sys.init(eps);
    let u0 = s.total_u();
    let sample = |s: &EgeState| EgeSample {
        tau: s.tau,
        r1: s.degree_one() / m,
        r1_positions: s.r.iter().map(|row| row.first().copied().unwrap_or(0.0)).collect(),
    };
    let mut samples = vec![sample(&s)];
    let mut clamped = 0;
    let mut conservation_error: f64 = 0.0;
    let mut outcome = EgeOutcome::Budget;
    for _ in 0..opts.max_steps {
        if s.total_u() <= opts.tol * u0.max(f64::MIN_POSITIVE) {
            outcome = EgeOutcome::Success;
            break;
        }
        let Some(d) = sys.derivatives(&s) else {
            outcome = EgeOutcome::Stall;
            break;
        };
        // steps are cut so that no entry crosses zero (this only happens
        // near absorption); clamping is the fallback for negligible cuts
        let mut frac: f64 = 1.0;
        for (x, dx) in s.r.iter().flatten().zip(d.dr.iter().flatten()).chain(s.u.iter().flatten().zip(d.du.iter().flatten())) {
            if *dx < 0.0 && *x + scale * dx < 0.0 {
                frac = frac.min(*x / (-scale * dx));
            }
        }
        if frac < 1e-6 {
            frac = 1.0;
        }
        for (row, drow) in s.r.iter_mut().zip(&d.dr) {
            for (x, dx) in row.iter_mut().zip(drow) {
                *x += frac * scale * dx;
            }
        }
        for (row, drow) in s.u.iter_mut().zip(&d.du) {
            for (x, dx) in row.iter_mut().zip(drow) {
                *x += frac * scale * dx;
            }
        }
        if u0 > 0.0 {
            conservation_error = conservation_error.max((s.total_r() - s.total_u()).abs() / u0);
        }
        for x in s.r.iter_mut().chain(s.u.iter_mut()).flatten() {
            if *x < 0.0 {
                if *x < -1e-9 {
                    clamped += 1;
                }
                *x = 0.0;
            }
        }
        s.tau += frac * dt;
        samples.push(sample(&s));
        if s.degree_one() <= opts.stall_tol * m {
            outcome = if s.total_u() <= opts.tol * u0 { EgeOutcome::Success } else { EgeOutcome::Stall };
            break;
        }
    }
    if clamped > 0 {
        log::warn!("expected graph evolution clamped {clamped} negative entries");
    }
    EgeTrajectory { samples, outcome, clamped, conservation_error }
}
