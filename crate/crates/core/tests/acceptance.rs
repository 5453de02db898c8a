//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Environment:
//! - `SCFORGE_ACCEPT_TIER=smoke` runs the design criteria at `Q = 300`
//!   (criterion 4 tolerance widened to 0.01).
//! - `SCFORGE_ACCEPT_ONLY=2,5` restricts the run to the listed criteria.
//! - `SCFORGE_ACCEPT_STRICT=1` makes any failing criterion exit non-zero.

use std::cell::OnceCell;
use std::collections::BTreeSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scforge::construct::{build_met, build_peg, build_random, build_scra, to_text, PegParams, TannerGraph};
use scforge::de::{bp_threshold, one_dim_iterations, precompute_delta_with_model, DeModel, DeOptions, DeltaProfile};
use scforge::designer::{
    design_max_rate, design_min_iters, design_min_iters_nonuniform_checks, linearize_iteration_objective, DesignOutcome,
    DesignParams,
};
use scforge::ege::{ege_run, EgeOptions, EgeOutcome, EgeTrajectory};
use scforge::ensemble::{io as ens_io, DegreeDistribution, Ensemble, ScEnsemble, ScRaEnsemble};
use scforge::sim::{erasure_mask, estimate_fer, flood_decode, peel, peel_trajectory, StopRule};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct Ctx {
    q_grid: usize,
    smoke: bool,
    de: DeOptions,
    /// Alg. 3 outcomes for L = 10, 20, 30 (`M = 504`).
    alg3: [OnceCell<DesignOutcome>; 3],
    /// SC-RA Alg. 3 outcomes for L = 10, 20, 30 (`M = 200`).
    ra3: [OnceCell<DesignOutcome>; 3],
}

const LS: [usize; 3] = [10, 20, 30];

impl Ctx {
    fn params(&self) -> DesignParams {
        DesignParams { q_grid: self.q_grid, ..DesignParams::default() }
    }

    fn alg3(&self, i: usize) -> &DesignOutcome {
        self.alg3[i].get_or_init(|| {
            let e = ScEnsemble::regular(4, 8, LS[i], 3, 504).unwrap();
            design_min_iters(&Ensemble::Ldpc(e), &self.params(), &self.de, None).unwrap()
        })
    }

    fn ra3(&self, i: usize) -> &DesignOutcome {
        self.ra3[i].get_or_init(|| {
            let e = ScRaEnsemble::regular(5, LS[i], 200).unwrap();
            design_min_iters(&Ensemble::Ra(e), &self.params(), &self.de, None).unwrap()
        })
    }
}

fn threshold(e: &Ensemble, de: &DeOptions) -> f64 {
    bp_threshold(&DeModel::from_ensemble(e), de)
}

fn ldpc(e: &Ensemble) -> &ScEnsemble {
    match e {
        Ensemble::Ldpc(x) => x,
        Ensemble::Ra(_) => panic!("expected an LDPC ensemble"),
    }
}

/// Same degree profile on a different `M`.
fn rescale(e: &ScEnsemble, m: usize) -> ScEnsemble {
    let reg = ScEnsemble::regular(e.l(), e.r(), e.positions(), e.width(), m).unwrap();
    let mut base = e.base();
    base.m = m;
    let k = m as f64 / e.m() as f64;
    let counts: Vec<f64> = e.var_counts().iter().map(|n| n * k).collect();
    ScEnsemble::from_parts(base, e.lambdas().to_vec(), counts, e.check_degrees().to_vec(), reg.connectivity().clone(), None).unwrap()
}

fn c1_rate(_: &Ctx) -> Verdict {
    let r10 = ScEnsemble::regular(4, 8, 10, 3, 990).unwrap().design_rate(false);
    let r20 = ScEnsemble::regular(4, 8, 20, 3, 990).unwrap().design_rate(false);
    let ok = (r10 - 0.4).abs() <= 1e-12 && (r20 - 0.45).abs() <= 1e-12;
    verdict(ok, format!("L=10 {r10:.15} (0.4), L=20 {r20:.15} (0.45), tol 1e-12"))
}

fn thresholds_line(got: &[f64], want: &[f64], tol: f64) -> Verdict {
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol);
    let parts: Vec<String> = LS.iter().zip(got.iter().zip(want)).map(|(l, (g, w))| format!("L={l} {g:.5} ({w})")).collect();
    verdict(ok, format!("{}, tol {tol}", parts.join(", ")))
}

fn c2_regular(ctx: &Ctx) -> Verdict {
    let got: Vec<f64> =
        LS.iter().map(|&l| threshold(&Ensemble::Ldpc(ScEnsemble::regular(4, 8, l, 3, 990).unwrap()), &ctx.de)).collect();
    thresholds_line(&got, &[0.4981, 0.4977, 0.4977], 5e-4)
}

fn c3_regular_ra(ctx: &Ctx) -> Verdict {
    let got: Vec<f64> = LS.iter().map(|&l| threshold(&Ensemble::Ra(ScRaEnsemble::regular(5, l, 900).unwrap()), &ctx.de)).collect();
    thresholds_line(&got, &[0.5107, 0.4949, 0.4946], 1e-3)
}

fn c4_alg2(ctx: &Ctx) -> Verdict {
    let tol = if ctx.smoke { 0.01 } else { 0.005 };
    let mut ok = true;
    let mut parts = Vec::new();
    for (l, want) in [(10, 0.4360), (20, 0.4670)] {
        let e = ScEnsemble::regular(4, 8, l, 3, 990).unwrap();
        let out = design_max_rate(&e, &ctx.params(), &ctx.de, None).unwrap();
        let d = ldpc(&out.ensemble);
        let rate = d.general_rate(false);
        let avg: Vec<f64> = (0..l).map(|u| d.lambda(u).average_degree()).collect();
        let edge = avg[0].max(avg[l - 1]);
        let edge_ok = (avg[0] - 4.0).abs() <= 0.05 && (avg[l - 1] - 4.0).abs() <= 0.05;
        let centre = avg[l / 2 - 1].min(avg[l / 2]);
        let dip = centre < edge - 0.05;
        ok &= (rate - want).abs() <= tol && edge_ok && dip;
        parts.push(format!("L={l} rate {rate:.5} ({want}), boundary avg {:.4}/{:.4}, centre {centre:.4}", avg[0], avg[l - 1]));
    }
    verdict(ok, format!("{}; tol {tol}, boundary ±0.05, centre dip", parts.join("; ")))
}

fn c5_alg3(ctx: &Ctx) -> Verdict {
    let got: Vec<f64> = (0..3).map(|i| threshold(&ctx.alg3(i).ensemble, &ctx.de)).collect();
    let mut v = thresholds_line(&got, &[0.5241, 0.5069, 0.5027], 0.005);
    let lam = ldpc(&ctx.alg3(1).ensemble).lambda(9);
    let (c3, c10) = (lam.coefficient(3), lam.coefficient(10));
    let rest: f64 = lam.terms().filter(|(d, _)| *d != 3 && *d != 10).map(|(_, c)| c).sum();
    let coef_ok = (c3 - 0.6429).abs() <= 0.02 && (c10 - 0.3571).abs() <= 0.02 && rest <= 0.02;
    v.pass &= coef_ok;
    v.detail += &format!("; L=20 centre λ = {lam} (0.6429x^2 + 0.3571x^9, ±0.02)");
    v
}

fn c6_alg4(ctx: &Ctx) -> Verdict {
    let got: Vec<f64> = LS
        .iter()
        .map(|&l| {
            let e = ScEnsemble::regular(3, 6, l, 3, 6).unwrap();
            let out = design_min_iters_nonuniform_checks(&e, &ctx.params(), &ctx.de, None).unwrap();
            for w in &out.warnings {
                eprintln!("  alg 4, L={l}: {w}");
            }
            threshold(&out.ensemble, &ctx.de)
        })
        .collect();
    thresholds_line(&got, &[0.5679, 0.5247, 0.5087], 0.01)
}

fn c7_ra_alg3(ctx: &Ctx) -> Verdict {
    let got: Vec<f64> = (0..3).map(|i| threshold(&ctx.ra3(i).ensemble, &ctx.de)).collect();
    thresholds_line(&got, &[0.5399, 0.5128, 0.5051], 0.005)
}

/// `r1` of `tr` at `tau` by linear interpolation, zero past the end.
fn r1_at(tr: &EgeTrajectory, tau: f64) -> f64 {
    let s = &tr.samples;
    let i = s.partition_point(|x| x.tau <= tau);
    if i == 0 {
        return s[0].r1;
    }
    if i == s.len() {
        return if tau - s[i - 1].tau < 1e-12 { s[i - 1].r1 } else { 0.0 };
    }
    let (a, b) = (&s[i - 1], &s[i]);
    a.r1 + (b.r1 - a.r1) * (tau - a.tau) / (b.tau - a.tau)
}

fn window(tr: &EgeTrajectory, lo: f64, hi: f64) -> (f64, f64, f64) {
    let v: Vec<f64> = tr.samples.iter().filter(|s| s.tau >= lo && s.tau <= hi).map(|s| s.r1).collect();
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(0.0, f64::max);
    (min, max, v.iter().sum::<f64>() / v.len() as f64)
}

fn c8_ege(ctx: &Ctx) -> Verdict {
    let m = 504;
    let eps = 0.48;
    let reg = ScEnsemble::regular(4, 8, 20, 3, m).unwrap();
    let tr = ege_run(&reg, eps, &EgeOptions::default());
    let end = tr.samples.last().unwrap().tau;
    let conserv_ok = tr.conservation_error <= 1e-6 && tr.outcome == EgeOutcome::Success;

    let (pmin, pmax, pmean) = window(&tr, 0.25 * end, 0.75 * end);
    let variation = (pmax - pmin) / pmean;
    let (cmin, cmax, cmean) = window(&tr, 0.3 * end, 0.7 * end);
    let core_variation = (cmax - cmin) / cmean;

    let designed = rescale(ldpc(&ctx.alg3(1).ensemble), m);
    let tr3 = ege_run(&designed, eps, &EgeOptions::default());
    let (dmin, _, _) = window(&tr3, 0.25 * end, 0.75 * end);
    let vanished = dmin > pmean;

    let (mc_rel, _, fails) = mc_compare(&reg, eps, &tr);
    let tr44 = ege_run(&reg, 0.44, &EgeOptions::default());
    let (rel44, core44, fails44) = mc_compare(&reg, 0.44, &tr44);
    let mc_ok = mc_rel <= 0.05;
    let plateau_ok = variation < 0.05;
    verdict(
        conserv_ok && plateau_ok && vanished && mc_ok,
        format!(
            "conservation {:.2e} (≤1e-6); plateau variation over τ∈[{:.2},{:.2}] {:.1}% (<5%; 30–70% window {:.1}%); \
             alg-3 min {dmin:.4} vs regular plateau {pmean:.4}; MC sup-norm {:.2}% of peak (≤5%, {fails}/100 runs stall); \
             at ε=0.44: {:.2}% ({:.2}% before the last 0.5 τ, {fails44}/100 stall)",
            tr.conservation_error,
            0.25 * end,
            0.75 * end,
            100.0 * variation,
            100.0 * core_variation,
            100.0 * mc_rel,
            100.0 * rel44,
            100.0 * core44
        ),
    )
}

/// Sup-norm distance between `tr` and the mean degree-one check fraction
/// of 100 random instances (relative to the peak of `tr`), the same
/// distance before the last 0.5 of `τ`, and the number of stalled runs.
fn mc_compare(e: &ScEnsemble, eps: f64, tr: &EgeTrajectory) -> (f64, f64, usize) {
    let m = e.m();
    let seeds = 100;
    let mut sum: Vec<f64> = Vec::new();
    let mut fails = 0;
    for seed in 0..seeds {
        let g = build_random(e, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mask = erasure_mask(g.num_vars(), eps, &mut rng);
        let path = peel_trajectory(&g, &mask, &mut rng);
        if path.len() - 1 < mask.iter().filter(|&&x| x).count() {
            fails += 1;
        }
        if sum.len() < path.len() {
            sum.resize(path.len(), 0.0);
        }
        for (k, per) in path.iter().enumerate() {
            sum[k] += per.iter().sum::<usize>() as f64 / m as f64;
        }
    }
    let end = tr.samples.last().unwrap().tau;
    let peak = tr.samples.iter().map(|s| s.r1).fold(0.0, f64::max);
    let steps = ((end * m as f64).ceil() as usize).max(sum.len());
    let (mut sup, mut core): (f64, f64) = (0.0, 0.0);
    for k in 0..steps {
        let tau = k as f64 / m as f64;
        let d = (r1_at(tr, tau) - sum.get(k).copied().unwrap_or(0.0) / seeds as f64).abs();
        sup = sup.max(d);
        if tau <= end - 0.5 {
            core = core.max(d);
        }
    }
    (sup / peak, core / peak, fails)
}

/// Direct iteration of `z ← ε λ(δ(z))` from `z = ε`, with `δ` linearly
/// interpolated on the profile grid, until `z ≤ z_1`.
fn direct_iterations(lam: &DegreeDistribution, p: &DeltaProfile, eps: f64) -> usize {
    let dz = p.dz();
    let delta = |z: f64| {
        let x = z / dz - 1.0;
        if x <= 0.0 {
            return p.delta[0] * z / p.z[0];
        }
        let i = (x.floor() as usize).min(p.len() - 2);
        let t = x - i as f64;
        p.delta[i] * (1.0 - t) + p.delta[i + 1] * t
    };
    let mut z = eps;
    let mut n = 0;
    while z > p.z[0] && n < 10_000_000 {
        z = eps * lam.eval(delta(z));
        n += 1;
    }
    n
}

fn c9_eq3(ctx: &Ctx) -> Verdict {
    let e = Ensemble::Ldpc(ScEnsemble::regular(4, 8, 20, 3, 990).unwrap());
    let model = DeModel::from_ensemble(&e);
    let eps = bp_threshold(&model, &ctx.de) - 0.02;
    let p = precompute_delta_with_model(&model, eps, 9, 1000, &ctx.de).unwrap();
    let lam = DegreeDistribution::regular(4).unwrap();
    let approx = one_dim_iterations(&lam, &p, eps);
    let direct = direct_iterations(&lam, &p, eps) as f64;
    let rel = (approx - direct).abs() / direct;

    let lam0 = DegreeDistribution::new([(3, 0.05), (4, 0.9), (5, 0.05)]).unwrap();
    let grad = linearize_iteration_objective(&lam0, &p, eps).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (a, b) in [(3, 4), (5, 4), (3, 5)] {
        let shifted = |s: f64| {
            let mut c: Vec<(usize, f64)> = lam0.terms().collect();
            for x in c.iter_mut() {
                if x.0 == a {
                    x.1 += s;
                }
                if x.0 == b {
                    x.1 -= s;
                }
            }
            one_dim_iterations(&DegreeDistribution::new(c).unwrap(), &p, eps)
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let lin = grad[a] - grad[b];
        worst = worst.max((fd - lin).abs() / lin.abs());
    }
    verdict(
        rel <= 0.05 && worst <= 1e-4,
        format!(
            "ε={eps:.4}: integral {approx:.1} vs direct {direct:.0} iterations ({:.2}%, ≤5%); gradient vs central differences {worst:.2e} (≤1e-4)",
            100.0 * rel
        ),
    )
}

fn fer_pair(a: &TannerGraph, b: &TannerGraph, seed: u64, eps: f64) -> (scforge::sim::SimPoint, scforge::sim::SimPoint) {
    let stop = StopRule::fixed(2000);
    let pa = estimate_fer(a, &[eps], stop, seed).points.remove(0);
    let pb = estimate_fer(b, &[eps], stop, seed).points.remove(0);
    (pa, pb)
}

fn c10_finite(ctx: &Ctx) -> Verdict {
    let peg = PegParams::default();
    let reg = ScEnsemble::regular(4, 8, 20, 3, 198).unwrap();
    let des = rescale(ldpc(&ctx.alg3(1).ensemble), 198);
    let g_reg = build_peg(&Ensemble::Ldpc(reg), &peg, 1).unwrap();
    let g_des = build_peg(&Ensemble::Ldpc(des), &peg, 1).unwrap();
    let (r, d) = fer_pair(&g_reg, &g_des, 11, 0.45);
    let ldpc_ok = d.ci_hi < r.ci_lo;

    let ra_reg = ScRaEnsemble::regular(5, 20, 200).unwrap();
    let ra_des = ScRaEnsemble::new(5, 20, 200, ctx.ra3(1).ensemble.lambdas().to_vec()).unwrap();
    let g_rr = build_scra(&ra_reg, 1, &peg).unwrap();
    let g_rd = build_scra(&ra_des, 1, &peg);
    let (ra_ok, ra_text) = match g_rd {
        Ok(g_rd) => {
            let (rr, rd) = fer_pair(&g_rr, &g_rd, 12, 0.45);
            let (xr, xd) = fer_pair(&g_rr, &g_rd, 12, 0.48);
            (
                rd.ci_hi < rr.ci_lo,
                format!(
                    "SC-RA regular {:.4} [{:.4},{:.4}] vs designed {:.4} [{:.4},{:.4}] (at ε=0.48: {:.4} [{:.4},{:.4}] vs {:.4} [{:.4},{:.4}])",
                    rr.fer, rr.ci_lo, rr.ci_hi, rd.fer, rd.ci_lo, rd.ci_hi, xr.fer, xr.ci_lo, xr.ci_hi, xd.fer, xd.ci_lo, xd.ci_hi
                ),
            )
        }
        Err(e) => (false, format!("SC-RA designed instance: {e}")),
    };

    let g = build_met(&ScEnsemble::regular(4, 8, 10, 3, 30).unwrap().with_met().unwrap(), 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut agree = 0;
    for k in 0..10_000 {
        let eps = 0.35 + 0.25 * (k as f64 / 10_000.0);
        let m = erasure_mask(g.num_vars(), eps, &mut rng);
        agree += usize::from(peel(&g, &m) == flood_decode(&g, &m));
    }
    verdict(
        ldpc_ok && ra_ok && agree == 10_000,
        format!(
            "M=198 SC-LDPC regular {:.4} [{:.4},{:.4}] vs designed {:.4} [{:.4},{:.4}]; {ra_text}; peeling = flooding BP on {agree}/10000",
            r.fer, r.ci_lo, r.ci_hi, d.fer, d.ci_lo, d.ci_hi
        ),
    )
}

fn c11_determinism(_: &Ctx) -> Verdict {
    let mut failures = BTreeSet::new();
    let e = ScEnsemble::regular(4, 8, 10, 3, 60).unwrap();
    let em = e.with_met().unwrap();
    let ra = ScRaEnsemble::regular(5, 10, 60).unwrap();
    let builds: [(&str, Box<dyn Fn() -> TannerGraph>); 4] = [
        ("random", Box::new(|| build_random(&e, 3).unwrap())),
        ("met", Box::new(|| build_met(&em, 3).unwrap())),
        ("peg", Box::new(|| build_peg(&Ensemble::Ldpc(e.clone()), &PegParams::default(), 3).unwrap())),
        ("scra", Box::new(|| build_scra(&ra, 3, &PegParams::default()).unwrap())),
    ];
    for (name, f) in &builds {
        if to_text(&f()) != to_text(&f()) {
            failures.insert(format!("build {name}"));
        }
    }
    let g = build_random(&e, 3).unwrap();
    let stop = StopRule { min_errors: 30, max_trials: 3000 };
    let runs: Vec<String> = [1, 2, 4]
        .iter()
        .map(|&n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| estimate_fer(&g, &[0.40, 0.45], stop, 9).to_csv())
        })
        .collect();
    if runs.iter().any(|r| r != &runs[0]) {
        failures.insert("simulate".into());
    }
    let small = ScEnsemble::regular(3, 6, 6, 3, 6).unwrap();
    let p = DesignParams { q_grid: 100, i_max: 1, ..DesignParams::default() };
    let designs: Vec<String> = [1, 3]
        .iter()
        .map(|&n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| ens_io::to_text(&design_min_iters_nonuniform_checks(&small, &p, &DeOptions::default(), None).unwrap().ensemble))
        })
        .collect();
    if designs[0] != designs[1] {
        failures.insert("design".into());
    }
    let a = ege_run(&e, 0.45, &EgeOptions::default()).to_csv();
    if a != ege_run(&e, 0.45, &EgeOptions::default()).to_csv() {
        failures.insert("ege".into());
    }
    // full CLI pipeline with different worker counts
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n[ensemble]\nl = 4\nr = 8\nL = 10\nw = 3\nM = 60\n[build]\nmethod = \"peg\"\n\
         [simulate]\ngraph = \"graph.txt\"\neps = [0.42]\nmin_errors = 20\nmax_trials = 4000\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(format!("out{jobs}"));
        let cfg_s = cfg.to_str().unwrap();
        let out_s = out.to_str().unwrap();
        let code_b = scforge::cli::run(["scforge", "build", "--config", cfg_s, "--jobs", jobs, "--out", out_s]);
        // the simulate step reads graph.txt next to the config
        std::fs::copy(out.join("graph.txt"), dir.path().join("graph.txt")).unwrap();
        let code_s = scforge::cli::run(["scforge", "simulate", "--config", cfg_s, "--jobs", jobs, "--out", out_s]);
        if code_b != 0 || code_s != 0 {
            failures.insert("cli exit".into());
        }
        outputs.push((std::fs::read(out.join("graph.txt")).unwrap(), std::fs::read(out.join("simulate.csv")).unwrap()));
    }
    if outputs[0] != outputs[1] {
        failures.insert("cli".into());
    }
    let ok = failures.is_empty();
    verdict(
        ok,
        if ok {
            "builds (random, met, peg, sc-ra), simulate at 1/2/4 workers, alg-4 design at 1/3 workers, EGE, CLI build+simulate at --jobs 1/3: identical".to_string()
        } else {
            format!("differs: {failures:?}")
        },
    )
}

type Criterion = (usize, &'static str, fn(&Ctx) -> Verdict);

fn main() {
    // libtest flags are passed through by `cargo test`; nothing to parse
    let smoke = std::env::var("SCFORGE_ACCEPT_TIER").is_ok_and(|t| t == "smoke");
    let only: Option<BTreeSet<usize>> =
        std::env::var("SCFORGE_ACCEPT_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("SCFORGE_ACCEPT_STRICT").is_ok_and(|s| s == "1");
    let ctx = Ctx {
        q_grid: if smoke { 300 } else { 1000 },
        smoke,
        de: DeOptions::default(),
        alg3: Default::default(),
        ra3: Default::default(),
    };
    let criteria: [Criterion; 11] = [
        (1, "design rate", c1_rate),
        (2, "regular SC-LDPC thresholds", c2_regular),
        (3, "regular SC-RA thresholds", c3_regular_ra),
        (4, "alg 2 rate and degree profile", c4_alg2),
        (5, "alg 3 thresholds and centre λ", c5_alg3),
        (6, "alg 4 thresholds", c6_alg4),
        (7, "SC-RA alg 3 thresholds", c7_ra_alg3),
        (8, "expected graph evolution", c8_ege),
        (9, "iteration-count integral and gradient", c9_eq3),
        (10, "finite-length ordering and decoder oracle", c10_finite),
        (11, "determinism", c11_determinism),
    ];
    println!("acceptance tier: {} (Q = {})", if smoke { "smoke" } else { "full" }, ctx.q_grid);
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let v = f(&ctx);
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} [{tag}] {name}: {} ({:.1} s)", v.detail, t.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(id);
        }
    }
    println!("acceptance: {} failing {:?}", if failed.is_empty() { "all pass," } else { "some criteria fail," }, failed);
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
