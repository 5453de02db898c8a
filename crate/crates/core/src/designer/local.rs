//! Local degree-distribution problems on one sampled transfer function.

use crate::de::DeltaProfile;
use crate::ensemble::DegreeDistribution;
use crate::error::{Error, Result};
use crate::lp::{solve_row_generation, LpProblem, LpStatus};

/// Decision space `λ_k, k ∈ [l_min, l_max]` against one profile at one `ε`.
pub(crate) struct LocalProblem<'a> {
    profile: &'a DeltaProfile,
    eps: f64,
    l_min: usize,
    /// `powers[q][i] = δ(z_q)^(l_min + i - 1)`
    powers: Vec<Vec<f64>>,
    margin: f64,
}

impl<'a> LocalProblem<'a> {
    pub(crate) fn new(profile: &'a DeltaProfile, eps: f64, l_min: usize, l_max: usize, margin: f64) -> Self {
        let n = l_max + 1 - l_min;
        let powers = profile
            .delta
            .iter()
            .map(|&d| (0..n).map(|i| d.powi((l_min + i - 1) as i32)).collect())
            .collect();
        LocalProblem { profile, eps, l_min, powers, margin }
    }

    pub(crate) fn dim(&self) -> usize {
        self.powers.first().map_or(0, Vec::len)
    }

    fn degree(&self, i: usize) -> usize {
        self.l_min + i
    }

    pub(crate) fn to_distribution(&self, lam: &[f64]) -> Result<DegreeDistribution> {
        DegreeDistribution::new(lam.iter().enumerate().map(|(i, &c)| (self.degree(i), c)).filter(|p| p.1 > 0.0))
    }

    /// Coefficients of `λ` on the support, or `None` if `λ` leaves it.
    pub(crate) fn restrict(&self, lambda: &DegreeDistribution) -> Option<Vec<f64>> {
        if lambda.min_degree() < self.l_min || lambda.max_degree() >= self.l_min + self.dim() {
            return None;
        }
        Some((0..self.dim()).map(|i| lambda.coefficient(self.degree(i))).collect())
    }

    fn gaps(&self, lam: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let lam = lam.to_vec();
        self.profile.z.iter().zip(&self.powers).map(move |(z, row)| {
            let g: f64 = row.iter().zip(&lam).map(|(p, l)| p * l).sum();
            z - self.eps * g
        })
    }

    /// Exact one-dimensional iteration count at `λ` (`+∞` if infeasible).
    pub(crate) fn objective(&self, lam: &[f64]) -> f64 {
        let q = self.profile.len();
        let dz = self.profile.dz();
        let mut total = 0.0;
        for (i, gap) in self.gaps(lam).enumerate() {
            if i == 0 || i + 1 >= q {
                continue;
            }
            if gap <= 0.0 {
                return f64::INFINITY;
            }
            total += dz / gap;
        }
        total
    }

    /// Gradient of [`LocalProblem::objective`].
    pub(crate) fn gradient(&self, lam: &[f64]) -> Vec<f64> {
        let q = self.profile.len();
        let dz = self.profile.dz();
        let mut g = vec![0.0; self.dim()];
        for (i, gap) in self.gaps(lam).enumerate() {
            if i == 0 || i + 1 >= q {
                continue;
            }
            let w = dz * self.eps / (gap * gap);
            for (gk, p) in g.iter_mut().zip(&self.powers[i]) {
                *gk += w * p;
            }
        }
        g
    }

    /// Decoding rows with margin hold, `Σλ = 1`, `λ ≥ 0`, and
    /// optionally `Σ λ_k/k = inv_avg`.
    pub(crate) fn is_feasible(&self, lam: &[f64], inv_avg: Option<f64>) -> bool {
        let sum: f64 = lam.iter().sum();
        if lam.iter().any(|&v| v < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return false;
        }
        if let Some(t) = inv_avg {
            let s: f64 = lam.iter().enumerate().map(|(i, c)| c / self.degree(i) as f64).sum();
            if (s - t).abs() > 1e-9 {
                return false;
            }
        }
        self.gaps(lam).zip(&self.profile.z).all(|(gap, z)| gap >= z * self.margin * (1.0 - 1e-9))
    }

    /// LP over the constraint set with objective `c`, plus optional box
    /// `|λ - center| ≤ radius`.
    fn lp(&self, c: Vec<f64>, inv_avg: Option<f64>, trust: Option<(&[f64], f64)>) -> Option<Vec<f64>> {
        let n = self.dim();
        let mut p = LpProblem::new(c);
        for (row, z) in self.powers.iter().zip(&self.profile.z) {
            p.add_le(row.iter().map(|v| self.eps * v).collect(), z * (1.0 - self.margin));
        }
        p.add_eq(vec![1.0; n], 1.0);
        if let Some(t) = inv_avg {
            p.add_eq((0..n).map(|i| 1.0 / self.degree(i) as f64).collect(), t);
        }
        let mut initial = Vec::new();
        if let Some((center, radius)) = trust {
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                initial.push(p.b_ub.len());
                p.add_le(e.clone(), center[i] + radius);
                if center[i] - radius > 0.0 {
                    e[i] = -1.0;
                    initial.push(p.b_ub.len());
                    p.add_le(e, radius - center[i]);
                }
            }
        }
        let sol = solve_row_generation(&p, &initial);
        match sol.status {
            LpStatus::Optimal => Some(sol.x.iter().map(|v| v.max(0.0)).collect()),
            _ => None,
        }
    }

    /// Largest `∫λ = Σλ_k/k` under the decoding constraints.
    pub(crate) fn max_rate(&self) -> Option<Vec<f64>> {
        let c = (0..self.dim()).map(|i| -1.0 / self.degree(i) as f64).collect();
        self.lp(c, None, None)
    }

    /// A feasible point, preferring large gaps where `z` is small.
    pub(crate) fn feasible_start(&self, inv_avg: Option<f64>) -> Option<Vec<f64>> {
        let q = self.profile.len();
        let dz = self.profile.dz();
        let mut c = vec![0.0; self.dim()];
        for (i, z) in self.profile.z.iter().enumerate() {
            if i == 0 || i + 1 >= q {
                continue;
            }
            for (ck, p) in c.iter_mut().zip(&self.powers[i]) {
                *ck += dz * self.eps * p / (z * z);
            }
        }
        self.lp(c, inv_avg, None)
    }

    /// Minimizes the iteration count by successive linear programs inside
    /// a trust region; every accepted round strictly lowers the exact
    /// objective. Returns the final point and its objective.
    pub(crate) fn min_iterations(&self, start: Vec<f64>, inv_avg: Option<f64>, tol: f64, max_rounds: usize) -> (Vec<f64>, f64) {
        let mut lam = start;
        let mut f = self.objective(&lam);
        let mut radius = 0.5;
        for _ in 0..max_rounds {
            let g = self.gradient(&lam);
            let Some(cand) = self.lp(g.clone(), inv_avg, Some((&lam, radius))) else {
                break;
            };
            let predicted: f64 = g.iter().zip(lam.iter().zip(&cand)).map(|(gk, (a, b))| gk * (a - b)).sum();
            if predicted <= tol * f {
                break;
            }
            let fc = self.objective(&cand);
            let actual = f - fc;
            let ratio = actual / predicted;
            if actual > 0.0 {
                let step = lam.iter().zip(&cand).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                lam = cand;
                f = fc;
                if ratio > 0.75 && step > 0.5 * radius {
                    radius = (2.0 * radius).min(1.0);
                } else if ratio < 0.25 {
                    radius *= 0.25;
                }
            } else {
                radius *= 0.25;
            }
            if radius < 1e-12 {
                break;
            }
        }
        (lam, f)
    }
}

/// Gradient of the one-dimensional iteration count at `lambda0`, indexed by
/// degree (`c[d]` for `d ≤ max degree`, zero for `d < 2`).
///
/// `lambda0` must satisfy `ε λ0(δ(z_q)) < z_q` on the summed grid points.
pub fn linearize_iteration_objective(lambda0: &DegreeDistribution, prof: &DeltaProfile, eps: f64) -> Result<Vec<f64>> {
    let q = prof.len();
    let dz = prof.dz();
    let dmax = lambda0.max_degree();
    let mut c = vec![0.0; dmax + 1];
    for i in 0..q {
        if q > 2 && (i == 0 || i + 1 >= q) {
            continue;
        }
        let gap = prof.z[i] - eps * lambda0.eval(prof.delta[i]);
        if gap <= 0.0 {
            return Err(Error::Parameter(format!("λ0 violates the decoding constraint at z = {}", prof.z[i])));
        }
        let w = dz * eps / (gap * gap);
        for (d, cd) in c.iter_mut().enumerate().skip(2) {
            *cd += w * prof.delta[i].powi(d as i32 - 1);
        }
    }
    Ok(c)
}
