use super::{balanced_split, circulant, DegreeDistribution, Violation, ViolationKind};
use crate::error::{param_err, Result};

/// Spatially-coupled repeat-accumulate ensemble.
///
/// Each position holds `M/2` upper (repeat) variables and `M/2` degree-2
/// accumulator variables; every check at position `v` carries one edge from
/// each upper position `v - t`, `t ∈ [0, q)`, plus two accumulator edges.
#[derive(Clone, Debug, PartialEq)]
pub struct ScRaEnsemble {
    q: usize,
    positions: usize,
    m: usize,
    lambdas: Vec<DegreeDistribution>,
}

impl ScRaEnsemble {
    /// Regular ensemble: every upper variable has degree `q`.
    pub fn regular(q: usize, positions: usize, m: usize) -> Result<Self> {
        let lam = DegreeDistribution::regular(q)?;
        Self::new(q, positions, m, vec![lam; positions])
    }

    pub fn new(q: usize, positions: usize, m: usize, lambdas: Vec<DegreeDistribution>) -> Result<Self> {
        if q < 3 {
            return param_err(format!("repeat degree {q} below 3"));
        }
        if m == 0 || !m.is_multiple_of(2) {
            return param_err(format!("M = {m} must be positive and even"));
        }
        if positions == 0 {
            return param_err("L must be positive");
        }
        if lambdas.len() != positions {
            return param_err(format!("expected {positions} degree distributions"));
        }
        Ok(ScRaEnsemble { q, positions, m, lambdas })
    }

    pub fn q(&self) -> usize {
        self.q
    }
    /// Coupling width, equal to the repeat degree.
    pub fn width(&self) -> usize {
        self.q
    }
    pub fn positions(&self) -> usize {
        self.positions
    }
    pub fn check_positions(&self) -> usize {
        self.positions + self.q - 1
    }
    pub fn m(&self) -> usize {
        self.m
    }
    /// Upper variables per position, also checks and accumulators per check
    /// position.
    pub fn half(&self) -> usize {
        self.m / 2
    }
    pub fn lambda(&self, u: usize) -> &DegreeDistribution {
        &self.lambdas[u]
    }
    pub fn lambdas(&self) -> &[DegreeDistribution] {
        &self.lambdas
    }
    pub fn mirror_var(&self, u: usize) -> usize {
        self.positions - 1 - u
    }

    pub(crate) fn set_lambda(&mut self, u: usize, lambda: DegreeDistribution) {
        self.lambdas[u] = lambda;
    }

    /// Degree type matrix `S^{u,i}` of an upper variable of degree `i`: row
    /// 0 is the ceil/floor split of `i` over `q` positions, row `k` its
    /// `k`-fold right circular shift.
    pub fn var_type_matrix(&self, degree: usize) -> Vec<Vec<usize>> {
        circulant(&balanced_split(degree, self.q))
    }

    /// `1 - C/V` counting upper variables, accumulators and checks.
    pub fn design_rate(&self) -> f64 {
        let half = self.half() as f64;
        let checks = self.check_positions() as f64 * half;
        let vars = self.positions as f64 * half + checks;
        1.0 - checks / vars
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (u, lam) in self.lambdas.iter().enumerate() {
            if lam.min_degree() < 3 {
                out.push(Violation::new(
                    ViolationKind::Distribution,
                    format!("upper degree {} at position {u} below 3", lam.min_degree()),
                ));
            }
            let sum: f64 = lam.terms().map(|(_, c)| c).sum();
            if (sum - 1.0).abs() > 1e-12 {
                out.push(Violation::new(ViolationKind::Distribution, format!("λ_{u} sums to {sum}")));
            }
            // one edge of every type per check needs average degree q
            let avg = lam.average_degree();
            if (avg - self.q as f64).abs() > 1e-9 * self.q as f64 {
                out.push(Violation::new(
                    ViolationKind::SocketBalance,
                    format!("average upper degree {avg} at position {u} differs from q = {}", self.q),
                ));
            }
            if lam != &self.lambdas[self.mirror_var(u)] {
                out.push(Violation::new(ViolationKind::Symmetry, format!("λ_{u} ≠ λ_{}", self.mirror_var(u))));
            }
        }
        if !self.m.is_multiple_of(2) {
            out.push(Violation::new(ViolationKind::Parameter, format!("M = {} is odd", self.m)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_matrix_degree_three() {
        let e = ScRaEnsemble::regular(5, 10, 20).unwrap();
        let s = e.var_type_matrix(3);
        assert_eq!(s[0], vec![1, 1, 1, 0, 0]);
        assert_eq!(s[1], vec![0, 1, 1, 1, 0]);
        assert!(s.iter().all(|row| row.iter().sum::<usize>() == 3));
        assert!(e.var_type_matrix(5).iter().flatten().all(|&x| x == 1));
    }

    #[test]
    fn regular_is_valid_and_rate_tends_to_half() {
        let e = ScRaEnsemble::regular(5, 20, 900).unwrap();
        assert!(e.validate().is_empty());
        assert!((e.design_rate() - (1.0 - 24.0 / 44.0)).abs() < 1e-12);
        let big = ScRaEnsemble::regular(5, 100_000, 2).unwrap();
        assert!((big.design_rate() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn rejects_odd_m_and_low_degree() {
        assert!(ScRaEnsemble::regular(5, 10, 7).is_err());
        assert!(ScRaEnsemble::regular(2, 10, 8).is_err());
        let lam = DegreeDistribution::new([(2, 0.4), (10, 0.6)]).unwrap();
        let e = ScRaEnsemble::new(5, 5, 4, vec![lam; 5]).unwrap();
        assert!(e.validate().iter().any(|v| v.kind == ViolationKind::Distribution));
    }
}
