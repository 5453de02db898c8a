use std::fmt;

use crate::error::{Error, Result};

/// Sum-to-one tolerance accepted on input before renormalizing.
const SUM_INPUT_TOL: f64 = 1e-9;
/// Below this deviation the coefficients are stored as given.
const SUM_EXACT_TOL: f64 = 1e-13;

/// Edge-perspective variable degree distribution `λ(x) = Σ_d λ_d x^(d-1)`.
///
/// `coeffs[d]` is the fraction of edges attached to degree-`d` nodes; entries
/// for `d < 2` are always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeDistribution {
    coeffs: Vec<f64>,
}

impl DegreeDistribution {
    /// Builds a distribution from `(degree, fraction)` pairs.
    ///
    /// Tiny negative values (LP round-off, above `-1e-12`) are clipped to
    /// zero. The fractions must sum to one within `1e-9`; small deviations
    /// are renormalized away.
    pub fn new<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut coeffs: Vec<f64> = Vec::new();
        for (d, c) in pairs {
            if d < 2 {
                return Err(Error::Distribution(format!("degree {d} below 2")));
            }
            if !c.is_finite() || c < -1e-12 {
                return Err(Error::Distribution(format!("coefficient {c} for degree {d}")));
            }
            if coeffs.len() <= d {
                coeffs.resize(d + 1, 0.0);
            }
            coeffs[d] += c.max(0.0);
        }
        Self::from_coeffs(coeffs)
    }

    fn from_coeffs(mut coeffs: Vec<f64>) -> Result<Self> {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > SUM_INPUT_TOL {
            return Err(Error::Distribution(format!("coefficients sum to {sum}")));
        }
        if (sum - 1.0).abs() > SUM_EXACT_TOL {
            coeffs.iter_mut().for_each(|c| *c /= sum);
        }
        if coeffs.is_empty() {
            return Err(Error::Distribution("empty distribution".into()));
        }
        Ok(DegreeDistribution { coeffs })
    }

    /// `λ(x) = x^(d-1)`.
    pub fn regular(d: usize) -> Result<Self> {
        Self::new([(d, 1.0)])
    }

    pub fn coefficient(&self, d: usize) -> f64 {
        self.coeffs.get(d).copied().unwrap_or(0.0)
    }

    /// Nonzero `(degree, fraction)` pairs in increasing degree order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(|(d, c)| (d, *c))
    }

    pub fn min_degree(&self) -> usize {
        self.terms().next().map(|(d, _)| d).unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Evaluates `λ(x)` by Horner's rule.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for d in (2..self.coeffs.len()).rev() {
            acc = acc * x + self.coeffs[d];
        }
        // coeffs[d] multiplies x^(d-1): one extra factor for the d=2 term
        acc * x
    }

    /// `∫₀¹ λ(x) dx = Σ_d λ_d / d`.
    pub fn integral(&self) -> f64 {
        self.terms().map(|(d, c)| c / d as f64).sum()
    }

    /// Average node degree `1 / ∫₀¹ λ`.
    pub fn average_degree(&self) -> f64 {
        1.0 / self.integral()
    }

    /// Node-perspective fractions `(d, n_d)` with `Σ n_d = 1`.
    pub fn node_fractions(&self) -> Vec<(usize, f64)> {
        let total = self.integral();
        self.terms().map(|(d, c)| (d, c / d as f64 / total)).collect()
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &DegreeDistribution) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|d| (self.coefficient(d) - other.coefficient(d)).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the support bounds `[l_min, l_max]`.
    pub fn check_support(&self, l_min: usize, l_max: usize) -> Result<()> {
        let (lo, hi) = (self.min_degree(), self.max_degree());
        if lo < l_min || hi > l_max {
            return Err(Error::Distribution(format!(
                "support [{lo}, {hi}] outside [{l_min}, {l_max}]"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:.4}x^{}", d - 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_evaluates_as_monomial() {
        let l = DegreeDistribution::regular(4).unwrap();
        assert_eq!(l.eval(0.5), 0.125);
        assert_eq!(l.average_degree(), 4.0);
        assert_eq!(l.min_degree(), 4);
        assert_eq!(l.max_degree(), 4);
    }

    #[test]
    fn irregular_from_table_example() {
        // 3/8 x^2 + 5/8 x^4 has average degree 4
        let l = DegreeDistribution::new([(3, 0.375), (5, 0.625)]).unwrap();
        assert!((l.average_degree() - 4.0).abs() < 1e-12);
        assert!((l.eval(0.5) - (0.375 * 0.25 + 0.625 * 0.0625)).abs() < 1e-15);
        let nodes = l.node_fractions();
        assert!((nodes[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DegreeDistribution::new([(1, 1.0)]).is_err());
        assert!(DegreeDistribution::new([(3, 0.5)]).is_err());
        assert!(DegreeDistribution::new([(3, 1.5), (4, -0.5)]).is_err());
        assert!(DegreeDistribution::new(Vec::<(usize, f64)>::new()).is_err());
    }

    #[test]
    fn renormalizes_small_drift() {
        let l = DegreeDistribution::new([(3, 0.5 + 1e-11), (4, 0.5)]).unwrap();
        let s: f64 = l.terms().map(|t| t.1).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_check() {
        let l = DegreeDistribution::new([(3, 0.5), (10, 0.5)]).unwrap();
        assert!(l.check_support(3, 10).is_ok());
        assert!(l.check_support(4, 10).is_err());
        assert!(l.check_support(3, 9).is_err());
    }
}
