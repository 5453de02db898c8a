//! Coupled ensemble data model: SC-LDPC (random or multi-edge-type checks)
//! and SC-RA ensembles, their invariants, and design rates.
//!
//! Positions are 0-based throughout the crate: variable positions
//! `u ∈ [0, L)`, check positions `v ∈ [0, L + w - 1)`, and variable position
//! `u` connects to check positions `u..u + w`.

mod degree;
pub mod io;
mod scra;

use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{param_err, Result};

pub use degree::DegreeDistribution;
pub use scra::ScRaEnsemble;

/// Exact edge counts `T[v][u]` between check position `v` and variable
/// position `u`, an `(L + w - 1) × L` matrix. Only the band
/// `u ≤ v < u + w` is stored; every other entry is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityMatrix {
    positions: usize,
    width: usize,
    /// `entries[u * w + (v - u)]`
    entries: Vec<Rational64>,
}

impl ConnectivityMatrix {
    pub fn zeros(positions: usize, width: usize) -> Self {
        ConnectivityMatrix { positions, width, entries: vec![Rational64::zero(); positions * width] }
    }

    /// Banded matrix with `value` on every legal `(v, u)` pair.
    pub fn banded(positions: usize, width: usize, value: Rational64) -> Self {
        ConnectivityMatrix { positions, width, entries: vec![value; positions * width] }
    }

    pub fn rows(&self) -> usize {
        self.positions + self.width - 1
    }

    pub fn cols(&self) -> usize {
        self.positions
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn in_band(&self, v: usize, u: usize) -> bool {
        u < self.positions && u <= v && v < u + self.width
    }

    pub fn get(&self, v: usize, u: usize) -> Rational64 {
        if self.in_band(v, u) {
            self.entries[u * self.width + v - u]
        } else {
            Rational64::zero()
        }
    }

    pub fn get_f64(&self, v: usize, u: usize) -> f64 {
        ratio_f64(self.get(v, u))
    }

    /// Sets a band entry.
    ///
    /// # Panics
    /// On a nonzero value outside the band.
    pub fn set(&mut self, v: usize, u: usize, value: Rational64) {
        if self.in_band(v, u) {
            self.entries[u * self.width + v - u] = value;
        } else {
            assert!(value.is_zero(), "T[{v}][{u}] lies outside the band");
        }
    }

    /// Variable positions adjacent to check position `v`.
    pub fn row_range(&self, v: usize) -> std::ops::Range<usize> {
        (v + 1).saturating_sub(self.width)..(v + 1).min(self.positions)
    }

    /// Check positions adjacent to variable position `u`.
    pub fn col_range(&self, u: usize) -> std::ops::Range<usize> {
        u..u + self.width
    }

    /// `Σ_j T[v][j]`: edges landing on check position `v`.
    pub fn row_sum(&self, v: usize) -> Rational64 {
        self.row_range(v).map(|u| self.get(v, u)).sum()
    }

    /// `Σ_i T[i][u]`: sockets of variable position `u`.
    pub fn col_sum(&self, u: usize) -> Rational64 {
        self.entries[u * self.width..(u + 1) * self.width].iter().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| e.is_integer())
    }
}

pub(crate) fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().expect("finite rational")
}

/// Check-side multi-edge-type structure: one `w × w` degree type matrix per
/// check position. Row `k` of `S^v` lists how many edges of each type a check
/// of degree type `k` carries; type `t` edges go to variable position `v - t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetProfile {
    pub type_matrices: Vec<Vec<Vec<usize>>>,
}

/// Ceil/floor split of `total` edges over `parts` slots: the first
/// `total mod parts` slots get `⌈total/parts⌉`, the rest `⌊total/parts⌋`.
pub fn balanced_split(total: usize, parts: usize) -> Vec<usize> {
    let (q, rem) = (total / parts, total % parts);
    (0..parts).map(|i| if i < rem { q + 1 } else { q }).collect()
}

/// Circulant matrix whose row `k` is `first` right-circular-shifted `k`
/// times (row 0 unshifted).
pub fn circulant(first: &[usize]) -> Vec<Vec<usize>> {
    let n = first.len();
    (0..n)
        .map(|k| (0..n).map(|j| first[(j + n - k) % n]).collect())
        .collect()
}

/// Degree type matrix `S^v` for check degree `r_v` and coupling width `w`.
pub fn met_degree_types(r_v: usize, w: usize) -> Result<Vec<Vec<usize>>> {
    if w == 0 || r_v < w {
        return param_err(format!("check degree {r_v} below coupling width {w}"));
    }
    Ok(circulant(&balanced_split(r_v, w)))
}

impl MetProfile {
    /// Builds the profile from per-position check degrees.
    pub fn from_check_degrees(check_degrees: &[usize], w: usize) -> Result<Self> {
        let type_matrices = check_degrees
            .iter()
            .map(|&r| met_degree_types(r, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(MetProfile { type_matrices })
    }
}

/// Spatially-coupled LDPC ensemble with per-position variable degree
/// distributions, per-position check degrees, and a connectivity matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ScEnsemble {
    l: usize,
    r: usize,
    positions: usize,
    width: usize,
    m: usize,
    mc: usize,
    lambdas: Vec<DegreeDistribution>,
    var_counts: Vec<f64>,
    check_degrees: Vec<usize>,
    connectivity: ConnectivityMatrix,
    met: Option<MetProfile>,
}

/// Reference parameters shared by every coupled LDPC ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseParams {
    /// Reference variable degree `l`.
    pub l: usize,
    /// Reference check degree `r`.
    pub r: usize,
    /// Number of variable positions `L`.
    pub positions: usize,
    /// Coupling width `w`.
    pub width: usize,
    /// Variable nodes per position `M`.
    pub m: usize,
}

impl BaseParams {
    /// Check nodes per check position, `M·l/r`, when integral.
    pub fn check_nodes(&self) -> Result<usize> {
        if self.r == 0 || !(self.m * self.l).is_multiple_of(self.r) {
            return param_err(format!("M·l/r = {}·{}/{} is not an integer", self.m, self.l, self.r));
        }
        Ok(self.m * self.l / self.r)
    }
}

impl ScEnsemble {
    /// Regular `(l, r)` ensemble coupled over `L` positions with width `w`.
    pub fn regular(l: usize, r: usize, positions: usize, width: usize, m: usize) -> Result<Self> {
        if l < 2 || r < 2 || width == 0 || m == 0 {
            return param_err("degrees must be ≥ 2, width and M positive");
        }
        if positions < width {
            return param_err(format!("L = {positions} smaller than w = {width}"));
        }
        let base = BaseParams { l, r, positions, width, m };
        let mc = base.check_nodes()?;
        if !(m * l).is_multiple_of(width) {
            return param_err(format!("T entry M·l/w = {}·{}/{} is not an integer", m, l, width));
        }
        let t = ConnectivityMatrix::banded(positions, width, Rational64::from_integer((m * l / width) as i64));
        let lambda = DegreeDistribution::regular(l)?;
        Ok(ScEnsemble {
            l,
            r,
            positions,
            width,
            m,
            mc,
            lambdas: vec![lambda; positions],
            var_counts: vec![m as f64; positions],
            check_degrees: vec![r; positions + width - 1],
            connectivity: t,
            met: None,
        })
    }

    /// Assembles an ensemble from explicit parts. Only shapes are checked
    /// here; use [`ScEnsemble::validate`] for the structural invariants.
    pub fn from_parts(
        base: BaseParams,
        lambdas: Vec<DegreeDistribution>,
        var_counts: Vec<f64>,
        check_degrees: Vec<usize>,
        connectivity: ConnectivityMatrix,
        met: Option<MetProfile>,
    ) -> Result<Self> {
        let mc = base.check_nodes()?;
        let (n, w) = (base.positions, base.width);
        if n == 0 || w == 0 {
            return param_err("L and w must be positive");
        }
        if lambdas.len() != n || var_counts.len() != n {
            return param_err(format!("expected {n} degree distributions and variable counts"));
        }
        if check_degrees.len() != n + w - 1 {
            return param_err(format!("expected {} check degrees", n + w - 1));
        }
        if connectivity.cols() != n || connectivity.width() != w {
            return param_err(format!(
                "connectivity matrix has L = {}, w = {}; expected {n}, {w}",
                connectivity.cols(),
                connectivity.width()
            ));
        }
        if let Some(p) = &met {
            if p.type_matrices.len() != n + w - 1
                || p.type_matrices.iter().any(|s| s.len() != w || s.iter().any(|row| row.len() != w))
            {
                return param_err("MET profile must hold one w×w matrix per check position");
            }
        }
        Ok(ScEnsemble {
            l: base.l,
            r: base.r,
            positions: n,
            width: w,
            m: base.m,
            mc,
            lambdas,
            var_counts,
            check_degrees,
            connectivity,
            met,
        })
    }

    /// Same ensemble with check-side MET structure derived from the check
    /// degrees.
    pub fn with_met(&self) -> Result<Self> {
        let mut e = self.clone();
        e.met = Some(MetProfile::from_check_degrees(&self.check_degrees, self.width)?);
        Ok(e)
    }

    /// Same ensemble with the MET structure dropped (random construction).
    pub fn without_met(&self) -> Self {
        let mut e = self.clone();
        e.met = None;
        e
    }

    pub fn base(&self) -> BaseParams {
        BaseParams { l: self.l, r: self.r, positions: self.positions, width: self.width, m: self.m }
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn r(&self) -> usize {
        self.r
    }
    /// Number of variable positions `L`.
    pub fn positions(&self) -> usize {
        self.positions
    }
    /// Number of check positions `L + w - 1`.
    pub fn check_positions(&self) -> usize {
        self.positions + self.width - 1
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn m(&self) -> usize {
        self.m
    }
    /// Check nodes per check position `M_c`.
    pub fn mc(&self) -> usize {
        self.mc
    }
    pub fn lambda(&self, u: usize) -> &DegreeDistribution {
        &self.lambdas[u]
    }
    pub fn lambdas(&self) -> &[DegreeDistribution] {
        &self.lambdas
    }
    /// Variable node count `N_u` at position `u`.
    pub fn var_count(&self, u: usize) -> f64 {
        self.var_counts[u]
    }
    pub fn var_counts(&self) -> &[f64] {
        &self.var_counts
    }
    pub fn check_degree(&self, v: usize) -> usize {
        self.check_degrees[v]
    }
    pub fn check_degrees(&self) -> &[usize] {
        &self.check_degrees
    }
    pub fn connectivity(&self) -> &ConnectivityMatrix {
        &self.connectivity
    }
    pub fn met(&self) -> Option<&MetProfile> {
        self.met.as_ref()
    }

    /// Mirror of variable position `u`.
    pub fn mirror_var(&self, u: usize) -> usize {
        self.positions - 1 - u
    }

    /// Mirror of check position `v`.
    pub fn mirror_check(&self, v: usize) -> usize {
        self.check_positions() - 1 - v
    }

    /// Fraction of check sockets at position `v` that carry an edge.
    pub fn fill_fraction(&self, v: usize) -> f64 {
        ratio_f64(self.connectivity.row_sum(v)) / (self.mc * self.check_degrees[v]) as f64
    }

    pub(crate) fn set_lambda(&mut self, u: usize, lambda: DegreeDistribution) {
        self.lambdas[u] = lambda;
    }

    pub(crate) fn set_var_count(&mut self, u: usize, n: f64) {
        self.var_counts[u] = n;
    }

    pub(crate) fn set_check_degree(&mut self, v: usize, r: usize) {
        self.check_degrees[v] = r;
        if let Some(p) = &mut self.met {
            if let Ok(s) = met_degree_types(r, self.width) {
                p.type_matrices[v] = s;
            }
        }
    }

    pub(crate) fn connectivity_mut(&mut self) -> &mut ConnectivityMatrix {
        &mut self.connectivity
    }

    /// Design rate with the boundary-check correction optionally dropped.
    ///
    /// `R = (1 - l/r) - (l/r)(w-1)/L + (l/r)·2Σ_{v<w-1}(1 - f_v)^{r_v}/L`,
    /// where `f_v` is the socket fill fraction of check position `v`.
    pub fn design_rate(&self, include_last_term: bool) -> f64 {
        let ratio = self.l as f64 / self.r as f64;
        let n = self.positions as f64;
        let mut rate = (1.0 - ratio) - ratio * (self.width as f64 - 1.0) / n;
        if include_last_term {
            let boundary: f64 = (0..self.width - 1)
                .map(|v| (1.0 - self.fill_fraction(v)).powi(self.check_degrees[v] as i32))
                .sum();
            rate += ratio * 2.0 * boundary / n;
        }
        rate
    }

    /// Expected number of check nodes with at least one edge.
    pub fn expected_connected_checks(&self, include_last_term: bool) -> f64 {
        (0..self.check_positions())
            .map(|v| {
                let empty = if include_last_term {
                    (1.0 - self.fill_fraction(v)).max(0.0).powi(self.check_degrees[v] as i32)
                } else {
                    0.0
                };
                self.mc as f64 * (1.0 - empty)
            })
            .sum()
    }

    /// `1 - C̄ / V` with `V = Σ_u N_u`; reduces to [`ScEnsemble::design_rate`]
    /// when every `N_u = M`.
    pub fn general_rate(&self, include_last_term: bool) -> f64 {
        let v: f64 = self.var_counts.iter().sum();
        1.0 - self.expected_connected_checks(include_last_term) / v
    }

    /// Lists every violated structural invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (n, w) = (self.positions, self.width);
        let t = &self.connectivity;

        for (u, lam) in self.lambdas.iter().enumerate() {
            if lam.min_degree() < 2 {
                out.push(Violation::new(ViolationKind::Distribution, format!("λ_{u} has degree < 2")));
            }
            let sum: f64 = lam.terms().map(|(_, c)| c).sum();
            if (sum - 1.0).abs() > 1e-12 {
                out.push(Violation::new(ViolationKind::Distribution, format!("λ_{u} sums to {sum}")));
            }
        }
        for u in 0..n {
            for v in t.col_range(u) {
                let e = t.get(v, u);
                if e < Rational64::zero() {
                    out.push(Violation::new(ViolationKind::Band, format!("T[{v}][{u}] = {e} is negative")));
                }
                if t.get(self.mirror_check(v), self.mirror_var(u)) != e {
                    out.push(Violation::new(ViolationKind::Symmetry, format!("T[{v}][{u}] not mirrored")));
                }
            }
        }
        for u in 0..n {
            if self.lambdas[u] != self.lambdas[self.mirror_var(u)] {
                out.push(Violation::new(ViolationKind::Symmetry, format!("λ_{u} ≠ λ_{}", self.mirror_var(u))));
            }
            if self.var_counts[u] != self.var_counts[self.mirror_var(u)] {
                out.push(Violation::new(ViolationKind::Symmetry, format!("N_{u} not mirrored")));
            }
            let sockets = ratio_f64(t.col_sum(u));
            let expected = self.var_counts[u] / self.lambdas[u].integral();
            if (sockets - expected).abs() > 1e-9 * expected.max(1.0) {
                out.push(Violation::new(
                    ViolationKind::SocketBalance,
                    format!("position {u}: Σ_i T = {sockets}, N_u/∫λ = {expected}"),
                ));
            }
        }
        for v in 0..n + w - 1 {
            if self.check_degrees[v] != self.check_degrees[self.mirror_check(v)] {
                out.push(Violation::new(ViolationKind::Symmetry, format!("r_{v} not mirrored")));
            }
            let cap = Rational64::from_integer((self.mc * self.check_degrees[v]) as i64);
            if t.row_sum(v) > cap {
                out.push(Violation::new(
                    ViolationKind::BoundaryFeasibility,
                    format!("position {v}: Σ_j T = {} exceeds M_c·r_v = {cap}", t.row_sum(v)),
                ));
            }
        }
        if let Some(met) = &self.met {
            out.extend(self.validate_met(met));
        }
        out
    }

    fn validate_met(&self, met: &MetProfile) -> Vec<Violation> {
        let mut out = Vec::new();
        let w = self.width;
        for (v, s) in met.type_matrices.iter().enumerate() {
            for (k, row) in s.iter().enumerate() {
                if row.iter().sum::<usize>() != self.check_degrees[v] {
                    out.push(Violation::new(
                        ViolationKind::MetConsistency,
                        format!("S^{v} row {k} does not sum to r_v = {}", self.check_degrees[v]),
                    ));
                }
            }
            for t in 0..w {
                if t > v || v - t >= self.positions {
                    continue;
                }
                let col: usize = s.iter().map(|row| row[t]).sum();
                let expect = Rational64::new((self.mc * col) as i64, w as i64);
                if expect != self.connectivity.get(v, v - t) {
                    out.push(Violation::new(
                        ViolationKind::MetConsistency,
                        format!("(M_c/w)·Σ_k S^{v}[k][{t}] = {expect} ≠ T[{v}][{}]", v - t),
                    ));
                }
            }
        }
        out
    }
}

/// Category of a violated ensemble invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Distribution,
    Band,
    Symmetry,
    SocketBalance,
    BoundaryFeasibility,
    MetConsistency,
    Parameter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    pub(crate) fn new(kind: ViolationKind, detail: String) -> Self {
        Violation { kind, detail }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// Either kind of coupled ensemble handled by the toolkit.
#[derive(Clone, Debug, PartialEq)]
pub enum Ensemble {
    Ldpc(ScEnsemble),
    Ra(ScRaEnsemble),
}

impl Ensemble {
    pub fn validate(&self) -> Vec<Violation> {
        match self {
            Ensemble::Ldpc(e) => e.validate(),
            Ensemble::Ra(e) => e.validate(),
        }
    }

    pub fn positions(&self) -> usize {
        match self {
            Ensemble::Ldpc(e) => e.positions(),
            Ensemble::Ra(e) => e.positions(),
        }
    }

    pub fn lambdas(&self) -> &[DegreeDistribution] {
        match self {
            Ensemble::Ldpc(e) => e.lambdas(),
            Ensemble::Ra(e) => e.lambdas(),
        }
    }
}
