//! Finite-length Tanner graphs drawn from coupled ensembles.

mod io;
mod peg;
mod random;
mod scra;

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::ensemble::DegreeDistribution;
use crate::error::{Error, Result};

pub use io::{from_text, load, save, to_alist, to_text};
pub use peg::{build_peg, PegParams};
pub use random::{build_met, build_random};
pub use scra::{build_scra, expanded_neighborhood};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Ldpc,
    Ra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Variable at a coupled position, connected to `w` check positions.
    Coupled,
    /// Degree-2 accumulator variable on the loop of its check position.
    Accumulator,
}

/// Bipartite graph with position labels. Adjacency lists keep insertion
/// order, which fixes the serialized form.
#[derive(Clone, Debug, PartialEq)]
pub struct TannerGraph {
    pub kind: GraphKind,
    pub positions: usize,
    pub width: usize,
    pub var_pos: Vec<usize>,
    pub var_kind: Vec<VarKind>,
    pub check_pos: Vec<usize>,
    /// Socket count `r_v` of each check (boundary checks may have fewer
    /// edges).
    pub check_nominal: Vec<usize>,
    /// Checks per accumulator loop (SC-RA). Check `v * loop_len + j` is the
    /// `j`-th check on the loop of position `v`.
    pub loop_len: Option<usize>,
    pub var_adj: Vec<Vec<usize>>,
    pub check_adj: Vec<Vec<usize>>,
    pub ensemble_hash: String,
    pub seed: u64,
}

impl TannerGraph {
    pub(crate) fn empty(kind: GraphKind, positions: usize, width: usize) -> Self {
        TannerGraph {
            kind,
            positions,
            width,
            var_pos: Vec::new(),
            var_kind: Vec::new(),
            check_pos: Vec::new(),
            check_nominal: Vec::new(),
            loop_len: None,
            var_adj: Vec::new(),
            check_adj: Vec::new(),
            ensemble_hash: String::new(),
            seed: 0,
        }
    }

    pub(crate) fn add_var(&mut self, pos: usize, kind: VarKind) -> usize {
        self.var_pos.push(pos);
        self.var_kind.push(kind);
        self.var_adj.push(Vec::new());
        self.var_pos.len() - 1
    }

    pub(crate) fn add_check(&mut self, pos: usize, nominal: usize) -> usize {
        self.check_pos.push(pos);
        self.check_nominal.push(nominal);
        self.check_adj.push(Vec::new());
        self.check_pos.len() - 1
    }

    pub(crate) fn connect(&mut self, v: usize, c: usize) {
        self.var_adj[v].push(c);
        self.check_adj[c].push(v);
    }

    pub fn num_vars(&self) -> usize {
        self.var_adj.len()
    }

    pub fn num_checks(&self) -> usize {
        self.check_adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.var_adj.iter().map(Vec::len).sum()
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_adj[v].len()
    }

    /// Edges in variable order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.var_adj.iter().enumerate().flat_map(|(v, adj)| adj.iter().map(move |&c| (v, c)))
    }

    /// Loop index of check `c` (SC-RA).
    pub fn loop_index(&self, c: usize) -> Option<usize> {
        self.loop_len.map(|h| c % h)
    }

    /// Edge-perspective degree fractions of the coupled variables at `u`.
    pub fn edge_fractions(&self, u: usize) -> BTreeMap<usize, f64> {
        let mut counts = BTreeMap::new();
        let mut total = 0usize;
        for v in 0..self.num_vars() {
            if self.var_pos[v] == u && self.var_kind[v] == VarKind::Coupled {
                let d = self.var_degree(v);
                *counts.entry(d).or_insert(0usize) += d;
                total += d;
            }
        }
        counts.into_iter().map(|(d, e)| (d, e as f64 / total as f64)).collect()
    }

    /// Structural problems: position legality, socket overuse, parallel
    /// edges, adjacency mismatch and (SC-RA) repeated check positions of a
    /// variable of degree at most `q`.
    pub fn lint(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in 0..self.num_vars() {
            let pos = self.var_pos[v];
            let mut seen = HashSet::new();
            for &c in &self.var_adj[v] {
                if c >= self.num_checks() {
                    out.push(format!("variable {v}: check {c} out of range"));
                    continue;
                }
                if !seen.insert(c) {
                    out.push(format!("variable {v}: parallel edge to check {c}"));
                }
                let cp = self.check_pos[c];
                let legal = match self.var_kind[v] {
                    VarKind::Coupled => cp >= pos && cp < pos + self.width,
                    VarKind::Accumulator => cp == pos,
                };
                if !legal {
                    out.push(format!("variable {v} at position {pos}: edge to check position {cp}"));
                }
                if self.check_adj[c].iter().filter(|&&x| x == v).count() != self.var_adj[v].iter().filter(|&&x| x == c).count() {
                    out.push(format!("edge ({v}, {c}) missing from check adjacency"));
                }
            }
            if self.kind == GraphKind::Ra && self.var_kind[v] == VarKind::Coupled && self.var_degree(v) <= self.width {
                let mut ps: Vec<usize> = self.var_adj[v].iter().map(|&c| self.check_pos[c]).collect();
                ps.sort_unstable();
                if ps.windows(2).any(|w| w[0] == w[1]) {
                    out.push(format!("variable {v}: two edges at one check position"));
                }
            }
            if self.var_kind[v] == VarKind::Accumulator && self.var_degree(v) != 2 {
                out.push(format!("accumulator {v} has degree {}", self.var_degree(v)));
            }
        }
        for c in 0..self.num_checks() {
            if self.check_adj[c].len() > self.check_nominal[c] {
                out.push(format!("check {c}: {} edges on {} sockets", self.check_adj[c].len(), self.check_nominal[c]));
            }
        }
        let edges_c: usize = self.check_adj.iter().map(Vec::len).sum();
        if edges_c != self.num_edges() {
            out.push(format!("edge counts differ: {} vs {edges_c}", self.num_edges()));
        }
        out
    }

    /// Length of the shortest cycle if it is at most `limit`.
    pub fn girth_up_to(&self, limit: usize) -> Option<usize> {
        let nv = self.num_vars();
        let node_count = nv + self.num_checks();
        let neighbors = |x: usize| -> &[usize] {
            if x < nv {
                &self.var_adj[x]
            } else {
                &self.check_adj[x - nv]
            }
        };
        let to_node = |x: usize, y: usize| if x < nv { y + nv } else { y };
        let mut best = usize::MAX;
        let mut dist = vec![u32::MAX; node_count];
        let mut parent = vec![usize::MAX; node_count];
        let mut touched = Vec::new();
        for root in 0..nv {
            if self.var_adj[root].len() != self.var_adj[root].iter().collect::<HashSet<_>>().len() {
                return Some(2);
            }
            for &t in &touched {
                dist[t] = u32::MAX;
            }
            touched.clear();
            dist[root] = 0;
            parent[root] = usize::MAX;
            touched.push(root);
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                let dx = dist[x] as usize;
                if 2 * dx + 1 >= best.min(limit + 1) {
                    break;
                }
                for &y in neighbors(x) {
                    let yn = to_node(x, y);
                    if parent[x] == yn {
                        continue;
                    }
                    if dist[yn] == u32::MAX {
                        dist[yn] = dist[x] + 1;
                        parent[yn] = x;
                        touched.push(yn);
                        queue.push_back(yn);
                    } else {
                        best = best.min(dx + dist[yn] as usize + 1);
                    }
                }
            }
        }
        (best <= limit).then_some(best)
    }
}

/// Integral degree counts for `edges` sockets approximating `λ`:
/// `n_d ≈ λ_d · edges / d` with `Σ d n_d = edges` exactly and, if given,
/// `Σ n_d = nodes`. Minimizes `Σ |n_d - λ_d edges / d|` over counts within
/// a window around the targets (three nodes, widened up to the largest
/// degree when divisibility leaves no solution); ties go to the first
/// solution found in ascending degree order.
pub fn round_degrees(lambda: &DegreeDistribution, edges: usize, nodes: Option<usize>) -> Result<Vec<(usize, usize)>> {
    let terms: Vec<(usize, f64)> = lambda.terms().map(|(d, c)| (d, c * edges as f64 / d as f64)).collect();
    let mut span = 3;
    loop {
        if let Some(r) = round_within(&terms, edges, nodes, span) {
            return Ok(r);
        }
        if span > lambda.max_degree() {
            return Err(Error::Construction(format!(
                "no integral degree assignment of {edges} sockets{} for λ = {lambda}",
                nodes.map_or(String::new(), |n| format!(" over {n} nodes"))
            )));
        }
        span = (2 * span).min(lambda.max_degree() + 1);
    }
}

fn round_within(terms: &[(usize, f64)], edges: usize, nodes: Option<usize>, span: usize) -> Option<Vec<(usize, usize)>> {
    // layer k: (edge sum, node sum) -> (cost, previous state, count)
    type Layer = BTreeMap<(usize, usize), (f64, (usize, usize), usize)>;
    let mut layers: Vec<Layer> = vec![BTreeMap::from([((0, 0), (0.0, (0, 0), 0))])];
    for &(d, t) in terms {
        let lo = (t.floor() as i64 - span as i64).max(0) as usize;
        let hi = t.ceil() as usize + span;
        let mut next: Layer = BTreeMap::new();
        for (&(e, n), &(cost, _, _)) in layers.last().unwrap() {
            for k in lo..=hi {
                let ne = e + d * k;
                if ne > edges {
                    break;
                }
                let c = cost + (k as f64 - t).abs();
                let key = (ne, n + k);
                if next.get(&key).is_none_or(|(bc, _, _)| c < *bc - 1e-12) {
                    next.insert(key, (c, (e, n), k));
                }
            }
        }
        layers.push(next);
    }
    let (&end, _) = layers
        .last()
        .unwrap()
        .iter()
        .filter(|((e, n), _)| *e == edges && nodes.is_none_or(|x| x == *n))
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())?;
    let mut counts = vec![0; terms.len()];
    let mut key = end;
    for i in (0..terms.len()).rev() {
        let (_, prev, k) = layers[i + 1][&key];
        counts[i] = k;
        key = prev;
    }
    Some(terms.iter().zip(counts).map(|(&(d, _), k)| (d, k)).filter(|p| p.1 > 0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_hits_totals() {
        let lam = DegreeDistribution::new([(3, 0.3), (4, 0.5), (9, 0.2)]).unwrap();
        let r = round_degrees(&lam, 3960, None).unwrap();
        assert_eq!(r.iter().map(|(d, k)| d * k).sum::<usize>(), 3960);
        for (d, k) in &r {
            let t = lam.coefficient(*d) * 3960.0 / *d as f64;
            assert!((*k as f64 - t).abs() < 1.0, "{d}: {k} vs {t}");
        }
        let lam = DegreeDistribution::new([(3, 0.4), (9, 0.6)]).unwrap();
        let avg = lam.average_degree();
        assert!((avg - 5.0).abs() < 1e-12);
        let r = round_degrees(&lam, 510, Some(102)).unwrap();
        assert_eq!(r.iter().map(|(_, k)| k).sum::<usize>(), 102);
        assert_eq!(r.iter().map(|(d, k)| d * k).sum::<usize>(), 510);
        let lam = DegreeDistribution::new([(3, 0.6429), (10, 0.3571)]).unwrap();
        assert!(round_degrees(&lam, 792, Some(198)).is_err());
        let r = round_degrees(&lam, 792, None).unwrap();
        assert_eq!(r.iter().map(|(d, k)| d * k).sum::<usize>(), 792);
        // 7 sockets cannot be split into degree-4 nodes
        assert!(round_degrees(&DegreeDistribution::regular(4).unwrap(), 7, None).is_err());
    }

    #[test]
    fn girth_of_small_cycles() {
        let mut g = TannerGraph::empty(GraphKind::Ldpc, 1, 1);
        for _ in 0..3 {
            g.add_var(0, VarKind::Coupled);
            g.add_check(0, 3);
        }
        // 6-cycle v0 c0 v1 c1 v2 c2
        for (v, c) in [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2)] {
            g.connect(v, c);
        }
        assert_eq!(g.girth_up_to(20), Some(6));
        assert_eq!(g.girth_up_to(4), None);
        g.connect(0, 1);
        assert_eq!(g.girth_up_to(20), Some(4));
        g.connect(2, 2);
        assert_eq!(g.girth_up_to(20), Some(2));
    }
}
