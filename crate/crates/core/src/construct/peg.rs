//! Progressive edge growth inside the group quotas of a layout.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::random::layout;
use super::scra::build_scra;
use super::TannerGraph;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PegParams {
    /// Cycles shorter than this are avoided when the quotas allow it.
    pub target_girth: usize,
    /// Depth of the expanded computation tree (SC-RA).
    pub expand_l: usize,
    /// Loop distance of the expansion (SC-RA).
    pub expand_d: usize,
}

impl Default for PegParams {
    fn default() -> Self {
        PegParams { target_girth: 8, expand_l: 1, expand_d: 8 }
    }
}

impl PegParams {
    /// Depth `l` of the conventional neighbourhood to avoid: `N^l` closes
    /// cycles of length at most `2l + 2`.
    pub fn depth(&self) -> usize {
        self.target_girth.saturating_sub(4) / 2
    }
}

/// Reusable marks for depth-limited searches.
pub(crate) struct Marks {
    check_depth: Vec<u32>,
    check_stamp: Vec<u32>,
    var_stamp: Vec<u32>,
    stamp: u32,
}

impl Marks {
    pub(crate) fn new(g: &TannerGraph) -> Self {
        Marks {
            check_depth: vec![0; g.num_checks()],
            check_stamp: vec![0; g.num_checks()],
            var_stamp: vec![0; g.num_vars()],
            stamp: 0,
        }
    }

    fn reset(&mut self) {
        self.stamp += 1;
    }

    fn depth(&self, c: usize) -> Option<u32> {
        (self.check_stamp[c] == self.stamp).then(|| self.check_depth[c])
    }

    /// Marks the checks of `N_x^limit` with their first depth.
    fn search(&mut self, g: &TannerGraph, x: usize, limit: usize) {
        self.reset();
        let s = self.stamp;
        self.var_stamp[x] = s;
        let mut frontier = Vec::new();
        for &c in &g.var_adj[x] {
            if self.check_stamp[c] != s {
                self.check_stamp[c] = s;
                self.check_depth[c] = 0;
                frontier.push(c);
            }
        }
        for d in 1..=limit as u32 {
            let mut next = Vec::new();
            for &c in &frontier {
                for &y in &g.check_adj[c] {
                    if self.var_stamp[y] == s {
                        continue;
                    }
                    self.var_stamp[y] = s;
                    for &c2 in &g.var_adj[y] {
                        if self.check_stamp[c2] != s {
                            self.check_stamp[c2] = s;
                            self.check_depth[c2] = d;
                            next.push(c2);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
}

/// Fills `best` with the preferred checks of `pool` for `x`: quota left,
/// not adjacent, not in `ban`; farthest in the computation tree, then the
/// lowest current degree.
#[allow(clippy::too_many_arguments)]
fn pick(
    g: &TannerGraph,
    pool: &[usize],
    caps: &[Vec<usize>],
    slot: usize,
    x: usize,
    ban: &[usize],
    banned: &mut [bool],
    marks: &Marks,
    best: &mut Vec<usize>,
) {
    for &c in ban {
        banned[c] = true;
    }
    best.clear();
    let mut best_key = (0u32, usize::MAX);
    for &c in pool {
        if caps[c][slot] == 0 || banned[c] || g.var_adj[x].contains(&c) {
            continue;
        }
        let reach = marks.depth(c).map_or(u32::MAX, |d| d);
        let key = (reach, g.check_adj[c].len());
        if best.is_empty() || key.0 > best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
            best.clear();
            best_key = key;
        }
        if key == best_key {
            best.push(c);
        }
    }
    for &c in ban {
        banned[c] = false;
    }
}

/// Places the edges of `order` one at a time. An edge of group `t` goes to
/// a check at the group's position with remaining quota, not yet adjacent,
/// outside `forbidden`; among those, the farthest in the computation tree,
/// then the lowest current degree, then uniformly at random. With `pooled`
/// every group of a check draws on the same quota `caps[c][0]`.
///
/// When no check qualifies, an edge of another variable is moved aside
/// (see [`repair`]); failing that, `forbidden` is dropped for this edge
/// with a warning. Parallel edges and quotas are never violated.
#[allow(clippy::too_many_arguments)]
pub(crate) fn grow(
    g: &mut TannerGraph,
    var_groups: &[Vec<usize>],
    caps: &mut [Vec<usize>],
    pooled: bool,
    order: &[usize],
    p: &PegParams,
    rng: &mut ChaCha8Rng,
    mut forbidden: impl FnMut(&TannerGraph, usize) -> Vec<usize>,
) -> Result<()> {
    let mut checks_at: Vec<Vec<usize>> = vec![Vec::new(); g.check_pos.iter().max().map_or(0, |m| m + 1)];
    for (c, &v) in g.check_pos.iter().enumerate() {
        checks_at[v].push(c);
    }
    let mut marks = Marks::new(g);
    let mut banned = vec![false; g.num_checks()];
    let depth = p.depth();
    let mut best = Vec::new();
    let mut relaxed = 0usize;
    for &x in order {
        let u = g.var_pos[x];
        for (t, &k) in var_groups[x].iter().enumerate() {
            let slot = if pooled { 0 } else { t };
            let pool = &checks_at[u + t];
            for _ in 0..k {
                let ban = forbidden(g, x);
                marks.search(g, x, depth);
                pick(g, pool, caps, slot, x, &ban, &mut banned, &marks, &mut best);
                if best.is_empty() {
                    if repair(g, caps, pool, x, slot, &ban, rng, &mut forbidden) {
                        continue;
                    }
                    if !ban.is_empty() {
                        pick(g, pool, caps, slot, x, &[], &mut banned, &marks, &mut best);
                        relaxed += 1;
                    }
                    if best.is_empty() {
                        return Err(Error::Construction(format!(
                            "no legal check at position {} for variable {x} (position {u})",
                            u + t
                        )));
                    }
                }
                let c = best[rng.gen_range(0..best.len())];
                g.connect(x, c);
                caps[c][slot] -= 1;
            }
        }
    }
    if relaxed > 0 {
        log::warn!("peg: {relaxed} edges placed inside the expanded neighbourhood, no check outside it was left");
    }
    for a in g.check_adj.iter_mut() {
        a.sort_unstable();
    }
    Ok(())
}

/// Fallback when every check with quota left is adjacent to `x` or
/// forbidden: some `y` at the same position gives up its edge to a check
/// `c2` legal for `x` and takes a free socket `c` instead.
#[allow(clippy::too_many_arguments)]
fn repair(
    g: &mut TannerGraph,
    caps: &mut [Vec<usize>],
    pool: &[usize],
    x: usize,
    t: usize,
    ban: &[usize],
    rng: &mut ChaCha8Rng,
    forbidden: &mut impl FnMut(&TannerGraph, usize) -> Vec<usize>,
) -> bool {
    let u = g.var_pos[x];
    let free: Vec<usize> = pool.iter().copied().filter(|&c| caps[c][t] > 0).collect();
    let mut moves = Vec::new();
    for &c2 in pool {
        if g.var_adj[x].contains(&c2) || ban.contains(&c2) {
            continue;
        }
        for &y in &g.check_adj[c2] {
            if y == x || g.var_pos[y] != u || g.var_kind[y] != g.var_kind[x] {
                continue;
            }
            for &c in &free {
                if !g.var_adj[y].contains(&c) {
                    moves.push((y, c2, c));
                }
            }
        }
    }
    moves.shuffle(rng);
    for (y, c2, c) in moves {
        if forbidden(g, y).contains(&c) {
            continue;
        }
        log::debug!("peg: variable {y} moved from check {c2} to {c} to make room for {x}");
        let i = g.var_adj[y].iter().position(|&k| k == c2).unwrap();
        g.var_adj[y][i] = c;
        let j = g.check_adj[c2].iter().position(|&k| k == y).unwrap();
        g.check_adj[c2][j] = x;
        g.check_adj[c].push(y);
        g.var_adj[x].push(c2);
        caps[c][t] -= 1;
        return true;
    }
    false
}

/// Variables in ascending degree order, ties by index.
pub(crate) fn degree_order(var_groups: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..var_groups.len()).collect();
    order.sort_by_key(|&x| (var_groups[x].iter().sum::<usize>(), x));
    order
}

/// PEG instance of a coupled ensemble. LDPC ensembles with a MET profile
/// take typed check sockets; SC-RA ensembles go through
/// [`build_scra`](super::build_scra).
pub fn build_peg(e: &Ensemble, p: &PegParams, seed: u64) -> Result<TannerGraph> {
    match e {
        Ensemble::Ra(r) => build_scra(r, seed, p),
        Ensemble::Ldpc(l) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lay = layout(l, l.met().is_some(), &mut rng)?;
            let mut g = lay.graph;
            let mut caps = lay.check_caps;
            if l.met().is_none() {
                // only the socket count of a check binds, not the random split
                // of its sockets into groups
                for (c, cap) in caps.iter_mut().enumerate() {
                    *cap = vec![g.check_nominal[c]; cap.len()];
                }
            }
            let order = degree_order(&lay.var_groups);
            grow(&mut g, &lay.var_groups, &mut caps, l.met().is_none(), &order, p, &mut rng, |_, _| Vec::new())?;
            g.seed = seed;
            Ok(g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::ScEnsemble;

    #[test]
    fn peg_regular_has_girth_six_and_quotas() {
        let e = ScEnsemble::regular(4, 8, 10, 3, 990).unwrap();
        let g = build_peg(&Ensemble::Ldpc(e.clone()), &PegParams::default(), 5).unwrap();
        assert!(g.lint().is_empty());
        assert_eq!(g.girth_up_to(4), None);
        for u in 0..10 {
            for t in 0..3 {
                let n = g.edges().filter(|&(v, c)| g.var_pos[v] == u && g.check_pos[c] == u + t).count();
                assert_eq!(n as i64, e.connectivity().get(u + t, u).to_integer());
            }
        }
        assert_eq!(build_peg(&Ensemble::Ldpc(e), &PegParams::default(), 5).unwrap(), g);
    }
}
