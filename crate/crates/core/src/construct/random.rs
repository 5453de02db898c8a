//! Socket layout and permutation wiring of coupled LDPC graphs.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{round_degrees, GraphKind, TannerGraph, VarKind};
use crate::ensemble::io::ensemble_hash;
use crate::ensemble::{Ensemble, ScEnsemble};
use crate::error::{Error, Result};

/// Nodes with their group quotas, before wiring. Group `t` of a variable at
/// `u` points to check position `u + t`; group `t` of a check at `v` to
/// variable position `v - t`.
pub(crate) struct Layout {
    pub graph: TannerGraph,
    pub var_groups: Vec<Vec<usize>>,
    pub check_caps: Vec<Vec<usize>>,
    /// `var_sockets[u][t]`: variable ids in permutation order.
    pub var_sockets: Vec<Vec<Vec<usize>>>,
    /// `check_sockets[v][t]`: check ids in socket order.
    pub check_sockets: Vec<Vec<Vec<usize>>>,
}

fn entry(e: &ScEnsemble, v: usize, u: usize) -> Result<usize> {
    let x = e.connectivity().get(v, u);
    if !x.is_integer() || x < 0.into() {
        return Err(Error::Construction(format!("T[{v}][{u}] = {x} is not a non-negative integer")));
    }
    Ok(x.to_integer() as usize)
}

/// Degrees of the variables at `u`.
pub(crate) fn position_degrees(e: &ScEnsemble, u: usize) -> Result<Vec<usize>> {
    let edges: usize = (u..u + e.width()).map(|v| entry(e, v, u)).sum::<Result<usize>>()?;
    let n = e.var_count(u);
    let nodes = ((n - n.round()).abs() < 1e-9).then_some(n.round() as usize);
    let counts = match nodes {
        Some(k) => round_degrees(e.lambda(u), edges, Some(k)).or_else(|_| {
            log::warn!("position {u}: no degree assignment with {k} nodes, node count left free");
            round_degrees(e.lambda(u), edges, None)
        })?,
        None => round_degrees(e.lambda(u), edges, None)?,
    };
    Ok(counts.into_iter().flat_map(|(d, k)| std::iter::repeat_n(d, k)).collect())
}

pub(crate) fn layout(e: &ScEnsemble, met: bool, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let (n, nc, w) = (e.positions(), e.check_positions(), e.width());
    let mut g = TannerGraph::empty(GraphKind::Ldpc, n, w);
    let mut var_groups = Vec::new();
    let mut var_sockets = Vec::with_capacity(n);
    for u in 0..n {
        let mut sockets = Vec::new();
        for d in position_degrees(e, u)? {
            let id = g.add_var(u, VarKind::Coupled);
            var_groups.push(vec![0; w]);
            sockets.extend(std::iter::repeat_n(id, d));
        }
        sockets.shuffle(rng);
        let mut groups = Vec::with_capacity(w);
        let mut start = 0;
        for t in 0..w {
            let size = entry(e, u + t, u)?;
            let part = sockets[start..start + size].to_vec();
            for &id in &part {
                var_groups[id][t] += 1;
            }
            groups.push(part);
            start += size;
        }
        var_sockets.push(groups);
    }

    let mc = e.mc();
    let mut check_caps = Vec::new();
    let mut check_sockets = Vec::with_capacity(nc);
    let met_profile = if met {
        let p = e.met().ok_or_else(|| Error::Parameter("ensemble carries no MET profile".into()))?;
        if !mc.is_multiple_of(w) {
            return Err(Error::Parameter(format!("w = {w} does not divide M_c = {mc}")));
        }
        Some(p)
    } else {
        None
    };
    for v in 0..nc {
        let r = e.check_degree(v);
        let first = g.num_checks();
        for _ in 0..mc {
            g.add_check(v, r);
            check_caps.push(vec![0; w]);
        }
        let sizes: Vec<usize> =
            (0..w).map(|t| if t <= v && v - t < n { entry(e, v, v - t) } else { Ok(0) }).collect::<Result<_>>()?;
        let filled: usize = sizes.iter().sum();
        if filled > mc * r {
            return Err(Error::Construction(format!("row {v} needs {filled} sockets, has {}", mc * r)));
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); w];
        match met_profile {
            Some(p) => {
                let s = &p.type_matrices[v];
                let per_type = mc / w;
                for i in 0..mc {
                    let row = &s[i / per_type];
                    for t in 0..w {
                        if sizes[t] > 0 {
                            groups[t].extend(std::iter::repeat_n(first + i, row[t]));
                        }
                    }
                }
                for t in 0..w {
                    if groups[t].len() != sizes[t] {
                        return Err(Error::Construction(format!(
                            "MET types give {} sockets for T[{v}][{}] = {}",
                            groups[t].len(),
                            v - t,
                            sizes[t]
                        )));
                    }
                    groups[t].shuffle(rng);
                }
            }
            None => {
                let mut sockets: Vec<usize> = (0..mc).flat_map(|i| std::iter::repeat_n(first + i, r)).collect();
                sockets.shuffle(rng);
                sockets.truncate(filled);
                let mut start = 0;
                for t in 0..w {
                    groups[t] = sockets[start..start + sizes[t]].to_vec();
                    start += sizes[t];
                }
            }
        }
        for (t, grp) in groups.iter().enumerate() {
            for &c in grp {
                check_caps[c][t] += 1;
            }
        }
        check_sockets.push(groups);
    }
    g.ensemble_hash = ensemble_hash(&Ensemble::Ldpc(e.clone()));
    Ok(Layout { graph: g, var_groups, check_caps, var_sockets, check_sockets })
}

/// Wires each group by matching its variable and check socket lists, then
/// removes parallel edges by swapping check endpoints inside a group.
fn wire(mut l: Layout, rng: &mut ChaCha8Rng) -> Result<TannerGraph> {
    let (n, w) = (l.graph.positions, l.graph.width);
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for u in 0..n {
        for t in 0..w {
            let vs = &l.var_sockets[u][t];
            let cs = &l.check_sockets[u + t][t];
            debug_assert_eq!(vs.len(), cs.len());
            let grp: Vec<(usize, usize)> = vs.iter().copied().zip(cs.iter().copied()).collect();
            for &e in &grp {
                *count.entry(e).or_insert(0) += 1;
            }
            groups.push(grp);
        }
    }
    for grp in groups.iter_mut() {
        let len = grp.len();
        for i in 0..len {
            if count[&grp[i]] < 2 {
                continue;
            }
            let (a, c) = grp[i];
            let offset = if len > 0 { rng.gen_range(0..len) } else { 0 };
            let mut fixed = false;
            for k in 0..len {
                let j = (offset + k) % len;
                let (b, d) = grp[j];
                if d == c || b == a {
                    continue;
                }
                if count.contains_key(&(a, d)) || count.contains_key(&(b, c)) {
                    continue;
                }
                for (key, add) in [((a, c), false), ((b, d), false), ((a, d), true), ((b, c), true)] {
                    if add {
                        *count.entry(key).or_insert(0) += 1;
                    } else {
                        let x = count.get_mut(&key).unwrap();
                        *x -= 1;
                        if *x == 0 {
                            count.remove(&key);
                        }
                    }
                }
                grp[i] = (a, d);
                grp[j] = (b, c);
                fixed = true;
                break;
            }
            if !fixed {
                return Err(Error::Construction(format!("cannot remove parallel edge between variable {a} and check {c}")));
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = groups.into_iter().flatten().collect();
    edges.sort_unstable();
    for (v, c) in edges {
        l.graph.connect(v, c);
    }
    Ok(l.graph)
}

/// Random permutation construction: per-position socket permutations split
/// into groups of sizes `T[u+t][u]`, boundary check sockets subsampled.
pub fn build_random(e: &ScEnsemble, seed: u64) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = layout(e, false, &mut rng)?;
    let mut g = wire(l, &mut rng)?;
    g.seed = seed;
    Ok(g)
}

/// Permutation construction with check degree types: `M_c/w` checks at `v`
/// take row `k` of `S^v`.
pub fn build_met(e: &ScEnsemble, seed: u64) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = layout(e, true, &mut rng)?;
    let mut g = wire(l, &mut rng)?;
    g.seed = seed;
    Ok(g)
}
