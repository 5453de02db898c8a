//! SC-RA instances: typed upper variables, closed accumulator loops and
//! PEG with an expanded-neighbourhood constraint.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::peg::{degree_order, grow, PegParams};
use super::{round_degrees, GraphKind, TannerGraph, VarKind};
use crate::ensemble::io::ensemble_hash;
use crate::ensemble::{balanced_split, circulant, Ensemble, ScRaEnsemble};
use crate::error::{Error, Result};

/// Picks a row of `S^{u,i}` for every variable so that each of the `q`
/// target positions receives exactly `h` edges.
fn assign_types(degrees: &[usize], q: usize, h: usize) -> Result<Vec<Vec<usize>>> {
    let rows: Vec<Vec<Vec<usize>>> = degrees.iter().map(|&d| circulant(&balanced_split(d, q))).collect();
    let mut rem = vec![h as i64; q];
    let mut pick = vec![0usize; degrees.len()];
    let mut order: Vec<usize> = (0..degrees.len()).collect();
    order.sort_by_key(|&x| (std::cmp::Reverse(degrees[x]), x));
    for &x in &order {
        let score = |k: usize| {
            let row = &rows[x][k];
            let over: i64 = (0..q).map(|t| (row[t] as i64 - rem[t]).max(0)).sum();
            let fit: i64 = (0..q).map(|t| rem[t] * row[t] as i64).sum();
            (over, -fit, k)
        };
        let k = (0..q).min_by_key(|&k| score(k)).unwrap();
        pick[x] = k;
        for t in 0..q {
            rem[t] -= rows[x][k][t] as i64;
        }
    }
    // local repair: single row changes that lower Σ|rem|
    loop {
        let imbalance: i64 = rem.iter().map(|r| r.abs()).sum();
        if imbalance == 0 {
            break;
        }
        let mut best: Option<(i64, usize, usize)> = None;
        for x in 0..degrees.len() {
            for k in 0..q {
                if k == pick[x] {
                    continue;
                }
                let after: i64 = (0..q).map(|t| (rem[t] + rows[x][pick[x]][t] as i64 - rows[x][k][t] as i64).abs()).sum();
                if after < imbalance && best.is_none_or(|b| after < b.0) {
                    best = Some((after, x, k));
                }
            }
        }
        let Some((_, x, k)) = best else {
            return Err(Error::Construction(format!("no type assignment balances the position quotas: {rem:?}")));
        };
        for t in 0..q {
            rem[t] += rows[x][pick[x]][t] as i64 - rows[x][k][t] as i64;
        }
        pick[x] = k;
    }
    Ok((0..degrees.len()).map(|x| rows[x][pick[x]].clone()).collect())
}

/// Checks on the loop of `c`'s position whose loop distance to `c` (checks
/// counted inclusively) is at most `d`.
fn loop_ball(g: &TannerGraph, c: usize, d: usize) -> impl Iterator<Item = usize> {
    let h = g.loop_len.unwrap_or(1);
    let base = c - c % h;
    let j = c % h;
    let hops = d.saturating_sub(1).min(h / 2);
    let mut out: BTreeSet<usize> = BTreeSet::new();
    for k in 0..=hops {
        out.insert(base + (j + k) % h);
        out.insert(base + (j + h - k % h) % h);
    }
    out.into_iter()
}

/// `N_v^{l,d}`: checks of the computation tree of depth `l` from `v` that
/// only passes through variables of degree below `q`, each reached check
/// widened to its loop neighbours within distance `d`.
pub fn expanded_neighborhood(g: &TannerGraph, v: usize, l: usize, d: usize) -> BTreeSet<usize> {
    let q = g.width;
    let mut seen_vars = BTreeSet::from([v]);
    let mut out = BTreeSet::new();
    let mut frontier = Vec::new();
    for &c in &g.var_adj[v] {
        for x in loop_ball(g, c, d) {
            if out.insert(x) {
                frontier.push(x);
            }
        }
    }
    for _ in 0..l {
        let mut next = Vec::new();
        for &c in &frontier {
            for &y in &g.check_adj[c] {
                if g.var_degree(y) >= q || !seen_vars.insert(y) {
                    continue;
                }
                for &c2 in &g.var_adj[y] {
                    for x in loop_ball(g, c2, d) {
                        if out.insert(x) {
                            next.push(x);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

/// `M/2` typed upper variables per position (or as close as the degrees
/// allow while keeping `q M/2` edges), `M/2` checks and accumulators
/// per check position on a closed loop, upper edges placed by PEG. Edges of
/// an upper variable of degree below `q` also avoid `N_v^{l,d}`.
pub fn build_scra(e: &ScRaEnsemble, seed: u64, p: &PegParams) -> Result<TannerGraph> {
    let (n, q, h) = (e.positions(), e.q(), e.half());
    if h < 2 {
        return Err(Error::Parameter(format!("accumulator loops need M/2 ≥ 2, got {h}")));
    }
    let nc = e.check_positions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = TannerGraph::empty(GraphKind::Ra, n, q);
    let mut var_groups = Vec::new();
    for u in 0..n {
        let counts = round_degrees(e.lambda(u), h * q, Some(h)).or_else(|_| {
            log::warn!("position {u}: no degree assignment with {h} upper nodes, node count left free");
            round_degrees(e.lambda(u), h * q, None)
        })?;
        let degrees: Vec<usize> = counts.into_iter().flat_map(|(d, k)| std::iter::repeat_n(d, k)).collect();
        for row in assign_types(&degrees, q, h)? {
            g.add_var(u, VarKind::Coupled);
            var_groups.push(row);
        }
    }
    let mut caps = Vec::new();
    for v in 0..nc {
        for _ in 0..h {
            g.add_check(v, q + 2);
            caps.push((0..q).map(|t| usize::from(t <= v && v - t < n)).collect::<Vec<_>>());
        }
    }
    g.loop_len = Some(h);
    for v in 0..nc {
        for j in 0..h {
            let a = g.add_var(v, VarKind::Accumulator);
            g.connect(a, v * h + j);
            g.connect(a, v * h + (j + 1) % h);
        }
    }
    let order = degree_order(&var_groups);
    let (l, d) = (p.expand_l, p.expand_d);
    grow(&mut g, &var_groups, &mut caps, false, &order, p, &mut rng, |g, x| {
        if var_groups[x].iter().sum::<usize>() < q {
            expanded_neighborhood(g, x, l, d).into_iter().collect()
        } else {
            Vec::new()
        }
    })?;
    g.ensemble_hash = ensemble_hash(&Ensemble::Ra(e.clone()));
    g.seed = seed;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::DegreeDistribution;

    #[test]
    fn toy_and_code_length() {
        let e = ScRaEnsemble::regular(3, 2, 4).unwrap();
        let g = build_scra(&e, 0, &PegParams { target_girth: 4, expand_l: 0, expand_d: 0 }).unwrap();
        let upper = g.var_kind.iter().filter(|k| **k == VarKind::Coupled).count();
        assert_eq!(upper, 4);
        assert!(g.var_adj[..4].iter().all(|a| a.len() == 3));
        assert_eq!(g.num_vars() - upper, 8);
        assert!(g.lint().is_empty(), "{:?}", g.lint());

        let e = ScRaEnsemble::regular(5, 20, 900).unwrap();
        let g = build_scra(&e, 1, &PegParams::default()).unwrap();
        assert_eq!(g.num_vars(), 19800);
        assert!(g.lint().is_empty());
    }

    #[test]
    fn types_balance_positions() {
        let degrees = [3, 3, 3, 9, 9, 3, 3, 3, 5, 9];
        let rows = assign_types(&degrees, 5, 10).unwrap();
        for t in 0..5 {
            assert_eq!(rows.iter().map(|r| r[t]).sum::<usize>(), 10);
        }
        for (r, d) in rows.iter().zip(degrees) {
            assert_eq!(r.iter().sum::<usize>(), d);
            if d <= 5 {
                assert!(r.iter().all(|&x| x <= 1));
            }
        }
    }

    #[test]
    fn zero_expansion_is_low_degree_tree() {
        let lam = DegreeDistribution::new([(3, 0.36), (8, 0.64)]).unwrap();
        let q = 5;
        let e = ScRaEnsemble::new(q, 6, 200, vec![lam; 6]).unwrap();
        let g = build_scra(&e, 2, &PegParams { target_girth: 6, expand_l: 1, expand_d: 3 }).unwrap();
        assert!(g.lint().is_empty(), "{:?}", g.lint());
        for v in 0..600 {
            if g.var_kind[v] != VarKind::Coupled {
                continue;
            }
            let got = expanded_neighborhood(&g, v, 1, 0);
            let mut want = BTreeSet::new();
            for &c in &g.var_adj[v] {
                want.insert(c);
                for &y in &g.check_adj[c] {
                    if y != v && g.var_degree(y) < q {
                        want.extend(g.var_adj[y].iter().copied());
                    }
                }
            }
            assert_eq!(got, want);
        }
    }
}
