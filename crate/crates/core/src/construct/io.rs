//! Text and alist forms of Tanner graphs.
//!
//! ```text
//! scforge-graph 1
//! kind ldpc
//! positions 10
//! width 3
//! vars 9900
//! checks 4950
//! edges 39600
//! seed 1
//! ensemble 3f1c...
//! loop -
//! [vars]
//! 0 c
//! ...
//! [checks]
//! 0 8
//! ...
//! [edges]
//! (0, 17)
//! ```
//!
//! Variable lines are `position kind` (`c` coupled, `a` accumulator), check
//! lines `position sockets`. Edges are listed in variable order; check
//! adjacency is rebuilt in ascending variable order.

use std::fmt::Write as _;
use std::path::Path;

use super::{GraphKind, TannerGraph, VarKind};
use crate::error::{Error, Result};

pub fn to_text(g: &TannerGraph) -> String {
    let mut s = String::new();
    let kind = match g.kind {
        GraphKind::Ldpc => "ldpc",
        GraphKind::Ra => "ra",
    };
    writeln!(s, "scforge-graph 1").unwrap();
    writeln!(s, "kind {kind}").unwrap();
    writeln!(s, "positions {}", g.positions).unwrap();
    writeln!(s, "width {}", g.width).unwrap();
    writeln!(s, "vars {}", g.num_vars()).unwrap();
    writeln!(s, "checks {}", g.num_checks()).unwrap();
    writeln!(s, "edges {}", g.num_edges()).unwrap();
    writeln!(s, "seed {}", g.seed).unwrap();
    writeln!(s, "ensemble {}", if g.ensemble_hash.is_empty() { "-" } else { &g.ensemble_hash }).unwrap();
    writeln!(s, "loop {}", g.loop_len.map_or("-".to_string(), |h| h.to_string())).unwrap();
    writeln!(s, "[vars]").unwrap();
    for v in 0..g.num_vars() {
        let k = match g.var_kind[v] {
            VarKind::Coupled => 'c',
            VarKind::Accumulator => 'a',
        };
        writeln!(s, "{} {k}", g.var_pos[v]).unwrap();
    }
    writeln!(s, "[checks]").unwrap();
    for c in 0..g.num_checks() {
        writeln!(s, "{} {}", g.check_pos[c], g.check_nominal[c]).unwrap();
    }
    writeln!(s, "[edges]").unwrap();
    for (v, c) in g.edges() {
        writeln!(s, "({v}, {c})").unwrap();
    }
    s
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.trim().parse().or_else(|_| perr(line, format!("bad number {s:?}")))
}

pub fn from_text(text: &str) -> Result<TannerGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let mut next = |want: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => {
                let rest = l.strip_prefix(want).ok_or(Error::Parse { line: i, msg: format!("expected {want:?}") })?;
                Ok((i, rest.trim().to_string()))
            }
            None => perr(0, format!("unexpected end of file, expected {want:?}")),
        }
    };
    let (i, v) = next("scforge-graph")?;
    if v != "1" {
        return perr(i, format!("unsupported graph format version {v}"));
    }
    let (i, k) = next("kind")?;
    let kind = match k.as_str() {
        "ldpc" => GraphKind::Ldpc,
        "ra" => GraphKind::Ra,
        _ => return perr(i, format!("unknown graph kind {k:?}")),
    };
    let (i, x) = next("positions")?;
    let positions = num(i, &x)?;
    let (i, x) = next("width")?;
    let width = num(i, &x)?;
    let (i, x) = next("vars")?;
    let nv: usize = num(i, &x)?;
    let (i, x) = next("checks")?;
    let nc: usize = num(i, &x)?;
    let (i, x) = next("edges")?;
    let ne: usize = num(i, &x)?;
    let (i, x) = next("seed")?;
    let seed = num(i, &x)?;
    let (_, hash) = next("ensemble")?;
    let (i, x) = next("loop")?;
    let loop_len = if x == "-" { None } else { Some(num(i, &x)?) };
    let mut g = TannerGraph::empty(kind, positions, width);
    g.seed = seed;
    g.ensemble_hash = if hash == "-" { String::new() } else { hash };
    g.loop_len = loop_len;
    next("[vars]")?;
    for _ in 0..nv {
        let (i, l) = next("")?;
        let mut it = l.split_whitespace();
        let pos = num(i, it.next().unwrap_or(""))?;
        let vk = match it.next() {
            Some("c") => VarKind::Coupled,
            Some("a") => VarKind::Accumulator,
            _ => return perr(i, "variable kind must be c or a"),
        };
        g.add_var(pos, vk);
    }
    next("[checks]")?;
    for _ in 0..nc {
        let (i, l) = next("")?;
        let (p, r) = l.split_once(' ').ok_or(Error::Parse { line: i, msg: "expected `position sockets`".into() })?;
        g.add_check(num(i, p)?, num(i, r)?);
    }
    next("[edges]")?;
    for _ in 0..ne {
        let (i, l) = next("")?;
        let inner = l.strip_prefix('(').and_then(|x| x.strip_suffix(')'));
        let Some((a, b)) = inner.and_then(|x| x.split_once(',')) else {
            return perr(i, format!("expected `(var, check)`, got {l:?}"));
        };
        let (v, c): (usize, usize) = (num(i, a)?, num(i, b)?);
        if v >= nv || c >= nc {
            return perr(i, format!("edge ({v}, {c}) out of range"));
        }
        g.connect(v, c);
    }
    if let Some((i, l)) = lines.next() {
        return perr(i, format!("trailing content {l:?}"));
    }
    for a in g.check_adj.iter_mut() {
        a.sort_unstable();
    }
    Ok(g)
}

/// MacKay alist: sizes, maximum degrees, degree lists, then 1-based
/// neighbour lists of variables and checks, zero padded.
pub fn to_alist(g: &TannerGraph) -> String {
    let (nv, nc) = (g.num_vars(), g.num_checks());
    let dv = g.var_adj.iter().map(Vec::len).max().unwrap_or(0);
    let dc = g.check_adj.iter().map(Vec::len).max().unwrap_or(0);
    let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = format!("{nv} {nc}\n{dv} {dc}\n");
    s += &join(&mut g.var_adj.iter().map(Vec::len));
    s.push('\n');
    s += &join(&mut g.check_adj.iter().map(Vec::len));
    s.push('\n');
    for (adj, width) in g.var_adj.iter().map(|a| (a, dv)).chain(g.check_adj.iter().map(|a| (a, dc))) {
        let mut row: Vec<usize> = adj.iter().map(|&x| x + 1).collect();
        row.resize(width, 0);
        s += &join(&mut row.into_iter());
        s.push('\n');
    }
    s
}

/// Writes `path` in text form and `path.alist` next to it.
pub fn save(g: &TannerGraph, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(g))?;
    let mut alist = path.as_os_str().to_owned();
    alist.push(".alist");
    std::fs::write(alist, to_alist(g))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TannerGraph> {
    from_text(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_random, build_scra, PegParams};
    use crate::ensemble::{ScEnsemble, ScRaEnsemble};

    #[test]
    fn text_round_trip() {
        let g = build_random(&ScEnsemble::regular(3, 6, 5, 3, 12).unwrap(), 4).unwrap();
        let t = to_text(&g);
        let back = from_text(&t).unwrap();
        assert_eq!(back, g);
        assert_eq!(to_text(&back), t);

        let g = build_scra(&ScRaEnsemble::regular(3, 4, 8).unwrap(), 0, &PegParams::default()).unwrap();
        assert_eq!(from_text(&to_text(&g)).unwrap(), g);
    }

    #[test]
    fn alist_layout() {
        let mut g = TannerGraph::empty(GraphKind::Ldpc, 1, 1);
        for _ in 0..3 {
            g.add_var(0, VarKind::Coupled);
        }
        for _ in 0..2 {
            g.add_check(0, 3);
        }
        for (v, c) in [(0, 0), (1, 0), (1, 1), (2, 1)] {
            g.connect(v, c);
        }
        assert_eq!(to_alist(&g), "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(from_text("scforge-graph 2\n"), Err(Error::Parse { line: 1, .. })));
        let g = build_random(&ScEnsemble::regular(3, 6, 5, 3, 12).unwrap(), 4).unwrap();
        let t = to_text(&g).replace("(0, ", "(x, ");
        assert!(from_text(&t).is_err());
    }
}
