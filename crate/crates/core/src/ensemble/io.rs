//! Plain-text ensemble format.
//!
//! ```text
//! [params]
//! kind = sc-ldpc        # or sc-ra
//! l = 4
//! r = 8
//! L = 10
//! w = 3
//! M = 990
//! met = false
//!
//! [lambda]
//! 0 = 4:1               # position = degree:fraction ...
//!
//! [var_counts]
//! 0 = 990
//!
//! [check_degrees]
//! 8 8 8 ...
//!
//! [T]
//! 1320 0 0 ...          # one row per check position, rationals as a or a/b
//! ```
//!
//! SC-RA files carry `kind`, `q`, `L`, `M` and the `[lambda]` section only.
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Rational64;
use num_traits::Zero;
use sha2::{Digest, Sha256};

use super::{BaseParams, ConnectivityMatrix, DegreeDistribution, Ensemble, ScEnsemble, ScRaEnsemble};
use crate::error::{Error, Result};

pub fn to_text(e: &Ensemble) -> String {
    match e {
        Ensemble::Ldpc(e) => ldpc_to_text(e),
        Ensemble::Ra(e) => scra_to_text(e),
    }
}

fn write_lambdas(s: &mut String, lambdas: &[DegreeDistribution]) {
    s.push_str("\n[lambda]\n");
    for (u, lam) in lambdas.iter().enumerate() {
        let terms: Vec<String> = lam.terms().map(|(d, c)| format!("{d}:{c}")).collect();
        let _ = writeln!(s, "{u} = {}", terms.join(" "));
    }
}

fn ldpc_to_text(e: &ScEnsemble) -> String {
    let mut s = String::from("[params]\nkind = sc-ldpc\n");
    let _ = writeln!(s, "l = {}\nr = {}\nL = {}\nw = {}\nM = {}", e.l(), e.r(), e.positions(), e.width(), e.m());
    let _ = writeln!(s, "met = {}", e.met().is_some());
    write_lambdas(&mut s, e.lambdas());
    s.push_str("\n[var_counts]\n");
    for (u, n) in e.var_counts().iter().enumerate() {
        let _ = writeln!(s, "{u} = {n}");
    }
    s.push_str("\n[check_degrees]\n");
    let degs: Vec<String> = e.check_degrees().iter().map(|r| r.to_string()).collect();
    let _ = writeln!(s, "{}", degs.join(" "));
    s.push_str("\n[T]\n");
    let t = e.connectivity();
    for v in 0..t.rows() {
        let row: Vec<String> = (0..t.cols()).map(|u| t.get(v, u).to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

fn scra_to_text(e: &ScRaEnsemble) -> String {
    let mut s = String::from("[params]\nkind = sc-ra\n");
    let _ = writeln!(s, "q = {}\nL = {}\nM = {}", e.q(), e.positions(), e.m());
    write_lambdas(&mut s, e.lambdas());
    s
}

/// SHA-256 of the canonical text form, hex encoded.
pub fn ensemble_hash(e: &Ensemble) -> String {
    hex_digest(to_text(e).as_bytes())
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save(e: &Ensemble, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(e))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Ensemble> {
    parse(&std::fs::read_to_string(path)?)
}

struct Section {
    header_line: usize,
    lines: Vec<(usize, String)>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return perr(lineno, format!("duplicate section [{name}]"));
            }
            sections.insert(name.clone(), Section { header_line: lineno, lines: Vec::new() });
            current = Some(name);
            continue;
        }
        match &current {
            Some(name) => sections.get_mut(name).unwrap().lines.push((lineno, line.to_string())),
            None => return perr(lineno, "content before the first section"),
        }
    }
    Ok(sections)
}

fn key_values(sec: &Section) -> Result<Vec<(usize, String, String)>> {
    sec.lines
        .iter()
        .map(|(n, l)| match l.split_once('=') {
            Some((k, v)) => Ok((*n, k.trim().to_string(), v.trim().to_string())),
            None => perr(*n, "expected `key = value`"),
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().or_else(|_| perr(line, format!("cannot parse `{s}`")))
}

fn take_section<'a>(map: &'a BTreeMap<String, Section>, name: &str) -> Result<&'a Section> {
    map.get(name).ok_or(Error::Parse { line: 0, msg: format!("missing section [{name}]") })
}

struct Params {
    line: usize,
    values: BTreeMap<String, (usize, String)>,
}

impl Params {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        match self.values.get(key) {
            Some((n, v)) => parse_num(*n, v),
            None => perr(self.line, format!("missing parameter `{key}`")),
        }
    }
}

fn parse_lambdas(sec: &Section, positions: usize) -> Result<Vec<DegreeDistribution>> {
    let mut out: Vec<Option<DegreeDistribution>> = vec![None; positions];
    for (n, k, v) in key_values(sec)? {
        let u: usize = parse_num(n, &k)?;
        if u >= positions {
            return perr(n, format!("position {u} out of range"));
        }
        let mut pairs = Vec::new();
        for term in v.split_whitespace() {
            let Some((d, c)) = term.split_once(':') else {
                return perr(n, format!("expected degree:fraction, got `{term}`"));
            };
            pairs.push((parse_num::<usize>(n, d)?, parse_num::<f64>(n, c)?));
        }
        let lam = DegreeDistribution::new(pairs).map_err(|e| Error::Parse { line: n, msg: e.to_string() })?;
        out[u] = Some(lam);
    }
    out.into_iter()
        .enumerate()
        .map(|(u, l)| l.ok_or(Error::Parse { line: sec.header_line, msg: format!("no λ for position {u}") }))
        .collect()
}

fn parse_rational(line: usize, s: &str) -> Result<Rational64> {
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (parse_num(line, a)?, parse_num(line, b)?);
            if b == 0 {
                return perr(line, "zero denominator");
            }
            Ok(Rational64::new(a, b))
        }
        None => Ok(Rational64::from_integer(parse_num(line, s)?)),
    }
}

pub fn parse(text: &str) -> Result<Ensemble> {
    let sections = split_sections(text)?;
    let psec = take_section(&sections, "params")?;
    let mut values = BTreeMap::new();
    for (n, k, v) in key_values(psec)? {
        if values.insert(k.clone(), (n, v)).is_some() {
            return perr(n, format!("duplicate parameter `{k}`"));
        }
    }
    let params = Params { line: psec.header_line, values };
    let kind: String = params.get("kind")?;
    match kind.as_str() {
        "sc-ra" => {
            let (q, n, m) = (params.get("q")?, params.get("L")?, params.get("M")?);
            let lambdas = parse_lambdas(take_section(&sections, "lambda")?, n)?;
            Ok(Ensemble::Ra(ScRaEnsemble::new(q, n, m, lambdas)?))
        }
        "sc-ldpc" => parse_ldpc(&sections, &params).map(Ensemble::Ldpc),
        other => perr(params.line, format!("unknown ensemble kind `{other}`")),
    }
}

fn parse_ldpc(sections: &BTreeMap<String, Section>, params: &Params) -> Result<ScEnsemble> {
    let base = BaseParams {
        l: params.get("l")?,
        r: params.get("r")?,
        positions: params.get("L")?,
        width: params.get("w")?,
        m: params.get("M")?,
    };
    let met: bool = params.get("met")?;
    let (n, w) = (base.positions, base.width);
    if n == 0 || w == 0 {
        return perr(params.line, "L and w must be positive");
    }
    let lambdas = parse_lambdas(take_section(sections, "lambda")?, n)?;

    let vsec = take_section(sections, "var_counts")?;
    let mut counts: Vec<Option<f64>> = vec![None; n];
    for (ln, k, v) in key_values(vsec)? {
        let u: usize = parse_num(ln, &k)?;
        if u >= n {
            return perr(ln, format!("position {u} out of range"));
        }
        counts[u] = Some(parse_num(ln, &v)?);
    }
    let var_counts = counts
        .into_iter()
        .enumerate()
        .map(|(u, c)| c.ok_or(Error::Parse { line: vsec.header_line, msg: format!("no N for position {u}") }))
        .collect::<Result<Vec<_>>>()?;

    let csec = take_section(sections, "check_degrees")?;
    let mut check_degrees = Vec::new();
    for (ln, l) in &csec.lines {
        for tok in l.split_whitespace() {
            check_degrees.push(parse_num(*ln, tok)?);
        }
    }

    let tsec = take_section(sections, "T")?;
    if tsec.lines.len() != n + w - 1 {
        return perr(tsec.header_line, format!("[T] has {} rows, expected {}", tsec.lines.len(), n + w - 1));
    }
    let mut t = ConnectivityMatrix::zeros(n, w);
    for (v, (ln, l)) in tsec.lines.iter().enumerate() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != n {
            return perr(*ln, format!("row has {} entries, expected {n}", toks.len()));
        }
        for (u, tok) in toks.iter().enumerate() {
            let value = parse_rational(*ln, tok)?;
            if !t.in_band(v, u) && !value.is_zero() {
                return perr(*ln, format!("T[{v}][{u}] = {value} lies outside the band"));
            }
            t.set(v, u, value);
        }
    }
    let e = ScEnsemble::from_parts(base, lambdas, var_counts, check_degrees, t, None)?;
    if met {
        e.with_met()
    } else {
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_regular_and_irregular() {
        let mut e = ScEnsemble::regular(4, 8, 6, 3, 6).unwrap();
        let lam = DegreeDistribution::new([(3, 0.1 + 0.2), (10, 0.7)]).unwrap();
        e.set_lambda(1, lam.clone());
        e.set_lambda(4, lam);
        e.set_var_count(2, 5.123456789012345);
        e.connectivity_mut().set(1, 0, Rational64::new(25, 3));
        let text = to_text(&Ensemble::Ldpc(e.clone()));
        let back = parse(&text).unwrap();
        assert_eq!(back, Ensemble::Ldpc(e));
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn round_trip_met_and_scra() {
        let e = Ensemble::Ldpc(ScEnsemble::regular(4, 8, 10, 3, 990).unwrap().with_met().unwrap());
        assert_eq!(parse(&to_text(&e)).unwrap(), e);
        let ra = Ensemble::Ra(ScRaEnsemble::regular(5, 10, 20).unwrap());
        assert_eq!(parse(&to_text(&ra)).unwrap(), ra);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "[params]\nkind = sc-ra\nq = 5\nL = x\n";
        match parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("[params]\nkind = other\n").is_err());
        assert!(parse("kind = sc-ra\n").is_err());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = Ensemble::Ldpc(ScEnsemble::regular(4, 8, 10, 3, 990).unwrap());
        let b = Ensemble::Ldpc(ScEnsemble::regular(4, 8, 20, 3, 990).unwrap());
        assert_eq!(ensemble_hash(&a), ensemble_hash(&a.clone()));
        assert_ne!(ensemble_hash(&a), ensemble_hash(&b));
        assert_eq!(ensemble_hash(&a).len(), 64);
    }
}
