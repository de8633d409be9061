//! Line-oriented text formats: behavior tables, finite structures, function
//! tables, obstruction certificates, and structure spec files. Blank lines
//! and `#` comments are ignored everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::behavior::{coherence_check, BehaviorTable, Coherence};
use crate::error::{Error, Result};
use crate::fraisse::rational::parse_rat;
use crate::fraisse::{AgeOracle, Element, FiniteStructure, LimitStructure, Signature};
use crate::group::{split_top, GroupPresentation, Point};
use crate::symbolic::{ObstructionCertificate, Probe};

fn err(line: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        line,
        reason: reason.into(),
    }
}

/// Numbered lines with comments and surrounding blanks removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn header<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix(key)?.strip_prefix(':').map(str::trim)
}

/// Serializes a behavior table with `source:`, `target:` and `arity:` headers.
pub fn persist_behavior(table: &BehaviorTable) -> String {
    format!(
        "source: {}\ntarget: {}\narity: {}\n{}",
        table.source(),
        table.target(),
        table.max_arity(),
        table
    )
}

/// Reads a behavior table. `resolve` maps structure names in the group
/// strings to limits. Duplicate entries, inadmissible labels and coherence
/// violations are rejected.
pub fn load_behavior(text: &str, resolve: &dyn Fn(&str) -> Option<Arc<LimitStructure>>) -> Result<BehaviorTable> {
    let mut lines = content_lines(text);
    let mut next_header = |key: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, l)) => header(l, key)
                .map(|v| (n, v.to_string()))
                .ok_or_else(|| err(n, format!("expected `{key}:`"))),
            None => Err(err(0, format!("missing `{key}:` header"))),
        }
    };
    let (n, source) = next_header("source")?;
    let source = GroupPresentation::parse(&source, resolve).map_err(|e| err(n, e.to_string()))?;
    let (n, target) = next_header("target")?;
    let target = GroupPresentation::parse(&target, resolve).map_err(|e| err(n, e.to_string()))?;
    let (n, arity) = next_header("arity")?;
    let arity: usize = arity.parse().map_err(|_| err(n, format!("bad arity {arity:?}")))?;
    if arity == 0 {
        return Err(err(n, "arity must be positive"));
    }
    let mut table = BehaviorTable::new(source.clone(), target.clone(), arity);
    let mut origin = BTreeMap::new();
    for (n, l) in lines {
        let (k, rest) = l.split_once(':').ok_or_else(|| err(n, "expected `k: label -> label`"))?;
        let k: usize = k.trim().parse().map_err(|_| err(n, format!("bad arity {:?}", k.trim())))?;
        let (a, b) = rest.split_once("->").ok_or_else(|| err(n, "missing `->`"))?;
        let a = source.parse_label(a).map_err(|e| err(n, e.to_string()))?;
        let b = target.parse_label(b).map_err(|e| err(n, e.to_string()))?;
        if source.label_arity(&a) != k || target.label_arity(&b) != k {
            return Err(err(n, format!("labels do not have arity {k}")));
        }
        if k > arity {
            return Err(err(n, format!("arity {k} exceeds the declared {arity}")));
        }
        if table.get(&a).is_some() {
            return Err(err(n, format!("duplicate entry for {}", source.format_label(&a))));
        }
        table.insert(a.clone(), b)?;
        origin.insert(a, n);
    }
    if let Coherence::Violation { sigma, label } = coherence_check(&table) {
        let sigma: Vec<String> = sigma.iter().map(|i| (i + 1).to_string()).collect();
        return Err(err(
            origin[&label],
            format!("incoherent under index map ({})", sigma.join(",")),
        ));
    }
    Ok(table)
}

/// `signature: ..` followed by one `size k; R(i,j); ..` line.
pub fn persist_structure(s: &FiniteStructure) -> String {
    format!("signature: {}\n{}\n", s.signature(), structure_line(s))
}

/// The `size k; R(i,j); ..` form of a structure.
pub fn structure_line(s: &FiniteStructure) -> String {
    let mut parts = vec![format!("size {}", s.size())];
    for (i, sym) in s.signature().symbols().iter().enumerate() {
        for t in s.table(i) {
            let idx: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            parts.push(format!("{}({})", sym.name, idx.join(",")));
        }
    }
    parts.join("; ")
}

pub fn parse_signature(s: &str) -> Result<Signature> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Signature::empty());
    }
    let symbols = s
        .split(',')
        .map(|p| {
            let (name, arity) = p
                .trim()
                .rsplit_once('/')
                .ok_or_else(|| Error::Signature(format!("expected name/arity, got {p:?}")))?;
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| Error::Signature(format!("bad arity in {p:?}")))?;
            Ok((name.trim().to_string(), arity))
        })
        .collect::<Result<Vec<_>>>()?;
    Signature::new(symbols)
}

/// Parses one `size k; R(i,j); ..` line over `signature`.
pub fn parse_structure_line(line: &str, signature: &Signature) -> Result<FiniteStructure> {
    let mut parts = line.split(';').map(str::trim).filter(|p| !p.is_empty());
    let size = parts
        .next()
        .and_then(|p| p.strip_prefix("size"))
        .map(str::trim)
        .ok_or_else(|| Error::Structure("expected `size k`".into()))?;
    let size: usize = size
        .parse()
        .map_err(|_| Error::Structure(format!("bad size {size:?}")))?;
    let mut tables = vec![BTreeSet::new(); signature.len()];
    for p in parts {
        let (name, args) = p
            .strip_suffix(')')
            .and_then(|q| q.split_once('('))
            .ok_or_else(|| Error::Structure(format!("expected R(i,..), got {p:?}")))?;
        let sym = signature
            .index_of(name.trim())
            .ok_or_else(|| Error::Structure(format!("unknown symbol {:?}", name.trim())))?;
        let tuple = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Structure(format!("bad index {:?}", a.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if !tables[sym].insert(tuple) {
            return Err(Error::Structure(format!("duplicate tuple {p}")));
        }
    }
    FiniteStructure::new(signature.clone(), size, tables)
}

pub fn load_structure(text: &str) -> Result<FiniteStructure> {
    let mut lines = content_lines(text);
    let (n, l) = lines.next().ok_or_else(|| err(0, "empty file"))?;
    let sig = header(l, "signature").ok_or_else(|| err(n, "expected `signature:`"))?;
    let sig = parse_signature(sig).map_err(|e| err(n, e.to_string()))?;
    let (n, l) = lines.next().ok_or_else(|| err(0, "missing structure line"))?;
    let s = parse_structure_line(l, &sig).map_err(|e| err(n, e.to_string()))?;
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "trailing content"));
    }
    Ok(s)
}

/// Parses a point literal: a rational, `v<index>`, or a parenthesized tuple.
pub fn parse_point_literal(s: &str) -> Option<Point> {
    let s = s.trim();
    if let Some(body) = s.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
        return split_top(body, ',')
            .into_iter()
            .map(parse_point_literal)
            .collect::<Option<Vec<_>>>()
            .map(Point::Tuple);
    }
    if let Some(i) = s.strip_prefix('v') {
        return i.parse().ok().map(|i| Point::Elem(Element::Index(i)));
    }
    parse_rat(s).map(|q| Point::Elem(Element::Rational(q)))
}

pub fn persist_function_table(table: &BTreeMap<Point, Point>) -> String {
    table.iter().map(|(x, y)| format!("{x} -> {y}\n")).collect()
}

/// Reads `x -> y` lines; a repeated `x` is an error.
pub fn load_function_table(text: &str) -> Result<BTreeMap<Point, Point>> {
    let mut out = BTreeMap::new();
    for (n, l) in content_lines(text) {
        let (a, b) = l.split_once("->").ok_or_else(|| err(n, "missing `->`"))?;
        let a = parse_point_literal(a).ok_or_else(|| err(n, format!("bad point {:?}", a.trim())))?;
        let b = parse_point_literal(b).ok_or_else(|| err(n, format!("bad point {:?}", b.trim())))?;
        if out.insert(a.clone(), b).is_some() {
            return Err(err(n, format!("duplicate entry for {a}")));
        }
    }
    Ok(out)
}

pub fn persist_certificate(c: &ObstructionCertificate) -> String {
    c.to_string()
}

/// Reads a certificate and re-verifies every claim.
pub fn load_certificate(text: &str) -> Result<ObstructionCertificate> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (n, l) in content_lines(text) {
        let (k, v) = l.split_once(':').ok_or_else(|| err(n, "expected `key: value`"))?;
        if fields.insert(k.trim(), (n, v.trim())).is_some() {
            return Err(err(n, format!("duplicate key {:?}", k.trim())));
        }
    }
    let rat = |key: &str| {
        let (n, v) = fields.get(key).ok_or_else(|| err(0, format!("missing key {key:?}")))?;
        parse_rat(v).ok_or_else(|| err(*n, format!("bad rational {v:?}")))
    };
    let probe = |side: &str| -> Result<Probe> {
        Ok(Probe {
            x: rat(&format!("{side}_x"))?,
            fx: rat(&format!("{side}_y"))?,
            gx: rat(&format!("{side}_e"))?,
        })
    };
    let (pn, probes) = fields.get("probes").ok_or_else(|| err(0, "missing key \"probes\""))?;
    let cert = ObstructionCertificate {
        epsilon: rat("epsilon")?,
        a: rat("a")?,
        f_a: rat("f(a)")?,
        alpha_a: rat("alpha(a)")?,
        f_alpha_a: rat("f(alpha(a))")?,
        lower: probe("lower")?,
        upper: probe("upper")?,
        probes: probes.parse().map_err(|_| err(*pn, format!("bad count {probes:?}")))?,
    };
    if let Err(failed) = cert.verify() {
        return Err(err(0, format!("claims do not hold: {}", failed.join("; "))));
    }
    Ok(cert)
}

/// Reads a forbidden-substructure file: a `base:` line naming a built-in age
/// or a `signature:` line, then one `size k; ..` structure per line.
pub fn load_forbidden(name: &str, text: &str) -> Result<AgeOracle> {
    let mut lines = content_lines(text);
    let (n, first) = lines.next().ok_or_else(|| err(0, "empty file"))?;
    let (signature, base) = if let Some(b) = header(first, "base") {
        let base = match b {
            "linear-orders" => AgeOracle::linear_orders(),
            "graphs" => AgeOracle::graphs(),
            "ordered-graphs" => AgeOracle::ordered_graphs(),
            "pure-sets" => AgeOracle::pure_sets(),
            _ => return Err(err(n, format!("unknown base age {b:?}"))),
        };
        (base.signature().clone(), Some(base))
    } else if let Some(s) = header(first, "signature") {
        (parse_signature(s).map_err(|e| err(n, e.to_string()))?, None)
    } else {
        return Err(err(n, "expected `base:` or `signature:`"));
    };
    let forbidden = lines
        .map(|(n, l)| parse_structure_line(l, &signature).map_err(|e| err(n, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    AgeOracle::forbidden(name, signature, base, forbidden)
}

/// Reads `structure <name> = builtin:<name>` and
/// `structure <name> = forbidden:<file>` directives. `read` loads a named
/// forbidden file.
pub fn load_structure_specs(
    text: &str,
    read: &dyn Fn(&str) -> std::io::Result<String>,
) -> Result<BTreeMap<String, Arc<LimitStructure>>> {
    let mut out = BTreeMap::new();
    for (n, l) in content_lines(text) {
        let rest = l
            .strip_prefix("structure")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| err(n, "expected `structure <name> = ..`"))?;
        let (name, def) = rest.split_once('=').ok_or_else(|| err(n, "missing `=`"))?;
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(err(n, format!("bad structure name {name:?}")));
        }
        let def = def.trim();
        let limit = if let Some(b) = def.strip_prefix("builtin:") {
            LimitStructure::builtin(b).ok_or_else(|| err(n, format!("unknown builtin {b:?}")))?
        } else if let Some(path) = def.strip_prefix("forbidden:") {
            let body = read(path).map_err(|e| err(n, format!("cannot read {path:?}: {e}")))?;
            let age = load_forbidden(name, &body).map_err(|e| match e {
                Error::Format { line, reason } => err(n, format!("{path}:{line}: {reason}")),
                e => err(n, e.to_string()),
            })?;
            LimitStructure::generic(name, age)
        } else {
            return Err(err(n, format!("unknown definition {def:?}")));
        };
        if out.insert(name.to_string(), Arc::new(limit)).is_some() {
            return Err(err(n, format!("structure {name:?} defined twice")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::enumerate_behaviors;
    use crate::fraisse::build_limit;

    fn resolve(name: &str) -> Option<Arc<LimitStructure>> {
        LimitStructure::builtin(name).map(Arc::new)
    }

    #[test]
    fn behavior_round_trip() {
        let dlo = GroupPresentation::aut_dlo();
        for t in enumerate_behaviors(&dlo, &dlo, 3).unwrap() {
            let text = persist_behavior(&t);
            let back = load_behavior(&text, &resolve).unwrap();
            assert_eq!(back, t);
            assert_eq!(persist_behavior(&back), text);
        }
    }

    #[test]
    fn duplicate_entry_is_rejected() {
        let text = "source: aut(dlo)\ntarget: aut(dlo)\narity: 2\n1: 1 -> 1\n2: 1<2 -> 2<1\n2: 1<2 -> 2<1\n";
        match load_behavior(text, &resolve) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let incoherent = "source: aut(dlo)\ntarget: aut(dlo)\narity: 2\n2: 1<2 -> 1<2\n2: 2<1 -> 1<2\n";
        assert!(matches!(load_behavior(incoherent, &resolve), Err(Error::Format { .. })));
    }

    #[test]
    fn structure_round_trip() {
        let g = build_limit(AgeOracle::graphs(), 4).unwrap().fragment(4).unwrap();
        let text = persist_structure(&g);
        assert_eq!(load_structure(&text).unwrap(), g);
        assert!(matches!(
            load_structure("signature: E/2\nsize 2; E(0,5)\n"),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn function_tables() {
        let text = "0 -> 1\n1/2 -> -3/4\n(1,2) -> 5\n";
        let t = load_function_table(text).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(load_function_table(&persist_function_table(&t)).unwrap(), t);
        assert!(matches!(load_function_table("0 -> 1\n0 -> 2\n"), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn structure_specs() {
        let files = |p: &str| -> std::io::Result<String> {
            assert_eq!(p, "k3.txt");
            Ok("base: graphs\nsize 3; E(0,1); E(1,0); E(1,2); E(2,1); E(0,2); E(2,0)\n".into())
        };
        let specs = load_structure_specs("structure q = builtin:dlo\nstructure h = forbidden:k3.txt\n", &files).unwrap();
        assert!(specs["q"].is_dlo());
        let h = &specs["h"];
        let frag = h.fragment(5).unwrap();
        assert!(h.age().contains(&frag));
        assert!(load_structure_specs("structure q = builtin:nope\n", &files).is_err());
    }
}
