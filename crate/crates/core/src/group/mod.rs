//! Permutation groups presented compositionally: the automorphism group of a
//! limit, finite powers acting componentwise, and pointwise stabilizers.
//!
//! Orbits are never computed from group elements. Every presentation has an
//! orbit label (a quantifier-free type, a tuple of column labels, or the label
//! of the tuple extended by the constants) and two tuples share an orbit iff
//! their labels agree. This is complete because the built-in limits are
//! homogeneous.

mod partial;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

pub use partial::{automorphism_extending, Germ, PartialAutomorphism};

use crate::error::{Error, Result};
use crate::fraisse::limit::check_arity;
use crate::fraisse::{Element, LimitStructure, TupleType};

pub const MAX_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Elem(Element),
    Tuple(Vec<Point>),
}

impl Point {
    /// Leaf elements in column order.
    pub fn leaves(&self) -> Vec<&Element> {
        match self {
            Point::Elem(e) => vec![e],
            Point::Tuple(ps) => ps.iter().flat_map(|p| p.leaves()).collect(),
        }
    }
}

impl From<Element> for Point {
    fn from(e: Element) -> Self {
        Point::Elem(e)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Elem(e) => write!(f, "{e}"),
            Point::Tuple(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbitLabel {
    Type(TupleType),
    Columns(Vec<OrbitLabel>),
}

#[derive(Clone, Debug)]
pub enum GroupPresentation {
    AutLimit(Arc<LimitStructure>),
    Power {
        base: Box<GroupPresentation>,
        m: usize,
    },
    Stabilizer {
        base: Box<GroupPresentation>,
        constants: Vec<Point>,
    },
}

impl PartialEq for GroupPresentation {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GroupPresentation::AutLimit(a), GroupPresentation::AutLimit(b)) => {
                Arc::ptr_eq(a, b) || a.name() == b.name()
            }
            (GroupPresentation::Power { base: a, m: x }, GroupPresentation::Power { base: b, m: y }) => {
                x == y && a == b
            }
            (
                GroupPresentation::Stabilizer { base: a, constants: x },
                GroupPresentation::Stabilizer { base: b, constants: y },
            ) => x == y && a == b,
            _ => false,
        }
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupPresentation::AutLimit(l) => write!(f, "aut({})", l.name()),
            GroupPresentation::Power { base, m } => write!(f, "power({base},{m})"),
            GroupPresentation::Stabilizer { base, constants } => {
                let cs: Vec<String> = constants.iter().map(|c| c.to_string()).collect();
                write!(f, "stab({base}; {})", cs.join(","))
            }
        }
    }
}

/// Splits at top-level occurrences of `sep` (outside any brackets).
pub(crate) fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn strip_call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

impl GroupPresentation {
    pub fn aut(limit: Arc<LimitStructure>) -> Self {
        GroupPresentation::AutLimit(limit)
    }

    pub fn aut_dlo() -> Self {
        GroupPresentation::AutLimit(Arc::new(LimitStructure::dlo()))
    }

    pub fn power(base: GroupPresentation, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Presentation("power arity must be at least 1".into()));
        }
        let g = GroupPresentation::Power {
            base: Box::new(base),
            m,
        };
        g.check_depth()?;
        Ok(g)
    }

    pub fn stabilizer(base: GroupPresentation, constants: Vec<Point>) -> Result<Self> {
        for c in &constants {
            base.check_point(c)?;
        }
        let g = GroupPresentation::Stabilizer {
            base: Box::new(base),
            constants,
        };
        g.check_depth()?;
        Ok(g)
    }

    fn check_depth(&self) -> Result<()> {
        if self.depth() > MAX_DEPTH {
            return Err(Error::Presentation(format!("nesting depth {} exceeds {MAX_DEPTH}", self.depth())));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        match self {
            GroupPresentation::AutLimit(_) => 1,
            GroupPresentation::Power { base, .. } | GroupPresentation::Stabilizer { base, .. } => base.depth() + 1,
        }
    }

    /// The limit every column lives in.
    pub fn limit(&self) -> &Arc<LimitStructure> {
        match self {
            GroupPresentation::AutLimit(l) => l,
            GroupPresentation::Power { base, .. } | GroupPresentation::Stabilizer { base, .. } => base.limit(),
        }
    }

    /// Number of leaf elements in a point.
    pub fn columns(&self) -> usize {
        match self {
            GroupPresentation::AutLimit(_) => 1,
            GroupPresentation::Power { base, m } => base.columns() * m,
            GroupPresentation::Stabilizer { base, .. } => base.columns(),
        }
    }

    /// Fixed constants, if this is a stabilizer.
    pub fn constants(&self) -> &[Point] {
        match self {
            GroupPresentation::Stabilizer { constants, .. } => constants,
            _ => &[],
        }
    }

    /// The presentation with the outermost stabilizer removed.
    pub fn unstabilized(&self) -> &GroupPresentation {
        match self {
            GroupPresentation::Stabilizer { base, .. } => base,
            g => g,
        }
    }

    /// Parses `aut(NAME)`, `power(G,m)` and `stab(G; c1,c2,..)`; `resolve`
    /// maps a structure name to its limit.
    pub fn parse(s: &str, resolve: &dyn Fn(&str) -> Option<Arc<LimitStructure>>) -> Result<Self> {
        let s = s.trim();
        if let Some(name) = strip_call(s, "aut") {
            let name = name.trim();
            let limit = resolve(name).ok_or_else(|| Error::Presentation(format!("unknown structure {name:?}")))?;
            return Ok(GroupPresentation::AutLimit(limit));
        }
        if let Some(body) = strip_call(s, "power") {
            let parts = split_top(body, ',');
            if parts.len() != 2 {
                return Err(Error::Presentation(format!("power expects (group, m): {s}")));
            }
            let base = Self::parse(parts[0], resolve)?;
            let m: usize = parts[1]
                .trim()
                .parse()
                .map_err(|_| Error::Presentation(format!("bad power arity {:?}", parts[1].trim())))?;
            return Self::power(base, m);
        }
        if let Some(body) = strip_call(s, "stab") {
            let parts = split_top(body, ';');
            if parts.len() != 2 {
                return Err(Error::Presentation(format!("stab expects (group; constants): {s}")));
            }
            let base = Self::parse(parts[0], resolve)?;
            let constants = if parts[1].trim().is_empty() {
                Vec::new()
            } else {
                split_top(parts[1], ',')
                    .into_iter()
                    .map(|c| base.parse_point(c))
                    .collect::<Result<Vec<_>>>()?
            };
            return Self::stabilizer(base, constants);
        }
        Err(Error::Presentation(format!("unrecognised group {s:?}")))
    }

    /// Parses a domain point: an element literal, or `(p1,..,pm)` for powers.
    pub fn parse_point(&self, s: &str) -> Result<Point> {
        let s = s.trim();
        match self {
            GroupPresentation::AutLimit(l) => l
                .parse_element(s)
                .map(Point::Elem)
                .ok_or_else(|| Error::Point(format!("{s:?} is not an element of {}", l.name()))),
            GroupPresentation::Power { base, m } => {
                let body = s
                    .strip_prefix('(')
                    .and_then(|b| b.strip_suffix(')'))
                    .ok_or_else(|| Error::Point(format!("expected a {m}-tuple, got {s:?}")))?;
                let parts = split_top(body, ',');
                if parts.len() != *m {
                    return Err(Error::Point(format!("expected {m} components in {s:?}")));
                }
                Ok(Point::Tuple(
                    parts.into_iter().map(|p| base.parse_point(p)).collect::<Result<_>>()?,
                ))
            }
            GroupPresentation::Stabilizer { base, .. } => base.parse_point(s),
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (GroupPresentation::AutLimit(l), Point::Elem(e)) if l.owns(e) => Ok(()),
            (GroupPresentation::Power { base, m }, Point::Tuple(ps)) if ps.len() == *m => {
                ps.iter().try_for_each(|q| base.check_point(q))
            }
            (GroupPresentation::Stabilizer { base, .. }, _) => base.check_point(p),
            _ => Err(Error::Point(format!("{p} does not fit {self}"))),
        }
    }

    /// Rebuilds a point from its leaf elements.
    pub fn assemble(&self, leaves: &[Element]) -> Point {
        match self {
            GroupPresentation::AutLimit(_) => Point::Elem(leaves[0].clone()),
            GroupPresentation::Power { base, m } => {
                let w = base.columns();
                Point::Tuple((0..*m).map(|i| base.assemble(&leaves[i * w..(i + 1) * w])).collect())
            }
            GroupPresentation::Stabilizer { base, .. } => base.assemble(leaves),
        }
    }

    /// The orbit label of a tuple of points.
    pub fn orbit_label(&self, t: &[Point]) -> Result<OrbitLabel> {
        match self {
            GroupPresentation::AutLimit(l) => {
                let elems: Vec<Element> = t
                    .iter()
                    .map(|p| match p {
                        Point::Elem(e) => Ok(e.clone()),
                        Point::Tuple(_) => Err(Error::Point(format!("{p} is not an element of {}", l.name()))),
                    })
                    .collect::<Result<_>>()?;
                Ok(OrbitLabel::Type(l.qf_type(&elems)?))
            }
            GroupPresentation::Power { base, m } => {
                let mut cols = Vec::with_capacity(*m);
                for i in 0..*m {
                    let column: Vec<Point> = t
                        .iter()
                        .map(|p| match p {
                            Point::Tuple(ps) if ps.len() == *m => Ok(ps[i].clone()),
                            _ => Err(Error::Point(format!("{p} is not a {m}-tuple"))),
                        })
                        .collect::<Result<_>>()?;
                    cols.push(base.orbit_label(&column)?);
                }
                Ok(OrbitLabel::Columns(cols))
            }
            GroupPresentation::Stabilizer { base, constants } => {
                let mut ext = t.to_vec();
                ext.extend(constants.iter().cloned());
                base.orbit_label(&ext)
            }
        }
    }

    pub fn same_orbit(&self, s: &[Point], t: &[Point]) -> Result<bool> {
        if s.len() != t.len() {
            return Ok(false);
        }
        Ok(self.orbit_label(s)? == self.orbit_label(t)?)
    }

    /// Arity of the tuples a label describes.
    pub fn label_arity(&self, label: &OrbitLabel) -> usize {
        match (self, label) {
            (GroupPresentation::AutLimit(_), OrbitLabel::Type(t)) => t.arity(),
            (GroupPresentation::Power { base, .. }, OrbitLabel::Columns(cs)) => {
                cs.first().map_or(0, |c| base.label_arity(c))
            }
            (GroupPresentation::Stabilizer { base, constants }, l) => {
                base.label_arity(l).saturating_sub(constants.len())
            }
            _ => 0,
        }
    }

    /// Label of `(t_{sigma(0)}, .., t_{sigma(j-1)})` from the label of `t`.
    pub fn reindex(&self, label: &OrbitLabel, sigma: &[usize]) -> OrbitLabel {
        match (self, label) {
            (GroupPresentation::AutLimit(_), OrbitLabel::Type(t)) => OrbitLabel::Type(t.reindex(sigma)),
            (GroupPresentation::Power { base, .. }, OrbitLabel::Columns(cs)) => {
                OrbitLabel::Columns(cs.iter().map(|c| base.reindex(c, sigma)).collect())
            }
            (GroupPresentation::Stabilizer { base, constants }, l) => {
                let k = base.label_arity(l) - constants.len();
                let mut ext = sigma.to_vec();
                ext.extend(k..k + constants.len());
                base.reindex(l, &ext)
            }
            _ => panic!("label does not belong to {self}"),
        }
    }

    /// Every admissible label of arity `k`, sorted.
    pub fn admissible_labels(&self, k: usize) -> Result<Vec<OrbitLabel>> {
        check_arity(k)?;
        let mut out: Vec<OrbitLabel> = match self {
            GroupPresentation::AutLimit(l) => l.admissible_types(k)?.into_iter().map(OrbitLabel::Type).collect(),
            GroupPresentation::Power { base, m } => {
                let per_column = base.admissible_labels(k)?;
                let mut acc: Vec<Vec<OrbitLabel>> = vec![Vec::new()];
                for _ in 0..*m {
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            per_column.iter().map(move |l| {
                                let mut next = prefix.clone();
                                next.push(l.clone());
                                next
                            })
                        })
                        .collect();
                }
                acc.into_iter().map(OrbitLabel::Columns).collect()
            }
            GroupPresentation::Stabilizer { base, constants } => {
                let c = constants.len();
                let fixed = base.orbit_label(constants)?;
                let tail: Vec<usize> = (k..k + c).collect();
                base.admissible_labels(k + c)?
                    .into_iter()
                    .filter(|l| c == 0 || base.reindex(l, &tail) == fixed)
                    .collect()
            }
        };
        out.sort();
        Ok(out)
    }

    pub fn count_orbits(&self, k: usize) -> Result<usize> {
        Ok(self.admissible_labels(k)?.len())
    }

    /// The `n` first domain points. Powers list index tuples shell by shell
    /// (by largest index, then lexicographically).
    pub fn domain_prefix(&self, n: usize) -> Result<Vec<Point>> {
        match self {
            GroupPresentation::AutLimit(l) => Ok(l.elements(n)?.into_iter().map(Point::Elem).collect()),
            GroupPresentation::Power { base, m } => {
                let idx = shell_tuples(*m, n);
                let needed = idx.iter().flatten().map(|&i| i + 1).max().unwrap_or(0);
                let base_pts = base.domain_prefix(needed)?;
                Ok(idx
                    .into_iter()
                    .map(|t| Point::Tuple(t.into_iter().map(|i| base_pts[i].clone()).collect()))
                    .collect())
            }
            GroupPresentation::Stabilizer { base, .. } => base.domain_prefix(n),
        }
    }

    pub fn format_label(&self, label: &OrbitLabel) -> String {
        match (self, label) {
            (GroupPresentation::AutLimit(l), OrbitLabel::Type(t)) => {
                if l.is_dlo() {
                    t.order_pattern().unwrap_or_else(|| t.generic_string(l.signature()))
                } else {
                    t.generic_string(l.signature())
                }
            }
            (GroupPresentation::Power { base, .. }, OrbitLabel::Columns(cs)) => {
                let parts: Vec<String> = cs.iter().map(|c| base.format_label(c)).collect();
                format!("[{}]", parts.join(" ; "))
            }
            (GroupPresentation::Stabilizer { base, .. }, l) => base.format_label(l),
            _ => format!("{label:?}"),
        }
    }

    /// Parses a label and checks that it is admissible for this group.
    pub fn parse_label(&self, s: &str) -> Result<OrbitLabel> {
        let label = self.parse_label_shape(s)?;
        let k = self.label_arity(&label);
        if !self.admissible_labels(k)?.contains(&label) {
            return Err(Error::TypeMismatch(format!("{s:?} is not an admissible label of {self}")));
        }
        Ok(label)
    }

    fn parse_label_shape(&self, s: &str) -> Result<OrbitLabel> {
        let s = s.trim();
        let bad = || Error::TypeMismatch(format!("cannot read label {s:?} for {self}"));
        match self {
            GroupPresentation::AutLimit(l) => {
                let t = if l.is_dlo() {
                    TupleType::parse_order_pattern(s)
                } else {
                    TupleType::parse_generic(s, l.signature())
                };
                t.map(OrbitLabel::Type).ok_or_else(bad)
            }
            GroupPresentation::Power { base, m } => {
                let body = s.strip_prefix('[').and_then(|b| b.strip_suffix(']')).ok_or_else(bad)?;
                let parts = split_top(body, ';');
                if parts.len() != *m {
                    return Err(bad());
                }
                Ok(OrbitLabel::Columns(
                    parts.into_iter().map(|p| base.parse_label_shape(p)).collect::<Result<_>>()?,
                ))
            }
            GroupPresentation::Stabilizer { base, .. } => base.parse_label_shape(s),
        }
    }

    /// Orders points by the enumeration positions of their leaves.
    pub fn enumeration_cmp(&self, a: &Point, b: &Point) -> Ordering {
        let limit = self.limit();
        for (x, y) in a.leaves().into_iter().zip(b.leaves()) {
            let c = limit.enumeration_cmp(x, y);
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    }
}

/// The first `n` tuples of `N^m` ordered by maximum and then lexicographically.
pub fn shell_tuples(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n);
    let mut shell = 0usize;
    while out.len() < n {
        let mut t = vec![0usize; m];
        loop {
            if t.iter().copied().max() == Some(shell) {
                out.push(t.clone());
                if out.len() == n {
                    break;
                }
            }
            // lexicographic successor inside [0, shell]^m
            let mut i = m;
            while i > 0 && t[i - 1] == shell {
                t[i - 1] = 0;
                i -= 1;
            }
            if i == 0 {
                break;
            }
            t[i - 1] += 1;
        }
        shell += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::rational::rat;

    fn q(n: i64) -> Point {
        Point::Elem(Element::Rational(rat(n, 1)))
    }

    fn pair(a: i64, b: i64) -> Point {
        Point::Tuple(vec![q(a), q(b)])
    }

    fn resolve(name: &str) -> Option<Arc<LimitStructure>> {
        LimitStructure::builtin(name).map(Arc::new)
    }

    #[test]
    fn labels_of_examples() {
        let g = GroupPresentation::aut_dlo();
        assert_eq!(g.format_label(&g.orbit_label(&[q(1), q(2)]).unwrap()), "1<2");
        let s = GroupPresentation::stabilizer(g.clone(), vec![q(0)]).unwrap();
        assert_eq!(s.format_label(&s.orbit_label(&[q(-3)]).unwrap()), "1<2");
        let p = GroupPresentation::power(g.clone(), 2).unwrap();
        let l = p.orbit_label(&[pair(1, 5), pair(2, 3)]).unwrap();
        assert_eq!(p.format_label(&l), "[1<2 ; 2<1]");
    }

    #[test]
    fn same_orbit_examples() {
        let g = GroupPresentation::aut_dlo();
        assert!(g.same_orbit(&[q(1), q(2)], &[q(7), q(9)]).unwrap());
        let s = GroupPresentation::stabilizer(g.clone(), vec![q(0)]).unwrap();
        assert!(!s.same_orbit(&[q(-1)], &[q(1)]).unwrap());
        let p = GroupPresentation::power(g, 2).unwrap();
        assert!(p.same_orbit(&[pair(0, 0), pair(1, 1)], &[pair(0, 5), pair(1, 9)]).unwrap());
    }

    #[test]
    fn orbit_counts() {
        let g = GroupPresentation::aut_dlo();
        let s = GroupPresentation::stabilizer(g.clone(), vec![q(0)]).unwrap();
        assert_eq!(s.count_orbits(1).unwrap(), 3);
        let p = GroupPresentation::power(g, 2).unwrap();
        assert_eq!(p.count_orbits(1).unwrap(), 1);
        assert_eq!(p.count_orbits(2).unwrap(), 9);
    }

    #[test]
    fn parse_and_print_groups() {
        for s in ["aut(dlo)", "power(aut(dlo),2)", "stab(power(aut(dlo),2); (0,1),(3,5))", "aut(rado)"] {
            let g = GroupPresentation::parse(s, &resolve).unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!(GroupPresentation::parse("aut(nope)", &resolve).is_err());
        assert!(GroupPresentation::parse("power(aut(dlo),0)", &resolve).is_err());
        assert!(GroupPresentation::parse("stab(aut(dlo); (0,1))", &resolve).is_err());
        let deep = "stab(power(power(aut(dlo),2),2); )";
        assert!(GroupPresentation::parse(deep, &resolve).is_err());
    }

    #[test]
    fn label_round_trip() {
        let p = GroupPresentation::parse("power(aut(dlo),2)", &resolve).unwrap();
        for l in p.admissible_labels(2).unwrap() {
            assert_eq!(p.parse_label(&p.format_label(&l)).unwrap(), l);
        }
        let r = GroupPresentation::parse("aut(rado)", &resolve).unwrap();
        for l in r.admissible_labels(3).unwrap() {
            assert_eq!(r.parse_label(&r.format_label(&l)).unwrap(), l);
        }
        assert!(p.parse_label("[1<2 ; 1<1]").is_err());
    }

    #[test]
    fn stabilizer_reindex_keeps_constants() {
        let g = GroupPresentation::aut_dlo();
        let s = GroupPresentation::stabilizer(g, vec![q(0)]).unwrap();
        let l = s.orbit_label(&[q(-1), q(1)]).unwrap();
        let swapped = s.reindex(&l, &[1, 0]);
        assert_eq!(swapped, s.orbit_label(&[q(1), q(-1)]).unwrap());
        assert_eq!(s.label_arity(&swapped), 2);
    }

    #[test]
    fn shells() {
        let t = shell_tuples(2, 6);
        assert_eq!(t, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(shell_tuples(1, 3), vec![vec![0], vec![1], vec![2]]);
    }
}
