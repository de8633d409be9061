//! Function oracles: finite tables, built-in maps on the rationals, lazy
//! back-and-forth maps, partial automorphisms and compositions.
//!
//! String forms: `id`, `neg`, `const:p/q`, `pieces:[(-inf,0):x*-1; [0,inf):x]`,
//! `pham`, `alpha(a,b)`, `compose(f,g)` (apply `g` first), `min`, `max`,
//! `proj:i` and `table:<path>`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fraisse::rational::{format_rat, parse_rat};
use crate::fraisse::{Element, Rat};
use crate::group::{split_top, PartialAutomorphism, Point};
use crate::symbolic::{automorphism_moving, pham_map, BackAndForthMap};

/// One end of an interval; `value: None` is an infinite end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub value: Option<Rat>,
    pub closed: bool,
}

/// `x * slope + offset` on an interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub lo: Bound,
    pub hi: Bound,
    pub slope: Rat,
    pub offset: Rat,
}

impl Piece {
    pub fn contains(&self, x: &Rat) -> bool {
        let above = match &self.lo.value {
            None => true,
            Some(l) => x > l || (self.lo.closed && x == l),
        };
        let below = match &self.hi.value {
            None => true,
            Some(h) => x < h || (self.hi.closed && x == h),
        };
        above && below
    }

    fn apply(&self, x: &Rat) -> Rat {
        x * &self.slope + &self.offset
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.value.as_ref().map_or("-inf".to_string(), format_rat);
        let hi = self.hi.value.as_ref().map_or("inf".to_string(), format_rat);
        let open = if self.lo.closed { '[' } else { '(' };
        let close = if self.hi.closed { ']' } else { ')' };
        let mut expr = if self.slope.is_zero() {
            String::new()
        } else if self.slope.is_one() {
            "x".to_string()
        } else {
            format!("x*{}", format_rat(&self.slope))
        };
        if expr.is_empty() {
            expr = format_rat(&self.offset);
        } else if !self.offset.is_zero() {
            expr.push_str(&format!("+{}", format_rat(&self.offset)));
        }
        write!(f, "{open}{lo},{hi}{close}:{expr}")
    }
}

#[derive(Clone)]
pub enum FunctionOracle {
    Table(Arc<BTreeMap<Point, Point>>),
    Identity,
    Negation,
    Constant(Rat),
    Pieces(Vec<Piece>),
    BackAndForth { name: String, map: Arc<BackAndForthMap> },
    Germ(Arc<PartialAutomorphism>),
    /// `Compose(a, b)` is `a` after `b`.
    Compose(Box<FunctionOracle>, Box<FunctionOracle>),
    Min,
    Max,
    Proj(usize),
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionOracle({self})")
    }
}

impl fmt::Display for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionOracle::Table(t) => write!(f, "table[{} entries]", t.len()),
            FunctionOracle::Identity => write!(f, "id"),
            FunctionOracle::Negation => write!(f, "neg"),
            FunctionOracle::Constant(c) => write!(f, "const:{}", format_rat(c)),
            FunctionOracle::Pieces(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "pieces:[{}]", parts.join("; "))
            }
            FunctionOracle::BackAndForth { name, .. } => write!(f, "{name}"),
            FunctionOracle::Germ(_) => write!(f, "germ"),
            FunctionOracle::Compose(a, b) => write!(f, "compose({a},{b})"),
            FunctionOracle::Min => write!(f, "min"),
            FunctionOracle::Max => write!(f, "max"),
            FunctionOracle::Proj(i) => write!(f, "proj:{i}"),
        }
    }
}

fn rational_point(p: &Point) -> Result<&Rat> {
    match p {
        Point::Elem(Element::Rational(q)) => Ok(q),
        _ => Err(Error::Point(format!("{p} is not a rational"))),
    }
}

fn rational_columns(p: &Point) -> Result<Vec<&Rat>> {
    match p {
        Point::Tuple(ps) if !ps.is_empty() => ps.iter().map(rational_point).collect(),
        _ => Err(Error::Point(format!("{p} is not a tuple of rationals"))),
    }
}

fn rp(q: Rat) -> Point {
    Point::Elem(Element::Rational(q))
}

impl FunctionOracle {
    pub fn table(entries: BTreeMap<Point, Point>) -> Self {
        FunctionOracle::Table(Arc::new(entries))
    }

    pub fn back_and_forth(name: impl Into<String>, map: Arc<BackAndForthMap>) -> Self {
        FunctionOracle::BackAndForth { name: name.into(), map }
    }

    /// `a` after `b`.
    pub fn compose(a: FunctionOracle, b: FunctionOracle) -> Self {
        FunctionOracle::Compose(Box::new(a), Box::new(b))
    }

    /// Validates and builds a piecewise affine map: pieces must be disjoint
    /// and cover `Q`.
    pub fn pieces(mut pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Oracle("no pieces".into()));
        }
        let key = |b: &Bound| b.value.clone();
        pieces.sort_by(|a, b| match (key(&a.lo), key(&b.lo)) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(&y),
        });
        if pieces[0].lo.value.is_some() {
            return Err(Error::Oracle("pieces do not cover -inf".into()));
        }
        if pieces[pieces.len() - 1].hi.value.is_some() {
            return Err(Error::Oracle("pieces do not cover inf".into()));
        }
        for p in &pieces {
            if let (Some(l), Some(h)) = (&p.lo.value, &p.hi.value) {
                if l > h || (l == h && !(p.lo.closed && p.hi.closed)) {
                    return Err(Error::Oracle(format!("empty piece {p}")));
                }
            }
            if (p.lo.value.is_none() && p.lo.closed) || (p.hi.value.is_none() && p.hi.closed) {
                return Err(Error::Oracle(format!("infinite end cannot be closed in {p}")));
            }
        }
        for w in pieces.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let meet = a.hi.value.is_some() && a.hi.value == b.lo.value && a.hi.closed != b.lo.closed;
            if !meet {
                return Err(Error::Oracle(format!("pieces {a} and {b} overlap or leave a gap")));
            }
        }
        Ok(FunctionOracle::Pieces(pieces))
    }

    pub fn eval(&self, p: &Point) -> Result<Point> {
        match self {
            FunctionOracle::Table(t) => t.get(p).cloned().ok_or_else(|| Error::DomainGap(p.to_string())),
            FunctionOracle::Identity => Ok(p.clone()),
            FunctionOracle::Negation => Ok(rp(-rational_point(p)?.clone())),
            FunctionOracle::Constant(c) => {
                rational_point(p)?;
                Ok(rp(c.clone()))
            }
            FunctionOracle::Pieces(ps) => {
                let x = rational_point(p)?;
                let piece = ps
                    .iter()
                    .find(|pc| pc.contains(x))
                    .ok_or_else(|| Error::DomainGap(p.to_string()))?;
                Ok(rp(piece.apply(x)))
            }
            FunctionOracle::BackAndForth { map, .. } => Ok(rp(map.eval(rational_point(p)?)?)),
            FunctionOracle::Germ(a) => a.apply(p),
            FunctionOracle::Compose(a, b) => a.eval(&b.eval(p)?),
            FunctionOracle::Min => {
                let cs = rational_columns(p)?;
                Ok(rp(cs.into_iter().min().expect("nonempty").clone()))
            }
            FunctionOracle::Max => {
                let cs = rational_columns(p)?;
                Ok(rp(cs.into_iter().max().expect("nonempty").clone()))
            }
            FunctionOracle::Proj(i) => match p {
                Point::Tuple(ps) if *i < ps.len() => Ok(ps[*i].clone()),
                _ => Err(Error::Point(format!("{p} has no coordinate {i}"))),
            },
        }
    }

    /// Evaluation on a single rational.
    pub fn eval_rat(&self, x: &Rat) -> Result<Rat> {
        rational_point(&self.eval(&rp(x.clone()))?).cloned()
    }

    /// Parses an oracle string; `table` loads `table:<path>` oracles.
    pub fn parse(s: &str, table: &dyn Fn(&str) -> Result<FunctionOracle>) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::Oracle(format!("{why} in {s:?}"));
        match s {
            "id" => return Ok(FunctionOracle::Identity),
            "neg" => return Ok(FunctionOracle::Negation),
            "min" => return Ok(FunctionOracle::Min),
            "max" => return Ok(FunctionOracle::Max),
            "pham" => return Ok(FunctionOracle::back_and_forth("pham", Arc::new(pham_map()?))),
            _ => {}
        }
        if let Some(c) = s.strip_prefix("const:") {
            return parse_rat(c).map(FunctionOracle::Constant).ok_or_else(|| bad("bad constant"));
        }
        if let Some(i) = s.strip_prefix("proj:") {
            return i.trim().parse().map(FunctionOracle::Proj).map_err(|_| bad("bad coordinate"));
        }
        if let Some(path) = s.strip_prefix("table:") {
            return table(path.trim());
        }
        if let Some(body) = s.strip_prefix("pieces:") {
            let body = body.trim();
            let inner = body
                .strip_prefix('[')
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| bad("unclosed bracket"))?;
            let pieces = split_top(inner, ';')
                .into_iter()
                .map(|p| parse_piece(p).ok_or_else(|| bad(&format!("bad piece {:?}", p.trim()))))
                .collect::<Result<Vec<_>>>()?;
            return Self::pieces(pieces);
        }
        if let Some(body) = s.strip_prefix("compose(").and_then(|b| b.strip_suffix(')')) {
            let parts = split_top(body, ',');
            if parts.len() != 2 {
                return Err(bad("compose takes two oracles"));
            }
            return Ok(Self::compose(Self::parse(parts[0], table)?, Self::parse(parts[1], table)?));
        }
        if let Some(body) = s.strip_prefix("alpha(").and_then(|b| b.strip_suffix(')')) {
            let parts: Vec<&str> = body.split(',').collect();
            if parts.len() != 2 {
                return Err(bad("alpha takes two rationals"));
            }
            let a = parse_rat(parts[0]).ok_or_else(|| bad("bad rational"))?;
            let b = parse_rat(parts[1]).ok_or_else(|| bad("bad rational"))?;
            let name = format!("alpha({},{})", format_rat(&a), format_rat(&b));
            return Ok(Self::back_and_forth(name, Arc::new(automorphism_moving(a, b))));
        }
        Err(bad("unknown oracle"))
    }
}

fn parse_bound(s: &str) -> Option<Option<Rat>> {
    match s.trim() {
        "-inf" | "inf" | "+inf" => Some(None),
        v => parse_rat(v).map(Some),
    }
}

fn parse_piece(s: &str) -> Option<Piece> {
    let s = s.trim();
    let close = s.find([')', ']'])?;
    let (interval, rest) = s.split_at(close + 1);
    let expr = rest.trim().strip_prefix(':')?;
    let lo_closed = match interval.chars().next()? {
        '[' => true,
        '(' => false,
        _ => return None,
    };
    let hi_closed = interval.ends_with(']');
    let (lo, hi) = interval[1..interval.len() - 1].split_once(',')?;
    let lo_v = parse_bound(lo)?;
    let hi_v = parse_bound(hi)?;
    if lo.trim() == "inf" || lo.trim() == "+inf" || hi.trim() == "-inf" {
        return None;
    }
    let (slope, offset) = parse_affine(expr)?;
    Some(Piece {
        lo: Bound {
            value: lo_v,
            closed: lo_closed,
        },
        hi: Bound {
            value: hi_v,
            closed: hi_closed,
        },
        slope,
        offset,
    })
}

/// Reads `x`, `x*c`, `c*x`, `-x`, constants and sums of these.
fn parse_affine(s: &str) -> Option<(Rat, Rat)> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, c) in s.chars().enumerate() {
        let after_op = cur.ends_with('*') || cur.ends_with('/');
        if (c == '+' || c == '-') && i > 0 && !after_op {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(c);
    }
    terms.push(cur);
    let (mut slope, mut offset) = (Rat::zero(), Rat::zero());
    for t in terms {
        let t = t.strip_prefix('+').unwrap_or(&t).to_string();
        if t.is_empty() {
            return None;
        }
        if t.contains('x') {
            let (neg, body) = match t.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, t.as_str()),
            };
            let coeff = if body == "x" {
                Rat::one()
            } else {
                parse_rat(body.strip_prefix("x*").or_else(|| body.strip_suffix("*x"))?)?
            };
            slope += if neg { -coeff } else { coeff };
        } else {
            offset += parse_rat(&t)?;
        }
    }
    Some((slope, offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::rational::{int, rat};

    fn no_tables(_: &str) -> Result<FunctionOracle> {
        Err(Error::Oracle("no tables here".into()))
    }

    #[test]
    fn parse_pieces() {
        let f = FunctionOracle::parse("pieces:[(-inf,0):x*-1; [0,inf):x]", &no_tables).unwrap();
        assert_eq!(f.eval_rat(&int(-2)).unwrap(), int(2));
        assert_eq!(f.eval_rat(&int(3)).unwrap(), int(3));
        assert_eq!(f.to_string(), "pieces:[(-inf,0):x*-1; [0,inf):x]");
        let g = FunctionOracle::parse("pieces:[(-inf,1]:2*x-1/2; (1,inf):-x+3]", &no_tables).unwrap();
        assert_eq!(g.eval_rat(&int(1)).unwrap(), rat(3, 2));
        assert_eq!(g.eval_rat(&int(2)).unwrap(), int(1));
    }

    #[test]
    fn rejects_bad_pieces() {
        for s in [
            "pieces:[(-inf,0):x*-1",
            "pieces:[(-inf,0):x; (0,inf):x]",
            "pieces:[(-inf,1):x; [0,inf):x]",
            "pieces:[(-inf,0]:x; [0,inf):x]",
            "pieces:[[0,inf):x]",
            "pieces:[(-inf,inf):y]",
        ] {
            assert!(FunctionOracle::parse(s, &no_tables).is_err(), "{s}");
        }
    }

    #[test]
    fn builtins() {
        let x = int(5);
        assert_eq!(FunctionOracle::parse("neg", &no_tables).unwrap().eval_rat(&x).unwrap(), int(-5));
        assert_eq!(FunctionOracle::parse("const:2/3", &no_tables).unwrap().eval_rat(&x).unwrap(), rat(2, 3));
        let c = FunctionOracle::parse("compose(neg,pieces:[(-inf,inf):x+1])", &no_tables).unwrap();
        assert_eq!(c.eval_rat(&x).unwrap(), int(-6));
        let pair = Point::Tuple(vec![rp(int(3)), rp(int(-1))]);
        assert_eq!(FunctionOracle::Min.eval(&pair).unwrap(), rp(int(-1)));
        assert_eq!(FunctionOracle::Max.eval(&pair).unwrap(), rp(int(3)));
        assert_eq!(FunctionOracle::Proj(0).eval(&pair).unwrap(), rp(int(3)));
        let a = FunctionOracle::parse("alpha(-1,5)", &no_tables).unwrap();
        assert_eq!(a.eval_rat(&int(-1)).unwrap(), int(5));
    }

    #[test]
    fn table_gaps() {
        let mut t = BTreeMap::new();
        t.insert(rp(int(0)), rp(int(1)));
        let f = FunctionOracle::table(t);
        assert_eq!(f.eval(&rp(int(0))).unwrap(), rp(int(1)));
        assert!(matches!(f.eval(&rp(int(1))), Err(Error::DomainGap(_))));
    }
}
