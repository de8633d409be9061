//! Relational signatures and finite structures over index sets `0..size`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(name, arity)| Symbol {
                name: name.into(),
                arity,
            })
            .collect();
        let mut seen = HashSet::new();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::Signature(format!("symbol {} has arity 0", s.name)));
            }
            if s.name.is_empty() || s.name.contains(|c: char| c.is_whitespace() || "(),;".contains(c)) {
                return Err(Error::Signature(format!("bad symbol name {:?}", s.name)));
            }
            if !seen.insert(s.name.clone()) {
                return Err(Error::Signature(format!("duplicate symbol {}", s.name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn order() -> Self {
        Signature::new([("<", 2)]).expect("static signature")
    }

    pub fn graph() -> Self {
        Signature::new([("E", 2)]).expect("static signature")
    }

    pub fn ordered_graph() -> Self {
        Signature::new([("<", 2), ("E", 2)]).expect("static signature")
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// True for the signature of a single binary `<`.
    pub fn is_order(&self) -> bool {
        self.symbols.len() == 1 && self.symbols[0].name == "<" && self.symbols[0].arity == 2
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .symbols
            .iter()
            .map(|s| format!("{}/{}", s.name, s.arity))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// All tuples of length `arity` over `0..n` in lexicographic order.
pub fn all_tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if arity == 0 { 1 } else { n.checked_pow(arity as u32).unwrap_or(0) };
    (0..total).map(move |mut code| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = code % n.max(1);
            code /= n.max(1);
        }
        t
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteStructure {
    signature: Signature,
    size: usize,
    tables: Vec<BTreeSet<Vec<usize>>>,
}

impl FiniteStructure {
    pub fn empty(signature: Signature) -> Self {
        let tables = vec![BTreeSet::new(); signature.len()];
        FiniteStructure {
            signature,
            size: 0,
            tables,
        }
    }

    /// Structure with `size` points and no relation tuples.
    pub fn discrete(signature: Signature, size: usize) -> Self {
        let mut s = FiniteStructure::empty(signature);
        s.size = size;
        s
    }

    pub fn new(signature: Signature, size: usize, tables: Vec<BTreeSet<Vec<usize>>>) -> Result<Self> {
        if tables.len() != signature.len() {
            return Err(Error::Structure(format!(
                "{} tables for {} symbols",
                tables.len(),
                signature.len()
            )));
        }
        for (sym, table) in signature.symbols().iter().zip(&tables) {
            for t in table {
                if t.len() != sym.arity {
                    return Err(Error::Structure(format!("tuple {t:?} has wrong arity for {}", sym.name)));
                }
                if t.iter().any(|&i| i >= size) {
                    return Err(Error::Structure(format!("tuple {t:?} out of range for size {size}")));
                }
            }
        }
        Ok(FiniteStructure {
            signature,
            size,
            tables,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self, symbol: usize) -> &BTreeSet<Vec<usize>> {
        &self.tables[symbol]
    }

    pub fn tables(&self) -> &[BTreeSet<Vec<usize>>] {
        &self.tables
    }

    pub fn holds(&self, symbol: usize, tuple: &[usize]) -> bool {
        self.tables[symbol].contains(tuple)
    }

    pub fn insert(&mut self, symbol: usize, tuple: Vec<usize>) {
        debug_assert_eq!(tuple.len(), self.signature.symbols()[symbol].arity);
        debug_assert!(tuple.iter().all(|&i| i < self.size));
        self.tables[symbol].insert(tuple);
    }

    /// Appends a point with no relations.
    pub fn push_point(&mut self) -> usize {
        self.size += 1;
        self.size - 1
    }

    /// Induced substructure on `points`, relabelled so that `points[i]` becomes `i`.
    /// Repeated points are not allowed.
    pub fn induced(&self, points: &[usize]) -> FiniteStructure {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &p) in points.iter().enumerate() {
            pos[p] = i;
        }
        let tables = self
            .tables
            .iter()
            .map(|table| {
                table
                    .iter()
                    .filter(|t| t.iter().all(|&i| pos[i] != usize::MAX))
                    .map(|t| t.iter().map(|&i| pos[i]).collect())
                    .collect()
            })
            .collect();
        FiniteStructure {
            signature: self.signature.clone(),
            size: points.len(),
            tables,
        }
    }

    /// The structure obtained by renaming point `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> FiniteStructure {
        let tables = self
            .tables
            .iter()
            .map(|table| {
                table
                    .iter()
                    .map(|t| t.iter().map(|&i| perm[i]).collect())
                    .collect()
            })
            .collect();
        FiniteStructure {
            signature: self.signature.clone(),
            size: self.size,
            tables,
        }
    }

    /// Drops the point `p`, shifting later points down.
    pub fn without_point(&self, p: usize) -> FiniteStructure {
        let keep: Vec<usize> = (0..self.size).filter(|&i| i != p).collect();
        self.induced(&keep)
    }
}

/// Searches for an isomorphism `a -> b`; returns the image of each point of `a`.
pub fn find_isomorphism(a: &FiniteStructure, b: &FiniteStructure) -> Option<Vec<usize>> {
    if a.size() != b.size() || a.signature() != b.signature() {
        return None;
    }
    if a.tables().iter().zip(b.tables()).any(|(x, y)| x.len() != y.len()) {
        return None;
    }
    let (pa, pb) = (point_profiles(a), point_profiles(b));
    let mut map = Vec::with_capacity(a.size());
    let mut used = vec![false; b.size()];
    let allowed = |i: usize, j: usize| pa[i] == pb[j];
    if embed_from(a, b, &mut map, &mut used, &allowed) {
        Some(map)
    } else {
        None
    }
}

/// Per point: for each symbol and argument position, how many tuples put the
/// point there. Isomorphisms preserve it.
fn point_profiles(s: &FiniteStructure) -> Vec<Vec<usize>> {
    let mut prof = vec![Vec::new(); s.size()];
    for (sym, table) in s.signature().symbols().iter().zip(s.tables()) {
        for pos in 0..sym.arity {
            let mut counts = vec![0; s.size()];
            for t in table {
                counts[t[pos]] += 1;
            }
            for (p, c) in counts.into_iter().enumerate() {
                prof[p].push(c);
            }
        }
    }
    prof
}

/// True when `small` is isomorphic to an induced substructure of `big`.
pub fn embeds_into(small: &FiniteStructure, big: &FiniteStructure) -> bool {
    if small.size() > big.size() || small.signature() != big.signature() {
        return false;
    }
    let mut map = Vec::with_capacity(small.size());
    let mut used = vec![false; big.size()];
    embed_from(small, big, &mut map, &mut used, &|_, _| true)
}

fn embed_from(
    a: &FiniteStructure,
    b: &FiniteStructure,
    map: &mut Vec<usize>,
    used: &mut [bool],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> bool {
    let next = map.len();
    if next == a.size() {
        return true;
    }
    for cand in 0..b.size() {
        if used[cand] || !allowed(next, cand) {
            continue;
        }
        map.push(cand);
        if consistent_at(a, b, map) {
            used[cand] = true;
            if embed_from(a, b, map, used, allowed) {
                return true;
            }
            used[cand] = false;
        }
        map.pop();
    }
    false
}

/// Checks every tuple over `0..map.len()` that mentions the last mapped point.
fn consistent_at(a: &FiniteStructure, b: &FiniteStructure, map: &[usize]) -> bool {
    let last = map.len() - 1;
    for (s, sym) in a.signature().symbols().iter().enumerate() {
        for t in all_tuples(map.len(), sym.arity) {
            if !t.contains(&last) {
                continue;
            }
            let image: Vec<usize> = t.iter().map(|&i| map[i]).collect();
            if a.holds(s, &t) != b.holds(s, &image) {
                return false;
            }
        }
    }
    true
}
