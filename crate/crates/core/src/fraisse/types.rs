//! Quantifier-free types of tuples: an equality pattern plus, for every symbol,
//! the index tuples where it holds.

use std::collections::{BTreeSet, HashMap};

use super::age::{members_of_size, AgeOracle};
use super::structure::{all_tuples, FiniteStructure, Signature};

/// Quantifier-free type of a `k`-tuple.
///
/// `classes[i]` is the block of position `i`, numbered by first occurrence.
/// `relations[s]` lists every index tuple over `0..k` where symbol `s` holds;
/// it is closed under replacing an index by an equal one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleType {
    classes: Vec<usize>,
    relations: Vec<BTreeSet<Vec<usize>>>,
}

/// Renumbers block labels by first occurrence.
pub fn normalize_classes(raw: &[usize]) -> Vec<usize> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    raw.iter()
        .map(|c| {
            let next = seen.len();
            *seen.entry(*c).or_insert(next)
        })
        .collect()
}

/// Restricted growth strings of length `k`, i.e. set partitions of `0..k`.
pub fn restricted_growth_strings(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for c in 0..=limit {
            prefix.push(c);
            go(prefix, max.max(c), k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, k, &mut out);
    out
}

impl TupleType {
    /// Builds a type from an equality pattern and a diagram on its blocks.
    pub fn from_diagram(classes: Vec<usize>, diagram: &FiniteStructure) -> Self {
        let classes = normalize_classes(&classes);
        let k = classes.len();
        let relations = diagram
            .signature()
            .symbols()
            .iter()
            .enumerate()
            .map(|(s, sym)| {
                all_tuples(k, sym.arity)
                    .filter(|t| {
                        let blocks: Vec<usize> = t.iter().map(|&i| classes[i]).collect();
                        diagram.holds(s, &blocks)
                    })
                    .collect()
            })
            .collect();
        TupleType { classes, relations }
    }

    /// Builds a type from its parts, checking consistency with the pattern.
    pub fn from_parts(classes: Vec<usize>, relations: Vec<BTreeSet<Vec<usize>>>) -> Option<Self> {
        let classes = normalize_classes(&classes);
        let k = classes.len();
        let reps = Self::representatives_of(&classes);
        for table in &relations {
            for t in table {
                if t.iter().any(|&i| i >= k) {
                    return None;
                }
                let canon: Vec<usize> = t.iter().map(|&i| reps[classes[i]]).collect();
                if !table.contains(&canon) {
                    return None;
                }
            }
        }
        Some(TupleType { classes, relations })
    }

    fn representatives_of(classes: &[usize]) -> Vec<usize> {
        let blocks = classes.iter().copied().max().map_or(0, |m| m + 1);
        let mut reps = vec![usize::MAX; blocks];
        for (i, &c) in classes.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = i;
            }
        }
        reps
    }

    pub fn arity(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn relations(&self) -> &[BTreeSet<Vec<usize>>] {
        &self.relations
    }

    pub fn block_count(&self) -> usize {
        self.classes.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// First position of every block.
    pub fn representatives(&self) -> Vec<usize> {
        Self::representatives_of(&self.classes)
    }

    /// Positions grouped by block, blocks in first-occurrence order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (i, &c) in self.classes.iter().enumerate() {
            blocks[c].push(i);
        }
        blocks
    }

    pub fn holds(&self, symbol: usize, tuple: &[usize]) -> bool {
        self.relations[symbol].contains(tuple)
    }

    /// The diagram of the type: a structure on its blocks.
    pub fn diagram(&self, signature: &Signature) -> FiniteStructure {
        let reps = self.representatives();
        let mut d = FiniteStructure::discrete(signature.clone(), reps.len());
        for (s, sym) in signature.symbols().iter().enumerate() {
            for t in all_tuples(reps.len(), sym.arity) {
                let positions: Vec<usize> = t.iter().map(|&b| reps[b]).collect();
                if self.holds(s, &positions) {
                    d.insert(s, t);
                }
            }
        }
        d
    }

    /// Type of `(t_{sigma(0)}, ..., t_{sigma(j-1)})` given the type of `t`.
    pub fn reindex(&self, sigma: &[usize]) -> TupleType {
        assert!(sigma.iter().all(|&i| i < self.arity()), "reindex map out of range");
        let classes = normalize_classes(&sigma.iter().map(|&i| self.classes[i]).collect::<Vec<_>>());
        let j = sigma.len();
        let relations = self
            .relations
            .iter()
            .map(|table| {
                let arity = table.iter().next().map(|t| t.len());
                match arity {
                    None => BTreeSet::new(),
                    Some(r) => all_tuples(j, r)
                        .filter(|u| {
                            let mapped: Vec<usize> = u.iter().map(|&i| sigma[i]).collect();
                            table.contains(&mapped)
                        })
                        .collect(),
                }
            })
            .collect();
        TupleType { classes, relations }
    }

    /// Order-pattern rendering such as `1<2=3`, for types whose only relation
    /// is a strict linear order on the blocks.
    pub fn order_pattern(&self) -> Option<String> {
        if self.relations.len() != 1 {
            return None;
        }
        let reps = self.representatives();
        let mut blocks = self.blocks();
        blocks.sort_by(|a, b| {
            let (x, y) = (reps[self.classes[a[0]]], reps[self.classes[b[0]]]);
            if x == y {
                std::cmp::Ordering::Equal
            } else if self.holds(0, &[x, y]) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        let parts: Vec<String> = blocks
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("="))
            .collect();
        Some(parts.join("<"))
    }

    /// Parses an order pattern such as `2<1=3`.
    pub fn parse_order_pattern(s: &str) -> Option<TupleType> {
        let mut order_of: Vec<(usize, usize)> = Vec::new();
        for (rank, block) in s.trim().split('<').enumerate() {
            for idx in block.split('=') {
                let i: usize = idx.trim().parse().ok()?;
                order_of.push((i.checked_sub(1)?, rank));
            }
        }
        let k = order_of.len();
        let mut rank = vec![usize::MAX; k];
        for (i, r) in order_of {
            if i >= k || rank[i] != usize::MAX {
                return None;
            }
            rank[i] = r;
        }
        let table = all_tuples(k, 2).filter(|t| rank[t[0]] < rank[t[1]]).collect();
        Some(TupleType {
            classes: normalize_classes(&rank),
            relations: vec![table],
        })
    }

    /// Generic rendering: blocks in first-occurrence order joined by `|`, then
    /// one `NAME(i,j)(..)` group per non-empty symbol over block representatives.
    pub fn generic_string(&self, signature: &Signature) -> String {
        let mut out: Vec<String> = vec![self
            .blocks()
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("="))
            .collect::<Vec<_>>()
            .join("|")];
        let reps: BTreeSet<usize> = self.representatives().into_iter().collect();
        for (s, sym) in signature.symbols().iter().enumerate() {
            let tuples: Vec<String> = self.relations[s]
                .iter()
                .filter(|t| t.iter().all(|i| reps.contains(i)))
                .map(|t| format!("({})", t.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            if !tuples.is_empty() {
                out.push(format!("{}{}", sym.name, tuples.concat()));
            }
        }
        out.join(" ")
    }

    pub fn parse_generic(s: &str, signature: &Signature) -> Option<TupleType> {
        let mut tokens = s.split_whitespace();
        let pattern = tokens.next()?;
        let mut class_of: Vec<Option<usize>> = Vec::new();
        for (b, block) in pattern.split('|').enumerate() {
            for idx in block.split('=') {
                let i = idx.parse::<usize>().ok()?.checked_sub(1)?;
                if i >= class_of.len() {
                    class_of.resize(i + 1, None);
                }
                if class_of[i].is_some() {
                    return None;
                }
                class_of[i] = Some(b);
            }
        }
        let raw: Vec<usize> = class_of.into_iter().collect::<Option<Vec<_>>>()?;
        let classes = normalize_classes(&raw);
        if classes != raw {
            return None;
        }
        let reps = Self::representatives_of(&classes);
        let mut on_reps: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); signature.len()];
        for tok in tokens {
            let open = tok.find('(')?;
            let (name, rest) = tok.split_at(open);
            let s = signature.index_of(name)?;
            let arity = signature.symbols()[s].arity;
            let body = rest.strip_prefix('(')?.strip_suffix(')')?;
            for group in body.split(")(") {
                let t: Vec<usize> = group
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().ok().and_then(|v| v.checked_sub(1)))
                    .collect::<Option<Vec<_>>>()?;
                if t.len() != arity || t.iter().any(|&i| i >= classes.len() || reps[classes[i]] != i) {
                    return None;
                }
                if !on_reps[s].insert(t) {
                    return None;
                }
            }
        }
        let k = classes.len();
        let relations = signature
            .symbols()
            .iter()
            .enumerate()
            .map(|(s, sym)| {
                all_tuples(k, sym.arity)
                    .filter(|t| {
                        let canon: Vec<usize> = t.iter().map(|&i| reps[classes[i]]).collect();
                        on_reps[s].contains(&canon)
                    })
                    .collect()
            })
            .collect();
        Some(TupleType { classes, relations })
    }
}

/// Every admissible type of arity `k`: each equality pattern paired with every
/// labelled member of the age on its blocks. Sorted.
pub fn enumerate_types(age: &AgeOracle, k: usize) -> Vec<TupleType> {
    let mut members: HashMap<usize, Vec<FiniteStructure>> = HashMap::new();
    let mut out = Vec::new();
    for classes in restricted_growth_strings(k) {
        let blocks = classes.iter().copied().max().map_or(0, |m| m + 1);
        let diagrams = members.entry(blocks).or_insert_with(|| members_of_size(age, blocks));
        for d in diagrams.iter() {
            out.push(TupleType::from_diagram(classes.clone(), d));
        }
    }
    out.sort();
    out
}
