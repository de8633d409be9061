//! Extraction of canonical functions from arbitrary ones.
//!
//! The search builds a tower of type-preserving partial embeddings `a` of the
//! source, one enumerated domain point per level, so that `f a` induces a
//! conflict-free behavior on every tuple of arity at most `K`. Images are
//! tried in enumeration order among the first `h` elements of the base limit,
//! column by column for powers, so the first tower found is the
//! enumeration-least one.

use std::fmt;
use std::sync::Arc;

use crate::behavior::{entry_consistent, BehaviorTable};
use crate::canonicity::{check_canonical_on, Verdict};
use crate::error::{Error, Result};
use crate::fraisse::limit::check_arity;
use crate::fraisse::structure::all_tuples;
use crate::fraisse::{Element, LimitStructure};
use crate::group::{automorphism_extending, GroupPresentation, OrbitLabel, PartialAutomorphism, Point};
use crate::oracle::FunctionOracle;

/// Search nodes (candidate images tried) before a run gives up.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 20;

/// Nested partial embeddings: level `l` is the map on the first `l` domain
/// points, so every level extends the previous one.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTower {
    group: GroupPresentation,
    pairs: Vec<(Point, Point)>,
}

impl EmbeddingTower {
    pub fn depth(&self) -> usize {
        self.pairs.len()
    }

    pub fn group(&self) -> &GroupPresentation {
        &self.group
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    pub fn level(&self, l: usize) -> &[(Point, Point)] {
        &self.pairs[..l.min(self.pairs.len())]
    }

    /// Certifies the top level (and hence every level) as a partial
    /// automorphism of the source.
    pub fn certify(&self) -> Result<PartialAutomorphism> {
        automorphism_extending(&self.group, &self.pairs)
    }

    /// Every level is certified on its own.
    pub fn levels_certified(&self) -> bool {
        (0..=self.depth()).all(|l| automorphism_extending(&self.group, self.level(l)).is_ok())
    }
}

impl fmt::Display for EmbeddingTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, y) in &self.pairs {
            writeln!(f, "{x} -> {y}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalApproximation {
    pub behavior: BehaviorTable,
    pub tower: EmbeddingTower,
    /// `x -> f(a(x))` on the domain of the tower.
    pub sample: Vec<(Point, Point)>,
    pub certificate: Verdict,
    /// `c -> f(a(c))` for the stabilizer constants.
    pub constants: Vec<(Point, Point)>,
    oracle: FunctionOracle,
}

impl CanonicalApproximation {
    /// `f` composed with the certified germ of the tower.
    pub fn sample_oracle(&self) -> &FunctionOracle {
        &self.oracle
    }

    /// The sample agrees with `f` on the constants.
    pub fn agrees_at_constants(&self, f: &FunctionOracle) -> Result<bool> {
        for (c, v) in &self.constants {
            if f.eval(c)? != *v {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn report(&self) -> String {
        let mut out = format!("result: canonical-approximation\nbehavior:\n{}", self.behavior);
        out += &format!("tower:\n{}", self.tower);
        out += "sample:\n";
        for (x, y) in &self.sample {
            out += &format!("{x} -> {y}\n");
        }
        out += &format!(
            "certificate: {}\n",
            if self.certificate.is_canonical() { "canonical-up-to" } else { "counterexample" }
        );
        out
    }
}

#[derive(Clone, Debug)]
pub enum CanonizeOutcome {
    Approximation(Box<CanonicalApproximation>),
    /// Inconclusive: no tower of the requested depth inside the horizon, or
    /// the node budget ran out first.
    HorizonExhausted {
        nodes: usize,
        deepest: usize,
        budget_hit: bool,
    },
}

impl CanonizeOutcome {
    pub fn approximation(&self) -> Option<&CanonicalApproximation> {
        match self {
            CanonizeOutcome::Approximation(a) => Some(a),
            CanonizeOutcome::HorizonExhausted { .. } => None,
        }
    }
}

struct Search<'a> {
    f: &'a FunctionOracle,
    g: &'a GroupPresentation,
    h: &'a GroupPresentation,
    limit: Arc<LimitStructure>,
    binary: bool,
    domain: Vec<Point>,
    candidates: Vec<Element>,
    new_tuples: Vec<Vec<(usize, Vec<usize>, OrbitLabel)>>,
    germs: Vec<Vec<(Element, Element)>>,
    alpha: Vec<Point>,
    images: Vec<Point>,
    table: BehaviorTable,
    nodes: usize,
    budget: usize,
    deepest: usize,
    budget_hit: bool,
}

impl Search<'_> {
    fn level(&mut self, l: usize) -> Result<bool> {
        self.deepest = self.deepest.max(l);
        if l == self.domain.len() {
            return Ok(true);
        }
        let leaves: Vec<Element> = self.domain[l].leaves().into_iter().cloned().collect();
        let open: Vec<usize> = (0..leaves.len())
            .filter(|&i| !self.germs[i].iter().any(|(x, _)| *x == leaves[i]))
            .collect();
        self.assign(l, &leaves, &open, 0)
    }

    fn assign(&mut self, l: usize, leaves: &[Element], open: &[usize], j: usize) -> Result<bool> {
        if j == open.len() {
            return self.close_level(l, leaves);
        }
        let col = open[j];
        for ci in 0..self.candidates.len() {
            if self.nodes >= self.budget {
                self.budget_hit = true;
                return Ok(false);
            }
            self.nodes += 1;
            let y = self.candidates[ci].clone();
            if !self.admissible(col, &leaves[col], &y)? {
                continue;
            }
            self.germs[col].push((leaves[col].clone(), y));
            let found = self.assign(l, leaves, open, j + 1)?;
            if found {
                return Ok(true);
            }
            self.germs[col].pop();
            if self.budget_hit {
                return Ok(false);
            }
        }
        Ok(false)
    }

    fn admissible(&self, col: usize, x: &Element, y: &Element) -> Result<bool> {
        let germ = &self.germs[col];
        if germ.iter().any(|(_, b)| b == y) {
            return Ok(false);
        }
        if !self.binary {
            let mut dom: Vec<Element> = germ.iter().map(|(a, _)| a.clone()).collect();
            let mut ran: Vec<Element> = germ.iter().map(|(_, b)| b.clone()).collect();
            dom.push(x.clone());
            ran.push(y.clone());
            return Ok(self.limit.qf_type(&dom)? == self.limit.qf_type(&ran)?);
        }
        let sig = self.limit.signature();
        for (s, sym) in sig.symbols().iter().enumerate() {
            if sym.arity == 1 {
                if self.limit.eval_relation(s, std::slice::from_ref(x))? != self.limit.eval_relation(s, std::slice::from_ref(y))? {
                    return Ok(false);
                }
                continue;
            }
            if self.limit.eval_relation(s, &[x.clone(), x.clone()])?
                != self.limit.eval_relation(s, &[y.clone(), y.clone()])?
            {
                return Ok(false);
            }
            for (a, b) in germ {
                if self.limit.eval_relation(s, &[x.clone(), a.clone()])?
                    != self.limit.eval_relation(s, &[y.clone(), b.clone()])?
                    || self.limit.eval_relation(s, &[a.clone(), x.clone()])?
                        != self.limit.eval_relation(s, &[b.clone(), y.clone()])?
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn close_level(&mut self, l: usize, leaves: &[Element]) -> Result<bool> {
        let image_leaves: Vec<Element> = leaves
            .iter()
            .enumerate()
            .map(|(i, x)| {
                self.germs[i]
                    .iter()
                    .find(|(a, _)| a == x)
                    .map(|(_, b)| b.clone())
                    .expect("every leaf is assigned")
            })
            .collect();
        let point = self.g.assemble(&image_leaves);
        let value = self.f.eval(&point)?;
        self.alpha.push(point);
        self.images.push(value);
        let saved = self.table.clone();
        let mut ok = true;
        for (k, t, src) in &self.new_tuples[l] {
            let img: Vec<Point> = t.iter().map(|&i| self.images[i].clone()).collect();
            let img = self.h.orbit_label(&img)?;
            match self.table.get(src) {
                Some(want) if *want == img => {}
                Some(_) => ok = false,
                None if entry_consistent(&self.table, *k, src, &img) => self.table.insert(src.clone(), img)?,
                None => ok = false,
            }
            if !ok {
                break;
            }
        }
        if ok && self.level(l + 1)? {
            return Ok(true);
        }
        self.table = saved;
        self.alpha.pop();
        self.images.pop();
        Ok(false)
    }
}

/// Runs the tower search on an explicit domain and candidate list.
pub fn canonize_within(
    f: &FunctionOracle,
    g: &GroupPresentation,
    h: &GroupPresentation,
    arity: usize,
    domain: Vec<Point>,
    candidates: Vec<Element>,
    budget: usize,
) -> Result<CanonizeOutcome> {
    check_arity(arity)?;
    for p in &domain {
        g.check_point(p)?;
    }
    let limit = g.limit().clone();
    let binary = limit.signature().symbols().iter().all(|s| s.arity <= 2);
    let cols = g.columns();
    let mut germs: Vec<Vec<(Element, Element)>> = vec![Vec::new(); cols];
    for c in g.constants() {
        for (i, e) in c.leaves().into_iter().enumerate() {
            if !germs[i].iter().any(|(x, _)| x == e) {
                germs[i].push((e.clone(), e.clone()));
            }
        }
    }
    let mut new_tuples = Vec::with_capacity(domain.len());
    for l in 0..domain.len() {
        let mut level = Vec::new();
        for k in 1..=arity {
            for t in all_tuples(l + 1, k) {
                if t.contains(&l) {
                    let pts: Vec<Point> = t.iter().map(|&i| domain[i].clone()).collect();
                    level.push((k, t, g.orbit_label(&pts)?));
                }
            }
        }
        new_tuples.push(level);
    }
    let mut search = Search {
        f,
        g,
        h,
        limit,
        binary,
        domain,
        candidates,
        new_tuples,
        germs,
        alpha: Vec::new(),
        images: Vec::new(),
        table: BehaviorTable::new(g.clone(), h.clone(), arity),
        nodes: 0,
        budget,
        deepest: 0,
        budget_hit: false,
    };
    if !search.level(0)? {
        return Ok(CanonizeOutcome::HorizonExhausted {
            nodes: search.nodes,
            deepest: search.deepest,
            budget_hit: search.budget_hit,
        });
    }
    let tower = EmbeddingTower {
        group: g.clone(),
        pairs: search.domain.iter().cloned().zip(search.alpha.iter().cloned()).collect(),
    };
    let germ = tower.certify()?;
    let oracle = FunctionOracle::compose(f.clone(), FunctionOracle::Germ(Arc::new(germ)));
    let certificate = check_canonical_on(&oracle, g, h, &search.domain, arity)?;
    let sample = search
        .domain
        .iter()
        .map(|x| Ok((x.clone(), oracle.eval(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let constants = g
        .constants()
        .iter()
        .map(|c| Ok((c.clone(), oracle.eval(c)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonizeOutcome::Approximation(Box::new(CanonicalApproximation {
        behavior: search.table,
        tower,
        sample,
        certificate,
        constants,
        oracle,
    })))
}

/// Searches for a depth-`depth` tower with images among the first `horizon`
/// base elements.
pub fn canonize(
    f: &FunctionOracle,
    g: &GroupPresentation,
    h: &GroupPresentation,
    arity: usize,
    depth: usize,
    horizon: usize,
) -> Result<CanonizeOutcome> {
    let domain = g.domain_prefix(depth)?;
    let candidates = g.limit().elements(horizon)?;
    canonize_within(f, g, h, arity, domain, candidates, DEFAULT_NODE_BUDGET)
}

/// The source and target groups for an `m`-ary `f` over the dense order
/// with the given constants: the stabilizer of the constants in the `m`-th
/// power, and the stabilizer of their images.
pub fn constant_groups(
    f: &FunctionOracle,
    m: usize,
    constants: &[Point],
) -> Result<(GroupPresentation, GroupPresentation)> {
    if m == 0 {
        return Err(Error::Presentation("arity of f must be positive".into()));
    }
    let base = GroupPresentation::aut_dlo();
    let power = if m == 1 {
        base.clone()
    } else {
        GroupPresentation::power(base.clone(), m)?
    };
    if constants.is_empty() {
        return Ok((power, base));
    }
    let images = constants.iter().map(|c| f.eval(c)).collect::<Result<Vec<_>>>()?;
    Ok((
        GroupPresentation::stabilizer(power, constants.to_vec())?,
        GroupPresentation::stabilizer(base, images)?,
    ))
}

/// [`canonize`] for an `m`-ary `f` with every column embedding fixing the
/// constants pointwise.
pub fn canonize_with_constants(
    f: &FunctionOracle,
    m: usize,
    constants: &[Point],
    arity: usize,
    depth: usize,
    horizon: usize,
) -> Result<CanonizeOutcome> {
    let (g, h) = constant_groups(f, m, constants)?;
    canonize(f, &g, &h, arity, depth, horizon)
}
