//! Canonicity at a finite horizon, local equality modulo a group, coherent
//! towers of joint labels, and a harness comparing three finite proxies of
//! canonicity.
//!
//! A function is canonical when tuples in one source orbit are sent into one
//! target orbit. Within a horizon this is checked on every tuple of arity at
//! most `K` over the first `n` domain points: tuples are visited by arity and
//! then lexicographically by index, and each is compared with the first tuple
//! that had the same source label.

use std::collections::BTreeMap;
use std::fmt;

use crate::behavior::{coherence_check, BehaviorTable};
use crate::error::{Error, Result};
use crate::fraisse::limit::check_arity;
use crate::fraisse::structure::all_tuples;
use crate::group::{automorphism_extending, GroupPresentation, OrbitLabel, Point};
use crate::oracle::FunctionOracle;

/// Two tuples with one source label whose images have different labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub s: Vec<Point>,
    pub t: Vec<Point>,
    pub source_label: String,
    pub image_s: Vec<Point>,
    pub image_t: Vec<Point>,
    pub label_s: String,
    pub label_t: String,
}

fn tuple_string(t: &[Point]) -> String {
    format!("({})", t.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} and {} share label {} but map to {} ({}) and {} ({})",
            tuple_string(&self.s),
            tuple_string(&self.t),
            self.source_label,
            tuple_string(&self.image_s),
            self.label_s,
            tuple_string(&self.image_t),
            self.label_t
        )
    }
}

impl Counterexample {
    /// Recomputes the claim from scratch: equal source labels, different
    /// image labels, images as recorded.
    pub fn recheck(&self, f: &FunctionOracle, g: &GroupPresentation, h: &GroupPresentation) -> Result<bool> {
        let fs = self.s.iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?;
        let ft = self.t.iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?;
        Ok(fs == self.image_s
            && ft == self.image_t
            && g.same_orbit(&self.s, &self.t)?
            && !h.same_orbit(&fs, &ft)?)
    }

    /// Block form for reports.
    pub fn report(&self) -> String {
        format!(
            "verdict: counterexample\nwitness_s: {}\nwitness_t: {}\nsource_label: {}\nimage_s: {}\nimage_label_s: {}\nimage_t: {}\nimage_label_t: {}\n",
            tuple_string(&self.s),
            tuple_string(&self.t),
            self.source_label,
            tuple_string(&self.image_s),
            self.label_s,
            tuple_string(&self.image_t),
            self.label_t
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Not conclusive: every tuple within the horizon behaves canonically.
    CanonicalUpTo {
        horizon: usize,
        arity: usize,
        behavior: BehaviorTable,
    },
    /// Conclusive refutation.
    Counterexample(Box<Counterexample>),
}

impl Verdict {
    pub fn is_canonical(&self) -> bool {
        matches!(self, Verdict::CanonicalUpTo { .. })
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Counterexample(c) => Some(c),
            Verdict::CanonicalUpTo { .. } => None,
        }
    }

    pub fn behavior(&self) -> Option<&BehaviorTable> {
        match self {
            Verdict::CanonicalUpTo { behavior, .. } => Some(behavior),
            Verdict::Counterexample(_) => None,
        }
    }

    pub fn report(&self) -> String {
        match self {
            Verdict::CanonicalUpTo {
                horizon,
                arity,
                behavior,
            } => format!("verdict: canonical-up-to\nhorizon: {horizon}\narity: {arity}\nbehavior:\n{behavior}"),
            Verdict::Counterexample(c) => c.report(),
        }
    }
}

pub(crate) fn images(f: &FunctionOracle, domain: &[Point]) -> Result<Vec<Point>> {
    domain.iter().map(|p| f.eval(p)).collect()
}

/// Checks canonicity on every tuple of arity `<= arity` over `domain`.
pub fn check_canonical_on(
    f: &FunctionOracle,
    g: &GroupPresentation,
    h: &GroupPresentation,
    domain: &[Point],
    arity: usize,
) -> Result<Verdict> {
    check_arity(arity)?;
    let image = images(f, domain)?;
    let mut behavior = BehaviorTable::new(g.clone(), h.clone(), arity);
    let mut first: BTreeMap<OrbitLabel, Vec<usize>> = BTreeMap::new();
    for k in 1..=arity {
        for idx in all_tuples(domain.len(), k) {
            let t: Vec<Point> = idx.iter().map(|&i| domain[i].clone()).collect();
            let ft: Vec<Point> = idx.iter().map(|&i| image[i].clone()).collect();
            let src = g.orbit_label(&t)?;
            let img = h.orbit_label(&ft)?;
            match behavior.get(&src) {
                None => {
                    behavior.insert(src.clone(), img)?;
                    first.insert(src, idx);
                }
                Some(expected) if *expected == img => {}
                Some(expected) => {
                    let rep = &first[&src];
                    return Ok(Verdict::Counterexample(Box::new(Counterexample {
                        s: rep.iter().map(|&i| domain[i].clone()).collect(),
                        image_s: rep.iter().map(|&i| image[i].clone()).collect(),
                        t,
                        image_t: ft,
                        source_label: g.format_label(&src),
                        label_s: h.format_label(expected),
                        label_t: h.format_label(&img),
                    })));
                }
            }
        }
    }
    Ok(Verdict::CanonicalUpTo {
        horizon: domain.len(),
        arity,
        behavior,
    })
}

/// Checks canonicity on the first `horizon` domain points of `g`.
pub fn check_canonical(
    f: &FunctionOracle,
    g: &GroupPresentation,
    h: &GroupPresentation,
    horizon: usize,
    arity: usize,
) -> Result<Verdict> {
    check_canonical_on(f, g, h, &g.domain_prefix(horizon)?, arity)
}

/// The behavior induced within the horizon, or `NotCanonical`.
pub fn behavior_of(
    f: &FunctionOracle,
    g: &GroupPresentation,
    h: &GroupPresentation,
    horizon: usize,
    arity: usize,
) -> Result<BehaviorTable> {
    match check_canonical(f, g, h, horizon, arity)? {
        Verdict::CanonicalUpTo { behavior, .. } => Ok(behavior),
        Verdict::Counterexample(c) => Err(Error::NotCanonical(c)),
    }
}

/// True when `f` and `g` send the enumeration of `set` into one orbit of `h`.
pub fn local_equal(f: &FunctionOracle, g: &FunctionOracle, set: &[Point], h: &GroupPresentation) -> Result<bool> {
    Ok(h.orbit_label(&images(f, set)?)? == h.orbit_label(&images(g, set)?)?)
}

/// Labels of the image of growing prefixes of a domain under one function.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeTower {
    pub sizes: Vec<usize>,
    pub labels: Vec<OrbitLabel>,
}

pub fn type_tower(f: &FunctionOracle, h: &GroupPresentation, domain: &[Point]) -> Result<TypeTower> {
    let image = images(f, domain)?;
    let mut tower = TypeTower {
        sizes: Vec::new(),
        labels: Vec::new(),
    };
    for n in 1..=domain.len() {
        tower.sizes.push(n);
        tower.labels.push(h.orbit_label(&image[..n])?);
    }
    Ok(tower)
}

impl TypeTower {
    /// Each level restricts to the previous one.
    pub fn is_coherent(&self, h: &GroupPresentation) -> bool {
        self.labels.windows(2).zip(self.sizes.iter()).all(|(w, &n)| {
            let prefix: Vec<usize> = (0..n).collect();
            h.reindex(&w[1], &prefix) == w[0]
        })
    }
}

/// One level of a tower witness over the first `size` domain points.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerLevel {
    pub size: usize,
    /// Label of the concatenation `f_0(F) f_1(F) ..`: the type `e` must keep.
    pub joint: OrbitLabel,
    /// Label of `g_i(F)` for each pair, equal to the `i`-th block of `joint`.
    pub blocks: Vec<OrbitLabel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerWitness {
    pub pairs: usize,
    pub levels: Vec<TowerLevel>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TowerOutcome {
    Witness(TowerWitness),
    LocalFailure { pair: usize, set: Vec<Point> },
}

impl TowerOutcome {
    pub fn witness(&self) -> Option<&TowerWitness> {
        match self {
            TowerOutcome::Witness(w) => Some(w),
            TowerOutcome::LocalFailure { .. } => None,
        }
    }
}

fn block_positions(size: usize, i: usize) -> Vec<usize> {
    (i * size..(i + 1) * size).collect()
}

/// Builds the joint-label tower for `pairs` over growing prefixes of
/// `domain`, or reports the first pair and prefix where `f_i` and `g_i` are
/// not locally equal. The common map `e` fixes the joint label of the
/// `f`-images at each level, and each `e_i` is then determined by its block,
/// so the level-by-level search never needs to branch.
pub fn tower_witness_on(
    pairs: &[(FunctionOracle, FunctionOracle)],
    h: &GroupPresentation,
    domain: &[Point],
) -> Result<TowerOutcome> {
    let fs = pairs.iter().map(|(f, _)| images(f, domain)).collect::<Result<Vec<_>>>()?;
    let gs = pairs.iter().map(|(_, g)| images(g, domain)).collect::<Result<Vec<_>>>()?;
    let mut levels = Vec::with_capacity(domain.len());
    for size in 1..=domain.len() {
        let mut joint_tuple = Vec::with_capacity(size * pairs.len());
        let mut blocks = Vec::with_capacity(pairs.len());
        for i in 0..pairs.len() {
            let f_block = h.orbit_label(&fs[i][..size])?;
            let g_block = h.orbit_label(&gs[i][..size])?;
            if f_block != g_block {
                return Ok(TowerOutcome::LocalFailure {
                    pair: i,
                    set: domain[..size].to_vec(),
                });
            }
            joint_tuple.extend_from_slice(&fs[i][..size]);
            blocks.push(g_block);
        }
        levels.push(TowerLevel {
            size,
            joint: h.orbit_label(&joint_tuple)?,
            blocks,
        });
    }
    Ok(TowerOutcome::Witness(TowerWitness {
        pairs: pairs.len(),
        levels,
    }))
}

/// [`tower_witness_on`] over the first `depth` points of `g`.
pub fn tower_witness(
    pairs: &[(FunctionOracle, FunctionOracle)],
    g: &GroupPresentation,
    h: &GroupPresentation,
    depth: usize,
) -> Result<TowerOutcome> {
    tower_witness_on(pairs, h, &g.domain_prefix(depth)?)
}

impl TowerWitness {
    /// Independent re-check: every level restricts to the previous one, and
    /// every block of the joint label equals the recorded block label.
    pub fn is_coherent(&self, h: &GroupPresentation) -> bool {
        for (ell, level) in self.levels.iter().enumerate() {
            for (i, block) in level.blocks.iter().enumerate() {
                if h.reindex(&level.joint, &block_positions(level.size, i)) != *block {
                    return false;
                }
            }
            if ell == 0 {
                continue;
            }
            let prev = &self.levels[ell - 1];
            let sigma: Vec<usize> = (0..self.pairs)
                .flat_map(|i| (0..prev.size).map(move |j| i * level.size + j))
                .collect();
            if h.reindex(&level.joint, &sigma) != prev.joint {
                return false;
            }
        }
        true
    }
}

/// Outcome of one proxy over all seeds: the first failing seed, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxyResult {
    pub seeds: usize,
    pub first_failure: Option<(Vec<Point>, Vec<Point>)>,
}

impl ProxyResult {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnessReport {
    pub canonical: Verdict,
    pub local: ProxyResult,
    pub tower: ProxyResult,
}

impl HarnessReport {
    pub fn agree(&self) -> bool {
        let c = self.canonical.is_canonical();
        c == self.local.passed() && c == self.tower.passed()
    }

    /// The counterexample pair `(s, t)` is also the first failing seed of
    /// both other proxies.
    pub fn witnesses_match(&self) -> bool {
        match &self.canonical {
            Verdict::CanonicalUpTo { .. } => self.local.passed() && self.tower.passed(),
            Verdict::Counterexample(c) => {
                let pair = Some((c.s.clone(), c.t.clone()));
                self.local.first_failure == pair && self.tower.first_failure == pair
            }
        }
    }

    pub fn report(&self) -> String {
        let line = |name: &str, p: &ProxyResult| match &p.first_failure {
            None => format!("{name}: pass ({} seeds)\n", p.seeds),
            Some((s, t)) => format!("{name}: fail at {} -> {}\n", tuple_string(t), tuple_string(s)),
        };
        let mut out = format!(
            "canonical: {}\n",
            if self.canonical.is_canonical() { "pass" } else { "fail" }
        );
        out += &line("local", &self.local);
        out += &line("tower", &self.tower);
        out += &format!("agree: {}\nwitnesses_match: {}\n", self.agree(), self.witnesses_match());
        out
    }
}

fn distinct(t: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for p in t {
        if !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

/// Seeds `(s, t)`: every tuple `t` of arity `<= arity` over `domain`, in check
/// order, paired with the first tuple `s` that has its source label.
pub fn harness_seeds(g: &GroupPresentation, domain: &[Point], arity: usize) -> Result<Vec<(Vec<Point>, Vec<Point>)>> {
    let mut first: BTreeMap<OrbitLabel, Vec<Point>> = BTreeMap::new();
    let mut seeds = Vec::new();
    for k in 1..=arity {
        for idx in all_tuples(domain.len(), k) {
            let t: Vec<Point> = idx.iter().map(|&i| domain[i].clone()).collect();
            let s = first.entry(g.orbit_label(&t)?).or_insert_with(|| t.clone()).clone();
            seeds.push((s, t));
        }
    }
    Ok(seeds)
}

/// Compares the three proxies on `f`: the canonicity check; local equality of
/// `f a` and `f` on the points of `t` for the partial automorphism `a: t -> s`
/// of every seed; and a tower witness for the pair `(f a, f)` over those points.
pub fn proposition_harness(
    f: &FunctionOracle,
    g: &GroupPresentation,
    h: &GroupPresentation,
    horizon: usize,
    arity: usize,
) -> Result<HarnessReport> {
    let domain = g.domain_prefix(horizon)?;
    let canonical = check_canonical_on(f, g, h, &domain, arity)?;
    let seeds = harness_seeds(g, &domain, arity)?;
    let mut local = ProxyResult {
        seeds: seeds.len(),
        first_failure: None,
    };
    let mut tower = local.clone();
    for (s, t) in &seeds {
        let pairs: Vec<(Point, Point)> = t.iter().cloned().zip(s.iter().cloned()).collect();
        let alpha = automorphism_extending(g, &pairs)?;
        let f_alpha = FunctionOracle::compose(f.clone(), FunctionOracle::Germ(alpha.into()));
        let set = distinct(t);
        if local.first_failure.is_none() && !local_equal(&f_alpha, f, &set, h)? {
            local.first_failure = Some((s.clone(), t.clone()));
        }
        if tower.first_failure.is_none() {
            let outcome = tower_witness_on(&[(f_alpha, f.clone())], h, &set)?;
            if !matches!(outcome, TowerOutcome::Witness(ref w) if w.is_coherent(h)) {
                tower.first_failure = Some((s.clone(), t.clone()));
            }
        }
        if !local.passed() && !tower.passed() {
            break;
        }
    }
    Ok(HarnessReport { canonical, local, tower })
}

/// True when the observed behavior is coherent.
pub fn verdict_is_coherent(v: &Verdict) -> bool {
    v.behavior().is_none_or(|b| coherence_check(b).is_ok())
}
