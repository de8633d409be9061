//! Exact machinery on `(Q; <)`: computable dense subsets, canonical
//! back-and-forth isomorphisms, forced-cut analysis and the obstruction
//! certificate showing that an isomorphism `Q -> Q \ {0}` is canonical but not
//! of the form `f a = e f` for every automorphism `a`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::fraisse::rational::{enum_key, format_rat, least_in, nth};
use crate::fraisse::Rat;
use crate::oracle::FunctionOracle;

/// Enumeration positions scanned for filtered sets and density probes.
pub const PROBE_BUDGET: u64 = 1 << 14;
/// Stages a back-and-forth map may run while evaluating one point.
pub const STAGE_LIMIT: usize = 1 << 20;

pub type RatPredicate = Arc<dyn Fn(&Rat) -> bool + Send + Sync>;

#[derive(Clone)]
enum DenseKind {
    Rationals,
    Except(Vec<Rat>),
    Filtered(RatPredicate),
}

/// A subset of `Q` with a membership test and an enumeration (the members in
/// the order of the fixed enumeration of `Q`).
#[derive(Clone)]
pub struct ComputableDenseSet {
    name: String,
    kind: DenseKind,
}

impl fmt::Debug for ComputableDenseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComputableDenseSet({})", self.name)
    }
}

fn least_avoiding(lo: Option<&Rat>, hi: Option<&Rat>, avoid: &[Rat]) -> Option<Rat> {
    let q = least_in(lo, hi)?;
    if !avoid.contains(&q) {
        return Some(q);
    }
    let left = least_avoiding(lo, Some(&q), avoid);
    let right = least_avoiding(Some(&q), hi, avoid);
    match (left, right) {
        (Some(a), Some(b)) => Some(if enum_key(&a) < enum_key(&b) { a } else { b }),
        (a, b) => a.or(b),
    }
}

impl ComputableDenseSet {
    pub fn rationals() -> Self {
        ComputableDenseSet {
            name: "q".into(),
            kind: DenseKind::Rationals,
        }
    }

    /// `Q` minus finitely many points.
    pub fn except(points: Vec<Rat>) -> Self {
        let name = if points.len() == 1 && points[0].is_zero() {
            "q-minus-0".to_string()
        } else {
            let ps: Vec<String> = points.iter().map(format_rat).collect();
            format!("q-minus-{{{}}}", ps.join(","))
        };
        ComputableDenseSet {
            name,
            kind: DenseKind::Except(points),
        }
    }

    pub fn without_zero() -> Self {
        Self::except(vec![Rat::zero()])
    }

    pub fn filtered(name: impl Into<String>, pred: RatPredicate) -> Self {
        ComputableDenseSet {
            name: name.into(),
            kind: DenseKind::Filtered(pred),
        }
    }

    /// `q` or `q-minus-0`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "q" => Some(Self::rationals()),
            "q-minus-0" => Some(Self::without_zero()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, q: &Rat) -> bool {
        match &self.kind {
            DenseKind::Rationals => true,
            DenseKind::Except(ex) => !ex.contains(q),
            DenseKind::Filtered(p) => p(q),
        }
    }

    /// The first `n` members.
    pub fn members(&self, n: usize) -> Vec<Rat> {
        (0..PROBE_BUDGET.max(n as u64 * 4))
            .map(nth)
            .filter(|q| self.contains(q))
            .take(n)
            .collect()
    }

    /// The enumeration-least member of the open interval `(lo, hi)`.
    pub fn least_in(&self, lo: Option<&Rat>, hi: Option<&Rat>) -> Option<Rat> {
        match &self.kind {
            DenseKind::Rationals => least_in(lo, hi),
            DenseKind::Except(ex) => least_avoiding(lo, hi, ex),
            DenseKind::Filtered(p) => (0..PROBE_BUDGET)
                .map(nth)
                .find(|q| p(q) && lo.is_none_or(|l| q > l) && hi.is_none_or(|h| q < h)),
        }
    }

    /// Samples density and unboundedness on the first `samples` members.
    pub fn probe_density(&self, samples: usize) -> Result<()> {
        let fail = |reason: String| Error::DensityProbeFailure {
            set: self.name.clone(),
            reason,
        };
        let mut ms = self.members(samples);
        if ms.len() < 2 {
            return Err(fail("fewer than two members found".into()));
        }
        ms.sort();
        for w in ms.windows(2) {
            if self.least_in(Some(&w[0]), Some(&w[1])).is_none() {
                return Err(fail(format!("no member between {} and {}", format_rat(&w[0]), format_rat(&w[1]))));
            }
        }
        let (min, max) = (&ms[0], &ms[ms.len() - 1]);
        if self.least_in(Some(max), None).is_none() {
            return Err(fail(format!("no member above {}", format_rat(max))));
        }
        if self.least_in(None, Some(min)).is_none() {
            return Err(fail(format!("no member below {}", format_rat(min))));
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Stages {
    forth: BTreeMap<Rat, Rat>,
    back: BTreeMap<Rat, Rat>,
    commits: Vec<(Rat, Rat)>,
    stage: usize,
    source_cursor: u64,
    target_cursor: u64,
}

/// Neighbouring images of `x` in a sorted map.
fn gap<'a>(map: &'a BTreeMap<Rat, Rat>, x: &Rat) -> (Option<&'a Rat>, Option<&'a Rat>) {
    let below = map.range(..x.clone()).next_back().map(|(_, v)| v);
    let above = map
        .range((std::ops::Bound::Excluded(x.clone()), std::ops::Bound::Unbounded))
        .next()
        .map(|(_, v)| v);
    (below, above)
}

/// The canonical back-and-forth isomorphism between two dense sets. Even
/// stages take the least uncommitted source member and commit its least
/// admissible partner; odd stages do the same from the target side.
#[derive(Debug)]
pub struct BackAndForthMap {
    source: ComputableDenseSet,
    target: ComputableDenseSet,
    state: Mutex<Stages>,
}

impl BackAndForthMap {
    fn new(source: ComputableDenseSet, target: ComputableDenseSet, seed: &[(Rat, Rat)]) -> Self {
        let mut st = Stages::default();
        for (a, b) in seed {
            st.forth.insert(a.clone(), b.clone());
            st.back.insert(b.clone(), a.clone());
            st.commits.push((a.clone(), b.clone()));
        }
        BackAndForthMap {
            source,
            target,
            state: Mutex::new(st),
        }
    }

    pub fn source(&self) -> &ComputableDenseSet {
        &self.source
    }

    pub fn target(&self) -> &ComputableDenseSet {
        &self.target
    }

    /// Committed pairs in commitment order.
    pub fn commits(&self) -> Vec<(Rat, Rat)> {
        self.state.lock().expect("map lock").commits.clone()
    }

    /// Runs stages until at least `n` pairs are committed.
    pub fn run_to(&self, n: usize) -> Result<()> {
        let mut st = self.state.lock().expect("map lock");
        while st.commits.len() < n {
            self.stage(&mut st)?;
        }
        Ok(())
    }

    fn stage(&self, st: &mut Stages) -> Result<()> {
        let forth = st.stage.is_multiple_of(2);
        st.stage += 1;
        let (from, to) = if forth {
            (&self.source, &self.target)
        } else {
            (&self.target, &self.source)
        };
        let x = loop {
            let cursor = if forth {
                &mut st.source_cursor
            } else {
                &mut st.target_cursor
            };
            let q = nth(*cursor);
            *cursor += 1;
            let committed = if forth { st.forth.contains_key(&q) } else { st.back.contains_key(&q) };
            if from.contains(&q) && !committed {
                break q;
            }
            if *cursor > PROBE_BUDGET && !matches!(from.kind, DenseKind::Rationals | DenseKind::Except(_)) {
                return Err(Error::DensityProbeFailure {
                    set: from.name.clone(),
                    reason: "enumeration ran dry".into(),
                });
            }
        };
        let map = if forth { &st.forth } else { &st.back };
        let (lo, hi) = gap(map, &x);
        let y = to.least_in(lo, hi).ok_or_else(|| Error::DensityProbeFailure {
            set: to.name.clone(),
            reason: format!(
                "no member in ({}, {})",
                lo.map_or("-inf".into(), format_rat),
                hi.map_or("inf".into(), format_rat)
            ),
        })?;
        let (a, b) = if forth { (x, y) } else { (y, x) };
        st.forth.insert(a.clone(), b.clone());
        st.back.insert(b.clone(), a.clone());
        st.commits.push((a, b));
        Ok(())
    }

    pub fn eval(&self, x: &Rat) -> Result<Rat> {
        if !self.source.contains(x) {
            return Err(Error::DomainGap(format!("{} is not in {}", format_rat(x), self.source.name)));
        }
        let mut st = self.state.lock().expect("map lock");
        let start = st.stage;
        loop {
            if let Some(y) = st.forth.get(x) {
                return Ok(y.clone());
            }
            if st.stage - start > STAGE_LIMIT {
                return Err(Error::BudgetExhausted(format!("{} not committed after {STAGE_LIMIT} stages", format_rat(x))));
            }
            self.stage(&mut st)?;
        }
    }

    pub fn eval_inverse(&self, y: &Rat) -> Result<Rat> {
        if !self.target.contains(y) {
            return Err(Error::DomainGap(format!("{} is not in {}", format_rat(y), self.target.name)));
        }
        let mut st = self.state.lock().expect("map lock");
        let start = st.stage;
        loop {
            if let Some(x) = st.back.get(y) {
                return Ok(x.clone());
            }
            if st.stage - start > STAGE_LIMIT {
                return Err(Error::BudgetExhausted(format!("{} not committed after {STAGE_LIMIT} stages", format_rat(y))));
            }
            self.stage(&mut st)?;
        }
    }

    /// True when committed pairs form a strictly increasing injection.
    pub fn is_sound(&self) -> bool {
        let st = self.state.lock().expect("map lock");
        let values: Vec<&Rat> = st.forth.values().collect();
        values.windows(2).all(|w| w[0] < w[1])
            && st.forth.iter().all(|(a, b)| self.source.contains(a) && self.target.contains(b))
    }
}

/// The deterministic back-and-forth isomorphism `source -> target`.
pub fn canonical_iso(source: ComputableDenseSet, target: ComputableDenseSet) -> Result<BackAndForthMap> {
    source.probe_density(32)?;
    target.probe_density(32)?;
    Ok(BackAndForthMap::new(source, target, &[]))
}

/// The canonical back-and-forth automorphism of `Q` extending `a -> b`.
pub fn automorphism_moving(a: Rat, b: Rat) -> BackAndForthMap {
    BackAndForthMap::new(ComputableDenseSet::rationals(), ComputableDenseSet::rationals(), &[(a, b)])
}

/// A probe: `x`, `f(x)` and the forced value `g(x) = e(f(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub x: Rat,
    pub fx: Rat,
    pub gx: Rat,
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={} f={} e={}", format_rat(&self.x), format_rat(&self.fx), format_rat(&self.gx))
    }
}

/// Result of a cut analysis. `lower` is the probe with `f(x)` below the cut
/// and the largest forced value; `upper` the probe above the cut with the
/// smallest forced value. An order-preserving `e` must send the cut into
/// `[lower.gx, upper.gx]`.
#[derive(Clone, Debug, PartialEq)]
pub enum CutOutcome {
    Bracket {
        lower: Probe,
        upper: Probe,
        probes: usize,
    },
    Inconclusive {
        lower: Option<Probe>,
        upper: Option<Probe>,
        probes: usize,
    },
}

fn rational_of(f: &FunctionOracle, x: &Rat) -> Result<Rat> {
    f.eval_rat(x)
}

/// Brackets the value an order-preserving `e` with `g = e f` must take at
/// `cut`, probing source points in enumeration order.
pub fn forced_cut(f: &FunctionOracle, g: &FunctionOracle, cut: &Rat, eps: &Rat, budget: usize) -> Result<CutOutcome> {
    if !eps.is_positive() {
        return Err(Error::Oracle("precision must be positive".into()));
    }
    let mut lower: Option<Probe> = None;
    let mut upper: Option<Probe> = None;
    for i in 0..budget {
        let x = nth(i as u64);
        let fx = rational_of(f, &x)?;
        if &fx == cut {
            continue;
        }
        let gx = rational_of(g, &x)?;
        let probe = Probe { x, fx, gx };
        if &probe.fx < cut {
            if lower.as_ref().is_none_or(|l| probe.gx > l.gx) {
                lower = Some(probe);
            }
        } else if upper.as_ref().is_none_or(|u| probe.gx < u.gx) {
            upper = Some(probe);
        }
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if &(&u.gx - &l.gx) < eps {
                return Ok(CutOutcome::Bracket {
                    lower: l.clone(),
                    upper: u.clone(),
                    probes: i + 1,
                });
            }
        }
    }
    Ok(CutOutcome::Inconclusive {
        lower,
        upper,
        probes: budget,
    })
}

/// The finitary content of the refutation: `f(a) < 0 < f a'(a)` where
/// `a' = alpha`, any order-preserving `e` with `f alpha = e f` fixes `0` (the
/// images of `f` and `f alpha` both equal `Q \ {0}`), and the forced values of
/// `e` around `0` are pinned to a bracket that excludes `e(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCertificate {
    pub epsilon: Rat,
    pub a: Rat,
    pub f_a: Rat,
    pub alpha_a: Rat,
    pub f_alpha_a: Rat,
    pub lower: Probe,
    pub upper: Probe,
    pub probes: usize,
}

impl ObstructionCertificate {
    /// Every claim with its recomputed truth value. `f` is rebuilt from
    /// scratch, so this checks the certificate independently of the run that
    /// produced it.
    pub fn claims(&self) -> Result<Vec<(String, bool)>> {
        let f = canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::without_zero())?;
        let alpha = automorphism_moving(self.a.clone(), self.alpha_a.clone());
        let zero = Rat::zero();
        let fa = f.eval(&self.a)?;
        let fb = f.eval(&self.alpha_a)?;
        let re = |p: &Probe| -> Result<bool> {
            let fx = f.eval(&p.x)?;
            let gx = f.eval(&alpha.eval(&p.x)?)?;
            Ok(fx == p.fx && gx == p.gx)
        };
        let gap = self.f_a.abs().min(self.f_alpha_a.clone());
        Ok(vec![
            ("f(a) recomputes".into(), fa == self.f_a),
            ("f(alpha(a)) recomputes".into(), fb == self.f_alpha_a && alpha.eval(&self.a)? == self.alpha_a),
            ("f(a) < 0".into(), self.f_a < zero),
            ("f(alpha(a)) > 0".into(), self.f_alpha_a > zero),
            ("lower witness recomputes".into(), re(&self.lower)?),
            ("upper witness recomputes".into(), re(&self.upper)?),
            ("f(y1) < 0 < f(y2)".into(), self.lower.fx < zero && zero < self.upper.fx),
            ("bracket width < epsilon".into(), &self.upper.gx - &self.lower.gx < self.epsilon),
            ("0 is not a value of f".into(), !f.target().contains(&zero)),
            ("bracket excludes e(0) = 0".into(), self.lower.gx > zero || self.upper.gx < zero),
            ("epsilon < min(|f(a)|, f(alpha(a)))".into(), self.epsilon < gap),
        ])
    }

    /// `Ok` when every claim holds; otherwise the failing claims.
    pub fn verify(&self) -> Result<(), Vec<String>> {
        let claims = self.claims().map_err(|e| vec![e.to_string()])?;
        let failed: Vec<String> = claims.into_iter().filter(|(_, ok)| !ok).map(|(c, _)| c).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(failed)
        }
    }

    pub fn precision_sufficient(&self) -> bool {
        self.epsilon < self.f_a.abs().min(self.f_alpha_a.clone())
    }
}

impl fmt::Display for ObstructionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "epsilon: {}", format_rat(&self.epsilon))?;
        writeln!(f, "a: {}", format_rat(&self.a))?;
        writeln!(f, "f(a): {}", format_rat(&self.f_a))?;
        writeln!(f, "alpha(a): {}", format_rat(&self.alpha_a))?;
        writeln!(f, "f(alpha(a)): {}", format_rat(&self.f_alpha_a))?;
        writeln!(f, "e(0): 0")?;
        writeln!(f, "lower_x: {}", format_rat(&self.lower.x))?;
        writeln!(f, "lower_y: {}", format_rat(&self.lower.fx))?;
        writeln!(f, "lower_e: {}", format_rat(&self.lower.gx))?;
        writeln!(f, "upper_x: {}", format_rat(&self.upper.x))?;
        writeln!(f, "upper_y: {}", format_rat(&self.upper.fx))?;
        writeln!(f, "upper_e: {}", format_rat(&self.upper.gx))?;
        writeln!(f, "probes: {}", self.probes)
    }
}

/// The isomorphism `Q -> Q \ {0}` and the automorphism used against it.
pub fn pham_map() -> Result<BackAndForthMap> {
    canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::without_zero())
}

/// Builds the obstruction certificate at precision `eps`.
pub fn pham_refute(eps: &Rat, budget: usize) -> Result<ObstructionCertificate> {
    let f = Arc::new(pham_map()?);
    let fo = FunctionOracle::back_and_forth("pham", f.clone());
    let first = |pred: &dyn Fn(&Rat) -> bool| -> Result<Option<Rat>> {
        for i in 0..budget {
            let x = nth(i as u64);
            if pred(&f.eval(&x)?) {
                return Ok(Some(x));
            }
        }
        Ok(None)
    };
    let zero = Rat::zero();
    let a = first(&|y| y < &zero)?.ok_or_else(|| Error::BudgetExhausted("no a with f(a) < 0".into()))?;
    let b = first(&|y| y > &zero)?.ok_or_else(|| Error::BudgetExhausted("no b with f(b) > 0".into()))?;
    let alpha = Arc::new(automorphism_moving(a.clone(), b.clone()));
    let g = FunctionOracle::compose(fo.clone(), FunctionOracle::back_and_forth(format!("alpha({},{})", format_rat(&a), format_rat(&b)), alpha));
    let (lower, upper, probes) = match forced_cut(&fo, &g, &zero, eps, budget)? {
        CutOutcome::Bracket { lower, upper, probes } => (lower, upper, probes),
        CutOutcome::Inconclusive { probes, .. } => {
            return Err(Error::BudgetExhausted(format!("bracket wider than epsilon after {probes} probes")))
        }
    };
    Ok(ObstructionCertificate {
        epsilon: eps.clone(),
        f_a: f.eval(&a)?,
        f_alpha_a: f.eval(&b)?,
        a,
        alpha_a: b,
        lower,
        upper,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::rational::{int, rat};

    #[test]
    fn identity_commitments() {
        let m = canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::rationals()).unwrap();
        m.run_to(10).unwrap();
        for (i, (a, b)) in m.commits().iter().enumerate() {
            assert_eq!(a, b);
            assert_eq!(a, &nth(i as u64));
        }
    }

    #[test]
    fn pham_first_values() {
        let f = pham_map().unwrap();
        let got: Vec<Rat> = [int(0), int(-1), int(1), rat(-1, 2), rat(1, 2)]
            .iter()
            .map(|x| f.eval(x).unwrap())
            .collect();
        assert_eq!(got, vec![int(1), int(-1), int(2), rat(1, 2), rat(3, 2)]);
        f.run_to(10).unwrap();
        assert!(f.commits().iter().all(|(_, y)| !y.is_zero()));
        assert!(f.is_sound());
    }

    #[test]
    fn inverse_direction_composes() {
        let f = pham_map().unwrap();
        let g = canonical_iso(ComputableDenseSet::without_zero(), ComputableDenseSet::rationals()).unwrap();
        let xs: Vec<Rat> = (0..10).map(nth).collect();
        let mut sorted = xs.clone();
        sorted.sort();
        let images: Vec<Rat> = sorted.iter().map(|x| g.eval(&f.eval(x).unwrap()).unwrap()).collect();
        assert!(images.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn moving_automorphisms() {
        let a = automorphism_moving(int(-1), int(5));
        assert_eq!(a.eval(&int(-1)).unwrap(), int(5));
        let mut xs: Vec<Rat> = (0..10).map(nth).collect();
        xs.sort();
        let ys: Vec<Rat> = xs.iter().map(|x| a.eval(x).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(automorphism_moving(int(2), int(-2)).eval(&int(2)).unwrap(), int(-2));
        let id = automorphism_moving(int(0), int(0));
        for i in 0..10 {
            assert_eq!(id.eval(&nth(i)).unwrap(), nth(i));
        }
    }

    #[test]
    fn density_probe_rejects_integers() {
        let ints = ComputableDenseSet::filtered("z", Arc::new(|q: &Rat| q.is_integer()));
        assert!(matches!(
            canonical_iso(ints, ComputableDenseSet::rationals()),
            Err(Error::DensityProbeFailure { .. })
        ));
    }

    #[test]
    fn cuts_of_simple_maps() {
        let eps = rat(1, 4);
        let CutOutcome::Bracket { lower, upper, .. } =
            forced_cut(&FunctionOracle::Identity, &FunctionOracle::Identity, &int(0), &eps, 1024).unwrap()
        else {
            panic!("identity cut is bracketed");
        };
        assert!(lower.gx > -&eps && upper.gx < eps);
        let shift = FunctionOracle::parse("pieces:[(-inf,inf):x+1]", &|_| unreachable!()).unwrap();
        let CutOutcome::Bracket { lower, upper, .. } =
            forced_cut(&FunctionOracle::Identity, &shift, &int(0), &eps, 1024).unwrap()
        else {
            panic!("shift cut is bracketed");
        };
        assert!(lower.gx < int(1) && upper.gx > int(1));
    }

    #[test]
    fn pham_certificates() {
        for (eps, budget) in [(rat(1, 8), 512), (rat(1, 64), 4096)] {
            let cert = pham_refute(&eps, budget).unwrap();
            println!("{cert}");
            assert_eq!(cert.verify(), Ok(()));
            assert!(cert.precision_sufficient());
        }
        let wide = pham_refute(&int(4), 512).unwrap();
        assert!(!wide.precision_sufficient());
        assert!(wide.verify().is_err());
    }
}
