//! Age oracles: membership tests for classes of finite structures, one-point
//! extensions in a fixed lexicographic order, and an exhaustive sanity check of
//! hereditariness and amalgamation up to a size bound.
//!
//! One-point extensions of a structure `A` on `0..n` add the point `n`. The
//! relation tuples that mention `n` are decided in steps: first the tuples over
//! `{n}` alone, then for each old point `j = 0, 1, ..` the tuples over
//! `{0..=j, n}` mentioning both `j` and `n`. Within a step, tuples are ordered by
//! symbol and then lexicographically; an assignment is a bit string with the
//! first tuple most significant and `false < true`. Extensions are listed in
//! the lexicographic order of the concatenated bit strings, which is also the
//! depth-first order of the step search. The search prunes with the membership
//! test after each step, so ages are assumed hereditary (which
//! [`verify_amalgamation`] checks).

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use super::structure::{all_tuples, embeds_into, FiniteStructure, Signature};
use crate::error::{Error, Result};

pub type MembershipTest = Arc<dyn Fn(&FiniteStructure) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum AgeKind {
    LinearOrders,
    Graphs,
    OrderedGraphs,
    PureSets,
    /// Members of `base` (or every structure of the signature) omitting the
    /// listed structures as induced substructures.
    Forbidden {
        base: Option<Box<AgeOracle>>,
        forbidden: Vec<FiniteStructure>,
    },
    Custom(MembershipTest),
}

#[derive(Clone)]
pub struct AgeOracle {
    name: String,
    signature: Signature,
    kind: AgeKind,
}

impl fmt::Debug for AgeOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgeOracle")
            .field("name", &self.name)
            .field("signature", &self.signature.to_string())
            .finish()
    }
}

fn is_strict_linear_order(s: &FiniteStructure, sym: usize) -> bool {
    let n = s.size();
    for i in 0..n {
        if s.holds(sym, &[i, i]) {
            return false;
        }
        for j in (i + 1)..n {
            if s.holds(sym, &[i, j]) == s.holds(sym, &[j, i]) {
                return false;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !s.holds(sym, &[i, j]) {
                continue;
            }
            for k in 0..n {
                if s.holds(sym, &[j, k]) && !s.holds(sym, &[i, k]) {
                    return false;
                }
            }
        }
    }
    true
}

fn is_simple_graph(s: &FiniteStructure, sym: usize) -> bool {
    s.table(sym)
        .iter()
        .all(|t| t[0] != t[1] && s.holds(sym, &[t[1], t[0]]))
}

impl AgeOracle {
    pub fn linear_orders() -> Self {
        AgeOracle {
            name: "linear-orders".into(),
            signature: Signature::order(),
            kind: AgeKind::LinearOrders,
        }
    }

    pub fn graphs() -> Self {
        AgeOracle {
            name: "graphs".into(),
            signature: Signature::graph(),
            kind: AgeKind::Graphs,
        }
    }

    pub fn ordered_graphs() -> Self {
        AgeOracle {
            name: "ordered-graphs".into(),
            signature: Signature::ordered_graph(),
            kind: AgeKind::OrderedGraphs,
        }
    }

    pub fn pure_sets() -> Self {
        AgeOracle {
            name: "pure-sets".into(),
            signature: Signature::empty(),
            kind: AgeKind::PureSets,
        }
    }

    pub fn forbidden(
        name: impl Into<String>,
        signature: Signature,
        base: Option<AgeOracle>,
        forbidden: Vec<FiniteStructure>,
    ) -> Result<Self> {
        if let Some(b) = &base {
            if b.signature != signature {
                return Err(Error::Signature("base age has a different signature".into()));
            }
        }
        if let Some(s) = forbidden.iter().find(|s| s.signature() != &signature) {
            return Err(Error::Signature(format!(
                "forbidden structure over {} in an age over {}",
                s.signature(),
                signature
            )));
        }
        Ok(AgeOracle {
            name: name.into(),
            signature,
            kind: AgeKind::Forbidden {
                base: base.map(Box::new),
                forbidden,
            },
        })
    }

    pub fn custom(name: impl Into<String>, signature: Signature, test: MembershipTest) -> Self {
        AgeOracle {
            name: name.into(),
            signature,
            kind: AgeKind::Custom(test),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn kind(&self) -> &AgeKind {
        &self.kind
    }

    pub fn contains(&self, s: &FiniteStructure) -> bool {
        if s.signature() != &self.signature {
            return false;
        }
        match &self.kind {
            AgeKind::LinearOrders => is_strict_linear_order(s, 0),
            AgeKind::Graphs => is_simple_graph(s, 0),
            AgeKind::OrderedGraphs => is_strict_linear_order(s, 0) && is_simple_graph(s, 1),
            AgeKind::PureSets => true,
            AgeKind::Forbidden { base, forbidden } => {
                base.as_ref().is_none_or(|b| b.contains(s)) && !forbidden.iter().any(|f| embeds_into(f, s))
            }
            AgeKind::Custom(test) => test(s),
        }
    }
}

/// Relation tuples decided at each step when adding point `n`.
fn extension_steps(sig: &Signature, n: usize) -> Vec<Vec<(usize, Vec<usize>)>> {
    let mut steps = Vec::with_capacity(n + 1);
    let own: Vec<(usize, Vec<usize>)> = sig
        .symbols()
        .iter()
        .enumerate()
        .map(|(s, sym)| (s, vec![n; sym.arity]))
        .collect();
    steps.push(own);
    for j in 0..n {
        let mut slots = Vec::new();
        for (s, sym) in sig.symbols().iter().enumerate() {
            // slot j+1 stands for the new point n
            for t in all_tuples(j + 2, sym.arity) {
                let mapped: Vec<usize> = t.iter().map(|&i| if i == j + 1 { n } else { i }).collect();
                if mapped.contains(&j) && mapped.contains(&n) {
                    slots.push((s, mapped));
                }
            }
        }
        steps.push(slots);
    }
    steps
}

struct ExtensionWalk<'a> {
    age: &'a AgeOracle,
    steps: Vec<Vec<(usize, Vec<usize>)>>,
    forced: Option<&'a FiniteStructure>,
    n: usize,
}

impl ExtensionWalk<'_> {
    fn forced_bits(&self, step: usize) -> Option<Vec<bool>> {
        let forced = self.forced?;
        let m = forced.size() - 1;
        if step > m {
            return None;
        }
        let bits = self.steps[step]
            .iter()
            .map(|(s, t)| {
                let local: Vec<usize> = t.iter().map(|&i| if i == self.n { m } else { i }).collect();
                forced.holds(*s, &local)
            })
            .collect();
        Some(bits)
    }

    fn run(
        &self,
        step: usize,
        current: &FiniteStructure,
        visit: &mut dyn FnMut(FiniteStructure) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if step == self.steps.len() {
            return visit(current.clone());
        }
        let slots = &self.steps[step];
        let assignments: Vec<Vec<bool>> = match self.forced_bits(step) {
            Some(bits) => vec![bits],
            None => {
                let width = slots.len();
                assert!(width < 24, "too many relation tuples per extension step ({width})");
                (0u32..(1 << width))
                    .map(|code| (0..width).map(|b| (code >> (width - 1 - b)) & 1 == 1).collect())
                    .collect()
            }
        };
        let mut points: Vec<usize> = (0..step).collect();
        points.push(self.n);
        for bits in assignments {
            let mut next = current.clone();
            for ((s, t), &on) in slots.iter().zip(&bits) {
                if on {
                    next.insert(*s, t.clone());
                }
            }
            if self.age.contains(&next.induced(&points)) {
                self.run(step + 1, &next, visit)?;
            }
        }
        ControlFlow::Continue(())
    }
}

fn walk_extensions(
    age: &AgeOracle,
    a: &FiniteStructure,
    forced: Option<&FiniteStructure>,
    visit: &mut dyn FnMut(FiniteStructure) -> ControlFlow<()>,
) {
    let n = a.size();
    let mut start = a.clone();
    start.push_point();
    let walk = ExtensionWalk {
        age,
        steps: extension_steps(age.signature(), n),
        forced,
        n,
    };
    let _ = walk.run(0, &start, visit);
}

/// All one-point extensions of `a` inside the age, new point last, in the
/// fixed lexicographic order.
pub fn one_point_extensions(age: &AgeOracle, a: &FiniteStructure) -> Vec<FiniteStructure> {
    let mut out = Vec::new();
    walk_extensions(age, a, None, &mut |s| {
        out.push(s);
        ControlFlow::Continue(())
    });
    out
}

/// The `index`-th one-point extension, if there are that many.
pub fn nth_extension(age: &AgeOracle, a: &FiniteStructure, index: usize) -> Option<FiniteStructure> {
    let mut seen = 0;
    let mut found = None;
    walk_extensions(age, a, None, &mut |s| {
        if seen == index {
            found = Some(s);
            return ControlFlow::Break(());
        }
        seen += 1;
        ControlFlow::Continue(())
    });
    found
}

/// Lexicographically least one-point extension of `a` whose new point relates
/// to the first `m` points exactly as the last point of `prefix` (size `m + 1`)
/// relates to the others.
pub fn least_extension_agreeing(
    age: &AgeOracle,
    a: &FiniteStructure,
    prefix: &FiniteStructure,
) -> Option<FiniteStructure> {
    assert!(prefix.size() >= 1 && prefix.size() - 1 <= a.size());
    let mut found = None;
    walk_extensions(age, a, Some(prefix), &mut |s| {
        found = Some(s);
        ControlFlow::Break(())
    });
    found
}

/// All labelled members of the age on `0..size`, built by repeated one-point
/// extension from the empty structure.
pub fn members_of_size(age: &AgeOracle, size: usize) -> Vec<FiniteStructure> {
    let empty = FiniteStructure::empty(age.signature().clone());
    if !age.contains(&empty) {
        return Vec::new();
    }
    let mut level = vec![empty];
    for _ in 0..size {
        level = level.iter().flat_map(|a| one_point_extensions(age, a)).collect();
    }
    level
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgeReport {
    Success {
        bound: usize,
        members_checked: usize,
    },
    EmptyStructureRejected,
    HereditaryViolation {
        member: FiniteStructure,
        removed_point: usize,
    },
    IsomorphismViolation {
        member: FiniteStructure,
        permutation: Vec<usize>,
    },
    AmalgamationViolation {
        base: FiniteStructure,
        left: FiniteStructure,
        right: FiniteStructure,
    },
}

impl AgeReport {
    pub fn is_success(&self) -> bool {
        matches!(self, AgeReport::Success { .. })
    }
}

const BRUTE_FORCE_BITS: usize = 16;

/// Every structure on `0..size` (no membership filter), when small enough.
fn all_structures(sig: &Signature, size: usize) -> Option<Vec<FiniteStructure>> {
    let slots: Vec<(usize, Vec<usize>)> = sig
        .symbols()
        .iter()
        .enumerate()
        .flat_map(|(s, sym)| all_tuples(size, sym.arity).map(move |t| (s, t)))
        .collect();
    if slots.len() > BRUTE_FORCE_BITS {
        return None;
    }
    let out = (0u32..(1 << slots.len()))
        .map(|code| {
            let mut st = FiniteStructure::discrete(sig.clone(), size);
            for (b, (s, t)) in slots.iter().enumerate() {
                if (code >> b) & 1 == 1 {
                    st.insert(*s, t.clone());
                }
            }
            st
        })
        .collect();
    Some(out)
}

/// Every structure extending `a` by one point, without membership pruning.
fn raw_extensions(a: &FiniteStructure) -> Vec<FiniteStructure> {
    let n = a.size();
    let slots: Vec<(usize, Vec<usize>)> = extension_steps(a.signature(), n).into_iter().flatten().collect();
    assert!(slots.len() < 24, "too many relation tuples for an unpruned extension");
    (0u32..(1 << slots.len()))
        .map(|code| {
            let mut st = a.clone();
            st.push_point();
            for (b, (s, t)) in slots.iter().enumerate() {
                if (code >> b) & 1 == 1 {
                    st.insert(*s, t.clone());
                }
            }
            st
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Exhaustively checks hereditariness, isomorphism invariance and one-point
/// amalgamation for all members of size up to `bound`.
///
/// Members of a size are enumerated by brute force while the number of relation
/// tuples is at most 16, and otherwise as membership-filtered raw extensions of
/// the members one size down.
pub fn verify_amalgamation(age: &AgeOracle, bound: usize) -> AgeReport {
    let sig = age.signature().clone();
    let empty = FiniteStructure::empty(sig.clone());
    if !age.contains(&empty) {
        return AgeReport::EmptyStructureRejected;
    }
    let mut levels: Vec<Vec<FiniteStructure>> = vec![vec![empty]];
    let mut checked = 1;
    for size in 1..=bound {
        let candidates = match all_structures(&sig, size) {
            Some(all) => all,
            None => {
                let mut seen = HashSet::new();
                levels[size - 1]
                    .iter()
                    .flat_map(raw_extensions)
                    .filter(|s| seen.insert(s.clone()))
                    .collect()
            }
        };
        let members: Vec<FiniteStructure> = candidates.into_iter().filter(|s| age.contains(s)).collect();
        for m in &members {
            for p in 0..size {
                if !age.contains(&m.without_point(p)) {
                    return AgeReport::HereditaryViolation {
                        member: m.clone(),
                        removed_point: p,
                    };
                }
            }
            for perm in permutations(size) {
                if !age.contains(&m.permuted(&perm)) {
                    return AgeReport::IsomorphismViolation {
                        member: m.clone(),
                        permutation: perm,
                    };
                }
            }
        }
        checked += members.len();
        levels.push(members);
    }
    for level in levels.iter().take(bound.saturating_sub(1)) {
        for base in level {
            let exts = one_point_extensions(age, base);
            for left in &exts {
                for right in &exts {
                    if left == right {
                        continue;
                    }
                    if least_extension_agreeing(age, left, right).is_none() {
                        return AgeReport::AmalgamationViolation {
                            base: base.clone(),
                            left: left.clone(),
                            right: right.clone(),
                        };
                    }
                }
            }
        }
    }
    AgeReport::Success {
        bound,
        members_checked: checked,
    }
}
