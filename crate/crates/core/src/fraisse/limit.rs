//! Countable homogeneous structures presented by an enumeration.
//!
//! The built-in dense linear order is symbolic: its elements are rationals in
//! the fixed enumeration of `Q` and relations are exact comparisons. Every other
//! limit is grown lazily by a Fraïssé construction driven by a demand schedule.
//!
//! A demand `(m, e)` asks for a point realising the `e`-th one-point extension
//! of the fragment on the first `m` elements. Demands are dovetailed along
//! diagonals `m + e = 0, 1, 2, ..` with `m` ascending inside a diagonal. Each
//! growth step takes the first demand that is valid (the extension exists),
//! not yet realised by an element at or above `m`, and serviceable (`m` at most
//! the current size). The new point is the lexicographically least one-point
//! extension of the whole fragment that agrees with the demand.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::RwLock;

use num_traits::Zero;

use super::age::{least_extension_agreeing, nth_extension, AgeOracle};
use super::rational::{enumeration_index, format_rat, nth, parse_rat, Rat};
use super::structure::{all_tuples, FiniteStructure, Signature};
use super::types::{enumerate_types, normalize_classes, TupleType};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Rational(Rat),
    Index(usize),
}

impl Element {
    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            Element::Rational(q) => Some(q),
            Element::Index(_) => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Rational(q) => write!(f, "{}", format_rat(q)),
            Element::Index(i) => write!(f, "v{i}"),
        }
    }
}

/// One satisfied demand: `element` realises extension `extension` of the
/// fragment on the first `fragment_size` elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandRecord {
    pub element: usize,
    pub fragment_size: usize,
    pub extension: usize,
}

#[derive(Debug)]
struct Construction {
    fragment: FiniteStructure,
    log: Vec<DemandRecord>,
    satisfied: HashSet<(usize, usize)>,
    extensions: HashMap<(usize, usize), Option<FiniteStructure>>,
}

#[derive(Debug)]
enum Presentation {
    Dlo,
    Generic(RwLock<Construction>),
}

#[derive(Debug)]
pub struct LimitStructure {
    name: String,
    age: AgeOracle,
    presentation: Presentation,
}

impl LimitStructure {
    /// The dense linear order `(Q; <)` with its fixed enumeration.
    pub fn dlo() -> Self {
        LimitStructure {
            name: "dlo".into(),
            age: AgeOracle::linear_orders(),
            presentation: Presentation::Dlo,
        }
    }

    pub fn rado() -> Self {
        Self::generic("rado", AgeOracle::graphs())
    }

    pub fn ordered_rado() -> Self {
        Self::generic("ordered-rado", AgeOracle::ordered_graphs())
    }

    pub fn pure_set() -> Self {
        Self::generic("pureset", AgeOracle::pure_sets())
    }

    /// Built-in limit by name: `dlo`, `rado`, `ordered-rado` or `pureset`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "dlo" => Some(Self::dlo()),
            "rado" => Some(Self::rado()),
            "ordered-rado" => Some(Self::ordered_rado()),
            "pureset" => Some(Self::pure_set()),
            _ => None,
        }
    }

    /// A lazily grown limit of an arbitrary age, initially empty.
    pub fn generic(name: impl Into<String>, age: AgeOracle) -> Self {
        let fragment = FiniteStructure::empty(age.signature().clone());
        LimitStructure {
            name: name.into(),
            age,
            presentation: Presentation::Generic(RwLock::new(Construction {
                fragment,
                log: Vec::new(),
                satisfied: HashSet::new(),
                extensions: HashMap::new(),
            })),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn age(&self) -> &AgeOracle {
        &self.age
    }

    pub fn signature(&self) -> &Signature {
        self.age.signature()
    }

    pub fn is_dlo(&self) -> bool {
        matches!(self.presentation, Presentation::Dlo)
    }

    /// Number of elements realised so far (unbounded for the dense order).
    pub fn realized(&self) -> Option<usize> {
        match &self.presentation {
            Presentation::Dlo => None,
            Presentation::Generic(state) => Some(state.read().expect("limit lock").fragment.size()),
        }
    }

    /// Grows a generic limit until it has at least `n` elements.
    pub fn ensure(&self, n: usize) -> Result<()> {
        let Presentation::Generic(state) = &self.presentation else {
            return Ok(());
        };
        if state.read().expect("limit lock").fragment.size() >= n {
            return Ok(());
        }
        let mut st = state.write().expect("limit lock");
        while st.fragment.size() < n {
            self.step(&mut st)?;
        }
        Ok(())
    }

    fn extension(&self, st: &mut Construction, m: usize, e: usize) -> Option<FiniteStructure> {
        if let Some(hit) = st.extensions.get(&(m, e)) {
            return hit.clone();
        }
        let prefix: Vec<usize> = (0..m).collect();
        let ext = nth_extension(&self.age, &st.fragment.induced(&prefix), e);
        st.extensions.insert((m, e), ext.clone());
        ext
    }

    fn step(&self, st: &mut Construction) -> Result<()> {
        let size = st.fragment.size();
        if self.extension(st, size, 0).is_none() {
            return Err(Error::AmalgamationFailure {
                fragment_size: size,
                extension: 0,
            });
        }
        // (size, 0) lies on diagonal `size` and is never realised yet, so the
        // scan stops there at the latest.
        for diag in 0..=size {
            for m in 0..=diag {
                let e = diag - m;
                if st.satisfied.contains(&(m, e)) {
                    continue;
                }
                let Some(ext) = self.extension(st, m, e) else {
                    continue;
                };
                let mut points: Vec<usize> = (0..m).collect();
                points.push(0);
                let realised = (m..size).any(|v| {
                    points[m] = v;
                    st.fragment.induced(&points) == ext
                });
                if realised {
                    st.satisfied.insert((m, e));
                    continue;
                }
                let grown = least_extension_agreeing(&self.age, &st.fragment, &ext).ok_or(
                    Error::AmalgamationFailure {
                        fragment_size: m,
                        extension: e,
                    },
                )?;
                st.fragment = grown;
                st.satisfied.insert((m, e));
                st.log.push(DemandRecord {
                    element: size,
                    fragment_size: m,
                    extension: e,
                });
                return Ok(());
            }
        }
        unreachable!("demand (size, 0) is always serviceable")
    }

    /// The `n`-th element of the fixed enumeration.
    pub fn element(&self, n: usize) -> Result<Element> {
        match &self.presentation {
            Presentation::Dlo => Ok(Element::Rational(nth(n as u64))),
            Presentation::Generic(_) => {
                self.ensure(n + 1)?;
                Ok(Element::Index(n))
            }
        }
    }

    /// The first `n` elements.
    pub fn elements(&self, n: usize) -> Result<Vec<Element>> {
        self.ensure(n)?;
        (0..n).map(|i| self.element(i)).collect()
    }

    /// Position of an element in the enumeration, when it is small enough to
    /// name.
    pub fn index_of(&self, x: &Element) -> Option<usize> {
        match (&self.presentation, x) {
            (Presentation::Dlo, Element::Rational(q)) => enumeration_index(q).and_then(|i| usize::try_from(i).ok()),
            (Presentation::Generic(_), Element::Index(i)) => Some(*i),
            _ => None,
        }
    }

    /// True when `x` has the right shape for this limit.
    pub fn owns(&self, x: &Element) -> bool {
        matches!(
            (&self.presentation, x),
            (Presentation::Dlo, Element::Rational(_)) | (Presentation::Generic(_), Element::Index(_))
        )
    }

    pub fn parse_element(&self, s: &str) -> Option<Element> {
        let s = s.trim();
        match &self.presentation {
            Presentation::Dlo => parse_rat(s).map(Element::Rational),
            Presentation::Generic(_) => s
                .strip_prefix('v')
                .unwrap_or(s)
                .parse()
                .ok()
                .map(Element::Index),
        }
    }

    fn check_owned(&self, xs: &[Element]) -> Result<()> {
        match xs.iter().find(|x| !self.owns(x)) {
            Some(x) => Err(Error::Point(format!("{x} is not an element of {}", self.name))),
            None => Ok(()),
        }
    }

    fn max_index(xs: &[Element]) -> usize {
        xs.iter()
            .filter_map(|x| match x {
                Element::Index(i) => Some(i + 1),
                Element::Rational(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn eval_relation(&self, symbol: usize, tuple: &[Element]) -> Result<bool> {
        let arity = self
            .signature()
            .symbols()
            .get(symbol)
            .ok_or_else(|| Error::Signature(format!("no symbol {symbol} in {}", self.name)))?
            .arity;
        if tuple.len() != arity {
            return Err(Error::Signature(format!("arity {arity} expected, got {}", tuple.len())));
        }
        self.check_owned(tuple)?;
        match &self.presentation {
            Presentation::Dlo => Ok(tuple[0] < tuple[1]),
            Presentation::Generic(state) => {
                self.ensure(Self::max_index(tuple))?;
                let idx: Vec<usize> = tuple.iter().filter_map(|x| self.index_of(x)).collect();
                Ok(state.read().expect("limit lock").fragment.holds(symbol, &idx))
            }
        }
    }

    /// Quantifier-free type of a tuple.
    pub fn qf_type(&self, tuple: &[Element]) -> Result<TupleType> {
        self.check_owned(tuple)?;
        let mut firsts: Vec<&Element> = Vec::new();
        let raw: Vec<usize> = tuple
            .iter()
            .map(|x| match firsts.iter().position(|y| *y == x) {
                Some(i) => i,
                None => {
                    firsts.push(x);
                    firsts.len() - 1
                }
            })
            .collect();
        let classes = normalize_classes(&raw);
        let mut diagram = FiniteStructure::discrete(self.signature().clone(), firsts.len());
        match &self.presentation {
            Presentation::Dlo => {
                for t in all_tuples(firsts.len(), 2) {
                    if firsts[t[0]] < firsts[t[1]] {
                        diagram.insert(0, t);
                    }
                }
            }
            Presentation::Generic(state) => {
                self.ensure(Self::max_index(tuple))?;
                let idx: Vec<usize> = firsts.iter().filter_map(|x| self.index_of(x)).collect();
                diagram = state.read().expect("limit lock").fragment.induced(&idx);
            }
        }
        Ok(TupleType::from_diagram(classes, &diagram))
    }

    /// Number of orbits of `k`-tuples under the automorphism group.
    pub fn count_orbits(&self, k: usize) -> Result<usize> {
        Ok(self.admissible_types(k)?.len())
    }

    /// Every admissible type of arity `k`, sorted.
    pub fn admissible_types(&self, k: usize) -> Result<Vec<TupleType>> {
        check_arity(k)?;
        Ok(enumerate_types(&self.age, k))
    }

    /// The realised structure on the first `n` elements.
    pub fn fragment(&self, n: usize) -> Result<FiniteStructure> {
        match &self.presentation {
            Presentation::Dlo => {
                let xs: Vec<Rat> = (0..n as u64).map(nth).collect();
                let mut s = FiniteStructure::discrete(Signature::order(), n);
                for t in all_tuples(n, 2) {
                    if xs[t[0]] < xs[t[1]] {
                        s.insert(0, t);
                    }
                }
                Ok(s)
            }
            Presentation::Generic(state) => {
                self.ensure(n)?;
                let prefix: Vec<usize> = (0..n).collect();
                Ok(state.read().expect("limit lock").fragment.induced(&prefix))
            }
        }
    }

    /// Demands satisfied so far, in schedule order. Empty for the dense order.
    pub fn demand_log(&self) -> Vec<DemandRecord> {
        match &self.presentation {
            Presentation::Dlo => Vec::new(),
            Presentation::Generic(state) => state.read().expect("limit lock").log.clone(),
        }
    }

    /// Compares two elements by their position in the enumeration.
    pub fn enumeration_cmp(&self, a: &Element, b: &Element) -> std::cmp::Ordering {
        match (a, b) {
            (Element::Rational(x), Element::Rational(y)) => {
                super::rational::enum_key(x).cmp(&super::rational::enum_key(y))
            }
            _ => a.cmp(b),
        }
    }

    /// Zero for the dense order; the first element otherwise.
    pub fn origin(&self) -> Element {
        match &self.presentation {
            Presentation::Dlo => Element::Rational(Rat::zero()),
            Presentation::Generic(_) => Element::Index(0),
        }
    }
}

/// Builds a generic limit of `age` with `n` realised elements.
pub fn build_limit(age: AgeOracle, n: usize) -> Result<LimitStructure> {
    let name = age.name().to_string();
    let limit = LimitStructure::generic(name, age);
    limit.ensure(n)?;
    Ok(limit)
}

/// The arity guardrail: `CANONFN_ARITY_LIMIT` or 6.
pub fn arity_limit() -> usize {
    std::env::var("CANONFN_ARITY_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(6)
}

pub fn check_arity(k: usize) -> Result<()> {
    let limit = arity_limit();
    if k > limit {
        return Err(Error::ArityLimitExceeded { requested: k, limit });
    }
    Ok(())
}
