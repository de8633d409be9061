//! Finite partial automorphisms that extend one point at a time.

use std::sync::{Arc, Mutex};

use super::{GroupPresentation, Point};
use crate::error::{Error, Result};
use crate::fraisse::rational::least_in;
use crate::fraisse::{Element, LimitStructure};

/// How far the generic back-and-forth step scans the enumeration.
const SCAN_BUDGET: usize = 2048;

/// A type-preserving finite partial map of one limit, grown on demand.
#[derive(Debug)]
pub struct Germ {
    limit: Arc<LimitStructure>,
    pairs: Mutex<Vec<(Element, Element)>>,
}

impl Clone for Germ {
    fn clone(&self) -> Self {
        Germ {
            limit: self.limit.clone(),
            pairs: Mutex::new(self.pairs()),
        }
    }
}

impl Germ {
    pub fn new(limit: Arc<LimitStructure>, pairs: Vec<(Element, Element)>) -> Result<Self> {
        let (dom, ran): (Vec<Element>, Vec<Element>) = pairs.iter().cloned().unzip();
        if limit.qf_type(&dom)? != limit.qf_type(&ran)? {
            return Err(Error::TypeMismatch("domain and range tuples have different types".into()));
        }
        let mut unique: Vec<(Element, Element)> = Vec::new();
        for p in pairs {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        Ok(Germ {
            limit,
            pairs: Mutex::new(unique),
        })
    }

    pub fn pairs(&self) -> Vec<(Element, Element)> {
        self.pairs.lock().expect("germ lock").clone()
    }

    pub fn len(&self) -> usize {
        self.pairs.lock().expect("germ lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Image of `x`, committing the enumeration-least admissible image when
    /// `x` is new.
    pub fn image(&self, x: &Element) -> Result<Element> {
        self.step(x, false)
    }

    /// Preimage of `y`, committing the enumeration-least admissible preimage
    /// when `y` is new.
    pub fn preimage(&self, y: &Element) -> Result<Element> {
        self.step(y, true)
    }

    fn step(&self, x: &Element, back: bool) -> Result<Element> {
        if !self.limit.owns(x) {
            return Err(Error::Point(format!("{x} is not an element of {}", self.limit.name())));
        }
        let mut pairs = self.pairs.lock().expect("germ lock");
        let oriented: Vec<(Element, Element)> = pairs
            .iter()
            .map(|(a, b)| if back { (b.clone(), a.clone()) } else { (a.clone(), b.clone()) })
            .collect();
        if let Some((_, y)) = oriented.iter().find(|(a, _)| a == x) {
            return Ok(y.clone());
        }
        let y = if self.limit.is_dlo() {
            let below = oriented.iter().filter(|(a, _)| a < x).max_by(|p, q| p.0.cmp(&q.0));
            let above = oriented.iter().filter(|(a, _)| a > x).min_by(|p, q| p.0.cmp(&q.0));
            let lo = below.and_then(|(_, b)| b.as_rational());
            let hi = above.and_then(|(_, b)| b.as_rational());
            Element::Rational(least_in(lo, hi).expect("images of an order-preserving map leave room"))
        } else {
            self.scan(&oriented, x)?
        };
        pairs.push(if back { (y.clone(), x.clone()) } else { (x.clone(), y.clone()) });
        Ok(y)
    }

    fn scan(&self, oriented: &[(Element, Element)], x: &Element) -> Result<Element> {
        let mut dom: Vec<Element> = oriented.iter().map(|p| p.0.clone()).collect();
        let mut ran: Vec<Element> = oriented.iter().map(|p| p.1.clone()).collect();
        dom.push(x.clone());
        let want = self.limit.qf_type(&dom)?;
        for i in 0..SCAN_BUDGET {
            let y = self.limit.element(i)?;
            if ran.contains(&y) {
                continue;
            }
            ran.push(y.clone());
            let ok = self.limit.qf_type(&ran)? == want;
            ran.pop();
            if ok {
                return Ok(y);
            }
        }
        Err(Error::BudgetExhausted(format!(
            "no partner for {x} among the first {SCAN_BUDGET} elements of {}",
            self.limit.name()
        )))
    }

    /// True when domain and range still have equal types.
    pub fn verify(&self) -> Result<bool> {
        let (dom, ran): (Vec<Element>, Vec<Element>) = self.pairs().into_iter().unzip();
        Ok(self.limit.qf_type(&dom)? == self.limit.qf_type(&ran)?)
    }
}

/// A finite partial automorphism of a group presentation, one germ per column.
#[derive(Clone, Debug)]
pub struct PartialAutomorphism {
    group: GroupPresentation,
    germs: Vec<Germ>,
}

/// Certifies the finite map `pairs` as a partial automorphism of `group`.
/// Stabilizer constants are fixed pointwise.
pub fn automorphism_extending(group: &GroupPresentation, pairs: &[(Point, Point)]) -> Result<PartialAutomorphism> {
    for (a, b) in pairs {
        group.check_point(a)?;
        group.check_point(b)?;
    }
    let (dom, ran): (Vec<Point>, Vec<Point>) = pairs.iter().cloned().unzip();
    if !dom.is_empty() && group.orbit_label(&dom)? != group.orbit_label(&ran)? {
        return Err(Error::TypeMismatch(format!(
            "({}) and ({}) lie in different orbits of {group}",
            dom.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "),
            ran.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
        )));
    }
    let cols = group.columns();
    let mut seeds: Vec<Vec<(Element, Element)>> = vec![Vec::new(); cols];
    for c in group.constants() {
        for (i, e) in c.leaves().into_iter().enumerate() {
            seeds[i].push((e.clone(), e.clone()));
        }
    }
    for (a, b) in pairs {
        for (i, (x, y)) in a.leaves().into_iter().zip(b.leaves()).enumerate() {
            seeds[i].push((x.clone(), y.clone()));
        }
    }
    let limit = group.limit().clone();
    let germs = seeds
        .into_iter()
        .map(|s| Germ::new(limit.clone(), s))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartialAutomorphism {
        group: group.clone(),
        germs,
    })
}

impl PartialAutomorphism {
    pub fn group(&self) -> &GroupPresentation {
        &self.group
    }

    pub fn germs(&self) -> &[Germ] {
        &self.germs
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        self.group.check_point(p)?;
        let leaves = p
            .leaves()
            .into_iter()
            .zip(&self.germs)
            .map(|(x, g)| g.image(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.group.assemble(&leaves))
    }

    pub fn apply_inverse(&self, p: &Point) -> Result<Point> {
        self.group.check_point(p)?;
        let leaves = p
            .leaves()
            .into_iter()
            .zip(&self.germs)
            .map(|(y, g)| g.preimage(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.group.assemble(&leaves))
    }

    pub fn verify(&self) -> Result<bool> {
        for g in &self.germs {
            if !g.verify()? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
