//! Behavior tables: per-arity maps from source orbit labels to target orbit
//! labels, with coherence under index maps, enumeration and realisation.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fraisse::limit::check_arity;
use crate::fraisse::structure::all_tuples;
use crate::group::{GroupPresentation, OrbitLabel, Point};

/// Target horizon multiplier used by [`realize_behavior`].
pub const TARGET_RATIO: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorTable {
    source: GroupPresentation,
    target: GroupPresentation,
    max_arity: usize,
    maps: Vec<BTreeMap<OrbitLabel, OrbitLabel>>,
}

/// Label of `(t_{sigma(0)}, .., t_{sigma(j-1)})` given the label of `t`.
pub fn reindex(group: &GroupPresentation, label: &OrbitLabel, sigma: &[usize]) -> OrbitLabel {
    group.reindex(label, sigma)
}

/// All maps `{0..j-1} -> {0..k-1}` for `j = 1..=max_j`, by `j` and then
/// lexicographically.
pub fn index_maps(max_j: usize, k: usize) -> Vec<Vec<usize>> {
    (1..=max_j).flat_map(|j| all_tuples(k, j)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coherence {
    Ok,
    Violation { sigma: Vec<usize>, label: OrbitLabel },
}

impl Coherence {
    pub fn is_ok(&self) -> bool {
        matches!(self, Coherence::Ok)
    }
}

impl BehaviorTable {
    pub fn new(source: GroupPresentation, target: GroupPresentation, max_arity: usize) -> Self {
        BehaviorTable {
            source,
            target,
            max_arity,
            maps: vec![BTreeMap::new(); max_arity],
        }
    }

    pub fn source(&self) -> &GroupPresentation {
        &self.source
    }

    pub fn target(&self) -> &GroupPresentation {
        &self.target
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn map(&self, k: usize) -> &BTreeMap<OrbitLabel, OrbitLabel> {
        &self.maps[k - 1]
    }

    pub fn len(&self) -> usize {
        self.maps.iter().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, label: &OrbitLabel) -> Option<&OrbitLabel> {
        let k = self.source.label_arity(label);
        self.maps.get(k.checked_sub(1)?)?.get(label)
    }

    /// Records an entry; fails if the label already maps elsewhere.
    pub fn insert(&mut self, from: OrbitLabel, to: OrbitLabel) -> Result<()> {
        let k = self.source.label_arity(&from);
        if k == 0 || k > self.max_arity || self.target.label_arity(&to) != k {
            return Err(Error::TypeMismatch(format!(
                "entry {} -> {} does not fit arity 1..={}",
                self.source.format_label(&from),
                self.target.format_label(&to),
                self.max_arity
            )));
        }
        match self.maps[k - 1].get(&from) {
            Some(old) if old != &to => Err(Error::TypeMismatch(format!(
                "{} already maps to {}",
                self.source.format_label(&from),
                self.target.format_label(old)
            ))),
            _ => {
                self.maps[k - 1].insert(from, to);
                Ok(())
            }
        }
    }

    /// Entries in arity order and then label order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &OrbitLabel, &OrbitLabel)> {
        self.maps
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.iter().map(move |(a, b)| (i + 1, a, b)))
    }

    /// True when every admissible source label up to the maximal arity has
    /// an entry.
    pub fn is_total(&self) -> Result<bool> {
        for k in 1..=self.max_arity {
            if self.source.count_orbits(k)? != self.maps[k - 1].len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The same table cut down to arities `<= k`.
    pub fn restrict(&self, k: usize) -> BehaviorTable {
        let mut t = self.clone();
        t.max_arity = k.min(self.max_arity);
        t.maps.truncate(t.max_arity);
        t
    }

    /// True when every entry of `self` also appears in `other`.
    pub fn agrees_with(&self, other: &BehaviorTable) -> bool {
        self.entries().all(|(_, a, b)| other.get(a) == Some(b))
    }
}

impl fmt::Display for BehaviorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a, b) in self.entries() {
            writeln!(
                f,
                "{k}: {} -> {}",
                self.source.format_label(a),
                self.target.format_label(b)
            )?;
        }
        Ok(())
    }
}

/// Checks `B_j(reindex(tau, sigma)) = reindex(B_k(tau), sigma)` over present
/// entries, in `(k, sigma, tau)` order, and reports the first failure.
pub fn coherence_check(table: &BehaviorTable) -> Coherence {
    let (src, tgt) = (&table.source, &table.target);
    for k in 1..=table.max_arity {
        let sigmas = index_maps(table.max_arity, k);
        for sigma in &sigmas {
            for (tau, image) in table.map(k) {
                let lhs = table.get(&src.reindex(tau, sigma));
                if let Some(lhs) = lhs {
                    if *lhs != tgt.reindex(image, sigma) {
                        return Coherence::Violation {
                            sigma: sigma.clone(),
                            label: tau.clone(),
                        };
                    }
                }
            }
        }
    }
    Coherence::Ok
}

/// Constraints that mention the entry `(k, tau)` against entries already in
/// the table.
pub(crate) fn entry_consistent(table: &BehaviorTable, k: usize, tau: &OrbitLabel, image: &OrbitLabel) -> bool {
    let (src, tgt) = (&table.source, &table.target);
    for sigma in index_maps(table.max_arity, k) {
        if let Some(lhs) = table.get(&src.reindex(tau, &sigma)) {
            if *lhs != tgt.reindex(image, &sigma) {
                return false;
            }
        }
    }
    // entries of any arity that reindex onto `tau`
    for (k2, tau2, image2) in table.entries() {
        for sigma in all_tuples(k2, k) {
            if src.reindex(tau2, &sigma) == *tau && tgt.reindex(image2, &sigma) != *image {
                return false;
            }
        }
    }
    true
}

/// All coherent total tables up to arity `max_arity`, in lexicographic order
/// of their map graphs.
pub fn enumerate_behaviors(
    source: &GroupPresentation,
    target: &GroupPresentation,
    max_arity: usize,
) -> Result<Vec<BehaviorTable>> {
    check_arity(max_arity)?;
    let mut slots: Vec<(usize, OrbitLabel, Vec<OrbitLabel>)> = Vec::new();
    for k in 1..=max_arity {
        let targets = target.admissible_labels(k)?;
        for tau in source.admissible_labels(k)? {
            slots.push((k, tau, targets.clone()));
        }
    }
    let mut out = Vec::new();
    let mut table = BehaviorTable::new(source.clone(), target.clone(), max_arity);
    enumerate_from(&slots, 0, &mut table, &mut out);
    Ok(out)
}

fn enumerate_from(
    slots: &[(usize, OrbitLabel, Vec<OrbitLabel>)],
    next: usize,
    table: &mut BehaviorTable,
    out: &mut Vec<BehaviorTable>,
) {
    if next == slots.len() {
        out.push(table.clone());
        return;
    }
    let (k, tau, candidates) = &slots[next];
    for image in candidates {
        if entry_consistent(table, *k, tau, image) {
            table.maps[k - 1].insert(tau.clone(), image.clone());
            enumerate_from(slots, next + 1, table, out);
            table.maps[k - 1].remove(tau);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Realization {
    Witness(Vec<(Point, Point)>),
    Exhausted,
}

/// Searches for a map from the first `n` source points into the first
/// `TARGET_RATIO * n` target points that induces `table` on every tuple of
/// arity at most the table's arity. Labels without an entry are unconstrained.
pub fn realize_behavior(table: &BehaviorTable, n: usize) -> Result<Realization> {
    let domain = table.source.domain_prefix(n)?;
    let range = table.target.domain_prefix(TARGET_RATIO * n)?;
    let mut images: Vec<usize> = Vec::with_capacity(n);
    if realize_from(table, &domain, &range, &mut images)? {
        Ok(Realization::Witness(
            domain
                .into_iter()
                .zip(images)
                .map(|(x, i)| (x, range[i].clone()))
                .collect(),
        ))
    } else {
        Ok(Realization::Exhausted)
    }
}

fn realize_from(table: &BehaviorTable, domain: &[Point], range: &[Point], images: &mut Vec<usize>) -> Result<bool> {
    let i = images.len();
    if i == domain.len() {
        return Ok(true);
    }
    for cand in 0..range.len() {
        images.push(cand);
        if new_tuples_respect(table, domain, range, images)? && realize_from(table, domain, range, images)? {
            return Ok(true);
        }
        images.pop();
    }
    Ok(false)
}

fn new_tuples_respect(table: &BehaviorTable, domain: &[Point], range: &[Point], images: &[usize]) -> Result<bool> {
    let last = images.len() - 1;
    for k in 1..=table.max_arity {
        for t in all_tuples(images.len(), k) {
            if !t.contains(&last) {
                continue;
            }
            let src: Vec<Point> = t.iter().map(|&i| domain[i].clone()).collect();
            let Some(want) = table.get(&table.source.orbit_label(&src)?) else {
                continue;
            };
            let img: Vec<Point> = t.iter().map(|&i| range[images[i]].clone()).collect();
            if table.target.orbit_label(&img)? != *want {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::{Element, LimitStructure};
    use std::sync::Arc;

    fn dlo() -> GroupPresentation {
        GroupPresentation::aut_dlo()
    }

    fn lab(s: &str) -> OrbitLabel {
        dlo().parse_label(s).unwrap()
    }

    fn table(entries: &[(&str, &str)], k: usize) -> BehaviorTable {
        let mut t = BehaviorTable::new(dlo(), dlo(), k);
        for (a, b) in entries {
            t.insert(lab(a), lab(b)).unwrap();
        }
        t
    }

    #[test]
    fn reindex_examples() {
        let g = dlo();
        assert_eq!(reindex(&g, &lab("1<2"), &[1, 0]), lab("2<1"));
        assert_eq!(reindex(&g, &lab("1<2"), &[0, 0]), lab("1=2"));
        assert_eq!(reindex(&g, &lab("1<2<3"), &[0, 2]), lab("1<2"));
    }

    #[test]
    fn coherence_examples() {
        let reversal = table(&[("1", "1"), ("1=2", "1=2"), ("1<2", "2<1"), ("2<1", "1<2")], 2);
        assert!(coherence_check(&reversal).is_ok());
        let squash = table(&[("1", "1"), ("1=2", "1=2"), ("1<2", "1<2"), ("2<1", "1<2")], 2);
        assert_eq!(
            coherence_check(&squash),
            Coherence::Violation {
                sigma: vec![1, 0],
                label: lab("1<2")
            }
        );
        assert!(coherence_check(&table(&[("1", "1")], 1)).is_ok());
    }

    #[test]
    fn dlo_taxonomy() {
        let two = enumerate_behaviors(&dlo(), &dlo(), 2).unwrap();
        assert_eq!(two.len(), 3);
        let images: Vec<&OrbitLabel> = two.iter().map(|t| t.get(&lab("1<2")).unwrap()).collect();
        assert_eq!(images, vec![&lab("1=2"), &lab("1<2"), &lab("2<1")]);
        let three = enumerate_behaviors(&dlo(), &dlo(), 3).unwrap();
        assert_eq!(three.len(), 3);
        for (a, b) in two.iter().zip(&three) {
            assert_eq!(&b.restrict(2), a);
            assert!(coherence_check(b).is_ok());
        }
    }

    #[test]
    fn pure_set_taxonomy() {
        let g = GroupPresentation::aut(Arc::new(LimitStructure::pure_set()));
        assert_eq!(enumerate_behaviors(&g, &g, 2).unwrap().len(), 2);
    }

    #[test]
    fn realization_examples() {
        let all = enumerate_behaviors(&dlo(), &dlo(), 2).unwrap();
        let (constant, decreasing) = (&all[0], &all[2]);
        let Realization::Witness(w) = realize_behavior(decreasing, 3).unwrap() else {
            panic!("decreasing behavior is realisable");
        };
        let (dom, ran): (Vec<Point>, Vec<Point>) = w.into_iter().unzip();
        let negated: Vec<Point> = dom
            .iter()
            .map(|p| match p {
                Point::Elem(Element::Rational(q)) => Point::Elem(Element::Rational(-q.clone())),
                other => other.clone(),
            })
            .collect();
        assert_eq!(dlo().orbit_label(&ran).unwrap(), dlo().orbit_label(&negated).unwrap());
        let Realization::Witness(w) = realize_behavior(constant, 4).unwrap() else {
            panic!("constant behavior is realisable");
        };
        assert!(w.iter().all(|(_, y)| *y == w[0].1));
        let bad = table(&[("1", "1"), ("1=2", "1<2"), ("1<2", "1<2"), ("2<1", "2<1")], 2);
        assert_eq!(realize_behavior(&bad, 2).unwrap(), Realization::Exhausted);
    }
}
