use std::collections::BTreeSet;
use std::sync::Arc;

use canonfn_core::fraisse::rational::{enumeration_index, least_in, nth, rat};
use canonfn_core::fraisse::{build_limit, AgeOracle, Element, FiniteStructure, LimitStructure};
use proptest::prelude::*;

fn limits() -> Vec<Arc<LimitStructure>> {
    vec![Arc::new(LimitStructure::dlo()), Arc::new(LimitStructure::rado())]
}

/// Explicit partial-map check: `s_i -> t_i` is a well-defined injection that
/// preserves every binary relation of the realised fragment.
fn partial_iso(frag: &FiniteStructure, s: &[usize], t: &[usize]) -> bool {
    let n = s.len();
    for i in 0..n {
        for j in 0..n {
            if (s[i] == s[j]) != (t[i] == t[j]) {
                return false;
            }
            for sym in 0..frag.signature().len() {
                if frag.holds(sym, &[s[i], s[j]]) != frag.holds(sym, &[t[i], t[j]]) {
                    return false;
                }
            }
        }
    }
    true
}

fn elems(limit: &LimitStructure, idx: &[usize]) -> Vec<Element> {
    idx.iter().map(|&i| limit.element(i).unwrap()).collect()
}

proptest! {
    #[test]
    fn types_are_orbit_invariants(
        which in 0usize..2,
        s in prop::collection::vec(0usize..16, 1..=4),
        seed in prop::collection::vec(0usize..16, 4),
    ) {
        let limit = &limits()[which];
        let t: Vec<usize> = seed[..s.len()].to_vec();
        let frag = limit.fragment(16).unwrap();
        let same_type = limit.qf_type(&elems(limit, &s)).unwrap() == limit.qf_type(&elems(limit, &t)).unwrap();
        prop_assert_eq!(same_type, partial_iso(&frag, &s, &t));
    }

    #[test]
    fn reindexing_commutes_with_types(
        which in 0usize..2,
        t in prop::collection::vec(0usize..16, 1..=4),
        raw_sigma in prop::collection::vec(0usize..4, 1..=4),
    ) {
        let limit = &limits()[which];
        let sigma: Vec<usize> = raw_sigma.iter().map(|&i| i % t.len()).collect();
        let moved: Vec<usize> = sigma.iter().map(|&i| t[i]).collect();
        let direct = limit.qf_type(&elems(limit, &moved)).unwrap();
        let reindexed = limit.qf_type(&elems(limit, &t)).unwrap().reindex(&sigma);
        prop_assert_eq!(direct, reindexed);
    }

    #[test]
    fn enumeration_is_a_bijection_on_prefixes(i in 0u64..5000) {
        prop_assert_eq!(enumeration_index(&nth(i)), Some(i));
    }

    #[test]
    fn least_in_lies_strictly_inside(a in -50i64..50, b in 1i64..20, c in 1i64..50, d in 1i64..20) {
        let lo = rat(a, b);
        let hi = &lo + rat(c, d);
        let x = least_in(Some(&lo), Some(&hi)).unwrap();
        prop_assert!(lo < x && x < hi);
    }
}

#[test]
fn orbit_counts_are_weak_orders() {
    let dlo = LimitStructure::dlo();
    let brute = |k: usize| {
        (0..k.pow(k as u32))
            .filter(|code| {
                let ranks: BTreeSet<usize> = (0..k).map(|i| code / k.pow(i as u32) % k).collect();
                ranks.iter().copied().eq(0..ranks.len())
            })
            .count()
    };
    for k in 1..=4 {
        assert_eq!(dlo.count_orbits(k).unwrap(), brute(k));
    }
}

#[test]
fn construction_is_deterministic() {
    for age in [AgeOracle::graphs(), AgeOracle::ordered_graphs(), AgeOracle::linear_orders()] {
        let a = build_limit(age.clone(), 12).unwrap();
        let b = build_limit(age, 12).unwrap();
        assert_eq!(a.fragment(12).unwrap(), b.fragment(12).unwrap());
        assert_eq!(a.demand_log(), b.demand_log());
    }
}

#[test]
fn fragments_are_nested() {
    let limit = build_limit(AgeOracle::graphs(), 8).unwrap();
    let small = limit.fragment(8).unwrap();
    limit.ensure(20).unwrap();
    let big = limit.fragment(20).unwrap();
    assert_eq!(big.induced(&(0..8).collect::<Vec<_>>()), small);
}

#[test]
fn graph_limit_has_small_extension_property() {
    let n = 32;
    let limit = build_limit(AgeOracle::graphs(), n).unwrap();
    let frag = limit.fragment(n).unwrap();
    for m in 0..=3usize {
        for u in 0u32..1 << m {
            let realised = (m..n).any(|v| (0..m).all(|i| frag.holds(0, &[i, v]) == (u >> i & 1 == 1)));
            assert!(realised, "no vertex joined to exactly {u:b} over the first {m}");
        }
    }
}
