use canonfn_core::fraisse::rational::{nth, rat};
use canonfn_core::fraisse::Rat;
use canonfn_core::symbolic::{automorphism_moving, canonical_iso, pham_refute, ComputableDenseSet};
use proptest::prelude::*;

fn pham() -> canonfn_core::symbolic::BackAndForthMap {
    canonical_iso(ComputableDenseSet::rationals(), ComputableDenseSet::without_zero()).unwrap()
}

/// Exact check that the pairs form a strictly increasing injection.
fn strictly_increasing(pairs: &[(Rat, Rat)]) -> bool {
    pairs.iter().all(|(x1, y1)| pairs.iter().all(|(x2, y2)| (x1 < x2) == (y1 < y2) && (x1 == x2) == (y1 == y2)))
}

#[test]
fn constructions_agree() {
    let (a, b) = (pham(), pham());
    for i in (0..32).rev() {
        assert_eq!(a.eval(&nth(i)).unwrap(), b.eval(&nth(i)).unwrap());
    }
    let (a, b) = (pham(), pham());
    a.run_to(40).unwrap();
    b.run_to(40).unwrap();
    assert_eq!(a.commits()[..40], b.commits()[..40]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_stage_is_an_order_isomorphism(n in 1usize..80) {
        let f = pham();
        f.run_to(n).unwrap();
        let pairs = f.commits();
        prop_assert!(pairs.len() >= n);
        prop_assert!(strictly_increasing(&pairs));
        prop_assert!(pairs.iter().all(|(_, y)| *y != rat(0, 1)));
        prop_assert!(f.is_sound());
    }

    #[test]
    fn evaluation_round_trips(i in 0u64..200, a in 0u64..20, b in 0u64..20) {
        let f = pham();
        let x = nth(i);
        let y = f.eval(&x).unwrap();
        prop_assert_eq!(f.eval_inverse(&y).unwrap(), x.clone());
        let alpha = automorphism_moving(nth(a), nth(b));
        prop_assert_eq!(alpha.eval(&nth(a)).unwrap(), nth(b));
        prop_assert_eq!(alpha.eval_inverse(&alpha.eval(&x).unwrap()).unwrap(), x);
        prop_assert!(strictly_increasing(&alpha.commits()));
    }
}

#[test]
fn certificates_recompute_at_every_precision() {
    for d in [8, 16, 32, 64] {
        let c = pham_refute(&rat(1, d), 4096).unwrap();
        for (claim, ok) in c.claims().unwrap() {
            assert!(ok, "1/{d}: {claim}");
        }
        assert!(c.lower.x < c.upper.x || c.upper.x < c.lower.x);
    }
}
