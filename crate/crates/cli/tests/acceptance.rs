//! End-to-end acceptance run: one pass/fail line per criterion, each checked
//! against an independent oracle written here and against its time limit.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use canonfn_core::behavior::enumerate_behaviors;
use canonfn_core::canonicity::{
    check_canonical, check_canonical_on, local_equal, proposition_harness, tower_witness, TowerOutcome, Verdict,
};
use canonfn_core::canonize::{canonize, canonize_with_constants, CanonicalApproximation, CanonizeOutcome};
use canonfn_core::fraisse::age::nth_extension;
use canonfn_core::fraisse::rational::{int, rat};
use canonfn_core::fraisse::structure::find_isomorphism;
use canonfn_core::fraisse::{build_limit, AgeOracle, Element, FiniteStructure, LimitStructure, Rat};
use canonfn_core::group::{GroupPresentation, Point};
use canonfn_core::oracle::FunctionOracle;
use canonfn_core::ramsey::{mono_subset, PairColoring};
use canonfn_core::text::load_certificate;

type Outcome = Result<(), String>;

const MIXED: &str = "pieces:[(-inf,0):x*-1; [0,inf):x]";

const SUITE: [&str; 10] = [
    MIXED,
    "id",
    "neg",
    "const:3",
    "pieces:[(-inf,1):x; [1,inf):-x]",
    "pieces:[(-inf,0):2*x+1; [0,inf):x*-1/2]",
    "pieces:[(-inf,-1):x; [-1,1):-x; [1,inf):x]",
    "pieces:[(-inf,0):-x; [0,1):x; [1,inf):-x+5]",
    "pieces:[(-inf,0):0; [0,inf):x]",
    "pieces:[(-inf,-1):x+1; [-1,2):7; [2,inf):-x]",
];

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn dlo() -> GroupPresentation {
    GroupPresentation::aut_dlo()
}

fn oracle(s: &str) -> FunctionOracle {
    FunctionOracle::parse(s, &|p| panic!("no table oracles here: {p}")).expect("oracle parses")
}

fn q(n: i64) -> Point {
    Point::Elem(Element::Rational(int(n)))
}

fn value(p: &Point) -> Rat {
    match p {
        Point::Elem(Element::Rational(x)) => x.clone(),
        other => panic!("not a rational point: {other}"),
    }
}

fn columns(p: &Point) -> Vec<Rat> {
    match p {
        Point::Tuple(ps) => ps.iter().map(value).collect(),
        single => vec![value(single)],
    }
}

/// Pairwise comparisons of a rational tuple: its order type, computed
/// without any orbit-label machinery.
fn pattern(xs: &[Rat]) -> Vec<Ordering> {
    let mut out = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            out.push(xs[i].cmp(&xs[j]));
        }
    }
    out
}

/// Brute-force canonicity over `(Q,<)`: the order type of each tuple of
/// arity `<= arity` determines the order type of its image.
fn brute_canonical(f: &FunctionOracle, domain: &[Point], arity: usize) -> bool {
    let xs: Vec<Rat> = domain.iter().map(value).collect();
    let ys: Vec<Rat> = domain.iter().map(|p| value(&f.eval(p).expect("f evaluates"))).collect();
    let mut seen = std::collections::BTreeMap::new();
    let mut idx = vec![0usize; arity];
    for k in 1..=arity {
        let total = domain.len().pow(k as u32);
        for code in 0..total {
            let mut c = code;
            for slot in idx.iter_mut().take(k) {
                *slot = c % domain.len();
                c /= domain.len();
            }
            let src: Vec<Rat> = idx[..k].iter().map(|&i| xs[i].clone()).collect();
            let img: Vec<Rat> = idx[..k].iter().map(|&i| ys[i].clone()).collect();
            if let Some(prev) = seen.insert((k, pattern(&src)), pattern(&img)) {
                if prev != pattern(&img) {
                    return false;
                }
            }
        }
    }
    true
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_canonfn")).args(args).output().expect("binary runs");
    let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
    text += &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn field<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(':')).map(str::trim))
}

/// Ordered set partitions of `{0..k}` counted by brute force over all maps
/// `k -> k` whose image is an initial segment: the weak orders on `k` points.
fn weak_orders(k: usize) -> usize {
    let mut count = 0;
    for code in 0..k.pow(k as u32) {
        let mut c = code;
        let ranks: Vec<usize> = (0..k)
            .map(|_| {
                let r = c % k;
                c /= k;
                r
            })
            .collect();
        let used: BTreeSet<usize> = ranks.iter().copied().collect();
        if used.iter().copied().eq(0..used.len()) {
            count += 1;
        }
    }
    count.max(usize::from(k == 0))
}

fn criterion_1() -> Outcome {
    let known = [1, 3, 13, 75];
    for k in 1..=4 {
        let (code, out) = cli(&["orbits", "dlo", "--arity", &k.to_string()]);
        ensure!(code == 0, "orbits --arity {k} exited {code}: {out}");
        let n: usize = field(&out, "orbits").and_then(|v| v.parse().ok()).ok_or(format!("no count in {out:?}"))?;
        let brute = weak_orders(k);
        ensure!(n == brute && n == known[k - 1], "arity {k}: cli {n}, brute force {brute}, expected {}", known[k - 1]);
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    for arity in ["2", "3"] {
        let (code, out) = cli(&["behaviors", "--source", "aut(dlo)", "--target", "aut(dlo)", "--arity", arity]);
        ensure!(code == 0, "behaviors --arity {arity} exited {code}");
        ensure!(field(&out, "tables") == Some("3"), "arity {arity}: {:?}", field(&out, "tables"));
        ensure!(out.lines().filter(|l| *l == "coherent: ok").count() == 3, "arity {arity}: incoherent table listed");
        let images: BTreeSet<&str> =
            out.lines().filter_map(|l| l.strip_prefix("2: 1<2 -> ")).map(str::trim).collect();
        let expected: BTreeSet<&str> = ["1<2", "2<1", "1=2"].into_iter().collect();
        ensure!(images == expected, "arity {arity}: images of 1<2 are {images:?}");
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let g = dlo();
    let domain = g.domain_prefix(16).map_err(|e| e.to_string())?;
    for name in ["id", "neg", "const:0", "const:1/2"] {
        let f = oracle(name);
        let v = check_canonical(&f, &g, &g, 16, 3).map_err(|e| e.to_string())?;
        ensure!(v.is_canonical(), "{name} refuted: {}", v.report());
        ensure!(brute_canonical(&f, &domain, 3), "{name}: brute force disagrees");
        let b = v.behavior().expect("canonical verdict has a behavior");
        let top = b.get(&g.parse_label("3<2<1").unwrap()).map(|l| g.format_label(l));
        let want = match name {
            "id" => "3<2<1",
            "neg" => "1<2<3",
            _ => "1=2=3",
        };
        ensure!(top.as_deref() == Some(want), "{name}: 3<2<1 -> {top:?}");
    }
    let refuted = [
        MIXED,
        "pieces:[(-inf,1):x; [1,inf):-x]",
        "pieces:[(-inf,0):0; [0,inf):x]",
        "pieces:[(-inf,-1):x+1; [-1,2):7; [2,inf):-x]",
        "pieces:[(-inf,0):-x; [0,1):x; [1,inf):-x+5]",
    ];
    for name in refuted {
        let f = oracle(name);
        let v = check_canonical(&f, &g, &g, 16, 3).map_err(|e| e.to_string())?;
        let c = v.counterexample().ok_or(format!("{name} certified canonical"))?;
        ensure!(!brute_canonical(&f, &domain, 3), "{name}: brute force finds it canonical");
        ensure!(c.recheck(&f, &g, &g).map_err(|e| e.to_string())?, "{name}: recheck failed");
        let xs: Vec<Rat> = c.s.iter().map(value).collect();
        let ts: Vec<Rat> = c.t.iter().map(value).collect();
        let fs: Vec<Rat> = c.s.iter().map(|p| value(&f.eval(p).unwrap())).collect();
        let ft: Vec<Rat> = c.t.iter().map(|p| value(&f.eval(p).unwrap())).collect();
        ensure!(pattern(&xs) == pattern(&ts), "{name}: s and t have different order types");
        ensure!(pattern(&fs) != pattern(&ft), "{name}: images share an order type");
        ensure!(c.image_s.iter().map(value).eq(fs) && c.image_t.iter().map(value).eq(ft), "{name}: stored images stale");
    }
    Ok(())
}

/// The approximation's sample is monotone, antitone or constant on its
/// domain, checked with plain rational comparisons.
fn sample_shape(a: &CanonicalApproximation) -> Option<Ordering> {
    let xs: Vec<Rat> = a.sample.iter().map(|(x, _)| value(x)).collect();
    let ys: Vec<Rat> = a.sample.iter().map(|(_, y)| value(y)).collect();
    let mut shape = None;
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if xs[i] < xs[j] {
                let s = ys[i].cmp(&ys[j]);
                if *shape.get_or_insert(s) != s {
                    return None;
                }
            }
        }
    }
    shape
}

fn criterion_4() -> Outcome {
    let g = dlo();
    let tables = enumerate_behaviors(&g, &g, 2).map_err(|e| e.to_string())?;
    ensure!(tables.len() == 3, "{} reference tables", tables.len());
    for name in SUITE {
        let f = oracle(name);
        let out = canonize(&f, &g, &g, 2, 6, 64).map_err(|e| e.to_string())?;
        let CanonizeOutcome::Approximation(a) = out else {
            return Err(format!("{name}: {out:?}"));
        };
        ensure!(a.tower.depth() == 6 && a.tower.levels_certified(), "{name}: tower not certified");
        let domain: Vec<Point> = a.sample.iter().map(|(x, _)| x.clone()).collect();
        let v = check_canonical_on(a.sample_oracle(), &g, &g, &domain, 2).map_err(|e| e.to_string())?;
        ensure!(v.is_canonical(), "{name}: certificate does not recheck");
        ensure!(brute_canonical(a.sample_oracle(), &domain, 2), "{name}: brute force rejects sample");
        for (x, y) in &a.sample {
            ensure!(a.sample_oracle().eval(x).ok().as_ref() == Some(y), "{name}: sample differs from f a at {x}");
        }
        let hits = tables.iter().filter(|t| a.behavior.agrees_with(t) && t.agrees_with(&a.behavior)).count();
        ensure!(hits == 1, "{name}: behavior matches {hits} reference tables");
        ensure!(sample_shape(&a).is_some(), "{name}: sample is not monotone, antitone or constant");
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("constants.txt");
    std::fs::write(&path, "# the constant\n0\n").map_err(|e| e.to_string())?;
    let (code, out) = cli(&["canonize", "--f", "id", "--arity", "1", "--constants", path.to_str().unwrap()]);
    ensure!(code == 0 && field(&out, "result") == Some("canonical-approximation"), "cli run: {out}");
    let entries = out.lines().filter(|l| l.starts_with("1: ")).count();

    let id = oracle("id");
    let out = canonize_with_constants(&id, 1, &[q(0)], 1, 6, 64).map_err(|e| e.to_string())?;
    let a = out.approximation().ok_or("library run exhausted its horizon")?;
    ensure!(a.agrees_at_constants(&id).map_err(|e| e.to_string())?, "sample moves the constant");
    ensure!(a.constants == vec![(q(0), q(0))], "constants {:?}", a.constants);
    let stab = GroupPresentation::stabilizer(dlo(), vec![q(0)]).map_err(|e| e.to_string())?;
    let orbits = stab.count_orbits(1).map_err(|e| e.to_string())?;
    let signs: BTreeSet<Ordering> = (-8..=8).map(|n| int(n).cmp(&int(0))).collect();
    ensure!(
        a.behavior.map(1).len() == 3 && entries == 3 && orbits == 3 && signs.len() == 3,
        "library {}, cli {entries}, orbits {orbits}, independent {}",
        a.behavior.map(1).len(),
        signs.len()
    );

    let min = oracle("min");
    let out = canonize_with_constants(&min, 2, &[], 2, 4, 16).map_err(|e| e.to_string())?;
    let a = out.approximation().ok_or("min run exhausted its horizon")?;
    ensure!(matches!(a.certificate, Verdict::CanonicalUpTo { arity: 2, .. }), "min certificate {:?}", a.certificate.report());
    let power = GroupPresentation::power(dlo(), 2).map_err(|e| e.to_string())?;
    let proj = (0..2).find(|&i| {
        a.sample.iter().all(|(x, _)| x.leaves().len() == 2)
            && pairs_of(&a.sample).all(|((x1, y1), (x2, y2))| {
                columns(x1)[i].cmp(&columns(x2)[i]) == value(y1).cmp(&value(y2))
            })
    });
    let i = proj.ok_or("sample follows no single column")?;
    let reference = check_canonical(&FunctionOracle::Proj(i), &power, &dlo(), 8, 2).map_err(|e| e.to_string())?;
    let reference = reference.behavior().ok_or("projection is not canonical")?;
    ensure!(a.behavior.agrees_with(reference) && reference.agrees_with(&a.behavior), "min behavior is not proj:{i}");
    Ok(())
}

fn pairs_of<T>(xs: &[T]) -> impl Iterator<Item = (&T, &T)> {
    xs.iter().enumerate().flat_map(move |(i, a)| xs[i + 1..].iter().map(move |b| (a, b)))
}

fn criterion_6() -> Outcome {
    let pairs: Vec<(usize, usize)> = (1..=6).flat_map(|i| (i + 1..=6).map(move |j| (i, j))).collect();
    for bits in 0u64..1 << 15 {
        let c = PairColoring::from_bits(6, bits);
        let (set, color) = mono_subset(&c, 3).ok_or(format!("coloring {bits:#x} has no monochromatic triangle"))?;
        let bit = |i: usize, j: usize| 1 + ((bits >> pairs.iter().position(|&p| p == (i, j)).unwrap()) & 1) as usize;
        ensure!(set.len() == 3 && set.windows(2).all(|w| w[0] < w[1]), "{bits:#x}: bad subset {set:?}");
        let (a, b, d) = (set[0], set[1], set[2]);
        ensure!(bit(a, b) == color && bit(a, d) == color && bit(b, d) == color, "{bits:#x}: {set:?} not monochromatic");
    }
    let pentagon = PairColoring::cycle(5);
    let adjacent = |i: usize, j: usize| j - i == 1 || (i == 1 && j == 5);
    for a in 1..=5 {
        for b in a + 1..=5 {
            for d in b + 1..=5 {
                let e = [adjacent(a, b), adjacent(a, d), adjacent(b, d)];
                ensure!(e.iter().any(|x| *x) && !e.iter().all(|x| *x), "pentagon triple {a},{b},{d} monochromatic");
            }
        }
    }
    ensure!(mono_subset(&pentagon, 3).is_none(), "pentagon reported a monochromatic triangle");
    Ok(())
}

fn criterion_7() -> Outcome {
    let g = dlo();
    let f = oracle("pham");
    let v = check_canonical(&f, &g, &g, 16, 3).map_err(|e| e.to_string())?;
    ensure!(v.is_canonical(), "pham refuted: {}", v.report());
    let b = v.behavior().unwrap();
    ensure!(b.get(&g.parse_label("1<2").unwrap()) == Some(&g.parse_label("1<2").unwrap()), "pham is not increasing");
    let domain = g.domain_prefix(16).map_err(|e| e.to_string())?;
    ensure!(brute_canonical(&f, &domain, 3), "brute force rejects pham");

    let f_alpha = oracle("compose(pham, alpha(-1,0))");
    let first = g.domain_prefix(12).map_err(|e| e.to_string())?;
    for mask in 1u32..1 << 12 {
        let set: Vec<Point> = (0..12).filter(|i| mask >> i & 1 == 1).map(|i| first[i].clone()).collect();
        ensure!(local_equal(&f, &f_alpha, &set, &g).map_err(|e| e.to_string())?, "local equality fails on {mask:#x}");
        let fx: Vec<Rat> = set.iter().map(|p| value(&f.eval(p).unwrap())).collect();
        let gx: Vec<Rat> = set.iter().map(|p| value(&f_alpha.eval(p).unwrap())).collect();
        ensure!(pattern(&fx) == pattern(&gx), "order types differ on {mask:#x}");
    }

    let (code, out) = cli(&["pham", "--epsilon", "1/8"]);
    ensure!(code == 0 && field(&out, "verified") == Some("true"), "pham cli: {out}");
    let body: String = out
        .lines()
        .filter(|l| !l.starts_with("result:") && !l.starts_with("claim:") && !l.starts_with("verified:"))
        .map(|l| format!("{l}\n"))
        .collect();
    let c = load_certificate(&body).map_err(|e| e.to_string())?;
    ensure!(c.epsilon == rat(1, 8), "epsilon {}", c.epsilon);
    let zero = int(0);
    let fmap = oracle("pham");
    let alpha = oracle("alpha(-1,0)");
    let at = |o: &FunctionOracle, x: &Rat| o.eval_rat(x).unwrap();
    ensure!(at(&fmap, &c.a) == c.f_a && at(&alpha, &c.a) == c.alpha_a && at(&fmap, &c.alpha_a) == c.f_alpha_a, "a-values");
    ensure!(c.f_a < zero && zero < c.f_alpha_a, "f(a) = {}, f(alpha(a)) = {}", c.f_a, c.f_alpha_a);
    for p in [&c.lower, &c.upper] {
        ensure!(at(&fmap, &p.x) == p.fx && at(&f_alpha, &p.x) == p.gx, "probe at {} does not recompute", p.x);
    }
    ensure!(c.lower.fx < zero && zero < c.upper.fx, "probes do not straddle 0");
    ensure!(&c.upper.gx - &c.lower.gx < c.epsilon, "bracket wider than epsilon");
    ensure!(c.lower.gx > zero || c.upper.gx < zero, "bracket contains 0");
    let gap = (-c.f_a.clone()).min(c.f_alpha_a.clone());
    ensure!(c.epsilon < gap, "epsilon {} not below gap {gap}", c.epsilon);
    ensure!(c.verify().is_ok() && c.claims().unwrap().iter().all(|(_, ok)| *ok), "claims fail");
    Ok(())
}

fn criterion_8() -> Outcome {
    let g = dlo();
    let f = oracle("pham");
    let f_alpha = oracle("compose(pham, alpha(-1,0))");
    let out = tower_witness(&[(f.clone(), f_alpha.clone())], &g, &g, 8).map_err(|e| e.to_string())?;
    let TowerOutcome::Witness(w) = out else {
        return Err(format!("no witness: {out:?}"));
    };
    ensure!(w.levels.len() == 8 && w.is_coherent(&g), "witness incoherent");
    let domain = g.domain_prefix(8).map_err(|e| e.to_string())?;
    for size in 1..=8 {
        let fx: Vec<Rat> = domain[..size].iter().map(|p| value(&f.eval(p).unwrap())).collect();
        let gx: Vec<Rat> = domain[..size].iter().map(|p| value(&f_alpha.eval(p).unwrap())).collect();
        ensure!(pattern(&fx) == pattern(&gx), "level {size}: images differ in order type");
        ensure!(w.levels[size - 1].size == size, "level {size} has size {}", w.levels[size - 1].size);
        let joint = g.format_label(&w.levels[size - 1].joint);
        let block = g.format_label(&w.levels[size - 1].blocks[0]);
        ensure!(joint == block, "level {size}: joint {joint} vs block {block}");
    }
    let out = tower_witness(&[(oracle("id"), oracle("neg"))], &g, &g, 2).map_err(|e| e.to_string())?;
    match out {
        TowerOutcome::LocalFailure { pair: 0, set } if set.len() == 2 => {
            let xs: Vec<Rat> = set.iter().map(value).collect();
            let ys: Vec<Rat> = xs.iter().map(|x| -x.clone()).collect();
            ensure!(pattern(&xs) != pattern(&ys), "id and neg agree on {xs:?}");
        }
        other => return Err(format!("id/neg: {other:?}")),
    }
    Ok(())
}

fn same_structure(a: &FiniteStructure, b: &FiniteStructure, map: &[usize]) -> bool {
    let n = a.size();
    let injective = map.iter().collect::<BTreeSet<_>>().len() == n && map.iter().all(|&v| v < b.size());
    injective
        && a.signature().symbols().iter().enumerate().all(|(s, sym)| {
            assert_eq!(sym.arity, 2);
            (0..n).all(|i| (0..n).all(|j| a.holds(s, &[i, j]) == b.holds(s, &[map[i], map[j]])))
        })
}

fn criterion_9() -> Outcome {
    let generic = build_limit(AgeOracle::linear_orders(), 16).map_err(|e| e.to_string())?;
    let a = generic.fragment(16).map_err(|e| e.to_string())?;
    let b = LimitStructure::dlo().fragment(16).map_err(|e| e.to_string())?;
    let map = find_isomorphism(&a, &b).ok_or("no isomorphism found")?;
    ensure!(same_structure(&a, &b, &map), "isomorphism does not preserve <");

    let age = AgeOracle::graphs();
    let graphs = build_limit(age.clone(), 12).map_err(|e| e.to_string())?;
    let frag = graphs.fragment(12).map_err(|e| e.to_string())?;
    let log = graphs.demand_log();
    ensure!(!log.is_empty(), "empty demand log");
    let mut seen = BTreeSet::new();
    for r in &log {
        ensure!(r.element < frag.size() && r.fragment_size <= r.element, "record {r:?} out of range");
        ensure!(seen.insert((r.fragment_size, r.extension)), "demand {r:?} scheduled twice");
        let prefix: Vec<usize> = (0..r.fragment_size).collect();
        let ext = nth_extension(&age, &frag.induced(&prefix), r.extension).ok_or(format!("{r:?}: no such extension"))?;
        let mut points = prefix.clone();
        points.push(r.element);
        ensure!(frag.induced(&points) == ext, "{r:?}: element does not realise its extension");
        let edges_ok = (0..r.fragment_size).all(|i| frag.holds(0, &[i, r.element]) == ext.holds(0, &[i, r.fragment_size]));
        ensure!(edges_ok, "{r:?}: edge pattern differs");
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let g = dlo();
    let (mut agreeing, mut canonical, mut refuted) = (0, 0, 0);
    for name in SUITE {
        let f = oracle(name);
        for horizon in [6, 8] {
            let r = proposition_harness(&f, &g, &g, horizon, 2).map_err(|e| e.to_string())?;
            let domain = g.domain_prefix(horizon).map_err(|e| e.to_string())?;
            let brute = brute_canonical(&f, &domain, 2);
            ensure!(r.canonical.is_canonical() == brute, "{name} @ {horizon}: verdict disagrees with brute force");
            ensure!(r.local.seeds > 0, "{name} @ {horizon}: no seeds");
            if r.agree() && r.witnesses_match() {
                agreeing += 1;
            }
            if brute {
                canonical += 1;
            } else {
                refuted += 1;
            }
        }
    }
    ensure!(agreeing == 20, "{agreeing}/20 configurations agree");
    ensure!(canonical > 0 && refuted > 0, "{canonical} canonical, {refuted} refuted");
    Ok(())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; 10] = [
        ("orbit counts", criterion_1, 5),
        ("behavior taxonomy", criterion_2, 10),
        ("canonicity checker soundness", criterion_3, 10),
        ("canonisation suite", criterion_4, 60),
        ("canonisation with constants", criterion_5, 60),
        ("Ramsey engine", criterion_6, 30),
        ("back-and-forth isomorphism onto Q minus 0", criterion_7, 30),
        ("lifted towers", criterion_8, 10),
        ("Fraisse engine cross-check", criterion_9, 10),
        ("three-proxy harness", criterion_10, 30),
    ];
    let mut failed = 0;
    for (n, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            if elapsed < Duration::from_secs(*limit) {
                Ok(())
            } else {
                Err(format!("over the {limit} s limit"))
            }
        });
        match result {
            Ok(()) => println!("criterion {}: PASS ({:.2?}, limit {limit} s) {name}", n + 1, elapsed),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL ({:.2?}, limit {limit} s) {name}: {why}", n + 1, elapsed);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
