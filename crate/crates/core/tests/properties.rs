use proptest::prelude::*;
use relserre::arith::primes_up_to;
use relserre::ellq::{self, CurveModel};
use relserre::fingroup::character::ElementaryQuotient;
use relserre::fingroup::fiber::{CyclicMap, FiberProductSpec};
use relserre::fingroup::GroupSlice;
use relserre::modmat::{gl2_order, ResidueMatrix};

const MAX_SMALL_ORDER: u64 = 48;

fn invertible(n: u32) -> impl Strategy<Value = ResidueMatrix> {
    prop::array::uniform4(0..n as i64)
        .prop_map(move |e| ResidueMatrix::new(n, e))
        .prop_filter("invertible", |m| m.is_invertible())
}

/// A subgroup of order at most 48 generated by one or two random matrices.
fn small_group(n: u32) -> impl Strategy<Value = GroupSlice> {
    prop::collection::vec(invertible(n), 1..=2)
        .prop_filter_map("small order", move |g| GroupSlice::generate(n, &g).ok().filter(|s| s.order() <= MAX_SMALL_ORDER))
}

/// A surjection onto Z/p read off a nonzero functional on `G / <[G,G], G^p>`.
fn cyclic_map(g: &GroupSlice, p: u32, pick: usize) -> Option<CyclicMap> {
    let eq = ElementaryQuotient::new(g, p).ok()?;
    let fs = eq.functionals();
    let f = fs.get(pick % fs.len().max(1))?;
    let on_gens = g.gens().iter().map(|x| eq.eval(f, x).unwrap() as u32).collect();
    Some(CyclicMap { q: p, on_gens })
}

fn spec_strategy() -> impl Strategy<Value = Option<FiberProductSpec>> {
    (prop::sample::select(vec![2u32, 4]), prop::sample::select(vec![3u32, 5]), prop::sample::select(vec![2u32, 3]))
        .prop_flat_map(|(m1, m2, p)| (small_group(m1), small_group(m2), Just(p), any::<usize>(), any::<usize>()))
        .prop_map(|(left, right, p, i, j)| {
            let psi_left = cyclic_map(&left, p, i)?;
            let psi_right = cyclic_map(&right, p, j)?;
            Some(FiberProductSpec { left, right, psi_left, psi_right })
        })
}

fn commutators_split(spec: &FiberProductSpec) -> bool {
    let h = spec.materialize().unwrap();
    let ch = h.commutator_subgroup().unwrap();
    let c1 = spec.left.commutator_subgroup().unwrap();
    let c2 = spec.right.commutator_subgroup().unwrap();
    if ch.order() != c1.order() * c2.order() {
        return false;
    }
    let all = c1.elements().all(|a| c2.elements().all(|b| ch.contains(&ResidueMatrix::crt_join(&[a, b]).unwrap())));
    all
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn fiber_product_order_and_commutators(spec in spec_strategy()) {
        prop_assume!(spec.is_some());
        let spec = spec.unwrap();
        let h = spec.materialize().unwrap();
        prop_assert_eq!(h.order(), spec.order());
        prop_assert_eq!(h.reduce_mod(spec.left.modulus()).unwrap().order(), spec.left.order());
        prop_assert_eq!(h.reduce_mod(spec.right.modulus()).unwrap().order(), spec.right.order());
        prop_assert!(commutators_split(&spec));
    }

    #[test]
    fn crt_round_trip(a in invertible(8), b in invertible(9), c in invertible(5)) {
        let x = ResidueMatrix::crt_join(&[a, b, c]).unwrap();
        prop_assert_eq!(x.modulus(), 360);
        prop_assert_eq!(x.crt_split(), vec![a, b, c]);
        prop_assert_eq!(x.det() % 8, a.det());
        prop_assert_eq!(ResidueMatrix::crt_join(&x.crt_split()).unwrap(), x);
    }

    #[test]
    fn hasse_bound(coeffs in prop::array::uniform5(-20i64..=20)) {
        let curve = CurveModel::new(coeffs);
        prop_assume!(curve.is_ok());
        let curve = curve.unwrap();
        let e = curve.minimal_model().unwrap();
        for p in primes_up_to(300) {
            if !ellq::is_good_prime(&curve, p) {
                continue;
            }
            let a = ellq::ap(&curve, p).unwrap();
            prop_assert!(a * a <= 4 * p as i64, "a_{} = {}", p, a);
            prop_assert_eq!(a, p as i64 + 1 - ellq::count::count_points_naive(&e, p) as i64);
        }
    }
}

/// The strategy must actually produce enough valid specs for the commutator check to mean something.
#[test]
fn at_least_twenty_commutator_specs() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, TestRng, TestRunner};
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(Default::default()));
    let strat = spec_strategy();
    let mut checked = 0;
    for _ in 0..400 {
        if checked == 20 {
            break;
        }
        let Ok(tree) = strat.new_tree(&mut runner) else { continue };
        if let Some(spec) = tree.current() {
            assert_eq!(spec.materialize().unwrap().order(), spec.order());
            assert!(commutators_split(&spec));
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
}

#[test]
fn gl2_counts_by_enumeration() {
    for n in [2u32, 3, 4, 8, 9] {
        let mut count = 0u128;
        for i in 0..(n as u64).pow(4) {
            if ResidueMatrix::from_index(n, i).is_invertible() {
                count += 1;
            }
        }
        assert_eq!(count, gl2_order(n as u64), "N = {n}");
        assert_eq!(GroupSlice::gl2(n).unwrap().order() as u128, count, "N = {n}");
    }
    assert_eq!(gl2_order(8), 1536);
    assert_eq!(gl2_order(9), 3888);
}
