mod common;

use std::collections::HashMap;

use common::{
    all_words, dense_eval, el, from_dense, is_left_inverse, memory, pattern_of, random_nuca, random_rule, reader, rng,
    subset, to_dense, window_eval, xor_at_origin, xor_rule, Shape,
};
use nuca::engine::{brute_force_identity, step_automaton};
use nuca::{
    async_run, compose, identity_check, induced_local_map, Budget, Configuration, FiniteSubset, GroupUniverse,
    IdentityVerdict, Letter, LocalRule, Memory, Nuca, Pattern, RuleConfiguration, RuleLayout,
};
use proptest::prelude::*;
use rand::Rng;

fn z() -> GroupUniverse {
    GroupUniverse::integers()
}

fn budget() -> Budget {
    Budget::default()
}

#[test]
fn evaluate_window_examples() {
    let u = z();
    let pi = Nuca::uniform(&u, LocalRule::projection(2, memory(&u, &[&[0], &[1]]), &u).unwrap()).unwrap();
    let region: Vec<_> = (0..3).map(|i| el(&u, &[i])).collect();
    let x = Pattern::from_word(&region, &[1, 1, 0]);
    let e = subset(&u, [vec![0], vec![1]]);
    assert_eq!(pi.evaluate_window(&x, &e).unwrap(), x.restrict(&e).unwrap());

    let xor = Nuca::uniform(&u, xor_rule(&u)).unwrap();
    let out = xor.evaluate_window(&x, &e).unwrap();
    assert_eq!(out.word(&e.to_vec()).unwrap(), vec![0, 1]);

    // the window must cover EM
    let short = Pattern::from_word(&region[..2], &[1, 1]);
    assert!(xor.evaluate_window(&short, &e).is_err());
}

#[test]
fn evaluate_examples() {
    let u = z();
    let s = xor_at_origin(&u);
    let x = Configuration::new(&u, 0, [(el(&u, &[1]), 1)].into_iter().collect()).unwrap();
    let y = s.evaluate(&x).unwrap();
    assert_eq!(y.background(), 0);
    assert_eq!(y.exceptions().support(), subset(&u, [vec![0], vec![1]]));
    assert_eq!(y.get(&el(&u, &[0])), 1);

    let pi = Nuca::identity(&u, 3, &Memory::ball(&u, 1)).unwrap();
    let x = Configuration::new(&u, 2, [(el(&u, &[5]), 0), (el(&u, &[-1]), 1)].into_iter().collect()).unwrap();
    assert_eq!(pi.evaluate(&x).unwrap(), x);
}

#[test]
fn evaluation_coherence_on_z4() {
    let u = GroupUniverse::cyclic(4).unwrap();
    let shape = Shape::of(&u);
    let m = memory(&u, &[&[0], &[1]]);
    let mut r = rng(10);
    let cells = shape.all();
    let windows: Vec<FiniteSubset> = (0..16u32)
        .map(|mask| subset(&u, cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c.clone())))
        .collect();
    for _ in 0..30 {
        let n = random_nuca(&u, 2, &m, &cells, &mut r);
        for x in all_words(2, 4) {
            let full = n.evaluate(&from_dense(&u, &x)).unwrap();
            let oracle = dense_eval(&n, &x);
            assert_eq!(to_dense(&full), oracle);
            let all: Pattern = cells.iter().map(|c| (el(&u, c), x[shape.index(c)])).collect();
            for e in &windows {
                let win = n.evaluate_window(&all, e).unwrap();
                let f = induced_local_map(&u, e, &n.rules().restrict(e)).unwrap();
                let local = f.apply(&all.restrict(&f.domain().iter().cloned().collect()).unwrap()).unwrap();
                assert_eq!(win, local);
                for g in e {
                    assert_eq!(win.get(g), Some(oracle[shape.index(g.coords())]));
                }
            }
        }
    }
}

#[test]
fn evaluation_coherence_on_z2_lattice() {
    let u = GroupUniverse::lattice(2);
    let m = Memory::ball(&u, 1);
    let mut r = rng(11);
    let cells: Vec<Vec<i64>> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| vec![a, b])).collect();
    for _ in 0..200 {
        let n = random_nuca(&u, 2, &m, &cells, &mut r);
        let e = subset(&u, (0..r.gen_range(1..6)).map(|_| vec![r.gen_range(-3..=3), r.gen_range(-3..=3)]));
        let x: HashMap<Vec<i64>, Letter> =
            (-4..=4).flat_map(|a| (-4..=4).map(move |b| vec![a, b])).map(|c| (c, r.gen_range(0..2))).collect();
        let cfg = Configuration::new(&u, 0, pattern_of(&u, &x)).unwrap();
        let full = n.evaluate(&cfg).unwrap();
        let region = u.product_set(&e, &m.as_set()).unwrap();
        let win = n.evaluate_window(&cfg.restrict(&region), &e).unwrap();
        let f = induced_local_map(&u, &e, &n.rules().restrict(&e)).unwrap();
        let local = f.apply(&cfg.restrict(&region)).unwrap();
        let ecells: Vec<Vec<i64>> = e.iter().map(|g| g.coords().to_vec()).collect();
        let oracle = window_eval(&n, &x, 0, &ecells);
        for g in &e {
            let want = oracle[g.coords()];
            assert_eq!(full.get(g), want);
            assert_eq!(win.get(g), Some(want));
            assert_eq!(local.get(g), Some(want));
        }
    }
}

#[test]
fn compose_examples() {
    let u = z();
    let pi = Nuca::identity(&u, 2, &memory(&u, &[&[0], &[1]])).unwrap();
    let pp = compose(&pi, &pi, budget()).unwrap();
    assert!(matches!(pp.rules().layout(), RuleLayout::Constant(_)));
    assert_eq!(pp.memory().as_set(), subset(&u, [vec![0], vec![1], vec![2]]));
    assert!(pp.rule_at(&u.identity()).is_projection(&u));

    let z5 = GroupUniverse::cyclic(5).unwrap();
    let shift = Nuca::uniform(&z5, reader(&z5, 1)).unwrap();
    let twice = compose(&shift, &shift, budget()).unwrap();
    for x in all_words(2, 5) {
        let expected: Vec<Letter> = (0..5).map(|g| x[(g + 2) % 5]).collect();
        assert_eq!(dense_eval(&twice, &x), expected);
    }
}

#[test]
fn compose_rejects_mismatched_inputs() {
    let u = z();
    let a = Nuca::uniform(&u, xor_rule(&u)).unwrap();
    let three = Nuca::identity(&u, 3, &memory(&u, &[&[0]])).unwrap();
    assert!(compose(&a, &three, budget()).is_err());
    let z4 = GroupUniverse::cyclic(4).unwrap();
    assert!(compose(&a, &Nuca::uniform(&z4, xor_rule(&z4)).unwrap(), budget()).is_err());
}

#[test]
fn composition_is_sound_on_z6() {
    let u = GroupUniverse::cyclic(6).unwrap();
    let m = memory(&u, &[&[0], &[1]]);
    let cells = Shape::of(&u).all();
    let mut r = rng(12);
    for _ in 0..30 {
        let s = random_nuca(&u, 2, &m, &cells, &mut r);
        let d = random_nuca(&u, 2, &m, &cells, &mut r);
        let q = compose(&s, &d, budget()).unwrap();
        for x in all_words(2, 6) {
            assert_eq!(dense_eval(&q, &x), dense_eval(&s, &dense_eval(&d, &x)));
        }
    }
}

#[test]
fn composition_is_associative_on_z4() {
    let u = GroupUniverse::cyclic(4).unwrap();
    let m = memory(&u, &[&[0], &[1]]);
    let cells = Shape::of(&u).all();
    let mut r = rng(13);
    for _ in 0..10 {
        let a = random_nuca(&u, 2, &m, &cells, &mut r);
        let b = random_nuca(&u, 2, &m, &cells, &mut r);
        let c = random_nuca(&u, 2, &m, &cells, &mut r);
        let left = compose(&compose(&a, &b, budget()).unwrap(), &c, budget()).unwrap();
        let right = compose(&a, &compose(&b, &c, budget()).unwrap(), budget()).unwrap();
        for x in all_words(2, 4) {
            assert_eq!(dense_eval(&left, &x), dense_eval(&right, &x));
        }
    }
}

#[test]
fn identity_check_examples() {
    let u = z();
    let pi = Nuca::identity(&u, 2, &memory(&u, &[&[0]])).unwrap();
    assert!(identity_check(&pi, &pi, budget()).unwrap().holds());

    let xor = Nuca::uniform(&u, xor_rule(&u)).unwrap();
    match identity_check(&pi, &xor, budget()).unwrap() {
        IdentityVerdict::Counterexample { background_class, witness, .. } => {
            assert!(background_class);
            assert_eq!(witness.get(&el(&u, &[0])), Some(0));
            assert_eq!(witness.get(&el(&u, &[1])), Some(1));
            // the composite reads u(0) xor u(1), which is not u(0) here
            assert_ne!(witness.get(&el(&u, &[0])).unwrap() ^ witness.get(&el(&u, &[1])).unwrap(), 0);
        }
        IdentityVerdict::Holds => panic!("xor is not inverted by the identity"),
    }

    let s = xor_at_origin(&u);
    assert!(identity_check(&s, &s, budget()).unwrap().holds());
}

/// Universes of order at most 8 with a shift along the first coordinate.
fn small_universes() -> Vec<GroupUniverse> {
    let mut out: Vec<GroupUniverse> = (2..=8).map(|n| GroupUniverse::cyclic(n).unwrap()).collect();
    out.push(GroupUniverse::new(0, vec![2, 2]).unwrap());
    out.push(GroupUniverse::new(0, vec![2, 4]).unwrap());
    out.push(GroupUniverse::new(0, vec![2, 2, 2]).unwrap());
    out
}

fn axis(u: &GroupUniverse, c: i64) -> Vec<i64> {
    let mut v = vec![0; u.dim()];
    v[0] = c;
    v
}

/// A known inverse pair `(t, s)` or a random pair.
fn pair<R: Rng>(u: &GroupUniverse, r: &mut R) -> (Nuca, Nuca) {
    let m = Memory::new(u, vec![u.identity(), el(u, &axis(u, 1)), el(u, &axis(u, -1))]);
    let m = m.unwrap_or_else(|_| Memory::new(u, vec![u.identity(), el(u, &axis(u, 1))]).unwrap());
    let cells = Shape::of(u).all();
    match r.gen_range(0..4) {
        0 => {
            let fwd = LocalRule::reader(2, m.clone(), &el(u, &axis(u, 1))).unwrap();
            let back = LocalRule::reader(2, m.clone(), &el(u, &axis(u, -1))).unwrap();
            (Nuca::uniform(u, back).unwrap(), Nuca::uniform(u, fwd).unwrap())
        }
        1 => {
            // π with xor of the right neighbour at one cell is an involution
            let pi = LocalRule::projection(2, m.clone(), u).unwrap();
            let at = m.position(&el(u, &axis(u, 1))).unwrap();
            let id = m.position(&u.identity()).unwrap();
            let xor = LocalRule::from_fn(2, m.clone(), |v| v[id] ^ v[at]).unwrap();
            let g = el(u, &cells[r.gen_range(0..cells.len())]);
            let s = Nuca::new(RuleConfiguration::asymptotically_constant(u, pi, [(g, xor)].into_iter().collect()).unwrap())
                .unwrap();
            (s.clone(), s)
        }
        _ => (random_nuca(u, 2, &m, &cells, r), random_nuca(u, 2, &m, &cells, r)),
    }
}

#[test]
fn identity_check_matches_brute_force() {
    let mut r = rng(14);
    let mut inverse_pairs = 0;
    for u in small_universes() {
        for _ in 0..50 {
            let (t, s) = pair(&u, &mut r);
            let expected = is_left_inverse(&t, &s);
            inverse_pairs += expected as usize;
            assert_eq!(identity_check(&t, &s, budget()).unwrap().holds(), expected, "{u}");
            assert_eq!(brute_force_identity(&t, &s, budget()).unwrap().is_none(), expected);
        }
    }
    assert!(inverse_pairs > 50);
}

#[test]
fn async_examples() {
    let u = GroupUniverse::cyclic(6).unwrap();
    let xor = xor_rule(&u);
    let x0 = from_dense(&u, &[1, 0, 1, 1, 0, 0]);
    assert_eq!(async_run(&xor, &u, &[], &x0, 5).unwrap(), x0);

    let all = u.enumerate_all().unwrap();
    let once = async_run(&xor, &u, &[all], &x0, 1).unwrap();
    assert_eq!(to_dense(&once), dense_eval(&Nuca::uniform(&u, xor).unwrap(), &to_dense(&x0)));
}

#[test]
fn full_schedules_are_synchronous() {
    let u = GroupUniverse::cyclic(6).unwrap();
    let m = memory(&u, &[&[5], &[0], &[1]]);
    let all = u.enumerate_all().unwrap();
    let mut r = rng(15);
    for _ in 0..20 {
        let mu = random_rule(2, &m, &mut r);
        let ca = Nuca::uniform(&u, mu.clone()).unwrap();
        let x0: Vec<Letter> = (0..6).map(|_| r.gen_range(0..2)).collect();
        let mut x = x0.clone();
        for steps in 1..=10 {
            x = dense_eval(&ca, &x);
            let got = async_run(&mu, &u, &[all.clone()], &from_dense(&u, &x0), steps).unwrap();
            assert_eq!(to_dense(&got), x);
        }
    }
}

#[test]
fn separated_singletons_commute() {
    let u = GroupUniverse::cyclic(6).unwrap();
    let m = memory(&u, &[&[0], &[1]]);
    let mut r = rng(16);
    for _ in 0..20 {
        let mu = random_rule(2, &m, &mut r);
        let x0 = from_dense(&u, &(0..6).map(|_| r.gen_range(0..2)).collect::<Vec<_>>());
        for a in 0..6i64 {
            for b in 0..6i64 {
                let ua = subset(&u, [vec![a]]);
                let ub = subset(&u, [vec![b]]);
                // U₀M ∩ U₁ = ∅ and U₁M ∩ U₀ = ∅
                let apart = (b - a).rem_euclid(6) > 1 && (a - b).rem_euclid(6) > 1;
                if !apart {
                    continue;
                }
                let ab = async_run(&mu, &u, &[ua.clone(), ub.clone()], &x0, 2).unwrap();
                let ba = async_run(&mu, &u, &[ub, ua], &x0, 2).unwrap();
                assert_eq!(ab, ba);
            }
        }
    }
}

#[test]
fn step_automaton_uses_mu_on_cells() {
    let u = GroupUniverse::cyclic(6).unwrap();
    let xor = xor_rule(&u);
    let pi = LocalRule::projection(2, xor.memory().clone(), &u).unwrap();
    let cells = subset(&u, [vec![2]]);
    let step = step_automaton(&u, &pi, &xor, &cells).unwrap();
    let x = [0, 0, 1, 1, 0, 1];
    assert_eq!(dense_eval(&step, &x), vec![0, 0, 0, 1, 0, 1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_sound_on_z(seed in any::<u64>()) {
        let u = z();
        let mut r = rng(seed);
        let cells: Vec<Vec<i64>> = (-4..=4).map(|i| vec![i]).collect();
        let m = memory(&u, &[&[-1], &[0], &[1]]);
        let n = if r.gen_bool(0.5) { m.clone() } else { memory(&u, &[&[0], &[2]]) };
        let s = random_nuca(&u, 2, &m, &cells, &mut r);
        let d = random_nuca(&u, 2, &n, &cells, &mut r);
        let q = compose(&s, &d, budget()).unwrap();
        let x = common::random_line(6, 2, &mut r);
        // d has finite support input, so its output is known on a generous window
        let inner_cells: Vec<Vec<i64>> = (-14..=14).map(|i| vec![i]).collect();
        let y = window_eval(&d, &x, 0, &inner_cells);
        let outer_cells: Vec<Vec<i64>> = (-12..=12).map(|i| vec![i]).collect();
        let expected = window_eval(&s, &y, 0, &outer_cells);
        let cfg = Configuration::new(&u, 0, pattern_of(&u, &x)).unwrap();
        let got = q.evaluate(&cfg).unwrap();
        for c in &outer_cells {
            prop_assert_eq!(got.get(&el(&u, c)), expected[c], "cell {:?}", c);
        }
        // and far away, where only the backgrounds act
        let far = q.evaluate(&Configuration::constant(&u, 1)).unwrap();
        let bg = |n: &Nuca, v: Letter| common::rule_value(n.rules().background(), &vec![v; n.memory().len()]);
        let want = bg(&s, bg(&d, 1));
        prop_assert_eq!(far.get(&el(&u, &[1000])), want);
    }

    #[test]
    fn shift_transport_on_z6(seed in any::<u64>()) {
        let u = GroupUniverse::cyclic(6).unwrap();
        let shape = Shape::of(&u);
        let mut r = rng(seed);
        let m = memory(&u, &[&[0], &[1], &[3]]);
        let s = random_nuca(&u, 2, &m, &shape.all(), &mut r);
        let x: Vec<Letter> = (0..6).map(|_| r.gen_range(0..2)).collect();
        let g = el(&u, &[r.gen_range(0..6)]);
        let left = n_eval(&s, &x).shift(&g).unwrap();
        let gs = s.shifted(&g).unwrap();
        let right = gs.evaluate(&from_dense(&u, &x).shift(&g).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        // the shifted configuration puts s(h) at g + h
        for h in shape.all() {
            let moved = shape.add(g.coords(), &h);
            prop_assert_eq!(gs.rule_at(&el(&u, &moved)), s.rule_at(&el(&u, &h)));
        }
    }

    #[test]
    fn evaluation_is_local_on_z2(seed in any::<u64>()) {
        let u = GroupUniverse::lattice(2);
        let mut r = rng(seed);
        let m = Memory::ball(&u, 1);
        let cells: Vec<Vec<i64>> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| vec![a, b])).collect();
        let n = random_nuca(&u, 2, &m, &cells, &mut r);
        let e = subset(&u, (0..3).map(|_| vec![r.gen_range(-2..=2), r.gen_range(-2..=2)]));
        let region = u.product_set(&e, &m.as_set()).unwrap();
        let x: Pattern = region.iter().map(|g| (g.clone(), r.gen_range(0..2))).collect();
        // y agrees with x on EM and is arbitrary further out
        let mut y = x.clone();
        for a in -5..=5 {
            for b in -5..=5 {
                let g = el(&u, &[a, b]);
                if !region.contains(&g) {
                    y.insert(g, r.gen_range(0..2));
                }
            }
        }
        let cx = Configuration::new(&u, 0, x.clone()).unwrap();
        let cy = Configuration::new(&u, 1, y.clone()).unwrap();
        prop_assert_eq!(n.evaluate_window(&x, &e).unwrap(), n.evaluate_window(&y, &e).unwrap());
        prop_assert_eq!(n.evaluate(&cx).unwrap().restrict(&e), n.evaluate(&cy).unwrap().restrict(&e));
    }
}

fn n_eval(n: &Nuca, x: &[Letter]) -> Configuration {
    from_dense(n.universe(), &dense_eval(n, x))
}
