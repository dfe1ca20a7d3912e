//! One line per acceptance criterion. Runs without the libtest harness so the
//! PASS/FAIL lines always reach the output.

mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use common::{
    all_words, dense_eval, el, from_dense, injective, is_left_inverse, memory, random_nuca, random_rule, rng, subset,
    to_dense, window_eval, Shape,
};
use nuca::decide::{
    check_inverse_on_window, perturbation_invert, post_surjectivity_check, pre_injectivity_check,
    reversibility_search, stable_sweep, surjectivity_window, ubs_localize, PerturbationOutcome, Property,
    Reversibility, Verdict,
};
use nuca::linear::{double_dual_check, dual, random_configuration, vectorize, FpMatrix, LinearAlphabet, LinearLocalRule};
use nuca::linear::LinearRuleConfiguration;
use nuca::{
    async_run, compose, identity_check, induced_local_map, Budget, Configuration, FiniteSubset, GroupUniverse,
    Letter, LocalRule, Memory, Nuca, Pattern, RuleConfiguration,
};
use rand::Rng;

type Outcome = Result<usize, String>;

fn budget() -> Budget {
    Budget::default()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 engine coherence", engine_coherence),
        ("2 composition soundness", composition_soundness),
        ("3 identity check equivalence", identity_equivalence),
        ("4 perturbation inversion", perturbation_inversion),
        ("5 window surjectivity of reversible cases", window_surjectivity),
        ("6 localization contract", localization_contract),
        ("7 pre-injective post-surjective implies stably invertible", stable_invertibility),
        ("8 duality", duality),
        ("9 async reduction", async_reduction),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(cases) => println!("PASS criterion {name}: {cases} cases in {secs:.2}s"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} ({secs:.2}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn engine_coherence() -> Outcome {
    let mut cases = 0;
    let u = GroupUniverse::cyclic(4).unwrap();
    let shape = Shape::of(&u);
    let cells = shape.all();
    let m = memory(&u, &[&[0], &[1]]);
    let windows: Vec<FiniteSubset> = (0..16u32)
        .map(|mask| subset(&u, cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c.clone())))
        .collect();
    let mut r = rng(101);
    for k in 0..30 {
        let n = random_nuca(&u, 2, &m, &cells, &mut r);
        for x in all_words(2, 4) {
            let oracle = dense_eval(&n, &x);
            let full = to_dense(&n.evaluate(&from_dense(&u, &x)).map_err(|e| e.to_string())?);
            ensure(full == oracle, || format!("evaluate differs on Z/4, rule set {k}, x={x:?}"))?;
            let all: Pattern = cells.iter().map(|c| (el(&u, c), x[shape.index(c)])).collect();
            for e in &windows {
                let win = n.evaluate_window(&all, e).map_err(|e| e.to_string())?;
                let f = induced_local_map(&u, e, &n.rules().restrict(e)).map_err(|e| e.to_string())?;
                let local = f.apply(&all.restrict(&f.domain().iter().cloned().collect()).unwrap()).unwrap();
                let want: Pattern = e.iter().map(|g| (g.clone(), oracle[shape.index(g.coords())])).collect();
                ensure(win == want && local == want, || format!("window {e} differs on Z/4, x={x:?}"))?;
                cases += 1;
            }
        }
    }
    let u = GroupUniverse::lattice(2);
    let m = Memory::ball(&u, 1);
    let cells: Vec<Vec<i64>> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| vec![a, b])).collect();
    for _ in 0..200 {
        let n = random_nuca(&u, 2, &m, &cells, &mut r);
        let e = subset(&u, (0..r.gen_range(1..6)).map(|_| vec![r.gen_range(-3..=3), r.gen_range(-3..=3)]));
        let x: HashMap<Vec<i64>, Letter> =
            (-4..=4).flat_map(|a| (-4..=4).map(move |b| vec![a, b])).map(|c| (c, r.gen_range(0..2))).collect();
        let cfg = Configuration::new(&u, 0, common::pattern_of(&u, &x)).unwrap();
        let region = u.product_set(&e, &m.as_set()).unwrap();
        let full = n.evaluate(&cfg).unwrap();
        let win = n.evaluate_window(&cfg.restrict(&region), &e).unwrap();
        let local = induced_local_map(&u, &e, &n.rules().restrict(&e)).unwrap().apply(&cfg.restrict(&region)).unwrap();
        let ecells: Vec<Vec<i64>> = e.iter().map(|g| g.coords().to_vec()).collect();
        let oracle = window_eval(&n, &x, 0, &ecells);
        for g in &e {
            let want = oracle[g.coords()];
            ensure(full.get(g) == want && win.get(g) == Some(want) && local.get(g) == Some(want), || {
                format!("Z^2 mismatch at {g}")
            })?;
        }
        cases += 1;
    }
    Ok(cases)
}

fn composition_soundness() -> Outcome {
    let u = GroupUniverse::cyclic(6).unwrap();
    let cells = Shape::of(&u).all();
    let m = memory(&u, &[&[0], &[1]]);
    let mut r = rng(102);
    let mut perturbed = 0;
    for k in 0..30 {
        let s = random_nuca(&u, 2, &m, &cells, &mut r);
        let d = random_nuca(&u, 2, &m, &cells, &mut r);
        perturbed += (!s.exception_support().unwrap().is_empty() || !d.exception_support().unwrap().is_empty()) as usize;
        let q = compose(&s, &d, budget()).map_err(|e| e.to_string())?;
        for x in all_words(2, 6) {
            ensure(dense_eval(&q, &x) == dense_eval(&s, &dense_eval(&d, &x)), || format!("pair {k}, x={x:?}"))?;
        }
    }
    ensure(perturbed > 0, || "no perturbed pair was sampled".into())?;
    Ok(30)
}

fn axis(u: &GroupUniverse, c: i64) -> Vec<i64> {
    let mut v = vec![0; u.dim()];
    v[0] = c;
    v
}

fn identity_equivalence() -> Outcome {
    let mut universes: Vec<GroupUniverse> = (1..=8).map(|n| GroupUniverse::new(0, vec![n.max(2)]).unwrap()).collect();
    universes.dedup();
    universes.push(GroupUniverse::new(0, vec![2, 2]).unwrap());
    universes.push(GroupUniverse::new(0, vec![2, 4]).unwrap());
    universes.push(GroupUniverse::new(0, vec![2, 2, 2]).unwrap());
    let mut r = rng(103);
    let mut cases = 0;
    let mut inverse_pairs = 0;
    for u in &universes {
        let m = Memory::new(u, vec![u.identity(), el(u, &axis(u, 1)), el(u, &axis(u, -1))])
            .unwrap_or_else(|_| Memory::new(u, vec![u.identity(), el(u, &axis(u, 1))]).unwrap());
        let cells = Shape::of(u).all();
        for k in 0..50 {
            let (t, s) = match k % 4 {
                0 => {
                    let fwd = LocalRule::reader(2, m.clone(), &el(u, &axis(u, 1))).unwrap();
                    let back = LocalRule::reader(2, m.clone(), &el(u, &axis(u, -1))).unwrap();
                    (Nuca::uniform(u, back).unwrap(), Nuca::uniform(u, fwd).unwrap())
                }
                1 => {
                    let at = m.position(&el(u, &axis(u, 1))).unwrap();
                    let id = m.position(&u.identity()).unwrap();
                    let xor = LocalRule::from_fn(2, m.clone(), |v| v[id] ^ v[at]).unwrap();
                    let pi = LocalRule::projection(2, m.clone(), u).unwrap();
                    let g = el(u, &cells[r.gen_range(0..cells.len())]);
                    let s = Nuca::new(RuleConfiguration::asymptotically_constant(u, pi, [(g, xor)].into()).unwrap())
                        .unwrap();
                    (s.clone(), s)
                }
                _ => (random_nuca(u, 2, &m, &cells, &mut r), random_nuca(u, 2, &m, &cells, &mut r)),
            };
            let expected = is_left_inverse(&t, &s);
            inverse_pairs += expected as usize;
            let got = identity_check(&t, &s, budget()).map_err(|e| e.to_string())?.holds();
            ensure(got == expected, || format!("{u}, pair {k}: identity_check={got}, brute force={expected}"))?;
            cases += 1;
        }
    }
    ensure(inverse_pairs > 0, || "no inverse pair sampled".into())?;
    Ok(cases)
}

/// Backgrounds `v(0)`, `v(1)`, `v(-1)` on `{-1,0,1}`, each with every rule on
/// `{0,1}` at the origin.
fn catalog() -> Vec<Nuca> {
    let u = GroupUniverse::integers();
    let big = memory(&u, &[&[-1], &[0], &[1]]);
    let small = memory(&u, &[&[0], &[1]]);
    let mut out = Vec::new();
    for c in [0, 1, -1] {
        let bg = LocalRule::from_fn(2, big.clone(), |v| v[(c + 1) as usize]).unwrap();
        for code in 0..16u8 {
            let table = (0..4).map(|i| (code >> (3 - i)) & 1).collect();
            let ex = LocalRule::new(2, small.clone(), table).unwrap().enlarge(&big).unwrap();
            let rules = RuleConfiguration::asymptotically_constant(&u, bg.clone(), [(u.identity(), ex)].into());
            out.push(Nuca::new(rules.unwrap()).unwrap());
        }
    }
    out
}

/// `a(b(x)) = x` on `[-3, 3]` for random finitely supported `x`.
fn undoes(a: &Nuca, b: &Nuca, r: &mut impl Rng) -> bool {
    let inner: Vec<Vec<i64>> = (-16..=16).map(|i| vec![i]).collect();
    let outer: Vec<Vec<i64>> = (-3..=3).map(|i| vec![i]).collect();
    (0..100).all(|_| {
        let bg = r.gen_range(0..2);
        let x: HashMap<Vec<i64>, Letter> = (-6..=6).map(|i| (vec![i], r.gen_range(0..2))).collect();
        let y = window_eval(b, &x, bg, &inner);
        let back = window_eval(a, &y, 0, &outer);
        outer.iter().all(|c| back[c] == *x.get(c).unwrap_or(&bg))
    })
}

fn perturbation_inversion() -> Outcome {
    let mut r = rng(104);
    let mut found = 0;
    for (i, s) in catalog().iter().enumerate() {
        let reversible = matches!(reversibility_search(s, 2, budget()).unwrap(), Reversibility::Found { .. });
        match perturbation_invert(s, 2, budget()).map_err(|e| e.to_string())? {
            PerturbationOutcome::Inverted(inv) => {
                let window = check_inverse_on_window(s, &inv, 3, budget()).map_err(|e| e.to_string())?;
                ensure(window.is_none(), || format!("case {i}: windowed check fails"))?;
                let flat = inv.flattened.clone().ok_or(format!("case {i}: no flattened inverse"))?;
                ensure(undoes(&flat, s, &mut r) && undoes(s, &flat, &mut r), || format!("case {i}: oracle check"))?;
                found += 1;
            }
            other => ensure(!reversible, || format!("case {i}: reversible but {:?}", other.report().verdict))?,
        }
    }
    ensure(found > 0, || "no invertible case".into())?;
    Ok(48)
}

fn window_surjectivity() -> Outcome {
    let u = GroupUniverse::integers();
    let mut checked = 0;
    for (i, s) in catalog().iter().enumerate() {
        if !matches!(reversibility_search(s, 2, budget()).unwrap(), Reversibility::Found { .. }) {
            continue;
        }
        for k in 0..=4 {
            let e = u.ball(k);
            let rep = surjectivity_window(s, &e, budget()).map_err(|e| e.to_string())?;
            ensure(rep.witness.is_none() && rep.verdict != Verdict::Refuted, || format!("case {i}, k={k}"))?;
            // every window pattern has a preimage, by enumeration of E M
            let region: Vec<Vec<i64>> = (-(k as i64) - 1..=k as i64 + 1).map(|c| vec![c]).collect();
            let ecells: Vec<Vec<i64>> = e.iter().map(|g| g.coords().to_vec()).collect();
            let reached: HashSet<Vec<Letter>> = all_words(2, region.len())
                .iter()
                .map(|w| {
                    let x: HashMap<Vec<i64>, Letter> = region.iter().cloned().zip(w.iter().copied()).collect();
                    let y = window_eval(s, &x, 0, &ecells);
                    ecells.iter().map(|c| y[c]).collect()
                })
                .collect();
            ensure(reached.len() == 1 << ecells.len(), || format!("case {i}, k={k}: oracle image is not full"))?;
            checked += 1;
        }
    }
    ensure(checked > 0, || "no reversible case".into())?;
    Ok(checked)
}

fn localization_contract() -> Outcome {
    let u = GroupUniverse::integers();
    let m = Memory::ball(&u, 1);
    let xor = LocalRule::from_fn(2, m.clone(), |v| v[1] ^ v[2]).unwrap();
    let pi = LocalRule::projection(2, m, &u).unwrap();
    let s = Nuca::new(RuleConfiguration::sparse_singular(&u, pi, 4, xor, BTreeMap::new()).unwrap()).unwrap();
    let mut r = rng(105);
    for k in 1..=3 {
        let e = u.ball(k);
        let out = ubs_localize(&s, &s, &e, 200, budget()).map_err(|e| e.to_string())?;
        for g in &e {
            ensure(out.p.rule_at(g).same_function(s.rule_at(g)), || format!("p differs from s at {g}"))?;
            ensure(out.q.rule_at(g).same_function(s.rule_at(g)), || format!("q differs from t at {g}"))?;
        }
        ensure(identity_check(&out.q, &out.p, budget()).unwrap().holds(), || format!("k={k}: identity check"))?;
        ensure(undoes(&out.q, &out.p, &mut r), || format!("k={k}: oracle check"))?;
    }
    Ok(3)
}

fn stable_invertibility() -> Outcome {
    let mut r = rng(106);
    let mut premise = 0;
    for i in 0..500 {
        let n = 2 + i % 3;
        let u = GroupUniverse::cyclic(n as i64).unwrap();
        let m = memory(&u, &[&[0], &[1]]);
        let cells = Shape::of(&u).all();
        let s = if r.gen_bool(0.5) {
            // permutation-heavy samples so the premise is met often
            let pick = |r: &mut _| -> LocalRule {
                let tables: [&[Letter]; 4] = [&[0, 0, 1, 1], &[0, 1, 0, 1], &[0, 1, 1, 0], &[1, 1, 0, 0]];
                LocalRule::new(2, m.clone(), tables[rand::Rng::gen_range(r, 0..4)].to_vec()).unwrap()
            };
            let bg = pick(&mut r);
            let ex = (0..r.gen_range(0..3)).map(|_| (el(&u, &cells[r.gen_range(0..n)]), pick(&mut r))).collect();
            Nuca::new(RuleConfiguration::asymptotically_constant(&u, bg, ex).unwrap()).unwrap()
        } else {
            random_nuca(&u, 2, &m, &cells, &mut r)
        };
        let post = post_surjectivity_check(&s, 1, 2, budget()).unwrap().holds();
        let pre = pre_injectivity_check(&s, 1, budget()).unwrap().holds();
        let stable = stable_sweep(&s, Property::Invertible, budget()).unwrap().holds();
        let oracle = (0..n as i64).all(|g| injective(&s.shifted(&el(&u, &[g])).unwrap()));
        ensure(stable == oracle, || format!("sample {i}: sweep={stable}, enumeration={oracle}"))?;
        if post && pre {
            premise += 1;
            ensure(stable, || format!("sample {i} on {u}: premise holds but not stably invertible"))?;
        }
    }
    ensure(premise > 0, || "premise never met".into())?;
    Ok(500)
}

/// Columns are the images of basis configurations, through the dense oracle.
fn oracle_matrix(s: &LinearRuleConfiguration) -> Vec<Vec<u32>> {
    let n = s.to_nuca(budget()).unwrap();
    let a = s.alphabet();
    let size = Shape::of(s.universe()).all().len() * a.dim();
    let cols: Vec<Vec<u32>> = (0..size)
        .map(|j| {
            let v: Vec<u32> = (0..size).map(|i| (i == j) as u32).collect();
            let x: Vec<Letter> = v.chunks(a.dim()).map(|c| a.letter(c)).collect();
            vectorize(a, &dense_eval(&n, &x))
        })
        .collect();
    (0..size).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn duality() -> Outcome {
    let mut r = rng(107);
    let mut cases = 0;
    // double dual
    for i in 0..200 {
        let p = [2, 3][i % 2];
        let dim = 1 + (i / 2) % 2;
        let a = LinearAlphabet::new(p, dim).unwrap();
        let u = [GroupUniverse::integers(), GroupUniverse::lattice(2), GroupUniverse::cyclic(3).unwrap()][i % 3].clone();
        let s = random_configuration(&u, a, &Memory::ball(&u, 1), &u.ball(2), 3, &mut r).unwrap();
        ensure(double_dual_check(&s).unwrap().is_none(), || format!("double dual fails on sample {i}"))?;
        cases += 1;
    }
    // transpose, over every p=2, n=1 assignment on ball(1)
    let a = LinearAlphabet::new(2, 1).unwrap();
    for u in [
        GroupUniverse::cyclic(3).unwrap(),
        GroupUniverse::cyclic(4).unwrap(),
        GroupUniverse::new(0, vec![2, 2]).unwrap(),
    ] {
        let m = Memory::ball(&u, 1);
        let cells = u.enumerate_all().unwrap().to_vec();
        let per_cell = 1usize << m.len();
        let rule = |code: usize| {
            let matrices = m
                .cells()
                .iter()
                .enumerate()
                .map(|(i, c)| (c.clone(), FpMatrix::from_rows(2, &[vec![((code >> i) & 1) as i64]]).unwrap()))
                .collect();
            LinearLocalRule::new(a, m.clone(), matrices).unwrap()
        };
        for code in 0..per_cell.pow(cells.len() as u32) {
            let mut c = code;
            let mut ex = BTreeMap::new();
            for g in &cells {
                ex.insert(g.clone(), rule(c % per_cell));
                c /= per_cell;
            }
            let s = LinearRuleConfiguration::asymptotically_constant(&u, rule(0), ex).unwrap();
            let ms = oracle_matrix(&s);
            let md = oracle_matrix(&dual(&s).unwrap());
            let t: Vec<Vec<u32>> = (0..ms.len()).map(|j| ms.iter().map(|row| row[j]).collect()).collect();
            ensure(md == t, || format!("transpose fails on {u}, assignment {code}"))?;
            cases += 1;
        }
    }
    // invertibility is preserved
    for i in 0..200 {
        let u = [GroupUniverse::cyclic(3).unwrap(), GroupUniverse::cyclic(4).unwrap()][i % 2].clone();
        let a = [LinearAlphabet::new(2, 1).unwrap(), LinearAlphabet::new(3, 1).unwrap()][(i / 2) % 2];
        let cells = u.enumerate_all().unwrap();
        let s = random_configuration(&u, a, &Memory::ball(&u, 1), &cells, 2, &mut r).unwrap();
        let left = injective(&s.to_nuca(budget()).unwrap());
        let right = injective(&dual(&s).unwrap().to_nuca(budget()).unwrap());
        ensure(left == right, || format!("invertibility differs on sample {i}"))?;
        cases += 1;
    }
    Ok(cases)
}

fn async_reduction() -> Outcome {
    let u = GroupUniverse::cyclic(6).unwrap();
    let all = u.enumerate_all().unwrap();
    let m = memory(&u, &[&[5], &[0], &[1]]);
    let mut r = rng(108);
    let mut cases = 0;
    for k in 0..20 {
        let mu = random_rule(2, &m, &mut r);
        let ca = Nuca::uniform(&u, mu.clone()).unwrap();
        let x0: Vec<Letter> = (0..6).map(|_| r.gen_range(0..2)).collect();
        let got = async_run(&mu, &u, &[all.clone()], &from_dense(&u, &x0), 10).unwrap();
        let mut x = x0.clone();
        for _ in 0..10 {
            x = dense_eval(&ca, &x);
        }
        ensure(to_dense(&got) == x, || format!("rule {k}: async differs from synchronous"))?;
        cases += 1;
        // singletons whose neighbourhoods miss each other
        for a in 0..6i64 {
            for b in 0..6i64 {
                let d = (b - a).rem_euclid(6);
                if !(2..=4).contains(&d) {
                    continue;
                }
                let (ua, ub) = (subset(&u, [vec![a]]), subset(&u, [vec![b]]));
                let ab = async_run(&mu, &u, &[ua.clone(), ub.clone()], &from_dense(&u, &x0), 2).unwrap();
                let ba = async_run(&mu, &u, &[ub, ua], &from_dense(&u, &x0), 2).unwrap();
                ensure(ab == ba, || format!("rule {k}: cells {a} and {b} do not commute"))?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}
