//! Desk-scale verification suites run by `nuca verify`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::configuration::{Configuration, Letter};
use crate::decide::{
    check_inverse_on_window, finite_check, perturbation_invert, post_surjectivity_check, pre_injectivity_check,
    product_split, reversibility_search, stable_sweep, surjectivity_window, ubs_localize, PerturbationOutcome,
    Property, Reversibility, Verdict,
};
use crate::engine::{async_run, brute_force_identity, compose, identity_check, Nuca};
use crate::error::{NucaError, Result};
use crate::linear::{self, FpMatrix, LinearAlphabet, LinearLocalRule, LinearRuleConfiguration};
use crate::rules::{LocalRule, Memory, RuleConfiguration};
use crate::spec::{parse_schedule, ExperimentSpec, PatternFile};
use crate::universe::{FiniteSubset, GroupUniverse};
use crate::words::{for_each_word, Budget};

pub const SUITES: [&str; 9] =
    ["engine", "theorem-a", "theorem-b", "theorem-c", "theorem-d", "duality", "lemma-6.1", "corollaries", "all"];

const Z3_XOR: &str = include_str!("../../fixtures/z3_xor.nuca");
const Z_SHIFT: &str = include_str!("../../fixtures/z_shift.nuca");
const Z_XOR: &str = include_str!("../../fixtures/z_xor.nuca");
const Z_XOR_PERTURBATION: &str = include_str!("../../fixtures/z_xor_perturbation.nuca");
const Z_SPARSE4: &str = include_str!("../../fixtures/z_sparse4.nuca");
const Z3_LINEAR: &str = include_str!("../../fixtures/z3_linear.nuca");
const Z6_MAJORITY: &str = include_str!("../../fixtures/z6_majority.nuca");
const Z6_SCHEDULE: &str = include_str!("../../fixtures/z6_alternating.sched");
const Z6_START: &str = include_str!("../../fixtures/z6_start.pat");
const Z_ONE: &str = include_str!("../../fixtures/z_one.pat");

/// Every bundled fixture, by file name.
pub const FIXTURES: [(&str, &str); 7] = [
    ("z3_xor.nuca", Z3_XOR),
    ("z_shift.nuca", Z_SHIFT),
    ("z_xor.nuca", Z_XOR),
    ("z_xor_perturbation.nuca", Z_XOR_PERTURBATION),
    ("z_sparse4.nuca", Z_SPARSE4),
    ("z3_linear.nuca", Z3_LINEAR),
    ("z6_majority.nuca", Z6_MAJORITY),
];

/// One component check of a suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

struct Ctx {
    seed: u64,
    budget: Budget,
}

impl Ctx {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

type Check = fn(&Ctx) -> Result<(usize, Option<String>)>;

fn checks(suite: &str) -> Vec<(&'static str, &'static str, Check)> {
    let table: Vec<(&'static str, &'static str, Check)> = vec![
        ("engine", "window-coherence", engine_coherence),
        ("engine", "composition", composition_soundness),
        ("engine", "identity-check", identity_equivalence),
        ("engine", "async-reduction", async_reduction),
        ("theorem-a", "perturbation-inverse", theorem_a),
        ("theorem-a", "fixture-inverse", theorem_a_fixtures),
        ("theorem-b", "surjectivity-window", theorem_b),
        ("theorem-c", "post-surjective-pre-injective", theorem_c_finite),
        ("theorem-c", "invertible-not-refuted", theorem_c_infinite),
        ("theorem-d", "ball-exhaustion", ball_exhaustion),
        ("theorem-d", "block-decomposition", block_decomposition),
        ("duality", "double-dual", double_dual),
        ("duality", "transpose-oracle", transpose_oracle),
        ("duality", "invertibility", dual_invertibility),
        ("lemma-6.1", "sparse-localization", lemma_6_1),
        ("corollaries", "reversible-iff-stably-injective", corollary_2_2),
        ("corollaries", "invertible-is-stably-invertible", lemma_2_1),
        ("corollaries", "fixtures-parse", fixtures_parse),
    ];
    table.into_iter().filter(|(s, _, _)| suite == "all" || *s == suite).collect()
}

/// Runs a suite. Checks run concurrently; results keep declaration order.
pub fn run_suite(suite: &str, seed: u64, budget: Budget) -> Result<Vec<CheckOutcome>> {
    if !SUITES.contains(&suite) {
        return Err(NucaError::Unsupported(format!("unknown suite `{suite}` (expected one of {})", SUITES.join(", "))));
    }
    let ctx = Ctx { seed, budget };
    let list = checks(suite);
    Ok(list
        .par_iter()
        .map(|(s, name, f)| {
            let (passed, cases, detail) = match f(&ctx) {
                Ok((cases, None)) => (true, cases, String::new()),
                Ok((cases, Some(d))) => (false, cases, d),
                Err(e) => (false, 0, format!("error: {e}")),
            };
            CheckOutcome { suite: s, name, passed, cases, detail }
        })
        .collect())
}

fn m01(u: &GroupUniverse) -> Result<Memory> {
    Memory::new(u, vec![u.element([0])?, u.element([1])?])
}

/// A random memory inside `ball(1)` containing the identity.
fn random_memory(u: &GroupUniverse, rng: &mut ChaCha8Rng) -> Memory {
    let mut set = FiniteSubset::singleton(u.identity());
    for g in u.ball(1) {
        if rng.gen_bool(0.5) {
            set.insert(g);
        }
    }
    Memory::from_set(&set)
}

/// Random background plus up to `max_exceptions` random exceptions among
/// `cells`.
fn random_nuca(
    u: &GroupUniverse,
    q: usize,
    memory: &Memory,
    cells: &FiniteSubset,
    max_exceptions: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Nuca> {
    let background = LocalRule::random(q, memory.clone(), rng)?;
    let pool = cells.to_vec();
    let mut exceptions = BTreeMap::new();
    for _ in 0..rng.gen_range(0..=max_exceptions) {
        let g = pool[rng.gen_range(0..pool.len())].clone();
        exceptions.insert(g, LocalRule::random(q, memory.clone(), rng)?);
    }
    Nuca::new(RuleConfiguration::asymptotically_constant(u, background, exceptions)?)
}

fn random_pattern_config(u: &GroupUniverse, q: usize, cells: &FiniteSubset, rng: &mut ChaCha8Rng) -> Result<Configuration> {
    let bg = rng.gen_range(0..q) as Letter;
    let p = cells.iter().map(|g| (g.clone(), rng.gen_range(0..q) as Letter)).collect();
    Configuration::new(u, bg, p)
}

fn all_configurations(u: &GroupUniverse, q: usize, mut f: impl FnMut(Configuration) -> Result<bool>) -> Result<bool> {
    let cells = u.enumerate_all()?.to_vec();
    let mut ok = true;
    let mut err = None;
    for_each_word(q, cells.len(), |w| {
        if !ok || err.is_some() {
            return;
        }
        match Configuration::from_dense(u, w).and_then(&mut f) {
            Ok(b) => ok = b,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(ok),
    }
}

fn engine_coherence(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(1);
    let z4 = GroupUniverse::cyclic(4)?;
    let cells = z4.enumerate_all()?;
    let mut cases = 0;
    for _ in 0..30 {
        let n = random_nuca(&z4, 2, &m01(&z4)?, &cells, 4, &mut rng)?;
        // every window E ⊆ G against every configuration
        let list = cells.to_vec();
        for mask in 0..1u32 << list.len() {
            let e: FiniteSubset = list.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, g)| g.clone()).collect();
            let phi = n.local_map(&e)?;
            let ok = all_configurations(&z4, 2, |x| {
                let dense = n.evaluate(&x)?.restrict(&e);
                let window = n.evaluate_window(&x.restrict(&cells), &e)?;
                let block = phi.apply(&x.restrict(&cells))?;
                Ok(dense == window && window == block)
            })?;
            cases += 1;
            if !ok {
                return Ok((cases, Some(format!("disagreement on window {e}"))));
            }
        }
    }
    let z2 = GroupUniverse::lattice(2);
    let near = z2.ball(2);
    for _ in 0..200 {
        let memory = random_memory(&z2, &mut rng);
        let n = random_nuca(&z2, 2, &memory, &near, 3, &mut rng)?;
        let x = random_pattern_config(&z2, 2, &near, &mut rng)?;
        let e = z2.ball(rng.gen_range(0..=3));
        let em = z2.product_unchecked(&e, &memory.as_set());
        let full = n.evaluate(&x)?.restrict(&e);
        let window = n.evaluate_window(&x.restrict(&em), &e)?;
        let block = n.local_map(&e)?.apply(&x.restrict(&em))?;
        cases += 1;
        if full != window || window != block {
            return Ok((cases, Some("disagreement on Z^2".into())));
        }
    }
    Ok((cases, None))
}

fn composition_soundness(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(2);
    let z6 = GroupUniverse::cyclic(6)?;
    let cells = z6.enumerate_all()?;
    for i in 0..30 {
        let (ms, md) = (random_memory(&z6, &mut rng), random_memory(&z6, &mut rng));
        let s = random_nuca(&z6, 2, &ms, &cells, 3, &mut rng)?;
        let d = random_nuca(&z6, 2, &md, &cells, 3, &mut rng)?;
        let q = compose(&s, &d, ctx.budget)?;
        if !all_configurations(&z6, 2, |x| Ok(q.evaluate(&x)? == s.evaluate(&d.evaluate(&x)?)?))? {
            return Ok((i + 1, Some(format!("pair {i} disagrees"))));
        }
    }
    Ok((30, None))
}

fn identity_equivalence(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(3);
    let universes = [
        GroupUniverse::cyclic(2)?,
        GroupUniverse::cyclic(3)?,
        GroupUniverse::cyclic(4)?,
        GroupUniverse::cyclic(5)?,
        GroupUniverse::cyclic(6)?,
        GroupUniverse::cyclic(7)?,
        GroupUniverse::cyclic(8)?,
        GroupUniverse::new(0, vec![2, 2])?,
        GroupUniverse::new(0, vec![2, 4])?,
        GroupUniverse::new(0, vec![2, 2, 2])?,
    ];
    for i in 0..50 {
        let u = &universes[i % universes.len()];
        let cells = u.enumerate_all()?;
        let s = random_nuca(u, 2, &random_memory(u, &mut rng), &cells, 2, &mut rng)?;
        let t = if i % 2 == 0 {
            // a known pair when s is injective
            match reversibility_search(&s, 3, ctx.budget)? {
                Reversibility::Found { inverse, .. } => inverse.flattened.expect("automaton"),
                _ => random_nuca(u, 2, &random_memory(u, &mut rng), &cells, 2, &mut rng)?,
            }
        } else {
            random_nuca(u, 2, &random_memory(u, &mut rng), &cells, 2, &mut rng)?
        };
        let fast = identity_check(&t, &s, ctx.budget)?.holds();
        let slow = brute_force_identity(&t, &s, ctx.budget)?.is_none();
        if fast != slow {
            return Ok((i + 1, Some(format!("pair {i} on {u}: identity_check={fast} brute force={slow}"))));
        }
    }
    Ok((50, None))
}

fn async_reduction(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(4);
    let z6 = GroupUniverse::cyclic(6)?;
    let all = z6.enumerate_all()?;
    let memory = Memory::ball(&z6, 1);
    for i in 0..20 {
        let mu = LocalRule::random(2, memory.clone(), &mut rng)?;
        let ca = Nuca::uniform(&z6, mu.clone())?;
        let x0 = random_pattern_config(&z6, 2, &all, &mut rng)?;
        let mut sync = x0.clone();
        for _ in 0..10 {
            sync = ca.evaluate(&sync)?;
        }
        if async_run(&mu, &z6, &[all.clone()], &x0, 10)? != sync {
            return Ok((i + 1, Some(format!("rule {} differs from its synchronous iterate", mu.table_string()))));
        }
        let (a, b) = (rng.gen_range(0..6i64), rng.gen_range(0..6i64));
        if a != b {
            let sa = FiniteSubset::singleton(z6.element([a])?);
            let sb = FiniteSubset::singleton(z6.element([b])?);
            let ab = async_run(&mu, &z6, &[sa.clone(), sb.clone()], &x0, 2)?;
            let ba = async_run(&mu, &z6, &[sb, sa], &x0, 2)?;
            let adjacent = (a - b).rem_euclid(6) == 1 || (b - a).rem_euclid(6) == 1;
            if !adjacent && ab != ba {
                return Ok((i + 1, Some(format!("updates at {a} and {b} do not commute"))));
            }
        }
    }
    Ok((20, None))
}

/// `π`, shift and inverse shift on `[(-1),(0),(1)]`, each with one of the 16
/// rules on `{0, 1}` at the origin.
pub fn theorem_a_cases() -> Result<Vec<Nuca>> {
    let u = GroupUniverse::integers();
    let el = |c: i64| u.element([c]);
    let big = Memory::new(&u, vec![el(-1)?, el(0)?, el(1)?])?;
    let small = Memory::new(&u, vec![el(0)?, el(1)?])?;
    let backgrounds = [
        LocalRule::reader(2, big.clone(), &el(0)?)?,
        LocalRule::reader(2, big.clone(), &el(1)?)?,
        LocalRule::reader(2, big.clone(), &el(-1)?)?,
    ];
    let mut out = Vec::new();
    for bg in &backgrounds {
        for code in 0..16u8 {
            let table = (0..4).map(|i| (code >> (3 - i)) & 1).collect();
            let ex = LocalRule::new(2, small.clone(), table)?.enlarge(&big)?;
            out.push(Nuca::new(RuleConfiguration::asymptotically_constant(
                &u,
                bg.clone(),
                [(el(0)?, ex)].into(),
            )?)?);
        }
    }
    Ok(out)
}

fn theorem_a(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let cases = theorem_a_cases()?;
    let failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .map(|(i, s)| -> Result<Option<String>> {
            let found = matches!(reversibility_search(s, 2, ctx.budget)?, Reversibility::Found { .. });
            match perturbation_invert(s, 2, ctx.budget)? {
                PerturbationOutcome::Inverted(inv) => {
                    if let Some(f) = check_inverse_on_window(s, &inv, 3, ctx.budget)? {
                        return Ok(Some(format!("case {i}: {} fails on {}", f.order, f.input)));
                    }
                    if let Some(flat) = &inv.flattened {
                        if !identity_check(flat, s, ctx.budget)?.holds() || !identity_check(s, flat, ctx.budget)?.holds() {
                            return Ok(Some(format!("case {i}: flattened inverse fails the identity check")));
                        }
                    }
                }
                _ if found => return Ok(Some(format!("case {i}: reversible but not inverted"))),
                _ => {}
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((cases.len(), failures.into_iter().next()))
}

fn theorem_a_fixtures(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let s = ExperimentSpec::parse(Z_XOR_PERTURBATION)?.nuca(ctx.budget)?;
    match perturbation_invert(&s, 2, ctx.budget)? {
        PerturbationOutcome::Inverted(inv) => match check_inverse_on_window(&s, &inv, 3, ctx.budget)? {
            None => {}
            Some(f) => return Ok((1, Some(format!("{} fails on {}", f.order, f.input)))),
        },
        other => return Ok((1, Some(format!("perturbation not inverted: {}", other.report().verdict)))),
    }
    let shift = ExperimentSpec::parse(Z_SHIFT)?.nuca(ctx.budget)?;
    let ok = matches!(reversibility_search(&shift, 1, ctx.budget)?, Reversibility::Found { .. });
    Ok((2, (!ok).then(|| "shift has no inverse of radius 1".to_string())))
}

fn theorem_b(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let u = GroupUniverse::integers();
    let mut checked = 0;
    for (i, s) in theorem_a_cases()?.iter().enumerate() {
        if !matches!(reversibility_search(s, 2, ctx.budget)?, Reversibility::Found { .. }) {
            continue;
        }
        for k in 1..=4 {
            checked += 1;
            let rep = surjectivity_window(s, &u.ball(k), ctx.budget)?;
            if rep.refuted() {
                let w = rep.witness.map(|w| w.to_string()).unwrap_or_default();
                return Ok((checked, Some(format!("case {i}, ball({k}): {w}"))));
            }
        }
    }
    Ok((checked, None))
}

fn theorem_c_finite(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(7);
    let universes = [GroupUniverse::cyclic(2)?, GroupUniverse::cyclic(3)?, GroupUniverse::cyclic(4)?];
    let mut premises = 0;
    for i in 0..500 {
        let u = &universes[i % universes.len()];
        let cells = u.enumerate_all()?;
        let s = random_nuca(u, 2, &random_memory(u, &mut rng), &cells, cells.len(), &mut rng)?;
        let post = post_surjectivity_check(&s, 1, 1, ctx.budget)?.holds();
        let pre = pre_injectivity_check(&s, 1, ctx.budget)?.holds();
        if post && pre {
            premises += 1;
            if !stable_sweep(&s, Property::Invertible, ctx.budget)?.holds() {
                return Ok((i + 1, Some(format!("sample {i} on {u} is not stably invertible"))));
            }
        }
    }
    if premises == 0 {
        return Ok((500, Some("no sample satisfied the premises".into())));
    }
    Ok((500, None))
}

/// Over Z: an inverted perturbation is never refuted as post-surjective or
/// pre-injective within small radii.
fn theorem_c_infinite(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut checked = 0;
    for (i, s) in theorem_a_cases()?.iter().enumerate() {
        if !matches!(perturbation_invert(s, 2, ctx.budget)?, PerturbationOutcome::Inverted(_)) {
            continue;
        }
        checked += 1;
        if post_surjectivity_check(s, 1, 3, ctx.budget)?.refuted() || pre_injectivity_check(s, 2, ctx.budget)?.refuted() {
            return Ok((checked, Some(format!("case {i} is invertible but refuted"))));
        }
    }
    Ok((checked, None))
}

fn ball_exhaustion(_: &Ctx) -> Result<(usize, Option<String>)> {
    let universes = [
        GroupUniverse::cyclic(5)?,
        GroupUniverse::cyclic(6)?,
        GroupUniverse::new(0, vec![2, 3])?,
        GroupUniverse::new(0, vec![3, 3])?,
        GroupUniverse::new(1, vec![3])?,
        GroupUniverse::lattice(2),
    ];
    for u in &universes {
        let all = u.enumerate_all().ok();
        let delta = u.ball(1);
        let mut prev = u.ball(0);
        for k in 1..=8 {
            let next = u.ball(k);
            if !prev.is_subset(&next) || u.product_set(&prev, &delta)? != next {
                return Ok((0, Some(format!("ball({k}) on {u} is not E_(k-1) Δ"))));
            }
            prev = next;
        }
        if let Some(all) = all {
            if prev != all {
                return Ok((0, Some(format!("balls do not exhaust {u}"))));
            }
        }
    }
    Ok((universes.len(), None))
}

/// On `Z/2 x Z/3` with memory inside the `Z/3` factor, `σ = Φ × Ψ` along
/// `{0} x Z/3`, and `σ` is bijective iff both factors are.
fn block_decomposition(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(9);
    let u = GroupUniverse::new(0, vec![2, 3])?;
    let memory = Memory::new(&u, vec![u.element([0, 0])?, u.element([0, 1])?])?;
    let cells = u.enumerate_all()?;
    let e: FiniteSubset = (0..3).map(|j| u.element([0, j])).collect::<Result<_>>()?;
    let rest = cells.difference(&e);
    for i in 0..40 {
        let s = random_nuca(&u, 2, &memory, &cells, 3, &mut rng)?;
        let (phi, psi) = product_split(&s, &e)?;
        let ok = all_configurations(&u, 2, |x| {
            let y = s.evaluate(&x)?;
            Ok(phi.apply(&x.restrict(&e))? == y.restrict(&e) && psi.apply(&x.restrict(&rest))? == y.restrict(&rest))
        })?;
        if !ok {
            return Ok((i + 1, Some(format!("sample {i} does not split"))));
        }
        let bij = |b: &crate::rules::BlockMap| -> Result<bool> { Ok(b.image(ctx.budget)?.iter().all(|&h| h)) };
        let whole = finite_check(&s, Property::Invertible, ctx.budget)?.holds();
        if whole != (bij(&phi)? && bij(&psi)?) {
            return Ok((i + 1, Some(format!("sample {i}: invertibility does not factor"))));
        }
    }
    Ok((40, None))
}

fn random_linear(
    u: &GroupUniverse,
    rng: &mut ChaCha8Rng,
    max_exceptions: usize,
) -> Result<LinearRuleConfiguration> {
    let p = if rng.gen_bool(0.5) { 2 } else { 3 };
    let n = rng.gen_range(1..=2);
    let a = LinearAlphabet::new(p, n)?;
    let memory = random_memory(u, rng);
    let pool = if u.is_finite() { u.enumerate_all()? } else { u.ball(2) };
    let background = LinearLocalRule::random(a, memory.clone(), rng)?;
    let mut ex = BTreeMap::new();
    let list = pool.to_vec();
    for _ in 0..rng.gen_range(0..=max_exceptions) {
        ex.insert(list[rng.gen_range(0..list.len())].clone(), LinearLocalRule::random(a, memory.clone(), rng)?);
    }
    LinearRuleConfiguration::asymptotically_constant(u, background, ex)
}

fn double_dual(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(11);
    let universes =
        [GroupUniverse::integers(), GroupUniverse::lattice(2), GroupUniverse::cyclic(3)?, GroupUniverse::new(1, vec![2])?];
    for i in 0..200 {
        let u = &universes[i % universes.len()];
        let s = random_linear(u, &mut rng, 3)?;
        if let Some(m) = linear::double_dual_check(&s)? {
            return Ok((i + 1, Some(format!("s** differs from s at cell {} memory {}", m.cell, m.memory_cell))));
        }
    }
    Ok((200, None))
}

fn transpose_oracle(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let universes = [GroupUniverse::cyclic(3)?, GroupUniverse::cyclic(4)?, GroupUniverse::new(0, vec![2, 2])?];
    let a = LinearAlphabet::new(2, 1)?;
    let mut cases = 0;
    for u in &universes {
        let memory = Memory::ball(u, 1);
        let cells = u.enumerate_all()?.to_vec();
        let k = memory.len();
        // every assignment of a p=2, n=1 rule on ball(1) to every cell
        let rule = |code: usize| -> Result<LinearLocalRule> {
            let matrices = memory
                .cells()
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), FpMatrix::from_rows(2, &[vec![((code >> i) & 1) as i64]]).expect("1x1")))
                .collect();
            LinearLocalRule::new(a, memory.clone(), matrices)
        };
        let per_cell = 1usize << k;
        let total = per_cell.pow(cells.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut ex = BTreeMap::new();
            for g in &cells {
                ex.insert(g.clone(), rule(c % per_cell)?);
                c /= per_cell;
            }
            let s = LinearRuleConfiguration::asymptotically_constant(u, rule(0)?, ex)?;
            let lhs = linear::global_matrix(&linear::dual(&s)?, ctx.budget)?;
            let rhs = linear::global_matrix(&s, ctx.budget)?.transpose();
            cases += 1;
            if lhs != rhs {
                return Ok((cases, Some(format!("assignment {code} on {u}"))));
            }
        }
    }
    Ok((cases, None))
}

fn dual_invertibility(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(13);
    let universes = [GroupUniverse::cyclic(3)?, GroupUniverse::cyclic(4)?, GroupUniverse::new(0, vec![2, 2])?];
    for i in 0..200 {
        let u = &universes[i % universes.len()];
        let s = random_linear(u, &mut rng, 4)?;
        let d = linear::dual(&s)?;
        let by_matrix = linear::global_matrix(&s, ctx.budget)?.is_invertible();
        let dual_by_matrix = linear::global_matrix(&d, ctx.budget)?.is_invertible();
        let by_engine = finite_check(&s.to_nuca(ctx.budget)?, Property::Invertible, ctx.budget)?;
        let dual_by_engine = finite_check(&d.to_nuca(ctx.budget)?, Property::Invertible, ctx.budget)?;
        if by_engine.verdict == Verdict::Inconclusive || dual_by_engine.verdict == Verdict::Inconclusive {
            return Ok((i + 1, Some(format!("sample {i} exceeds the budget"))));
        }
        if by_matrix != dual_by_matrix || by_matrix != by_engine.holds() || dual_by_matrix != dual_by_engine.holds() {
            return Ok((i + 1, Some(format!("sample {i} on {u}: invertibility differs from its dual"))));
        }
    }
    Ok((200, None))
}

fn lemma_6_1(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let s = ExperimentSpec::parse(Z_SPARSE4)?.nuca(ctx.budget)?;
    let u = s.universe().clone();
    for k in 1..=3 {
        let e = u.ball(k);
        let out = ubs_localize(&s, &s, &e, 200, ctx.budget)?;
        let agrees = e.iter().all(|g| {
            out.p.rule_at(g).same_function(s.rule_at(g)) && out.q.rule_at(g).same_function(s.rule_at(g))
        });
        if !agrees {
            return Ok((k, Some(format!("ball({k}): p or q differs from s on E"))));
        }
        if !identity_check(&out.q, &out.p, ctx.budget)?.holds() {
            return Ok((k, Some(format!("ball({k}): q ∘ p is not the identity"))));
        }
    }
    Ok((3, None))
}

fn corollary_2_2(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(17);
    let universes = [GroupUniverse::cyclic(2)?, GroupUniverse::cyclic(3)?, GroupUniverse::cyclic(4)?, GroupUniverse::cyclic(5)?];
    for i in 0..120 {
        let u = &universes[i % universes.len()];
        let cells = u.enumerate_all()?;
        let s = random_nuca(u, 2, &random_memory(u, &mut rng), &cells, 2, &mut rng)?;
        let reversible = match reversibility_search(&s, cells.len(), ctx.budget)? {
            Reversibility::Found { .. } => true,
            Reversibility::Refuted(_) => false,
            Reversibility::Inconclusive { reason, .. } => return Ok((i + 1, Some(reason))),
        };
        if reversible != stable_sweep(&s, Property::Injective, ctx.budget)?.holds() {
            return Ok((i + 1, Some(format!("sample {i} on {u}: reversible={reversible}"))));
        }
    }
    Ok((120, None))
}

fn lemma_2_1(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    let mut rng = ctx.rng(19);
    let universes = [GroupUniverse::cyclic(3)?, GroupUniverse::cyclic(4)?, GroupUniverse::new(0, vec![2, 2])?];
    for i in 0..120 {
        let u = &universes[i % universes.len()];
        let cells = u.enumerate_all()?;
        let s = random_nuca(u, 2, &random_memory(u, &mut rng), &cells, 3, &mut rng)?;
        if finite_check(&s, Property::Invertible, ctx.budget)?.holds()
            && !stable_sweep(&s, Property::Invertible, ctx.budget)?.holds()
        {
            return Ok((i + 1, Some(format!("sample {i} on {u} is invertible but not stably"))));
        }
    }
    Ok((120, None))
}

/// Every fixture parses, round-trips and is referenced by a suite.
fn fixtures_parse(ctx: &Ctx) -> Result<(usize, Option<String>)> {
    for (name, text) in FIXTURES {
        let spec = ExperimentSpec::parse(text).map_err(|e| NucaError::Internal(format!("{name}: {e}")))?;
        if ExperimentSpec::parse(&spec.to_string())? != spec {
            return Ok((0, Some(format!("{name} does not round-trip"))));
        }
        spec.nuca(ctx.budget)?;
    }
    let z3 = ExperimentSpec::parse(Z3_XOR)?.nuca(ctx.budget)?;
    if !finite_check(&z3, Property::Injective, ctx.budget)?.refuted() {
        return Ok((1, Some("XOR on Z/3 is reported injective".into())));
    }
    let zx = ExperimentSpec::parse(Z_XOR)?.nuca(ctx.budget)?;
    if post_surjectivity_check(&zx, 1, 2, ctx.budget)?.holds() {
        return Ok((2, Some("bounded post-surjectivity claimed to hold on Z".into())));
    }
    let lin = ExperimentSpec::parse(Z3_LINEAR)?;
    if lin.linear_configuration()?.is_none() {
        return Ok((3, Some("linear fixture is not linear".into())));
    }
    let maj = ExperimentSpec::parse(Z6_MAJORITY)?;
    let maj_n = maj.nuca(ctx.budget)?;
    let all = maj.universe.enumerate_all()?;
    let x0 = PatternFile::parse(&maj.universe, 2, Z6_START)?.configuration(&maj.universe)?;
    let rule = maj_n.rules().background().clone();
    if async_run(&rule, &maj.universe, &[all], &x0, 1)? != maj_n.evaluate(&x0)? {
        return Ok((4, Some("majority async step differs from the synchronous step".into())));
    }
    // the two halves of the alternating schedule together update every cell once
    let halves = parse_schedule(&maj.universe, Z6_SCHEDULE)?;
    if halves.len() != 2 || halves[0].union(&halves[1]).len() != 6 {
        return Ok((5, Some("alternating schedule does not cover Z/6".into())));
    }
    let one = PatternFile::parse(&GroupUniverse::integers(), 2, Z_ONE)?;
    let zp = ExperimentSpec::parse(Z_XOR_PERTURBATION)?.nuca(ctx.budget)?;
    if zp.evaluate(&one.configuration(zp.universe())?)?.exceptions().len() != 1 {
        return Ok((6, Some("perturbation moved the single 1".into())));
    }
    Ok((FIXTURES.len() + 3, None))
}
