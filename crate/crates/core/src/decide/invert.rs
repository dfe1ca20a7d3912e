//! Left inverses by per-cell search, and two-sided inverses of local
//! perturbations of invertible cellular automata.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{injectivity_oracle, PropertyReport, Verdict, Witness};
use crate::configuration::{Configuration, Letter, Pattern};
use crate::engine::{compose, far_cells, identity_check, Nuca};
use crate::error::{NucaError, Result};
use crate::rules::{BlockInverse, BlockMap, LocalRule, Memory, RuleConfiguration, Tap};
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::{word_count, Budget};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseKind {
    /// `σ_t ∘ σ_s = Id`.
    Left,
    /// Inverse on both sides.
    TwoSided,
}

/// One factor of an inverse.
#[derive(Clone, Debug)]
pub enum Stage {
    Automaton(Nuca),
    /// `Φ × Id`: `Φ` on the cells of its domain, identity elsewhere.
    Block(BlockMap),
}

impl Stage {
    /// Cells of the input needed to produce the output on `w`.
    fn required(&self, w: &FiniteSubset) -> FiniteSubset {
        match self {
            Stage::Automaton(n) => n.universe().product_unchecked(w, &n.memory().as_set()),
            Stage::Block(phi) => {
                let dom: FiniteSubset = phi.domain().iter().cloned().collect();
                if w.intersection(&dom).is_empty() {
                    w.clone()
                } else {
                    w.union(&dom)
                }
            }
        }
    }

    fn apply_window(&self, x: &Pattern, w: &FiniteSubset) -> Result<Pattern> {
        match self {
            Stage::Automaton(n) => n.evaluate_window(x, w),
            Stage::Block(phi) => {
                let dom: FiniteSubset = phi.domain().iter().cloned().collect();
                let inside = if w.intersection(&dom).is_empty() { None } else { Some(phi.apply(x)?) };
                w.iter()
                    .map(|g| {
                        let a = match &inside {
                            Some(p) if dom.contains(g) => p.get(g),
                            _ => x.get(g),
                        };
                        a.map(|a| (g.clone(), a)).ok_or_else(|| NucaError::MissingCells(vec![g.clone()]))
                    })
                    .collect()
            }
        }
    }

    fn apply(&self, x: &Configuration) -> Result<Configuration> {
        match self {
            Stage::Automaton(n) => n.evaluate(x),
            Stage::Block(phi) => {
                let dom: FiniteSubset = phi.domain().iter().cloned().collect();
                x.with_pattern(&phi.apply(&x.restrict(&dom))?)
            }
        }
    }
}

/// An inverse map, as factors listed in composition order (the last stage
/// is applied first), with a single flattened automaton when one fits the
/// budget.
#[derive(Clone, Debug)]
pub struct InverseObject {
    pub kind: InverseKind,
    pub stages: Vec<Stage>,
    pub flattened: Option<Nuca>,
}

impl InverseObject {
    fn single(kind: InverseKind, n: Nuca) -> Self {
        InverseObject { kind, stages: vec![Stage::Automaton(n.clone())], flattened: Some(n) }
    }

    /// Input cells needed to produce the output on `w`.
    pub fn required_region(&self, w: &FiniteSubset) -> FiniteSubset {
        self.stages.iter().fold(w.clone(), |r, s| s.required(&r))
    }

    /// Output on `w`, reading only the required region of `x`.
    pub fn apply_window(&self, x: &Pattern, w: &FiniteSubset) -> Result<Pattern> {
        let mut regions = vec![w.clone()];
        for s in &self.stages {
            let next = s.required(regions.last().expect("nonempty"));
            regions.push(next);
        }
        let mut cur = x.restrict(regions.last().expect("nonempty"))?;
        for (i, s) in self.stages.iter().enumerate().rev() {
            cur = s.apply_window(&cur, &regions[i])?;
        }
        Ok(cur)
    }

    pub fn apply(&self, x: &Configuration) -> Result<Configuration> {
        self.stages.iter().rev().try_fold(x.clone(), |cur, s| s.apply(&cur))
    }
}

/// Outcome of [`reversibility_search`].
#[derive(Clone, Debug)]
pub enum Reversibility {
    /// A left inverse with memory `ball(radius)`.
    Found { inverse: InverseObject, radius: usize },
    /// Finite universe, memory already the whole group: not injective.
    Refuted(PropertyReport),
    Inconclusive { radius: usize, reason: String },
}

impl Reversibility {
    pub fn left_inverse(&self) -> Option<&Nuca> {
        match self {
            Reversibility::Found { inverse, .. } => inverse.flattened.as_ref(),
            _ => None,
        }
    }

    pub fn report(&self) -> PropertyReport {
        match self {
            Reversibility::Found { radius, .. } => PropertyReport::new("reversible", Verdict::Holds).bound("radius", radius),
            Reversibility::Refuted(r) => {
                let mut r = r.clone();
                r.property = "reversible".into();
                r
            }
            Reversibility::Inconclusive { radius, reason } => {
                PropertyReport::new("reversible", Verdict::Inconclusive).bound("r_max", radius).with_note(reason.clone())
            }
        }
    }
}

/// The left-inverse rule at cell `g` on memory `N`, if one exists:
/// `t(g)(o(u)) = u(1_G)` for every `u ∈ A^{NM}`, where `o` is the local map of
/// `gN` in coordinates centred at `g`. Unconstrained entries get letter 0.
fn local_inverse_rule(n: &Nuca, g: &Element, nset: &FiniteSubset, budget: Budget) -> Result<Option<LocalRule>> {
    let u = n.universe();
    let q = n.alphabet_size();
    let local = n.conjugated_local_map(g, nset)?;
    let len = local.domain().len();
    let at = local.domain().iter().position(|c| *c == u.identity()).expect("1 ∈ NM");
    let place = word_count(q, len - 1 - at).expect("fits in budget");
    let mut table: Vec<Option<Letter>> = vec![None; word_count(q, nset.len()).expect("fits") as usize];
    let mut conflict = false;
    local.for_each(budget, |i, o| {
        if conflict {
            return;
        }
        let centre = ((i / place) % q as u64) as Letter;
        match table[o as usize] {
            None => table[o as usize] = Some(centre),
            Some(a) if a != centre => conflict = true,
            Some(_) => {}
        }
    })?;
    if conflict {
        return Ok(None);
    }
    let table = table.into_iter().map(|a| a.unwrap_or(0)).collect();
    Ok(Some(LocalRule::new(q, Memory::from_set(nset), table)?))
}

/// Searches a left inverse `t` with memory `N = ball(r)` for `r = 0..=r_max`.
///
/// Only cells whose window `gN` meets an exception need their own rule; one
/// far cell stands for all the others. The result always passes
/// [`identity_check`]. Failure is inconclusive, except on a finite universe
/// once `N` is the whole group.
pub fn reversibility_search(n: &Nuca, r_max: usize, budget: Budget) -> Result<Reversibility> {
    let u = n.universe();
    let q = n.alphabet_size();
    let xs = n
        .exception_support()
        .ok_or_else(|| NucaError::Unsupported("reversibility search for sparse singular rules".into()))?;
    let all = if u.is_finite() { Some(u.enumerate_all()?) } else { None };
    let mut reason = String::from("no left inverse within r_max");
    for r in 0..=r_max {
        let nset = u.ball(r);
        let full = all.as_ref().is_some_and(|a| a.len() == nset.len());
        let nm = u.product_unchecked(&nset, &n.memory().as_set());
        if let Err(e) = budget.words(q, nm.len()) {
            return Ok(Reversibility::Inconclusive { radius: r, reason: e.to_string() });
        }
        let (classes, background_cell) = match &all {
            Some(a) => (a.clone(), None),
            None => {
                let special = u.product_unchecked(&xs, &u.inverse_set(&nset));
                let far = far_cells(u, &special, 1).pop().expect("infinite universe");
                (special, Some(far))
            }
        };
        let mut rules = BTreeMap::new();
        let mut ok = true;
        for g in classes.iter().chain(background_cell.iter()) {
            match local_inverse_rule(n, g, &nset, budget)? {
                Some(t) => {
                    rules.insert(g.clone(), t);
                }
                None => {
                    ok = false;
                    reason = format!("no local inverse at cell {g} up to radius {r}");
                    break;
                }
            }
        }
        if ok {
            let background = match &background_cell {
                Some(b) => rules.remove(b).expect("background rule"),
                None => rules.values().next().cloned().expect("nonempty group"),
            };
            let t = Nuca::new(RuleConfiguration::asymptotically_constant(u, background, rules)?)?;
            if !identity_check(&t, n, budget)?.holds() {
                return Err(NucaError::Internal("searched left inverse fails the identity check".into()));
            }
            return Ok(Reversibility::Found { inverse: InverseObject::single(InverseKind::Left, t), radius: r });
        }
        if full {
            return Ok(Reversibility::Refuted(injectivity_oracle(n, budget)?));
        }
    }
    Ok(Reversibility::Inconclusive { radius: r_max, reason })
}

/// `Φ: A^B -> A^B`, `Φ(x) = σ_q(y)|_B` for any extension `y` of `x`.
///
/// Requires `q` to be the projection on `B \ F` and `F M ⊆ B`. The
/// definition is also spot-checked on random inputs with two different
/// extensions each.
pub fn extract_block_map(qn: &Nuca, b: &FiniteSubset, f: &FiniteSubset) -> Result<BlockMap> {
    let u = qn.universe();
    let m = qn.memory();
    for g in f {
        if !b.contains(g) {
            return Err(NucaError::Precondition { cell: g.clone(), reason: "F is not contained in B".into() });
        }
        if let Some(out) = m.cells().iter().map(|c| u.op(g, c)).find(|c| !b.contains(c)) {
            return Err(NucaError::Precondition { cell: g.clone(), reason: format!("reads {out} outside B") });
        }
    }
    for g in b.difference(f).iter() {
        if !qn.rule_at(g).is_projection(u) {
            return Err(NucaError::Precondition { cell: g.clone(), reason: "rule is not the projection".into() });
        }
    }
    let cells = b.to_vec();
    let position: BTreeMap<&Element, usize> = cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let taps = cells
        .iter()
        .map(|g| {
            if f.contains(g) {
                let inputs = m.cells().iter().map(|c| position[&u.op(g, c)]).collect();
                Tap::Rule { table: qn.rule_at(g).shared_table(), inputs }
            } else {
                Tap::Copy(position[g])
            }
        })
        .collect();
    let phi = BlockMap::from_taps(qn.alphabet_size(), cells.clone(), cells.clone(), taps)?;
    spot_check(qn, &phi, b)?;
    Ok(phi)
}

fn spot_check(qn: &Nuca, phi: &BlockMap, b: &FiniteSubset) -> Result<()> {
    let u = qn.universe();
    let q = qn.alphabet_size();
    let outside = u.product_unchecked(b, &qn.memory().as_set()).difference(b).to_vec();
    let cells = b.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b10_c4a9);
    for _ in 0..20 {
        let word: Vec<Letter> = cells.iter().map(|_| rng.gen_range(0..q) as Letter).collect();
        let x = Pattern::from_word(&cells, &word);
        let expected = phi.apply(&x)?;
        for _ in 0..2 {
            let fill: Vec<Letter> = outside.iter().map(|_| rng.gen_range(0..q) as Letter).collect();
            let y = x.overlay(&Pattern::from_word(&outside, &fill));
            if qn.evaluate_window(&y, b)? != expected {
                return Err(NucaError::Internal("block map depends on cells outside B".into()));
            }
        }
    }
    Ok(())
}

/// `Φ × Id` as an automaton: cells of the domain `E` read `E` through the
/// memory `E^-1 E`, every other cell keeps its letter.
pub fn block_as_nuca(u: &GroupUniverse, phi: &BlockMap) -> Result<Nuca> {
    let dom: FiniteSubset = phi.domain().iter().cloned().collect();
    let mut k = u.product_unchecked(&u.inverse_set(&dom), &dom);
    k.insert(u.identity());
    let memory = Memory::from_set(&k);
    let q = phi.alphabet_size();
    let pi = LocalRule::projection(q, memory.clone(), u)?;
    let mut exceptions = BTreeMap::new();
    for g in phi.codomain() {
        let reads: Vec<usize> = phi
            .domain()
            .iter()
            .map(|e| memory.position(&u.op(&u.inv(g), e)).expect("g^-1 E ⊆ E^-1 E"))
            .collect();
        let at = phi.codomain().iter().position(|c| c == g).expect("codomain cell");
        let mut word = vec![0 as Letter; reads.len()];
        let mut out = vec![0 as Letter; phi.codomain().len()];
        let rule = LocalRule::from_fn(q, memory.clone(), |v| {
            for (slot, &p) in word.iter_mut().zip(&reads) {
                *slot = v[p];
            }
            phi.apply_word(&word, &mut out);
            out[at]
        })?;
        exceptions.insert(g.clone(), rule);
    }
    Nuca::new(RuleConfiguration::asymptotically_constant(u, pi, exceptions)?)
}

/// Outcome of [`perturbation_invert`].
#[derive(Clone, Debug)]
pub enum PerturbationOutcome {
    Inverted(InverseObject),
    /// Two distinct asymptotic configurations with the same image.
    NotInjective { x: Configuration, y: Configuration, image: Configuration },
    Inconclusive(String),
}

impl PerturbationOutcome {
    pub fn report(&self) -> PropertyReport {
        match self {
            PerturbationOutcome::Inverted(inv) => PropertyReport::new("invertible", Verdict::Holds)
                .bound("stages", inv.stages.len())
                .bound("flattened", inv.flattened.is_some()),
            PerturbationOutcome::NotInjective { x, y, image } => PropertyReport::new("invertible", Verdict::Refuted)
                .with_witness(Witness::Collision { x: x.clone(), y: y.clone(), image: image.clone() }),
            PerturbationOutcome::Inconclusive(reason) => {
                PropertyReport::new("invertible", Verdict::Inconclusive).with_note(reason.clone())
            }
        }
    }
}

/// Inverts a local perturbation `s` of a cellular automaton `c`.
///
/// 1. find `d` with `σ_c ∘ σ_d = σ_d ∘ σ_c = Id` (memory `N`);
/// 2. `q = s ∘ d`, so that `σ_s = σ_q ∘ σ_c` and `q` is the projection off
///    the exception set `F`;
/// 3. `E = F M N` and `σ_q = Φ × Id` with `Φ` on `A^E`;
/// 4. if `Φ` is a bijection, `σ_s^-1 = σ_d ∘ (Φ^-1 × Id)`. Otherwise a
///    collision of `Φ`, pushed through `σ_d`, is a collision of `σ_s`.
pub fn perturbation_invert(n: &Nuca, r_max: usize, budget: Budget) -> Result<PerturbationOutcome> {
    let u = n.universe();
    let f = n
        .exception_support()
        .ok_or_else(|| NucaError::Unsupported("inversion of sparse singular rules".into()))?;
    let c = Nuca::uniform(u, n.rules().background().clone())?;
    let d = match reversibility_search(&c, r_max, budget)? {
        Reversibility::Found { inverse, .. } => inverse.flattened.expect("search returns an automaton"),
        _ => return Ok(PerturbationOutcome::Inconclusive("background CA not invertible within r_max".into())),
    };
    if !identity_check(&c, &d, budget)?.holds() {
        return Ok(PerturbationOutcome::Inconclusive("background CA has no two-sided inverse within r_max".into()));
    }
    if f.is_empty() {
        return Ok(PerturbationOutcome::Inverted(InverseObject::single(InverseKind::TwoSided, d)));
    }
    let qn = match compose(n, &d, budget) {
        Ok(q) => q,
        Err(e @ NucaError::BudgetExceeded { .. }) => return Ok(PerturbationOutcome::Inconclusive(e.to_string())),
        Err(e) => return Err(e),
    };
    let e = u.product_unchecked(&u.product_unchecked(&f, &n.memory().as_set()), &d.memory().as_set());
    if let Err(err) = budget.words(n.alphabet_size(), e.len()) {
        return Ok(PerturbationOutcome::Inconclusive(err.to_string()));
    }
    let phi = extract_block_map(&qn, &e, &f)?;
    match phi.inverse(budget)? {
        BlockInverse::Bijective(phi_inv) => {
            let flattened = match block_as_nuca(u, &phi_inv).and_then(|b| compose(&d, &b, budget)) {
                Ok(flat) => Some(flat),
                Err(NucaError::BudgetExceeded { .. }) => None,
                Err(err) => return Err(err),
            };
            Ok(PerturbationOutcome::Inverted(InverseObject {
                kind: InverseKind::TwoSided,
                stages: vec![Stage::Automaton(d), Stage::Block(phi_inv)],
                flattened,
            }))
        }
        BlockInverse::Collision(a, b) => {
            let cells = e.to_vec();
            let q = n.alphabet_size();
            let lift = |i: u64| -> Result<Configuration> {
                let mut w = vec![0 as Letter; cells.len()];
                crate::words::index_to_word(i, q, &mut w);
                d.evaluate(&Configuration::new(u, 0, Pattern::from_word(&cells, &w))?)
            };
            let (x, y) = (lift(a)?, lift(b)?);
            let image = n.evaluate(&x)?;
            if n.evaluate(&y)? != image || x == y {
                return Err(NucaError::Internal("lifted block collision is not a collision".into()));
            }
            Ok(PerturbationOutcome::NotInjective { x, y, image })
        }
        BlockInverse::NotSurjective(_) => Err(NucaError::Internal("injective block map is not onto".into())),
    }
}

/// Which order of composition a windowed check failed in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowFailure {
    /// `"inverse∘nuca"` or `"nuca∘inverse"`.
    pub order: &'static str,
    pub input: Pattern,
}

/// Checks `inv ∘ σ = Id` and `σ ∘ inv = Id` on the window `ball(radius)`,
/// for every pattern on the region the composite reads.
pub fn check_inverse_on_window(
    n: &Nuca,
    inv: &InverseObject,
    radius: usize,
    budget: Budget,
) -> Result<Option<WindowFailure>> {
    let u = n.universe();
    let q = n.alphabet_size();
    let w = u.ball(radius);
    let m = n.memory().as_set();
    // inverse after nuca
    let mid = inv.required_region(&w);
    let region = u.product_unchecked(&mid, &m);
    if let Some(x) = first_failure(q, &region, budget, |x| {
        let y = n.evaluate_window(x, &mid)?;
        Ok(inv.apply_window(&y, &w)? == x.restrict(&w)?)
    })? {
        return Ok(Some(WindowFailure { order: "inverse∘nuca", input: x }));
    }
    // nuca after inverse
    let mid = u.product_unchecked(&w, &m);
    let region = inv.required_region(&mid);
    if let Some(x) = first_failure(q, &region, budget, |x| {
        let y = inv.apply_window(x, &mid)?;
        Ok(n.evaluate_window(&y, &w)? == x.restrict(&w)?)
    })? {
        return Ok(Some(WindowFailure { order: "nuca∘inverse", input: x }));
    }
    Ok(None)
}

fn first_failure(
    q: usize,
    region: &FiniteSubset,
    budget: Budget,
    mut ok: impl FnMut(&Pattern) -> Result<bool>,
) -> Result<Option<Pattern>> {
    let cells = region.to_vec();
    let count = budget.words(q, cells.len())?;
    let mut w = vec![0 as Letter; cells.len()];
    for _ in 0..count {
        let x = Pattern::from_word(&cells, &w);
        if !ok(&x)? {
            return Ok(Some(x));
        }
        crate::words::next_word(&mut w, q);
    }
    Ok(None)
}

/// On a finite universe, splits `σ_s = Φ × Ψ` along `G = E ⊔ (G \ E)` when
/// neither part reads the other.
pub fn product_split(n: &Nuca, e: &FiniteSubset) -> Result<(BlockMap, BlockMap)> {
    let u = n.universe();
    let all = u.enumerate_all()?;
    let rest = all.difference(e);
    let m = n.memory().as_set();
    for g in &all {
        let inside = e.contains(g);
        let side = if inside { e } else { &rest };
        if let Some(c) = u.translate_set(g, &m).iter().find(|c| !side.contains(c)) {
            return Err(NucaError::Precondition {
                cell: g.clone(),
                reason: format!("reads {c} across the split"),
            });
        }
    }
    Ok((n.local_map(e)?, n.local_map(&rest)?))
}
