//! Evaluation of `σ_s`, composition, the per-cell identity test and
//! asynchronous runs.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::configuration::{Configuration, Letter, Pattern};
use crate::error::{NucaError, Result};
use crate::rules::{induced_local_map, BlockMap, LocalRule, Memory, RuleConfiguration, RuleLayout, Tap};
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::{for_each_word, index_to_word, word_count, Budget};

/// The map `σ_s: A^G -> A^G`, `σ_s(x)(g) = s(g)((g^-1 x)|_M)`.
///
/// The memory always contains the identity; rules given on a smaller memory
/// are enlarged on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nuca {
    rules: RuleConfiguration,
}

impl Nuca {
    pub fn new(rules: RuleConfiguration) -> Result<Self> {
        let u = rules.universe();
        let m = rules.memory();
        if m.contains(&u.identity()) {
            return Ok(Nuca { rules });
        }
        let target = m.with_identity(u);
        Ok(Nuca { rules: rules.enlarge_memory(&target)? })
    }

    /// Classical cellular automaton with local rule `rule`.
    pub fn uniform(universe: &GroupUniverse, rule: LocalRule) -> Result<Self> {
        Nuca::new(RuleConfiguration::constant(universe, rule)?)
    }

    /// The identity map, with local rule `π` on `memory`.
    pub fn identity(universe: &GroupUniverse, alphabet_size: usize, memory: &Memory) -> Result<Self> {
        let m = memory.with_identity(universe);
        Nuca::uniform(universe, LocalRule::projection(alphabet_size, m, universe)?)
    }

    pub fn rules(&self) -> &RuleConfiguration {
        &self.rules
    }

    pub fn universe(&self) -> &GroupUniverse {
        self.rules.universe()
    }

    pub fn memory(&self) -> &Memory {
        self.rules.memory()
    }

    pub fn alphabet_size(&self) -> usize {
        self.rules.alphabet_size()
    }

    pub fn rule_at(&self, g: &Element) -> &LocalRule {
        self.rules.rule_at(g)
    }

    /// Cells whose rule differs from the background (`None` for sparse layouts).
    pub fn exception_support(&self) -> Option<FiniteSubset> {
        self.rules.exception_support()
    }

    /// `σ_{gs}`, where `(gs)(h) = s(g^-1 h)`.
    pub fn shifted(&self, g: &Element) -> Result<Nuca> {
        Ok(Nuca { rules: self.rules.shift(g)? })
    }

    /// Same map with every rule rewritten on a larger memory.
    pub fn with_memory(&self, target: &Memory) -> Result<Nuca> {
        Nuca::new(self.rules.enlarge_memory(target)?)
    }

    fn check_letter(&self, a: Letter) -> Result<()> {
        if (a as usize) < self.alphabet_size() {
            Ok(())
        } else {
            Err(NucaError::LetterOutOfRange { letter: a as u32, size: self.alphabet_size() as u32 })
        }
    }

    /// `σ_s(x)(g)` where `read(h)` gives `x(h)`.
    fn cell_value(&self, g: &Element, read: impl Fn(&Element) -> Letter) -> Letter {
        let u = self.universe();
        let rule = self.rule_at(g);
        let word: Vec<Letter> = rule.memory().cells().iter().map(|m| read(&u.op(g, m))).collect();
        rule.apply(&word)
    }

    /// `σ_s(x)|_E`, which only reads `x|_{EM}`.
    pub fn evaluate_window(&self, x: &Pattern, e: &FiniteSubset) -> Result<Pattern> {
        let u = self.universe();
        for g in e {
            u.check(g)?;
        }
        let needed = u.product_unchecked(e, &self.memory().as_set());
        let missing: Vec<Element> = needed.iter().filter(|c| x.get(c).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(NucaError::MissingCells(missing));
        }
        for c in &needed {
            self.check_letter(x.get(c).expect("checked above"))?;
        }
        Ok(e.iter()
            .map(|g| (g.clone(), self.cell_value(g, |h| x.get(h).expect("checked above"))))
            .collect())
    }

    /// `σ_s(x)` for an asymptotically constant `x`.
    pub fn evaluate(&self, x: &Configuration) -> Result<Configuration> {
        let u = self.universe();
        if x.universe() != u {
            return Err(NucaError::Mismatch(format!("configuration on {} for an automaton on {u}", x.universe())));
        }
        self.check_letter(x.background())?;
        for (_, a) in x.exceptions().iter() {
            self.check_letter(a)?;
        }
        if u.is_finite() {
            let cells = u.enumerate_all()?;
            let out: Pattern = cells.iter().map(|g| (g.clone(), self.cell_value(g, |h| x.get(h)))).collect();
            return Configuration::new(u, 0, out);
        }
        let special = self.rules.exception_support().ok_or_else(|| {
            NucaError::Unsupported("global evaluation of sparse singular rules on an infinite universe".into())
        })?;
        let bg_word = vec![x.background(); self.memory().len()];
        let background = self.rules.background().apply(&bg_word);
        let reach = u.product_unchecked(&x.exceptions().support(), &u.inverse_set(&self.memory().as_set()));
        let out: Pattern = special
            .union(&reach)
            .iter()
            .map(|g| (g.clone(), self.cell_value(g, |h| x.get(h))))
            .collect();
        Configuration::new(u, background, out)
    }

    /// The induced local map `f^{+M}_{E, s|E}: A^{EM} -> A^E`.
    pub fn local_map(&self, e: &FiniteSubset) -> Result<BlockMap> {
        induced_local_map(self.universe(), e, &self.rules.restrict(e))
    }

    /// `γ_{g,N} ∘ f^{+M}_{gN, s|gN} ∘ γ_{g,NM}^-1: A^{NM} -> A^N`: the local map
    /// of the window `gN` read in coordinates centred at `g`.
    pub fn conjugated_local_map(&self, g: &Element, n: &FiniteSubset) -> Result<BlockMap> {
        let u = self.universe();
        u.check(g)?;
        let m = self.memory();
        let domain = u.product_unchecked(n, &m.as_set()).to_vec();
        let position: BTreeMap<&Element, usize> = domain.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let taps = n
            .iter()
            .map(|c| {
                let rule = self.rule_at(&u.op(g, c));
                let inputs = m.cells().iter().map(|mm| position[&u.op(c, mm)]).collect();
                Tap::Rule { table: rule.shared_table(), inputs }
            })
            .collect();
        BlockMap::from_taps(self.alphabet_size(), domain, n.to_vec(), taps)
    }
}

impl fmt::Display for Nuca {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nuca on {} q={} memory={}", self.universe(), self.alphabet_size(), self.memory())
    }
}

fn same_setting(a: &Nuca, b: &Nuca) -> Result<()> {
    if a.universe() != b.universe() {
        return Err(NucaError::Mismatch(format!("universes {} and {}", a.universe(), b.universe())));
    }
    if a.alphabet_size() != b.alphabet_size() {
        return Err(NucaError::Mismatch(format!(
            "alphabet sizes {} and {}",
            a.alphabet_size(),
            b.alphabet_size()
        )));
    }
    Ok(())
}

/// `σ_s ∘ σ_d` as a single automaton with memory `MN`.
///
/// `q(g)(v) = s(g)(y)` where `y(m) = d(gm)((m^-1 v)|_N)`.
pub fn compose(outer: &Nuca, inner: &Nuca, budget: Budget) -> Result<Nuca> {
    same_setting(outer, inner)?;
    let u = outer.universe();
    let (m, n) = (outer.memory(), inner.memory());
    let mn = m.product(u, n);
    let q = outer.alphabet_size();
    budget.words(q, mn.len())?;
    let position: BTreeMap<&Element, usize> = mn.cells().iter().enumerate().map(|(i, c)| (c, i)).collect();
    // inputs[i][j]: position of m_i n_j in MN
    let inputs: Vec<Vec<usize>> = m
        .cells()
        .iter()
        .map(|mi| n.cells().iter().map(|nj| position[&u.op(mi, nj)]).collect())
        .collect();
    let cell_rule = |g: &Element| -> Result<LocalRule> {
        let s = outer.rule_at(g);
        let ds: Vec<&LocalRule> = m.cells().iter().map(|mi| inner.rule_at(&u.op(g, mi))).collect();
        let mut y = vec![0 as Letter; m.len()];
        let mut buf = vec![0 as Letter; n.len()];
        LocalRule::from_fn(q, mn.clone(), |v| {
            for (i, d) in ds.iter().enumerate() {
                for (slot, &p) in buf.iter_mut().zip(&inputs[i]) {
                    *slot = v[p];
                }
                y[i] = d.apply(&buf);
            }
            s.apply(&y)
        })
    };
    let unsupported = || NucaError::Unsupported("closed-form composition with sparse singular rules".into());
    let cells = if u.is_finite() {
        u.enumerate_all()?
    } else {
        let xs = outer.exception_support().ok_or_else(unsupported)?;
        let xd = inner.exception_support().ok_or_else(unsupported)?;
        xs.union(&u.product_unchecked(&xd, &u.inverse_set(&m.as_set())))
    };
    let exceptions = cells
        .iter()
        .map(|g| Ok((g.clone(), cell_rule(g)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    // a cell whose neighbourhood meets no exception of either factor
    let background = cell_rule(&far_cell(u, &cells))?;
    let rules = if u.is_finite() {
        // every cell is listed, so pick the most common rule as background
        let bg = majority(&exceptions).unwrap_or(background);
        RuleConfiguration::asymptotically_constant(u, bg, exceptions)?
    } else {
        RuleConfiguration::asymptotically_constant(u, background, exceptions)?
    };
    Nuca::new(rules)
}

fn majority(rules: &BTreeMap<Element, LocalRule>) -> Option<LocalRule> {
    let mut counts: Vec<(&LocalRule, usize)> = Vec::new();
    for r in rules.values() {
        match counts.iter_mut().find(|(c, _)| *c == r) {
            Some((_, k)) => *k += 1,
            None => counts.push((r, 1)),
        }
    }
    // ties go to the rule met first in cell order
    let best = counts.iter().map(|&(_, k)| k).max()?;
    counts.into_iter().find(|&(_, k)| k == best).map(|(r, _)| r.clone())
}

/// A cell outside `avoid` on an infinite universe (the identity on finite ones
/// when it is not avoided). Used to read off background behaviour.
fn far_cell(u: &GroupUniverse, avoid: &FiniteSubset) -> Element {
    far_cells(u, avoid, 1).into_iter().next().unwrap_or_else(|| u.identity())
}

/// `k` distinct cells at norm greater than every cell of `avoid`, along the
/// first free axis. Empty on finite universes.
pub(crate) fn far_cells(u: &GroupUniverse, avoid: &FiniteSubset, k: usize) -> Vec<Element> {
    if u.is_finite() {
        return Vec::new();
    }
    let r = u.radius_of(avoid) as i64 + 1;
    (0..k as i64)
        .map(|i| {
            let mut c = vec![0; u.dim()];
            c[0] = r + i;
            u.element(c).expect("free coordinate")
        })
        .collect()
}

/// Outcome of [`identity_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdentityVerdict {
    Holds,
    /// The per-cell equation fails at `cell`. `witness` is a pattern on `NM`
    /// (coordinates centred at `cell`) whose composite image is not `u(1_G)`.
    Counterexample { cell: Element, background_class: bool, witness: Pattern },
}

impl IdentityVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityVerdict::Holds)
    }
}

/// Cells at which the per-cell identity equation has to be checked.
///
/// Finite universes: every cell. Infinite: `X_t ∪ X_s N^-1` and three
/// background representatives further out.
pub fn identity_check_cells(t: &Nuca, s: &Nuca) -> Result<Vec<(Element, bool)>> {
    let u = s.universe();
    if u.is_finite() {
        return Ok(u.enumerate_all()?.into_iter().map(|g| (g, false)).collect());
    }
    let unsupported = || NucaError::Unsupported("identity check with sparse singular rules".into());
    let xt = t.exception_support().ok_or_else(unsupported)?;
    let xs = s.exception_support().ok_or_else(unsupported)?;
    let special = xt.union(&u.product_unchecked(&xs, &u.inverse_set(&t.memory().as_set())));
    let background = far_cells(u, &special, 3);
    Ok(special.into_iter().map(|g| (g, false)).chain(background.into_iter().map(|g| (g, true))).collect())
}

/// Decides `σ_t ∘ σ_s = Id` cell by cell: at each cell `g` the composite
/// `t(g) ∘ γ_{g,N} ∘ f^{+M}_{gN, s|gN} ∘ γ^-1_{g,NM}` must equal the
/// projection `A^{NM} -> A`.
pub fn identity_check(t: &Nuca, s: &Nuca, budget: Budget) -> Result<IdentityVerdict> {
    same_setting(t, s)?;
    let cells = identity_check_cells(t, s)?;
    identity_check_on(t, s, &cells, budget)
}

/// The per-cell equation of [`identity_check`] on the listed cells only. The
/// flag marks background representatives in reported counterexamples.
pub fn identity_check_on(t: &Nuca, s: &Nuca, cells: &[(Element, bool)], budget: Budget) -> Result<IdentityVerdict> {
    same_setting(t, s)?;
    let u = s.universe();
    let n = t.memory().as_set();
    let nm = u.product_unchecked(&n, &s.memory().as_set());
    budget.words(s.alphabet_size(), nm.len())?;
    let failures: Vec<Option<IdentityVerdict>> = cells
        .par_iter()
        .map(|(g, background_class)| {
            cell_identity_failure(t, s, g, &n).map(|w| {
                w.map(|witness| IdentityVerdict::Counterexample {
                    cell: g.clone(),
                    background_class: *background_class,
                    witness,
                })
            })
        })
        .collect::<Result<_>>()?;
    Ok(failures.into_iter().flatten().next().unwrap_or(IdentityVerdict::Holds))
}

/// First `u ∈ A^{NM}` (in index order) violating the per-cell equation at `g`.
fn cell_identity_failure(t: &Nuca, s: &Nuca, g: &Element, n: &FiniteSubset) -> Result<Option<Pattern>> {
    let u = s.universe();
    let local = s.conjugated_local_map(g, n)?;
    let tg = t.rule_at(g);
    let at_identity = local.domain().iter().position(|c| *c == u.identity()).expect("1 ∈ NM");
    // t's memory order vs. the sorted codomain of the local map
    let order: Vec<usize> = tg
        .memory()
        .cells()
        .iter()
        .map(|c| local.codomain().iter().position(|d| d == c).expect("N is t's memory"))
        .collect();
    let q = s.alphabet_size();
    let mut out = vec![0 as Letter; local.codomain().len()];
    let mut v = vec![0 as Letter; order.len()];
    let mut failure = None;
    let count = word_count(q, local.domain().len()).unwrap_or(u64::MAX);
    let mut word = vec![0 as Letter; local.domain().len()];
    for i in 0..count {
        index_to_word(i, q, &mut word);
        local.apply_word(&word, &mut out);
        for (slot, &p) in v.iter_mut().zip(&order) {
            *slot = out[p];
        }
        if tg.apply(&v) != word[at_identity] {
            failure = Some(Pattern::from_word(local.domain(), &word));
            break;
        }
    }
    Ok(failure)
}

/// Asynchronous run `F_{k-1} ∘ ... ∘ F_0 (x0)` where `F_i` applies `mu` on the
/// cells of `schedule[i]` and leaves every other cell unchanged. The schedule
/// is repeated cyclically when `steps` exceeds its length; an empty schedule
/// returns `x0`.
pub fn async_run(
    mu: &LocalRule,
    universe: &GroupUniverse,
    schedule: &[FiniteSubset],
    x0: &Configuration,
    steps: usize,
) -> Result<Configuration> {
    let memory = mu.memory().with_identity(universe);
    let mu = mu.enlarge(&memory)?;
    let pi = LocalRule::projection(mu.alphabet_size(), memory, universe)?;
    let mut x = x0.clone();
    if schedule.is_empty() {
        return Ok(x);
    }
    for i in 0..steps {
        let step = step_automaton(universe, &pi, &mu, &schedule[i % schedule.len()])?;
        x = step.evaluate(&x)?;
    }
    Ok(x)
}

/// `F_i`: `mu` on `cells`, `π` elsewhere.
pub fn step_automaton(universe: &GroupUniverse, pi: &LocalRule, mu: &LocalRule, cells: &FiniteSubset) -> Result<Nuca> {
    let exceptions = cells.iter().map(|g| (g.clone(), mu.clone())).collect();
    Nuca::new(RuleConfiguration::asymptotically_constant(universe, pi.clone(), exceptions)?)
}

/// Brute-force `σ_t(σ_s(x)) = x` over all configurations of a finite universe.
pub fn brute_force_identity(t: &Nuca, s: &Nuca, budget: Budget) -> Result<Option<Configuration>> {
    same_setting(t, s)?;
    let u = s.universe();
    let order = u.order().ok_or_else(|| NucaError::InfiniteUniverse(u.to_string()))? as usize;
    budget.words(s.alphabet_size(), order)?;
    let mut found = None;
    let mut err = None;
    for_each_word(s.alphabet_size(), order, |w| {
        if found.is_some() || err.is_some() {
            return;
        }
        let step = || -> Result<Option<Configuration>> {
            let x = Configuration::from_dense(u, w)?;
            let back = t.evaluate(&s.evaluate(&x)?)?;
            Ok((back != x).then_some(x))
        };
        match step() {
            Ok(r) => found = r,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

/// Short name of the layout class, as printed in reports.
pub fn layout_name(s: &RuleConfiguration) -> &'static str {
    match s.layout() {
        RuleLayout::Constant(_) => "constant",
        RuleLayout::AsymptoticallyConstant { .. } => "asymptotically-constant",
        RuleLayout::SparseSingular { .. } => "sparse-singular",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupUniverse {
        GroupUniverse::integers()
    }

    fn el(u: &GroupUniverse, c: i64) -> Element {
        u.element([c]).unwrap()
    }

    fn m01(u: &GroupUniverse) -> Memory {
        Memory::new(u, vec![el(u, 0), el(u, 1)]).unwrap()
    }

    fn xor(u: &GroupUniverse) -> LocalRule {
        LocalRule::from_fn(2, m01(u), |v| v[0] ^ v[1]).unwrap()
    }

    fn perturbed_xor(u: &GroupUniverse) -> Nuca {
        let pi = LocalRule::projection(2, m01(u), u).unwrap();
        let rules = RuleConfiguration::asymptotically_constant(u, pi, [(u.identity(), xor(u))].into()).unwrap();
        Nuca::new(rules).unwrap()
    }

    #[test]
    fn window_xor_by_hand() {
        let u = z();
        let n = Nuca::uniform(&u, xor(&u)).unwrap();
        let x = Pattern::from_word(&[el(&u, 0), el(&u, 1), el(&u, 2)], &[1, 1, 0]);
        let e: FiniteSubset = [el(&u, 0), el(&u, 1)].into_iter().collect();
        let y = n.evaluate_window(&x, &e).unwrap();
        assert_eq!(y.word(&e.to_vec()).unwrap(), vec![0, 1]);
        let short = Pattern::from_word(&[el(&u, 0), el(&u, 1)], &[1, 1]);
        match n.evaluate_window(&short, &e) {
            Err(NucaError::MissingCells(m)) => assert_eq!(m, vec![el(&u, 2)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_exception_evaluation() {
        let u = z();
        let n = perturbed_xor(&u);
        let x = Configuration::new(&u, 0, [(el(&u, 1), 1)].into_iter().collect()).unwrap();
        let y = n.evaluate(&x).unwrap();
        assert_eq!(y.background(), 0);
        assert_eq!(y.exceptions().support(), [el(&u, 0), el(&u, 1)].into_iter().collect());
    }

    #[test]
    fn identity_check_examples() {
        let u = z();
        let n = perturbed_xor(&u);
        assert!(identity_check(&n, &n, Budget::default()).unwrap().holds());
        let xor_ca = Nuca::uniform(&u, xor(&u)).unwrap();
        let pi = Nuca::identity(&u, 2, &Memory::new(&u, vec![el(&u, 0)]).unwrap()).unwrap();
        match identity_check(&pi, &xor_ca, Budget::default()).unwrap() {
            IdentityVerdict::Counterexample { background_class, witness, .. } => {
                assert!(background_class);
                assert_eq!(witness.get(&el(&u, 0)), Some(0));
                assert_eq!(witness.get(&el(&u, 1)), Some(1));
            }
            IdentityVerdict::Holds => panic!("xor is not invertible"),
        }
    }

    #[test]
    fn shift_composition_on_z5() {
        let u = GroupUniverse::cyclic(5).unwrap();
        let shift = LocalRule::reader(2, m01(&u), &el(&u, 1)).unwrap();
        let s = Nuca::uniform(&u, shift).unwrap();
        let ss = compose(&s, &s, Budget::default()).unwrap();
        assert_eq!(ss.memory().len(), 3);
        for_each_word(2, 5, |w| {
            let x = Configuration::from_dense(&u, w).unwrap();
            let y = ss.evaluate(&x).unwrap().to_dense().unwrap();
            for g in 0..5 {
                assert_eq!(y[g], w[(g + 2) % 5]);
            }
        });
    }

    #[test]
    fn async_empty_and_full() {
        let u = GroupUniverse::cyclic(6).unwrap();
        let x0 = Configuration::from_dense(&u, &[1, 0, 0, 1, 1, 0]).unwrap();
        assert_eq!(async_run(&xor(&u), &u, &[], &x0, 3).unwrap(), x0);
        let all = u.enumerate_all().unwrap();
        let sync = Nuca::uniform(&u, xor(&u)).unwrap().evaluate(&x0).unwrap();
        assert_eq!(async_run(&xor(&u), &u, &[all], &x0, 1).unwrap(), sync);
    }
}
