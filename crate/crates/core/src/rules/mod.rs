//! Local rules, memories and configurations of local rules `s ∈ S^G`.
//!
//! A [`LocalRule`] is a lookup table `A^M -> A`. Table entries are indexed by
//! patterns on the memory read in the memory's declared cell order, first
//! cell most significant, letter 0 lowest. The bit layout is part of the
//! spec-file format and must not change.

mod block;

pub use block::{induced_local_map, BlockInverse, BlockMap, Tap};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::configuration::Letter;
use crate::error::{NucaError, Result};
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::{for_each_word, word_count, word_index};

/// Largest rule table built in one go.
const MAX_RULE_TABLE: u64 = 1 << 24;

/// Ordered, duplicate-free list of cells read by a local rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Memory {
    cells: Vec<Element>,
}

impl Memory {
    pub fn new(universe: &GroupUniverse, cells: Vec<Element>) -> Result<Self> {
        let mut seen = FiniteSubset::new();
        for c in &cells {
            universe.check(c)?;
            if !seen.insert(c.clone()) {
                return Err(NucaError::DuplicateMemoryCell(c.clone()));
            }
        }
        Ok(Memory { cells })
    }

    /// Memory listing a set in canonical order.
    pub fn from_set(set: &FiniteSubset) -> Self {
        Memory { cells: set.to_vec() }
    }

    pub fn ball(universe: &GroupUniverse, radius: usize) -> Self {
        Memory::from_set(&universe.ball(radius))
    }

    pub fn cells(&self) -> &[Element] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn as_set(&self) -> FiniteSubset {
        self.cells.iter().cloned().collect()
    }

    pub fn position(&self, g: &Element) -> Option<usize> {
        self.cells.iter().position(|c| c == g)
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.position(g).is_some()
    }

    /// Same memory with the identity adjoined (in canonical order) when absent.
    pub fn with_identity(&self, universe: &GroupUniverse) -> Memory {
        if self.contains(&universe.identity()) {
            self.clone()
        } else {
            let mut set = self.as_set();
            set.insert(universe.identity());
            Memory::from_set(&set)
        }
    }

    /// `M^-1`, cell by cell in the same order.
    pub fn inverse(&self, universe: &GroupUniverse) -> Memory {
        Memory { cells: self.cells.iter().map(|m| universe.inv(m)).collect() }
    }

    /// `MN` in canonical order.
    pub fn product(&self, universe: &GroupUniverse, other: &Memory) -> Memory {
        Memory::from_set(&universe.product_unchecked(&self.as_set(), &other.as_set()))
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A local transition map `A^M -> A` stored as a lookup table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalRule {
    q: u8,
    memory: Memory,
    table: Arc<[Letter]>,
}

impl LocalRule {
    pub fn new(alphabet_size: usize, memory: Memory, table: Vec<Letter>) -> Result<Self> {
        if alphabet_size == 0 || alphabet_size > u8::MAX as usize {
            return Err(NucaError::InvalidAlphabet(alphabet_size));
        }
        let expected = word_count(alphabet_size, memory.len())
            .filter(|&n| n <= MAX_RULE_TABLE)
            .ok_or_else(|| NucaError::BudgetExceeded {
                needed: format!("{alphabet_size}^{}", memory.len()),
                budget: MAX_RULE_TABLE,
            })? as usize;
        if table.len() != expected {
            return Err(NucaError::TableLength { got: table.len(), expected });
        }
        if let Some(&bad) = table.iter().find(|&&a| a as usize >= alphabet_size) {
            return Err(NucaError::LetterOutOfRange { letter: bad as u32, size: alphabet_size as u32 });
        }
        Ok(LocalRule { q: alphabet_size as u8, memory, table: table.into() })
    }

    /// Tabulates `f`, which receives the memory pattern in memory order.
    pub fn from_fn(alphabet_size: usize, memory: Memory, mut f: impl FnMut(&[Letter]) -> Letter) -> Result<Self> {
        let n = word_count(alphabet_size, memory.len()).unwrap_or(u64::MAX);
        if n > MAX_RULE_TABLE {
            return Err(NucaError::BudgetExceeded {
                needed: format!("{alphabet_size}^{}", memory.len()),
                budget: MAX_RULE_TABLE,
            });
        }
        let mut table = Vec::with_capacity(n as usize);
        for_each_word(alphabet_size, memory.len(), |w| table.push(f(w)));
        LocalRule::new(alphabet_size, memory, table)
    }

    /// The projection `v -> v(1_G)`.
    pub fn projection(alphabet_size: usize, memory: Memory, universe: &GroupUniverse) -> Result<Self> {
        let at = memory.position(&universe.identity()).ok_or(NucaError::IdentityNotInMemory)?;
        LocalRule::from_fn(alphabet_size, memory, |v| v[at])
    }

    /// The rule `v -> v(cell)`; `cell` must lie in the memory.
    pub fn reader(alphabet_size: usize, memory: Memory, cell: &Element) -> Result<Self> {
        let at = memory.position(cell).ok_or_else(|| NucaError::MemoryNotContained(cell.clone()))?;
        LocalRule::from_fn(alphabet_size, memory, |v| v[at])
    }

    pub fn constant(alphabet_size: usize, memory: Memory, letter: Letter) -> Result<Self> {
        LocalRule::from_fn(alphabet_size, memory, |_| letter)
    }

    /// Uniformly random table.
    pub fn random<R: Rng + ?Sized>(alphabet_size: usize, memory: Memory, rng: &mut R) -> Result<Self> {
        LocalRule::from_fn(alphabet_size, memory, |_| rng.gen_range(0..alphabet_size) as Letter)
    }

    pub fn alphabet_size(&self) -> usize {
        self.q as usize
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    pub fn table(&self) -> &[Letter] {
        &self.table
    }

    pub(crate) fn shared_table(&self) -> Arc<[Letter]> {
        self.table.clone()
    }

    /// Applies the rule to a memory pattern given in memory order.
    pub fn apply(&self, values: &[Letter]) -> Letter {
        self.table[word_index(values, self.q as usize) as usize]
    }

    /// Same function on a larger memory: `v -> self(v|_M)`.
    pub fn enlarge(&self, target: &Memory) -> Result<LocalRule> {
        if target == &self.memory {
            return Ok(self.clone());
        }
        let positions = self
            .memory
            .cells()
            .iter()
            .map(|c| target.position(c).ok_or_else(|| NucaError::MemoryNotContained(c.clone())))
            .collect::<Result<Vec<_>>>()?;
        let mut buf = vec![0; positions.len()];
        LocalRule::from_fn(self.alphabet_size(), target.clone(), |v| {
            for (slot, &p) in buf.iter_mut().zip(&positions) {
                *slot = v[p];
            }
            self.apply(&buf)
        })
    }

    /// Whether the rule computes `v -> v(1_G)`.
    pub fn is_projection(&self, universe: &GroupUniverse) -> bool {
        match self.memory.position(&universe.identity()) {
            Some(at) => {
                let mut ok = true;
                for_each_word(self.alphabet_size(), self.memory.len(), |w| ok &= self.apply(w) == w[at]);
                ok
            }
            None => false,
        }
    }

    /// Extensional equality, regardless of how the memories are listed.
    pub fn same_function(&self, other: &LocalRule) -> bool {
        if self.q != other.q {
            return false;
        }
        if self.memory == other.memory {
            return self.table == other.table;
        }
        let mut union = self.memory.as_set();
        for c in other.memory.cells() {
            union.insert(c.clone());
        }
        let m = Memory::from_set(&union);
        match (self.enlarge(&m), other.enlarge(&m)) {
            (Ok(a), Ok(b)) => a.table == b.table,
            _ => false,
        }
    }

    /// Table as a string of letters: `0-9` then `a-z`.
    pub fn table_string(&self) -> String {
        self.table.iter().map(|&a| letter_char(a)).collect()
    }
}

pub(crate) fn letter_char(a: Letter) -> char {
    std::char::from_digit(a as u32, 36).unwrap_or('?')
}

/// Which of the representable classes a rule configuration belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleLayout {
    /// A classical cellular automaton.
    Constant(LocalRule),
    /// Finitely many cells differ from the background rule.
    AsymptoticallyConstant { background: LocalRule, exceptions: BTreeMap<Element, LocalRule> },
    /// Over `Z` only: `singular` at the sites `±base^k`, `k >= 1`, `extra`
    /// overrides on finitely many cells, `background` elsewhere.
    SparseSingular {
        background: LocalRule,
        base: i64,
        singular: LocalRule,
        extra: BTreeMap<Element, LocalRule>,
    },
}

/// An assignment `s ∈ S^G` of local rules to cells, all sharing one memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleConfiguration {
    universe: GroupUniverse,
    layout: RuleLayout,
}

impl RuleConfiguration {
    pub fn constant(universe: &GroupUniverse, rule: LocalRule) -> Result<Self> {
        for c in rule.memory().cells() {
            universe.check(c)?;
        }
        Ok(RuleConfiguration { universe: universe.clone(), layout: RuleLayout::Constant(rule) })
    }

    /// Exceptions equal to the background are dropped; no exceptions yields `Constant`.
    pub fn asymptotically_constant(
        universe: &GroupUniverse,
        background: LocalRule,
        exceptions: BTreeMap<Element, LocalRule>,
    ) -> Result<Self> {
        for c in background.memory().cells() {
            universe.check(c)?;
        }
        for (g, r) in &exceptions {
            universe.check(g)?;
            same_shape(&background, r)?;
        }
        let exceptions: BTreeMap<_, _> = exceptions.into_iter().filter(|(_, r)| *r != background).collect();
        let layout = if exceptions.is_empty() {
            RuleLayout::Constant(background)
        } else {
            RuleLayout::AsymptoticallyConstant { background, exceptions }
        };
        Ok(RuleConfiguration { universe: universe.clone(), layout })
    }

    pub fn sparse_singular(
        universe: &GroupUniverse,
        background: LocalRule,
        base: i64,
        singular: LocalRule,
        extra: BTreeMap<Element, LocalRule>,
    ) -> Result<Self> {
        if universe.free_rank() != 1 || !universe.moduli().is_empty() {
            return Err(NucaError::Unsupported(format!("sparse singular configurations live on Z, not {universe}")));
        }
        if base < 2 {
            return Err(NucaError::Unsupported(format!("sparse base {base} must be at least 2")));
        }
        same_shape(&background, &singular)?;
        if singular == background {
            return RuleConfiguration::asymptotically_constant(universe, background, extra);
        }
        for c in background.memory().cells() {
            universe.check(c)?;
        }
        let mut kept = BTreeMap::new();
        for (g, r) in extra {
            universe.check(&g)?;
            same_shape(&background, &r)?;
            let default = if is_sparse_site(base, &g) { &singular } else { &background };
            if &r != default {
                kept.insert(g, r);
            }
        }
        Ok(RuleConfiguration {
            universe: universe.clone(),
            layout: RuleLayout::SparseSingular { background, base, singular, extra: kept },
        })
    }

    pub fn universe(&self) -> &GroupUniverse {
        &self.universe
    }

    pub fn layout(&self) -> &RuleLayout {
        &self.layout
    }

    pub fn background(&self) -> &LocalRule {
        match &self.layout {
            RuleLayout::Constant(r) => r,
            RuleLayout::AsymptoticallyConstant { background, .. } | RuleLayout::SparseSingular { background, .. } => {
                background
            }
        }
    }

    pub fn memory(&self) -> &Memory {
        self.background().memory()
    }

    pub fn alphabet_size(&self) -> usize {
        self.background().alphabet_size()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.layout, RuleLayout::SparseSingular { .. })
    }

    pub fn rule_at(&self, g: &Element) -> &LocalRule {
        match &self.layout {
            RuleLayout::Constant(r) => r,
            RuleLayout::AsymptoticallyConstant { background, exceptions } => exceptions.get(g).unwrap_or(background),
            RuleLayout::SparseSingular { background, base, singular, extra } => match extra.get(g) {
                Some(r) => r,
                None if is_sparse_site(*base, g) => singular,
                None => background,
            },
        }
    }

    /// Cells whose rule differs from the background; `None` when infinite.
    pub fn exception_support(&self) -> Option<FiniteSubset> {
        match &self.layout {
            RuleLayout::Constant(_) => Some(FiniteSubset::new()),
            RuleLayout::AsymptoticallyConstant { exceptions, .. } => Some(exceptions.keys().cloned().collect()),
            RuleLayout::SparseSingular { .. } => None,
        }
    }

    /// `s|_E`.
    pub fn restrict(&self, e: &FiniteSubset) -> BTreeMap<Element, LocalRule> {
        e.iter().map(|g| (g.clone(), self.rule_at(g).clone())).collect()
    }

    /// `(g s)(h) = s(g^-1 h)`.
    pub fn shift(&self, g: &Element) -> Result<RuleConfiguration> {
        self.universe.check(g)?;
        match &self.layout {
            RuleLayout::Constant(_) => Ok(self.clone()),
            RuleLayout::AsymptoticallyConstant { background, exceptions } => {
                let moved = exceptions.iter().map(|(h, r)| (self.universe.op(g, h), r.clone())).collect();
                RuleConfiguration::asymptotically_constant(&self.universe, background.clone(), moved)
            }
            RuleLayout::SparseSingular { .. } => {
                Err(NucaError::Unsupported("translates of sparse singular configurations".into()))
            }
        }
    }

    /// Applies `f` to every rule, keeping the layout.
    pub fn map_rules(&self, mut f: impl FnMut(&LocalRule) -> Result<LocalRule>) -> Result<RuleConfiguration> {
        match &self.layout {
            RuleLayout::Constant(r) => RuleConfiguration::constant(&self.universe, f(r)?),
            RuleLayout::AsymptoticallyConstant { background, exceptions } => {
                let ex = exceptions.iter().map(|(g, r)| Ok((g.clone(), f(r)?))).collect::<Result<_>>()?;
                RuleConfiguration::asymptotically_constant(&self.universe, f(background)?, ex)
            }
            RuleLayout::SparseSingular { background, base, singular, extra } => {
                let ex = extra.iter().map(|(g, r)| Ok((g.clone(), f(r)?))).collect::<Result<_>>()?;
                RuleConfiguration::sparse_singular(&self.universe, f(background)?, *base, f(singular)?, ex)
            }
        }
    }

    /// Every rule rewritten on the larger memory `target`.
    pub fn enlarge_memory(&self, target: &Memory) -> Result<RuleConfiguration> {
        for c in target.cells() {
            self.universe.check(c)?;
        }
        self.map_rules(|r| r.enlarge(target))
    }
}

fn same_shape(a: &LocalRule, b: &LocalRule) -> Result<()> {
    if a.alphabet_size() != b.alphabet_size() {
        return Err(NucaError::Mismatch(format!(
            "alphabet sizes {} and {}",
            a.alphabet_size(),
            b.alphabet_size()
        )));
    }
    if a.memory() != b.memory() {
        return Err(NucaError::Mismatch(format!("memories {} and {}", a.memory(), b.memory())));
    }
    Ok(())
}

/// Whether `g = ±base^k` for some `k >= 1`.
pub fn is_sparse_site(base: i64, g: &Element) -> bool {
    let Some(&c) = g.coords().first() else { return false };
    let mut n = c.unsigned_abs();
    let b = base as u64;
    if n < b {
        return false;
    }
    while n % b == 0 {
        n /= b;
    }
    n == 1
}

/// Outcome of the uniformly-bounded-singularity search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UbsWitness {
    /// `F ⊇ E` with `s` constant on `FE \ F`.
    Found(FiniteSubset),
    /// No ball up to this radius worked.
    Exhausted(usize),
}

/// Whether `s|_{FE \ F}` is constant.
pub fn ubs_predicate(s: &RuleConfiguration, f: &FiniteSubset, e: &FiniteSubset) -> bool {
    let u = s.universe();
    let band = u.product_unchecked(f, e).difference(f);
    let mut rules = band.iter().map(|g| s.rule_at(g));
    match rules.next() {
        Some(first) => rules.all(|r| r == first),
        None => true,
    }
}

/// Finds `F ⊇ E` (a ball, or `E` itself for constant configurations) such that
/// `s` is constant on `FE \ F`.
///
/// Asymptotically constant configurations take the smallest ball containing
/// `E` and `XE`, `X` the exception support. Sparse singular ones scan balls of
/// increasing radius, starting at the radius of `E`, up to `search_limit`.
pub fn verify_ubs(s: &RuleConfiguration, e: &FiniteSubset, search_limit: usize) -> Result<UbsWitness> {
    let u = s.universe();
    for g in e {
        u.check(g)?;
    }
    if !e.contains(&u.identity()) {
        return Err(NucaError::Precondition { cell: u.identity(), reason: "E must contain the identity".into() });
    }
    if u.inverse_set(e) != *e {
        let bad = e.iter().find(|g| !e.contains(&u.inv(g))).cloned().unwrap_or_else(|| u.identity());
        return Err(NucaError::Precondition { cell: bad, reason: "E must be symmetric".into() });
    }
    match s.layout() {
        RuleLayout::Constant(_) => Ok(UbsWitness::Found(e.clone())),
        RuleLayout::AsymptoticallyConstant { exceptions, .. } => {
            let x: FiniteSubset = exceptions.keys().cloned().collect();
            let xe = u.product_unchecked(&x, e);
            let radius = u.radius_of(e).max(u.radius_of(&xe)) as usize;
            let f = u.ball(radius);
            debug_assert!(ubs_predicate(s, &f, e));
            Ok(UbsWitness::Found(f))
        }
        RuleLayout::SparseSingular { .. } => {
            let start = u.radius_of(e) as usize;
            let delta = u.generators();
            let mut f = u.ball(start);
            for radius in start..=search_limit.max(start) {
                if radius > search_limit {
                    break;
                }
                if ubs_predicate(s, &f, e) {
                    return Ok(UbsWitness::Found(f));
                }
                f = u.product_unchecked(&f, &delta);
            }
            Ok(UbsWitness::Exhausted(search_limit))
        }
    }
}
