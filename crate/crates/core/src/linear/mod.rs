//! Linear automata over vector alphabets `F_p^n` and their duals
//! `s*(g, m) = s(gm, m^-1)^T` on the memory `M^-1`.

mod matrix;

pub use matrix::FpMatrix;

use std::collections::BTreeMap;

use rand::Rng;

use crate::configuration::Letter;
use crate::engine::Nuca;
use crate::error::{NucaError, Result};
use crate::rules::{LocalRule, Memory, RuleConfiguration};
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::{for_each_word, Budget};

/// `F_p^n`; letters list the vectors lexicographically, first coordinate
/// most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LinearAlphabet {
    p: u32,
    n: usize,
}

impl LinearAlphabet {
    pub fn new(p: u32, n: usize) -> Result<Self> {
        if p < 2 || !(2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            return Err(NucaError::InvalidAlphabet(p as usize));
        }
        let size = (p as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if n == 0 || size > u8::MAX as u64 {
            return Err(NucaError::InvalidAlphabet(size as usize));
        }
        Ok(LinearAlphabet { p, n })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        (self.p as usize).pow(self.n as u32)
    }

    pub fn vector(&self, a: Letter) -> Vec<u32> {
        let mut v = vec![0; self.n];
        let mut x = a as u32;
        for slot in v.iter_mut().rev() {
            *slot = x % self.p;
            x /= self.p;
        }
        v
    }

    pub fn letter(&self, v: &[u32]) -> Letter {
        v.iter().fold(0u32, |acc, &c| acc * self.p + c % self.p) as Letter
    }
}

/// `v -> Σ_m s(m) v(m)`; memory cells without a matrix contribute zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearLocalRule {
    alphabet: LinearAlphabet,
    memory: Memory,
    /// Nonzero matrices only.
    matrices: BTreeMap<Element, FpMatrix>,
}

impl LinearLocalRule {
    pub fn new(alphabet: LinearAlphabet, memory: Memory, matrices: BTreeMap<Element, FpMatrix>) -> Result<Self> {
        for (m, a) in &matrices {
            if !memory.contains(m) {
                return Err(NucaError::MemoryNotContained(m.clone()));
            }
            if a.p() != alphabet.p || a.rows() != alphabet.n || a.cols() != alphabet.n {
                return Err(NucaError::Mismatch(format!("matrix at {m} is not {0}x{0} over F_{1}", alphabet.n, alphabet.p)));
            }
        }
        let matrices = matrices.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        Ok(LinearLocalRule { alphabet, memory, matrices })
    }

    /// The projection `v -> v(1_G)`.
    pub fn projection(alphabet: LinearAlphabet, memory: Memory, universe: &GroupUniverse) -> Result<Self> {
        if !memory.contains(&universe.identity()) {
            return Err(NucaError::IdentityNotInMemory);
        }
        let id = FpMatrix::identity(alphabet.p, alphabet.n);
        LinearLocalRule::new(alphabet, memory, [(universe.identity(), id)].into())
    }

    pub fn random<R: Rng + ?Sized>(alphabet: LinearAlphabet, memory: Memory, rng: &mut R) -> Result<Self> {
        let matrices = memory
            .cells()
            .iter()
            .map(|m| {
                let rows: Vec<Vec<i64>> = (0..alphabet.n)
                    .map(|_| (0..alphabet.n).map(|_| rng.gen_range(0..alphabet.p) as i64).collect())
                    .collect();
                Ok((m.clone(), FpMatrix::from_rows(alphabet.p, &rows)?))
            })
            .collect::<Result<_>>()?;
        LinearLocalRule::new(alphabet, memory, matrices)
    }

    pub fn alphabet(&self) -> LinearAlphabet {
        self.alphabet
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    pub fn matrices(&self) -> &BTreeMap<Element, FpMatrix> {
        &self.matrices
    }

    pub fn matrix(&self, m: &Element) -> FpMatrix {
        self.matrices
            .get(m)
            .cloned()
            .unwrap_or_else(|| FpMatrix::zeros(self.alphabet.p, self.alphabet.n, self.alphabet.n))
    }

    /// Applies the rule to letters listed in memory order.
    pub fn apply(&self, values: &[Letter]) -> Letter {
        let a = self.alphabet;
        let mut acc = vec![0u32; a.n];
        for (m, v) in self.memory.cells().iter().zip(values) {
            if let Some(mat) = self.matrices.get(m) {
                for (slot, x) in acc.iter_mut().zip(mat.mul_vec(&a.vector(*v))) {
                    *slot = (*slot + x) % a.p;
                }
            }
        }
        a.letter(&acc)
    }

    /// The same function as a lookup table.
    pub fn to_table(&self, budget: Budget) -> Result<LocalRule> {
        let q = self.alphabet.size();
        budget.words(q, self.memory.len())?;
        LocalRule::from_fn(q, self.memory.clone(), |v| self.apply(v))
    }

    /// Recovers matrices from a table rule, or `None` when the rule is not
    /// linear. Column `j` of `s(m)` is the image of the basis vector `e_j`
    /// placed at `m`; the guess is then checked on every input.
    pub fn from_table(rule: &LocalRule, alphabet: LinearAlphabet) -> Result<Option<Self>> {
        if rule.alphabet_size() != alphabet.size() {
            return Err(NucaError::Mismatch("table alphabet is not p^n".into()));
        }
        let memory = rule.memory().clone();
        let mut matrices = BTreeMap::new();
        for (i, m) in memory.cells().iter().enumerate() {
            let mut mat = FpMatrix::zeros(alphabet.p, alphabet.n, alphabet.n);
            for j in 0..alphabet.n {
                let mut e = vec![0u32; alphabet.n];
                e[j] = 1;
                let mut input = vec![0 as Letter; memory.len()];
                input[i] = alphabet.letter(&e);
                let col = alphabet.vector(rule.apply(&input));
                for (r, &c) in col.iter().enumerate() {
                    mat.set(r, j, c);
                }
            }
            matrices.insert(m.clone(), mat);
        }
        let candidate = LinearLocalRule::new(alphabet, memory.clone(), matrices)?;
        let mut linear = true;
        for_each_word(alphabet.size(), memory.len(), |v| linear &= candidate.apply(v) == rule.apply(v));
        Ok(linear.then_some(candidate))
    }

    /// `m -> s(m^-1)^T` on the memory `M^-1` (listed in the same order).
    fn dual_background(&self, universe: &GroupUniverse) -> LinearLocalRule {
        let matrices = self.matrices.iter().map(|(m, a)| (universe.inv(m), a.transpose())).collect();
        LinearLocalRule { alphabet: self.alphabet, memory: self.memory.inverse(universe), matrices }
    }
}

/// Linear counterpart of [`crate::rules::RuleLayout`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearLayout {
    Constant(LinearLocalRule),
    AsymptoticallyConstant { background: LinearLocalRule, exceptions: BTreeMap<Element, LinearLocalRule> },
    SparseSingular {
        background: LinearLocalRule,
        base: i64,
        singular: LinearLocalRule,
        extra: BTreeMap<Element, LinearLocalRule>,
    },
}

/// A configuration of linear local rules sharing one memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRuleConfiguration {
    universe: GroupUniverse,
    layout: LinearLayout,
}

impl LinearRuleConfiguration {
    pub fn constant(universe: &GroupUniverse, rule: LinearLocalRule) -> Result<Self> {
        for c in rule.memory().cells() {
            universe.check(c)?;
        }
        Ok(LinearRuleConfiguration { universe: universe.clone(), layout: LinearLayout::Constant(rule) })
    }

    /// Exceptions equal to the background are dropped.
    pub fn asymptotically_constant(
        universe: &GroupUniverse,
        background: LinearLocalRule,
        exceptions: BTreeMap<Element, LinearLocalRule>,
    ) -> Result<Self> {
        for c in background.memory().cells() {
            universe.check(c)?;
        }
        for (g, r) in &exceptions {
            universe.check(g)?;
            if r.memory() != background.memory() || r.alphabet() != background.alphabet() {
                return Err(NucaError::Mismatch(format!("linear rule at {g} has another memory or alphabet")));
            }
        }
        let exceptions: BTreeMap<_, _> = exceptions.into_iter().filter(|(_, r)| *r != background).collect();
        let layout = if exceptions.is_empty() {
            LinearLayout::Constant(background)
        } else {
            LinearLayout::AsymptoticallyConstant { background, exceptions }
        };
        Ok(LinearRuleConfiguration { universe: universe.clone(), layout })
    }

    pub fn sparse_singular(
        universe: &GroupUniverse,
        background: LinearLocalRule,
        base: i64,
        singular: LinearLocalRule,
        extra: BTreeMap<Element, LinearLocalRule>,
    ) -> Result<Self> {
        if universe.free_rank() != 1 || !universe.moduli().is_empty() || base < 2 {
            return Err(NucaError::Unsupported("sparse singular configurations need Z and base >= 2".into()));
        }
        if singular.memory() != background.memory() {
            return Err(NucaError::Mismatch("singular rule has another memory".into()));
        }
        Ok(LinearRuleConfiguration {
            universe: universe.clone(),
            layout: LinearLayout::SparseSingular { background, base, singular, extra },
        })
    }

    pub fn universe(&self) -> &GroupUniverse {
        &self.universe
    }

    pub fn layout(&self) -> &LinearLayout {
        &self.layout
    }

    pub fn background(&self) -> &LinearLocalRule {
        match &self.layout {
            LinearLayout::Constant(r) => r,
            LinearLayout::AsymptoticallyConstant { background, .. } | LinearLayout::SparseSingular { background, .. } => {
                background
            }
        }
    }

    pub fn alphabet(&self) -> LinearAlphabet {
        self.background().alphabet()
    }

    pub fn memory(&self) -> &Memory {
        self.background().memory()
    }

    pub fn rule_at(&self, g: &Element) -> &LinearLocalRule {
        match &self.layout {
            LinearLayout::Constant(r) => r,
            LinearLayout::AsymptoticallyConstant { background, exceptions } => exceptions.get(g).unwrap_or(background),
            LinearLayout::SparseSingular { background, base, singular, extra } => match extra.get(g) {
                Some(r) => r,
                None if crate::rules::is_sparse_site(*base, g) => singular,
                None => background,
            },
        }
    }

    /// `s(g, m)`.
    pub fn matrix_at(&self, g: &Element, m: &Element) -> FpMatrix {
        self.rule_at(g).matrix(m)
    }

    pub fn exception_support(&self) -> Option<FiniteSubset> {
        match &self.layout {
            LinearLayout::Constant(_) => Some(FiniteSubset::new()),
            LinearLayout::AsymptoticallyConstant { exceptions, .. } => Some(exceptions.keys().cloned().collect()),
            LinearLayout::SparseSingular { .. } => None,
        }
    }

    /// Table form, usable with every general operation.
    pub fn to_rule_configuration(&self, budget: Budget) -> Result<RuleConfiguration> {
        let u = &self.universe;
        match &self.layout {
            LinearLayout::Constant(r) => RuleConfiguration::constant(u, r.to_table(budget)?),
            LinearLayout::AsymptoticallyConstant { background, exceptions } => {
                let ex = exceptions.iter().map(|(g, r)| Ok((g.clone(), r.to_table(budget)?))).collect::<Result<_>>()?;
                RuleConfiguration::asymptotically_constant(u, background.to_table(budget)?, ex)
            }
            LinearLayout::SparseSingular { background, base, singular, extra } => {
                let ex = extra.iter().map(|(g, r)| Ok((g.clone(), r.to_table(budget)?))).collect::<Result<_>>()?;
                RuleConfiguration::sparse_singular(u, background.to_table(budget)?, *base, singular.to_table(budget)?, ex)
            }
        }
    }

    pub fn to_nuca(&self, budget: Budget) -> Result<Nuca> {
        Nuca::new(self.to_rule_configuration(budget)?)
    }
}

/// The dual configuration `s*(g, m) = s(gm, m^-1)^T` on the memory `M^-1`.
///
/// `s*(g)` can only differ from the dual background when `gm` is an
/// exception for some `m ∈ M^-1`, i.e. on `X M`.
pub fn dual(s: &LinearRuleConfiguration) -> Result<LinearRuleConfiguration> {
    let u = s.universe();
    let background = s.background().dual_background(u);
    let x = s
        .exception_support()
        .ok_or_else(|| NucaError::Unsupported("dual of a sparse singular configuration".into()))?;
    if x.is_empty() && !u.is_finite() || matches!(s.layout(), LinearLayout::Constant(_)) {
        return LinearRuleConfiguration::constant(u, background);
    }
    let cells = if u.is_finite() { u.enumerate_all()? } else { u.product_unchecked(&x, &s.memory().as_set()) };
    let dual_memory = s.memory().inverse(u);
    let mut exceptions = BTreeMap::new();
    for g in &cells {
        let matrices = dual_memory
            .cells()
            .iter()
            .map(|m| (m.clone(), s.matrix_at(&u.op(g, m), &u.inv(m)).transpose()))
            .collect();
        exceptions.insert(g.clone(), LinearLocalRule::new(s.alphabet(), dual_memory.clone(), matrices)?);
    }
    LinearRuleConfiguration::asymptotically_constant(u, background, exceptions)
}

/// A place where `s**` and `s` disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualMismatch {
    pub cell: Element,
    pub memory_cell: Element,
    pub expected: FpMatrix,
    pub found: FpMatrix,
}

/// Compares `s**` with `s` cell by cell: every cell on finite universes,
/// otherwise the exceptions of both and one far cell.
pub fn double_dual_check(s: &LinearRuleConfiguration) -> Result<Option<DualMismatch>> {
    let u = s.universe();
    let ss = dual(&dual(s)?)?;
    if ss.memory() != s.memory() {
        let cell = u.identity();
        let m = s.memory().cells().first().cloned().unwrap_or_else(|| u.identity());
        return Ok(Some(DualMismatch {
            memory_cell: m.clone(),
            expected: s.matrix_at(&cell, &m),
            found: ss.matrix_at(&cell, &m),
            cell,
        }));
    }
    let cells = if u.is_finite() {
        u.enumerate_all()?
    } else {
        let special = s.exception_support().unwrap_or_default().union(&ss.exception_support().unwrap_or_default());
        let mut cells = special.clone();
        for g in crate::engine::far_cells(u, &special, 1) {
            cells.insert(g);
        }
        cells
    };
    for g in &cells {
        for m in s.memory().cells() {
            let (a, b) = (s.matrix_at(g, m), ss.matrix_at(g, m));
            if a != b {
                return Ok(Some(DualMismatch { cell: g.clone(), memory_cell: m.clone(), expected: a, found: b }));
            }
        }
    }
    Ok(None)
}

/// The `n|G| x n|G|` matrix of `σ_s` on a finite universe: block `(g, h)`
/// is `s(g, g^-1 h)`, zero when `g^-1 h ∉ M`. Cells follow canonical order.
pub fn global_matrix(s: &LinearRuleConfiguration, budget: Budget) -> Result<FpMatrix> {
    let u = s.universe();
    let cells = u.enumerate_all()?.to_vec();
    let a = s.alphabet();
    let size = a.dim() * cells.len();
    if size as u64 > budget.0 {
        return Err(NucaError::BudgetExceeded { needed: size.to_string(), budget: budget.0 });
    }
    let index: BTreeMap<&Element, usize> = cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut out = FpMatrix::zeros(a.p(), size, size);
    for (gi, g) in cells.iter().enumerate() {
        let rule = s.rule_at(g);
        for m in rule.memory().cells() {
            let hi = index[&u.op(g, m)];
            let block = rule.matrix(m);
            for r in 0..a.dim() {
                for c in 0..a.dim() {
                    let cur = out.get(gi * a.dim() + r, hi * a.dim() + c);
                    out.set(gi * a.dim() + r, hi * a.dim() + c, cur + block.get(r, c));
                }
            }
        }
    }
    Ok(out)
}

/// Concatenated coordinate vectors of a dense configuration.
pub fn vectorize(alphabet: LinearAlphabet, letters: &[Letter]) -> Vec<u32> {
    letters.iter().flat_map(|&x| alphabet.vector(x)).collect()
}

/// Random configuration: `exceptions` random cells from `cells` get random
/// rules, the background is random too.
pub fn random_configuration<R: Rng + ?Sized>(
    universe: &GroupUniverse,
    alphabet: LinearAlphabet,
    memory: &Memory,
    cells: &FiniteSubset,
    exceptions: usize,
    rng: &mut R,
) -> Result<LinearRuleConfiguration> {
    let background = LinearLocalRule::random(alphabet, memory.clone(), rng)?;
    let pool = cells.to_vec();
    let mut ex = BTreeMap::new();
    for _ in 0..exceptions.min(pool.len()) {
        let g = pool[rng.gen_range(0..pool.len())].clone();
        ex.insert(g, LinearLocalRule::random(alphabet, memory.clone(), rng)?);
    }
    LinearRuleConfiguration::asymptotically_constant(universe, background, ex)
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

    fn xor(u: &GroupUniverse) -> LinearLocalRule {
        let a = LinearAlphabet::new(2, 1).unwrap();
        let m = Memory::new(u, vec![el(u, 0), el(u, 1)]).unwrap();
        let one = FpMatrix::identity(2, 1);
        LinearLocalRule::new(a, m, [(el(u, 0), one.clone()), (el(u, 1), one)].into()).unwrap()
    }

    #[test]
    fn xor_table_and_dual() {
        let u = z();
        let r = xor(&u);
        assert_eq!(r.to_table(Budget::default()).unwrap().table(), &[0, 1, 1, 0]);
        let s = LinearRuleConfiguration::constant(&u, r).unwrap();
        let d = dual(&s).unwrap();
        assert_eq!(d.memory().cells(), &[el(&u, 0), el(&u, -1)]);
        assert!(matches!(d.layout(), LinearLayout::Constant(_)));
        assert_eq!(double_dual_check(&s).unwrap(), None);
    }

    #[test]
    fn zero_rule_is_constant_zero() {
        let u = z();
        let a = LinearAlphabet::new(3, 1).unwrap();
        let r = LinearLocalRule::new(a, Memory::ball(&u, 1), BTreeMap::new()).unwrap();
        assert!(r.to_table(Budget::default()).unwrap().table().iter().all(|&x| x == 0));
    }

    #[test]
    fn detector_recovers_matrices() {
        let u = z();
        let r = xor(&u);
        let t = r.to_table(Budget::default()).unwrap();
        assert_eq!(LinearLocalRule::from_table(&t, r.alphabet()).unwrap(), Some(r));
        let and = LocalRule::from_fn(2, t.memory().clone(), |v| v[0] & v[1]).unwrap();
        assert_eq!(LinearLocalRule::from_table(&and, LinearAlphabet::new(2, 1).unwrap()).unwrap(), None);
    }

    #[test]
    fn alphabet_validation() {
        assert!(LinearAlphabet::new(4, 1).is_err());
        assert!(LinearAlphabet::new(2, 8).is_err());
        let a = LinearAlphabet::new(3, 2).unwrap();
        assert_eq!(a.vector(5), vec![1, 2]);
        assert_eq!(a.letter(&[1, 2]), 5);
    }

    #[test]
    fn shift_global_matrix_is_a_permutation() {
        let u = GroupUniverse::cyclic(3).unwrap();
        let a = LinearAlphabet::new(2, 1).unwrap();
        let m = Memory::new(&u, vec![el(&u, 0), el(&u, 1)]).unwrap();
        let r = LinearLocalRule::new(a, m, [(el(&u, 1), FpMatrix::identity(2, 1))].into()).unwrap();
        let s = LinearRuleConfiguration::constant(&u, r).unwrap();
        let g = global_matrix(&s, Budget::default()).unwrap();
        assert!(g.is_invertible());
        for i in 0..3 {
            assert_eq!((0..3).map(|j| g.get(i, j)).sum::<u32>(), 1);
        }
    }
}
