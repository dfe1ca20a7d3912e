//! Finite block maps `A^D -> A^C` between patterns on ordered cell lists.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::configuration::{Letter, Pattern};
use crate::error::{NucaError, Result};
use crate::rules::LocalRule;
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::{index_to_word, word_count, word_index, Budget};

/// How one output cell is computed from the input word.
#[derive(Clone, Debug)]
pub enum Tap {
    /// Copies the input letter at this position.
    Copy(usize),
    /// Applies a rule table to the input letters at these positions.
    Rule { table: Arc<[Letter]>, inputs: Vec<usize> },
}

#[derive(Clone, Debug)]
enum Repr {
    Local(Vec<Tap>),
    /// `table[input index] = output index`.
    Table(Arc<Vec<u64>>),
}

/// A map `A^domain -> A^codomain`, either evaluated lazily cell by cell or
/// materialized as an index table.
#[derive(Clone, Debug)]
pub struct BlockMap {
    q: usize,
    domain: Vec<Element>,
    codomain: Vec<Element>,
    repr: Repr,
}

/// Result of inverting a block map on a finite pattern space.
#[derive(Clone, Debug)]
pub enum BlockInverse {
    Bijective(BlockMap),
    /// Two inputs (as word indices, smallest pair first) with equal images.
    Collision(u64, u64),
    /// This output index is never reached.
    NotSurjective(u64),
}

impl BlockMap {
    pub fn from_taps(q: usize, domain: Vec<Element>, codomain: Vec<Element>, taps: Vec<Tap>) -> Result<Self> {
        if taps.len() != codomain.len() {
            return Err(NucaError::Internal(format!("{} taps for {} output cells", taps.len(), codomain.len())));
        }
        Ok(BlockMap { q, domain, codomain, repr: Repr::Local(taps) })
    }

    /// Map given by its full table of output indices.
    pub fn from_table(q: usize, domain: Vec<Element>, codomain: Vec<Element>, table: Vec<u64>) -> Result<Self> {
        let inputs = word_count(q, domain.len()).ok_or(NucaError::BudgetExceeded {
            needed: format!("{q}^{}", domain.len()),
            budget: u64::MAX,
        })?;
        let outputs = word_count(q, codomain.len()).unwrap_or(u64::MAX);
        if table.len() as u64 != inputs {
            return Err(NucaError::TableLength { got: table.len(), expected: inputs as usize });
        }
        if table.iter().any(|&o| o >= outputs) {
            return Err(NucaError::Internal("block table entry out of range".into()));
        }
        Ok(BlockMap { q, domain, codomain, repr: Repr::Table(Arc::new(table)) })
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn domain(&self) -> &[Element] {
        &self.domain
    }

    pub fn codomain(&self) -> &[Element] {
        &self.codomain
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.repr, Repr::Table(_))
    }

    /// `|A|^|domain|`, if representable.
    pub fn input_count(&self) -> Option<u64> {
        word_count(self.q, self.domain.len())
    }

    /// Evaluates on a word over the domain, writing a word over the codomain.
    pub fn apply_word(&self, input: &[Letter], out: &mut [Letter]) {
        match &self.repr {
            Repr::Local(taps) => {
                for (slot, tap) in out.iter_mut().zip(taps) {
                    *slot = match tap {
                        Tap::Copy(p) => input[*p],
                        Tap::Rule { table, inputs } => {
                            let idx = inputs.iter().fold(0usize, |acc, &p| acc * self.q + input[p] as usize);
                            table[idx]
                        }
                    };
                }
            }
            Repr::Table(t) => {
                let idx = word_index(input, self.q);
                index_to_word(t[idx as usize], self.q, out);
            }
        }
    }

    /// Evaluates on an input index, returning the output index.
    pub fn apply_index(&self, index: u64) -> u64 {
        match &self.repr {
            Repr::Table(t) => t[index as usize],
            Repr::Local(_) => {
                let mut input = vec![0; self.domain.len()];
                let mut out = vec![0; self.codomain.len()];
                index_to_word(index, self.q, &mut input);
                self.apply_word(&input, &mut out);
                word_index(&out, self.q)
            }
        }
    }

    /// Evaluates on a pattern whose support contains the domain.
    pub fn apply(&self, p: &Pattern) -> Result<Pattern> {
        let input = p.word(&self.domain)?;
        let mut out = vec![0; self.codomain.len()];
        self.apply_word(&input, &mut out);
        Ok(Pattern::from_word(&self.codomain, &out))
    }

    /// Calls `f(input_index, output_index)` for every input, in index order.
    pub fn for_each(&self, budget: Budget, mut f: impl FnMut(u64, u64)) -> Result<()> {
        let n = budget.words(self.q, self.domain.len())?;
        if let Repr::Table(t) = &self.repr {
            for (i, &o) in t.iter().enumerate() {
                f(i as u64, o);
            }
            return Ok(());
        }
        let mut input = vec![0 as Letter; self.domain.len()];
        let mut out = vec![0 as Letter; self.codomain.len()];
        for i in 0..n {
            self.apply_word(&input, &mut out);
            f(i, word_index(&out, self.q));
            crate::words::next_word(&mut input, self.q);
        }
        Ok(())
    }

    /// Tabulates the map. Fails above the budget, in which case the map stays lazy.
    pub fn materialize(&self, budget: Budget) -> Result<BlockMap> {
        if self.is_materialized() {
            return Ok(self.clone());
        }
        let mut table = Vec::with_capacity(budget.words(self.q, self.domain.len())? as usize);
        self.for_each(budget, |_, o| table.push(o))?;
        Ok(BlockMap { repr: Repr::Table(Arc::new(table)), ..self.clone() })
    }

    /// Which output indices are reached.
    pub fn image(&self, budget: Budget) -> Result<Vec<bool>> {
        let outputs = budget.words(self.q, self.codomain.len())?;
        let mut hit = vec![false; outputs as usize];
        self.for_each(budget, |_, o| hit[o as usize] = true)?;
        Ok(hit)
    }

    /// Inverse of a self-map of `A^B` (domain and codomain list the same cells).
    pub fn inverse(&self, budget: Budget) -> Result<BlockInverse> {
        let same_cells = self.domain.iter().cloned().collect::<FiniteSubset>()
            == self.codomain.iter().cloned().collect::<FiniteSubset>();
        if !same_cells || self.domain.len() != self.codomain.len() {
            return Err(NucaError::Unsupported("inverse of a block map between different windows".into()));
        }
        let n = budget.words(self.q, self.domain.len())? as usize;
        // output word (in codomain order) -> input word (in codomain order)
        let reorder: Vec<usize> = self
            .codomain
            .iter()
            .map(|c| self.domain.iter().position(|d| d == c).expect("same cells"))
            .collect();
        // first input index reaching each output
        let mut first_of = vec![u64::MAX; n];
        let mut collision: Option<(u64, u64)> = None;
        self.for_each(budget, |i, o| {
            let f = first_of[o as usize];
            if f == u64::MAX {
                first_of[o as usize] = i;
            } else if collision.map_or(true, |best| (f, i) < best) {
                collision = Some((f, i));
            }
        })?;
        if let Some((a, b)) = collision {
            return Ok(BlockInverse::Collision(a, b));
        }
        // re-express each preimage in codomain order so the inverse is a self-map
        let mut dom_word = vec![0 as Letter; self.domain.len()];
        let mut cod_word = vec![0 as Letter; self.codomain.len()];
        let mut preimage = first_of;
        for p in preimage.iter_mut().filter(|p| **p != u64::MAX) {
            index_to_word(*p, self.q, &mut dom_word);
            for (slot, &pos) in cod_word.iter_mut().zip(&reorder) {
                *slot = dom_word[pos];
            }
            *p = word_index(&cod_word, self.q);
        }
        if let Some(missing) = preimage.iter().position(|&p| p == u64::MAX) {
            return Ok(BlockInverse::NotSurjective(missing as u64));
        }
        Ok(BlockInverse::Bijective(BlockMap {
            q: self.q,
            domain: self.codomain.clone(),
            codomain: self.codomain.clone(),
            repr: Repr::Table(Arc::new(preimage)),
        }))
    }
}

/// The induced local map `f^{+M}_{E,w}: A^{EM} -> A^E`,
/// `f(x)(g) = w(g)((g^-1 x)|_M)`.
///
/// The domain lists `EM` and the codomain lists `E`, both in canonical order.
pub fn induced_local_map(
    universe: &GroupUniverse,
    window: &FiniteSubset,
    rules: &BTreeMap<Element, LocalRule>,
) -> Result<BlockMap> {
    let Some(first) = window.first() else {
        return BlockMap::from_taps(2, Vec::new(), Vec::new(), Vec::new());
    };
    let proto = rules.get(first).ok_or_else(|| NucaError::MissingRule(first.clone()))?;
    let memory = proto.memory();
    let q = proto.alphabet_size();
    let domain = universe.product_unchecked(window, &memory.as_set()).to_vec();
    let position: HashMap<&Element, usize> = domain.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut taps = Vec::with_capacity(window.len());
    for g in window {
        universe.check(g)?;
        let rule = rules.get(g).ok_or_else(|| NucaError::MissingRule(g.clone()))?;
        if rule.memory() != memory || rule.alphabet_size() != q {
            return Err(NucaError::Mismatch(format!("rule at {g} does not share the window's memory")));
        }
        let inputs = memory.cells().iter().map(|m| position[&universe.op(g, m)]).collect();
        taps.push(Tap::Rule { table: rule.shared_table(), inputs });
    }
    BlockMap::from_taps(q, domain, window.to_vec(), taps)
}
