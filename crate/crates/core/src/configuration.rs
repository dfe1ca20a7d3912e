//! Finite patterns, asymptotically constant configurations and the shift action.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{NucaError, Result};
use crate::universe::{Element, FiniteSubset, GroupUniverse};

/// A letter of the alphabet, `0..q`.
pub type Letter = u8;

/// Alphabet `{0, .., q-1}` with optional display names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: u8,
    names: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > u8::MAX as usize {
            return Err(NucaError::InvalidAlphabet(size));
        }
        Ok(Alphabet { size: size as u8, names: None })
    }

    pub fn with_names(names: Vec<String>) -> Result<Self> {
        let mut a = Alphabet::new(names.len())?;
        a.names = Some(names);
        Ok(a)
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn name(&self, letter: Letter) -> String {
        match &self.names {
            Some(n) => n[letter as usize].clone(),
            None => letter.to_string(),
        }
    }

    pub fn check(&self, letter: Letter) -> Result<()> {
        if letter < self.size {
            Ok(())
        } else {
            Err(NucaError::LetterOutOfRange { letter: letter as u32, size: self.size as u32 })
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.size
    }
}

/// A finite assignment of letters to cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    cells: BTreeMap<Element, Letter>,
}

impl Pattern {
    pub fn new() -> Self {
        Pattern::default()
    }

    /// Pattern assigning `word[i]` to the `i`-th cell of `cells`.
    pub fn from_word(cells: &[Element], word: &[Letter]) -> Self {
        Pattern { cells: cells.iter().cloned().zip(word.iter().copied()).collect() }
    }

    pub fn get(&self, g: &Element) -> Option<Letter> {
        self.cells.get(g).copied()
    }

    pub fn insert(&mut self, g: Element, a: Letter) {
        self.cells.insert(g, a);
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn support(&self) -> FiniteSubset {
        self.cells.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, Letter)> + '_ {
        self.cells.iter().map(|(g, &a)| (g, a))
    }

    /// Letters on `cells`, in order. Fails with the list of missing cells.
    pub fn word(&self, cells: &[Element]) -> Result<Vec<Letter>> {
        let missing: Vec<Element> = cells.iter().filter(|c| !self.cells.contains_key(c)).cloned().collect();
        if !missing.is_empty() {
            return Err(NucaError::MissingCells(missing));
        }
        Ok(cells.iter().map(|c| self.cells[c]).collect())
    }

    /// Restriction to `e`, which must lie in the support.
    pub fn restrict(&self, e: &FiniteSubset) -> Result<Pattern> {
        let cells = e.to_vec();
        let word = self.word(&cells)?;
        Ok(Pattern::from_word(&cells, &word))
    }

    /// `(g p)(g h) = p(h)`.
    pub fn shift(&self, u: &GroupUniverse, g: &Element) -> Pattern {
        Pattern { cells: self.cells.iter().map(|(h, &a)| (u.op(g, h), a)).collect() }
    }

    /// Overwrites cells of `self` with those of `other`.
    pub fn overlay(&self, other: &Pattern) -> Pattern {
        let mut out = self.clone();
        for (g, a) in other.iter() {
            out.insert(g.clone(), a);
        }
        out
    }
}

impl FromIterator<(Element, Letter)> for Pattern {
    fn from_iter<I: IntoIterator<Item = (Element, Letter)>>(iter: I) -> Self {
        Pattern { cells: iter.into_iter().collect() }
    }
}

impl fmt::Display for Pattern {
    /// `cell=letter` entries separated by spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, a)) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}={a}")?;
        }
        Ok(())
    }
}

/// A total configuration equal to `background` off a finite exception pattern.
///
/// Normal form: exceptions never carry the background letter. On finite
/// universes the background is always letter 0, so two configurations are
/// equal exactly when they agree as maps `G -> A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    universe: GroupUniverse,
    background: Letter,
    exceptions: Pattern,
}

/// Result of comparing two configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Asymptotic {
    /// The configurations differ exactly on this finite set.
    Diff(FiniteSubset),
    /// Different backgrounds on an infinite universe.
    NotAsymptotic,
}

impl Configuration {
    pub fn new(universe: &GroupUniverse, background: Letter, exceptions: Pattern) -> Result<Self> {
        for (g, _) in exceptions.iter() {
            universe.check(g)?;
        }
        Ok(Self::normalized(universe.clone(), background, exceptions))
    }

    /// Constant configuration.
    pub fn constant(universe: &GroupUniverse, letter: Letter) -> Self {
        Self::normalized(universe.clone(), letter, Pattern::new())
    }

    fn normalized(universe: GroupUniverse, background: Letter, exceptions: Pattern) -> Self {
        if universe.is_finite() && background != 0 {
            let all = universe.enumerate_all().expect("finite universe");
            let cells = all
                .into_iter()
                .filter_map(|g| {
                    let a = exceptions.get(&g).unwrap_or(background);
                    (a != 0).then_some((g, a))
                })
                .collect();
            return Configuration { universe, background: 0, exceptions: cells };
        }
        let cells = exceptions.cells.into_iter().filter(|&(_, a)| a != background).collect();
        Configuration { universe, background, exceptions: Pattern { cells } }
    }

    /// Configuration on a finite universe from letters listed in canonical cell order.
    pub fn from_dense(universe: &GroupUniverse, letters: &[Letter]) -> Result<Self> {
        let cells = universe.enumerate_all()?.to_vec();
        if cells.len() != letters.len() {
            return Err(NucaError::Mismatch(format!(
                "{} letters for a universe of order {}",
                letters.len(),
                cells.len()
            )));
        }
        Ok(Self::normalized(universe.clone(), 0, Pattern::from_word(&cells, letters)))
    }

    /// Letters in canonical cell order (finite universes only).
    pub fn to_dense(&self) -> Result<Vec<Letter>> {
        Ok(self.universe.enumerate_all()?.iter().map(|g| self.get(g)).collect())
    }

    pub fn universe(&self) -> &GroupUniverse {
        &self.universe
    }

    pub fn background(&self) -> Letter {
        self.background
    }

    pub fn exceptions(&self) -> &Pattern {
        &self.exceptions
    }

    pub fn get(&self, g: &Element) -> Letter {
        self.exceptions.get(g).unwrap_or(self.background)
    }

    /// `(g x)(h) = x(g^-1 h)`.
    pub fn shift(&self, g: &Element) -> Result<Configuration> {
        self.universe.check(g)?;
        Ok(Configuration {
            universe: self.universe.clone(),
            background: self.background,
            exceptions: self.exceptions.shift(&self.universe, g),
        })
    }

    pub fn restrict(&self, e: &FiniteSubset) -> Pattern {
        e.iter().map(|g| (g.clone(), self.get(g))).collect()
    }

    /// Replaces the letters on the cells of `p`.
    pub fn with_pattern(&self, p: &Pattern) -> Result<Configuration> {
        Configuration::new(&self.universe, self.background, self.exceptions.overlay(p))
    }

    pub fn asymptotic_diff(&self, other: &Configuration) -> Result<Asymptotic> {
        if self.universe != other.universe {
            return Err(NucaError::Mismatch("configurations live on different universes".into()));
        }
        if self.background != other.background && !self.universe.is_finite() {
            return Ok(Asymptotic::NotAsymptotic);
        }
        let cells = self.exceptions.support().union(&other.exceptions.support());
        Ok(Asymptotic::Diff(cells.into_iter().filter(|g| self.get(g) != other.get(g)).collect()))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "background={}", self.background)?;
        if !self.exceptions.is_empty() {
            write!(f, " {}", self.exceptions)?;
        }
        Ok(())
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

    #[test]
    fn shift_moves_exceptions() {
        let u = z();
        let x = Configuration::new(&u, 0, [(el(&u, 0), 1)].into_iter().collect()).unwrap();
        let y = x.shift(&el(&u, 3)).unwrap();
        assert_eq!(y.exceptions().support(), FiniteSubset::singleton(el(&u, 3)));
        assert_eq!(x.shift(&u.identity()).unwrap(), x);
    }

    #[test]
    fn restriction() {
        let u = z();
        let x = Configuration::new(&u, 0, [(el(&u, 2), 1)].into_iter().collect()).unwrap();
        let e: FiniteSubset = (0..3).map(|c| el(&u, c)).collect();
        let p = x.restrict(&e);
        assert_eq!(p.word(&e.to_vec()).unwrap(), vec![0, 0, 1]);
        assert!(x.restrict(&FiniteSubset::new()).is_empty());
    }

    #[test]
    fn normal_form_strips_background() {
        let u = z();
        let x = Configuration::new(&u, 1, [(el(&u, 0), 1), (el(&u, 1), 0)].into_iter().collect()).unwrap();
        assert_eq!(x.exceptions().len(), 1);
        let z4 = GroupUniverse::cyclic(4).unwrap();
        let ones = Configuration::constant(&z4, 1);
        assert_eq!(ones.background(), 0);
        assert_eq!(ones.to_dense().unwrap(), vec![1; 4]);
    }

    #[test]
    fn asymptotic_differences() {
        let u = z();
        let x = Configuration::constant(&u, 0);
        assert_eq!(x.asymptotic_diff(&x).unwrap(), Asymptotic::Diff(FiniteSubset::new()));
        let y = Configuration::constant(&u, 1);
        assert_eq!(x.asymptotic_diff(&y).unwrap(), Asymptotic::NotAsymptotic);
        let z4 = GroupUniverse::cyclic(4).unwrap();
        let a = Configuration::constant(&z4, 0);
        let b = Configuration::constant(&z4, 1);
        assert_eq!(a.asymptotic_diff(&b).unwrap(), Asymptotic::Diff(z4.enumerate_all().unwrap()));
    }

    #[test]
    fn missing_cells_are_named() {
        let u = z();
        let p: Pattern = [(el(&u, 0), 1)].into_iter().collect();
        match p.word(&[el(&u, 0), el(&u, 5)]) {
            Err(NucaError::MissingCells(m)) => assert_eq!(m, vec![el(&u, 5)]),
            other => panic!("{other:?}"),
        }
    }
}
