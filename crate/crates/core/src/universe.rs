//! Finitely generated abelian group universes `Z^d * Z/n1 * ... * Z/nk`.
//!
//! Elements are integer coordinate vectors. The first `free_rank` coordinates
//! are unbounded, the remaining ones are reduced into `[0, n_i)` when an
//! element is built, so equality is structural.
//!
//! The canonical generating set is `Δ = {0} ∪ {±e_i}`; balls are the product
//! sets `Δ^k`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{NucaError, Result};

/// A group element, stored as canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(Vec<i64>);

impl Element {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Raw element, not yet checked against a universe. Use
    /// [`GroupUniverse::element`] to obtain a canonical element.
    pub fn raw(coords: impl Into<Vec<i64>>) -> Self {
        Element(coords.into())
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Element {
    type Err = NucaError;

    /// Parses `(1,-2)`; the empty tuple `()` is the element of the trivial group.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| NucaError::parse(0, "element", format!("expected `(a,b,...)`, got `{t}`")))?;
        if inner.trim().is_empty() {
            return Ok(Element(Vec::new()));
        }
        let coords = inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<i64>()
                    .map_err(|_| NucaError::parse(0, "element", format!("bad coordinate `{}` in `{t}`", c.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Element(coords))
    }
}

/// Duplicate-free, canonically ordered set of elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteSubset(BTreeSet<Element>);

impl FiniteSubset {
    pub fn new() -> Self {
        FiniteSubset(BTreeSet::new())
    }

    pub fn singleton(e: Element) -> Self {
        FiniteSubset(BTreeSet::from([e]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.0.contains(e)
    }

    pub fn insert(&mut self, e: Element) -> bool {
        self.0.insert(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> + '_ {
        self.0.iter()
    }

    pub fn first(&self) -> Option<&Element> {
        self.0.iter().next()
    }

    pub fn union(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset(self.0.union(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset(self.0.difference(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn to_vec(&self) -> Vec<Element> {
        self.0.iter().cloned().collect()
    }
}

impl FromIterator<Element> for FiniteSubset {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        FiniteSubset(iter.into_iter().collect())
    }
}

impl IntoIterator for FiniteSubset {
    type Item = Element;
    type IntoIter = std::collections::btree_set::IntoIter<Element>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a FiniteSubset {
    type Item = &'a Element;
    type IntoIter = std::collections::btree_set::Iter<'a, Element>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// `Z^free_rank * Z/moduli[0] * ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupUniverse {
    free_rank: usize,
    moduli: Vec<i64>,
}

impl GroupUniverse {
    pub fn new(free_rank: usize, moduli: Vec<i64>) -> Result<Self> {
        if let Some(bad) = moduli.iter().find(|&&n| n < 2) {
            return Err(NucaError::InvalidUniverse(format!("cyclic modulus {bad} must be at least 2")));
        }
        Ok(GroupUniverse { free_rank, moduli })
    }

    /// The integers `Z`.
    pub fn integers() -> Self {
        GroupUniverse { free_rank: 1, moduli: Vec::new() }
    }

    /// `Z^d`.
    pub fn lattice(d: usize) -> Self {
        GroupUniverse { free_rank: d, moduli: Vec::new() }
    }

    /// `Z/n`.
    pub fn cyclic(n: i64) -> Result<Self> {
        GroupUniverse::new(0, vec![n])
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    /// Number of coordinates of an element.
    pub fn dim(&self) -> usize {
        self.free_rank + self.moduli.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Group order, `None` for infinite universes.
    pub fn order(&self) -> Option<u64> {
        if !self.is_finite() {
            return None;
        }
        self.moduli.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n as u64))
    }

    pub fn identity(&self) -> Element {
        Element(vec![0; self.dim()])
    }

    /// Builds a canonical element, reducing torsion coordinates.
    pub fn element(&self, coords: impl Into<Vec<i64>>) -> Result<Element> {
        let mut coords = coords.into();
        if coords.len() != self.dim() {
            return Err(self.foreign(&Element(coords)));
        }
        for (c, n) in coords[self.free_rank..].iter_mut().zip(&self.moduli) {
            *c = c.rem_euclid(*n);
        }
        Ok(Element(coords))
    }

    /// Canonicalizes a raw element.
    pub fn canonical(&self, e: &Element) -> Result<Element> {
        self.element(e.0.clone())
    }

    /// Whether `e` is a canonical element of this universe.
    pub fn contains(&self, e: &Element) -> bool {
        e.0.len() == self.dim()
            && e.0[self.free_rank..]
                .iter()
                .zip(&self.moduli)
                .all(|(c, n)| (0..*n).contains(c))
    }

    pub fn check(&self, e: &Element) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(self.foreign(e))
        }
    }

    fn foreign(&self, e: &Element) -> NucaError {
        NucaError::ForeignElement { element: e.to_string(), universe: self.to_string() }
    }

    /// Group law (written additively on coordinates).
    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.op(a, b))
    }

    /// Group law without membership checks; callers guarantee canonical inputs.
    pub(crate) fn op(&self, a: &Element, b: &Element) -> Element {
        let mut out = Vec::with_capacity(a.0.len());
        for (i, (x, y)) in a.0.iter().zip(&b.0).enumerate() {
            let s = x + y;
            out.push(if i < self.free_rank { s } else { s.rem_euclid(self.moduli[i - self.free_rank]) });
        }
        Element(out)
    }

    pub fn inv(&self, a: &Element) -> Element {
        let mut out = Vec::with_capacity(a.0.len());
        for (i, x) in a.0.iter().enumerate() {
            out.push(if i < self.free_rank { -x } else { (-x).rem_euclid(self.moduli[i - self.free_rank]) });
        }
        Element(out)
    }

    /// Word length of `e` with respect to the canonical generators.
    pub fn norm(&self, e: &Element) -> u64 {
        e.0.iter()
            .enumerate()
            .map(|(i, &c)| {
                if i < self.free_rank {
                    c.unsigned_abs()
                } else {
                    let n = self.moduli[i - self.free_rank];
                    let r = c.rem_euclid(n);
                    r.min(n - r) as u64
                }
            })
            .sum()
    }

    /// The canonical symmetric generating set: identity and `±e_i`.
    pub fn generators(&self) -> FiniteSubset {
        let mut set = FiniteSubset::singleton(self.identity());
        for i in 0..self.dim() {
            for sign in [1, -1] {
                let mut c = vec![0; self.dim()];
                c[i] = sign;
                set.insert(self.element(c).expect("generator has universe dimension"));
            }
        }
        set
    }

    /// `Δ^k`, computed as an iterated product set.
    pub fn ball(&self, k: usize) -> FiniteSubset {
        let delta = self.generators();
        let mut ball = FiniteSubset::singleton(self.identity());
        for _ in 0..k {
            ball = self.product_unchecked(&ball, &delta);
        }
        ball
    }

    /// Smallest `k` such that `e` lies in `ball(k)`.
    pub fn radius_of(&self, set: &FiniteSubset) -> u64 {
        set.iter().map(|e| self.norm(e)).max().unwrap_or(0)
    }

    pub fn product_set(&self, e: &FiniteSubset, f: &FiniteSubset) -> Result<FiniteSubset> {
        for x in e.iter().chain(f.iter()) {
            self.check(x)?;
        }
        Ok(self.product_unchecked(e, f))
    }

    pub(crate) fn product_unchecked(&self, e: &FiniteSubset, f: &FiniteSubset) -> FiniteSubset {
        let mut out = FiniteSubset::new();
        for a in e {
            for b in f {
                out.insert(self.op(a, b));
            }
        }
        out
    }

    pub fn inverse_set(&self, e: &FiniteSubset) -> FiniteSubset {
        e.iter().map(|x| self.inv(x)).collect()
    }

    /// `gE`.
    pub fn translate_set(&self, g: &Element, e: &FiniteSubset) -> FiniteSubset {
        e.iter().map(|x| self.op(g, x)).collect()
    }

    /// Every element of a finite universe, in canonical order.
    pub fn enumerate_all(&self) -> Result<FiniteSubset> {
        if !self.is_finite() {
            return Err(NucaError::InfiniteUniverse(self.to_string()));
        }
        let mut out = FiniteSubset::new();
        let mut coords = vec![0i64; self.dim()];
        loop {
            out.insert(Element(coords.clone()));
            let mut i = self.dim();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                coords[i] += 1;
                if coords[i] < self.moduli[i] {
                    break;
                }
                coords[i] = 0;
            }
        }
    }
}

impl fmt::Display for GroupUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 if self.moduli.is_empty() => parts.push("Z^0".to_string()),
            0 => {}
            1 => parts.push("Z".to_string()),
            d => parts.push(format!("Z^{d}")),
        }
        parts.extend(self.moduli.iter().map(|n| format!("Z/{n}")));
        write!(f, "{}", parts.join(" * "))
    }
}

impl FromStr for GroupUniverse {
    type Err = NucaError;

    /// Parses `Z^2`, `Z/3`, `Z * Z/4`, `Z^0`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| NucaError::parse(0, "universe", msg);
        let mut free_rank = 0usize;
        let mut moduli = Vec::new();
        if s.trim().is_empty() {
            return Err(bad("empty universe literal".into()));
        }
        for factor in s.split('*') {
            let factor = factor.trim();
            if factor == "Z" {
                free_rank += 1;
            } else if let Some(exp) = factor.strip_prefix("Z^") {
                let d: usize = exp
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad exponent in `{factor}`")))?;
                free_rank += d;
            } else if let Some(n) = factor.strip_prefix("Z/") {
                let n: i64 = n.trim().parse().map_err(|_| bad(format!("bad modulus in `{factor}`")))?;
                if n < 2 {
                    return Err(bad(format!("modulus in `{factor}` must be at least 2")));
                }
                moduli.push(n);
            } else {
                return Err(bad(format!("unrecognized factor `{factor}`")));
            }
        }
        Ok(GroupUniverse { free_rank, moduli })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupUniverse {
        GroupUniverse::integers()
    }

    fn set(u: &GroupUniverse, xs: &[&[i64]]) -> FiniteSubset {
        xs.iter().map(|c| u.element(c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn modular_and_lattice_law() {
        let z3 = GroupUniverse::cyclic(3).unwrap();
        let two = z3.element([2]).unwrap();
        assert_eq!(z3.mul(&two, &two).unwrap(), z3.element([1]).unwrap());
        let z2 = GroupUniverse::lattice(2);
        let a = z2.element([1, 0]).unwrap();
        let b = z2.element([0, -2]).unwrap();
        assert_eq!(z2.mul(&a, &b).unwrap(), z2.element([1, -2]).unwrap());
    }

    #[test]
    fn mismatched_universe_is_rejected() {
        let z2 = GroupUniverse::lattice(2);
        let a = z2.element([1, 0]).unwrap();
        assert!(matches!(z().mul(&a, &z().identity()), Err(NucaError::ForeignElement { .. })));
        let z5 = GroupUniverse::cyclic(5).unwrap();
        assert!(z5.mul(&Element::raw([7]), &z5.identity()).is_err());
    }

    #[test]
    fn inverses() {
        assert_eq!(z().inv(&z().element([3]).unwrap()), z().element([-3]).unwrap());
        let z5 = GroupUniverse::cyclic(5).unwrap();
        assert_eq!(z5.inv(&z5.element([2]).unwrap()), z5.element([3]).unwrap());
        assert_eq!(z5.inv(&z5.identity()), z5.identity());
    }

    #[test]
    fn balls() {
        assert_eq!(z().ball(2), set(&z(), &[&[-2], &[-1], &[0], &[1], &[2]]));
        let z2 = GroupUniverse::lattice(2);
        assert_eq!(z2.ball(1), set(&z2, &[&[0, 0], &[1, 0], &[-1, 0], &[0, 1], &[0, -1]]));
        let z3 = GroupUniverse::cyclic(3).unwrap();
        assert_eq!(z3.ball(2), z3.enumerate_all().unwrap());
    }

    #[test]
    fn product_and_inverse_sets() {
        let u = z();
        let e = set(&u, &[&[0], &[1]]);
        assert_eq!(u.product_set(&e, &e).unwrap(), set(&u, &[&[0], &[1], &[2]]));
        assert_eq!(u.inverse_set(&e), set(&u, &[&[0], &[-1]]));
    }

    #[test]
    fn enumerate_finite_universes() {
        let klein = GroupUniverse::new(0, vec![2, 2]).unwrap();
        assert_eq!(klein.enumerate_all().unwrap().len(), 4);
        assert_eq!(GroupUniverse::cyclic(6).unwrap().enumerate_all().unwrap().len(), 6);
        assert!(matches!(z().enumerate_all(), Err(NucaError::InfiniteUniverse(_))));
        assert_eq!(GroupUniverse::lattice(0).enumerate_all().unwrap().len(), 1);
    }

    #[test]
    fn literals_round_trip() {
        for lit in ["Z", "Z^2", "Z/3", "Z * Z/4", "Z^0", "Z^3 * Z/2 * Z/5"] {
            let u: GroupUniverse = lit.parse().unwrap();
            assert_eq!(u.to_string(), lit);
        }
        assert!("Z^".parse::<GroupUniverse>().is_err());
        assert!("Z/1".parse::<GroupUniverse>().is_err());
        assert!("Q".parse::<GroupUniverse>().is_err());
        let e: Element = "(1,-2)".parse().unwrap();
        assert_eq!(e.coords(), &[1, -2]);
        assert_eq!(e.to_string(), "(1,-2)");
    }

    #[test]
    fn norm_matches_ball_membership() {
        for u in [z(), GroupUniverse::lattice(2), GroupUniverse::new(1, vec![5]).unwrap()] {
            for k in 0..4 {
                let b = u.ball(k);
                for e in u.ball(k + 1).iter() {
                    assert_eq!(b.contains(e), u.norm(e) <= k as u64, "{u} {e} k={k}");
                }
            }
        }
    }
}
