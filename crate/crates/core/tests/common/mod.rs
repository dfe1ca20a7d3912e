//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls the engine's evaluation, composition or decision code:
//! configurations are plain vectors indexed in mixed radix, rule tables are
//! read directly, and group arithmetic is redone on raw coordinates.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use nuca::{Configuration, Element, FiniteSubset, GroupUniverse, Letter, LocalRule, Memory, Nuca, Pattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `ℤ^free × ∏ ℤ/moduli` on raw coordinates.
#[derive(Clone, Debug)]
pub struct Shape {
    pub free: usize,
    pub moduli: Vec<i64>,
}

impl Shape {
    pub fn of(u: &GroupUniverse) -> Shape {
        Shape { free: u.free_rank(), moduli: u.moduli().to_vec() }
    }

    pub fn reduce(&self, c: &[i64]) -> Vec<i64> {
        c.iter()
            .enumerate()
            .map(|(i, &x)| if i < self.free { x } else { x.rem_euclid(self.moduli[i - self.free]) })
            .collect()
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let sum: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&sum)
    }

    pub fn neg(&self, a: &[i64]) -> Vec<i64> {
        let n: Vec<i64> = a.iter().map(|x| -x).collect();
        self.reduce(&n)
    }

    pub fn word_length(&self, c: &[i64]) -> i64 {
        c.iter()
            .enumerate()
            .map(|(i, &x)| {
                if i < self.free {
                    x.abs()
                } else {
                    let n = self.moduli[i - self.free];
                    let r = x.rem_euclid(n);
                    r.min(n - r)
                }
            })
            .sum()
    }

    /// All elements of a finite shape, lexicographic.
    pub fn all(&self) -> Vec<Vec<i64>> {
        assert_eq!(self.free, 0, "infinite shape");
        let mut out = vec![Vec::new()];
        for &n in &self.moduli {
            out = out.into_iter().flat_map(|p| (0..n).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        out
    }

    pub fn index(&self, c: &[i64]) -> usize {
        let c = self.reduce(c);
        c.iter().zip(&self.moduli).fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    /// Elements of word length at most `k`, by scanning a box.
    pub fn ball(&self, k: i64) -> BTreeSet<Vec<i64>> {
        let dim = self.free + self.moduli.len();
        let mut out = BTreeSet::new();
        let mut boxes = vec![Vec::new()];
        for _ in 0..dim {
            boxes = boxes.into_iter().flat_map(|p| (-k..=k).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        for c in boxes {
            let r = self.reduce(&c);
            if self.word_length(&r) <= k {
                out.insert(r);
            }
        }
        out
    }

    pub fn product(&self, e: &BTreeSet<Vec<i64>>, f: &BTreeSet<Vec<i64>>) -> BTreeSet<Vec<i64>> {
        e.iter().flat_map(|a| f.iter().map(move |b| self.add(a, b))).collect()
    }
}

pub fn raw_set(s: &FiniteSubset) -> BTreeSet<Vec<i64>> {
    s.iter().map(|g| g.coords().to_vec()).collect()
}

pub fn subset(u: &GroupUniverse, cells: impl IntoIterator<Item = Vec<i64>>) -> FiniteSubset {
    cells.into_iter().map(|c| u.element(c).unwrap()).collect()
}

pub fn el(u: &GroupUniverse, c: &[i64]) -> Element {
    u.element(c.to_vec()).unwrap()
}

pub fn memory(u: &GroupUniverse, cells: &[&[i64]]) -> Memory {
    Memory::new(u, cells.iter().map(|c| el(u, c)).collect()).unwrap()
}

/// Table lookup with the first memory cell as most significant digit.
pub fn rule_value(rule: &LocalRule, word: &[Letter]) -> Letter {
    let q = rule.alphabet_size();
    let index = word.iter().fold(0usize, |acc, &v| acc * q + v as usize);
    rule.table()[index]
}

/// `σ_s(x)(g) = s(g)((g^-1 x)|_M)` read off the definition.
pub fn cell_value(n: &Nuca, shape: &Shape, g: &[i64], read: impl Fn(&[i64]) -> Letter) -> Letter {
    let rule = n.rule_at(&Element::raw(shape.reduce(g)));
    let word: Vec<Letter> = rule.memory().cells().iter().map(|m| read(&shape.add(g, m.coords()))).collect();
    rule_value(rule, &word)
}

/// Dense evaluation on a finite universe.
pub fn dense_eval(n: &Nuca, x: &[Letter]) -> Vec<Letter> {
    let shape = Shape::of(n.universe());
    shape.all().iter().map(|g| cell_value(n, &shape, g, |h| x[shape.index(h)])).collect()
}

/// Evaluation of a map `x` (missing cells read `background`) on the cells of `e`.
pub fn window_eval(
    n: &Nuca,
    x: &HashMap<Vec<i64>, Letter>,
    background: Letter,
    e: &[Vec<i64>],
) -> HashMap<Vec<i64>, Letter> {
    let shape = Shape::of(n.universe());
    e.iter()
        .map(|g| (g.clone(), cell_value(n, &shape, g, |h| *x.get(h).unwrap_or(&background))))
        .collect()
}

pub fn to_dense(x: &Configuration) -> Vec<Letter> {
    let shape = Shape::of(x.universe());
    shape.all().iter().map(|g| x.get(&Element::raw(g.clone()))).collect()
}

pub fn from_dense(u: &GroupUniverse, x: &[Letter]) -> Configuration {
    let shape = Shape::of(u);
    let p: Pattern = shape.all().into_iter().zip(x).map(|(g, &a)| (Element::raw(g), a)).collect();
    Configuration::new(u, 0, p).unwrap()
}

pub fn all_words(q: usize, len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| (0..q as Letter).map(move |a| [w.clone(), vec![a]].concat())).collect();
    }
    out
}

pub fn image(n: &Nuca) -> HashSet<Vec<Letter>> {
    let len = Shape::of(n.universe()).all().len();
    all_words(n.alphabet_size(), len).iter().map(|x| dense_eval(n, x)).collect()
}

pub fn injective(n: &Nuca) -> bool {
    let len = Shape::of(n.universe()).all().len();
    image(n).len() == n.alphabet_size().pow(len as u32)
}

/// `σ_t ∘ σ_s = Id` on every configuration.
pub fn is_left_inverse(t: &Nuca, s: &Nuca) -> bool {
    let len = Shape::of(s.universe()).all().len();
    all_words(s.alphabet_size(), len).iter().all(|x| dense_eval(t, &dense_eval(s, x)) == *x)
}

pub fn random_rule<R: Rng>(q: usize, m: &Memory, rng: &mut R) -> LocalRule {
    let len = q.pow(m.len() as u32);
    let table = (0..len).map(|_| rng.gen_range(0..q) as Letter).collect();
    LocalRule::new(q, m.clone(), table).unwrap()
}

/// Random rule configuration on `u`: constant with probability 1/3, else a
/// background with a few exceptions drawn from `cells`.
pub fn random_nuca<R: Rng>(u: &GroupUniverse, q: usize, m: &Memory, cells: &[Vec<i64>], rng: &mut R) -> Nuca {
    let background = random_rule(q, m, rng);
    if rng.gen_range(0..3) == 0 {
        return Nuca::uniform(u, background).unwrap();
    }
    let count = rng.gen_range(1..=3.min(cells.len()));
    let exceptions = (0..count)
        .map(|_| (el(u, &cells[rng.gen_range(0..cells.len())]), random_rule(q, m, rng)))
        .collect();
    Nuca::new(nuca::RuleConfiguration::asymptotically_constant(u, background, exceptions).unwrap()).unwrap()
}

pub fn xor_rule(u: &GroupUniverse) -> LocalRule {
    let m = memory(u, &[&[0], &[1]]);
    LocalRule::new(2, m, vec![0, 1, 1, 0]).unwrap()
}

/// `v ↦ v(c)` on memory `{0, c}` (or `{0}`) over `ℤ`-like one-dimensional universes.
pub fn reader(u: &GroupUniverse, c: i64) -> LocalRule {
    let cells: Vec<Element> = if c == 0 { vec![el(u, &[0])] } else { vec![el(u, &[0]), el(u, &[c])] };
    LocalRule::reader(2, Memory::new(u, cells).unwrap(), &el(u, &[c])).unwrap()
}

/// `π` on `{0}` with `xor` at the origin.
pub fn xor_at_origin(u: &GroupUniverse) -> Nuca {
    let xor = xor_rule(u);
    let pi = LocalRule::projection(2, xor.memory().clone(), u).unwrap();
    let exceptions = [(u.identity(), xor)].into_iter().collect();
    Nuca::new(nuca::RuleConfiguration::asymptotically_constant(u, pi, exceptions).unwrap()).unwrap()
}

/// Random finitely supported map on `[-r, r]` in one dimension.
pub fn random_line<R: Rng>(r: i64, q: usize, rng: &mut R) -> HashMap<Vec<i64>, Letter> {
    (-r..=r).map(|i| (vec![i], rng.gen_range(0..q) as Letter)).collect()
}

pub fn pattern_of(u: &GroupUniverse, x: &HashMap<Vec<i64>, Letter>) -> Pattern {
    x.iter().map(|(c, &a)| (el(u, c), a)).collect()
}

pub fn map_of(p: &Pattern) -> HashMap<Vec<i64>, Letter> {
    p.iter().map(|(g, a)| (g.coords().to_vec(), a)).collect()
}
