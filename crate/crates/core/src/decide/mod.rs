//! Decision procedures and bounded semi-decisions for injectivity,
//! surjectivity and their asymptotic and stable variants, plus the
//! constructive inversion and localization algorithms.

mod invert;
mod localize;

pub use invert::{
    block_as_nuca, check_inverse_on_window, extract_block_map, perturbation_invert, product_split,
    reversibility_search, InverseKind, InverseObject, PerturbationOutcome, Reversibility, Stage,
};
pub use localize::{ubs_localize, Localized};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::configuration::{Configuration, Letter, Pattern};
use crate::engine::Nuca;
use crate::error::{NucaError, Result};
use crate::rules::BlockInverse;
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::{for_each_word, index_to_word, word_count, Budget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// 0 holds, 1 refuted, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Evidence attached to a refutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Distinct inputs with the same image.
    Collision { x: Configuration, y: Configuration, image: Configuration },
    /// A window pattern outside the image of the window map.
    Unreached(Pattern),
    /// A configuration of a finite universe with no preimage.
    NoPreimage(Configuration),
    /// `y` is asymptotic to `σ(x)` but no `z` inside the correction ball maps to `y`.
    NoCorrection { x: Configuration, y: Configuration },
    /// The property fails for the translate `σ_{gs}`.
    Translate { g: Element, inner: Box<Witness> },
}

/// Dense word for configurations of small finite universes, normal form otherwise.
pub fn show_configuration(x: &Configuration) -> String {
    match x.to_dense() {
        Ok(w) if w.iter().all(|&a| a < 36) => w.iter().map(|&a| crate::rules::letter_char(a)).collect(),
        _ => x.to_string(),
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Collision { x, y, image } => write!(
                f,
                "x={} y={} image={}",
                show_configuration(x),
                show_configuration(y),
                show_configuration(image)
            ),
            Witness::Unreached(p) => write!(f, "unreached {p}"),
            Witness::NoPreimage(x) => write!(f, "no preimage for {}", show_configuration(x)),
            Witness::NoCorrection { x, y } => {
                write!(f, "x={} y={} has no correction", show_configuration(x), show_configuration(y))
            }
            Witness::Translate { g, inner } => write!(f, "translate g={g}: {inner}"),
        }
    }
}

/// Verdict on one property, with the bounds used to reach it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub bounds: Vec<(String, String)>,
    pub note: Option<String>,
}

impl PropertyReport {
    pub fn new(property: &str, verdict: Verdict) -> Self {
        PropertyReport { property: property.to_string(), verdict, witness: None, bounds: Vec::new(), note: None }
    }

    pub fn bound(mut self, key: &str, value: impl ToString) -> Self {
        self.bounds.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn refuted(&self) -> bool {
        self.verdict == Verdict::Refuted
    }

    fn over_budget(property: &str, budget: Budget, err: NucaError) -> Self {
        PropertyReport::new(property, Verdict::Inconclusive)
            .bound("budget", budget.0)
            .with_note(err.to_string())
    }
}

/// The exactly decidable properties swept over translates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Injective,
    Surjective,
    PostSurjective,
    PreInjective,
    Invertible,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Injective,
        Property::Surjective,
        Property::PostSurjective,
        Property::PreInjective,
        Property::Invertible,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Injective => "injective",
            Property::Surjective => "surjective",
            Property::PostSurjective => "post_surjective",
            Property::PreInjective => "pre_injective",
            Property::Invertible => "invertible",
        }
    }
}

impl FromStr for Property {
    type Err = NucaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Property::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| NucaError::parse(0, "property", format!("unknown property `{s}`")))
    }
}

fn require_finite(u: &GroupUniverse) -> Result<FiniteSubset> {
    u.enumerate_all()
}

fn dense(u: &GroupUniverse, q: usize, len: usize, index: u64) -> Result<Configuration> {
    let mut w = vec![0 as Letter; len];
    index_to_word(index, q, &mut w);
    Configuration::from_dense(u, &w)
}

/// Exact injectivity on a finite universe by enumerating `A^G`.
///
/// The witness is the lexicographically smallest colliding pair. Since `G`
/// is finite, the report also records surjectivity (equivalent there).
pub fn injectivity_oracle(n: &Nuca, budget: Budget) -> Result<PropertyReport> {
    let u = n.universe();
    let cells = require_finite(u)?;
    let q = n.alphabet_size();
    if let Err(e) = budget.words(q, cells.len()) {
        return Ok(PropertyReport::over_budget("injective", budget, e));
    }
    let phi = n.local_map(&cells)?;
    let report = match phi.inverse(budget)? {
        BlockInverse::Collision(a, b) => {
            let x = dense(u, q, cells.len(), a)?;
            let y = dense(u, q, cells.len(), b)?;
            let image = n.evaluate(&x)?;
            PropertyReport::new("injective", Verdict::Refuted)
                .with_witness(Witness::Collision { x, y, image })
                .bound("surjective", false)
        }
        BlockInverse::Bijective(_) => PropertyReport::new("injective", Verdict::Holds).bound("surjective", true),
        BlockInverse::NotSurjective(_) => {
            return Err(NucaError::Internal("injective self-map of a finite set missed a point".into()))
        }
    };
    Ok(report.bound("configurations", word_count(q, cells.len()).unwrap_or(u64::MAX)))
}

/// Exact surjectivity on a finite universe.
pub fn surjectivity_oracle(n: &Nuca, budget: Budget) -> Result<PropertyReport> {
    let u = n.universe();
    let cells = require_finite(u)?;
    let q = n.alphabet_size();
    if let Err(e) = budget.words(q, cells.len()) {
        return Ok(PropertyReport::over_budget("surjective", budget, e));
    }
    let hit = n.local_map(&cells)?.image(budget)?;
    Ok(match hit.iter().position(|&h| !h) {
        Some(miss) => PropertyReport::new("surjective", Verdict::Refuted)
            .with_witness(Witness::NoPreimage(dense(u, q, cells.len(), miss as u64)?)),
        None => PropertyReport::new("surjective", Verdict::Holds),
    })
}

/// Computes `Γ_E = {σ_s(x)|_E}` by enumerating `A^{EM}`. A missing pattern
/// certifies non-surjectivity; a full image is inconclusive.
pub fn surjectivity_window(n: &Nuca, e: &FiniteSubset, budget: Budget) -> Result<PropertyReport> {
    let q = n.alphabet_size();
    let phi = n.local_map(e)?;
    let bounds = |r: PropertyReport| r.bound("window_cells", e.len()).bound("budget", budget.0);
    let hit = match phi.image(budget) {
        Ok(h) => h,
        Err(err @ NucaError::BudgetExceeded { .. }) => {
            return Ok(PropertyReport::over_budget("surjective_window", budget, err).bound("window_cells", e.len()))
        }
        Err(err) => return Err(err),
    };
    Ok(match hit.iter().position(|&h| !h) {
        Some(miss) => {
            let mut w = vec![0 as Letter; e.len()];
            index_to_word(miss as u64, q, &mut w);
            bounds(PropertyReport::new("surjective_window", Verdict::Refuted))
                .with_witness(Witness::Unreached(Pattern::from_word(&e.to_vec(), &w)))
        }
        None => bounds(PropertyReport::new("surjective_window", Verdict::Inconclusive))
            .with_note("every pattern on the window is reached"),
    })
}

/// Post-surjectivity. Exact on finite universes (equivalent to surjectivity).
///
/// On infinite universes: for every background letter, every `x` with
/// exceptions in `D = ball(r_defect)` and every `y` obtained from `σ(x)` by
/// rewriting `D`, look for `z` equal to `x` off `C = ball(r_correction)` with
/// `σ(z) = y`. Equality only needs checking on `C M^-1 ∪ D`. A pair with no
/// such `z` is reported as a refutation within these radii.
pub fn post_surjectivity_check(n: &Nuca, r_defect: usize, r_correction: usize, budget: Budget) -> Result<PropertyReport> {
    let u = n.universe();
    if u.is_finite() {
        let mut r = surjectivity_oracle(n, budget)?;
        r.property = "post_surjective".into();
        return Ok(r);
    }
    let q = n.alphabet_size();
    let d = u.ball(r_defect);
    let c = u.ball(r_correction).union(&d);
    let minv = u.inverse_set(&n.memory().as_set());
    let region = u.product_unchecked(&c, &minv).union(&d);
    let region_v = region.to_vec();
    let d_v = d.to_vec();
    let c_v = c.to_vec();
    // per background and defect: every correction plus every rewrite of D
    let total = word_count(q, d.len())
        .zip(word_count(q, c.len()))
        .and_then(|(nd, nc)| (q as u64).checked_mul(nd)?.checked_mul(nd.checked_add(nc)?));
    let bounded = |r: PropertyReport| {
        r.bound("r_defect", r_defect).bound("r_correction", r_correction).bound("budget", budget.0)
    };
    if total.map_or(true, |t| t > budget.0) {
        return Ok(bounded(PropertyReport::new("post_surjective", Verdict::Inconclusive))
            .with_note("enumeration exceeds the budget"));
    }
    let mut failure = None;
    'outer: for b in 0..q as Letter {
        let mut xw = vec![0 as Letter; d_v.len()];
        loop {
            let x = Configuration::new(u, b, Pattern::from_word(&d_v, &xw))?;
            let sx = n.evaluate(&x)?;
            // image of every correction, restricted to the region
            let mut reachable: HashMap<Vec<Letter>, ()> = HashMap::new();
            let mut zw = vec![0 as Letter; c_v.len()];
            loop {
                let z = x.with_pattern(&Pattern::from_word(&c_v, &zw))?;
                let sz = n.evaluate(&z)?;
                reachable.insert(region_v.iter().map(|g| sz.get(g)).collect(), ());
                if !crate::words::next_word(&mut zw, q) {
                    break;
                }
            }
            let mut yw = vec![0 as Letter; d_v.len()];
            loop {
                let y = sx.with_pattern(&Pattern::from_word(&d_v, &yw))?;
                let key: Vec<Letter> = region_v.iter().map(|g| y.get(g)).collect();
                if !reachable.contains_key(&key) {
                    failure = Some(Witness::NoCorrection { x: x.clone(), y });
                    break 'outer;
                }
                if !crate::words::next_word(&mut yw, q) {
                    break;
                }
            }
            if !crate::words::next_word(&mut xw, q) {
                break;
            }
        }
    }
    Ok(match failure {
        Some(w) => bounded(PropertyReport::new("post_surjective", Verdict::Refuted))
            .with_witness(w)
            .with_note("no correction exists inside the correction ball"),
        None => bounded(PropertyReport::new("post_surjective", Verdict::Inconclusive))
            .with_note("every sampled defect was corrected"),
    })
}

/// Pre-injectivity. Exact on finite universes (equivalent to injectivity).
///
/// On infinite universes: all pairs `x != y` sharing a background letter
/// with exceptions in `B = ball(r)`. Their images can only differ on
/// `B M^-1`, so a collision there is a genuine refutation.
pub fn pre_injectivity_check(n: &Nuca, r: usize, budget: Budget) -> Result<PropertyReport> {
    let u = n.universe();
    if u.is_finite() {
        let mut rep = injectivity_oracle(n, budget)?;
        rep.property = "pre_injective".into();
        return Ok(rep);
    }
    let q = n.alphabet_size();
    let b = u.ball(r);
    let b_v = b.to_vec();
    let region = u.product_unchecked(&b, &u.inverse_set(&n.memory().as_set())).to_vec();
    let bounded = |rep: PropertyReport| rep.bound("radius", r).bound("budget", budget.0);
    if word_count(q, b.len()).and_then(|k| k.checked_mul(q as u64)).map_or(true, |k| k > budget.0) {
        return Ok(bounded(PropertyReport::new("pre_injective", Verdict::Inconclusive))
            .with_note("enumeration exceeds the budget"));
    }
    for bg in 0..q as Letter {
        let mut seen: HashMap<Vec<Letter>, Configuration> = HashMap::new();
        let mut found = None;
        let mut err = None;
        for_each_word(q, b_v.len(), |w| {
            if found.is_some() || err.is_some() {
                return;
            }
            let mut step = || -> Result<()> {
                let x = Configuration::new(u, bg, Pattern::from_word(&b_v, w))?;
                let sx = n.evaluate(&x)?;
                let key: Vec<Letter> = region.iter().map(|g| sx.get(g)).collect();
                match seen.get(&key) {
                    Some(prev) => found = Some(Witness::Collision { x: prev.clone(), y: x, image: sx }),
                    None => {
                        seen.insert(key, x);
                    }
                }
                Ok(())
            };
            if let Err(e) = step() {
                err = Some(e);
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(w) = found {
            return Ok(bounded(PropertyReport::new("pre_injective", Verdict::Refuted)).with_witness(w));
        }
    }
    Ok(bounded(PropertyReport::new("pre_injective", Verdict::Inconclusive))
        .with_note("no asymptotic collision inside the ball"))
}

/// Exact check of one property on a finite universe.
pub fn finite_check(n: &Nuca, property: Property, budget: Budget) -> Result<PropertyReport> {
    let mut rep = match property {
        Property::Injective | Property::PreInjective | Property::Invertible => injectivity_oracle(n, budget)?,
        Property::Surjective | Property::PostSurjective => surjectivity_oracle(n, budget)?,
    };
    rep.property = property.name().to_string();
    Ok(rep)
}

/// Runs the exact check on `σ_{gs}` for every `g` of a finite universe; the
/// stable property holds iff it holds for every translate.
pub fn stable_sweep(n: &Nuca, property: Property, budget: Budget) -> Result<PropertyReport> {
    let u = n.universe();
    let cells = require_finite(u)?;
    let name = format!("stable_{}", property.name());
    for g in &cells {
        let rep = finite_check(&n.shifted(g)?, property, budget)?;
        match rep.verdict {
            Verdict::Holds => {}
            Verdict::Refuted => {
                let inner = rep.witness.expect("refutations carry witnesses");
                return Ok(PropertyReport::new(&name, Verdict::Refuted)
                    .with_witness(Witness::Translate { g: g.clone(), inner: Box::new(inner) })
                    .bound("translates", cells.len()));
            }
            Verdict::Inconclusive => {
                let mut rep = rep;
                rep.property = name;
                return Ok(rep);
            }
        }
    }
    Ok(PropertyReport::new(&name, Verdict::Holds).bound("translates", cells.len()))
}
