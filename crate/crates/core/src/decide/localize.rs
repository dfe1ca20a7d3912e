//! Replacing a left-invertible automaton with uniformly bounded singularity
//! by asymptotically constant ones that agree on a window.

use std::collections::BTreeMap;

use crate::engine::{identity_check, identity_check_on, IdentityVerdict, Nuca};
use crate::error::{NucaError, Result};
use crate::rules::{verify_ubs, LocalRule, Memory, RuleConfiguration, UbsWitness};
use crate::universe::{Element, FiniteSubset};
use crate::words::Budget;

/// Result of [`ubs_localize`].
#[derive(Clone, Debug)]
pub struct Localized {
    pub p: Nuca,
    pub q: Nuca,
    /// The enlarged window actually used (`E ∪ E^-1 ∪ M ∪ {1}`).
    pub window: FiniteSubset,
    /// The set `F ⊇ E^3` on whose band `F E^3 \ F` the rules are constant.
    pub f: FiniteSubset,
    pub g0: Element,
}

/// Given `σ_t ∘ σ_s = Id` with `s` of uniformly bounded singularity, builds
/// asymptotically constant `p, q` with `p|_E = s|_E`, `q|_E = t|_E` and
/// `σ_q ∘ σ_p = Id`.
///
/// Both automata are first rewritten on the common symmetric memory `M`, and
/// `E` is enlarged to be symmetric and contain `M`. With `F` from
/// [`verify_ubs`] applied to `E^3` and `c` the rule on the band, `p` is `s` on
/// `FE` and `c` elsewhere; `q` is `t` on `FE` and `t(g_0)` elsewhere, where
/// `g_0` is the smallest cell of `FE^2 \ FE`.
///
/// For sparse singular `s` the hypothesis `σ_t ∘ σ_s = Id` can only be
/// checked cell by cell on the finite region `FE^3` the construction reads.
pub fn ubs_localize(
    s: &Nuca,
    t: &Nuca,
    e: &FiniteSubset,
    search_limit: usize,
    budget: Budget,
) -> Result<Localized> {
    let u = s.universe();
    if t.universe() != u {
        return Err(NucaError::Mismatch("s and t live on different universes".into()));
    }
    let mut mset = s.memory().as_set().union(&t.memory().as_set());
    mset = mset.union(&u.inverse_set(&mset));
    mset.insert(u.identity());
    let memory = Memory::from_set(&mset);
    let s = s.with_memory(&memory)?;
    let t = t.with_memory(&memory)?;

    let mut window = e.union(&u.inverse_set(e)).union(&mset);
    window.insert(u.identity());
    let e3 = u.product_unchecked(&u.product_unchecked(&window, &window), &window);
    let f = match verify_ubs(s.rules(), &e3, search_limit)? {
        UbsWitness::Found(f) => f,
        UbsWitness::Exhausted(limit) => return Err(NucaError::UbsExhausted(limit)),
    };
    let fe = u.product_unchecked(&f, &window);
    let fe2 = u.product_unchecked(&fe, &window);
    let fe3 = u.product_unchecked(&fe2, &window);
    let band = fe3.difference(&f);
    let c = band
        .first()
        .map(|g| s.rule_at(g).clone())
        .unwrap_or_else(|| s.rules().background().clone());

    check_hypothesis(&s, &t, &fe3, budget)?;

    let g0 = fe2
        .difference(&fe)
        .first()
        .cloned()
        .ok_or_else(|| NucaError::Internal("FE^2 \\ FE is empty".into()))?;
    let p_rules: BTreeMap<Element, LocalRule> = fe.iter().map(|g| (g.clone(), s.rule_at(g).clone())).collect();
    let q_rules: BTreeMap<Element, LocalRule> = fe.iter().map(|g| (g.clone(), t.rule_at(g).clone())).collect();
    let p = Nuca::new(RuleConfiguration::asymptotically_constant(u, c, p_rules)?)?;
    let q = Nuca::new(RuleConfiguration::asymptotically_constant(u, t.rule_at(&g0).clone(), q_rules)?)?;
    if !identity_check(&q, &p, budget)?.holds() {
        return Err(NucaError::Internal("localized pair fails the identity check".into()));
    }
    Ok(Localized { p, q, window, f, g0 })
}

fn check_hypothesis(s: &Nuca, t: &Nuca, region: &FiniteSubset, budget: Budget) -> Result<()> {
    let u = s.universe();
    let sparse = s.rules().is_sparse() || t.rules().is_sparse();
    let verdict = if sparse {
        let cells: Vec<(Element, bool)> = region.iter().map(|g| (g.clone(), false)).collect();
        identity_check_on(t, s, &cells, budget)?
    } else {
        identity_check(t, s, budget)?
    };
    match verdict {
        IdentityVerdict::Holds => Ok(()),
        IdentityVerdict::Counterexample { cell, .. } => Err(NucaError::Precondition {
            cell,
            reason: format!("σ_t ∘ σ_s is not the identity on {u}"),
        }),
    }
}
