//! Localize an involution whose XOR cells sit on the sparse sites ±4^k.

use std::collections::BTreeMap;

use nuca::decide::ubs_localize;
use nuca::{identity_check, Budget, GroupUniverse, LocalRule, Memory, Nuca, RuleConfiguration};

fn main() -> nuca::Result<()> {
    let z = GroupUniverse::integers();
    let m = Memory::new(&z, vec![z.element([0])?, z.element([1])?])?;
    let id = LocalRule::projection(2, m.clone(), &z)?;
    let xor = LocalRule::from_fn(2, m, |v| v[0] ^ v[1])?;
    let s = Nuca::new(RuleConfiguration::sparse_singular(&z, id, 4, xor, BTreeMap::new())?)?;

    for k in 1..=3 {
        let e = z.ball(k);
        let out = ubs_localize(&s, &s, &e, 200, Budget::default())?;
        let sites = out.p.exception_support().unwrap_or_default();
        println!(
            "E = ball({k}): F radius {}, g0 = {}, p has {} exceptional cells {}, q∘p = id: {}",
            z.radius_of(&out.f),
            out.g0,
            sites.len(),
            sites,
            identity_check(&out.q, &out.p, Budget::default())?.holds()
        );
    }
    Ok(())
}
