//! Injectivity, surjectivity windows and the bounded post-surjectivity and
//! pre-injectivity checks on a few classical rules.

use nuca::decide::{
    injectivity_oracle, post_surjectivity_check, pre_injectivity_check, reversibility_search, stable_sweep,
    surjectivity_window, Property,
};
use nuca::{Budget, GroupUniverse, LocalRule, Memory, Nuca};

fn main() -> nuca::Result<()> {
    let b = Budget::default();
    let z3 = GroupUniverse::cyclic(3)?;
    let m3 = Memory::new(&z3, vec![z3.element([0])?, z3.element([1])?])?;
    let xor3 = Nuca::uniform(&z3, LocalRule::from_fn(2, m3, |v| v[0] ^ v[1])?)?;
    show("xor on Z/3, injective", injectivity_oracle(&xor3, b)?);
    show("xor on Z/3, window ball(1)", surjectivity_window(&xor3, &z3.ball(1), b)?);
    show("xor on Z/3, stable invertible", stable_sweep(&xor3, Property::Invertible, b)?);

    let z = GroupUniverse::integers();
    let m = Memory::new(&z, vec![z.element([0])?, z.element([1])?])?;
    let xor = Nuca::uniform(&z, LocalRule::from_fn(2, m.clone(), |v| v[0] ^ v[1])?)?;
    show("xor on Z, pre-injective r=2", pre_injectivity_check(&xor, 2, b)?);
    show("xor on Z, post-surjective (1,2)", post_surjectivity_check(&xor, 1, 2, b)?);
    show("xor on Z, reversible r<=2", reversibility_search(&xor, 2, b)?.report());
    let and = Nuca::uniform(&z, LocalRule::from_fn(2, m, |v| v[0] & v[1])?)?;
    show("and on Z, window ball(1)", surjectivity_window(&and, &z.ball(1), b)?);
    show("and on Z, pre-injective r=1", pre_injectivity_check(&and, 1, b)?);
    Ok(())
}

fn show(label: &str, r: nuca::decide::PropertyReport) {
    print!("{label:34} {}", r.verdict);
    if let Some(w) = &r.witness {
        print!("  witness: {w}");
    }
    println!();
}
