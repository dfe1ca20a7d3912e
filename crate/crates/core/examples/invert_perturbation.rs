//! Invert a local perturbation of the shift and check the inverse on a window.

use nuca::decide::{check_inverse_on_window, perturbation_invert, PerturbationOutcome};
use nuca::{identity_check, Budget, GroupUniverse, LocalRule, Memory, Nuca, RuleConfiguration};

fn main() -> nuca::Result<()> {
    let z = GroupUniverse::integers();
    let el = |c: i64| z.element([c]);
    let m = Memory::new(&z, vec![el(0)?, el(1)?])?;
    let shift = LocalRule::reader(2, m.clone(), &el(1)?)?;
    // at the origin: x(0) XOR x(1), still a bijection in x(1)
    let xor = LocalRule::from_fn(2, m, |v| v[0] ^ v[1])?;
    let s = Nuca::new(RuleConfiguration::asymptotically_constant(&z, shift, [(el(0)?, xor)].into())?)?;

    let budget = Budget::from_env();
    match perturbation_invert(&s, 2, budget)? {
        PerturbationOutcome::Inverted(inv) => {
            println!("inverse found in {} stages", inv.stages.len());
            if let Some(flat) = &inv.flattened {
                println!("flattened: memory {}, exceptional cells {}", flat.memory(), flat.exception_support().unwrap_or_default());
                let both = identity_check(flat, &s, budget)?.holds() && identity_check(&s, flat, budget)?.holds();
                println!("flattened inverse on both sides: {both}");
            }
            let failure = check_inverse_on_window(&s, &inv, 3, budget)?;
            println!("both orders on ball(3): {}", if failure.is_none() { "identity" } else { "FAILED" });
        }
        PerturbationOutcome::NotInjective { x, y, image } => println!("collision {x} / {y} -> {image}"),
        PerturbationOutcome::Inconclusive(why) => println!("inconclusive: {why}"),
    }
    Ok(())
}
