//! Compose two automata into one with memory MN and compare on Z/6.

use nuca::words::for_each_word;
use nuca::{compose, Budget, Configuration, GroupUniverse, LocalRule, Memory, Nuca, RuleConfiguration};

fn main() -> nuca::Result<()> {
    let u = GroupUniverse::cyclic(6)?;
    let el = |c: i64| u.element([c]);
    let m = Memory::new(&u, vec![el(0)?, el(1)?])?;
    let shift = Nuca::uniform(&u, LocalRule::reader(2, m.clone(), &el(1)?)?)?;
    let xor = LocalRule::from_fn(2, m.clone(), |v| v[0] ^ v[1])?;
    let id = LocalRule::projection(2, m, &u)?;
    let perturbed = Nuca::new(RuleConfiguration::asymptotically_constant(&u, id, [(el(2)?, xor)].into())?)?;

    let q = compose(&shift, &perturbed, Budget::default())?;
    println!("shift ∘ perturbed: memory {}", q.memory());
    for g in u.enumerate_all()? {
        println!("  q({g}) = {}", q.rule_at(&g).table_string());
    }

    let mut agree = 0;
    for_each_word(2, 6, |w| {
        let x = Configuration::from_dense(&u, w).unwrap();
        if q.evaluate(&x).unwrap() == shift.evaluate(&perturbed.evaluate(&x).unwrap()).unwrap() {
            agree += 1;
        }
    });
    println!("agreement on {agree}/64 configurations");
    Ok(())
}
