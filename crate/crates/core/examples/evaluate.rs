//! Evaluate a non-uniform automaton on a finite configuration and on a window.

use std::collections::BTreeMap;

use nuca::{Configuration, GroupUniverse, LocalRule, Memory, Nuca, Pattern, RuleConfiguration};

fn main() -> nuca::Result<()> {
    let z = GroupUniverse::integers();
    let el = |c: i64| z.element([c]);
    let memory = Memory::new(&z, vec![el(0)?, el(1)?])?;

    // identity everywhere, XOR with the right neighbour at 0 and 3
    let id = LocalRule::projection(2, memory.clone(), &z)?;
    let xor = LocalRule::from_fn(2, memory, |v| v[0] ^ v[1])?;
    let exceptions: BTreeMap<_, _> = [(el(0)?, xor.clone()), (el(3)?, xor)].into();
    let s = Nuca::new(RuleConfiguration::asymptotically_constant(&z, id, exceptions)?)?;

    let x = Configuration::new(&z, 0, [(el(1)?, 1), (el(4)?, 1)].into_iter().collect::<Pattern>())?;
    println!("x        = {x}");
    println!("sigma(x) = {}", s.evaluate(&x)?);

    // the same map on the window ball(2), reading ball(2)·M
    let e = z.ball(2);
    let need = z.product_set(&e, &s.memory().as_set())?;
    println!("window   = {}", s.evaluate_window(&x.restrict(&need), &e)?);
    println!("local map: {} inputs -> {} outputs", s.local_map(&e)?.domain().len(), e.len());
    Ok(())
}
