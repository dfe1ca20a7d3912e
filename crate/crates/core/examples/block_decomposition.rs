//! Split an automaton on Z/2 x Z/3 whose memory stays inside the Z/3 factor
//! into a product of two block maps.

use nuca::decide::{finite_check, product_split, Property};
use nuca::{Budget, FiniteSubset, GroupUniverse, LocalRule, Memory, Nuca, RuleConfiguration};

fn main() -> nuca::Result<()> {
    let u = GroupUniverse::new(0, vec![2, 3])?;
    let memory = Memory::new(&u, vec![u.element([0, 0])?, u.element([0, 1])?])?;
    let id = LocalRule::projection(2, memory.clone(), &u)?;
    let xor = LocalRule::from_fn(2, memory.clone(), |v| v[0] ^ v[1])?;
    let and = LocalRule::from_fn(2, memory, |v| v[0] & v[1])?;
    let s = Nuca::new(RuleConfiguration::asymptotically_constant(
        &u,
        id,
        [(u.element([0, 0])?, xor), (u.element([1, 2])?, and)].into(),
    )?)?;

    let e: FiniteSubset = (0..3).map(|j| u.element([0, j])).collect::<nuca::Result<_>>()?;
    let (phi, psi) = product_split(&s, &e)?;
    let b = Budget::default();
    let onto = |m: &nuca::BlockMap| m.image(b).map(|h| h.iter().all(|&x| x));
    println!("Φ on {e}: bijective {}", onto(&phi)?);
    println!("Ψ on the rest: bijective {}", onto(&psi)?);
    println!("σ invertible: {}", finite_check(&s, Property::Invertible, b)?.verdict);
    Ok(())
}
