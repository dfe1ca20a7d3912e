//! Asynchronous updates: full-universe steps give the synchronous iterate,
//! an alternating schedule does not.

use nuca::{async_run, Configuration, FiniteSubset, GroupUniverse, LocalRule, Memory, Nuca};

fn main() -> nuca::Result<()> {
    let u = GroupUniverse::cyclic(6)?;
    let memory = Memory::ball(&u, 1);
    // rule 110 on the memory (-1, 0, 1)
    let rule = LocalRule::from_fn(2, memory, |v| (110u8 >> (v[0] * 4 + v[1] * 2 + v[2])) & 1)?;
    let ca = Nuca::uniform(&u, rule.clone())?;
    let x0 = Configuration::from_dense(&u, &[0, 0, 0, 1, 0, 0])?;

    let all = u.enumerate_all()?;
    let mut sync = x0.clone();
    for _ in 0..4 {
        sync = ca.evaluate(&sync)?;
    }
    let full = async_run(&rule, &u, &[all], &x0, 4)?;
    println!("synchronous x4     {:?}", sync.to_dense()?);
    println!("all cells x4       {:?}", full.to_dense()?);

    let even: FiniteSubset = [0, 2, 4].iter().map(|&c| u.element([c])).collect::<nuca::Result<_>>()?;
    let odd: FiniteSubset = [1, 3, 5].iter().map(|&c| u.element([c])).collect::<nuca::Result<_>>()?;
    let alt = async_run(&rule, &u, &[even, odd], &x0, 8)?;
    println!("even/odd x8        {:?}", alt.to_dense()?);
    Ok(())
}
