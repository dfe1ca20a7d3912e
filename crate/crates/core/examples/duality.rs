//! Linear rules over F_2^2 on Z/3: the dual, the double dual and the
//! transpose relation between global matrices.

use std::collections::BTreeMap;

use nuca::linear::{double_dual_check, dual, global_matrix, FpMatrix, LinearAlphabet, LinearLocalRule, LinearRuleConfiguration};
use nuca::{Budget, GroupUniverse, Memory};

fn main() -> nuca::Result<()> {
    let u = GroupUniverse::cyclic(3)?;
    let a = LinearAlphabet::new(2, 2)?;
    let (e0, e1) = (u.element([0])?, u.element([1])?);
    let memory = Memory::new(&u, vec![e0.clone(), e1.clone()])?;
    let swap = FpMatrix::from_rows(2, &[vec![0, 1], vec![1, 0]])?;
    let shear = FpMatrix::from_rows(2, &[vec![1, 1], vec![0, 1]])?;
    let bg = LinearLocalRule::new(a, memory.clone(), [(e0.clone(), FpMatrix::identity(2, 2)), (e1.clone(), swap)].into())?;
    let ex = LinearLocalRule::new(a, memory, [(e0, shear)].into())?;
    let s = LinearRuleConfiguration::asymptotically_constant(&u, bg, BTreeMap::from([(u.element([2])?, ex)]))?;

    let d = dual(&s)?;
    println!("dual memory {}", d.memory());
    println!("s** = s: {}", double_dual_check(&s)?.is_none());
    let g = global_matrix(&s, Budget::default())?;
    let gd = global_matrix(&d, Budget::default())?;
    println!("global matrix of s     {g}");
    println!("global matrix of s*    {gd}");
    println!("transpose relation: {}", gd == g.transpose());
    println!("invertible: s {} / s* {}", g.is_invertible(), gd.is_invertible());
    Ok(())
}
