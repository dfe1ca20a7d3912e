//! Load a plain-text experiment, round-trip it and run the command-line
//! front end on it in-process.

use nuca::spec::ExperimentSpec;
use nuca::Budget;

const SPEC: &str = "\
universe Z
alphabet 2
rule id memory=[(0),(1)] table=0011
rule xor memory=[(0),(1)] table=0110
background=id
exception (0) = xor
rmax=2
";

fn main() -> nuca::Result<()> {
    let spec = ExperimentSpec::parse(SPEC)?;
    print!("{spec}");
    println!("digest {}", spec.digest());
    println!("round trip: {}", ExperimentSpec::parse(&spec.to_string())? == spec);
    let n = spec.nuca(Budget::default())?;
    println!("{n}");

    let path = std::env::temp_dir().join("nuca_example_spec.nuca");
    std::fs::write(&path, SPEC).expect("temp dir is writable");
    let out = nuca::cli::run(["nuca", "check", "reversible", "--spec", path.to_str().expect("utf-8 path")]);
    print!("{}", out.stdout);
    Ok(())
}
