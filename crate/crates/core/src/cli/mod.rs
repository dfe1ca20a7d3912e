//! The `nuca` command line: spec loading, dispatch and report emission.

pub mod suites;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decide::{
    finite_check, perturbation_invert, post_surjectivity_check, pre_injectivity_check, reversibility_search,
    stable_sweep, surjectivity_window, ubs_localize, PerturbationOutcome, Property, PropertyReport, Reversibility,
    Verdict,
};
use crate::engine::{async_run, compose, layout_name, Nuca};
use crate::error::{NucaError, Result};
use crate::linear;
use crate::spec::{parse_schedule, ExperimentSpec, PatternFile};
use crate::words::Budget;

/// Exit code for usage and parse errors.
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "nuca", version, about = "Non-uniform cellular automata: evaluate, compose, check, invert")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Enumeration budget; overrides the spec and NUCA_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply an automaton to a pattern.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Evaluate on ball(r) only, reading ball(r)·M from the input.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a spec for outer ∘ inner.
    Compose {
        #[arg(long)]
        outer: PathBuf,
        #[arg(long)]
        inner: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a rule asynchronously along an update schedule.
    Async {
        /// Spec whose background rule is applied.
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        /// Initial pattern; all zeros when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide or bound one property.
    Check {
        property: CheckKind,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rmax: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        rdefect: Option<usize>,
        #[arg(long)]
        rcorrection: Option<usize>,
        /// Property swept over translates by `check stable`.
        #[arg(long = "property", default_value = "invertible")]
        sweep: String,
    },
    /// Invert a local perturbation of an invertible cellular automaton.
    Invert {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rmax: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace a left-invertible automaton by local perturbations agreeing on a window.
    Localize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        inverse: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        /// Search limit for the singularity radius.
        #[arg(long, default_value_t = 200)]
        limit: usize,
        /// Writes p here and q next to it with a `.inverse` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dual of a linear automaton.
    Dual {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify { suite: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Injective,
    SurjectiveWindow,
    Reversible,
    PostSurjective,
    PreInjective,
    Stable,
}

/// Ordered key-value report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub fields: Vec<(String, String)>,
    pub verdict: Option<Verdict>,
    pub exit_code: i32,
}

impl Report {
    fn new(command: &str) -> Self {
        Report { command: command.to_string(), ..Report::default() }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    fn spec(&mut self, key: &str, path: &Path, spec: &ExperimentSpec) {
        self.set(key, path.display());
        self.set(&format!("{key}_digest"), spec.digest());
    }

    fn property(&mut self, rep: &PropertyReport) {
        self.set("property", &rep.property);
        for (k, v) in &rep.bounds {
            if !self.fields.iter().any(|(key, _)| key == k) {
                self.set(k, v);
            }
        }
        if let Some(w) = &rep.witness {
            self.set("witness", w);
        }
        if let Some(n) = &rep.note {
            self.set("note", n);
        }
        self.verdict = Some(rep.verdict);
        self.exit_code = rep.verdict.exit_code();
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("command={}\n", self.command);
        for (k, v) in &self.fields {
            out.push_str(&format!("{k}={v}\n"));
        }
        if let Some(v) = self.verdict {
            out.push_str(&format!("verdict={v}\n"));
        }
        out.push_str(&format!("exit={}\n", self.exit_code));
        out
    }

    pub fn render_json(&self) -> String {
        let fields: serde_json::Map<String, serde_json::Value> =
            self.fields.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let value = serde_json::json!({
            "command": self.command,
            "fields": fields,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
        });
        serde_json::to_string_pretty(&value).expect("report serializes") + "\n"
    }
}

/// What the binary prints and returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let json = cli.json;
    match execute(cli) {
        Ok(report) => Outcome {
            stdout: if json { report.render_json() } else { report.render_text() },
            stderr: String::new(),
            code: report.exit_code,
        },
        Err(e) => {
            let code = match e {
                NucaError::BudgetExceeded { .. } | NucaError::UbsExhausted(_) => Verdict::Inconclusive.exit_code(),
                NucaError::Internal(_) => 70,
                _ => EXIT_USAGE,
            };
            Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| NucaError::parse(0, "file", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| NucaError::Unsupported(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ExperimentSpec> {
    ExperimentSpec::parse(&read(path)?).map_err(|e| match e {
        NucaError::Parse { line, field, message } => {
            NucaError::parse(line, field, format!("{}: {message}", path.display()))
        }
        other => other,
    })
}

fn budget(flag: Option<u64>, spec: Option<&ExperimentSpec>) -> Budget {
    match (flag, spec.and_then(|s| s.params.budget)) {
        (Some(b), _) => Budget(b),
        (None, Some(b)) if std::env::var_os("NUCA_BUDGET").is_none() => Budget(b),
        _ => Budget::from_env(),
    }
}

fn execute(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Eval { spec, input, window, out } => {
            let s = load(&spec)?;
            let b = budget(cli.budget, Some(&s));
            let n = s.nuca(b)?;
            let pat = PatternFile::parse(&s.universe, s.alphabet, &read(&input)?)?;
            let mut r = Report::new("eval");
            r.spec("spec", &spec, &s);
            let text = match window {
                Some(k) => {
                    let e = s.universe.ball(k);
                    let need = s.universe.product_unchecked(&e, &n.memory().as_set());
                    let x = pat.configuration(&s.universe)?.restrict(&need);
                    r.set("window", k);
                    n.evaluate_window(&x, &e)?.to_string()
                }
                None => n.evaluate(&pat.configuration(&s.universe)?)?.to_string(),
            };
            r.set("output", &text);
            if let Some(o) = out {
                write(&o, &(text + "\n"))?;
                r.set("out", o.display());
            }
            Ok(r)
        }
        Command::Compose { outer, inner, out } => {
            let (so, si) = (load(&outer)?, load(&inner)?);
            let b = budget(cli.budget, Some(&so));
            let q = compose(&so.nuca(b)?, &si.nuca(b)?, b)?;
            let spec = ExperimentSpec::from_nuca(&q);
            let mut r = Report::new("compose");
            r.spec("outer", &outer, &so);
            r.spec("inner", &inner, &si);
            r.set("memory", q.memory());
            r.set("layout", layout_name(q.rules()));
            r.set("result_digest", spec.digest());
            emit_spec(&mut r, out.as_deref(), &spec)?;
            Ok(r)
        }
        Command::Async { rule, schedule, steps, input, out } => {
            let s = load(&rule)?;
            let b = budget(cli.budget, Some(&s));
            let mu = s.nuca(b)?.rules().background().clone();
            let sched = parse_schedule(&s.universe, &read(&schedule)?)?;
            let steps = steps.or(s.params.steps).unwrap_or(sched.len());
            let x0 = match input {
                Some(p) => PatternFile::parse(&s.universe, s.alphabet, &read(&p)?)?.configuration(&s.universe)?,
                None => crate::configuration::Configuration::constant(&s.universe, 0),
            };
            let x = async_run(&mu, &s.universe, &sched, &x0, steps)?;
            let mut r = Report::new("async");
            r.spec("rule", &rule, &s);
            r.set("schedule_length", sched.len());
            r.set("steps", steps);
            r.set("output", &x);
            if let Some(o) = out {
                write(&o, &format!("{x}\n"))?;
                r.set("out", o.display());
            }
            Ok(r)
        }
        Command::Check { property, spec, rmax, window, rdefect, rcorrection, sweep } => {
            let s = load(&spec)?;
            let b = budget(cli.budget, Some(&s));
            let n = s.nuca(b)?;
            let p = &s.params;
            let rmax = rmax.or(p.rmax).unwrap_or(2);
            let window = window.or(p.window).unwrap_or(2);
            let mut r = Report::new("check");
            r.spec("spec", &spec, &s);
            r.set("universe", &s.universe);
            r.set("layout", layout_name(n.rules()));
            r.set("budget", b.0);
            let rep = match property {
                CheckKind::Injective => injective(&n, rmax, window, b)?,
                CheckKind::SurjectiveWindow => {
                    r.set("radius", window);
                    surjectivity_window(&n, &s.universe.ball(window), b)?
                }
                CheckKind::Reversible => reversibility_search(&n, rmax, b)?.report(),
                CheckKind::PostSurjective => post_surjectivity_check(
                    &n,
                    rdefect.or(p.rdefect).unwrap_or(1),
                    rcorrection.or(p.rcorrection).unwrap_or(window),
                    b,
                )?,
                CheckKind::PreInjective => pre_injectivity_check(&n, window, b)?,
                CheckKind::Stable => {
                    let prop: Property = sweep.parse()?;
                    if s.universe.is_finite() {
                        stable_sweep(&n, prop, b)?
                    } else if prop == Property::Injective {
                        // stable injectivity is reversibility
                        let mut rep = reversibility_search(&n, rmax, b)?.report();
                        rep.property = "stable_injective".into();
                        rep
                    } else {
                        PropertyReport::new(&format!("stable_{}", prop.name()), Verdict::Inconclusive)
                            .with_note("translates of an infinite universe cannot be swept")
                    }
                }
            };
            r.property(&rep);
            Ok(r)
        }
        Command::Invert { spec, rmax, out } => {
            let s = load(&spec)?;
            let b = budget(cli.budget, Some(&s));
            let n = s.nuca(b)?;
            let rmax = rmax.or(s.params.rmax).unwrap_or(2);
            let mut r = Report::new("invert");
            r.spec("spec", &spec, &s);
            r.set("rmax", rmax);
            r.set("budget", b.0);
            let outcome = perturbation_invert(&n, rmax, b)?;
            r.property(&outcome.report());
            if let PerturbationOutcome::Inverted(inv) = &outcome {
                match &inv.flattened {
                    Some(flat) => {
                        let inv_spec = ExperimentSpec::from_nuca(flat);
                        r.set("inverse_memory", flat.memory());
                        r.set("inverse_digest", inv_spec.digest());
                        emit_spec(&mut r, out.as_deref(), &inv_spec)?;
                    }
                    None => r.set("inverse", "kept as stages; flattening exceeds the budget"),
                }
            }
            Ok(r)
        }
        Command::Localize { spec, inverse, window, limit, out } => {
            let (ss, st) = (load(&spec)?, load(&inverse)?);
            let b = budget(cli.budget, Some(&ss));
            let k = window.or(ss.params.window).unwrap_or(1);
            let e = ss.universe.ball(k);
            let l = ubs_localize(&ss.nuca(b)?, &st.nuca(b)?, &e, limit, b)?;
            let mut r = Report::new("localize");
            r.spec("spec", &spec, &ss);
            r.spec("inverse", &inverse, &st);
            r.set("window", k);
            r.set("enlarged_window", &l.window);
            r.set("f_radius", ss.universe.radius_of(&l.f));
            r.set("g0", &l.g0);
            let (ps, qs) = (ExperimentSpec::from_nuca(&l.p), ExperimentSpec::from_nuca(&l.q));
            r.set("p_digest", ps.digest());
            r.set("q_digest", qs.digest());
            if let Some(o) = out {
                write(&o, &ps.to_string())?;
                let mut qo = o.clone().into_os_string();
                qo.push(".inverse");
                write(Path::new(&qo), &qs.to_string())?;
                r.set("out", o.display());
            }
            r.verdict = Some(Verdict::Holds);
            Ok(r)
        }
        Command::Dual { spec, out } => {
            let s = load(&spec)?;
            let lin = s
                .linear_configuration()?
                .ok_or_else(|| NucaError::Unsupported("dual needs every rule declared with `linrule`".into()))?;
            let d = linear::dual(&lin)?;
            let ds = ExperimentSpec::from_linear(&d);
            let mut r = Report::new("dual");
            r.spec("spec", &spec, &s);
            r.set("dual_memory", d.memory());
            r.set("dual_digest", ds.digest());
            match linear::double_dual_check(&lin)? {
                None => {
                    r.set("double_dual", "holds");
                    r.verdict = Some(Verdict::Holds);
                }
                Some(m) => {
                    r.set("witness", format!("cell={} memory={} expected={} found={}", m.cell, m.memory_cell, m.expected, m.found));
                    r.verdict = Some(Verdict::Refuted);
                    r.exit_code = 1;
                }
            }
            emit_spec(&mut r, out.as_deref(), &ds)?;
            Ok(r)
        }
        Command::Verify { suite } => {
            let seed = cli.seed.unwrap_or(0);
            let b = budget(cli.budget, None);
            let results = suites::run_suite(&suite, seed, b)?;
            let mut r = Report::new("verify");
            r.set("suite", &suite);
            r.set("seed", seed);
            r.set("budget", b.0);
            let mut all = true;
            for c in &results {
                let status = if c.passed { "pass" } else { "fail" };
                let mut line = format!("{status} cases={}", c.cases);
                if !c.detail.is_empty() {
                    line.push_str(&format!(" {}", c.detail));
                }
                r.set(&format!("{}.{}", c.suite, c.name), line);
                all &= c.passed;
            }
            r.verdict = Some(if all { Verdict::Holds } else { Verdict::Refuted });
            r.exit_code = if all { 0 } else { 1 };
            Ok(r)
        }
    }
}

/// Injectivity: exact on finite universes. Otherwise an asymptotic collision
/// refutes, a left inverse proves, and anything else is inconclusive.
fn injective(n: &Nuca, rmax: usize, window: usize, b: Budget) -> Result<PropertyReport> {
    if n.universe().is_finite() {
        return finite_check(n, Property::Injective, b);
    }
    let pre = pre_injectivity_check(n, window, b)?;
    if pre.refuted() {
        let mut pre = pre;
        pre.property = "injective".into();
        return Ok(pre);
    }
    Ok(match reversibility_search(n, rmax, b)? {
        Reversibility::Found { radius, .. } => PropertyReport::new("injective", Verdict::Holds)
            .bound("left_inverse_radius", radius)
            .with_note("a left inverse exists"),
        _ => PropertyReport::new("injective", Verdict::Inconclusive)
            .bound("radius", window)
            .bound("r_max", rmax)
            .with_note("no collision and no left inverse within the bounds"),
    })
}

fn emit_spec(r: &mut Report, out: Option<&Path>, spec: &ExperimentSpec) -> Result<()> {
    if let Some(o) = out {
        write(o, &spec.to_string())?;
        r.set("out", o.display());
    }
    Ok(())
}
