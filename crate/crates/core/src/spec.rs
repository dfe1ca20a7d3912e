//! The plain-text experiment format.
//!
//! ```text
//! # single XOR exception on the identity background
//! universe Z
//! alphabet 2
//! rule id memory=[(0),(1)] table=0011
//! rule x memory=[(0),(1)] table=0110
//! background=id
//! exception (0) = x
//! rmax=2
//! ```
//!
//! Linear rules use `linrule <name> p=2 n=1 memory=[(0),(1)] m(0)=[[1]] m(1)=[[1]]`
//! and may be referenced like table rules. `sparse base=4 rule=<name>` puts a
//! rule on every `±base^k`; `exception` lines then override single cells.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::configuration::{Configuration, Letter, Pattern};
use crate::engine::Nuca;
use crate::error::{NucaError, Result};
use crate::linear::{FpMatrix, LinearAlphabet, LinearLayout, LinearLocalRule, LinearRuleConfiguration};
use crate::rules::{LocalRule, Memory, RuleConfiguration, RuleLayout};
use crate::universe::{Element, FiniteSubset, GroupUniverse};
use crate::words::Budget;

/// A declared rule, kept in its source form so that serialization is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleDef {
    Table(LocalRule),
    Linear(LinearLocalRule),
}

impl RuleDef {
    pub fn memory(&self) -> &Memory {
        match self {
            RuleDef::Table(r) => r.memory(),
            RuleDef::Linear(r) => r.memory(),
        }
    }

    pub fn to_table(&self, budget: Budget) -> Result<LocalRule> {
        match self {
            RuleDef::Table(r) => Ok(r.clone()),
            RuleDef::Linear(r) => r.to_table(budget),
        }
    }
}

/// Numeric parameters consumed by the commands.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub rmax: Option<usize>,
    pub window: Option<usize>,
    pub rdefect: Option<usize>,
    pub rcorrection: Option<usize>,
    pub steps: Option<usize>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
}

const PARAM_KEYS: [&str; 7] = ["rmax", "window", "rdefect", "rcorrection", "steps", "budget", "seed"];

impl Params {
    fn set(&mut self, key: &str, value: u64) {
        let v = Some(value as usize);
        match key {
            "rmax" => self.rmax = v,
            "window" => self.window = v,
            "rdefect" => self.rdefect = v,
            "rcorrection" => self.rcorrection = v,
            "steps" => self.steps = v,
            "budget" => self.budget = Some(value),
            _ => self.seed = Some(value),
        }
    }

    fn entries(&self) -> Vec<(&'static str, u64)> {
        let vals = [
            self.rmax.map(|v| v as u64),
            self.window.map(|v| v as u64),
            self.rdefect.map(|v| v as u64),
            self.rcorrection.map(|v| v as u64),
            self.steps.map(|v| v as u64),
            self.budget,
            self.seed,
        ];
        PARAM_KEYS.iter().zip(vals).filter_map(|(k, v)| v.map(|v| (*k, v))).collect()
    }
}

/// A parsed experiment: universe, alphabet, named rules, rule configuration
/// and parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub universe: GroupUniverse,
    pub alphabet: usize,
    /// Declaration order is kept.
    pub rules: Vec<(String, RuleDef)>,
    pub background: String,
    pub sparse: Option<(i64, String)>,
    pub exceptions: BTreeMap<Element, String>,
    pub params: Params,
}

/// Splits on whitespace outside brackets and parentheses.
fn tokens(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in line.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth <= 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Re-labels a parse error with the line it came from.
fn at_line<T>(line: usize, field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        NucaError::Parse { message, .. } => NucaError::parse(line, field, message),
        other => NucaError::parse(line, field, other.to_string()),
    })
}

fn number<T: FromStr>(line: usize, field: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| NucaError::parse(line, field, format!("expected a number, got `{s}`")))
}

/// `[(0),(1)]`
pub fn parse_memory(universe: &GroupUniverse, s: &str) -> Result<Memory> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| NucaError::parse(0, "memory", format!("expected `[(..),..]`, got `{s}`")))?;
    let mut cells = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let end = rest
            .find(')')
            .ok_or_else(|| NucaError::parse(0, "memory", format!("unclosed element in `{s}`")))?;
        let e: Element = rest[..=end].parse()?;
        cells.push(universe.canonical(&e)?);
        rest = rest[end + 1..].trim_start().trim_start_matches(',').trim_start();
    }
    Memory::new(universe, cells)
}

/// Letters as single characters `0-9a-z`.
pub fn parse_table(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as Letter)
                .ok_or_else(|| NucaError::parse(0, "table", format!("bad letter `{c}`")))
        })
        .collect()
}

/// `[[1,0],[0,1]]`
fn parse_matrix(p: u32, s: &str) -> Result<FpMatrix> {
    let bad = || NucaError::parse(0, "matrix", format!("expected `[[..],..]`, got `{s}`"));
    let inner = s.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
    let mut rows = Vec::new();
    for chunk in inner.split(']') {
        let chunk = chunk.trim().trim_start_matches(',').trim();
        if chunk.is_empty() {
            continue;
        }
        let row = chunk.strip_prefix('[').ok_or_else(bad)?;
        let row = row
            .split(',')
            .map(|v| v.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    FpMatrix::from_rows(p, &rows)
}

fn key_value(tok: &str) -> Option<(&str, &str)> {
    tok.split_once('=')
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut universe: Option<GroupUniverse> = None;
        let mut alphabet: Option<usize> = None;
        let mut rules: Vec<(String, RuleDef)> = Vec::new();
        let mut background: Option<String> = None;
        let mut sparse = None;
        let mut exceptions = BTreeMap::new();
        let mut params = Params::default();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks = tokens(strip_comment(raw));
            let Some(head) = toks.first() else { continue };
            let need_universe = |field: &str| {
                universe
                    .clone()
                    .ok_or_else(|| NucaError::parse(line, field, "`universe` must come first"))
            };
            match head.as_str() {
                "universe" => {
                    let lit = toks[1..].join(" ");
                    universe = Some(at_line(line, "universe", lit.parse())?);
                }
                "alphabet" => {
                    let n = toks.get(1).ok_or_else(|| NucaError::parse(line, "alphabet", "missing size"))?;
                    let n: usize = number(line, "alphabet", n)?;
                    if n == 0 || n > 36 {
                        return Err(NucaError::parse(line, "alphabet", format!("size {n} is outside 1..=36")));
                    }
                    alphabet = Some(n);
                }
                "rule" => {
                    let u = need_universe("rule")?;
                    let q = alphabet.ok_or_else(|| NucaError::parse(line, "rule", "`alphabet` must come first"))?;
                    let name = toks.get(1).ok_or_else(|| NucaError::parse(line, "rule", "missing name"))?;
                    let mut memory = None;
                    let mut table = None;
                    for t in &toks[2..] {
                        match key_value(t) {
                            Some(("memory", v)) => memory = Some(at_line(line, "memory", parse_memory(&u, v))?),
                            Some(("table", v)) => table = Some(at_line(line, "table", parse_table(v))?),
                            _ => return Err(NucaError::parse(line, "rule", format!("unexpected `{t}`"))),
                        }
                    }
                    let memory = memory.ok_or_else(|| NucaError::parse(line, "memory", "missing"))?;
                    let table = table.ok_or_else(|| NucaError::parse(line, "table", "missing"))?;
                    let rule = at_line(line, "table", LocalRule::new(q, memory, table))?;
                    push_rule(&mut rules, line, name, RuleDef::Table(rule))?;
                }
                "linrule" => {
                    let u = need_universe("linrule")?;
                    let name = toks.get(1).ok_or_else(|| NucaError::parse(line, "linrule", "missing name"))?;
                    let (mut p, mut n, mut memory) = (None, None, None);
                    let mut raw_matrices = Vec::new();
                    for t in &toks[2..] {
                        match key_value(t) {
                            Some(("p", v)) => p = Some(number::<u32>(line, "p", v)?),
                            Some(("n", v)) => n = Some(number::<usize>(line, "n", v)?),
                            Some(("memory", v)) => memory = Some(at_line(line, "memory", parse_memory(&u, v))?),
                            Some((k, v)) if k.starts_with("m(") => {
                                let e: Element = at_line(line, k, k[1..].parse())?;
                                raw_matrices.push((k.to_string(), at_line(line, k, u.canonical(&e))?, v.to_string()));
                            }
                            _ => return Err(NucaError::parse(line, "linrule", format!("unexpected `{t}`"))),
                        }
                    }
                    let p = p.ok_or_else(|| NucaError::parse(line, "p", "missing"))?;
                    let n = n.ok_or_else(|| NucaError::parse(line, "n", "missing"))?;
                    let memory = memory.ok_or_else(|| NucaError::parse(line, "memory", "missing"))?;
                    let la = at_line(line, "p", LinearAlphabet::new(p, n))?;
                    match alphabet {
                        Some(q) if q != la.size() => {
                            return Err(NucaError::parse(line, "alphabet", format!("p^n = {} but alphabet is {q}", la.size())))
                        }
                        _ => alphabet = Some(la.size()),
                    }
                    let mut matrices = BTreeMap::new();
                    for (field, e, v) in raw_matrices {
                        matrices.insert(e, at_line(line, &field, parse_matrix(p, &v))?);
                    }
                    let rule = at_line(line, "linrule", LinearLocalRule::new(la, memory, matrices))?;
                    push_rule(&mut rules, line, name, RuleDef::Linear(rule))?;
                }
                "exception" => {
                    let u = need_universe("exception")?;
                    let (cell, name) = match toks.as_slice() {
                        [_, cell, eq, name] if eq == "=" => (cell.clone(), name.clone()),
                        [_, rest @ ..] => {
                            let joined = rest.join("");
                            let (c, n) = joined
                                .split_once('=')
                                .ok_or_else(|| NucaError::parse(line, "exception", "expected `exception (g) = name`"))?;
                            (c.to_string(), n.to_string())
                        }
                        _ => unreachable!(),
                    };
                    let e: Element = at_line(line, "exception", cell.parse())?;
                    let e = at_line(line, "exception", u.canonical(&e))?;
                    if exceptions.insert(e.clone(), name).is_some() {
                        return Err(NucaError::parse(line, "exception", format!("cell {e} assigned twice")));
                    }
                }
                "sparse" => {
                    let (mut base, mut rule) = (None, None);
                    for t in &toks[1..] {
                        match key_value(t) {
                            Some(("base", v)) => base = Some(number::<i64>(line, "base", v)?),
                            Some(("rule", v)) => rule = Some(v.to_string()),
                            _ => return Err(NucaError::parse(line, "sparse", format!("unexpected `{t}`"))),
                        }
                    }
                    let base = base.ok_or_else(|| NucaError::parse(line, "base", "missing"))?;
                    let rule = rule.ok_or_else(|| NucaError::parse(line, "rule", "missing"))?;
                    sparse = Some((base, rule));
                }
                _ => match key_value(head) {
                    Some(("background", v)) if toks.len() == 1 => background = Some(v.to_string()),
                    Some((k, v)) if toks.len() == 1 && PARAM_KEYS.contains(&k) => {
                        params.set(k, number(line, k, v)?);
                    }
                    _ => return Err(NucaError::parse(line, head, format!("unknown directive `{head}`"))),
                },
            }
        }

        let universe = universe.ok_or_else(|| NucaError::parse(0, "universe", "missing `universe` line"))?;
        let alphabet = alphabet.ok_or_else(|| NucaError::parse(0, "alphabet", "missing `alphabet` line"))?;
        let background = match background {
            Some(b) => b,
            None if rules.len() == 1 => rules[0].0.clone(),
            None => return Err(NucaError::parse(0, "background", "missing `background=` line")),
        };
        let spec = ExperimentSpec { universe, alphabet, rules, background, sparse, exceptions, params };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let mut names: Vec<&String> = vec![&self.background];
        names.extend(self.exceptions.values());
        if let Some((_, r)) = &self.sparse {
            names.push(r);
        }
        for n in names {
            if self.rule(n).is_none() {
                return Err(NucaError::parse(0, "rule", format!("unknown rule `{n}`")));
            }
        }
        self.rule_configuration(Budget::default())
            .map(|_| ())
            .map_err(|e| NucaError::parse(0, "configuration", e.to_string()))
    }

    pub fn rule(&self, name: &str) -> Option<&RuleDef> {
        self.rules.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    fn table_rule(&self, name: &str, budget: Budget) -> Result<LocalRule> {
        self.rule(name)
            .ok_or_else(|| NucaError::parse(0, "rule", format!("unknown rule `{name}`")))?
            .to_table(budget)
    }

    pub fn rule_configuration(&self, budget: Budget) -> Result<RuleConfiguration> {
        let u = &self.universe;
        let background = self.table_rule(&self.background, budget)?;
        let exceptions = self
            .exceptions
            .iter()
            .map(|(g, n)| Ok((g.clone(), self.table_rule(n, budget)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        match &self.sparse {
            Some((base, name)) => {
                RuleConfiguration::sparse_singular(u, background, *base, self.table_rule(name, budget)?, exceptions)
            }
            None => RuleConfiguration::asymptotically_constant(u, background, exceptions),
        }
    }

    pub fn nuca(&self, budget: Budget) -> Result<Nuca> {
        Nuca::new(self.rule_configuration(budget)?)
    }

    /// The linear form, when every referenced rule is declared with `linrule`.
    pub fn linear_configuration(&self) -> Result<Option<LinearRuleConfiguration>> {
        let linear = |name: &str| match self.rule(name) {
            Some(RuleDef::Linear(r)) => Some(r.clone()),
            _ => None,
        };
        let Some(background) = linear(&self.background) else { return Ok(None) };
        let mut exceptions = BTreeMap::new();
        for (g, n) in &self.exceptions {
            let Some(r) = linear(n) else { return Ok(None) };
            exceptions.insert(g.clone(), r);
        }
        match &self.sparse {
            Some((base, name)) => {
                let Some(singular) = linear(name) else { return Ok(None) };
                LinearRuleConfiguration::sparse_singular(&self.universe, background, *base, singular, exceptions).map(Some)
            }
            None => LinearRuleConfiguration::asymptotically_constant(&self.universe, background, exceptions).map(Some),
        }
    }

    /// Spec of an automaton, with rules named `r0, r1, ...` in order of first
    /// use (background first).
    pub fn from_nuca(n: &Nuca) -> Self {
        let mut rules: Vec<(String, RuleDef)> = Vec::new();
        let mut name_of = |r: &LocalRule| -> String {
            if let Some((name, _)) = rules.iter().find(|(_, d)| *d == RuleDef::Table(r.clone())) {
                return name.clone();
            }
            let name = format!("r{}", rules.len());
            rules.push((name.clone(), RuleDef::Table(r.clone())));
            name
        };
        let s = n.rules();
        let background = name_of(s.background());
        let (sparse, extra) = match s.layout() {
            RuleLayout::Constant(_) => (None, BTreeMap::new()),
            RuleLayout::AsymptoticallyConstant { exceptions, .. } => (None, exceptions.clone()),
            RuleLayout::SparseSingular { base, singular, extra, .. } => (Some((*base, name_of(singular))), extra.clone()),
        };
        let exceptions = extra.iter().map(|(g, r)| (g.clone(), name_of(r))).collect();
        ExperimentSpec {
            universe: n.universe().clone(),
            alphabet: n.alphabet_size(),
            rules,
            background,
            sparse,
            exceptions,
            params: Params::default(),
        }
    }

    /// Spec of a linear configuration, with rules named `l0, l1, ...`.
    pub fn from_linear(s: &LinearRuleConfiguration) -> Self {
        let mut rules: Vec<(String, RuleDef)> = Vec::new();
        let mut name_of = |r: &LinearLocalRule| -> String {
            if let Some((name, _)) = rules.iter().find(|(_, d)| *d == RuleDef::Linear(r.clone())) {
                return name.clone();
            }
            let name = format!("l{}", rules.len());
            rules.push((name.clone(), RuleDef::Linear(r.clone())));
            name
        };
        let background = name_of(s.background());
        let (sparse, extra) = match s.layout() {
            LinearLayout::Constant(_) => (None, BTreeMap::new()),
            LinearLayout::AsymptoticallyConstant { exceptions, .. } => (None, exceptions.clone()),
            LinearLayout::SparseSingular { base, singular, extra, .. } => (Some((*base, name_of(singular))), extra.clone()),
        };
        let exceptions = extra.iter().map(|(g, r)| (g.clone(), name_of(r))).collect();
        ExperimentSpec {
            universe: s.universe().clone(),
            alphabet: s.alphabet().size(),
            rules,
            background,
            sparse,
            exceptions,
            params: Params::default(),
        }
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_string().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn push_rule(rules: &mut Vec<(String, RuleDef)>, line: usize, name: &str, def: RuleDef) -> Result<()> {
    if rules.iter().any(|(n, _)| n == name) {
        return Err(NucaError::parse(line, "rule", format!("rule `{name}` declared twice")));
    }
    rules.push((name.to_string(), def));
    Ok(())
}

impl FromStr for ExperimentSpec {
    type Err = NucaError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentSpec::parse(s)
    }
}

impl fmt::Display for ExperimentSpec {
    /// Canonical form; parsing it gives back an equal spec.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "universe {}", self.universe)?;
        writeln!(f, "alphabet {}", self.alphabet)?;
        for (name, def) in &self.rules {
            match def {
                RuleDef::Table(r) => writeln!(f, "rule {name} memory={} table={}", r.memory(), r.table_string())?,
                RuleDef::Linear(r) => {
                    let a = r.alphabet();
                    write!(f, "linrule {name} p={} n={} memory={}", a.p(), a.dim(), r.memory())?;
                    for (m, mat) in r.matrices() {
                        write!(f, " m{m}={mat}")?;
                    }
                    writeln!(f)?;
                }
            }
        }
        writeln!(f, "background={}", self.background)?;
        if let Some((base, rule)) = &self.sparse {
            writeln!(f, "sparse base={base} rule={rule}")?;
        }
        for (g, name) in &self.exceptions {
            writeln!(f, "exception {g} = {name}")?;
        }
        for (k, v) in self.params.entries() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// A pattern file: `cell=letter` entries and an optional `background=letter`,
/// spread over any number of lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternFile {
    pub pattern: Pattern,
    pub background: Option<Letter>,
}

impl PatternFile {
    pub fn parse(universe: &GroupUniverse, alphabet: usize, text: &str) -> Result<Self> {
        let mut pattern = Pattern::new();
        let mut background = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            for tok in tokens(strip_comment(raw)) {
                let (k, v) = tok
                    .rsplit_once('=')
                    .ok_or_else(|| NucaError::parse(line, "pattern", format!("expected `cell=letter`, got `{tok}`")))?;
                let a: Letter = number(line, k, v)?;
                if a as usize >= alphabet {
                    return Err(NucaError::parse(line, k, format!("letter {a} outside an alphabet of size {alphabet}")));
                }
                if k == "background" {
                    background = Some(a);
                } else {
                    let e: Element = at_line(line, "cell", k.parse())?;
                    pattern.insert(at_line(line, "cell", universe.canonical(&e))?, a);
                }
            }
        }
        Ok(PatternFile { pattern, background })
    }

    /// Overlays the pattern on its background (0 when absent).
    pub fn configuration(&self, universe: &GroupUniverse) -> Result<Configuration> {
        Configuration::new(universe, self.background.unwrap_or(0), self.pattern.clone())
    }
}

/// One update set per line: cells, `all`, or `none`.
pub fn parse_schedule(universe: &GroupUniverse, text: &str) -> Result<Vec<FiniteSubset>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokens(strip_comment(raw));
        match toks.first().map(String::as_str) {
            None => continue,
            Some("all") => out.push(at_line(line, "schedule", universe.enumerate_all())?),
            Some("none") => out.push(FiniteSubset::new()),
            Some(_) => {
                let mut set = FiniteSubset::new();
                for t in toks.iter().flat_map(|t| t.split_inclusive(')')) {
                    let t = t.trim().trim_start_matches(',');
                    if t.is_empty() {
                        continue;
                    }
                    let e: Element = at_line(line, "schedule", t.parse())?;
                    set.insert(at_line(line, "schedule", universe.canonical(&e))?);
                }
                out.push(set);
            }
        }
    }
    Ok(out)
}
