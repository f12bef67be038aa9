//! Task commands for model files, registered by name, and the runner that
//! turns a model into a report.
//!
//! Every command is a thin shell over library calls. Trailing
//! `expect <key> <values…>` clauses turn claims into verdicts.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::form::Form;
use crate::g2::{self, G2Structure, SpinorPair};
use crate::integrability::{self, Admissible, Closed, ClosedStructure, CoclosedStructure, HConstraint, ObstructionReport};
use crate::lie::{JacobiReport, LieAlgebra, SpanIdeal};
use crate::literal;
use crate::model::{ModelFile, Task};
use crate::report::SCHEMA_VERSION;
use crate::scalar::{self, Scalar};
use crate::tduality::{self, AdmissibleTriple, CorrespondenceSpace, DualResult};

/// Name of the algebra produced by the most recent `dualize`.
pub const DUAL_ALGEBRA: &str = "@dual";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskError {
    /// Bad arguments or unknown names: exit code 2.
    Usage(String),
    /// A library call failed on well-formed input: a failing verdict.
    Math(String),
}

fn usage<T>(message: impl Into<String>) -> Result<T, TaskError> {
    Err(TaskError::Usage(message.into()))
}

fn math(e: impl std::fmt::Display) -> TaskError {
    TaskError::Math(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub id: usize,
    pub command: String,
    pub args: Vec<String>,
    pub values: serde_json::Map<String, Value>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip)]
    detail_keys: Vec<String>,
}

impl TaskReport {
    fn new(id: usize, task: &Task) -> Self {
        TaskReport {
            id,
            command: task.command.clone(),
            args: task.args.clone(),
            values: serde_json::Map::new(),
            verdicts: Vec::new(),
            detail_keys: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn value(&mut self, key: &str, value: impl Serialize) {
        self.values
            .insert(key.into(), serde_json::to_value(value).expect("serializable report value"));
    }

    /// Like [`TaskReport::value`] but only shown in verbose human output.
    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.value(key, value);
        self.detail_keys.push(key.into());
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, witness: Option<String>) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            witness: if pass { None } else { witness },
        });
    }

    /// Compares two forms, reporting the difference on failure.
    pub fn expect_form(&mut self, name: impl Into<String>, got: &Form, want: &Form) {
        let pass = got == want;
        let witness = (!pass).then(|| format!("got {got}; difference {}", got - want));
        self.verdict(name, pass, witness);
    }

    pub fn verdict_for(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tasks: Vec<TaskReport>,
    pub pass: bool,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self, verbose: bool) -> String {
        let mut out = String::new();
        for task in &self.tasks {
            out.push_str(&format!("task {}: {}", task.id, task.command));
            for a in &task.args {
                out.push(' ');
                out.push_str(a);
            }
            out.push('\n');
            for (key, value) in &task.values {
                if !verbose && task.detail_keys.contains(key) {
                    continue;
                }
                let shown = match value {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                out.push_str(&format!("  {key}: {shown}\n"));
            }
            for v in &task.verdicts {
                let mark = if v.pass { "PASS" } else { "FAIL" };
                match &v.witness {
                    Some(w) => out.push_str(&format!("  {mark} {}: {w}\n", v.name)),
                    None => out.push_str(&format!("  {mark} {}\n", v.name)),
                }
            }
        }
        let passed = self.tasks.iter().filter(|t| t.pass()).count();
        out.push_str(&format!(
            "{} {passed}/{} tasks passed\n",
            if self.pass { "OK" } else { "FAILED" },
            self.tasks.len()
        ));
        out
    }
}

/// State from the most recent `dualize`.
#[derive(Debug, Clone)]
pub struct DualState {
    pub source_algebra: String,
    pub triple: AdmissibleTriple,
    pub result: DualResult,
    pub correspondence: CorrespondenceSpace,
}

pub struct Context<'m> {
    pub model: &'m ModelFile,
    bindings: BTreeMap<String, Form>,
    pub last_dual: Option<DualState>,
}

impl<'m> Context<'m> {
    pub fn new(model: &'m ModelFile) -> Self {
        Context {
            model,
            bindings: BTreeMap::new(),
            last_dual: None,
        }
    }

    pub fn bind(&mut self, name: String, form: Form) {
        self.bindings.insert(name, form);
    }

    pub fn algebra(&self, name: &str) -> Result<LieAlgebra, TaskError> {
        if name == DUAL_ALGEBRA {
            return match &self.last_dual {
                Some(d) => Ok(d.result.dual.algebra.clone()),
                None => usage("@dual used before any dualize task"),
            };
        }
        match self.model.algebra(name) {
            Some(g) => Ok(g.clone()),
            None => usage(format!("unknown algebra '{name}'")),
        }
    }

    /// A named form (runtime bindings first) or an inline literal in `dim`.
    pub fn form(&self, token: &str, dim: usize) -> Result<Form, TaskError> {
        let found = self
            .bindings
            .get(token)
            .cloned()
            .or_else(|| self.model.form(token).map(|f| f.form.clone()));
        match found {
            Some(f) if f.dim() == dim => Ok(f),
            Some(f) => usage(format!("form '{token}' has dimension {}, expected {dim}", f.dim())),
            None => literal::parse_form(token, dim)
                .map_err(|e| TaskError::Usage(format!("'{token}' is neither a known form nor a literal ({e})"))),
        }
    }

    /// A named form whose dimension comes from its declaration or binding.
    pub fn named_form(&self, token: &str) -> Result<Form, TaskError> {
        if let Some(f) = self.bindings.get(token) {
            return Ok(f.clone());
        }
        match self.model.form(token) {
            Some(f) => Ok(f.form.clone()),
            None => usage(format!("unknown form '{token}'")),
        }
    }

    /// Algebra a named form was declared on (`None` for runtime bindings).
    pub fn form_algebra(&self, token: &str) -> Option<&str> {
        if self.bindings.contains_key(token) {
            return None;
        }
        self.model.form(token).map(|f| f.algebra.as_str())
    }

    pub fn fiber(&self, token: &str, dim: usize) -> Result<SpanIdeal, TaskError> {
        match self.model.fiber(token) {
            Some(f) if f.span.dim() == dim => Ok(f.span.clone()),
            Some(_) => usage(format!("fiber '{token}' lives in another dimension")),
            None => usage(format!("unknown fiber '{token}'")),
        }
    }

    fn dual(&self) -> Result<&DualState, TaskError> {
        match &self.last_dual {
            Some(d) => Ok(d),
            None => usage("no dualize task has run yet"),
        }
    }
}

/// Positional arguments, flags and `expect` clauses of one task.
pub struct Args {
    positional: Vec<String>,
    flags: Vec<String>,
    expectations: Vec<(String, Vec<String>)>,
}

impl Args {
    /// `arities` maps each accepted expectation key to its value count;
    /// `None` takes all remaining tokens.
    fn parse(raw: &[String], arities: &[(&str, Option<usize>)]) -> Result<Self, TaskError> {
        let mut positional = Vec::new();
        let mut flags = Vec::new();
        let mut expectations = Vec::new();
        let mut in_expect = false;
        let mut it = raw.iter().peekable();
        while let Some(tok) = it.next() {
            if tok == "expect" {
                in_expect = true;
                continue;
            }
            if tok.starts_with("--") {
                flags.push(tok.clone());
                continue;
            }
            if in_expect {
                let Some(&(_, arity)) = arities.iter().find(|(k, _)| k == tok) else {
                    let keys: Vec<&str> = arities.iter().map(|(k, _)| *k).collect();
                    return usage(format!("unknown expectation '{tok}' (accepted: {})", keys.join(", ")));
                };
                let mut values = Vec::new();
                match arity {
                    Some(n) => {
                        for _ in 0..n {
                            match it.next() {
                                Some(v) => values.push(v.clone()),
                                None => return usage(format!("expectation '{tok}' needs {n} value(s)")),
                            }
                        }
                    }
                    None => {
                        while let Some(v) = it.peek() {
                            if *v == "expect" {
                                break;
                            }
                            values.push(it.next().unwrap().clone());
                        }
                    }
                }
                expectations.push((tok.clone(), values));
            } else {
                positional.push(tok.clone());
            }
        }
        Ok(Args {
            positional,
            flags,
            expectations,
        })
    }

    fn flag(&self, name: &str) -> bool {
        self.flags.iter().any(|f| f == name)
    }

    fn check_flags(&self, allowed: &[&str]) -> Result<(), TaskError> {
        match self.flags.iter().find(|f| !allowed.contains(&f.as_str())) {
            Some(f) => usage(format!("unknown flag '{f}'")),
            None => Ok(()),
        }
    }

    fn positional(&self, index: usize, what: &str) -> Result<&str, TaskError> {
        match self.positional.get(index) {
            Some(s) => Ok(s),
            None => usage(format!("missing argument <{what}>")),
        }
    }

    fn max_positional(&self, n: usize) -> Result<(), TaskError> {
        if self.positional.len() > n {
            usage(format!("unexpected argument '{}'", self.positional[n]))
        } else {
            Ok(())
        }
    }

    /// Optional `keyword value` pairs among the positionals.
    fn keyword(&self, key: &str, count: usize) -> Result<Option<Vec<String>>, TaskError> {
        match self.positional.iter().position(|p| p == key) {
            None => Ok(None),
            Some(i) if i + count < self.positional.len() => {
                Ok(Some(self.positional[i + 1..=i + count].to_vec()))
            }
            Some(_) => usage(format!("'{key}' needs {count} value(s)")),
        }
    }
}

fn parse_scalar(token: &str) -> Result<Scalar, TaskError> {
    scalar::parse(token).ok_or_else(|| TaskError::Usage(format!("invalid rational '{token}'")))
}

fn parse_index(token: &str, dim: usize) -> Result<usize, TaskError> {
    let t = token.strip_prefix('e').unwrap_or(token);
    let t = t.trim_start_matches('{').trim_end_matches('}');
    match t.parse::<usize>() {
        Ok(i) if (1..=dim).contains(&i) => Ok(i),
        _ => usage(format!("'{token}' is not a basis index in 1..={dim}")),
    }
}

pub trait Command: Sync {
    fn name(&self) -> &'static str;
    fn usage(&self) -> &'static str;
    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError>;
}

pub struct Registry {
    commands: BTreeMap<&'static str, Box<dyn Command>>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::standard()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            commands: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(CheckJacobi));
        r.register(Box::new(Differential));
        r.register(Box::new(Star));
        r.register(Box::new(Spinors));
        r.register(Box::new(Su3Split));
        r.register(Box::new(Integrability));
        r.register(Box::new(SolveH));
        r.register(Box::new(Dualize));
        r.register(Box::new(Certificate));
        r.register(Box::new(Transport));
        r.register(Box::new(ObstructClosedG2));
        r.register(Box::new(DoubleDual));
        r
    }

    pub fn register(&mut self, command: Box<dyn Command>) {
        self.commands.insert(command.name(), command);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands.get(name).map(|c| c.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.commands.keys().copied()
    }

    pub fn usages(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.commands.values().map(|c| c.usage())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub task: usize,
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "task {} (line {}): {}", self.task, self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Only report tasks with this command name. The other tasks still run
    /// silently so bindings and dual state are the same as in a full run.
    pub task_filter: Option<String>,
}

/// Runs every task in order. Usage errors stop the run.
pub fn run(model: &ModelFile, registry: &Registry, options: &RunOptions) -> Result<RunReport, UsageError> {
    let mut ctx = Context::new(model);
    let mut tasks = Vec::new();
    for (i, task) in model.tasks.iter().enumerate() {
        let id = i + 1;
        let shown = options.task_filter.as_deref().is_none_or(|f| f == task.command);
        let command = registry.get(&task.command).ok_or_else(|| UsageError {
            task: id,
            line: task.line,
            message: format!("unknown command '{}'", task.command),
        })?;
        let mut report = TaskReport::new(id, task);
        match command.run(&mut ctx, &task.args, &mut report) {
            Ok(()) => {}
            Err(TaskError::Math(message)) => report.verdict("error", false, Some(message)),
            Err(TaskError::Usage(message)) => {
                return Err(UsageError {
                    task: id,
                    line: task.line,
                    message: format!("{message}; usage: {}", command.usage()),
                })
            }
        }
        if shown {
            tasks.push(report);
        }
    }
    let pass = tasks.iter().all(TaskReport::pass);
    Ok(RunReport {
        schema: SCHEMA_VERSION,
        tasks,
        pass,
    })
}

fn jacobi_witness(report: &JacobiReport) -> Option<String> {
    match report {
        JacobiReport::Pass => None,
        JacobiReport::Fail { triple, residual } => Some(format!(
            "({}, {}, {}) residual {}",
            triple.0,
            triple.1,
            triple.2,
            crate::lie::vector_as_form(residual)
        )),
    }
}

fn differentials_value(g: &LieAlgebra) -> Value {
    let mut map = serde_json::Map::new();
    for k in 1..=g.dim() {
        let de = g.basis_differential(k);
        if !de.is_zero() {
            map.insert(format!("de{k}"), json!(de.to_string()));
        }
    }
    Value::Object(map)
}

struct CheckJacobi;

impl Command for CheckJacobi {
    fn name(&self) -> &'static str {
        "check-jacobi"
    }

    fn usage(&self) -> &'static str {
        "check-jacobi [algebra...]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[])?;
        a.check_flags(&[])?;
        let names: Vec<String> = if a.positional.is_empty() {
            ctx.model.algebras.iter().map(|d| d.name.clone()).collect()
        } else {
            a.positional.clone()
        };
        for name in names {
            let g = ctx.algebra(&name)?;
            let jacobi = g.jacobi_check();
            report.value(&format!("{name}.differentials"), differentials_value(&g));
            report.verdict(format!("jacobi({name})"), jacobi.passed(), jacobi_witness(&jacobi));
        }
        Ok(())
    }
}

/// Which algebra a form argument is evaluated on.
fn algebra_of_form(ctx: &Context, token: &str, explicit: Option<&str>) -> Result<(String, LieAlgebra), TaskError> {
    let name = match explicit.or(ctx.form_algebra(token)) {
        Some(n) => n.to_string(),
        None => return usage(format!("cannot tell which algebra '{token}' lives on; add 'on <algebra>'")),
    };
    let g = ctx.algebra(&name)?;
    Ok((name, g))
}

struct Differential;

impl Command for Differential {
    fn name(&self) -> &'static str {
        "differential"
    }

    fn usage(&self) -> &'static str {
        "differential <form> [on <algebra>] [expect equals <form>]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("equals", Some(1))])?;
        a.check_flags(&[])?;
        let token = a.positional(0, "form")?;
        let on = a.keyword("on", 1)?;
        a.max_positional(if on.is_some() { 3 } else { 1 })?;
        let (_, g) = algebra_of_form(ctx, token, on.as_ref().map(|v| v[0].as_str()))?;
        let form = ctx.form(token, g.dim())?;
        let d = g.differential(&form).map_err(math)?;
        report.value("d", d.to_string());
        ctx.bind(format!("{token}.d"), d.clone());
        for (key, values) in &a.expectations {
            if key == "equals" {
                let want = ctx.form(&values[0], g.dim())?;
                report.expect_form(format!("d{token} == {}", values[0]), &d, &want);
            }
        }
        Ok(())
    }
}

struct Star;

impl Command for Star {
    fn name(&self) -> &'static str {
        "star"
    }

    fn usage(&self) -> &'static str {
        "star <form> [expect equals <form>]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("equals", Some(1))])?;
        a.check_flags(&[])?;
        let token = a.positional(0, "form")?;
        a.max_positional(1)?;
        let form = ctx.named_form(token)?;
        let star = form.hodge_star();
        report.value("star", star.to_string());
        ctx.bind(format!("{token}.star"), star.clone());
        for (key, values) in &a.expectations {
            if key == "equals" {
                let want = ctx.form(&values[0], form.dim())?;
                report.expect_form(format!("*{token} == {}", values[0]), &star, &want);
            }
        }
        Ok(())
    }
}

/// `angle s c` and `fiber k` (or `alpha k`) keywords; defaults to the usual structure.
fn spinor_pair(ctx: &Context, a: &Args, phi_token: &str) -> Result<SpinorPair, TaskError> {
    let phi = ctx.named_form(phi_token)?;
    let g2s = G2Structure::adapted(phi).map_err(math)?;
    let angle = a.keyword("angle", 2)?;
    let alpha = match a.keyword("alpha", 1)? {
        Some(v) => Some(v),
        None => a.keyword("fiber", 1)?,
    };
    match angle {
        None => g2::usual_spinors(&g2s).map_err(math),
        Some(sc) => {
            let s = parse_scalar(&sc[0])?;
            let c = parse_scalar(&sc[1])?;
            let k = match alpha {
                Some(v) => parse_index(&v[0], g2::G2_DIM)?,
                None if s.is_zero() => g2::G2_DIM,
                None => return usage("a nonzero angle needs 'fiber <index>'"),
            };
            g2::generalized_spinors(&g2s, k, s, c).map_err(math)
        }
    }
}

fn count_spinor_positionals(a: &Args) -> usize {
    let mut n = 0;
    if a.positional.iter().any(|p| p == "angle") {
        n += 3;
    }
    if a.positional.iter().any(|p| p == "alpha" || p == "fiber") {
        n += 2;
    }
    n
}

struct Spinors;

impl Command for Spinors {
    fn name(&self) -> &'static str {
        "spinors"
    }

    fn usage(&self) -> &'static str {
        "spinors <phi> [angle <s> <c>] [fiber <index>] [expect rho <form>] [expect rho_hat <form>]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("rho", Some(1)), ("rho_hat", Some(1))])?;
        a.check_flags(&[])?;
        let phi_token = a.positional(0, "phi")?.to_string();
        a.max_positional(1 + count_spinor_positionals(&a))?;
        let pair = spinor_pair(ctx, &a, &phi_token)?;
        report.value("rho", pair.rho.to_string());
        report.value("rho_hat", pair.rho_hat.to_string());
        report.value("angle", [pair.s.to_string(), pair.c.to_string()]);
        report.verdict("parity", pair.parity_ok(), Some("rho not even or rho_hat not odd".into()));
        for (key, values) in &a.expectations {
            let got = if key == "rho" { &pair.rho } else { &pair.rho_hat };
            let want = ctx.form(&values[0], pair.dim())?;
            report.expect_form(format!("{key} == {}", values[0]), got, &want);
        }
        ctx.bind(format!("{phi_token}.rho"), pair.rho);
        ctx.bind(format!("{phi_token}.rho_hat"), pair.rho_hat);
        Ok(())
    }
}

struct Su3Split;

impl Command for Su3Split {
    fn name(&self) -> &'static str {
        "su3-split"
    }

    fn usage(&self) -> &'static str {
        "su3-split <phi> <index> [expect omega|psi_plus|psi_minus <form>]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("omega", Some(1)), ("psi_plus", Some(1)), ("psi_minus", Some(1))])?;
        a.check_flags(&[])?;
        let phi_token = a.positional(0, "phi")?.to_string();
        let x = parse_index(a.positional(1, "index")?, g2::G2_DIM)?;
        a.max_positional(2)?;
        let g2s = G2Structure::adapted(ctx.named_form(&phi_token)?).map_err(math)?;
        let su3 = g2::su3_split(&g2s, x).map_err(math)?;
        report.value("omega", su3.omega.to_string());
        report.value("psi_plus", su3.psi_plus.to_string());
        report.value("psi_minus", su3.psi_minus.to_string());
        report.verdict("reconstruction", true, None);
        for (key, values) in &a.expectations {
            let got = match key.as_str() {
                "omega" => &su3.omega,
                "psi_plus" => &su3.psi_plus,
                _ => &su3.psi_minus,
            };
            let want = ctx.form(&values[0], g2::G2_DIM)?;
            report.expect_form(format!("{key} == {}", values[0]), got, &want);
        }
        ctx.bind(format!("{phi_token}.omega"), su3.omega);
        ctx.bind(format!("{phi_token}.psi_plus"), su3.psi_plus);
        ctx.bind(format!("{phi_token}.psi_minus"), su3.psi_minus);
        Ok(())
    }
}

struct Integrability;

impl Command for Integrability {
    fn name(&self) -> &'static str {
        "integrability"
    }

    fn usage(&self) -> &'static str {
        "integrability <algebra> <H> <phi> [angle <s> <c>] [fiber <index>] \
         [expect closed|coclosed|strong|not-closed|not-coclosed|not-strong|h-closed ...]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let keys = ["closed", "coclosed", "strong", "not-closed", "not-coclosed", "not-strong", "h-closed"];
        let arities: Vec<(&str, Option<usize>)> = keys.iter().map(|k| (*k, Some(0))).collect();
        let a = Args::parse(args, &arities)?;
        a.check_flags(&[])?;
        let g = ctx.algebra(a.positional(0, "algebra")?)?;
        let h = ctx.form(a.positional(1, "H")?, g.dim())?;
        let phi_token = a.positional(2, "phi")?.to_string();
        a.max_positional(3 + count_spinor_positionals(&a))?;
        let pair = spinor_pair(ctx, &a, &phi_token)?;
        let r = integrability::integrability_report(&g, &h, &pair).map_err(math)?;
        report.value("h_closed", r.h_closed);
        report.value("closed", r.closed);
        report.value("coclosed", r.coclosed);
        report.value("strongly_integrable", r.strongly_integrable);
        report.value("weak_odd", r.weak_odd.as_ref().map(|l| l.to_string()));
        report.value("weak_even", r.weak_even.as_ref().map(|l| l.to_string()));
        report.value("d_h_rho", r.d_h_rho.to_string());
        report.value("d_h_rho_hat", r.d_h_rho_hat.to_string());
        for (key, _) in &a.expectations {
            let (pass, witness) = match key.as_str() {
                "closed" => (r.closed, Some(format!("d_H rho_hat = {}", r.d_h_rho_hat))),
                "not-closed" => (!r.closed, None),
                "coclosed" => (r.coclosed, Some(format!("d_H rho = {}", r.d_h_rho))),
                "not-coclosed" => (!r.coclosed, None),
                "strong" => (r.strongly_integrable, None),
                "not-strong" => (!r.strongly_integrable, None),
                _ => (r.h_closed, Some("dH != 0".into())),
            };
            report.verdict(key.clone(), pass, witness.or_else(|| Some("predicate holds".into())));
        }
        if !r.h_closed {
            report.value("warning", "H is not closed; d_H does not square to zero");
        }
        Ok(())
    }
}

struct SolveH;

impl Command for SolveH {
    fn name(&self) -> &'static str {
        "solve-h"
    }

    fn usage(&self) -> &'static str {
        "solve-h <algebra> <phi> <fiber> [--coclosed] [expect dimension <n>] [expect contains <form>...]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("dimension", Some(1)), ("contains", None)])?;
        a.check_flags(&["--coclosed"])?;
        let g = ctx.algebra(a.positional(0, "algebra")?)?;
        let phi_token = a.positional(1, "phi")?.to_string();
        let fiber = ctx.fiber(a.positional(2, "fiber")?, g.dim())?;
        a.max_positional(3)?;
        let g2s = G2Structure::adapted(ctx.named_form(&phi_token)?).map_err(math)?;
        let pair = g2::usual_spinors(&g2s).map_err(math)?;
        let admissible = Admissible(fiber);
        let structure: Box<dyn HConstraint> = if a.flag("--coclosed") {
            Box::new(CoclosedStructure(pair.rho))
        } else {
            Box::new(ClosedStructure(pair.rho_hat))
        };
        let constraints: [&dyn HConstraint; 3] = [&Closed, structure.as_ref(), &admissible];
        report.value(
            "constraints",
            constraints.iter().map(|c| c.name()).collect::<Vec<_>>(),
        );
        let space = integrability::solve_h_space(&g, &constraints).map_err(math)?;
        report.value("dimension", space.dimension);
        report.value("particular", space.particular.to_string());
        report.detail(
            "kernel_basis",
            space.kernel_basis.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        );
        for (key, values) in &a.expectations {
            if key == "dimension" {
                let want: usize = values[0]
                    .parse()
                    .map_err(|_| TaskError::Usage(format!("invalid dimension '{}'", values[0])))?;
                report.verdict(
                    format!("dimension == {want}"),
                    space.dimension == want,
                    Some(format!("got {}", space.dimension)),
                );
            } else {
                for token in values {
                    let h = ctx.form(token, g.dim())?;
                    let pass = space.contains(&h);
                    let witness = (!pass).then(|| {
                        let dh = g.differential(&h).map(|f| f.to_string()).unwrap_or_default();
                        let wedge = h.wedge(g2s.phi()).map(|f| f.to_string()).unwrap_or_default();
                        format!("dH = {dh}; H^phi = {wedge}")
                    });
                    report.verdict(format!("contains {token}"), pass, witness);
                }
            }
        }
        Ok(())
    }
}

struct Dualize;

impl Command for Dualize {
    fn name(&self) -> &'static str {
        "dualize"
    }

    fn usage(&self) -> &'static str {
        "dualize <algebra> <fiber> <H> [expect h <form>] [expect d <index> <form>] [expect algebra <name>]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("h", Some(1)), ("d", Some(2)), ("algebra", Some(1))])?;
        a.check_flags(&[])?;
        let alg_name = a.positional(0, "algebra")?.to_string();
        let g = ctx.algebra(&alg_name)?;
        let fiber = ctx.fiber(a.positional(1, "fiber")?, g.dim())?;
        let h = ctx.form(a.positional(2, "H")?, g.dim())?;
        a.max_positional(3)?;
        let triple = tduality::validate_admissible(&g, &fiber, &h).map_err(math)?;
        report.value("checks", triple.checks);
        report.verdict(
            "admissible",
            triple.is_valid(),
            Some(format!("{:?}", triple.checks)),
        );
        if !triple.is_valid() {
            return Ok(());
        }
        let (result, cs, _) = tduality::certify(&triple).map_err(math)?;
        let dual = &result.dual;
        report.value("dual_differentials", differentials_value(&dual.algebra));
        report.value("dual_h", dual.h.to_string());
        report.value("delta", result.delta.to_string());
        report.value("psis", result.psis.iter().map(|f| f.to_string()).collect::<Vec<_>>());
        report.value("dual_center_dimension", dual.algebra.center().len());
        report.detail(
            "dual_ad_traces",
            dual.algebra.ad_traces().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        );
        report.verdict("dual admissible", dual.is_valid(), Some(format!("{:?}", dual.checks)));
        for (key, values) in &a.expectations {
            match key.as_str() {
                "h" => {
                    let want = ctx.form(&values[0], g.dim())?;
                    report.expect_form(format!("H_dual == {}", values[0]), &dual.h, &want);
                }
                "d" => {
                    let k = parse_index(&values[0], g.dim())?;
                    let want = ctx.form(&values[1], g.dim())?;
                    report.expect_form(
                        format!("d e{k} == {}", values[1]),
                        dual.algebra.basis_differential(k),
                        &want,
                    );
                }
                _ => {
                    let want = ctx.algebra(&values[0])?;
                    let pass = want == dual.algebra;
                    report.verdict(
                        format!("dual algebra == {}", values[0]),
                        pass,
                        Some(differentials_value(&dual.algebra).to_string()),
                    );
                }
            }
        }
        ctx.bind("@dual.H".into(), dual.h.clone());
        ctx.bind("@dual.delta".into(), result.delta.clone());
        ctx.last_dual = Some(DualState {
            source_algebra: alg_name,
            triple,
            result,
            correspondence: cs,
        });
        Ok(())
    }
}

struct Certificate;

impl Command for Certificate {
    fn name(&self) -> &'static str {
        "certificate"
    }

    fn usage(&self) -> &'static str {
        "certificate"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[])?;
        a.check_flags(&[])?;
        a.max_positional(0)?;
        let d = ctx.dual()?;
        let cs = &d.correspondence;
        let cert = tduality::verify_duality_certificate(cs, &d.triple.h, &d.result.dual.h).map_err(math)?;
        report.value("correspondence_dimension", cs.dim());
        report.value("F", cs.f.to_string());
        report.value("lhs", cert.lhs.to_string());
        report.value("rhs", cert.rhs.to_string());
        report.value("residual", cert.residual.to_string());
        let nondegenerate = cs.f_nondegenerate().map_err(math)?;
        report.verdict("F nondegenerate on fibers", nondegenerate, Some("fiber pairing singular".into()));
        report.verdict(
            "p*H - p_dual*H_dual == dF",
            cert.pass,
            Some(format!("residual {}", cert.residual)),
        );
        Ok(())
    }
}

struct Transport;

impl Command for Transport {
    fn name(&self) -> &'static str {
        "transport"
    }

    fn usage(&self) -> &'static str {
        "transport <form> [expect equals <form>] [expect closed]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("equals", Some(1)), ("closed", Some(0))])?;
        a.check_flags(&[])?;
        let token = a.positional(0, "form")?.to_string();
        a.max_positional(1)?;
        let d = ctx.dual()?;
        let dim = d.triple.dim();
        let sigma = ctx.form(&token, dim)?;
        let tau = d.correspondence.transport(&sigma).map_err(math)?;
        let d_h = integrability::twisted_differential(&d.result.dual.algebra, &d.result.dual.h, &tau).map_err(math)?;
        report.value("transported", tau.to_string());
        report.value("d_H_dual", d_h.to_string());
        for (key, values) in &a.expectations {
            if key == "equals" {
                let want = ctx.form(&values[0], dim)?;
                report.expect_form(format!("tau({token}) == {}", values[0]), &tau, &want);
            } else {
                report.verdict(
                    format!("d_H_dual tau({token}) == 0"),
                    d_h.is_zero(),
                    Some(d_h.to_string()),
                );
            }
        }
        ctx.bind(format!("{token}.dual"), tau);
        Ok(())
    }
}

struct ObstructClosedG2;

impl Command for ObstructClosedG2 {
    fn name(&self) -> &'static str {
        "obstruct-closed-g2"
    }

    fn usage(&self) -> &'static str {
        "obstruct-closed-g2 <algebra> <index> [expect vanishes] [expect witness <form>]"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[("vanishes", Some(0)), ("witness", Some(1))])?;
        a.check_flags(&[])?;
        let g = ctx.algebra(a.positional(0, "algebra")?)?;
        let z = parse_index(a.positional(1, "index")?, g.dim())?;
        a.max_positional(2)?;
        let r = integrability::cubic_obstruction(&g, z).map_err(math)?;
        report.value("obstruction", &r);
        for (key, values) in &a.expectations {
            match (key.as_str(), &r) {
                ("vanishes", ObstructionReport::Vanishes { .. }) => report.verdict("vanishes", true, None),
                ("vanishes", ObstructionReport::Witness { sigma, cube, .. }) => {
                    report.verdict("vanishes", false, Some(format!("sigma = {sigma}, cube = {cube}")))
                }
                (_, ObstructionReport::Witness { sigma, .. }) => {
                    let want = ctx.form(&values[0], g.dim())?;
                    report.expect_form(format!("witness == {}", values[0]), sigma, &want);
                }
                (_, ObstructionReport::Vanishes { .. }) => {
                    report.verdict(format!("witness == {}", values[0]), false, Some("cube vanishes".into()))
                }
            }
        }
        Ok(())
    }
}

struct DoubleDual;

impl Command for DoubleDual {
    fn name(&self) -> &'static str {
        "double-dual"
    }

    fn usage(&self) -> &'static str {
        "double-dual"
    }

    fn run(&self, ctx: &mut Context, args: &[String], report: &mut TaskReport) -> Result<(), TaskError> {
        let a = Args::parse(args, &[])?;
        a.check_flags(&[])?;
        a.max_positional(0)?;
        let d = ctx.dual()?;
        let r = tduality::double_dual_check(&d.triple).map_err(math)?;
        report.value("source", d.source_algebra.clone());
        report.value("differences", &r.differences);
        report.verdict("recovers original triple", r.pass(), Some(r.differences.join("; ")));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn run_text(text: &str) -> Result<RunReport, UsageError> {
        run(&parse_model(text).unwrap(), &Registry::standard(), &RunOptions::default())
    }

    #[test]
    fn registry_lists_all_commands() {
        let names: Vec<_> = Registry::standard().names().collect();
        for n in [
            "check-jacobi",
            "differential",
            "star",
            "spinors",
            "integrability",
            "solve-h",
            "dualize",
            "certificate",
            "transport",
            "obstruct-closed-g2",
            "double-dual",
        ] {
            assert!(names.contains(&n), "{n}");
        }
    }

    #[test]
    fn empty_task_list_passes() {
        let r = run_text("algebra g dim 2\n").unwrap();
        assert!(r.tasks.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn expectations_become_verdicts() {
        let text = "algebra h dim 3\n d e3 = e12\nform x on h = e3\n\
                    task differential x expect equals e12\ntask differential x expect equals e13\n";
        let r = run_text(text).unwrap();
        assert!(r.tasks[0].pass());
        assert!(!r.tasks[1].pass());
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn usage_errors_stop_the_run() {
        let err = run_text("algebra h dim 3\ntask frobnicate\n").unwrap_err();
        assert_eq!((err.task, err.line), (1, 2));
        let err = run_text("algebra h dim 3\ntask certificate\n").unwrap_err();
        assert!(err.message.contains("no dualize"));
        let err = run_text("algebra h dim 3\nform x on h = e1\ntask differential x expect bogus 1\n").unwrap_err();
        assert!(err.message.contains("unknown expectation"));
        let err = run_text("algebra h dim 3\ntask check-jacobi nope\n").unwrap_err();
        assert!(err.message.contains("unknown algebra"));
    }

    #[test]
    fn check_jacobi_reports_failing_triple() {
        let text = "algebra bad dim 3\n bracket [1,2] = e2\n bracket [1,3] = e3\n bracket [2,3] = e1\ntask check-jacobi\n";
        let r = run_text(text).unwrap();
        let v = &r.tasks[0].verdicts[0];
        assert!(!v.pass);
        assert_eq!(v.witness.as_deref(), Some("(1, 2, 3) residual 2 e1"));
    }

    #[test]
    fn task_filter_keeps_dualize_state() {
        let text = "algebra g dim 3\nfiber a on g = span(e3)\n\
                    task dualize g a 0\ntask certificate\ntask check-jacobi\n";
        let model = parse_model(text).unwrap();
        let r = run(
            &model,
            &Registry::standard(),
            &RunOptions {
                task_filter: Some("certificate".into()),
            },
        )
        .unwrap();
        assert_eq!(r.tasks.len(), 1);
        assert_eq!(r.tasks[0].command, "certificate");
        assert!(r.pass);
    }

    #[test]
    fn json_is_deterministic() {
        let text = "algebra g dim 3\n d e3 = e12\nfiber a on g = span(e3)\ntask dualize g a 0\ntask certificate\n";
        let a = run_text(text).unwrap().to_json();
        let b = run_text(text).unwrap().to_json();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], json!(1));
        assert_eq!(v["tasks"][0]["values"]["dual_h"], json!("e123"));
    }

    #[test]
    fn args_parsing() {
        let raw: Vec<String> = ["g", "phi", "--coclosed", "expect", "dimension", "3", "contains", "a", "b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let a = Args::parse(&raw, &[("dimension", Some(1)), ("contains", None)]).unwrap();
        assert_eq!(a.positional, vec!["g", "phi"]);
        assert!(a.flag("--coclosed"));
        assert_eq!(
            a.expectations,
            vec![
                ("dimension".to_string(), vec!["3".to_string()]),
                ("contains".to_string(), vec!["a".to_string(), "b".to_string()])
            ]
        );
    }
}
