//! Command implementations behind the `btt` binary. Each command returns the
//! text it would print, so tests can drive them without a subprocess.

pub mod session;

use std::path::PathBuf;

use btt_core::macros::MacroDef;
use btt_core::sanorm::{sa_normalize, simplify_signature_counting, SAClass};
use btt_core::semantics::{check_inhabits, eval, EvalError, FiniteModel, Value};
use btt_core::syntax::{parse, Expr};
use btt_core::transport::{
    compile_subst_plan, id_set_with, j_operator, j_prime, join_sorts, split_instance, BijectionTuple, IsoSet,
    SetFamily, Strategy, TransportError,
};
use btt_core::typecheck::{check_type, Context, TypeVerdict};
use serde_json::{json, Value as Json};
use thiserror::Error;

use session::{load, load_model, Session};

#[derive(Clone, Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("BudgetExceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Type(String, String),
    #[error("{0}")]
    Semantic(String),
}

impl CliError {
    /// 0 success, 1 semantic failure, 2 operational error, 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Io(_) | CliError::Parse(_) | CliError::Budget(_) => 2,
            CliError::Type(..) | CliError::Semantic(_) => 1,
        }
    }

    /// The machine-readable reason code, when there is one.
    pub fn reason(&self) -> &str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Io(_) => "Io",
            CliError::Parse(_) => "Parse",
            CliError::Budget(_) => "BudgetExceeded",
            CliError::Type(_, code) => code,
            CliError::Semantic(_) => "Semantic",
        }
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::BudgetExceeded { .. } | TransportError::Eval(EvalError::BudgetExceeded { .. }) => {
                CliError::Budget(e.to_string())
            }
            TransportError::Type(t) => CliError::Type(t.to_string(), t.reason.code().to_string()),
            other => CliError::Semantic(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::from(TransportError::Eval(e))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// What a command printed and the exit code it asks for.
#[derive(Clone, Debug)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub budget: Option<usize>,
    pub format: Format,
    pub model: Option<PathBuf>,
}

/// The inputs of the commands that work on a class and a model: positional
/// paths are sorted into sources and models by extension.
#[derive(Clone, Debug, Default)]
pub struct Inputs {
    pub sources: Vec<PathBuf>,
    pub model: Option<PathBuf>,
}

impl Inputs {
    pub fn sort(paths: &[PathBuf], opts: &Options) -> Result<Self, CliError> {
        let mut inputs = Inputs { sources: Vec::new(), model: opts.model.clone() };
        for p in paths {
            if p.extension().is_some_and(|e| e == "bttm") {
                if inputs.model.is_some() {
                    return Err(CliError::Usage("more than one model file given".into()));
                }
                inputs.model = Some(p.clone());
            } else {
                inputs.sources.push(p.clone());
            }
        }
        Ok(inputs)
    }
}

/// A context built from the given sources, with a model if one is named.
pub struct Workspace {
    pub session: Session,
    pub model: FiniteModel,
}

impl Workspace {
    pub fn open(inputs: &Inputs, opts: &Options, need_model: bool) -> Result<Self, CliError> {
        let mut session = Session::default();
        for src in &inputs.sources {
            let s = load(src, opts.budget, false)?;
            for e in s.ctx.entries() {
                session.ctx.push_unchecked(e.clone());
            }
            if s.model.is_some() {
                session.model = s.model;
            }
        }
        let model = match (&inputs.model, session.model.take()) {
            (Some(p), _) => load_model(p, opts.budget)?,
            (None, Some(m)) => m,
            (None, None) if need_model => return Err(CliError::Usage("this command needs a model (.bttm) file".into())),
            (None, None) => FiniteModel::default(),
        };
        let model = match opts.budget {
            Some(b) => model.with_budget(b),
            None => model,
        };
        Ok(Workspace { session, model })
    }

    pub fn ctx(&self) -> &Context {
        &self.session.ctx
    }

    /// The class named by `--class`, else the last parameterless definition,
    /// else `Set`.
    pub fn class(&self, class: Option<&str>) -> Result<Expr, CliError> {
        match class {
            Some(text) => self.expr(text),
            None => Ok(self.session.last_def().map(Expr::var).unwrap_or_else(Expr::set)),
        }
    }

    pub fn expr(&self, text: &str) -> Result<Expr, CliError> {
        parse(text).map_err(|e| CliError::Parse(format!("`{text}`: {e}")))
    }

    pub fn binding(&self, name: &str) -> Result<&Value, CliError> {
        self.model.get(name).ok_or_else(|| CliError::Semantic(format!("the model does not bind `{name}`")))
    }

    pub fn macro_def(&self, name: &str) -> Result<&MacroDef, CliError> {
        self.ctx().lookup_def(name).ok_or_else(|| CliError::Semantic(format!("no definition named `{name}`")))
    }

    /// Requires `v` to be an instance of the class `sigma`.
    pub fn instance(&self, sigma: &Expr, name: &str) -> Result<Value, CliError> {
        let v = self.binding(name)?.clone();
        if !check_inhabits(&v, self.ctx(), &self.model, sigma)? {
            return Err(CliError::Semantic(format!("`{name}` is not an instance of `{sigma}`")));
        }
        Ok(v)
    }

    fn normalize(&self, sigma: &Expr) -> Result<SAClass, CliError> {
        sa_normalize(self.ctx(), sigma).map_err(|e| CliError::Type(e.to_string(), e.reason.code().to_string()))
    }

    /// The bijection tuple bound to `name`, or the first witness of
    /// `id(sigma, left, right)` when `name` is absent.
    fn bijection(&self, sigma: &Expr, sa: &SAClass, left: &Value, right: &Value, name: Option<&str>) -> Result<BijectionTuple, CliError> {
        match name {
            Some(n) => {
                let v = self.binding(n)?;
                BijectionTuple::from_value(v, sa.sorts)
                    .ok_or_else(|| CliError::Semantic(format!("`{n}` is not a tuple of {} functions", sa.sorts)))
            }
            None => {
                let set = id_set_with(self.ctx(), sigma, left, right, &self.model, Strategy::default())?;
                set.witnesses
                    .into_iter()
                    .next()
                    .ok_or_else(|| CliError::Semantic("the instances are not isomorphic".into()))
            }
        }
    }
}

pub fn run_check(paths: &[PathBuf], opts: &Options) -> Result<Output, CliError> {
    let mut diagnostics = Vec::new();
    for p in paths {
        diagnostics.extend(load(p, opts.budget, true)?.diagnostics);
    }
    let passed = diagnostics.iter().all(|d| d.passed);
    let stdout = match opts.format {
        Format::Text => {
            let mut s: String = diagnostics.iter().map(|d| d.render() + "\n").collect();
            let failed = diagnostics.iter().filter(|d| !d.passed).count();
            s.push_str(&format!("{} directives, {} failed\n", diagnostics.len(), failed));
            s
        }
        Format::Json => {
            let ds: Vec<Json> = diagnostics
                .iter()
                .map(|d| {
                    json!({
                        "file": d.file,
                        "line": d.span.start_line,
                        "column": d.span.start_col,
                        "directive": d.directive,
                        "passed": d.passed,
                        "reason": d.reason,
                        "message": d.message,
                    })
                })
                .collect();
            pretty(&json!({ "passed": passed, "diagnostics": ds }))
        }
    };
    Ok(Output { stdout, code: if passed { 0 } else { 1 } })
}

pub fn run_eval(paths: &[PathBuf], expr: &str, opts: &Options) -> Result<Output, CliError> {
    let ws = Workspace::open(&Inputs::sort(paths, opts)?, opts, false)?;
    // Model names are not declarations, so the expression is checked
    // dynamically by the evaluator.
    let e = ws.expr(expr)?;
    let v = eval(ws.ctx(), &ws.model, &e)?;
    Ok(Output::ok(match opts.format {
        Format::Text => format!("{v}\n"),
        Format::Json => pretty(&json!({ "value": v.to_string() })),
    }))
}

pub fn run_sa_normalize(paths: &[PathBuf], class: Option<&str>, opts: &Options) -> Result<Output, CliError> {
    let ws = Workspace::open(&Inputs::sort(paths, opts)?, opts, false)?;
    let sigma = ws.class(class)?;
    let sa = ws.normalize(&sigma)?;
    Ok(Output::ok(match opts.format {
        Format::Text => format!("{sa}\n"),
        Format::Json => pretty(&json!({
            "sorts": sa.sorts,
            "alpha": &*sa.alpha,
            "signature": sa.signature.to_string(),
            "x": &*sa.x,
            "axioms": sa.axioms.to_string(),
            "toSA": sa.to_sa.to_string(),
            "fromSA": sa.from_sa.to_string(),
        })),
    }))
}

/// Simplifies a signature. A class is normalized first and its signature
/// simplified; a set expression is simplified directly.
pub fn run_simplify(paths: &[PathBuf], target: Option<&str>, opts: &Options) -> Result<Output, CliError> {
    let ws = Workspace::open(&Inputs::sort(paths, opts)?, opts, false)?;
    let e = ws.class(target)?;
    let verdict = check_type(ws.ctx(), &e).map_err(|t| CliError::Type(t.to_string(), t.reason.code().to_string()))?;
    let (before, after, steps) = match verdict {
        TypeVerdict::IsClass => {
            let sa = ws.normalize(&e)?;
            let ctx = ws.ctx().extended(btt_core::typecheck::Entry::Decl(
                sa.alpha.clone(),
                btt_core::sanorm::set_power(sa.sorts),
            ));
            let (s, n) = simplify_signature_counting(&ctx, &sa.signature);
            (sa.signature, s, n)
        }
        TypeVerdict::IsSet => {
            let (s, n) = simplify_signature_counting(ws.ctx(), &e);
            (e, s, n)
        }
        other => return Err(CliError::Semantic(format!("`{e}` is {other}, not a set or class"))),
    };
    Ok(Output::ok(match opts.format {
        Format::Text => format!("{after}\n"),
        Format::Json => pretty(&json!({
            "input": before.to_string(),
            "simplified": after.to_string(),
            "rewrites": steps,
        })),
    }))
}

/// Names of the two instances compared or related by a command.
#[derive(Clone, Debug)]
pub struct Pair {
    pub left: String,
    pub right: String,
}

impl Default for Pair {
    fn default() -> Self {
        Pair { left: "N".into(), right: "N'".into() }
    }
}

pub fn iso_json(set: &IsoSet) -> Json {
    let witnesses: Vec<Json> = set
        .witnesses
        .iter()
        .map(|w| {
            Json::Array(
                w.components()
                    .iter()
                    .map(|f| {
                        Json::Array(
                            f.table().iter().map(|(k, v)| json!([k.to_string(), v.to_string()])).collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    json!({
        "isomorphic": !set.is_empty(),
        "witnessCount": set.len(),
        "witnesses": witnesses,
    })
}

pub fn run_iso(paths: &[PathBuf], class: Option<&str>, pair: &Pair, opts: &Options) -> Result<Output, CliError> {
    let ws = Workspace::open(&Inputs::sort(paths, opts)?, opts, true)?;
    let sigma = ws.class(class)?;
    let (n, n2) = (ws.instance(&sigma, &pair.left)?, ws.instance(&sigma, &pair.right)?);
    let set = id_set_with(ws.ctx(), &sigma, &n, &n2, &ws.model, Strategy::default())?;
    Ok(Output::ok(match opts.format {
        Format::Text => {
            let mut s = format!("isomorphic: {}\nwitnesses: {}\n", !set.is_empty(), set.len());
            for w in &set.witnesses {
                s.push_str(&format!("{w}\n"));
            }
            s
        }
        Format::Json => pretty(&iso_json(&set)),
    }))
}

/// Carries an instance along a bijection tuple: the sorts are replaced by
/// the images and the structure by its transport.
pub fn transport_instance(ctx: &Context, model: &FiniteModel, sa: &SAClass, n: &Value, f: &BijectionTuple) -> Result<Value, CliError> {
    let s = sa.eval_to_sa(ctx, model, n)?;
    let inst = split_instance(sa, &s)?;
    let to: Vec<_> = f.components().iter().map(|c| btt_core::semantics::SetValue::new(c.image())).collect();
    if !f.is_between(&inst.carriers, &to) {
        return Err(CliError::Semantic(format!("`{f}` is not a tuple of bijections out of the sorts of the instance")));
    }
    let plan = compile_subst_plan(ctx, sa.sorts, &SetFamily::new(sa.alpha.clone(), sa.signature.clone()))?;
    let x2 = plan.apply(f, &inst.structure)?;
    Ok(sa.eval_from_sa(ctx, model, &Value::pair(join_sorts(&to), x2))?)
}

pub fn run_transport(
    paths: &[PathBuf],
    class: Option<&str>,
    instance: &str,
    bijection: &str,
    opts: &Options,
) -> Result<Output, CliError> {
    let ws = Workspace::open(&Inputs::sort(paths, opts)?, opts, true)?;
    let sigma = ws.class(class)?;
    let sa = ws.normalize(&sigma)?;
    let n = ws.instance(&sigma, instance)?;
    let fv = ws.binding(bijection)?;
    let f = BijectionTuple::from_value(fv, sa.sorts)
        .ok_or_else(|| CliError::Semantic(format!("`{bijection}` is not a tuple of {} functions", sa.sorts)))?;
    let out = transport_instance(ws.ctx(), &ws.model, &sa, &n, &f)?;
    Ok(Output::ok(match opts.format {
        Format::Text => format!("{out}\n"),
        Format::Json => pretty(&json!({ "value": out.to_string() })),
    }))
}

/// Arguments of `jprime` and `j`.
#[derive(Clone, Debug, Default)]
pub struct JArgs {
    pub class: Option<String>,
    pub pair: Pair,
    pub bijection: Option<String>,
    pub tau: String,
    pub delta: Option<String>,
}

pub fn run_j(paths: &[PathBuf], args: &JArgs, opts: &Options) -> Result<Output, CliError> {
    let ws = Workspace::open(&Inputs::sort(paths, opts)?, opts, true)?;
    let sigma = ws.class(args.class.as_deref())?;
    let sa = ws.normalize(&sigma)?;
    let (n, n2) = (ws.instance(&sigma, &args.pair.left)?, ws.instance(&sigma, &args.pair.right)?);
    let f = ws.bijection(&sigma, &sa, &n, &n2, args.bijection.as_deref())?;
    let tau = ws.macro_def(&args.tau)?;
    let out = match &args.delta {
        None => Value::Fun(j_prime(ws.ctx(), &sigma, &n, &n2, &f, tau, &ws.model)?),
        Some(d) => {
            let delta = ws.macro_def(d)?;
            j_operator(ws.ctx(), &sigma, &n, &n2, &f, tau, delta, &ws.model)?
        }
    };
    Ok(Output::ok(match opts.format {
        Format::Text => format!("{out}\n"),
        Format::Json => pretty(&json!({ "bijection": f.to_string(), "value": out.to_string() })),
    }))
}

fn pretty(j: &Json) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Renders a failure for stderr, as text or as a JSON object.
pub fn render_error(e: &CliError, format: Format) -> String {
    match format {
        Format::Text => format!("error: {e}"),
        Format::Json => serde_json::to_string(&json!({
            "error": e.reason(),
            "message": e.to_string(),
            "exitCode": e.exit_code(),
        }))
        .expect("JSON values serialize"),
    }
}
