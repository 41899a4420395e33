//! Loading `.btt` sources and running their embedded directives.

use std::fs;
use std::path::{Path, PathBuf};

use btt_core::semantics::{eval, parse_model, EvalError, FiniteModel, Value};
use btt_core::syntax::source::{parse_file, CheckDirective, Expectation, Item, SequentEntry};
use btt_core::syntax::{Expr, Span};
use btt_core::typecheck::{check_against, check_type, Context, Entry, TypeError};

use crate::CliError;

/// The outcome of one directive, or of one context entry that failed to check.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub file: String,
    pub span: Span,
    pub directive: &'static str,
    pub passed: bool,
    /// Reason code of the type error observed, if any.
    pub reason: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn render(&self) -> String {
        let status = if self.passed { "ok" } else { "FAIL" };
        let mut s = format!("{}:{}:{}: {} {}", self.file, self.span.start_line, self.span.start_col, self.directive, status);
        if let Some(r) = &self.reason {
            s.push_str(&format!(" [{r}]"));
        }
        if !self.message.is_empty() {
            s.push_str(": ");
            s.push_str(&self.message);
        }
        s
    }
}

/// A source file after its declarations have been pushed into a context.
#[derive(Clone, Debug, Default)]
pub struct Session {
    pub ctx: Context,
    /// The model named by the last `#model` directive, if any.
    pub model: Option<FiniteModel>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Session {
    pub fn passed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed)
    }

    /// The last parameterless definition, the default class for commands
    /// that take one.
    pub fn last_def(&self) -> Option<&str> {
        self.ctx.entries().iter().rev().find_map(|e| match e {
            Entry::Define(d) if d.params.is_empty() => Some(&*d.name),
            _ => None,
        })
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path, budget: Option<usize>) -> Result<FiniteModel, CliError> {
    let text = read(path)?;
    let model = parse_model(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(match budget {
        Some(b) => model.with_budget(b),
        None => model,
    })
}

/// Loads a source file. With `run_directives` off, directives are skipped and
/// the first ill-formed entry is an error; with it on, every directive is
/// checked and failures are recorded as diagnostics.
pub fn load(path: &Path, budget: Option<usize>, run_directives: bool) -> Result<Session, CliError> {
    let text = read(path)?;
    let items = parse_file(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let file = path.display().to_string();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut session = Session::default();
    for item in items {
        let span = item.span();
        let entry = match item {
            Item::Def(d, _) => Entry::Define(d),
            Item::MacroVar(n, t, _) => Entry::MacroDecl(n, t),
            Item::Var(n, t, _) => Entry::Decl(n, t),
            Item::Assume(a, _) => Entry::Assume(a),
            Item::Model(rel, _) => {
                let p: PathBuf = base.join(rel);
                session.model = Some(load_model(&p, budget)?);
                continue;
            }
            Item::Check(c) => {
                if run_directives {
                    let d = run_check(&session.ctx, &c, &file);
                    session.diagnostics.push(d);
                }
                continue;
            }
            Item::Eval { expr, expected, span } => {
                if run_directives {
                    let d = run_eval(&session, &expr, &expected, span, &file)?;
                    session.diagnostics.push(d);
                }
                continue;
            }
        };
        if let Err(e) = session.ctx.push(entry.clone()) {
            let e = e.or_span(span);
            if !run_directives {
                return Err(CliError::Type(format!("{file}: {e}"), e.reason.code().to_string()));
            }
            session.diagnostics.push(Diagnostic {
                file: file.clone(),
                span: e.span,
                directive: "entry",
                passed: false,
                reason: Some(e.reason.code().to_string()),
                message: e.message.clone(),
            });
            // Later items may still refer to the entry.
            session.ctx.push_unchecked(entry);
        }
    }
    Ok(session)
}

/// Checks one sequent: its entries in order, then the expression.
pub fn check_sequent(ctx: &Context, entries: &[SequentEntry], e: &Expr, ty: Option<&Expr>) -> Result<(), TypeError> {
    let mut local = ctx.clone();
    for entry in entries {
        let entry = match entry {
            SequentEntry::Decl(n, t) => Entry::Decl(n.clone(), t.clone()),
            SequentEntry::Assume(a) => Entry::Assume(a.clone()),
        };
        local.push(entry)?;
    }
    match ty {
        Some(t) => check_against(&local, e, t),
        None => check_type(&local, e).map(|_| ()),
    }
}

fn run_check(ctx: &Context, c: &CheckDirective, file: &str) -> Diagnostic {
    let result = check_sequent(ctx, &c.entries, &c.expr, c.ty.as_ref());
    let (directive, passed, reason, message) = match (&c.expect, result) {
        (Expectation::Ok, Ok(())) => ("check", true, None, String::new()),
        (Expectation::Ok, Err(e)) => ("check", false, Some(e.reason.code().to_string()), e.message),
        (Expectation::Fail(want), Ok(())) => {
            ("check_fail", false, None, format!("expected {want}, but the sequent is well formed"))
        }
        (Expectation::Fail(want), Err(e)) => {
            let got = e.reason.code();
            if got == want {
                ("check_fail", true, Some(got.to_string()), String::new())
            } else {
                ("check_fail", false, Some(got.to_string()), format!("expected {want}: {}", e.message))
            }
        }
    };
    Diagnostic { file: file.to_string(), span: c.span, directive, passed, reason, message }
}

fn run_eval(session: &Session, e: &Expr, expected: &Value, span: Span, file: &str) -> Result<Diagnostic, CliError> {
    let empty = FiniteModel::default();
    let model = session.model.as_ref().unwrap_or(&empty);
    let (passed, message) = match eval(&session.ctx, model, e) {
        Ok(v) if &v == expected => (true, String::new()),
        Ok(v) => (false, format!("`{e}` evaluates to `{v}`, expected `{expected}`")),
        Err(err @ EvalError::BudgetExceeded { .. }) => return Err(CliError::Budget(format!("{file}: {err}"))),
        Err(err) => (false, err.to_string()),
    };
    Ok(Diagnostic { file: file.to_string(), span, directive: "eval", passed, reason: None, message })
}
