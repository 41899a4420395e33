use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::macros::{self, MacroError};
use crate::syntax::{Binder, Connective, Expr, ExprKind, Name, ProjIndex};
use crate::typecheck::{Context, Entry};

use super::{FiniteModel, FunValue, SetValue, Value};

#[derive(Clone, Debug, Error)]
pub enum EvalError {
    #[error("`{0}` denotes a class, which cannot be enumerated")]
    ClassNotEnumerable(String),
    #[error("budget exceeded: {what} has {size} elements, budget is {budget}")]
    BudgetExceeded { what: String, size: String, budget: usize },
    #[error("`{expr}` has {count} witnesses, exactly one is required")]
    TheFailure { expr: String, count: usize },
    #[error("`{0}` has no value in the model")]
    Unbound(String),
    #[error("expected a {expected} value for `{expr}`, found a {found}")]
    TagMismatch { expected: &'static str, found: &'static str, expr: String },
    #[error("`{arg}` is outside the domain of `{expr}`")]
    OutOfDomain { expr: String, arg: String },
    #[error("`{0}` applies an abstract macro and has no value")]
    AbstractMacro(String),
    #[error("binding for `{name}` does not satisfy the context: {detail}")]
    BindingMismatch { name: String, detail: String },
    #[error(transparent)]
    Macro(#[from] MacroError),
    #[error("isomorphism decision failed: {0}")]
    Iso(String),
}

/// Evaluates base-language expressions over a finite model.
pub struct Evaluator<'a> {
    ctx: &'a Context,
    model: &'a FiniteModel,
    scope: Vec<(Name, Expr, Value)>,
}

/// Evaluates `e` (after macro expansion) in `model`.
pub fn eval(ctx: &Context, model: &FiniteModel, e: &Expr) -> Result<Value, EvalError> {
    Evaluator::new(ctx, model).eval(e)
}

/// True if `v` is an element of the set or class `ty`.
pub fn check_inhabits(v: &Value, ctx: &Context, model: &FiniteModel, ty: &Expr) -> Result<bool, EvalError> {
    Evaluator::new(ctx, model).inhabits(v, ty)
}

/// Checks every declaration of `ctx` against its binding in `model` and every
/// assumption for truth, in context order.
pub fn validate_model(ctx: &Context, model: &FiniteModel) -> Result<(), EvalError> {
    for entry in ctx.entries() {
        match entry {
            Entry::Decl(n, t) => {
                let Some(v) = model.get(n) else {
                    return Err(EvalError::BindingMismatch { name: n.to_string(), detail: "no binding".into() });
                };
                if !check_inhabits(v, ctx, model, t)? {
                    return Err(EvalError::BindingMismatch {
                        name: n.to_string(),
                        detail: format!("`{v}` is not an element of `{t}`"),
                    });
                }
            }
            Entry::Assume(a) => {
                if eval(ctx, model, a)? != Value::Bool(true) {
                    return Err(EvalError::BindingMismatch {
                        name: a.to_string(),
                        detail: "assumption is false".into(),
                    });
                }
            }
            Entry::MacroDecl(..) | Entry::Define(_) => {}
        }
    }
    Ok(())
}

fn tag_err(expected: &'static str, v: &Value, e: &Expr) -> EvalError {
    EvalError::TagMismatch { expected, found: v.tag(), expr: e.to_string() }
}

impl<'a> Evaluator<'a> {
    pub fn new(ctx: &'a Context, model: &'a FiniteModel) -> Self {
        Evaluator { ctx, model, scope: Vec::new() }
    }

    /// Adds a variable binding visible to later evaluations.
    pub fn bind(&mut self, name: Name, ty: Expr, v: Value) {
        self.scope.push((name, ty, v));
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        let e = macros::expand(self.ctx, e)?;
        self.ev(&e)
    }

    /// Evaluates `e` and requires a set value.
    pub fn eval_set(&mut self, e: &Expr) -> Result<SetValue, EvalError> {
        let e = macros::expand(self.ctx, e)?;
        self.ev_set(&e)
    }

    pub fn inhabits(&mut self, v: &Value, ty: &Expr) -> Result<bool, EvalError> {
        let t = macros::expand(self.ctx, ty)?;
        self.inh(v, &t)
    }

    fn lookup(&self, n: &str) -> Result<Value, EvalError> {
        if let Some((_, _, v)) = self.scope.iter().rev().find(|(x, _, _)| &**x == n) {
            return Ok(v.clone());
        }
        self.model.get(n).cloned().ok_or_else(|| EvalError::Unbound(n.to_string()))
    }

    fn with<T>(&mut self, name: &Name, ty: &Expr, v: Value, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name.clone(), ty.clone(), v));
        let r = f(self);
        self.scope.pop();
        r
    }

    fn check_budget(&self, what: &Expr, size: u128) -> Result<(), EvalError> {
        if size > self.model.budget as u128 {
            return Err(EvalError::BudgetExceeded {
                what: format!("`{what}`"),
                size: size.to_string(),
                budget: self.model.budget,
            });
        }
        Ok(())
    }

    fn ev_set(&mut self, e: &Expr) -> Result<SetValue, EvalError> {
        match self.ev(e)? {
            Value::Set(s) => Ok(s),
            v => Err(tag_err("set", &v, e)),
        }
    }

    fn ev_bool(&mut self, e: &Expr) -> Result<bool, EvalError> {
        match self.ev(e)? {
            Value::Bool(b) => Ok(b),
            v => Err(tag_err("boolean", &v, e)),
        }
    }

    fn ev(&mut self, e: &Expr) -> Result<Value, EvalError> {
        match e.kind() {
            ExprKind::UnivSet | ExprKind::UnivClass => Err(EvalError::ClassNotEnumerable(e.to_string())),
            ExprKind::BoolSort => Ok(Value::set([Value::Bool(false), Value::Bool(true)])),
            ExprKind::BoolLit(b) => Ok(Value::Bool(*b)),
            ExprKind::Var(n) => self.lookup(n),
            ExprKind::Pair(a, b) => Ok(Value::pair(self.ev(a)?, self.ev(b)?)),
            ExprKind::Proj(i, p) => match self.ev(p)? {
                Value::Pair(a, b) => Ok(match i {
                    ProjIndex::First => (*a).clone(),
                    ProjIndex::Second => (*b).clone(),
                }),
                v => Err(tag_err("pair", &v, p)),
            },
            ExprKind::App(f, a) => {
                let fv = self.ev(f)?;
                let av = self.ev(a)?;
                match &fv {
                    Value::Fun(t) => t.apply(&av).cloned().ok_or_else(|| EvalError::OutOfDomain {
                        expr: f.to_string(),
                        arg: av.to_string(),
                    }),
                    v => Err(tag_err("function", v, f)),
                }
            }
            ExprKind::SetEq(a, b) => Ok(Value::Bool(self.ev(a)? == self.ev(b)?)),
            ExprKind::IsoEq(class, n, m) => {
                let nv = self.ev(n)?;
                let mv = self.ev(m)?;
                let mut ctx = self.ctx.clone();
                let mut model = self.model.clone();
                for (name, ty, v) in &self.scope {
                    ctx.push_unchecked(Entry::Decl(name.clone(), ty.clone()));
                    model.assignment.insert(name.clone(), v.clone());
                }
                crate::transport::decide_iso(&ctx, class, &nv, &mv, &model)
                    .map(Value::Bool)
                    .map_err(|x| EvalError::Iso(x.to_string()))
            }
            ExprKind::Not(f) => Ok(Value::Bool(!self.ev_bool(f)?)),
            ExprKind::Conn(c, f, g) => {
                let a = self.ev_bool(f)?;
                let r = match c {
                    Connective::And => a && self.ev_bool(g)?,
                    Connective::Or => a || self.ev_bool(g)?,
                    Connective::Implies => !a || self.ev_bool(g)?,
                    Connective::Iff => a == self.ev_bool(g)?,
                };
                Ok(Value::Bool(r))
            }
            ExprKind::MacroApp(..) => Err(EvalError::AbstractMacro(e.to_string())),
            ExprKind::Bind(binder, x, d, body) => self.ev_binder(e, *binder, x, d, body),
        }
    }

    fn ev_binder(&mut self, e: &Expr, binder: Binder, x: &Name, d: &Expr, body: &Expr) -> Result<Value, EvalError> {
        let dom = self.ev_set(d)?;
        match binder {
            Binder::Sigma => {
                let mut out = BTreeSet::new();
                let mut size: u128 = 0;
                for a in dom.iter() {
                    let bs = self.with(x, d, a.clone(), |s| s.ev_set(body))?;
                    size += bs.len() as u128;
                    self.check_budget(e, size)?;
                    for b in bs.iter() {
                        out.insert(Value::pair(a.clone(), b.clone()));
                    }
                }
                Ok(Value::Set(SetValue::new(out)))
            }
            Binder::Pi => {
                let mut columns: Vec<(Value, Vec<Value>)> = Vec::with_capacity(dom.len());
                let mut size: u128 = 1;
                for a in dom.iter() {
                    let cs = self.with(x, d, a.clone(), |s| s.ev_set(body))?;
                    size = size.saturating_mul(cs.len() as u128);
                    self.check_budget(e, size)?;
                    columns.push((a.clone(), cs.iter().cloned().collect()));
                }
                Ok(Value::Set(SetValue::new(all_functions(&columns))))
            }
            Binder::Lambda => {
                let mut table = BTreeMap::new();
                for a in dom.iter() {
                    let v = self.with(x, d, a.clone(), |s| s.ev(body))?;
                    table.insert(a.clone(), v);
                }
                Ok(Value::Fun(FunValue::new(table)))
            }
            Binder::Subset => {
                let mut out = BTreeSet::new();
                for a in dom.iter() {
                    if self.with(x, d, a.clone(), |s| s.ev_bool(body))? {
                        out.insert(a.clone());
                    }
                }
                Ok(Value::Set(SetValue::new(out)))
            }
            Binder::Forall | Binder::Exists => {
                let want = binder == Binder::Exists;
                for a in dom.iter() {
                    if self.with(x, d, a.clone(), |s| s.ev_bool(body))? == want {
                        return Ok(Value::Bool(want));
                    }
                }
                Ok(Value::Bool(!want))
            }
            Binder::The => {
                let mut witnesses = Vec::new();
                for a in dom.iter() {
                    if self.with(x, d, a.clone(), |s| s.ev_bool(body))? {
                        witnesses.push(a.clone());
                    }
                }
                if witnesses.len() == 1 {
                    Ok(witnesses.pop().unwrap())
                } else {
                    Err(EvalError::TheFailure { expr: e.to_string(), count: witnesses.len() })
                }
            }
        }
    }

    /// Structural membership test. Classes are handled by recursion on their
    /// syntax and never enumerated.
    fn inh(&mut self, v: &Value, t: &Expr) -> Result<bool, EvalError> {
        match t.kind() {
            ExprKind::UnivSet => Ok(matches!(v, Value::Set(_))),
            ExprKind::UnivClass => Ok(false),
            ExprKind::BoolSort => Ok(matches!(v, Value::Bool(_))),
            ExprKind::Bind(Binder::Sigma, x, a, b) => {
                let Value::Pair(p1, p2) = v else { return Ok(false) };
                if !self.inh(p1, a)? {
                    return Ok(false);
                }
                self.with(x, a, (**p1).clone(), |s| s.inh(p2, b))
            }
            ExprKind::Bind(Binder::Subset, x, a, phi) => {
                if !self.inh(v, a)? {
                    return Ok(false);
                }
                self.with(x, a, v.clone(), |s| s.ev_bool(phi))
            }
            ExprKind::Bind(Binder::Pi, x, a, b) => {
                let Value::Fun(f) = v else { return Ok(false) };
                let dom = self.ev_set(a)?;
                if f.len() != dom.len() || !f.domain().all(|k| dom.contains(k)) {
                    return Ok(false);
                }
                for (k, fk) in f.table().iter() {
                    if !self.with(x, a, k.clone(), |s| s.inh(fk, b))? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(self.ev_set(t)?.contains(v)),
        }
    }
}

/// Every function with the given domain points and candidate images.
fn all_functions(columns: &[(Value, Vec<Value>)]) -> BTreeSet<Value> {
    let mut out = BTreeSet::new();
    if columns.iter().any(|(_, c)| c.is_empty()) {
        return out;
    }
    let mut idx = vec![0usize; columns.len()];
    loop {
        let table: BTreeMap<Value, Value> =
            columns.iter().zip(&idx).map(|((k, cs), &i)| (k.clone(), cs[i].clone())).collect();
        out.insert(Value::Fun(FunValue::new(table)));
        let mut pos = 0;
        loop {
            if pos == columns.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < columns[pos].1.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
