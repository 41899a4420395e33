//! Macro types, macro definitions, expansion to the base language, and the
//! cryptomorphism check.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::semantics::{EvalError, Evaluator, FiniteModel, Value};
use crate::syntax::{
    fresh_name, map_children, substitute, substitute_many, Binder, Expr, ExprKind, Name, VACUOUS,
};
use crate::typecheck::{Checker, Context, Entry, Reason, TypeError, TypeVerdict};

#[derive(Clone, Debug)]
pub enum MacroType {
    Base(Expr),
    /// `MPi(x : M1) M2`; non-dependent arrows use the vacuous binder.
    Arrow(Name, Box<MacroType>, Box<MacroType>),
}

impl MacroType {
    pub fn arity(&self) -> usize {
        match self {
            MacroType::Base(_) => 0,
            MacroType::Arrow(_, _, r) => 1 + r.arity(),
        }
    }

    pub fn substitute(&self, var: &str, e: &Expr) -> MacroType {
        match self {
            MacroType::Base(t) => MacroType::Base(substitute(t, var, e)),
            MacroType::Arrow(x, a, r) => {
                let a2 = a.substitute(var, e);
                if &**x == var {
                    MacroType::Arrow(x.clone(), Box::new(a2), r.clone())
                } else {
                    MacroType::Arrow(x.clone(), Box::new(a2), Box::new(r.substitute(var, e)))
                }
            }
        }
    }

    pub fn substitute_many(&self, subst: &[(Name, Expr)]) -> MacroType {
        subst.iter().fold(self.clone(), |m, (n, e)| m.substitute(n, e))
    }

    fn from_verdict(v: TypeVerdict) -> MacroType {
        MacroType::Base(match v {
            TypeVerdict::IsBool => Expr::bool_sort(),
            TypeVerdict::IsSet => Expr::set(),
            TypeVerdict::IsClass => Expr::class(),
            TypeVerdict::IsSetElement(t) | TypeVerdict::IsClassElement(t) => t,
        })
    }
}

impl fmt::Display for MacroType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MacroType::Base(t) => write!(f, "{t}"),
            MacroType::Arrow(x, a, r) if &**x == VACUOUS && matches!(**a, MacroType::Base(_)) => {
                write!(f, "{a} ~> {r}")
            }
            MacroType::Arrow(x, a, r) => write!(f, "MPi({x} : {a}) {r}"),
        }
    }
}

/// A named macro `name(params) := body`. Parameters of base type are
/// ordinary variables in the body; parameters of arrow type are macro
/// variables.
#[derive(Clone, Debug)]
pub struct MacroDef {
    pub name: Name,
    pub params: Vec<(Name, MacroType)>,
    pub body: Expr,
}

impl MacroDef {
    pub fn new(name: impl Into<Name>, params: Vec<(Name, MacroType)>, body: Expr) -> Self {
        MacroDef { name: name.into(), params, body }
    }

    /// A one-parameter macro `name(x : ty) := body`.
    pub fn unary(name: impl Into<Name>, param: impl Into<Name>, ty: Expr, body: Expr) -> Self {
        MacroDef::new(name, vec![(param.into(), MacroType::Base(ty))], body)
    }

    /// Substitutes the arguments for the parameters in the body.
    pub fn instantiate(&self, args: &[Expr]) -> Expr {
        assert_eq!(args.len(), self.params.len(), "macro `{}` arity", self.name);
        let subst: Vec<(Name, Expr)> = self.params.iter().map(|(p, _)| p.clone()).zip(args.iter().cloned()).collect();
        substitute_many(&self.body, &subst)
    }
}

impl fmt::Display for MacroDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "def {}", self.name)?;
        if !self.params.is_empty() {
            f.write_str("(")?;
            for (i, (p, t)) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p} : {t}")?;
            }
            f.write_str(")")?;
        }
        write!(f, " := {}", self.body)
    }
}

#[derive(Clone, Debug, Error)]
pub enum MacroError {
    #[error("internal error: expansion exceeded {0} reduction steps")]
    StepLimit(usize),
}

/// Upper bound on reduction steps in one expansion. Macro bodies are
/// non-recursive, so reaching it signals an implementation bug.
pub const EXPANSION_STEP_LIMIT: usize = 100_000;

/// Expands macros to the base language by normal-order reduction. Besides
/// macro applications and 0-ary definitions, projections of explicit pairs
/// and applications of explicit lambdas are reduced. Applications of
/// abstract macro variables are left in place.
pub fn expand(ctx: &Context, e: &Expr) -> Result<Expr, MacroError> {
    expand_counting(ctx, e).map(|(x, _)| x)
}

/// Like [`expand`], also returning the number of reduction steps taken.
pub fn expand_counting(ctx: &Context, e: &Expr) -> Result<(Expr, usize), MacroError> {
    let mut def_free = BTreeSet::new();
    let mut has_defs = false;
    for entry in ctx.entries() {
        if let Entry::Define(d) = entry {
            has_defs = true;
            let mut fv = d.body.free_vars();
            for (p, _) in &d.params {
                fv.remove(p);
            }
            def_free.extend(fv);
        }
    }
    let mut x = Expander { ctx, steps: 0, def_free, has_defs };
    let out = x.norm(e, &mut Vec::new())?;
    Ok((out, x.steps))
}

struct Expander<'a> {
    ctx: &'a Context,
    steps: usize,
    def_free: BTreeSet<Name>,
    has_defs: bool,
}

impl Expander<'_> {
    fn step(&mut self) -> Result<(), MacroError> {
        self.steps += 1;
        if self.steps > EXPANSION_STEP_LIMIT {
            return Err(MacroError::StepLimit(EXPANSION_STEP_LIMIT));
        }
        Ok(())
    }

    fn def(&self, name: &str, bound: &[Name]) -> Option<&MacroDef> {
        if !self.has_defs || bound.iter().any(|b| &**b == name) {
            return None;
        }
        self.ctx.lookup_def(name)
    }

    fn norm(&mut self, e: &Expr, bound: &mut Vec<Name>) -> Result<Expr, MacroError> {
        match e.kind() {
            ExprKind::Var(n) => match self.def(n, bound) {
                Some(d) if d.params.is_empty() => {
                    let body = d.body.clone();
                    self.step()?;
                    self.norm(&body, bound)
                }
                _ => Ok(e.clone()),
            },
            ExprKind::MacroApp(h, args) => {
                let mut head = h.clone();
                let mut args: Vec<Expr> = args.clone();
                loop {
                    match head.kind() {
                        ExprKind::MacroApp(h2, a2) => {
                            let mut all = a2.clone();
                            all.extend(args);
                            args = all;
                            head = h2.clone();
                        }
                        ExprKind::Var(n) => {
                            let Some(d) = self.def(n, bound) else { break };
                            if d.params.is_empty() {
                                let body = d.body.clone();
                                self.step()?;
                                head = body;
                                continue;
                            }
                            if args.len() < d.params.len() {
                                break;
                            }
                            let rest = args.split_off(d.params.len());
                            let body = d.instantiate(&args);
                            self.step()?;
                            return self.norm(&with_args(body, rest), bound);
                        }
                        ExprKind::Bind(Binder::Lambda, x, _, b) if !args.is_empty() => {
                            let rest = args.split_off(1);
                            let body = substitute(b, x, &args[0]);
                            self.step()?;
                            return self.norm(&with_args(body, rest), bound);
                        }
                        _ => break,
                    }
                }
                let head = self.norm(&head, bound)?;
                let args = args.iter().map(|a| self.norm(a, bound)).collect::<Result<Vec<_>, _>>()?;
                Ok(Expr::with_span(ExprKind::MacroApp(head, args), e.span()))
            }
            ExprKind::Proj(i, p) => {
                let p2 = self.norm(p, bound)?;
                if let ExprKind::Pair(a, b) = p2.kind() {
                    self.step()?;
                    return Ok(match i {
                        crate::syntax::ProjIndex::First => a.clone(),
                        crate::syntax::ProjIndex::Second => b.clone(),
                    });
                }
                Ok(Expr::with_span(ExprKind::Proj(*i, p2), e.span()))
            }
            ExprKind::App(f, a) => {
                let f2 = self.norm(f, bound)?;
                let a2 = self.norm(a, bound)?;
                if let ExprKind::Bind(Binder::Lambda, x, _, b) = f2.kind() {
                    self.step()?;
                    let body = substitute(b, x, &a2);
                    return self.norm(&body, bound);
                }
                Ok(Expr::with_span(ExprKind::App(f2, a2), e.span()))
            }
            ExprKind::Bind(b, x, d, body) => {
                let d2 = self.norm(d, bound)?;
                let (x, body) = if self.def_free.contains(x) {
                    let fv = body.free_vars();
                    let fresh = fresh_name(x, &|c: &str| {
                        self.def_free.contains(c) || fv.contains(c) || bound.iter().any(|n| &**n == c)
                    });
                    (fresh.clone(), substitute(body, x, &Expr::var(fresh)))
                } else {
                    (x.clone(), body.clone())
                };
                bound.push(x.clone());
                let body2 = self.norm(&body, bound);
                bound.pop();
                Ok(Expr::with_span(ExprKind::Bind(*b, x, d2, body2?), e.span()))
            }
            _ => {
                let mut failure = None;
                let out = map_children(e, |c| match self.norm(c, bound) {
                    Ok(x) => x,
                    Err(m) => {
                        failure = Some(m);
                        c.clone()
                    }
                });
                match failure {
                    Some(m) => Err(m),
                    None => Ok(out),
                }
            }
        }
    }
}

fn with_args(e: Expr, rest: Vec<Expr>) -> Expr {
    if rest.is_empty() {
        e
    } else {
        Expr::macro_app(e, rest)
    }
}

/// Checks that a macro type is well formed: base types are sets, classes,
/// or the universes themselves.
pub fn check_macro_type(ctx: &Context, mt: &MacroType) -> Result<(), TypeError> {
    match mt {
        MacroType::Base(t) => {
            if matches!(t.kind(), ExprKind::UnivClass | ExprKind::UnivSet) {
                return Ok(());
            }
            match Checker::new(ctx).infer(t)? {
                TypeVerdict::IsSet | TypeVerdict::IsClass => Ok(()),
                v => Err(TypeError::new(Reason::NotAType, t.span(), format!("`{t}` is not a type ({v})"))),
            }
        }
        MacroType::Arrow(x, a, r) => {
            check_macro_type(ctx, a)?;
            let inner = ctx.extended(param_entry(x, a));
            check_macro_type(&inner, r)
        }
    }
}

fn param_entry(name: &Name, mt: &MacroType) -> Entry {
    match mt {
        MacroType::Base(t) => Entry::Decl(name.clone(), t.clone()),
        arrow => Entry::MacroDecl(name.clone(), arrow.clone()),
    }
}

/// Checks a definition's body under its parameters and returns its macro type.
pub fn check_macro(ctx: &Context, def: &MacroDef) -> Result<MacroType, TypeError> {
    let mut inner = ctx.clone();
    for (p, mt) in &def.params {
        check_macro_type(&inner, mt)?;
        if inner.is_declared(p) {
            return Err(TypeError::new(
                Reason::DuplicateDeclaration,
                def.body.span(),
                format!("parameter `{p}` of `{}` shadows a declared name", def.name),
            ));
        }
        inner.push_unchecked(param_entry(p, mt));
    }
    let v = Checker::new(&inner).infer(&def.body)?;
    let mut out = MacroType::from_verdict(v);
    for (p, mt) in def.params.iter().rev() {
        out = MacroType::Arrow(p.clone(), Box::new(mt.clone()), Box::new(out));
    }
    Ok(out)
}

/// Checks `G[F[x]] = x` for every given instance of `sigma` and
/// `F[G[y]] = y` for every given instance of `tau`, as set-theoretic equalities.
#[allow(clippy::too_many_arguments)]
pub fn check_cryptomorphism(
    ctx: &Context,
    sigma: &Expr,
    tau: &Expr,
    f: &MacroDef,
    g: &MacroDef,
    model: &FiniteModel,
    sigma_instances: &[Value],
    tau_instances: &[Value],
) -> Result<bool, EvalError> {
    let roundtrip = |outer: &MacroDef, inner: &MacroDef, ty: &Expr, v: &Value| -> Result<bool, EvalError> {
        let names = ctx.names();
        let n = fresh_name("n", &|c: &str| names.contains(c));
        let e = outer.instantiate(&[inner.instantiate(&[Expr::var(n.clone())])]);
        let mut ev = Evaluator::new(ctx, model);
        ev.bind(n, ty.clone(), v.clone());
        Ok(ev.eval(&e)? == *v)
    };
    for v in sigma_instances {
        if !roundtrip(g, f, sigma, v)? {
            return Ok(false);
        }
    }
    for v in tau_instances {
        if !roundtrip(f, g, tau, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}
