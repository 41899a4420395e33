use std::cell::RefCell;
use std::collections::HashMap;

use super::{Context, Reason, TypeError, TypeVerdict};
use crate::macros::{self, MacroType};
use crate::syntax::{
    alpha_eq, fresh_name, substitute, Binder, Connective, Expr, ExprKind, Name, ProjIndex, Span, VACUOUS,
};

/// A subset membership `formula` that the checker could not discharge, with
/// the bound variables in scope at that point.
#[derive(Clone, Debug)]
pub struct Obligation {
    pub scope: Vec<(Name, Expr)>,
    pub formula: Expr,
    pub span: Span,
}

pub struct Checker<'a> {
    ctx: &'a Context,
    scope: Vec<(Name, Expr)>,
    strict: bool,
    obligations: Vec<Obligation>,
    /// Expansions already computed; they depend only on `ctx`.
    expanded: RefCell<HashMap<Expr, Expr>>,
}

fn err(reason: Reason, e: &Expr, message: impl Into<String>) -> TypeError {
    TypeError::new(reason, e.span(), message)
}

impl<'a> Checker<'a> {
    pub fn new(ctx: &'a Context) -> Self {
        Checker { ctx, scope: Vec::new(), strict: true, obligations: Vec::new(), expanded: Default::default() }
    }

    pub fn lenient(ctx: &'a Context) -> Self {
        Checker { ctx, scope: Vec::new(), strict: false, obligations: Vec::new(), expanded: Default::default() }
    }

    pub fn into_obligations(self) -> Vec<Obligation> {
        self.obligations
    }

    /// Runs `f` with an additional bound variable in scope.
    pub fn with_var<T>(&mut self, name: Name, ty: Expr, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name, ty));
        let r = f(self);
        self.scope.pop();
        r
    }

    fn is_taken(&self, name: &str) -> bool {
        self.ctx.is_declared(name) || self.scope.iter().any(|(n, _)| &**n == name)
    }

    /// Renames the binder of `x`/`body` if `x` would shadow something in scope.
    fn open_binder(&self, x: &Name, body: &Expr) -> (Name, Expr) {
        if &**x == VACUOUS || !self.is_taken(x) {
            return (x.clone(), body.clone());
        }
        let fv = body.free_vars();
        let fresh = fresh_name(x, &|c: &str| self.is_taken(c) || fv.contains(c));
        let body2 = substitute(body, x, &Expr::var(fresh.clone()));
        (fresh, body2)
    }

    pub fn norm(&self, e: &Expr) -> Result<Expr, TypeError> {
        if let Some(x) = self.expanded.borrow().get(e) {
            return Ok(x.clone());
        }
        let x = macros::expand(self.ctx, e).map_err(|m| err(Reason::InternalError, e, m.to_string()))?;
        self.expanded.borrow_mut().insert(e.clone(), x.clone());
        Ok(x)
    }

    fn lookup_var(&self, name: &str) -> Option<&Expr> {
        self.scope.iter().rev().find(|(n, _)| &**n == name).map(|(_, t)| t)
    }

    /// Verdict for an element of the (unnormalized) type `ty`.
    pub fn element_verdict(&mut self, ty: &Expr) -> Result<TypeVerdict, TypeError> {
        let t = self.norm(ty)?;
        match t.kind() {
            ExprKind::UnivSet => Ok(TypeVerdict::IsSet),
            ExprKind::UnivClass => Ok(TypeVerdict::IsClass),
            ExprKind::BoolSort => Ok(TypeVerdict::IsBool),
            _ => match self.infer(&t)? {
                TypeVerdict::IsSet => Ok(TypeVerdict::IsSetElement(t)),
                TypeVerdict::IsClass => Ok(TypeVerdict::IsClassElement(t)),
                v => Err(err(Reason::NotAType, ty, format!("`{ty}` is not a type ({v})"))),
            },
        }
    }

    /// The chain `t`, domain of `t`, ... following subset expressions.
    fn subset_chain(&self, t: &Expr) -> Result<Vec<Expr>, TypeError> {
        let mut out = vec![t.clone()];
        let mut cur = t.clone();
        while let ExprKind::Bind(Binder::Subset, _, d, _) = cur.kind() {
            let d = self.norm(d)?;
            out.push(d.clone());
            cur = d;
        }
        Ok(out)
    }

    fn subsumes(&self, actual: &Expr, expected: &Expr) -> Result<bool, TypeError> {
        Ok(self.subset_chain(actual)?.iter().any(|t| alpha_eq(t, expected)))
    }

    fn find_in_chain(&self, t: &Expr, want: Binder) -> Result<Option<(Name, Expr, Expr)>, TypeError> {
        for c in self.subset_chain(t)? {
            if let ExprKind::Bind(b, x, d, body) = c.kind() {
                if *b == want {
                    return Ok(Some((x.clone(), d.clone(), body.clone())));
                }
            }
        }
        Ok(None)
    }

    pub fn expect_bool(&mut self, e: &Expr) -> Result<(), TypeError> {
        match self.infer(e)? {
            TypeVerdict::IsBool => Ok(()),
            TypeVerdict::IsSetElement(t) if self.subsumes(&t, &Expr::bool_sort())? => Ok(()),
            v => Err(err(Reason::NotBool, e, format!("expected a formula, found {v}"))),
        }
    }

    fn expect_universe(&mut self, e: &Expr) -> Result<TypeVerdict, TypeError> {
        match self.infer(e)? {
            v @ (TypeVerdict::IsSet | TypeVerdict::IsClass) => Ok(v),
            v => Err(err(Reason::NotAType, e, format!("`{e}` is neither a set nor a class ({v})"))),
        }
    }

    fn expect_set(&mut self, e: &Expr) -> Result<(), TypeError> {
        match self.infer(e)? {
            TypeVerdict::IsSet => Ok(()),
            TypeVerdict::IsClass => Err(err(Reason::PiOverClass, e, format!("`{e}` is a class, a set is required"))),
            v => Err(err(Reason::NotASet, e, format!("`{e}` is not a set ({v})"))),
        }
    }

    pub fn infer(&mut self, e: &Expr) -> Result<TypeVerdict, TypeError> {
        self.infer_inner(e).map_err(|x| x.or_span(e.span()))
    }

    fn infer_inner(&mut self, e: &Expr) -> Result<TypeVerdict, TypeError> {
        match e.kind() {
            ExprKind::UnivSet => Ok(TypeVerdict::IsClass),
            ExprKind::UnivClass => Err(err(Reason::UniverseHasNoType, e, "`Class` has no type")),
            ExprKind::BoolSort => Ok(TypeVerdict::IsSet),
            ExprKind::BoolLit(_) => Ok(TypeVerdict::IsBool),
            ExprKind::Var(n) => self.infer_var(e, n),
            ExprKind::Bind(binder, x, dom, body) => self.infer_binder(e, *binder, x, dom, body),
            ExprKind::Pair(a, b) => {
                let va = self.infer(a)?;
                let vb = self.infer(b)?;
                let ta = va.element_type().ok_or_else(|| err(Reason::NotAnElement, a, "a class cannot be paired"))?;
                let tb = vb.element_type().ok_or_else(|| err(Reason::NotAnElement, b, "a class cannot be paired"))?;
                let set_level = |v: &TypeVerdict| matches!(v, TypeVerdict::IsBool | TypeVerdict::IsSetElement(_));
                let ty = Expr::product(ta, tb);
                if set_level(&va) && set_level(&vb) {
                    Ok(TypeVerdict::IsSetElement(ty))
                } else {
                    Ok(TypeVerdict::IsClassElement(ty))
                }
            }
            ExprKind::Proj(i, p) => {
                let vp = self.infer(p)?;
                let t = match &vp {
                    TypeVerdict::IsSetElement(t) | TypeVerdict::IsClassElement(t) => t.clone(),
                    v => return Err(err(Reason::NotAPair, p, format!("`{p}` is not a pair ({v})"))),
                };
                let Some((x, a, b)) = self.find_in_chain(&t, Binder::Sigma)? else {
                    return Err(err(Reason::NotAPair, p, format!("`{p}` has type `{t}`, which is not a pair type")));
                };
                match i {
                    ProjIndex::First => self.element_verdict(&a),
                    ProjIndex::Second => {
                        let b2 = substitute(&b, &x, &Expr::fst(p.clone()));
                        self.element_verdict(&b2)
                    }
                }
            }
            ExprKind::App(f, a) => {
                let t = match self.infer(f)? {
                    TypeVerdict::IsSetElement(t) => t,
                    v => return Err(err(Reason::NotAFunction, f, format!("`{f}` is not a function ({v})"))),
                };
                let Some((x, dom, cod)) = self.find_in_chain(&t, Binder::Pi)? else {
                    return Err(err(Reason::NotAFunction, f, format!("`{f}` has type `{t}`, which is not a function set")));
                };
                self.check_norm(a, &dom)?;
                self.element_verdict(&substitute(&cod, &x, a))
            }
            ExprKind::SetEq(u, w) => {
                let vu = self.infer(u)?;
                let vw = self.infer(w)?;
                for (side, v) in [(u, &vu), (w, &vw)] {
                    if matches!(v, TypeVerdict::IsSet | TypeVerdict::IsClass | TypeVerdict::IsClassElement(_)) {
                        return Err(err(
                            Reason::SetEqOnClassElements,
                            e,
                            format!("`{side}` is not a set element ({v}); use an isomorphism equation"),
                        ));
                    }
                }
                let tu = vu.element_type().unwrap();
                let tw = vw.element_type().unwrap();
                let cu = self.subset_chain(&tu)?;
                let cw = self.subset_chain(&tw)?;
                if cu.iter().any(|a| cw.iter().any(|b| alpha_eq(a, b))) {
                    Ok(TypeVerdict::IsBool)
                } else {
                    Err(err(
                        Reason::EqualityAcrossSorts,
                        e,
                        format!("`{u}` has type `{tu}` but `{w}` has type `{tw}`"),
                    ))
                }
            }
            ExprKind::IsoEq(class, n, m) => {
                match self.infer(class)? {
                    TypeVerdict::IsClass => {}
                    v => return Err(err(Reason::NotAClass, class, format!("`{class}` is not a class ({v})"))),
                }
                let c = self.norm(class)?;
                self.check_norm(n, &c)?;
                self.check_norm(m, &c)?;
                Ok(TypeVerdict::IsBool)
            }
            ExprKind::Not(f) => {
                self.expect_bool(f)?;
                Ok(TypeVerdict::IsBool)
            }
            ExprKind::Conn(_, f, g) => {
                self.expect_bool(f)?;
                self.expect_bool(g)?;
                Ok(TypeVerdict::IsBool)
            }
            ExprKind::MacroApp(head, args) => self.infer_macro_app(e, head, args),
        }
    }

    fn infer_var(&mut self, e: &Expr, n: &Name) -> Result<TypeVerdict, TypeError> {
        if let Some(t) = self.lookup_var(n).cloned() {
            return self.element_verdict(&t);
        }
        if let Some(t) = self.ctx.lookup_decl(n).cloned() {
            return self.element_verdict(&t);
        }
        if let Some(d) = self.ctx.lookup_def(n) {
            if !d.params.is_empty() {
                return Err(err(
                    Reason::ArityMismatch,
                    e,
                    format!("macro `{n}` expects {} argument(s), found 0", d.params.len()),
                ));
            }
            let body = self.norm(e)?;
            return self.infer(&body);
        }
        if let Some(mt) = self.ctx.lookup_macro_decl(n) {
            return match mt {
                MacroType::Base(t) => {
                    let t = t.clone();
                    self.element_verdict(&t)
                }
                MacroType::Arrow(..) => Err(err(
                    Reason::ArityMismatch,
                    e,
                    format!("macro `{n}` expects {} argument(s), found 0", mt.arity()),
                )),
            };
        }
        Err(err(Reason::UnboundVariable, e, format!("`{n}` is not declared")))
    }

    fn infer_binder(
        &mut self,
        e: &Expr,
        binder: Binder,
        x: &Name,
        dom: &Expr,
        body: &Expr,
    ) -> Result<TypeVerdict, TypeError> {
        let (x, body) = self.open_binder(x, body);
        match binder {
            Binder::Sigma => {
                let vd = self.expect_universe(dom)?;
                let d = self.norm(dom)?;
                let vb = self.with_var(x, d, |c| c.expect_universe(&body))?;
                if matches!((vd, vb), (TypeVerdict::IsSet, TypeVerdict::IsSet)) {
                    Ok(TypeVerdict::IsSet)
                } else {
                    Ok(TypeVerdict::IsClass)
                }
            }
            Binder::Pi => {
                self.expect_set(dom)?;
                let d = self.norm(dom)?;
                self.with_var(x, d, |c| c.expect_set(&body))?;
                Ok(TypeVerdict::IsSet)
            }
            Binder::Lambda => {
                self.expect_set(dom)?;
                let d = self.norm(dom)?;
                let vb = self.with_var(x.clone(), d.clone(), |c| c.infer(&body))?;
                let tb = match vb {
                    TypeVerdict::IsBool => Expr::bool_sort(),
                    TypeVerdict::IsSetElement(t) => t,
                    v => {
                        return Err(err(
                            Reason::NotAnElement,
                            &body,
                            format!("function bodies must denote set elements, found {v}"),
                        ))
                    }
                };
                Ok(TypeVerdict::IsSetElement(Expr::pi(x, d, tb)))
            }
            Binder::Subset => {
                let vd = self.expect_universe(dom)?;
                let d = self.norm(dom)?;
                self.with_var(x, d, |c| c.expect_bool(&body))?;
                Ok(vd)
            }
            Binder::Forall | Binder::Exists => {
                self.expect_universe(dom)?;
                let d = self.norm(dom)?;
                self.with_var(x, d, |c| c.expect_bool(&body))?;
                Ok(TypeVerdict::IsBool)
            }
            Binder::The => {
                match self.infer(dom)? {
                    TypeVerdict::IsSet => {}
                    v => return Err(err(Reason::NotASet, dom, format!("the domain of The must be a set ({v})"))),
                }
                let d = self.norm(dom)?;
                self.with_var(x, d.clone(), |c| c.expect_bool(&body))?;
                let _ = e;
                self.element_verdict(&d)
            }
        }
    }

    fn infer_macro_app(&mut self, e: &Expr, head: &Expr, args: &[Expr]) -> Result<TypeVerdict, TypeError> {
        match head.kind() {
            ExprKind::Var(n) if self.lookup_var(n).is_none() && self.ctx.lookup_decl(n).is_none() => {
                if let Some(d) = self.ctx.lookup_def(n).cloned() {
                    if d.params.is_empty() {
                        let body = self.norm(e)?;
                        return self.infer(&body);
                    }
                    if d.params.len() != args.len() {
                        return Err(err(
                            Reason::ArityMismatch,
                            e,
                            format!("macro `{n}` expects {} argument(s), found {}", d.params.len(), args.len()),
                        ));
                    }
                    let mut done: Vec<(Name, Expr)> = Vec::new();
                    for ((p, mt), a) in d.params.iter().zip(args) {
                        self.check_macro_arg(a, &mt.substitute_many(&done))?;
                        done.push((p.clone(), a.clone()));
                    }
                    let body = self.norm(e)?;
                    return self.infer(&body);
                }
                if let Some(mt) = self.ctx.lookup_macro_decl(n).cloned() {
                    let mut cur = mt;
                    for a in args {
                        match cur {
                            MacroType::Arrow(x, m1, m2) => {
                                self.check_macro_arg(a, &m1)?;
                                cur = m2.substitute(&x, a);
                            }
                            MacroType::Base(_) => {
                                return Err(err(
                                    Reason::ArityMismatch,
                                    e,
                                    format!("macro `{n}` expects {} argument(s), found {}", 0, args.len()),
                                ))
                            }
                        }
                    }
                    return match cur {
                        MacroType::Base(t) => self.element_verdict(&t),
                        MacroType::Arrow(..) => Err(err(
                            Reason::ArityMismatch,
                            e,
                            format!("macro `{n}` is applied to too few arguments"),
                        )),
                    };
                }
                Err(err(Reason::UnboundVariable, head, format!("`{n}` is not declared")))
            }
            ExprKind::Var(n) => Err(err(Reason::NotAMacro, head, format!("`{n}` is a variable, not a macro"))),
            ExprKind::Bind(Binder::Lambda, _, dom, _) => {
                if let Some(a) = args.first() {
                    let d = self.norm(dom)?;
                    self.check_norm(a, &d)?;
                }
                let body = self.norm(e)?;
                self.infer(&body)
            }
            ExprKind::MacroApp(..) => {
                let body = self.norm(e)?;
                if body.has_macro_app() && alpha_eq(&body, e) {
                    return Err(err(Reason::NotAMacro, head, "bracket application does not reduce"));
                }
                self.infer(&body)
            }
            _ => Err(err(Reason::NotAMacro, head, format!("`{head}` is not a macro"))),
        }
    }

    /// Checks a macro argument against a parameter's macro type. Arguments
    /// of arrow type must be literal macro expressions: a macro name or a
    /// lambda; they are compared by arity.
    fn check_macro_arg(&mut self, a: &Expr, mt: &MacroType) -> Result<(), TypeError> {
        match mt {
            MacroType::Base(t) => self.check_against_type(a, t),
            MacroType::Arrow(..) => {
                let want = mt.arity();
                let have = match a.kind() {
                    ExprKind::Var(n) => {
                        if let Some(d) = self.ctx.lookup_def(n) {
                            if d.params.is_empty() {
                                lambda_arity(&d.body)
                            } else {
                                d.params.len()
                            }
                        } else if let Some(m) = self.ctx.lookup_macro_decl(n) {
                            m.arity()
                        } else {
                            return Err(err(Reason::NotAMacro, a, format!("`{n}` is not a macro")));
                        }
                    }
                    ExprKind::Bind(Binder::Lambda, ..) => lambda_arity(a),
                    _ => return Err(err(Reason::NotAMacro, a, format!("`{a}` is not a macro expression"))),
                };
                if have != want {
                    return Err(err(
                        Reason::ArityMismatch,
                        a,
                        format!("expected a macro of {want} argument(s), found one of {have}"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn check_against_type(&mut self, e: &Expr, ty: &Expr) -> Result<(), TypeError> {
        let t = self.norm(ty)?;
        self.check_norm(e, &t).map_err(|x| x.or_span(e.span()))
    }

    /// Checks `e` against an already normalized type.
    fn check_norm(&mut self, e: &Expr, t: &Expr) -> Result<(), TypeError> {
        // A macro use may unfold to a pair or lambda that only checks
        // against the expected type component by component.
        let unfolds = match e.kind() {
            ExprKind::MacroApp(..) => true,
            ExprKind::Var(n) => self.lookup_var(n).is_none() && self.ctx.lookup_def(n).is_some(),
            _ => false,
        };
        if unfolds {
            let e2 = self.norm(e)?.respan(e.span());
            if e2 != *e {
                return self.check_norm(&e2, t);
            }
        }
        match (t.kind(), e.kind()) {
            (ExprKind::UnivSet, _) => match self.infer(e)? {
                TypeVerdict::IsSet => Ok(()),
                v => Err(err(Reason::TypeMismatch, e, format!("expected a set, found {v}"))),
            },
            (ExprKind::UnivClass, _) => match self.infer(e)? {
                TypeVerdict::IsClass => Ok(()),
                v => Err(err(Reason::TypeMismatch, e, format!("expected a class, found {v}"))),
            },
            (ExprKind::BoolSort, _) => self.expect_bool(e),
            (ExprKind::Bind(Binder::Subset, y, d, phi), _) => {
                if let Ok(v) = self.infer(e) {
                    if let Some(et) = v.element_type() {
                        if self.subsumes(&et, t)? {
                            return Ok(());
                        }
                    }
                }
                let d = self.norm(d)?;
                self.check_norm(e, &d)?;
                let formula = self.norm(&substitute(phi, y, e))?;
                self.membership_obligation(e, formula)
            }
            (ExprKind::Bind(Binder::Sigma, x, a, b), ExprKind::Pair(l, r)) => {
                let a = self.norm(a)?;
                self.check_norm(l, &a)?;
                let b = self.norm(&substitute(b, x, l))?;
                self.check_norm(r, &b)
            }
            (ExprKind::Bind(Binder::Pi, x, a, b), ExprKind::Bind(Binder::Lambda, y, a2, body)) => {
                let a2n = self.norm(a2)?;
                if !alpha_eq(a, &a2n) {
                    return Err(err(
                        Reason::TypeMismatch,
                        e,
                        format!("function domain `{a2n}` does not match expected `{a}`"),
                    ));
                }
                let (y, body) = self.open_binder(y, body);
                let b = self.norm(&substitute(b, x, &Expr::var(y.clone())))?;
                self.with_var(y, a2n, |c| c.check_norm(&body, &b))
            }
            _ => {
                let v = self.infer(e)?;
                let Some(et) = v.element_type() else {
                    return Err(err(Reason::TypeMismatch, e, format!("expected an element of `{t}`, found a class")));
                };
                if self.subsumes(&et, t)? {
                    Ok(())
                } else {
                    Err(err(Reason::TypeMismatch, e, format!("expected an element of `{t}`, found one of `{et}`")))
                }
            }
        }
    }

    fn membership_obligation(&mut self, e: &Expr, formula: Expr) -> Result<(), TypeError> {
        if self.discharged(&formula)? {
            return Ok(());
        }
        if self.strict {
            return Err(err(
                Reason::UnprovenMembership,
                e,
                format!("cannot establish `{formula}` for `{e}`"),
            ));
        }
        self.obligations.push(Obligation { scope: self.scope.clone(), formula, span: e.span() });
        Ok(())
    }

    /// Syntactic discharge: literal truth, conjunctions, and assumptions.
    fn discharged(&self, f: &Expr) -> Result<bool, TypeError> {
        match f.kind() {
            ExprKind::BoolLit(true) => return Ok(true),
            ExprKind::Conn(Connective::And, a, b) => return Ok(self.discharged(a)? && self.discharged(b)?),
            ExprKind::SetEq(a, b) if alpha_eq(a, b) => return Ok(true),
            _ => {}
        }
        for a in self.ctx.assumptions() {
            if alpha_eq(&self.norm(a)?, f) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn lambda_arity(e: &Expr) -> usize {
    match e.kind() {
        ExprKind::Bind(Binder::Lambda, _, _, b) => 1 + lambda_arity(b),
        _ => 0,
    }
}
