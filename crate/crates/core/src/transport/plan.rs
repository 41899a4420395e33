use std::collections::BTreeMap;

use crate::macros;
use crate::sanorm::{set_power, sort_index};
use crate::semantics::{Evaluator, FiniteModel, FunValue, SetValue, Value};
use crate::syntax::{fresh_name, substitute, substitute_many, Expr, ExprKind, Name, VACUOUS};
use crate::typecheck::{classify_shape, Context, SetCase};

use super::{BijectionTuple, TransportError};

/// How an element of `s[A, X]` is carried to `s[A', X']`, read off the shape
/// of `s`. Plans do not depend on the carriers, only on `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plan {
    /// The sort variable does not occur: `y |-> y`.
    Identity,
    /// A point of sort `i`: `y |-> f_i(y)`.
    Sort(usize),
    /// `<first(y.1), second(y.2)>`.
    Sigma(Box<Plan>, Box<Plan>),
    /// `z' |-> body(y(z))` with `z' = domain(z)`.
    Pi(Box<Plan>, Box<Plan>),
}

/// A set expression `s[a]` over a sort tuple `a`.
#[derive(Clone, Debug)]
pub struct SetFamily {
    pub alpha: Name,
    pub body: Expr,
}

/// A set expression `s[a, x]` with `x : u[a]`.
#[derive(Clone, Debug)]
pub struct DepFamily {
    pub alpha: Name,
    pub x: Name,
    pub body: Expr,
}

impl SetFamily {
    pub fn new(alpha: impl Into<Name>, body: Expr) -> Self {
        SetFamily { alpha: alpha.into(), body }
    }
}

impl DepFamily {
    pub fn new(alpha: impl Into<Name>, x: impl Into<Name>, body: Expr) -> Self {
        DepFamily { alpha: alpha.into(), x: x.into(), body }
    }

    /// `s` read as not depending on `x`.
    pub fn constant(s: &SetFamily) -> Self {
        let x = fresh_name("P", &|c: &str| s.body.occurs_free(c) || c == &*s.alpha);
        DepFamily { alpha: s.alpha.clone(), x, body: s.body.clone() }
    }
}

/// The ambient context and model in which families are evaluated.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub ctx: &'a Context,
    pub model: &'a FiniteModel,
}

struct Compiler<'a> {
    ctx: &'a Context,
    sorts: usize,
    alpha: &'a Name,
}

fn metric(u: &Expr, s: &Expr) -> (usize, usize) {
    (u.size() + s.size(), s.size())
}

impl Compiler<'_> {
    fn compile(&self, u: &Expr, x: &Name, s: &Expr) -> Result<Plan, TransportError> {
        if !s.occurs_free(self.alpha) {
            return Ok(Plan::Identity);
        }
        let here = metric(u, s);
        let step = |u2: &Expr, s2: &Expr| {
            assert!(metric(u2, s2) < here, "transport recursion must shrink (size(u) + size(s), size(s))");
        };
        if let ExprKind::Bind(crate::syntax::Binder::Subset, _, dom, _) = s.kind() {
            step(u, dom);
            return self.compile(u, x, dom);
        }
        match classify_shape(s) {
            Some(SetCase::BoolCase) => Ok(Plan::Identity),
            Some(SetCase::PointCase { path, root }) if root == *self.alpha => {
                let inner_first: Vec<_> = path.iter().rev().copied().collect();
                sort_index(&inner_first, self.sorts)
                    .map(Plan::Sort)
                    .ok_or_else(|| TransportError::ClassifyFailure(format!("`{s}` does not select a single sort")))
            }
            Some(SetCase::PointCase { .. }) => Ok(Plan::Identity),
            Some(SetCase::SigmaCase { binder, u: v, w }) => {
                let (first, second) = self.split(u, x, s, &binder, &v, &w, &step)?;
                Ok(Plan::Sigma(Box::new(first), Box::new(second)))
            }
            Some(SetCase::PiCase { binder, u: v, w }) => {
                let (dom, body) = self.split(u, x, s, &binder, &v, &w, &step)?;
                Ok(Plan::Pi(Box::new(dom), Box::new(body)))
            }
            None => Err(TransportError::ClassifyFailure(format!("no set case applies to `{s}`"))),
        }
    }

    /// Plans for `v` under `u`, and for `w~[a, <x, z>] = w[a, x, z]` under
    /// `Sigma(x : u) v`.
    #[allow(clippy::too_many_arguments)]
    fn split(
        &self,
        u: &Expr,
        x: &Name,
        s: &Expr,
        z: &Name,
        v: &Expr,
        w: &Expr,
        step: &dyn Fn(&Expr, &Expr),
    ) -> Result<(Plan, Plan), TransportError> {
        step(u, v);
        let first = self.compile(u, x, v)?;
        let names = self.ctx.names();
        let p = fresh_name("p", &|c: &str| {
            names.contains(c) || c == &**self.alpha || c == &**x || s.occurs_free(c) || u.occurs_free(c)
        });
        let pv = Expr::var(p.clone());
        let mut subst = vec![(x.clone(), Expr::fst(pv.clone()))];
        if &**z != VACUOUS {
            subst.push((z.clone(), Expr::snd(pv)));
        }
        let w2 = substitute_many(w, &subst);
        let u2 = Expr::sigma(x.clone(), u.clone(), v.clone());
        step(&u2, &w2);
        let second = self.compile(&u2, &p, &w2)?;
        Ok((first, second))
    }
}

/// Compiles the transport of `s[a, x]` with `x : u[a]` over `sorts` sorts.
pub fn compile_plan(ctx: &Context, sorts: usize, u: &SetFamily, s: &DepFamily) -> Result<Plan, TransportError> {
    let expand = |e: &Expr| macros::expand(ctx, e).map_err(|m| TransportError::Eval(m.into()));
    let u_body = expand(&u.body)?;
    let s_body = expand(&substitute(&s.body, &s.alpha, &Expr::var(u.alpha.clone())))?;
    Compiler { ctx, sorts, alpha: &u.alpha }.compile(&u_body, &s.x, &s_body)
}

/// Compiles the transport of `s[a]` (the plan behind `Subst(f, s)`).
pub fn compile_subst_plan(ctx: &Context, sorts: usize, s: &SetFamily) -> Result<Plan, TransportError> {
    compile_plan(ctx, sorts, &SetFamily::new(s.alpha.clone(), Expr::bool_sort()), &DepFamily::constant(s))
}

impl Plan {
    pub fn apply(&self, f: &BijectionTuple, y: &Value) -> Result<Value, TransportError> {
        match self {
            Plan::Identity => Ok(y.clone()),
            Plan::Sort(i) => {
                let fi = f.get(*i).ok_or_else(|| TransportError::ShapeMismatch(format!("no bijection for sort {i}")))?;
                fi.apply(y)
                    .cloned()
                    .ok_or_else(|| TransportError::ShapeMismatch(format!("`{y}` is not in the carrier of sort {i}")))
            }
            Plan::Sigma(first, second) => {
                let (a, b) = y
                    .as_pair()
                    .ok_or_else(|| TransportError::ShapeMismatch(format!("expected a pair, found `{y}`")))?;
                Ok(Value::pair(first.apply(f, a)?, second.apply(f, b)?))
            }
            Plan::Pi(dom, body) => {
                let g = y
                    .as_fun()
                    .ok_or_else(|| TransportError::ShapeMismatch(format!("expected a function, found `{y}`")))?;
                let mut table = BTreeMap::new();
                for (z, gz) in g.table() {
                    let z2 = dom.apply(f, z)?;
                    if table.insert(z2.clone(), body.apply(f, gz)?).is_some() {
                        return Err(TransportError::NotABijection(format!(
                            "two arguments of `{y}` are carried to `{z2}`"
                        )));
                    }
                }
                Ok(Value::Fun(FunValue::new(table)))
            }
        }
    }

    /// True if the plan never moves anything.
    pub fn is_identity(&self) -> bool {
        match self {
            Plan::Identity => true,
            Plan::Sort(_) => false,
            Plan::Sigma(a, b) | Plan::Pi(a, b) => a.is_identity() && b.is_identity(),
        }
    }
}

fn check_sorts(a: &Value, f: &BijectionTuple) -> Result<(), TransportError> {
    let n = f.len();
    let carriers = super::split_sorts(a, n)
        .ok_or_else(|| TransportError::ShapeMismatch(format!("`{a}` is not a tuple of {n} sets")))?;
    for (i, (c, fi)) in carriers.iter().zip(f.components()).enumerate() {
        if fi.len() != c.len() || !fi.domain().all(|k| c.contains(k)) || !fi.is_injective() {
            return Err(TransportError::NotABijection(format!("component {i} of `{f}` is not a bijection on `{c}`")));
        }
    }
    Ok(())
}

/// Evaluates `s[A, X]`.
pub fn eval_dep(env: Env, sorts: usize, a: &Value, u: &SetFamily, x: &Value, s: &DepFamily) -> Result<SetValue, TransportError> {
    let mut ev = Evaluator::new(env.ctx, env.model);
    ev.bind(s.alpha.clone(), set_power(sorts), a.clone());
    let u_at = substitute(&u.body, &u.alpha, &Expr::var(s.alpha.clone()));
    ev.bind(s.x.clone(), u_at, x.clone());
    Ok(ev.eval_set(&s.body)?)
}

/// Evaluates `s[A]`.
pub fn eval_family(env: Env, sorts: usize, a: &Value, s: &SetFamily) -> Result<SetValue, TransportError> {
    let mut ev = Evaluator::new(env.ctx, env.model);
    ev.bind(s.alpha.clone(), set_power(sorts), a.clone());
    Ok(ev.eval_set(&s.body)?)
}

/// `Trans(f, u, X, s)` as a full table on `s[A, X]`.
pub fn trans(
    env: Env,
    a: &Value,
    f: &BijectionTuple,
    u: &SetFamily,
    x: &Value,
    s: &DepFamily,
) -> Result<FunValue, TransportError> {
    check_sorts(a, f)?;
    let plan = compile_plan(env.ctx, f.len(), u, s)?;
    let domain = eval_dep(env, f.len(), a, u, x, s)?;
    let table = domain.iter().map(|y| Ok((y.clone(), plan.apply(f, y)?))).collect::<Result<_, TransportError>>()?;
    Ok(FunValue::new(table))
}

/// `Subst(f, s)` as a full table on `s[A]`.
pub fn subst(env: Env, a: &Value, f: &BijectionTuple, s: &SetFamily) -> Result<FunValue, TransportError> {
    let u = SetFamily::new(s.alpha.clone(), Expr::bool_sort());
    trans(env, a, f, &u, &Value::Bool(true), &DepFamily::constant(s))
}

/// `Subst(f, s)(x)` without materializing the table.
pub fn subst_value(ctx: &Context, f: &BijectionTuple, s: &SetFamily, x: &Value) -> Result<Value, TransportError> {
    compile_subst_plan(ctx, f.len(), s)?.apply(f, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn swap() -> BijectionTuple {
        BijectionTuple::new(vec![FunValue::new(
            [(Value::atom("a0"), Value::atom("a1")), (Value::atom("a1"), Value::atom("a0"))].into(),
        )])
    }

    #[test]
    fn plan_shapes() {
        let ctx = Context::new();
        let s = SetFamily::new("a", parse("(a * a) -> Bool").unwrap());
        let plan = compile_subst_plan(&ctx, 1, &s).unwrap();
        assert_eq!(
            plan,
            Plan::Pi(Box::new(Plan::Sigma(Box::new(Plan::Sort(0)), Box::new(Plan::Sort(0)))), Box::new(Plan::Identity))
        );
        let s = SetFamily::new("a", parse("Bool -> Bool").unwrap());
        assert_eq!(compile_subst_plan(&ctx, 1, &s).unwrap(), Plan::Identity);
    }

    #[test]
    fn edge_predicate_is_reversed() {
        let ctx = Context::new();
        let model = FiniteModel::new();
        let env = Env { ctx: &ctx, model: &model };
        let a = Value::atoms("a", 2);
        let s = SetFamily::new("a", parse("(a * a) -> Bool").unwrap());
        let table = subst(env, &a, &swap(), &s).unwrap();
        assert_eq!(table.len(), 16);
        assert!(table.is_injective());
        let edge = |x: &str, y: &str| {
            Value::fun(
                [("a0", "a0"), ("a0", "a1"), ("a1", "a0"), ("a1", "a1")]
                    .map(|(p, q)| (Value::pair(Value::atom(p), Value::atom(q)), Value::Bool(p == x && q == y))),
            )
        };
        assert_eq!(table.apply(&edge("a0", "a1")).unwrap(), &edge("a1", "a0"));
    }

    #[test]
    fn sort_family_gives_the_bijection() {
        let ctx = Context::new();
        let model = FiniteModel::new();
        let env = Env { ctx: &ctx, model: &model };
        let table = subst(env, &Value::atoms("a", 2), &swap(), &SetFamily::new("a", Expr::var("a"))).unwrap();
        assert_eq!(&table, swap().get(0).unwrap());
    }
}
