//! Signature-axiom normal forms and signature simplification.

use std::collections::BTreeSet;
use std::fmt;

use crate::macros::{self, MacroDef, MacroType};
use crate::semantics::{EvalError, Evaluator, FiniteModel, Value};
use crate::syntax::{fresh_name, substitute, substitute_many, Binder, Expr, ExprKind, Name, ProjIndex, VACUOUS};
use crate::typecheck::{Checker, Context, Entry, Reason, TypeError, TypeVerdict};

/// A class in the form `Sigma(a : Set^n) S(x : s[a]) phi[a, x]` together
/// with the functors translating to and from the original class.
#[derive(Clone, Debug)]
pub struct SAClass {
    pub sorts: usize,
    pub alpha: Name,
    pub signature: Expr,
    pub x: Name,
    pub axioms: Expr,
    pub to_sa: MacroDef,
    pub from_sa: MacroDef,
}

impl SAClass {
    pub fn signature_at(&self, sorts: &Expr) -> Expr {
        substitute(&self.signature, &self.alpha, sorts)
    }

    pub fn axioms_at(&self, sorts: &Expr, x: &Expr) -> Expr {
        substitute_many(&self.axioms, &[(self.alpha.clone(), sorts.clone()), (self.x.clone(), x.clone())])
    }

    /// `S(x : s[a]) phi[a, x]`, or just `s[a]` when the axioms are `True`.
    pub fn restricted_signature_at(&self, sorts: &Expr) -> Expr {
        let sig = self.signature_at(sorts);
        if is_true(&self.axioms) {
            sig
        } else {
            Expr::subset(self.x.clone(), sig, substitute(&self.axioms, &self.alpha, sorts))
        }
    }

    /// Evaluates the normalizing functor on an instance of the original class.
    pub fn eval_to_sa(&self, ctx: &Context, model: &FiniteModel, n: &Value) -> Result<Value, EvalError> {
        apply_unary(ctx, model, &self.to_sa, n)
    }

    /// Evaluates the inverse functor on an instance of the normal form.
    pub fn eval_from_sa(&self, ctx: &Context, model: &FiniteModel, s: &Value) -> Result<Value, EvalError> {
        apply_unary(ctx, model, &self.from_sa, s)
    }
}

impl fmt::Display for SAClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sorts: {}", self.sorts)?;
        writeln!(f, "signature: {} |-> {}", self.alpha, self.signature)?;
        writeln!(f, "axioms: {}, {} |-> {}", self.alpha, self.x, self.axioms)?;
        writeln!(f, "{}", self.to_sa)?;
        write!(f, "{}", self.from_sa)
    }
}

/// Applies a one-parameter macro to a value.
pub fn apply_unary(ctx: &Context, model: &FiniteModel, def: &MacroDef, v: &Value) -> Result<Value, EvalError> {
    let (p, ty) = match def.params.as_slice() {
        [(p, MacroType::Base(ty))] => (p.clone(), ty.clone()),
        _ => return Err(EvalError::AbstractMacro(def.name.to_string())),
    };
    let names = ctx.names();
    let fv = def.body.free_vars();
    let n = fresh_name(&p, &|c: &str| names.contains(c) || fv.contains(c));
    let mut ev = Evaluator::new(ctx, model);
    ev.bind(n.clone(), ty, v.clone());
    ev.eval(&def.instantiate(&[Expr::var(n)]))
}

/// `Set^n` as right-nested products: `Set`, `Set * Set`, `Set * (Set * Set)`.
pub fn set_power(n: usize) -> Expr {
    assert!(n >= 1, "a sort tuple has at least one sort");
    if n == 1 {
        Expr::set()
    } else {
        Expr::product(Expr::set(), set_power(n - 1))
    }
}

/// The `n` with `e` literally `Set^n`.
pub fn set_power_arity(e: &Expr) -> Option<usize> {
    match e.kind() {
        ExprKind::UnivSet => Some(1),
        ExprKind::Bind(Binder::Sigma, x, a, b) if &**x == VACUOUS && matches!(a.kind(), ExprKind::UnivSet) => {
            set_power_arity(b).map(|n| n + 1)
        }
        _ => None,
    }
}

/// The `i`-th sort (zero-based) of a tuple of `n` sorts.
pub fn sort_at(tuple: &Expr, i: usize, n: usize) -> Expr {
    assert!(i < n);
    if n == 1 {
        tuple.clone()
    } else if i == 0 {
        Expr::fst(tuple.clone())
    } else {
        sort_at(&Expr::snd(tuple.clone()), i - 1, n - 1)
    }
}

/// `a;b`: an `n`-tuple followed by another tuple.
pub fn concat_sorts(a: &Expr, n: usize, b: &Expr) -> Expr {
    if n == 1 {
        Expr::pair(a.clone(), b.clone())
    } else {
        Expr::pair(Expr::fst(a.clone()), concat_sorts(&Expr::snd(a.clone()), n - 1, b))
    }
}

/// The first `n` sorts of a tuple of `total > n` sorts.
pub fn sorts_prefix(t: &Expr, n: usize, total: usize) -> Expr {
    assert!(n >= 1 && n < total);
    if n == 1 {
        Expr::fst(t.clone())
    } else {
        Expr::pair(Expr::fst(t.clone()), sorts_prefix(&Expr::snd(t.clone()), n - 1, total - 1))
    }
}

/// The sorts of a tuple after the first `n`.
pub fn sorts_suffix(t: &Expr, n: usize) -> Expr {
    (0..n).fold(t.clone(), |e, _| Expr::snd(e))
}

fn is_true(e: &Expr) -> bool {
    matches!(e.kind(), ExprKind::BoolLit(true))
}

/// Drops `True` conjuncts.
fn simplify_true(e: &Expr) -> Expr {
    match e.kind() {
        ExprKind::Conn(crate::syntax::Connective::And, a, b) => {
            let a = simplify_true(a);
            let b = simplify_true(b);
            if is_true(&a) {
                b
            } else if is_true(&b) {
                a
            } else {
                Expr::and(a, b)
            }
        }
        _ => e.clone(),
    }
}

/// The canonical class expression of a normal form.
pub fn rebuild_class(sa: &SAClass) -> Expr {
    let body = if is_true(&sa.axioms) {
        sa.signature.clone()
    } else {
        Expr::subset(sa.x.clone(), sa.signature.clone(), sa.axioms.clone())
    };
    Expr::sigma(sa.alpha.clone(), set_power(sa.sorts), body)
}

/// An intermediate normal form whose functors are open terms in a parameter.
struct Raw {
    n: usize,
    alpha: Name,
    sig: Expr,
    x: Name,
    axioms: Expr,
    to_param: Name,
    to_body: Expr,
    from_param: Name,
    from_body: Expr,
}

impl Raw {
    fn to(&self, arg: &Expr) -> Expr {
        substitute(&self.to_body, &self.to_param, arg)
    }

    fn from(&self, arg: &Expr) -> Expr {
        substitute(&self.from_body, &self.from_param, arg)
    }

    /// Instantiates the free variable `y` of a normal form computed under a binder.
    fn open(&self, y: &Name, e: &Expr) -> Raw {
        let s = |t: &Expr| substitute(t, y, e);
        Raw {
            n: self.n,
            alpha: self.alpha.clone(),
            sig: s(&self.sig),
            x: self.x.clone(),
            axioms: s(&self.axioms),
            to_param: self.to_param.clone(),
            to_body: s(&self.to_body),
            from_param: self.from_param.clone(),
            from_body: s(&self.from_body),
        }
    }
}

struct Normalizer {
    taken: BTreeSet<Name>,
}

fn collect_names(e: &Expr, out: &mut BTreeSet<Name>) {
    match e.kind() {
        ExprKind::Var(n) => {
            out.insert(n.clone());
        }
        ExprKind::Bind(_, x, _, _) => {
            out.insert(x.clone());
        }
        _ => {}
    }
    for c in e.children() {
        collect_names(c, out);
    }
}

impl Normalizer {
    fn fresh(&mut self, base: &str) -> Name {
        let n = fresh_name(base, &|c: &str| self.taken.contains(c));
        self.taken.insert(n.clone());
        n
    }

    fn verdict(&self, ctx: &Context, e: &Expr) -> Result<TypeVerdict, TypeError> {
        Checker::new(ctx).infer(e)
    }

    fn reduce(&self, ctx: &Context, e: &Expr) -> Result<Expr, TypeError> {
        macros::expand(ctx, e)
            .map(|r| simplify_true(&r))
            .map_err(|m| TypeError::new(Reason::InternalError, e.span(), m.to_string()))
    }

    fn norm(&mut self, ctx: &Context, sigma: &Expr) -> Result<Raw, TypeError> {
        match sigma.kind() {
            ExprKind::UnivSet => {
                let alpha = self.fresh("a");
                let x = self.fresh("P");
                let p = self.fresh("s");
                let q = self.fresh("p");
                Ok(Raw {
                    n: 1,
                    alpha,
                    sig: Expr::bool_sort(),
                    x: x.clone(),
                    axioms: Expr::var(x),
                    to_param: p.clone(),
                    to_body: Expr::pair(Expr::var(p), Expr::tt()),
                    from_param: q.clone(),
                    from_body: Expr::fst(Expr::var(q)),
                })
            }
            ExprKind::Bind(Binder::Subset, y, tau, phi) => {
                let t = self.norm(ctx, tau)?;
                let inner = t.from(&Expr::pair(Expr::var(t.alpha.clone()), Expr::var(t.x.clone())));
                let axioms = Expr::and(t.axioms.clone(), substitute(phi, y, &inner));
                Ok(Raw { axioms: self.reduce(ctx, &axioms)?, ..t })
            }
            ExprKind::Bind(Binder::Sigma, y, tau, gamma) => {
                let y2 = self.fresh(if &**y == VACUOUS { "y" } else { y });
                let gamma = substitute(gamma, y, &Expr::var(y2.clone()));
                let y = y2;
                let tau_class = matches!(self.verdict(ctx, tau)?, TypeVerdict::IsClass);
                let inner_ctx = ctx.extended(Entry::Decl(y.clone(), tau.clone()));
                let gamma_class = matches!(self.verdict(&inner_ctx, &gamma)?, TypeVerdict::IsClass);
                match (tau_class, gamma_class) {
                    (true, false) if set_power_arity(tau).is_some() => {
                        self.already_normal(set_power_arity(tau).unwrap(), &y, &gamma)
                    }
                    (true, false) => self.class_then_set(ctx, &y, tau, &gamma),
                    (false, true) => self.set_then_class(ctx, &inner_ctx, &y, tau, &gamma),
                    (true, true) => self.class_then_class(ctx, &inner_ctx, &y, tau, &gamma),
                    (false, false) => Err(TypeError::new(
                        Reason::NotAClass,
                        sigma.span(),
                        format!("`{sigma}` is a set, not a class"),
                    )),
                }
            }
            _ => Err(TypeError::new(
                Reason::UnsupportedClass,
                sigma.span(),
                format!("`{sigma}` is not built from Set, Sigma and S"),
            )),
        }
    }

    /// `Sigma(a : Set^n) s` or `Sigma(a : Set^n) S(x : s) phi` with `s` a set.
    fn already_normal(&mut self, n: usize, alpha: &Name, body: &Expr) -> Result<Raw, TypeError> {
        let (x, sig, axioms) = match body.kind() {
            ExprKind::Bind(Binder::Subset, x, s, phi) => {
                let x2 = self.fresh(x);
                (x2.clone(), s.clone(), substitute(phi, x, &Expr::var(x2)))
            }
            _ => (self.fresh("x"), body.clone(), Expr::tt()),
        };
        let p = self.fresh("N");
        let q = self.fresh("S");
        Ok(Raw {
            n,
            alpha: alpha.clone(),
            sig,
            x,
            axioms: simplify_true(&axioms),
            to_param: p.clone(),
            to_body: Expr::var(p),
            from_param: q.clone(),
            from_body: Expr::var(q),
        })
    }

    fn class_then_set(&mut self, ctx: &Context, y: &Name, tau: &Expr, gamma: &Expr) -> Result<Raw, TypeError> {
        let t = self.norm(ctx, tau)?;
        let a = Expr::var(t.alpha.clone());
        let z = self.fresh("z");
        let zv = Expr::var(z.clone());
        let sig = Expr::sigma(
            t.x.clone(),
            t.sig.clone(),
            substitute(gamma, y, &t.from(&Expr::pair(a.clone(), Expr::var(t.x.clone())))),
        );
        let axioms = substitute(&t.axioms, &t.x, &Expr::fst(zv));
        let p = self.fresh("N");
        let pv = Expr::var(p.clone());
        let w = t.to(&Expr::fst(pv.clone()));
        let to_body = Expr::pair(Expr::fst(w.clone()), Expr::pair(Expr::snd(w), Expr::snd(pv)));
        let q = self.fresh("S");
        let qv = Expr::var(q.clone());
        let from_body = Expr::pair(
            t.from(&Expr::pair(Expr::fst(qv.clone()), Expr::fst(Expr::snd(qv.clone())))),
            Expr::snd(Expr::snd(qv)),
        );
        Ok(Raw {
            n: t.n,
            alpha: t.alpha.clone(),
            sig: self.reduce(ctx, &sig)?,
            x: z,
            axioms: self.reduce(ctx, &axioms)?,
            to_param: p,
            to_body: self.reduce(ctx, &to_body)?,
            from_param: q,
            from_body: self.reduce(ctx, &from_body)?,
        })
    }

    fn set_then_class(
        &mut self,
        ctx: &Context,
        inner_ctx: &Context,
        y: &Name,
        tau: &Expr,
        gamma: &Expr,
    ) -> Result<Raw, TypeError> {
        let g = self.norm(inner_ctx, gamma)?;
        let z = self.fresh("z");
        let zv = Expr::var(z.clone());
        let sig = Expr::sigma(y.clone(), tau.clone(), g.sig.clone());
        let axioms = substitute_many(
            &g.axioms,
            &[(y.clone(), Expr::fst(zv.clone())), (g.x.clone(), Expr::snd(zv))],
        );
        let p = self.fresh("N");
        let pv = Expr::var(p.clone());
        let w = g.open(y, &Expr::fst(pv.clone())).to(&Expr::snd(pv.clone()));
        let to_body = Expr::pair(Expr::fst(w.clone()), Expr::pair(Expr::fst(pv), Expr::snd(w)));
        let q = self.fresh("S");
        let qv = Expr::var(q.clone());
        let first = Expr::fst(Expr::snd(qv.clone()));
        let from_body = Expr::pair(
            first.clone(),
            g.open(y, &first).from(&Expr::pair(Expr::fst(qv.clone()), Expr::snd(Expr::snd(qv)))),
        );
        Ok(Raw {
            n: g.n,
            alpha: g.alpha.clone(),
            sig: self.reduce(ctx, &sig)?,
            x: z,
            axioms: self.reduce(ctx, &axioms)?,
            to_param: p,
            to_body: self.reduce(ctx, &to_body)?,
            from_param: q,
            from_body: self.reduce(ctx, &from_body)?,
        })
    }

    fn class_then_class(
        &mut self,
        ctx: &Context,
        inner_ctx: &Context,
        y: &Name,
        tau: &Expr,
        gamma: &Expr,
    ) -> Result<Raw, TypeError> {
        let t = self.norm(ctx, tau)?;
        let g = self.norm(inner_ctx, gamma)?;
        let (n, m) = (t.n, g.n);
        let eta = self.fresh("a");
        let ev = Expr::var(eta.clone());
        let a1 = sorts_prefix(&ev, n, n + m);
        let a2 = sorts_suffix(&ev, n);
        let w = t.x.clone();
        let sig1 = substitute(&t.sig, &t.alpha, &a1);
        let sig2 = substitute_many(
            &g.sig,
            &[
                (y.clone(), t.from(&Expr::pair(a1.clone(), Expr::var(w.clone())))),
                (g.alpha.clone(), a2.clone()),
            ],
        );
        let sig = Expr::sigma(w.clone(), sig1, sig2);
        let z = self.fresh("z");
        let zv = Expr::var(z.clone());
        let phi = substitute_many(&t.axioms, &[(t.alpha.clone(), a1.clone()), (t.x.clone(), Expr::fst(zv.clone()))]);
        let psi = substitute_many(
            &g.axioms,
            &[
                (y.clone(), t.from(&Expr::pair(a1.clone(), Expr::fst(zv.clone())))),
                (g.alpha.clone(), a2.clone()),
                (g.x.clone(), Expr::snd(zv)),
            ],
        );
        let axioms = Expr::and(phi, psi);

        let p = self.fresh("N");
        let pv = Expr::var(p.clone());
        let w1 = t.to(&Expr::fst(pv.clone()));
        let w2 = g.open(y, &Expr::fst(pv.clone())).to(&Expr::snd(pv));
        let to_body = Expr::pair(
            concat_sorts(&Expr::fst(w1.clone()), n, &Expr::fst(w2.clone())),
            Expr::pair(Expr::snd(w1), Expr::snd(w2)),
        );
        let q = self.fresh("S");
        let qv = Expr::var(q.clone());
        let sorts = Expr::fst(qv.clone());
        let first = t.from(&Expr::pair(sorts_prefix(&sorts, n, n + m), Expr::fst(Expr::snd(qv.clone()))));
        let second = g
            .open(y, &first)
            .from(&Expr::pair(sorts_suffix(&sorts, n), Expr::snd(Expr::snd(qv))));
        let from_body = Expr::pair(first, second);
        Ok(Raw {
            n: n + m,
            alpha: eta,
            sig: self.reduce(ctx, &sig)?,
            x: z,
            axioms: self.reduce(ctx, &axioms)?,
            to_param: p,
            to_body: self.reduce(ctx, &to_body)?,
            from_param: q,
            from_body: self.reduce(ctx, &from_body)?,
        })
    }
}

/// Normalizes a class expression to signature-axiom form.
pub fn sa_normalize(ctx: &Context, sigma: &Expr) -> Result<SAClass, TypeError> {
    let mut checker = Checker::new(ctx);
    match checker.infer(sigma)? {
        TypeVerdict::IsClass => {}
        v => return Err(TypeError::new(Reason::NotAClass, sigma.span(), format!("`{sigma}` is not a class ({v})"))),
    }
    let expanded = checker.norm(sigma)?;
    let mut taken = ctx.names();
    collect_names(&expanded, &mut taken);
    let mut nz = Normalizer { taken };
    let raw = nz.norm(ctx, &expanded)?;
    let mut sa = SAClass {
        sorts: raw.n,
        alpha: raw.alpha,
        signature: raw.sig,
        x: raw.x,
        axioms: raw.axioms,
        to_sa: MacroDef::new("toSA", vec![], Expr::tt()),
        from_sa: MacroDef::new("fromSA", vec![], Expr::tt()),
    };
    let normal = rebuild_class(&sa);
    sa.to_sa = MacroDef::new("toSA", vec![(raw.to_param, MacroType::Base(expanded))], raw.to_body);
    sa.from_sa = MacroDef::new("fromSA", vec![(raw.from_param, MacroType::Base(normal))], raw.from_body);
    Ok(sa)
}

/// The two subset-lifting equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rewrite {
    /// `Sigma(x : S(z : s) phi) S(y : u) psi  ~>  S(p : s * u) phi[p.1] /\ psi[p.1, p.2]`
    SigmaSubset,
    /// `Pi(x : s) S(y : u) phi  ~>  S(f : s -> u) Forall(x : s) phi[x, f(x)]`
    PiSubset,
}

fn rewrite_root(e: &Expr) -> Option<(Rewrite, Expr)> {
    let ExprKind::Bind(binder, x, dom, body) = e.kind() else { return None };
    match (binder, dom.kind(), body.kind()) {
        (Binder::Sigma, ExprKind::Bind(Binder::Subset, z, s, phi), ExprKind::Bind(Binder::Subset, y, u, psi))
            if !u.occurs_free(x) =>
        {
            let mut avoid = e.free_vars();
            collect_names(e, &mut avoid);
            let p = fresh_name("p", &|c: &str| avoid.contains(c));
            let pv = Expr::var(p.clone());
            let phi2 = substitute(phi, z, &Expr::fst(pv.clone()));
            let psi2 = substitute_many(psi, &[(x.clone(), Expr::fst(pv.clone())), (y.clone(), Expr::snd(pv))]);
            Some((Rewrite::SigmaSubset, Expr::subset(p, Expr::product(s.clone(), u.clone()), Expr::and(phi2, psi2))))
        }
        (Binder::Pi, _, ExprKind::Bind(Binder::Subset, y, u, phi)) if !u.occurs_free(x) => {
            let mut avoid = e.free_vars();
            collect_names(e, &mut avoid);
            let f = fresh_name("f", &|c: &str| avoid.contains(c));
            let (x, phi) = if &**x == VACUOUS {
                let x2 = fresh_name("x", &|c: &str| avoid.contains(c) || c == &*f);
                (x2, phi.clone())
            } else {
                (x.clone(), phi.clone())
            };
            let fx = Expr::app(Expr::var(f.clone()), Expr::var(x.clone()));
            let body = Expr::forall(x, dom.clone(), substitute(&phi, y, &fx));
            Some((Rewrite::PiSubset, Expr::subset(f, Expr::arrow(dom.clone(), u.clone()), body)))
        }
        _ => None,
    }
}

/// One outermost, leftmost rewrite step.
pub fn rewrite_once(e: &Expr) -> Option<(Rewrite, Expr)> {
    if let Some(r) = rewrite_root(e) {
        return Some(r);
    }
    let mut rule = None;
    let out = crate::syntax::map_children(e, |c| {
        if rule.is_some() {
            return c.clone();
        }
        match rewrite_once(c) {
            Some((r, c2)) => {
                rule = Some(r);
                c2
            }
            None => c.clone(),
        }
    });
    rule.map(|r| (r, out))
}

/// Every step of the simplification of `s`, after macro expansion. The
/// first element is the expanded input.
pub fn simplify_trace(ctx: &Context, s: &Expr) -> (Expr, Vec<(Rewrite, Expr)>) {
    let start = macros::expand(ctx, s).unwrap_or_else(|_| s.clone());
    let mut steps = Vec::new();
    let mut cur = start.clone();
    while let Some((r, next)) = rewrite_once(&cur) {
        steps.push((r, next.clone()));
        cur = next;
    }
    (start, steps)
}

/// Applies the two subset-lifting rewrites to a fixpoint, outermost first and
/// left to right. Returns the rewritten expression and the number of steps.
pub fn simplify_signature_counting(ctx: &Context, s: &Expr) -> (Expr, usize) {
    let (start, steps) = simplify_trace(ctx, s);
    let n = steps.len();
    (steps.into_iter().last().map(|(_, e)| e).unwrap_or(start), n)
}

pub fn simplify_signature(ctx: &Context, s: &Expr) -> Expr {
    simplify_signature_counting(ctx, s).0
}

/// Index of the sort selected by a projection path into a sort tuple of
/// `n` sorts. `path` lists projections innermost first.
pub fn sort_index(path: &[ProjIndex], n: usize) -> Option<usize> {
    match path.split_first() {
        None if n == 1 => Some(0),
        None => None,
        Some((ProjIndex::First, rest)) if n > 1 && rest.is_empty() => Some(0),
        Some((ProjIndex::Second, rest)) if n > 1 => sort_index(rest, n - 1).map(|i| i + 1),
        _ => None,
    }
}
