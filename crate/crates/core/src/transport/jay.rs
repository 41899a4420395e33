use crate::macros::{self, MacroDef};
use crate::sanorm::{apply_unary, sa_normalize, set_power, sort_at, SAClass};
use crate::semantics::{Evaluator, FiniteModel, FunValue, Value};
use crate::syntax::{fresh_name, Expr, Name};
use crate::typecheck::{Context, Entry};

use super::iso::{split_instance, IsoProblem, SplitInstance};
use super::plan::{compile_plan, DepFamily, Plan, SetFamily};
use super::{join_sorts, BijectionTuple, TransportError};

/// The pieces shared by `J'` and its coherence law: the normal form, both
/// instances, and an extended context holding the first instance as
/// `<A0, X0>`.
struct Setup {
    sa: SAClass,
    src: SplitInstance,
    dst: SplitInstance,
    ctx: Context,
    model: FiniteModel,
    a0: Name,
    x0: Name,
    alpha: Name,
    p: Name,
}

impl Setup {
    fn new(
        ctx: &Context,
        sigma: &Expr,
        n: &Value,
        n2: &Value,
        f: &BijectionTuple,
        model: &FiniteModel,
        avoid: &[&Expr],
    ) -> Result<Self, TransportError> {
        let sa = sa_normalize(ctx, sigma)?;
        let s = sa.eval_to_sa(ctx, model, n)?;
        let s2 = sa.eval_to_sa(ctx, model, n2)?;
        let problem = IsoProblem::new(ctx, &sa, &s, &s2)?;
        if !f.is_between(&problem.from.carriers, &problem.to.carriers) || !problem.holds(f) {
            return Err(TransportError::NotAWitness(format!("`{f}` is not an isomorphism from `{n}` to `{n2}`")));
        }
        let (src, dst) = (split_instance(&sa, &s)?, split_instance(&sa, &s2)?);
        let mut names = ctx.names();
        names.extend(model.assignment.keys().cloned());
        for e in avoid {
            names.extend(e.free_vars());
        }
        let mut fresh = |base: &str| {
            let n = fresh_name(base, &|c: &str| names.contains(c));
            names.insert(n.clone());
            n
        };
        let (a0, x0, alpha, p) = (fresh("A0"), fresh("X0"), fresh("a"), fresh("p"));
        let mut ctx2 = ctx.clone();
        ctx2.push_unchecked(Entry::Decl(a0.clone(), set_power(sa.sorts)));
        ctx2.push_unchecked(Entry::Decl(x0.clone(), sa.restricted_signature_at(&Expr::var(a0.clone()))));
        let mut model2 = model.clone();
        model2.bind(a0.clone(), join_sorts(&src.carriers));
        model2.bind(x0.clone(), src.structure.clone());
        Ok(Setup { sa, src, dst, ctx: ctx2, model: model2, a0, x0, alpha, p })
    }

    /// `eta[a] = Sigma(x : S(x : s[a]) phi) FunTuple(A0, a)`. The id-set
    /// predicate is dropped: only the shape of `eta` affects transport.
    fn eta(&self) -> SetFamily {
        let a = Expr::var(self.alpha.clone());
        let a0 = Expr::var(self.a0.clone());
        let n = self.sa.sorts;
        let arrows: Vec<Expr> = (0..n).map(|i| Expr::arrow(sort_at(&a0, i, n), sort_at(&a, i, n))).collect();
        let funs = arrows.into_iter().rev().reduce(|acc, t| Expr::product(t, acc)).expect("at least one sort");
        SetFamily::new(self.alpha.clone(), Expr::product(self.sa.restricted_signature_at(&a), funs))
    }

    /// `gamma[a, p] = tau[fromSA <A0, X0>, fromSA <a, p.1>, p.2]`.
    fn gamma(&self, tau: &MacroDef) -> Result<DepFamily, TransportError> {
        if tau.params.len() != 3 {
            return Err(TransportError::ShapeMismatch(format!(
                "`{}` must take three arguments, it takes {}",
                tau.name,
                tau.params.len()
            )));
        }
        let pv = Expr::var(self.p.clone());
        let first = self.sa.from_sa.instantiate(&[Expr::pair(Expr::var(self.a0.clone()), Expr::var(self.x0.clone()))]);
        let second = self.sa.from_sa.instantiate(&[Expr::pair(Expr::var(self.alpha.clone()), Expr::fst(pv.clone()))]);
        let body = tau.instantiate(&[first, second, Expr::snd(pv)]);
        let body = macros::expand(&self.ctx, &body).map_err(|m| TransportError::Eval(m.into()))?;
        Ok(DepFamily::new(self.alpha.clone(), self.p.clone(), body))
    }

    fn refl(&self) -> BijectionTuple {
        BijectionTuple::identity(&self.src.carriers)
    }
}

/// `J'(sigma, N, N', f, tau)`: the transport along `f` from
/// `tau[N, N, refl]` to `tau[N, N', f]`, as a full table.
pub fn j_prime(
    ctx: &Context,
    sigma: &Expr,
    n: &Value,
    n2: &Value,
    f: &BijectionTuple,
    tau: &MacroDef,
    model: &FiniteModel,
) -> Result<FunValue, TransportError> {
    let st = Setup::new(ctx, sigma, n, n2, f, model, &[&tau.body])?;
    let eta = st.eta();
    let gamma = st.gamma(tau)?;
    let plan = compile_plan(&st.ctx, st.sa.sorts, &eta, &gamma)?;
    let mut ev = Evaluator::new(&st.ctx, &st.model);
    ev.bind(st.alpha.clone(), set_power(st.sa.sorts), join_sorts(&st.src.carriers));
    ev.bind(st.p.clone(), eta.body.clone(), Value::pair(st.src.structure.clone(), st.refl().to_value()));
    let domain = ev.eval_set(&gamma.body)?;
    let table = domain.iter().map(|y| Ok((y.clone(), plan.apply(f, y)?))).collect::<Result<_, TransportError>>()?;
    Ok(FunValue::new(table))
}

/// `Subst(f, eta)(<X, refl>)`, whose second component is `f` itself.
pub fn j_prime_coherence(
    ctx: &Context,
    sigma: &Expr,
    n: &Value,
    n2: &Value,
    f: &BijectionTuple,
    model: &FiniteModel,
) -> Result<(Value, BijectionTuple), TransportError> {
    let st = Setup::new(ctx, sigma, n, n2, f, model, &[])?;
    let eta = st.eta();
    let plan: Plan = compile_plan(&st.ctx, st.sa.sorts, &SetFamily::new(st.alpha.clone(), Expr::bool_sort()), &DepFamily::constant(&eta))?;
    let out = plan.apply(f, &Value::pair(st.src.structure.clone(), st.refl().to_value()))?;
    let (x2, g) = out.as_pair().expect("eta is a pair type");
    let g = BijectionTuple::from_value(g, st.sa.sorts)
        .ok_or_else(|| TransportError::ShapeMismatch(format!("`{g}` is not a tuple of functions")))?;
    if *x2 != st.dst.structure {
        return Err(TransportError::CoherenceFailure(format!("structure carried to `{x2}`, expected `{}`", st.dst.structure)));
    }
    Ok((x2.clone(), g))
}

/// `J(sigma, N, N', f, tau, delta) = J'(sigma, N, N', f, tau)(delta[N])`.
#[allow(clippy::too_many_arguments)]
pub fn j_operator(
    ctx: &Context,
    sigma: &Expr,
    n: &Value,
    n2: &Value,
    f: &BijectionTuple,
    tau: &MacroDef,
    delta: &MacroDef,
    model: &FiniteModel,
) -> Result<Value, TransportError> {
    let table = j_prime(ctx, sigma, n, n2, f, tau, model)?;
    let d = apply_unary(ctx, model, delta, n)?;
    table.apply(&d).cloned().ok_or_else(|| {
        TransportError::ShapeMismatch(format!("`{d}` is not an element of `{}`[N, N, refl]", tau.name))
    })
}
