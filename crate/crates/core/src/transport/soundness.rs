use crate::macros::{self, MacroDef};
use crate::sanorm::{apply_unary, sa_normalize, set_power, sort_at};
use crate::semantics::{Evaluator, FiniteModel, FunValue, Value};
use crate::syntax::{fresh_name, Expr};
use crate::typecheck::Context;

use super::iso::{split_instance, IsoProblem};
use super::plan::{compile_plan, DepFamily, SetFamily};
use super::{BijectionTuple, TransportError};

/// Given `f` in `id(sigma, N, N')` and a functor `g : sigma -> tau`, builds
/// the isomorphism `g[N] =[tau]= g[N']`. Component `i` is the transport of
/// the `i`-th sort of `g[<a, x>]` along `f`. The result is checked against
/// the transport condition of `tau` before it is returned.
#[allow(clippy::too_many_arguments)]
pub fn substitute_isomorphics(
    ctx: &Context,
    sigma: &Expr,
    tau: &Expr,
    g: &MacroDef,
    n: &Value,
    n2: &Value,
    f: &BijectionTuple,
    model: &FiniteModel,
) -> Result<BijectionTuple, TransportError> {
    let sa = sa_normalize(ctx, sigma)?;
    let ta = sa_normalize(ctx, tau)?;
    let s = sa.eval_to_sa(ctx, model, n)?;
    let src = split_instance(&sa, &s)?;
    if f.len() != sa.sorts {
        return Err(TransportError::ShapeMismatch(format!("expected {} bijections, found {}", sa.sorts, f.len())));
    }

    let mut names = ctx.names();
    names.extend(g.body.free_vars());
    let alpha = fresh_name("a", &|c: &str| names.contains(c));
    names.insert(alpha.clone());
    let x = fresh_name("x", &|c: &str| names.contains(c));
    let packed = Expr::pair(Expr::var(alpha.clone()), Expr::var(x.clone()));
    let image = ta.to_sa.instantiate(&[g.instantiate(&[sa.from_sa.instantiate(&[packed])])]);
    let sorts_of_image = Expr::fst(image);
    let eta = SetFamily::new(alpha.clone(), sa.restricted_signature_at(&Expr::var(alpha.clone())));

    let mut ev = Evaluator::new(ctx, model);
    ev.bind(alpha.clone(), set_power(sa.sorts), crate::transport::join_sorts(&src.carriers));
    ev.bind(x.clone(), eta.body.clone(), src.structure.clone());
    let mut comps = Vec::with_capacity(ta.sorts);
    for i in 0..ta.sorts {
        let sort = macros::expand(ctx, &sort_at(&sorts_of_image, i, ta.sorts)).map_err(|m| TransportError::Eval(m.into()))?;
        let plan = compile_plan(ctx, sa.sorts, &eta, &DepFamily::new(alpha.clone(), x.clone(), sort.clone()))?;
        let carrier = ev.eval_set(&sort)?;
        let table = carrier.iter().map(|y| Ok((y.clone(), plan.apply(f, y)?))).collect::<Result<_, TransportError>>()?;
        comps.push(FunValue::new(table));
    }
    let f_tau = BijectionTuple::new(comps);

    let t = ta.eval_to_sa(ctx, model, &apply_unary(ctx, model, g, n)?)?;
    let t2 = ta.eval_to_sa(ctx, model, &apply_unary(ctx, model, g, n2)?)?;
    let problem = IsoProblem::new(ctx, &ta, &t, &t2)?;
    if !f_tau.is_between(&problem.from.carriers, &problem.to.carriers) || !problem.holds(&f_tau) {
        return Err(TransportError::SoundnessViolation(format!(
            "`{f_tau}` does not carry `{}` to `{}`",
            problem.from.structure, problem.to.structure
        )));
    }
    Ok(f_tau)
}
