use std::collections::BTreeMap;

use crate::semantics::{FunValue, Value};
use crate::syntax::{Binder, Expr, ExprKind, VACUOUS};

use super::TransportError;

/// Classic single-sort transport `f_tau(x)` for a simple type `tau` built
/// from one sort variable, `Bool`, `*` and `->`. Functions are carried by
/// `f_{t -> s}(g)(x) = f_s(g(f_t^-1(x)))`.
pub fn transport_simple(f: &FunValue, tau: &Expr, x: &Value) -> Result<Value, TransportError> {
    let fv = tau.free_vars();
    if fv.len() > 1 {
        return Err(TransportError::NotSimpleType(tau.to_string()));
    }
    let alpha = fv.into_iter().next();
    check_simple(tau, alpha.as_deref())?;
    let inv = f.inverse().ok_or_else(|| TransportError::NotABijection(format!("`{f}` is not injective")))?;
    go(f, &inv, tau, x)
}

fn check_simple(tau: &Expr, alpha: Option<&str>) -> Result<(), TransportError> {
    match tau.kind() {
        ExprKind::BoolSort => Ok(()),
        ExprKind::Var(n) if Some(&**n) == alpha => Ok(()),
        ExprKind::Bind(Binder::Sigma | Binder::Pi, x, a, b) if &**x == VACUOUS => {
            check_simple(a, alpha)?;
            check_simple(b, alpha)
        }
        _ => Err(TransportError::NotSimpleType(tau.to_string())),
    }
}

fn go(f: &FunValue, inv: &FunValue, tau: &Expr, x: &Value) -> Result<Value, TransportError> {
    let mismatch = || TransportError::ShapeMismatch(format!("`{x}` does not inhabit `{tau}`"));
    match tau.kind() {
        ExprKind::BoolSort => Ok(x.clone()),
        ExprKind::Var(_) => f.apply(x).cloned().ok_or_else(mismatch),
        ExprKind::Bind(Binder::Sigma, _, a, b) => {
            let (p, q) = x.as_pair().ok_or_else(mismatch)?;
            Ok(Value::pair(go(f, inv, a, p)?, go(f, inv, b, q)?))
        }
        ExprKind::Bind(Binder::Pi, _, a, b) => {
            let g = x.as_fun().ok_or_else(mismatch)?;
            // The new domain is the image of the old one; each new argument is
            // pulled back along the inverse transport.
            let mut table = BTreeMap::new();
            for k in g.domain() {
                let k2 = go(f, inv, a, k)?;
                let back = go(inv, f, a, &k2)?;
                let gk = g.apply(&back).ok_or_else(mismatch)?;
                table.insert(k2, go(f, inv, b, gk)?);
            }
            Ok(Value::Fun(FunValue::new(table)))
        }
        _ => Err(TransportError::NotSimpleType(tau.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn swap() -> FunValue {
        FunValue::new([(Value::atom("a0"), Value::atom("a1")), (Value::atom("a1"), Value::atom("a0"))].into())
    }

    #[test]
    fn bool_is_fixed() {
        assert_eq!(transport_simple(&swap(), &Expr::bool_sort(), &Value::Bool(true)).unwrap(), Value::Bool(true));
    }

    #[test]
    fn identity_fixes_everything() {
        let id = FunValue::identity(Value::atoms("a", 2).as_set().unwrap().iter());
        let x = Value::pair(Value::atom("a0"), Value::atom("a1"));
        assert_eq!(transport_simple(&id, &parse("a * a").unwrap(), &x).unwrap(), x);
    }

    #[test]
    fn rejects_dependent_types() {
        let tau = parse("Sigma(x : a) a").unwrap();
        assert!(matches!(transport_simple(&swap(), &tau, &Value::Bool(true)), Err(TransportError::NotSimpleType(_))));
    }
}
