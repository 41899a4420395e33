use super::{Checker, Context, Reason, TypeError, TypeVerdict};
use crate::syntax::{Binder, Expr, ExprKind, Name, ProjIndex};

/// The four shapes a set expression can take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetCase {
    BoolCase,
    /// Elements are points of the sort `path` applied to `root`. The path is
    /// listed outermost projection first, so `G.2.1` has path `[1, 2]`.
    PointCase { path: Vec<ProjIndex>, root: Name },
    SigmaCase { binder: Name, u: Expr, w: Expr },
    PiCase { binder: Name, u: Expr, w: Expr },
}

/// Classifies an already normalized set expression by its shape. Subsets are
/// classified by their domain. Returns `None` for expressions that cannot
/// denote sets.
pub fn classify_shape(s: &Expr) -> Option<SetCase> {
    match s.kind() {
        ExprKind::BoolSort => Some(SetCase::BoolCase),
        ExprKind::Bind(Binder::Sigma, x, u, w) => {
            Some(SetCase::SigmaCase { binder: x.clone(), u: u.clone(), w: w.clone() })
        }
        ExprKind::Bind(Binder::Pi, x, u, w) => Some(SetCase::PiCase { binder: x.clone(), u: u.clone(), w: w.clone() }),
        ExprKind::Bind(Binder::Subset, _, d, _) => classify_shape(d),
        ExprKind::Var(_) | ExprKind::Proj(..) => {
            let mut path = Vec::new();
            let mut cur = s;
            loop {
                match cur.kind() {
                    ExprKind::Proj(i, inner) => {
                        path.push(*i);
                        cur = inner;
                    }
                    ExprKind::Var(n) => return Some(SetCase::PointCase { path, root: n.clone() }),
                    _ => return None,
                }
            }
        }
        _ => None,
    }
}

pub fn classify_set(ctx: &Context, s: &Expr) -> Result<SetCase, TypeError> {
    let mut c = Checker::new(ctx);
    match c.infer(s)? {
        TypeVerdict::IsSet => {}
        v => return Err(TypeError::new(Reason::NotASet, s.span(), format!("`{s}` is not a set ({v})"))),
    }
    let n = c.norm(s)?;
    classify_shape(&n).ok_or_else(|| {
        TypeError::new(Reason::ClassifyFailure, s.span(), format!("`{n}` matches none of the set cases"))
    })
}

/// Conservative point judgment: the type of `e` is a sort reached by a
/// projection path into a declared variable.
pub fn is_point(ctx: &Context, e: &Expr) -> bool {
    let mut c = Checker::new(ctx);
    match c.infer(e) {
        Ok(TypeVerdict::IsSetElement(t)) => matches!(classify_shape(&t), Some(SetCase::PointCase { .. })),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::typecheck::{check_context, Entry};

    fn ctx(decls: &[(&str, &str)]) -> Context {
        check_context(decls.iter().map(|(n, t)| Entry::Decl((*n).into(), parse(t).unwrap()))).unwrap()
    }

    #[test]
    fn sort_variable_is_point_case() {
        let c = ctx(&[("a", "Set")]);
        assert_eq!(
            classify_set(&c, &parse("a").unwrap()).unwrap(),
            SetCase::PointCase { path: vec![], root: "a".into() }
        );
    }

    #[test]
    fn bool_case() {
        assert_eq!(classify_set(&Context::new(), &Expr::bool_sort()).unwrap(), SetCase::BoolCase);
    }

    #[test]
    fn projection_of_structure() {
        let c = ctx(&[("G", "Sigma(a : Set) a * ((a -> a) * ((a * a) -> a))")]);
        assert_eq!(
            classify_set(&c, &parse("G.1").unwrap()).unwrap(),
            SetCase::PointCase { path: vec![ProjIndex::First], root: "G".into() }
        );
    }

    #[test]
    fn subset_classified_by_domain() {
        let c = ctx(&[("a", "Set")]);
        let s = parse("S(p : a * a) p.1 = p.2").unwrap();
        assert!(matches!(classify_set(&c, &s).unwrap(), SetCase::SigmaCase { .. }));
    }

    #[test]
    fn points() {
        let c = ctx(&[("a", "Set"), ("x", "a")]);
        assert!(is_point(&c, &parse("x").unwrap()));
        assert!(!is_point(&Context::new(), &Expr::tt()));
        let c = ctx(&[("a", "Set"), ("f", "a -> a")]);
        assert!(!is_point(&c, &parse("f").unwrap()));
    }
}
