mod common;

use btt_core::macros::expand;
use btt_core::sanorm::apply_unary;
use btt_core::semantics::{FiniteModel, FunValue, Value};
use btt_core::syntax::{alpha_eq, Expr};
use btt_core::transport::transport_simple;
use btt_core::typecheck::{check_type, Context, Entry};
use common::simple::{atoms, random_value, Inhabitants, Ty};
use common::{context, expr};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bracket applications from the corpus, each with the declarations it needs.
type Application = (&'static str, &'static [(&'static str, &'static str)], &'static str);

const APPLICATIONS: &[Application] = &[
    ("group.btt", &[("G", "Group")], "Abelian[G]"),
    ("group.btt", &[("G", "Group")], "forget[G]"),
    ("group.btt", &[("G", "Group")], "forget[same[G]]"),
    ("group.btt", &[("G", "Group")], "inv[G]"),
    ("group.btt", &[("G", "Group"), ("H", "Group"), ("g", "G.1 -> H.1")], "UnitImage[G, H, g]"),
    ("group.btt", &[("G", "Group"), ("H", "Group"), ("g", "G.1 -> H.1")], "Inverses[G, H, g]"),
    ("graph.btt", &[("G", "Graph")], "reverse[reverse[G]]"),
    ("graph.btt", &[("G", "Graph")], "Symmetric[reverse[G]]"),
    ("graph.btt", &[("G", "Graph")], "sources[G]"),
    ("magma.btt", &[("M", "Magma")], "twice[twice[M]]"),
    ("magma.btt", &[("M", "Magma")], "HasIdempotent[twice[M]]"),
    ("bag.btt", &[("B", "Bag")], "image[B]"),
    ("actions.btt", &[("L", "Labelled")], "labelling[L]"),
    ("pointed.btt", &[("P", "Pointed")], "base[P]"),
];

fn scoped(source: &str, decls: &[(&str, &str)]) -> Context {
    let mut ctx = context(source);
    for (n, t) in decls {
        ctx.push(Entry::Decl((*n).into(), expr(t))).unwrap();
    }
    ctx
}

#[test]
fn expansion_is_idempotent() {
    for (source, decls, text) in APPLICATIONS {
        let ctx = scoped(source, decls);
        let once = expand(&ctx, &expr(text)).unwrap();
        let twice = expand(&ctx, &once).unwrap();
        assert!(alpha_eq(&once, &twice), "{text}: `{once}` then `{twice}`");
        assert!(!once.has_macro_app(), "{text} still has applications: `{once}`");
    }
}

#[test]
fn expansion_preserves_types() {
    for (source, decls, text) in APPLICATIONS {
        let ctx = scoped(source, decls);
        let e = expr(text);
        let before = check_type(&ctx, &e).unwrap_or_else(|err| panic!("{text}: {err}"));
        let after = check_type(&ctx, &expand(&ctx, &e).unwrap()).unwrap_or_else(|err| panic!("{text}: {err}"));
        match (before.element_type(), after.element_type()) {
            (Some(t), Some(t2)) => {
                let t = expand(&ctx, &t).unwrap();
                let t2 = expand(&ctx, &t2).unwrap();
                assert!(alpha_eq(&t, &t2), "{text}: `{t}` became `{t2}`");
            }
            _ => assert!(before.same_as(&after), "{text}: {before} became {after}"),
        }
    }
}

/// Predicates of the corpus over classes `Sigma(a : Set) structure`.
fn predicates() -> Vec<(&'static str, &'static str, Ty)> {
    let a = Ty::Sort(0);
    let aa = Ty::prod(&a, &a);
    vec![
        ("magma.btt", "Commutative", Ty::arrow(&aa, &a)),
        ("magma.btt", "HasIdempotent", Ty::arrow(&aa, &a)),
        ("graph.btt", "Symmetric", Ty::arrow(&aa, &Ty::Bool)),
        ("graph.btt", "HasLoop", Ty::arrow(&aa, &Ty::Bool)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn predicates_agree_on_isomorphic_instances(seed in any::<u64>(), size in 1usize..=3, which in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (source, name, structure) = predicates()[which].clone();
        let ctx = context(source);
        let def = ctx.lookup_def(name).unwrap().clone();
        let (from, to) = (atoms("a", size), atoms("b", size));
        let mut inh = Inhabitants::new(vec![from.clone()]);
        let x = random_value(&mut rng, &structure, &mut inh);
        let mut img = to.clone();
        img.shuffle(&mut rng);
        let f = FunValue::new(from.iter().cloned().zip(img).collect());
        let x2 = transport_simple(&f, &structure.to_expr(&[Expr::var("a")]), &x).unwrap();
        let n = Value::pair(Value::set(from), x);
        let n2 = Value::pair(Value::set(to), x2);
        let model = FiniteModel::new();
        let p = apply_unary(&ctx, &model, &def, &n).unwrap();
        let p2 = apply_unary(&ctx, &model, &def, &n2).unwrap();
        prop_assert_eq!(p, p2, "{} differs on {} and {}", name, n, n2);
    }
}

#[test]
fn abelian_agrees_on_corpus_group_pairs() {
    let ctx = context("group.btt");
    let def = ctx.lookup_def("Abelian").unwrap().clone();
    for m in ["z2.bttm", "z3.bttm"] {
        let model = common::model(m);
        let (n, n2) = (model.get("N").unwrap(), model.get("N'").unwrap());
        assert!(btt_core::transport::decide_iso(&ctx, &expr("Group"), n, n2, &model).unwrap());
        let p = apply_unary(&ctx, &model, &def, n).unwrap();
        assert_eq!(p, apply_unary(&ctx, &model, &def, n2).unwrap());
        assert_eq!(p, Value::Bool(true));
    }
}
