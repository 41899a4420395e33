#![allow(dead_code)]

pub mod simple;
pub mod terms;

use std::path::PathBuf;

use btt_core::semantics::{parse_model, FiniteModel, Value};
use btt_core::syntax::source::{parse_file, Item};
use btt_core::syntax::{parse, Expr};
use btt_core::typecheck::{Context, Entry};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

/// The declarations of a corpus source, directives skipped.
pub fn context(name: &str) -> Context {
    let text = std::fs::read_to_string(corpus(name)).unwrap();
    let mut ctx = Context::new();
    for item in parse_file(&text).unwrap() {
        let entry = match item {
            Item::Def(d, _) => Entry::Define(d),
            Item::MacroVar(n, t, _) => Entry::MacroDecl(n, t),
            Item::Var(n, t, _) => Entry::Decl(n, t),
            Item::Assume(a, _) => Entry::Assume(a),
            _ => continue,
        };
        ctx.push(entry).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    ctx
}

pub fn model(name: &str) -> FiniteModel {
    parse_model(&std::fs::read_to_string(corpus(name)).unwrap()).unwrap()
}

pub fn expr(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("`{text}`: {e}"))
}

pub fn atoms(prefix: &str, n: usize) -> Vec<Value> {
    (0..n).map(|i| Value::atom(format!("{prefix}{i}"))).collect()
}

/// `(source, class, models)` for every class of the corpus with instances.
pub const CLASSES: &[(&str, &str, &[&str])] = &[
    ("sets.btt", "Set", &["sets.bttm", "big.bttm"]),
    ("group.btt", "GroupSig", &["z2.bttm", "z3.bttm"]),
    ("group.btt", "Group", &["z2.bttm", "z3.bttm"]),
    ("cayley.btt", "Group", &["cayley.bttm"]),
    ("group.btt", "Magma", &["magma.bttm"]),
    ("pointed.btt", "Pointed", &["pointed.bttm"]),
    ("bag.btt", "Bag", &["bag.bttm"]),
    ("actions.btt", "Unary", &["actions.bttm"]),
    ("actions.btt", "Labelled", &["actions.bttm"]),
    ("graph.btt", "Graph", &["graphs.bttm", "edgeless.bttm"]),
    ("signatures.btt", "Derangement", &["signatures.bttm"]),
    ("signatures.btt", "Marked", &["signatures.bttm"]),
    ("signatures.btt", "Chooser", &["signatures.bttm"]),
    ("signatures.btt", "Involution", &["signatures.bttm"]),
];

/// Every `(context, class, model, name, value)` with the value an instance.
pub fn corpus_instances() -> Vec<(Context, Expr, FiniteModel, String, Value)> {
    let mut out = Vec::new();
    for &(src, class, models) in CLASSES {
        let ctx = context(src);
        let sigma = expr(class);
        for m in models {
            let model = model(m);
            for (name, v) in &model.assignment {
                if btt_core::semantics::check_inhabits(v, &ctx, &model, &sigma).unwrap_or(false) {
                    out.push((ctx.clone(), sigma.clone(), model.clone(), name.to_string(), v.clone()));
                }
            }
        }
    }
    out
}
