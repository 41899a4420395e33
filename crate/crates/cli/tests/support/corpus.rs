//! Loading the example corpus and naming its classes and instances.

use std::path::PathBuf;
use std::process::{Command, Output};

use btt_cli::session::{load, load_model};
use btt_core::semantics::{check_inhabits, FiniteModel, Value};
use btt_core::syntax::{parse, Expr};
use btt_core::typecheck::Context;

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn path(name: &str) -> PathBuf {
    dir().join(name)
}

/// The context built by a source file, directives skipped.
pub fn context(source: &str) -> Context {
    load(&path(source), None, false).unwrap_or_else(|e| panic!("{source}: {e}")).ctx
}

pub fn model(name: &str) -> FiniteModel {
    load_model(&path(name), None).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn expr(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("`{text}`: {e}"))
}

/// A class of the corpus together with the model files holding its instances.
pub struct ClassCase {
    pub source: &'static str,
    pub class: &'static str,
    pub models: &'static [&'static str],
}

pub const CLASSES: &[ClassCase] = &[
    ClassCase { source: "sets.btt", class: "Set", models: &["sets.bttm", "big.bttm"] },
    ClassCase { source: "group.btt", class: "GroupSig", models: &["z2.bttm", "z3.bttm"] },
    ClassCase { source: "group.btt", class: "Group", models: &["z2.bttm", "z3.bttm"] },
    ClassCase { source: "cayley.btt", class: "Group", models: &["cayley.bttm"] },
    ClassCase { source: "magma.btt", class: "Magma", models: &["magma.bttm"] },
    ClassCase { source: "pointed.btt", class: "Pointed", models: &["pointed.bttm"] },
    ClassCase { source: "bag.btt", class: "Bag", models: &["bag.bttm"] },
    ClassCase { source: "actions.btt", class: "Unary", models: &["actions.bttm"] },
    ClassCase { source: "actions.btt", class: "Labelled", models: &["actions.bttm"] },
    ClassCase { source: "graph.btt", class: "Graph", models: &["graphs.bttm", "edgeless.bttm"] },
    ClassCase { source: "signatures.btt", class: "Derangement", models: &["signatures.bttm"] },
    ClassCase { source: "signatures.btt", class: "Marked", models: &["signatures.bttm"] },
    ClassCase { source: "signatures.btt", class: "Chooser", models: &["signatures.bttm"] },
    ClassCase { source: "signatures.btt", class: "Involution", models: &["signatures.bttm"] },
];

/// One model binding that inhabits a class.
pub struct Instance {
    pub model_file: &'static str,
    pub name: String,
    pub value: Value,
}

/// Every binding of the case's models that is an instance of its class.
pub fn instances(ctx: &Context, case: &ClassCase) -> Vec<(FiniteModel, Instance)> {
    let sigma = expr(case.class);
    let mut out = Vec::new();
    for &file in case.models {
        let m = model(file);
        for (name, v) in &m.assignment {
            if check_inhabits(v, ctx, &m, &sigma).unwrap_or(false) {
                out.push((m.clone(), Instance { model_file: file, name: name.to_string(), value: v.clone() }));
            }
        }
    }
    out
}

pub fn btt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btt"))
        .args(args)
        .current_dir(dir().join(".."))
        .output()
        .expect("run btt")
}
