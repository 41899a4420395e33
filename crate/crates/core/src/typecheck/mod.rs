//! Contexts and the well-formedness judgment, as syntax-directed rules.

mod checker;
mod classify;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::macros::{MacroDef, MacroType};
use crate::syntax::{Expr, Name, Span};

pub use checker::{Checker, Obligation};
pub use classify::{classify_set, classify_shape, is_point, SetCase};

#[derive(Clone, Debug)]
pub enum Entry {
    Decl(Name, Expr),
    Assume(Expr),
    /// An abstract macro variable.
    MacroDecl(Name, MacroType),
    /// A file-scoped macro definition (`def`).
    Define(MacroDef),
}

impl Entry {
    pub fn name(&self) -> Option<&Name> {
        match self {
            Entry::Decl(n, _) | Entry::MacroDecl(n, _) => Some(n),
            Entry::Define(d) => Some(&d.name),
            Entry::Assume(_) => None,
        }
    }
}

/// A validated, ordered context.
#[derive(Clone, Debug, Default)]
pub struct Context {
    entries: Vec<Entry>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.entries.iter().any(|e| e.name().is_some_and(|n| &**n == name))
    }

    pub fn lookup_decl(&self, name: &str) -> Option<&Expr> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Decl(n, t) if &**n == name => Some(t),
            _ => None,
        })
    }

    pub fn lookup_def(&self, name: &str) -> Option<&MacroDef> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Define(d) if &*d.name == name => Some(d),
            _ => None,
        })
    }

    pub fn lookup_macro_decl(&self, name: &str) -> Option<&MacroType> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::MacroDecl(n, t) if &**n == name => Some(t),
            _ => None,
        })
    }

    pub fn decls(&self) -> impl Iterator<Item = (&Name, &Expr)> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Decl(n, t) => Some((n, t)),
            _ => None,
        })
    }

    pub fn assumptions(&self) -> impl Iterator<Item = &Expr> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Assume(a) => Some(a),
            _ => None,
        })
    }

    /// Every name bound by the context.
    pub fn names(&self) -> BTreeSet<Name> {
        self.entries.iter().filter_map(|e| e.name().cloned()).collect()
    }

    /// Appends an entry after checking it against the current context.
    pub fn push(&mut self, entry: Entry) -> Result<(), TypeError> {
        if let Some(n) = entry.name() {
            if self.is_declared(n) {
                return Err(TypeError::new(
                    Reason::DuplicateDeclaration,
                    Span::default(),
                    format!("`{n}` is already declared"),
                ));
            }
        }
        match &entry {
            Entry::Decl(_, t) => {
                let v = Checker::new(self).infer(t)?;
                if !matches!(v, TypeVerdict::IsSet | TypeVerdict::IsClass) {
                    return Err(TypeError::new(
                        Reason::NotAType,
                        t.span(),
                        format!("`{t}` is neither a set nor a class"),
                    ));
                }
            }
            Entry::Assume(a) => {
                Checker::new(self).expect_bool(a)?;
            }
            Entry::MacroDecl(_, mt) => {
                crate::macros::check_macro_type(self, mt)?;
            }
            Entry::Define(d) => {
                crate::macros::check_macro(self, d)?;
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Appends without checking. Used for scratch extensions built from
    /// already-checked material.
    pub fn push_unchecked(&mut self, entry: Entry) {
        self.entries.push(entry);
    }

    pub fn extended(&self, entry: Entry) -> Context {
        let mut c = self.clone();
        c.push_unchecked(entry);
        c
    }
}

pub fn check_context(entries: impl IntoIterator<Item = Entry>) -> Result<Context, TypeError> {
    let mut ctx = Context::new();
    for e in entries {
        ctx.push(e)?;
    }
    Ok(ctx)
}

/// The outcome of checking an expression.
#[derive(Clone, Debug)]
pub enum TypeVerdict {
    IsBool,
    IsSetElement(Expr),
    IsSet,
    IsClass,
    IsClassElement(Expr),
}

impl TypeVerdict {
    /// The type an element with this verdict belongs to, for verdicts of elements.
    pub fn element_type(&self) -> Option<Expr> {
        match self {
            TypeVerdict::IsBool => Some(Expr::bool_sort()),
            TypeVerdict::IsSet => Some(Expr::set()),
            TypeVerdict::IsSetElement(t) | TypeVerdict::IsClassElement(t) => Some(t.clone()),
            TypeVerdict::IsClass => None,
        }
    }

    pub fn same_as(&self, other: &TypeVerdict) -> bool {
        use crate::syntax::alpha_eq;
        match (self, other) {
            (TypeVerdict::IsBool, TypeVerdict::IsBool)
            | (TypeVerdict::IsSet, TypeVerdict::IsSet)
            | (TypeVerdict::IsClass, TypeVerdict::IsClass) => true,
            (TypeVerdict::IsSetElement(a), TypeVerdict::IsSetElement(b))
            | (TypeVerdict::IsClassElement(a), TypeVerdict::IsClassElement(b)) => alpha_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for TypeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeVerdict::IsBool => f.write_str("Bool"),
            TypeVerdict::IsSet => f.write_str("Set"),
            TypeVerdict::IsClass => f.write_str("Class"),
            TypeVerdict::IsSetElement(t) => write!(f, "element of set {t}"),
            TypeVerdict::IsClassElement(t) => write!(f, "element of class {t}"),
        }
    }
}

/// Machine-readable reason codes. The variant names are the codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reason {
    UnboundVariable,
    DuplicateDeclaration,
    ArityMismatch,
    EqualityAcrossSorts,
    SetEqOnClassElements,
    PiOverClass,
    NotBool,
    NotASet,
    NotAClass,
    NotAType,
    NotAnElement,
    NotAPair,
    NotAFunction,
    NotAMacro,
    TypeMismatch,
    UnprovenMembership,
    UniverseHasNoType,
    UnsupportedClass,
    ClassifyFailure,
    InternalError,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::UnboundVariable => "UnboundVariable",
            Reason::DuplicateDeclaration => "DuplicateDeclaration",
            Reason::ArityMismatch => "ArityMismatch",
            Reason::EqualityAcrossSorts => "EqualityAcrossSorts",
            Reason::SetEqOnClassElements => "SetEqOnClassElements",
            Reason::PiOverClass => "PiOverClass",
            Reason::NotBool => "NotBool",
            Reason::NotASet => "NotASet",
            Reason::NotAClass => "NotAClass",
            Reason::NotAType => "NotAType",
            Reason::NotAnElement => "NotAnElement",
            Reason::NotAPair => "NotAPair",
            Reason::NotAFunction => "NotAFunction",
            Reason::NotAMacro => "NotAMacro",
            Reason::TypeMismatch => "TypeMismatch",
            Reason::UnprovenMembership => "UnprovenMembership",
            Reason::UniverseHasNoType => "UniverseHasNoType",
            Reason::UnsupportedClass => "UnsupportedClass",
            Reason::ClassifyFailure => "ClassifyFailure",
            Reason::InternalError => "InternalError",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, Error)]
#[error("{span}: {reason}: {message}")]
pub struct TypeError {
    pub reason: Reason,
    pub span: Span,
    pub message: String,
}

impl TypeError {
    pub fn new(reason: Reason, span: Span, message: impl Into<String>) -> Self {
        TypeError { reason, span, message: message.into() }
    }

    /// Fills in a span when the error was raised on a synthesized node.
    pub fn or_span(mut self, span: Span) -> Self {
        if self.span.is_synthetic() {
            self.span = span;
        }
        self
    }
}

/// Checks `e` under `ctx`. Subset memberships that are not evident from the
/// types are rejected with `UnprovenMembership`.
pub fn check_type(ctx: &Context, e: &Expr) -> Result<TypeVerdict, TypeError> {
    Checker::new(ctx).infer(e)
}

/// Checks `e` against the expected type `ty` (which may be `Bool`, `Set`, `Class`,
/// a set, or a class).
pub fn check_against(ctx: &Context, e: &Expr, ty: &Expr) -> Result<(), TypeError> {
    Checker::new(ctx).check_against_type(e, ty)
}

/// Like [`check_type`], but collects undischarged subset memberships instead
/// of failing on them.
pub fn check_type_lenient(ctx: &Context, e: &Expr) -> Result<(TypeVerdict, Vec<Obligation>), TypeError> {
    let mut c = Checker::lenient(ctx);
    let v = c.infer(e)?;
    Ok((v, c.into_obligations()))
}

pub fn check_against_lenient(ctx: &Context, e: &Expr, ty: &Expr) -> Result<Vec<Obligation>, TypeError> {
    let mut c = Checker::lenient(ctx);
    c.check_against_type(e, ty)?;
    Ok(c.into_obligations())
}
