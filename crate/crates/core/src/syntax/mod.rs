//! Abstract syntax, capture-avoiding substitution and alpha-equivalence.

mod lexer;
mod parser;
mod printer;
pub mod source;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use lexer::{Token, TokenKind};
pub use parser::{parse, parse_expr_at, ParseError, Parser};
pub use printer::print;

pub type Name = Arc<str>;

/// 1-based source positions. Synthesized nodes carry the default (all zero) span.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        Span { start_line, start_col, end_line, end_col }
    }

    pub fn join(self, other: Span) -> Span {
        if self == Span::default() {
            return other;
        }
        if other == Span::default() {
            return self;
        }
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        Span::new(start.0, start.1, end.0, end.1)
    }

    pub fn is_synthetic(&self) -> bool {
        *self == Span::default()
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}:{}", self.start_line, self.start_col, self.end_line, self.end_col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjIndex {
    First,
    Second,
}

impl ProjIndex {
    pub fn from_number(n: u64) -> Option<Self> {
        match n {
            1 => Some(ProjIndex::First),
            2 => Some(ProjIndex::Second),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ProjIndex::First => 1,
            ProjIndex::Second => 2,
        }
    }
}

/// The binding constructs. Each binds one name over its body; the domain is
/// outside the scope of the binder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Binder {
    Sigma,
    Pi,
    Lambda,
    Subset,
    Forall,
    Exists,
    The,
}

impl Binder {
    pub fn keyword(self) -> &'static str {
        match self {
            Binder::Sigma => "Sigma",
            Binder::Pi => "Pi",
            Binder::Lambda => "Lambda",
            Binder::Subset => "S",
            Binder::Forall => "Forall",
            Binder::Exists => "Exists",
            Binder::The => "The",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    Or,
    And,
    Implies,
    Iff,
}

impl Connective {
    pub fn symbol(self) -> &'static str {
        match self {
            Connective::Or => "\\/",
            Connective::And => "/\\",
            Connective::Implies => "=>",
            Connective::Iff => "<=>",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    UnivSet,
    UnivClass,
    BoolSort,
    BoolLit(bool),
    Var(Name),
    Bind(Binder, Name, Expr, Expr),
    Pair(Expr, Expr),
    Proj(ProjIndex, Expr),
    App(Expr, Expr),
    SetEq(Expr, Expr),
    /// `left =[class]= right`
    IsoEq(Expr, Expr, Expr),
    Not(Expr),
    Conn(Connective, Expr, Expr),
    /// Bracket application `head[args]`; the head is a macro name, a macro
    /// lambda, or another macro application.
    MacroApp(Expr, Vec<Expr>),
}

struct Node {
    kind: ExprKind,
    span: Span,
    size: usize,
}

/// An immutable, cheaply clonable expression tree. Equality and hashing are
/// structural and ignore spans; use [`alpha_eq`] for equality up to renaming.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.kind == other.0.kind
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", print(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

fn is_var_path(kind: &ExprKind) -> bool {
    match kind {
        ExprKind::Var(_) => true,
        ExprKind::Proj(_, e) => is_var_path(e.kind()),
        _ => false,
    }
}

fn kind_children(kind: &ExprKind) -> Vec<&Expr> {
    match kind {
        ExprKind::UnivSet
        | ExprKind::UnivClass
        | ExprKind::BoolSort
        | ExprKind::BoolLit(_)
        | ExprKind::Var(_) => vec![],
        ExprKind::Bind(_, _, d, b) => vec![d, b],
        ExprKind::Pair(a, b)
        | ExprKind::App(a, b)
        | ExprKind::SetEq(a, b)
        | ExprKind::Conn(_, a, b) => vec![a, b],
        ExprKind::Proj(_, e) | ExprKind::Not(e) => vec![e],
        ExprKind::IsoEq(c, a, b) => vec![c, a, b],
        ExprKind::MacroApp(h, args) => {
            let mut v = vec![h];
            v.extend(args.iter());
            v
        }
    }
}

fn node_size(kind: &ExprKind) -> usize {
    if is_var_path(kind) {
        return 1;
    }
    1 + kind_children(kind).iter().map(|c| c.size()).sum::<usize>()
}

/// Name used for the binder of non-dependent `*` and `->`.
pub const VACUOUS: &str = "_";

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr::with_span(kind, Span::default())
    }

    pub fn with_span(kind: ExprKind, span: Span) -> Self {
        let size = node_size(&kind);
        Expr(Arc::new(Node { kind, span, size }))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    pub fn span(&self) -> Span {
        self.0.span
    }

    pub fn respan(&self, span: Span) -> Self {
        Expr::with_span(self.0.kind.clone(), span)
    }

    pub fn set() -> Self {
        Expr::new(ExprKind::UnivSet)
    }

    pub fn class() -> Self {
        Expr::new(ExprKind::UnivClass)
    }

    pub fn bool_sort() -> Self {
        Expr::new(ExprKind::BoolSort)
    }

    pub fn bool_lit(b: bool) -> Self {
        Expr::new(ExprKind::BoolLit(b))
    }

    pub fn tt() -> Self {
        Expr::bool_lit(true)
    }

    pub fn var(name: impl Into<Name>) -> Self {
        Expr::new(ExprKind::Var(name.into()))
    }

    pub fn bind(binder: Binder, name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::new(ExprKind::Bind(binder, name.into(), domain, body))
    }

    pub fn sigma(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::Sigma, name, domain, body)
    }

    pub fn pi(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::Pi, name, domain, body)
    }

    pub fn lambda(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::Lambda, name, domain, body)
    }

    pub fn subset(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::Subset, name, domain, body)
    }

    pub fn forall(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::Forall, name, domain, body)
    }

    pub fn exists(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::Exists, name, domain, body)
    }

    pub fn the(name: impl Into<Name>, domain: Expr, body: Expr) -> Self {
        Expr::bind(Binder::The, name, domain, body)
    }

    /// Non-dependent product `a * b`.
    pub fn product(a: Expr, b: Expr) -> Self {
        Expr::sigma(VACUOUS, a, b)
    }

    /// Non-dependent function set `a -> b`.
    pub fn arrow(a: Expr, b: Expr) -> Self {
        Expr::pi(VACUOUS, a, b)
    }

    pub fn pair(a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Pair(a, b))
    }

    pub fn proj(index: ProjIndex, e: Expr) -> Self {
        Expr::new(ExprKind::Proj(index, e))
    }

    pub fn fst(e: Expr) -> Self {
        Expr::proj(ProjIndex::First, e)
    }

    pub fn snd(e: Expr) -> Self {
        Expr::proj(ProjIndex::Second, e)
    }

    pub fn app(f: Expr, a: Expr) -> Self {
        Expr::new(ExprKind::App(f, a))
    }

    pub fn set_eq(a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::SetEq(a, b))
    }

    pub fn iso_eq(class: Expr, a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::IsoEq(class, a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::new(ExprKind::Not(e))
    }

    pub fn conn(c: Connective, a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Conn(c, a, b))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::conn(Connective::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::conn(Connective::Or, a, b)
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        Expr::conn(Connective::Implies, a, b)
    }

    pub fn iff(a: Expr, b: Expr) -> Self {
        Expr::conn(Connective::Iff, a, b)
    }

    pub fn macro_app(head: Expr, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::MacroApp(head, args))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self.kind() {
            ExprKind::Var(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_var(&self, name: &str) -> bool {
        matches!(self.kind(), ExprKind::Var(n) if &**n == name)
    }

    /// Immediate subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        kind_children(self.kind())
    }

    /// Rebuilds a non-binder node from new children (same order as [`Expr::children`]).
    /// Binder names are kept; callers are responsible for scoping.
    fn rebuild(&self, mut kids: Vec<Expr>) -> Expr {
        let kind = match self.kind() {
            ExprKind::Bind(b, n, _, _) => {
                let body = kids.pop().unwrap();
                let dom = kids.pop().unwrap();
                ExprKind::Bind(*b, n.clone(), dom, body)
            }
            ExprKind::Pair(..) => {
                let b = kids.pop().unwrap();
                ExprKind::Pair(kids.pop().unwrap(), b)
            }
            ExprKind::App(..) => {
                let b = kids.pop().unwrap();
                ExprKind::App(kids.pop().unwrap(), b)
            }
            ExprKind::SetEq(..) => {
                let b = kids.pop().unwrap();
                ExprKind::SetEq(kids.pop().unwrap(), b)
            }
            ExprKind::Conn(c, ..) => {
                let b = kids.pop().unwrap();
                ExprKind::Conn(*c, kids.pop().unwrap(), b)
            }
            ExprKind::Proj(i, _) => ExprKind::Proj(*i, kids.pop().unwrap()),
            ExprKind::Not(_) => ExprKind::Not(kids.pop().unwrap()),
            ExprKind::IsoEq(..) => {
                let b = kids.pop().unwrap();
                let a = kids.pop().unwrap();
                ExprKind::IsoEq(kids.pop().unwrap(), a, b)
            }
            ExprKind::MacroApp(..) => {
                let head = kids.remove(0);
                ExprKind::MacroApp(head, kids)
            }
            leaf => leaf.clone(),
        };
        Expr::with_span(kind, self.span())
    }

    /// Node count. Projection chains rooted at a variable (`x.1.2`) count as a
    /// single node, so that replacing a variable by a path does not grow an
    /// expression.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn occurs_free(&self, name: &str) -> bool {
        match self.kind() {
            ExprKind::Var(n) => &**n == name,
            ExprKind::Bind(_, x, d, b) => d.occurs_free(name) || (&**x != name && b.occurs_free(name)),
            _ => self.children().iter().any(|c| c.occurs_free(name)),
        }
    }

    /// True if the tree contains a bracket application anywhere.
    pub fn has_macro_app(&self) -> bool {
        matches!(self.kind(), ExprKind::MacroApp(..)) || self.children().iter().any(|c| c.has_macro_app())
    }
}

fn collect_free(e: &Expr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match e.kind() {
        ExprKind::Var(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        ExprKind::Bind(_, x, d, b) => {
            collect_free(d, bound, out);
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        _ => {
            for c in e.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// Returns `base` primed as often as needed to avoid every name in `avoid`.
pub fn fresh_name(base: &str, avoid: &dyn Fn(&str) -> bool) -> Name {
    let root = if base == VACUOUS { "v" } else { base };
    let mut candidate = root.to_string();
    if candidate != base && !avoid(&candidate) {
        return candidate.into();
    }
    loop {
        candidate.push('\'');
        if !avoid(&candidate) {
            return candidate.into();
        }
    }
}

/// Capture-avoiding substitution of `replacement` for the free occurrences of `var`.
pub fn substitute(e: &Expr, var: &str, replacement: &Expr) -> Expr {
    substitute_many(e, &[(Name::from(var), replacement.clone())])
}

/// Simultaneous capture-avoiding substitution.
pub fn substitute_many(e: &Expr, subst: &[(Name, Expr)]) -> Expr {
    if subst.is_empty() {
        return e.clone();
    }
    let map: HashMap<Name, Expr> = subst.iter().cloned().collect();
    subst_rec(e, &map)
}

fn subst_rec(e: &Expr, map: &HashMap<Name, Expr>) -> Expr {
    match e.kind() {
        ExprKind::Var(n) => match map.get(n) {
            Some(r) => r.clone(),
            None => e.clone(),
        },
        ExprKind::Bind(binder, x, d, body) => {
            let d2 = subst_rec(d, map);
            let mut inner: HashMap<Name, Expr> =
                map.iter().filter(|(k, _)| *k != x).map(|(k, v)| (k.clone(), v.clone())).collect();
            inner.retain(|k, _| body.occurs_free(k));
            if inner.is_empty() {
                return Expr::with_span(ExprKind::Bind(*binder, x.clone(), d2, body.clone()), e.span());
            }
            let mut inner_fv = BTreeSet::new();
            for r in inner.values() {
                inner_fv.extend(r.free_vars());
            }
            if inner_fv.contains(x) {
                let body_fv = body.free_vars();
                let fresh = fresh_name(x, &|c: &str| {
                    inner_fv.contains(c) || body_fv.contains(c) || inner.contains_key(c)
                });
                inner.insert(x.clone(), Expr::var(fresh.clone()));
                let body2 = subst_rec(body, &inner);
                Expr::with_span(ExprKind::Bind(*binder, fresh, d2, body2), e.span())
            } else {
                let body2 = subst_rec(body, &inner);
                Expr::with_span(ExprKind::Bind(*binder, x.clone(), d2, body2), e.span())
            }
        }
        _ => {
            let kids: Vec<Expr> = e.children().into_iter().map(|c| subst_rec(c, map)).collect();
            e.rebuild(kids)
        }
    }
}

/// Renames the bound variable of a binder node to `new_name`, substituting in the body.
pub fn rename_binder(e: &Expr, new_name: Name) -> Expr {
    match e.kind() {
        ExprKind::Bind(b, x, d, body) => {
            let body2 = substitute(body, x, &Expr::var(new_name.clone()));
            Expr::with_span(ExprKind::Bind(*b, new_name, d.clone(), body2), e.span())
        }
        _ => e.clone(),
    }
}

/// Identity up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    alpha_rec(a, b, &mut Vec::new(), &mut Vec::new())
}

fn alpha_rec(a: &Expr, b: &Expr, env_a: &mut Vec<Name>, env_b: &mut Vec<Name>) -> bool {
    if Arc::ptr_eq(&a.0, &b.0) && env_a == env_b {
        return true;
    }
    match (a.kind(), b.kind()) {
        (ExprKind::Var(x), ExprKind::Var(y)) => {
            let ia = env_a.iter().rposition(|n| n == x);
            let ib = env_b.iter().rposition(|n| n == y);
            match (ia, ib) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (ExprKind::Bind(b1, x, d1, body1), ExprKind::Bind(b2, y, d2, body2)) => {
            if b1 != b2 || !alpha_rec(d1, d2, env_a, env_b) {
                return false;
            }
            env_a.push(x.clone());
            env_b.push(y.clone());
            let r = alpha_rec(body1, body2, env_a, env_b);
            env_a.pop();
            env_b.pop();
            r
        }
        (ExprKind::Proj(i, e1), ExprKind::Proj(j, e2)) => i == j && alpha_rec(e1, e2, env_a, env_b),
        (ExprKind::Conn(c1, ..), ExprKind::Conn(c2, ..)) if c1 != c2 => false,
        (ExprKind::BoolLit(x), ExprKind::BoolLit(y)) => x == y,
        (ExprKind::MacroApp(_, xs), ExprKind::MacroApp(_, ys)) if xs.len() != ys.len() => false,
        (ka, kb) if std::mem::discriminant(ka) == std::mem::discriminant(kb) => {
            let (ca, cb) = (a.children(), b.children());
            ca.len() == cb.len() && ca.iter().zip(cb.iter()).all(|(x, y)| alpha_rec(x, y, env_a, env_b))
        }
        _ => false,
    }
}

/// Renames binders so that no binder shadows an enclosing binder of the same
/// name. Vacuous binders are left alone.
pub fn uniquify_binders(e: &Expr) -> Expr {
    uniq_rec(e, &mut Vec::new(), &e.free_vars())
}

fn uniq_rec(e: &Expr, scope: &mut Vec<Name>, free: &BTreeSet<Name>) -> Expr {
    match e.kind() {
        ExprKind::Bind(b, x, d, body) => {
            let d2 = uniq_rec(d, scope, free);
            let (name, body1) = if &**x != VACUOUS && scope.contains(x) {
                let body_fv = body.free_vars();
                let fresh = fresh_name(x, &|c: &str| {
                    scope.iter().any(|s| &**s == c) || free.contains(c) || body_fv.contains(c)
                });
                (fresh.clone(), substitute(body, x, &Expr::var(fresh)))
            } else {
                (x.clone(), body.clone())
            };
            scope.push(name.clone());
            let body2 = uniq_rec(&body1, scope, free);
            scope.pop();
            Expr::with_span(ExprKind::Bind(*b, name, d2, body2), e.span())
        }
        _ => {
            let kids: Vec<Expr> = e.children().into_iter().map(|c| uniq_rec(c, scope, free)).collect();
            e.rebuild(kids)
        }
    }
}

/// Rebuilds `e` by applying `f` to every immediate child, keeping binder names.
pub fn map_children(e: &Expr, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
    let kids: Vec<Expr> = e.children().into_iter().map(&mut f).collect();
    e.rebuild(kids)
}
