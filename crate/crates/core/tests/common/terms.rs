//! Random well-typed terms over a fixed context, and random models of it.

use btt_core::semantics::{FiniteModel, FunValue, Value};
use btt_core::syntax::{parse, Binder, Expr};
use btt_core::typecheck::{Context, Entry};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Types over the sorts `a` and `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum T {
    Bool,
    A,
    B,
    Prod(Box<T>, Box<T>),
    Arrow(Box<T>, Box<T>),
}

impl T {
    pub fn expr(&self) -> Expr {
        match self {
            T::Bool => Expr::bool_sort(),
            T::A => Expr::var("a"),
            T::B => Expr::var("b"),
            T::Prod(x, y) => Expr::product(x.expr(), y.expr()),
            T::Arrow(x, y) => Expr::arrow(x.expr(), y.expr()),
        }
    }

    pub fn prod(x: T, y: T) -> T {
        T::Prod(Box::new(x), Box::new(y))
    }

    pub fn arrow(x: T, y: T) -> T {
        T::Arrow(Box::new(x), Box::new(y))
    }
}

pub const DECLS: &[(&str, &str)] = &[
    ("a", "Set"),
    ("b", "Set"),
    ("x", "a"),
    ("y", "a"),
    ("u", "b"),
    ("f", "a -> a"),
    ("p", "a -> Bool"),
    ("g", "(a * a) -> a"),
    ("h", "a -> b"),
];

fn decl_types() -> Vec<(&'static str, T)> {
    let aa = T::prod(T::A, T::A);
    vec![
        ("x", T::A),
        ("y", T::A),
        ("u", T::B),
        ("f", T::arrow(T::A, T::A)),
        ("p", T::arrow(T::A, T::Bool)),
        ("g", T::arrow(aa, T::A)),
        ("h", T::arrow(T::A, T::B)),
    ]
}

pub fn context() -> Context {
    let mut ctx = Context::new();
    for (n, t) in DECLS {
        ctx.push(Entry::Decl((*n).into(), parse(t).unwrap())).unwrap();
    }
    ctx
}

pub fn random_type(rng: &mut ChaCha8Rng, depth: usize) -> T {
    if depth == 0 || rng.gen_bool(0.5) {
        return [T::A, T::A, T::B, T::Bool].choose(rng).unwrap().clone();
    }
    let (x, y) = (random_type(rng, depth - 1), random_type(rng, depth - 1));
    if rng.gen_bool(0.5) {
        T::prod(x, y)
    } else {
        T::arrow(x, y)
    }
}

pub struct TermGen<'r> {
    pub rng: &'r mut ChaCha8Rng,
    scope: Vec<(String, T)>,
    fresh: usize,
}

impl<'r> TermGen<'r> {
    pub fn new(rng: &'r mut ChaCha8Rng) -> Self {
        TermGen { rng, scope: decl_types().into_iter().map(|(n, t)| (n.to_string(), t)).collect(), fresh: 0 }
    }

    /// Adds a bound variable for the duration of `body`.
    pub fn with_var<R>(&mut self, t: T, body: impl FnOnce(&mut Self, Expr) -> R) -> R {
        self.fresh += 1;
        let name = format!("v{}", self.fresh);
        self.scope.push((name.clone(), t));
        let out = body(self, Expr::var(name));
        self.scope.pop();
        out
    }

    fn vars_of(&self, t: &T) -> Vec<Expr> {
        self.scope.iter().filter(|(_, s)| s == t).map(|(n, _)| Expr::var(n.clone())).collect()
    }

    /// Variables whose type is a function into `t`.
    fn functions_into(&self, t: &T) -> Vec<(Expr, T)> {
        self.scope
            .iter()
            .filter_map(|(n, s)| match s {
                T::Arrow(d, c) if **c == *t => Some((Expr::var(n.clone()), (**d).clone())),
                _ => None,
            })
            .collect()
    }

    pub fn term(&mut self, t: &T, depth: usize) -> Expr {
        let vars = self.vars_of(t);
        if depth == 0 || self.rng.gen_bool(0.25) {
            if let Some(v) = vars.choose(self.rng) {
                return v.clone();
            }
        }
        let depth = depth.saturating_sub(1);
        for _ in 0..8 {
            let choice = self.rng.gen_range(0..6);
            let e = match choice {
                0 => {
                    let fs = self.functions_into(t);
                    fs.choose(self.rng).cloned().map(|(f, d)| Expr::app(f, self.term(&d, depth)))
                }
                1 => {
                    let d = random_type(self.rng, 1);
                    let arg = self.term(&d, depth);
                    let lam = self.with_var(d.clone(), |g, z| Expr::lambda(z.as_var().unwrap().clone(), d.expr(), g.term(t, depth)));
                    Some(Expr::app(lam, arg))
                }
                2 => {
                    let other = random_type(self.rng, 1);
                    let (l, r) = (self.term(t, depth), self.term(&other, depth));
                    if self.rng.gen_bool(0.5) {
                        Some(Expr::fst(Expr::pair(l, r)))
                    } else {
                        Some(Expr::snd(Expr::pair(r, l)))
                    }
                }
                3 if matches!(t, T::A | T::B) => {
                    // The unique element equal to a given one.
                    let w = self.term(t, depth);
                    let te = t.expr();
                    Some(self.with_var(t.clone(), |_, z| {
                        Expr::the(z.as_var().unwrap().clone(), te, Expr::set_eq(z.clone(), w))
                    }))
                }
                _ => None,
            };
            if let Some(e) = e {
                return e;
            }
            if let Some(e) = self.structural(t, depth) {
                return e;
            }
        }
        self.structural(t, 0).or_else(|| vars.first().cloned()).expect("every type has a closed term")
    }

    fn structural(&mut self, t: &T, depth: usize) -> Option<Expr> {
        Some(match t {
            T::Bool => self.formula(depth),
            T::Prod(x, y) => Expr::pair(self.term(x, depth), self.term(y, depth)),
            T::Arrow(d, c) => {
                let (d, c) = ((**d).clone(), (**c).clone());
                let de = d.expr();
                self.with_var(d, |g, z| Expr::lambda(z.as_var().unwrap().clone(), de, g.term(&c, depth)))
            }
            T::A => {
                let x = self.term(&T::A, depth);
                Expr::app(Expr::var("f"), x)
            }
            T::B => {
                let x = self.term(&T::A, depth);
                Expr::app(Expr::var("h"), x)
            }
        })
    }

    pub fn formula(&mut self, depth: usize) -> Expr {
        if depth == 0 {
            return match self.rng.gen_range(0..3) {
                0 => Expr::bool_lit(self.rng.gen()),
                1 => {
                    let x = self.term(&T::A, 0);
                    Expr::app(Expr::var("p"), x)
                }
                _ => {
                    let (l, r) = (self.term(&T::A, 0), self.term(&T::A, 0));
                    Expr::set_eq(l, r)
                }
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => Expr::not(self.formula(d)),
            1 => Expr::and(self.formula(d), self.formula(d)),
            2 => Expr::or(self.formula(d), self.formula(d)),
            3 => Expr::implies(self.formula(d), self.formula(d)),
            4 => {
                let t = random_type(self.rng, 0);
                let te = t.expr();
                let q = if self.rng.gen_bool(0.5) { Binder::Forall } else { Binder::Exists };
                self.with_var(t, |g, z| Expr::bind(q, z.as_var().unwrap().clone(), te, g.formula(d)))
            }
            5 => {
                let t = random_type(self.rng, 1);
                let (l, r) = (self.term(&t, d), self.term(&t, d));
                Expr::set_eq(l, r)
            }
            6 => {
                let x = self.term(&T::A, d);
                Expr::app(Expr::var("p"), x)
            }
            _ => self.formula(0),
        }
    }
}

/// A random model of [`DECLS`] with `|a| <= 3` and `|b| <= 2`.
pub fn random_model(rng: &mut ChaCha8Rng) -> FiniteModel {
    let a: Vec<Value> = (0..rng.gen_range(1..=3)).map(|i| Value::atom(format!("a{i}"))).collect();
    let b: Vec<Value> = (0..rng.gen_range(1..=2)).map(|i| Value::atom(format!("b{i}"))).collect();
    let pick = |rng: &mut ChaCha8Rng, xs: &[Value]| xs.choose(rng).unwrap().clone();
    let table = |rng: &mut ChaCha8Rng, dom: &[Value], cod: &[Value]| {
        Value::Fun(FunValue::new(dom.iter().map(|k| (k.clone(), cod.choose(rng).unwrap().clone())).collect()))
    };
    let pairs: Vec<Value> = a.iter().flat_map(|x| a.iter().map(move |y| Value::pair(x.clone(), y.clone()))).collect();
    let bools = [Value::Bool(false), Value::Bool(true)];
    let mut m = FiniteModel::new();
    m.bind("a", Value::set(a.clone()));
    m.bind("b", Value::set(b.clone()));
    let (x, y, u) = (pick(rng, &a), pick(rng, &a), pick(rng, &b));
    m.bind("x", x).bind("y", y).bind("u", u);
    let (f, p, g, h) = (table(rng, &a, &a), table(rng, &a, &bools), table(rng, &pairs, &a), table(rng, &a, &b));
    m.bind("f", f).bind("p", p).bind("g", g).bind("h", h);
    m
}
