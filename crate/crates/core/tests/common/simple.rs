//! Simple types over numbered sorts, their inhabitants, and a direct
//! transport used as a reference.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use btt_core::semantics::{FunValue, Value};
use btt_core::syntax::Expr;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Bool,
    Sort(usize),
    Prod(Rc<Ty>, Rc<Ty>),
    Arrow(Rc<Ty>, Rc<Ty>),
}

impl Ty {
    pub fn prod(a: &Ty, b: &Ty) -> Ty {
        Ty::Prod(Rc::new(a.clone()), Rc::new(b.clone()))
    }

    pub fn arrow(a: &Ty, b: &Ty) -> Ty {
        Ty::Arrow(Rc::new(a.clone()), Rc::new(b.clone()))
    }

    /// The type as an expression, sort `i` being `sorts[i]`.
    pub fn to_expr(&self, sorts: &[Expr]) -> Expr {
        match self {
            Ty::Bool => Expr::bool_sort(),
            Ty::Sort(i) => sorts[*i].clone(),
            Ty::Prod(a, b) => Expr::product(a.to_expr(sorts), b.to_expr(sorts)),
            Ty::Arrow(a, b) => Expr::arrow(a.to_expr(sorts), b.to_expr(sorts)),
        }
    }

    /// Number of inhabitants, saturating.
    pub fn card(&self, sizes: &[usize]) -> u128 {
        match self {
            Ty::Bool => 2,
            Ty::Sort(i) => sizes[*i] as u128,
            Ty::Prod(a, b) => a.card(sizes).saturating_mul(b.card(sizes)),
            Ty::Arrow(a, b) => {
                let (d, c) = (a.card(sizes), b.card(sizes));
                if d > 128 {
                    return if c <= 1 { c } else { u128::MAX };
                }
                c.checked_pow(d as u32).unwrap_or(u128::MAX)
            }
        }
    }
}

/// Every simple type over one sort with at most `depth` nested constructors.
pub fn simple_types(depth: usize) -> Vec<Ty> {
    let mut level = vec![Ty::Sort(0), Ty::Bool];
    for _ in 0..depth {
        let mut next = vec![Ty::Sort(0), Ty::Bool];
        for a in &level {
            for b in &level {
                next.push(Ty::prod(a, b));
                next.push(Ty::arrow(a, b));
            }
        }
        level = next;
    }
    level
}

/// Enumerates inhabitants over fixed carriers, sharing work between types.
pub struct Inhabitants {
    carriers: Vec<Vec<Value>>,
    memo: HashMap<Ty, Rc<Vec<Value>>>,
}

impl Inhabitants {
    pub fn new(carriers: Vec<Vec<Value>>) -> Self {
        Inhabitants { carriers, memo: HashMap::new() }
    }

    pub fn of(&mut self, t: &Ty) -> Rc<Vec<Value>> {
        if let Some(v) = self.memo.get(t) {
            return v.clone();
        }
        let out: Vec<Value> = match t {
            Ty::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Ty::Sort(i) => self.carriers[*i].clone(),
            Ty::Prod(a, b) => {
                let (xs, ys) = (self.of(a), self.of(b));
                xs.iter().flat_map(|x| ys.iter().map(move |y| Value::pair(x.clone(), y.clone()))).collect()
            }
            Ty::Arrow(a, b) => {
                let (dom, cod) = (self.of(a), self.of(b));
                all_functions(&dom, &cod)
            }
        };
        let out = Rc::new(out);
        self.memo.insert(t.clone(), out.clone());
        out
    }
}

/// All tables `dom -> cod`, by counting in base `|cod|`.
pub fn all_functions(dom: &[Value], cod: &[Value]) -> Vec<Value> {
    if cod.is_empty() {
        return if dom.is_empty() { vec![Value::Fun(FunValue::new(BTreeMap::new()))] } else { vec![] };
    }
    let mut digits = vec![0usize; dom.len()];
    let mut out = Vec::new();
    loop {
        let table = dom.iter().zip(&digits).map(|(k, &d)| (k.clone(), cod[d].clone())).collect();
        out.push(Value::Fun(FunValue::new(table)));
        let mut i = 0;
        loop {
            if i == digits.len() {
                return out;
            }
            digits[i] += 1;
            if digits[i] < cod.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every bijection `from -> to` as a table.
pub fn bijections(from: &[Value], to: &[Value]) -> Vec<FunValue> {
    if from.len() != to.len() {
        return vec![];
    }
    permutations(from.len())
        .into_iter()
        .map(|p| FunValue::new(from.iter().cloned().zip(p.into_iter().map(|j| to[j].clone())).collect()))
        .collect()
}

/// Structural transport of `x : t` along one bijection per sort.
pub fn carry(fs: &[FunValue], t: &Ty, x: &Value) -> Value {
    let inv: Vec<FunValue> = fs.iter().map(|f| f.inverse().expect("bijection")).collect();
    carry_with(fs, &inv, t, x)
}

fn carry_with(fs: &[FunValue], inv: &[FunValue], t: &Ty, x: &Value) -> Value {
    match t {
        Ty::Bool => x.clone(),
        Ty::Sort(i) => fs[*i].apply(x).expect("in carrier").clone(),
        Ty::Prod(a, b) => {
            let (p, q) = x.as_pair().expect("pair");
            Value::pair(carry_with(fs, inv, a, p), carry_with(fs, inv, b, q))
        }
        Ty::Arrow(a, b) => {
            // g'(k') = f_b(g(f_a^-1(k')))
            let g = x.as_fun().expect("function");
            let table = g
                .table()
                .keys()
                .map(|k| {
                    let k2 = carry_with(fs, inv, a, k);
                    let back = carry_with(inv, fs, a, &k2);
                    (k2, carry_with(fs, inv, b, g.apply(&back).expect("total")))
                })
                .collect();
            Value::Fun(FunValue::new(table))
        }
    }
}

pub fn atoms(prefix: &str, n: usize) -> Vec<Value> {
    (0..n).map(|i| Value::atom(format!("{prefix}{i}"))).collect()
}

/// A uniformly chosen element of each component, so arbitrary in size only
/// through the domains of function types.
pub fn random_value(rng: &mut impl rand::Rng, t: &Ty, inh: &mut Inhabitants) -> Value {
    match t {
        Ty::Bool => Value::Bool(rng.gen()),
        Ty::Sort(i) => {
            let c = inh.of(&Ty::Sort(*i));
            c[rng.gen_range(0..c.len())].clone()
        }
        Ty::Prod(a, b) => Value::pair(random_value(rng, a, inh), random_value(rng, b, inh)),
        Ty::Arrow(a, b) => {
            let dom = inh.of(a);
            let table = dom.iter().map(|k| (k.clone(), random_value(rng, b, inh))).collect();
            Value::Fun(FunValue::new(table))
        }
    }
}

/// A random simple type over `n` sorts with at most `depth` constructors nested.
pub fn random_ty(rng: &mut impl rand::Rng, n: usize, depth: usize) -> Ty {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.8) { Ty::Sort(rng.gen_range(0..n)) } else { Ty::Bool };
    }
    let (a, b) = (random_ty(rng, n, depth - 1), random_ty(rng, n, depth - 1));
    if rng.gen_bool(0.6) {
        Ty::prod(&a, &b)
    } else {
        Ty::arrow(&a, &b)
    }
}
