use std::fmt;

use crate::semantics::{FunValue, SetValue, Value};

/// Packs values as right-nested pairs: one value stays bare,
/// `[a, b, c]` becomes `<a, <b, c>>`.
pub fn nest(mut values: Vec<Value>) -> Value {
    let last = values.pop().expect("at least one component");
    values.into_iter().rev().fold(last, |acc, v| Value::pair(v, acc))
}

/// Inverse of [`nest`] for a known component count.
pub fn unnest(v: &Value, n: usize) -> Option<Vec<Value>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = v;
    for _ in 1..n {
        let (a, b) = cur.as_pair()?;
        out.push(a.clone());
        cur = b;
    }
    out.push(cur.clone());
    Some(out)
}

/// Splits a sort tuple into its `n` carriers.
pub fn split_sorts(v: &Value, n: usize) -> Option<Vec<SetValue>> {
    unnest(v, n)?.into_iter().map(|c| c.as_set().cloned()).collect()
}

pub fn join_sorts(carriers: &[SetValue]) -> Value {
    nest(carriers.iter().cloned().map(Value::Set).collect())
}

/// One bijection per sort, `f_i : A_i -> A'_i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BijectionTuple(Vec<FunValue>);

impl BijectionTuple {
    pub fn new(components: Vec<FunValue>) -> Self {
        BijectionTuple(components)
    }

    pub fn components(&self) -> &[FunValue] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&FunValue> {
        self.0.get(i)
    }

    /// The identity on every carrier; this is `refl`.
    pub fn identity(carriers: &[SetValue]) -> Self {
        BijectionTuple(carriers.iter().map(|c| FunValue::identity(c.iter())).collect())
    }

    pub fn inverse(&self) -> Option<Self> {
        self.0.iter().map(FunValue::inverse).collect::<Option<Vec<_>>>().map(BijectionTuple)
    }

    /// True if each component is a bijection from `from[i]` onto `to[i]`.
    pub fn is_between(&self, from: &[SetValue], to: &[SetValue]) -> bool {
        self.0.len() == from.len()
            && self.0.len() == to.len()
            && self.0.iter().zip(from).zip(to).all(|((f, a), b)| {
                f.len() == a.len()
                    && f.domain().all(|k| a.contains(k))
                    && f.is_injective()
                    && f.image().len() == b.len()
                    && f.image().iter().all(|v| b.contains(v))
            })
    }

    /// The tuple as a value of `(A_1 -> A'_1) * ... * (A_n -> A'_n)`.
    pub fn to_value(&self) -> Value {
        nest(self.0.iter().cloned().map(Value::Fun).collect())
    }

    pub fn from_value(v: &Value, n: usize) -> Option<Self> {
        unnest(v, n)?.into_iter().map(|c| c.as_fun().cloned()).collect::<Option<Vec<_>>>().map(BijectionTuple)
    }
}

impl fmt::Display for BijectionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_value())
    }
}

impl fmt::Debug for BijectionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `n!`, saturating.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// The `rank`-th permutation of `items` in lexicographic order of the
/// Lehmer code.
pub fn unrank_permutation<T: Clone>(items: &[T], mut rank: u128) -> Vec<T> {
    let mut pool: Vec<T> = items.to_vec();
    let mut out = Vec::with_capacity(pool.len());
    for k in (1..=pool.len()).rev() {
        let f = factorial(k - 1);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// The `rank`-th tuple of bijections between corresponding carriers, in
/// mixed radix with the first sort varying slowest.
pub fn unrank_tuple(from: &[SetValue], to: &[SetValue], mut rank: u128) -> BijectionTuple {
    let mut digits = vec![0u128; from.len()];
    for i in (0..from.len()).rev() {
        let radix = factorial(from[i].len());
        digits[i] = rank % radix;
        rank /= radix;
    }
    let comps = from
        .iter()
        .zip(to)
        .zip(digits)
        .map(|((a, b), d)| {
            let targets: Vec<Value> = b.iter().cloned().collect();
            let image = unrank_permutation(&targets, d);
            FunValue::new(a.iter().cloned().zip(image).collect())
        })
        .collect();
    BijectionTuple(comps)
}
