use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::syntax::Name;

/// A finite function given by its table. The key set is the domain.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunValue(Arc<BTreeMap<Value, Value>>);

impl FunValue {
    pub fn new(table: BTreeMap<Value, Value>) -> Self {
        FunValue(Arc::new(table))
    }

    pub fn table(&self) -> &BTreeMap<Value, Value> {
        &self.0
    }

    pub fn apply(&self, x: &Value) -> Option<&Value> {
        self.0.get(x)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Value> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn identity<'a>(domain: impl IntoIterator<Item = &'a Value>) -> Self {
        FunValue::new(domain.into_iter().map(|v| (v.clone(), v.clone())).collect())
    }

    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<&Value> = self.0.values().collect();
        image.len() == self.0.len()
    }

    pub fn image(&self) -> BTreeSet<Value> {
        self.0.values().cloned().collect()
    }

    /// The inverse table, if the function is injective.
    pub fn inverse(&self) -> Option<FunValue> {
        let mut inv = BTreeMap::new();
        for (k, v) in self.0.iter() {
            if inv.insert(v.clone(), k.clone()).is_some() {
                return None;
            }
        }
        Some(FunValue::new(inv))
    }

    pub fn compose(&self, inner: &FunValue) -> Option<FunValue> {
        let mut out = BTreeMap::new();
        for (k, v) in inner.0.iter() {
            out.insert(k.clone(), self.apply(v)?.clone());
        }
        Some(FunValue::new(out))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetValue(Arc<BTreeSet<Value>>);

impl SetValue {
    pub fn new(elements: BTreeSet<Value>) -> Self {
        SetValue(Arc::new(elements))
    }

    pub fn elements(&self) -> &BTreeSet<Value> {
        &self.0
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.0.contains(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }
}

impl FromIterator<Value> for SetValue {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        SetValue::new(iter.into_iter().collect())
    }
}

/// Tagged semantic values. Tags are disjoint: a predicate (a `Fun` into
/// booleans) is never equal to the subset it describes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Atom(Name),
    Pair(Arc<Value>, Arc<Value>),
    Fun(FunValue),
    Set(SetValue),
}

impl Value {
    pub fn atom(name: impl Into<Name>) -> Self {
        Value::Atom(name.into())
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn set(elements: impl IntoIterator<Item = Value>) -> Self {
        Value::Set(elements.into_iter().collect())
    }

    pub fn fun(table: impl IntoIterator<Item = (Value, Value)>) -> Self {
        Value::Fun(FunValue::new(table.into_iter().collect()))
    }

    /// Atoms `prefix0 .. prefix{n-1}` as a set.
    pub fn atoms(prefix: &str, n: usize) -> Self {
        Value::set((0..n).map(|i| Value::atom(format!("{prefix}{i}"))))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_fun(&self) -> Option<&FunValue> {
        match self {
            Value::Fun(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&SetValue> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Atom(_) => "atom",
            Value::Pair(..) => "pair",
            Value::Fun(_) => "function",
            Value::Set(_) => "set",
        }
    }
}

impl fmt::Display for Value {
    /// Prints the value in model-file literal syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Atom(a) => write!(f, "atom {a}"),
            Value::Pair(a, b) => write!(f, "<{a}, {b}>"),
            Value::Fun(t) => {
                f.write_str("fun {")?;
                for (i, (k, v)) in t.table().iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, " {k} -> {v}")?;
                }
                if t.is_empty() {
                    f.write_str("}")
                } else {
                    f.write_str(" }")
                }
            }
            Value::Set(s) => {
                f.write_str("{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FunValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Value::Fun(self.clone()), f)
    }
}

impl fmt::Debug for FunValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Value::Set(self.clone()), f)
    }
}

impl fmt::Debug for SetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_are_disjoint() {
        let pred = Value::fun([(Value::atom("a0"), Value::Bool(true))]);
        let subset = Value::set([Value::atom("a0")]);
        assert_ne!(pred, subset);
    }

    #[test]
    fn inverse_of_swap() {
        let a = Value::atom("a0");
        let b = Value::atom("a1");
        let f = FunValue::new([(a.clone(), b.clone()), (b.clone(), a.clone())].into_iter().collect());
        assert_eq!(f.inverse().unwrap(), f);
        let c = FunValue::new([(a.clone(), a.clone()), (b.clone(), a.clone())].into_iter().collect());
        assert!(c.inverse().is_none());
    }

    #[test]
    fn display_is_literal_syntax() {
        let v = Value::pair(Value::atoms("a", 2), Value::fun([(Value::atom("a0"), Value::Bool(false))]));
        assert_eq!(v.to_string(), "<{atom a0, atom a1}, fun { atom a0 -> false }>");
    }
}
