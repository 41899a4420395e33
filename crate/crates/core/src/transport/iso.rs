use crate::sanorm::{sa_normalize, SAClass};
use crate::semantics::{FiniteModel, SetValue, Value};
use crate::syntax::Expr;
use crate::typecheck::Context;

use super::plan::{compile_subst_plan, Plan, SetFamily};
use super::{factorial, split_sorts, unrank_tuple, BijectionTuple, TransportError};

/// How candidate bijection tuples are filtered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

#[allow(clippy::derivable_impls)]
impl Default for Strategy {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Strategy::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Strategy::Sequential
        }
    }
}

/// All isomorphisms between two instances, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsoSet {
    pub witnesses: Vec<BijectionTuple>,
}

impl IsoSet {
    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn contains(&self, f: &BijectionTuple) -> bool {
        self.witnesses.binary_search(f).is_ok()
    }
}

/// An instance of a normal form split into carriers and structure.
#[derive(Clone, Debug)]
pub struct SplitInstance {
    pub carriers: Vec<SetValue>,
    pub structure: Value,
}

pub fn split_instance(sa: &SAClass, s: &Value) -> Result<SplitInstance, TransportError> {
    let (a, x) = s
        .as_pair()
        .ok_or_else(|| TransportError::ShapeMismatch(format!("`{s}` is not a pair of sorts and structure")))?;
    let carriers = split_sorts(a, sa.sorts)
        .ok_or_else(|| TransportError::ShapeMismatch(format!("`{a}` is not a tuple of {} sets", sa.sorts)))?;
    Ok(SplitInstance { carriers, structure: x.clone() })
}

/// The isomorphism test of a normal form: `Subst(f, s)(X) = X'`.
pub struct IsoProblem {
    pub plan: Plan,
    pub from: SplitInstance,
    pub to: SplitInstance,
}

impl IsoProblem {
    pub fn new(ctx: &Context, sa: &SAClass, s: &Value, s2: &Value) -> Result<Self, TransportError> {
        let plan = compile_subst_plan(ctx, sa.sorts, &SetFamily::new(sa.alpha.clone(), sa.signature.clone()))?;
        Ok(IsoProblem { plan, from: split_instance(sa, s)?, to: split_instance(sa, s2)? })
    }

    pub fn sizes_match(&self) -> bool {
        self.from.carriers.iter().zip(&self.to.carriers).all(|(a, b)| a.len() == b.len())
    }

    /// Number of candidate bijection tuples, `prod |A_i|!`.
    pub fn candidate_count(&self) -> u128 {
        self.from.carriers.iter().fold(1u128, |acc, c| acc.saturating_mul(factorial(c.len())))
    }

    /// True if `f` carries the first structure to the second. Structures that
    /// do not fit the signature are never carried.
    pub fn holds(&self, f: &BijectionTuple) -> bool {
        matches!(self.plan.apply(f, &self.from.structure), Ok(v) if v == self.to.structure)
    }

    pub fn candidate(&self, rank: u128) -> BijectionTuple {
        unrank_tuple(&self.from.carriers, &self.to.carriers, rank)
    }

    /// Filters every candidate; `first_only` stops at one witness.
    pub fn solve(&self, budget: usize, strategy: Strategy, first_only: bool) -> Result<IsoSet, TransportError> {
        if !self.sizes_match() {
            return Ok(IsoSet::default());
        }
        let count = self.candidate_count();
        if count > budget as u128 {
            return Err(TransportError::BudgetExceeded {
                sizes: self.from.carriers.iter().map(SetValue::len).collect(),
                count: count.to_string(),
                budget,
            });
        }
        let count = count as u64;
        let mut witnesses: Vec<BijectionTuple> = match strategy {
            Strategy::Sequential => {
                let mut it = (0..count).map(|r| self.candidate(r as u128)).filter(|f| self.holds(f));
                if first_only {
                    it.next().into_iter().collect()
                } else {
                    it.collect()
                }
            }
            #[cfg(feature = "parallel")]
            Strategy::Parallel => {
                use rayon::prelude::*;
                let it = (0..count).into_par_iter().map(|r| self.candidate(r as u128));
                if first_only {
                    it.find_first(|f| self.holds(f)).into_iter().collect()
                } else {
                    it.filter(|f| self.holds(f)).collect()
                }
            }
        };
        witnesses.sort();
        Ok(IsoSet { witnesses })
    }
}

/// `id(sigma, N, N')`, computed through the signature-axiom form of `sigma`.
/// Free sort variables of the ambient context stay fixed; only the sorts
/// bound by the class are permuted.
pub fn id_set(ctx: &Context, sigma: &Expr, n: &Value, n2: &Value, model: &FiniteModel) -> Result<IsoSet, TransportError> {
    id_set_with(ctx, sigma, n, n2, model, Strategy::default())
}

pub fn id_set_with(
    ctx: &Context,
    sigma: &Expr,
    n: &Value,
    n2: &Value,
    model: &FiniteModel,
    strategy: Strategy,
) -> Result<IsoSet, TransportError> {
    let sa = sa_normalize(ctx, sigma)?;
    let s = sa.eval_to_sa(ctx, model, n)?;
    let s2 = sa.eval_to_sa(ctx, model, n2)?;
    IsoProblem::new(ctx, &sa, &s, &s2)?.solve(model.budget, strategy, false)
}

/// `N =[sigma]= N'`: whether some isomorphism exists.
pub fn decide_iso(ctx: &Context, sigma: &Expr, n: &Value, n2: &Value, model: &FiniteModel) -> Result<bool, TransportError> {
    let sa = sa_normalize(ctx, sigma)?;
    let s = sa.eval_to_sa(ctx, model, n)?;
    let s2 = sa.eval_to_sa(ctx, model, n2)?;
    let found = IsoProblem::new(ctx, &sa, &s, &s2)?.solve(model.budget, Strategy::default(), true)?;
    Ok(!found.is_empty())
}
