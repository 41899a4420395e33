//! Transport of structure along bijections and the isomorphism engine.

mod bijection;
mod iso;
mod jay;
mod plan;
mod simple;
mod soundness;

use thiserror::Error;

use crate::semantics::EvalError;
use crate::typecheck::TypeError;

pub use bijection::{factorial, join_sorts, nest, split_sorts, unnest, unrank_permutation, unrank_tuple, BijectionTuple};
pub use iso::{decide_iso, id_set, id_set_with, split_instance, IsoProblem, IsoSet, SplitInstance, Strategy};
pub use jay::{j_operator, j_prime, j_prime_coherence};
pub use plan::{
    compile_plan, compile_subst_plan, eval_dep, eval_family, subst, subst_value, trans, DepFamily, Env, Plan, SetFamily,
};
pub use simple::transport_simple;
pub use soundness::substitute_isomorphics;

#[derive(Clone, Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("budget exceeded: carriers of sizes {sizes:?} admit {count} bijection tuples, budget is {budget}")]
    BudgetExceeded { sizes: Vec<usize>, count: String, budget: usize },
    #[error("`{0}` is not a simple type over one sort")]
    NotSimpleType(String),
    #[error("{0}")]
    ClassifyFailure(String),
    #[error("{0}")]
    NotABijection(String),
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("{0}")]
    NotAWitness(String),
    #[error("{0}")]
    SoundnessViolation(String),
    #[error("{0}")]
    CoherenceFailure(String),
}
