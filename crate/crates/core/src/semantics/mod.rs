//! Finite-model evaluation of base-language expressions.

mod eval;
mod model;
mod value;

pub use eval::{check_inhabits, eval, validate_model, EvalError, Evaluator};
pub use model::{parse_model, parse_value, parse_value_text, FiniteModel, DEFAULT_BUDGET};
pub use value::{FunValue, SetValue, Value};
