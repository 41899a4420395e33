//! Checker, normalizer and finite-model evaluator for Bourbaki-style dependent type theory.

pub mod macros;
pub mod sanorm;
pub mod semantics;
pub mod syntax;
pub mod transport;
pub mod typecheck;
