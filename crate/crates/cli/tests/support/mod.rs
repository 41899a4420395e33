#![allow(dead_code)]

pub mod corpus;
#[path = "../../../core/tests/common/simple.rs"]
pub mod simple;
