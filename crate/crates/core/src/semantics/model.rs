use std::collections::BTreeMap;

use crate::syntax::{Name, ParseError, Parser, TokenKind};

use super::Value;

pub const DEFAULT_BUDGET: usize = 10_000;

/// Values for context variables, plus the enumeration budget: the largest
/// set (function spaces included) the evaluator will materialize.
#[derive(Clone, Debug)]
pub struct FiniteModel {
    pub assignment: BTreeMap<Name, Value>,
    pub budget: usize,
}

impl Default for FiniteModel {
    fn default() -> Self {
        FiniteModel { assignment: BTreeMap::new(), budget: DEFAULT_BUDGET }
    }
}

impl FiniteModel {
    pub fn new() -> Self {
        FiniteModel::default()
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn bind(&mut self, name: impl Into<Name>, v: Value) -> &mut Self {
        self.assignment.insert(name.into(), v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.assignment.get(name)
    }
}

/// Parses a model file: a sequence of `let NAME = VALUE` bindings. Values may
/// refer to earlier bindings by name.
pub fn parse_model(text: &str) -> Result<FiniteModel, ParseError> {
    let mut p = Parser::new(text)?;
    let mut model = FiniteModel::new();
    while !p.at_eof() {
        if !p.at_ident("let") {
            return Err(p.error_expected(&["`let`"]));
        }
        p.bump();
        let span = p.peek().span;
        let (name, _) = p.expect_ident()?;
        if model.assignment.contains_key(&name) {
            return Err(ParseError::custom(span, format!("`{name}` is bound twice")));
        }
        p.expect(&TokenKind::Eq)?;
        let v = parse_value(&mut p, &model.assignment)?;
        model.assignment.insert(name, v);
    }
    Ok(model)
}

/// Parses one value literal.
pub fn parse_value(p: &mut Parser, lets: &BTreeMap<Name, Value>) -> Result<Value, ParseError> {
    let tok = p.peek().clone();
    match &tok.kind {
        TokenKind::Ident(w) => match w.as_str() {
            "true" => {
                p.bump();
                Ok(Value::Bool(true))
            }
            "false" => {
                p.bump();
                Ok(Value::Bool(false))
            }
            "atom" => {
                p.bump();
                match p.peek_kind().clone() {
                    TokenKind::Ident(a) => {
                        p.bump();
                        Ok(Value::atom(a))
                    }
                    TokenKind::Number(n) => {
                        p.bump();
                        Ok(Value::atom(n.to_string()))
                    }
                    _ => Err(p.error_expected(&["atom name"])),
                }
            }
            "fun" => {
                p.bump();
                p.expect(&TokenKind::LBrace)?;
                let mut table = BTreeMap::new();
                if !p.at(&TokenKind::RBrace) {
                    loop {
                        let at = p.peek().span;
                        let k = parse_value(p, lets)?;
                        p.expect(&TokenKind::Arrow)?;
                        let v = parse_value(p, lets)?;
                        if table.insert(k.clone(), v).is_some() {
                            return Err(ParseError::custom(at, format!("duplicate argument `{k}` in function table")));
                        }
                        if !p.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                p.expect(&TokenKind::RBrace)?;
                Ok(Value::Fun(super::FunValue::new(table)))
            }
            name => match lets.get(name) {
                Some(v) => {
                    p.bump();
                    Ok(v.clone())
                }
                None => Err(ParseError::custom(tok.span, format!("unknown name `{name}` in value"))),
            },
        },
        TokenKind::LBrace => {
            p.bump();
            let mut elems = Vec::new();
            if !p.at(&TokenKind::RBrace) {
                loop {
                    elems.push(parse_value(p, lets)?);
                    if !p.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            p.expect(&TokenKind::RBrace)?;
            Ok(Value::set(elems))
        }
        TokenKind::Lt => {
            p.bump();
            let a = parse_value(p, lets)?;
            p.expect(&TokenKind::Comma)?;
            let b = parse_value(p, lets)?;
            p.expect(&TokenKind::Gt)?;
            Ok(Value::pair(a, b))
        }
        _ => Err(p.error_expected(&["value"])),
    }
}

/// Parses a single value literal from text.
pub fn parse_value_text(text: &str) -> Result<Value, ParseError> {
    let mut p = Parser::new(text)?;
    let v = parse_value(&mut p, &BTreeMap::new())?;
    p.expect_eof()?;
    Ok(v)
}
