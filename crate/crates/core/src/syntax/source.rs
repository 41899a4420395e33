//! Reader for `.btt` source files: definitions, declarations, assumptions and
//! embedded test directives.

use super::lexer::TokenKind;
use super::parser::{ParseError, Parser};
use super::{uniquify_binders, Expr, Name, Span};
use crate::macros::{MacroDef, MacroType};
use crate::semantics::{parse_value, Value};

#[derive(Clone, Debug)]
pub enum SequentEntry {
    Decl(Name, Expr),
    Assume(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Ok,
    /// The check must fail with the named reason code.
    Fail(String),
}

#[derive(Clone, Debug)]
pub struct CheckDirective {
    pub expect: Expectation,
    pub entries: Vec<SequentEntry>,
    pub expr: Expr,
    pub ty: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Item {
    Def(MacroDef, Span),
    /// `defmacro NAME : type`, an abstract macro variable.
    MacroVar(Name, MacroType, Span),
    Var(Name, Expr, Span),
    Assume(Expr, Span),
    Check(CheckDirective),
    Eval { expr: Expr, expected: Value, span: Span },
    Model(String, Span),
}

impl Item {
    pub fn span(&self) -> Span {
        match self {
            Item::Def(_, s)
            | Item::MacroVar(_, _, s)
            | Item::Var(_, _, s)
            | Item::Assume(_, s)
            | Item::Eval { span: s, .. }
            | Item::Model(_, s) => *s,
            Item::Check(c) => c.span,
        }
    }
}

pub fn parse_file(text: &str) -> Result<Vec<Item>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut items = Vec::new();
    while !p.at_eof() {
        items.push(parse_item(&mut p)?);
    }
    Ok(items)
}

fn expr(p: &mut Parser) -> Result<Expr, ParseError> {
    Ok(uniquify_binders(&p.parse_expr()?))
}

fn parse_item(p: &mut Parser) -> Result<Item, ParseError> {
    let start = p.peek().span;
    match p.peek_kind().clone() {
        TokenKind::Ident(w) if w == "def" => {
            p.bump();
            let (name, _) = p.expect_ident()?;
            let mut params = Vec::new();
            if p.eat(&TokenKind::LParen) {
                loop {
                    let (pn, _) = p.expect_ident()?;
                    p.expect(&TokenKind::Colon)?;
                    params.push((pn, parse_macro_type(p)?));
                    if !p.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                p.expect(&TokenKind::RParen)?;
            }
            p.expect(&TokenKind::Define)?;
            let body = expr(p)?;
            let span = start.join(body.span());
            Ok(Item::Def(MacroDef { name, params, body }, span))
        }
        TokenKind::Ident(w) if w == "defmacro" => {
            p.bump();
            let (name, _) = p.expect_ident()?;
            p.expect(&TokenKind::Colon)?;
            let ty = parse_macro_type(p)?;
            Ok(Item::MacroVar(name, ty, start))
        }
        TokenKind::Ident(w) if w == "var" => {
            p.bump();
            let (name, _) = p.expect_ident()?;
            p.expect(&TokenKind::Colon)?;
            let ty = expr(p)?;
            let span = start.join(ty.span());
            Ok(Item::Var(name, ty, span))
        }
        TokenKind::Ident(w) if w == "assume" => {
            p.bump();
            let e = expr(p)?;
            let span = start.join(e.span());
            Ok(Item::Assume(e, span))
        }
        TokenKind::Directive(d) => {
            p.bump();
            match d.as_str() {
                "check" | "check_ok" => parse_check(p, Expectation::Ok, start),
                "check_fail" => {
                    let reason = match p.peek_kind().clone() {
                        TokenKind::Ident(r) => {
                            p.bump();
                            r
                        }
                        _ => return Err(p.error_expected(&["reason code"])),
                    };
                    parse_check(p, Expectation::Fail(reason), start)
                }
                "eval" => {
                    let e = expr(p)?;
                    p.expect(&TokenKind::EqEq)?;
                    let expected = parse_value(p, &Default::default())?;
                    let span = start.join(p.peek().span);
                    Ok(Item::Eval { expr: e, expected, span })
                }
                "model" => match p.peek_kind().clone() {
                    TokenKind::Str(path) => {
                        p.bump();
                        Ok(Item::Model(path, start))
                    }
                    _ => Err(p.error_expected(&["string"])),
                },
                other => Err(ParseError::custom(start, format!("unknown directive `#{other}`"))),
            }
        }
        _ => Err(p.error_expected(&["`def`", "`defmacro`", "`var`", "`assume`", "directive"])),
    }
}

fn parse_check(p: &mut Parser, expect: Expectation, start: Span) -> Result<Item, ParseError> {
    let mut entries = Vec::new();
    if !p.at(&TokenKind::Turnstile) {
        loop {
            if p.at_ident("assume") {
                p.bump();
                entries.push(SequentEntry::Assume(expr(p)?));
            } else {
                let (name, _) = p.expect_ident()?;
                p.expect(&TokenKind::Colon)?;
                entries.push(SequentEntry::Decl(name, expr(p)?));
            }
            if !p.eat(&TokenKind::Comma) {
                break;
            }
        }
    }
    p.expect(&TokenKind::Turnstile)?;
    let e = expr(p)?;
    let ty = if p.eat(&TokenKind::Colon) { Some(expr(p)?) } else { None };
    let end = ty.as_ref().map(|t| t.span()).unwrap_or(e.span());
    Ok(Item::Check(CheckDirective { expect, entries, expr: e, ty, span: start.join(end) }))
}

/// `MPi(x : M1) M2`, or `T ~> M`, or a base type `T`.
pub fn parse_macro_type(p: &mut Parser) -> Result<MacroType, ParseError> {
    if p.at_ident("MPi") {
        p.bump();
        p.expect(&TokenKind::LParen)?;
        let (name, _) = p.expect_ident()?;
        p.expect(&TokenKind::Colon)?;
        let arg = parse_macro_type(p)?;
        p.expect(&TokenKind::RParen)?;
        let result = parse_macro_type(p)?;
        return Ok(MacroType::Arrow(name, Box::new(arg), Box::new(result)));
    }
    let base = expr(p)?;
    if p.eat(&TokenKind::Squiggle) {
        let result = parse_macro_type(p)?;
        return Ok(MacroType::Arrow(super::VACUOUS.into(), Box::new(MacroType::Base(base)), Box::new(result)));
    }
    Ok(MacroType::Base(base))
}
