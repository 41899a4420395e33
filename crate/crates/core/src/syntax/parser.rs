use std::fmt;

use super::lexer::{tokenize, Token, TokenKind};
use super::{uniquify_binders, Binder, Connective, Expr, ExprKind, Name, ProjIndex, Span, VACUOUS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl ParseError {
    pub fn custom(span: Span, message: impl Into<String>) -> Self {
        ParseError { span, expected: vec![], found: String::new(), message: Some(message.into()) }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.span)?;
        if let Some(m) = &self.message {
            return f.write_str(m);
        }
        write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for ParseError {}

const RESERVED: &[&str] = &[
    "Sigma", "Pi", "Lambda", "S", "Forall", "Exists", "The", "Set", "Class", "Bool", "True", "False", "def",
    "defmacro", "var", "assume", "MPi",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

fn binder_keyword(word: &str) -> Option<Binder> {
    Some(match word {
        "Sigma" => Binder::Sigma,
        "Pi" => Binder::Pi,
        "Lambda" => Binder::Lambda,
        "S" => Binder::Subset,
        "Forall" => Binder::Forall,
        "Exists" => Binder::Exists,
        "The" => Binder::The,
        _ => return None,
    })
}

/// Parses a complete expression. Binders shadowing an enclosing binder are renamed.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.parse_expr()?;
    p.expect_eof()?;
    Ok(uniquify_binders(&e))
}

/// Parses an expression that starts at 1-based `line`/`col` of some enclosing file.
pub fn parse_expr_at(text: &str, line: u32, col: u32) -> Result<Expr, ParseError> {
    parse(text).map_err(|mut e| {
        if e.span.start_line == 1 {
            e.span.start_col += col - 1;
        }
        if e.span.end_line == 1 {
            e.span.end_col += col - 1;
        }
        e.span.start_line += line - 1;
        e.span.end_line += line - 1;
        e
    })
}

/// Recursive-descent parser over a token stream. Also used by the file and
/// model readers for their own item grammars.
pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        let tokens = tokenize(text).map_err(|e| ParseError::custom(e.span, e.message))?;
        Ok(Parser { tokens, pos: 0 })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    pub fn peek_nth(&self, n: usize) -> &TokenKind {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    pub fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == kind
    }

    pub fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek_kind(), TokenKind::Ident(w) if w == word)
    }

    pub fn at_eof(&self) -> bool {
        self.at(&TokenKind::Eof)
    }

    pub fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error_expected(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.peek().span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek_kind().describe(),
            message: None,
        }
    }

    pub fn expect(&mut self, kind: &TokenKind) -> Result<Token, ParseError> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.error_expected(&[&format!("`{}`", kind.symbol())]))
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error_expected(&["end of input"]))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(Name, Span), ParseError> {
        match self.peek_kind().clone() {
            TokenKind::Ident(w) if !is_reserved(&w) => {
                let t = self.bump();
                Ok((w.into(), t.span))
            }
            _ => Err(self.error_expected(&["identifier"])),
        }
    }

    pub fn expect_keyword(&mut self, word: &str) -> Result<Span, ParseError> {
        if self.at_ident(word) {
            Ok(self.bump().span)
        } else {
            Err(self.error_expected(&[&format!("`{word}`")]))
        }
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    pub fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.parse_iff()
    }

    fn parse_iff(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_implies()?;
        if self.eat(&TokenKind::Iff) {
            let rhs = self.parse_iff()?;
            return Ok(self.node(ExprKind::Conn(Connective::Iff, lhs.clone(), rhs.clone()), &lhs, &rhs));
        }
        Ok(lhs)
    }

    fn parse_implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_or()?;
        if self.eat(&TokenKind::Implies) {
            let rhs = self.parse_implies()?;
            return Ok(self.node(ExprKind::Conn(Connective::Implies, lhs.clone(), rhs.clone()), &lhs, &rhs));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_and()?;
        while self.eat(&TokenKind::Or) {
            let rhs = self.parse_and()?;
            lhs = self.node(ExprKind::Conn(Connective::Or, lhs.clone(), rhs.clone()), &lhs, &rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_not()?;
        while self.eat(&TokenKind::And) {
            let rhs = self.parse_not()?;
            lhs = self.node(ExprKind::Conn(Connective::And, lhs.clone(), rhs.clone()), &lhs, &rhs);
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> Result<Expr, ParseError> {
        if self.at(&TokenKind::Bang) {
            let start = self.bump().span;
            let inner = self.parse_not()?;
            let span = start.join(inner.span());
            return Ok(Expr::with_span(ExprKind::Not(inner), span));
        }
        self.parse_eq()
    }

    fn parse_eq(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_arrow()?;
        if self.eat(&TokenKind::Eq) {
            if self.eat(&TokenKind::LBracket) {
                let class = self.parse_expr()?;
                self.expect(&TokenKind::RBracket)?;
                self.expect(&TokenKind::Eq)?;
                let rhs = self.parse_arrow()?;
                let span = lhs.span().join(rhs.span());
                return Ok(Expr::with_span(ExprKind::IsoEq(class, lhs, rhs), span));
            }
            let rhs = self.parse_arrow()?;
            return Ok(self.node(ExprKind::SetEq(lhs.clone(), rhs.clone()), &lhs, &rhs));
        }
        Ok(lhs)
    }

    fn parse_arrow(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_star()?;
        if self.eat(&TokenKind::Arrow) {
            let rhs = self.parse_arrow()?;
            return Ok(self.node(ExprKind::Bind(Binder::Pi, VACUOUS.into(), lhs.clone(), rhs.clone()), &lhs, &rhs));
        }
        Ok(lhs)
    }

    fn parse_star(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_postfix()?;
        if self.eat(&TokenKind::Star) {
            let rhs = self.parse_star()?;
            return Ok(self.node(
                ExprKind::Bind(Binder::Sigma, VACUOUS.into(), lhs.clone(), rhs.clone()),
                &lhs,
                &rhs,
            ));
        }
        Ok(lhs)
    }

    fn node(&self, kind: ExprKind, first: &Expr, last: &Expr) -> Expr {
        Expr::with_span(kind, first.span().join(last.span()))
    }

    fn parse_postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_primary()?;
        loop {
            match self.peek_kind() {
                TokenKind::LParen => {
                    self.bump();
                    let mut args = vec![self.parse_expr()?];
                    while self.eat(&TokenKind::Comma) {
                        args.push(self.parse_expr()?);
                    }
                    self.expect(&TokenKind::RParen)?;
                    let arg = right_nested_pairs(args);
                    let span = e.span().join(self.prev_span());
                    e = Expr::with_span(ExprKind::App(e, arg), span);
                }
                TokenKind::LBracket => {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.at(&TokenKind::RBracket) {
                        args.push(self.parse_expr()?);
                        while self.eat(&TokenKind::Comma) {
                            args.push(self.parse_expr()?);
                        }
                    }
                    self.expect(&TokenKind::RBracket)?;
                    let span = e.span().join(self.prev_span());
                    e = Expr::with_span(ExprKind::MacroApp(e, args), span);
                }
                TokenKind::Dot => {
                    self.bump();
                    let index = match self.peek_kind() {
                        TokenKind::Number(n) => match ProjIndex::from_number(*n) {
                            Some(i) => i,
                            None => {
                                return Err(ParseError::custom(
                                    self.peek().span,
                                    format!("projection index must be 1 or 2, found {n}"),
                                ))
                            }
                        },
                        _ => return Err(self.error_expected(&["`1`", "`2`"])),
                    };
                    self.bump();
                    let span = e.span().join(self.prev_span());
                    e = Expr::with_span(ExprKind::Proj(index, e), span);
                }
                _ => return Ok(e),
            }
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Ident(w) => {
                if let Some(binder) = binder_keyword(w) {
                    return self.parse_binder(binder);
                }
                let kind = match w.as_str() {
                    "Set" => ExprKind::UnivSet,
                    "Class" => ExprKind::UnivClass,
                    "Bool" => ExprKind::BoolSort,
                    "True" => ExprKind::BoolLit(true),
                    "False" => ExprKind::BoolLit(false),
                    w if is_reserved(w) => return Err(self.error_expected(&["expression"])),
                    w => ExprKind::Var(w.into()),
                };
                self.bump();
                Ok(Expr::with_span(kind, tok.span))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(&TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Lt => {
                self.bump();
                let a = self.parse_expr()?;
                self.expect(&TokenKind::Comma)?;
                let b = self.parse_expr()?;
                self.expect(&TokenKind::Gt)?;
                Ok(Expr::with_span(ExprKind::Pair(a, b), tok.span.join(self.prev_span())))
            }
            _ => Err(self.error_expected(&["expression"])),
        }
    }

    fn parse_binder(&mut self, binder: Binder) -> Result<Expr, ParseError> {
        let start = self.bump().span;
        self.expect(&TokenKind::LParen)?;
        let (name, _) = self.expect_ident()?;
        self.expect(&TokenKind::Colon)?;
        let domain = self.parse_expr()?;
        self.expect(&TokenKind::RParen)?;
        if binder == Binder::The && matches!(domain.kind(), ExprKind::UnivSet | ExprKind::UnivClass) {
            return Err(ParseError::custom(domain.span(), "the domain of The must be a set expression, not a universe"));
        }
        let body = self.parse_expr()?;
        let span = start.join(body.span());
        Ok(Expr::with_span(ExprKind::Bind(binder, name, domain, body), span))
    }
}

fn right_nested_pairs(mut args: Vec<Expr>) -> Expr {
    let mut acc = args.pop().unwrap();
    while let Some(a) = args.pop() {
        let span = a.span().join(acc.span());
        acc = Expr::with_span(ExprKind::Pair(a, acc), span);
    }
    acc
}
