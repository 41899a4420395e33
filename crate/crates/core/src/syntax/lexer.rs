use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(u64),
    Str(String),
    /// `#check`, `#eval`, ...
    Directive(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Comma,
    Colon,
    Dot,
    Star,
    Arrow,
    Eq,
    EqEq,
    Bang,
    Or,
    And,
    Implies,
    Iff,
    Turnstile,
    Define,
    Squiggle,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(n) => format!("`{n}`"),
            TokenKind::Str(s) => format!("\"{s}\""),
            TokenKind::Directive(d) => format!("`#{d}`"),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Lt => "<",
            TokenKind::Gt => ">",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Dot => ".",
            TokenKind::Star => "*",
            TokenKind::Arrow => "->",
            TokenKind::Eq => "=",
            TokenKind::EqEq => "==",
            TokenKind::Bang => "!",
            TokenKind::Or => "\\/",
            TokenKind::And => "/\\",
            TokenKind::Implies => "=>",
            TokenKind::Iff => "<=>",
            TokenKind::Turnstile => "|-",
            TokenKind::Define => ":=",
            TokenKind::Squiggle => "~>",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        let (sl, sc) = (line, col);
        let rest = |k: usize| chars.get(i + k).copied();

        let (kind, len) = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            (TokenKind::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            match s.parse::<u64>() {
                Ok(n) => (TokenKind::Number(n), j - i),
                Err(_) => (TokenKind::Ident(s), j - i),
            }
        } else if c == '#' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (TokenKind::Directive(chars[i + 1..j].iter().collect()), j - i)
        } else if c == '"' {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(LexError { span: Span::new(sl, sc, sl, sc), message: "unterminated string".into() });
            }
            (TokenKind::Str(chars[i + 1..j].iter().collect()), j + 1 - i)
        } else {
            match (c, rest(1), rest(2)) {
                ('<', Some('='), Some('>')) => (TokenKind::Iff, 3),
                ('-', Some('>'), _) => (TokenKind::Arrow, 2),
                ('=', Some('>'), _) => (TokenKind::Implies, 2),
                ('=', Some('='), _) => (TokenKind::EqEq, 2),
                ('\\', Some('/'), _) => (TokenKind::Or, 2),
                ('/', Some('\\'), _) => (TokenKind::And, 2),
                ('|', Some('-'), _) => (TokenKind::Turnstile, 2),
                (':', Some('='), _) => (TokenKind::Define, 2),
                ('~', Some('>'), _) => (TokenKind::Squiggle, 2),
                ('(', ..) => (TokenKind::LParen, 1),
                (')', ..) => (TokenKind::RParen, 1),
                ('[', ..) => (TokenKind::LBracket, 1),
                (']', ..) => (TokenKind::RBracket, 1),
                ('{', ..) => (TokenKind::LBrace, 1),
                ('}', ..) => (TokenKind::RBrace, 1),
                ('<', ..) => (TokenKind::Lt, 1),
                ('>', ..) => (TokenKind::Gt, 1),
                (',', ..) => (TokenKind::Comma, 1),
                (':', ..) => (TokenKind::Colon, 1),
                ('.', ..) => (TokenKind::Dot, 1),
                ('*', ..) => (TokenKind::Star, 1),
                ('=', ..) => (TokenKind::Eq, 1),
                ('!', ..) => (TokenKind::Bang, 1),
                _ => {
                    return Err(LexError {
                        span: Span::new(sl, sc, sl, sc),
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        advance!(len);
        out.push(Token { kind, span: Span::new(sl, sc, line, col.saturating_sub(1).max(1)) });
    }
    out.push(Token { kind: TokenKind::Eof, span: Span::new(line, col, line, col) });
    Ok(out)
}
