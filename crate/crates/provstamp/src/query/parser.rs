//! Recursive-descent parser for the filter-expression language.
//!
//! Grammar, loosest binding first (parentheses group):
//!
//! ```text
//! expr    := or
//! or      := and ("or" and)*
//! and     := unary ("and" unary)*
//! unary   := "not" unary | primary
//! primary := "(" expr ")" | "exists" "(" path ")" | path op literal
//! op      := "==" | "!=" | "<" | "<=" | ">" | ">=" | "contains"
//! literal := double-quoted string | number | "true" | "false"
//! path    := segment ("[*]")* ("." segment ("[*]")*)*
//! ```
//!
//! `or`, `and`, `not`, `exists`, `contains`, `true` and `false` are
//! reserved words and cannot appear as path segments.

use crate::model::Timestamp;

use super::ast::{CompareOp, Literal, Path, PathSegment, QueryExpr};
use super::QueryError;

/// Parses a filter expression into its syntax tree.
pub fn parse_query(text: &str) -> Result<QueryExpr, QueryError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        input_len: text.len(),
    };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(token) => Err(parser.unexpected(token.offset, &["end of input", "'and'", "'or'"])),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Word(String),
    Dot,
    Wildcard,
    LParen,
    RParen,
    Op(CompareOp),
    Str(String),
    Num(f64),
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Word(w) => format!("{w:?}"),
            TokenKind::Dot => "'.'".into(),
            TokenKind::Wildcard => "'[*]'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Op(op) => format!("{:?}", op.as_str()),
            TokenKind::Str(_) => "string literal".into(),
            TokenKind::Num(_) => "number literal".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn is_word_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || matches!(b, b'_' | b'@')
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'@' | b':' | b'-')
}

fn lex(text: &str) -> Result<Vec<Token>, QueryError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let offset = pos;
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
                continue;
            }
            b'.' => {
                tokens.push(Token { kind: TokenKind::Dot, offset });
                pos += 1;
            }
            b'(' => {
                tokens.push(Token { kind: TokenKind::LParen, offset });
                pos += 1;
            }
            b')' => {
                tokens.push(Token { kind: TokenKind::RParen, offset });
                pos += 1;
            }
            b'[' => {
                if bytes[pos..].starts_with(b"[*]") {
                    tokens.push(Token { kind: TokenKind::Wildcard, offset });
                    pos += 3;
                } else {
                    return Err(syntax(offset, &["'[*]'"], "'['"));
                }
            }
            b'=' | b'!' => {
                if bytes.get(pos + 1) == Some(&b'=') {
                    let op = if b == b'=' { CompareOp::Eq } else { CompareOp::Ne };
                    tokens.push(Token { kind: TokenKind::Op(op), offset });
                    pos += 2;
                } else {
                    return Err(syntax(offset, &["'=='", "'!='"], &format!("{:?}", b as char)));
                }
            }
            b'<' | b'>' => {
                let eq = bytes.get(pos + 1) == Some(&b'=');
                let op = match (b, eq) {
                    (b'<', true) => CompareOp::Le,
                    (b'<', false) => CompareOp::Lt,
                    (b'>', true) => CompareOp::Ge,
                    (b'>', false) => CompareOp::Gt,
                    _ => unreachable!(),
                };
                tokens.push(Token { kind: TokenKind::Op(op), offset });
                pos += if eq { 2 } else { 1 };
            }
            b'"' => {
                pos += 1;
                let mut value = String::new();
                loop {
                    match bytes.get(pos) {
                        None => return Err(syntax(offset, &["closing '\"'"], "end of input")),
                        Some(b'"') => {
                            pos += 1;
                            break;
                        }
                        Some(b'\\') => match bytes.get(pos + 1) {
                            Some(b'"') => {
                                value.push('"');
                                pos += 2;
                            }
                            Some(b'\\') => {
                                value.push('\\');
                                pos += 2;
                            }
                            _ => return Err(syntax(pos, &["'\\\"'", "'\\\\'"], "escape")),
                        },
                        Some(_) => {
                            // Copy one UTF-8 character.
                            let s = &text[pos..];
                            let c = s.chars().next().unwrap();
                            value.push(c);
                            pos += c.len_utf8();
                        }
                    }
                }
                tokens.push(Token { kind: TokenKind::Str(value), offset });
            }
            b'0'..=b'9' | b'-' => {
                let start = pos;
                if b == b'-' {
                    pos += 1;
                    if !matches!(bytes.get(pos), Some(b'0'..=b'9')) {
                        return Err(syntax(start, &["digit"], "'-'"));
                    }
                }
                while matches!(bytes.get(pos), Some(b'0'..=b'9'))
                    || matches!(bytes.get(pos), Some(b'.'))
                        && matches!(bytes.get(pos + 1), Some(b'0'..=b'9'))
                {
                    pos += 1;
                }
                if matches!(bytes.get(pos), Some(b'e') | Some(b'E')) {
                    pos += 1;
                    if matches!(bytes.get(pos), Some(b'+') | Some(b'-')) {
                        pos += 1;
                    }
                    while matches!(bytes.get(pos), Some(b'0'..=b'9')) {
                        pos += 1;
                    }
                }
                let value: f64 = text[start..pos]
                    .parse()
                    .map_err(|_| syntax(start, &["number"], &text[start..pos]))?;
                tokens.push(Token { kind: TokenKind::Num(value), offset });
            }
            b if is_word_start(b) => {
                let start = pos;
                while matches!(bytes.get(pos), Some(&b) if is_word_byte(b)) {
                    pos += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Word(text[start..pos].to_string()),
                    offset,
                });
            }
            other => {
                return Err(syntax(
                    offset,
                    &["path", "literal", "operator"],
                    &format!("{:?}", other as char),
                ))
            }
        }
    }
    Ok(tokens)
}

fn syntax(offset: usize, expected: &[&str], found: &str) -> QueryError {
    QueryError::Syntax {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.to_string(),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    input_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_offset(&self) -> usize {
        self.input_len
    }

    fn unexpected(&self, offset: usize, expected: &[&str]) -> QueryError {
        let found = self
            .tokens
            .iter()
            .find(|t| t.offset == offset)
            .map(|t| t.kind.describe())
            .unwrap_or_else(|| "end of input".into());
        syntax(offset, expected, &found)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Word(w), .. }) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<QueryExpr, QueryError> {
        let mut items = vec![self.and()?];
        while self.eat_word("or") {
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            QueryExpr::Or(items)
        })
    }

    fn and(&mut self) -> Result<QueryExpr, QueryError> {
        let mut items = vec![self.unary()?];
        while self.eat_word("and") {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            QueryExpr::And(items)
        })
    }

    fn unary(&mut self) -> Result<QueryExpr, QueryError> {
        if self.eat_word("not") {
            return Ok(QueryExpr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<QueryExpr, QueryError> {
        match self.peek() {
            Some(Token { kind: TokenKind::LParen, .. }) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token { kind: TokenKind::RParen, .. }) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    other => {
                        let offset = other.map(|t| t.offset).unwrap_or(self.end_offset());
                        Err(self.unexpected(offset, &["')'"]))
                    }
                }
            }
            Some(Token { kind: TokenKind::Word(w), offset }) if w == "exists" => {
                let offset = *offset;
                self.pos += 1;
                if !matches!(self.peek(), Some(Token { kind: TokenKind::LParen, .. })) {
                    let at = self.peek().map(|t| t.offset).unwrap_or(self.end_offset());
                    let _ = offset;
                    return Err(self.unexpected(at, &["'('"]));
                }
                self.pos += 1;
                let path = self.path()?;
                if !matches!(self.peek(), Some(Token { kind: TokenKind::RParen, .. })) {
                    let at = self.peek().map(|t| t.offset).unwrap_or(self.end_offset());
                    return Err(self.unexpected(at, &["')'"]));
                }
                self.pos += 1;
                Ok(QueryExpr::Exists(path))
            }
            Some(Token { kind: TokenKind::Word(_), .. }) => {
                let path = self.path()?;
                let op = self.op()?;
                let literal_offset = self.peek().map(|t| t.offset).unwrap_or(self.end_offset());
                let literal = self.literal()?;
                if op.is_ordering() {
                    match &literal {
                        Literal::Num(_) => {}
                        Literal::Str(s) if Timestamp::parse(s).is_ok() => {}
                        _ => {
                            return Err(syntax(
                                literal_offset,
                                &["number", "timestamp string"],
                                &format!("{literal}"),
                            ))
                        }
                    }
                }
                Ok(QueryExpr::Compare { path, op, literal })
            }
            other => {
                let offset = other.map(|t| t.offset).unwrap_or(self.end_offset());
                Err(self.unexpected(offset, &["'('", "'not'", "'exists'", "path"]))
            }
        }
    }

    fn path(&mut self) -> Result<Path, QueryError> {
        let mut segments = Vec::new();
        loop {
            match self.peek() {
                Some(Token { kind: TokenKind::Word(w), offset }) => {
                    if matches!(w.as_str(), "or" | "and" | "not" | "exists" | "contains" | "true" | "false") {
                        return Err(syntax(*offset, &["path segment"], &format!("reserved word {w:?}")));
                    }
                    segments.push(PathSegment::Key(w.clone()));
                    self.pos += 1;
                }
                other => {
                    let offset = other.map(|t| t.offset).unwrap_or(self.end_offset());
                    return Err(self.unexpected(offset, &["path segment"]));
                }
            }
            while matches!(self.peek(), Some(Token { kind: TokenKind::Wildcard, .. })) {
                segments.push(PathSegment::Wildcard);
                self.pos += 1;
            }
            if matches!(self.peek(), Some(Token { kind: TokenKind::Dot, .. })) {
                self.pos += 1;
                continue;
            }
            return Ok(Path { segments });
        }
    }

    fn op(&mut self) -> Result<CompareOp, QueryError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Op(op), .. }) => {
                let op = *op;
                self.pos += 1;
                Ok(op)
            }
            Some(Token { kind: TokenKind::Word(w), .. }) if w == "contains" => {
                self.pos += 1;
                Ok(CompareOp::Contains)
            }
            other => {
                let offset = other.map(|t| t.offset).unwrap_or(self.end_offset());
                Err(self.unexpected(offset, &["comparison operator"]))
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, QueryError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Str(s), .. }) => {
                let literal = Literal::Str(s.clone());
                self.pos += 1;
                Ok(literal)
            }
            Some(Token { kind: TokenKind::Num(n), .. }) => {
                let literal = Literal::Num(*n);
                self.pos += 1;
                Ok(literal)
            }
            Some(Token { kind: TokenKind::Word(w), .. }) if w == "true" || w == "false" => {
                let literal = Literal::Bool(w == "true");
                self.pos += 1;
                Ok(literal)
            }
            other => {
                let offset = other.map(|t| t.offset).unwrap_or(self.end_offset());
                Err(self.unexpected(offset, &["string", "number", "'true'", "'false'"]))
            }
        }
    }
}
