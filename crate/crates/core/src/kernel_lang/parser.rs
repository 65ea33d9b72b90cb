use thiserror::Error;

use super::{simplify_binary, simplify_unary, BinaryOp, Expr, UnaryOp, Var, VarSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared variable `{name}` at byte {offset} (allowed: {allowed})")]
    UndeclaredVariable {
        name: String,
        offset: usize,
        allowed: String,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UndeclaredVariable { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = match c {
                b'+' => lx.single(Tok::Plus),
                b'-' => lx.single(Tok::Minus),
                b'*' if lx.src.get(lx.pos + 1) == Some(&b'*') => {
                    lx.pos += 2;
                    Tok::Caret
                }
                b'*' => lx.single(Tok::Star),
                b'/' => lx.single(Tok::Slash),
                b'^' => lx.single(Tok::Caret),
                b'(' => lx.single(Tok::LParen),
                b')' => lx.single(Tok::RParen),
                b',' => lx.single(Tok::Comma),
                b'0'..=b'9' | b'.' => lx.number()?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(),
                _ => {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", c as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn single(&mut self, t: Tok) -> Tok {
        self.pos += 1;
        t
    }

    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> usize {
        let s = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - s
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let mut n = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += self.digits();
        }
        if n == 0 {
            return Err(ParseError::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                // `2e` followed by something else: not an exponent.
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|e| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`: {e}"),
            })
    }

    fn ident(&mut self) -> Tok {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    allowed: VarSet,
}

/// Parse `text`, accepting only the variables in `allowed`. Constant subtrees
/// are folded.
pub fn parse_expr(text: &str, allowed: VarSet) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: Lexer::tokens(text)?,
        pos: 0,
        allowed,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        other => Err(p.error(format!("unexpected {other:?} after expression"))),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {t:?}, found {:?}", self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = simplify_binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = simplify_binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(simplify_unary(UnaryOp::Neg, self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(simplify_binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(x) => Ok(Expr::Const(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    return self.call(&name, offset);
                }
                if name == "pow" || UnaryOp::from_function(&name).is_some() {
                    return Err(self.error(format!("expected `(` after `{name}`")));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
                    "inf" => return Ok(Expr::Const(f64::INFINITY)),
                    _ => {}
                }
                match Var::from_name(&name) {
                    Some(v) if self.allowed.contains(v) => Ok(Expr::Var(v)),
                    _ => Err(ParseError::UndeclaredVariable {
                        name,
                        offset,
                        allowed: self.allowed.names().join(", "),
                    }),
                }
            }
            Tok::End => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected {other:?}"),
            }),
        }
    }

    fn call(&mut self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen)?;
        let first = self.expr()?;
        if name == "pow" {
            self.expect(Tok::Comma)?;
            let second = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(simplify_binary(BinaryOp::Pow, first, second));
        }
        let Some(op) = UnaryOp::from_function(name) else {
            return Err(ParseError::Syntax {
                offset,
                message: format!("unknown function `{name}`"),
            });
        };
        self.expect(Tok::RParen)?;
        Ok(simplify_unary(op, first))
    }
}
