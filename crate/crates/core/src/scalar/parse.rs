//! Expression grammar: rational literals, coordinate names, unary minus,
//! `+ - * /`, integer powers `^n` and parentheses.

use num_bigint::BigInt;

use super::{Chart, ScalarExpr};
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
}

fn syntax(message: impl Into<String>, line: usize, column: usize) -> Error {
    Error::Syntax {
        message: message.into(),
        line,
        column,
    }
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize, usize)>> {
        let mut lx = Lexer {
            src,
            toks: Vec::new(),
        };
        let chars: Vec<(usize, char)> = lx.src.char_indices().collect();
        let (mut line, mut col) = (1usize, 1usize);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i].1;
            let (l0, c0) = (line, col);
            if c == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                col += 1;
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = chars[i].0;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                let end = chars.get(i).map_or(src.len(), |p| p.0);
                let n: BigInt = src[start..end].parse().expect("digits");
                lx.toks.push((Tok::Num(n), l0, c0));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = chars[i].0;
                while i < chars.len()
                    && (chars[i].1.is_ascii_alphanumeric()
                        || chars[i].1 == '_'
                        || chars[i].1 == '\'')
                {
                    i += 1;
                    col += 1;
                }
                let end = chars.get(i).map_or(src.len(), |p| p.0);
                lx.toks
                    .push((Tok::Ident(src[start..end].to_string()), l0, c0));
                continue;
            }
            if "+-*/^()".contains(c) {
                lx.toks.push((Tok::Op(c), l0, c0));
                i += 1;
                col += 1;
                continue;
            }
            return Err(syntax(format!("unexpected character `{c}`"), l0, c0));
        }
        lx.toks.push((Tok::End, line, col));
        Ok(lx.toks)
    }
}

struct Parser<'c> {
    chart: &'c Chart,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.1, t.2)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(msg, l, c)
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let (l, c) = self.here();
                    let d = self.unary()?;
                    acc = acc.div_ref(&d).map_err(|e| syntax(e.to_string(), l, c))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.peek() == &Tok::Op('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        if self.peek() == &Tok::Op('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    // power := atom ('^' '-'? integer)?
    fn power(&mut self) -> Result<ScalarExpr> {
        let base = self.atom()?;
        if self.peek() != &Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let (l, c) = self.here();
        let neg = if self.peek() == &Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        let paren = self.peek() == &Tok::Op('(');
        if paren {
            self.bump();
        }
        let n = match self.bump() {
            Tok::Num(n) => n,
            _ => return Err(syntax("exponent must be an integer", l, c)),
        };
        if paren && self.bump() != Tok::Op(')') {
            return Err(syntax("expected `)` after exponent", l, c));
        }
        let n: u32 = u32::try_from(&n).map_err(|_| syntax("exponent too large", l, c))?;
        let p = base.pow(n);
        if neg {
            p.inverse().map_err(|e| syntax(e.to_string(), l, c))
        } else {
            Ok(p)
        }
    }

    fn atom(&mut self) -> Result<ScalarExpr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(ScalarExpr::constant(Rational::from_integer(n)))
            }
            Tok::Ident(name) => {
                let e = self
                    .chart
                    .resolve_identifier(&name)
                    .ok_or_else(|| self.err(format!("unknown coordinate `{name}`")))?;
                self.bump();
                Ok(e)
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                if self.peek() != &Tok::Op(')') {
                    return Err(self.err(format!("expected `)`, found {}", self.describe())));
                }
                self.bump();
                Ok(e)
            }
            _ => Err(self.err(format!("expected an operand, found {}", self.describe()))),
        }
    }
}

pub(super) fn parse(chart: &Chart, text: &str) -> Result<ScalarExpr> {
    let toks = Lexer::run(text)?;
    let mut p = Parser {
        chart,
        toks,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.err(format!("unexpected {}", p.describe())));
    }
    Ok(e)
}
