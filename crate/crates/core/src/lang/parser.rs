//! Recursive-descent parser for surface definitions.
//!
//! ```text
//! surface := "[" expr "," expr "," expr "]" ;
//! expr    := term {("+"|"-") term} ;
//! term    := factor {("*"|"/") factor} ;
//! factor  := ["-"] power ;
//! power   := atom ["^" factor] ;
//! atom    := number | "u" | "v" | ident | ident "(" expr ")" | "(" expr ")" ;
//! ```
//!
//! A surface file may follow the bracketed surface with a domain clause
//! `u in [a, b]; v in [c, d]` whose bounds are constant expressions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::ast::{BinOp, Expr, SurfaceAst, UnaryFn, Var};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::surface::Domain;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: &'a [(&'a str, Var)],
    params: &'a BTreeMap<String, f64>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(t: &Token, message: String) -> ParseError {
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(Self::syntax(
                &t,
                format!("expected {} but found {}", want.describe(), t.tok.describe()),
            ))
        }
    }

    fn surface(&mut self) -> Result<[Expr; 3], ParseError> {
        self.expect(Tok::LBracket)?;
        let x = self.expr()?;
        self.expect(Tok::Comma)?;
        let y = self.expr()?;
        self.expect(Tok::Comma)?;
        let z = self.expr()?;
        self.expect(Tok::RBracket)?;
        Ok([x, y, z])
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(Expr::unary(UnaryFn::Neg, self.power()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            return Ok(Expr::binary(BinOp::Pow, base, self.factor()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Number(x) => Ok(Expr::Const(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(ref name) => {
                if self.peek().tok == Tok::LParen {
                    self.call(&t, name)
                } else {
                    self.name(&t, name)
                }
            }
            _ => Err(Self::syntax(
                &t,
                format!("expected an operand but found {}", t.tok.describe()),
            )),
        }
    }

    fn call(&mut self, at: &Token, name: &str) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            args.push(self.expr()?);
            while self.peek().tok == Tok::Comma {
                self.next();
                args.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen)?;

        let Some(func) = UnaryFn::from_name(name) else {
            return Err(if self.is_value_name(name) {
                ParseError::Arity {
                    name: name.to_string(),
                    expected: 0,
                    found: args.len(),
                    line: at.line,
                    column: at.column,
                }
            } else {
                ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    line: at.line,
                    column: at.column,
                }
            });
        };
        if args.len() != 1 {
            return Err(ParseError::Arity {
                name: name.to_string(),
                expected: 1,
                found: args.len(),
                line: at.line,
                column: at.column,
            });
        }
        Ok(Expr::unary(func, args.pop().unwrap()))
    }

    fn is_value_name(&self, name: &str) -> bool {
        name == "pi" || self.params.contains_key(name) || self.vars.iter().any(|(n, _)| *n == name)
    }

    fn name(&mut self, at: &Token, name: &str) -> Result<Expr, ParseError> {
        if let Some((_, var)) = self.vars.iter().find(|(n, _)| *n == name) {
            return Ok(Expr::Var(*var));
        }
        if self.params.contains_key(name) {
            return Ok(Expr::Param(name.to_string()));
        }
        if name == "pi" {
            return Ok(Expr::Const(PI));
        }
        if UnaryFn::from_name(name).is_some() {
            return Err(ParseError::Arity {
                name: name.to_string(),
                expected: 1,
                found: 0,
                line: at.line,
                column: at.column,
            });
        }
        Err(ParseError::UnknownIdentifier {
            name: name.to_string(),
            line: at.line,
            column: at.column,
        })
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == word => Ok(()),
            other => Err(Self::syntax(
                &t,
                format!("expected `{word}` but found {}", other.describe()),
            )),
        }
    }

    fn constant(&mut self) -> Result<f64, ParseError> {
        let at = self.peek().clone();
        let e = self.expr()?;
        if e.mentions_var() {
            return Err(Self::syntax(&at, "domain bounds must be constant".into()));
        }
        let params = self.params.clone();
        super::eval::eval_expr(&e, 0.0, 0.0, &params)
            .map(|j| j.value)
            .map_err(|err| Self::syntax(&at, err.to_string()))
    }

    fn interval(&mut self, var: &str) -> Result<[f64; 2], ParseError> {
        self.keyword(var)?;
        self.keyword("in")?;
        self.expect(Tok::LBracket)?;
        let a = self.constant()?;
        self.expect(Tok::Comma)?;
        let b = self.constant()?;
        let close = self.expect(Tok::RBracket)?;
        if !(a < b) {
            return Err(Self::syntax(&close, format!("empty interval for `{var}`")));
        }
        Ok([a, b])
    }

    fn domain(&mut self) -> Result<Domain, ParseError> {
        let u = self.interval("u")?;
        self.expect(Tok::Semicolon)?;
        let v = self.interval("v")?;
        if self.peek().tok == Tok::Semicolon {
            self.next();
        }
        Ok(Domain { u, v })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(Self::syntax(
                &t,
                format!("unexpected {} after end of input", t.tok.describe()),
            ))
        }
    }
}

const UV: [(&str, Var); 2] = [("u", Var::U), ("v", Var::V)];

fn parser<'a>(
    text: &str,
    vars: &'a [(&'a str, Var)],
    params: &'a BTreeMap<String, f64>,
) -> Result<Parser<'a>, ParseError> {
    Ok(Parser {
        toks: tokenize(text)?,
        pos: 0,
        vars,
        params,
    })
}

/// Parse `[x, y, z]` in the variables `u`, `v`.
pub fn parse_surface(text: &str, params: &BTreeMap<String, f64>) -> Result<SurfaceAst, ParseError> {
    let mut p = parser(text, &UV, params)?;
    let components = p.surface()?;
    p.finish()?;
    Ok(SurfaceAst {
        components,
        params: params.clone(),
    })
}

/// Parse a surface file: the surface, then an optional domain clause.
pub fn parse_surface_file(
    text: &str,
    params: &BTreeMap<String, f64>,
) -> Result<(SurfaceAst, Option<Domain>), ParseError> {
    let mut p = parser(text, &UV, params)?;
    let components = p.surface()?;
    if p.peek().tok == Tok::Semicolon {
        p.next();
    }
    let domain = if p.peek().tok == Tok::Eof {
        None
    } else {
        Some(p.domain()?)
    };
    p.finish()?;
    Ok((
        SurfaceAst {
            components,
            params: params.clone(),
        },
        domain,
    ))
}

/// Parse a single scalar expression. `vars` maps source names to the
/// surface variables, e.g. `("s", Var::U)` for a curve parameter.
pub fn parse_expr(
    text: &str,
    vars: &[(&str, Var)],
    params: &BTreeMap<String, f64>,
) -> Result<Expr, ParseError> {
    let mut p = parser(text, vars, params)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}
