//! Textual expression syntax.
//!
//! Grammar (whitespace-insensitive except where noted):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'* power
//! power  := atom ('^' exponent)?
//! atom   := integer | ident | ident '[' indices ']'
//!         | 'exp' '(' expr ')' | macro '(' args ')' | '(' expr ')'
//! ```
//!
//! Identifiers: `u`, `Phi`, `phi` (each optionally conjugated, see below),
//! `x0..x3`, `tau`, `m`, `lambda`, `n`, and the imaginary unit `i`.
//! Derivative indices are concrete: digits `0..3` or `t`/`tau` for the
//! reduced time, e.g. `u[0,3]`, `phi[t,1]`.
//!
//! Conjugation is a `*` written immediately after a function name and *not*
//! followed by the start of an operand, so `u*` at the end of a factor,
//! `u*[0]`, `exp(phi*)` and `u**u` (conjugate times u) all parse, while
//! `u*u` stays a product.
//!
//! Exponents are integers or parenthesized rationals: `u^2`, `u^-3`,
//! `(...)^(-3/2)`.
//!
//! Contraction macros expand through the catalog constructors: `S2(phi)`,
//! `S12(phi,phi*)`, `R2(theta,phi)`, `R1(phi+phi*,phi)`, `R3(u,u)`. The
//! first letter fixes the family, the digits fix `j`/`k`; arguments name
//! gradient/Hessian families (`u`, `u*`, `phi`, `phi*`, `theta`, `theta*`,
//! `rho`, `rho*`, or a sum like `phi+phi*`), and the index domain (Greek
//! for wave functions, Latin for reduced ones) follows the arguments.
//!
//! The canonical printer is `Display` on [`Expr`]; `parse(print(e)) == e`
//! for every canonical expression, and `print(parse(s))` normalizes `s`.

use crate::catalog::{self, ContractionDomain};
use crate::expr::{BaseVar, Expr, FunctionId, JetVar, MultiIndex, Param};
use num_rational::Ratio;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("syntax error at column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        column,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    /// Function name with a conjugation mark, e.g. `u*`.
    ConjIdent(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek_byte() {
            let col = self.column();
            match b {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    self.pos += 1;
                    out.push((Tok::Plus, col));
                }
                b'-' => {
                    self.pos += 1;
                    out.push((Tok::Minus, col));
                }
                b'*' => {
                    self.pos += 1;
                    out.push((Tok::Star, col));
                }
                b'/' => {
                    self.pos += 1;
                    out.push((Tok::Slash, col));
                }
                b'^' => {
                    self.pos += 1;
                    out.push((Tok::Caret, col));
                }
                b'(' => {
                    self.pos += 1;
                    out.push((Tok::LParen, col));
                }
                b')' => {
                    self.pos += 1;
                    out.push((Tok::RParen, col));
                }
                b'[' => {
                    self.pos += 1;
                    out.push((Tok::LBracket, col));
                }
                b']' => {
                    self.pos += 1;
                    out.push((Tok::RBracket, col));
                }
                b',' => {
                    self.pos += 1;
                    out.push((Tok::Comma, col));
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    while matches!(self.peek_byte(), Some(b'0'..=b'9')) {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let value: i64 = match text.parse() {
                        Ok(v) => v,
                        Err(_) => return err(col, "integer literal out of range"),
                    };
                    out.push((Tok::Int(value), col));
                }
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                    let start = self.pos;
                    while matches!(
                        self.peek_byte(),
                        Some(b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_')
                    ) {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos])
                        .unwrap()
                        .to_string();
                    // A '*' glued to a function name is a conjugation mark
                    // unless an operand (letter, digit, '(') follows it.
                    let conjugable = matches!(name.as_str(), "u" | "Phi" | "phi" | "theta" | "rho");
                    if conjugable && self.peek_byte() == Some(b'*') {
                        let after = self.src.get(self.pos + 1).copied();
                        let operand_follows = matches!(
                            after,
                            Some(b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_' | b'(')
                        );
                        if !operand_follows {
                            self.pos += 1;
                            out.push((Tok::ConjIdent(name), col));
                            continue;
                        }
                    }
                    out.push((Tok::Ident(name), col));
                }
                other => {
                    return err(col, format!("unexpected character '{}'", other as char));
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, c)| c)
            .unwrap_or(self.end_column)
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            err(self.column(), format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add_ref(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub_ref(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul_ref(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let col = self.column();
                    let divisor = self.factor()?;
                    if divisor.is_zero() {
                        return err(col, "division by zero");
                    }
                    acc = acc.mul_ref(&divisor.inv().map_err(|e| ParseError {
                        column: col,
                        message: e.to_string(),
                    })?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(self.factor()?.neg_ref());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.column();
        let exponent = self.exponent()?;
        base.pow(exponent).map_err(|e| ParseError {
            column: col,
            message: e.to_string(),
        })
    }

    fn exponent(&mut self) -> Result<Ratio<i64>, ParseError> {
        let col = self.column();
        match self.advance() {
            Some(Tok::Int(k)) => Ok(Ratio::from_integer(k)),
            Some(Tok::Minus) => match self.advance() {
                Some(Tok::Int(k)) => Ok(Ratio::from_integer(-k)),
                _ => err(self.column(), "expected integer exponent"),
            },
            Some(Tok::LParen) => {
                let sign = if self.peek() == Some(&Tok::Minus) {
                    self.pos += 1;
                    -1
                } else {
                    1
                };
                let numer = match self.advance() {
                    Some(Tok::Int(k)) => k,
                    _ => return err(self.column(), "expected integer numerator"),
                };
                let denom = if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.advance() {
                        Some(Tok::Int(k)) if k != 0 => k,
                        _ => return err(self.column(), "expected nonzero denominator"),
                    }
                } else {
                    1
                };
                self.expect(Tok::RParen, "')'")?;
                Ok(Ratio::new(sign * numer, denom))
            }
            _ => err(col, "expected exponent"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.column();
        match self.advance() {
            Some(Tok::Int(k)) => Ok(Expr::from_int(k)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.ident(&name, false, col),
            Some(Tok::ConjIdent(name)) => self.ident(&name, true, col),
            Some(other) => err(col, format!("unexpected token {other:?}")),
            None => err(col, "unexpected end of input"),
        }
    }

    fn ident(&mut self, name: &str, conj: bool, col: usize) -> Result<Expr, ParseError> {
        if let Some(function) = function_id(name, conj) {
            let index = if self.peek() == Some(&Tok::LBracket) {
                self.pos += 1;
                let idx = self.indices()?;
                self.expect(Tok::RBracket, "']' or ','")?;
                idx
            } else {
                MultiIndex::empty()
            };
            return Ok(Expr::jet(JetVar::new(function, index)));
        }
        if conj {
            return err(col, format!("'{name}' cannot be conjugated here"));
        }
        match name {
            "x0" => return Ok(Expr::base(BaseVar::X0)),
            "x1" => return Ok(Expr::base(BaseVar::X1)),
            "x2" => return Ok(Expr::base(BaseVar::X2)),
            "x3" => return Ok(Expr::base(BaseVar::X3)),
            "tau" => return Ok(Expr::base(BaseVar::Tau)),
            "m" => return Ok(Expr::param(Param::M)),
            "lambda" => return Ok(Expr::param(Param::Lambda)),
            "n" => return Ok(Expr::param(Param::N)),
            "i" => return Ok(Expr::i()),
            "exp" => {
                self.expect(Tok::LParen, "'('")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                return Ok(Expr::exp_of(&arg));
            }
            _ => {}
        }
        if let Some(kind) = MacroKind::parse(name) {
            return self.contraction(kind, col);
        }
        err(col, format!("unknown identifier '{name}'"))
    }

    fn indices(&mut self) -> Result<MultiIndex, ParseError> {
        let mut idx = MultiIndex::empty();
        loop {
            let col = self.column();
            let var = match self.advance() {
                Some(Tok::Int(0)) => BaseVar::X0,
                Some(Tok::Int(1)) => BaseVar::X1,
                Some(Tok::Int(2)) => BaseVar::X2,
                Some(Tok::Int(3)) => BaseVar::X3,
                Some(Tok::Ident(s)) if s == "t" || s == "tau" => BaseVar::Tau,
                _ => return err(col, "expected a concrete index: 0..3, t, or tau"),
            };
            idx = idx.plus(var);
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(idx);
            }
        }
    }

    fn contraction(&mut self, kind: MacroKind, col: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let first = self.family()?;
        let second = if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            Some(self.family()?)
        } else {
            None
        };
        self.expect(Tok::RParen, "')'")?;
        let greek_any = first.greek() || second.as_ref().map(Family::greek).unwrap_or(false);
        let greek_all = first.greek() && second.as_ref().map(Family::greek).unwrap_or(true);
        if greek_any && !greek_all {
            return err(
                col,
                "cannot mix wave and reduced families in one contraction",
            );
        }
        let dom = if greek_any {
            ContractionDomain::greek()
        } else {
            ContractionDomain::latin()
        };
        match kind {
            MacroKind::S { k } => {
                let t = first.tensor(col)?;
                Ok(catalog::s_k(k, &t, &dom))
            }
            MacroKind::Sjk { j, k } => {
                let second = second.ok_or_else(|| ParseError {
                    column: col,
                    message: "mixed trace needs two tensor arguments".into(),
                })?;
                let t1 = first.tensor(col)?;
                let t2 = second.tensor(col)?;
                Ok(catalog::s_jk(j, k, &t1, &t2, &dom))
            }
            MacroKind::R { k } => {
                let v = first.covector(col)?;
                let t: Tensor = match second {
                    Some(f) => f.tensor(col)?,
                    None => {
                        if k > 1 {
                            return err(col, "chain contraction needs a tensor argument");
                        }
                        // R1 ignores the tensor slot; default to the
                        // family's own Hessian.
                        first.default_tensor(col)?
                    }
                };
                Ok(catalog::r_k(k, &v, &t, &dom))
            }
        }
    }

    fn family(&mut self) -> Result<Family, ParseError> {
        let col = self.column();
        let (name, conj) = match self.advance() {
            Some(Tok::Ident(s)) => (s, false),
            Some(Tok::ConjIdent(s)) => (s, true),
            _ => return err(col, "expected a family name"),
        };
        // `phi+phi*`: the gradient-sum family.
        if !conj && self.peek() == Some(&Tok::Plus) {
            let save = self.pos;
            self.pos += 1;
            if let Some(Tok::ConjIdent(s2)) = self.peek().cloned() {
                if s2 == name {
                    self.pos += 1;
                    return match name.as_str() {
                        "phi" => Ok(Family::GradSum),
                        _ => err(col, "only phi+phi* is a recognized family sum"),
                    };
                }
            }
            self.pos = save;
        }
        match (name.as_str(), conj) {
            ("u", c) => Ok(Family::Wave(if c {
                FunctionId::UStar
            } else {
                FunctionId::U
            })),
            ("phi", c) => Ok(Family::Plane(if c {
                FunctionId::PhiStar
            } else {
                FunctionId::Phi
            })),
            ("theta", c) => Ok(Family::Theta { conj: c }),
            ("rho", c) => Ok(Family::Rho { conj: c }),
            _ => err(col, format!("unknown family '{name}'")),
        }
    }
}

enum MacroKind {
    S { k: usize },
    Sjk { j: usize, k: usize },
    R { k: usize },
}

impl MacroKind {
    fn parse(name: &str) -> Option<MacroKind> {
        let bytes = name.as_bytes();
        match bytes {
            [b'S', k @ b'1'..=b'4'] => Some(MacroKind::S {
                k: (k - b'0') as usize,
            }),
            [b'S', j @ b'0'..=b'4', k @ b'1'..=b'4'] if j <= k => Some(MacroKind::Sjk {
                j: (j - b'0') as usize,
                k: (k - b'0') as usize,
            }),
            [b'R', k @ b'1'..=b'4'] => Some(MacroKind::R {
                k: (k - b'0') as usize,
            }),
            _ => None,
        }
    }
}

/// A gradient/Hessian family referenced by a contraction macro.
enum Family {
    Wave(FunctionId),
    Plane(FunctionId),
    Theta { conj: bool },
    Rho { conj: bool },
    GradSum,
}

type Tensor = Box<dyn Fn(BaseVar, BaseVar) -> Expr>;
type Covector = Box<dyn Fn(BaseVar) -> Expr>;

impl Family {
    fn greek(&self) -> bool {
        matches!(self, Family::Wave(_))
    }

    fn tensor(&self, col: usize) -> Result<Tensor, ParseError> {
        match self {
            Family::Wave(f) | Family::Plane(f) => {
                let f = *f;
                Ok(Box::new(move |a, b| Expr::deriv(f, &[a, b])))
            }
            Family::Rho { conj } => {
                let conj = *conj;
                Ok(Box::new(move |a, b| {
                    let r = catalog::rho_ab(a, b, 2);
                    if conj {
                        r.conjugate()
                    } else {
                        r
                    }
                }))
            }
            Family::Theta { .. } => err(col, "theta is a covector, not a tensor"),
            Family::GradSum => err(col, "phi+phi* is a covector, not a tensor"),
        }
    }

    fn default_tensor(&self, col: usize) -> Result<Tensor, ParseError> {
        match self {
            Family::Wave(_) => Ok(Box::new(|a, b| Expr::deriv(FunctionId::U, &[a, b]))),
            Family::Plane(_) | Family::GradSum | Family::Theta { .. } => {
                Ok(Box::new(|a, b| Expr::deriv(FunctionId::Phi, &[a, b])))
            }
            Family::Rho { .. } => self.tensor(col),
        }
    }

    fn covector(&self, col: usize) -> Result<Covector, ParseError> {
        match self {
            Family::Wave(f) | Family::Plane(f) => {
                let f = *f;
                Ok(Box::new(move |a| Expr::deriv(f, &[a])))
            }
            Family::Theta { conj } => {
                let conj = *conj;
                Ok(Box::new(move |a| {
                    let t = catalog::theta(a);
                    if conj {
                        t.conjugate()
                    } else {
                        t
                    }
                }))
            }
            Family::Rho { conj } => {
                let conj = *conj;
                Ok(Box::new(move |a| {
                    let r = catalog::rho_a(a);
                    if conj {
                        r.conjugate()
                    } else {
                        r
                    }
                }))
            }
            Family::GradSum => {
                let _ = col;
                Ok(Box::new(move |a| {
                    Expr::deriv(FunctionId::Phi, &[a])
                        .add_ref(&Expr::deriv(FunctionId::PhiStar, &[a]))
                }))
            }
        }
    }
}

fn function_id(name: &str, conj: bool) -> Option<FunctionId> {
    let f = match name {
        "u" => FunctionId::U,
        "Phi" => FunctionId::CapPhi,
        "phi" => FunctionId::Phi,
        _ => return None,
    };
    Some(if conj { f.conjugate() } else { f })
}

/// Parse a textual expression into canonical form.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let end_column = text.chars().count() + 1;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end_column,
    };
    let e = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return err(parser.column(), "unexpected trailing input");
    }
    Ok(e)
}

/// Canonical text of an expression; inverse of [`parse`] on canonical forms.
pub fn print(e: &Expr) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::coeff::GaussRat;

    #[test]
    fn parses_the_side_condition() {
        let parsed = parse("u[0] + u[3] + i*m*u").unwrap();
        assert_eq!(parsed, catalog::condition());
    }

    #[test]
    fn exp_product_merges() {
        let parsed = parse("exp(phi)*exp(phi*)").unwrap();
        let expected =
            Expr::exp_of(&Expr::func(FunctionId::Phi).add_ref(&Expr::func(FunctionId::PhiStar)));
        assert_eq!(parsed, expected);
    }

    #[test]
    fn error_position() {
        let e = parse("u[0,0").unwrap_err();
        assert_eq!(e.column, 6);
        let e = parse("u[0] + (u").unwrap_err();
        assert_eq!(e.column, 10);
        let e = parse("q + 1").unwrap_err();
        assert_eq!(e.column, 1);
    }

    #[test]
    fn conjugate_lexing() {
        assert_eq!(parse("u*").unwrap(), Expr::func(FunctionId::UStar));
        assert_eq!(
            parse("u*[0,3]").unwrap(),
            Expr::deriv(FunctionId::UStar, &[BaseVar::X0, BaseVar::X3])
        );
        // adjacent star followed by an operand is multiplication
        assert_eq!(
            parse("u*u").unwrap(),
            Expr::func(FunctionId::U).pow_int(2).unwrap()
        );
        // conjugate times u
        assert_eq!(
            parse("u**u").unwrap(),
            Expr::func(FunctionId::UStar).mul_ref(&Expr::func(FunctionId::U))
        );
    }

    #[test]
    fn division_and_powers() {
        let parsed = parse("3/2*u^2").unwrap();
        let expected = Expr::func(FunctionId::U)
            .pow_int(2)
            .unwrap()
            .scale(&GaussRat::from_ratio(3, 2));
        assert_eq!(parsed, expected);
        let parsed = parse("u^-3").unwrap();
        assert_eq!(parsed, Expr::func(FunctionId::U).pow_int(-3).unwrap());
        let n1_parsed = parse("(2*i*m*phi[t] + S1(phi) + R1(phi))^(-3/2)").unwrap();
        assert_eq!(n1_parsed, catalog::n1().pow(Ratio::new(-3, 2)).unwrap());
    }

    #[test]
    fn contraction_macros() {
        assert_eq!(
            parse("S2(phi,phi)").unwrap(),
            catalog::s_k(
                2,
                &|a, b| Expr::deriv(FunctionId::Phi, &[a, b]),
                &ContractionDomain::latin()
            )
        );
        // R1 over the wave gradient uses the derivative metric
        let r1 = parse("R1(u)").unwrap();
        assert_eq!(
            r1,
            catalog::r_k(
                1,
                &catalog::wave_grad(FunctionId::U),
                &catalog::wave_hess(FunctionId::U),
                &ContractionDomain::greek()
            )
        );
        let r2 = parse("R2(theta, phi)").unwrap();
        assert_eq!(
            r2,
            catalog::r_k(
                2,
                &catalog::theta,
                &|a, b| Expr::deriv(FunctionId::Phi, &[a, b]),
                &ContractionDomain::latin()
            )
        );
        assert!(parse("S2(u,phi)").is_err());
        assert!(parse("R2(theta)").is_err());
    }

    #[test]
    fn round_trips_catalog_entries() {
        for entry in catalog::entries(2) {
            let text = print(&entry.expr);
            let back = parse(&text)
                .unwrap_or_else(|e| panic!("failed to reparse {}: {e}\n{text}", entry.name));
            assert_eq!(back, entry.expr, "round trip failed for {}", entry.name);
        }
    }

    #[test]
    fn print_then_parse_normalizes() {
        let raw = parse("u*u - u^2 + phi[1,t]*2").unwrap();
        assert_eq!(
            raw,
            Expr::deriv(FunctionId::Phi, &[BaseVar::X1, BaseVar::Tau])
                .scale(&GaussRat::from_int(2))
        );
    }
}
