//! Boolean expressions over the variables `x1..xN` and their textual grammar.
//!
//! ```text
//! expr  := union
//! union := diff ('|' diff)*
//! diff  := inter ('\' inter)*
//! inter := unary ('&' unary)*
//! unary := '~' unary | atom
//! atom  := VAR | 'X' | 'E' | '(' expr ')'
//! VAR   := 'x' [1-9][0-9]*
//! ```
//!
//! Binary operators are left-associative and whitespace between tokens is
//! ignored. `X` is the universe, `E` the empty element.

use std::fmt;

/// Abstract syntax tree of a Boolean formula. Variables are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Var(u32),
    Universe,
    Empty,
    Union(Box<BoolExpr>, Box<BoolExpr>),
    Inter(Box<BoolExpr>, Box<BoolExpr>),
    Diff(Box<BoolExpr>, Box<BoolExpr>),
    Compl(Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(index: u32) -> Self {
        BoolExpr::Var(index)
    }

    pub fn union(self, rhs: BoolExpr) -> Self {
        BoolExpr::Union(Box::new(self), Box::new(rhs))
    }

    pub fn inter(self, rhs: BoolExpr) -> Self {
        BoolExpr::Inter(Box::new(self), Box::new(rhs))
    }

    pub fn diff(self, rhs: BoolExpr) -> Self {
        BoolExpr::Diff(Box::new(self), Box::new(rhs))
    }

    pub fn compl(self) -> Self {
        BoolExpr::Compl(Box::new(self))
    }

    /// Union of `x1..xn`.
    pub fn union_of(n: u32) -> Self {
        (2..=n).fold(BoolExpr::Var(1), |acc, i| acc.union(BoolExpr::Var(i)))
    }

    /// Intersection of `x1..xn`.
    pub fn inter_of(n: u32) -> Self {
        (2..=n).fold(BoolExpr::Var(1), |acc, i| acc.inter(BoolExpr::Var(i)))
    }

    /// Largest variable index occurring in the expression, 0 if none.
    pub fn max_var(&self) -> u32 {
        match self {
            BoolExpr::Var(i) => *i,
            BoolExpr::Universe | BoolExpr::Empty => 0,
            BoolExpr::Union(a, b) | BoolExpr::Inter(a, b) | BoolExpr::Diff(a, b) => {
                a.max_var().max(b.max_var())
            }
            BoolExpr::Compl(a) => a.max_var(),
        }
    }

    /// Appends every variable occurrence, in left-to-right order.
    pub fn collect_vars(&self, out: &mut Vec<u32>) {
        match self {
            BoolExpr::Var(i) => out.push(*i),
            BoolExpr::Universe | BoolExpr::Empty => {}
            BoolExpr::Union(a, b) | BoolExpr::Inter(a, b) | BoolExpr::Diff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BoolExpr::Compl(a) => a.collect_vars(out),
        }
    }

    /// Node depth; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            BoolExpr::Var(_) | BoolExpr::Universe | BoolExpr::Empty => 1,
            BoolExpr::Union(a, b) | BoolExpr::Inter(a, b) | BoolExpr::Diff(a, b) => {
                1 + a.depth().max(b.depth())
            }
            BoolExpr::Compl(a) => 1 + a.depth(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Union(..) => 1,
            BoolExpr::Diff(..) => 2,
            BoolExpr::Inter(..) => 3,
            BoolExpr::Compl(_) => 4,
            BoolExpr::Var(_) | BoolExpr::Universe | BoolExpr::Empty => 5,
        }
    }
}

/// Renders with the fewest parentheses that still reparse to the same tree.
pub fn format(expr: &BoolExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn write_child(child: &BoolExpr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(child, out);
        out.push(')');
    } else {
        write_expr(child, out);
    }
}

fn write_expr(expr: &BoolExpr, out: &mut String) {
    let prec = expr.precedence();
    match expr {
        BoolExpr::Var(i) => {
            out.push('x');
            out.push_str(&i.to_string());
        }
        BoolExpr::Universe => out.push('X'),
        BoolExpr::Empty => out.push('E'),
        BoolExpr::Compl(a) => {
            out.push('~');
            write_child(a, a.precedence() < prec, out);
        }
        BoolExpr::Union(a, b) | BoolExpr::Inter(a, b) | BoolExpr::Diff(a, b) => {
            let op = match expr {
                BoolExpr::Union(..) => " | ",
                BoolExpr::Inter(..) => " & ",
                _ => " \\ ",
            };
            // left-associative: an equal-precedence right operand needs parens
            write_child(a, a.precedence() < prec, out);
            out.push_str(op);
            write_child(b, b.precedence() <= prec, out);
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self))
    }
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at offset {offset}: {message} (expected {expected})")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Var(u32),
    Universe,
    Empty,
    Union,
    Inter,
    Diff,
    Compl,
    LParen,
    RParen,
    End,
}

fn describe(tok: Tok) -> String {
    match tok {
        Tok::Var(i) => format!("variable x{i}"),
        Tok::Universe => "'X'".into(),
        Tok::Empty => "'E'".into(),
        Tok::Union => "'|'".into(),
        Tok::Inter => "'&'".into(),
        Tok::Diff => "'\\'".into(),
        Tok::Compl => "'~'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'|' => Tok::Union,
            b'&' => Tok::Inter,
            b'\\' => Tok::Diff,
            b'~' => Tok::Compl,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'X' => Tok::Universe,
            b'E' => Tok::Empty,
            b'x' => {
                let digits_start = i + 1;
                let mut j = digits_start;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let digits = &text[digits_start..j];
                if digits.is_empty() || digits.starts_with('0') {
                    return Err(ParseError {
                        offset: start,
                        message: format!("invalid variable '{}'", &text[start..j]),
                        expected: "variable index in 1, 2, 3, ...".into(),
                    });
                }
                let index: u32 = digits.parse().map_err(|_| ParseError {
                    offset: start,
                    message: format!("variable index '{digits}' out of range"),
                    expected: "variable index that fits in 32 bits".into(),
                })?;
                toks.push((Tok::Var(index), start));
                i = j;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    message: format!("unknown token '{ch}'"),
                    expected: "variable, 'X', 'E', '~', '(' or a binary operator".into(),
                });
            }
        };
        toks.push((tok, start));
        i += 1;
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) {
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: format!("unexpected {}", describe(self.peek())),
            expected: expected.into(),
        }
    }

    fn union(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.diff()?;
        while self.peek() == Tok::Union {
            self.bump();
            lhs = lhs.union(self.diff()?);
        }
        Ok(lhs)
    }

    fn diff(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.inter()?;
        while self.peek() == Tok::Diff {
            self.bump();
            lhs = lhs.diff(self.inter()?);
        }
        Ok(lhs)
    }

    fn inter(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Tok::Inter {
            self.bump();
            lhs = lhs.inter(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<BoolExpr, ParseError> {
        if self.peek() == Tok::Compl {
            self.bump();
            return Ok(self.unary()?.compl());
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<BoolExpr, ParseError> {
        const OPERAND: &str = "variable, 'X', 'E', '~' or '('";
        let expr = match self.peek() {
            Tok::Var(i) => BoolExpr::Var(i),
            Tok::Universe => BoolExpr::Universe,
            Tok::Empty => BoolExpr::Empty,
            Tok::LParen => {
                self.bump();
                let inner = self.union()?;
                if self.peek() != Tok::RParen {
                    return Err(self.error("')'"));
                }
                inner
            }
            _ => return Err(self.error(OPERAND)),
        };
        self.bump();
        Ok(expr)
    }
}

/// Parses an expression in the grammar described at module level.
pub fn parse(text: &str) -> Result<BoolExpr, ParseError> {
    let mut parser = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let expr = parser.union()?;
    if parser.peek() != Tok::End {
        return Err(parser.error("binary operator or end of input"));
    }
    Ok(expr)
}

impl std::str::FromStr for BoolExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
