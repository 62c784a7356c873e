//! Tokenizer and recursive-descent parser for the supported XPath subset.

use super::ast::{Axis, CmpOp, Expr, Function, LocationPath, NodeTest, Step, XPathExpr};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("syntax error at position {position}: {message}")]
pub struct SyntaxError {
    /// 0-based character offset into the expression.
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Slash,
    DoubleSlash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    DotDot,
    At,
    Comma,
    ColonColon,
    Pipe,
    Cmp(CmpOp),
    Star,
    Literal(String),
    Number(f64),
    Name(String),
    Dollar,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn err(position: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        position,
        message: message.into(),
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let next = chars.get(i + 1).copied();
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '/' if next == Some('/') => {
                i += 2;
                Tok::DoubleSlash
            }
            '/' => {
                i += 1;
                Tok::Slash
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            '.' if next == Some('.') => {
                i += 2;
                Tok::DotDot
            }
            '.' if next.is_some_and(|n| n.is_ascii_digit()) => {
                let (n, len) = scan_number(&chars[i..]);
                i += len;
                Tok::Number(n)
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            '@' => {
                i += 1;
                Tok::At
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            ':' if next == Some(':') => {
                i += 2;
                Tok::ColonColon
            }
            '|' => {
                i += 1;
                Tok::Pipe
            }
            '=' => {
                i += 1;
                Tok::Cmp(CmpOp::Eq)
            }
            '!' if next == Some('=') => {
                i += 2;
                Tok::Cmp(CmpOp::Ne)
            }
            '<' if next == Some('=') => {
                i += 2;
                Tok::Cmp(CmpOp::Le)
            }
            '<' => {
                i += 1;
                Tok::Cmp(CmpOp::Lt)
            }
            '>' if next == Some('=') => {
                i += 2;
                Tok::Cmp(CmpOp::Ge)
            }
            '>' => {
                i += 1;
                Tok::Cmp(CmpOp::Gt)
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '$' => {
                i += 1;
                Tok::Dollar
            }
            '"' | '\'' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&q| q == c)
                    .ok_or_else(|| err(start, "unterminated string literal"))?;
                let s: String = chars[i + 1..i + 1 + close].iter().collect();
                i += close + 2;
                Tok::Literal(s)
            }
            c if c.is_ascii_digit() => {
                let (n, len) = scan_number(&chars[i..]);
                i += len;
                Tok::Number(n)
            }
            c if is_name_start(c) => {
                let mut j = i + 1;
                while j < chars.len() && is_name_char(chars[j]) {
                    j += 1;
                }
                // QName prefix, but never swallow an axis separator
                if j + 1 < chars.len()
                    && chars[j] == ':'
                    && chars[j + 1] != ':'
                    && is_name_start(chars[j + 1])
                {
                    j += 1;
                    while j < chars.len() && is_name_char(chars[j]) {
                        j += 1;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                i = j;
                Tok::Name(s)
            }
            other => return Err(err(start, format!("unexpected character '{other}'"))),
        };
        out.push(Token { tok, pos: start });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: chars.len(),
    });
    Ok(out)
}

fn scan_number(chars: &[char]) -> (f64, usize) {
    let mut j = 0;
    while j < chars.len() && chars[j].is_ascii_digit() {
        j += 1;
    }
    if j < chars.len() && chars[j] == '.' {
        j += 1;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
    }
    let s: String = chars[..j].iter().collect();
    (s.parse().unwrap_or(f64::NAN), j)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

/// Parses an expression of the supported grammar.
///
/// Constructs outside the subset (variables, arithmetic, unknown functions or
/// axes) are rejected here so callers get one crisp failure signal.
pub fn parse_xpath(src: &str) -> Result<XPathExpr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    if p.peek() == &Tok::Eof {
        return Err(err(0, "empty expression"));
    }
    let ast = p.or_expr()?;
    if p.peek() != &Tok::Eof {
        return Err(err(p.pos(), "unexpected trailing input"));
    }
    Ok(XPathExpr { ast })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::Eof {
            Err(err(
                self.pos(),
                format!("unexpected end of expression, expected {what}"),
            ))
        } else {
            Err(err(self.pos(), format!("expected {what}")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn or_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.and_expr()?;
        while self.is_keyword("or") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.equality_expr()?;
        while self.is_keyword("and") {
            self.bump();
            let rhs = self.equality_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn equality_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.relational_expr()?;
        while let Tok::Cmp(op @ (CmpOp::Eq | CmpOp::Ne)) = *self.peek() {
            self.bump();
            let rhs = self.relational_expr()?;
            lhs = Expr::Compare(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn relational_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.union_expr()?;
        while let Tok::Cmp(op @ (CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)) = *self.peek() {
            self.bump();
            let rhs = self.union_expr()?;
            lhs = Expr::Compare(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn union_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.path_expr()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.path_expr()?;
            lhs = Expr::Union(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn starts_filter(&self) -> bool {
        match self.peek() {
            Tok::LParen | Tok::Literal(_) | Tok::Number(_) | Tok::Dollar => true,
            Tok::Name(n) => {
                *self.peek_at(1) == Tok::LParen
                    && !matches!(
                        n.as_str(),
                        "text" | "node" | "comment" | "processing-instruction"
                    )
            }
            _ => false,
        }
    }

    fn path_expr(&mut self) -> Result<Expr, SyntaxError> {
        if self.starts_filter() {
            let primary = self.primary_expr()?;
            let mut predicates = Vec::new();
            while *self.peek() == Tok::LBracket {
                predicates.push(self.predicate()?);
            }
            let mut steps = Vec::new();
            if matches!(self.peek(), Tok::Slash | Tok::DoubleSlash) {
                self.relative_steps_after_separator(&mut steps)?;
            }
            if predicates.is_empty() && steps.is_empty() {
                return Ok(primary);
            }
            return Ok(Expr::Filter {
                primary: Box::new(primary),
                predicates,
                steps,
            });
        }
        self.location_path().map(Expr::Path)
    }

    /// Consumes `(/|//) step` repeatedly.
    fn relative_steps_after_separator(&mut self, steps: &mut Vec<Step>) -> Result<(), SyntaxError> {
        loop {
            match self.peek() {
                Tok::Slash => {
                    self.bump();
                }
                Tok::DoubleSlash => {
                    self.bump();
                    steps.push(descendant_or_self());
                }
                _ => return Ok(()),
            }
            steps.push(self.step()?);
        }
    }

    fn location_path(&mut self) -> Result<LocationPath, SyntaxError> {
        let mut steps = Vec::new();
        let absolute = match self.peek() {
            Tok::Slash => {
                self.bump();
                if !self.starts_step() {
                    return Ok(LocationPath {
                        absolute: true,
                        steps,
                    });
                }
                steps.push(self.step()?);
                true
            }
            Tok::DoubleSlash => {
                self.bump();
                steps.push(descendant_or_self());
                steps.push(self.step()?);
                true
            }
            _ => {
                steps.push(self.step()?);
                false
            }
        };
        self.relative_steps_after_separator(&mut steps)?;
        Ok(LocationPath { absolute, steps })
    }

    fn starts_step(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Dot | Tok::DotDot | Tok::At | Tok::Star | Tok::Name(_)
        )
    }

    fn step(&mut self) -> Result<Step, SyntaxError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Dot => {
                self.bump();
                return self.abbreviated(Axis::SelfAxis);
            }
            Tok::DotDot => {
                self.bump();
                return self.abbreviated(Axis::Parent);
            }
            _ => {}
        }
        let axis = match self.peek().clone() {
            Tok::At => {
                self.bump();
                Axis::Attribute
            }
            Tok::Name(n) if *self.peek_at(1) == Tok::ColonColon => {
                let axis = Axis::from_name(&n)
                    .ok_or_else(|| err(pos, format!("unsupported axis '{n}'")))?;
                self.bump();
                self.bump();
                axis
            }
            _ => Axis::Child,
        };
        let test = self.node_test()?;
        let mut predicates = Vec::new();
        while *self.peek() == Tok::LBracket {
            predicates.push(self.predicate()?);
        }
        Ok(Step {
            axis,
            test,
            predicates,
        })
    }

    fn abbreviated(&mut self, axis: Axis) -> Result<Step, SyntaxError> {
        if *self.peek() == Tok::LBracket {
            return Err(err(
                self.pos(),
                "predicate not allowed after abbreviated step",
            ));
        }
        Ok(Step {
            axis,
            test: NodeTest::Node,
            predicates: Vec::new(),
        })
    }

    fn node_test(&mut self) -> Result<NodeTest, SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Star => Ok(NodeTest::Wildcard),
            Tok::Name(n) => {
                if *self.peek() == Tok::LParen {
                    let test = match n.as_str() {
                        "text" => NodeTest::Text,
                        "node" => NodeTest::Node,
                        "comment" => NodeTest::Comment,
                        _ => return Err(err(pos, format!("unsupported node test '{n}()'"))),
                    };
                    self.bump();
                    self.expect(Tok::RParen, "')'")?;
                    Ok(test)
                } else {
                    Ok(NodeTest::Name(n))
                }
            }
            Tok::Eof => Err(err(
                pos,
                "unexpected end of expression, expected a node test",
            )),
            _ => Err(err(pos, "expected a node test")),
        }
    }

    fn predicate(&mut self) -> Result<Expr, SyntaxError> {
        self.expect(Tok::LBracket, "'['")?;
        if *self.peek() == Tok::Eof {
            return Err(err(self.pos(), "unterminated predicate"));
        }
        let e = self.or_expr()?;
        if *self.peek() == Tok::Eof {
            return Err(err(self.pos(), "unterminated predicate"));
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(e)
    }

    fn primary_expr(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let e = self.or_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Literal(s) => Ok(Expr::Literal(s)),
            Tok::Number(n) => Ok(Expr::Number(n)),
            Tok::Dollar => Err(err(pos, "variables are not supported")),
            Tok::Name(n) => {
                let func = Function::from_name(&n)
                    .ok_or_else(|| err(pos, format!("unsupported function '{n}()'")))?;
                self.expect(Tok::LParen, "'('")?;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.or_expr()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.or_expr()?);
                    }
                }
                self.expect(Tok::RParen, "')'")?;
                let (lo, hi) = func.arity();
                if args.len() < lo || args.len() > hi {
                    return Err(err(
                        pos,
                        format!("{}() takes {lo}..={hi} arguments, got {}", n, args.len()),
                    ));
                }
                Ok(Expr::Call(func, args))
            }
            _ => Err(err(pos, "expected an expression")),
        }
    }
}

fn descendant_or_self() -> Step {
    Step {
        axis: Axis::DescendantOrSelf,
        test: NodeTest::Node,
        predicates: Vec::new(),
    }
}
