use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Child,
    Descendant,
    DescendantOrSelf,
    SelfAxis,
    Parent,
    Ancestor,
    AncestorOrSelf,
    FollowingSibling,
    PrecedingSibling,
    Attribute,
}

impl Axis {
    pub const ALL: [Axis; 10] = [
        Axis::Child,
        Axis::Descendant,
        Axis::DescendantOrSelf,
        Axis::SelfAxis,
        Axis::Parent,
        Axis::Ancestor,
        Axis::AncestorOrSelf,
        Axis::FollowingSibling,
        Axis::PrecedingSibling,
        Axis::Attribute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Child => "child",
            Axis::Descendant => "descendant",
            Axis::DescendantOrSelf => "descendant-or-self",
            Axis::SelfAxis => "self",
            Axis::Parent => "parent",
            Axis::Ancestor => "ancestor",
            Axis::AncestorOrSelf => "ancestor-or-self",
            Axis::FollowingSibling => "following-sibling",
            Axis::PrecedingSibling => "preceding-sibling",
            Axis::Attribute => "attribute",
        }
    }

    pub fn from_name(s: &str) -> Option<Axis> {
        Axis::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Reverse axes number their proximity positions from the context node backwards.
    pub fn is_reverse(self) -> bool {
        matches!(
            self,
            Axis::Parent | Axis::Ancestor | Axis::AncestorOrSelf | Axis::PrecedingSibling
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeTest {
    Name(String),
    Wildcard,
    Text,
    Node,
    Comment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    pub predicates: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocationPath {
    pub absolute: bool,
    pub steps: Vec<Step>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// The supported function library.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Function {
    Contains,
    StartsWith,
    EndsWith,
    SubstringBefore,
    SubstringAfter,
    NormalizeSpace,
    Position,
    Last,
    Not,
}

impl Function {
    pub const ALL: [Function; 9] = [
        Function::Contains,
        Function::StartsWith,
        Function::EndsWith,
        Function::SubstringBefore,
        Function::SubstringAfter,
        Function::NormalizeSpace,
        Function::Position,
        Function::Last,
        Function::Not,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Contains => "contains",
            Function::StartsWith => "starts-with",
            Function::EndsWith => "ends-with",
            Function::SubstringBefore => "substring-before",
            Function::SubstringAfter => "substring-after",
            Function::NormalizeSpace => "normalize-space",
            Function::Position => "position",
            Function::Last => "last",
            Function::Not => "not",
        }
    }

    pub fn from_name(s: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Accepted argument counts, inclusive.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Function::Contains
            | Function::StartsWith
            | Function::EndsWith
            | Function::SubstringBefore
            | Function::SubstringAfter => (2, 2),
            Function::NormalizeSpace => (0, 1),
            Function::Position | Function::Last => (0, 0),
            Function::Not => (1, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    Path(LocationPath),
    /// `primary[pred]*` optionally continued by `/steps`.
    Filter {
        primary: Box<Expr>,
        predicates: Vec<Expr>,
        steps: Vec<Step>,
    },
    Literal(String),
    Number(f64),
    Call(Function, Vec<Expr>),
}

/// A parsed, immutable XPath expression.
#[derive(Clone, Debug, PartialEq)]
pub struct XPathExpr {
    pub ast: Expr,
}

impl fmt::Display for XPathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if s.contains('\'') {
        write!(f, "\"{s}\"")
    } else {
        write!(f, "'{s}'")
    }
}

fn write_steps(f: &mut fmt::Formatter<'_>, steps: &[Step], leading_slash: bool) -> fmt::Result {
    for (i, s) in steps.iter().enumerate() {
        if i > 0 || leading_slash {
            f.write_str("/")?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::", self.axis.name())?;
        match &self.test {
            NodeTest::Name(n) => f.write_str(n)?,
            NodeTest::Wildcard => f.write_str("*")?,
            NodeTest::Text => f.write_str("text()")?,
            NodeTest::Node => f.write_str("node()")?,
            NodeTest::Comment => f.write_str("comment()")?,
        }
        for p in &self.predicates {
            write!(f, "[{p}]")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // every compound operand is parenthesized so printing never depends on precedence
        match self {
            Expr::Or(a, b) => write!(f, "({a}) or ({b})"),
            Expr::And(a, b) => write!(f, "({a}) and ({b})"),
            Expr::Compare(op, a, b) => write!(f, "({a}) {} ({b})", op.symbol()),
            Expr::Union(a, b) => write!(f, "({a}) | ({b})"),
            Expr::Path(p) => {
                if p.absolute && p.steps.is_empty() {
                    return f.write_str("/");
                }
                write_steps(f, &p.steps, p.absolute)
            }
            Expr::Filter {
                primary,
                predicates,
                steps,
            } => {
                write!(f, "({primary})")?;
                for p in predicates {
                    write!(f, "[{p}]")?;
                }
                write_steps(f, steps, true)
            }
            Expr::Literal(s) => write_literal(f, s),
            Expr::Number(n) => write!(f, "{n}"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
