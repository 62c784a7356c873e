//! Brute-force XPath evaluator and a generator for random expressions.
//!
//! Axes are decided by testing every node of the document against the axis
//! relation (walking parent links), not by navigating from the context node.
//! Document order is a rank assigned by a separate recursive walk.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xpath_agent::dom::{DomDocument, NodeId, NodeKind};
use xpath_agent::xpath::{
    Axis, CmpOp, Expr, Function, NodeTest, Step, XNode, XPathExpr, XPathResult,
};

const TEXT_HIDING: &[&str] = &["script", "style", "template", "noscript", "head"];

#[derive(Clone, Debug)]
pub enum Val {
    Set(Vec<XNode>),
    Str(String),
    Num(f64),
    Bool(bool),
}

/// Evaluation failed; the library must fail too.
#[derive(Debug, PartialEq)]
pub struct Failed;

pub struct Oracle<'d> {
    doc: &'d DomDocument,
    universe: Vec<XNode>,
    rank: HashMap<XNode, usize>,
}

#[derive(Clone, Copy)]
struct Ctx {
    node: XNode,
    pos: usize,
    size: usize,
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn to_number(s: &str) -> f64 {
    let t = s.trim();
    let digits = t.strip_prefix('-').unwrap_or(t);
    let mut parts = digits.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    let all_digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    let ok = all_digits(int)
        && frac.is_none_or(all_digits)
        && (!int.is_empty() || frac.is_some_and(|f| !f.is_empty()));
    if ok {
        t.parse().unwrap_or(f64::NAN)
    } else {
        f64::NAN
    }
}

fn num_to_string(n: f64) -> String {
    if n.is_nan() {
        "NaN".into()
    } else if n == f64::INFINITY {
        "Infinity".into()
    } else if n == f64::NEG_INFINITY {
        "-Infinity".into()
    } else if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        n.to_string()
    }
}

impl<'d> Oracle<'d> {
    pub fn new(doc: &'d DomDocument) -> Self {
        fn walk(doc: &DomDocument, id: NodeId, out: &mut Vec<XNode>) {
            out.push(XNode::Node(id));
            if let Some(e) = doc.element(id) {
                out.extend((0..e.attrs.len()).map(|i| XNode::Attr(id, i)));
            }
            for &c in doc.children(id) {
                walk(doc, c, out);
            }
        }
        let mut universe = Vec::new();
        walk(doc, doc.document_node(), &mut universe);
        let rank = universe.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        Oracle {
            doc,
            universe,
            rank,
        }
    }

    pub fn evaluate(&self, e: &XPathExpr) -> Result<XPathResult, Failed> {
        let c = Ctx {
            node: XNode::Node(self.doc.document_node()),
            pos: 1,
            size: 1,
        };
        Ok(match self.eval(&e.ast, c)? {
            Val::Set(s) => XPathResult::NodeSet(s),
            Val::Str(s) => XPathResult::String(s),
            Val::Num(n) => XPathResult::Number(n),
            Val::Bool(b) => XPathResult::Boolean(b),
        })
    }

    fn parent_of(&self, n: XNode) -> Option<XNode> {
        match n {
            XNode::Node(id) => self.doc.parent(id).map(XNode::Node),
            XNode::Attr(owner, _) => Some(XNode::Node(owner)),
        }
    }

    fn is_proper_ancestor(&self, a: XNode, n: XNode) -> bool {
        let mut cur = self.parent_of(n);
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.parent_of(p);
        }
        false
    }

    fn on_axis(&self, axis: Axis, c: XNode, m: XNode) -> bool {
        let is_node = |x: XNode| matches!(x, XNode::Node(_));
        match axis {
            Axis::SelfAxis => m == c,
            Axis::Child => is_node(m) && self.parent_of(m) == Some(c),
            Axis::Descendant => is_node(m) && self.is_proper_ancestor(c, m),
            Axis::DescendantOrSelf => m == c || (is_node(m) && self.is_proper_ancestor(c, m)),
            Axis::Parent => self.parent_of(c) == Some(m),
            Axis::Ancestor => self.is_proper_ancestor(m, c),
            Axis::AncestorOrSelf => m == c || self.is_proper_ancestor(m, c),
            Axis::FollowingSibling | Axis::PrecedingSibling => {
                if !is_node(c) || !is_node(m) || m == c {
                    return false;
                }
                let same_parent =
                    self.parent_of(c).is_some() && self.parent_of(c) == self.parent_of(m);
                let after = self.rank[&m] > self.rank[&c];
                same_parent && (after == (axis == Axis::FollowingSibling))
            }
            Axis::Attribute => matches!((c, m), (XNode::Node(o), XNode::Attr(a, _)) if o == a),
        }
    }

    fn passes(&self, axis: Axis, test: &NodeTest, m: XNode) -> bool {
        match m {
            XNode::Attr(owner, i) => {
                let name = &self.doc.element(owner).unwrap().attrs[i].0;
                match test {
                    NodeTest::Node => true,
                    NodeTest::Wildcard => axis == Axis::Attribute,
                    NodeTest::Name(n) => axis == Axis::Attribute && n == name,
                    NodeTest::Text | NodeTest::Comment => false,
                }
            }
            XNode::Node(id) => match (test, self.doc.kind(id)) {
                _ if axis == Axis::Attribute => false,
                (NodeTest::Node, _) => true,
                (NodeTest::Text, NodeKind::Text(_)) => true,
                (NodeTest::Comment, NodeKind::Comment(_)) => true,
                (NodeTest::Wildcard, NodeKind::Element(_)) => true,
                (NodeTest::Name(n), NodeKind::Element(e)) => *n == e.tag,
                _ => false,
            },
        }
    }

    fn step(&self, ctx: &[XNode], step: &Step) -> Result<Vec<XNode>, Failed> {
        let mut hits: Vec<XNode> = Vec::new();
        for &c in ctx {
            let mut cands: Vec<XNode> = self
                .universe
                .iter()
                .copied()
                .filter(|&m| self.on_axis(step.axis, c, m) && self.passes(step.axis, &step.test, m))
                .collect();
            let reverse = matches!(
                step.axis,
                Axis::Parent | Axis::Ancestor | Axis::AncestorOrSelf | Axis::PrecedingSibling
            );
            if reverse {
                cands.reverse();
            }
            for p in &step.predicates {
                cands = self.predicate(cands, p)?;
            }
            for n in cands {
                if !hits.contains(&n) {
                    hits.push(n);
                }
            }
        }
        hits.sort_by_key(|n| self.rank[n]);
        Ok(hits)
    }

    fn predicate(&self, nodes: Vec<XNode>, p: &Expr) -> Result<Vec<XNode>, Failed> {
        let size = nodes.len();
        let mut out = Vec::new();
        for (i, n) in nodes.into_iter().enumerate() {
            let keep = match self.eval(
                p,
                Ctx {
                    node: n,
                    pos: i + 1,
                    size,
                },
            )? {
                Val::Num(x) => x == (i + 1) as f64,
                v => self.truthy(&v),
            };
            if keep {
                out.push(n);
            }
        }
        Ok(out)
    }

    pub fn string_value(&self, n: XNode) -> String {
        fn visible(doc: &DomDocument, id: NodeId, out: &mut String) {
            match doc.kind(id) {
                NodeKind::Text(t) => out.push_str(t),
                NodeKind::Comment(_) => {}
                NodeKind::Element(e) if TEXT_HIDING.contains(&e.tag.as_str()) => {}
                _ => {
                    for &c in doc.children(id) {
                        visible(doc, c, out);
                    }
                }
            }
        }
        match n {
            XNode::Attr(o, i) => self.doc.element(o).unwrap().attrs[i].1.clone(),
            XNode::Node(id) => match self.doc.kind(id) {
                NodeKind::Text(t) | NodeKind::Comment(t) => t.clone(),
                _ => {
                    let mut s = String::new();
                    visible(self.doc, id, &mut s);
                    squash(&s)
                }
            },
        }
    }

    fn text_of(&self, v: &Val) -> String {
        match v {
            Val::Set(s) => s.first().map(|&n| self.string_value(n)).unwrap_or_default(),
            Val::Str(s) => s.clone(),
            Val::Num(n) => num_to_string(*n),
            Val::Bool(b) => {
                if *b {
                    "true".into()
                } else {
                    "false".into()
                }
            }
        }
    }

    fn number_of(&self, v: &Val) -> f64 {
        match v {
            Val::Num(n) => *n,
            Val::Bool(b) => {
                if *b {
                    1.0
                } else {
                    0.0
                }
            }
            _ => to_number(&self.text_of(v)),
        }
    }

    fn truthy(&self, v: &Val) -> bool {
        match v {
            Val::Set(s) => !s.is_empty(),
            Val::Str(s) => !s.is_empty(),
            Val::Num(n) => !(n.is_nan() || *n == 0.0),
            Val::Bool(b) => *b,
        }
    }

    fn one_string(&self, v: &Val) -> Result<String, Failed> {
        match v {
            Val::Set(s) if s.len() > 1 => Err(Failed),
            _ => Ok(self.text_of(v)),
        }
    }

    /// Compares two non-set values per the XPath 1.0 conversion rules.
    fn scalar_cmp(&self, op: CmpOp, a: &Val, b: &Val) -> bool {
        let ord = |x: f64, y: f64| match op {
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
        };
        match op {
            CmpOp::Eq | CmpOp::Ne => {
                let equal = if matches!(a, Val::Bool(_)) || matches!(b, Val::Bool(_)) {
                    self.truthy(a) == self.truthy(b)
                } else if matches!(a, Val::Num(_)) || matches!(b, Val::Num(_)) {
                    self.number_of(a) == self.number_of(b)
                } else {
                    self.text_of(a) == self.text_of(b)
                };
                equal == (op == CmpOp::Eq)
            }
            _ => ord(self.number_of(a), self.number_of(b)),
        }
    }

    fn compare(&self, op: CmpOp, a: &Val, b: &Val) -> bool {
        let strs = |s: &[XNode]| {
            s.iter()
                .map(|&n| Val::Str(self.string_value(n)))
                .collect::<Vec<_>>()
        };
        match (a, b) {
            (Val::Set(x), Val::Set(y)) => {
                let (xs, ys) = (strs(x), strs(y));
                xs.iter()
                    .any(|p| ys.iter().any(|q| self.scalar_cmp(op, p, q)))
            }
            (Val::Set(x), Val::Bool(_)) => self.scalar_cmp(op, &Val::Bool(!x.is_empty()), b),
            (Val::Bool(_), Val::Set(y)) => self.scalar_cmp(op, a, &Val::Bool(!y.is_empty())),
            (Val::Set(x), Val::Num(_)) => strs(x)
                .iter()
                .any(|p| self.scalar_cmp(op, &Val::Num(self.number_of(p)), b)),
            (Val::Num(_), Val::Set(y)) => strs(y)
                .iter()
                .any(|q| self.scalar_cmp(op, a, &Val::Num(self.number_of(q)))),
            (Val::Set(x), _) => strs(x).iter().any(|p| self.scalar_cmp(op, p, b)),
            (_, Val::Set(y)) => strs(y).iter().any(|q| self.scalar_cmp(op, a, q)),
            _ => self.scalar_cmp(op, a, b),
        }
    }

    fn eval(&self, e: &Expr, c: Ctx) -> Result<Val, Failed> {
        Ok(match e {
            Expr::Or(a, b) => {
                let l = self.eval(a, c)?;
                Val::Bool(self.truthy(&l) || self.truthy(&self.eval(b, c)?))
            }
            Expr::And(a, b) => {
                let l = self.eval(a, c)?;
                Val::Bool(self.truthy(&l) && self.truthy(&self.eval(b, c)?))
            }
            Expr::Compare(op, a, b) => {
                let (l, r) = (self.eval(a, c)?, self.eval(b, c)?);
                Val::Bool(self.compare(*op, &l, &r))
            }
            Expr::Union(a, b) => match (self.eval(a, c)?, self.eval(b, c)?) {
                (Val::Set(mut l), Val::Set(r)) => {
                    l.extend(r.into_iter());
                    l.sort_by_key(|n| self.rank[n]);
                    l.dedup();
                    Val::Set(l)
                }
                _ => return Err(Failed),
            },
            Expr::Path(p) => {
                let start = if p.absolute {
                    XNode::Node(self.doc.document_node())
                } else {
                    c.node
                };
                let mut set = vec![start];
                for s in &p.steps {
                    set = self.step(&set, s)?;
                }
                Val::Set(set)
            }
            Expr::Filter {
                primary,
                predicates,
                steps,
            } => {
                let Val::Set(mut set) = self.eval(primary, c)? else {
                    return Err(Failed);
                };
                for p in predicates {
                    set = self.predicate(set, p)?;
                }
                for s in steps {
                    set = self.step(&set, s)?;
                }
                Val::Set(set)
            }
            Expr::Literal(s) => Val::Str(s.clone()),
            Expr::Number(n) => Val::Num(*n),
            Expr::Call(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, c))
                    .collect::<Result<Vec<_>, _>>()?;
                let s = |i: usize| self.text_of(&vals[i]);
                match f {
                    Function::Position => Val::Num(c.pos as f64),
                    Function::Last => Val::Num(c.size as f64),
                    Function::Not => Val::Bool(!self.truthy(&vals[0])),
                    Function::Contains => Val::Bool(s(0).contains(&s(1))),
                    Function::StartsWith => Val::Bool(s(0).starts_with(&s(1))),
                    Function::EndsWith => Val::Bool(s(0).ends_with(&s(1))),
                    Function::SubstringBefore | Function::SubstringAfter => {
                        let hay = self.one_string(&vals[0])?;
                        let needle = self.one_string(&vals[1])?;
                        Val::Str(match hay.split_once(needle.as_str()) {
                            Some((before, after)) => {
                                if *f == Function::SubstringBefore {
                                    before.to_string()
                                } else {
                                    after.to_string()
                                }
                            }
                            None => String::new(),
                        })
                    }
                    Function::NormalizeSpace => match vals.first() {
                        Some(v) => Val::Str(squash(&self.one_string(v)?)),
                        None => Val::Str(squash(&self.string_value(c.node))),
                    },
                }
            }
        })
    }
}

/// Results agree when node-sets are identical and scalars are equal (NaN equals NaN).
pub fn same_result(a: &XPathResult, b: &XPathResult) -> bool {
    match (a, b) {
        (XPathResult::Number(x), XPathResult::Number(y)) => x == y || (x.is_nan() && y.is_nan()),
        _ => a == b,
    }
}

const TAGS: &[&str] = &["div", "p", "span", "a", "b", "li", "*"];
const LITERALS: &[&str] = &["a", "b", "ab", "Price", "5", " ", "x y", "12", ":"];
const FORWARD: &[&str] = &[
    "",
    "",
    "",
    "child::",
    "descendant::",
    "descendant-or-self::",
    "self::",
    "following-sibling::",
];
const REVERSE: &[&str] = &[
    "parent::",
    "ancestor::",
    "ancestor-or-self::",
    "preceding-sibling::",
];
const CMP: &[&str] = &["=", "!=", "<", "<=", ">", ">="];

/// Random expressions in the supported dialect with nesting depth at most `depth`.
pub struct ExprGen {
    rng: ChaCha8Rng,
}

impl ExprGen {
    pub fn new(seed: u64) -> Self {
        ExprGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs[self.rng.random_range(0..xs.len())]
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn literal(&mut self) -> String {
        format!("'{}'", self.pick(LITERALS))
    }

    fn step(&mut self, depth: u32) -> String {
        let mut s = match self.rng.random_range(0..10) {
            0 => return "..".into(),
            1 => return ".".into(),
            2 => format!("@{}", self.pick(&["id", "class", "*"])),
            3 => format!("{}{}", self.pick(REVERSE), self.pick(TAGS)),
            4 => format!("{}{}", self.pick(FORWARD), self.pick(&["text()", "node()"])),
            _ => format!("{}{}", self.pick(FORWARD), self.pick(TAGS)),
        };
        if depth > 0 {
            let n = match self.rng.random_range(0..20) {
                0..11 => 0,
                11..18 => 1,
                _ => 2,
            };
            for _ in 0..n {
                let p = self.predicate(depth - 1);
                s.push_str(&format!("[{p}]"));
            }
        }
        s
    }

    pub fn path(&mut self, depth: u32, absolute: bool) -> String {
        let steps = self.rng.random_range(1..4);
        let mut s = String::new();
        for i in 0..steps {
            if i > 0 || absolute {
                // a leading `/` mostly selects nothing below the document node
                let deep = if i == 0 { 0.8 } else { 0.4 };
                s.push_str(if self.chance(deep) { "//" } else { "/" });
            }
            s.push_str(&self.step(depth));
        }
        s
    }

    fn string_expr(&mut self, depth: u32) -> String {
        match self.rng.random_range(0..6) {
            0 => ".".into(),
            1 => "text()".into(),
            2 => self.literal(),
            3 if depth > 0 => format!("normalize-space({})", self.string_expr(depth - 1)),
            4 if depth > 0 => format!(
                "{}({}, {})",
                self.pick(&["substring-before", "substring-after"]),
                self.string_expr(depth - 1),
                self.literal()
            ),
            _ => self.path(depth.saturating_sub(1), false),
        }
    }

    pub fn predicate(&mut self, depth: u32) -> String {
        match self.rng.random_range(0..9) {
            0 => format!("{}", self.rng.random_range(1..4)),
            1 => "last()".into(),
            2 => format!(
                "position() {} {}",
                self.pick(CMP),
                self.rng.random_range(1..4)
            ),
            3 | 4 => format!(
                "{}({}, {})",
                self.pick(&["contains", "starts-with", "ends-with"]),
                self.string_expr(depth),
                self.literal()
            ),
            5 => {
                let rhs = if self.chance(0.5) {
                    self.literal()
                } else {
                    format!("{}", self.rng.random_range(1..13))
                };
                format!("{} {} {}", self.string_expr(depth), self.pick(CMP), rhs)
            }
            6 if depth > 0 => format!("not({})", self.predicate(depth - 1)),
            7 if depth > 0 => format!(
                "{} {} {}",
                self.predicate(depth - 1),
                self.pick(&["and", "or"]),
                self.predicate(depth - 1)
            ),
            _ => self.path(depth.saturating_sub(1), false),
        }
    }

    /// A top-level expression: mostly paths, sometimes unions, filters or string functions.
    pub fn expr(&mut self, depth: u32) -> String {
        match self.rng.random_range(0..10) {
            0 => format!(
                "{} | {}",
                self.path(depth - 1, true),
                self.path(depth - 1, true)
            ),
            1 => format!(
                "({})[{}]",
                self.path(depth - 1, true),
                self.predicate(depth - 1)
            ),
            2 => format!(
                "{}({}, {})",
                self.pick(&["substring-before", "substring-after"]),
                self.path(depth - 1, true),
                self.literal()
            ),
            3 => format!("normalize-space({})", self.path(depth - 1, true)),
            4 => format!(
                "contains({}, {})",
                self.path(depth - 1, true),
                self.literal()
            ),
            _ => self.path(depth - 1, true),
        }
    }
}
