use std::cmp::Ordering;

use super::ast::{Axis, CmpOp, Expr, Function, NodeTest, Step, XPathExpr};
use crate::dom::{DomDocument, NodeId, NodeKind};

/// A node in the XPath data model: a tree node or an attribute of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum XNode {
    Node(NodeId),
    /// Element id and attribute index.
    Attr(NodeId, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum XPathResult {
    /// Duplicate-free, in document order.
    NodeSet(Vec<XNode>),
    String(String),
    Number(f64),
    Boolean(bool),
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("{op} expects a node-set operand")]
    NotANodeSet { op: &'static str },
    #[error("{func}() needs a single node but its argument selected {count}")]
    AmbiguousNodeSet { func: &'static str, count: usize },
}

/// Pre-computed document order for one document; reuse it across many evaluations.
pub struct XPathContext<'d> {
    doc: &'d DomDocument,
    order: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Focus {
    node: XNode,
    position: usize,
    size: usize,
}

impl<'d> XPathContext<'d> {
    pub fn new(doc: &'d DomDocument) -> Self {
        let mut order = vec![usize::MAX; doc.capacity()];
        for (i, n) in doc.all_nodes().enumerate() {
            order[n.0] = i;
        }
        XPathContext { doc, order }
    }

    pub fn doc(&self) -> &'d DomDocument {
        self.doc
    }

    /// Evaluates with the document node as context.
    pub fn evaluate(&self, expr: &XPathExpr) -> Result<XPathResult, EvaluationError> {
        let focus = Focus {
            node: XNode::Node(self.doc.document_node()),
            position: 1,
            size: 1,
        };
        Ok(match self.eval(&expr.ast, focus)? {
            Value::Nodes(n) => XPathResult::NodeSet(n),
            Value::Str(s) => XPathResult::String(s),
            Value::Num(n) => XPathResult::Number(n),
            Value::Bool(b) => XPathResult::Boolean(b),
        })
    }

    fn key(&self, n: XNode) -> (usize, usize) {
        match n {
            XNode::Node(id) => (self.order[id.0], 0),
            XNode::Attr(id, i) => (self.order[id.0], i + 1),
        }
    }

    pub fn doc_order(&self, a: XNode, b: XNode) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    fn sort_dedup(&self, nodes: &mut Vec<XNode>) {
        nodes.sort_by_key(|&n| self.key(n));
        nodes.dedup();
    }

    /// XPath string-value. Elements and the document use visible-text semantics.
    pub fn string_value(&self, n: XNode) -> String {
        match n {
            XNode::Attr(id, i) => self
                .doc
                .element(id)
                .map(|e| e.attrs[i].1.clone())
                .unwrap_or_default(),
            XNode::Node(id) => match self.doc.kind(id) {
                NodeKind::Text(t) | NodeKind::Comment(t) => t.clone(),
                NodeKind::Element(_) | NodeKind::Document => self.doc.visible_text(id),
            },
        }
    }

    fn axis_nodes(&self, n: XNode, axis: Axis) -> Vec<XNode> {
        let doc = self.doc;
        let id = match n {
            XNode::Node(id) => id,
            XNode::Attr(owner, _) => {
                return match axis {
                    Axis::SelfAxis | Axis::DescendantOrSelf => vec![n],
                    Axis::Parent => vec![XNode::Node(owner)],
                    Axis::Ancestor => std::iter::once(owner)
                        .chain(doc.ancestors(owner))
                        .map(XNode::Node)
                        .collect(),
                    Axis::AncestorOrSelf => std::iter::once(n)
                        .chain(
                            std::iter::once(owner)
                                .chain(doc.ancestors(owner))
                                .map(XNode::Node),
                        )
                        .collect(),
                    _ => Vec::new(),
                };
            }
        };
        let wrap = XNode::Node;
        match axis {
            Axis::Child => doc.children(id).iter().copied().map(wrap).collect(),
            Axis::Descendant => doc.descendants(id).skip(1).map(wrap).collect(),
            Axis::DescendantOrSelf => doc.descendants(id).map(wrap).collect(),
            Axis::SelfAxis => vec![n],
            Axis::Parent => doc.parent(id).map(wrap).into_iter().collect(),
            Axis::Ancestor => doc.ancestors(id).map(wrap).collect(),
            Axis::AncestorOrSelf => std::iter::once(id)
                .chain(doc.ancestors(id))
                .map(wrap)
                .collect(),
            Axis::FollowingSibling | Axis::PrecedingSibling => {
                let Some(p) = doc.parent(id) else {
                    return Vec::new();
                };
                let sibs = doc.children(p);
                let at = sibs.iter().position(|&s| s == id).unwrap_or(0);
                if axis == Axis::FollowingSibling {
                    sibs[at + 1..].iter().copied().map(wrap).collect()
                } else {
                    sibs[..at].iter().rev().copied().map(wrap).collect()
                }
            }
            Axis::Attribute => match doc.element(id) {
                Some(e) => (0..e.attrs.len()).map(|i| XNode::Attr(id, i)).collect(),
                None => Vec::new(),
            },
        }
    }

    fn test_matches(&self, n: XNode, axis: Axis, test: &NodeTest) -> bool {
        match n {
            XNode::Attr(id, i) => {
                // attributes are only reachable through the attribute or self-like axes
                let name = &self.doc.element(id).expect("attribute owner").attrs[i].0;
                match test {
                    NodeTest::Node => true,
                    NodeTest::Wildcard => axis == Axis::Attribute,
                    NodeTest::Name(want) => axis == Axis::Attribute && want == name,
                    NodeTest::Text | NodeTest::Comment => false,
                }
            }
            XNode::Node(id) => {
                if axis == Axis::Attribute {
                    return false;
                }
                match (test, self.doc.kind(id)) {
                    (NodeTest::Node, _) => true,
                    (NodeTest::Text, NodeKind::Text(_)) => true,
                    (NodeTest::Comment, NodeKind::Comment(_)) => true,
                    (NodeTest::Wildcard, NodeKind::Element(_)) => true,
                    (NodeTest::Name(want), NodeKind::Element(e)) => *want == e.tag,
                    _ => false,
                }
            }
        }
    }

    fn apply_step(&self, ctx: &[XNode], step: &Step) -> Result<Vec<XNode>, EvaluationError> {
        let mut out = Vec::new();
        for &c in ctx {
            let mut cands: Vec<XNode> = self
                .axis_nodes(c, step.axis)
                .into_iter()
                .filter(|&n| self.test_matches(n, step.axis, &step.test))
                .collect();
            for pred in &step.predicates {
                cands = self.filter(cands, pred)?;
            }
            out.extend(cands);
        }
        self.sort_dedup(&mut out);
        Ok(out)
    }

    /// Filters `nodes` (already in proximity order) by one predicate.
    fn filter(&self, nodes: Vec<XNode>, pred: &Expr) -> Result<Vec<XNode>, EvaluationError> {
        let size = nodes.len();
        let mut kept = Vec::with_capacity(size);
        for (i, n) in nodes.into_iter().enumerate() {
            let focus = Focus {
                node: n,
                position: i + 1,
                size,
            };
            let keep = match self.eval(pred, focus)? {
                Value::Num(x) => x == (i + 1) as f64,
                v => self.boolean(&v),
            };
            if keep {
                kept.push(n);
            }
        }
        Ok(kept)
    }

    fn eval(&self, e: &Expr, f: Focus) -> Result<Value, EvaluationError> {
        Ok(match e {
            Expr::Or(a, b) => {
                let l = self.eval(a, f)?;
                Value::Bool(
                    self.boolean(&l) || {
                        let r = self.eval(b, f)?;
                        self.boolean(&r)
                    },
                )
            }
            Expr::And(a, b) => {
                let l = self.eval(a, f)?;
                Value::Bool(
                    self.boolean(&l) && {
                        let r = self.eval(b, f)?;
                        self.boolean(&r)
                    },
                )
            }
            Expr::Compare(op, a, b) => {
                let l = self.eval(a, f)?;
                let r = self.eval(b, f)?;
                Value::Bool(self.compare(*op, &l, &r))
            }
            Expr::Union(a, b) => {
                let (Value::Nodes(mut l), Value::Nodes(r)) = (self.eval(a, f)?, self.eval(b, f)?)
                else {
                    return Err(EvaluationError::NotANodeSet { op: "union" });
                };
                l.extend(r);
                self.sort_dedup(&mut l);
                Value::Nodes(l)
            }
            Expr::Path(p) => {
                let start = if p.absolute {
                    XNode::Node(self.doc.document_node())
                } else {
                    f.node
                };
                let mut set = vec![start];
                for s in &p.steps {
                    set = self.apply_step(&set, s)?;
                }
                Value::Nodes(set)
            }
            Expr::Filter {
                primary,
                predicates,
                steps,
            } => {
                let Value::Nodes(mut set) = self.eval(primary, f)? else {
                    return Err(EvaluationError::NotANodeSet { op: "filter" });
                };
                for p in predicates {
                    set = self.filter(set, p)?;
                }
                for s in steps {
                    set = self.apply_step(&set, s)?;
                }
                Value::Nodes(set)
            }
            Expr::Literal(s) => Value::Str(s.clone()),
            Expr::Number(n) => Value::Num(*n),
            Expr::Call(func, args) => self.call(*func, args, f)?,
        })
    }

    fn call(&self, func: Function, args: &[Expr], f: Focus) -> Result<Value, EvaluationError> {
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.eval(a, f)?);
        }
        Ok(match func {
            Function::Position => Value::Num(f.position as f64),
            Function::Last => Value::Num(f.size as f64),
            Function::Not => Value::Bool(!self.boolean(&vals[0])),
            Function::Contains => {
                Value::Bool(self.string(&vals[0]).contains(&self.string(&vals[1])))
            }
            Function::StartsWith => {
                Value::Bool(self.string(&vals[0]).starts_with(&self.string(&vals[1])))
            }
            Function::EndsWith => {
                Value::Bool(self.string(&vals[0]).ends_with(&self.string(&vals[1])))
            }
            Function::SubstringBefore => {
                let hay = self.single_string(func, &vals[0])?;
                let needle = self.single_string(func, &vals[1])?;
                Value::Str(match hay.find(&needle) {
                    Some(i) => hay[..i].to_string(),
                    None => String::new(),
                })
            }
            Function::SubstringAfter => {
                let hay = self.single_string(func, &vals[0])?;
                let needle = self.single_string(func, &vals[1])?;
                Value::Str(match hay.find(&needle) {
                    Some(i) => hay[i + needle.len()..].to_string(),
                    None => String::new(),
                })
            }
            Function::NormalizeSpace => {
                let s = match vals.first() {
                    Some(v) => self.single_string(func, v)?,
                    None => self.string_value(f.node),
                };
                Value::Str(crate::text::normalize_ws(&s))
            }
        })
    }

    /// String conversion that refuses to pick silently among several nodes.
    fn single_string(&self, func: Function, v: &Value) -> Result<String, EvaluationError> {
        if let Value::Nodes(n) = v {
            if n.len() > 1 {
                return Err(EvaluationError::AmbiguousNodeSet {
                    func: func.name(),
                    count: n.len(),
                });
            }
        }
        Ok(self.string(v))
    }

    fn string(&self, v: &Value) -> String {
        match v {
            Value::Nodes(n) => n.first().map(|&x| self.string_value(x)).unwrap_or_default(),
            Value::Str(s) => s.clone(),
            Value::Num(n) => number_to_string(*n),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn number(&self, v: &Value) -> f64 {
        match v {
            Value::Num(n) => *n,
            Value::Bool(b) => f64::from(u8::from(*b)),
            other => string_to_number(&self.string(other)),
        }
    }

    fn boolean(&self, v: &Value) -> bool {
        match v {
            Value::Nodes(n) => !n.is_empty(),
            Value::Str(s) => !s.is_empty(),
            Value::Num(n) => *n != 0.0 && !n.is_nan(),
            Value::Bool(b) => *b,
        }
    }

    fn compare(&self, op: CmpOp, l: &Value, r: &Value) -> bool {
        match (l, r) {
            (Value::Nodes(a), Value::Nodes(b)) => {
                let bs: Vec<String> = b.iter().map(|&n| self.string_value(n)).collect();
                a.iter().any(|&n| {
                    let s = self.string_value(n);
                    bs.iter()
                        .any(|t| compare_atoms(op, &Atom::Str(&s), &Atom::Str(t)))
                })
            }
            (Value::Nodes(a), other) => self.compare_set_scalar(op, a, other, false),
            (other, Value::Nodes(b)) => self.compare_set_scalar(op, b, other, true),
            _ => compare_atoms(op, &self.atom(l), &self.atom(r)),
        }
    }

    fn compare_set_scalar(&self, op: CmpOp, set: &[XNode], scalar: &Value, flipped: bool) -> bool {
        if let Value::Bool(b) = scalar {
            let sb = !set.is_empty();
            return if flipped {
                compare_atoms(op, &Atom::Bool(*b), &Atom::Bool(sb))
            } else {
                compare_atoms(op, &Atom::Bool(sb), &Atom::Bool(*b))
            };
        }
        let sc = self.atom(scalar);
        set.iter().any(|&n| {
            let s = self.string_value(n);
            let a = match sc {
                Atom::Num(_) => Atom::Num(string_to_number(&s)),
                _ => Atom::Str(&s),
            };
            if flipped {
                compare_atoms(op, &sc, &a)
            } else {
                compare_atoms(op, &a, &sc)
            }
        })
    }

    fn atom<'v>(&self, v: &'v Value) -> Atom<'v> {
        match v {
            Value::Str(s) => Atom::Str(s),
            Value::Num(n) => Atom::Num(*n),
            Value::Bool(b) => Atom::Bool(*b),
            Value::Nodes(_) => Atom::Num(self.number(v)),
        }
    }
}

#[derive(Clone, Debug)]
enum Value {
    Nodes(Vec<XNode>),
    Str(String),
    Num(f64),
    Bool(bool),
}

#[derive(Clone, Copy)]
enum Atom<'a> {
    Str(&'a str),
    Num(f64),
    Bool(bool),
}

fn atom_bool(a: &Atom) -> bool {
    match a {
        Atom::Str(s) => !s.is_empty(),
        Atom::Num(n) => *n != 0.0 && !n.is_nan(),
        Atom::Bool(b) => *b,
    }
}

fn atom_num(a: &Atom) -> f64 {
    match a {
        Atom::Str(s) => string_to_number(s),
        Atom::Num(n) => *n,
        Atom::Bool(b) => f64::from(u8::from(*b)),
    }
}

fn compare_atoms(op: CmpOp, a: &Atom, b: &Atom) -> bool {
    match op {
        CmpOp::Eq | CmpOp::Ne => {
            let eq = match (a, b) {
                (Atom::Bool(_), _) | (_, Atom::Bool(_)) => atom_bool(a) == atom_bool(b),
                (Atom::Num(_), _) | (_, Atom::Num(_)) => atom_num(a) == atom_num(b),
                (Atom::Str(x), Atom::Str(y)) => x == y,
            };
            (op == CmpOp::Eq) == eq
        }
        CmpOp::Lt => atom_num(a) < atom_num(b),
        CmpOp::Le => atom_num(a) <= atom_num(b),
        CmpOp::Gt => atom_num(a) > atom_num(b),
        CmpOp::Ge => atom_num(a) >= atom_num(b),
    }
}

/// XPath `number()` on a string: optional minus, digits, optional fraction; NaN otherwise.
pub fn string_to_number(s: &str) -> f64 {
    let t = s.trim();
    let body = t.strip_prefix('-').unwrap_or(t);
    let valid = !body.is_empty()
        && body.chars().all(|c| c.is_ascii_digit() || c == '.')
        && body.chars().filter(|&c| c == '.').count() <= 1
        && body != ".";
    if valid {
        t.parse().unwrap_or(f64::NAN)
    } else {
        f64::NAN
    }
}

fn number_to_string(n: f64) -> String {
    if n.is_nan() {
        "NaN".into()
    } else if n.is_infinite() {
        if n > 0.0 {
            "Infinity".into()
        } else {
            "-Infinity".into()
        }
    } else if n == n.trunc() && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}
