//! Filter-expression syntax tree.

use std::fmt;

/// One step of a document path: an object key (including prefixed keys
/// like `flux:parameters`) or the `[*]` array wildcard, which matches any
/// element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathSegment {
    Key(String),
    Wildcard,
}

/// A dot-separated path into a compacted provenance document, e.g.
/// `annotations[*].class` or `flux:parameters.steps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub segments: Vec<PathSegment>,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for segment in &self.segments {
            match segment {
                PathSegment::Key(key) => {
                    if !first {
                        f.write_str(".")?;
                    }
                    f.write_str(key)?;
                }
                PathSegment::Wildcard => f.write_str("[*]")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Contains,
}

impl CompareOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Contains => "contains",
        }
    }

    /// Ordering operators require numeric or timestamp literals.
    pub fn is_ordering(self) -> bool {
        matches!(self, CompareOp::Lt | CompareOp::Le | CompareOp::Gt | CompareOp::Ge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    Bool(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Literal::Num(n) => write!(f, "{n}"),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A parsed filter expression. `Or`/`And` are n-ary; precedence from
/// loosest to tightest is `or`, `and`, `not`, comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryExpr {
    Or(Vec<QueryExpr>),
    And(Vec<QueryExpr>),
    Not(Box<QueryExpr>),
    Compare {
        path: Path,
        op: CompareOp,
        literal: Literal,
    },
    Exists(Path),
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn needs_parens(child: &QueryExpr, parent_is_and: bool) -> bool {
            match child {
                QueryExpr::Or(_) => true,
                QueryExpr::And(_) => parent_is_and,
                _ => false,
            }
        }
        fn write_child(
            child: &QueryExpr,
            parent_is_and: bool,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            if needs_parens(child, parent_is_and) {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }
        match self {
            QueryExpr::Or(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" or ")?;
                    }
                    write_child(item, false, f)?;
                }
                Ok(())
            }
            QueryExpr::And(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    write_child(item, true, f)?;
                }
                Ok(())
            }
            QueryExpr::Not(inner) => match inner.as_ref() {
                QueryExpr::Or(_) | QueryExpr::And(_) => write!(f, "not ({inner})"),
                inner => write!(f, "not {inner}"),
            },
            QueryExpr::Compare { path, op, literal } => {
                write!(f, "{path} {} {literal}", op.as_str())
            }
            QueryExpr::Exists(path) => write!(f, "exists({path})"),
        }
    }
}
