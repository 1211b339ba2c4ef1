use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: String,
    /// Source text of a leaf; `None` for every interior node.
    pub token: Option<String>,
    pub children: Vec<AstNode>,
    /// Byte range `[start, end)` in the source.
    pub span: (usize, usize),
}

impl AstNode {
    pub fn leaf(kind: impl Into<String>, token: impl Into<String>, span: (usize, usize)) -> Self {
        Self { kind: kind.into(), token: Some(token.into()), children: Vec::new(), span }
    }

    pub fn interior(kind: impl Into<String>, span: (usize, usize), children: Vec<AstNode>) -> Self {
        Self { kind: kind.into(), token: None, children, span }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaves in source order.
    pub fn leaves(&self) -> Vec<&AstNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            if n.is_leaf() {
                out.push(n);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Structural equality: kinds, tokens and shape, ignoring spans.
    pub fn same_structure(&self, other: &AstNode) -> bool {
        self.kind == other.kind
            && self.token == other.token
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_structure(b))
    }

    /// Drops interior nodes that ended up without children, bottom-up.
    pub(crate) fn prune(mut self) -> Option<AstNode> {
        if self.token.is_some() {
            return Some(self);
        }
        self.children = std::mem::take(&mut self.children).into_iter().filter_map(AstNode::prune).collect();
        (!self.children.is_empty()).then_some(self)
    }

    /// Checks the leaf/token and span-nesting invariants; returns the first
    /// violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.token.is_some() != self.children.is_empty() {
            return Err(format!("{} at {:?}: token/children mismatch", self.kind, self.span));
        }
        let mut prev_end = self.span.0;
        for c in &self.children {
            if c.span.0 < prev_end || c.span.1 > self.span.1 || c.span.0 > c.span.1 {
                return Err(format!(
                    "{} at {:?}: child {} at {:?} out of order or outside parent",
                    self.kind, self.span, c.kind, c.span
                ));
            }
            prev_end = c.span.1;
            c.check_invariants()?;
        }
        Ok(())
    }
}

impl fmt::Display for AstNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.token {
            Some(t) => write!(f, "{}[{}]", self.kind, t),
            None => {
                write!(f, "({}", self.kind)?;
                for c in &self.children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One parsed method declaration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodAst {
    pub name: String,
    /// Parameter types with whitespace removed, e.g. `["int", "List<String>"]`.
    pub signature: Vec<String>,
    pub root: AstNode,
    pub source_file: String,
}

impl MethodAst {
    /// `(name, parameter types)`, the identity used to pair methods across a
    /// commit.
    pub fn key(&self) -> (String, Vec<String>) {
        (self.name.clone(), self.signature.clone())
    }
}
