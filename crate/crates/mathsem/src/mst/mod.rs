//! Math syntax trees: lexing and parsing of LaTeX math-mode strings, plus
//! rendering back to canonical LaTeX.
//!
//! The parser is deliberately semantics-free. Whether `\cos(x)` is a function
//! application or a product is decided later by the tagger; here `\cos` is an
//! identifier followed by a fenced sibling.

mod lexer;
mod parser;
mod render;

pub use lexer::tokenize;
pub use parser::{parse, parse_with_arities, MacroArities};
pub use render::render;

use std::fmt;

/// Byte range into the original source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn contains(self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    ControlSeq(String),
    Letter(char),
    Digit(char),
    Operator(char),
    Sub,
    Sup,
    GroupOpen,
    GroupClose,
    ParenOpen,
    ParenClose,
    BracketOpen,
    BracketClose,
    At,
    Comma,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// A parsed math expression. Every node carries its source span.
///
/// Equality is structural: spans are ignored, so a tree compares equal to
/// its re-parse from rendered output.
#[derive(Debug, Clone)]
pub struct MathTree {
    pub kind: NodeKind,
    pub span: Span,
}

impl PartialEq for MathTree {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for MathTree {}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// A symbol: single letter (`x`) or control-word name without the
    /// backslash (`alpha`, `cos`).
    Identifier(String),
    /// Numeric literal, possibly with a decimal point.
    Number(String),
    /// An operator in atom position, e.g. the comma in `(\alpha, \beta)`.
    Operator(char),
    BinaryOp {
        op: char,
        left: Box<MathTree>,
        right: Box<MathTree>,
    },
    /// Explicit function application. Never produced by the parser; later
    /// stages may rewrite a `Sequence` into this form.
    Apply {
        head: Box<MathTree>,
        args: Vec<MathTree>,
    },
    Scripted {
        base: Box<MathTree>,
        sub: Option<Box<MathTree>>,
        sup: Option<Box<MathTree>>,
    },
    Fenced {
        open: char,
        close: char,
        body: Box<MathTree>,
    },
    /// Juxtaposition of two or more atoms (implicit multiplication, or an
    /// operator-punctuated run such as `\alpha , \beta`).
    Sequence(Vec<MathTree>),
    Frac {
        num: Box<MathTree>,
        den: Box<MathTree>,
    },
    Sqrt {
        degree: Option<Box<MathTree>>,
        body: Box<MathTree>,
    },
    SemanticMacro {
        name: String,
        params: Vec<MathTree>,
        args: Vec<MathTree>,
    },
}

impl MathTree {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        MathTree { kind, span }
    }

    /// Depth-first traversal yielding each node together with its index path
    /// from the root.
    pub fn walk(&self) -> Vec<(Vec<usize>, &MathTree)> {
        let mut out = Vec::new();
        self.walk_into(&mut Vec::new(), &mut out);
        out
    }

    fn walk_into<'a>(&'a self, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a MathTree)>) {
        out.push((path.clone(), self));
        let children = self.children();
        for (i, c) in children.into_iter().enumerate() {
            path.push(i);
            c.walk_into(path, out);
            path.pop();
        }
    }

    /// Children in a fixed order, so index paths are stable.
    pub fn children(&self) -> Vec<&MathTree> {
        match &self.kind {
            NodeKind::Identifier(_) | NodeKind::Number(_) | NodeKind::Operator(_) => Vec::new(),
            NodeKind::BinaryOp { left, right, .. } => vec![left, right],
            NodeKind::Apply { head, args } => {
                let mut v = vec![head.as_ref()];
                v.extend(args.iter());
                v
            }
            NodeKind::Scripted { base, sub, sup } => {
                let mut v = vec![base.as_ref()];
                if let Some(s) = sub {
                    v.push(s);
                }
                if let Some(s) = sup {
                    v.push(s);
                }
                v
            }
            NodeKind::Fenced { body, .. } => vec![body],
            NodeKind::Sequence(items) => items.iter().collect(),
            NodeKind::Frac { num, den } => vec![num, den],
            NodeKind::Sqrt { degree, body } => {
                let mut v = Vec::new();
                if let Some(d) = degree {
                    v.push(d.as_ref());
                }
                v.push(body.as_ref());
                v
            }
            NodeKind::SemanticMacro { params, args, .. } => {
                params.iter().chain(args.iter()).collect()
            }
        }
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&MathTree> {
        let mut node = self;
        for &i in path {
            node = *node.children().get(i)?;
        }
        Some(node)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MstError {
    #[error("illegal character at byte {0}")]
    IllegalCharacter(usize),
    #[error("unterminated control sequence at byte {0}")]
    UnterminatedControlSeq(usize),
    #[error("unbalanced delimiter at byte {0}")]
    UnbalancedDelimiter(usize),
    #[error("dangling script at byte {0}")]
    DanglingScript(usize),
    #[error("macro \\{name} expects {expected_params} params and {expected_args} args, got {got_params}/{got_args}")]
    ArityMismatch {
        name: String,
        expected_params: usize,
        expected_args: usize,
        got_params: usize,
        got_args: usize,
    },
    #[error("empty group at byte {0}")]
    EmptyGroup(usize),
    #[error("unexpected token at byte {0}")]
    UnexpectedToken(usize),
    #[error("expression nested too deeply at byte {0}")]
    NestingTooDeep(usize),
}

impl fmt::Display for MathTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// Greek-letter control words recognized as plain identifiers.
pub(crate) const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta", "vartheta",
    "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi",
    "varphi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma",
    "Upsilon", "Phi", "Psi", "Omega",
];

/// Function-name control words (`\cos` and friends) that parse as
/// identifiers; application is resolved by the tagger.
pub(crate) const FUNCTION_NAMES: &[&str] = &[
    "cos", "sin", "tan", "cot", "sec", "csc", "exp", "log", "ln", "sinh", "cosh", "tanh", "arccos",
    "arcsin", "arctan", "min", "max",
];

pub(crate) fn is_symbol_macro(name: &str) -> bool {
    GREEK.contains(&name) || FUNCTION_NAMES.contains(&name)
}
