use super::{MathTree, NodeKind};

/// Render a tree back to canonical LaTeX. A single space separates a
/// control word from a following letter; nothing else is spaced. Scripts
/// and macro operands are always braced.
pub fn render(tree: &MathTree) -> String {
    let mut w = Writer::default();
    w.node(tree);
    w.out
}

#[derive(Default)]
struct Writer {
    out: String,
    /// set after a control word, which would swallow a following letter
    pending_word: bool,
}

impl Writer {
    fn push_str(&mut self, s: &str) {
        if self.pending_word {
            if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                self.out.push(' ');
            }
            self.pending_word = false;
        }
        self.out.push_str(s);
    }

    fn control_word(&mut self, name: &str) {
        self.push_str("\\");
        self.out.push_str(name);
        self.pending_word = true;
    }

    fn symbol(&mut self, s: &str) {
        if s.chars().count() == 1 {
            self.push_str(s);
        } else {
            self.control_word(s);
        }
    }

    fn braced(&mut self, t: &MathTree) {
        self.push_str("{");
        self.node(t);
        self.push_str("}");
    }

    fn node(&mut self, t: &MathTree) {
        match &t.kind {
            NodeKind::Identifier(s) => self.symbol(s),
            NodeKind::Number(n) => self.push_str(n),
            NodeKind::Operator(c) => {
                if *c == '·' {
                    self.control_word("cdot");
                } else {
                    let mut buf = [0u8; 4];
                    self.push_str(c.encode_utf8(&mut buf));
                }
            }
            NodeKind::BinaryOp { op, left, right } => {
                self.binary_child(left, *op, false);
                if *op == '·' {
                    self.control_word("cdot");
                } else {
                    let mut buf = [0u8; 4];
                    self.push_str(op.encode_utf8(&mut buf));
                }
                self.binary_child(right, *op, true);
            }
            NodeKind::Apply { head, args } => {
                self.node(head);
                self.push_str("(");
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.push_str(",");
                    }
                    self.node(a);
                }
                self.push_str(")");
            }
            NodeKind::Scripted { base, sub, sup } => {
                if needs_brace(base) {
                    self.braced(base);
                } else {
                    self.node(base);
                }
                if let Some(s) = sub {
                    self.push_str("_");
                    self.braced(s);
                }
                if let Some(s) = sup {
                    self.push_str("^");
                    self.braced(s);
                }
            }
            NodeKind::Fenced { open, close, body } => {
                let mut buf = [0u8; 4];
                self.push_str(open.encode_utf8(&mut buf));
                self.node(body);
                self.push_str(close.encode_utf8(&mut buf));
            }
            NodeKind::Sequence(items) => {
                for item in items {
                    if needs_brace(item) {
                        self.braced(item);
                    } else {
                        self.node(item);
                    }
                }
            }
            NodeKind::Frac { num, den } => {
                self.control_word("frac");
                self.pending_word = false;
                self.braced(num);
                self.braced(den);
            }
            NodeKind::Sqrt { degree, body } => {
                self.control_word("sqrt");
                self.pending_word = false;
                if let Some(d) = degree {
                    self.push_str("[");
                    self.node(d);
                    self.push_str("]");
                }
                self.braced(body);
            }
            NodeKind::SemanticMacro { name, params, args } => {
                self.control_word(name);
                self.pending_word = false;
                for p in params {
                    self.braced(p);
                }
                for a in args {
                    self.push_str("@");
                    self.braced(a);
                }
            }
        }
    }

    fn binary_child(&mut self, child: &MathTree, parent_op: char, is_right: bool) {
        let wrap = match &child.kind {
            NodeKind::BinaryOp { op, .. } => {
                let (cp, pp) = (prec(*op), prec(parent_op));
                cp < pp || (is_right && cp == pp)
            }
            NodeKind::Sequence(items) => items
                .iter()
                .any(|i| matches!(i.kind, NodeKind::Operator(_))),
            NodeKind::Operator(_) => true,
            _ => false,
        };
        if wrap {
            self.braced(child);
        } else {
            self.node(child);
        }
    }
}

fn prec(op: char) -> u8 {
    match op {
        '=' | '<' | '>' => 1,
        '+' | '-' => 2,
        _ => 3,
    }
}

/// Children of sequences and script bases that would re-associate when
/// rendered bare get braces.
fn needs_brace(t: &MathTree) -> bool {
    matches!(
        t.kind,
        NodeKind::BinaryOp { .. } | NodeKind::Sequence(_)
    )
}
