//! Node-by-node translation of decided trees into Maple or Mathematica
//! source, and a parser for the emitted CAS subset so translations can be
//! checked by round-trip evaluation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::lexicon::{Dialect, Lexicon, Role, Sense};
use crate::mst::{MathTree, NodeKind};
use crate::tagger::TaggedTree;

/// Expression tree in a CAS dialect together with its source text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasExpression {
    pub dialect: Dialect,
    pub tree: CasNode,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CasNode {
    Call(String, Vec<CasNode>),
    Symbol(String),
    Number(String),
    BinOp(char, Box<CasNode>, Box<CasNode>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    CollisionRename { original: String, renamed: String },
    LossyConstruct { description: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationReport {
    pub output: CasExpression,
    pub warnings: Vec<Warning>,
    /// Sense used per symbol node, keyed by index path.
    pub sense_trace: BTreeMap<Vec<usize>, String>,
    /// Free-variable renaming applied by the translation (LaTeX symbol to
    /// emitted CAS name), for equivalence checking.
    pub var_map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TranslateError {
    #[error("undecided symbols: {}", .0.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join(", "))]
    UndecidedNode(Vec<(Vec<usize>, String)>),
    #[error("unknown sense {0}")]
    UnknownSense(String),
    #[error("sense {sense} has no {dialect} translation")]
    MissingTranslation { sense: String, dialect: Dialect },
    #[error("pattern expects {expected} values for ${kind}, got {got}")]
    ArityMismatch {
        kind: String,
        expected: usize,
        got: usize,
    },
    #[error("cannot translate construct: {0}")]
    Unsupported(String),
}

/// Substitute `$p<i>` and `$a<i>` placeholders. Fails if an index is out of
/// range; the result never contains a placeholder.
pub fn instantiate_pattern(
    pattern: &str,
    params: &[String],
    args: &[String],
) -> Result<String, TranslateError> {
    let mut out = String::with_capacity(pattern.len());
    let bytes = pattern.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'$' && i + 1 < bytes.len() && (bytes[i + 1] == b'p' || bytes[i + 1] == b'a')
        {
            let is_param = bytes[i + 1] == b'p';
            let mut j = i + 2;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 2 {
                let index: usize = pattern[i + 2..j].parse().unwrap();
                let pool = if is_param { params } else { args };
                let value = pool.get(index).ok_or_else(|| TranslateError::ArityMismatch {
                    kind: if is_param { "p" } else { "a" }.into(),
                    expected: index + 1,
                    got: pool.len(),
                })?;
                out.push_str(value);
                i = j;
                continue;
            }
        }
        out.push(bytes[i] as char);
        i += 1;
    }
    Ok(out)
}

/// Translate a fully decided tagged tree into `dialect` source.
pub fn translate(
    tagged: &TaggedTree,
    lexicon: &Lexicon,
    dialect: Dialect,
) -> Result<TranslationReport, TranslateError> {
    let undecided: Vec<(Vec<usize>, String)> = tagged
        .undecided()
        .map(|(p, t)| (p.clone(), t.symbol.clone()))
        .collect();
    if !undecided.is_empty() {
        return Err(TranslateError::UndecidedNode(undecided));
    }
    let mut tr = Translator {
        tagged,
        lexicon,
        dialect,
        warnings: Vec::new(),
        sense_trace: BTreeMap::new(),
        var_map: BTreeMap::new(),
    };
    let rendered = tr.emit(&tagged.tree, &mut Vec::new())?;
    let cas = parse_cas(&rendered, dialect)
        .map_err(|e| TranslateError::Unsupported(format!("emitted source failed to re-parse: {e}")))?;
    Ok(TranslationReport {
        output: cas,
        warnings: tr.warnings,
        sense_trace: tr.sense_trace,
        var_map: tr.var_map,
    })
}

struct Translator<'a> {
    tagged: &'a TaggedTree,
    lexicon: &'a Lexicon,
    dialect: Dialect,
    warnings: Vec<Warning>,
    sense_trace: BTreeMap<Vec<usize>, String>,
    var_map: BTreeMap<String, String>,
}

impl<'a> Translator<'a> {
    fn sense_of(&mut self, path: &[usize]) -> Option<(String, Option<&'a Sense>)> {
        let tag = self.tagged.tags.get(path)?;
        let id = tag.decided_sense()?.to_string();
        self.sense_trace.insert(path.to_vec(), id.clone());
        // sense ids may repeat across entries (the \JacobiP macro and the
        // letter P share dlmf:JacobiP), so resolve within the tagged
        // symbol's own entry first
        let sense = self
            .lexicon
            .lookup(&tag.symbol)
            .and_then(|e| e.senses.iter().find(|s| s.id == id))
            .or_else(|| self.lexicon.sense_by_id(&id));
        Some((id, sense))
    }

    fn pattern_of(&self, sense: &Sense) -> Result<String, TranslateError> {
        sense
            .translations
            .get(&self.dialect)
            .cloned()
            .ok_or_else(|| TranslateError::MissingTranslation {
                sense: sense.id.clone(),
                dialect: self.dialect,
            })
    }

    fn emit(&mut self, node: &MathTree, path: &mut Vec<usize>) -> Result<String, TranslateError> {
        match &node.kind {
            NodeKind::Number(n) => Ok(n.clone()),
            NodeKind::Operator(c) => Ok(operator_text(*c)),
            NodeKind::Identifier(symbol) => self.emit_symbol(symbol, path, None, None, None),
            NodeKind::Scripted { base, sub, sup } => match &base.kind {
                NodeKind::Identifier(symbol) => {
                    let symbol = symbol.clone();
                    self.emit_symbol(&symbol, path, sub.as_deref(), sup.as_deref(), None)
                }
                _ => {
                    let base_str = {
                        path.push(0);
                        let s = self.emit(base, path)?;
                        path.pop();
                        s
                    };
                    self.emit_generic_scripts(base_str, sub.as_deref(), sup.as_deref(), path)
                }
            },
            NodeKind::BinaryOp { op, left, right } => {
                let l = {
                    path.push(0);
                    let s = self.emit(left, path)?;
                    path.pop();
                    s
                };
                let r = {
                    path.push(1);
                    let s = self.emit(right, path)?;
                    path.pop();
                    s
                };
                let l = wrap_operand(&l, *op, false);
                let r = wrap_operand(&r, *op, true);
                Ok(format!("{l}{}{r}", operator_text(*op)))
            }
            NodeKind::Apply { head, args } => {
                let h = {
                    path.push(0);
                    let s = self.emit(head, path)?;
                    path.pop();
                    s
                };
                let mut rendered = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    rendered.push(self.emit(a, path)?);
                    path.pop();
                }
                Ok(self.call(&h, &rendered))
            }
            NodeKind::Fenced { body, .. } => {
                path.push(0);
                let inner = self.emit(body, path)?;
                path.pop();
                Ok(format!("({inner})"))
            }
            NodeKind::Sequence(items) => self.emit_sequence(items, path),
            NodeKind::Frac { num, den } => {
                let n = {
                    path.push(0);
                    let s = self.emit(num, path)?;
                    path.pop();
                    s
                };
                let d = {
                    path.push(1);
                    let s = self.emit(den, path)?;
                    path.pop();
                    s
                };
                Ok(format!("({n})/({d})"))
            }
            NodeKind::Sqrt { degree, body } => {
                let body_index = usize::from(degree.is_some());
                let b = {
                    path.push(body_index);
                    let s = self.emit(body, path)?;
                    path.pop();
                    s
                };
                match degree {
                    None => Ok(match self.dialect {
                        Dialect::Maple => format!("sqrt({b})"),
                        Dialect::Mathematica => format!("Sqrt[{b}]"),
                    }),
                    Some(d) => {
                        path.push(0);
                        let deg = self.emit(d, path)?;
                        path.pop();
                        Ok(format!("({b})^(1/({deg}))"))
                    }
                }
            }
            NodeKind::SemanticMacro { name, params, args } => {
                let (id, sense) = self
                    .sense_of(path)
                    .ok_or_else(|| TranslateError::Unsupported(format!("untagged macro \\{name}")))?;
                let sense = sense.ok_or(TranslateError::UnknownSense(id))?;
                let pattern = self.pattern_of(sense)?;
                let mut rendered_params = Vec::new();
                for (i, p) in params.iter().enumerate() {
                    path.push(i);
                    rendered_params.push(self.emit(p, path)?);
                    path.pop();
                }
                let mut rendered_args = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    path.push(params.len() + i);
                    rendered_args.push(self.emit(a, path)?);
                    path.pop();
                }
                instantiate_pattern(&pattern, &rendered_params, &rendered_args)
            }
        }
    }

    /// A symbol occurrence, possibly scripted, possibly applied to a
    /// trailing argument list.
    fn emit_symbol(
        &mut self,
        symbol: &str,
        path: &mut Vec<usize>,
        sub: Option<&MathTree>,
        sup: Option<&MathTree>,
        trailing_args: Option<&[String]>,
    ) -> Result<String, TranslateError> {
        let looked_up = self.sense_of(path);
        let sense = match &looked_up {
            Some((id, Some(sense))) => {
                let _ = id;
                Some(*sense)
            }
            Some((id, None)) => {
                if id.starts_with("var:generic:") {
                    None
                } else {
                    return Err(TranslateError::UnknownSense(id.clone()));
                }
            }
            None => None,
        };
        match sense {
            Some(sense) if sense.role == Role::Function => {
                // scripts supply params (superscript parts first), the
                // trailing fenced group supplies arguments
                let mut params = Vec::new();
                if let Some(sup) = sup {
                    for (i, part) in split_parts(sup).into_iter().enumerate() {
                        let _ = i;
                        params.push(self.emit_detached(part, path)?);
                    }
                }
                if let Some(sub) = sub {
                    for part in split_parts(sub) {
                        params.push(self.emit_detached(part, path)?);
                    }
                }
                let expected = sense.signature.sup_params + sense.signature.sub_params;
                if expected != params.len() {
                    return Err(TranslateError::ArityMismatch {
                        kind: "p".into(),
                        expected,
                        got: params.len(),
                    });
                }
                let args = trailing_args.unwrap_or(&[]);
                if sense.signature.args != args.len() {
                    return Err(TranslateError::ArityMismatch {
                        kind: "a".into(),
                        expected: sense.signature.args,
                        got: args.len(),
                    });
                }
                let pattern = self.pattern_of(sense)?;
                instantiate_pattern(&pattern, &params, args)
            }
            Some(sense) => {
                let pattern = self.pattern_of(sense)?;
                let mut name = pattern;
                if sense.role == Role::Variable {
                    name = self.rename_on_collision(name);
                    self.var_map
                        .insert(symbol.to_string(), strip_cas_wrapper(&name).to_string());
                }
                self.emit_generic_scripts(name, sub, sup, path)
            }
            None => {
                let mut name = default_symbol(symbol, self.dialect);
                name = self.rename_on_collision(name);
                self.var_map
                    .insert(symbol.to_string(), strip_cas_wrapper(&name).to_string());
                self.emit_generic_scripts(name, sub, sup, path)
            }
        }
    }

    /// Scripts on a non-function symbol: subscript becomes an index,
    /// superscript a power.
    fn emit_generic_scripts(
        &mut self,
        base: String,
        sub: Option<&MathTree>,
        sup: Option<&MathTree>,
        path: &mut Vec<usize>,
    ) -> Result<String, TranslateError> {
        let mut out = base;
        if let Some(sub) = sub {
            let s = self.emit_detached(sub, path)?;
            out = match self.dialect {
                Dialect::Maple => format!("{out}[{s}]"),
                Dialect::Mathematica => format!("Subscript[{out},{s}]"),
            };
        }
        if let Some(sup) = sup {
            let s = self.emit_detached(sup, path)?;
            let base = if is_simple(&out) { out } else { format!("({out})") };
            let exp = if is_simple(&s) { s } else { format!("({s})") };
            out = format!("{base}^{exp}");
        }
        Ok(out)
    }

    /// Emit a subtree that is not addressed by a tag path of its own
    /// (script operands viewed as parameters).
    fn emit_detached(
        &mut self,
        node: &MathTree,
        _path: &mut Vec<usize>,
    ) -> Result<String, TranslateError> {
        // locate its true path by span within the tagged tree
        let mut found = None;
        for (p, n) in self.tagged.tree.walk() {
            if std::ptr::eq(n, node) {
                found = Some(p);
                break;
            }
        }
        match found {
            Some(p) => {
                let mut p = p;
                self.emit(node, &mut p)
            }
            None => self.emit(node, &mut Vec::new()),
        }
    }

    fn emit_sequence(
        &mut self,
        items: &[MathTree],
        path: &mut Vec<usize>,
    ) -> Result<String, TranslateError> {
        let mut pieces: Vec<(String, bool)> = Vec::new(); // (text, is_operator)
        let mut i = 0;
        while i < items.len() {
            let item = &items[i];
            // function application: decided function sense followed by a
            // parenthesized group
            let head_symbol = match &item.kind {
                NodeKind::Identifier(s) => Some((s.clone(), None, None)),
                NodeKind::Scripted { base, sub, sup } => match &base.kind {
                    NodeKind::Identifier(s) => {
                        Some((s.clone(), sub.as_deref(), sup.as_deref()))
                    }
                    _ => None,
                },
                _ => None,
            };
            let next_fenced = items.get(i + 1).and_then(|n| match &n.kind {
                NodeKind::Fenced { open: '(', body, .. } => Some(body.as_ref()),
                _ => None,
            });
            if let (Some((symbol, sub, sup)), Some(fenced_body)) = (&head_symbol, next_fenced) {
                path.push(i);
                let is_function = self
                    .tagged
                    .tags
                    .get(path.as_slice())
                    .and_then(|t| {
                        let id = t.decided_sense()?;
                        self.lexicon
                            .lookup(&t.symbol)
                            .and_then(|e| e.senses.iter().find(|s| s.id == id))
                            .or_else(|| self.lexicon.sense_by_id(id))
                    })
                    .map(|s| s.role == Role::Function && s.signature.args > 0)
                    .unwrap_or(false);
                if is_function {
                    let mut args = Vec::new();
                    for part in split_parts_owned(fenced_body) {
                        args.push(self.emit_detached(part, path)?);
                    }
                    let rendered = self.emit_symbol(symbol, path, *sub, *sup, Some(&args))?;
                    path.pop();
                    pieces.push((rendered, false));
                    i += 2;
                    continue;
                }
                path.pop();
            }
            path.push(i);
            let rendered = self.emit(item, path)?;
            path.pop();
            let is_op = matches!(item.kind, NodeKind::Operator(_));
            pieces.push((rendered, is_op));
            i += 1;
        }
        // join with the dialect's implicit-multiplication policy
        let mut out = String::new();
        let mut prev_op = true;
        for (text, is_op) in pieces {
            if !out.is_empty() && !is_op && !prev_op {
                match self.dialect {
                    Dialect::Maple => {
                        if text.starts_with('(') {
                            out.push('*');
                        } else {
                            out.push(' ');
                        }
                    }
                    Dialect::Mathematica => {
                        if !text.starts_with("\\[") {
                            out.push(' ');
                        }
                    }
                }
            }
            out.push_str(&text);
            prev_op = is_op;
        }
        Ok(out)
    }

    fn call(&self, head: &str, args: &[String]) -> String {
        match self.dialect {
            Dialect::Maple => format!("{head}({})", args.join(", ")),
            Dialect::Mathematica => format!("{head}[{}]", args.join(",")),
        }
    }

    fn rename_on_collision(&mut self, name: String) -> String {
        let plain = strip_cas_wrapper(&name);
        if self
            .lexicon
            .reserved_names(self.dialect)
            .iter()
            .any(|r| r == plain)
        {
            let renamed = format!("{plain}_");
            self.warnings.push(Warning::CollisionRename {
                original: plain.to_string(),
                renamed: renamed.clone(),
            });
            renamed
        } else {
            name
        }
    }
}

/// Split a fenced body (or any tree) on top-level comma operators.
fn split_parts(tree: &MathTree) -> Vec<&MathTree> {
    match &tree.kind {
        NodeKind::Fenced { body, .. } => split_parts_owned(body),
        _ => split_parts_owned(tree),
    }
}

fn split_parts_owned(tree: &MathTree) -> Vec<&MathTree> {
    match &tree.kind {
        NodeKind::Sequence(items)
            if items.iter().any(|i| matches!(i.kind, NodeKind::Operator(','))) =>
        {
            // rebuilding sub-sequences would lose tag paths; comma-split
            // only applies to flat runs, which covers the lexicon subset
            items
                .iter()
                .filter(|i| !matches!(i.kind, NodeKind::Operator(',')))
                .collect()
        }
        _ => vec![tree],
    }
}

fn operator_text(c: char) -> String {
    match c {
        '·' => "*".to_string(),
        _ => c.to_string(),
    }
}

fn wrap_operand(text: &str, parent_op: char, is_right: bool) -> String {
    // keep emitted text unambiguous without tracking CAS precedence of the
    // operand: wrap anything containing a top-level space or operator
    let needs = text.chars().any(|c| "+-*/=<> ".contains(c));
    let tight = matches!(parent_op, '*' | '/' | '·') || (is_right && parent_op == '-');
    if needs && tight && !text.starts_with('(') {
        format!("({text})")
    } else {
        text.to_string()
    }
}

fn is_simple(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Default rendering for symbols without a lexicon translation.
fn default_symbol(symbol: &str, dialect: Dialect) -> String {
    if symbol.chars().count() == 1 {
        return symbol.to_string();
    }
    match dialect {
        Dialect::Maple => symbol.to_string(),
        Dialect::Mathematica => {
            let mut chars = symbol.chars();
            let first = chars.next().unwrap();
            let rest: String = chars.collect();
            if first.is_ascii_uppercase() {
                format!("\\[Capital{first}{rest}]")
            } else {
                format!("\\[{}{rest}]", first.to_ascii_uppercase())
            }
        }
    }
}

/// `\[Name]` -> `Name`; other text unchanged.
pub fn strip_cas_wrapper(s: &str) -> &str {
    s.strip_prefix("\\[")
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(s)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("CAS syntax error at byte {0}")]
pub struct CasSyntaxError(pub usize);

/// Parse a string in the dialect's call/infix subset back into a tree.
pub fn parse_cas(source: &str, dialect: Dialect) -> Result<CasExpression, CasSyntaxError> {
    let tokens = cas_tokenize(source)?;
    let mut p = CasParser {
        tokens: &tokens,
        pos: 0,
        dialect,
    };
    let tree = p.parse_expr()?;
    if p.pos != p.tokens.len() {
        return Err(CasSyntaxError(p.tokens[p.pos].1));
    }
    Ok(CasExpression {
        dialect,
        tree,
        rendered: source.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum CasTok {
    Name(String),
    Number(String),
    Op(char),
    Open(char),
    Close(char),
    Comma,
}

fn cas_tokenize(source: &str) -> Result<Vec<(CasTok, usize)>, CasSyntaxError> {
    let mut out = Vec::new();
    let mut chars = source.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '\\' => {
                chars.next();
                match chars.next() {
                    Some((_, '[')) => {}
                    _ => return Err(CasSyntaxError(pos)),
                }
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some((_, ']')) => break,
                        Some((_, c)) if c.is_ascii_alphanumeric() => name.push(c),
                        _ => return Err(CasSyntaxError(pos)),
                    }
                }
                if name.is_empty() {
                    return Err(CasSyntaxError(pos));
                }
                out.push((CasTok::Name(name), pos));
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((CasTok::Name(name), pos));
            }
            c if c.is_ascii_digit() => {
                let mut lit = String::new();
                let mut seen_dot = false;
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_digit() || (c == '.' && !seen_dot) {
                        seen_dot |= c == '.';
                        lit.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((CasTok::Number(lit), pos));
            }
            '+' | '-' | '*' | '/' | '^' => {
                chars.next();
                out.push((CasTok::Op(c), pos));
            }
            '(' | '[' => {
                chars.next();
                out.push((CasTok::Open(c), pos));
            }
            ')' | ']' => {
                chars.next();
                out.push((CasTok::Close(c), pos));
            }
            ',' => {
                chars.next();
                out.push((CasTok::Comma, pos));
            }
            _ => return Err(CasSyntaxError(pos)),
        }
    }
    Ok(out)
}

struct CasParser<'a> {
    tokens: &'a [(CasTok, usize)],
    pos: usize,
    dialect: Dialect,
}

impl<'a> CasParser<'a> {
    fn peek(&self) -> Option<&CasTok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(usize::MAX)
    }

    fn parse_expr(&mut self) -> Result<CasNode, CasSyntaxError> {
        let mut left = self.parse_term()?;
        while let Some(CasTok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let right = self.parse_term()?;
            left = CasNode::BinOp(c, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_term(&mut self) -> Result<CasNode, CasSyntaxError> {
        let mut left = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(CasTok::Op(c @ ('*' | '/'))) => {
                    let c = *c;
                    self.pos += 1;
                    let right = self.parse_factor()?;
                    left = CasNode::BinOp(c, Box::new(left), Box::new(right));
                }
                // juxtaposition is multiplication
                Some(CasTok::Name(_)) | Some(CasTok::Number(_)) => {
                    let right = self.parse_factor()?;
                    left = CasNode::BinOp('*', Box::new(left), Box::new(right));
                }
                Some(CasTok::Open('(')) if self.dialect == Dialect::Mathematica => {
                    let right = self.parse_factor()?;
                    left = CasNode::BinOp('*', Box::new(left), Box::new(right));
                }
                _ => break,
            }
        }
        Ok(left)
    }

    fn parse_factor(&mut self) -> Result<CasNode, CasSyntaxError> {
        let base = self.parse_primary()?;
        if let Some(CasTok::Op('^')) = self.peek() {
            self.pos += 1;
            // right-associative
            let exp = self.parse_factor()?;
            return Ok(CasNode::BinOp('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> Result<CasNode, CasSyntaxError> {
        match self.peek().cloned() {
            Some(CasTok::Op('-')) => {
                self.pos += 1;
                let inner = self.parse_factor()?;
                Ok(CasNode::Call("neg".into(), vec![inner]))
            }
            Some(CasTok::Number(n)) => {
                self.pos += 1;
                Ok(CasNode::Number(n))
            }
            Some(CasTok::Name(name)) => {
                self.pos += 1;
                let call_open = match self.dialect {
                    Dialect::Maple => '(',
                    Dialect::Mathematica => '[',
                };
                if self.peek() == Some(&CasTok::Open(call_open)) {
                    self.pos += 1;
                    let close = if call_open == '(' { ')' } else { ']' };
                    let mut args = Vec::new();
                    if self.peek() != Some(&CasTok::Close(close)) {
                        loop {
                            args.push(self.parse_expr()?);
                            match self.peek() {
                                Some(CasTok::Comma) => {
                                    self.pos += 1;
                                }
                                _ => break,
                            }
                        }
                    }
                    if self.peek() != Some(&CasTok::Close(close)) {
                        return Err(CasSyntaxError(self.here()));
                    }
                    self.pos += 1;
                    Ok(CasNode::Call(name, args))
                } else {
                    Ok(CasNode::Symbol(name))
                }
            }
            Some(CasTok::Open('(')) => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                if self.peek() != Some(&CasTok::Close(')')) {
                    return Err(CasSyntaxError(self.here()));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(CasSyntaxError(self.here())),
        }
    }
}

/// Canonical rendering of a CAS tree. Rendering twice is byte-identical,
/// and the output re-parses to an equal tree.
pub fn render_cas(tree: &CasNode, dialect: Dialect) -> String {
    match tree {
        CasNode::Number(n) => n.clone(),
        CasNode::Symbol(name) => match dialect {
            Dialect::Mathematica if is_cas_greek(name) => format!("\\[{name}]"),
            _ => name.clone(),
        },
        CasNode::Call(name, args) if name == "neg" && args.len() == 1 => {
            format!("-{}", render_cas_wrapped(&args[0], dialect))
        }
        CasNode::Call(name, args) => {
            let rendered: Vec<String> = args.iter().map(|a| render_cas(a, dialect)).collect();
            match dialect {
                Dialect::Maple => format!("{name}({})", rendered.join(", ")),
                Dialect::Mathematica => format!("{name}[{}]", rendered.join(",")),
            }
        }
        CasNode::BinOp(op, l, r) => {
            let lp = cas_prec(tree);
            let left = if cas_prec(l) < lp {
                format!("({})", render_cas(l, dialect))
            } else {
                render_cas(l, dialect)
            };
            let right = if cas_prec(r) <= lp && matches!(r.as_ref(), CasNode::BinOp(..)) {
                format!("({})", render_cas(r, dialect))
            } else {
                render_cas(r, dialect)
            };
            format!("{left}{op}{right}")
        }
    }
}

fn render_cas_wrapped(tree: &CasNode, dialect: Dialect) -> String {
    match tree {
        CasNode::BinOp(..) => format!("({})", render_cas(tree, dialect)),
        _ => render_cas(tree, dialect),
    }
}

fn cas_prec(tree: &CasNode) -> u8 {
    match tree {
        CasNode::BinOp('+' | '-', ..) => 1,
        CasNode::BinOp('*' | '/', ..) => 2,
        CasNode::BinOp('^', ..) => 3,
        _ => 4,
    }
}

fn is_cas_greek(name: &str) -> bool {
    let plain = name.strip_prefix("Capital").unwrap_or(name);
    crate::mst::GREEK
        .iter()
        .any(|g| g.eq_ignore_ascii_case(plain))
}
