use std::collections::HashMap;

use super::{is_symbol_macro, MathTree, MstError, NodeKind, Span, Token, TokenKind};

/// Declared (param count, arg count) per semantic-macro name, usually
/// derived from a lexicon. The parser checks arities eagerly when given one.
pub type MacroArities = HashMap<String, (usize, usize)>;

const MAX_DEPTH: usize = 200;

/// Parse a token list into a single tree consuming all tokens.
pub fn parse(tokens: &[Token]) -> Result<MathTree, MstError> {
    parse_with_arities(tokens, None)
}

pub fn parse_with_arities(
    tokens: &[Token],
    arities: Option<&MacroArities>,
) -> Result<MathTree, MstError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        arities,
        depth: 0,
    };
    let tree = p.parse_run(&[])?;
    match p.peek() {
        None => Ok(tree),
        Some(t) => Err(MstError::UnbalancedDelimiter(t.span.start)),
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    arities: Option<&'a MacroArities>,
    depth: usize,
}

fn closes(kind: &TokenKind) -> bool {
    matches!(
        kind,
        TokenKind::GroupClose | TokenKind::ParenClose | TokenKind::BracketClose
    )
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek()
            .map(|t| t.span.start)
            .or_else(|| self.tokens.last().map(|t| t.span.end))
            .unwrap_or(0)
    }

    fn enter(&mut self) -> Result<(), MstError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(MstError::NestingTooDeep(self.here()));
        }
        Ok(())
    }

    fn at_stop(&self, stops: &[TokenKind]) -> bool {
        match self.peek_kind() {
            None => true,
            Some(TokenKind::ControlSeq(n)) if n == "right" => true,
            Some(k) => closes(k) || stops.contains(k),
        }
    }

    /// A run of items terminated by end of input or a closing delimiter.
    /// Operators that have no operand on one side stay as operator atoms.
    fn parse_run(&mut self, stops: &[TokenKind]) -> Result<MathTree, MstError> {
        self.enter()?;
        let mut items: Vec<MathTree> = Vec::new();
        while !self.at_stop(stops) {
            match self.peek_kind() {
                // An operator reaching the run loop has no left operand to
                // bind (run start, or the previous item refused it): it
                // stays an operator atom, like the comma in `(\alpha, \beta)`.
                Some(TokenKind::Operator(c)) => {
                    let c = *c;
                    let span = self.bump().unwrap().span;
                    items.push(MathTree::new(NodeKind::Operator(c), span));
                }
                Some(TokenKind::Comma) => {
                    let span = self.bump().unwrap().span;
                    items.push(MathTree::new(NodeKind::Operator(','), span));
                }
                _ => items.push(self.parse_binary(1)?),
            }
        }
        self.depth -= 1;
        match items.len() {
            0 => Err(MstError::EmptyGroup(self.here())),
            1 => Ok(items.pop().unwrap()),
            _ => {
                let span = items
                    .iter()
                    .fold(items[0].span, |acc, i| acc.merge(i.span));
                Ok(MathTree::new(NodeKind::Sequence(items), span))
            }
        }
    }

    /// Precedence-climbing over `= < >` (1), `+ -` (2), `* / \cdot` (3).
    fn parse_binary(&mut self, min_prec: u8) -> Result<MathTree, MstError> {
        self.enter()?;
        let mut left = self.parse_juxt()?;
        loop {
            let (op, prec) = match self.peek_kind() {
                Some(TokenKind::Operator(c)) => match binary_prec(*c) {
                    Some(p) => (*c, p),
                    None => break,
                },
                Some(TokenKind::ControlSeq(n)) if n == "cdot" => ('·', 3),
                _ => break,
            };
            if prec < min_prec || !self.starts_atom_at(self.pos + 1) {
                break;
            }
            self.bump();
            let right = self.parse_binary(prec + 1)?;
            let span = left.span.merge(right.span);
            left = MathTree::new(
                NodeKind::BinaryOp {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span,
            );
        }
        self.depth -= 1;
        Ok(left)
    }

    fn starts_atom_at(&self, pos: usize) -> bool {
        match self.tokens.get(pos).map(|t| &t.kind) {
            Some(TokenKind::Letter(_))
            | Some(TokenKind::Digit(_))
            | Some(TokenKind::GroupOpen)
            | Some(TokenKind::ParenOpen)
            | Some(TokenKind::BracketOpen) => true,
            Some(TokenKind::ControlSeq(n)) => n != "cdot" && n != "right",
            _ => false,
        }
    }

    /// Juxtaposed atoms become a Sequence (implicit multiplication).
    fn parse_juxt(&mut self) -> Result<MathTree, MstError> {
        self.enter()?;
        let mut items: Vec<MathTree> = Vec::new();
        loop {
            if !self.starts_atom_at(self.pos) {
                if items.is_empty() {
                    let here = self.here();
                    self.depth -= 1;
                    return Err(match self.peek_kind() {
                        Some(TokenKind::Sub) | Some(TokenKind::Sup) => {
                            MstError::DanglingScript(here)
                        }
                        Some(TokenKind::At) => MstError::UnexpectedToken(here),
                        _ => MstError::UnexpectedToken(here),
                    });
                }
                break;
            }
            let from_group = matches!(self.peek_kind(), Some(TokenKind::GroupOpen));
            let atom = self.parse_scripted()?;
            // a bare group holding a juxtaposition run dissolves into the
            // enclosing run, so the rendered form parses back to the same
            // tree; runs carrying operator atoms keep their own node, since
            // those operators would otherwise migrate to the outer level
            if from_group && !matches!(atom.kind, NodeKind::Scripted { .. }) {
                match atom.kind {
                    NodeKind::Sequence(children)
                        if children
                            .iter()
                            .all(|c| !matches!(c.kind, NodeKind::Operator(_))) =>
                    {
                        items.extend(children);
                        continue;
                    }
                    kind => items.push(MathTree::new(kind, atom.span)),
                }
            } else {
                items.push(atom);
            }
        }
        self.depth -= 1;
        match items.len() {
            1 => Ok(items.pop().unwrap()),
            _ => {
                let span = items
                    .iter()
                    .fold(items[0].span, |acc, i| acc.merge(i.span));
                Ok(MathTree::new(NodeKind::Sequence(items), span))
            }
        }
    }

    /// An atom with optional `_`/`^` scripts in either order, normalized to
    /// a single Scripted node. A repeated script wraps the node again.
    fn parse_scripted(&mut self) -> Result<MathTree, MstError> {
        self.enter()?;
        let mut base = self.parse_primary()?;
        let mut sub: Option<Box<MathTree>> = None;
        let mut sup: Option<Box<MathTree>> = None;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Sub) => {
                    if sub.is_some() {
                        base = fold_scripts(base, sub.take(), sup.take());
                    }
                    self.bump();
                    sub = Some(Box::new(self.parse_script_operand()?));
                }
                Some(TokenKind::Sup) => {
                    if sup.is_some() {
                        base = fold_scripts(base, sub.take(), sup.take());
                    }
                    self.bump();
                    sup = Some(Box::new(self.parse_script_operand()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(fold_scripts(base, sub, sup))
    }

    /// Script operand: a braced group or a single token atom.
    fn parse_script_operand(&mut self) -> Result<MathTree, MstError> {
        match self.peek_kind() {
            Some(TokenKind::GroupOpen) => self.parse_primary(),
            Some(TokenKind::Letter(c)) => {
                let c = *c;
                let span = self.bump().unwrap().span;
                Ok(MathTree::new(NodeKind::Identifier(c.to_string()), span))
            }
            Some(TokenKind::Digit(c)) => {
                let c = *c;
                let span = self.bump().unwrap().span;
                Ok(MathTree::new(NodeKind::Number(c.to_string()), span))
            }
            Some(TokenKind::ControlSeq(_)) => self.parse_primary(),
            _ => Err(MstError::DanglingScript(self.here())),
        }
    }

    fn parse_primary(&mut self) -> Result<MathTree, MstError> {
        self.enter()?;
        let result = self.parse_primary_inner();
        self.depth -= 1;
        result
    }

    fn parse_primary_inner(&mut self) -> Result<MathTree, MstError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(MstError::UnexpectedToken(self.here())),
        };
        match &tok.kind {
            TokenKind::Letter(c) => {
                self.bump();
                Ok(MathTree::new(NodeKind::Identifier(c.to_string()), tok.span))
            }
            TokenKind::Digit(_) => self.parse_number(),
            TokenKind::GroupOpen => {
                self.bump();
                let inner = self.parse_run(&[])?;
                match self.peek_kind() {
                    Some(TokenKind::GroupClose) => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(MstError::UnbalancedDelimiter(tok.span.start)),
                }
            }
            TokenKind::ParenOpen => self.parse_fenced('(', ')', TokenKind::ParenClose),
            TokenKind::BracketOpen => self.parse_fenced('[', ']', TokenKind::BracketClose),
            TokenKind::ControlSeq(name) => {
                let name = name.clone();
                self.parse_control(&name, tok.span)
            }
            _ => Err(MstError::UnexpectedToken(tok.span.start)),
        }
    }

    fn parse_number(&mut self) -> Result<MathTree, MstError> {
        let mut literal = String::new();
        let start = self.here();
        let mut end = start;
        while let Some(TokenKind::Digit(c)) = self.peek_kind() {
            literal.push(*c);
            end = self.bump().unwrap().span.end;
        }
        // decimal point only between digits
        if matches!(self.peek_kind(), Some(TokenKind::Operator('.')))
            && matches!(
                self.tokens.get(self.pos + 1).map(|t| &t.kind),
                Some(TokenKind::Digit(_))
            )
        {
            literal.push('.');
            self.bump();
            while let Some(TokenKind::Digit(c)) = self.peek_kind() {
                literal.push(*c);
                end = self.bump().unwrap().span.end;
            }
        }
        Ok(MathTree::new(NodeKind::Number(literal), Span::new(start, end)))
    }

    fn parse_fenced(
        &mut self,
        open: char,
        close: char,
        close_kind: TokenKind,
    ) -> Result<MathTree, MstError> {
        let start = self.bump().unwrap().span;
        let body = self.parse_run(&[])?;
        match self.peek_kind() {
            Some(k) if *k == close_kind => {
                let end = self.bump().unwrap().span;
                Ok(MathTree::new(
                    NodeKind::Fenced {
                        open,
                        close,
                        body: Box::new(body),
                    },
                    start.merge(end),
                ))
            }
            _ => Err(MstError::UnbalancedDelimiter(start.start)),
        }
    }

    fn parse_control(&mut self, name: &str, span: Span) -> Result<MathTree, MstError> {
        match name {
            "frac" => {
                self.bump();
                let num = self.parse_macro_operand()?;
                let den = self.parse_macro_operand()?;
                let full = span.merge(den.span);
                Ok(MathTree::new(
                    NodeKind::Frac {
                        num: Box::new(num),
                        den: Box::new(den),
                    },
                    full,
                ))
            }
            "sqrt" => {
                self.bump();
                let degree = if matches!(self.peek_kind(), Some(TokenKind::BracketOpen)) {
                    self.bump();
                    let d = self.parse_run(&[])?;
                    match self.peek_kind() {
                        Some(TokenKind::BracketClose) => {
                            self.bump();
                        }
                        _ => return Err(MstError::UnbalancedDelimiter(span.start)),
                    }
                    Some(Box::new(d))
                } else {
                    None
                };
                let body = self.parse_macro_operand()?;
                let full = span.merge(body.span);
                Ok(MathTree::new(
                    NodeKind::Sqrt {
                        degree,
                        body: Box::new(body),
                    },
                    full,
                ))
            }
            "left" => {
                self.bump();
                let (open, close, close_kind) = match self.peek_kind() {
                    Some(TokenKind::ParenOpen) => ('(', ')', TokenKind::ParenClose),
                    Some(TokenKind::BracketOpen) => ('[', ']', TokenKind::BracketClose),
                    Some(TokenKind::Operator('|')) => ('|', '|', TokenKind::Operator('|')),
                    _ => return Err(MstError::UnbalancedDelimiter(span.start)),
                };
                self.bump();
                let stop = [close_kind.clone()];
                let body = self.parse_run(&stop)?;
                match self.peek_kind() {
                    Some(TokenKind::ControlSeq(n)) if n == "right" => {
                        self.bump();
                    }
                    _ => return Err(MstError::UnbalancedDelimiter(span.start)),
                }
                match self.peek_kind() {
                    Some(k) if *k == close_kind => {
                        let end = self.bump().unwrap().span;
                        Ok(MathTree::new(
                            NodeKind::Fenced {
                                open,
                                close,
                                body: Box::new(body),
                            },
                            span.merge(end),
                        ))
                    }
                    _ => Err(MstError::UnbalancedDelimiter(span.start)),
                }
            }
            "right" => Err(MstError::UnbalancedDelimiter(span.start)),
            "cdot" => Err(MstError::UnexpectedToken(span.start)),
            _ => {
                self.bump();
                let symbol = is_symbol_macro(name);
                let grabs_params = !symbol;
                let mut params = Vec::new();
                let mut args = Vec::new();
                let mut end = span;
                if grabs_params {
                    while matches!(self.peek_kind(), Some(TokenKind::GroupOpen)) {
                        let open = self.bump().unwrap().span;
                        let p = self.parse_run(&[])?;
                        match self.peek_kind() {
                            Some(TokenKind::GroupClose) => {
                                end = self.bump().unwrap().span;
                            }
                            _ => return Err(MstError::UnbalancedDelimiter(open.start)),
                        }
                        params.push(p);
                    }
                }
                while matches!(self.peek_kind(), Some(TokenKind::At)) {
                    self.bump();
                    match self.peek_kind() {
                        Some(TokenKind::GroupOpen) => {
                            let open = self.bump().unwrap().span;
                            let a = self.parse_run(&[])?;
                            match self.peek_kind() {
                                Some(TokenKind::GroupClose) => {
                                    end = self.bump().unwrap().span;
                                }
                                _ => return Err(MstError::UnbalancedDelimiter(open.start)),
                            }
                            args.push(a);
                        }
                        _ => return Err(MstError::UnexpectedToken(self.here())),
                    }
                }
                let full = span.merge(end);
                if params.is_empty() && args.is_empty() {
                    // Unknown control sequences without groups degrade to
                    // identifiers; Greek and function names always do.
                    return Ok(MathTree::new(NodeKind::Identifier(name.to_string()), full));
                }
                if let Some(arities) = self.arities {
                    if let Some(&(ep, ea)) = arities.get(name) {
                        if ep != params.len() || ea != args.len() {
                            return Err(MstError::ArityMismatch {
                                name: name.to_string(),
                                expected_params: ep,
                                expected_args: ea,
                                got_params: params.len(),
                                got_args: args.len(),
                            });
                        }
                    }
                }
                Ok(MathTree::new(
                    NodeKind::SemanticMacro {
                        name: name.to_string(),
                        params,
                        args,
                    },
                    full,
                ))
            }
        }
    }

    /// `\frac`/`\sqrt` operand: braced group or a single token.
    fn parse_macro_operand(&mut self) -> Result<MathTree, MstError> {
        match self.peek_kind() {
            Some(TokenKind::GroupOpen) => self.parse_primary(),
            Some(TokenKind::Letter(_)) | Some(TokenKind::Digit(_)) => self.parse_script_operand(),
            Some(TokenKind::ControlSeq(_)) => self.parse_primary(),
            _ => Err(MstError::UnexpectedToken(self.here())),
        }
    }
}

fn binary_prec(c: char) -> Option<u8> {
    match c {
        '=' | '<' | '>' => Some(1),
        '+' | '-' => Some(2),
        '*' | '/' => Some(3),
        _ => None,
    }
}

fn fold_scripts(
    base: MathTree,
    sub: Option<Box<MathTree>>,
    sup: Option<Box<MathTree>>,
) -> MathTree {
    if sub.is_none() && sup.is_none() {
        return base;
    }
    let mut span = base.span;
    if let Some(s) = &sub {
        span = span.merge(s.span);
    }
    if let Some(s) = &sup {
        span = span.merge(s.span);
    }
    MathTree::new(
        NodeKind::Scripted {
            base: Box::new(base),
            sub,
            sup,
        },
        span,
    )
}
