use super::{MstError, Span, Token, TokenKind};

const OPERATORS: &[char] = &['+', '-', '*', '/', '=', '<', '>', '|', '!', ';', '.'];

/// Split a math-mode string into tokens. Whitespace outside control
/// sequences is discarded; every other byte must belong to the alphabet.
pub fn tokenize(source: &str) -> Result<Vec<Token>, MstError> {
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();

    while let Some((pos, c)) = chars.next() {
        let kind = match c {
            c if c.is_whitespace() => continue,
            '\\' => {
                let mut name = String::new();
                let mut end = pos + 1;
                while let Some(&(p, c)) = chars.peek() {
                    if c.is_ascii_alphabetic() {
                        name.push(c);
                        end = p + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    // lone backslash, or backslash before a non-letter
                    return Err(MstError::UnterminatedControlSeq(pos));
                }
                tokens.push(Token {
                    kind: TokenKind::ControlSeq(name),
                    span: Span::new(pos, end),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() => TokenKind::Letter(c),
            c if c.is_ascii_digit() => TokenKind::Digit(c),
            '^' => TokenKind::Sup,
            '_' => TokenKind::Sub,
            '{' => TokenKind::GroupOpen,
            '}' => TokenKind::GroupClose,
            '(' => TokenKind::ParenOpen,
            ')' => TokenKind::ParenClose,
            '[' => TokenKind::BracketOpen,
            ']' => TokenKind::BracketClose,
            '@' => TokenKind::At,
            ',' => TokenKind::Comma,
            c if OPERATORS.contains(&c) => TokenKind::Operator(c),
            _ => return Err(MstError::IllegalCharacter(pos)),
        };
        tokens.push(Token {
            kind,
            span: Span::new(pos, pos + c.len_utf8()),
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_control_sequence() {
        let toks = tokenize("\\gamma").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::ControlSeq("gamma".into()));
        assert_eq!(toks[0].span, Span::new(0, 6));
    }

    #[test]
    fn letters_operators_digits() {
        let toks = tokenize("x+1").unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Letter('x'),
                TokenKind::Operator('+'),
                TokenKind::Digit('1')
            ]
        );
    }

    #[test]
    fn jacobi_row_tokens() {
        // generic LaTeX for the Jacobi polynomial example
        let toks = tokenize(r"P_n^{(\alpha, \beta)}(\cos(a\Theta))").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind.clone()).collect();
        assert_eq!(kinds.len(), 18);
        assert_eq!(
            &kinds[..8],
            &[
                TokenKind::Letter('P'),
                TokenKind::Sub,
                TokenKind::Letter('n'),
                TokenKind::Sup,
                TokenKind::GroupOpen,
                TokenKind::ParenOpen,
                TokenKind::ControlSeq("alpha".into()),
                TokenKind::Comma,
            ]
        );
    }

    #[test]
    fn spans_cover_non_whitespace() {
        let src = r"a + \beta";
        let toks = tokenize(src).unwrap();
        let mut last_end = 0;
        for t in &toks {
            assert!(t.span.start >= last_end);
            last_end = t.span.end;
        }
        let covered: usize = toks.iter().map(|t| t.span.end - t.span.start).sum();
        let non_ws = src.chars().filter(|c| !c.is_whitespace()).count();
        assert_eq!(covered, non_ws);
    }

    #[test]
    fn trailing_backslash_is_error() {
        assert_eq!(tokenize("x\\"), Err(MstError::UnterminatedControlSeq(1)));
    }

    #[test]
    fn illegal_character() {
        assert_eq!(tokenize("x#y"), Err(MstError::IllegalCharacter(1)));
    }
}
